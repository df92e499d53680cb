//! CSV, JSON, and SVG emission. CSV numbers carry 17 significant digits so
//! identical configs reproduce byte-identical files.

use crate::green::Pole;
use crate::grid::FrequencyGrid;
use crate::oracle::Trajectory;
use num_complex::Complex64;
use std::io::{self, Write};
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> io::Result<()> {
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    let n_bath = traj.bath.as_ref().map_or(0, |b| b.len());
    let mut header = String::from("t,x");
    for i in 0..n_bath {
        header.push_str(&format!(",y{}", i + 1));
    }
    writeln!(out, "{header}")?;
    for i in 0..traj.grid.n_samples {
        let mut row = format!("{},{}", fmt_f64(traj.grid.time(i)), fmt_f64(traj.x[i]));
        if let Some(bath) = &traj.bath {
            for col in bath {
                row.push(',');
                row.push_str(&fmt_f64(col[i]));
            }
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn write_green_csv(
    path: &Path,
    grid: &FrequencyGrid,
    d_r: &[Complex64],
    d_n: &[Complex64],
    d_f: &[Complex64],
) -> io::Result<()> {
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "omega,re_dr,im_dr,re_dn,im_dn,re_df,im_df")?;
    for k in 0..grid.n_samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(grid.omega(k)),
            fmt_f64(d_r[k].re),
            fmt_f64(d_r[k].im),
            fmt_f64(d_n[k].re),
            fmt_f64(d_n[k].im),
            fmt_f64(d_f[k].re),
            fmt_f64(d_f[k].im),
        )?;
    }
    Ok(())
}

pub fn write_poles_json(path: &Path, poles: &[Pole]) -> io::Result<()> {
    let entries: Vec<serde_json::Value> = poles
        .iter()
        .map(|p| {
            serde_json::json!({
                "re": p.position.re,
                "im": p.position.im,
                "residue_re": p.residue.re,
                "residue_im": p.residue.im,
            })
        })
        .collect();
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &entries)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_columns_csv(path: &Path, header: &str, columns: &[&[f64]]) -> io::Result<()> {
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{header}")?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| fmt_f64(c[i])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> io::Result<()> {
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Minimal SVG overlay: one polyline per curve over a shared x range, y
/// autoscaled, with per-curve labels. Convenience output only.
pub fn write_svg_curves(
    path: &Path,
    x: &[f64],
    curves: &[(&str, &[f64])],
    x_label: &str,
) -> io::Result<()> {
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const MARGIN: f64 = 50.0;
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

    let x_min = x.first().copied().unwrap_or(0.0);
    let x_max = x.last().copied().unwrap_or(1.0);
    let y_max = curves
        .iter()
        .flat_map(|(_, c)| c.iter())
        .cloned()
        .fold(f64::MIN, f64::max)
        .max(1e-300);
    let y_min = 0.0f64;

    let sx = |v: f64| MARGIN + (v - x_min) / (x_max - x_min) * (W - 2.0 * MARGIN);
    let sy = |v: f64| H - MARGIN - (v - y_min) / (y_max - y_min) * (H - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>\n",
        W / 2.0,
        H - 12.0
    ));
    for (ci, (label, curve)) in curves.iter().enumerate() {
        let color = colors[ci % colors.len()];
        let points: Vec<String> = x
            .iter()
            .zip(curve.iter())
            .map(|(&xv, &yv)| format!("{:.2},{:.2}", sx(xv), sy(yv)))
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{label}</text>\n",
            W - MARGIN - 110.0,
            MARGIN + 18.0 * (ci as f64 + 1.0)
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)
}
