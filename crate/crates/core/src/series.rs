//! Complex-valued series tied to a sampling grid.

use crate::grid::{FrequencyGrid, TimeGrid};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Time(TimeGrid),
    Frequency(FrequencyGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    pub axis: Axis,
    pub values: Vec<Complex64>,
}

impl ComplexSeries {
    pub fn over_frequency(grid: FrequencyGrid, values: Vec<Complex64>) -> Self {
        assert_eq!(grid.n_samples, values.len(), "series length must match grid");
        Self { axis: Axis::Frequency(grid), values }
    }

    pub fn over_time(grid: TimeGrid, values: Vec<Complex64>) -> Self {
        assert_eq!(grid.n_samples, values.len(), "series length must match grid");
        Self { axis: Axis::Time(grid), values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frequency_grid(&self) -> Option<&FrequencyGrid> {
        match &self.axis {
            Axis::Frequency(g) => Some(g),
            Axis::Time(_) => None,
        }
    }

    pub fn time_grid(&self) -> Option<&TimeGrid> {
        match &self.axis {
            Axis::Time(g) => Some(g),
            Axis::Frequency(_) => None,
        }
    }

    /// Max-norm residual of `f(-omega) = conj(f(omega))` over the grid; the
    /// reality condition of the corresponding time-domain kernel.
    pub fn conjugation_residual(&self) -> f64 {
        let grid = self
            .frequency_grid()
            .expect("conjugation residual is defined on frequency series");
        let mut worst: f64 = 0.0;
        for k in 0..grid.n_samples {
            let nk = grid.negation_index(k);
            if nk == k {
                worst = worst.max(self.values[k].im.abs() * f64::from(u8::from(k != 0)));
                continue;
            }
            let r = (self.values[nk] - self.values[k].conj()).norm();
            worst = worst.max(r);
        }
        worst
    }

    /// Max-norm residual of evenness, `f(-omega) = f(omega)`.
    pub fn even_residual(&self) -> f64 {
        self.parity_residual(1.0)
    }

    /// Max-norm residual of oddness, `f(-omega) = -f(omega)`.
    pub fn odd_residual(&self) -> f64 {
        self.parity_residual(-1.0)
    }

    fn parity_residual(&self, sign: f64) -> f64 {
        let grid = self
            .frequency_grid()
            .expect("parity residual is defined on frequency series");
        let mut worst: f64 = 0.0;
        for k in 0..grid.n_samples {
            let nk = grid.negation_index(k);
            let r = (self.values[nk] - sign * self.values[k]).norm();
            worst = worst.max(r);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_residuals() {
        let grid = FrequencyGrid::new(2.0, 8).unwrap();
        let even: Vec<Complex64> = grid
            .omegas()
            .iter()
            .map(|&w| Complex64::new(w * w, 0.0))
            .collect();
        let s = ComplexSeries::over_frequency(grid, even);
        assert!(s.even_residual() < 1e-14);
        assert!(s.odd_residual() > 1.0);
    }

    #[test]
    fn conjugation_residual_detects_violation() {
        let grid = FrequencyGrid::new(2.0, 8).unwrap();
        let vals: Vec<Complex64> = grid
            .omegas()
            .iter()
            .map(|&w| Complex64::new(w * w, -w))
            .collect();
        let s = ComplexSeries::over_frequency(grid, vals);
        assert!(s.conjugation_residual() < 1e-14);
        let mut bad = s.clone();
        bad.values[2] += Complex64::new(0.0, 0.5);
        assert!(bad.conjugation_residual() > 0.1);
    }
}
