//! Conjugate-Fourier boundary maps on the unit circle.
//!
//! A [`FourierMap`] holds real coefficients `a_1..a_N` of
//! `f(w) = sum_n a_n conj(w)^n`. Residuals live in the sine basis
//! `e_n(w) = Im(w^n)` as a [`SineSeries`]. All sums are direct `O(MN)`
//! loops over a [`CircleGrid`].

use std::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Angular offset of a grid, in units of the node spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridOffset {
    /// Nodes at `exp(2 pi i k / M)`.
    Aligned,
    /// Nodes at `exp(2 pi i (k + 1/2) / M)`.
    Staggered,
}

impl GridOffset {
    pub fn sigma(self) -> f64 {
        match self {
            GridOffset::Aligned => 0.0,
            GridOffset::Staggered => 0.5,
        }
    }
}

/// Which derivative of a map to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Value,
    First,
    Second,
}

/// `M` equispaced nodes on the unit circle with trigonometry precomputed.
#[derive(Debug, Clone)]
pub struct CircleGrid {
    offset: GridOffset,
    nodes: Vec<C64>,
    // sin(pi j / M) for j in 0..2M; covers both offsets.
    half_sin: Vec<f64>,
}

pub const MIN_GRID: usize = 4;

pub fn make_grid(m: usize, offset: GridOffset) -> Result<CircleGrid> {
    CircleGrid::new(m, offset)
}

impl CircleGrid {
    pub fn new(m: usize, offset: GridOffset) -> Result<Self> {
        if m < MIN_GRID {
            return Err(Error::InvalidConfig {
                field: "grid",
                reason: format!("need at least {MIN_GRID} nodes, got {m}"),
            });
        }
        let sigma = offset.sigma();
        let nodes = (0..m)
            .map(|k| C64::from_polar(1.0, 2.0 * PI * (k as f64 + sigma) / m as f64))
            .collect();
        let half_sin = (0..2 * m)
            .map(|j| (PI * j as f64 / m as f64).sin())
            .collect();
        Ok(CircleGrid {
            offset,
            nodes,
            half_sin,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn offset(&self) -> GridOffset {
        self.offset
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    /// Parameter angle of node `k`.
    pub fn theta(&self, k: usize) -> f64 {
        2.0 * PI * (k as f64 + self.offset.sigma()) / self.len() as f64
    }

    /// `sin(n theta_k)` from the cached table.
    fn sin_mode(&self, n: usize, k: usize) -> f64 {
        let m = self.len();
        let j = match self.offset {
            GridOffset::Aligned => 2 * n * k,
            GridOffset::Staggered => n * (2 * k + 1),
        };
        self.half_sin[j % (2 * m)]
    }

    /// Largest sine mode this grid resolves without aliasing.
    pub fn max_sine_modes(&self) -> usize {
        (self.len() - 1) / 2
    }

    /// Discrete projection onto `e_1..e_K`: `C_n = (2/M) sum_k v_k sin(n theta_k)`.
    pub fn project_sine(&self, values: &[f64], modes: usize) -> Result<SineSeries> {
        check_len(self.len(), values.len())?;
        if modes == 0 || modes > self.max_sine_modes() {
            return Err(Error::Aliasing {
                modes,
                grid: self.len(),
            });
        }
        let scale = 2.0 / self.len() as f64;
        let coeffs = (1..=modes)
            .map(|n| {
                scale
                    * values
                        .iter()
                        .enumerate()
                        .map(|(k, v)| v * self.sin_mode(n, k))
                        .sum::<f64>()
            })
            .collect();
        Ok(SineSeries { coeffs })
    }

    /// Trapezoidal contour mean `(1/M) sum_k h(w_k) w_k`, the discrete
    /// form of `(1/2 pi i) \oint h(tau) d tau` over the unit circle.
    pub fn contour_mean(&self, values: &[C64]) -> Result<C64> {
        check_len(self.len(), values.len())?;
        Ok(contour_mean_unchecked(&self.nodes, values))
    }
}

pub(crate) fn contour_mean_unchecked(nodes: &[C64], values: &[C64]) -> C64 {
    let sum: C64 = nodes.iter().zip(values).map(|(w, h)| h * w).sum();
    sum / nodes.len() as f64
}

pub fn project_sine(values: &[f64], grid: &CircleGrid, modes: usize) -> Result<SineSeries> {
    grid.project_sine(values, modes)
}

pub fn contour_mean(values: &[C64], grid: &CircleGrid) -> Result<C64> {
    grid.contour_mean(values)
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Real coefficients of `f(w) = sum_{n=1..N} a_n conj(w)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMap {
    coeffs: Vec<f64>,
}

impl FourierMap {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidConfig {
                field: "modes",
                reason: "a boundary map needs at least one mode".into(),
            });
        }
        if let Some(bad) = coeffs.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "coeffs",
                reason: format!("non-finite coefficient {bad}"),
            });
        }
        Ok(FourierMap { coeffs })
    }

    pub fn zeros(modes: usize) -> Self {
        assert!(modes >= 1, "a boundary map needs at least one mode");
        FourierMap {
            coeffs: vec![0.0; modes],
        }
    }

    /// Map with a single nonzero coefficient `a_mode = value`.
    pub fn single(modes: usize, mode: usize, value: f64) -> Self {
        let mut f = Self::zeros(modes);
        f.coeffs[mode - 1] = value;
        f
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// `a_n`, one-based.
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs[n - 1]
    }

    /// `sum |a_n|`, a bound on `sup |f|` over the circle.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|a| a.abs()).sum()
    }

    /// `sum n |a_n|`, a bound on `sup |f'|` over the circle.
    pub fn derivative_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| (i + 1) as f64 * a.abs())
            .sum()
    }

    /// `sum n (n+1) |a_n|`, a bound on `sup |f''|` over the circle.
    pub fn second_derivative_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| ((i + 1) * (i + 2)) as f64 * a.abs())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|a| *a == 0.0)
    }

    /// Evaluates `f`, `f'` or `f''` (derivatives in `w`) at one point.
    pub fn eval_at(&self, w: C64, order: Order) -> C64 {
        let z = w.inv();
        // Horner for sum_n c_n z^(n-1)
        let horner = |weight: fn(usize) -> f64| -> C64 {
            self.coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, (i, a)| acc * z + a * weight(i + 1))
        };
        match order {
            Order::Value => z * horner(|_| 1.0),
            Order::First => -(z * z) * horner(|n| n as f64),
            Order::Second => z * z * z * horner(|n| (n * (n + 1)) as f64),
        }
    }

    pub fn evaluate(&self, grid: &CircleGrid, order: Order) -> Vec<C64> {
        grid.nodes().iter().map(|&w| self.eval_at(w, order)).collect()
    }

    /// Recovers `N` coefficients from samples `f(w_k)` by discrete
    /// orthogonality, `a_n = Re (1/M) sum_k f(w_k) w_k^n`.
    pub fn from_samples(grid: &CircleGrid, values: &[C64], modes: usize) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        if 2 * modes >= grid.len() {
            return Err(Error::Aliasing {
                modes,
                grid: grid.len(),
            });
        }
        let m = grid.len() as f64;
        let coeffs = (1..=modes)
            .map(|n| {
                let s: C64 = grid
                    .nodes()
                    .iter()
                    .zip(values)
                    .map(|(w, v)| v * w.powu(n as u32))
                    .sum();
                s.re / m
            })
            .collect();
        FourierMap::new(coeffs)
    }
}

/// Real coefficients `C_1..C_K` over `e_n(w) = Im(w^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSeries {
    coeffs: Vec<f64>,
}

impl SineSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        SineSeries { coeffs }
    }

    pub fn zeros(modes: usize) -> Self {
        SineSeries {
            coeffs: vec![0.0; modes],
        }
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `C_n`, one-based; zero beyond the stored range.
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n - 1).copied().unwrap_or(0.0)
    }

    /// Adds to `C_n`, one-based.
    pub fn add(&mut self, n: usize, value: f64) {
        self.coeffs[n - 1] += value;
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Synthesizes `sum_n C_n sin(n theta)` at one angle.
    pub fn eval_theta(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * ((i + 1) as f64 * theta).sin())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn fourth_roots_of_unity() {
        let g = make_grid(4, GridOffset::Aligned).unwrap();
        let want = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ];
        for (a, b) in g.nodes().iter().zip(want) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn staggered_grid_is_offset_by_half_a_step() {
        let g = make_grid(4, GridOffset::Staggered).unwrap();
        for (k, w) in g.nodes().iter().enumerate() {
            let want = C64::from_polar(1.0, PI / 4.0 * (2 * k + 1) as f64);
            assert!(close(*w, want, 1e-15));
            assert!((w.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tiny_grid_rejected() {
        assert!(matches!(
            make_grid(3, GridOffset::Aligned),
            Err(Error::InvalidConfig { field: "grid", .. })
        ));
    }

    #[test]
    fn evaluate_single_mode() {
        let f = FourierMap::new(vec![0.5]).unwrap();
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        assert!(close(f.eval_at(i, Order::Value), C64::new(0.0, -0.5), 1e-15));
        assert!(close(f.eval_at(one, Order::First), C64::new(-0.5, 0.0), 1e-15));
        assert!(close(f.eval_at(one, Order::Second), C64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn derivatives_match_finite_differences_off_the_circle() {
        let f = FourierMap::new(vec![0.3, -0.2, 0.05]).unwrap();
        let w = C64::from_polar(1.3, 0.7);
        let h = 1e-5;
        let fd1 = (f.eval_at(w + h, Order::Value) - f.eval_at(w - h, Order::Value)) / (2.0 * h);
        let fd2 = (f.eval_at(w + h, Order::First) - f.eval_at(w - h, Order::First)) / (2.0 * h);
        assert!(close(fd1, f.eval_at(w, Order::First), 1e-9));
        assert!(close(fd2, f.eval_at(w, Order::Second), 1e-9));
    }

    #[test]
    fn project_pure_sine() {
        let g = make_grid(16, GridOffset::Aligned).unwrap();
        let vals: Vec<f64> = (0..16).map(|k| 3.0 * (2.0 * g.theta(k)).sin()).collect();
        let s = g.project_sine(&vals, 7).unwrap();
        for n in 1..=7 {
            let want = if n == 2 { 3.0 } else { 0.0 };
            assert!((s.coeff(n) - want).abs() < 1e-14, "mode {n}");
        }
    }

    #[test]
    fn project_zero_and_mixed() {
        let g = make_grid(16, GridOffset::Aligned).unwrap();
        let s = g.project_sine(&[0.0; 16], 4).unwrap();
        assert_eq!(s.sup_norm(), 0.0);

        let vals: Vec<f64> = (0..16)
            .map(|k| g.theta(k).sin() + 0.25 * (3.0 * g.theta(k)).sin())
            .collect();
        let s = g.project_sine(&vals, 4).unwrap();
        let want = [1.0, 0.0, 0.25, 0.0];
        for (n, w) in want.iter().enumerate() {
            assert!((s.coeff(n + 1) - w).abs() < 1e-14);
        }
    }

    #[test]
    fn projection_rejects_aliased_modes() {
        let g = make_grid(16, GridOffset::Aligned).unwrap();
        assert!(matches!(
            g.project_sine(&[0.0; 16], 8),
            Err(Error::Aliasing { modes: 8, grid: 16 })
        ));
        assert!(g.project_sine(&[0.0; 15], 3).is_err());
    }

    #[test]
    fn contour_mean_residues() {
        let g = make_grid(64, GridOffset::Staggered).unwrap();
        for n in -3i32..=5 {
            let vals: Vec<C64> = g.nodes().iter().map(|t| t.conj().powi(n)).collect();
            let want = if n == 1 { 1.0 } else { 0.0 };
            let got = g.contour_mean(&vals).unwrap();
            assert!(close(got, C64::new(want, 0.0), 1e-14), "n = {n}: {got}");
        }
    }

    #[test]
    fn contour_mean_of_shifted_pole() {
        let g = make_grid(128, GridOffset::Staggered).unwrap();
        let (eps, b, d) = (0.1, 1.0, 2.0);
        let w = C64::new(1.0, 0.0);
        let vals: Vec<C64> = g
            .nodes()
            .iter()
            .map(|t| t.conj() / (eps * (b * t + b * w) - d))
            .collect();
        let got = g.contour_mean(&vals).unwrap();
        assert!(close(got, C64::new(1.0 / (0.1 - 2.0), 0.0), 1e-14));
        assert!((got.re + 0.526_315_789_473_684_2).abs() < 1e-14);
    }

    #[test]
    fn residue_identities_on_staggered_grids() {
        let m = 64;
        let colloc = make_grid(m, GridOffset::Aligned).unwrap();
        let quad = make_grid(m, GridOffset::Staggered).unwrap();
        let f = FourierMap::single(3, 2, 0.7);
        let fp = f.evaluate(&quad, Order::First);
        for &w in colloc.nodes() {
            let ratio: Vec<C64> = quad
                .nodes()
                .iter()
                .map(|t| (t - w).conj() / (t - w))
                .collect();
            let m0 = quad.contour_mean(&ratio).unwrap();
            assert!(close(m0, -w.conj(), 1e-12));
            let weighted: Vec<C64> = ratio.iter().zip(&fp).map(|(r, d)| r * d).collect();
            assert!(quad.contour_mean(&weighted).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn samples_recover_coefficients() {
        let g = make_grid(32, GridOffset::Aligned).unwrap();
        let f = FourierMap::new(vec![0.1, -0.3, 0.0, 0.02]).unwrap();
        let back = FourierMap::from_samples(&g, &f.evaluate(&g, Order::Value), 4).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
