//! Problem configuration, the point-vortex equilibria and the closed-form
//! linearization at `eps = 0` together with its inverse.
//!
//! Unknowns are laid out as `(s1, s2, a^1_1..a^1_N, a^2_1..a^2_N)` and
//! equations as sine modes `1..N+1` of patch 1 followed by patch 2. The two
//! scalars only reach mode 1; the map coefficient `a_n` only reaches mode
//! `n + 1`, which is what makes the system square.

use crate::error::{Error, Result};
use crate::spectral::{FourierMap, SineSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Steady rotation with angular velocity `Omega` about `Z` on the real axis.
    CoRotating,
    /// Steady translation with speed `U`; the second vorticity magnitude is an unknown.
    CounterRotating,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::CoRotating => "co",
            Mode::CounterRotating => "counter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairConfig {
    pub mode: Mode,
    /// Vorticity magnitudes; patch `j` carries circulation `pi * gamma[j]`.
    /// In counter-rotating mode `gamma[1]` is only the starting value of the
    /// unknown second magnitude.
    pub gamma: [f64; 2],
    /// Patch size ratios.
    pub b: [f64; 2],
    /// Distance between the two patch centers.
    pub d: f64,
    /// Fourier modes per patch (`N`).
    pub modes: usize,
    /// Collocation and quadrature grid size (`M`).
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
}

pub const DEFAULT_MODES: usize = 32;
pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 25;

impl PairConfig {
    /// Configuration with the default discretization.
    pub fn new(mode: Mode, gamma: [f64; 2], b: [f64; 2], d: f64) -> Self {
        PairConfig {
            mode,
            gamma,
            b,
            d,
            modes: DEFAULT_MODES,
            grid: DEFAULT_GRID,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn with_discretization(mut self, modes: usize, grid: usize) -> Self {
        self.modes = modes;
        self.grid = grid;
        self
    }

    /// Returns the configuration iff every parameter hypothesis holds.
    pub fn validate(self) -> Result<Self> {
        let invalid = |field, reason: String| Err(Error::InvalidConfig { field, reason });
        for (field, v) in [
            ("gamma1", self.gamma[0]),
            ("gamma2", self.gamma[1]),
            ("b1", self.b[0]),
            ("b2", self.b[1]),
            ("d", self.d),
            ("tol", self.tol),
        ] {
            if !v.is_finite() {
                return invalid(field, format!("must be finite, got {v}"));
            }
        }
        if self.b[0] <= 0.0 {
            return invalid("b1", format!("must be positive, got {}", self.b[0]));
        }
        if self.b[1] <= 0.0 {
            return invalid("b2", format!("must be positive, got {}", self.b[1]));
        }
        let sum_b = self.b[0] + self.b[1];
        match self.mode {
            Mode::CoRotating => {
                if self.d <= 2.0 * sum_b {
                    return invalid("d", format!("need d > 2(b1+b2) = {}, got {}", 2.0 * sum_b, self.d));
                }
                if self.gamma[0] + self.gamma[1] == 0.0 {
                    return Err(Error::Degenerate(
                        "gamma1 + gamma2 = 0 has no co-rotating linearization".into(),
                    ));
                }
            }
            Mode::CounterRotating => {
                if self.d <= sum_b {
                    return invalid("d", format!("need d > b1+b2 = {sum_b}, got {}", self.d));
                }
                if self.gamma[0] == 0.0 {
                    return Err(Error::Degenerate(
                        "gamma1 = 0 has no counter-rotating linearization".into(),
                    ));
                }
            }
        }
        if self.modes < 1 {
            return invalid("modes", "need at least one mode".into());
        }
        if self.grid < 2 * self.modes + 4 {
            return invalid(
                "grid",
                format!("need grid >= 2*modes + 4 = {}, got {}", 2 * self.modes + 4, self.grid),
            );
        }
        if self.tol <= 0.0 {
            return invalid("tol", format!("must be positive, got {}", self.tol));
        }
        Ok(self)
    }

    /// Number of unknowns (and equations): `2N + 2`.
    pub fn dimension(&self) -> usize {
        2 * self.modes + 2
    }

    /// Residual tolerance scaled by the circulation magnitudes.
    pub fn scaled_tol(&self) -> f64 {
        self.tol * 1f64.max(self.gamma[0].abs()).max(self.gamma[1].abs())
    }
}

/// The unknown `g`: `(Omega, Z, f1, f2)` co-rotating or `(U, gamma2, f1, f2)`
/// counter-rotating.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub scalars: [f64; 2],
    pub maps: [FourierMap; 2],
}

impl StateVector {
    pub fn new(scalars: [f64; 2], maps: [FourierMap; 2]) -> Result<Self> {
        let (n1, n2) = (maps[0].modes(), maps[1].modes());
        if n1 != n2 {
            return Err(Error::DimensionMismatch {
                expected: n1,
                got: n2,
            });
        }
        Ok(StateVector { scalars, maps })
    }

    pub fn modes(&self) -> usize {
        self.maps[0].modes()
    }

    /// Flattens to `(s1, s2, a^1.., a^2..)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 + 2 * self.modes());
        v.extend_from_slice(&self.scalars);
        v.extend_from_slice(self.maps[0].coeffs());
        v.extend_from_slice(self.maps[1].coeffs());
        v
    }

    pub fn from_slice(u: &[f64], modes: usize) -> Result<Self> {
        if u.len() != 2 * modes + 2 {
            return Err(Error::DimensionMismatch {
                expected: 2 * modes + 2,
                got: u.len(),
            });
        }
        Ok(StateVector {
            scalars: [u[0], u[1]],
            maps: [
                FourierMap::new(u[2..2 + modes].to_vec())?,
                FourierMap::new(u[2 + modes..].to_vec())?,
            ],
        })
    }

    /// Vorticity magnitudes in effect for this state.
    pub fn gammas(&self, cfg: &PairConfig) -> [f64; 2] {
        match cfg.mode {
            Mode::CoRotating => cfg.gamma,
            Mode::CounterRotating => [cfg.gamma[0], self.scalars[1]],
        }
    }
}

/// A direction `h = (alpha1, alpha2, h1, h2)` in the unknown space.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub alphas: [f64; 2],
    pub maps: [FourierMap; 2],
}

impl TangentVector {
    pub fn zeros(modes: usize) -> Self {
        TangentVector {
            alphas: [0.0; 2],
            maps: [FourierMap::zeros(modes), FourierMap::zeros(modes)],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.alphas[0], self.alphas[1]];
        v.extend_from_slice(self.maps[0].coeffs());
        v.extend_from_slice(self.maps[1].coeffs());
        v
    }

    pub fn from_slice(u: &[f64], modes: usize) -> Result<Self> {
        let s = StateVector::from_slice(u, modes)?;
        Ok(TangentVector {
            alphas: s.scalars,
            maps: s.maps,
        })
    }
}

/// Concatenates the two per-patch series into one equation vector.
pub fn series_to_vec(k: &[SineSeries; 2]) -> Vec<f64> {
    k[0].coeffs().iter().chain(k[1].coeffs()).copied().collect()
}

pub fn vec_to_series(v: &[f64]) -> [SineSeries; 2] {
    let half = v.len() / 2;
    [
        SineSeries::new(v[..half].to_vec()),
        SineSeries::new(v[half..].to_vec()),
    ]
}

pub fn validate_config(cfg: PairConfig) -> Result<PairConfig> {
    cfg.validate()
}

/// `(Omega0, Z0)` co-rotating or `(U0, gamma1)` counter-rotating.
pub fn point_vortex_equilibrium(cfg: &PairConfig) -> [f64; 2] {
    let [g1, g2] = cfg.gamma;
    let d = cfg.d;
    match cfg.mode {
        Mode::CoRotating => [(g1 + g2) / (2.0 * d * d), d * g2 / (g1 + g2)],
        Mode::CounterRotating => [g1 / (2.0 * d), g1],
    }
}

/// The base point `g0`: point-vortex scalars with circular patches.
pub fn base_state(cfg: &PairConfig) -> StateVector {
    StateVector {
        scalars: point_vortex_equilibrium(cfg),
        maps: [FourierMap::zeros(cfg.modes), FourierMap::zeros(cfg.modes)],
    }
}

fn check_tangent(cfg: &PairConfig, h: &TangentVector) -> Result<()> {
    for map in &h.maps {
        if map.modes() != cfg.modes {
            return Err(Error::DimensionMismatch {
                expected: cfg.modes,
                got: map.modes(),
            });
        }
    }
    Ok(())
}

/// The derivative of the residual at `(0, g0)` applied to `h`.
pub fn linearized_apply(cfg: &PairConfig, h: &TangentVector) -> Result<[SineSeries; 2]> {
    check_tangent(cfg, h)?;
    let n = cfg.modes;
    let d = cfg.d;
    let [a1, a2] = h.alphas;
    let mut out = [SineSeries::zeros(n + 1), SineSeries::zeros(n + 1)];
    match cfg.mode {
        Mode::CoRotating => {
            let [g1, g2] = cfg.gamma;
            let s = g1 + g2;
            out[0].add(1, -2.0 * a1 * d * g2 / s - a2 * s / (d * d));
            out[1].add(1, -2.0 * a1 * d * g1 / s + a2 * s / (d * d));
            for (j, series) in out.iter_mut().enumerate() {
                for (i, a) in h.maps[j].coeffs().iter().enumerate() {
                    series.add(i + 2, -cfg.gamma[j] * (i + 1) as f64 * a);
                }
            }
        }
        Mode::CounterRotating => {
            let g1 = cfg.gamma[0];
            out[0].add(1, 2.0 * a1 - a2 / d);
            out[1].add(1, 2.0 * a1);
            for (j, series) in out.iter_mut().enumerate() {
                for (i, a) in h.maps[j].coeffs().iter().enumerate() {
                    series.add(i + 2, -g1 * (i + 1) as f64 * a);
                }
            }
        }
    }
    Ok(out)
}

/// Inverts [`linearized_apply`]: modes `1..N+1` per patch to a tangent.
pub fn linearized_solve(cfg: &PairConfig, k: &[SineSeries; 2]) -> Result<TangentVector> {
    let n = cfg.modes;
    let d = cfg.d;
    let (a0, b0) = (k[0].coeff(1), k[1].coeff(1));
    let mut h = TangentVector::zeros(n);
    match cfg.mode {
        Mode::CoRotating => {
            let [g1, g2] = cfg.gamma;
            let s = g1 + g2;
            if s == 0.0 {
                return Err(Error::Degenerate("gamma1 + gamma2 = 0".into()));
            }
            if g1 == 0.0 || g2 == 0.0 {
                return Err(Error::Degenerate(
                    "a vanishing vorticity leaves its map coefficients undetermined".into(),
                ));
            }
            h.alphas = [-(a0 + b0) / (2.0 * d), -d * d * (a0 * g1 - b0 * g2) / (s * s)];
            for j in 0..2 {
                let coeffs = h.maps[j].coeffs_mut();
                for (i, a) in coeffs.iter_mut().enumerate() {
                    *a = -k[j].coeff(i + 2) / ((i + 1) as f64 * cfg.gamma[j]);
                }
            }
        }
        Mode::CounterRotating => {
            let g1 = cfg.gamma[0];
            if g1 == 0.0 {
                return Err(Error::Degenerate("gamma1 = 0".into()));
            }
            h.alphas = [b0 / 2.0, d * (b0 - a0)];
            for j in 0..2 {
                let coeffs = h.maps[j].coeffs_mut();
                for (i, a) in coeffs.iter_mut().enumerate() {
                    *a = -k[j].coeff(i + 2) / ((i + 1) as f64 * g1);
                }
            }
        }
    }
    Ok(h)
}
