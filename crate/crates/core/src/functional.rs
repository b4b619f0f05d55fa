//! The desingularized boundary functional `F(eps, g)`.
//!
//! Each patch equation is sampled at the aligned collocation grid and
//! projected onto `e_1..e_{N+1}`. Contour integrals use the staggered
//! quadrature grid of the same size, so `tau != w` for every pair and the
//! removable diagonal of the self-interaction kernel is never evaluated.

use crate::error::{Error, Result};
use crate::problem::{Mode, PairConfig, StateVector};
use crate::spectral::{CircleGrid, FourierMap, GridOffset, Order, SineSeries, C64};

/// Bound on `|eps| b sum n |a_n|` for admissible states.
pub const BALL_RADIUS: f64 = 0.45;

/// Bound on `|eps| b sum n |a_n|` below which the self kernel is evaluated.
pub const SELF_KERNEL_LIMIT: f64 = 0.5;

/// Collocation grid, staggered quadrature grid and the cached pair kernels
/// `1/(tau - w)` and `conj(tau - w)/(tau - w)`.
#[derive(Debug, Clone)]
pub struct Grids {
    colloc: CircleGrid,
    quad: CircleGrid,
    inv_diff: Vec<C64>,
    conj_ratio: Vec<C64>,
}

impl Grids {
    pub fn new(m: usize) -> Result<Self> {
        Self::from_parts(
            CircleGrid::new(m, GridOffset::Aligned)?,
            CircleGrid::new(m, GridOffset::Staggered)?,
        )
    }

    pub fn from_parts(colloc: CircleGrid, quad: CircleGrid) -> Result<Self> {
        if colloc.offset() != GridOffset::Aligned || quad.offset() != GridOffset::Staggered {
            return Err(Error::InvalidConfig {
                field: "grid",
                reason: "quadrature must be staggered against collocation".into(),
            });
        }
        if colloc.len() != quad.len() {
            return Err(Error::DimensionMismatch {
                expected: colloc.len(),
                got: quad.len(),
            });
        }
        let mut inv_diff = Vec::with_capacity(colloc.len() * quad.len());
        let mut conj_ratio = Vec::with_capacity(colloc.len() * quad.len());
        for &w in colloc.nodes() {
            for &t in quad.nodes() {
                let a = t - w;
                inv_diff.push(a.inv());
                conj_ratio.push(a.conj() / a);
            }
        }
        Ok(Grids {
            colloc,
            quad,
            inv_diff,
            conj_ratio,
        })
    }

    pub fn colloc(&self) -> &CircleGrid {
        &self.colloc
    }

    pub fn quad(&self) -> &CircleGrid {
        &self.quad
    }

    pub fn len(&self) -> usize {
        self.colloc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colloc.is_empty()
    }
}

/// Samples of one map and its derivative on both grids.
struct MapSamples {
    f_w: Vec<C64>,
    df_w: Vec<C64>,
    f_t: Vec<C64>,
    df_t: Vec<C64>,
}

impl MapSamples {
    fn new(f: &FourierMap, grids: &Grids) -> Self {
        MapSamples {
            f_w: f.evaluate(&grids.colloc, Order::Value),
            df_w: f.evaluate(&grids.colloc, Order::First),
            f_t: f.evaluate(&grids.quad, Order::Value),
            df_t: f.evaluate(&grids.quad, Order::First),
        }
    }
}

/// The literal kernel quantities for one `(w, tau)` pair:
/// `A = tau - w`, `B = f_j(tau) - f_j(w)`, `C = b_o tau + b_j w`,
/// `D = b_o^2 f_o(tau) + b_j^2 f_j(w)`.
#[derive(Debug, Clone, Copy)]
pub struct IntegrandFrame {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl IntegrandFrame {
    pub fn new(w: C64, tau: C64, b: [f64; 2], j: usize, f: [&FourierMap; 2]) -> Self {
        let o = 1 - j;
        let fj_t = f[j].eval_at(tau, Order::Value);
        let fj_w = f[j].eval_at(w, Order::Value);
        let fo_t = f[o].eval_at(tau, Order::Value);
        IntegrandFrame {
            a: tau - w,
            b: fj_t - fj_w,
            c: b[o] * tau + b[j] * w,
            d: b[o] * b[o] * fo_t + b[j] * b[j] * fj_w,
        }
    }

    /// `(A conj B - conj A B) / (A (A + eps b B)) * (f'(tau) - B/A)`.
    pub fn self_integrand(&self, eps_b: f64, df_tau: C64) -> C64 {
        let (a, b) = (self.a, self.b);
        (a * b.conj() - a.conj() * b) / (a * (a + eps_b * b)) * (df_tau - b / a)
    }

    /// Denominator `eps C + eps^2 D - d` of the cross kernel.
    pub fn cross_denominator(&self, eps: f64, dist: f64) -> C64 {
        eps * self.c + eps * eps * self.d - dist
    }
}

fn self_kernel_guard(eps: f64, b: f64, f: &FourierMap) -> Result<()> {
    let measure = eps.abs() * b * f.derivative_bound();
    if measure >= SELF_KERNEL_LIMIT {
        return Err(Error::OutOfBall {
            measure,
            limit: SELF_KERNEL_LIMIT,
        });
    }
    Ok(())
}

fn cross_kernel_guard(eps: f64, cfg: &PairConfig, maps: [&FourierMap; 2]) -> Result<()> {
    let norm = maps[0].abs_sum().max(maps[1].abs_sum());
    let measure = eps.abs() * (cfg.b[0] + cfg.b[1]) * (1.0 + norm);
    let limit = cfg.d / 2.0;
    if measure >= limit {
        return Err(Error::GeometryOverlap { measure, limit });
    }
    Ok(())
}

/// Checks `|eps| b_j sum n |a^j_n| <= BALL_RADIUS` for both patches.
pub fn ball_guard(eps: f64, cfg: &PairConfig, g: &StateVector) -> Result<()> {
    for j in 0..2 {
        let measure = eps.abs() * cfg.b[j] * g.maps[j].derivative_bound();
        if measure > BALL_RADIUS {
            return Err(Error::OutOfBall {
                measure,
                limit: BALL_RADIUS,
            });
        }
    }
    Ok(())
}

fn self_sum(eps_b: f64, s: &MapSamples, grids: &Grids) -> Vec<C64> {
    let m = grids.len();
    let scale = 1.0 / m as f64;
    let taus = grids.quad.nodes();
    (0..m)
        .map(|k| {
            let row = k * m;
            let fw = s.f_w[k];
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..m {
                // With Q = B/A and conj(A)/A cached, the kernel reduces to
                // (conj Q - Q) conj(A)/A (f'(tau) - Q) / (1 + eps b Q).
                let q = (s.f_t[l] - fw) * grids.inv_diff[row + l];
                let term = (q.conj() - q) * grids.conj_ratio[row + l] * (s.df_t[l] - q)
                    / (1.0 + eps_b * q);
                acc += term * taus[l];
            }
            acc * scale
        })
        .collect()
}

fn cross_sum(
    eps: f64,
    b_self: f64,
    b_other: f64,
    dist: f64,
    own: &MapSamples,
    other: &MapSamples,
    grids: &Grids,
) -> Vec<C64> {
    let m = grids.len();
    let scale = 1.0 / m as f64;
    let taus = grids.quad.nodes();
    let eb = eps * b_other;
    let mut numer = Vec::with_capacity(m);
    let mut shift = Vec::with_capacity(m);
    for l in 0..m {
        let t = taus[l];
        numer.push((t.conj() + eb * other.f_t[l].conj()) * (1.0 + eb * other.df_t[l]) * t * scale);
        shift.push(eb * t + eb * eb * other.f_t[l]);
    }
    grids
        .colloc
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let own_part = eps * b_self * w + eps * eps * b_self * b_self * own.f_w[k] - dist;
            numer
                .iter()
                .zip(&shift)
                .map(|(n, p)| n / (p + own_part))
                .sum()
        })
        .collect()
}

/// Desingularized self-interaction integral at every collocation point.
pub fn self_interaction(eps: f64, b: f64, f: &FourierMap, grids: &Grids) -> Result<Vec<C64>> {
    self_kernel_guard(eps, b, f)?;
    Ok(self_sum(eps * b, &MapSamples::new(f, grids), grids))
}

/// Interaction integral of patch `j` with the other patch at every
/// collocation point of patch `j`.
pub fn cross_interaction(
    eps: f64,
    cfg: &PairConfig,
    j: usize,
    f_self: &FourierMap,
    f_other: &FourierMap,
    grids: &Grids,
) -> Result<Vec<C64>> {
    cross_kernel_guard(eps, cfg, [f_self, f_other])?;
    Ok(cross_sum(
        eps,
        cfg.b[j],
        cfg.b[1 - j],
        cfg.d,
        &MapSamples::new(f_self, grids),
        &MapSamples::new(f_other, grids),
        grids,
    ))
}

/// Pointwise residual `F_j(eps, g)(w_k)` on the collocation grid.
pub fn residual_pointwise(
    eps: f64,
    g: &StateVector,
    cfg: &PairConfig,
    grids: &Grids,
) -> Result<[Vec<f64>; 2]> {
    if g.modes() != cfg.modes {
        return Err(Error::DimensionMismatch {
            expected: cfg.modes,
            got: g.modes(),
        });
    }
    for j in 0..2 {
        self_kernel_guard(eps, cfg.b[j], &g.maps[j])?;
    }
    cross_kernel_guard(eps, cfg, [&g.maps[0], &g.maps[1]])?;

    let samples = [MapSamples::new(&g.maps[0], grids), MapSamples::new(&g.maps[1], grids)];
    let gamma = g.gammas(cfg);
    let [s1, s2] = g.scalars;
    let out = [0usize, 1].map(|j| {
        let o = 1 - j;
        let eb = eps * cfg.b[j];
        let own = &samples[j];
        let self_int = self_sum(eb, own, grids);
        let cross = cross_sum(eps, cfg.b[j], cfg.b[o], cfg.d, own, &samples[o], grids);
        grids
            .colloc
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                let tangent = w * (1.0 + eb * own.df_w[k]);
                let frame = match cfg.mode {
                    Mode::CoRotating => {
                        // (-1)^j Z - (j-1) d with one-based j
                        let offset = if j == 0 { -s2 } else { s2 - cfg.d };
                        let arm = eb * (w.conj() + eb * own.f_w[k].conj()) + offset;
                        2.0 * s1 * arm * tangent
                    }
                    Mode::CounterRotating => 2.0 * s1 * tangent,
                };
                let cross_sign = match cfg.mode {
                    Mode::CoRotating => -1.0,
                    Mode::CounterRotating => 1.0,
                };
                let total = frame - gamma[j] * own.df_w[k]
                    + eb * gamma[j] * tangent * self_int[k]
                    + cross_sign * gamma[o] * tangent * cross[k];
                total.im
            })
            .collect()
    });
    Ok(out)
}

/// Residual projected onto sine modes `1..N+1` per patch.
pub fn residual(
    eps: f64,
    g: &StateVector,
    cfg: &PairConfig,
    grids: &Grids,
) -> Result<[SineSeries; 2]> {
    let values = residual_pointwise(eps, g, cfg, grids)?;
    let modes = cfg.modes + 1;
    Ok([
        grids.colloc.project_sine(&values[0], modes)?,
        grids.colloc.project_sine(&values[1], modes)?,
    ])
}

/// Largest projected residual coefficient above mode `N+1`, measured on a
/// doubled grid.
pub fn truncation_indicator(eps: f64, g: &StateVector, cfg: &PairConfig) -> Result<f64> {
    let fine = Grids::new(2 * cfg.grid)?;
    let values = residual_pointwise(eps, g, cfg, &fine)?;
    let top = fine.colloc.max_sine_modes();
    let mut worst: f64 = 0.0;
    for v in &values {
        let series = fine.colloc.project_sine(v, top)?;
        for n in cfg.modes + 2..=top {
            worst = worst.max(series.coeff(n).abs());
        }
    }
    Ok(worst)
}

/// The map `w -> f(-w)`, rebuilt from samples rather than a sign rule.
pub fn reflect_map(f: &FourierMap) -> FourierMap {
    let m = (2 * f.modes() + 2).max(8);
    let grid = CircleGrid::new(m, GridOffset::Aligned).expect("grid size >= 8");
    let values: Vec<C64> = grid
        .nodes()
        .iter()
        .map(|&w| f.eval_at(-w, Order::Value))
        .collect();
    FourierMap::from_samples(&grid, &values, f.modes()).expect("grid resolves the modes")
}

/// `g` with both maps replaced by `w -> f_j(-w)`; scalars unchanged.
pub fn reflect_state(g: &StateVector) -> StateVector {
    StateVector {
        scalars: g.scalars,
        maps: [reflect_map(&g.maps[0]), reflect_map(&g.maps[1])],
    }
}

/// A configuration bundled with its grids, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Functional {
    cfg: PairConfig,
    grids: Grids,
}

impl Functional {
    pub fn new(cfg: PairConfig) -> Result<Self> {
        let cfg = cfg.validate()?;
        let grids = Grids::new(cfg.grid)?;
        Ok(Functional { cfg, grids })
    }

    pub fn config(&self) -> &PairConfig {
        &self.cfg
    }

    pub fn grids(&self) -> &Grids {
        &self.grids
    }

    pub fn residual(&self, eps: f64, g: &StateVector) -> Result<[SineSeries; 2]> {
        residual(eps, g, &self.cfg, &self.grids)
    }

    pub fn residual_pointwise(&self, eps: f64, g: &StateVector) -> Result<[Vec<f64>; 2]> {
        residual_pointwise(eps, g, &self.cfg, &self.grids)
    }

    /// Residual as one flat equation vector.
    pub fn residual_vec(&self, eps: f64, g: &StateVector) -> Result<Vec<f64>> {
        Ok(crate::problem::series_to_vec(&self.residual(eps, g)?))
    }
}
