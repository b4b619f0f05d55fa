//! Small-`eps` expansions of the boundary maps and scalars, and the
//! extrapolation machinery that recovers the same coefficients from a
//! solved branch.
//!
//! Map coefficients are stated for the conformal map itself: the
//! coefficient of `conj(w)^n` in `phi_j(w) = w + eps b_j f_j(w)` is
//! `eps b_j a^j_n`, expanded in powers of `t_j = eps b_j / d`.

use crate::error::{Error, Result};
use crate::problem::{point_vortex_equilibrium, Mode, PairConfig, StateVector};
use crate::solver::Branch;
use crate::spectral::FourierMap;

/// One term `coeff * t^order` of the `conj(w)^mode` coefficient of `phi_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapTerm {
    pub mode: usize,
    pub order: u32,
    pub coeff: f64,
}

/// Map expansion terms for a circulation ratio `delta`. The co-rotating
/// pair uses `delta_j = gamma_{3-j} / gamma_j`, the translating pair
/// `delta = -1`, which switches off the `(1 + delta)` corrections.
pub fn map_terms(delta: f64) -> Vec<MapTerm> {
    let term = |mode, order, coeff| MapTerm { mode, order, coeff };
    vec![
        term(1, 2, delta),
        term(2, 3, delta / 2.0),
        term(3, 4, delta / 3.0),
        term(1, 4, 2.0 * delta * (1.0 + delta)),
        term(4, 5, delta / 4.0),
        term(2, 5, 0.75 * delta * (1.0 + delta)),
    ]
}

/// `s(eps) = base + quartic * eps^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarExpansion {
    pub base: f64,
    pub quartic: f64,
}

impl ScalarExpansion {
    pub fn at(&self, eps: f64) -> f64 {
        self.base + self.quartic * eps.powi(4)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoeffs {
    pub delta: [f64; 2],
    pub terms: [Vec<MapTerm>; 2],
    /// `(Omega, Z)` co-rotating, `(U, gamma2)` counter-rotating.
    pub scalars: [ScalarExpansion; 2],
}

impl ExpansionCoeffs {
    pub fn new(cfg: &PairConfig) -> Result<Self> {
        let [g1, g2] = cfg.gamma;
        let [b1, b2] = cfg.b;
        let d = cfg.d;
        let base = point_vortex_equilibrium(cfg);
        match cfg.mode {
            Mode::CoRotating => {
                if g1 == 0.0 || g2 == 0.0 {
                    return Err(Error::Degenerate(
                        "co-rotating expansion needs both vorticities nonzero".into(),
                    ));
                }
                let delta = [g2 / g1, g1 / g2];
                let s = g1 + g2;
                let omega4 = (g1 * b2.powi(4) + g2 * b1.powi(4)) / (2.0 * d.powi(6));
                let z4 = (g2.powi(3) / g1 * b1.powi(4) - g1.powi(3) / g2 * b2.powi(4))
                    / (d.powi(3) * s * s);
                Ok(ExpansionCoeffs {
                    delta,
                    terms: [map_terms(delta[0]), map_terms(delta[1])],
                    scalars: [
                        ScalarExpansion {
                            base: base[0],
                            quartic: omega4,
                        },
                        ScalarExpansion {
                            base: base[1],
                            quartic: z4,
                        },
                    ],
                })
            }
            Mode::CounterRotating => {
                let u4 = g1 / (2.0 * d) * (2.0 * b1.powi(4) + b2.powi(4)) / d.powi(4);
                let gamma4 = g1 * (b1.powi(4) - b2.powi(4)) / d.powi(4);
                Ok(ExpansionCoeffs {
                    delta: [-1.0, -1.0],
                    terms: [map_terms(-1.0), map_terms(-1.0)],
                    scalars: [
                        ScalarExpansion {
                            base: base[0],
                            quartic: u4,
                        },
                        ScalarExpansion {
                            base: base[1],
                            quartic: gamma4,
                        },
                    ],
                })
            }
        }
    }

    /// Coefficient of `conj(w)^mode` in `phi_j` at `eps`.
    pub fn phi_coeff(&self, cfg: &PairConfig, j: usize, mode: usize, eps: f64) -> f64 {
        let t = eps * cfg.b[j] / cfg.d;
        self.terms[j]
            .iter()
            .filter(|term| term.mode == mode)
            .map(|term| term.coeff * t.powi(term.order as i32))
            .sum()
    }

    /// The matching unknown `a^j_mode = phi_coeff / (eps b_j)`, written so
    /// that it stays finite at `eps = 0`.
    pub fn map_coeff(&self, cfg: &PairConfig, j: usize, mode: usize, eps: f64) -> f64 {
        let (b, d) = (cfg.b[j], cfg.d);
        self.terms[j]
            .iter()
            .filter(|term| term.mode == mode)
            .map(|term| {
                let k = term.order as i32;
                term.coeff * b.powi(k - 1) * eps.powi(k - 1) / d.powi(k)
            })
            .sum()
    }
}

/// State predicted by the truncated expansion at `eps`.
pub fn expansion_state(cfg: &PairConfig, eps: f64) -> Result<StateVector> {
    let coeffs = ExpansionCoeffs::new(cfg)?;
    let maps = [0usize, 1].map(|j| {
        let mut f = FourierMap::zeros(cfg.modes);
        for (i, a) in f.coeffs_mut().iter_mut().enumerate() {
            *a = coeffs.map_coeff(cfg, j, i + 1, eps);
        }
        f
    });
    StateVector::new([coeffs.scalars[0].at(eps), coeffs.scalars[1].at(eps)], maps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// Estimate of `c` in `y = c eps^p + o(eps^p)`.
    pub coeff: f64,
    /// Observed power from the two smallest samples.
    pub order: f64,
    /// Change of the estimate when the largest sample is dropped.
    pub residual: f64,
}

/// Extracts `c` from `y = c eps^p + c' eps^(p+2) + ...` by polynomial
/// extrapolation of `y / eps^p` in `eps^2` to zero (Richardson elimination
/// of the following even orders, as many as the samples allow).
pub fn fit_power_coefficient(samples: &[(f64, f64)], p: i32) -> Result<FitResult> {
    if samples.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let mut pts: Vec<(f64, f64)> = samples.to_vec();
    pts.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    for w in pts.windows(2) {
        if w[0].0.abs() == w[1].0.abs() {
            return Err(Error::InvalidConfig {
                field: "eps_targets",
                reason: format!("duplicate sample magnitude {}", w[0].0.abs()),
            });
        }
    }
    if pts[0].0 == 0.0 {
        return Err(Error::InvalidConfig {
            field: "eps_targets",
            reason: "cannot fit a power law through eps = 0".into(),
        });
    }
    let h: Vec<f64> = pts.iter().map(|(e, _)| e * e).collect();
    let scaled: Vec<f64> = pts.iter().map(|(e, y)| y / e.powi(p)).collect();

    let all = neville_at_zero(&h, &scaled);
    let fewer = neville_at_zero(&h[..h.len() - 1], &scaled[..h.len() - 1]);

    let (e1, y1) = pts[0];
    let (e2, y2) = pts[1];
    let ratio = y2 / y1;
    let order = if y1 != 0.0 && ratio.is_finite() && ratio > 0.0 {
        ratio.ln() / (e2.abs() / e1.abs()).ln()
    } else {
        p as f64
    };
    Ok(FitResult {
        coeff: all,
        order,
        residual: (all - fewer).abs(),
    })
}

fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut table = y.to_vec();
    let n = x.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (x[i], x[i + level]);
            table[i] = (xj * table[i] - xi * table[i + 1]) / (xj - xi);
        }
    }
    table[0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub paper: f64,
    pub fitted: f64,
    /// `|fitted - paper| / scale`, where `scale = |paper|` unless the
    /// coefficient vanishes, in which case the co-rotating magnitude with
    /// unit ratio is used.
    pub rel_err: f64,
    /// Observed power.
    pub order: f64,
    pub tolerance: f64,
}

impl ReportRow {
    pub fn passes(&self) -> bool {
        self.rel_err <= self.tolerance
    }
}

/// Relative tolerance for the leading `conj(w)` coefficient.
pub const LEADING_TOL: f64 = 5e-3;
/// Relative tolerance for every higher coefficient.
pub const HIGHER_TOL: f64 = 2e-2;
/// Bound, relative to the co-rotating scale, on corrections that vanish.
pub const VANISHING_TOL: f64 = 1e-2;

/// Fits every expansion coefficient against the solved branch.
pub fn expansion_report(branch: &Branch, cfg: &PairConfig) -> Result<Vec<ReportRow>> {
    let states: Vec<_> = branch.states.iter().filter(|s| s.eps != 0.0).collect();
    if states.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: states.len(),
        });
    }
    let coeffs = ExpansionCoeffs::new(cfg)?;
    let d = cfg.d;
    let mut rows = Vec::new();

    for j in 0..2 {
        let b = cfg.b[j];
        let phi = |mode: usize| -> Vec<(f64, f64)> {
            states
                .iter()
                .map(|s| (s.eps, s.eps * b * s.state.maps[j].coeff(mode)))
                .collect()
        };
        let paper = |mode: usize, order: u32| -> f64 {
            coeffs.terms[j]
                .iter()
                .filter(|t| t.mode == mode && t.order == order)
                .map(|t| t.coeff * (b / d).powi(order as i32))
                .sum()
        };
        // magnitudes with |delta| = 1 for the (1 + delta) corrections
        let unit = map_terms(1.0);
        let unit_scale = |mode: usize, order: u32| -> f64 {
            unit.iter()
                .filter(|t| t.mode == mode && t.order == order)
                .map(|t| t.coeff.abs() * (b / d).powi(order as i32))
                .sum()
        };
        let mut push = |mode: usize, order: u32, fit: FitResult, tol: f64| {
            let want = paper(mode, order);
            let (scale, tolerance) = if want != 0.0 {
                (want.abs(), tol)
            } else {
                (unit_scale(mode, order), VANISHING_TOL)
            };
            rows.push(ReportRow {
                name: format!("phi{}_w{}_e{}", j + 1, mode, order),
                paper: want,
                fitted: fit.coeff,
                rel_err: (fit.coeff - want).abs() / scale,
                order: fit.order,
                tolerance,
            });
        };
        let mut leading = [None; 5];
        for (mode, order) in [(1usize, 2u32), (2, 3), (3, 4), (4, 5)] {
            if mode > cfg.modes {
                continue;
            }
            let fit = fit_power_coefficient(&phi(mode), order as i32)?;
            leading[mode] = Some(fit.coeff);
            let tol = if order == 2 { LEADING_TOL } else { HIGHER_TOL };
            push(mode, order, fit, tol);
        }
        // corrections two orders above the leading term, after subtracting it
        for (mode, lower, upper) in [(1usize, 2i32, 4u32), (2, 3, 5)] {
            let Some(c) = leading[mode] else { continue };
            let data: Vec<(f64, f64)> = phi(mode)
                .into_iter()
                .map(|(e, y)| (e, y - c * e.powi(lower)))
                .collect();
            let fit = fit_power_coefficient(&data, upper as i32)?;
            push(mode, upper, fit, HIGHER_TOL);
        }
    }

    let names = match cfg.mode {
        Mode::CoRotating => ["omega_e4", "z_e4"],
        Mode::CounterRotating => ["u_e4", "gamma2_e4"],
    };
    for (i, name) in names.iter().enumerate() {
        let base = coeffs.scalars[i].base;
        let data: Vec<(f64, f64)> = states
            .iter()
            .map(|s| (s.eps, s.state.scalars[i] - base))
            .collect();
        let fit = fit_power_coefficient(&data, 4)?;
        let want = coeffs.scalars[i].quartic;
        rows.push(ReportRow {
            name: name.to_string(),
            paper: want,
            fitted: fit.coeff,
            rel_err: (fit.coeff - want).abs() / want.abs(),
            order: fit.order,
            tolerance: HIGHER_TOL,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::base_state;

    fn co() -> PairConfig {
        PairConfig::new(Mode::CoRotating, [1.0, 2.0], [1.0, 1.0], 5.0).with_discretization(8, 32)
    }

    fn ct() -> PairConfig {
        PairConfig::new(Mode::CounterRotating, [1.0, 1.0], [1.0, 1.0], 5.0)
            .with_discretization(8, 32)
    }

    #[test]
    fn expansion_at_zero_is_base_point() {
        for cfg in [co(), ct()] {
            assert_eq!(expansion_state(&cfg, 0.0).unwrap(), base_state(&cfg));
        }
    }

    #[test]
    fn co_rotating_first_coefficient() {
        let cfg = co();
        let e = ExpansionCoeffs::new(&cfg).unwrap();
        assert_eq!(e.delta, [2.0, 0.5]);
        let c = e.phi_coeff(&cfg, 0, 1, 0.1);
        assert!((c - 8.0192e-4).abs() < 1e-17, "{c}");
        let g = expansion_state(&cfg, 0.1).unwrap();
        assert!((0.1 * g.maps[0].coeff(1) - c).abs() < 1e-18);
    }

    #[test]
    fn counter_rotating_speed() {
        let g = expansion_state(&ct(), 0.1).unwrap();
        assert!((g.scalars[0] - 0.100000048).abs() < 1e-15);
        assert_eq!(g.scalars[1], 1.0);
    }

    #[test]
    fn counter_maps_follow_unit_ratio() {
        let cfg = PairConfig::new(Mode::CounterRotating, [1.0, 1.0], [1.0, 1.5], 5.0)
            .with_discretization(8, 32);
        let e = ExpansionCoeffs::new(&cfg).unwrap();
        for j in 0..2 {
            let t = 0.3 * cfg.b[j] / cfg.d;
            let want = [-t * t, -t.powi(3) / 2.0, -t.powi(4) / 3.0, -t.powi(5) / 4.0];
            for (n, w) in want.iter().enumerate() {
                assert!((e.phi_coeff(&cfg, j, n + 1, 0.3) - w).abs() < 1e-17);
            }
        }
    }

    #[test]
    fn co_rotating_needs_both_vorticities() {
        let mut cfg = co();
        cfg.gamma = [1.0, 0.0];
        assert!(matches!(expansion_state(&cfg, 0.1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn swapping_patches_swaps_maps() {
        let cfg = PairConfig::new(Mode::CoRotating, [1.0, 3.0], [1.0, 0.6], 5.0)
            .with_discretization(6, 32);
        let mut swapped = cfg.clone();
        swapped.gamma = [3.0, 1.0];
        swapped.b = [0.6, 1.0];
        let a = expansion_state(&cfg, 0.2).unwrap();
        let b = expansion_state(&swapped, 0.2).unwrap();
        assert_eq!(a.maps[0], b.maps[1]);
        assert_eq!(a.maps[1], b.maps[0]);
    }

    #[test]
    fn exact_power_law() {
        let s: Vec<_> = [0.1, 0.2, 0.4].iter().map(|&e: &f64| (e, 7.0 * e.powi(4))).collect();
        let fit = fit_power_coefficient(&s, 4).unwrap();
        assert!((fit.coeff - 7.0).abs() < 1e-10);
        assert!((fit.order - 4.0).abs() < 1e-12);
    }

    #[test]
    fn next_even_order_is_eliminated() {
        let s: Vec<_> = [0.1, 0.2, 0.4]
            .iter()
            .map(|&e: &f64| (e, e.powi(4) + e.powi(6)))
            .collect();
        let fit = fit_power_coefficient(&s, 4).unwrap();
        assert!((fit.coeff - 1.0).abs() < 0.05);
        assert!((fit.coeff - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_data() {
        let s = [(0.1, 0.0), (0.2, 0.0), (0.4, 0.0)];
        let fit = fit_power_coefficient(&s, 4).unwrap();
        assert_eq!(fit.coeff, 0.0);
        assert_eq!(fit.residual, 0.0);
        assert!(fit.order.is_finite());
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            fit_power_coefficient(&[(0.1, 1.0), (0.2, 2.0)], 2),
            Err(Error::InsufficientSamples { needed: 3, got: 2 })
        ));
    }
}
