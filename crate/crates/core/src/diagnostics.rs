//! Geometric and physical checks on solved states.
//!
//! The relative-equilibrium oracle here rebuilds the physical patches and
//! evaluates the Biot-Savart velocity directly from boundary integrals; it
//! shares nothing with [`crate::functional`] beyond the map evaluation.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::{Mode, PairConfig};
use crate::solver::VState;
use crate::spectral::{CircleGrid, FourierMap, GridOffset, Order, C64};

/// Curvature `Re(1 + w phi''/phi') / |phi'|` of `phi(w) = w + eps b f(w)`.
pub fn curvature(eps: f64, b: f64, f: &FourierMap, w: C64) -> Result<f64> {
    let eb = eps * b;
    let d1 = 1.0 + eb * f.eval_at(w, Order::First);
    if d1.norm() <= 1e-14 {
        return Err(Error::DegenerateMap(d1.norm()));
    }
    let d2 = eb * f.eval_at(w, Order::Second);
    Ok((1.0 + w * d2 / d1).re / d1.norm())
}

/// Lower bound `1 - |eps| b sup|f''| / (1 - |eps| b sup|f'|)` on the
/// curvature numerator, from the coefficient bounds. `None` when the bound
/// is not informative.
pub fn convexity_bound(eps: f64, b: f64, f: &FourierMap) -> Option<f64> {
    let eb = eps.abs() * b;
    let denom = 1.0 - eb * f.derivative_bound();
    if denom <= 0.0 {
        return None;
    }
    let bound = 1.0 - eb * f.second_derivative_bound() / denom;
    (bound > 0.0).then_some(bound)
}

/// Minimum curvature over an `m_scan` grid on both patches.
pub fn min_curvature(v: &VState, cfg: &PairConfig, m_scan: usize) -> Result<f64> {
    let grid = CircleGrid::new(m_scan, GridOffset::Aligned)?;
    let mut worst = f64::INFINITY;
    for j in 0..2 {
        for &w in grid.nodes() {
            worst = worst.min(curvature(v.eps, cfg.b[j], &v.state.maps[j], w)?);
        }
    }
    Ok(worst)
}

/// Both patches in the physical plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalPatchPair {
    pub boundaries: [Vec<C64>; 2],
    /// Parameter angle of each boundary point.
    pub thetas: Vec<f64>,
    pub centers: [C64; 2],
    /// Signed vorticity of each patch.
    pub amplitudes: [f64; 2],
}

impl PhysicalPatchPair {
    /// Smallest distance between a point of one boundary and one of the other.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for p in &self.boundaries[0] {
            for q in &self.boundaries[1] {
                best = best.min((p - q).norm());
            }
        }
        best
    }
}

/// Signed vorticity amplitudes `gamma_j / (eps b_j)^2`; the second patch
/// is negated in the counter-rotating configuration.
fn amplitudes(v: &VState, cfg: &PairConfig) -> [f64; 2] {
    let gamma = v.state.gammas(cfg);
    let sign = match cfg.mode {
        Mode::CoRotating => 1.0,
        Mode::CounterRotating => -1.0,
    };
    let amp = |j: usize| gamma[j] / (v.eps * cfg.b[j]).powi(2);
    [amp(0), sign * amp(1)]
}

/// Physical boundary point and its `theta`-derivative for patch `j`:
/// `eps b_1 phi_1(w)` and `d - eps b_2 phi_2(w)`.
fn physical_point(v: &VState, cfg: &PairConfig, j: usize, w: C64) -> (C64, C64) {
    let f = &v.state.maps[j];
    let eb = v.eps * cfg.b[j];
    let phi = w + eb * f.eval_at(w, Order::Value);
    let dphi = (1.0 + eb * f.eval_at(w, Order::First)) * C64::i() * w;
    match j {
        0 => (eb * phi, eb * dphi),
        _ => (cfg.d - eb * phi, -eb * dphi),
    }
}

/// Total turning of the tangent `i w phi'(w)` over one loop, in units of `2 pi`.
fn tangent_turns(eps: f64, b: f64, f: &FourierMap, grid: &CircleGrid) -> f64 {
    let tangents: Vec<C64> = grid
        .nodes()
        .iter()
        .map(|&w| C64::i() * w * (1.0 + eps * b * f.eval_at(w, Order::First)))
        .collect();
    let mut total = 0.0;
    for k in 0..tangents.len() {
        let next = tangents[(k + 1) % tangents.len()];
        total += (next / tangents[k]).arg();
    }
    total / (2.0 * PI)
}

pub fn reconstruct_patches(v: &VState, cfg: &PairConfig, m_out: usize) -> Result<PhysicalPatchPair> {
    let grid = CircleGrid::new(m_out, GridOffset::Aligned)?;
    let boundaries = [0usize, 1].map(|j| {
        grid.nodes()
            .iter()
            .map(|&w| physical_point(v, cfg, j, w).0)
            .collect::<Vec<_>>()
    });
    for j in 0..2 {
        let turns = tangent_turns(v.eps, cfg.b[j], &v.state.maps[j], &grid);
        if (turns - 1.0).abs() > 1e-6 {
            return Err(Error::GeometryOverlap {
                measure: turns,
                limit: 1.0,
            });
        }
    }
    let pair = PhysicalPatchPair {
        boundaries,
        thetas: (0..m_out).map(|k| grid.theta(k)).collect(),
        centers: [C64::new(0.0, 0.0), C64::new(cfg.d, 0.0)],
        amplitudes: amplitudes(v, cfg),
    };
    let sep = pair.min_separation();
    if sep <= 0.0 {
        return Err(Error::GeometryOverlap {
            measure: sep,
            limit: 0.0,
        });
    }
    Ok(pair)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchMoments {
    pub area: [f64; 2],
    pub circulation: [f64; 2],
    pub area_quadrature: [f64; 2],
    pub circulation_quadrature: [f64; 2],
    /// Area centroids in the physical plane.
    pub centroid: [C64; 2],
}

/// Areas and circulations in closed form (`pi (1 - sum n c_n^2)` for the
/// unit-scale map with `c_n = eps b a_n`) and by Green's-theorem quadrature
/// `1/2 \oint Im(conj(z) dz)` of the boundary.
pub fn patch_moments(v: &VState, cfg: &PairConfig) -> Result<PatchMoments> {
    let gamma = v.state.gammas(cfg);
    let sign = match cfg.mode {
        Mode::CoRotating => [1.0, 1.0],
        Mode::CounterRotating => [1.0, -1.0],
    };
    let m = (8 * v.state.modes() + 64).next_power_of_two();
    let grid = CircleGrid::new(m, GridOffset::Aligned)?;
    let mut out = PatchMoments {
        area: [0.0; 2],
        circulation: [0.0; 2],
        area_quadrature: [0.0; 2],
        circulation_quadrature: [0.0; 2],
        centroid: [C64::new(0.0, 0.0); 2],
    };
    for j in 0..2 {
        let eb = v.eps * cfg.b[j];
        let f = &v.state.maps[j];
        let unit_closed = PI
            * (1.0
                - f.coeffs()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (i + 1) as f64 * (eb * a).powi(2))
                    .sum::<f64>());
        let unit_quad = 0.5 * 2.0 * PI / m as f64
            * grid
                .nodes()
                .iter()
                .map(|&w| {
                    let z = w + eb * f.eval_at(w, Order::Value);
                    let dz = (1.0 + eb * f.eval_at(w, Order::First)) * C64::i() * w;
                    (z.conj() * dz).im
                })
                .sum::<f64>();
        out.area[j] = eb * eb * unit_closed;
        out.area_quadrature[j] = eb * eb * unit_quad;
        out.circulation[j] = sign[j] * gamma[j] * unit_closed;
        out.circulation_quadrature[j] = sign[j] * gamma[j] * unit_quad;
        // \int z dA = (1 / 2i) \oint |z|^2 dz
        let first: C64 = grid
            .nodes()
            .iter()
            .map(|&w| {
                let (z, dz) = physical_point(v, cfg, j, w);
                z.norm_sqr() * dz
            })
            .sum::<C64>()
            * (2.0 * PI / m as f64)
            / (2.0 * C64::i());
        out.centroid[j] = if eb == 0.0 {
            physical_point(v, cfg, j, C64::new(1.0, 0.0)).0
        } else {
            first / out.area_quadrature[j].abs()
        };
    }
    Ok(out)
}

/// Velocity `v(z)` (not conjugated) induced by both patches, from
/// `conj v(z) = sum_j (i omega_j / 2) \fint (conj(xi) - conj(z)) / (xi - z) d xi`
/// with `m_fine` trapezoidal nodes per boundary.
pub fn velocity_at(cfg: &PairConfig, v: &VState, z: C64, m_fine: usize) -> Result<C64> {
    let grid = CircleGrid::new(m_fine, GridOffset::Staggered)?;
    Ok(velocity_with(cfg, v, z, &grid))
}

fn velocity_with(cfg: &PairConfig, v: &VState, z: C64, grid: &CircleGrid) -> C64 {
    if v.eps == 0.0 {
        // point vortices of circulation pi * amplitude-weighted gamma
        let gamma = v.state.gammas(cfg);
        let sign = match cfg.mode {
            Mode::CoRotating => 1.0,
            Mode::CounterRotating => -1.0,
        };
        let conj_v = -C64::i() * gamma[0] / (2.0 * z)
            - C64::i() * sign * gamma[1] / (2.0 * (z - cfg.d));
        return conj_v.conj();
    }
    let amp = amplitudes(v, cfg);
    let m = grid.len() as f64;
    let mut conj_v = C64::new(0.0, 0.0);
    for j in 0..2 {
        // \fint g d xi = (1 / 2 pi i) \int g xi'(theta) d theta
        let integral: C64 = grid
            .nodes()
            .iter()
            .map(|&w| {
                let (xi, dxi) = physical_point(v, cfg, j, w);
                (xi.conj() - z.conj()) / (xi - z) * dxi
            })
            .sum::<C64>()
            / (C64::i() * m);
        conj_v += C64::i() * amp[j] / 2.0 * integral;
    }
    conj_v.conj()
}

/// Parameter angles of `count` probes, placed midway between the nodes of
/// the staggered quadrature grid when `count` divides `m_fine`.
pub fn default_probes(count: usize) -> Vec<f64> {
    (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect()
}

/// Largest normalized normal velocity in the co-moving frame,
/// `max |Re(W conj n)| / (max |gamma_j| / d)`, with `W = v - i Omega (z - Z)`
/// co-rotating or `W = v - i U` counter-rotating.
pub fn equilibrium_residual(v: &VState, cfg: &PairConfig, m_fine: usize, probes: &[f64]) -> Result<f64> {
    let grid = CircleGrid::new(m_fine, GridOffset::Staggered)?;
    let gamma = v.state.gammas(cfg);
    let scale = gamma[0].abs().max(gamma[1].abs()) / cfg.d;
    let [s1, s2] = v.state.scalars;
    let worst = (0..2)
        .flat_map(|j| probes.iter().map(move |&t| (j, t)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(j, theta)| {
            let w = C64::from_polar(1.0, theta);
            let (z, dz) = physical_point(v, cfg, j, w);
            let normal = -C64::i() * dz / dz.norm();
            let vel = velocity_with(cfg, v, z, &grid);
            let frame = match cfg.mode {
                Mode::CoRotating => vel - C64::i() * s1 * (z - s2),
                Mode::CounterRotating => vel - C64::i() * s1,
            };
            (frame * normal.conj()).re.abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst / scale)
}
