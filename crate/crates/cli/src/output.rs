//! Branch, boundary, report and plot files.
//!
//! Every float is written with 17 significant digits so files are
//! byte-for-byte reproducible and read back to the same doubles.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use vpair::{
    reconstruct_patches, Branch, FourierMap, PairConfig, PhysicalPatchPair, ReportRow, StateVector, VState,
};

use crate::Failure;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| num(*x)).collect();
    format!("[{}]", items.join(","))
}

#[derive(Debug, Deserialize)]
struct Record {
    eps: f64,
    scalar1: f64,
    scalar2: f64,
    coeffs1: Vec<f64>,
    coeffs2: Vec<f64>,
    residual_norm: f64,
    newton_iters: usize,
}

pub fn branch_jsonl(states: &[VState]) -> String {
    let mut out = String::new();
    for s in states {
        let [s1, s2] = s.state.scalars;
        writeln!(
            out,
            "{{\"eps\":{},\"scalar1\":{},\"scalar2\":{},\"coeffs1\":{},\"coeffs2\":{},\"residual_norm\":{},\"newton_iters\":{}}}",
            num(s.eps),
            num(s1),
            num(s2),
            list(s.state.maps[0].coeffs()),
            list(s.state.maps[1].coeffs()),
            num(s.residual_norm),
            s.newton_iters
        )
        .unwrap();
    }
    out
}

/// Reads states back; the truncation indicator and Newton history are not
/// stored and come back as NaN and empty.
pub fn parse_branch_jsonl(text: &str, modes: usize) -> Result<Vec<VState>, Failure> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = |e: &dyn std::fmt::Display| Failure::Validation(format!("branch line {}: {e}", i + 1));
            let r: Record = serde_json::from_str(line).map_err(|e| bad(&e))?;
            if r.coeffs1.len() != modes || r.coeffs2.len() != modes {
                return Err(bad(&format!(
                    "expected {modes} coefficients per map, got {} and {}",
                    r.coeffs1.len(),
                    r.coeffs2.len()
                )));
            }
            let maps = [
                FourierMap::new(r.coeffs1).map_err(|e| bad(&e))?,
                FourierMap::new(r.coeffs2).map_err(|e| bad(&e))?,
            ];
            Ok(VState {
                eps: r.eps,
                state: StateVector::new([r.scalar1, r.scalar2], maps).map_err(|e| bad(&e))?,
                residual_norm: r.residual_norm,
                newton_iters: r.newton_iters,
                truncation_indicator: f64::NAN,
                residual_history: Vec::new(),
            })
        })
        .collect()
}

pub fn boundary_csv(patches: &PhysicalPatchPair) -> String {
    let mut out = String::from("patch_id,theta,x,y\n");
    for (j, boundary) in patches.boundaries.iter().enumerate() {
        for (theta, z) in patches.thetas.iter().zip(boundary) {
            writeln!(out, "{},{},{},{}", j + 1, num(*theta), num(z.re), num(z.im)).unwrap();
        }
    }
    out
}

/// File name for the boundary of the state at `eps`, e.g. `boundary_0.1.csv`.
pub fn boundary_file_name(eps: f64) -> String {
    format!("boundary_{eps}.csv")
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("name,paper,fitted,rel_err,order\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.name, num(r.paper), num(r.fitted), num(r.rel_err), num(r.order)).unwrap();
    }
    out
}

/// Both patches of every state, to scale, with the patch centers marked.
/// Patches are magnified about their centers by a common factor so that
/// small ones stay visible; the factor is printed in the caption.
pub fn boundaries_svg(cfg: &PairConfig, patches: &[(f64, PhysicalPatchPair)]) -> String {
    const WIDTH: f64 = 800.0;
    let margin = 0.15 * cfg.d;
    let largest = patches
        .iter()
        .flat_map(|(_, p)| {
            p.boundaries
                .iter()
                .zip(p.centers)
                .flat_map(|(b, c)| b.iter().map(move |z| (z - c).norm()))
        })
        .fold(0.0f64, f64::max);
    // magnify so the largest patch reaches a fifth of the separation
    let zoom = if largest > 0.0 { (0.2 * cfg.d / largest).max(1.0) } else { 1.0 };
    let (x0, x1) = (-0.25 * cfg.d - margin, 1.25 * cfg.d + margin);
    let scale = WIDTH / (x1 - x0);
    let height = 0.6 * cfg.d * scale;
    let px = |x: f64| (x - x0) * scale;
    let py = |y: f64| height / 2.0 - y * scale;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {WIDTH:.0} {height:.0}\">\n"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let n = patches.len().max(1) as f64;
    for (i, (eps, p)) in patches.iter().enumerate() {
        let shade = (40.0 + 180.0 * i as f64 / n) as u8;
        for (boundary, c) in p.boundaries.iter().zip(p.centers) {
            let mut pts = String::new();
            for z in boundary.iter().chain(boundary.first()) {
                let m = c + (z - c) * zoom;
                write!(pts, "{:.3},{:.3} ", px(m.re), py(m.im)).unwrap();
            }
            writeln!(
                svg,
                "<polyline fill=\"none\" stroke=\"rgb({shade},{shade},255)\" stroke-width=\"1\" points=\"{}\"><title>eps = {eps}</title></polyline>",
                pts.trim_end()
            )
            .unwrap();
        }
    }
    for c in [0.0, cfg.d] {
        writeln!(svg, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"black\"/>", px(c), py(0.0)).unwrap();
    }
    writeln!(
        svg,
        "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{} pair, d = {}, patches magnified x{:.3}</text>",
        cfg.mode.name(),
        cfg.d,
        zoom
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn write_branch(dir: &Path, states: &[VState]) -> Result<(), Failure> {
    write(&dir.join("branch.jsonl"), &branch_jsonl(states))
}

pub fn write_report(dir: &Path, rows: &[ReportRow]) -> Result<(), Failure> {
    write(&dir.join("report.csv"), &report_csv(rows))
}

/// Boundary CSV per state plus the combined SVG.
pub fn write_boundaries(dir: &Path, branch: &Branch, points: usize) -> Result<(), Failure> {
    let mut drawn = Vec::new();
    for s in &branch.states {
        let patches = reconstruct_patches(s, &branch.config, points)
            .map_err(|e| Failure::Check(format!("eps = {}: {e}", s.eps)))?;
        write(&dir.join(boundary_file_name(s.eps)), &boundary_csv(&patches))?;
        drawn.push((s.eps, patches));
    }
    write(&dir.join("boundaries.svg"), &boundaries_svg(&branch.config, &drawn))
}

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use vpair::{base_state, Mode};

    fn state(cfg: &PairConfig, eps: f64) -> VState {
        let mut g = base_state(cfg);
        g.maps[0].coeffs_mut()[0] = 0.1 + 1e-17;
        g.maps[1].coeffs_mut()[2] = -std::f64::consts::PI * 1e-9;
        VState {
            eps,
            state: g,
            residual_norm: 3.2e-15,
            newton_iters: 2,
            truncation_indicator: 0.0,
            residual_history: vec![],
        }
    }

    #[test]
    fn jsonl_round_trip_is_exact() {
        let cfg = PairConfig::new(Mode::CoRotating, [1.0, 2.0], [1.0, 1.0], 5.0).with_discretization(4, 16);
        let states = vec![state(&cfg, 0.1), state(&cfg, 1.0 / 3.0)];
        let text = branch_jsonl(&states);
        let back = parse_branch_jsonl(&text, 4).unwrap();
        for (a, b) in states.iter().zip(&back) {
            assert_eq!(a.eps.to_bits(), b.eps.to_bits());
            assert_eq!(a.state.to_vec(), b.state.to_vec());
            assert_eq!(a.newton_iters, b.newton_iters);
        }
        assert_eq!(branch_jsonl(&back), text);
    }

    #[test]
    fn wrong_coefficient_count_is_rejected() {
        let cfg = PairConfig::new(Mode::CoRotating, [1.0, 2.0], [1.0, 1.0], 5.0).with_discretization(4, 16);
        let text = branch_jsonl(&[state(&cfg, 0.1)]);
        assert!(matches!(parse_branch_jsonl(&text, 5), Err(Failure::Validation(_))));
    }

    #[test]
    fn boundary_csv_has_one_row_per_sample() {
        let cfg = PairConfig::new(Mode::CoRotating, [1.0, 2.0], [1.0, 1.0], 5.0).with_discretization(4, 16);
        let p = reconstruct_patches(&state(&cfg, 0.1), &cfg, 128).unwrap();
        let csv = boundary_csv(&p);
        assert_eq!(csv.lines().count(), 1 + 256);
        assert!(csv.starts_with("patch_id,theta,x,y\n1,0.0000000000000000e0,"));
    }
}
