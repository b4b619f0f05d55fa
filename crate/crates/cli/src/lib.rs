//! Front end for `vpair`: reads a run configuration, drives the solver and
//! writes the branch, boundary, report and plot files.

pub mod config;
pub mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use vpair::diagnostics::default_probes;
use vpair::functional::reflect_state;
use vpair::{
    continue_branch, equilibrium_residual, expansion_report, min_curvature, Branch, Error, Functional, VState,
};

pub use config::{parse_config, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Validation(String),
    /// Non-convergence or a failed check.
    Check(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Check(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig { .. } | Error::Degenerate(_) | Error::DimensionMismatch { .. } => {
                Failure::Validation(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Continue,
    Verify,
    ExpandCheck,
    Emit,
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    pub overrides: Vec<String>,
    /// Existing branch file for `verify`, `expand-check` and `emit`;
    /// without it the branch is computed.
    pub branch: Option<PathBuf>,
}

/// Per-state numbers reported by `verify`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub eps: f64,
    pub residual: f64,
    /// Normalized co-moving normal velocity; NaN at `eps = 0`.
    pub oracle: f64,
    pub symmetry: f64,
    pub min_curvature: f64,
}

/// Runs the command and returns the text summary it prints.
pub fn run(spec: &RunSpec) -> Result<String, Failure> {
    let cfg = parse_config(&spec.config, &spec.overrides)?;
    output::ensure_dir(&spec.out)?;
    match spec.command {
        Command::Solve => solve(&cfg, &spec.out),
        Command::Continue => {
            let branch = compute_branch(&cfg)?;
            output::write_branch(&spec.out, &branch.states)?;
            output::write_boundaries(&spec.out, &branch, cfg.boundary_points)?;
            let summary = branch_summary(&branch);
            match &branch.stopped {
                Some(why) => Err(Failure::Check(format!("continuation stopped early at {why}\n{summary}"))),
                None => Ok(summary),
            }
        }
        Command::Verify => {
            let branch = load_or_compute(&cfg, spec.branch.as_deref())?;
            let checks = verify(&cfg, &branch)?;
            let text = verify_csv(&checks);
            std::fs::write(spec.out.join("verify.csv"), &text)
                .map_err(|e| Failure::Io(format!("cannot write verify.csv: {e}")))?;
            let failing: Vec<String> = checks
                .iter()
                .filter(|c| !passes(&cfg, c))
                .map(|c| format!("eps = {}", c.eps))
                .collect();
            if failing.is_empty() {
                Ok(text)
            } else {
                Err(Failure::Check(format!("verification failed for {}\n{text}", failing.join(", "))))
            }
        }
        Command::ExpandCheck => {
            let branch = load_or_compute(&cfg, spec.branch.as_deref())?;
            let rows = expansion_report(&branch, &cfg.pair)?;
            output::write_report(&spec.out, &rows)?;
            let text = output::report_csv(&rows);
            let failing: Vec<&str> = rows.iter().filter(|r| !r.passes()).map(|r| r.name.as_str()).collect();
            if failing.is_empty() {
                Ok(text)
            } else {
                Err(Failure::Check(format!("coefficients off: {}\n{text}", failing.join(", "))))
            }
        }
        Command::Emit => {
            let branch = load_or_compute(&cfg, spec.branch.as_deref())?;
            output::write_boundaries(&spec.out, &branch, cfg.boundary_points)?;
            Ok(format!("wrote boundaries for {} states\n", branch.states.len()))
        }
    }
}

fn solve(cfg: &RunConfig, out: &Path) -> Result<String, Failure> {
    let eps = cfg.eps.unwrap_or(*cfg.eps_targets.last().expect("targets are nonempty"));
    let branch = continue_branch(&cfg.pair, &[eps])?;
    if let Some(why) = branch.stopped {
        return Err(Failure::Check(why));
    }
    output::write_branch(out, &branch.states)?;
    Ok(branch_summary(&branch))
}

/// Continues from the point-vortex pair, which is always the first record.
pub fn compute_branch(cfg: &RunConfig) -> Result<Branch, Failure> {
    let mut targets = cfg.eps_targets.clone();
    if targets[0] != 0.0 {
        targets.insert(0, 0.0);
    }
    Ok(continue_branch(&cfg.pair, &targets)?)
}

fn load_or_compute(cfg: &RunConfig, path: Option<&Path>) -> Result<Branch, Failure> {
    let Some(path) = path else {
        return compute_branch(cfg);
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let states = output::parse_branch_jsonl(&text, cfg.pair.modes)?;
    if states.is_empty() {
        return Err(Failure::Validation(format!("{} holds no states", path.display())));
    }
    Ok(Branch {
        config: cfg.pair.clone(),
        eps_max: states.iter().map(|s| s.eps).fold(f64::NEG_INFINITY, f64::max),
        states,
        stopped: None,
    })
}

fn branch_summary(branch: &Branch) -> String {
    let mut out = String::new();
    for s in &branch.states {
        let [s1, s2] = s.state.scalars;
        writeln!(
            out,
            "eps {:<6} scalars ({s1:.12}, {s2:.12})  residual {:.2e}  newton {}",
            s.eps, s.residual_norm, s.newton_iters
        )
        .unwrap();
    }
    out
}

/// Recomputes the residual and the independent checks for every state.
pub fn verify(cfg: &RunConfig, branch: &Branch) -> Result<Vec<Verification>, Failure> {
    let f = Functional::new(cfg.pair.clone())?;
    let probes = default_probes(64);
    let half = cfg.pair.grid / 2;
    branch
        .states
        .iter()
        .map(|s: &VState| {
            let r = f.residual_vec(s.eps, &s.state)?;
            let plus = f.residual_pointwise(s.eps, &s.state)?;
            let minus = f.residual_pointwise(-s.eps, &reflect_state(&s.state))?;
            let mut symmetry: f64 = 0.0;
            for j in 0..2 {
                for k in 0..cfg.pair.grid {
                    symmetry = symmetry.max((plus[j][(k + half) % cfg.pair.grid] + minus[j][k]).abs());
                }
            }
            let oracle = if s.eps == 0.0 {
                f64::NAN
            } else {
                equilibrium_residual(s, &cfg.pair, cfg.oracle_grid, &probes)?
            };
            Ok(Verification {
                eps: s.eps,
                residual: r.iter().fold(0.0, |m, x| m.max(x.abs())),
                oracle,
                symmetry,
                min_curvature: min_curvature(s, &cfg.pair, 4 * cfg.boundary_points)?,
            })
        })
        .collect()
}

fn passes(cfg: &RunConfig, c: &Verification) -> bool {
    c.residual <= 100.0 * cfg.pair.scaled_tol()
        && (c.oracle.is_nan() || c.oracle <= cfg.oracle_tol)
        && c.symmetry <= 1e-12
        && c.min_curvature > 0.0
}

pub fn verify_csv(checks: &[Verification]) -> String {
    let mut out = String::from("eps,residual,oracle,symmetry,min_curvature\n");
    for c in checks {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.eps, c.residual, c.oracle, c.symmetry, c.min_curvature
        )
        .unwrap();
    }
    out
}
