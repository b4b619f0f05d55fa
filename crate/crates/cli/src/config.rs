//! Run configuration: a TOML file plus `key=value` overrides.

use std::path::Path;

use toml::{Table, Value};
use vpair::{Mode, PairConfig};

use crate::Failure;

/// Everything a run needs beyond the pair itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pair: PairConfig,
    pub eps_targets: Vec<f64>,
    /// Single-point target for `solve`; defaults to the last continuation target.
    pub eps: Option<f64>,
    /// Boundary samples per patch in emitted CSV and SVG files.
    pub boundary_points: usize,
    /// Quadrature nodes per boundary for the equilibrium oracle.
    pub oracle_grid: usize,
    /// Normalized oracle threshold used by `verify`.
    pub oracle_tol: f64,
}

const KEYS: &[&str] = &[
    "mode",
    "gamma1",
    "gamma2",
    "b1",
    "b2",
    "d",
    "modes",
    "grid",
    "tol",
    "max_iter",
    "eps_targets",
    "eps",
    "boundary_points",
    "oracle_grid",
    "oracle_tol",
];

fn invalid(key: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::Validation(format!("config key `{key}`: {reason}"))
}

fn float(table: &Table, key: &str) -> Result<Option<f64>, Failure> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::Float(x)) => Ok(Some(*x)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(v) => Err(invalid(key, format!("expected a number, got {}", v.type_str()))),
    }
}

fn required_float(table: &Table, key: &str) -> Result<f64, Failure> {
    float(table, key)?.ok_or_else(|| invalid(key, "missing"))
}

fn count(table: &Table, key: &str, default: usize) -> Result<usize, Failure> {
    match table.get(key) {
        None => Ok(default),
        Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
        Some(v) => Err(invalid(key, format!("expected a non-negative integer, got {v}"))),
    }
}

/// Parses one `key=value` override; the value uses TOML syntax, with bare
/// words taken as strings.
pub fn parse_override(text: &str) -> Result<(String, Value), Failure> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| Failure::Validation(format!("override `{text}` is not key=value")))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

pub fn from_table(mut table: Table, overrides: &[String]) -> Result<RunConfig, Failure> {
    for text in overrides {
        let (key, value) = parse_override(text)?;
        table.insert(key, value);
    }
    if let Some(key) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(invalid(key, "unknown key"));
    }

    let mode = match table.get("mode") {
        Some(Value::String(s)) if s == "co" => Mode::CoRotating,
        Some(Value::String(s)) if s == "counter" => Mode::CounterRotating,
        Some(v) => return Err(invalid("mode", format!("expected \"co\" or \"counter\", got {v}"))),
        None => return Err(invalid("mode", "missing")),
    };
    let gamma1 = required_float(&table, "gamma1")?;
    // gamma2 is an unknown of the counter-rotating problem; its value only
    // seeds the config there
    let gamma2 = match mode {
        Mode::CoRotating => required_float(&table, "gamma2")?,
        Mode::CounterRotating => float(&table, "gamma2")?.unwrap_or(gamma1),
    };
    let mut pair = PairConfig::new(
        mode,
        [gamma1, gamma2],
        [required_float(&table, "b1")?, required_float(&table, "b2")?],
        required_float(&table, "d")?,
    );
    pair.modes = count(&table, "modes", pair.modes)?;
    pair.grid = count(&table, "grid", pair.grid)?;
    pair.tol = float(&table, "tol")?.unwrap_or(pair.tol);
    pair.max_iter = count(&table, "max_iter", pair.max_iter)?;
    let pair = pair.validate().map_err(|e| match e {
        vpair::Error::InvalidConfig { field, reason } => invalid(field, reason),
        other => Failure::Validation(other.to_string()),
    })?;

    let eps_targets = match table.get("eps_targets") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| match v {
                Value::Float(x) => Ok(*x),
                Value::Integer(i) => Ok(*i as f64),
                other => Err(invalid("eps_targets", format!("expected numbers, got {other}"))),
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(v) => return Err(invalid("eps_targets", format!("expected a list, got {}", v.type_str()))),
        None => return Err(invalid("eps_targets", "missing")),
    };
    if eps_targets.is_empty() {
        return Err(invalid("eps_targets", "empty"));
    }
    if eps_targets.windows(2).any(|w| w[1] <= w[0]) || eps_targets.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(invalid("eps_targets", "must be finite, non-negative and strictly increasing"));
    }

    let boundary_points = count(&table, "boundary_points", 128)?;
    if boundary_points < 4 {
        return Err(invalid("boundary_points", "need at least 4"));
    }
    let oracle_grid = count(&table, "oracle_grid", 1024)?;
    if oracle_grid < 4 {
        return Err(invalid("oracle_grid", "need at least 4"));
    }
    Ok(RunConfig {
        pair,
        eps_targets,
        eps: float(&table, "eps")?,
        boundary_points,
        oracle_grid,
        oracle_tol: float(&table, "oracle_tol")?.unwrap_or(1e-6),
    })
}

pub fn parse_config(path: &Path, overrides: &[String]) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let table: Table = text
        .parse()
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    from_table(table, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Table {
        "mode = \"co\"\ngamma1 = 1\ngamma2 = 2\nb1 = 1\nb2 = 1\nd = 5\neps_targets = [0.1]"
            .parse()
            .unwrap()
    }

    #[test]
    fn defaults_fill_the_discretization() {
        let c = from_table(minimal(), &[]).unwrap();
        assert_eq!(c.pair.modes, 32);
        assert_eq!(c.pair.grid, 256);
        assert_eq!(c.pair.tol, 1e-12);
        assert_eq!(c.pair.max_iter, 25);
        assert_eq!(c.eps_targets, vec![0.1]);
        assert_eq!(c.boundary_points, 128);
    }

    #[test]
    fn validation_names_the_key() {
        let mut t = minimal();
        t.insert("d".into(), Value::Integer(3));
        match from_table(t, &[]) {
            Err(Failure::Validation(msg)) => assert!(msg.contains("`d`"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_win() {
        let c = from_table(minimal(), &["d=6".into(), "mode=counter".into()]).unwrap();
        assert_eq!(c.pair.d, 6.0);
        assert_eq!(c.pair.mode, Mode::CounterRotating);
    }

    #[test]
    fn missing_and_mistyped_keys() {
        let mut t = minimal();
        t.remove("b2");
        assert!(matches!(from_table(t, &[]), Err(Failure::Validation(m)) if m.contains("`b2`")));
        let mut t = minimal();
        t.insert("gamma1".into(), Value::String("one".into()));
        assert!(matches!(from_table(t, &[]), Err(Failure::Validation(m)) if m.contains("`gamma1`")));
        assert!(matches!(from_table(minimal(), &["colour=red".into()]),
            Err(Failure::Validation(m)) if m.contains("`colour`")));
    }

    #[test]
    fn list_overrides_parse_as_toml() {
        let (k, v) = parse_override("eps_targets=[0.05, 0.1]").unwrap();
        assert_eq!(k, "eps_targets");
        assert_eq!(v, Value::Array(vec![Value::Float(0.05), Value::Float(0.1)]));
    }
}
