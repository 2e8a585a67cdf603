//! Scenario files: TOML with dotted key paths.
//!
//! ```toml
//! name = "jt_example"
//! m = 2
//! n = 1
//! T = 1.0
//! system.entry.1.2.xi1 = [1.0]
//! system.entry.2.1.xi1 = [0.0, 0.0, 1.0]
//! grid.xi_magnitudes = [1, 2, 4, 8]
//! ```
//!
//! `system.entry.i.j.xik` lists the coefficients (ascending powers of `t`)
//! of the `ξ_k` component of entry `(i, j)`, all indices one-based. Absent
//! entries are zero.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::energy::V0Policy;
use crate::error::{Error, Result};
use crate::levi::BadSetParams;
use crate::spectral::SpectralTolerances;
use crate::symbolic::{PolyMatrix, SymbolMatrix, TimePoly};

pub const BUNDLED: [(&str, &str); 3] = [
    ("jt_example", include_str!("../scenarios/jt_example.toml")),
    ("strict_const", include_str!("../scenarios/strict_const.toml")),
    ("double_root", include_str!("../scenarios/double_root.toml")),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Chebyshev–Lobatto nodes in `[0, T]` for the spectral and condition scans.
    pub t_points: usize,
    pub xi_magnitudes: Vec<f64>,
    pub directions: usize,
    /// Output samples per integrated trajectory.
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub spectral: SpectralTolerances,
    pub integrator: f64,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub t_final: f64,
    pub system: SymbolMatrix,
    pub grid: GridSpec,
    pub tol: Tolerances,
    pub bad_set: BadSetParams,
    pub v0: V0Policy,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

fn default_magnitudes() -> Vec<f64> {
    (0..10).map(|k| 2f64.powi(k)).collect()
}

/// Line (one-based) where `path` or one of its sub-keys is assigned.
fn locate(src: &str, path: &str) -> Option<usize> {
    let mut header = String::new();
    for (k, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            header = h.trim().replace([' ', '"'], "");
            if header == path || header.starts_with(&format!("{path}.")) {
                return Some(k + 1);
            }
            continue;
        }
        let Some((key, _)) = line.split_once('=') else { continue };
        let key = key.trim().replace([' ', '"'], "");
        let full = if header.is_empty() { key } else { format!("{header}.{key}") };
        if full == path || full.starts_with(&format!("{path}.")) {
            return Some(k + 1);
        }
    }
    None
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn err(&self, field: &str, message: impl Into<String>) -> Error {
        Error::Schema { field: field.to_string(), line: locate(self.src, field), message: message.into() }
    }

    fn check_keys(&self, table: &Table, prefix: &str, allowed: &[&str]) -> Result<()> {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let field = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                return Err(self.err(&field, format!("unknown key; expected one of {allowed:?}")));
            }
        }
        Ok(())
    }

    fn table<'t>(&self, parent: &'t Table, key: &str, field: &str) -> Result<Option<&'t Table>> {
        match parent.get(key) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(self.err(field, "expected a table")),
        }
    }

    fn number(&self, v: &Value, field: &str) -> Result<f64> {
        let x = match v {
            Value::Float(f) => *f,
            Value::Integer(i) => *i as f64,
            _ => return Err(self.err(field, format!("expected a number, found {}", v.type_str()))),
        };
        if !x.is_finite() {
            return Err(self.err(field, "must be finite"));
        }
        Ok(x)
    }

    fn opt_number(&self, t: &Table, key: &str, field: &str) -> Result<Option<f64>> {
        t.get(key).map(|v| self.number(v, field)).transpose()
    }

    fn positive(&self, t: &Table, key: &str, field: &str, default: f64) -> Result<f64> {
        let x = self.opt_number(t, key, field)?.unwrap_or(default);
        if x <= 0.0 {
            return Err(self.err(field, format!("must be positive, got {x}")));
        }
        Ok(x)
    }

    fn count(&self, t: &Table, key: &str, field: &str, default: Option<usize>, min: usize) -> Result<usize> {
        let v = match (t.get(key), default) {
            (None, Some(d)) => return Ok(d),
            (None, None) => return Err(self.err(field, "required field is missing")),
            (Some(v), _) => v,
        };
        match v {
            Value::Integer(i) if *i >= min as i64 => Ok(*i as usize),
            Value::Integer(i) => Err(self.err(field, format!("must be an integer ≥ {min}, got {i}"))),
            _ => Err(self.err(field, format!("expected an integer, found {}", v.type_str()))),
        }
    }

    fn numbers(&self, v: &Value, field: &str) -> Result<Vec<f64>> {
        let Value::Array(items) = v else {
            return Err(self.err(field, format!("expected an array of numbers, found {}", v.type_str())));
        };
        items.iter().map(|x| self.number(x, field)).collect()
    }
}

fn index(ctx: &Ctx, key: &str, field: &str, bound: usize, what: &str) -> Result<usize> {
    match key.parse::<usize>() {
        Ok(i) if (1..=bound).contains(&i) => Ok(i - 1),
        _ => Err(ctx.err(field, format!("{what} index `{key}` outside 1..={bound}"))),
    }
}

impl Scenario {
    pub fn from_toml(src: &str) -> Result<Self> {
        let root: Table = src.parse().map_err(|e: toml::de::Error| {
            let line = e.span().map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1);
            Error::Syntax(match line {
                Some(l) => format!("line {l}: {}", e.message()),
                None => e.message().to_string(),
            })
        })?;
        let ctx = Ctx { src };
        ctx.check_keys(
            &root,
            "",
            &["name", "m", "n", "T", "seed", "system", "grid", "tol", "bad_set", "sweep", "output"],
        )?;

        let name = match root.get("name") {
            Some(Value::String(s)) if !s.trim().is_empty() => s.clone(),
            Some(Value::String(_)) => return Err(ctx.err("name", "must not be empty")),
            Some(v) => return Err(ctx.err("name", format!("expected a string, found {}", v.type_str()))),
            None => return Err(ctx.err("name", "required field is missing")),
        };
        let m = ctx.count(&root, "m", "m", None, 1)?;
        let n = ctx.count(&root, "n", "n", Some(1), 1)?;
        let t_final = match root.get("T") {
            None => return Err(ctx.err("T", "required field is missing")),
            Some(v) => ctx.number(v, "T")?,
        };
        if t_final <= 0.0 {
            return Err(ctx.err("T", format!("final time must be positive, got {t_final}")));
        }
        let seed = match root.get("seed") {
            None => 0,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(v) => return Err(ctx.err("seed", format!("expected a non-negative integer, found {v}"))),
        };

        let system = parse_system(&ctx, &root, m, n)?;

        let empty = Table::new();
        let grid_t = ctx.table(&root, "grid", "grid")?.unwrap_or(&empty);
        ctx.check_keys(grid_t, "grid", &["t_points", "xi_magnitudes", "directions", "samples"])?;
        let xi_magnitudes = match grid_t.get("xi_magnitudes") {
            None => default_magnitudes(),
            Some(v) => ctx.numbers(v, "grid.xi_magnitudes")?,
        };
        if xi_magnitudes.is_empty() {
            return Err(ctx.err("grid.xi_magnitudes", "must not be empty"));
        }
        if let Some(bad) = xi_magnitudes.iter().find(|x| **x < 1.0) {
            return Err(ctx.err("grid.xi_magnitudes", format!("magnitudes must be ≥ 1, got {bad}")));
        }
        let grid = GridSpec {
            t_points: ctx.count(grid_t, "t_points", "grid.t_points", Some(2048), 2)?,
            xi_magnitudes,
            directions: ctx.count(grid_t, "directions", "grid.directions", Some(1), 1)?,
            samples: ctx.count(grid_t, "samples", "grid.samples", Some(201), 2)?,
        };

        let tol_t = ctx.table(&root, "tol", "tol")?.unwrap_or(&empty);
        ctx.check_keys(tol_t, "tol", &["hyp", "cluster", "integrator"])?;
        let tol = Tolerances {
            spectral: SpectralTolerances {
                hyp: ctx.positive(tol_t, "hyp", "tol.hyp", SpectralTolerances::default().hyp)?,
                cluster: ctx.positive(tol_t, "cluster", "tol.cluster", SpectralTolerances::default().cluster)?,
            },
            integrator: ctx.positive(tol_t, "integrator", "tol.integrator", 1e-8)?,
        };

        let bs_t = ctx.table(&root, "bad_set", "bad_set")?.unwrap_or(&empty);
        ctx.check_keys(bs_t, "bad_set", &["q", "c1"])?;
        let bad_set = BadSetParams {
            c1: ctx.positive(bs_t, "c1", "bad_set.c1", BadSetParams::default().c1)?,
            q: ctx.count(bs_t, "q", "bad_set.q", Some(BadSetParams::default().q as usize), 1)? as u32,
        };

        let sw_t = ctx.table(&root, "sweep", "sweep")?.unwrap_or(&empty);
        ctx.check_keys(sw_t, "sweep", &["v0"])?;
        let v0 = match sw_t.get("v0") {
            None => V0Policy::Flat,
            Some(Value::String(s)) if s == "flat" => V0Policy::Flat,
            Some(Value::String(s)) if s == "gaussian" => V0Policy::Gaussian { seed },
            Some(v) => return Err(ctx.err("sweep.v0", format!("expected \"flat\" or \"gaussian\", found {v}"))),
        };

        let out_t = ctx.table(&root, "output", "output")?.unwrap_or(&empty);
        ctx.check_keys(out_t, "output", &["dir"])?;
        let output_dir = match out_t.get("dir") {
            None => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(v) => return Err(ctx.err("output.dir", format!("expected a string, found {}", v.type_str()))),
        };

        Ok(Self { name, m, n, t_final, system, grid, tol, bad_set, v0, seed, output_dir })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// A file path, or the name of a bundled scenario.
    pub fn load(spec: &str) -> Result<Self> {
        let path = std::path::Path::new(spec);
        if !path.exists() {
            if let Some((_, src)) = BUNDLED.iter().find(|(name, _)| *name == spec) {
                return Self::from_toml(src);
            }
        }
        Self::from_path(path)
    }

    pub fn bundled(name: &str) -> Option<Self> {
        BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, src)| Self::from_toml(src).expect("bundled scenarios are valid"))
    }
}

fn parse_system(ctx: &Ctx, root: &Table, m: usize, n: usize) -> Result<SymbolMatrix> {
    let sys = ctx.table(root, "system", "system")?.ok_or_else(|| ctx.err("system", "required table is missing"))?;
    ctx.check_keys(sys, "system", &["entry"])?;
    let entries = ctx.table(sys, "entry", "system.entry")?.ok_or_else(|| ctx.err("system.entry", "required table is missing"))?;
    let mut comps = vec![PolyMatrix::zeros(m, m); n];
    for (ki, row) in entries {
        let f_row = format!("system.entry.{ki}");
        let i = index(ctx, ki, &f_row, m, "row")?;
        let Value::Table(row) = row else {
            return Err(ctx.err(&f_row, "expected a table of columns"));
        };
        for (kj, col) in row {
            let f_col = format!("{f_row}.{kj}");
            let j = index(ctx, kj, &f_col, m, "column")?;
            let Value::Table(col) = col else {
                return Err(ctx.err(&f_col, "expected a table of ξ components"));
            };
            for (kx, coeffs) in col {
                let f_x = format!("{f_col}.{kx}");
                let x = match kx.strip_prefix("xi") {
                    Some(d) => index(ctx, d, &f_x, n, "ξ component")?,
                    None => return Err(ctx.err(&f_x, "expected a key of the form xi<k>")),
                };
                let c = ctx.numbers(coeffs, &f_x)?;
                comps[x].set(i, j, TimePoly::from_real(&c));
            }
        }
    }
    SymbolMatrix::new(comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse() {
        for (name, _) in BUNDLED {
            let sc = Scenario::bundled(name).unwrap();
            assert_eq!(sc.name, name);
            assert_eq!(sc.system.size(), sc.m);
        }
    }

    #[test]
    fn minimal_scenario_gets_defaults() {
        let sc = Scenario::from_toml("name = \"x\"\nm = 1\nT = 2\nsystem.entry.1.1.xi1 = [0, 1]\n").unwrap();
        assert_eq!(sc.n, 1);
        assert_eq!(sc.grid.xi_magnitudes.len(), 10);
        assert_eq!(sc.v0, V0Policy::Flat);
        assert_eq!(sc.system.eval(0.5, &[2.0]).unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn diagnostics_carry_lines() {
        let src = "name = \"x\"\nm = 2\nT = 1\nsystem.entry.1.3.xi1 = [1]\n";
        match Scenario::from_toml(src).unwrap_err() {
            Error::Schema { field, line, .. } => {
                assert_eq!(field, "system.entry.1.3");
                assert_eq!(line, Some(4));
            }
            e => panic!("{e}"),
        }
        let src = "name = \"x\"\nm = 2\nT = 1\nsystem.entry.1.1.xi1 = [1]\n[grid]\ntpoints = 5\n";
        match Scenario::from_toml(src).unwrap_err() {
            Error::Schema { field, line, .. } => {
                assert_eq!(field, "grid.tpoints");
                assert_eq!(line, Some(6));
            }
            e => panic!("{e}"),
        }
    }
}
