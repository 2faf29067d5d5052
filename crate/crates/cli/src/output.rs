use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use dsi_barrier_core::ZeroModeState;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "dsi-barrier/1";

/// Seventeen significant digits in scientific notation.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "nan".to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
        }
    }
}

pub fn csv_string(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path.display().to_string(), e))
}

pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<Cell>],
) -> CliResult<PathBuf> {
    let path = dir.join(name);
    write_text(&path, &csv_string(header, rows))?;
    Ok(path)
}

#[derive(Debug, Serialize)]
pub struct Software {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct ParamsBlock {
    pub x0: f64,
    pub lambda: f64,
    pub mu: f64,
    pub a0: f64,
}

#[derive(Debug, Serialize)]
pub struct RootsBlock {
    pub r_grow: f64,
    pub r_decay: f64,
    pub discriminant: f64,
}

/// Metadata written next to every CSV.
#[derive(Debug, Serialize)]
pub struct Sidecar {
    pub schema: &'static str,
    pub software: Software,
    pub command: &'static str,
    pub params: ParamsBlock,
    pub alpha: f64,
    pub roots: RootsBlock,
    pub regime: String,
    pub tolerances: Value,
    pub files: Vec<String>,
    pub results: Value,
}

impl Sidecar {
    pub fn new(
        config: &RunConfig,
        state: &ZeroModeState,
        tolerances: Value,
        files: Vec<String>,
        results: Value,
    ) -> Self {
        let p = state.params();
        let r = state.roots();
        Sidecar {
            schema: SCHEMA,
            software: Software {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            command: config.command.name(),
            params: ParamsBlock {
                x0: p.x0(),
                lambda: p.lambda(),
                mu: p.mu(),
                a0: config.a0,
            },
            alpha: state.alpha(),
            roots: RootsBlock {
                r_grow: r.r_grow,
                r_decay: r.r_decay,
                discriminant: r.discriminant,
            },
            regime: dsi_barrier_core::Regime::from_alpha(state.alpha()).to_string(),
            tolerances,
            files,
            results,
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(format!("{}.json", self.command));
        let mut text = serde_json::to_string_pretty(self).expect("sidecar serializes");
        text.push('\n');
        write_text(&path, &text)?;
        Ok(path)
    }
}

pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_num(f64::NAN), "nan");
        let v = 0.123_456_789_012_345_68_f64;
        assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn csv_layout() {
        let s = csv_string(&["a", "n"], &[vec![Cell::Num(1.0), Cell::Int(-3)]]);
        assert_eq!(s, "a,n\n1.0000000000000000e0,-3\n");
    }
}
