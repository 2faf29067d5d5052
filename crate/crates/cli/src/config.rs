//! Run configuration.
//!
//! Settings come from three layers, later ones winning: built-in defaults
//! for the command, a key=value file, and command-line flags. The file is
//! split into sections: keys under `[model]` apply to every command, keys
//! under `[fig1]`, `[momentum]` and so on only to that command.
//!
//! ```text
//! # fig1 with a denser grid
//! [model]
//! lambda = 1.2
//! mu = 1
//!
//! [fig1]
//! points = 4001
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use dsi_barrier_core::{ModelParams, DEFAULT_A0};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Alpha,
    Fig1,
    Fig2,
    Wavefunction,
    Momentum,
    Spectrum,
    Verify,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Alpha => "alpha",
            CommandKind::Fig1 => "fig1",
            CommandKind::Fig2 => "fig2",
            CommandKind::Wavefunction => "wavefunction",
            CommandKind::Momentum => "momentum",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Verify => "verify",
        }
    }
}

/// Evenly spaced grid, in `ln x` when `log` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let (lo, hi) = if self.log {
            (self.min.ln(), self.max.ln())
        } else {
            (self.min, self.max)
        };
        let step = (hi - lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    self.min
                } else if i + 1 == self.points {
                    self.max
                } else if self.log {
                    (lo + step * i as f64).exp()
                } else {
                    lo + step * i as f64
                }
            })
            .collect()
    }

    fn validate(&self) -> CliResult<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min >= self.max {
            return Err(CliError::Config(format!(
                "grid needs finite min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.log && self.min <= 0.0 {
            return Err(CliError::Config(format!(
                "logarithmic grid needs min > 0, got {}",
                self.min
            )));
        }
        if self.points < 2 {
            return Err(CliError::Config("grid needs at least 2 points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: ModelParams,
    pub a0: f64,
    pub n_c: i32,
    /// `ln(x / x0)` grid for fig1, `x` grid for wavefunction, `p` grid for
    /// fig2 and momentum.
    pub grid: Grid,
    pub epsilon: f64,
    pub kappa_x0: Vec<f64>,
    pub k_x0: f64,
    pub steps: u32,
    pub seed: u64,
    pub samples: usize,
    pub out_dir: PathBuf,
}

/// Flag values; `None` leaves the lower layers in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub x0: Option<f64>,
    pub a0: Option<f64>,
    pub n_c: Option<i32>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Draft {
    lambda: f64,
    mu: f64,
    x0: f64,
    a0: f64,
    n_c: i32,
    grid: Grid,
    epsilon: f64,
    kappa_x0: Vec<f64>,
    k_x0: f64,
    steps: u32,
    seed: u64,
    samples: usize,
}

fn defaults(command: CommandKind) -> Draft {
    let base = Draft {
        lambda: 1.2,
        mu: 1.0,
        x0: 1.0,
        a0: DEFAULT_A0,
        n_c: 0,
        grid: Grid {
            min: -1.0,
            max: 3.0,
            points: 2001,
            log: false,
        },
        epsilon: 0.0,
        kappa_x0: vec![0.1, 1.0, 10.0],
        k_x0: 1.0,
        steps: 40,
        seed: 0,
        samples: 1000,
    };
    match command {
        CommandKind::Fig2 => Draft {
            lambda: 3.0,
            grid: Grid {
                min: 1e-7,
                max: 1e-3,
                points: 400,
                log: true,
            },
            ..base
        },
        CommandKind::Wavefunction => Draft {
            grid: Grid {
                min: 1e-3,
                max: 1e3,
                points: 1001,
                log: true,
            },
            ..base
        },
        CommandKind::Momentum => Draft {
            grid: Grid {
                min: 1e-6,
                max: 1e2,
                points: 200,
                log: true,
            },
            ..base
        },
        CommandKind::Spectrum => Draft {
            lambda: 2.0,
            ..base
        },
        _ => base,
    }
}

pub type Ini = BTreeMap<String, BTreeMap<String, (String, usize)>>;

/// `section -> key -> (value, line)` from key=value text. `#` and `;` start
/// comments; keys before any section header belong to `[model]`.
pub fn parse_ini(text: &str) -> CliResult<Ini> {
    let mut out = Ini::new();
    let mut section = "model".to_string();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| {
                    CliError::Config(format!("line {line_no}: unterminated section header"))
                })?
                .trim();
            if name.is_empty() {
                return Err(CliError::Config(format!(
                    "line {line_no}: empty section name"
                )));
            }
            section = name.to_ascii_lowercase();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {line_no}: expected key = value")))?;
        let key = key.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(CliError::Config(format!("line {line_no}: empty key")));
        }
        let entries = out.entry(section.clone()).or_default();
        if entries
            .insert(key.clone(), (value.trim().to_string(), line_no))
            .is_some()
        {
            return Err(CliError::Config(format!(
                "line {line_no}: duplicate key `{key}` in [{section}]"
            )));
        }
    }
    Ok(out)
}

const SECTIONS: [&str; 8] = [
    "model",
    "alpha",
    "fig1",
    "fig2",
    "wavefunction",
    "momentum",
    "spectrum",
    "verify",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("line {line}: cannot parse `{value}` for `{key}`")))
}

fn apply(draft: &mut Draft, key: &str, value: &str, line: usize) -> CliResult<()> {
    match key {
        "lambda" => draft.lambda = parse_value(key, value, line)?,
        "mu" => draft.mu = parse_value(key, value, line)?,
        "x0" => draft.x0 = parse_value(key, value, line)?,
        "a0" => draft.a0 = parse_value(key, value, line)?,
        "n_c" | "nc" => draft.n_c = parse_value(key, value, line)?,
        "min" => draft.grid.min = parse_value(key, value, line)?,
        "max" => draft.grid.max = parse_value(key, value, line)?,
        "points" => draft.grid.points = parse_value(key, value, line)?,
        "epsilon" => draft.epsilon = parse_value(key, value, line)?,
        "kappa_x0" => {
            draft.kappa_x0 = value
                .split(',')
                .map(|v| parse_value(key, v.trim(), line))
                .collect::<CliResult<Vec<f64>>>()?
        }
        "k_x0" => draft.k_x0 = parse_value(key, value, line)?,
        "steps" => draft.steps = parse_value(key, value, line)?,
        "seed" => draft.seed = parse_value(key, value, line)?,
        "samples" => draft.samples = parse_value(key, value, line)?,
        _ => {
            return Err(CliError::Config(format!(
                "line {line}: unknown key `{key}`"
            )))
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn resolve(
        command: CommandKind,
        file_text: Option<&str>,
        flags: &Overrides,
    ) -> CliResult<Self> {
        let mut d = defaults(command);
        if let Some(text) = file_text {
            let ini = parse_ini(text)?;
            if let Some(bad) = ini.keys().find(|s| !SECTIONS.contains(&s.as_str())) {
                return Err(CliError::Config(format!("unknown section [{bad}]")));
            }
            for section in ["model", command.name()] {
                if let Some(entries) = ini.get(section) {
                    for (key, (value, line)) in entries {
                        apply(&mut d, key, value, *line)?;
                    }
                }
            }
        }
        if let Some(v) = flags.lambda {
            d.lambda = v;
        }
        if let Some(v) = flags.mu {
            d.mu = v;
        }
        if let Some(v) = flags.x0 {
            d.x0 = v;
        }
        if let Some(v) = flags.a0 {
            d.a0 = v;
        }
        if let Some(v) = flags.n_c {
            d.n_c = v;
        }
        if let Some(v) = flags.seed {
            d.seed = v;
        }
        let params = ModelParams::new(d.x0, d.lambda, d.mu)?;
        if !(d.a0.is_finite() && d.a0 != 0.0) {
            return Err(CliError::Config(format!(
                "a0 must be finite and nonzero, got {}",
                d.a0
            )));
        }
        if matches!(
            command,
            CommandKind::Fig1
                | CommandKind::Fig2
                | CommandKind::Wavefunction
                | CommandKind::Momentum
        ) {
            d.grid.validate()?;
        }
        if !(d.epsilon.is_finite() && d.epsilon >= 0.0) {
            return Err(CliError::Config(format!(
                "epsilon must be >= 0, got {}",
                d.epsilon
            )));
        }
        if d.kappa_x0.is_empty() || d.kappa_x0.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(CliError::Config(
                "kappa_x0 needs one or more positive values".into(),
            ));
        }
        if !(d.k_x0.is_finite() && d.k_x0 > 0.0) {
            return Err(CliError::Config(format!(
                "k_x0 must be positive, got {}",
                d.k_x0
            )));
        }
        if d.samples == 0 {
            return Err(CliError::Config("samples must be positive".into()));
        }
        Ok(RunConfig {
            command,
            params,
            a0: d.a0,
            n_c: d.n_c,
            grid: d.grid,
            epsilon: d.epsilon,
            kappa_x0: d.kappa_x0,
            k_x0: d.k_x0,
            steps: d.steps,
            seed: d.seed,
            samples: d.samples,
            out_dir: flags.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}
