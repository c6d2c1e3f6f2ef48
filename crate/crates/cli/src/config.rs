//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, list-valued keys are given
//! by repeating the key. Complex numbers are written `re+imj`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use semisep::Complex64;

#[derive(Debug, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

fn err(line: Option<usize>, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line, field: field.to_string(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Det,
    JostHalfline,
    TransmissionLine,
    System2x2,
    Floquet,
    WienerHopf,
    OracleCompare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Det => "det",
            Mode::JostHalfline => "jost-halfline",
            Mode::TransmissionLine => "transmission-line",
            Mode::System2x2 => "system2x2",
            Mode::Floquet => "floquet",
            Mode::WienerHopf => "wiener-hopf",
            Mode::OracleCompare => "oracle-compare",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "det" => Mode::Det,
            "jost-halfline" => Mode::JostHalfline,
            "transmission-line" => Mode::TransmissionLine,
            "system2x2" => Mode::System2x2,
            "floquet" => Mode::Floquet,
            "wiener-hopf" => Mode::WienerHopf,
            "oracle-compare" => Mode::OracleCompare,
            other => return Err(format!("unknown mode '{other}'")),
        })
    }
}

/// Potential description for the Schrodinger and Floquet modes.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    Zero,
    SquareWell { depth: Complex64, lo: f64, hi: f64 },
    /// `depth * exp(-decay |x|)` cut off at `|x| = truncation`.
    Exponential { depth: Complex64, decay: f64, truncation: f64 },
    Tabulated { xs: Vec<f64>, vs: Vec<Complex64> },
    /// `a0 + a1 cos(2 pi x / period)`.
    Cosine { a0: Complex64, a1: Complex64 },
    KronigPenney { depth: Complex64, width: f64 },
}

/// Coefficients of the rational symbol for the Wiener-Hopf, det and
/// oracle-compare modes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymbolSpec {
    pub alphas: Vec<Complex64>,
    pub lambdas: Vec<Complex64>,
    pub betas: Vec<Complex64>,
    pub mus: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub potential: Option<PotentialSpec>,
    pub symbol: Option<SymbolSpec>,
    pub grid_n: usize,
    pub period: f64,
    pub z: Vec<Complex64>,
    pub theta: Vec<f64>,
    pub tau: Vec<f64>,
    pub coupling: Vec<Complex64>,
    pub route_tol: f64,
    pub closed_form_tol: f64,
    pub oracle_tol: f64,
    pub oracle: bool,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_GRID_N: usize = 2000;
pub const MIN_GRID_N: usize = 16;

const KEYS: &[&str] = &[
    "mode", "potential", "depth", "well_lo", "well_hi", "decay", "truncation", "file", "a0", "a1", "width", "period",
    "symbol_alpha", "symbol_lambda", "symbol_beta", "symbol_mu", "grid_n", "z", "theta", "tau", "coupling",
    "route_tol", "closed_form_tol", "oracle_tol", "oracle", "output",
];
const LIST_KEYS: &[&str] = &["symbol_alpha", "symbol_lambda", "symbol_beta", "symbol_mu", "z", "theta", "tau", "coupling"];

/// Parses `re+imj`, `re-imj`, `imj` or a plain real number.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim();
    let bad = || format!("'{s}' is not a complex number of the form re+imj");
    let Some(body) = t.strip_suffix('j') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (body[..i].parse::<f64>().map_err(|_| bad())?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}

pub fn format_complex(z: Complex64) -> String {
    format!("{:.15e}{:+.15e}j", z.re, z.im)
}

struct Raw {
    entries: BTreeMap<String, Vec<(usize, String)>>,
}

impl Raw {
    fn one(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key).and_then(|v| v.first())
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn parsed<T>(&self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.one(key) {
            None => Ok(None),
            Some((line, v)) => f(v).map(Some).map_err(|m| err(Some(*line), key, m)),
        }
    }

    fn required<T>(&self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        self.parsed(key, f)?.ok_or_else(|| err(None, key, "required for this configuration"))
    }

    fn list<T>(&self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, ConfigError> {
        self.entries
            .get(key)
            .map(|v| v.iter().map(|(line, s)| f(s).map_err(|m| err(Some(*line), key, m))).collect())
            .unwrap_or_else(|| Ok(Vec::new()))
    }
}

fn real(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("'{s}' is not a finite real number"))
}

fn positive(s: &str) -> Result<f64, String> {
    real(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err(format!("{v} must be positive")) })
}

/// Two or three whitespace or comma separated columns `x, Re V[, Im V]`.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parse = |s: &str| real(s).map_err(|m| format!("{}:{}: {m}", path.display(), i + 1));
        match cols.as_slice() {
            [x, re] => {
                xs.push(parse(x)?);
                vs.push(Complex64::new(parse(re)?, 0.0));
            }
            [x, re, im] => {
                xs.push(parse(x)?);
                vs.push(Complex64::new(parse(re)?, parse(im)?));
            }
            _ => return Err(format!("{}:{}: expected 2 or 3 columns", path.display(), i + 1)),
        }
    }
    Ok((xs, vs))
}

impl RunConfig {
    /// Parses config text; relative file paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(Some(n), line, "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(Some(n), key, "unknown key"));
            }
            if value.is_empty() {
                return Err(err(Some(n), key, "empty value"));
            }
            let slot = entries.entry(key.to_string()).or_default();
            if !slot.is_empty() && !LIST_KEYS.contains(&key) {
                return Err(err(Some(n), key, format!("repeated; first given on line {}", slot[0].0)));
            }
            slot.push((n, value.to_string()));
        }
        let raw = Raw { entries };

        let mode: Mode = raw.required("mode", |s| s.parse())?;
        let grid_n = raw.parsed("grid_n", |s| s.parse::<usize>().map_err(|e| e.to_string()))?.unwrap_or(DEFAULT_GRID_N);
        let period = raw.parsed("period", positive)?.unwrap_or(1.0);
        let defaults = semisep::Tolerances::default();
        let oracle = raw
            .parsed("oracle", |s| match s {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(format!("'{s}' is not a boolean")),
            })?
            .unwrap_or(false);

        let mut cfg = RunConfig {
            mode,
            potential: None,
            symbol: None,
            grid_n,
            period,
            z: raw.list("z", parse_complex)?,
            theta: raw.list("theta", real)?,
            tau: raw.list("tau", positive)?,
            coupling: raw.list("coupling", parse_complex)?,
            route_tol: raw.parsed("route_tol", positive)?.unwrap_or(defaults.route),
            closed_form_tol: raw.parsed("closed_form_tol", positive)?.unwrap_or(1e-6),
            oracle_tol: raw.parsed("oracle_tol", positive)?.unwrap_or(defaults.oracle),
            oracle: oracle || mode == Mode::OracleCompare,
            output: raw.one("output").map(|(_, p)| base.join(p)),
        };

        match mode {
            Mode::JostHalfline | Mode::TransmissionLine | Mode::System2x2 | Mode::Floquet => {
                cfg.potential = Some(parse_potential(&raw, mode, base)?);
                if cfg.z.is_empty() {
                    return Err(err(None, "z", "at least one spectral point is required"));
                }
                if mode == Mode::Floquet && cfg.theta.is_empty() {
                    return Err(err(None, "theta", "at least one quasi-momentum is required"));
                }
            }
            Mode::WienerHopf | Mode::Det | Mode::OracleCompare => {
                let symbol = SymbolSpec {
                    alphas: raw.list("symbol_alpha", parse_complex)?,
                    lambdas: raw.list("symbol_lambda", parse_complex)?,
                    betas: raw.list("symbol_beta", parse_complex)?,
                    mus: raw.list("symbol_mu", parse_complex)?,
                };
                if symbol.alphas.len() != symbol.lambdas.len() {
                    return Err(err(None, "symbol_alpha", "needs as many entries as symbol_lambda"));
                }
                if symbol.betas.len() != symbol.mus.len() {
                    return Err(err(None, "symbol_beta", "needs as many entries as symbol_mu"));
                }
                if symbol.alphas.is_empty() && symbol.betas.is_empty() {
                    return Err(err(None, "symbol_alpha", "the symbol has no terms"));
                }
                cfg.symbol = Some(symbol);
                if cfg.tau.is_empty() {
                    return Err(err(None, "tau", "at least one interval length is required"));
                }
                if cfg.coupling.is_empty() {
                    cfg.coupling.push(Complex64::new(1.0, 0.0));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(None, "--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid_n < MIN_GRID_N {
            return Err(err(None, "grid_n", format!("{} is below the minimum of {MIN_GRID_N}", self.grid_n)));
        }
        Ok(())
    }
}

fn parse_potential(raw: &Raw, mode: Mode, base: &Path) -> Result<PotentialSpec, ConfigError> {
    let kind = raw.required("potential", |s| Ok(s.to_string()))?;
    let halfline = mode == Mode::JostHalfline;
    let spec = match (kind.as_str(), mode == Mode::Floquet) {
        ("zero", _) => PotentialSpec::Zero,
        ("square-well", false) => PotentialSpec::SquareWell {
            depth: raw.required("depth", parse_complex)?,
            lo: raw.parsed("well_lo", real)?.map_or_else(|| if halfline { Ok(0.0) } else { Err(err(None, "well_lo", "required for a line well")) }, Ok)?,
            hi: raw.required("well_hi", real)?,
        },
        ("exponential", false) => PotentialSpec::Exponential {
            depth: raw.required("depth", parse_complex)?,
            decay: raw.required("decay", positive)?,
            truncation: raw.required("truncation", positive)?,
        },
        ("tabulated", _) => {
            let (line, file) = raw.one("file").ok_or_else(|| err(None, "file", "required for a tabulated potential"))?;
            let (xs, vs) = read_table(&base.join(file)).map_err(|m| err(Some(*line), "file", m))?;
            PotentialSpec::Tabulated { xs, vs }
        }
        ("cosine", true) => PotentialSpec::Cosine {
            a0: raw.parsed("a0", parse_complex)?.unwrap_or_default(),
            a1: raw.required("a1", parse_complex)?,
        },
        ("kronig-penney", true) => PotentialSpec::KronigPenney {
            depth: raw.required("depth", parse_complex)?,
            width: raw.required("width", positive)?,
        },
        (other, _) => {
            let line = raw.one("potential").map(|e| e.0);
            return Err(err(line, "potential", format!("'{other}' is not available in mode {}", mode.name())));
        }
    };
    for unused in ["depth", "well_lo", "well_hi", "decay", "truncation", "a0", "a1", "width"] {
        if raw.has(unused) && !potential_uses(&spec, unused) {
            log::warn!("key '{unused}' is ignored for this potential");
        }
    }
    Ok(spec)
}

fn potential_uses(spec: &PotentialSpec, key: &str) -> bool {
    let keys: &[&str] = match spec {
        PotentialSpec::Zero | PotentialSpec::Tabulated { .. } => &[],
        PotentialSpec::SquareWell { .. } => &["depth", "well_lo", "well_hi"],
        PotentialSpec::Exponential { .. } => &["depth", "decay", "truncation"],
        PotentialSpec::Cosine { .. } => &["a0", "a1"],
        PotentialSpec::KronigPenney { .. } => &["depth", "width"],
    };
    keys.contains(&key)
}
