//! Experiment configuration: built-in presets and the line-oriented config
//! file that overrides them.
//!
//! ```text
//! # comment
//! [problem]
//! name = harmonic_oscillator_1d
//! preset = desk            # desk | paper
//! h = 1/50                 # fraction or decimal
//! order = 1
//!
//! [rom]
//! p = 4
//! sampling = fine          # coarse | fine
//! train = 1,0; 3,1         # points separated by `;`, coordinates by `,`
//! test = grid 1:0.25:3 x 0:0.1:1
//! bounds = 3,0.8
//! partition_tol = 1e-6
//! slack = 1e-8
//! shift = auto             # auto | off
//!
//! [solver]
//! tol = 1e-12
//! max_iter = 1000
//! preconditioner = banded  # none | jacobi | banded
//! seed = 0
//!
//! [output]
//! dir = out
//! vectors = false
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rbeig_core::analysis::{DEFAULT_BOUND_SLACK, DEFAULT_PARTITION_TOL};
use rbeig_core::eigsolve::{Preconditioner, SolverOptions};
use rbeig_core::fem::problems::{self, builtin};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("invalid value for `{key}`: {msg}")]
    InvalidValue { key: String, msg: String },
    #[error("unknown problem `{0}` (see `list-problems`)")]
    UnknownProblem(String),
    #[error("no problem given: set [problem] name or pass --problem")]
    MissingProblem,
    #[error("{what} point {mu:?} is outside the parameter box of {problem}")]
    OutOfDomain { what: &'static str, problem: String, mu: Vec<f64> },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Preset {
    /// Meshes sized for a workstation.
    #[default]
    Desk,
    /// Full-resolution meshes; long running, 3D cases need hours and tens
    /// of gigabytes.
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    Coarse,
    Fine,
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            _ => Err(format!("expected desk or paper, got `{s}`")),
        }
    }
}

impl FromStr for Sampling {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "coarse" => Ok(Sampling::Coarse),
            "fine" => Ok(Sampling::Fine),
            _ => Err(format!("expected coarse or fine, got `{s}`")),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        })
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampling::Coarse => "coarse",
            Sampling::Fine => "fine",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    pub preset: Preset,
    pub sampling: Sampling,
    pub h: f64,
    pub element_order: usize,
    /// Eigenpairs per training point, and pairs compared in sweeps.
    pub p: usize,
    pub train: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
    /// Parameters for bound reports.
    pub bounds: Vec<Vec<f64>>,
    pub solver: SolverOptions,
    pub partition_tol: f64,
    pub slack: f64,
    /// Shift the stiffness when `λ₁ ≤ 0` before building `P_A`.
    pub auto_shift: bool,
    pub out: PathBuf,
    pub write_vectors: bool,
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub problem: Option<String>,
    pub preset: Option<Preset>,
    pub sampling: Option<Sampling>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub vectors: bool,
}

fn scalars(v: &[f64]) -> Vec<Vec<f64>> {
    v.iter().map(|&x| vec![x]).collect()
}

fn range(lo: f64, step: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn product(a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| vec![x, y])).collect()
}

impl ExperimentConfig {
    /// The built-in setup of one experiment.
    pub fn preset(problem: &str, preset: Preset, sampling: Sampling) -> Result<ExperimentConfig, ConfigError> {
        let desk = preset == Preset::Desk;
        let (h, order, p, train, test, bounds) = match problem {
            problems::LAPLACE_ROBIN_1D => (
                if desk { 1.0 / 500.0 } else { 1.0 / 2000.0 },
                1,
                5,
                scalars(&[1.0, 5.0, 9.0]),
                scalars(&range(0.0, 0.25, 10.0)),
                scalars(&[10.0]),
            ),
            problems::HARMONIC_OSCILLATOR_1D => (
                1.0 / 50.0,
                1,
                4,
                match sampling {
                    Sampling::Coarse => product(&[1.0, 3.0], &[0.0, 1.0]),
                    Sampling::Fine => product(&[1.0, 2.0, 3.0], &[0.0, 0.5, 1.0]),
                },
                product(&range(1.0, 0.25, 3.0), &range(0.0, 0.1, 1.0)),
                vec![vec![3.0, 0.8]],
            ),
            problems::GAUSSIAN_WELL_2D => (
                if desk { 1.0 / 64.0 } else { 1.0 / 128.0 },
                1,
                1,
                scalars(&[-2.5, 2.5]),
                scalars(&range(-5.0, 0.25, 5.0)),
                scalars(&[0.0]),
            ),
            problems::DIATOMIC_WELL_3D => (
                if desk { 1.0 / 16.0 } else { 1.0 / 128.0 },
                1,
                2,
                match sampling {
                    Sampling::Coarse => scalars(&[-1.25, 1.25]),
                    Sampling::Fine => scalars(&[-1.25, 0.0, 1.25]),
                },
                scalars(&range(-2.0, 0.125, 2.0)),
                scalars(&[2.0]),
            ),
            problems::FICHERA_DIFFUSION_3D => (
                if desk { 1.0 / 8.0 } else { 1.0 / 64.0 },
                if desk { 1 } else { 2 },
                9,
                scalars(&[0.0, 10.0, 20.0]),
                scalars(&range(0.0, 0.5, 20.0)),
                scalars(&[10.0]),
            ),
            other => return Err(ConfigError::UnknownProblem(other.to_string())),
        };
        // a direct band solve is out of reach for the full-resolution 3D meshes
        let preconditioner = if !desk && matches!(problem, problems::DIATOMIC_WELL_3D | problems::FICHERA_DIFFUSION_3D) {
            Preconditioner::Jacobi
        } else {
            Preconditioner::BandedCholesky
        };
        Ok(ExperimentConfig {
            problem: problem.to_string(),
            preset,
            sampling,
            h,
            element_order: order,
            p,
            train,
            test,
            bounds,
            solver: SolverOptions {
                block_size: p,
                tol: 1e-12,
                max_iter: 1000,
                preconditioner,
                seed: 0,
                record_history: false,
            },
            partition_tol: DEFAULT_PARTITION_TOL,
            slack: DEFAULT_BOUND_SLACK,
            auto_shift: true,
            out: PathBuf::from("out"),
            write_vectors: false,
        })
    }

    /// Preset selected by the overrides alone.
    pub fn from_overrides(ov: &Overrides) -> Result<ExperimentConfig, ConfigError> {
        let problem = ov.problem.as_deref().ok_or(ConfigError::MissingProblem)?;
        let mut cfg = Self::preset(problem, ov.preset.unwrap_or_default(), ov.sampling.unwrap_or_default())?;
        cfg.apply_overrides(ov);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path, ov: &Overrides) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, ov)
    }

    /// Parses config text on top of the preset it names.
    pub fn parse(text: &str, ov: &Overrides) -> Result<ExperimentConfig, ConfigError> {
        let entries = tokenize(text)?;
        let get = |section: &str, key: &str| {
            entries
                .iter()
                .rev()
                .find(|e| e.section == section && e.key == key)
                .map(|e| e.value.as_str())
        };
        let problem = match (&ov.problem, get("problem", "name")) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => p.to_string(),
            (None, None) => return Err(ConfigError::MissingProblem),
        };
        let preset = match (ov.preset, get("problem", "preset")) {
            (Some(p), _) => p,
            (None, Some(s)) => parse_enum("preset", s)?,
            (None, None) => Preset::Desk,
        };
        let sampling = match (ov.sampling, get("rom", "sampling")) {
            (Some(s), _) => s,
            (None, Some(s)) => parse_enum("sampling", s)?,
            (None, None) => Sampling::Coarse,
        };
        let mut cfg = Self::preset(&problem, preset, sampling)?;
        for e in &entries {
            cfg.set(&e.section, &e.key, &e.value)?;
        }
        cfg.apply_overrides(ov);
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, v: &str) -> Result<(), ConfigError> {
        let name = format!("{section}.{key}");
        match (section, key) {
            ("problem", "name" | "preset") | ("rom", "sampling") => {}
            ("problem", "h") => self.h = parse_number(&name, v)?,
            ("problem", "order") => self.element_order = parse_int(&name, v)?,
            ("rom", "p") => self.p = parse_int(&name, v)?,
            ("rom", "train") => self.train = parse_points(&name, v)?,
            ("rom", "test") => self.test = parse_points(&name, v)?,
            ("rom", "bounds") => self.bounds = parse_points(&name, v)?,
            ("rom", "partition_tol") => self.partition_tol = parse_number(&name, v)?,
            ("rom", "slack") => self.slack = parse_number(&name, v)?,
            ("rom", "shift") => {
                self.auto_shift = match v {
                    "auto" => true,
                    "off" => false,
                    _ => return Err(invalid(&name, "expected auto or off")),
                }
            }
            ("solver", "tol") => self.solver.tol = parse_number(&name, v)?,
            ("solver", "max_iter") => self.solver.max_iter = parse_int(&name, v)?,
            ("solver", "seed") => self.solver.seed = parse_int(&name, v)?,
            ("solver", "preconditioner") => {
                self.solver.preconditioner = match v {
                    "none" => Preconditioner::None,
                    "jacobi" => Preconditioner::Jacobi,
                    "banded" => Preconditioner::BandedCholesky,
                    _ => return Err(invalid(&name, "expected none, jacobi or banded")),
                }
            }
            ("output", "dir") => self.out = PathBuf::from(v),
            ("output", "vectors") => {
                self.write_vectors = v.parse().map_err(|_| invalid(&name, "expected true or false"))?
            }
            _ => unreachable!("keys are checked while tokenizing"),
        }
        Ok(())
    }

    fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(seed) = ov.seed {
            self.solver.seed = seed;
        }
        if let Some(out) = &ov.out {
            self.out = out.clone();
        }
        self.write_vectors |= ov.vectors;
        self.solver.block_size = self.p;
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let prob = builtin(&self.problem).map_err(|_| ConfigError::UnknownProblem(self.problem.clone()))?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid("problem.h", "must be positive"));
        }
        if !matches!(self.element_order, 1 | 2) {
            return Err(invalid("problem.order", "must be 1 or 2"));
        }
        if self.p == 0 {
            return Err(invalid("rom.p", "must be at least 1"));
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return Err(invalid("solver", "tol must be positive and max_iter at least 1"));
        }
        if !(self.partition_tol >= 0.0) || !(self.slack >= 0.0) {
            return Err(invalid("rom", "partition_tol and slack must be nonnegative"));
        }
        for (what, set) in [("training", &self.train), ("test", &self.test), ("bounds", &self.bounds)] {
            for mu in set.iter() {
                self.check_mu_in(&prob, what, mu)?;
            }
        }
        if self.train.is_empty() {
            return Err(invalid("rom.train", "needs at least one point"));
        }
        Ok(())
    }

    /// Checks that `mu` has the right dimension and lies in the box.
    pub fn check_mu(&self, mu: &[f64]) -> Result<(), ConfigError> {
        let prob = builtin(&self.problem).map_err(|_| ConfigError::UnknownProblem(self.problem.clone()))?;
        self.check_mu_in(&prob, "requested", mu)
    }

    fn check_mu_in(
        &self,
        prob: &rbeig_core::fem::ParametricProblem,
        what: &'static str,
        mu: &[f64],
    ) -> Result<(), ConfigError> {
        if mu.len() != prob.params.dim() || !prob.params.contains(mu) {
            return Err(ConfigError::OutOfDomain {
                what,
                problem: self.problem.clone(),
                mu: mu.to_vec(),
            });
        }
        Ok(())
    }
}

struct Entry {
    section: String,
    key: String,
    value: String,
}

const KEYS: &[(&str, &[&str])] = &[
    ("problem", &["name", "preset", "h", "order"]),
    ("rom", &["p", "sampling", "train", "test", "bounds", "partition_tol", "slack", "shift"]),
    ("solver", &["tol", "max_iter", "preconditioner", "seed"]),
    ("output", &["dir", "vectors"]),
];

fn tokenize(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut section: Option<String> = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax {
                    line,
                    msg: "unterminated section header".into(),
                })?
                .trim();
            if !KEYS.iter().any(|(sec, _)| *sec == name) {
                return Err(ConfigError::Syntax {
                    line,
                    msg: format!("unknown section [{name}]"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = s.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            msg: "expected `key = value`".into(),
        })?;
        let sec = section.clone().ok_or_else(|| ConfigError::Syntax {
            line,
            msg: "key outside any section".into(),
        })?;
        let key = key.trim().to_string();
        let known = KEYS.iter().any(|(s, keys)| *s == sec && keys.contains(&key.as_str()));
        if !known {
            return Err(ConfigError::UnknownKey { line, section: sec, key });
        }
        out.push(Entry {
            section: sec,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

fn invalid(key: &str, msg: &str) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        msg: msg.to_string(),
    }
}

fn parse_enum<T: FromStr<Err = String>>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|e: String| invalid(key, &e))
}

fn parse_int<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| invalid(key, &format!("`{v}` is not a nonnegative integer")))
}

/// A decimal number or a fraction `a/b`.
pub fn parse_number(key: &str, v: &str) -> Result<f64, ConfigError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| invalid(key, &format!("`{}` is not a number", s.trim())))
    };
    let x = match v.split_once('/') {
        Some((a, b)) => num(a)? / num(b)?,
        None => num(v)?,
    };
    if !x.is_finite() {
        return Err(invalid(key, &format!("`{v}` is not finite")));
    }
    Ok(x)
}

/// `a,b` for a single point.
pub fn parse_point(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',').map(|c| parse_number(key, c)).collect()
}

/// `a,b; c,d` or `grid lo:step:hi x lo:step:hi`.
pub fn parse_points(key: &str, v: &str) -> Result<Vec<Vec<f64>>, ConfigError> {
    let v = v.trim();
    if let Some(spec) = v.strip_prefix("grid") {
        let axes: Vec<Vec<f64>> = spec.split(" x ").map(|a| parse_axis(key, a.trim())).collect::<Result<_, _>>()?;
        let mut points = vec![vec![]];
        for axis in &axes {
            points = points
                .iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        return Ok(points);
    }
    if v.is_empty() {
        return Ok(vec![]);
    }
    v.split(';').map(|p| parse_point(key, p)).collect()
}

fn parse_axis(key: &str, a: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = a.split(':').collect();
    match parts.as_slice() {
        [x] => Ok(vec![parse_number(key, x)?]),
        [lo, step, hi] => {
            let (lo, step, hi) = (parse_number(key, lo)?, parse_number(key, step)?, parse_number(key, hi)?);
            if !(step > 0.0) || hi < lo {
                return Err(invalid(key, "grid axis needs lo <= hi and a positive step"));
            }
            let n = (hi - lo) / step;
            if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
                return Err(invalid(key, &format!("step {step} does not divide [{lo}, {hi}]")));
            }
            Ok(range(lo, step, hi))
        }
        _ => Err(invalid(key, &format!("bad grid axis `{a}`; expected lo:step:hi"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_points() {
        assert_eq!(parse_number("h", "1/500").unwrap(), 1.0 / 500.0);
        assert_eq!(parse_number("h", " 0.25 ").unwrap(), 0.25);
        assert!(parse_number("h", "1/0").is_err());
        assert_eq!(parse_points("t", "1,0; 1,1").unwrap(), vec![vec![1.0, 0.0], vec![1.0, 1.0]]);
        let g = parse_points("t", "grid 1:1:3 x 0:0.5:1").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[1], vec![1.0, 0.5]);
        assert!(parse_points("t", "grid 0:0.3:1").is_err());
    }

    #[test]
    fn presets_have_the_documented_sizes() {
        let c = ExperimentConfig::preset(problems::LAPLACE_ROBIN_1D, Preset::Desk, Sampling::Coarse).unwrap();
        assert_eq!((c.train.len() * c.p, c.test.len()), (15, 41));
        let c = ExperimentConfig::preset(problems::HARMONIC_OSCILLATOR_1D, Preset::Desk, Sampling::Fine).unwrap();
        assert_eq!((c.train.len() * c.p, c.test.len()), (36, 99));
        let c = ExperimentConfig::preset(problems::DIATOMIC_WELL_3D, Preset::Desk, Sampling::Coarse).unwrap();
        assert_eq!((c.train.len() * c.p, c.test.len()), (4, 33));
        let c = ExperimentConfig::preset(problems::FICHERA_DIFFUSION_3D, Preset::Paper, Sampling::Coarse).unwrap();
        assert_eq!((c.h, c.element_order, c.train.len() * c.p), (1.0 / 64.0, 2, 27));
    }

    #[test]
    fn file_overrides_preset() {
        let text = "[problem]\nname = laplace_robin_1d\nh = 1/100 # coarse\n[rom]\ntrain = 2; 4\n[solver]\npreconditioner = jacobi\n";
        let c = ExperimentConfig::parse(text, &Overrides::default()).unwrap();
        assert_eq!(c.h, 0.01);
        assert_eq!(c.train, vec![vec![2.0], vec![4.0]]);
        assert_eq!(c.solver.preconditioner, Preconditioner::Jacobi);
        assert_eq!(c.p, 5);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let ov = Overrides::default();
        assert!(matches!(
            ExperimentConfig::parse("[problem]\nname = nope\n", &ov),
            Err(ConfigError::UnknownProblem(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("[problem]\nname = laplace_robin_1d\ncolour = red\n", &ov),
            Err(ConfigError::UnknownKey { line: 3, .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("name = laplace_robin_1d\n", &ov),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("[problem]\nname = laplace_robin_1d\n[rom]\ntrain = 11\n", &ov),
            Err(ConfigError::OutOfDomain { .. })
        ));
        assert!(matches!(ExperimentConfig::parse("", &ov), Err(ConfigError::MissingProblem)));
    }
}
