//! Run configuration files (TOML).
//!
//! ```toml
//! [domain]
//! n = 1
//! L = 1.0
//! N = 16
//!
//! [system]
//! kind = "reversible"        # or "lotka_volterra", "polynomial"
//! k_f = 1.0
//! k_b = 1.0
//! d = [1.0, 1.0, 1.0, 1.0]
//!
//! [initial]
//! kind = "constant"          # or "cosine", "snapshot", "random"
//! values = [1.0, 1.0, 0.0, 0.0]
//!
//! [integrator]
//! dt = 1e-3
//! t_end = 1.0
//! ```
//!
//! Inline polynomial terms are `{ species, coefficient, exponents }` records
//! with 1-based species. Snapshot paths are relative to the config file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::snapshot::load_field;
use crate::grid::{BoxDomain, ScalarField, State};
use crate::integrate::IntegratorConfig;
use crate::systems::{lotka_volterra, reversible, BalanceClass, PolynomialVectorField, SystemSpec, Term};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub system: SystemConfig,
    pub initial: InitialConfig,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A scalar applies to every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    Uniform(T),
    Each(Vec<T>),
}

impl<T: Copy> PerAxis<T> {
    fn expand(&self, n: usize, name: &str) -> Result<Vec<T>> {
        match self {
            PerAxis::Uniform(v) => Ok(vec![*v; n]),
            PerAxis::Each(v) if v.len() == n => Ok(v.clone()),
            PerAxis::Each(v) => Err(Error::Config(format!("domain.{name} has {} entries for n = {n}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: PerAxis<f64>,
    #[serde(rename = "N")]
    pub cells: PerAxis<usize>,
}

impl DomainConfig {
    pub fn build(&self) -> Result<BoxDomain> {
        BoxDomain::new(self.length.expand(self.n, "L")?, self.cells.expand(self.n, "N")?)
            .map_err(|e| Error::Config(format!("domain: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub species: usize,
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Reversible {
        k_f: f64,
        k_b: f64,
        d: [f64; 4],
        #[serde(default)]
        reduce_to_conservative: bool,
    },
    LotkaVolterra {
        tau: Vec<f64>,
        a: Vec<Vec<f64>>,
        d: Vec<f64>,
        #[serde(default)]
        reduce_to_conservative: bool,
    },
    Polynomial {
        d: Vec<f64>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        terms: Vec<TermConfig>,
        #[serde(default)]
        reduce_to_conservative: bool,
    },
}

/// A system before its balance class is settled by the checkers.
#[derive(Debug, Clone)]
pub struct SystemDraft {
    pub d: Vec<f64>,
    pub field: PolynomialVectorField,
    pub weights: Option<Vec<f64>>,
    /// Known for builtins; `None` means "take the checker's outcome".
    pub class: Option<BalanceClass>,
}

impl SystemDraft {
    pub fn m(&self) -> usize {
        self.d.len()
    }

    pub fn finish(&self, class: BalanceClass) -> Result<SystemSpec> {
        SystemSpec::new(self.d.clone(), self.field.clone(), class, self.weights.clone())
    }
}

fn check_diffusion(d: &[f64]) -> Result<()> {
    for (i, v) in d.iter().enumerate() {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::Config(format!(
                "system.d[{i}] = {v}: diffusion coefficients must be positive (hypothesis (D))"
            )));
        }
    }
    Ok(())
}

impl SystemConfig {
    pub fn reduce_to_conservative(&self) -> bool {
        match self {
            SystemConfig::Reversible { reduce_to_conservative, .. }
            | SystemConfig::LotkaVolterra { reduce_to_conservative, .. }
            | SystemConfig::Polynomial { reduce_to_conservative, .. } => *reduce_to_conservative,
        }
    }

    pub fn build(&self) -> Result<SystemDraft> {
        let cfg_err = |e: Error| Error::Config(format!("system: {e}"));
        match self {
            SystemConfig::Reversible { k_f, k_b, d, .. } => {
                check_diffusion(d)?;
                let s = reversible(*k_f, *k_b, *d).map_err(cfg_err)?;
                Ok(SystemDraft {
                    d: s.d().to_vec(),
                    field: s.field().clone(),
                    weights: None,
                    class: Some(s.balance_class()),
                })
            }
            SystemConfig::LotkaVolterra { tau, a, d, .. } => {
                check_diffusion(d)?;
                let s = lotka_volterra(tau, a, d).map_err(cfg_err)?;
                Ok(SystemDraft {
                    d: s.d().to_vec(),
                    field: s.field().clone(),
                    weights: None,
                    class: Some(s.balance_class()),
                })
            }
            SystemConfig::Polynomial { d, weights, terms, .. } => {
                check_diffusion(d)?;
                let m = d.len();
                if m == 0 {
                    return Err(Error::Config("system.d must list at least one species".into()));
                }
                if let Some(w) = weights {
                    if w.len() != m || w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                        return Err(Error::Config(format!("system.weights must be {m} positive numbers")));
                    }
                }
                let mut parsed = Vec::with_capacity(terms.len());
                for (k, t) in terms.iter().enumerate() {
                    if t.species == 0 || t.species > m {
                        return Err(Error::Config(format!(
                            "system.terms[{k}].species = {} outside 1..={m}",
                            t.species
                        )));
                    }
                    if t.exponents.len() != m {
                        return Err(Error::Config(format!(
                            "system.terms[{k}].exponents has {} entries for {m} species",
                            t.exponents.len()
                        )));
                    }
                    parsed.push((t.species - 1, Term::new(t.coefficient, t.exponents.clone())));
                }
                let field = PolynomialVectorField::from_terms(m, parsed).map_err(cfg_err)?;
                Ok(SystemDraft { d: d.clone(), field, weights: weights.clone(), class: None })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerSpecies {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerSpecies {
    fn expand(&self, m: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            PerSpecies::Uniform(v) => Ok(vec![*v; m]),
            PerSpecies::Each(v) if v.len() == m => Ok(v.clone()),
            PerSpecies::Each(v) => Err(Error::Config(format!("initial.{name} has {} entries for {m} species", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Constant {
        values: Vec<f64>,
    },
    /// `base_i + amplitude_i * prod_j cos(mode_j * pi * x_j / L_j)`.
    Cosine {
        base: PerSpecies,
        amplitude: PerSpecies,
        mode: Vec<u32>,
    },
    /// One snapshot file per species.
    Snapshot {
        files: Vec<PathBuf>,
    },
    /// Independent uniform values per cell and species.
    Random {
        lo: f64,
        hi: f64,
        seed: u64,
    },
}

fn nonnegative(values: &[f64], what: &str) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(Error::Config(format!(
                "{what} for species {} is {v}: initial data must be nonnegative (hypothesis (D))",
                i + 1
            )));
        }
    }
    Ok(())
}

impl InitialConfig {
    /// Builds `m` species of initial data; snapshot paths resolve against `base_dir`.
    pub fn build(&self, domain: &Arc<BoxDomain>, m: usize, base_dir: &Path) -> Result<State> {
        let fields = match self {
            InitialConfig::Constant { values } => {
                if values.len() != m {
                    return Err(Error::Config(format!("initial.values has {} entries for {m} species", values.len())));
                }
                nonnegative(values, "initial constant")?;
                values.iter().map(|c| ScalarField::constant(domain.clone(), *c)).collect()
            }
            InitialConfig::Cosine { base, amplitude, mode } => {
                let base = base.expand(m, "base")?;
                let amplitude = amplitude.expand(m, "amplitude")?;
                if mode.len() != domain.dim() {
                    return Err(Error::Config(format!(
                        "initial.mode has {} entries for n = {}",
                        mode.len(),
                        domain.dim()
                    )));
                }
                let lows: Vec<f64> = base.iter().zip(&amplitude).map(|(b, a)| b - a.abs()).collect();
                nonnegative(&lows, "minimum of the cosine profile")?;
                let lengths = domain.lengths().to_vec();
                base.iter()
                    .zip(&amplitude)
                    .map(|(&b, &a)| {
                        ScalarField::from_fn(domain.clone(), |x| {
                            let prod: f64 = x
                                .iter()
                                .zip(mode)
                                .zip(&lengths)
                                .map(|((xj, k), l)| (*k as f64 * std::f64::consts::PI * xj / l).cos())
                                .product();
                            b + a * prod
                        })
                    })
                    .collect()
            }
            InitialConfig::Snapshot { files } => {
                if files.len() != m {
                    return Err(Error::Config(format!("initial.files has {} entries for {m} species", files.len())));
                }
                let mut fields = Vec::with_capacity(m);
                for (i, f) in files.iter().enumerate() {
                    let path = base_dir.join(f);
                    if !path.is_file() {
                        return Err(Error::Config(format!("snapshot file {} does not exist", path.display())));
                    }
                    let field = load_field(&path, domain).map_err(|e| Error::Config(e.to_string()))?;
                    if !field.is_finite() || field.min_value() < 0.0 {
                        return Err(Error::Config(format!(
                            "snapshot {} for species {}: initial data must be finite and nonnegative (hypothesis (D))",
                            path.display(),
                            i + 1
                        )));
                    }
                    fields.push(field);
                }
                fields
            }
            InitialConfig::Random { lo, hi, seed } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::Config(format!("initial random range [{lo}, {hi}] is empty")));
                }
                nonnegative(&[*lo], "initial random lower bound")?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..m)
                    .map(|_| {
                        let values = (0..domain.len()).map(|_| rng.gen_range(*lo..*hi)).collect();
                        ScalarField::new(domain.clone(), values).expect("matching length")
                    })
                    .collect()
            }
        };
        State::new(fields, 0.0)
    }

    /// Spatially constant values, when the data are constant.
    pub fn constant_values(&self) -> Option<&[f64]> {
        match self {
            InitialConfig::Constant { values } => Some(values),
            _ => None,
        }
    }
}

fn default_sample_count() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default = "default_sample_count")]
    pub sample_count: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self { sample_count: default_sample_count(), seed: 0 }
    }
}

fn default_window_w() -> f64 {
    1.0
}
fn default_record_every() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    #[serde(default = "default_window_w")]
    pub window_w: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self { window_w: default_window_w(), record_every: default_record_every() }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("rdmass-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default)]
    pub emit_svg: bool,
    /// Write field snapshots at every k-th record.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: default_directory(), emit_svg: false, snapshot_every: None }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not need the filesystem.
    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        self.domain.build()?;
        let draft = self.system.build()?;
        if !(self.monitor.window_w.is_finite() && self.monitor.window_w > 0.0) {
            return Err(Error::Config(format!("monitor.window_w = {} must be positive", self.monitor.window_w)));
        }
        if self.monitor.record_every == 0 {
            return Err(Error::Config("monitor.record_every must be at least 1".into()));
        }
        if self.checks.sample_count == 0 {
            return Err(Error::Config("checks.sample_count must be at least 1".into()));
        }
        if self.output.snapshot_every == Some(0) {
            return Err(Error::Config("output.snapshot_every must be at least 1".into()));
        }
        if !matches!(self.initial, InitialConfig::Snapshot { .. }) {
            let domain = Arc::new(self.domain.build()?);
            self.initial.build(&domain, draft.m(), Path::new("."))?;
        }
        Ok(())
    }
}

/// Reads and validates a config file; snapshot files must exist.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    if let InitialConfig::Snapshot { files } = &cfg.initial {
        let base = path.parent().unwrap_or(Path::new("."));
        for f in files {
            let p = base.join(f);
            if !p.is_file() {
                return Err(Error::Config(format!("snapshot file {} does not exist", p.display())));
            }
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::Scheme;

    const MINIMAL: &str = r#"
[domain]
n = 1
L = 1.0
N = 16

[system]
kind = "reversible"
k_f = 1.0
k_b = 1.0
d = [1.0, 1.0, 1.0, 1.0]

[initial]
kind = "constant"
values = [1.0, 1.0, 0.0, 0.0]

[integrator]
dt = 1e-3
t_end = 1.0
"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.monitor.window_w, 1.0);
        assert_eq!(cfg.monitor.record_every, 10);
        assert_eq!(cfg.integrator.scheme, Scheme::ImexEuler);
        assert_eq!(cfg.integrator.cfl_safety, 0.5);
        assert!(!cfg.system.reduce_to_conservative());
    }

    #[test]
    fn zero_diffusion_cites_hypothesis() {
        let text = MINIMAL.replace("d = [1.0, 1.0, 1.0, 1.0]", "d = [1.0, 0.0, 1.0, 1.0]");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("hypothesis (D)"), "{err}");
    }

    #[test]
    fn negative_initial_data_cites_hypothesis() {
        let text = MINIMAL.replace("values = [1.0, 1.0, 0.0, 0.0]", "values = [1.0, -1.0, 0.0, 0.0]");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("hypothesis (D)") && err.contains("nonnegative"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("[integrator]", "[integrator]\nfoo = 1");
        assert!(RunConfig::parse(&text).is_err());
        let text = MINIMAL.replace("k_b = 1.0", "k_b = 1.0\nextra = 2");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = MINIMAL.replace("N = 16", "N = \"sixteen\"");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn polynomial_terms_are_one_based() {
        let text = r#"
[domain]
n = 1
L = 1.0
N = 4
[system]
kind = "polynomial"
d = [1.0, 2.0]
terms = [
  { species = 1, coefficient = -1.0, exponents = [1, 0] },
  { species = 2, coefficient = 1.0, exponents = [1, 0] },
]
[initial]
kind = "constant"
values = [1.0, 0.0]
[integrator]
dt = 1e-3
t_end = 1.0
"#;
        let cfg = RunConfig::parse(text).unwrap();
        let draft = cfg.system.build().unwrap();
        assert_eq!(draft.field.eval(&[2.0, 5.0]).unwrap(), vec![-2.0, 2.0]);
        assert!(draft.class.is_none());
        let bad = text.replace("species = 2", "species = 3");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn cosine_amplitude_must_keep_data_nonnegative() {
        let text = MINIMAL.replace(
            "kind = \"constant\"\nvalues = [1.0, 1.0, 0.0, 0.0]",
            "kind = \"cosine\"\nbase = 1.0\namplitude = 1.5\nmode = [1]",
        );
        assert!(RunConfig::parse(&text).is_err());
        let ok = text.replace("amplitude = 1.5", "amplitude = 0.5");
        let cfg = RunConfig::parse(&ok).unwrap();
        let domain = Arc::new(cfg.domain.build().unwrap());
        let s = cfg.initial.build(&domain, 4, Path::new(".")).unwrap();
        let x0 = domain.centers(0)[0];
        assert!((s.fields[0].values()[0] - (1.0 + 0.5 * (std::f64::consts::PI * x0).cos())).abs() < 1e-15);
    }

    #[test]
    fn random_initial_data_is_seeded() {
        let text = MINIMAL.replace(
            "kind = \"constant\"\nvalues = [1.0, 1.0, 0.0, 0.0]",
            "kind = \"random\"\nlo = 0.0\nhi = 2.0\nseed = 7",
        );
        let cfg = RunConfig::parse(&text).unwrap();
        let domain = Arc::new(cfg.domain.build().unwrap());
        let a = cfg.initial.build(&domain, 4, Path::new(".")).unwrap();
        let b = cfg.initial.build(&domain, 4, Path::new(".")).unwrap();
        assert_eq!(a, b);
        assert!(a.min_value() >= 0.0 && a.sup_norm() < 2.0);
        let unseeded = text.replace("seed = 7\n", "");
        assert!(RunConfig::parse(&unseeded).is_err());
    }
}
