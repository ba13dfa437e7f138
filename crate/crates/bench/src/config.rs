//! Experiment configuration in its JSON file form.

use std::fmt;
use std::path::{Path, PathBuf};

use mlea::adversaries::AdversaryKind;
use mlea::quantum::{BlochEnsemble, HamiltonianEnsemble, LossKind, MAX_QUBITS};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(rename = "T")]
    pub t: u64,
    pub l: f64,
    pub learner: LearnerChoice,
    pub scenario: Scenario,
    #[serde(default)]
    pub comparator: ComparatorPolicy,
    /// Extra random comparators tracked against their own bound every round.
    #[serde(default)]
    pub random_comparators: usize,
    /// Defaults to `0.1 l`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mistake_threshold: Option<f64>,
    #[serde(default)]
    pub check_invariants: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerChoice {
    Erfi,
    Expsq,
    MmwuMinimax,
    MmwuOracle,
    MmwuFixed { eta: f64 },
}

impl LearnerChoice {
    pub fn label(&self) -> String {
        match self {
            LearnerChoice::Erfi => "erfi".into(),
            LearnerChoice::Expsq => "expsq".into(),
            LearnerChoice::MmwuMinimax => "mmwu_minimax".into(),
            LearnerChoice::MmwuOracle => "mmwu_oracle".into(),
            LearnerChoice::MmwuFixed { eta } => format!("mmwu_fixed({eta})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    /// Linear losses `⟨G_t, X⟩` from an adversary.
    Adversary {
        kind: AdversaryKind,
        #[serde(default)]
        truth: StateSpec,
    },
    /// Learning an unknown state from observables through a convex loss.
    Quantum { state: StateSpec, observable: ObservableStrategy, loss: LossKind },
}

impl Scenario {
    pub fn label(&self) -> String {
        match self {
            Scenario::Adversary { kind, .. } => format!("adversary:{}", enum_label(kind)),
            Scenario::Quantum { observable, loss, .. } => format!("quantum:{}:{}", enum_label(observable), enum_label(loss)),
        }
    }

    pub fn truth(&self) -> &StateSpec {
        match self {
            Scenario::Adversary { truth, .. } => truth,
            Scenario::Quantum { state, .. } => state,
        }
    }
}

fn enum_label<E: Serialize>(e: &E) -> String {
    serde_json::to_value(e).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_else(|| "?".into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableStrategy {
    /// `l P` for a uniformly random non-identity Pauli string.
    RandomPauli,
    /// `l (I + P)/2`, a projector onto an eigenspace of a random Pauli string.
    RandomPauliProjector,
    /// `l sgn(ρ_t − ρ)`.
    GreedySign,
}

/// How the unknown (or comparator) state is generated.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    #[default]
    MaximallyMixed,
    /// `|i⟩⟨i|`.
    Basis { index: usize },
    HaarPure,
    /// `(1 − γ) base + γ I/d`.
    Depolarized { base: Box<StateSpec>, gamma: f64 },
    NoisyCircuit { depth: usize, gamma: f64 },
    HaarSubsystem { d_prime: usize },
    ProductState { ensemble: BlochEnsemble },
    Gibbs { hamiltonian: HamiltonianEnsemble, beta: f64 },
    /// A density matrix in the JSON matrix format.
    File { path: PathBuf },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComparatorPolicy {
    /// The scenario's target state.
    #[default]
    Truth,
    /// Uniform mass on the top `⌈d e^{−r}⌉` eigenvectors of `−Σ G_t`, chosen in hindsight.
    Topk { r: f64 },
    File { path: PathBuf },
}

/// Row-major `(re, im)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub d: usize,
    pub entries: Vec<(f64, f64)>,
}

/// A semantic error at a dotted field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: std::io::Error },
    Parse { path: String, message: String },
    Invalid(Vec<FieldError>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            ConfigError::Parse { path, message } if path.is_empty() || path == "." => write!(f, "{message}"),
            ConfigError::Parse { path, message } => write!(f, "{path}: {message}"),
            ConfigError::Invalid(errs) => {
                let lines: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
                write!(f, "invalid config: {}", lines.join("; "))
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Deserializes JSON, reporting the failing field path.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse { path: e.path().to_string(), message: e.inner().to_string() })
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })
}

/// A config file holds one experiment or a list of them.
#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<serde_json::Value>),
    One(serde_json::Value),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = parse_json(text)?;
        cfg.validate().map_err(ConfigError::Invalid)?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads and validates a config; relative file paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::from_json(&read(path)?)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Reads a file holding either one config or a JSON array of them.
    pub fn load_many(path: &Path) -> Result<Vec<Self>, ConfigError> {
        let text = read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let values = match parse_json::<OneOrMany>(&text)? {
            OneOrMany::Many(v) => v,
            OneOrMany::One(v) => vec![v],
        };
        let mut out = Vec::with_capacity(values.len());
        for (i, v) in values.into_iter().enumerate() {
            let mut cfg: Self = serde_path_to_error::deserialize(v)
                .map_err(|e| ConfigError::Parse { path: format!("[{i}].{}", e.path()), message: e.inner().to_string() })?;
            cfg.validate().map_err(|errs| {
                ConfigError::Invalid(errs.into_iter().map(|e| FieldError { path: format!("[{i}].{}", e.path), message: e.message }).collect())
            })?;
            cfg.resolve_paths(base);
            out.push(cfg);
        }
        if out.is_empty() {
            return Err(ConfigError::Invalid(vec![FieldError { path: ".".into(), message: "empty config list".into() }]));
        }
        Ok(out)
    }

    fn resolve_paths(&mut self, base: &Path) {
        fn fix(p: &mut PathBuf, base: &Path) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        fn fix_state(s: &mut StateSpec, base: &Path) {
            match s {
                StateSpec::File { path } => fix(path, base),
                StateSpec::Depolarized { base: inner, .. } => fix_state(inner, base),
                _ => {}
            }
        }
        if let ComparatorPolicy::File { path } = &mut self.comparator {
            fix(path, base);
        }
        match &mut self.scenario {
            Scenario::Adversary { truth, .. } => fix_state(truth, base),
            Scenario::Quantum { state, .. } => fix_state(state, base),
        }
    }

    /// Matrix dimension; only meaningful after validation.
    pub fn dim(&self) -> usize {
        match (self.d, self.n_qubits) {
            (Some(d), _) => d,
            (None, Some(n)) => 1 << n,
            (None, None) => 0,
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("{}/{}/d{}/T{}", self.learner.label(), self.scenario.label(), self.dim(), self.t))
    }

    pub fn mistake_threshold(&self) -> f64 {
        self.mistake_threshold.unwrap_or(0.1 * self.l)
    }

    /// Every semantic problem, each tagged with its field path.
    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errs = Vec::new();
        let mut err = |path: &str, message: String| errs.push(FieldError { path: path.into(), message });
        if self.t == 0 {
            err("T", "must be at least 1".into());
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            err("l", format!("must be positive and finite, got {}", self.l));
        }
        let d = match (self.d, self.n_qubits) {
            (Some(_), Some(_)) => {
                err("d", "give either d or n_qubits, not both".into());
                0
            }
            (None, None) => {
                err("d", "one of d or n_qubits is required".into());
                0
            }
            (Some(d), None) => {
                if d == 0 || d > 1 << MAX_QUBITS {
                    err("d", format!("must be in 1..={}", 1 << MAX_QUBITS));
                }
                d
            }
            (None, Some(n)) => {
                if n == 0 || n > MAX_QUBITS {
                    err("n_qubits", format!("must be in 1..={MAX_QUBITS}"));
                    0
                } else {
                    1 << n
                }
            }
        };
        if let LearnerChoice::MmwuFixed { eta } = self.learner {
            if !(eta >= 0.0 && eta.is_finite()) {
                err("learner.mmwu_fixed.eta", format!("must be non-negative and finite, got {eta}"));
            }
        }
        if let Some(eps) = self.mistake_threshold {
            if !(eps > 0.0) {
                err("mistake_threshold", format!("must be positive, got {eps}"));
            }
        }
        let qubits = d.is_power_of_two();
        match &self.scenario {
            Scenario::Adversary { kind, truth } => {
                if *kind == AdversaryKind::RandomPauli && d > 0 && !qubits {
                    err("scenario.kind", format!("random_pauli needs a power-of-two dimension, got {d}"));
                }
                validate_state(truth, d, "scenario.truth", &mut err);
            }
            Scenario::Quantum { state, observable, loss } => {
                if d > 0 && !qubits {
                    err("d", format!("quantum scenarios need a power-of-two dimension, got {d}"));
                }
                if *loss != LossKind::L1 && *observable != ObservableStrategy::RandomPauliProjector {
                    err("scenario.observable", format!("{} is not PSD, which {} requires", enum_label(observable), enum_label(loss)));
                }
                validate_state(state, d, "scenario.state", &mut err);
            }
        }
        match &self.comparator {
            ComparatorPolicy::Truth => {}
            ComparatorPolicy::Topk { r } => {
                if matches!(self.scenario, Scenario::Quantum { .. }) {
                    err("comparator", "topk is defined for adversary scenarios only".into());
                }
                let log_d = (d.max(1) as f64).ln();
                if !(*r >= 0.0 && *r <= log_d + 1e-12) {
                    err("comparator.r", format!("must lie in [0, log d = {log_d:.6}], got {r}"));
                }
            }
            ComparatorPolicy::File { .. } => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

fn validate_state(s: &StateSpec, d: usize, path: &str, err: &mut impl FnMut(&str, String)) {
    let qubit_only = |err: &mut dyn FnMut(&str, String)| {
        if d > 0 && !d.is_power_of_two() {
            err(&format!("{path}.kind"), format!("needs a power-of-two dimension, got {d}"));
        }
    };
    match s {
        StateSpec::MaximallyMixed | StateSpec::HaarPure | StateSpec::File { .. } => {}
        StateSpec::Basis { index } => {
            if d > 0 && *index >= d {
                err(&format!("{path}.index"), format!("must be below d = {d}"));
            }
        }
        StateSpec::Depolarized { base, gamma } => {
            if !(0.0..=1.0).contains(gamma) {
                err(&format!("{path}.gamma"), format!("must lie in [0, 1], got {gamma}"));
            }
            validate_state(base, d, &format!("{path}.base"), err);
        }
        StateSpec::NoisyCircuit { depth, gamma } => {
            qubit_only(err);
            if *depth == 0 {
                err(&format!("{path}.depth"), "must be at least 1".into());
            }
            if !(0.0..=1.0).contains(gamma) {
                err(&format!("{path}.gamma"), format!("must lie in [0, 1], got {gamma}"));
            }
        }
        StateSpec::HaarSubsystem { d_prime } => {
            if d > 0 && (*d_prime == 0 || d_prime % d != 0) {
                err(&format!("{path}.d_prime"), format!("must be a positive multiple of d = {d}, got {d_prime}"));
            }
        }
        StateSpec::ProductState { .. } => qubit_only(err),
        StateSpec::Gibbs { hamiltonian, beta } => {
            if !beta.is_finite() {
                err(&format!("{path}.beta"), format!("must be finite, got {beta}"));
            }
            match *hamiltonian {
                HamiltonianEnsemble::Gue { d: hd } if d > 0 && hd != d => {
                    err(&format!("{path}.hamiltonian.d"), format!("must equal the experiment dimension {d}, got {hd}"));
                }
                HamiltonianEnsemble::Rsps { n, j } => {
                    if d > 0 && 1usize.checked_shl(n as u32) != Some(d) {
                        err(&format!("{path}.hamiltonian.n"), format!("2^n must equal the experiment dimension {d}"));
                    }
                    if j == 0 {
                        err(&format!("{path}.hamiltonian.j"), "must be at least 1".into());
                    }
                }
                _ => {}
            }
        }
    }
}
