//! Deterministic execution of one experiment.

use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use mlea::adversaries::{topk_size, Adversary, AdversarySpec};
use mlea::learners::{
    InvariantReport, InvariantTolerances, LeaLearner, LearningRate, MatrixLearner, MmwuLearner, RegretRecord, RegretTrace,
};
use mlea::linalg::{Density, Hermitian};
use mlea::potentials::{regret_bound_with_sum, BoundKind, PotentialFamily};
use mlea::quantum::{
    gibbs_state, haar_subsystem_state, loss_and_grad, noisy_circuit_state, pauli_second_moment, qubit_count,
    random_product_state, sample_hamiltonian, PauliString,
};
use mlea::rng::{haar_unitary, haar_vector, normal, sub_rng, sub_seed, Rng64};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ComparatorPolicy, ExperimentConfig, LearnerChoice, MatrixFile, ObservableStrategy, Scenario, StateSpec};

const STREAM_ADVERSARY: u64 = 1;
const STREAM_STATE: u64 = 2;
const STREAM_COMPARATORS: u64 = 3;
const STREAM_MONITOR: u64 = 4;
const STREAM_OBSERVABLES: u64 = 5;

/// Slack allowed when comparing a measured regret with its bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// Regret against the uniform mixture of the `k` lowest eigenvectors of `Σ G_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HindsightRow {
    pub k: usize,
    pub s_rel: f64,
    pub regret: f64,
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub learner: String,
    pub scenario: String,
    pub d: usize,
    #[serde(rename = "T")]
    pub t: u64,
    pub l: f64,
    /// Bound on the operator norm of what the learner is fed.
    pub loss_bound: f64,
    pub seed: u64,
    pub truth_s_rel: f64,
    pub comparator_s_rel: f64,
    pub final_regret: f64,
    pub bound: Option<f64>,
    /// `bound / final_regret`, absent when the regret is not positive.
    pub bound_ratio: Option<f64>,
    /// `max_t (Reg_t − bound_t)`.
    pub worst_prefix_excess: Option<f64>,
    pub mistake_threshold: f64,
    pub mistakes: u64,
    /// Regret against the best fixed state in hindsight (linear losses only).
    pub max_regret: Option<f64>,
    pub random_comparators: usize,
    /// `max` over random comparators and rounds of `Reg_t(X) − bound_t(S_rel(X))`.
    pub worst_random_excess: Option<f64>,
    pub hindsight: Vec<HindsightRow>,
    /// Operator norm of the per-qubit Pauli second-moment matrix for product states.
    pub pauli_moment_norm: Option<f64>,
    pub invariants: Option<InvariantReport>,
    pub wall_time_s: f64,
}

impl RunSummary {
    /// Every asserted regret bound held at every prefix.
    pub fn within_bound(&self) -> bool {
        self.worst_prefix_excess.is_none_or(|e| e <= BOUND_SLACK)
            && self.worst_random_excess.is_none_or(|e| e <= BOUND_SLACK)
            && self.hindsight.iter().all(|h| h.bound.is_none_or(|b| h.regret <= b + BOUND_SLACK))
    }

    pub fn invariants_hold(&self) -> bool {
        self.invariants.as_ref().is_none_or(|r| r.all_hold())
    }

    pub fn passed(&self) -> bool {
        self.within_bound() && self.invariants_hold()
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace: RegretTrace,
    pub summary: RunSummary,
}

/// A validated state together with what was measured while building it.
#[derive(Clone, Debug)]
pub struct BuiltState {
    pub state: Density<f64>,
    pub pauli_moment_norm: Option<f64>,
}

pub fn build_state(spec: &StateSpec, d: usize, seed: u64) -> Result<BuiltState> {
    let plain = |state| Ok(BuiltState { state, pauli_moment_norm: None });
    match spec {
        StateSpec::MaximallyMixed => plain(Density::maximally_mixed(d)),
        StateSpec::Basis { index } => {
            let mut w = vec![0.0; d];
            *w.get_mut(*index).ok_or_else(|| anyhow!("basis index {index} out of range for d = {d}"))? = 1.0;
            plain(Density::diag(&w)?)
        }
        StateSpec::HaarPure => plain(Density::pure(&haar_vector::<f64>(d, &mut mlea::rng::rng_from_seed(seed)))?),
        StateSpec::Depolarized { base, gamma } => {
            let b = build_state(base, d, seed)?;
            Ok(BuiltState { state: b.state.depolarize(*gamma)?, pauli_moment_norm: b.pauli_moment_norm })
        }
        StateSpec::NoisyCircuit { depth, gamma } => plain(noisy_circuit_state(qubit_count(d)?, *depth, *gamma, seed)?),
        StateSpec::HaarSubsystem { d_prime } => plain(haar_subsystem_state(d, *d_prime, seed)?),
        StateSpec::ProductState { ensemble } => {
            let (state, blochs) = random_product_state(qubit_count(d)?, ensemble, seed)?;
            let m = pauli_second_moment(&blochs);
            let rows: Vec<&[f64]> = m.iter().map(|r| r.as_slice()).collect();
            let norm = Hermitian::from_real_rows(&rows)?.op_norm()?;
            Ok(BuiltState { state, pauli_moment_norm: Some(norm) })
        }
        StateSpec::Gibbs { hamiltonian, beta } => plain(gibbs_state(&sample_hamiltonian(*hamiltonian, seed)?.h, *beta)?),
        StateSpec::File { path } => plain(read_density(path, d)?),
    }
}

pub fn read_density(path: &std::path::Path, d: usize) -> Result<Density<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m: MatrixFile = crate::config::parse_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    if m.d != d {
        bail!("{} holds a {}x{} matrix, expected d = {d}", path.display(), m.d, m.d);
    }
    Ok(Density::new(Hermitian::from_pairs(m.d, &m.entries)?)?)
}

pub fn write_matrix(path: &std::path::Path, h: &Hermitian<f64>) -> Result<()> {
    let m = MatrixFile { d: h.dim(), entries: h.to_pairs() };
    std::fs::write(path, serde_json::to_string_pretty(&m)?).with_context(|| format!("writing {}", path.display()))
}

/// Half Haar-random pure states, half `U diag(p) U†` with `p ∝ exp(−β z)`,
/// `z` standard normal and `β ~ Uniform(0, 3)`.
pub fn random_comparator(d: usize, rng: &mut Rng64) -> Result<Density<f64>> {
    if rng.random::<bool>() {
        Ok(Density::pure(&haar_vector::<f64>(d, rng))?)
    } else {
        let beta = 3.0 * rng.random::<f64>();
        let w: Vec<f64> = (0..d).map(|_| (-beta * normal(rng)).exp()).collect();
        let total: f64 = w.iter().sum();
        let h = Hermitian::diag(&w.iter().map(|x| x / total).collect::<Vec<_>>());
        Ok(Density::new(h.conjugate_by(&haar_unitary::<f64>(d, rng)))?)
    }
}

enum Learner {
    Lea(Box<LeaLearner<f64>>),
    Mmwu(MmwuLearner<f64>),
}

impl Learner {
    fn new(cfg: &ExperimentConfig, loss_bound: f64, oracle_s_rel: f64, monitor: bool) -> Result<Self> {
        let d = cfg.dim();
        let lea = |family| -> Result<Self> {
            let mut l = LeaLearner::new(family, loss_bound, d)?;
            if monitor {
                l = l.with_invariants(InvariantTolerances::default(), sub_seed(cfg.seed, STREAM_MONITOR));
            }
            Ok(Learner::Lea(Box::new(l)))
        };
        let mmwu = |rate| -> Result<Self> { Ok(Learner::Mmwu(MmwuLearner::new(loss_bound, d, rate)?)) };
        match cfg.learner {
            LearnerChoice::Erfi => lea(PotentialFamily::Erfi),
            LearnerChoice::Expsq => lea(PotentialFamily::ExpSquare),
            LearnerChoice::MmwuMinimax => mmwu(LearningRate::Minimax),
            LearnerChoice::MmwuOracle => mmwu(LearningRate::Oracle { s_rel: oracle_s_rel }),
            LearnerChoice::MmwuFixed { eta } => mmwu(LearningRate::Fixed { eta }),
        }
    }

    fn as_dyn(&mut self) -> &mut dyn MatrixLearner<f64> {
        match self {
            Learner::Lea(l) => l.as_mut(),
            Learner::Mmwu(m) => m,
        }
    }

    fn invariant_report(&self) -> Option<InvariantReport> {
        match self {
            Learner::Lea(l) => l.invariant_report().cloned(),
            Learner::Mmwu(_) => None,
        }
    }
}

/// Which closed-form bound applies to a learner, and whether it holds for
/// every comparator or only the one the learner was tuned for.
fn bound_kind(choice: LearnerChoice) -> Option<(BoundKind, bool)> {
    match choice {
        LearnerChoice::Erfi => Some((BoundKind::ErfiMain, true)),
        LearnerChoice::Expsq => Some((BoundKind::Expsq, true)),
        LearnerChoice::MmwuMinimax => Some((BoundKind::MmwuMinimax, true)),
        LearnerChoice::MmwuOracle => Some((BoundKind::MmwuOracle, false)),
        LearnerChoice::MmwuFixed { .. } => None,
    }
}

fn loss_bound(cfg: &ExperimentConfig) -> f64 {
    match &cfg.scenario {
        Scenario::Adversary { .. } => cfg.l,
        Scenario::Quantum { loss, .. } => loss.gradient_bound(cfg.l),
    }
}

struct Pass {
    trace: RegretTrace,
    cumulative: Option<Hermitian<f64>>,
    learner_loss: f64,
    mistakes: u64,
    worst_prefix_excess: Option<f64>,
    worst_random_excess: Option<f64>,
    invariants: Option<InvariantReport>,
}

struct Setup<'a> {
    cfg: &'a ExperimentConfig,
    truth: &'a Density<f64>,
    comparator: Option<&'a Density<f64>>,
    comparator_s_rel: f64,
    random: &'a [(Density<f64>, f64)],
    monitor: bool,
}

fn execute(s: &Setup) -> Result<Pass> {
    let cfg = s.cfg;
    let d = cfg.dim();
    let lb = loss_bound(cfg);
    let kind = bound_kind(cfg.learner);
    let mut learner = Learner::new(cfg, lb, s.comparator_s_rel, s.monitor)?;
    let eps = cfg.mistake_threshold();

    let mut adversary = match &cfg.scenario {
        Scenario::Adversary { kind, .. } => {
            Some(Adversary::new(AdversarySpec { kind: *kind, l: cfg.l, seed: sub_seed(cfg.seed, STREAM_ADVERSARY) }, d)?)
        }
        Scenario::Quantum { .. } => None,
    };
    let mut obs_rng = sub_rng(cfg.seed, STREAM_OBSERVABLES);
    let n_qubits = if adversary.is_none() { qubit_count(d)? } else { 0 };

    let mut cumulative = adversary.as_ref().map(|_| Hermitian::zeros(d));
    let mut trace = RegretTrace { records: Vec::with_capacity(cfg.t as usize) };
    let (mut learner_loss, mut comp_loss, mut mistakes) = (0.0, 0.0, 0u64);
    let mut random_loss = vec![0.0; s.random.len()];
    let mut worst_prefix: Option<f64> = None;
    let mut worst_random: Option<f64> = None;
    let mut inv_sqrt_sum = 0.0;
    let log_d = (d as f64).ln();

    for t in 1..=cfg.t {
        let learner = learner.as_dyn();
        let x = learner.predict()?;
        // per-round: loss of the learner, loss of any fixed state, and what the learner is fed
        let (loss, truth_loss, fed, value): (f64, f64, Hermitian<f64>, Box<dyn Fn(&Density<f64>) -> Result<f64>>) =
            match (&cfg.scenario, adversary.as_mut()) {
                (Scenario::Adversary { .. }, Some(adv)) => {
                    let g = adv.next_loss(&x, Some(s.truth))?;
                    let loss = g.inner(x.as_hermitian())?;
                    let truth_loss = g.inner(s.truth.as_hermitian())?;
                    let g2 = g.clone();
                    (loss, truth_loss, g, Box::new(move |c: &Density<f64>| Ok(g2.inner(c.as_hermitian())?)))
                }
                (Scenario::Quantum { observable, loss: lk, .. }, None) => {
                    let o = observable_for(*observable, cfg.l, n_qubits, &x, s.truth, &mut obs_rng)?;
                    let (loss, grad) = loss_and_grad(*lk, &o, &x, Some(s.truth))?;
                    let truth_loss = lk.value(&o, s.truth.as_hermitian(), Some(s.truth))?;
                    let (lk, truth) = (*lk, s.truth.clone());
                    (loss, truth_loss, grad, Box::new(move |c: &Density<f64>| Ok(lk.value(&o, c.as_hermitian(), Some(&truth))?)))
                }
                _ => unreachable!("adversary exists exactly for adversary scenarios"),
            };
        learner_loss += loss;
        if (loss - truth_loss).abs() >= eps {
            mistakes += 1;
        }
        if let Some(c) = s.comparator {
            comp_loss += value(c)?;
        }
        inv_sqrt_sum += 1.0 / (t as f64).sqrt();
        let bound_at = |s_rel: f64| -> Result<f64> { Ok(regret_bound_with_sum(kind.expect("checked").0, t, lb, d, s_rel.min(log_d), inv_sqrt_sum)?) };
        for (acc, (c, _)) in random_loss.iter_mut().zip(s.random) {
            *acc += value(c)?;
        }
        if let Some((_, universal)) = kind {
            if universal {
                for (acc, (_, s_rel)) in random_loss.iter().zip(s.random) {
                    let e = learner_loss - acc - bound_at(*s_rel)?;
                    worst_random = Some(worst_random.map_or(e, |w: f64| w.max(e)));
                }
            }
        }
        let bound = match kind {
            Some(_) if s.comparator.is_some() => bound_at(s.comparator_s_rel)?,
            _ => f64::NAN,
        };
        let cum_regret = learner_loss - comp_loss;
        if bound.is_finite() {
            let e = cum_regret - bound;
            worst_prefix = Some(worst_prefix.map_or(e, |w: f64| w.max(e)));
        }
        trace.push(RegretRecord { t, loss, cum_regret, bound });
        if let Some(cum) = cumulative.as_mut() {
            *cum = &*cum + &fed;
        }
        learner.observe(&fed).with_context(|| format!("round {t}"))?;
    }
    Ok(Pass {
        trace,
        cumulative,
        learner_loss,
        mistakes,
        worst_prefix_excess: worst_prefix,
        worst_random_excess: worst_random,
        invariants: learner.invariant_report(),
    })
}

fn observable_for(
    strategy: ObservableStrategy,
    l: f64,
    n: usize,
    x: &Density<f64>,
    truth: &Density<f64>,
    rng: &mut Rng64,
) -> Result<Hermitian<f64>> {
    Ok(match strategy {
        ObservableStrategy::RandomPauli => PauliString::random_nontrivial(n, rng).scaled_hermitian(l),
        ObservableStrategy::RandomPauliProjector => PauliString::random_nontrivial(n, rng).scaled_hermitian(0.5 * l).shift(0.5 * l),
        ObservableStrategy::GreedySign => (x.as_hermitian() - truth.as_hermitian()).sign(mlea::adversaries::SIGN_TOL)?.scale(l),
    })
}

/// Uniform mixture of the `k` lowest eigenvectors of `Σ G_t`.
fn lowest_k_mixture(cum: &Hermitian<f64>, k: usize) -> Result<Density<f64>> {
    let e = cum.eig()?;
    let w: Vec<f64> = (0..e.dim()).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
    Ok(Density::from_spectrum(e, &w)?)
}

/// Runs `cfg` twice when the comparator is chosen in hindsight; the second pass
/// replays the same losses because every source of randomness is seeded.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate().map_err(|e| anyhow!(crate::config::ConfigError::Invalid(e)))?;
    let start = Instant::now();
    let d = cfg.dim();
    let lb = loss_bound(cfg);
    let built = build_state(cfg.scenario.truth(), d, sub_seed(cfg.seed, STREAM_STATE))?;
    let truth = built.state;
    let truth_s_rel = truth.relative_entropy_vs_mixed()?;

    let mut rng = sub_rng(cfg.seed, STREAM_COMPARATORS);
    let random: Vec<(Density<f64>, f64)> = (0..cfg.random_comparators)
        .map(|_| {
            let c = random_comparator(d, &mut rng)?;
            let s = c.relative_entropy_vs_mixed()?;
            Ok((c, s))
        })
        .collect::<Result<_>>()?;

    let (comparator, comparator_s_rel) = match &cfg.comparator {
        ComparatorPolicy::Truth => (truth.clone(), truth_s_rel),
        ComparatorPolicy::File { path } => {
            let c = read_density(path, d)?;
            let s = c.relative_entropy_vs_mixed()?;
            (c, s)
        }
        ComparatorPolicy::Topk { r } => {
            let k = topk_size(d, *r)?;
            let s_rel = (d as f64 / k as f64).ln();
            let first = execute(&Setup { cfg, truth: &truth, comparator: None, comparator_s_rel: s_rel, random: &[], monitor: false })?;
            let cum = first.cumulative.expect("adversary scenario");
            (lowest_k_mixture(&cum, k)?, s_rel)
        }
    };
    let pass = execute(&Setup {
        cfg,
        truth: &truth,
        comparator: Some(&comparator),
        comparator_s_rel,
        random: &random,
        monitor: cfg.check_invariants,
    })?;

    let kind = bound_kind(cfg.learner);
    let t = cfg.t;
    let isum = mlea::potentials::inverse_sqrt_sum(t);
    let bound = match kind {
        Some((k, _)) => Some(regret_bound_with_sum(k, t, lb, d, comparator_s_rel.min((d as f64).ln()), isum)?),
        None => None,
    };
    let final_regret = pass.trace.final_regret();
    let mut hindsight = Vec::new();
    let mut max_regret = None;
    if let Some(cum) = &pass.cumulative {
        let vals = cum.eigenvalues()?;
        max_regret = Some(pass.learner_loss - vals[0]);
        let mut k = 1;
        loop {
            let mean = vals[..k].iter().sum::<f64>() / k as f64;
            let s_rel = (d as f64 / k as f64).ln();
            let b = match kind {
                Some((bk, true)) => Some(regret_bound_with_sum(bk, t, lb, d, s_rel, isum)?),
                _ => None,
            };
            hindsight.push(HindsightRow { k, s_rel, regret: pass.learner_loss - mean, bound: b });
            if k == d {
                break;
            }
            k = (2 * k).min(d);
        }
    }
    let summary = RunSummary {
        name: cfg.label(),
        learner: cfg.learner.label(),
        scenario: cfg.scenario.label(),
        d,
        t,
        l: cfg.l,
        loss_bound: lb,
        seed: cfg.seed,
        truth_s_rel,
        comparator_s_rel,
        final_regret,
        bound,
        bound_ratio: bound.filter(|_| final_regret > 0.0).map(|b| b / final_regret),
        worst_prefix_excess: pass.worst_prefix_excess,
        mistake_threshold: cfg.mistake_threshold(),
        mistakes: pass.mistakes,
        max_regret,
        random_comparators: random.len(),
        worst_random_excess: pass.worst_random_excess,
        hindsight,
        pauli_moment_norm: built.pauli_moment_norm,
        invariants: pass.invariants,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { trace: pass.trace, summary })
}
