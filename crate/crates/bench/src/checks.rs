//! Check suites shared by `mlea verify` and the acceptance tests. Each suite
//! takes its sizes explicitly so the same code runs at quick and full scale.

use std::fmt;
use std::time::Instant;

use anyhow::Result;
use mlea::adversaries::{anticoncentration_check, topk_mean, topk_size, Adversary, AdversaryKind, AdversarySpec};
use mlea::inequality::{
    abs_counterexample, jensen_terms, monomial_conjecture_search, random_interleaving_suite, random_jensen_suite,
    JensenTerms, SpectralFunction,
};
use mlea::linalg::{Density, Hermitian};
use mlea::potentials::{check_recursion, gaussian_ensemble_decomposition, laplace_quadrature_expsq, linspace, PotentialSpec};
use mlea::quantum::{
    haar_subsystem_state, loss_and_grad, noisy_circuit_state, sample_hamiltonian, HamiltonianEnsemble, LossKind,
};
use mlea::rng::{gaussian_hermitian, sub_rng, sub_seed};
use serde::Serialize;

use crate::config::{ComparatorPolicy, ExperimentConfig, LearnerChoice, ObservableStrategy, Scenario, StateSpec};
use crate::run::{run, RunSummary};
use crate::table::{table, TableRow};

/// Jensen suites pass when every scaled gap is at least minus this.
pub const JENSEN_TOL: f64 = 1e-8;
pub const IDENTITY_RTOL: f64 = 1e-8;
pub const RECURSION_TOL: f64 = 1e-10;
pub const APPENDIX_TOL: f64 = 1e-10;
pub const HEAD_TO_HEAD_GATE: f64 = 0.75;
pub const LOWER_BOUND_C_MAX: f64 = 3.0;
pub const NOISY_SLACK: f64 = 1e-6;
pub const NORM_FRACTION: f64 = 0.95;
pub const FD_RTOL: f64 = 1e-5;
pub const INTERLEAVING_TOL: f64 = 1e-9;

/// One pass/fail line.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {} {}: {} ({:.2}s)", self.id, self.name, self.detail, self.seconds)
    }
}

/// Times `f`; an error counts as a failure with the error as detail.
pub fn timed(id: &str, name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e:#}")));
    Check { id: id.into(), name: name.into(), pass, detail, seconds: start.elapsed().as_secs_f64() }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AppendixA {
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
}

pub fn appendix_a() -> Result<AppendixA> {
    let (phi, s, g, eps) = abs_counterexample();
    let JensenTerms { lhs, rhs } = jensen_terms(&phi, &s, &g, eps)?;
    Ok(AppendixA { lhs, rhs, violated: lhs > rhs })
}

pub fn check_appendix_a() -> Result<(bool, String)> {
    let a = appendix_a()?;
    let ok = (a.lhs - 2.0 * 2f64.sqrt()).abs() <= APPENDIX_TOL && (a.rhs - 2.0).abs() <= APPENDIX_TOL && a.violated;
    let verdict = if a.violated { "VIOLATED" } else { "holds" };
    Ok((ok, format!("lhs={:?} rhs={:?} verdict {verdict}", a.lhs, a.rhs)))
}

/// The functions the one-sided inequality is claimed for, at matrix size `d`.
pub fn jensen_functions(d: usize) -> Vec<(String, SpectralFunction)> {
    let mut v = vec![
        ("affine".to_string(), SpectralFunction::Affine { a: 0.7, b: -0.3 }),
        ("x^2".to_string(), SpectralFunction::Monomial { degree: 2 }),
        ("x^4".to_string(), SpectralFunction::Monomial { degree: 4 }),
        ("exp(0.5x)".to_string(), SpectralFunction::Exp { c: 0.5 }),
        ("exp(-0.5x)".to_string(), SpectralFunction::Exp { c: -0.5 }),
    ];
    for t in [1, 4, 16] {
        v.push((format!("exp_square(t={t})"), SpectralFunction::ExpSquare { t, eps: 1.0, d }));
    }
    for t in [1, 4, 16] {
        v.push((format!("erfi(t={t})"), SpectralFunction::Erfi { t, eps: 1.0, d }));
    }
    v
}

/// `trials_per_d` pairs at each `d` in `2..=d_max` for every function, and
/// a search for an `|x|` violation at `d = 2`.
pub fn check_jensen(trials_per_d: usize, d_max: usize, abs_trials: usize, seed: u64) -> Result<(bool, String)> {
    let mut ok = true;
    let mut worst: Vec<String> = Vec::new();
    for (i, (label, _)) in jensen_functions(2).into_iter().enumerate() {
        let mut min = f64::INFINITY;
        for d in 2..=d_max {
            let phi = jensen_functions(d).swap_remove(i).1;
            let r = random_jensen_suite(&phi, d, trials_per_d, sub_seed(sub_seed(seed, i as u64), d as u64))?;
            min = min.min(r.min_scaled_gap);
        }
        ok &= min >= -JENSEN_TOL;
        worst.push(format!("{label} {min:.1e}"));
    }
    let abs = random_jensen_suite(&SpectralFunction::Abs, 2, abs_trials, sub_seed(seed, 99))?;
    let found = abs.first_violation;
    ok &= found.is_some();
    let total = trials_per_d * (d_max - 1);
    Ok((
        ok,
        format!(
            "{total} trials per function, min scaled gaps [{}]; |x| violation at trial {}",
            worst.join(", "),
            found.map_or("none".into(), |t| t.to_string())
        ),
    ))
}

/// Both integral representations of the exp-square potential against its closed form.
pub fn check_laplace_identities() -> Result<(bool, String)> {
    let p = PotentialSpec::exp_square(1.0, 4)?;
    let mut worst: f64 = 0.0;
    for t in [1u64, 2, 4, 8, 16] {
        for s in linspace(-5.0, 5.0, 21) {
            let want: f64 = p.eval(s, t)?;
            for got in [laplace_quadrature_expsq(&p, s, t)?, gaussian_ensemble_decomposition(&p, s, t)?] {
                worst = worst.max(((got - want) / want).abs());
            }
        }
    }
    Ok((worst <= IDENTITY_RTOL, format!("21x5 grid, worst relative error {worst:.2e}")))
}

pub fn check_recursions(t_max: u64, points: usize) -> Result<(bool, String)> {
    let eps = 2.0;
    let grid = linspace(-10.0 * eps, 10.0 * eps, points);
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, p) in [("exp_square", PotentialSpec::exp_square(eps, 16)?), ("erfi", PotentialSpec::erfi(eps, 16)?)] {
        let mut worst = f64::INFINITY;
        for t in 1..=t_max {
            worst = worst.min(check_recursion(&p, t, &grid)?);
        }
        ok &= worst >= -RECURSION_TOL;
        parts.push(format!("{name} min margin {worst:.2e}"));
    }
    Ok((ok, format!("t=1..{t_max}, {points}-point grid: {}", parts.join(", "))))
}

/// The erfi learner against each adversary at each dimension.
pub fn regret_suite_configs(ds: &[usize], t: u64, random_comparators: usize, seed: u64) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for &d in ds {
        for (i, kind) in [AdversaryKind::UniformDiag, AdversaryKind::GreedySign, AdversaryKind::RandomPauli].into_iter().enumerate() {
            out.push(ExperimentConfig {
                name: None,
                seed: sub_seed(seed, (d * 8 + i) as u64),
                d: Some(d),
                n_qubits: None,
                t,
                l: 1.0,
                learner: LearnerChoice::Erfi,
                scenario: Scenario::Adversary { kind, truth: StateSpec::HaarSubsystem { d_prime: 4 * d } },
                comparator: ComparatorPolicy::Truth,
                random_comparators,
                mistake_threshold: None,
                check_invariants: true,
            });
        }
    }
    out
}

pub fn run_all(configs: &[ExperimentConfig]) -> Result<Vec<RunSummary>> {
    configs.iter().map(|c| Ok(run(c)?.summary)).collect()
}

pub fn check_regret_bounds(runs: &[RunSummary]) -> (bool, String) {
    let ok = !runs.is_empty() && runs.iter().all(|r| r.within_bound());
    let parts: Vec<String> = runs
        .iter()
        .map(|r| {
            let hind = r.hindsight.iter().map(|h| h.regret / h.bound.unwrap_or(f64::NAN)).fold(f64::NEG_INFINITY, f64::max);
            format!(
                "{} d={}: reg/bound {:.3}, worst random excess {:.1}, worst topk reg/bound {:.3}",
                r.scenario,
                r.d,
                r.final_regret / r.bound.unwrap_or(f64::NAN),
                r.worst_random_excess.unwrap_or(f64::NAN),
                hind
            )
        })
        .collect();
    (ok, parts.join("; "))
}

pub fn check_invariants(runs: &[RunSummary]) -> (bool, String) {
    let mut ok = !runs.is_empty();
    let (mut jensen, mut tele, mut norm, mut exact, mut sampled) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::INFINITY);
    let mut rounds = 0;
    for r in runs {
        match &r.invariants {
            Some(rep) => {
                ok &= rep.all_hold();
                jensen = jensen.min(rep.worst_jensen);
                tele = tele.min(rep.worst_telescoping);
                norm = norm.max(rep.worst_norm_excess);
                exact = exact.min(rep.worst_comparator_exact);
                sampled = sampled.min(rep.worst_comparator_sampled);
                rounds += rep.rounds;
            }
            None => ok = false,
        }
    }
    (
        ok,
        format!(
            "{rounds} rounds: jensen {jensen:.2e}, telescoping {tele:.2e}, norm excess {norm:.2e}, comparator clause exact {exact:.2e} sampled {sampled:.2e}"
        ),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct HeadToHead {
    pub erfi: Vec<f64>,
    pub mmwu: Vec<f64>,
    pub erfi_median: f64,
    pub mmwu_median: f64,
}

impl HeadToHead {
    pub fn gate(&self) -> bool {
        self.erfi_median <= HEAD_TO_HEAD_GATE * self.mmwu_median
    }

    /// Both learners incurred no regret at all.
    pub fn degenerate(&self) -> bool {
        self.erfi.iter().chain(&self.mmwu).all(|r| r.abs() < 1e-12)
    }
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Final regrets of erfi and minimax MMWU against greedy-sign losses aimed at `truth`.
pub fn head_to_head(d: usize, t: u64, seeds: u64, truth: StateSpec, seed: u64) -> Result<HeadToHead> {
    let mut erfi = Vec::new();
    let mut mmwu = Vec::new();
    for i in 0..seeds {
        for (learner, out) in [(LearnerChoice::Erfi, &mut erfi), (LearnerChoice::MmwuMinimax, &mut mmwu)] {
            let cfg = ExperimentConfig {
                name: None,
                seed: sub_seed(seed, i),
                d: Some(d),
                n_qubits: None,
                t,
                l: 1.0,
                learner,
                scenario: Scenario::Adversary { kind: AdversaryKind::GreedySign, truth: truth.clone() },
                comparator: ComparatorPolicy::Truth,
                random_comparators: 0,
                mistake_threshold: None,
                check_invariants: false,
            };
            out.push(run(&cfg)?.summary.final_regret);
        }
    }
    let (erfi_median, mmwu_median) = (median(&erfi), median(&mmwu));
    Ok(HeadToHead { erfi, mmwu, erfi_median, mmwu_median })
}

pub fn check_head_to_head(h: &HeadToHead) -> (bool, String) {
    let note = if h.degenerate() { " (every loss is zero, so both regrets vanish)" } else { "" };
    (
        h.gate(),
        format!("median erfi {:.4} vs mmwu_minimax {:.4}, gate {HEAD_TO_HEAD_GATE}x{note}", h.erfi_median, h.mmwu_median),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundRow {
    pub r: f64,
    pub k: usize,
    pub mean_payoff: f64,
    pub std_error: f64,
    /// `√(2r) − payoff / √(T/3)`.
    pub c_emp: f64,
}

/// Expected payoff of the hindsight top-k comparator under iid uniform diagonal losses.
///
/// The learner's expected loss is zero against these losses, so the payoff
/// is the expected regret of any learner.
pub fn lower_bound_rows(d: usize, t: u64, rs: &[f64], seeds: u64, seed: u64) -> Result<Vec<LowerBoundRow>> {
    let mut payoffs = vec![Vec::new(); rs.len()];
    let x = Density::maximally_mixed(d);
    for i in 0..seeds {
        let mut adv = Adversary::new(AdversarySpec { kind: AdversaryKind::UniformDiag, l: 1.0, seed: sub_seed(seed, i) }, d)?;
        let mut y = vec![0.0; d];
        for _ in 0..t {
            let g = adv.next_loss(&x, None)?;
            for (k, yk) in y.iter_mut().enumerate() {
                *yk -= g.entry(k, k).re;
            }
        }
        for (j, &r) in rs.iter().enumerate() {
            payoffs[j].push(topk_mean(&y, topk_size(d, r)?));
        }
    }
    let scale = (t as f64 / 3.0).sqrt();
    rs.iter()
        .zip(payoffs)
        .map(|(&r, p)| {
            let n = p.len() as f64;
            let mean = p.iter().sum::<f64>() / n;
            let var = p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            Ok(LowerBoundRow { r, k: topk_size(d, r)?, mean_payoff: mean, std_error: (var / n).sqrt(), c_emp: (2.0 * r).sqrt() - mean / scale })
        })
        .collect()
}

pub fn check_lower_bound(rows: &[LowerBoundRow], t: u64) -> (bool, String) {
    let ok = rows.iter().all(|r| r.c_emp <= LOWER_BOUND_C_MAX);
    let scale = (t as f64 / 3.0).sqrt();
    let parts: Vec<String> = rows
        .iter()
        .map(|r| format!("r={} k={}: payoff {:.2} ≥ √(T/3)(√(2r) − C_emp) with C_emp {:.3}", r.r, r.k, r.mean_payoff, r.c_emp))
        .collect();
    (ok, format!("√(T/3)={scale:.2}; {}", parts.join("; ")))
}

pub fn check_anticoncentration(d: usize, k: usize, trials: usize, seed: u64) -> Result<(bool, String)> {
    let n = mlea::adversaries::anticoncentration_min_n(d);
    let a = anticoncentration_check(d, n, k, trials, seed)?;
    Ok((
        a.pass,
        format!(
            "d={d} n={n} k={k}: empirical {:.2} ± {:.2} vs bound {:.2}, coordinate mean {:.3}",
            a.empirical, a.std_error, a.bound, a.coordinate_mean
        ),
    ))
}

/// Erfi learner learning `(1 − γ)|ψ⟩⟨ψ| + γ I/d` from random Pauli observables under the l1 loss.
pub fn depolarization_configs(n_qubits: usize, t: u64, gammas: &[f64], seed: u64) -> Vec<ExperimentConfig> {
    gammas
        .iter()
        .map(|&gamma| ExperimentConfig {
            name: Some(format!("depolarized gamma={gamma}")),
            seed,
            d: None,
            n_qubits: Some(n_qubits),
            t,
            l: 1.0,
            learner: LearnerChoice::Erfi,
            scenario: Scenario::Quantum {
                state: StateSpec::Depolarized { base: Box::new(StateSpec::HaarPure), gamma },
                observable: ObservableStrategy::RandomPauli,
                loss: LossKind::L1,
            },
            comparator: ComparatorPolicy::Truth,
            random_comparators: 0,
            mistake_threshold: None,
            check_invariants: false,
        })
        .collect()
}

/// Regret against the truth should fall as the state approaches `I/d`.
pub fn check_depolarization(n_qubits: usize, t: u64, seeds: u64, seed: u64) -> Result<(bool, String, Vec<TableRow>)> {
    let gammas = [0.0, 0.3, 0.6, 0.9];
    let mut mean = vec![0.0; gammas.len()];
    let mut rows = Vec::new();
    for i in 0..seeds {
        let (r, _) = table(&depolarization_configs(n_qubits, t, &gammas, sub_seed(seed, i)))?;
        for (m, row) in mean.iter_mut().zip(&r) {
            *m += row.final_regret / seeds as f64;
        }
        rows.extend(r);
    }
    let ok = mean.windows(2).all(|w| w[1] < w[0]);
    let parts: Vec<String> = gammas.iter().zip(&mean).map(|(g, m)| format!("γ={g}: {m:.2}")).collect();
    Ok((ok, format!("mean regret over {seeds} seeds, n={n_qubits} T={t}: {}", parts.join(", ")), rows))
}

/// Gibbs states of one GUE Hamiltonian at increasing β.
pub fn gibbs_configs(d: usize, t: u64, betas: &[f64], seed: u64) -> Vec<ExperimentConfig> {
    betas
        .iter()
        .map(|&beta| ExperimentConfig {
            name: Some(format!("gibbs beta={beta}")),
            seed,
            d: Some(d),
            n_qubits: None,
            t,
            l: 1.0,
            learner: LearnerChoice::Erfi,
            scenario: Scenario::Quantum {
                state: StateSpec::Gibbs { hamiltonian: HamiltonianEnsemble::Gue { d }, beta },
                observable: ObservableStrategy::RandomPauli,
                loss: LossKind::L1,
            },
            comparator: ComparatorPolicy::Truth,
            random_comparators: 0,
            mistake_threshold: None,
            check_invariants: false,
        })
        .collect()
}

pub fn check_gibbs_sweep(d: usize, t: u64, seed: u64) -> Result<(bool, String)> {
    let betas = [0.0, 0.5, 1.0, 2.0, 4.0];
    let (rows, _) = table(&gibbs_configs(d, t, &betas, seed))?;
    let s: Vec<f64> = rows.iter().map(|r| r.s_rel).collect();
    let ok = s.windows(2).all(|w| w[1] > w[0]);
    let parts: Vec<String> = betas.iter().zip(&s).map(|(b, v)| format!("β={b}: {v:.4}")).collect();
    Ok((ok, format!("measured S_rel {}", parts.join(", "))))
}

pub fn check_noisy_circuits(n: usize, depths: &[usize], gammas: &[f64], seeds: u64, seed: u64) -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    for &depth in depths {
        for &gamma in gammas {
            let bound = (1.0 - gamma).powi(2 * depth as i32) * n as f64 * 2f64.ln() + NOISY_SLACK;
            for i in 0..seeds {
                let rho = noisy_circuit_state(n, depth, gamma, sub_seed(seed, i * 1000 + depth as u64))?;
                worst = worst.max(rho.relative_entropy_vs_mixed()? - bound);
            }
        }
    }
    Ok((worst <= 0.0, format!("n={n}, D∈{depths:?}, γ∈{gammas:?}, {seeds} seeds: max S_rel − bound = {worst:.3e}")))
}

pub fn check_page_scaling(d: usize, d_prime: usize, seeds: u64, seed: u64) -> Result<(bool, String)> {
    let mut total = 0.0;
    for i in 0..seeds {
        total += haar_subsystem_state(d, d_prime, sub_seed(seed, i))?.relative_entropy_vs_mixed()?;
    }
    let mean = total / seeds as f64;
    let scale = d as f64 / d_prime as f64;
    let ok = mean >= scale / 3.0 && mean <= 3.0 * scale;
    Ok((ok, format!("d={d} d'={d_prime}: mean log d − S = {mean:.3e}, d/d' = {scale:.3e}, ratio {:.3}", mean / scale)))
}

pub fn check_hamiltonian_norms(seeds: u64, seed: u64) -> Result<(bool, String)> {
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, ens) in [("GUE d=64", HamiltonianEnsemble::Gue { d: 64 }), ("RSPS n=6 J=216", HamiltonianEnsemble::Rsps { n: 6, j: 216 })] {
        let mut inside = 0;
        for i in 0..seeds {
            if sample_hamiltonian(ens, sub_seed(seed, i))?.h.op_norm()? <= 3.0 {
                inside += 1;
            }
        }
        let frac = inside as f64 / seeds as f64;
        ok &= frac >= NORM_FRACTION;
        parts.push(format!("{label}: {frac:.3} of {seeds} seeds within ‖H‖ ≤ 3"));
    }
    Ok((ok, parts.join(", ")))
}

/// Largest relative gap between `⟨∇ℓ, Δ⟩` and a central difference, over all loss kinds.
pub fn check_gradients(n_qubits: usize, directions: usize, seed: u64) -> Result<(bool, String)> {
    let mut rng = sub_rng(seed, 0);
    let rho = noisy_circuit_state(n_qubits, 2, 0.2, sub_seed(seed, 1))?;
    let truth = noisy_circuit_state(n_qubits, 2, 0.3, sub_seed(seed, 2))?;
    let d = rho.dim();
    let a = gaussian_hermitian::<f64>(d, &mut rng);
    let o = a.sandwich(&Hermitian::identity(d));
    let o = o.scale(1.0 / o.op_norm()?);
    let h = 1e-5;
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in [LossKind::L1, LossKind::VirtualCooling, LossKind::Renyi2] {
        let (_, grad) = loss_and_grad(kind, &o, &rho, Some(&truth))?;
        let mut worst: f64 = 0.0;
        for _ in 0..directions {
            let dir = gaussian_hermitian::<f64>(d, &mut rng);
            let plus = kind.value(&o, &rho.as_hermitian().add_scaled(h, &dir), Some(&truth))?;
            let minus = kind.value(&o, &rho.as_hermitian().add_scaled(-h, &dir), Some(&truth))?;
            let fd = (plus - minus) / (2.0 * h);
            let an = grad.inner(&dir)?;
            worst = worst.max((fd - an).abs() / an.abs().max(1e-3));
        }
        ok &= worst <= FD_RTOL;
        parts.push(format!("{kind:?} {worst:.1e}"));
    }
    Ok((ok, format!("{directions} directions at d={d}: worst relative error {}", parts.join(", "))))
}

pub fn check_monomial_search(trials_per_k: usize, d_max: usize, seed: u64) -> Result<(bool, String)> {
    let rows = monomial_conjecture_search(&[3, 4, 5], trials_per_k, d_max, seed)?;
    let ok = rows.iter().all(|r| r.flagged.is_empty());
    let parts: Vec<String> = rows
        .iter()
        .map(|r| format!("x^{}: min scaled gap {:.2e}, {} flagged, {} cleared", 2 * r.k, r.min_scaled_gap, r.flagged.len(), r.cleared))
        .collect();
    Ok((ok, format!("{trials_per_k} trials per k at d ≤ {d_max}: {}", parts.join("; "))))
}

pub fn check_interleaving(trials: usize, seed: u64) -> Result<(bool, String)> {
    let r = random_interleaving_suite(4, 5, trials, seed)?;
    Ok((r.min_scaled_gap >= -INTERLEAVING_TOL, format!("{trials} random words: min scaled gap {:.2e}", r.min_scaled_gap)))
}

/// Runs every config twice and compares the CSV bytes.
pub fn check_determinism(configs: &[ExperimentConfig]) -> Result<(bool, String)> {
    let mut ok = true;
    let mut bytes = 0;
    for c in configs {
        let a = run(c)?.trace.to_csv();
        let b = run(c)?.trace.to_csv();
        ok &= a == b;
        bytes += a.len();
    }
    let (_, t1) = table(configs)?;
    let (_, t2) = table(configs)?;
    ok &= t1 == t2;
    Ok((ok, format!("{} configs, {bytes} trace bytes and the comparison table reproduced", configs.len())))
}
