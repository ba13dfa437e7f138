use std::path::PathBuf;

use mlea::adversaries::AdversaryKind;
use mlea::learners::CSV_HEADER;
use mlea::linalg::Density;
use mlea::quantum::LossKind;
use mlea_bench::checks;
use mlea_bench::config::{ComparatorPolicy, ConfigError, ExperimentConfig, LearnerChoice, ObservableStrategy, Scenario, StateSpec};
use mlea_bench::run::{run, write_matrix};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn adversary(learner: LearnerChoice, kind: AdversaryKind, truth: StateSpec, d: usize, t: u64) -> ExperimentConfig {
    ExperimentConfig {
        name: None,
        seed: 17,
        d: Some(d),
        n_qubits: None,
        t,
        l: 1.0,
        learner,
        scenario: Scenario::Adversary { kind, truth },
        comparator: ComparatorPolicy::Truth,
        random_comparators: 0,
        mistake_threshold: None,
        check_invariants: false,
    }
}

#[test]
fn shipped_configs_round_trip() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        for cfg in ExperimentConfig::load_many(&path).unwrap() {
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg, "{}", path.display());
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn unknown_keys_are_errors() {
    let text = r#"{"seed":1,"d":4,"T":5,"l":1,"learner":"erfi","scenario":{"type":"adversary","kind":"uniform_diag"},"lerner":"x"}"#;
    match ExperimentConfig::from_json(text) {
        Err(ConfigError::Parse { path, message }) => {
            assert_eq!(path, "lerner");
            assert!(message.contains("unknown field"));
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn validation_reports_field_paths() {
    let mut cfg = adversary(LearnerChoice::Erfi, AdversaryKind::RandomPauli, StateSpec::Basis { index: 9 }, 6, 0);
    cfg.l = 0.0;
    let errs = cfg.validate().unwrap_err();
    let paths: Vec<&str> = errs.iter().map(|e| e.path.as_str()).collect();
    assert_eq!(paths, ["T", "l", "scenario.kind", "scenario.truth.index"]);

    let mut q = adversary(LearnerChoice::Erfi, AdversaryKind::GreedySign, StateSpec::MaximallyMixed, 8, 4);
    q.scenario = Scenario::Quantum {
        state: StateSpec::Depolarized { base: Box::new(StateSpec::HaarPure), gamma: 1.5 },
        observable: ObservableStrategy::GreedySign,
        loss: LossKind::VirtualCooling,
    };
    q.comparator = ComparatorPolicy::Topk { r: 1.0 };
    let errs = q.validate().unwrap_err();
    let paths: Vec<&str> = errs.iter().map(|e| e.path.as_str()).collect();
    assert_eq!(paths, ["scenario.observable", "scenario.state.gamma", "comparator"]);
}

#[test]
fn erfi_against_greedy_sign_at_the_mixed_state() {
    let cfg = adversary(LearnerChoice::Erfi, AdversaryKind::GreedySign, StateSpec::MaximallyMixed, 16, 1024);
    let s = run(&cfg).unwrap().summary;
    let bound = 32.0 * (6.0 + 2.0 * 2f64.sqrt());
    assert!((s.bound.unwrap() - bound).abs() < 1e-9);
    assert!(s.final_regret <= bound);
    assert!(s.passed());
}

#[test]
fn mmwu_against_greedy_sign_respects_its_bound() {
    let truth = StateSpec::HaarSubsystem { d_prime: 64 };
    let cfg = adversary(LearnerChoice::MmwuMinimax, AdversaryKind::GreedySign, truth, 16, 1024);
    let s = run(&cfg).unwrap().summary;
    assert!(s.final_regret > 0.0);
    assert!(s.final_regret <= s.bound.unwrap());
    assert!(s.within_bound());
}

#[test]
fn zero_losses_give_zero_regret() {
    for learner in [LearnerChoice::Erfi, LearnerChoice::Expsq, LearnerChoice::MmwuMinimax, LearnerChoice::MmwuFixed { eta: 0.3 }] {
        let cfg = adversary(learner, AdversaryKind::GreedySign, StateSpec::MaximallyMixed, 4, 50);
        let out = run(&cfg).unwrap();
        assert!(out.trace.records.iter().all(|r| r.cum_regret == 0.0 && r.loss == 0.0));
    }
}

#[test]
fn traces_are_deterministic_and_seeded() {
    let mut cfg = adversary(LearnerChoice::Erfi, AdversaryKind::UniformDiag, StateSpec::HaarPure, 8, 64);
    cfg.random_comparators = 5;
    let a = run(&cfg).unwrap().trace.to_csv();
    let b = run(&cfg).unwrap().trace.to_csv();
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 65);
    cfg.seed += 1;
    assert_ne!(run(&cfg).unwrap().trace.to_csv(), a);
}

#[test]
fn topk_comparator_is_chosen_in_hindsight() {
    let mut cfg = adversary(LearnerChoice::Erfi, AdversaryKind::RandomHermitian, StateSpec::MaximallyMixed, 8, 200);
    cfg.comparator = ComparatorPolicy::Topk { r: 2f64.ln() };
    let s = run(&cfg).unwrap().summary;
    assert!((s.comparator_s_rel - 2f64.ln()).abs() < 1e-12);
    // the k = 4 hindsight row is the same comparator
    let row = s.hindsight.iter().find(|h| h.k == 4).unwrap();
    assert!((row.regret - s.final_regret).abs() < 1e-9 * s.final_regret.abs().max(1.0));
    assert!(s.max_regret.unwrap() >= s.final_regret - 1e-9);
}

#[test]
fn fixed_rate_mmwu_has_no_bound() {
    let cfg = adversary(LearnerChoice::MmwuFixed { eta: 0.5 }, AdversaryKind::UniformDiag, StateSpec::HaarPure, 4, 20);
    let out = run(&cfg).unwrap();
    assert!(out.summary.bound.is_none());
    assert!(out.trace.records.iter().all(|r| r.bound.is_nan()));
    assert!(out.trace.to_csv().lines().nth(1).unwrap().ends_with(",NaN"));
}

#[test]
fn comparator_from_a_matrix_file() {
    let dir = std::env::temp_dir().join(format!("mlea-harness-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("comparator.json");
    let rho = Density::diag(&[0.5, 0.25, 0.25, 0.0]).unwrap();
    write_matrix(&path, rho.as_hermitian()).unwrap();
    let mut cfg = adversary(LearnerChoice::Erfi, AdversaryKind::UniformDiag, StateSpec::MaximallyMixed, 4, 30);
    cfg.comparator = ComparatorPolicy::File { path: path.clone() };
    let s = run(&cfg).unwrap().summary;
    assert!((s.comparator_s_rel - rho.relative_entropy_vs_mixed().unwrap()).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn quantum_runs_respect_the_gradient_bound() {
    for (loss, obs) in [
        (LossKind::L1, ObservableStrategy::GreedySign),
        (LossKind::VirtualCooling, ObservableStrategy::RandomPauliProjector),
        (LossKind::Renyi2, ObservableStrategy::RandomPauliProjector),
    ] {
        let mut cfg = adversary(LearnerChoice::Erfi, AdversaryKind::UniformDiag, StateSpec::MaximallyMixed, 8, 100);
        cfg.scenario = Scenario::Quantum { state: StateSpec::NoisyCircuit { depth: 2, gamma: 0.1 }, observable: obs, loss };
        cfg.check_invariants = true;
        let s = run(&cfg).unwrap().summary;
        assert_eq!(s.loss_bound, loss.gradient_bound(1.0));
        assert!(s.passed(), "{loss:?}");
    }
}

#[test]
fn product_states_report_their_moment_norm() {
    let mut cfg = adversary(LearnerChoice::Erfi, AdversaryKind::UniformDiag, StateSpec::MaximallyMixed, 8, 10);
    cfg.scenario = Scenario::Quantum {
        state: StateSpec::ProductState { ensemble: mlea::quantum::BlochEnsemble::Zero },
        observable: ObservableStrategy::RandomPauli,
        loss: LossKind::L1,
    };
    let s = run(&cfg).unwrap().summary;
    assert!((s.pauli_moment_norm.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn table_examples() {
    let (ok, detail) = checks::check_gibbs_sweep(16, 8, 5).unwrap();
    assert!(ok, "{detail}");
    let (ok, detail, rows) = checks::check_depolarization(3, 256, 2, 5).unwrap();
    assert!(ok, "{detail}");
    assert_eq!(rows.len(), 8);
}
