use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mlea::inequality::{jensen_terms, monomial_conjecture_search, random_jensen_suite, SpectralFunction};
use mlea::potentials::{inverse_sqrt_sum, regret_bound_with_sum, BoundKind};
use mlea_bench::checks::{self, timed, Check};
use mlea_bench::config::{parse_json, ExperimentConfig, Scenario};
use mlea_bench::run::{run, write_matrix};
use mlea_bench::table::table;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "mlea", version, about = "Matrix online-learning experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for CSV, JSON summaries and matrix dumps.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print CSV on stdout instead of a summary.
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one adversarial experiment.
    LeaRun(Common),
    /// Run one state-learning experiment.
    QuantumRun(Common),
    /// Numerical checks of the one-sided Jensen trace inequality.
    IneqCheck {
        #[command(flatten)]
        common: Common,
        /// abs, affine, x2, x4, monomial:<2k>, exp:<c>, exp-square:<t>, erfi:<t>.
        #[arg(long)]
        phi: Option<String>,
        /// appendix-a, suite, monomial-search or interleaving.
        #[arg(long, default_value = "suite")]
        preset: String,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        /// Largest matrix size; suites cover 2..=d.
        #[arg(long, default_value_t = 6)]
        d: usize,
    },
    /// Lower-bound payoff harness and the anti-concentration check.
    LowerBound {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 64)]
        d: usize,
        #[arg(long = "T", default_value_t = 8192)]
        t: u64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        r: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
    /// Closed-form bound tables, or a comparison table for a list of configs.
    BoundTable {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        d: Vec<usize>,
        #[arg(long = "T", value_delimiter = ',', default_value = "1024,4096")]
        t: Vec<u64>,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
    },
    /// Quick run of every check suite.
    Verify(Common),
}

/// Failure kinds mapped to exit codes.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::LeaRun(c) => experiment(&c, false),
        Command::QuantumRun(c) => experiment(&c, true),
        Command::IneqCheck { common, phi, preset, trials, d } => ineq_check(&common, phi.as_deref(), &preset, trials, d),
        Command::LowerBound { common, d, t, r, seeds, trials } => lower_bound(&common, d, t, &r, seeds, trials),
        Command::BoundTable { common, d, t, l } => bound_table(&common, &d, &t, l),
        Command::Verify(c) => verify(&c),
    }
}

fn out_dir(c: &Common) -> Result<Option<&Path>> {
    if let Some(dir) = &c.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(c.out.as_deref())
}

fn write(dir: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    if let Some(dir) = dir {
        let p = dir.join(name);
        std::fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn pass_if(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn experiment(c: &Common, quantum: bool) -> Result<Outcome> {
    let Some(path) = &c.config else { bail!("--config <path> is required") };
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    match (&cfg.scenario, quantum) {
        (Scenario::Adversary { .. }, true) => bail!("scenario.type is adversary; use lea-run"),
        (Scenario::Quantum { .. }, false) => bail!("scenario.type is quantum; use quantum-run"),
        _ => {}
    }
    let out = run(&cfg)?;
    let dir = out_dir(c)?;
    let csv = out.trace.to_csv();
    write(dir, "trace.csv", &csv)?;
    write(dir, "summary.json", &serde_json::to_string_pretty(&out.summary)?)?;
    write(dir, "config.json", &cfg.to_json())?;
    let s = &out.summary;
    if c.csv {
        print!("{csv}");
    } else {
        println!(
            "{}: final regret {:.6}, bound {}, mistakes {} at eps {}, {:.2}s",
            s.name,
            s.final_regret,
            s.bound.map_or("n/a".into(), |b| format!("{b:.6}")),
            s.mistakes,
            s.mistake_threshold,
            s.wall_time_s
        );
        if let Some(inv) = &s.invariants {
            println!("invariants: {}", if inv.all_hold() { "hold" } else { "VIOLATED" });
            for v in &inv.violations {
                println!("  {v}");
            }
        }
        println!("verdict: {}", if s.passed() { "PASS" } else { "FAIL" });
    }
    Ok(pass_if(s.passed()))
}

fn parse_phi(spec: &str, d: usize) -> Result<SpectralFunction> {
    let (name, arg) = spec.split_once(':').map_or((spec, None), |(a, b)| (a, Some(b)));
    let num = |default: f64| -> Result<f64> { arg.map_or(Ok(default), |a| a.parse().with_context(|| format!("bad number in --phi {spec}"))) };
    Ok(match name {
        "abs" => SpectralFunction::Abs,
        "affine" => SpectralFunction::Affine { a: 0.7, b: -0.3 },
        "x2" => SpectralFunction::Monomial { degree: 2 },
        "x4" => SpectralFunction::Monomial { degree: 4 },
        "monomial" => SpectralFunction::Monomial { degree: num(2.0)? as u32 },
        "exp" => SpectralFunction::Exp { c: num(0.5)? },
        "exp-square" => SpectralFunction::ExpSquare { t: num(1.0)? as u64, eps: 1.0, d },
        "erfi" => SpectralFunction::Erfi { t: num(1.0)? as u64, eps: 1.0, d },
        _ => bail!("unknown --phi {spec}"),
    })
}

fn ineq_check(c: &Common, phi: Option<&str>, preset: &str, trials: usize, d_max: usize) -> Result<Outcome> {
    let seed = c.seed.unwrap_or(7);
    let dir = out_dir(c)?;
    match preset {
        "appendix-a" => {
            if phi.is_some_and(|p| p != "abs") {
                bail!("the appendix-a preset is defined for --phi abs");
            }
            let (phi, s, g, eps) = mlea::inequality::abs_counterexample();
            let t = jensen_terms(&phi, &s, &g, eps)?;
            let verdict = if t.lhs > t.rhs { "VIOLATED" } else { "holds" };
            if c.csv {
                println!("phi,lhs,rhs,gap,verdict\nabs,{:?},{:?},{:?},{verdict}", t.lhs, t.rhs, t.gap());
            } else {
                println!("phi=abs lhs={:?} rhs={:?} gap={:?} verdict {verdict}", t.lhs, t.rhs, t.gap());
            }
            if let Some(dir) = dir {
                write_matrix(&dir.join("appendix_a_s.json"), &s)?;
                write_matrix(&dir.join("appendix_a_g.json"), &g)?;
            }
            let (ok, _) = checks::check_appendix_a()?;
            Ok(pass_if(ok))
        }
        "suite" => {
            let phi_spec = phi.unwrap_or("erfi:4");
            if d_max < 2 {
                bail!("--d must be at least 2");
            }
            let expect_violation = phi_spec == "abs";
            let mut ok = true;
            let mut lines = vec!["phi,d,trials,min_scaled_gap,first_violation".to_string()];
            for d in 2..=d_max {
                let phi = parse_phi(phi_spec, d)?;
                let r = random_jensen_suite(&phi, d, trials, mlea::rng::sub_seed(seed, d as u64))?;
                let fv = r.first_violation.map_or(String::new(), |v| v.to_string());
                lines.push(format!("{phi_spec},{d},{trials},{:?},{fv}", r.min_scaled_gap));
                if let (Some(dir), Some(inst)) = (dir, &r.argmin) {
                    std::fs::write(dir.join(format!("argmin_d{d}.json")), serde_json::to_string_pretty(inst)?)?;
                }
                if expect_violation {
                    ok = r.first_violation.is_some();
                    if ok {
                        break;
                    }
                } else {
                    ok &= r.min_scaled_gap >= -checks::JENSEN_TOL;
                }
            }
            let csv = lines.join("\n") + "\n";
            write(dir, "ineq_suite.csv", &csv)?;
            if c.csv {
                print!("{csv}");
            } else {
                for l in &lines[1..] {
                    println!("{l}");
                }
                let what = if expect_violation { "violation found" } else { "no violation" };
                println!("verdict: {} ({what} expected)", if ok { "PASS" } else { "FAIL" });
            }
            Ok(pass_if(ok))
        }
        "monomial-search" => {
            let rows = monomial_conjecture_search(&[3, 4, 5], trials, d_max.max(2), seed)?;
            let mut csv = String::from("k,trials,min_scaled_gap,flagged,cleared\n");
            for r in &rows {
                csv += &format!("{},{},{:?},{},{}\n", r.k, r.trials, r.min_scaled_gap, r.flagged.len(), r.cleared);
                for (i, inst) in r.flagged.iter().enumerate() {
                    write(dir, &format!("flagged_k{}_{i}.json", r.k), &serde_json::to_string_pretty(inst)?)?;
                }
            }
            write(dir, "monomial_search.csv", &csv)?;
            print!("{csv}");
            Ok(pass_if(rows.iter().all(|r| r.flagged.is_empty())))
        }
        "interleaving" => {
            let (ok, detail) = checks::check_interleaving(trials, seed)?;
            println!("{detail}");
            Ok(pass_if(ok))
        }
        other => bail!("unknown --preset {other}"),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LowerBoundFile {
    d: Option<usize>,
    #[serde(rename = "T")]
    t: Option<u64>,
    r: Option<Vec<f64>>,
    seeds: Option<u64>,
    trials: Option<usize>,
}

fn lower_bound(c: &Common, mut d: usize, mut t: u64, r: &[f64], mut seeds: u64, mut trials: usize) -> Result<Outcome> {
    let mut r = r.to_vec();
    if let Some(path) = &c.config {
        let f: LowerBoundFile = parse_json(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
        d = f.d.unwrap_or(d);
        t = f.t.unwrap_or(t);
        r = f.r.unwrap_or(r);
        seeds = f.seeds.unwrap_or(seeds);
        trials = f.trials.unwrap_or(trials);
    }
    let seed = c.seed.unwrap_or(11);
    let rows = checks::lower_bound_rows(d, t, &r, seeds, seed)?;
    let mut csv = String::from("r,k,mean_payoff,std_error,c_emp\n");
    for row in &rows {
        csv += &format!("{:?},{},{:?},{:?},{:?}\n", row.r, row.k, row.mean_payoff, row.std_error, row.c_emp);
    }
    write(out_dir(c)?, "lower_bound.csv", &csv)?;
    let (ok_lb, detail) = checks::check_lower_bound(&rows, t);
    let k = 2usize;
    let anti = if mlea::adversaries::anticoncentration_max_k(d) >= k as f64 {
        Some(checks::check_anticoncentration(d, k, trials, seed)?)
    } else {
        None
    };
    if c.csv {
        print!("{csv}");
    } else {
        println!("{detail}");
        match &anti {
            Some((ok, detail)) => println!("anti-concentration {}: {detail}", if *ok { "pass" } else { "FAIL" }),
            None => println!("anti-concentration skipped: k = {k} exceeds the allowed range at d = {d}"),
        }
    }
    Ok(pass_if(ok_lb && anti.is_none_or(|(ok, _)| ok)))
}

fn bound_table(c: &Common, ds: &[usize], ts: &[u64], l: f64) -> Result<Outcome> {
    let dir = out_dir(c)?;
    if let Some(path) = &c.config {
        let mut configs = ExperimentConfig::load_many(path)?;
        if let Some(seed) = c.seed {
            for cfg in &mut configs {
                cfg.seed = seed;
            }
        }
        let (_, csv) = table(&configs)?;
        write(dir, "table.csv", &csv)?;
        print!("{csv}");
        return Ok(Outcome::Pass);
    }
    let kinds = [BoundKind::ErfiMain, BoundKind::Expsq, BoundKind::MmwuOracle, BoundKind::MmwuMinimax];
    let mut csv = String::from("bound,d,T,l,s_rel,value,value_over_sqrt_T\n");
    for &d in ds {
        let log_d = (d as f64).ln();
        for &t in ts {
            let isum = inverse_sqrt_sum(t);
            for s_rel in [0.0, 0.5 * log_d, log_d] {
                for k in kinds {
                    let v = regret_bound_with_sum(k, t, l, d, s_rel, isum)?;
                    let name = serde_json::to_value(k)?.as_str().unwrap_or_default().to_owned();
                    csv += &format!("{name},{d},{t},{l:?},{s_rel:?},{v:?},{:?}\n", v / (t as f64).sqrt());
                }
            }
        }
    }
    write(dir, "bounds.csv", &csv)?;
    print!("{csv}");
    Ok(Outcome::Pass)
}

fn verify(c: &Common) -> Result<Outcome> {
    let seed = c.seed.unwrap_or(2024);
    let mut results: Vec<Check> = Vec::new();
    let mut push = |ch: Check| {
        println!("{ch}");
        results.push(ch);
    };
    push(timed("1", "appendix-a counterexample", checks::check_appendix_a));
    push(timed("2", "one-sided Jensen suites", || checks::check_jensen(200, 6, 1000, seed)));
    push(timed("3", "integral representations", checks::check_laplace_identities));
    push(timed("4", "potential recursion", || checks::check_recursions(64, 1001)));
    let configs = checks::regret_suite_configs(&[8, 16], 256, 20, seed);
    let mut runs = Vec::new();
    push(timed("5", "regret bounds", || {
        runs = checks::run_all(&configs)?;
        Ok(checks::check_regret_bounds(&runs))
    }));
    push(timed("6", "runtime invariants", || Ok(checks::check_invariants(&runs))));
    push(timed("7", "zero-loss head-to-head", || {
        let h = checks::head_to_head(16, 256, 2, mlea_bench::config::StateSpec::MaximallyMixed, seed)?;
        Ok(checks::check_head_to_head(&h))
    }));
    push(timed("8", "lower-bound payoff", || {
        let rows = checks::lower_bound_rows(64, 2048, &[1.0, 2.0, 4.0], 10, seed)?;
        Ok(checks::check_lower_bound(&rows, 2048))
    }));
    push(timed("9", "anti-concentration", || checks::check_anticoncentration(64, 2, 200, seed)));
    push(timed("10a", "depolarization ordering", || checks::check_depolarization(3, 512, 2, seed).map(|(ok, d, _)| (ok, d))));
    push(timed("10b", "noisy-circuit entropy", || checks::check_noisy_circuits(6, &[1, 2, 4], &[0.1, 0.3], 3, seed)));
    push(timed("10c", "page scaling", || checks::check_page_scaling(2, 1024, 50, seed)));
    push(timed("10d", "hamiltonian norms", || checks::check_hamiltonian_norms(60, seed)));
    push(timed("10e", "gradient finite differences", || checks::check_gradients(3, 20, seed)));
    push(timed("tbl", "gibbs entropy sweep", || checks::check_gibbs_sweep(16, 16, seed)));
    push(timed("11", "monomial search and interleaving", || {
        let (a, da) = checks::check_monomial_search(2000, 5, seed)?;
        let (b, db) = checks::check_interleaving(1000, seed)?;
        Ok((a && b, format!("{da}; {db}")))
    }));
    push(timed("12", "determinism", || checks::check_determinism(&configs[..2])));
    if let Some(path) = &c.config {
        let cfgs = ExperimentConfig::load_many(path)?;
        for cfg in cfgs {
            let label = cfg.label();
            push(timed("cfg", &label, || {
                let s = run(&cfg)?.summary;
                Ok((s.passed(), format!("final regret {:.4}, bound {:?}", s.final_regret, s.bound)))
            }));
        }
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("{} checks, {failed} failed", results.len());
    write(out_dir(c)?, "verify.json", &serde_json::to_string_pretty(&results)?)?;
    Ok(pass_if(failed == 0))
}
