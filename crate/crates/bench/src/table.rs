//! One comparison row per experiment.

use std::fmt::Write as _;

use anyhow::Result;
use mlea::learners::format_f64;
use serde::Serialize;

use crate::config::{ExperimentConfig, StateSpec};
use crate::run::{run, RunSummary};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub name: String,
    pub state_class: String,
    pub learner: String,
    pub d: usize,
    #[serde(rename = "T")]
    pub t: u64,
    pub s_rel: f64,
    pub final_regret: f64,
    pub bound: f64,
    pub epsilon: f64,
    pub mistakes: u64,
}

pub const TABLE_HEADER: &str = "name,state_class,learner,d,T,s_rel,final_regret,bound,epsilon,mistakes";

pub fn state_class(s: &StateSpec) -> String {
    match s {
        StateSpec::MaximallyMixed => "maximally_mixed".into(),
        StateSpec::Basis { .. } => "basis".into(),
        StateSpec::HaarPure => "haar_pure".into(),
        StateSpec::Depolarized { base, gamma } => format!("depolarized({},{gamma})", state_class(base)),
        StateSpec::NoisyCircuit { depth, gamma } => format!("noisy_circuit(D={depth},{gamma})"),
        StateSpec::HaarSubsystem { d_prime } => format!("haar_subsystem(d'={d_prime})"),
        StateSpec::ProductState { .. } => "product".into(),
        StateSpec::Gibbs { beta, .. } => format!("gibbs(beta={beta})"),
        StateSpec::File { .. } => "file".into(),
    }
}

pub fn row(cfg: &ExperimentConfig, s: &RunSummary) -> TableRow {
    TableRow {
        name: s.name.clone(),
        state_class: state_class(cfg.scenario.truth()),
        learner: s.learner.clone(),
        d: s.d,
        t: s.t,
        s_rel: s.comparator_s_rel,
        final_regret: s.final_regret,
        bound: s.bound.unwrap_or(f64::NAN),
        epsilon: s.mistake_threshold,
        mistakes: s.mistakes,
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn to_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.name),
            csv_field(&r.state_class),
            csv_field(&r.learner),
            r.d,
            r.t,
            format_f64(r.s_rel),
            format_f64(r.final_regret),
            format_f64(r.bound),
            format_f64(r.epsilon),
            r.mistakes
        );
    }
    out
}

/// Runs every config and returns its rows and their CSV form.
pub fn table(configs: &[ExperimentConfig]) -> Result<(Vec<TableRow>, String)> {
    anyhow::ensure!(!configs.is_empty(), "a table needs at least one config");
    let rows: Vec<TableRow> = configs.iter().map(|c| Ok(row(c, &run(c)?.summary))).collect::<Result<_>>()?;
    let csv = to_csv(&rows);
    Ok((rows, csv))
}
