use serde_json::{json, Map, Value};
use sparse_rank::asym::isolated_fraction;
use sparse_rank::depclass::{exhaustive_classification_check, theorem_char_trial, LabelCounts, DEFAULT_BUDGET};
use sparse_rank::ensembles::{sample_bernoulli, sample_frc, sample_sym_adj, stack_abc, stack_abc_simple};
use sparse_rank::exactlin::rank_exact;
use sparse_rank::gradcode::{
    adversarial_bound, adversarial_search, decoding_error, dependency_upper_bound, expected_error_split,
    expected_zero_rows, frc_expected_error, straggler_count, straggler_set, zero_row_lower_bound, MeanEstimate,
    CG_REL_TOL,
};
use sparse_rank::peel::{bipartite_decomposition, corank_decomposition, k_core, karp_sipser};
use sparse_rank::probes::{
    probe_lo_quadratic, probe_lo_regular, probe_lo_sparse, regular_probe_family, sparse_probe_grid,
};
use sparse_rank::Seed;
use num_rational::Rational64;

use crate::campaign::{run_trials, Measured, Outcome, TrialRecord};
use crate::config::{Command, ExperimentConfig};

/// Attempts allowed per simple configuration sample in `gradcode`.
pub const SIMPLE_MAX_ATTEMPTS: u64 = 5_000_000;
/// Error evaluations spent by the adversarial search in `gradcode`.
pub const ADVERSARIAL_EVALUATIONS: usize = 300;
pub const PROBE_SIZES: [usize; 2] = [100, 400];
pub const REGULAR_CASES: usize = 50;

fn field<'a>(r: &'a TrialRecord, key: &str) -> Option<&'a Value> {
    r.fields.get(key)
}

fn count_true(records: &[TrialRecord], key: &str) -> usize {
    records.iter().filter(|r| field(r, key) == Some(&Value::Bool(true))).count()
}

fn mean_of(records: &[TrialRecord], key: &str) -> MeanEstimate {
    let values: Vec<f64> = records.iter().filter_map(|r| field(r, key)?.as_f64()).collect();
    MeanEstimate::from_samples(&values)
}

fn edge_p(c: &ExperimentConfig) -> f64 {
    (c.d / c.n as f64).min(1.0)
}

pub fn run(config: &ExperimentConfig) -> anyhow::Result<Outcome> {
    match config.command {
        Command::Corank => run_corank(config),
        Command::Bipartite => run_bipartite(config),
        Command::Kcore => run_kcore(config),
        Command::Census => run_census(config),
        Command::Asym => run_asym(config),
        Command::Gradcode => run_gradcode(config),
        Command::Probes => run_probes(config),
        Command::Classcheck => run_classcheck(config),
    }
}

pub fn run_corank(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let p = edge_p(c);
    let records = run_trials(c.trials, c.workers, c.seed, |_, seed| {
        let a = sample_sym_adj(c.n, p, seed)?;
        let dec = corank_decomposition(&a)?;
        Ok(Measured::new(
            json!({
                "corank": dec.corank_total,
                "i_ks": dec.i_ks,
                "core_corank": dec.corank_core,
                "equal": dec.corank_total == dec.i_ks,
                "identity": dec.identity_holds(),
            }),
            dec.identity_holds(),
        ))
    })?;
    let equal = count_true(&records, "equal");
    let i_ks = mean_of(&records, "i_ks");
    let summary = json!({
        "equal_count": equal,
        "equality_rate": equal as f64 / records.len() as f64,
        "identity_count": count_true(&records, "identity"),
        "mean_i_ks_fraction": i_ks.mean / c.n as f64,
    });
    Ok(outcome(records, summary))
}

pub fn run_bipartite(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let p = edge_p(c);
    let records = run_trials(c.trials, c.workers, c.seed, |_, seed| {
        let b = sample_bernoulli(c.n, c.n, p, seed)?;
        let dec = bipartite_decomposition(&b)?;
        let hard = dec.identities_hold() && dec.lower_bound_holds();
        Ok(Measured::new(
            json!({
                "corank": dec.corank_cols,
                "isolated_left": dec.isolated_left,
                "isolated_right": dec.isolated_right,
                "core_corank_rows": dec.core_corank_rows,
                "core_corank_cols": dec.core_corank_cols,
                "equal": dec.max_isolated_matches(),
                "lower_bound": dec.lower_bound_holds(),
                "identity": dec.identities_hold(),
            }),
            hard,
        ))
    })?;
    let equal = count_true(&records, "equal");
    let summary = json!({
        "equal_count": equal,
        "equality_rate": equal as f64 / records.len() as f64,
        "lower_bound_count": count_true(&records, "lower_bound"),
        "identity_count": count_true(&records, "identity"),
    });
    Ok(outcome(records, summary))
}

pub fn run_kcore(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let p = edge_p(c);
    let k = c.k.unwrap_or(3);
    let records = run_trials(c.trials, c.workers, c.seed, |_, seed| {
        let a = sample_sym_adj(c.n, p, seed)?;
        let core = k_core(&a, k)?;
        let corank = rank_exact(&a.principal_submatrix(&core.vertices))?.corank_cols;
        Ok(Measured::new(
            json!({
                "core_size": core.vertices.len(),
                "corank": corank,
                "full_rank": corank == 0,
            }),
            true,
        ))
    })?;
    let full = count_true(&records, "full_rank");
    let size = mean_of(&records, "core_size");
    let summary = json!({
        "k": k,
        "full_rank_count": full,
        "full_rank_rate": full as f64 / records.len() as f64,
        "empty_core_count": records.iter().filter(|r| field(r, "core_size") == Some(&json!(0))).count(),
        "mean_core_fraction": size.mean / c.n as f64,
    });
    Ok(outcome(records, summary))
}

pub fn run_census(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let ensemble = c.ensemble.into();
    let records = run_trials(c.trials, c.workers, c.seed, |_, seed| {
        let t = theorem_char_trial(ensemble, c.n, c.d, c.k_max, DEFAULT_BUDGET, seed)?;
        Ok(Measured::new(serde_json::to_value(&t).expect("trial serializes"), true))
    })?;
    let mut labels = LabelCounts::default();
    for r in &records {
        if let Some(l) = field(r, "labels").and_then(|v| serde_json::from_value::<LabelCounts>(v.clone()).ok()) {
            labels.merge(&l);
        }
    }
    let pass = count_true(&records, "pass");
    let summary = json!({
        "tree_only_count": pass,
        "tree_only_rate": pass as f64 / records.len() as f64,
        "truncated_count": count_true(&records, "truncated"),
        "labels": labels,
    });
    Ok(outcome(records, summary))
}

pub fn run_asym(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let p = edge_p(c);
    let records = run_trials(c.trials, c.workers, c.seed, |_, seed| {
        let a = sample_sym_adj(c.n, p, seed)?;
        let i_ks = karp_sipser(&a)?.i_ks();
        Ok(Measured::new(
            json!({ "i_ks": i_ks, "fraction": i_ks as f64 / c.n as f64 }),
            true,
        ))
    })?;
    let est = mean_of(&records, "fraction");
    let predicted = isolated_fraction(c.d)?;
    let summary = json!({
        "mean_fraction": est.mean,
        "stderr": est.stderr,
        "predicted": predicted,
        "gap": (est.mean - predicted).abs(),
    });
    Ok(outcome(records, summary))
}

pub fn run_gradcode(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let d = c.d as usize;
    let master = Seed::new(c.seed);
    let abc = stack_abc(c.n, c.gamma, d, master.child(u64::MAX))?;
    let frc = sample_frc(c.n, d)?;
    let s = straggler_count(c.n, c.p)?;
    let n_rows = c.n as f64;
    let gap_limit = 1e-6 * n_rows;
    let records = run_trials(c.trials, c.workers, c.seed, |t, _| {
        let set = straggler_set(c.n, s, master, t as u64);
        let rep = decoding_error(&abc, &set, CG_REL_TOL)?;
        let lower = zero_row_lower_bound(&abc, &set);
        let upper = dependency_upper_bound(&abc, &set)?;
        let frc_err = decoding_error(&frc, &set, CG_REL_TOL)?;
        let sandwich = lower as f64 <= rep.err + 1e-9 && rep.err <= upper as f64 + 1e-6;
        let hard = sandwich && rep.residual_gap <= gap_limit && frc_err.residual_gap <= gap_limit;
        Ok(Measured::new(
            json!({
                "abc_err": rep.err,
                "abc_normalized": rep.normalized,
                "zero_rows": lower,
                "dependency_bound": upper,
                "residual_gap": rep.residual_gap,
                "frc_normalized": frc_err.normalized,
                "sandwich": sandwich,
            }),
            hard,
        ))
    })?;
    let abc_mean = mean_of(&records, "abc_normalized");
    let frc_mean = mean_of(&records, "frc_normalized");
    let split = expected_error_split(&abc, c.p, c.trials, master)?;
    let mut abc_row = json!({
        "scheme": "stacked_abc",
        "expected_normalized_err": abc_mean,
        "split_estimate": split,
        "exact_zero_row_rate": expected_zero_rows(&abc, s) / n_rows,
    });
    match stack_abc_simple(c.n, c.gamma, d, master.child(u64::MAX - 1), SIMPLE_MAX_ATTEMPTS) {
        Ok((simple, _, attempts)) => {
            let bound = adversarial_bound(&simple, s)?;
            let found = adversarial_search(&simple, s, ADVERSARIAL_EVALUATIONS, master.child(u64::MAX - 2))?;
            abc_row["simple_attempts"] = json!(attempts);
            abc_row["spectral_bound"] = json!(bound);
            abc_row["adversarial_found"] = json!(found.normalized);
        }
        Err(e) => abc_row["spectral_error"] = json!(e.to_string()),
    }
    let summary = json!({
        "stragglers": s,
        "sandwich_count": count_true(&records, "sandwich"),
        "table": [
            abc_row,
            {
                "scheme": "frc",
                "expected_normalized_err": frc_mean,
                "exact": frc_expected_error(c.n, d, s) / n_rows,
                "adversarial": (s / d * d) as f64 / n_rows,
            },
        ],
    });
    Ok(outcome(records, summary))
}

enum ProbeCase {
    Sparse(sparse_rank::probes::SparseProbeCase),
    Quadratic { name: &'static str, matrix: Vec<Vec<Rational64>>, p: f64, c: i64 },
    Regular(sparse_rank::probes::RegularProbeCase),
}

fn constant_matrix(n: usize, f: impl Fn(usize, usize) -> i64) -> Vec<Vec<Rational64>> {
    (0..n).map(|i| (0..n).map(|j| Rational64::from_integer(f(i, j))).collect()).collect()
}

pub fn run_probes(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let master = Seed::new(c.seed);
    let mut cases: Vec<ProbeCase> = sparse_probe_grid(&PROBE_SIZES, master.child(0))?
        .into_iter()
        .map(ProbeCase::Sparse)
        .collect();
    cases.push(ProbeCase::Quadratic { name: "zero", matrix: constant_matrix(100, |_, _| 0), p: 0.3, c: 0 });
    cases.push(ProbeCase::Quadratic { name: "identity", matrix: constant_matrix(100, |i, j| (i == j) as i64), p: 0.3, c: 0 });
    cases.push(ProbeCase::Quadratic { name: "all_ones", matrix: constant_matrix(100, |_, _| 1), p: 0.3, c: 900 });
    cases.extend(regular_probe_family(REGULAR_CASES, master.child(1))?.into_iter().map(ProbeCase::Regular));
    let records = run_trials(cases.len(), c.workers, c.seed, |i, seed| {
        let (kind, name, report) = match &cases[i] {
            ProbeCase::Sparse(case) => (
                "sparse",
                format!("{} p={}", case.family, case.p),
                probe_lo_sparse(&case.v, case.p, case.target, c.trials, seed)?,
            ),
            ProbeCase::Quadratic { name, matrix, p, c: target } => (
                "quadratic",
                name.to_string(),
                probe_lo_quadratic(matrix, *p, Rational64::from_integer(*target), c.trials, seed)?,
            ),
            ProbeCase::Regular(case) => (
                "regular",
                format!("N={} d={} w={}", case.v.len(), case.d, case.w),
                probe_lo_regular(&case.v, case.d, case.w, seed)?,
            ),
        };
        let pass = report.pass.unwrap_or(true);
        let mut fields = Map::from_iter([("kind".to_string(), json!(kind)), ("case".to_string(), json!(name))]);
        if let Value::Object(m) = serde_json::to_value(&report).expect("report serializes") {
            fields.extend(m);
        }
        Ok(Measured::new(Value::Object(fields), pass))
    })?;
    let tally = |kind: &str| {
        let of_kind: Vec<&TrialRecord> = records.iter().filter(|r| field(r, "kind") == Some(&json!(kind))).collect();
        let pass = of_kind.iter().filter(|r| field(r, "pass") == Some(&json!(true))).count();
        json!({ "cases": of_kind.len(), "pass": pass })
    };
    let summary = json!({
        "sparse": tally("sparse"),
        "quadratic": tally("quadratic"),
        "regular": tally("regular"),
    });
    Ok(outcome(records, summary))
}

pub fn run_classcheck(c: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let ks: Vec<usize> = match c.k {
        Some(k) => vec![k],
        None => vec![2, 3, 4],
    };
    let records = run_trials(ks.len(), c.workers, c.seed, |i, _| {
        let k = ks[i];
        let report = exhaustive_classification_check(k, 2 * k)?;
        let ok = report.violations == 0;
        Ok(Measured::new(serde_json::to_value(&report).expect("report serializes"), ok))
    })?;
    let summary = json!({
        "sizes": ks,
        "violations": records.iter().filter_map(|r| field(r, "violations")?.as_u64()).sum::<u64>(),
    });
    Ok(outcome(records, summary))
}

fn outcome(records: Vec<TrialRecord>, summary: Value) -> Outcome {
    let summary = match summary {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    Outcome { records, summary }
}

#[cfg(test)]
fn smoke(command: Command, params: crate::config::Params) -> Outcome {
    run(&ExperimentConfig::resolve(command, params).unwrap()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;
    use sparse_rank::SparseBinMatrix;

    #[test]
    fn corank_on_empty_graphs() {
        let o = smoke(Command::Corank, Params { n: Some(100), d: Some(0.0), trials: Some(10), ..Params::default() });
        assert_eq!(o.exit_code(), 0);
        assert_eq!(o.summary["equal_count"], json!(10));
        assert!(o.records.iter().all(|r| r.fields["i_ks"] == json!(100)));
    }

    #[test]
    fn identity_holds_below_threshold() {
        let o = smoke(Command::Corank, Params { n: Some(50), d: Some(1.0), trials: Some(30), ..Params::default() });
        assert_eq!(o.summary["identity_count"], json!(30));
        let b = smoke(Command::Bipartite, Params { n: Some(50), d: Some(1.0), trials: Some(30), ..Params::default() });
        assert_eq!(b.summary["lower_bound_count"], json!(30));
        assert_eq!(b.exit_code(), 0);
    }

    #[test]
    fn kcore_of_sparse_graph_is_usually_empty() {
        let o = smoke(Command::Kcore, Params { n: Some(100), d: Some(1.0), trials: Some(5), ..Params::default() });
        assert_eq!(o.summary["full_rank_count"], json!(5));
    }

    #[test]
    fn gradcode_small() {
        let o = smoke(
            Command::Gradcode,
            Params { n: Some(64), d: Some(4.0), p: Some(0.25), trials: Some(5), ..Params::default() },
        );
        assert_eq!(o.exit_code(), 0, "{:?}", o.records);
        assert_eq!(o.summary["table"][1]["scheme"], json!("frc"));
    }

    #[test]
    fn classcheck_k3() {
        let o = smoke(Command::Classcheck, Params { k: Some(3), ..Params::default() });
        assert_eq!(o.records[0].fields["minimal"], json!(9));
        assert_eq!(o.exit_code(), 0);
    }

    #[test]
    fn complete_graph_core_is_full_rank() {
        let a = SparseBinMatrix::ones(20, 20);
        let off_diagonal: Vec<(usize, usize)> = a.entries().filter(|(r, c)| r != c).collect();
        let k20 = SparseBinMatrix::from_entries(20, 20, off_diagonal).unwrap();
        let core = k_core(&k20, 3).unwrap();
        assert_eq!(core.vertices.len(), 20);
        assert_eq!(rank_exact(&k20).unwrap().corank_cols, 0);
    }
}
