use std::time::Instant;

use rayon::prelude::*;
use serde_json::{Map, Value};
use sparse_rank::Seed;

/// Quantities measured by one trial and whether its hard assertions held.
pub struct Measured {
    pub fields: Map<String, Value>,
    pub hard_ok: bool,
}

impl Measured {
    pub fn new(fields: Value, hard_ok: bool) -> Self {
        let fields = match fields {
            Value::Object(map) => map,
            other => Map::from_iter([("value".to_string(), other)]),
        };
        Self { fields, hard_ok }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    /// Stream of the trial's derived seed.
    pub seed: u64,
    /// Hard assertions held and no error occurred.
    pub ok: bool,
    pub error: Option<String>,
    pub wall_ms: f64,
    pub fields: Map<String, Value>,
}

impl TrialRecord {
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("trial".into(), self.trial.into());
        map.insert("seed".into(), self.seed.into());
        map.insert("ok".into(), self.ok.into());
        if let Some(e) = &self.error {
            map.insert("error".into(), e.clone().into());
        }
        map.extend(self.fields.clone());
        map.insert("wall_ms".into(), self.wall_ms.into());
        Value::Object(map)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub records: Vec<TrialRecord>,
    pub summary: Map<String, Value>,
}

impl Outcome {
    pub fn failed_assertions(&self) -> usize {
        self.records.iter().filter(|r| !r.ok && r.error.is_none()).count()
    }

    pub fn errors(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    /// 0 when every hard assertion held, 2 otherwise (a trial that errored
    /// could not check its assertions and counts as a failure).
    pub fn exit_code(&self) -> i32 {
        if self.failed_assertions() + self.errors() == 0 {
            0
        } else {
            2
        }
    }
}

/// Runs `trials` trials on a pool of `workers` threads. Trial `i` draws from
/// `Seed::new(master).child(i)`, so results do not depend on the worker
/// count, and records come back in trial order.
pub fn run_trials<F>(trials: usize, workers: usize, master: u64, f: F) -> anyhow::Result<Vec<TrialRecord>>
where
    F: Fn(usize, Seed) -> sparse_rank::Result<Measured> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let base = Seed::new(master);
    Ok(pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let seed = base.child(trial as u64);
                let start = Instant::now();
                let result = f(trial, seed);
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                match result {
                    Ok(m) => TrialRecord {
                        trial,
                        seed: seed.stream(),
                        ok: m.hard_ok,
                        error: None,
                        wall_ms,
                        fields: m.fields,
                    },
                    Err(e) => TrialRecord {
                        trial,
                        seed: seed.stream(),
                        ok: false,
                        error: Some(e.to_string()),
                        wall_ms,
                        fields: Map::new(),
                    },
                }
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use serde_json::json;

    fn draw(_: usize, seed: Seed) -> sparse_rank::Result<Measured> {
        let x: u64 = seed.rng().random();
        Ok(Measured::new(json!({ "x": x }), x % 7 != 0))
    }

    #[test]
    fn worker_count_does_not_change_records() {
        let strip = |rs: Vec<TrialRecord>| rs.into_iter().map(|r| (r.trial, r.seed, r.ok, r.fields)).collect::<Vec<_>>();
        let one = strip(run_trials(40, 1, 9, draw).unwrap());
        let four = strip(run_trials(40, 4, 9, draw).unwrap());
        assert_eq!(one, four);
        assert!(one.iter().enumerate().all(|(i, r)| r.0 == i));
    }

    #[test]
    fn errors_are_recorded_per_trial() {
        let records = run_trials(3, 2, 1, |i, _| {
            if i == 1 {
                Err(sparse_rank::Error::EmptyResult)
            } else {
                Ok(Measured::new(json!({}), true))
            }
        })
        .unwrap();
        let outcome = Outcome {
            records,
            summary: Map::new(),
        };
        assert_eq!((outcome.errors(), outcome.failed_assertions(), outcome.exit_code()), (1, 0, 2));
    }
}
