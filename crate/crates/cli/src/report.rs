//! Report assembly and output.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::{Common, Failure, Format};

pub struct Report {
    pub config: Value,
    pub trials: Vec<Value>,
    pub aggregate: Map<String, Value>,
    pub theory: Map<String, Value>,
}

impl Report {
    fn to_json(&self, common: &Common) -> Value {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        json!({
            "config": self.config,
            "trials": self.trials,
            "aggregate": self.aggregate,
            "theory": self.theory,
            "provenance": {
                "version": env!("CARGO_PKG_VERSION"),
                "seed": common.seed,
                "trial_seeds": "seed + trial index",
                "timestamp": timestamp,
            },
        })
    }

    /// One header row and one data row: aggregates and theory values.
    fn to_csv(&self, common: &Common) -> Result<Vec<u8>, Failure> {
        let mut header = vec!["subcommand".to_string(), "seed".into(), "trials".into()];
        let mut row = vec![
            self.config["subcommand"].as_str().unwrap_or("").to_string(),
            common.seed.to_string(),
            common.trials.to_string(),
        ];
        for (prefix, map) in [("aggregate", &self.aggregate), ("theory", &self.theory)] {
            for (k, v) in map {
                header.push(format!("{prefix}.{k}"));
                row.push(match v {
                    Value::String(s) => s.clone(),
                    Value::Null => String::new(),
                    other => other.to_string(),
                });
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)
            .and_then(|_| w.write_record(&row))
            .map_err(|e| Failure::Protocol(format!("csv: {e}")))?;
        w.into_inner()
            .map_err(|e| Failure::Protocol(format!("csv: {e}")))
    }

    pub fn emit(&self, common: &Common) -> Result<(), Failure> {
        let bytes = match common.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json(common))
                    .map_err(|e| Failure::Protocol(format!("json: {e}")))?;
                s.push('\n');
                s.into_bytes()
            }
            Format::Csv => self.to_csv(common)?,
        };
        match &common.out {
            Some(path) => std::fs::write(path, bytes)
                .map_err(|e| Failure::Usage(format!("--out {}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| Failure::Protocol(format!("stdout: {e}"))),
        }
    }
}

pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `ε + 3 sqrt(ε(1-ε)/trials)`.
pub fn binomial_limit(eps: f64, trials: u64) -> f64 {
    eps + 3.0 * (eps * (1.0 - eps) / trials as f64).sqrt()
}
