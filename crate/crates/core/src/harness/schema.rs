//! Readers for the artifacts written by the harness.
//!
//! These are the contract with downstream tooling (plotting in particular):
//! `trajectory.csv` with the fixed header
//! `checkpoint_k,mean_h_bar,std_h_bar,ci_lo,ci_hi,mean_gamma` and
//! `summary.json` with at least `gamma_star`, `h_star` and one entry per
//! policy. Anything else in `summary.json` is ignored here.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::bounds::Verdict;
use crate::harness::experiment::TRAJECTORY_CSV_HEADER;
use crate::harness::stats::SampleStats;

/// One line of `trajectory.csv`. `mean_gamma` is blank for non-adaptive
/// policies.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub checkpoint_k: u64,
    pub mean_h_bar: f64,
    pub std_h_bar: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_gamma: Option<f64>,
}

fn column_names() -> Vec<&'static str> {
    TRAJECTORY_CSV_HEADER.split(',').collect()
}

/// Parses and validates a `trajectory.csv`. Errors name the offending
/// column and line.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>> {
    let names = column_names();
    let mut lines = text.lines();
    let header = lines
        .next()
        .filter(|h| !h.trim().is_empty())
        .ok_or_else(|| Error::Schema("trajectory file is empty".into()))?;
    let found: Vec<&str> = header.split(',').map(str::trim).collect();
    for (i, name) in names.iter().enumerate() {
        match found.get(i) {
            Some(f) if f == name => {}
            Some(f) => {
                return Err(Error::Schema(format!(
                    "column {} should be `{name}`, found `{f}`",
                    i + 1
                )))
            }
            None => return Err(Error::Schema(format!("missing column `{name}`"))),
        }
    }
    if found.len() > names.len() {
        return Err(Error::Schema(format!(
            "unexpected column `{}`",
            found[names.len()]
        )));
    }

    let mut rows = Vec::new();
    let mut last_k = 0;
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let line_no = n + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(Error::Schema(format!(
                "line {line_no}: expected {} fields, found {}",
                names.len(),
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].trim().parse::<f64>().map_err(|_| {
                Error::Schema(format!(
                    "line {line_no}: column `{}` is not a number: `{}`",
                    names[i], fields[i]
                ))
            })
        };
        let checkpoint_k = fields[0].trim().parse::<u64>().map_err(|_| {
            Error::Schema(format!(
                "line {line_no}: column `checkpoint_k` is not a frame index: `{}`",
                fields[0]
            ))
        })?;
        if checkpoint_k <= last_k {
            return Err(Error::Schema(format!(
                "line {line_no}: column `checkpoint_k` must increase, got {checkpoint_k} after {last_k}"
            )));
        }
        last_k = checkpoint_k;
        let mean_gamma = match fields[5].trim() {
            "" => None,
            _ => Some(num(5)?),
        };
        rows.push(TrajectoryRow {
            checkpoint_k,
            mean_h_bar: num(1)?,
            std_h_bar: num(2)?,
            ci_lo: num(3)?,
            ci_hi: num(4)?,
            mean_gamma,
        });
    }
    if rows.is_empty() {
        return Err(Error::Schema(
            "trajectory file has a header but no rows".into(),
        ));
    }
    Ok(rows)
}

/// The parts of `summary.json` that downstream tools rely on.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct SummaryView {
    pub gamma_star: Option<f64>,
    pub h_star: Option<f64>,
    #[serde(default)]
    pub zero_wait_cost: Option<f64>,
    pub policies: Vec<PolicyView>,
    #[serde(default)]
    pub bound_report: Option<BoundReportView>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct PolicyView {
    pub label: String,
    pub checkpoints: Vec<u64>,
    pub mean_elapsed: Vec<f64>,
    pub final_h_bar: SampleStats,
    pub trajectory_file: Option<String>,
}

/// Also matches the JSON written by `check-bounds`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct BoundReportView {
    pub gamma_star: f64,
    pub h_star: f64,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

/// Parses and validates a `summary.json`.
pub fn parse_summary(text: &str) -> Result<SummaryView> {
    let view: SummaryView =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("summary.json: {e}")))?;
    for p in &view.policies {
        if p.checkpoints.len() != p.mean_elapsed.len() {
            return Err(Error::Schema(format!(
                "policy `{}`: `checkpoints` and `mean_elapsed` differ in length",
                p.label
            )));
        }
    }
    Ok(view)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "checkpoint_k,mean_h_bar,std_h_bar,ci_lo,ci_hi,mean_gamma\n\
                        1,2.5,0,2.5,2.5,\n\
                        10,2.25,0.5,1.9,2.6,1.5\n";

    #[test]
    fn parses_rows_with_and_without_gamma() {
        let rows = parse_trajectory_csv(GOOD).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].mean_gamma, None);
        assert_eq!(rows[1].mean_gamma, Some(1.5));
        assert_eq!(rows[1].checkpoint_k, 10);
    }

    #[test]
    fn errors_name_the_column() {
        let bad = GOOD.replace("ci_lo", "lower");
        let msg = parse_trajectory_csv(&bad).unwrap_err().to_string();
        assert!(msg.contains("ci_lo") && msg.contains("lower"), "{msg}");

        let bad = GOOD.replace("2.25", "abc");
        let msg = parse_trajectory_csv(&bad).unwrap_err().to_string();
        assert!(msg.contains("mean_h_bar"), "{msg}");

        assert!(parse_trajectory_csv("").is_err());
        assert!(
            parse_trajectory_csv("checkpoint_k,mean_h_bar,std_h_bar,ci_lo,ci_hi,mean_gamma\n")
                .is_err()
        );
    }

    #[test]
    fn checkpoints_must_increase() {
        let bad = GOOD.replace("10,2.25", "1,2.25");
        assert!(parse_trajectory_csv(&bad).is_err());
    }
}
