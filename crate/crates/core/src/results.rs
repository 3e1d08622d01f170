//! Line-delimited JSON records for run results and episode logs.
//!
//! A results file holds one `{"kind":"run",...}` line per (arm, seed) run,
//! followed by one summary line. Nothing time-dependent goes into a results
//! file, so reruns with the same seeds are byte-identical; wall-clock timings
//! live only in the episode log.

use serde::{Deserialize, Serialize};

use crate::harness::{
    AblationSummary, ArmSummary, EpisodeSummary, GammaSummary, RunResult, Series,
};
use crate::metrics::EvalReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEntry {
    pub episode: usize,
    pub iterations: usize,
    pub averaged_top1: Option<f64>,
    pub individual_top1: Vec<f64>,
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub arm: String,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub top1: Option<f64>,
    pub report: Option<EvalReport>,
    pub total_trained_iterations: usize,
    pub peak_model_copies: usize,
    pub init_fingerprint: String,
    pub data_fingerprint: String,
    pub episodes: Vec<EpisodeEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

impl From<&RunResult> for RunRecord {
    fn from(r: &RunResult) -> Self {
        Self {
            arm: r.arm.clone(),
            seed: r.seed,
            status: if r.error.is_none() {
                RunStatus::Ok
            } else {
                RunStatus::Failed
            },
            error: r.error.clone(),
            top1: r.top1(),
            report: r.report.clone(),
            total_trained_iterations: r.total_trained_iterations,
            peak_model_copies: r.peak_model_copies,
            init_fingerprint: r.init_fingerprint.clone(),
            data_fingerprint: r.data_fingerprint.clone(),
            episodes: r
                .episodes
                .iter()
                .map(|e| EpisodeEntry {
                    episode: e.episode,
                    iterations: e.iterations,
                    averaged_top1: e.averaged_top1,
                    individual_top1: e.individual_top1.clone(),
                    distances: e.distances.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResultRecord {
    Run(RunRecord),
    ArmSummary { arms: Vec<ArmSummary> },
    AblationSummary(AblationSummary),
    GammaSummary(GammaSummary),
    Series(Series),
}

/// One line of the per-episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLogLine {
    pub arm: String,
    pub seed: u64,
    #[serde(flatten)]
    pub episode: EpisodeSummary,
}

pub fn episode_log(results: &[RunResult]) -> Vec<EpisodeLogLine> {
    results
        .iter()
        .flat_map(|r| {
            r.episodes.iter().map(move |e| EpisodeLogLine {
                arm: r.arm.clone(),
                seed: r.seed,
                episode: e.clone(),
            })
        })
        .collect()
}

/// Serializes each value on its own line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> serde_json::Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses a line-delimited file; blank lines are skipped.
pub fn from_jsonl<T: for<'de> Deserialize<'de>>(text: &str) -> serde_json::Result<Vec<T>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{GaussianMixture, LongTailSpec};
    use crate::harness::{ArmSpec, DataSource, ExperimentPlan, TrainerTemplate};
    use crate::imwa::{ImwaSchedule, RunOptions};

    fn results() -> Vec<RunResult> {
        let plan = ExperimentPlan {
            arms: vec![ArmSpec::new("imwa", ImwaSchedule::new(12, 3, 2).unwrap())],
            data: DataSource::Synthetic(GaussianMixture {
                test_per_class: 10,
                ..GaussianMixture::new(LongTailSpec::new(3, 20, 2.0).unwrap(), 3, 2.0)
            }),
            hidden_widths: vec![5],
            seeds: vec![0, 1],
            trainer: TrainerTemplate {
                batch_size: 4,
                ..TrainerTemplate::default()
            },
            model_keys: None,
            options: RunOptions::default(),
            parallel_runs: false,
        };
        crate::harness::run_plan(&plan).unwrap()
    }

    #[test]
    fn results_round_trip_byte_stable() {
        let results = results();
        let mut records: Vec<ResultRecord> = results
            .iter()
            .map(|r| ResultRecord::Run(r.into()))
            .collect();
        let arms = vec![ArmSpec::new("imwa", ImwaSchedule::new(12, 3, 2).unwrap())];
        records.push(ResultRecord::ArmSummary {
            arms: crate::harness::summarize_arms(&arms, &results),
        });
        let text = to_jsonl(&records).unwrap();
        let parsed: Vec<ResultRecord> = from_jsonl(&text).unwrap();
        assert_eq!(parsed, records);
        assert_eq!(to_jsonl(&parsed).unwrap(), text);
        assert!(text.lines().all(|l| !l.contains("wall_clock")));
    }

    #[test]
    fn episode_log_has_one_line_per_episode() {
        let results = results();
        let log = episode_log(&results);
        assert_eq!(log.len(), 2 * 3);
        let text = to_jsonl(&log).unwrap();
        assert!(text.lines().all(|l| l.contains("wall_clock_secs")));
        let back: Vec<EpisodeLogLine> = from_jsonl(&text).unwrap();
        assert_eq!(back, log);
    }
}
