//! Paired-seed experiment plans and ablation sweeps.
//!
//! For every replication seed all arms share the same dataset and the same
//! initial weights; only the schedule differs. Improvement columns are paired
//! differences taken per seed.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, GaussianMixture, LongTailSpec};
use crate::error::{Error, Result};
use crate::imwa::{run_imwa, EpisodeRecord, ImwaSchedule, ProbePoint, RunOptions, TrainerConfig};
use crate::metrics::{evaluate, EvalReport};
use crate::nn::{init_weights, LayerLayout, WeightVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub name: String,
    pub schedule: ImwaSchedule,
    /// Training length is `schedule.total_iterations * iteration_multiplier`.
    pub iteration_multiplier: usize,
}

impl ArmSpec {
    pub fn new(name: impl Into<String>, schedule: ImwaSchedule) -> Self {
        Self {
            name: name.into(),
            schedule,
            iteration_multiplier: 1,
        }
    }

    /// Single model, no averaging.
    pub fn baseline(name: impl Into<String>, template: &ImwaSchedule) -> Self {
        Self::new(
            name,
            ImwaSchedule {
                num_episodes: 1,
                num_models: 1,
                ..*template
            },
        )
    }

    pub fn with_multiplier(mut self, multiplier: usize) -> Self {
        self.iteration_multiplier = multiplier;
        self
    }

    pub fn effective_schedule(&self) -> ImwaSchedule {
        ImwaSchedule {
            total_iterations: self.schedule.total_iterations * self.iteration_multiplier,
            ..self.schedule
        }
    }

    /// Gradient steps summed over all models: `M * T * multiplier`.
    pub fn total_trained_iterations(&self) -> usize {
        let s = self.effective_schedule();
        s.num_models * s.total_iterations
    }
}

/// Where each replication's train/eval data comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// Regenerated from the replication seed.
    Synthetic(GaussianMixture),
    /// The same data for every seed.
    Fixed {
        train: Arc<Dataset>,
        eval: Arc<Dataset>,
    },
}

impl DataSource {
    fn materialize(&self, seed: u64) -> Result<(Arc<Dataset>, Arc<Dataset>)> {
        match self {
            DataSource::Synthetic(g) => {
                let data = g.generate(seed)?;
                Ok((Arc::new(data.train), Arc::new(data.test)))
            }
            DataSource::Fixed { train, eval } => Ok((train.clone(), eval.clone())),
        }
    }

    fn num_classes(&self) -> usize {
        match self {
            DataSource::Synthetic(g) => g.spec.num_classes,
            DataSource::Fixed { train, .. } => train.num_classes(),
        }
    }

    fn feature_dim(&self) -> usize {
        match self {
            DataSource::Synthetic(g) => g.feature_dim,
            DataSource::Fixed { train, .. } => train.feature_dim(),
        }
    }
}

/// Optimizer settings shared by every trainer of every arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainerTemplate {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
}

impl Default for TrainerTemplate {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub arms: Vec<ArmSpec>,
    pub data: DataSource,
    pub hidden_widths: Vec<usize>,
    pub seeds: Vec<u64>,
    pub trainer: TrainerTemplate,
    /// Per-model data-order keys; model `m` uses key `m` when absent.
    pub model_keys: Option<Vec<u64>>,
    pub options: RunOptions,
    /// Run independent (arm, seed) jobs on the rayon pool.
    pub parallel_runs: bool,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::config("plan has no arms"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("plan has no seeds"));
        }
        for (i, arm) in self.arms.iter().enumerate() {
            if self.arms[..i].iter().any(|a| a.name == arm.name) {
                return Err(Error::config(format!("duplicate arm name {:?}", arm.name)));
            }
            if arm.iteration_multiplier < 1 {
                return Err(Error::config(format!(
                    "arm {:?}: iteration_multiplier must be at least 1",
                    arm.name
                )));
            }
            arm.effective_schedule()
                .validate()
                .map_err(|e| Error::config(format!("arm {:?}: {e}", arm.name)))?;
            if let Some(keys) = &self.model_keys {
                if keys.len() < arm.schedule.num_models {
                    return Err(Error::config(format!(
                        "arm {:?} needs {} per-model seeds, only {} given",
                        arm.name,
                        arm.schedule.num_models,
                        keys.len()
                    )));
                }
            }
        }
        if let DataSource::Synthetic(g) = &self.data {
            g.validate()?;
        }
        self.layout()?;
        Ok(())
    }

    pub fn layout(&self) -> Result<LayerLayout> {
        let mut widths = vec![self.data.feature_dim()];
        widths.extend_from_slice(&self.hidden_widths);
        widths.push(self.data.num_classes());
        LayerLayout::from_widths(&widths)
    }

    /// The arm used as the template for ablations: `imwa` if present, else the
    /// first arm with more than one model, else the first arm.
    pub fn template_arm(&self) -> &ArmSpec {
        self.arms
            .iter()
            .find(|a| a.name == "imwa")
            .or_else(|| self.arms.iter().find(|a| a.schedule.num_models > 1))
            .unwrap_or(&self.arms[0])
    }

    fn trainer_configs(&self, seed: u64, num_models: usize) -> Vec<TrainerConfig> {
        (0..num_models)
            .map(|m| {
                let key = self.model_keys.as_ref().map_or(m as u64, |k| k[m]);
                TrainerConfig {
                    data_seed: derive_seed(seed, STREAM_DATA_ORDER, key),
                    learning_rate: self.trainer.learning_rate,
                    momentum: self.trainer.momentum,
                    batch_size: self.trainer.batch_size,
                }
            })
            .collect()
    }
}

const STREAM_INIT: u64 = 1;
const STREAM_DATA_ORDER: u64 = 2;

/// SplitMix64 finalizer over `(seed, stream, key)`.
pub fn derive_seed(seed: u64, stream: u64, key: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(key.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(0x94D0_49BB_1331_11EB);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Initial weights used by every arm for this replication seed.
pub fn initial_weights(layout: &LayerLayout, seed: u64) -> WeightVector {
    init_weights(layout, derive_seed(seed, STREAM_INIT, 0))
}

/// FNV-1a over the value bits; identifies weights and datasets in results.
pub fn fingerprint(values: &[f64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub iterations: usize,
    pub averaged_top1: Option<f64>,
    pub individual_top1: Vec<f64>,
    pub distances: Vec<f64>,
    pub wall_clock_secs: f64,
}

impl From<&EpisodeRecord> for EpisodeSummary {
    fn from(r: &EpisodeRecord) -> Self {
        Self {
            episode: r.episode,
            iterations: r.iterations,
            averaged_top1: r.eval.as_ref().map(|e| e.averaged_top1),
            individual_top1: r
                .eval
                .as_ref()
                .map(|e| e.individual_top1.clone())
                .unwrap_or_default(),
            distances: r.distances.clone(),
            wall_clock_secs: r.wall_clock_secs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub arm: String,
    pub seed: u64,
    pub report: Option<EvalReport>,
    pub episodes: Vec<EpisodeSummary>,
    pub probes: Vec<ProbePoint>,
    pub wall_clock_secs: f64,
    pub peak_model_copies: usize,
    pub total_trained_iterations: usize,
    pub init_fingerprint: String,
    pub data_fingerprint: String,
    pub error: Option<String>,
    pub final_theta: Option<WeightVector>,
    pub final_ema: Option<WeightVector>,
}

impl RunResult {
    pub fn top1(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.top1)
    }
}

struct Replicate {
    train: Arc<Dataset>,
    eval: Arc<Dataset>,
    init: WeightVector,
    data_fingerprint: String,
}

fn run_one(plan: &ExperimentPlan, arm: &ArmSpec, seed: u64, rep: &Replicate) -> RunResult {
    let started = Instant::now();
    let schedule = arm.effective_schedule();
    let configs = plan.trainer_configs(seed, schedule.num_models);
    let outcome = run_imwa(
        &rep.init,
        &rep.train,
        &schedule,
        &configs,
        &rep.eval,
        &plan.options,
    )
    .and_then(|o| {
        let report = evaluate(o.final_model(), &rep.eval, rep.train.class_counts())?;
        Ok((o, report))
    });
    let mut result = RunResult {
        arm: arm.name.clone(),
        seed,
        report: None,
        episodes: Vec::new(),
        probes: Vec::new(),
        wall_clock_secs: 0.0,
        peak_model_copies: 0,
        total_trained_iterations: arm.total_trained_iterations(),
        init_fingerprint: fingerprint(rep.init.values()),
        data_fingerprint: rep.data_fingerprint.clone(),
        error: None,
        final_theta: None,
        final_ema: None,
    };
    match outcome {
        Ok((o, report)) => {
            result.report = Some(report);
            result.episodes = o.records.iter().map(EpisodeSummary::from).collect();
            result.probes = o.probes;
            result.peak_model_copies = o.peak_model_copies;
            result.final_theta = Some(o.theta);
            result.final_ema = o.ema;
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result.wall_clock_secs = started.elapsed().as_secs_f64();
    result
}

/// Executes every (arm, seed) pair. Failures are recorded in the result and do
/// not stop the remaining runs. Results are ordered arm-major, then by seed.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<RunResult>> {
    plan.validate()?;
    let layout = plan.layout()?;
    let replicates = plan
        .seeds
        .iter()
        .map(|&seed| {
            let (train, eval) = plan.data.materialize(seed)?;
            let data_fingerprint = fingerprint(train.features());
            Ok(Replicate {
                train,
                eval,
                init: initial_weights(&layout, seed),
                data_fingerprint,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..plan.arms.len())
        .flat_map(|a| (0..plan.seeds.len()).map(move |s| (a, s)))
        .collect();
    let run = |&(a, s): &(usize, usize)| {
        (
            (a, s),
            run_one(plan, &plan.arms[a], plan.seeds[s], &replicates[s]),
        )
    };
    let mut results: Vec<((usize, usize), RunResult)> = if plan.parallel_runs {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };
    results.sort_by_key(|(k, _)| *k);
    Ok(results.into_iter().map(|(_, r)| r).collect())
}

/// Mean and sample standard deviation (`n - 1`; zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Per-seed `arm - baseline` top-1 differences, over seeds where both ran.
pub fn paired_improvements(results: &[RunResult], arm: &str, baseline: &str) -> Vec<f64> {
    results
        .iter()
        .filter(|r| r.arm == arm)
        .filter_map(|r| {
            let b = results
                .iter()
                .find(|b| b.arm == baseline && b.seed == r.seed)?;
            Some(r.top1()? - b.top1()?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub arm: String,
    pub runs: usize,
    pub failures: usize,
    #[serde(with = "crate::serde_nan")]
    pub mean_top1: f64,
    #[serde(with = "crate::serde_nan")]
    pub std_top1: f64,
    /// Paired improvement over the reference arm (the plan's first arm).
    #[serde(with = "crate::serde_nan")]
    pub mean_improvement: f64,
    #[serde(with = "crate::serde_nan")]
    pub std_improvement: f64,
    pub total_trained_iterations: usize,
    pub peak_model_copies: usize,
}

pub fn summarize_arms(arms: &[ArmSpec], results: &[RunResult]) -> Vec<ArmSummary> {
    let reference = arms.first().map(|a| a.name.as_str()).unwrap_or_default();
    arms.iter()
        .map(|arm| {
            let runs: Vec<&RunResult> = results.iter().filter(|r| r.arm == arm.name).collect();
            let top1: Vec<f64> = runs.iter().filter_map(|r| r.top1()).collect();
            let (mean_top1, std_top1) = mean_std(&top1);
            let (mean_improvement, std_improvement) =
                mean_std(&paired_improvements(results, &arm.name, reference));
            ArmSummary {
                arm: arm.name.clone(),
                runs: runs.len(),
                failures: runs.iter().filter(|r| r.error.is_some()).count(),
                mean_top1,
                std_top1,
                mean_improvement,
                std_improvement,
                total_trained_iterations: arm.total_trained_iterations(),
                peak_model_copies: runs.iter().map(|r| r.peak_model_copies).max().unwrap_or(0),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub value: f64,
    pub arm: String,
    pub runs: usize,
    pub failures: usize,
    #[serde(with = "crate::serde_nan")]
    pub mean_top1: f64,
    #[serde(with = "crate::serde_nan")]
    pub std_top1: f64,
    pub total_trained_iterations: usize,
    pub peak_model_copies: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    /// `"E"` or `"M"`.
    pub parameter: String,
    pub rows: Vec<AblationRow>,
    #[serde(skip)]
    pub results: Vec<RunResult>,
}

fn ablate(
    plan: &ExperimentPlan,
    parameter: &str,
    values: &[usize],
    apply: impl Fn(&mut ImwaSchedule, usize),
) -> Result<AblationSummary> {
    if values.is_empty() {
        return Err(Error::config(format!("no {parameter} values to sweep")));
    }
    let template = plan.template_arm().clone();
    let arms: Vec<ArmSpec> = values
        .iter()
        .map(|&v| {
            let mut arm = template.clone();
            arm.name = format!("{parameter}={v}");
            apply(&mut arm.schedule, v);
            arm
        })
        .collect();
    let sweep = ExperimentPlan {
        arms,
        ..plan.clone()
    };
    let results = run_plan(&sweep)?;
    let rows = summarize_arms(&sweep.arms, &results)
        .into_iter()
        .zip(values)
        .map(|(s, &v)| AblationRow {
            value: v as f64,
            arm: s.arm,
            runs: s.runs,
            failures: s.failures,
            mean_top1: s.mean_top1,
            std_top1: s.std_top1,
            total_trained_iterations: s.total_trained_iterations,
            peak_model_copies: s.peak_model_copies,
        })
        .collect();
    Ok(AblationSummary {
        parameter: parameter.to_string(),
        rows,
        results,
    })
}

/// One IMWA arm per episode count, all other settings from the template arm.
pub fn ablate_e(plan: &ExperimentPlan, values: &[usize]) -> Result<AblationSummary> {
    ablate(plan, "E", values, |s, v| s.num_episodes = v)
}

/// One IMWA arm per model count, all other settings from the template arm.
pub fn ablate_m(plan: &ExperimentPlan, values: &[usize]) -> Result<AblationSummary> {
    ablate(plan, "M", values, |s, v| s.num_models = v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub gamma: f64,
    pub head_tail_ratio: f64,
    pub runs: usize,
    #[serde(with = "crate::serde_nan")]
    pub baseline_mean: f64,
    #[serde(with = "crate::serde_nan")]
    pub baseline_std: f64,
    #[serde(with = "crate::serde_nan")]
    pub imwa_mean: f64,
    #[serde(with = "crate::serde_nan")]
    pub imwa_std: f64,
    /// Mean of per-seed `imwa - baseline`.
    #[serde(with = "crate::serde_nan")]
    pub improvement_mean: f64,
    #[serde(with = "crate::serde_nan")]
    pub improvement_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSummary {
    pub rows: Vec<GammaRow>,
    #[serde(skip)]
    pub results: Vec<(f64, Vec<RunResult>)>,
}

pub const BASELINE_ARM: &str = "baseline";

/// For each imbalance ratio: regenerate the data, run a single-model baseline
/// and the template IMWA arm, and report the paired improvement.
pub fn ablate_gamma(plan: &ExperimentPlan, gammas: &[f64]) -> Result<GammaSummary> {
    let DataSource::Synthetic(base) = &plan.data else {
        return Err(Error::config(
            "imbalance-ratio sweeps need a synthetic dataset",
        ));
    };
    if gammas.is_empty() {
        return Err(Error::config("no imbalance ratios to sweep"));
    }
    let template = plan.template_arm().clone();
    let imwa_name = if template.name == BASELINE_ARM {
        "imwa".to_string()
    } else {
        template.name.clone()
    };
    let mut rows = Vec::with_capacity(gammas.len());
    let mut all = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let spec = LongTailSpec {
            imbalance_ratio: gamma,
            ..base.spec
        };
        spec.validate()?;
        let mixture = GaussianMixture { spec, ..*base };
        let sweep = ExperimentPlan {
            arms: vec![
                ArmSpec::baseline(BASELINE_ARM, &template.schedule)
                    .with_multiplier(template.iteration_multiplier),
                ArmSpec {
                    name: imwa_name.clone(),
                    ..template.clone()
                },
            ],
            data: DataSource::Synthetic(mixture),
            ..plan.clone()
        };
        let results = run_plan(&sweep)?;
        let top1_of = |arm: &str| -> Vec<f64> {
            results
                .iter()
                .filter(|r| r.arm == arm)
                .filter_map(|r| r.top1())
                .collect()
        };
        let (baseline_mean, baseline_std) = mean_std(&top1_of(BASELINE_ARM));
        let (imwa_mean, imwa_std) = mean_std(&top1_of(&imwa_name));
        let improvements = paired_improvements(&results, &imwa_name, BASELINE_ARM);
        let (improvement_mean, improvement_std) = mean_std(&improvements);
        let counts = crate::data::class_counts(&spec)?;
        rows.push(GammaRow {
            gamma,
            head_tail_ratio: counts[0] as f64 / counts[counts.len() - 1] as f64,
            runs: improvements.len(),
            baseline_mean,
            baseline_std,
            imwa_mean,
            imwa_std,
            improvement_mean,
            improvement_std,
        });
        all.push((gamma, results));
    }
    Ok(GammaSummary { rows, results: all })
}

/// A plot-ready `(x, y, std)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub x: f64,
    pub y: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<SeriesPoint>,
}

fn collect_series(
    runs: &[&RunResult],
    points: impl Fn(&RunResult) -> Vec<(f64, f64)>,
) -> Vec<SeriesPoint> {
    let per_run: Vec<Vec<(f64, f64)>> = runs.iter().map(|r| points(r)).collect();
    let len = per_run.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let ys: Vec<f64> = per_run.iter().map(|p| p[i].1).collect();
            let (y, std) = mean_std(&ys);
            SeriesPoint {
                x: per_run[0][i].0,
                y,
                std,
            }
        })
        .collect()
}

fn successful<'a>(results: &'a [RunResult], arm: &str) -> Vec<&'a RunResult> {
    results
        .iter()
        .filter(|r| r.arm == arm && r.error.is_none())
        .collect()
}

/// Curves for one arm across seeds: averaged-model accuracy and mean pairwise
/// distance per episode, plus the probe gain of the average over the best
/// individual when probes were recorded.
pub fn arm_series(results: &[RunResult], arm: &str) -> Vec<Series> {
    let runs = successful(results, arm);
    if runs.is_empty() {
        return Vec::new();
    }
    let cumulative = |r: &RunResult| -> Vec<f64> {
        r.episodes
            .iter()
            .scan(0usize, |acc, e| {
                *acc += e.iterations;
                Some(*acc as f64)
            })
            .collect()
    };
    let mut out = vec![
        Series {
            name: format!("{arm}/averaged_top1"),
            x_label: "iteration".into(),
            y_label: "top1".into(),
            points: collect_series(&runs, |r| {
                cumulative(r)
                    .into_iter()
                    .zip(&r.episodes)
                    .filter_map(|(x, e)| e.averaged_top1.map(|y| (x, y)))
                    .collect()
            }),
        },
        Series {
            name: format!("{arm}/pairwise_l2"),
            x_label: "iteration".into(),
            y_label: "mean pairwise L2 distance".into(),
            points: collect_series(&runs, |r| {
                cumulative(r)
                    .into_iter()
                    .zip(&r.episodes)
                    .map(|(x, e)| {
                        let d = if e.distances.is_empty() {
                            0.0
                        } else {
                            e.distances.iter().sum::<f64>() / e.distances.len() as f64
                        };
                        (x, d)
                    })
                    .collect()
            }),
        },
    ];
    if runs.iter().all(|r| !r.probes.is_empty()) {
        out.push(Series {
            name: format!("{arm}/probe_gain_over_best"),
            x_label: "iteration".into(),
            y_label: "averaged top1 - best individual top1".into(),
            points: collect_series(&runs, |r| {
                r.probes
                    .iter()
                    .map(|p| (p.iteration as f64, p.averaged_top1 - p.best_individual_top1))
                    .collect()
            }),
        });
    }
    out
}

impl AblationSummary {
    pub fn series(&self) -> Series {
        Series {
            name: format!("ablation/{}", self.parameter),
            x_label: self.parameter.clone(),
            y_label: "top1".into(),
            points: self
                .rows
                .iter()
                .map(|r| SeriesPoint {
                    x: r.value,
                    y: r.mean_top1,
                    std: r.std_top1,
                })
                .collect(),
        }
    }

    pub fn to_table(&self) -> TextTable {
        TextTable {
            headers: vec![
                self.parameter.clone(),
                "runs".into(),
                "top1 mean".into(),
                "top1 std".into(),
                "trained iters".into(),
                "peak copies".into(),
            ],
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.value.to_string(),
                        format!("{}{}", r.runs, failure_note(r.failures)),
                        format!("{:.4}", r.mean_top1),
                        format!("{:.4}", r.std_top1),
                        r.total_trained_iterations.to_string(),
                        r.peak_model_copies.to_string(),
                    ]
                })
                .collect(),
        }
    }
}

impl GammaSummary {
    pub fn series(&self) -> Series {
        Series {
            name: "ablation/gamma_improvement".into(),
            x_label: "imbalance ratio".into(),
            y_label: "paired top1 improvement".into(),
            points: self
                .rows
                .iter()
                .map(|r| SeriesPoint {
                    x: r.gamma,
                    y: r.improvement_mean,
                    std: r.improvement_std,
                })
                .collect(),
        }
    }

    pub fn to_table(&self) -> TextTable {
        TextTable {
            headers: vec![
                "gamma".into(),
                "n1/nC".into(),
                "runs".into(),
                "baseline".into(),
                "imwa".into(),
                "improvement".into(),
            ],
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.gamma.to_string(),
                        format!("{:.2}", r.head_tail_ratio),
                        r.runs.to_string(),
                        format!("{:.4} ± {:.4}", r.baseline_mean, r.baseline_std),
                        format!("{:.4} ± {:.4}", r.imwa_mean, r.imwa_std),
                        format!("{:+.4} ± {:.4}", r.improvement_mean, r.improvement_std),
                    ]
                })
                .collect(),
        }
    }
}

pub fn arm_table(summaries: &[ArmSummary]) -> TextTable {
    TextTable {
        headers: vec![
            "arm".into(),
            "runs".into(),
            "top1".into(),
            "vs first arm".into(),
            "trained iters".into(),
            "peak copies".into(),
        ],
        rows: summaries
            .iter()
            .map(|s| {
                vec![
                    s.arm.clone(),
                    format!("{}{}", s.runs, failure_note(s.failures)),
                    format!("{:.4} ± {:.4}", s.mean_top1, s.std_top1),
                    format!("{:+.4} ± {:.4}", s.mean_improvement, s.std_improvement),
                    s.total_trained_iterations.to_string(),
                    s.peak_model_copies.to_string(),
                ]
            })
            .collect(),
    }
}

fn failure_note(failures: usize) -> String {
    if failures == 0 {
        String::new()
    } else {
        format!(" ({failures} failed)")
    }
}

/// Left-aligned, space-padded plain-text table.
#[derive(Debug, Clone, PartialEq)]
pub struct TextTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl std::fmt::Display for TextTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let cols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |f: &mut std::fmt::Formatter<'_>, cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect();
            writeln!(f, "{}", padded.join("  ").trim_end())
        };
        line(f, &self.headers)?;
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        line(f, &rule)?;
        for row in &self.rows {
            let mut row = row.clone();
            row.resize(cols, String::new());
            line(f, &row)?;
        }
        Ok(())
    }
}

/// Desk-scale comparison fixture: ten Gaussian classes in 16 dimensions with a
/// 10:1 long tail, a 16-64-10 MLP, and five arms sharing every seed.
pub mod fixture {
    use super::*;

    pub const NUM_CLASSES: usize = 10;
    pub const FEATURE_DIM: usize = 16;
    pub const HEAD_COUNT: usize = 500;
    pub const IMBALANCE_RATIO: f64 = 10.0;
    pub const CLASS_SEP: f64 = 3.0;
    pub const HIDDEN: usize = 64;
    pub const TOTAL_ITERATIONS: usize = 4000;
    pub const EPISODES: usize = 20;
    pub const MODELS: usize = 2;

    pub fn mixture() -> GaussianMixture {
        GaussianMixture::new(
            LongTailSpec {
                num_classes: NUM_CLASSES,
                head_count: HEAD_COUNT,
                imbalance_ratio: IMBALANCE_RATIO,
            },
            FEATURE_DIM,
            CLASS_SEP,
        )
    }

    pub fn imwa_schedule() -> ImwaSchedule {
        ImwaSchedule {
            total_iterations: TOTAL_ITERATIONS,
            num_episodes: EPISODES,
            num_models: MODELS,
            ..ImwaSchedule::default()
        }
    }

    /// baseline, baseline-2xT, vanilla-mwa, imwa, imwa-ema.
    pub fn arms() -> Vec<ArmSpec> {
        let imwa = imwa_schedule();
        vec![
            ArmSpec::baseline(BASELINE_ARM, &imwa),
            ArmSpec::baseline("baseline-2xT", &imwa).with_multiplier(2),
            ArmSpec::new(
                "vanilla-mwa",
                ImwaSchedule {
                    num_episodes: 1,
                    ..imwa
                },
            ),
            ArmSpec::new("imwa", imwa),
            ArmSpec::new("imwa-ema", imwa.with_ema(crate::imwa::DEFAULT_EMA_LAMBDA)),
        ]
    }

    pub fn plan() -> ExperimentPlan {
        ExperimentPlan {
            arms: arms(),
            data: DataSource::Synthetic(mixture()),
            hidden_widths: vec![HIDDEN],
            seeds: (0..10).collect(),
            trainer: TrainerTemplate::default(),
            model_keys: None,
            options: RunOptions {
                keep_episode_weights: false,
                ..RunOptions::default()
            },
            parallel_runs: false,
        }
    }
}
