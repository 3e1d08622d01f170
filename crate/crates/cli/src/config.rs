//! Declarative run configuration.
//!
//! Values come from three layers: command-line flags, then the TOML file, then
//! built-in defaults. Every constraint is checked here, before anything runs,
//! and violations name the offending field path.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use imwa_core::data::{ingest_csv, GaussianMixture, LabelColumn, LongTailSpec};
use imwa_core::harness::{ArmSpec, DataSource, ExperimentPlan, TrainerTemplate, BASELINE_ARM};
use imwa_core::imwa::{ExecutionMode, ImwaSchedule, RunOptions, DEFAULT_EMA_LAMBDA};
use serde::{Deserialize, Serialize};

/// The TOML file. Every field is optional; unknown keys are errors.
#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: Option<String>,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub trainer: TrainerSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub num_classes: Option<usize>,
    pub head_count: Option<usize>,
    pub imbalance_ratio: Option<f64>,
    pub feature_dim: Option<usize>,
    pub class_sep: Option<f64>,
    pub test_per_class: Option<usize>,
    /// Training CSV; when set, the synthetic generator is not used.
    pub csv_path: Option<PathBuf>,
    /// Evaluation CSV; defaults to the training CSV.
    pub eval_path: Option<PathBuf>,
    pub label_column: Option<String>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub hidden: Option<Vec<usize>>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub total_iterations: Option<usize>,
    pub episodes: Option<usize>,
    pub num_models: Option<usize>,
    pub ema_lambda: Option<f64>,
    pub use_ema: Option<bool>,
    pub carry_momentum: Option<bool>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerSection {
    pub learning_rate: Option<f64>,
    pub momentum: Option<f64>,
    pub batch_size: Option<usize>,
    /// Data-order keys, one per model.
    pub model_seeds: Option<Vec<u64>>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub arms: Option<Vec<ArmEntry>>,
    pub seeds: Option<Vec<u64>>,
    /// Run (arm, seed) jobs on all cores.
    pub parallel: Option<bool>,
    /// Train the models of an episode concurrently.
    pub concurrent_trainers: Option<bool>,
    pub probe_every: Option<usize>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    /// Write final weights as checkpoints.
    pub checkpoints: Option<bool>,
    /// Write plot-ready series.
    pub series: Option<bool>,
}

/// An arm is either a preset name or an explicit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArmEntry {
    Preset(String),
    Custom(CustomArm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomArm {
    pub name: String,
    pub episodes: Option<usize>,
    pub num_models: Option<usize>,
    pub use_ema: Option<bool>,
    pub iteration_multiplier: Option<usize>,
}

pub const PRESET_ARMS: [&str; 5] = [
    BASELINE_ARM,
    "baseline-2xT",
    "vanilla-mwa",
    "imwa",
    "imwa-ema",
];

/// Flags that mirror the config file, kebab-cased. Flags win over the file.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Run name; outputs go to <output-dir>/<name>.
    #[arg(long)]
    pub name: Option<String>,

    #[arg(long)]
    pub num_classes: Option<usize>,
    #[arg(long)]
    pub head_count: Option<usize>,
    #[arg(long)]
    pub imbalance_ratio: Option<f64>,
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long)]
    pub class_sep: Option<f64>,
    #[arg(long)]
    pub test_per_class: Option<usize>,
    #[arg(long)]
    pub csv_path: Option<PathBuf>,
    #[arg(long)]
    pub eval_path: Option<PathBuf>,
    /// `last`, a zero-based column index, or a header name.
    #[arg(long)]
    pub label_column: Option<String>,

    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,

    #[arg(long)]
    pub total_iterations: Option<usize>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub num_models: Option<usize>,
    #[arg(long)]
    pub ema_lambda: Option<f64>,
    #[arg(long)]
    pub use_ema: Option<bool>,
    #[arg(long)]
    pub carry_momentum: Option<bool>,

    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub model_seeds: Option<Vec<u64>>,

    /// Preset arm names, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub arms: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub parallel: Option<bool>,
    #[arg(long)]
    pub concurrent_trainers: Option<bool>,
    #[arg(long)]
    pub probe_every: Option<usize>,

    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub checkpoints: Option<bool>,
    #[arg(long)]
    pub series: Option<bool>,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub name: String,
    pub dataset: DatasetConfig,
    pub hidden: Vec<usize>,
    pub schedule: ImwaSchedule,
    pub trainer: TrainerTemplate,
    pub model_seeds: Option<Vec<u64>>,
    pub arms: Vec<ArmSpec>,
    pub seeds: Vec<u64>,
    pub parallel: bool,
    pub concurrent_trainers: bool,
    pub probe_every: Option<usize>,
    pub output_dir: PathBuf,
    pub checkpoints: bool,
    pub series: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetConfig {
    Synthetic(GaussianMixture),
    Csv {
        path: PathBuf,
        eval_path: PathBuf,
        label_column: String,
    },
}

pub mod defaults {
    pub const NAME: &str = "run";
    pub const NUM_CLASSES: usize = 10;
    pub const HEAD_COUNT: usize = 500;
    pub const IMBALANCE_RATIO: f64 = 10.0;
    pub const FEATURE_DIM: usize = 16;
    pub const CLASS_SEP: f64 = 3.0;
    pub const HIDDEN: usize = 64;
    pub const TOTAL_ITERATIONS: usize = 4000;
    pub const EPISODES: usize = 20;
    pub const NUM_MODELS: usize = 2;
    pub const LEARNING_RATE: f64 = 0.05;
    pub const MOMENTUM: f64 = 0.9;
    pub const BATCH_SIZE: usize = 32;
    pub const OUTPUT_DIR: &str = "runs";
}

pub fn load_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn require(cond: bool, field: &str, bound: &str, got: impl std::fmt::Display) -> Result<()> {
    if !cond {
        bail!("{field}: must be {bound} (got {got})");
    }
    Ok(())
}

fn require_file(path: &Path, field: &str) -> Result<()> {
    if !path.is_file() {
        bail!("{field}: file {} does not exist", path.display());
    }
    Ok(())
}

/// Merges flags over the file over defaults and validates the result.
pub fn resolve(flags: &Overrides) -> Result<RunConfig> {
    let file = match &flags.config {
        Some(p) => load_file(p)?,
        None => ConfigFile::default(),
    };
    resolve_with(flags, file)
}

pub fn resolve_with(flags: &Overrides, file: ConfigFile) -> Result<RunConfig> {
    use defaults as d;
    let f = flags.clone();

    let name = pick(f.name, file.name, d::NAME.to_string());
    require(
        !name.is_empty() && !name.contains(['/', '\\']) && name != "." && name != "..",
        "name",
        "a plain directory name",
        format!("{name:?}"),
    )?;

    let ds = file.dataset;
    let csv_path = f.csv_path.or(ds.csv_path);
    let dataset = match csv_path {
        Some(path) => {
            require_file(&path, "dataset.csv_path")?;
            let eval_path = f.eval_path.or(ds.eval_path).unwrap_or_else(|| path.clone());
            require_file(&eval_path, "dataset.eval_path")?;
            DatasetConfig::Csv {
                path,
                eval_path,
                label_column: pick(f.label_column, ds.label_column, "last".into()),
            }
        }
        None => {
            let num_classes = pick(f.num_classes, ds.num_classes, d::NUM_CLASSES);
            let head_count = pick(f.head_count, ds.head_count, d::HEAD_COUNT);
            let imbalance_ratio = pick(f.imbalance_ratio, ds.imbalance_ratio, d::IMBALANCE_RATIO);
            let feature_dim = pick(f.feature_dim, ds.feature_dim, d::FEATURE_DIM);
            let class_sep = pick(f.class_sep, ds.class_sep, d::CLASS_SEP);
            let test_per_class = pick(
                f.test_per_class,
                ds.test_per_class,
                imwa_core::data::DEFAULT_TEST_PER_CLASS,
            );
            require(num_classes >= 2, "dataset.num_classes", ">= 2", num_classes)?;
            require(head_count >= 1, "dataset.head_count", ">= 1", head_count)?;
            require(
                imbalance_ratio.is_finite() && imbalance_ratio >= 1.0,
                "dataset.imbalance_ratio",
                ">= 1",
                imbalance_ratio,
            )?;
            require(feature_dim >= 2, "dataset.feature_dim", ">= 2", feature_dim)?;
            require(
                class_sep.is_finite() && class_sep > 0.0,
                "dataset.class_sep",
                "> 0",
                class_sep,
            )?;
            require(
                test_per_class >= 1,
                "dataset.test_per_class",
                ">= 1",
                test_per_class,
            )?;
            let spec = LongTailSpec {
                num_classes,
                head_count,
                imbalance_ratio,
            };
            imwa_core::data::class_counts(&spec)
                .map_err(|e| anyhow::anyhow!("dataset.head_count: {e}"))?;
            DatasetConfig::Synthetic(GaussianMixture {
                spec,
                feature_dim,
                class_sep,
                test_per_class,
            })
        }
    };

    let hidden = pick(f.hidden, file.model.hidden, vec![d::HIDDEN]);
    if let Some(i) = hidden.iter().position(|&w| w == 0) {
        bail!("model.hidden[{i}]: must be >= 1 (got 0)");
    }

    let s = file.schedule;
    let total_iterations = pick(f.total_iterations, s.total_iterations, d::TOTAL_ITERATIONS);
    let episodes = pick(f.episodes, s.episodes, d::EPISODES);
    let num_models = pick(f.num_models, s.num_models, d::NUM_MODELS);
    let ema_lambda = pick(f.ema_lambda, s.ema_lambda, DEFAULT_EMA_LAMBDA);
    let schedule = ImwaSchedule {
        total_iterations,
        num_episodes: episodes,
        num_models,
        use_ema: pick(f.use_ema, s.use_ema, false),
        ema_lambda,
        carry_momentum: pick(f.carry_momentum, s.carry_momentum, true),
    };
    require(
        total_iterations >= 1,
        "schedule.total_iterations",
        ">= 1",
        total_iterations,
    )?;
    require(
        (1..=total_iterations).contains(&episodes),
        "schedule.episodes",
        &format!("in [1, total_iterations = {total_iterations}] (E >= 1, E <= T)"),
        episodes,
    )?;
    require(
        num_models >= 1,
        "schedule.num_models",
        ">= 1 (M >= 1)",
        num_models,
    )?;
    require(
        (0.0..=1.0).contains(&ema_lambda),
        "schedule.ema_lambda",
        "in [0, 1]",
        ema_lambda,
    )?;

    let t = file.trainer;
    let trainer = TrainerTemplate {
        learning_rate: pick(f.learning_rate, t.learning_rate, d::LEARNING_RATE),
        momentum: pick(f.momentum, t.momentum, d::MOMENTUM),
        batch_size: pick(f.batch_size, t.batch_size, d::BATCH_SIZE),
    };
    require(
        trainer.learning_rate.is_finite() && trainer.learning_rate > 0.0,
        "trainer.learning_rate",
        "> 0",
        trainer.learning_rate,
    )?;
    require(
        (0.0..1.0).contains(&trainer.momentum),
        "trainer.momentum",
        "in [0, 1)",
        trainer.momentum,
    )?;
    require(
        trainer.batch_size >= 1,
        "trainer.batch_size",
        ">= 1",
        trainer.batch_size,
    )?;
    if let DatasetConfig::Synthetic(g) = &dataset {
        let n = imwa_core::data::class_counts(&g.spec)?
            .iter()
            .sum::<usize>();
        require(
            trainer.batch_size <= n,
            "trainer.batch_size",
            &format!("<= the training set size {n}"),
            trainer.batch_size,
        )?;
    }
    let model_seeds = f.model_seeds.or(t.model_seeds);
    if let Some(seeds) = &model_seeds {
        for (i, s) in seeds.iter().enumerate() {
            if seeds[..i].contains(s) {
                bail!("trainer.model_seeds[{i}]: duplicate seed {s}; per-model seeds must be distinct");
            }
        }
    }

    let e = file.experiment;
    let arm_entries = match f.arms {
        Some(names) => names.into_iter().map(ArmEntry::Preset).collect(),
        None => e.arms.unwrap_or_else(|| {
            vec![
                ArmEntry::Preset(BASELINE_ARM.into()),
                ArmEntry::Preset("imwa".into()),
            ]
        }),
    };
    let arms = arm_entries
        .iter()
        .enumerate()
        .map(|(i, a)| build_arm(a, &schedule, i))
        .collect::<Result<Vec<_>>>()?;
    if arms.is_empty() {
        bail!("experiment.arms: must list at least one arm");
    }
    for (i, arm) in arms.iter().enumerate() {
        if arms[..i].iter().any(|a| a.name == arm.name) {
            bail!("experiment.arms[{i}]: duplicate arm name {:?}", arm.name);
        }
        let needed = arm.schedule.num_models;
        if let Some(seeds) = &model_seeds {
            require(
                seeds.len() >= needed,
                "trainer.model_seeds",
                &format!("at least {needed} entries for arm {:?}", arm.name),
                seeds.len(),
            )?;
        }
    }
    let seeds = pick(f.seeds, e.seeds, vec![0]);
    require(!seeds.is_empty(), "experiment.seeds", "non-empty", "[]")?;
    let probe_every = f.probe_every.or(e.probe_every);
    if let Some(p) = probe_every {
        require(p >= 1, "experiment.probe_every", ">= 1", p)?;
    }

    let o = file.output;
    Ok(RunConfig {
        name,
        dataset,
        hidden,
        schedule,
        trainer,
        model_seeds,
        arms,
        seeds,
        parallel: pick(f.parallel, e.parallel, false),
        concurrent_trainers: pick(f.concurrent_trainers, e.concurrent_trainers, false),
        probe_every,
        output_dir: pick(f.output_dir, o.directory, PathBuf::from(d::OUTPUT_DIR)),
        checkpoints: pick(f.checkpoints, o.checkpoints, true),
        series: pick(f.series, o.series, true),
    })
}

fn build_arm(entry: &ArmEntry, schedule: &ImwaSchedule, index: usize) -> Result<ArmSpec> {
    let field = format!("experiment.arms[{index}]");
    let arm = match entry {
        ArmEntry::Preset(name) => match name.as_str() {
            BASELINE_ARM => ArmSpec::baseline(BASELINE_ARM, schedule),
            "baseline-2xT" => ArmSpec::baseline("baseline-2xT", schedule).with_multiplier(2),
            "vanilla-mwa" => ArmSpec::new(
                "vanilla-mwa",
                ImwaSchedule {
                    num_episodes: 1,
                    ..*schedule
                },
            ),
            "imwa" => ArmSpec::new("imwa", *schedule),
            "imwa-ema" => ArmSpec::new(
                "imwa-ema",
                ImwaSchedule {
                    use_ema: true,
                    ..*schedule
                },
            ),
            other => bail!(
                "{field}: unknown arm preset {other:?} (expected one of {})",
                PRESET_ARMS.join(", ")
            ),
        },
        ArmEntry::Custom(c) => {
            let arm = ArmSpec::new(
                c.name.clone(),
                ImwaSchedule {
                    num_episodes: c.episodes.unwrap_or(schedule.num_episodes),
                    num_models: c.num_models.unwrap_or(schedule.num_models),
                    use_ema: c.use_ema.unwrap_or(schedule.use_ema),
                    ..*schedule
                },
            )
            .with_multiplier(c.iteration_multiplier.unwrap_or(1));
            require(
                !c.name.is_empty(),
                &format!("{field}.name"),
                "non-empty",
                "\"\"",
            )?;
            require(
                arm.iteration_multiplier >= 1,
                &format!("{field}.iteration_multiplier"),
                ">= 1",
                arm.iteration_multiplier,
            )?;
            require(
                arm.schedule.num_models >= 1,
                &format!("{field}.num_models"),
                ">= 1",
                arm.schedule.num_models,
            )?;
            arm
        }
    };
    let effective = arm.effective_schedule();
    require(
        (1..=effective.total_iterations).contains(&effective.num_episodes),
        &format!("{field}.episodes"),
        &format!("in [1, {}]", effective.total_iterations),
        effective.num_episodes,
    )?;
    Ok(arm)
}

impl RunConfig {
    pub fn data_source(&self) -> Result<DataSource> {
        Ok(match &self.dataset {
            DatasetConfig::Synthetic(g) => DataSource::Synthetic(*g),
            DatasetConfig::Csv {
                path,
                eval_path,
                label_column,
            } => {
                let column: LabelColumn = label_column.parse().expect("infallible");
                let train = ingest_csv(path, &column)?;
                let eval = ingest_csv(eval_path, &column)?;
                if eval.feature_dim() != train.feature_dim() {
                    bail!(
                        "dataset.eval_path: {} features, training data has {}",
                        eval.feature_dim(),
                        train.feature_dim()
                    );
                }
                require(
                    self.trainer.batch_size <= train.len(),
                    "trainer.batch_size",
                    &format!("<= the training set size {}", train.len()),
                    self.trainer.batch_size,
                )?;
                DataSource::Fixed {
                    train: Arc::new(train),
                    eval: Arc::new(eval),
                }
            }
        })
    }

    pub fn plan(&self) -> Result<ExperimentPlan> {
        Ok(ExperimentPlan {
            arms: self.arms.clone(),
            data: self.data_source()?,
            hidden_widths: self.hidden.clone(),
            seeds: self.seeds.clone(),
            trainer: self.trainer,
            model_keys: self.model_seeds.clone(),
            options: RunOptions {
                mode: if self.concurrent_trainers {
                    ExecutionMode::Concurrent
                } else {
                    ExecutionMode::Serial
                },
                evaluate_episodes: true,
                keep_episode_weights: false,
                probe_every: self.probe_every,
            },
            parallel_runs: self.parallel,
        })
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(toml_text: &str) -> Result<ConfigFile> {
        Ok(toml::from_str(toml_text)?)
    }

    #[test]
    fn empty_config_gives_documented_defaults() {
        let c = resolve_with(&Overrides::default(), ConfigFile::default()).unwrap();
        assert_eq!(c.schedule.num_episodes, 20);
        assert_eq!(c.schedule.num_models, 2);
        assert_eq!(c.schedule.total_iterations, 4000);
        assert!(!c.schedule.use_ema);
        assert_eq!(c.trainer.batch_size, 32);
        assert_eq!(c.hidden, vec![64]);
        assert_eq!(c.seeds, vec![0]);
        let names: Vec<&str> = c.arms.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["baseline", "imwa"]);
    }

    #[test]
    fn flags_override_file() {
        let file = parse("[schedule]\nepisodes = 20\nnum_models = 3\n").unwrap();
        let flags = Overrides {
            episodes: Some(5),
            ..Overrides::default()
        };
        let c = resolve_with(&flags, file).unwrap();
        assert_eq!(c.schedule.num_episodes, 5);
        assert_eq!(c.schedule.num_models, 3);
    }

    #[test]
    fn zero_models_cites_the_bound() {
        let flags = Overrides {
            num_models: Some(0),
            ..Overrides::default()
        };
        let err = resolve_with(&flags, ConfigFile::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("schedule.num_models"), "{err}");
        assert!(err.contains("M >= 1"), "{err}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse("[schedule]\nepisodez = 3\n").unwrap_err();
        assert!(format!("{err:#}").contains("episodez"), "{err:#}");
        let err = parse("bogus = 1\n").unwrap_err();
        assert!(format!("{err:#}").contains("bogus"), "{err:#}");
    }

    #[test]
    fn episodes_beyond_iterations_are_rejected() {
        let file = parse("[schedule]\ntotal_iterations = 10\nepisodes = 11\n").unwrap();
        let err = resolve_with(&Overrides::default(), file)
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("schedule.episodes"), "{err}");
    }

    #[test]
    fn custom_and_preset_arms() {
        let file = parse(
            r#"
            [experiment]
            arms = ["baseline", { name = "wide", num_models = 4, episodes = 5 }, "imwa-ema"]
            "#,
        )
        .unwrap();
        let c = resolve_with(&Overrides::default(), file).unwrap();
        assert_eq!(c.arms[1].schedule.num_models, 4);
        assert_eq!(c.arms[1].schedule.num_episodes, 5);
        assert!(c.arms[2].schedule.use_ema);
        let file = parse("[experiment]\narms = [\"nope\"]\n").unwrap();
        let err = resolve_with(&Overrides::default(), file)
            .unwrap_err()
            .to_string();
        assert!(err.contains("experiment.arms[0]"), "{err}");
    }

    #[test]
    fn missing_csv_is_reported_at_parse_time() {
        let flags = Overrides {
            csv_path: Some("/definitely/not/here.csv".into()),
            ..Overrides::default()
        };
        let err = resolve_with(&flags, ConfigFile::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("dataset.csv_path"), "{err}");
    }

    #[test]
    fn duplicate_model_seeds_are_rejected() {
        let flags = Overrides {
            model_seeds: Some(vec![4, 4]),
            ..Overrides::default()
        };
        assert!(resolve_with(&flags, ConfigFile::default()).is_err());
    }

    #[test]
    fn unreachable_tail_count_is_rejected() {
        let file = parse("[dataset]\nhead_count = 10\nimbalance_ratio = 100.0\n").unwrap();
        let err = resolve_with(&Overrides::default(), file)
            .unwrap_err()
            .to_string();
        assert!(err.contains("increase head_count"), "{err}");
    }

    #[test]
    fn resolved_config_round_trips_through_toml() {
        let c = resolve_with(&Overrides::default(), ConfigFile::default()).unwrap();
        let text = toml::to_string(&c).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
