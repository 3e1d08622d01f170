use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use imwa_core::checkpoint;
use imwa_core::data::export_csv;
use imwa_core::harness::{
    ablate_e, ablate_gamma, ablate_m, arm_series, arm_table, run_plan, summarize_arms, DataSource,
    RunResult, Series, TextTable,
};
use imwa_core::imwa::pairwise_l2;
use imwa_core::results::{episode_log, to_jsonl, ResultRecord, RunRecord};
use serde::Serialize;

use crate::config::{resolve, Overrides, RunConfig};

pub enum Sweep {
    Episodes(Vec<usize>),
    Models(Vec<usize>),
    Gamma(Vec<f64>),
}

struct RunDir {
    root: PathBuf,
}

impl RunDir {
    const PARTS: [&'static str; 3] = ["results", "checkpoints", "logs"];

    /// Creates `<output>/<name>/{results,checkpoints,logs}`, refusing to reuse
    /// an existing run directory unless `force` is set.
    fn prepare(cfg: &RunConfig, force: bool) -> Result<Self> {
        let root = cfg.run_dir();
        if root.exists() {
            if !force {
                bail!(
                    "output directory {} already exists; pass --force to overwrite it",
                    root.display()
                );
            }
            for part in Self::PARTS {
                let p = root.join(part);
                if p.exists() {
                    fs::remove_dir_all(&p)
                        .with_context(|| format!("cannot clear {}", p.display()))?;
                }
            }
        }
        for part in Self::PARTS {
            let p = root.join(part);
            fs::create_dir_all(&p).with_context(|| format!("cannot create {}", p.display()))?;
        }
        let dir = Self { root };
        dir.write("config.toml", &toml::to_string(cfg)?)?;
        Ok(dir)
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn write(&self, rel: &str, contents: &str) -> Result<()> {
        let p = self.path(rel);
        fs::write(&p, contents).with_context(|| format!("cannot write {}", p.display()))
    }

    fn write_jsonl<T: Serialize>(&self, rel: &str, records: &[T]) -> Result<()> {
        self.write(rel, &to_jsonl(records)?)
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._=-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_checkpoints(dir: &RunDir, results: &[RunResult]) -> Result<()> {
    for r in results {
        let stem = format!("{}-seed{}", file_stem(&r.arm), r.seed);
        if let Some(theta) = &r.final_theta {
            checkpoint::save(theta, &dir.path(&format!("checkpoints/{stem}.theta.imwa")))?;
        }
        if let Some(ema) = &r.final_ema {
            checkpoint::save(ema, &dir.path(&format!("checkpoints/{stem}.ema.imwa")))?;
        }
    }
    Ok(())
}

fn report_failures(results: &[RunResult]) -> ExitCode {
    let failed: Vec<&RunResult> = results.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!(
            "error: run {} seed {} failed: {}",
            r.arm,
            r.seed,
            r.error.as_deref().unwrap_or_default()
        );
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

pub fn run(overrides: &Overrides, force: bool) -> Result<ExitCode> {
    let cfg = resolve(overrides)?;
    let plan = cfg.plan()?;
    let dir = RunDir::prepare(&cfg, force)?;
    let results = run_plan(&plan)?;

    let summaries = summarize_arms(&plan.arms, &results);
    let mut records: Vec<ResultRecord> = results
        .iter()
        .map(|r| ResultRecord::Run(r.into()))
        .collect();
    records.push(ResultRecord::ArmSummary {
        arms: summaries.clone(),
    });
    dir.write_jsonl("results/results.jsonl", &records)?;
    dir.write("results/summary.txt", &arm_table(&summaries).to_string())?;
    if cfg.series {
        let series: Vec<Series> = plan
            .arms
            .iter()
            .flat_map(|a| arm_series(&results, &a.name))
            .collect();
        dir.write_jsonl("results/series.jsonl", &series)?;
    }
    dir.write_jsonl("logs/episodes.jsonl", &episode_log(&results))?;
    if cfg.checkpoints {
        write_checkpoints(&dir, &results)?;
    }

    let reference = &plan.arms[0].name;
    for s in &summaries {
        println!(
            "{}: top1 {:.4} ± {:.4} over {} runs, {:+.4} vs {reference}, {} trained iterations",
            s.arm, s.mean_top1, s.std_top1, s.runs, s.mean_improvement, s.total_trained_iterations
        );
    }
    println!("results written to {}", dir.root.display());
    Ok(report_failures(&results))
}

pub fn ablate(overrides: &Overrides, force: bool, sweep: Sweep) -> Result<ExitCode> {
    let cfg = resolve(overrides)?;
    let plan = cfg.plan()?;
    let dir = RunDir::prepare(&cfg, force)?;

    let (records, series, table, results): (Vec<ResultRecord>, Series, TextTable, Vec<RunResult>) =
        match sweep {
            Sweep::Episodes(values) | Sweep::Models(values) if values.is_empty() => {
                bail!("--values: at least one value is required")
            }
            Sweep::Episodes(values) => {
                let s = ablate_e(&plan, &values)?;
                let mut records: Vec<ResultRecord> = s
                    .results
                    .iter()
                    .map(|r| ResultRecord::Run(r.into()))
                    .collect();
                records.push(ResultRecord::AblationSummary(s.clone()));
                (records, s.series(), s.to_table(), s.results)
            }
            Sweep::Models(values) => {
                let s = ablate_m(&plan, &values)?;
                let mut records: Vec<ResultRecord> = s
                    .results
                    .iter()
                    .map(|r| ResultRecord::Run(r.into()))
                    .collect();
                records.push(ResultRecord::AblationSummary(s.clone()));
                (records, s.series(), s.to_table(), s.results)
            }
            Sweep::Gamma(values) => {
                if !matches!(plan.data, DataSource::Synthetic(_)) {
                    bail!("ablate-gamma needs the synthetic dataset; remove dataset.csv_path");
                }
                if let Some(g) = values.iter().find(|g| !(g.is_finite() && **g >= 1.0)) {
                    bail!("--values: imbalance ratios must be >= 1 (got {g})");
                }
                let s = ablate_gamma(&plan, &values)?;
                let mut records = Vec::new();
                let mut results = Vec::new();
                for (gamma, runs) in &s.results {
                    for r in runs {
                        let mut r = r.clone();
                        r.arm = format!("{}@gamma={gamma}", r.arm);
                        records.push(ResultRecord::Run(RunRecord::from(&r)));
                        results.push(r);
                    }
                }
                records.push(ResultRecord::GammaSummary(s.clone()));
                (records, s.series(), s.to_table(), results)
            }
        };

    dir.write_jsonl("results/results.jsonl", &records)?;
    dir.write("results/summary.txt", &table.to_string())?;
    if cfg.series {
        dir.write_jsonl("results/series.jsonl", &[series])?;
    }
    dir.write_jsonl("logs/episodes.jsonl", &episode_log(&results))?;
    print!("{table}");
    println!("results written to {}", dir.root.display());
    Ok(report_failures(&results))
}

pub fn inspect(paths: &[PathBuf]) -> Result<ExitCode> {
    let mut models = Vec::with_capacity(paths.len());
    for p in paths {
        models.push(checkpoint::load(p)?);
    }
    for (p, w) in paths.iter().zip(&models) {
        let v = w.values();
        let n = v.len().max(1) as f64;
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = v.iter().sum::<f64>() / n;
        let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!("{}", p.display());
        println!(
            "  layout      {} ({} layers)",
            w.layout(),
            w.layout().num_layers()
        );
        println!("  parameters  {}", w.len());
        println!("  min         {min:.6}");
        println!("  max         {max:.6}");
        println!("  mean        {mean:.6}");
        println!("  std         {std:.6}");
        println!("  l2 norm     {norm:.6}");
    }
    if models.len() >= 2 {
        println!("pairwise L2 distances");
        if models.iter().all(|m| m.layout() == models[0].layout()) {
            let distances = pairwise_l2(&models)?;
            let mut it = distances.iter();
            for i in 0..models.len() {
                for j in i + 1..models.len() {
                    let d = it.next().expect("one distance per pair");
                    println!("  {}  {}  {d:?}", paths[i].display(), paths[j].display());
                }
            }
        } else {
            println!("  n/a: checkpoints have different layouts");
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn export_dataset(overrides: &Overrides, out: &Path, seed: u64) -> Result<ExitCode> {
    let cfg = resolve(overrides)?;
    let (train, test) = match cfg.data_source()? {
        DataSource::Synthetic(g) => {
            let d = g.generate(seed)?;
            (d.train, d.test)
        }
        DataSource::Fixed { train, eval } => ((*train).clone(), (*eval).clone()),
    };
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    export_csv(&train, &out.join("train.csv"))?;
    export_csv(&test, &out.join("test.csv"))?;
    println!(
        "wrote {} training and {} test rows to {}",
        train.len(),
        test.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}
