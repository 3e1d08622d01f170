//! Iterative model weight averaging.
//!
//! Training is split into `E` episodes. Every episode starts `M` trainers from
//! the same averaged weights, trains each on its own data order, then averages
//! them with uniform coefficients; the average seeds the next episode. With
//! `use_ema` every trainer also keeps an exponential moving average of its
//! weights, and those shadows are averaged and re-assigned the same way. The
//! final model is the last averaged EMA when EMA is on, the last averaged
//! student otherwise.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LoaderState};
use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::nn::{loss_and_grad, SgdState, WeightVector};

pub const DEFAULT_EMA_LAMBDA: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImwaSchedule {
    pub total_iterations: usize,
    pub num_episodes: usize,
    pub num_models: usize,
    pub use_ema: bool,
    pub ema_lambda: f64,
    /// Average the optimizer velocities with the weights at episode boundaries
    /// instead of zeroing them.
    pub carry_momentum: bool,
}

impl Default for ImwaSchedule {
    fn default() -> Self {
        Self {
            total_iterations: 4000,
            num_episodes: 20,
            num_models: 2,
            use_ema: false,
            ema_lambda: DEFAULT_EMA_LAMBDA,
            carry_momentum: true,
        }
    }
}

impl ImwaSchedule {
    pub fn new(total_iterations: usize, num_episodes: usize, num_models: usize) -> Result<Self> {
        let s = Self {
            total_iterations,
            num_episodes,
            num_models,
            ..Self::default()
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_ema(mut self, lambda: f64) -> Self {
        self.use_ema = true;
        self.ema_lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_iterations < 1 {
            return Err(Error::config("total_iterations must be at least 1"));
        }
        if self.num_episodes < 1 || self.num_episodes > self.total_iterations {
            return Err(Error::config(format!(
                "num_episodes must be in [1, total_iterations = {}], got {}",
                self.total_iterations, self.num_episodes
            )));
        }
        if self.num_models < 1 {
            return Err(Error::config("num_models must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.ema_lambda) {
            return Err(Error::config(format!(
                "ema_lambda must lie in [0, 1], got {}",
                self.ema_lambda
            )));
        }
        Ok(())
    }

    /// Iterations per episode. The first `T mod E` episodes get one extra.
    pub fn episode_lengths(&self) -> Vec<usize> {
        let base = self.total_iterations / self.num_episodes;
        let extra = self.total_iterations % self.num_episodes;
        (0..self.num_episodes)
            .map(|e| base + usize::from(e < extra))
            .collect()
    }
}

/// Per-model training hyper-parameters. `data_seed` fixes the data order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub data_seed: u64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmaState {
    weights: WeightVector,
    lambda: f64,
}

impl EmaState {
    pub fn new(weights: WeightVector, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::config(format!(
                "ema lambda must lie in [0, 1], got {lambda}"
            )));
        }
        Ok(Self { weights, lambda })
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `ω <- λω + (1-λ)θ`, entry-wise.
    pub fn update(&mut self, student: &WeightVector) -> Result<()> {
        self.weights.ensure_same_layout(student)?;
        let keep = self.lambda;
        let take = 1.0 - self.lambda;
        for (w, &t) in self.weights.values_mut().iter_mut().zip(student.values()) {
            *w = keep * *w + take * t;
        }
        Ok(())
    }
}

pub fn ema_update(ema: &EmaState, student: &WeightVector) -> Result<EmaState> {
    let mut next = ema.clone();
    next.update(student)?;
    Ok(next)
}

/// Everything one model carries between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainerState {
    pub weights: WeightVector,
    pub ema: Option<EmaState>,
    pub optimizer: SgdState,
    pub loader: LoaderState,
}

impl TrainerState {
    pub fn new(
        init: &WeightVector,
        config: &TrainerConfig,
        ema_lambda: Option<f64>,
        dataset: &Dataset,
    ) -> Result<Self> {
        check_compatible(init, dataset)?;
        let ema = ema_lambda
            .map(|l| EmaState::new(init.clone(), l))
            .transpose()?;
        Ok(Self {
            weights: init.clone(),
            ema,
            optimizer: SgdState::new(config.learning_rate, config.momentum, init.len())?,
            loader: LoaderState::new(dataset.len(), config.batch_size, config.data_seed)?,
        })
    }

    /// Runs `iterations` steps of batch -> gradient -> SGD (-> EMA) in place.
    pub fn train(&mut self, dataset: &Dataset, iterations: usize) -> Result<()> {
        for _ in 0..iterations {
            let batch = self.loader.next_batch(dataset)?;
            let (_, grad) = loss_and_grad(&self.weights, &batch)?;
            self.optimizer.step(&mut self.weights, &grad)?;
            if let Some(ema) = &mut self.ema {
                ema.update(&self.weights)?;
            }
        }
        Ok(())
    }

    /// The model this trainer would be evaluated as.
    pub fn eval_weights(&self) -> &WeightVector {
        self.ema.as_ref().map_or(&self.weights, |e| &e.weights)
    }
}

/// One episode of training for one model; the loader comes back advanced so
/// the data order continues into the next episode.
pub fn train_episode(
    mut state: TrainerState,
    dataset: &Dataset,
    iterations: usize,
) -> Result<TrainerState> {
    if iterations < 1 {
        return Err(Error::config("an episode needs at least one iteration"));
    }
    state.train(dataset, iterations)?;
    Ok(state)
}

fn check_compatible(w: &WeightVector, dataset: &Dataset) -> Result<()> {
    if w.layout().input_width() != dataset.feature_dim() {
        return Err(Error::Dimension {
            what: "model input width vs dataset feature dimension",
            expected: dataset.feature_dim(),
            actual: w.layout().input_width(),
        });
    }
    if w.layout().output_width() < dataset.num_classes() {
        return Err(Error::Dimension {
            what: "model output width vs dataset classes",
            expected: dataset.num_classes(),
            actual: w.layout().output_width(),
        });
    }
    Ok(())
}

const COEFFICIENT_SUM_TOLERANCE: f64 = 1e-12;

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Weighted average of equal-length slices.
///
/// Inputs are first put in a canonical order (lexicographic by value), summed
/// in that order and scaled, so the result does not depend on how the caller
/// ordered them. Each entry is then clamped to the entry-wise min/max of the
/// inputs, which only absorbs rounding.
fn average_slices(inputs: &[&[f64]], coefficients: Option<&[f64]>) -> Vec<f64> {
    let m = inputs.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| lexicographic(inputs[a], inputs[b]));
    let len = inputs[0].len();
    let mut out = vec![0.0; len];
    let mut lo = inputs[order[0]].to_vec();
    let mut hi = lo.clone();
    for &i in &order {
        let src = inputs[i];
        match coefficients {
            Some(c) => {
                let a = c[i];
                out.iter_mut().zip(src).for_each(|(o, &v)| *o += a * v);
            }
            None => out.iter_mut().zip(src).for_each(|(o, &v)| *o += v),
        }
        for k in 0..len {
            lo[k] = lo[k].min(src[k]);
            hi[k] = hi[k].max(src[k]);
        }
    }
    if coefficients.is_none() {
        let scale = m as f64;
        out.iter_mut().for_each(|o| *o /= scale);
    }
    for k in 0..len {
        out[k] = out[k].clamp(lo[k], hi[k]);
    }
    out
}

fn validate_coefficients(coefficients: &[f64], m: usize) -> Result<()> {
    if coefficients.len() != m {
        return Err(Error::config(format!(
            "{} coefficients given for {m} models",
            coefficients.len()
        )));
    }
    if let Some(c) = coefficients.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::config(format!(
            "averaging coefficients must be finite and non-negative, got {c}"
        )));
    }
    let sum: f64 = coefficients.iter().sum();
    if (sum - 1.0).abs() > COEFFICIENT_SUM_TOLERANCE {
        return Err(Error::config(format!(
            "averaging coefficients must sum to 1, got {sum}"
        )));
    }
    Ok(())
}

/// `Σ α_m θ_m`; uniform `α_m = 1/M` when `coefficients` is `None`.
pub fn average_weights<W: Borrow<WeightVector>>(
    models: &[W],
    coefficients: Option<&[f64]>,
) -> Result<WeightVector> {
    let first = models
        .first()
        .ok_or_else(|| Error::config("cannot average an empty set of models"))?
        .borrow();
    for m in models {
        first.ensure_same_layout(m.borrow())?;
    }
    if let Some(c) = coefficients {
        validate_coefficients(c, models.len())?;
    }
    let slices: Vec<&[f64]> = models.iter().map(|m| m.borrow().values()).collect();
    WeightVector::new(
        first.layout().clone(),
        average_slices(&slices, coefficients),
    )
}

/// Euclidean distances for every pair `i < j`, in lexicographic pair order.
pub fn pairwise_l2<W: Borrow<WeightVector>>(models: &[W]) -> Result<Vec<f64>> {
    if models.len() < 2 {
        return Err(Error::config("pairwise distances need at least two models"));
    }
    let first = models[0].borrow();
    for m in models {
        first.ensure_same_layout(m.borrow())?;
    }
    let mut out = Vec::with_capacity(models.len() * (models.len() - 1) / 2);
    for i in 0..models.len() {
        for j in i + 1..models.len() {
            out.push(l2_distance(
                models[i].borrow().values(),
                models[j].borrow().values(),
            ));
        }
    }
    Ok(out)
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionMode {
    /// Trainers run one after another; the reference mode.
    #[default]
    Serial,
    /// Trainers of an episode run on the rayon pool. Results match serial mode.
    Concurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub mode: ExecutionMode,
    /// Evaluate averaged and individual models after every episode.
    pub evaluate_episodes: bool,
    /// Keep averaged weights in every [`EpisodeRecord`].
    pub keep_episode_weights: bool,
    /// Every this many iterations, evaluate a probe average of the current
    /// trainers without touching them.
    pub probe_every: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            mode: ExecutionMode::Serial,
            evaluate_episodes: true,
            keep_episode_weights: true,
            probe_every: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEval {
    /// Top-1 of the averaged (final-kind) model.
    pub averaged_top1: f64,
    /// Top-1 of each trainer's model just before averaging.
    pub individual_top1: Vec<f64>,
}

impl EpisodeEval {
    pub fn best_individual(&self) -> f64 {
        self.individual_top1
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Averaged model minus the best individual.
    pub fn gain_over_best(&self) -> f64 {
        self.averaged_top1 - self.best_individual()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based.
    pub episode: usize,
    pub iterations: usize,
    pub averaged_weights: Option<WeightVector>,
    pub averaged_ema: Option<WeightVector>,
    /// Student distances before averaging, pairs `i < j`. Empty when `M = 1`.
    pub distances: Vec<f64>,
    pub eval: Option<EpisodeEval>,
    pub wall_clock_secs: f64,
}

impl EpisodeRecord {
    /// Largest pairwise distance; `0.0` when there is a single model.
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

/// Probe of the model average taken mid-episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    /// Total iterations each model has run so far.
    pub iteration: usize,
    pub averaged_top1: f64,
    pub best_individual_top1: f64,
    pub mean_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImwaOutcome {
    pub theta: WeightVector,
    pub ema: Option<WeightVector>,
    pub records: Vec<EpisodeRecord>,
    pub probes: Vec<ProbePoint>,
    /// Most weight vectors held at once by the run's working set.
    pub peak_model_copies: usize,
}

impl ImwaOutcome {
    /// `ω^(E)` when EMA is on, `θ^(E)` otherwise.
    pub fn final_model(&self) -> &WeightVector {
        self.ema.as_ref().unwrap_or(&self.theta)
    }
}

#[derive(Debug, Default)]
struct CopyCounter {
    live: usize,
    peak: usize,
}

impl CopyCounter {
    fn acquire(&mut self, n: usize) {
        self.live += n;
        self.peak = self.peak.max(self.live);
    }

    fn release(&mut self, n: usize) {
        self.live -= n;
    }
}

fn train_all(
    trainers: &mut [TrainerState],
    dataset: &Dataset,
    iterations: usize,
    mode: ExecutionMode,
) -> Result<()> {
    match mode {
        ExecutionMode::Serial => trainers
            .iter_mut()
            .try_for_each(|t| t.train(dataset, iterations)),
        ExecutionMode::Concurrent => trainers
            .par_iter_mut()
            .try_for_each(|t| t.train(dataset, iterations)),
    }
}

fn top1(w: &WeightVector, eval_set: &Dataset, counts: &[usize]) -> Result<f64> {
    Ok(evaluate(w, eval_set, counts)?.top1)
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Runs the full episode loop and returns the final averaged model(s).
pub fn run_imwa(
    init: &WeightVector,
    dataset: &Dataset,
    schedule: &ImwaSchedule,
    configs: &[TrainerConfig],
    eval_set: &Dataset,
    options: &RunOptions,
) -> Result<ImwaOutcome> {
    schedule.validate()?;
    if configs.len() != schedule.num_models {
        return Err(Error::config(format!(
            "schedule has {} models but {} trainer configs were given",
            schedule.num_models,
            configs.len()
        )));
    }
    check_compatible(init, dataset)?;
    if options.probe_every == Some(0) {
        return Err(Error::config("probe interval must be at least 1"));
    }
    let counts = dataset.class_counts();
    let per_model = if schedule.use_ema { 2 } else { 1 };
    let ema_lambda = schedule.use_ema.then_some(schedule.ema_lambda);
    let mut copies = CopyCounter::default();

    // θ^(0) and ω^(0) both start at `init`.
    let mut theta = init.clone();
    let mut omega = schedule.use_ema.then(|| init.clone());
    copies.acquire(per_model);

    let mut trainers = configs
        .iter()
        .map(|c| TrainerState::new(init, c, ema_lambda, dataset))
        .collect::<Result<Vec<_>>>()?;
    copies.acquire(per_model * trainers.len());

    let mut records = Vec::with_capacity(schedule.num_episodes);
    let mut probes = Vec::new();
    let mut done_total = 0;
    for (e, &len) in schedule.episode_lengths().iter().enumerate() {
        let started = Instant::now();
        for t in &mut trainers {
            t.weights.assign(&theta)?;
            if let (Some(ema), Some(omega)) = (&mut t.ema, &omega) {
                ema.weights.assign(omega)?;
            }
            if !schedule.carry_momentum {
                t.optimizer.reset();
            }
        }

        let mut done = 0;
        while done < len {
            let chunk = match options.probe_every {
                Some(p) => (p - done_total % p).min(len - done),
                None => len - done,
            };
            train_all(&mut trainers, dataset, chunk, options.mode)?;
            done += chunk;
            done_total += chunk;
            if let Some(p) = options.probe_every {
                if done_total % p == 0 {
                    copies.acquire(1);
                    probes.push(probe(&trainers, done_total, eval_set, counts)?);
                    copies.release(1);
                }
            }
        }

        let distances = if trainers.len() > 1 {
            pairwise_l2(&trainers.iter().map(|t| &t.weights).collect::<Vec<_>>())?
        } else {
            Vec::new()
        };
        theta = average_weights(
            &trainers.iter().map(|t| &t.weights).collect::<Vec<_>>(),
            None,
        )?;
        if let Some(omega) = &mut omega {
            let emas: Vec<&WeightVector> = trainers
                .iter()
                .filter_map(|t| t.ema.as_ref().map(|e| e.weights()))
                .collect();
            *omega = average_weights(&emas, None)?;
        }
        if schedule.carry_momentum && trainers.len() > 1 {
            let velocities: Vec<&[f64]> = trainers.iter().map(|t| t.optimizer.velocity()).collect();
            let averaged = average_slices(&velocities, None);
            for t in &mut trainers {
                t.optimizer.set_velocity(&averaged)?;
            }
        }

        let eval = if options.evaluate_episodes {
            let final_kind = omega.as_ref().unwrap_or(&theta);
            Some(EpisodeEval {
                averaged_top1: top1(final_kind, eval_set, counts)?,
                individual_top1: trainers
                    .iter()
                    .map(|t| top1(t.eval_weights(), eval_set, counts))
                    .collect::<Result<_>>()?,
            })
        } else {
            None
        };
        records.push(EpisodeRecord {
            episode: e + 1,
            iterations: len,
            averaged_weights: options.keep_episode_weights.then(|| theta.clone()),
            averaged_ema: omega
                .as_ref()
                .filter(|_| options.keep_episode_weights)
                .cloned(),
            distances,
            eval,
            wall_clock_secs: started.elapsed().as_secs_f64(),
        });
    }

    Ok(ImwaOutcome {
        theta,
        ema: omega,
        records,
        probes,
        peak_model_copies: copies.peak,
    })
}

fn probe(
    trainers: &[TrainerState],
    iteration: usize,
    eval_set: &Dataset,
    counts: &[usize],
) -> Result<ProbePoint> {
    let models: Vec<&WeightVector> = trainers.iter().map(|t| t.eval_weights()).collect();
    let averaged = average_weights(&models, None)?;
    let individual = models
        .iter()
        .map(|w| top1(w, eval_set, counts))
        .collect::<Result<Vec<_>>>()?;
    let students: Vec<&WeightVector> = trainers.iter().map(|t| &t.weights).collect();
    let distances = if students.len() > 1 {
        pairwise_l2(&students)?
    } else {
        Vec::new()
    };
    Ok(ProbePoint {
        iteration,
        averaged_top1: top1(&averaged, eval_set, counts)?,
        best_individual_top1: individual.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_distance: mean(&distances),
    })
}

/// Plain model weight averaging: train once to completion, average once.
pub fn run_vanilla_mwa(
    init: &WeightVector,
    dataset: &Dataset,
    schedule: &ImwaSchedule,
    configs: &[TrainerConfig],
    eval_set: &Dataset,
    options: &RunOptions,
) -> Result<ImwaOutcome> {
    let schedule = ImwaSchedule {
        num_episodes: 1,
        ..*schedule
    };
    run_imwa(init, dataset, &schedule, configs, eval_set, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::LayerLayout;

    fn wv(values: &[f64]) -> WeightVector {
        let layout = LayerLayout::new(vec![(values.len() - 1, 1)]).unwrap();
        WeightVector::new(layout, values.to_vec()).unwrap()
    }

    #[test]
    fn episode_lengths_front_load_the_remainder() {
        let s = ImwaSchedule::new(17, 5, 1).unwrap();
        assert_eq!(s.episode_lengths(), vec![4, 4, 3, 3, 3]);
        let s = ImwaSchedule::new(40, 4, 2).unwrap();
        assert_eq!(s.episode_lengths(), vec![10; 4]);
    }

    #[test]
    fn schedule_validation() {
        assert!(ImwaSchedule::new(0, 1, 1).is_err());
        assert!(ImwaSchedule::new(10, 11, 1).is_err());
        assert!(ImwaSchedule::new(10, 0, 1).is_err());
        assert!(ImwaSchedule::new(10, 2, 0).is_err());
        assert!(ImwaSchedule::new(10, 2, 2)
            .unwrap()
            .with_ema(1.5)
            .validate()
            .is_err());
    }

    #[test]
    fn uniform_average_is_the_mean() {
        let avg = average_weights(&[wv(&[1.0, 3.0]), wv(&[3.0, 1.0])], None).unwrap();
        assert_eq!(avg.values(), &[2.0, 2.0]);
    }

    #[test]
    fn weighted_average_follows_coefficients() {
        let avg = average_weights(
            &[wv(&[4.0, 0.0]), wv(&[0.0, 0.0]), wv(&[0.0, 0.0])],
            Some(&[0.5, 0.25, 0.25]),
        )
        .unwrap();
        assert_eq!(avg.values()[0], 2.0);
    }

    #[test]
    fn averaging_identical_models_is_exact() {
        let a = wv(&[0.1, -0.7, 1e-300, 3.3]);
        let avg = average_weights(&[a.clone(), a.clone(), a.clone()], None).unwrap();
        assert_eq!(avg, a);
    }

    #[test]
    fn coefficient_checks() {
        let models = [wv(&[1.0, 2.0]), wv(&[3.0, 4.0])];
        assert!(average_weights(&models, Some(&[0.5, 0.6])).is_err());
        assert!(average_weights(&models, Some(&[1.5, -0.5])).is_err());
        assert!(average_weights(&models, Some(&[1.0])).is_err());
        let empty: [WeightVector; 0] = [];
        assert!(average_weights(&empty, None).is_err());
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let err = average_weights(&[wv(&[1.0, 2.0]), wv(&[1.0, 2.0, 3.0])], None);
        assert!(matches!(err, Err(Error::LayoutMismatch(_))));
        assert!(pairwise_l2(&[wv(&[1.0, 2.0]), wv(&[1.0, 2.0, 3.0])]).is_err());
    }

    #[test]
    fn pairwise_distances() {
        assert_eq!(
            pairwise_l2(&[wv(&[0.0, 0.0]), wv(&[3.0, 4.0])]).unwrap(),
            vec![5.0]
        );
        assert_eq!(
            pairwise_l2(&[wv(&[1.0, 1.0]), wv(&[1.0, 1.0])]).unwrap(),
            vec![0.0]
        );
        let d = pairwise_l2(&[wv(&[0.0, 0.0]), wv(&[3.0, 4.0]), wv(&[0.0, 1.0])]).unwrap();
        assert_eq!(d, vec![5.0, 1.0, 18f64.sqrt()]);
        assert!(pairwise_l2(&[wv(&[0.0, 0.0])]).is_err());
    }

    #[test]
    fn ema_arithmetic() {
        let ema = EmaState::new(wv(&[0.0, 0.0]), 0.99).unwrap();
        let next = ema_update(&ema, &wv(&[1.0, 0.0])).unwrap();
        assert!((next.weights().values()[0] - 0.01).abs() < 1e-15);

        let ema = EmaState::new(wv(&[0.3, 0.5]), 1.0).unwrap();
        assert_eq!(ema_update(&ema, &wv(&[1.0, 2.0])).unwrap(), ema);

        let ema = EmaState::new(wv(&[0.3, 0.5]), 0.0).unwrap();
        let student = wv(&[1.0, 2.0]);
        assert_eq!(ema_update(&ema, &student).unwrap().weights(), &student);

        assert!(EmaState::new(wv(&[0.0, 0.0]), 1.1).is_err());
        assert!(ema_update(&ema, &wv(&[1.0, 2.0, 3.0])).is_err());
    }
}
