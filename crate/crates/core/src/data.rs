//! Long-tailed datasets and per-model data loaders.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Batch;

/// Class-count profile `n_c = n_1 * γ^{-(c-1)/(C-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongTailSpec {
    pub num_classes: usize,
    pub head_count: usize,
    pub imbalance_ratio: f64,
}

impl LongTailSpec {
    pub fn new(num_classes: usize, head_count: usize, imbalance_ratio: f64) -> Result<Self> {
        let spec = Self {
            num_classes,
            head_count,
            imbalance_ratio,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::config(format!(
                "num_classes must be at least 2, got {}",
                self.num_classes
            )));
        }
        if self.head_count < 1 {
            return Err(Error::config("head_count must be at least 1"));
        }
        if !(self.imbalance_ratio.is_finite() && self.imbalance_ratio >= 1.0) {
            return Err(Error::config(format!(
                "imbalance_ratio must be a finite number >= 1, got {}",
                self.imbalance_ratio
            )));
        }
        Ok(())
    }
}

/// Per-class sample counts, head class first. Rounds to nearest.
pub fn class_counts(spec: &LongTailSpec) -> Result<Vec<usize>> {
    spec.validate()?;
    let n1 = spec.head_count as f64;
    let gamma = spec.imbalance_ratio;
    let last = spec.num_classes - 1;
    let counts: Vec<usize> = (0..spec.num_classes)
        .map(|c| {
            let raw = match c {
                0 => n1,
                c if c == last => n1 / gamma,
                c => n1 * gamma.powf(-(c as f64) / last as f64),
            };
            raw.round() as usize
        })
        .collect();
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::config(format!(
            "class {c} rounds to zero samples (head_count {} / imbalance_ratio {}); \
             increase head_count or lower imbalance_ratio",
            spec.head_count, gamma
        )));
    }
    Ok(counts)
}

/// Labelled feature rows stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    feature_dim: usize,
    class_counts: Vec<usize>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        feature_dim: usize,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        if feature_dim == 0 {
            return Err(Error::Data("feature dimension must be at least 1".into()));
        }
        if features.len() != labels.len() * feature_dim {
            return Err(Error::Dimension {
                what: "feature buffer length",
                expected: labels.len() * feature_dim,
                actual: features.len(),
            });
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "feature {} of sample {} is not finite",
                i % feature_dim,
                i / feature_dim
            )));
        }
        let mut class_counts = vec![0; num_classes];
        for (i, &y) in labels.iter().enumerate() {
            match class_counts.get_mut(y) {
                Some(n) => *n += 1,
                None => {
                    return Err(Error::Data(format!(
                        "sample {i} has label {y} outside [0, {num_classes})"
                    )))
                }
            }
        }
        Ok(Self {
            features,
            labels,
            feature_dim,
            class_counts,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn num_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    /// Copies the given samples into a batch, in the given order.
    pub fn gather(&self, indices: &[usize]) -> Result<Batch> {
        let mut inputs = Vec::with_capacity(indices.len() * self.feature_dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Dimension {
                    what: "sample index",
                    expected: self.len(),
                    actual: i,
                });
            }
            inputs.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Batch::new(inputs, self.feature_dim, labels)
    }

    /// The whole dataset as one batch.
    pub fn as_batch(&self) -> Result<Batch> {
        Batch::new(self.features.clone(), self.feature_dim, self.labels.clone())
    }

    /// Same samples in a different order.
    pub fn permuted(&self, order: &[usize]) -> Result<Dataset> {
        let batch = self.gather(order)?;
        Dataset::new(
            batch.inputs().as_slice().to_vec(),
            self.feature_dim,
            batch.labels().to_vec(),
            self.num_classes(),
        )
    }

    /// Ratio of the largest to the smallest non-empty class.
    pub fn head_tail_ratio(&self) -> f64 {
        let max = self.class_counts.iter().copied().max().unwrap_or(0);
        let min = self
            .class_counts
            .iter()
            .copied()
            .filter(|&n| n > 0)
            .min()
            .unwrap_or(0);
        if min == 0 {
            return 0.0;
        }
        max as f64 / min as f64
    }
}

/// Generator settings for the synthetic Gaussian-mixture benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub spec: LongTailSpec,
    pub feature_dim: usize,
    /// Minimum pairwise distance between class means.
    pub class_sep: f64,
    pub test_per_class: usize,
}

pub const DEFAULT_TEST_PER_CLASS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub train: Dataset,
    /// Balanced: `test_per_class` samples for every class.
    pub test: Dataset,
    pub means: Vec<Vec<f64>>,
}

// Independent ChaCha streams derived from one seed.
const STREAM_MEANS: u64 = 0;
const STREAM_TRAIN: u64 = 1;
const STREAM_TEST: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn place_means(classes: usize, dim: usize, class_sep: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(classes);
    while means.len() < classes {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if classes <= dim {
            // Gram-Schmidt against earlier directions: an equidistant frame.
            for m in &means {
                let dot: f64 = v.iter().zip(m).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(m).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue;
            }
            v.iter_mut().for_each(|a| *a /= norm);
        }
        means.push(v);
    }
    let n = classes as f64;
    let centroid: Vec<f64> = (0..dim)
        .map(|k| means.iter().map(|m| m[k]).sum::<f64>() / n)
        .collect();
    for m in &mut means {
        m.iter_mut().zip(&centroid).for_each(|(a, c)| *a -= c);
    }
    let mut min_dist = f64::INFINITY;
    for i in 0..classes {
        for j in i + 1..classes {
            min_dist = min_dist.min(distance(&means[i], &means[j]));
        }
    }
    // Slight overshoot so rounding never leaves a pair below class_sep.
    let scale = class_sep / min_dist * (1.0 + 1e-12);
    for m in &mut means {
        m.iter_mut().for_each(|a| *a *= scale);
    }
    means
}

fn sample_classes(means: &[Vec<f64>], counts: &[usize], rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let dim = means[0].len();
    let total: usize = counts.iter().sum();
    let mut features = Vec::with_capacity(total * dim);
    let mut labels = Vec::with_capacity(total);
    for (c, (&n, mean)) in counts.iter().zip(means).enumerate() {
        for _ in 0..n {
            features.extend(mean.iter().map(|&mu| {
                let z: f64 = StandardNormal.sample(rng);
                mu + z
            }));
            labels.push(c);
        }
    }
    Dataset::new(features, dim, labels, counts.len())
}

impl GaussianMixture {
    pub fn new(spec: LongTailSpec, feature_dim: usize, class_sep: f64) -> Self {
        Self {
            spec,
            feature_dim,
            class_sep,
            test_per_class: DEFAULT_TEST_PER_CLASS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.feature_dim < 2 {
            return Err(Error::config("feature_dim must be at least 2"));
        }
        if !(self.class_sep.is_finite() && self.class_sep > 0.0) {
            return Err(Error::config("class_sep must be a positive number"));
        }
        if self.test_per_class < 1 {
            return Err(Error::config("test_per_class must be at least 1"));
        }
        Ok(())
    }

    /// Class `c` draws from `N(mu_c, I)`. Training counts follow the long-tail
    /// profile; the test split is balanced and uses its own random stream.
    pub fn generate(&self, seed: u64) -> Result<GeneratedData> {
        self.validate()?;
        let counts = class_counts(&self.spec)?;
        let means = place_means(
            self.spec.num_classes,
            self.feature_dim,
            self.class_sep,
            &mut stream(seed, STREAM_MEANS),
        );
        let train = sample_classes(&means, &counts, &mut stream(seed, STREAM_TRAIN))?;
        let test_counts = vec![self.test_per_class; self.spec.num_classes];
        let test = sample_classes(&means, &test_counts, &mut stream(seed, STREAM_TEST))?;
        Ok(GeneratedData { train, test, means })
    }
}

pub fn generate_gaussian_mixture(
    spec: &LongTailSpec,
    feature_dim: usize,
    class_sep: f64,
    seed: u64,
) -> Result<GeneratedData> {
    GaussianMixture::new(*spec, feature_dim, class_sep).generate(seed)
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    /// Requires a header row.
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// `last`, a zero-based column index, or a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            s => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads a numeric CSV; the header row is optional and detected by content.
pub fn ingest_csv(path: &Path, label_column: &LabelColumn) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(path, 0, format!("{other:?}")),
        })?;

    let mut records = reader.records().peekable();
    let mut header: Option<csv::StringRecord> = None;
    if let Some(Ok(first)) = records.peek() {
        if first.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(first.clone());
            records.next();
        }
    }

    let mut width: Option<usize> = None;
    let mut label_idx = 0;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cols = record.len();
        match width {
            None => {
                if cols < 2 {
                    return Err(parse_err(
                        path,
                        line,
                        "need at least one feature and a label",
                    ));
                }
                label_idx = match label_column {
                    LabelColumn::Last => cols - 1,
                    LabelColumn::Index(i) if *i < cols => *i,
                    LabelColumn::Index(i) => {
                        return Err(parse_err(
                            path,
                            line,
                            format!("label column {i} out of range for {cols} columns"),
                        ))
                    }
                    LabelColumn::Name(name) => header
                        .as_ref()
                        .and_then(|h| h.iter().position(|f| f == name))
                        .ok_or_else(|| {
                            parse_err(path, 1, format!("no header column named {name:?}"))
                        })?,
                };
                width = Some(cols);
            }
            Some(w) if w != cols => {
                return Err(parse_err(
                    path,
                    line,
                    format!("expected {w} columns, found {cols}"),
                ))
            }
            Some(_) => {}
        }
        for (i, field) in record.iter().enumerate() {
            if i == label_idx {
                let y = field.parse::<usize>().map_err(|_| {
                    parse_err(
                        path,
                        line,
                        format!("label {field:?} is not a non-negative integer"),
                    )
                })?;
                labels.push(y);
            } else {
                let v = field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        parse_err(
                            path,
                            line,
                            format!("column {i}: {field:?} is not a finite number"),
                        )
                    })?;
                features.push(v);
            }
        }
    }

    let Some(width) = width else {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    };
    let present: BTreeSet<usize> = labels.iter().copied().collect();
    let num_classes = present.iter().next_back().map_or(0, |&m| m + 1);
    let missing: Vec<String> = (0..num_classes)
        .filter(|c| !present.contains(c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Data(format!(
            "{}: labels are not contiguous in [0, {num_classes}); missing classes: {}",
            path.display(),
            missing.join(", ")
        )));
    }
    Dataset::new(features, width - 1, labels, num_classes)
}

/// Writes `f0,...,f{d-1},label` with a header; readable by [`ingest_csv`]
/// with [`LabelColumn::Last`]. Floats use shortest round-trip formatting.
pub fn export_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{other:?}")),
    })?;
    let to_err = |e: csv::Error| Error::Data(format!("{}: {e}", path.display()));
    let mut header: Vec<String> = (0..dataset.feature_dim).map(|k| format!("f{k}")).collect();
    header.push("label".into());
    writer.write_record(&header).map_err(to_err)?;
    let mut fields = Vec::with_capacity(dataset.feature_dim + 1);
    for i in 0..dataset.len() {
        fields.clear();
        fields.extend(dataset.row(i).iter().map(|v| v.to_string()));
        fields.push(dataset.labels[i].to_string());
        writer.write_record(&fields).map_err(to_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Iteration-based shuffling loader owned by one trainer.
///
/// Batches run straight through epoch boundaries: when the current permutation
/// runs out, a fresh one is drawn from the loader's own stream and the batch is
/// completed from it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoaderState {
    seed: u64,
    rng: ChaCha8Rng,
    permutation: Vec<usize>,
    cursor: usize,
    batch_size: usize,
    epoch: u64,
}

impl LoaderState {
    pub fn new(dataset_len: usize, batch_size: usize, seed: u64) -> Result<Self> {
        if dataset_len == 0 {
            return Err(Error::Data(
                "cannot load batches from an empty dataset".into(),
            ));
        }
        if batch_size == 0 || batch_size > dataset_len {
            return Err(Error::config(format!(
                "batch_size must be in [1, {dataset_len}], got {batch_size}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let permutation = Self::draw(&mut rng, dataset_len);
        Ok(Self {
            seed,
            rng,
            permutation,
            cursor: 0,
            batch_size,
            epoch: 0,
        })
    }

    fn draw(rng: &mut ChaCha8Rng, len: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..len).collect();
        p.shuffle(rng);
        p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Number of completed passes over the data.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn next_indices(&mut self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.batch_size);
        while out.len() < self.batch_size {
            if self.cursor == self.permutation.len() {
                self.permutation = Self::draw(&mut self.rng, self.permutation.len());
                self.cursor = 0;
                self.epoch += 1;
            }
            let take = (self.batch_size - out.len()).min(self.permutation.len() - self.cursor);
            out.extend_from_slice(&self.permutation[self.cursor..self.cursor + take]);
            self.cursor += take;
        }
        out
    }

    pub fn next_batch(&mut self, dataset: &Dataset) -> Result<Batch> {
        if dataset.len() != self.permutation.len() {
            return Err(Error::Dimension {
                what: "dataset size seen by loader",
                expected: self.permutation.len(),
                actual: dataset.len(),
            });
        }
        let idx = self.next_indices();
        dataset.gather(&idx)
    }
}

/// Value-returning form of [`LoaderState::next_batch`].
pub fn next_batch(dataset: &Dataset, state: &LoaderState) -> Result<(Batch, LoaderState)> {
    let mut state = state.clone();
    let batch = state.next_batch(dataset)?;
    Ok((batch, state))
}
