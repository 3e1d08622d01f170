//! Top-1, per-class and head/medium/tail accuracy.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{forward, WeightVector};

/// Mean per-class accuracy over the many / medium / few-shot class groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupAccuracy {
    pub many: Option<f64>,
    pub medium: Option<f64>,
    pub few: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub top1: f64,
    /// `None` for classes absent from the evaluation set.
    pub per_class: Vec<Option<f64>>,
    pub group_acc: GroupAccuracy,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
}

impl EvalReport {
    pub fn num_classes(&self) -> usize {
        self.per_class.len()
    }
}

/// Splits classes into three groups by training count, largest first.
///
/// Ties in count keep class-index order, and when `C` is not a multiple of
/// three the earlier groups take the extra classes.
pub fn class_groups(train_counts: &[usize]) -> [Vec<usize>; 3] {
    let mut order: Vec<usize> = (0..train_counts.len()).collect();
    order.sort_by(|&a, &b| train_counts[b].cmp(&train_counts[a]).then(a.cmp(&b)));
    let c = order.len();
    let base = c / 3;
    let extra = c % 3;
    let sizes = [
        base + usize::from(extra > 0),
        base + usize::from(extra > 1),
        base,
    ];
    let mut groups: [Vec<usize>; 3] = Default::default();
    let mut it = order.into_iter();
    for (g, &n) in groups.iter_mut().zip(&sizes) {
        g.extend(it.by_ref().take(n));
    }
    groups
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Builds a report from a confusion matrix.
pub fn report_from_confusion(
    confusion: Vec<Vec<u64>>,
    train_counts: &[usize],
) -> Result<EvalReport> {
    let classes = confusion.len();
    if train_counts.len() != classes {
        return Err(Error::Dimension {
            what: "training class-count length",
            expected: classes,
            actual: train_counts.len(),
        });
    }
    let total: u64 = confusion.iter().flatten().sum();
    let correct: u64 = (0..classes).map(|c| confusion[c][c]).sum();
    let top1 = if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    };
    let per_class: Vec<Option<f64>> = confusion
        .iter()
        .enumerate()
        .map(|(c, row)| {
            let n: u64 = row.iter().sum();
            (n > 0).then(|| row[c] as f64 / n as f64)
        })
        .collect();
    let [many, medium, few] =
        class_groups(train_counts).map(|g| mean_defined(g.iter().map(|&c| per_class[c])));
    Ok(EvalReport {
        top1,
        per_class,
        group_acc: GroupAccuracy { many, medium, few },
        confusion,
    })
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Evaluates `w` on `eval_set`. `train_counts` defines the class groups.
pub fn evaluate(
    w: &WeightVector,
    eval_set: &Dataset,
    train_counts: &[usize],
) -> Result<EvalReport> {
    let classes = w.layout().output_width();
    if eval_set.num_classes() > classes {
        return Err(Error::Dimension {
            what: "evaluation classes (must not exceed model outputs)",
            expected: classes,
            actual: eval_set.num_classes(),
        });
    }
    let mut confusion = vec![vec![0u64; classes]; classes];
    if !eval_set.is_empty() {
        let logits = forward(w, &eval_set.as_batch()?)?;
        for (r, &y) in eval_set.labels().iter().enumerate() {
            confusion[y][argmax(logits.row(r))] += 1;
        }
    }
    let mut counts = train_counts.to_vec();
    counts.resize(classes, 0);
    report_from_confusion(confusion, &counts)
}

/// Signed top-1 difference `arm - baseline`.
pub fn improvement(arm: &EvalReport, baseline: &EvalReport) -> Result<f64> {
    if arm.num_classes() != baseline.num_classes() {
        return Err(Error::Dimension {
            what: "class count of compared reports",
            expected: baseline.num_classes(),
            actual: arm.num_classes(),
        });
    }
    Ok(arm.top1 - baseline.top1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_weights, LayerLayout};

    fn labelled(labels: &[usize], classes: usize) -> Dataset {
        // Feature = one-hot of the label, so an identity layer is a perfect oracle.
        let mut feats = Vec::new();
        for &y in labels {
            feats.extend((0..classes).map(|k| if k == y { 1.0 } else { 0.0 }));
        }
        Dataset::new(feats, classes, labels.to_vec(), classes).unwrap()
    }

    #[test]
    fn zero_weights_predict_class_zero() {
        let ds = labelled(&[0, 1, 2, 0, 1], 3);
        let w = WeightVector::zeros(LayerLayout::from_widths(&[3, 3]).unwrap());
        let r = evaluate(&w, &ds, &[5, 3, 1]).unwrap();
        assert!((r.top1 - 2.0 / 5.0).abs() < 1e-15);
        assert!(r.confusion.iter().all(|row| row[1] == 0 && row[2] == 0));
    }

    #[test]
    fn identity_weights_are_perfect() {
        let ds = labelled(&[0, 1, 2, 2, 1], 3);
        let mut v = vec![0.0; 12];
        v[0] = 1.0;
        v[4] = 1.0;
        v[8] = 1.0;
        let w = WeightVector::new(LayerLayout::from_widths(&[3, 3]).unwrap(), v).unwrap();
        let r = evaluate(&w, &ds, &[1, 1, 1]).unwrap();
        assert_eq!(r.top1, 1.0);
        assert!(r.per_class.iter().all(|&p| p == Some(1.0)));
    }

    #[test]
    fn report_invariants_hold() {
        let ds = labelled(&[0, 0, 1, 2, 2, 2, 3], 4);
        let w = init_weights(&LayerLayout::from_widths(&[4, 6, 4]).unwrap(), 3);
        let r = evaluate(&w, &ds, &[9, 4, 2, 1]).unwrap();
        let total: u64 = r.confusion.iter().flatten().sum();
        let trace: u64 = (0..4).map(|c| r.confusion[c][c]).sum();
        assert_eq!(r.top1, trace as f64 / total as f64);
        for (c, row) in r.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<u64>() as usize, ds.class_counts()[c]);
        }
        assert!(r
            .per_class
            .iter()
            .flatten()
            .all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn missing_classes_are_excluded_from_groups() {
        let confusion = vec![vec![2, 0, 0], vec![0, 0, 0], vec![1, 0, 1]];
        let r = report_from_confusion(confusion, &[10, 5, 1]).unwrap();
        assert_eq!(r.per_class, vec![Some(1.0), None, Some(0.5)]);
        assert_eq!(r.group_acc.many, Some(1.0));
        assert_eq!(r.group_acc.medium, None);
        assert_eq!(r.group_acc.few, Some(0.5));
    }

    #[test]
    fn terciles_split_by_training_count() {
        let groups = class_groups(&[500, 300, 300, 100, 50, 50, 20, 10, 5, 5]);
        assert_eq!(groups[0], vec![0, 1, 2, 3]);
        assert_eq!(groups[1], vec![4, 5, 6]);
        assert_eq!(groups[2], vec![7, 8, 9]);
        let groups = class_groups(&[1, 1]);
        assert_eq!(groups, [vec![0], vec![1], vec![]]);
    }

    #[test]
    fn improvement_is_signed_difference() {
        let mut a = report_from_confusion(vec![vec![1, 0], vec![0, 1]], &[1, 1]).unwrap();
        let b = a.clone();
        assert_eq!(improvement(&a, &b).unwrap(), 0.0);
        a.top1 = 0.62;
        let mut b = b;
        b.top1 = 0.615;
        assert!((improvement(&a, &b).unwrap() - 0.005).abs() < 1e-12);
        assert_eq!(improvement(&a, &b).unwrap(), -improvement(&b, &a).unwrap());
        let c = report_from_confusion(vec![vec![1; 3]; 3], &[1; 3]).unwrap();
        assert!(improvement(&a, &c).is_err());
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }
}
