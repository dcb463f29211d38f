//! Classification metrics: accuracy and the ROC curve with its trapezoidal
//! area. Ties are grouped, so every point with an equal score moves together
//! along the curve; that makes the trapezoidal AUC equal the normalised
//! Mann-Whitney U statistic with ties counted half.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Fraction of positions where the two label sequences agree.
pub fn accuracy<T: Real, L: PartialEq>(predicted: &[L], truth: &[L]) -> Result<T> {
    if predicted.is_empty() {
        return Err(Error::EmptyInput("no predictions"));
    }
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let correct = predicted
        .iter()
        .zip(truth.iter())
        .filter(|(a, b)| a == b)
        .count();
    Ok(T::from_usize(correct).unwrap() / T::from_usize(predicted.len()).unwrap())
}

/// ROC points `(fpr, tpr)` swept over the unique scores in descending order,
/// starting at (0, 0) and ending at (1, 1). `labels[i]` is true for signal.
pub fn roc_curve<T: Real>(scores: &[T], labels: &[bool]) -> Result<Vec<(T, T)>> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    for (index, score) in scores.iter().enumerate() {
        if !score.is_finite() {
            return Err(Error::NonFiniteScore(index));
        }
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));

    let positives_total = T::from_usize(positives).unwrap();
    let negatives_total = T::from_usize(negatives).unwrap();
    let mut points = vec![(T::zero(), T::zero())];
    let mut true_positives = 0usize;
    let mut false_positives = 0usize;
    let mut cursor = 0usize;
    while cursor < order.len() {
        // Advance over the whole tie group before emitting a point.
        let score = scores[order[cursor]];
        while cursor < order.len() && scores[order[cursor]] == score {
            if labels[order[cursor]] {
                true_positives += 1;
            } else {
                false_positives += 1;
            }
            cursor += 1;
        }
        points.push((
            T::from_usize(false_positives).unwrap() / negatives_total,
            T::from_usize(true_positives).unwrap() / positives_total,
        ));
    }
    Ok(points)
}

/// Trapezoidal area under a ROC curve.
pub fn auc<T: Real>(points: &[(T, T)]) -> T {
    let mut area = T::zero();
    for window in points.windows(2) {
        let (x0, y0) = window[0];
        let (x1, y1) = window[1];
        area += (x1 - x0) * (y0 + y1) * real(0.5);
    }
    area
}

/// AUC straight from scores and labels.
pub fn auc_from_scores<T: Real>(scores: &[T], labels: &[bool]) -> Result<T> {
    Ok(auc(&roc_curve(scores, labels)?))
}

/// Mean and standard error (sample standard deviation over sqrt n).
pub fn mean_and_stderr<T: Real>(values: &[T]) -> (T, T) {
    let n = values.len();
    if n == 0 {
        return (T::zero(), T::zero());
    }
    let count = T::from_usize(n).unwrap();
    let mean = values.iter().cloned().sum::<T>() / count;
    if n == 1 {
        return (mean, T::zero());
    }
    let variance = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<T>()
        / T::from_usize(n - 1).unwrap();
    (mean, (variance / count).sqrt())
}

/// Emit ROC points as `fpr,tpr` CSV for external plotting.
pub fn write_roc_csv<T: Real>(path: &Path, points: &[(T, T)]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "fpr,tpr")?;
    for (fpr, tpr) in points {
        writeln!(writer, "{fpr},{tpr}")?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// O(n^2) oracle: P(random positive outranks random negative), ties 1/2.
    pub(crate) fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &pos) in labels.iter().enumerate() {
            if !pos {
                continue;
            }
            for (j, &other) in labels.iter().enumerate() {
                if other {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy::<f64, _>(&[1u8, 1, 0, 0], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(accuracy::<f64, _>(&[0u8, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 0.0);
        assert_eq!(accuracy::<f64, _>(&[1u8, 1, 0, 0], &[1, 0, 0, 0]).unwrap(), 0.75);
        assert!(accuracy::<f64, u8>(&[], &[]).is_err());
        assert!(accuracy::<f64, _>(&[1u8], &[1, 0]).is_err());
    }

    #[test]
    fn roc_curve_hand_example() {
        // scores [0.9, 0.8, 0.7, 0.6], labels [1, 1, 0, 1]:
        // thresholds sweep to (0,1/3), (0,2/3), (1,2/3), (1,1).
        let scores = [0.9f64, 0.8, 0.7, 0.6];
        let labels = [true, true, false, true];
        let points = roc_curve(&scores, &labels).unwrap();
        let expected = [
            (0.0, 0.0),
            (0.0, 1.0 / 3.0),
            (0.0, 2.0 / 3.0),
            (1.0, 2.0 / 3.0),
            (1.0, 1.0),
        ];
        assert_eq!(points.len(), expected.len());
        for ((fx, fy), (ex, ey)) in points.iter().zip(expected.iter()) {
            assert!((fx - ex).abs() < 1e-15 && (fy - ey).abs() < 1e-15);
        }
    }

    #[test]
    fn perfect_and_degenerate_curves() {
        let scores = [0.9f64, 0.8, 0.2, 0.1];
        let labels = [true, true, false, false];
        let points = roc_curve(&scores, &labels).unwrap();
        assert!(points.contains(&(0.0, 1.0)));
        assert_eq!(auc(&points), 1.0);

        // All scores equal: the curve collapses to its endpoints.
        let flat = roc_curve(&[0.5f64, 0.5, 0.5, 0.5], &labels).unwrap();
        assert_eq!(flat, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(auc(&flat), 0.5);

        assert!(matches!(
            roc_curve(&[0.1f64, 0.2], &[true, true]),
            Err(Error::SingleClass)
        ));
        assert!(matches!(
            roc_curve(&[f64::NAN, 0.2], &[true, false]),
            Err(Error::NonFiniteScore(0))
        ));
    }

    #[test]
    fn trapezoid_matches_pairwise_u_statistic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let n = 200;
            // Coarse scores force plenty of ties.
            let scores: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 20.0).round() / 20.0).collect();
            let labels: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.4).collect();
            if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
                continue;
            }
            let fast = auc_from_scores(&scores, &labels).unwrap();
            let slow = pairwise_auc(&scores, &labels);
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn mean_and_stderr_basics() {
        let (mean, se) = mean_and_stderr(&[1.0f64, 2.0, 3.0, 4.0]);
        assert!((mean - 2.5).abs() < 1e-15);
        // Sample std of 1..4 is sqrt(5/3); stderr divides by sqrt(4).
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        let (m1, s1) = mean_and_stderr(&[7.0f64]);
        assert_eq!((m1, s1), (7.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn auc_invariant_under_monotone_transforms(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 60;
            let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
            labels[0] = true;
            labels[1] = false;
            let base = auc_from_scores(&scores, &labels).unwrap();
            let affine: Vec<f64> = scores.iter().map(|s| 3.0 * s + 11.0).collect();
            let exp: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
            prop_assert!((auc_from_scores(&affine, &labels).unwrap() - base).abs() < 1e-15);
            prop_assert!((auc_from_scores(&exp, &labels).unwrap() - base).abs() < 1e-15);
        }

        #[test]
        fn auc_of_negated_scores_complements(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 50;
            let scores: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 8.0).round() / 8.0).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
            labels[0] = true;
            labels[1] = false;
            let forward = auc_from_scores(&scores, &labels).unwrap();
            let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
            let backward = auc_from_scores(&negated, &labels).unwrap();
            prop_assert!((forward + backward - 1.0).abs() < 1e-12);
        }

        #[test]
        fn roc_points_are_monotone(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 40;
            let scores: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 6.0).round() / 6.0).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
            labels[0] = true;
            labels[1] = false;
            let points = roc_curve(&scores, &labels).unwrap();
            prop_assert_eq!(points[0], (0.0, 0.0));
            prop_assert_eq!(*points.last().unwrap(), (1.0, 1.0));
            for window in points.windows(2) {
                prop_assert!(window[1].0 >= window[0].0);
                prop_assert!(window[1].1 >= window[0].1);
            }
        }
    }
}
