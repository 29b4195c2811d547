//! Entropy-based supervised discretization (Fayyad & Irani style).
//!
//! A numeric column is cut recursively: at each step the candidate threshold
//! minimizing the weighted class entropy of the two halves is tested against
//! an MDL acceptance criterion, and accepted cuts recurse into both halves.
//! Candidate thresholds are the midpoints between consecutive distinct sorted
//! values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ascending cut points for one numeric attribute. An empty list means the
/// whole range is a single bin.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiscretizationCuts {
    pub points: Vec<f64>,
}

impl DiscretizationCuts {
    /// Bin index of a value: the number of cut points strictly below it,
    /// so a value equal to a cut lands in the bin on the left.
    pub fn bin_of(&self, x: f64) -> usize {
        self.points.partition_point(|&c| c < x)
    }

    /// Number of bins (`cuts + 1`).
    pub fn bin_count(&self) -> usize {
        self.points.len() + 1
    }
}

/// Class entropy in bits of a label slice.
fn label_entropy(labels: &[usize], n_classes: usize, scratch: &mut Vec<usize>) -> f64 {
    scratch.clear();
    scratch.resize(n_classes, 0);
    for &l in labels {
        scratch[l] += 1;
    }
    let total = labels.len() as f64;
    let mut h = 0.0;
    for &c in scratch.iter() {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

fn distinct_classes(labels: &[usize], n_classes: usize, scratch: &mut Vec<usize>) -> usize {
    scratch.clear();
    scratch.resize(n_classes, 0);
    for &l in labels {
        scratch[l] += 1;
    }
    scratch.iter().filter(|&&c| c > 0).count()
}

/// Recursive MDL discretization of a numeric column against class labels.
///
/// A cut is accepted iff
/// `gain > log2(N - 1) / N + delta / N` with
/// `delta = log2(3^k - 2) - [k*H(S) - k1*H(S1) - k2*H(S2)]`,
/// where `k`, `k1`, `k2` count the distinct classes in the segment and its
/// halves. All entropies are in log base 2.
pub fn mdl_discretize(values: &[f64], labels: &[usize]) -> Result<DiscretizationCuts> {
    if values.len() != labels.len() {
        return Err(Error::Validation(format!(
            "values ({}) and labels ({}) differ in length",
            values.len(),
            labels.len()
        )));
    }
    if values.is_empty() {
        return Err(Error::Validation("cannot discretize an empty column".into()));
    }
    let n_classes = labels.iter().copied().max().unwrap_or(0) + 1;

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted_labels: Vec<usize> = order.iter().map(|&i| labels[i]).collect();

    let mut cuts = Vec::new();
    let mut scratch = Vec::new();
    split_segment(
        &sorted_values,
        &sorted_labels,
        0,
        values.len(),
        n_classes,
        &mut cuts,
        &mut scratch,
    );
    cuts.sort_by(f64::total_cmp);
    Ok(DiscretizationCuts { points: cuts })
}

#[allow(clippy::too_many_arguments)]
fn split_segment(
    values: &[f64],
    labels: &[usize],
    lo: usize,
    hi: usize,
    n_classes: usize,
    cuts: &mut Vec<f64>,
    scratch: &mut Vec<usize>,
) {
    let n = hi - lo;
    if n < 2 {
        return;
    }
    let segment = &labels[lo..hi];
    let h_segment = label_entropy(segment, n_classes, scratch);
    if h_segment == 0.0 {
        return; // pure segment: zero gain everywhere
    }

    // Best candidate: lowest weighted child entropy, first position on ties.
    let mut best: Option<(f64, usize)> = None; // (weighted entropy, split index)
    let mut left_counts = vec![0usize; n_classes];
    let mut right_counts = vec![0usize; n_classes];
    for &l in segment {
        right_counts[l] += 1;
    }
    for i in (lo + 1)..hi {
        left_counts[labels[i - 1]] += 1;
        right_counts[labels[i - 1]] -= 1;
        if values[i] == values[i - 1] {
            continue;
        }
        let n_left = (i - lo) as f64;
        let n_right = (hi - i) as f64;
        let w = (n_left * counts_entropy(&left_counts) + n_right * counts_entropy(&right_counts))
            / n as f64;
        if best.map_or(true, |(bw, _)| w < bw) {
            best = Some((w, i));
        }
    }
    let Some((weighted, idx)) = best else {
        return; // single distinct value: no candidate boundary
    };

    let gain = h_segment - weighted;
    let left = &labels[lo..idx];
    let right = &labels[idx..hi];
    let k = distinct_classes(segment, n_classes, scratch) as f64;
    let k1 = distinct_classes(left, n_classes, scratch) as f64;
    let k2 = distinct_classes(right, n_classes, scratch) as f64;
    let h1 = label_entropy(left, n_classes, scratch);
    let h2 = label_entropy(right, n_classes, scratch);
    let delta = (3f64.powf(k) - 2.0).log2() - (k * h_segment - k1 * h1 - k2 * h2);
    let threshold = ((n as f64 - 1.0).log2() + delta) / n as f64;

    if gain > threshold {
        let cut = (values[idx - 1] + values[idx]) / 2.0;
        split_segment(values, labels, lo, idx, n_classes, cuts, scratch);
        cuts.push(cut);
        split_segment(values, labels, idx, hi, n_classes, cuts, scratch);
    }
}

fn counts_entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: evaluate every candidate cut of a column directly
    /// against the MDL criterion (no recursion), returning accepted top-level
    /// cuts ordered by preference.
    fn oracle_top_level_cut(values: &[f64], labels: &[usize]) -> Option<f64> {
        let n = values.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let v: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        let l: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
        let n_classes = labels.iter().copied().max().unwrap_or(0) + 1;

        let ent = |ls: &[usize]| -> f64 {
            let mut counts = vec![0usize; n_classes];
            for &x in ls {
                counts[x] += 1;
            }
            counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / ls.len() as f64;
                    -p * p.log2()
                })
                .sum()
        };
        let classes = |ls: &[usize]| -> f64 {
            let mut counts = vec![0usize; n_classes];
            for &x in ls {
                counts[x] += 1;
            }
            counts.iter().filter(|&&c| c > 0).count() as f64
        };

        let h_s = ent(&l);
        let mut best: Option<(f64, f64)> = None;
        for i in 1..n {
            if v[i] == v[i - 1] {
                continue;
            }
            let w = (i as f64 * ent(&l[..i]) + (n - i) as f64 * ent(&l[i..])) / n as f64;
            let gain = h_s - w;
            let k = classes(&l);
            let delta = (3f64.powf(k) - 2.0).log2()
                - (k * h_s - classes(&l[..i]) * ent(&l[..i]) - classes(&l[i..]) * ent(&l[i..]));
            let accepted = gain > ((n as f64 - 1.0).log2() + delta) / n as f64;
            if accepted && best.map_or(true, |(bw, _)| w < bw) {
                best = Some((w, (v[i - 1] + v[i]) / 2.0));
            }
        }
        best.map(|(_, cut)| cut)
    }

    #[test]
    fn two_class_step_gets_one_cut() {
        // Oracle over all 3 candidate cuts agrees: only the middle one is
        // accepted, at the midpoint 2.5.
        let values = [1.0, 2.0, 3.0, 4.0];
        let labels = [0, 0, 1, 1];
        let expected = oracle_top_level_cut(&values, &labels).unwrap();
        assert_eq!(expected, 2.5);
        let cuts = mdl_discretize(&values, &labels).unwrap();
        assert_eq!(cuts.points, vec![2.5]);
    }

    #[test]
    fn identical_labels_yield_no_cuts() {
        let values = [1.0, 2.0, 3.0, 4.0];
        let labels = [0, 0, 0, 0];
        let cuts = mdl_discretize(&values, &labels).unwrap();
        assert!(cuts.points.is_empty());
    }

    #[test]
    fn single_repeated_value_yields_no_cuts() {
        let values = [7.0, 7.0, 7.0];
        let labels = [0, 1, 0];
        let cuts = mdl_discretize(&values, &labels).unwrap();
        assert!(cuts.points.is_empty());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(mdl_discretize(&[1.0, 2.0], &[0]).is_err());
    }

    #[test]
    fn weak_split_is_rejected_by_mdl() {
        // Nearly uniform labels: no cut passes the criterion.
        let values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let labels = [0, 1, 0, 1, 0, 1];
        let cuts = mdl_discretize(&values, &labels).unwrap();
        assert!(cuts.points.is_empty());
        assert!(oracle_top_level_cut(&values, &labels).is_none());
    }

    #[test]
    fn bin_of_counts_cuts_strictly_below() {
        let cuts = DiscretizationCuts {
            points: vec![1.5, 3.5],
        };
        assert_eq!(cuts.bin_of(1.0), 0);
        assert_eq!(cuts.bin_of(1.5), 0); // equal to a cut -> left bin
        assert_eq!(cuts.bin_of(2.0), 1);
        assert_eq!(cuts.bin_of(9.0), 2);
        assert_eq!(cuts.bin_count(), 3);
    }

    #[test]
    fn recursion_splits_accepted_halves() {
        // Three pure blocks over three classes: the top-level cut separates
        // class 0, the recursion then separates classes 1 and 2.
        let values: Vec<f64> = (0..32).map(f64::from).collect();
        let mut labels = vec![0usize; 16];
        labels.extend(std::iter::repeat(1).take(8));
        labels.extend(std::iter::repeat(2).take(8));
        let cuts = mdl_discretize(&values, &labels).unwrap();
        assert_eq!(cuts.points, vec![15.5, 23.5]);
    }
}
