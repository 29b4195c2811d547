//! C4.5-style decision tree induction with gain-ratio splits and
//! confidence-bound pruning.
//!
//! Numeric attributes split binarily at midpoints between consecutive
//! distinct sorted values; nominal attributes split multiway, one branch per
//! category. At each node only attributes whose information gain reaches the
//! average positive gain compete, and among those the split criterion
//! (gain ratio by default) picks the winner. Pruning replaces subtrees by
//! leaves bottom-up whenever the leaf's pessimistic error estimate does not
//! exceed the subtree's, using the upper confidence bound of the binomial
//! error rate at the configured confidence factor.
//!
//! Ties are broken deterministically everywhere: lowest attribute index,
//! then lowest threshold, then lowest class label index.

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeKind, AttributeSpec, Dataset, Instance};
use crate::error::{Error, Result};
use crate::model::Prediction;

/// Split quality measure used to compare attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    #[default]
    GainRatio,
    InfoGain,
}

/// Induction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// A split must leave at least this many instances in two or more branches.
    pub min_leaf_instances: usize,
    /// Confidence factor for pessimistic pruning, in (0, 1).
    pub confidence_factor: f64,
    /// Run pruning after growth.
    pub prune: bool,
    pub criterion: SplitCriterion,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf_instances: 2,
            confidence_factor: 0.25,
            prune: true,
            criterion: SplitCriterion::GainRatio,
        }
    }
}

impl TreeParams {
    fn validate(&self) -> Result<()> {
        if self.min_leaf_instances < 1 {
            return Err(Error::Validation("min_leaf_instances must be >= 1".into()));
        }
        if !(self.confidence_factor > 0.0 && self.confidence_factor < 1.0) {
            return Err(Error::Validation(
                "confidence_factor must lie strictly between 0 and 1".into(),
            ));
        }
        Ok(())
    }
}

/// The branching test of a split node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTest {
    /// Numeric: child 0 takes `x <= threshold`, child 1 takes `x > threshold`.
    Threshold(f64),
    /// Nominal: one child per category index.
    Categories,
}

/// A node of the tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        /// Training class counts that reached this leaf.
        class_counts: Vec<usize>,
        /// Argmax of `class_counts`, ties resolved to the lowest label index.
        predicted: usize,
    },
    Split {
        attribute: usize,
        test: SplitTest,
        class_counts: Vec<usize>,
        children: Vec<TreeNode>,
    },
}

impl TreeNode {
    pub fn class_counts(&self) -> &[usize] {
        match self {
            TreeNode::Leaf { class_counts, .. } | TreeNode::Split { class_counts, .. } => {
                class_counts
            }
        }
    }

    /// Total number of nodes in this subtree.
    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { children, .. } => {
                1 + children.iter().map(TreeNode::node_count).sum::<usize>()
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { children, .. } => children.iter().map(TreeNode::leaf_count).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { children, .. } => {
                1 + children.iter().map(TreeNode::depth).max().unwrap_or(0)
            }
        }
    }
}

/// A trained tree together with the schema it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub schema_fingerprint: String,
    pub params: TreeParams,
    pub class_labels: Vec<String>,
    /// Copy of the training schema, used for rendering and routing.
    pub schema: Vec<AttributeSpec>,
    pub class_index: usize,
}

/// Class entropy in bits: `H = -sum p_i log2 p_i` over non-zero counts.
pub fn entropy(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::Validation(
            "entropy of all-zero counts is undefined".into(),
        ));
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    Ok(h)
}

/// Information gain and gain ratio of a candidate partition.
///
/// `info_gain = H(parent) - sum (n_j / n) * H(child_j)`; `split_info` is the
/// entropy of the child sizes and `gain_ratio = info_gain / split_info`,
/// defined as 0 when `split_info` is 0.
pub fn split_gain(parent_counts: &[usize], child_counts: &[Vec<usize>]) -> Result<(f64, f64)> {
    let n: usize = parent_counts.iter().sum();
    for (label, &c) in parent_counts.iter().enumerate() {
        let child_sum: usize = child_counts.iter().map(|ch| ch[label]).sum();
        if child_sum != c {
            return Err(Error::Validation(format!(
                "children do not partition the parent (label {label}: {child_sum} vs {c})"
            )));
        }
    }
    let h_parent = entropy(parent_counts)?;
    let n_f = n as f64;
    let mut weighted = 0.0;
    let mut sizes = Vec::with_capacity(child_counts.len());
    for ch in child_counts {
        let m: usize = ch.iter().sum();
        sizes.push(m);
        if m > 0 {
            weighted += (m as f64 / n_f) * entropy(ch)?;
        }
    }
    let info_gain = h_parent - weighted;
    let split_info = entropy(&sizes)?;
    let gain_ratio = if split_info == 0.0 {
        0.0
    } else {
        info_gain / split_info
    };
    Ok((info_gain, gain_ratio))
}

/// Gains below this are treated as zero.
const GAIN_EPS: f64 = 1e-10;

struct Candidate {
    attribute: usize,
    test: SplitTest,
    info_gain: f64,
    gain_ratio: f64,
    child_rows: Vec<Vec<usize>>,
}

/// Grow an unpruned tree. The dataset must be fully imputed.
pub fn build_tree(dataset: &Dataset, params: &TreeParams) -> Result<DecisionTree> {
    params.validate()?;
    if dataset.is_empty() {
        return Err(Error::Validation("cannot build a tree on no instances".into()));
    }
    if dataset.has_missing() {
        return Err(Error::Validation(
            "missing value encountered; run imputation first".into(),
        ));
    }
    let rows: Vec<usize> = (0..dataset.len()).collect();
    let root = grow(dataset, params, &rows)?;
    Ok(DecisionTree {
        root,
        schema_fingerprint: dataset.schema_fingerprint(),
        params: *params,
        class_labels: dataset.class_labels().to_vec(),
        schema: dataset.schema.clone(),
        class_index: dataset.class_index,
    })
}

fn class_counts_of(dataset: &Dataset, rows: &[usize]) -> Vec<usize> {
    let mut counts = vec![0usize; dataset.class_labels().len()];
    for &r in rows {
        counts[dataset.class_of(&dataset.instances[r])] += 1;
    }
    counts
}

fn argmax_lowest(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn grow(dataset: &Dataset, params: &TreeParams, rows: &[usize]) -> Result<TreeNode> {
    let counts = class_counts_of(dataset, rows);
    let leaf = |counts: Vec<usize>| {
        let predicted = argmax_lowest(&counts);
        TreeNode::Leaf {
            class_counts: counts,
            predicted,
        }
    };
    if counts.iter().filter(|&&c| c > 0).count() <= 1 {
        return Ok(leaf(counts));
    }

    let mut candidates = Vec::new();
    for spec in dataset.predictors() {
        let candidate = match spec.kind {
            AttributeKind::Numeric => best_numeric_split(dataset, params, rows, &counts, spec)?,
            AttributeKind::Nominal => nominal_split(dataset, params, rows, &counts, spec)?,
        };
        if let Some(c) = candidate {
            if c.info_gain > GAIN_EPS {
                candidates.push(c);
            }
        }
    }
    if candidates.is_empty() {
        return Ok(leaf(counts));
    }

    // C4.5 gate: only attributes with at least average positive gain compete.
    let avg_gain: f64 =
        candidates.iter().map(|c| c.info_gain).sum::<f64>() / candidates.len() as f64;
    let chosen = candidates
        .into_iter()
        .filter(|c| c.info_gain >= avg_gain - 1e-12)
        .min_by(|a, b| {
            let score = |c: &Candidate| match params.criterion {
                SplitCriterion::GainRatio => c.gain_ratio,
                SplitCriterion::InfoGain => c.info_gain,
            };
            // Highest score first; ties by attribute index then threshold.
            score(b)
                .total_cmp(&score(a))
                .then_with(|| a.attribute.cmp(&b.attribute))
                .then_with(|| match (&a.test, &b.test) {
                    (SplitTest::Threshold(ta), SplitTest::Threshold(tb)) => ta.total_cmp(tb),
                    _ => std::cmp::Ordering::Equal,
                })
        })
        .expect("candidates is non-empty");

    let majority = argmax_lowest(&counts);
    let mut children = Vec::with_capacity(chosen.child_rows.len());
    for child_rows in &chosen.child_rows {
        if child_rows.is_empty() {
            // Empty branch: predict the parent majority with zero counts.
            children.push(TreeNode::Leaf {
                class_counts: vec![0; counts.len()],
                predicted: majority,
            });
        } else {
            children.push(grow(dataset, params, child_rows)?);
        }
    }
    Ok(TreeNode::Split {
        attribute: chosen.attribute,
        test: chosen.test,
        class_counts: counts,
        children,
    })
}

/// Best binary split of a numeric attribute: scan thresholds at midpoints of
/// consecutive distinct sorted values, maximizing information gain (ties to
/// the lower threshold).
///
/// Two C4.5 regularizers apply. The per-branch minimum is the dynamic
/// `max(min_leaf_instances, min(25, 0.1 * n / classes))`, and the winning
/// gain pays the split-point coding cost `log2(candidates) / n` before it
/// competes with other attributes.
fn best_numeric_split(
    dataset: &Dataset,
    params: &TreeParams,
    rows: &[usize],
    parent_counts: &[usize],
    spec: &AttributeSpec,
) -> Result<Option<Candidate>> {
    let n = rows.len();
    let mut sorted: Vec<(f64, usize)> = rows
        .iter()
        .map(|&r| {
            let x = dataset.instances[r].values[spec.index]
                .as_num()
                .expect("numeric cell");
            (x, r)
        })
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let n_classes = parent_counts.len();
    let mut min_split = 0.1 * n as f64 / n_classes as f64;
    if min_split <= params.min_leaf_instances as f64 {
        min_split = params.min_leaf_instances as f64;
    } else if min_split > 25.0 {
        min_split = 25.0;
    }

    let h_parent = entropy(parent_counts)?;
    let mut left = vec![0usize; n_classes];
    let mut right = parent_counts.to_vec();

    let mut candidates = 0usize;
    let mut best: Option<(f64, f64, usize)> = None; // (info_gain, threshold, split position)
    for i in 1..n {
        let class_prev = dataset.class_of(&dataset.instances[sorted[i - 1].1]);
        left[class_prev] += 1;
        right[class_prev] -= 1;
        if sorted[i].0 == sorted[i - 1].0 {
            continue;
        }
        if (i as f64) < min_split || ((n - i) as f64) < min_split {
            continue;
        }
        candidates += 1;
        let nl = i as f64;
        let nr = (n - i) as f64;
        let weighted =
            (nl * entropy(&left)? + nr * entropy(&right)?) / n as f64;
        let gain = h_parent - weighted;
        let threshold = (sorted[i - 1].0 + sorted[i].0) / 2.0;
        let improves = match best {
            None => true,
            Some((bg, bt, _)) => gain > bg + GAIN_EPS || ((gain - bg).abs() <= GAIN_EPS && threshold < bt),
        };
        if improves {
            best = Some((gain, threshold, i));
        }
    }

    let Some((raw_gain, threshold, split_at)) = best else {
        return Ok(None);
    };
    let info_gain = raw_gain - (candidates as f64).log2() / n as f64;
    let left_rows: Vec<usize> = sorted[..split_at].iter().map(|&(_, r)| r).collect();
    let right_rows: Vec<usize> = sorted[split_at..].iter().map(|&(_, r)| r).collect();
    let split_info = entropy(&[left_rows.len(), right_rows.len()])?;
    let gain_ratio = if split_info == 0.0 {
        0.0
    } else {
        info_gain / split_info
    };
    Ok(Some(Candidate {
        attribute: spec.index,
        test: SplitTest::Threshold(threshold),
        info_gain,
        gain_ratio,
        child_rows: vec![left_rows, right_rows],
    }))
}

/// Multiway split of a nominal attribute, one branch per category. At least
/// two branches must hold `min_leaf_instances`.
fn nominal_split(
    dataset: &Dataset,
    params: &TreeParams,
    rows: &[usize],
    parent_counts: &[usize],
    spec: &AttributeSpec,
) -> Result<Option<Candidate>> {
    let n_branches = spec.nominal_values.len();
    let mut child_rows: Vec<Vec<usize>> = vec![Vec::new(); n_branches];
    for &r in rows {
        let c = dataset.instances[r].values[spec.index]
            .as_cat()
            .expect("nominal cell");
        child_rows[c].push(r);
    }
    let populated = child_rows
        .iter()
        .filter(|ch| ch.len() >= params.min_leaf_instances)
        .count();
    if populated < 2 {
        return Ok(None);
    }
    let child_counts: Vec<Vec<usize>> = child_rows
        .iter()
        .map(|ch| class_counts_of(dataset, ch))
        .collect();
    let (info_gain, gain_ratio) = split_gain(parent_counts, &child_counts)?;
    Ok(Some(Candidate {
        attribute: spec.index,
        test: SplitTest::Categories,
        info_gain,
        gain_ratio,
        child_rows,
    }))
}

/// C4.5's coverage-to-deviate table; the confidence factor is interpolated
/// linearly between entries (0.25 maps to z ~ 0.6925).
fn confidence_z(cf: f64) -> f64 {
    const VAL: [f64; 9] = [0.0, 0.001, 0.005, 0.01, 0.05, 0.10, 0.20, 0.40, 1.00];
    const DEV: [f64; 9] = [4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.00];
    let mut i = 0;
    while cf > VAL[i + 1] {
        i += 1;
    }
    DEV[i] + (DEV[i + 1] - DEV[i]) * (cf - VAL[i]) / (VAL[i + 1] - VAL[i])
}

/// Pessimistic error count: `N * U_CF(f, N)` where `U_CF` is the normal-
/// approximation upper confidence bound of the error rate `f = e / N`.
fn pessimistic_errors(n: f64, e: f64, z: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let f = e / n;
    let z2 = z * z;
    let upper =
        (f + z2 / (2.0 * n) + z * (f / n - f * f / n + z2 / (4.0 * n * n)).sqrt())
            / (1.0 + z2 / n);
    n * upper
}

fn node_pessimistic(counts: &[usize], z: f64) -> f64 {
    let n: usize = counts.iter().sum();
    let e = n - counts.iter().max().copied().unwrap_or(0);
    pessimistic_errors(n as f64, e as f64, z)
}

/// Bottom-up subtree replacement. A subtree collapses to a leaf when the
/// leaf's estimated error does not exceed the sum of its leaves' estimates.
/// Never increases the node count.
pub fn prune(tree: &DecisionTree, params: &TreeParams) -> DecisionTree {
    let z = confidence_z(params.confidence_factor);
    let (root, _) = prune_node(tree.root.clone(), z);
    DecisionTree {
        root,
        ..tree.clone()
    }
}

fn prune_node(node: TreeNode, z: f64) -> (TreeNode, f64) {
    match node {
        TreeNode::Leaf { ref class_counts, .. } => {
            let est = node_pessimistic(class_counts, z);
            (node, est)
        }
        TreeNode::Split {
            attribute,
            test,
            class_counts,
            children,
        } => {
            let mut pruned_children = Vec::with_capacity(children.len());
            let mut subtree_est = 0.0;
            for child in children {
                let (c, est) = prune_node(child, z);
                subtree_est += est;
                pruned_children.push(c);
            }
            let leaf_est = node_pessimistic(&class_counts, z);
            if leaf_est <= subtree_est {
                let predicted = argmax_lowest(&class_counts);
                (
                    TreeNode::Leaf {
                        class_counts,
                        predicted,
                    },
                    leaf_est,
                )
            } else {
                (
                    TreeNode::Split {
                        attribute,
                        test,
                        class_counts,
                        children: pruned_children,
                    },
                    subtree_est,
                )
            }
        }
    }
}

impl DecisionTree {
    /// Grow and (depending on `params.prune`) prune a tree.
    pub fn fit(dataset: &Dataset, params: &TreeParams) -> Result<DecisionTree> {
        let tree = build_tree(dataset, params)?;
        if params.prune {
            Ok(prune(&tree, params))
        } else {
            Ok(tree)
        }
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    /// Route an instance to its leaf and report the leaf class frequencies.
    pub fn predict(&self, instance: &Instance) -> Result<Prediction> {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf {
                    class_counts,
                    predicted,
                } => {
                    return Ok(leaf_prediction(class_counts, *predicted));
                }
                TreeNode::Split {
                    attribute,
                    test,
                    children,
                    ..
                } => {
                    let cell = &instance.values[*attribute];
                    if cell.is_missing() {
                        return Err(Error::Validation(format!(
                            "missing value on queried attribute '{}'",
                            self.schema[*attribute].name
                        )));
                    }
                    node = match test {
                        SplitTest::Threshold(t) => {
                            let x = cell.as_num().ok_or_else(|| {
                                Error::Validation("expected a numeric cell".into())
                            })?;
                            if x <= *t {
                                &children[0]
                            } else {
                                &children[1]
                            }
                        }
                        SplitTest::Categories => {
                            let c = cell.as_cat().ok_or_else(|| {
                                Error::Validation("expected a nominal cell".into())
                            })?;
                            &children[c]
                        }
                    };
                }
            }
        }
    }

    /// Indented text rendering, one branch per line; leaves append the
    /// predicted label and their (total/errors) counts.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.root {
            TreeNode::Leaf {
                class_counts,
                predicted,
            } => {
                out.push_str(&format!(
                    ": {} {}\n",
                    self.class_labels[*predicted],
                    counts_note(class_counts)
                ));
            }
            split => self.render(split, 0, &mut out),
        }
        out
    }

    fn render(&self, node: &TreeNode, depth: usize, out: &mut String) {
        if let TreeNode::Split {
            attribute,
            test,
            children,
            ..
        } = node
        {
            let name = &self.schema[*attribute].name;
            for (i, child) in children.iter().enumerate() {
                let branch = match test {
                    SplitTest::Threshold(t) => {
                        if i == 0 {
                            format!("{name} <= {t}")
                        } else {
                            format!("{name} > {t}")
                        }
                    }
                    SplitTest::Categories => {
                        format!("{name} = {}", self.schema[*attribute].nominal_values[i])
                    }
                };
                out.push_str(&"|   ".repeat(depth));
                out.push_str(&branch);
                match child {
                    TreeNode::Leaf {
                        class_counts,
                        predicted,
                    } => {
                        out.push_str(&format!(
                            ": {} {}\n",
                            self.class_labels[*predicted],
                            counts_note(class_counts)
                        ));
                    }
                    inner => {
                        out.push('\n');
                        self.render(inner, depth + 1, out);
                    }
                }
            }
        }
    }
}

fn counts_note(counts: &[usize]) -> String {
    let total: usize = counts.iter().sum();
    let errors = total - counts.iter().max().copied().unwrap_or(0);
    format!("({total}/{errors})")
}

fn leaf_prediction(counts: &[usize], predicted: usize) -> Prediction {
    let total: usize = counts.iter().sum();
    let probabilities = if total == 0 {
        // Empty branch: all mass on the stored majority label.
        let mut p = vec![0.0; counts.len()];
        p[predicted] = 1.0;
        p
    } else {
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    };
    Prediction {
        probabilities,
        predicted,
    }
}
