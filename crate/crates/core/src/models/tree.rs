//! CART growth shared by the decision tree, random forest and gradient
//! boosting.
//!
//! Each sample `i` carries two additive statistics `(a[i], b[i])`. For Gini
//! growth they are `(weight, weight * label)`; for Newton growth they are the
//! (weighted) gradient and hessian of the logistic loss. Every feature keeps a
//! presorted sample order that is stably partitioned on each split, so a tree
//! level costs `O(features * samples)`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// `x[feature] <= threshold` goes left.
    #[inline]
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature as usize] <= threshold { left as usize } else { right as usize };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left as usize).max(walk(nodes, right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Criterion {
    Gini,
    Newton { l2: f64 },
}

impl Criterion {
    fn leaf(self, a: f64, b: f64) -> f64 {
        match self {
            Criterion::Gini => {
                if a > 0.0 {
                    (b / a).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            }
            Criterion::Newton { l2 } => -a / (b + l2).max(1e-12),
        }
    }

    /// Weighted impurity (Gini) or negated Newton score; lower is better.
    fn cost(self, a: f64, b: f64) -> f64 {
        match self {
            Criterion::Gini => {
                if a > 0.0 {
                    2.0 * b * (a - b) / a
                } else {
                    0.0
                }
            }
            Criterion::Newton { l2 } => -(a * a) / (b + l2).max(1e-12),
        }
    }

    fn is_pure(self, a: f64, b: f64) -> bool {
        match self {
            Criterion::Gini => b <= 1e-12 * a || a - b <= 1e-12 * a,
            Criterion::Newton { .. } => false,
        }
    }

    fn accepts(self, gain: f64) -> bool {
        match self {
            // Zero-gain splits are allowed for impure nodes, otherwise XOR-like
            // layouts could never be separated.
            Criterion::Gini => gain.is_finite(),
            Criterion::Newton { .. } => gain > 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
    pos: usize,
}

/// Grows one tree over the distinct row indices in `samples`.
pub(crate) fn grow(
    x: &Matrix,
    samples: &[usize],
    a: &[f64],
    b: &[f64],
    criterion: Criterion,
    params: &GrowParams,
    rng: &mut Rng,
) -> Tree {
    let d = x.cols();
    let n = samples.len();
    let min_leaf = params.min_samples_leaf.max(1);
    let mut orders: Vec<Vec<usize>> = (0..d)
        .map(|f| {
            let mut o = samples.to_vec();
            o.sort_by(|&i, &j| x.get(i, f).total_cmp(&x.get(j, f)).then(i.cmp(&j)));
            o
        })
        .collect();
    let mut goes_left = alloc::vec![false; x.rows()];
    let mut scratch: Vec<usize> = Vec::with_capacity(n);

    let mut nodes = alloc::vec![Node::Leaf { value: 0.0 }];
    // (node id, start, end, depth)
    let mut stack = alloc::vec![(0usize, 0usize, n, 0usize)];
    while let Some((id, start, end, depth)) = stack.pop() {
        let count = end - start;
        let (sa, sb) = if d == 0 {
            samples.iter().fold((0.0, 0.0), |(p, q), &i| (p + a[i], q + b[i]))
        } else {
            orders[0][start..end].iter().fold((0.0, 0.0), |(p, q), &i| (p + a[i], q + b[i]))
        };
        nodes[id] = Node::Leaf { value: criterion.leaf(sa, sb) };
        let depth_ok = params.max_depth.is_none_or(|m| depth < m);
        if d == 0 || !depth_ok || count < 2 * min_leaf || criterion.is_pure(sa, sb) {
            continue;
        }
        let candidates: Vec<usize> = match params.max_features {
            Some(k) if k < d => {
                let mut c: Vec<usize> = rand::seq::index::sample(rng, d, k.max(1)).into_iter().collect();
                c.sort_unstable();
                c
            }
            _ => (0..d).collect(),
        };
        let parent = criterion.cost(sa, sb);
        let mut best: Option<Best> = None;
        for &f in &candidates {
            let ord = &orders[f][start..end];
            let (mut la, mut lb) = (0.0, 0.0);
            for p in 0..count - 1 {
                let i = ord[p];
                la += a[i];
                lb += b[i];
                let left_n = p + 1;
                if left_n < min_leaf {
                    continue;
                }
                if count - left_n < min_leaf {
                    break;
                }
                let v = x.get(i, f);
                let vn = x.get(ord[p + 1], f);
                if v == vn {
                    continue;
                }
                let gain = parent - criterion.cost(la, lb) - criterion.cost(sa - la, sb - lb);
                if best.as_ref().is_none_or(|bst| gain > bst.gain) {
                    let mid = 0.5 * (v + vn);
                    let threshold = if mid < vn { mid } else { v };
                    best = Some(Best { gain, feature: f, threshold, pos: p });
                }
            }
        }
        let Some(best) = best else { continue };
        if !criterion.accepts(best.gain) {
            continue;
        }
        let split_order = &orders[best.feature][start..end];
        for (p, &i) in split_order.iter().enumerate() {
            goes_left[i] = p <= best.pos;
        }
        let mid = start + best.pos + 1;
        for ord in orders.iter_mut() {
            let slice = &mut ord[start..end];
            scratch.clear();
            let mut w = 0;
            for k in 0..slice.len() {
                let i = slice[k];
                if goes_left[i] {
                    slice[w] = i;
                    w += 1;
                } else {
                    scratch.push(i);
                }
            }
            slice[w..].copy_from_slice(&scratch);
        }
        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[id] = Node::Split {
            feature: best.feature as u32,
            threshold: best.threshold,
            left: left as u32,
            right: left as u32 + 1,
        };
        stack.push((left + 1, mid, end, depth + 1));
        stack.push((left, start, mid, depth + 1));
    }
    Tree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grow_gini(x: &Matrix, y: &[f64], max_depth: Option<usize>) -> Tree {
        let samples: Vec<usize> = (0..x.rows()).collect();
        let a = alloc::vec![1.0; x.rows()];
        let params = GrowParams { max_depth, min_samples_leaf: 1, max_features: None };
        grow(x, &samples, &a, y, Criterion::Gini, &params, &mut crate::rng::seeded(0))
    }

    #[test]
    fn xor_needs_depth_two() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
        let y = [0.0, 1.0, 1.0, 0.0];
        let t = grow_gini(&x, &y, Some(2));
        for (row, &label) in x.iter_rows().zip(&y) {
            assert_eq!(t.predict(row), label);
        }
        assert_eq!(t.depth(), 2);
        let stump = grow_gini(&x, &y, Some(1));
        let acc = x.iter_rows().zip(&y).filter(|(r, &l)| (stump.predict(r) >= 0.5) == (l == 1.0)).count();
        assert!(acc < 4);
    }

    #[test]
    fn threshold_separates_adjacent_values() {
        let x = Matrix::from_rows(&[[1.0], [1.0 + f64::EPSILON]]);
        let t = grow_gini(&x, &[0.0, 1.0], None);
        assert_eq!(t.predict(&[1.0]), 0.0);
        assert_eq!(t.predict(&[1.0 + f64::EPSILON]), 1.0);
    }

    #[test]
    fn respects_min_samples_leaf() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]);
        let samples = [0, 1, 2, 3];
        let params = GrowParams { max_depth: None, min_samples_leaf: 2, max_features: None };
        let t = grow(&x, &samples, &[1.0; 4], &[1.0, 0.0, 0.0, 0.0], Criterion::Gini, &params, &mut crate::rng::seeded(0));
        assert_eq!(t.n_leaves(), 2);
    }
}
