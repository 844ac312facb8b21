//! k-nearest-neighbour majority vote with a k-d tree index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::baselines::vote;
use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_K: usize = 5;

/// Candidate neighbour ordered by `(distance², index)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf(Vec<usize>),
    Split {
        axis: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    root: Node,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KdTree {
    pub fn build(x: &Matrix) -> Self {
        let idx: Vec<usize> = (0..x.rows()).collect();
        KdTree {
            root: Self::build_node(x, idx),
        }
    }

    fn build_node(x: &Matrix, mut idx: Vec<usize>) -> Node {
        if idx.len() <= LEAF_SIZE || x.cols() == 0 {
            return Node::Leaf(idx);
        }
        // split the widest axis at its median
        let (axis, spread) = (0..x.cols())
            .map(|c| {
                let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(x.get(i, c)), hi.max(x.get(i, c)))
                });
                (c, hi - lo)
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if spread <= 0.0 {
            return Node::Leaf(idx);
        }
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| x.get(a, axis).total_cmp(&x.get(b, axis)));
        let value = x.get(idx[mid], axis);
        let (left, right): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| x.get(i, axis) < value);
        if left.is_empty() || right.is_empty() {
            let mut all = left;
            all.extend(right);
            return Node::Leaf(all);
        }
        Node::Split {
            axis,
            value,
            left: Box::new(Self::build_node(x, left)),
            right: Box::new(Self::build_node(x, right)),
        }
    }

    /// The `k` nearest rows to `q`, sorted by `(distance, index)`.
    pub fn nearest(&self, x: &Matrix, q: &[f64], k: usize) -> Vec<usize> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        Self::search(&self.root, x, q, k, &mut heap);
        let mut out = heap.into_sorted_vec();
        out.truncate(k);
        out.into_iter().map(|c| c.index).collect()
    }

    fn search(node: &Node, x: &Matrix, q: &[f64], k: usize, heap: &mut BinaryHeap<Candidate>) {
        match node {
            Node::Leaf(idx) => {
                for &i in idx {
                    let c = Candidate {
                        dist: sq_dist(q, x.row(i)),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("k >= 1") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[*axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                Self::search(near, x, q, k, heap);
                // equal distances must still be visited for index tie-breaks
                let full = heap.len() == k;
                if !full || diff * diff <= heap.peek().expect("non-empty").dist {
                    Self::search(far, x, q, k, heap);
                }
            }
        }
    }
}

/// Exhaustive search, sorted by `(distance, index)`.
pub fn brute_force_nearest(x: &Matrix, q: &[f64], k: usize) -> Vec<usize> {
    let mut all: Vec<Candidate> = (0..x.rows())
        .map(|i| Candidate {
            dist: sq_dist(q, x.row(i)),
            index: i,
        })
        .collect();
    all.sort();
    all.truncate(k);
    all.into_iter().map(|c| c.index).collect()
}

#[derive(Debug, Clone)]
pub struct KnnModel {
    pub k: usize,
    x: Matrix,
    labels: Vec<SensationClass>,
    tree: KdTree,
}

pub fn fit_knn(x: &Matrix, labels: &[SensationClass], k: usize) -> Result<KnnModel> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if x.rows() != labels.len() {
        return Err(Error::InvalidInput("row/label count mismatch".into()));
    }
    if k > x.rows() {
        return Err(Error::TooFewRows {
            needed: k,
            have: x.rows(),
        });
    }
    Ok(KnnModel {
        k,
        tree: KdTree::build(x),
        x: x.clone(),
        labels: labels.to_vec(),
    })
}

impl KnnModel {
    pub fn neighbours(&self, q: &[f64]) -> Vec<usize> {
        self.tree.nearest(&self.x, q, self.k)
    }

    /// Majority vote of the `k` nearest; ties go to the lowest class.
    pub fn predict_knn(&self, q: &Matrix) -> Result<Vec<SensationClass>> {
        if q.cols() != self.x.cols() {
            return Err(Error::WidthMismatch {
                expected: self.x.cols(),
                actual: q.cols(),
            });
        }
        Ok(q.iter_rows()
            .map(|row| vote(self.neighbours(row).iter().map(|&i| self.labels[i])))
            .collect())
    }
}
