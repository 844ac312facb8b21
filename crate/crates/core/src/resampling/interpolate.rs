//! Nearest-neighbour interpolation oversampler (SMOTE family).

use std::collections::HashMap;

use rand::Rng as _;

use crate::error::Result;
use crate::matrix::Matrix;
use crate::resampling::{check_plan, Augmented, ResamplePlan};
use crate::rng::{self, Rng};

/// Neighbours considered per base row.
pub const NEIGHBOURS: usize = 5;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` rows of `rows` closest to `rows[base]`, excluding itself; ties
/// broken by position.
fn neighbours(x: &Matrix, rows: &[usize], base: usize, k: usize) -> Vec<usize> {
    let origin = x.row(rows[base]);
    let mut d: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != base)
        .map(|(j, &r)| (sq_dist(origin, x.row(r)), j))
        .collect();
    let k = k.min(d.len());
    if k < d.len() {
        d.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.truncate(k);
    }
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().map(|(_, j)| j).collect()
}

/// `count` synthetic rows from the rows of one class. Each picks a random
/// base row, one of its nearest same-class neighbours and `u ~ U(0,1)`,
/// and returns `x + u (x_nn - x)`. A single-row class is duplicated.
pub fn interpolate_class(x: &Matrix, rows: &[usize], count: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    if rows.len() == 1 {
        return vec![x.row(rows[0]).to_vec(); count];
    }
    let k = NEIGHBOURS.min(rows.len() - 1);
    let mut cache: HashMap<usize, Vec<usize>> = HashMap::new();
    (0..count)
        .map(|_| {
            let base = rng.gen_range(0..rows.len());
            let nn = cache
                .entry(base)
                .or_insert_with(|| neighbours(x, rows, base, k));
            let pick = nn[rng.gen_range(0..nn.len())];
            let u: f64 = rng.gen();
            let a = x.row(rows[base]);
            let b = x.row(rows[pick]);
            a.iter().zip(b).map(|(p, q)| p + u * (q - p)).collect()
        })
        .collect()
}

/// Original rows verbatim, then synthetic rows class by class in
/// ascending class order.
pub fn oversample_interpolation(
    x: &Matrix,
    labels: &[crate::dataset::record::SensationClass],
    plan: &ResamplePlan,
) -> Result<Augmented> {
    let by_class = check_plan(x, labels, plan)?;
    let mut out = Augmented::from_original(x, labels);
    for (class, rows) in &by_class {
        let deficit = plan.deficit(*class);
        if deficit == 0 {
            continue;
        }
        let mut r = rng::rng(rng::derive_index(plan.seed, "interp", class.index() as u64));
        for row in interpolate_class(x, rows, deficit, &mut r) {
            out.push(&row, *class);
        }
    }
    Ok(out)
}
