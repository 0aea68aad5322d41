//! Modified band depth (bands of two curves) and depth ranking.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seed;
use crate::test_functions::CurveMatrix;

/// Modified band depth of each curve of a sample of `K` curves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthVector {
    pub depths: Vec<f64>,
}

impl DepthVector {
    pub fn source_size(&self) -> usize {
        self.depths.len()
    }
}

fn pairs(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// Modified band depth with closed bands over all unordered curve pairs.
///
/// At each grid point the curves are sorted once; a curve with `b` values
/// strictly below it and `a` strictly above lies inside every band except
/// the `C(b,2) + C(a,2)` bands formed entirely on one side. Band counts are
/// accumulated as integers, so the result is exact for a given input.
pub fn modified_band_depth(curves: &CurveMatrix) -> Result<DepthVector> {
    let k = curves.rows();
    let p = curves.cols();
    if k < 3 {
        return Err(Error::TooFewCurves(k));
    }
    if p == 0 {
        return Err(Error::InvalidInput("curves have no grid points".into()));
    }
    let all = pairs(k as u64);
    let mut totals = vec![0u64; k];
    let mut column: Vec<(f64, u32)> = Vec::with_capacity(k);
    for t in 0..p {
        column.clear();
        // + 0.0 folds -0.0 into 0.0 so equal values sort adjacently
        column.extend((0..k).map(|i| (curves.get(i, t) + 0.0, i as u32)));
        column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut start = 0;
        while start < k {
            let mut end = start + 1;
            while end < k && column[end].0 == column[start].0 {
                end += 1;
            }
            let inside = all - pairs(start as u64) - pairs((k - end) as u64);
            for &(_, i) in &column[start..end] {
                totals[i as usize] += inside;
            }
            start = end;
        }
    }
    let denom = (p as u64 * all) as f64;
    Ok(DepthVector { depths: totals.into_iter().map(|c| c as f64 / denom).collect() })
}

/// Ranks `1..=K` ascending in depth; exact ties are ordered uniformly at
/// random (deterministic given `seed`). `ranks[i]` is the rank of curve `i`.
pub fn rank_by_depth(depths: &DepthVector, seed: u64) -> Vec<usize> {
    let k = depths.depths.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(&mut seed::rng(seed));
    // stable: tied curves keep their shuffled relative order
    order.sort_by(|&a, &b| depths.depths[a].total_cmp(&depths.depths[b]));
    let mut ranks = vec![0; k];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}
