//! Pseudo-observations, the empirical copula and resampling from the
//! symmetrized empirical copulas used as null distributions.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::symmetry::Symmetry;

/// Where the points of a [`UniformSample`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Drawn directly from a copula (or supplied as already uniform).
    Direct,
    /// Rank-transformed raw data.
    Pseudo,
    /// Drawn from a symmetrized empirical copula.
    Resampled,
}

/// `n` points in `(0, 1]²`.
///
/// Samples built from ranks live on the lattice `{1/n, …, 1}`; that lattice
/// size is carried along (also through resampling) so reflections map the
/// support onto itself.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformSample {
    points: Vec<[f64; 2]>,
    provenance: Provenance,
    lattice: Option<usize>,
}

impl UniformSample {
    pub fn new(points: Vec<[f64; 2]>, provenance: Provenance) -> Result<Self> {
        let lattice = (provenance == Provenance::Pseudo).then_some(points.len());
        Self::with_lattice(points, provenance, lattice)
    }

    fn with_lattice(
        points: Vec<[f64; 2]>,
        provenance: Provenance,
        lattice: Option<usize>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("sample is empty".into()));
        }
        if let Some(p) = points.iter().find(|p| !p.iter().all(|&x| x > 0.0 && x <= 1.0)) {
            return Err(Error::InvalidInput(format!(
                "sample point ({}, {}) outside (0, 1]",
                p[0], p[1]
            )));
        }
        Ok(UniformSample { points, provenance, lattice })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Denominator of the rank lattice, if the sample lives on one.
    pub fn lattice(&self) -> Option<usize> {
        self.lattice
    }

    /// Pseudo-observations of this sample: each coordinate replaced by its
    /// midrank divided by `n`. Resamples contain repeated points, so ties are
    /// expected here and not reported.
    pub fn reranked(&self) -> UniformSample {
        let mut points = vec![[0.0; 2]; self.len()];
        for axis in 0..2 {
            let col: Vec<f64> = self.points.iter().map(|p| p[axis]).collect();
            for (p, r) in points.iter_mut().zip(midranks(&col).0) {
                p[axis] = r;
            }
        }
        UniformSample { lattice: Some(self.len()), points, provenance: Provenance::Pseudo }
    }

    /// The sample with coordinates exchanged.
    pub fn swapped(&self) -> UniformSample {
        UniformSample {
            points: self.points.iter().map(|&[u, v]| [v, u]).collect(),
            provenance: self.provenance,
            lattice: self.lattice,
        }
    }

    /// `x ↦ 1 − x` on continuous samples, `x ↦ 1 − x + 1/n` on the rank lattice.
    fn reflect(&self, x: f64) -> f64 {
        match self.lattice {
            None => 1.0 - x,
            Some(l) => {
                let l = l as f64;
                // ranks may be half-integers (midranks)
                let r = (2.0 * x * l).round() / 2.0;
                (l - r + 1.0) / l
            }
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["u", "v"])?;
        for [u, v] in &self.points {
            out.write_record([u.to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Raw multivariate observations, one column per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
}

impl DataMatrix {
    pub fn new(columns: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if columns.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 columns, got {}",
                columns.len()
            )));
        }
        if names.len() != columns.len() {
            return Err(Error::InvalidInput("column names do not match columns".into()));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInput("columns have different lengths".into()));
        }
        if n < 2 {
            return Err(Error::Degenerate(format!("need at least 2 observations, got {n}")));
        }
        if columns.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("data contain non-finite values".into()));
        }
        Ok(DataMatrix { columns, names })
    }

    /// Parse CSV with a header row of column names. Rows with a missing
    /// field (empty, `NA`, `NaN`) are dropped.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let mut columns = vec![Vec::new(); names.len()];
        let mut dropped = 0usize;
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let mut row = Vec::with_capacity(names.len());
            let mut missing = false;
            for field in record.iter() {
                if field.is_empty()
                    || field.eq_ignore_ascii_case("na")
                    || field.eq_ignore_ascii_case("nan")
                {
                    missing = true;
                    break;
                }
                let x: f64 = field.parse().map_err(|_| {
                    Error::InvalidInput(format!(
                        "row {}: cannot parse '{field}' as a number",
                        line + 2
                    ))
                })?;
                row.push(x);
            }
            if missing {
                dropped += 1;
                continue;
            }
            for (c, x) in columns.iter_mut().zip(row) {
                c.push(x);
            }
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} row(s) with missing values");
        }
        Self::new(columns, names)
    }

    pub fn nrows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    /// Index of a column given by name or zero-based position.
    pub fn resolve_column(&self, key: &str) -> Result<usize> {
        if let Some(i) = self.names.iter().position(|n| n == key) {
            return Ok(i);
        }
        match key.parse::<usize>() {
            Ok(i) if i < self.ncols() => Ok(i),
            _ => Err(Error::InvalidInput(format!("no column '{key}'"))),
        }
    }

    /// Interpret two columns as an already-uniform sample (no ranking).
    pub fn uniform_pair(&self, a: usize, b: usize) -> Result<UniformSample> {
        check_pair(self, a, b)?;
        let points = self.columns[a].iter().zip(&self.columns[b]).map(|(&u, &v)| [u, v]).collect();
        UniformSample::new(points, Provenance::Direct)
    }
}

fn check_pair(data: &DataMatrix, a: usize, b: usize) -> Result<()> {
    if a == b {
        return Err(Error::InvalidInput("the two columns of a pair must differ".into()));
    }
    if a >= data.ncols() || b >= data.ncols() {
        return Err(Error::InvalidInput(format!(
            "column index out of range ({a}, {b}) for {} columns",
            data.ncols()
        )));
    }
    Ok(())
}

/// Rank-transform columns `a` and `b` into pseudo-observations `rank / n`.
///
/// Ties get midranks and a logged warning.
pub fn pseudo_observations(data: &DataMatrix, a: usize, b: usize) -> Result<UniformSample> {
    check_pair(data, a, b)?;
    let ua = scaled_ranks(data.column(a), &data.names[a])?;
    let ub = scaled_ranks(data.column(b), &data.names[b])?;
    let points = ua.into_iter().zip(ub).map(|(u, v)| [u, v]).collect();
    UniformSample::new(points, Provenance::Pseudo)
}

fn scaled_ranks(x: &[f64], name: &str) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("column '{name}' has fewer than 2 observations")));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::Degenerate(format!("column '{name}' is constant")));
    }
    let (ranks, ties) = midranks(x);
    if ties {
        log::warn!("column '{name}' has ties; using midranks");
    }
    Ok(ranks)
}

/// Midranks divided by `n`, and whether any ties occurred.
fn midranks(x: &[f64]) -> (Vec<f64>, bool) {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; n];
    let mut ties = false;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[order[end]] == x[order[start]] {
            end += 1;
        }
        ties |= end - start > 1;
        // 1-based positions start+1..=end share their mean
        let mid = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mid / n as f64;
        }
        start = end;
    }
    (ranks, ties)
}

/// Coordinates within this distance of a query count as equal to it, so that
/// a recomputed complement such as `1 − (1 − u)` lands on the same side of a
/// lattice point as `u`.
pub const TIE_TOL: f64 = 1e-12;

#[inline]
fn at_most(x: f64, bound: f64) -> bool {
    x <= bound + TIE_TOL
}

/// Empirical copula `(1/n) #{i : U_i1 ≤ u, U_i2 ≤ v}`, by direct counting.
pub fn ecdf_copula(sample: &UniformSample, u: f64, v: f64) -> f64 {
    let count = sample.points.iter().filter(|p| at_most(p[0], u) && at_most(p[1], v)).count();
    count as f64 / sample.len() as f64
}

/// Empirical survival copula `Ĉ(1 − u, 1 − v) − 1 + u + v`.
pub fn survival_ecdf(sample: &UniformSample, u: f64, v: f64) -> f64 {
    ecdf_copula(sample, 1.0 - u, 1.0 - v) - 1.0 + u + v
}

/// Batch evaluator for the empirical copula of one sample.
///
/// Keeps the points sorted along each axis so that a whole row of
/// evaluations `Ĉ(t₁, v), …, Ĉ(t_p, v)` costs `O(n + p)`. Counts agree
/// exactly with direct counting.
#[derive(Clone, Debug)]
pub struct EmpiricalCopula {
    by_first: Vec<[f64; 2]>,
    by_second: Vec<[f64; 2]>,
}

impl EmpiricalCopula {
    pub fn new(sample: &UniformSample) -> Self {
        let mut by_first = sample.points.clone();
        by_first.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut by_second = sample.points.clone();
        by_second.sort_by(|a, b| a[1].total_cmp(&b[1]));
        EmpiricalCopula { by_first, by_second }
    }

    pub fn n(&self) -> usize {
        self.by_first.len()
    }

    /// `#{i : U_i1 ≤ u, U_i2 ≤ v}`.
    pub fn count(&self, u: f64, v: f64) -> usize {
        let end = self.by_first.partition_point(|p| at_most(p[0], u));
        self.by_first[..end].iter().filter(|p| at_most(p[1], v)).count()
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.count(u, v) as f64 / self.n() as f64
    }

    /// `out[k] = #{i : U_i1 ≤ thresholds[k], U_i2 ≤ v}`; thresholds ascending.
    pub fn counts_along_first(&self, thresholds: &[f64], v: f64, out: &mut [u32]) {
        sweep(&self.by_first, 0, thresholds, v, out);
    }

    /// `out[k] = #{i : U_i1 ≤ u, U_i2 ≤ thresholds[k]}`; thresholds ascending.
    pub fn counts_along_second(&self, u: f64, thresholds: &[f64], out: &mut [u32]) {
        sweep(&self.by_second, 1, thresholds, u, out);
    }
}

fn sweep(sorted: &[[f64; 2]], axis: usize, thresholds: &[f64], other: f64, out: &mut [u32]) {
    debug_assert_eq!(thresholds.len(), out.len());
    debug_assert!(thresholds.windows(2).all(|w| w[0] <= w[1]));
    let cross = 1 - axis;
    let mut i = 0;
    let mut count = 0u32;
    for (t, slot) in thresholds.iter().zip(out.iter_mut()) {
        while i < sorted.len() && at_most(sorted[i][axis], *t) {
            if at_most(sorted[i][cross], other) {
                count += 1;
            }
            i += 1;
        }
        *slot = count;
    }
}

/// Symmetrized empirical copula evaluated at `(u, v)`:
/// `Ĉ^S = ½(Ĉ(u,v) + Ĉ(v,u))`, `Ĉ^R = ½(Ĉ + Ĉ*)`, and
/// `Ĉ^J = ¼(Ĉ(u,v) + u − Ĉ(u,1−v) + v − Ĉ(1−u,v) + Ĉ*(u,v))`.
pub fn symmetrized_ecdf(sample: &UniformSample, sym: Symmetry, u: f64, v: f64) -> f64 {
    let c = |a, b| ecdf_copula(sample, a, b);
    match sym {
        Symmetry::Reflection => 0.5 * (c(u, v) + c(v, u)),
        Symmetry::Radial => 0.5 * (c(u, v) + survival_ecdf(sample, u, v)),
        Symmetry::Joint => {
            0.25 * (c(u, v) + u - c(u, 1.0 - v) + v - c(1.0 - u, v) + survival_ecdf(sample, u, v))
        }
    }
}

/// Draw `n_out` points from the symmetrized empirical copula for `sym`.
///
/// Each draw picks a sample point uniformly and applies a random element of
/// the symmetry group: identity or swap (S); identity or point reflection
/// (R); identity, either single-coordinate reflection, or both (J).
pub fn resample_null(
    sample: &UniformSample,
    sym: Symmetry,
    n_out: usize,
    seed: u64,
) -> Result<UniformSample> {
    if n_out == 0 {
        return Err(Error::InvalidInput("resample size must be at least 1".into()));
    }
    let mut rng = seed::rng(seed);
    let n = sample.len();
    let points = (0..n_out)
        .map(|_| {
            let [u, v] = sample.points[rng.random_range(0..n)];
            match sym {
                Symmetry::Reflection => {
                    if rng.random::<bool>() {
                        [v, u]
                    } else {
                        [u, v]
                    }
                }
                Symmetry::Radial => {
                    if rng.random::<bool>() {
                        [sample.reflect(u), sample.reflect(v)]
                    } else {
                        [u, v]
                    }
                }
                Symmetry::Joint => match rng.random_range(0..4u8) {
                    0 => [u, v],
                    1 => [u, sample.reflect(v)],
                    2 => [sample.reflect(u), v],
                    _ => [sample.reflect(u), sample.reflect(v)],
                },
            }
        })
        .collect();
    UniformSample::with_lattice(points, Provenance::Resampled, sample.lattice)
}
