//! Discretized symmetry test functions.
//!
//! For an anchor `v` and grid point `t`:
//!
//! | family | f̂_v(t)                                  |
//! |--------|------------------------------------------|
//! | S      | Ĉ(t, v) − Ĉ(v, t)                        |
//! | R      | Ĉ(t, v) − Ĉ(1 − t, 1 − v) + 1 − t − v    |
//! | J1     | Ĉ(t, v) + Ĉ(t, 1 − v) − t                |
//! | J2     | Ĉ(t, v) + Ĉ(1 − t, v) − v                |
//!
//! and ĝ_w = −f̂_w. Each function vanishes identically when the copula has
//! the corresponding symmetry.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::copula::CopulaSpec;
use crate::empirical::{EmpiricalCopula, UniformSample};
use crate::error::{Error, Result};
use crate::seed;
use crate::symmetry::Symmetry;

/// Row-major `rows × cols` matrix of curve values.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CurveMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "curve data has {} values, expected {rows}×{cols}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("curve values must be finite".into()));
        }
        Ok(CurveMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("curves have different lengths".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.cols + k]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    /// `self` on top of `other`.
    pub fn stack(&self, other: &CurveMatrix) -> Result<CurveMatrix> {
        if self.cols != other.cols {
            return Err(Error::GridMismatch);
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(CurveMatrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn select(&self, rows: &[usize]) -> CurveMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        CurveMatrix { rows: rows.len(), cols: self.cols, data }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveFamily {
    S,
    R,
    J1,
    J2,
}

impl CurveFamily {
    pub fn for_symmetry(sym: Symmetry) -> &'static [CurveFamily] {
        match sym {
            Symmetry::Reflection => &[CurveFamily::S],
            Symmetry::Radial => &[CurveFamily::R],
            Symmetry::Joint => &[CurveFamily::J1, CurveFamily::J2],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    F,
    G,
}

/// Metadata of one curve in a [`FunctionalSet`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub value: f64,
    pub kind: CurveKind,
    pub family: CurveFamily,
}

/// Anchor values `v₁…v_m` (f-curves) and `w₁…w_m` (g-curves).
#[derive(Clone, Debug, PartialEq)]
pub struct Anchors {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl Anchors {
    pub fn m(&self) -> usize {
        self.v.len()
    }

    /// `v₁…v_m, w₁…w_m`.
    pub fn values(&self) -> Vec<f64> {
        self.v.iter().chain(&self.w).copied().collect()
    }
}

/// Draw `2m` i.i.d. uniform anchors; deterministic given `seed`.
pub fn draw_anchors(m: usize, seed: u64) -> Result<Anchors> {
    if m == 0 {
        return Err(Error::InvalidInput("need at least one anchor".into()));
    }
    let mut rng = seed::rng(seed);
    let v = (0..m).map(|_| rng.random::<f64>()).collect();
    let w = (0..m).map(|_| rng.random::<f64>()).collect();
    Ok(Anchors { v, w })
}

/// Evenly spaced interior grid `t_k = k / (p + 1)`, `k = 1…p`.
pub fn grid(p: usize) -> Vec<f64> {
    (1..=p).map(|k| k as f64 / (p + 1) as f64).collect()
}

/// A set of discretized test functions on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalSet {
    pub values: CurveMatrix,
    pub grid: Vec<f64>,
    pub anchors: Vec<Anchor>,
    pub sym: Symmetry,
}

impl FunctionalSet {
    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    /// Rows belonging to one curve family (J1 or J2 for joint sets).
    pub fn family_rows(&self, family: CurveFamily) -> CurveMatrix {
        let idx: Vec<usize> = self
            .anchors
            .iter()
            .enumerate()
            .filter(|(_, a)| a.family == family)
            .map(|(i, _)| i)
            .collect();
        self.values.select(&idx)
    }

    /// First row: grid; one row per curve after that.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(self.grid.iter().map(|t| t.to_string()))?;
        for row in self.values.iter_rows() {
            out.write_record(row.iter().map(|x| x.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Sidecar JSON with the symmetry tag and per-row anchor metadata.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sym": self.sym,
            "p": self.grid.len(),
            "k": self.len(),
            "anchors": self.anchors,
        })
    }
}

/// Evaluate the test functions of `sym` on `sample` at the given anchors.
///
/// Rows are ordered f-curves then g-curves; joint sets hold the J1 block
/// followed by the J2 block, so `K = 2m` for S and R and `K = 4m` for J.
pub fn build_set(
    sample: &UniformSample,
    sym: Symmetry,
    anchors: &Anchors,
    p: usize,
) -> Result<FunctionalSet> {
    if p < 2 {
        return Err(Error::InvalidInput(format!("grid needs at least 2 points, got {p}")));
    }
    if anchors.v.is_empty() || anchors.w.is_empty() {
        return Err(Error::InvalidInput("anchors must be nonempty".into()));
    }
    let ec = EmpiricalCopula::new(sample);
    let t = grid(p);
    // 1 − t_k, reordered ascending
    let t_rev: Vec<f64> = t.iter().rev().map(|x| 1.0 - x).collect();
    let n = ec.n() as f64;

    let families = CurveFamily::for_symmetry(sym);
    let rows = families.len() * (anchors.v.len() + anchors.w.len());
    let mut data = Vec::with_capacity(rows * p);
    let mut meta = Vec::with_capacity(rows);
    let mut a = vec![0u32; p];
    let mut b = vec![0u32; p];
    let mut row = vec![0.0; p];

    for &family in families {
        for (kind, list) in [(CurveKind::F, &anchors.v), (CurveKind::G, &anchors.w)] {
            for &v in list {
                match family {
                    CurveFamily::S => {
                        ec.counts_along_first(&t, v, &mut a);
                        ec.counts_along_second(v, &t, &mut b);
                        for k in 0..p {
                            row[k] = (a[k] as f64 - b[k] as f64) / n;
                        }
                    }
                    CurveFamily::R => {
                        ec.counts_along_first(&t, v, &mut a);
                        ec.counts_along_first(&t_rev, 1.0 - v, &mut b);
                        for k in 0..p {
                            let mirrored = b[p - 1 - k] as f64;
                            row[k] = (a[k] as f64 - mirrored) / n + (1.0 - t[k] - v);
                        }
                    }
                    CurveFamily::J1 => {
                        ec.counts_along_first(&t, v, &mut a);
                        ec.counts_along_first(&t, 1.0 - v, &mut b);
                        for k in 0..p {
                            row[k] = (a[k] as f64 + b[k] as f64) / n - t[k];
                        }
                    }
                    CurveFamily::J2 => {
                        ec.counts_along_first(&t, v, &mut a);
                        ec.counts_along_first(&t_rev, v, &mut b);
                        for k in 0..p {
                            row[k] = (a[k] as f64 + b[p - 1 - k] as f64) / n - v;
                        }
                    }
                }
                match kind {
                    CurveKind::F => data.extend_from_slice(&row),
                    CurveKind::G => data.extend(row.iter().map(|x| -x)),
                }
                meta.push(Anchor { value: v, kind, family });
            }
        }
    }

    Ok(FunctionalSet { values: CurveMatrix::new(rows, p, data)?, grid: t, anchors: meta, sym })
}

/// Population test function of a parametric copula at `(t, v)`.
pub fn population_value(copula: &CopulaSpec, family: CurveFamily, v: f64, t: f64) -> Result<f64> {
    let c = |a: f64, b: f64| copula.cdf(a, b);
    Ok(match family {
        CurveFamily::S => c(t, v)? - c(v, t)?,
        CurveFamily::R => c(t, v)? - c(1.0 - t, 1.0 - v)? + 1.0 - t - v,
        CurveFamily::J1 => c(t, v)? + c(t, 1.0 - v)? - t,
        CurveFamily::J2 => c(t, v)? + c(1.0 - t, v)? - v,
    })
}
