//! Rank-based bootstrap test of copula symmetry.
//!
//! One evaluation of the statistic `W`:
//!
//! 1. build `2m` test functions (f̂ at anchors `v`, ĝ at anchors `w`) from the data;
//! 2. draw an `n`-point sample from the symmetrized empirical copula;
//! 3. build `2m₀` test functions from that null sample;
//! 4. pool both sets and compute modified band depths;
//! 5. rank by depth (random tie-breaks) and sum the ranks of the data curves.
//!
//! Curves of an asymmetric copula sit away from zero, get low depth, and
//! make `W` small. The null distribution of `W` comes from `N_b` bootstrap
//! samples drawn from the symmetrized copula, each pushed through the same
//! five steps with fresh randomness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::{modified_band_depth, rank_by_depth, DepthVector};
use crate::empirical::{resample_null, UniformSample};
use crate::error::{Error, Result};
use crate::seed;
use crate::symmetry::Symmetry;
use crate::test_functions::{build_set, draw_anchors, Anchors, FunctionalSet};

/// Smallest sample the test accepts.
pub const MIN_SAMPLE_SIZE: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub sym: Symmetry,
    /// Anchors per curve kind for the data curves.
    pub m: usize,
    /// Anchors per curve kind for the null curves.
    pub m0: usize,
    /// Grid size.
    pub p: usize,
    /// Bootstrap replicates `N_b`.
    pub n_boot: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Reuse the first null curve set for every bootstrap replicate.
    #[serde(default)]
    pub share_null: bool,
    /// Reuse the first anchor draw for every bootstrap replicate.
    #[serde(default)]
    pub fixed_anchors: bool,
}

impl TestConfig {
    /// Defaults for a sample of size `n`: `m = m₀ = max(250, n)`, `p = 100`,
    /// `N_b = 1000`, `α = 0.05`.
    pub fn new(sym: Symmetry, n: usize) -> Self {
        let m = n.max(250);
        TestConfig {
            sym,
            m,
            m0: m,
            p: 100,
            n_boot: 1000,
            alpha: 0.05,
            seed: 0,
            share_null: false,
            fixed_anchors: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m", self.m), ("m0", self.m0), ("n_boot", self.n_boot)] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.p < 2 {
            return Err(Error::InvalidConfig("p must be at least 2".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Summary {
    /// Five-number summary with linearly interpolated quartiles.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Summary { min: v[0], q25: q(0.25), median: q(0.5), q75: q(0.75), max: v[v.len() - 1] })
    }
}

/// Depth summaries of the observed `W` evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub observed_depth: Summary,
    pub null_depth: Summary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestResult {
    pub config: TestConfig,
    pub n: usize,
    pub w_observed: u64,
    /// Bootstrap statistics in replicate order.
    pub w_null: Vec<u64>,
    pub p_value: f64,
    pub reject: bool,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct ResultRecord<'a> {
    sym: Symmetry,
    n: usize,
    m: usize,
    m0: usize,
    p: usize,
    n_boot: usize,
    alpha: f64,
    seed: u64,
    share_null: bool,
    fixed_anchors: bool,
    w_observed: u64,
    p_value: f64,
    reject: bool,
    w_null_summary: Summary,
    diagnostics: &'a Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    w_null: Option<&'a [u64]>,
}

impl TestResult {
    pub fn w_null_summary(&self) -> Summary {
        let w: Vec<f64> = self.w_null.iter().map(|&x| x as f64).collect();
        Summary::of(&w).expect("n_boot >= 1")
    }

    /// JSON report; `full` also includes every bootstrap statistic.
    pub fn to_json(&self, full: bool) -> serde_json::Value {
        let c = &self.config;
        let record = ResultRecord {
            sym: c.sym,
            n: self.n,
            m: c.m,
            m0: c.m0,
            p: c.p,
            n_boot: c.n_boot,
            alpha: c.alpha,
            seed: c.seed,
            share_null: c.share_null,
            fixed_anchors: c.fixed_anchors,
            w_observed: self.w_observed,
            p_value: self.p_value,
            reject: self.reject,
            w_null_summary: self.w_null_summary(),
            diagnostics: &self.diagnostics,
            w_null: full.then_some(&self.w_null[..]),
        };
        serde_json::to_value(record).expect("plain data serializes")
    }
}

/// Rank-sum statistic of the `observed` curves within `observed ∪ null_set`.
pub fn w_statistic(observed: &FunctionalSet, null_set: &FunctionalSet, seed: u64) -> Result<u64> {
    Ok(w_with_depths(observed, null_set, seed)?.0)
}

fn w_with_depths(
    observed: &FunctionalSet,
    null_set: &FunctionalSet,
    seed: u64,
) -> Result<(u64, DepthVector)> {
    if observed.grid != null_set.grid || observed.sym != null_set.sym {
        return Err(Error::GridMismatch);
    }
    let pooled = observed.values.stack(&null_set.values)?;
    let depths = modified_band_depth(&pooled)?;
    let ranks = rank_by_depth(&depths, seed);
    let w = ranks[..observed.len()].iter().map(|&r| r as u64).sum();
    Ok((w, depths))
}

/// Monte-Carlo p-value `(1 + #{W_b ≤ W}) / (N_b + 1)`.
pub fn p_value(w_observed: u64, w_null: &[u64]) -> f64 {
    let below = w_null.iter().filter(|&&w| w <= w_observed).count();
    (1 + below) as f64 / (w_null.len() + 1) as f64
}

/// An `n`-point draw from the symmetrized empirical copula. Rank-based
/// samples get their draws re-ranked, so observed and null curves come from
/// the same estimator.
fn draw_null(sample: &UniformSample, sym: Symmetry, seed: u64) -> Result<UniformSample> {
    let draw = resample_null(sample, sym, sample.len(), seed)?;
    Ok(if sample.lattice().is_some() { draw.reranked() } else { draw })
}

struct Evaluation {
    w: u64,
    depths: DepthVector,
    observed_len: usize,
}

/// Steps 1–5 on one sample. Sub-seeds derive from `seed`; `anchors` and
/// `null_set` override the fresh draws when given.
fn evaluate(
    sample: &UniformSample,
    cfg: &TestConfig,
    seed: u64,
    anchors: Option<&(Anchors, Anchors)>,
    null_set: Option<&FunctionalSet>,
) -> Result<Evaluation> {
    let fresh;
    let (obs_anchors, null_anchors) = match anchors {
        Some((a, b)) => (a, b),
        None => {
            fresh = (
                draw_anchors(cfg.m, seed::derive(seed, "anchors", 0))?,
                draw_anchors(cfg.m0, seed::derive(seed, "null-anchors", 0))?,
            );
            (&fresh.0, &fresh.1)
        }
    };
    let observed = build_set(sample, cfg.sym, obs_anchors, cfg.p)?;
    let built;
    let null_set = match null_set {
        Some(s) => s,
        None => {
            let h0 = draw_null(sample, cfg.sym, seed::derive(seed, "null-sample", 0))?;
            built = build_set(&h0, cfg.sym, null_anchors, cfg.p)?;
            &built
        }
    };
    let (w, depths) = w_with_depths(&observed, null_set, seed::derive(seed, "ties", 0))?;
    Ok(Evaluation { w, depths, observed_len: observed.len() })
}

/// Null curve set built the same way the observed evaluation builds it.
fn null_set_for(
    sample: &UniformSample,
    cfg: &TestConfig,
    seed: u64,
    anchors: &Anchors,
) -> Result<FunctionalSet> {
    let h0 = draw_null(sample, cfg.sym, seed::derive(seed, "null-sample", 0))?;
    build_set(&h0, cfg.sym, anchors, cfg.p)
}

/// Run the full bootstrap test on `sample`.
pub fn run_test(sample: &UniformSample, cfg: &TestConfig) -> Result<TestResult> {
    cfg.validate()?;
    let n = sample.len();
    if n < MIN_SAMPLE_SIZE {
        return Err(Error::InvalidInput(format!(
            "the test needs at least {MIN_SAMPLE_SIZE} observations, got {n}"
        )));
    }

    let observed_seed = seed::derive(cfg.seed, "observed", 0);
    let anchors = (
        draw_anchors(cfg.m, seed::derive(observed_seed, "anchors", 0))?,
        draw_anchors(cfg.m0, seed::derive(observed_seed, "null-anchors", 0))?,
    );
    let null_set = null_set_for(sample, cfg, observed_seed, &anchors.1)?;
    let observed = evaluate(sample, cfg, observed_seed, Some(&anchors), Some(&null_set))?;

    let shared_null = cfg.share_null.then_some(&null_set);
    let fixed = cfg.fixed_anchors.then_some(&anchors);
    let w_null = (0..cfg.n_boot as u64)
        .into_par_iter()
        .map(|b| {
            let boot_seed = seed::derive(cfg.seed, "bootstrap", b);
            let boot = draw_null(sample, cfg.sym, seed::derive(boot_seed, "sample", 0))?;
            Ok(evaluate(&boot, cfg, boot_seed, fixed, shared_null)?.w)
        })
        .collect::<Result<Vec<u64>>>()?;

    let p = p_value(observed.w, &w_null);
    let (obs_depths, null_depths) = observed.depths.depths.split_at(observed.observed_len);
    Ok(TestResult {
        config: cfg.clone(),
        n,
        w_observed: observed.w,
        p_value: p,
        reject: p <= cfg.alpha,
        diagnostics: Diagnostics {
            observed_depth: Summary::of(obs_depths).expect("nonempty"),
            null_depth: Summary::of(null_depths).expect("nonempty"),
        },
        w_null,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::CopulaSpec;
    use crate::empirical::Provenance;
    use crate::test_functions::{Anchor, CurveFamily, CurveKind, CurveMatrix};

    fn set_from(values: Vec<Vec<f64>>, sym: Symmetry) -> FunctionalSet {
        let p = values[0].len();
        let anchors = values
            .iter()
            .map(|_| Anchor { value: 0.5, kind: CurveKind::F, family: CurveFamily::S })
            .collect();
        FunctionalSet {
            values: CurveMatrix::from_rows(&values).unwrap(),
            grid: crate::test_functions::grid(p),
            anchors,
            sym,
        }
    }

    fn small_cfg(sym: Symmetry, seed: u64) -> TestConfig {
        TestConfig { m: 40, m0: 40, p: 20, n_boot: 39, seed, ..TestConfig::new(sym, 60) }
    }

    #[test]
    fn defaults() {
        let c = TestConfig::new(Symmetry::Radial, 400);
        assert_eq!((c.m, c.m0, c.p, c.n_boot, c.alpha), (400, 400, 100, 1000, 0.05));
        assert_eq!(TestConfig::new(Symmetry::Radial, 100).m, 250);
        assert!(TestConfig { alpha: 1.0, ..c.clone() }.validate().is_err());
        assert!(TestConfig { m: 0, ..c.clone() }.validate().is_err());
        assert!(TestConfig { p: 1, ..c }.validate().is_err());
    }

    #[test]
    fn extreme_observed_curves_give_minimal_w() {
        let m = 3;
        // observed: ±(5 + i), null: small values near zero
        let obs: Vec<Vec<f64>> = (0..2 * m)
            .map(|i| vec![if i % 2 == 0 { 5.0 + i as f64 } else { -5.0 - i as f64 }; 4])
            .collect();
        let null: Vec<Vec<f64>> = (0..2 * m).map(|i| vec![0.01 * (i as f64 - 2.5); 4]).collect();
        let w = w_statistic(
            &set_from(obs, Symmetry::Reflection),
            &set_from(null, Symmetry::Reflection),
            1,
        )
        .unwrap();
        let k = 2 * m as u64;
        assert_eq!(w, k * (k + 1) / 2);
    }

    #[test]
    fn deepest_observed_curve_gets_top_rank() {
        let obs = vec![vec![0.0; 3]];
        let null = vec![vec![0.1; 3], vec![-0.1; 3], vec![9.0; 3], vec![-9.0; 3]];
        let w = w_statistic(&set_from(obs, Symmetry::Radial), &set_from(null, Symmetry::Radial), 0)
            .unwrap();
        assert_eq!(w, 5);
    }

    #[test]
    fn grid_mismatch() {
        let a = set_from(vec![vec![0.0; 3]; 3], Symmetry::Reflection);
        let b = set_from(vec![vec![0.0; 4]; 3], Symmetry::Reflection);
        assert!(matches!(w_statistic(&a, &b, 0), Err(Error::GridMismatch)));
        let c = set_from(vec![vec![0.0; 3]; 3], Symmetry::Radial);
        assert!(matches!(w_statistic(&a, &c, 0), Err(Error::GridMismatch)));
    }

    #[test]
    fn all_ties_mean_w() {
        let m = 5usize;
        let curves = vec![vec![0.25; 6]; 2 * m];
        let set = set_from(curves, Symmetry::Joint);
        let seeds = 10_000;
        let mean = (0..seeds).map(|s| w_statistic(&set, &set, s).unwrap() as f64).sum::<f64>()
            / seeds as f64;
        let want = (m * (4 * m + 1)) as f64;
        assert!((mean / want - 1.0).abs() <= 0.02, "{mean} vs {want}");
    }

    #[test]
    fn p_value_formula() {
        assert_eq!(p_value(10, &[5, 10, 20, 30]), 3.0 / 5.0);
        assert_eq!(p_value(1, &[5, 10]), 1.0 / 3.0);
    }

    #[test]
    fn summary_quartiles() {
        let s = Summary::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((s.min, s.q25, s.median, s.q75, s.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        assert!(Summary::of(&[]).is_none());
    }

    #[test]
    fn rejects_small_samples() {
        let s = CopulaSpec::independence().sample(10, 1).unwrap();
        assert!(matches!(
            run_test(&s, &small_cfg(Symmetry::Reflection, 1)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn reproducible_and_bounded() {
        let s = CopulaSpec::clayton(2.0).unwrap().sample(60, 3).unwrap();
        for sym in Symmetry::ALL {
            for share in [false, true] {
                let cfg = TestConfig { share_null: share, ..small_cfg(sym, 7) };
                let a = run_test(&s, &cfg).unwrap();
                let b = run_test(&s, &cfg).unwrap();
                assert_eq!(a, b);
                assert_eq!(a.to_json(true).to_string(), b.to_json(true).to_string());
                let k_obs = (crate::test_functions::CurveFamily::for_symmetry(sym).len()
                    * 2
                    * cfg.m) as u64;
                let k_tot = 2 * k_obs;
                let lo = k_obs * (k_obs + 1) / 2;
                let hi = k_obs * k_tot - k_obs * (k_obs - 1) / 2;
                for w in std::iter::once(a.w_observed).chain(a.w_null.iter().copied()) {
                    assert!((lo..=hi).contains(&w));
                }
                assert!(a.p_value > 0.0 && a.p_value <= 1.0);
                assert_eq!(a.reject, a.p_value <= cfg.alpha);
            }
        }
    }

    #[test]
    fn exchangeable_sample_is_not_rejected() {
        let base = CopulaSpec::khoudraji(0.5, CopulaSpec::clayton(8.0).unwrap())
            .unwrap()
            .sample(40, 2)
            .unwrap();
        let mut pts = base.points().to_vec();
        pts.extend(base.swapped().points());
        let s = UniformSample::new(pts, Provenance::Direct).unwrap();
        for seed in 0..5 {
            let r = run_test(&s, &small_cfg(Symmetry::Reflection, seed)).unwrap();
            assert!(r.p_value > r.config.alpha, "seed {seed}: p = {}", r.p_value);
        }
    }

    #[test]
    fn json_fields() {
        let s = CopulaSpec::frank(3.0).unwrap().sample(50, 1).unwrap();
        let r = run_test(&s, &small_cfg(Symmetry::Joint, 1)).unwrap();
        let j = r.to_json(false);
        for key in [
            "sym",
            "n",
            "m",
            "m0",
            "p",
            "n_boot",
            "seed",
            "w_observed",
            "p_value",
            "reject",
            "w_null_summary",
        ] {
            assert!(j.get(key).is_some(), "missing {key}");
        }
        assert!(j.get("w_null").is_none());
        assert_eq!(r.to_json(true)["w_null"].as_array().unwrap().len(), 39);
        assert_eq!(j["sym"], "J");
    }
}
