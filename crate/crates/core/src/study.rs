//! Monte-Carlo size and power harness.

use std::fs::OpenOptions;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::seed;
use crate::symmetry::Symmetry;
use crate::symmetry_test::{run_test, TestConfig};

fn default_replicates() -> usize {
    200
}
fn default_m() -> usize {
    250
}
fn default_p() -> usize {
    100
}
fn default_n_boot() -> usize {
    200
}
fn default_alpha() -> f64 {
    0.05
}

/// One cell of a size/power table. Defaults are desk scale: 200 replicates,
/// `N_b = 200`, `m = m₀ = 250`, `p = 100`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyScenario {
    pub spec: CopulaSpec,
    pub sym: Symmetry,
    pub n: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_m")]
    pub m0: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub share_null: bool,
    #[serde(default)]
    pub fixed_anchors: bool,
    /// Test the simulated uniforms as they are (`Ĉ_n`) instead of their
    /// pseudo-observations (`D̂_n`).
    #[serde(default)]
    pub direct: bool,
}

impl StudyScenario {
    pub fn new(spec: CopulaSpec, sym: Symmetry, n: usize) -> Self {
        StudyScenario {
            spec,
            sym,
            n,
            replicates: default_replicates(),
            m: default_m(),
            m0: default_m(),
            p: default_p(),
            n_boot: default_n_boot(),
            alpha: default_alpha(),
            share_null: false,
            fixed_anchors: false,
            direct: false,
        }
    }

    pub fn test_config(&self, seed: u64) -> TestConfig {
        TestConfig {
            sym: self.sym,
            m: self.m,
            m0: self.m0,
            p: self.p,
            n_boot: self.n_boot,
            alpha: self.alpha,
            seed,
            share_null: self.share_null,
            fixed_anchors: self.fixed_anchors,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        self.test_config(0).validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyResult {
    pub scenario: StudyScenario,
    pub seed: u64,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// 95% Wilson interval for the rejection probability.
    pub ci: [f64; 2],
    /// Per-replicate p-values in replicate order.
    pub p_values: Vec<f64>,
    /// Excluded from the JSON report so reruns compare byte for byte.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

fn wilson(successes: usize, trials: usize) -> [f64; 2] {
    let z = 1.959963984540054;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let centre = phat + z * z / (2.0 * n);
    let half = z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt();
    let denom = 1.0 + z * z / n;
    let lower = if successes == 0 { 0.0 } else { (centre - half) / denom };
    let upper = if successes == trials { 1.0 } else { (centre + half) / denom };
    [lower, upper]
}

fn replicate(s: &StudyScenario, root: u64, r: u64) -> Result<f64> {
    let sample = s.spec.sample(s.n, seed::derive(root, "replicate-sample", r))?;
    let sample = if s.direct { sample } else { sample.reranked() };
    Ok(run_test(&sample, &s.test_config(seed::derive(root, "replicate-test", r)))?.p_value)
}

/// Run every replicate of `s`. `workers = None` uses the global rayon pool.
/// The result does not depend on the worker count.
pub fn run_scenario(s: &StudyScenario, seed: u64, workers: Option<usize>) -> Result<StudyResult> {
    s.validate()?;
    let start = Instant::now();
    let work = || {
        (0..s.replicates as u64)
            .into_par_iter()
            .map(|r| replicate(s, seed, r))
            .collect::<Result<Vec<f64>>>()
    };
    let p_values = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let rejections = p_values.iter().filter(|&&p| p <= s.alpha).count();
    Ok(StudyResult {
        scenario: s.clone(),
        seed,
        rejections,
        rejection_rate: rejections as f64 / s.replicates as f64,
        ci: wilson(rejections, s.replicates),
        p_values,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

const LEDGER_HEADER: [&str; 17] = [
    "copula",
    "sym",
    "n",
    "replicates",
    "m",
    "m0",
    "p",
    "n_boot",
    "alpha",
    "share_null",
    "fixed_anchors",
    "seed",
    "rejections",
    "rejection_rate",
    "ci_lower",
    "ci_upper",
    "wall_time_secs",
];

impl StudyResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data serializes")
    }

    /// Append one row to a CSV ledger, writing the header if the file is new.
    pub fn append_to_ledger(&self, path: &Path) -> Result<()> {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut w = csv::Writer::from_writer(file);
        if fresh {
            w.write_record(LEDGER_HEADER)?;
        }
        let s = &self.scenario;
        w.write_record([
            s.spec.label(),
            s.sym.letter().to_string(),
            s.n.to_string(),
            s.replicates.to_string(),
            s.m.to_string(),
            s.m0.to_string(),
            s.p.to_string(),
            s.n_boot.to_string(),
            s.alpha.to_string(),
            s.share_null.to_string(),
            s.fixed_anchors.to_string(),
            self.seed.to_string(),
            self.rejections.to_string(),
            self.rejection_rate.to_string(),
            self.ci[0].to_string(),
            self.ci[1].to_string(),
            format!("{:.3}", self.wall_time_secs),
        ])?;
        w.flush()?;
        Ok(())
    }
}
