// Checks shared by the integration tests and the acceptance runner. Each
// returns Err with a short description of the first violation.
#![allow(dead_code)]

use copsym::empirical::{ecdf_copula, symmetrized_ecdf, EmpiricalCopula, TIE_TOL};
use copsym::kendall::tau_b;
use copsym::test_functions::{build_set, Anchors};
use copsym::{
    modified_band_depth, seed, tau_to_params, Axis, CopulaSpec, CurveMatrix, Family, Provenance,
    Symmetry, UniformSample,
};
use rand::Rng;

pub type Check = Result<(), String>;

/// Families exercised by the sampler and identity checks.
pub fn families() -> Vec<CopulaSpec> {
    let tau = |f, t| tau_to_params(f, t).unwrap();
    vec![
        CopulaSpec::independence(),
        tau(Family::Gaussian, 0.5),
        tau(Family::Clayton, 0.5),
        tau(Family::Gumbel, 0.5),
        tau(Family::Frank, 0.5),
        tau(Family::Frank, -0.3),
        CopulaSpec::marshall_olkin(0.4, 0.8).unwrap(),
        CopulaSpec::khoudraji(0.5, tau(Family::Clayton, 0.9)).unwrap(),
        CopulaSpec::khoudraji_on(0.25, Axis::Second, tau(Family::Gaussian, 0.5)).unwrap(),
    ]
}

fn lattice(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// Symmetrized empirical copulas satisfy their symmetry exactly.
pub fn symmetrization_identities(samples: usize) -> Check {
    let specs = families();
    let g = lattice(20);
    let mut worst = 0.0_f64;
    for i in 0..samples {
        let spec = &specs[i % specs.len()];
        let n = 30 + 7 * i;
        let mut s =
            spec.sample(n, seed::derive(17, "identity", i as u64)).map_err(|e| e.to_string())?;
        if i % 2 == 1 {
            s = s.reranked();
        }
        for &u in &g {
            for &v in &g {
                let cs = |a, b| symmetrized_ecdf(&s, Symmetry::Reflection, a, b);
                let cr = |a, b| symmetrized_ecdf(&s, Symmetry::Radial, a, b);
                let cj = |a, b| symmetrized_ecdf(&s, Symmetry::Joint, a, b);
                let gaps = [
                    cs(u, v) - cs(v, u),
                    cr(u, v) - (cr(1.0 - u, 1.0 - v) - 1.0 + u + v),
                    cj(u, v) + cj(u, 1.0 - v) - u,
                    cj(u, v) + cj(1.0 - u, v) - v,
                ];
                for gap in gaps {
                    worst = worst.max(gap.abs());
                }
            }
        }
        if worst > 1e-12 {
            return Err(format!("sample {i} ({}): identity gap {worst:e}", spec.label()));
        }
    }
    Ok(())
}

fn random_sample<R: Rng>(rng: &mut R) -> UniformSample {
    let n = rng.random_range(1..=40);
    // coarse values on half the cases so ties and boundary queries occur
    let coarse = rng.random::<bool>();
    let draw =
        |r: &mut R| if coarse { r.random_range(1..=8) as f64 / 8.0 } else { r.random::<f64>() };
    let points = (0..n).map(|_| [draw(rng), draw(rng)]).collect();
    UniformSample::new(points, Provenance::Direct).unwrap()
}

fn le(x: f64, bound: f64) -> bool {
    x <= bound + TIE_TOL
}

/// `EmpiricalCopula` against brute-force counting.
pub fn ecdf_oracle(cases: usize) -> Check {
    let mut rng = seed::rng(404);
    for case in 0..cases {
        let s = random_sample(&mut rng);
        let ec = EmpiricalCopula::new(&s);
        let q = |r: &mut seed::Rng| {
            if r.random::<bool>() {
                r.random_range(0..=8) as f64 / 8.0
            } else {
                r.random::<f64>()
            }
        };
        let (u, v) = (q(&mut rng), q(&mut rng));
        let brute = s.points().iter().filter(|p| le(p[0], u) && le(p[1], v)).count();
        if ec.count(u, v) != brute || ec.eval(u, v) != brute as f64 / s.len() as f64 {
            return Err(format!(
                "case {case}: count at ({u}, {v}) is {}, brute force {brute}",
                ec.count(u, v)
            ));
        }
        if ecdf_copula(&s, u, v) != ec.eval(u, v) {
            return Err(format!("case {case}: ecdf_copula disagrees with EmpiricalCopula"));
        }
        let mut ts: Vec<f64> = (0..5).map(|_| q(&mut rng)).collect();
        ts.sort_by(f64::total_cmp);
        let mut out = vec![0u32; ts.len()];
        ec.counts_along_first(&ts, v, &mut out);
        for (k, &t) in ts.iter().enumerate() {
            let want = s.points().iter().filter(|p| le(p[0], t) && le(p[1], v)).count() as u32;
            if out[k] != want {
                return Err(format!("case {case}: counts_along_first at t={t}"));
            }
        }
        ec.counts_along_second(u, &ts, &mut out);
        for (k, &t) in ts.iter().enumerate() {
            let want = s.points().iter().filter(|p| le(p[0], u) && le(p[1], t)).count() as u32;
            if out[k] != want {
                return Err(format!("case {case}: counts_along_second at t={t}"));
            }
        }
    }
    Ok(())
}

/// Modified band depth by enumerating every pair and grid point.
pub fn mbd_brute_force(curves: &CurveMatrix) -> Vec<f64> {
    let (k, p) = (curves.rows(), curves.cols());
    let pairs = (k * (k - 1) / 2) as u64;
    (0..k)
        .map(|i| {
            let mut inside = 0u64;
            for a in 0..k {
                for b in a + 1..k {
                    for t in 0..p {
                        let (x, y) = (curves.get(a, t), curves.get(b, t));
                        let c = curves.get(i, t);
                        if x.min(y) <= c && c <= x.max(y) {
                            inside += 1;
                        }
                    }
                }
            }
            inside as f64 / (p as u64 * pairs) as f64
        })
        .collect()
}

pub fn mbd_oracle(instances: usize) -> Check {
    let mut rng = seed::rng(808);
    for case in 0..instances {
        let k = rng.random_range(3..=6);
        let p = rng.random_range(1..=5);
        let tied = rng.random::<bool>();
        let data = (0..k * p)
            .map(|_| if tied { rng.random_range(-2..=2) as f64 } else { rng.random::<f64>() - 0.5 })
            .collect();
        let curves = CurveMatrix::new(k, p, data).unwrap();
        let fast = modified_band_depth(&curves).map_err(|e| e.to_string())?.depths;
        let brute = mbd_brute_force(&curves);
        if fast.iter().zip(&brute).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(format!("instance {case} (K={k}, p={p}): {fast:?} vs {brute:?}"));
        }
    }
    Ok(())
}

/// Monte-Carlo Kendall's tau and CDF of each sampler against the model.
pub fn sampler_fidelity() -> Check {
    let n = 20_000;
    let g = [0.1, 0.3, 0.5, 0.7, 0.9];
    for (i, spec) in families().iter().enumerate() {
        let s =
            spec.sample(n, seed::derive(99, "fidelity", i as u64)).map_err(|e| e.to_string())?;
        let target = spec.kendall_tau().map_err(|e| e.to_string())?;
        let tau = tau_b(s.points());
        if (tau - target).abs() > 0.02 {
            return Err(format!("{}: tau {tau:.4} vs {target:.4}", spec.label()));
        }
        let ec = EmpiricalCopula::new(&s);
        for &u in &g {
            for &v in &g {
                let want = spec.cdf(u, v).map_err(|e| e.to_string())?;
                let got = ec.eval(u, v);
                if (got - want).abs() > 0.01 {
                    return Err(format!("{}: C({u}, {v}) {got:.4} vs {want:.4}", spec.label()));
                }
            }
        }
    }
    Ok(())
}

fn sd(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// `sd(f̂_v(t))` at `n = 400` over `sd` at `n = 1600`, with `t = 0.3`, `v = 0.6`,
/// on direct samples from `spec`.
pub fn sd_ratio(spec: &CopulaSpec, sym: Symmetry, replicates: usize) -> Result<f64, String> {
    // p = 9 puts t₃ = 0.3 on the grid
    let anchors = Anchors { v: vec![0.6], w: vec![0.6] };
    let value = |n: usize, r: usize| -> Result<f64, String> {
        let s = spec
            .sample(n, seed::derive(seed::derive(5, "scaling", n as u64), sym.letter(), r as u64))
            .map_err(|e| e.to_string())?;
        let set = build_set(&s, sym, &anchors, 9).map_err(|e| e.to_string())?;
        Ok(set.values.get(0, 2))
    };
    let small = (0..replicates).map(|r| value(400, r)).collect::<Result<Vec<_>, _>>()?;
    let large = (0..replicates).map(|r| value(1600, r)).collect::<Result<Vec<_>, _>>()?;
    Ok(sd(&small) / sd(&large))
}

/// One symmetric copula per symmetry type.
pub fn scaling_cases() -> Vec<(CopulaSpec, Symmetry)> {
    vec![
        (tau_to_params(Family::Clayton, 0.5).unwrap(), Symmetry::Reflection),
        (tau_to_params(Family::Frank, 0.5).unwrap(), Symmetry::Radial),
        (CopulaSpec::independence(), Symmetry::Joint),
    ]
}

pub fn sd_scaling(replicates: usize) -> Check {
    for (spec, sym) in scaling_cases() {
        let ratio = sd_ratio(&spec, sym, replicates)?;
        if !(1.7..=2.3).contains(&ratio) {
            return Err(format!("{} {}: sd ratio {ratio:.3}", spec.label(), sym.letter()));
        }
    }
    Ok(())
}
