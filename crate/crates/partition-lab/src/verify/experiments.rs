//! The experiment bodies. Each one draws from a sampler, builds an
//! independent reference (exact limit pmf, Dirichlet Monte Carlo, exact
//! counts), and scores the comparison. Err(String) is a structured refusal:
//! the parameters are infeasible, not wrong.

use super::{chi_square_uniform, ks_statistic, ks_two_sample, run_blocks, tv_distance, ExperimentId, Outcome};
use crate::analysis::clt_params;
use crate::counting::{exact_regime_cutoff, j_residue, log_at_most_snapshots, CountCache};
use crate::limits::{clt_law, limit_pmf_k1, power_transform, LimitLawSpec};
use crate::samplers::{
    dirichlet_order_stats, enumerate_partitions, GeneralSampler, GeometricK1Sampler,
    GeometricPartitionSampler,
};
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub(crate) fn dispatch(
    id: ExperimentId,
    params: &BTreeMap<String, f64>,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<Outcome, String> {
    match id {
        ExperimentId::Thm11Joint => joint_limit(params, seed, workers, threshold),
        ExperimentId::Cor12Marginal => marginal_limit(params, seed, workers, threshold),
        ExperimentId::Cor12Conditional => conditional_uniformity(params, seed, workers, threshold),
        ExperimentId::Thm13Clt => clt(params, seed, workers, threshold),
        ExperimentId::Thm14General => general_density(params, seed, workers, threshold),
        ExperimentId::Cor15Dirichlet => dirichlet_order(params, seed, workers, threshold),
        ExperimentId::Cor16Transform => power_images(params, seed, workers, threshold),
        ExperimentId::SzekeresAccuracy => szekeres_accuracy(params, threshold),
        ExperimentId::Lemma21Identity => largest_part_identity(params, threshold),
        ExperimentId::MSweepThm15 => m_sweep(params, seed, workers, threshold),
    }
}

fn fparam(params: &BTreeMap<String, f64>, key: &str) -> Result<f64, String> {
    params
        .get(key)
        .copied()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("missing or non-finite parameter {key:?}"))
}

fn uparam(params: &BTreeMap<String, f64>, key: &str) -> Result<u64, String> {
    let v = fparam(params, key)?;
    if v < 0.0 || v.fract() != 0.0 || v > 2f64.powi(53) {
        return Err(format!("parameter {key:?} must be a nonnegative integer, got {v}"));
    }
    Ok(v as u64)
}

fn stats_from(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Stream layout: each logical draw family gets a disjoint 64-stream block.
const REF_STREAM_BASE: u64 = 1000;

fn counts_table<K: std::fmt::Display + Ord>(counts: &BTreeMap<K, u64>) -> String {
    let mut out = String::from("value,count\n");
    for (k, c) in counts {
        let _ = writeln!(out, "{k},{c}");
    }
    out
}

fn sample_table(header: &str, values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 12 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

/// Centered vector of a sampled partition: parts minus ceil(n/m), padded
/// with zero parts up to m entries. The sum is always j - m.
fn centered_vector(parts: &[u64], m: u64, base: u64) -> Vec<i64> {
    let mut l: Vec<i64> = parts.iter().map(|&k| k as i64 - base as i64).collect();
    l.resize(m as usize, -(base as i64));
    l
}

fn joint_limit(
    params: &BTreeMap<String, f64>,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<Outcome, String> {
    let n = uparam(params, "n")?;
    let m = uparam(params, "m")?;
    let q = fparam(params, "q")?;
    let samples = uparam(params, "samples")?;
    if m > 4 {
        return Err(format!(
            "joint support enumeration is limited to m <= 4 (cell count grows too fast), got m={m}"
        ));
    }
    let mut cache = CountCache::new();
    let sampler = GeometricPartitionSampler::new(&mut cache, n, m, q).map_err(|e| e.to_string())?;
    let base = n.div_ceil(m);

    let drawn = run_blocks(seed, 0, samples, workers, |rng, count| {
        let mut cache = cache.clone();
        (0..count)
            .map(|_| {
                let p = sampler.sample(&mut cache, rng).expect("feasibility checked at build");
                centered_vector(p.parts(), m, base)
            })
            .collect()
    });
    let mut empirical_counts: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    for v in drawn {
        *empirical_counts.entry(v).or_insert(0) += 1;
    }
    let empirical: BTreeMap<Vec<i64>, f64> = empirical_counts
        .iter()
        .map(|(k, c)| (k.clone(), *c as f64 / samples as f64))
        .collect();

    // reference law: spread each offset's limit mass uniformly over its
    // completions (the limit is flat given the top offset)
    let j = j_residue(n, m);
    let spec = LimitLawSpec { m, j, q, tol: 1e-9 };
    let pmf = limit_pmf_k1(&mut cache, &spec).map_err(|e| e.to_string())?;
    let mut limit: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    let mut cell_budget = 5_000_000u64;
    for (l1, mass) in pmf.probs.iter().enumerate() {
        let l1 = l1 as u64;
        let total = m * (l1 + 1) - j;
        let cells = cache
            .count_at_most(total, m - 1)
            .map_err(|e| e.to_string())?
            .to_u64()
            .ok_or("completion count overflows u64")?;
        cell_budget = cell_budget
            .checked_sub(cells)
            .ok_or("support enumeration budget exceeded; lower q or m")?;
        for cell in enumerate_partitions(total, m - 1) {
            let mut nu = cell.parts().to_vec();
            nu.resize(m as usize - 1, 0);
            let mut v = Vec::with_capacity(m as usize);
            v.push(l1 as i64);
            for &p in nu.iter().rev() {
                v.push(l1 as i64 - p as i64);
            }
            limit.insert(v, mass / cells as f64);
        }
    }

    let tv = tv_distance(&empirical, &limit);
    let artifact_rows: BTreeMap<String, u64> = empirical_counts
        .iter()
        .map(|(v, c)| {
            let key = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            (key, *c)
        })
        .collect();
    Ok(Outcome {
        statistics: stats_from(&[
            ("tv_distance", tv),
            ("distinct_vectors", empirical.len() as f64),
            ("limit_support_size", limit.len() as f64),
        ]),
        primary: "tv_distance",
        pass: tv <= threshold,
        artifacts: vec![("thm_1_1_joint_empirical.csv".into(), counts_table(&artifact_rows))],
    })
}

fn marginal_limit(
    params: &BTreeMap<String, f64>,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<Outcome, String> {
    let n = uparam(params, "n")?;
    let m = uparam(params, "m")?;
    let q = fparam(params, "q")?;
    let samples = uparam(params, "samples")?;
    let tol = fparam(params, "tol").unwrap_or(1e-9);
    let mut cache = CountCache::new();
    let sampler = GeometricK1Sampler::new_exact(&mut cache, n, m, q).map_err(|e| e.to_string())?;
    let spec = LimitLawSpec { m, j: j_residue(n, m), q, tol };
    let pmf = limit_pmf_k1(&mut cache, &spec).map_err(|e| e.to_string())?;

    let drawn = run_blocks(seed, 0, samples, workers, |rng, count| {
        (0..count).map(|_| sampler.sample_l(rng)).collect::<Vec<u64>>()
    });
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for l in drawn {
        *counts.entry(l).or_insert(0) += 1;
    }
    let empirical: BTreeMap<i64, f64> =
        counts.iter().map(|(l, c)| (*l as i64, *c as f64 / samples as f64)).collect();
    let limit: BTreeMap<i64, f64> = pmf
        .probs
        .iter()
        .enumerate()
        .map(|(l, p)| (pmf.base_offset + l as i64, *p))
        .collect();
    let tv = tv_distance(&empirical, &limit);
    Ok(Outcome {
        statistics: stats_from(&[
            ("tv_distance", tv),
            ("distinct_offsets", empirical.len() as f64),
            ("limit_tail_bound", pmf.tail_bound),
        ]),
        primary: "tv_distance",
        pass: tv <= threshold,
        artifacts: vec![("cor_1_2_marginal_empirical.csv".into(), counts_table(&counts))],
    })
}

fn conditional_uniformity(
    params: &BTreeMap<String, f64>,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<Outcome, String> {
    let n = uparam(params, "n")?;
    let m = uparam(params, "m")?;
    let q = fparam(params, "q")?;
    let samples = uparam(params, "samples")?;
    if m < 2 {
        return Err("conditional uniformity needs m >= 2".into());
    }
    let mut cache = CountCache::new();
    let sampler = GeometricPartitionSampler::new(&mut cache, n, m, q).map_err(|e| e.to_string())?;
    let base = n.div_ceil(m);
    let j = j_residue(n, m);
    let cutoff = exact_regime_cutoff(n, m);

    // key each draw by (offset of the largest part, box-complemented rest):
    // rho_i = k1 - r_i reversed is a partition of m(l+1) - j
    let drawn = run_blocks(seed, 0, samples, workers, |rng, count| {
        let mut cache = cache.clone();
        (0..count)
            .map(|_| {
                let p = sampler.sample(&mut cache, rng).expect("feasibility checked at build");
                let parts = p.parts();
                let k1 = parts[0];
                let mut rest = parts[1..].to_vec();
                rest.resize(m as usize - 1, 0);
                let rho: Vec<u64> = rest.iter().rev().map(|&r| k1 - r).collect();
                (k1 - base, rho)
            })
            .collect::<Vec<(u64, Vec<u64>)>>()
    });
    let mut strata: BTreeMap<u64, BTreeMap<Vec<u64>, u64>> = BTreeMap::new();
    for (l, rho) in drawn {
        *strata.entry(l).or_default().entry(rho).or_insert(0) += 1;
    }

    let mut violations = 0u64;
    let mut tested = 0u64;
    let mut untested = 0u64;
    let mut min_p = 1.0f64;
    let mut artifact = String::from("l,hits,cells,chi2,p\n");
    for (l, observed) in &strata {
        let hits: u64 = observed.values().sum();
        if hits < 500 {
            continue;
        }
        if (*l as i64) > cutoff {
            // outside the range where the completion count has the closed
            // form used below; default parameters never get here
            untested += 1;
            continue;
        }
        let total = m * (l + 1) - j;
        let mut counts_by_cell: Vec<u64> = Vec::new();
        for cell in enumerate_partitions(total, m - 1) {
            let mut key = cell.parts().to_vec();
            key.resize(m as usize - 1, 0);
            counts_by_cell.push(observed.get(&key).copied().unwrap_or(0));
        }
        debug_assert_eq!(counts_by_cell.iter().sum::<u64>(), hits, "every draw lands in a cell");
        let cells = counts_by_cell.len() as u64;
        if cells < 2 || (hits as f64) / (cells as f64) < 5.0 {
            untested += 1;
            continue;
        }
        let (stat, p) = chi_square_uniform(&counts_by_cell).expect("cells >= 2");
        tested += 1;
        min_p = min_p.min(p);
        if p <= 1e-3 {
            violations += 1;
        }
        let _ = writeln!(artifact, "{l},{hits},{cells},{stat},{p}");
    }
    Ok(Outcome {
        statistics: stats_from(&[
            ("violations", violations as f64),
            ("strata_tested", tested as f64),
            ("strata_untested", untested as f64),
            ("min_p", min_p),
        ]),
        primary: "violations",
        pass: violations as f64 <= threshold,
        artifacts: vec![("cor_1_2_conditional_strata.csv".into(), artifact)],
    })
}

fn clt(
    params: &BTreeMap<String, f64>,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<Outcome, String> {
    let m0 = uparam(params, "m")?;
    let n0 = uparam(params, "n")?;
    let q = fparam(params, "q")?;
    let samples = uparam(params, "samples")?;
    let tail_tol = fparam(params, "tol").unwrap_or(1e-6);
    let law = clt_law(q).map_err(|e| e.to_string())?;
    let gamma = clt_params(q).map_err(|e| e.to_string())?.gamma;

    // identical seed and stream layout per stage: common random numbers, so
    // stage statistics are comparable draw for draw
    let stage = |m: u64, n: u64| -> Result<(f64, Vec<f64>), String> {
        let sampler = GeometricK1Sampler::new_bulk(n, m, q, tail_tol).map_err(|e| e.to_string())?;
        let mf = m as f64;
        let mut xs = run_blocks(seed, 0, samples, workers, |rng, count| {
            (0..count)
                .map(|_| (sampler.sample_l(rng) as f64 - gamma * mf) / mf.sqrt())
                .collect::<Vec<f64>>()
        });
        let ks = ks_statistic(&mut xs, |x| law.cdf(x));
        Ok((ks, xs))
    };

    let (ks0, xs0) = stage(m0, n0)?;
    let mut statistics = stats_from(&[("ks_statistic", ks0)]);
    statistics.insert(format!("ks_m{m0}"), ks0);
    let mut artifacts = vec![(
        format!("thm_1_3_clt_standardized_m{m0}.csv"),
        sample_table("standardized", &xs0),
    )];
    let pass;
    if ks0 <= threshold {
        statistics.insert("escalated".into(), 0.0);
        pass = true;
    } else {
        // the m-lattice keeps the finite-m statistic above the bound; the
        // convergence claim is then checked by strict decrease along larger m
        statistics.insert("escalated".into(), 1.0);
        let m1 = m0 + m0.div_ceil(2);
        let m2 = 2 * m0;
        let mut prev = ks0;
        let mut decreasing = true;
        for m in [m1, m2] {
            let n = 200 * m * m * m;
            let (ks, xs) = stage(m, n)?;
            statistics.insert(format!("ks_m{m}"), ks);
            artifacts.push((
                format!("thm_1_3_clt_standardized_m{m}.csv"),
                sample_table("standardized", &xs),
            ));
            decreasing &= ks < prev;
            prev = ks;
        }
        statistics.insert("strictly_decreasing".into(), f64::from(decreasing));
        pass = decreasing;
    }
    Ok(Outcome { statistics, primary: "ks_statistic", pass, artifacts })
}

/// Draws of the top scaled part k1/n under the alpha-weighted measure next
/// to Monte Carlo draws of the Dirichlet(alpha) top order statistic.
fn top_vs_dirichlet(
    n: u64,
    m: u64,
    alpha: f64,
    samples: u64,
    seed: u64,
    workers: usize,
    stream_group: u64,
) -> Result<(f64, Vec<f64>, Vec<f64>), String> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(format!("alpha must be positive and finite, got {alpha}"));
    }
    let mut cache = CountCache::new();
    let sampler = GeneralSampler::new(&mut cache, n, m, alpha).map_err(|e| e.to_string())?;
    let mut drawn = run_blocks(seed, stream_group * 2000, samples, workers, |rng, count| {
        let mut cache = cache.clone();
        (0..count)
            .map(|_| {
                let p = sampler.sample(&mut cache, rng).expect("feasibility checked at build");
                p.parts()[0] as f64 / n as f64
            })
            .collect::<Vec<f64>>()
    });
    let mut reference = run_blocks(
        seed,
        stream_group * 2000 + REF_STREAM_BASE,
        samples,
        workers,
        |rng, count| {
            (0..count)
                .map(|_| dirichlet_order_stats(m as usize, alpha, rng).expect("valid alpha")[0])
                .collect::<Vec<f64>>()
        },
    );
    let ks = ks_two_sample(&mut drawn, &mut reference);
    Ok((ks, drawn, reference))
}

fn general_density(
    params: &BTreeMap<String, f64>,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<Outcome, String> {
    let n = uparam(params, "n")?;
    let m = uparam(params, "m")?;
    let alpha = fparam(params, "alpha")?;
    let samples = uparam(params, "samples")?;
    let (ks, drawn, reference) = top_vs_dirichlet(n, m, alpha, samples, seed, workers, 0)?;
    Ok(Outcome {
        statistics: stats_from(&[("ks_statistic", ks)]),
        primary: "ks_statistic",
        pass: ks <= threshold,
        artifacts: vec![
            ("thm_1_4_general_samples.csv".into(), sample_table("x1", &drawn)),
            ("thm_1_4_general_reference.csv".into(), sample_table("x1", &reference)),
        ],
    })
}

fn dirichlet_order(
    params: &BTreeMap<String, f64>,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<Outcome, String> {
    let n = uparam(params, "n")?;
    let m = uparam(params, "m")?;
    let alpha = fparam(params, "alpha")?;
    let samples = uparam(params, "samples")?;
    let (ks, drawn, reference) = top_vs_dirichlet(n, m, alpha, samples, seed, workers, 0)?;
    Ok(Outcome {
        statistics: stats_from(&[("ks_statistic", ks)]),
        primary: "ks_statistic",
        pass: ks <= threshold,
        artifacts: vec![
            ("cor_1_5_dirichlet_samples.csv".into(), sample_table("x1", &drawn)),
            ("cor_1_5_dirichlet_reference.csv".into(), sample_table("x1", &reference)),
        ],
    })
}

fn power_images(
    params: &BTreeMap<String, f64>,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<Outcome, String> {
    let n = uparam(params, "n")?;
    let m = uparam(params, "m")?;
    let alpha = fparam(params, "alpha")?;
    let samples = uparam(params, "samples")?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(format!("alpha must be positive and finite, got {alpha}"));
    }
    let mut cache = CountCache::new();
    let sampler = GeneralSampler::new(&mut cache, n, m, alpha).map_err(|e| e.to_string())?;
    let drawn = run_blocks(seed, 0, samples, workers, |rng, count| {
        let mut cache = cache.clone();
        (0..count)
            .map(|_| {
                let p = sampler.sample(&mut cache, rng).expect("feasibility checked at build");
                let mut y: Vec<f64> =
                    p.parts().iter().map(|&k| k as f64 / n as f64).collect();
                y.resize(m as usize, 0.0);
                power_transform(&y, alpha).expect("scaled parts lie on the ordered simplex")
            })
            .collect::<Vec<Vec<f64>>>()
    });
    // the images must sit exactly on the ordered surface sum x^(1/alpha) = 1
    let mut max_abs_err = 0.0f64;
    let mut tops: Vec<f64> = Vec::with_capacity(drawn.len());
    for x in &drawn {
        let back: f64 = x.iter().map(|v| v.powf(1.0 / alpha)).sum();
        max_abs_err = max_abs_err.max((back - 1.0).abs());
        tops.push(x[0]);
    }
    let mut reference = run_blocks(seed, REF_STREAM_BASE, samples, workers, |rng, count| {
        (0..count)
            .map(|_| dirichlet_order_stats(m as usize, alpha, rng).expect("valid alpha")[0].powf(alpha))
            .collect::<Vec<f64>>()
    });
    let ks = ks_two_sample(&mut tops, &mut reference);
    let pass = ks <= threshold && max_abs_err <= 1e-10;
    Ok(Outcome {
        statistics: stats_from(&[("ks_statistic", ks), ("max_abs_err", max_abs_err)]),
        primary: "ks_statistic",
        pass,
        artifacts: vec![("cor_1_6_transform_images.csv".into(), sample_table("x1", &tops))],
    })
}

fn szekeres_accuracy(params: &BTreeMap<String, f64>, threshold: f64) -> Result<Outcome, String> {
    let n = uparam(params, "n")?;
    if n < 10_000 {
        return Err(format!("the decade sweep needs n >= 10000, got {n}"));
    }
    let mut artifact = String::from("n,k,u,estimate,exact,rel_err\n");
    let rel_err_at = |n: u64, ks: &[u64], artifact: &mut String| -> Result<Vec<f64>, String> {
        let exact = log_at_most_snapshots(n, ks);
        ks.iter()
            .zip(exact)
            .map(|(&k, ex)| {
                let est =
                    crate::analysis::szekeres_log_estimate(n, k).map_err(|e| e.to_string())?;
                let err = (est.log_value - ex).abs() / ex;
                let _ = writeln!(artifact, "{n},{k},{},{},{ex},{err}", est.u, est.log_value);
                Ok(err)
            })
            .collect()
    };

    // u-sweep at the target n
    let root = (n as f64).sqrt();
    let mut ks: Vec<u64> = [0.5, 1.0, 2.0].iter().map(|u| (u * root).round() as u64).collect();
    ks.dedup();
    let errs = rel_err_at(n, &ks, &mut artifact)?;
    let max_rel_err = errs.iter().cloned().fold(0.0f64, f64::max);

    // decade sweep at u = 1
    let mut decade_errs = Vec::new();
    for nn in [n / 100, n / 10, n] {
        let k = (nn as f64).sqrt().round() as u64;
        let e = rel_err_at(nn, &[k], &mut artifact)?[0];
        decade_errs.push(e);
    }
    let monotone = decade_errs.windows(2).all(|w| w[1] < w[0]);

    let mut statistics = stats_from(&[
        ("max_rel_err", max_rel_err),
        ("monotone_ok", f64::from(monotone)),
    ]);
    for (i, e) in errs.iter().enumerate() {
        statistics.insert(format!("rel_err_u{i}"), *e);
    }
    for (i, e) in decade_errs.iter().enumerate() {
        statistics.insert(format!("decade_err_{i}"), *e);
    }
    Ok(Outcome {
        statistics,
        primary: "max_rel_err",
        pass: max_rel_err <= threshold && monotone,
        artifacts: vec![("szekeres_accuracy.csv".into(), artifact)],
    })
}

fn largest_part_identity(params: &BTreeMap<String, f64>, threshold: f64) -> Result<Outcome, String> {
    let n_max = uparam(params, "n")?;
    let m_max = uparam(params, "m")?;
    let mut cache = CountCache::new();
    let mut violations = 0u64;
    let mut checks = 0u64;
    let mut equality_checks = 0u64;
    for m in 2..=m_max {
        for n in 1..=n_max {
            let base = n.div_ceil(m);
            let j = j_residue(n, m);
            let cutoff = exact_regime_cutoff(n, m);
            for l in 0..=(n - base) {
                let lhs =
                    cache.count_with_largest(n, m, base + l).map_err(|e| e.to_string())?;
                let rhs =
                    cache.count_at_most(m * (l + 1) - j, m - 1).map_err(|e| e.to_string())?;
                checks += 1;
                let ok = if (l as i64) <= cutoff {
                    equality_checks += 1;
                    lhs == rhs
                } else {
                    lhs <= rhs
                };
                if !ok {
                    violations += 1;
                }
            }
        }
    }
    let artifact = format!(
        "n_max,m_max,checks,equality_checks,violations\n{n_max},{m_max},{checks},{equality_checks},{violations}\n"
    );
    Ok(Outcome {
        statistics: stats_from(&[
            ("violations", violations as f64),
            ("checks", checks as f64),
            ("equality_checks", equality_checks as f64),
        ]),
        primary: "violations",
        pass: violations as f64 <= threshold,
        artifacts: vec![("lemma_2_1_identity.csv".into(), artifact)],
    })
}

fn m_sweep(
    params: &BTreeMap<String, f64>,
    seed: u64,
    workers: usize,
    threshold: f64,
) -> Result<Outcome, String> {
    let samples = uparam(params, "samples")?;
    let factor = uparam(params, "n_factor")?;
    let mut statistics = BTreeMap::new();
    let mut artifact = String::from("m,n,ks\n");
    let mut max_ks = 0.0f64;
    for (i, m) in [3u64, 5, 8].into_iter().enumerate() {
        let n = factor * m * m * m;
        let (ks, _, _) = top_vs_dirichlet(n, m, 1.0, samples, seed, workers, i as u64 + 1)?;
        statistics.insert(format!("ks_m{m}"), ks);
        let _ = writeln!(artifact, "{m},{n},{ks}");
        max_ks = max_ks.max(ks);
    }
    statistics.insert("max_ks".into(), max_ks);
    Ok(Outcome {
        statistics,
        primary: "max_ks",
        pass: max_ks <= threshold,
        artifacts: vec![("m_sweep_thm_1_5.csv".into(), artifact)],
    })
}
