//! Statistical verification harness: each experiment draws from a sampler,
//! compares against an independently computed reference law, and emits a
//! reproducible Report. Experiment ids are stable tokens; the `claim`
//! recorded in each Report states the property being checked.

mod experiments;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::samplers::rng_for_stream;
use rand_chacha::ChaCha20Rng;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentId {
    Thm11Joint,
    Cor12Marginal,
    Cor12Conditional,
    Thm13Clt,
    Thm14General,
    Cor15Dirichlet,
    Cor16Transform,
    SzekeresAccuracy,
    Lemma21Identity,
    MSweepThm15,
}

pub const ALL_EXPERIMENTS: [ExperimentId; 10] = [
    ExperimentId::Thm11Joint,
    ExperimentId::Cor12Marginal,
    ExperimentId::Cor12Conditional,
    ExperimentId::Thm13Clt,
    ExperimentId::Thm14General,
    ExperimentId::Cor15Dirichlet,
    ExperimentId::Cor16Transform,
    ExperimentId::SzekeresAccuracy,
    ExperimentId::Lemma21Identity,
    ExperimentId::MSweepThm15,
];

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentId::Thm11Joint => "THM_1_1_JOINT",
            ExperimentId::Cor12Marginal => "COR_1_2_MARGINAL",
            ExperimentId::Cor12Conditional => "COR_1_2_CONDITIONAL",
            ExperimentId::Thm13Clt => "THM_1_3_CLT",
            ExperimentId::Thm14General => "THM_1_4_GENERAL",
            ExperimentId::Cor15Dirichlet => "COR_1_5_DIRICHLET",
            ExperimentId::Cor16Transform => "COR_1_6_TRANSFORM",
            ExperimentId::SzekeresAccuracy => "SZEKERES_ACCURACY",
            ExperimentId::Lemma21Identity => "LEMMA_2_1_IDENTITY",
            ExperimentId::MSweepThm15 => "M_SWEEP_THM_1_5",
        };
        f.write_str(s)
    }
}

impl FromStr for ExperimentId {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self, VerifyError> {
        ALL_EXPERIMENTS
            .iter()
            .find(|id| id.to_string() == s)
            .copied()
            .ok_or_else(|| VerifyError::InvalidConfig(format!("unknown experiment id {s:?}")))
    }
}

/// One-sentence statement of the distributional property the experiment
/// checks, echoed into its Report.
pub fn claim(id: ExperimentId) -> &'static str {
    match id {
        ExperimentId::Thm11Joint => {
            "centered part vector (k_i - ceil(n/m)) converges to the discrete law q^{l_1}/Z on \
             {l_1 >= 0, l_1 >= ... >= l_m, sum l_i = j - m}"
        }
        ExperimentId::Cor12Marginal => {
            "largest-part offset k_1 - ceil(n/m) converges to the geometric-weight limit pmf"
        }
        ExperimentId::Cor12Conditional => {
            "given k_1, the completion is uniform over partitions of n - k_1 into at most m - 1 \
             parts of size at most k_1 (exact at every n)"
        }
        ExperimentId::Thm13Clt => {
            "(k_1 - ceil(n/m) - gamma m)/sqrt(m) approaches N(0, sigma^2) as m grows"
        }
        ExperimentId::Thm14General => {
            "scaled parts (k_i/n) under the density-weighted measure converge to that density on \
             the ordered simplex, instantiated with the symmetric Dirichlet(alpha) density"
        }
        ExperimentId::Cor15Dirichlet => {
            "under the uniform measure, (k_i/n) converges to the decreasing order statistics of \
             a symmetric Dirichlet(1) vector"
        }
        ExperimentId::Cor16Transform => {
            "alpha-th powers of the scaled parts converge to the uniform law on the ordered \
             surface sum x_i^(1/alpha) = 1"
        }
        ExperimentId::SzekeresAccuracy => {
            "the saddle-point estimate of ln count_at_most(n, k) tracks the exact value within \
             2 percent for k/sqrt(n) in [0.5, 2], improving as n grows"
        }
        ExperimentId::Lemma21Identity => {
            "count_with_largest(n, m, ceil(n/m) + l) equals count_at_most(m(l+1) - j, m - 1) for \
             l up to (n - m^2)/(m(m-1)) and never exceeds it"
        }
        ExperimentId::MSweepThm15 => {
            "the uniform-measure top scaled part k_1/n matches the Dirichlet(1) top order \
             statistic reference for each m in the sweep"
        }
    }
}

/// Version tag of the decision-threshold defaults below.
pub const THRESHOLDS_VERSION: &str = "v1";

/// v1 decision thresholds. Statistical ones were calibrated by a 20-seed
/// sweep at the default parameters (seeds 0..19, worker-count independent):
/// threshold = 1.5 x the largest statistic observed, rounded up, except
/// where a coarser bound was fixed up front and the sweep came in under it.
/// Counting identities use zero tolerance.
pub fn default_threshold(id: ExperimentId) -> f64 {
    match id {
        // sweep max TV 0.010 at 1e5 draws; fixed bound kept
        ExperimentId::Thm11Joint => 0.02,
        // sweep max TV 0.005; fixed bound kept
        ExperimentId::Cor12Marginal => 0.02,
        // count of strata whose uniformity test rejects at p <= 1e-3
        ExperimentId::Cor12Conditional => 0.0,
        // fixed bound; the lattice of k_1 keeps the m=50 statistic near 0.09,
        // in which case the escalation protocol decides instead (see run)
        ExperimentId::Thm13Clt => 0.05,
        // sweep max KS 0.069 at n=60 (dominated by finite-n bias, not noise)
        ExperimentId::Thm14General => 0.105,
        ExperimentId::Cor15Dirichlet => 0.03,
        // the power map is monotone coordinate-wise, so this inherits the
        // finite-n bias of the n=60 sweep above
        ExperimentId::Cor16Transform => 0.105,
        // relative error of the log at n = 1e5
        ExperimentId::SzekeresAccuracy => 0.02,
        ExperimentId::Lemma21Identity => 0.0,
        ExperimentId::MSweepThm15 => 0.03,
    }
}

/// Default parameter set per experiment; CLI flags override entries.
pub fn default_params(id: ExperimentId) -> BTreeMap<String, f64> {
    let mut p = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        p.insert(k.to_string(), v);
    };
    match id {
        ExperimentId::Thm11Joint => {
            put("n", 301.0);
            put("m", 3.0);
            put("q", 0.5);
            put("samples", 1e5);
        }
        ExperimentId::Cor12Marginal => {
            put("n", 3001.0);
            put("m", 3.0);
            put("q", 0.5);
            put("samples", 1e5);
            put("tol", 1e-9);
        }
        ExperimentId::Cor12Conditional => {
            put("n", 1e4);
            put("m", 4.0);
            put("q", 0.5);
            put("samples", 1e5);
        }
        ExperimentId::Thm13Clt => {
            put("n", 1e6);
            put("m", 50.0);
            put("q", 0.5);
            put("samples", 1e4);
            put("tol", 1e-6);
        }
        ExperimentId::Thm14General => {
            put("n", 60.0);
            put("m", 3.0);
            put("alpha", 3.0);
            put("samples", 1e5);
        }
        ExperimentId::Cor15Dirichlet => {
            put("n", 2000.0);
            put("m", 3.0);
            put("alpha", 1.0);
            put("samples", 1e5);
        }
        ExperimentId::Cor16Transform => {
            put("n", 60.0);
            put("m", 3.0);
            put("alpha", 3.0);
            put("samples", 1e5);
        }
        ExperimentId::SzekeresAccuracy => {
            put("n", 1e5);
        }
        ExperimentId::Lemma21Identity => {
            put("n", 300.0);
            put("m", 12.0);
        }
        ExperimentId::MSweepThm15 => {
            put("samples", 1e5);
            put("n_factor", 200.0);
        }
    }
    p
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment_id: ExperimentId,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults for `id` with `overrides` applied on top.
    pub fn with_overrides(
        id: ExperimentId,
        seed: u64,
        overrides: &BTreeMap<String, f64>,
    ) -> ExperimentConfig {
        let mut params = default_params(id);
        for (k, v) in overrides {
            params.insert(k.clone(), *v);
        }
        ExperimentConfig { experiment_id: id, params, seed }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub experiment_id: String,
    pub claim: String,
    pub version: String,
    pub thresholds_version: String,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    pub statistics: BTreeMap<String, f64>,
    pub primary_statistic: String,
    pub threshold: f64,
    pub pass: bool,
    pub refusal: Option<String>,
    pub runtime_ms: u64,
}

impl Report {
    /// Key-value text in a stable order, excluding runtime. Two runs with
    /// the same config and software version produce identical output.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("experiment_id={}\n", self.experiment_id));
        out.push_str(&format!("claim={}\n", self.claim));
        out.push_str(&format!("version={}\n", self.version));
        out.push_str(&format!("thresholds_version={}\n", self.thresholds_version));
        out.push_str(&format!("seed={}\n", self.seed));
        for (k, v) in &self.params {
            out.push_str(&format!("param.{k}={v}\n"));
        }
        for (k, v) in &self.statistics {
            out.push_str(&format!("stat.{k}={v}\n"));
        }
        out.push_str(&format!("primary_statistic={}\n", self.primary_statistic));
        out.push_str(&format!("threshold={}\n", self.threshold));
        out.push_str(&format!("pass={}\n", self.pass));
        if let Some(r) = &self.refusal {
            out.push_str(&format!("refusal={r}\n"));
        }
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}runtime_ms={}", self.canonical_text(), self.runtime_ms)
    }
}

/// What an experiment body hands back to the coordinator.
pub(crate) struct Outcome {
    pub statistics: BTreeMap<String, f64>,
    pub primary: &'static str,
    pub pass: bool,
    pub artifacts: Vec<(String, String)>,
}

/// Runs the experiment deterministically from its seed. Infeasible
/// parameters surface as a refusal inside the Report (pass = false), not as
/// an error; Err is reserved for malformed configs.
pub fn run_experiment(
    config: &ExperimentConfig,
    workers: usize,
    out_dir: Option<&Path>,
) -> Result<Report, VerifyError> {
    let id = config.experiment_id;
    if let Some(s) = config.params.get("samples") {
        if *s < 1e3 {
            return Err(VerifyError::InvalidConfig(format!(
                "samples must be at least 1000, got {s}"
            )));
        }
    }
    let started = Instant::now();
    let threshold = default_threshold(id);
    let result = experiments::dispatch(id, &config.params, config.seed, workers, threshold);
    let (statistics, primary, pass, refusal, artifacts) = match result {
        Ok(Outcome { statistics, primary, pass, artifacts }) => {
            (statistics, primary, pass, None, artifacts)
        }
        Err(reason) => (BTreeMap::new(), "refused", false, Some(reason), Vec::new()),
    };
    let report = Report {
        experiment_id: id.to_string(),
        claim: claim(id).to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        thresholds_version: THRESHOLDS_VERSION.to_string(),
        seed: config.seed,
        params: config.params.clone(),
        statistics,
        primary_statistic: primary.to_string(),
        threshold,
        pass,
        refusal,
        runtime_ms: started.elapsed().as_millis() as u64,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let stem = id.to_string().to_lowercase();
        std::fs::write(dir.join(format!("{stem}_report.txt")), report.to_string())?;
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(dir.join(format!("{stem}_report.json")), json)?;
        for (name, contents) in &artifacts {
            std::fs::write(dir.join(name), contents)?;
        }
    }
    Ok(report)
}

/// Total variation distance between two maps interpreted as pmfs over the
/// union of their supports (missing keys count as zero).
pub fn tv_distance<K: Ord>(p: &BTreeMap<K, f64>, r: &BTreeMap<K, f64>) -> f64 {
    let mut acc = 0.0;
    for (k, a) in p {
        acc += (a - r.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in r {
        if !p.contains_key(k) {
            acc += b.abs();
        }
    }
    acc / 2.0
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`:
/// sup_i max(i/N - F(x_(i)), F(x_(i)) - (i-1)/N). Sorts in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    assert!(!samples.is_empty(), "ks_statistic needs at least one sample");
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in samples.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b| over the merged
/// sample, with ties consumed together. Sorts both in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Pearson chi-square test of `observed` against the uniform distribution
/// over its cells. Returns (statistic, p_value); None when there are fewer
/// than two cells (degenerate, untestable).
pub fn chi_square_uniform(observed: &[u64]) -> Option<(f64, f64)> {
    if observed.len() < 2 {
        return None;
    }
    let total: u64 = observed.iter().sum();
    let expected = total as f64 / observed.len() as f64;
    let stat: f64 = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).expect("dof >= 1");
    Some((stat, 1.0 - dist.cdf(stat)))
}

pub(crate) const STREAM_BLOCKS: u64 = 64;

/// Splits `total` draws over 64 fixed RNG streams (stream = base + block)
/// and runs them on up to `workers` threads. Results come back concatenated
/// in block order, so output is independent of the worker count.
pub(crate) fn run_blocks<T, F>(seed: u64, stream_base: u64, total: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha20Rng, u64) -> Vec<T> + Sync,
{
    let counts: Vec<u64> = (0..STREAM_BLOCKS)
        .map(|b| total / STREAM_BLOCKS + u64::from(b < total % STREAM_BLOCKS))
        .collect();
    let slots: Vec<Mutex<Option<Vec<T>>>> =
        (0..STREAM_BLOCKS).map(|_| Mutex::new(None)).collect();
    let next = AtomicU64::new(0);
    let workers = workers.clamp(1, STREAM_BLOCKS as usize);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let b = next.fetch_add(1, Ordering::Relaxed);
                if b >= STREAM_BLOCKS {
                    break;
                }
                let mut rng = rng_for_stream(seed, stream_base + b);
                let out = f(&mut rng, counts[b as usize]);
                *slots[b as usize].lock().unwrap() = Some(out);
            });
        }
    });
    let mut merged = Vec::new();
    for slot in slots {
        merged.extend(slot.into_inner().unwrap().expect("block completed"));
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_distance_basics() {
        let map = |pairs: &[(i64, f64)]| pairs.iter().copied().collect::<BTreeMap<i64, f64>>();
        let p = map(&[(0, 0.5), (1, 0.5)]);
        assert_eq!(tv_distance(&p, &p), 0.0);
        let r = map(&[(2, 1.0)]);
        assert_eq!(tv_distance(&p, &r), 1.0);
        let r = map(&[(0, 1.0)]);
        assert!((tv_distance(&p, &r) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_one_sample_basics() {
        // single sample at the median
        let mut s = vec![0.5];
        assert!((ks_statistic(&mut s, |x| x) - 0.5).abs() < 1e-15);
        // all mass below the support
        let mut s = vec![-3.0, -2.0, -1.0];
        assert!((ks_statistic(&mut s, |x| x.clamp(0.0, 1.0)) - 1.0).abs() < 1e-15);
        // uniform samples against their own cdf stay near the Kolmogorov scale
        let mut rng = rng_for_stream(5, 0);
        let mut s: Vec<f64> = (0..100_000).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
        let d = ks_statistic(&mut s, |x| x.clamp(0.0, 1.0));
        assert!(d < 1.95 / (100_000f64).sqrt(), "d={d}");
    }

    #[test]
    fn ks_two_sample_basics() {
        let mut a = vec![1.0, 2.0, 3.0];
        let mut b = vec![1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&mut a, &mut b), 0.0);
        let mut a = vec![1.0, 2.0];
        let mut b = vec![5.0, 6.0, 7.0];
        assert_eq!(ks_two_sample(&mut a, &mut b), 1.0);
        // interleaved with ties
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![2.0, 3.0];
        let d = ks_two_sample(&mut a, &mut b);
        // after consuming value 2: F_a = 3/4, F_b = 1/2; at 3: F_a = 3/4, F_b = 1
        assert!((d - 0.25).abs() < 1e-15, "d={d}");
    }

    #[test]
    fn chi_square_uniform_behaves() {
        assert!(chi_square_uniform(&[10]).is_none());
        let (stat, p) = chi_square_uniform(&[100, 100, 100, 100]).unwrap();
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let (_, p) = chi_square_uniform(&[400, 0, 0, 0]).unwrap();
        assert!(p < 1e-6, "p={p}");
    }

    #[test]
    fn run_blocks_is_worker_count_invariant() {
        let draw = |rng: &mut ChaCha20Rng, count: u64| -> Vec<f64> {
            (0..count).map(|_| rand::Rng::gen::<f64>(rng)).collect()
        };
        let one = run_blocks(9, 0, 1000, 1, draw);
        let four = run_blocks(9, 0, 1000, 4, draw);
        let many = run_blocks(9, 0, 1000, 64, draw);
        assert_eq!(one, four);
        assert_eq!(one, many);
        assert_eq!(one.len(), 1000);
        // different stream base gives unrelated draws
        let shifted = run_blocks(9, 1000, 1000, 4, draw);
        assert_ne!(one, shifted);
    }

    #[test]
    fn experiment_ids_round_trip_and_have_tables() {
        for id in ALL_EXPERIMENTS {
            let s = id.to_string();
            assert_eq!(s.parse::<ExperimentId>().unwrap(), id);
            assert!(!claim(id).is_empty());
            assert!(default_threshold(id) >= 0.0);
            assert!(!default_params(id).is_empty());
        }
        assert!("NOT_AN_EXPERIMENT".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn reports_are_reproducible_and_worker_invariant() {
        let mut overrides = BTreeMap::new();
        overrides.insert("n".to_string(), 301.0);
        overrides.insert("samples".to_string(), 2000.0);
        let cfg = ExperimentConfig::with_overrides(ExperimentId::Cor12Marginal, 7, &overrides);
        let a = run_experiment(&cfg, 1, None).unwrap();
        let b = run_experiment(&cfg, 4, None).unwrap();
        assert_eq!(a.canonical_text(), b.canonical_text());
        assert!(a.statistics.contains_key("tv_distance"));
    }

    #[test]
    fn undersized_sample_count_is_a_config_error() {
        let mut overrides = BTreeMap::new();
        overrides.insert("samples".to_string(), 10.0);
        let cfg = ExperimentConfig::with_overrides(ExperimentId::Cor12Marginal, 7, &overrides);
        assert!(matches!(run_experiment(&cfg, 1, None), Err(VerifyError::InvalidConfig(_))));
    }
}
