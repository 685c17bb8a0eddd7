//! Exact-distribution samplers over restricted partitions.
//!
//! Uniform sampling walks exact big-integer count tables, so draws follow the
//! uniform law exactly (up to the RNG). The geometric-weight and generalized
//! samplers reduce to a largest-part draw plus a uniform completion, or to
//! enumeration/rejection, keeping every route checkable against counts.

use crate::analysis::{logsumexp, normalized_from_logs};
use crate::counting::{
    exact_regime_cutoff, j_residue, ln_biguint, log_at_most_row, CountCache, CountError,
    Partition, HR_CONSTANT,
};
use num_bigint::{BigUint, RandBigInt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error(transparent)]
    Count(#[from] CountError),
    #[error("q must lie strictly inside (0, 1), got {q}")]
    InvalidQ { q: f64 },
    #[error("alpha must be positive and finite, got {alpha}")]
    InvalidAlpha { alpha: f64 },
    #[error("no partitions of {n} fit in {m} parts with cap {b}")]
    EmptySupport { n: u64, m: u64, b: u64 },
    #[error("requires n >= m^2 (n={n}, m={m}) so the bulk range is nonempty")]
    RegimeTooSmall { n: u64, m: u64 },
    #[error("truncation tail bound {bound:e} exceeds tolerance {tol:e}")]
    TailNotCertified { bound: f64, tol: f64 },
    #[error("rejection sampler made {proposals} proposals without an accept")]
    RejectionStalled { proposals: u64 },
}

/// Deterministic per-stream RNG: one seed, independent streams.
pub fn rng_for_stream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from partitions of n into at most m parts.
///
/// Walks the conjugate view (parts <= m), choosing the multiplicity of each
/// part value c = m..1 by an exact big-integer inverse-CDF step, then
/// conjugates back. Cost O(m log n) big-integer comparisons per draw.
pub fn sample_uniform_at_most<R: Rng>(
    cache: &mut CountCache,
    n: u64,
    m: u64,
    rng: &mut R,
) -> Result<Partition, SampleError> {
    if n > 0 && m == 0 {
        return Err(SampleError::EmptySupport { n, m, b: n });
    }
    let m_eff = m.min(n);
    cache.ensure(n, m_eff)?;
    let mut mult = vec![0u64; m_eff as usize + 1];
    let mut x = n as usize;
    for c in (1..=m_eff as usize).rev() {
        if x == 0 {
            break;
        }
        let row = cache.row_ref(c as u64);
        let total = &row[x];
        let u = rng.gen_biguint_below(total);
        let rem = total - &u; // in [1, total]
        // smallest s in [0, x/c] with T[x-(s+1)c] < rem; T is this same row
        let mut lo = 0u64;
        let mut hi = (x / c) as u64;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let idx = x as i64 - (mid as i64 + 1) * c as i64;
            let below = idx < 0 || row[idx as usize] < rem;
            if below {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        mult[c] = lo;
        x -= lo as usize * c;
    }
    debug_assert_eq!(x, 0);
    // conjugate back: part j of the output is the number of values >= j
    let mut parts = Vec::new();
    let mut suffix = 0u64;
    for c in (1..=m_eff as usize).rev() {
        suffix += mult[c];
        parts.push(suffix);
    }
    parts.reverse();
    while parts.last() == Some(&0) {
        parts.pop();
    }
    Ok(Partition::from_sorted_unchecked(parts, m as usize))
}

/// Uniform draw from partitions of n into at most m parts, each part <= b.
///
/// Sequential largest-part inverse-CDF against cached cumulative count
/// tables; once the cap stops binding the walk delegates to the unrestricted
/// chain above.
pub fn sample_uniform_bounded<R: Rng>(
    cache: &mut CountCache,
    n: u64,
    m: u64,
    b: u64,
    rng: &mut R,
) -> Result<Partition, SampleError> {
    if n == 0 {
        return Ok(Partition::from_sorted_unchecked(Vec::new(), m as usize));
    }
    if m == 0 || b == 0 || (m as u128) * (b as u128) < n as u128 {
        return Err(SampleError::EmptySupport { n, m, b });
    }
    let mut parts: Vec<u64> = Vec::new();
    let (mut x, mut mm, mut cap) = (n, m, b);
    while x > 0 {
        if cap >= x {
            let free = sample_uniform_at_most(cache, x, mm, rng)?;
            parts.extend_from_slice(free.parts());
            break;
        }
        // cap < x and mm*cap >= x force mm >= 2
        debug_assert!(mm >= 2);
        let lo = x.div_ceil(mm);
        let h = if mm == 2 {
            // every part value in range completes in exactly one way
            rng.gen_range(lo..=cap)
        } else {
            let cum = cache.largest_part_cumulative(x, mm, cap)?;
            let u = rng.gen_biguint_below(cum.last().expect("nonempty range"));
            lo + cum.partition_point(|c| *c <= u) as u64
        };
        parts.push(h);
        x -= h;
        mm -= 1;
        cap = h;
    }
    Ok(Partition::from_sorted_unchecked(parts, m as usize))
}

/// How a largest-part sampler covers its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum K1Truncation {
    /// Every feasible largest-part value carries its exact weight.
    Exact,
    /// Support cut to the closed-form regime; the discarded mass is bounded
    /// above by `tail_bound` (relative to the kept mass).
    CertifiedBulk { tail_bound: f64 },
}

/// Samples the largest part k1 under the measure that weights each partition
/// of n (at most m parts) by q^{k1}.
///
/// Weights are assembled in the log domain from exact counts and normalized
/// into an f64 inverse-CDF table; the ~1e-15 rounding this admits is far
/// below any statistical resolution used downstream.
#[derive(Debug)]
pub struct GeometricK1Sampler {
    n: u64,
    m: u64,
    q: f64,
    base: u64,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    truncation: K1Truncation,
}

impl GeometricK1Sampler {
    /// Exact weights q^l * count_with_largest(n, m, base + l) over the full
    /// range l = 0 ..= n - base, base = ceil(n/m).
    pub fn new_exact(
        cache: &mut CountCache,
        n: u64,
        m: u64,
        q: f64,
    ) -> Result<Self, SampleError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(SampleError::InvalidQ { q });
        }
        if n == 0 || m == 0 {
            return Err(SampleError::EmptySupport { n, m, b: n });
        }
        let base = n.div_ceil(m);
        let ln_q = q.ln();
        let mut logw = Vec::with_capacity((n - base + 1) as usize);
        for l in 0..=(n - base) {
            let count = cache.count_with_largest(n, m, base + l)?;
            logw.push(l as f64 * ln_q + ln_biguint(&count));
        }
        let probs = normalized_from_logs(&logw);
        let cdf = cumulative(&probs);
        Ok(GeometricK1Sampler { n, m, q, base, probs, cdf, truncation: K1Truncation::Exact })
    }

    /// Support restricted to the closed-form regime l = 0 ..= cutoff, where
    /// the weight is exactly q^l * count_at_most(m(l+1) - j, m-1). The
    /// discarded tail is certified: finite-n weights beyond the cutoff are
    /// dominated by their closed-form values, summed exactly out to a point
    /// where a geometric-ratio bound controls the rest. Errors if the
    /// certificate cannot push the relative tail below `tail_tol`.
    ///
    /// Needs no count tables proportional to n, so it scales to n ~ 10^8.
    pub fn new_bulk(n: u64, m: u64, q: f64, tail_tol: f64) -> Result<Self, SampleError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(SampleError::InvalidQ { q });
        }
        if m < 2 || n < m * m {
            return Err(SampleError::RegimeTooSmall { n, m });
        }
        let cutoff = exact_regime_cutoff(n, m) as u64;
        let j = j_residue(n, m);
        let base = n.div_ceil(m);
        let lambda = -q.ln();
        let mf = m as f64;

        let bulk_row = log_at_most_row(m * (cutoff + 1) - j, m - 1);
        let logw: Vec<f64> = (0..=cutoff)
            .map(|l| l as f64 * -lambda + bulk_row[(m * (l + 1) - j) as usize])
            .collect();
        let z_bulk = logsumexp(&logw);

        // Find L >= cutoff past which the closed-form weights are provably
        // summable: their one-step growth is at most
        //   q * exp(K sqrt(m) / (2 sqrt(L+2)))
        // and the first discarded term is at most exp(-lambda(L+1) + K sqrt(m(L+2))).
        let budget = tail_tol.ln() + z_bulk - std::f64::consts::LN_2;
        let mut l_end = cutoff;
        let mut hr_tail = f64::INFINITY;
        for _ in 0..200 {
            let ratio = (-lambda + HR_CONSTANT * mf.sqrt() / (2.0 * ((l_end + 2) as f64).sqrt())).exp();
            if ratio < 1.0 {
                hr_tail = -lambda * (l_end + 1) as f64
                    + HR_CONSTANT * (mf * (l_end + 2) as f64).sqrt()
                    - (1.0 - ratio).ln();
                if hr_tail <= budget {
                    break;
                }
            }
            l_end = l_end * 3 / 2 + 64;
        }
        // exact closed-form sum over the gap (cutoff, l_end]
        let gap_log = if l_end > cutoff {
            let gap_row = log_at_most_row(m * (l_end + 1) - j, m - 1);
            let gap: Vec<f64> = (cutoff + 1..=l_end)
                .map(|l| l as f64 * -lambda + gap_row[(m * (l + 1) - j) as usize])
                .collect();
            logsumexp(&gap)
        } else {
            f64::NEG_INFINITY
        };
        let tail_log = logsumexp(&[gap_log, hr_tail]);
        let tail_bound = (tail_log - z_bulk).exp();
        if !(tail_bound <= tail_tol) {
            return Err(SampleError::TailNotCertified { bound: tail_bound, tol: tail_tol });
        }

        let probs = normalized_from_logs(&logw);
        let cdf = cumulative(&probs);
        Ok(GeometricK1Sampler {
            n,
            m,
            q,
            base,
            probs,
            cdf,
            truncation: K1Truncation::CertifiedBulk { tail_bound },
        })
    }

    /// Offset above ceil(n/m).
    pub fn sample_l<R: Rng>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u).min(self.probs.len() - 1) as u64
    }

    pub fn sample_k1<R: Rng>(&self, rng: &mut R) -> u64 {
        self.base + self.sample_l(rng)
    }

    /// P(l) over offsets l = 0, 1, ...
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn truncation(&self) -> K1Truncation {
        self.truncation
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

/// Samples whole partitions under the q^{k1} measure: exact largest-part
/// draw, then a uniform completion below it.
pub struct GeometricPartitionSampler {
    k1: GeometricK1Sampler,
}

impl GeometricPartitionSampler {
    pub fn new(cache: &mut CountCache, n: u64, m: u64, q: f64) -> Result<Self, SampleError> {
        Ok(GeometricPartitionSampler { k1: GeometricK1Sampler::new_exact(cache, n, m, q)? })
    }

    pub fn sample<R: Rng>(
        &self,
        cache: &mut CountCache,
        rng: &mut R,
    ) -> Result<Partition, SampleError> {
        let k1 = self.k1.sample_k1(rng);
        let rest = sample_uniform_bounded(cache, self.k1.n - k1, self.k1.m - 1, k1, rng)?;
        let mut parts = Vec::with_capacity(rest.parts().len() + 1);
        parts.push(k1);
        parts.extend_from_slice(rest.parts());
        Ok(Partition::from_sorted_unchecked(parts, self.k1.m as usize))
    }

    pub fn k1_sampler(&self) -> &GeometricK1Sampler {
        &self.k1
    }
}

/// ln of the density-style weight prod_i (k_i/n)^(alpha-1) over the m padded
/// coordinates. Zero coordinates contribute 0^(alpha-1): factor 1 when
/// alpha = 1, weight 0 (-inf here) when alpha > 1, and are skipped when
/// alpha < 1 (the weight then covers positive parts only).
pub fn partition_log_weight(parts: &[u64], n: u64, m: u64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        return 0.0;
    }
    if alpha > 1.0 && (parts.len() as u64) < m {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    parts.iter().map(|&p| (alpha - 1.0) * (p as f64 / nf).ln()).sum()
}

enum GeneralMode {
    Uniform,
    Enumerated { parts: Vec<Vec<u64>>, cdf: Vec<f64> },
    Rejection { log_w_max: f64 },
}

const REJECTION_PROPOSAL_CAP: u64 = 10_000_000;

/// Samples partitions of n (at most m parts) weighted by
/// prod (k_i/n)^(alpha-1): exact enumeration when the support is small,
/// otherwise rejection from uniform proposals under a proven weight bound.
pub struct GeneralSampler {
    n: u64,
    m: u64,
    alpha: f64,
    mode: GeneralMode,
}

impl GeneralSampler {
    pub fn new(cache: &mut CountCache, n: u64, m: u64, alpha: f64) -> Result<Self, SampleError> {
        Self::with_enumeration_limit(cache, n, m, alpha, 2_000_000)
    }

    /// `limit` = largest support size to fully enumerate; 0 forces rejection.
    pub fn with_enumeration_limit(
        cache: &mut CountCache,
        n: u64,
        m: u64,
        alpha: f64,
        limit: u64,
    ) -> Result<Self, SampleError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(SampleError::InvalidAlpha { alpha });
        }
        if n == 0 || m == 0 {
            return Err(SampleError::EmptySupport { n, m, b: n });
        }
        if alpha == 1.0 {
            return Ok(GeneralSampler { n, m, alpha, mode: GeneralMode::Uniform });
        }
        let count = cache.count_at_most(n, m)?;
        let mode = if count <= BigUint::from(limit) {
            let mut parts_list = Vec::new();
            let mut logw = Vec::new();
            for p in enumerate_partitions(n, m) {
                logw.push(partition_log_weight(p.parts(), n, m, alpha));
                parts_list.push(p.parts().to_vec());
            }
            if logsumexp(&logw) == f64::NEG_INFINITY {
                return Err(SampleError::EmptySupport { n, m, b: n });
            }
            let cdf = cumulative(&normalized_from_logs(&logw));
            GeneralMode::Enumerated { parts: parts_list, cdf }
        } else {
            // sup of the weight: the even split for alpha > 1; for alpha < 1
            // each lattice factor is at most n^(1-alpha)
            let log_w_max = if alpha >= 1.0 {
                -(m as f64) * (alpha - 1.0) * (m as f64).ln()
            } else {
                (m as f64) * (1.0 - alpha) * (n as f64).ln()
            };
            GeneralMode::Rejection { log_w_max }
        };
        Ok(GeneralSampler { n, m, alpha, mode })
    }

    pub fn sample<R: Rng>(
        &self,
        cache: &mut CountCache,
        rng: &mut R,
    ) -> Result<Partition, SampleError> {
        match &self.mode {
            GeneralMode::Uniform => sample_uniform_at_most(cache, self.n, self.m, rng),
            GeneralMode::Enumerated { parts, cdf } => {
                let u: f64 = rng.gen();
                let idx = cdf.partition_point(|&c| c <= u).min(parts.len() - 1);
                Ok(Partition::from_sorted_unchecked(parts[idx].clone(), self.m as usize))
            }
            GeneralMode::Rejection { log_w_max } => {
                for proposals in 1..=REJECTION_PROPOSAL_CAP {
                    let prop = sample_uniform_at_most(cache, self.n, self.m, rng)?;
                    let lw = partition_log_weight(prop.parts(), self.n, self.m, self.alpha);
                    assert!(
                        lw <= log_w_max + 1e-9,
                        "weight bound violated: ln w = {lw} > {log_w_max}"
                    );
                    let u: f64 = rng.gen();
                    if u.ln() < lw - log_w_max {
                        return Ok(prop);
                    }
                    let _ = proposals;
                }
                Err(SampleError::RejectionStalled { proposals: REJECTION_PROPOSAL_CAP })
            }
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            GeneralMode::Uniform => "uniform",
            GeneralMode::Enumerated { .. } => "enumerated",
            GeneralMode::Rejection { .. } => "rejection",
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Decreasing order statistics of a Dirichlet(alpha, ..., alpha) vector with
/// m coordinates: m iid Gamma(alpha, 1) draws, normalized and sorted.
pub fn dirichlet_order_stats<R: Rng>(
    m: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Vec<f64>, SampleError> {
    if !(alpha > 0.0) || !alpha.is_finite() || m == 0 {
        return Err(SampleError::InvalidAlpha { alpha });
    }
    let gamma = Gamma::new(alpha, 1.0).map_err(|_| SampleError::InvalidAlpha { alpha })?;
    for _ in 0..100 {
        let mut v: Vec<f64> = (0..m).map(|_| gamma.sample(rng)).collect();
        let sum: f64 = v.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            v.iter_mut().for_each(|x| *x /= sum);
            v.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite"));
            return Ok(v);
        }
    }
    Err(SampleError::InvalidAlpha { alpha })
}

/// All partitions of n into at most m parts, largest-first within each
/// partition, in decreasing lexicographic order: (5),(4,1),(3,2),...
pub fn enumerate_partitions(n: u64, m: u64) -> PartitionIter {
    PartitionIter { n, m, current: None, done: n > 0 && m == 0 }
}

pub struct PartitionIter {
    n: u64,
    m: u64,
    current: Option<Vec<u64>>,
    done: bool,
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        match &mut self.current {
            None => {
                let first = if self.n == 0 { Vec::new() } else { vec![self.n] };
                self.current = Some(first.clone());
                Some(Partition::from_sorted_unchecked(first, self.m as usize))
            }
            Some(cur) => {
                // seek the rightmost position whose decrement leaves a tail
                // that fits in the remaining slots
                let k = cur.len();
                let mut suffix_sum = 0u64;
                for i in (0..k).rev() {
                    suffix_sum += cur[i];
                    let c = cur[i] - 1;
                    if c == 0 {
                        continue;
                    }
                    let rest = suffix_sum - c;
                    let slots = self.m - i as u64 - 1;
                    if rest <= slots * c {
                        cur.truncate(i);
                        cur.push(c);
                        // lex-greatest tail: repeat c, then the remainder
                        let mut left = rest;
                        while left > 0 {
                            let part = left.min(c);
                            // keep nonincreasing: a short final part must come last
                            if left > c {
                                cur.push(c);
                                left -= c;
                            } else {
                                cur.push(part);
                                left = 0;
                            }
                        }
                        return Some(Partition::from_sorted_unchecked(
                            cur.clone(),
                            self.m as usize,
                        ));
                    }
                }
                self.done = true;
                None
            }
        }
    }
}
