//! Evaluable limit laws: the discrete joint/marginal limits of the centered
//! parts under the geometric-weight measure, the Gaussian limit of the
//! largest part, and the Dirichlet order-statistics references for the
//! generalized measure.

use crate::analysis::{clt_params, logsumexp, AnalysisError};
use crate::counting::{ln_biguint, CountCache, CountError, HR_CONSTANT};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;
use std::io::{self, Write};

#[derive(Debug, thiserror::Error)]
pub enum LimitError {
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("require m >= 2, got {m}")]
    InvalidM { m: u64 },
    #[error("require 1 <= j <= m, got j={j} m={m}")]
    InvalidJ { j: u64, m: u64 },
    #[error("q must lie strictly inside (0, 1), got {q}")]
    InvalidQ { q: f64 },
    #[error("tol must be positive, got {tol}")]
    InvalidTol { tol: f64 },
    #[error("point is not on the ordered simplex: {reason}")]
    NotOnSimplex { reason: String },
}

/// Subsequence n ≡ j (mod m) (with j = m for divisible n), weight ratio q,
/// and the truncation tolerance for the normalizing series.
#[derive(Debug, Clone, Copy)]
pub struct LimitLawSpec {
    pub m: u64,
    pub j: u64,
    pub q: f64,
    pub tol: f64,
}

impl LimitLawSpec {
    pub fn validate(&self) -> Result<(), LimitError> {
        if self.m < 2 {
            return Err(LimitError::InvalidM { m: self.m });
        }
        if self.j < 1 || self.j > self.m {
            return Err(LimitError::InvalidJ { j: self.j, m: self.m });
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(LimitError::InvalidQ { q: self.q });
        }
        if !(self.tol > 0.0) {
            return Err(LimitError::InvalidTol { tol: self.tol });
        }
        Ok(())
    }
}

/// A truncated pmf on offsets base_offset, base_offset+1, ...
///
/// probs are normalized over the kept support; the mass the truncation
/// discarded (relative to the kept mass) is certified <= tail_bound.
#[derive(Debug, Clone)]
pub struct DiscretePmf {
    pub base_offset: i64,
    pub probs: Vec<f64>,
    pub tail_bound: f64,
}

impl DiscretePmf {
    /// Rows "offset,probability" after '#' comment lines carrying `label`
    /// and the certified tail bound.
    pub fn write_csv<W: Write>(&self, w: &mut W, label: &str) -> io::Result<()> {
        writeln!(w, "# {label}")?;
        writeln!(w, "# tail_bound={:e}", self.tail_bound)?;
        writeln!(w, "offset,probability")?;
        for (i, p) in self.probs.iter().enumerate() {
            writeln!(w, "{},{}", self.base_offset + i as i64, p)?;
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (self.base_offset + i as i64) as f64 * p)
            .sum()
    }
}

/// Log weights ln(q^l * count_at_most(m(l+1)-j, m-1)) out to an index where
/// a geometric-ratio bound certifies the remaining series mass, plus the
/// head log-normalizer and the certified relative tail.
fn truncated_log_weights(
    cache: &mut CountCache,
    spec: &LimitLawSpec,
) -> Result<(Vec<f64>, f64, f64), LimitError> {
    spec.validate()?;
    let LimitLawSpec { m, j, q, tol } = *spec;
    let lambda = -q.ln();
    let mf = m as f64;
    let mut logw: Vec<f64> = Vec::new();
    let mut l_end = 63u64;
    loop {
        for l in logw.len() as u64..=l_end {
            let c = cache.count_at_most(m * (l + 1) - j, m - 1)?;
            logw.push(-lambda * l as f64 + ln_biguint(&c));
        }
        let z = logsumexp(&logw);
        // beyond l_end each weight is at most exp(-lambda l + K sqrt(m(l+1)))
        // and successive terms shrink by at least `ratio`
        let ratio = (-lambda + HR_CONSTANT * mf.sqrt() / (2.0 * ((l_end + 2) as f64).sqrt())).exp();
        if ratio < 1.0 {
            let tail_log = -lambda * (l_end + 1) as f64
                + HR_CONSTANT * (mf * (l_end + 2) as f64).sqrt()
                - (1.0 - ratio).ln();
            if tail_log <= tol.ln() + z {
                return Ok((logw, z, (tail_log - z).exp()));
            }
        }
        l_end *= 2;
    }
}

/// Limiting pmf of k1 - ceil(n/m) along the subsequence encoded by `spec`:
/// f(l) proportional to q^l * count_at_most(m(l+1) - j, m - 1).
pub fn limit_pmf_k1(cache: &mut CountCache, spec: &LimitLawSpec) -> Result<DiscretePmf, LimitError> {
    let (logw, z, tail_bound) = truncated_log_weights(cache, spec)?;
    let probs = logw.iter().map(|lw| (lw - z).exp()).collect();
    Ok(DiscretePmf { base_offset: 0, probs, tail_bound })
}

/// Limiting probability of the centered part vector (k_i - ceil(n/m))_i
/// taking the value `l_vec`: q^{l_1}/Z on the support
/// {l_1 >= 0, l_1 >= l_2 >= ... >= l_m, sum = j - m}, zero elsewhere.
pub fn limit_joint_prob(
    cache: &mut CountCache,
    spec: &LimitLawSpec,
    l_vec: &[i64],
) -> Result<f64, LimitError> {
    spec.validate()?;
    if l_vec.len() != spec.m as usize {
        return Ok(0.0);
    }
    let l1 = l_vec[0];
    if l1 < 0
        || l_vec.windows(2).any(|w| w[0] < w[1])
        || l_vec.iter().sum::<i64>() != spec.j as i64 - spec.m as i64
    {
        return Ok(0.0);
    }
    let (_, z, _) = truncated_log_weights(cache, spec)?;
    Ok((l1 as f64 * spec.q.ln() - z).exp())
}

/// Gaussian limit of (k1 - ceil(n/m) - gamma m)/sqrt(m), with sigma taken
/// from the analysis parameters (the single sigma implementation).
#[derive(Debug, Clone, Copy)]
pub struct CltLaw {
    sigma: f64,
}

impl CltLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
        std_normal.cdf(x / self.sigma)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

pub fn clt_law(q: f64) -> Result<CltLaw, LimitError> {
    Ok(CltLaw { sigma: clt_params(q)?.sigma() })
}

/// Phi(x / sigma), see [`CltLaw`].
pub fn clt_cdf(x: f64, q: f64) -> Result<f64, LimitError> {
    Ok(clt_law(q)?.cdf(x))
}

fn validate_ordered_simplex(y: &[f64]) -> Result<(), LimitError> {
    if y.is_empty() {
        return Err(LimitError::NotOnSimplex { reason: "empty point".into() });
    }
    if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(LimitError::NotOnSimplex { reason: "coordinates must be finite and >= 0".into() });
    }
    if y.windows(2).any(|w| w[0] < w[1] - 1e-12) {
        return Err(LimitError::NotOnSimplex { reason: "coordinates must be nonincreasing".into() });
    }
    let sum: f64 = y.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(LimitError::NotOnSimplex { reason: format!("coordinates sum to {sum}") });
    }
    Ok(())
}

/// Density of the decreasing order statistics of a symmetric
/// Dirichlet(alpha) vector at the ordered-simplex point y:
/// m! Gamma(m alpha) / Gamma(alpha)^m * prod y_i^(alpha - 1).
pub fn dirichlet_order_density(y: &[f64], alpha: f64) -> Result<f64, LimitError> {
    validate_ordered_simplex(y)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(LimitError::InvalidTol { tol: alpha });
    }
    let m = y.len() as f64;
    let log_const = ln_gamma(m + 1.0) + ln_gamma(m * alpha) - m * ln_gamma(alpha);
    let log_shape = if alpha == 1.0 {
        0.0
    } else {
        (alpha - 1.0) * y.iter().map(|v| v.ln()).sum::<f64>()
    };
    Ok((log_const + log_shape).exp())
}

/// Coordinate-wise power map y_i -> y_i^alpha. The image satisfies
/// sum x_i^{1/alpha} = 1 and stays nonincreasing.
pub fn power_transform(y: &[f64], alpha: f64) -> Result<Vec<f64>, LimitError> {
    validate_ordered_simplex(y)?;
    Ok(y.iter().map(|v| v.powf(alpha)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::j_residue;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    fn spec(m: u64, j: u64, q: f64, tol: f64) -> LimitLawSpec {
        LimitLawSpec { m, j, q, tol }
    }

    #[test]
    fn single_column_case_is_geometric() {
        let mut cache = CountCache::new();
        let pmf = limit_pmf_k1(&mut cache, &spec(2, 2, 0.5, 1e-9)).unwrap();
        assert!(pmf.tail_bound <= 1e-9);
        for (l, p) in pmf.probs.iter().enumerate().take(40) {
            assert!((p - 0.5f64.powi(l as i32 + 1)).abs() < 1e-12, "l={l}");
        }
        let total: f64 = pmf.probs.iter().sum();
        assert!((total - 1.0).abs() <= pmf.tail_bound + 1e-12);
    }

    #[test]
    fn three_column_head_probabilities() {
        // normalizer in closed form: sum 2^{-l} (floor(3l/2) + 2) = 20/3
        let mut cache = CountCache::new();
        let pmf = limit_pmf_k1(&mut cache, &spec(3, 1, 0.5, 1e-12)).unwrap();
        assert!((pmf.probs[0] - 2.0 * 3.0 / 20.0).abs() < 1e-9);
        assert!((pmf.probs[1] - 1.5 * 3.0 / 20.0).abs() < 1e-9);
        assert!((pmf.probs[2] - 1.25 * 3.0 / 20.0).abs() < 1e-9);
    }

    #[test]
    fn truncation_honesty() {
        let mut cache = CountCache::new();
        let coarse = limit_pmf_k1(&mut cache, &spec(3, 1, 0.5, 1e-6)).unwrap();
        let fine = limit_pmf_k1(&mut cache, &spec(3, 1, 0.5, 1e-7)).unwrap();
        assert!(fine.probs.len() >= coarse.probs.len());
        for (l, p) in coarse.probs.iter().enumerate() {
            assert!((p - fine.probs[l]).abs() <= 1e-6, "l={l}");
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut cache = CountCache::new();
        assert!(limit_pmf_k1(&mut cache, &spec(1, 1, 0.5, 1e-9)).is_err());
        assert!(limit_pmf_k1(&mut cache, &spec(3, 0, 0.5, 1e-9)).is_err());
        assert!(limit_pmf_k1(&mut cache, &spec(3, 4, 0.5, 1e-9)).is_err());
        assert!(limit_pmf_k1(&mut cache, &spec(3, 1, 1.0, 1e-9)).is_err());
        assert!(limit_pmf_k1(&mut cache, &spec(3, 1, 0.5, 0.0)).is_err());
    }

    #[test]
    fn joint_prob_support_and_normalization() {
        let mut cache = CountCache::new();
        let s = spec(2, 2, 0.5, 1e-9);
        assert!((limit_joint_prob(&mut cache, &s, &[0, 0]).unwrap() - 0.5).abs() < 1e-12);
        // off support: wrong sum, increasing order, negative l1, wrong arity
        assert_eq!(limit_joint_prob(&mut cache, &s, &[1, 0]).unwrap(), 0.0);
        assert_eq!(limit_joint_prob(&mut cache, &s, &[0, 1]).unwrap(), 0.0);
        assert_eq!(limit_joint_prob(&mut cache, &s, &[-1, 1]).unwrap(), 0.0);
        assert_eq!(limit_joint_prob(&mut cache, &s, &[0]).unwrap(), 0.0);
    }

    #[test]
    fn joint_marginalizes_to_k1_pmf() {
        let mut cache = CountCache::new();
        let s = spec(3, 1, 0.5, 1e-10);
        let pmf = limit_pmf_k1(&mut cache, &s).unwrap();
        for l1 in 0i64..=6 {
            // completions: l1 >= l2 >= l3, l2 + l3 = j - m - l1 = -2 - l1
            let mut mass = 0.0;
            let mut count = 0u64;
            let rest = -2 - l1;
            for l2 in -200..=l1 {
                let l3 = rest - l2;
                if l3 <= l2 {
                    mass += limit_joint_prob(&mut cache, &s, &[l1, l2, l3]).unwrap();
                    if limit_joint_prob(&mut cache, &s, &[l1, l2, l3]).unwrap() > 0.0 {
                        count += 1;
                    }
                }
            }
            assert!(
                (mass - pmf.probs[l1 as usize]).abs() < 1e-10,
                "l1={l1}: joint mass {mass} vs marginal {}",
                pmf.probs[l1 as usize]
            );
            // completion count equals the column count in the weights
            let direct = cache
                .count_at_most(3 * (l1 as u64 + 1) - 1, 2)
                .unwrap()
                .to_u64()
                .unwrap();
            assert_eq!(count, direct, "l1={l1}");
        }
    }

    #[test]
    fn clt_cdf_reference_points() {
        assert!((clt_cdf(0.0, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(clt_cdf(50.0, 0.5).unwrap() > 1.0 - 1e-9);
        assert!(clt_cdf(-50.0, 0.5).unwrap() < 1e-9);
        let sigma = clt_params(0.5).unwrap().sigma();
        assert!((clt_cdf(sigma, 0.5).unwrap() - 0.8413447461).abs() < 1e-9);
        // monotone
        assert!(clt_cdf(0.3, 0.5).unwrap() < clt_cdf(0.4, 0.5).unwrap());
        assert!(clt_cdf(0.0, 1.5).is_err());
    }

    #[test]
    fn dirichlet_density_constants() {
        // alpha = 1: the density is the constant m! (m-1)!
        assert!((dirichlet_order_density(&[0.5, 0.3, 0.2], 1.0).unwrap() - 12.0).abs() < 1e-9);
        assert!((dirichlet_order_density(&[0.9, 0.1], 1.0).unwrap() - 2.0).abs() < 1e-9);
        // m=3, alpha=1 with a zero coordinate still evaluates (0^0 = 1 here)
        assert!((dirichlet_order_density(&[0.6, 0.4, 0.0], 1.0).unwrap() - 12.0).abs() < 1e-9);
        // validation
        assert!(dirichlet_order_density(&[0.2, 0.3, 0.5], 1.0).is_err()); // increasing
        assert!(dirichlet_order_density(&[0.5, 0.3], 1.0).is_err()); // sum != 1
        assert!(dirichlet_order_density(&[], 1.0).is_err());
        assert!(dirichlet_order_density(&[0.7, -0.3, 0.6], 1.0).is_err());
    }

    #[test]
    fn dirichlet_density_integrates_to_one() {
        // MC over the ordered simplex: draw sorted uniform points (density
        // m!(m-1)! = 12) and average density(alpha=2)/12
        use crate::samplers::{dirichlet_order_stats, rng_for_stream};
        let mut rng = rng_for_stream(17, 0);
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let y = dirichlet_order_stats(3, 1.0, &mut rng).unwrap();
            acc += dirichlet_order_density(&y, 2.0).unwrap() / 12.0;
        }
        let integral = acc / n as f64;
        assert!((integral - 1.0).abs() < 0.01, "integral={integral}");
    }

    #[test]
    fn power_transform_examples() {
        let y = [0.75, 0.25];
        let x = power_transform(&y, 2.0).unwrap();
        assert_eq!(x, vec![0.5625, 0.0625]);
        // inverse-power sum returns to 1
        let back: f64 = x.iter().map(|v| v.powf(0.5)).sum();
        assert!((back - 1.0).abs() < 1e-10);
        assert_eq!(power_transform(&y, 1.0).unwrap(), vec![0.75, 0.25]);
        let y = [0.44, 0.31, 0.15, 0.1];
        for alpha in [0.5, 1.7, 3.0] {
            let x = power_transform(&y, alpha).unwrap();
            let back: f64 = x.iter().map(|v| v.powf(1.0 / alpha)).sum();
            assert!((back - 1.0).abs() < 1e-10);
            assert!(x.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    /// Exact-rational TV between the finite-n law of k1 - ceil(n/3) (q = 1/2,
    /// n ≡ 1 mod 3) and the limit law. The limit normalizer is the closed
    /// form 20/3 (parity-split geometric series of 2^{-l}(floor(3l/2)+2)).
    #[test]
    fn finite_n_laws_converge_in_tv() {
        let mut cache = CountCache::new();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let z_limit = BigRational::new(BigInt::from(20), BigInt::from(3));

        let limit_term = |cache: &mut CountCache, l: u64| -> BigRational {
            let count = cache.count_at_most(3 * (l + 1) - 1, 2).unwrap();
            let c = BigRational::from_integer(BigInt::from(count));
            c * pow_rat(&half, l) / &z_limit
        };

        let tv_for = |cache: &mut CountCache, n: u64| -> BigRational {
            assert_eq!(j_residue(n, 3), 1);
            let base = n.div_ceil(3);
            let l_max = n - base;
            // finite-n weights
            let mut weights = Vec::new();
            let mut z_n = BigRational::zero();
            for l in 0..=l_max {
                let c = cache.count_with_largest(n, 3, base + l).unwrap();
                let w = BigRational::from_integer(BigInt::from(c)) * pow_rat(&half, l);
                z_n += &w;
                weights.push(w);
            }
            let mut tv = BigRational::zero();
            let mut limit_head = BigRational::zero();
            for (l, w) in weights.iter().enumerate() {
                let p = w / &z_n;
                let f = limit_term(cache, l as u64);
                limit_head += &f;
                tv += (p - f).abs();
            }
            // all limit mass beyond the finite support counts fully
            tv += BigRational::one() - limit_head;
            tv / BigRational::from_integer(BigInt::from(2))
        };

        let tv31 = tv_for(&mut cache, 31);
        let tv301 = tv_for(&mut cache, 301);
        let tv3001 = tv_for(&mut cache, 3001);
        assert!(tv31 > tv301 && tv301 > tv3001, "not strictly decreasing");
        assert!(tv3001 < BigRational::new(BigInt::one(), BigInt::from(100)));
        // pin the coarse scale of the first distance
        let f = tv31.to_f64().unwrap();
        assert!((0.001..0.1).contains(&f), "tv31={f}");
    }

    fn pow_rat(x: &BigRational, e: u64) -> BigRational {
        let mut acc = BigRational::one();
        for _ in 0..e {
            acc *= x;
        }
        acc
    }
}
