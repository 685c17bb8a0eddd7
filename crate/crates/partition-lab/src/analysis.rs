//! Log-scale asymptotics for partition counts: the Bose-Einstein integral,
//! the saddle-point equation, the Szekeres second-order count estimate, and
//! the parameters of the Gaussian limit for the largest part under the
//! geometric-weight measure.

use std::f64::consts::PI;

/// J(infinity) = pi^2 / 6.
pub const J_LIMIT: f64 = PI * PI / 6.0;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("u must be positive and finite, got {u}")]
    InvalidU { u: f64 },
    #[error("q must lie strictly inside (0, 1), got {q}")]
    InvalidQ { q: f64 },
}

/// ln(sum of e^{x_i}), stable under large magnitudes; -inf for empty/all -inf.
pub(crate) fn logsumexp(xs: &[f64]) -> f64 {
    let peak = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return peak;
    }
    peak + xs.iter().map(|x| (x - peak).exp()).sum::<f64>().ln()
}

/// exp(x_i - logsumexp), i.e. the probabilities encoded by log weights.
pub(crate) fn normalized_from_logs(xs: &[f64]) -> Vec<f64> {
    let z = logsumexp(xs);
    assert!(z.is_finite(), "log weights carry no mass");
    xs.iter().map(|x| (x - z).exp()).collect()
}

/// t / (e^t - 1), continuously extended to 1 at t = 0.
fn bose_integrand(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        t / t.exp_m1()
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(
    f: impl Fn(f64) -> f64 + Copy,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// J(v) = integral of t/(e^t - 1) from 0 to v. Increasing, J(0) = 0,
/// J(v) -> pi^2/6. Accurate to ~1e-12 absolute.
pub fn bose_integral(v: f64) -> f64 {
    assert!(v >= 0.0 && v.is_finite(), "bose_integral domain: {v}");
    if v == 0.0 {
        return 0.0;
    }
    if v < 0.05 {
        // series of the antiderivative; remainder < v^7/2e5 here
        return v * (1.0 + v * (-0.25 + v * (1.0 / 36.0 - v * v / 3600.0)));
    }
    // integrand drops below 1e-20 past t = 50; the remaining tail is < 1e-19
    let b = v.min(50.0);
    let fa = bose_integrand(0.0);
    let fb = bose_integrand(b);
    let fm = bose_integrand(0.5 * b);
    let whole = simpson(0.0, b, fa, fm, fb);
    adaptive_simpson(bose_integrand, 0.0, b, fa, fm, fb, whole, 1e-13, 48)
}

/// Solve u^2 = v^2 / J(v) for the positive root v(u).
///
/// v(u) is increasing, v ~ u^2 as u -> 0 and v ~ (pi/sqrt(6)) u as u -> inf.
pub fn solve_v(u: f64) -> Result<f64, AnalysisError> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(AnalysisError::InvalidU { u });
    }
    let slope = PI / 6.0f64.sqrt();
    // J < pi^2/6 forces v < (pi/sqrt(6)) u; the lower end undershoots both
    // the small-u (v ~ u^2) and large-u (v ~ slope*u) branches.
    let mut hi = slope * u;
    let mut lo = 0.5 * (u * u).min(hi);
    let fval = |v: f64| v * v - u * u * bose_integral(v);
    let fder = |v: f64| 2.0 * v - u * u * bose_integrand(v);
    let mut flo = fval(lo);
    for _ in 0..200 {
        if flo < 0.0 {
            break;
        }
        lo *= 0.5;
        flo = fval(lo);
        if lo < f64::MIN_POSITIVE {
            return Ok(u * u); // degenerate underflow region
        }
    }
    let mut v = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = fval(v);
        if f < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let scale = (v * v).max(u * u * bose_integral(v)).max(f64::MIN_POSITIVE);
        if f.abs() <= 1e-13 * scale || (hi - lo) <= 1e-15 * hi {
            break;
        }
        let step = f / fder(v);
        let newton = v - step;
        v = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(v)
}

/// Exponent g(u) in the second-order count estimate; g(u) -> pi*sqrt(2/3)
/// as u -> inf, recovering the unrestricted growth rate.
pub fn szekeres_g(u: f64) -> Result<f64, AnalysisError> {
    let v = solve_v(u)?;
    // 1 - e^{-v} computed as -expm1(-v) to keep precision at small v
    Ok(2.0 * v / u - u * (-(-v).exp_m1()).ln())
}

/// d/du of [`szekeres_g`]; closed form -log(1 - e^{-v(u)}).
pub fn szekeres_g_prime(u: f64) -> Result<f64, AnalysisError> {
    let v = solve_v(u)?;
    Ok(-(-(-v).exp_m1()).ln())
}

/// Prefactor f(u) in the second-order count estimate.
pub fn szekeres_f(u: f64) -> Result<f64, AnalysisError> {
    let v = solve_v(u)?;
    let root = -(-v).exp_m1() - 0.5 * u * u * (-v).exp();
    debug_assert!(root > 0.0, "degenerate prefactor at u={u}");
    Ok(v / (2.0f64.sqrt() * 2.0 * PI * u) / root.sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct SzekeresEstimate {
    /// ln of the estimated count of partitions of n into at most k parts.
    pub log_value: f64,
    pub u: f64,
    pub v: f64,
    pub f_factor: f64,
    pub g_exponent: f64,
    /// True when k >= n^{1/6}, the regime where the estimate holds uniformly.
    pub uniform_regime: bool,
}

/// Second-order estimate ln[(f(u)/n) e^{sqrt(n) g(u)}] of the number of
/// partitions of n into at most k parts, with u = k/sqrt(n).
pub fn szekeres_log_estimate(n: u64, k: u64) -> Result<SzekeresEstimate, AnalysisError> {
    assert!(n >= 1 && k >= 1, "szekeres domain: n={n} k={k}");
    let nf = n as f64;
    let u = k as f64 / nf.sqrt();
    let v = solve_v(u)?;
    let f_factor = szekeres_f(u)?;
    let g_exponent = szekeres_g(u)?;
    Ok(SzekeresEstimate {
        log_value: f_factor.ln() - nf.ln() + nf.sqrt() * g_exponent,
        u,
        v,
        f_factor,
        g_exponent,
        uniform_regime: k as f64 >= nf.powf(1.0 / 6.0),
    })
}

/// The saddle exponent psi(t) = g(t)/t - lambda/t^2, maximized at
/// t0 = lambda / sqrt(J(lambda)).
pub fn psi(t: f64, lambda: f64) -> Result<f64, AnalysisError> {
    Ok(szekeres_g(t)? / t - lambda / (t * t))
}

/// Parameters of the Gaussian limit of the centered largest part under the
/// geometric-weight measure with ratio q.
#[derive(Debug, Clone, Copy)]
pub struct CltParams {
    pub q: f64,
    /// lambda = -ln q
    pub lambda: f64,
    /// J(lambda)
    pub j_lambda: f64,
    /// t0 = lambda / sqrt(J(lambda)); satisfies v(t0) = lambda
    pub t0: f64,
    /// gamma = J(lambda) / lambda^2 = 1 / t0^2; centering is gamma * m
    pub gamma: f64,
    /// limit variance, direct form (2/lambda^3) J - 1/(lambda (e^lambda - 1))
    pub sigma_sq: f64,
    /// psi''(t0) = -2 lambda (e^lambda - 1) / (t0^4 (e^lambda - 1 - t0^2/2))
    pub psi_dd_t0: f64,
}

impl CltParams {
    /// The same variance through the curvature route, 4 / (|psi''(t0)| t0^6).
    /// Agrees with `sigma_sq` to ~1e-14 relative; kept separate so the two
    /// derivations cross-check each other.
    pub fn sigma_sq_from_curvature(&self) -> f64 {
        4.0 / (self.psi_dd_t0.abs() * self.t0.powi(6))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }
}

pub fn clt_params(q: f64) -> Result<CltParams, AnalysisError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(AnalysisError::InvalidQ { q });
    }
    let lambda = -q.ln();
    let j_lambda = bose_integral(lambda);
    let t0 = lambda / j_lambda.sqrt();
    let gamma = j_lambda / (lambda * lambda);
    let em1 = lambda.exp_m1();
    let sigma_sq = 2.0 * j_lambda / lambda.powi(3) - 1.0 / (lambda * em1);
    let psi_dd_t0 = -2.0 * lambda * em1 / (t0.powi(4) * (em1 - 0.5 * t0 * t0));
    Ok(CltParams { q, lambda, j_lambda, t0, gamma, sigma_sq, psi_dd_t0 })
}
