//! Joint log-density evaluators over ℝ^{nd} for every estimator studied:
//! oracle Gaussian, Shtarkov-(v,τ), the heavy-tail escape component, the
//! robust mixture, and the uniform-prior Bayes mixture.
//!
//! Cumulative log-loss telescopes to the negative joint log-density, so
//! per-round conditionals are never materialized; everything is a function
//! of the batch summary (n, ȳ_n, ‖y_⊥‖²).

use rand::Rng;

use crate::glm::{GlmSummary, ThetaBox};
use crate::numeric::{log_q2, log_sum_exp2, LN_2PI};
use crate::quad::integrate_with_splits;
use crate::rng::replicate_rng;
use crate::{Error, Result};

/// v_n = 1 - 1/n + β/n².
pub fn v_schedule(n: usize, beta: f64) -> Result<f64> {
    let nf = n as f64;
    let v = 1.0 - 1.0 / nf + beta / (nf * nf);
    if v <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "v_schedule(n={n}, beta={beta}) = {v} <= 0"
        )));
    }
    Ok(v)
}

/// ln Z_{v,τ} = (d/2) ln(n/(2πv)) + ln ∫ exp(-α·max(d(z,Θ)-τ, 0)²) dz,
/// α = n/(2v).
///
/// Closed form for d = 1 and for τ = 0 (per-coordinate factorization);
/// adaptive cubature for 2 ≤ d ≤ 4 with τ > 0; Monte Carlo above d = 4.
/// `n` is a positive real so the normalizer can be probed off-grid.
pub fn shtarkov_log_normalizer(b: &ThetaBox, v: f64, tau: f64, n: f64) -> Result<f64> {
    check_normalizer_args(v, tau, n)?;
    let d = b.dim();
    let scale = (n / (2.0 * std::f64::consts::PI * v)).sqrt();
    if d == 1 {
        let len = b.lengths()[0];
        return Ok(((len + 2.0 * tau) * scale).ln_1p());
    }
    if tau == 0.0 {
        return Ok(b.lengths().iter().map(|len| (len * scale).ln_1p()).sum());
    }
    if d <= 4 {
        shtarkov_log_normalizer_quadrature(b, v, tau, n, 1e-9)
    } else {
        Ok(shtarkov_log_normalizer_mc(b, v, tau, n, 4_000_000, 0).0)
    }
}

fn check_normalizer_args(v: f64, tau: f64, n: f64) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::InvalidParameter(format!("v must be positive, got {v}")));
    }
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be nonnegative, got {tau}")));
    }
    if !(n >= 1.0) {
        return Err(Error::InvalidParameter(format!("n must be >= 1, got {n}")));
    }
    Ok(())
}

/// Cubature route for ln Z, exposed so tests can cross it against the
/// factorized closed form. The integration domain is Θ_{τ+R} with R chosen
/// so the Gaussian tail outside carries < 1e-12 of the integral; initial
/// splits sit on the kink manifolds of d(z,Θ).
pub fn shtarkov_log_normalizer_quadrature(
    b: &ThetaBox,
    v: f64,
    tau: f64,
    n: f64,
    rel_tol: f64,
) -> Result<f64> {
    check_normalizer_args(v, tau, n)?;
    let d = b.dim();
    let alpha = n / (2.0 * v);
    let r = (92.0 / alpha).sqrt(); // exp(-92) ~ 1e-40 tail density
    let lo: Vec<f64> = b.lo().iter().map(|&l| l - tau - r).collect();
    let hi: Vec<f64> = b.hi().iter().map(|&h| h + tau + r).collect();
    let splits: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            vec![
                b.lo()[i] - tau,
                b.lo()[i],
                b.hi()[i],
                b.hi()[i] + tau,
            ]
        })
        .collect();
    let bx = b.clone();
    let integrand = move |z: &[f64]| {
        let excess = (bx.distance(z) - tau).max(0.0);
        (-alpha * excess * excess).exp()
    };
    let q = integrate_with_splits(integrand, &lo, &hi, &splits, rel_tol, 0.0, 400_000)?;
    Ok(0.5 * d as f64 * (n / (2.0 * std::f64::consts::PI * v)).ln() + q.value.ln())
}

/// Monte-Carlo route for ln Z in high dimension; returns (ln Z, stderr of
/// ln Z via the delta method).
pub fn shtarkov_log_normalizer_mc(
    b: &ThetaBox,
    v: f64,
    tau: f64,
    n: f64,
    samples: u64,
    seed: u64,
) -> (f64, f64) {
    let d = b.dim();
    let alpha = n / (2.0 * v);
    let r = (92.0 / alpha).sqrt();
    let lo: Vec<f64> = b.lo().iter().map(|&l| l - tau - r).collect();
    let hi: Vec<f64> = b.hi().iter().map(|&h| h + tau + r).collect();
    let vol: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let mut rng = replicate_rng(seed, u64::MAX);
    let mut m = crate::numeric::Moments::new();
    let mut z = vec![0.0; d];
    for _ in 0..samples {
        for i in 0..d {
            z[i] = rng.gen_range(lo[i]..hi[i]);
        }
        let excess = (b.distance(&z) - tau).max(0.0);
        m.push((-alpha * excess * excess).exp());
    }
    let integral = m.mean() * vol;
    let se = m.stderr() * vol;
    let log_z = 0.5 * d as f64 * (n / (2.0 * std::f64::consts::PI * v)).ln() + integral.ln();
    (log_z, se / integral)
}

/// Shtarkov-(v, τ) distribution over batches of a fixed horizon, with the
/// normalizer cached at construction.
#[derive(Clone, Debug)]
pub struct ShtarkovParams {
    pub theta_box: ThetaBox,
    pub v: f64,
    pub tau: f64,
    pub n: usize,
    pub log_z: f64,
}

impl ShtarkovParams {
    pub fn new(theta_box: ThetaBox, v: f64, tau: f64, n: usize) -> Result<Self> {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::InvalidParameter(format!("v must be in (0,1], got {v}")));
        }
        let log_z = shtarkov_log_normalizer(&theta_box, v, tau, n as f64)?;
        Ok(Self { theta_box, v, tau, n, log_z })
    }
}

/// Robust mixture q = (1-λ)·p_S + λ·p_E.
#[derive(Clone, Debug)]
pub struct RobustParams {
    pub shtarkov: ShtarkovParams,
    pub lambda: f64,
    pub alpha: f64,
}

impl RobustParams {
    pub fn new(shtarkov: ShtarkovParams, lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParameter(format!("lambda must be in (0,1), got {lambda}")));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { shtarkov, lambda, alpha })
    }
}

/// ln p_θ(y^n) = -(nd/2)·ln(2π) - (‖y_⊥‖² + n‖ȳ_n - θ‖²)/2.
pub fn log_density_oracle(s: &GlmSummary, theta: &[f64]) -> f64 {
    assert_eq!(theta.len(), s.dim(), "dimension mismatch");
    let n = s.n as f64;
    let d = s.dim() as f64;
    let dist2: f64 = s.mean.iter().zip(theta).map(|(m, t)| (m - t) * (m - t)).sum();
    -0.5 * n * d * LN_2PI - 0.5 * (s.ssq_perp + n * dist2)
}

pub fn log_density_shtarkov(s: &GlmSummary, p: &ShtarkovParams) -> f64 {
    assert_eq!(s.n, p.n, "horizon mismatch");
    let n = s.n as f64;
    let d = s.dim() as f64;
    let c = p.theta_box.project_enlarged(p.tau, &s.mean);
    let dist2: f64 = s.mean.iter().zip(&c).map(|(m, t)| (m - t) * (m - t)).sum();
    -p.log_z - 0.5 * n * d * (LN_2PI + p.v.ln()) - (s.ssq_perp + n * dist2) / (2.0 * p.v)
}

/// ln p_E(y^n) for the Laplace-in-the-mean escape component.
pub fn log_density_escape(s: &GlmSummary, alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0);
    let n = s.n as f64;
    let d = s.dim() as f64;
    let l1: f64 = s.mean.iter().map(|m| m.abs()).sum();
    -0.5 * (n - 1.0) * d * LN_2PI - 0.5 * s.ssq_perp + d * (alpha / (2.0 * n.sqrt())).ln()
        - alpha * l1
}

/// Stable log of (1-λ)·p_S + λ·p_E; never -∞ when either branch is finite.
pub fn log_density_robust(s: &GlmSummary, p: &RobustParams) -> f64 {
    let ls = log_density_shtarkov(s, &p.shtarkov);
    let le = log_density_escape(s, p.alpha);
    log_sum_exp2((1.0 - p.lambda).ln() + ls, p.lambda.ln() + le)
}

/// Uniform-prior Bayes mixture over θ ∈ [-b, b]; d = 1 only.
pub fn log_density_jeffreys(s: &GlmSummary, b: f64) -> f64 {
    assert_eq!(s.dim(), 1, "Bayes mixture implemented for d = 1 only");
    assert!(b > 0.0);
    let n = s.n as f64;
    -(2.0 * b * n.sqrt()).ln() - 0.5 * (n - 1.0) * LN_2PI - 0.5 * s.ssq_perp
        + log_q2(s.mean[0], b, n)
}

/// Every predictor the lab knows how to score.
#[derive(Clone, Debug)]
pub enum Predictor {
    Oracle { theta: Vec<f64> },
    Shtarkov(ShtarkovParams),
    Escape { alpha: f64 },
    Robust(RobustParams),
    Jeffreys { b: f64 },
}

impl Predictor {
    pub fn log_density(&self, s: &GlmSummary) -> f64 {
        match self {
            Predictor::Oracle { theta } => log_density_oracle(s, theta),
            Predictor::Shtarkov(p) => log_density_shtarkov(s, p),
            Predictor::Escape { alpha } => log_density_escape(s, *alpha),
            Predictor::Robust(p) => log_density_robust(s, p),
            Predictor::Jeffreys { b } => log_density_jeffreys(s, *b),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Predictor::Oracle { .. } => "oracle",
            Predictor::Shtarkov(_) => "shtarkov",
            Predictor::Escape { .. } => "escape",
            Predictor::Robust(_) => "robust",
            Predictor::Jeffreys { .. } => "jeffreys",
        }
    }
}
