//! Closed-form and semi-analytic reference quantities: the information
//! constant I_n, the interval minimax constant Γ_n, the dyadic-brick
//! capacity series, the Bayes-vs-Shtarkov KL gap, and the max-entropy
//! robustness bound. All values in nats.

use crate::numeric::{log_q2, LN_2PI};
use crate::quad::integrate_1d_with_splits;
use crate::{Error, Result};

/// I_n = (d/2)·ln(n/(2πe)) + ln Leb(Θ).
pub fn i_n(d: usize, n: f64, leb_theta: f64) -> f64 {
    debug_assert!(n >= 1.0 && leb_theta > 0.0);
    0.5 * d as f64 * (n.ln() - LN_2PI - 1.0) + leb_theta.ln()
}

/// Γ_n([0,a]) = ln(1 + a·√(n/2π)).
pub fn gamma_n_interval(a: f64, n: f64) -> f64 {
    debug_assert!(a > 0.0 && n >= 1.0);
    (a * (n / (2.0 * std::f64::consts::PI)).sqrt()).ln_1p()
}

/// Upper bound on the capacity of the dyadic brick ∏_j [0, 2^{-j}]:
/// Σ_{j≥0} Γ_n([0, 2^{-j}]), truncated once a term drops below
/// `tail_tol` and padded with a geometric bound on the discarded tail so
/// the result remains a true upper bound within `tail_tol`.
pub fn hilbert_brick_upper(n: f64, tail_tol: f64) -> f64 {
    debug_assert!(n >= 1.0 && tail_tol > 0.0);
    let s = (n / (2.0 * std::f64::consts::PI)).sqrt();
    let mut total = 0.0;
    let mut j = 0u32;
    loop {
        let x = 2f64.powi(-(j as i32)) * s;
        let term = x.ln_1p();
        if term < 0.25 * tail_tol {
            // ln(1+x) ≤ x and the x's halve, so the tail is ≤ 2x < tail_tol
            total += 2.0 * x;
            return total;
        }
        total += term;
        j += 1;
    }
}

/// D(P_J ‖ P_S) for d = 1, Θ = [-b, b], v = 1, τ = 0: the log-ratio
/// collapses to a function of ȳ_n alone,
///   r(ȳ) = ln Z + ½ln(2π) − ln(2b√n) + ln q₂(ȳ) + n·max(|ȳ|−b,0)²/2,
/// and ȳ_n under the Bayes mixture has density q₂(ȳ)/(2b). Integrated by
/// adaptive quadrature with splits at ±b and a tail radius past which the
/// discarded mass is below `quad_tol`.
pub fn jeffreys_shtarkov_kl(n: f64, b: f64, quad_tol: f64) -> Result<f64> {
    if !(n >= 2.0 && b > 0.0 && quad_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "jeffreys_shtarkov_kl(n={n}, b={b}, quad_tol={quad_tol})"
        )));
    }
    let sqrt_n = n.sqrt();
    let log_z = (2.0 * b * (n / (2.0 * std::f64::consts::PI)).sqrt()).ln_1p();
    // past |ȳ| = b + R the marginal mass is ≤ Φ(-√n R); pick R so it is
    // far below quad_tol (the integrand decays like a squared Gaussian)
    let r_tail = ((2.0 * (1.0 / quad_tol).ln()).sqrt() + 6.0) / sqrt_n;
    let integrand = move |y: f64| {
        let lq2 = log_q2(y, b, n);
        if lq2 == f64::NEG_INFINITY {
            return 0.0;
        }
        let excess = (y.abs() - b).max(0.0);
        let log_ratio =
            log_z + 0.5 * LN_2PI - (2.0 * b * sqrt_n).ln() + lq2 + 0.5 * n * excess * excess;
        lq2.exp() / (2.0 * b) * log_ratio
    };
    let q = integrate_1d_with_splits(
        integrand,
        -b - r_tail,
        b + r_tail,
        &[-b, 0.0, b],
        0.0,
        quad_tol,
        200_000,
    )?;
    Ok(q.value)
}

/// Robustness bound for the entropy of a box-mean perturbed by noise of
/// variance ε:
///   ln(2(b+τ)/(1−λ)) + p̄·(ln(2/(λα)) + αb) + αε/τ,  p̄ = min(1, ε/τ²).
pub fn entropy_robustness_bound(b: f64, eps: f64, tau: f64, lambda: f64, alpha: f64) -> f64 {
    debug_assert!(b > 0.0 && eps > 0.0 && tau > 0.0 && alpha > 0.0);
    debug_assert!(lambda > 0.0 && lambda < 1.0);
    let p_bar = (eps / (tau * tau)).min(1.0);
    (2.0 * (b + tau) / (1.0 - lambda)).ln()
        + p_bar * ((2.0 / (lambda * alpha)).ln() + alpha * b)
        + alpha * eps / tau
}

/// The bound above on the published schedule α = 1, λ = τ = ε^{1/3}.
pub fn entropy_robustness_bound_schedule(b: f64, eps: f64) -> f64 {
    let t = eps.cbrt();
    entropy_robustness_bound(b, eps, t, t, 1.0)
}

/// Carrier for "value vs asymptote" tables.
#[derive(Clone, Debug)]
pub struct AsymptoticReport {
    pub n_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub reference: Vec<f64>,
    pub gaps: Vec<f64>,
}

impl AsymptoticReport {
    pub fn new(n_grid: Vec<f64>, values: Vec<f64>, reference: Vec<f64>) -> Result<Self> {
        if n_grid.len() != values.len() || n_grid.len() != reference.len() {
            return Err(Error::InvalidParameter("report arrays must have equal length".into()));
        }
        if n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("n grid must be strictly increasing".into()));
        }
        let gaps = values.iter().zip(&reference).map(|(v, r)| v - r).collect();
        Ok(Self { n_grid, values, reference, gaps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::{GeneratorSpec, ThetaBox};
    use crate::numeric::Moments;
    use crate::predictors::{
        log_density_jeffreys, log_density_shtarkov, shtarkov_log_normalizer, ShtarkovParams,
    };
    use crate::rng::replicate_rng;
    use rand::Rng;
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    #[test]
    fn i_n_examples() {
        assert!(i_n(1, TWO_PI * std::f64::consts::E, 1.0).abs() < 1e-14);
        assert!((i_n(2, TWO_PI * std::f64::consts::E, std::f64::consts::E) - 1.0).abs() < 1e-14);
        assert!((i_n(1, 100.0, 1.0) - 0.883646559789373).abs() < 1e-13);
    }

    #[test]
    fn gamma_n_examples() {
        assert!((gamma_n_interval(1.0, TWO_PI) - 2f64.ln()).abs() < 1e-14);
        assert!((gamma_n_interval(2.0, TWO_PI) - 3f64.ln()).abs() < 1e-14);
        assert!(gamma_n_interval(1e-12, 100.0) < 1e-11);
    }

    #[test]
    fn gamma_n_is_the_interval_log_normalizer() {
        for &(a, n) in &[(1.0, 10.0), (0.3, 1000.0), (2.5, 7.0)] {
            let b = ThetaBox::interval(0.0, a).unwrap();
            let z = shtarkov_log_normalizer(&b, 1.0, 0.0, n).unwrap();
            assert!((z - gamma_n_interval(a, n)).abs() < 1e-12);
        }
    }

    #[test]
    fn asymptotic_gap_to_i_n() {
        // Γ_n([0,1]) - I_n - 1/2 → 0
        let mut last = f64::INFINITY;
        for &n in &[1e3, 1e4, 1e5] {
            let gap = (gamma_n_interval(1.0, n) - i_n(1, n, 1.0) - 0.5).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn hilbert_brick_series_value() {
        let v = hilbert_brick_upper(TWO_PI, 1e-10);
        assert!((v - 1.5620238332185).abs() < 1e-9, "{v}");
        assert!(v >= 1.5620238332185 - 1e-12, "must stay an upper bound");
    }

    #[test]
    fn hilbert_brick_growth_and_log2_scaling() {
        assert!(hilbert_brick_upper(1e6, 1e-10) > hilbert_brick_upper(1e3, 1e-10));
        let ratios: Vec<f64> = [1e3, 1e4, 1e5, 1e6]
            .iter()
            .map(|&n: &f64| hilbert_brick_upper(n, 1e-10) / n.ln().powi(2))
            .collect();
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 1.10, "ratios {ratios:?}");
    }

    #[test]
    fn kl_gap_nonnegative_and_root_n_bounded() {
        let mut prev = f64::INFINITY;
        for &n in &[1e2, 1e3, 1e4] {
            let v = jeffreys_shtarkov_kl(n, 1.0, 1e-10).unwrap();
            assert!(v >= 0.0);
            assert!(n.sqrt() * v < 1.0, "sqrt(n)*KL = {}", n.sqrt() * v);
            assert!(v < prev);
            prev = v;
        }
        let v = jeffreys_shtarkov_kl(100.0, 1.0, 1e-10).unwrap();
        assert!((v - 0.04105592971339276).abs() < 1e-10, "{v}");
    }

    #[test]
    fn kl_gap_matches_joint_simulation() {
        // oracle: θ ~ U[-1,1], Y^n ~ N(θ,1)^n, average ln(p_J/p_S)
        let (n, b) = (100usize, 1.0);
        let sh = ShtarkovParams::new(ThetaBox::interval(-b, b).unwrap(), 1.0, 0.0, n).unwrap();
        let mut rng = replicate_rng(20260826, 0);
        let mut m = Moments::new();
        for _ in 0..40_000 {
            let theta = rng.gen_range(-b..b);
            let gen = GeneratorSpec::gaussian(vec![theta], 1.0).unwrap();
            let s = gen.sample_summary(n, &mut rng);
            m.push(log_density_jeffreys(&s, b) - log_density_shtarkov(&s, &sh));
        }
        let quad = jeffreys_shtarkov_kl(n as f64, b, 1e-10).unwrap();
        assert!(
            (m.mean() - quad).abs() < 3.0 * m.stderr(),
            "mc {} ± {} vs quad {}",
            m.mean(),
            m.stderr(),
            quad
        );
    }

    #[test]
    fn entropy_bound_schedule_limits() {
        // ε → 0 under the schedule: bound → ln(2b)
        let mut prev = f64::INFINITY;
        for &eps in &[1e-2, 1e-4, 1e-6, 1e-8] {
            let v = entropy_robustness_bound_schedule(1.0, eps);
            assert!(v < prev, "not monotone in eps at {eps}");
            prev = v;
        }
        assert!((entropy_robustness_bound_schedule(1.0, 1e-12) - 2f64.ln()).abs() < 2e-3);
        let corr = entropy_robustness_bound_schedule(1.0, 1e-6) - 2f64.ln();
        assert!(corr > 0.0 && corr < 0.15, "correction {corr}");
    }

    #[test]
    fn entropy_bound_dominates_smoothed_uniform_entropy() {
        // h(M+Z), M ~ U[-b,b], Z ~ N(0,ε): density
        // f(x) = (Φ((x+b)/σ) - Φ((x-b)/σ)) / (2b)
        let b = 1.0;
        for &eps in &[1e-4f64, 1e-6] {
            let sigma: f64 = eps.sqrt();
            let f = move |x: f64| {
                (crate::numeric::ndtr((x + b) / sigma) - crate::numeric::ndtr((x - b) / sigma))
                    / (2.0 * b)
            };
            let h = integrate_1d_with_splits(
                move |x| {
                    let fx = f(x);
                    if fx <= 0.0 {
                        0.0
                    } else {
                        -fx * fx.ln()
                    }
                },
                -b - 10.0 * sigma,
                b + 10.0 * sigma,
                &[-b, b],
                1e-9,
                0.0,
                200_000,
            )
            .unwrap()
            .value;
            let bound = entropy_robustness_bound_schedule(b, eps);
            assert!(h <= bound, "eps={eps}: h={h} bound={bound}");
            // and the entropy itself hugs ln(2b) from above
            assert!(h >= 2f64.ln() - 1e-9);
        }
    }

    #[test]
    fn report_invariants() {
        let r = AsymptoticReport::new(vec![1.0, 2.0], vec![3.0, 4.0], vec![2.5, 4.5]).unwrap();
        assert_eq!(r.gaps, vec![0.5, -0.5]);
        assert!(AsymptoticReport::new(vec![2.0, 1.0], vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(AsymptoticReport::new(vec![1.0], vec![0.0; 2], vec![0.0]).is_err());
    }
}
