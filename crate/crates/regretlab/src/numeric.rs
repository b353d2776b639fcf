//! Stable log-domain primitives and streaming moment accumulation.

use std::f64::consts::SQRT_2;

/// ln(2π)
pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Standard normal CDF.
pub fn ndtr(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// ln Φ(x), accurate in the far left tail where Φ(x) underflows.
///
/// For x below the switch point the Mills-ratio asymptotic expansion
/// Φ(x) = φ(x)/(-x) · (1 - x⁻² + 3x⁻⁴ - ...) is used, truncated at the
/// smallest term.
pub fn log_ndtr(x: f64) -> f64 {
    if x > 6.0 {
        (-ndtr(-x)).ln_1p()
    } else if x >= -8.0 {
        ndtr(x).ln()
    } else {
        let z = x * x;
        let mut term = 1.0_f64;
        let mut series = 1.0_f64;
        let mut k = 0.0_f64;
        loop {
            k += 1.0;
            let next = term * (-(2.0 * k - 1.0) / z);
            if next.abs() >= term.abs() || k > 16.0 {
                break;
            }
            term = next;
            series += term;
            if term.abs() < 1e-17 * series {
                break;
            }
        }
        -0.5 * z - 0.5 * LN_2PI - (-x).ln() + series.ln()
    }
}

/// log(exp(a) + exp(b)), never spuriously -inf when one argument is finite.
pub fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// log(exp(a) - exp(b)) for a > b.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b);
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-((b - a).exp())).ln_1p()
}

/// ln q₂(y) = ln P[|y + G| < b] with G ~ N(0, 1/n).
///
/// Evaluates Φ(√n(b-y)) - Φ(-√n(b+y)) in whichever of the two log-domain
/// forms is stable, so the result stays finite and accurate even when q₂
/// underflows (the |y| ≫ b regime needs ln q₂ ≈ -Ω(n)).
pub fn log_q2(y: f64, b: f64, n: f64) -> f64 {
    // symmetric in y; |y| keeps both tail arguments on the stable side
    let y = y.abs();
    let s = n.sqrt();
    let upper_tail = log_ndtr(-s * (b - y));
    let lower_tail = log_ndtr(-s * (b + y));
    let t = upper_tail.exp() + lower_tail.exp();
    if t < 0.5 {
        (-t).ln_1p()
    } else {
        // b > 0 ensures √n(b-y) > -√n(b+y), so the difference is positive
        log_diff_exp(log_ndtr(s * (b - y)), lower_tail)
    }
}

/// Single-pass mean/variance accumulator (Welford), mergeable in a fixed
/// order so parallel reductions stay bit-reproducible.
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combine. `self` must be the left (earlier) block.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let delta = other.mean - self.mean;
        let total = n1 + n2;
        self.mean += delta * n2 / total;
        self.m2 += other.m2 + delta * delta * n1 * n2 / total;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation.
    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count as f64 - 1.0)).sqrt()
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        self.std_dev() / (self.count as f64).sqrt()
    }
}
