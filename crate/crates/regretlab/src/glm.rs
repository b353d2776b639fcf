//! Gaussian location model geometry: parameter boxes, τ-enlargement
//! projections, the orthogonal sample decomposition, and data generators.

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::{Error, Result};

/// Compact axis-aligned parameter domain Θ ⊂ ℝ^d.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ThetaBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter(
                "box bounds must be non-empty and of equal dimension".into(),
            ));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l < h) || !l.is_finite() || !h.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "box requires lo < hi with finite bounds, got [{l}, {h}]"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// 1-D interval.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    /// Symmetric interval [-b, b].
    pub fn symmetric(b: f64) -> Result<Self> {
        Self::interval(-b, b)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Leb(Θ_τ): Steiner formula for the Minkowski sum of the box with a
    /// closed Euclidean ball of radius τ.
    pub fn enlarged_volume(&self, tau: f64) -> f64 {
        assert!(tau >= 0.0);
        let d = self.dim();
        let lengths = self.lengths();
        // elementary symmetric polynomials e_0..e_d of the side lengths
        let mut e = vec![0.0; d + 1];
        e[0] = 1.0;
        for &len in &lengths {
            for j in (1..=d).rev() {
                e[j] += len * e[j - 1];
            }
        }
        // unit-ball volumes κ_k via κ_k = κ_{k-2}·2π/k
        let mut kappa = vec![0.0; d + 1];
        kappa[0] = 1.0;
        if d >= 1 {
            kappa[1] = 2.0;
        }
        for k in 2..=d {
            kappa[k] = kappa[k - 2] * 2.0 * std::f64::consts::PI / k as f64;
        }
        (0..=d).map(|k| e[d - k] * kappa[k] * tau.powi(k as i32)).sum()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.distance(y) == 0.0
    }

    /// Euclidean distance d(y, Θ), coordinatewise clamp distances combined.
    pub fn distance(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.dim(), "dimension mismatch");
        let mut ssq = 0.0;
        for i in 0..y.len() {
            let c = (self.lo[i] - y[i]).max(y[i] - self.hi[i]).max(0.0);
            ssq += c * c;
        }
        ssq.sqrt()
    }

    /// Euclidean projection onto the box (coordinatewise clamp).
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.dim(), "dimension mismatch");
        y.iter()
            .enumerate()
            .map(|(i, &v)| v.clamp(self.lo[i], self.hi[i]))
            .collect()
    }

    /// c_τ(y): projection onto the τ-enlarged set Θ_τ. Unique because the
    /// box is convex. Guarantees ‖y - c_τ(y)‖ = max(d(y,Θ) - τ, 0).
    pub fn project_enlarged(&self, tau: f64, y: &[f64]) -> Vec<f64> {
        assert!(tau >= 0.0, "tau must be nonnegative");
        let dist = self.distance(y);
        if dist <= tau {
            return y.to_vec();
        }
        let p = self.project(y);
        let scale = (dist - tau) / dist;
        y.iter().zip(&p).map(|(&yi, &pi)| yi + scale * (pi - yi)).collect()
    }
}

pub fn distance_to_box(b: &ThetaBox, y: &[f64]) -> f64 {
    b.distance(y)
}

pub fn project_enlarged(b: &ThetaBox, tau: f64, y: &[f64]) -> Vec<f64> {
    b.project_enlarged(tau, y)
}

/// Sufficient statistics of a batch under the orthogonal decomposition
/// y^n = y_⊥ + ȳ_n ⊗ 1.
#[derive(Clone, Debug)]
pub struct GlmSummary {
    pub n: usize,
    pub mean: Vec<f64>,
    /// ‖y_⊥‖² = Σ_t ‖y_t - ȳ_n‖²
    pub ssq_perp: f64,
}

impl GlmSummary {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// V̂ = ssq_perp / n.
    pub fn vhat(&self) -> f64 {
        self.ssq_perp / self.n as f64
    }
}

pub fn summarize(samples: &[Vec<f64>]) -> GlmSummary {
    assert!(!samples.is_empty(), "empty sample");
    let n = samples.len();
    let d = samples[0].len();
    let mut mean = vec![0.0; d];
    for s in samples {
        assert_eq!(s.len(), d, "dimension mismatch");
        for i in 0..d {
            mean[i] += s[i];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut ssq = 0.0;
    for s in samples {
        for i in 0..d {
            let dlt = s[i] - mean[i];
            ssq += dlt * dlt;
        }
    }
    GlmSummary { n, mean, ssq_perp: ssq }
}

#[derive(Clone, Debug)]
pub enum GeneratorKind {
    Gaussian { theta: Vec<f64>, sigma2: f64 },
    UniformBox(ThetaBox),
    PointMass(Vec<f64>),
    /// Three-point law on {0, ±2bn}; the `n` here is the adversary's own
    /// tuning parameter, decoupled from the simulation horizon.
    HeavyTailThreePoint { b: f64, n: u64 },
    Laplace { theta: Vec<f64>, scale: f64 },
}

/// A data-generating law P with known mean μ and total variance E‖Y-μ‖².
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    kind: GeneratorKind,
    mean: Vec<f64>,
    total_variance: f64,
}

impl GeneratorSpec {
    pub fn gaussian(theta: Vec<f64>, sigma2: f64) -> Result<Self> {
        if sigma2 < 0.0 {
            return Err(Error::InvalidGenerator("gaussian needs sigma2 >= 0".into()));
        }
        let d = theta.len() as f64;
        Ok(Self { mean: theta.clone(), total_variance: sigma2 * d, kind: GeneratorKind::Gaussian { theta, sigma2 } })
    }

    pub fn uniform_box(b: ThetaBox) -> Self {
        let mean: Vec<f64> = b.lo().iter().zip(b.hi()).map(|(l, h)| 0.5 * (l + h)).collect();
        let total_variance = b.lengths().iter().map(|len| len * len / 12.0).sum();
        Self { mean, total_variance, kind: GeneratorKind::UniformBox(b) }
    }

    pub fn point_mass(c: Vec<f64>) -> Self {
        Self { mean: c.clone(), total_variance: 0.0, kind: GeneratorKind::PointMass(c) }
    }

    /// Eq. values: P[Y=0] = 1 - 1/(4b²n²), P[Y=±2bn] = 1/(8b²n²) each.
    /// Mean 0, variance exactly 1.
    pub fn heavy_tail_three_point(b: f64, n: u64) -> Result<Self> {
        let scale = 4.0 * b * b * (n as f64) * (n as f64);
        if !(scale >= 1.0) {
            return Err(Error::InvalidGenerator(format!(
                "heavy-tail three-point needs 4b²n² >= 1, got {scale}"
            )));
        }
        Ok(Self { mean: vec![0.0], total_variance: 1.0, kind: GeneratorKind::HeavyTailThreePoint { b, n } })
    }

    pub fn laplace(theta: Vec<f64>, scale: f64) -> Result<Self> {
        if scale <= 0.0 {
            return Err(Error::InvalidGenerator("laplace needs scale > 0".into()));
        }
        let d = theta.len() as f64;
        Ok(Self { mean: theta.clone(), total_variance: 2.0 * scale * scale * d, kind: GeneratorKind::Laplace { theta, scale } })
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GeneratorKind::Gaussian { .. } => "gaussian".into(),
            GeneratorKind::UniformBox(_) => "uniform-box".into(),
            GeneratorKind::PointMass(_) => "point-mass".into(),
            GeneratorKind::HeavyTailThreePoint { .. } => "heavy-tail".into(),
            GeneratorKind::Laplace { .. } => "laplace".into(),
        }
    }

    /// Draw one point into `buf`.
    pub fn sample_into<R: Rng>(&self, buf: &mut [f64], rng: &mut R) {
        debug_assert_eq!(buf.len(), self.dim());
        match &self.kind {
            GeneratorKind::Gaussian { theta, sigma2 } => {
                let sigma = sigma2.sqrt();
                for (i, b) in buf.iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(rng);
                    *b = theta[i] + sigma * z;
                }
            }
            GeneratorKind::UniformBox(bx) => {
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = rng.gen_range(bx.lo()[i]..bx.hi()[i]);
                }
            }
            GeneratorKind::PointMass(c) => buf.copy_from_slice(c),
            GeneratorKind::HeavyTailThreePoint { b, n } => {
                let nf = *n as f64;
                let p = 1.0 / (8.0 * b * b * nf * nf);
                let u: f64 = rng.gen();
                buf[0] = if u < p {
                    2.0 * b * nf
                } else if u < 2.0 * p {
                    -2.0 * b * nf
                } else {
                    0.0
                };
            }
            GeneratorKind::Laplace { theta, scale } => {
                for (i, b) in buf.iter_mut().enumerate() {
                    let u: f64 = rng.gen::<f64>() - 0.5;
                    *b = theta[i] - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln();
                }
            }
        }
    }

    /// n independent draws.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        assert!(n >= 1, "need at least one draw");
        let d = self.dim();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut p = vec![0.0; d];
            self.sample_into(&mut p, rng);
            out.push(p);
        }
        out
    }

    /// Streaming summary of n draws without materializing the batch.
    pub fn sample_summary<R: Rng>(&self, n: usize, rng: &mut R) -> GlmSummary {
        assert!(n >= 1, "need at least one draw");
        let d = self.dim();
        let mut buf = vec![0.0; d];
        let mut mean = vec![0.0; d];
        let mut m2 = vec![0.0; d];
        for t in 0..n {
            self.sample_into(&mut buf, rng);
            let count = (t + 1) as f64;
            for i in 0..d {
                let delta = buf[i] - mean[i];
                mean[i] += delta / count;
                m2[i] += delta * (buf[i] - mean[i]);
            }
        }
        GlmSummary { n, mean, ssq_perp: m2.iter().sum() }
    }

    /// Draw of Ȳ_n alone, using the exact law of the batch mean where one
    /// is available and falling back to n draws otherwise.
    pub fn sample_mean<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        assert!(n >= 1);
        match &self.kind {
            GeneratorKind::Gaussian { theta, sigma2 } => {
                let s = (sigma2 / n as f64).sqrt();
                theta
                    .iter()
                    .map(|&t| {
                        let z: f64 = StandardNormal.sample(rng);
                        t + s * z
                    })
                    .collect()
            }
            GeneratorKind::PointMass(c) => c.clone(),
            GeneratorKind::HeavyTailThreePoint { b, n: gen_n } => {
                let nf = *gen_n as f64;
                let p = 1.0 / (8.0 * b * b * nf * nf);
                let plus = Binomial::new(n as u64, p).expect("valid p").sample(rng);
                let rest = n as u64 - plus;
                let minus = if rest > 0 {
                    Binomial::new(rest, p / (1.0 - p)).expect("valid p").sample(rng)
                } else {
                    0
                };
                vec![2.0 * b * nf * (plus as f64 - minus as f64) / n as f64]
            }
            _ => self.sample_summary(n, rng).mean,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;
    use crate::numeric::Moments;

    #[test]
    fn distance_examples() {
        let b1 = ThetaBox::interval(0.0, 1.0).unwrap();
        assert_eq!(b1.distance(&[0.5]), 0.0);
        assert!((b1.distance(&[-0.3]) - 0.3).abs() < 1e-15);
        let b2 = ThetaBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!((b2.distance(&[2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn distance_matches_grid_oracle_2d() {
        // brute-force argmin over a fine grid of the box
        let b2 = ThetaBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let y = [2.0, 0.3];
        let mut best = f64::INFINITY;
        let m = 400;
        for i in 0..=m {
            for j in 0..=m {
                let (px, py) = (i as f64 / m as f64, j as f64 / m as f64);
                let d = ((y[0] - px).powi(2) + (y[1] - py).powi(2)).sqrt();
                best = best.min(d);
            }
        }
        assert!((b2.distance(&y) - best).abs() < 1e-5);
    }

    #[test]
    fn projection_examples() {
        let b1 = ThetaBox::interval(0.0, 1.0).unwrap();
        assert_eq!(b1.project_enlarged(0.1, &[0.5]), vec![0.5]);
        assert!((b1.project_enlarged(0.1, &[2.0])[0] - 1.1).abs() < 1e-15);

        let b2 = ThetaBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let c = b2.project_enlarged(1.0, &[2.0, 2.0]);
        let expect = 1.0 + 1.0 / 2f64.sqrt();
        assert!((c[0] - expect).abs() < 1e-12 && (c[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn summarize_examples() {
        let s = summarize(&[vec![3.0], vec![3.0], vec![3.0]]);
        assert_eq!(s.mean, vec![3.0]);
        assert_eq!(s.ssq_perp, 0.0);
        assert_eq!(s.vhat(), 0.0);

        let s = summarize(&[vec![0.0], vec![2.0]]);
        assert_eq!(s.mean, vec![1.0]);
        assert!((s.ssq_perp - 2.0).abs() < 1e-15);
        assert!((s.vhat() - 1.0).abs() < 1e-15);

        let s = summarize(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 3.0]]);
        assert_eq!(s.mean, vec![1.0, 1.0]);
        assert!((s.ssq_perp - 8.0).abs() < 1e-12);
        assert!((s.vhat() - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn enlarged_volume_1d_2d() {
        let b1 = ThetaBox::interval(0.0, 1.0).unwrap();
        assert!((b1.enlarged_volume(0.1) - 1.2).abs() < 1e-15);
        let b2 = ThetaBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let tau = 0.3;
        let expect = 2.0 + 2.0 * tau * 3.0 + std::f64::consts::PI * tau * tau;
        assert!((b2.enlarged_volume(tau) - expect).abs() < 1e-12);
    }

    #[test]
    fn heavy_tail_probabilities() {
        let g = GeneratorSpec::heavy_tail_three_point(1.0, 10).unwrap();
        assert_eq!(g.mean(), &[0.0]);
        assert_eq!(g.total_variance(), 1.0);
        // P[Y=0] = 1 - 1/400 = 0.9975
        let mut rng = replicate_rng(11, 0);
        let reps = 400_000;
        let mut zeros = 0u64;
        let mut buf = [0.0];
        for _ in 0..reps {
            g.sample_into(&mut buf, &mut rng);
            if buf[0] == 0.0 {
                zeros += 1;
            }
        }
        let phat = zeros as f64 / reps as f64;
        let se = (0.9975 * 0.0025 / reps as f64).sqrt();
        assert!((phat - 0.9975).abs() < 5.0 * se, "phat={phat}");
        // invalid parameters rejected
        assert!(GeneratorSpec::heavy_tail_three_point(0.1, 1).is_err());
    }

    #[test]
    fn point_mass_sample() {
        let g = GeneratorSpec::point_mass(vec![2.5]);
        let mut rng = replicate_rng(0, 0);
        let s = g.sample(3, &mut rng);
        assert_eq!(s, vec![vec![2.5], vec![2.5], vec![2.5]]);
    }

    #[test]
    fn gaussian_moments_mc() {
        let g = GeneratorSpec::gaussian(vec![0.0], 1.0).unwrap();
        let mut rng = replicate_rng(3, 0);
        let mut m = Moments::new();
        let mut buf = [0.0];
        for _ in 0..1_000_000 {
            g.sample_into(&mut buf, &mut rng);
            m.push(buf[0]);
        }
        assert!(m.mean().abs() < 5.0 * m.stderr());
        assert!(m.mean().abs() < 5e-3);
    }

    #[test]
    fn vhat_expectation_matches_identity() {
        // E[V̂] = (n-1)/n · σ²d for gaussian(θ, σ²I_d)
        let g = GeneratorSpec::gaussian(vec![0.3, -0.2], 0.7).unwrap();
        let n = 20;
        let mut m = Moments::new();
        for rep in 0..4000 {
            let mut rng = replicate_rng(5, rep);
            m.push(g.sample_summary(n, &mut rng).vhat());
        }
        let expect = (n as f64 - 1.0) / n as f64 * 0.7 * 2.0;
        assert!((m.mean() - expect).abs() < 5.0 * m.stderr(), "{} vs {}", m.mean(), expect);
    }

    #[test]
    fn heavy_tail_empirical_moments() {
        let g = GeneratorSpec::heavy_tail_three_point(1.0, 5).unwrap();
        let mut rng = replicate_rng(9, 0);
        let mut m1 = Moments::new();
        let mut m2 = Moments::new();
        let mut buf = [0.0];
        for _ in 0..2_000_000 {
            g.sample_into(&mut buf, &mut rng);
            m1.push(buf[0]);
            m2.push(buf[0] * buf[0]);
        }
        assert!(m1.mean().abs() < 5.0 * m1.stderr(), "mean {}", m1.mean());
        assert!((m2.mean() - 1.0).abs() < 5.0 * m2.stderr(), "E Y² {}", m2.mean());
    }

    #[test]
    fn sample_mean_shortcut_unbiased() {
        let g = GeneratorSpec::heavy_tail_three_point(1.0, 50).unwrap();
        let n = 50;
        let mut m = Moments::new();
        for rep in 0..200_000 {
            let mut rng = replicate_rng(21, rep);
            m.push(g.sample_mean(n, &mut rng)[0]);
        }
        // E[Ȳ] = 0, Var[Ȳ] = 1/n
        assert!(m.mean().abs() < 5.0 * m.stderr());
        let var = m.std_dev() * m.std_dev();
        assert!((var - 1.0 / n as f64).abs() < 0.2 / n as f64, "var {var}");
    }
}
