//! Finite-alphabet capacity machinery: plain channel capacity over a
//! finite class, the cost-penalized variant F(Θ,Φ) solved by a
//! multiplicative-update ascent with a duality-gap stopping rule, saddle
//! certificates for the optimizer, and the sandwich bound relating
//! F(Θ,Φ) to the capacities of Θ and of the enlarged class Θ_ε.

use serde::Deserialize;

use crate::{Error, Result};

/// KL divergence Σ p_i ln(p_i/q_i) with the extended conventions
/// 0·ln(0/q) = 0 and p > 0, q = 0 ⇒ +∞.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut s = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        s += pi * (pi / qi).ln();
    }
    s
}

/// min over the (finite) class of KL(p ‖ ·); +∞ when every support fails.
pub fn min_divergence_to_class(p: &[f64], theta_pmfs: &[Vec<f64>]) -> f64 {
    assert!(!theta_pmfs.is_empty(), "class must be non-empty");
    theta_pmfs
        .iter()
        .map(|t| kl(p, t))
        .fold(f64::INFINITY, f64::min)
}

/// Binary entropy in nats.
pub fn binary_entropy(x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.ln() };
    term(x) + term(1.0 - x)
}

fn check_pmf(p: &[f64], m: usize, label: &str, idx: usize) -> Result<()> {
    if p.len() != m {
        return Err(Error::InvalidPmf(format!(
            "{label}[{idx}] has length {} but alphabet size is {m}",
            p.len()
        )));
    }
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidPmf(format!("{label}[{idx}] has a negative or non-finite entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPmf(format!("{label}[{idx}] sums to {s}, not 1")));
    }
    Ok(())
}

#[derive(Deserialize)]
struct InstanceFile {
    alphabet_size: usize,
    theta: Vec<Vec<f64>>,
    phi: Vec<Vec<f64>>,
}

/// A finite reference class Θ, a finite environment class Φ over the same
/// alphabet, and the cached per-Φ-element costs c_k = min_θ KL(P_k‖P_θ).
#[derive(Clone, Debug)]
pub struct DiscreteInstance {
    pub alphabet_size: usize,
    pub theta_pmfs: Vec<Vec<f64>>,
    pub phi_pmfs: Vec<Vec<f64>>,
    pub costs: Vec<f64>,
}

impl DiscreteInstance {
    pub fn new(
        alphabet_size: usize,
        theta_pmfs: Vec<Vec<f64>>,
        phi_pmfs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if theta_pmfs.is_empty() {
            return Err(Error::EmptyClass("theta class is empty".into()));
        }
        if phi_pmfs.is_empty() {
            return Err(Error::EmptyClass("phi class is empty".into()));
        }
        for (i, p) in theta_pmfs.iter().enumerate() {
            check_pmf(p, alphabet_size, "theta", i)?;
        }
        for (i, p) in phi_pmfs.iter().enumerate() {
            check_pmf(p, alphabet_size, "phi", i)?;
        }
        let costs: Vec<f64> = phi_pmfs
            .iter()
            .map(|p| min_divergence_to_class(p, &theta_pmfs))
            .collect();
        if let Some(k) = costs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidPmf(format!(
                "phi[{k}] has infinite divergence to the theta class"
            )));
        }
        Ok(Self { alphabet_size, theta_pmfs, phi_pmfs, costs })
    }

    /// Load from a JSON document with fields `alphabet_size`, `theta`,
    /// `phi`. Costs are always recomputed, never read from the file.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(f.alphabet_size, f.theta, f.phi)
    }

    /// Sub-instance keeping only Φ elements with cost ≤ ε; Θ unchanged.
    pub fn enlarged_class(&self, epsilon: f64) -> Result<Self> {
        assert!(epsilon >= 0.0);
        let keep: Vec<Vec<f64>> = self
            .phi_pmfs
            .iter()
            .zip(&self.costs)
            .filter(|(_, &c)| c <= epsilon)
            .map(|(p, _)| p.clone())
            .collect();
        if keep.is_empty() {
            return Err(Error::EmptyClass(format!(
                "no phi element within divergence {epsilon} of theta"
            )));
        }
        Self::new(self.alphabet_size, self.theta_pmfs.clone(), keep)
    }

    pub fn theta_subset_of_phi(&self) -> bool {
        self.theta_pmfs.iter().all(|t| {
            self.phi_pmfs
                .iter()
                .any(|p| p.iter().zip(t).all(|(a, b)| (a - b).abs() <= 1e-12))
        })
    }
}

/// Output of the capacity solver: the optimal value, the maximizing prior
/// over Φ (zero-padded back to pruned elements), the induced mixture Q*,
/// and the iteration count.
#[derive(Clone, Debug)]
pub struct CapacitySolution {
    pub value: f64,
    pub prior: Vec<f64>,
    pub qstar: Vec<f64>,
    pub iters: usize,
}

fn mixture<P: AsRef<[f64]>>(phi: &[P], prior: &[f64], m: usize) -> Vec<f64> {
    let mut q = vec![0.0; m];
    for (p, &w) in phi.iter().zip(prior) {
        if w == 0.0 {
            continue;
        }
        for (qi, &pi) in q.iter_mut().zip(p.as_ref()) {
            *qi += w * pi;
        }
    }
    q
}

/// Maximizes J̃(π) = Σ_k π_k (KL(P_k‖Q_π) − c_k) by the multiplicative
/// update π'_k ∝ π_k·exp(KL(P_k‖Q_π) − c_k), starting from the uniform
/// prior. Stops when the duality gap max_k(KL(P_k‖Q_π) − c_k) − J̃(π)
/// drops below `tol`, which certifies the returned value is within `tol`
/// of the optimum.
pub fn misspec_capacity(
    inst: &DiscreteInstance,
    tol: f64,
    max_iters: usize,
) -> Result<CapacitySolution> {
    let k = inst.phi_pmfs.len();
    misspec_capacity_from(inst, &vec![1.0 / k as f64; k], tol, max_iters)
}

/// Same solver from a caller-supplied initial prior. Elements with zero
/// initial weight cannot be revived by the multiplicative update and are
/// pruned up front; their prior entries come back as exact zeros.
pub fn misspec_capacity_from(
    inst: &DiscreteInstance,
    init_prior: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<CapacitySolution> {
    assert_eq!(init_prior.len(), inst.phi_pmfs.len());
    assert!(init_prior.iter().all(|&w| w >= 0.0));
    let active: Vec<usize> =
        (0..init_prior.len()).filter(|&i| init_prior[i] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::EmptyClass("initial prior has no support".into()));
    }
    let phi: Vec<&Vec<f64>> = active.iter().map(|&i| &inst.phi_pmfs[i]).collect();
    let costs: Vec<f64> = active.iter().map(|&i| inst.costs[i]).collect();
    let z: f64 = active.iter().map(|&i| init_prior[i]).sum();
    let mut pi: Vec<f64> = active.iter().map(|&i| init_prior[i] / z).collect();

    let mut d = vec![0.0; pi.len()];
    let mut last = (0.0, f64::INFINITY);
    for it in 1..=max_iters {
        let q = mixture(&phi, &pi, inst.alphabet_size);
        for (dk, (p, &c)) in d.iter_mut().zip(phi.iter().zip(&costs)) {
            *dk = kl(p, &q) - c;
        }
        let j: f64 = pi.iter().zip(&d).map(|(&w, &dk)| w * dk).sum();
        let gap = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - j;
        if gap < tol {
            let mut prior = vec![0.0; inst.phi_pmfs.len()];
            for (slot, &w) in active.iter().zip(&pi) {
                prior[*slot] = w;
            }
            return Ok(CapacitySolution { value: j, prior, qstar: q, iters: it });
        }
        last = (j, gap);
        // π'_k ∝ π_k e^{d_k}; shift by max d for overflow safety
        let dmax = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut norm = 0.0;
        for (w, &dk) in pi.iter_mut().zip(&d) {
            *w *= (dk - dmax).exp();
            norm += *w;
        }
        for w in pi.iter_mut() {
            *w /= norm;
        }
    }
    Err(Error::MaxItersExceeded { max_iters, gap: last.1 })
}

/// Solver run that also records J̃ after every iteration, for
/// monotonicity checks.
pub fn misspec_capacity_trace(
    inst: &DiscreteInstance,
    tol: f64,
    max_iters: usize,
) -> Result<(CapacitySolution, Vec<f64>)> {
    let k = inst.phi_pmfs.len();
    let mut pi = vec![1.0 / k as f64; k];
    let mut trace = Vec::new();
    let mut d = vec![0.0; k];
    let mut last_gap = f64::INFINITY;
    for it in 1..=max_iters {
        let q = mixture(&inst.phi_pmfs, &pi, inst.alphabet_size);
        for (dk, (p, &c)) in d.iter_mut().zip(inst.phi_pmfs.iter().zip(&inst.costs)) {
            *dk = kl(p, &q) - c;
        }
        let j: f64 = pi.iter().zip(&d).map(|(&w, &dk)| w * dk).sum();
        trace.push(j);
        let gap = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - j;
        if gap < tol {
            return Ok((
                CapacitySolution { value: j, prior: pi, qstar: q, iters: it },
                trace,
            ));
        }
        last_gap = gap;
        let dmax = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut norm = 0.0;
        for (w, &dk) in pi.iter_mut().zip(&d) {
            *w *= (dk - dmax).exp();
            norm += *w;
        }
        for w in pi.iter_mut() {
            *w /= norm;
        }
    }
    Err(Error::MaxItersExceeded { max_iters, gap: last_gap })
}

/// Per-condition saddle verification for a candidate optimizer (Q*, F):
/// (a) max over P ∈ Φ, θ ∈ Θ of KL(P‖Q*) − KL(P‖P_θ) equals F within
/// tol; (b) KL(P‖Q*) ≤ F + c(P) + tol for every P ∈ Φ.
#[derive(Clone, Debug)]
pub struct SaddleReport {
    pub max_objective: f64,
    pub condition_max_equals_value: bool,
    pub worst_domination_slack: f64,
    pub condition_dominated: bool,
}

impl SaddleReport {
    pub fn pass(&self) -> bool {
        self.condition_max_equals_value && self.condition_dominated
    }
}

pub fn saddle_certificate(
    inst: &DiscreteInstance,
    qstar: &[f64],
    f: f64,
    tol: f64,
) -> SaddleReport {
    let mut max_obj = f64::NEG_INFINITY;
    let mut worst_slack = f64::NEG_INFINITY;
    for (p, &c) in inst.phi_pmfs.iter().zip(&inst.costs) {
        let d_q = kl(p, qstar);
        let best_theta = min_divergence_to_class(p, &inst.theta_pmfs);
        // sup over θ of KL(P‖Q*) − KL(P‖P_θ) = KL(P‖Q*) − c(P)
        max_obj = max_obj.max(d_q - best_theta);
        worst_slack = worst_slack.max(d_q - f - c);
    }
    SaddleReport {
        max_objective: max_obj,
        condition_max_equals_value: (max_obj - f).abs() <= tol,
        worst_domination_slack: worst_slack,
        condition_dominated: worst_slack <= tol,
    }
}

/// Plain redundancy-capacity of a finite class: the cost-free,
/// Φ = Θ special case. The stopping rule doubles as the minimax
/// certificate max_θ KL(P_θ‖Q*) − C < tol.
pub fn kemperman_capacity(theta_pmfs: &[Vec<f64>], tol: f64) -> Result<(f64, Vec<f64>)> {
    if theta_pmfs.is_empty() {
        return Err(Error::EmptyClass("theta class is empty".into()));
    }
    let m = theta_pmfs[0].len();
    let inst = DiscreteInstance::new(m, theta_pmfs.to_vec(), theta_pmfs.to_vec())?;
    let sol = misspec_capacity(&inst, tol, 2_000_000)?;
    let worst = theta_pmfs
        .iter()
        .map(|p| kl(p, &sol.qstar))
        .fold(f64::NEG_INFINITY, f64::max);
    debug_assert!(worst - sol.value < tol);
    Ok((sol.value, sol.qstar))
}

/// All five numbers of the capacity sandwich
/// C(Θ) ≤ F(Θ,Φ) ≤ F(Θ,Θ_ε) + h(λ₀)/(1−λ₀), λ₀ = C₁(Φ)/ε.
#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub c_theta: f64,
    pub f_theta_phi: f64,
    pub f_theta_eps: f64,
    pub c1_phi: f64,
    pub lambda0: f64,
    pub upper: f64,
    pub pass: bool,
}

pub fn sandwich_certificate(inst: &DiscreteInstance, epsilon: f64) -> Result<SandwichReport> {
    if !inst.theta_subset_of_phi() {
        return Err(Error::HypothesisViolated("theta must be a subset of phi".into()));
    }
    let tol = 1e-10;
    let (c1_phi, _) = kemperman_capacity(&inst.phi_pmfs, tol)?;
    let lambda0 = c1_phi / epsilon;
    if lambda0 >= 1.0 {
        return Err(Error::HypothesisViolated(format!(
            "lambda0 = C1(Phi)/eps = {lambda0} >= 1"
        )));
    }
    let (c_theta, _) = kemperman_capacity(&inst.theta_pmfs, tol)?;
    let f_theta_phi = misspec_capacity(inst, tol, 2_000_000)?.value;
    let f_theta_eps = misspec_capacity(&inst.enlarged_class(epsilon)?, tol, 2_000_000)?.value;
    let slack = if lambda0 == 0.0 {
        0.0
    } else {
        binary_entropy(lambda0) / (1.0 - lambda0)
    };
    let upper = f_theta_eps + slack;
    // solver values carry tol-level error on both sides of each inequality
    let pass = c_theta <= f_theta_phi + 10.0 * tol && f_theta_phi <= upper + 10.0 * tol;
    Ok(SandwichReport { c_theta, f_theta_phi, f_theta_eps, c1_phi, lambda0, upper, pass })
}
