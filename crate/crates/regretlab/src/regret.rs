//! Monte-Carlo and semi-analytic regret evaluation for any
//! (generator, predictor) pair. Two notions of oracle:
//!
//! - `Pac`: the comparator is fixed at θ* = c₀(μ), the in-box projection
//!   of the generator mean — the population maximizer.
//! - `Realized`: the comparator re-fits per replicate at θ*(Y^n) = c₀(ȳ_n).
//!
//! Replicates are split into fixed-size blocks computed in parallel and
//! merged in block order, so estimates are bit-identical for a given
//! (seed, reps, n) at any worker count.

use rayon::prelude::*;

use crate::glm::{GeneratorSpec, ThetaBox};
use crate::numeric::{log_q2, Moments};
use crate::predictors::Predictor;
use crate::rng::replicate_rng;
use crate::theory::i_n;
use crate::{Error, Result};

const BLOCK: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Pac,
    Realized,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Pac => "pac",
            Variant::Realized => "realized",
        }
    }
}

/// MC regret estimate in nats. When a replicate hits a −∞ predictor
/// log-density against a finite oracle, `mean` is +∞ and
/// `infinite_reps` counts how often; `stderr` is then meaningless and
/// set to +∞ as well.
#[derive(Clone, Copy, Debug)]
pub struct RegretEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub reps: u64,
    pub n: usize,
    pub variant: Variant,
    pub infinite_reps: u64,
}

struct BlockAcc {
    moments: Moments,
    infinite: u64,
}

fn run_blocks<F>(reps: u64, per_replicate: F) -> (Moments, u64)
where
    F: Fn(u64) -> f64 + Sync,
{
    let n_blocks = reps.div_ceil(BLOCK);
    let blocks: Vec<BlockAcc> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(reps);
            let mut m = Moments::new();
            let mut infinite = 0u64;
            for r in lo..hi {
                let v = per_replicate(r);
                if v.is_infinite() {
                    infinite += 1;
                } else {
                    m.push(v);
                }
            }
            BlockAcc { moments: m, infinite }
        })
        .collect();
    let mut total = Moments::new();
    let mut infinite = 0u64;
    for b in blocks {
        total.merge(&b.moments);
        infinite += b.infinite;
    }
    (total, infinite)
}

fn estimate(
    gen: &GeneratorSpec,
    predictor: &Predictor,
    theta_box: &ThetaBox,
    n: usize,
    reps: u64,
    seed: u64,
    variant: Variant,
) -> RegretEstimate {
    assert!(n >= 1 && reps >= 1);
    let theta_star_pac = theta_box.project(gen.mean());
    let per_rep = |r: u64| {
        let mut rng = replicate_rng(seed, r);
        let s = gen.sample_summary(n, &mut rng);
        let theta = match variant {
            Variant::Pac => theta_star_pac.clone(),
            Variant::Realized => theta_box.project(&s.mean),
        };
        crate::predictors::log_density_oracle(&s, &theta) - predictor.log_density(&s)
    };
    let (m, infinite) = run_blocks(reps, per_rep);
    if infinite > 0 {
        return RegretEstimate {
            mean: f64::INFINITY,
            stderr: f64::INFINITY,
            reps,
            n,
            variant,
            infinite_reps: infinite,
        };
    }
    RegretEstimate { mean: m.mean(), stderr: m.stderr(), reps, n, variant, infinite_reps: 0 }
}

/// E[ln p_{θ*}(Y^n) − ln q(Y^n)] with θ* = c₀(μ) fixed across replicates.
pub fn pac_regret(
    gen: &GeneratorSpec,
    predictor: &Predictor,
    theta_box: &ThetaBox,
    n: usize,
    reps: u64,
    seed: u64,
) -> RegretEstimate {
    estimate(gen, predictor, theta_box, n, reps, seed, Variant::Pac)
}

/// E[sup_{θ∈Θ} ln p_θ(Y^n) − ln q(Y^n)], the comparator refit per batch.
pub fn realized_regret(
    gen: &GeneratorSpec,
    predictor: &Predictor,
    theta_box: &ThetaBox,
    n: usize,
    reps: u64,
    seed: u64,
) -> RegretEstimate {
    estimate(gen, predictor, theta_box, n, reps, seed, Variant::Realized)
}

/// The three-term decomposition of the baseline predictor's PAC regret on
/// Θ = [-b, b]: Γ_n, Var[Y]/2, and the boundary term (n/2)E[(c₀(Ȳ)−Ȳ)²]
/// estimated by MC over draws of Ȳ_n alone.
pub fn analytic_shtarkov_regret_terms(
    gen: &GeneratorSpec,
    b: f64,
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<(f64, f64, RegretEstimate)> {
    if gen.mean().len() != 1 {
        return Err(Error::InvalidParameter("decomposition requires d = 1".into()));
    }
    if gen.mean()[0].abs() > b {
        return Err(Error::InvalidParameter(format!(
            "generator mean {} outside [-{b}, {b}]",
            gen.mean()[0]
        )));
    }
    let gamma = crate::theory::gamma_n_interval(2.0 * b, n as f64);
    let var_half = gen.total_variance() / 2.0;
    let nf = n as f64;
    let per_rep = |r: u64| {
        let mut rng = replicate_rng(seed, r);
        let ybar = gen.sample_mean(n, &mut rng)[0];
        let c = ybar.clamp(-b, b);
        0.5 * nf * (c - ybar) * (c - ybar)
    };
    let (m, _) = run_blocks(reps, per_rep);
    let est = RegretEstimate {
        mean: m.mean(),
        stderr: m.stderr(),
        reps,
        n,
        variant: Variant::Pac,
        infinite_reps: 0,
    };
    Ok((gamma, var_half, est))
}

/// PAC regret of the uniform Bayes mixture on Θ = [-b, b] for a
/// unit-variance generator with in-box mean: I_n − E[ln q₂(Ȳ_n)],
/// sampling Ȳ_n directly.
pub fn analytic_jeffreys_regret(
    gen: &GeneratorSpec,
    b: f64,
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<RegretEstimate> {
    if gen.mean().len() != 1 {
        return Err(Error::InvalidParameter("formula requires d = 1".into()));
    }
    if gen.mean()[0].abs() > b {
        return Err(Error::InvalidParameter(format!(
            "generator mean {} outside [-{b}, {b}]",
            gen.mean()[0]
        )));
    }
    if (gen.total_variance() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "formula requires unit variance, got {}",
            gen.total_variance()
        )));
    }
    let nf = n as f64;
    let info = i_n(1, nf, 2.0 * b);
    let per_rep = |r: u64| {
        let mut rng = replicate_rng(seed, r);
        let ybar = gen.sample_mean(n, &mut rng)[0];
        -log_q2(ybar, b, nf)
    };
    let (m, _) = run_blocks(reps, per_rep);
    Ok(RegretEstimate {
        mean: info + m.mean(),
        stderr: m.stderr(),
        reps,
        n,
        variant: Variant::Pac,
        infinite_reps: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::{summarize, GlmSummary};
    use crate::numeric::ndtr;
    use crate::predictors::{log_density_oracle, ShtarkovParams};
    use rand::Rng;

    fn box01() -> ThetaBox {
        ThetaBox::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn oracle_self_regret_is_zero() {
        let gen = GeneratorSpec::gaussian(vec![0.3], 1.0).unwrap();
        let p = Predictor::Oracle { theta: vec![0.3] };
        let est = pac_regret(&gen, &p, &box01(), 50, 200, 1);
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn realized_dominates_pac_on_shared_seed() {
        let gen = GeneratorSpec::gaussian(vec![0.5], 1.0).unwrap();
        let sh = ShtarkovParams::new(box01(), 1.0, 0.0, 100).unwrap();
        let p = Predictor::Shtarkov(sh);
        let pac = pac_regret(&gen, &p, &box01(), 100, 2_000, 42);
        let rea = realized_regret(&gen, &p, &box01(), 100, 2_000, 42);
        assert!(rea.mean >= pac.mean - 1e-12, "{} < {}", rea.mean, pac.mean);
    }

    #[test]
    fn point_mass_realized_nonnegative() {
        let gen = GeneratorSpec::point_mass(vec![0.4]);
        let p = Predictor::Oracle { theta: vec![0.4] };
        let est = realized_regret(&gen, &p, &box01(), 20, 100, 3);
        assert!(est.mean >= 0.0);
        assert_eq!(est.mean, 0.0); // oracle at the point mass is exact
    }

    #[test]
    fn interior_gaussian_matches_gamma_minus_half_var() {
        // PAC regret of the baseline ≈ Γ_n − 1/2 for interior mean
        let n = 2_000;
        let gen = GeneratorSpec::gaussian(vec![0.5], 1.0).unwrap();
        let sh = ShtarkovParams::new(box01(), 1.0, 0.0, n).unwrap();
        let p = Predictor::Shtarkov(sh);
        let est = pac_regret(&gen, &p, &box01(), n, 40_000, 7);
        let expect = crate::theory::gamma_n_interval(1.0, n as f64) - 0.5;
        assert!(
            (est.mean - expect).abs() < 3.0 * est.stderr + 1e-3,
            "{} vs {expect} (se {})",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn seed_determinism_across_worker_counts() {
        let gen = GeneratorSpec::gaussian(vec![0.5], 1.0).unwrap();
        let sh = ShtarkovParams::new(box01(), 1.0, 0.0, 64).unwrap();
        let p = Predictor::Shtarkov(sh);
        let runs: Vec<(f64, f64)> = [1usize, 3, 8]
            .iter()
            .map(|&w| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build().unwrap();
                pool.install(|| {
                    let e = pac_regret(&gen, &p, &box01(), 64, 5_000, 99);
                    (e.mean, e.stderr)
                })
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
        assert_eq!(runs[1], runs[2]);
    }

    #[test]
    fn summary_equals_raw_evaluation() {
        // per-replicate regret via summary == direct recomputation from
        // raw coordinates, small batches, d ≤ 2
        let mut rng = replicate_rng(5, 0);
        for case in 0..10 {
            let d = 1 + (case % 2);
            let n = 1 + (case % 5);
            let theta: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
            let gen = GeneratorSpec::gaussian(theta.clone(), 1.0).unwrap();
            let raw: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let mut buf = vec![0.0; d];
                    gen.sample_into(&mut buf, &mut rng);
                    buf
                })
                .collect();
            let s = summarize(&raw);
            // direct: ln p_θ from coordinates
            let mut ssq = 0.0;
            for y in &raw {
                for (yi, ti) in y.iter().zip(&theta) {
                    ssq += (yi - ti) * (yi - ti);
                }
            }
            let direct =
                -0.5 * (n * d) as f64 * crate::numeric::LN_2PI - 0.5 * ssq;
            let via_summary = log_density_oracle(&s, &theta);
            assert!(
                (direct - via_summary).abs() < 1e-10,
                "case {case}: {direct} vs {via_summary}"
            );
        }
    }

    #[test]
    fn realized_uniform_matches_brute_force() {
        // realized regret per replicate from raw samples, no summary
        let gen = GeneratorSpec::uniform_box(box01());
        let n = 100;
        let sh = ShtarkovParams::new(box01(), 1.0, 0.0, n).unwrap();
        let p = Predictor::Shtarkov(sh.clone());
        let reps = 500u64;
        let est = realized_regret(&gen, &p, &box01(), n, reps, 31);

        let mut m = Moments::new();
        for r in 0..reps {
            let mut rng = replicate_rng(31, r);
            let mut raw = Vec::with_capacity(n);
            for _ in 0..n {
                let mut buf = vec![0.0];
                gen.sample_into(&mut buf, &mut rng);
                raw.push(buf);
            }
            let mean: f64 = raw.iter().map(|y| y[0]).sum::<f64>() / n as f64;
            let c = mean.clamp(0.0, 1.0);
            let log_oracle: f64 = raw
                .iter()
                .map(|y| -0.5 * crate::numeric::LN_2PI - 0.5 * (y[0] - c) * (y[0] - c))
                .sum();
            // baseline log-density from raw coordinates
            let ssq_tot: f64 = raw.iter().map(|y| (y[0] - c) * (y[0] - c)).sum();
            let log_pred = -sh.log_z - 0.5 * n as f64 * crate::numeric::LN_2PI - 0.5 * ssq_tot;
            m.push(log_oracle - log_pred);
        }
        assert!((est.mean - m.mean()).abs() < 1e-10);
    }

    #[test]
    fn well_specified_regret_is_nonnegative() {
        let gen = GeneratorSpec::gaussian(vec![0.2], 1.0).unwrap();
        let n = 50;
        let sh = ShtarkovParams::new(box01(), 1.0, 0.05, n).unwrap();
        for p in [
            Predictor::Shtarkov(sh.clone()),
            Predictor::Escape { alpha: 1.0 },
            Predictor::Robust(
                crate::predictors::RobustParams::new(sh, 0.01, 1.0).unwrap(),
            ),
        ] {
            let est = pac_regret(&gen, &p, &box01(), n, 4_000, 13);
            assert!(
                est.mean >= -3.0 * est.stderr,
                "{}: {} (se {})",
                p.name(),
                est.mean,
                est.stderr
            );
        }
    }

    #[test]
    fn decomposition_examples() {
        // gaussian(0,1), b=1: boundary term small at large n
        let gen = GeneratorSpec::gaussian(vec![0.0], 1.0).unwrap();
        let (gamma, var_half, bt) =
            analytic_shtarkov_regret_terms(&gen, 1.0, 10_000, 20_000, 17).unwrap();
        assert!((gamma - crate::theory::gamma_n_interval(2.0, 10_000.0)).abs() < 1e-14);
        assert!((var_half - 0.5).abs() < 1e-14);
        assert!(bt.mean <= 1e-3, "boundary term {}", bt.mean);

        // point mass at 0: boundary exactly zero
        let pm = GeneratorSpec::point_mass(vec![0.0]);
        let (_, vh, bt) = analytic_shtarkov_regret_terms(&pm, 1.0, 100, 100, 1).unwrap();
        assert_eq!(vh, 0.0);
        assert_eq!(bt.mean, 0.0);

        // heavy tail: boundary term bounded away from zero across n.
        // The term is carried by mean-excursion events of probability
        // ~1/(4n) per replicate, so reps must grow with n for power.
        for &n in &[100usize, 1_000] {
            let ht = GeneratorSpec::heavy_tail_three_point(1.0, n as u64).unwrap();
            let (_, _, bt) =
                analytic_shtarkov_regret_terms(&ht, 1.0, n, 400_000, 23).unwrap();
            assert!(
                bt.mean - 3.0 * bt.stderr > 0.05,
                "n={n}: {} (se {})",
                bt.mean,
                bt.stderr
            );
        }

        // mean outside the box is rejected
        let far = GeneratorSpec::gaussian(vec![2.0], 1.0).unwrap();
        assert!(analytic_shtarkov_regret_terms(&far, 1.0, 10, 10, 1).is_err());
    }

    #[test]
    fn jeffreys_analytic_examples() {
        let gen = GeneratorSpec::gaussian(vec![0.0], 1.0).unwrap();
        let est = analytic_jeffreys_regret(&gen, 1.0, 10_000, 20_000, 29).unwrap();
        let penalty = est.mean - i_n(1, 10_000.0, 2.0);
        assert!(penalty <= 1e-3, "penalty {penalty}");

        // point mass at 0: penalty has the closed form −ln(2Φ(√n b) − 1)
        let pm = GeneratorSpec::point_mass(vec![0.0]);
        assert!(analytic_jeffreys_regret(&pm, 1.0, 100, 10, 1).is_err()); // variance 0 ≠ 1
        let n: f64 = 16.0;
        let closed = -(2.0 * ndtr(n.sqrt() * 1.0) - 1.0).ln();
        assert!((-log_q2(0.0, 1.0, n) - closed).abs() < 1e-12);

        // heavy tail: penalty bounded away from zero
        for &n in &[100usize, 1_000] {
            let ht = GeneratorSpec::heavy_tail_three_point(1.0, n as u64).unwrap();
            let est = analytic_jeffreys_regret(&ht, 1.0, n, 200_000, 37).unwrap();
            let penalty = est.mean - i_n(1, n as f64, 2.0);
            assert!(
                penalty - 3.0 * est.stderr > 0.05,
                "n={n}: {penalty} (se {})",
                est.stderr
            );
        }
    }

    #[test]
    fn infinite_regret_is_flagged() {
        // a point mass outside the support of a degenerate "predictor":
        // use an oracle comparator against a predictor that assigns -inf
        // via an escape-free Shtarkov on a box the data never enters?
        // Shtarkov never returns -inf for finite data, so synthesize the
        // flag through run_blocks directly.
        let (m, inf) = run_blocks(100, |r| if r == 17 { f64::INFINITY } else { 1.0 });
        assert_eq!(inf, 1);
        assert_eq!(m.count(), 99);
    }

    #[test]
    fn estimate_fields_are_consistent() {
        let gen = GeneratorSpec::gaussian(vec![0.5], 1.0).unwrap();
        let p = Predictor::Jeffreys { b: 1.0 };
        let bx = ThetaBox::interval(-1.0, 1.0).unwrap();
        let est = pac_regret(&gen, &p, &bx, 32, 1_000, 8);
        assert_eq!(est.reps, 1_000);
        assert_eq!(est.n, 32);
        assert_eq!(est.variant, Variant::Pac);
        assert!(est.stderr > 0.0);

        // stderr is sd/sqrt(reps): recompute from a manual pass
        let mut m = Moments::new();
        for r in 0..1_000u64 {
            let mut rng = replicate_rng(8, r);
            let s: GlmSummary = gen.sample_summary(32, &mut rng);
            let theta = bx.project(gen.mean());
            m.push(log_density_oracle(&s, &theta) - p.log_density(&s));
        }
        assert!((est.mean - m.mean()).abs() < 1e-12);
        assert!((est.stderr - m.std_dev() / (1000f64).sqrt()).abs() < 1e-12);
    }
}
