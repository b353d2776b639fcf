//! Experiment configuration: a JSON document loaded from `--config`,
//! with individual fields overridable by command-line flags
//! (flag wins).

use regretlab::glm::{GeneratorSpec, ThetaBox};
use regretlab::predictors::{Predictor, RobustParams, ShtarkovParams};
use serde::{Deserialize, Serialize};

fn default_reps() -> u64 {
    10_000
}
fn default_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    Gaussian { theta: Vec<f64>, sigma2: f64 },
    UniformBox,
    PointMass { theta: Vec<f64> },
    HeavyTail { b: f64 },
    Laplace { theta: Vec<f64>, scale: f64 },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VMode {
    Fixed,
    Schedule,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredictorConfig {
    /// Fixed-parameter comparator; defaults to the generator mean.
    Oracle {
        #[serde(default)]
        theta: Option<Vec<f64>>,
    },
    Shtarkov {
        #[serde(default)]
        tau: f64,
        #[serde(default = "VMode::fixed")]
        v_mode: VMode,
        #[serde(default)]
        v: Option<f64>,
        #[serde(default)]
        beta: Option<f64>,
    },
    Escape {
        alpha: f64,
    },
    Robust {
        lambda: f64,
        tau: f64,
        alpha: f64,
        #[serde(default = "VMode::fixed")]
        v_mode: VMode,
        #[serde(default)]
        v: Option<f64>,
        #[serde(default)]
        beta: Option<f64>,
    },
    Jeffreys,
}

impl VMode {
    fn fixed() -> Self {
        VMode::Fixed
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VariantConfig {
    Pac,
    Realized,
}

/// Grids and parameters for the closed-form table command.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    /// interval half-width for the KL-gap and entropy columns
    #[serde(default = "TheoryConfig::default_b")]
    pub b: f64,
    /// interval length for the Γ_n column
    #[serde(default = "TheoryConfig::default_a")]
    pub a: f64,
    /// Leb(Θ) for the I_n column
    #[serde(default = "TheoryConfig::default_leb")]
    pub leb: f64,
    /// noise variance for the entropy-bound column
    #[serde(default = "TheoryConfig::default_eps")]
    pub eps: f64,
}

impl TheoryConfig {
    fn default_b() -> f64 {
        1.0
    }
    fn default_a() -> f64 {
        1.0
    }
    fn default_leb() -> f64 {
        1.0
    }
    fn default_eps() -> f64 {
        1e-6
    }
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self { b: 1.0, a: 1.0, leb: 1.0, eps: 1e-6 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub theta_box: Option<BoxSpec>,
    #[serde(default)]
    pub generator: Option<GeneratorConfig>,
    /// predictors evaluated by `regret` (first only) and `sweep` (all)
    #[serde(default)]
    pub predictors: Vec<PredictorConfig>,
    #[serde(default)]
    pub variants: Vec<VariantConfig>,
    #[serde(default)]
    pub horizons: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[serde(default)]
    pub seed: u64,
    /// 0 = rayon default
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub out: Option<String>,
    /// path to a capacity instance document
    #[serde(default)]
    pub instance: Option<String>,
    /// enlargement radius for the sandwich certificate
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_tol")]
    pub ba_tol: f64,
    #[serde(default = "default_tol")]
    pub quad_tol: f64,
    #[serde(default)]
    pub theory: TheoryConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &str) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {path}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("config {path}: {e}"))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err("horizons must be strictly increasing".into());
        }
        if self.reps < 1 {
            return Err("reps must be >= 1".into());
        }
        if let Some(b) = &self.theta_box {
            if b.lo.len() != b.hi.len() || b.lo.is_empty() {
                return Err("theta_box lo/hi must be non-empty and equal length".into());
            }
        }
        for p in &self.predictors {
            match p {
                PredictorConfig::Shtarkov { tau, .. } if *tau < 0.0 => {
                    return Err("tau must be >= 0".into())
                }
                PredictorConfig::Escape { alpha } if *alpha <= 0.0 => {
                    return Err("alpha must be > 0".into())
                }
                PredictorConfig::Robust { lambda, tau, alpha, .. } => {
                    if !(*lambda > 0.0 && *lambda < 1.0) {
                        return Err("lambda must be in (0,1)".into());
                    }
                    if *tau < 0.0 {
                        return Err("tau must be >= 0".into());
                    }
                    if *alpha <= 0.0 {
                        return Err("alpha must be > 0".into());
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn theta_box(&self) -> Result<ThetaBox, String> {
        let spec = self
            .theta_box
            .as_ref()
            .ok_or_else(|| "config needs a theta_box".to_string())?;
        ThetaBox::new(spec.lo.clone(), spec.hi.clone()).map_err(|e| e.to_string())
    }

    pub fn generator(&self, b: &ThetaBox, n: usize) -> Result<GeneratorSpec, String> {
        let g = self
            .generator
            .as_ref()
            .ok_or_else(|| "config needs a generator".to_string())?;
        let r = match g {
            GeneratorConfig::Gaussian { theta, sigma2 } => {
                GeneratorSpec::gaussian(theta.clone(), *sigma2)
            }
            GeneratorConfig::UniformBox => Ok(GeneratorSpec::uniform_box(b.clone())),
            GeneratorConfig::PointMass { theta } => Ok(GeneratorSpec::point_mass(theta.clone())),
            GeneratorConfig::HeavyTail { b } => {
                GeneratorSpec::heavy_tail_three_point(*b, n as u64)
            }
            GeneratorConfig::Laplace { theta, scale } => {
                GeneratorSpec::laplace(theta.clone(), *scale)
            }
        };
        r.map_err(|e| e.to_string())
    }

    pub fn build_predictor(
        &self,
        spec: &PredictorConfig,
        b: &ThetaBox,
        n: usize,
    ) -> Result<Predictor, String> {
        let pick_v = |v_mode: VMode, v: Option<f64>, beta: Option<f64>| -> Result<f64, String> {
            match v_mode {
                VMode::Fixed => Ok(v.unwrap_or(1.0)),
                VMode::Schedule => regretlab::predictors::v_schedule(n, beta.unwrap_or(1.0))
                    .map_err(|e| e.to_string()),
            }
        };
        match spec {
            PredictorConfig::Oracle { theta } => {
                let theta = match theta {
                    Some(t) => t.clone(),
                    None => {
                        let g = self.generator(b, n)?;
                        g.mean().to_vec()
                    }
                };
                Ok(Predictor::Oracle { theta })
            }
            PredictorConfig::Shtarkov { tau, v_mode, v, beta } => {
                let v = pick_v(*v_mode, *v, *beta)?;
                let p = ShtarkovParams::new(b.clone(), v, *tau, n).map_err(|e| e.to_string())?;
                Ok(Predictor::Shtarkov(p))
            }
            PredictorConfig::Escape { alpha } => Ok(Predictor::Escape { alpha: *alpha }),
            PredictorConfig::Robust { lambda, tau, alpha, v_mode, v, beta } => {
                let v = pick_v(*v_mode, *v, *beta)?;
                let sh = ShtarkovParams::new(b.clone(), v, *tau, n).map_err(|e| e.to_string())?;
                let p = RobustParams::new(sh, *lambda, *alpha).map_err(|e| e.to_string())?;
                Ok(Predictor::Robust(p))
            }
            PredictorConfig::Jeffreys => {
                if b.dim() != 1 || (b.lo()[0] + b.hi()[0]).abs() > 1e-12 {
                    return Err("jeffreys predictor needs a symmetric 1-d theta_box".into());
                }
                Ok(Predictor::Jeffreys { b: b.hi()[0] })
            }
        }
    }
}
