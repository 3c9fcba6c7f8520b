//! JSON project configuration: the plant, the Lyapunov candidate, and the
//! optional synthesis/verify/simulate blocks. Expression-valued fields use
//! the same grammar everywhere (variables x1..xn, plus t in disturbance
//! signals).

use homopt::expr::{parse, Expr};
use homopt::homogeneity::{Dilation, SphereBudget};
use homopt::sim::DisturbanceSpec;
use homopt::synthesis::SynthesisConfig;
use homopt::sysdef::{HomogeneousSystem, LyapunovCandidate};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectConfig {
    pub system: SystemBlock,
    pub lyapunov: LyapunovBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateBlock>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemBlock {
    pub weights: Vec<f64>,
    pub k: f64,
    pub f: Vec<String>,
    pub g1: Vec<String>,
    pub g2: Vec<Vec<String>>,
    pub h: Vec<String>,
    pub d: Vec<f64>,
    pub theta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyapunovBlock {
    pub v: String,
    pub nu: f64,
    /// Defaults to k + 2·min(weights).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthesisBlock {
    pub c10: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_coeff: Option<f64>,
    /// Membership expression: x ∈ Q₀ iff q0(x) ≥ 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<String>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub kappa_margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_stabilizer: Option<String>,
    /// Pins the gain instead of selecting it from the estimated bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

fn default_beta() -> f64 {
    2.0
}

fn default_lambda() -> f64 {
    2.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyBlock {
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        VerifyBlock {
            budget: default_budget(),
            seed: default_seed(),
            tol: default_tol(),
        }
    }
}

fn default_budget() -> usize {
    4096
}

fn default_seed() -> u64 {
    42
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateBlock {
    pub x0: Vec<Vec<f64>>,
    pub t_final: f64,
    pub disturbances: Vec<DisturbanceConfig>,
    #[serde(default = "default_integrator_tol")]
    pub integrator_tol: f64,
    /// Feedback expression for plants simulated without a synthesis block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<String>,
}

fn default_integrator_tol() -> f64 {
    1e-9
}

/// Disturbance menu as written in configs. `worst_case` takes its γ and λ
/// from the synthesized bundle at run time.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DisturbanceConfig {
    Zero,
    Constant {
        value: Vec<f64>,
    },
    Sinusoid {
        amplitude: Vec<f64>,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        decay: f64,
    },
    WorstCase,
    Custom {
        exprs: Vec<String>,
    },
}

impl DisturbanceConfig {
    pub fn label(&self) -> String {
        match self {
            DisturbanceConfig::Zero => "zero".into(),
            DisturbanceConfig::Constant { .. } => "constant".into(),
            DisturbanceConfig::Sinusoid { .. } => "sinusoid".into(),
            DisturbanceConfig::WorstCase => "worst_case".into(),
            DisturbanceConfig::Custom { .. } => "custom".into(),
        }
    }

    /// Lower to the runtime spec; needs the bundle's (λ, γ) for worst_case.
    pub fn lower(&self, worst: Option<(f64, (f64, f64))>) -> Result<DisturbanceSpec, String> {
        Ok(match self {
            DisturbanceConfig::Zero => DisturbanceSpec::Zero,
            DisturbanceConfig::Constant { value } => DisturbanceSpec::Constant {
                value: value.clone(),
            },
            DisturbanceConfig::Sinusoid {
                amplitude,
                frequency,
                phase,
                decay,
            } => DisturbanceSpec::Sinusoid {
                amplitude: amplitude.clone(),
                frequency: *frequency,
                phase: *phase,
                decay: *decay,
            },
            DisturbanceConfig::WorstCase => {
                let (lambda, gamma) = worst
                    .ok_or_else(|| "worst_case disturbance needs a synthesis block".to_string())?;
                DisturbanceSpec::WorstCase { lambda, gamma }
            }
            DisturbanceConfig::Custom { exprs } => DisturbanceSpec::Custom {
                exprs: exprs.clone(),
            },
        })
    }
}

/// Everything parsed and validated, ready for the pipeline.
pub struct Built {
    pub system: HomogeneousSystem,
    pub lyapunov: LyapunovCandidate,
    pub nu: f64,
    pub synthesis: Option<SynthesisConfig>,
    pub pinned_kappa: Option<f64>,
    pub verify: VerifyBlock,
    pub simulate: Option<SimulateBlock>,
    pub controller: Option<Expr>,
}

fn parse_named(what: &str, text: &str, n: usize, allow_time: bool) -> Result<Expr, String> {
    let e = parse(text).map_err(|err| format!("{what}: {err}"))?;
    if let Some(max) = e.max_state_index() {
        if max > n {
            return Err(format!(
                "{what}: references x{max} but the plant has {n} states"
            ));
        }
    }
    if !allow_time && e.uses_time() {
        return Err(format!(
            "{what}: t is only available in disturbance signals"
        ));
    }
    Ok(e)
}

fn all_finite(what: &str, vals: &[f64]) -> Result<(), String> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(format!("{what}: non-finite entry"));
    }
    Ok(())
}

impl ProjectConfig {
    pub fn from_str(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config JSON: {e}"))
    }

    pub fn build(&self, overrides: &Overrides) -> Result<Built, String> {
        let n = self.system.weights.len();
        all_finite("system.weights", &self.system.weights)?;
        all_finite("system.d", &self.system.d)?;
        if !self.system.theta.is_finite() || !self.system.k.is_finite() {
            return Err("system.k and system.theta must be finite".into());
        }
        let dilation = Dilation::new(self.system.weights.clone()).map_err(|e| e.to_string())?;
        let parse_vec = |what: &str, texts: &[String]| -> Result<Vec<Expr>, String> {
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| parse_named(&format!("{what}[{i}]"), t, n, false))
                .collect()
        };
        let f = parse_vec("system.f", &self.system.f)?;
        let g1 = parse_vec("system.g1", &self.system.g1)?;
        let g2 = self
            .system
            .g2
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, t)| parse_named(&format!("system.g2[{i}][{j}]"), t, n, false))
                    .collect()
            })
            .collect::<Result<Vec<Vec<Expr>>, String>>()?;
        let h = parse_vec("system.h", &self.system.h)?;
        let system = HomogeneousSystem::new(
            dilation,
            self.system.k,
            f,
            g1,
            g2,
            h,
            self.system.d.clone(),
            self.system.theta,
        )
        .map_err(|e| e.to_string())?;

        let v = parse_named("lyapunov.v", &self.lyapunov.v, n, false)?;
        let degree = self
            .lyapunov
            .degree
            .unwrap_or(self.system.k + 2.0 * system.r0());
        let lyapunov = LyapunovCandidate::new(v, degree);

        let verify = {
            let mut v = self.verify.clone().unwrap_or_default();
            if let Some(seed) = overrides.seed {
                v.seed = seed;
            }
            if let Some(budget) = overrides.budget {
                v.budget = budget;
            }
            if let Some(tol) = overrides.tol {
                v.tol = tol;
            }
            v
        };

        let mut pinned_kappa = None;
        let synthesis = match &self.synthesis {
            Some(block) => {
                let q0 = block
                    .q0
                    .as_ref()
                    .map(|t| parse_named("synthesis.q0", t, n, false))
                    .transpose()?;
                let stab = block
                    .known_stabilizer
                    .as_ref()
                    .map(|t| parse_named("synthesis.known_stabilizer", t, n, false))
                    .transpose()?;
                pinned_kappa = block.kappa;
                Some(SynthesisConfig {
                    c10: block.c10,
                    pi_coeff: block.pi_coeff,
                    q0_predicate: q0,
                    beta: block.beta,
                    lambda: block.lambda,
                    kappa_margin: block.kappa_margin,
                    known_stabilizer: stab,
                    budget: SphereBudget::for_dim(n).with_samples(verify.budget),
                    seed: verify.seed,
                })
            }
            None => None,
        };

        let controller = match &self.simulate {
            Some(sim) => sim
                .controller
                .as_ref()
                .map(|t| parse_named("simulate.controller", t, n, false))
                .transpose()?,
            None => None,
        };
        if let Some(sim) = &self.simulate {
            for (i, x0) in sim.x0.iter().enumerate() {
                all_finite(&format!("simulate.x0[{i}]"), x0)?;
                if x0.len() != n {
                    return Err(format!(
                        "simulate.x0[{i}] has {} entries, plant has {n} states",
                        x0.len()
                    ));
                }
            }
            if !(sim.t_final > 0.0) || !(sim.integrator_tol > 0.0) {
                return Err("simulate.t_final and integrator_tol must be positive".into());
            }
            for (i, d) in sim.disturbances.iter().enumerate() {
                if let DisturbanceConfig::Custom { exprs } = d {
                    for (j, t) in exprs.iter().enumerate() {
                        parse_named(
                            &format!("simulate.disturbances[{i}].exprs[{j}]"),
                            t,
                            n,
                            true,
                        )?;
                    }
                }
            }
        }

        Ok(Built {
            system,
            lyapunov,
            nu: self.lyapunov.nu,
            synthesis,
            pinned_kappa,
            verify,
            simulate: self.simulate.clone(),
            controller,
        })
    }
}

/// Global CLI flag overrides applied on top of the config.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
}
