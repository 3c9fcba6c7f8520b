//! The constructive pipeline: a Sontag-type feedback and its induced weight
//! R(x), the disturbance-absorbing auxiliary field f̃, sphere-constant
//! estimation, gain selection, and assembly of the inverse-optimal
//! controller α* together with its cost pieces (E, l, R₁, R₂, γ₀).
//!
//! Stage order matters: φ needs the π-coefficient c₆, the Sontag law and
//! R(x) need φ, γ needs the sphere bound c₈ on |L_{G₂}V|, the auxiliary
//! field needs γ, and every ρ-constant needs R and f̃. The gain κ is chosen
//! last, above max(κ_c, κ₁, 1), which makes H_κ positive definite on the
//! sphere and hence (by homogeneity) on all of ℝⁿ\{0}.

use crate::expr::{Env, EvalError, EvalResult, Expr};
use crate::homogeneity::{
    sphere_optimize, sphere_sample, HomogeneousNorm, OptMode, SphereBudget, SphereOptError,
};
use crate::lft::PowerKInfinity;
use crate::sysdef::{
    lie_derivatives, validate_system, HomogeneousSystem, LieDerivatives, LyapunovCandidate,
};
use serde::Serialize;
use std::collections::BTreeMap;

/// Relative width of the L_{G₁}V = 0 branch: the switch fires when
/// |L_{G₁}V| ≤ 1e-9 · Γ(x)^{k+r₀}, which is dilation-invariant.
pub const TOL_SWITCH: f64 = 1e-9;

/// Sphere points with |L_{G₁}V| below this (relative) width must have
/// φ < 0 for the Sontag law to be continuous.
const TOL_SONTAG_GATE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SynthesisConfig {
    /// Offset in the Sontag denominator; keeps R(x) bounded.
    pub c10: f64,
    /// Override for the π(s) = c₆·s^{k+r₀} coefficient. When absent, c₆ is
    /// derived from the disturbance-free decrease of a stabilizer.
    pub pi_coeff: Option<f64>,
    /// Membership expression q(x): x ∈ Q₀ iff q(x) ≥ 0. Q₀ must contain
    /// the set where L_{G₁}V vanishes and its closure must sit inside the
    /// region where L_f̃V < 0.
    pub q0_predicate: Option<Expr>,
    pub beta: f64,
    pub lambda: f64,
    /// Relative safety factor on the selected gain.
    pub kappa_margin: f64,
    /// A feedback known to stabilize the disturbance-free plant; used to
    /// seed c₁ and c₉ estimation. Without it the Sontag law itself (at
    /// unit trial gain) is used.
    pub known_stabilizer: Option<Expr>,
    pub budget: SphereBudget,
    pub seed: u64,
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        if !(self.c10 > 0.0) {
            return Err(SynthesisError::BadConfig("c10 must be positive".into()));
        }
        if !(self.beta >= 2.0) {
            return Err(SynthesisError::BadConfig("beta must be >= 2".into()));
        }
        if !(self.lambda > 0.0 && self.lambda <= 2.0) {
            return Err(SynthesisError::BadConfig(
                "lambda must lie in (0, 2]".into(),
            ));
        }
        if !(self.kappa_margin >= 0.0) {
            return Err(SynthesisError::BadConfig(
                "kappa_margin must be nonnegative".into(),
            ));
        }
        if let Some(c6) = self.pi_coeff {
            if !(c6 > 0.0) {
                return Err(SynthesisError::BadConfig(
                    "pi_coeff must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("system is not synthesizable: theta = 0")]
    NonSynthesizable,
    #[error("invalid synthesis configuration: {0}")]
    BadConfig(String),
    #[error("system validation failed: {0:?}")]
    Validation(Vec<String>),
    #[error("missing Q0 predicate; constant estimation needs one")]
    MissingQ0,
    #[error(
        "Sontag condition violated: phi >= 0 where L_G1 V ~ 0 at {} sphere points (first: {:?})",
        .points.len(), .points.first()
    )]
    SontagCondition { points: Vec<Vec<f64>> },
    #[error("Q0 predicate invalid: {reason}; witnesses {witnesses:?}")]
    InvalidQ0 {
        reason: String,
        witnesses: Vec<Vec<f64>>,
    },
    #[error("stabilizer does not decrease V on the sphere (c1 = {0})")]
    NotStabilizing(f64),
    #[error("rho1 = {0} <= 0: cl(Q0) is not inside the decrease region of the auxiliary field")]
    NonPositiveRho1(f64),
    #[error("rho3 = {0} <= 0: L_G1 V effectively vanishes somewhere on S \\ Q0")]
    NonPositiveRho3(f64),
    #[error("non-finite constant {name} = {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("auxiliary decrease violated at {point:?}: rate {rate} vs bound {bound}")]
    DecreaseViolated {
        point: Vec<f64>,
        rate: f64,
        bound: f64,
    },
    #[error("{stage} failed: {source}")]
    Sphere {
        stage: &'static str,
        source: SphereOptError,
    },
    #[error("{stage} failed at {point:?}: {source}")]
    Eval {
        stage: &'static str,
        point: Vec<f64>,
        source: EvalError,
    },
    #[error(transparent)]
    Norm(#[from] crate::homogeneity::HomogeneityError),
}

/// Every scalar the sphere optimizer produces, plus the points achieving
/// the extrema. c₂ = c₈ is the sphere bound on |L_{G₂}V|; the chain
/// c₃ = c/2, c₄ = 2c₂²/c, c₅ = √(c₄/c₃), c₆ = 1/c₅ is seeded by the
/// disturbance-free decrease constant when one was computed
/// (`c1_unperturbed`), otherwise by c₁ itself.
#[derive(Clone, Debug, Serialize)]
pub struct SphereConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
    pub rho: f64,
    pub rho_m: f64,
    pub kappa_c: f64,
    pub kappa1: f64,
    pub c1_unperturbed: Option<f64>,
    pub argpoints: BTreeMap<String, Vec<f64>>,
}

/// κ-independent part of the design: φ, the Sontag law, R(x), γ and f̃.
#[derive(Clone, Debug)]
pub struct DesignSpace {
    sys: HomogeneousSystem,
    v: LyapunovCandidate,
    norm: HomogeneousNorm,
    lie: LieDerivatives,
    config: SynthesisConfig,
    c6: f64,
    c8: f64,
    c8_argpoint: Vec<f64>,
    c1_unperturbed: Option<f64>,
    gamma: PowerKInfinity,
    ell: PowerKInfinity,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn is_origin(x: &[f64]) -> bool {
    x.iter().all(|&c| c == 0.0)
}

/// (φ + √(φ² + b⁴)) / b² without cancellation: for φ < 0 the conjugate
/// form b²/(√(φ² + b⁴) − φ) is exact where the direct difference loses all
/// digits (b → 0 with φ bounded away from zero).
fn sontag_bracket(phi: f64, b2: f64) -> f64 {
    let disc = (phi * phi + b2 * b2).sqrt();
    if phi >= 0.0 {
        (phi + disc) / b2
    } else {
        b2 / (disc - phi)
    }
}

/// (−φ + √(φ² + b⁴)) / 2, the stable companion used by M.
fn m_bracket(phi: f64, b2: f64) -> f64 {
    let disc = (phi * phi + b2 * b2).sqrt();
    if phi <= 0.0 {
        0.5 * (-phi + disc)
    } else {
        0.5 * b2 * b2 / (disc + phi)
    }
}

/// Builds the design space: validates the plant, fixes c₆ (override or
/// derived), fixes γ from the sphere bound c₈, and checks the Sontag
/// condition. Everything after this is constant estimation and assembly.
pub fn prepare(
    sys: &HomogeneousSystem,
    v: &LyapunovCandidate,
    nu: f64,
    config: &SynthesisConfig,
) -> Result<DesignSpace, SynthesisError> {
    config.validate()?;
    if !sys.synthesizable() {
        return Err(SynthesisError::NonSynthesizable);
    }
    let report = validate_system(sys, v, nu, 64, 1e-8, config.seed);
    if !report.pass {
        return Err(SynthesisError::Validation(
            report.failing().iter().map(|e| e.name.clone()).collect(),
        ));
    }
    let norm = HomogeneousNorm::new(sys.dilation.clone(), nu)?;
    let lie = lie_derivatives(sys, v);
    let kr0 = sys.k + sys.r0();

    // Sphere bound on |L_{G2}V| (this is both c2 and c8).
    let c8_opt = sphere_optimize(
        |x| lie.lg2_v(x).map(|v| norm2(&v)),
        &norm,
        None,
        OptMode::Max,
        &config.budget,
        config.seed,
    )
    .map_err(|source| SynthesisError::Sphere {
        stage: "c8 = max |L_G2 V| over the sphere",
        source,
    })?;
    let c8 = c8_opt.value;

    // c6: explicit override, or c1/(2 c2) from the disturbance-free
    // decrease of a stabilizer. With no stabilizer supplied, the Sontag
    // law for the unperturbed plant plays that role.
    let mut c1_unperturbed = None;
    let c6 = match (config.pi_coeff, &config.known_stabilizer) {
        (Some(c6), None) => c6,
        (maybe_c6, stab) => {
            let alpha_h = |x: &[f64]| -> EvalResult<f64> {
                match stab {
                    Some(e) => e.eval(&Env::state(x)),
                    None => unperturbed_sontag(&lie, config.c10, &norm, kr0, x),
                }
            };
            let c1w0 = sphere_optimize(
                |x| Ok(-(lie.lf_v(x)? + lie.lg1_v(x)? * alpha_h(x)?)),
                &norm,
                None,
                OptMode::Min,
                &config.budget,
                config.seed,
            )
            .map_err(|source| SynthesisError::Sphere {
                stage: "disturbance-free decrease constant",
                source,
            })?;
            if !(c1w0.value > 0.0) {
                return Err(SynthesisError::NotStabilizing(c1w0.value));
            }
            c1_unperturbed = Some(c1w0.value);
            match maybe_c6 {
                Some(c6) => c6,
                None => {
                    if c8 > 0.0 {
                        c1w0.value / (2.0 * c8)
                    } else {
                        1.0
                    }
                }
            }
        }
    };

    // gamma(s) = (c8/c6) s^2 satisfies the degree-2 transform scaling the
    // auxiliary field needs; with no disturbance coupling any quadratic
    // works.
    let gamma = if c8 > 0.0 {
        PowerKInfinity::new(c8 / c6, 2.0).expect("c8, c6 positive")
    } else {
        PowerKInfinity::new(1.0, 2.0).unwrap()
    };
    debug_assert!(gamma.check_scaling());

    let space = DesignSpace {
        sys: sys.clone(),
        v: v.clone(),
        norm,
        lie,
        config: config.clone(),
        c6,
        c8,
        c8_argpoint: c8_opt.argpoint.coords().to_vec(),
        c1_unperturbed,
        gamma,
        ell: gamma.lf_transform(),
    };
    space.check_sontag_condition()?;
    Ok(space)
}

/// Sontag law for the disturbance-free plant (φ replaced by L_fV); used
/// only to bootstrap constant estimation when no stabilizer is supplied.
fn unperturbed_sontag(
    lie: &LieDerivatives,
    c10: f64,
    norm: &HomogeneousNorm,
    kr0: f64,
    x: &[f64],
) -> EvalResult<f64> {
    if is_origin(x) {
        return Ok(0.0);
    }
    let b = lie.lg1_v(x)?;
    if b.abs() <= TOL_SWITCH * norm.eval(x).powf(kr0) {
        return Ok(0.0);
    }
    let p = lie.lf_v(x)?;
    Ok(-(c10 + sontag_bracket(p, b * b)) * b)
}

impl DesignSpace {
    pub fn system(&self) -> &HomogeneousSystem {
        &self.sys
    }

    pub fn lyapunov(&self) -> &LyapunovCandidate {
        &self.v
    }

    pub fn norm(&self) -> &HomogeneousNorm {
        &self.norm
    }

    pub fn lie(&self) -> &LieDerivatives {
        &self.lie
    }

    pub fn c6(&self) -> f64 {
        self.c6
    }

    pub fn gamma(&self) -> PowerKInfinity {
        self.gamma
    }

    fn kr0(&self) -> f64 {
        self.sys.k + self.sys.r0()
    }

    fn switch_gate(&self, x: &[f64]) -> f64 {
        TOL_SWITCH * self.norm.eval(x).powf(self.kr0())
    }

    /// φ(x) = L_fV + |L_{G₂}V|·c₆·Γ(x)^{k+r₀}, φ(0) = 0; homogeneous of
    /// degree 2(k+r₀).
    pub fn phi(&self, x: &[f64]) -> EvalResult<f64> {
        if is_origin(x) {
            return Ok(0.0);
        }
        let nb2 = norm2(&self.lie.lg2_v(x)?);
        Ok(self.lie.lf_v(x)? + nb2 * self.c6 * self.norm.eval(x).powf(self.kr0()))
    }

    /// The Sontag-type law α_s; zero on the |L_{G₁}V| ≈ 0 branch.
    pub fn sontag(&self, x: &[f64]) -> EvalResult<f64> {
        if is_origin(x) {
            return Ok(0.0);
        }
        let b = self.lie.lg1_v(x)?;
        if b.abs() <= self.switch_gate(x) {
            return Ok(0.0);
        }
        let p = self.phi(x)?;
        Ok(-(self.config.c10 + sontag_bracket(p, b * b)) * b)
    }

    /// R(x) > 0, homogeneous of degree zero, bounded away from zero;
    /// 1/(θ²c₁₀) on the switch branch.
    pub fn weight_r(&self, x: &[f64]) -> EvalResult<f64> {
        let th2 = self.sys.theta * self.sys.theta;
        if is_origin(x) {
            return Ok(1.0 / (th2 * self.config.c10));
        }
        let b = self.lie.lg1_v(x)?;
        if b.abs() <= self.switch_gate(x) {
            return Ok(1.0 / (th2 * self.config.c10));
        }
        let p = self.phi(x)?;
        Ok(1.0 / (th2 * (self.config.c10 + sontag_bracket(p, b * b))))
    }

    /// ℓ_γ(2|L_{G₂}V|); the disturbance contribution the auxiliary field
    /// absorbs.
    pub fn ell_term(&self, x: &[f64]) -> EvalResult<f64> {
        if is_origin(x) {
            return Ok(0.0);
        }
        Ok(self.ell.eval(2.0 * norm2(&self.lie.lg2_v(x)?)))
    }

    /// L_f̃V = L_fV + ℓ_γ(2|L_{G₂}V|).
    pub fn lftilde_v(&self, x: &[f64]) -> EvalResult<f64> {
        if is_origin(x) {
            return Ok(0.0);
        }
        Ok(self.lie.lf_v(x)? + self.ell_term(x)?)
    }

    /// f̃ = f + G₂·ℓ_γ(2|L_{G₂}V|)·L_{G₂}Vᵀ/|L_{G₂}V|², extended by f where
    /// L_{G₂}V = 0; homogeneous of degree k.
    pub fn f_tilde(&self, x: &[f64]) -> EvalResult<Vec<f64>> {
        let mut f = self.sys.eval_f(x)?;
        if is_origin(x) {
            return Ok(f);
        }
        let b2 = self.lie.lg2_v(x)?;
        let nb = norm2(&b2);
        if nb == 0.0 {
            return Ok(f);
        }
        let coef = self.ell.eval(2.0 * nb) / (nb * nb);
        let g2 = self.sys.eval_g2(x)?;
        for (i, fi) in f.iter_mut().enumerate() {
            let corr: f64 = g2[i].iter().zip(&b2).map(|(g, b)| g * coef * b).sum();
            *fi += corr;
        }
        Ok(f)
    }

    /// α at gain κ, the half-gain law −(κ/2θ²)R⁻¹L_{G₁}V = (κ/2)α_s.
    pub fn alpha_at(&self, kappa: f64, x: &[f64]) -> EvalResult<f64> {
        Ok(0.5 * kappa * self.sontag(x)?)
    }

    fn h_r_h(&self, x: &[f64]) -> EvalResult<f64> {
        let h = self.sys.eval_h(x)?;
        Ok(self.weight_r(x)? * h.iter().map(|v| v * v).sum::<f64>())
    }

    /// The Sontag law is continuous only if φ < 0 wherever L_{G₁}V
    /// vanishes; violations mean V is not a valid CLF for the perturbed
    /// problem.
    pub fn check_sontag_condition(&self) -> Result<(), SynthesisError> {
        let mut bad = Vec::new();
        for p in sphere_sample(&self.norm, self.config.budget.samples, self.config.seed) {
            let x = p.coords();
            let b = self.lie.lg1_v(x).map_err(|source| SynthesisError::Eval {
                stage: "Sontag condition",
                point: x.to_vec(),
                source,
            })?;
            if b.abs() <= TOL_SONTAG_GATE {
                let phi = self.phi(x).map_err(|source| SynthesisError::Eval {
                    stage: "Sontag condition",
                    point: x.to_vec(),
                    source,
                })?;
                if phi > -1e-9 {
                    bad.push(x.to_vec());
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(SynthesisError::SontagCondition { points: bad })
        }
    }

    fn q0_member<'a>(&'a self) -> Result<impl Fn(&[f64]) -> bool + 'a, SynthesisError> {
        let q = self
            .config
            .q0_predicate
            .as_ref()
            .ok_or(SynthesisError::MissingQ0)?;
        Ok(move |x: &[f64]| q.eval(&Env::state(x)).map(|v| v >= 0.0).unwrap_or(false))
    }

    /// Sampled check that Q₀ covers the switch set and that the auxiliary
    /// field strictly decreases V on cl(Q₀).
    pub fn validate_q0(&self) -> Result<Q0Report, SynthesisError> {
        let member = self.q0_member()?;
        let mut uncovered = Vec::new();
        let mut non_decreasing = Vec::new();
        let samples = sphere_sample(&self.norm, self.config.budget.samples, self.config.seed);
        let checked = samples.len();
        for p in samples {
            let x = p.coords();
            let b = self.lie.lg1_v(x).map_err(|source| SynthesisError::Eval {
                stage: "Q0 validation",
                point: x.to_vec(),
                source,
            })?;
            let inside = member(x);
            if b.abs() <= TOL_SONTAG_GATE && !inside {
                uncovered.push(x.to_vec());
            }
            if inside {
                let dec = self.lftilde_v(x).map_err(|source| SynthesisError::Eval {
                    stage: "Q0 validation",
                    point: x.to_vec(),
                    source,
                })?;
                if dec >= 0.0 {
                    non_decreasing.push(x.to_vec());
                }
            }
        }
        Ok(Q0Report {
            pass: uncovered.is_empty() && non_decreasing.is_empty(),
            uncovered_switch_points: uncovered,
            non_decreasing_points: non_decreasing,
            checked,
        })
    }

    /// All sphere constants: the decrease/bound chain c₁…c₉ and the
    /// ρ-family driving gain selection. Each value is a refined extremum
    /// over the sphere or the stated subset.
    pub fn estimate_constants(&self) -> Result<SphereConstants, SynthesisError> {
        let member = self.q0_member()?;
        let not_member = |x: &[f64]| !member(x);
        let budget = &self.config.budget;
        let seed = self.config.seed;
        let mut argpoints = BTreeMap::new();

        // Stabilizer for c1/c9: the supplied one, or the Sontag law at
        // unit trial gain (kappa = 1).
        let alpha_est = |x: &[f64]| -> EvalResult<f64> {
            match &self.config.known_stabilizer {
                Some(e) => e.eval(&Env::state(x)),
                None => self.alpha_at(1.0, x),
            }
        };

        let run = |name: &'static str,
                   mode: OptMode,
                   constraint: Option<crate::homogeneity::Constraint>,
                   f: &dyn Fn(&[f64]) -> EvalResult<f64>|
         -> Result<(f64, Vec<f64>), SynthesisError> {
            let r = sphere_optimize(f, &self.norm, constraint, mode, budget, seed).map_err(
                |source| SynthesisError::Sphere {
                    stage: name,
                    source,
                },
            )?;
            Ok((r.value, r.argpoint.coords().to_vec()))
        };

        let (c1, c1_pt) = run(
            "c1 = min -[L_ftilde V + L_G1 V alpha]",
            OptMode::Min,
            None,
            &|x| Ok(-(self.lftilde_v(x)? + self.lie.lg1_v(x)? * alpha_est(x)?)),
        )?;
        argpoints.insert("c1".to_string(), c1_pt);
        let c2 = self.c8;
        argpoints.insert("c2".to_string(), self.c8_argpoint.clone());

        // c9 bounds |alpha_h| by |L_G1 V| where phi >= 0 (there L_G1 V
        // cannot vanish); an empty region makes the bound vacuous.
        let phi_nonneg = |x: &[f64]| self.phi(x).map(|p| p >= 0.0).unwrap_or(false);
        let c9 = match run(
            "min |L_G1 V| where phi >= 0",
            OptMode::Min,
            Some(&phi_nonneg),
            &|x| Ok(self.lie.lg1_v(x)?.abs()),
        ) {
            Ok((min_b, pt)) => {
                let (max_a, a_pt) = run("max |alpha_h|", OptMode::Max, None, &|x| {
                    Ok(alpha_est(x)?.abs())
                })?;
                argpoints.insert("c9_min_lg1v".to_string(), pt);
                argpoints.insert("c9_max_alpha".to_string(), a_pt);
                if min_b > 0.0 {
                    max_a / min_b
                } else {
                    f64::INFINITY
                }
            }
            Err(SynthesisError::Sphere {
                source: SphereOptError::EmptyConstraintSet { .. },
                ..
            }) => 0.0,
            Err(e) => return Err(e),
        };

        let (rho1, p1) = run(
            "rho1 = min -L_ftilde V over S ∩ cl(Q0)",
            OptMode::Min,
            Some(&member),
            &|x| Ok(-self.lftilde_v(x)?),
        )?;
        argpoints.insert("rho1".to_string(), p1);
        if !(rho1 > 0.0) {
            return Err(SynthesisError::NonPositiveRho1(rho1));
        }
        let (rho2, p2) = run(
            "rho2 = max h'Rh over S ∩ cl(Q0)",
            OptMode::Max,
            Some(&member),
            &|x| self.h_r_h(x),
        )?;
        argpoints.insert("rho2".to_string(), p2);
        let (rho3, p3) = run(
            "rho3 = min L_G1 V R^-1 L_G1 V over S \\ Q0",
            OptMode::Min,
            Some(&not_member),
            &|x| {
                let b = self.lie.lg1_v(x)?;
                Ok(b * b / self.weight_r(x)?)
            },
        )?;
        argpoints.insert("rho3".to_string(), p3);
        if !(rho3 > 0.0) {
            return Err(SynthesisError::NonPositiveRho3(rho3));
        }
        let (rho4, p4) = run(
            "rho4 = max h'Rh over S \\ Q0",
            OptMode::Max,
            Some(&not_member),
            &|x| self.h_r_h(x),
        )?;
        argpoints.insert("rho4".to_string(), p4);
        let (rho, p) = run(
            "rho = max L_ftilde V over S \\ Q0",
            OptMode::Max,
            Some(&not_member),
            &|x| self.lftilde_v(x),
        )?;
        argpoints.insert("rho".to_string(), p);
        let (rho_m, pm) = run("rho_m = min R over S", OptMode::Min, None, &|x| {
            self.weight_r(x)
        })?;
        argpoints.insert("rho_m".to_string(), pm);

        let th2 = self.sys.theta * self.sys.theta;
        let kappa_c = rho2 / rho1;
        let kappa1 = th2 * (rho + (rho * rho + 2.0 * rho3 * rho4 / th2).sqrt()) / rho3;

        let chain_seed = self.c1_unperturbed.unwrap_or(c1);
        let c3 = chain_seed / 2.0;
        let c4 = 2.0 * c2 * c2 / chain_seed;
        let c5 = (c4 / c3).sqrt();
        let kr0 = self.kr0();
        let c7 = if self.c8 > 0.0 {
            (1.0 / self.c8).powf(1.0 / kr0)
        } else {
            1.0
        };

        let constants = SphereConstants {
            c1,
            c2,
            c3,
            c4,
            c5,
            c6: self.c6,
            c7,
            c8: self.c8,
            c9,
            rho1,
            rho2,
            rho3,
            rho4,
            rho,
            rho_m,
            kappa_c,
            kappa1,
            c1_unperturbed: self.c1_unperturbed,
            argpoints,
        };
        for (name, value) in [
            ("c1", c1),
            ("kappa_c", kappa_c),
            ("kappa1", kappa1),
            ("rho_m", rho_m),
        ] {
            if !value.is_finite() {
                return Err(SynthesisError::NonFinite {
                    name: match name {
                        "c1" => "c1",
                        "kappa_c" => "kappa_c",
                        "kappa1" => "kappa1",
                        _ => "rho_m",
                    },
                    value,
                });
            }
        }
        Ok(constants)
    }

    /// Finish assembly at an explicit gain; `synthesize` picks the gain
    /// from the constants instead.
    pub fn into_controller(
        self,
        constants: SphereConstants,
        kappa: f64,
    ) -> Result<SynthesizedController, SynthesisError> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(SynthesisError::NonFinite {
                name: "kappa",
                value: kappa,
            });
        }
        let mut ctl = SynthesizedController {
            beta: self.config.beta,
            lambda: self.config.lambda,
            kappa,
            constants,
            space: self,
        };
        // Re-measure the auxiliary decrease at the final gain; this is the
        // constant the ISS bound runs with.
        let (c1_final, c1_pt) = {
            let r = sphere_optimize(
                |x| Ok(-(ctl.space.lftilde_v(x)? + ctl.space.lie.lg1_v(x)? * ctl.alpha(x)?)),
                &ctl.space.norm,
                None,
                OptMode::Min,
                &ctl.space.config.budget,
                ctl.space.config.seed,
            )
            .map_err(|source| SynthesisError::Sphere {
                stage: "decrease constant at the selected gain",
                source,
            })?;
            (r.value, r.argpoint.coords().to_vec())
        };
        if !(c1_final > 0.0) {
            return Err(SynthesisError::DecreaseViolated {
                point: c1_pt,
                rate: -c1_final,
                bound: 0.0,
            });
        }
        ctl.constants.c1 = c1_final;
        ctl.constants.argpoints.insert("c1".to_string(), c1_pt);

        // Every sampled sphere point must meet the decrease at the
        // measured constant.
        let bound = -c1_final * (1.0 - 1e-6);
        for p in sphere_sample(
            &ctl.space.norm,
            ctl.space.config.budget.samples,
            ctl.space.config.seed,
        ) {
            let x = p.coords();
            let rate = ctl
                .space
                .lftilde_v(x)
                .map_err(|source| SynthesisError::Eval {
                    stage: "decrease assertion",
                    point: x.to_vec(),
                    source,
                })?
                + ctl
                    .space
                    .lie
                    .lg1_v(x)
                    .map_err(|source| SynthesisError::Eval {
                        stage: "decrease assertion",
                        point: x.to_vec(),
                        source,
                    })?
                    * ctl.alpha(x).map_err(|source| SynthesisError::Eval {
                        stage: "decrease assertion",
                        point: x.to_vec(),
                        source,
                    })?;
            if rate > bound {
                return Err(SynthesisError::DecreaseViolated {
                    point: x.to_vec(),
                    rate,
                    bound,
                });
            }
        }
        Ok(ctl)
    }
}

/// κ = max(κ_c, κ₁, 1)·(1 + margin).
pub fn select_kappa(
    constants: &SphereConstants,
    config: &SynthesisConfig,
) -> Result<f64, SynthesisError> {
    let floor = constants.kappa_c.max(constants.kappa1).max(1.0);
    if !floor.is_finite() {
        return Err(SynthesisError::NonFinite {
            name: "kappa lower bound",
            value: floor,
        });
    }
    Ok(floor * (1.0 + config.kappa_margin))
}

#[derive(Clone, Debug, Serialize)]
pub struct Q0Report {
    pub pass: bool,
    /// Sphere points where L_{G₁}V ~ 0 but the predicate does not hold.
    pub uncovered_switch_points: Vec<Vec<f64>>,
    /// Predicate points where L_f̃V fails to be negative.
    pub non_decreasing_points: Vec<Vec<f64>>,
    pub checked: usize,
}

/// Full pipeline: φ, the Sontag law, R, γ, f̃, sphere constants, gain
/// selection, and the assembled controller with its cost pieces.
pub fn synthesize(
    sys: &HomogeneousSystem,
    v: &LyapunovCandidate,
    nu: f64,
    config: &SynthesisConfig,
) -> Result<SynthesizedController, SynthesisError> {
    let space = prepare(sys, v, nu, config)?;
    let q0 = space.validate_q0()?;
    if !q0.pass {
        let (reason, witnesses) = if !q0.uncovered_switch_points.is_empty() {
            (
                "Q0 misses points where L_G1 V vanishes".to_string(),
                q0.uncovered_switch_points,
            )
        } else {
            (
                "L_ftilde V is not negative everywhere on Q0".to_string(),
                q0.non_decreasing_points,
            )
        };
        return Err(SynthesisError::InvalidQ0 { reason, witnesses });
    }
    let constants = space.estimate_constants()?;
    let kappa = select_kappa(&constants, config)?;
    space.into_controller(constants, kappa)
}

/// Same pipeline with the gain pinned by the caller instead of selected
/// from the constants.
pub fn synthesize_with_kappa(
    sys: &HomogeneousSystem,
    v: &LyapunovCandidate,
    nu: f64,
    config: &SynthesisConfig,
    kappa: f64,
) -> Result<SynthesizedController, SynthesisError> {
    let space = prepare(sys, v, nu, config)?;
    let q0 = space.validate_q0()?;
    if !q0.pass {
        return Err(SynthesisError::InvalidQ0 {
            reason: "Q0 validation failed".to_string(),
            witnesses: q0.uncovered_switch_points,
        });
    }
    let constants = space.estimate_constants()?;
    space.into_controller(constants, kappa)
}

/// The assembled inverse-optimal controller and all of its cost pieces.
/// Immutable and freely shareable; every method is pure.
#[derive(Clone, Debug)]
pub struct SynthesizedController {
    space: DesignSpace,
    pub kappa: f64,
    pub beta: f64,
    pub lambda: f64,
    pub constants: SphereConstants,
}

impl SynthesizedController {
    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn system(&self) -> &HomogeneousSystem {
        &self.space.sys
    }

    pub fn lyapunov(&self) -> &LyapunovCandidate {
        &self.space.v
    }

    pub fn norm(&self) -> &HomogeneousNorm {
        &self.space.norm
    }

    pub fn lie(&self) -> &LieDerivatives {
        &self.space.lie
    }

    pub fn gamma(&self) -> PowerKInfinity {
        self.space.gamma
    }

    pub fn c10(&self) -> f64 {
        self.space.config.c10
    }

    pub fn phi(&self, x: &[f64]) -> EvalResult<f64> {
        self.space.phi(x)
    }

    pub fn sontag(&self, x: &[f64]) -> EvalResult<f64> {
        self.space.sontag(x)
    }

    pub fn weight_r(&self, x: &[f64]) -> EvalResult<f64> {
        self.space.weight_r(x)
    }

    pub fn f_tilde(&self, x: &[f64]) -> EvalResult<Vec<f64>> {
        self.space.f_tilde(x)
    }

    pub fn lftilde_v(&self, x: &[f64]) -> EvalResult<f64> {
        self.space.lftilde_v(x)
    }

    /// α = −(κ/2θ²)·R⁻¹·L_{G₁}V, the half-gain law.
    pub fn alpha(&self, x: &[f64]) -> EvalResult<f64> {
        self.space.alpha_at(self.kappa, x)
    }

    /// α* = β·α, the inverse-optimal feedback.
    pub fn alpha_star(&self, x: &[f64]) -> EvalResult<f64> {
        Ok(self.beta * self.space.alpha_at(self.kappa, x)?)
    }

    /// H_κ = −κ[L_f̃V + L_{G₁}V·α] − hᵀRh; positive definite for the
    /// selected gain, homogeneous of degree 2(k+r₀).
    pub fn h_kappa(&self, x: &[f64]) -> EvalResult<f64> {
        if is_origin(x) {
            return Ok(0.0);
        }
        let dec = self.space.lftilde_v(x)? + self.space.lie.lg1_v(x)? * self.alpha(x)?;
        Ok(-self.kappa * dec - self.space.h_r_h(x)?)
    }

    /// M = ½[−φ + √(φ² + (L_{G₁}V)⁴)]; the positive-definite part of the
    /// auxiliary decrease.
    pub fn m(&self, x: &[f64]) -> EvalResult<f64> {
        if is_origin(x) {
            return Ok(0.0);
        }
        let p = self.space.phi(x)?;
        let b = self.space.lie.lg1_v(x)?;
        Ok(m_bracket(p, b * b))
    }

    /// M₁ = (κ−1)/2·[φ + √(φ² + (L_{G₁}V)⁴)] + (κ/2)c₁₀(L_{G₁}V)².
    pub fn m1(&self, x: &[f64]) -> EvalResult<f64> {
        if is_origin(x) {
            return Ok(0.0);
        }
        let p = self.space.phi(x)?;
        let b = self.space.lie.lg1_v(x)?;
        let b2 = b * b;
        Ok(0.5 * (self.kappa - 1.0) * sontag_bracket(p, b2) * b2
            + 0.5 * self.kappa * self.space.config.c10 * b2)
    }

    /// l̄ = −2β(L_f̃V + L_{G₁}V·α) + β(2−λ)ℓ_γ(2|L_{G₂}V|)
    ///     − β(β−2)L_{G₁}V·α, with l̄(0) = 0.
    pub fn l_bar(&self, x: &[f64]) -> EvalResult<f64> {
        if is_origin(x) {
            return Ok(0.0);
        }
        let a = self.alpha(x)?;
        let ba = self.space.lie.lg1_v(x)? * a;
        let dec = self.space.lftilde_v(x)? + ba;
        Ok(
            -2.0 * self.beta * dec + self.beta * (2.0 - self.lambda) * self.space.ell_term(x)?
                - self.beta * (self.beta - 2.0) * ba,
        )
    }

    /// The state penalty l = l̄ − hᵀRh/κ; positive definite for the
    /// selected gain.
    pub fn state_penalty(&self, x: &[f64]) -> EvalResult<f64> {
        if is_origin(x) {
            return Ok(0.0);
        }
        Ok(self.l_bar(x)? - self.space.h_r_h(x)? / self.kappa)
    }

    /// Terminal weight E = 2βV.
    pub fn terminal_e(&self, x: &[f64]) -> EvalResult<f64> {
        Ok(2.0 * self.beta * self.space.v.eval(x)?)
    }

    /// Control weight R₁ = θ²R/κ.
    pub fn r1(&self, x: &[f64]) -> EvalResult<f64> {
        let th2 = self.space.sys.theta * self.space.sys.theta;
        Ok(th2 * self.space.weight_r(x)? / self.kappa)
    }

    /// Output weight R₂ = R/κ.
    pub fn r2(&self, x: &[f64]) -> EvalResult<f64> {
        Ok(self.space.weight_r(x)? / self.kappa)
    }

    /// Disturbance penalty γ₀(s) = βλ·γ(s/λ), still a power law.
    pub fn gamma0(&self) -> PowerKInfinity {
        let a = self.space.gamma.coefficient();
        let p = self.space.gamma.exponent();
        PowerKInfinity::new(self.beta * a * self.lambda.powf(1.0 - p), p)
            .expect("positive coefficient, exponent > 1")
    }

    /// y = h(x) + d·u.
    pub fn output(&self, x: &[f64], u: f64) -> EvalResult<Vec<f64>> {
        self.space.sys.output(x, u)
    }
}
