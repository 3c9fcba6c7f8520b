//! Closed-loop trajectory integration, disturbance generators (including
//! the exact worst case from the Young-equality condition), finite-horizon
//! cost evaluation, pathwise cost identities, and L₂-gain measurement.
//!
//! The integrator is an adaptive Dormand-Prince 5(4) forced to land on a
//! uniform output grid, so quadrature runs on dense, exact nodes. Closed
//! loops here are continuous but can fail to be Lipschitz at the origin
//! (fractional powers); once Γ(x) drops below 1e-9 the state is clamped to
//! zero, which realizes the extension-by-zero limits and keeps the step
//! size from collapsing.

use crate::expr::{Env, EvalError, EvalResult, Expr};
use crate::homogeneity::HomogeneousNorm;
use crate::lft::PowerKInfinity;
use crate::synthesis::SynthesizedController;
use crate::sysdef::{HomogeneousSystem, LieDerivatives, LyapunovCandidate};
use serde::{Deserialize, Serialize};

pub const ORIGIN_CLAMP: f64 = 1e-9;

/// Disturbance signal menu. `WorstCase` is the Young-equality achiever fed
/// back from the state; it maximizes the disturbance term of the cost
/// pointwise, so no numerical game solving is needed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DisturbanceSpec {
    Zero,
    Constant {
        value: Vec<f64>,
    },
    /// w_j(t) = amplitude_j · sin(frequency·t + phase) · e^{−decay·t}.
    Sinusoid {
        amplitude: Vec<f64>,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        decay: f64,
    },
    /// w*(x) = λ·(γ')⁻¹(2|L_{G₂}V|)·L_{G₂}Vᵀ/|L_{G₂}V|.
    WorstCase {
        lambda: f64,
        gamma: (f64, f64), // (coefficient, exponent)
    },
    /// One expression per disturbance channel, in x1..xn and t.
    Custom {
        exprs: Vec<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("step size underflow at t = {t} (state {state:?}); right-hand side may blow up")]
    StepSizeUnderflow { t: f64, state: Vec<f64> },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("evaluation failed at t = {t}, x = {x:?}: {source}")]
    Eval {
        t: f64,
        x: Vec<f64>,
        source: EvalError,
    },
    #[error("horizon {wanted} is not a node of the trajectory (last {available})")]
    HorizonMismatch { wanted: f64, available: f64 },
    #[error("disturbance spec error: {0}")]
    BadDisturbance(String),
    #[error("worst-case disturbance needs check_scaling or a power-law gamma")]
    BadGamma,
}

/// The Young-equality disturbance w*(x); zero where L_{G₂}V vanishes.
/// It makes Δ_w = β(2L_{G₂}V·w − λℓ_γ(2|L_{G₂}V|) − λγ(|w|/λ)) vanish
/// exactly, realizing the sup over disturbances pointwise.
pub fn worst_case_w(
    lie: &LieDerivatives,
    gamma: &PowerKInfinity,
    lambda: f64,
    x: &[f64],
) -> EvalResult<Vec<f64>> {
    let b = lie.lg2_v(x)?;
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let r = lambda * gamma.derivative_inv(2.0 * nb);
    Ok(b.iter().map(|bi| bi * r / nb).collect())
}

/// Δ_w at (x, w); ≤ 0 always, = 0 at w = w*(x).
pub fn delta_w(
    lie: &LieDerivatives,
    gamma: &PowerKInfinity,
    beta: f64,
    lambda: f64,
    x: &[f64],
    w: &[f64],
) -> EvalResult<f64> {
    let b = lie.lg2_v(x)?;
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nw = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dot: f64 = b.iter().zip(w).map(|(a, c)| a * c).sum();
    let ell = gamma.lf_transform();
    Ok(beta * (2.0 * dot - lambda * ell.eval(2.0 * nb) - lambda * gamma.eval(nw / lambda)))
}

/// Time- and state-dependent signal w(t, x).
pub type SignalFn<'a> = Box<dyn Fn(f64, &[f64]) -> EvalResult<Vec<f64>> + 'a>;

/// Runtime form of a disturbance.
pub enum Disturbance<'a> {
    Fixed(Vec<f64>),
    Signal(SignalFn<'a>),
}

impl DisturbanceSpec {
    /// Compile to an evaluator; `lie` is required for the worst case.
    pub fn compile<'a>(
        &'a self,
        xi: usize,
        lie: Option<&'a LieDerivatives>,
    ) -> Result<Disturbance<'a>, SimError> {
        match self {
            DisturbanceSpec::Zero => Ok(Disturbance::Fixed(vec![0.0; xi])),
            DisturbanceSpec::Constant { value } => {
                if value.len() != xi {
                    return Err(SimError::BadDisturbance(format!(
                        "constant disturbance has {} entries, plant expects {}",
                        value.len(),
                        xi
                    )));
                }
                Ok(Disturbance::Fixed(value.clone()))
            }
            DisturbanceSpec::Sinusoid {
                amplitude,
                frequency,
                phase,
                decay,
            } => {
                if amplitude.len() != xi {
                    return Err(SimError::BadDisturbance(format!(
                        "sinusoid amplitude has {} entries, plant expects {}",
                        amplitude.len(),
                        xi
                    )));
                }
                let (amplitude, frequency, phase, decay) =
                    (amplitude.clone(), *frequency, *phase, *decay);
                Ok(Disturbance::Signal(Box::new(move |t, _x| {
                    let s = (frequency * t + phase).sin() * (-decay * t).exp();
                    Ok(amplitude.iter().map(|a| a * s).collect())
                })))
            }
            DisturbanceSpec::WorstCase { lambda, gamma } => {
                let lie = lie.ok_or_else(|| {
                    SimError::BadDisturbance(
                        "worst-case disturbance needs Lie derivatives".to_string(),
                    )
                })?;
                let g = PowerKInfinity::new(gamma.0, gamma.1).map_err(|_| SimError::BadGamma)?;
                let lambda = *lambda;
                Ok(Disturbance::Signal(Box::new(move |_t, x| {
                    worst_case_w(lie, &g, lambda, x)
                })))
            }
            DisturbanceSpec::Custom { exprs } => {
                if exprs.len() != xi {
                    return Err(SimError::BadDisturbance(format!(
                        "custom disturbance has {} channels, plant expects {}",
                        exprs.len(),
                        xi
                    )));
                }
                let parsed: Result<Vec<Expr>, _> =
                    exprs.iter().map(|s| crate::expr::parse(s)).collect();
                let parsed =
                    parsed.map_err(|e| SimError::BadDisturbance(format!("bad expression: {e}")))?;
                Ok(Disturbance::Signal(Box::new(move |t, x| {
                    parsed
                        .iter()
                        .map(|e| e.eval(&Env::with_time(x, t)))
                        .collect()
                })))
            }
        }
    }
}

impl Disturbance<'_> {
    pub fn at(&self, t: f64, x: &[f64]) -> EvalResult<Vec<f64>> {
        match self {
            Disturbance::Fixed(v) => Ok(v.clone()),
            Disturbance::Signal(f) => f(t, x),
        }
    }
}

/// Dense closed-loop trajectory on a uniform grid.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub v_vals: Vec<f64>,
    pub terminated_at_origin: bool,
}

impl Trajectory {
    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().unwrap()
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate ẋ = f + G₁u(x) + G₂w(t,x) over [0, t_final] with per-step
/// relative tolerance `tol` (absolute floor tol·1e-3), producing at least
/// `min_nodes` uniform output intervals. Steps land exactly on the output
/// nodes.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    sys: &HomogeneousSystem,
    v: &LyapunovCandidate,
    norm: &HomogeneousNorm,
    control: impl Fn(&[f64]) -> EvalResult<f64>,
    dist: &Disturbance,
    x0: &[f64],
    t_final: f64,
    tol: f64,
    min_nodes: usize,
) -> Result<Trajectory, SimError> {
    assert!(t_final > 0.0 && tol > 0.0);
    let n = sys.n();
    let intervals = min_nodes.max(1000);
    // even interval count so composite Simpson applies directly
    let intervals = if intervals.is_multiple_of(2) {
        intervals
    } else {
        intervals + 1
    };
    let dt_out = t_final / intervals as f64;

    let rhs = |t: f64, x: &[f64]| -> Result<Vec<f64>, SimError> {
        let u = control(x).map_err(|source| SimError::Eval {
            t,
            x: x.to_vec(),
            source,
        })?;
        let w = dist.at(t, x).map_err(|source| SimError::Eval {
            t,
            x: x.to_vec(),
            source,
        })?;
        sys.dynamics(x, u, &w).map_err(|source| SimError::Eval {
            t,
            x: x.to_vec(),
            source,
        })
    };

    let record = |t: f64, x: &[f64], traj: &mut Trajectory| -> Result<(), SimError> {
        let u = control(x).map_err(|source| SimError::Eval {
            t,
            x: x.to_vec(),
            source,
        })?;
        let w = dist.at(t, x).map_err(|source| SimError::Eval {
            t,
            x: x.to_vec(),
            source,
        })?;
        let y = sys.output(x, u).map_err(|source| SimError::Eval {
            t,
            x: x.to_vec(),
            source,
        })?;
        let vv = v.eval(x).map_err(|source| SimError::Eval {
            t,
            x: x.to_vec(),
            source,
        })?;
        traj.times.push(t);
        traj.states.push(x.to_vec());
        traj.u.push(u);
        traj.w.push(w);
        traj.y.push(y);
        traj.v_vals.push(vv);
        Ok(())
    };

    let mut traj = Trajectory {
        times: Vec::with_capacity(intervals + 1),
        states: Vec::with_capacity(intervals + 1),
        u: Vec::with_capacity(intervals + 1),
        w: Vec::with_capacity(intervals + 1),
        y: Vec::with_capacity(intervals + 1),
        v_vals: Vec::with_capacity(intervals + 1),
        terminated_at_origin: false,
    };

    let atol = tol * 1e-3;
    let mut x = x0.to_vec();
    let mut t = 0.0;
    record(t, &x, &mut traj)?;
    let mut h = (dt_out / 8.0).min(t_final * 1e-3);
    let h_min = t_final * 1e-15;
    let mut k1 = rhs(t, &x)?; // FSAL

    for node in 1..=intervals {
        let t_node = node as f64 * dt_out;
        if traj.terminated_at_origin {
            // parked at the origin: inputs take their limits there
            x = vec![0.0; n];
            record(t_node, &x, &mut traj)?;
            continue;
        }
        while t < t_node - 1e-14 * t_final {
            let h_try = h.min(t_node - t);
            let mut k = vec![k1.clone()];
            for stage in 0..6 {
                let mut xs = x.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = A[stage][j];
                    if a != 0.0 {
                        for i in 0..n {
                            xs[i] += h_try * a * kj[i];
                        }
                    }
                }
                k.push(rhs(t + C[stage] * h_try, &xs)?);
            }
            let mut x5 = x.clone();
            let mut err_sq = 0.0;
            for i in 0..n {
                let mut d5 = 0.0;
                let mut d4 = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    d5 += B5[j] * kj[i];
                    d4 += B4[j] * kj[i];
                }
                x5[i] += h_try * d5;
                let sc = atol + tol * x[i].abs().max(x5[i].abs());
                let e = h_try * (d5 - d4) / sc;
                err_sq += e * e;
            }
            let err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                return Err(SimError::NonFinite { t });
            }
            if err <= 1.0 {
                t += h_try;
                x = x5;
                if x.iter().any(|c| !c.is_finite()) {
                    return Err(SimError::NonFinite { t });
                }
                k1 = k.pop().unwrap(); // FSAL: stage 7 is f(t+h, x5)
                if norm.eval(&x) < ORIGIN_CLAMP {
                    x = vec![0.0; n];
                    traj.terminated_at_origin = true;
                    k1 = vec![0.0; n];
                    break;
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h_try * factor).min(t_final);
            if h < h_min {
                return Err(SimError::StepSizeUnderflow {
                    t,
                    state: x.clone(),
                });
            }
        }
        t = t_node;
        record(t, &x, &mut traj)?;
    }
    Ok(traj)
}

/// Pointwise cost piece f(x).
pub type PieceFn<'a> = &'a dyn Fn(&[f64]) -> EvalResult<f64>;

/// Closed-form cost pieces used for finite-horizon evaluation.
pub struct CostModel<'a> {
    pub e: PieceFn<'a>,
    pub l: PieceFn<'a>,
    pub r1: PieceFn<'a>,
    /// None drops the output penalty entirely.
    pub r2: Option<PieceFn<'a>>,
    pub gamma0: PowerKInfinity,
}

impl SynthesizedController {
    /// The synthesized pieces as a cost model (all owned closures borrow
    /// from self).
    #[allow(clippy::type_complexity)]
    pub fn cost_integrands(
        &self,
    ) -> (
        impl Fn(&[f64]) -> EvalResult<f64> + '_,
        impl Fn(&[f64]) -> EvalResult<f64> + '_,
        impl Fn(&[f64]) -> EvalResult<f64> + '_,
        impl Fn(&[f64]) -> EvalResult<f64> + '_,
    ) {
        (
            move |x: &[f64]| self.terminal_e(x),
            move |x: &[f64]| self.state_penalty(x),
            move |x: &[f64]| self.r1(x),
            move |x: &[f64]| self.r2(x),
        )
    }
}

/// J_T and its parts: terminal + ∫l + ∫uᵀR₁u + ∫yᵀR₂y − ∫γ₀(|w|).
#[derive(Clone, Debug, Serialize)]
pub struct CostBreakdown {
    pub horizon: f64,
    pub terminal: f64,
    pub int_l: f64,
    pub int_u_r1: f64,
    pub int_y_r2: f64,
    pub int_gamma0: f64,
    pub total: f64,
}

fn simpson(times: &[f64], values: &[f64]) -> f64 {
    let m = times.len();
    debug_assert!(m >= 3 && m % 2 == 1, "need an even interval count");
    let h = times[1] - times[0];
    let mut acc = values[0] + values[m - 1];
    for (i, v) in values.iter().enumerate().take(m - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Composite-Simpson cost over the trajectory's own grid up to `horizon`
/// (which must be a grid node).
pub fn evaluate_cost(
    traj: &Trajectory,
    model: &CostModel,
    horizon: f64,
) -> Result<CostBreakdown, SimError> {
    let dt = traj.times[1] - traj.times[0];
    let idx = (horizon / dt).round() as usize;
    if idx >= traj.times.len() || (traj.times[idx] - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(SimError::HorizonMismatch {
            wanted: horizon,
            available: traj.end_time(),
        });
    }
    // Simpson needs an even interval count over [0, horizon].
    let idx = if idx.is_multiple_of(2) {
        idx
    } else {
        idx.saturating_sub(1)
    };
    let upto = idx + 1;

    let at = |x: &[f64], source| SimError::Eval {
        t: 0.0,
        x: x.to_vec(),
        source,
    };
    let mut l_vals = Vec::with_capacity(upto);
    let mut u_vals = Vec::with_capacity(upto);
    let mut y_vals = Vec::with_capacity(upto);
    let mut g_vals = Vec::with_capacity(upto);
    for i in 0..upto {
        let x = &traj.states[i];
        l_vals.push((model.l)(x).map_err(|e| at(x, e))?);
        let r1 = (model.r1)(x).map_err(|e| at(x, e))?;
        u_vals.push(traj.u[i] * traj.u[i] * r1);
        match model.r2 {
            Some(r2) => {
                let r2v = r2(x).map_err(|e| at(x, e))?;
                y_vals.push(r2v * traj.y[i].iter().map(|v| v * v).sum::<f64>());
            }
            None => y_vals.push(0.0),
        }
        let wn = traj.w[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        g_vals.push(model.gamma0.eval(wn));
    }
    let times = &traj.times[..upto];
    let xf = &traj.states[upto - 1];
    let terminal = (model.e)(xf).map_err(|e| at(xf, e))?;
    let int_l = simpson(times, &l_vals);
    let int_u_r1 = simpson(times, &u_vals);
    let int_y_r2 = simpson(times, &y_vals);
    let int_gamma0 = simpson(times, &g_vals);
    Ok(CostBreakdown {
        horizon: traj.times[upto - 1],
        terminal,
        int_l,
        int_u_r1,
        int_y_r2,
        int_gamma0,
        total: terminal + int_l + int_u_r1 + int_y_r2 - int_gamma0,
    })
}

/// L₂ norms of y and w over the trajectory by the same quadrature.
pub fn l2_norms(traj: &Trajectory) -> (f64, f64) {
    let y_sq: Vec<f64> = traj
        .y
        .iter()
        .map(|y| y.iter().map(|v| v * v).sum::<f64>())
        .collect();
    let w_sq: Vec<f64> = traj
        .w
        .iter()
        .map(|w| w.iter().map(|v| v * v).sum::<f64>())
        .collect();
    let m = if traj.times.len() % 2 == 1 {
        traj.times.len()
    } else {
        traj.times.len() - 1
    };
    (
        simpson(&traj.times[..m], &y_sq[..m]).max(0.0).sqrt(),
        simpson(&traj.times[..m], &w_sq[..m]).max(0.0).sqrt(),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct L2Report {
    pub y_norm: f64,
    pub w_norm: f64,
    pub kappa_l: f64,
    pub c0: f64,
    pub bound: f64,
    pub pass: bool,
}

/// ‖y‖₂ ≤ κ_L‖w‖₂ + c₀ over the trajectory horizon.
pub fn l2_gain_check(traj: &Trajectory, kappa_l: f64, c0: f64, tol: f64) -> L2Report {
    let (y_norm, w_norm) = l2_norms(traj);
    let bound = kappa_l * w_norm + c0;
    L2Report {
        y_norm,
        w_norm,
        kappa_l,
        c0,
        bound,
        pass: y_norm <= bound + tol,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CostIdentitySubcheck {
    pub label: String,
    pub j_t: f64,
    pub reference: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CostIdentityReport {
    pub optimum: f64,
    pub checks: Vec<CostIdentitySubcheck>,
    pub pass: bool,
}

/// Pathwise optimality of the synthesized loop over a finite horizon:
/// (a) under (α*, w*) the cost equals 2βV(x₀);
/// (b) under α* with benign disturbances it never exceeds 2βV(x₀);
/// (c) under scaled feedback g·α* (g ≠ 1) with w* it never goes below.
pub fn cost_identity_check(
    ctl: &SynthesizedController,
    x0: &[f64],
    horizon: f64,
    tol: f64,
    integrator_tol: f64,
    min_nodes: usize,
) -> Result<CostIdentityReport, SimError> {
    let sys = ctl.system();
    let v = ctl.lyapunov();
    let norm = ctl.norm();
    let optimum = 2.0
        * ctl.beta
        * v.eval(x0).map_err(|source| SimError::Eval {
            t: 0.0,
            x: x0.to_vec(),
            source,
        })?;
    let (e, l, r1, r2) = ctl.cost_integrands();
    let model = CostModel {
        e: &e,
        l: &l,
        r1: &r1,
        r2: Some(&r2),
        gamma0: ctl.gamma0(),
    };
    let gamma = ctl.gamma();
    let worst = DisturbanceSpec::WorstCase {
        lambda: ctl.lambda,
        gamma: (gamma.coefficient(), gamma.exponent()),
    };
    let mut checks = Vec::new();

    // (a) optimal feedback against the worst case: exact identity
    {
        let d = worst.compile(sys.xi(), Some(ctl.lie()))?;
        let traj = integrate(
            sys,
            v,
            norm,
            |x| ctl.alpha_star(x),
            &d,
            x0,
            horizon,
            integrator_tol,
            min_nodes,
        )?;
        let j = evaluate_cost(&traj, &model, horizon)?.total;
        checks.push(CostIdentitySubcheck {
            label: "alpha*, w*: J = 2 beta V(x0)".to_string(),
            j_t: j,
            reference: optimum,
            pass: (j - optimum).abs() <= tol,
        });
    }
    // (b) optimal feedback, benign disturbances: J never exceeds the optimum
    for (name, spec) in [
        ("zero", DisturbanceSpec::Zero),
        (
            "sinusoid",
            DisturbanceSpec::Sinusoid {
                amplitude: vec![1.0; sys.xi()],
                frequency: 1.0,
                phase: 0.0,
                decay: 0.0,
            },
        ),
    ] {
        let d = spec.compile(sys.xi(), Some(ctl.lie()))?;
        let traj = integrate(
            sys,
            v,
            norm,
            |x| ctl.alpha_star(x),
            &d,
            x0,
            horizon,
            integrator_tol,
            min_nodes,
        )?;
        let j = evaluate_cost(&traj, &model, horizon)?.total;
        checks.push(CostIdentitySubcheck {
            label: format!("alpha*, w = {name}: J <= 2 beta V(x0)"),
            j_t: j,
            reference: optimum,
            pass: j <= optimum + tol,
        });
    }
    // (c) detuned feedback against the worst case: completed square >= 0
    for g in [0.5, 2.0] {
        let d = worst.compile(sys.xi(), Some(ctl.lie()))?;
        let traj = integrate(
            sys,
            v,
            norm,
            |x| Ok(g * ctl.alpha_star(x)?),
            &d,
            x0,
            horizon,
            integrator_tol,
            min_nodes,
        )?;
        let j = evaluate_cost(&traj, &model, horizon)?.total;
        checks.push(CostIdentitySubcheck {
            label: format!("{g}·alpha*, w*: J >= 2 beta V(x0)"),
            j_t: j,
            reference: optimum,
            pass: j >= optimum - tol,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(CostIdentityReport {
        optimum,
        checks,
        pass,
    })
}
