//! The homogeneous control-system class, Lyapunov candidates, and the
//! Lie-derivative engine built on symbolic differentiation.
//!
//! The plant is ẋ = f(x) + G₁(x)u + G₂(x)w with output y = h(x) + d·u,
//! scalar control u, disturbance w ∈ ℝ^ξ. Under the dilation with weights
//! r_i, f has degree k > −r₀, G₁ and every column of G₂ have degree −r₀,
//! and h has degree k + r₀. The structural condition hᵀd ≡ 0 with dᵀd = θ²
//! keeps the state and control parts of the output orthogonal.

use crate::expr::{Env, EvalResult, Expr, Var};
use crate::homogeneity::{
    check_homogeneous_field, check_homogeneous_scalar, sphere_sample, Dilation, HomogeneousNorm,
    DEFAULT_EPS_GRID,
};
use serde::Serialize;

#[derive(Clone, Debug, thiserror::Error)]
pub enum SystemError {
    #[error("{what} must have one expression per state (expected {expected}, got {got})")]
    BadShape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("G2 rows must share one disturbance dimension")]
    RaggedG2,
    #[error("d must have one entry per output (expected {expected}, got {got})")]
    BadOutputDim { expected: usize, got: usize },
    #[error("degree condition k + r0 > 0 violated: k = {k}, r0 = {r0}")]
    DegreeTooLow { k: f64, r0: f64 },
    #[error("theta must be finite and nonnegative, got {0}")]
    BadTheta(f64),
    #[error(transparent)]
    Homogeneity(#[from] crate::homogeneity::HomogeneityError),
}

/// The plant of the toolkit. Immutable once validated; all evaluation is
/// pure.
#[derive(Clone, Debug, Serialize)]
pub struct HomogeneousSystem {
    pub dilation: Dilation,
    /// Degree of f; G₁ and G₂ columns have degree −r₀ and h has k + r₀.
    pub k: f64,
    pub f: Vec<Expr>,
    pub g1: Vec<Expr>,
    /// n × ξ matrix, row i lists the ξ disturbance gains of state i.
    pub g2: Vec<Vec<Expr>>,
    pub h: Vec<Expr>,
    pub d: Vec<f64>,
    pub theta: f64,
}

impl HomogeneousSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dilation: Dilation,
        k: f64,
        f: Vec<Expr>,
        g1: Vec<Expr>,
        g2: Vec<Vec<Expr>>,
        h: Vec<Expr>,
        d: Vec<f64>,
        theta: f64,
    ) -> Result<Self, SystemError> {
        let n = dilation.dim();
        if f.len() != n {
            return Err(SystemError::BadShape {
                what: "f",
                expected: n,
                got: f.len(),
            });
        }
        if g1.len() != n {
            return Err(SystemError::BadShape {
                what: "G1",
                expected: n,
                got: g1.len(),
            });
        }
        if g2.len() != n {
            return Err(SystemError::BadShape {
                what: "G2",
                expected: n,
                got: g2.len(),
            });
        }
        let xi = g2.first().map_or(0, |row| row.len());
        if g2.iter().any(|row| row.len() != xi) {
            return Err(SystemError::RaggedG2);
        }
        if d.len() != h.len() {
            return Err(SystemError::BadOutputDim {
                expected: h.len(),
                got: d.len(),
            });
        }
        if k + dilation.r0() <= 0.0 {
            return Err(SystemError::DegreeTooLow {
                k,
                r0: dilation.r0(),
            });
        }
        if !theta.is_finite() || theta < 0.0 {
            return Err(SystemError::BadTheta(theta));
        }
        Ok(HomogeneousSystem {
            dilation,
            k,
            f,
            g1,
            g2,
            h,
            d,
            theta,
        })
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn xi(&self) -> usize {
        self.g2.first().map_or(0, |row| row.len())
    }

    pub fn l_out(&self) -> usize {
        self.h.len()
    }

    pub fn r0(&self) -> f64 {
        self.dilation.r0()
    }

    /// Degree of the input fields, ς = −r₀.
    pub fn sigma(&self) -> f64 {
        -self.dilation.r0()
    }

    /// Whether the synthesis pipeline applies (it divides by θ²).
    pub fn synthesizable(&self) -> bool {
        self.theta > 0.0
    }

    fn is_origin(x: &[f64]) -> bool {
        x.iter().all(|&c| c == 0.0)
    }

    /// f(x); at the exact origin the components extend by 0 (each has
    /// positive degree k + r_i).
    pub fn eval_f(&self, x: &[f64]) -> EvalResult<Vec<f64>> {
        if Self::is_origin(x) {
            return Ok(vec![0.0; self.n()]);
        }
        let env = Env::state(x);
        self.f.iter().map(|e| e.eval(&env)).collect()
    }

    pub fn eval_g1(&self, x: &[f64]) -> EvalResult<Vec<f64>> {
        let env = Env::state(x);
        self.g1.iter().map(|e| e.eval(&env)).collect()
    }

    pub fn eval_g2(&self, x: &[f64]) -> EvalResult<Vec<Vec<f64>>> {
        let env = Env::state(x);
        self.g2
            .iter()
            .map(|row| row.iter().map(|e| e.eval(&env)).collect())
            .collect()
    }

    /// h(x), extended by 0 at the origin (degree k + r₀ > 0).
    pub fn eval_h(&self, x: &[f64]) -> EvalResult<Vec<f64>> {
        if Self::is_origin(x) {
            return Ok(vec![0.0; self.l_out()]);
        }
        let env = Env::state(x);
        self.h.iter().map(|e| e.eval(&env)).collect()
    }

    /// y = h(x) + d·u.
    pub fn output(&self, x: &[f64], u: f64) -> EvalResult<Vec<f64>> {
        let mut y = self.eval_h(x)?;
        for (yi, &di) in y.iter_mut().zip(&self.d) {
            *yi += di * u;
        }
        Ok(y)
    }

    /// Closed-loop right-hand side f + G₁u + G₂w.
    pub fn dynamics(&self, x: &[f64], u: f64, w: &[f64]) -> EvalResult<Vec<f64>> {
        let f = self.eval_f(x)?;
        let g1 = self.eval_g1(x)?;
        let g2 = self.eval_g2(x)?;
        Ok((0..self.n())
            .map(|i| {
                let drift: f64 = g2[i].iter().zip(w).map(|(g, wj)| g * wj).sum();
                f[i] + g1[i] * u + drift
            })
            .collect())
    }
}

/// A positive-definite homogeneous Lyapunov candidate of degree k + 2r₀.
#[derive(Clone, Debug, Serialize)]
pub struct LyapunovCandidate {
    pub v: Expr,
    pub degree: f64,
}

impl LyapunovCandidate {
    pub fn new(v: Expr, degree: f64) -> Self {
        LyapunovCandidate { v, degree }
    }

    /// V(x); V(0) = 0 by positive definiteness.
    pub fn eval(&self, x: &[f64]) -> EvalResult<f64> {
        if x.iter().all(|&c| c == 0.0) {
            return Ok(0.0);
        }
        self.v.eval(&Env::state(x))
    }
}

/// L_fV, L_{G₁}V and L_{G₂}V built symbolically from ∇V. All three extend
/// continuously by 0 at the origin since their degrees 2(k+r₀) and k+r₀
/// are positive.
#[derive(Clone, Debug)]
pub struct LieDerivatives {
    grad_v: Vec<Expr>,
    f: Vec<Expr>,
    g1: Vec<Expr>,
    g2: Vec<Vec<Expr>>,
    xi: usize,
}

pub fn lie_derivatives(sys: &HomogeneousSystem, v: &LyapunovCandidate) -> LieDerivatives {
    let grad_v = (0..sys.n()).map(|i| v.v.diff(Var::X(i))).collect();
    LieDerivatives {
        grad_v,
        f: sys.f.clone(),
        g1: sys.g1.clone(),
        g2: sys.g2.clone(),
        xi: sys.xi(),
    }
}

impl LieDerivatives {
    fn is_origin(x: &[f64]) -> bool {
        x.iter().all(|&c| c == 0.0)
    }

    pub fn grad_v(&self, x: &[f64]) -> EvalResult<Vec<f64>> {
        let env = Env::state(x);
        self.grad_v.iter().map(|e| e.eval(&env)).collect()
    }

    pub fn lf_v(&self, x: &[f64]) -> EvalResult<f64> {
        if Self::is_origin(x) {
            return Ok(0.0);
        }
        let env = Env::state(x);
        let mut acc = 0.0;
        for (dv, fi) in self.grad_v.iter().zip(&self.f) {
            acc += dv.eval(&env)? * fi.eval(&env)?;
        }
        Ok(acc)
    }

    pub fn lg1_v(&self, x: &[f64]) -> EvalResult<f64> {
        if Self::is_origin(x) {
            return Ok(0.0);
        }
        let env = Env::state(x);
        let mut acc = 0.0;
        for (dv, gi) in self.grad_v.iter().zip(&self.g1) {
            acc += dv.eval(&env)? * gi.eval(&env)?;
        }
        Ok(acc)
    }

    pub fn lg2_v(&self, x: &[f64]) -> EvalResult<Vec<f64>> {
        if Self::is_origin(x) {
            return Ok(vec![0.0; self.xi]);
        }
        let env = Env::state(x);
        let mut acc = vec![0.0; self.xi];
        for (dv, row) in self.grad_v.iter().zip(&self.g2) {
            let dvx = dv.eval(&env)?;
            for (a, gij) in acc.iter_mut().zip(row) {
                *a += dvx * gij.eval(&env)?;
            }
        }
        Ok(acc)
    }

    /// V̇ along the closed loop: L_fV + L_{G₁}V·u + L_{G₂}V·w.
    pub fn v_dot(&self, x: &[f64], u: f64, w: &[f64]) -> EvalResult<f64> {
        let lg2 = self.lg2_v(x)?;
        let coupling: f64 = lg2.iter().zip(w).map(|(a, b)| a * b).sum();
        Ok(self.lf_v(x)? + self.lg1_v(x)? * u + coupling)
    }
}

/// One named validation check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub max_error: f64,
    pub pass: bool,
    pub detail: Option<String>,
}

impl CheckEntry {
    fn ok(name: impl Into<String>, max_error: f64) -> Self {
        CheckEntry {
            name: name.into(),
            max_error,
            pass: true,
            detail: None,
        }
    }

    fn verdict(name: impl Into<String>, max_error: f64, pass: bool) -> Self {
        CheckEntry {
            name: name.into(),
            max_error,
            pass,
            detail: None,
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub entries: Vec<CheckEntry>,
    pub pass: bool,
    /// θ > 0; θ = 0 plants are accepted as simulation fixtures but the
    /// synthesis pipeline rejects them.
    pub synthesizable: bool,
}

impl ValidationReport {
    pub fn failing(&self) -> Vec<&CheckEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }
}

/// Run every structural and homogeneity invariant and report per-check
/// outcomes. Failures are report entries, never panics.
pub fn validate_system(
    sys: &HomogeneousSystem,
    v: &LyapunovCandidate,
    nu: f64,
    samples: usize,
    tol: f64,
    seed: u64,
) -> ValidationReport {
    let mut entries = Vec::new();
    let d = &sys.dilation;
    let r0 = d.r0();

    entries.push(CheckEntry::verdict(
        "degree-condition-k-plus-r0-positive",
        0.0,
        sys.k + r0 > 0.0,
    ));

    let field_check = |name: &str, f: &dyn Fn(&[f64]) -> EvalResult<Vec<f64>>, deg: f64| {
        match check_homogeneous_field(f, deg, d, samples, &DEFAULT_EPS_GRID, tol, seed) {
            Ok(rep) => CheckEntry::verdict(name, rep.max_rel_error, rep.pass),
            Err(e) => CheckEntry::verdict(name, f64::INFINITY, false).with_detail(e.to_string()),
        }
    };
    let scalar_check = |name: &str, f: &dyn Fn(&[f64]) -> EvalResult<f64>, deg: f64| {
        match check_homogeneous_scalar(f, deg, d, samples, &DEFAULT_EPS_GRID, tol, seed) {
            Ok(rep) => CheckEntry::verdict(name, rep.max_rel_error, rep.pass),
            Err(e) => CheckEntry::verdict(name, f64::INFINITY, false).with_detail(e.to_string()),
        }
    };

    entries.push(field_check(
        "f-homogeneous-degree-k",
        &|x| sys.eval_f(x),
        sys.k,
    ));
    entries.push(field_check(
        "g1-homogeneous-degree-sigma",
        &|x| sys.eval_g1(x),
        sys.sigma(),
    ));
    for j in 0..sys.xi() {
        entries.push(field_check(
            &format!("g2-column-{}-homogeneous-degree-sigma", j + 1),
            &|x| Ok(sys.eval_g2(x)?.into_iter().map(|row| row[j]).collect()),
            sys.sigma(),
        ));
    }
    for (j, hj) in sys.h.iter().enumerate() {
        entries.push(scalar_check(
            &format!("h{}-homogeneous-degree-k-plus-r0", j + 1),
            &|x| hj.eval(&Env::state(x)),
            sys.k + r0,
        ));
    }

    // hᵀd ≡ 0 at sample points, and dᵀd = θ² exactly.
    match HomogeneousNorm::new(d.clone(), nu) {
        Ok(norm) => {
            let pts = sphere_sample(&norm, samples, seed);
            let mut max_dot = 0.0f64;
            let mut eval_failure = None;
            let mut min_v = f64::INFINITY;
            for p in &pts {
                match sys.eval_h(p.coords()) {
                    Ok(h) => {
                        let dot: f64 = h.iter().zip(&sys.d).map(|(a, b)| a * b).sum();
                        let scale: f64 = h.iter().map(|a| a.abs()).fold(0.0, f64::max).max(1.0);
                        max_dot = max_dot.max(dot.abs() / scale);
                    }
                    Err(e) => eval_failure = Some(e),
                }
                match v.eval(p.coords()) {
                    Ok(val) => min_v = min_v.min(val),
                    Err(e) => eval_failure = Some(e),
                }
            }
            let mut e = CheckEntry::verdict("h-d-orthogonality", max_dot, max_dot <= tol);
            if let Some(err) = &eval_failure {
                e = e.with_detail(err.to_string());
                e.pass = false;
            }
            entries.push(e);
            entries.push(
                CheckEntry::verdict("v-positive-on-sphere", -min_v, min_v > 0.0)
                    .with_detail(format!("min V on sphere samples = {min_v}")),
            );
        }
        Err(e) => {
            entries.push(
                CheckEntry::verdict("homogeneous-norm", f64::INFINITY, false)
                    .with_detail(e.to_string()),
            );
        }
    }

    let dtd: f64 = sys.d.iter().map(|v| v * v).sum();
    let theta_err = (dtd - sys.theta * sys.theta).abs();
    entries.push(CheckEntry::verdict(
        "d-norm-matches-theta",
        theta_err,
        theta_err <= tol * (sys.theta * sys.theta).max(1.0),
    ));

    // f(0) = 0 and h(0) = 0; if the expressions cannot be evaluated at the
    // exact origin, the positive homogeneity degrees force the limit 0.
    let origin = vec![0.0; sys.n()];
    let env = Env::state(&origin);
    let f0_err = sys
        .f
        .iter()
        .map(|e| e.eval(&env).map(|v| v.abs()).unwrap_or(0.0))
        .fold(0.0, f64::max);
    entries.push(CheckEntry::verdict(
        "f-vanishes-at-origin",
        f0_err,
        f0_err <= tol,
    ));
    let h0_err = sys
        .h
        .iter()
        .map(|e| e.eval(&env).map(|v| v.abs()).unwrap_or(0.0))
        .fold(0.0, f64::max);
    entries.push(CheckEntry::verdict(
        "h-vanishes-at-origin",
        h0_err,
        h0_err <= tol,
    ));

    entries.push(scalar_check(
        "v-homogeneous-degree-k-plus-2r0",
        &|x| v.v.eval(&Env::state(x)),
        sys.k + 2.0 * r0,
    ));
    let deg_err = (v.degree - (sys.k + 2.0 * r0)).abs();
    entries.push(CheckEntry::verdict(
        "v-declared-degree",
        deg_err,
        deg_err <= tol,
    ));

    let synthesizable = sys.synthesizable();
    if !synthesizable {
        entries.push(
            CheckEntry::ok("theta-positive", 0.0)
                .with_detail("theta = 0: fixture-only, synthesis pipeline requires theta > 0"),
        );
    }

    let pass = entries.iter().all(|e| e.pass);
    ValidationReport {
        entries,
        pass,
        synthesizable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn example_plant_validates() {
        let fx = fixtures::example("ex4").unwrap();
        let report = validate_system(&fx.system, &fx.lyapunov, fx.nu, 64, 1e-8, 42);
        assert!(report.pass, "failures: {:?}", report.failing());
        assert!(report.synthesizable);
    }

    #[test]
    fn wrong_declared_degree_fails() {
        let fx = fixtures::example("ex4").unwrap();
        let mut sys = fx.system.clone();
        sys.k = 1.0;
        let report = validate_system(&sys, &fx.lyapunov, fx.nu, 64, 1e-8, 42);
        assert!(!report.pass);
        assert!(report
            .failing()
            .iter()
            .any(|e| e.name == "f-homogeneous-degree-k"));
    }

    #[test]
    fn broken_orthogonality_fails() {
        let fx = fixtures::example("ex4").unwrap();
        let mut sys = fx.system.clone();
        sys.d = vec![1.0, 1.0]; // h = (x2, 0), so hᵀd = x2 which is not ≡ 0
        sys.theta = 2.0_f64.sqrt();
        let report = validate_system(&sys, &fx.lyapunov, fx.nu, 64, 1e-8, 42);
        assert!(report
            .failing()
            .iter()
            .any(|e| e.name == "h-d-orthogonality"));
    }

    #[test]
    fn lie_derivatives_match_closed_forms() {
        let fx = fixtures::example("ex4").unwrap();
        let lie = lie_derivatives(&fx.system, &fx.lyapunov);
        // L_{G1}V(x) = 2 x2^3 (|x1|^{4/3} + x2^4)^{-1/2} is sqrt(2) at (1,1)
        let got = lie.lg1_v(&[1.0, 1.0]).unwrap();
        assert!((got - 2.0_f64.sqrt()).abs() < 1e-14, "got {got}");
        // L_fV at (1,1): the drift -x1 + x2^3 vanishes there
        assert!(lie.lf_v(&[1.0, 1.0]).unwrap().abs() < 1e-14);
        // origin limits
        assert_eq!(lie.lf_v(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(lie.lg1_v(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(lie.lg2_v(&[0.0, 0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn lie_derivative_degrees() {
        let fx = fixtures::example("ex4").unwrap();
        let sys = &fx.system;
        let lie = lie_derivatives(sys, &fx.lyapunov);
        let d = &sys.dilation;
        let kr0 = sys.k + sys.r0();
        let rep = check_homogeneous_scalar(
            |x| lie.lf_v(x),
            2.0 * kr0,
            d,
            64,
            &DEFAULT_EPS_GRID,
            1e-8,
            42,
        )
        .unwrap();
        assert!(rep.pass, "L_fV degree check: {}", rep.max_rel_error);
        let rep =
            check_homogeneous_scalar(|x| lie.lg1_v(x), kr0, d, 64, &DEFAULT_EPS_GRID, 1e-8, 42)
                .unwrap();
        assert!(rep.pass);
        let rep = check_homogeneous_scalar(
            |x| lie.lg2_v(x).map(|v| v[0]),
            kr0,
            d,
            64,
            &DEFAULT_EPS_GRID,
            1e-8,
            42,
        )
        .unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn lie_derivatives_match_directional_finite_differences() {
        let fx = fixtures::example("ex4").unwrap();
        let sys = &fx.system;
        let lie = lie_derivatives(sys, &fx.lyapunov);
        let mut state = 0xdeadbeefu64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let s = if state & 2 == 0 { 1.0 } else { -1.0 };
            s * (0.3 + 1.7 * u)
        };
        for _ in 0..50 {
            let x = [next(), next()];
            let f = sys.eval_f(&x).unwrap();
            let h = 1e-6;
            let xp: Vec<f64> = x.iter().zip(&f).map(|(xi, fi)| xi + h * fi).collect();
            let xm: Vec<f64> = x.iter().zip(&f).map(|(xi, fi)| xi - h * fi).collect();
            let fd = (fx.lyapunov.eval(&xp).unwrap() - fx.lyapunov.eval(&xm).unwrap()) / (2.0 * h);
            let sym = lie.lf_v(&x).unwrap();
            let scale = fd.abs().max(sym.abs()).max(1e-3);
            assert!(
                (fd - sym).abs() / scale < 1e-6,
                "at {x:?}: fd {fd} vs symbolic {sym}"
            );
        }
    }

    #[test]
    fn theta_zero_fixtures_are_flagged() {
        for id in ["ex1", "ex2", "ex3"] {
            let fx = fixtures::example(id).unwrap();
            let report = validate_system(&fx.system, &fx.lyapunov, fx.nu, 64, 1e-8, 42);
            assert!(!report.synthesizable, "{id} should be fixture-only");
        }
        // ex3 satisfies the full structure, ex1/ex2 break the h-degree rule
        let fx3 = fixtures::example("ex3").unwrap();
        let report = validate_system(&fx3.system, &fx3.lyapunov, fx3.nu, 64, 1e-8, 42);
        assert!(report.pass, "ex3 failures: {:?}", report.failing());
    }
}
