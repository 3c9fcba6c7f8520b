//! Dilations, homogeneous norms, degree checking, and optimization of scalar
//! functions over the unit homogeneous sphere.
//!
//! The sphere S = {x : Γ(x) = 1} is compact, so extrema of continuous
//! functions over it (or over its closed subsets) exist; homogeneity then
//! extends sign and growth information from S to all of ℝⁿ\{0}. Extrema are
//! estimated by dense deterministic sampling followed by derivative-free
//! polish of the best candidates in an angular parametrization of Euclidean
//! directions, re-projected onto S at every evaluation.

use crate::expr::{EvalError, EvalResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum HomogeneityError {
    #[error("dilation weights must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("dilation needs at least one weight")]
    EmptyWeights,
    #[error("dilation scale must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("homogeneous-norm exponent nu={nu} must exceed max weight {max_weight}")]
    NuTooSmall { nu: f64, max_weight: f64 },
    #[error("cannot project the zero vector onto the sphere")]
    ZeroDirection,
    #[error("sphere projection did not converge (residual {0:e})")]
    ProjectionFailed(f64),
}

/// Anisotropic scaling x_i ↦ ε^{r_i} x_i with positive weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dilation {
    weights: Vec<f64>,
}

impl Dilation {
    pub fn new(weights: Vec<f64>) -> Result<Self, HomogeneityError> {
        if weights.is_empty() {
            return Err(HomogeneityError::EmptyWeights);
        }
        for &w in &weights {
            if !(w > 0.0) || !w.is_finite() {
                return Err(HomogeneityError::NonPositiveWeight(w));
            }
        }
        Ok(Dilation { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Dilation {
            weights: vec![1.0; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Smallest weight r₀ = min r_i.
    pub fn r0(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Δ_ε x, component-wise ε^{r_i}·x_i.
    pub fn apply(&self, eps: f64, x: &[f64]) -> Result<Vec<f64>, HomogeneityError> {
        if !(eps > 0.0) {
            return Err(HomogeneityError::NonPositiveEps(eps));
        }
        if x.len() != self.weights.len() {
            return Err(HomogeneityError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(x)
            .map(|(&r, &xi)| eps.powf(r) * xi)
            .collect())
    }
}

/// Positive-definite, degree-one map Γ(x) = (Σ_i |x_i|^{ν/r_i})^{1/ν}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneousNorm {
    dilation: Dilation,
    nu: f64,
}

impl HomogeneousNorm {
    pub fn new(dilation: Dilation, nu: f64) -> Result<Self, HomogeneityError> {
        let max_weight = dilation.max_weight();
        if !(nu > max_weight) {
            return Err(HomogeneityError::NuTooSmall { nu, max_weight });
        }
        Ok(HomogeneousNorm { dilation, nu })
    }

    pub fn dilation(&self) -> &Dilation {
        &self.dilation
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dim(&self) -> usize {
        self.dilation.dim()
    }

    /// Γ(x). Total on ℝⁿ; the caller guarantees matching dimension.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dilation.dim());
        let mut sum = 0.0;
        for (&r, &xi) in self.dilation.weights().iter().zip(x) {
            sum += xi.abs().powf(self.nu / r);
        }
        sum.powf(1.0 / self.nu)
    }

    /// Radial projection onto S: x = Δ_{1/Γ(u)} u, exact by degree-one
    /// homogeneity. Repeated once or twice to clean up rounding.
    pub fn project(&self, direction: &[f64]) -> Result<SpherePoint, HomogeneityError> {
        if direction.iter().all(|&c| c == 0.0) {
            return Err(HomogeneityError::ZeroDirection);
        }
        let mut coords = direction.to_vec();
        let mut residual = f64::INFINITY;
        for _ in 0..4 {
            let g = self.eval(&coords);
            if !g.is_finite() || g == 0.0 {
                return Err(HomogeneityError::ZeroDirection);
            }
            coords = self.dilation.apply(1.0 / g, &coords)?;
            residual = (self.eval(&coords) - 1.0).abs();
            if residual <= 1e-14 {
                break;
            }
        }
        if residual > 1e-12 {
            return Err(HomogeneityError::ProjectionFailed(residual));
        }
        Ok(SpherePoint { coords, residual })
    }
}

/// A point with Γ(x) = 1 up to 1e-12.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpherePoint {
    coords: Vec<f64>,
    residual: f64,
}

impl SpherePoint {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Worst sample seen by a homogeneity check.
#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityWitness {
    pub point: Vec<f64>,
    pub eps: f64,
    pub component: usize,
    pub expected: f64,
    pub actual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityReport {
    pub max_rel_error: f64,
    pub pass: bool,
    pub checked: usize,
    pub worst: Option<HomogeneityWitness>,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum CheckError {
    #[error("evaluation failed at {point:?} (eps {eps}): {source}")]
    EvalAt {
        point: Vec<f64>,
        eps: f64,
        source: EvalError,
    },
}

pub const DEFAULT_EPS_GRID: [f64; 4] = [0.25, 0.5, 2.0, 4.0];

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale <= 1e-300 {
        0.0
    } else {
        (a - b).abs() / scale.max(1e-12)
    }
}

/// Gaussian directions, deterministic for a fixed seed.
fn random_directions(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let dir: Vec<f64> = (0..n).map(|_| gauss(rng)).collect();
        if dir.iter().map(|c| c * c).sum::<f64>() > 1e-12 {
            out.push(dir);
        }
    }
    out
}

// Box-Muller; two uniforms in, one normal out.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Check F(Δ_ε x) = ε^degree · F(x) over random samples and an ε grid.
pub fn check_homogeneous_scalar(
    f: impl Fn(&[f64]) -> EvalResult<f64>,
    degree: f64,
    d: &Dilation,
    samples: usize,
    eps_grid: &[f64],
    tol: f64,
    seed: u64,
) -> Result<HomogeneityReport, CheckError> {
    check_impl(
        |x| f(x).map(|v| vec![v]),
        |eps, _| eps.powf(degree),
        d,
        samples,
        eps_grid,
        tol,
        seed,
    )
}

/// Check φ_i(Δ_ε x) = ε^{degree + r_i} · φ_i(x) for a vector field.
pub fn check_homogeneous_field(
    f: impl Fn(&[f64]) -> EvalResult<Vec<f64>>,
    degree: f64,
    d: &Dilation,
    samples: usize,
    eps_grid: &[f64],
    tol: f64,
    seed: u64,
) -> Result<HomogeneityReport, CheckError> {
    let weights = d.weights().to_vec();
    check_impl(
        f,
        move |eps, i| eps.powf(degree + weights[i]),
        d,
        samples,
        eps_grid,
        tol,
        seed,
    )
}

fn check_impl(
    f: impl Fn(&[f64]) -> EvalResult<Vec<f64>>,
    scale: impl Fn(f64, usize) -> f64,
    d: &Dilation,
    samples: usize,
    eps_grid: &[f64],
    tol: f64,
    seed: u64,
) -> Result<HomogeneityReport, CheckError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = random_directions(d.dim(), samples, &mut rng);
    let mut max_rel = 0.0f64;
    let mut worst = None;
    let mut checked = 0;
    for x in &dirs {
        let base = f(x).map_err(|source| CheckError::EvalAt {
            point: x.clone(),
            eps: 1.0,
            source,
        })?;
        for &eps in eps_grid {
            let xs = d.apply(eps, x).expect("eps grid is positive");
            let scaled = f(&xs).map_err(|source| CheckError::EvalAt {
                point: xs.clone(),
                eps,
                source,
            })?;
            for (i, (&got, &fx)) in scaled.iter().zip(&base).enumerate() {
                let expected = scale(eps, i) * fx;
                let err = rel_err(got, expected);
                checked += 1;
                if err > max_rel {
                    max_rel = err;
                    worst = Some(HomogeneityWitness {
                        point: x.clone(),
                        eps,
                        component: i,
                        expected,
                        actual: got,
                    });
                }
            }
        }
    }
    Ok(HomogeneityReport {
        max_rel_error: max_rel,
        pass: max_rel <= tol,
        checked,
        worst,
    })
}

/// Deterministic sphere sample: the 2n projected axis points followed by
/// `count` projected Gaussian directions. For n = 1 the sphere is exactly
/// the two axis points.
pub fn sphere_sample(g: &HomogeneousNorm, count: usize, seed: u64) -> Vec<SpherePoint> {
    let n = g.dim();
    let mut pts = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut dir = vec![0.0; n];
            dir[i] = sign;
            pts.push(g.project(&dir).expect("axis direction is nonzero"));
        }
    }
    if n == 1 {
        return pts;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for dir in random_directions(n, count, &mut rng) {
        pts.push(g.project(&dir).expect("direction is nonzero"));
    }
    pts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OptMode {
    Min,
    Max,
}

/// Sampling and refinement effort for sphere extrema.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SphereBudget {
    pub samples: usize,
    pub refine_top: usize,
    pub refine_iters: usize,
}

impl SphereBudget {
    /// 4096 samples up to n=3, 65536 up to n=6; 8 polished candidates,
    /// 200 simplex iterations each.
    pub fn for_dim(n: usize) -> Self {
        SphereBudget {
            samples: if n <= 3 { 4096 } else { 65536 },
            refine_top: 8,
            refine_iters: 200,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

/// Membership predicate for constrained sphere extrema.
pub type Constraint<'a> = &'a dyn Fn(&[f64]) -> bool;

#[derive(Clone, Debug, Serialize)]
pub struct SphereOptimum {
    pub value: f64,
    pub argpoint: SpherePoint,
    pub n_evals: usize,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum SphereOptError {
    #[error("constraint subset empty after {attempted} samples")]
    EmptyConstraintSet { attempted: usize },
    #[error("objective failed at sphere point {point:?}: {source}")]
    Eval { point: Vec<f64>, source: EvalError },
}

/// Best value of `objective` over the sphere (or the subset where
/// `constraint` holds). Dense sampling, then Nelder-Mead polish of the top
/// candidates in direction-angle coordinates; the polished result is never
/// worse than the sampled one, and the argpoint always satisfies the
/// constraint.
pub fn sphere_optimize(
    objective: impl Fn(&[f64]) -> EvalResult<f64>,
    g: &HomogeneousNorm,
    constraint: Option<Constraint>,
    mode: OptMode,
    budget: &SphereBudget,
    seed: u64,
) -> Result<SphereOptimum, SphereOptError> {
    let n = g.dim();
    let sign = match mode {
        OptMode::Min => 1.0,
        OptMode::Max => -1.0,
    };
    let samples = sphere_sample(g, budget.samples, seed);
    let attempted = samples.len();
    let mut n_evals = 0usize;
    let mut kept: Vec<(f64, SpherePoint)> = Vec::new();
    for p in samples {
        if let Some(c) = constraint {
            if !c(p.coords()) {
                continue;
            }
        }
        let v = objective(p.coords()).map_err(|source| SphereOptError::Eval {
            point: p.coords().to_vec(),
            source,
        })?;
        n_evals += 1;
        kept.push((sign * v, p));
    }
    if kept.is_empty() {
        return Err(SphereOptError::EmptyConstraintSet { attempted });
    }
    kept.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut best_v, mut best_p) = kept[0].clone();

    if n >= 2 {
        // Polish each leading candidate. Constraint violations and
        // evaluation failures become +inf, so the polish can only improve
        // on feasible points.
        let penalized = |theta: &[f64]| -> f64 {
            let dir = direction_from_angles(theta);
            let p = match g.project(&dir) {
                Ok(p) => p,
                Err(_) => return f64::INFINITY,
            };
            if let Some(c) = constraint {
                if !c(p.coords()) {
                    return f64::INFINITY;
                }
            }
            match objective(p.coords()) {
                Ok(v) => sign * v,
                Err(_) => f64::INFINITY,
            }
        };
        for (_, cand) in kept.iter().take(budget.refine_top) {
            let theta0 = angles_from_direction(cand.coords());
            let (theta, v, evals) = nelder_mead(&penalized, &theta0, 0.05, budget.refine_iters);
            n_evals += evals;
            if v < best_v {
                if let Ok(p) = g.project(&direction_from_angles(&theta)) {
                    best_v = v;
                    best_p = p;
                }
            }
        }
    }

    Ok(SphereOptimum {
        value: sign * best_v,
        argpoint: best_p,
        n_evals,
    })
}

/// Spherical-coordinate chart: θ ∈ ℝ^{n-1} to a Euclidean unit direction.
fn direction_from_angles(theta: &[f64]) -> Vec<f64> {
    let n = theta.len() + 1;
    let mut dir = vec![0.0; n];
    let mut sin_prod = 1.0;
    for i in 0..n - 1 {
        dir[i] = sin_prod * theta[i].cos();
        sin_prod *= theta[i].sin();
    }
    dir[n - 1] = sin_prod;
    dir
}

fn angles_from_direction(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut theta = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let tail: f64 = x[i + 1..].iter().map(|c| c * c).sum::<f64>().sqrt();
        theta.push(tail.atan2(x[i]));
    }
    theta
}

/// Plain Nelder-Mead on ℝ^d. Returns (argmin, min, evaluations).
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iters: usize,
) -> (Vec<f64>, f64, usize) {
    let d = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let v0 = eval(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[d].1 - simplex[0].1;
        if spread.abs() < 1e-15 && spread.is_finite() {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|(x, _)| x[j]).sum::<f64>() / d as f64)
            .collect();
        let worst = simplex[d].clone();
        let reflect: Vec<f64> = (0..d)
            .map(|j| centroid[j] + alpha * (centroid[j] - worst.0[j]))
            .collect();
        let fr = eval(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..d)
                .map(|j| centroid[j] + gamma * (reflect[j] - centroid[j]))
                .collect();
            let fe = eval(&expand);
            simplex[d] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..d)
                .map(|j| centroid[j] + rho * (worst.0[j] - centroid[j]))
                .collect();
            let fc = eval(&contract);
            if fc < worst.1 {
                simplex[d] = (contract, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = (0..d)
                        .map(|j| best[j] + sigma * (vertex.0[j] - best[j]))
                        .collect();
                    let v = eval(&x);
                    *vertex = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let best = simplex.remove(0);
    (best.0, best.1, evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm31() -> HomogeneousNorm {
        HomogeneousNorm::new(Dilation::new(vec![3.0, 1.0]).unwrap(), 4.0).unwrap()
    }

    #[test]
    fn dilation_scales_by_weight_powers() {
        let d = Dilation::new(vec![3.0, 1.0]).unwrap();
        assert_eq!(d.apply(2.0, &[1.0, 1.0]).unwrap(), vec![8.0, 2.0]);
        assert_eq!(d.apply(1.0, &[0.3, -2.0]).unwrap(), vec![0.3, -2.0]);
        let back = d.apply(0.5, &[8.0, 2.0]).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-12 && (back[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dilation_rejects_bad_input() {
        assert!(Dilation::new(vec![1.0, -2.0]).is_err());
        let d = Dilation::new(vec![1.0]).unwrap();
        assert!(d.apply(-1.0, &[1.0]).is_err());
        assert!(d.apply(1.0, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn homogeneous_norm_values() {
        let g = norm31();
        let v = g.eval(&[1.0, 1.0]);
        assert!((v - 2.0_f64.powf(0.25)).abs() < 1e-14);
        assert_eq!(g.eval(&[0.0, 0.0]), 0.0);
        // degree-one scaling
        let d = g.dilation().clone();
        let scaled = d.apply(3.0, &[1.0, 1.0]).unwrap();
        assert!((g.eval(&scaled) - 3.0 * v).abs() < 1e-12);
    }

    #[test]
    fn projection_lands_on_sphere() {
        let g = norm31();
        let p = g.project(&[1.0, 1.0]).unwrap();
        let e = 2.0_f64.powf(-0.25);
        assert!((p.coords()[0] - e.powi(3)).abs() < 1e-12);
        assert!((p.coords()[1] - e).abs() < 1e-12);
        assert!(p.residual() <= 1e-12);

        let q = g.project(&[0.0, 5.0]).unwrap();
        assert!((q.coords()[0]).abs() < 1e-15 && (q.coords()[1] - 1.0).abs() < 1e-12);

        // already on the sphere: identity
        let again = g.project(p.coords()).unwrap();
        for (a, b) in again.coords().iter().zip(p.coords()) {
            assert!((a - b).abs() < 1e-12);
        }

        assert!(g.project(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn degree_check_accepts_and_rejects() {
        let d = Dilation::new(vec![3.0, 1.0]).unwrap();
        // x2^3 has degree 3 under (3,1)
        let ok = check_homogeneous_scalar(
            |x| Ok(x[1].powi(3)),
            3.0,
            &d,
            64,
            &DEFAULT_EPS_GRID,
            1e-10,
            42,
        )
        .unwrap();
        assert!(ok.pass, "max rel err {}", ok.max_rel_error);

        // x1 + x2 mixes weights 3 and 1: no single degree fits
        for degree in [1.0, 2.0, 3.0] {
            let bad = check_homogeneous_scalar(
                |x| Ok(x[0] + x[1]),
                degree,
                &d,
                64,
                &DEFAULT_EPS_GRID,
                1e-8,
                42,
            )
            .unwrap();
            assert!(!bad.pass);
        }

        // the degree-2 Lyapunov candidate
        let v = crate::expr::parse("pow(apow(x1, 4/3) + x2^4, 1/2)").unwrap();
        let rep = check_homogeneous_scalar(
            |x| v.eval(&crate::expr::Env::state(x)),
            2.0,
            &d,
            64,
            &DEFAULT_EPS_GRID,
            1e-8,
            42,
        )
        .unwrap();
        assert!(rep.pass, "max rel err {}", rep.max_rel_error);
    }

    #[test]
    fn sphere_sample_is_deterministic_and_on_sphere() {
        let g = norm31();
        let a = sphere_sample(&g, 1000, 7);
        let b = sphere_sample(&g, 1000, 7);
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.coords(), q.coords());
            assert!((g.eval(p.coords()) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn one_dimensional_sphere_is_two_points() {
        let g = HomogeneousNorm::new(Dilation::new(vec![1.0]).unwrap(), 2.0).unwrap();
        let pts = sphere_sample(&g, 1000, 3);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].coords(), &[1.0]);
        assert_eq!(pts[1].coords(), &[-1.0]);
    }

    #[test]
    fn constant_objective_on_sphere() {
        let g = norm31();
        let budget = SphereBudget::for_dim(2);
        for mode in [OptMode::Min, OptMode::Max] {
            let r =
                sphere_optimize(|x| Ok(g.eval(x).powi(2)), &g, None, mode, &budget, 42).unwrap();
            assert!((r.value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_functional_on_euclidean_sphere() {
        // all weights 1, nu=2: Γ is the Euclidean norm, max of c·x is |c|
        let g = HomogeneousNorm::new(Dilation::uniform(3), 2.0).unwrap();
        let c = [1.5, -2.0, 0.5];
        let r = sphere_optimize(
            |x| Ok(c.iter().zip(x).map(|(a, b)| a * b).sum()),
            &g,
            None,
            OptMode::Max,
            &SphereBudget::for_dim(3),
            42,
        )
        .unwrap();
        let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((r.value - cn).abs() < 1e-6, "got {} want {}", r.value, cn);
        for (got, want) in r.argpoint.coords().iter().zip(c.iter().map(|v| v / cn)) {
            assert!((got - want).abs() < 1e-3);
        }
    }

    #[test]
    fn constrained_argpoint_satisfies_constraint() {
        let g = norm31();
        let constraint = |x: &[f64]| x[0].abs() >= 4.0 * x[1].abs().powi(3);
        let r = sphere_optimize(
            |x| Ok(x[1].abs()),
            &g,
            Some(&constraint),
            OptMode::Max,
            &SphereBudget::for_dim(2),
            42,
        )
        .unwrap();
        assert!(constraint(r.argpoint.coords()));
    }

    #[test]
    fn empty_constraint_set_is_reported() {
        let g = norm31();
        let constraint = |_: &[f64]| false;
        let err = sphere_optimize(
            |x| Ok(x[0]),
            &g,
            Some(&constraint),
            OptMode::Min,
            &SphereBudget::for_dim(2).with_samples(64),
            42,
        )
        .unwrap_err();
        assert!(matches!(err, SphereOptError::EmptyConstraintSet { .. }));
    }

    #[test]
    fn n1_optimum_is_direct_evaluation() {
        let g = HomogeneousNorm::new(Dilation::new(vec![1.0]).unwrap(), 2.0).unwrap();
        let r = sphere_optimize(
            |x| Ok(x[0] * 3.0 + 1.0),
            &g,
            None,
            OptMode::Min,
            &SphereBudget::for_dim(1),
            42,
        )
        .unwrap();
        assert_eq!(r.value, -2.0);
        assert_eq!(r.argpoint.coords(), &[-1.0]);
    }
}
