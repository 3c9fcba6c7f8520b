//! Built-in example plants: a scalar plant whose output goes unpenalized
//! (and loses finite-gain L₂ stability), the same plant with an output
//! penalty, a degree-2 planar plant whose naive state penalty turns
//! indefinite, and the dilation-(3,1) planar plant the synthesis pipeline
//! is demonstrated on end to end.

use crate::expr::{parse, EvalResult, Expr};
use crate::homogeneity::{Dilation, SphereBudget};
use crate::lft::PowerKInfinity;
use crate::synthesis::SynthesisConfig;
use crate::sysdef::{HomogeneousSystem, LyapunovCandidate};

/// Cost pieces pinned by a fixture (closed forms, not synthesized).
#[derive(Clone, Debug)]
pub struct FixtureCost {
    pub e: Expr,
    pub l: Expr,
    pub r1: Expr,
    /// None means the cost puts no penalty on the output.
    pub r2: Option<Expr>,
    pub gamma0: PowerKInfinity,
}

#[derive(Clone, Debug)]
pub struct ExampleFixture {
    pub id: &'static str,
    pub title: &'static str,
    pub system: HomogeneousSystem,
    pub nu: f64,
    pub lyapunov: LyapunovCandidate,
    /// Closed-form feedback for ex1/ex2; ex3 uses `control_law`, ex4 is
    /// synthesized.
    pub alpha_star: Option<Expr>,
    pub cost: Option<FixtureCost>,
    /// ex3's indefinite candidate state penalty.
    pub l_tilde: Option<Expr>,
    pub synthesis: Option<SynthesisConfig>,
    /// The gain chosen for the ex4 demonstration.
    pub pinned_kappa: Option<f64>,
    pub notes: &'static str,
}

impl ExampleFixture {
    /// The fixture's feedback law evaluated at `x`, if it has a fixed one.
    pub fn control_law(&self, x: &[f64]) -> Option<EvalResult<f64>> {
        if let Some(a) = &self.alpha_star {
            return Some(a.eval(&crate::expr::Env::state(x)));
        }
        if self.id == "ex3" {
            return Some(ex3_control(x));
        }
        None
    }
}

// u = -(ϖ + sqrt(ϖ² + x2^12)) / x2^3 away from x2 = 0, extended by 0.
fn ex3_control(x: &[f64]) -> EvalResult<f64> {
    let b = x[1].powi(3);
    if b.abs() <= 1e-12 * (x[0].abs() + x[1].abs()).max(1e-6) {
        return Ok(0.0);
    }
    let varpi = ex3_varpi_value(x);
    Ok(-(varpi + (varpi * varpi + x[1].powi(12)).sqrt()) / b)
}

fn ex3_varpi_value(x: &[f64]) -> f64 {
    -x[0].powi(6)
        + x[0].powi(3) * x[1].powi(3)
        + x[1].abs().powi(3) * (x[0] * x[0] + x[1] * x[1]).powf(1.5)
}

const EX3_VARPI: &str = "(-x1^6 + x1^3*x2^3 + apow(x2, 3)*pow(x1^2 + x2^2, 3/2))";

pub fn example(id: &str) -> Option<ExampleFixture> {
    match id {
        "ex1" => Some(ex1()),
        "ex2" => Some(ex2()),
        "ex3" => Some(ex3()),
        "ex4" => Some(ex4()),
        _ => None,
    }
}

pub fn builtin_examples() -> Vec<ExampleFixture> {
    vec![ex1(), ex2(), ex3(), ex4()]
}

fn scalar_plant() -> HomogeneousSystem {
    // ẋ = x³ + u + w, y = x
    HomogeneousSystem::new(
        Dilation::new(vec![1.0]).unwrap(),
        2.0,
        vec![parse("x1^3").unwrap()],
        vec![parse("1").unwrap()],
        vec![vec![parse("1").unwrap()]],
        vec![parse("x1").unwrap()],
        vec![0.0],
        0.0,
    )
    .unwrap()
}

fn ex1() -> ExampleFixture {
    ExampleFixture {
        id: "ex1",
        title: "scalar plant, no output penalty: ISS without finite L2 gain",
        system: scalar_plant(),
        nu: 2.0,
        lyapunov: LyapunovCandidate::new(parse("x1^4/4").unwrap(), 4.0),
        alpha_star: Some(parse("-6*x1^3").unwrap()),
        cost: Some(FixtureCost {
            e: parse("x1^4").unwrap(),
            l: parse("4*x1^6").unwrap(),
            r1: parse("1/3").unwrap(),
            r2: None,
            gamma0: PowerKInfinity::new(1.0, 2.0).unwrap(),
        }),
        l_tilde: None,
        synthesis: None,
        pinned_kappa: None,
        notes: "fixture-only: synthesis pipeline requires theta > 0",
    }
}

fn ex2() -> ExampleFixture {
    ExampleFixture {
        id: "ex2",
        title: "scalar plant with output penalty: ISS and finite L2 gain",
        system: scalar_plant(),
        nu: 2.0,
        lyapunov: LyapunovCandidate::new(parse("x1^2/2").unwrap(), 2.0),
        alpha_star: Some(parse("-4*x1^3 - 2.5*x1").unwrap()),
        cost: Some(FixtureCost {
            e: parse("2*x1^2").unwrap(),
            l: parse("4*x1^4").unwrap(),
            r1: parse("1/(2*x1^2 + 5/4)").unwrap(),
            r2: Some(parse("1").unwrap()),
            gamma0: PowerKInfinity::new(1.0, 2.0).unwrap(),
        }),
        l_tilde: None,
        synthesis: None,
        pinned_kappa: None,
        notes: "fixture-only: synthesis pipeline requires theta > 0",
    }
}

fn ex3() -> ExampleFixture {
    let l_tilde = format!(
        "2*(-{v} + pow({v}^2 + x2^12, 1/2)) \
         + 4*(apow(x2, 3)*pow(x1^2 + x2^2, 3/2) - x2^6) - x2^6",
        v = EX3_VARPI
    );
    ExampleFixture {
        id: "ex3",
        title: "planar degree-2 plant: reused state penalty turns indefinite",
        system: HomogeneousSystem::new(
            Dilation::new(vec![1.0, 1.0]).unwrap(),
            2.0,
            vec![parse("-x1^3 + x2^3").unwrap(), parse("0").unwrap()],
            vec![parse("0").unwrap(), parse("1").unwrap()],
            vec![vec![parse("0").unwrap()], vec![parse("1").unwrap()]],
            vec![parse("x2^3").unwrap()],
            vec![0.0],
            0.0,
        )
        .unwrap(),
        nu: 4.0,
        lyapunov: LyapunovCandidate::new(parse("(x1^4 + x2^4)/4").unwrap(), 4.0),
        alpha_star: None,
        cost: None,
        l_tilde: Some(parse(&l_tilde).unwrap()),
        synthesis: None,
        pinned_kappa: None,
        notes: "fixture-only: synthesis pipeline requires theta > 0",
    }
}

fn ex4() -> ExampleFixture {
    ExampleFixture {
        id: "ex4",
        title: "dilation-(3,1) planar plant: full synthesis demonstration",
        system: HomogeneousSystem::new(
            Dilation::new(vec![3.0, 1.0]).unwrap(),
            0.0,
            vec![parse("-x1 + x2^3").unwrap(), parse("0").unwrap()],
            vec![parse("0").unwrap(), parse("1").unwrap()],
            vec![vec![parse("0").unwrap()], vec![parse("1").unwrap()]],
            vec![parse("x2").unwrap(), parse("0").unwrap()],
            vec![0.0, 1.0],
            1.0,
        )
        .unwrap(),
        nu: 4.0,
        lyapunov: LyapunovCandidate::new(parse("pow(apow(x1, 4/3) + x2^4, 1/2)").unwrap(), 2.0),
        alpha_star: None,
        cost: None,
        l_tilde: None,
        synthesis: Some(SynthesisConfig {
            c10: 1.0,
            pi_coeff: Some(1.0),
            q0_predicate: Some(parse("abs(x1) - 4*apow(x2, 3)").unwrap()),
            beta: 2.0,
            lambda: 2.0,
            kappa_margin: 0.043,
            known_stabilizer: None,
            budget: SphereBudget::for_dim(2),
            seed: 42,
        }),
        pinned_kappa: Some(11.0),
        notes: "",
    }
}
