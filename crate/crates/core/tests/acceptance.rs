//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (visible with `--nocapture`, and always on failure).
//!
//! Criterion 5 compares the sphere-constant estimator against the
//! reference values pinned by the ex4 fixture. The estimator is
//! cross-checked here against an exhaustive dense-grid oracle; the
//! reference values for rho1, rho3, kappa_c and kappa1 are not the tight
//! extrema over the stated sets (they correspond to a first-quadrant-only
//! evaluation, with rho1 taken at the axis), so those sub-checks fail and
//! are reported with both numbers. See the assertion message for details.

use homopt::expr::Env;
use homopt::fixtures;
use homopt::homogeneity::{
    check_homogeneous_field, check_homogeneous_scalar, HomogeneousNorm, SphereBudget,
    DEFAULT_EPS_GRID,
};
use homopt::lft::{young_argmax, young_gap, PowerKInfinity};
use homopt::sim::{
    cost_identity_check, evaluate_cost, integrate, l2_gain_check, l2_norms, CostModel,
    DisturbanceSpec,
};
use homopt::synthesis::{synthesize_with_kappa, SynthesizedController};
use homopt::sysdef::lie_derivatives;
use homopt::verify::{
    check_ios_dissipation, check_iss_dissipation, check_pd_on_sphere, gain_margin_sweep, l2_offset,
    DissipationBound,
};
use std::time::Instant;

fn verdict(id: &str, pass: bool, started: Instant, detail: &str) {
    let secs = started.elapsed().as_secs_f64();
    println!(
        "criterion {id}: {} ({secs:.2} s) {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn ex4_bundle(samples: usize) -> SynthesizedController {
    let fx = fixtures::example("ex4").unwrap();
    let mut cfg = fx.synthesis.clone().unwrap();
    cfg.budget = cfg.budget.with_samples(samples);
    synthesize_with_kappa(
        &fx.system,
        &fx.lyapunov,
        fx.nu,
        &cfg,
        fx.pinned_kappa.unwrap(),
    )
    .unwrap()
}

#[test]
fn criterion_01_scalar_loop_closed_form() {
    let t0 = Instant::now();
    let fx = fixtures::example("ex1").unwrap();
    let norm = HomogeneousNorm::new(fx.system.dilation.clone(), fx.nu).unwrap();
    let d = DisturbanceSpec::Zero.compile(1, None).unwrap();
    let law = fx.alpha_star.clone().unwrap();
    let traj = integrate(
        &fx.system,
        &fx.lyapunov,
        &norm,
        |x| law.eval(&Env::state(x)),
        &d,
        &[1.0],
        10.0,
        1e-9,
        4000,
    )
    .unwrap();
    let mut max_err = 0.0f64;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        max_err = max_err.max((x[0] - 1.0 / (1.0 + 10.0 * t).sqrt()).abs());
    }
    let (y_norm, _) = l2_norms(&traj);
    let int_y2 = y_norm * y_norm;
    let want = (1.0 + 100.0_f64).ln() / 10.0;
    let pass = max_err <= 1e-6 && (int_y2 - want).abs() <= 1e-4;
    verdict(
        "01 closed-form trajectory",
        pass,
        t0,
        &format!("max |x - exact| = {max_err:.2e}, ∫y² = {int_y2:.6} vs {want:.6}"),
    );
    assert!(pass);
    assert!(t0.elapsed().as_secs_f64() < 1.0, "runtime budget exceeded");
}

#[test]
fn criterion_02_scalar_dissipation() {
    let t0 = Instant::now();
    let fx = fixtures::example("ex2").unwrap();
    let lie = lie_derivatives(&fx.system, &fx.lyapunov);
    let law = fx.alpha_star.clone().unwrap();
    let bound = |x: &[f64], w: &[f64]| -3.0 * x[0].powi(4) - 1.5 * x[0] * x[0] + w[0] * w[0];
    let rep = check_iss_dissipation(
        &lie,
        |x| law.eval(&Env::state(x)),
        DissipationBound::Custom(&bound),
        1,
        1,
        100,
        100,
        3.0,
        42,
        0.0,
        1e-12,
    )
    .unwrap();
    verdict(
        "02 scalar dissipation",
        rep.pass,
        t0,
        rep.detail.as_deref().unwrap_or(""),
    );
    assert!(rep.pass);
    assert!(t0.elapsed().as_secs_f64() < 1.0, "runtime budget exceeded");
}

#[test]
fn criterion_03_scalar_cost_identity() {
    let t0 = Instant::now();
    let fx = fixtures::example("ex2").unwrap();
    let norm = HomogeneousNorm::new(fx.system.dilation.clone(), fx.nu).unwrap();
    let law = fx.alpha_star.clone().unwrap();
    let cost = fx.cost.as_ref().unwrap();
    let (le, ll, lr1, lr2) = (
        cost.e.clone(),
        cost.l.clone(),
        cost.r1.clone(),
        cost.r2.clone().unwrap(),
    );
    let ef = move |x: &[f64]| le.eval(&Env::state(x));
    let lf = move |x: &[f64]| ll.eval(&Env::state(x));
    let r1f = move |x: &[f64]| lr1.eval(&Env::state(x));
    let r2f = move |x: &[f64]| lr2.eval(&Env::state(x));
    let model = CostModel {
        e: &ef,
        l: &lf,
        r1: &r1f,
        r2: Some(&r2f),
        gamma0: cost.gamma0,
    };
    let spec = DisturbanceSpec::Custom {
        exprs: vec!["2*x1".to_string()],
    };
    let d = spec.compile(1, None).unwrap();
    let mut worst_rel = 0.0f64;
    for x0 in [0.5, 1.0, 2.0] {
        let traj = integrate(
            &fx.system,
            &fx.lyapunov,
            &norm,
            |x| law.eval(&Env::state(x)),
            &d,
            &[x0],
            20.0,
            1e-9,
            20_000,
        )
        .unwrap();
        for horizon in [1.0, 5.0, 20.0] {
            let j = evaluate_cost(&traj, &model, horizon).unwrap().total;
            let want = 2.0 * x0 * x0;
            worst_rel = worst_rel.max((j - want).abs() / want);
        }
    }
    let pass = worst_rel <= 1e-6;
    verdict(
        "03 pathwise cost identity",
        pass,
        t0,
        &format!("worst |J - 2x0²|/2x0² = {worst_rel:.2e} over 9 cases"),
    );
    assert!(pass);
    assert!(t0.elapsed().as_secs_f64() < 2.0, "runtime budget exceeded");
}

#[test]
fn criterion_04_scalar_l2_gain() {
    let t0 = Instant::now();
    let fx = fixtures::example("ex2").unwrap();
    let norm = HomogeneousNorm::new(fx.system.dilation.clone(), fx.nu).unwrap();
    let law = fx.alpha_star.clone().unwrap();
    let spec = DisturbanceSpec::Sinusoid {
        amplitude: vec![1.0],
        frequency: 3.0,
        phase: 0.0,
        decay: 0.1,
    };
    let d = spec.compile(1, None).unwrap();
    let traj = integrate(
        &fx.system,
        &fx.lyapunov,
        &norm,
        |x| law.eval(&Env::state(x)),
        &d,
        &[1.0],
        50.0,
        1e-9,
        8000,
    )
    .unwrap();
    let rep = l2_gain_check(&traj, 1.0, 1.0, 1e-6);
    verdict(
        "04 scalar finite L2 gain",
        rep.pass,
        t0,
        &format!("||y|| = {:.6} vs bound {:.6}", rep.y_norm, rep.bound),
    );
    assert!(rep.pass);
    assert!(t0.elapsed().as_secs_f64() < 1.0, "runtime budget exceeded");
}

#[test]
fn criterion_05_sphere_constants() {
    let t0 = Instant::now();
    let fx = fixtures::example("ex4").unwrap();
    let mut cfg = fx.synthesis.clone().unwrap();
    cfg.budget = cfg.budget.with_samples(16384);
    let space = homopt::synthesis::prepare(&fx.system, &fx.lyapunov, fx.nu, &cfg).unwrap();
    let c = space.estimate_constants().unwrap();

    // Exhaustive 1-D oracle over the circle parameter, fully independent
    // of the sampling optimizer.
    let (mut o_rho1, mut o_rho2, mut o_rho3, mut o_rho4, mut o_rho) =
        (f64::MAX, f64::MIN, f64::MAX, f64::MIN, f64::MIN);
    let n = 1_000_000;
    for i in 0..n {
        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let p = space.norm().project(&[t.cos(), t.sin()]).unwrap();
        let x = p.coords();
        let in_q0 = x[0].abs() >= 4.0 * x[1].abs().powi(3);
        let lftil = space.lftilde_v(x).unwrap();
        let r = space.weight_r(x).unwrap();
        let hrh = x[1] * x[1] * r;
        let b = space.lie().lg1_v(x).unwrap();
        if in_q0 {
            o_rho1 = o_rho1.min(-lftil);
            o_rho2 = o_rho2.max(hrh);
        } else {
            o_rho3 = o_rho3.min(b * b / r);
            o_rho4 = o_rho4.max(hrh);
            o_rho = o_rho.max(lftil);
        }
    }
    let estimator_consistent = (c.rho1 - o_rho1).abs() < 5e-3
        && (c.rho2 - o_rho2).abs() < 5e-3
        && (c.rho3 - o_rho3).abs() < 5e-3
        && (c.rho4 - o_rho4).abs() < 5e-3
        && (c.rho - o_rho).abs() < 5e-3;

    let reference = [
        ("rho1", c.rho1, 0.66, 0.05),
        ("rho2", c.rho2, 0.24, 0.05),
        ("rho3", c.rho3, 0.42, 0.05),
        ("rho4", c.rho4, 0.37, 0.05),
        ("rho", c.rho, 2.18, 0.05),
        ("kappa_c", c.kappa_c, 0.36, 0.05),
        ("kappa1", c.kappa1, 10.55, 0.3),
    ];
    let mut lines = Vec::new();
    let mut all = true;
    for (name, got, want, tol) in reference {
        let ok = (got - want).abs() <= tol;
        all &= ok;
        lines.push(format!(
            "{name}: measured {got:.4} vs reference {want} (±{tol}) {}",
            if ok { "ok" } else { "MISMATCH" }
        ));
    }
    verdict(
        "05 sphere constants vs reference",
        all,
        t0,
        &format!(
            "estimator agrees with dense-grid oracle: {estimator_consistent}\n  {}",
            lines.join("\n  ")
        ),
    );
    assert!(
        estimator_consistent,
        "sphere-constant estimator disagrees with the exhaustive oracle"
    );
    assert!(t0.elapsed().as_secs_f64() < 30.0, "runtime budget exceeded");
    assert!(
        all,
        "reference values not reproduced by the tight extrema over the stated sets.\n\
         Measured (= exhaustive dense-grid extrema, cross-checked above):\n  {}\n\
         The reference figures for rho1/rho3/kappa_c/kappa1 match a first-quadrant-only\n\
         evaluation of the same expressions (rho1 additionally taken as the axis value\n\
         max -L_ftilde V = 2/3 instead of the set minimum 0.33); the estimator here\n\
         evaluates the full sets, where the sign-mixed boundary corner attains the\n\
         true extrema. The selected gain remains valid: see criteria 6-8, 10.",
        lines.join("\n  ")
    );
}

#[test]
fn criterion_06_positive_definiteness() {
    let t0 = Instant::now();
    let ctl = ex4_bundle(4096);
    let budget = SphereBudget::for_dim(2);
    let h = check_pd_on_sphere(|x| ctl.h_kappa(x), 2.0, ctl.norm(), &budget, 42).unwrap();
    let l = check_pd_on_sphere(|x| ctl.state_penalty(x), 2.0, ctl.norm(), &budget, 42).unwrap();
    let pass = h.pass && l.pass;
    verdict(
        "06 positive definiteness of H_11 and l",
        pass,
        t0,
        &format!(
            "min H_11 = {:.4}, min l = {:.4} over {} refined samples",
            h.extremal_value, l.extremal_value, budget.samples
        ),
    );
    assert!(pass);
    assert!(t0.elapsed().as_secs_f64() < 30.0, "runtime budget exceeded");
}

#[test]
fn criterion_07_cost_identity_and_dominance() {
    let t0 = Instant::now();
    let ctl = ex4_bundle(2048);
    let x0 = [1.0, 0.5];
    let optimum = 2.0 * ctl.beta * ctl.lyapunov().eval(&x0).unwrap();
    let tol = 1e-3 * optimum;
    let rep = cost_identity_check(&ctl, &x0, 20.0, tol, 1e-9, 8000).unwrap();
    let detail: Vec<String> = rep
        .checks
        .iter()
        .map(|c| {
            format!(
                "{}: J = {:.6} vs {:.6} [{}]",
                c.label,
                c.j_t,
                c.reference,
                if c.pass { "ok" } else { "violated" }
            )
        })
        .collect();
    verdict(
        "07 cost identity and dominance",
        rep.pass,
        t0,
        &format!("optimum 2βV(x0) = {optimum:.6}\n  {}", detail.join("\n  ")),
    );
    assert!(rep.pass, "{detail:?}");
    assert!(t0.elapsed().as_secs_f64() < 5.0, "runtime budget exceeded");
}

#[test]
fn criterion_08_iss_ios_inequalities() {
    let t0 = Instant::now();
    let ctl = ex4_bundle(2048);
    let iss = check_iss_dissipation(
        ctl.lie(),
        |x| ctl.alpha_star(x),
        DissipationBound::CertifiedDecay {
            c1: ctl.constants.c1,
            gamma: ctl.gamma(),
            norm: ctl.norm(),
            degree: 2.0,
        },
        2,
        1,
        100,
        100,
        3.0,
        42,
        1e-6,
        1e-12,
    )
    .unwrap();
    let ios = check_ios_dissipation(&ctl, 100, 100, 3.0, 42, 1e-9).unwrap();

    // simulated finite-gain check with the measured rho_m
    let x0 = [1.0, 0.5];
    let kappa_l = ios.kappa_l.unwrap();
    let c0 = l2_offset(&ctl, &x0).unwrap();
    let spec = DisturbanceSpec::Sinusoid {
        amplitude: vec![1.0],
        frequency: 3.0,
        phase: 0.0,
        decay: 0.1,
    };
    let d = spec.compile(1, None).unwrap();
    let traj = integrate(
        ctl.system(),
        ctl.lyapunov(),
        ctl.norm(),
        |x| ctl.alpha_star(x),
        &d,
        &x0,
        20.0,
        1e-8,
        4000,
    )
    .unwrap();
    let l2 = l2_gain_check(&traj, kappa_l, c0, 1e-6);

    let pass = iss.pass && ios.report.pass && l2.pass;
    verdict(
        "08 dissipation inequalities and L2 gain",
        pass,
        t0,
        &format!(
            "iss worst slack {:.2e}; ios worst slack {:.2e}; ||y|| = {:.4} vs κ_L·||w|| + c0 = {:.4}",
            iss.extremal_value, ios.report.extremal_value, l2.y_norm, l2.bound
        ),
    );
    assert!(pass);
    assert!(t0.elapsed().as_secs_f64() < 10.0, "runtime budget exceeded");
}

#[test]
fn criterion_09_indefinite_penalty_witness() {
    let t0 = Instant::now();
    let fx = fixtures::example("ex3").unwrap();
    let lt = fx.l_tilde.clone().unwrap();
    let norm = HomogeneousNorm::new(fx.system.dilation.clone(), fx.nu).unwrap();
    let rep = check_pd_on_sphere(
        move |x| lt.eval(&Env::state(x)),
        6.0,
        &norm,
        &SphereBudget::for_dim(2),
        42,
    )
    .unwrap();
    let pass = !rep.pass && rep.extremal_value < -0.1;
    verdict(
        "09 indefinite penalty witness",
        pass,
        t0,
        &format!(
            "sphere minimum {:.4} at {:?}",
            rep.extremal_value, rep.extremal_point
        ),
    );
    assert!(pass);
    assert!(t0.elapsed().as_secs_f64() < 5.0, "runtime budget exceeded");
}

#[test]
fn criterion_10_gain_margin_sweep() {
    let t0 = Instant::now();
    let ctl = ex4_bundle(2048);
    let entries = gain_margin_sweep(
        ctl.lie(),
        |x| ctl.alpha_star(x),
        ctl.beta,
        &[0.4, 0.6, 1.0, 5.0],
        ctl.norm(),
        &SphereBudget::for_dim(2),
        42,
    )
    .unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for e in &entries {
        match e.pass {
            Some(ok) => {
                pass &= ok;
                detail.push(format!(
                    "g = {}: min decrease {:.4} (asserted)",
                    e.gain, e.min_decrease
                ));
            }
            None => detail.push(format!(
                "g = {}: min decrease {:.4} (reported only)",
                e.gain, e.min_decrease
            )),
        }
    }
    verdict("10 gain margin sweep", pass, t0, &detail.join("; "));
    assert!(pass);
    assert!(t0.elapsed().as_secs_f64() < 10.0, "runtime budget exceeded");
}

#[test]
fn criterion_11_property_suites() {
    let t0 = Instant::now();
    let mut failures = Vec::new();

    // double Legendre-Fenchel transform is the identity (1e-12)
    for (a, p) in [(1.0, 2.0), (2.0, 2.0), (0.5, 1.5), (3.0, 4.0)] {
        let g = PowerKInfinity::new(a, p).unwrap();
        let gg = g.lf_transform().lf_transform();
        if (gg.coefficient() - a).abs() > 1e-12 * a || (gg.exponent() - p).abs() > 1e-12 * p {
            failures.push(format!("double transform drift at ({a}, {p})"));
        }
    }

    // Young gap nonnegativity and equality at the maximizer (1e-10)
    let g = PowerKInfinity::new(2.0, 2.0).unwrap();
    let mut state = 0xc0ffeeu64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 16.0 - 8.0
    };
    for _ in 0..1000 {
        let a = [next(), next()];
        let b = [next(), next()];
        if young_gap(&g, &a, &b) < -1e-12 {
            failures.push(format!("negative Young gap at {a:?}, {b:?}"));
        }
        let astar = young_argmax(&g, &b);
        if young_gap(&g, &astar, &b).abs() > 1e-10 {
            failures.push(format!("Young equality violated at b = {b:?}"));
        }
    }

    // homogeneity degree ledger for every synthesized object (1e-6)
    let ctl = ex4_bundle(2048);
    let d = ctl.system().dilation.clone();
    let deg2 = 2.0; // 2(k + r0)
    let deg1 = 1.0; // k + r0
    let scalar_checks: Vec<(
        &str,
        Box<dyn Fn(&[f64]) -> homopt::expr::EvalResult<f64>>,
        f64,
    )> = vec![
        ("phi", Box::new(|x: &[f64]| ctl.phi(x)), deg2),
        ("H_kappa", Box::new(|x: &[f64]| ctl.h_kappa(x)), deg2),
        ("l", Box::new(|x: &[f64]| ctl.state_penalty(x)), deg2),
        ("l_bar", Box::new(|x: &[f64]| ctl.l_bar(x)), deg2),
        ("M", Box::new(|x: &[f64]| ctl.m(x)), deg2),
        ("M1", Box::new(|x: &[f64]| ctl.m1(x)), deg2),
        ("alpha_s", Box::new(|x: &[f64]| ctl.sontag(x)), deg1),
        ("alpha", Box::new(|x: &[f64]| ctl.alpha(x)), deg1),
        ("alpha_star", Box::new(|x: &[f64]| ctl.alpha_star(x)), deg1),
        ("R", Box::new(|x: &[f64]| ctl.weight_r(x)), 0.0),
    ];
    for (name, f, deg) in &scalar_checks {
        let rep = check_homogeneous_scalar(f, *deg, &d, 64, &DEFAULT_EPS_GRID, 1e-6, 42).unwrap();
        if !rep.pass {
            failures.push(format!(
                "{name} fails degree {deg} (max rel {:.2e})",
                rep.max_rel_error
            ));
        }
    }
    let rep = check_homogeneous_field(|x| ctl.f_tilde(x), 0.0, &d, 64, &DEFAULT_EPS_GRID, 1e-6, 42)
        .unwrap();
    if !rep.pass {
        failures.push(format!(
            "f_tilde fails degree 0 (max rel {:.2e})",
            rep.max_rel_error
        ));
    }

    // pointwise cost-assembly identity (1e-9):
    // l + u²R1 + yᵀR2·y = l_bar + (2θ²/κ)u²R for arbitrary u
    let th2 = ctl.system().theta * ctl.system().theta;
    for _ in 0..200 {
        let x = [next() * 0.3, next() * 0.3];
        if x[0] == 0.0 && x[1] == 0.0 {
            continue;
        }
        let u = next();
        let y = ctl.output(&x, u).unwrap();
        let ysq: f64 = y.iter().map(|v| v * v).sum();
        let lhs = ctl.state_penalty(&x).unwrap()
            + u * u * ctl.r1(&x).unwrap()
            + ctl.r2(&x).unwrap() * ysq;
        let rhs =
            ctl.l_bar(&x).unwrap() + 2.0 * th2 / ctl.kappa * u * u * ctl.weight_r(&x).unwrap();
        let scale = lhs.abs().max(rhs.abs()).max(1e-9);
        if ((lhs - rhs) / scale).abs() > 1e-9 {
            failures.push(format!("cost assembly identity off at {x:?}, u = {u}"));
        }
    }

    // symbolic derivatives against central differences (1e-6)
    let fx = fixtures::example("ex4").unwrap();
    let grad0 = fx.lyapunov.v.diff(homopt::expr::Var::X(0));
    let grad1 = fx.lyapunov.v.diff(homopt::expr::Var::X(1));
    for _ in 0..100 {
        let x = [next().clamp(-8.0, 8.0), next().clamp(-8.0, 8.0)];
        if x[0].abs() < 0.1 || x[1].abs() < 0.1 {
            continue;
        }
        let h = 1e-6;
        for (i, gsym) in [&grad0, &grad1].iter().enumerate() {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (fx.lyapunov.eval(&xp).unwrap() - fx.lyapunov.eval(&xm).unwrap()) / (2.0 * h);
            let sym = gsym.eval(&Env::state(&x)).unwrap();
            let scale = fd.abs().max(sym.abs()).max(1e-3);
            if ((fd - sym) / scale).abs() > 1e-6 {
                failures.push(format!("derivative mismatch at {x:?} component {i}"));
            }
        }
    }

    let pass = failures.is_empty();
    verdict(
        "11 property suites",
        pass,
        t0,
        &if pass {
            "transforms, Young pairing, degree ledger, cost assembly, derivatives".to_string()
        } else {
            failures.join("; ")
        },
    );
    assert!(pass, "{failures:?}");
    assert!(t0.elapsed().as_secs_f64() < 10.0, "runtime budget exceeded");
}
