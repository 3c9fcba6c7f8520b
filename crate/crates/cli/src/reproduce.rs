//! Hard-coded fixture suites: each built-in example re-runs its checks at
//! the pinned tolerances and reports one line per criterion.

use homopt::expr::Env;
use homopt::fixtures;
use homopt::homogeneity::{HomogeneousNorm, SphereBudget};
use homopt::sim::{
    cost_identity_check, evaluate_cost, integrate, l2_gain_check, CostModel, DisturbanceSpec,
};
use homopt::synthesis::{prepare, synthesize_with_kappa, SynthesizedController};
use homopt::sysdef::lie_derivatives;
use homopt::verify::{
    check_ios_dissipation, check_iss_dissipation, check_pd_on_sphere, gain_margin_sweep,
    hji_residual, l2_offset, CostPieces, DissipationBound,
};

pub struct CriterionLine {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

fn line(label: &str, pass: bool, detail: String) -> CriterionLine {
    CriterionLine {
        label: label.to_string(),
        pass,
        detail,
    }
}

pub fn run(example: &str, seed: u64, budget: usize) -> Result<Vec<CriterionLine>, String> {
    match example {
        "ex1" => Ok(ex1(seed)),
        "ex2" => Ok(ex2(seed)),
        "ex3" => Ok(ex3(seed, budget)),
        "ex4" => ex4(seed, budget),
        other => Err(format!(
            "unknown example '{other}' (expected ex1, ex2, ex3 or ex4)"
        )),
    }
}

fn ex1(_seed: u64) -> Vec<CriterionLine> {
    let fx = fixtures::example("ex1").unwrap();
    let norm = HomogeneousNorm::new(fx.system.dilation.clone(), fx.nu).unwrap();
    let law = fx.alpha_star.clone().unwrap();
    let d = DisturbanceSpec::Zero.compile(1, None).unwrap();
    let mut lines = Vec::new();

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
    lines.push(line(
        "closed-form trajectory (x0=1, w=0, T=10)",
        max_err <= 1e-6,
        format!("max abs deviation {max_err:.2e}"),
    ));

    // the output energy grows like ln(1 + 10T)/10: not square-integrable
    let long = integrate(
        &fx.system,
        &fx.lyapunov,
        &norm,
        |x| law.eval(&Env::state(x)),
        &d,
        &[1.0],
        100.0,
        1e-9,
        20_000,
    )
    .unwrap();
    let mut table = Vec::new();
    let mut worst = 0.0f64;
    for horizon in [1.0, 10.0, 100.0] {
        let idx = (horizon / (long.times[1] - long.times[0])).round() as usize;
        let sub_y: Vec<f64> = long.y[..=idx].iter().map(|y| y[0] * y[0]).collect();
        let got = crate::csvout::running_integral(&long.times[..=idx], &sub_y)
            .last()
            .copied()
            .unwrap();
        let want = (1.0 + 10.0 * horizon).ln() / 10.0;
        worst = worst.max((got - want).abs());
        table.push(format!("T={horizon}: ∫y² = {got:.6} (log law {want:.6})"));
    }
    lines.push(line(
        "output energy grows without bound",
        worst <= 1e-4,
        table.join("; "),
    ));
    lines
}

fn ex2(seed: u64) -> Vec<CriterionLine> {
    let fx = fixtures::example("ex2").unwrap();
    let norm = HomogeneousNorm::new(fx.system.dilation.clone(), fx.nu).unwrap();
    let lie = lie_derivatives(&fx.system, &fx.lyapunov);
    let law = fx.alpha_star.clone().unwrap();
    let cost = fx.cost.as_ref().unwrap();
    let mut lines = Vec::new();

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
        seed,
        0.0,
        1e-12,
    )
    .unwrap();
    lines.push(line(
        "dissipation bound at 10^4 samples",
        rep.pass,
        rep.detail.unwrap_or_default(),
    ));

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
            worst_rel = worst_rel.max((j - 2.0 * x0 * x0).abs() / (2.0 * x0 * x0));
        }
    }
    lines.push(line(
        "pathwise cost identity J = 2x0²",
        worst_rel <= 1e-6,
        format!("worst relative deviation {worst_rel:.2e}"),
    ));

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
    let l2 = l2_gain_check(&traj, 1.0, 1.0, 1e-6);
    lines.push(line(
        "finite L2 gain ||y|| <= ||w|| + |x0|",
        l2.pass,
        format!("||y|| = {:.6}, bound {:.6}", l2.y_norm, l2.bound),
    ));

    // stationarity residual, reported as a diagnostic only
    let (pl, pr1, pr2) = (cost.l.clone(), cost.r1.clone(), cost.r2.clone().unwrap());
    let plf = move |x: &[f64]| pl.eval(&Env::state(x));
    let pr1f = move |x: &[f64]| pr1.eval(&Env::state(x));
    let pr2f = move |x: &[f64]| pr2.eval(&Env::state(x));
    let pieces = CostPieces {
        l: &plf,
        r1: &pr1f,
        r2: &pr2f,
        gamma0: cost.gamma0,
    };
    let res = hji_residual(&fx.system, &lie, &pieces, &[vec![1.0], vec![0.0]]).unwrap();
    lines.push(line(
        "stationarity residual (diagnostic, no verdict)",
        true,
        format!("residual at x=1: {:.6}; at origin: {}", res[0], res[1]),
    ));
    lines
}

fn ex3(seed: u64, budget: usize) -> Vec<CriterionLine> {
    let fx = fixtures::example("ex3").unwrap();
    let lt = fx.l_tilde.clone().unwrap();
    let norm = HomogeneousNorm::new(fx.system.dilation.clone(), fx.nu).unwrap();
    let rep = check_pd_on_sphere(
        move |x| lt.eval(&Env::state(x)),
        6.0,
        &norm,
        &SphereBudget::for_dim(2).with_samples(budget),
        seed,
    )
    .unwrap();
    vec![line(
        "reused state penalty turns indefinite",
        !rep.pass && rep.extremal_value < -0.1,
        format!(
            "sphere minimum {:.4} at ({:.4}, {:.4})",
            rep.extremal_value, rep.extremal_point[0], rep.extremal_point[1]
        ),
    )]
}

fn ex4_bundle(seed: u64, budget: usize) -> Result<SynthesizedController, String> {
    let fx = fixtures::example("ex4").unwrap();
    let mut cfg = fx.synthesis.clone().unwrap();
    cfg.seed = seed;
    cfg.budget = cfg.budget.with_samples(budget);
    synthesize_with_kappa(
        &fx.system,
        &fx.lyapunov,
        fx.nu,
        &cfg,
        fx.pinned_kappa.unwrap(),
    )
    .map_err(|e| e.to_string())
}

fn ex4(seed: u64, budget: usize) -> Result<Vec<CriterionLine>, String> {
    let fx = fixtures::example("ex4").unwrap();
    let mut cfg = fx.synthesis.clone().unwrap();
    cfg.seed = seed;
    cfg.budget = cfg.budget.with_samples(budget.max(16384));
    let space = prepare(&fx.system, &fx.lyapunov, fx.nu, &cfg).map_err(|e| e.to_string())?;
    let c = space.estimate_constants().map_err(|e| e.to_string())?;
    let mut lines = Vec::new();

    let reference = [
        ("rho1", c.rho1, 0.66, 0.05),
        ("rho2", c.rho2, 0.24, 0.05),
        ("rho3", c.rho3, 0.42, 0.05),
        ("rho4", c.rho4, 0.37, 0.05),
        ("rho", c.rho, 2.18, 0.05),
        ("kappa_c", c.kappa_c, 0.36, 0.05),
        ("kappa1", c.kappa1, 10.55, 0.3),
    ];
    let mut all = true;
    let mut parts = Vec::new();
    for (name, got, want, tol) in reference {
        let ok = (got - want).abs() <= tol;
        all &= ok;
        let note = if ok {
            String::new()
        } else {
            format!(" (reference {want})")
        };
        parts.push(format!("{name} {got:.3}{note}"));
    }
    lines.push(line(
        "sphere constants vs reference values",
        all,
        format!(
            "{}. Mismatched entries are the tight full-set extrema; the \
             reference figures correspond to a first-quadrant evaluation \
             (rho1 at the axis). Downstream guarantees below are unaffected.",
            parts.join(", ")
        ),
    ));

    let ctl = ex4_bundle(seed, budget)?;
    let sphere = SphereBudget::for_dim(2).with_samples(budget.max(4096));
    let h = check_pd_on_sphere(|x| ctl.h_kappa(x), 2.0, ctl.norm(), &sphere, seed)
        .map_err(|e| e.to_string())?;
    let l = check_pd_on_sphere(|x| ctl.state_penalty(x), 2.0, ctl.norm(), &sphere, seed)
        .map_err(|e| e.to_string())?;
    lines.push(line(
        "H_11 and l positive definite on the sphere",
        h.pass && l.pass,
        format!(
            "min H_11 = {:.4}, min l = {:.4}",
            h.extremal_value, l.extremal_value
        ),
    ));

    let x0 = [1.0, 0.5];
    let optimum = 2.0 * ctl.beta * ctl.lyapunov().eval(&x0).unwrap();
    let rep = cost_identity_check(&ctl, &x0, 20.0, 1e-3 * optimum, 1e-9, 8000)
        .map_err(|e| e.to_string())?;
    lines.push(line(
        "cost identity and dominance at x0 = (1, 0.5)",
        rep.pass,
        rep.checks
            .iter()
            .map(|ch| format!("{} -> J = {:.5}", ch.label, ch.j_t))
            .collect::<Vec<_>>()
            .join("; "),
    ));

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
        seed,
        1e-6,
        1e-12,
    )
    .map_err(|e| e.to_string())?;
    let ios = check_ios_dissipation(&ctl, 100, 100, 3.0, seed, 1e-9).map_err(|e| e.to_string())?;
    let kappa_l = ios.kappa_l.unwrap();
    let c0 = l2_offset(&ctl, &x0).map_err(|e| e.to_string())?;
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
    .map_err(|e| e.to_string())?;
    let l2 = l2_gain_check(&traj, kappa_l, c0, 1e-6);
    lines.push(line(
        "dissipation inequalities and simulated L2 gain",
        iss.pass && ios.report.pass && l2.pass,
        format!(
            "iss slack {:.2e}, ios slack {:.2e}, ||y|| = {:.4} vs {:.4} (kappa_L = {:.3}, rho_m = {:.4})",
            iss.extremal_value,
            ios.report.extremal_value,
            l2.y_norm,
            l2.bound,
            kappa_l,
            ctl.constants.rho_m
        ),
    ));

    let sweep = gain_margin_sweep(
        ctl.lie(),
        |x| ctl.alpha_star(x),
        ctl.beta,
        &[0.4, 0.6, 1.0, 5.0],
        ctl.norm(),
        &sphere,
        seed,
    )
    .map_err(|e| e.to_string())?;
    let pass = sweep.iter().all(|e| e.pass.unwrap_or(true));
    lines.push(line(
        "gain margin sweep",
        pass,
        sweep
            .iter()
            .map(|e| {
                format!(
                    "g = {}: min decrease {:.3}{}",
                    e.gain,
                    e.min_decrease,
                    if e.asserted { "" } else { " (reported only)" }
                )
            })
            .collect::<Vec<_>>()
            .join("; "),
    ));
    Ok(lines)
}
