//! Command-line front end: config-driven validation, synthesis,
//! verification and simulation, plus reproduction of the built-in example
//! suites.
//!
//! Exit codes: 0 all checks pass, 1 a domain check failed (validation,
//! synthesis, certification, assertion), 2 usage or IO trouble.

// negated float comparisons like !(x > 0.0) deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod csvout;
mod report;
mod reproduce;

use clap::{Parser, Subcommand};
use config::{Built, Overrides, ProjectConfig};
use homopt::expr::Expr;
use homopt::sim::{evaluate_cost, integrate, CostModel};
use homopt::synthesis::{synthesize, synthesize_with_kappa, SynthesizedController};
use homopt::sysdef::validate_system;
use homopt::verify::{
    check_ios_dissipation, check_iss_dissipation, check_pd_on_sphere, DissipationBound,
};
use report::{write_atomic, RunReport};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "homopt",
    version,
    about = "Synthesis and numerical certification of inverse-optimal ISS controllers for homogeneous plants"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Sampling seed (overrides the config's verify.seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sphere sampling budget (overrides verify.budget)
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Inequality tolerance (overrides verify.tol)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the JSON report to this path
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report to stdout
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every structural and homogeneity invariant of the plant
    Validate { config: PathBuf },
    /// Run the full synthesis pipeline and report constants and pieces
    Synthesize { config: PathBuf },
    /// Synthesize, then certify positivity and the dissipation inequalities
    Verify { config: PathBuf },
    /// Integrate the closed loop for each initial state and disturbance
    Simulate {
        config: PathBuf,
        /// Directory for trajectory CSV files
        #[arg(long, default_value = "sim-out")]
        out_dir: PathBuf,
    },
    /// Re-run a built-in example suite (ex1 | ex2 | ex3 | ex4)
    Reproduce { example: String },
    /// Sphere decrease minima under scaled feedback g·alpha*
    SweepGain {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.4, 0.6, 1.0, 5.0])]
        gains: Vec<f64>,
    },
}

enum CliError {
    Usage(String),
    Domain(String),
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        budget: cli.budget,
        tol: cli.tol,
    };
    let outcome = match &cli.cmd {
        Cmd::Validate { config } => cmd_validate(config, &cli, overrides),
        Cmd::Synthesize { config } => cmd_synthesize(config, &cli, overrides),
        Cmd::Verify { config } => cmd_verify(config, &cli, overrides),
        Cmd::Simulate { config, out_dir } => cmd_simulate(config, out_dir, &cli, overrides),
        Cmd::Reproduce { example } => cmd_reproduce(example, &cli, overrides),
        Cmd::SweepGain { config, gains } => cmd_sweep_gain(config, gains, &cli, overrides),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn load(path: &Path, overrides: Overrides) -> Result<(ProjectConfig, Built), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let cfg = ProjectConfig::from_str(&text).map_err(CliError::Usage)?;
    let built = cfg.build(&overrides).map_err(CliError::Usage)?;
    Ok((cfg, built))
}

fn emit(report: &RunReport, cli: &Cli) -> Result<(), CliError> {
    if cli.json {
        println!("{}", report.to_json());
    }
    if let Some(path) = &cli.out {
        write_atomic(path, &report.to_json())
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn say(cli: &Cli, msg: String) {
    // with --json, stdout carries only the report document
    if cli.json {
        eprintln!("{msg}");
    } else {
        println!("{msg}");
    }
}

fn config_echo(cfg: &ProjectConfig) -> Value {
    serde_json::to_value(cfg).expect("config re-serializes")
}

fn cmd_validate(path: &Path, cli: &Cli, overrides: Overrides) -> Result<i32, CliError> {
    let (cfg, built) = load(path, overrides)?;
    let rep = validate_system(
        &built.system,
        &built.lyapunov,
        built.nu,
        64,
        1e-8,
        built.verify.seed,
    );
    let mut out = RunReport::new(
        "validate",
        built.verify.seed,
        built.verify.budget,
        config_echo(&cfg),
    );
    for entry in &rep.entries {
        say(
            cli,
            format!(
                "{}: {} (max error {:.2e})",
                entry.name,
                if entry.pass { "ok" } else { "FAIL" },
                entry.max_error
            ),
        );
    }
    say(
        cli,
        format!(
            "validation {} ({} checks, synthesizable: {})",
            if rep.pass { "PASSED" } else { "FAILED" },
            rep.entries.len(),
            rep.synthesizable
        ),
    );
    out.stage("validation", rep.pass, serde_json::to_value(&rep).unwrap());
    emit(&out, cli)?;
    Ok(if rep.pass { 0 } else { 1 })
}

fn build_controller(built: &Built) -> Result<SynthesizedController, CliError> {
    let syn = built
        .synthesis
        .clone()
        .ok_or_else(|| CliError::Domain("config has no synthesis block".to_string()))?;
    let result = match built.pinned_kappa {
        Some(kappa) => synthesize_with_kappa(&built.system, &built.lyapunov, built.nu, &syn, kappa),
        None => synthesize(&built.system, &built.lyapunov, built.nu, &syn),
    };
    result.map_err(|e| CliError::Domain(format!("synthesis: {e}")))
}

fn controller_summary(ctl: &SynthesizedController, built: &Built) -> Value {
    let e_expr = Expr::Mul(
        Box::new(Expr::Num(2.0 * ctl.beta)),
        Box::new(built.lyapunov.v.clone()),
    );
    let g0 = ctl.gamma0();
    json!({
        "kappa": ctl.kappa,
        "beta": ctl.beta,
        "lambda": ctl.lambda,
        "c10": ctl.c10(),
        "gamma": { "coefficient": ctl.gamma().coefficient(), "exponent": ctl.gamma().exponent() },
        "gamma0": { "coefficient": g0.coefficient(), "exponent": g0.exponent() },
        "constants": ctl.constants,
        "pieces": {
            "E": { "form": "expr", "text": e_expr.to_string() },
            "alpha_star": {
                "form": "numeric",
                "description": "-(beta*kappa/(2*theta^2)) * R(x)^(-1) * L_G1V(x)"
            },
            "R": {
                "form": "numeric",
                "description": "Sontag weight; equals 1/(theta^2*c10) where L_G1V vanishes"
            },
            "R1": { "form": "numeric", "description": "theta^2 * R(x) / kappa" },
            "R2": { "form": "numeric", "description": "R(x) / kappa" },
            "l": { "form": "numeric", "description": "l_bar(x) - h(x)'R(x)h(x)/kappa" },
        },
    })
}

fn cmd_synthesize(path: &Path, cli: &Cli, overrides: Overrides) -> Result<i32, CliError> {
    let (cfg, built) = load(path, overrides)?;
    let ctl = build_controller(&built)?;
    let mut out = RunReport::new(
        "synthesize",
        built.verify.seed,
        built.verify.budget,
        config_echo(&cfg),
    );
    let c = &ctl.constants;
    say(
        cli,
        format!(
            "synthesized: kappa = {:.4} (kappa_c = {:.4}, kappa1 = {:.4}), beta = {}, lambda = {}",
            ctl.kappa, c.kappa_c, c.kappa1, ctl.beta, ctl.lambda
        ),
    );
    say(cli, format!(
        "constants: c1 = {:.4}, c2 = {:.4}, c6 = {:.4}, c8 = {:.4}, rho1 = {:.4}, rho2 = {:.4}, rho3 = {:.4}, rho4 = {:.4}, rho = {:.4}, rho_m = {:.4}",
        c.c1, c.c2, c.c6, c.c8, c.rho1, c.rho2, c.rho3, c.rho4, c.rho, c.rho_m
    ));
    out.stage("synthesis", true, controller_summary(&ctl, &built));
    emit(&out, cli)?;
    Ok(0)
}

fn cmd_verify(path: &Path, cli: &Cli, overrides: Overrides) -> Result<i32, CliError> {
    let (cfg, built) = load(path, overrides)?;
    let ctl = build_controller(&built)?;
    let vb = &built.verify;
    let budget = homopt::SphereBudget::for_dim(built.system.n()).with_samples(vb.budget);
    let mut out = RunReport::new("verify", vb.seed, vb.budget, config_echo(&cfg));
    let kr0 = built.system.k + built.system.r0();

    let h = check_pd_on_sphere(|x| ctl.h_kappa(x), 2.0 * kr0, ctl.norm(), &budget, vb.seed)
        .map_err(|e| CliError::Domain(format!("H_kappa positivity: {e}")))?;
    say(
        cli,
        format!(
            "H_kappa positive definite: {} (sphere min {:.4})",
            if h.pass { "ok" } else { "FAIL" },
            h.extremal_value
        ),
    );
    out.stage("pd-H_kappa", h.pass, serde_json::to_value(&h).unwrap());

    let l = check_pd_on_sphere(
        |x| ctl.state_penalty(x),
        2.0 * kr0,
        ctl.norm(),
        &budget,
        vb.seed,
    )
    .map_err(|e| CliError::Domain(format!("state-penalty positivity: {e}")))?;
    say(
        cli,
        format!(
            "state penalty positive definite: {} (sphere min {:.4})",
            if l.pass { "ok" } else { "FAIL" },
            l.extremal_value
        ),
    );
    out.stage(
        "pd-state-penalty",
        l.pass,
        serde_json::to_value(&l).unwrap(),
    );

    let iss = check_iss_dissipation(
        ctl.lie(),
        |x| ctl.alpha_star(x),
        DissipationBound::CertifiedDecay {
            c1: ctl.constants.c1,
            gamma: ctl.gamma(),
            norm: ctl.norm(),
            degree: 2.0 * kr0,
        },
        built.system.n(),
        built.system.xi(),
        100,
        100,
        3.0,
        vb.seed,
        vb.tol,
        1e-12,
    )
    .map_err(|e| CliError::Domain(format!("iss check: {e}")))?;
    say(
        cli,
        format!(
            "state dissipation inequality: {} ({})",
            if iss.pass { "ok" } else { "FAIL" },
            iss.detail.as_deref().unwrap_or("")
        ),
    );
    out.stage(
        "iss-dissipation",
        iss.pass,
        serde_json::to_value(&iss).unwrap(),
    );

    let ios = check_ios_dissipation(&ctl, 100, 100, 3.0, vb.seed, 1e-9)
        .map_err(|e| CliError::Domain(format!("ios check: {e}")))?;
    say(
        cli,
        format!(
            "output dissipation inequality: {} ({})",
            if ios.report.pass { "ok" } else { "FAIL" },
            ios.report.detail.as_deref().unwrap_or("")
        ),
    );
    out.stage(
        "ios-dissipation",
        ios.report.pass,
        serde_json::to_value(&ios).unwrap(),
    );

    let pass = out.pass;
    say(
        cli,
        format!("verification {}", if pass { "PASSED" } else { "FAILED" }),
    );
    emit(&out, cli)?;
    Ok(if pass { 0 } else { 1 })
}

fn cmd_simulate(
    path: &Path,
    out_dir: &Path,
    cli: &Cli,
    overrides: Overrides,
) -> Result<i32, CliError> {
    let (cfg, built) = load(path, overrides)?;
    let sim = built
        .simulate
        .clone()
        .ok_or_else(|| CliError::Usage("config has no simulate block".to_string()))?;
    let ctl = if built.synthesis.is_some() {
        Some(build_controller(&built)?)
    } else {
        None
    };
    if ctl.is_none() && built.controller.is_none() {
        return Err(CliError::Domain(
            "simulate needs a synthesis block or simulate.controller".to_string(),
        ));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let norm = homopt::HomogeneousNorm::new(built.system.dilation.clone(), built.nu)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let mut out = RunReport::new(
        "simulate",
        built.verify.seed,
        built.verify.budget,
        config_echo(&cfg),
    );

    let control = |x: &[f64]| -> homopt::expr::EvalResult<f64> {
        match (&ctl, &built.controller) {
            (_, Some(law)) => law.eval(&homopt::expr::Env::state(x)),
            (Some(c), None) => c.alpha_star(x),
            (None, None) => unreachable!(),
        }
    };
    let worst_params = ctl.as_ref().map(|c| {
        let g = c.gamma();
        (c.lambda, (g.coefficient(), g.exponent()))
    });

    for (i, x0) in sim.x0.iter().enumerate() {
        for dcfg in &sim.disturbances {
            let spec = dcfg.lower(worst_params).map_err(CliError::Domain)?;
            let lie = ctl.as_ref().map(|c| c.lie());
            let d = spec
                .compile(built.system.xi(), lie)
                .map_err(|e| CliError::Domain(e.to_string()))?;
            let traj = integrate(
                &built.system,
                &built.lyapunov,
                &norm,
                control,
                &d,
                x0,
                sim.t_final,
                sim.integrator_tol,
                2000,
            )
            .map_err(|e| CliError::Domain(format!("integration: {e}")))?;

            // running_J uses the synthesized pieces when available,
            // otherwise the raw output energy
            let (running, cost_value) = match &ctl {
                Some(c) => {
                    let integrand: Vec<f64> = (0..traj.times.len())
                        .map(|idx| {
                            let x = &traj.states[idx];
                            let l = c.state_penalty(x).unwrap_or(f64::NAN);
                            let r1 = c.r1(x).unwrap_or(f64::NAN);
                            let r2 = c.r2(x).unwrap_or(f64::NAN);
                            let ysq: f64 = traj.y[idx].iter().map(|v| v * v).sum();
                            let wn: f64 = traj.w[idx].iter().map(|v| v * v).sum::<f64>().sqrt();
                            l + traj.u[idx] * traj.u[idx] * r1 + r2 * ysq - c.gamma0().eval(wn)
                        })
                        .collect();
                    let running = csvout::running_integral(&traj.times, &integrand);
                    let (e, l, r1, r2) = c.cost_integrands();
                    let model = CostModel {
                        e: &e,
                        l: &l,
                        r1: &r1,
                        r2: Some(&r2),
                        gamma0: c.gamma0(),
                    };
                    let j = evaluate_cost(&traj, &model, sim.t_final)
                        .map(|b| b.total)
                        .unwrap_or(f64::NAN);
                    (running, Some(j))
                }
                None => {
                    let ysq: Vec<f64> = traj
                        .y
                        .iter()
                        .map(|y| y.iter().map(|v| v * v).sum::<f64>())
                        .collect();
                    (csvout::running_integral(&traj.times, &ysq), None)
                }
            };
            let name = format!("traj_x{}_{}.csv", i, dcfg.label());
            let file = out_dir.join(&name);
            write_atomic(&file, &csvout::trajectory_csv(&traj, &running))
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", file.display())))?;
            say(
                cli,
                format!(
                    "wrote {} ({} nodes{}{})",
                    file.display(),
                    traj.times.len(),
                    if traj.terminated_at_origin {
                        ", reached the origin"
                    } else {
                        ""
                    },
                    cost_value
                        .map(|j| format!(", J_T = {j:.6}"))
                        .unwrap_or_default()
                ),
            );
            out.stage(
                format!("trajectory x0[{i}] {}", dcfg.label()),
                true,
                json!({
                    "file": name,
                    "nodes": traj.times.len(),
                    "terminated_at_origin": traj.terminated_at_origin,
                    "final_state": traj.final_state(),
                    "J_T": cost_value,
                }),
            );
        }
    }
    emit(&out, cli)?;
    Ok(0)
}

fn cmd_reproduce(example: &str, cli: &Cli, overrides: Overrides) -> Result<i32, CliError> {
    let seed = overrides.seed.unwrap_or(42);
    let budget = overrides.budget.unwrap_or(4096);
    let lines = reproduce::run(example, seed, budget).map_err(CliError::Usage)?;
    let mut out = RunReport::new(format!("reproduce {example}"), seed, budget, json!(null));
    let mut all = true;
    for l in &lines {
        all &= l.pass;
        say(
            cli,
            format!(
                "[{}] {}: {}",
                if l.pass { "PASS" } else { "FAIL" },
                l.label,
                l.detail
            ),
        );
        out.stage(l.label.clone(), l.pass, json!({ "detail": l.detail }));
    }
    say(
        cli,
        format!(
            "{example}: {}",
            if all {
                "all checks passed"
            } else {
                "some checks FAILED"
            }
        ),
    );
    emit(&out, cli)?;
    Ok(if all { 0 } else { 1 })
}

fn cmd_sweep_gain(
    path: &Path,
    gains: &[f64],
    cli: &Cli,
    overrides: Overrides,
) -> Result<i32, CliError> {
    let (cfg, built) = load(path, overrides)?;
    let ctl = build_controller(&built)?;
    let budget = homopt::SphereBudget::for_dim(built.system.n()).with_samples(built.verify.budget);
    let entries = homopt::verify::gain_margin_sweep(
        ctl.lie(),
        |x| ctl.alpha_star(x),
        ctl.beta,
        gains,
        ctl.norm(),
        &budget,
        built.verify.seed,
    )
    .map_err(|e| CliError::Domain(format!("gain sweep: {e}")))?;
    let mut out = RunReport::new(
        "sweep-gain",
        built.verify.seed,
        built.verify.budget,
        config_echo(&cfg),
    );
    let mut all = true;
    for e in &entries {
        let verdict = match e.pass {
            Some(true) => "ok",
            Some(false) => {
                all = false;
                "FAIL"
            }
            None => "reported",
        };
        say(
            cli,
            format!(
                "g = {}: min sphere decrease {:.4} [{verdict}]",
                e.gain, e.min_decrease
            ),
        );
    }
    out.stage("gain-margin", all, serde_json::to_value(&entries).unwrap());
    emit(&out, cli)?;
    Ok(if all { 0 } else { 1 })
}
