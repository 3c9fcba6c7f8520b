//! Trajectory CSV emission. Fixed column layout
//! `t, x1..xn, u, w1..wxi, y1..yl, V, running_J`, every float printed with
//! 17 significant digits.

use homopt::sim::Trajectory;
use std::fmt::Write as _;

fn fmt(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Renders the CSV; `running_j` must align with the trajectory grid.
pub fn trajectory_csv(traj: &Trajectory, running_j: &[f64]) -> String {
    let n = traj.states[0].len();
    let xi = traj.w[0].len();
    let l_out = traj.y[0].len();
    let mut out = String::new();
    out.push('t');
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    out.push_str(",u");
    for j in 1..=xi {
        let _ = write!(out, ",w{j}");
    }
    for j in 1..=l_out {
        let _ = write!(out, ",y{j}");
    }
    out.push_str(",V,running_J\n");
    for (i, t) in traj.times.iter().enumerate() {
        let mut row = vec![fmt(*t)];
        row.extend(traj.states[i].iter().map(|&v| fmt(v)));
        row.push(fmt(traj.u[i]));
        row.extend(traj.w[i].iter().map(|&v| fmt(v)));
        row.extend(traj.y[i].iter().map(|&v| fmt(v)));
        row.push(fmt(traj.v_vals[i]));
        row.push(fmt(running_j[i]));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Cumulative trapezoid of a per-node integrand, aligned with the grid.
pub fn running_integral(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(times.len());
    out.push(0.0);
    for i in 1..times.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
        out.push(acc);
    }
    out
}
