//! Shooting geodesics to and from the conformal boundary.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chart::FermiChart;
use crate::error::{Error, Result};
use crate::integrate::{
    integrate_t, integrate_tau_from_boundary_with_outputs, integrate_tau_to_boundary, IntegratorConfig,
    ParameterKind, Termination, Trajectory,
};
use crate::systems::{cotangent_from_velocity, to_tau_state, CotangentState, TauState};

/// Outcome of [`endpoint_map`].
#[derive(Debug, Clone, Serialize)]
pub struct ShootResult {
    /// Boundary coordinates of the limit point.
    pub endpoint: Vec<f64>,
    /// First phase, in arclength.
    pub arclength: Trajectory,
    /// Second phase, in `τ`, ending at `τ = 0`.
    pub trajectory: Trajectory,
    pub handoff: TauState,
    /// `energy_drift`, `zeta0_handoff`, `t_handoff`, `rho_decay_slope`, `kappa_endpoint`.
    pub diagnostics: BTreeMap<String, f64>,
}

fn integration_error(traj: Trajectory, what: &str) -> Error {
    Error::Integration {
        termination: traj.termination,
        context: format!("{what}: {}", traj.note.clone().unwrap_or_default()),
        partial: Some(Box::new(traj)),
    }
}

/// An `h`-orthonormal frame of `T_p X`: the inward normal `∂₀` and the columns of
/// the returned matrix spanning the tangential directions.
fn tangential_frame(chart: &FermiChart, p: &[f64]) -> Result<DMatrix<f64>> {
    let g = chart.local_geometry(p[0], &p[1..])?;
    let chol = g
        .h
        .cholesky()
        .ok_or_else(|| Error::ChartIntegrity(format!("h is not positive definite at {p:?}")))?;
    // E = C⁻ᵀ satisfies Eᵀ h E = I when h = C Cᵀ
    let n = chart.boundary_dim();
    let ct = chol.l().transpose();
    ct.solve_upper_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))
}

/// Coordinate direction at `p` for angles `θ ∈ ℝⁿ` measured from the inward normal:
/// `cos|θ| ∂₀ + sin|θ| Σ (θ_a/|θ|) E_a` with `E` an `h`-orthonormal tangential frame.
pub fn direction_from_angles(chart: &FermiChart, p: &[f64], angles: &[f64]) -> Result<Vec<f64>> {
    let n = chart.boundary_dim();
    if angles.len() != n || p.len() != n + 1 {
        return Err(Error::Domain(format!("need {n} angles and a point with {} coordinates", n + 1)));
    }
    let frame = tangential_frame(chart, p)?;
    let th = DVector::from_column_slice(angles);
    let r = th.norm();
    let mut dir = vec![r.cos()];
    let tang = if r > 0.0 { &frame * &th * (r.sin() / r) } else { DVector::zeros(n) };
    dir.extend(tang.iter());
    Ok(dir)
}

fn h_inner(h: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let at = DVector::from_column_slice(&a[1..]);
    let bt = DVector::from_column_slice(&b[1..]);
    a[0] * b[0] + at.dot(&(h * bt))
}

/// Boundary endpoint of the geodesic leaving `p` in coordinate direction `v`
/// (normalized internally; `v⁰ > 0` is required).
pub fn endpoint_map(chart: &FermiChart, p: &[f64], v: &[f64], cfg: &IntegratorConfig) -> Result<ShootResult> {
    cfg.validate()?;
    if v.len() != chart.dim() || !(v[0] > 0.0) {
        return Err(Error::Domain("direction must have positive normal component".into()));
    }
    let s0 = cotangent_from_velocity(chart, p, v)?;
    let x_stop = cfg.x_stop_for(chart);
    let arclength = if p[0] < -x_stop {
        let traj = integrate_t(chart, &s0, cfg.t_max, cfg)?;
        if traj.termination != Termination::Handoff {
            return Err(integration_error(traj, "arclength phase did not reach the handoff depth"));
        }
        traj
    } else {
        chart.check_interior_point(p[0], &p[1..])?;
        Trajectory {
            chart_id: chart.id().to_string(),
            parameter_kind: ParameterKind::Arclength,
            samples: vec![crate::integrate::Sample {
                param: 0.0,
                state: s0.to_vec(),
            }],
            termination: Termination::Handoff,
            note: None,
        }
    };
    let last = arclength.cotangent_state(arclength.len() - 1);
    let zeta0 = last.zeta0(chart);
    let handoff = to_tau_state(chart, &last)?;
    let traj = integrate_tau_to_boundary(chart, &handoff, cfg)?;
    if traj.termination != Termination::ReachedBoundary {
        return Err(integration_error(traj, "boundary phase did not reach tau = 0"));
    }
    let n = chart.boundary_dim();
    let endpoint = traj.last().state[..n].to_vec();

    let mut drift = 0.0f64;
    for i in 0..traj.len() {
        drift = drift.max((chart.energy(&traj.tau_state(i))? - 1.0).abs());
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("energy_drift".to_string(), drift);
    diagnostics.insert("zeta0_handoff".to_string(), zeta0);
    diagnostics.insert("t_handoff".to_string(), last.t);
    diagnostics.insert("w0_boundary".to_string(), traj.last().state[n]);
    if chart.domain().contains_boundary_point(&endpoint) {
        diagnostics.insert("kappa_endpoint".to_string(), chart.kappa(&endpoint)?);
    }
    if let Ok(slope) = rho_decay_rate(chart, &arclength, (last.t - 2.0, last.t)) {
        diagnostics.insert("rho_decay_slope".to_string(), slope);
    }
    Ok(ShootResult {
        endpoint,
        arclength,
        trajectory: traj,
        handoff,
        diagnostics,
    })
}

/// Endpoint for direction angles `θ` at `p` (see [`direction_from_angles`]).
pub fn endpoint_from_angles(chart: &FermiChart, p: &[f64], angles: &[f64], cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    let v = direction_from_angles(chart, p, angles)?;
    Ok(endpoint_map(chart, p, &v, cfg)?.endpoint)
}

/// Finite-difference Jacobian of the boundary exponential map.
#[derive(Debug, Clone, Serialize)]
pub struct JacobianReport {
    /// Row α, column a: `∂ endpoint^α / ∂ s_a` along the great circle toward the a-th basis vector.
    pub matrix: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub min_singular_value: f64,
    pub condition: f64,
    pub endpoint: Vec<f64>,
    pub fd_step: f64,
}

/// Central differences of the endpoint over an `h`-orthonormal basis of the
/// directions orthogonal to `v` at `p`.
pub fn expmap_jacobian(
    chart: &FermiChart,
    p: &[f64],
    v: &[f64],
    cfg: &IntegratorConfig,
    fd_step: f64,
) -> Result<JacobianReport> {
    if !(fd_step > 0.0) {
        return Err(Error::Config("fd_step must be positive".into()));
    }
    let n = chart.boundary_dim();
    let g = chart.local_geometry(p[0], &p[1..])?;
    let norm = h_inner(&g.h, v, v).sqrt();
    let u: Vec<f64> = v.iter().map(|c| c / norm).collect();

    // Gram–Schmidt of the tangential frame and the normal against u
    let frame = tangential_frame(chart, p)?;
    let mut candidates: Vec<Vec<f64>> = (0..n)
        .map(|a| std::iter::once(0.0).chain(frame.column(a).iter().copied()).collect())
        .collect();
    let mut e0 = vec![0.0; n + 1];
    e0[0] = 1.0;
    candidates.push(e0);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        let mut w = c.clone();
        for b in std::iter::once(&u).chain(basis.iter()) {
            let proj = h_inner(&g.h, &w, b);
            w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= proj * bi);
        }
        let len = h_inner(&g.h, &w, &w).sqrt();
        if len > 1e-6 {
            basis.push(w.iter().map(|x| x / len).collect());
        }
        if basis.len() == n {
            break;
        }
    }

    let base = endpoint_map(chart, p, &u, cfg)?.endpoint;
    let mut jac = DMatrix::zeros(n, n);
    for (a, b) in basis.iter().enumerate() {
        let shot = |s: f64| -> Result<Vec<f64>> {
            let dir: Vec<f64> = u.iter().zip(b).map(|(ui, bi)| s.cos() * ui + s.sin() * bi).collect();
            endpoint_map(chart, p, &dir, cfg)
                .map(|r| r.endpoint)
                .map_err(|e| Error::Numeric(format!("jacobian shot at s = {s} along basis vector {a}: {e}")))
        };
        let plus = shot(fd_step)?;
        let minus = shot(-fd_step)?;
        for r in 0..n {
            jac[(r, a)] = (plus[r] - minus[r]) / (2.0 * fd_step);
        }
    }
    let sv = jac.clone().singular_values();
    let mut svs: Vec<f64> = sv.iter().copied().collect();
    svs.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let min = *svs.last().unwrap_or(&0.0);
    let condition = if min > 0.0 { svs[0] / min } else { f64::INFINITY };
    Ok(JacobianReport {
        matrix: (0..n).map(|r| jac.row(r).iter().copied().collect()).collect(),
        singular_values: svs,
        min_singular_value: min,
        condition,
        endpoint: base,
        fd_step,
    })
}

/// Initial `w|_{τ=0}` for the expansion `x = q + 𝒪 τ² log|τ| + u τ² + …`.
pub fn w_from_u(chart: &FermiChart, q: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let bd = chart.boundary_data(q)?;
    if u.len() != chart.boundary_dim() {
        return Err(Error::Domain("u has the wrong dimension".into()));
    }
    Ok((0..u.len())
        .map(|a| bd.kappa_up[a] / (2.0 * bd.kappa * bd.kappa) - 2.0 * u[a] / bd.kappa)
        .collect())
}

/// Inverse of [`w_from_u`]: `u = −(κ/2) w + κ^α/(4κ)`.
pub fn u_from_w(chart: &FermiChart, q: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let bd = chart.boundary_data(q)?;
    Ok((0..w.len())
        .map(|a| -0.5 * bd.kappa * w[a] + bd.kappa_up[a] / (4.0 * bd.kappa))
        .collect())
}

/// Geodesic ending at `q` with second-order coefficient `u`, traced to `tau_end`.
pub fn boundary_shoot(chart: &FermiChart, q: &[f64], u: &[f64], tau_end: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    boundary_shoot_with_outputs(chart, q, u, tau_end, &[], cfg)
}

/// [`boundary_shoot`] that also lands on every parameter in `outputs`.
pub fn boundary_shoot_with_outputs(
    chart: &FermiChart,
    q: &[f64],
    u: &[f64],
    tau_end: f64,
    outputs: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let w = w_from_u(chart, q, u)?;
    let traj = integrate_tau_from_boundary_with_outputs(chart, q, &w, tau_end, outputs, cfg)?;
    if traj.termination != Termination::ReachedEnd {
        return Err(integration_error(traj, "boundary shot did not reach tau_end"));
    }
    Ok(traj)
}

/// Least-squares slope of `log ρ` against `t` over the samples with `t` in `window`.
pub fn rho_decay_rate(chart: &FermiChart, traj: &Trajectory, window: (f64, f64)) -> Result<f64> {
    if traj.parameter_kind != ParameterKind::Arclength {
        return Err(Error::Domain("rho decay needs an arclength trajectory".into()));
    }
    let (lo, hi) = if window.0 <= window.1 { window } else { (window.1, window.0) };
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.param >= lo && s.param <= hi)
        .map(|s| {
            let cs = CotangentState::from_vec(s.param, &s.state);
            (s.param, chart.metric().rho(cs.x[0], &cs.x[1..]).ln())
        })
        .collect();
    if pts.len() < 10 {
        return Err(Error::Numeric(format!(
            "rho decay window [{lo}, {hi}] holds {} samples, need at least 10",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let tb = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let lb = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tb) * (p.1 - lb)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tb).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests;
