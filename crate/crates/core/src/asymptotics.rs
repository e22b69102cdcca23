//! Boundary expansion fits, the obstruction `𝒪`, asymptotic hyperbolicity, and
//! numerical checks of the Lipschitz and C¹ properties of the boundary-system flow.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::chart::FermiChart;
use crate::error::{Error, Result};
use crate::integrate::{
    heun_step, solve_on_grid, AdaptiveRun, IntegratorConfig, OdeSystem, ParameterKind, Stop, Trajectory,
};
use crate::systems::{TauState, TauSystem};

/// `𝒪^α = −κ^α / (2κ)` at `q`.
pub fn obstruction(chart: &FermiChart, q: &[f64]) -> Result<Vec<f64>> {
    Ok(chart.boundary_data(q)?.obstruction().as_slice().to_vec())
}

/// Default fit window in `|τ|`.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-3, 1e-2);
/// Largest accepted condition number of the column-normalized design matrix.
pub const MAX_CONDITION: f64 = 1e8;
pub const MIN_FIT_SAMPLES: usize = 30;

/// Coefficients of `x^α(τ) − x^α(0) ≈ 𝒪 τ² log|τ| + u τ²`.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionFit {
    pub o_fit: Vec<f64>,
    pub u_fit: Vec<f64>,
    /// Coefficients of `τ³ log|τ|` and `τ³` per component, when fitted.
    pub nuisance: Vec<[f64; 2]>,
    /// `(τ_lo, τ_hi)` with `τ_lo < τ_hi < 0`.
    pub window: (f64, f64),
    /// RMS of the weighted residual, in units of the `τ²` coefficient.
    pub residual_rms: f64,
    pub condition: f64,
    pub samples: usize,
}

/// Weighted least-squares fit over the samples with `|τ|` in `window`.
///
/// Rows are divided by `τ²`, so the squared residuals carry weight `1/τ⁴`.
pub fn fit_expansion(traj: &Trajectory, window: (f64, f64), include_nuisance: bool) -> Result<ExpansionFit> {
    if traj.parameter_kind != ParameterKind::Tau {
        return Err(Error::Domain("expansion fits need a tau trajectory".into()));
    }
    let (lo, hi) = (window.0.abs().min(window.1.abs()), window.0.abs().max(window.1.abs()));
    if !(lo > 0.0) {
        return Err(Error::Domain("fit window must exclude tau = 0".into()));
    }
    let origin = traj
        .samples
        .iter()
        .find(|s| s.param == 0.0)
        .ok_or_else(|| Error::Domain("trajectory does not reach tau = 0".into()))?;
    let n = (origin.state.len() - 1) / 2;
    let rows: Vec<_> = traj
        .samples
        .iter()
        .filter(|s| s.param.abs() >= lo && s.param.abs() <= hi)
        .collect();
    if rows.len() < MIN_FIT_SAMPLES {
        return Err(Error::Numeric(format!(
            "fit window [{lo:e}, {hi:e}] holds {} samples, need at least {MIN_FIT_SAMPLES}",
            rows.len()
        )));
    }
    let ncols = if include_nuisance { 4 } else { 2 };
    let mut design = DMatrix::zeros(rows.len(), ncols);
    for (i, s) in rows.iter().enumerate() {
        let t = s.param;
        let lg = t.abs().ln();
        design[(i, 0)] = lg;
        design[(i, 1)] = 1.0;
        if include_nuisance {
            design[(i, 2)] = t * lg;
            design[(i, 3)] = t;
        }
    }
    let scales: Vec<f64> = (0..ncols).map(|c| design.column(c).norm()).collect();
    for (c, sc) in scales.iter().enumerate() {
        design.column_mut(c).scale_mut(1.0 / sc);
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }

    let mut o_fit = Vec::with_capacity(n);
    let mut u_fit = Vec::with_capacity(n);
    let mut nuisance = Vec::with_capacity(n);
    let mut sq = 0.0;
    for a in 0..n {
        let rhs = DVector::from_iterator(
            rows.len(),
            rows.iter().map(|s| (s.state[a] - origin.state[a]) / (s.param * s.param)),
        );
        let coef = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::Numeric(format!("least squares failed: {e}")))?;
        let resid = &design * &coef - &rhs;
        sq += resid.norm_squared();
        let c: Vec<f64> = (0..ncols).map(|k| coef[k] / scales[k]).collect();
        o_fit.push(c[0]);
        u_fit.push(c[1]);
        nuisance.push(if include_nuisance { [c[2], c[3]] } else { [0.0, 0.0] });
    }
    Ok(ExpansionFit {
        o_fit,
        u_fit,
        nuisance,
        window: (-hi, -lo),
        residual_rms: (sq / (n * rows.len()) as f64).sqrt(),
        condition,
        samples: rows.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AhReport {
    pub is_ah: bool,
    pub sup_obstruction: f64,
}

/// Whether `sup |𝒪|` over `samples` is at most `tol`.
pub fn is_asymptotically_hyperbolic(chart: &FermiChart, samples: &[Vec<f64>], tol: f64) -> Result<AhReport> {
    if samples.is_empty() {
        return Err(Error::Domain("need at least one boundary sample".into()));
    }
    let mut sup = 0.0f64;
    for q in samples {
        let o = DVector::from_vec(obstruction(chart, q)?);
        sup = sup.max(o.norm());
    }
    Ok(AhReport {
        is_ah: sup <= tol,
        sup_obstruction: sup,
    })
}

/// Evenly spaced boundary points over the chart box, `per_axis` along each axis.
pub fn boundary_grid(chart: &FermiChart, per_axis: usize) -> Vec<Vec<f64>> {
    let k = per_axis.max(2);
    let boxes = &chart.domain().x_box;
    let total = k.pow(boxes.len() as u32);
    (0..total)
        .map(|mut idx| {
            boxes
                .iter()
                .map(|(lo, hi)| {
                    let i = idx % k;
                    idx /= k;
                    lo + (hi - lo) * i as f64 / (k - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// `max ‖f(s, y + δ) − f(s, y)‖ / ‖δ‖` over `pairs` base points `(s, y)` drawn by
/// `sample`, with `δ` a random direction of length `perturbation`.
pub fn estimate_lipschitz_constant<S, R, F>(
    sys: &S,
    mut sample: F,
    pairs: usize,
    perturbation: f64,
    rng: &mut R,
) -> Result<f64>
where
    S: OdeSystem + ?Sized,
    R: Rng,
    F: FnMut(&mut R) -> (f64, Vec<f64>),
{
    let n = sys.dim();
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    let mut best = 0.0f64;
    for _ in 0..pairs {
        let (s, y) = sample(rng);
        let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dn = d.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        d.iter_mut().for_each(|x| *x *= perturbation / dn);
        let y2: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a + b).collect();
        sys.rhs(s, &y, &mut f1)?;
        sys.rhs(s, &y2, &mut f2)?;
        let num = f1.iter().zip(&f2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        best = best.max(num / perturbation);
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub bound_ok: bool,
    /// `e − max_ratio`.
    pub margin: f64,
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn flow_to<S: OdeSystem + ?Sized>(sys: &S, s0: f64, y0: &[f64], s1: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    let cap = |_: f64| f64::INFINITY;
    let guard = |_: f64, _: &[f64]| None;
    let run = AdaptiveRun {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_steps: cfg.max_steps,
        initial_step: cfg.initial_step,
        max_step: &cap,
        outputs: &[],
        event: None,
        guard: &guard,
    };
    let out = run.solve(sys, s0, y0, s1);
    match out.stop {
        Stop::End => Ok(out.samples.last().expect("nonempty").1.clone()),
        Stop::Failure(e) => Err(e),
        other => Err(Error::Numeric(format!("flow stopped early: {other:?}"))),
    }
}

/// Displacement ratios `‖θ(s₀+L, y₁) − θ(s₀+L, y₂)‖ / ‖y₁ − y₂‖` for each pair.
pub fn flow_lipschitz_check_system<S: OdeSystem + ?Sized>(
    sys: &S,
    s0: f64,
    interval_len: f64,
    pairs: &[(Vec<f64>, Vec<f64>)],
    cfg: &IntegratorConfig,
) -> Result<LipschitzReport> {
    let s1 = s0 + interval_len;
    let mut ratios = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let d0 = norm_diff(a, b);
        if d0 == 0.0 {
            ratios.push(1.0);
            continue;
        }
        let fa = flow_to(sys, s0, a, s1, cfg)?;
        let fb = flow_to(sys, s0, b, s1, cfg)?;
        ratios.push(norm_diff(&fa, &fb) / d0);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(LipschitzReport {
        max_ratio,
        bound_ok: max_ratio <= std::f64::consts::E,
        margin: std::f64::consts::E - max_ratio,
        ratios,
    })
}

/// [`flow_lipschitz_check_system`] for the boundary system of `chart`, pairs given as `[x', w⁰, w]`.
pub fn flow_lipschitz_check(
    chart: &FermiChart,
    tau0: f64,
    interval_len: f64,
    pairs: &[(Vec<f64>, Vec<f64>)],
    cfg: &IntegratorConfig,
) -> Result<LipschitzReport> {
    if !(tau0 + interval_len <= 0.0 && tau0 >= -chart.domain().delta) {
        return Err(Error::Domain("interval must lie in [-delta, 0]".into()));
    }
    flow_lipschitz_check_system(&TauSystem { chart }, tau0, interval_len, pairs, cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct C1Report {
    pub fd_steps: Vec<f64>,
    /// Divided-difference Jacobians, one per step, row-major.
    pub fd_jacobians: Vec<Vec<Vec<f64>>>,
    pub variational_jacobian: Vec<Vec<f64>>,
    /// Max-norm differences between successive divided-difference Jacobians.
    pub successive_diffs: Vec<f64>,
    /// `log₂` of the ratio of successive differences.
    pub observed_order: f64,
    /// Max-norm difference between the finest divided-difference Jacobian and the variational one.
    pub max_discrepancy: f64,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

/// The system augmented by `Y' = D_yV · Y`, with `D_yV` from central differences.
struct Variational<'a, S: OdeSystem + ?Sized> {
    base: &'a S,
}

impl<S: OdeSystem + ?Sized> OdeSystem for Variational<'_, S> {
    fn dim(&self) -> usize {
        let n = self.base.dim();
        n + n * n
    }

    fn rhs(&self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.base.dim();
        let (state, cols) = y.split_at(n);
        self.base.rhs(s, state, &mut dy[..n])?;
        let mut jac = DMatrix::zeros(n, n);
        let mut yp = state.to_vec();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        for j in 0..n {
            let h = 1e-6 * state[j].abs().max(1.0);
            yp[j] = state[j] + h;
            self.base.rhs(s, &yp, &mut fp)?;
            yp[j] = state[j] - h;
            self.base.rhs(s, &yp, &mut fm)?;
            yp[j] = state[j];
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let ymat = DMatrix::from_column_slice(n, n, cols);
        let dymat = jac * ymat;
        dy[n..].copy_from_slice(dymat.as_slice());
        Ok(())
    }
}

/// Compares divided-difference flow Jacobians on a frozen step grid with the
/// solution of the variational equations, over `[tau0, tau1] ⊂ [−δ, 0]`.
pub fn flow_c1_check(
    chart: &FermiChart,
    tau0: f64,
    tau1: f64,
    base: &TauState,
    cfg: &IntegratorConfig,
) -> Result<C1Report> {
    let delta = chart.domain().delta;
    if !(tau0 >= -delta && tau0 < tau1 && tau1 <= 0.0) {
        return Err(Error::Domain("need -delta <= tau0 < tau1 <= 0".into()));
    }
    let sys = TauSystem { chart };
    let n = sys.dim();
    let y0 = {
        let mut s = base.clone();
        s.tau = tau0;
        s.to_vec()
    };
    // adaptive base run fixes the grid; the final approach to 0 is a single step
    let stop_at = if tau1 == 0.0 { -cfg.tau_min.max(1e-12) } else { tau1 };
    let ratio = cfg.max_step_ratio;
    let cap = move |s: f64| (ratio * s.abs()).max(1e-300);
    let guard = |_: f64, _: &[f64]| None;
    let run = AdaptiveRun {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_steps: cfg.max_steps,
        initial_step: cfg.initial_step,
        max_step: &cap,
        outputs: &[],
        event: None,
        guard: &guard,
    };
    let out = run.solve(&sys, tau0, &y0, stop_at);
    if let Stop::Failure(e) = out.stop {
        return Err(e);
    }
    let mut grid: Vec<f64> = out.samples.iter().map(|s| s.0).collect();
    if tau1 == 0.0 {
        grid.push(0.0);
    }

    let endpoint = |y: &[f64]| -> Result<Vec<f64>> {
        Ok(solve_on_grid(&sys, &grid, y)?.pop().expect("nonempty"))
    };
    let fd_steps = vec![1e-4, 5e-5, 2.5e-5];
    let mut fds = Vec::new();
    for &h in &fd_steps {
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut yp = y0.clone();
            let mut ym = y0.clone();
            yp[j] += h;
            ym[j] -= h;
            let fp = endpoint(&yp)?;
            let fm = endpoint(&ym)?;
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        fds.push(jac);
    }
    let successive_diffs: Vec<f64> = fds.windows(2).map(|w| (&w[0] - &w[1]).abs().max()).collect();
    let observed_order = if successive_diffs[1] > 0.0 {
        (successive_diffs[0] / successive_diffs[1]).log2()
    } else {
        f64::INFINITY
    };

    // variational equations, integrated adaptively and independently of the grid
    let var = Variational { base: &sys };
    let mut z0 = y0.clone();
    z0.extend(DMatrix::<f64>::identity(n, n).as_slice());
    let zend = if tau1 == 0.0 {
        let z = flow_to(&var, tau0, &z0, stop_at, cfg)?;
        heun_step(&var, stop_at, &z, -stop_at)?
    } else {
        flow_to(&var, tau0, &z0, tau1, cfg)?
    };
    let vjac = DMatrix::from_column_slice(n, n, &zend[n..]);
    let finest = fds.last().expect("three steps");
    let max_discrepancy = (finest - &vjac).abs().max();
    Ok(C1Report {
        fd_steps,
        fd_jacobians: fds.iter().map(to_rows).collect(),
        variational_jacobian: to_rows(&vjac),
        successive_diffs,
        observed_order,
        max_discrepancy,
    })
}

#[cfg(test)]
mod tests;
