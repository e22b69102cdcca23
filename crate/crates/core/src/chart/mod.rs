//! Metric data in Fermi form and the boundary quantities derived from it.
//!
//! A chart covers a collar `{-δ ≤ x⁰ ≤ 0} × box` of the conformal boundary
//! `x⁰ = 0`. The provider supplies the tangential block `h_{αβ}` of the
//! compactified metric (the normal block is fixed to `h₀₀ = 1`, `h₀β = 0`),
//! the defining function `ρ`, and first derivatives of both. Everything else
//! here (κ, the transport matrices `M = e^μ`, the log shift `A`, the smooth
//! remainder `E`) is computed from that data.

mod expm;
mod polynomial;
mod quadrature;
mod spec;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::systems::{CotangentState, TauState};

pub use expm::expm;
pub use polynomial::{Polynomial, PolynomialMetric};
pub use quadrature::adaptive_simpson;
pub use spec::ChartSpec;

/// Derivatives of the tangential block `h_{αβ}`.
#[derive(Debug, Clone)]
pub struct MetricDerivatives {
    /// `∂₀ h_{αβ}`.
    pub normal: DMatrix<f64>,
    /// `∂_γ h_{αβ}` for γ = 1..n.
    pub tangential: Vec<DMatrix<f64>>,
}

/// Metric provider in Fermi form.
///
/// Coordinates are `(x⁰, x')` with `x⁰ ≤ 0` and `x' ∈ ℝⁿ`. All functions must be
/// defined on a neighbourhood of the chart's domain; finite-difference stencils
/// evaluate slightly outside the box.
pub trait FermiMetric: Send + Sync + fmt::Debug {
    /// Ambient dimension `n + 1`.
    fn dim(&self) -> usize;
    fn h(&self, x0: f64, xp: &[f64]) -> DMatrix<f64>;
    fn dh(&self, x0: f64, xp: &[f64]) -> MetricDerivatives;
    fn rho(&self, x0: f64, xp: &[f64]) -> f64;
    /// `(ρ₀, ρ_α)`.
    fn drho(&self, x0: f64, xp: &[f64]) -> (f64, DVector<f64>);
    /// Exact gradient and Hessian of `κ` along the boundary, if known.
    /// When `None`, the chart differences `κ` numerically.
    fn kappa_jet(&self, _xp: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        None
    }
}

/// Where a chart is valid.
#[derive(Debug, Clone, Serialize)]
pub struct ChartDomain {
    /// Collar depth δ < 1: the boundary system is used on `[-δ, 0]`.
    pub delta: f64,
    /// How deep the arclength flow may go (`x⁰ ≥ -interior_depth`). At least δ.
    pub interior_depth: f64,
    /// Coordinate box for `x'`, one interval per boundary coordinate.
    pub x_box: Vec<(f64, f64)>,
}

impl ChartDomain {
    pub fn contains_boundary_point(&self, xp: &[f64]) -> bool {
        xp.len() == self.x_box.len()
            && xp
                .iter()
                .zip(&self.x_box)
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.x_box.iter().map(|(lo, hi)| hi - lo).collect()
    }
}

/// Numerical parameters of the derived quantities.
#[derive(Debug, Clone, Serialize)]
pub struct ChartSettings {
    /// Stencil step for κ derivatives, as a fraction of the box width.
    pub kappa_step: f64,
    /// Stencil step for derivatives of `M` and of `κ^α/κ²`, as a fraction of the box width.
    pub transport_step: f64,
    /// Below this `|x⁰|` the remainder `E` is extrapolated instead of evaluated.
    pub e_cut: f64,
    /// Relative tolerance of the μ quadrature.
    pub quad_rel_tol: f64,
}

impl Default for ChartSettings {
    fn default() -> Self {
        Self {
            kappa_step: 1e-5,
            transport_step: 1e-3,
            e_cut: 1e-4,
            quad_rel_tol: 1e-12,
        }
    }
}

/// Boundary data at a point `q` of `∂X`.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub kappa: f64,
    /// `κ_β = ∂_β κ`.
    pub dkappa: DVector<f64>,
    /// `κ^α = h^{αβ}(0, q) κ_β`.
    pub kappa_up: DVector<f64>,
    /// `κ^α / κ²`, the coefficient of `log|x⁰|` in the shift `A`.
    pub shift: DVector<f64>,
}

impl BoundaryData {
    /// `−κ^α / (2κ)`.
    pub fn obstruction(&self) -> DVector<f64> {
        -&self.kappa_up / (2.0 * self.kappa)
    }
}

/// Pointwise metric data, with the inverse of `h_{αβ}` already formed.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub rho: f64,
    pub rho0: f64,
    pub drho: DVector<f64>,
    pub h: DMatrix<f64>,
    pub hinv: DMatrix<f64>,
    pub dh: MetricDerivatives,
}

/// A borrowed phase-space point in either parametrization.
#[derive(Debug, Clone, Copy)]
pub enum PhaseStateRef<'a> {
    Cotangent(&'a CotangentState),
    Tau(&'a TauState),
}

impl<'a> From<&'a CotangentState> for PhaseStateRef<'a> {
    fn from(s: &'a CotangentState) -> Self {
        PhaseStateRef::Cotangent(s)
    }
}

impl<'a> From<&'a TauState> for PhaseStateRef<'a> {
    fn from(s: &'a TauState) -> Self {
        PhaseStateRef::Tau(s)
    }
}

/// A named, immutable Fermi chart.
#[derive(Clone)]
pub struct FermiChart {
    id: String,
    metric: Arc<dyn FermiMetric>,
    domain: ChartDomain,
    settings: ChartSettings,
}

impl fmt::Debug for FermiChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FermiChart")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .finish()
    }
}

fn five_point(mut f: impl FnMut(f64) -> Result<DVector<f64>>, h: f64) -> Result<DVector<f64>> {
    let p1 = f(h)?;
    let m1 = f(-h)?;
    let p2 = f(2.0 * h)?;
    let m2 = f(-2.0 * h)?;
    Ok((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h))
}

impl FermiChart {
    pub fn new(id: impl Into<String>, metric: Arc<dyn FermiMetric>, domain: ChartDomain) -> Result<Self> {
        let dim = metric.dim();
        if dim < 2 {
            return Err(Error::Config(format!("chart dimension must be at least 2, got {dim}")));
        }
        if domain.x_box.len() != dim - 1 {
            return Err(Error::Config(format!(
                "x_box has {} intervals, expected {}",
                domain.x_box.len(),
                dim - 1
            )));
        }
        if !(domain.delta > 0.0 && domain.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {}", domain.delta)));
        }
        if domain.interior_depth < domain.delta {
            return Err(Error::Config("interior_depth must be at least delta".into()));
        }
        if domain.x_box.iter().any(|(lo, hi)| !(hi > lo)) {
            return Err(Error::Config("every x_box interval needs lo < hi".into()));
        }
        Ok(Self {
            id: id.into(),
            metric,
            domain,
            settings: ChartSettings::default(),
        })
    }

    pub fn with_settings(mut self, settings: ChartSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn settings(&self) -> &ChartSettings {
        &self.settings
    }

    pub fn metric(&self) -> &dyn FermiMetric {
        self.metric.as_ref()
    }

    pub fn metric_arc(&self) -> Arc<dyn FermiMetric> {
        Arc::clone(&self.metric)
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Boundary dimension `n`.
    pub fn boundary_dim(&self) -> usize {
        self.metric.dim() - 1
    }

    fn check_boundary_point(&self, xp: &[f64]) -> Result<()> {
        if xp.len() != self.boundary_dim() {
            return Err(Error::Domain(format!(
                "boundary point has {} coordinates, chart needs {}",
                xp.len(),
                self.boundary_dim()
            )));
        }
        if !self.domain.contains_boundary_point(xp) {
            return Err(Error::Domain(format!("x' = {xp:?} is outside the chart box")));
        }
        Ok(())
    }

    fn check_collar_point(&self, x0: f64, xp: &[f64]) -> Result<()> {
        self.check_boundary_point(xp)?;
        if !(x0 <= 0.0 && x0 >= -self.domain.delta * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "x0 = {x0} is outside the collar [-{}, 0]",
                self.domain.delta
            )));
        }
        Ok(())
    }

    /// Checks that `(x⁰, x')` lies where the arclength flow is allowed.
    pub fn check_interior_point(&self, x0: f64, xp: &[f64]) -> Result<()> {
        self.check_boundary_point(xp)?;
        if !(x0 < 0.0 && x0 >= -self.domain.interior_depth) {
            return Err(Error::Domain(format!(
                "x0 = {x0} is outside (-{}, 0)",
                self.domain.interior_depth
            )));
        }
        Ok(())
    }

    /// Metric data at a point, without box checks.
    pub fn local_geometry(&self, x0: f64, xp: &[f64]) -> Result<LocalGeometry> {
        let h = self.metric.h(x0, xp);
        let hinv = h
            .clone()
            .cholesky()
            .ok_or_else(|| {
                Error::ChartIntegrity(format!("h is not positive definite at x0={x0}, x'={xp:?}"))
            })?
            .inverse();
        let (rho0, drho) = self.metric.drho(x0, xp);
        Ok(LocalGeometry {
            rho: self.metric.rho(x0, xp),
            rho0,
            drho,
            h,
            hinv,
            dh: self.metric.dh(x0, xp),
        })
    }

    fn kappa_raw(&self, xp: &[f64]) -> Result<f64> {
        let (rho0, _) = self.metric.drho(0.0, xp);
        let k = -rho0;
        if !(k > 0.0) {
            return Err(Error::ChartIntegrity(format!("kappa = {k} is not positive at x'={xp:?}")));
        }
        Ok(k)
    }

    /// `κ(x') = −ρ₀(0, x')`, which equals `|dρ|_h` on the boundary in Fermi form.
    pub fn kappa(&self, xp: &[f64]) -> Result<f64> {
        self.check_boundary_point(xp)?;
        self.kappa_raw(xp)
    }

    fn kappa_gradient_raw(&self, xp: &[f64]) -> Result<DVector<f64>> {
        if let Some((grad, _)) = self.metric.kappa_jet(xp) {
            return Ok(grad);
        }
        let widths = self.domain.widths();
        let n = self.boundary_dim();
        let mut grad = DVector::zeros(n);
        let mut pt = xp.to_vec();
        for b in 0..n {
            let step = self.settings.kappa_step * widths[b];
            let d = five_point(
                |s| {
                    pt[b] = xp[b] + s;
                    let k = self.kappa_raw(&pt);
                    pt[b] = xp[b];
                    k.map(|k| DVector::from_element(1, k))
                },
                step,
            )?;
            grad[b] = d[0];
        }
        Ok(grad)
    }

    fn kappa_hessian_raw(&self, xp: &[f64]) -> Result<DMatrix<f64>> {
        if let Some((_, hess)) = self.metric.kappa_jet(xp) {
            return Ok(hess);
        }
        let widths = self.domain.widths();
        let n = self.boundary_dim();
        let mut hess = DMatrix::zeros(n, n);
        let mut pt = xp.to_vec();
        for l in 0..n {
            let step = self.settings.transport_step * widths[l];
            let col = five_point(
                |s| {
                    pt[l] = xp[l] + s;
                    let mut inner = pt.clone();
                    let g = (0..n)
                        .map(|b| {
                            let hb = self.settings.transport_step * widths[b];
                            let base = inner[b];
                            let d = five_point(
                                |r| {
                                    inner[b] = base + r;
                                    let k = self.kappa_raw(&inner);
                                    inner[b] = base;
                                    k.map(|k| DVector::from_element(1, k))
                                },
                                hb,
                            );
                            d.map(|d| d[0])
                        })
                        .collect::<Result<Vec<f64>>>();
                    pt[l] = xp[l];
                    g.map(DVector::from_vec)
                },
                step,
            )?;
            hess.set_column(l, &col);
        }
        Ok(0.5 * (&hess + hess.transpose()))
    }

    /// `κ_β`, exact when the provider supplies it and by five-point central
    /// differences along the boundary otherwise.
    pub fn kappa_gradient(&self, xp: &[f64]) -> Result<DVector<f64>> {
        self.check_boundary_point(xp)?;
        self.kappa_gradient_raw(xp)
    }

    pub(crate) fn boundary_data_raw(&self, xp: &[f64]) -> Result<BoundaryData> {
        let kappa = self.kappa_raw(xp)?;
        let dkappa = self.kappa_gradient_raw(xp)?;
        let g = self.local_geometry(0.0, xp)?;
        let kappa_up = &g.hinv * &dkappa;
        let shift = &kappa_up / (kappa * kappa);
        Ok(BoundaryData {
            kappa,
            dkappa,
            kappa_up,
            shift,
        })
    }

    pub fn boundary_data(&self, xp: &[f64]) -> Result<BoundaryData> {
        self.check_boundary_point(xp)?;
        self.boundary_data_raw(xp)
    }

    /// `∂_λ (κ^α/κ²)`, column λ, from the κ Hessian and the analytic `∂_λ h`.
    pub(crate) fn shift_gradient_raw(&self, xp: &[f64], bd: &BoundaryData) -> Result<DMatrix<f64>> {
        let n = self.boundary_dim();
        let g = self.local_geometry(0.0, xp)?;
        let hess = self.kappa_hessian_raw(xp)?;
        let k2 = bd.kappa * bd.kappa;
        let mut out = DMatrix::zeros(n, n);
        for l in 0..n {
            let dhinv_grad = -(&g.hinv * (&g.dh.tangential[l] * &bd.kappa_up));
            let col = (dhinv_grad + &g.hinv * hess.column(l)) / k2
                - &bd.shift * (2.0 * bd.dkappa[l] / bd.kappa);
            out.set_column(l, &col);
        }
        Ok(out)
    }

    /// `k_α`: `ρ_α/ρ` in the interior, `κ_α/κ` on the boundary.
    pub fn k_covector(&self, x0: f64, xp: &[f64]) -> Result<DVector<f64>> {
        self.check_collar_point(x0, xp)?;
        if x0 == 0.0 {
            let k = self.kappa_raw(xp)?;
            return Ok(self.kappa_gradient_raw(xp)? / k);
        }
        let rho = self.metric.rho(x0, xp);
        if !(rho > 0.0) {
            return Err(Error::ChartIntegrity(format!("rho = {rho} at interior point x0={x0}")));
        }
        let (_, drho) = self.metric.drho(x0, xp);
        Ok(drho / rho)
    }

    pub(crate) fn mu_raw(&self, x0: f64, xp: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.boundary_dim();
        if x0 == 0.0 {
            return Ok(DMatrix::zeros(n, n));
        }
        // μ = ∫₀^{x⁰} h⁻¹ ∂₀h ds, since h_{βγ} ∂₀h^{αβ} = −(h⁻¹ ∂₀h)^α_γ.
        let failure = std::cell::Cell::new(None);
        let integral = adaptive_simpson(
            |s, out| {
                let h = self.metric.h(s, xp);
                let d0 = self.metric.dh(s, xp).normal;
                match h.cholesky() {
                    Some(c) => out.copy_from_slice(c.solve(&d0).as_slice()),
                    None => {
                        out.fill(0.0);
                        failure.set(Some(s));
                    }
                }
            },
            0.0,
            x0,
            n * n,
            self.settings.quad_rel_tol,
        );
        if let Some(s) = failure.get() {
            return Err(Error::ChartIntegrity(format!(
                "h is not positive definite at x0={s}, x'={xp:?}"
            )));
        }
        Ok(DMatrix::from_column_slice(n, n, &integral?))
    }

    /// `μ^α_γ = −∫₀^{x⁰} h_{βγ} ∂₀h^{αβ} dτ` along the normal segment at fixed `x'`.
    pub fn mu_matrix(&self, x0: f64, xp: &[f64]) -> Result<DMatrix<f64>> {
        self.check_collar_point(x0, xp)?;
        self.mu_raw(x0, xp)
    }

    pub(crate) fn transport_raw(&self, x0: f64, xp: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let mu = self.mu_raw(x0, xp)?;
        Ok((expm(&mu), expm(&(-mu))))
    }

    /// `(M, L) = (e^μ, e^{−μ})`.
    pub fn transport_matrices(&self, x0: f64, xp: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        self.check_collar_point(x0, xp)?;
        self.transport_raw(x0, xp)
    }

    /// `∂_λ M` for each boundary direction λ.
    pub(crate) fn transport_gradient_raw(&self, x0: f64, xp: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let n = self.boundary_dim();
        if x0 == 0.0 {
            return Ok(vec![DMatrix::zeros(n, n); n]);
        }
        let widths = self.domain.widths();
        let mut pt = xp.to_vec();
        (0..n)
            .map(|l| {
                let step = self.settings.transport_step * widths[l];
                let flat = five_point(
                    |s| {
                        pt[l] = xp[l] + s;
                        let m = self.mu_raw(x0, &pt).map(|mu| expm(&mu));
                        pt[l] = xp[l];
                        m.map(|m| DVector::from_column_slice(m.as_slice()))
                    },
                    step,
                )?;
                Ok(DMatrix::from_column_slice(n, n, flat.as_slice()))
            })
            .collect()
    }

    /// `A^α = (1/w⁰) (κ^α/κ²) log|x⁰|`, defined for `x⁰ < 0`.
    pub fn a_shift(&self, x0: f64, xp: &[f64], w0: f64) -> Result<DVector<f64>> {
        self.check_collar_point(x0, xp)?;
        if x0 == 0.0 {
            return Err(Error::Domain("A is only defined for x0 < 0".into()));
        }
        if !(w0 > 0.0) {
            return Err(Error::Domain(format!("A needs w0 > 0, got {w0}")));
        }
        let bd = self.boundary_data_raw(xp)?;
        Ok(bd.shift * (x0.abs().ln() / w0))
    }

    /// Direct evaluation of `−ρ⁻² M ρ^λ − (κ^α/κ²)/x⁰`, given `M` and the shift at `x'`.
    pub(crate) fn e_direct(
        &self,
        x0: f64,
        xp: &[f64],
        m: &DMatrix<f64>,
        shift: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let g = self.local_geometry(x0, xp)?;
        if !(g.rho > 0.0) {
            return Err(Error::ChartIntegrity(format!("rho = {} at interior point x0={x0}", g.rho)));
        }
        let rho_up = &g.hinv * &g.drho;
        Ok(-(m * rho_up) / (g.rho * g.rho) - shift / x0)
    }

    pub(crate) fn e_remainder_raw(&self, x0: f64, xp: &[f64], shift: &DVector<f64>) -> Result<DVector<f64>> {
        let cut = self.settings.e_cut;
        if x0.abs() >= cut {
            let (m, _) = self.transport_raw(x0, xp)?;
            return self.e_direct(x0, xp, &m, shift);
        }
        // Quadratic through x⁰ ∈ {−c, −2c, −4c}, evaluated at x0.
        let nodes = [-cut, -2.0 * cut, -4.0 * cut];
        let mut out = DVector::zeros(self.boundary_dim());
        for (i, &xi) in nodes.iter().enumerate() {
            let (m, _) = self.transport_raw(xi, xp)?;
            let val = self.e_direct(xi, xp, &m, shift)?;
            let mut weight = 1.0;
            for (j, &xj) in nodes.iter().enumerate() {
                if i != j {
                    weight *= (x0 - xj) / (xi - xj);
                }
            }
            out += val * weight;
        }
        Ok(out)
    }

    /// The smooth part `E^α` of `−ρ⁻¹ M^α_λ k^λ = (κ^α/κ²)/x⁰ + E^α`.
    pub fn e_remainder(&self, x0: f64, xp: &[f64]) -> Result<DVector<f64>> {
        self.check_collar_point(x0, xp)?;
        let bd = self.boundary_data_raw(xp)?;
        self.e_remainder_raw(x0, xp, &bd.shift)
    }

    /// `2H`: `ρ² h^{ij} ξ_i ξ_j` for cotangent states, `(w⁰)² + ρ² h_{αβ} v^α v^β`
    /// for boundary-system states with `v = L(w + A)`.
    pub fn energy<'a>(&self, state: impl Into<PhaseStateRef<'a>>) -> Result<f64> {
        match state.into() {
            PhaseStateRef::Cotangent(s) => {
                let g = self.local_geometry(s.x[0], &s.x[1..])?;
                let xi_t = DVector::from_column_slice(&s.xi[1..]);
                let q = xi_t.dot(&(&g.hinv * &xi_t));
                Ok(g.rho * g.rho * (s.xi[0] * s.xi[0] + q))
            }
            PhaseStateRef::Tau(s) => {
                if s.tau == 0.0 {
                    return Ok(s.w0 * s.w0);
                }
                if !(s.w0 > 0.0) {
                    return Err(Error::NotInbound(format!("w0 = {}", s.w0)));
                }
                let bd = self.boundary_data_raw(&s.x)?;
                let a = &bd.shift * (s.tau.abs().ln() / s.w0);
                let (_, l) = self.transport_raw(s.tau, &s.x)?;
                let v = l * (DVector::from_column_slice(&s.w) + a);
                let g = self.local_geometry(s.tau, &s.x)?;
                Ok(s.w0 * s.w0 + g.rho * g.rho * v.dot(&(&g.h * &v)))
            }
        }
    }

    /// Grid-sampled integrity checks over the collar.
    pub fn validate(&self, samples_per_axis: usize) -> IntegrityReport {
        let mut report = IntegrityReport::default();
        let n = self.boundary_dim();
        let k = samples_per_axis.max(2);
        // boundary grid: tensor product, capped to keep high dimensions cheap
        let per_axis = if n <= 2 { k } else { 4 };
        let mut boundary_points = Vec::new();
        let total = per_axis.pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            let pt: Vec<f64> = self
                .domain
                .x_box
                .iter()
                .map(|(lo, hi)| {
                    let i = rem % per_axis;
                    rem /= per_axis;
                    lo + (hi - lo) * i as f64 / (per_axis - 1) as f64
                })
                .collect();
            boundary_points.push(pt);
        }
        let depths: Vec<f64> = (1..=k).map(|i| -self.domain.delta * i as f64 / k as f64).collect();

        let mut min_eig = f64::INFINITY;
        let mut rho_boundary = 0.0f64;
        let mut min_rho_interior = f64::INFINITY;
        let mut min_kappa = f64::INFINITY;
        let mut max_rho_ratio_dev = 0.0f64;
        for xp in &boundary_points {
            rho_boundary = rho_boundary.max(self.metric.rho(0.0, xp).abs());
            let kappa = -self.metric.drho(0.0, xp).0;
            min_kappa = min_kappa.min(kappa);
            let x0 = -1e-6;
            let dev = (self.metric.rho(x0, xp) / (-kappa * x0) - 1.0).abs();
            max_rho_ratio_dev = max_rho_ratio_dev.max(if dev.is_finite() { dev } else { f64::INFINITY });
            for &x0 in std::iter::once(&0.0).chain(depths.iter()) {
                let h = self.metric.h(x0, xp);
                let sym = (&h - h.transpose()).abs().max();
                let eig = if sym > 1e-12 * (1.0 + h.abs().max()) {
                    f64::NEG_INFINITY
                } else {
                    h.symmetric_eigenvalues().min()
                };
                min_eig = min_eig.min(eig);
                if x0 < 0.0 {
                    min_rho_interior = min_rho_interior.min(self.metric.rho(x0, xp));
                }
            }
        }
        report.push("h symmetric positive definite", min_eig > 0.0, min_eig, "min eigenvalue > 0");
        report.push("rho vanishes on boundary", rho_boundary <= 1e-14, rho_boundary, "|rho(0,x')| <= 1e-14");
        report.push("rho positive in collar", min_rho_interior > 0.0, min_rho_interior, "min rho > 0");
        report.push("kappa positive", min_kappa > 0.0, min_kappa, "min kappa > 0");
        report.push(
            "rho ~ kappa * |x0|",
            max_rho_ratio_dev < 1e-4,
            max_rho_ratio_dev,
            "|rho/(kappa|x0|) - 1| < 1e-4 at x0 = -1e-6",
        );
        report
    }
}

/// One line of an integrity report.
#[derive(Debug, Clone, Serialize)]
pub struct IntegrityCheck {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub criterion: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IntegrityReport {
    pub checks: Vec<IntegrityCheck>,
}

impl IntegrityReport {
    fn push(&mut self, name: &str, passed: bool, measured: f64, criterion: &str) {
        self.checks.push(IntegrityCheck {
            name: name.into(),
            passed,
            measured,
            criterion: criterion.into(),
        });
    }

    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Converts a failed report into a [`Error::ChartIntegrity`].
    pub fn into_result(self) -> Result<()> {
        let failed: Vec<_> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} (measured {:.3e})", c.name, c.measured))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::ChartIntegrity(failed.join("; ")))
        }
    }
}
