//! Phase-space states and the two first-order systems for geodesics.
//!
//! The arclength system is the cogeodesic flow on the unit energy surface. The
//! boundary system uses `τ = x⁰` as parameter and the variables `(x', w⁰, w)`
//! with `w⁰ = ρξ₀` and `w = M v − A`, `v = h⁻¹ξ'`. Its right-hand side extends
//! continuously to `τ = 0`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::chart::FermiChart;
use crate::error::{Error, Result};
use crate::integrate::OdeSystem;

/// A point `(x, ξ)` of `T*X` together with its arclength parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateRecord", try_from = "StateRecord")]
pub struct CotangentState {
    pub t: f64,
    /// `(x⁰, x¹, …, xⁿ)`.
    pub x: Vec<f64>,
    /// `(ξ₀, ξ₁, …, ξₙ)`.
    pub xi: Vec<f64>,
}

/// A point of the boundary system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateRecord", try_from = "StateRecord")]
pub struct TauState {
    pub tau: f64,
    /// Boundary coordinates `x'`.
    pub x: Vec<f64>,
    pub w0: f64,
    pub w: Vec<f64>,
}

/// Flat serialized form: `{"kind": "cotangent" | "tau", "values": [...]}`.
///
/// Cotangent values are `[t, x⁰…xⁿ, ξ₀…ξₙ]`; tau values are `[τ, x¹…xⁿ, w⁰, w¹…wⁿ]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRecord {
    pub kind: String,
    pub values: Vec<f64>,
}

impl From<CotangentState> for StateRecord {
    fn from(s: CotangentState) -> Self {
        let mut values = vec![s.t];
        values.extend(&s.x);
        values.extend(&s.xi);
        StateRecord {
            kind: "cotangent".into(),
            values,
        }
    }
}

impl TryFrom<StateRecord> for CotangentState {
    type Error = String;

    fn try_from(r: StateRecord) -> std::result::Result<Self, String> {
        if r.kind != "cotangent" {
            return Err(format!("expected kind \"cotangent\", got \"{}\"", r.kind));
        }
        let len = r.values.len();
        if len < 5 || !(len - 1).is_multiple_of(2) {
            return Err(format!("cotangent record has {len} values"));
        }
        let d = (len - 1) / 2;
        Ok(CotangentState {
            t: r.values[0],
            x: r.values[1..1 + d].to_vec(),
            xi: r.values[1 + d..].to_vec(),
        })
    }
}

impl From<TauState> for StateRecord {
    fn from(s: TauState) -> Self {
        let mut values = vec![s.tau];
        values.extend(&s.x);
        values.push(s.w0);
        values.extend(&s.w);
        StateRecord {
            kind: "tau".into(),
            values,
        }
    }
}

impl TryFrom<StateRecord> for TauState {
    type Error = String;

    fn try_from(r: StateRecord) -> std::result::Result<Self, String> {
        if r.kind != "tau" {
            return Err(format!("expected kind \"tau\", got \"{}\"", r.kind));
        }
        let len = r.values.len();
        if len < 4 || !len.is_multiple_of(2) {
            return Err(format!("tau record has {len} values"));
        }
        let n = (len - 2) / 2;
        Ok(TauState {
            tau: r.values[0],
            x: r.values[1..1 + n].to_vec(),
            w0: r.values[1 + n],
            w: r.values[2 + n..].to_vec(),
        })
    }
}

impl CotangentState {
    /// `[x, ξ]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.x.iter().chain(&self.xi).copied().collect()
    }

    pub fn from_vec(t: f64, y: &[f64]) -> Self {
        let d = y.len() / 2;
        Self {
            t,
            x: y[..d].to_vec(),
            xi: y[d..].to_vec(),
        }
    }

    /// `ζ₀ = ρ ξ₀`.
    pub fn zeta0(&self, chart: &FermiChart) -> f64 {
        chart.metric().rho(self.x[0], &self.x[1..]) * self.xi[0]
    }
}

impl TauState {
    /// `[x', w⁰, w]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut y = self.x.clone();
        y.push(self.w0);
        y.extend(&self.w);
        y
    }

    pub fn from_vec(tau: f64, y: &[f64]) -> Self {
        let n = (y.len() - 1) / 2;
        Self {
            tau,
            x: y[..n].to_vec(),
            w0: y[n],
            w: y[n + 1..].to_vec(),
        }
    }
}

/// `(ẋ, ξ̇)` of the cogeodesic flow.
pub fn rhs_cogeodesic(chart: &FermiChart, s: &CotangentState) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = chart.dim();
    if s.x.len() != d || s.xi.len() != d {
        return Err(Error::Domain(format!("state has wrong dimension for a {d}-dimensional chart")));
    }
    let mut dy = vec![0.0; 2 * d];
    cogeodesic_rhs_into(chart, &s.to_vec(), &mut dy)?;
    let xi = dy.split_off(d);
    Ok((dy, xi))
}

pub(crate) fn cogeodesic_rhs_into(chart: &FermiChart, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let d = chart.dim();
    let (x, xi) = y.split_at(d);
    let g = chart.local_geometry(x[0], &x[1..])?;
    if !(g.rho > 0.0) {
        return Err(Error::Domain(format!("rho = {} at x = {x:?}", g.rho)));
    }
    let r2 = g.rho * g.rho;
    let xi_t = DVector::from_column_slice(&xi[1..]);
    let v = &g.hinv * &xi_t;
    dy[0] = r2 * xi[0];
    for a in 0..d - 1 {
        dy[1 + a] = r2 * v[a];
    }
    // ∂_i h^{jk} ξ_j ξ_k = −vᵀ (∂_i h) v on the tangential block
    dy[d] = -g.rho0 / g.rho + 0.5 * r2 * v.dot(&(&g.dh.normal * &v));
    for a in 0..d - 1 {
        dy[d + 1 + a] = -g.drho[a] / g.rho + 0.5 * r2 * v.dot(&(&g.dh.tangential[a] * &v));
    }
    Ok(())
}

/// `(dx'/dτ, dw⁰/dτ, dw/dτ)` of the boundary system.
#[derive(Debug, Clone, PartialEq)]
pub struct TauDerivative {
    pub dx: Vec<f64>,
    pub dw0: f64,
    pub dw: Vec<f64>,
}

pub fn rhs_tau_regular(chart: &FermiChart, s: &TauState) -> Result<TauDerivative> {
    let n = chart.boundary_dim();
    if s.x.len() != n || s.w.len() != n {
        return Err(Error::Domain(format!("state has wrong dimension for a boundary of dimension {n}")));
    }
    if !(s.tau <= 0.0 && s.tau >= -chart.domain().delta * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("tau = {} is outside [-delta, 0]", s.tau)));
    }
    let mut dy = vec![0.0; 2 * n + 1];
    tau_rhs_into(chart, s.tau, &s.to_vec(), &mut dy)?;
    Ok(TauDerivative {
        dx: dy[..n].to_vec(),
        dw0: dy[n],
        dw: dy[n + 1..].to_vec(),
    })
}

pub(crate) fn tau_rhs_into(chart: &FermiChart, tau: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let n = chart.boundary_dim();
    let xp = &y[..n];
    let w0 = y[n];
    let w = DVector::from_column_slice(&y[n + 1..]);
    if !(w0 > 0.0) {
        return Err(Error::NotInbound(format!("w0 = {w0} at tau = {tau}")));
    }
    let bd = chart.boundary_data_raw(xp)?;
    if tau == 0.0 {
        let e = chart.e_remainder_raw(0.0, xp, &bd.shift)?;
        dy[..=n].fill(0.0);
        for a in 0..n {
            dy[n + 1 + a] = e[a] / w0;
        }
        return Ok(());
    }
    let lg = tau.abs().ln();
    let g = chart.local_geometry(tau, xp)?;
    if !(g.rho > 0.0) {
        return Err(Error::ChartIntegrity(format!("rho = {} at tau = {tau}", g.rho)));
    }
    let rho = g.rho;
    let (m, l) = chart.transport_raw(tau, xp)?;
    let a = &bd.shift * (lg / w0);
    let v = &l * (&w + &a);

    let vel = &v * (rho / w0);
    let k = &g.drho / rho;
    let vhv = v.dot(&(&g.h * &v));
    let q0 = v.dot(&(&g.dh.normal * &v));
    let big_w0 = rho * k.dot(&v) - rho * g.rho0 * vhv / w0 + 0.5 * rho * rho * q0 / w0;

    // h-geodesic spray of the tangential block
    let mut lin = DVector::zeros(n);
    let mut q = DVector::zeros(n);
    for c in 0..n {
        let dhc_v = &g.dh.tangential[c] * &v;
        lin += &dhc_v * v[c];
        q[c] = v.dot(&dhc_v);
    }
    let spray = &g.hinv * (q * 0.5 - lin) * (rho / w0);

    let dm = chart.transport_gradient_raw(tau, xp)?;
    let mut dm_term = DVector::zeros(n);
    for c in 0..n {
        dm_term += (&dm[c] * &v) * v[c];
    }
    dm_term *= rho / w0;

    let dshift = chart.shift_gradient_raw(xp, &bd)?;
    let e = if tau.abs() >= chart.settings().e_cut {
        chart.e_direct(tau, xp, &m, &bd.shift)?
    } else {
        chart.e_remainder_raw(tau, xp, &bd.shift)?
    };

    let big_w = &e / w0 + &m * spray + dm_term - &dshift * &vel * (lg / w0) + &a * (big_w0 / w0);

    dy[..n].copy_from_slice(vel.as_slice());
    dy[n] = big_w0;
    dy[n + 1..].copy_from_slice(big_w.as_slice());
    Ok(())
}

/// Converts an inbound cotangent state to boundary-system variables at `τ = x⁰`.
pub fn to_tau_state(chart: &FermiChart, s: &CotangentState) -> Result<TauState> {
    let x0 = s.x[0];
    let xp = &s.x[1..];
    if !(x0 < 0.0) {
        return Err(Error::Domain(format!("x0 = {x0} must be negative")));
    }
    let g = chart.local_geometry(x0, xp)?;
    let w0 = g.rho * s.xi[0];
    if !(w0 > 0.0) {
        return Err(Error::NotInbound(format!("zeta0 = {w0}")));
    }
    let v = &g.hinv * DVector::from_column_slice(&s.xi[1..]);
    let (m, _) = chart.transport_matrices(x0, xp)?;
    let a = chart.a_shift(x0, xp, w0)?;
    let w = m * v - a;
    Ok(TauState {
        tau: x0,
        x: xp.to_vec(),
        w0,
        w: w.as_slice().to_vec(),
    })
}

/// Inverse of [`to_tau_state`]. The arclength is not recoverable and is set to 0.
pub fn from_tau_state(chart: &FermiChart, s: &TauState) -> Result<CotangentState> {
    if s.tau == 0.0 {
        return Err(Error::Domain("xi0 is undefined at tau = 0".into()));
    }
    if !(s.w0 > 0.0) {
        return Err(Error::NotInbound(format!("w0 = {}", s.w0)));
    }
    let v = tangential_velocity(chart, s)?;
    let g = chart.local_geometry(s.tau, &s.x)?;
    let xi_t = &g.h * v;
    let mut x = vec![s.tau];
    x.extend(&s.x);
    let mut xi = vec![s.w0 / g.rho];
    xi.extend(xi_t.iter());
    Ok(CotangentState { t: 0.0, x, xi })
}

/// `v = L (w + A)` at a boundary-system state with `τ < 0`.
pub fn tangential_velocity(chart: &FermiChart, s: &TauState) -> Result<DVector<f64>> {
    let (_, l) = chart.transport_matrices(s.tau, &s.x)?;
    let a = chart.a_shift(s.tau, &s.x, s.w0)?;
    Ok(l * (DVector::from_column_slice(&s.w) + a))
}

/// Builds the unit-energy cotangent state at `x` whose velocity is the
/// `g`-normalization of the coordinate vector `dir` (`dir⁰ > 0` is inbound).
pub fn cotangent_from_velocity(chart: &FermiChart, x: &[f64], dir: &[f64]) -> Result<CotangentState> {
    let d = chart.dim();
    if x.len() != d || dir.len() != d {
        return Err(Error::Domain("point and direction must have the chart dimension".into()));
    }
    let g = chart.local_geometry(x[0], &x[1..])?;
    if !(g.rho > 0.0) {
        return Err(Error::Domain(format!("rho = {} at x = {x:?}", g.rho)));
    }
    let dt = DVector::from_column_slice(&dir[1..]);
    let hnorm2 = dir[0] * dir[0] + dt.dot(&(&g.h * &dt));
    if !(hnorm2 > 0.0) {
        return Err(Error::Domain("direction must be nonzero".into()));
    }
    // |ẋ|_g = 1 ⇔ |ẋ|_h = ρ; ξ = g(ẋ, ·) = ρ⁻² h ẋ
    let scale = g.rho / hnorm2.sqrt();
    let r2 = g.rho * g.rho;
    let mut xi = vec![dir[0] * scale / r2];
    xi.extend((&g.h * dt * (scale / r2)).iter());
    Ok(CotangentState {
        t: 0.0,
        x: x.to_vec(),
        xi,
    })
}

/// The arclength system as an [`OdeSystem`] in `y = [x, ξ]`.
pub struct CogeodesicSystem<'a> {
    pub chart: &'a FermiChart,
}

impl OdeSystem for CogeodesicSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.chart.dim()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        cogeodesic_rhs_into(self.chart, y, dy)
    }
}

/// The boundary system as an [`OdeSystem`] in `y = [x', w⁰, w]`.
pub struct TauSystem<'a> {
    pub chart: &'a FermiChart,
}

impl OdeSystem for TauSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.chart.boundary_dim() + 1
    }

    fn rhs(&self, tau: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        if tau > 0.0 {
            return Err(Error::Domain(format!("tau = {tau} is past the boundary")));
        }
        tau_rhs_into(self.chart, tau, y, dy)
    }
}
