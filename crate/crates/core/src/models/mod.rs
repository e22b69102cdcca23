//! Built-in charts, closed-form oracles and figure data.
//!
//! The ε-family `g_ε = (dx² + dy²)/(y² e^{2εx})` on the upper half plane is
//! written in Fermi form with `x⁰ = −y`, `x¹ = x`, `h` Euclidean and
//! `ρ = y e^{εx}`. At ε = 0 it is the hyperbolic half plane.

mod figures;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chart::{ChartDomain, FermiChart, FermiMetric, MetricDerivatives};
use crate::error::{Error, Result};

pub use figures::{figure_data, geometric_grid, FigureCurve, FigureOptions, FIGURE1_THETAS, FIGURE2_US};

/// Parameters of the ε-family chart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonFamily {
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_x_box")]
    pub x_box: (f64, f64),
    /// Depth available to the arclength flow; the family is defined for all `y > 0`.
    #[serde(default = "default_interior_depth")]
    pub interior_depth: f64,
}

fn default_delta() -> f64 {
    0.9
}

fn default_x_box() -> (f64, f64) {
    (-2.0, 2.0)
}

fn default_interior_depth() -> f64 {
    4.0
}

impl EpsilonFamily {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            delta: default_delta(),
            x_box: default_x_box(),
            interior_depth: default_interior_depth(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct EpsilonMetric {
    eps: f64,
}

impl FermiMetric for EpsilonMetric {
    fn dim(&self) -> usize {
        2
    }

    fn h(&self, _x0: f64, _xp: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(1, 1)
    }

    fn dh(&self, _x0: f64, _xp: &[f64]) -> MetricDerivatives {
        MetricDerivatives {
            normal: DMatrix::zeros(1, 1),
            tangential: vec![DMatrix::zeros(1, 1)],
        }
    }

    fn rho(&self, x0: f64, xp: &[f64]) -> f64 {
        -x0 * (self.eps * xp[0]).exp()
    }

    fn drho(&self, x0: f64, xp: &[f64]) -> (f64, DVector<f64>) {
        let e = (self.eps * xp[0]).exp();
        (-e, DVector::from_element(1, -self.eps * x0 * e))
    }

    fn kappa_jet(&self, xp: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let e = (self.eps * xp[0]).exp();
        Some((
            DVector::from_element(1, self.eps * e),
            DMatrix::from_element(1, 1, self.eps * self.eps * e),
        ))
    }
}

/// The chart of `g_ε`.
pub fn make_epsilon_chart(params: &EpsilonFamily) -> Result<FermiChart> {
    if !(params.epsilon >= 0.0) {
        return Err(Error::Config(format!("epsilon must be >= 0, got {}", params.epsilon)));
    }
    FermiChart::new(
        format!("epsilon:{}", params.epsilon),
        Arc::new(EpsilonMetric { eps: params.epsilon }),
        ChartDomain {
            delta: params.delta,
            interior_depth: params.interior_depth.max(params.delta),
            x_box: vec![params.x_box],
        },
    )
}

/// The hyperbolic half plane, `g_0`.
pub fn make_hyperbolic_chart() -> FermiChart {
    make_epsilon_chart(&EpsilonFamily::new(0.0)).expect("default hyperbolic chart is valid")
}

#[derive(Debug, Clone, Copy)]
struct WarpedMetric;

impl FermiMetric for WarpedMetric {
    fn dim(&self) -> usize {
        2
    }

    fn h(&self, x0: f64, _xp: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, (1.0 + x0).powi(2))
    }

    fn dh(&self, x0: f64, _xp: &[f64]) -> MetricDerivatives {
        MetricDerivatives {
            normal: DMatrix::from_element(1, 1, 2.0 * (1.0 + x0)),
            tangential: vec![DMatrix::zeros(1, 1)],
        }
    }

    fn rho(&self, x0: f64, _xp: &[f64]) -> f64 {
        -x0
    }

    fn drho(&self, _x0: f64, _xp: &[f64]) -> (f64, DVector<f64>) {
        (-1.0, DVector::zeros(1))
    }

    fn kappa_jet(&self, _xp: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        Some((DVector::zeros(1), DMatrix::zeros(1, 1)))
    }
}

/// `h = (dx⁰)² + (1+x⁰)²(dx¹)²`, `ρ = −x⁰` on `x⁰ ∈ [−0.9, 0]`: κ ≡ 1 but μ ≠ 0.
pub fn make_warped_ah_chart() -> FermiChart {
    FermiChart::new(
        "warped_ah",
        Arc::new(WarpedMetric),
        ChartDomain {
            delta: 0.9,
            interior_depth: 0.9,
            x_box: vec![(-2.0, 2.0)],
        },
    )
    .expect("warped chart is valid")
}

/// Boundary abscissa of the hyperbolic geodesic through `(x0, y0)` with unit
/// tangent `(sin θ, −cos θ)`.
pub fn hyperbolic_endpoint_oracle(x0: f64, y0: f64, theta: f64) -> f64 {
    x0 + y0 * (0.5 * theta).tan()
}

/// `d/dθ` of [`hyperbolic_endpoint_oracle`].
pub fn hyperbolic_endpoint_derivative(y0: f64, theta: f64) -> f64 {
    0.5 * y0 / (0.5 * theta).cos().powi(2)
}

/// The hyperbolic geodesic ending at `q` with `x = q + u y² + O(y⁴)`, as `x(y)`.
pub fn hyperbolic_boundary_curve(q: f64, u: f64, y: f64) -> f64 {
    if u == 0.0 {
        return q;
    }
    let s = 4.0 * u * u * y * y;
    // (1 − √(1 − s)) / (2u), written without cancellation
    q + s / ((1.0 + (1.0 - s).sqrt()) * 2.0 * u)
}

/// The asymptotic curve `x = −½ ε y² log y + u y²`.
pub fn asymptotic_curve(epsilon: f64, u: f64, y: f64) -> f64 {
    -0.5 * epsilon * y * y * y.ln() + u * y * y
}

/// The ε-family boundary system in the variables `(x, w_y, w_x)` with `y` as
/// the independent variable and `w_y = −w⁰`, coded directly from the closed form.
pub fn epsilon_tau_rhs_reference(eps: f64, y: f64, x: f64, w_y: f64, w_x: f64) -> [f64; 3] {
    let e = (eps * x).exp();
    if y == 0.0 {
        return [0.0, 0.0, 0.0];
    }
    let ly = y.ln();
    let a = -(1.0 / w_y) * (eps / e) * ly;
    let da_dx = (1.0 / w_y) * eps * eps / e * ly;
    let da_dwy = (1.0 / (w_y * w_y)) * (eps / e) * ly;
    let v = w_x + a;
    let dx = y * e * v / w_y;
    let dwy = eps * y * e * v - y * e * e * v * v / w_y;
    let dwx = -dx * da_dx - dwy * da_dwy;
    [dx, dwy, dwx]
}
