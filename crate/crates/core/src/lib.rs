//! Geodesics of conformally compact metrics `g = ρ⁻² h`, integrated all the way to
//! the conformal boundary.
//!
//! A geodesic is followed in arclength until it is close to the boundary, then
//! handed to a boundary-regular system in the parameter `τ = x⁰` whose right-hand
//! side stays continuous at `τ = 0`. The same system run backwards from a boundary
//! point produces geodesics with a prescribed boundary expansion
//! `x(τ) = q + 𝒪 τ² log|τ| + u τ² + …`.
//!
//! ```
//! use conformal_geodesics::integrate::IntegratorConfig;
//! use conformal_geodesics::models::{hyperbolic_endpoint_oracle, make_hyperbolic_chart};
//! use conformal_geodesics::shoot::endpoint_from_angles;
//!
//! let chart = make_hyperbolic_chart();
//! let theta = std::f64::consts::FRAC_PI_4;
//! // chart coordinates are (x⁰, x¹) = (−y, x)
//! let end = endpoint_from_angles(&chart, &[-1.0, 0.0], &[theta], &IntegratorConfig::default()).unwrap();
//! assert!((end[0] - hyperbolic_endpoint_oracle(0.0, 1.0, theta)).abs() < 1e-6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod chart;
pub mod check;
pub mod cli;
pub mod error;
pub mod integrate;
pub mod io;
pub mod models;
pub mod shoot;
pub mod systems;

pub use error::{Error, Result};
