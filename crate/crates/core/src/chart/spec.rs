//! Chart selection from short names, JSON documents or files.

use std::path::Path;

use serde::Deserialize;

use super::polynomial::{PolynomialChartDoc, PolynomialMetric};
use super::{ChartDomain, FermiChart};
use crate::error::{Error, Result};
use crate::models::{make_epsilon_chart, make_warped_ah_chart, EpsilonFamily};

/// A parsed chart description.
///
/// Accepted forms: `epsilon:<ε>`, `hyperbolic`, `warped`, an inline JSON
/// document, or the path of a JSON file. JSON documents carry a `type` tag:
/// `epsilon_family`, `hyperbolic`, `warped_ah` or `polynomial`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChartSpec {
    EpsilonFamily(EpsilonFamilyDoc),
    Hyperbolic,
    WarpedAh,
    Polynomial(PolynomialChartDoc),
}

#[derive(Debug, Clone, Deserialize)]
pub struct EpsilonFamilyDoc {
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub x_box: Option<[f64; 2]>,
    pub interior_depth: Option<f64>,
}

impl ChartSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(eps) = t.strip_prefix("epsilon:") {
            let epsilon = eps
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad epsilon value '{eps}'")))?;
            return Ok(ChartSpec::EpsilonFamily(EpsilonFamilyDoc {
                epsilon,
                delta: None,
                x_box: None,
                interior_depth: None,
            }));
        }
        match t {
            "hyperbolic" => return Ok(ChartSpec::Hyperbolic),
            "warped" | "warped_ah" => return Ok(ChartSpec::WarpedAh),
            _ => {}
        }
        if t.starts_with('{') {
            return Self::from_json(t);
        }
        let path = Path::new(t);
        if path.is_file() {
            let body = std::fs::read_to_string(path)?;
            return Self::from_json(&body);
        }
        Err(Error::Config(format!(
            "unknown chart '{t}': expected epsilon:<value>, hyperbolic, warped, inline JSON or a file path"
        )))
    }

    fn from_json(body: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(body)?;
        let kind = value
            .get("type")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| Error::Config("chart document has no \"type\" field".into()))?;
        match kind.as_str() {
            "epsilon_family" | "hyperbolic" | "warped_ah" | "polynomial" => {
                serde_json::from_value(value).map_err(|e| Error::Config(format!("chart '{kind}': {e}")))
            }
            other => Err(Error::Config(format!("unknown chart type '{other}'"))),
        }
    }

    pub fn build(&self) -> Result<FermiChart> {
        match self {
            ChartSpec::EpsilonFamily(d) => {
                let mut p = EpsilonFamily::new(d.epsilon);
                if let Some(delta) = d.delta {
                    p.delta = delta;
                }
                if let Some([lo, hi]) = d.x_box {
                    p.x_box = (lo, hi);
                }
                if let Some(depth) = d.interior_depth {
                    p.interior_depth = depth;
                }
                make_epsilon_chart(&p)
            }
            ChartSpec::Hyperbolic => make_epsilon_chart(&EpsilonFamily::new(0.0)),
            ChartSpec::WarpedAh => Ok(make_warped_ah_chart()),
            ChartSpec::Polynomial(doc) => {
                let metric = PolynomialMetric::from_doc(doc)?;
                FermiChart::new(
                    "polynomial",
                    std::sync::Arc::new(metric),
                    ChartDomain {
                        delta: doc.delta,
                        interior_depth: doc.interior_depth.unwrap_or(doc.delta),
                        x_box: doc.x_box.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
                    },
                )
            }
        }
    }
}
