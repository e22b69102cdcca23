//! Charts given by truncated multivariate polynomials in `(x⁰, x¹, …, xⁿ)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{FermiMetric, MetricDerivatives};
use crate::error::{Error, Result};

/// Highest total degree accepted from chart documents.
pub const MAX_DEGREE: u32 = 6;

/// A sparse polynomial: a sum of `coef · Π x_i^{e_i}`.
/// `(coefficient, exponents)` pairs of a polynomial.
pub type Terms = Vec<(f64, Vec<u32>)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    nvars: usize,
    terms: Terms,
}

impl Polynomial {
    pub fn new(nvars: usize, terms: Terms) -> Result<Self> {
        for (_, e) in &terms {
            if e.len() != nvars {
                return Err(Error::Config(format!(
                    "monomial exponent list {e:?} has length {}, expected {nvars}",
                    e.len()
                )));
            }
        }
        let mut p = Self { nvars, terms };
        p.canonicalize();
        Ok(p)
    }

    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self {
            nvars,
            terms: vec![(c, vec![0; nvars])],
        };
        p.canonicalize();
        p
    }

    fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Terms = Vec::with_capacity(self.terms.len());
        for (c, e) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((mc, me)) if *me == e => *mc += c,
                _ => merged.push((c, e)),
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        self.terms = merged;
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn derivative(&self, var: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[var] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[var] -= 1;
                (c * e[var] as f64, e2)
            })
            .collect();
        let mut p = Self { nvars: self.nvars, terms };
        p.canonicalize();
        p
    }

    /// Sets variable `var` to zero.
    pub fn restrict_zero(&self, var: usize) -> Self {
        let terms = self.terms.iter().filter(|(_, e)| e[var] == 0).cloned().collect();
        Self { nvars: self.nvars, terms }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.terms.iter_mut().for_each(|(c, _)| *c *= s);
        p.canonicalize();
        p
    }
}

/// JSON form of a polynomial chart.
///
/// `rho` and every entry of `h` are lists of `[coefficient, [exponents]]` pairs
/// over the variables `(x⁰, x¹, …, xⁿ)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialChartDoc {
    pub dim: usize,
    pub delta: f64,
    #[serde(default)]
    pub interior_depth: Option<f64>,
    pub x_box: Vec<[f64; 2]>,
    pub rho: Terms,
    pub h: Vec<Vec<Terms>>,
}

/// Fermi metric whose `h_{αβ}` and `ρ` are polynomials, differentiated symbolically.
#[derive(Debug, Clone)]
pub struct PolynomialMetric {
    dim: usize,
    h: Vec<Vec<Polynomial>>,
    dh: Vec<Vec<Vec<Polynomial>>>,
    rho: Polynomial,
    drho: Vec<Polynomial>,
    kappa_grad: Vec<Polynomial>,
    kappa_hess: Vec<Vec<Polynomial>>,
}

impl PolynomialMetric {
    /// `h[α][β]` over `dim` variables; `h` must be symmetric.
    pub fn new(dim: usize, rho: Polynomial, h: Vec<Vec<Polynomial>>) -> Result<Self> {
        let n = dim.checked_sub(1).filter(|n| *n >= 1).ok_or_else(|| {
            Error::Config(format!("polynomial chart needs dim >= 2, got {dim}"))
        })?;
        if h.len() != n || h.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("h must be {n}x{n}")));
        }
        let all = std::iter::once(&rho).chain(h.iter().flatten());
        for p in all {
            if p.nvars() != dim {
                return Err(Error::Config(format!("polynomial has {} variables, expected {dim}", p.nvars())));
            }
            if p.degree() > MAX_DEGREE {
                return Err(Error::Config(format!(
                    "polynomial degree {} exceeds {MAX_DEGREE}",
                    p.degree()
                )));
            }
        }
        for a in 0..n {
            for b in 0..a {
                if h[a][b] != h[b][a] {
                    return Err(Error::Config(format!("h is not symmetric in entries ({a},{b})")));
                }
            }
        }
        let dh = (0..dim)
            .map(|v| h.iter().map(|r| r.iter().map(|p| p.derivative(v)).collect()).collect())
            .collect();
        let drho: Vec<_> = (0..dim).map(|v| rho.derivative(v)).collect();
        // κ(x') = −∂₀ρ(0, x'), kept as a polynomial in all variables with x⁰ removed
        let kappa = drho[0].restrict_zero(0).scale(-1.0);
        let kappa_grad: Vec<_> = (1..dim).map(|v| kappa.derivative(v)).collect();
        let kappa_hess = kappa_grad
            .iter()
            .map(|g| (1..dim).map(|v| g.derivative(v)).collect())
            .collect();
        Ok(Self {
            dim,
            h,
            dh,
            rho,
            drho,
            kappa_grad,
            kappa_hess,
        })
    }

    pub fn from_doc(doc: &PolynomialChartDoc) -> Result<Self> {
        let poly = |t: &Terms| Polynomial::new(doc.dim, t.clone());
        let rho = poly(&doc.rho)?;
        let h = doc
            .h
            .iter()
            .map(|row| row.iter().map(poly).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.dim, rho, h)
    }

    fn point(x0: f64, xp: &[f64]) -> Vec<f64> {
        std::iter::once(x0).chain(xp.iter().copied()).collect()
    }

    fn matrix(&self, m: &[Vec<Polynomial>], x: &[f64]) -> DMatrix<f64> {
        let n = self.dim - 1;
        DMatrix::from_fn(n, n, |a, b| m[a][b].eval(x))
    }
}

impl FermiMetric for PolynomialMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn h(&self, x0: f64, xp: &[f64]) -> DMatrix<f64> {
        self.matrix(&self.h, &Self::point(x0, xp))
    }

    fn dh(&self, x0: f64, xp: &[f64]) -> MetricDerivatives {
        let x = Self::point(x0, xp);
        MetricDerivatives {
            normal: self.matrix(&self.dh[0], &x),
            tangential: self.dh[1..].iter().map(|m| self.matrix(m, &x)).collect(),
        }
    }

    fn rho(&self, x0: f64, xp: &[f64]) -> f64 {
        self.rho.eval(&Self::point(x0, xp))
    }

    fn drho(&self, x0: f64, xp: &[f64]) -> (f64, DVector<f64>) {
        let x = Self::point(x0, xp);
        (
            self.drho[0].eval(&x),
            DVector::from_iterator(self.dim - 1, self.drho[1..].iter().map(|p| p.eval(&x))),
        )
    }

    fn kappa_jet(&self, xp: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let x = Self::point(0.0, xp);
        let n = self.dim - 1;
        Some((
            DVector::from_iterator(n, self.kappa_grad.iter().map(|p| p.eval(&x))),
            self.matrix(&self.kappa_hess, &x),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_derivative() {
        // p = 3 x0^2 x1 - x1^3 + 2
        let p = Polynomial::new(2, vec![(3.0, vec![2, 1]), (-1.0, vec![0, 3]), (2.0, vec![0, 0])]).unwrap();
        assert_eq!(p.eval(&[2.0, -1.0]), -12.0 + 1.0 + 2.0);
        let d1 = p.derivative(1);
        assert_eq!(d1.eval(&[2.0, -1.0]), 12.0 - 3.0);
        assert_eq!(p.derivative(0).derivative(0).eval(&[5.0, 2.0]), 12.0);
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn like_terms_merge_and_cancel() {
        let p = Polynomial::new(1, vec![(1.0, vec![2]), (-1.0, vec![2]), (4.0, vec![0])]).unwrap();
        assert_eq!(p, Polynomial::constant(1, 4.0));
    }

    #[test]
    fn rejects_high_degree_and_asymmetry() {
        let one = Polynomial::constant(3, 1.0);
        let rho = Polynomial::new(3, vec![(-1.0, vec![7, 0, 0])]).unwrap();
        let h = vec![vec![one.clone(), Polynomial::zero(3)], vec![Polynomial::zero(3), one.clone()]];
        assert!(PolynomialMetric::new(3, rho, h).is_err());

        let rho = Polynomial::new(3, vec![(-1.0, vec![1, 0, 0])]).unwrap();
        let off = Polynomial::new(3, vec![(0.1, vec![0, 1, 0])]).unwrap();
        let h = vec![vec![one.clone(), off], vec![Polynomial::zero(3), one]];
        assert!(PolynomialMetric::new(3, rho, h).is_err());
    }

    #[test]
    fn kappa_jet_is_symbolic() {
        // ρ = −x0 (1 + x1 + x1^2/2)  ⇒  κ = 1 + x1 + x1²/2
        let rho = Polynomial::new(2, vec![(-1.0, vec![1, 0]), (-1.0, vec![1, 1]), (-0.5, vec![1, 2])]).unwrap();
        let m = PolynomialMetric::new(2, rho, vec![vec![Polynomial::constant(2, 1.0)]]).unwrap();
        let (g, h) = m.kappa_jet(&[0.4]).unwrap();
        assert!((g[0] - 1.4).abs() < 1e-15);
        assert!((h[(0, 0)] - 1.0).abs() < 1e-15);
    }
}
