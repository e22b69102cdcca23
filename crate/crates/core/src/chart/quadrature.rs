//! Adaptive Simpson quadrature for small vector-valued integrands.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn simpson(fa: &[f64], fm: &[f64], fb: &[f64], width: f64) -> Vec<f64> {
    fa.iter()
        .zip(fm)
        .zip(fb)
        .map(|((a, m), b)| width / 6.0 * (a + 4.0 * m + b))
        .collect()
}

struct Panel {
    a: f64,
    b: f64,
    fa: Vec<f64>,
    fm: Vec<f64>,
    fb: Vec<f64>,
    whole: Vec<f64>,
    depth: u32,
}

/// Integrates `f` over `[a, b]` component-wise.
///
/// A panel is accepted when the Richardson difference between one and two Simpson
/// panels is below `15·tol·max(|I|, scale)`, with `tol` split between halves.
/// `f` writes into a buffer of length `len`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, len: usize, rel_tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [f64]),
{
    let eval = |x: f64| {
        let mut out = vec![0.0; len];
        f(x, &mut out);
        out
    };
    if a == b {
        return Ok(vec![0.0; len]);
    }
    let fa = eval(a);
    let fb = eval(b);
    let fm = eval(0.5 * (a + b));
    let whole = simpson(&fa, &fm, &fb, b - a);
    // Absolute floor relative to the magnitude of the integrand over the whole range.
    let scale = (max_abs(&fa).max(max_abs(&fm)).max(max_abs(&fb)) * (b - a).abs()).max(1e-300);
    let mut total = vec![0.0; len];
    let mut stack = vec![(
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
            depth: 0,
        },
        rel_tol,
    )];
    while let Some((p, tol)) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = eval(0.5 * (p.a + m));
        let frm = eval(0.5 * (m + p.b));
        let left = simpson(&p.fa, &flm, &p.fm, m - p.a);
        let right = simpson(&p.fm, &frm, &p.fb, p.b - m);
        let diff = left
            .iter()
            .zip(&right)
            .zip(&p.whole)
            .map(|((l, r), w)| (l + r - w).abs())
            .fold(0.0, f64::max);
        let mag = max_abs(&p.whole).max(scale * 1e-3);
        if diff <= 15.0 * tol * mag {
            for i in 0..len {
                total[i] += left[i] + right[i] + (left[i] + right[i] - p.whole[i]) / 15.0;
            }
            continue;
        }
        if p.depth >= MAX_DEPTH {
            return Err(Error::Numeric(format!(
                "adaptive Simpson did not converge on [{}, {}]",
                p.a, p.b
            )));
        }
        stack.push((
            Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm.clone(),
                whole: left,
                depth: p.depth + 1,
            },
            tol,
        ));
        stack.push((
            Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                depth: p.depth + 1,
            },
            tol,
        ));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_log_antiderivative() {
        // ∫_{-0.5}^{0} 2/(1+s) ds = -2 log(0.5)
        let v = adaptive_simpson(|s, o| o[0] = 2.0 / (1.0 + s), -0.5, 0.0, 1, 1e-12).unwrap();
        let exact = -2.0 * 0.5f64.ln();
        assert!((v[0] - exact).abs() < 1e-12 * exact.abs(), "{} vs {}", v[0], exact);
    }

    #[test]
    fn zero_integrand_is_cheap_and_exact() {
        let v = adaptive_simpson(|_, o| o.fill(0.0), -0.9, 0.0, 4, 1e-12).unwrap();
        assert_eq!(v, vec![0.0; 4]);
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let f = |s: f64, o: &mut [f64]| {
            o[0] = s.cos();
            o[1] = s * s;
        };
        let a = adaptive_simpson(f, 0.0, 1.3, 2, 1e-12).unwrap();
        let b = adaptive_simpson(f, 1.3, 0.0, 2, 1e-12).unwrap();
        assert!((a[0] + b[0]).abs() < 1e-14);
        assert!((a[0] - 1.3f64.sin()).abs() < 1e-12);
        assert!((a[1] - 1.3f64.powi(3) / 3.0).abs() < 1e-12);
    }
}
