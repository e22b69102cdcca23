//! Matrix exponential for the small dense matrices used by the transport factors.

use nalgebra::DMatrix;

/// Target bound on the scaled norm before the series is summed.
const SCALED_NORM: f64 = 0.5;
/// Series terms are added until the tail bound drops below this.
const REMAINDER: f64 = 1e-16;
const MAX_TERMS: usize = 40;

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring with a truncated Taylor series.
///
/// The squaring count is chosen so that `‖a‖₁ / 2^s < 0.5`; with that bound the
/// series tail after term k is at most `2·‖b‖^k / k!`, which is driven below
/// 1e-16 before squaring.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let norm = norm1(a);
    if norm == 0.0 {
        return DMatrix::identity(n, n);
    }
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let b = a / 2f64.powi(squarings);
    let bn = norm1(&b);

    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    let mut term_bound = 1.0;
    for k in 1..=MAX_TERMS {
        term = &term * &b / k as f64;
        result += &term;
        term_bound *= bn / k as f64;
        // geometric tail: sum_{j>k} bn^j/j! <= term_bound * bn/(k+1) / (1 - bn/(k+1))
        let ratio = bn / (k + 1) as f64;
        if term_bound * ratio / (1.0 - ratio) < REMAINDER {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_matrix_gives_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(expm(&z), DMatrix::identity(3, 3));
    }

    #[test]
    fn scalar_matches_exp() {
        for x in [-8.0, -1.386294361119891, -0.1, 0.3, 2.0, 10.0] {
            let m = DMatrix::from_element(1, 1, x);
            assert_relative_eq!(expm(&m)[(0, 0)], f64::exp(x), max_relative = 1e-13);
        }
    }

    #[test]
    fn rotation_generator() {
        // exp([[0,-t],[t,0]]) is a rotation by t
        let t = 2.7;
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&m);
        assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-13);
        assert_relative_eq!(e[(1, 0)], t.sin(), epsilon = 1e-13);
        assert_relative_eq!(e[(0, 1)], -t.sin(), epsilon = 1e-13);
    }

    #[test]
    fn nilpotent_is_exact() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        let e = expm(&m);
        assert_eq!(e, DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 1.0]));
    }

    #[test]
    fn inverse_pair() {
        let m = DMatrix::from_row_slice(3, 3, &[0.2, -1.1, 0.4, 0.7, -0.3, 0.9, -0.5, 0.25, 1.3]);
        let p = expm(&m) * expm(&(-&m));
        let err = (p - DMatrix::<f64>::identity(3, 3)).abs().max();
        assert!(err < 1e-13, "{err}");
    }
}
