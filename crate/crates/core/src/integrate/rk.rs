//! Dormand–Prince 5(4) with PI step control, forced output points and
//! sign-change events, plus fixed-grid and Heun steppers.

use crate::error::{Error, Result};

/// A first-order system `y' = f(s, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;
const EVENT_TOL: f64 = 1e-12;

struct Stages {
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Self {
            k: vec![vec![0.0; n]; 7],
            tmp: vec![0.0; n],
        }
    }

    /// One DP step of size `h` from `(s, y)`, with `k[0]` already holding `f(s, y)`.
    /// Writes the fifth-order solution into `out` and leaves `f(s+h, out)` in `k[6]`.
    fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, s: f64, y: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
        let n = y.len();
        for i in 1..7 {
            for j in 0..n {
                let mut acc = 0.0;
                for (l, a) in A[i][..i].iter().enumerate() {
                    acc += a * self.k[l][j];
                }
                self.tmp[j] = y[j] + h * acc;
            }
            let (_, after) = self.k.split_at_mut(i);
            sys.rhs(s + C[i] * h, &self.tmp, &mut after[0])?;
        }
        // the last stage abscissa is s + h and its input is the 5th-order solution
        out.copy_from_slice(&self.tmp);
        Ok(())
    }

    fn error_norm(&self, y: &[f64], ynew: &[f64], h: f64, rel: f64, abs: f64) -> f64 {
        let n = y.len();
        let mut sum = 0.0;
        for j in 0..n {
            let mut e = 0.0;
            for (l, c) in E.iter().enumerate() {
                e += c * self.k[l][j];
            }
            let sc = abs + rel * y[j].abs().max(ynew[j].abs());
            let r = h * e / sc;
            sum += r * r;
        }
        (sum / n as f64).sqrt()
    }
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Stop {
    /// Reached the requested end of the interval.
    End,
    /// The event function crossed zero; the last sample sits on the crossing.
    Event,
    /// The caller's guard rejected the last accepted state (which is kept).
    Guard(String),
    /// Too many steps or the step size underflowed.
    Failure(Error),
}

/// Event function of a run, `(parameter, state) ↦ value`.
pub type EventFn<'a> = dyn Fn(f64, &[f64]) -> f64 + 'a;

/// Parameters of an adaptive run.
pub struct AdaptiveRun<'a> {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
    /// Upper bound on `|h|` as a function of the current parameter.
    pub max_step: &'a dyn Fn(f64) -> f64,
    /// Parameters the run must land on exactly, in any order.
    pub outputs: &'a [f64],
    /// Stops the run where this changes sign from negative to non-negative.
    pub event: Option<&'a EventFn<'a>>,
    /// Inspected after each accepted step; `Some(reason)` ends the run.
    pub guard: &'a dyn Fn(f64, &[f64]) -> Option<String>,
}

/// Accepted samples of a run, starting with the initial point.
#[derive(Debug)]
pub struct RunOutput {
    pub samples: Vec<(f64, Vec<f64>)>,
    pub stop: Stop,
}

fn direction(s0: f64, s1: f64) -> f64 {
    if s1 >= s0 {
        1.0
    } else {
        -1.0
    }
}

impl AdaptiveRun<'_> {
    pub fn solve<S: OdeSystem + ?Sized>(&self, sys: &S, s0: f64, y0: &[f64], s_end: f64) -> RunOutput {
        let n = sys.dim();
        let dir = direction(s0, s_end);
        let mut samples = vec![(s0, y0.to_vec())];
        if s0 == s_end {
            return RunOutput { samples, stop: Stop::End };
        }
        let mut st = Stages::new(n);
        if let Err(e) = sys.rhs(s0, y0, &mut st.k[0]) {
            return RunOutput {
                samples,
                stop: Stop::Failure(e),
            };
        }
        let mut s = s0;
        let mut y = y0.to_vec();
        let mut ynew = vec![0.0; n];
        let mut h = self.initial_step.abs().min((s_end - s0).abs()) * dir;
        let mut err_prev: f64 = 1e-4;
        let mut outputs: Vec<f64> = self.outputs.iter().copied().filter(|&o| (o - s0) * dir > 0.0).collect();
        outputs.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
        outputs.dedup();
        let mut next_out = 0;
        let mut g_prev = self.event.map(|g| g(s0, y0));
        let mut steps = 0usize;

        loop {
            if steps >= self.max_steps {
                return RunOutput {
                    samples,
                    stop: Stop::Failure(Error::Numeric(format!("max_steps = {} exceeded at s = {s}", self.max_steps))),
                };
            }
            let cap = (self.max_step)(s).abs();
            if h.abs() > cap {
                h = cap * dir;
            }
            let mut target = s_end;
            if next_out < outputs.len() && (outputs[next_out] - s_end) * dir < 0.0 {
                target = outputs[next_out];
            }
            let h_proposed = h;
            let mut landing = false;
            if (s + h - target) * dir >= 0.0 {
                h = target - s;
                landing = true;
            }
            if s + h == s || h.abs() < 1e-300 {
                return RunOutput {
                    samples,
                    stop: Stop::Failure(Error::Numeric(format!("step size underflow at s = {s}"))),
                };
            }
            steps += 1;
            let k0 = st.k[0].clone();
            if st.step(sys, s, &y, h, &mut ynew).is_err() {
                st.k[0] = k0;
                h *= 0.5;
                continue;
            }
            let err = st.error_norm(&y, &ynew, h, self.rel_tol, self.abs_tol);
            if !err.is_finite() || err > 1.0 {
                st.k[0] = k0;
                let f = if err.is_finite() {
                    (SAFETY * err.powf(-0.2)).max(MIN_FACTOR)
                } else {
                    0.5
                };
                h *= f;
                continue;
            }
            let s_new = if landing { target } else { s + h };

            if let (Some(g), Some(gp)) = (self.event, g_prev) {
                let gn = g(s_new, &ynew);
                if gp < 0.0 && gn >= 0.0 {
                    let k_first = k0;
                    match self.locate_event(sys, g, s, &y, h, &k_first) {
                        Ok((se, ye)) => {
                            samples.push((se, ye));
                            return RunOutput { samples, stop: Stop::Event };
                        }
                        Err(e) => {
                            return RunOutput {
                                samples,
                                stop: Stop::Failure(e),
                            }
                        }
                    }
                }
                g_prev = Some(gn);
            }

            s = s_new;
            std::mem::swap(&mut y, &mut ynew);
            let last = st.k[6].clone();
            st.k[0] = last;
            samples.push((s, y.clone()));
            if let Some(reason) = (self.guard)(s, &y) {
                return RunOutput {
                    samples,
                    stop: Stop::Guard(reason),
                };
            }
            if landing {
                if target == s_end {
                    return RunOutput { samples, stop: Stop::End };
                }
                next_out += 1;
            }
            let e = err.max(1e-10);
            let factor = (SAFETY * e.powf(-PI_ALPHA) * err_prev.powf(PI_BETA)).clamp(MIN_FACTOR, MAX_FACTOR);
            err_prev = e;
            h = if landing { h_proposed } else { h * factor };
        }
    }

    /// Bisects the step fraction until the event function is within tolerance.
    fn locate_event<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        g: &dyn Fn(f64, &[f64]) -> f64,
        s: f64,
        y: &[f64],
        h: f64,
        k0: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        let n = y.len();
        let mut st = Stages::new(n);
        let mut out = vec![0.0; n];
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut best = (s + h, y.to_vec());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            st.k[0].copy_from_slice(k0);
            st.step(sys, s, y, mid * h, &mut out)?;
            let gm = g(s + mid * h, &out);
            best = (s + mid * h, out.clone());
            if gm.abs() <= EVENT_TOL {
                break;
            }
            if gm < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(best)
    }
}

/// One explicit trapezoidal (Heun) step.
pub fn heun_step<S: OdeSystem + ?Sized>(sys: &S, s: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    sys.rhs(s, y, &mut k1)?;
    let y1: Vec<f64> = (0..n).map(|j| y[j] + h * k1[j]).collect();
    sys.rhs(s + h, &y1, &mut k2)?;
    Ok((0..n).map(|j| y[j] + 0.5 * h * (k1[j] + k2[j])).collect())
}

/// Integrates across the given parameter grid with one DP step per interval
/// and no error control. Returns the state at every grid point.
pub fn solve_on_grid<S: OdeSystem + ?Sized>(sys: &S, grid: &[f64], y0: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = sys.dim();
    let mut st = Stages::new(n);
    let mut out = vec![y0.to_vec()];
    if grid.is_empty() {
        return Ok(out);
    }
    let mut y = y0.to_vec();
    let mut ynew = vec![0.0; n];
    sys.rhs(grid[0], &y, &mut st.k[0])?;
    for win in grid.windows(2) {
        let h = win[1] - win[0];
        st.step(sys, win[0], &y, h, &mut ynew)?;
        std::mem::swap(&mut y, &mut ynew);
        let last = st.k[6].clone();
        st.k[0] = last;
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp;
    impl OdeSystem for Exp {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _s: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = y[0];
            Ok(())
        }
    }

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _s: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        }
    }

    fn run<'a>(max_step: &'a dyn Fn(f64) -> f64, guard: &'a dyn Fn(f64, &[f64]) -> Option<String>) -> AdaptiveRun<'a> {
        AdaptiveRun {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 100_000,
            initial_step: 1e-3,
            max_step,
            outputs: &[],
            event: None,
            guard,
        }
    }

    #[test]
    fn exponential_growth() {
        let cap = |_: f64| f64::INFINITY;
        let guard = |_: f64, _: &[f64]| None;
        let out = run(&cap, &guard).solve(&Exp, 0.0, &[1.0], 2.0);
        assert!(matches!(out.stop, Stop::End));
        let (s, y) = out.samples.last().unwrap();
        assert_eq!(*s, 2.0);
        assert!((y[0] - 2f64.exp()).abs() < 1e-8 * 2f64.exp());
    }

    #[test]
    fn backward_run_and_outputs() {
        let cap = |_: f64| f64::INFINITY;
        let guard = |_: f64, _: &[f64]| None;
        let outputs = [-0.5, -1.0, -1.5];
        let mut r = run(&cap, &guard);
        r.outputs = &outputs;
        let out = r.solve(&Oscillator, 0.0, &[0.0, 1.0], -2.0);
        for o in outputs {
            let (_, y) = out.samples.iter().find(|(s, _)| *s == o).expect("output point hit");
            assert!((y[0] - o.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn event_location() {
        let cap = |_: f64| 0.3;
        let guard = |_: f64, _: &[f64]| None;
        let ev = |_: f64, y: &[f64]| y[0] - 0.5;
        let mut r = run(&cap, &guard);
        r.event = Some(&ev);
        let out = r.solve(&Oscillator, 0.0, &[0.0, 1.0], 3.0);
        assert!(matches!(out.stop, Stop::Event));
        let (s, y) = out.samples.last().unwrap();
        assert!((y[0] - 0.5).abs() <= 1e-12);
        assert!((s - 0.5f64.asin()).abs() < 1e-9);
    }

    #[test]
    fn guard_stops_run() {
        let cap = |_: f64| 0.1;
        let guard = |_: f64, y: &[f64]| (y[0] > 3.0).then(|| "big".to_string());
        let out = run(&cap, &guard).solve(&Exp, 0.0, &[1.0], 5.0);
        assert!(matches!(out.stop, Stop::Guard(_)));
        assert!(out.samples.last().unwrap().1[0] > 3.0);
    }

    #[test]
    fn grid_solver_is_fifth_order() {
        let err = |m: usize| {
            let grid: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
            let ys = solve_on_grid(&Exp, &grid, &[1.0]).unwrap();
            (ys.last().unwrap()[0] - 1f64.exp()).abs()
        };
        let order = (err(8) / err(16)).log2();
        assert!(order > 4.5, "observed order {order}");
    }

    #[test]
    fn heun_is_second_order() {
        let err = |m: usize| {
            let h = 1.0 / m as f64;
            let mut y = vec![1.0];
            for i in 0..m {
                y = heun_step(&Exp, i as f64 * h, &y, h).unwrap();
            }
            (y[0] - 1f64.exp()).abs()
        };
        let order = (err(50) / err(100)).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }
}
