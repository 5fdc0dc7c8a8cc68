//! Dormand-Prince 5(4) with embedded error control, for complex linear
//! systems of changing dimension.

use num_complex::Complex64;

use crate::error::{DhoError, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// the last row of A doubles as the fifth-order weights (FSAL)

// difference between fifth- and fourth-order weights
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

/// Right-hand side `dy/dt = f(t, y)`, written into `dy`.
pub trait System {
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]);
}

impl<F: Fn(f64, &[Complex64], &mut [Complex64])> System for F {
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        self(t, y, dy)
    }
}

/// Adaptive integrator state. The state vector may be resized between
/// calls to [`Dopri5::advance`].
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub t: f64,
    pub y: Vec<Complex64>,
    pub h: f64,
    pub rtol: f64,
    pub atol: f64,
    pub accepted: usize,
    pub rejected: usize,
    k: Vec<Vec<Complex64>>,
    tmp: Vec<Complex64>,
    fsal_valid: bool,
}

impl Dopri5 {
    pub fn new(t0: f64, y0: Vec<Complex64>, tol: f64) -> Self {
        let n = y0.len();
        Dopri5 {
            t: t0,
            y: y0,
            h: 0.0,
            rtol: tol,
            atol: tol,
            accepted: 0,
            rejected: 0,
            k: vec![vec![Complex64::new(0.0, 0.0); n]; 7],
            tmp: vec![Complex64::new(0.0, 0.0); n],
            fsal_valid: false,
        }
    }

    /// Grows the state with zeros.
    pub fn extend(&mut self, new_len: usize) {
        let zero = Complex64::new(0.0, 0.0);
        self.y.resize(new_len, zero);
        for k in &mut self.k {
            k.resize(new_len, zero);
        }
        self.tmp.resize(new_len, zero);
        self.fsal_valid = false;
    }

    fn initial_step<S: System>(&mut self, sys: &S, span: f64) -> f64 {
        sys.rhs(self.t, &self.y, &mut self.k[0]);
        self.fsal_valid = true;
        let scale = |y: Complex64| self.atol + self.rtol * y.norm();
        let d0 = rms(self.y.iter().map(|y| y.norm() / scale(*y)));
        let d1 = rms(self.y.iter().zip(&self.k[0]).map(|(y, f)| f.norm() / scale(*y)));
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span.abs())
    }

    /// Integrates to `t_end` exactly, calling `after_step` after every
    /// accepted step; if it returns `true` the integration stops early.
    pub fn advance<S, F>(&mut self, sys: &S, t_end: f64, mut after_step: F) -> Result<()>
    where
        S: System,
        F: FnMut(&mut Self) -> bool,
    {
        if t_end == self.t {
            return Ok(());
        }
        if self.h == 0.0 {
            self.h = self.initial_step(sys, t_end - self.t);
        }
        if !self.fsal_valid {
            sys.rhs(self.t, &self.y, &mut self.k[0]);
            self.fsal_valid = true;
        }
        let n = self.y.len();
        while self.t < t_end {
            let mut h = self.h.min(t_end - self.t);
            let last = h >= t_end - self.t;
            if h <= 1e-14 * self.t.abs().max(1.0) && !last {
                return Err(DhoError::ToleranceUnachievable { t: self.t, h });
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = self.y[i];
                    for (j, a) in A[s][..s].iter().enumerate() {
                        if *a != 0.0 {
                            acc += self.k[j][i] * (h * a);
                        }
                    }
                    self.tmp[i] = acc;
                }
                sys.rhs(self.t + C[s] * h, &self.tmp, &mut self.k[s]);
            }
            // tmp already holds the fifth-order solution (stage 7 input)
            let mut err = 0.0f64;
            for i in 0..n {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, c) in E.iter().enumerate() {
                    if *c != 0.0 {
                        e += self.k[j][i] * c;
                    }
                }
                let sc = self.atol + self.rtol * self.y[i].norm().max(self.tmp[i].norm());
                let r = (e * h).norm() / sc;
                err = err.max(r);
            }
            if err <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.tmp);
                self.k.swap(0, 6);
                self.accepted += 1;
                let fac = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                if after_step(self) {
                    return Ok(());
                }
                if self.y.len() != n {
                    // the callback grew the system; restart the loop with fresh stages
                    return self.advance(sys, t_end, after_step);
                }
            } else {
                self.rejected += 1;
                h *= (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                self.h = h;
            }
        }
        Ok(())
    }
}

fn rms<I: Iterator<Item = f64>>(it: I) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}
