//! Classical dynamics of the constrained doubled system.
//!
//! The Euler-Lagrange equations reduce to a damped oscillator `x`, an
//! amplified partner `y`, and two exponentials `rho`, `sigma` tied together
//! by `rho x = sigma y`. The Lagrange multiplier vanishes identically and is
//! not represented.

use std::f64::consts::PI;

use crate::error::{DhoError, Result};
use crate::grid::GridSpec;
use crate::params::PhysParams;

/// Integer multiples of pi are accepted within this tolerance on `(chi - phi) / pi`.
const PHASE_TOLERANCE: f64 = 1e-12;

/// Initial data for the analytic solution.
///
/// `y0` and `chi` are normally fixed by the constraint (`chi = phi`,
/// `y0 = rho0 x0 / sigma0`); supplying them explicitly makes
/// [`solve_trajectory`] check them against it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub x0: f64,
    pub phi: f64,
    pub rho0: f64,
    pub sigma0: f64,
    pub y0: Option<f64>,
    pub chi: Option<f64>,
}

impl InitialData {
    /// `theta(0) = 0`: `rho0 = sigma0 = sqrt(n0)`.
    pub fn new(x0: f64, phi: f64, n0: f64) -> Self {
        Self::with_theta0(x0, phi, n0, 0.0)
    }

    pub fn with_theta0(x0: f64, phi: f64, n0: f64, theta0: f64) -> Self {
        let r = n0.sqrt();
        InitialData {
            x0,
            phi,
            rho0: r * theta0.exp(),
            sigma0: r * (-theta0).exp(),
            y0: None,
            chi: None,
        }
    }

    pub fn from_rho_sigma(x0: f64, phi: f64, rho0: f64, sigma0: f64) -> Self {
        InitialData {
            x0,
            phi,
            rho0,
            sigma0,
            y0: None,
            chi: None,
        }
    }

    /// Pins the amplified branch explicitly.
    pub fn with_partner(mut self, y0: f64, chi: f64) -> Self {
        self.y0 = Some(y0);
        self.chi = Some(chi);
        self
    }

    pub fn theta0(&self) -> f64 {
        0.5 * (self.rho0 / self.sigma0).ln()
    }

    pub fn n0(&self) -> f64 {
        self.rho0 * self.sigma0
    }
}

/// Checks the phase-matching consequence of the constraint: `chi - phi` must
/// be `n pi` with `rho0 x0 = (-1)^n sigma0 y0`. With `x0, y0 > 0` and
/// `rho0 sigma0 > 0` only even `n` survives. Returns `n`.
pub fn check_phase_matching(x0: f64, y0: f64, phi: f64, chi: f64, rho0: f64, sigma0: f64) -> Result<i64> {
    if !(x0 > 0.0 && y0 > 0.0) {
        return Err(DhoError::ConstraintInfeasible(format!(
            "amplitudes must be positive, got x0 = {x0}, y0 = {y0}"
        )));
    }
    if rho0 * sigma0 <= 0.0 {
        return Err(DhoError::ConstraintInfeasible(format!(
            "rho0 * sigma0 = {} must be > 0",
            rho0 * sigma0
        )));
    }
    let turns = (chi - phi) / PI;
    let n = turns.round();
    if (turns - n).abs() > PHASE_TOLERANCE * turns.abs().max(1.0) {
        return Err(DhoError::ConstraintInfeasible(format!(
            "chi - phi = {} is not a multiple of pi",
            chi - phi
        )));
    }
    let n = n as i64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let lhs = rho0 * x0;
    let rhs = sign * sigma0 * y0;
    if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()) {
        return Err(DhoError::ConstraintInfeasible(format!(
            "rho0 x0 = {lhs} but (-1)^{n} sigma0 y0 = {rhs}; chi - phi = {n} pi"
        )));
    }
    Ok(n)
}

/// One sample of the classical solution.
///
/// `big_x = sqrt(2) x`; `p` is the canonical momentum conjugate to it,
/// `p = m e^{2 theta} (dX/dt + gamma X / 2m)`; `theta = ln(rho/sigma)/2`;
/// `n = rho sigma`. `h`, `e` are the total and mechanical energies and
/// `q = h - e` the non-mechanical share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub sigma: f64,
    pub big_x: f64,
    pub p: f64,
    pub theta: f64,
    pub n: f64,
    pub h: f64,
    pub e: f64,
    pub q: f64,
}

impl ClassicalState {
    /// `rho x - sigma y`.
    pub fn constraint_residual(&self) -> f64 {
        self.rho * self.x - self.sigma * self.y
    }
}

/// Total energy `e^{-2 theta} P^2 / 2m + m omega_-^2 e^{2 theta} X^2 / 2 + gamma N / 2m`.
pub fn hamiltonian(s: &ClassicalState, p: &PhysParams) -> f64 {
    let w = p.omega();
    let g = p.half_rate();
    let om2 = w * w - g * g;
    let e2t = (2.0 * s.theta).exp();
    s.p * s.p / (2.0 * p.m * e2t) + 0.5 * p.m * om2 * e2t * s.big_x * s.big_x + p.gamma * s.n / (2.0 * p.m)
}

/// Mechanical energy `(e^{-2 theta} P - gamma X / 2)^2 / 2m + m omega^2 X^2 / 2`.
pub fn mechanical_energy(s: &ClassicalState, p: &PhysParams) -> f64 {
    let w = p.omega();
    let k = (-2.0 * s.theta).exp() * s.p - 0.5 * p.gamma * s.big_x;
    k * k / (2.0 * p.m) + 0.5 * p.m * w * w * s.big_x * s.big_x
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalTrajectory {
    pub params: PhysParams,
    pub initial: InitialData,
    pub samples: Vec<ClassicalState>,
}

/// Closed-form solution of the damped oscillator for fixed data.
#[derive(Debug, Clone, Copy)]
struct Motion {
    x0: f64,
    phi: f64,
    omega_minus: f64,
    g: f64,
}

impl Motion {
    fn x(&self, t: f64) -> f64 {
        self.x0 * (-self.g * t).exp() * (self.omega_minus * t + self.phi).sin()
    }

    fn xdot(&self, t: f64) -> f64 {
        let arg = self.omega_minus * t + self.phi;
        self.x0 * (-self.g * t).exp() * (self.omega_minus * arg.cos() - self.g * arg.sin())
    }
}

fn validate_initial(p: &PhysParams, init: &InitialData) -> Result<()> {
    p.validate()?;
    if p.gamma >= 2.0 * p.m * p.omega() {
        return Err(DhoError::Overdamped {
            gamma: p.gamma,
            bound: 2.0 * p.m * p.omega(),
        });
    }
    if !(init.x0 > 0.0 && init.x0.is_finite()) {
        return Err(DhoError::InvalidParams(format!("x0 must be > 0, got {}", init.x0)));
    }
    if !(init.rho0 * init.sigma0 > 0.0) {
        return Err(DhoError::ConstraintInfeasible(format!(
            "rho0 * sigma0 = {} must be > 0",
            init.rho0 * init.sigma0
        )));
    }
    let y0 = init.y0.unwrap_or(init.rho0 * init.x0 / init.sigma0);
    let chi = init.chi.unwrap_or(init.phi);
    check_phase_matching(init.x0, y0, init.phi, chi, init.rho0, init.sigma0)?;
    Ok(())
}

fn state_at(p: &PhysParams, init: &InitialData, motion: &Motion, t: f64) -> ClassicalState {
    let g = motion.g;
    let x = motion.x(t);
    let y0 = init.rho0 * init.x0 / init.sigma0;
    // chi = phi (mod 2 pi), so y shares the oscillation of x.
    let y = y0 * (g * t).exp() * (motion.omega_minus * t + init.phi).sin();
    let rho = init.rho0 * (g * t).exp();
    let sigma = init.sigma0 * (-g * t).exp();
    let theta = init.theta0() + g * t;
    let big_x = std::f64::consts::SQRT_2 * x;
    let big_xdot = std::f64::consts::SQRT_2 * motion.xdot(t);
    let momentum = p.m * (2.0 * theta).exp() * (big_xdot + g * big_x);
    let mut s = ClassicalState {
        t,
        x,
        y,
        rho,
        sigma,
        big_x,
        p: momentum,
        theta,
        n: init.rho0 * init.sigma0,
        h: 0.0,
        e: 0.0,
        q: 0.0,
    };
    s.h = hamiltonian(&s, p);
    s.e = mechanical_energy(&s, p);
    s.q = s.h - s.e;
    s
}

fn motion(p: &PhysParams, init: &InitialData) -> Motion {
    let w = p.omega();
    let g = p.half_rate();
    Motion {
        x0: init.x0,
        phi: init.phi,
        omega_minus: (w * w - g * g).sqrt(),
        g,
    }
}

/// Evaluates the analytic solution on `grid`.
pub fn solve_trajectory(p: &PhysParams, init: &InitialData, grid: &GridSpec) -> Result<ClassicalTrajectory> {
    grid.validate()?;
    validate_initial(p, init)?;
    let mo = motion(p, init);
    let samples = grid.points().into_iter().map(|t| state_at(p, init, &mo, t)).collect();
    Ok(ClassicalTrajectory {
        params: *p,
        initial: *init,
        samples,
    })
}

/// Heat bookkeeping along a trajectory.
///
/// `generated[i] = gamma * int_0^{t_i} (dX/dt)^2 dt` by composite Simpson;
/// `offset = H - E(t_0)` is the heat content already present at the first
/// sample (at least `gamma N / 2m`). The energy ledger reads
/// `H = E(t) + offset + generated(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatLedger {
    pub generated: Vec<f64>,
    pub offset: f64,
    pub max_residual: f64,
}

/// Simpson sub-steps per oscillation period.
const SIMPSON_STEPS_PER_PERIOD: f64 = 1000.0;

pub fn heat(traj: &ClassicalTrajectory) -> HeatLedger {
    let p = &traj.params;
    let mo = motion(p, &traj.initial);
    let integrand = |t: f64| {
        let v = std::f64::consts::SQRT_2 * mo.xdot(t);
        p.gamma * v * v
    };
    let period = 2.0 * PI / mo.omega_minus;
    let max_h = period / SIMPSON_STEPS_PER_PERIOD;

    let mut generated = Vec::with_capacity(traj.samples.len());
    let mut acc = 0.0;
    let mut prev: Option<f64> = None;
    for s in &traj.samples {
        if let Some(t0) = prev {
            acc += simpson(&integrand, t0, s.t, max_h);
        }
        generated.push(acc);
        prev = Some(s.t);
    }
    let offset = traj.samples.first().map(|s| s.h - s.e).unwrap_or(0.0);
    let max_residual = traj
        .samples
        .iter()
        .zip(&generated)
        .map(|(s, q)| (s.h - s.e - offset - q).abs())
        .fold(0.0, f64::max);
    HeatLedger {
        generated,
        offset,
        max_residual,
    }
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, max_h: f64) -> f64 {
    let mut n = ((b - a) / max_h).ceil().max(2.0) as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// State of the reduced Euler-Lagrange system: `(x, x', y, y', rho, sigma)`.
pub type LagrangeState = [f64; 6];

fn lagrange_rhs(p: &PhysParams, s: &LagrangeState) -> LagrangeState {
    let [x, vx, y, vy, rho, sigma] = *s;
    let m = p.m;
    [
        vx,
        -(p.gamma * vx + p.k * x) / m,
        vy,
        (p.gamma * vy - p.k * y) / m,
        p.gamma * rho / (2.0 * m),
        -p.gamma * sigma / (2.0 * m),
    ]
}

/// Fixed-step classical RK4 on the Euler-Lagrange equations. Returns the
/// state after every step, starting with the initial one. Used to check the
/// analytic solution.
pub fn integrate_lagrange(p: &PhysParams, init: &InitialData, t_end: f64, h: f64) -> Result<Vec<(f64, LagrangeState)>> {
    validate_initial(p, init)?;
    let mo = motion(p, init);
    let y0 = init.rho0 * init.x0 / init.sigma0;
    let g = mo.g;
    let mut s: LagrangeState = [
        mo.x(0.0),
        mo.xdot(0.0),
        y0 * init.phi.sin(),
        y0 * (mo.omega_minus * init.phi.cos() + g * init.phi.sin()),
        init.rho0,
        init.sigma0,
    ];
    let steps = (t_end / h).round() as usize;
    let h = t_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, s));
    let axpy = |a: &LagrangeState, k: &LagrangeState, c: f64| {
        let mut r = *a;
        r.iter_mut().zip(k).for_each(|(r, k)| *r += c * k);
        r
    };
    for i in 0..steps {
        let k1 = lagrange_rhs(p, &s);
        let k2 = lagrange_rhs(p, &axpy(&s, &k1, h / 2.0));
        let k3 = lagrange_rhs(p, &axpy(&s, &k2, h / 2.0));
        let k4 = lagrange_rhs(p, &axpy(&s, &k3, h));
        for j in 0..6 {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(((i + 1) as f64 * h, s));
    }
    Ok(out)
}
