//! Transition amplitudes `c_{n,l}(t)` between instantaneous energy
//! eigenstates, for a system prepared in level `l` at `t = 0`.
//!
//! Three routes are provided and kept independent of each other:
//!
//! * [`integrate`] / [`integrate_auto`]: adaptive Runge-Kutta on the
//!   differential-difference system coupling `n` to `n +- 2`, in a truncated
//!   Fock basis;
//! * [`closed_form`]: the closed-form amplitudes for `l = 0` and `l = 2`;
//! * [`contour_extract`]: Taylor coefficients of the `l = 0` generating
//!   function, extracted numerically on a circle in the complex `q` plane.
//!
//! # Branches
//!
//! The closed forms contain half-integer powers of `cosh(zeta + xi gamma t/2m)`
//! and of `xi`. Writing `tau = gamma t / 2m`,
//!
//! ```text
//! S = sinh(xi tau) / xi              (real; tau at xi = 0)
//! D = cosh(zeta + xi tau) / xi = cosh(xi tau) + i (2 m alpha / gamma) S
//! ```
//!
//! every amplitude becomes a product of integer powers of `S` and powers of
//! `D` alone, with all `xi` factors cancelling. In the oscillatory regime `D`
//! winds around the origin once per period, so its powers are taken on the
//! branch that is continuous in `t` starting from `D(0) = 1`. That is the
//! branch the Runge-Kutta route follows.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{DhoError, Result};
use crate::grid::GridSpec;
use crate::ode::Dopri5;
use crate::params::{derive_quantum, DerivedParams, PhysParams};

/// Below this `|xi|` the closed forms use their `xi -> 0` limits.
pub const CRITICAL_SWITCH: f64 = 1e-4;
/// Default local tolerance of the Runge-Kutta route.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Largest `1 - sum |c_n|^2` tolerated at a sample.
pub const LEAK_TOLERANCE: f64 = 1e-6;
/// Largest probability tolerated in the top [`EDGE_LEVELS`] entries of a
/// fixed truncated parity chain before the truncation counts as leaking.
pub const EDGE_TOLERANCE: f64 = 1e-6;
/// Edge probability at which the window of integrated levels doubles.
pub const GROW_THRESHOLD: f64 = 1e-24;
pub const EDGE_LEVELS: usize = 8;
/// Truncation headroom above the initial level used by [`integrate_auto`].
pub const INITIAL_HEADROOM: usize = 40;
/// Largest truncation [`integrate_auto`] will grow to.
pub const MAX_N_MAX: usize = 4096;
/// Default radius of the extraction contour.
pub const CONTOUR_RADIUS: f64 = 0.5;
/// `|q|` limit for the series form of the generating function.
pub const SERIES_RADIUS_GUARD: f64 = 1.0;
/// Term cap for the closed-form probability sum.
pub const NORM_MAX_TERMS: usize = 1 << 22;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Truncated amplitudes `c_0..=c_{n_max}` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    pub t: f64,
    pub coeffs: Vec<Complex64>,
    pub n_max: usize,
    pub initial_l: usize,
    /// `1 - sum |c_n|^2`.
    pub leaked_mass: f64,
    /// Probability held by the top levels of the truncation.
    pub edge_mass: f64,
}

impl AmplitudeVector {
    /// `c_n`, zero beyond the truncation.
    pub fn get(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn probability(&self, n: usize) -> f64 {
        self.get(n).norm_sqr()
    }

    /// Builds a vector from explicit coefficients, filling in the diagnostics.
    pub fn from_coeffs(t: f64, coeffs: Vec<Complex64>, initial_l: usize) -> Self {
        let n_max = coeffs.len().saturating_sub(1);
        let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let edge_mass = coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(n, _)| (n + initial_l) % 2 == 0)
            .take(EDGE_LEVELS)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        AmplitudeVector {
            t,
            coeffs,
            n_max,
            initial_l,
            leaked_mass: 1.0 - total,
            edge_mass,
        }
    }
}

/// `Theta_n = -hbar (omega_-^2 / omega)(n + 1/2)`, the dynamical phase rate of level `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTheta {
    pub n: usize,
    pub theta_n: f64,
}

pub fn theta_phase(p: &PhysParams, n: usize) -> PhaseTheta {
    let w = p.omega();
    let g = p.half_rate();
    let alpha = (w * w - g * g) / w;
    PhaseTheta {
        n,
        theta_n: -p.hbar * alpha * (n as f64 + 0.5),
    }
}

/// Time derivative of the amplitudes,
/// `dc_n/dt = (gamma/4m) { -sqrt((n+1)(n+2)) e^{-i(2 alpha t + beta)} c_{n+2}
///                         + sqrt(n(n-1)) e^{i(2 alpha t + beta)} c_{n-2} }`,
/// with the chain closed at both ends.
pub fn coupling_rhs(d: &DerivedParams, c: &[Complex64], t: f64) -> Vec<Complex64> {
    let kappa = d.params.gamma / (4.0 * d.params.m);
    let up = Complex64::from_polar(kappa, 2.0 * d.alpha * t + d.beta);
    let down = -up.conj();
    let len = c.len();
    (0..len)
        .map(|n| {
            let nf = n as f64;
            let mut v = ZERO;
            if n + 2 < len {
                v += down * ((nf + 1.0) * (nf + 2.0)).sqrt() * c[n + 2];
            }
            if n >= 2 {
                v += up * (nf * (nf - 1.0)).sqrt() * c[n - 2];
            }
            v
        })
        .collect()
}

/// The same coupling restricted to one parity class: entry `j` is level
/// `parity + 2 j`.
struct ParityChain {
    parity: usize,
    kappa: f64,
    alpha: f64,
    beta: f64,
}

impl ParityChain {
    /// `sqrt((n+1)(n+2))` for `n = parity + 2 j`: the link between entries `j` and `j + 1`.
    fn link(&self, j: usize) -> f64 {
        let n = (self.parity + 2 * j) as f64;
        ((n + 1.0) * (n + 2.0)).sqrt()
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let up = Complex64::from_polar(self.kappa, 2.0 * self.alpha * t + self.beta);
        let down = -up.conj();
        let len = y.len();
        let mut prev_link = 0.0;
        for j in 0..len {
            let link = self.link(j);
            let mut v = ZERO;
            if j + 1 < len {
                v += down * link * y[j + 1];
            }
            if j > 0 {
                v += up * prev_link * y[j - 1];
            }
            dy[j] = v;
            prev_link = link;
        }
    }
}

fn edge_mass(y: &[Complex64]) -> f64 {
    y.iter().rev().take(EDGE_LEVELS).map(|c| c.norm_sqr()).sum()
}

fn chain_len(l: usize, n_max: usize) -> usize {
    (n_max - l % 2) / 2 + 1
}

fn expand(chain: &[Complex64], parity: usize, n_max: usize) -> Vec<Complex64> {
    let mut full = vec![ZERO; n_max + 1];
    for (j, c) in chain.iter().enumerate() {
        let n = parity + 2 * j;
        if n <= n_max {
            full[n] = *c;
        }
    }
    full
}

fn check_integration_inputs(grid: &GridSpec, tol: f64) -> Result<()> {
    grid.validate()?;
    if grid.min < 0.0 {
        return Err(DhoError::InvalidGrid(format!(
            "time grid must start at t >= 0, got {}",
            grid.min
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(DhoError::InvalidParams(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    Ok(())
}

/// Runs the parity chain containing `l` inside a window of levels that
/// starts at `l + 40` and doubles whenever probability reaches its top
/// entries, up to `cap`. Levels above the window are exactly zero, so the
/// result does not depend on `cap` until the window reaches it. With
/// `pad_to_cap` every sample is reported on `0..=cap`, otherwise on the
/// window in use.
fn run_chain(
    p: &PhysParams,
    l: usize,
    cap: usize,
    pad_to_cap: bool,
    grid: &GridSpec,
    tol: f64,
) -> Result<PartialSolution> {
    let d = derive_quantum(p)?;
    check_integration_inputs(grid, tol)?;
    let parity = l % 2;
    let chain = ParityChain {
        parity,
        kappa: p.gamma / (4.0 * p.m),
        alpha: d.alpha,
        beta: d.beta,
    };
    let mut window = (l + INITIAL_HEADROOM).next_multiple_of(2).min(cap);
    let mut y0 = vec![ZERO; chain_len(l, window)];
    y0[l / 2] = Complex64::new(1.0, 0.0);
    let mut ode = Dopri5::new(0.0, y0, tol);
    let sys = |t: f64, y: &[Complex64], dy: &mut [Complex64]| chain.rhs(t, y, dy);

    let mut out = Vec::with_capacity(grid.count);
    for t in grid.points() {
        let mut failure: Option<DhoError> = None;
        ode.advance(&sys, t, |state| {
            let edge = edge_mass(&state.y);
            if edge <= GROW_THRESHOLD {
                return false;
            }
            if window < cap {
                window = (2 * window).min(cap);
                state.extend(chain_len(l, window));
                return false;
            }
            if edge > EDGE_TOLERANCE {
                let total: f64 = state.y.iter().map(|c| c.norm_sqr()).sum();
                failure = Some(DhoError::TruncationLeak {
                    t: state.t,
                    n_max: cap,
                    leaked: 1.0 - total,
                    edge,
                });
                return true;
            }
            false
        })?;
        if let Some(e) = failure {
            return Ok(PartialSolution {
                samples: out,
                failure: Some(e),
            });
        }
        let n_max = if pad_to_cap { cap } else { window };
        let v = AmplitudeVector::from_coeffs(t, expand(&ode.y, parity, n_max), l);
        if v.leaked_mass.abs() > LEAK_TOLERANCE {
            let e = DhoError::TruncationLeak {
                t,
                n_max,
                leaked: v.leaked_mass,
                edge: v.edge_mass,
            };
            return Ok(PartialSolution {
                samples: out,
                failure: Some(e),
            });
        }
        out.push(v);
    }
    Ok(PartialSolution {
        samples: out,
        failure: None,
    })
}

/// Samples computed before the truncation ran out, and the reason it did.
#[derive(Debug)]
pub struct PartialSolution {
    pub samples: Vec<AmplitudeVector>,
    pub failure: Option<DhoError>,
}

impl PartialSolution {
    pub fn into_result(self) -> Result<Vec<AmplitudeVector>> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self.samples),
        }
    }
}

fn check_n_max(l: usize, n_max: usize) -> Result<()> {
    if n_max % 2 != 0 || n_max < l + 20 {
        return Err(DhoError::InvalidParams(format!(
            "n_max must be even and >= l + 20 = {}, got {n_max}",
            l + 20
        )));
    }
    Ok(())
}

/// Runge-Kutta solution truncated at `n_max`, sampled on `grid`.
/// Fails with `TruncationLeak` once more than [`EDGE_TOLERANCE`] of the
/// probability reaches the top of the truncation.
pub fn integrate(p: &PhysParams, l: usize, n_max: usize, grid: &GridSpec, tol: f64) -> Result<Vec<AmplitudeVector>> {
    check_n_max(l, n_max)?;
    run_chain(p, l, n_max, true, grid, tol)?.into_result()
}

/// Runge-Kutta solution with the truncation raised as far as [`MAX_N_MAX`];
/// samples are reported on the window of levels actually in use.
pub fn integrate_auto(p: &PhysParams, l: usize, grid: &GridSpec, tol: f64) -> Result<Vec<AmplitudeVector>> {
    integrate_auto_partial(p, l, grid, tol, MAX_N_MAX)?.into_result()
}

/// As [`integrate_auto`] with truncation limit `cap`, keeping the samples
/// computed before a `TruncationLeak`. Invalid inputs are still errors.
pub fn integrate_auto_partial(
    p: &PhysParams,
    l: usize,
    grid: &GridSpec,
    tol: f64,
    cap: usize,
) -> Result<PartialSolution> {
    check_n_max(l, cap)?;
    run_chain(p, l, cap, false, grid, tol)
}

/// `S`, `D` and the continuous argument of `D` at time `t`.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    s: f64,
    d_abs: f64,
    d_arg: f64,
}

impl Kernel {
    fn new(s: f64, d: Complex64, winding: f64) -> Self {
        // Re(D e^{-i v}) > 0 for every t, so this argument is continuous.
        let d_arg = winding + (d * Complex64::from_polar(1.0, -winding)).arg();
        Kernel {
            s,
            d_abs: d.norm(),
            d_arg,
        }
    }

    fn critical(d: &DerivedParams, t: f64) -> Self {
        Kernel::new(d.half_rate() * t, Complex64::new(1.0, d.alpha * t), 0.0)
    }

    fn general(d: &DerivedParams, t: f64) -> Option<Self> {
        let xi = d.xi?;
        let a = d.coupling_ratio()?;
        if xi.norm() < CRITICAL_SWITCH {
            return Some(Self::critical(d, t));
        }
        let tau = d.half_rate() * t;
        Some(if xi.re == 0.0 {
            let v = xi.im * tau;
            let s = v.sin() / xi.im;
            Kernel::new(s, Complex64::new(v.cos(), a * s), v)
        } else {
            let u = xi.re * tau;
            let s = u.sinh() / xi.re;
            Kernel::new(s, Complex64::new(u.cosh(), a * s), 0.0)
        })
    }

    /// `S^{k} / |D|^{k}` with the sign of `S` kept.
    fn ratio_pow(&self, k: usize) -> f64 {
        (self.s / self.d_abs).powi(k as i32)
    }
}

/// `(n-1)!! / sqrt(n!)` for even `n`, with `(-1)!! = 1`.
fn double_factorial_ratio(n: usize) -> f64 {
    let mut r = 1.0;
    let mut k = 0;
    while k < n {
        r *= ((k + 1) as f64 / (k + 2) as f64).sqrt();
        k += 2;
    }
    r
}

fn amplitude_l0(d: &DerivedParams, k: &Kernel, n: usize, t: f64) -> Complex64 {
    if n % 2 == 1 {
        return ZERO;
    }
    let nf = n as f64;
    let mag = double_factorial_ratio(n) * k.ratio_pow(n / 2) / k.d_abs.sqrt();
    let phase = (nf + 0.5) * d.alpha * t + nf * d.beta / 2.0 - (nf + 1.0) / 2.0 * k.d_arg;
    Complex64::from_polar(mag, phase)
}

fn amplitude_l2(d: &DerivedParams, k: &Kernel, n: usize, t: f64) -> Complex64 {
    if n % 2 == 1 {
        return ZERO;
    }
    let nf = n as f64;
    let bracket = if n == 0 {
        -k.s / k.d_abs
    } else {
        k.ratio_pow(n / 2 - 1) * (nf - k.s * k.s) / k.d_abs.powi(2)
    };
    let mag = double_factorial_ratio(n) / 2f64.sqrt() * bracket / k.d_abs.sqrt();
    let phase = (nf + 0.5) * d.alpha * t + (nf / 2.0 - 1.0) * d.beta - (nf + 3.0) / 2.0 * k.d_arg;
    Complex64::from_polar(mag, phase)
}

fn undamped(n: usize, l: usize) -> Complex64 {
    if n == l {
        Complex64::new(1.0, 0.0)
    } else {
        ZERO
    }
}

/// Closed-form `c_{n,0}(t)`; switches to the `xi -> 0` form below [`CRITICAL_SWITCH`].
/// At `gamma = 0` no transitions occur and `c_{n,0} = delta_{n0}`.
pub fn closed_form_c_n0(d: &DerivedParams, n: usize, t: f64) -> Complex64 {
    match Kernel::general(d, t) {
        Some(k) => amplitude_l0(d, &k, n, t),
        None => undamped(n, 0),
    }
}

/// Closed-form `c_{n,2}(t)`, with the division by `sinh` distributed so that
/// `t = 0` is a regular point.
pub fn closed_form_c_n2(d: &DerivedParams, n: usize, t: f64) -> Complex64 {
    match Kernel::general(d, t) {
        Some(k) => amplitude_l2(d, &k, n, t),
        None => undamped(n, 2),
    }
}

/// The `xi -> 0` form of `c_{n,0}`, evaluated with `d`'s `alpha` and `beta`
/// whatever `xi` is.
pub fn critical_form_c_n0(d: &DerivedParams, n: usize, t: f64) -> Complex64 {
    amplitude_l0(d, &Kernel::critical(d, t), n, t)
}

/// The `xi -> 0` form of `c_{n,2}`.
pub fn critical_form_c_n2(d: &DerivedParams, n: usize, t: f64) -> Complex64 {
    amplitude_l2(d, &Kernel::critical(d, t), n, t)
}

pub fn closed_form(d: &DerivedParams, l: usize, n: usize, t: f64) -> Result<Complex64> {
    match l {
        0 => Ok(closed_form_c_n0(d, n, t)),
        2 => Ok(closed_form_c_n2(d, n, t)),
        _ => Err(DhoError::Unsupported(format!(
            "closed forms exist for l = 0 and l = 2 only, got l = {l}"
        ))),
    }
}

/// Closed-form amplitudes `c_0..=c_{n_max}` at one time.
pub fn closed_form_vector(d: &DerivedParams, l: usize, n_max: usize, t: f64) -> Result<AmplitudeVector> {
    let coeffs = (0..=n_max)
        .map(|n| closed_form(d, l, n, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(AmplitudeVector::from_coeffs(t, coeffs, l))
}

/// `sum_n |c_{n,l}(t)|^2` over the closed forms, summed until a geometric
/// bound on the remainder drops below `tol`. Returns the sum and the number
/// of levels used.
pub fn closed_form_norm(d: &DerivedParams, l: usize, t: f64, tol: f64) -> Result<(f64, usize)> {
    if l != 0 && l != 2 {
        return Err(DhoError::Unsupported(format!(
            "closed forms exist for l = 0 and l = 2 only, got l = {l}"
        )));
    }
    let Some(k) = Kernel::general(d, t) else {
        return Ok((1.0, l + 1));
    };
    let x = (k.s / k.d_abs).powi(2);
    let s2 = k.s * k.s;
    // p_n = w_n f_n with w_n = r(n)^2 x^{n/2} / |D| and f_n = 1 for l = 0;
    // for l = 2, p_0 = S^2 / 2|D|^3 and p_n = v_n (n - S^2)^2 with
    // v_n = r(n)^2 x^{n/2 - 1} / 2|D|^5 for n >= 2
    let (mut weight, mut sum, mut n) = if l == 0 {
        (1.0 / k.d_abs, 1.0 / k.d_abs, 0usize)
    } else {
        let v2 = 0.25 / k.d_abs.powi(5);
        (v2, s2 / (2.0 * k.d_abs.powi(3)) + v2 * (2.0 - s2).powi(2), 2usize)
    };
    for _ in 0..NORM_MAX_TERMS {
        weight *= x * (n + 1) as f64 / (n + 2) as f64;
        n += 2;
        let nf = n as f64;
        let term = if l == 0 { weight } else { weight * (nf - s2).powi(2) };
        sum += term;
        if weight == 0.0 {
            return Ok((sum, n + 1));
        }
        // ratio bound on every later term
        let rho = if l == 0 {
            x
        } else if nf > s2 {
            x * ((nf + 2.0 - s2) / (nf - s2)).powi(2)
        } else {
            1.0
        };
        if rho < 1.0 && term * rho / (1.0 - rho) <= tol {
            return Ok((sum, n + 1));
        }
    }
    Err(DhoError::SeriesNotConverged { terms: NORM_MAX_TERMS })
}

/// `G_0(q, t) = sqrt(xi) e^{i alpha t/2} cosh(zeta + xi tau)^{-1/2}
///   exp[sinh(xi tau) q^2 / (2 cosh(zeta + xi tau))]`, in the `S`, `D` form.
fn g0(d: &DerivedParams, k: &Kernel, q: Complex64, t: f64) -> Complex64 {
    let d_inv = Complex64::from_polar(1.0 / k.d_abs, -k.d_arg);
    let pre = Complex64::from_polar(1.0 / k.d_abs.sqrt(), 0.5 * d.alpha * t - 0.5 * k.d_arg);
    pre * (q * q * d_inv * (0.5 * k.s)).exp()
}

/// Generating function `G_l(q, t) = sum_n q^n e^{-i n (alpha t + beta/2)} c_{n,l}(t) / sqrt(n!)`.
///
/// `l = 0` is evaluated in closed form; `l = 2` as the series over the
/// closed-form amplitudes, summed until terms fall below `1e-17` relative,
/// and only for `|q| <= 1`.
pub fn generating_function(d: &DerivedParams, l: usize, q: Complex64, t: f64) -> Result<Complex64> {
    match l {
        0 => Ok(match Kernel::general(d, t) {
            Some(k) => g0(d, &k, q, t),
            None => Complex64::new(1.0, 0.0),
        }),
        2 => {
            if q.norm() > SERIES_RADIUS_GUARD {
                return Err(DhoError::SeriesDivergence {
                    q_abs: q.norm(),
                    guard: SERIES_RADIUS_GUARD,
                });
            }
            let rot = Complex64::from_polar(1.0, -(d.alpha * t + d.beta / 2.0));
            let mut sum = ZERO;
            let mut qn = Complex64::new(1.0, 0.0);
            let mut inv_sqrt_fact = 1.0;
            let mut small_run = 0;
            for n in 0..10_000usize {
                if n > 0 {
                    qn *= q * rot;
                    inv_sqrt_fact /= (n as f64).sqrt();
                }
                let term = qn * closed_form_c_n2(d, n, t) * inv_sqrt_fact;
                sum += term;
                if n > 2 && term.norm() <= 1e-17 * sum.norm().max(1e-300) {
                    small_run += 1;
                    if small_run >= 4 {
                        return Ok(sum);
                    }
                } else if n % 2 == 0 {
                    small_run = 0;
                }
            }
            Err(DhoError::SeriesNotConverged { terms: 10_000 })
        }
        _ => Err(DhoError::Unsupported(format!(
            "generating functions exist for l = 0 and l = 2 only, got l = {l}"
        ))),
    }
}

fn contour_samples(d: &DerivedParams, t: f64, radius: f64, points: usize) -> Vec<Complex64> {
    let kernel = Kernel::general(d, t);
    (0..points)
        .map(|j| {
            let q = Complex64::from_polar(radius, 2.0 * PI * j as f64 / points as f64);
            match &kernel {
                Some(k) => g0(d, k, q, t),
                None => Complex64::new(1.0, 0.0),
            }
        })
        .collect()
}

fn check_contour(l: usize, n_max: usize, radius: f64, points: usize) -> Result<()> {
    if l != 0 {
        return Err(DhoError::Unsupported(format!(
            "contour extraction needs the closed-form l = 0 generating function, got l = {l}"
        )));
    }
    if !(radius > 0.0 && radius <= SERIES_RADIUS_GUARD) {
        return Err(DhoError::SeriesDivergence {
            q_abs: radius,
            guard: SERIES_RADIUS_GUARD,
        });
    }
    if !points.is_power_of_two() || points < 4 * n_max + 32 {
        return Err(DhoError::InvalidParams(format!(
            "contour point count must be a power of two >= {}, got {points}",
            4 * n_max + 32
        )));
    }
    Ok(())
}

/// Taylor coefficients `a_0..a_{n_max}` of `G_0` from one FFT of contour samples.
fn taylor_coefficients(d: &DerivedParams, t: f64, radius: f64, points: usize, n_max: usize) -> (Vec<Complex64>, f64) {
    let mut buf = contour_samples(d, t, radius, points);
    let g_max = buf.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let fft = FftPlanner::new().plan_fft_forward(points);
    fft.process(&mut buf);
    let coeffs = buf
        .iter()
        .take(n_max + 1)
        .enumerate()
        .map(|(n, a)| a / points as f64 / radius.powi(n as i32))
        .collect();
    (coeffs, g_max)
}

fn coefficient_to_amplitude(d: &DerivedParams, a: Complex64, n: usize, t: f64) -> Complex64 {
    let sqrt_fact: f64 = (1..=n).map(|k| (k as f64).sqrt()).product();
    a * Complex64::from_polar(sqrt_fact, n as f64 * (d.alpha * t + d.beta / 2.0))
}

fn roundoff_floor(n: usize, radius: f64, g_max: f64) -> f64 {
    let sqrt_fact: f64 = (1..=n).map(|k| (k as f64).sqrt()).product();
    64.0 * f64::EPSILON * g_max * sqrt_fact / radius.powi(n as i32)
}

/// Amplitudes `c_{0..=n_max, 0}(t)` from the Cauchy integral
/// `(n!/2 pi i) oint G_0(q, t) q^{-n-1} dq` on `|q| = radius`, times
/// `e^{i n (alpha t + beta/2)} / sqrt(n!)`, using `points` samples.
///
/// The extraction is repeated with `2 * points` samples; if any amplitude
/// moves by more than `1e-9` beyond the rounding floor of the
/// transform, the result is rejected as `ContourUnderResolved`.
pub fn contour_extract_all(
    d: &DerivedParams,
    l: usize,
    n_max: usize,
    t: f64,
    radius: f64,
    points: usize,
) -> Result<Vec<Complex64>> {
    check_contour(l, n_max, radius, points)?;
    let (a, g_max) = taylor_coefficients(d, t, radius, points, n_max);
    let (b, _) = taylor_coefficients(d, t, radius, 2 * points, n_max);
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let c = coefficient_to_amplitude(d, a[n], n, t);
        let c2 = coefficient_to_amplitude(d, b[n], n, t);
        let delta = (c - c2).norm();
        if delta > 1e-9 + roundoff_floor(n, radius, g_max) {
            return Err(DhoError::ContourUnderResolved { delta });
        }
        out.push(c);
    }
    Ok(out)
}

/// Single amplitude `c_{n,0}(t)` by contour extraction.
pub fn contour_extract(d: &DerivedParams, l: usize, n: usize, t: f64, radius: f64, points: usize) -> Result<Complex64> {
    check_contour(l, n, radius, points)?;
    let direct = |m: usize| {
        let samples = contour_samples(d, t, radius, m);
        let sum: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(j, g)| g * Complex64::from_polar(1.0, -2.0 * PI * (j * n % m) as f64 / m as f64))
            .sum();
        let g_max = samples.iter().map(|g| g.norm()).fold(0.0, f64::max);
        (
            coefficient_to_amplitude(d, sum / m as f64 / radius.powi(n as i32), n, t),
            g_max,
        )
    };
    let (c, g_max) = direct(points);
    let (c2, _) = direct(2 * points);
    let delta = (c - c2).norm();
    if delta > 1e-9 + roundoff_floor(n, radius, g_max) {
        return Err(DhoError::ContourUnderResolved { delta });
    }
    Ok(c)
}

/// Smallest valid contour point count for levels up to `n_max`.
pub fn contour_points(n_max: usize) -> usize {
    (4 * n_max + 32).next_power_of_two()
}
