//! Instantaneous energy spectrum and eigenfunctions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{DhoError, Result};
use crate::params::PhysParams;

/// Levels accepted by [`overlap`] with its default node count.
pub const MAX_OVERLAP_LEVEL: usize = 32;

/// An eigenstate label `|n, t>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenState {
    pub n: usize,
    pub t: f64,
    pub params: PhysParams,
}

impl EigenState {
    pub fn energy(&self) -> f64 {
        energy_eigenvalue(&self.params, self.n, self.t)
    }
}

/// Physicists' Hermite polynomial `H_n(u)` by the three-term recurrence.
pub fn hermite(n: usize, u: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * u;
    for k in 1..n {
        let next = 2.0 * u * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

const RESCALE: f64 = 1e150;

/// Runs the orthonormal Hermite-function recurrence
/// `psi_{k+1} = sqrt(2/(k+1)) u psi_k - sqrt(k/(k+1)) psi_{k-1}` on
/// mantissas, keeping the Gaussian `e^{-u^2/2}` in a separate log scale so
/// that neither factor under- or overflows. Calls `visit(k, mantissa, ln_scale)`.
fn hermite_function_walk<F: FnMut(usize, f64, f64)>(n_max: usize, u: f64, mut visit: F) {
    let mut ln_scale = -0.5 * u * u - 0.25 * PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    visit(0, cur, ln_scale);
    for k in 0..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * u * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            ln_scale += RESCALE.ln();
        }
        visit(k + 1, cur, ln_scale);
    }
}

/// Normalized Hermite function `H_n(u) e^{-u^2/2} / sqrt(2^n n! sqrt(pi))`.
pub fn hermite_function(n: usize, u: f64) -> f64 {
    let mut out = 0.0;
    hermite_function_walk(n, u, |k, m, s| {
        if k == n {
            out = signed_exp(m, s);
        }
    });
    out
}

/// All Hermite functions `0..=n_max` at `u`.
pub fn hermite_functions(n_max: usize, u: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    hermite_function_walk(n_max, u, |_, m, s| out.push(signed_exp(m, s)));
    out
}

fn signed_exp(mantissa: f64, ln_scale: f64) -> f64 {
    if mantissa == 0.0 {
        return 0.0;
    }
    mantissa.signum() * (mantissa.abs().ln() + ln_scale).exp()
}

/// Gauss-Hermite rule for weight `e^{-u^2}`, computed by Newton iteration on
/// the orthonormal recurrence. `scaled_weights[i] = weights[i] e^{u_i^2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(DhoError::QuadratureUnderResolved { nodes: n, required: 1 });
        }
        let mut nodes = vec![0.0; n];
        let mut scaled = vec![0.0; n];
        let nf = n as f64;
        let half = n.div_ceil(2);
        let mut z = 0.0;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            for _ in 0..100 {
                let (p, pp) = Self::eval(n, z);
                let dz = p / pp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            if n % 2 == 1 && i == half - 1 {
                z = 0.0;
            }
            let (_, pp) = Self::eval(n, z);
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            scaled[i] = 2.0 / (pp * pp);
            scaled[n - 1 - i] = scaled[i];
        }
        let weights = nodes.iter().zip(&scaled).map(|(u, w)| w * (-u * u).exp()).collect();
        Ok(GaussHermite {
            nodes,
            weights,
            scaled_weights: scaled,
        })
    }

    /// Hermite function `psi_n(z)` and `sqrt(2n) psi_{n-1}(z)`, which equals
    /// `psi_n'(z)` at a root.
    fn eval(n: usize, z: f64) -> (f64, f64) {
        let fs = hermite_functions(n, z);
        (fs[n], (2.0 * n as f64).sqrt() * fs[n - 1])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int e^{-u^2} f(u) du`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(u, w)| w * f(*u)).sum()
    }
}

/// `E_n(t) = hbar omega e^{-gamma t/m} (n + 1/2)`.
pub fn energy_eigenvalue(p: &PhysParams, n: usize, t: f64) -> f64 {
    p.hbar * p.omega() * (-p.gamma * t / p.m).exp() * (n as f64 + 0.5)
}

/// Eigenfunctions `phi_n(X, t)` at a fixed time, with the time-dependent
/// constants evaluated once.
#[derive(Debug, Clone, Copy)]
pub struct Eigenbasis {
    pub params: PhysParams,
    pub t: f64,
    /// `sqrt(m omega / hbar) e^{gamma t / 2m}`: maps `X` to the Hermite argument.
    pub scale: f64,
    amplitude: f64,
    chirp: f64,
    phase_ratio: Complex64,
}

impl Eigenbasis {
    pub fn new(p: &PhysParams, t: f64) -> Result<Self> {
        p.validate_quantum()?;
        let w = p.omega();
        let g = p.half_rate();
        let base = (p.m * w / p.hbar).sqrt();
        Ok(Eigenbasis {
            params: *p,
            t,
            scale: base * (g * t).exp(),
            amplitude: base.sqrt() * (0.5 * g * t).exp(),
            chirp: p.gamma / (4.0 * p.hbar) * (2.0 * g * t).exp(),
            phase_ratio: Complex64::new(w, -g) / Complex64::new(w, g),
        })
    }

    /// `((omega - i gamma/2m)/(omega + i gamma/2m))^{n/4}`, principal branch.
    pub fn phase_factor(&self, n: usize) -> Complex64 {
        if n == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            self.phase_ratio.powf(n as f64 / 4.0)
        }
    }

    fn chirp_factor(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.chirp * x * x)
    }

    pub fn eval(&self, n: usize, x: f64) -> Complex64 {
        self.phase_factor(n) * self.chirp_factor(x) * (self.amplitude * hermite_function(n, self.scale * x))
    }

    /// `phi_0..=phi_{n_max}` at one point.
    pub fn eval_all(&self, n_max: usize, x: f64) -> Vec<Complex64> {
        let chirp = self.chirp_factor(x);
        hermite_functions(n_max, self.scale * x)
            .into_iter()
            .enumerate()
            .map(|(n, h)| self.phase_factor(n) * chirp * (self.amplitude * h))
            .collect()
    }

    /// Closed-form variance of `X` in eigenstate `n`.
    pub fn variance(&self, n: usize) -> f64 {
        (n as f64 + 0.5) / (self.scale * self.scale)
    }
}

/// `phi_n(X, t)` exactly as the closed form reads.
pub fn eigenfunction(p: &PhysParams, n: usize, x: f64, t: f64) -> Result<Complex64> {
    Ok(Eigenbasis::new(p, t)?.eval(n, x))
}

/// Default Gauss-Hermite node count for an overlap between `n` and `n2`.
pub fn overlap_nodes(n: usize, n2: usize) -> usize {
    2 * n.max(n2) + 40
}

/// Smallest node count accepted by [`overlap_with_nodes`].
pub fn overlap_node_bound(n: usize, n2: usize) -> usize {
    n + n2 + 20
}

/// `int phi_n^* phi_{n2} dX` by Gauss-Hermite quadrature in the scaled variable.
pub fn overlap(p: &PhysParams, n: usize, n2: usize, t: f64) -> Result<Complex64> {
    if n.max(n2) > MAX_OVERLAP_LEVEL {
        return Err(DhoError::InvalidParams(format!(
            "overlap levels must be <= {MAX_OVERLAP_LEVEL}, got ({n}, {n2})"
        )));
    }
    overlap_with_nodes(p, n, n2, t, overlap_nodes(n, n2))
}

pub fn overlap_with_nodes(p: &PhysParams, n: usize, n2: usize, t: f64, nodes: usize) -> Result<Complex64> {
    let required = overlap_node_bound(n, n2);
    if nodes < required {
        return Err(DhoError::QuadratureUnderResolved { nodes, required });
    }
    let basis = Eigenbasis::new(p, t)?;
    let rule = GaussHermite::new(nodes)?;
    let f = |u: f64| {
        let x = u / basis.scale;
        basis.eval(n, x).conj() * basis.eval(n2, x)
    };
    // nodes come in +-u pairs; summing each pair first makes parity zeros exact
    let len = rule.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..len / 2 {
        let u = rule.nodes[i];
        acc += (f(u) + f(-u)) * rule.scaled_weights[i];
    }
    if len % 2 == 1 {
        acc += f(0.0) * rule.scaled_weights[len / 2];
    }
    Ok(acc / basis.scale)
}

/// Variance of `X` under `|phi_n(X, t)|^2`, by quadrature.
pub fn density_variance(p: &PhysParams, n: usize, t: f64) -> Result<f64> {
    let basis = Eigenbasis::new(p, t)?;
    let rule = GaussHermite::new(n + 20)?;
    let mut norm = 0.0;
    let mut first = 0.0;
    let mut second = 0.0;
    for (u, w) in rule.nodes.iter().zip(&rule.scaled_weights) {
        let x = u / basis.scale;
        let d = basis.eval(n, x).norm_sqr() * w / basis.scale;
        norm += d;
        first += d * x;
        second += d * x * x;
    }
    let mean = first / norm;
    Ok(second / norm - mean * mean)
}

/// `(hbar / m omega) (n + 1/2) e^{-gamma t / m}`.
pub fn density_variance_closed(p: &PhysParams, n: usize, t: f64) -> f64 {
    p.hbar / (p.m * p.omega()) * (n as f64 + 0.5) * (-p.gamma * t / p.m).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig1() -> PhysParams {
        PhysParams::with_omega(10.0, 1.0, 0.1, 1.0).unwrap()
    }

    /// Explicit sum `n! sum_k (-1)^k (2u)^{n-2k} / (k! (n-2k)!)`.
    fn hermite_series(n: usize, u: f64) -> f64 {
        let fact = |k: usize| (1..=k).fold(1.0, |a, b| a * b as f64);
        (0..=n / 2)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * fact(n) / (fact(k) * fact(n - 2 * k)) * (2.0 * u).powi((n - 2 * k) as i32)
            })
            .sum()
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite(0, 0.7), 1.0);
        assert_eq!(hermite(1, 0.7), 1.4);
        assert_eq!(hermite(2, 3.0), 34.0);
    }

    #[test]
    fn hermite_matches_series() {
        let s = hermite_series(10, 1.5);
        assert_relative_eq!(hermite(10, 1.5), s, max_relative = 1e-13);
        for n in 0..20 {
            for &u in &[-2.3, -0.4, 0.0, 0.9, 3.1] {
                let s = hermite_series(n, u);
                assert!((hermite(n, u) - s).abs() <= 1e-11 * s.abs().max(1.0), "n={n} u={u}");
            }
        }
    }

    #[test]
    fn hermite_function_matches_polynomial_form() {
        let fact = |k: usize| (1..=k).fold(1.0, |a, b| a * b as f64);
        for n in 0..25 {
            for &u in &[-4.0, -1.2, 0.3, 2.5, 6.0] {
                let direct = hermite(n, u) * (-u * u / 2.0).exp() / (2f64.powi(n as i32) * fact(n) * PI.sqrt()).sqrt();
                assert!((hermite_function(n, u) - direct).abs() <= 1e-12 * direct.abs().max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn hermite_function_survives_large_arguments() {
        // e^{-u^2/2} alone underflows at u = 40; the order-1000 function near
        // its turning point sqrt(2001) is still of order 0.1.
        let v = hermite_function(1000, 40.0);
        assert!(v.is_finite() && v != 0.0);
        assert!(v.abs() < 1.0);
        assert_eq!(hermite_function(0, 40.0), 0.0);
        let all = hermite_functions(1000, 40.0);
        assert_eq!(all[1000], v);
    }

    #[test]
    fn gauss_hermite_moments() {
        let rule = GaussHermite::new(30).unwrap();
        assert_relative_eq!(rule.integrate(|_| 1.0), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(rule.integrate(|u| u * u), PI.sqrt() / 2.0, max_relative = 1e-13);
        assert_relative_eq!(
            rule.integrate(|u| u.powi(8)),
            105.0 * PI.sqrt() / 16.0,
            max_relative = 1e-12
        );
        assert!(rule.integrate(|u| u.powi(5)).abs() < 1e-12);
        assert!(rule.nodes.windows(2).all(|w| w[0] > w[1]));
        let odd = GaussHermite::new(7).unwrap();
        assert_eq!(odd.nodes[3], 0.0);
    }

    #[test]
    fn eigenvalues() {
        let p = PhysParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(energy_eigenvalue(&p, 0, 17.0), 0.5);
        let q = PhysParams::new(1.0, 0.1, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            energy_eigenvalue(&q, 2, 10.0),
            2.5 * (-1.0f64).exp(),
            max_relative = 1e-15
        );
        assert!((energy_eigenvalue(&q, 2, 10.0) - 0.9197).abs() < 1e-4);
        for n in 0..10 {
            assert_relative_eq!(
                energy_eigenvalue(&q, n, 7.0) / energy_eigenvalue(&q, n, 0.0),
                (-0.7f64).exp(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn undamped_eigenfunctions_are_textbook() {
        let p = PhysParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let fact = |k: usize| (1..=k).fold(1.0, |a, b| a * b as f64);
        for n in 0..8 {
            for i in 0..=200 {
                let x = -10.0 + 0.1 * i as f64;
                let sho =
                    hermite(n, x) * (-x * x / 2.0).exp() / (2f64.powi(n as i32) * fact(n)).sqrt() * PI.powf(-0.25);
                let phi = eigenfunction(&p, n, x, 3.0).unwrap();
                assert!((phi - sho).norm() <= 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn odd_states_vanish_at_origin() {
        let p = fig1();
        for &t in &[0.0, 10.0, 250.0] {
            assert_eq!(eigenfunction(&p, 1, 0.0, t).unwrap().norm(), 0.0);
            assert_eq!(eigenfunction(&p, 5, 0.0, t).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn ground_state_sharpens() {
        let p = fig1();
        let peak0 = eigenfunction(&p, 0, 0.0, 0.0).unwrap().norm_sqr();
        let peak250 = eigenfunction(&p, 0, 0.0, 250.0).unwrap().norm_sqr();
        assert!(peak250 > 3.0 * peak0);
        assert_relative_eq!(peak250 / peak0, (0.1 * 250.0 / 20.0f64).exp(), max_relative = 1e-12);
        // away from the origin it collapses
        assert!(
            eigenfunction(&p, 0, 0.5, 250.0).unwrap().norm_sqr()
                < 0.1 * eigenfunction(&p, 0, 0.5, 0.0).unwrap().norm_sqr()
        );
    }

    #[test]
    fn overlaps() {
        let p = fig1();
        assert!((overlap(&p, 0, 0, 0.0).unwrap() - 1.0).norm() < 1e-12);
        assert!((overlap(&p, 0, 0, 250.0).unwrap() - 1.0).norm() < 1e-12);
        assert_eq!(overlap(&p, 0, 1, 13.0).unwrap().norm(), 0.0);
        assert!((overlap(&p, 2, 2, 250.0).unwrap() - 1.0).norm() < 1e-10);
        assert!((overlap(&p, 32, 32, 250.0).unwrap() - 1.0).norm() < 1e-10);
        assert!(overlap(&p, 33, 0, 0.0).is_err());
        assert!(matches!(
            overlap_with_nodes(&p, 4, 4, 0.0, 27),
            Err(DhoError::QuadratureUnderResolved {
                nodes: 27,
                required: 28
            })
        ));
        assert!(matches!(
            eigenfunction(&PhysParams::new(1.0, 2.5, 1.0, 1.0).unwrap(), 0, 0.0, 0.0),
            Err(DhoError::Overdamped { .. })
        ));
    }

    #[test]
    fn variances() {
        let p0 = PhysParams::new(2.0, 0.0, 8.0, 1.0).unwrap();
        assert_relative_eq!(
            density_variance(&p0, 0, 0.0).unwrap(),
            1.0 / (2.0 * 2.0 * 2.0),
            max_relative = 1e-12
        );
        let p = fig1();
        let v = density_variance(&p, 2, 250.0).unwrap();
        assert_relative_eq!(v, 0.25 * (-2.5f64).exp(), max_relative = 1e-10);
        assert!((v - 0.020521).abs() < 1e-6);
        for n in 0..12 {
            let a = density_variance(&p, n, 40.0).unwrap() / density_variance(&p, n, 0.0).unwrap();
            assert_relative_eq!(a, (-0.4f64).exp(), max_relative = 1e-10);
        }
    }

    /// Half-width of the symmetric interval holding `mass` of `|phi_n|^2`, by bisection
    /// on a fine trapezoid cumulative.
    fn half_width(p: &PhysParams, n: usize, t: f64, mass: f64) -> f64 {
        let basis = Eigenbasis::new(p, t).unwrap();
        let sigma = basis.variance(n).sqrt();
        let cover = |a: f64| {
            let steps = 4000;
            let h = a / steps as f64;
            let vals: Vec<f64> = (0..=steps).map(|i| basis.eval(n, i as f64 * h).norm_sqr()).collect();
            2.0 * crate::grid::trapezoid(&vals, h)
        };
        let (mut lo, mut hi) = (0.0, 20.0 * sigma);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if cover(mid) < mass {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn probability_concentrates_at_damping_rate() {
        let p = fig1();
        for n in [0, 1, 3] {
            let a = half_width(&p, n, 10.0, 0.99);
            let b = half_width(&p, n, 30.0, 0.99);
            assert_relative_eq!(b / a, (-0.1 * 20.0 / 20.0f64).exp(), max_relative = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn parity(n in 0usize..30, x in -5.0f64..5.0, t in 0.0f64..300.0) {
            let b = Eigenbasis::new(&fig1(), t).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(b.eval(n, -x), b.eval(n, x) * sign);
        }

        #[test]
        fn equal_spacing(t in 0.0f64..100.0, gamma in 0.0f64..1.9) {
            let p = PhysParams::new(1.0, gamma, 1.0, 1.0).unwrap();
            let d0 = energy_eigenvalue(&p, 1, t) - energy_eigenvalue(&p, 0, t);
            for n in 1..40 {
                let d = energy_eigenvalue(&p, n + 1, t) - energy_eigenvalue(&p, n, t);
                prop_assert!((d - d0).abs() <= 1e-13 * d0.abs().max(f64::MIN_POSITIVE) + 1e-14 * energy_eigenvalue(&p, n, t));
            }
        }

        #[test]
        fn eval_all_matches_eval(x in -4.0f64..4.0, t in 0.0f64..100.0) {
            let b = Eigenbasis::new(&fig1(), t).unwrap();
            let all = b.eval_all(12, x);
            for (n, v) in all.iter().enumerate() {
                prop_assert_eq!(*v, b.eval(n, x));
            }
        }
    }
}
