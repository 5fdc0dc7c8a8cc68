//! The Schrodinger-picture wave function
//! `psi(X, t) = sum_n c_n(t) e^{i Theta_n t / hbar} phi_n(X, t)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DhoError, Result};
use crate::grid::{trapezoid, GridSpec};
use crate::params::PhysParams;
use crate::spectrum::Eigenbasis;
use crate::transitions::{theta_phase, AmplitudeVector, PhaseTheta, LEAK_TOLERANCE};

/// Half-width of the default grid in units of the ground-state width.
pub const GRID_HALF_WIDTHS: f64 = 12.0;
pub const GRID_POINTS: usize = 4096;

/// `false` when `DHO_NO_PARALLEL=1` asks for sequential evaluation.
pub fn parallel_enabled() -> bool {
    std::env::var("DHO_NO_PARALLEL").map(|v| v != "1").unwrap_or(true)
}

#[derive(Debug, Clone)]
pub struct WavePacket {
    pub params: PhysParams,
    pub t: f64,
    pub amplitudes: AmplitudeVector,
    pub phases: Vec<PhaseTheta>,
    pub x_grid: GridSpec,
    pub values: Vec<Complex64>,
}

/// Symmetric grid of half-width `12 sqrt(var phi_0)` at time `t`, 4096 points.
pub fn default_grid(p: &PhysParams, t: f64) -> Result<GridSpec> {
    let sigma = Eigenbasis::new(p, t)?.variance(0).sqrt();
    GridSpec::spatial(-GRID_HALF_WIDTHS * sigma, GRID_HALF_WIDTHS * sigma, GRID_POINTS)
}

/// Builds `psi` on `x_grid` from amplitudes at time `t`.
pub fn assemble(p: &PhysParams, amplitudes: &AmplitudeVector, x_grid: &GridSpec, t: f64) -> Result<WavePacket> {
    assemble_shifted(p, amplitudes, x_grid, t, 0.0)
}

/// As [`assemble`] with every `Theta_n` shifted by `shift`.
pub fn assemble_shifted(
    p: &PhysParams,
    amplitudes: &AmplitudeVector,
    x_grid: &GridSpec,
    t: f64,
    shift: f64,
) -> Result<WavePacket> {
    x_grid.validate()?;
    if amplitudes.leaked_mass > LEAK_TOLERANCE {
        return Err(DhoError::TruncationLeak {
            t: amplitudes.t,
            n_max: amplitudes.n_max,
            leaked: amplitudes.leaked_mass,
            edge: amplitudes.edge_mass,
        });
    }
    let basis = Eigenbasis::new(p, t)?;
    let top = amplitudes
        .coeffs
        .iter()
        .rposition(|c| *c != Complex64::new(0.0, 0.0))
        .unwrap_or(0);
    let phases: Vec<PhaseTheta> = (0..=top)
        .map(|n| {
            let mut th = theta_phase(p, n);
            th.theta_n += shift;
            th
        })
        .collect();
    let weights: Vec<Complex64> = phases
        .iter()
        .map(|th| amplitudes.get(th.n) * Complex64::from_polar(1.0, th.theta_n * t / p.hbar))
        .collect();
    let eval = |x: f64| -> Complex64 {
        basis
            .eval_all(top, x)
            .iter()
            .zip(&weights)
            .filter(|(_, w)| w.norm() != 0.0)
            .map(|(phi, w)| w * phi)
            .sum()
    };
    let xs = x_grid.points();
    let values: Vec<Complex64> = if parallel_enabled() {
        xs.par_iter().map(|&x| eval(x)).collect()
    } else {
        xs.iter().map(|&x| eval(x)).collect()
    };
    Ok(WavePacket {
        params: *p,
        t,
        amplitudes: amplitudes.clone(),
        phases,
        x_grid: *x_grid,
        values,
    })
}

impl WavePacket {
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `int |psi|^2 dX` by the trapezoid rule.
    pub fn norm(&self) -> f64 {
        trapezoid(&self.density(), self.x_grid.step())
    }

    fn moment(&self, k: i32) -> f64 {
        let xs = self.x_grid.points();
        let f: Vec<f64> = self.density().iter().zip(&xs).map(|(d, x)| d * x.powi(k)).collect();
        trapezoid(&f, self.x_grid.step())
    }

    pub fn mean(&self) -> f64 {
        self.moment(1) / self.norm()
    }

    /// Variance of `X` under `|psi|^2`.
    pub fn dispersion(&self) -> f64 {
        let n = self.norm();
        let mean = self.moment(1) / n;
        self.moment(2) / n - mean * mean
    }
}

pub fn dispersion(w: &WavePacket) -> f64 {
    w.dispersion()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive;
    use crate::transitions::{closed_form_vector, integrate_auto, DEFAULT_TOL};
    use approx::assert_relative_eq;

    fn delta(n_max: usize, l: usize, t: f64) -> AmplitudeVector {
        let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
        c[l] = Complex64::new(1.0, 0.0);
        AmplitudeVector::from_coeffs(t, c, l)
    }

    #[test]
    fn undamped_ground_state() {
        let p = PhysParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let t = 2.7;
        let grid = default_grid(&p, t).unwrap();
        let w = assemble(&p, &delta(20, 0, t), &grid, t).unwrap();
        for (x, v) in grid.points().iter().zip(&w.values).step_by(97) {
            let sho = (-x * x / 2.0).exp() / std::f64::consts::PI.powf(0.25);
            let expect = Complex64::from_polar(sho, -t / 2.0);
            assert!((v - expect).norm() < 1e-14);
        }
        assert_relative_eq!(w.dispersion(), 0.5, max_relative = 1e-10);
    }

    #[test]
    fn initial_packet_is_initial_eigenfunction() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let grid = default_grid(&p, 0.0).unwrap();
        for l in [0usize, 2] {
            let w = assemble(&p, &delta(30, l, 0.0), &grid, 0.0).unwrap();
            let basis = Eigenbasis::new(&p, 0.0).unwrap();
            for (x, v) in grid.points().iter().zip(&w.values).step_by(131) {
                assert!((v - basis.eval(l, *x)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn damped_packet_norm() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let grid = GridSpec::temporal(0.0, 5.0, 2).unwrap();
        let amps = integrate_auto(&p, 0, &grid, DEFAULT_TOL).unwrap();
        let last = amps.last().unwrap();
        let w = assemble(&p, last, &default_grid(&p, 5.0).unwrap(), 5.0).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-8);
        assert!((w.norm() - last.norm_sqr()).abs() < 1e-8);
    }

    #[test]
    fn global_phase_shift_leaves_density() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let d = derive(&p).unwrap();
        let amps = closed_form_vector(&d, 0, 60, 3.0).unwrap();
        let grid = default_grid(&p, 3.0).unwrap();
        let a = assemble(&p, &amps, &grid, 3.0).unwrap();
        let b = assemble_shifted(&p, &amps, &grid, 3.0, 0.731).unwrap();
        for (x, y) in a.density().iter().zip(b.density()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn dispersion_shrinks() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let d = derive(&p).unwrap();
        let w0 = assemble(
            &p,
            &closed_form_vector(&d, 0, 60, 0.0).unwrap(),
            &default_grid(&p, 0.0).unwrap(),
            0.0,
        )
        .unwrap();
        let w10 = assemble(
            &p,
            &closed_form_vector(&d, 0, 200, 10.0).unwrap(),
            &default_grid(&p, 10.0).unwrap(),
            10.0,
        )
        .unwrap();
        assert!(w10.dispersion() < w0.dispersion());
    }

    #[test]
    fn leaking_amplitudes_are_rejected() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let mut a = delta(20, 0, 0.0);
        a.coeffs[0] = Complex64::new(0.9, 0.0);
        let a = AmplitudeVector::from_coeffs(0.0, a.coeffs, 0);
        assert!(matches!(
            assemble(&p, &a, &default_grid(&p, 0.0).unwrap(), 0.0),
            Err(DhoError::TruncationLeak { .. })
        ));
    }

    #[test]
    fn matches_direct_sum() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let d = derive(&p).unwrap();
        let amps = closed_form_vector(&d, 0, 40, 1.0).unwrap();
        let grid = GridSpec::spatial(-4.0, 4.0, 101).unwrap();
        let a = assemble(&p, &amps, &grid, 1.0).unwrap();
        let basis = Eigenbasis::new(&p, 1.0).unwrap();
        let x = grid.point(37);
        let direct: Complex64 = (0..=40)
            .map(|n| amps.get(n) * Complex64::from_polar(1.0, theta_phase(&p, n).theta_n) * basis.eval(n, x))
            .sum();
        assert!((a.values[37] - direct).norm() < 1e-13);
    }
}
