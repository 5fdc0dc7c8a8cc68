//! Physical inputs and every constant derived from them.

use std::fmt;

use num_complex::Complex64;

use crate::error::{DhoError, Result};

/// Absolute tolerance, in units of `m * omega`, used when comparing the
/// damping coefficient against the critical values `gamma*` and `2 m omega`.
pub const REGIME_TOLERANCE: f64 = 1e-9;

/// The four physical inputs: mass, damping coefficient, spring constant and
/// reduced Planck constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub m: f64,
    pub gamma: f64,
    pub k: f64,
    pub hbar: f64,
}

impl PhysParams {
    pub fn new(m: f64, gamma: f64, k: f64, hbar: f64) -> Result<Self> {
        let p = PhysParams { m, gamma, k, hbar };
        p.validate()?;
        Ok(p)
    }

    /// Builds the parameters from the natural frequency instead of the
    /// spring constant (`k = m omega^2`).
    pub fn with_omega(m: f64, omega: f64, gamma: f64, hbar: f64) -> Result<Self> {
        Self::new(m, gamma, m * omega * omega, hbar)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                Err(DhoError::InvalidParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )))
            } else {
                Ok(())
            }
        };
        check("m", self.m)?;
        check("k", self.k)?;
        check("hbar", self.hbar)?;
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(DhoError::InvalidParams(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Rejects `gamma >= 2 m omega`; the quantum modules only make sense for
    /// an underdamped oscillator.
    pub fn validate_quantum(&self) -> Result<()> {
        self.validate()?;
        let bound = 2.0 * self.m * self.omega();
        if self.gamma >= bound {
            return Err(DhoError::Overdamped {
                gamma: self.gamma,
                bound,
            });
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        (self.k / self.m).sqrt()
    }

    /// `gamma / 2m`, the amplitude decay rate of the classical motion.
    pub fn half_rate(&self) -> f64 {
        self.gamma / (2.0 * self.m)
    }

    /// The critical damping `gamma* = (sqrt 5 - 1) m omega`.
    pub fn gamma_star(&self) -> f64 {
        (5f64.sqrt() - 1.0) * self.m * self.omega()
    }
}

/// Behaviour of the transition probabilities, decided by `gamma` against `gamma*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantumRegime {
    /// Case (a): `gamma < gamma*`, `xi` purely imaginary, periodic probabilities.
    Oscillatory,
    /// Case (b): `gamma = gamma*`, `xi = 0`, algebraic time dependence.
    Critical,
    /// Case (c): `gamma* < gamma < 2 m omega`, `xi` real and positive.
    Hyperbolic,
}

impl QuantumRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            QuantumRegime::Oscillatory => "oscillatory",
            QuantumRegime::Critical => "critical",
            QuantumRegime::Hyperbolic => "hyperbolic",
        }
    }

    /// Case letter: `a` oscillatory, `b` critical, `c` hyperbolic.
    pub fn case_letter(&self) -> char {
        match self {
            QuantumRegime::Oscillatory => 'a',
            QuantumRegime::Critical => 'b',
            QuantumRegime::Hyperbolic => 'c',
        }
    }
}

impl fmt::Display for QuantumRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassicalRegime {
    Underdamped,
    CriticallyDamped,
    Overdamped,
}

impl ClassicalRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassicalRegime::Underdamped => "underdamped",
            ClassicalRegime::CriticallyDamped => "critically_damped",
            ClassicalRegime::Overdamped => "overdamped",
        }
    }
}

impl fmt::Display for ClassicalRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every derived constant.
///
/// `xi` and `zeta` are `None` at `gamma = 0`, where their definitions divide
/// by zero; they are also `None` outside the underdamped range, together with
/// `quantum_regime`. For `gamma >= 2 m omega` the frequency `omega_minus` is
/// reported as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub params: PhysParams,
    pub omega: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
    /// `omega_minus^2 / omega`.
    pub alpha: f64,
    /// Phase with `e^{i beta} = (omega + i gamma/2m) / omega_plus`.
    pub beta: f64,
    pub lambda: Complex64,
    /// Principal square root of `1 - (2 m alpha / gamma)^2`; snapped to zero
    /// in the critical regime.
    pub xi: Option<Complex64>,
    /// Principal logarithm of `xi + 2 i m alpha / gamma`.
    pub zeta: Option<Complex64>,
    pub gamma_star: f64,
    pub quantum_regime: Option<QuantumRegime>,
    pub classical_regime: ClassicalRegime,
}

impl DerivedParams {
    pub fn half_rate(&self) -> f64 {
        self.params.half_rate()
    }

    /// The ratio `2 m alpha / gamma`, equal to `sqrt(1 - xi^2)`.
    pub fn coupling_ratio(&self) -> Option<f64> {
        if self.params.gamma > 0.0 {
            Some(2.0 * self.params.m * self.alpha / self.params.gamma)
        } else {
            None
        }
    }

    pub fn is_underdamped(&self) -> bool {
        self.classical_regime == ClassicalRegime::Underdamped
    }

    /// Fails with `Overdamped` unless the quantum modules can use these constants.
    pub fn require_quantum(&self) -> Result<()> {
        self.params.validate_quantum()
    }
}

pub fn classify(p: &PhysParams) -> Result<(Option<QuantumRegime>, ClassicalRegime)> {
    p.validate()?;
    let scale = p.m * p.omega();
    let tol = REGIME_TOLERANCE * scale;
    let bound = 2.0 * scale;
    let classical = if (p.gamma - bound).abs() <= tol {
        ClassicalRegime::CriticallyDamped
    } else if p.gamma < bound {
        ClassicalRegime::Underdamped
    } else {
        ClassicalRegime::Overdamped
    };
    let quantum = if p.gamma >= bound {
        None
    } else {
        let gs = p.gamma_star();
        Some(if (p.gamma - gs).abs() <= tol {
            QuantumRegime::Critical
        } else if p.gamma < gs {
            QuantumRegime::Oscillatory
        } else {
            QuantumRegime::Hyperbolic
        })
    };
    Ok((quantum, classical))
}

pub fn derive(p: &PhysParams) -> Result<DerivedParams> {
    let (quantum_regime, classical_regime) = classify(p)?;
    let omega = p.omega();
    let g = p.half_rate();
    let om_minus_sq = omega * omega - g * g;
    let omega_minus = if p.gamma < 2.0 * p.m * omega {
        om_minus_sq.sqrt()
    } else {
        0.0
    };
    let omega_plus = (omega * omega + g * g).sqrt();
    let alpha = omega_minus * omega_minus / omega;
    let beta = g.atan2(omega);
    let ratio = omega_plus / omega;
    let lambda = Complex64::new(((1.0 + ratio) / 2.0).sqrt(), ((ratio - 1.0) / 2.0).sqrt());

    let (xi, zeta) = match quantum_regime {
        Some(regime) if p.gamma > 0.0 => {
            let a = 2.0 * p.m * alpha / p.gamma;
            let xi = if regime == QuantumRegime::Critical {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 - a * a, 0.0).sqrt()
            };
            let zeta = (xi + Complex64::new(0.0, a)).ln();
            (Some(xi), Some(zeta))
        }
        _ => (None, None),
    };

    Ok(DerivedParams {
        params: *p,
        omega,
        omega_minus,
        omega_plus,
        alpha,
        beta,
        lambda,
        xi,
        zeta,
        gamma_star: p.gamma_star(),
        quantum_regime,
        classical_regime,
    })
}

/// `derive` plus the underdamped check required by the quantum modules.
pub fn derive_quantum(p: &PhysParams) -> Result<DerivedParams> {
    p.validate_quantum()?;
    derive(p)
}
