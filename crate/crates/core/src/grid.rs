use crate::error::{DhoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Spatial,
    Temporal,
}

/// Uniform sampling of `[min, max]` with `count` points, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub kind: GridKind,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, count: usize, kind: GridKind) -> Result<Self> {
        let g = GridSpec { min, max, count, kind };
        g.validate()?;
        Ok(g)
    }

    pub fn spatial(min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(min, max, count, GridKind::Spatial)
    }

    pub fn temporal(min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(min, max, count, GridKind::Temporal)
    }

    /// Grid `[min, max]` with spacing as close as possible to `step`.
    pub fn with_step(min: f64, max: f64, step: f64, kind: GridKind) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(DhoError::InvalidGrid(format!("step must be > 0, got {step}")));
        }
        let intervals = ((max - min) / step).round().max(1.0) as usize;
        Self::new(min, max, intervals + 1, kind)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(DhoError::InvalidGrid("endpoints must be finite".into()));
        }
        if self.min >= self.max {
            return Err(DhoError::InvalidGrid(format!(
                "min < max required, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count < 2 {
            return Err(DhoError::InvalidGrid(format!(
                "count >= 2 required, got {}",
                self.count
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

/// Composite trapezoid rule over uniformly spaced samples.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}
