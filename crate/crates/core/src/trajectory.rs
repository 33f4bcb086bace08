//! Time-stamped trajectory samples shared by the classical and Bohmian
//! integrators.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub udot: f64,
    pub vdot: f64,
    /// `u̇²/4 + V(u)`
    pub e_u: f64,
    /// `v̇²/4 + V(v)`
    pub e_v: f64,
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// `R²` fell below the node threshold.
    Node {
        t: f64,
        u: f64,
        v: f64,
    },
    /// The point left the eigensystem domain.
    DomainExit {
        t: f64,
        u: f64,
        v: f64,
    },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::Node { .. } => "node",
            Termination::DomainExit { .. } => "domain_exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub step: f64,
    pub termination: Termination,
}

impl Trajectory {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    pub fn duration(&self) -> f64 {
        self.last().t - self.first().t
    }

    /// Largest `|E(t) − E(0)| / max(|E(0)|, 1e-300)` over both components.
    pub fn energy_drift(&self) -> f64 {
        let s0 = self.first();
        let rel = |e: f64, e0: f64| (e - e0).abs() / e0.abs().max(1e-300);
        self.samples.iter().fold(0.0f64, |m, s| {
            m.max(rel(s.e_u, s0.e_u)).max(rel(s.e_v, s0.e_v))
        })
    }

    /// Samples with `t0 <= t <= t1`.
    pub fn window(&self, t0: f64, t1: f64) -> Trajectory {
        Trajectory {
            samples: self
                .samples
                .iter()
                .filter(|s| s.t >= t0 && s.t <= t1)
                .copied()
                .collect(),
            step: self.step,
            termination: self.termination,
        }
    }

    /// At most `max_samples` samples evenly spaced in index, keeping both ends.
    pub fn decimate(&self, max_samples: usize) -> Trajectory {
        let n = self.samples.len();
        if n <= max_samples || max_samples < 2 {
            return self.clone();
        }
        let samples = (0..max_samples)
            .map(|k| self.samples[k * (n - 1) / (max_samples - 1)])
            .collect();
        Trajectory {
            samples,
            step: self.step,
            termination: self.termination,
        }
    }

    /// Index `i` with `samples[i].t <= t <= samples[i+1].t`.
    fn bracket(&self, t: f64) -> Result<usize> {
        let n = self.samples.len();
        if n < 2 || t < self.samples[0].t || t > self.samples[n - 1].t {
            return Err(Error::NoOscillation);
        }
        let i = self.samples.partition_point(|s| s.t <= t);
        Ok(i.clamp(1, n - 1) - 1)
    }

    /// Cubic Hermite interpolation of `u(t)` from positions and velocities.
    pub fn u_at(&self, t: f64) -> Result<f64> {
        let i = self.bracket(t)?;
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        Ok(hermite(a.t, a.u, a.udot, b.t, b.u, b.udot, t))
    }

    pub fn v_at(&self, t: f64) -> Result<f64> {
        let i = self.bracket(t)?;
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        Ok(hermite(a.t, a.v, a.vdot, b.t, b.v, b.vdot, t))
    }
}

pub(crate) fn hermite(t0: f64, y0: f64, d0: f64, t1: f64, y1: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    if h == 0.0 {
        return y0;
    }
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
}
