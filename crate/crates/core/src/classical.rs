//! Classical motion of the two oscillators, `ü = −2V′(u)`, `v̈ = −2V′(v)`.
//!
//! The dimensionless Schrödinger operator `−d²/dq² + V` is the Hamiltonian
//! `H = p² + V` (mass 1/2), so `q̇ = 2p` and each oscillator carries
//! `E = q̇²/4 + V(q)`.

use crate::error::{Error, Result};
use crate::ode::rk4_step;
use crate::potentials::PotentialSpec;
use crate::trajectory::{hermite, Sample, Termination, Trajectory};

pub const DEFAULT_STEP: f64 = 1e-3;

/// Abort threshold on relative energy drift.
pub const MAX_ENERGY_DRIFT: f64 = 1e-6;

/// Tolerance of the equal-energy constraint.
pub const ENERGY_MATCH_TOLERANCE: f64 = 1e-10;

/// Wall-hit times are located to this accuracy.
const REFLECTION_TOLERANCE: f64 = 1e-12;

/// Initial conditions `u(0) = u0`, `v(0) = 0`, `u̇(0) = udot0`, `v̇(0) = vdot0`.
///
/// Smooth potentials use `udot0 = 0`. The square well has no force, so its
/// orbits need `udot0 = ±vdot0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalIC {
    pub u0: f64,
    pub udot0: f64,
    pub vdot0: f64,
}

impl ClassicalIC {
    /// Starts at rest at `u0`; `v̇0 = 2√(V(u0) − V(0))` so both oscillators
    /// share the energy `V(u0)`.
    pub fn equal_energy(spec: &PotentialSpec, u0: f64) -> Result<Self> {
        let gap = spec.evaluate(u0)? - spec.evaluate(0.0)?;
        if gap < 0.0 {
            return Err(Error::InvalidInitialConditions(format!(
                "V(u0) = {} lies below V(0); v cannot start at the origin with equal energy",
                gap
            )));
        }
        Ok(Self {
            u0,
            udot0: 0.0,
            vdot0: 2.0 * gap.sqrt(),
        })
    }

    pub fn energy_u(&self, spec: &PotentialSpec) -> Result<f64> {
        Ok(0.25 * self.udot0 * self.udot0 + spec.evaluate(self.u0)?)
    }

    pub fn energy_v(&self, spec: &PotentialSpec) -> Result<f64> {
        Ok(0.25 * self.vdot0 * self.vdot0 + spec.evaluate(0.0)?)
    }

    /// Checks the equal-energy constraint.
    pub fn validate(&self, spec: &PotentialSpec) -> Result<()> {
        if ![self.u0, self.udot0, self.vdot0]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::InvalidInitialConditions(
                "initial conditions must be finite".into(),
            ));
        }
        let (eu, ev) = (self.energy_u(spec)?, self.energy_v(spec)?);
        let tol = ENERGY_MATCH_TOLERANCE * eu.abs().max(ev.abs()).max(1.0);
        if (eu - ev).abs() > tol {
            return Err(Error::InvalidInitialConditions(format!(
                "oscillator energies differ: E_u = {eu}, E_v = {ev}"
            )));
        }
        Ok(())
    }
}

/// Integrates the classical equations of motion from `ic` up to `t_end`.
pub fn integrate(spec: &PotentialSpec, ic: &ClassicalIC, t_end: f64, h: f64) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInitialConditions(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    run(spec, ic, h, t_end, None)
}

/// Longest time searched for a first return when the period is unknown.
pub const MAX_RETURN_TIME: f64 = 1e4;

/// Integrates `periods` periods. The period is first estimated from the
/// first return of `v` to an upward zero crossing, then the run is repeated
/// to `periods · T` from the same initial conditions.
pub fn integrate_periods(
    spec: &PotentialSpec,
    ic: &ClassicalIC,
    periods: f64,
    h: f64,
) -> Result<Trajectory> {
    if !(periods > 0.0 && periods.is_finite()) {
        return Err(Error::InvalidInitialConditions(format!(
            "number of periods must be positive, got {periods}"
        )));
    }
    let probe = run(spec, ic, h, MAX_RETURN_TIME, Some(1))?;
    let t_return = period_from_crossings(&probe)?;
    integrate(spec, ic, periods * t_return, h)
}

fn period_from_crossings(tr: &Trajectory) -> Result<f64> {
    let last = tr.samples.len() - 1;
    let (a, b) = (&tr.samples[last - 1], &tr.samples[last]);
    if !(a.v < 0.0 && b.v >= 0.0) {
        return Err(Error::NoOscillation);
    }
    Ok(refine_root(a, b))
}

/// Fixed-step run to `t_end`; with `stop_after = Some(k)` it stops at the
/// `k`-th upward zero crossing of `v` after the start.
fn run(
    spec: &PotentialSpec,
    ic: &ClassicalIC,
    h: f64,
    t_end: f64,
    stop_after: Option<usize>,
) -> Result<Trajectory> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInitialConditions(format!(
            "step size must be positive, got {h}"
        )));
    }
    ic.validate(spec)?;

    let wall = spec.wall();
    let mut rhs = |y: &[f64; 4]| {
        [
            y[2],
            y[3],
            -2.0 * spec.derivative_unchecked(y[0]),
            -2.0 * spec.derivative_unchecked(y[1]),
        ]
    };
    let record = |t: f64, y: &[f64; 4]| Sample {
        t,
        u: y[0],
        v: y[1],
        udot: y[2],
        vdot: y[3],
        e_u: 0.25 * y[2] * y[2] + spec.value_unchecked(y[0]),
        e_v: 0.25 * y[3] * y[3] + spec.value_unchecked(y[1]),
    };

    let steps = (t_end / h).ceil() as usize;
    let mut y = [ic.u0, 0.0, ic.udot0, ic.vdot0];
    let mut samples = Vec::with_capacity(if stop_after.is_some() {
        1024
    } else {
        steps + 1
    });
    samples.push(record(0.0, &y));
    let mut t = 0.0;
    let mut crossings = 0;
    let mut stopped = false;
    for k in 1..=steps {
        let t_next = (k as f64 * h).min(t_end);
        let dt = t_next - t;
        let v_prev = y[1];
        y = match wall {
            Some(w) => advance_with_walls(&mut rhs, y, dt, w),
            None => rk4_step(&mut rhs, &y, dt),
        };
        t = t_next;
        samples.push(record(t, &y));
        if v_prev < 0.0 && y[1] >= 0.0 {
            crossings += 1;
            if stop_after == Some(crossings) {
                stopped = true;
                break;
            }
        }
    }
    if stop_after.is_some() && !stopped {
        return Err(Error::NoOscillation);
    }

    let traj = Trajectory {
        samples,
        step: h,
        termination: Termination::Completed,
    };
    let drift = traj.energy_drift();
    if !(drift <= MAX_ENERGY_DRIFT) {
        return Err(Error::StepTooLarge {
            drift,
            limit: MAX_ENERGY_DRIFT,
            h,
        });
    }
    Ok(traj)
}

/// Advances by `dt`, reflecting elastically at `|q| = wall`.
fn advance_with_walls<F>(rhs: &mut F, mut y: [f64; 4], dt: f64, wall: f64) -> [f64; 4]
where
    F: FnMut(&[f64; 4]) -> [f64; 4],
{
    let outside = |s: &[f64; 4]| s[0].abs() > wall || s[1].abs() > wall;
    let mut remaining = dt;
    // each pass resolves one wall hit; a coordinate cannot hit twice in one step
    for _ in 0..8 {
        let trial = rk4_step(rhs, &y, remaining);
        if !outside(&trial) {
            return trial;
        }
        let (mut lo, mut hi) = (0.0, remaining);
        while hi - lo > REFLECTION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if outside(&rk4_step(rhs, &y, mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        y = rk4_step(rhs, &y, hi);
        for c in 0..2 {
            if y[c].abs() >= wall - 1e-9 && y[c] * y[c + 2] > 0.0 {
                y[c] = wall.copysign(y[c]);
                y[c + 2] = -y[c + 2];
            }
        }
        remaining -= hi;
        if remaining <= 0.0 {
            break;
        }
    }
    y
}

/// Period estimate from upward zero crossings of `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodReport {
    pub period: f64,
    /// Refined times of the upward crossings of `v`.
    pub crossings: Vec<f64>,
    /// `max_t |v(t) − u(t − T/4)|` over the samples with `t ≥ T/4`.
    pub quarter_shift_defect: f64,
}

impl PeriodReport {
    pub const QUARTER_SHIFT_LIMIT: f64 = 1e-6;

    pub fn quarter_shift_holds(&self) -> bool {
        self.quarter_shift_defect < Self::QUARTER_SHIFT_LIMIT
    }
}

pub fn period(tr: &Trajectory) -> Result<PeriodReport> {
    let s = &tr.samples;
    let mut crossings = Vec::new();
    if s[0].v == 0.0 && s[0].vdot > 0.0 {
        crossings.push(s[0].t);
    }
    for w in s.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.v < 0.0 && b.v >= 0.0 {
            crossings.push(refine_root(a, b));
        }
    }
    if crossings.len() < 2 {
        return Err(Error::NoOscillation);
    }
    let period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;

    let quarter = 0.25 * period;
    let mut defect = 0.0f64;
    for smp in s.iter().filter(|x| x.t - tr.first().t >= quarter) {
        let u_shifted = tr.u_at(smp.t - quarter)?;
        defect = defect.max((smp.v - u_shifted).abs());
    }
    Ok(PeriodReport {
        period,
        crossings,
        quarter_shift_defect: defect,
    })
}

/// Root of the cubic Hermite interpolant of `v` between two samples.
fn refine_root(a: &Sample, b: &Sample) -> f64 {
    let f = |t: f64| hermite(a.t, a.v, a.vdot, b.t, b.v, b.vdot, t);
    let (mut lo, mut hi) = (a.t, b.t);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialKind;
    use approx::assert_relative_eq;

    fn harmonic() -> PotentialSpec {
        PotentialSpec::smooth(PotentialKind::Harmonic)
    }

    #[test]
    fn harmonic_circle() {
        let spec = harmonic();
        let ic = ClassicalIC::equal_energy(&spec, 3.0).unwrap();
        assert_eq!(ic.vdot0, 6.0);
        let tr = integrate(&spec, &ic, 10.0, DEFAULT_STEP).unwrap();
        let s0 = tr.first();
        assert_eq!((s0.u, s0.v, s0.udot, s0.vdot), (3.0, 0.0, 0.0, 6.0));
        for s in &tr.samples {
            assert!((s.u - 3.0 * (2.0 * s.t).cos()).abs() < 1e-9);
            assert!((s.v - 3.0 * (2.0 * s.t).sin()).abs() < 1e-9);
        }
        let p = period(&tr).unwrap();
        assert_relative_eq!(p.period, std::f64::consts::PI, epsilon = 1e-9);
        assert!(p.quarter_shift_holds(), "defect {}", p.quarter_shift_defect);
    }

    #[test]
    fn unequal_energies_rejected() {
        let spec = harmonic();
        let ic = ClassicalIC {
            u0: 3.0,
            udot0: 0.0,
            vdot0: 5.0,
        };
        assert!(matches!(
            integrate(&spec, &ic, 1.0, 1e-3),
            Err(Error::InvalidInitialConditions(_))
        ));
    }

    #[test]
    fn coarse_step_aborts() {
        let spec = PotentialSpec::smooth(PotentialKind::Quartic);
        let ic = ClassicalIC::equal_energy(&spec, 3.0).unwrap();
        assert!(matches!(
            integrate(&spec, &ic, 5.0, 0.05),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn square_well_sawtooth() {
        let spec = PotentialSpec::square_well(10.0).unwrap();
        let ic = ClassicalIC {
            u0: 2.5,
            udot0: 2.0,
            vdot0: 2.0,
        };
        let tr = integrate(&spec, &ic, 25.0, DEFAULT_STEP).unwrap();
        for s in &tr.samples {
            assert!(s.u.abs() <= 5.0 + 1e-12 && s.v.abs() <= 5.0 + 1e-12);
            assert_relative_eq!(s.udot.abs(), 2.0, epsilon = 1e-12);
            assert_relative_eq!(s.vdot.abs(), 2.0, epsilon = 1e-12);
        }
        // u hits the wall at t = 1.25 and comes back to 2.5 at t = 2.5
        assert!((tr.u_at(2.5).unwrap() - 2.5).abs() < 1e-9);
        let p = period(&tr).unwrap();
        assert_relative_eq!(p.period, 2.0 * 10.0 / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn periods_are_counted_from_the_first_return() {
        let spec = PotentialSpec::smooth(PotentialKind::Quartic);
        let ic = ClassicalIC::equal_energy(&spec, 2.0).unwrap();
        let tr = integrate_periods(&spec, &ic, 2.5, DEFAULT_STEP).unwrap();
        let p = period(&tr).unwrap();
        assert_eq!(p.crossings.len(), 3);
        assert!((tr.duration() - 2.5 * p.period).abs() < 1e-9);
    }

    #[test]
    fn no_oscillation_in_short_run() {
        let spec = harmonic();
        let ic = ClassicalIC::equal_energy(&spec, 1.0).unwrap();
        let tr = integrate(&spec, &ic, 1.0, 1e-3).unwrap();
        assert!(matches!(period(&tr), Err(Error::NoOscillation)));
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let spec = PotentialSpec::smooth(PotentialKind::DoubleWell);
        let ic = ClassicalIC::equal_energy(&spec, 2.2).unwrap();
        let fwd = integrate(&spec, &ic, 4.0, DEFAULT_STEP).unwrap();
        let end = fwd.last();
        // reversing velocities at the end and integrating the same time retraces the path
        let mut rhs = |y: &[f64; 4]| {
            [
                y[2],
                y[3],
                -2.0 * spec.derivative_unchecked(y[0]),
                -2.0 * spec.derivative_unchecked(y[1]),
            ]
        };
        let mut y = [end.u, end.v, -end.udot, -end.vdot];
        for _ in 0..4000 {
            y = rk4_step(&mut rhs, &y, DEFAULT_STEP);
        }
        assert!((y[0] - 2.2).abs() < 1e-8 && y[1].abs() < 1e-8);
        assert!(y[2].abs() < 1e-8 && (y[3] + ic.vdot0).abs() < 1e-8);
    }

    #[test]
    fn orbit_is_point_symmetric() {
        let spec = PotentialSpec::smooth(PotentialKind::Cosh);
        let ic = ClassicalIC::equal_energy(&spec, 3.5).unwrap();
        let tr = integrate(&spec, &ic, 6.0, DEFAULT_STEP).unwrap();
        let p = period(&tr).unwrap();
        let half = 0.5 * p.period;
        for s in tr
            .samples
            .iter()
            .filter(|s| s.t + half <= tr.last().t)
            .step_by(97)
        {
            let (u2, v2) = (tr.u_at(s.t + half).unwrap(), tr.v_at(s.t + half).unwrap());
            assert!((u2 + s.u).abs() < 1e-8 && (v2 + s.v).abs() < 1e-8);
        }
    }
}
