//! Causal (de Broglie–Bohm) trajectories of a packet.
//!
//! With `Ψ = R e^{iS}`, `x = Re Ψ`, `y = Im Ψ`, the phase gradients are
//! `∂S = (x ∂y − y ∂x) / R²`, so the guidance field
//! `(u̇, v̇) = κ (∂S/∂u, −∂S/∂v)` is evaluated without unwrapping `S`.

use crate::error::{Error, Result};
use crate::ode::try_rk4_step;
use crate::packet::{PacketJet, WavePacket};
use crate::trajectory::{Sample, Termination, Trajectory};

pub const DEFAULT_KAPPA: f64 = 2.0;
pub const DEFAULT_NODE_EPSILON: f64 = 1e-10;

/// Amplitude and phase of a complex value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub r: f64,
    /// `atan2(y, x)` in `(−π, π]`; 0 at a node.
    pub s: f64,
    pub node: bool,
}

impl Polar {
    pub fn from_parts(x: f64, y: f64) -> Self {
        let r = x.hypot(y);
        if r == 0.0 {
            Polar {
                r,
                s: 0.0,
                node: true,
            }
        } else {
            Polar {
                r,
                s: y.atan2(x),
                node: false,
            }
        }
    }
}

pub fn polar(p: &WavePacket<'_>, u: f64, v: f64) -> Result<Polar> {
    let z = p.evaluate(u, v)?;
    Ok(Polar::from_parts(z.re, z.im))
}

/// `(∂S/∂u, ∂S/∂v)`; `None` where `R² <= eps`.
pub fn phase_gradient(j: &PacketJet, eps: f64) -> Option<(f64, f64)> {
    let r2 = j.r2();
    if !(r2 > eps) {
        return None;
    }
    Some((
        (j.x * j.y_u - j.y * j.x_u) / r2,
        (j.x * j.y_v - j.y * j.x_v) / r2,
    ))
}

/// `Q = (−∂²R/∂u² + ∂²R/∂v²) / R` from the jet; `None` where `R² <= eps`.
pub fn quantum_potential_at(j: &PacketJet, eps: f64) -> Option<f64> {
    let r2 = j.r2();
    if !(r2 > eps) {
        return None;
    }
    // R_qq / R = (x_q² + y_q² + x x_qq + y y_qq)/R² − (x x_q + y y_q)²/R⁴
    let second = |xq: f64, yq: f64, xqq: f64, yqq: f64| {
        let g = j.x * xq + j.y * yq;
        (xq * xq + yq * yq + j.x * xqq + j.y * yqq) / r2 - g * g / (r2 * r2)
    };
    let ruu = second(j.x_u, j.y_u, j.x_uu, j.y_uu);
    let rvv = second(j.x_v, j.y_v, j.x_vv, j.y_vv);
    Some(rvv - ruu)
}

/// Velocity field of a packet.
#[derive(Debug, Clone)]
pub struct GuidanceField<'a> {
    pub packet: WavePacket<'a>,
    pub kappa: f64,
    pub node_epsilon: f64,
}

impl<'a> GuidanceField<'a> {
    pub fn new(packet: WavePacket<'a>) -> Self {
        Self {
            packet,
            kappa: DEFAULT_KAPPA,
            node_epsilon: DEFAULT_NODE_EPSILON,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_node_epsilon(mut self, eps: f64) -> Self {
        self.node_epsilon = eps;
        self
    }

    /// `(u̇, v̇)` at `(u, v)`.
    pub fn velocity(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        let j = self.packet.jet(u, v)?;
        match phase_gradient(&j, self.node_epsilon) {
            Some((su, sv)) => Ok((self.kappa * su, -self.kappa * sv)),
            None => Err(Error::Node { u, v, r2: j.r2() }),
        }
    }

    /// Quantum Hamilton–Jacobi residual `S_u² − S_v² + V(u) − V(v) + Q`.
    pub fn hje_residual(&self, u: f64, v: f64) -> Result<f64> {
        let j = self.packet.jet(u, v)?;
        let eps = self.node_epsilon;
        let (su, sv) = phase_gradient(&j, eps).ok_or(Error::Node { u, v, r2: j.r2() })?;
        let q = quantum_potential_at(&j, eps).ok_or(Error::Node { u, v, r2: j.r2() })?;
        let pot = self.packet.system().potential();
        Ok(su * su - sv * sv + pot.evaluate(u)? - pot.evaluate(v)? + q)
    }

    /// Integrates the guidance flow from `start` with fixed-step RK4.
    ///
    /// A negative `h` integrates backwards in time. Stops early, without an
    /// error, when a substep lands on a node or leaves the domain; the
    /// reason is in [`Trajectory::termination`]. Errors only if `start`
    /// itself is unusable.
    pub fn integrate(&self, start: (f64, f64), t_end: f64, h: f64) -> Result<Trajectory> {
        if !(h != 0.0 && h.is_finite() && t_end.is_finite() && t_end >= 0.0) {
            return Err(Error::InvalidInitialConditions(format!(
                "need t_end >= 0 and a nonzero finite step, got t_end = {t_end}, h = {h}"
            )));
        }
        let pot = self.packet.system().potential();
        let sample = |t: f64, u: f64, v: f64, udot: f64, vdot: f64| Sample {
            t,
            u,
            v,
            udot,
            vdot,
            e_u: 0.25 * udot * udot + pot.value_unchecked(u),
            e_v: 0.25 * vdot * vdot + pot.value_unchecked(v),
        };

        let (u0, v0) = start;
        let (du, dv) = self.velocity(u0, v0)?;
        let mut samples = vec![sample(0.0, u0, v0, du, dv)];
        let mut rhs = |y: &[f64; 2]| -> Result<[f64; 2]> {
            let (a, b) = self.velocity(y[0], y[1])?;
            Ok([a, b])
        };

        let steps = (t_end / h.abs()).ceil() as usize;
        let dir = h.signum();
        let mut y = [u0, v0];
        let mut termination = Termination::Completed;
        for k in 1..=steps {
            let t_prev = samples[samples.len() - 1].t;
            let t = dir * (k as f64 * h.abs()).min(t_end);
            let next = try_rk4_step(&mut rhs, &y, t - t_prev).and_then(|yn| {
                let (a, b) = self.velocity(yn[0], yn[1])?;
                Ok((yn, a, b))
            });
            match next {
                Ok((yn, a, b)) => {
                    y = yn;
                    samples.push(sample(t, y[0], y[1], a, b));
                }
                Err(Error::Node { .. }) => {
                    termination = Termination::Node {
                        t: t_prev,
                        u: y[0],
                        v: y[1],
                    };
                    break;
                }
                Err(Error::DomainExit { .. }) => {
                    termination = Termination::DomainExit {
                        t: t_prev,
                        u: y[0],
                        v: y[1],
                    };
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if dir < 0.0 {
            samples.reverse();
        }
        Ok(Trajectory {
            samples,
            step: h.abs(),
            termination,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{solve, SpectralConfig};
    use crate::packet::{coefficients, CoefficientFamily, CoefficientSpec};
    use crate::potentials::{PotentialKind, PotentialSpec};
    use approx::assert_relative_eq;

    fn harmonic_system() -> crate::eigensolve::EigenSystem {
        let spec = PotentialSpec::smooth(PotentialKind::Harmonic);
        solve(&spec, &SpectralConfig::default_for(&spec)).unwrap()
    }

    fn coherent(zeta: f64) -> CoefficientSpec {
        CoefficientSpec::new(CoefficientFamily::Coherent { zeta }, 30)
    }

    #[test]
    fn synthetic_polar() {
        let p = Polar::from_parts(1.0, 1.0);
        assert_relative_eq!(p.r, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.s, std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
        assert!(Polar::from_parts(0.0, 0.0).node);
    }

    #[test]
    fn axis_phase_is_zero_or_pi() {
        let sys = harmonic_system();
        let pk = coefficients(&coherent(3.0), &sys).unwrap();
        for k in 0..40 {
            let u = -5.0 + 0.25 * k as f64;
            let p = polar(&pk, u, 0.0).unwrap();
            assert!(p.s == 0.0 || p.s == std::f64::consts::PI, "S = {}", p.s);
        }
    }

    #[test]
    fn single_even_term_has_flat_phase() {
        let sys = harmonic_system();
        let cs = CoefficientSpec::new(
            CoefficientFamily::Explicit {
                values: vec![0.0, 0.0, 0.7],
            },
            2,
        );
        let pk = coefficients(&cs, &sys).unwrap();
        let p = polar(&pk, 0.3, -1.1).unwrap();
        assert_eq!(p.s.abs() % std::f64::consts::PI, 0.0);
        let expect = (0.7 / sys.state(2).unwrap().origin_value
            * sys.eval_state(2, 0.3).unwrap()
            * sys.eval_state(2, -1.1).unwrap())
        .abs();
        assert_relative_eq!(p.r, expect, epsilon = 1e-13);
    }

    #[test]
    fn u_velocity_vanishes_on_axis() {
        let sys = harmonic_system();
        let g = GuidanceField::new(coefficients(&coherent(3.0), &sys).unwrap());
        for u in [-3.3, -1.0, 0.4, 2.0, 3.0, 4.1] {
            let (du, dv) = g.velocity(u, 0.0).unwrap();
            assert_eq!(du, 0.0);
            assert!(dv.is_finite());
        }
    }

    #[test]
    fn kappa_scales_velocity() {
        let sys = harmonic_system();
        let pk = coefficients(&coherent(3.0), &sys).unwrap();
        let g1 = GuidanceField::new(pk.clone()).with_kappa(0.5);
        let g2 = GuidanceField::new(pk).with_kappa(1.0);
        let (a, b) = g1.velocity(1.2, 0.7).unwrap();
        let (c, d) = g2.velocity(1.2, 0.7).unwrap();
        assert_relative_eq!(2.0 * a, c, epsilon = 1e-15);
        assert_relative_eq!(2.0 * b, d, epsilon = 1e-15);
    }

    #[test]
    fn velocity_matches_phase_differences() {
        // one even plus one odd term, compared with a 4th-order difference of unwrapped S
        let sys = harmonic_system();
        let cs = CoefficientSpec::new(
            CoefficientFamily::Explicit {
                values: vec![1.0, 0.8],
            },
            1,
        );
        let g = GuidanceField::new(coefficients(&cs, &sys).unwrap());
        let s = |u: f64, v: f64| polar(&g.packet, u, v).unwrap().s;
        let unwrap =
            |d: f64| d - (2.0 * std::f64::consts::PI) * (d / (2.0 * std::f64::consts::PI)).round();
        let h = 1e-3;
        for (u, v) in [(0.3, 0.5), (-0.8, 0.2), (1.1, -0.9)] {
            let d = |du: f64, dv: f64| {
                let c = s(u, v);
                let f = |k: f64| c + unwrap(s(u + k * du, v + k * dv) - c);
                (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
            };
            let (su, sv) = (d(1.0, 0.0), d(0.0, 1.0));
            let (a, b) = g.velocity(u, v).unwrap();
            assert!(
                (a - 2.0 * su).abs() < 1e-8,
                "u at {u},{v}: {a} vs {}",
                2.0 * su
            );
            assert!(
                (b + 2.0 * sv).abs() < 1e-8,
                "v at {u},{v}: {b} vs {}",
                -2.0 * sv
            );
        }
    }

    #[test]
    fn node_is_reported() {
        let sys = harmonic_system();
        let cs = CoefficientSpec::new(
            CoefficientFamily::Explicit {
                values: vec![0.0, 1.0],
            },
            1,
        );
        let g = GuidanceField::new(coefficients(&cs, &sys).unwrap());
        assert!(matches!(g.velocity(0.0, 0.7), Err(Error::Node { .. })));
    }

    #[test]
    fn reversed_integration_retraces() {
        let sys = harmonic_system();
        let g = GuidanceField::new(coefficients(&coherent(3.0), &sys).unwrap());
        let fwd = g.integrate((3.0, 0.0), 1.0, 1e-3).unwrap();
        assert!(fwd.termination.is_completed());
        let end = fwd.last();
        let back = g.integrate((end.u, end.v), 1.0, -1e-3).unwrap();
        let b0 = back.first();
        assert!((b0.u - 3.0).abs() < 1e-6 && b0.v.abs() < 1e-6);
    }

    #[test]
    fn hamilton_jacobi_balance() {
        let sys = harmonic_system();
        let g = GuidanceField::new(coefficients(&coherent(3.0), &sys).unwrap());
        for (u, v) in [(3.0, 0.1), (2.0, 2.0), (-1.5, 2.5), (0.3, -2.9)] {
            let res = g.hje_residual(u, v).unwrap();
            assert!(res.abs() < 1e-6 * 9.0, "residual {res} at ({u}, {v})");
        }
    }
}
