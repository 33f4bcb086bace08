//! Wave packets `Ψ(u,v) = Σ_even A_n ψ_n(u)ψ_n(v) + i Σ_odd B_n ψ_n(u)ψ_n(v)`.
//!
//! A single coefficient function `C(n)` fixes both halves: the even terms
//! reproduce the initial profile `Ψ(u,0) = Σ_even C(n) ψ_n(u)` and the odd
//! terms reproduce the initial slope `∂_vΨ(u,0) = i Σ_odd √E_n C(n) ψ_n(u)`,
//! which gives
//!
//! ```text
//! A_n = C(n) / ψ_n(0)          (n even)
//! B_n = √E_n C(n) / ψ′_n(0)    (n odd)
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{EigenSystem, Parity, StateJet};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Smallest `|ψ_n(0)|` or `|ψ′_n(0)|` accepted as a divisor.
pub const MIN_ORIGIN_DATUM: f64 = 1e-12;

/// Truncation is considered converged when `|C(n_last)| / max|C|` is below this.
pub const TAIL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoefficientFamily {
    /// `C(n) = ζⁿ / √(2ⁿ n!) · e^{−ζ²/4}`
    Coherent { zeta: f64 },
    /// `C(n) = n ζⁿ / √(2ⁿ n!) · e^{−ζ²/4}`
    NWeightedCoherent { zeta: f64 },
    /// `C(n) = ∫ e^{−α(u−d)²} ψ_n(u) du`, by quadrature.
    GaussianProjection { alpha: f64, d: f64 },
    /// `values[i]` is `C` for the `i`-th retained state in ascending energy;
    /// missing entries are zero.
    Explicit { values: Vec<f64> },
}

impl CoefficientFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CoefficientFamily::Coherent { .. } => "coherent",
            CoefficientFamily::NWeightedCoherent { .. } => "n_weighted_coherent",
            CoefficientFamily::GaussianProjection { .. } => "gaussian_projection",
            CoefficientFamily::Explicit { .. } => "explicit",
        }
    }
}

/// Coefficient family plus truncation.
///
/// `n_max` is the number of terms kept *per parity*: the packet sums over the
/// lowest `n_max` even and lowest `n_max` odd states.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSpec {
    pub family: CoefficientFamily,
    pub n_max: usize,
}

impl CoefficientSpec {
    pub const DEFAULT_N_MAX: usize = 40;

    pub fn new(family: CoefficientFamily, n_max: usize) -> Self {
        Self { family, n_max }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidCoefficients(m));
        if self.n_max == 0 {
            return fail("n_max must be at least 1".into());
        }
        match &self.family {
            CoefficientFamily::Coherent { zeta }
            | CoefficientFamily::NWeightedCoherent { zeta } => {
                if !zeta.is_finite() {
                    return fail(format!("zeta must be finite, got {zeta}"));
                }
            }
            CoefficientFamily::GaussianProjection { alpha, d } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return fail(format!("alpha must be positive, got {alpha}"));
                }
                if !d.is_finite() {
                    return fail(format!("d must be finite, got {d}"));
                }
            }
            CoefficientFamily::Explicit { values } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return fail("explicit coefficients must be finite".into());
                }
            }
        }
        Ok(())
    }
}

/// `ζⁿ / √(2ⁿ n!) · e^{−ζ²/4}`, evaluated in log space.
pub fn coherent_coefficient(zeta: f64, n: usize) -> f64 {
    if zeta == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    let nf = n as f64;
    let log_mag =
        nf * zeta.abs().ln() - 0.5 * (nf * std::f64::consts::LN_2 + ln_fact) - 0.25 * zeta * zeta;
    let sign = if zeta < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    sign * log_mag.exp()
}

/// `n ζⁿ / √(2ⁿ n!) · e^{−ζ²/4}`.
pub fn n_weighted_coefficient(zeta: f64, n: usize) -> f64 {
    n as f64 * coherent_coefficient(zeta, n)
}

/// One retained term of the packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    /// Position of the state in the eigensystem.
    pub index: usize,
    pub n: usize,
    pub parity: Parity,
    pub energy: f64,
    /// `C(n)`.
    pub c: f64,
    /// `A_n` for even terms, `B_n` for odd terms.
    pub amplitude: f64,
}

/// Real and imaginary parts of `Ψ` with first and pure second derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PacketJet {
    pub x: f64,
    pub y: f64,
    pub x_u: f64,
    pub x_v: f64,
    pub y_u: f64,
    pub y_v: f64,
    pub x_uu: f64,
    pub x_vv: f64,
    pub y_uu: f64,
    pub y_vv: f64,
}

impl PacketJet {
    pub fn psi(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn r2(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    fn scaled(self, c: Complex64) -> Self {
        let mix = |re: f64, im: f64| (c.re * re - c.im * im, c.im * re + c.re * im);
        let (x, y) = mix(self.x, self.y);
        let (x_u, y_u) = mix(self.x_u, self.y_u);
        let (x_v, y_v) = mix(self.x_v, self.y_v);
        let (x_uu, y_uu) = mix(self.x_uu, self.y_uu);
        let (x_vv, y_vv) = mix(self.x_vv, self.y_vv);
        Self {
            x,
            y,
            x_u,
            x_v,
            y_u,
            y_v,
            x_uu,
            x_vv,
            y_uu,
            y_vv,
        }
    }
}

/// `PacketJet` components sampled on a tensor grid; index `j * nu + i` holds
/// the point `(us[i], vs[j])`.
#[derive(Debug, Clone)]
pub struct GridComponents {
    pub nu: usize,
    pub nv: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_u: Vec<f64>,
    pub x_v: Vec<f64>,
    pub y_u: Vec<f64>,
    pub y_v: Vec<f64>,
    pub x_uu: Vec<f64>,
    pub x_vv: Vec<f64>,
    pub y_uu: Vec<f64>,
    pub y_vv: Vec<f64>,
}

impl GridComponents {
    pub fn jet(&self, k: usize) -> PacketJet {
        PacketJet {
            x: self.x[k],
            y: self.y[k],
            x_u: self.x_u[k],
            x_v: self.x_v[k],
            y_u: self.y_u[k],
            y_v: self.y_v[k],
            x_uu: self.x_uu[k],
            x_vv: self.x_vv[k],
            y_uu: self.y_uu[k],
            y_vv: self.y_vv[k],
        }
    }
}

/// A packet bound to the eigensystem it was built from.
#[derive(Debug, Clone)]
pub struct WavePacket<'a> {
    system: &'a EigenSystem,
    spec: CoefficientSpec,
    terms: Vec<Term>,
    scale: Complex64,
}

/// Builds the packet for `cs` on `sys`.
pub fn coefficients<'a>(cs: &CoefficientSpec, sys: &'a EigenSystem) -> Result<WavePacket<'a>> {
    cs.validate()?;
    if cs.n_max > sys.n_per_parity() {
        return Err(Error::InvalidCoefficients(format!(
            "n_max = {} exceeds the {} retained states per parity",
            cs.n_max,
            sys.n_per_parity()
        )));
    }
    let count = 2 * cs.n_max;
    let states = &sys.states()[..count];
    let cs_values: Vec<f64> = match &cs.family {
        CoefficientFamily::Coherent { zeta } => states
            .iter()
            .map(|s| coherent_coefficient(*zeta, s.n))
            .collect(),
        CoefficientFamily::NWeightedCoherent { zeta } => states
            .iter()
            .map(|s| n_weighted_coefficient(*zeta, s.n))
            .collect(),
        CoefficientFamily::Explicit { values } => (0..count)
            .map(|i| values.get(i).copied().unwrap_or(0.0))
            .collect(),
        CoefficientFamily::GaussianProjection { alpha, d } => {
            gaussian_projection(sys, count, *alpha, *d)?
        }
    };

    let mut terms = Vec::with_capacity(count);
    for (index, (state, &c)) in states.iter().zip(&cs_values).enumerate() {
        let datum = state.origin_datum();
        if datum.abs() < MIN_ORIGIN_DATUM {
            return Err(Error::DegenerateOrigin {
                n: state.n,
                value: datum,
            });
        }
        let amplitude = match state.parity {
            Parity::Even => c / datum,
            Parity::Odd => state.energy.sqrt() * c / datum,
        };
        terms.push(Term {
            index,
            n: state.n,
            parity: state.parity,
            energy: state.energy,
            c,
            amplitude,
        });
    }
    Ok(WavePacket {
        system: sys,
        spec: cs.clone(),
        terms,
        scale: Complex64::new(1.0, 0.0),
    })
}

/// `∫_{−B}^{B} e^{−α(u−d)²} ψ_i(u) du` for the lowest `count` states.
fn gaussian_projection(sys: &EigenSystem, count: usize, alpha: f64, d: f64) -> Result<Vec<f64>> {
    let b = sys.half_length();
    let panel = (0.5 / alpha.sqrt()).min(0.2);
    let panels = ((2.0 * b) / panel).ceil() as usize;
    let width = 2.0 * b / panels as f64;
    let gl = GaussLegendre::new(20);
    let mut out = vec![0.0; count];
    let mut jets = Vec::with_capacity(count);
    for p in 0..panels {
        let lo = -b + width * p as f64;
        for (u, w) in gl.on_interval(lo, lo + width) {
            let g = (-alpha * (u - d) * (u - d)).exp();
            if g == 0.0 {
                continue;
            }
            sys.jets_into(u, count, &mut jets)?;
            for (acc, jet) in out.iter_mut().zip(&jets) {
                *acc += w * g * jet.value;
            }
        }
    }
    Ok(out)
}

impl<'a> WavePacket<'a> {
    pub fn system(&self) -> &'a EigenSystem {
        self.system
    }

    pub fn spec(&self) -> &CoefficientSpec {
        &self.spec
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    /// The same packet multiplied by a complex constant.
    pub fn with_scale(&self, scale: Complex64) -> Self {
        Self {
            scale: self.scale * scale,
            ..self.clone()
        }
    }

    /// `|C(n_last)| / max_n |C(n)|` over the retained terms.
    pub fn tail_ratio(&self) -> f64 {
        let max = self.terms.iter().fold(0.0f64, |m, t| m.max(t.c.abs()));
        let last = self.terms.last().map_or(0.0, |t| t.c.abs());
        if max == 0.0 {
            0.0
        } else {
            last / max
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.system.contains(u) && self.system.contains(v)
    }

    fn check(&self, u: f64, v: f64) -> Result<()> {
        if self.contains(u, v) {
            Ok(())
        } else {
            Err(Error::DomainExit { u, v })
        }
    }

    /// Full jet at `(u, v)`, term-wise analytic derivatives.
    pub fn jet(&self, u: f64, v: f64) -> Result<PacketJet> {
        self.check(u, v)?;
        let count = self.terms.len();
        let ju = self.system.jets(u, count)?;
        let jv = self.system.jets(v, count)?;
        let mut acc = PacketJet::default();
        for (t, (a, b)) in self.terms.iter().zip(ju.iter().zip(&jv)) {
            let w = t.amplitude;
            let (f, fu, fuu) = (
                w * a.value * b.value,
                w * a.d1 * b.value,
                w * a.d2 * b.value,
            );
            let (fv, fvv) = (w * a.value * b.d1, w * a.value * b.d2);
            match t.parity {
                Parity::Even => {
                    acc.x += f;
                    acc.x_u += fu;
                    acc.x_v += fv;
                    acc.x_uu += fuu;
                    acc.x_vv += fvv;
                }
                Parity::Odd => {
                    acc.y += f;
                    acc.y_u += fu;
                    acc.y_v += fv;
                    acc.y_uu += fuu;
                    acc.y_vv += fvv;
                }
            }
        }
        Ok(acc.scaled(self.scale))
    }

    pub fn evaluate(&self, u: f64, v: f64) -> Result<Complex64> {
        Ok(self.jet(u, v)?.psi())
    }

    /// `(∂Ψ/∂u, ∂Ψ/∂v)`.
    pub fn evaluate_grad(&self, u: f64, v: f64) -> Result<(Complex64, Complex64)> {
        let j = self.jet(u, v)?;
        Ok((Complex64::new(j.x_u, j.y_u), Complex64::new(j.x_v, j.y_v)))
    }

    /// `Ψ(u, 0)` at each sample; real up to the packet's overall scale.
    pub fn initial_slice(&self, us: &[f64]) -> Result<Vec<f64>> {
        us.iter()
            .map(|&u| {
                let j = self.jet(u, 0.0)?;
                Ok(j.x)
            })
            .collect()
    }

    /// Near-axis form `Σ_even C(n) cos(√E_n v) ψ_n(u) + i Σ_odd C(n) sin(√E_n v) ψ_n(u)`.
    ///
    /// Agrees with [`Self::evaluate`] for small `v`, and everywhere in the
    /// square well.
    pub fn plane_wave_form(&self, u: f64, v: f64) -> Result<Complex64> {
        self.check(u, v)?;
        let ju = self.system.jets(u, self.terms.len())?;
        let mut z = Complex64::new(0.0, 0.0);
        for (t, a) in self.terms.iter().zip(&ju) {
            let k = t.energy.sqrt();
            match t.parity {
                Parity::Even => z.re += t.c * (k * v).cos() * a.value,
                Parity::Odd => z.im += t.c * (k * v).sin() * a.value,
            }
        }
        Ok(z * self.scale)
    }

    /// Evaluates the packet on the tensor grid `us × vs`.
    pub fn grid_components(&self, us: &[f64], vs: &[f64]) -> Result<GridComponents> {
        let (nu, nv) = (us.len(), vs.len());
        let count = self.terms.len();
        let sample = |qs: &[f64], v_axis: bool| -> Result<Vec<Vec<StateJet>>> {
            qs.iter()
                .map(|&q| {
                    if !self.system.contains(q) {
                        return Err(if v_axis {
                            Error::DomainExit { u: 0.0, v: q }
                        } else {
                            Error::DomainExit { u: q, v: 0.0 }
                        });
                    }
                    self.system.jets(q, count)
                })
                .collect()
        };
        let ju = sample(us, false)?;
        let jv = sample(vs, true)?;

        let mut out = GridComponents {
            nu,
            nv,
            x: vec![0.0; nu * nv],
            y: vec![0.0; nu * nv],
            x_u: vec![0.0; nu * nv],
            x_v: vec![0.0; nu * nv],
            y_u: vec![0.0; nu * nv],
            y_v: vec![0.0; nu * nv],
            x_uu: vec![0.0; nu * nv],
            x_vv: vec![0.0; nu * nv],
            y_uu: vec![0.0; nu * nv],
            y_vv: vec![0.0; nu * nv],
        };

        for parity in [Parity::Even, Parity::Odd] {
            let sel: Vec<&Term> = self.terms.iter().filter(|t| t.parity == parity).collect();
            if sel.is_empty() {
                continue;
            }
            let m = sel.len();
            // rows: terms; columns: points. u-side matrices carry the amplitude.
            let umat = |pick: fn(&StateJet) -> f64| {
                DMatrix::from_fn(m, nu, |r, i| sel[r].amplitude * pick(&ju[i][sel[r].index]))
            };
            let vmat = |pick: fn(&StateJet) -> f64| {
                DMatrix::from_fn(m, nv, |r, j| pick(&jv[j][sel[r].index]))
            };
            let (u0, u1, u2) = (umat(|s| s.value), umat(|s| s.d1), umat(|s| s.d2));
            let (v0, v1, v2) = (vmat(|s| s.value), vmat(|s| s.d1), vmat(|s| s.d2));
            // (nv × m) · (m × nu): row j is v_j, column i is u_i
            let products = [
                v0.tr_mul(&u0),
                v0.tr_mul(&u1),
                v1.tr_mul(&u0),
                v0.tr_mul(&u2),
                v2.tr_mul(&u0),
            ];
            let targets = match parity {
                Parity::Even => [
                    &mut out.x,
                    &mut out.x_u,
                    &mut out.x_v,
                    &mut out.x_uu,
                    &mut out.x_vv,
                ],
                Parity::Odd => [
                    &mut out.y,
                    &mut out.y_u,
                    &mut out.y_v,
                    &mut out.y_uu,
                    &mut out.y_vv,
                ],
            };
            for (dst, mat) in targets.into_iter().zip(products.iter()) {
                for j in 0..nv {
                    for i in 0..nu {
                        dst[j * nu + i] = mat[(j, i)];
                    }
                }
            }
        }

        if self.scale != Complex64::new(1.0, 0.0) {
            for k in 0..nu * nv {
                let j = out.jet(k).scaled(self.scale);
                out.x[k] = j.x;
                out.y[k] = j.y;
                out.x_u[k] = j.x_u;
                out.x_v[k] = j.x_v;
                out.y_u[k] = j.y_u;
                out.y_v[k] = j.y_v;
                out.x_uu[k] = j.x_uu;
                out.x_vv[k] = j.x_vv;
                out.y_uu[k] = j.y_uu;
                out.y_vv[k] = j.y_vv;
            }
        }
        Ok(out)
    }
}

/// Closed form of the square-well Gaussian coefficient written with the
/// imaginary error function. Only used to cross-check quadrature; see
/// [`erfi_cross_check`].
pub fn square_well_gaussian_erfi(n: usize, alpha: f64, d: f64, width: f64) -> Complex64 {
    use errorfunctions::ComplexErrorFunctions;
    use std::f64::consts::PI;
    let i = Complex64::new(0.0, 1.0);
    let l = width;
    let npi = n as f64 * PI;
    let denom = 2.0 * alpha.sqrt() * l;
    let arg = |sign: f64, shift: f64| {
        (Complex64::new(npi, 0.0) + sign * 2.0 * i * alpha * l * shift) / denom
    };
    let prefactor = -i * ((npi * (npi + 4.0 * i * alpha * d * l)) / (4.0 * alpha * l * l)).exp()
        / (2.0 * alpha * l / PI).sqrt();
    let phase = (2.0 * i * d * npi / l).exp();
    let bracket = -arg(1.0, d - l).erfi()
        + phase * (arg(-1.0, d - l).erfi() - arg(-1.0, d + l).erfi())
        + arg(1.0, d + l).erfi();
    prefactor * bracket
}

/// One row of the erfi-versus-quadrature comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErfiComparison {
    pub n: usize,
    pub quadrature: f64,
    pub closed_form: Complex64,
    /// `| |closed_form| − |quadrature| |`
    pub magnitude_gap: f64,
}

/// Compares the quadrature coefficients of a square-well Gaussian packet with
/// the erfi closed form. Reports only; the two are not expected to agree.
pub fn erfi_cross_check(packet: &WavePacket<'_>) -> Result<Vec<ErfiComparison>> {
    let sys = packet.system();
    let width = match sys.potential().wall() {
        Some(w) => 2.0 * w,
        None => {
            return Err(Error::InvalidCoefficients(
                "erfi cross-check applies to the square well only".into(),
            ))
        }
    };
    let (alpha, d) = match packet.spec().family {
        CoefficientFamily::GaussianProjection { alpha, d } => (alpha, d),
        _ => {
            return Err(Error::InvalidCoefficients(
                "erfi cross-check needs a gaussian_projection packet".into(),
            ))
        }
    };
    Ok(packet
        .terms()
        .iter()
        .map(|t| {
            let closed_form = square_well_gaussian_erfi(t.n, alpha, d, width);
            ErfiComparison {
                n: t.n,
                quadrature: t.c,
                closed_form,
                magnitude_gap: (closed_form.norm() - t.c.abs()).abs(),
            }
        })
        .collect())
}
