//! Correspondence diagnostics: residual of the hyperbolic equation, crest
//! tracking against the classical orbit, quantum potential, and Bohmian
//! orbit deviation.

use std::fmt::Write as _;

use crate::bohmian::quantum_potential_at;
use crate::error::{Error, Result};
use crate::field::{fmt_f64, FieldKind, GridSpec, ScalarField2D};
use crate::packet::{GridComponents, WavePacket};
use crate::trajectory::Trajectory;

/// Sub-samples per grid step in the coarse crest scan.
const SCAN_PER_STEP: f64 = 4.0;
const GOLDEN_TOLERANCE: f64 = 1e-10;

fn check_grid(p: &WavePacket<'_>, grid: &GridSpec) -> Result<()> {
    grid.validate()?;
    let sys = p.system();
    let corners = [
        (grid.umin, grid.vmin),
        (grid.umax, grid.vmax),
        (grid.umin, grid.vmax),
        (grid.umax, grid.vmin),
    ];
    if let Some(&(u, v)) = corners.iter().find(|(u, v)| !p.contains(*u, *v)) {
        return Err(Error::DomainExit { u, v });
    }
    if let Some(w) = sys.potential().wall() {
        let margin = 2.0 * grid.step();
        if grid.max_abs() > w - margin {
            return Err(Error::InvalidGrid(format!(
                "grid reaches |q| = {}, closer than two grid steps to the wall at {w}",
                grid.max_abs()
            )));
        }
    }
    Ok(())
}

fn components(p: &WavePacket<'_>, grid: &GridSpec) -> Result<GridComponents> {
    p.grid_components(&grid.us(), &grid.vs())
}

/// `|Ψ|²` on the grid.
pub fn density(p: &WavePacket<'_>, grid: &GridSpec) -> Result<ScalarField2D> {
    grid.validate()?;
    let c = components(p, grid)?;
    let values = c.x.iter().zip(&c.y).map(|(x, y)| x * x + y * y).collect();
    ScalarField2D::new(*grid, FieldKind::Density, values)
}

/// Residual of `(−∂²_u + ∂²_v + V(u) − V(v)) Ψ = 0` on a grid.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// `|residual|` from term-wise analytic second derivatives.
    pub analytic: ScalarField2D,
    /// `|residual|` from the five-point stencil; border points are `NaN`.
    pub finite_difference: ScalarField2D,
    /// `max|Ψ| · max E_n` over the grid and the retained terms.
    pub scale: f64,
}

impl ResidualReport {
    pub fn max_relative_analytic(&self) -> f64 {
        relative(self.analytic.max_abs(), self.scale)
    }

    pub fn max_relative_fd(&self) -> f64 {
        relative(self.finite_difference.max_abs(), self.scale)
    }
}

fn relative(x: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        x
    } else {
        x / scale
    }
}

pub fn pde_residual(p: &WavePacket<'_>, grid: &GridSpec) -> Result<ResidualReport> {
    check_grid(p, grid)?;
    let c = components(p, grid)?;
    let pot = p.system().potential();
    let (nu, nv) = (grid.nu, grid.nv);
    let vu: Vec<f64> = grid.us().iter().map(|&u| pot.value_unchecked(u)).collect();
    let vv: Vec<f64> = grid.vs().iter().map(|&v| pot.value_unchecked(v)).collect();

    let mut analytic = vec![0.0; nu * nv];
    let mut fd = vec![f64::NAN; nu * nv];
    let (hu2, hv2) = (grid.du() * grid.du(), grid.dv() * grid.dv());
    let mut max_psi = 0.0f64;
    for j in 0..nv {
        for i in 0..nu {
            let k = j * nu + i;
            let dv = vu[i] - vv[j];
            let rx = -c.x_uu[k] + c.x_vv[k] + dv * c.x[k];
            let ry = -c.y_uu[k] + c.y_vv[k] + dv * c.y[k];
            analytic[k] = rx.hypot(ry);
            max_psi = max_psi.max(c.x[k].hypot(c.y[k]));
            if i == 0 || j == 0 || i + 1 == nu || j + 1 == nv {
                continue;
            }
            let stencil = |f: &[f64]| {
                let fuu = (f[k + 1] - 2.0 * f[k] + f[k - 1]) / hu2;
                let fvv = (f[k + nu] - 2.0 * f[k] + f[k - nu]) / hv2;
                -fuu + fvv + dv * f[k]
            };
            fd[k] = stencil(&c.x).hypot(stencil(&c.y));
        }
    }
    let max_e = p.terms().iter().fold(0.0f64, |m, t| m.max(t.energy));
    Ok(ResidualReport {
        analytic: ScalarField2D::new(*grid, FieldKind::Residual, analytic)?,
        finite_difference: ScalarField2D::new(*grid, FieldKind::ResidualFd, fd)?,
        scale: max_psi * max_e,
    })
}

/// Quantum potential `Q = (−∂²R/∂u² + ∂²R/∂v²) / R`; points with
/// `R² <= node_epsilon` are masked.
pub fn quantum_potential(
    p: &WavePacket<'_>,
    grid: &GridSpec,
    node_epsilon: f64,
) -> Result<ScalarField2D> {
    grid.validate()?;
    let c = components(p, grid)?;
    let values = (0..grid.len())
        .map(|k| quantum_potential_at(&c.jet(k), node_epsilon).unwrap_or(f64::NAN))
        .collect();
    ScalarField2D::new(*grid, FieldKind::QuantumPotential, values)
}

/// `|Q| / |V(u) − V(v)|` along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SuppressionReport {
    /// Pointwise ratios at unmasked samples where `V(u) ≠ V(v)`.
    pub ratios: Vec<f64>,
    pub median_ratio: f64,
    /// `median |Q| / max |V(u) − V(v)|` along the orbit.
    pub median_q_over_max_dv: f64,
    pub masked: usize,
}

pub fn q_suppression(
    p: &WavePacket<'_>,
    orbit: &Trajectory,
    node_epsilon: f64,
) -> Result<SuppressionReport> {
    let pot = p.system().potential();
    let mut ratios = Vec::with_capacity(orbit.samples.len());
    let mut qs = Vec::with_capacity(orbit.samples.len());
    let mut max_dv = 0.0f64;
    let mut masked = 0;
    for s in &orbit.samples {
        let j = p.jet(s.u, s.v)?;
        let dv = (pot.evaluate(s.u)? - pot.evaluate(s.v)?).abs();
        max_dv = max_dv.max(dv);
        match quantum_potential_at(&j, node_epsilon) {
            Some(q) => {
                qs.push(q.abs());
                if dv > 0.0 {
                    ratios.push(q.abs() / dv);
                }
            }
            None => masked += 1,
        }
    }
    let median_ratio = median(&ratios);
    let median_q = median(&qs);
    Ok(SuppressionReport {
        ratios,
        median_ratio,
        median_q_over_max_dv: if max_dv > 0.0 {
            median_q / max_dv
        } else {
            f64::NAN
        },
        masked,
    })
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One normal search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrestSample {
    /// Arc length along the classical orbit.
    pub arc: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub ridge_u: f64,
    pub ridge_v: f64,
    /// Signed distance along the normal `(v̇, −u̇)/|q̇|`.
    pub offset: f64,
    /// The maximum sat at the end of the search window.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrestReport {
    pub samples: Vec<CrestSample>,
    pub window: f64,
    /// Grid step of the searched field.
    pub resolution: f64,
    pub mean_offset: f64,
    pub max_offset: f64,
    pub boundary_hits: usize,
}

impl CrestReport {
    fn summarize(samples: Vec<CrestSample>, window: f64, resolution: f64) -> Self {
        let n = samples.len().max(1) as f64;
        let mean_offset = samples.iter().map(|s| s.offset.abs()).sum::<f64>() / n;
        let max_offset = samples.iter().fold(0.0f64, |m, s| m.max(s.offset.abs()));
        let boundary_hits = samples.iter().filter(|s| s.on_boundary).count();
        Self {
            samples,
            window,
            resolution,
            mean_offset,
            max_offset,
            boundary_hits,
        }
    }

    pub fn mean_steps(&self) -> f64 {
        self.mean_offset / self.resolution
    }

    pub fn max_steps(&self) -> f64 {
        self.max_offset / self.resolution
    }

    /// The report restricted to the samples that satisfy `keep`.
    pub fn restricted(&self, keep: impl Fn(&CrestSample) -> bool) -> Self {
        let samples = self.samples.iter().copied().filter(|s| keep(s)).collect();
        Self::summarize(samples, self.window, self.resolution)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("arc,t,u,v,ridge_u,ridge_v,offset,on_boundary\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_f64(s.arc),
                fmt_f64(s.t),
                fmt_f64(s.u),
                fmt_f64(s.v),
                fmt_f64(s.ridge_u),
                fmt_f64(s.ridge_v),
                fmt_f64(s.offset),
                u8::from(s.on_boundary)
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        format!(
            "mean_offset,max_offset,window,resolution\n{},{},{},{}\n",
            fmt_f64(self.mean_offset),
            fmt_f64(self.max_offset),
            fmt_f64(self.window),
            fmt_f64(self.resolution)
        )
    }
}

/// For each classical sample, the maximum of the bilinearly interpolated
/// field along the orbit normal within `±window`.
pub fn crest_offset(
    field: &ScalarField2D,
    classical: &Trajectory,
    window: f64,
) -> Result<CrestReport> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "crest window must be positive, got {window}"
        )));
    }
    let res = field.grid.step();
    let n_scan = ((2.0 * window / res) * SCAN_PER_STEP).ceil().max(8.0) as usize;
    let dt = 2.0 * window / n_scan as f64;

    let mut out = Vec::with_capacity(classical.samples.len());
    let mut arc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for s in &classical.samples {
        if let Some((pu, pv)) = prev {
            arc += (s.u - pu).hypot(s.v - pv);
        }
        prev = Some((s.u, s.v));
        let speed = s.udot.hypot(s.vdot);
        if speed == 0.0 {
            continue;
        }
        let (nu_, nv_) = (s.vdot / speed, -s.udot / speed);
        let at = |r: f64| field.bilinear(s.u + r * nu_, s.v + r * nv_);
        for r in [-window, window] {
            if at(r).is_none() {
                return Err(Error::WindowOutsideField {
                    u: s.u + r * nu_,
                    v: s.v + r * nv_,
                });
            }
        }
        let mut best = (0usize, f64::NEG_INFINITY);
        for k in 0..=n_scan {
            let val = at(-window + dt * k as f64).unwrap_or(f64::NEG_INFINITY);
            if val > best.1 {
                best = (k, val);
            }
        }
        let k = best.0;
        let lo = -window + dt * k.saturating_sub(1) as f64;
        let hi = (-window + dt * (k + 1) as f64).min(window);
        let r = golden_max(|r| at(r).unwrap_or(f64::NEG_INFINITY), lo, hi);
        out.push(CrestSample {
            arc,
            t: s.t,
            u: s.u,
            v: s.v,
            ridge_u: s.u + r * nu_,
            ridge_v: s.v + r * nv_,
            offset: r,
            on_boundary: k == 0 || k == n_scan,
        });
    }
    Ok(CrestReport::summarize(out, window, res))
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > GOLDEN_TOLERANCE * (1.0 + a.abs().max(b.abs())) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Position of the largest `|Ψ(u, 0)|²` on `[lo, hi]`, located by a scan of
/// `samples` points and golden-section refinement.
pub fn axis_ridge(p: &WavePacket<'_>, lo: f64, hi: f64, samples: usize) -> Result<f64> {
    if !(hi > lo) || samples < 3 {
        return Err(Error::InvalidGrid(format!(
            "bad ridge search interval [{lo}, {hi}]"
        )));
    }
    let dens = |u: f64| -> Result<f64> { Ok(p.evaluate(u, 0.0)?.norm_sqr()) };
    let step = (hi - lo) / (samples - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for k in 0..samples {
        let d = dens(lo + step * k as f64)?;
        if d > best.1 {
            best = (k, d);
        }
    }
    let a = lo + step * best.0.saturating_sub(1) as f64;
    let b = (lo + step * (best.0 + 1) as f64).min(hi);
    Ok(golden_max(|u| dens(u).unwrap_or(f64::NEG_INFINITY), a, b))
}

/// Distance from a Bohmian orbit to the classical orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitDeviation {
    /// Largest distance from a Bohmian sample to the classical polyline.
    pub max_distance: f64,
    pub mean_distance: f64,
    /// Normalising amplitude, the classical turning point `u0`.
    pub amplitude: f64,
}

impl OrbitDeviation {
    pub fn max_relative(&self) -> f64 {
        self.max_distance / self.amplitude
    }
}

pub fn orbit_deviation(
    bohmian: &Trajectory,
    classical: &Trajectory,
    amplitude: f64,
) -> OrbitDeviation {
    let pts: Vec<(f64, f64)> = classical.samples.iter().map(|s| (s.u, s.v)).collect();
    let mut max_d = 0.0f64;
    let mut sum = 0.0;
    for b in &bohmian.samples {
        let d = polyline_distance(&pts, b.u, b.v);
        max_d = max_d.max(d);
        sum += d;
    }
    OrbitDeviation {
        max_distance: max_d,
        mean_distance: sum / bohmian.samples.len().max(1) as f64,
        amplitude,
    }
}

fn polyline_distance(pts: &[(f64, f64)], u: f64, v: f64) -> f64 {
    if pts.len() == 1 {
        return (pts[0].0 - u).hypot(pts[0].1 - v);
    }
    pts.windows(2)
        .map(|w| {
            let ((a, b), (c, d)) = (w[0], w[1]);
            let (ex, ey) = (c - a, d - b);
            let len2 = ex * ex + ey * ey;
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((u - a) * ex + (v - b) * ey) / len2).clamp(0.0, 1.0)
            };
            (a + t * ex - u).hypot(b + t * ey - v)
        })
        .fold(f64::INFINITY, f64::min)
}
