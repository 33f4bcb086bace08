//! Uniform `(u, v)` grids, the sampled scalar fields on them, and the text
//! field format.
//!
//! File layout:
//!
//! ```text
//! format=wavecorr-field-v1
//! kind=density
//! umin=-6.0000000000000000e0,umax=6.0000000000000000e0,nu=400
//! vmin=-6.0000000000000000e0,vmax=6.0000000000000000e0,nv=400
//! layout=v-major
//! masked=0
//! <nv lines of nu comma-separated values, v ascending, u ascending within a line>
//! ```
//!
//! Values are written with 17 significant digits. Masked points (nodes of the
//! quantum potential) are written as `nan` and counted on the `masked` line.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "wavecorr-field-v1";

/// Extent and resolution of a uniform grid; nodes include both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub umin: f64,
    pub umax: f64,
    pub nu: usize,
    pub vmin: f64,
    pub vmax: f64,
    pub nv: usize,
}

impl GridSpec {
    pub fn square(half_extent: f64, n: usize) -> Self {
        Self {
            umin: -half_extent,
            umax: half_extent,
            nu: n,
            vmin: -half_extent,
            vmax: half_extent,
            nv: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && hi > lo;
        if self.nu < 2 || self.nv < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points per axis, got {} x {}",
                self.nu, self.nv
            )));
        }
        if !ok(self.umin, self.umax) || !ok(self.vmin, self.vmax) {
            return Err(Error::InvalidGrid(format!(
                "empty or non-finite extent [{}, {}] x [{}, {}]",
                self.umin, self.umax, self.vmin, self.vmax
            )));
        }
        Ok(())
    }

    pub fn du(&self) -> f64 {
        (self.umax - self.umin) / (self.nu - 1) as f64
    }

    pub fn dv(&self) -> f64 {
        (self.vmax - self.vmin) / (self.nv - 1) as f64
    }

    /// The coarser of the two grid steps.
    pub fn step(&self) -> f64 {
        self.du().max(self.dv())
    }

    pub fn u(&self, i: usize) -> f64 {
        if i + 1 == self.nu {
            self.umax
        } else {
            self.umin + self.du() * i as f64
        }
    }

    pub fn v(&self, j: usize) -> f64 {
        if j + 1 == self.nv {
            self.vmax
        } else {
            self.vmin + self.dv() * j as f64
        }
    }

    pub fn us(&self) -> Vec<f64> {
        (0..self.nu).map(|i| self.u(i)).collect()
    }

    pub fn vs(&self) -> Vec<f64> {
        (0..self.nv).map(|j| self.v(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.umin && u <= self.umax && v >= self.vmin && v <= self.vmax
    }

    /// Largest `|u|` or `|v|` reached by the grid.
    pub fn max_abs(&self) -> f64 {
        [self.umin, self.umax, self.vmin, self.vmax]
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// What a field holds; written on the `kind=` header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Density,
    Residual,
    ResidualFd,
    QuantumPotential,
    Other,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Density => "density",
            FieldKind::Residual => "residual",
            FieldKind::ResidualFd => "residual_fd",
            FieldKind::QuantumPotential => "quantum_potential",
            FieldKind::Other => "other",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            FieldKind::Density,
            FieldKind::Residual,
            FieldKind::ResidualFd,
            FieldKind::QuantumPotential,
            FieldKind::Other,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

/// Real values on a [`GridSpec`]; index `j * nu + i` holds `(u_i, v_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub grid: GridSpec,
    pub kind: FieldKind,
    pub values: Vec<f64>,
}

impl ScalarField2D {
    pub fn new(grid: GridSpec, kind: FieldKind, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(Error::InvalidGrid("field values must be finite".into()));
        }
        Ok(Self { grid, kind, values })
    }

    pub fn from_fn(
        grid: GridSpec,
        kind: FieldKind,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        grid.validate()?;
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.nv {
            let v = grid.v(j);
            for i in 0..grid.nu {
                values.push(f(grid.u(i), v));
            }
        }
        Self::new(grid, kind, values)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nu + i]
    }

    /// Number of masked (`NaN`) points.
    pub fn masked(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    /// Largest unmasked value.
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .filter(|v| !v.is_nan())
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Largest unmasked absolute value.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .filter(|v| !v.is_nan())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn bilinear(&self, u: f64, v: f64) -> Option<f64> {
        let g = &self.grid;
        if !g.contains(u, v) {
            return None;
        }
        let fu = (u - g.umin) / g.du();
        let fv = (v - g.vmin) / g.dv();
        let i = (fu.floor() as usize).min(g.nu - 2);
        let j = (fv.floor() as usize).min(g.nv - 2);
        let (s, t) = (fu - i as f64, fv - j as f64);
        let f00 = self.at(i, j);
        let f10 = self.at(i + 1, j);
        let f01 = self.at(i, j + 1);
        let f11 = self.at(i + 1, j + 1);
        Some((1.0 - t) * ((1.0 - s) * f00 + s * f10) + t * ((1.0 - s) * f01 + s * f11))
    }

    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let mut out = String::with_capacity(24 * g.len() + 256);
        let _ = writeln!(out, "format={FORMAT_TAG}");
        let _ = writeln!(out, "kind={}", self.kind.as_str());
        let _ = writeln!(
            out,
            "umin={},umax={},nu={}",
            fmt_f64(g.umin),
            fmt_f64(g.umax),
            g.nu
        );
        let _ = writeln!(
            out,
            "vmin={},vmax={},nv={}",
            fmt_f64(g.vmin),
            fmt_f64(g.vmax),
            g.nv
        );
        let _ = writeln!(out, "layout=v-major");
        let _ = writeln!(out, "masked={}", self.masked());
        for j in 0..g.nv {
            for i in 0..g.nu {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&fmt_f64(self.at(i, j)));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines();
        let mut header = |want: &str| -> std::result::Result<Vec<(String, String)>, String> {
            let line = lines
                .next()
                .ok_or_else(|| format!("missing `{want}` header line"))?;
            let pairs: Vec<(String, String)> = line
                .split(',')
                .map(|kv| {
                    kv.split_once('=')
                        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                        .ok_or_else(|| format!("malformed header entry `{kv}`"))
                })
                .collect::<std::result::Result<_, _>>()?;
            if pairs.first().map(|p| p.0.as_str()) != Some(want) {
                return Err(format!("expected `{want}=` header, found `{line}`"));
            }
            Ok(pairs)
        };
        let format = header("format")?;
        if format[0].1 != FORMAT_TAG {
            return Err(format!("unsupported format `{}`", format[0].1));
        }
        let kind_s = header("kind")?[0].1.clone();
        let kind = FieldKind::parse(&kind_s).ok_or_else(|| format!("unknown kind `{kind_s}`"))?;
        let axis = |pairs: Vec<(String, String)>,
                    names: [&str; 3]|
         -> std::result::Result<(f64, f64, usize), String> {
            if pairs.len() != 3 || pairs.iter().zip(names).any(|(p, n)| p.0 != n) {
                return Err(format!(
                    "expected `{}=..,{}=..,{}=..`",
                    names[0], names[1], names[2]
                ));
            }
            let lo = pairs[0].1.parse::<f64>().map_err(|e| e.to_string())?;
            let hi = pairs[1].1.parse::<f64>().map_err(|e| e.to_string())?;
            let n = pairs[2].1.parse::<usize>().map_err(|e| e.to_string())?;
            Ok((lo, hi, n))
        };
        let (umin, umax, nu) = axis(header("umin")?, ["umin", "umax", "nu"])?;
        let (vmin, vmax, nv) = axis(header("vmin")?, ["vmin", "vmax", "nv"])?;
        let layout = header("layout")?;
        if layout[0].1 != "v-major" {
            return Err(format!("unsupported layout `{}`", layout[0].1));
        }
        let masked: usize = header("masked")?[0]
            .1
            .parse()
            .map_err(|e: std::num::ParseIntError| e.to_string())?;

        let grid = GridSpec {
            umin,
            umax,
            nu,
            vmin,
            vmax,
            nv,
        };
        let mut values = Vec::with_capacity(nu * nv);
        let mut rows = 0;
        for (r, line) in lines.enumerate() {
            let before = values.len();
            for tok in line.split(',') {
                values.push(
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|e| format!("row {r}: {e}"))?,
                );
            }
            if values.len() - before != nu {
                return Err(format!(
                    "row {r} has {} values, expected {nu}",
                    values.len() - before
                ));
            }
            rows += 1;
        }
        if rows != nv {
            return Err(format!("found {rows} rows, expected {nv}"));
        }
        let field = Self::new(grid, kind, values).map_err(|e| e.to_string())?;
        if field.masked() != masked {
            return Err(format!(
                "header says {masked} masked points, found {}",
                field.masked()
            ));
        }
        Ok(field)
    }
}

/// 17 significant digits in scientific notation; `nan` for masked values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}
