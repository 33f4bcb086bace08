//! Run configuration (TOML) and its fully resolved echo.
//!
//! ```toml
//! [potential]
//! kind = "harmonic"          # square_well also needs L
//!
//! [spectral]                 # every key optional; defaults depend on kind
//! box_half_length = 18.0
//!
//! [packet]
//! family = "coherent"        # coherent | n_weighted_coherent | gaussian_projection | explicit
//! zeta = 3.0
//!
//! [classical]
//! mode = "auto_from_ridge"   # or "explicit" with u0, vdot0 (and udot0)
//!
//! [bohmian]
//! kappa = 2.0
//!
//! [grid]
//! umin = -6.0
//! umax = 6.0
//! vmin = -6.0
//! vmax = 6.0
//!
//! [output]
//! directory = "out/harmonic"
//! ```
//!
//! Unknown keys are rejected. [`RunConfig::echo`] writes every resolved
//! value back out so a run can be repeated from the echo alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bohmian::{DEFAULT_KAPPA, DEFAULT_NODE_EPSILON};
use crate::classical::{ClassicalIC, DEFAULT_STEP};
use crate::eigensolve::{SignConvention, SpectralConfig};
use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::packet::{CoefficientFamily, CoefficientSpec};
use crate::potentials::{PotentialKind, PotentialSpec};

pub const FORMAT_VERSION: &str = "wavecorr-v1";
pub const ECHO_FILE: &str = "config.echo.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalMode {
    /// `u0` is the largest maximum of `|Ψ(u, 0)|²` on `[ridge_min, ridge_max]`.
    AutoFromRidge,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    Full,
    EigenOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalConfig {
    pub mode: ClassicalMode,
    /// Explicit initial conditions; `None` in ridge mode.
    pub ic: Option<ClassicalIC>,
    pub ridge_min: f64,
    pub ridge_max: f64,
    /// Square well only: speed of both oscillators in ridge mode, with
    /// `u̇0 = −speed`, `v̇0 = speed`.
    pub speed: f64,
    /// Integration length in periods, unless `t_end` is set.
    pub periods: f64,
    pub t_end: Option<f64>,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BohmianConfig {
    pub kappa: f64,
    pub node_epsilon: f64,
    /// Start points; empty means the classical start `(u0, 0)`.
    pub starts: Vec<[f64; 2]>,
    /// Integration length in classical periods, unless `t_end` is set.
    pub periods: f64,
    pub t_end: Option<f64>,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Absolute crest search half-width; overrides `crest_window_fraction`.
    pub crest_window: Option<f64>,
    /// Crest search half-width as a fraction of `u0`.
    pub crest_window_fraction: f64,
    /// Classical samples used for the crest search over one period.
    pub crest_samples: usize,
    /// Square well only: crest samples closer than this to a wall are left
    /// out of the summary.
    pub wall_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format_version: String,
    pub mode: OutputMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub spectral: SpectralConfig,
    pub packet: CoefficientSpec,
    pub classical: ClassicalConfig,
    pub bohmian: BohmianConfig,
    pub grid: GridSpec,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

// Raw document: every key optional so that missing keys can be listed
// together with their paths.

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    potential: Option<RawPotential>,
    spectral: Option<RawSpectral>,
    packet: Option<RawPacket>,
    classical: Option<RawClassical>,
    bohmian: Option<RawBohmian>,
    grid: Option<RawGrid>,
    analysis: Option<RawAnalysis>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<PotentialKind>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    l: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectral {
    box_half_length: Option<f64>,
    n_basis_per_parity: Option<usize>,
    quadrature_order: Option<usize>,
    n_states: Option<usize>,
    sign_convention: Option<SignConvention>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_max: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassical {
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<ClassicalMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    udot0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vdot0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ridge_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ridge_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    periods: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBohmian {
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    node_epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    starts: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    periods: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    umin: Option<f64>,
    umax: Option<f64>,
    nu: Option<usize>,
    vmin: Option<f64>,
    vmax: Option<f64>,
    nv: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    #[serde(skip_serializing_if = "Option::is_none")]
    crest_window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    crest_window_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    crest_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_margin: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    format_version: Option<String>,
    mode: Option<OutputMode>,
}

pub const DEFAULT_GRID_POINTS: usize = 400;
pub const DEFAULT_RIDGE_MIN: f64 = 0.3;
/// Default `ridge_max` as a fraction of the box half length.
pub const DEFAULT_RIDGE_MAX_FRACTION: f64 = 0.8;
pub const DEFAULT_SPEED: f64 = 2.0;
pub const DEFAULT_PERIODS: f64 = 1.0;
pub const DEFAULT_CREST_WINDOW_FRACTION: f64 = 0.25;
pub const DEFAULT_CREST_SAMPLES: usize = 400;
pub const DEFAULT_WALL_MARGIN: f64 = 1.0;

fn positive(path: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::config(
            path,
            format!("must be positive and finite, got {x}"),
        ))
    }
}

fn finite(path: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::config(path, format!("must be finite, got {x}")))
    }
}

fn missing(keys: &[&str]) -> Error {
    let (first, rest) = keys.split_first().expect("at least one missing key");
    let message = if rest.is_empty() {
        "missing required key".to_string()
    } else {
        format!("missing required keys: {}", keys.join(", "))
    };
    Error::config(*first, message)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let path = e
            .span()
            .map(|s| {
                let line = text[..s.start].matches('\n').count() + 1;
                format!("line {line}")
            })
            .unwrap_or_else(|| "document".into());
        Error::config(path, message)
    })?;
    resolve(raw)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    // potential
    let rp = raw.potential.ok_or_else(|| missing(&["potential.kind"]))?;
    let kind = rp.kind.ok_or_else(|| missing(&["potential.kind"]))?;
    let potential = match kind {
        PotentialKind::SquareWell => {
            let l = rp.l.ok_or_else(|| missing(&["potential.L"]))?;
            PotentialSpec::square_well(positive("potential.L", l)?)
                .map_err(|e| Error::config("potential.L", e.to_string()))?
        }
        other => {
            if rp.l.is_some() {
                return Err(Error::config(
                    "potential.L",
                    format!("`{other}` takes no parameters"),
                ));
            }
            PotentialSpec::smooth(other)
        }
    };

    // spectral
    let rs = raw.spectral.unwrap_or_default();
    let mut spectral = SpectralConfig::default_for(&potential);
    if let Some(b) = rs.box_half_length {
        spectral.box_half_length = positive("spectral.box_half_length", b)?;
    }
    if let Some(n) = rs.n_basis_per_parity {
        spectral.n_basis_per_parity = n;
    }
    if let Some(n) = rs.quadrature_order {
        spectral.quadrature_order = n;
    }
    if let Some(n) = rs.n_states {
        spectral.n_states = n;
    }
    if let Some(s) = rs.sign_convention {
        spectral.sign_convention = s;
    }
    spectral
        .validate()
        .map_err(|e| Error::config("spectral", e.to_string()))?;
    if let Some(w) = potential.wall() {
        if spectral.box_half_length != w {
            return Err(Error::config(
                "spectral.box_half_length",
                format!("must equal L/2 = {w} for the square well"),
            ));
        }
    }

    // packet
    let rk = raw.packet.unwrap_or_default();
    let family_name = rk
        .family
        .clone()
        .ok_or_else(|| missing(&["packet.family"]))?;
    let family = match family_name.as_str() {
        "coherent" | "n_weighted_coherent" => {
            let zeta = finite("packet.zeta", rk.zeta.ok_or_else(|| missing(&["packet.zeta"]))?)?;
            if family_name == "coherent" {
                CoefficientFamily::Coherent { zeta }
            } else {
                CoefficientFamily::NWeightedCoherent { zeta }
            }
        }
        "gaussian_projection" => {
            let absent: Vec<&str> = [("packet.alpha", rk.alpha), ("packet.d", rk.d)]
                .iter()
                .filter(|(_, v)| v.is_none())
                .map(|(k, _)| *k)
                .collect();
            if !absent.is_empty() {
                return Err(missing(&absent));
            }
            CoefficientFamily::GaussianProjection {
                alpha: positive("packet.alpha", rk.alpha.unwrap_or_default())?,
                d: finite("packet.d", rk.d.unwrap_or_default())?,
            }
        }
        "explicit" => CoefficientFamily::Explicit {
            values: rk.values.clone().ok_or_else(|| missing(&["packet.values"]))?,
        },
        other => {
            return Err(Error::config(
                "packet.family",
                format!(
                    "unknown family `{other}` (expected coherent, n_weighted_coherent, gaussian_projection or explicit)"
                ),
            ))
        }
    };
    let unused: Vec<&str> = [
        (
            "packet.zeta",
            rk.zeta.is_some()
                && !matches!(
                    family,
                    CoefficientFamily::Coherent { .. }
                        | CoefficientFamily::NWeightedCoherent { .. }
                ),
        ),
        (
            "packet.alpha",
            rk.alpha.is_some() && !matches!(family, CoefficientFamily::GaussianProjection { .. }),
        ),
        (
            "packet.d",
            rk.d.is_some() && !matches!(family, CoefficientFamily::GaussianProjection { .. }),
        ),
        (
            "packet.values",
            rk.values.is_some() && !matches!(family, CoefficientFamily::Explicit { .. }),
        ),
    ]
    .iter()
    .filter(|(_, bad)| *bad)
    .map(|(k, _)| *k)
    .collect();
    if let Some(k) = unused.first() {
        return Err(Error::config(
            *k,
            format!("not used by family `{family_name}`"),
        ));
    }
    let packet = CoefficientSpec::new(family, rk.n_max.unwrap_or(CoefficientSpec::DEFAULT_N_MAX));
    packet
        .validate()
        .map_err(|e| Error::config("packet", e.to_string()))?;
    if packet.n_max > spectral.n_states {
        return Err(Error::config(
            "packet.n_max",
            format!(
                "{} exceeds spectral.n_states = {}",
                packet.n_max, spectral.n_states
            ),
        ));
    }

    // classical
    let rc = raw.classical.unwrap_or_default();
    let mode = rc.mode.unwrap_or(ClassicalMode::AutoFromRidge);
    let ic = match mode {
        ClassicalMode::Explicit => {
            let absent: Vec<&str> = [("classical.u0", rc.u0), ("classical.vdot0", rc.vdot0)]
                .iter()
                .filter(|(_, v)| v.is_none())
                .map(|(k, _)| *k)
                .collect();
            if !absent.is_empty() {
                return Err(missing(&absent));
            }
            let ic = ClassicalIC {
                u0: finite("classical.u0", rc.u0.unwrap_or_default())?,
                udot0: finite("classical.udot0", rc.udot0.unwrap_or(0.0))?,
                vdot0: finite("classical.vdot0", rc.vdot0.unwrap_or_default())?,
            };
            ic.validate(&potential)
                .map_err(|e| Error::config("classical", e.to_string()))?;
            Some(ic)
        }
        ClassicalMode::AutoFromRidge => {
            for (k, v) in [
                ("classical.u0", rc.u0),
                ("classical.udot0", rc.udot0),
                ("classical.vdot0", rc.vdot0),
            ] {
                if v.is_some() {
                    return Err(Error::config(k, "only used with mode = \"explicit\""));
                }
            }
            None
        }
    };
    let ridge_min = positive(
        "classical.ridge_min",
        rc.ridge_min.unwrap_or(DEFAULT_RIDGE_MIN),
    )?;
    let ridge_max = positive(
        "classical.ridge_max",
        rc.ridge_max
            .unwrap_or(DEFAULT_RIDGE_MAX_FRACTION * spectral.box_half_length),
    )?;
    if ridge_max <= ridge_min || ridge_max > spectral.box_half_length {
        return Err(Error::config(
            "classical.ridge_max",
            format!("must lie in ({ridge_min}, {}]", spectral.box_half_length),
        ));
    }
    let classical = ClassicalConfig {
        mode,
        ic,
        ridge_min,
        ridge_max,
        speed: positive("classical.speed", rc.speed.unwrap_or(DEFAULT_SPEED))?,
        periods: positive("classical.periods", rc.periods.unwrap_or(DEFAULT_PERIODS))?,
        t_end: rc
            .t_end
            .map(|t| positive("classical.t_end", t))
            .transpose()?,
        h: positive("classical.h", rc.h.unwrap_or(DEFAULT_STEP))?,
    };

    // bohmian
    let rb = raw.bohmian.unwrap_or_default();
    let starts = rb.starts.unwrap_or_default();
    for (i, s) in starts.iter().enumerate() {
        let path = format!("bohmian.starts[{i}]");
        if !(s[0].is_finite() && s[1].is_finite()) {
            return Err(Error::config(path, "start must be finite"));
        }
        if s[0].abs() > spectral.box_half_length || s[1].abs() > spectral.box_half_length {
            return Err(Error::config(path, "start lies outside the box"));
        }
    }
    let bohmian = BohmianConfig {
        kappa: positive("bohmian.kappa", rb.kappa.unwrap_or(DEFAULT_KAPPA))?,
        node_epsilon: positive(
            "bohmian.node_epsilon",
            rb.node_epsilon.unwrap_or(DEFAULT_NODE_EPSILON),
        )?,
        starts,
        periods: positive("bohmian.periods", rb.periods.unwrap_or(DEFAULT_PERIODS))?,
        t_end: rb.t_end.map(|t| positive("bohmian.t_end", t)).transpose()?,
        h: positive("bohmian.h", rb.h.unwrap_or(DEFAULT_STEP))?,
    };

    // grid
    let rg = raw.grid.unwrap_or_default();
    let absent: Vec<&str> = [
        ("grid.umin", rg.umin),
        ("grid.umax", rg.umax),
        ("grid.vmin", rg.vmin),
        ("grid.vmax", rg.vmax),
    ]
    .iter()
    .filter(|(_, v)| v.is_none())
    .map(|(k, _)| *k)
    .collect();
    if !absent.is_empty() {
        return Err(missing(&absent));
    }
    let grid = GridSpec {
        umin: rg.umin.unwrap_or_default(),
        umax: rg.umax.unwrap_or_default(),
        nu: rg.nu.unwrap_or(DEFAULT_GRID_POINTS),
        vmin: rg.vmin.unwrap_or_default(),
        vmax: rg.vmax.unwrap_or_default(),
        nv: rg.nv.unwrap_or(DEFAULT_GRID_POINTS),
    };
    grid.validate()
        .map_err(|e| Error::config("grid", e.to_string()))?;
    if grid.max_abs() > spectral.box_half_length {
        return Err(Error::config(
            "grid",
            format!(
                "extent reaches |q| = {} beyond the box half length {}",
                grid.max_abs(),
                spectral.box_half_length
            ),
        ));
    }
    if let Some(w) = potential.wall() {
        if grid.max_abs() > w - 2.0 * grid.step() {
            return Err(Error::config(
                "grid",
                "must stay two grid steps inside the square-well walls",
            ));
        }
    }

    // analysis
    let ra = raw.analysis.unwrap_or_default();
    let analysis = AnalysisConfig {
        crest_window: ra
            .crest_window
            .map(|w| positive("analysis.crest_window", w))
            .transpose()?,
        crest_window_fraction: positive(
            "analysis.crest_window_fraction",
            ra.crest_window_fraction
                .unwrap_or(DEFAULT_CREST_WINDOW_FRACTION),
        )?,
        crest_samples: match ra.crest_samples.unwrap_or(DEFAULT_CREST_SAMPLES) {
            n if n >= 2 => n,
            n => {
                return Err(Error::config(
                    "analysis.crest_samples",
                    format!("need at least 2, got {n}"),
                ))
            }
        },
        wall_margin: {
            let m = ra.wall_margin.unwrap_or(DEFAULT_WALL_MARGIN);
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::config(
                    "analysis.wall_margin",
                    format!("must be non-negative, got {m}"),
                ));
            }
            m
        },
    };

    // output
    let ro = raw.output.unwrap_or_default();
    let format_version = ro
        .format_version
        .unwrap_or_else(|| FORMAT_VERSION.to_string());
    if format_version != FORMAT_VERSION {
        return Err(Error::config(
            "output.format_version",
            format!("unsupported `{format_version}` (this build writes {FORMAT_VERSION})"),
        ));
    }
    let output = OutputConfig {
        directory: ro.directory.unwrap_or_else(|| PathBuf::from("out")),
        format_version,
        mode: ro.mode.unwrap_or(OutputMode::Full),
    };

    Ok(RunConfig {
        potential,
        spectral,
        packet,
        classical,
        bohmian,
        grid,
        analysis,
        output,
    })
}

impl RunConfig {
    /// The configuration with every default filled in, as TOML.
    pub fn echo(&self) -> String {
        let (family, zeta, alpha, d, values) = match &self.packet.family {
            CoefficientFamily::Coherent { zeta } => ("coherent", Some(*zeta), None, None, None),
            CoefficientFamily::NWeightedCoherent { zeta } => {
                ("n_weighted_coherent", Some(*zeta), None, None, None)
            }
            CoefficientFamily::GaussianProjection { alpha, d } => {
                ("gaussian_projection", None, Some(*alpha), Some(*d), None)
            }
            CoefficientFamily::Explicit { values } => {
                ("explicit", None, None, None, Some(values.clone()))
            }
        };
        let ic = self.classical.ic;
        let raw = RawConfig {
            potential: Some(RawPotential {
                kind: Some(self.potential.kind()),
                l: self.potential.params().get("L").copied(),
            }),
            spectral: Some(RawSpectral {
                box_half_length: Some(self.spectral.box_half_length),
                n_basis_per_parity: Some(self.spectral.n_basis_per_parity),
                quadrature_order: Some(self.spectral.quadrature_order),
                n_states: Some(self.spectral.n_states),
                sign_convention: Some(self.spectral.sign_convention),
            }),
            packet: Some(RawPacket {
                family: Some(family.to_string()),
                zeta,
                alpha,
                d,
                values,
                n_max: Some(self.packet.n_max),
            }),
            classical: Some(RawClassical {
                mode: Some(self.classical.mode),
                u0: ic.map(|c| c.u0),
                udot0: ic.map(|c| c.udot0),
                vdot0: ic.map(|c| c.vdot0),
                ridge_min: Some(self.classical.ridge_min),
                ridge_max: Some(self.classical.ridge_max),
                speed: Some(self.classical.speed),
                periods: Some(self.classical.periods),
                t_end: self.classical.t_end,
                h: Some(self.classical.h),
            }),
            bohmian: Some(RawBohmian {
                kappa: Some(self.bohmian.kappa),
                node_epsilon: Some(self.bohmian.node_epsilon),
                starts: Some(self.bohmian.starts.clone()),
                periods: Some(self.bohmian.periods),
                t_end: self.bohmian.t_end,
                h: Some(self.bohmian.h),
            }),
            grid: Some(RawGrid {
                umin: Some(self.grid.umin),
                umax: Some(self.grid.umax),
                nu: Some(self.grid.nu),
                vmin: Some(self.grid.vmin),
                vmax: Some(self.grid.vmax),
                nv: Some(self.grid.nv),
            }),
            analysis: Some(RawAnalysis {
                crest_window: self.analysis.crest_window,
                crest_window_fraction: Some(self.analysis.crest_window_fraction),
                crest_samples: Some(self.analysis.crest_samples),
                wall_margin: Some(self.analysis.wall_margin),
            }),
            output: Some(RawOutput {
                directory: Some(self.output.directory.clone()),
                format_version: Some(self.output.format_version.clone()),
                mode: Some(self.output.mode),
            }),
        };
        toml::to_string(&raw).expect("config serialises")
    }

    /// Flat `section.key = value` view of [`Self::echo`], for diffing.
    pub fn flat(&self) -> BTreeMap<String, String> {
        let doc: toml::Table = toml::from_str(&self.echo()).expect("echo parses");
        let mut out = BTreeMap::new();
        for (section, body) in doc {
            if let toml::Value::Table(t) = body {
                for (k, v) in t {
                    out.insert(format!("{section}.{k}"), v.to_string());
                }
            }
        }
        out
    }
}
