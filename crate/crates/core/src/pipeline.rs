//! Stage orchestration and output files.
//!
//! Every command collects its outputs in memory, then writes them together
//! with `config.echo.toml` and a `manifest.csv` listing each file's size and
//! SHA-256. Nothing time- or host-dependent is written, so reruns of the
//! same configuration are byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::analysis::{
    axis_ridge, crest_offset, density, orbit_deviation, pde_residual, q_suppression,
    quantum_potential, CrestReport, OrbitDeviation, ResidualReport, SuppressionReport,
};
use crate::bohmian::GuidanceField;
use crate::classical::{integrate, integrate_periods, period, ClassicalIC, PeriodReport};
use crate::config::{ClassicalMode, OutputMode, RunConfig, ECHO_FILE};
use crate::eigensolve::{solve, EigenSystem};
use crate::error::{Error, Result, StageExt};
use crate::field::fmt_f64;
use crate::packet::{coefficients, WavePacket};
use crate::trajectory::Trajectory;

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const MANIFEST_TAG: &str = "wavecorr-manifest-v1";

/// Periods integrated for the period estimate when the requested run is
/// shorter.
const PERIOD_PROBE: f64 = 2.25;

/// CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eigen,
    Packet,
    Classical,
    Bohmian,
    Residual,
    Compare,
    Run,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Packet => "packet",
            Command::Classical => "classical",
            Command::Bohmian => "bohmian",
            Command::Residual => "residual",
            Command::Compare => "compare",
            Command::Run => "run",
        }
    }
}

/// Files produced by a command, in write order.
#[derive(Debug, Default, Clone)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn push(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_slice())
    }

    /// Manifest over all files collected so far.
    pub fn manifest(&self) -> Manifest {
        let mut entries: Vec<ManifestEntry> = self
            .files
            .iter()
            .map(|(name, bytes)| ManifestEntry {
                name: name.clone(),
                bytes: bytes.len(),
                sha256: sha256_hex(bytes),
            })
            .collect();
        entries.sort_by(|a, b| a.name.cmp(&b.name));
        Manifest { entries }
    }

    /// Writes every file and the manifest into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Manifest> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        let manifest = self.manifest();
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, manifest.to_csv()).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# format={MANIFEST_TAG}\nfile,bytes,sha256\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{}", e.name, e.bytes, e.sha256);
        }
        out
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn eigen_csv(sys: &EigenSystem) -> String {
    let mut out = String::from("n,parity,E_n,origin_value_or_slope,boundary_decay\n");
    for s in sys.states() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.n,
            s.parity,
            fmt_f64(s.energy),
            fmt_f64(s.origin_datum()),
            fmt_f64(s.boundary_decay)
        );
    }
    out
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::with_capacity(tr.samples.len() * 170 + 32);
    out.push_str("t,u,v,udot,vdot,Eu,Ev\n");
    for s in &tr.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.u),
            fmt_f64(s.v),
            fmt_f64(s.udot),
            fmt_f64(s.vdot),
            fmt_f64(s.e_u),
            fmt_f64(s.e_v)
        );
    }
    out
}

/// Name of the `k`-th Bohmian trajectory file out of `count`.
pub fn bohmian_file(k: usize, count: usize) -> String {
    if count == 1 {
        "bohmian.csv".to_string()
    } else {
        format!("bohmian_{k}.csv")
    }
}

/// The classical run matched to a packet.
#[derive(Debug, Clone)]
pub struct ClassicalRun {
    pub ic: ClassicalIC,
    pub trajectory: Trajectory,
    pub period: PeriodReport,
}

impl ClassicalRun {
    /// One period starting at `t = 0`.
    pub fn one_period(&self) -> Trajectory {
        self.trajectory
            .window(0.0, self.period.period + 0.5 * self.trajectory.step)
    }
}

/// All correspondence diagnostics of one configuration.
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub classical: ClassicalRun,
    pub bohmian: Vec<Trajectory>,
    /// First Bohmian trajectory against one classical period.
    pub deviation: Option<OrbitDeviation>,
    pub crest: CrestReport,
    pub suppression: SuppressionReport,
    pub residual: ResidualReport,
    pub tail_ratio: f64,
}

impl Correspondence {
    pub fn to_csv(&self) -> String {
        let c = &self.classical;
        let mut rows: Vec<(&str, String)> = vec![
            ("u0", fmt_f64(c.ic.u0)),
            ("udot0", fmt_f64(c.ic.udot0)),
            ("vdot0", fmt_f64(c.ic.vdot0)),
            ("energy", fmt_f64(c.trajectory.first().e_u)),
            ("period", fmt_f64(c.period.period)),
            (
                "quarter_shift_defect",
                fmt_f64(c.period.quarter_shift_defect),
            ),
            (
                "classical_energy_drift",
                fmt_f64(c.trajectory.energy_drift()),
            ),
            ("crest_mean_steps", fmt_f64(self.crest.mean_steps())),
            ("crest_max_steps", fmt_f64(self.crest.max_steps())),
            ("crest_boundary_hits", self.crest.boundary_hits.to_string()),
            ("crest_samples", self.crest.samples.len().to_string()),
            ("q_median_ratio", fmt_f64(self.suppression.median_ratio)),
            (
                "q_median_over_max_dv",
                fmt_f64(self.suppression.median_q_over_max_dv),
            ),
            ("q_masked", self.suppression.masked.to_string()),
            (
                "residual_analytic_max_relative",
                fmt_f64(self.residual.max_relative_analytic()),
            ),
            (
                "residual_fd_max_relative",
                fmt_f64(self.residual.max_relative_fd()),
            ),
            ("tail_ratio", fmt_f64(self.tail_ratio)),
        ];
        if let Some(d) = &self.deviation {
            rows.push(("bohmian_max_deviation_relative", fmt_f64(d.max_relative())));
            rows.push(("bohmian_mean_deviation", fmt_f64(d.mean_distance)));
        }
        if let Some(b) = self.bohmian.first() {
            rows.push(("bohmian_termination", b.termination.label().to_string()));
            rows.push(("bohmian_duration", fmt_f64(b.duration())));
        }
        let mut out = String::from("metric,value\n");
        for (k, v) in rows {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}

/// A configuration together with its solved eigensystem.
#[derive(Debug)]
pub struct Session {
    pub config: RunConfig,
    pub system: EigenSystem,
}

impl Session {
    pub fn new(config: RunConfig) -> Result<Self> {
        let system = solve(&config.potential, &config.spectral).stage("eigen")?;
        Ok(Self { config, system })
    }

    pub fn packet(&self) -> Result<WavePacket<'_>> {
        coefficients(&self.config.packet, &self.system).stage("packet")
    }

    /// Initial conditions: explicit, or from the `u`-axis ridge.
    pub fn classical_ic(&self, packet: &WavePacket<'_>) -> Result<ClassicalIC> {
        let c = &self.config.classical;
        let pot = &self.config.potential;
        match c.mode {
            ClassicalMode::Explicit => Ok(c.ic.expect("explicit mode carries initial conditions")),
            ClassicalMode::AutoFromRidge => {
                let samples = ((c.ridge_max - c.ridge_min) / 0.005).ceil().max(16.0) as usize;
                let u0 =
                    axis_ridge(packet, c.ridge_min, c.ridge_max, samples).stage("classical")?;
                if pot.is_square_well() {
                    Ok(ClassicalIC {
                        u0,
                        udot0: -c.speed,
                        vdot0: c.speed,
                    })
                } else {
                    ClassicalIC::equal_energy(pot, u0).stage("classical")
                }
            }
        }
    }

    pub fn classical(&self, packet: &WavePacket<'_>) -> Result<ClassicalRun> {
        let c = &self.config.classical;
        let pot = &self.config.potential;
        let ic = self.classical_ic(packet)?;
        let trajectory = match c.t_end {
            Some(t) => integrate(pot, &ic, t, c.h),
            None => integrate_periods(pot, &ic, c.periods, c.h),
        }
        .stage("classical")?;
        // two full periods give a period average; shorter runs get a probe
        let period = match period(&trajectory) {
            Ok(p) if p.crossings.len() >= 3 => Ok(p),
            _ => integrate_periods(pot, &ic, PERIOD_PROBE, c.h).and_then(|tr| period(&tr)),
        }
        .stage("classical")?;
        Ok(ClassicalRun {
            ic,
            trajectory,
            period,
        })
    }

    pub fn bohmian(
        &self,
        packet: &WavePacket<'_>,
        classical: &ClassicalRun,
    ) -> Result<Vec<Trajectory>> {
        let b = &self.config.bohmian;
        let field = GuidanceField::new(packet.clone())
            .with_kappa(b.kappa)
            .with_node_epsilon(b.node_epsilon);
        let t_end = b.t_end.unwrap_or(b.periods * classical.period.period);
        let starts = if b.starts.is_empty() {
            vec![[classical.ic.u0, 0.0]]
        } else {
            b.starts.clone()
        };
        starts
            .iter()
            .map(|s| field.integrate((s[0], s[1]), t_end, b.h))
            .collect::<Result<Vec<_>>>()
            .stage("bohmian")
    }

    /// Crest offsets over one classical period. In the square well the
    /// orbit samples within `wall_margin` of a wall are skipped.
    pub fn crest(&self, packet: &WavePacket<'_>, classical: &ClassicalRun) -> Result<CrestReport> {
        let a = &self.config.analysis;
        let field = density(packet, &self.config.grid).stage("analysis")?;
        let mut orbit = classical.one_period().decimate(a.crest_samples);
        if let Some(w) = self.config.potential.wall() {
            let limit = w - a.wall_margin;
            orbit
                .samples
                .retain(|s| s.u.abs() <= limit && s.v.abs() <= limit);
        }
        let window = a
            .crest_window
            .unwrap_or(a.crest_window_fraction * classical.ic.u0.abs());
        crest_offset(&field, &orbit, window).stage("analysis")
    }

    pub fn correspondence(&self) -> Result<Correspondence> {
        let packet = self.packet()?;
        let classical = self.classical(&packet)?;
        let bohmian = self.bohmian(&packet, &classical)?;
        let orbit = classical.one_period();
        let deviation = bohmian
            .first()
            .map(|b| orbit_deviation(b, &orbit, classical.ic.u0.abs()));
        let crest = self.crest(&packet, &classical)?;
        let suppression =
            q_suppression(&packet, &orbit, self.config.bohmian.node_epsilon).stage("analysis")?;
        let residual = pde_residual(&packet, &self.config.grid).stage("analysis")?;
        Ok(Correspondence {
            tail_ratio: packet.tail_ratio(),
            classical,
            bohmian,
            deviation,
            crest,
            suppression,
            residual,
        })
    }
}

/// Runs `cmd` and returns the files it produces (config echo included,
/// manifest not yet).
pub fn execute(cmd: Command, config: &RunConfig) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    let session = Session::new(config.clone())?;
    let eigen_only = cmd == Command::Eigen
        || (cmd == Command::Run && config.output.mode == OutputMode::EigenOnly);
    if eigen_only || cmd == Command::Run {
        out.push("eigen.csv", eigen_csv(&session.system));
    }
    if eigen_only {
        out.push(ECHO_FILE, config.echo());
        return Ok(out);
    }

    let packet = session.packet()?;
    match cmd {
        Command::Eigen => {}
        Command::Packet => {
            let field = density(&packet, &config.grid).stage("packet")?;
            out.push("density.field", field.to_text());
        }
        Command::Classical => {
            let run = session.classical(&packet)?;
            out.push("classical.csv", trajectory_csv(&run.trajectory));
            out.push("classical_summary.csv", classical_summary(&run));
        }
        Command::Bohmian => {
            let run = session.classical(&packet)?;
            let trs = session.bohmian(&packet, &run)?;
            for (k, tr) in trs.iter().enumerate() {
                out.push(bohmian_file(k, trs.len()), trajectory_csv(tr));
            }
        }
        Command::Residual => {
            let res = pde_residual(&packet, &config.grid).stage("analysis")?;
            let q = quantum_potential(&packet, &config.grid, config.bohmian.node_epsilon)
                .stage("analysis")?;
            out.push("residual.field", res.analytic.to_text());
            out.push("residual_fd.field", res.finite_difference.to_text());
            out.push("quantum_potential.field", q.to_text());
            out.push(
                "residual_summary.csv",
                format!(
                    "scale,analytic_max_relative,fd_max_relative,q_masked\n{},{},{},{}\n",
                    fmt_f64(res.scale),
                    fmt_f64(res.max_relative_analytic()),
                    fmt_f64(res.max_relative_fd()),
                    q.masked()
                ),
            );
        }
        Command::Compare | Command::Run => {
            let corr = session.correspondence()?;
            if cmd == Command::Run {
                let field = density(&packet, &config.grid).stage("packet")?;
                out.push("density.field", field.to_text());
                out.push("classical.csv", trajectory_csv(&corr.classical.trajectory));
                for (k, tr) in corr.bohmian.iter().enumerate() {
                    out.push(bohmian_file(k, corr.bohmian.len()), trajectory_csv(tr));
                }
            }
            out.push("crest.csv", corr.crest.to_csv());
            out.push("crest_summary.csv", corr.crest.summary_csv());
            out.push("correspondence.csv", corr.to_csv());
        }
    }
    out.push(ECHO_FILE, config.echo());
    Ok(out)
}

fn classical_summary(run: &ClassicalRun) -> String {
    format!(
        "u0,udot0,vdot0,period,quarter_shift_defect,energy_drift\n{},{},{},{},{},{}\n",
        fmt_f64(run.ic.u0),
        fmt_f64(run.ic.udot0),
        fmt_f64(run.ic.vdot0),
        fmt_f64(run.period.period),
        fmt_f64(run.period.quarter_shift_defect),
        fmt_f64(run.trajectory.energy_drift())
    )
}

/// Runs `cmd`, writes its outputs to `dir` (default: the configured output
/// directory) and returns the manifest.
pub fn run_command(cmd: Command, config: &RunConfig, dir: Option<&Path>) -> Result<Manifest> {
    let artifacts = execute(cmd, config)?;
    let dir: PathBuf = dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output.directory.clone());
    artifacts.write(&dir).stage("output")
}

/// The full pipeline.
pub fn run_pipeline(config: &RunConfig) -> Result<Manifest> {
    run_command(Command::Run, config, None)
}
