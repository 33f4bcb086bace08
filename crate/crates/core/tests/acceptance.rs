//! Acceptance checks, one `PASS`/`FAIL` line per criterion. Criteria with
//! several parts print the parts indented below their line. Exits nonzero
//! if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use wavecorr::analysis::pde_residual;
use wavecorr::classical::{integrate_periods, period, ClassicalIC};
use wavecorr::eigensolve::{solve, Parity, SpectralConfig};
use wavecorr::field::GridSpec;
use wavecorr::packet::{coefficients, CoefficientFamily, CoefficientSpec};
use wavecorr::pipeline::{run_command, Command, Session};
use wavecorr::potentials::{PotentialKind, PotentialSpec};
use wavecorr::quadrature::GaussLegendre;

use common::*;

struct Part {
    name: String,
    pass: bool,
    detail: String,
}

impl Part {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

fn tag(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

type Parts = Result<Vec<Part>, String>;

fn square_well_spectrum() -> Parts {
    let t = Instant::now();
    let spec = PotentialSpec::square_well(10.0).map_err(|e| e.to_string())?;
    let sys = solve(&spec, &SpectralConfig::default_for(&spec)).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let mut worst = 0.0f64;
    for n in 1..=40 {
        let exact = (n * n) as f64 * PI * PI / 100.0;
        let e = sys.state(n).map_err(|e| e.to_string())?.energy;
        worst = worst.max(((e - exact) / exact).abs());
    }
    Ok(vec![
        Part::new(
            "E_n = n²π²/L², n ≤ 40",
            worst < 1e-12,
            format!("max rel err {worst:.2e}"),
        ),
        Part::new("runtime < 1 s", secs < 1.0, format!("{secs:.3} s")),
    ])
}

fn harmonic_spectrum() -> Parts {
    let t = Instant::now();
    let spec = PotentialSpec::smooth(PotentialKind::Harmonic);
    let sys = solve(&spec, &SpectralConfig::default_for(&spec)).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let mut worst = 0.0f64;
    for n in 0..=30 {
        let exact = (2 * n + 1) as f64;
        let e = sys.state(n).map_err(|e| e.to_string())?.energy;
        worst = worst.max(((e - exact) / exact).abs());
    }
    Ok(vec![
        Part::new(
            "E_n = 2n+1, n ≤ 30",
            worst < 1e-8,
            format!("max rel err {worst:.2e}"),
        ),
        Part::new("runtime < 2 s", secs < 2.0, format!("{secs:.3} s")),
    ])
}

fn quartic_ground_state() -> Parts {
    let spec = PotentialSpec::smooth(PotentialKind::Quartic);
    let sys = solve(&spec, &SpectralConfig::default_for(&spec)).map_err(|e| e.to_string())?;
    let e0 = sys.state(0).map_err(|e| e.to_string())?.energy;
    let oracle = quartic_ground_energy_oracle();
    let err = (e0 - oracle).abs();
    Ok(vec![Part::new(
        "E_0 vs shooting",
        err < 1e-6,
        format!("spectral {e0:.12} oracle {oracle:.12} diff {err:.1e}"),
    )])
}

fn orthonormality_and_parity() -> Parts {
    let mut parts = Vec::new();
    for kind in PotentialKind::SMOOTH {
        let spec = PotentialSpec::smooth(kind);
        let cfg = SpectralConfig::default_for(&spec);
        let sys = solve(&spec, &cfg).map_err(|e| e.to_string())?;
        let b = sys.half_length();
        let count = sys.states().len();
        let gl = GaussLegendre::new(cfg.quadrature_order);
        let panels = 16;
        let mut gram = vec![0.0; count * count];
        for p in 0..panels {
            let a = -b + 2.0 * b * p as f64 / panels as f64;
            for (q, w) in gl.on_interval(a, a + 2.0 * b / panels as f64) {
                let jets = sys.jets(q, count).map_err(|e| e.to_string())?;
                for m in 0..count {
                    for n in m..count {
                        gram[m * count + n] += w * jets[m].value * jets[n].value;
                    }
                }
            }
        }
        let mut ortho = 0.0f64;
        for m in 0..count {
            for n in m..count {
                let target = if m == n { 1.0 } else { 0.0 };
                ortho = ortho.max((gram[m * count + n] - target).abs());
            }
        }
        let mut purity = 0.0f64;
        let mut peak = vec![0.0f64; count];
        let mut defect = vec![0.0f64; count];
        for k in 0..=400 {
            let q = b * k as f64 / 400.0;
            let plus = sys.jets(q, count).map_err(|e| e.to_string())?;
            let minus = sys.jets(-q, count).map_err(|e| e.to_string())?;
            for (i, s) in sys.states().iter().enumerate() {
                let sign = if s.parity == Parity::Even { 1.0 } else { -1.0 };
                peak[i] = peak[i].max(plus[i].value.abs());
                defect[i] = defect[i].max((minus[i].value - sign * plus[i].value).abs());
            }
        }
        for i in 0..count {
            purity = purity.max(defect[i] / peak[i]);
        }
        parts.push(Part::new(
            format!("{kind} orthonormality"),
            ortho < 1e-8,
            format!("max |<m|n> - δ| {ortho:.2e} over {count} states"),
        ));
        parts.push(Part::new(
            format!("{kind} parity purity"),
            purity < 1e-10,
            format!("max |ψ(-q) ∓ ψ(q)| / max|ψ| {purity:.2e}"),
        ));
    }
    Ok(parts)
}

fn pde_residuals() -> Parts {
    let mut parts = Vec::new();
    for name in ALL_RECIPES {
        let cfg = recipe(name);
        let grid = cfg.grid;
        let s = Session::new(cfg).map_err(|e| e.to_string())?;
        let p = s.packet().map_err(|e| e.to_string())?;
        let r = pde_residual(&p, &grid)
            .map_err(|e| e.to_string())?
            .max_relative_analytic();
        parts.push(Part::new(
            format!("{name} analytic residual"),
            r < 1e-12,
            format!("{r:.2e}"),
        ));
    }

    // same interior points on three nested grids
    let spec = PotentialSpec::smooth(PotentialKind::Harmonic);
    let sys = solve(&spec, &SpectralConfig::default_for(&spec)).map_err(|e| e.to_string())?;
    let cs = CoefficientSpec::new(CoefficientFamily::Coherent { zeta: 3.0 }, 40);
    let p = coefficients(&cs, &sys).map_err(|e| e.to_string())?;
    let mut errs = Vec::new();
    for n in [41, 81, 161] {
        let grid = GridSpec::square(4.0, n);
        errs.push(
            pde_residual(&p, &grid)
                .map_err(|e| e.to_string())?
                .max_relative_fd(),
        );
    }
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let ok = ratios.iter().all(|r| (3.5..4.5).contains(r));
    parts.push(Part::new(
        "harmonic FD residual O(h²)",
        ok,
        format!(
            "errors {:.2e} {:.2e} {:.2e}, halving ratios {:.3} {:.3}",
            errs[0], errs[1], errs[2], ratios[0], ratios[1]
        ),
    ));
    Ok(parts)
}

fn classical_dynamics() -> Parts {
    let mut parts = Vec::new();
    for name in SMOOTH_RECIPES {
        let s = Session::new(recipe(name)).map_err(|e| e.to_string())?;
        let p = s.packet().map_err(|e| e.to_string())?;
        let ic = s.classical_ic(&p).map_err(|e| e.to_string())?;
        let pot = &s.config.potential;
        let tr = integrate_periods(pot, &ic, 3.0, 1e-3).map_err(|e| e.to_string())?;
        let drift = tr.energy_drift();
        parts.push(Part::new(
            format!("{} energy drift, 3 periods", pot.kind()),
            drift < 1e-8,
            format!("u0 {:.4} drift {drift:.2e}", ic.u0),
        ));
        if pot.kind() == PotentialKind::Harmonic {
            let d = period(&tr).map_err(|e| e.to_string())?.quarter_shift_defect;
            parts.push(Part::new(
                "harmonic v(t) = u(t - T/4)",
                d < 1e-6,
                format!("defect {d:.2e}"),
            ));
        }
    }
    let quartic = PotentialSpec::smooth(PotentialKind::Quartic);
    for u0 in [1.0, 3.0] {
        let ic = ClassicalIC::equal_energy(&quartic, u0).map_err(|e| e.to_string())?;
        let tr = integrate_periods(&quartic, &ic, 3.0, 1e-3).map_err(|e| e.to_string())?;
        let t = period(&tr).map_err(|e| e.to_string())?.period;
        let oracle = quartic_period_oracle(u0);
        let err = (t - oracle).abs();
        parts.push(Part::new(
            format!("quartic period vs action integral, u0 = {u0}"),
            err < 1e-6,
            format!("{t:.10} vs {oracle:.10}, diff {err:.1e}"),
        ));
    }
    Ok(parts)
}

fn square_well_reconstruction() -> Parts {
    let spec = PotentialSpec::square_well(10.0).map_err(|e| e.to_string())?;
    let sys = solve(&spec, &SpectralConfig::default_for(&spec)).map_err(|e| e.to_string())?;
    let gl = GaussLegendre::new(64);
    let mut parts = Vec::new();
    for d in [2.5, 3.5] {
        let cs = CoefficientSpec::new(CoefficientFamily::GaussianProjection { alpha: 10.0, d }, 40);
        let p = coefficients(&cs, &sys).map_err(|e| e.to_string())?;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..100 {
            let a = -5.0 + 0.1 * k as f64;
            for (u, w) in gl.on_interval(a, a + 0.1) {
                let exact = gaussian_pair(10.0, d, u);
                let got = p.evaluate(u, 0.0).map_err(|e| e.to_string())?.re;
                num += w * (got - exact).powi(2);
                den += w * exact * exact;
            }
        }
        let err = (num / den).sqrt();
        parts.push(Part::new(
            format!("α = 10, d = {d}"),
            err < 1e-3,
            format!("L2 rel err {err:.2e}"),
        ));
    }
    Ok(parts)
}

fn correspondence_suite() -> Parts {
    let t = Instant::now();
    let mut parts = Vec::new();
    for name in SMOOTH_RECIPES {
        let s = Session::new(recipe(name)).map_err(|e| e.to_string())?;
        let c = s.correspondence().map_err(|e| e.to_string())?;
        let (mean, max) = (c.crest.mean_steps(), c.crest.max_steps());
        parts.push(Part::new(
            format!("{name} crest"),
            mean < 2.0 && max < 5.0,
            format!(
                "mean {mean:.2} max {max:.2} grid steps ({} samples)",
                c.crest.samples.len()
            ),
        ));
        match &c.deviation {
            Some(d) => parts.push(Part::new(
                format!("{name} Bohmian orbit"),
                d.max_relative() < 0.05,
                format!(
                    "max deviation {:.3} of u0, {}",
                    d.max_relative(),
                    c.bohmian[0].termination.label()
                ),
            )),
            None => parts.push(Part::new(
                format!("{name} Bohmian orbit"),
                false,
                "no trajectory",
            )),
        }
        let q = c.suppression.median_ratio;
        parts.push(Part::new(
            format!("{name} quantum potential"),
            q < 0.1,
            format!("median |Q|/|V(u)-V(v)| {q:.3}"),
        ));
    }
    let secs = t.elapsed().as_secs_f64();
    parts.push(Part::new(
        "suite runtime < 2 min",
        secs < 120.0,
        format!("{secs:.1} s"),
    ));
    Ok(parts)
}

fn determinism() -> Parts {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for name in ALL_RECIPES {
        let cfg = recipe(name);
        let a = run_command(Command::Run, &cfg, Some(&tmp.path().join(name).join("a")))
            .map_err(|e| e.to_string())?;
        let b = run_command(Command::Run, &cfg, Some(&tmp.path().join(name).join("b")))
            .map_err(|e| e.to_string())?;
        parts.push(Part::new(
            name,
            a.to_csv() == b.to_csv(),
            format!("{} files", a.entries.len()),
        ));
    }
    Ok(parts)
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Parts); 9] = [
        (1, "square-well spectrum", square_well_spectrum),
        (2, "harmonic spectrum", harmonic_spectrum),
        (3, "quartic ground state", quartic_ground_state),
        (4, "orthonormality and parity", orthonormality_and_parity),
        (5, "hyperbolic residual", pde_residuals),
        (6, "classical dynamics", classical_dynamics),
        (7, "square-well reconstruction", square_well_reconstruction),
        (8, "correspondence suite", correspondence_suite),
        (9, "determinism", determinism),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let t = Instant::now();
        let result = check();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(parts) => {
                let pass = parts.iter().all(|p| p.pass);
                let good = parts.iter().filter(|p| p.pass).count();
                println!(
                    "criterion {id} {}  {title} ({good}/{} checks, {secs:.2} s)",
                    tag(pass),
                    parts.len()
                );
                for p in parts {
                    println!("    {} {}: {}", tag(p.pass), p.name, p.detail);
                }
                if !pass {
                    failed += 1;
                }
            }
            Err(e) => {
                println!("criterion {id} FAIL  {title}: error: {e}");
                failed += 1;
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
