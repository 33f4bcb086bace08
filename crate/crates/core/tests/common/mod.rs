//! Test-side oracles and helpers, independent of the library numerics.
#![allow(dead_code)]

use std::path::PathBuf;

use wavecorr::config::{load_config, RunConfig};

pub fn recipe_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../recipes")
        .join(format!("{name}.toml"))
}

pub fn recipe(name: &str) -> RunConfig {
    load_config(&recipe_path(name)).unwrap_or_else(|e| panic!("recipe {name}: {e}"))
}

pub const SMOOTH_RECIPES: [&str; 5] = [
    "harmonic_zeta3",
    "quartic_zeta4",
    "double_well_zeta3",
    "gauss_exp_zeta3",
    "cosh_zeta4",
];

pub const ALL_RECIPES: [&str; 8] = [
    "harmonic_zeta3",
    "quartic_zeta4",
    "double_well_zeta3",
    "gauss_exp_zeta3",
    "cosh_zeta4",
    "square_well_d1.5",
    "square_well_d2.5",
    "square_well_d3.5",
];

/// Shoots `ψ'' = (q⁴ − E)ψ` outward from `ψ(0) = 1, ψ'(0) = 0` and returns
/// `ψ(q_max)`. Below the ground energy the solution blows up positive,
/// above it crosses zero first.
fn quartic_shot(e: f64, q_max: f64, steps: usize) -> f64 {
    let h = q_max / steps as f64;
    let f = |q: f64, y: [f64; 2]| [y[1], (q * q * q * q - e) * y[0]];
    let mut y = [1.0, 0.0];
    for k in 0..steps {
        let q = k as f64 * h;
        let k1 = f(q, y);
        let k2 = f(
            q + 0.5 * h,
            [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]],
        );
        let k3 = f(
            q + 0.5 * h,
            [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]],
        );
        let k4 = f(q + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        if y[0] < 0.0 {
            return -1.0;
        }
        if y[0] > 1e6 {
            return 1.0;
        }
    }
    y[0].signum()
}

/// Ground energy of `−ψ'' + q⁴ψ = Eψ` by shooting and bisection.
pub fn quartic_ground_energy_oracle() -> f64 {
    let (mut lo, mut hi) = (0.5, 1.5);
    assert!(quartic_shot(lo, 6.0, 60_000) > 0.0);
    assert!(quartic_shot(hi, 6.0, 60_000) < 0.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if quartic_shot(mid, 6.0, 60_000) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Period of `ü = −2V'(u)` for `V = u⁴` at amplitude `u0`, from the action
/// integral `T = 4∫₀^{u0} du / (2√(V(u0) − V(u)))`. With `u = u0 sin θ` the
/// integrand becomes `1/(2 u0 √(1 + sin²θ))`, smooth on `[0, π/2]`.
pub fn quartic_period_oracle(u0: f64) -> f64 {
    let n = 4000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let g = |th: f64| 1.0 / (1.0 + th.sin().powi(2)).sqrt();
    let mut s = g(0.0) + g(std::f64::consts::FRAC_PI_2);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    let integral = s * h / 3.0;
    4.0 / (2.0 * u0) * integral
}

/// `½ [e^{−α(u−d)²} + e^{−α(u+d)²}]`.
pub fn gaussian_pair(alpha: f64, d: f64, u: f64) -> f64 {
    0.5 * ((-alpha * (u - d).powi(2)).exp() + (-alpha * (u + d).powi(2)).exp())
}
