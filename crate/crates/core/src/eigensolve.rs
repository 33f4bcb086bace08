//! Parity-separated eigenstates of `−ψ″ + (V(q) − V(0)) ψ = E ψ`.
//!
//! Smooth potentials are diagonalized in the eigenbasis of a hard-wall box on
//! `[−B, B]`: cosines `cos((2j+1)πq/2B)/√B` for the even block and sines
//! `sin((j+1)πq/B)/√B` for the odd block. The kinetic operator is diagonal in
//! this basis, the potential matrix is assembled by Gauss–Legendre quadrature
//! and each block is diagonalized on its own, so parity labels are structural.
//!
//! The square well `[−L/2, L/2]` *is* that box with `B = L/2`, so its states
//! are single basis functions and no matrix is formed.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{PotentialKind, PotentialSpec};
use crate::quadrature::GaussLegendre;

/// Largest tolerated `max|ψ|` over the outer tenth of the box relative to the
/// global `max|ψ|`.
pub const BOUNDARY_DECAY_LIMIT: f64 = 1e-8;

/// Number of sample points on `[0, B]` used for sign fixing and decay checks.
const PROFILE_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_index(i: usize) -> Self {
        if i % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the overall sign of each eigenfunction is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `Origin` for the square well, `OuterLobe` otherwise.
    #[default]
    Auto,
    /// The lobe nearest the right edge of the domain is positive (the Hermite
    /// convention for the oscillator).
    OuterLobe,
    /// `ψ(0) > 0` for even states, `ψ′(0) > 0` for odd states.
    Origin,
}

impl SignConvention {
    pub fn resolve(self, spec: &PotentialSpec) -> SignConvention {
        match self {
            SignConvention::Auto if spec.is_square_well() => SignConvention::Origin,
            SignConvention::Auto => SignConvention::OuterLobe,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub box_half_length: f64,
    pub n_basis_per_parity: usize,
    pub quadrature_order: usize,
    pub n_states: usize,
    #[serde(default)]
    pub sign_convention: SignConvention,
}

impl SpectralConfig {
    pub const DEFAULT_BASIS: usize = 120;
    pub const DEFAULT_QUADRATURE: usize = 256;
    pub const DEFAULT_STATES: usize = 40;

    /// Reference configuration for each potential.
    pub fn default_for(spec: &PotentialSpec) -> Self {
        let box_half_length = match spec.kind() {
            PotentialKind::SquareWell => spec.wall().expect("square well has a width"),
            PotentialKind::Harmonic => 18.0,
            PotentialKind::Quartic | PotentialKind::DoubleWell | PotentialKind::GaussExp => 10.0,
            PotentialKind::Cosh => 12.0,
        };
        Self {
            box_half_length,
            n_basis_per_parity: Self::DEFAULT_BASIS,
            quadrature_order: Self::DEFAULT_QUADRATURE,
            n_states: Self::DEFAULT_STATES,
            sign_convention: SignConvention::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidSpectral(m));
        if !(self.box_half_length.is_finite() && self.box_half_length > 0.0) {
            return fail(format!(
                "box_half_length must be positive, got {}",
                self.box_half_length
            ));
        }
        if self.n_basis_per_parity < 8 {
            return fail(format!(
                "n_basis_per_parity must be at least 8, got {}",
                self.n_basis_per_parity
            ));
        }
        if self.quadrature_order < 64 {
            return fail(format!(
                "quadrature_order must be at least 64, got {}",
                self.quadrature_order
            ));
        }
        if self.n_states == 0 || self.n_states > self.n_basis_per_parity {
            return fail(format!(
                "n_states must lie in 1..={}, got {}",
                self.n_basis_per_parity, self.n_states
            ));
        }
        Ok(())
    }
}

/// One retained eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenState {
    /// Quantum number. Starts at 0 for smooth potentials and at 1 for the
    /// square well, whose ground state is `cos(πq/L)`.
    pub n: usize,
    pub energy: f64,
    pub parity: Parity,
    /// Coefficients in the box basis of this state's parity.
    pub coeffs: Vec<f64>,
    /// `ψ(0)`; zero for odd states.
    pub origin_value: f64,
    /// `ψ′(0)`; zero for even states.
    pub origin_slope: f64,
    /// `max|ψ|` on the outer tenth of the box over `max|ψ|`.
    pub boundary_decay: f64,
}

impl EigenState {
    /// `ψ(0)` for even states, `ψ′(0)` for odd states.
    pub fn origin_datum(&self) -> f64 {
        match self.parity {
            Parity::Even => self.origin_value,
            Parity::Odd => self.origin_slope,
        }
    }
}

/// Value and first two derivatives of a state at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StateJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Hard-wall box basis on `[−B, B]` with `per_parity` functions of each parity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBasis {
    half_length: f64,
    per_parity: usize,
}

impl BoxBasis {
    pub fn new(half_length: f64, per_parity: usize) -> Self {
        Self {
            half_length,
            per_parity,
        }
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn per_parity(&self) -> usize {
        self.per_parity
    }

    /// Harmonic multiple `m` in `cos(mθ)` / `sin(mθ)` with `θ = πq/2B`.
    fn multiple(parity: Parity, j: usize) -> usize {
        match parity {
            Parity::Even => 2 * j + 1,
            Parity::Odd => 2 * j + 2,
        }
    }

    pub fn wavenumber(&self, parity: Parity, j: usize) -> f64 {
        Self::multiple(parity, j) as f64 * PI / (2.0 * self.half_length)
    }

    /// Basis function `j` of `parity` at `q`.
    pub fn function(&self, parity: Parity, j: usize, q: f64) -> f64 {
        let k = self.wavenumber(parity, j);
        let s = 1.0 / self.half_length.sqrt();
        match parity {
            Parity::Even => s * (k * q).cos(),
            Parity::Odd => s * (k * q).sin(),
        }
    }

    /// `cos(mθ)` and `sin(mθ)` for `m = 0..=2·per_parity`.
    fn fill_table(&self, q: f64, table: &mut HarmonicTable) {
        let theta = PI * q / (2.0 * self.half_length);
        let m_max = 2 * self.per_parity;
        table.cos.clear();
        table.sin.clear();
        table.cos.reserve(m_max + 1);
        table.sin.reserve(m_max + 1);
        let (s1, c1) = theta.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        for m in 0..=m_max {
            if m % 32 == 0 {
                // reseed to keep the rotation recurrence from drifting
                let (sm, cm) = (m as f64 * theta).sin_cos();
                c = cm;
                s = sm;
            }
            table.cos.push(c);
            table.sin.push(s);
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
    }
}

#[derive(Debug, Default, Clone)]
struct HarmonicTable {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// Retained eigenstates of one potential, ordered by energy.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    potential: PotentialSpec,
    basis: BoxBasis,
    states: Vec<EigenState>,
    sign_convention: SignConvention,
}

impl EigenSystem {
    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn basis(&self) -> &BoxBasis {
        &self.basis
    }

    pub fn states(&self) -> &[EigenState] {
        &self.states
    }

    pub fn sign_convention(&self) -> SignConvention {
        self.sign_convention
    }

    /// Retained states of each parity.
    pub fn n_per_parity(&self) -> usize {
        self.states.len() / 2
    }

    /// Quantum number of the lowest state.
    pub fn first_label(&self) -> usize {
        self.states[0].n
    }

    pub fn last_label(&self) -> usize {
        self.states[self.states.len() - 1].n
    }

    /// Half width of the domain the states live on.
    pub fn half_length(&self) -> f64 {
        self.basis.half_length
    }

    pub fn contains(&self, q: f64) -> bool {
        q.abs() <= self.basis.half_length * (1.0 + 4.0 * f64::EPSILON)
    }

    /// Position of the state with quantum number `n` in [`Self::states`].
    pub fn index_of(&self, n: usize) -> Result<usize> {
        let first = self.first_label();
        if n < first || n > self.last_label() {
            return Err(Error::StateOutOfRange {
                n,
                first,
                last: self.last_label(),
            });
        }
        Ok(n - first)
    }

    pub fn state(&self, n: usize) -> Result<&EigenState> {
        Ok(&self.states[self.index_of(n)?])
    }

    fn check_point(&self, q: f64) -> Result<()> {
        if self.contains(q) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                q,
                half_width: self.basis.half_length,
            })
        }
    }

    pub fn eval_state(&self, n: usize, q: f64) -> Result<f64> {
        Ok(self.state_jet(n, q)?.value)
    }

    pub fn eval_state_deriv(&self, n: usize, q: f64) -> Result<f64> {
        Ok(self.state_jet(n, q)?.d1)
    }

    pub fn eval_state_second_deriv(&self, n: usize, q: f64) -> Result<f64> {
        Ok(self.state_jet(n, q)?.d2)
    }

    pub fn state_jet(&self, n: usize, q: f64) -> Result<StateJet> {
        let i = self.index_of(n)?;
        self.check_point(q)?;
        let mut table = HarmonicTable::default();
        self.basis.fill_table(q, &mut table);
        Ok(self.jet_from_table(&self.states[i], &table))
    }

    /// Jets of the lowest `count` states at `q`, written into `out`.
    pub fn jets_into(&self, q: f64, count: usize, out: &mut Vec<StateJet>) -> Result<()> {
        self.check_point(q)?;
        let count = count.min(self.states.len());
        let mut table = HarmonicTable::default();
        self.basis.fill_table(q, &mut table);
        out.clear();
        out.extend(
            self.states[..count]
                .iter()
                .map(|s| self.jet_from_table(s, &table)),
        );
        Ok(())
    }

    pub fn jets(&self, q: f64, count: usize) -> Result<Vec<StateJet>> {
        let mut out = Vec::with_capacity(count);
        self.jets_into(q, count, &mut out)?;
        Ok(out)
    }

    fn jet_from_table(&self, state: &EigenState, table: &HarmonicTable) -> StateJet {
        let k0 = PI / (2.0 * self.basis.half_length);
        let norm = 1.0 / self.basis.half_length.sqrt();
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        match state.parity {
            Parity::Even => {
                for (j, &c) in state.coeffs.iter().enumerate() {
                    let m = 2 * j + 1;
                    let k = k0 * m as f64;
                    let (cm, sm) = (table.cos[m], table.sin[m]);
                    v += c * cm;
                    d1 -= c * k * sm;
                    d2 -= c * k * k * cm;
                }
            }
            Parity::Odd => {
                for (j, &c) in state.coeffs.iter().enumerate() {
                    let m = 2 * j + 2;
                    let k = k0 * m as f64;
                    let (cm, sm) = (table.cos[m], table.sin[m]);
                    v += c * sm;
                    d1 += c * k * cm;
                    d2 -= c * k * k * sm;
                }
            }
        }
        StateJet {
            value: norm * v,
            d1: norm * d1,
            d2: norm * d2,
        }
    }

    /// `∫ (−ψ″ + (V − V(0))ψ − Eψ)² dq` over the box for the state `n`.
    pub fn galerkin_residual(&self, n: usize, quadrature_order: usize) -> Result<f64> {
        let state = self.state(n)?;
        let gl = GaussLegendre::new(quadrature_order);
        let b = self.basis.half_length;
        let v0 = self.potential.value_unchecked(0.0);
        let mut total = 0.0;
        for (q, w) in gl.on_interval(0.0, b) {
            let jet = self.state_jet(n, q)?;
            let r = -jet.d2 + (self.potential.value_unchecked(q) - v0) * jet.value
                - state.energy * jet.value;
            total += w * r * r;
        }
        // integrand is even
        Ok(2.0 * total)
    }
}

/// Computes the lowest `cfg.n_states` eigenpairs of each parity.
pub fn solve(spec: &PotentialSpec, cfg: &SpectralConfig) -> Result<EigenSystem> {
    cfg.validate()?;
    let sign_convention = cfg.sign_convention.resolve(spec);
    let mut system = if spec.is_square_well() {
        square_well_system(spec, cfg.n_states)
    } else {
        spectral_system(spec, cfg)?
    };
    system.sign_convention = sign_convention;
    fix_signs_and_profile(&mut system)?;
    if !spec.is_square_well() {
        if let Some(bad) = system
            .states
            .iter()
            .find(|s| !(s.boundary_decay < BOUNDARY_DECAY_LIMIT))
        {
            return Err(Error::BoundaryDecay {
                n: bad.n,
                decay: bad.boundary_decay,
                limit: BOUNDARY_DECAY_LIMIT,
            });
        }
    }
    Ok(system)
}

fn square_well_system(spec: &PotentialSpec, n_states: usize) -> EigenSystem {
    let wall = spec.wall().expect("square well has a width");
    let basis = BoxBasis::new(wall, n_states);
    let mut states = Vec::with_capacity(2 * n_states);
    for j in 0..n_states {
        for parity in [Parity::Even, Parity::Odd] {
            let mut coeffs = vec![0.0; n_states];
            coeffs[j] = 1.0;
            let k = basis.wavenumber(parity, j);
            states.push(EigenState {
                n: BoxBasis::multiple(parity, j),
                energy: k * k,
                parity,
                coeffs,
                origin_value: 0.0,
                origin_slope: 0.0,
                boundary_decay: 0.0,
            });
        }
    }
    EigenSystem {
        potential: spec.clone(),
        basis,
        states,
        sign_convention: SignConvention::Origin,
    }
}

fn spectral_system(spec: &PotentialSpec, cfg: &SpectralConfig) -> Result<EigenSystem> {
    let b = cfg.box_half_length;
    let nb = cfg.n_basis_per_parity;
    let basis = BoxBasis::new(b, nb);
    let gl = GaussLegendre::new(cfg.quadrature_order);
    let v0 = spec.value_unchecked(0.0);
    let points: Vec<(f64, f64)> = gl.on_interval(0.0, b).collect();
    let shifted: Vec<f64> = points
        .iter()
        .map(|&(q, _)| spec.value_unchecked(q) - v0)
        .collect();
    if let Some(bad) = shifted.iter().position(|v| !v.is_finite()) {
        return Err(Error::Eigen(format!(
            "potential is not finite at q = {}",
            points[bad].0
        )));
    }

    let mut blocks = Vec::with_capacity(2);
    for parity in [Parity::Even, Parity::Odd] {
        // phi[(i, j)] = sqrt(w_i) b_j(q_i)
        let phi = DMatrix::from_fn(points.len(), nb, |i, j| {
            let (q, w) = points[i];
            w.sqrt() * basis.function(parity, j, q)
        });
        let weighted = DMatrix::from_fn(points.len(), nb, |i, j| 2.0 * shifted[i] * phi[(i, j)]);
        let mut h = phi.transpose() * weighted;
        for j in 0..nb {
            let k = basis.wavenumber(parity, j);
            h[(j, j)] += k * k;
        }
        // symmetrize away rounding asymmetry before the solve
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
            .ok_or_else(|| Error::Eigen(format!("{parity} block did not converge")))?;
        let mut order: Vec<usize> = (0..nb).collect();
        order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
        let block: Vec<(f64, Vec<f64>)> = order[..cfg.n_states]
            .iter()
            .map(|&idx| {
                (
                    eig.eigenvalues[idx],
                    eig.eigenvectors.column(idx).iter().copied().collect(),
                )
            })
            .collect();
        if block.iter().any(|(e, _)| !e.is_finite()) {
            return Err(Error::Eigen(format!(
                "{parity} block has non-finite eigenvalues"
            )));
        }
        blocks.push(block);
    }

    let odd = blocks.pop().expect("two blocks");
    let even = blocks.pop().expect("two blocks");
    let mut states = Vec::with_capacity(2 * cfg.n_states);
    for (j, ((ee, ce), (eo, co))) in even.into_iter().zip(odd).enumerate() {
        states.push(EigenState {
            n: 2 * j,
            energy: ee,
            parity: Parity::Even,
            coeffs: ce,
            origin_value: 0.0,
            origin_slope: 0.0,
            boundary_decay: 0.0,
        });
        states.push(EigenState {
            n: 2 * j + 1,
            energy: eo,
            parity: Parity::Odd,
            coeffs: co,
            origin_value: 0.0,
            origin_slope: 0.0,
            boundary_decay: 0.0,
        });
    }
    // node theorem: even and odd levels interlace
    if let Some(w) = states.windows(2).find(|w| !(w[0].energy < w[1].energy)) {
        return Err(Error::Eigen(format!(
            "levels do not interlace: E_{} = {} >= E_{} = {}",
            w[0].n, w[0].energy, w[1].n, w[1].energy
        )));
    }
    Ok(EigenSystem {
        potential: spec.clone(),
        basis,
        states,
        sign_convention: SignConvention::OuterLobe,
    })
}

/// Applies the sign convention and fills origin data and boundary decay.
fn fix_signs_and_profile(system: &mut EigenSystem) -> Result<()> {
    let b = system.basis.half_length;
    let count = system.states.len();
    let mut jets = Vec::with_capacity(count);
    // profile[s][i] = ψ_s(q_i) on a uniform grid of [0, B]
    let mut profile = vec![Vec::with_capacity(PROFILE_SAMPLES + 1); count];
    for i in 0..=PROFILE_SAMPLES {
        let q = b * i as f64 / PROFILE_SAMPLES as f64;
        system.jets_into(q, count, &mut jets)?;
        for (s, jet) in jets.iter().enumerate() {
            profile[s].push(jet.value);
        }
    }
    system.jets_into(0.0, count, &mut jets)?;
    let origin = jets.clone();
    let outer_start = (0.9 * PROFILE_SAMPLES as f64).floor() as usize;

    for (s, state) in system.states.iter_mut().enumerate() {
        let values = &profile[s];
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(peak > 0.0) {
            return Err(Error::Eigen(format!("state n = {} vanishes", state.n)));
        }
        let outer = values[outer_start..]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        state.boundary_decay = outer / peak;

        let flip = match system.sign_convention {
            SignConvention::Origin | SignConvention::Auto => match state.parity {
                Parity::Even => origin[s].value < 0.0,
                Parity::Odd => origin[s].d1 < 0.0,
            },
            SignConvention::OuterLobe => {
                let last = values
                    .iter()
                    .rposition(|v| v.abs() >= 1e-3 * peak)
                    .expect("peak sample exists");
                values[last] < 0.0
            }
        };
        let sign = if flip { -1.0 } else { 1.0 };
        if flip {
            state.coeffs.iter_mut().for_each(|c| *c = -*c);
        }
        match state.parity {
            Parity::Even => {
                state.origin_value = sign * origin[s].value;
                state.origin_slope = 0.0;
            }
            Parity::Odd => {
                state.origin_value = 0.0;
                state.origin_slope = sign * origin[s].d1;
            }
        }
    }
    Ok(())
}
