//! Symmetric one-dimensional potentials.
//!
//! All potentials are dimensionless and even in `q`. The five smooth kinds are
//! shifted so that `V(0) = 0`:
//!
//! | kind          | V(q)               |
//! |---------------|--------------------|
//! | `harmonic`    | q²                 |
//! | `quartic`     | q⁴                 |
//! | `double_well` | −3q² + q⁴          |
//! | `gauss_exp`   | exp(q²/8) − 1      |
//! | `cosh`        | cosh(q) − 1        |
//!
//! `square_well` is zero on `[−L/2, L/2]` and infinite outside. It is
//! represented as a restriction of the domain rather than a large value.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    SquareWell,
    Harmonic,
    Quartic,
    DoubleWell,
    GaussExp,
    Cosh,
}

impl PotentialKind {
    pub const ALL: [PotentialKind; 6] = [
        PotentialKind::SquareWell,
        PotentialKind::Harmonic,
        PotentialKind::Quartic,
        PotentialKind::DoubleWell,
        PotentialKind::GaussExp,
        PotentialKind::Cosh,
    ];

    /// The five closed-form confining potentials.
    pub const SMOOTH: [PotentialKind; 5] = [
        PotentialKind::Harmonic,
        PotentialKind::Quartic,
        PotentialKind::DoubleWell,
        PotentialKind::GaussExp,
        PotentialKind::Cosh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PotentialKind::SquareWell => "square_well",
            PotentialKind::Harmonic => "harmonic",
            PotentialKind::Quartic => "quartic",
            PotentialKind::DoubleWell => "double_well",
            PotentialKind::GaussExp => "gauss_exp",
            PotentialKind::Cosh => "cosh",
        }
    }

    /// Parameter names accepted by this kind.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            PotentialKind::SquareWell => &["L"],
            _ => &[],
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PotentialKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidPotential(format!("unknown potential kind `{s}`")))
    }
}

/// A symmetric potential together with its named parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    kind: PotentialKind,
    params: BTreeMap<String, f64>,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, params: BTreeMap<String, f64>) -> Result<Self> {
        let allowed = kind.parameter_names();
        if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidPotential(format!(
                "`{kind}` does not take parameter `{extra}`"
            )));
        }
        for name in allowed {
            match params.get(*name) {
                None => {
                    return Err(Error::InvalidPotential(format!(
                        "`{kind}` requires parameter `{name}`"
                    )))
                }
                Some(v) if !(v.is_finite() && *v > 0.0) => {
                    return Err(Error::InvalidPotential(format!(
                        "parameter `{name}` must be positive and finite, got {v}"
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(Self { kind, params })
    }

    /// A parameter-free smooth potential.
    ///
    /// Panics if `kind` is `SquareWell`; use [`PotentialSpec::square_well`].
    pub fn smooth(kind: PotentialKind) -> Self {
        assert!(
            kind != PotentialKind::SquareWell,
            "square well needs a width"
        );
        Self {
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn square_well(width: f64) -> Result<Self> {
        Self::new(
            PotentialKind::SquareWell,
            BTreeMap::from([("L".to_string(), width)]),
        )
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn is_square_well(&self) -> bool {
        self.kind == PotentialKind::SquareWell
    }

    /// Half width `L/2` of the square well, `None` for unbounded domains.
    pub fn wall(&self) -> Option<f64> {
        self.params.get("L").map(|l| 0.5 * l)
    }

    fn check_domain(&self, q: f64) -> Result<()> {
        match self.wall() {
            // A few ulps of slack so that points placed exactly on the wall by
            // floating-point arithmetic are still accepted.
            Some(w) if q.abs() > w * (1.0 + 4.0 * f64::EPSILON) => {
                Err(Error::OutsideDomain { q, half_width: w })
            }
            _ if q.is_nan() => Err(Error::OutsideDomain {
                q,
                half_width: self.wall().unwrap_or(f64::INFINITY),
            }),
            _ => Ok(()),
        }
    }

    /// `V(q)`.
    pub fn evaluate(&self, q: f64) -> Result<f64> {
        self.check_domain(q)?;
        Ok(self.value_unchecked(q))
    }

    /// `dV/dq`.
    pub fn derivative(&self, q: f64) -> Result<f64> {
        self.check_domain(q)?;
        Ok(self.derivative_unchecked(q))
    }

    /// `V(q)` without the square-well domain check. Inside the well this is 0.
    pub fn value_unchecked(&self, q: f64) -> f64 {
        match self.kind {
            PotentialKind::SquareWell => 0.0,
            PotentialKind::Harmonic => q * q,
            PotentialKind::Quartic => {
                let q2 = q * q;
                q2 * q2
            }
            PotentialKind::DoubleWell => {
                let q2 = q * q;
                q2 * (q2 - 3.0)
            }
            PotentialKind::GaussExp => (q * q / 8.0).exp_m1(),
            PotentialKind::Cosh => {
                // cosh(q) - 1 = 2 sinh²(q/2), accurate near the origin
                let s = (0.5 * q).sinh();
                2.0 * s * s
            }
        }
    }

    pub fn derivative_unchecked(&self, q: f64) -> f64 {
        match self.kind {
            PotentialKind::SquareWell => 0.0,
            PotentialKind::Harmonic => 2.0 * q,
            PotentialKind::Quartic => 4.0 * q * q * q,
            PotentialKind::DoubleWell => 4.0 * q * q * q - 6.0 * q,
            PotentialKind::GaussExp => 0.25 * q * (q * q / 8.0).exp(),
            PotentialKind::Cosh => q.sinh(),
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}
