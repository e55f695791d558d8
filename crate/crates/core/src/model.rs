//! Model parameters, vector field, and closed-form equilibria.
//!
//! The ten rate constants are strictly positive and the delay `tau` is
//! non-negative; [`ModelParams::new`] and the JSON deserializer enforce
//! both. All operations here are pure functions of their inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rate constants of the three-species system plus the resource delay.
///
/// Serializes to/from a flat JSON object with exactly the keys
/// `a0, a1, a2, a3, b0, b1, b3, c0, c1, c2, tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b0: f64,
    pub b1: f64,
    pub b3: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub tau: f64,
}

/// Unvalidated twin used by the deserializer.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    a0: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    b0: f64,
    b1: f64,
    b3: f64,
    c0: f64,
    c1: f64,
    c2: f64,
    tau: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(
            [r.a0, r.a1, r.a2, r.a3],
            [r.b0, r.b1, r.b3],
            [r.c0, r.c1, r.c2],
            r.tau,
        )
    }
}

impl ModelParams {
    /// Builds a validated parameter set from the resource rates
    /// `[a0, a1, a2, a3]`, intermediate-predator rates `[b0, b1, b3]`,
    /// top-predator rates `[c0, c1, c2]`, and the delay.
    pub fn new(a: [f64; 4], b: [f64; 3], c: [f64; 3], tau: f64) -> Result<Self> {
        let params = Self {
            a0: a[0],
            a1: a[1],
            a2: a[2],
            a3: a[3],
            b0: b[0],
            b1: b[1],
            b3: b[2],
            c0: c[0],
            c1: c[1],
            c2: c[2],
            tau,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks strict positivity of the ten rates and `tau >= 0`.
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("a0", self.a0),
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("b0", self.b0),
            ("b1", self.b1),
            ("b3", self.b3),
            ("c0", self.c0),
            ("c1", self.c1),
            ("c2", self.c2),
        ];
        for (name, v) in rates {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "rate constant {name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(Error::InvalidInput(format!(
                "delay tau must be non-negative and finite, got {}",
                self.tau
            )));
        }
        Ok(())
    }

    /// Same parameters with a different delay.
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    /// Parses the flat JSON object format.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("params JSON: {e}")))
    }

    /// Emits the flat JSON object format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params always serialize")
    }

    /// Closed-form constants of the equilibrium formulas.
    pub fn constants(&self) -> Constants {
        Constants::from_params(self)
    }
}

/// Named constants underlying the closed-form equilibria:
/// `k` is the resource carrying capacity, (`a`, `b`) locate the
/// resource/intermediate-predator equilibrium, (`c`, `d`) the
/// resource/top-predator equilibrium, and (`p`, `q`, `r`, `s`) the interior
/// equilibrium `(p/s, q/s, r/s)`.
#[derive(Debug, Clone, Copy)]
pub struct Constants {
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl Constants {
    fn from_params(pr: &ModelParams) -> Self {
        let ModelParams {
            a0,
            a1,
            a2,
            a3,
            b0,
            b1,
            b3,
            c0,
            c1,
            c2,
            ..
        } = *pr;
        Self {
            k: a0 / a1,
            a: b0 / b1,
            b: (a0 * b1 - a1 * b0) / (a2 * b1),
            c: c0 / c1,
            d: (a0 * c1 - a1 * c0) / (a3 * c1),
            p: a0 * b3 * c2 - a2 * b3 * c0 + a3 * b0 * c2,
            q: -a0 * b3 * c1 + a1 * b3 * c0 - a3 * b0 * c1 + a3 * b1 * c0,
            r: a0 * b1 * c2 - a1 * b0 * c2 + a2 * b0 * c1 - a2 * b1 * c0,
            s: a1 * b3 * c2 - a2 * b3 * c1 + a3 * b1 * c2,
        }
    }
}

/// Population densities at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateTriple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl StateTriple {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &[f64; 3]) -> f64 {
        (self.x - other[0])
            .abs()
            .max((self.y - other[1]).abs())
            .max((self.z - other[2]).abs())
    }
}

/// Vector field of the delayed system, with the delayed resource density
/// supplied explicitly. Bilinear in the state.
pub fn rhs(params: &ModelParams, current: &StateTriple, delayed_x: f64) -> Result<StateTriple> {
    if !current.is_finite() || !delayed_x.is_finite() {
        return Err(Error::InvalidInput(format!(
            "rhs requires finite state and delayed density, got {current:?}, delayed_x = {delayed_x}"
        )));
    }
    Ok(rhs_raw(params, current, delayed_x))
}

/// Unchecked vector field; the integrator calls this per stage.
#[inline]
pub(crate) fn rhs_raw(p: &ModelParams, s: &StateTriple, delayed_x: f64) -> StateTriple {
    StateTriple {
        x: (p.a0 - p.a1 * delayed_x - p.a2 * s.y - p.a3 * s.z) * s.x,
        y: (-p.b0 + p.b1 * s.x - p.b3 * s.z) * s.y,
        z: (-p.c0 + p.c1 * s.x + p.c2 * s.y) * s.z,
    }
}

/// Label of a non-negative equilibrium: extinction, resource-only, the two
/// planar equilibria, and the interior (coexistence) one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumKind {
    E0,
    E1,
    E2,
    E3,
    E4,
}

impl EquilibriumKind {
    pub const ALL: [EquilibriumKind; 5] = [
        EquilibriumKind::E0,
        EquilibriumKind::E1,
        EquilibriumKind::E2,
        EquilibriumKind::E3,
        EquilibriumKind::E4,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EquilibriumKind::E0 => "E0",
            EquilibriumKind::E1 => "E1",
            EquilibriumKind::E2 => "E2",
            EquilibriumKind::E3 => "E3",
            EquilibriumKind::E4 => "E4",
        }
    }
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EquilibriumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "E0" => Ok(EquilibriumKind::E0),
            "E1" => Ok(EquilibriumKind::E1),
            "E2" => Ok(EquilibriumKind::E2),
            "E3" => Ok(EquilibriumKind::E3),
            "E4" => Ok(EquilibriumKind::E4),
            other => Err(Error::InvalidInput(format!(
                "unknown equilibrium kind {other:?}, expected E0..E4"
            ))),
        }
    }
}

/// The closed-form constants relevant to one equilibrium kind, for reports.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct DerivedConstants {
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

/// One labeled steady state with its existence classification.
///
/// `coords` always holds the formal closed-form solution; `exists` is true
/// only when the components the kind requires are strictly positive.
/// `defined` is false only for the interior equilibrium when its denominator
/// vanishes (`S = 0`), in which case `coords` is zeroed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub coords: [f64; 3],
    pub exists: bool,
    pub defined: bool,
    pub derived: DerivedConstants,
}

impl Equilibrium {
    /// Coordinates as a state, for seeding simulations near the point.
    pub fn state(&self) -> StateTriple {
        StateTriple::from_array(self.coords)
    }
}

/// All five equilibria in kind order.
pub fn equilibria(params: &ModelParams) -> [Equilibrium; 5] {
    EquilibriumKind::ALL.map(|kind| equilibrium(params, kind))
}

/// One equilibrium by kind.
pub fn equilibrium(params: &ModelParams, kind: EquilibriumKind) -> Equilibrium {
    let cs = params.constants();
    match kind {
        EquilibriumKind::E0 => Equilibrium {
            kind,
            coords: [0.0, 0.0, 0.0],
            exists: true,
            defined: true,
            derived: DerivedConstants::default(),
        },
        EquilibriumKind::E1 => Equilibrium {
            kind,
            coords: [cs.k, 0.0, 0.0],
            exists: true,
            defined: true,
            derived: DerivedConstants {
                k: Some(cs.k),
                ..Default::default()
            },
        },
        EquilibriumKind::E2 => Equilibrium {
            kind,
            coords: [cs.a, cs.b, 0.0],
            // B > 0, equivalently A < K.
            exists: cs.b > 0.0,
            defined: true,
            derived: DerivedConstants {
                k: Some(cs.k),
                a: Some(cs.a),
                b: Some(cs.b),
                ..Default::default()
            },
        },
        EquilibriumKind::E3 => Equilibrium {
            kind,
            coords: [cs.c, 0.0, cs.d],
            // D > 0, equivalently C < K.
            exists: cs.d > 0.0,
            defined: true,
            derived: DerivedConstants {
                k: Some(cs.k),
                c: Some(cs.c),
                d: Some(cs.d),
                ..Default::default()
            },
        },
        EquilibriumKind::E4 => {
            let derived = DerivedConstants {
                p: Some(cs.p),
                q: Some(cs.q),
                r: Some(cs.r),
                s: Some(cs.s),
                ..Default::default()
            };
            if cs.s == 0.0 {
                // Degenerate denominator: flagged, never an error.
                Equilibrium {
                    kind,
                    coords: [0.0, 0.0, 0.0],
                    exists: false,
                    defined: false,
                    derived,
                }
            } else {
                let coords = [cs.p / cs.s, cs.q / cs.s, cs.r / cs.s];
                Equilibrium {
                    kind,
                    coords,
                    exists: coords.iter().all(|&v| v > 0.0),
                    defined: true,
                    derived,
                }
            }
        }
    }
}
