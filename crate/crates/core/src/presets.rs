//! Built-in parameter sets used throughout the tests and the CLI.
//!
//! The three presets share the baseline rates of `example1`; `example2`
//! changes `b1` to 0.50 and `example3` sets `b1 = 1` and `c1 = 0.42`.
//! Each carries its conventional constant initial history. The delay is
//! left at 0 and is meant to be overridden per run.

use crate::model::{ModelParams, StateTriple};

/// A named parameter set plus its constant initial history.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub params: ModelParams,
    pub history: StateTriple,
}

pub const NAMES: [&str; 3] = ["example1", "example2", "example3"];

fn base(b1: f64, c1: f64) -> ModelParams {
    ModelParams::new(
        [1.0, 0.5, 1.0, 0.6],
        [0.75, b1, 0.5],
        [0.5, c1, 0.3],
        0.0,
    )
    .expect("preset constants are valid")
}

/// Resource-only regime: only `E1 = (2, 0, 0)` exists besides extinction.
pub fn example1() -> Preset {
    Preset {
        name: "example1",
        params: base(0.25, 0.15),
        history: StateTriple::new(2.0, 1.0, 1.0),
    }
}

/// Resource/intermediate-predator regime: `E2 = (1.50, 0.25, 0)` exists.
pub fn example2() -> Preset {
    Preset {
        name: "example2",
        params: base(0.50, 0.15),
        history: StateTriple::new(2.0, 1.0, 1.0),
    }
}

/// Coexistence regime: the interior equilibrium
/// `E4 = (0.7778, 0.5778, 0.0556)` exists and is stable for small delays.
pub fn example3() -> Preset {
    Preset {
        name: "example3",
        params: base(1.0, 0.42),
        history: StateTriple::new(0.78, 0.58, 0.06),
    }
}

/// Looks a preset up by name.
pub fn by_name(name: &str) -> Option<Preset> {
    match name {
        "example1" => Some(example1()),
        "example2" => Some(example2()),
        "example3" => Some(example3()),
        _ => None,
    }
}
