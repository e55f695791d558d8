//! Bifurcation-diagram data over the delay parameter: per grid point, the
//! analytical stability verdict of the followed equilibrium plus the
//! measured amplitude and period of whatever the simulation settles into.
//!
//! The periodic branch is measured from long simulations seeded just off
//! the equilibrium rather than followed by collocation-based orbit
//! continuation; near the switch the decay/growth rate vanishes, so grid
//! points close to the critical delay get an extended horizon.

use serde::Serialize;

use crate::critical_delay::{hopf_e1, hopf_e2, hopf_e3, hopf_e4, CriticalDelay};
use crate::dde_sim::{
    classify_endstate_with, integrate, oscillation_metrics, ClassifyConfig, EndState, History,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::model::{equilibrium, EquilibriumKind, ModelParams, StateTriple};

/// Simulation settings of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepSettings {
    /// Steps per delay interval (at least 20).
    pub steps_per_delay: usize,
    /// Step used when the grid contains the zero delay.
    pub dt_at_zero_delay: f64,
    /// Horizon away from the critical delay.
    pub t_end: f64,
    /// Horizon within the near-critical window.
    pub t_end_near_hopf: f64,
    /// Relative half-width of the near-critical window.
    pub near_hopf_window: f64,
    /// Relative offset applied per component to seed the simulation.
    pub seed_offset: f64,
    /// Leading fraction of the run discarded before measuring.
    pub transient_fraction: f64,
    pub classify: ClassifyConfig,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            steps_per_delay: 40,
            dt_at_zero_delay: 0.05,
            t_end: 1500.0,
            t_end_near_hopf: 3000.0,
            near_hopf_window: 0.15,
            seed_offset: 0.01,
            transient_fraction: 0.8,
            classify: ClassifyConfig::default(),
        }
    }
}

/// One grid point of the diagram.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchPoint {
    pub tau: f64,
    /// Analytical verdict: the followed equilibrium is stable at this delay.
    pub eq_stable: bool,
    pub classification: EndState,
    /// Per-component peak-to-peak amplitude; zero when converged.
    pub amplitude: [f64; 3],
    /// Estimated oscillation period (from resource maxima); absent when
    /// converged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

/// Sweep result: points in grid order plus the analytical critical delay
/// when one exists.
#[derive(Debug, Clone, Serialize)]
pub struct BranchDiagram {
    pub eq_kind: EquilibriumKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hopf_tau: Option<f64>,
    pub points: Vec<BranchPoint>,
}

enum StabilityIndicator {
    Threshold(f64),
    StableForAll,
    UnstableAtZero,
}

fn stability_indicator(params: &ModelParams, kind: EquilibriumKind) -> Result<StabilityIndicator> {
    let report = match kind {
        EquilibriumKind::E0 => return Ok(StabilityIndicator::UnstableAtZero),
        EquilibriumKind::E1 => hopf_e1(params),
        EquilibriumKind::E2 => hopf_e2(params),
        EquilibriumKind::E3 => hopf_e3(params),
        EquilibriumKind::E4 => hopf_e4(params),
    };
    match report {
        Ok(r) => Ok(match r.critical {
            CriticalDelay::Finite(tau) => StabilityIndicator::Threshold(tau),
            // No crossing found: stable on the whole grid.
            CriticalDelay::AbsolutelyStable | CriticalDelay::Unknown => {
                StabilityIndicator::StableForAll
            }
        }),
        // Applicability failures here mean the point is unstable already at
        // zero delay (existence failures surface earlier).
        Err(Error::NotApplicable(_)) => Ok(StabilityIndicator::UnstableAtZero),
        Err(other) => Err(other),
    }
}

/// Runs the per-delay verdict + simulation over the grid.
pub fn sweep(
    params: &ModelParams,
    eq_kind: EquilibriumKind,
    tau_grid: &[f64],
    settings: &SweepSettings,
) -> Result<BranchDiagram> {
    if tau_grid.is_empty() {
        return Err(Error::InvalidInput("empty delay grid".into()));
    }
    if tau_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidInput(
            "delay grid must be finite and non-negative".into(),
        ));
    }
    if tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "delay grid must be strictly increasing".into(),
        ));
    }
    let eq = equilibrium(params, eq_kind);
    if eq_kind == EquilibriumKind::E4 && !eq.defined {
        return Err(Error::UndefinedEquilibrium(
            "interior equilibrium has S = 0".into(),
        ));
    }
    if !eq.exists {
        return Err(Error::NotApplicable(format!(
            "{eq_kind} does not exist for these parameters"
        )));
    }

    let indicator = stability_indicator(params, eq_kind)?;
    let hopf_tau = match indicator {
        StabilityIndicator::Threshold(t) => Some(t),
        _ => None,
    };

    let seed = StateTriple::new(
        eq.coords[0] * (1.0 + settings.seed_offset),
        eq.coords[1] * (1.0 + settings.seed_offset),
        eq.coords[2] * (1.0 + settings.seed_offset),
    );
    let history = History::constant(seed)?;

    let mut points = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let eq_stable = match indicator {
            StabilityIndicator::Threshold(t) => tau < t,
            StabilityIndicator::StableForAll => true,
            StabilityIndicator::UnstableAtZero => false,
        };
        let t_end = match hopf_tau {
            Some(h) if (tau - h).abs() <= settings.near_hopf_window * h => {
                settings.t_end_near_hopf
            }
            _ => settings.t_end,
        };
        let dt = if tau > 0.0 {
            tau / settings.steps_per_delay as f64
        } else {
            settings.dt_at_zero_delay
        };
        let run = integrate(&params.with_tau(tau), &history, t_end, dt);
        let point = match run {
            Ok(traj) => measure_point(&traj, tau, eq_stable, &eq, settings),
            Err(Error::Divergence { .. }) => BranchPoint {
                tau,
                eq_stable,
                classification: EndState::Diverged,
                amplitude: [0.0; 3],
                period: None,
            },
            Err(other) => return Err(other),
        };
        points.push(point);
    }

    Ok(BranchDiagram {
        eq_kind,
        hopf_tau,
        points,
    })
}

fn measure_point(
    traj: &Trajectory,
    tau: f64,
    eq_stable: bool,
    eq: &crate::model::Equilibrium,
    settings: &SweepSettings,
) -> BranchPoint {
    let classification =
        classify_endstate_with(traj, eq, settings.transient_fraction, &settings.classify);
    if classification == EndState::Converged {
        return BranchPoint {
            tau,
            eq_stable,
            classification,
            amplitude: [0.0; 3],
            period: None,
        };
    }
    let metrics = oscillation_metrics(traj, settings.transient_fraction);
    BranchPoint {
        tau,
        eq_stable,
        classification,
        amplitude: metrics.peak_to_peak,
        period: metrics.period[0],
    }
}

/// Result of [`amplitude_growth_check`].
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offending_tau: Option<f64>,
    pub message: String,
}

/// Number of post-threshold grid points whose amplitudes must grow.
pub const GROWTH_CHECK_POINTS: usize = 5;
/// Allowed relative shrinkage between consecutive post-threshold amplitudes.
pub const GROWTH_NOISE_ALLOWANCE: f64 = 0.10;

/// Verifies the diagram's qualitative shape around the critical delay:
/// amplitude at noise level below it, strictly positive and locally
/// nondecreasing (within a 10% allowance) for the first few points above.
pub fn amplitude_growth_check(diagram: &BranchDiagram) -> Result<GrowthReport> {
    amplitude_growth_check_with(diagram, ClassifyConfig::default().tol_osc)
}

pub fn amplitude_growth_check_with(
    diagram: &BranchDiagram,
    tol_osc: f64,
) -> Result<GrowthReport> {
    let hopf = diagram.hopf_tau.ok_or_else(|| {
        Error::InvalidInput("diagram has no finite critical delay attached".into())
    })?;
    let first = diagram
        .points
        .first()
        .ok_or_else(|| Error::InvalidInput("empty diagram".into()))?;
    let last = diagram.points.last().expect("non-empty");
    if !(first.tau < hopf && hopf < last.tau) {
        return Err(Error::InvalidInput(format!(
            "grid [{}, {}] does not span the critical delay {hopf}",
            first.tau, last.tau
        )));
    }

    let max_amp = |p: &BranchPoint| p.amplitude.iter().copied().fold(0.0, f64::max);

    for p in diagram.points.iter().filter(|p| p.tau < hopf) {
        if max_amp(p) > tol_osc {
            return Ok(GrowthReport {
                pass: false,
                offending_tau: Some(p.tau),
                message: format!(
                    "amplitude {:.4} above noise level {tol_osc} below the critical delay",
                    max_amp(p)
                ),
            });
        }
    }

    let above: Vec<&BranchPoint> = diagram
        .points
        .iter()
        .filter(|p| p.tau > hopf)
        .take(GROWTH_CHECK_POINTS)
        .collect();
    if above.is_empty() {
        return Err(Error::InvalidInput(
            "no grid points above the critical delay".into(),
        ));
    }
    let mut prev: Option<f64> = None;
    for p in above {
        let amp = max_amp(p);
        if amp <= 0.0 {
            return Ok(GrowthReport {
                pass: false,
                offending_tau: Some(p.tau),
                message: "zero amplitude above the critical delay".into(),
            });
        }
        if let Some(prev_amp) = prev {
            if amp < prev_amp * (1.0 - GROWTH_NOISE_ALLOWANCE) {
                return Ok(GrowthReport {
                    pass: false,
                    offending_tau: Some(p.tau),
                    message: format!(
                        "amplitude dropped from {prev_amp:.4} to {amp:.4} just past the \
                         critical delay"
                    ),
                });
            }
        }
        prev = Some(amp);
    }

    Ok(GrowthReport {
        pass: true,
        offending_tau: None,
        message: "amplitude emerges from zero at the critical delay and grows".into(),
    })
}
