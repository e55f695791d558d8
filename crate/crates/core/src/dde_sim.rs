//! Method-of-steps integration of the delay system and end-state
//! classification.
//!
//! Fixed-step classical Runge-Kutta with the step chosen so that the delay
//! is an exact integer multiple of it. Delayed resource values at the half
//! step come from cubic Hermite interpolation of the stored solution; node
//! lookups land exactly on stored grid points, and solution kinks (which
//! sit on multiples of the delay for a constant history) always coincide
//! with step boundaries, so the scheme keeps its fourth-order accuracy.
//! Runs are bit-reproducible.

use crate::error::{Error, Result};
use crate::model::{rhs_raw, Equilibrium, ModelParams, StateTriple};

/// Minimum number of steps per delay interval.
pub const MIN_STEPS_PER_DELAY: usize = 20;
/// Component magnitude treated as blow-up.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
/// Undershoot beyond this magnitude counts as a clamp warning.
const CLAMP_WARN_THRESHOLD: f64 = -1e-12;

/// Constant pre-history on `[-tau, 0]`.
#[derive(Debug, Clone, Copy)]
pub struct History {
    state: StateTriple,
}

impl History {
    /// Constant history; components must be finite and non-negative.
    pub fn constant(state: StateTriple) -> Result<Self> {
        if !state.is_finite() || state.x < 0.0 || state.y < 0.0 || state.z < 0.0 {
            return Err(Error::InvalidInput(format!(
                "history must be finite and non-negative, got {state:?}"
            )));
        }
        Ok(Self { state })
    }

    pub fn value(&self) -> StateTriple {
        self.state
    }
}

/// Integrated solution on the uniform grid `t_i = i dt`, with stored node
/// derivatives for dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dt: f64,
    states: Vec<StateTriple>,
    derivs: Vec<StateTriple>,
    clamp_warnings: u64,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of grid points (steps + 1).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.states.len() - 1)
    }

    pub fn states(&self) -> &[StateTriple] {
        &self.states
    }

    pub fn last(&self) -> StateTriple {
        *self.states.last().expect("trajectory is never empty")
    }

    /// Count of steps that undershot a component below -1e-12 before being
    /// clamped to zero.
    pub fn clamp_warnings(&self) -> u64 {
        self.clamp_warnings
    }

    /// Resource density at an arbitrary time via the dense output
    /// (cubic Hermite between nodes; clamped to the grid range).
    pub fn sample_x(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.states[0].x;
        }
        let pos = t / self.dt;
        let j = pos.floor() as usize;
        if j + 1 >= self.states.len() {
            return self.last().x;
        }
        let theta = pos - j as f64;
        if theta == 0.0 {
            self.states[j].x
        } else {
            self.hermite_x(j, theta)
        }
    }

    #[inline]
    fn hermite_x(&self, j: usize, theta: f64) -> f64 {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.states[j].x
            + h10 * self.dt * self.derivs[j].x
            + h01 * self.states[j + 1].x
            + h11 * self.dt * self.derivs[j + 1].x
    }

    /// Index of the first grid point inside the trailing window.
    pub fn window_start(&self, transient_fraction: f64) -> usize {
        let start = (self.states.len() as f64 * transient_fraction) as usize;
        start.min(self.states.len().saturating_sub(1))
    }

    /// Trailing states after discarding the transient.
    pub fn window(&self, transient_fraction: f64) -> &[StateTriple] {
        &self.states[self.window_start(transient_fraction)..]
    }
}

/// Integrates from a constant history to `t_end` (rounded up to a whole
/// number of steps) with step `dt`.
///
/// For a positive delay, `dt` must divide it into at least
/// [`MIN_STEPS_PER_DELAY`] whole steps. States are clamped at zero and any
/// component exceeding [`DIVERGENCE_LIMIT`] aborts with a divergence error.
pub fn integrate(
    params: &ModelParams,
    history: &History,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidInput(format!(
            "t_end must be positive and finite, got {t_end}"
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStep(format!(
            "dt must be positive and finite, got {dt}"
        )));
    }
    let lattice = if params.tau > 0.0 {
        let ratio = params.tau / dt;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-9 * m.max(1.0) {
            return Err(Error::InvalidStep(format!(
                "dt = {dt} does not divide tau = {} (tau/dt = {ratio})",
                params.tau
            )));
        }
        let m = m as usize;
        if m < MIN_STEPS_PER_DELAY {
            return Err(Error::InvalidStep(format!(
                "tau/dt = {m} but at least {MIN_STEPS_PER_DELAY} steps per delay are required"
            )));
        }
        Some(m)
    } else {
        None
    };

    let n_steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let x_hist = history.value().x;

    let mut traj = Trajectory {
        dt,
        states: Vec::with_capacity(n_steps + 1),
        derivs: Vec::with_capacity(n_steps + 1),
        clamp_warnings: 0,
    };
    traj.states.push(history.value());

    for i in 0..n_steps {
        let u = traj.states[i];
        let next = match lattice {
            Some(m) => {
                // Delayed lookups by index arithmetic: the delayed time of
                // stage offset f is (i - m + f) dt.
                let j = i as isize - m as isize;
                let xd_node = if j < 0 { x_hist } else { traj.states[j as usize].x };
                let xd_half = if j < 0 {
                    x_hist
                } else {
                    traj.hermite_x(j as usize, 0.5)
                };
                let xd_full = if j + 1 < 0 {
                    x_hist
                } else {
                    traj.states[(j + 1) as usize].x
                };

                let k1 = rhs_raw(params, &u, xd_node);
                traj.derivs.push(k1);
                let k2 = rhs_raw(params, &advance(&u, &k1, 0.5 * dt), xd_half);
                let k3 = rhs_raw(params, &advance(&u, &k2, 0.5 * dt), xd_half);
                let k4 = rhs_raw(params, &advance(&u, &k3, dt), xd_full);
                combine(&u, &k1, &k2, &k3, &k4, dt)
            }
            None => {
                // Zero delay: the delayed density is the stage's own.
                let k1 = rhs_of_ode(params, &u);
                traj.derivs.push(k1);
                let k2 = rhs_of_ode(params, &advance(&u, &k1, 0.5 * dt));
                let k3 = rhs_of_ode(params, &advance(&u, &k2, 0.5 * dt));
                let k4 = rhs_of_ode(params, &advance(&u, &k3, dt));
                combine(&u, &k1, &k2, &k3, &k4, dt)
            }
        };

        let mut clamped = next;
        for v in [&mut clamped.x, &mut clamped.y, &mut clamped.z] {
            if *v < 0.0 {
                if *v < CLAMP_WARN_THRESHOLD {
                    traj.clamp_warnings += 1;
                }
                *v = 0.0;
            }
        }
        if !clamped.is_finite()
            || clamped.x.abs() > DIVERGENCE_LIMIT
            || clamped.y.abs() > DIVERGENCE_LIMIT
            || clamped.z.abs() > DIVERGENCE_LIMIT
        {
            return Err(Error::Divergence {
                t: (i + 1) as f64 * dt,
                limit: DIVERGENCE_LIMIT,
            });
        }
        traj.states.push(clamped);
    }

    // Final node derivative completes the dense output.
    let last = traj.states[n_steps];
    let xd = match lattice {
        Some(m) => {
            let j = n_steps as isize - m as isize;
            if j < 0 {
                x_hist
            } else {
                traj.states[j as usize].x
            }
        }
        None => last.x,
    };
    traj.derivs.push(rhs_raw(params, &last, xd));
    Ok(traj)
}

#[inline]
fn rhs_of_ode(params: &ModelParams, s: &StateTriple) -> StateTriple {
    rhs_raw(params, s, s.x)
}

#[inline]
fn advance(u: &StateTriple, k: &StateTriple, h: f64) -> StateTriple {
    StateTriple::new(u.x + h * k.x, u.y + h * k.y, u.z + h * k.z)
}

#[inline]
fn combine(
    u: &StateTriple,
    k1: &StateTriple,
    k2: &StateTriple,
    k3: &StateTriple,
    k4: &StateTriple,
    dt: f64,
) -> StateTriple {
    let w = dt / 6.0;
    StateTriple::new(
        u.x + w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        u.y + w * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
        u.z + w * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
    )
}

/// Qualitative fate of a trajectory's trailing window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EndState {
    Converged,
    Oscillating,
    Diverged,
    Undecided,
}

impl std::fmt::Display for EndState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EndState::Converged => "converged",
            EndState::Oscillating => "oscillating",
            EndState::Diverged => "diverged",
            EndState::Undecided => "undecided",
        };
        f.write_str(s)
    }
}

/// Thresholds of the end-state classifier. Near a stability switch the
/// decay/growth rate vanishes, so the defaults pair with long horizons.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyConfig {
    /// Maximum deviation from the equilibrium to call it converged.
    pub tol_conv: f64,
    /// Minimum peak-to-peak amplitude to call it oscillating.
    pub tol_osc: f64,
    /// Maximum relative spread of peak spacings for a stable period.
    pub period_spread_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            tol_conv: 1e-3,
            tol_osc: 0.05,
            period_spread_tol: 0.05,
        }
    }
}

/// Classifies the trailing window against an equilibrium with the default
/// thresholds.
pub fn classify_endstate(
    traj: &Trajectory,
    eq: &Equilibrium,
    transient_fraction: f64,
) -> EndState {
    classify_endstate_with(traj, eq, transient_fraction, &ClassifyConfig::default())
}

/// Classifier with explicit thresholds.
pub fn classify_endstate_with(
    traj: &Trajectory,
    eq: &Equilibrium,
    transient_fraction: f64,
    cfg: &ClassifyConfig,
) -> EndState {
    let window = traj.window(transient_fraction);
    if window.iter().any(|s| {
        !s.is_finite()
            || s.x.abs() > DIVERGENCE_LIMIT
            || s.y.abs() > DIVERGENCE_LIMIT
            || s.z.abs() > DIVERGENCE_LIMIT
    }) {
        return EndState::Diverged;
    }
    if window.len() < 3 {
        return EndState::Undecided;
    }

    let deviation = window
        .iter()
        .map(|s| s.max_abs_diff(&eq.coords))
        .fold(0.0, f64::max);
    if deviation < cfg.tol_conv {
        return EndState::Converged;
    }

    let metrics = oscillation_metrics(traj, transient_fraction);
    let (dominant, amp) = metrics
        .peak_to_peak
        .iter()
        .enumerate()
        .max_by(|l, r| l.1.total_cmp(r.1))
        .map(|(i, v)| (i, *v))
        .expect("three components");
    if amp > cfg.tol_osc {
        if let (Some(_), Some(spread)) =
            (metrics.period[dominant], metrics.period_spread[dominant])
        {
            if spread < cfg.period_spread_tol {
                return EndState::Oscillating;
            }
        }
    }
    EndState::Undecided
}

/// Peak-to-peak amplitudes and period estimates of the trailing window,
/// per component. Periods come from the mean spacing of successive local
/// maxima (parabolically refined); `period_spread` is the largest relative
/// deviation of one spacing from that mean.
#[derive(Debug, Clone, Copy)]
pub struct OscillationMetrics {
    pub peak_to_peak: [f64; 3],
    pub period: [Option<f64>; 3],
    pub period_spread: [Option<f64>; 3],
}

pub fn oscillation_metrics(traj: &Trajectory, transient_fraction: f64) -> OscillationMetrics {
    let window = traj.window(transient_fraction);
    let mut out = OscillationMetrics {
        peak_to_peak: [0.0; 3],
        period: [None; 3],
        period_spread: [None; 3],
    };
    for comp in 0..3 {
        let series: Vec<f64> = window.iter().map(|s| s.as_array()[comp]).collect();
        let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.peak_to_peak[comp] = hi - lo;

        let peaks = refined_peak_times(&series, traj.dt());
        if peaks.len() >= 3 {
            let spacings: Vec<f64> = peaks.windows(2).map(|p| p[1] - p[0]).collect();
            let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
            if mean > 0.0 {
                let spread = spacings
                    .iter()
                    .map(|s| (s - mean).abs() / mean)
                    .fold(0.0, f64::max);
                out.period[comp] = Some(mean);
                out.period_spread[comp] = Some(spread);
            }
        }
    }
    out
}

/// Local-maximum times within a uniform series, refined by a parabola
/// through each peak and its neighbors.
fn refined_peak_times(series: &[f64], dt: f64) -> Vec<f64> {
    let mut times = Vec::new();
    for i in 1..series.len().saturating_sub(1) {
        if series[i] > series[i - 1] && series[i] >= series[i + 1] {
            let denom = series[i - 1] - 2.0 * series[i] + series[i + 1];
            let offset = if denom != 0.0 {
                0.5 * (series[i - 1] - series[i + 1]) / denom
            } else {
                0.0
            };
            times.push((i as f64 + offset.clamp(-0.5, 0.5)) * dt);
        }
    }
    times
}
