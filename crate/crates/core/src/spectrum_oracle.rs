//! Brute-force spectral verifier for the characteristic quasi-polynomial.
//!
//! Locates characteristic roots by Newton iteration from a coarse complex
//! grid, tracks the rightmost ones as the delay varies, and finds
//! imaginary-axis crossings by bisection on the rightmost real part. No
//! closed-form threshold enters any computation here, so agreement with the
//! formulas of [`crate::critical_delay`] is an independent check.
//!
//! The seed box `Re in [-L, L]`, `Im in [0, Omega]` with `L = 1 + sum of
//! coefficient magnitudes` and `Omega = 4 L` is a heuristic bound for the
//! rightmost roots of these low-degree quasi-polynomials at desk scale, not
//! a proof; all roots with non-negative real part do satisfy `|lambda| <= L`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stability::QuasiPolynomial;

/// Residual below which a Newton result is accepted as a root.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Half-width at which the crossing bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-8;

const NEWTON_MAX_ITERS: usize = 60;
const NEWTON_STEP_TOL: f64 = 1e-12;
const DEDUP_RADIUS: f64 = 1e-6;
const GRID_SIDE: usize = 40;
const TRACK_COUNT: usize = 6;
const FULL_GRID_EVERY: usize = 6;

/// A characteristic root candidate with its certification residual.
#[derive(Debug, Clone, Copy)]
pub struct RootEstimate {
    pub lambda: Complex64,
    pub residual: f64,
    pub tau: f64,
}

/// Value of the characteristic function
/// `lambda^3 + p2 lambda^2 + p1 lambda + p0
///  + (q2 lambda^2 + q1 lambda + q0) e^{-lambda tau}`.
pub fn eval_char(qp: &QuasiPolynomial, lambda: Complex64) -> Complex64 {
    let poly = ((lambda + qp.p2) * lambda + qp.p1) * lambda + qp.p0;
    let delayed = (qp.q2 * lambda + qp.q1) * lambda + qp.q0;
    poly + delayed * (-lambda * qp.tau).exp()
}

/// Derivative of the characteristic function, including the `-tau q(lambda)`
/// term from the exponential.
fn eval_char_deriv(qp: &QuasiPolynomial, lambda: Complex64) -> Complex64 {
    let poly = (3.0 * lambda + 2.0 * qp.p2) * lambda + qp.p1;
    let delayed = (qp.q2 * lambda + qp.q1) * lambda + qp.q0;
    let delayed_deriv = 2.0 * qp.q2 * lambda + qp.q1;
    poly + (delayed_deriv - qp.tau * delayed) * (-lambda * qp.tau).exp()
}

/// Newton iteration from one seed; `None` when it leaves the search region
/// or fails to settle within the iteration budget.
fn newton(qp: &QuasiPolynomial, seed: Complex64, bound: f64) -> Option<Complex64> {
    let mut lambda = seed;
    for _ in 0..NEWTON_MAX_ITERS {
        let f = eval_char(qp, lambda);
        let fp = eval_char_deriv(qp, lambda);
        if fp.norm() == 0.0 {
            return None;
        }
        let step = f / fp;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        lambda -= step;
        if lambda.norm() > bound {
            return None;
        }
        if step.norm() < NEWTON_STEP_TOL {
            return Some(lambda);
        }
    }
    None
}

fn certify(qp: &QuasiPolynomial, lambda: Complex64) -> Option<RootEstimate> {
    // Conjugate symmetry: store the upper half-plane representative.
    let lambda = if lambda.im < 0.0 { lambda.conj() } else { lambda };
    let residual = eval_char(qp, lambda).norm();
    (residual < RESIDUAL_TOL).then_some(RootEstimate {
        lambda,
        residual,
        tau: qp.tau,
    })
}

/// Sorts by (Re, Im), drops near-duplicates, then orders rightmost-first.
fn dedup_and_rank(mut roots: Vec<RootEstimate>) -> Vec<RootEstimate> {
    roots.sort_by(|l, r| {
        l.lambda
            .re
            .total_cmp(&r.lambda.re)
            .then(l.lambda.im.total_cmp(&r.lambda.im))
    });
    let mut kept: Vec<RootEstimate> = Vec::new();
    for cand in roots {
        if kept
            .iter()
            .all(|k| (k.lambda - cand.lambda).norm() > DEDUP_RADIUS)
        {
            kept.push(cand);
        }
    }
    kept.sort_by(|l, r| {
        r.lambda
            .re
            .total_cmp(&l.lambda.re)
            .then(l.lambda.im.total_cmp(&r.lambda.im))
    });
    kept
}

fn grid_roots(qp: &QuasiPolynomial) -> Vec<RootEstimate> {
    let sum = qp.coeff_magnitude();
    let re_max = 1.0 + sum;
    let im_max = 4.0 * (1.0 + sum);
    let bound = 10.0 * (re_max + im_max);
    let mut found = Vec::new();
    for i in 0..GRID_SIDE {
        let re = -re_max + 2.0 * re_max * i as f64 / (GRID_SIDE - 1) as f64;
        for j in 0..GRID_SIDE {
            let im = im_max * j as f64 / (GRID_SIDE - 1) as f64;
            if let Some(lambda) = newton(qp, Complex64::new(re, im), bound) {
                if let Some(root) = certify(qp, lambda) {
                    found.push(root);
                }
            }
        }
    }
    dedup_and_rank(found)
}

/// The `n` roots with largest real part (conjugates implied), found by
/// Newton iteration seeded on a coarse grid over the heuristic root box.
pub fn rightmost_roots(qp: &QuasiPolynomial, n: usize) -> Result<Vec<RootEstimate>> {
    if n == 0 {
        return Err(Error::InvalidInput("requested zero roots".into()));
    }
    if !qp.is_finite() {
        return Err(Error::InvalidInput(
            "quasi-polynomial has non-finite coefficients".into(),
        ));
    }
    let mut roots = grid_roots(qp);
    if roots.is_empty() {
        let sum = qp.coeff_magnitude();
        return Err(Error::RootSearch(format!(
            "no Newton seed converged on the {GRID_SIDE}x{GRID_SIDE} grid \
             (Re in [{:+.3e}, {:+.3e}], Im in [0, {:.3e}])",
            -(1.0 + sum),
            1.0 + sum,
            4.0 * (1.0 + sum)
        )));
    }
    roots.truncate(n);
    Ok(roots)
}

/// Re-converges a set of previously found roots at a nearby delay; falls
/// back to the full grid when continuation loses every root.
fn continued_roots(qp: &QuasiPolynomial, seeds: &[RootEstimate]) -> Vec<RootEstimate> {
    let sum = qp.coeff_magnitude();
    let bound = 10.0 * (5.0 * (1.0 + sum));
    let mut found = Vec::new();
    for seed in seeds {
        if let Some(lambda) = newton(qp, seed.lambda, bound) {
            if let Some(root) = certify(qp, lambda) {
                found.push(root);
            }
        }
    }
    let ranked = dedup_and_rank(found);
    if ranked.is_empty() {
        grid_roots(qp)
    } else {
        ranked
    }
}

/// Bisection for the delay at which the rightmost root's real part changes
/// sign, returning `(tau_star, omega_star)` with `omega_star` the imaginary
/// part of the crossing pair. The bracket ends must have opposite signs.
pub fn find_crossing<F>(qp_of_tau: F, tau_lo: f64, tau_hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> QuasiPolynomial,
{
    if !(tau_lo.is_finite() && tau_hi.is_finite() && tau_lo < tau_hi) {
        return Err(Error::InvalidInput(format!(
            "invalid bracket [{tau_lo}, {tau_hi}]"
        )));
    }
    let mut lo_roots = rightmost_roots(&qp_of_tau(tau_lo), TRACK_COUNT)?;
    let mut hi_roots = rightmost_roots(&qp_of_tau(tau_hi), TRACK_COUNT)?;
    let lo_negative = lo_roots[0].lambda.re < 0.0;
    let hi_negative = hi_roots[0].lambda.re < 0.0;
    if lo_roots[0].lambda.re == 0.0 || hi_roots[0].lambda.re == 0.0 || lo_negative == hi_negative
    {
        return Err(Error::NoCrossing {
            tau_lo,
            tau_hi,
            reason: format!(
                "rightmost real part is {:+.3e} at tau_lo and {:+.3e} at tau_hi",
                lo_roots[0].lambda.re, hi_roots[0].lambda.re
            ),
        });
    }

    let mut lo = tau_lo;
    let mut hi = tau_hi;
    let mut iter = 0usize;
    while hi - lo > BISECTION_WIDTH {
        iter += 1;
        let mid = 0.5 * (lo + hi);
        let qp = qp_of_tau(mid);
        let mid_roots = if iter.is_multiple_of(FULL_GRID_EVERY) {
            grid_roots(&qp)
        } else {
            let mut seeds = lo_roots.clone();
            seeds.extend_from_slice(&hi_roots);
            continued_roots(&qp, &seeds)
        };
        if mid_roots.is_empty() {
            return Err(Error::RootSearch(format!(
                "lost every tracked root at tau = {mid}"
            )));
        }
        if (mid_roots[0].lambda.re < 0.0) == lo_negative {
            lo = mid;
            lo_roots = mid_roots;
        } else {
            hi = mid;
            hi_roots = mid_roots;
        }
    }

    // The just-unstable side carries the crossing pair.
    let crossing = if lo_negative { &hi_roots } else { &lo_roots };
    Ok((0.5 * (lo + hi), crossing[0].lambda.im.abs()))
}
