//! Closed-form Hopf thresholds: the smallest delay at which a conjugate
//! pair of characteristic roots reaches the imaginary axis, per equilibrium.
//!
//! For the resource-only equilibrium the delayed scalar factor
//! `lambda + a0 e^{-lambda tau}` crosses first at `tau = pi / (2 a0)` with
//! frequency `a0`. For the planar equilibria the quadratic factor
//! `lambda^2 + b lambda e^{-lambda tau} + c` yields two candidate
//! frequencies `mu_-, mu_+` and the first crossing happens at
//! `pi / (2 mu_+)`. For the interior equilibrium the crossing frequencies
//! are the square roots of the positive roots of
//! `h(u) = u^3 + alpha u^2 + beta u + gamma`, and the crossing delays come
//! from the arccos relation with its quadrant resolved against the
//! imaginary-part equation.

use std::f64::consts::PI;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{equilibrium, EquilibriumKind, ModelParams};
use crate::spectrum_oracle::eval_char;
use crate::stability::{
    interior_char_coeffs, quadratic_factor_e2, quadratic_factor_e3, CriterionCheck,
    QuadraticFactor, QuasiPolynomial,
};
use num_complex::Complex64;

/// Number of sequence members reported by default.
pub const DEFAULT_SEQUENCE_LEN: usize = 5;

const TAU_TIE_TOL: f64 = 1e-9;
const REPEATED_ROOT_REL_TOL: f64 = 1e-8;
const CROSSING_RESIDUAL_TOL: f64 = 1e-8;

/// Smallest crossing delay, or the verdict that none exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalDelay {
    /// First imaginary-axis crossing at this delay.
    Finite(f64),
    /// Provably no crossing for any positive delay.
    AbsolutelyStable,
    /// No crossing found but absence is not provable from the sign shape.
    Unknown,
}

impl Serialize for CriticalDelay {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CriticalDelay::Finite(v) => s.serialize_f64(*v),
            CriticalDelay::AbsolutelyStable => s.serialize_str("absolutely-stable"),
            CriticalDelay::Unknown => s.serialize_str("unknown"),
        }
    }
}

/// Critical delay, crossing frequency, crossing-delay sequence, and
/// transversality data for one equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct HopfReport {
    pub eq_kind: EquilibriumKind,
    #[serde(rename = "tau_critical")]
    pub critical: CriticalDelay,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub tau_sequence: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transversality_sign: Option<i8>,
    pub hypotheses: Vec<CriterionCheck>,
    /// Zero-delay stability came from the literal Routh-Hurwitz inequalities
    /// rather than the proved sufficient sign condition.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub outside_sufficient_condition: bool,
    /// Two crossing frequencies produced first delays equal within 1e-9;
    /// the larger frequency was reported.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub near_degenerate: bool,
    /// The selected frequency comes from a repeated root; transversality is
    /// not asserted.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub non_simple_crossing: bool,
}

impl HopfReport {
    pub fn tau_critical(&self) -> Option<f64> {
        match self.critical {
            CriticalDelay::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Delay interval on which the equilibrium stays stable, when known.
    pub fn stable_interval(&self) -> Option<(f64, f64)> {
        match self.critical {
            CriticalDelay::Finite(v) => Some((0.0, v)),
            CriticalDelay::AbsolutelyStable => Some((0.0, f64::INFINITY)),
            CriticalDelay::Unknown => None,
        }
    }
}

/// Hopf threshold of the resource-only equilibrium: requires `A > K` and
/// `C > K`; then the first crossing is at `pi / (2 a0)` with frequency `a0`.
pub fn hopf_e1(params: &ModelParams) -> Result<HopfReport> {
    let cs = params.constants();
    if cs.a <= cs.k {
        return Err(Error::NotApplicable(format!(
            "A>K fails: A = {}, K = {}",
            cs.a, cs.k
        )));
    }
    if cs.c <= cs.k {
        return Err(Error::NotApplicable(format!(
            "C>K fails: C = {}, K = {}",
            cs.c, cs.k
        )));
    }
    let omega = params.a0;
    let tau_c = PI / (2.0 * params.a0);
    // Genuine crossings of the scalar factor repeat every 2*pi/omega.
    let tau_sequence = (0..DEFAULT_SEQUENCE_LEN)
        .map(|k| (PI / 2.0 + 2.0 * PI * k as f64) / omega)
        .collect();
    Ok(HopfReport {
        eq_kind: EquilibriumKind::E1,
        critical: CriticalDelay::Finite(tau_c),
        omega: Some(omega),
        tau_sequence,
        transversality_sign: Some(1),
        hypotheses: vec![
            CriterionCheck::positive("A-K>0", cs.a - cs.k),
            CriterionCheck::positive("C-K>0", cs.c - cs.k),
        ],
        outside_sufficient_condition: false,
        near_degenerate: false,
        non_simple_crossing: false,
    })
}

/// One crossing frequency of a planar quadratic factor together with the
/// first delay at which the corresponding root pair actually sits on the
/// imaginary axis, and the sign of the crossing direction there.
#[derive(Debug, Clone, Copy)]
pub struct PlanarCrossing {
    pub mu: f64,
    pub tau_first: f64,
    pub direction: i8,
}

fn planar_frequencies(qf: &QuadraticFactor) -> (f64, f64) {
    let s_sum = qf.damping * qf.damping + 2.0 * qf.restoring;
    let disc = s_sum * s_sum - 4.0 * qf.restoring * qf.restoring;
    let root = disc.max(0.0).sqrt();
    let mu_plus = (0.5 * (s_sum + root)).sqrt();
    let mu_minus = (0.5 * (s_sum - root)).sqrt();
    (mu_minus, mu_plus)
}

fn planar_crossings(qf: &QuadraticFactor) -> [PlanarCrossing; 2] {
    let (mu_minus, mu_plus) = planar_frequencies(qf);
    // The imaginary part forces cos(mu tau) = 0; the real part picks the
    // quadrant: sin = +1 at mu_+ (mu^2 > restoring), sin = -1 at mu_-.
    [
        PlanarCrossing {
            mu: mu_plus,
            tau_first: PI / (2.0 * mu_plus),
            direction: 1,
        },
        PlanarCrossing {
            mu: mu_minus,
            tau_first: 3.0 * PI / (2.0 * mu_minus),
            direction: -1,
        },
    ]
}

/// Crossing events (quadrant-resolved) of the resource/intermediate-predator
/// quadratic factor. Requires the equilibrium to exist.
pub fn planar_crossings_e2(params: &ModelParams) -> Result<[PlanarCrossing; 2]> {
    let cs = params.constants();
    if cs.b <= 0.0 {
        return Err(Error::NotApplicable(
            "E2 does not exist (B <= 0, i.e. A >= K)".into(),
        ));
    }
    Ok(planar_crossings(&quadratic_factor_e2(params)))
}

/// Crossing events of the resource/top-predator quadratic factor.
pub fn planar_crossings_e3(params: &ModelParams) -> Result<[PlanarCrossing; 2]> {
    let cs = params.constants();
    if cs.d <= 0.0 {
        return Err(Error::NotApplicable(
            "E3 does not exist (D <= 0, i.e. C >= K)".into(),
        ));
    }
    Ok(planar_crossings(&quadratic_factor_e3(params)))
}

fn planar_hopf(
    kind: EquilibriumKind,
    qf: &QuadraticFactor,
    hypotheses: Vec<CriterionCheck>,
) -> HopfReport {
    let (_, mu_plus) = planar_frequencies(qf);
    // Conventional crossing-delay sequence (2k+1) pi / (2 mu); its first
    // member is the genuine first crossing and its spacing is pi/mu.
    let tau_sequence = (0..DEFAULT_SEQUENCE_LEN)
        .map(|k| (2 * k + 1) as f64 * PI / (2.0 * mu_plus))
        .collect();
    let trans = 2.0 * mu_plus * mu_plus - qf.damping * qf.damping - 2.0 * qf.restoring;
    HopfReport {
        eq_kind: kind,
        critical: CriticalDelay::Finite(PI / (2.0 * mu_plus)),
        omega: Some(mu_plus),
        tau_sequence,
        transversality_sign: Some(if trans >= 0.0 { 1 } else { -1 }),
        hypotheses,
        outside_sufficient_condition: false,
        near_degenerate: false,
        non_simple_crossing: false,
    }
}

/// Hopf threshold of the resource/intermediate-predator equilibrium:
/// requires existence (`B > 0`) and zero-delay stability (`R < 0`).
pub fn hopf_e2(params: &ModelParams) -> Result<HopfReport> {
    let cs = params.constants();
    if cs.b <= 0.0 {
        return Err(Error::NotApplicable(
            "E2 does not exist (B <= 0, i.e. A >= K)".into(),
        ));
    }
    if cs.r >= 0.0 {
        return Err(Error::NotApplicable(format!(
            "R >= 0 (R = {}): E2 unstable at tau = 0, no switch to detect",
            cs.r
        )));
    }
    Ok(planar_hopf(
        EquilibriumKind::E2,
        &quadratic_factor_e2(params),
        vec![
            CriterionCheck::positive("B>0", cs.b),
            CriterionCheck::positive("-R>0", -cs.r),
        ],
    ))
}

/// Hopf threshold of the resource/top-predator equilibrium: requires
/// existence (`D > 0`) and zero-delay stability (`Q < 0`).
pub fn hopf_e3(params: &ModelParams) -> Result<HopfReport> {
    let cs = params.constants();
    if cs.d <= 0.0 {
        return Err(Error::NotApplicable(
            "E3 does not exist (D <= 0, i.e. C >= K)".into(),
        ));
    }
    if cs.q >= 0.0 {
        return Err(Error::NotApplicable(format!(
            "Q >= 0 (Q = {}): E3 unstable at tau = 0, no switch to detect",
            cs.q
        )));
    }
    Ok(planar_hopf(
        EquilibriumKind::E3,
        &quadratic_factor_e3(params),
        vec![
            CriterionCheck::positive("D>0", cs.d),
            CriterionCheck::positive("-Q>0", -cs.q),
        ],
    ))
}

/// One crossing frequency of the interior characteristic equation.
#[derive(Debug, Clone, Copy)]
pub struct InteriorCrossing {
    /// Root of the reduced cubic (`omega^2`).
    pub u: f64,
    pub omega: f64,
    /// Quadrant-resolved angle `omega * tau` in `(0, 2 pi)`.
    pub theta: f64,
    /// First delay of this frequency's crossing sequence.
    pub tau_first: f64,
    /// Derivative of the reduced cubic at `u`; its sign is the crossing
    /// direction.
    pub h_derivative: f64,
}

/// Coefficients of the reduced cubic `h(u) = u^3 + alpha u^2 + beta u +
/// gamma` whose positive roots are the squared crossing frequencies.
pub fn interior_reduced_cubic(params: &ModelParams) -> Result<(f64, f64, f64)> {
    let cf = interior_char_coeffs(params)?;
    Ok((
        -2.0 * cf.a - cf.c * cf.c,
        cf.a * cf.a + 2.0 * cf.c * cf.d,
        cf.b * cf.b - cf.d * cf.d,
    ))
}

/// All imaginary-axis crossing frequencies of the interior equilibrium,
/// sorted by `tau_first`. Empty when the reduced cubic has no positive root.
pub fn interior_crossings(params: &ModelParams) -> Result<Vec<InteriorCrossing>> {
    let cf = interior_char_coeffs(params)?;
    let (alpha, beta, gamma) = interior_reduced_cubic(params)?;
    let mut out = Vec::new();
    for u in cubic_real_roots(alpha, beta, gamma) {
        if u <= 0.0 {
            continue;
        }
        let omega = u.sqrt();
        let den = cf.c * u - cf.d;
        if den == 0.0 {
            return Err(Error::Internal(
                "degenerate crossing: delayed coefficient vanishes at the candidate frequency"
                    .into(),
            ));
        }
        let cos_val = (cf.b / den).clamp(-1.0, 1.0);
        let sin_req = (omega * u - cf.a * omega) / den;
        let principal = cos_val.acos();
        // Both equations of the crossing pair determine omega*tau modulo
        // 2 pi; flip to the mirror angle when the principal branch
        // contradicts the imaginary-part equation.
        let theta = if (principal.sin() - sin_req).abs()
            <= ((2.0 * PI - principal).sin() - sin_req).abs()
        {
            principal
        } else {
            2.0 * PI - principal
        };
        out.push(InteriorCrossing {
            u,
            omega,
            theta,
            tau_first: theta / omega,
            h_derivative: 3.0 * u * u + 2.0 * alpha * u + beta,
        });
    }
    out.sort_by(|l, r| l.tau_first.total_cmp(&r.tau_first));
    Ok(out)
}

/// Hopf threshold of the interior equilibrium.
///
/// Requires existence and zero-delay stability. The covered regime is
/// `S > 0` with `b < 0`; when `S > 0` but `b >= 0` and the literal
/// Routh-Hurwitz inequalities still hold, the same machinery runs and the
/// report is flagged `outside_sufficient_condition`. When no crossing
/// frequency exists, the report says `absolutely-stable` if the reduced
/// cubic provably stays positive on `(0, inf)`, else `unknown`.
pub fn hopf_e4(params: &ModelParams) -> Result<HopfReport> {
    let eq = equilibrium(params, EquilibriumKind::E4);
    if !eq.defined {
        return Err(Error::UndefinedEquilibrium(
            "interior equilibrium has S = 0".into(),
        ));
    }
    if !eq.exists {
        return Err(Error::NotApplicable(
            "E4 does not exist (P/S, Q/S, R/S not all positive)".into(),
        ));
    }
    let cs = params.constants();
    let cf = interior_char_coeffs(params)?;
    if cs.s <= 0.0 {
        return Err(Error::NotApplicable(format!(
            "S>0 fails (S = {}): E4 unstable at tau = 0, no switch to detect",
            cs.s
        )));
    }
    let mut hypotheses = vec![
        CriterionCheck::positive("S>0", cs.s),
        CriterionCheck::positive("-b>0", -cf.b),
    ];
    let covered = cf.b < 0.0;
    if !covered {
        // Outside the proved sufficient region: fall back to the literal
        // Routh-Hurwitz inequalities for zero-delay stability.
        let rh = cf.a * cf.c - (cf.b + cf.d);
        hypotheses.push(CriterionCheck::positive("a>0", cf.a));
        hypotheses.push(CriterionCheck::positive("c>0", cf.c));
        hypotheses.push(CriterionCheck::positive("b+d>0", cf.b + cf.d));
        hypotheses.push(CriterionCheck::positive("a*c-(b+d)>0", rh));
        if !(cf.a > 0.0 && cf.c > 0.0 && cf.b + cf.d > 0.0 && rh > 0.0) {
            return Err(Error::NotApplicable(
                "b<0 fails and the Routh-Hurwitz inequalities do not hold: \
                 E4 unstable at tau = 0, no switch to detect"
                    .into(),
            ));
        }
    }

    let (alpha, beta, gamma) = interior_reduced_cubic(params)?;
    let crossings = interior_crossings(params)?;

    if crossings.is_empty() {
        if covered {
            // gamma = (b + d)(b - d) < 0 forces a sign change of the
            // reduced cubic on (0, inf); reaching this point means the
            // solver lost a root.
            return Err(Error::Internal(format!(
                "no positive root of the reduced cubic despite gamma = {gamma} < 0"
            )));
        }
        let critical = if gamma > 0.0 && cubic_positive_on_positive_axis(alpha, beta, gamma) {
            CriticalDelay::AbsolutelyStable
        } else {
            CriticalDelay::Unknown
        };
        return Ok(HopfReport {
            eq_kind: EquilibriumKind::E4,
            critical,
            omega: None,
            tau_sequence: Vec::new(),
            transversality_sign: None,
            hypotheses,
            outside_sufficient_condition: !covered,
            near_degenerate: false,
            non_simple_crossing: false,
        });
    }

    let mut chosen = crossings[0];
    let mut near_degenerate = false;
    for cand in &crossings[1..] {
        if (cand.tau_first - chosen.tau_first).abs() <= TAU_TIE_TOL {
            near_degenerate = true;
            if cand.omega > chosen.omega {
                chosen = *cand;
            }
        }
    }

    // A repeated reduced-cubic root (by value, counting multiplicity) makes
    // the crossing non-simple and the transversality sign meaningless.
    let non_simple = crossings
        .iter()
        .filter(|other| {
            (other.u - chosen.u).abs() <= REPEATED_ROOT_REL_TOL * chosen.u.abs().max(1.0)
        })
        .count()
        > 1
        || chosen.h_derivative == 0.0;

    let tau_sequence = (0..DEFAULT_SEQUENCE_LEN)
        .map(|k| (chosen.theta + 2.0 * PI * k as f64) / chosen.omega)
        .collect();

    Ok(HopfReport {
        eq_kind: EquilibriumKind::E4,
        critical: CriticalDelay::Finite(chosen.tau_first),
        omega: Some(chosen.omega),
        tau_sequence,
        transversality_sign: if non_simple {
            None
        } else {
            Some(if chosen.h_derivative >= 0.0 { 1 } else { -1 })
        },
        hypotheses,
        outside_sufficient_condition: !covered,
        near_degenerate,
        non_simple_crossing: non_simple,
    })
}

/// Whether `u^3 + alpha u^2 + beta u + gamma > 0` for all `u > 0`, decided
/// from the cubic's shape (assumes `gamma > 0`).
fn cubic_positive_on_positive_axis(alpha: f64, beta: f64, gamma: f64) -> bool {
    debug_assert!(gamma > 0.0);
    let disc = alpha * alpha - 3.0 * beta;
    if disc < 0.0 {
        return true; // monotone increasing
    }
    let u_plus = (-alpha + disc.sqrt()) / 3.0;
    if u_plus <= 0.0 {
        return true; // increasing on the positive axis
    }
    // Local minimum above the axis keeps the cubic positive.
    let h = ((u_plus + alpha) * u_plus + beta) * u_plus + gamma;
    h > 0.0
}

/// Sign of `d(Re lambda)/d tau` at an imaginary-axis crossing of `qp`,
/// via the closed-form expression matching the quasi-polynomial's shape.
///
/// `(i omega, tau)` must be an approximate root (residual below 1e-8).
pub fn crossing_direction(qp: &QuasiPolynomial, omega: f64, tau: f64) -> Result<i8> {
    if !omega.is_finite() || !tau.is_finite() {
        return Err(Error::InvalidInput(
            "crossing frequency and delay must be finite".into(),
        ));
    }
    let residual = eval_char(&qp.with_tau(tau), Complex64::new(0.0, omega)).norm();
    if residual >= CROSSING_RESIDUAL_TOL {
        return Err(Error::InvalidCrossing {
            residual,
            tol: CROSSING_RESIDUAL_TOL,
        });
    }

    let value = if qp.q2 == 0.0 && qp.q1 == 0.0 && qp.q0 == 0.0 {
        return Err(Error::InvalidInput(
            "quasi-polynomial has no delayed term; roots do not move with tau".into(),
        ));
    } else if qp.q0 == 0.0 && qp.q2 != 0.0 {
        // Embedded planar factor: damping q2, restoring p1.
        2.0 * omega * omega - qp.q2 * qp.q2 - 2.0 * qp.p1
    } else if qp.p2 == 0.0 && qp.q1 == 0.0 && qp.q2 != 0.0 {
        // Interior shape (0, a, b; c, 0, d).
        let (a, c, d) = (qp.p1, qp.q2, qp.q0);
        let alpha = -2.0 * a - c * c;
        let beta = a * a + 2.0 * c * d;
        let w2 = omega * omega;
        3.0 * w2 * w2 + 2.0 * alpha * w2 + beta
    } else if qp.p0 == 0.0 && qp.q2 != 0.0 {
        // Product of two fixed real roots with the delayed scalar factor:
        // Re d lambda/d tau = omega^2 / (1 + omega^2 tau^2) > 0.
        return Ok(1);
    } else {
        return Err(Error::InvalidInput(
            "unrecognized quasi-polynomial shape for crossing-direction dispatch".into(),
        ));
    };

    if value == 0.0 {
        return Err(Error::NotApplicable(
            "transversality derivative vanishes: non-simple crossing".into(),
        ));
    }
    Ok(if value > 0.0 { 1 } else { -1 })
}

/// Real roots of `u^3 + c2 u^2 + c1 u + c0` in increasing order:
/// trigonometric/Cardano closed forms, each polished by one Newton step.
pub(crate) fn cubic_real_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = c2 * (2.0 * c2 * c2 / 27.0 - c1 / 3.0) + c0;

    let mut roots = if p == 0.0 && q == 0.0 {
        vec![-shift]
    } else {
        let disc = 0.25 * q * q + p * p * p / 27.0;
        if disc > 0.0 {
            // One real root; pick the cube-root branch avoiding cancellation.
            let sq = disc.sqrt();
            let u1 = if q <= 0.0 {
                (-0.5 * q + sq).cbrt()
            } else {
                (-0.5 * q - sq).cbrt()
            };
            let t = u1 - p / (3.0 * u1);
            vec![t - shift]
        } else {
            // Three real roots (possibly repeated) via the trigonometric form.
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            (0..3)
                .map(|k| m * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift)
                .collect()
        }
    };

    for r in &mut roots {
        let f = ((*r + c2) * *r + c1) * *r + c0;
        let fp = (3.0 * *r + 2.0 * c2) * *r + c1;
        if fp != 0.0 {
            let step = f / fp;
            if step.is_finite() {
                *r -= step;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}
