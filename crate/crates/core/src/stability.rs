//! Linearization, characteristic quasi-polynomial, and zero-delay verdicts.
//!
//! Around an equilibrium `(x*, y*, z*)` the system linearizes to
//! `X'(t) = M0 X(t) + M1 X(t - tau)`, where only the `(0, 0)` entry of `M1`
//! is nonzero (`-a1 x*`, the delayed self-limitation). Local stability is
//! governed by the roots of the characteristic function
//!
//! ```text
//! chi(lambda) = det(lambda I - M0 - M1 e^{-lambda tau})
//!             = lambda^3 + p2 lambda^2 + p1 lambda + p0
//!               + (q2 lambda^2 + q1 lambda + q0) e^{-lambda tau}.
//! ```
//!
//! At `tau = 0` this is an ordinary cubic and the Routh-Hurwitz criterion
//! decides stability; [`tau0_stability`] evaluates the per-equilibrium
//! inequalities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Equilibrium, EquilibriumKind, ModelParams};

/// Dense 3x3 linearization pair: instantaneous part `m0` and delayed part
/// `m1` (only entry `(0, 0)` can be nonzero).
#[derive(Debug, Clone, Copy)]
pub struct Linearization {
    pub m0: [[f64; 3]; 3],
    pub m1: [[f64; 3]; 3],
}

fn check_linearizable(eq: &Equilibrium) -> Result<()> {
    if eq.kind == EquilibriumKind::E4 && !eq.defined {
        return Err(Error::UndefinedEquilibrium(
            "interior equilibrium has S = 0".into(),
        ));
    }
    if !(eq.exists || matches!(eq.kind, EquilibriumKind::E0 | EquilibriumKind::E1)) {
        return Err(Error::NotApplicable(format!(
            "{} does not exist for these parameters",
            eq.kind
        )));
    }
    Ok(())
}

/// Jacobian pair at an equilibrium.
///
/// Diagonal brackets that vanish by the equilibrium condition (the
/// own-equation bracket of every strictly positive component) are set to
/// zero analytically instead of being re-evaluated, so the specialized
/// coefficient structure downstream is exact.
pub fn linearize(params: &ModelParams, eq: &Equilibrium) -> Result<Linearization> {
    check_linearizable(eq)?;
    let [xs, ys, zs] = eq.coords;
    let p = params;

    let d0 = if xs > 0.0 {
        0.0
    } else {
        p.a0 - p.a1 * xs - p.a2 * ys - p.a3 * zs
    };
    let d1 = if ys > 0.0 {
        0.0
    } else {
        -p.b0 + p.b1 * xs - p.b3 * zs
    };
    let d2 = if zs > 0.0 {
        0.0
    } else {
        -p.c0 + p.c1 * xs + p.c2 * ys
    };

    let m0 = [
        [d0, -p.a2 * xs, -p.a3 * xs],
        [p.b1 * ys, d1, -p.b3 * ys],
        [p.c1 * zs, p.c2 * zs, d2],
    ];
    let mut m1 = [[0.0; 3]; 3];
    m1[0][0] = -p.a1 * xs;
    Ok(Linearization { m0, m1 })
}

/// Coefficients of the degree-3 single-delay characteristic function
/// `lambda^3 + p2 lambda^2 + p1 lambda + p0
///  + (q2 lambda^2 + q1 lambda + q0) e^{-lambda tau}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiPolynomial {
    pub p2: f64,
    pub p1: f64,
    pub p0: f64,
    pub q2: f64,
    pub q1: f64,
    pub q0: f64,
    pub tau: f64,
}

impl QuasiPolynomial {
    /// Same coefficients at a different delay.
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    /// Sum of coefficient magnitudes, used to bound root searches.
    pub fn coeff_magnitude(&self) -> f64 {
        self.p2.abs()
            + self.p1.abs()
            + self.p0.abs()
            + self.q2.abs()
            + self.q1.abs()
            + self.q0.abs()
    }

    pub fn is_finite(&self) -> bool {
        [self.p2, self.p1, self.p0, self.q2, self.q1, self.q0, self.tau]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Characteristic quasi-polynomial at an equilibrium, at `params.tau`.
///
/// Built generically from the linearization: the delayed part contributes
/// `a1 x*` times the trailing 2x2 minor of `lambda I - M0`. At the interior
/// equilibrium this specializes to `p = (0, a, b)`, `q = (c, 0, d)`; at the
/// planar equilibria a quadratic factor with one real cofactor root; at the
/// resource-only equilibrium a product of the delayed scalar factor with two
/// fixed real roots.
pub fn char_poly(params: &ModelParams, eq: &Equilibrium) -> Result<QuasiPolynomial> {
    let lin = linearize(params, eq)?;
    let m = lin.m0;
    let w = -lin.m1[0][0]; // a1 x*

    let tr = m[0][0] + m[1][1] + m[2][2];
    let minor_sum = (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);

    Ok(QuasiPolynomial {
        p2: -tr,
        p1: minor_sum,
        p0: -det,
        q2: w,
        q1: -w * (m[1][1] + m[2][2]),
        q0: w * (m[1][1] * m[2][2] - m[1][2] * m[2][1]),
        tau: params.tau,
    })
}

/// Data of the planar-equilibrium factorization
/// `(lambda - outer_root)(lambda^2 + damping * lambda e^{-lambda tau} + restoring)`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticFactor {
    /// Coefficient of the delayed damping term.
    pub damping: f64,
    /// Restoring coefficient.
    pub restoring: f64,
    /// Real root of the linear cofactor (the transverse eigenvalue).
    pub outer_root: f64,
}

/// Quadratic-factor data at the resource/intermediate-predator equilibrium:
/// damping `a1 A`, restoring `a2 b0 B`, outer root `R / (a2 b1)`.
pub fn quadratic_factor_e2(params: &ModelParams) -> QuadraticFactor {
    let cs = params.constants();
    QuadraticFactor {
        damping: params.a1 * cs.a,
        restoring: params.a2 * params.b0 * cs.b,
        outer_root: cs.r / (params.a2 * params.b1),
    }
}

/// Quadratic-factor data at the resource/top-predator equilibrium:
/// damping `a1 C`, restoring `a3 c0 D`, outer root `Q / (a3 c1)`.
pub fn quadratic_factor_e3(params: &ModelParams) -> QuadraticFactor {
    let cs = params.constants();
    QuadraticFactor {
        damping: params.a1 * cs.c,
        restoring: params.a3 * params.c0 * cs.d,
        outer_root: cs.q / (params.a3 * params.c1),
    }
}

/// Coefficients of the interior-equilibrium characteristic equation
/// `lambda^3 + a lambda + b + (c lambda^2 + d) e^{-lambda tau}`, computed
/// from the closed forms in `P, Q, R, S`. Satisfies `b + d = P Q R / S^2`.
#[derive(Debug, Clone, Copy)]
pub struct InteriorCharCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub fn interior_char_coeffs(params: &ModelParams) -> Result<InteriorCharCoeffs> {
    let cs = params.constants();
    if cs.s == 0.0 {
        return Err(Error::UndefinedEquilibrium(
            "interior equilibrium has S = 0".into(),
        ));
    }
    let s2 = cs.s * cs.s;
    let s3 = s2 * cs.s;
    let pqr = cs.p * cs.q * cs.r;
    Ok(InteriorCharCoeffs {
        a: (cs.p * cs.q * params.a2 * params.b1
            + cs.p * cs.r * params.a3 * params.c1
            + cs.q * cs.r * params.b3 * params.c2)
            / s2,
        b: pqr * (params.a3 * params.b1 * params.c2 - params.a2 * params.b3 * params.c1) / s3,
        c: params.a1 * cs.p / cs.s,
        d: pqr * params.a1 * params.b3 * params.c2 / s3,
    })
}

/// One evaluated inequality of a stability verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionCheck {
    pub name: String,
    pub value: f64,
    pub holds: bool,
}

impl CriterionCheck {
    /// `value` must be strictly positive for the criterion to hold; a name
    /// like `"R<0"` pairs with `value = -R`.
    pub(crate) fn positive(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            holds: value > 0.0,
        }
    }
}

/// Zero-delay stability verdict with the inequalities that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct Tau0Verdict {
    pub eq_kind: EquilibriumKind,
    #[serde(rename = "stable_at_tau0")]
    pub stable: bool,
    /// True when some strict inequality sits exactly on its boundary; such
    /// cases are reported unstable-side but not classified.
    pub marginal: bool,
    /// True when the verdict came from the full Routh-Hurwitz evaluation
    /// rather than the proved sufficient sign condition (interior
    /// equilibrium with `S > 0` but `b >= 0`).
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub outside_sufficient_condition: bool,
    pub criteria: Vec<CriterionCheck>,
}

impl Tau0Verdict {
    fn from_criteria(
        eq_kind: EquilibriumKind,
        criteria: Vec<CriterionCheck>,
        outside: bool,
    ) -> Self {
        Self {
            eq_kind,
            stable: criteria.iter().all(|c| c.holds),
            marginal: criteria.iter().any(|c| c.value == 0.0),
            outside_sufficient_condition: outside,
            criteria,
        }
    }
}

/// Routh-Hurwitz verdict for an existing equilibrium at `tau = 0`.
///
/// Extinction is always unstable (one characteristic root is `a0 > 0`).
/// The resource-only point is stable iff `A > K` and `C > K`; the planar
/// points iff `R < 0` (resp. `Q < 0`). The interior point is unstable for
/// `S < 0`; for `S > 0` it is stable when `b < 0` (sufficient sign
/// condition), and otherwise the literal Routh-Hurwitz inequalities decide.
pub fn tau0_stability(params: &ModelParams, eq: &Equilibrium) -> Result<Tau0Verdict> {
    if eq.kind == EquilibriumKind::E4 && !eq.defined {
        return Err(Error::UndefinedEquilibrium(
            "interior equilibrium has S = 0".into(),
        ));
    }
    if !eq.exists {
        return Err(Error::NotApplicable(format!(
            "{} does not exist for these parameters",
            eq.kind
        )));
    }
    let cs = params.constants();
    let verdict = match eq.kind {
        EquilibriumKind::E0 => Tau0Verdict::from_criteria(
            eq.kind,
            vec![CriterionCheck {
                name: "a0<0".into(),
                value: params.a0,
                holds: false,
            }],
            false,
        ),
        EquilibriumKind::E1 => Tau0Verdict::from_criteria(
            eq.kind,
            vec![
                CriterionCheck::positive("A-K>0", cs.a - cs.k),
                CriterionCheck::positive("C-K>0", cs.c - cs.k),
            ],
            false,
        ),
        EquilibriumKind::E2 => Tau0Verdict::from_criteria(
            eq.kind,
            vec![CriterionCheck {
                name: "R<0".into(),
                value: cs.r,
                holds: cs.r < 0.0,
            }],
            false,
        ),
        EquilibriumKind::E3 => Tau0Verdict::from_criteria(
            eq.kind,
            vec![CriterionCheck {
                name: "Q<0".into(),
                value: cs.q,
                holds: cs.q < 0.0,
            }],
            false,
        ),
        EquilibriumKind::E4 => {
            let cf = interior_char_coeffs(params)?;
            if cs.s < 0.0 {
                // All of P, Q, R negative: b + d = PQR/S^2 < 0 fails the
                // Routh-Hurwitz constant-term condition outright.
                Tau0Verdict::from_criteria(
                    eq.kind,
                    vec![
                        CriterionCheck::positive("S>0", cs.s),
                        CriterionCheck::positive("b+d>0", cf.b + cf.d),
                    ],
                    false,
                )
            } else if cf.b < 0.0 {
                Tau0Verdict::from_criteria(
                    eq.kind,
                    vec![
                        CriterionCheck::positive("S>0", cs.s),
                        CriterionCheck::positive("-b>0", -cf.b),
                    ],
                    false,
                )
            } else {
                Tau0Verdict::from_criteria(
                    eq.kind,
                    vec![
                        CriterionCheck::positive("a>0", cf.a),
                        CriterionCheck::positive("c>0", cf.c),
                        CriterionCheck::positive("b+d>0", cf.b + cf.d),
                        CriterionCheck::positive("a*c-(b+d)>0", cf.a * cf.c - (cf.b + cf.d)),
                    ],
                    true,
                )
            }
        }
    };
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{equilibria, equilibrium};
    use crate::presets;
    use crate::spectrum_oracle::eval_char;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ex(n: usize) -> crate::presets::Preset {
        match n {
            1 => presets::example1(),
            2 => presets::example2(),
            3 => presets::example3(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn extinction_linearization_is_diagonal() {
        let p = ex(1).params;
        let eq = equilibrium(&p, EquilibriumKind::E0);
        let lin = linearize(&p, &eq).unwrap();
        assert_eq!(lin.m0[0], [p.a0, 0.0, 0.0]);
        assert_eq!(lin.m0[1], [0.0, -p.b0, 0.0]);
        assert_eq!(lin.m0[2], [0.0, 0.0, -p.c0]);
        assert_eq!(lin.m1, [[0.0; 3]; 3]);
    }

    #[test]
    fn resource_only_delayed_entry() {
        let p = ex(1).params;
        let eq = equilibrium(&p, EquilibriumKind::E1);
        let lin = linearize(&p, &eq).unwrap();
        assert_eq!(lin.m1[0][0], -1.0); // -a1 K = -0.5 * 2
    }

    #[test]
    fn interior_linearization_second_row() {
        let p = ex(3).params;
        let eq = equilibrium(&p, EquilibriumKind::E4);
        let lin = linearize(&p, &eq).unwrap();
        let row = lin.m0[1];
        assert!((row[0] - 0.5777777777777778).abs() < 1e-12);
        assert_eq!(row[1], 0.0);
        assert!((row[2] + 0.2888888888888889).abs() < 1e-12);
    }

    #[test]
    fn non_existing_equilibrium_not_linearizable() {
        let p = ex(1).params; // E2 does not exist here
        let eq = equilibrium(&p, EquilibriumKind::E2);
        assert!(matches!(
            linearize(&p, &eq),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn extinction_char_poly_is_plain_cubic() {
        let p = ex(2).params;
        let eq = equilibrium(&p, EquilibriumKind::E0);
        let qp = char_poly(&p, &eq).unwrap();
        assert_eq!((qp.q2, qp.q1, qp.q0), (0.0, 0.0, 0.0));
        // (lambda - a0)(lambda + b0)(lambda + c0)
        let (r0, r1, r2) = (p.a0, -p.b0, -p.c0);
        assert!((qp.p2 - -(r0 + r1 + r2)).abs() < 1e-14);
        assert!((qp.p1 - (r0 * r1 + r0 * r2 + r1 * r2)).abs() < 1e-14);
        assert!((qp.p0 - -(r0 * r1 * r2)).abs() < 1e-14);
    }

    #[test]
    fn interior_char_poly_matches_closed_forms() {
        let p = ex(3).params;
        let eq = equilibrium(&p, EquilibriumKind::E4);
        let qp = char_poly(&p, &eq).unwrap();
        assert_eq!(qp.p2, 0.0);
        assert_eq!(qp.q1, 0.0);

        let cf = interior_char_coeffs(&p).unwrap();
        assert!((cf.a - 0.4650864197530865).abs() < 1e-14);
        assert!((cf.b - -7.489711934156227e-4).abs() < 1e-16);
        assert!((cf.c - 0.38888888888888873).abs() < 1e-14);
        assert!((cf.d - 1.8724279835390567e-3).abs() < 1e-16);

        assert!((qp.p1 - cf.a).abs() < 1e-12);
        assert!((qp.p0 - cf.b).abs() < 1e-14);
        assert!((qp.q2 - cf.c).abs() < 1e-12);
        assert!((qp.q0 - cf.d).abs() < 1e-14);

        let cs = p.constants();
        let sum = cf.b + cf.d;
        let pqr_s2 = cs.p * cs.q * cs.r / (cs.s * cs.s);
        assert!(((sum - pqr_s2) / pqr_s2).abs() < 1e-12);
    }

    #[test]
    fn planar_quadratic_factor_values() {
        let qf = quadratic_factor_e2(&ex(2).params);
        assert_eq!(qf.damping, 0.75);
        assert_eq!(qf.restoring, 0.1875);
        assert!((qf.outer_root - -0.2).abs() < 1e-12);
    }

    /// The built coefficients must agree with the determinant evaluated
    /// directly in complex arithmetic at random points.
    #[test]
    fn char_poly_matches_direct_determinant() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for trial in 0..50 {
            let p = loop {
                let cand = random_params(&mut rng);
                if equilibria(&cand).iter().any(|e| e.exists) {
                    break cand;
                }
            };
            for eq in equilibria(&p) {
                if !(eq.exists || matches!(eq.kind, EquilibriumKind::E0 | EquilibriumKind::E1)) {
                    continue;
                }
                let qp = char_poly(&p, &eq).unwrap();
                let lin = linearize(&p, &eq).unwrap();
                for _ in 0..20 {
                    let lambda = Complex64::new(
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-3.0..3.0),
                    );
                    let via_coeffs = eval_char(&qp, lambda);
                    let direct = det_direct(&lin, lambda, p.tau);
                    let scale = direct.norm().max(1.0);
                    assert!(
                        (via_coeffs - direct).norm() / scale < 1e-9,
                        "trial {trial} {:?}: {via_coeffs} vs {direct}",
                        eq.kind
                    );
                }
            }
        }
    }

    fn det_direct(lin: &Linearization, lambda: Complex64, tau: f64) -> Complex64 {
        let e = (-lambda * tau).exp();
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let diag = if i == j { lambda } else { Complex64::ZERO };
                *entry = diag - lin.m0[i][j] - lin.m1[i][j] * e;
            }
        }
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn random_params(rng: &mut StdRng) -> crate::model::ModelParams {
        let mut draw = || rng.random_range(0.1..2.0);
        crate::model::ModelParams::new(
            [draw(), draw(), draw(), draw()],
            [draw(), draw(), draw()],
            [draw(), draw(), draw()],
            rng.random_range(0.0..2.0),
        )
        .unwrap()
    }

    #[test]
    fn tau0_verdicts_on_the_examples() {
        let p1 = ex(1).params;
        let v = tau0_stability(&p1, &equilibrium(&p1, EquilibriumKind::E1)).unwrap();
        assert!(v.stable && !v.marginal);

        let v0 = tau0_stability(&p1, &equilibrium(&p1, EquilibriumKind::E0)).unwrap();
        assert!(!v0.stable);

        let p2 = ex(2).params;
        let v2 = tau0_stability(&p2, &equilibrium(&p2, EquilibriumKind::E2)).unwrap();
        assert!(v2.stable);
        assert!((v2.criteria[0].value - -0.1).abs() < 1e-12);

        let p3 = ex(3).params;
        let v4 = tau0_stability(&p3, &equilibrium(&p3, EquilibriumKind::E4)).unwrap();
        assert!(v4.stable && !v4.outside_sufficient_condition);

        // E1 is unstable at tau = 0 for example 3 (A = 0.75 < K = 2).
        let v1 = tau0_stability(&p3, &equilibrium(&p3, EquilibriumKind::E1)).unwrap();
        assert!(!v1.stable);

        assert!(matches!(
            tau0_stability(&p1, &equilibrium(&p1, EquilibriumKind::E2)),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn boundary_equality_reports_marginal() {
        // A = K = 2 exactly: b0/b1 = 1.0/0.5 = a0/a1 = 1.0/0.5.
        let p = crate::model::ModelParams::new(
            [1.0, 0.5, 1.0, 0.6],
            [1.0, 0.5, 0.5],
            [3.0, 1.0, 0.3],
            0.0,
        )
        .unwrap();
        let v = tau0_stability(&p, &equilibrium(&p, EquilibriumKind::E1)).unwrap();
        assert!(v.marginal);
        assert!(!v.stable);
    }

    #[test]
    fn sufficient_condition_matches_routh_hurwitz_on_random_draws() {
        let mut rng = StdRng::seed_from_u64(0xabcd);
        let mut hits = 0;
        while hits < 200 {
            let p = random_params(&mut rng);
            let eq = equilibrium(&p, EquilibriumKind::E4);
            let cs = p.constants();
            if !eq.exists || cs.s <= 0.0 {
                continue;
            }
            let cf = interior_char_coeffs(&p).unwrap();
            if cf.b >= 0.0 {
                continue;
            }
            hits += 1;
            let v = tau0_stability(&p, &eq).unwrap();
            assert!(v.stable, "sufficient condition draw failed: {v:?}");
        }
    }
}
