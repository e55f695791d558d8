//! Acceptance suite: one test per criterion, each printing a summary line.
//!
//! Run with `cargo test -p igp-dde --test acceptance -- --nocapture` to see
//! the measured values behind every verdict.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use igp_dde::branch::{amplitude_growth_check, sweep, SweepSettings};
use igp_dde::critical_delay::{hopf_e1, hopf_e2, hopf_e4, interior_reduced_cubic};
use igp_dde::dde_sim::{
    classify_endstate, integrate, oscillation_metrics, EndState, History,
};
use igp_dde::model::{equilibria, equilibrium, EquilibriumKind, ModelParams, StateTriple};
use igp_dde::presets;
use igp_dde::spectrum_oracle::find_crossing;
use igp_dde::stability::{char_poly, interior_char_coeffs, quadratic_factor_e2, tau0_stability};

use common::{
    draw_hypothesis_satisfying, jittered_params, next_event_after_critical,
    random_positive_params, rng,
};
use rand::Rng;

/// Best-of-several wall time of a closed-form computation, measured warm.
fn best_elapsed<T>(mut f: impl FnMut() -> T) -> Duration {
    let _ = f(); // warm-up
    (0..10)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed()
        })
        .min()
        .unwrap()
}

#[test]
fn criterion_1_resource_only_threshold() {
    let params = presets::example1().params;
    let report = hopf_e1(&params).unwrap();
    let tau_c = report.tau_critical().unwrap();

    assert_eq!(tau_c, PI / (2.0 * params.a0), "closed form must be exact");
    #[allow(clippy::approx_constant)] // published 4-decimal reference
    let reference = 1.5708;
    assert!((tau_c - reference).abs() < 5e-5, "tau_c = {tau_c}");

    let elapsed = best_elapsed(|| hopf_e1(&params).unwrap());
    assert!(elapsed < Duration::from_millis(1), "took {elapsed:?}");
    println!("criterion 1 PASS: tau_c = {tau_c:.6} = pi/2, computed in {elapsed:?}");
}

#[test]
fn criterion_2_planar_threshold() {
    let params = presets::example2().params;
    let report = hopf_e2(&params).unwrap();
    let tau = report.tau_critical().unwrap();
    let mu = report.omega.unwrap();
    assert!((tau - 1.6573).abs() <= 5e-4, "tau = {tau}");

    // Both crossing equations of the planar factor at (mu+, tau).
    let qf = quadratic_factor_e2(&params);
    let real_residual = qf.damping * mu * (mu * tau).sin() - (mu * mu - qf.restoring);
    let imag_residual = qf.damping * mu * (mu * tau).cos();
    assert!(real_residual.abs() < 1e-9, "real residual {real_residual:e}");
    assert!(imag_residual.abs() < 1e-9, "imag residual {imag_residual:e}");
    println!(
        "criterion 2 PASS: tau = {tau:.6}, mu+ = {mu:.6}, crossing residuals \
         ({real_residual:.2e}, {imag_residual:.2e})"
    );
}

#[test]
fn criterion_3_interior_threshold_and_equilibrium() {
    let params = presets::example3().params;

    let eqs = equilibria(&params);
    let e4 = eqs[4];
    assert!(e4.exists);
    let expected = [0.7778, 0.5778, 0.0556];
    for (got, want) in e4.coords.iter().zip(expected) {
        assert!((got - want).abs() <= 5e-4, "{got} vs {want}");
    }

    let report = hopf_e4(&params).unwrap();
    let tau0 = report.tau_critical().unwrap();
    assert!((tau0 - 1.7438).abs() <= 5e-4, "tau0 = {tau0}");
    assert_eq!(report.transversality_sign, Some(1));

    let elapsed = best_elapsed(|| {
        let eqs = equilibria(&params);
        let report = hopf_e4(&params).unwrap();
        (eqs, report)
    });
    assert!(elapsed < Duration::from_millis(10), "took {elapsed:?}");
    println!(
        "criterion 3 PASS: E4 = ({:.4}, {:.4}, {:.4}), tau0 = {tau0:.6}, \
         transversality +1, computed in {elapsed:?}",
        e4.coords[0], e4.coords[1], e4.coords[2]
    );
}

#[test]
fn criterion_4_oracle_equivalence() {
    let suite_start = Instant::now();
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;

    let mut check = |params: &ModelParams,
                     kind: EquilibriumKind,
                     tau_closed: f64,
                     lo: f64,
                     hi: f64| {
        let eq = equilibrium(params, kind);
        let qp = char_poly(params, &eq).unwrap();
        let (tau_oracle, _) = find_crossing(|t| qp.with_tau(t), lo, hi)
            .unwrap_or_else(|e| panic!("{kind} oracle failed on [{lo}, {hi}]: {e}"));
        let err = (tau_oracle - tau_closed).abs();
        assert!(
            err <= 1e-6,
            "{kind}: oracle {tau_oracle} vs closed form {tau_closed} (err {err:e})"
        );
        checked += 1;
        if err > worst {
            worst = err;
        }
    };

    // The three reference parameter sets with generous brackets.
    let p1 = presets::example1().params;
    check(
        &p1,
        EquilibriumKind::E1,
        hopf_e1(&p1).unwrap().tau_critical().unwrap(),
        1.0,
        2.0,
    );
    let p2 = presets::example2().params;
    check(
        &p2,
        EquilibriumKind::E2,
        hopf_e2(&p2).unwrap().tau_critical().unwrap(),
        1.0,
        2.5,
    );
    let p3 = presets::example3().params;
    check(
        &p3,
        EquilibriumKind::E4,
        hopf_e4(&p3).unwrap().tau_critical().unwrap(),
        1.0,
        2.5,
    );

    // Random hypothesis-satisfying draws, 50 per equilibrium kind.
    let mut rng = rng(0x0acce5);
    for kind in [
        EquilibriumKind::E1,
        EquilibriumKind::E2,
        EquilibriumKind::E3,
        EquilibriumKind::E4,
    ] {
        let mut done = 0;
        while done < 50 {
            let (params, report) = draw_hypothesis_satisfying(kind, &mut rng);
            let tau_c = report.tau_critical().unwrap();
            // Bracket strictly between zero and the next crossing event.
            let next = next_event_after_critical(kind, &params, tau_c);
            let lo = 0.8 * tau_c;
            let hi = tau_c + (0.2 * tau_c).min(0.45 * (next - tau_c));
            if !(hi.is_finite() && hi - lo > 1e-4) {
                continue;
            }
            check(&params, kind, tau_c, lo, hi);
            done += 1;
        }
    }

    let elapsed = suite_start.elapsed();
    assert!(checked >= 203);
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "criterion 4 PASS: {checked} crossings matched to 1e-6 (worst {worst:.2e}) \
         in {elapsed:?}"
    );
}

#[test]
fn criterion_5_stability_switch_simulation() {
    struct Case {
        preset: presets::Preset,
        kind: EquilibriumKind,
        tau_star: f64,
    }
    let cases = [
        Case {
            preset: presets::example1(),
            kind: EquilibriumKind::E1,
            tau_star: hopf_e1(&presets::example1().params)
                .unwrap()
                .tau_critical()
                .unwrap(),
        },
        Case {
            preset: presets::example2(),
            kind: EquilibriumKind::E2,
            tau_star: hopf_e2(&presets::example2().params)
                .unwrap()
                .tau_critical()
                .unwrap(),
        },
        Case {
            preset: presets::example3(),
            kind: EquilibriumKind::E4,
            tau_star: hopf_e4(&presets::example3().params)
                .unwrap()
                .tau_critical()
                .unwrap(),
        },
    ];

    for case in cases {
        let eq = equilibrium(&case.preset.params, case.kind);
        let history = History::constant(case.preset.history).unwrap();

        // 5% below the switch: settles onto the equilibrium.
        let tau = 0.95 * case.tau_star;
        let start = Instant::now();
        let traj = integrate(
            &case.preset.params.with_tau(tau),
            &history,
            1500.0,
            tau / 40.0,
        )
        .unwrap();
        let below_time = start.elapsed();
        assert!(below_time < Duration::from_secs(5), "{below_time:?}");
        assert_eq!(
            classify_endstate(&traj, &eq, 0.8),
            EndState::Converged,
            "{} below threshold",
            case.preset.name
        );
        let final_dev = traj.last().max_abs_diff(&eq.coords);
        assert!(final_dev < 1e-3, "final deviation {final_dev:e}");

        // 5% above: a sustained oscillation instead.
        let tau = 1.05 * case.tau_star;
        let start = Instant::now();
        let traj = integrate(
            &case.preset.params.with_tau(tau),
            &history,
            1500.0,
            tau / 40.0,
        )
        .unwrap();
        let above_time = start.elapsed();
        assert!(above_time < Duration::from_secs(5), "{above_time:?}");
        assert_eq!(
            classify_endstate(&traj, &eq, 0.8),
            EndState::Oscillating,
            "{} above threshold",
            case.preset.name
        );
        let amp = oscillation_metrics(&traj, 0.8)
            .peak_to_peak
            .iter()
            .copied()
            .fold(0.0, f64::max);
        assert!(amp > 0.05, "peak-to-peak {amp}");
        println!(
            "criterion 5 PASS ({}): {} converged (dev {final_dev:.1e}, {below_time:?}), \
             {} oscillating (p2p {amp:.3}, {above_time:?})",
            case.preset.name,
            0.95 * case.tau_star,
            tau
        );
    }
}

#[test]
fn criterion_6_bifurcation_diagram() {
    let start = Instant::now();
    let params = presets::example3().params;
    let grid: Vec<f64> = (0..=28).map(|i| 1.0 + 0.05 * i as f64).collect();
    let settings = SweepSettings::default();
    let diagram = sweep(&params, EquilibriumKind::E4, &grid, &settings).unwrap();

    let hopf = diagram.hopf_tau.unwrap();
    assert!((hopf - 1.7438476713606745).abs() < 1e-9);

    // The analytical flag flips exactly at the threshold, and the simulated
    // classification flips within the same grid cell.
    let last_stable = diagram
        .points
        .iter()
        .rev()
        .find(|p| p.eq_stable)
        .unwrap()
        .tau;
    let first_unstable = diagram
        .points
        .iter()
        .find(|p| !p.eq_stable)
        .unwrap()
        .tau;
    assert!(last_stable < hopf && hopf < first_unstable);
    for point in &diagram.points {
        assert_eq!(point.eq_stable, point.tau < hopf);
        if point.tau < hopf {
            assert_eq!(point.classification, EndState::Converged, "tau {}", point.tau);
        } else {
            assert!(
                point.amplitude.iter().all(|a| *a > 0.0),
                "tau {}: {:?}",
                point.tau,
                point.amplitude
            );
        }
    }

    let report = amplitude_growth_check(&diagram).unwrap();
    assert!(report.pass, "{report:?}");

    // Shared oscillation period across all three components past onset.
    let e4 = equilibrium(&params, EquilibriumKind::E4);
    let history = History::constant(StateTriple::new(
        e4.coords[0] * 1.01,
        e4.coords[1] * 1.01,
        e4.coords[2] * 1.01,
    ))
    .unwrap();
    for tau in [1.85, 1.95] {
        let traj = integrate(&params.with_tau(tau), &history, 3000.0, tau / 40.0).unwrap();
        let metrics = oscillation_metrics(&traj, 0.8);
        let periods: Vec<f64> = metrics.period.iter().map(|p| p.unwrap()).collect();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let rel = (periods[i] - periods[j]).abs() / periods[i];
                assert!(
                    rel < 0.05,
                    "components {i}/{j} disagree at tau {tau}: {periods:?}"
                );
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "criterion 6 PASS: growth check ok ({}), switch inside ({last_stable}, \
         {first_unstable}), common periods past onset, in {elapsed:?}",
        report.message
    );
}

#[test]
fn criterion_7_integrator_order() {
    let preset = presets::example3();
    let tau = 1.6;
    let t_end = 32.0;
    let history = History::constant(preset.history).unwrap();
    let run = |m: usize| {
        integrate(&preset.params.with_tau(tau), &history, t_end, tau / m as f64)
            .unwrap()
            .last()
    };
    let reference = run(192); // dt/8 relative to the coarse run
    let coarse = run(24).max_abs_diff(&reference.as_array());
    let halved = run(48).max_abs_diff(&reference.as_array());
    let ratio = coarse / halved;
    assert!(
        (12.0..=20.0).contains(&ratio),
        "convergence ratio {ratio} (errors {coarse:e} / {halved:e})"
    );
    println!("criterion 7 PASS: dt-halving error ratio {ratio:.2} in [12, 20]");
}

#[test]
fn criterion_8_structural_invariants() {
    let mut rng = rng(0x57a7e);

    // Existence/stability inequalities match their raw product forms.
    for _ in 0..1000 {
        let p = random_positive_params(&mut rng);
        let cs = p.constants();
        assert_eq!(cs.b > 0.0, cs.a < cs.k);
        assert_eq!(cs.d > 0.0, cs.c < cs.k);
        assert_eq!(
            cs.r < 0.0,
            p.a0 * p.b1 * p.c2 + p.a2 * p.b0 * p.c1 < p.a1 * p.b0 * p.c2 + p.a2 * p.b1 * p.c0
        );
        assert_eq!(
            cs.q < 0.0,
            p.a1 * p.b3 * p.c0 + p.a3 * p.b1 * p.c0 < p.a0 * p.b3 * p.c1 + p.a3 * p.b0 * p.c1
        );
        assert_eq!(
            cs.s > 0.0,
            p.a1 * p.b3 * p.c2 + p.a3 * p.b1 * p.c2 > p.a2 * p.b3 * p.c1
        );
        if cs.s != 0.0 {
            // Constant-term identity of the interior characteristic
            // equation, to 1e-12 relative.
            let cf = interior_char_coeffs(&p).unwrap();
            let lhs = cf.b + cf.d;
            let rhs = cs.p * cs.q * cs.r / (cs.s * cs.s);
            let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
            assert!(
                ((lhs - rhs) / scale).abs() < 1e-12,
                "b+d identity violated: {lhs} vs {rhs}"
            );
            if equilibrium(&p, EquilibriumKind::E4).exists {
                assert_eq!(cf.b < 0.0, p.a2 * p.b3 * p.c1 > p.a3 * p.b1 * p.c2);
            }
        }
    }

    // Sufficient sign condition implies zero-delay stability, and forces the
    // sign pattern of the reduced cubic; transversality is +1 at the
    // threshold in every covered case.
    let base3 = presets::example3().params;
    for _ in 0..1000 {
        let p = loop {
            let cand = jittered_params(&base3, &mut rng, 1.3);
            if !equilibrium(&cand, EquilibriumKind::E4).exists {
                continue;
            }
            let cs = cand.constants();
            if cs.s <= 0.0 {
                continue;
            }
            if interior_char_coeffs(&cand).unwrap().b < 0.0 {
                break cand;
            }
        };
        let verdict = tau0_stability(&p, &equilibrium(&p, EquilibriumKind::E4)).unwrap();
        assert!(verdict.stable, "{verdict:?}");
        let (alpha, beta, gamma) = interior_reduced_cubic(&p).unwrap();
        assert!(
            alpha < 0.0 && beta > 0.0 && gamma < 0.0,
            "sign pattern violated: ({alpha}, {beta}, {gamma})"
        );
        let report = hopf_e4(&p).unwrap();
        assert_eq!(report.transversality_sign, Some(1), "{report:?}");
    }

    // Reported crossing-delay sequences have the exact spacing of their
    // construction: pi/mu for the planar factors, 2 pi/omega interior.
    for kind in [EquilibriumKind::E2, EquilibriumKind::E3] {
        for _ in 0..500 {
            let (_, report) = draw_hypothesis_satisfying(kind, &mut rng);
            let mu = report.omega.unwrap();
            assert_eq!(report.transversality_sign, Some(1));
            for pair in report.tau_sequence.windows(2) {
                assert!((pair[1] - pair[0] - PI / mu).abs() < 1e-9 * pair[1].abs().max(1.0));
            }
        }
    }
    for _ in 0..1000 {
        let (_, report) = draw_hypothesis_satisfying(EquilibriumKind::E4, &mut rng);
        let omega = report.omega.unwrap();
        for pair in report.tau_sequence.windows(2) {
            assert!(
                (pair[1] - pair[0] - 2.0 * PI / omega).abs() < 1e-9 * pair[1].abs().max(1.0)
            );
        }
    }

    // Extinct components stay exactly extinct under simulation.
    for i in 0..1000 {
        let p = random_positive_params(&mut rng).with_tau(0.5);
        let x0 = rng.random_range(0.1..3.0);
        let other = rng.random_range(0.0..2.0);
        let hist = if i % 2 == 0 {
            StateTriple::new(x0, 0.0, other)
        } else {
            StateTriple::new(x0, other, 0.0)
        };
        let traj = match integrate(&p, &History::constant(hist).unwrap(), 5.0, 0.5 / 20.0) {
            Ok(traj) => traj,
            Err(igp_dde::Error::Divergence { .. }) => continue,
            Err(other) => panic!("{other}"),
        };
        if i % 2 == 0 {
            assert!(traj.states().iter().all(|s| s.y == 0.0));
        } else {
            assert!(traj.states().iter().all(|s| s.z == 0.0));
        }
    }

    println!(
        "criterion 8 PASS: equivalences, b+d identity, sign pattern, transversality, \
         sequence spacing, and face invariance hold over the random draws"
    );
}

#[test]
fn criterion_9_delayed_logistic_limit() {
    // Decoupled resource: with no predators in the history the predation
    // terms vanish identically, so zero coupling coefficients are exact.
    let params = |tau: f64| ModelParams {
        a0: 1.0,
        a1: 0.5,
        a2: 0.0,
        a3: 0.0,
        b0: 0.75,
        b1: 0.25,
        b3: 0.5,
        c0: 0.5,
        c1: 0.15,
        c2: 0.3,
        tau,
    };
    let history = History::constant(StateTriple::new(3.0, 0.0, 0.0)).unwrap();
    let carrying_capacity = 2.0;

    // a0 tau = 1.4 < pi/2: the resource settles at the carrying capacity.
    let traj = integrate(&params(1.4), &history, 1500.0, 1.4 / 40.0).unwrap();
    assert!((traj.last().x - carrying_capacity).abs() < 1e-3);
    assert!(traj.states().iter().all(|s| s.y == 0.0 && s.z == 0.0));

    // a0 tau = 1.7 > pi/2: a sustained oscillation.
    let traj = integrate(&params(1.7), &history, 1500.0, 1.7 / 40.0).unwrap();
    let xs: Vec<f64> = traj.window(0.8).iter().map(|s| s.x).collect();
    let p2p = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(p2p > 0.05, "peak-to-peak {p2p}");
    assert!(traj.states().iter().all(|s| s.y == 0.0 && s.z == 0.0));
    println!(
        "criterion 9 PASS: delayed-logistic limit converges at a0*tau = 1.4 and \
         oscillates at 1.7 (p2p {p2p:.3})"
    );
}
