use nalgebra::Vector3;
use nung_core::gravity::{sphere_field, PhysicalConstants, SphereBody};
use nung_core::metastate::SiteAmplitudes;
use nung_core::raytrace::{
    integrate_trajectory, run_beam, run_beam_with, slc_mutual_information, source_field,
    BeamScenario, Execution, ExitStatus, PhaseState, Site, SourceField, SourceRegime, StepControl,
};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn beam(n: usize) -> BeamScenario {
    BeamScenario {
        n_particles: n,
        ..BeamScenario::gedanken()
    }
}

/// Two-sided p-value of the pooled two-proportion z-test.
fn two_proportion_p(k1: usize, n1: usize, k2: usize, n2: usize) -> f64 {
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        return 1.0;
    }
    let z = ((p1 - p2) / se).abs();
    2.0 * (1.0 - Normal::standard().cdf(z))
}

#[test]
fn weighted_source_is_superposition_of_point_masses() {
    let ball = SphereBody::lead_ball();
    let k = PhysicalConstants::codata();
    let amps = SiteAmplitudes::from_weight(0.7, 0.4).unwrap();
    let p = Vector3::new(0.2, 0.3, -0.4);
    let f = source_field(SourceRegime::ScgUnmeasured, &ball, 1.0, &amps, &p, &k, None).unwrap();
    // both sites are outside the ball radius from p: point-mass law
    let point = |c: Vector3<f64>| {
        let d = p - c;
        -d * (k.g * ball.mass() / d.norm().powi(3))
    };
    let expected = point(Vector3::new(1.0, 0.0, 0.0)) * amps.weight_plus() + point(Vector3::new(-1.0, 0.0, 0.0)) * amps.weight_minus();
    assert!((f - expected).norm() / expected.norm() < 1e-14);
}

proptest! {
    #[test]
    fn symmetric_source_x_force_is_antisymmetric(x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0) {
        let ball = SphereBody::lead_ball();
        let k = PhysicalConstants::codata();
        let amps = SiteAmplitudes::equal();
        let a = source_field(SourceRegime::ScgUnmeasured, &ball, 1.0, &amps, &Vector3::new(x, y, z), &k, None).unwrap();
        let b = source_field(SourceRegime::ScgUnmeasured, &ball, 1.0, &amps, &Vector3::new(-x, y, z), &k, None).unwrap();
        prop_assert!((a.x + b.x).abs() <= 1e-12 * a.norm().max(f64::MIN_POSITIVE));
    }
}

#[test]
fn small_angle_deflection_matches_hyperbolic_orbit() {
    // gedanken units: angle ~ 1e-3 rad
    let b = 1.0;
    let v = 3e7;
    let gm_target = 5e-4 * b * v * v;
    let ball = SphereBody::new(45.0, 0.1).unwrap();
    let k = PhysicalConstants::new(gm_target / 45.0, 1.0, 3e8).unwrap();
    let amps = SiteAmplitudes::equal();
    let field = SourceField::new(SourceRegime::ScgCollapsed(Site::Plus), ball, b, &amps, k, None, false).unwrap();
    let z0 = 2000.0 * b;
    let start = PhaseState::new(Vector3::new(0.0, 0.0, -z0), Vector3::new(0.0, 0.0, v));
    let control = StepControl::new(400_000).unwrap();
    let tr = integrate_trajectory(start, &field, 2.0 * z0 / v, f64::INFINITY, &control).unwrap();
    let vel = tr.last.velocity;
    let angle = (vel.x / vel.z).atan();

    let gm = k.g * ball.mass();
    let v_inf2 = v * v - 2.0 * gm / (z0 * z0 + b * b).sqrt();
    let exact = 2.0 * (gm / (b * v_inf2)).atan();
    let small_angle = 2.0 * gm / (b * v * v);
    assert!(angle > 0.0, "pulled towards the ball");
    assert!(((angle - exact) / exact).abs() < 0.01, "angle {angle} exact {exact}");
    assert!(((small_angle - exact) / exact).abs() < 0.01);
    assert!(tr.max_energy_drift <= 1e-9, "drift {}", tr.max_energy_drift);
}

#[test]
fn step_halving_converges() {
    let s = BeamScenario::gedanken();
    let amps = SiteAmplitudes::equal();
    let field = SourceField::new(SourceRegime::ScgCollapsed(Site::Plus), s.ball, s.dx, &amps, s.constants, None, false).unwrap();
    let start = PhaseState::new(Vector3::new(0.0, 0.0, s.beam_source_z), Vector3::new(0.0, 0.0, s.beam_speed));
    let t = 1.05 * s.transit_time();
    let coarse = integrate_trajectory(start, &field, t, s.detector_z, &StepControl::new(1050).unwrap()).unwrap();
    let fine = integrate_trajectory(start, &field, t, s.detector_z, &StepControl::new(2100).unwrap()).unwrap();
    let (xc, xf) = (coarse.crossing.unwrap().position.x, fine.crossing.unwrap().position.x);
    assert!((xc - xf).abs() <= 1e-10 * xf.abs(), "coarse {xc} fine {xf}");
    assert!(coarse.max_energy_drift <= 1e-9);
}

#[test]
fn zero_field_beam_runs_straight() {
    let s = BeamScenario {
        ball: SphereBody::new(0.0, 0.1).unwrap(),
        beam_radius: 5e-4,
        ..beam(200)
    };
    let r = run_beam(&s, SourceRegime::NungDecohered, &SiteAmplitudes::equal(), 9).unwrap();
    assert_eq!(r.n_on_axis, 200);
}

#[test]
fn parallel_and_sequential_are_bit_identical() {
    let amps = SiteAmplitudes::from_weight(0.4, 0.0).unwrap();
    for s in [beam(3000), BeamScenario { beam_radius: 2e-3, ..beam(600) }] {
        for regime in [SourceRegime::NungDecohered, SourceRegime::ScgUnmeasured, SourceRegime::ScgCollapsed(Site::Minus)] {
            let seq = run_beam_with(&s, regime, &amps, 77, Execution::Sequential).unwrap();
            let par = run_beam_with(&s, regime, &amps, 77, Execution::Parallel).unwrap();
            assert_eq!(seq, par);
            for threads in [1, 3] {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
                let other = pool.install(|| run_beam(&s, regime, &amps, 77).unwrap());
                assert_eq!(other, par);
            }
        }
    }
}

#[test]
fn mirrored_experiment_swaps_deflections() {
    let amps = SiteAmplitudes::from_weight(0.3, 0.0).unwrap();
    for s in [beam(4000), BeamScenario { beam_radius: 5e-3, ..beam(500) }] {
        let m = BeamScenario { mirrored: true, ..s };
        for regime in [SourceRegime::NungDecohered, SourceRegime::ScgCollapsed(Site::Plus), SourceRegime::ScgUnmeasured] {
            let a = run_beam(&s, regime, &amps, 5).unwrap();
            let b = run_beam(&m, regime, &amps, 5).unwrap();
            assert_eq!(a.n_deflected_plus, b.n_deflected_minus);
            assert_eq!(a.n_deflected_minus, b.n_deflected_plus);
            assert_eq!(a.n_on_axis, b.n_on_axis);
            assert_eq!(a.mean_x, -b.mean_x);
        }
    }
}

#[test]
fn scg_beam_reacts_to_measurement() {
    let s = beam(10_000);
    let amps = SiteAmplitudes::equal();
    let unmeasured = run_beam(&s, SourceRegime::ScgUnmeasured, &amps, 1).unwrap();
    assert_eq!(unmeasured.n_on_axis, 10_000);
    assert!(unmeasured.receiver_bit());
    let collapsed = run_beam(&s, SourceRegime::ScgCollapsed(Site::Plus), &amps, 1).unwrap();
    assert_eq!(collapsed.n_on_axis, 0);
    assert_eq!(collapsed.n_deflected_plus, 10_000);
    let mi = slc_mutual_information(&unmeasured, &collapsed).unwrap();
    assert!((mi - 1.0).abs() < 1e-6);
    assert_eq!(mi, slc_mutual_information(&collapsed, &unmeasured).unwrap());
}

#[test]
fn decohered_beam_splits_evenly() {
    let n = 10_000;
    let s = beam(n);
    let r = run_beam(&s, SourceRegime::NungDecohered, &SiteAmplitudes::equal(), 2024).unwrap();
    assert_eq!(r.n_on_axis, 0);
    assert_eq!(r.n_deflected_plus + r.n_deflected_minus, n);
    let sigma = 0.5 / (n as f64).sqrt();
    let frac = r.n_deflected_plus as f64 / n as f64;
    assert!((frac - 0.5).abs() <= 3.0 * sigma, "plus fraction {frac}");
    // sites are recorded and match the deflection side
    for rec in &r.records {
        let expected = match rec.site.unwrap() {
            Site::Plus => ExitStatus::DeflectedPlus,
            Site::Minus => ExitStatus::DeflectedMinus,
        };
        assert_eq!(rec.status, expected);
    }
}

#[test]
fn decohered_reports_are_independent_of_sender() {
    let n = 10_000;
    let s = beam(n);
    let amps = SiteAmplitudes::equal();
    let mut accepted = 0;
    for k in 0..100u64 {
        let a = run_beam(&s, SourceRegime::NungDecohered, &amps, 2 * k).unwrap();
        let b = run_beam(&s, SourceRegime::NungDecohered, &amps, 2 * k + 1).unwrap();
        if two_proportion_p(a.n_deflected_plus, n, b.n_deflected_plus, n) >= 0.01 {
            accepted += 1;
        }
        assert!(slc_mutual_information(&a, &b).unwrap() <= 1e-3);
    }
    assert!(accepted >= 95, "only {accepted}/100 seeds accepted");
}

#[test]
fn collapsed_deflection_exceeds_acceptance_tenfold() {
    let s = BeamScenario::gedanken();
    let r = run_beam(&beam(1), SourceRegime::ScgCollapsed(Site::Minus), &SiteAmplitudes::equal(), 0).unwrap();
    let x = r.records[0].exit_x.unwrap();
    assert!(x <= -10.0 * s.detector_half_width, "x = {x}");
    // point-mass estimate of the field at the closest approach, for scale
    let a = sphere_field(&s.ball, &Vector3::new(s.dx, 0.0, 0.0), &s.constants).norm();
    assert!(x.abs() < a * s.transit_time().powi(2));
}
