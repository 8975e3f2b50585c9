mod common;

use std::f64::consts::PI;

use common::{C64, max_abs_diff, pattern_state};
use nalgebra::DVector;
use proptest::prelude::*;
use qp_transport::dynamics::*;
use qp_transport::lattice::*;

fn config() -> IntegratorConfig {
    IntegratorConfig {
        sample_count: 21,
        ..IntegratorConfig::default()
    }
}

fn energy(lattice: &Lattice<f64>, phi: f64, psi: &DVector<C64>) -> f64 {
    let h = lattice.hamiltonian_at(phi).map(|x| C64::new(x, 0.0));
    (psi.adjoint() * h * psi)[(0, 0)].re
}

#[test]
fn fixed_phase_propagator_matches_expm_oracle() {
    for n in 2..=4 {
        for aa in [false, true] {
            let (v, phi, duration) = (1.9, 0.7, 13.3);
            let params = if aa {
                ModelParams::aa(v, phi, n)
            } else {
                ModelParams::sample(v, phi, n)
            };
            let lattice = Lattice::new(params).unwrap();
            let psi0 = pattern_state(n, n as f64);
            let traj = evolve(&lattice, &PhaseRamp::fixed(phi, duration), &psi0, None, &config()).unwrap();
            let u = common::expm_propagator(&common::reference_hamiltonian(n, 1.0, v, phi, aa), duration);
            let oracle = common::apply(&u, &psi0);
            let err = max_abs_diff(traj.final_state.as_slice(), &oracle);
            assert!(err < 1e-8, "N={n} aa={aa}: {err:e}");
        }
    }
}

#[test]
fn chained_fixed_phases_match_product_of_exponentials() {
    let n = 4;
    let lattice = Lattice::new(ModelParams::sample(2.4, 0.0, n)).unwrap();
    let psi0 = pattern_state(n, 0.5);
    let (phi1, t1, phi2, t2) = (0.4 * PI, 3.1, 1.3 * PI, 5.7);
    let mid = evolve(&lattice, &PhaseRamp::fixed(phi1, t1), &psi0, None, &config()).unwrap();
    let end = evolve(&lattice, &PhaseRamp::fixed(phi2, t2), mid.final_state.as_slice(), None, &config()).unwrap();
    let u1 = common::expm_propagator(&common::reference_hamiltonian(n, 1.0, 2.4, phi1, false), t1);
    let u2 = common::expm_propagator(&common::reference_hamiltonian(n, 1.0, 2.4, phi2, false), t2);
    let oracle = common::apply(&u2, &common::apply(&u1, &psi0));
    assert!(max_abs_diff(end.final_state.as_slice(), &oracle) < 1e-8);
}

#[test]
fn crank_nicolson_is_unitary_and_close_to_exact() {
    let n = 4;
    let lattice = Lattice::new(ModelParams::sample(1.0, 0.3, n)).unwrap();
    let psi0 = pattern_state(n, 1.1);
    let cfg = IntegratorConfig {
        scheme: Scheme::CrankNicolson,
        dt: 0.005,
        ..config()
    };
    let traj = evolve(&lattice, &PhaseRamp::fixed(0.3, 2.0), &psi0, None, &cfg).unwrap();
    assert!(traj.norm_drift < 1e-12);
    let u = common::expm_propagator(&common::reference_hamiltonian(n, 1.0, 1.0, 0.3, false), 2.0);
    assert!(max_abs_diff(traj.final_state.as_slice(), &common::apply(&u, &psi0)) < 1e-4);
}

#[test]
fn eigenstate_densities_are_stationary() {
    let params = ModelParams::sample(2.0, 0.99 * PI, 21);
    let lattice = Lattice::new(params.clone()).unwrap();
    let s = diagonalize(&lattice.hamiltonian()).unwrap();
    for k in [0, 10, 20] {
        let psi = complexify(&s.state(k));
        let traj = evolve(&lattice, &PhaseRamp::fixed(params.phi, 200.0), psi.as_slice(), None, &config()).unwrap();
        let first = &traj.densities[0];
        for row in &traj.densities {
            for (a, b) in row.iter().zip(first) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn energy_is_conserved_without_ramp() {
    let params = ModelParams::sample(1.5, 0.2, 16);
    let lattice = Lattice::new(params).unwrap();
    let psi0 = pattern_state(16, 2.0);
    let traj = evolve(&lattice, &PhaseRamp::fixed(0.2, 500.0), &psi0, None, &config()).unwrap();
    let e0 = energy(&lattice, 0.2, &DVector::from_vec(psi0));
    let e1 = energy(&lattice, 0.2, &traj.final_state);
    assert!((e0 - e1).abs() < 1e-10);
    assert!(traj.norm_drift < 1e-12);
}

#[test]
fn reversed_conjugated_evolution_returns_to_start() {
    let n = 10;
    let lattice = Lattice::new(ModelParams::sample(2.0, 0.0, n)).unwrap();
    let spec = ChannelSpec::new(0.2 * PI, 0.9 * PI, 0.01).unwrap();
    let cfg = IntegratorConfig {
        max_phase_step: 1e-3,
        ..config()
    };
    let psi0 = pattern_state(n, 3.0);
    let forward = evolve(&lattice, &spec.ramp(), &psi0, None, &cfg).unwrap();
    let flipped: Vec<C64> = forward.final_state.iter().map(|z| z.conj()).collect();
    let back = evolve(&lattice, &spec.ramp().reversed(), &flipped, None, &cfg).unwrap();
    let restored: Vec<C64> = back.final_state.iter().map(|z| z.conj()).collect();
    let f = fidelity(&restored, &psi0).unwrap();
    assert!(f > 1.0 - 1e-5, "return fidelity {f}");
}

#[test]
fn slower_ramps_follow_the_ground_state_better() {
    // Gap above the ground state stays above 0.7 along the whole path.
    let lattice = Lattice::new(ModelParams::aa(0.5, 0.0, 4)).unwrap();
    let ground = |phi: f64| complexify(&diagonalize(&lattice.hamiltonian_at(phi)).unwrap().state(0));
    let start = ground(0.0);
    let goal = ground(PI);
    let cfg = IntegratorConfig {
        max_phase_step: 1e-3,
        ..config()
    };
    let mut last = 0.0;
    for omega in [1.0, 0.3, 0.1, 0.03, 0.01, 0.003] {
        let spec = ChannelSpec::new(0.0, PI, omega).unwrap();
        let traj = evolve(&lattice, &spec.ramp(), start.as_slice(), Some(goal.as_slice()), &cfg).unwrap();
        let f = traj.fidelity.unwrap();
        assert!(f > last, "omega {omega}: {f} after {last}");
        last = f;
    }
    assert!(last > 1.0 - 1e-6);
}

#[test]
fn unnormalized_start_is_rejected() {
    let lattice = Lattice::new(ModelParams::sample(1.0, 0.0, 4)).unwrap();
    let psi = vec![C64::new(1.0, 0.0); 4];
    let err = evolve(&lattice, &PhaseRamp::fixed(0.0, 1.0), &psi, None, &config()).unwrap_err();
    assert!(matches!(err, qp_transport::Error::Unnormalized { .. }));
}

#[test]
fn channel_windows_have_expected_direction_and_duration() {
    let a = ChannelSpec::pump(Channel::A, 1e-5).unwrap();
    let b = ChannelSpec::pump(Channel::B, 1e-5).unwrap();
    assert_eq!(a.direction(), 1.0);
    assert_eq!(b.direction(), -1.0);
    assert!((a.duration() - 1.2 * PI / 1e-5).abs() < 1e-6);
    assert!((b.duration() - 0.8 * PI / 1e-5).abs() < 1e-6);
    assert!(ChannelSpec::<f64>::pump(Channel::A, 0.0).is_err());
    assert!(ChannelSpec::<f64>::pump(Channel::A, -1e-5).is_err());
}

#[test]
fn f32_evolution_tracks_f64() {
    let p64 = ModelParams::<f64>::sample(1.2, 0.5, 6);
    let p32 = ModelParams::<f32>::sample(1.2, 0.5, 6);
    let psi64 = pattern_state(6, 0.9);
    let psi32: Vec<nalgebra::Complex<f32>> =
        psi64.iter().map(|z| nalgebra::Complex::new(z.re as f32, z.im as f32)).collect();
    let t64 = evolve(&Lattice::new(p64).unwrap(), &PhaseRamp::fixed(0.5, 10.0), &psi64, None, &config()).unwrap();
    let t32 = evolve(&Lattice::new(p32).unwrap(), &PhaseRamp::fixed(0.5f32, 10.0), &psi32, None, &config()).unwrap();
    for (a, b) in t64.final_state.iter().zip(t32.final_state.iter()) {
        assert!((a.re - b.re as f64).abs() < 1e-3 && (a.im - b.im as f64).abs() < 1e-3);
    }
}

fn complex_state(parts: &[(f64, f64)]) -> Vec<C64> {
    let raw: Vec<C64> = parts.iter().map(|&(re, im)| C64::new(re, im)).collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|z| z / norm).collect()
}

proptest! {
    #[test]
    fn fidelity_is_symmetric_and_bounded(
        pair in (2usize..12).prop_flat_map(|n| (
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n),
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n),
        )),
    ) {
        let (a, b) = pair;
        prop_assume!(a.iter().any(|&(x, y)| x.abs() + y.abs() > 1e-2));
        prop_assume!(b.iter().any(|&(x, y)| x.abs() + y.abs() > 1e-2));
        let (a, b) = (complex_state(&a), complex_state(&b));
        let ab = fidelity(&a, &b).unwrap();
        let ba = fidelity(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_preserves_norm(v in 0.0f64..4.0, phi in 0.0f64..6.0, n in 2usize..12) {
        let lattice = Lattice::new(ModelParams::sample(v, phi, n)).unwrap();
        let psi = pattern_state(n, phi);
        let traj = evolve(&lattice, &PhaseRamp { phi_start: phi, rate: 0.05, duration: 20.0 }, &psi, None, &config()).unwrap();
        prop_assert!(traj.norm_drift < 1e-10);
    }
}

fn ramped_oracle(n: usize, v: f64, ramp: &PhaseRamp<f64>, psi0: &[C64], substeps: usize) -> Vec<C64> {
    let tau = ramp.duration / substeps as f64;
    let mut psi = psi0.to_vec();
    for s in 0..substeps {
        let phi = ramp.phi_start + ramp.rate * (s as f64 + 0.5) * tau;
        psi = common::apply(&common::expm_propagator(&common::reference_hamiltonian(n, 1.0, v, phi, false), tau), &psi);
    }
    psi
}

#[test]
fn ramped_evolution_matches_fine_product_oracle() {
    let (n, v) = (3, 1.3);
    let ramp = PhaseRamp { phi_start: 0.2, rate: 0.2, duration: 10.0 };
    let psi0 = pattern_state(n, 0.7);
    // Richardson combination of two midpoint products is fourth order.
    let coarse = ramped_oracle(n, v, &ramp, &psi0, 4000);
    let fine = ramped_oracle(n, v, &ramp, &psi0, 8000);
    let oracle: Vec<C64> = fine.iter().zip(&coarse).map(|(f, c)| (f * 4.0 - c) / 3.0).collect();
    let lattice = Lattice::new(ModelParams::sample(v, 0.0, n)).unwrap();
    let err = |scheme, max_phase_step| {
        let cfg = IntegratorConfig { scheme, max_phase_step, ..config() };
        let traj = evolve(&lattice, &ramp, &psi0, None, &cfg).unwrap();
        max_abs_diff(traj.final_state.as_slice(), &oracle)
    };
    let (m4, m4_half) = (err(Scheme::Magnus4, 0.05), err(Scheme::Magnus4, 0.025));
    let (mid, mid_half) = (err(Scheme::ExponentialMidpoint, 0.05), err(Scheme::ExponentialMidpoint, 0.025));
    assert!(m4 < 2e-6, "fourth-order error {m4:e}");
    assert!(m4 / m4_half > 8.0, "fourth-order convergence {m4:e} -> {m4_half:e}");
    assert!(mid / mid_half > 2.5, "second-order convergence {mid:e} -> {mid_half:e}");
    assert!(mid > 100.0 * m4);
}
