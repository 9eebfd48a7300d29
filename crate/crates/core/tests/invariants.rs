// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use cpgate::experiments::{Mode, RunConfig};
use cpgate::gate::{int_to_bits, EncodingMap, GateSpec};
use cpgate::model::{build_effective_hamiltonian_encoded, build_effective_hamiltonian_full, encoded_projector};
use cpgate::operators::{identity, max_abs, max_abs_diff};
use cpgate::space::qutrit_index;
use cpgate::{
    closed_form_unitary, derive, encode, evolve_lindblad, gate_fidelity_lossy, matched_mu, DensityMatrix,
    EvolutionConfig, SystemParams,
};

fn detunings() -> impl Strategy<Value = (f64, f64)> {
    (6.0..20.0f64, 0.5..4.0f64).prop_map(|(d1, ds)| (d1, d1 - ds))
}

fn matched(n: usize, d1: f64, d: f64) -> SystemParams {
    SystemParams::lossless(n, 1.0, matched_mu(d1, d, 1.0).unwrap(), d1, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matched_coupling_cancels_control_stark_shift((d1, d) in detunings(), s in 0.1..10.0f64) {
        let mu = matched_mu(d1, d, 1.0).unwrap();
        prop_assert!(derive(&matched(3, d1, d)).unwrap().matching_residual <= 1e-12);
        let scaled = matched_mu(s * d1, s * d, s).unwrap();
        prop_assert!((scaled - s * mu).abs() <= 1e-13 * s * mu);
    }

    #[test]
    fn closed_form_realizes_gate_at_gate_time((d1, d) in detunings(), n in 2usize..5) {
        let p = matched(n, d1, d);
        let u = closed_form_unitary(&p, n, derive(&p).unwrap().gate_time).unwrap();
        let map = EncodingMap::new(n).unwrap();
        let spec = GateSpec::new(n).unwrap();
        for x in 0..(1usize << n) {
            let bits = int_to_bits(x, n);
            let idx = qutrit_index(&map.levels(&bits).unwrap());
            prop_assert!((u[(idx, idx)] - C64::new(spec.sign(&bits) as f64, 0.0)).norm() <= 1e-10);
        }
    }

    #[test]
    fn closed_form_is_unitary((d1, d) in detunings(), t in 0.0..500.0f64) {
        let u = closed_form_unitary(&matched(3, d1, d), 3, t).unwrap();
        let uu = u.t().mapv(|z| z.conj()).dot(&u);
        prop_assert!(max_abs_diff(&uu, &identity(27)) <= 1e-12);
    }

    #[test]
    fn effective_hamiltonian_keeps_encoded_subspace((d1, d) in detunings(), n in 2usize..5) {
        let p = matched(n, d1, d);
        let proj = encoded_projector(n);
        let h4 = build_effective_hamiltonian_full(&p, n).unwrap();
        let h7 = build_effective_hamiltonian_encoded(&p, n).unwrap();
        prop_assert!(max_abs_diff(&proj.dot(&h4).dot(&proj), &proj.dot(&h7).dot(&proj)) <= 1e-14);
        prop_assert!(max_abs(&(identity(proj.nrows()) - &proj).dot(&h4).dot(&proj)) <= 1e-14);
    }

    #[test]
    fn config_round_trips(
        mode in prop_oneof![Just(Mode::Single), Just(Mode::Fig2Sweep), Just(Mode::Fig3Curve), Just(Mode::Validate), Just(Mode::Converge)],
        d1 in 9.0..20.0f64,
        ds in 0.5..4.0f64,
        kappa in 0.0..0.1f64,
        gamma in 0.0..1e-3f64,
        cutoff in 1usize..6,
        jobs in 1usize..9,
        mu in proptest::option::of(0.5..5.0f64),
    ) {
        let cfg = RunConfig {
            mu,
            delta1: d1,
            delta_cap: d1 - ds,
            kappa,
            gamma_fe: gamma,
            gamma_phi_e: gamma / 3.0,
            fock_cutoff: cutoff,
            jobs,
            out: Some("run.csv".into()),
            ..RunConfig::for_mode(mode)
        };
        cfg.validate().unwrap();
        prop_assert_eq!(RunConfig::parse(&cfg.emit()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn lossy_evolution_stays_physical(
        kappa in 0.0..0.05f64,
        gamma in 0.0..2e-3f64,
        fg in 0.0..0.5f64,
        bits in "[01]{2}",
    ) {
        let p = matched(2, 10.7, 8.4).with_cutoff(1).with_uniform_noise(kappa, gamma, fg);
        let space = p.space().unwrap();
        let rho0 = DensityMatrix::from_pure(&encode(&bits, &space).unwrap());
        let tg = derive(&p).unwrap().gate_time;
        let traj = evolve_lindblad(&p, &rho0, tg, &EvolutionConfig::for_density(&p)).unwrap();
        prop_assert!(traj.max_drift() <= 1e-7);
        let d = traj.final_state.diagnostics();
        prop_assert!(d.hermiticity <= 1e-7);
        prop_assert!(d.min_eigenvalue >= -1e-7);
        let f = gate_fidelity_lossy(&p, &encode(&bits, &space).unwrap()).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f));
    }
}
