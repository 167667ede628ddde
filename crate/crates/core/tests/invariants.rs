//! Property tests of the structural invariants on random Zoll profiles.

use std::f64::consts::TAU;

use proptest::prelude::*;
use zoll_core::damping::DampingSpec;
use zoll_core::geodesics::{closure_survey, GeodesicState};
use zoll_core::geometry::{build_chart, validate_profile, IsothermalChart, SurfaceProfile};
use zoll_core::spectral::{
    assemble_spectrum, cluster_center, gram_defect, integrate_radial_ivp, nearest_center,
    radial_solve, weighted_inner, wronskian_check, RadialEigenfunction,
};
use zoll_core::wavesim::{evolve, ModalWaveState};
use zoll_core::Error;

fn coefficients() -> impl Strategy<Value = Vec<f64>> {
    (-0.3..0.3f64, -0.1..0.1f64).prop_map(|(a, b)| vec![a, b])
}

fn surface(coefficients: &[f64], n_points: usize) -> (SurfaceProfile, IsothermalChart) {
    let profile = validate_profile(coefficients, 256).unwrap();
    let chart = build_chart(&profile, 8.0, n_points).unwrap();
    (profile, chart)
}

fn mode(chart: &IsothermalChart, n: usize, k: i64) -> RadialEigenfunction {
    let center = cluster_center(n);
    let lo = if k == 0 {
        center - 1.0
    } else {
        (center - 1.0).max((k * k) as f64)
    };
    radial_solve(chart, k, (lo, center + 1.0))
        .unwrap()
        .into_iter()
        .find(|m| nearest_center(m.lambda2) == n)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn eigenfunctions_are_orthonormal_and_respect_exclusion(c in coefficients()) {
        let (_, chart) = surface(&c, 4097);
        let spectrum = assemble_spectrum(&chart, 6, 1.0).unwrap();
        let members: Vec<&RadialEigenfunction> = spectrum.members().map(|(_, m)| m).collect();
        prop_assert!(gram_defect(&chart, members.iter().copied()).unwrap() <= 1e-6);
        for m in members.iter().copied().chain(&spectrum.uncontained) {
            prop_assert!(m.k == 0 || m.lambda2 > (m.k * m.k) as f64);
        }
        for cl in &spectrum.clusters {
            prop_assert!(cl.a_observed <= 1.0);
        }
    }

    #[test]
    fn spectrum_is_symmetric_in_k(c in coefficients(), k in 1i64..8) {
        let (_, chart) = surface(&c, 2049);
        let window = ((k * k) as f64, ((k + 5) * (k + 5)) as f64);
        let plus = radial_solve(&chart, k, window).unwrap();
        let minus = radial_solve(&chart, -k, window).unwrap();
        prop_assert_eq!(plus.len(), minus.len());
        for (a, b) in plus.iter().zip(&minus) {
            prop_assert!((a.lambda2 - b.lambda2).abs() <= 1e-10 * a.lambda2);
            prop_assert_eq!(b.k, -a.k);
            prop_assert!(a.w.iter().zip(&b.w).all(|(x, y)| (x - y).abs() <= 1e-10));
        }
    }

    #[test]
    fn undamped_modes_oscillate_at_their_eigenfrequency(c in coefficients()) {
        let (_, chart) = surface(&c, 2049);
        let w = mode(&chart, 3, 2);
        let mut state = ModalWaveState::from_eigenfunction(&w);
        let mut probe = w.clone();
        let step = 1e-3;
        let mut samples = vec![(0.0, 1.0)];
        for _ in 0..2000 {
            evolve(&chart, &mut state, &DampingSpec::None, 10.0 * step, step).unwrap();
            probe.w.clone_from(&state.blocks[0].u);
            samples.push((state.time, weighted_inner(&chart, &probe, &w).unwrap()));
        }
        let crossings: Vec<f64> = samples
            .windows(2)
            .filter(|p| p[0].1.signum() != p[1].1.signum())
            .map(|p| p[0].0 - p[0].1 * (p[1].0 - p[0].0) / (p[1].1 - p[0].1))
            .collect();
        prop_assert!(crossings.len() >= 10);
        let span = crossings[crossings.len() - 1] - crossings[0];
        let omega = std::f64::consts::PI * (crossings.len() - 1) as f64 / span;
        prop_assert!((omega - w.lambda()).abs() <= 1e-4 * w.lambda(), "{} vs {}", omega, w.lambda());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn wronskian_of_the_radial_ode_is_constant(
        c in coefficients(),
        k in 1i64..8,
        excess in 1.0..150.0f64,
    ) {
        let (_, chart) = surface(&c, 2049);
        let lambda2 = (k * k) as f64 + excess;
        let a = integrate_radial_ivp(&chart, k, lambda2, 1.0, 0.0);
        let b = integrate_radial_ivp(&chart, k, lambda2, 0.0, 1.0);
        prop_assert!(wronskian_check(&a, &b).unwrap() <= 1e-6);
    }

    #[test]
    fn damped_energy_never_increases(
        c in coefficients(),
        n in 1usize..6,
        k_frac in 0.0..1.0f64,
        kind in 0usize..4,
        strength in 0.1..2.0f64,
    ) {
        let (_, chart) = surface(&c, 1025);
        let k = (k_frac * (n + 1) as f64).floor().min(n as f64) as i64;
        let damping = [
            DampingSpec::IndicatorUpper,
            DampingSpec::Constant { value: strength },
            DampingSpec::HalfNeighborhood { delta: strength, width: 0.5 },
            DampingSpec::SmoothVanishing { power: 2.0 },
        ][kind];
        let w = mode(&chart, n, k);
        let mut state = ModalWaveState::from_eigenfunction(&w);
        let trace = evolve(&chart, &mut state, &damping, 3.0, 2e-3).unwrap();
        for p in trace.energy.windows(2) {
            prop_assert!(p[1] <= p[0] * (1.0 + 1e-12));
        }
        prop_assert!(trace.energy.last().unwrap() < &trace.energy[0]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn geodesics_conserve_clairaut_and_energy_and_close(
        c in coefficients(),
        ell_frac in 0.1..0.9f64,
        psi in 0.1..3.0f64,
        flip in any::<bool>(),
    ) {
        let profile = validate_profile(&c, 256).unwrap();
        let psi = if flip { -psi } else { psi };
        let initial = GeodesicState::from_angle(&profile, ell_frac * std::f64::consts::PI, 0.0, psi);
        let record = &closure_survey(&profile, &[initial]).unwrap()[0];
        prop_assert!(record.clairaut_drift <= 1e-8);
        prop_assert!(record.energy_drift <= 1e-8);
        prop_assert!(record.closure_defect <= 1e-4, "defect {}", record.closure_defect);
    }
}

#[test]
fn rotationally_symmetric_damping_keeps_blocks_apart() {
    let (_, chart) = surface(&[0.1], 1025);
    let a = mode(&chart, 3, 1);
    let b = mode(&chart, 4, 3);
    let damping = DampingSpec::IndicatorUpper;
    let alone = |w: &RadialEigenfunction| {
        let mut s = ModalWaveState::from_modes(&[(w, 1.0, 0.5)]);
        evolve(&chart, &mut s, &damping, 2.0, 2e-3).unwrap().energy
    };
    let mut both = ModalWaveState::from_modes(&[(&a, 1.0, 0.5), (&b, 1.0, 0.5)]);
    let joint = evolve(&chart, &mut both, &damping, 2.0, 2e-3)
        .unwrap()
        .energy;
    for ((j, x), y) in joint.iter().zip(alone(&a)).zip(alone(&b)) {
        assert!((j - (x + y)).abs() <= 1e-12 * j);
    }

    let sector = DampingSpec::Sector {
        value: 1.0,
        phi_lo: 0.0,
        phi_hi: TAU / 4.0,
    };
    let err = evolve(&chart, &mut both, &sector, 1.0, 2e-3).unwrap_err();
    assert_eq!(err, Error::BlockCoupling);
}
