//! Acceptance criteria 1–10. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured values before asserting.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use zoll_core::damping::DampingSpec;
use zoll_core::geodesics::{check_gcc_with, closure_survey, stratified_initials, GeodesicState};
use zoll_core::geometry::{build_chart, validate_profile, IsothermalChart, SurfaceProfile};
use zoll_core::observability::{
    agmon_check, hermite_compare, mass_ratio, member_energy, member_record, observability_scan,
    Regime,
};
use zoll_core::spectral::{
    assemble_spectrum, cluster_center, gram_defect, integrate_radial_ivp, nearest_center,
    radial_solve, wronskian_check, RadialEigenfunction, Spectrum,
};
use zoll_core::wavesim::{energy_identity_residual, evolve, fit_decay, ModalWaveState};

const HALF_WIDTH: f64 = 8.0;
const N_POINTS: usize = 4097;
const GRID: usize = 256;

struct Setup {
    profile: SurfaceProfile,
    chart: IsothermalChart,
    spectrum: Spectrum,
    elapsed: Duration,
}

fn setup(coefficients: &[f64]) -> Setup {
    let start = Instant::now();
    let profile = validate_profile(coefficients, GRID).unwrap();
    let chart = build_chart(&profile, HALF_WIDTH, N_POINTS).unwrap();
    let spectrum = assemble_spectrum(&chart, 25, 1.0).unwrap();
    Setup {
        profile,
        chart,
        spectrum,
        elapsed: start.elapsed(),
    }
}

fn sphere() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| setup(&[]))
}

fn zoll() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| setup(&[0.1]))
}

fn verdict(id: u8, pass: bool, detail: String) {
    println!(
        "criterion {id:>2}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// The member of cluster `n` with angular number `k`.
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
        .unwrap_or_else(|| panic!("no eigenpair (n, k) = ({n}, {k})"))
}

#[test]
fn criterion_01_sphere_spectrum() {
    let s = sphere();
    let mut max_rel = 0.0_f64;
    let mut complete = true;
    for c in s.spectrum.clusters.iter().filter(|c| c.n <= 25) {
        let exact = (c.n * (c.n + 1)) as f64;
        let mut ks: Vec<i64> = c.members.iter().map(|m| m.k.abs()).collect();
        ks.sort_unstable();
        complete &= ks == (0..=c.n as i64).collect::<Vec<_>>();
        for m in &c.members {
            max_rel = max_rel.max((m.lambda2 - exact).abs() / exact);
        }
    }
    let fast = s.elapsed <= Duration::from_secs(120);
    let pass = complete && max_rel <= 1e-6 && fast;
    verdict(
        1,
        pass,
        format!(
            "max rel error {max_rel:.3e}, every k present {complete}, {:.1}s",
            s.elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_cluster_bound() {
    let sphere_a: Vec<f64> = sphere()
        .spectrum
        .clusters
        .iter()
        .filter(|c| c.n <= 25)
        .map(|c| c.a_observed)
        .collect();
    let sphere_ok = sphere_a.len() == 26 && sphere_a.iter().all(|a| (a - 0.25).abs() <= 1e-6);
    let zoll_a: Vec<(usize, f64)> = zoll()
        .spectrum
        .clusters
        .iter()
        .filter(|c| c.n <= 20)
        .map(|c| (c.n, c.a_observed))
        .collect();
    let bounded = zoll_a.iter().all(|(_, a)| *a <= 1.0);
    let tail: Vec<f64> = zoll_a
        .iter()
        .filter(|(n, _)| *n >= 10)
        .map(|p| p.1)
        .collect();
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let pass = sphere_ok && bounded && monotone;
    verdict(
        2,
        pass,
        format!(
            "sphere A in [{:.9}, {:.9}]; profile [0.1]: A <= 1 {bounded}, non-increasing on 10..=20 {monotone}, A(10..=20) = {:?}",
            sphere_a.iter().copied().fold(f64::INFINITY, f64::min),
            sphere_a.iter().copied().fold(0.0, f64::max),
            tail.iter().map(|a| (a * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_observability_ratio() {
    let s = sphere();
    let sphere_min = s
        .spectrum
        .members()
        .map(|(_, m)| mass_ratio(m, &s.chart).weighted)
        .fold(f64::INFINITY, f64::min);
    let z = zoll();
    let scan = observability_scan(&z.chart, &z.spectrum.clusters, 0.2, 10..=25).unwrap();
    let pass =
        (sphere_min - 0.5).abs() <= 1e-8 && scan.min_ratio >= 0.05 && scan.trend_slope >= -1e-3;
    verdict(
        3,
        pass,
        format!(
            "sphere min ratio {sphere_min:.10}; profile [0.1] min {:.4} at {:?}, slope {:.2e}",
            scan.min_ratio, scan.argmin, scan.trend_slope
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_hermite_limit() {
    let s = sphere();
    let mut pass = true;
    let mut worst = 0.0_f64;
    let mut errors = Vec::new();
    for j in 0..3usize {
        let mut l2 = Vec::new();
        for n in [10usize, 20, 40] {
            let w = mode(&s.chart, n, (n - j) as i64);
            let r = hermite_compare(&w, &s.chart).unwrap();
            let (jf, nf) = (j as f64, n as f64);
            let closed = (jf + 0.5) * (2.0 * nf - jf + 0.5) / (nf + 0.5) - (2.0 * jf + 1.0);
            let defect = ((r.f - (2.0 * jf + 1.0)) - closed).abs();
            worst = worst.max(defect);
            pass &= defect <= 1e-8 && r.i0 == j;
            l2.push(r.l2_error);
        }
        pass &= l2.windows(2).all(|p| p[1] < p[0]);
        errors.extend(l2);
    }
    verdict(
        4,
        pass,
        format!(
            "max closed-form defect {worst:.2e}, l2 errors per j {}",
            sci(&errors)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_agmon_envelope() {
    let eps_a = 0.1;
    let mut checked = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut all_finite = true;
    for s in [sphere(), zoll()] {
        for (_, m) in s.spectrum.members().filter(|(_, m)| m.k != 0) {
            let (_, h, _) = member_energy(m);
            let defect = agmon_check(m, &s.chart, eps_a).unwrap();
            all_finite &= defect.is_finite();
            worst_excess = worst_excess.max(defect - (2.0 * eps_a / h + 5.0));
            checked += 1;
        }
    }
    let pass = all_finite && worst_excess <= 0.0;
    verdict(
        5,
        pass,
        format!("{checked} members, worst defect - bound {worst_excess:.3}"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_husimi_equidistribution() {
    let z = zoll();
    let records: Vec<_> = z
        .spectrum
        .members()
        .map(|(_, m)| member_record(m, &z.chart, 0.25))
        .filter(|r| r.regime == Regime::Semiclassical)
        .collect();
    let ring = records
        .iter()
        .map(|r| r.ring_mass.unwrap())
        .fold(f64::INFINITY, f64::min);
    let half = records
        .iter()
        .map(|r| (r.half_mass.unwrap() - 0.5).abs())
        .fold(0.0, f64::max);
    let pass = !records.is_empty() && ring >= 0.8 && half <= 0.1;
    verdict(
        6,
        pass,
        format!(
            "{} members with E/h >= 10, min ring mass {ring:.4}, max |half mass - 1/2| {half:.4}",
            records.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_energy_identity() {
    let s = sphere();
    let w = mode(&s.chart, 1, 1);
    let mut residuals = Vec::new();
    for damping in [
        DampingSpec::IndicatorUpper,
        DampingSpec::Constant { value: 1.0 },
    ] {
        let r: Vec<f64> = [1e-3, 5e-4]
            .iter()
            .map(|&dt| {
                let mut state = ModalWaveState::from_eigenfunction(&w);
                let trace = evolve(&s.chart, &mut state, &damping, 10.0, dt).unwrap();
                energy_identity_residual(&trace)
            })
            .collect();
        residuals.push((r[0], r[0] / r[1]));
    }
    let pass = residuals
        .iter()
        .all(|(r, ratio)| *r <= 1e-6 && (3.5..=4.5).contains(ratio));
    verdict(
        7,
        pass,
        residuals
            .iter()
            .map(|(r, q)| format!("residual at dt = 1e-3 {r:.3e}, halving ratio {q:.4}"))
            .collect::<Vec<_>>()
            .join("; "),
    );
    assert!(pass);
}

fn equatorial_beta(chart: &IsothermalChart, n: usize, damping: &DampingSpec) -> f64 {
    let w = mode(chart, n, n as i64);
    let mut state = ModalWaveState::from_eigenfunction(&w);
    let trace = evolve(chart, &mut state, damping, 20.0, 2e-3).unwrap();
    fit_decay(&trace, (0.0, 20.0)).unwrap().beta
}

#[test]
fn criterion_08_uniform_vs_non_uniform() {
    let s = sphere();
    let ns = [10usize, 20, 30];
    let uniform: Vec<f64> = ns
        .iter()
        .map(|&n| equatorial_beta(&s.chart, n, &DampingSpec::IndicatorUpper))
        .collect();
    let smooth = DampingSpec::SmoothVanishing { power: 2.0 };
    let b10 = equatorial_beta(&s.chart, 10, &smooth);
    let b30 = equatorial_beta(&s.chart, 30, &smooth);
    let lo = uniform.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = uniform.iter().copied().fold(0.0, f64::max);
    let pass = lo > 0.0 && hi <= 2.0 * lo && b30 < b10 / 2.0;
    verdict(
        8,
        pass,
        format!("indicator beta(10, 20, 30) = {uniform:.4?}; smooth beta(10) = {b10:.4}, beta(30) = {b30:.4}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_geodesics() {
    let profile = &zoll().profile;
    let report = check_gcc_with(profile, &DampingSpec::IndicatorUpper, 100, TAU).unwrap();
    let initials = stratified_initials(profile, 100);
    let closure = closure_survey(profile, &initials).unwrap();
    let on_equator =
        |s: &GeodesicState| s.p_ell.abs() < 1e-12 && (s.ell - profile.ell0()).abs() < 1e-12;
    let closure_defect = closure.iter().map(|c| c.closure_defect).fold(0.0, f64::max);
    let clairaut = closure.iter().map(|c| c.clairaut_drift).fold(0.0, f64::max);
    let others_enter = report
        .orbits
        .iter()
        .filter(|o| !on_equator(&o.initial))
        .all(|o| o.entry_time.is_some_and(|t| t <= TAU));
    let equator_stays = report
        .orbits
        .iter()
        .filter(|o| on_equator(&o.initial))
        .all(|o| o.entry_time.is_none());
    let equators = report
        .orbits
        .iter()
        .filter(|o| on_equator(&o.initial))
        .count();
    let pass = initials.len() >= 100
        && equators > 0
        && closure_defect <= 1e-4
        && others_enter
        && equator_stays
        && clairaut <= 1e-8;
    verdict(
        9,
        pass,
        format!(
            "{} orbits, closure defect {closure_defect:.2e}, clairaut drift {clairaut:.2e}, non-equator entries by 2pi {others_enter}, equator never enters {equator_stays}",
            report.orbits.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_structural_invariants() {
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, s) in [("sphere", sphere()), ("[0.1]", zoll())] {
        let meridian = (s.profile.meridian_length() - PI).abs();
        let members: Vec<&RadialEigenfunction> = s.spectrum.members().map(|(_, m)| m).collect();
        let gram = gram_defect(&s.chart, members.iter().copied()).unwrap();
        let exclusion = members
            .iter()
            .copied()
            .chain(&s.spectrum.uncontained)
            .all(|m| m.k == 0 || m.lambda2 > (m.k * m.k) as f64);
        let a = integrate_radial_ivp(&s.chart, 3, 12.0, 1.0, 0.0);
        let b = integrate_radial_ivp(&s.chart, 3, 12.0, 0.0, 1.0);
        let wronskian = wronskian_check(&a, &b).unwrap();
        pass &= meridian <= 1e-10 && gram <= 1e-6 && exclusion && wronskian <= 1e-6;
        lines.push(format!(
            "{name}: meridian defect {meridian:.1e}, gram {gram:.1e}, exclusion {exclusion}, wronskian {wronskian:.1e}"
        ));
    }
    verdict(10, pass, lines.join("; "));
    assert!(pass);
}
