//! Geodesic flow in (ℓ, φ, p_ℓ, p_φ) with Hamiltonian ½(p_ℓ² + p_φ²/r²).

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::damping::DampingSpec;
use crate::error::{Error, Result};
use crate::geometry::SurfaceProfile;

/// Below this |p_φ| an orbit is advanced as a meridian in closed form.
pub const MERIDIAN_THRESHOLD: f64 = 1e-6;
/// Default time cap for the control check.
pub const DEFAULT_TCAP: f64 = 2.0 * TAU;
const UNIT_SPEED_TOLERANCE: f64 = 1e-6;
/// Inner steps resolve the turning radius r_min = |p_φ| with this fraction.
const TURNING_RESOLUTION: f64 = 0.02;
/// |p_ℓ| below this carries no sign when counting contacts.
const SIGN_FLOOR: f64 = 1e-9;

// sixth-order composition of leapfrog steps
const W1: f64 = -1.177_679_984_178_87;
const W2: f64 = 0.235_573_213_359_357;
const W3: f64 = 0.784_513_610_477_560;
const W0: f64 = 1.0 - 2.0 * (W1 + W2 + W3);
const STAGES: [f64; 7] = [W3, W2, W1, W0, W1, W2, W3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub ell: f64,
    pub phi: f64,
    pub p_ell: f64,
    pub p_phi: f64,
}

impl GeodesicState {
    /// Unit covector at (ℓ, φ) making angle ψ with the meridian direction.
    pub fn from_angle(profile: &SurfaceProfile, ell: f64, phi: f64, psi: f64) -> Self {
        GeodesicState {
            ell,
            phi,
            p_ell: psi.cos(),
            p_phi: profile.r(ell) * psi.sin(),
        }
    }

    pub fn equator(profile: &SurfaceProfile, direction: f64) -> Self {
        GeodesicState {
            ell: profile.ell0(),
            phi: 0.0,
            p_ell: 0.0,
            p_phi: direction.signum(),
        }
    }

    /// 2H = p_ℓ² + p_φ²/r².
    pub fn speed_squared(&self, profile: &SurfaceProfile) -> f64 {
        let r = profile.r(self.ell);
        self.p_ell * self.p_ell + (self.p_phi / r).powi(2)
    }

    /// Euclidean distance in (ℓ, φ mod 2π, p_ℓ, p_φ).
    pub fn distance(&self, other: &GeodesicState) -> f64 {
        let dphi = wrap_angle(self.phi - other.phi);
        ((self.ell - other.ell).powi(2)
            + dphi * dphi
            + (self.p_ell - other.p_ell).powi(2)
            + (self.p_phi - other.p_phi).powi(2))
        .sqrt()
    }
}

/// Representative of `a` in (−π, π].
fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub states: Vec<GeodesicState>,
}

impl GeodesicPath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("paths hold the initial state")
    }

    pub fn clairaut_drift(&self) -> f64 {
        let p0 = self.states[0].p_phi;
        self.states
            .iter()
            .fold(0.0_f64, |m, s| m.max((s.p_phi - p0).abs()))
    }

    pub fn energy_drift(&self, profile: &SurfaceProfile) -> f64 {
        let e0 = self.states[0].speed_squared(profile);
        self.states
            .iter()
            .fold(0.0_f64, |m, s| m.max((s.speed_squared(profile) - e0).abs()))
            * 0.5
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,ell,phi,p_ell,p_phi")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(
                out,
                "{t:.9},{:.12},{:.12},{:.12},{:.12}",
                s.ell,
                s.phi.rem_euclid(TAU),
                s.p_ell,
                s.p_phi
            )?;
        }
        Ok(())
    }
}

fn kick(profile: &SurfaceProfile, s: &mut GeodesicState, h: f64) {
    let (r, dr) = profile.r_and_dr(s.ell);
    let inv = 1.0 / (r * r);
    s.p_ell += h * s.p_phi * s.p_phi * dr * inv / r;
    s.phi += h * s.p_phi * inv;
}

fn leapfrog(profile: &SurfaceProfile, s: &mut GeodesicState, h: f64) {
    kick(profile, s, 0.5 * h);
    s.ell += h * s.p_ell;
    kick(profile, s, 0.5 * h);
}

fn yoshida(profile: &SurfaceProfile, s: &mut GeodesicState, h: f64) {
    for w in STAGES {
        leapfrog(profile, s, w * h);
    }
}

/// Meridian through `initial` after time t: the orbit runs at unit speed
/// and jumps by π in φ at each pole.
fn meridian_state(profile: &SurfaceProfile, initial: &GeodesicState, t: f64) -> GeodesicState {
    let dir = if initial.p_ell >= 0.0 { 1.0 } else { -1.0 };
    let s = initial.ell + dir * t;
    let laps = (s / PI).floor();
    let odd = (laps as i64).rem_euclid(2) == 1;
    let ell = if odd {
        (laps + 1.0) * PI - s
    } else {
        s - laps * PI
    };
    let sign = if odd { -dir } else { dir };
    let r = profile.r(ell);
    let transverse = if r > 0.0 {
        (initial.p_phi / r).powi(2)
    } else {
        1.0
    };
    GeodesicState {
        ell,
        phi: initial.phi + laps.abs() * PI,
        p_ell: sign * (1.0 - transverse).max(0.0).sqrt(),
        p_phi: initial.p_phi,
    }
}

/// Drives the flow, calling `visit(t, state)` at every multiple of `dt` up
/// to `t_max` (the last interval may be shorter) until it breaks.
fn drive<F>(
    profile: &SurfaceProfile,
    initial: GeodesicState,
    t_max: f64,
    dt: f64,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(f64, &GeodesicState) -> ControlFlow<()>,
{
    if !(t_max > 0.0 && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_max = {t_max} and dt = {dt} must be positive"
        )));
    }
    let speed = initial.speed_squared(profile);
    if !((speed - 1.0).abs() <= UNIT_SPEED_TOLERANCE) {
        return Err(Error::InvalidArgument(format!(
            "initial covector has |p|^2 = {speed}, expected 1"
        )));
    }
    let steps = ((t_max / dt) - 1e-9).ceil().max(1.0) as usize;
    if visit(0.0, &initial).is_break() {
        return Ok(());
    }
    if initial.p_phi.abs() < MERIDIAN_THRESHOLD {
        for i in 1..=steps {
            let t = (i as f64 * dt).min(t_max);
            if visit(t, &meridian_state(profile, &initial, t)).is_break() {
                break;
            }
        }
        return Ok(());
    }
    let inner_cap = TURNING_RESOLUTION * initial.p_phi.abs();
    let r_floor = 0.5 * initial.p_phi.abs();
    let mut s = initial;
    let mut t = 0.0;
    for i in 1..=steps {
        let target = (i as f64 * dt).min(t_max);
        let span = target - t;
        let inner = (span / inner_cap).ceil().max(1.0) as usize;
        let h = span / inner as f64;
        for _ in 0..inner {
            yoshida(profile, &mut s, h);
        }
        t = target;
        if !(s.ell > 0.0 && s.ell < PI) || profile.r(s.ell) < r_floor {
            return Err(Error::PoleCrossing { t, ell: s.ell });
        }
        if visit(t, &s).is_break() {
            break;
        }
    }
    Ok(())
}

/// Samples of the flow at multiples of `dt` on [0, t_max]. Requires a
/// unit-speed initial covector and dt ≤ 10⁻³ t_max.
pub fn integrate_geodesic(
    profile: &SurfaceProfile,
    initial: GeodesicState,
    t_max: f64,
    dt: f64,
) -> Result<GeodesicPath> {
    if dt > 1e-3 * t_max * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} exceeds 1e-3 * t_max = {}",
            1e-3 * t_max
        )));
    }
    let cap = (t_max / dt).ceil() as usize + 1;
    let mut path = GeodesicPath {
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
    };
    drive(profile, initial, t_max, dt, |t, s| {
        path.times.push(t);
        path.states.push(*s);
        ControlFlow::Continue(())
    })?;
    Ok(path)
}

/// Vertex of the parabola through three equally spaced samples, as an
/// offset in units of the spacing together with the value there.
fn parabola_vertex(a: f64, b: f64, c: f64) -> (f64, f64) {
    let curv = a - 2.0 * b + c;
    if curv == 0.0 {
        return (0.0, b);
    }
    let off = 0.5 * (a - c) / curv;
    (off, b - 0.25 * (a - c) * off)
}

fn uniform_at(times: &[f64], i: usize) -> bool {
    let h0 = times[i] - times[i - 1];
    let h1 = times[i + 1] - times[i];
    (h0 - h1).abs() <= 1e-9 * h0
}

/// First recurrence time of the path to its initial state: the first local
/// minimum of the state distance below 0.05 after the path has moved away,
/// refined by a parabola through the squared distances.
pub fn detect_period(path: &GeodesicPath) -> Option<f64> {
    const RETURN: f64 = 0.05;
    let s0 = path.states[0];
    let d2: Vec<f64> = path
        .states
        .iter()
        .map(|s| s.distance(&s0).powi(2))
        .collect();
    let mut left = false;
    for i in 1..d2.len().saturating_sub(1) {
        if d2[i] > (4.0 * RETURN).powi(2) {
            left = true;
        }
        if left && d2[i] < RETURN * RETURN && d2[i] <= d2[i - 1] && d2[i] <= d2[i + 1] {
            if !uniform_at(&path.times, i) {
                return Some(path.times[i]);
            }
            let (off, _) = parabola_vertex(d2[i - 1], d2[i], d2[i + 1]);
            return Some(path.times[i] + off * (path.times[i + 1] - path.times[i]));
        }
    }
    // a path ending on its period has the minimum at the last sample
    let n = d2.len();
    if left && n >= 3 && d2[n - 1] < RETURN * RETURN && uniform_at(&path.times, n - 2) {
        let (off, _) = parabola_vertex(d2[n - 3], d2[n - 2], d2[n - 1]);
        let step = path.times[n - 1] - path.times[n - 2];
        if (0.5..=1.5).contains(&off) {
            return Some(path.times[n - 2] + off * step);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningParallels {
    pub ell_min: f64,
    pub ell_max: f64,
    /// Sign changes − → + of p_ℓ in one period.
    pub contacts_min: usize,
    /// Sign changes + → − of p_ℓ in one period.
    pub contacts_max: usize,
    pub period: f64,
}

/// Extremal parallels over one period, with contacts counted from sign
/// changes of p_ℓ. The counting window starts where |p_ℓ| peaks so that
/// no contact sits on its edge.
pub fn turning_parallels(path: &GeodesicPath) -> Result<TurningParallels> {
    let period = detect_period(path).ok_or(Error::IncompletePath)?;
    let times = &path.times;
    let one = times.partition_point(|t| *t <= period + 1e-12);
    let ell: Vec<f64> = path.states.iter().map(|s| s.ell).collect();
    let (mut ell_min, mut ell_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..one {
        ell_min = ell_min.min(ell[i]);
        ell_max = ell_max.max(ell[i]);
        if i == 0 || i + 1 >= ell.len() || !uniform_at(times, i) {
            continue;
        }
        let is_min = ell[i] <= ell[i - 1] && ell[i] <= ell[i + 1];
        let is_max = ell[i] >= ell[i - 1] && ell[i] >= ell[i + 1];
        if is_min || is_max {
            let (_, v) = parabola_vertex(ell[i - 1], ell[i], ell[i + 1]);
            if is_min {
                ell_min = ell_min.min(v);
            } else {
                ell_max = ell_max.max(v);
            }
        }
    }

    let start = (0..one)
        .max_by(|a, b| {
            path.states[*a]
                .p_ell
                .abs()
                .total_cmp(&path.states[*b].p_ell.abs())
        })
        .unwrap_or(0);
    let window_end = times[start] + period;
    let (lo, hi) = if times.last().copied().unwrap_or(0.0) >= window_end {
        (start, times.partition_point(|t| *t < window_end))
    } else {
        (0, one)
    };
    let (mut contacts_min, mut contacts_max) = (0, 0);
    let mut sign = 0.0;
    for s in &path.states[lo..hi] {
        if s.p_ell.abs() < SIGN_FLOOR {
            continue;
        }
        let next = s.p_ell.signum();
        if sign > 0.0 && next < 0.0 {
            contacts_max += 1;
        } else if sign < 0.0 && next > 0.0 {
            contacts_min += 1;
        }
        sign = next;
    }
    Ok(TurningParallels {
        ell_min,
        ell_max,
        contacts_min,
        contacts_max,
        period,
    })
}

/// Smallest sample time whose state lies in {a > 0}.
pub fn first_entry_time(
    path: &GeodesicPath,
    profile: &SurfaceProfile,
    region: &DampingSpec,
) -> Option<f64> {
    path.times
        .iter()
        .zip(&path.states)
        .find(|(_, s)| region.contains(profile, s.ell, s.phi))
        .map(|(t, _)| *t)
}

/// Stratified unit covectors: ℓ and the angle ψ to the meridian at cell
/// midpoints of an n_ℓ × n_ψ grid with n_ℓ n_ψ ≥ samples.
pub fn stratified_initials(profile: &SurfaceProfile, samples: usize) -> Vec<GeodesicState> {
    let n_ell = ((samples as f64).sqrt().floor() as usize).max(1);
    let n_psi = samples.div_ceil(n_ell);
    let mut out = Vec::with_capacity(n_ell * n_psi);
    for i in 0..n_ell {
        let ell = PI * (i as f64 + 0.5) / n_ell as f64;
        for j in 0..n_psi {
            let psi = TAU * (j as f64 + 0.5) / n_psi as f64;
            out.push(GeodesicState::from_angle(profile, ell, 0.0, psi));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitOutcome {
    pub initial: GeodesicState,
    pub entry_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GccReport {
    pub fraction_controlled: f64,
    /// Largest entry time among controlled orbits.
    pub max_entry_time: f64,
    /// Initial states of orbits with no entry by `t_cap`.
    pub exceptional_orbits: Vec<GeodesicState>,
    pub t_cap: f64,
    pub orbits: Vec<OrbitOutcome>,
}

/// Stratified initials plus both orientations of the equator, each run
/// until it enters the region or reaches [`DEFAULT_TCAP`].
pub fn check_gcc(
    profile: &SurfaceProfile,
    region: &DampingSpec,
    samples: usize,
) -> Result<GccReport> {
    check_gcc_with(profile, region, samples, DEFAULT_TCAP)
}

pub fn check_gcc_with(
    profile: &SurfaceProfile,
    region: &DampingSpec,
    samples: usize,
    t_cap: f64,
) -> Result<GccReport> {
    if samples < 10 {
        return Err(Error::InvalidArgument(format!(
            "samples = {samples} must be at least 10"
        )));
    }
    if !region.is_rotationally_symmetric() {
        return Err(Error::InvalidArgument(
            "control check needs a region defined in ell".into(),
        ));
    }
    let mut initials = stratified_initials(profile, samples);
    initials.push(GeodesicState::equator(profile, 1.0));
    initials.push(GeodesicState::equator(profile, -1.0));
    let dt = 1e-3 * t_cap;
    let orbits: Vec<OrbitOutcome> = initials
        .par_iter()
        .map(|initial| {
            let mut entry = None;
            drive(profile, *initial, t_cap, dt, |t, s| {
                if region.contains(profile, s.ell, s.phi) {
                    entry = Some(t);
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })?;
            Ok(OrbitOutcome {
                initial: *initial,
                entry_time: entry,
            })
        })
        .collect::<Result<_>>()?;
    let controlled = orbits.iter().filter(|o| o.entry_time.is_some()).count();
    Ok(GccReport {
        fraction_controlled: controlled as f64 / orbits.len() as f64,
        max_entry_time: orbits
            .iter()
            .filter_map(|o| o.entry_time)
            .fold(0.0, f64::max),
        exceptional_orbits: orbits
            .iter()
            .filter(|o| o.entry_time.is_none())
            .map(|o| o.initial)
            .collect(),
        t_cap,
        orbits,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClosureRecord {
    pub initial: GeodesicState,
    /// Distance between the states at t = 0 and t = 2π.
    pub closure_defect: f64,
    pub clairaut_drift: f64,
    pub energy_drift: f64,
}

/// Runs every initial state for one period 2π with step 2π/2000.
pub fn closure_survey(
    profile: &SurfaceProfile,
    initials: &[GeodesicState],
) -> Result<Vec<ClosureRecord>> {
    initials
        .par_iter()
        .map(|init| {
            let path = integrate_geodesic(profile, *init, TAU, TAU / 2000.0)?;
            Ok(ClosureRecord {
                initial: *init,
                closure_defect: path.last().distance(init),
                clairaut_drift: path.clairaut_drift(),
                energy_drift: path.energy_drift(profile),
            })
        })
        .collect()
}
