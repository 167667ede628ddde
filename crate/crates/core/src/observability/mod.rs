//! Diagnostics of cluster eigenfunctions: hemi-surface mass ratios, Agmon
//! envelopes, the oscillator limit of near-equator modes and Husimi
//! densities of semiclassical ones.

mod agmon;
mod hermite;
mod husimi;

pub use agmon::{agmon_check, agmon_envelope, AgmonEnvelope};
pub use hermite::{hermite_compare, hermite_functions, HermiteReport, HERMITE_BASIS_SIZE};
pub use husimi::{husimi, HusimiField, HUSIMI_GRID};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::IsothermalChart;
use crate::spectral::{
    inner_product_weights, nearest_center, RadialCoordinate, RadialEigenfunction, SpectralCluster,
};

/// E/h at or below which a member is treated as a near-equator mode.
pub const NEAR_EQUATOR_MAX: f64 = 5.0;
/// E/h at or above which a member is treated as semiclassical.
pub const SEMICLASSICAL_MIN: f64 = 10.0;

/// Cluster index, semiclassical parameter and energy E = 1 − h²k² of a
/// member, with n the nearest cluster center.
pub fn member_energy(w: &RadialEigenfunction) -> (usize, f64, f64) {
    let n = nearest_center(w.lambda2);
    let h = 1.0 / (n as f64 + 0.5);
    let hk = h * w.k as f64;
    (n, h, 1.0 - hk * hk)
}

/// `w` at the chart nodes, interpolating colatitude samples with cubics.
pub fn sample_on_chart(w: &RadialEigenfunction, chart: &IsothermalChart) -> Vec<f64> {
    match w.coordinate {
        RadialCoordinate::Isothermal => w.w.clone(),
        RadialCoordinate::Colatitude => {
            let n = w.w.len();
            chart
                .theta
                .iter()
                .map(|t| {
                    let s = t / w.spacing;
                    let j = (s.floor() as usize).clamp(1, n - 3);
                    let u = s - j as f64;
                    let (a, b, c, d) = (w.w[j - 1], w.w[j], w.w[j + 1], w.w[j + 2]);
                    // Lagrange cubic on nodes j−1..j+2
                    -u * (u - 1.0) * (u - 2.0) / 6.0 * a
                        + (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 * b
                        - (u + 1.0) * u * (u - 2.0) / 2.0 * c
                        + (u + 1.0) * u * (u - 1.0) / 6.0 * d
                })
                .collect()
        }
    }
}

/// Indicator of the upper hemi-surface at node i of an n-node grid whose
/// middle node is the equator, with the equator node weighted ½.
fn upper_indicator(i: usize, n: usize) -> f64 {
    let mid = (n - 1) / 2;
    match i.cmp(&mid) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Less => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRatio {
    /// Upper-half mass in L²(ρ² dx).
    pub weighted: f64,
    /// Upper-half mass in L²(dx) over the truncated chart.
    pub unweighted: f64,
}

pub fn mass_ratio(w: &RadialEigenfunction, chart: &IsothermalChart) -> MassRatio {
    let weights = inner_product_weights(chart, w.coordinate);
    let n = w.w.len();
    let (mut upper, mut total) = (0.0, 0.0);
    for (i, (wt, v)) in weights.iter().zip(&w.w).enumerate() {
        let m = wt * v * v;
        total += m;
        upper += upper_indicator(i, n) * m;
    }
    let sampled = sample_on_chart(w, chart);
    let len = sampled.len();
    let (mut upper_dx, mut total_dx) = (0.0, 0.0);
    for (i, v) in sampled.iter().enumerate() {
        let end = if i == 0 || i + 1 == len { 0.5 } else { 1.0 };
        let m = end * v * v;
        total_dx += m;
        upper_dx += upper_indicator(i, len) * m;
    }
    MassRatio {
        weighted: upper / total,
        unweighted: upper_dx / total_dx,
    }
}

/// ρ²dx mass of `w` where the Agmon weight Φ^ε/h reaches `threshold`.
pub fn agmon_tail_mass(
    w: &RadialEigenfunction,
    chart: &IsothermalChart,
    epsilon_a: f64,
    threshold: f64,
) -> f64 {
    let (_, h, energy) = member_energy(w);
    let env = agmon_envelope(chart, energy, epsilon_a);
    let sampled = sample_on_chart(w, chart);
    let weights = inner_product_weights(chart, RadialCoordinate::Isothermal);
    let total: f64 = weights.iter().zip(&sampled).map(|(a, v)| a * v * v).sum();
    let tail: f64 = weights
        .iter()
        .zip(&sampled)
        .zip(&env.phase)
        .filter(|(_, phi)| **phi / h >= threshold)
        .map(|((a, v), _)| a * v * v)
        .sum();
    tail / total
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub epsilon: f64,
    pub min_ratio: f64,
    /// (n, k) of the minimizing member.
    pub argmin: (usize, i64),
    /// Minimum ratio per cluster that has admissible members.
    pub per_n: Vec<(usize, f64)>,
    /// Least-squares slope of `per_n` against n.
    pub trend_slope: f64,
    pub evaluated: usize,
}

/// Minimum weighted mass ratio over members with k ∈ Z_n(ε), restricted to
/// clusters with n in `n_range`.
pub fn observability_scan(
    chart: &IsothermalChart,
    clusters: &[SpectralCluster],
    epsilon: f64,
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<ScanReport> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} must lie in [0, 1)"
        )));
    }
    let work: Vec<(usize, &RadialEigenfunction)> = clusters
        .iter()
        .filter(|c| n_range.contains(&c.n))
        .flat_map(|c| c.admissible_members(epsilon).map(move |m| (c.n, m)))
        .collect();
    if work.is_empty() {
        return Err(Error::EmptyAdmissibleSet);
    }
    let ratios: Vec<(usize, i64, f64)> = work
        .par_iter()
        .map(|(n, m)| (*n, m.k, mass_ratio(m, chart).weighted))
        .collect();

    let mut per_n: Vec<(usize, f64)> = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut argmin = (0, 0);
    for &(n, k, r) in &ratios {
        if r < min_ratio {
            min_ratio = r;
            argmin = (n, k);
        }
        match per_n.last_mut() {
            Some((m, v)) if *m == n => *v = v.min(r),
            _ => per_n.push((n, r)),
        }
    }
    let trend_slope = linear_slope(&per_n);
    Ok(ScanReport {
        epsilon,
        min_ratio,
        argmin,
        per_n,
        trend_slope,
        evaluated: ratios.len(),
    })
}

fn linear_slope(points: &[(usize, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NearEquator,
    /// Between the two thresholds; both diagnostics are run.
    Gap,
    Semiclassical,
}

pub fn regime(e_over_h: f64) -> Regime {
    if e_over_h <= NEAR_EQUATOR_MAX {
        Regime::NearEquator
    } else if e_over_h < SEMICLASSICAL_MIN {
        Regime::Gap
    } else {
        Regime::Semiclassical
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservabilityRecord {
    pub n: usize,
    pub k: i64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub regime: Regime,
    /// E < 0: admissible up to O(h²) only.
    pub negative_energy: bool,
    pub ratio: f64,
    #[serde(rename = "F")]
    pub f: Option<f64>,
    pub i0: Option<usize>,
    pub l2_error: Option<f64>,
    pub ring_mass: Option<f64>,
    pub half_mass: Option<f64>,
}

/// Every diagnostic that applies to the member's regime.
pub fn member_record(
    w: &RadialEigenfunction,
    chart: &IsothermalChart,
    band: f64,
) -> ObservabilityRecord {
    let (n, h, energy) = member_energy(w);
    let regime = regime(energy / h);
    let ratio = mass_ratio(w, chart).weighted;
    let hermite = match regime {
        Regime::NearEquator | Regime::Gap => hermite_compare_unchecked(w, chart).ok(),
        Regime::Semiclassical => None,
    };
    let husimi = match regime {
        Regime::Semiclassical | Regime::Gap => husimi::husimi_unchecked(w, chart, band).ok(),
        Regime::NearEquator => None,
    };
    ObservabilityRecord {
        n,
        k: w.k,
        energy,
        regime,
        negative_energy: energy < 0.0,
        ratio,
        f: hermite.as_ref().map(|r| r.f),
        i0: hermite.as_ref().map(|r| r.i0),
        l2_error: hermite.as_ref().map(|r| r.l2_error),
        ring_mass: husimi.as_ref().map(|r| r.ring_mass),
        half_mass: husimi.as_ref().map(|r| r.half_mass),
    }
}

fn hermite_compare_unchecked(
    w: &RadialEigenfunction,
    chart: &IsothermalChart,
) -> Result<HermiteReport> {
    hermite::hermite_compare_with(w, chart, f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_chart, validate_profile};

    fn gaussian(chart: &IsothermalChart) -> RadialEigenfunction {
        let w: Vec<f64> = chart.x().iter().map(|x| (-x * x).exp()).collect();
        RadialEigenfunction {
            k: 3,
            lambda2: 12.0,
            coordinate: RadialCoordinate::Isothermal,
            spacing: chart.dx(),
            dw: vec![0.0; w.len()],
            w,
            norm_rho: 1.0,
            residual: 0.0,
        }
    }

    #[test]
    fn even_function_has_half_mass_on_any_profile() {
        let chart = build_chart(&validate_profile(&[], 128).unwrap(), 6.0, 1025).unwrap();
        let r = mass_ratio(&gaussian(&chart), &chart);
        assert!((r.weighted - 0.5).abs() < 1e-14);
        assert!((r.unweighted - 0.5).abs() < 1e-14);
    }

    #[test]
    fn regimes_split_at_the_thresholds() {
        assert_eq!(regime(-0.3), Regime::NearEquator);
        assert_eq!(regime(5.0), Regime::NearEquator);
        assert_eq!(regime(7.0), Regime::Gap);
        assert_eq!(regime(10.0), Regime::Semiclassical);
    }

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(usize, f64)> = (0..10).map(|n| (n, 2.0 - 0.5 * n as f64)).collect();
        assert!((linear_slope(&pts) + 0.5).abs() < 1e-14);
    }
}
