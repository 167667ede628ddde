//! Comparison of near-equator modes with harmonic-oscillator eigenfunctions.

use serde::{Deserialize, Serialize};

use super::{member_energy, sample_on_chart, NEAR_EQUATOR_MAX};
use crate::error::{Error, Result};
use crate::geometry::IsothermalChart;
use crate::spectral::RadialEigenfunction;

pub const HERMITE_BASIS_SIZE: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HermiteReport {
    pub i0: usize,
    /// Rescaled energy E·cV^{−1/2}/h.
    #[serde(rename = "F")]
    pub f: f64,
    /// ‖ṽ − ±v_{i0}‖ in L²(dz), sign chosen to minimize it.
    pub l2_error: f64,
    /// |mass(z > 0) − 1/2|.
    pub parity_defect: f64,
    /// ‖ṽ − Σ_{i<64} α_i v_i‖.
    pub reconstruction_error: f64,
    pub coefficients: Vec<f64>,
}

/// Hermite functions v_0..v_{count−1} at `z` by the normalized recurrence
/// v_{i+1} = √(2/(i+1)) z v_i − √(i/(i+1)) v_{i−1}.
pub fn hermite_functions(z: &[f64], count: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    let c0 = std::f64::consts::PI.powf(-0.25);
    out.push(z.iter().map(|t| c0 * (-0.5 * t * t).exp()).collect());
    if count > 1 {
        let v1 = z
            .iter()
            .zip(&out[0])
            .map(|(t, v)| std::f64::consts::SQRT_2 * t * v)
            .collect();
        out.push(v1);
    }
    for i in 1..count.saturating_sub(1) {
        let a = (2.0 / (i + 1) as f64).sqrt();
        let b = (i as f64 / (i + 1) as f64).sqrt();
        let next = z
            .iter()
            .enumerate()
            .map(|(j, t)| a * t * out[i][j] - b * out[i - 1][j])
            .collect();
        out.push(next);
    }
    out
}

fn dot(a: &[f64], b: &[f64], dz: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * dz
}

/// Rescales to z = cV^{1/4}h^{−1/2}x and expands in oscillator
/// eigenfunctions. Requires E/h ≤ 5.
pub fn hermite_compare(w: &RadialEigenfunction, chart: &IsothermalChart) -> Result<HermiteReport> {
    hermite_compare_with(w, chart, NEAR_EQUATOR_MAX)
}

pub(super) fn hermite_compare_with(
    w: &RadialEigenfunction,
    chart: &IsothermalChart,
    max_ratio: f64,
) -> Result<HermiteReport> {
    let (_, h, energy) = member_energy(w);
    let ratio = energy / h;
    if ratio > max_ratio {
        return Err(Error::NotNearEquatorRegime { ratio });
    }
    let c_v = chart.c_v();
    let scale = c_v.powf(0.25) / h.sqrt();
    let dz = scale * chart.dx;
    let z: Vec<f64> = chart.x.iter().map(|x| scale * x).collect();
    let mut v = sample_on_chart(w, chart);
    let norm = dot(&v, &v, dz).sqrt();
    v.iter_mut().for_each(|s| *s /= norm);

    let mut basis = hermite_functions(&z, HERMITE_BASIS_SIZE);
    // modified Gram–Schmidt in the discrete L²(dz) product
    for i in 0..basis.len() {
        for j in 0..i {
            let (done, rest) = basis.split_at_mut(i);
            let p = dot(&rest[0], &done[j], dz);
            rest[0]
                .iter_mut()
                .zip(&done[j])
                .for_each(|(a, b)| *a -= p * b);
        }
        let nrm = dot(&basis[i], &basis[i], dz).sqrt();
        basis[i].iter_mut().for_each(|a| *a /= nrm);
    }
    let coefficients: Vec<f64> = basis.iter().map(|b| dot(b, &v, dz)).collect();
    let i0 = coefficients
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1 * a.1).total_cmp(&(b.1 * b.1)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let sign = coefficients[i0].signum();
    let l2_error = v
        .iter()
        .zip(&basis[i0])
        .map(|(a, b)| (a - sign * b).powi(2))
        .sum::<f64>()
        .sqrt()
        * dz.sqrt();
    let mut residual = v.clone();
    for (c, b) in coefficients.iter().zip(&basis) {
        residual.iter_mut().zip(b).for_each(|(r, x)| *r -= c * x);
    }
    let reconstruction_error = dot(&residual, &residual, dz).sqrt();

    let m = chart.center;
    let upper: f64 = v[m + 1..].iter().map(|s| s * s).sum::<f64>() * dz + 0.5 * v[m] * v[m] * dz;
    let total = dot(&v, &v, dz);
    Ok(HermiteReport {
        i0,
        f: energy / (c_v.sqrt() * h),
        l2_error,
        parity_defect: (upper / total - 0.5).abs(),
        reconstruction_error,
        coefficients,
    })
}
