//! Coherent-state (Husimi) densities of semiclassical modes.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{member_energy, sample_on_chart, SEMICLASSICAL_MIN};
use crate::error::{Error, Result};
use crate::geometry::IsothermalChart;
use crate::spectral::RadialEigenfunction;

/// Nodes per axis of the (z, ζ) grid on [−2, 2]².
pub const HUSIMI_GRID: usize = 101;
const GRID_EXTENT: f64 = 2.0;
/// Window cut-off in units of its width √ĥ.
const WINDOW_CUTOFF: f64 = 7.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HusimiField {
    /// ĥ = cV^{1/2}E^{−1}h.
    pub hbar_eff: f64,
    pub z: Vec<f64>,
    pub zeta: Vec<f64>,
    /// Cell probabilities, row-major in z; sums to 1.
    pub density: Vec<f64>,
    /// Mass with |z² + ζ² − 1| ≤ band.
    pub ring_mass: f64,
    /// Mass with z > 0, the z = 0 column weighted ½.
    pub half_mass: f64,
    pub band: f64,
}

impl HusimiField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.density[i * self.zeta.len() + j]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "z,zeta,density")?;
        for (i, z) in self.z.iter().enumerate() {
            for (j, zeta) in self.zeta.iter().enumerate() {
                writeln!(out, "{z:.6},{zeta:.6},{:.9e}", self.at(i, j))?;
            }
        }
        Ok(())
    }
}

/// Husimi density of the member rescaled to z = cV^{1/2}E^{−1/2}x, with
/// Gaussian window exp(−(z − z₀)²/(2ĥ)). Requires E/h ≥ 10.
pub fn husimi(w: &RadialEigenfunction, chart: &IsothermalChart, band: f64) -> Result<HusimiField> {
    let (_, h, energy) = member_energy(w);
    let ratio = energy / h;
    if !(ratio >= SEMICLASSICAL_MIN) {
        return Err(Error::NotSemiclassicalRegime { ratio });
    }
    husimi_unchecked(w, chart, band)
}

pub(super) fn husimi_unchecked(
    w: &RadialEigenfunction,
    chart: &IsothermalChart,
    band: f64,
) -> Result<HusimiField> {
    let (_, h, energy) = member_energy(w);
    if !(energy > 0.0) {
        return Err(Error::NotSemiclassicalRegime { ratio: energy / h });
    }
    let c_v = chart.c_v();
    let hbar = c_v.sqrt() * h / energy;
    let scale = (c_v / energy).sqrt();
    let dz = scale * chart.dx;
    let z_nodes: Vec<f64> = chart.x.iter().map(|x| scale * x).collect();
    let mut v = sample_on_chart(w, chart);
    let norm = (v.iter().map(|s| s * s).sum::<f64>() * dz).sqrt();
    v.iter_mut().for_each(|s| *s /= norm);

    let axis: Vec<f64> = (0..HUSIMI_GRID)
        .map(|i| -GRID_EXTENT + 2.0 * GRID_EXTENT * i as f64 / (HUSIMI_GRID - 1) as f64)
        .collect();
    let step = axis[1] - axis[0];
    let reach = WINDOW_CUTOFF * hbar.sqrt();
    let mut density = vec![0.0; HUSIMI_GRID * HUSIMI_GRID];
    for (i, &z0) in axis.iter().enumerate() {
        let lo = ((z0 - reach - z_nodes[0]) / dz).floor().max(0.0) as usize;
        let hi = (((z0 + reach - z_nodes[0]) / dz).ceil() as usize).min(z_nodes.len() - 1);
        if lo > hi {
            continue;
        }
        // phasors e^{−iζ z/ĥ} advanced along the ζ axis by recurrence
        let mut terms: Vec<(f64, f64, f64, f64)> = (lo..=hi)
            .map(|j| {
                let z = z_nodes[j];
                let amp = v[j] * (-(z - z0) * (z - z0) / (2.0 * hbar)).exp() * dz;
                let start = -axis[0] * z / hbar;
                let inc = -step * z / hbar;
                (amp * start.cos(), amp * start.sin(), inc.cos(), inc.sin())
            })
            .collect();
        for j in 0..HUSIMI_GRID {
            let (mut re, mut im) = (0.0, 0.0);
            for t in terms.iter_mut() {
                re += t.0;
                im += t.1;
                let (c, s) = (t.2, t.3);
                *t = (t.0 * c - t.1 * s, t.0 * s + t.1 * c, c, s);
            }
            density[i * HUSIMI_GRID + j] = re * re + im * im;
        }
    }
    let total: f64 = density.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument(
            "profile has no mass inside the phase-space window".into(),
        ));
    }
    density.iter_mut().for_each(|d| *d /= total);

    let mid = (HUSIMI_GRID - 1) / 2;
    let (mut ring_mass, mut half_mass) = (0.0, 0.0);
    for (i, z) in axis.iter().enumerate() {
        let half_weight = match i.cmp(&mid) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Less => 0.0,
        };
        for (j, zeta) in axis.iter().enumerate() {
            let d = density[i * HUSIMI_GRID + j];
            if (z * z + zeta * zeta - 1.0).abs() <= band {
                ring_mass += d;
            }
            half_mass += half_weight * d;
        }
    }
    Ok(HusimiField {
        hbar_eff: hbar,
        z: axis.clone(),
        zeta: axis,
        density,
        ring_mass,
        half_mass,
        band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_chart, validate_profile};
    use crate::spectral::RadialCoordinate;

    #[test]
    fn plane_phase_concentrates_on_unit_momentum() {
        let chart = build_chart(&validate_profile(&[], 128).unwrap(), 8.0, 4097).unwrap();
        // k = 5 in cluster n = 40: E/h ≈ 40, ĥ = h/E
        let member_k = 5;
        let lambda2 = 40.5f64 * 40.5;
        let h = 1.0 / 40.5;
        let energy = 1.0 - (h * member_k as f64).powi(2);
        let hbar = h / energy;
        let scale = (1.0 / energy).sqrt();
        // real part of e^{iz/ĥ}·bump, so the density sits at ζ = ±1
        let w: Vec<f64> = chart
            .x()
            .iter()
            .map(|x| {
                let z = scale * x;
                (z / hbar).cos() * (-(z * z) / 0.1).exp()
            })
            .collect();
        let member = RadialEigenfunction {
            k: member_k,
            lambda2,
            coordinate: RadialCoordinate::Isothermal,
            spacing: chart.dx(),
            dw: vec![0.0; w.len()],
            w,
            norm_rho: 1.0,
            residual: 0.0,
        };
        let field = husimi(&member, &chart, 0.25).unwrap();
        let total: f64 = field.density.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let near_unit: f64 = (0..HUSIMI_GRID)
            .flat_map(|i| (0..HUSIMI_GRID).map(move |j| (i, j)))
            .filter(|&(_, j)| (field.zeta[j].abs() - 1.0).abs() <= 0.3)
            .map(|(i, j)| field.at(i, j))
            .sum();
        assert!(near_unit > 0.95, "mass near |zeta| = 1: {near_unit}");
        assert!((field.half_mass - 0.5).abs() < 1e-6);
    }

    #[test]
    fn oscillator_state_matches_poisson_oracle() {
        // Husimi density of the i-th oscillator state of −ĥ²∂² + z² is
        // proportional to s^i e^{−s}, s = (z² + ζ²)/(2ĥ)
        let chart = build_chart(&validate_profile(&[], 128).unwrap(), 8.0, 4097).unwrap();
        let (member_k, n) = (5i64, 40.0f64);
        let h = 1.0 / (n + 0.5);
        let energy = 1.0 - (h * member_k as f64).powi(2);
        let hbar = h / energy;
        let scale = (1.0 / energy).sqrt();
        let level = 10;
        let z: Vec<f64> = chart.x().iter().map(|x| scale * x / hbar.sqrt()).collect();
        let w = crate::observability::hermite_functions(&z, level + 1)
            .pop()
            .unwrap();
        let member = RadialEigenfunction {
            k: member_k,
            lambda2: (n + 0.5) * (n + 0.5),
            coordinate: RadialCoordinate::Isothermal,
            spacing: chart.dx(),
            dw: vec![0.0; w.len()],
            w,
            norm_rho: 1.0,
            residual: 0.0,
        };
        let field = husimi(&member, &chart, 0.25).unwrap();
        let mut oracle: Vec<f64> = field
            .z
            .iter()
            .flat_map(|z| {
                field
                    .zeta
                    .iter()
                    .map(move |q| (z * z + q * q) / (2.0 * hbar))
            })
            .map(|s| s.powi(level as i32) * (-s).exp())
            .collect();
        let total: f64 = oracle.iter().sum();
        oracle.iter_mut().for_each(|d| *d /= total);
        let err = oracle
            .iter()
            .zip(&field.density)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let peak = oracle.iter().fold(0.0_f64, |m, a| m.max(*a));
        assert!(
            err < 1e-6 * peak.max(1e-3),
            "max deviation {err} (peak {peak})"
        );
    }
}
