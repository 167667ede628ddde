//! Separated Laplace spectrum: radial eigenproblems per angular number k,
//! cluster assignment around (n + 1/2)², and the operators L and K = Δ + L.
//!
//! For k ≠ 0 the radial equation −w'' + k²w = λ²ρ²w is solved in the
//! isothermal coordinate. For k = 0 it is solved in colatitude as
//! −(p w')' = λ² q w with p = sin θ/(1 + h), q = (1 + h) sin θ, which keeps
//! the regular pole conditions exact.

mod clusters;
mod polar;
mod radial;
pub mod tridiag;

pub use clusters::{
    apply_k, assemble_spectrum, cluster_center, nearest_center, write_spectrum_csv, AdmissibleSet,
    SpectralCluster, Spectrum,
};
pub use polar::polar_pencil;
pub use radial::{integrate_radial_ivp, isothermal_pencil};
pub use tridiag::{solve_tridiagonal, SymTridiag};

use crate::error::{Error, Result};
use crate::geometry::IsothermalChart;

/// Coordinate in which a radial profile is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialCoordinate {
    /// Chart nodes x_i.
    Isothermal,
    /// Uniform colatitude nodes θ_i = iπ/(len − 1).
    Colatitude,
}

#[derive(Debug, Clone)]
pub struct RadialEigenfunction {
    pub k: i64,
    pub lambda2: f64,
    pub coordinate: RadialCoordinate,
    /// Node spacing of `w` (dx or dθ).
    pub spacing: f64,
    pub w: Vec<f64>,
    /// w' in the isothermal form, the flux p·dw/dθ in colatitude. Either way
    /// w₁·dw₂ − dw₁·w₂ is the conserved Wronskian.
    pub dw: Vec<f64>,
    /// Norm of `w` in L²(ρ² dx), equal to 1 for solver output.
    pub norm_rho: f64,
    /// Relative residual of the differential equation.
    pub residual: f64,
}

impl RadialEigenfunction {
    pub fn lambda(&self) -> f64 {
        self.lambda2.max(0.0).sqrt()
    }
}

/// Weights ω_i such that Σ ω_i u_i v_i approximates the L²(ρ² dx) product
/// for functions sampled in `coordinate` on `chart`.
pub fn inner_product_weights(chart: &IsothermalChart, coordinate: RadialCoordinate) -> Vec<f64> {
    let n = chart.len();
    let end = |i: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
    match coordinate {
        RadialCoordinate::Isothermal => chart
            .rho
            .iter()
            .enumerate()
            .map(|(i, r)| end(i) * r * r * chart.dx)
            .collect(),
        RadialCoordinate::Colatitude => {
            // Simpson: q w² has non-zero slope at the poles, so the trapezoid
            // rule would only be second order. n − 1 = 4q is even.
            let dtheta = std::f64::consts::PI / (n - 1) as f64;
            let profile = chart.profile();
            let simpson = |i: usize| {
                if i == 0 || i + 1 == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                }
            };
            (0..n)
                .map(|i| {
                    let t = i as f64 * dtheta;
                    simpson(i) / 3.0 * profile.stretch(t) * t.sin() * dtheta
                })
                .collect()
        }
    }
}

/// Weighted inner product of two sampled profiles.
pub fn weighted_inner(
    chart: &IsothermalChart,
    a: &RadialEigenfunction,
    b: &RadialEigenfunction,
) -> Result<f64> {
    if a.coordinate != b.coordinate || a.w.len() != b.w.len() || a.w.len() != chart.len() {
        return Err(Error::InvalidArgument(
            "profiles are sampled on different grids".into(),
        ));
    }
    let weights = inner_product_weights(chart, a.coordinate);
    Ok(weights
        .iter()
        .zip(a.w.iter().zip(&b.w))
        .map(|(wt, (u, v))| wt * u * v)
        .sum())
}

/// max |⟨w_i, w_j⟩ − δ_ij| over pairs with equal |k|, a measure of how far
/// the computed eigenfunctions are from an orthonormal family.
pub fn gram_defect<'a>(
    chart: &IsothermalChart,
    members: impl IntoIterator<Item = &'a RadialEigenfunction>,
) -> Result<f64> {
    let mut by_k: std::collections::BTreeMap<i64, Vec<&RadialEigenfunction>> = Default::default();
    for m in members {
        by_k.entry(m.k.abs()).or_default().push(m);
    }
    let mut worst = 0.0_f64;
    for group in by_k.values() {
        for (i, a) in group.iter().enumerate() {
            for (j, b) in group.iter().enumerate().skip(i) {
                let g = weighted_inner(chart, a, b)?;
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
    }
    Ok(worst)
}

/// Eigenpairs of the radial problem for angular number `k` with λ² inside
/// the open `window`.
///
/// For k ≠ 0 a window lying entirely at or below k² is empty by exclusion;
/// one that straddles k² is rejected.
pub fn radial_solve(
    chart: &IsothermalChart,
    k: i64,
    window: (f64, f64),
) -> Result<Vec<RadialEigenfunction>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(Error::InvalidArgument(format!(
            "window ({lo}, {hi}) must be a finite non-empty interval"
        )));
    }
    if k == 0 {
        return polar::solve(chart, window);
    }
    let k2 = (k * k) as f64;
    if hi <= k2 {
        return Ok(Vec::new());
    }
    if lo < k2 {
        return Err(Error::WindowOutsideExclusion { k, lo, hi });
    }
    radial::solve(chart, k, window)
}

/// Sup over interior nodes of |W − mean W| relative to the scale of the
/// two factors, where W = w₁ dw₂ − dw₁ w₂.
pub fn wronskian_check(w1: &RadialEigenfunction, w2: &RadialEigenfunction) -> Result<f64> {
    if w1.k.abs() != w2.k.abs()
        || w1.coordinate != w2.coordinate
        || w1.w.len() != w2.w.len()
        || (w1.lambda2 - w2.lambda2).abs() > 1e-12 * w1.lambda2.abs().max(1.0)
    {
        return Err(Error::MismatchedOde);
    }
    let n = w1.w.len();
    if n < 5 {
        return Err(Error::InvalidArgument("profiles too short".into()));
    }
    let interior = 2..n - 2;
    let wr: Vec<f64> = interior
        .clone()
        .map(|i| w1.w[i] * w2.dw[i] - w1.dw[i] * w2.w[i])
        .collect();
    let mean = wr.iter().sum::<f64>() / wr.len() as f64;
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let scale = sup(&w1.w) * sup(&w2.dw) + sup(&w1.dw) * sup(&w2.w);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(wr.iter().fold(0.0_f64, |m, x| m.max((x - mean).abs())) / scale)
}

/// Rescales `w` to unit L²(ρ² dx) norm and fixes its sign so that the
/// largest sample is positive. Returns the norm before scaling.
pub(crate) fn normalize(w: &mut [f64], dw: &mut [f64], weights: &[f64]) -> f64 {
    let norm = weights
        .iter()
        .zip(w.iter())
        .map(|(wt, v)| wt * v * v)
        .sum::<f64>()
        .sqrt();
    let peak = w.iter().copied().fold(
        0.0_f64,
        |best, v| if v.abs() > best.abs() { v } else { best },
    );
    let scale = if peak < 0.0 { -1.0 / norm } else { 1.0 / norm };
    w.iter_mut().for_each(|v| *v *= scale);
    dw.iter_mut().for_each(|v| *v *= scale);
    norm
}

pub(crate) fn weighted_norm(w: &[f64], weights: &[f64]) -> f64 {
    weights
        .iter()
        .zip(w)
        .map(|(a, v)| a * v * v)
        .sum::<f64>()
        .sqrt()
}

/// Fourth-order central first derivative, lower order at the ends.
pub(crate) fn derivative(w: &[f64], h: f64) -> Vec<f64> {
    let n = w.len();
    let mut d = vec![0.0; n];
    if n < 5 {
        return d;
    }
    d[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
    d[n - 1] = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * h);
    d[1] = (w[2] - w[0]) / (2.0 * h);
    d[n - 2] = (w[n - 1] - w[n - 3]) / (2.0 * h);
    for i in 2..n - 2 {
        d[i] = (-w[i + 2] + 8.0 * w[i + 1] - 8.0 * w[i - 1] + w[i - 2]) / (12.0 * h);
    }
    d
}

/// Fourth-order central second derivative at interior nodes 2..n−2.
pub(crate) fn second_derivative(w: &[f64], h: f64, i: usize) -> f64 {
    (-w[i + 2] + 16.0 * w[i + 1] - 30.0 * w[i] + 16.0 * w[i - 1] - w[i - 2]) / (12.0 * h * h)
}

/// Relative ℓ² size of a residual against a reference term.
pub(crate) fn relative_norm(residual: &[f64], reference: &[f64]) -> f64 {
    let r: f64 = residual.iter().map(|v| v * v).sum();
    let s: f64 = reference.iter().map(|v| v * v).sum();
    if s == 0.0 {
        r.sqrt()
    } else {
        (r / s).sqrt()
    }
}

/// Keeps one of any pair of eigenvalues closer than `tol` relative,
/// preferring the smaller residual.
pub(crate) fn drop_near_duplicates(
    mut found: Vec<RadialEigenfunction>,
) -> Vec<RadialEigenfunction> {
    found.sort_by(|a, b| a.lambda2.total_cmp(&b.lambda2));
    let mut out: Vec<RadialEigenfunction> = Vec::with_capacity(found.len());
    for f in found {
        if let Some(last) = out.last_mut() {
            if (f.lambda2 - last.lambda2).abs() <= 1e-9 * f.lambda2.abs().max(1.0) {
                log::warn!(
                    "near-degenerate pair at k = {}, lambda^2 = {}; keeping the lower residual",
                    f.k,
                    f.lambda2
                );
                if f.residual < last.residual {
                    *last = f;
                }
                continue;
            }
        }
        out.push(f);
    }
    out
}
