//! k = 0 in colatitude: −(p w')' = λ² q w on [0, π] with regular poles.

use std::f64::consts::PI;

use super::tridiag::{eigenvalue_by_index, sturm_count, SymTridiag};
use super::{
    drop_near_duplicates, inner_product_weights, normalize, relative_norm, weighted_norm,
    RadialCoordinate, RadialEigenfunction,
};
use crate::error::{Error, Result};
use crate::geometry::{IsothermalChart, SurfaceProfile};
use crate::quadrature::GaussLegendre;

fn flux_coefficient(profile: &SurfaceProfile, theta: f64) -> f64 {
    theta.sin() / profile.stretch(theta)
}

fn mass_density(profile: &SurfaceProfile, theta: f64) -> f64 {
    profile.stretch(theta) * theta.sin()
}

/// Finite-volume pencil on `n_theta + 1` uniform colatitude nodes. Pole
/// rows carry no flux across the pole. Both matrices are in absolute units
/// (K ≈ ∫p w'², M ≈ ∫q w²).
pub fn polar_pencil(profile: &SurfaceProfile, n_theta: usize) -> (SymTridiag, Vec<f64>) {
    let d = PI / n_theta as f64;
    let half: Vec<f64> = (0..n_theta)
        .map(|i| flux_coefficient(profile, (i as f64 + 0.5) * d))
        .collect();
    let mut diag = vec![0.0; n_theta + 1];
    for (i, p) in half.iter().enumerate() {
        diag[i] += p / d;
        diag[i + 1] += p / d;
    }
    let off = half.iter().map(|p| -p / d).collect();
    let rule = GaussLegendre::new(8);
    let mass = (0..=n_theta)
        .map(|i| {
            let a = ((i as f64 - 0.5) * d).max(0.0);
            let b = ((i as f64 + 0.5) * d).min(PI);
            rule.integrate(a, b, |t| mass_density(profile, t))
        })
        .collect();
    (SymTridiag { diag, off }, mass)
}

/// p and q tabulated every half step of the fine grid, so that RK4 on the
/// fine grid and on its 2dθ subgrid reads tabulated values only.
struct Tables {
    p: Vec<f64>,
    q: Vec<f64>,
    half_step: f64,
    /// h'(1)/2, the quadratic coefficient of h(cos θ) at the north pole.
    pole_slope: f64,
}

impl Tables {
    fn new(profile: &SurfaceProfile, n_theta: usize) -> Self {
        let half_step = PI / (2 * n_theta) as f64;
        let (p, q) = (0..=2 * n_theta)
            .map(|j| {
                let t = j as f64 * half_step;
                (flux_coefficient(profile, t), mass_density(profile, t))
            })
            .unzip();
        Self {
            p,
            q,
            half_step,
            pole_slope: 0.5 * profile.dh(1.0),
        }
    }
}

struct PolarShooter<'a> {
    tables: &'a Tables,
    /// Fine-grid steps per shooting step (1 or 2).
    stride: usize,
    n_steps: usize,
}

/// Regular series w = 1 + c₂s² + c₄s⁴ about a pole, s the distance to it
/// and `a` the quadratic coefficient of −h(cos θ) in s.
fn pole_series(lambda2: f64, a: f64, s: f64) -> (f64, f64) {
    let c2 = -lambda2 / 4.0;
    let c4 = (-lambda2 * (c2 - a - 1.0 / 6.0) - 8.0 * c2 * (a - 1.0 / 6.0)) / 16.0;
    let s2 = s * s;
    (
        1.0 + c2 * s2 + c4 * s2 * s2,
        2.0 * c2 * s + 4.0 * c4 * s * s2,
    )
}

impl<'a> PolarShooter<'a> {
    fn new(tables: &'a Tables, stride: usize) -> Self {
        let n_theta = (tables.p.len() - 1) / 2;
        Self {
            tables,
            stride,
            n_steps: n_theta / stride,
        }
    }

    fn step(&self) -> f64 {
        2.0 * self.tables.half_step * self.stride as f64
    }

    /// Integrates (w, P) from one pole to the equator, storing nodes.
    /// `north` selects the starting pole.
    fn sweep(&self, lambda2: f64, north: bool, w: &mut [f64], flux: &mut [f64]) {
        let n = self.n_steps;
        let mid = n / 2;
        let h = self.step();
        let a = if north {
            self.tables.pole_slope
        } else {
            -self.tables.pole_slope
        };
        let (pole, first) = if north { (0, 1) } else { (n, n - 1) };
        let (w1, dws) = pole_series(lambda2, a, h);
        let sign = if north { 1.0 } else { -1.0 };
        let half = |node: usize, sub: usize| 2 * self.stride * node + sub;
        w[pole] = 1.0;
        flux[pole] = 0.0;
        w[first] = w1;
        flux[first] = self.tables.p[half(first, 0)] * sign * dws;
        let mut node = first;
        let signed_h = sign * h;
        let rhs =
            |y: [f64; 2], j: usize| [y[1] / self.tables.p[j], -lambda2 * self.tables.q[j] * y[0]];
        while node != mid {
            let next = if north { node + 1 } else { node - 1 };
            let j0 = half(node, 0);
            let j1 = half(next, 0);
            let jm = (j0 + j1) / 2;
            let y = [w[node], flux[node]];
            let k1 = rhs(y, j0);
            let k2 = rhs(
                [y[0] + 0.5 * signed_h * k1[0], y[1] + 0.5 * signed_h * k1[1]],
                jm,
            );
            let k3 = rhs(
                [y[0] + 0.5 * signed_h * k2[0], y[1] + 0.5 * signed_h * k2[1]],
                jm,
            );
            let k4 = rhs([y[0] + signed_h * k3[0], y[1] + signed_h * k3[1]], j1);
            w[next] = y[0] + signed_h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            flux[next] = y[1] + signed_h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            node = next;
        }
    }

    fn mismatch(&self, lambda2: f64, buf: &mut [Vec<f64>; 4]) -> f64 {
        let mid = self.n_steps / 2;
        let [wn, pn, ws, ps] = buf;
        self.sweep(lambda2, true, wn, pn);
        self.sweep(lambda2, false, ws, ps);
        let wr = wn[mid] * ps[mid] - pn[mid] * ws[mid];
        wr / ((wn[mid].abs() + pn[mid].abs()) * (ws[mid].abs() + ps[mid].abs()))
    }

    fn polish(&self, guess: f64, bracket: (f64, f64)) -> Result<f64> {
        let len = self.n_steps + 1;
        let mut buf = [
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
        ];
        let mut f = |l: f64| self.mismatch(l, &mut buf);
        let (mut a, mut b) = bracket;
        let (mut fa, mut fb) = (f(a), f(b));
        let mut widen = 0;
        while fa * fb > 0.0 {
            widen += 1;
            if widen > 4 {
                return Err(Error::NoConvergence {
                    k: 0,
                    lambda2: guess,
                });
            }
            a = (guess - 2.0 * (guess - a)).max(0.5 * guess);
            b = guess + 2.0 * (b - guess);
            fa = f(a);
            fb = f(b);
        }
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                return Ok(mid);
            }
            if fa * fm < 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
            if b - a <= 4.0 * f64::EPSILON * b.abs() {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Stitched (w, P) at `lambda2`.
    fn eigenfunction(&self, lambda2: f64) -> (Vec<f64>, Vec<f64>) {
        let len = self.n_steps + 1;
        let mid = self.n_steps / 2;
        let (mut wn, mut pn, mut ws, mut ps) = (
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
        );
        self.sweep(lambda2, true, &mut wn, &mut pn);
        self.sweep(lambda2, false, &mut ws, &mut ps);
        let s = (wn[mid] * ws[mid] + pn[mid] * ps[mid]) / (ws[mid] * ws[mid] + ps[mid] * ps[mid]);
        for i in mid + 1..len {
            wn[i] = s * ws[i];
            pn[i] = s * ps[i];
        }
        (wn, pn)
    }
}

pub(super) fn solve(
    chart: &IsothermalChart,
    window: (f64, f64),
) -> Result<Vec<RadialEigenfunction>> {
    let (lo, hi) = window;
    let profile = chart.profile();
    let n_theta = chart.len() - 1;
    let dtheta = PI / n_theta as f64;
    let weights = inner_product_weights(chart, RadialCoordinate::Colatitude);
    let mut found = Vec::new();

    if lo < 0.0 && hi > 0.0 {
        // the constants, exact for every discretization
        let mut w = vec![1.0; n_theta + 1];
        let mut flux = vec![0.0; n_theta + 1];
        normalize(&mut w, &mut flux, &weights);
        found.push(RadialEigenfunction {
            k: 0,
            lambda2: 0.0,
            coordinate: RadialCoordinate::Colatitude,
            spacing: dtheta,
            norm_rho: weighted_norm(&w, &weights),
            w,
            dw: flux,
            residual: 0.0,
        });
    }
    if hi <= 0.0 {
        return Ok(found);
    }

    let (stiff, mass) = polar_pencil(profile, n_theta);
    let pad = 1.0 + 0.02 * hi;
    // index 0 is the constant mode
    let zero_gap = eigenvalue_by_index(&stiff, &mass, 1, -1.0)
        .ok_or(Error::NoConvergence { k: 0, lambda2: 0.0 })?;
    let search_lo = (lo - pad).max(0.5 * zero_gap);
    let search_hi = hi + pad;
    let first = sturm_count(&stiff, &mass, search_lo).max(1);
    let last = sturm_count(&stiff, &mass, search_hi);
    if first >= last {
        return Ok(drop_near_duplicates(found));
    }
    let fd: Vec<f64> = (first - 1..=last)
        .map(|i| eigenvalue_by_index(&stiff, &mass, i, -1.0))
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::NoConvergence { k: 0, lambda2: hi })?;

    let tables = Tables::new(profile, n_theta);
    let fine = PolarShooter::new(&tables, 1);
    let coarse = PolarShooter::new(&tables, 2);
    for j in 1..fd.len() - 1 {
        let guess = fd[j];
        let below = 0.5 * (fd[j - 1].max(0.0) + guess);
        let above = 0.5 * (guess + fd[j + 1]);
        let fine_root = fine.polish(guess, (below, above))?;
        let coarse_root = coarse.polish(guess, (below, above))?;
        let lambda2 = (16.0 * fine_root - coarse_root) / 15.0;
        if !(lambda2 > lo && lambda2 < hi) {
            continue;
        }
        let (mut w, mut flux) = fine.eigenfunction(fine_root);
        normalize(&mut w, &mut flux, &weights);
        let residual = residual(&tables, lambda2, &w, &flux, dtheta);
        found.push(RadialEigenfunction {
            k: 0,
            lambda2,
            coordinate: RadialCoordinate::Colatitude,
            spacing: dtheta,
            norm_rho: weighted_norm(&w, &weights),
            w,
            dw: flux,
            residual,
        });
    }
    Ok(drop_near_duplicates(found))
}

/// Relative size of P' + λ² q w, with P' by fourth-order differences.
fn residual(tables: &Tables, lambda2: f64, w: &[f64], flux: &[f64], d: f64) -> f64 {
    let n = w.len();
    let mut res = Vec::with_capacity(n);
    let mut reference = Vec::with_capacity(n);
    for i in 2..n - 2 {
        let dp = (-flux[i + 2] + 8.0 * flux[i + 1] - 8.0 * flux[i - 1] + flux[i - 2]) / (12.0 * d);
        let source = lambda2 * tables.q[2 * i] * w[i];
        res.push(dp + source);
        reference.push(source);
    }
    relative_norm(&res, &reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_chart, validate_profile};

    #[test]
    fn sphere_zonal_modes_are_legendre() {
        let chart = build_chart(&validate_profile(&[], 128).unwrap(), 8.0, 2049).unwrap();
        let found = solve(&chart, (-0.5, 120.0)).unwrap();
        let got: Vec<f64> = found.iter().map(|e| e.lambda2).collect();
        let want = [
            0.0, 2.0, 6.0, 12.0, 20.0, 30.0, 42.0, 56.0, 72.0, 90.0, 110.0,
        ];
        assert_eq!(got.len(), want.len(), "{got:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-8 * w.max(1.0), "{g} vs {w}");
        }
        // P_2(cos θ) up to normalization
        let e = &found[2];
        let ratio = e.w[0] / e.w[chart.len() / 2];
        assert!((ratio - (-2.0)).abs() < 1e-8, "ratio {ratio}");
    }

    #[test]
    fn pole_series_satisfies_the_equation_to_fourth_order() {
        // sphere: w = P_n(cos θ), λ² = n(n + 1)
        let lambda2 = 12.0;
        let s = 1e-2;
        let (w, dw) = pole_series(lambda2, 0.0, s);
        let c = s.cos();
        let p3 = 0.5 * (5.0 * c * c * c - 3.0 * c);
        let dp3 = -s.sin() * 0.5 * (15.0 * c * c - 3.0);
        assert!((w - p3).abs() < 1e-10);
        assert!((dw - dp3).abs() < 1e-8);
    }
}
