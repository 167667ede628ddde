//! k ≠ 0: finite-difference pencil for coverage, Numerov shooting for
//! accuracy, Richardson extrapolation over the grid and its 2dx subgrid.

use super::tridiag::{eigenvalue_by_index, sturm_count, SymTridiag};
use super::{
    derivative, drop_near_duplicates, inner_product_weights, normalize, relative_norm,
    second_derivative, weighted_norm, RadialCoordinate, RadialEigenfunction,
};
use crate::error::{Error, Result};
use crate::geometry::IsothermalChart;

const RESCALE_AT: f64 = 1e150;

/// Stiffness and mass of −w'' + k²w = λ²ρ²w, both scaled by dx, with the
/// Robin closure w' = ∓κw at ±X.
pub fn isothermal_pencil(chart: &IsothermalChart, k: i64, kappa: f64) -> (SymTridiag, Vec<f64>) {
    let n = chart.len();
    let dx = chart.dx;
    let k2 = (k * k) as f64;
    let mut diag = vec![2.0 / dx + dx * k2; n];
    diag[0] = 1.0 / dx + kappa + 0.5 * dx * k2;
    diag[n - 1] = diag[0];
    let off = vec![-1.0 / dx; n - 1];
    let mass = chart
        .rho
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let wt = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            dx * r * r * wt
        })
        .collect();
    (SymTridiag { diag, off }, mass)
}

/// Numerov integration on the chart grid or one of its subgrids.
struct Shooter<'a> {
    rho: &'a [f64],
    stride: usize,
    len: usize,
    center: usize,
    dx: f64,
    k2: f64,
}

impl<'a> Shooter<'a> {
    fn new(chart: &'a IsothermalChart, k: i64, stride: usize) -> Self {
        let len = (chart.len() - 1) / stride + 1;
        Self {
            rho: &chart.rho,
            stride,
            len,
            center: chart.center / stride,
            dx: chart.dx * stride as f64,
            k2: (k * k) as f64,
        }
    }

    fn g(&self, i: usize, lambda2: f64) -> f64 {
        let r = self.rho[i * self.stride];
        self.k2 - lambda2 * r * r
    }

    /// Integrates from the end `from` toward `to` (inclusive), writing into
    /// `out` indexed by node. Starts from the WKB decaying solution.
    fn sweep(&self, lambda2: f64, from: usize, to: usize, out: &mut [f64]) {
        let step = |i: usize| if to > from { i + 1 } else { i - 1 };
        let h2 = self.dx * self.dx / 12.0;
        let kappa = |i: usize| self.g(i, lambda2).max(0.0).sqrt();
        let first = step(from);
        out[from] = 1.0;
        out[first] = (0.5 * self.dx * (kappa(from) + kappa(first))).exp();
        let mut prev = from;
        let mut cur = first;
        while cur != to {
            let next = step(cur);
            let c_prev = 1.0 - h2 * self.g(prev, lambda2);
            let c_next = 1.0 - h2 * self.g(next, lambda2);
            let t = 2.0 * (1.0 + 5.0 * h2 * self.g(cur, lambda2));
            out[next] = (t * out[cur] - c_prev * out[prev]) / c_next;
            if out[next].abs() > RESCALE_AT {
                let lo = from.min(next);
                let hi = from.max(next);
                out[lo..=hi].iter_mut().for_each(|v| *v /= RESCALE_AT);
            }
            prev = cur;
            cur = next;
        }
    }

    /// Sign-carrying matching function, zero exactly at discrete eigenvalues.
    fn mismatch(&self, lambda2: f64, left: &mut [f64], right: &mut [f64]) -> f64 {
        let m = self.center;
        self.sweep(lambda2, 0, m + 1, left);
        self.sweep(lambda2, self.len - 1, m, right);
        let h2 = self.dx * self.dx / 12.0;
        let c0 = 1.0 - h2 * self.g(m, lambda2);
        let c1 = 1.0 - h2 * self.g(m + 1, lambda2);
        let w = c0 * c1 * (left[m] * right[m + 1] - left[m + 1] * right[m]);
        w / ((left[m].abs() + left[m + 1].abs()) * (right[m].abs() + right[m + 1].abs()))
    }

    /// Bisection on the matching function inside `bracket`, widening it up
    /// to four times if it holds no sign change.
    fn polish(&self, k: i64, guess: f64, bracket: (f64, f64), floor: f64) -> Result<f64> {
        let mut left = vec![0.0; self.len];
        let mut right = vec![0.0; self.len];
        let mut f = |l: f64| self.mismatch(l, &mut left, &mut right);
        let (mut a, mut b) = bracket;
        let (mut fa, mut fb) = (f(a), f(b));
        let mut widen = 0;
        while fa * fb > 0.0 {
            widen += 1;
            if widen > 4 {
                return Err(Error::NoConvergence { k, lambda2: guess });
            }
            a = (guess - 2.0 * (guess - a)).max(floor);
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
        let root = 0.5 * (a + b);
        if root.is_finite() {
            Ok(root)
        } else {
            Err(Error::NoConvergence { k, lambda2: guess })
        }
    }

    /// Stitched eigenfunction at `lambda2` on this grid.
    fn eigenfunction(&self, lambda2: f64) -> Vec<f64> {
        let m = self.center;
        let mut left = vec![0.0; self.len];
        let mut right = vec![0.0; self.len];
        self.sweep(lambda2, 0, m + 1, &mut left);
        self.sweep(lambda2, self.len - 1, m - 1, &mut right);
        let (mut num, mut den) = (0.0, 0.0);
        for i in m - 1..=m + 1 {
            num += left[i] * right[i];
            den += right[i] * right[i];
        }
        let s = num / den;
        let mut w = left;
        for i in m + 1..self.len {
            w[i] = s * right[i];
        }
        w
    }
}

pub(super) fn solve(
    chart: &IsothermalChart,
    k: i64,
    window: (f64, f64),
) -> Result<Vec<RadialEigenfunction>> {
    let (lo, hi) = window;
    let k2 = (k * k) as f64;
    // eight nodes per wavelength 2π/λ at the window top
    let needed = 2.0 * std::f64::consts::PI / (8.0 * hi.sqrt());
    if chart.dx > needed {
        let min = (2.0 * chart.half_width / needed).ceil() as usize + 1;
        return Err(Error::GridTooCoarse {
            got: chart.len(),
            min,
        });
    }

    let (stiff, mass) = isothermal_pencil(chart, k, k.abs() as f64);
    let pad = 1.0 + 0.02 * hi;
    let search_lo = (lo - pad).max(k2);
    let search_hi = hi + pad;
    let first = sturm_count(&stiff, &mass, search_lo);
    let last = sturm_count(&stiff, &mass, search_hi);
    if first == last {
        return Ok(Vec::new());
    }
    // neighbours on both sides bound the shooting brackets
    let first_neighbour = if first > 0 { first - 1 } else { first };
    let fd: Vec<f64> = (first_neighbour..=last)
        .map(|i| eigenvalue_by_index(&stiff, &mass, i, k2))
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::NoConvergence { k, lambda2: hi })?;
    let offset = first - first_neighbour;

    let fine = Shooter::new(chart, k, 1);
    let coarse = Shooter::new(chart, k, 2);
    let weights = inner_product_weights(chart, RadialCoordinate::Isothermal);
    let mut found = Vec::new();
    for j in offset..offset + (last - first) {
        let guess = fd[j];
        let below = if j > 0 {
            0.5 * (fd[j - 1] + guess)
        } else {
            (guess - 0.5 * (fd[j + 1] - guess)).max(k2)
        };
        let above = 0.5 * (guess + fd[j + 1]);
        let fine_root = fine.polish(k, guess, (below, above), k2)?;
        let coarse_root = coarse.polish(k, guess, (below, above), k2)?;
        let lambda2 = (16.0 * fine_root - coarse_root) / 15.0;
        if !(lambda2 > lo && lambda2 < hi) {
            continue;
        }
        let mut w = fine.eigenfunction(fine_root);
        let mut dw = derivative(&w, chart.dx);
        normalize(&mut w, &mut dw, &weights);
        let residual = residual(chart, k2, lambda2, &w);
        found.push(RadialEigenfunction {
            k,
            lambda2,
            coordinate: RadialCoordinate::Isothermal,
            spacing: chart.dx,
            norm_rho: weighted_norm(&w, &weights),
            w,
            dw,
            residual,
        });
    }
    Ok(drop_near_duplicates(found))
}

fn residual(chart: &IsothermalChart, k2: f64, lambda2: f64, w: &[f64]) -> f64 {
    let n = w.len();
    let mut res = Vec::with_capacity(n);
    let mut reference = Vec::with_capacity(n);
    for i in 2..n - 2 {
        let r2 = chart.rho[i] * chart.rho[i];
        res.push(-second_derivative(w, chart.dx, i) + (k2 - lambda2 * r2) * w[i]);
        reference.push(lambda2 * r2 * w[i]);
    }
    relative_norm(&res, &reference)
}

/// Solution of −w'' + k²w = λ²ρ²w with w(0) = w0, w'(0) = dw0, integrated
/// by RK4 from x = 0 toward both ends of the chart.
pub fn integrate_radial_ivp(
    chart: &IsothermalChart,
    k: i64,
    lambda2: f64,
    w0: f64,
    dw0: f64,
) -> RadialEigenfunction {
    let n = chart.len();
    let m = chart.center;
    let k2 = (k * k) as f64;
    let dx = chart.dx;
    let mut w = vec![0.0; n];
    let mut dw = vec![0.0; n];
    w[m] = w0;
    dw[m] = dw0;
    // ρ² at the half step is needed by RK4; interpolate with the cubic
    // through four neighbouring nodes
    let rho2 = |i: usize| chart.rho[i] * chart.rho[i];
    let mid_rho2 = |i: usize, j: usize| {
        let (a, b) = (i.min(j), i.max(j));
        if a >= 1 && b + 1 < n {
            (-rho2(a - 1) + 9.0 * rho2(a) + 9.0 * rho2(b) - rho2(b + 1)) / 16.0
        } else {
            0.5 * (rho2(a) + rho2(b))
        }
    };
    for dir in [1i64, -1] {
        let h = dir as f64 * dx;
        let mut i = m;
        let mut y = [w0, dw0];
        for _ in 0..m {
            let j = (i as i64 + dir) as usize;
            let f = |y: [f64; 2], r2: f64| [y[1], (k2 - lambda2 * r2) * y[0]];
            let rm = mid_rho2(i, j);
            let k1 = f(y, rho2(i));
            let k2v = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]], rm);
            let k3 = f([y[0] + 0.5 * h * k2v[0], y[1] + 0.5 * h * k2v[1]], rm);
            let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]], rho2(j));
            y = [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2v[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2v[1] + 2.0 * k3[1] + k4[1]),
            ];
            w[j] = y[0];
            dw[j] = y[1];
            i = j;
        }
    }
    let weights = inner_product_weights(chart, RadialCoordinate::Isothermal);
    let norm_rho = weighted_norm(&w, &weights);
    let res = residual(chart, k2, lambda2, &w);
    RadialEigenfunction {
        k,
        lambda2,
        coordinate: RadialCoordinate::Isothermal,
        spacing: dx,
        w,
        dw,
        norm_rho,
        residual: res,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_chart, validate_profile};

    fn sphere_chart() -> IsothermalChart {
        build_chart(&validate_profile(&[], 128).unwrap(), 8.0, 2049).unwrap()
    }

    #[test]
    fn sphere_low_modes_match_legendre() {
        let chart = sphere_chart();
        let found = solve(&chart, 1, (1.0, 60.0)).unwrap();
        let got: Vec<f64> = found.iter().map(|e| e.lambda2).collect();
        let want = [2.0, 6.0, 12.0, 20.0, 30.0, 42.0, 56.0];
        assert_eq!(got.len(), want.len(), "{got:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-8 * w, "{g} vs {w}");
        }
    }

    #[test]
    fn sphere_ground_state_is_sech_power() {
        let chart = sphere_chart();
        let found = solve(&chart, 12, (144.0, 170.0)).unwrap();
        assert_eq!(found.len(), 1);
        let e = &found[0];
        assert!((e.lambda2 - 156.0).abs() < 1e-6);
        let weights = inner_product_weights(&chart, RadialCoordinate::Isothermal);
        let mut oracle: Vec<f64> = chart.x().iter().map(|x| x.cosh().powi(-12)).collect();
        let mut scratch = vec![0.0; oracle.len()];
        normalize(&mut oracle, &mut scratch, &weights);
        let err =
            e.w.iter()
                .zip(&oracle)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-6, "sup error {err}");
        assert!(e.residual < 1e-5, "residual {}", e.residual);
    }
}
