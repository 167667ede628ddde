//! Symmetric tridiagonal pencils K − μM with diagonal positive M.

/// Symmetric tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows i and i + 1.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
    }

    /// vᵀ A v.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let n = self.len();
        let mut s = 0.0;
        for i in 0..n {
            s += self.diag[i] * v[i] * v[i];
            if i + 1 < n {
                s += 2.0 * self.off[i] * v[i] * v[i + 1];
            }
        }
        s
    }
}

/// Number of pencil eigenvalues strictly below `mu` (Sylvester inertia of
/// the LDLᵀ factorization of K − μM).
pub fn sturm_count(k: &SymTridiag, mass: &[f64], mu: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..k.len() {
        let coupling = if i > 0 {
            k.off[i - 1] * k.off[i - 1] / d
        } else {
            0.0
        };
        d = k.diag[i] - mu * mass[i] - coupling;
        if d == 0.0 {
            d = -f64::EPSILON * (k.diag[i].abs() + mu.abs() * mass[i]).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Pencil eigenvalues lying in [lo, hi), located by bisection on the count.
pub fn eigenvalues_in(k: &SymTridiag, mass: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return Vec::new();
    }
    let below_lo = sturm_count(k, mass, lo);
    let below_hi = sturm_count(k, mass, hi);
    (below_lo..below_hi)
        .map(|index| {
            // find mu with count(mu) <= index < count(mu')
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(k, mass, mid) > index {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a <= 1e-14 * b.abs().max(1.0) {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// The pencil eigenvalue with 0-based position `index`, searching upward
/// from `lo` (which must lie below it). Returns `None` if the upper bound
/// cannot be found.
pub fn eigenvalue_by_index(k: &SymTridiag, mass: &[f64], index: usize, lo: f64) -> Option<f64> {
    if sturm_count(k, mass, lo) > index {
        return None;
    }
    let mut hi = lo.abs().max(1.0) * 2.0;
    let mut tries = 0;
    while sturm_count(k, mass, hi) <= index {
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return None;
        }
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if sturm_count(k, mass, mid) > index {
            b = mid;
        } else {
            a = mid;
        }
        if b - a <= 1e-14 * b.abs().max(1.0) {
            break;
        }
    }
    Some(0.5 * (a + b))
}

/// Solves a general tridiagonal system by the Thomas algorithm. `lower[i]`
/// multiplies x[i] in row i + 1 and `upper[i]` multiplies x[i + 1] in row i.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    x[0] = rhs[0] / beta;
    for i in 1..n {
        c[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i - 1] * c[i];
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i + 1] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_laplacian_eigenvalues() {
        // -u'' on n interior points of (0, 1): 4/h² sin²(jπh/2)
        let n = 50;
        let h = 1.0 / (n + 1) as f64;
        let k = SymTridiag {
            diag: vec![2.0 / (h * h); n],
            off: vec![-1.0 / (h * h); n - 1],
        };
        let mass = vec![1.0; n];
        let eig = eigenvalues_in(&k, &mass, 0.0, 500.0);
        let exact: Vec<f64> = (1..=n)
            .map(|j| 4.0 / (h * h) * (j as f64 * PI * h / 2.0).sin().powi(2))
            .filter(|v| *v < 500.0)
            .collect();
        assert_eq!(eig.len(), exact.len());
        for (a, b) in eig.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn thomas_solves_diagonally_dominant_systems(
            rows in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 2..40)
        ) {
            let n = rows.len();
            let lower: Vec<f64> = rows.iter().skip(1).map(|r| r.0).collect();
            let upper: Vec<f64> = rows.iter().take(n - 1).map(|r| r.1).collect();
            let diag: Vec<f64> = rows.iter().map(|r| 3.0 + r.2).collect();
            let truth: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                rhs[i] = diag[i] * truth[i];
                if i > 0 { rhs[i] += lower[i - 1] * truth[i - 1]; }
                if i + 1 < n { rhs[i] += upper[i] * truth[i + 1]; }
            }
            let x = solve_tridiagonal(&lower, &diag, &upper, &rhs);
            for i in 0..n {
                prop_assert!((x[i] - truth[i]).abs() < 1e-12);
            }
        }
    }
}
