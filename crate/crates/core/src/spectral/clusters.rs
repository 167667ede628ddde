//! Cluster assignment around the centers (n + 1/2)².

use std::io::{self, Write};

use rayon::prelude::*;

use super::{radial_solve, RadialEigenfunction};
use crate::error::{Error, Result};
use crate::geometry::IsothermalChart;

#[derive(Debug, Clone)]
pub struct SpectralCluster {
    pub n: usize,
    /// Semiclassical parameter (n + 1/2)⁻¹.
    pub h: f64,
    pub members: Vec<RadialEigenfunction>,
    /// max |λ² − (n + 1/2)²| over members, 0 for an empty cluster.
    pub a_observed: f64,
}

impl SpectralCluster {
    pub fn center(&self) -> f64 {
        cluster_center(self.n)
    }

    /// Number of eigenfunctions counting e^{±ikφ} separately.
    pub fn multiplicity(&self) -> usize {
        self.members
            .iter()
            .map(|m| if m.k == 0 { 1 } else { 2 })
            .sum()
    }

    pub fn admissible_set(&self, epsilon: f64) -> AdmissibleSet {
        AdmissibleSet::new(self.h, epsilon)
    }

    /// Members whose angular number lies in Z_n(ε).
    pub fn admissible_members(&self, epsilon: f64) -> impl Iterator<Item = &RadialEigenfunction> {
        let set = self.admissible_set(epsilon);
        self.members.iter().filter(move |m| set.contains(m.k))
    }
}

pub fn cluster_center(n: usize) -> f64 {
    let c = n as f64 + 0.5;
    c * c
}

/// Z_n(ε) = {k : |1 − h²k²| ≤ ε}.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleSet {
    pub epsilon: f64,
    pub h: f64,
    /// Admissible k in increasing order, both signs.
    pub k_set: Vec<i64>,
}

impl AdmissibleSet {
    pub fn new(h: f64, epsilon: f64) -> Self {
        let k_max = ((1.0 + epsilon).max(0.0).sqrt() / h).floor() as i64 + 1;
        let k_set = (-k_max..=k_max)
            .filter(|&k| admissible(h, epsilon, k))
            .collect();
        Self { epsilon, h, k_set }
    }

    pub fn contains(&self, k: i64) -> bool {
        admissible(self.h, self.epsilon, k)
    }
}

fn admissible(h: f64, epsilon: f64, k: i64) -> bool {
    let hk = h * k as f64;
    (1.0 - hk * hk).abs() <= epsilon
}

/// All clusters n ≤ n_max together with any eigenvalue found in the search
/// range but outside every window.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub a_config: f64,
    pub clusters: Vec<SpectralCluster>,
    pub uncontained: Vec<RadialEigenfunction>,
}

impl Spectrum {
    /// Assigns each eigenpair to its nearest center n ≤ n_max when it lies
    /// within `a_config` of it, and to `uncontained` otherwise.
    pub fn from_eigenpairs(
        eigenpairs: impl IntoIterator<Item = RadialEigenfunction>,
        n_max: usize,
        a_config: f64,
    ) -> Self {
        let mut clusters: Vec<SpectralCluster> = (0..=n_max)
            .map(|n| SpectralCluster {
                n,
                h: 1.0 / (n as f64 + 0.5),
                members: Vec::new(),
                a_observed: 0.0,
            })
            .collect();
        let mut uncontained = Vec::new();
        for eig in eigenpairs {
            let n = nearest_center(eig.lambda2);
            let deviation = (eig.lambda2 - cluster_center(n)).abs();
            if n <= n_max && deviation < a_config {
                let cluster = &mut clusters[n];
                cluster.a_observed = cluster.a_observed.max(deviation);
                cluster.members.push(eig);
            } else {
                log::warn!(
                    "eigenvalue {} (k = {}) lies outside every cluster window",
                    eig.lambda2,
                    eig.k
                );
                uncontained.push(eig);
            }
        }
        Spectrum {
            a_config,
            clusters,
            uncontained,
        }
    }

    pub fn max_a_observed(&self) -> f64 {
        self.clusters
            .iter()
            .map(|c| c.a_observed)
            .fold(0.0, f64::max)
    }

    pub fn members(&self) -> impl Iterator<Item = (&SpectralCluster, &RadialEigenfunction)> {
        self.clusters
            .iter()
            .flat_map(|c| c.members.iter().map(move |m| (c, m)))
    }
}

/// Solves every k over the union of the windows
/// ((n + 1/2)² − A, (n + 1/2)² + A), n ≤ n_max, then assigns each eigenvalue
/// to its nearest center.
pub fn assemble_spectrum(chart: &IsothermalChart, n_max: usize, a_config: f64) -> Result<Spectrum> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if !(a_config > 0.0) || !a_config.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "A_config = {a_config} must be positive"
        )));
    }
    if a_config > 1.0 {
        return Err(Error::ClusterOverlap { a_config });
    }
    let lo = cluster_center(0) - a_config;
    let hi = cluster_center(n_max) + a_config;
    let k_max = hi.sqrt().floor() as i64;
    let per_k: Vec<Vec<RadialEigenfunction>> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let k2 = (k * k) as f64;
            if k2 >= hi {
                return Ok(Vec::new());
            }
            let floor = if k == 0 { lo } else { lo.max(k2) };
            radial_solve(chart, k, (floor, hi))
        })
        .collect::<Result<_>>()?;

    Ok(Spectrum::from_eigenpairs(
        per_k.into_iter().flatten(),
        n_max,
        a_config,
    ))
}

/// Index n minimizing |λ² − (n + 1/2)²|.
pub fn nearest_center(lambda2: f64) -> usize {
    let guess = (lambda2.max(0.0).sqrt() - 0.5).floor().max(0.0) as usize;
    let d = |n: usize| (lambda2 - cluster_center(n)).abs();
    if d(guess + 1) < d(guess) {
        guess + 1
    } else {
        guess
    }
}

/// The scalar by which K = Δ + L acts on a cluster member: (n + 1/2)² − λ².
pub fn apply_k(clusters: &[SpectralCluster], member: &RadialEigenfunction) -> Result<f64> {
    clusters
        .iter()
        .find(|c| {
            c.members.iter().any(|m| {
                m.k.abs() == member.k.abs()
                    && (m.lambda2 - member.lambda2).abs() <= 1e-12 * member.lambda2.abs().max(1.0)
            })
        })
        .map(|c| c.center() - member.lambda2)
        .ok_or(Error::Orphan {
            k: member.k,
            lambda2: member.lambda2,
        })
}

/// CSV rows n,k,lambda2,center,deviation,residual, deviation being the
/// action of K. Uncontained eigenvalues are listed as comments.
pub fn write_spectrum_csv<W: Write>(spectrum: &Spectrum, mut out: W) -> io::Result<()> {
    writeln!(out, "n,k,lambda2,center,deviation,residual")?;
    for (cluster, m) in spectrum.members() {
        let center = cluster.center();
        writeln!(
            out,
            "{},{},{:.12},{:.12},{:.12},{:.3e}",
            cluster.n,
            m.k,
            m.lambda2,
            center,
            center - m.lambda2,
            m.residual
        )?;
    }
    for m in &spectrum.uncontained {
        writeln!(out, "# uncontained k={} lambda2={:.12}", m.k, m.lambda2)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::RadialCoordinate;
    use proptest::prelude::*;

    fn synthetic(k: i64, lambda2: f64) -> RadialEigenfunction {
        RadialEigenfunction {
            k,
            lambda2,
            coordinate: RadialCoordinate::Isothermal,
            spacing: 1.0,
            w: vec![],
            dw: vec![],
            norm_rho: 1.0,
            residual: 0.0,
        }
    }

    #[test]
    fn center_exact_member_has_zero_k_action() {
        let member = synthetic(3, cluster_center(4));
        let clusters = vec![SpectralCluster {
            n: 4,
            h: 1.0 / 4.5,
            members: vec![member.clone()],
            a_observed: 0.0,
        }];
        assert_eq!(apply_k(&clusters, &member).unwrap(), 0.0);
        assert!(matches!(
            apply_k(&clusters, &synthetic(2, 7.0)),
            Err(Error::Orphan { .. })
        ));
    }

    #[test]
    fn admissible_set_at_zero_epsilon_is_empty() {
        for n in 1..40 {
            let set = AdmissibleSet::new(1.0 / (n as f64 + 0.5), 0.0);
            assert!(set.k_set.is_empty());
        }
        let set = AdmissibleSet::new(1.0 / 20.5, 0.2);
        assert!(set.contains(20) && set.contains(-19) && !set.contains(5));
    }

    proptest! {
        #[test]
        fn nearest_center_is_nearest(lambda2 in 0.0f64..5000.0) {
            let n = nearest_center(lambda2);
            let d = (lambda2 - cluster_center(n)).abs();
            for m in 0..80 {
                prop_assert!(d <= (lambda2 - cluster_center(m)).abs() + 1e-9);
            }
        }

        #[test]
        fn admissible_set_is_symmetric(n in 1usize..60, eps in 0.0f64..1.0) {
            let set = AdmissibleSet::new(1.0 / (n as f64 + 0.5), eps);
            for k in &set.k_set {
                prop_assert!(set.k_set.contains(&-k));
            }
        }
    }
}
