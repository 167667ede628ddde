//! Zoll profiles of revolution and the isothermal chart.
//!
//! A profile is given by an odd perturbation h(s) = Σ α_j sin(jπs) of the
//! round metric, (1 + h(cos θ))² dθ² + sin²θ dφ². The meridian arc length is
//! ℓ(θ) = θ + ∫₀^θ h(cos t) dt and the parallel radius is r = sin θ.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::quadrature::{Chebyshev, GaussLegendre};

pub const MIN_GRID_SIZE: usize = 64;
pub const MIN_CHART_POINTS: usize = 512;
pub const MIN_CHART_HALF_WIDTH: f64 = 5.0;
/// Largest RK4 substep used when tabulating the chart.
const CHART_MAX_STEP: f64 = 1e-3;
const LENGTH_TOLERANCE: f64 = 1e-10;

/// Evaluates h(s) = Σ α_j sin(jπs).
pub fn perturbation(coefficients: &[f64], s: f64) -> f64 {
    coefficients
        .iter()
        .enumerate()
        .map(|(j, a)| a * ((j + 1) as f64 * PI * s).sin())
        .sum()
}

/// Evaluates h'(s).
pub fn perturbation_derivative(coefficients: &[f64], s: f64) -> f64 {
    coefficients
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let w = (j + 1) as f64 * PI;
            a * w * (w * s).cos()
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct SurfaceProfile {
    coefficients: Vec<f64>,
    theta_grid: Vec<f64>,
    ell_of_theta: Vec<f64>,
    r_of_theta: Vec<f64>,
    ell0: f64,
    c: f64,
    c_v: f64,
    /// θ as a function of ℓ on [0, π].
    meridian: Chebyshev,
}

/// Builds a profile and all derived meridian data.
pub fn validate_profile(coefficients: &[f64], grid_size: usize) -> Result<SurfaceProfile> {
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::GridTooCoarse {
            got: grid_size,
            min: MIN_GRID_SIZE,
        });
    }
    if coefficients.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidArgument(
            "profile coefficients must be finite".into(),
        ));
    }
    let max_abs_h = max_abs_perturbation(coefficients);
    if max_abs_h >= 1.0 {
        return Err(Error::MetricViolation { max_abs_h });
    }

    let coefficients = coefficients.to_vec();
    let theta_grid: Vec<f64> = (0..grid_size)
        .map(|i| PI * i as f64 / (grid_size - 1) as f64)
        .collect();
    let rule = GaussLegendre::standard();
    let mut ell_of_theta = Vec::with_capacity(grid_size);
    let mut acc = 0.0;
    ell_of_theta.push(0.0);
    for w in theta_grid.windows(2) {
        acc += rule.integrate(w[0], w[1], |t| 1.0 + perturbation(&coefficients, t.cos()));
        ell_of_theta.push(acc);
    }
    let length = acc;
    if (length - PI).abs() > LENGTH_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "meridian length {length} differs from pi; the profile is under-resolved"
        )));
    }
    let r_of_theta = theta_grid.iter().map(|t| t.sin()).collect();

    let ell0 = ell_at(&coefficients, FRAC_PI_2);
    let meridian = fit_meridian(&coefficients);
    let mut profile = SurfaceProfile {
        coefficients,
        theta_grid,
        ell_of_theta,
        r_of_theta,
        ell0,
        c: 0.0,
        c_v: 0.0,
        meridian,
    };
    let c = profile.curvature_constant();
    profile.c = c;
    profile.c_v = 2.0 * c;
    Ok(profile)
}

/// (ℓ₀, c, cV) for a validated profile.
pub fn equator_data(profile: &SurfaceProfile) -> (f64, f64, f64) {
    (profile.ell0, profile.c, profile.c_v)
}

fn max_abs_perturbation(coefficients: &[f64]) -> f64 {
    if coefficients.is_empty() {
        return 0.0;
    }
    let samples = 4096 * coefficients.len().max(4);
    let abs_h = |s: f64| perturbation(coefficients, s).abs();
    let step = 2.0 / samples as f64;
    let mut best = (0.0, -1.0);
    for i in 0..=samples {
        let s = -1.0 + i as f64 * step;
        let v = abs_h(s);
        if v > best.0 {
            best = (v, s);
        }
    }
    // golden-section polish of the sampled maximum
    let (mut a, mut b) = ((best.1 - step).max(-1.0), (best.1 + step).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if abs_h(c) > abs_h(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.0.max(abs_h(0.5 * (a + b)))
}

/// ℓ(θ) by composite Gauss–Legendre.
fn ell_at(coefficients: &[f64], theta: f64) -> f64 {
    if coefficients.is_empty() {
        return theta;
    }
    let panels = 2 + coefficients.len();
    theta
        + GaussLegendre::standard()
            .integrate_composite(0.0, theta, panels, |t| perturbation(coefficients, t.cos()))
}

/// Newton inversion of ℓ(θ).
fn theta_at(coefficients: &[f64], ell: f64) -> f64 {
    let mut theta = ell.clamp(0.0, PI);
    for _ in 0..60 {
        let step =
            (ell_at(coefficients, theta) - ell) / (1.0 + perturbation(coefficients, theta.cos()));
        theta -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    theta
}

fn fit_meridian(coefficients: &[f64]) -> Chebyshev {
    let mut degree = 64 + 32 * coefficients.len();
    loop {
        let cheb = Chebyshev::fit(0.0, PI, degree, |l| theta_at(coefficients, l));
        if cheb.tail_magnitude() < 1e-14 || degree >= 4096 {
            return cheb;
        }
        degree *= 2;
    }
}

impl SurfaceProfile {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn grid_size(&self) -> usize {
        self.theta_grid.len()
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn ell_of_theta(&self) -> &[f64] {
        &self.ell_of_theta
    }

    pub fn r_of_theta(&self) -> &[f64] {
        &self.r_of_theta
    }

    pub fn ell0(&self) -> f64 {
        self.ell0
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c_v(&self) -> f64 {
        self.c_v
    }

    pub fn is_sphere(&self) -> bool {
        self.coefficients.iter().all(|a| *a == 0.0)
    }

    pub fn h(&self, s: f64) -> f64 {
        perturbation(&self.coefficients, s)
    }

    pub fn dh(&self, s: f64) -> f64 {
        perturbation_derivative(&self.coefficients, s)
    }

    /// Metric factor dℓ/dθ = 1 + h(cos θ).
    pub fn stretch(&self, theta: f64) -> f64 {
        1.0 + self.h(theta.cos())
    }

    /// ℓ(θ), integrated directly rather than read from the table.
    pub fn ell(&self, theta: f64) -> f64 {
        ell_at(&self.coefficients, theta)
    }

    /// Total meridian length ℓ(π).
    pub fn meridian_length(&self) -> f64 {
        *self.ell_of_theta.last().expect("grid is non-empty")
    }

    /// θ(ℓ) from the Chebyshev interpolant.
    pub fn theta(&self, ell: f64) -> f64 {
        self.meridian.eval(ell.clamp(0.0, PI)).clamp(0.0, PI)
    }

    /// θ(ℓ) by Newton iteration, slower but exact to rounding.
    pub fn theta_exact(&self, ell: f64) -> f64 {
        theta_at(&self.coefficients, ell)
    }

    pub fn r(&self, ell: f64) -> f64 {
        self.theta(ell).sin()
    }

    /// dr/dℓ = cos θ / (1 + h(cos θ)).
    pub fn dr(&self, ell: f64) -> f64 {
        let theta = self.theta(ell);
        theta.cos() / self.stretch(theta)
    }

    /// Both r and dr/dℓ from one interpolant evaluation.
    pub fn r_and_dr(&self, ell: f64) -> (f64, f64) {
        let theta = self.theta(ell);
        (theta.sin(), theta.cos() / self.stretch(theta))
    }

    /// −r''(ℓ₀)/2 from central differences with two Richardson levels.
    fn curvature_constant(&self) -> f64 {
        let second = |delta: f64| {
            let plus = theta_at(&self.coefficients, self.ell0 + delta).sin();
            let minus = theta_at(&self.coefficients, self.ell0 - delta).sin();
            (plus - 2.0 + minus) / (delta * delta)
        };
        let d = [second(0.1), second(0.05), second(0.025)];
        let r1 = [(4.0 * d[1] - d[0]) / 3.0, (4.0 * d[2] - d[1]) / 3.0];
        let r2 = (16.0 * r1[1] - r1[0]) / 15.0;
        -0.5 * r2
    }
}

/// Truncated isothermal chart: metric ρ(x)²(dx² + dφ²) on [−X, X].
#[derive(Debug, Clone)]
pub struct IsothermalChart {
    pub(crate) x: Vec<f64>,
    pub(crate) f: Vec<f64>,
    pub(crate) rho: Vec<f64>,
    pub(crate) potential: Vec<f64>,
    pub(crate) theta: Vec<f64>,
    pub(crate) dx: f64,
    pub(crate) half_width: f64,
    pub(crate) center: usize,
    pub(crate) profile: SurfaceProfile,
}

/// Tabulates f' = r(f), f(0) = ℓ₀, on a uniform grid.
///
/// `n_points` is rounded up to the next value of the form 4q + 1 so that
/// x = 0 is a node of both the grid and its every-other-node subgrid.
pub fn build_chart(
    profile: &SurfaceProfile,
    half_width: f64,
    n_points: usize,
) -> Result<IsothermalChart> {
    if !(half_width >= MIN_CHART_HALF_WIDTH) || !half_width.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "chart half-width {half_width} must be at least {MIN_CHART_HALF_WIDTH}"
        )));
    }
    if n_points < MIN_CHART_POINTS {
        return Err(Error::GridTooCoarse {
            got: n_points,
            min: MIN_CHART_POINTS,
        });
    }
    let n = (n_points - 1).div_ceil(4) * 4 + 1;
    let center = (n - 1) / 2;
    let dx = half_width / center as f64;
    let substeps = (dx / CHART_MAX_STEP).ceil().max(1.0) as usize;

    let mut theta = vec![0.0; n];
    let mut f = vec![0.0; n];
    theta[center] = FRAC_PI_2;
    f[center] = profile.ell0;
    for dir in [1i64, -1] {
        let h = dir as f64 * dx / substeps as f64;
        let mut state = [FRAC_PI_2, profile.ell0];
        let mut i = center as i64;
        for _ in 0..center {
            for _ in 0..substeps {
                state = rk4_chart_step(profile, state, h);
            }
            i += dir;
            let x = (i - center as i64) as f64 * dx;
            if !(state[0] > 0.0 && state[0] < PI) || !state[1].is_finite() {
                return Err(Error::IntegrationFailure { x });
            }
            theta[i as usize] = state[0];
            f[i as usize] = state[1];
        }
    }
    let x = (0..n).map(|i| (i as f64 - center as f64) * dx).collect();
    let rho: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
    let potential = rho.iter().map(|r| 1.0 - r * r).collect();
    Ok(IsothermalChart {
        x,
        f,
        rho,
        potential,
        theta,
        dx,
        half_width,
        center,
        profile: profile.clone(),
    })
}

fn rk4_chart_step(profile: &SurfaceProfile, y: [f64; 2], h: f64) -> [f64; 2] {
    let rhs = |y: [f64; 2]| {
        let s = y[0].sin();
        [s / profile.stretch(y[0]), s]
    };
    let k1 = rhs(y);
    let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

impl IsothermalChart {
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// V = 1 − ρ².
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Colatitude at each node.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Index of the node x = 0.
    pub fn center(&self) -> usize {
        self.center
    }

    pub fn c_v(&self) -> f64 {
        self.profile.c_v
    }

    pub fn profile(&self) -> &SurfaceProfile {
        &self.profile
    }

    /// Trapezoid ∫ρ² dx, equal to area / 2π up to truncation.
    pub fn weighted_area(&self) -> f64 {
        let n = self.rho.len();
        self.rho
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if i == 0 || i + 1 == n {
                    0.5 * r * r
                } else {
                    r * r
                }
            })
            .sum::<f64>()
            * self.dx
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,f,rho,V")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e}",
                self.x[i], self.f[i], self.rho[i], self.potential[i]
            )?;
        }
        Ok(())
    }
}
