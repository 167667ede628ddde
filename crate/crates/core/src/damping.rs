//! Damping coefficients a ≥ 0 and the regions {a > 0} they control.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::geometry::{IsothermalChart, SurfaceProfile};

/// Slack used when deciding whether a latitude lies strictly inside a region.
pub const REGION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawDamping")]
pub enum DampingSpec {
    None,
    /// a = 1 on the upper hemi-surface ℓ > ℓ₀.
    IndicatorUpper,
    /// a = δ on ℓ₀ < ℓ < ℓ₀ + width.
    HalfNeighborhood {
        delta: f64,
        width: f64,
    },
    /// a = V^{power/2}, vanishing on the equator to order `power`.
    SmoothVanishing {
        power: f64,
    },
    /// a ≡ value.
    Constant {
        value: f64,
    },
    /// a = value on φ_lo < φ < φ_hi, ℓ > ℓ₀. Not rotationally symmetric.
    Sector {
        value: f64,
        phi_lo: f64,
        phi_hi: f64,
    },
}

/// Flat table form. Serde ignores extra keys on unit variants of an
/// internally tagged enum, so the field set is checked per kind here.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDamping {
    kind: String,
    delta: Option<f64>,
    width: Option<f64>,
    power: Option<f64>,
    value: Option<f64>,
    phi_lo: Option<f64>,
    phi_hi: Option<f64>,
}

impl TryFrom<RawDamping> for DampingSpec {
    type Error = String;

    fn try_from(r: RawDamping) -> Result<Self, String> {
        let given = [
            ("delta", r.delta),
            ("width", r.width),
            ("power", r.power),
            ("value", r.value),
            ("phi_lo", r.phi_lo),
            ("phi_hi", r.phi_hi),
        ];
        let allowed: &[&str] = match r.kind.as_str() {
            "none" | "indicator_upper" => &[],
            "half_neighborhood" => &["delta", "width"],
            "smooth_vanishing" => &["power"],
            "constant" => &["value"],
            "sector" => &["value", "phi_lo", "phi_hi"],
            other => return Err(format!("unknown damping kind `{other}`")),
        };
        for (name, v) in given {
            match (allowed.contains(&name), v) {
                (false, Some(_)) => {
                    return Err(format!("unknown field `{name}` for damping `{}`", r.kind))
                }
                (true, None) => {
                    return Err(format!("missing field `{name}` for damping `{}`", r.kind))
                }
                _ => {}
            }
        }
        let g = |v: Option<f64>| v.unwrap_or_default();
        Ok(match r.kind.as_str() {
            "none" => DampingSpec::None,
            "indicator_upper" => DampingSpec::IndicatorUpper,
            "half_neighborhood" => DampingSpec::HalfNeighborhood {
                delta: g(r.delta),
                width: g(r.width),
            },
            "smooth_vanishing" => DampingSpec::SmoothVanishing { power: g(r.power) },
            "constant" => DampingSpec::Constant { value: g(r.value) },
            _ => DampingSpec::Sector {
                value: g(r.value),
                phi_lo: g(r.phi_lo),
                phi_hi: g(r.phi_hi),
            },
        })
    }
}

impl DampingSpec {
    pub fn is_rotationally_symmetric(&self) -> bool {
        !matches!(self, DampingSpec::Sector { .. })
    }

    /// Whether (ℓ, φ) lies in {a > 0}.
    pub fn contains(&self, profile: &SurfaceProfile, ell: f64, phi: f64) -> bool {
        let ell0 = profile.ell0();
        match *self {
            DampingSpec::None => false,
            DampingSpec::IndicatorUpper => ell > ell0 + REGION_TOLERANCE,
            DampingSpec::HalfNeighborhood { delta, width } => {
                delta > 0.0
                    && ell > ell0 + REGION_TOLERANCE
                    && ell < ell0 + width - REGION_TOLERANCE
            }
            DampingSpec::SmoothVanishing { .. } => (ell - ell0).abs() > REGION_TOLERANCE,
            DampingSpec::Constant { value } => value > 0.0,
            DampingSpec::Sector {
                value,
                phi_lo,
                phi_hi,
            } => {
                let p = phi.rem_euclid(std::f64::consts::TAU);
                value > 0.0 && ell > ell0 + REGION_TOLERANCE && p > phi_lo && p < phi_hi
            }
        }
    }

    /// a at one node. `side` places the node above, on or below the
    /// equator; an equator node of an indicator is weighted ½.
    fn pointwise(&self, side: Ordering, ell: f64, ell0: f64, potential: f64) -> f64 {
        let indicator = match side {
            Ordering::Greater => 1.0,
            Ordering::Equal => 0.5,
            Ordering::Less => 0.0,
        };
        match *self {
            DampingSpec::None => 0.0,
            DampingSpec::IndicatorUpper => indicator,
            DampingSpec::HalfNeighborhood { delta, width } => {
                if ell < ell0 + width {
                    delta * indicator
                } else {
                    0.0
                }
            }
            DampingSpec::SmoothVanishing { power } => potential.max(0.0).powf(0.5 * power),
            DampingSpec::Constant { value } => value,
            DampingSpec::Sector { value, .. } => value * indicator,
        }
    }

    /// a at every chart node, φ-independent part only.
    pub fn chart_profile(&self, chart: &IsothermalChart) -> Vec<f64> {
        let m = chart.center();
        let ell0 = chart.profile().ell0();
        (0..chart.len())
            .map(|i| self.pointwise(i.cmp(&m), chart.f()[i], ell0, chart.potential()[i]))
            .collect()
    }

    /// a at the `n_theta + 1` uniform colatitude nodes. The equator is
    /// θ = π/2, which is a node when `n_theta` is even.
    pub fn polar_profile(&self, profile: &SurfaceProfile, n_theta: usize) -> Vec<f64> {
        let d = std::f64::consts::PI / n_theta as f64;
        let ell0 = profile.ell0();
        (0..=n_theta)
            .map(|i| {
                let theta = i as f64 * d;
                let side = (2 * i).cmp(&n_theta);
                let c = theta.cos();
                self.pointwise(side, profile.ell(theta), ell0, c * c)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_chart, validate_profile};

    #[test]
    fn indicator_weights_equator_node_by_half() {
        let p = validate_profile(&[0.1], 128).unwrap();
        let chart = build_chart(&p, 6.0, 513).unwrap();
        let a = DampingSpec::IndicatorUpper.chart_profile(&chart);
        let m = chart.center();
        assert_eq!(a[m], 0.5);
        assert_eq!(a[m + 1], 1.0);
        assert_eq!(a[m - 1], 0.0);
        assert!(!DampingSpec::IndicatorUpper.contains(&p, p.ell0(), 0.0));
        assert!(DampingSpec::IndicatorUpper.contains(&p, p.ell0() + 1e-6, 0.0));
    }

    #[test]
    fn half_neighborhood_maps_width_to_chart() {
        let p = validate_profile(&[], 128).unwrap();
        let chart = build_chart(&p, 6.0, 2049).unwrap();
        let a = DampingSpec::HalfNeighborhood {
            delta: 2.0,
            width: 0.3,
        }
        .chart_profile(&chart);
        // sphere: ℓ − π/2 = arcsin(tanh x), so the edge is at x = artanh(sin 0.3)
        let edge = 0.3f64.sin().atanh();
        for (i, x) in chart.x().iter().enumerate() {
            if *x > 0.0 && *x < edge - 1e-3 {
                assert_eq!(a[i], 2.0);
            }
            if *x > edge + 1e-3 || *x < 0.0 {
                assert_eq!(a[i], 0.0);
            }
        }
    }
}
