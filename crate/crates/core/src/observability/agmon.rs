//! Lithner–Agmon envelopes in the isothermal chart.

use super::{member_energy, sample_on_chart};
use crate::error::{Error, Result};
use crate::geometry::IsothermalChart;
use crate::spectral::RadialEigenfunction;

#[derive(Debug, Clone)]
pub struct AgmonEnvelope {
    pub epsilon_a: f64,
    pub energy: f64,
    /// Φ^ε(x) = (1 − ε)|∫₀ˣ (V − E)₊^{1/2}| at the chart nodes.
    pub phase: Vec<f64>,
}

/// Φ^ε by the trapezoid rule outward from x = 0.
pub fn agmon_envelope(chart: &IsothermalChart, energy: f64, epsilon_a: f64) -> AgmonEnvelope {
    let n = chart.len();
    let m = chart.center;
    let root = |i: usize| (chart.potential[i] - energy).max(0.0).sqrt();
    let mut phase = vec![0.0; n];
    for i in m + 1..n {
        phase[i] = phase[i - 1] + 0.5 * chart.dx * (root(i - 1) + root(i));
    }
    for i in (0..m).rev() {
        phase[i] = phase[i + 1] + 0.5 * chart.dx * (root(i + 1) + root(i));
    }
    phase.iter_mut().for_each(|p| *p *= 1.0 - epsilon_a);
    AgmonEnvelope {
        epsilon_a,
        energy,
        phase,
    }
}

/// sup_x [log|w| + Φ^ε/h] − sup over {V ≤ E} of log|w|, with h and E taken
/// from the member's nearest cluster.
pub fn agmon_check(
    w: &RadialEigenfunction,
    chart: &IsothermalChart,
    epsilon_a: f64,
) -> Result<f64> {
    if !(epsilon_a > 0.0 && epsilon_a < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "epsilon_a = {epsilon_a} must lie in (0, 0.5)"
        )));
    }
    let (_, h, energy) = member_energy(w);
    let env = agmon_envelope(chart, energy, epsilon_a);
    let samples = sample_on_chart(w, chart);
    let log_abs = |v: f64| {
        if v == 0.0 {
            f64::NEG_INFINITY
        } else {
            v.abs().ln()
        }
    };
    let mut envelope_sup = f64::NEG_INFINITY;
    let mut allowed_sup = f64::NEG_INFINITY;
    for (i, v) in samples.iter().enumerate() {
        let l = log_abs(*v);
        envelope_sup = envelope_sup.max(l + env.phase[i] / h);
        // the equator node always belongs to the reference set, so that a
        // negative energy still has one
        if chart.potential[i] <= energy.max(0.0) {
            allowed_sup = allowed_sup.max(l);
        }
    }
    Ok(envelope_sup - allowed_sup)
}
