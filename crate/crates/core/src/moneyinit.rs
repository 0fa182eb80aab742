//! Initial money allocation at a fixed total budget `n·M`.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MoneyAllocation {
    pub balances: Vec<f64>,
    /// Mean money per vertex.
    pub mean: f64,
    /// Heterogeneity exponent: money on a vertex is proportional to `k^θ`.
    pub theta: f64,
}

impl MoneyAllocation {
    pub fn total(&self) -> f64 {
        self.balances.iter().sum()
    }
}

/// Weight `k^θ` with the isolated-vertex conventions: `θ = 0` gives 1,
/// `θ > 0` gives 0 and `θ < 0` treats the vertex as degree one.
fn weight(k: usize, theta: f64) -> f64 {
    if theta == 0.0 {
        1.0
    } else if k == 0 {
        if theta > 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        (k as f64).powf(theta)
    }
}

/// `M_i(0) = k_i^θ · n·M / Σ_j k_j^θ`.
pub fn allocate_money(degrees: &[usize], mean: f64, theta: f64) -> Result<MoneyAllocation> {
    if degrees.is_empty() {
        return Err(Error::domain("money allocation needs at least one vertex"));
    }
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::domain(format!("money M must be finite and >= 0, got {mean}")));
    }
    if !theta.is_finite() {
        return Err(Error::domain(format!("theta must be finite, got {theta}")));
    }
    let weights: Vec<f64> = degrees.iter().map(|&k| weight(k, theta)).collect();
    let total_weight: f64 = weights.iter().sum();
    if !(total_weight > 0.0) || !total_weight.is_finite() {
        return Err(Error::domain(format!(
            "sum of k^theta is {total_weight}; cannot normalize"
        )));
    }
    let budget = degrees.len() as f64 * mean;
    let balances = weights.iter().map(|w| w * budget / total_weight).collect();
    Ok(MoneyAllocation {
        balances,
        mean,
        theta,
    })
}
