use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::zeta::hurwitz_zeta;
use crate::{Error, Result, SimRng};

/// Largest degree the power-law sampler can emit. Mass above it is folded
/// onto the cap.
pub const POWER_LAW_CAP: usize = 10_000_000;

/// Degrees below `k_min + TABLE_LEN` are resolved with a precomputed CDF
/// table; rarer draws fall through to a zeta-based bisection.
const TABLE_LEN: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeSequence(Vec<usize>);

impl DegreeSequence {
    pub fn new(degrees: Vec<usize>) -> Self {
        DegreeSequence(degrees)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().map(|&k| k as u64).sum()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl From<Vec<usize>> for DegreeSequence {
    fn from(v: Vec<usize>) -> Self {
        DegreeSequence(v)
    }
}

/// Draws `n` values and, if their sum is odd, redraws the last one until it
/// is even.
fn draw_even_sum(n: usize, mut draw: impl FnMut() -> usize) -> DegreeSequence {
    let mut degrees: Vec<usize> = (0..n).map(|_| draw()).collect();
    let mut sum: u64 = degrees.iter().map(|&k| k as u64).sum();
    while sum % 2 == 1 {
        let last = degrees.last_mut().expect("n >= 1");
        sum -= *last as u64;
        *last = draw();
        sum += *last as u64;
    }
    DegreeSequence(degrees)
}

/// Inverse-CDF sampler for `p_k = k^(-α) / ζ(α, k_min)`, `k ≥ k_min`.
///
/// Building the table costs a few milliseconds; reuse one sampler for many
/// sequences with the same parameters.
#[derive(Debug, Clone)]
pub struct PowerLawSampler {
    alpha: f64,
    k_min: usize,
    norm: f64,
    cdf: Vec<f64>,
}

impl PowerLawSampler {
    pub fn new(alpha: f64, k_min: usize) -> Result<Self> {
        if !(alpha > 2.0) || !alpha.is_finite() {
            return Err(Error::domain(format!(
                "power-law sampler requires alpha > 2, got {alpha}"
            )));
        }
        if k_min < 1 {
            return Err(Error::domain("power-law sampler requires k_min >= 1"));
        }
        let norm = hurwitz_zeta(alpha, k_min as f64)?;
        let len = TABLE_LEN.min(POWER_LAW_CAP - k_min + 1);
        let mut acc = 0.0;
        let cdf = (0..len)
            .map(|i| {
                acc += ((k_min + i) as f64).powf(-alpha) / norm;
                acc
            })
            .collect();
        Ok(PowerLawSampler {
            alpha,
            k_min,
            norm,
            cdf,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }

    /// `P(K ≥ k)` for `k ≥ k_min`.
    fn survival(&self, k: usize) -> f64 {
        hurwitz_zeta(self.alpha, k as f64).expect("validated parameters") / self.norm
    }

    pub fn sample(&self, rng: &mut SimRng) -> usize {
        let u: f64 = rng.random();
        let table_end = *self.cdf.last().expect("non-empty table");
        if u < table_end {
            return self.k_min + self.cdf.partition_point(|&c| c <= u);
        }
        // Smallest k with P(K ≤ k) > u, i.e. P(K ≥ k + 1) < 1 - u.
        let target = 1.0 - u;
        let mut lo = self.k_min + self.cdf.len();
        let mut hi = POWER_LAW_CAP;
        if self.survival(hi) >= target {
            return POWER_LAW_CAP;
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.survival(mid + 1) < target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// `n` i.i.d. draws with the parity fix-up applied.
    pub fn sample_sequence(&self, n: usize, rng: &mut SimRng) -> Result<DegreeSequence> {
        if n < 1 {
            return Err(Error::domain("degree sequence needs n >= 1"));
        }
        Ok(draw_even_sum(n, || self.sample(rng)))
    }
}

pub fn sample_powerlaw_degrees(
    n: usize,
    alpha: f64,
    k_min: usize,
    rng: &mut SimRng,
) -> Result<DegreeSequence> {
    PowerLawSampler::new(alpha, k_min)?.sample_sequence(n, rng)
}

pub fn sample_poisson_degrees(n: usize, lambda: f64, rng: &mut SimRng) -> Result<DegreeSequence> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "poisson degrees require lambda > 0, got {lambda}"
        )));
    }
    if n < 1 {
        return Err(Error::domain("degree sequence needs n >= 1"));
    }
    let dist = Poisson::new(lambda).map_err(|e| Error::domain(e.to_string()))?;
    Ok(draw_even_sum(n, || {
        let k: f64 = dist.sample(rng);
        k as usize
    }))
}
