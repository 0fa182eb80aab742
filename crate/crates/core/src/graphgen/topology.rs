use serde::{Deserialize, Serialize};

use super::zeta::hurwitz_zeta;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopologyKind {
    #[serde(rename = "scale-free")]
    ScaleFree,
    #[serde(rename = "poisson")]
    Poisson,
}

impl TopologyKind {
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::ScaleFree => "scale-free",
            TopologyKind::Poisson => "poisson",
        }
    }
}

impl std::str::FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scale-free" => Ok(TopologyKind::ScaleFree),
            "poisson" => Ok(TopologyKind::Poisson),
            other => Err(Error::domain(format!(
                "unknown topology `{other}` (expected `scale-free` or `poisson`)"
            ))),
        }
    }
}

fn default_alpha() -> f64 {
    2.2
}

fn default_k_min() -> usize {
    2
}

fn default_lambda() -> f64 {
    9.36
}

/// Degree distribution of the substrate network.
///
/// `alpha` and `k_min` apply to scale-free graphs, `lambda` to Poisson
/// graphs; the unused pair is carried along untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub kind: TopologyKind,
    pub n: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

impl TopologyConfig {
    pub fn scale_free(n: usize, alpha: f64, k_min: usize) -> Self {
        TopologyConfig {
            kind: TopologyKind::ScaleFree,
            n,
            alpha,
            k_min,
            lambda: default_lambda(),
        }
    }

    pub fn poisson(n: usize, lambda: f64) -> Self {
        TopologyConfig {
            kind: TopologyKind::Poisson,
            n,
            alpha: default_alpha(),
            k_min: default_k_min(),
            lambda,
        }
    }

    /// Every violated constraint, in a stable order. Empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n < 1 {
            out.push(format!("topology.n must be >= 1, got {}", self.n));
        }
        match self.kind {
            TopologyKind::ScaleFree => {
                if !(self.alpha > 2.0) || !self.alpha.is_finite() {
                    out.push(format!(
                        "topology.alpha must be > 2 for a finite mean degree, got {}",
                        self.alpha
                    ));
                }
                if self.k_min < 1 {
                    out.push(format!("topology.k_min must be >= 1, got {}", self.k_min));
                }
            }
            TopologyKind::Poisson => {
                if !(self.lambda > 0.0) || !self.lambda.is_finite() {
                    out.push(format!(
                        "topology.lambda must be > 0, got {}",
                        self.lambda
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(v.join("; ")))
        }
    }

    /// Analytic mean degree: `ζ(α-1, k_min) / ζ(α, k_min)` or `λ`.
    pub fn mean_degree(&self) -> Result<f64> {
        self.validate()?;
        match self.kind {
            TopologyKind::ScaleFree => {
                let k = self.k_min as f64;
                Ok(hurwitz_zeta(self.alpha - 1.0, k)? / hurwitz_zeta(self.alpha, k)?)
            }
            TopologyKind::Poisson => Ok(self.lambda),
        }
    }

    /// Smallest degree counted as high: vertices with `k < ⟨k⟩` are low.
    pub fn low_high_split(&self) -> Result<usize> {
        Ok(self.mean_degree()?.ceil() as usize)
    }
}

/// Fractions of low-degree (`k < k_split`) and high-degree vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFractions {
    pub f_low: f64,
    pub f_high: f64,
}

/// `f_H = Σ_{k ≥ k_split} p_k` from the analytic degree distribution, with
/// `f_L = 1 - f_H`.
pub fn analytic_tail_fraction(config: &TopologyConfig, k_split: usize) -> Result<TailFractions> {
    config.validate()?;
    let f_high = match config.kind {
        TopologyKind::ScaleFree => {
            if k_split < config.k_min {
                return Err(Error::domain(format!(
                    "k_split {k_split} is below k_min {}",
                    config.k_min
                )));
            }
            if k_split == config.k_min {
                1.0
            } else {
                hurwitz_zeta(config.alpha, k_split as f64)?
                    / hurwitz_zeta(config.alpha, config.k_min as f64)?
            }
        }
        TopologyKind::Poisson => {
            let lambda = config.lambda;
            let mut log_p = -lambda;
            let mut below = 0.0;
            for k in 0..k_split {
                if k > 0 {
                    log_p += lambda.ln() - (k as f64).ln();
                }
                below += log_p.exp();
            }
            (1.0 - below).clamp(0.0, 1.0)
        }
    };
    Ok(TailFractions {
        f_low: 1.0 - f_high,
        f_high,
    })
}
