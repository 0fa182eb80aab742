//! Survivability statistics over per-vertex outcomes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    NoMoney,
    NoOffer,
    /// Still alive when the step cap was reached.
    Censored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub vertex: VertexId,
    /// Degree in the original graph, self-loops counted twice.
    pub degree: usize,
    /// Step at which the vertex died (1-based), or the cap if censored.
    pub lifetime: u64,
    pub cause: Outcome,
    /// Successful purchases over the vertex's lifetime.
    pub saves: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalSummary {
    pub avg_vertex_time: f64,
    pub t_max: u64,
    pub censored: usize,
}

/// Mean and maximum lifetime of one realization.
pub fn survival_summary(records: &[SurvivalRecord]) -> Result<SurvivalSummary> {
    if records.is_empty() {
        return Err(Error::domain("survival summary of an empty record set"));
    }
    let total: u64 = records.iter().map(|r| r.lifetime).sum();
    Ok(SurvivalSummary {
        avg_vertex_time: total as f64 / records.len() as f64,
        t_max: records.iter().map(|r| r.lifetime).max().unwrap_or(0),
        censored: records.iter().filter(|r| r.cause == Outcome::Censored).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub n_k: u64,
    pub mean_lifetime: f64,
    /// Fraction of degree-k vertices that died for lack of money.
    pub mu_k: f64,
    pub mean_saves: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct DegreeSums {
    count: u64,
    lifetime: u64,
    no_money: u64,
    saves: u64,
}

/// Running per-degree sums. Merging accumulators from separate
/// realizations pools their records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DegreeAccumulator {
    sums: BTreeMap<usize, DegreeSums>,
}

impl DegreeAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, record: &SurvivalRecord) {
        let s = self.sums.entry(record.degree).or_default();
        s.count += 1;
        s.lifetime += record.lifetime;
        s.no_money += u64::from(record.cause == Outcome::NoMoney);
        s.saves += record.saves;
    }

    pub fn extend<'a>(&mut self, records: impl IntoIterator<Item = &'a SurvivalRecord>) {
        for r in records {
            self.add(r);
        }
    }

    pub fn merge(&mut self, other: &DegreeAccumulator) {
        for (&k, o) in &other.sums {
            let s = self.sums.entry(k).or_default();
            s.count += o.count;
            s.lifetime += o.lifetime;
            s.no_money += o.no_money;
            s.saves += o.saves;
        }
    }

    pub fn profile(&self) -> DegreeProfile {
        let by_degree = self
            .sums
            .iter()
            .map(|(&k, s)| {
                let n = s.count as f64;
                (
                    k,
                    DegreeStats {
                        n_k: s.count,
                        mean_lifetime: s.lifetime as f64 / n,
                        mu_k: s.no_money as f64 / n,
                        mean_saves: s.saves as f64 / n,
                    },
                )
            })
            .collect();
        DegreeProfile { by_degree }
    }
}

/// Per-degree means `⟨T_v(k)⟩`, `⟨μ(k)⟩` and `⟨s(k)⟩`. Degrees that do not
/// occur are absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DegreeProfile {
    pub by_degree: BTreeMap<usize, DegreeStats>,
}

impl DegreeProfile {
    pub fn total_count(&self) -> u64 {
        self.by_degree.values().map(|s| s.n_k).sum()
    }

    /// `n_k`-weighted mean of a per-degree statistic over `k` in `range`,
    /// or `None` if no vertex falls in it.
    pub fn pooled_over(
        &self,
        range: impl std::ops::RangeBounds<usize>,
        stat: impl Fn(&DegreeStats) -> f64,
    ) -> Option<f64> {
        let (mut weight, mut acc) = (0u64, 0.0);
        for s in self.by_degree.range(range).map(|(_, s)| s) {
            weight += s.n_k;
            acc += s.n_k as f64 * stat(s);
        }
        (weight > 0).then(|| acc / weight as f64)
    }
}

pub fn degree_profile(records: &[SurvivalRecord]) -> DegreeProfile {
    let mut acc = DegreeAccumulator::new();
    acc.extend(records);
    acc.profile()
}

/// Low/high-degree split of the mean lifetime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowHighSplit {
    pub f_low: f64,
    pub f_high: f64,
    pub t_low: Option<f64>,
    pub t_high: Option<f64>,
    /// `f_L·T_low + f_H·T_high` over the non-empty sides.
    pub reconstruction: f64,
}

/// Splits the profile at `k_split`: degrees `< k_split` are low.
pub fn low_high_decomposition(profile: &DegreeProfile, k_split: usize) -> Result<LowHighSplit> {
    let n = profile.total_count();
    if n == 0 {
        return Err(Error::domain("low/high decomposition of an empty profile"));
    }
    let low_n: u64 = profile.by_degree.range(..k_split).map(|(_, s)| s.n_k).sum();
    let f_low = low_n as f64 / n as f64;
    let f_high = 1.0 - f_low;
    let t_low = profile.pooled_over(..k_split, |s| s.mean_lifetime);
    let t_high = profile.pooled_over(k_split.., |s| s.mean_lifetime);
    let reconstruction =
        t_low.map_or(0.0, |t| f_low * t) + t_high.map_or(0.0, |t| f_high * t);
    Ok(LowHighSplit {
        f_low,
        f_high,
        t_low,
        t_high,
        reconstruction,
    })
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
