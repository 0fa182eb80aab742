//! The request-offer step engine.
//!
//! One step runs five phases in order: production, classification with the
//! money gate, request delivery, strategy-ordered offers with surplus
//! reservation, and acceptance. Deaths take effect at the end of the step;
//! every phase sees the set of vertices alive when the step began.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::graphgen::Multigraph;
use crate::metrics::{Outcome, SurvivalRecord};
use crate::moneyinit::MoneyAllocation;
use crate::strategies::{EligibleRequest, OfferStrategy};
use crate::{Error, Result, SimRng, VertexId};

/// Default step cap for a single run.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeathCause {
    /// In deficit without enough money to pay for it.
    NoMoney,
    /// Requested but received no offer.
    NoOffer,
}

/// What an offerer does when the next request no longer fits its
/// unreserved surplus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OfferScan {
    /// Skip it and keep scanning the ordering.
    #[default]
    Skip,
    /// Stop sending offers.
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Survival threshold `R`, identical for every vertex.
    pub threshold: f64,
    /// Production capacity `β` (mean of the exponential production).
    pub capacity: f64,
    pub offer_scan: OfferScan,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            threshold: 1.0,
            capacity: 2.0,
            offer_scan: OfferScan::Skip,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexState {
    pub alive: bool,
    pub money: f64,
    pub threshold: f64,
    pub capacity: f64,
    pub saves: u64,
    pub death_time: Option<u64>,
    pub death_cause: Option<DeathCause>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestRecord {
    pub amount: f64,
    pub recipients: Vec<VertexId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offer {
    pub offerer: VertexId,
    pub requester: VertexId,
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceptance {
    pub requester: VertexId,
    pub offerer: VertexId,
    pub amount: f64,
}

/// Everything that happened in one step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepLog {
    pub t: u64,
    pub productions: BTreeMap<VertexId, f64>,
    pub requests: BTreeMap<VertexId, RequestRecord>,
    pub offers: Vec<Offer>,
    pub acceptances: Vec<Acceptance>,
    pub deaths: Vec<(VertexId, DeathCause)>,
}

/// Per-step counters, also the line format of the trace output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub t: u64,
    /// Vertices alive after the step.
    pub alive: usize,
    pub deaths_no_money: usize,
    pub deaths_no_offer: usize,
    pub transactions: usize,
}

/// A draw from the exponential distribution with mean `capacity`.
pub fn sample_production(capacity: f64, rng: &mut SimRng) -> Result<f64> {
    if !(capacity > 0.0) || !capacity.is_finite() {
        return Err(Error::domain(format!(
            "production capacity must be > 0, got {capacity}"
        )));
    }
    let e: f64 = Exp1.sample(rng);
    Ok(capacity * e)
}

/// State of one simulation run over a shared, read-only graph.
#[derive(Debug)]
pub struct SimState<'g> {
    graph: &'g Multigraph,
    vertices: Vec<VertexState>,
    t: u64,
    rng: SimRng,
    strategy: Box<dyn OfferStrategy>,
    offer_scan: OfferScan,
    // Scratch buffers reused across steps.
    alive: Vec<VertexId>,
    produced: Vec<f64>,
    deficit: Vec<f64>,
    inbox: Vec<Vec<EligibleRequest>>,
    offers_to: Vec<Vec<VertexId>>,
}

impl<'g> SimState<'g> {
    pub fn new(
        graph: &'g Multigraph,
        allocation: &MoneyAllocation,
        params: &ModelParams,
        strategy: Box<dyn OfferStrategy>,
        rng: SimRng,
    ) -> Result<Self> {
        let n = graph.vertex_count();
        if allocation.balances.len() != n {
            return Err(Error::domain(format!(
                "money allocation has {} balances for {n} vertices",
                allocation.balances.len()
            )));
        }
        if !(params.capacity > 0.0) || !params.capacity.is_finite() {
            return Err(Error::domain(format!(
                "production capacity must be > 0, got {}",
                params.capacity
            )));
        }
        if !params.threshold.is_finite() {
            return Err(Error::domain("threshold must be finite"));
        }
        let vertices = allocation
            .balances
            .iter()
            .map(|&money| VertexState {
                alive: true,
                money,
                threshold: params.threshold,
                capacity: params.capacity,
                saves: 0,
                death_time: None,
                death_cause: None,
            })
            .collect();
        Ok(SimState {
            graph,
            vertices,
            t: 1,
            rng,
            strategy,
            offer_scan: params.offer_scan,
            alive: (0..n).collect(),
            produced: vec![0.0; n],
            deficit: vec![0.0; n],
            inbox: vec![Vec::new(); n],
            offers_to: vec![Vec::new(); n],
        })
    }

    /// Convenience constructor seeding the generator from a 64-bit seed.
    pub fn with_seed(
        graph: &'g Multigraph,
        allocation: &MoneyAllocation,
        params: &ModelParams,
        strategy: Box<dyn OfferStrategy>,
        seed: u64,
    ) -> Result<Self> {
        Self::new(graph, allocation, params, strategy, SimRng::seed_from_u64(seed))
    }

    pub fn graph(&self) -> &'g Multigraph {
        self.graph
    }

    pub fn vertices(&self) -> &[VertexState] {
        &self.vertices
    }

    /// Index of the next step to run, starting at 1.
    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn alive_count(&self) -> usize {
        self.alive.len()
    }

    pub fn total_money(&self) -> f64 {
        self.vertices.iter().map(|v| v.money).sum()
    }

    /// Runs one step and returns the full event log.
    ///
    /// `production_override`, when given, holds `X_i(t)` for every vertex
    /// (indexed by id; entries for dead vertices are ignored) in place of the
    /// exponential draws.
    pub fn run_time_step(&mut self, production_override: Option<&[f64]>) -> StepLog {
        let mut log = StepLog {
            t: self.t,
            ..StepLog::default()
        };
        self.step(production_override, Some(&mut log));
        log
    }

    /// Runs one step, keeping only the counters.
    pub fn advance(&mut self, production_override: Option<&[f64]>) -> StepSummary {
        self.step(production_override, None)
    }

    fn step(&mut self, production_override: Option<&[f64]>, mut log: Option<&mut StepLog>) -> StepSummary {
        assert!(!self.alive.is_empty(), "step requires at least one alive vertex");
        if let Some(o) = production_override {
            assert_eq!(o.len(), self.vertices.len(), "override must cover every vertex");
        }
        let t = self.t;
        let graph = self.graph;
        let mut summary = StepSummary {
            t,
            ..StepSummary::default()
        };

        for &v in &self.alive {
            let x = match production_override {
                Some(o) => o[v],
                None => {
                    let e: f64 = Exp1.sample(&mut self.rng);
                    self.vertices[v].capacity * e
                }
            };
            self.produced[v] = x;
        }
        if let Some(log) = log.as_deref_mut() {
            log.productions = self.alive.iter().map(|&v| (v, self.produced[v])).collect();
        }

        let mut deaths: Vec<(VertexId, DeathCause)> = Vec::new();
        let mut requesters: Vec<VertexId> = Vec::new();
        for &v in &self.alive {
            let state = &self.vertices[v];
            let x = self.produced[v];
            if x < state.threshold {
                let need = state.threshold - x;
                if state.money < need {
                    deaths.push((v, DeathCause::NoMoney));
                } else {
                    self.deficit[v] = need;
                    requesters.push(v);
                }
            }
        }
        summary.deaths_no_money = deaths.len();

        let vertices = &self.vertices;
        for &r in &requesters {
            let nbrs = graph.neighbours(r);
            let alive_degree = nbrs.iter().filter(|nb| vertices[nb.vertex].alive).count() as u32;
            let amount = self.deficit[r];
            let mut recipients = Vec::new();
            for nb in nbrs.iter().filter(|nb| vertices[nb.vertex].alive) {
                let j = nb.vertex;
                if log.is_some() {
                    recipients.push(j);
                }
                let surplus = self.produced[j] - vertices[j].threshold;
                if surplus > 0.0 && amount <= surplus {
                    self.inbox[j].push(EligibleRequest {
                        requester: r,
                        amount,
                        alive_degree,
                        multiplicity: nb.multiplicity,
                    });
                }
            }
            if let Some(log) = log.as_deref_mut() {
                log.requests.insert(r, RequestRecord { amount, recipients });
            }
        }

        for &j in &self.alive {
            if self.inbox[j].is_empty() {
                continue;
            }
            let mut pending = std::mem::take(&mut self.inbox[j]);
            self.strategy.order(&mut pending, &mut self.rng);
            let surplus = self.produced[j] - self.vertices[j].threshold;
            let mut reserved = 0.0;
            for req in pending.drain(..) {
                if reserved + req.amount <= surplus {
                    reserved += req.amount;
                    self.offers_to[req.requester].push(j);
                    if let Some(log) = log.as_deref_mut() {
                        log.offers.push(Offer {
                            offerer: j,
                            requester: req.requester,
                            amount: req.amount,
                        });
                    }
                } else if self.offer_scan == OfferScan::Stop {
                    break;
                }
            }
            pending.clear();
            self.inbox[j] = pending;
        }

        for &r in &requesters {
            let offerers = &self.offers_to[r];
            if offerers.is_empty() {
                deaths.push((r, DeathCause::NoOffer));
                continue;
            }
            let chosen = offerers[self.rng.random_range(0..offerers.len())];
            let amount = self.deficit[r];
            self.vertices[r].money -= amount;
            self.vertices[chosen].money += amount;
            self.vertices[r].saves += 1;
            summary.transactions += 1;
            if let Some(log) = log.as_deref_mut() {
                log.acceptances.push(Acceptance {
                    requester: r,
                    offerer: chosen,
                    amount,
                });
            }
            self.offers_to[r].clear();
        }
        summary.deaths_no_offer = deaths.len() - summary.deaths_no_money;

        for &(v, cause) in &deaths {
            let state = &mut self.vertices[v];
            state.alive = false;
            state.death_time = Some(t);
            state.death_cause = Some(cause);
        }
        if !deaths.is_empty() {
            let vertices = &self.vertices;
            self.alive.retain(|&v| vertices[v].alive);
        }
        if let Some(log) = log {
            log.deaths = deaths;
        }

        summary.alive = self.alive.len();
        self.t += 1;
        summary
    }

    /// Steps until every vertex is dead or `max_steps` steps have run,
    /// calling `observe` after each step.
    pub fn run_until_extinct(&mut self, max_steps: u64, mut observe: impl FnMut(&Self, &StepSummary)) {
        while !self.alive.is_empty() && self.t <= max_steps {
            let summary = self.advance(None);
            observe(self, &summary);
        }
    }

    /// One record per vertex. Vertices still alive are censored at
    /// `max_steps`.
    pub fn survival_records(&self, max_steps: u64) -> Vec<SurvivalRecord> {
        self.vertices
            .iter()
            .enumerate()
            .map(|(v, s)| {
                let (lifetime, cause) = match (s.death_time, s.death_cause) {
                    (Some(t), Some(DeathCause::NoMoney)) => (t, Outcome::NoMoney),
                    (Some(t), Some(DeathCause::NoOffer)) => (t, Outcome::NoOffer),
                    _ => (max_steps, Outcome::Censored),
                };
                SurvivalRecord {
                    vertex: v,
                    degree: self.graph.degree(v),
                    lifetime,
                    cause,
                    saves: s.saves,
                }
            })
            .collect()
    }
}

/// Runs one realization to extinction (or the step cap) and returns the
/// per-vertex outcomes.
pub fn run_simulation(
    graph: &Multigraph,
    allocation: &MoneyAllocation,
    params: &ModelParams,
    strategy: Box<dyn OfferStrategy>,
    max_steps: u64,
    rng: SimRng,
) -> Result<Vec<SurvivalRecord>> {
    if max_steps < 1 {
        return Err(Error::domain("max_steps must be >= 1"));
    }
    let mut state = SimState::new(graph, allocation, params, strategy, rng)?;
    state.run_until_extinct(max_steps, |_, _| {});
    Ok(state.survival_records(max_steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgen::Edge;
    use crate::moneyinit::allocate_money;
    use crate::strategies::{HighToLow, RandomOrder};

    fn pair() -> Multigraph {
        Multigraph::from_edges(2, [Edge { u: 0, v: 1, multiplicity: 1 }]).unwrap()
    }

    fn homogeneous(n: usize, m: f64) -> MoneyAllocation {
        allocate_money(&vec![1; n], m, 0.0).unwrap()
    }

    #[test]
    fn production_mean_and_cdf() {
        let mut rng = SimRng::seed_from_u64(0);
        let draws: Vec<f64> = (0..1_000_000).map(|_| sample_production(2.0, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 2.0).abs() < 0.01, "{mean}");
        let below = draws.iter().filter(|&&x| x < 1.0).count() as f64 / draws.len() as f64;
        assert!((below - (1.0 - (-0.5f64).exp())).abs() < 0.005, "{below}");
        assert!(draws.iter().all(|&x| x >= 0.0));
        assert!(sample_production(1e-300, &mut rng).unwrap() < 1e-250);
        assert!(sample_production(0.0, &mut rng).is_err());
    }

    #[test]
    fn isolated_surplus_vertex_survives() {
        let g = Multigraph::from_edges(1, []).unwrap();
        let mut s = SimState::with_seed(&g, &homogeneous(1, 1.0), &ModelParams::default(), Box::new(RandomOrder), 0).unwrap();
        let log = s.run_time_step(Some(&[1.5]));
        assert!(log.requests.is_empty() && log.offers.is_empty() && log.deaths.is_empty());
        assert!(s.vertices()[0].alive);
    }

    #[test]
    fn broke_vertex_dies_without_requesting() {
        let g = pair();
        let alloc = MoneyAllocation { balances: vec![0.1, 1.0], mean: 0.55, theta: 0.0 };
        let mut s = SimState::with_seed(&g, &alloc, &ModelParams::default(), Box::new(RandomOrder), 0).unwrap();
        let log = s.run_time_step(Some(&[0.5, 3.0]));
        assert_eq!(log.deaths, vec![(0, DeathCause::NoMoney)]);
        assert!(log.requests.is_empty());
        assert_eq!(s.vertices()[0].death_time, Some(1));
    }

    #[test]
    fn two_vertex_purchase() {
        let g = pair();
        let mut s = SimState::with_seed(&g, &homogeneous(2, 1.0), &ModelParams::default(), Box::new(RandomOrder), 0).unwrap();
        let log = s.run_time_step(Some(&[0.2, 3.0]));
        assert_eq!(log.offers, vec![Offer { offerer: 1, requester: 0, amount: 0.8 }]);
        assert_eq!(log.acceptances, vec![Acceptance { requester: 0, offerer: 1, amount: 0.8 }]);
        assert!(log.deaths.is_empty());
        assert!((s.vertices()[0].money - 0.2).abs() < 1e-12);
        assert!((s.vertices()[1].money - 1.8).abs() < 1e-12);
        assert_eq!(s.vertices()[0].saves, 1);
    }

    #[test]
    fn reservation_scan_skips_and_continues() {
        // Star: offerer 0 with requesters 1, 2, 3.
        let g = Multigraph::from_edges(
            4,
            (1..4).map(|v| Edge { u: 0, v, multiplicity: 1 }),
        )
        .unwrap();
        let alloc = homogeneous(4, 2.0);
        let params = ModelParams { threshold: 2.0, ..ModelParams::default() };
        // Deficits 1.5, 0.4, 0.3; surplus 1.0.
        let x = [3.0, 0.5, 1.6, 1.7];
        let mut s = SimState::with_seed(&g, &alloc, &params, Box::new(HighToLow), 0).unwrap();
        let log = s.run_time_step(Some(&x));
        let offered: Vec<_> = log.offers.iter().map(|o| o.requester).collect();
        assert_eq!(offered, [2, 3]);
        assert_eq!(log.deaths, vec![(1, DeathCause::NoOffer)]);

        let stop = ModelParams { offer_scan: OfferScan::Stop, ..params };
        let big = [3.0, 1.2, 1.6, 1.7]; // deficits 0.8, 0.4, 0.3
        let mut s = SimState::with_seed(&g, &alloc, &stop, Box::new(HighToLow), 0).unwrap();
        let log = s.run_time_step(Some(&big));
        let offered: Vec<_> = log.offers.iter().map(|o| o.requester).collect();
        assert_eq!(offered, [1]);
    }

    #[test]
    fn scripted_pair_dies_together() {
        let g = pair();
        let mut s = SimState::with_seed(&g, &homogeneous(2, 0.0), &ModelParams::default(), Box::new(RandomOrder), 0).unwrap();
        for _ in 0..5 {
            s.run_time_step(Some(&[3.0, 3.0]));
        }
        let log = s.run_time_step(Some(&[0.5, 0.5]));
        assert_eq!(log.t, 6);
        let recs = s.survival_records(DEFAULT_MAX_STEPS);
        assert!(recs.iter().all(|r| r.lifetime == 6 && r.cause == Outcome::NoMoney));
    }

    #[test]
    fn censoring_at_step_cap() {
        let g = Multigraph::from_edges(1, []).unwrap();
        let mut s = SimState::with_seed(&g, &homogeneous(1, 0.0), &ModelParams { threshold: -1.0, ..ModelParams::default() }, Box::new(RandomOrder), 0).unwrap();
        s.run_until_extinct(7, |_, _| {});
        let recs = s.survival_records(7);
        assert_eq!(recs[0].lifetime, 7);
        assert_eq!(recs[0].cause, Outcome::Censored);
        assert_eq!(s.time(), 8);
    }

    #[test]
    fn rejects_mismatched_allocation() {
        let g = pair();
        let err = SimState::with_seed(&g, &homogeneous(3, 1.0), &ModelParams::default(), Box::new(RandomOrder), 0);
        assert!(err.is_err());
        let rng = SimRng::seed_from_u64(0);
        assert!(run_simulation(&g, &homogeneous(2, 1.0), &ModelParams::default(), Box::new(RandomOrder), 0, rng).is_err());
    }
}
