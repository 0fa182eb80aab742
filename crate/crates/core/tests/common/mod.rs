#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use resdep::dynamics::{DeathCause, ModelParams, SimState, StepLog};
use resdep::graphgen::{build_configuration_model, DegreeSequence, Multigraph};
use resdep::moneyinit::MoneyAllocation;
use resdep::strategies::OfferStrategy;
use resdep::{SimRng, VertexId};

/// Small configuration-model graph with a mix of isolated vertices, hubs,
/// self-loops and multi-edges.
pub fn random_small_graph(seed: u64) -> Multigraph {
    let mut rng = SimRng::seed_from_u64(seed);
    let n = rng.random_range(1..40);
    let mut degrees: Vec<usize> = (0..n)
        .map(|_| match rng.random_range(0..10) {
            0 => 0,
            1 => rng.random_range(8..20),
            _ => rng.random_range(1..5),
        })
        .collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        degrees[0] += 1;
    }
    build_configuration_model(&DegreeSequence::new(degrees), &mut rng).unwrap()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct AuditStats {
    pub steps: u64,
    pub offers: usize,
    pub acceptances: usize,
    pub max_money_drift: f64,
}

/// Runs a simulation step by step and checks every protocol invariant on
/// each `StepLog`. Returns the first violation found.
pub fn audit_run(
    graph: &Multigraph,
    allocation: &MoneyAllocation,
    params: &ModelParams,
    strategy: Box<dyn OfferStrategy>,
    seed: u64,
    max_steps: u64,
) -> Result<AuditStats, String> {
    let mut state = SimState::with_seed(graph, allocation, params, strategy, seed).unwrap();
    let budget: f64 = allocation.balances.iter().sum();
    let mut stats = AuditStats::default();
    let mut dead_at: BTreeMap<VertexId, u64> = BTreeMap::new();

    while state.alive_count() > 0 && state.time() <= max_steps {
        let before: Vec<_> = state.vertices().to_vec();
        let alive_before: BTreeSet<VertexId> =
            (0..before.len()).filter(|&v| before[v].alive).collect();
        let alive_count_before = state.alive_count();
        let log = state.run_time_step(None);
        check_step(graph, &before, &alive_before, &log)?;

        let after = state.vertices();
        for &(v, _) in &log.deaths {
            dead_at.insert(v, log.t);
        }
        for (v, s) in after.iter().enumerate() {
            if s.money < 0.0 {
                return Err(format!("t={} vertex {v} has negative money {}", log.t, s.money));
            }
            if s.alive != (alive_before.contains(&v) && !log.deaths.iter().any(|d| d.0 == v)) {
                return Err(format!("t={} vertex {v} alive flag inconsistent", log.t));
            }
            let accepted = log.acceptances.iter().filter(|a| a.requester == v).count() as u64;
            if s.saves != before[v].saves + accepted {
                return Err(format!("t={} vertex {v} saves counter wrong", log.t));
            }
            if !s.alive && s.death_time != dead_at.get(&v).copied() {
                return Err(format!("t={} vertex {v} death time mismatch", log.t));
            }
            if s.alive != s.death_cause.is_none() || s.alive != s.death_time.is_none() {
                return Err(format!("t={} vertex {v} death fields inconsistent", log.t));
            }
        }
        if state.alive_count() > alive_count_before {
            return Err(format!("t={} alive count increased", log.t));
        }
        let total = state.total_money();
        let drift = (total - budget).abs() / budget.max(f64::MIN_POSITIVE);
        stats.max_money_drift = stats.max_money_drift.max(drift);
        if (total - budget).abs() > 1e-9 * budget.max(f64::MIN_POSITIVE) {
            return Err(format!("t={} money {total} drifted from {budget}", log.t));
        }
        stats.steps += 1;
        stats.offers += log.offers.len();
        stats.acceptances += log.acceptances.len();
    }
    Ok(stats)
}

fn check_step(
    graph: &Multigraph,
    before: &[resdep::dynamics::VertexState],
    alive: &BTreeSet<VertexId>,
    log: &StepLog,
) -> Result<(), String> {
    let t = log.t;
    let produced: BTreeSet<VertexId> = log.productions.keys().copied().collect();
    if &produced != alive {
        return Err(format!("t={t} productions do not cover exactly the alive set"));
    }
    let x = |v: VertexId| log.productions[&v];

    for (&r, req) in &log.requests {
        let s = &before[r];
        let need = s.threshold - x(r);
        if !(x(r) < s.threshold) || req.amount != need || s.money < need {
            return Err(format!("t={t} request from {r} is not a funded deficit"));
        }
        let expected: Vec<VertexId> = graph
            .neighbours(r)
            .iter()
            .map(|nb| nb.vertex)
            .filter(|v| alive.contains(v))
            .collect();
        if req.recipients != expected {
            return Err(format!("t={t} request from {r} not sent to all alive neighbours"));
        }
    }

    let mut reserved: BTreeMap<VertexId, f64> = BTreeMap::new();
    let mut pairs = BTreeSet::new();
    for o in &log.offers {
        let req = log
            .requests
            .get(&o.requester)
            .ok_or_else(|| format!("t={t} offer to non-requester {}", o.requester))?;
        if o.amount != req.amount {
            return Err(format!("t={t} offer amount differs from the deficit"));
        }
        if !req.recipients.contains(&o.offerer) {
            return Err(format!("t={t} offer from a vertex that got no request"));
        }
        if !pairs.insert((o.offerer, o.requester)) {
            return Err(format!("t={t} duplicate offer {} -> {}", o.offerer, o.requester));
        }
        let surplus = x(o.offerer) - before[o.offerer].threshold;
        let acc = reserved.entry(o.offerer).or_insert(0.0);
        *acc += o.amount;
        if !(surplus > 0.0) || *acc > surplus {
            return Err(format!("t={t} offerer {} exceeds its surplus", o.offerer));
        }
    }

    let mut accepted = BTreeSet::new();
    for a in &log.acceptances {
        if !accepted.insert(a.requester) {
            return Err(format!("t={t} requester {} accepted twice", a.requester));
        }
        if !pairs.contains(&(a.offerer, a.requester)) {
            return Err(format!("t={t} acceptance without a matching offer"));
        }
        if a.amount != log.requests[&a.requester].amount {
            return Err(format!("t={t} acceptance amount mismatch"));
        }
    }
    let offered: BTreeSet<VertexId> = log.offers.iter().map(|o| o.requester).collect();
    if offered != accepted {
        return Err(format!("t={t} offered requesters and acceptances differ"));
    }

    let mut died = BTreeSet::new();
    for &(v, cause) in &log.deaths {
        if !died.insert(v) || !alive.contains(&v) {
            return Err(format!("t={t} vertex {v} died twice or posthumously"));
        }
        let s = &before[v];
        let deficit = s.threshold - x(v);
        match cause {
            DeathCause::NoMoney => {
                if !(x(v) < s.threshold) || !(s.money < deficit) || log.requests.contains_key(&v) {
                    return Err(format!("t={t} vertex {v} wrongly dead of NoMoney"));
                }
            }
            DeathCause::NoOffer => {
                if !log.requests.contains_key(&v) || offered.contains(&v) {
                    return Err(format!("t={t} vertex {v} wrongly dead of NoOffer"));
                }
            }
        }
    }
    for &r in log.requests.keys() {
        if !offered.contains(&r) && !died.contains(&r) {
            return Err(format!("t={t} unanswered requester {r} survived"));
        }
    }
    for (&v, &xv) in &log.productions {
        let s = &before[v];
        if xv < s.threshold && !log.requests.contains_key(&v) && !died.contains(&v) {
            return Err(format!("t={t} deficit vertex {v} neither requested nor died"));
        }
    }
    Ok(())
}
