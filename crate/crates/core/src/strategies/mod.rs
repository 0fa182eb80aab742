//! Offer-ordering strategies.
//!
//! A with-surplus vertex sorts the requests it can afford with one of the
//! strategies below, then sends offers down that order. Strategies are
//! trait objects created by name from a [`StrategyRegistry`].

mod sampling;

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, SimRng, VertexId};

pub use sampling::weighted_permutation;

/// Degree bias used by `prop_to_req_deg` unless configured otherwise.
pub const DEFAULT_ETA: f64 = 0.6;

/// A request that fits the receiving vertex's surplus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EligibleRequest {
    pub requester: VertexId,
    /// Requested deficit `R_j - X_j(t)`.
    pub amount: f64,
    /// Distinct neighbours of the requester alive at the start of the step.
    pub alive_degree: u32,
    /// Parallel edges between requester and offerer.
    pub multiplicity: u32,
}

pub trait OfferStrategy: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Reorders `requests` in place into offer order.
    fn order(&self, requests: &mut Vec<EligibleRequest>, rng: &mut SimRng);

    /// Whether [`EligibleRequest::alive_degree`] influences the order.
    fn uses_alive_degree(&self) -> bool {
        false
    }
}

fn apply_permutation(requests: &mut Vec<EligibleRequest>, order: &[usize]) {
    let reordered: Vec<EligibleRequest> = order.iter().map(|&i| requests[i]).collect();
    *requests = reordered;
}

fn order_by_weight(
    requests: &mut Vec<EligibleRequest>,
    rng: &mut SimRng,
    weight: impl Fn(&EligibleRequest) -> f64,
) {
    if requests.len() < 2 {
        return;
    }
    let weights: Vec<f64> = requests.iter().map(weight).collect();
    let order = weighted_permutation(&weights, rng);
    apply_permutation(requests, &order);
}

/// Random order, weighted by edge multiplicity.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomOrder;

impl OfferStrategy for RandomOrder {
    fn name(&self) -> &'static str {
        "random"
    }

    fn order(&self, requests: &mut Vec<EligibleRequest>, rng: &mut SimRng) {
        if requests.iter().all(|r| r.multiplicity == 1) {
            requests.shuffle(rng);
        } else {
            order_by_weight(requests, rng, |r| r.multiplicity as f64);
        }
    }
}

/// Largest request first; ties go to higher multiplicity, then lower id.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighToLow;

impl OfferStrategy for HighToLow {
    fn name(&self) -> &'static str {
        "high_to_low"
    }

    fn order(&self, requests: &mut Vec<EligibleRequest>, _rng: &mut SimRng) {
        requests.sort_by(|a, b| {
            b.amount
                .total_cmp(&a.amount)
                .then(b.multiplicity.cmp(&a.multiplicity))
                .then(a.requester.cmp(&b.requester))
        });
    }
}

/// Draw order proportional to `amount × multiplicity`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PropToReq;

impl OfferStrategy for PropToReq {
    fn name(&self) -> &'static str {
        "prop_to_req"
    }

    fn order(&self, requests: &mut Vec<EligibleRequest>, rng: &mut SimRng) {
        order_by_weight(requests, rng, |r| r.amount * r.multiplicity as f64);
    }
}

/// Draw order proportional to `amount × multiplicity / alive_degree^η`.
#[derive(Debug, Clone, Copy)]
pub struct PropToReqDeg {
    pub eta: f64,
}

impl Default for PropToReqDeg {
    fn default() -> Self {
        PropToReqDeg { eta: DEFAULT_ETA }
    }
}

impl OfferStrategy for PropToReqDeg {
    fn name(&self) -> &'static str {
        "prop_to_req_deg"
    }

    fn order(&self, requests: &mut Vec<EligibleRequest>, rng: &mut SimRng) {
        let eta = self.eta;
        order_by_weight(requests, rng, |r| {
            r.amount * r.multiplicity as f64 / (r.alive_degree.max(1) as f64).powf(eta)
        });
    }

    fn uses_alive_degree(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyParams {
    pub eta: f64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams { eta: DEFAULT_ETA }
    }
}

pub type StrategyFactory = fn(&StrategyParams) -> Box<dyn OfferStrategy>;

/// Name → constructor table for offer strategies.
#[derive(Clone)]
pub struct StrategyRegistry {
    entries: BTreeMap<&'static str, StrategyFactory>,
}

impl fmt::Debug for StrategyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.entries.keys()).finish()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry {
            entries: BTreeMap::new(),
        }
    }

    /// The four built-in strategies under their CLI names.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("random", |_| Box::new(RandomOrder));
        reg.register("high_to_low", |_| Box::new(HighToLow));
        reg.register("prop_to_req", |_| Box::new(PropToReq));
        reg.register("prop_to_req_deg", |p| Box::new(PropToReqDeg { eta: p.eta }));
        reg
    }

    /// Registers `factory` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: &'static str, factory: StrategyFactory) {
        self.entries.insert(name, factory);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn create(&self, name: &str, params: &StrategyParams) -> Result<Box<dyn OfferStrategy>> {
        if !(params.eta >= 0.0) || !params.eta.is_finite() {
            return Err(Error::domain(format!("eta must be >= 0, got {}", params.eta)));
        }
        let factory = self.entries.get(name).ok_or_else(|| {
            Error::domain(format!(
                "unknown strategy `{name}` (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        Ok(factory(params))
    }
}

/// The built-in strategies as a closed set, for typed configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Random,
    HighToLow,
    PropToReq,
    PropToReqDeg,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Random,
        StrategyKind::HighToLow,
        StrategyKind::PropToReq,
        StrategyKind::PropToReqDeg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::HighToLow => "high_to_low",
            StrategyKind::PropToReq => "prop_to_req",
            StrategyKind::PropToReqDeg => "prop_to_req_deg",
        }
    }

    pub fn build(self, eta: f64) -> Result<Box<dyn OfferStrategy>> {
        StrategyRegistry::builtin().create(self.name(), &StrategyParams { eta })
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown strategy `{s}`")))
    }
}

/// Returns `requests` in the offer order chosen by `strategy`.
pub fn order_eligible(
    mut requests: Vec<EligibleRequest>,
    strategy: &dyn OfferStrategy,
    rng: &mut SimRng,
) -> Vec<EligibleRequest> {
    strategy.order(&mut requests, rng);
    requests
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn req(requester: VertexId, amount: f64, alive_degree: u32, multiplicity: u32) -> EligibleRequest {
        EligibleRequest {
            requester,
            amount,
            alive_degree,
            multiplicity,
        }
    }

    fn first_frequency(
        strategy: &dyn OfferStrategy,
        requests: &[EligibleRequest],
        target: VertexId,
        seed: u64,
    ) -> f64 {
        let trials = 100_000;
        let mut rng = SimRng::seed_from_u64(seed);
        let hits = (0..trials)
            .filter(|_| order_eligible(requests.to_vec(), strategy, &mut rng)[0].requester == target)
            .count();
        hits as f64 / trials as f64
    }

    #[test]
    fn high_to_low_hand_sort() {
        let mut rng = SimRng::seed_from_u64(0);
        let out = order_eligible(
            vec![req(2, 0.2, 1, 1), req(0, 0.9, 1, 1), req(1, 0.5, 1, 1)],
            &HighToLow,
            &mut rng,
        );
        let ids: Vec<_> = out.iter().map(|r| r.requester).collect();
        assert_eq!(ids, [0, 1, 2]);
    }

    #[test]
    fn high_to_low_tie_breaks() {
        let mut rng = SimRng::seed_from_u64(0);
        let out = order_eligible(
            vec![req(5, 0.5, 1, 1), req(3, 0.5, 1, 1), req(9, 0.5, 1, 2)],
            &HighToLow,
            &mut rng,
        );
        let ids: Vec<_> = out.iter().map(|r| r.requester).collect();
        assert_eq!(ids, [9, 3, 5]);
    }

    #[test]
    fn prop_to_req_first_choice() {
        let p = first_frequency(&PropToReq, &[req(0, 1.0, 1, 1), req(1, 3.0, 1, 1)], 1, 10);
        assert!((p - 0.75).abs() < 0.01, "{p}");
    }

    #[test]
    fn prop_to_req_deg_favours_low_alive_degree() {
        // 32^0.6 = 8, so weights are 8:1 in favour of the isolated requester.
        let s = PropToReqDeg { eta: 0.6 };
        let p = first_frequency(&s, &[req(0, 0.5, 1, 1), req(1, 0.5, 32, 1)], 0, 11);
        assert!((p - 8.0 / 9.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn prop_to_req_deg_with_zero_eta_matches_prop_to_req() {
        let reqs = [req(0, 0.3, 1, 1), req(1, 0.6, 40, 1), req(2, 0.1, 7, 2)];
        let deg = first_frequency(&PropToReqDeg { eta: 0.0 }, &reqs, 1, 12);
        let plain = first_frequency(&PropToReq, &reqs, 1, 13);
        assert!((deg - plain).abs() < 0.01, "{deg} vs {plain}");
    }

    #[test]
    fn random_weights_by_multiplicity() {
        let p = first_frequency(&RandomOrder, &[req(0, 0.3, 1, 3), req(1, 0.6, 1, 1)], 0, 14);
        assert!((p - 0.75).abs() < 0.01, "{p}");
        let q = first_frequency(&RandomOrder, &[req(0, 0.3, 1, 1), req(1, 0.6, 1, 1)], 0, 15);
        assert!((q - 0.5).abs() < 0.01, "{q}");
    }

    #[test]
    fn doubling_amounts_keeps_distribution() {
        let reqs = [req(0, 0.2, 3, 1), req(1, 0.5, 1, 1), req(2, 0.7, 9, 1)];
        let doubled: Vec<_> = reqs.iter().map(|r| EligibleRequest { amount: 2.0 * r.amount, ..*r }).collect();
        for s in [&PropToReq as &dyn OfferStrategy, &PropToReqDeg::default(), &RandomOrder] {
            let a = first_frequency(s, &reqs, 2, 20);
            let b = first_frequency(s, &doubled, 2, 21);
            assert!((a - b).abs() < 0.01, "{}: {a} vs {b}", s.name());
        }
        let mut rng = SimRng::seed_from_u64(0);
        let a: Vec<_> = order_eligible(reqs.to_vec(), &HighToLow, &mut rng).iter().map(|r| r.requester).collect();
        let b: Vec<_> = order_eligible(doubled, &HighToLow, &mut rng).iter().map(|r| r.requester).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn single_and_empty_inputs() {
        let mut rng = SimRng::seed_from_u64(0);
        for kind in StrategyKind::ALL {
            let s = kind.build(DEFAULT_ETA).unwrap();
            assert!(order_eligible(Vec::new(), s.as_ref(), &mut rng).is_empty());
            let one = order_eligible(vec![req(4, 0.1, 2, 1)], s.as_ref(), &mut rng);
            assert_eq!(one, vec![req(4, 0.1, 2, 1)]);
        }
    }

    #[test]
    fn registry_names_and_errors() {
        let reg = StrategyRegistry::builtin();
        assert_eq!(
            reg.names().collect::<Vec<_>>(),
            ["high_to_low", "prop_to_req", "prop_to_req_deg", "random"]
        );
        for kind in StrategyKind::ALL {
            let s = reg.create(kind.name(), &StrategyParams::default()).unwrap();
            assert_eq!(s.name(), kind.name());
            assert_eq!(kind.name().parse::<StrategyKind>().unwrap(), kind);
        }
        assert!(reg.create("greedy", &StrategyParams::default()).is_err());
        assert!(reg.create("random", &StrategyParams { eta: -1.0 }).is_err());
    }

    #[test]
    fn registry_accepts_custom_strategies() {
        #[derive(Debug)]
        struct Reverse;
        impl OfferStrategy for Reverse {
            fn name(&self) -> &'static str {
                "reverse"
            }
            fn order(&self, requests: &mut Vec<EligibleRequest>, _rng: &mut SimRng) {
                requests.reverse();
            }
        }
        let mut reg = StrategyRegistry::builtin();
        reg.register("reverse", |_| Box::new(Reverse));
        let s = reg.create("reverse", &StrategyParams::default()).unwrap();
        let mut rng = SimRng::seed_from_u64(0);
        let out = order_eligible(vec![req(0, 0.1, 1, 1), req(1, 0.2, 1, 1)], s.as_ref(), &mut rng);
        assert_eq!(out[0].requester, 1);
    }

    fn arb_requests() -> impl Strategy<Value = Vec<EligibleRequest>> {
        prop::collection::vec((0.001f64..5.0, 1u32..50, 1u32..4), 0..40).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (amount, alive_degree, multiplicity))| req(i, amount, alive_degree, multiplicity))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn output_is_a_permutation(reqs in arb_requests(), seed in any::<u64>(), which in 0usize..4) {
            let s = StrategyKind::ALL[which].build(DEFAULT_ETA).unwrap();
            let mut rng = SimRng::seed_from_u64(seed);
            let out = order_eligible(reqs.clone(), s.as_ref(), &mut rng);
            let mut ids: Vec<_> = out.iter().map(|r| r.requester).collect();
            ids.sort_unstable();
            prop_assert_eq!(ids, (0..reqs.len()).collect::<Vec<_>>());
            for r in &out {
                prop_assert_eq!(r, &reqs[r.requester]);
            }
        }

        #[test]
        fn high_to_low_ignores_rng(reqs in arb_requests(), a in any::<u64>(), b in any::<u64>()) {
            let x = order_eligible(reqs.clone(), &HighToLow, &mut SimRng::seed_from_u64(a));
            let y = order_eligible(reqs, &HighToLow, &mut SimRng::seed_from_u64(b));
            prop_assert_eq!(x, y);
        }
    }
}
