//! Degree sequences, configuration-model multigraphs and analytic
//! degree-distribution queries.

mod degrees;
mod multigraph;
mod topology;
mod zeta;

pub use degrees::{
    sample_poisson_degrees, sample_powerlaw_degrees, DegreeSequence, PowerLawSampler,
    POWER_LAW_CAP,
};
pub use multigraph::{build_configuration_model, Edge, Multigraph, Neighbour};
pub use topology::{analytic_tail_fraction, TailFractions, TopologyConfig, TopologyKind};
pub use zeta::hurwitz_zeta;

use crate::{Result, SimRng};

/// Degree-sequence source for one topology, reusable across realizations.
#[derive(Debug, Clone)]
pub enum DegreeSource {
    PowerLaw(PowerLawSampler),
    Poisson(f64),
}

impl DegreeSource {
    pub fn new(config: &TopologyConfig) -> Result<Self> {
        config.validate()?;
        Ok(match config.kind {
            TopologyKind::ScaleFree => {
                DegreeSource::PowerLaw(PowerLawSampler::new(config.alpha, config.k_min)?)
            }
            TopologyKind::Poisson => DegreeSource::Poisson(config.lambda),
        })
    }

    pub fn sample(&self, n: usize, rng: &mut SimRng) -> Result<DegreeSequence> {
        match self {
            DegreeSource::PowerLaw(s) => s.sample_sequence(n, rng),
            DegreeSource::Poisson(lambda) => sample_poisson_degrees(n, *lambda, rng),
        }
    }

    /// Samples a degree sequence and wires it with the configuration model.
    pub fn build_graph(&self, n: usize, rng: &mut SimRng) -> Result<Multigraph> {
        let seq = self.sample(n, rng)?;
        build_configuration_model(&seq, rng)
    }
}
