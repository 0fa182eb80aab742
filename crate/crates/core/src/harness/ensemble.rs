use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::seed::derive_seed;
use crate::dynamics::{SimState, StepSummary};
use crate::graphgen::{DegreeSource, Multigraph};
use crate::metrics::{
    low_high_decomposition, mean_and_stderr, survival_summary, DegreeAccumulator, DegreeProfile,
    LowHighSplit,
};
use crate::moneyinit::allocate_money;
use crate::strategies::StrategyRegistry;
use crate::{Error, Result, SimRng};

/// One realization's summary line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub realization: usize,
    pub seed: u64,
    pub avg_vertex_time: f64,
    pub t_max: u64,
    pub censored_count: usize,
}

/// One trace line: a step summary tagged with its run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceLine {
    pub sweep_value: f64,
    pub realization: usize,
    #[serde(flatten)]
    pub step: StepSummary,
}

/// Aggregates for one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub rows: Vec<ResultRow>,
    /// Per-degree statistics pooled over all realizations.
    pub profile: DegreeProfile,
    pub low_high: LowHighSplit,
    /// Mean over realizations of the per-realization `⟨T_v⟩`.
    pub mean_vertex_time: f64,
    pub stderr_vertex_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub sweep_param: &'static str,
    /// Smallest degree counted as high degree.
    pub k_split: usize,
    pub points: Vec<SweepPoint>,
    pub trace: Vec<TraceLine>,
}

impl EnsembleResult {
    pub fn rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.points.iter().flat_map(|p| p.rows.iter())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnsembleOptions {
    /// Keep per-step summaries of every run.
    pub trace: bool,
    /// Run realizations one at a time on the calling thread.
    pub serial: bool,
}

enum Substrate {
    Fresh { source: DegreeSource, n: usize },
    Fixed(Multigraph),
}

struct RunOutput {
    row: ResultRow,
    degrees: DegreeAccumulator,
    trace: Vec<StepSummary>,
}

const MONEY_AUDIT_TOLERANCE: f64 = 1e-9;

fn run_one(
    config: &ExperimentConfig,
    substrate: &Substrate,
    registry: &StrategyRegistry,
    sweep_value: f64,
    seed: u64,
    realization: usize,
    trace: bool,
) -> Result<RunOutput> {
    let mut rng = SimRng::seed_from_u64(seed);
    let fresh;
    let graph = match substrate {
        Substrate::Fresh { source, n } => {
            fresh = source.build_graph(*n, &mut rng)?;
            &fresh
        }
        Substrate::Fixed(g) => g,
    };
    let money = config.money_at(sweep_value);
    let allocation = allocate_money(graph.degrees(), money.mean, money.theta)?;
    let budget = allocation.total();
    let strategy = registry.create(&config.model.strategy, &config.model.strategy_params())?;
    let max_steps = config.run.max_steps;
    let mut state = SimState::new(graph, &allocation, &config.model.params(), strategy, rng)?;

    let mut steps = Vec::new();
    let audit = cfg!(debug_assertions);
    state.run_until_extinct(max_steps, |s, summary| {
        if audit {
            let total = s.total_money();
            assert!(
                (total - budget).abs() <= MONEY_AUDIT_TOLERANCE * budget.max(f64::MIN_POSITIVE),
                "money not conserved at t={}: {total} vs {budget}",
                summary.t
            );
        }
        if trace {
            steps.push(*summary);
        }
    });

    let records = state.survival_records(max_steps);
    let summary = survival_summary(&records)?;
    let mut degrees = DegreeAccumulator::new();
    degrees.extend(&records);
    Ok(RunOutput {
        row: ResultRow {
            sweep_value,
            realization,
            seed,
            avg_vertex_time: summary.avg_vertex_time,
            t_max: summary.t_max,
            censored_count: summary.censored,
        },
        degrees,
        trace: steps,
    })
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_owned()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_owned()
    }
}

/// Runs every (sweep value, realization) pair and aggregates the results.
///
/// Output order is fixed by (sweep index, realization index) no matter how
/// the runs are scheduled.
pub fn run_ensemble(config: &ExperimentConfig, options: EnsembleOptions) -> Result<EnsembleResult> {
    config.validate()?;
    let registry = StrategyRegistry::builtin();
    let (substrate, k_split) = match (&config.topology, &config.graph_file) {
        (Some(topology), _) => (
            Substrate::Fresh {
                source: DegreeSource::new(topology)?,
                n: topology.n,
            },
            topology.low_high_split()?,
        ),
        (None, Some(path)) => {
            let g = Multigraph::read_json(path)?;
            if g.vertex_count() == 0 {
                return Err(Error::Validation(vec![format!(
                    "graph file {} has no vertices",
                    path.display()
                )]));
            }
            let mean = g.degrees().iter().sum::<usize>() as f64 / g.vertex_count() as f64;
            (Substrate::Fixed(g), mean.ceil() as usize)
        }
        (None, None) => unreachable!("rejected by validation"),
    };

    let values = config.sweep_points();
    let realizations = config.run.realizations;
    let jobs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|s| (0..realizations).map(move |r| (s, r)))
        .collect();

    let run = |&(s, r): &(usize, usize)| -> Result<RunOutput> {
        let seed = derive_seed(config.run.master_seed, s, r);
        catch_unwind(AssertUnwindSafe(|| {
            run_one(config, &substrate, &registry, values[s], seed, r, options.trace)
        }))
        .unwrap_or_else(|payload| {
            Err(Error::RunPanicked {
                sweep_index: s,
                realization: r,
                seed,
                message: panic_message(payload),
            })
        })
    };
    let outputs: Vec<Result<RunOutput>> = if options.serial {
        jobs.iter().map(run).collect()
    } else {
        jobs.par_iter().map(run).collect()
    };

    let mut outputs = outputs.into_iter();
    let mut points = Vec::with_capacity(values.len());
    let mut trace = Vec::new();
    for &value in &values {
        let mut rows = Vec::with_capacity(realizations);
        let mut degrees = DegreeAccumulator::new();
        for _ in 0..realizations {
            let out = outputs.next().expect("one output per job")?;
            degrees.merge(&out.degrees);
            trace.extend(out.trace.into_iter().map(|step| TraceLine {
                sweep_value: value,
                realization: out.row.realization,
                step,
            }));
            rows.push(out.row);
        }
        let profile = degrees.profile();
        let low_high = low_high_decomposition(&profile, k_split)?;
        let times: Vec<f64> = rows.iter().map(|r| r.avg_vertex_time).collect();
        let (mean_vertex_time, stderr_vertex_time) = mean_and_stderr(&times);
        points.push(SweepPoint {
            value,
            rows,
            profile,
            low_high,
            mean_vertex_time,
            stderr_vertex_time,
        });
    }

    Ok(EnsembleResult {
        sweep_param: config.sweep_param_name(),
        k_split,
        points,
        trace,
    })
}
