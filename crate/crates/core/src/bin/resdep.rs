use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use resdep::graphgen::{DegreeSource, TopologyConfig, TopologyKind};
use resdep::harness::{
    load_config, run_ensemble, write_results, write_summary, EnsembleOptions, EnsembleResult,
    ExperimentConfig, SweepConfig, SweepParam,
};
use resdep::{Error, Result, SimRng};

#[derive(Parser)]
#[command(name = "resdep", version, about = "Request-offer resource dependency simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a configuration-model graph and write it as JSON
    Generate {
        #[arg(long, value_parser = parse_topology)]
        topology: TopologyKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2.2)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        kmin: usize,
        #[arg(long, default_value_t = 9.36)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the ensemble described by a config file
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        outputs: OutputArgs,
    },
    /// Run a config over a grid of M or theta values
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_param)]
        param: SweepParam,
        /// Comma-separated values, e.g. -2,-1.6,0,0.8
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[command(flatten)]
        outputs: OutputArgs,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Summary CSV (one row per realization); stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    per_degree: Option<PathBuf>,
    #[arg(long)]
    lowhigh: Option<PathBuf>,
    /// Per-step JSON lines for every run
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn parse_topology(s: &str) -> std::result::Result<TopologyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_param(s: &str) -> std::result::Result<SweepParam, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_values(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::Validation(vec![format!("sweep value `{v}` is not a number")]))
        })
        .collect()
}

fn apply_outputs(config: &mut ExperimentConfig, args: OutputArgs) {
    let o = &mut config.outputs;
    o.summary = args.out.or(o.summary.take());
    o.per_degree = args.per_degree.or(o.per_degree.take());
    o.lowhigh = args.lowhigh.or(o.lowhigh.take());
    o.trace = args.trace.or(o.trace.take());
}

fn report(result: &EnsembleResult) {
    eprintln!(
        "{:>12} {:>12} {:>10} {:>8} {:>8} {:>10} {:>10}",
        result.sweep_param, "mean_T", "stderr", "f_L", "f_H", "T_low", "T_high"
    );
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |x| format!("{x:.4}"));
    for p in &result.points {
        eprintln!(
            "{:>12} {:>12.4} {:>10.4} {:>8.4} {:>8.4} {:>10} {:>10}",
            p.value,
            p.mean_vertex_time,
            p.stderr_vertex_time,
            p.low_high.f_low,
            p.low_high.f_high,
            fmt(p.low_high.t_low),
            fmt(p.low_high.t_high)
        );
    }
}

fn run_config(config: ExperimentConfig) -> Result<()> {
    config.validate()?;
    let result = run_ensemble(
        &config,
        EnsembleOptions {
            trace: config.outputs.trace.is_some(),
            serial: false,
        },
    )?;
    write_results(&result, &config.outputs)?;
    if config.outputs.summary.is_none() {
        let rows: Vec<_> = result.rows().copied().collect();
        let stdout = std::io::stdout().lock();
        write_summary(stdout, result.sweep_param, &rows)
            .map_err(|e| Error::io("<stdout>", std::io::Error::other(e.to_string())))?;
    }
    report(&result);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            topology,
            n,
            alpha,
            kmin,
            lambda,
            seed,
            out,
        } => {
            let config = TopologyConfig {
                kind: topology,
                n,
                alpha,
                k_min: kmin,
                lambda,
            };
            let violations = config.violations();
            if !violations.is_empty() {
                return Err(Error::Validation(violations));
            }
            let mut rng = SimRng::seed_from_u64(seed);
            let graph = DegreeSource::new(&config)?.build_graph(n, &mut rng)?;
            graph.write_json(&out)?;
            let mean = graph.degrees().iter().sum::<usize>() as f64 / n as f64;
            eprintln!(
                "wrote {} vertices, {} distinct edges, mean degree {mean:.3} to {}",
                n,
                graph.edges().len(),
                out.display()
            );
            Ok(())
        }
        Command::Simulate { config, outputs } => {
            let mut config = load_config(&config)?;
            apply_outputs(&mut config, outputs);
            run_config(config)
        }
        Command::Sweep {
            config,
            param,
            values,
            outputs,
        } => {
            let mut config = load_config(&config)?;
            config.sweep = Some(SweepConfig {
                parameter: param,
                values: parse_values(&values)?,
            });
            apply_outputs(&mut config, outputs);
            run_config(config)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
