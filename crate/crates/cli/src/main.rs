use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use hybrid_cli::{
    derive_effective, parse_template, search_cnot, simulate_rabi, verify, CliError, CliResult, CommandOutput,
    GraphSource, SearchRequest, EXIT_INPUT,
};
use hybrid_core::encoded::GraphLabel;
use hybrid_core::hubbard::HubbardParams;
use hybrid_core::optimizer::{Progress, SearchConfig, Target, Weights};

#[derive(Parser, Debug)]
#[command(name = "hybridq", version, about = "Hybrid double-dot qubit toolkit")]
struct Cli {
    /// Master seed for stochastic commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory receiving results and manifests.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, global = true, env = "HYBRIDQ_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetArg {
    Class,
    Exact,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Effective qubit Hamiltonian from Hubbard parameters.
    DeriveEffective {
        /// Parameter file; the illustrative set when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Search pulse durations for a CNOT-class or exact CNOT gate.
    SearchCnot {
        /// Preset graph (d, e, f) or a custom graph file.
        #[arg(long, default_value = "d")]
        graph: String,
        #[arg(long)]
        length: usize,
        #[arg(long, value_enum, default_value = "class")]
        target: TargetArg,
        #[arg(long)]
        restarts: Option<usize>,
        /// Comma-separated spin pairs, e.g. `2-3,0-1`.
        #[arg(long)]
        template: Option<String>,
        /// Random templates tried when no template is given or shipped.
        #[arg(long, default_value_t = 8)]
        templates: usize,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        w_leak: f64,
        #[arg(long, default_value_t = 1.0)]
        w_inv: f64,
        /// Result file name inside the output directory.
        #[arg(long, default_value = "search_result.json")]
        out: String,
    },
    /// Recompute leakage and invariants of a sequence file.
    VerifySequence {
        #[arg(long)]
        sequence: PathBuf,
    },
    /// Drive the qubit and record populations.
    SimulateRabi {
        #[arg(long)]
        drive: PathBuf,
    },
}

fn read(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> CliResult<CommandOutput> {
    match &cli.command {
        Command::DeriveEffective { params } => {
            let text = match params {
                Some(p) => read(p)?,
                None => HubbardParams::illustrative().to_json(),
            };
            derive_effective(&text)
        }
        Command::SearchCnot {
            graph,
            length,
            target,
            restarts,
            template,
            templates,
            population,
            generations,
            w_leak,
            w_inv,
            out,
        } => {
            let graph = match GraphLabel::parse(graph) {
                Some(GraphLabel::Custom) | None => GraphSource::Custom(read(&PathBuf::from(graph))?),
                Some(l) => GraphSource::Preset(l),
            };
            let mut config = SearchConfig { seed: cli.seed, ..SearchConfig::default() };
            if let Some(r) = restarts {
                config.restarts = *r;
            }
            if let Some(p) = population {
                config.population_size = *p;
            }
            if let Some(g) = generations {
                config.generations = *g;
            }
            if !(*w_leak > 0.0 && *w_inv > 0.0) {
                return Err(CliError::input("objective weights must be positive"));
            }
            let req = SearchRequest {
                graph,
                length: *length,
                target: match target {
                    TargetArg::Class => Target::CnotClass,
                    TargetArg::Exact => Target::ExactCnot,
                },
                weights: Weights { w_leak: *w_leak, w_inv: *w_inv },
                config,
                template: template.as_deref().map(parse_template).transpose()?,
                random_templates: *templates,
                result_name: out.clone(),
            };
            let report = |p: &Progress| {
                if p.generation % 10 == 0 {
                    eprintln!("restart {} generation {} best {:.3e}", p.restart, p.generation, p.best);
                }
            };
            search_cnot(&req, &report)
        }
        Command::VerifySequence { sequence } => verify(&read(sequence)?),
        Command::SimulateRabi { drive } => simulate_rabi(&read(drive)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    let start = Instant::now();
    match run(&cli) {
        Ok(mut out) => match out.write_to(&cli.out_dir, start.elapsed().as_secs_f64()) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                if out.code != 0 {
                    eprintln!("search did not reach the success threshold");
                }
                ExitCode::from(out.code as u8)
            }
            Err(e) => {
                eprintln!("error: writing results: {e}");
                ExitCode::from(EXIT_INPUT as u8)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
