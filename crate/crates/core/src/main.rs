use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use darbouxkit::cli::{run, Command, Invocation, Options};

#[derive(Parser)]
#[command(name = "darbouxkit", version, about = "Darboux models, d-critical charts and motivic vanishing cycles")]
struct Cli {
    /// Emit one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "degree-bound", global = true)]
    degree_bound: Option<u32>,
    /// Evaluation point, e.g. "x=0,y=1".
    #[arg(long, global = true, allow_hyphen_values = true)]
    point: Option<String>,
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand)]
enum Top {
    /// Darboux models.
    Darboux {
        #[command(subcommand)]
        action: DarbouxAction,
    },
    /// Derived critical locus of each chart.
    Crit(ChartArgs),
    /// Cotangent fibres of algebras and charts.
    Cotangent(ChartArgs),
    /// Glue conditions on overlaps.
    Glue(Files),
    /// Motive expressions and stack assemblies.
    Motive {
        #[command(subcommand)]
        action: MotiveAction,
    },
    /// Motivic nearby and vanishing cycles from resolution data.
    Vanish {
        #[command(flatten)]
        files: Files,
        /// Built-in datum: power:N, node, zero[:D].
        #[arg(long)]
        builtin: Option<String>,
        /// Report the vanishing cycle instead of the nearby cycle.
        #[arg(long)]
        phi: bool,
    },
    /// Every chart and glue datum in the inputs, checked in parallel.
    Atlas(Files),
}

#[derive(Subcommand)]
enum DarbouxAction {
    Build(DarbouxArgs),
    Check {
        #[command(flatten)]
        args: DarbouxArgs,
        /// Random points for the nondegeneracy check.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Subcommand)]
enum MotiveAction {
    Eval(Files),
}

#[derive(Args)]
struct Files {
    inputs: Vec<PathBuf>,
}

#[derive(Args)]
struct DarbouxArgs {
    #[command(flatten)]
    files: Files,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i32>,
    /// Hamiltonian; without --blocks its names become degree-0 coordinates.
    #[arg(long = "H", allow_hyphen_values = true)]
    h: Option<String>,
    /// Pair counts per block, e.g. "2,1".
    #[arg(long)]
    blocks: Option<String>,
}

#[derive(Args)]
struct ChartArgs {
    #[command(flatten)]
    files: Files,
    /// A chart potential given inline.
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut options = Options {
        seed: cli.seed,
        degree_bound: cli.degree_bound,
        point: cli.point,
        ..Default::default()
    };
    let (command, inputs) = match cli.command {
        Top::Darboux { action } => {
            let (command, args) = match action {
                DarbouxAction::Build(a) => (Command::DarbouxBuild, a),
                DarbouxAction::Check { args, samples } => {
                    options.samples = samples;
                    (Command::DarbouxCheck, args)
                }
            };
            options.k = args.k;
            options.hamiltonian = args.h;
            options.blocks = args.blocks;
            (command, args.files.inputs)
        }
        Top::Crit(a) => {
            options.f = a.f;
            (Command::Crit, a.files.inputs)
        }
        Top::Cotangent(a) => {
            options.f = a.f;
            (Command::Cotangent, a.files.inputs)
        }
        Top::Glue(f) => (Command::Glue, f.inputs),
        Top::Motive { action: MotiveAction::Eval(f) } => (Command::MotiveEval, f.inputs),
        Top::Vanish { files, builtin, phi } => {
            options.builtin = builtin;
            options.phi = phi;
            (Command::Vanish, files.inputs)
        }
        Top::Atlas(f) => (Command::Atlas, f.inputs),
    };
    let (code, report) = run(&Invocation { command, options, inputs });
    if cli.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    ExitCode::from(code as u8)
}
