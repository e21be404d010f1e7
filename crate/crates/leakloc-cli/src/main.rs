//! `leakloc` — build Voronoi diagrams over a vacuum setup, predict leak
//! cells from flow measurements, and run the evaluation pipeline.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use leakloc::evaluation::OUTLIER_THRESHOLD_M;
use leakloc::io::{DiagramInventory, SvgScene};
use leakloc::{
    clean_outliers, evaluate_multi_leak, evaluate_simultaneous, evaluate_single_leak,
    generate_dataset, invalid_prediction_analysis, load_dataset, load_setup, save_dataset,
    save_report, ClassicPredictor, Dataset, FlowVector, Prediction, Predictor, RefinedDiagram,
    RefinedPredictor, SynthParams, VoronoiDiagram,
};

/// Exit code for a structurally fine run whose prediction names an empty
/// refined cell.
const EXIT_INVALID_PREDICTION: u8 = 3;
/// Exit code for usage errors (mirrors clap's own).
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "leakloc",
    version,
    about = "Voronoi-based leak localization",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagram construction.
    Diagram {
        #[command(subcommand)]
        action: DiagramAction,
    },
    /// One-shot cell prediction from a flow vector.
    Predict(PredictArgs),
    /// Evaluate a dataset against a predictor.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum DiagramAction {
    /// Build the classic or refined diagram and print its cell inventory.
    Build(BuildArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Setup file.
    #[arg(long)]
    setup: PathBuf,
    /// Diagram order (1 = classic).
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Write an SVG rendering.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write the inventory as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Setup file.
    #[arg(long)]
    setup: PathBuf,
    /// Comma-separated flow values, one per connection.
    #[arg(long)]
    flows: String,
    /// Use the order-two refined predictor.
    #[arg(long)]
    refined: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Setup file.
    #[arg(long)]
    setup: PathBuf,
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
    /// Use the order-two refined predictor.
    #[arg(long)]
    refined: bool,
    /// Evaluate the two-leak samples with the repeated strategy.
    #[arg(long)]
    multi: bool,
    /// Remove outliers first; reports metrics before and after.
    #[arg(long)]
    clean: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Setup file.
    #[arg(long)]
    setup: PathBuf,
    /// Number of single-leak samples.
    #[arg(long)]
    n_single: usize,
    /// Number of two-leak samples.
    #[arg(long)]
    n_two: usize,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Output dataset file.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Diagram {
            action: DiagramAction::Build(args),
        } => diagram_build(args),
        Command::Predict(args) => predict(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Synth(args) => synth(args),
    }
}

fn diagram_build(args: BuildArgs) -> Result<ExitCode> {
    let setup = load_setup(&args.setup)?;
    let classic = VoronoiDiagram::build(&setup.connections);

    let (inventory, refined) = if args.order == 1 {
        (DiagramInventory::from_classic(&setup.name, &classic), None)
    } else {
        let rd = RefinedDiagram::build(&setup.connections, args.order)?;
        (DiagramInventory::from_refined(&setup.name, &rd), Some(rd))
    };

    print!("{}", inventory.to_text());

    if let Some(path) = &args.json {
        save_report(&inventory.to_json(), path)?;
    }
    if let Some(path) = &args.svg {
        let scene = SvgScene {
            setup: &setup,
            classic: &classic,
            refined: refined.as_ref(),
            samples: &[],
        };
        leakloc::io::export_svg(&scene, path)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_flows(raw: &str, k: usize) -> Result<FlowVector, String> {
    let values: Result<Vec<f64>, _> = raw
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad flow value '{t}'"))
        })
        .collect();
    let values = values?;
    if values.len() != k {
        return Err(format!("expected {k} flow values, got {}", values.len()));
    }
    FlowVector::new(values).map_err(|e| e.to_string())
}

fn predict(args: PredictArgs) -> Result<ExitCode> {
    let setup = load_setup(&args.setup)?;
    let flows = match parse_flows(&args.flows, setup.k()) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("usage error: {msg}");
            return Ok(ExitCode::from(EXIT_USAGE));
        }
    };

    let classic = VoronoiDiagram::build(&setup.connections);
    let prediction = if args.refined {
        let rd = RefinedDiagram::build(&setup.connections, 2)?;
        RefinedPredictor::new(&rd)?.predict(&flows)?
    } else {
        ClassicPredictor::new(&classic).predict(&flows)?
    };

    match prediction {
        Prediction::Valid(label) => {
            println!("V_{label}");
            Ok(ExitCode::SUCCESS)
        }
        Prediction::Invalid(tuple) => {
            println!("INVALID {tuple}");
            Ok(ExitCode::from(EXIT_INVALID_PREDICTION))
        }
    }
}

fn render_single(report: &mut String, dataset: &Dataset, predictor: &dyn Predictor) -> Result<()> {
    let eval = evaluate_single_leak(dataset, predictor)?;
    let ties = eval.outcomes.iter().filter(|o| o.boundary_tie).count();
    let _ = writeln!(report, "[metrics single-leak {}]", dataset.provenance);
    let _ = write!(report, "{}", eval.metrics);
    let _ = writeln!(report, "boundary-tie-truths {ties}");
    let _ = writeln!(report);
    let _ = writeln!(
        report,
        "[confusion single-leak {} precision]",
        dataset.provenance
    );
    let _ = write!(report, "{}", eval.confusion_precision);
    let _ = writeln!(report);
    let _ = writeln!(
        report,
        "[confusion single-leak {} recall]",
        dataset.provenance
    );
    let _ = write!(report, "{}", eval.confusion_recall);
    let _ = writeln!(report);
    Ok(())
}

fn render_multi(
    report: &mut String,
    dataset: &Dataset,
    predictor: &dyn Predictor,
    refined: Option<&RefinedPredictor<'_>>,
    classic: &VoronoiDiagram,
) -> Result<()> {
    let eval = evaluate_multi_leak(dataset, predictor)?;
    let _ = writeln!(report, "[metrics multi-leak {} step-1]", dataset.provenance);
    let _ = write!(report, "{}", eval.step1);
    let _ = writeln!(report);
    let _ = writeln!(report, "[metrics multi-leak {} step-2]", dataset.provenance);
    let _ = write!(report, "{}", eval.step2);
    let _ = writeln!(report);
    if let Some(rp) = refined {
        let analysis = invalid_prediction_analysis(dataset, rp, classic)?;
        let _ = writeln!(report, "[invalid-predictions {}]", dataset.provenance);
        let _ = write!(report, "{analysis}");
        let _ = writeln!(report);
    }
    let simultaneous = evaluate_simultaneous(dataset, classic)?;
    let _ = writeln!(report, "[simultaneous-strategy {}]", dataset.provenance);
    let _ = write!(report, "{simultaneous}");
    let _ = writeln!(report);
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let setup = load_setup(&args.setup)?;
    let classic = VoronoiDiagram::build(&setup.connections);
    let (dataset, warnings) = load_dataset(&args.data, &setup)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let refined_diagram = if args.refined {
        Some(RefinedDiagram::build(&setup.connections, 2)?)
    } else {
        None
    };
    let refined_predictor = refined_diagram
        .as_ref()
        .map(RefinedPredictor::new)
        .transpose()?;
    let classic_predictor = ClassicPredictor::new(&classic);
    let predictor: &dyn Predictor = match &refined_predictor {
        Some(rp) => rp,
        None => &classic_predictor,
    };

    let mut report = String::new();
    let _ = writeln!(report, "# leakloc evaluation report");
    let _ = writeln!(report, "setup {}", setup.name);
    let _ = writeln!(report, "k {}", setup.k());
    let _ = writeln!(report, "predictor {}", predictor.name());
    if let Some(rd) = &refined_diagram {
        let _ = writeln!(report, "probe-pitch-m {:.6}", rd.probe().pitch);
        let _ = writeln!(report, "nonempty-cells {}", rd.nonempty_count());
    }
    let _ = writeln!(
        report,
        "mode {}",
        if args.multi {
            "multi-leak"
        } else {
            "single-leak"
        }
    );
    let _ = writeln!(report);

    let render = |report: &mut String, dataset: &Dataset| -> Result<()> {
        if args.multi {
            render_multi(
                report,
                dataset,
                predictor,
                refined_predictor.as_ref(),
                &classic,
            )
        } else {
            render_single(report, dataset, predictor)
        }
    };

    render(&mut report, &dataset)?;

    if args.clean {
        let (cleaned, outliers) = clean_outliers(&dataset, &classic, OUTLIER_THRESHOLD_M);
        let _ = writeln!(report, "[cleaning]");
        let _ = write!(report, "{outliers}");
        let _ = writeln!(report);
        render(&mut report, &cleaned)?;
    }

    match &args.report {
        Some(path) => save_report(&report, path)?,
        None => print!("{report}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn synth(args: SynthArgs) -> Result<ExitCode> {
    let setup = load_setup(&args.setup)?;
    if args.n_two > 0 && args.n_single < 2 {
        eprintln!("usage error: --n-two needs --n-single >= 2");
        return Ok(ExitCode::from(EXIT_USAGE));
    }
    let grid =
        leakloc::generate_leak_grid(&setup.surface, leakloc::synthesis::DEFAULT_GRID_PITCH_M);
    if grid.is_empty() {
        bail!(
            "surface of setup '{}' is too small for the leak grid",
            setup.name
        );
    }
    let dataset = generate_dataset(
        &setup,
        args.n_single,
        args.n_two,
        &SynthParams::default(),
        args.seed,
    );
    save_dataset(&dataset, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} single-leak and {} two-leak samples to {}",
        dataset.single_samples().len(),
        dataset.two_leak_samples().len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
