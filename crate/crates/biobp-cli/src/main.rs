//! `biobp` — train and compare credit-assignment rules from the shell.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data/I-O error,
//! 4 numeric abort, 5 partial compare failure.

mod config;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use biobp::data::{
    load_mnist, mnist_available, resolve_data_dir, synth_image_set_labeled, synth_train_test,
    write_idx_images, write_idx_labels, Dataset, MNIST_FILES,
};
use biobp::metrics::{to_csv, CsvTable};
use biobp::rules::RuleKind;
use biobp::trainer::{gradcheck, run_compare, train, DataSource};
use biobp::Error;

use config::{Overrides, Resolved};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_PARTIAL: u8 = 5;

#[derive(Parser)]
#[command(
    name = "biobp",
    version,
    about = "Credit-assignment laboratory: backprop, feedback alignment, and temporal-differencing surrogates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one rule and write a metrics CSV plus a final checkpoint.
    Train(RunArgs),
    /// Train all four rules from identical initial weights; write per-rule
    /// CSVs plus a combined one.
    Compare(RunArgs),
    /// Check backprop gradients against central finite differences.
    Gradcheck(GradcheckArgs),
    /// Write a synthetic dataset as IDX files (the four canonical names).
    SynthData(SynthDataArgs),
    /// Render metrics CSVs as a deterministic SVG line chart.
    Plot(PlotArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Backward rule [possible: vbp, fba, itd-y, itd-dy] [default: vbp];
    /// ignored by `compare`, which always runs all four
    #[arg(long, value_parser = parse_rule)]
    rule: Option<RuleKind>,
    /// Learning rate [default: 0.001]
    #[arg(long)]
    lr: Option<f64>,
    /// Training steps (minibatch iterations) [default: 100000]
    #[arg(long)]
    steps: Option<u64>,
    /// Minibatch size [default: 50]
    #[arg(long)]
    batch: Option<usize>,
    /// Hidden layer widths, comma-separated for depth [default: 32]
    #[arg(long, value_delimiter = ',', value_parser = parse_width)]
    hidden: Option<Vec<usize>>,
    /// Master seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Data source [possible: mnist, synth] [default: mnist]
    #[arg(long, value_parser = parse_data_source)]
    data: Option<DataSource>,
    /// Directory holding the four MNIST IDX files
    /// [default: $BIOBP_DATA_DIR, else ./data]
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Metrics CSV path [default: metrics.csv / compare.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Steps between metric rows [default: 500]
    #[arg(long)]
    eval_every: Option<u64>,
    /// Steps between alignment measurements [default: 500]
    #[arg(long)]
    align_every: Option<u64>,
    /// Batch sampling [possible: epoch-shuffle, with-replacement]
    /// [default: epoch-shuffle]
    #[arg(long, value_parser = parse_sampling)]
    sampling: Option<biobp::data::Sampling>,
    /// Temporal-difference source for the ITD rules [possible: step]
    /// [default: step]
    #[arg(long, value_parser = parse_temporal_source)]
    itd_source: Option<biobp::trainer::TemporalSource>,
    /// Flat key=value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_rule(s: &str) -> Result<RuleKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_width(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("hidden widths must be positive".to_string()),
        Ok(w) => Ok(w),
        Err(_) => Err(format!("bad hidden width '{s}'")),
    }
}

fn parse_data_source(s: &str) -> Result<DataSource, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sampling(s: &str) -> Result<biobp::data::Sampling, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_temporal_source(s: &str) -> Result<biobp::trainer::TemporalSource, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct GradcheckArgs {
    /// Seed for the probe network and batch [default: 0]
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Central-difference step [default: 1e-5]
    #[arg(long, default_value_t = 1e-5)]
    h: f64,
}

#[derive(Args)]
struct SynthDataArgs {
    /// Training examples [default: 500]
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Test examples [default: n/5, at least the class count]
    #[arg(long)]
    test_n: Option<usize>,
    /// Classes [default: 10]
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Feature width (784 renders as 28x28 images) [default: 784]
    #[arg(long, default_value_t = 784)]
    d: usize,
    /// Seed [default: 1]
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory [default: $BIOBP_DATA_DIR, else ./data]
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Metrics CSV files (at least one)
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Column to plot against step [default: test_acc]
    #[arg(long, default_value = "test_acc")]
    column: String,
    /// Output SVG path [default: plot.svg]
    #[arg(long, default_value = "plot.svg")]
    out: PathBuf,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Param(_) | Error::ShapeMismatch { .. } | Error::Format(_) => EXIT_CONFIG,
        Error::Io(_)
        | Error::BadMagic { .. }
        | Error::Truncated { .. }
        | Error::LabelRange { .. }
        | Error::Pairing { .. } => EXIT_DATA,
        Error::NonFinite { .. } | Error::Degenerate(_) => EXIT_NUMERIC,
    }
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(err))
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Train(args) => cmd_train(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::SynthData(args) => cmd_synth_data(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn overrides_from(args: &RunArgs) -> Overrides {
    Overrides {
        rule: args.rule,
        lr: args.lr,
        steps: args.steps,
        batch: args.batch,
        hidden: args.hidden.clone(),
        seed: args.seed,
        data: args.data,
        data_dir: args.data_dir.clone(),
        out: args.out.clone(),
        eval_every: args.eval_every,
        align_every: args.align_every,
        sampling: args.sampling,
        itd_source: args.itd_source,
    }
}

/// Default shape of the in-memory synthetic source: MNIST-sized inputs and
/// the full class set, so the default 784-32-10 network applies unchanged.
const SYNTH_TRAIN_N: usize = 1000;
const SYNTH_TEST_N: usize = 200;

fn load_datasets(resolved: &Resolved) -> Result<(Dataset, Dataset), Error> {
    match resolved.data {
        DataSource::Mnist => {
            let dir = resolve_data_dir(resolved.data_dir.as_deref());
            load_mnist(&dir)
        }
        DataSource::Synth => synth_train_test(resolved.seed, SYNTH_TRAIN_N, SYNTH_TEST_N, 784, 10),
    }
}

fn cmd_train(args: RunArgs) -> ExitCode {
    let resolved = match config::resolve(overrides_from(&args), args.config.as_deref(), "metrics.csv")
    {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    println!("{}", resolved.echo_line());
    let (train_ds, test_ds) = match load_datasets(&resolved) {
        Ok(pair) => pair,
        Err(e) => return fail(&e),
    };
    let cfg = resolved.train_config(train_ds.width(), train_ds.classes);
    if let Err(e) = cfg.validate() {
        return fail(&e);
    }
    let started = Instant::now();
    let outcome = match train(&cfg, &train_ds, &test_ds) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    eprintln!(
        "trained {} for {} steps in {:.1}s",
        cfg.rule,
        cfg.steps,
        started.elapsed().as_secs_f64()
    );
    if let Err(e) = write_outcome(&resolved.out, &outcome.metrics, cfg.sizes.len() - 1) {
        return fail(&e);
    }
    let ckpt = resolved.out.with_extension("ckpt");
    if let Err(e) = outcome.mlp.save(&ckpt) {
        return fail(&e);
    }
    if let Some(last) = outcome.metrics.last() {
        println!(
            "final: step={} train_loss={:.6} test_loss={:.6} test_acc={:.4}",
            last.step, last.train_loss, last.test_loss, last.test_acc
        );
    }
    println!("wrote {} and {}", resolved.out.display(), ckpt.display());
    ExitCode::SUCCESS
}

fn write_outcome(
    path: &Path,
    rows: &[biobp::MetricsRow],
    layer_count: usize,
) -> Result<(), Error> {
    std::fs::write(path, to_csv(rows, layer_count)?)?;
    Ok(())
}

fn per_rule_path(combined: &Path, rule: RuleKind) -> PathBuf {
    let stem = combined
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "compare".to_string());
    let name = format!("{stem}-{}.csv", rule.tag());
    combined.with_file_name(name)
}

fn cmd_compare(args: RunArgs) -> ExitCode {
    let resolved = match config::resolve(overrides_from(&args), args.config.as_deref(), "compare.csv")
    {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    println!("{}", resolved.echo_line());
    let (train_ds, test_ds) = match load_datasets(&resolved) {
        Ok(pair) => pair,
        Err(e) => return fail(&e),
    };
    let cfg = resolved.train_config(train_ds.width(), train_ds.classes);
    if let Err(e) = cfg.validate() {
        return fail(&e);
    }
    let layer_count = cfg.sizes.len() - 1;
    let started = Instant::now();
    let results = run_compare(&cfg, &train_ds, &test_ds);
    eprintln!(
        "compare finished in {:.1}s",
        started.elapsed().as_secs_f64()
    );

    let mut combined = Vec::new();
    let mut failures = Vec::new();
    for (rule, result) in &results {
        match result {
            Ok(outcome) => {
                let path = per_rule_path(&resolved.out, *rule);
                if let Err(e) = write_outcome(&path, &outcome.metrics, layer_count) {
                    return fail(&e);
                }
                println!("wrote {}", path.display());
                combined.extend(outcome.metrics.iter().cloned());
            }
            Err(e) => {
                eprintln!("rule {rule} failed: {e}");
                failures.push(*rule);
            }
        }
    }
    if let Err(e) = write_outcome(&resolved.out, &combined, layer_count) {
        return fail(&e);
    }
    println!("wrote {}", resolved.out.display());
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    }
}

fn cmd_gradcheck(args: GradcheckArgs) -> ExitCode {
    match gradcheck(args.seed, args.h) {
        Ok(report) => {
            println!(
                "{} max_rel_err={:.3e} (threshold {:.0e}, h={:.0e}, seed {})",
                if report.pass { "PASS" } else { "FAIL" },
                report.max_rel_err,
                report.threshold,
                report.h,
                report.seed
            );
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NUMERIC)
            }
        }
        Err(e) => fail(&e),
    }
}

fn cmd_synth_data(args: SynthDataArgs) -> ExitCode {
    let dir = resolve_data_dir(args.data_dir.as_deref());
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return fail(&Error::Io(e));
    }
    let test_n = args
        .test_n
        .unwrap_or_else(|| (args.n / 5).max(args.classes));
    // Train and test share class centers (same seed), with independent noise.
    let sets = [
        (args.n, "synth-train", MNIST_FILES[0], MNIST_FILES[1]),
        (test_n, "synth-test", MNIST_FILES[2], MNIST_FILES[3]),
    ];
    for (n, noise_label, images_name, labels_name) in sets {
        let (images, labels) =
            match synth_image_set_labeled(args.seed, noise_label, n, args.d, args.classes) {
                Ok(pair) => pair,
                Err(e) => return fail(&e),
            };
        if let Err(e) = std::fs::write(dir.join(images_name), write_idx_images(&images)) {
            return fail(&Error::Io(e));
        }
        if let Err(e) = std::fs::write(dir.join(labels_name), write_idx_labels(&labels)) {
            return fail(&Error::Io(e));
        }
    }
    debug_assert!(mnist_available(&dir));
    println!(
        "wrote 4 IDX files to {} (train n={}, test n={}, d={}, classes={})",
        dir.display(),
        args.n,
        test_n,
        args.d,
        args.classes
    );
    ExitCode::SUCCESS
}

fn cmd_plot(args: PlotArgs) -> ExitCode {
    let mut tables = Vec::new();
    for path in &args.inputs {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return fail(&Error::Io(e)),
        };
        match CsvTable::parse(&text) {
            Ok(t) => tables.push(t),
            Err(e) => return fail(&e),
        }
    }
    match plot::render_chart(&tables, &args.column) {
        Ok(svg) => {
            if let Err(e) = std::fs::write(&args.out, svg) {
                return fail(&Error::Io(e));
            }
            println!("wrote {}", args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
