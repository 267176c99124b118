use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nlts::io::{read_series_csv, read_series_dir, series_id, write_json, write_report_json};
use nlts::monitor::{batch_run, detect_shifts_detailed};
use nlts::wedge::{objective_profile_data, refinement_profile_data, render_wedge, write_wedge_tsv, WedgeScaling};
use nlts::{Error, LtsOptions, ModelSpec, OutlierRule, WedgeMatrix};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "nlts", version, about = "Robust level-shift and outlier detection for seasonal series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyse one series.
    Fit(FitArgs),
    /// Analyse every *.csv file of a directory.
    Batch(BatchArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Trend polynomial degree.
    #[arg(long = "A", default_value_t = 1)]
    a: usize,
    /// Number of harmonics.
    #[arg(long = "B", default_value_t = 2)]
    b: usize,
    /// Amplitude polynomial degree.
    #[arg(long = "G", default_value_t = 1)]
    g: usize,
    #[arg(long, default_value_t = 12)]
    period: usize,
    /// Subset size as a fraction of the series length.
    #[arg(long, default_value_t = 0.75)]
    h_frac: f64,
    /// Elemental trials per candidate shift position.
    #[arg(long, default_value_t = 250)]
    nsamp: usize,
    #[arg(long, default_value_t = 10)]
    nbest: usize,
    /// Candidate positions are margin+1..=T-margin [default: max(3, T/20)].
    #[arg(long)]
    margin: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    huber_b: f64,
    /// Width of the shift refinement window.
    #[arg(long, default_value_t = 15)]
    window: usize,
    #[arg(long, default_value_t = 0.99)]
    conf: f64,
    #[arg(long, value_enum, default_value_t = RuleArg::Fixed)]
    outlier_rule: RuleArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of shifts found by repeated undo-and-refit passes.
    #[arg(long, default_value_t = 3)]
    max_shifts: usize,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy)]
enum RuleArg {
    Fixed,
    Adaptive,
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        ModelSpec::new(self.a, self.b, self.g).with_period(self.period)
    }

    fn options(&self) -> LtsOptions {
        LtsOptions {
            h_frac: self.h_frac,
            trials: self.nsamp,
            nbest: self.nbest,
            margin: self.margin,
            huber_b: self.huber_b,
            window_width: self.window,
            conf_level: self.conf,
            outlier_rule: match self.outlier_rule {
                RuleArg::Fixed => OutlierRule::FixedQuantile,
                RuleArg::Adaptive => OutlierRule::Adaptive,
            },
            seed: self.seed,
            ..LtsOptions::default()
        }
    }

    fn validate(&self) -> nlts::Result<()> {
        self.spec().validate()?;
        self.options().validate()?;
        if self.max_shifts == 0 {
            return Err(Error::InvalidOptions("--max-shifts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Wedge plot of the first pass (SVG); a .tsv dump is written alongside.
    #[arg(long)]
    wedge: Option<PathBuf>,
    /// Objective and refinement profiles of the first pass (JSON).
    #[arg(long)]
    profiles: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BatchArgs {
    #[arg(long)]
    input_dir: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(serde::Serialize)]
struct Profiles {
    objective: nlts::wedge::ObjectiveProfile,
    refinement: Option<nlts::wedge::RefinementPlot>,
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

fn run_fit(args: FitArgs) -> Result<(), Error> {
    args.model.validate()?;
    let series = read_series_csv(&args.input)?;
    let spec = args.model.spec();
    let opts = args.model.options();
    let id = series_id(&args.input);
    let d = detect_shifts_detailed(&id, series.values(), &spec, &opts, args.model.max_shifts)?;
    let first = &d.passes[0];

    if let Some(path) = &args.wedge {
        if spec.shift {
            let w = WedgeMatrix::from_fit(first, WedgeScaling::default())?;
            render_wedge(&w, path)?;
            write_wedge_tsv(&w, &path.with_extension("tsv"))?;
        }
    }
    if let Some(path) = &args.profiles {
        let p = Profiles {
            objective: objective_profile_data(&first.objective_profile()),
            refinement: refinement_profile_data(&first.refinement_profile).ok(),
        };
        write_json(&p, path)?;
    }
    match &args.out {
        Some(path) => write_report_json(&d.report, path)?,
        None => print!("{}", nlts::io::to_json(&d.report)?),
    }
    for w in &d.report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn run_batch(args: BatchArgs) -> Result<ExitCode, Error> {
    args.model.validate()?;
    if !args.input_dir.is_dir() {
        return Err(Error::InvalidInput(format!(
            "{} is not a directory",
            args.input_dir.display()
        )));
    }
    let inputs = read_series_dir(&args.input_dir)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| io_error(&args.out_dir, e))?;
    let out = batch_run(
        inputs,
        &args.model.spec(),
        &args.model.options(),
        args.model.max_shifts,
        args.jobs,
    )?;
    for r in &out.reports {
        write_report_json(r, &args.out_dir.join(format!("{}.json", r.series_id)))?;
    }
    write_json(&out.summary, &args.out_dir.join("summary.json"))?;
    for f in &out.summary.failed {
        eprintln!("warning: {}: {}", f.series_id, f.error);
    }
    let s = &out.summary;
    eprintln!(
        "{} series, {} ok, {} failed, {} with shifts",
        s.series, s.succeeded, s.failures, s.with_shifts
    );
    if s.series > 0 && s.succeeded == 0 {
        return Ok(ExitCode::from(EXIT_NUMERICAL));
    }
    Ok(ExitCode::SUCCESS)
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Fit(a) => run_fit(a).map(|_| ExitCode::SUCCESS),
        Command::Batch(a) => run_batch(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
