use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use toporeg_core::metrics::ValidityMask;
use toporeg_core::ScalarField;

use crate::diagram_file;
use crate::error::{CliError, Result};
use crate::fieldio::{read_field, read_fields, write_field, FieldFormat};
use crate::numfmt::format_g17;
use crate::ops::{self, OptimizeConfig, RegularizerWeights};

/// Super-level-set persistence diagrams and topological regularization of
/// image-shaped fields.
///
/// Fields are read from csv-grid (.csv), raw-f32 (.raw/.f32/.bin) or
/// pgm8 (.pgm) files. Several single-channel files given together are
/// stacked as channels.
#[derive(Parser, Debug)]
#[command(name = "toporeg", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the persistence diagram of a field and write it as CSV.
    Diagram(DiagramArgs),
    /// Report the topological penalty and total variation of a field.
    Loss(LossArgs),
    /// Simplify a field by gradient descent on the regularizers.
    Optimize(OptimizeArgs),
    /// Score a prediction against ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug)]
pub struct DiagramArgs {
    /// Input field file(s), or a single directory for batch mode.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Highest homology dimension (0 or 1).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub max_dim: u8,
    /// Filter the per-pixel channel norm even for one-channel input.
    #[arg(long)]
    pub project: bool,
    /// Drop non-essential pairs with persistence below this value from the output.
    #[arg(long, default_value_t = 0.0)]
    pub min_persistence: f64,
    /// Output CSV (a directory in batch mode). Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RegularizerArgs {
    /// Number of longest dimension-0 bars left unpenalized.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Weight of the total-variation term.
    #[arg(long, default_value_t = 1.0)]
    pub tv_weight: f64,
    /// Weight of the topological term.
    #[arg(long, default_value_t = 0.001)]
    pub top_weight: f64,
    /// Penalize the per-pixel channel norm even for one-channel input.
    #[arg(long)]
    pub project: bool,
}

impl RegularizerArgs {
    fn weights(&self) -> Result<RegularizerWeights> {
        for (name, v) in [("--tv-weight", self.tv_weight), ("--top-weight", self.top_weight)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(RegularizerWeights {
            k: self.k,
            tv: self.tv_weight,
            top: self.top_weight,
            project: self.project,
        })
    }
}

#[derive(Args, Debug)]
pub struct LossArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub reg: RegularizerArgs,
    /// Write the weighted gradient as raw-f32.
    #[arg(long)]
    pub grad_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub reg: RegularizerArgs,
    /// Number of descent steps.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Initial step size; halved whenever a step would raise the objective.
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    /// Where to write the optimized field.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-step CSV trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Depth,
    Seg,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    pub gt: PathBuf,
    pub pred: PathBuf,
    /// Validity mask; nonzero pixels are scored.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Task::Depth)]
    pub task: Task,
    /// Foreground threshold for segmentation.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Also write the metrics as `metric,value` CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn single_plane(path: &Path) -> Result<ScalarField> {
    read_field(path)?
        .as_scalar()
        .ok_or_else(|| CliError::format(path, "expected a single-channel field"))
}

fn diagram_csv(inputs: &[PathBuf], args: &DiagramArgs) -> Result<(String, [usize; 2])> {
    let field = read_fields(inputs)?;
    let dgm = ops::field_diagram(&field, args.project, args.max_dim as usize)?;
    let rows = diagram_file::rows(&dgm, args.min_persistence);
    let counts = [0, 1].map(|d| rows.iter().filter(|r| r.dim == d).count());
    Ok((diagram_file::to_csv(&rows), counts))
}

fn run_diagram(args: &DiagramArgs, out: &mut dyn Write) -> Result<()> {
    if let [dir] = args.inputs.as_slice() {
        if dir.is_dir() {
            return run_diagram_batch(dir, args, out);
        }
    }
    let (csv, counts) = diagram_csv(&args.inputs, args)?;
    match &args.out {
        Some(path) => {
            write_text(path, &csv)?;
            writeln!(out, "dim0 pairs: {}", counts[0]).map_err(stdout_err)?;
            if args.max_dim == 1 {
                writeln!(out, "dim1 pairs: {}", counts[1]).map_err(stdout_err)?;
            }
        }
        None => out.write_all(csv.as_bytes()).map_err(stdout_err)?,
    }
    Ok(())
}

fn run_diagram_batch(dir: &Path, args: &DiagramArgs, out: &mut dyn Write) -> Result<()> {
    let out_dir = args
        .out
        .as_ref()
        .ok_or_else(|| CliError::Usage("batch mode needs --out <directory>".into()))?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && FieldFormat::from_path(p).is_ok())
        .collect();
    files.sort();

    let results: Vec<Result<(String, [usize; 2])>> = files
        .par_iter()
        .map(|p| diagram_csv(std::slice::from_ref(p), args))
        .collect();
    for (path, result) in files.iter().zip(results) {
        let (csv, counts) = result?;
        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
        write_text(&out_dir.join(format!("{stem}.diagram.csv")), &csv)?;
        writeln!(out, "{}: dim0 {} dim1 {}", path.display(), counts[0], counts[1]).map_err(stdout_err)?;
    }
    Ok(())
}

fn run_loss(args: &LossArgs, out: &mut dyn Write) -> Result<()> {
    let field = read_fields(&args.inputs)?;
    let eval = ops::regularizer(&field, &args.reg.weights()?)?;
    let report = format!(
        "topo_penalty     {}\ntotal_variation  {}\nobjective        {}\n",
        format_g17(eval.topo),
        format_g17(eval.tv),
        format_g17(eval.objective)
    );
    out.write_all(report.as_bytes()).map_err(stdout_err)?;
    if let Some(path) = &args.grad_out {
        fs::write(path, crate::fieldio::encode_raw_f32(&eval.grad)).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

fn run_optimize(args: &OptimizeArgs, out: &mut dyn Write) -> Result<()> {
    let field = read_fields(&args.inputs)?;
    let cfg = OptimizeConfig {
        weights: args.reg.weights()?,
        steps: args.steps,
        lr: args.lr,
        ..OptimizeConfig::default()
    };
    writeln!(
        out,
        "stability bound: lr < {} (backtracking halves lr on any increase)",
        format_g17(cfg.stability_bound())
    )
    .map_err(stdout_err)?;
    let result = ops::optimize(&field, &cfg)?;
    write_field(&args.out, &result.field)?;
    if let Some(path) = &args.trace {
        let mut csv = String::from("step,topo,tv,objective,lr\n");
        for r in &result.trace {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                r.step,
                format_g17(r.topo),
                format_g17(r.tv),
                format_g17(r.objective),
                format_g17(r.lr)
            ));
        }
        write_text(path, &csv)?;
    }
    let (first, last) = (result.trace[0], result.trace[result.trace.len() - 1]);
    writeln!(
        out,
        "objective {} -> {} (topo {} -> {}, tv {} -> {})",
        format_g17(first.objective),
        format_g17(last.objective),
        format_g17(first.topo),
        format_g17(last.topo),
        format_g17(first.tv),
        format_g17(last.tv)
    )
    .map_err(stdout_err)?;
    Ok(())
}

fn run_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let gt = single_plane(&args.gt)?;
    let pred = single_plane(&args.pred)?;
    let eval = match args.task {
        Task::Depth => {
            let mask = match &args.mask {
                Some(p) => Some(ValidityMask::from_field(&single_plane(p)?)),
                None => None,
            };
            ops::evaluate_depth(&gt, &pred, mask.as_ref())?
        }
        Task::Seg => ops::evaluate_segmentation(&gt, &pred, args.threshold)?,
    };
    let rows = eval.rows();
    let mut text = String::new();
    for (name, v) in &rows {
        text.push_str(&format!("{name:<12}{}\n", format_g17(*v)));
    }
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    if let Some(path) = &args.csv {
        let mut csv = String::from("metric,value\n");
        for (name, v) in &rows {
            csv.push_str(&format!("{name},{}\n", format_g17(*v)));
        }
        write_text(path, &csv)?;
    }
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Diagram(a) => run_diagram(a, out),
        Command::Loss(a) => run_loss(a, out),
        Command::Optimize(a) => run_optimize(a, out),
        Command::Evaluate(a) => run_evaluate(a, out),
    }
}

/// Parse `args` and run, returning the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
