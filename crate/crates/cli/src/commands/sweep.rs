use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use kws_core::audio_io::{LabelMap, Split};
use kws_core::model::param_count;
use kws_core::training::evaluate;

use super::say;
use super::train::{load_entries, set_dims, train_in, RunFlags};
use crate::error::{CliError, CliResult};

pub const SWEEP_FILE: &str = "sweep.csv";

/// One `(d_model, heads, layers)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub d_model: usize,
    pub heads: usize,
    pub layers: usize,
}

impl Cell {
    fn name(&self) -> String {
        format!("d{}_h{}_n{}", self.d_model, self.heads, self.layers)
    }
}

/// The 12-cell grid over d_model in {64, 96, 128}, h in {2, 4}, N in {1, 2}.
pub fn reference_grid() -> Vec<Cell> {
    let mut cells = Vec::new();
    for d_model in [64, 96, 128] {
        for layers in [1, 2] {
            for heads in [2, 4] {
                cells.push(Cell { d_model, heads, layers });
            }
        }
    }
    cells
}

/// Parses `DxHxN` cells separated by commas, e.g. `64x2x1,64x4x1`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<Cell>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|cell| {
            let parts: Vec<usize> = cell
                .split('x')
                .map(|p| p.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::usage(format!("bad grid cell `{cell}`, expected DxHxN")))?;
            match parts[..] {
                [d_model, heads, layers] => Ok(Cell { d_model, heads, layers }),
                _ => Err(CliError::usage(format!("bad grid cell `{cell}`, expected DxHxN"))),
            }
        })
        .collect()
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunFlags,
    /// Cells as DxHxN separated by commas, e.g. 64x2x1,64x4x1
    #[arg(long, conflicts_with = "preset")]
    pub grid: Option<String>,
    /// Named grid; `reference` is every combination of d_model 64/96/128, h 2/4, N 1/2
    #[arg(long)]
    pub preset: Option<String>,
}

struct Row {
    cell: Cell,
    params: usize,
    dev_acc: Option<f64>,
    test_acc: Option<f64>,
    status: String,
}

fn fmt_acc(acc: Option<f64>) -> String {
    acc.map_or_else(|| "-".into(), |a| format!("{a:.2}"))
}

pub fn run(args: SweepArgs, out: &mut dyn Write) -> CliResult {
    let cells = match (&args.grid, args.preset.as_deref()) {
        (Some(spec), _) => parse_grid(spec)?,
        (None, Some("reference")) => reference_grid(),
        (None, Some(other)) => return Err(CliError::usage(format!("unknown preset `{other}`"))),
        (None, None) => return Err(CliError::usage("give --grid or --preset")),
    };
    if cells.is_empty() {
        return Err(CliError::usage("the grid is empty"));
    }
    let base = args.run.resolve()?;
    let out_dir = base.paths.output.clone().ok_or_else(|| CliError::usage("give --out"))?;
    base.validate()?;
    let labels = LabelMap::standard();
    let entries = load_entries(&base, &labels)?;
    let test: Vec<_> = entries.iter().filter(|e| e.split == Split::Test).cloned().collect();

    let mut rows = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut config = base.clone();
        set_dims(&mut config.model, Some(cell.d_model), Some(cell.heads), Some(cell.layers));
        let params = if config.model.validate().is_ok() { param_count(&config.model) } else { 0 };
        say(out, format!("== cell {} ({params} parameters)", cell.name()))?;
        let cell_dir: PathBuf = out_dir.join(cell.name());
        let outcome = train_in(&config, &entries, &cell_dir, out).and_then(|report| {
            let test_acc = if test.is_empty() {
                None
            } else {
                Some(evaluate(&test, &report.checkpoint, &config.feature)?.accuracy)
            };
            Ok((report.best_dev_accuracy, test_acc))
        });
        let row = match outcome {
            Ok((dev, test_acc)) => Row { cell, params, dev_acc: Some(dev), test_acc, status: "ok".into() },
            Err(e) => {
                say(out, format!("cell {} failed: {e}", cell.name()))?;
                let status = format!("failed: {e}").replace(',', ";");
                Row { cell, params, dev_acc: None, test_acc: None, status }
            }
        };
        rows.push(row);
    }

    let mut csv = String::from("d_model,heads,layers,params,dev_acc,test_acc,status\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.cell.d_model,
            r.cell.heads,
            r.cell.layers,
            r.params,
            fmt_acc(r.dev_acc),
            fmt_acc(r.test_acc),
            r.status
        );
    }
    fs::create_dir_all(&out_dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join(SWEEP_FILE);
    fs::write(&csv_path, &csv).map_err(|e| CliError::usage(format!("cannot write {}: {e}", csv_path.display())))?;

    say(out, format!("{:>7} {:>5} {:>6} {:>9} {:>8} {:>8}  status", "d_model", "h", "N", "params", "dev_acc", "test_acc"))?;
    for r in &rows {
        say(
            out,
            format!(
                "{:>7} {:>5} {:>6} {:>8.1}K {:>8} {:>8}  {}",
                r.cell.d_model,
                r.cell.heads,
                r.cell.layers,
                r.params as f64 / 1000.0,
                fmt_acc(r.dev_acc),
                fmt_acc(r.test_acc),
                r.status
            ),
        )?;
    }
    say(out, format!("table -> {}", csv_path.display()))
}
