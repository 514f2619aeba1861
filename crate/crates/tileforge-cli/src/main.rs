mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Wang2domino,
    DominoSolve,
    Domino2sudoku,
    SudokuVerify,
    Sudoku2feq,
    Feq2tiling,
    TileSolve,
    Roundtrip,
    Render,
}

/// Compiler stages from Wang tiles to tiling equations.
///
/// Exit codes: 0 success, 1 malformed input or invalid parameters,
/// 2 unsolvable / no witness / check failed, 3 budget exhausted.
#[derive(Debug, Parser)]
#[command(name = "tileforge", version)]
pub struct Args {
    pub stage: Stage,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
    #[arg(long)]
    pub p1: Option<i64>,
    #[arg(long)]
    pub p2: Option<i64>,
    #[arg(long)]
    pub s0: Option<usize>,
    #[arg(long = "L")]
    pub l: Option<i64>,
    /// Quotient periods, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub periods: Option<Vec<i64>>,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rectangle x0,y0,x1,y1 for domino-solve.
    #[arg(long, value_delimiter = ',')]
    pub rect: Option<Vec<i64>>,
    /// Window rows lo,hi for sudoku-verify and render.
    #[arg(long, value_delimiter = ',')]
    pub rows: Option<Vec<i64>>,
    /// Board width for p-adic solutions (default p²).
    #[arg(long)]
    pub width: Option<usize>,
    /// domino2sudoku: emit the chain puzzle of this width instead of S^R.
    #[arg(long)]
    pub toy_width: Option<usize>,
    /// render: pixels per cell in PPM output.
    #[arg(long, default_value_t = 8)]
    pub scale: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match stages::run(&args) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("tileforge: {e}");
            ExitCode::from(1)
        }
    }
}
