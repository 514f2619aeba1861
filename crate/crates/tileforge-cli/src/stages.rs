use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use tileforge::decorated::{
    default_extract_height, encode, extract, required_rect, DecoratedInstance, DecoratedInstanceDoc,
};
use tileforge::domino::{
    solve_rectangle, wang_to_domino, DominoFunctionDoc, DominoSet, DominoSetDoc, Rect, SolveOutcome, WangSetDoc,
    WangTileSet,
};
use tileforge::feq::program::{
    build_puzzle, chain_puzzle, decode_lines, decorated_puzzle, minimal_parameters, program_sudoku, SudokuProgramSpec,
    SudokuRuleDoc,
};
use tileforge::feq::{FeqError, FeqSystemDoc, Property, Quotient};
use tileforge::json::{parse, render, Versioned};
use tileforge::padic::gcd;
use tileforge::padic_sudoku::{PAdicRule, PAdicSolution, PAdicSolutionDoc, PAdicSolutionSpec};
use tileforge::render::{decorated_grid, padic_grid, to_ppm, to_svg, Ramp};
use tileforge::sudoku::{verify_window, Line, SudokuRule, Verdict, WindowReport};
use tileforge::tiling::{
    extract_function, feq_to_tiling, solve_tiling_periodic, verify_tiling, PeriodicSetDoc, TilingError, TilingOutcome,
    TilingSystem, TilingSystemDoc,
};

use crate::{Args, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Negative = 2,
    Budget = 3,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DominoSolutionDoc {
    pub schema: String,
    pub outcome: String,
    pub domino_fn: Option<DominoFunctionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReportDoc {
    pub schema: String,
    pub rows: [i64; 2],
    pub checked_lines: usize,
    pub failures: Vec<Line>,
    pub indeterminate: Vec<Line>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecodedLineDoc {
    pub i: i64,
    pub j: i64,
    pub sign: i64,
    pub digits: Vec<String>,
    pub member: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TileSolutionDoc {
    pub schema: String,
    pub outcome: String,
    pub periods: Vec<i64>,
    pub witness: Option<PeriodicSetDoc>,
    pub decoded_lines: Option<Vec<DecodedLineDoc>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoundtripReportDoc {
    pub schema: String,
    pub rect: Rect,
    pub rows: [i64; 2],
    pub c: i64,
    pub equal: bool,
    pub recovered: [i64; 3],
    pub expected: DominoFunctionDoc,
    pub extracted: Option<DominoFunctionDoc>,
    pub error: Option<String>,
}

fn schema_of(text: &str) -> Result<String> {
    let v: serde_json::Value = serde_json::from_str(text).context("malformed JSON")?;
    v.get("schema").and_then(|s| s.as_str()).map(str::to_string).ok_or_else(|| anyhow!("document has no schema field"))
}

fn write(args: &Args, text: &str) -> Result<()> {
    fs::write(&args.output, text).with_context(|| format!("writing {}", args.output.display()))
}

fn pair(v: &Option<Vec<i64>>, name: &str) -> Result<Option<[i64; 2]>> {
    match v.as_deref() {
        None => Ok(None),
        Some([a, b]) if a <= b => Ok(Some([*a, *b])),
        Some(_) => bail!("--{name} needs lo,hi with lo <= hi"),
    }
}

fn too_large(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<FeqError>(), Some(FeqError::TooLarge(_)))
        || matches!(
            e.downcast_ref::<TilingError>(),
            Some(TilingError::TooLarge(_) | TilingError::Feq(FeqError::TooLarge(_)))
        )
}

pub fn run(args: &Args) -> Result<Status> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let out = match args.stage {
        Stage::Wang2domino => wang2domino(args, &text),
        Stage::DominoSolve => domino_solve(args, &text),
        Stage::Domino2sudoku => domino2sudoku(args, &text),
        Stage::SudokuVerify => sudoku_verify(args, &text),
        Stage::Sudoku2feq => sudoku2feq(args, &text),
        Stage::Feq2tiling => feq2tiling(args, &text),
        Stage::TileSolve => tile_solve(args, &text),
        Stage::Roundtrip => roundtrip(args, &text),
        Stage::Render => render_stage(args, &text),
    };
    match out {
        Err(e) if too_large(&e) => {
            eprintln!("tileforge: {e}");
            Ok(Status::Budget)
        }
        other => other,
    }
}

fn wang2domino(args: &Args, text: &str) -> Result<Status> {
    let w = WangTileSet::from_json(parse::<WangSetDoc>(text)?)?;
    let d = wang_to_domino(&w)?;
    write(args, &render(&d.to_json()))?;
    Ok(Status::Ok)
}

fn domino_solve(args: &Args, text: &str) -> Result<Status> {
    let d = DominoSet::from_json(parse::<DominoSetDoc>(text)?)?;
    let r = match args.rect.as_deref() {
        Some(&[x0, y0, x1, y1]) => Rect::new((x0, y0), (x1, y1))?,
        _ => bail!("domino-solve needs --rect x0,y0,x1,y1"),
    };
    let (outcome, f, status) = match solve_rectangle(&d, r, args.budget) {
        SolveOutcome::Solution(f) => ("solution", Some(DominoFunctionDoc::from_fn(&f)?), Status::Ok),
        SolveOutcome::Unsolvable => ("unsolvable", None, Status::Negative),
        SolveOutcome::BudgetExhausted => ("budgetExhausted", None, Status::Budget),
    };
    let doc = DominoSolutionDoc { schema: "domino-solution.v1".into(), outcome: outcome.into(), domino_fn: f };
    write(args, &json(&doc))?;
    Ok(status)
}

fn json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

fn domino2sudoku(args: &Args, text: &str) -> Result<Status> {
    let d = DominoSet::from_json(parse::<DominoSetDoc>(text)?)?;
    let doc = match args.toy_width {
        Some(w) => chain_puzzle(&d, w)?,
        None => {
            let (Some(p1), Some(p2)) = (args.p1, args.p2) else {
                bail!("domino2sudoku needs --p1 and --p2 (or --toy-width)");
            };
            let doc = decorated_puzzle(&d, p1, p2);
            build_puzzle(&doc.rule, &doc.ic)?;
            doc
        }
    };
    write(args, &render(&doc))?;
    Ok(Status::Ok)
}

fn report_status(r: &WindowReport) -> Status {
    if !r.failures.is_empty() {
        Status::Negative
    } else if !r.indeterminate.is_empty() {
        Status::Budget
    } else {
        Status::Ok
    }
}

fn padic_solution(args: &Args, text: &str) -> Result<PAdicSolution> {
    let spec = PAdicSolutionSpec::from_json(parse::<PAdicSolutionDoc>(text)?)?;
    let width = args.width.unwrap_or((spec.p * spec.p).max(1) as usize);
    Ok(PAdicSolution::new(spec, width)?)
}

fn sudoku_verify(args: &Args, text: &str) -> Result<Status> {
    let schema = schema_of(text)?;
    let (rows, report) = if schema == PAdicSolutionDoc::SCHEMA {
        let sol = padic_solution(args, text)?;
        let rows = pair(&args.rows, "rows")?.unwrap_or([0, 3 * sol.width as i64 - 1]);
        let rule = PAdicRule::new(sol.p.get(), sol.width)?;
        (rows, verify_window(&rule, &sol.window(rows[0], rows[1]))?)
    } else if schema == DecoratedInstanceDoc::SCHEMA {
        let inst = DecoratedInstance::from_json(parse(text)?)?;
        let (p1, p2) = (inst.rule.p1().get(), inst.rule.p2().get());
        let rows = pair(&args.rows, "rows")?.unwrap_or([0, 3 * p1 * p2 - 1]);
        let w = encode(&inst.spec, &inst.rule)?.window(rows[0], rows[1])?;
        (rows, verify_window(&inst.rule, &w)?)
    } else {
        bail!("sudoku-verify reads {} or {}, found {schema:?}", PAdicSolutionDoc::SCHEMA, DecoratedInstanceDoc::SCHEMA);
    };
    let doc = VerifyReportDoc {
        schema: "verify-report.v1".into(),
        rows,
        checked_lines: report.checked_lines,
        failures: report.failures.clone(),
        indeterminate: report.indeterminate.clone(),
    };
    write(args, &json(&doc))?;
    Ok(report_status(&report))
}

fn sudoku2feq(args: &Args, text: &str) -> Result<Status> {
    let doc: SudokuRuleDoc = parse(text)?;
    let built = build_puzzle(&doc.rule, &doc.ic)?;
    let (s0, l) = minimal_parameters(&built);
    let s0 = args.s0.unwrap_or(s0);
    let l = args.l.unwrap_or(if args.s0.is_some() { 4 * (s0 * built.width) as i64 + 5 } else { l });
    let p = program_sudoku(&SudokuProgramSpec { rule: doc.rule, ic: doc.ic, s0, l })?;
    write(args, &render(&p.to_doc()))?;
    Ok(Status::Ok)
}

fn feq2tiling(args: &Args, text: &str) -> Result<Status> {
    let p = Property::from_doc(parse::<FeqSystemDoc>(text)?)?;
    let sys = feq_to_tiling(&p)?;
    write(args, &render(&sys.to_doc()))?;
    Ok(Status::Ok)
}

fn tile_solve(args: &Args, text: &str) -> Result<Status> {
    let sys = TilingSystem::from_doc(parse::<TilingSystemDoc>(text)?)?;
    let periods = args.periods.clone().unwrap_or_else(|| vec![1; sys.base.free_rank]);
    let outcome = solve_tiling_periodic(&sys, &periods, args.budget)?;
    let mut doc = TileSolutionDoc {
        schema: "tile-solution.v1".into(),
        outcome: String::new(),
        periods: periods.clone(),
        witness: None,
        decoded_lines: None,
    };
    let status = match outcome {
        TilingOutcome::Witness(a) => {
            let report = verify_tiling(&a, &sys)?;
            if !report.passed() {
                bail!("internal: witness fails verification at {} points", report.failures.len());
            }
            if let Some(program) = &sys.program {
                let alpha = extract_function(&a, &sys.base, &sys.fiber)?;
                let q = Quotient::new(&sys.base, &periods)?;
                let lines = decode_lines(program, &q, &alpha)?;
                doc.decoded_lines = Some(
                    lines
                        .into_iter()
                        .map(|l| DecodedLineDoc {
                            i: l.i,
                            j: l.j,
                            sign: l.sign,
                            digits: l.digits,
                            member: l.verdict == Verdict::Member,
                        })
                        .collect(),
                );
            }
            doc.outcome = "witness".into();
            doc.witness = Some(a.to_doc());
            Status::Ok
        }
        TilingOutcome::NoPeriodicWitness => {
            doc.outcome = "noPeriodicWitness".into();
            Status::Negative
        }
        TilingOutcome::BudgetExhausted => {
            doc.outcome = "budgetExhausted".into();
            Status::Budget
        }
    };
    write(args, &json(&doc))?;
    Ok(status)
}

/// Largest extraction rectangle whose default window stays inside the
/// instance's domino function.
fn pick_rect(inst: &DecoratedInstance) -> Result<((u32, u32), i64)> {
    let (p1, p2) = (inst.rule.p1().get(), inst.rule.p2().get());
    let have = inst.spec.domino_fn.rect;
    if have.lo != (0, 0) {
        bail!("domino function must start at (0, 0)");
    }
    let width = inst.rule.width() as i64;
    let mut cands: Vec<(u32, u32)> =
        (0..=have.hi.0 as u32).flat_map(|a| (0..=have.hi.1 as u32).map(move |b| (a, b))).collect();
    cands.sort_by_key(|&(a, b)| (std::cmp::Reverse(a + b), a, b));
    for r in cands {
        let h = default_extract_height(p1, p2, r);
        if h.saturating_mul(width) > 5_000_000 {
            continue;
        }
        let s = &inst.spec;
        let need = required_rect(p1, p2, width as usize, s.c, s.d, s.e, 0, h - 1)?;
        if have.contains_rect(&need) {
            return Ok((r, h));
        }
    }
    bail!("the domino function does not cover the window needed for extraction")
}

fn roundtrip(args: &Args, text: &str) -> Result<Status> {
    let mut inst = DecoratedInstance::from_json(parse(text)?)?;
    if let Some(seed) = args.seed {
        let q = inst.rule.p1().get() * inst.rule.p2().get();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        inst.spec.c = loop {
            let c = rng.gen_range(1..q * q);
            if gcd(c, q) == 1 {
                break c;
            }
        };
    }
    let (r, h) = pick_rect(&inst)?;
    let w = encode(&inst.spec, &inst.rule)?.window(0, h - 1)?;
    let rect = Rect::new((0, 0), (r.0 as i64, r.1 as i64))?;
    let expected = tileforge::domino::DominoFunction {
        rect,
        values: rect.cells().map(|s| (s, inst.spec.domino_fn.get(s).unwrap_or_default().to_string())).collect(),
    };
    let mut doc = RoundtripReportDoc {
        schema: "roundtrip-report.v1".into(),
        rect,
        rows: [0, h - 1],
        c: inst.spec.c,
        equal: false,
        recovered: [0; 3],
        expected: DominoFunctionDoc::from_fn(&expected)?,
        extracted: None,
        error: None,
    };
    match extract(&w, &inst.rule, r) {
        Ok(x) => {
            doc.equal = x.tiling == expected;
            doc.recovered = [x.c, x.d, x.e];
            doc.extracted = Some(DominoFunctionDoc::from_fn(&x.tiling)?);
        }
        Err(e) => doc.error = Some(e.to_string()),
    }
    write(args, &json(&doc))?;
    Ok(if doc.equal { Status::Ok } else { Status::Negative })
}

fn render_stage(args: &Args, text: &str) -> Result<Status> {
    let schema = schema_of(text)?;
    let grid = if schema == PAdicSolutionDoc::SCHEMA {
        let sol = padic_solution(args, text)?;
        let rows = pair(&args.rows, "rows")?.unwrap_or([0, 3 * sol.width as i64 - 1]);
        let ramp = if sol.p.get() < 5 { Ramp::Warm } else { Ramp::Cool };
        padic_grid(&sol, ramp, rows[0], rows[1])
    } else if schema == DecoratedInstanceDoc::SCHEMA {
        let inst = DecoratedInstance::from_json(parse(text)?)?;
        let (p1, p2) = (inst.rule.p1().get(), inst.rule.p2().get());
        let rows = pair(&args.rows, "rows")?.unwrap_or([0, 2 * p1 * p2 - 1]);
        decorated_grid(&encode(&inst.spec, &inst.rule)?, &inst.rule, rows[0], rows[1])?
    } else {
        bail!("render reads {} or {}, found {schema:?}", PAdicSolutionDoc::SCHEMA, DecoratedInstanceDoc::SCHEMA);
    };
    let ppm = args.output.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
    if ppm {
        fs::write(&args.output, to_ppm(&grid, args.scale))?;
    } else {
        write(args, &to_svg(&grid))?;
    }
    Ok(Status::Ok)
}
