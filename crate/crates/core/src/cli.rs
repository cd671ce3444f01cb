//! The `simulate`, `fit` and `report` commands and their file formats.
//!
//! `records.csv` holds one row per (realization, selector) with columns
//! `rep,selector,lambda,df,loss,efficiency,flag`; the oracle appears as
//! selector `optimal`. Rows are grouped in scenario blocks, each opened by a
//! comment line such as
//!
//! ```text
//! # scenario design=exponential n=400 c=0.3 penalty=l1 d_n=6
//! ```
//!
//! Summaries are always computed from the records as written, so `report`
//! over a `simulate` output directory reproduces its summaries exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::config::SimConfig;
use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::generators::{PenaltyMode, Scenario};
use crate::harness::{
    run_scenario, summarize, OracleOutcome, OutcomeFlag, RealizationRecord, ScenarioSummary, SelectorOutcome,
    ORACLE_NAME,
};
use crate::linear::{fit_path_with, lambda_grid, sigma_tilde, CdOptions, DEFAULT_GRID_SIZE};
use crate::penalties::{convex_scad_a, PenaltyKind, SCAD_DEFAULT_A};
use crate::selectors::{cv_curve, gaussian_criterion, CvSpec, Model, Selector, SelectorScore};

pub const RECORDS_HEADER: &str = "rep,selector,lambda,df,loss,efficiency,flag";
pub const SUMMARY_HEADER: &str = "selector,n,c,penalty,median_efficiency,failures";
pub const DF_HEADER: &str = "selector,n,c,penalty,df_min,df_q1,df_median,df_q3,df_max";

/// `%.6g`-style formatting: six significant digits, `.` separator,
/// trailing zeros trimmed.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_f(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| Error::Data(format!("cannot parse number `{s}`"))),
    }
}

/// Identity of one scenario block in `records.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHeader {
    pub design: String,
    pub n: usize,
    pub c: f64,
    pub penalty: String,
    pub d_n: usize,
}

impl BlockHeader {
    fn from_scenario(s: &Scenario) -> Self {
        BlockHeader {
            design: s.design_kind.name().into(),
            n: s.n,
            c: s.c,
            penalty: s.penalty.name().into(),
            d_n: s.d_n(),
        }
    }

    fn line(&self) -> String {
        format!(
            "# scenario design={} n={} c={} penalty={} d_n={}",
            self.design,
            self.n,
            fmt_g(self.c),
            self.penalty,
            self.d_n
        )
    }

    fn parse(line: &str) -> Result<Self> {
        let rest = line.trim_start_matches('#').trim();
        let rest = rest
            .strip_prefix("scenario")
            .ok_or_else(|| Error::Data(format!("unrecognized block header `{line}`")))?;
        let mut fields = BTreeMap::new();
        for tok in rest.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Data(format!("malformed header token `{tok}`")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| fields.get(k).cloned().ok_or_else(|| Error::Data(format!("block header lacks `{k}`")));
        Ok(BlockHeader {
            design: get("design")?,
            n: get("n")?.parse().map_err(|_| Error::Data("bad n in block header".into()))?,
            c: parse_f(&get("c")?)?,
            penalty: get("penalty")?,
            d_n: get("d_n")?.parse().map_err(|_| Error::Data("bad d_n in block header".into()))?,
        })
    }
}

/// Records of one scenario together with its selector order.
#[derive(Debug, Clone)]
pub struct ScenarioBlock {
    pub header: BlockHeader,
    pub selectors: Vec<Selector>,
    pub records: Vec<RealizationRecord>,
}

fn write_row(out: &mut String, rep: usize, name: &str, lambda: f64, df: Option<usize>, loss: f64, eff: f64, flag: OutcomeFlag) {
    let df = df.map_or_else(|| "nan".to_string(), |d| d.to_string());
    let _ = writeln!(
        out,
        "{rep},{name},{},{df},{},{},{}",
        fmt_g(lambda),
        fmt_g(loss),
        fmt_g(eff),
        flag.name()
    );
}

/// Serializes blocks to `records.csv` text.
pub fn render_records(blocks: &[ScenarioBlock]) -> String {
    let mut out = String::new();
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    for block in blocks {
        out.push_str(&block.header.line());
        out.push('\n');
        for rec in &block.records {
            for o in &rec.outcomes {
                let df = (o.flag == OutcomeFlag::Ok).then_some(o.df);
                write_row(&mut out, rec.rep, o.selector.name(), o.lambda, df, o.loss, o.efficiency, o.flag);
            }
            match &rec.oracle {
                Some(or) => write_row(&mut out, rec.rep, ORACLE_NAME, or.lambda, Some(or.df), or.min_loss, 1.0, OutcomeFlag::Ok),
                None => write_row(&mut out, rec.rep, ORACLE_NAME, f64::NAN, None, f64::NAN, f64::NAN, OutcomeFlag::FitFailed),
            }
        }
    }
    out
}

/// Parses `records.csv` text. Rows before any block header form a block
/// with an unknown scenario.
pub fn parse_records(text: &str) -> Result<Vec<ScenarioBlock>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Data("records file is empty".into()))?;
    if header.trim() != RECORDS_HEADER {
        return Err(Error::Data(format!("unexpected records header `{header}`")));
    }
    let mut blocks: Vec<ScenarioBlock> = Vec::new();
    let unknown = || BlockHeader { design: "-".into(), n: 0, c: f64::NAN, penalty: "-".into(), d_n: 0 };
    for (lineno, line) in lines.enumerate() {
        if line.starts_with('#') {
            blocks.push(ScenarioBlock { header: BlockHeader::parse(line)?, selectors: vec![], records: vec![] });
            continue;
        }
        if blocks.is_empty() {
            blocks.push(ScenarioBlock { header: unknown(), selectors: vec![], records: vec![] });
        }
        let block = blocks.last_mut().expect("block exists");
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 7 {
            return Err(Error::Data(format!("records line {}: expected 7 cells, got {}", lineno + 2, cells.len())));
        }
        let rep: usize = cells[0].parse().map_err(|_| Error::Data(format!("bad rep `{}`", cells[0])))?;
        let lambda = parse_f(cells[2])?;
        let df = if cells[3] == "nan" {
            0
        } else {
            cells[3].parse().map_err(|_| Error::Data(format!("bad df `{}`", cells[3])))?
        };
        let loss = parse_f(cells[4])?;
        let efficiency = parse_f(cells[5])?;
        let flag = OutcomeFlag::parse(cells[6])?;
        if block.records.last().is_none_or(|r| r.rep != rep) {
            block.records.push(RealizationRecord {
                rep,
                outcomes: vec![],
                oracle: None,
                failure: None,
                lambda_max: f64::NAN,
                lambda_min: f64::NAN,
            });
        }
        let rec = block.records.last_mut().expect("record exists");
        if cells[1] == ORACLE_NAME {
            if flag == OutcomeFlag::Ok {
                rec.oracle = Some(OracleOutcome { lambda, df, min_loss: loss });
            } else {
                rec.failure = Some("fit failed".into());
            }
        } else {
            let selector: Selector = cells[1].parse()?;
            if !block.selectors.contains(&selector) {
                block.selectors.push(selector);
            }
            rec.outcomes.push(SelectorOutcome { selector, lambda, df, loss, efficiency, flag });
        }
    }
    if blocks.iter().all(|b| b.records.is_empty()) {
        return Err(Error::Data("records file holds no realizations".into()));
    }
    Ok(blocks)
}

fn summaries(blocks: &[ScenarioBlock]) -> Vec<(&BlockHeader, ScenarioSummary)> {
    blocks.iter().map(|b| (&b.header, summarize(&b.records, &b.selectors))).collect()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), fmt_g)
}

fn n_cell(h: &BlockHeader) -> String {
    if h.n == 0 {
        "-".into()
    } else {
        h.n.to_string()
    }
}

pub fn render_summary(blocks: &[ScenarioBlock]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for (h, s) in summaries(blocks) {
        // the oracle is summarized by the Min.Loss row of the text table
        for sel in s.selectors.iter().filter(|s| s.name != ORACLE_NAME) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                sel.name,
                n_cell(h),
                fmt_g(h.c),
                h.penalty,
                opt(sel.median_efficiency),
                sel.failures
            );
        }
    }
    out
}

pub fn render_df_quantiles(blocks: &[ScenarioBlock]) -> String {
    let mut out = String::from(DF_HEADER);
    out.push('\n');
    for (h, s) in summaries(blocks) {
        for sel in &s.selectors {
            let q: Vec<String> = match sel.df_quantiles {
                Some(q) => q.iter().map(|v| fmt_g(*v)).collect(),
                None => vec!["nan".into(); 5],
            };
            let _ = writeln!(out, "{},{},{},{},{}", sel.name, n_cell(h), fmt_g(h.c), h.penalty, q.join(","));
        }
    }
    out
}

fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|j| rows.iter().filter_map(|r| r.get(j)).map(|c| c.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(j, c)| format!("{c:<w$}", w = widths[j])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Aligned text tables: one per (design, penalty), rows selector × n,
/// columns c, cells median efficiency; a `Min.Loss` line per n.
pub fn render_table(blocks: &[ScenarioBlock]) -> String {
    let sums = summaries(blocks);
    let mut groups: Vec<(String, String)> = Vec::new();
    for (h, _) in &sums {
        let key = (h.design.clone(), h.penalty.clone());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut out = String::new();
    for (design, penalty) in groups {
        let members: Vec<&(&BlockHeader, ScenarioSummary)> =
            sums.iter().filter(|(h, _)| h.design == design && h.penalty == penalty).collect();
        let mut cs: Vec<f64> = Vec::new();
        let mut ns: Vec<usize> = Vec::new();
        let mut names: Vec<String> = Vec::new();
        for (h, s) in &members {
            if !cs.iter().any(|c| c.to_bits() == h.c.to_bits()) {
                cs.push(h.c);
            }
            if !ns.contains(&h.n) {
                ns.push(h.n);
            }
            for sel in &s.selectors {
                if !names.contains(&sel.name) {
                    names.push(sel.name.clone());
                }
            }
        }
        let find = |n: usize, c: f64| members.iter().find(|(h, _)| h.n == n && h.c.to_bits() == c.to_bits()).map(|(_, s)| s);
        let _ = writeln!(out, "Median loss efficiency: design={design} penalty={penalty}");
        let mut rows = vec![std::iter::once("selector".to_string())
            .chain(std::iter::once("n".to_string()))
            .chain(cs.iter().map(|c| format!("c={}", fmt_g(*c))))
            .collect::<Vec<_>>()];
        for name in &names {
            for &n in &ns {
                let mut row = vec![name.clone(), if n == 0 { "-".into() } else { n.to_string() }];
                for &c in &cs {
                    row.push(find(n, c).and_then(|s| s.get(name)).map_or("-".into(), |x| opt(x.median_efficiency)));
                }
                rows.push(row);
            }
        }
        for &n in &ns {
            let mut row = vec!["Min.Loss".to_string(), if n == 0 { "-".into() } else { n.to_string() }];
            for &c in &cs {
                row.push(find(n, c).map_or("-".into(), |s| opt(s.median_min_loss)));
            }
            rows.push(row);
        }
        out.push_str(&align(&rows));
        out.push('\n');
    }
    out
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text).map_err(|e| Error::Io(format!("{}: {e}", dir.join(name).display())))
}

fn write_summaries(blocks: &[ScenarioBlock], out: &Path) -> Result<()> {
    write_file(out, "summary.csv", &render_summary(blocks))?;
    write_file(out, "df_quantiles.csv", &render_df_quantiles(blocks))?;
    write_file(out, "summary_table.txt", &render_table(blocks))?;
    Ok(())
}

/// Runs every scenario of `cfg` and writes `records.csv`, `summary.csv`,
/// `df_quantiles.csv`, `summary_table.txt` and `run_manifest.txt` to
/// `cfg.out`.
pub fn cmd_simulate(cfg: &SimConfig) -> Result<PathBuf> {
    let scenarios = cfg.scenarios()?;
    let out = PathBuf::from(&cfg.out);
    fs::create_dir_all(&out)?;
    let mut blocks = Vec::with_capacity(scenarios.len());
    let mut manifest = String::new();
    manifest.push_str(&format!("# penreg {} run manifest; usable as a config file\n", env!("CARGO_PKG_VERSION")));
    manifest.push_str(&cfg.serialize());
    for s in &scenarios {
        let run = run_scenario(s, cfg.workers)?;
        let lmax: Vec<f64> = run.records.iter().filter(|r| !r.failed()).map(|r| r.lambda_max).collect();
        let lmin: Vec<f64> = run.records.iter().filter(|r| !r.failed()).map(|r| r.lambda_min).collect();
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            format!("{}..{}", fmt_g(lo), fmt_g(hi))
        };
        let _ = writeln!(
            manifest,
            "# scenario design={} n={} c={} penalty={} d_n={} base_seed={} design_seed={} scad_a={} grid_size={} lambda_max={} lambda_min={} failed_reps={}",
            s.design_kind,
            s.n,
            fmt_g(s.c),
            s.penalty,
            s.d_n(),
            s.base_seed,
            s.design_seed,
            run.scad_a.map_or_else(|| "none".to_string(), fmt_g),
            s.grid_size,
            range(&lmax),
            range(&lmin),
            run.summary.failed_reps
        );
        eprintln!(
            "scenario {} n={} c={} penalty={}: {} reps, {} failed",
            s.design_kind,
            s.n,
            fmt_g(s.c),
            s.penalty,
            run.records.len(),
            run.summary.failed_reps
        );
        blocks.push(ScenarioBlock {
            header: BlockHeader::from_scenario(s),
            selectors: s.selectors.clone(),
            records: run.records,
        });
    }
    let records_text = render_records(&blocks);
    write_file(&out, "records.csv", &records_text)?;
    // summaries come from the records exactly as written
    let parsed = parse_records(&records_text)?;
    write_summaries(&parsed, &out)?;
    write_file(&out, "run_manifest.txt", &manifest)?;
    Ok(out)
}

/// Re-aggregates an existing `records.csv` into summaries under `out`.
pub fn cmd_report(records: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(records).map_err(|e| Error::Io(format!("{}: {e}", records.display())))?;
    let blocks = parse_records(&text)?;
    fs::create_dir_all(out)?;
    write_summaries(&blocks, out)
}

/// A numeric table read from CSV.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    pub target: String,
}

/// Reads a headed CSV of numbers; `target` becomes the response and every
/// other column a predictor.
pub fn read_dataset(path: &Path, target: &str) -> Result<DataSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let t = headers
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::Data(format!("target column `{target}` not found in {}", path.display())))?;
    if headers.len() < 2 {
        return Err(Error::Data("need at least one predictor column besides the target".into()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(headers.len());
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Data(format!("row {}, column `{}`: `{cell}` is not numeric", r + 2, headers[j]))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!("row {}, column `{}`: non-finite value", r + 2, headers[j])));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data("data file has no rows".into()));
    }
    let pred: Vec<usize> = (0..headers.len()).filter(|&j| j != t).collect();
    let x = DMatrix::from_fn(rows.len(), pred.len(), |i, k| rows[i][pred[k]]);
    let y = rows.iter().map(|r| r[t]).collect();
    Ok(DataSet { names: pred.iter().map(|&j| headers[j].clone()).collect(), x, y, target: target.to_string() })
}

/// Options for [`cmd_fit`].
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub data: PathBuf,
    pub target: String,
    pub penalties: Vec<PenaltyMode>,
    pub selectors: Vec<Selector>,
    pub out: PathBuf,
    pub seed: u64,
    pub grid_size: usize,
    pub cv_folds: usize,
}

/// Selection result of one row of the variable grid.
#[derive(Debug, Clone)]
pub struct FitSelection {
    pub penalty: PenaltyMode,
    /// Selector name; cross-validation runs are `cv10(1)` and `cv10(2)`.
    pub label: String,
    pub lambda: f64,
    pub df: usize,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

/// Fits every penalty on the full data, applies each selector, and writes
/// `selection_grid_<penalty>.csv`, `coefficients.csv` and `fit_manifest.txt`.
pub fn cmd_fit(cfg: &FitConfig) -> Result<Vec<FitSelection>> {
    let data = read_dataset(&cfg.data, &cfg.target)?;
    let design = DesignMatrix::with_names(data.x.clone(), true, data.names.clone())?;
    let n = design.nrows();
    let grid = lambda_grid(&design, &data.y, cfg.grid_size)?;
    let st = sigma_tilde(&design, &data.y).ok();
    fs::create_dir_all(&cfg.out)?;

    let mut manifest = String::new();
    let _ = writeln!(manifest, "# penreg {} fit manifest", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "data = {}", cfg.data.display());
    let _ = writeln!(manifest, "target = {}", cfg.target);
    let _ = writeln!(manifest, "n = {n}");
    let _ = writeln!(manifest, "d = {}", design.ncols());
    let _ = writeln!(manifest, "selectors = {}", cfg.selectors.iter().map(|s| s.name()).collect::<Vec<_>>().join(","));
    let _ = writeln!(manifest, "grid_size = {}", cfg.grid_size);
    let _ = writeln!(manifest, "lambda_max = {}", fmt_g(grid[0]));
    let _ = writeln!(manifest, "lambda_min = {}", fmt_g(*grid.last().expect("nonempty grid")));
    let _ = writeln!(manifest, "cv_seeds = {},{}", cfg.seed, cfg.seed.wrapping_add(1));
    let _ = writeln!(manifest, "sigma_tilde2 = {}", st.map_or_else(|| "unavailable".into(), fmt_g));
    let _ = writeln!(manifest, "loglik_note = Gaussian fits; no c(y) term involved");

    let mut results = Vec::new();
    for &mode in &cfg.penalties {
        let mut cd = CdOptions::default();
        let kind = match mode {
            PenaltyMode::L1 => PenaltyKind::L1,
            PenaltyMode::ScadAuto => PenaltyKind::scad(convex_scad_a(design.gram_min_eigenvalue())?)?,
            PenaltyMode::ScadFixed => {
                cd.allow_nonconvex = true;
                PenaltyKind::scad(SCAD_DEFAULT_A)?
            }
        };
        if let PenaltyKind::Scad { a } = kind {
            let _ = writeln!(manifest, "scad_a[{}] = {}", mode, fmt_g(a));
        }
        let fit = fit_path_with(&design, &data.y, kind, &grid, &cd)?;
        let mut picks: Vec<(String, Result<SelectorScore>)> = Vec::new();
        for &sel in &cfg.selectors {
            if sel == Selector::Cv10 {
                for (run, seed) in [(1, cfg.seed), (2, cfg.seed.wrapping_add(1))] {
                    let spec = CvSpec {
                        model: Model::Gaussian,
                        kind,
                        lambdas: &grid,
                        k: cfg.cv_folds,
                        seed,
                        cd,
                        irls: Default::default(),
                    };
                    let score = cv_curve(&design, &data.y, &spec)
                        .and_then(|v| SelectorScore::from_values(sel, v, &grid, &fit.df));
                    picks.push((format!("cv10({run})"), score));
                }
            } else {
                let score = gaussian_criterion(sel, &fit.sigma2_hat, &fit.df, n, st)
                    .and_then(|v| SelectorScore::from_values(sel, v, &grid, &fit.df));
                picks.push((sel.name().to_string(), score));
            }
        }
        let mut grid_csv = String::from("selector");
        for name in &data.names {
            grid_csv.push(',');
            grid_csv.push_str(name);
        }
        grid_csv.push('\n');
        for (label, score) in picks {
            match score {
                Ok(score) => {
                    let g = score.selected_index;
                    let slopes = fit.slopes(g);
                    grid_csv.push_str(&label);
                    for b in &slopes {
                        grid_csv.push(',');
                        if *b != 0.0 {
                            grid_csv.push('X');
                        }
                    }
                    grid_csv.push('\n');
                    results.push(FitSelection {
                        penalty: mode,
                        label,
                        lambda: score.selected_lambda,
                        df: score.selected_df,
                        intercept: fit.intercept(g),
                        coefficients: slopes,
                    });
                }
                Err(e) => {
                    let _ = writeln!(manifest, "unavailable[{mode}/{label}] = {e}");
                }
            }
        }
        write_file(&cfg.out, &format!("selection_grid_{mode}.csv"), &grid_csv)?;
    }

    let mut coef_csv = String::from("penalty,selector,lambda,df,intercept");
    for name in &data.names {
        coef_csv.push(',');
        coef_csv.push_str(name);
    }
    coef_csv.push('\n');
    for r in &results {
        let _ = write!(coef_csv, "{},{},{},{},{}", r.penalty, r.label, fmt_g(r.lambda), r.df, fmt_g(r.intercept));
        for b in &r.coefficients {
            let _ = write!(coef_csv, ",{}", fmt_g(*b));
        }
        coef_csv.push('\n');
    }
    write_file(&cfg.out, "coefficients.csv", &coef_csv)?;
    write_file(&cfg.out, "fit_manifest.txt", &manifest)?;
    Ok(results)
}

impl FitConfig {
    pub fn new(data: PathBuf, target: String, out: PathBuf) -> Self {
        FitConfig {
            data,
            target,
            penalties: vec![PenaltyMode::L1, PenaltyMode::ScadAuto, PenaltyMode::ScadFixed],
            selectors: Selector::ALL.to_vec(),
            out,
            seed: 1,
            grid_size: DEFAULT_GRID_SIZE,
            cv_folds: 10,
        }
    }
}
