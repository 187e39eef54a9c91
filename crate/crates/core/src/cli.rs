//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.
//! Every JSON document carries a `schema` field; CSV and pretty output start
//! with a `# schema: …` line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bmo::{bmo_discrepancy, default_search_level};
use crate::bounds::{self, BmoSettings, InverseSearchConfig};
use crate::discrepancy::{extreme_l2, extreme_l2_haar, star_l2, star_l2_haar, Measure};
use crate::error::{Error, Result};
use crate::haar::{self, level_boxes};
use crate::pointset::{load_pointset, Family, PointSet};
use crate::verify::{run_checks, Engine, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Rows above which `haar-dump` refuses to list every box.
pub const MAX_DUMP_ROWS: u64 = 1 << 20;

#[derive(Parser, Debug)]
#[command(name = "disclab", version, about = "Discrepancy of point sets in the unit cube")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "DISCLAB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a point set.
    Gen(GenArgs),
    /// Evaluate a discrepancy.
    Disc(DiscArgs),
    /// Run the self-check suite on a point set.
    Verify(VerifyArgs),
    /// Tables of bounds and empirical results.
    #[command(subcommand)]
    Report(ReportCommand),
    /// List Haar coefficients of the local discrepancy.
    HaarDump(HaarDumpArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PointFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MeasureArg {
    StarL2,
    ExtremeL2,
    Bmo,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::StarL2 => Measure::StarL2,
            MeasureArg::ExtremeL2 => Measure::ExtremeL2,
            MeasureArg::Bmo => Measure::BmoLower,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Random,
    Hammersley,
    Corner,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Random => Family::Random,
            FamilyArg::Hammersley => Family::Hammersley,
            FamilyArg::Corner => Family::Corner,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Haar,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PointFormat::Text)]
    format: PointFormat,
}

/// A point set from a file, or the empty set when only `--dim` is given.
#[derive(Args, Debug)]
struct InputArgs {
    /// Text (`.txt`, `-` for stdin) or JSON (`.json`) point set.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Dimension; required for empty input.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiscArgs {
    #[arg(long, value_enum)]
    measure: MeasureArg,
    #[command(flatten)]
    input: InputArgs,
    /// Star and extreme only; BMO always uses the Haar series.
    #[arg(long, value_enum, default_value_t = MethodArg::ClosedForm)]
    method: MethodArg,
    #[arg(long, default_value_t = 16)]
    haar_order: u32,
    /// Defaults to min(4, floor(20 / d)).
    #[arg(long)]
    search_level: Option<u32>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 16)]
    haar_order: u32,
    #[arg(long)]
    search_level: Option<u32>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Subcommand, Debug)]
enum ReportCommand {
    /// Lower bounds on the inverse for d = 1..dmax.
    Curse {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        dmax: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Discrepancy against (1 + ln N)^{(d-1)/2} / N.
    Roth {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        nlist: Vec<usize>,
        #[arg(long, value_enum, default_value_t = FamilyArg::Hammersley)]
        family: FamilyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        haar_order: u32,
        #[arg(long, default_value_t = 2)]
        search_level: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Lower bounds plus an empirical upper bound on the inverse.
    Inverse {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum)]
        measure: MeasureArg,
        #[arg(long, value_enum, default_value_t = FamilyArg::Hammersley)]
        family: FamilyArg,
        #[arg(long, default_value_t = 4096)]
        n_max: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        haar_order: u32,
        #[arg(long, default_value_t = 2)]
        search_level: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct HaarDumpArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Truncation order J.
    #[arg(long)]
    order: u32,
    /// Also include level -1 (whole axis) on each coordinate.
    #[arg(long)]
    star: bool,
    /// Only boxes that contain a point.
    #[arg(long)]
    occupied_only: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A rendered command result: a JSON document and the equivalent table.
struct Document {
    schema: &'static str,
    json: Value,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    notes: Vec<String>,
}

impl Document {
    fn new(schema: &'static str, body: impl Serialize) -> Self {
        let mut json = serde_json::to_value(body).expect("serializable");
        if let Value::Object(map) = &mut json {
            map.insert("schema".into(), Value::from(schema));
        }
        Self { schema, json, columns: Vec::new(), rows: Vec::new(), notes: Vec::new() }
    }

    /// One-row table from the scalar fields of the JSON body.
    fn record(mut self) -> Self {
        if let Value::Object(map) = &self.json {
            self.columns = map.keys().filter(|k| *k != "schema").cloned().collect();
            let row = self.columns.iter().map(|k| cell(&map[k])).collect();
            self.rows.push(row);
        }
        self
    }

    /// Table from an array of objects stored under `key`.
    fn table(mut self, key: &str) -> Self {
        let Some(Value::Array(items)) = self.json.get(key) else {
            return self;
        };
        if let Some(Value::Object(first)) = items.first() {
            self.columns = first.keys().cloned().collect();
        }
        self.rows = items
            .iter()
            .map(|item| self.columns.iter().map(|c| cell(&item[c])).collect())
            .collect();
        self
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("valid json");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = format!("# schema: {}\n", self.schema);
                for n in &self.notes {
                    s.push_str(&format!("# {n}\n"));
                }
                s + &to_csv(&self.columns, &self.rows)
            }
            Format::Pretty => {
                let mut s = format!("# schema: {}\n", self.schema);
                for n in &self.notes {
                    s.push_str(&format!("# {n}\n"));
                }
                s + &aligned(&self.columns, &self.rows)
            }
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

fn to_csv(columns: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 cells")
}

fn aligned(columns: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = columns.iter().map(|c| c.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(columns);
    for r in rows {
        s.push_str(&line(r));
    }
    s
}

fn emit(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::InvalidArgument(format!("cannot write output: {e}"))),
    }
}

fn read_points(args: &InputArgs) -> Result<PointSet> {
    let Some(path) = &args.input else {
        let dim = args
            .dim
            .ok_or_else(|| Error::InvalidArgument("pass --input, or --dim for the empty set".into()))?;
        return PointSet::empty(dim);
    };
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::InvalidArgument(format!("cannot read stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?
    };
    let points = if path.extension().is_some_and(|e| e == "json") {
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Format {
            line: e.line(),
            message: e.to_string(),
        })?;
        PointSet::from_json(&value)?
    } else {
        load_pointset(&text, args.dim)?
    };
    if let Some(d) = args.dim {
        if d != points.dim() {
            return Err(Error::InvalidArgument(format!(
                "--dim {d} disagrees with the input dimension {}",
                points.dim()
            )));
        }
    }
    Ok(points)
}

fn cmd_gen(args: &GenArgs, stdout: &mut dyn Write) -> Result<i32> {
    if args.dim == 0 {
        return Err(Error::InvalidArgument("--dim must be at least 1".into()));
    }
    let family = Family::from(args.family);
    let points = family.generate(args.n, args.dim, args.seed)?;
    let text = match args.format {
        PointFormat::Text => points.to_text(),
        PointFormat::Json => {
            let mut v = points.to_json();
            v["schema"] = Value::from("disclab.pointset/1");
            serde_json::to_string_pretty(&v).expect("valid json") + "\n"
        }
    };
    emit(&text, args.output.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn cmd_disc(args: &DiscArgs, stdout: &mut dyn Write) -> Result<i32> {
    let points = read_points(&args.input)?;
    let d = points.dim();
    let doc = match (args.measure, args.method) {
        (MeasureArg::Bmo, _) => {
            let level = args.search_level.unwrap_or_else(|| default_search_level(d));
            let est = bmo_discrepancy(&points, args.haar_order, level)?;
            Document::new("disclab.bmo/1", &est)
                .record()
                .note("value is a certified lower bound on the dyadic BMO seminorm")
        }
        (m, MethodArg::ClosedForm) => {
            let r = if m == MeasureArg::StarL2 { star_l2(&points) } else { extreme_l2(&points) };
            Document::new("disclab.discrepancy/1", &r).record()
        }
        (m, MethodArg::Haar) => {
            let r = if m == MeasureArg::StarL2 {
                star_l2_haar(&points, args.haar_order)?
            } else {
                extreme_l2_haar(&points, args.haar_order)?
            };
            Document::new("disclab.discrepancy/1", &r)
                .record()
                .note("squared <= true squared value <= squared + tail_bound")
        }
    };
    emit(&doc.render(args.out.format), args.out.output.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let points = read_points(&args.input)?;
    let mut config = VerifyConfig::for_dim(points.dim());
    config.max_order = args.haar_order;
    if let Some(l) = args.search_level {
        config.search_level = l;
    }
    config.mc_samples = args.samples;
    config.mc_seed = args.seed;
    let report = run_checks(&Engine, &points, &config);
    let doc = Document::new("disclab.verify/1", &report).table("checks");
    emit(&doc.render(args.out.format), args.out.output.as_deref(), stdout)?;
    let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        let _ = writeln!(stderr, "verification failed: {}", failed.join(", "));
    }
    Ok(report.exit_code())
}

const TRACTABILITY_NOTES: [&str; 3] = [
    "curse of dimensionality: N(eps, d) >= C (1 + gamma)^d for some eps, C, gamma > 0 and infinitely many d",
    "polynomial tractability: N(eps, d) <= C d^q eps^(-p) for all eps in (0, 1) and all d",
    "weak tractability: ln N(eps, d) / (d + 1/eps) -> 0 as d + 1/eps -> infinity",
];

fn cmd_report(command: &ReportCommand, stdout: &mut dyn Write) -> Result<i32> {
    let (doc, out) = match command {
        ReportCommand::Curse { eps, dmax, out } => {
            let rows = bounds::curse_table(*eps, *dmax)?;
            let mut doc = Document::new(
                "disclab.curse/1",
                json!({ "epsilon": eps, "annotations": TRACTABILITY_NOTES, "rows": rows }),
            )
            .table("rows");
            for n in TRACTABILITY_NOTES {
                doc = doc.note(n);
            }
            (doc, out)
        }
        ReportCommand::Roth { dim, nlist, family, seed, haar_order, search_level, out } => {
            let settings = BmoSettings { truncation_order: *haar_order, search_level: *search_level };
            let rows = bounds::roth_curve(*dim, nlist, (*family).into(), *seed, settings)?;
            let note = "ratios are empirical; no value of the Roth constant is asserted";
            let doc = Document::new(
                "disclab.roth/1",
                json!({
                    "dim": dim,
                    "family": Family::from(*family),
                    "truncation_order": haar_order,
                    "search_level": search_level,
                    "notes": [note],
                    "rows": rows,
                }),
            )
            .table("rows")
            .note(note);
            (doc, out)
        }
        ReportCommand::Inverse {
            eps,
            dim,
            measure,
            family,
            n_max,
            restarts,
            seed,
            haar_order,
            search_level,
            out,
        } => {
            let config = InverseSearchConfig {
                epsilon: *eps,
                dim: *dim,
                measure: (*measure).into(),
                family: (*family).into(),
                n_max: *n_max,
                restarts: *restarts,
                seed: *seed,
                bmo: BmoSettings { truncation_order: *haar_order, search_level: *search_level },
            };
            let report = bounds::inverse_report(&config)?;
            let mut doc = Document::new("disclab.inverse/1", &report);
            let notes = report.notes.clone();
            if let Value::Object(map) = &mut doc.json {
                let mut flat = map.clone();
                flat.remove("notes");
                flat.remove("schema");
                doc.columns = flat.keys().cloned().collect();
                doc.rows = vec![doc.columns.iter().map(|k| cell(&flat[k])).collect()];
            }
            for n in notes {
                doc = doc.note(n);
            }
            (doc, out)
        }
    };
    emit(&doc.render(out.format), out.output.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

/// Position vectors of every box on a level, first coordinate slowest.
fn all_positions(levels: &[i32]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &j in levels {
        let count = if j < 0 { 1 } else { 1u64 << j };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..count).map(move |m| {
                    let mut p = prefix.clone();
                    p.push(m);
                    p
                })
            })
            .collect();
    }
    out
}

fn cmd_haar_dump(args: &HaarDumpArgs, stdout: &mut dyn Write) -> Result<i32> {
    let points = read_points(&args.input)?;
    let levels = haar::levels_up_to(points.dim(), args.order, args.star);
    if !args.occupied_only {
        let rows: u64 = levels.iter().map(|l| 1u64 << haar::order(l).min(63)).fold(0, u64::saturating_add);
        if rows > MAX_DUMP_ROWS {
            return Err(Error::SearchTooLarge(format!(
                "{rows} coefficients exceed {MAX_DUMP_ROWS}; lower --order or pass --occupied-only"
            )));
        }
    }
    let mut body = Vec::new();
    for l in &levels {
        let boxes = level_boxes(&points, l)?;
        let b = boxes.volume_part;
        if args.occupied_only {
            for bx in &boxes.boxes {
                body.push(vec![join(l), join(&bx.positions), bx.counting_part.to_string(), b.to_string(), (bx.counting_part - b).to_string()]);
            }
        } else {
            let mut occupied = boxes.boxes.iter().peekable();
            for m in all_positions(l) {
                let a = match occupied.peek() {
                    Some(bx) if bx.positions == m => occupied.next().map_or(0.0, |bx| bx.counting_part),
                    _ => 0.0,
                };
                body.push(vec![join(l), join(&m), a.to_string(), b.to_string(), (a - b).to_string()]);
            }
        }
    }
    let tail = if args.star {
        haar::star_tail_bound(&points, args.order)?
    } else {
        haar::tail_bound(&points, args.order)?
    };
    body.push(vec!["tail_bound".into(), String::new(), String::new(), String::new(), tail.to_string()]);
    let columns: Vec<String> = ["j", "m", "counting_part", "volume_part", "value"].map(String::from).to_vec();
    let text = format!(
        "# schema: disclab.haar-dump/1\n# value = counting_part - volume_part; truncation order {}\n{}",
        args.order,
        to_csv(&columns, &body)
    );
    emit(&text, args.output.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, stdout),
        Command::Disc(a) => cmd_disc(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
        Command::Report(r) => cmd_report(r, stdout),
        Command::HaarDump(a) => cmd_haar_dump(a, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            let _ = writeln!(stderr, "error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker threads: {e}");
            return EXIT_USAGE;
        }
    };
    // output is buffered so the command can run inside the pool
    let (result, out, err) = pool.install(|| {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let result = dispatch(&cli, &mut out, &mut err);
        (result, out, err)
    });
    let _ = stdout.write_all(&out);
    let _ = stderr.write_all(&err);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["disclab"];
        full.extend(args);
        let code = run_with(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn empty_set_extreme() {
        let (code, out, _) = run_capture(&["disc", "--measure", "extreme-l2", "--dim", "1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema"], "disclab.discrepancy/1");
        assert!((v["value"].as_f64().unwrap() - 0.288675134594813).abs() < 1e-12);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_capture(&["gen", "--family", "random", "--n", "-1", "--dim", "2"]).0, 2);
        assert_eq!(run_capture(&["disc", "--measure", "nope", "--dim", "1"]).0, 2);
        assert_eq!(run_capture(&["disc", "--measure", "star-l2"]).0, 2);
        assert_eq!(run_capture(&["report", "curse", "--eps", "1.5", "--dmax", "3"]).0, 2);
        assert_eq!(run_capture(&["--threads", "0", "report", "curse", "--eps", "0.5", "--dmax", "3"]).0, 2);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("haar-dump"));
    }

    #[test]
    fn positions_cover_level() {
        let p = all_positions(&[1, -1, 2]);
        assert_eq!(p.len(), 8);
        assert_eq!(p[0], [0, 0, 0]);
        assert_eq!(p[7], [1, 0, 3]);
    }
}
