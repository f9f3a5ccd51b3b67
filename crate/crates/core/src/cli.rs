//! Command-line front end for the `vmf-kl` binary.
//!
//! [`run`] takes the argument vector and the two output streams and returns
//! the process exit code, so the whole CLI can be driven from tests.
//!
//! Exit codes: `0` success, `1` I/O failure while writing output, `2` bad
//! arguments or unreadable input files, `3` numerical-domain errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::divergence::{
    audit_grid, kl_upper_bound, row_to_json_value, rows_to_csv, rows_to_json, AuditRow, GridPoint,
    GridSpec, KlReport,
};
use crate::error::Error;
use crate::oracle::certify_rows;
use crate::special::{
    audit_identity, exp_integral_e, exp_integral_e_real, log_bessel_i, log_gamma,
    upper_incomplete_gamma_int,
};
use crate::vmf::{format_float, mean_resultant_length, SampleBatch, UnitVector, VmfDistribution};

/// Polar angle of the figure's mean directions, measured from `e₃`.
pub const FIGURE_POLAR_DEG: f64 = 60.0;
/// Azimuths of the figure's mean directions.
pub const FIGURE_AZIMUTHS_DEG: [f64; 3] = [0.0, 120.0, 240.0];
pub const FIGURE_KAPPAS: [f64; 3] = [1.0, 10.0, 100.0];
pub const FIGURE_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Pretty,
}

#[derive(Debug, Parser)]
#[command(name = "vmf-kl", version, about = "Von Mises-Fisher numerics and KL divergence audits")]
struct Cli {
    /// Output format for stdout (and for files without a .csv/.json extension).
    #[arg(long, value_enum, global = true, default_value = "pretty")]
    format: Format,

    /// Write the main artifact to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a special function.
    Special(SpecialArgs),
    /// KL divergence report for one pair of distributions.
    Kl(KlArgs),
    /// Closed-form upper bound for one pair of distributions.
    Bound(PairArgs),
    /// Draw points from a distribution.
    Sample(SampleArgs),
    /// Three d=3 point clouds with κ = 1, 10, 100.
    Figure,
    /// Evaluate a grid of parameter points.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SpecialFn {
    LogGamma,
    UpperIncompleteGamma,
    LogBesselI,
    ExpIntegralE,
    Identity,
}

#[derive(Debug, Args)]
struct SpecialArgs {
    #[arg(long = "fn", value_enum)]
    function: SpecialFn,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    z: Option<f64>,
    #[arg(long)]
    s: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    d: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, allow_negative_numbers = true)]
    kq: f64,
    #[arg(long, allow_negative_numbers = true)]
    kp: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    cos: f64,
}

#[derive(Debug, Args)]
struct KlArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Add a Monte Carlo estimate with this many draws.
    #[arg(long)]
    mc: Option<usize>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long)]
    n: usize,
    /// Mean direction as comma-separated coordinates (normalized); defaults to e₁.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    mu: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(long)]
    grid_spec: PathBuf,
    /// Also run the quadrature oracle on every row it supports.
    #[arg(long)]
    certify: bool,
}

enum CliError {
    Usage(String),
    Numeric(Error),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Numeric(e) => e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "vmf-kl: {}", e.message().replace('\n', " "));
            e.code()
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Special(a) => emit(cli, stdout, &Table::single(special(a)?)),
        Command::Kl(a) => {
            let (q, p) = pair(&a.pair)?;
            let mc = a.mc.map(|n| (n, cli.seed));
            let row = AuditRow::from_report(KlReport::new(&q, &p, mc)?)?;
            let text = match cli.format {
                Format::Csv => rows_to_csv(std::slice::from_ref(&row)),
                Format::Json => pretty_json(&row_to_json_value(&row)),
                Format::Pretty => pretty_csv(&rows_to_csv(std::slice::from_ref(&row))),
            };
            emit_text(cli, stdout, &text)
        }
        Command::Bound(a) => {
            let (q, p) = pair(a)?;
            let b = kl_upper_bound(&q, &p)?;
            let mut rec = Record::new();
            rec.int("d", a.d as u64)
                .num("kappa_q", a.kq)
                .num("kappa_p", a.kp)
                .num("cos_theta", a.cos)
                .num("bound", b.value)
                .opt_int("padded_dim", b.padded_dim().map(|d| d as u64));
            emit(cli, stdout, &Table::single(rec))
        }
        Command::Sample(a) => sample(cli, a, stdout),
        Command::Figure => figure(cli, stdout),
        Command::Audit(a) => audit(cli, a, stdout, stderr),
    }
}

fn pair(a: &PairArgs) -> CliResult<(VmfDistribution, VmfDistribution)> {
    let point = GridPoint {
        d: a.d,
        kappa_q: a.kq,
        kappa_p: a.kp,
        cos_theta: a.cos,
    };
    Ok(point.distributions()?)
}

fn require<T: Copy>(v: Option<T>, name: &str, function: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("--fn {function} requires --{name}")))
}

fn special(a: &SpecialArgs) -> CliResult<Record> {
    let mut rec = Record::new();
    match a.function {
        SpecialFn::LogGamma => {
            let x = require(a.z, "z", "log_gamma")?;
            rec.text("fn", "log_gamma").num("z", x).num("value", log_gamma(x)?);
        }
        SpecialFn::UpperIncompleteGamma => {
            let s = require(a.s, "s", "upper_incomplete_gamma")?;
            let z = require(a.z, "z", "upper_incomplete_gamma")?;
            rec.text("fn", "upper_incomplete_gamma")
                .int("s", s)
                .num("z", z)
                .num("value", upper_incomplete_gamma_int(s, z)?);
        }
        SpecialFn::LogBesselI => {
            let alpha = require(a.alpha, "alpha", "log_bessel_i")?;
            let z = require(a.z, "z", "log_bessel_i")?;
            let r = log_bessel_i(alpha, z)?;
            rec.text("fn", "log_bessel_i")
                .num("alpha", alpha)
                .num("z", z)
                .num("value", r.value)
                .text("branch", &r.branch.to_string());
        }
        SpecialFn::ExpIntegralE => {
            let alpha = require(a.alpha, "alpha", "exp_integral_e")?;
            let z = require(a.z, "z", "exp_integral_e")?;
            let value = if alpha.fract() == 0.0 && alpha.abs() < 1e15 {
                exp_integral_e(alpha as i64, z)?
            } else {
                exp_integral_e_real(alpha, z)?
            };
            rec.text("fn", "exp_integral_e")
                .num("alpha", alpha)
                .num("z", z)
                .num("value", value);
        }
        SpecialFn::Identity => {
            let d = require(a.d, "d", "identity")?;
            let kappa = require(a.kappa, "kappa", "identity")?;
            let r = audit_identity(d, kappa)?;
            rec.text("fn", "identity")
                .num("d", d)
                .num("kappa", kappa)
                .num("lhs", r.lhs)
                .num("rhs", r.rhs)
                .num("abs_diff", r.abs_diff)
                .num("rel_diff", r.rel_diff);
        }
    }
    Ok(rec)
}

/// Summary statistics printed alongside a written sample file.
pub fn batch_summary(batch: &SampleBatch) -> Map<String, Value> {
    let mut rec = Record::new();
    rec.int("n", batch.n() as u64)
        .int("dim", batch.dim() as u64)
        .int("seed", batch.seed)
        .num("kappa", batch.params.kappa())
        .nums("mean", &batch.mean_vector())
        .num("mean_resultant_length", batch.mean_resultant_length());
    rec.0
}

fn sample(cli: &Cli, a: &SampleArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mu = match &a.mu {
        Some(coords) => {
            if coords.len() != a.d {
                return Err(CliError::Usage(format!(
                    "--mu has {} coordinates but --d is {}",
                    coords.len(),
                    a.d
                )));
            }
            UnitVector::new(coords.clone())?
        }
        None => UnitVector::basis(a.d, 0)?,
    };
    let dist = VmfDistribution::new(mu, a.kappa)?;
    let batch = dist.sample(a.n, cli.seed)?;
    match &cli.out {
        Some(path) => {
            let text = match file_format(path, cli.format) {
                Format::Csv => batch.to_csv(),
                _ => batch.to_json(),
            };
            write_file(path, &text)?;
            print(stdout, &Table::single(Record(batch_summary(&batch))).render(cli.format))
        }
        None => {
            let text = match cli.format {
                Format::Csv => batch.to_csv(),
                Format::Json => batch.to_json(),
                Format::Pretty => pretty_json(&batch.to_json_value()),
            };
            emit_text(cli, stdout, &text)
        }
    }
}

/// Unit vector at the given polar angle from `e₃` and azimuth in the
/// `e₁e₂` plane, both in degrees.
pub fn figure_mean_direction(polar_deg: f64, azimuth_deg: f64) -> [f64; 3] {
    let (st, ct) = polar_deg.to_radians().sin_cos();
    let (sp, cp) = azimuth_deg.to_radians().sin_cos();
    [st * cp, st * sp, ct]
}

/// The three figure clouds; cloud `i` uses seed `seed XOR i`.
pub fn figure_batches(seed: u64) -> crate::error::Result<Vec<SampleBatch>> {
    FIGURE_KAPPAS
        .iter()
        .zip(FIGURE_AZIMUTHS_DEG)
        .enumerate()
        .map(|(i, (&kappa, az))| {
            let mu = UnitVector::new(figure_mean_direction(FIGURE_POLAR_DEG, az).to_vec())?;
            VmfDistribution::new(mu, kappa)?.sample(FIGURE_POINTS, seed ^ i as u64)
        })
        .collect()
}

/// `sqrt(−2 log R̄)`, the spread measure reported for each cloud.
pub fn circular_std(mean_resultant_length: f64) -> f64 {
    (-2.0 * mean_resultant_length.ln()).sqrt()
}

fn figure(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let batches = figure_batches(cli.seed)?;
    let bundle = match cli.out.as_deref().map_or(cli.format, |p| file_format(p, cli.format)) {
        Format::Csv => {
            let mut out = String::from("kind,kappa,x1,x2,x3\n");
            for b in &batches {
                let k = format_float(b.params.kappa());
                for p in &b.points {
                    let _ = writeln!(out, "point,{k},{}", join(p.coords()));
                }
            }
            for b in &batches {
                let k = format_float(b.params.kappa());
                let _ = writeln!(out, "mean,{k},{}", join(b.params.mu().coords()));
            }
            out
        }
        _ => {
            let clouds: Vec<Value> = batches.iter().map(SampleBatch::to_json_value).collect();
            serde_json::to_string(&json!({ "clouds": clouds })).expect("figure serializes") + "\n"
        }
    };
    let Some(path) = &cli.out else {
        return emit_text(cli, stdout, &bundle);
    };
    write_file(path, &bundle)?;
    let mut table = Table::default();
    for b in &batches {
        let r = b.mean_resultant_length();
        let mut rec = Record::new();
        rec.num("kappa", b.params.kappa())
            .int("seed", b.seed)
            .int("n", b.n() as u64)
            .nums("mu", b.params.mu().coords())
            .num("mean_resultant_length", r)
            .num("expected", mean_resultant_length(3, b.params.kappa())?)
            .num("circular_std", circular_std(r));
        table.push(rec);
    }
    print(stdout, &table.render(cli.format))
}

fn audit(cli: &Cli, a: &AuditArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let text = std::fs::read_to_string(&a.grid_spec)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.grid_spec.display())))?;
    let spec: GridSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid grid spec {}: {e}", a.grid_spec.display())))?;
    spec.validate().map_err(|e| CliError::Usage(format!("invalid grid spec: {e}")))?;
    let mut rows = audit_grid(&spec)?;
    let cert = if a.certify { Some(certify_rows(&mut rows)?) } else { None };

    let format = cli.out.as_deref().map_or(cli.format, |p| file_format(p, cli.format));
    let report = match format {
        Format::Csv => rows_to_csv(&rows),
        Format::Json => rows_to_json(&rows) + "\n",
        Format::Pretty => pretty_csv(&rows_to_csv(&rows)),
    };
    let flagged = rows.iter().filter(|r| !r.flags.is_empty()).count();
    let mut summary = format!("rows: {}, flagged: {flagged}", rows.len());
    for flag in [
        crate::divergence::flags::BOUND_BELOW_EXACT,
        crate::divergence::flags::COROLLARY_DEVIATES,
        crate::divergence::flags::MC_DISAGREES,
        crate::divergence::flags::ORACLE_MISMATCH,
        crate::divergence::flags::ERROR,
    ] {
        let n = rows.iter().filter(|r| r.has_flag(flag)).count();
        let _ = write!(summary, ", {flag}: {n}");
    }
    if let Some(c) = cert {
        let _ = write!(
            summary,
            ", certified: {} (max |quad - exact| {}), normalizations: {} (max dev {})",
            c.kl_checked,
            format_float(c.kl_max_abs_diff),
            c.normalizations_checked,
            format_float(c.normalization_max_abs_dev)
        );
    }
    summary.push('\n');
    match &cli.out {
        Some(path) => {
            write_file(path, &report)?;
            print(stdout, &summary)
        }
        None => {
            print(stdout, &report)?;
            print(stderr, &summary)
        }
    }
}

/// `.csv` and `.json` extensions pick the file format; anything else uses
/// `--format`, with `pretty` meaning JSON.
fn file_format(path: &Path, fallback: Format) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        _ if fallback == Format::Csv => Format::Csv,
        _ => Format::Json,
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(format!("write failed: {e}"))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(cli: &Cli, stdout: &mut dyn Write, table: &Table) -> CliResult<()> {
    print(stdout, &table.render(cli.format))
}

fn print(sink: &mut dyn Write, text: &str) -> CliResult<()> {
    sink.write_all(text.as_bytes()).map_err(io_err)
}

/// Writes to `--out` when given, otherwise to stdout.
fn emit_text(cli: &Cli, stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => write_file(path, text),
        None => print(stdout, text),
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| format_float(x)).collect::<Vec<_>>().join(",")
}

fn pretty_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

/// Single-row CSV becomes `key: value` lines; longer CSV becomes aligned
/// columns.
fn pretty_csv(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let mut out = String::new();
    if rows.len() == 2 {
        let width = rows[0].iter().map(|h| h.len()).max().unwrap_or(0);
        for (k, v) in rows[0].iter().zip(&rows[1]) {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        return out;
    }
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let cells: Vec<String> =
            row.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Ordered key/value record rendered as one CSV row, one JSON object, or
/// `key: value` lines.
#[derive(Debug, Clone, Default)]
struct Record(Map<String, Value>);

impl Record {
    fn new() -> Self {
        Record(Map::new())
    }

    fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.0.insert(key.into(), json!(v));
        self
    }

    fn nums(&mut self, key: &str, v: &[f64]) -> &mut Self {
        self.0.insert(key.into(), json!(v));
        self
    }

    fn int(&mut self, key: &str, v: u64) -> &mut Self {
        self.0.insert(key.into(), json!(v));
        self
    }

    fn opt_int(&mut self, key: &str, v: Option<u64>) -> &mut Self {
        self.0.insert(key.into(), json!(v));
        self
    }

    fn text(&mut self, key: &str, v: &str) -> &mut Self {
        self.0.insert(key.into(), json!(v));
        self
    }
}

/// CSV cell text for a JSON value. Arrays are joined with `;`.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (_, Some(i), _) => i.to_string(),
            (_, _, Some(f)) => format_float(f),
            _ => n.to_string(),
        },
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Default)]
struct Table {
    rows: Vec<Record>,
    single: bool,
}

impl Table {
    fn single(rec: Record) -> Self {
        Table {
            rows: vec![rec],
            single: true,
        }
    }

    fn push(&mut self, rec: Record) {
        self.rows.push(rec);
    }

    fn csv(&self) -> String {
        let Some(first) = self.rows.first() else {
            return String::new();
        };
        let mut out = first.0.keys().cloned().collect::<Vec<_>>().join(",");
        out.push('\n');
        for rec in &self.rows {
            out.push_str(&rec.0.values().map(cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json if self.single => pretty_json(&Value::Object(self.rows[0].0.clone())),
            Format::Json => pretty_json(&Value::Array(
                self.rows.iter().map(|r| Value::Object(r.0.clone())).collect(),
            )),
            Format::Pretty => pretty_csv(&self.csv()),
        }
    }
}
