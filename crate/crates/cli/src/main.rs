//! `suplab`: command-line front end. Exit codes: 0 success, 1 domain error or
//! failed check, 2 usage error.

mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use suplab_core::amplifier::{amp_lower, amplifier, build_support};
use suplab_core::atkin_lehner::{al_reduce, check_gap};
use suplab_core::census::{census_by_det, parabolic_sum, parabolic_sum_truncated, EnumWindow};
use suplab_core::pretrace::spectral_residual;
use suplab_core::qseries::{
    catalog, deligne_violation, eta_expand, export_coeff_table, hecke_check, load_coeff_table, load_form,
    petersson_norm, EtaQuotient, HeckeReport, QSeries, DATA_DIR_ENV,
};
use suplab_core::scan::{fit_exponent, scan_sup, ScanGrid, ScanRect};
use suplab_core::HPoint;

use output::{fmt_f64, Sink};

/// Default number of coefficients loaded for a form.
const DEFAULT_TRUNC: usize = 2000;

#[derive(Parser, Serialize)]
#[command(name = "suplab", version, about = "Sup-norm numerics for newforms of square-free level")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Reduce a point into the Atkin-Lehner fundamental region (JSON).
    Reduce(ReduceArgs),
    /// Exact census of G_l(N) with |u| <= delta.
    ///
    /// CSV columns: z.x, z.y, N, l, delta, m_star, m_upper, m_parab, total.
    Census(CensusArgs),
    /// Parabolic sum over G_l(N) with certified tail (JSON).
    Parabolic(ParabolicArgs),
    /// Amplifier x and y tables for a form (JSON).
    Amplify(AmplifyArgs),
    /// Coefficient tables: expand, import, export, check.
    #[command(subcommand)]
    Form(FormCommand),
    /// Compare both sides of the pre-trace identity (JSON).
    PretraceCheck(PretraceArgs),
    /// Scan y^{k/2}|f| for its supremum (JSON ScanReport).
    Scan(ScanArgs),
    /// Scan several forms.
    ///
    /// CSV columns: N, k, sup, normalized_sup.
    ScanTable(ScanTableArgs),
    /// Fit ln sup = slope ln N + intercept to a scan-table CSV (JSON).
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Point {
    x: f64,
    y: f64,
}

impl Point {
    fn h(self) -> Result<HPoint> {
        Ok(HPoint::new(self.x, self.y)?)
    }
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated values, got {s:?}"))?;
    Ok((a.trim().into(), b.trim().into()))
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (a, b) = parse_pair(s)?;
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(Point { x: num(&a)?, y: num(&b)? })
}

#[derive(Debug, Clone, Copy, Serialize)]
struct GridSize {
    nx: usize,
    ny: usize,
}

fn parse_grid(s: &str) -> Result<GridSize, String> {
    let (a, b) = parse_pair(s)?;
    let num = |t: &str| t.parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok(GridSize { nx: num(&a)?, ny: num(&b)? })
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let p = parse_point(s)?;
    Ok((p.x, p.y))
}

#[derive(Args, Serialize)]
struct ReduceArgs {
    /// Point as x,y.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    z: Point,
    #[arg(long)]
    level: u64,
}

#[derive(Args, Serialize)]
struct CensusArgs {
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    z: Point,
    #[arg(long)]
    level: i64,
    /// Determinant, or the first one when --l-max is given.
    #[arg(long)]
    l: i64,
    /// Last determinant; one row per l in [l, l-max].
    #[arg(long)]
    l_max: Option<i64>,
    #[arg(long)]
    delta: f64,
}

#[derive(Args, Serialize)]
struct ParabolicArgs {
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    z: Point,
    #[arg(long)]
    level: u64,
    /// Determinant; must be a perfect square.
    #[arg(long)]
    l: i64,
    #[arg(long)]
    weight: u32,
    /// Certified tail tolerance; ignored with --t-max.
    #[arg(long, default_value_t = 1e-12)]
    tail_tol: f64,
    /// Fixed truncation of the cusp parameter.
    #[arg(long)]
    t_max: Option<f64>,
}

#[derive(Args, Serialize)]
#[group(id = "form_source", required = true, multiple = false)]
struct FormSel {
    /// Catalog form id.
    #[arg(long)]
    form: Option<String>,
    /// Coefficient table in the JSON table format.
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

#[derive(Args, Serialize)]
#[group(id = "optional_form_source", required = false, multiple = false)]
struct OptFormSel {
    /// Catalog form id (default: the catalog form of this level and weight).
    #[arg(long)]
    form: Option<String>,
    /// Coefficient table in the JSON table format.
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct AmplifyArgs {
    #[arg(long)]
    level: u64,
    /// Primes of the amplifier lie in [L, 2L).
    #[arg(long = "L")]
    #[serde(rename = "L")]
    big_l: f64,
    #[command(flatten)]
    source: FormSel,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FormCommand {
    /// Expand an eta quotient into a coefficient table.
    Expand {
        /// Factors d:e separated by commas, e.g. "1:24".
        #[arg(long)]
        eta: String,
        #[arg(long, default_value_t = 100)]
        trunc: usize,
    },
    /// Validate a coefficient table and print its canonical form.
    Import {
        #[arg(long)]
        coeffs: PathBuf,
    },
    /// Print a catalog form as a coefficient table.
    Export {
        #[arg(long)]
        form: String,
        #[arg(long, default_value_t = DEFAULT_TRUNC)]
        trunc: usize,
    },
    /// Hecke and Deligne checks (JSON); exit 1 when a check fails.
    Check(CheckArgs),
}

#[derive(Args, Serialize)]
#[group(id = "check_source", required = true, multiple = false)]
struct CheckSel {
    /// Factors d:e separated by commas, e.g. "1:24".
    #[arg(long)]
    eta: Option<String>,
    /// Catalog form id.
    #[arg(long)]
    form: Option<String>,
    /// Coefficient table in the JSON table format.
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CheckArgs {
    #[command(flatten)]
    source: CheckSel,
    #[arg(long, default_value_t = DEFAULT_TRUNC)]
    trunc: usize,
}

#[derive(Args, Serialize)]
struct PretraceArgs {
    #[arg(long)]
    level: u64,
    #[arg(long)]
    weight: u32,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    z: Point,
    #[arg(long, default_value_t = 40.0)]
    delta_max: f64,
    /// Relative tolerance of the Petersson norm.
    #[arg(long, default_value_t = 1e-4)]
    petersson_tol: f64,
    #[arg(long, default_value_t = DEFAULT_TRUNC)]
    trunc: usize,
    #[command(flatten)]
    source: OptFormSel,
}

#[derive(Args, Serialize)]
struct ScanOpts {
    /// Grid size as nx,ny.
    #[arg(long, value_parser = parse_grid, default_value = "96,96")]
    grid: GridSize,
    /// Refinement rounds.
    #[arg(long, default_value_t = 3)]
    refine: usize,
    /// Number of grid maxima refined.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long, default_value_t = DEFAULT_TRUNC)]
    trunc: usize,
}

impl ScanOpts {
    fn grid(&self) -> ScanGrid {
        ScanGrid { nx: self.grid.nx, ny: self.grid.ny, refine: self.refine, top: self.top }
    }
}

#[derive(Args, Serialize)]
struct ScanArgs {
    #[command(flatten)]
    source: FormSel,
    #[command(flatten)]
    opts: ScanOpts,
    /// x range as lo,hi (default 0,1).
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    x_range: Option<(f64, f64)>,
    /// Lower y edge (default √3/(2N)).
    #[arg(long)]
    y_lo: Option<f64>,
    /// Upper y edge (default: chosen from the Deligne majorant).
    #[arg(long)]
    y_hi: Option<f64>,
    /// Petersson norm to normalize by (default: computed).
    #[arg(long)]
    petersson: Option<f64>,
}

#[derive(Args, Serialize)]
struct ScanTableArgs {
    /// Catalog ids separated by commas (default: every catalog form with k > 2).
    #[arg(long, value_delimiter = ',')]
    forms: Vec<String>,
    #[command(flatten)]
    opts: ScanOpts,
}

#[derive(Args, Serialize)]
struct FitArgs {
    /// scan-table CSV; "-" reads standard input.
    #[arg(long, default_value = "-")]
    table: PathBuf,
    /// Column fitted against N.
    #[arg(long, default_value = "normalized_sup", value_parser = ["normalized_sup", "sup"])]
    column: String,
}

fn load_source(form: Option<&str>, coeffs: Option<&Path>, trunc: usize) -> Result<QSeries> {
    match (form, coeffs) {
        (_, Some(p)) => Ok(load_coeff_table(p).with_context(|| format!("loading {}", p.display()))?),
        (Some(id), None) => Ok(load_form(id, trunc)?),
        (None, None) => bail!("no form given"),
    }
}

fn reduce(a: &ReduceArgs) -> Result<Value> {
    let red = al_reduce(a.z.h()?, a.level)?.into_result()?;
    let gap = check_gap(red.z, a.level);
    Ok(json!({ "z": red.z, "moves": red.word.len(), "word": red.word, "gap": gap }))
}

fn census(a: &CensusArgs) -> Result<(Vec<&'static str>, Vec<Vec<String>>)> {
    let z = a.z.h()?;
    let l_max = a.l_max.unwrap_or(a.l);
    if l_max < a.l {
        return Err(suplab_core::Error::InvalidParameter("l-max must be at least l".into()).into());
    }
    for l in [a.l, l_max] {
        EnumWindow::new(z, a.level, l, a.delta)?;
    }
    let by_det = census_by_det(z, a.level, a.l, l_max, a.delta);
    let rows = (a.l..=l_max)
        .map(|l| {
            let s = by_det.get(&l).copied().unwrap_or_default();
            vec![
                fmt_f64(z.x),
                fmt_f64(z.y),
                a.level.to_string(),
                l.to_string(),
                fmt_f64(a.delta),
                s.m_star.to_string(),
                s.m_upper.to_string(),
                s.m_parab.to_string(),
                s.total().to_string(),
            ]
        })
        .collect();
    Ok((vec!["z.x", "z.y", "N", "l", "delta", "m_star", "m_upper", "m_parab", "total"], rows))
}

fn parabolic(a: &ParabolicArgs) -> Result<Value> {
    let z = a.z.h()?;
    let s = match a.t_max {
        Some(t) => parabolic_sum_truncated(z, a.level, a.l, a.weight, t)?,
        None => parabolic_sum(z, a.level, a.l, a.weight, a.tail_tol)?,
    };
    Ok(serde_json::to_value(s)?)
}

fn amplify(a: &AmplifyArgs) -> Result<Value> {
    let support = build_support(a.big_l, a.level)?;
    let need = support.indices().last().copied().unwrap_or(1) as usize;
    let f = load_source(a.source.form.as_deref(), a.source.coeffs.as_deref(), need.max(DEFAULT_TRUNC))?;
    if f.level != a.level {
        return Err(suplab_core::Error::InvalidParameter(format!("form has level {}, not {}", f.level, a.level)).into());
    }
    let mut lam = BTreeMap::new();
    for l in support.indices() {
        lam.insert(l, f.lam(l as usize)?);
    }
    let v = amplifier(|l| lam[&l], &support);
    let lower = amp_lower(|l| lam[&l], &support);
    // pairs keep numeric order, which string-keyed objects would lose
    let pairs = |m: &BTreeMap<u64, i64>| m.iter().map(|(l, v)| [*l as i64, *v]).collect::<Vec<_>>();
    Ok(json!({ "support": support, "x": pairs(&v.x), "y": pairs(&v.y), "amp_lower": lower }))
}

fn hecke_json(report: &HeckeReport, deligne: Option<usize>) -> Value {
    json!({
        "hecke": report,
        "deligne_ok": deligne.is_none(),
        "first_deligne_violation": deligne,
        "passed": report.passed() && deligne.is_none(),
    })
}

fn form_check(a: &CheckArgs) -> Result<(Value, bool)> {
    let src = &a.source;
    let f = if let Some(s) = &src.eta {
        eta_expand(&EtaQuotient::parse(s)?, a.trunc)?
    } else {
        match load_source(src.form.as_deref(), src.coeffs.as_deref(), a.trunc) {
            Ok(f) => f,
            Err(e) => match e.downcast_ref::<suplab_core::Error>() {
                Some(suplab_core::Error::HeckeRejected(r)) => return Ok((hecke_json(r, None), false)),
                _ => return Err(e),
            },
        }
    };
    let report = hecke_check(&f);
    let deligne = deligne_violation(&f);
    let ok = report.passed() && deligne.is_none();
    Ok((hecke_json(&report, deligne), ok))
}

fn pretrace_check(a: &PretraceArgs) -> Result<Value> {
    let f = match (&a.source.form, &a.source.coeffs) {
        (None, None) => {
            let matches: Vec<_> =
                catalog().into_iter().filter(|e| e.level == a.level && e.weight == a.weight).collect();
            match matches.as_slice() {
                [e] => load_form(&e.id, a.trunc)?,
                _ => {
                    return Err(suplab_core::Error::UnknownForm(format!("level {} weight {}", a.level, a.weight)).into())
                }
            }
        }
        (form, coeffs) => load_source(form.as_deref(), coeffs.as_deref(), a.trunc)?,
    };
    if (f.level, f.weight) != (a.level, a.weight) {
        return Err(suplab_core::Error::InvalidParameter(format!(
            "form has level {} weight {}, not {} {}",
            f.level, f.weight, a.level, a.weight
        ))
        .into());
    }
    let p = petersson_norm(&f, a.petersson_tol)?;
    let check = spectral_residual(&f, a.z.h()?, a.delta_max, p)?;
    let mut v = serde_json::to_value(check)?;
    v["petersson"] = json!(p);
    Ok(v)
}

fn scan(a: &ScanArgs) -> Result<Value> {
    let f = load_source(a.source.form.as_deref(), a.source.coeffs.as_deref(), a.opts.trunc)?;
    let mut rect = ScanRect::reduced(f.level);
    if let Some((lo, hi)) = a.x_range {
        rect.x_lo = lo;
        rect.x_hi = hi;
    }
    if let Some(y) = a.y_lo {
        rect.y_lo = y;
    }
    rect.y_hi = a.y_hi;
    Ok(serde_json::to_value(scan_sup(&f, &a.opts.grid(), &rect, a.petersson)?)?)
}

fn scan_table(a: &ScanTableArgs) -> Result<Vec<Vec<String>>> {
    let ids: Vec<String> = if a.forms.is_empty() {
        catalog().into_iter().filter(|e| e.weight > 2).map(|e| e.id).collect()
    } else {
        a.forms.clone()
    };
    let mut rows = Vec::new();
    for id in ids {
        let f = load_form(&id, a.opts.trunc)?;
        let r = scan_sup(&f, &a.opts.grid(), &ScanRect::reduced(f.level), None)?;
        rows.push(vec![r.level.to_string(), r.weight.to_string(), fmt_f64(r.sup_value), fmt_f64(r.normalized_sup)]);
    }
    Ok(rows)
}

fn fit(a: &FitArgs) -> Result<Value> {
    let reader: Box<dyn std::io::Read> = if a.table.as_os_str() == "-" {
        Box::new(std::io::stdin())
    } else {
        Box::new(std::fs::File::open(&a.table).with_context(|| format!("opening {}", a.table.display()))?)
    };
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col =
        |name: &str| headers.iter().position(|h| h == name).with_context(|| format!("table has no {name} column"));
    let (n_col, v_col) = (col("N")?, col(&a.column)?);
    let mut table = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| rec[i].parse::<f64>().with_context(|| format!("bad number {:?}", &rec[i]));
        table.push((num(n_col)?, num(v_col)?));
    }
    let fit = fit_exponent(&table)?;
    Ok(json!({ "points": table, "fit": fit }))
}

fn config(cli: &Cli) -> Result<Value> {
    let mut v = serde_json::to_value(cli)?;
    v["threads"] = json!(rayon::current_num_threads());
    v["data_dir"] = json!(std::env::var_os(DATA_DIR_ENV).map(|d| d.to_string_lossy().into_owned()));
    v["version"] = json!(env!("CARGO_PKG_VERSION"));
    Ok(v)
}

/// Runs the command; `Ok(false)` reports a failed check.
fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global()?;
    }
    let cfg = config(cli)?;
    let mut out = Sink::open(cli.output.as_deref())?;
    let mut ok = true;
    match &cli.command {
        Command::Reduce(a) => out.json(&cfg, &reduce(a)?)?,
        Command::Census(a) => {
            let (header, rows) = census(a)?;
            out.csv(&cfg, &header, &rows)?;
        }
        Command::Parabolic(a) => out.json(&cfg, &parabolic(a)?)?,
        Command::Amplify(a) => out.json(&cfg, &amplify(a)?)?,
        Command::Form(fc) => match fc {
            // table formats carry no header; the configuration goes to stderr
            FormCommand::Expand { eta, trunc } => {
                eprintln!("# config: {cfg}");
                out.raw(&export_coeff_table(&eta_expand(&EtaQuotient::parse(eta)?, *trunc)?))?;
            }
            FormCommand::Import { coeffs } => {
                eprintln!("# config: {cfg}");
                out.raw(&export_coeff_table(&load_coeff_table(coeffs)?))?;
            }
            FormCommand::Export { form, trunc } => {
                eprintln!("# config: {cfg}");
                out.raw(&export_coeff_table(&load_form(form, *trunc)?))?;
            }
            FormCommand::Check(a) => {
                let (v, passed) = form_check(a)?;
                ok = passed;
                out.json(&cfg, &v)?;
            }
        },
        Command::PretraceCheck(a) => out.json(&cfg, &pretrace_check(a)?)?,
        Command::Scan(a) => out.json(&cfg, &scan(a)?)?,
        Command::ScanTable(a) => out.csv(&cfg, &["N", "k", "sup", "normalized_sup"], &scan_table(a)?)?,
        Command::Fit(a) => out.json(&cfg, &fit(a)?)?,
    }
    out.finish()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
