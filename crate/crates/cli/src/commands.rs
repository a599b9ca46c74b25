//! Subcommand bodies. Each writes its files under the `--out` directory.

use std::path::{Path, PathBuf};

use serde::Serialize;

use lipfit::compare::{default_roster, run_compare, CompareConfig, ExternalFits, MethodSummary, RosterEntry, Truth};
use lipfit::curve::MethodId;
use lipfit::domain::{Interval1D, LbbdPair};
use lipfit::fit::fit_method;
use lipfit::lbbd::{
    check_curve_properties, default_m_grid, gamma_fast_1d, gamma_general, gamma_lp, lbbd_curve, CurveReport,
    CurveSource, Engine, LbbdCurve,
};
use lipfit::metrics::{error_report_for_curve, pef_profile_for_curve, AggregateErrors, ErrorKind, DEFAULT_GRID_N, MIN_GRID_N};
use lipfit::pem::pem_select_with;
use lipfit::simgen::{add_deviation, generate, stratified_sample, GeneratorConfig, SamplingScheme};
use lipfit::workflow::{error_block, run_workflow, ErrorBlock, WorkflowConfig, WorkflowReport};

use crate::args::{CompareArgs, FitArgs, LbbdArgs, PemArgs, SimulateArgs, WorkflowArgs};
use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};
use crate::io::{num, read_curve, read_external, read_samples, write_csv, write_curve, write_fit, write_json, FitRow};

pub const FORMAT_VERSION: u32 = 1;

fn out_dir(cfg: &ConfigFile, flag: Option<PathBuf>) -> CliResult<PathBuf> {
    let dir: PathBuf = cfg.require("out", flag)?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn parse<T: std::str::FromStr<Err = lipfit::Error>>(raw: &str) -> CliResult<T> {
    raw.parse::<T>().map_err(|e| CliError::Usage(e.to_string()))
}

fn check_grid_n(n: usize) -> CliResult<usize> {
    if n < MIN_GRID_N {
        return Err(CliError::Usage(format!("--grid-n must be at least {MIN_GRID_N}, got {n}")));
    }
    Ok(n)
}

/// The periodic counterpart when `periodic` is set.
fn with_periodic(method: MethodId, periodic: bool) -> MethodId {
    match (method, periodic) {
        (MethodId::Nn, true) => MethodId::Pnn,
        (MethodId::Li, true) => MethodId::Pli,
        (MethodId::Lipfit, true) => MethodId::Plipfit,
        (m, _) => m,
    }
}

/// `0,0.5,1`, `lin:a:b:n` (n points from a to b) or `geom:a:b:n` (`0 < a`).
pub fn parse_m_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::Usage(format!("--m-grid '{spec}': {why}"));
    let number = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(&format!("'{t}' is not a number")));
    if let Some((kind, rest)) = spec.split_once(':') {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("ranges take the form kind:a:b:n"));
        }
        let (a, b) = (number(parts[0])?, number(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad("point count must be an integer"))?;
        if n < 2 || !(a < b) {
            return Err(bad("need a < b and at least two points"));
        }
        let t = |i: usize| i as f64 / (n - 1) as f64;
        return match kind {
            "lin" => Ok((0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * t(i) }).collect()),
            "geom" if a > 0.0 => Ok((0..n).map(|i| if i == n - 1 { b } else { a * (b / a).powf(t(i)) }).collect()),
            "geom" => Err(bad("geometric ranges need a > 0")),
            _ => Err(bad("kind must be lin or geom")),
        };
    }
    spec.split(',').map(number).collect()
}

#[derive(Serialize)]
struct FitSummary {
    format_version: u32,
    command: &'static str,
    method: MethodId,
    periodic: bool,
    domain: Interval1D,
    n_samples: usize,
    grid_n: usize,
    pair: Option<LbbdPair>,
    /// `flag` or `gamma` (smallest BD consistent with the LB).
    sigma_from: Option<&'static str>,
    aggregate: Option<AggregateErrors>,
}

pub fn fit(args: FitArgs) -> CliResult<()> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let input: PathBuf = cfg.require("input", args.input)?;
    let method: MethodId = parse(&cfg.require::<String>("method", args.method)?)?;
    let m: Option<f64> = cfg.pick("m", args.m)?;
    let sigma_flag: Option<f64> = cfg.pick("sigma", args.sigma)?;
    let periodic = cfg.switch("periodic", args.periodic)? || method.is_periodic();
    let grid_n = check_grid_n(cfg.pick("grid_n", args.grid_n)?.unwrap_or(1001))?;
    let (a, b) = (cfg.pick("domain_a", args.domain_a)?, cfg.pick("domain_b", args.domain_b)?);
    let out = out_dir(&cfg, args.out)?;

    let raw = read_samples(&input)?;
    if raw.dim != 1 {
        return Err(CliError::Usage("fit needs one-dimensional input".into()));
    }
    let s = raw.to_set(a, b)?;
    let method = with_periodic(method, periodic);
    if method == MethodId::External {
        return Err(CliError::Usage("external fits cannot be computed".into()));
    }
    let curve = fit_method(&s, method, m)?;
    let (pair, sigma_from) = match (m, sigma_flag) {
        (Some(m), Some(sg)) => (Some(LbbdPair::new(m, sg)?), Some("flag")),
        (Some(m), None) => (Some(LbbdPair::new(m, gamma_fast_1d(&s, m, periodic)?)?), Some("gamma")),
        (None, Some(_)) => return Err(CliError::Usage("--sigma needs --m".into())),
        (None, None) => (None, None),
    };

    let iv = s.interval()?;
    let mut grid = iv.grid(grid_n);
    grid.extend_from_slice(s.xs());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let values = curve.eval_many(&grid)?;
    let (bands, aggregate) = match pair {
        Some(p) => {
            let pef = pef_profile_for_curve(&s, p, &curve, periodic, &grid)?;
            let agg = error_report_for_curve(&s, p, &curve, periodic, grid_n)?.aggregate;
            (Some(pef), Some(agg))
        }
        None => (None, None),
    };
    let rows: Vec<FitRow> = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| FitRow {
            x,
            fit: values[i],
            band: bands.as_ref().map(|p| (values[i] - p[i], values[i] + p[i])),
        })
        .collect();
    write_fit(&out.join("fit.csv"), &rows)?;
    write_json(
        &out.join("fit.json"),
        &FitSummary {
            format_version: FORMAT_VERSION,
            command: "fit",
            method,
            periodic,
            domain: iv,
            n_samples: s.len(),
            grid_n,
            pair,
            sigma_from,
            aggregate,
        },
    )
}

#[derive(Serialize)]
struct CurveSummary<'a> {
    format_version: u32,
    command: &'static str,
    engine: Engine,
    periodic: bool,
    dim: usize,
    n_samples: usize,
    m_grid: Option<&'a str>,
    source: CurveSource,
    report: CurveReport,
}

pub fn lbbd(args: LbbdArgs) -> CliResult<()> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let input: PathBuf = cfg.require("input", args.input)?;
    let periodic = cfg.switch("periodic", args.periodic)?;
    let spec: Option<String> = cfg.pick("m_grid", args.m_grid)?;
    let engine: Option<String> = cfg.pick("engine", args.engine)?;
    let (a, b) = (cfg.pick("domain_a", args.domain_a)?, cfg.pick("domain_b", args.domain_b)?);
    let dump: Option<PathBuf> = cfg.pick("dump_lp", args.dump_lp)?;
    let dump_m: Option<f64> = cfg.pick("dump_lp_m", args.dump_lp_m)?;
    let out = out_dir(&cfg, args.out)?;

    let raw = read_samples(&input)?;
    let engine = match engine {
        Some(e) => parse::<Engine>(&e)?,
        None if raw.dim == 1 => Engine::Fast,
        None => Engine::General,
    };
    if engine == Engine::Fast && raw.dim != 1 {
        return Err(CliError::Usage("the fast engine needs one-dimensional input".into()));
    }
    let s = raw.to_set(a, b)?;
    let grid = match &spec {
        Some(sp) => parse_m_grid(sp)?,
        None if raw.dim == 1 => default_m_grid(&s, periodic)?,
        None => default_grid_nd(&s)?,
    };
    let curve = lbbd_curve(&s, &grid, periodic, engine)?;
    let report = check_curve_properties(&curve, Some(&s))?;
    if let Some(path) = dump {
        let m = dump_m.unwrap_or(grid[0]);
        let text = match gamma_lp(&s, m, periodic, engine)? {
            Some(lp) => lp.dump(),
            None => "fewer than two samples: no program\n".to_string(),
        };
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    write_curve(&out.join("curve.csv"), &curve)?;
    write_json(
        &out.join("curve.json"),
        &CurveSummary {
            format_version: FORMAT_VERSION,
            command: "lbbd",
            engine,
            periodic,
            dim: raw.dim,
            n_samples: s.len(),
            m_grid: spec.as_deref(),
            source: curve.source,
            report,
        },
    )
}

/// 0 plus 50 points up to the largest pairwise slope (any dimension).
fn default_grid_nd(s: &lipfit::domain::SampleSet) -> CliResult<Vec<f64>> {
    let lip = lipfit::domain::lip_of_samples(s).value;
    if lip <= 0.0 {
        return Ok(vec![0.0, 1.0]);
    }
    debug_assert!(gamma_general(s, lip, false).map_or(true, |g| g < 1e-6));
    Ok((0..=50).map(|i| 1.05 * lip * i as f64 / 50.0).collect())
}

#[derive(Serialize)]
struct Selection {
    error: ErrorKind,
    chosen: LbbdPair,
    upsilon: f64,
}

#[derive(Serialize)]
struct Block {
    #[serde(flatten)]
    block: ErrorBlock,
    rendered: String,
}

impl From<ErrorBlock> for Block {
    fn from(block: ErrorBlock) -> Self {
        Block { rendered: block.render(), block }
    }
}

#[derive(Serialize)]
struct Table {
    alb: Option<Block>,
    palb: Option<Block>,
}

#[derive(Serialize)]
struct PemSummary {
    format_version: u32,
    command: &'static str,
    method: MethodId,
    periodic: bool,
    n_samples: usize,
    grid_n: usize,
    selections: Vec<Selection>,
    table: Table,
}

pub fn pem(args: PemArgs) -> CliResult<()> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let input: PathBuf = cfg.require("input", args.input)?;
    let curve_path: PathBuf = cfg.require("curve", args.curve)?;
    let periodic_curve: Option<PathBuf> = cfg.pick("periodic_curve", args.periodic_curve)?;
    let method: MethodId = parse(&cfg.pick::<String>("method", args.method)?.unwrap_or_else(|| "lipfit".into()))?;
    let kinds: String = cfg.pick("error", args.error)?.unwrap_or_else(|| "DSPWE".into());
    let periodic = cfg.switch("periodic", args.periodic)? || method.is_periodic();
    let also = cfg.switch("periodic_also", args.periodic_also)?;
    let grid_n = check_grid_n(cfg.pick("grid_n", args.grid_n)?.unwrap_or(DEFAULT_GRID_N))?;
    let (a, b) = (cfg.pick("domain_a", args.domain_a)?, cfg.pick("domain_b", args.domain_b)?);
    let out = out_dir(&cfg, args.out)?;

    let kinds: Vec<ErrorKind> = kinds.split(',').map(|k| parse(k.trim())).collect::<CliResult<_>>()?;
    let raw = read_samples(&input)?;
    if raw.dim != 1 {
        return Err(CliError::Usage("pem needs one-dimensional input".into()));
    }
    let s = raw.to_set(a, b)?;
    let curve_for = |p: bool| -> CliResult<LbbdCurve> {
        match (&periodic_curve, p) {
            (Some(path), true) => read_curve(path, true),
            _ => read_curve(&curve_path, p),
        }
    };
    let main_curve = curve_for(periodic)?;
    let selections = kinds
        .iter()
        .map(|&kind| {
            let r = pem_select_with(&s, &main_curve, kind, method, periodic, grid_n)?;
            Ok(Selection { error: kind, chosen: r.chosen, upsilon: r.upsilon })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let block = |p: bool| -> CliResult<Block> { Ok(error_block(&s, &curve_for(p)?, p, grid_n)?.into()) };
    let table = Table {
        alb: if !periodic || also { Some(block(false)?) } else { None },
        palb: if periodic || also { Some(block(true)?) } else { None },
    };
    write_json(
        &out.join("pem.json"),
        &PemSummary {
            format_version: FORMAT_VERSION,
            command: "pem",
            method,
            periodic,
            n_samples: s.len(),
            grid_n,
            selections,
            table,
        },
    )
}

fn parse_counts(spec: &str) -> CliResult<Vec<usize>> {
    spec.split(',')
        .map(|t| t.trim().parse().map_err(|_| CliError::Usage(format!("--strata '{spec}': '{t}' is not a count"))))
        .collect()
}

#[derive(Serialize)]
struct SimulateSummary {
    format_version: u32,
    command: &'static str,
    generator: GeneratorConfig,
    strata: Vec<usize>,
    grid_n: usize,
    knots: Vec<f64>,
    values: Vec<f64>,
}

pub fn simulate(args: SimulateArgs) -> CliResult<()> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let k: usize = cfg.pick("k", args.k)?.unwrap_or(5);
    let m: f64 = cfg.pick("m", args.m)?.unwrap_or(10.0);
    let sigma: f64 = cfg.pick("sigma", args.sigma)?.unwrap_or(0.0);
    let periodic = cfg.switch("periodic", args.periodic)?;
    let seed: u64 = cfg.pick("seed", args.seed)?.unwrap_or(0);
    let strata = parse_counts(&cfg.pick::<String>("strata", args.strata)?.unwrap_or_else(|| "2,2,2,2".into()))?;
    let grid_n: usize = cfg.pick("grid_n", args.grid_n)?.unwrap_or(1001);
    let a: f64 = cfg.pick("domain_a", args.domain_a)?.unwrap_or(0.0);
    let b: f64 = cfg.pick("domain_b", args.domain_b)?.unwrap_or(1.0);
    let out = out_dir(&cfg, args.out)?;
    if grid_n < 2 {
        return Err(CliError::Usage("--grid-n must be at least 2".into()));
    }

    let iv = Interval1D::new(a, b).map_err(|e| CliError::Usage(format!("domain: {e}")))?;
    let gen = GeneratorConfig::new(iv, k, m, sigma, periodic, seed)?;
    let f = generate(&gen)?;
    let xs = stratified_sample(&SamplingScheme::equal(iv, &strata, seed)?)?;
    let samples = add_deviation(&f, sigma, &xs, seed)?;
    let grid = iv.grid(grid_n);
    let truth = grid.iter().map(|&x| f.eval(x)).collect::<lipfit::Result<Vec<_>>>()?;
    let pairs = |xs: &[f64], ys: &[f64]| xs.iter().zip(ys).map(|(&x, &y)| vec![num(x), num(y)]).collect::<Vec<_>>();
    write_csv(&out.join("truth.csv"), &["x", "y"], pairs(&grid, &truth))?;
    write_csv(&out.join("samples.csv"), &["x", "y"], pairs(samples.xs(), samples.ys()))?;
    write_json(
        &out.join("config.json"),
        &SimulateSummary {
            format_version: FORMAT_VERSION,
            command: "simulate",
            generator: gen,
            strata,
            grid_n,
            knots: f.knots().to_vec(),
            values: f.values().to_vec(),
        },
    )
}

/// `label=method*scale,...`, e.g. `lipfit=lipfit*1,lipfit.sm=lipfit*0.1,li=li*1`.
pub fn parse_roster(spec: &str) -> CliResult<Vec<RosterEntry>> {
    spec.split(',')
        .map(|item| {
            let bad = || CliError::Usage(format!("--roster entry '{item}' must look like label=method*scale"));
            let (label, rest) = item.trim().split_once('=').ok_or_else(bad)?;
            let (method, scale) = rest.split_once('*').unwrap_or((rest, "1"));
            let scale: f64 = scale.trim().parse().map_err(|_| bad())?;
            Ok(RosterEntry::new(label.trim(), parse(method.trim())?, scale))
        })
        .collect()
}

#[derive(Serialize)]
struct CompareSummary<'a> {
    format_version: u32,
    command: &'static str,
    config: &'a CompareConfig,
    summaries: &'a [MethodSummary],
}

pub fn compare(args: CompareArgs) -> CliResult<()> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let sigma: f64 = cfg.require("sigma", args.sigma)?;
    let seed: u64 = cfg.pick("seed", args.seed)?.unwrap_or(0);
    let mut cc = CompareConfig::new(sigma, seed);
    cc.m = cfg.pick("m", args.m)?.unwrap_or(cc.m);
    cc.k = cfg.pick("k", args.k)?.unwrap_or(cc.k);
    cc.periodic = cfg.switch("periodic", args.periodic)?;
    cc.replicates = cfg.pick("replicates", args.replicates)?.unwrap_or(cc.replicates);
    cc.grid_n = cfg.pick("grid_n", args.grid_n)?.unwrap_or(cc.grid_n);
    if let Some(spec) = cfg.pick::<String>("strata", args.strata)? {
        cc.strata = parse_counts(&spec)?;
    }
    cc.truth = match cfg.pick::<String>("truth", args.truth)?.as_deref() {
        None | Some("deviation-free") => Truth::DeviationFree,
        Some("target") => Truth::Target,
        Some(other) => return Err(CliError::Usage(format!("--truth '{other}': expected deviation-free or target"))),
    };
    cc.roster = match cfg.pick::<String>("roster", args.roster)? {
        Some(spec) => parse_roster(&spec)?,
        None => default_roster(),
    };
    let externals_spec: Vec<String> = cfg.pick("external", (!args.external.is_empty()).then_some(args.external))?.unwrap_or_default();
    let out = out_dir(&cfg, args.out)?;

    let externals = externals_spec
        .iter()
        .map(|item| {
            let (label, path) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--external '{item}' must look like label=path")))?;
            Ok(ExternalFits { label: label.to_string(), fits: read_external(Path::new(path), cc.interval)? })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let result = run_compare(&cc, &externals)?;
    write_csv(
        &out.join("compare.csv"),
        &["label", "q25", "q50", "q75", "mean"],
        result.summaries.iter().map(|s| vec![s.label.clone(), num(s.q25), num(s.q50), num(s.q75), num(s.mean)]),
    )?;
    let labels: Vec<&str> = result.summaries.iter().map(|s| s.label.as_str()).collect();
    write_csv(
        &out.join("losses.csv"),
        &["replicate", "label", "mpwl"],
        result.losses.iter().enumerate().flat_map(|(r, row)| {
            row.iter().zip(&labels).map(move |(v, l)| vec![r.to_string(), l.to_string(), num(*v)])
        }),
    )?;
    write_json(
        &out.join("compare.json"),
        &CompareSummary { format_version: FORMAT_VERSION, command: "compare", config: &result.config, summaries: &result.summaries },
    )
}

#[derive(Serialize)]
struct WorkflowSummary {
    format_version: u32,
    command: &'static str,
    lipfit_never_worse: bool,
    #[serde(flatten)]
    report: WorkflowReport,
}

pub fn workflow(args: WorkflowArgs) -> CliResult<()> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let mut wc = WorkflowConfig::new(cfg.pick("seed", args.seed)?.unwrap_or(0));
    wc.n_dense = cfg.pick("n_dense", args.n_dense)?.unwrap_or(wc.n_dense);
    wc.sigma = cfg.pick("sigma", args.sigma)?.unwrap_or(wc.sigma);
    wc.m = cfg.pick("m", args.m)?.unwrap_or(wc.m);
    wc.grid_n = check_grid_n(cfg.pick("grid_n", args.grid_n)?.unwrap_or(wc.grid_n))?;
    let out = out_dir(&cfg, args.out)?;
    let report = run_workflow(&wc)?;
    write_json(
        &out.join("workflow.json"),
        &WorkflowSummary { format_version: FORMAT_VERSION, command: "workflow", lipfit_never_worse: report.lipfit_never_worse(), report },
    )
}
