//! `cover-kcenter`: δ-covers, farthest-first traversals, exact oracle checks,
//! fixtures and timed benchmarks from the command line.
//!
//! Every run prints (or writes with `--out`) one JSON document. Failures print
//! `{"error": {"kind": ..., "message": ...}}` on stderr and exit with code 2;
//! a requested check that does not hold exits with code 1.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcenter::cover::{build_cover, min_separation, verify_cover, ScanOrder};
use kcenter::farthest_first::{farthest_first, SeedPolicy};
use kcenter::fixtures::{self, FIXTURE_NAMES};
use kcenter::harness::{self, PipelineConfig};
use kcenter::ingest;
use kcenter::metric::{self, MetricKind, PointSet};
use kcenter::oracle::{self, BoundReport};
use kcenter::report::{RunParams, RunReport, StandardizeNote, VERSION};
use kcenter::Error;
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "cover-kcenter",
    version,
    about = "k-center by farthest-first on delta-covers"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Input dataset (CSV or FPC1 binary).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Input format; inferred from the extension when omitted (.bin/.fpc are binary).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// The CSV input starts with a header line.
    #[arg(long, global = true)]
    header: bool,
    #[arg(long, global = true, default_value = "l2")]
    metric: MetricKind,
    /// Z-transform every dimension (population std) before running.
    #[arg(long, global = true)]
    standardize: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "COVER_KCENTER_THREADS")]
    threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Bin,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Bin => "bin",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a delta-cover with the uncovered-first scan.
    Cover {
        #[arg(long, allow_hyphen_values = true)]
        delta: f32,
        #[arg(long, default_value = "natural")]
        order: ScanOrder,
        /// Cover indices, one per line.
        #[arg(long)]
        cover_out: Option<PathBuf>,
        #[arg(long)]
        no_verify: bool,
    },
    /// Farthest-first traversal on the input or on a subset of it.
    Ff {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "first")]
        seed_policy: SeedPolicy,
        /// Run on these point indices (one per line) instead of all points.
        #[arg(long)]
        restrict: Option<PathBuf>,
        #[arg(long)]
        centers_out: Option<PathBuf>,
    },
    /// Cover, then farthest-first on the cover and on the full set.
    Pipeline {
        #[arg(long, allow_hyphen_values = true)]
        delta: f32,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "first")]
        seed_policy: SeedPolicy,
        #[arg(long, default_value = "natural")]
        order: ScanOrder,
        /// Skip farthest-first on the full set.
        #[arg(long)]
        cover_only: bool,
        #[arg(long)]
        cover_out: Option<PathBuf>,
        #[arg(long)]
        centers_out: Option<PathBuf>,
    },
    /// Exact optimum by enumeration, plus bound checks against it.
    Oracle {
        #[arg(long)]
        k: usize,
        /// Any of gonzalez, subset, lifting, main. Defaults to gonzalez, plus
        /// lifting/main with --delta and subset with --restrict.
        #[arg(long, value_delimiter = ',')]
        bounds: Vec<BoundKind>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f32>,
        #[arg(long, default_value = "natural")]
        order: ScanOrder,
        #[arg(long, default_value = "first")]
        seed_policy: SeedPolicy,
        #[arg(long)]
        restrict: Option<PathBuf>,
        /// Largest number of subsets to enumerate.
        #[arg(long, default_value_t = oracle::DEFAULT_SUBSET_CAP)]
        cap: u64,
    },
    /// Built-in instances with known radii.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
    /// Median-of-repetitions timing of farthest-first on P and on Q.
    Bench {
        #[arg(long, conflicts_with = "cover_fraction", allow_hyphen_values = true)]
        delta: Option<f32>,
        /// Tune delta so that |Q|/|P| falls in LO:HI.
        #[arg(long)]
        cover_fraction: Option<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        #[arg(long, default_value = "first")]
        seed_policy: SeedPolicy,
        #[arg(long, default_value = "natural")]
        order: ScanOrder,
    },
    /// Write a synthetic Gaussian mixture dataset.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        spread: f32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    List,
    /// Write a fixture's points in the CSV (or binary) input format.
    Export {
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the fixture's Q indices.
        #[arg(long)]
        cover_out: Option<PathBuf>,
    },
    /// Re-derive every expected value; exits 1 on any mismatch.
    Verify {
        names: Vec<String>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BoundKind {
    Gonzalez,
    Subset,
    Lifting,
    Main,
}

type CmdResult = Result<Outcome, Error>;

/// Output document plus whether every requested check held.
struct Outcome {
    doc: serde_json::Value,
    ok: bool,
    /// Printed verbatim instead of `doc` (fixture export to stdout).
    raw: Option<String>,
}

impl Outcome {
    fn ok(doc: impl Serialize) -> Self {
        Outcome::checked(doc, true)
    }

    fn checked(doc: impl Serialize, ok: bool) -> Self {
        Outcome {
            doc: to_value(doc),
            ok,
            raw: None,
        }
    }
}

fn to_value(doc: impl Serialize) -> serde_json::Value {
    serde_json::to_value(doc).expect("reports serialize")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let doc = json!({ "error": { "kind": "usage", "message": e.render().to_string() } });
            eprintln!("{doc}");
            return ExitCode::from(2);
        }
    };
    let pool = match cli.common.threads {
        Some(0) => return fail(&Error::InvalidInput("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .expect("thread pool");

    match pool.install(|| run(&cli)) {
        Ok(outcome) => {
            let text = match outcome.raw {
                Some(raw) => raw,
                None => serde_json::to_string_pretty(&outcome.doc).expect("json") + "\n",
            };
            let written = match &cli.common.out {
                Some(path) => fs::write(path, text).map_err(Error::from),
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(Error::from),
            };
            match written {
                Err(e) => fail(&e),
                Ok(()) if outcome.ok => ExitCode::SUCCESS,
                Ok(()) => ExitCode::from(1),
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    let doc = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{doc}");
    ExitCode::from(2)
}

fn run(cli: &Cli) -> CmdResult {
    let c = &cli.common;
    match &cli.command {
        Command::Cover {
            delta,
            order,
            cover_out,
            no_verify,
        } => cmd_cover(c, *delta, *order, cover_out.as_deref(), !no_verify),
        Command::Ff {
            k,
            seed_policy,
            restrict,
            centers_out,
        } => cmd_ff(
            c,
            *k,
            *seed_policy,
            restrict.as_deref(),
            centers_out.as_deref(),
        ),
        Command::Pipeline {
            delta,
            k,
            seed_policy,
            order,
            cover_only,
            cover_out,
            centers_out,
        } => {
            let cfg = PipelineConfig {
                delta: *delta,
                k: *k,
                seed: *seed_policy,
                order: *order,
                cover_only: *cover_only,
                verify: true,
            };
            cmd_pipeline(c, &cfg, cover_out.as_deref(), centers_out.as_deref())
        }
        Command::Oracle {
            k,
            bounds,
            delta,
            order,
            seed_policy,
            restrict,
            cap,
        } => cmd_oracle(
            c,
            *k,
            bounds,
            *delta,
            *order,
            *seed_policy,
            restrict.as_deref(),
            *cap,
        ),
        Command::Fixtures { action } => cmd_fixtures(c, action),
        Command::Bench {
            delta,
            cover_fraction,
            k,
            repetitions,
            seed_policy,
            order,
        } => cmd_bench(
            c,
            *delta,
            cover_fraction.as_deref(),
            k,
            *repetitions,
            *seed_policy,
            *order,
        ),
        Command::Synth {
            n,
            d,
            m,
            spread,
            seed,
            output,
        } => {
            let ps = ingest::synth_gaussian_mixture(*n, *d, *m, *spread, *seed)?;
            save_points(&ps, output, c.format)?;
            Ok(Outcome::ok(json!({
                "command": "synth",
                "version": VERSION,
                "params": { "n": n, "d": d, "m": m, "spread": spread, "seed": seed },
                "output": output,
            })))
        }
    }
}

fn infer_format(path: &Path, explicit: Option<Format>) -> Format {
    explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("bin" | "fpc") => Format::Bin,
        _ => Format::Csv,
    })
}

fn load(c: &Common) -> Result<(PointSet, RunParams), Error> {
    let path = c
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("--input is required".into()))?;
    let format = infer_format(path, c.format);
    let ps = match format {
        Format::Csv => ingest::read_csv(path, c.header, c.metric)?,
        Format::Bin => ingest::read_binary(path, c.metric)?,
    };
    let (ps, standardize) = if c.standardize {
        (
            ingest::standardize(&ps)?.0,
            Some(StandardizeNote::population_full_input()),
        )
    } else {
        (ps, None)
    };
    let params = RunParams {
        input: Some(path.display().to_string()),
        format: Some(format.as_str().into()),
        header: c.header,
        metric: c.metric.to_string(),
        threads: c.threads,
        precision: "f32 storage and arithmetic".into(),
        standardize,
        ..Default::default()
    };
    Ok((ps, params))
}

fn save_points(ps: &PointSet, path: &Path, format: Option<Format>) -> Result<(), Error> {
    match infer_format(path, format) {
        Format::Csv => ingest::write_csv(ps, path),
        Format::Bin => ingest::write_binary(ps, path),
    }
}

fn write_indices(path: &Path, indices: &[usize]) -> Result<(), Error> {
    let mut text = String::with_capacity(indices.len() * 8);
    for i in indices {
        text.push_str(&i.to_string());
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn read_indices(path: &Path) -> Result<Vec<usize>, Error> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                line: i as u64 + 1,
                message: format!("'{}' is not an index", l.trim()),
            })
        })
        .collect()
}

fn cmd_cover(
    c: &Common,
    delta: f32,
    order: ScanOrder,
    out: Option<&Path>,
    verify: bool,
) -> CmdResult {
    let (ps, mut params) = load(c)?;
    params.delta = Some(delta);
    params.order = Some(order.to_string());
    let cover = build_cover(&ps, delta, order)?;
    let check = if verify {
        Some(verify_cover(&ps, &cover.cover, delta)?)
    } else {
        None
    };
    if let Some(path) = out {
        write_indices(path, cover.cover.indices())?;
    }
    let mut r = RunReport::new("cover", params, ps.n(), ps.dim());
    harness::fill_cover(&mut r, &ps, &cover, check.as_ref());
    let mut doc = to_value(&r);
    doc["cover_indices"] = json!(cover.cover.indices());
    if verify {
        doc["cover_separation"] = json!(min_separation(&ps, &cover.cover)?);
    }
    Ok(Outcome::checked(doc, check.is_none_or(|c| c.valid)))
}

fn cmd_ff(
    c: &Common,
    k: usize,
    policy: SeedPolicy,
    restrict: Option<&Path>,
    centers_out: Option<&Path>,
) -> CmdResult {
    let (ps, mut params) = load(c)?;
    params.k = Some(k);
    params.seed_policy = Some(policy.to_string());
    params.restrict = restrict.map(|p| p.display().to_string());
    let subset = match restrict {
        Some(path) => ps.subset(read_indices(path)?)?,
        None => ps.full(),
    };
    let t = Instant::now();
    let trace = farthest_first(&subset, k, policy, &ps)?;
    let elapsed = t.elapsed().as_secs_f64() * 1e3;
    if let Some(path) = centers_out {
        write_indices(path, &trace.chosen)?;
    }

    let mut r = RunReport::new("ff", params, ps.n(), ps.dim());
    if restrict.is_some() {
        let on_p = metric::cost(&trace.centers(&ps), &ps.full(), &ps)?;
        r.n_cover = Some(subset.len());
        r.cost_ff_q_on_q = Some(trace.final_radius() as f64);
        r.cost_ff_q_on_p = Some(on_p.radius as f64);
        r.centers_q = Some(trace.chosen.clone());
        r.timings.ff_q_ms = Some(elapsed);
    } else {
        r.cost_ff_p_on_p = Some(trace.final_radius() as f64);
        r.centers_p = Some(trace.chosen.clone());
        r.timings.ff_p_ms = Some(elapsed);
    }
    let mut doc = to_value(&r);
    doc["radii"] = json!(trace.radii);
    Ok(Outcome::ok(doc))
}

fn cmd_pipeline(
    c: &Common,
    cfg: &PipelineConfig,
    cover_out: Option<&Path>,
    centers_out: Option<&Path>,
) -> CmdResult {
    let (ps, mut params) = load(c)?;
    params.k = Some(cfg.k);
    params.delta = Some(cfg.delta);
    params.seed_policy = Some(cfg.seed.to_string());
    params.order = Some(cfg.order.to_string());
    params.cover_only = cfg.cover_only;
    let out = harness::run_pipeline(&ps, cfg)?;
    if let Some(path) = cover_out {
        write_indices(path, out.cover.cover.indices())?;
    }
    if let Some(path) = centers_out {
        write_indices(path, &out.ff_q.chosen)?;
    }
    let r = out.report(&ps, params);
    let ok = r.cover_valid != Some(false);
    let mut doc = to_value(&r);
    doc["cover_indices"] = json!(out.cover.cover.indices());
    Ok(Outcome::checked(doc, ok))
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    c: &Common,
    k: usize,
    bounds: &[BoundKind],
    delta: Option<f32>,
    order: ScanOrder,
    policy: SeedPolicy,
    restrict: Option<&Path>,
    cap: u64,
) -> CmdResult {
    let (ps, mut params) = load(c)?;
    params.k = Some(k);
    params.delta = delta;
    params.seed_policy = Some(policy.to_string());
    params.order = delta.map(|_| order.to_string());
    params.restrict = restrict.map(|p| p.display().to_string());

    let mut wanted = bounds.to_vec();
    if wanted.is_empty() {
        wanted.push(BoundKind::Gonzalez);
        if delta.is_some() {
            wanted.extend([BoundKind::Lifting, BoundKind::Main]);
        }
        if restrict.is_some() {
            wanted.push(BoundKind::Subset);
        }
    }

    let opt = oracle::opt_kcenter_with_cap(&ps, k, cap)?;
    let cross = (ps.n() <= oracle::FEASIBILITY_MAX_N)
        .then(|| oracle::opt_by_radius_feasibility(&ps, k))
        .transpose()?;

    let cover = match delta {
        Some(d) => Some(build_cover(&ps, d, order)?),
        None => None,
    };
    let need_delta = || Error::InvalidInput("this bound needs --delta".into());
    let mut reports: Vec<BoundReport> = Vec::new();
    for b in &wanted {
        let report = match b {
            BoundKind::Gonzalez => oracle::gonzalez_with_opt(&ps, k, policy, opt.radius)?,
            BoundKind::Subset => {
                let path = restrict
                    .ok_or_else(|| Error::InvalidInput("subset bound needs --restrict".into()))?;
                let s = ps.subset(read_indices(path)?)?;
                oracle::subset_lemma_with_opt(&ps, &s, k, policy, opt.radius)?
            }
            BoundKind::Lifting => {
                let cover = cover.as_ref().ok_or_else(need_delta)?;
                let centers = farthest_first(&cover.cover, k.min(cover.cover.len()), policy, &ps)?;
                oracle::check_lifting(&ps, &cover.cover, cover.delta, &centers.centers(&ps))?
            }
            BoundKind::Main => {
                let cover = cover.as_ref().ok_or_else(need_delta)?;
                if cover.cover.len() < k {
                    return Err(Error::CoverTooSmall {
                        cover: cover.cover.len(),
                        k,
                    });
                }
                oracle::main_theorem_with_opt(
                    &ps,
                    &cover.cover,
                    cover.delta,
                    k,
                    policy,
                    opt.radius,
                )?
            }
        };
        reports.push(report);
    }

    let agree = cross.map(|r| r == opt.radius);
    let ok = reports.iter().all(|r| r.holds) && agree != Some(false);
    let doc = json!({
        "command": "oracle",
        "version": VERSION,
        "params": params,
        "n_points": ps.n(),
        "dim": ps.dim(),
        "opt": {
            "radius": opt.radius,
            "centers": opt.centers.indices(),
            "subsets_examined": opt.subsets_examined,
        },
        "cross_check": cross.map(|r| json!({ "feasibility_radius": r, "agree": agree })),
        "n_cover": cover.as_ref().map(|c| c.cover.len()),
        "bounds": reports,
    });
    Ok(Outcome::checked(doc, ok))
}

fn cmd_fixtures(c: &Common, action: &FixtureAction) -> CmdResult {
    match action {
        FixtureAction::List => {
            let list: Vec<_> = fixtures::all_fixtures()?
                .into_iter()
                .map(|f| {
                    json!({
                        "name": f.name,
                        "n": f.points.n(),
                        "d": f.points.dim(),
                        "k": f.k,
                        "delta": f.delta,
                        "q": f.cover,
                    })
                })
                .collect();
            Ok(Outcome::ok(
                json!({ "command": "fixtures list", "version": VERSION, "fixtures": list }),
            ))
        }
        FixtureAction::Export {
            name,
            output,
            cover_out,
        } => {
            let f = fixtures::fixture(name)?;
            if let (Some(path), Some(q)) = (cover_out, &f.cover) {
                write_indices(path, q)?;
            }
            match output {
                Some(path) => {
                    save_points(&f.points, path, c.format)?;
                    Ok(Outcome::ok(json!({
                        "command": "fixtures export",
                        "version": VERSION,
                        "fixture": f.name,
                        "output": path,
                    })))
                }
                None => {
                    let mut buf = Vec::new();
                    ingest::write_csv_to(&f.points, &mut buf)?;
                    Ok(Outcome {
                        doc: serde_json::Value::Null,
                        ok: true,
                        raw: Some(String::from_utf8(buf).expect("csv is utf-8")),
                    })
                }
            }
        }
        FixtureAction::Verify { names } => {
            let list: Vec<String> = if names.is_empty() {
                FIXTURE_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                names.clone()
            };
            let mut reports = Vec::new();
            for n in &list {
                let r = fixtures::fixture(n)?.verify()?;
                eprintln!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name);
                reports.push(r);
            }
            let passed = reports.iter().filter(|r| r.passed).count();
            let naive = oracle::falsify_naive_bounds()?;
            let ok = passed == reports.len() && naive.iter().all(|b| !b.holds);
            let doc = json!({
                "command": "fixtures verify",
                "version": VERSION,
                "passed": passed,
                "total": reports.len(),
                "fixtures": reports,
                "naive_bounds": naive,
            });
            Ok(Outcome::checked(doc, ok))
        }
    }
}

fn parse_fraction(s: &str) -> Result<(f64, f64), Error> {
    let bad = || Error::InvalidInput(format!("bad --cover-fraction '{s}', expected LO:HI"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        lo.parse().map_err(|_| bad())?,
        hi.parse().map_err(|_| bad())?,
    ))
}

fn cmd_bench(
    c: &Common,
    delta: Option<f32>,
    fraction: Option<&str>,
    ks: &[usize],
    repetitions: usize,
    policy: SeedPolicy,
    order: ScanOrder,
) -> CmdResult {
    if repetitions == 0 {
        return Err(Error::InvalidInput(
            "--repetitions must be at least 1".into(),
        ));
    }
    let (ps, mut params) = load(c)?;
    params.seed_policy = Some(policy.to_string());
    params.order = Some(order.to_string());
    let delta = match (delta, fraction) {
        (Some(d), _) => d,
        (None, Some(f)) => {
            let (lo, hi) = parse_fraction(f)?;
            harness::tune_delta(&ps, lo, hi, order)?.0
        }
        (None, None) => {
            return Err(Error::InvalidInput(
                "bench needs --delta or --cover-fraction".into(),
            ))
        }
    };
    let rows = harness::bench(&ps, delta, ks, repetitions, policy, order, &params)?;
    let ok = rows.iter().all(|r| r.cover_valid == Some(true));
    Ok(Outcome::checked(
        json!({ "command": "bench", "version": VERSION, "runs": rows }),
        ok,
    ))
}
