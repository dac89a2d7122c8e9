//! Command-line front end. Every command reads its inputs from files, writes
//! one report (to `--out` or stdout) and maps the outcome to an exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::convex::{half_sq_norm, ConvexPotential};
use crate::error::Error;
use crate::io::{read_heavy, read_map, read_measure, read_plan, read_psi, to_json, write_text};
use crate::measures::{equimeasurable, DiscreteMeasure, SampledMap};
use crate::polar::{
    degeneracy_report, gallery_instance, polar_factorize, verify_optimality_of_inclusion, verify_polar_inclusion,
    Classification,
};
use crate::rearrangement::{
    construct_m_to_1, monotone_rearrangement, multiplicity_report, HeavySet, MultiplicityReport, RearrangeOptions,
    SplitMode,
};
use crate::transport::{brute_force_mk, build_cost, solve_mk, Certificate, Triplet, TransportPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;
pub const EXIT_INCLUSION: i32 = 4;
pub const EXIT_OPTIMALITY: i32 = 5;
pub const EXIT_INCLUSION_ONLY: i32 = 10;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "polarfact", version, about = "Polar factorisations and polar inclusions of sampled maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the quadratic transport problem between u#μ and Y.
    Solve,
    /// Polar factorisation or polar inclusion of u through Y.
    Factorize,
    /// m-to-1 rearrangement of u, or its monotone rearrangement on Y when --Y is given.
    Rearrange,
    /// Generate a gallery instance and run the full pipeline on it.
    Gallery,
    /// Check a plan and ψ for polar inclusion and optimality.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Sampled map u (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub u: Option<PathBuf>,
    /// Target measure Y (JSON or CSV).
    #[arg(long = "Y", global = true, value_name = "FILE")]
    pub y: Option<PathBuf>,
    /// Plan file for verify.
    #[arg(long, global = true, value_name = "FILE")]
    pub plan: Option<PathBuf>,
    /// ψ values for verify; defaults to the plan file's own.
    #[arg(long, global = true, value_name = "FILE")]
    pub psi: Option<PathBuf>,
    #[arg(long, global = true, env = "POLARFACT_TOL", default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub cluster_tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub m: usize,
    /// Heavy value designations (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub heavy: Option<PathBuf>,
    /// Gallery instance name.
    #[arg(long, global = true)]
    pub name: Option<String>,
    #[arg(long, global = true, default_value_t = 8)]
    pub grid: usize,
    /// Cross-check the optimum against brute force (uniform, n ≤ 8).
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Subdivide target sites instead of failing when atoms must split.
    #[arg(long, global = true)]
    pub refine_split: bool,
    /// Output file; a directory for gallery.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            u: None,
            y: None,
            plan: None,
            psi: None,
            tol: DEFAULT_TOL,
            cluster_tol: 0.0,
            seed: 0,
            m: 1,
            heavy: None,
            name: None,
            grid: 8,
            oracle: false,
            refine_split: false,
            out: None,
            format: Format::Json,
        }
    }
}

/// What a command produced: its exit code, the report body and an optional
/// diagnostic for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub body: String,
    pub message: Option<String>,
}

impl Outcome {
    fn ok(code: i32, body: String) -> Self {
        Outcome { code, body, message: None }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        Outcome {
            code,
            body: String::new(),
            message: Some(message.into()),
        }
    }
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NumericalFailure(_) | Error::CertificateMissing(_) | Error::InclusionNotCertified { .. } => {
                EXIT_CERTIFICATE
            }
            _ => EXIT_INVALID,
        };
        Outcome::fail(code, e.to_string())
    }
}

type Step<T> = std::result::Result<T, Outcome>;

fn need<'a>(path: &'a Option<PathBuf>, flag: &str) -> Step<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Outcome::fail(EXIT_INVALID, format!("missing required flag --{flag}")))
}

/// Runs one command. Output files other than the report (gallery instance
/// files) are written here; the report itself is left to the caller.
pub fn run(command: Command, cfg: &RunConfig) -> Outcome {
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Outcome::fail(EXIT_INVALID, format!("--tol must be positive, got {}", cfg.tol));
    }
    if !(cfg.cluster_tol >= 0.0 && cfg.cluster_tol.is_finite()) {
        return Outcome::fail(EXIT_INVALID, format!("--cluster-tol must be non-negative, got {}", cfg.cluster_tol));
    }
    let result = match command {
        Command::Solve => cmd_solve(cfg),
        Command::Factorize => cmd_factorize(cfg),
        Command::Rearrange => cmd_rearrange(cfg),
        Command::Gallery => cmd_gallery(cfg),
        Command::Verify => cmd_verify(cfg),
    };
    result.unwrap_or_else(|o| o)
}

/// Runs the command and delivers the report to `--out` or stdout.
pub fn main_with(cli: Cli) -> i32 {
    let outcome = run(cli.command, &cli.config);
    if let Some(msg) = &outcome.message {
        eprintln!("polarfact: {msg}");
    }
    if outcome.body.is_empty() {
        return outcome.code;
    }
    let target = match (&cli.config.out, cli.command) {
        (Some(dir), Command::Gallery) => Some(dir.join(format!("report.{}", extension(cli.config.format)))),
        (out, _) => out.clone(),
    };
    match target {
        Some(path) => {
            if let Err(e) = write_text(&path, &outcome.body) {
                eprintln!("polarfact: {e}");
                return EXIT_INVALID;
            }
        }
        None => print!("{}", outcome.body),
    }
    outcome.code
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Text => "txt",
    }
}

fn table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<width$}  {v}");
    }
    s
}

fn kv_csv(rows: &[(String, String)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).expect("in-memory write");
    for (k, v) in rows {
        w.write_record([k, v]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn triplets_csv(triplets: &[Triplet]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in triplets {
        w.serialize(t).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn map_csv(map: &SampledMap) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let k = map.codomain_dimension();
    let mut header = vec!["label".to_string(), "weight".to_string()];
    header.extend((1..=k).map(|c| format!("value_{c}")));
    w.write_record(&header).expect("in-memory write");
    let dom = map.domain();
    for i in 0..map.len() {
        let mut rec = vec![dom.label(i).to_string(), dom.weight(i).to_string()];
        rec.extend(map.value(i).iter().map(f64::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn inputs(cfg: &RunConfig) -> Step<(SampledMap, DiscreteMeasure)> {
    let u = read_map(need(&cfg.u, "u")?)?;
    let y = read_measure(need(&cfg.y, "Y")?)?;
    Ok((u, y))
}

pub fn cmd_solve(cfg: &RunConfig) -> Step<Outcome> {
    let (u, y) = inputs(cfg)?;
    let cost = build_cost(&u, &y)?;
    let sol = solve_mk(&cost, u.domain(), &y)?;
    let cert = sol.certificate;
    let oracle = if cfg.oracle {
        let optimum = brute_force_mk(&cost, u.domain(), &y)?;
        let agrees = (optimum - cert.objective).abs() <= 1e-9 * (1.0 + optimum.abs());
        Some((optimum, agrees))
    } else {
        None
    };
    let mut rows = vec![
        ("objective I".to_string(), cert.objective.to_string()),
        ("dual value".to_string(), cert.dual_value.to_string()),
        ("relative gap".to_string(), format!("{:e}", cert.relative_gap())),
        ("support size".to_string(), sol.plan.triplets().len().to_string()),
        ("pivots".to_string(), sol.pivots.to_string()),
    ];
    if let Some((optimum, agrees)) = oracle {
        rows.push(("oracle optimum".into(), optimum.to_string()));
        rows.push(("oracle agrees".into(), agrees.to_string()));
    }
    let body = match cfg.format {
        Format::Json => to_json(&json!({
            "certificate": cert,
            "relative_gap": cert.relative_gap(),
            "pivots": sol.pivots,
            "triplets": sol.plan.triplets(),
            "phi_c": sol.duals.phi_c,
            "phi": sol.duals.phi,
            "oracle": oracle.map(|(optimum, agrees)| json!({"optimum": optimum, "agrees": agrees})),
        })),
        Format::Csv => triplets_csv(sol.plan.triplets()),
        Format::Text => table(&rows),
    };
    match oracle {
        Some((optimum, false)) => Ok(Outcome {
            code: EXIT_CERTIFICATE,
            body,
            message: Some(format!("solver optimum {} differs from brute force {optimum}", cert.objective)),
        }),
        _ => Ok(Outcome::ok(EXIT_OK, body)),
    }
}

pub fn cmd_factorize(cfg: &RunConfig) -> Step<Outcome> {
    let (u, y) = inputs(cfg)?;
    let r = polar_factorize(&u, &y, cfg.tol)?;
    let body = match cfg.format {
        Format::Json => to_json(&r.report()),
        Format::Csv => triplets_csv(r.plan.triplets()),
        Format::Text => table(&r.summary_rows()),
    };
    let code = match r.classification {
        Classification::Factorisation => EXIT_OK,
        Classification::InclusionOnly => EXIT_INCLUSION_ONLY,
    };
    Ok(Outcome::ok(code, body))
}

fn multiplicity_rows(report: &MultiplicityReport) -> Vec<(String, String)> {
    let mut rows = vec![
        ("atoms".to_string(), report.atoms.len().to_string()),
        ("heavy mass".to_string(), report.heavy_mass().to_string()),
        (
            "light count".to_string(),
            report.almost_m_to_1.map_or_else(|| "mixed".into(), |m| m.to_string()),
        ),
    ];
    for a in &report.atoms {
        let tag = if a.heavy { " heavy" } else { "" };
        rows.push((format!("{:?}", a.value), format!("{} points, mass {}{tag}", a.point_count, a.mass)));
    }
    rows
}

pub fn cmd_rearrange(cfg: &RunConfig) -> Step<Outcome> {
    let u = read_map(need(&cfg.u, "u")?)?;
    if let Some(ypath) = &cfg.y {
        let y = read_measure(ypath)?;
        let opts = RearrangeOptions {
            cluster_tol: cfg.cluster_tol,
            split: if cfg.refine_split { SplitMode::Refine } else { SplitMode::Strict },
        };
        let r = monotone_rearrangement(&u, &y, opts)?;
        let body = match cfg.format {
            Format::Json => to_json(&json!({
                "map": r.u_sharp,
                "psi": r.psi.values(),
                "max_gap": r.max_gap,
                "refined": r.refined,
                "site_atom": r.site_atom,
            })),
            Format::Csv => map_csv(&r.u_sharp),
            Format::Text => table(&[
                ("sites".into(), r.u_sharp.len().to_string()),
                ("value atoms".into(), r.law.len().to_string()),
                ("refined".into(), r.refined.to_string()),
                ("max Fenchel gap".into(), format!("{:e}", r.max_gap)),
            ]),
        };
        return Ok(Outcome::ok(EXIT_OK, body));
    }

    let heavy = match &cfg.heavy {
        Some(p) => read_heavy(p)?,
        None => HeavySet::none(),
    };
    let built = construct_m_to_1(&u, cfg.m, &heavy)?;
    if !equimeasurable(&u, &built.map, 0.0)? {
        return Err(Outcome::fail(EXIT_CERTIFICATE, "rearranged map lost equimeasurability"));
    }
    let report = multiplicity_report(&built.map, &heavy)?;
    let body = match cfg.format {
        Format::Json => to_json(&json!({ "map": built.map, "report": report })),
        Format::Csv => map_csv(&built.map),
        Format::Text => table(&multiplicity_rows(&report)),
    };
    Ok(Outcome::ok(EXIT_OK, body))
}

#[derive(Serialize)]
struct GalleryReport<'a> {
    name: &'a str,
    grid: usize,
    seed: u64,
    tol: f64,
    certificate: Certificate,
    relative_gap: f64,
    classification: Classification,
    max_gap: f64,
    conjugate_residual: f64,
    degeneracy_index: f64,
    split_index: f64,
    zero_counts: &'a [usize],
    max_light_count: usize,
}

pub fn cmd_gallery(cfg: &RunConfig) -> Step<Outcome> {
    let name = cfg
        .name
        .as_deref()
        .ok_or_else(|| Outcome::fail(EXIT_INVALID, "missing required flag --name"))?;
    let g = gallery_instance(name, cfg.grid, cfg.seed)?;
    let r = polar_factorize(&g.u, &g.y, cfg.tol)?;
    let d = degeneracy_report(&r.plan, &r.duals, &r.cost, cfg.tol)?;
    let mult = multiplicity_report(&g.u, &g.heavy)?;

    if let Some(dir) = &cfg.out {
        let files: [(&str, String); 5] = [
            ("u.json", to_json(&g.u)),
            ("Y.json", to_json(&g.y)),
            ("u_sharp.json", to_json(&g.u_sharp)),
            ("heavy.json", to_json(&g.heavy)),
            ("factorize.json", to_json(&r.report())),
        ];
        fs::create_dir_all(dir).map_err(|e| Outcome::fail(EXIT_INVALID, format!("{}: {e}", dir.display())))?;
        for (file, text) in files {
            write_text(&dir.join(file), &text)?;
        }
    }

    let report = GalleryReport {
        name,
        grid: cfg.grid,
        seed: cfg.seed,
        tol: cfg.tol,
        certificate: r.certificate,
        relative_gap: r.certificate.relative_gap(),
        classification: r.classification,
        max_gap: r.max_gap,
        conjugate_residual: r.conjugate_residual,
        degeneracy_index: d.degeneracy_index,
        split_index: d.split_index,
        zero_counts: &d.zero_counts,
        max_light_count: mult.max_light_count,
    };
    let body = match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["row", "weight", "zero_count"]).expect("in-memory write");
            for (i, c) in d.zero_counts.iter().enumerate() {
                w.write_record([i.to_string(), g.u.domain().weight(i).to_string(), c.to_string()])
                    .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
        }
        Format::Text => {
            let mut rows = r.summary_rows();
            rows.insert(0, ("instance".into(), format!("{name} N={} seed={}", cfg.grid, cfg.seed)));
            rows.push(("degeneracy index".into(), d.degeneracy_index.to_string()));
            rows.push(("split index".into(), d.split_index.to_string()));
            rows.push(("max points per value".into(), mult.max_light_count.to_string()));
            let counts: Vec<String> = d.zero_counts.iter().map(usize::to_string).collect();
            rows.push(("zero counts".into(), counts.join(" ")));
            table(&rows)
        }
    };
    Ok(Outcome::ok(EXIT_OK, body))
}

pub fn cmd_verify(cfg: &RunConfig) -> Step<Outcome> {
    let (u, y) = inputs(cfg)?;
    let file = read_plan(need(&cfg.plan, "plan")?)?;
    let psi_values = match (&cfg.psi, file.psi, file.phi) {
        (Some(p), _, _) => read_psi(p)?,
        (None, Some(psi), _) => psi,
        (None, None, Some(phi)) => {
            // ψ(y) = |y|²/2 − φ(y)
            let pts = y.points()?;
            if phi.len() != pts.len() {
                return Err(Error::DimensionMismatch {
                    expected: pts.len(),
                    found: phi.len(),
                }
                .into());
            }
            pts.iter().zip(&phi).map(|(p, f)| half_sq_norm(p) - f).collect()
        }
        (None, None, None) => return Err(Outcome::fail(EXIT_INVALID, "no ψ: pass --psi or a plan file carrying psi or phi")),
    };
    let psi = ConvexPotential::new(y.clone(), psi_values)?;
    let plan = TransportPlan::new(file.triplets, u.domain().weights().to_vec(), y.weights().to_vec())?;

    let inc = verify_polar_inclusion(&plan, &psi, &u, cfg.tol)?;
    let mut rows = vec![
        ("inclusion".to_string(), inc.holds.to_string()),
        ("max Fenchel gap".to_string(), format!("{:e}", inc.max_gap)),
    ];
    let mut record = json!({
        "inclusion": inc.holds,
        "max_gap": inc.max_gap,
        "worst": inc.worst,
        "tol": cfg.tol,
    });
    let code = if inc.holds {
        let opt = verify_optimality_of_inclusion(&plan, &psi, &u, cfg.tol)?;
        rows.push(("optimal".into(), opt.optimal.to_string()));
        rows.push(("objective I".into(), opt.objective.to_string()));
        rows.push(("optimum".into(), opt.optimum.to_string()));
        rows.push(("I - optimum".into(), format!("{:e}", opt.delta())));
        rows.push(("J".into(), format!("{:e}", opt.shifted)));
        record["optimal"] = json!(opt.optimal);
        record["objective"] = json!(opt.objective);
        record["optimum"] = json!(opt.optimum);
        record["delta"] = json!(opt.delta());
        record["shifted"] = json!(opt.shifted);
        if opt.optimal {
            EXIT_OK
        } else {
            EXIT_OPTIMALITY
        }
    } else {
        EXIT_INCLUSION
    };
    let body = match cfg.format {
        Format::Json => to_json(&record),
        Format::Csv => kv_csv(&rows),
        Format::Text => table(&rows),
    };
    let message = match code {
        EXIT_INCLUSION => Some(format!("inclusion fails: max gap {:e} at {:?}", inc.max_gap, inc.worst)),
        EXIT_OPTIMALITY => Some("plan is not optimal".to_string()),
        _ => None,
    };
    Ok(Outcome { code, body, message })
}
