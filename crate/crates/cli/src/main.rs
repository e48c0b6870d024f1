use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use solitonjet::curvature::{general_identity_suite, CurvatureBundle};
use solitonjet::metricfile::parse_metric_file;
use solitonjet::quad::{cigar_circle_setup, integral_report, make_cutoff};
use solitonjet::report::{CheckReport, Tolerances};
use solitonjet::sampling::{default_domain, sample_points};
use solitonjet::soliton::soliton_suite;
use solitonjet::tensor::{Geometry, MetricSpec};
use solitonjet::zoo::{self, bryant, ZooEntry, ZooGeometry};

#[derive(Parser)]
#[command(name = "solitonjet", version, about = "Curvature identities and soliton checks on Taylor jets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Metric file to check.
    file: Option<PathBuf>,
    /// Built-in zoo entry instead of a file (e.g. cigar_cross_line, round_sphere4).
    #[arg(long, conflicts_with = "file")]
    zoo: Option<String>,
}

#[derive(Args)]
struct Output {
    /// One JSON record per line instead of tab-separated text.
    #[arg(long)]
    json: bool,
    /// Six significant digits instead of seventeen.
    #[arg(long)]
    human: bool,
    /// Override every tolerance with this value.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct Sampling {
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Jet order of the metric expansion.
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// General curvature identities (valid for every metric).
    Identities {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// Soliton equation, lemma identities, integrability conditions.
    Soliton {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// Scalar divergences div3(C), div4(W), div2(B) at one point.
    Div {
        #[command(flatten)]
        source: Source,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Integral identity on the cigar times a circle.
    Integral {
        /// Cutoff threshold.
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Finest grid size per axis; grid/4 and grid/2 are run for refinement.
        #[arg(long, default_value_t = 128)]
        grid: usize,
        /// Circle length.
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        period: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Integrate and check the rotationally symmetric steady profile.
    Bryant {
        #[arg(long, default_value_t = 10.0)]
        rmax: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Local error tolerance of the integrator.
        #[arg(long, default_value_t = 1e-12)]
        shoot_tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Write a zoo entry as a metric file.
    Export {
        #[arg(long)]
        zoo: String,
        /// Output path; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the zoo with expected flags and constants.
    List,
}

const IDENTITIES_ORDER: usize = 5;
const SOLITON_ORDER: usize = 7;
const DIV_ORDER: usize = 7;

enum Loaded {
    File(MetricSpec),
    Zoo(ZooEntry),
}

impl Loaded {
    fn spec(&self) -> Option<&MetricSpec> {
        match self {
            Loaded::File(s) => Some(s),
            Loaded::Zoo(e) => e.spec(),
        }
    }
}

fn load(source: &Source) -> Result<Loaded> {
    match (&source.file, &source.zoo) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let spec = parse_metric_file(&text).with_context(|| format!("parsing {}", path.display()))?;
            Ok(Loaded::File(spec))
        }
        (None, Some(name)) => Ok(Loaded::Zoo(zoo::builtin(name)?)),
        _ => bail!("give either a metric file or --zoo NAME"),
    }
}

fn closed_form(loaded: &Loaded) -> Result<&MetricSpec> {
    loaded
        .spec()
        .context("this entry has no closed form; use the `bryant` subcommand")
}

fn points_for(spec: &MetricSpec, sampling: &Sampling) -> Vec<Vec<f64>> {
    let domain = spec.domain.clone().unwrap_or_else(|| default_domain(spec.dim()));
    sample_points(&domain, sampling.points, sampling.seed)
}

fn tolerances(output: &Output) -> Tolerances {
    Tolerances { override_all: output.tol }
}

fn emit(report: &CheckReport, output: &Output) -> Result<ExitCode> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if output.json {
        for r in &report.records {
            writeln!(out, "{}", serde_json::to_string(r)?)?;
        }
    } else {
        out.write_all(report.render_text(output.human).as_bytes())?;
    }
    if report.records.iter().any(|r| r.note.contains("[warning:")) {
        eprintln!("warning: the input does not satisfy the soliton equation at some sample points");
    }
    let failures = report.failures().count();
    if failures > 0 {
        eprintln!("{failures} check(s) failed");
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Identities { source, sampling, output } => {
            let loaded = load(&source)?;
            let spec = closed_form(&loaded)?;
            let pts = points_for(spec, &sampling);
            let order = sampling.order.unwrap_or(IDENTITIES_ORDER);
            let report = general_identity_suite(spec, &pts, order, &tolerances(&output))?;
            emit(&report, &output)
        }
        Command::Soliton { source, sampling, output } => {
            let loaded = load(&source)?;
            let tol = tolerances(&output);
            let report = match &loaded {
                Loaded::Zoo(entry) if matches!(entry.geometry, ZooGeometry::Bryant) => {
                    let profile = bryant::solve(10.0, 0.05, 1e-12)?;
                    bryant::profile_report(&profile, &tol)?
                }
                Loaded::Zoo(entry) => {
                    let spec = entry.spec().unwrap();
                    let pts = points_for(spec, &sampling);
                    zoo::verify_entry(entry, &pts, sampling.order.unwrap_or(SOLITON_ORDER), &tol)?
                }
                Loaded::File(spec) => {
                    let pts = points_for(spec, &sampling);
                    soliton_suite(spec, &pts, sampling.order.unwrap_or(SOLITON_ORDER), &tol)?
                }
            };
            emit(&report, &output)
        }
        Command::Div { source, at, order, output } => {
            let loaded = load(&source)?;
            let spec = closed_form(&loaded)?;
            if at.len() != spec.dim() {
                bail!("--at needs {} coordinates, got {}", spec.dim(), at.len());
            }
            let order = order.unwrap_or(DIV_ORDER);
            let b = CurvatureBundle::new(Geometry::from_spec(spec, &at, order)?);
            let hd = b.high_divergences()?;
            let r = b.scalar()?.as_scalar().value();
            let tol = tolerances(&output);
            let mut report = CheckReport::new();
            report.info("div.div3_cotton", &at, hd.div3_cotton, hd.div3_cotton, "C_ijk,kji");
            if spec.dim() >= 4 {
                report.info("div.div4_weyl", &at, hd.div4_weyl, hd.div4_weyl, "W_ikjl,iljk");
                report.info("div.div4_weyl_alt", &at, hd.div4_weyl_alt, hd.div4_weyl_alt, "W_ikjl,ikjl");
                let nf = spec.dim() as f64;
                let id = "divergence.div3c_div4w";
                report.compare(
                    id,
                    &at,
                    &[hd.div4_weyl],
                    &[-(nf - 3.0) / (nf - 2.0) * hd.div3_cotton],
                    tol.get(id),
                    "div4(W) = -(n-3)/(n-2) div3(C)",
                );
            }
            report.info("div.div2_bach", &at, hd.div2_bach, hd.div2_bach, "B_ij,ji");
            report.info("div.scalar", &at, r, r, "R");
            report.info("div.scalar_cubed_over_8", &at, r * r * r / 8.0, r * r * r / 8.0, "R^3 / 8");
            if spec.dim() == 3 {
                let id = "divergence.div3c_div2b";
                report.compare(id, &at, &[hd.div3_cotton], &[hd.div2_bach], tol.get(id), "div3(C) = div2(B) in dimension 3");
            }
            if let Loaded::Zoo(entry) = &loaded {
                if let Some(want) = entry.constants.div3_cotton_at_origin {
                    if at.iter().all(|&x| x == 0.0) {
                        let id = "div.div3_cotton_known";
                        report.compare(id, &at, &[hd.div3_cotton], &[want], tol.get(id), format!("known value {want}"));
                    }
                }
            }
            emit(&report, &output)
        }
        Command::Integral { s, grid, period, output } => {
            if grid < 8 || grid % 4 != 0 {
                bail!("--grid must be a multiple of 4 and at least 8, got {grid}");
            }
            let setup = cigar_circle_setup(period, s)?;
            let cutoff = make_cutoff(s)?;
            let (report, _) = integral_report(&setup, &cutoff, &[grid / 4, grid / 2, grid])?;
            emit(&report, &output)
        }
        Command::Bryant { rmax, step, shoot_tol, output } => {
            let profile = bryant::solve(rmax, step, shoot_tol)?;
            let mut report = CheckReport::new();
            let last = profile.nodes();
            let r = [profile.radius(last)];
            report.info("bryant.summary.nodes", &r, last as f64, last as f64, "grid nodes after the tip");
            report.info("bryant.summary.phi", &r, profile.phi[last], profile.phi[last], "phi(r_max)");
            report.info("bryant.summary.dphi", &r, profile.dphi[last], profile.dphi[last], "phi'(r_max)");
            report.info("bryant.summary.df", &r, profile.df[last], profile.df[last], "f'(r_max)");
            report.info("bryant.summary.f", &r, profile.f[last], profile.f[last], "f(r_max)");
            report.extend(bryant::profile_report(&profile, &tolerances(&output))?);
            emit(&report, &output)
        }
        Command::Export { zoo: name, out } => {
            let entry = zoo::builtin(&name)?;
            let text = zoo::export(&entry)?;
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::List => {
            for name in zoo::all_names() {
                let entry = zoo::builtin(name)?;
                println!("{}", entry.describe());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Joins the error chain, skipping causes the previous message already ends
/// with (library errors embed their source in their own message).
fn render_error(e: &anyhow::Error) -> String {
    let mut message = String::new();
    for cause in e.chain().map(|c| c.to_string()) {
        if !message.ends_with(&cause) {
            if !message.is_empty() {
                message.push_str(": ");
            }
            message.push_str(&cause);
        }
    }
    message
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            let broken_pipe = e
                .downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe);
            if broken_pipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {}", render_error(&e));
            ExitCode::from(2)
        }
    }
}
