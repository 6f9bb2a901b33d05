use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use isoflow::freeboundary::{omega_surface_with, sigma_k_with, ConstructionOptions, FreeBoundaryCurve, ShootingReport};
use isoflow::integrate::{full_orbit, StepControl};
use isoflow::phase::{fixed_points, PhasePoint};
use isoflow::profile::{geodesic_residual, profile_from_orbit_with, ProfileCurve, ProfileOptions};
use isoflow::render::{portrait_svg, profile_csv, profile_svg};
use isoflow::triples::{enumerate_triples, validate_triple, CoefficientConvention, Triple};
use isoflow::verify::{run_suite, Suite};

const EXIT_VERIFY: u8 = 1;
const EXIT_IO: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_CONVERGENCE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "isoflow",
    version,
    about = "Phase portraits and free boundary profile curves for isoparametric triples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate admissible triples up to a dimension bound.
    ListTriples {
        #[arg(long, value_parser = clap::value_parser!(u32).range(3..))]
        max_n: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed points and their linearisation.
    Analyze {
        #[arg(long, value_parser = parse_triple)]
        triple: Triple,
    },
    /// SVG phase portrait with separatrices and sample orbits.
    Portrait {
        #[arg(long, value_parser = parse_triple)]
        triple: Triple,
        #[arg(long, default_value_t = 24)]
        orbits: usize,
        /// Offset into the low-discrepancy seed sequence.
        #[arg(long, default_value_t = 0)]
        seed: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// The free boundary curve through the k-th radial crossing of the separatrix.
    Sigma {
        #[arg(long, value_parser = parse_triple)]
        triple: Triple,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// The annulus-type free boundary curve found by shooting.
    Omega {
        #[arg(long, value_parser = parse_triple)]
        triple: Triple,
        #[arg(long, default_value_t = 1e-9)]
        gap_tol: f64,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Profile curve of the orbit through a given phase point.
    Profile {
        #[arg(long, value_parser = parse_triple)]
        triple: Triple,
        #[arg(long, allow_hyphen_values = true)]
        theta0: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha0: f64,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        /// Clip the profile to |t| <= t_max.
        #[arg(long)]
        t_max: Option<f64>,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Run the acceptance criteria.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
        suite: SuiteArg,
        /// Closed form of the damping coefficient; `printed` is expected to fail.
        #[arg(long, value_enum, default_value_t = CoefficientArg::Derived)]
        coefficient: CoefficientArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoefficientArg {
    Derived,
    Printed,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the extension of --out.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct Tolerances {
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_time: Option<f64>,
}

impl Tolerances {
    fn apply(&self, mut ctrl: StepControl) -> StepControl {
        if let Some(v) = self.rel_tol {
            ctrl.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            ctrl.abs_tol = v;
        }
        if let Some(v) = self.max_time {
            ctrl.max_time = v;
        }
        ctrl
    }
}

fn parse_triple(s: &str) -> Result<Triple, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected g,m1,m2".into());
    }
    let mut v = [0i64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("'{p}' is not an integer"))?;
    }
    validate_triple(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

/// Failure carrying its exit code.
struct Failure(u8, String);

impl From<isoflow::Error> for Failure {
    fn from(e: isoflow::Error) -> Self {
        let code = if e.is_precondition() { EXIT_PRECONDITION } else { EXIT_CONVERGENCE };
        Failure(code, e.to_string())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure(EXIT_IO, format!("{}: {e}", path.display())))
}

/// Writes to stdout, treating a closed pipe as the reader's choice rather than an error.
fn emit(text: &str) {
    let mut out = io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn print_json(v: &Value) {
    emit(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"));
}

fn format_for(output: &Output) -> Format {
    if let Some(f) = output.format {
        return f;
    }
    match output.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        Some("svg") => Format::Svg,
        _ => Format::Json,
    }
}

fn write_curve(output: &Output, curve: &ProfileCurve, summary: &Value) -> Result<(), Failure> {
    let Some(path) = &output.out else {
        return Ok(());
    };
    let body = match format_for(output) {
        Format::Csv => profile_csv(curve),
        Format::Svg => profile_svg(curve),
        Format::Json => {
            let v = json!({ "summary": summary, "samples": curve.samples });
            serde_json::to_string_pretty(&v).expect("serializable") + "\n"
        }
    };
    write_file(path, &body)
}

fn construction_summary(fbc: &FreeBoundaryCurve, report: Option<&ShootingReport>) -> Value {
    let s = fbc.summary(report);
    let mut v = serde_json::to_value(&s).expect("serializable");
    if let Some(r) = report {
        v["bracket"] = json!(r.bracket);
        v["iterations"] = json!(r.iterations);
    }
    v
}

fn construction_options(tol: &Tolerances) -> ConstructionOptions {
    let defaults = ConstructionOptions::default();
    ConstructionOptions { ctrl: tol.apply(defaults.ctrl), ..defaults }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::ListTriples { max_n, format, out } => {
            let list = enumerate_triples(max_n);
            let body = match format {
                Format::Csv | Format::Svg => {
                    let mut s = String::from("g,m1,m2,n,theta_star,m,delta,regime,exceptional\n");
                    for (t, d) in &list {
                        let regime = serde_json::to_value(d.regime).expect("serializable");
                        s.push_str(&format!(
                            "{},{},{},{},{:.16e},{:.16e},{:.16e},{},{}\n",
                            t.g,
                            t.m1,
                            t.m2,
                            d.n,
                            d.theta_star,
                            d.m,
                            d.delta,
                            regime.as_str().unwrap_or_default(),
                            d.exceptional
                        ));
                    }
                    s
                }
                Format::Json => {
                    let rows: Vec<_> = list.iter().map(|(_, d)| d).collect();
                    serde_json::to_string_pretty(&rows).expect("serializable") + "\n"
                }
            };
            match out {
                Some(p) => write_file(&p, &body)?,
                None => emit(&body),
            }
        }
        Command::Analyze { triple } => {
            let d = triple.data();
            let mut v = serde_json::to_value(d).expect("serializable");
            v["fixed_points"] = serde_json::to_value(fixed_points(&d)).expect("serializable");
            print_json(&v);
        }
        Command::Portrait { triple, orbits, seed, out, tol } => {
            let d = triple.data();
            let ctrl = tol.apply(StepControl::default());
            let svg = portrait_svg(&d, orbits, seed, &ctrl)?;
            write_file(&out, &svg)?;
            print_json(&json!({ "triple": triple, "orbits": orbits, "seed": seed, "out": out }));
        }
        Command::Sigma { triple, k, output, tol } => {
            let d = triple.data();
            let fbc = sigma_k_with(&d, k, &construction_options(&tol))?;
            let summary = construction_summary(&fbc, None);
            write_curve(&output, &fbc.curve, &summary)?;
            print_json(&summary);
        }
        Command::Omega { triple, gap_tol, output, tol } => {
            let d = triple.data();
            let (fbc, report) = omega_surface_with(&d, gap_tol, &construction_options(&tol))?;
            let summary = construction_summary(&fbc, Some(&report));
            write_curve(&output, &fbc.curve, &summary)?;
            print_json(&summary);
        }
        Command::Profile { triple, theta0, alpha0, r0, t_max, output, tol } => {
            let d = triple.data();
            let ctrl = tol.apply(StepControl::default().with_tolerance(1e-12));
            let orbit = full_orbit(&d, PhasePoint::new(theta0, alpha0), &[], &ctrl)?;
            let opts = ProfileOptions { window: t_max.map(|t| (-t, t)), ..ProfileOptions::default() };
            let curve = profile_from_orbit_with(&d, &orbit, (0.0, r0), &opts)?;
            let summary = json!({
                "triple": triple,
                "class": curve.klass,
                "samples": curve.len(),
                "ray_crossings": curve.ray_crossings,
                "r_minima": curve.r_minima,
                "self_intersections": curve.self_intersections.len(),
                "ends": [format!("{:?}", curve.ends.0), format!("{:?}", curve.ends.1)],
                "geodesic_residual": geodesic_residual(&d, &curve).ok(),
            });
            write_curve(&output, &curve, &summary)?;
            print_json(&summary);
        }
        Command::Verify { suite, coefficient } => {
            let suite = match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::All => Suite::All,
            };
            let conv = match coefficient {
                CoefficientArg::Derived => CoefficientConvention::Derived,
                CoefficientArg::Printed => CoefficientConvention::Printed,
            };
            let results = run_suite(suite, conv);
            for r in &results {
                emit(&(serde_json::to_string(r).expect("serializable") + "\n"));
            }
            let failed: Vec<u8> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
            if !failed.is_empty() {
                return Err(Failure(EXIT_VERIFY, format!("failing criteria: {failed:?}")));
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ISOFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure(2, format!("ISOFLOW_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure(2, e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
