//! `bicrit` command line: centers, mating combinatorics, obstructions,
//! realization, comparison and pictures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bicrit::center::{center_for_pair, center_solve};
use bicrit::levy::{levy_check, levy_check_configuration, ClusterConfiguration};
use bicrit::pullback::{self, initial_configuration, iterate, BicriticalCoefficients, PullbackRun};
use bicrit::render::{render_dynamical, render_parameter, Coloring, Image, RenderJob, Target, DEFAULT_BUDGET};
use bicrit::spectrum::{self, compare};
use bicrit::{cluster_data, pipeline, Angle, CharacteristicPair, Error, MatingSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bicrit", version, about = "Bicritical matings: combinatorics, realization and invariants")]
struct Cli {
    /// Write the result here instead of stdout (images: .png or .ppm)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print JSON instead of plain text
    #[arg(long, global = true)]
    json: bool,
    /// Convergence or comparison tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Starting point, written like "0.21+1.09i"
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    seed: Option<C64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Newton search for a center of z^d + c
    SolveCenter {
        #[arg(long)]
        degree: u64,
        #[arg(long)]
        period: Option<usize>,
        /// Characteristic pair "p/q,r/s"; replaces the seed
        #[arg(long)]
        pair: Option<String>,
    },
    /// Period, rotation number and critical displacement of the cluster cycle
    ClusterData {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Levy-cycle test for a mating spec or a cluster configuration
    LevyCheck {
        #[arg(long, required_unless_present = "configuration")]
        spec: Option<PathBuf>,
        #[arg(long, conflicts_with = "spec")]
        configuration: Option<PathBuf>,
    },
    /// Realize a mating by pullback iteration
    Realize {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = pullback::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Compare two maps (realize output or mating specs) up to conjugacy
    Compare {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Basin picture of a realized mating, or of z^d + c
    RenderDyn {
        #[arg(long, conflicts_with_all = ["c", "degree"])]
        spec: Option<PathBuf>,
        /// Polynomial parameter when no spec is given
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        c: Option<C64>,
        #[arg(long, default_value_t = 2)]
        degree: u64,
        #[command(flatten)]
        view: View,
        #[arg(long, value_enum, default_value_t = ColoringArg::Basin)]
        coloring: ColoringArg,
    },
    /// Escape-time picture of the multibrot set
    RenderParam {
        #[arg(long, default_value_t = 2)]
        degree: u64,
        #[command(flatten)]
        view: View,
        /// Parameter to mark; may be repeated
        #[arg(long = "marker", value_parser = parse_complex, allow_hyphen_values = true)]
        markers: Vec<C64>,
    },
    /// Levy check, cluster data, realization and spectrum in one report
    Pipeline {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = pullback::DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Also write a basin picture of the realized map
        #[arg(long)]
        image: Option<PathBuf>,
    },
}

#[derive(Args)]
struct View {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    center: Option<C64>,
    #[arg(long, default_value_t = 4.0)]
    width: f64,
    /// Pixels, "WxH" or a single number for a square
    #[arg(long, default_value = "512", value_parser = parse_size)]
    size: (usize, usize),
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColoringArg {
    Basin,
    EscapeTime,
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    t.parse::<C64>().map_err(|_| format!("not a complex number: {s:?}"))
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("bad size {s:?}");
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?)),
        None => {
            let n = s.parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

/// Failure with its exit code.
struct Fail {
    code: u8,
    message: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Obstructed(_) => 2,
            Error::NoConvergence { .. }
            | Error::DerivativeVanished(_)
            | Error::PeriodMismatch { .. }
            | Error::CenterNotFound(..)
            | Error::RootFindingFailure(_) => 3,
            _ => 4,
        };
        Fail {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Fail {
    Fail {
        code: 4,
        message: message.into(),
    }
}

type Outcome = Result<(Value, u8), Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn read_spec(path: &Path) -> Result<MatingSpec, Fail> {
    Ok(MatingSpec::from_json(&read(path)?)?)
}

fn realize(spec: &MatingSpec, tol: f64, max_iter: usize) -> Result<PullbackRun, Fail> {
    Ok(iterate(initial_configuration(spec)?, tol, max_iter)?)
}

#[derive(Deserialize)]
struct CoefficientFile {
    #[serde(rename = "A")]
    a: C64,
    #[serde(rename = "B")]
    b: C64,
    degree: u64,
}

/// A file holding either coefficients or a mating spec to realize.
fn load_map(path: &Path) -> Result<BicriticalCoefficients, Fail> {
    let text = read(path)?;
    if let Ok(c) = serde_json::from_str::<CoefficientFile>(&text) {
        return Ok(BicriticalCoefficients::new(c.a, c.b, c.degree)?);
    }
    let spec = MatingSpec::from_json(&text)?;
    let run = realize(&spec, pullback::DEFAULT_TOL, pullback::DEFAULT_MAX_ITER)?;
    Ok(pullback::finish(run)?.0)
}

fn pair_arg(s: &str, degree: u64) -> Result<CharacteristicPair, Fail> {
    let (a, b) = s.split_once(',').ok_or_else(|| invalid("pair must look like p/q,r/s"))?;
    let a: Angle = a.trim().parse()?;
    let b: Angle = b.trim().parse()?;
    Ok(CharacteristicPair::new(a, b, degree)?)
}

fn solve_center(cli: &Cli, degree: u64, period: Option<usize>, pair: Option<&str>) -> Outcome {
    if let Some(pair) = pair {
        let pair = pair_arg(pair, degree)?;
        let spec = center_for_pair(degree, &pair)?;
        let (r, _) = bicrit::verify_parameter(&spec);
        return Ok((
            json!({ "c": [spec.parameter.re, spec.parameter.im], "residual": r, "period": spec.period }),
            0,
        ));
    }
    let period = period.ok_or_else(|| invalid("--period is required with --seed"))?;
    let seed = cli.seed.ok_or_else(|| invalid("--seed or --pair is required"))?;
    let (spec, trace) = center_solve(degree, period, seed)?;
    Ok((
        json!({
            "c": [spec.parameter.re, spec.parameter.im],
            "residual": trace.residual,
            "iterations": trace.iterations,
        }),
        0,
    ))
}

fn run_realize(cli: &Cli, spec: &Path, max_iter: usize) -> Outcome {
    let spec = read_spec(spec)?;
    let run = realize(&spec, cli.tol.unwrap_or(pullback::DEFAULT_TOL), max_iter)?;
    if let Some((a, b)) = run.trace.collision {
        return Err(Fail::from(Error::Obstructed(format!("marked points {a} and {b} collide"))));
    }
    let mut out = json!({
        "iterations": run.trace.iterations,
        "converged": run.trace.converged,
        "max_move": run.trace.max_move,
        "degree": spec.degree,
    });
    let code = match run.coefficients {
        Some(c) => {
            out["A"] = json!([c.a.re, c.a.im]);
            out["B"] = json!([c.b.re, c.b.im]);
            0
        }
        None => 3,
    };
    Ok((out, code))
}

fn view_job(target: Target, view: &View, default_center: C64, coloring: Coloring, markers: Vec<C64>) -> RenderJob {
    RenderJob {
        target,
        center: view.center.unwrap_or(default_center),
        width: view.width,
        pixels: view.size,
        max_iterations: view.max_iter,
        coloring,
        markers,
    }
}

fn write_image(img: &Image, path: &Path) -> Result<(), Fail> {
    let io = |e: std::io::Error| invalid(format!("{}: {e}", path.display()));
    let png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if png {
        image::save_buffer(
            path,
            &img.data,
            img.width as u32,
            img.height as u32,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
    } else {
        img.write_ppm(fs::File::create(path).map_err(io)?).map_err(io)
    }
}

fn mating_target(run: PullbackRun) -> Result<(Target, Vec<C64>), Fail> {
    let cfg = run.configuration.clone();
    let (coeffs, _) = pullback::finish(run)?;
    let markers = cfg.positions.iter().filter_map(|p| p.finite()).collect();
    Ok((Target::from_configuration(coeffs, &cfg), markers))
}

fn render_dyn(cli: &Cli, spec: Option<&Path>, c: Option<C64>, degree: u64, view: &View, coloring: ColoringArg) -> Outcome {
    let out = cli.output.as_deref().ok_or_else(|| invalid("--output is required for images"))?;
    let coloring = match coloring {
        ColoringArg::Basin => Coloring::Basin,
        ColoringArg::EscapeTime => Coloring::EscapeTime,
    };
    let (target, markers, center) = match spec {
        Some(path) => {
            let spec = read_spec(path)?;
            let run = realize(&spec, cli.tol.unwrap_or(pullback::DEFAULT_TOL), pullback::DEFAULT_MAX_ITER)?;
            let (t, m) = mating_target(run)?;
            (t, m, C64::new(0.5, 0.0))
        }
        None => {
            let c = c.ok_or_else(|| invalid("give --spec or --c"))?;
            (Target::Polynomial { degree, c }, Vec::new(), C64::new(0.0, 0.0))
        }
    };
    let job = view_job(target, view, center, coloring, markers);
    write_image(&render_dynamical(&job, DEFAULT_BUDGET)?, out)?;
    Ok((json!({ "image": out, "pixels": [job.pixels.0, job.pixels.1] }), 0))
}

fn render_param(cli: &Cli, degree: u64, view: &View, markers: &[C64]) -> Outcome {
    let out = cli.output.as_deref().ok_or_else(|| invalid("--output is required for images"))?;
    let target = Target::Polynomial {
        degree,
        c: C64::new(0.0, 0.0),
    };
    let job = view_job(target, view, C64::new(0.0, 0.0), Coloring::EscapeTime, markers.to_vec());
    write_image(&render_parameter(degree, &job, DEFAULT_BUDGET)?, out)?;
    Ok((json!({ "image": out, "pixels": [job.pixels.0, job.pixels.1] }), 0))
}

fn run_pipeline(cli: &Cli, spec: &Path, max_iter: usize, image: Option<&Path>) -> Outcome {
    let spec = read_spec(spec)?;
    let report = pipeline(&spec, cli.tol.unwrap_or(pullback::DEFAULT_TOL), max_iter);
    let code = if report.obstructed() {
        2
    } else {
        match &report.failure {
            None => 0,
            Some(f) => Fail::from(f.error.clone()).code,
        }
    };
    if let (Some(path), Some(coeffs), Some(cfg)) = (image, report.coefficients, &report.configuration) {
        let view = View {
            center: None,
            width: 4.0,
            size: (512, 512),
            max_iter: 200,
        };
        let markers = cfg.positions.iter().filter_map(|p| p.finite()).collect();
        let job = view_job(
            Target::from_configuration(coeffs, cfg),
            &view,
            C64::new(0.5, 0.0),
            Coloring::Basin,
            markers,
        );
        write_image(&render_dynamical(&job, DEFAULT_BUDGET)?, path)?;
    }
    let value = serde_json::to_value(&report).map_err(|e| invalid(e.to_string()))?;
    Ok((value, code))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::SolveCenter { degree, period, pair } => solve_center(cli, *degree, *period, pair.as_deref()),
        Command::ClusterData { spec } => {
            let (data, _) = cluster_data(&read_spec(spec)?)?;
            Ok((serde_json::to_value(data).unwrap(), 0))
        }
        Command::LevyCheck { spec, configuration } => {
            let report = match (spec, configuration) {
                (Some(s), _) => levy_check(&read_spec(s)?)?,
                (None, Some(c)) => {
                    let cfg: ClusterConfiguration =
                        serde_json::from_str(&read(c)?).map_err(|e| invalid(e.to_string()))?;
                    levy_check_configuration(&cfg)?
                }
                (None, None) => return Err(invalid("give --spec or --configuration")),
            };
            let code = if report.obstructed { 2 } else { 0 };
            Ok((serde_json::to_value(report).unwrap(), code))
        }
        Command::Realize { spec, max_iter } => run_realize(cli, spec, *max_iter),
        Command::Compare { left, right } => {
            let (f, g) = (load_map(left)?, load_map(right)?);
            let cmp = compare(&f, &g, cli.tol.unwrap_or(spectrum::DEFAULT_TOL))?;
            let verdict = if cmp.equivalent {
                "consistent with equivalence"
            } else {
                "not equivalent"
            };
            Ok((
                json!({
                    "equivalent": cmp.equivalent,
                    "spectrum_distance": cmp.spectrum_distance,
                    "normal_form_distance": cmp.normal_form_distance,
                    "verdict": verdict,
                }),
                0,
            ))
        }
        Command::RenderDyn {
            spec,
            c,
            degree,
            view,
            coloring,
        } => render_dyn(cli, spec.as_deref(), *c, *degree, view, *coloring),
        Command::RenderParam { degree, view, markers } => render_param(cli, *degree, view, markers),
        Command::Pipeline { spec, max_iter, image } => run_pipeline(cli, spec, *max_iter, image.as_deref()),
    }
}

fn plain(value: &Value) -> String {
    match value {
        Value::Object(map) => map
            .iter()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, v)| format!("{k}: {}", compact(v)))
            .collect::<Vec<_>>()
            .join("\n"),
        v => compact(v),
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) if a.len() > 8 => format!("[{} values]", a.len()),
        v => v.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let images = matches!(cli.command, Command::RenderDyn { .. } | Command::RenderParam { .. });
    match run(&cli) {
        Ok((value, code)) => {
            let text = if cli.json {
                serde_json::to_string_pretty(&value).unwrap()
            } else {
                plain(&value)
            };
            match (&cli.output, images) {
                (Some(path), false) => {
                    if let Err(e) = fs::write(path, text + "\n") {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(4);
                    }
                }
                _ => {
                    let _ = writeln!(std::io::stdout(), "{text}");
                }
            }
            ExitCode::from(code)
        }
        Err(f) => {
            if cli.json {
                println!("{}", json!({ "error": f.message, "exit_code": f.code }));
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
