//! Command-line surface: argument types, configuration resolution, and one
//! runner per subcommand.
//!
//! Numerical work lives in `vss-core`; this module only wires arguments to
//! library calls and results to files and stdout. Every computing command
//! can run in `f64` (default) or double-double extended precision
//! (`--extended-precision`); only `sweep` fans work out across threads, and
//! all file writes happen serially on the main thread.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use vss_core::asymptotics::{self, TailKind};
use vss_core::classifier::{self, ClassLabel};
use vss_core::dd::Dd;
use vss_core::error::Error as CoreError;
use vss_core::params::{self, DerivedConstants, ExponentConfig};
use vss_core::scalar::{lit, Real};
use vss_core::shooter::{self, IntegratorSettings, PlateauCrossing, Termination};
use vss_core::variational::{self, OPERATOR_CHECK_MIN_RADIUS};
use vss_core::verify::{self, Requirement};

use crate::persist::{self, OutputSink, SCHEMA_VERSION};
use crate::plot;

/// Failure carrying its process exit status: `1` failed checks, `2` invalid
/// configuration or arguments, `3` integration or measurement failure,
/// `64` usage.
pub struct AppError {
    pub code: u8,
    pub message: String,
}

impl AppError {
    pub fn config(message: impl Into<String>) -> Self {
        AppError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn failure(message: impl Into<String>) -> Self {
        AppError {
            code: 3,
            message: message.into(),
        }
    }

    pub fn checks(message: impl Into<String>) -> Self {
        AppError {
            code: 1,
            message: message.into(),
        }
    }

    /// Maps library errors onto the exit-status contract: configuration,
    /// argument, and bracket validation fail with 2; everything the
    /// integrator or the measurements report fails with 3.
    pub fn from_core<T: Real>(err: CoreError<T>) -> Self {
        let code = match &err {
            CoreError::WindowViolation { .. }
            | CoreError::InvalidShootingValue { .. }
            | CoreError::InvalidSetting { .. }
            | CoreError::InvalidBracket { .. } => 2,
            _ => 3,
        };
        AppError {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "vss",
    version,
    about = "Very-singular-solution profiles of fast diffusion with gradient absorption",
    long_about = "Integrates the radial self-similar profile f(r) with f(0) = a, f'(0) = 0 \
                  by shooting, classifies orbits (A: extinction, C: plateau crossing), \
                  bisects the critical shooting value, fits tail laws, computes the \
                  sensitivity with respect to a, and runs the verification pipeline."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Spatial dimension (default 1)
    #[arg(long = "N", global = true, value_name = "INT")]
    pub n: Option<u32>,

    /// Diffusion exponent, admissible for 2N/(N+1) < p < 2 (default 1.5)
    #[arg(long, global = true, value_name = "REAL", allow_negative_numbers = true)]
    pub p: Option<f64>,

    /// Absorption exponent, admissible for p/2 < q < p - N/(N+1) (default 0.9)
    #[arg(long, global = true, value_name = "REAL", allow_negative_numbers = true)]
    pub q: Option<f64>,

    /// JSON file with keys "N", "p", "q"; explicit flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Integration horizon (default 1e4)
    #[arg(long, global = true, value_name = "REAL", allow_negative_numbers = true)]
    pub rmax: Option<f64>,

    /// Relative step tolerance (default 1e-10)
    #[arg(long, global = true, value_name = "REAL", allow_negative_numbers = true)]
    pub rtol: Option<f64>,

    /// Absolute step tolerance (default 1e-30; profile tails decay through
    /// many orders of magnitude, so this stays far below them)
    #[arg(long, global = true, value_name = "REAL", allow_negative_numbers = true)]
    pub atol: Option<f64>,

    /// Directory receiving output files (created if missing)
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Worker threads for sweep classification (other commands are serial)
    #[arg(long, global = true, value_name = "INT", default_value_t = 1)]
    pub jobs: usize,

    /// Compute in double-double arithmetic (~31 significant digits);
    /// applies to solve, classify, sweep, bisect, and variational
    #[arg(long, global = true)]
    pub extended_precision: bool,

    /// Print a machine-readable JSON summary instead of human text
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate one profile; writes profile.csv, meta.json, profile.svg
    Solve {
        /// Shooting value f(0)
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        /// Record a plateau crossing and continue to the horizon instead of
        /// stopping there (tail diagnostics need the continued orbit)
        #[arg(long)]
        past_crossing: bool,
    },

    /// Classify one shooting value: A (extinction after one slope flip),
    /// C (w crossed the plateau band), or undetermined at the horizon
    Classify {
        /// Shooting value f(0)
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
    },

    /// Classify a logarithmic grid of shooting values; writes sweep.csv
    Sweep {
        /// Grid specification log:<lo>:<hi>:<count>
        #[arg(long, value_parser = parse_grid, default_value = "log:1e-3:1e3:61")]
        grid: GridSpec,
        /// Output file name, relative to --out-dir
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },

    /// Seed a bracket geometrically and bisect the critical shooting value;
    /// writes bracket.json
    Bisect {
        /// Target relative bracket width (a_hi - a_lo) / a_lo (extended
        /// precision is needed below ~1e-9; it resolves widths to ~1e-15)
        #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
        width: f64,
        /// Output file name, relative to --out-dir
        #[arg(long, default_value = "bracket.json")]
        out: PathBuf,
    },

    /// Fit tail laws of a stored profile; writes tails.json
    Tails {
        /// A profile.csv written by `vss solve`
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Output file name, relative to --out-dir
        #[arg(long, default_value = "tails.json")]
        out: PathBuf,
    },

    /// Integrate the sensitivity of the profile to the shooting value and
    /// its structural diagnostics; writes var.csv
    Variational {
        /// Shooting value f(0)
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        /// Output file name, relative to --out-dir
        #[arg(long, default_value = "var.csv")]
        out: PathBuf,
    },

    /// Run every verification check and report pass/fail per check.
    /// Exits 1 if any check fails. Checks run on the tool's canonical
    /// configurations; --N/--p/--q are validated but do not change them
    Verify,
}

/// Logarithmic grid request `log:<lo>:<hi>:<count>`.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

fn parse_grid(text: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 4 || parts[0] != "log" {
        return Err(format!("expected log:<lo>:<hi>:<count>, got {text:?}"));
    }
    let lo: f64 = parts[1]
        .parse()
        .map_err(|e| format!("bad lower bound {:?}: {e}", parts[1]))?;
    let hi: f64 = parts[2]
        .parse()
        .map_err(|e| format!("bad upper bound {:?}: {e}", parts[2]))?;
    let count: usize = parts[3]
        .parse()
        .map_err(|e| format!("bad point count {:?}: {e}", parts[3]))?;
    if !lo.is_finite() || !hi.is_finite() || !(lo > 0.0) || !(hi > lo) {
        return Err("grid needs 0 < lo < hi, both finite".to_string());
    }
    if count < 2 {
        return Err("grid needs at least two points".to_string());
    }
    Ok(GridSpec { lo, hi, count })
}

/// Resolved run context: validated configuration and settings in `f64`,
/// plus the output options. Wider scalar types are derived on demand.
struct Context {
    config: ExponentConfig<f64>,
    consts: DerivedConstants<f64>,
    settings: IntegratorSettings<f64>,
    out_dir: PathBuf,
    jobs: usize,
    json: bool,
    extended: bool,
}

impl Context {
    fn resolve(global: &GlobalArgs) -> Result<Self, AppError> {
        let mut n = global.n;
        let mut p = global.p;
        let mut q = global.q;
        if let Some(path) = &global.config {
            let (file_n, file_p, file_q) = read_config_file(path)?;
            n = n.or(file_n);
            p = p.or(file_p);
            q = q.or(file_q);
        }
        let config = ExponentConfig::new(n.unwrap_or(1), p.unwrap_or(1.5), q.unwrap_or(0.9));
        let consts = params::validate(config).map_err(AppError::from_core)?;
        let mut settings = IntegratorSettings::defaults();
        if let Some(r_max) = global.rmax {
            settings.r_max = r_max;
        }
        if let Some(rel_tol) = global.rtol {
            settings.rel_tol = rel_tol;
        }
        if let Some(abs_tol) = global.atol {
            settings.abs_tol = abs_tol;
        }
        settings.validate().map_err(AppError::from_core)?;
        Ok(Context {
            config,
            consts,
            settings,
            out_dir: global.out_dir.clone(),
            jobs: global.jobs,
            json: global.json,
            extended: global.extended_precision,
        })
    }

    /// Re-derives the constants in a wider scalar. The `f64` validation
    /// already passed and widening an `f64` is exact, so the window
    /// admission cannot change.
    fn consts_as<T: Real>(&self) -> DerivedConstants<T> {
        params::validate(ExponentConfig::new(
            self.config.n,
            lit::<T>(self.config.p),
            lit::<T>(self.config.q),
        ))
        .expect("window admission is invariant under exact widening")
    }

    fn settings_as<T: Real>(&self) -> IntegratorSettings<T> {
        IntegratorSettings {
            rel_tol: lit(self.settings.rel_tol),
            abs_tol: lit(self.settings.abs_tol),
            r_max: lit(self.settings.r_max),
            max_steps: self.settings.max_steps,
            samples_per_decade: self.settings.samples_per_decade,
            plateau_margin: lit(self.settings.plateau_margin),
            r_switch: self.settings.r_switch.map(lit),
        }
    }

    fn sink(&self) -> Result<OutputSink, AppError> {
        OutputSink::new(&self.out_dir)
    }

    fn manifest_header<T: Real>(
        &self,
        consts: &DerivedConstants<T>,
        settings: &IntegratorSettings<T>,
    ) -> persist::ManifestHeader {
        persist::ManifestHeader {
            command: persist::command_line(),
            timestamp: persist::timestamp(),
            config: persist::config_json(&consts.config),
            constants: persist::constants_json(consts),
            settings: persist::settings_json(settings),
        }
    }
}

fn read_config_file(path: &Path) -> Result<(Option<u32>, Option<f64>, Option<f64>), AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::config(format!("cannot read config file {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| AppError::config(format!("{}: not valid JSON: {e}", path.display())))?;
    let object = value.as_object().ok_or_else(|| {
        AppError::config(format!(
            "{}: expected a JSON object with keys \"N\", \"p\", \"q\"",
            path.display()
        ))
    })?;
    for key in object.keys() {
        if !matches!(key.as_str(), "N" | "p" | "q") {
            return Err(AppError::config(format!(
                "{}: unknown key {key:?} (expected \"N\", \"p\", \"q\")",
                path.display()
            )));
        }
    }
    let n = match object.get("N") {
        None => None,
        Some(v) => Some(
            v.as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| {
                    AppError::config(format!(
                        "{}: \"N\" must be a non-negative integer",
                        path.display()
                    ))
                })?,
        ),
    };
    let real_key = |key: &'static str| -> Result<Option<f64>, AppError> {
        match object.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| {
                AppError::config(format!("{}: {key:?} must be a number", path.display()))
            }),
        }
    };
    Ok((n, real_key("p")?, real_key("q")?))
}

pub fn run(cli: Cli) -> Result<(), AppError> {
    let ctx = Context::resolve(&cli.global)?;
    match cli.command {
        Command::Solve { a, past_crossing } => {
            if ctx.extended {
                run_solve::<Dd>(a, past_crossing, &ctx)
            } else {
                run_solve::<f64>(a, past_crossing, &ctx)
            }
        }
        Command::Classify { a } => {
            if ctx.extended {
                run_classify::<Dd>(a, &ctx)
            } else {
                run_classify::<f64>(a, &ctx)
            }
        }
        Command::Sweep { grid, out } => {
            if ctx.extended {
                run_sweep::<Dd>(&grid, &out, &ctx)
            } else {
                run_sweep::<f64>(&grid, &out, &ctx)
            }
        }
        Command::Bisect { width, out } => {
            if ctx.extended {
                run_bisect::<Dd>(width, &out, &ctx)
            } else {
                run_bisect::<f64>(width, &out, &ctx)
            }
        }
        Command::Tails { input, out } => run_tails(&input, &out, &ctx),
        Command::Variational { a, out } => {
            if ctx.extended {
                run_variational::<Dd>(a, &out, &ctx)
            } else {
                run_variational::<f64>(a, &out, &ctx)
            }
        }
        Command::Verify => run_verify(&ctx),
    }
}

fn run_solve<T: Real>(a: f64, past_crossing: bool, ctx: &Context) -> Result<(), AppError> {
    let consts = ctx.consts_as::<T>();
    let settings = ctx.settings_as::<T>();
    let crossing = if past_crossing {
        PlateauCrossing::Record
    } else {
        PlateauCrossing::Stop
    };
    let profile = shooter::integrate_with(lit::<T>(a), &consts, &settings, crossing)
        .map_err(AppError::from_core)?;

    let meta = json!({
        "schema_version": SCHEMA_VERSION,
        "a": persist::num(profile.a),
        "termination": persist::termination_json(&profile.termination),
        "R": persist::opt_num(profile.r_extinction),
        "R1": persist::opt_num(profile.r_flip),
        "r_cross": persist::opt_num(profile.r_cross),
        "settings": persist::settings_json(&settings),
    });
    let svg_samples: Vec<(f64, f64, f64)> = profile
        .samples
        .iter()
        .map(|s| (s.r.to_f64_lossy(), s.f.to_f64_lossy(), s.w.to_f64_lossy()))
        .collect();

    let mut sink = ctx.sink()?;
    sink.write(Path::new("profile.csv"), persist::profile_csv(&profile).as_bytes())?;
    sink.write(Path::new("meta.json"), persist::pretty(&meta).as_bytes())?;
    sink.write(
        Path::new("profile.svg"),
        plot::profile_svg(a, &svg_samples, consts.w_star.to_f64_lossy()).as_bytes(),
    )?;
    sink.write_manifest(&ctx.manifest_header(&consts, &settings))?;

    if ctx.json {
        print!(
            "{}",
            persist::pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "a": persist::num(profile.a),
                "termination": persist::termination_json(&profile.termination),
                "R": persist::opt_num(profile.r_extinction),
                "R1": persist::opt_num(profile.r_flip),
                "r_cross": persist::opt_num(profile.r_cross),
                "samples": profile.samples.len(),
                "outputs": sink.outputs_json(),
            }))
        );
    } else {
        println!(
            "a = {a}: {}; {} samples out to r = {:.6e}",
            describe_termination(&profile.termination),
            profile.samples.len(),
            profile.last().r.to_f64_lossy()
        );
        println!("wrote {}", sink.written_list());
    }
    Ok(())
}

fn run_classify<T: Real>(a: f64, ctx: &Context) -> Result<(), AppError> {
    let consts = ctx.consts_as::<T>();
    let settings = ctx.settings_as::<T>();
    let label =
        classifier::classify(lit::<T>(a), &consts, &settings).map_err(AppError::from_core)?;
    if ctx.json {
        print!("{}", persist::pretty(&label_json(a, &label, &consts)));
    } else {
        println!("{}", describe_label(a, &label, &consts));
    }
    Ok(())
}

fn label_json<T: Real>(a: f64, label: &ClassLabel<T>, consts: &DerivedConstants<T>) -> Value {
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "a": a,
        "label": label_name(label),
        "R": Value::Null,
        "R1": Value::Null,
        "r_cross": Value::Null,
        "w_at_horizon": Value::Null,
        "wprime_at_horizon": Value::Null,
        "w_star": persist::num(consts.w_star),
    });
    let fields = doc.as_object_mut().expect("label document is an object");
    match label {
        ClassLabel::A {
            r_extinction,
            r_flip,
        } => {
            fields.insert("R".into(), persist::num(*r_extinction));
            fields.insert("R1".into(), persist::num(*r_flip));
        }
        ClassLabel::C { r_cross } => {
            fields.insert("r_cross".into(), persist::num(*r_cross));
        }
        ClassLabel::Undetermined {
            w_at_horizon,
            wprime_at_horizon,
        } => {
            fields.insert("w_at_horizon".into(), persist::num(*w_at_horizon));
            fields.insert("wprime_at_horizon".into(), persist::num(*wprime_at_horizon));
        }
    }
    doc
}

fn label_name<T: Real>(label: &ClassLabel<T>) -> &'static str {
    match label {
        ClassLabel::A { .. } => "A",
        ClassLabel::C { .. } => "C",
        ClassLabel::Undetermined { .. } => "U",
    }
}

fn describe_label<T: Real>(a: f64, label: &ClassLabel<T>, consts: &DerivedConstants<T>) -> String {
    match label {
        ClassLabel::A {
            r_extinction,
            r_flip,
        } => format!(
            "a = {a}: A — extinction at R = {:.6e} after the w-slope flip at R1 = {:.6e}",
            r_extinction.to_f64_lossy(),
            r_flip.to_f64_lossy()
        ),
        ClassLabel::C { r_cross } => format!(
            "a = {a}: C — w crossed the plateau band at r = {:.6e}",
            r_cross.to_f64_lossy()
        ),
        ClassLabel::Undetermined {
            w_at_horizon,
            wprime_at_horizon,
        } => format!(
            "a = {a}: undetermined at the horizon — w = {:.6e} against w* = {:.6e}, w' = {:.6e}",
            w_at_horizon.to_f64_lossy(),
            consts.w_star.to_f64_lossy(),
            wprime_at_horizon.to_f64_lossy()
        ),
    }
}

fn run_sweep<T: Real>(grid: &GridSpec, out: &Path, ctx: &Context) -> Result<(), AppError> {
    let consts = ctx.consts_as::<T>();
    let settings = ctx.settings_as::<T>();
    let values: Vec<T> = classifier::log_grid(lit::<T>(grid.lo), lit::<T>(grid.hi), grid.count);
    let rows = classifier::sweep(&values, &consts, &settings, ctx.jobs);

    let mut sink = ctx.sink()?;
    sink.write(out, persist::sweep_csv(&rows).as_bytes())?;
    sink.write_manifest(&ctx.manifest_header(&consts, &settings))?;

    let count_of = |pred: &dyn Fn(&Result<ClassLabel<T>, CoreError<T>>) -> bool| {
        rows.iter().filter(|(_, outcome)| pred(outcome)).count()
    };
    let n_a = count_of(&|o| matches!(o, Ok(l) if l.is_a()));
    let n_c = count_of(&|o| matches!(o, Ok(l) if l.is_c()));
    let n_u = count_of(&|o| matches!(o, Ok(l) if l.is_undetermined()));
    let n_err = count_of(&|o| o.is_err());

    if ctx.json {
        print!(
            "{}",
            persist::pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "grid": { "kind": "log", "lo": grid.lo, "hi": grid.hi, "count": grid.count },
                "counts": { "A": n_a, "C": n_c, "undetermined": n_u, "error": n_err },
                "outputs": sink.outputs_json(),
            }))
        );
    } else {
        println!(
            "classified {} shooting values in [{:e}, {:e}]: {n_a} A, {n_u} undetermined, {n_c} C, {n_err} errors",
            values.len(),
            grid.lo,
            grid.hi
        );
        println!("wrote {}", sink.written_list());
    }
    Ok(())
}

fn run_bisect<T: Real>(width: f64, out: &Path, ctx: &Context) -> Result<(), AppError> {
    let consts = ctx.consts_as::<T>();
    let settings = ctx.settings_as::<T>();
    let (seed_lo, seed_hi) =
        classifier::seed_bracket(&consts, &settings).map_err(AppError::from_core)?;
    let bracket = classifier::bisect(seed_lo, seed_hi, lit::<T>(width), &consts, &settings)
        .map_err(AppError::from_core)?;

    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "a_lo": persist::num(bracket.a_lo),
        "a_hi": persist::num(bracket.a_hi),
        "width": persist::num(bracket.a_hi - bracket.a_lo),
        "iterations": bracket.iterations,
        "midpoint": persist::num(bracket.midpoint_profile.a),
        "settings": persist::settings_json(&settings),
        "derived_constants": persist::constants_json(&consts),
    });
    let mut sink = ctx.sink()?;
    sink.write(out, persist::pretty(&doc).as_bytes())?;
    sink.write_manifest(&ctx.manifest_header(&consts, &settings))?;

    if ctx.json {
        print!(
            "{}",
            persist::pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "a_lo": persist::num(bracket.a_lo),
                "a_hi": persist::num(bracket.a_hi),
                "width": persist::num(bracket.a_hi - bracket.a_lo),
                "iterations": bracket.iterations,
                "midpoint": persist::num(bracket.midpoint_profile.a),
                "outputs": sink.outputs_json(),
            }))
        );
    } else {
        println!(
            "critical shooting value in [{}, {}] after {} midpoint classifications (width {:.3e})",
            bracket.a_lo,
            bracket.a_hi,
            bracket.iterations,
            (bracket.a_hi - bracket.a_lo).to_f64_lossy()
        );
        println!("wrote {}", sink.written_list());
    }
    Ok(())
}

fn run_tails(input: &Path, out: &Path, ctx: &Context) -> Result<(), AppError> {
    let samples = persist::read_profile_csv(input)?;
    let consts = &ctx.consts;
    let r_end = samples
        .iter()
        .rev()
        .find(|s| s.r > 0.0 && s.f > 0.0)
        .map(|s| s.r)
        .ok_or_else(|| {
            AppError::failure(format!("{}: no positive samples to fit", input.display()))
        })?;
    // Tail laws hold in the outer region: anchor the fit on the last two
    // decades of data, but never below r = 1 where the origin expansion
    // still competes. A profile that ends early is rejected as too narrow.
    let window = ((r_end / 100.0).max(1.0), r_end);
    let fit = asymptotics::fit_tail(&samples, window, consts).map_err(AppError::from_core)?;
    let lambda = asymptotics::lambda_diagnostic(&samples);
    let critical = asymptotics::critical_asymptotics(&samples, consts);

    let kind = match fit.kind {
        TailKind::Slow => "slow",
        TailKind::Fast => "fast",
    };
    let lambda_json = match &lambda {
        Ok(diag) => json!({
            "limit": persist::num(diag.limit_estimate),
            "rate": persist::num(diag.rate_estimate),
        }),
        Err(_) => Value::Null,
    };
    let critical_json = match &critical {
        Ok(report) => json!({
            "plateau": [persist::num(report.plateau.0), persist::num(report.plateau.1)],
            "plateau_decades": persist::num(report.plateau_decades),
            "max_rwprime": persist::num(report.max_rwprime),
            "max_w_deviation": persist::num(report.max_w_deviation),
            "slope_ratio_range": [
                persist::num(report.slope_ratio.0),
                persist::num(report.slope_ratio.1),
            ],
        }),
        Err(_) => Value::Null,
    };
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "input": input.display().to_string(),
        "kind": kind,
        "exponent": persist::num(fit.exponent),
        "amplitude": persist::num(fit.amplitude),
        "window": [persist::num(fit.window.0), persist::num(fit.window.1)],
        "residual": persist::num(fit.residual),
        "lambda": lambda_json,
        "critical": critical_json,
    });

    let mut sink = ctx.sink()?;
    sink.write(out, persist::pretty(&doc).as_bytes())?;
    sink.write_manifest(&ctx.manifest_header(consts, &ctx.settings))?;

    if ctx.json {
        let mut summary = doc;
        summary
            .as_object_mut()
            .expect("tails document is an object")
            .insert("outputs".into(), sink.outputs_json());
        print!("{}", persist::pretty(&summary));
    } else {
        println!(
            "tail fit over [{:.3e}, {:.3e}]: f ~ {:.6} r^(-{:.6}) ({kind} branch), max relative deviation {:.3e}",
            fit.window.0, fit.window.1, fit.amplitude, fit.exponent, fit.residual
        );
        match &lambda {
            Ok(diag) => println!(
                "log-slope limit {:.6}, approach rate {:.3}",
                diag.limit_estimate, diag.rate_estimate
            ),
            Err(e) => println!("log-slope diagnostic unavailable: {e}"),
        }
        match &critical {
            Ok(report) => println!(
                "plateau [{:.3e}, {:.3e}] ({:.2} decades): max |r w'|/(mu w*) = {:.3e}, slope ratio in [{:.4}, {:.4}]",
                report.plateau.0,
                report.plateau.1,
                report.plateau_decades,
                report.max_rwprime,
                report.slope_ratio.0,
                report.slope_ratio.1
            ),
            Err(e) => println!("plateau diagnostics unavailable: {e}"),
        }
        println!("wrote {}", sink.written_list());
    }
    Ok(())
}

fn run_variational<T: Real>(a: f64, out: &Path, ctx: &Context) -> Result<(), AppError> {
    let consts = ctx.consts_as::<T>();
    let settings = ctx.settings_as::<T>();
    let (base, var) = variational::integrate_variational(lit::<T>(a), &consts, &settings)
        .map_err(AppError::from_core)?;
    let floor = lit::<T>(OPERATOR_CHECK_MIN_RADIUS);
    let rows = variational::diagnostic_samples(&base, &var, &consts, floor);
    let mono = variational::monotonicity_check(&base, &var, &consts);
    let lin = variational::linearized_residual(&base, &var, &consts, floor);

    let mut sink = ctx.sink()?;
    sink.write(out, persist::var_csv(&var, &rows).as_bytes())?;
    sink.write_manifest(&ctx.manifest_header(&consts, &settings))?;

    if ctx.json {
        print!(
            "{}",
            persist::pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "a": persist::num(base.a),
                "termination": persist::termination_json(&base.termination),
                "monotonicity": {
                    "pass": mono.pass,
                    "valid_range": [persist::num(mono.valid_range.0), persist::num(mono.valid_range.1)],
                    "samples_checked": mono.samples_checked,
                    "min_gap": persist::num(mono.min_gap),
                    "min_wa": persist::num(mono.min_wa),
                    "series_radius": persist::num(mono.series_radius),
                },
                "operator": {
                    "r_min": OPERATOR_CHECK_MIN_RADIUS,
                    "samples_checked": lin.samples_checked,
                    "max_normalized_residual": persist::num(lin.max_normalized_residual),
                    "max_closed_form_deviation": persist::num(lin.max_closed_form_deviation),
                    "all_negative": lin.all_negative,
                },
                "outputs": sink.outputs_json(),
            }))
        );
    } else {
        println!(
            "sensitivity at a = {a}: {}",
            describe_termination(&base.termination)
        );
        println!(
            "monotonicity gap over [{:.3e}, {:.3e}] ({} samples): min gap {:.3e}, min w_a {:.3e} — {}",
            mono.valid_range.0.to_f64_lossy(),
            mono.valid_range.1.to_f64_lossy(),
            mono.samples_checked,
            mono.min_gap.to_f64_lossy(),
            mono.min_wa.to_f64_lossy(),
            if mono.pass { "positive" } else { "VIOLATED" }
        );
        println!(
            "operator identities for r >= {OPERATOR_CHECK_MIN_RADIUS:.0e} ({} samples): |L_a(w_a)| residual {:.3e}, L_a(r w') deviation {:.3e}, negative: {}",
            lin.samples_checked,
            lin.max_normalized_residual.to_f64_lossy(),
            lin.max_closed_form_deviation.to_f64_lossy(),
            lin.all_negative
        );
        println!("wrote {}", sink.written_list());
    }
    Ok(())
}

fn run_verify(ctx: &Context) -> Result<(), AppError> {
    let report = verify::run_all();
    if ctx.json {
        let checks: Vec<Value> = report
            .results
            .iter()
            .map(|check| {
                json!({
                    "name": check.name,
                    "passed": check.passed,
                    "measured": persist::num(check.measured),
                    "requirement": requirement_str(&check.requirement),
                    "threshold": persist::num(check.threshold),
                    "detail": check.detail,
                })
            })
            .collect();
        print!(
            "{}",
            persist::pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "tool_version": env!("CARGO_PKG_VERSION"),
                "all_passed": report.all_passed(),
                "checks": checks,
            }))
        );
    } else {
        println!(
            "{:<28} {:<6} {:>13} {:>16}",
            "check", "status", "measured", "required"
        );
        for check in &report.results {
            println!(
                "{:<28} {:<6} {:>13} {:>16}",
                check.name,
                if check.passed { "PASS" } else { "FAIL" },
                format!("{:.5e}", check.measured),
                format!("{} {:.5e}", requirement_str(&check.requirement), check.threshold)
            );
            if !check.passed {
                println!("    {}", check.detail);
            }
        }
        let passed = report.results.iter().filter(|c| c.passed).count();
        println!("{passed} of {} checks passed", report.results.len());
    }
    if report.all_passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .results
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        Err(AppError::checks(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            report.results.len(),
            failed.join(", ")
        )))
    }
}

fn requirement_str(requirement: &Requirement) -> &'static str {
    match requirement {
        Requirement::AtMost => "<=",
        Requirement::AtLeast => ">=",
    }
}

fn describe_termination<T: Real>(termination: &Termination<T>) -> String {
    match termination {
        Termination::FHitZero { r } => {
            format!("f reached zero at r = {:.6e}", r.to_f64_lossy())
        }
        Termination::WCrossedPlateau { r } => {
            format!("w crossed the plateau band at r = {:.6e}", r.to_f64_lossy())
        }
        Termination::HorizonReached => "reached the horizon".to_string(),
        Termination::StepLimit { r } => {
            format!("step budget exhausted at r = {:.6e}", r.to_f64_lossy())
        }
    }
}
