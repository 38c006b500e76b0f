//! File emission: CSV and JSON writers, digests, and the run manifest.
//!
//! Every command that produces files funnels them through [`OutputSink`],
//! which records a SHA-256 digest per file and writes `manifest.json` last,
//! so the digests in the manifest always describe the bytes on disk.
//! Numeric fields use the shortest round-trip decimal form (full double
//! precision, and `0` / `1` stay literally `0` / `1`), which also makes the
//! data files byte-identical across reruns and thread counts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use vss_core::classifier::ClassLabel;
use vss_core::error::Error as CoreError;
use vss_core::params::{DerivedConstants, ExponentConfig};
use vss_core::scalar::Real;
use vss_core::shooter::{IntegratorSettings, Profile, Sample, Termination};
use vss_core::variational::{DiagnosticSample, VariationalProfile};

use crate::commands::AppError;

/// Version tag carried by every JSON document this tool writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Header of `profile.csv`, also required of files read back by `tails`.
pub const PROFILE_CSV_HEADER: &str = "r,f,fprime,w,wprime,E";

/// Collects output files in one directory and finishes with a manifest.
pub struct OutputSink {
    dir: PathBuf,
    outputs: Vec<(String, String)>,
}

impl OutputSink {
    pub fn new(dir: &Path) -> Result<Self, AppError> {
        fs::create_dir_all(dir).map_err(|e| {
            AppError::failure(format!(
                "cannot create output directory {}: {e}",
                dir.display()
            ))
        })?;
        Ok(OutputSink {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    /// Writes one file under the sink directory and records its digest.
    pub fn write(&mut self, name: &Path, bytes: &[u8]) -> Result<PathBuf, AppError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| {
                AppError::failure(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
        fs::write(&path, bytes)
            .map_err(|e| AppError::failure(format!("cannot write {}: {e}", path.display())))?;
        let mut hex = String::with_capacity(64);
        for byte in Sha256::digest(bytes) {
            let _ = write!(hex, "{byte:02x}");
        }
        self.outputs.push((name.display().to_string(), hex));
        Ok(path)
    }

    /// The `outputs` manifest section: one `{path, sha256}` entry per file
    /// written so far.
    pub fn outputs_json(&self) -> Value {
        Value::Array(
            self.outputs
                .iter()
                .map(|(path, digest)| json!({ "path": path, "sha256": digest }))
                .collect(),
        )
    }

    /// Writes `manifest.json`. Call last: its digest list covers every file
    /// previously written through this sink.
    pub fn write_manifest(&mut self, header: &ManifestHeader) -> Result<PathBuf, AppError> {
        let manifest = json!({
            "schema_version": SCHEMA_VERSION,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": header.command,
            "timestamp": header.timestamp,
            "config": header.config,
            "derived_constants": header.constants,
            "settings": header.settings,
            "outputs": self.outputs_json(),
        });
        self.write(Path::new("manifest.json"), pretty(&manifest).as_bytes())
    }

    /// Human-readable list of the files written, with the directory prefix.
    pub fn written_list(&self) -> String {
        self.outputs
            .iter()
            .map(|(name, _)| self.dir.join(name).display().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Run-level context recorded in the manifest.
pub struct ManifestHeader {
    pub command: String,
    pub timestamp: String,
    pub config: Value,
    pub constants: Value,
    pub settings: Value,
}

/// Reconstructs the invocation for the manifest, normalizing the binary
/// path to the tool name.
pub fn command_line() -> String {
    std::iter::once("vss".to_string())
        .chain(std::env::args().skip(1))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// JSON number from a scalar; non-finite values map to `null`.
pub fn num<T: Real>(x: T) -> Value {
    serde_json::Number::from_f64(x.to_f64_lossy())
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn opt_num<T: Real>(x: Option<T>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

pub fn config_json<T: Real>(config: &ExponentConfig<T>) -> Value {
    json!({ "N": config.n, "p": num(config.p), "q": num(config.q) })
}

pub fn constants_json<T: Real>(consts: &DerivedConstants<T>) -> Value {
    json!({
        "config": config_json(&consts.config),
        "alpha": num(consts.alpha),
        "beta": num(consts.beta),
        "mu": num(consts.mu),
        "eta": num(consts.eta),
        "w_star": num(consts.w_star),
        "p_critical": num(consts.p_critical),
        "q_critical": num(consts.q_critical),
        "slow_exponent": num(consts.slow_exponent),
        "fast_exponent": num(consts.fast_exponent),
        "uniqueness_denominator": num(consts.uniqueness_denominator),
    })
}

pub fn settings_json<T: Real>(settings: &IntegratorSettings<T>) -> Value {
    json!({
        "rel_tol": num(settings.rel_tol),
        "abs_tol": num(settings.abs_tol),
        "r_max": num(settings.r_max),
        "max_steps": settings.max_steps,
        "samples_per_decade": settings.samples_per_decade,
        "plateau_margin": num(settings.plateau_margin),
        "r_switch": opt_num(settings.r_switch),
    })
}

pub fn termination_json<T: Real>(termination: &Termination<T>) -> Value {
    match termination {
        Termination::FHitZero { r } => json!({ "kind": "f_hit_zero", "r": num(*r) }),
        Termination::WCrossedPlateau { r } => {
            json!({ "kind": "w_crossed_plateau", "r": num(*r) })
        }
        Termination::HorizonReached => json!({ "kind": "horizon_reached", "r": Value::Null }),
        Termination::StepLimit { r } => json!({ "kind": "step_limit", "r": num(*r) }),
    }
}

/// Pretty-printed JSON document with a trailing newline.
pub fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// Renders `profile.csv`: header plus one shortest-round-trip row per
/// sample. The origin row of an `a = 1` profile is exactly `0,1,0,0,0,1`.
pub fn profile_csv<T: Real>(profile: &Profile<T>) -> String {
    let mut out = String::from(PROFILE_CSV_HEADER);
    out.push('\n');
    for s in &profile.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.r, s.f, s.fprime, s.w, s.wprime, s.energy
        );
    }
    out
}

/// Reads a `profile.csv` back into samples, validating header and shape.
pub fn read_profile_csv(path: &Path) -> Result<Vec<Sample<f64>>, AppError> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::failure(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(AppError::failure(format!("{}: empty file", path.display())));
    };
    if header.trim_end_matches('\r') != PROFILE_CSV_HEADER {
        return Err(AppError::failure(format!(
            "{}: unexpected header {header:?}; expected {PROFILE_CSV_HEADER:?}",
            path.display()
        )));
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(AppError::failure(format!(
                "{} line {}: expected 6 fields, found {}",
                path.display(),
                idx + 1,
                fields.len()
            )));
        }
        let mut values = [0.0f64; 6];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|e| {
                AppError::failure(format!(
                    "{} line {}: bad number {field:?}: {e}",
                    path.display(),
                    idx + 1
                ))
            })?;
        }
        samples.push(Sample {
            r: values[0],
            f: values[1],
            fprime: values[2],
            w: values[3],
            wprime: values[4],
            energy: values[5],
        });
    }
    Ok(samples)
}

/// Renders `sweep.csv`. Fields that do not apply to a label stay empty;
/// a failed classification keeps its row with the label `error`.
pub fn sweep_csv<T: Real>(rows: &[(T, Result<ClassLabel<T>, CoreError<T>>)]) -> String {
    let mut out = String::from("a,label,R,R1,r_cross,w_at_horizon\n");
    for (a, outcome) in rows {
        match outcome {
            Ok(ClassLabel::A {
                r_extinction,
                r_flip,
            }) => {
                let _ = writeln!(out, "{a},A,{r_extinction},{r_flip},,");
            }
            Ok(ClassLabel::C { r_cross }) => {
                let _ = writeln!(out, "{a},C,,,{r_cross},");
            }
            Ok(ClassLabel::Undetermined { w_at_horizon, .. }) => {
                let _ = writeln!(out, "{a},U,,,,{w_at_horizon}");
            }
            Err(_) => {
                let _ = writeln!(out, "{a},error,,,,");
            }
        }
    }
    out
}

/// Renders `var.csv`: the sensitivity columns plus the per-sample
/// monotonicity gap and raw linearized-operator values. Operator columns
/// are empty where the evaluation is not defined (below the radius floor,
/// at critical points of `f`, or past extinction).
pub fn var_csv<T: Real>(
    var: &VariationalProfile<T>,
    rows: &[DiagnosticSample<T>],
) -> String {
    let mut out = String::from("r,fa,fa_prime,wa,mono_gap,La_wa,La_rwprime\n");
    for (v, d) in var.samples.iter().zip(rows) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            v.r,
            v.fa,
            v.fa_prime,
            v.wa,
            d.mono_gap,
            opt_field(d.la_wa),
            opt_field(d.la_rwprime)
        );
    }
    out
}

fn opt_field<T: Real>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
