//! `spinform` command line: `simulate`, `compare`, `collapse` and `verify`.
//!
//! Exit codes: 0 success, 1 a check or integration failed, 2 bad
//! configuration or I/O.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tempfile::NamedTempFile;

use crate::cqd::ensemble_collapse;
use crate::dynamics::{
    Diagnostics, FieldSpec, Law, PhysicalParams, Propagator, Representation, State,
};
use crate::states::BlochAngles;
use crate::tolerances;
use crate::verification::{compare_laws, run_suite_seeded, CheckReport, EquivalenceConfig};
use crate::{Error, Vec3};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "spinform",
    version,
    about = "Spin-1/2 dynamics under classical and quantum laws"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one law and write its trajectory.
    Simulate(CommonArgs),
    /// Integrate several laws and report pairwise Bloch-vector deviations.
    Compare(CommonArgs),
    /// Sample a co-quantum ensemble and compare with cos²(θe/2).
    Collapse(CommonArgs),
    /// Run the verification suite.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; overrides `output.path` in the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed; overrides `seed` in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Glob over check names (`verify` only).
    #[arg(long)]
    pub filter: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub laws: Vec<Law>,
    #[serde(default = "default_field")]
    pub field: FieldSpec,
    #[serde(default)]
    pub params: PhysicalParams,
    /// Initial direction; for `collapse`, the electron direction.
    #[serde(default = "default_initial")]
    pub initial: BlochAngles,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub renorm: bool,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ensemble_size: Option<usize>,
}

fn default_field() -> FieldSpec {
    FieldSpec::constant(Vec3::Z)
}

fn default_initial() -> BlochAngles {
    BlochAngles::new(std::f64::consts::FRAC_PI_2, 0.0).expect("valid angles")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            laws: Vec::new(),
            field: default_field(),
            params: PhysicalParams::default(),
            initial: default_initial(),
            t_end: None,
            dt: None,
            renorm: false,
            output: OutputConfig::default(),
            seed: 0,
            ensemble_size: None,
        }
    }
}

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::NonFinite(_)) {
            EXIT_FAILED
        } else {
            EXIT_CONFIG
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::config(format!("i/o error: {e}"))
    }
}

type CmdResult = std::result::Result<i32, Failure>;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text)
            .map_err(|e| Failure::config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate_common(&self) -> Result<(), Failure> {
        self.params.validate()?;
        self.field.validate()?;
        if self.ensemble_size == Some(0) {
            return Err(Failure::config("ensemble_size must be >= 1"));
        }
        Ok(())
    }

    /// `(t_end, dt)` with `dt > 0` and `t_end >= dt`.
    fn grid(&self) -> Result<(f64, f64), Failure> {
        let dt = self.dt.ok_or_else(|| Failure::config("missing dt"))?;
        let t_end = self.t_end.ok_or_else(|| Failure::config("missing t_end"))?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Failure::config(format!("dt = {dt} must be positive")));
        }
        if !(t_end.is_finite() && t_end >= dt) {
            return Err(Failure::config(format!(
                "t_end = {t_end} must be >= dt = {dt}"
            )));
        }
        Ok((t_end, dt))
    }

    fn output_path(&self, args: &CommonArgs, default: &str) -> PathBuf {
        args.out
            .clone()
            .or_else(|| self.output.path.clone())
            .unwrap_or_else(|| PathBuf::from(default))
    }
}

fn config_for(args: &CommonArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate_common()?;
    Ok(cfg)
}

/// Writes into a temporary file in the directory of `path`. Publishing is
/// left to the caller, so a failed run never leaves a partial file.
fn stage(
    path: &Path,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<NamedTempFile> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        f(&mut w)?;
        w.flush()?;
    }
    Ok(tmp)
}

fn write_atomic(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    stage(path, f)?.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

fn columns(repr: Representation) -> Vec<&'static str> {
    let mut c = vec!["t"];
    c.extend_from_slice(match repr {
        Representation::Vector => &["mx", "my", "mz"][..],
        Representation::Density => &[
            "rho00_re", "rho00_im", "rho01_re", "rho01_im", "rho10_re", "rho10_im", "rho11_re",
            "rho11_im",
        ][..],
        Representation::Spinor => &["psi_up_re", "psi_up_im", "psi_down_re", "psi_down_im"][..],
    });
    c.extend_from_slice(&["norm_dev", "purity_dev"]);
    c
}

fn row(t: f64, state: &State, d: &Diagnostics) -> Vec<f64> {
    let mut r = vec![t];
    match state {
        State::Vector(m) => r.extend_from_slice(&m.to_array()),
        State::Density(rho) => r.extend(rho.entries().flat_map(|z| [z.re, z.im])),
        State::Spinor(psi) => {
            r.extend_from_slice(&[psi.up.re, psi.up.im, psi.down.re, psi.down.im])
        }
    }
    r.extend_from_slice(&[d.norm_dev, d.purity_dev]);
    r
}

/// Shortest representation that parses back to the same double.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

struct RunStats {
    rows: usize,
    last: Option<(f64, State)>,
    max_norm_dev: f64,
    max_purity_dev: f64,
}

fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

pub fn cmd_simulate(cfg: &RunConfig, args: &CommonArgs) -> CmdResult {
    let law = match cfg.laws.as_slice() {
        [law] => *law,
        other => {
            return Err(Failure::config(format!(
                "simulate needs exactly one law, got {}",
                other.len()
            )))
        }
    };
    let (t_end, dt) = cfg.grid()?;
    let out = cfg.output_path(args, "trajectory.csv");
    let prop = Propagator::new(
        law,
        State::from_angles(law, cfg.initial),
        &cfg.field,
        cfg.params,
        t_end,
        dt,
        cfg.renorm,
    )?;
    let header = columns(law.representation());
    let mut stats = RunStats {
        rows: 0,
        last: None,
        max_norm_dev: 0.0,
        max_purity_dev: 0.0,
    };
    let mut aborted: Option<Error> = None;

    let tmp = {
        let rows = prop.map_while(|sample| match sample {
            Ok(s) => {
                stats.rows += 1;
                stats.max_norm_dev = stats.max_norm_dev.max(s.diagnostics.norm_dev.abs());
                stats.max_purity_dev = stats.max_purity_dev.max(s.diagnostics.purity_dev.abs());
                stats.last = Some((s.t, s.state));
                Some(row(s.t, &s.state, &s.diagnostics))
            }
            Err(e) => {
                aborted = Some(e);
                None
            }
        });
        match cfg.output.format {
            Format::Csv => stage_csv(&out, &header, rows)?,
            Format::Json => {
                let rows: Vec<Vec<f64>> = rows.collect();
                stage(&out, |w| {
                    serde_json::to_writer(
                        &mut *w,
                        &json!({ "law": law, "columns": header, "rows": rows }),
                    )?;
                    w.write_all(b"\n")
                })?
            }
        }
    };

    let snapshot = match aborted {
        None => {
            tmp.persist(&out).map_err(|e| e.error)?;
            None
        }
        Some(Error::NonFinite(snap)) => Some(snap),
        Some(e) => return Err(e.into()),
    };
    let (t_last, final_state) = stats.last.expect("initial sample is always emitted");
    let summary = json!({
        "command": "simulate",
        "status": if snapshot.is_some() { "non_finite" } else { "ok" },
        "law": law,
        "output": out,
        "rows": stats.rows,
        "t_final": t_last,
        "final_bloch": final_state.bloch_vector(),
        "max_abs_norm_dev": stats.max_norm_dev,
        "max_abs_purity_dev": stats.max_purity_dev,
        "snapshot": snapshot,
        "config": cfg,
    });
    write_json(&summary_path(&out), &summary)?;
    if let Some(snap) = snapshot {
        return Err(Failure {
            code: EXIT_FAILED,
            message: Error::NonFinite(snap).to_string(),
        });
    }
    println!("{law}: {} rows written to {}", stats.rows, out.display());
    Ok(EXIT_OK)
}

/// Streams CSV rows into an unpublished temporary file next to `path`.
fn stage_csv(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> io::Result<NamedTempFile> {
    stage(path, |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|x| fmt_f64(*x)))?;
        }
        w.flush()
    })
}

pub fn cmd_compare(cfg: &RunConfig, args: &CommonArgs) -> CmdResult {
    let laws = if cfg.laws.is_empty() {
        vec![Law::Bloch, Law::VonNeumann, Law::SchrodingerPauli]
    } else {
        cfg.laws.clone()
    };
    if laws.len() < 2 {
        return Err(Failure::config("compare needs at least two laws"));
    }
    let mut sorted = laws.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != laws.len() {
        return Err(Failure::config("compare laws must be distinct"));
    }
    let (t_end, dt) = cfg.grid()?;
    let eq = EquivalenceConfig {
        field: cfg.field.clone(),
        params: cfg.params,
        initial: cfg.initial,
        t_end,
        dt,
    };
    let reports = compare_laws(&laws, &eq)?;
    let passed = reports.iter().all(CheckReport::passed);
    for r in &reports {
        println!("{}", table_line(r));
    }
    let out = cfg.output_path(args, "compare.json");
    write_json(
        &out,
        &json!({ "command": "compare", "passed": passed, "reports": reports, "config": cfg }),
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}

pub fn cmd_collapse(cfg: &RunConfig, args: &CommonArgs) -> CmdResult {
    let n = cfg
        .ensemble_size
        .ok_or_else(|| Failure::config("missing ensemble_size"))?;
    let theta_e = cfg.initial.theta();
    if !(theta_e > 0.0 && theta_e < std::f64::consts::PI) {
        return Err(Failure::config(format!(
            "theta_e = {theta_e} must lie strictly inside (0, pi)"
        )));
    }
    let s = ensemble_collapse(theta_e, n, cfg.params.k_i, cfg.seed)?;
    let passed = s.z_score.abs() <= tolerances::BORN_Z_SCORE;
    println!(
        "fraction_up = {:.6}  expected = {:.6}  z = {:.3}  ({})",
        s.fraction_up,
        s.expected,
        s.z_score,
        if passed { "pass" } else { "FAIL" }
    );
    let out = cfg.output_path(args, "collapse.json");
    write_json(
        &out,
        &json!({ "command": "collapse", "passed": passed, "summary": s, "config": cfg }),
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}

fn table_line(r: &CheckReport) -> String {
    let status = match (r.tolerance, r.passed()) {
        (None, _) => "info",
        (Some(_), true) => "pass",
        (Some(_), false) => "FAIL",
    };
    let tol = r
        .tolerance
        .map_or_else(|| "-".to_string(), |t| format!("{t:.1e}"));
    format!(
        "{:<52} {:<4} residual={:<12.3e} tol={}",
        r.check, status, r.residual, tol
    )
}

pub fn cmd_verify(args: &CommonArgs) -> CmdResult {
    let seed = args.seed.unwrap_or(crate::verification::SUITE_SEED);
    let reports = run_suite_seeded(args.filter.as_deref(), seed)?;
    for r in &reports {
        println!("{}", table_line(r));
    }
    let passed = reports.iter().all(CheckReport::passed);
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} checks, {} failed", reports.len(), failed);
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("verify.json"));
    write_json(
        &out,
        &json!({ "command": "verify", "passed": passed, "seed": seed, "reports": reports }),
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}

pub fn execute(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Simulate(a) => config_for(a).and_then(|c| cmd_simulate(&c, a)),
        Command::Compare(a) => config_for(a).and_then(|c| cmd_compare(&c, a)),
        Command::Collapse(a) => config_for(a).and_then(|c| cmd_collapse(&c, a)),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("spinform: {}", f.message);
            f.code
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(RunConfig::from_json(r#"{"dt": 0.1, "t_end": 1.0, "tolerance": 3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"params": {"gamma": 1, "hbar": 1, "ki": 0.1}}"#).is_err());
        assert!(
            RunConfig::from_json(r#"{"field": {"kind": "constant", "b": [0,0,1], "c": 1}}"#)
                .is_err()
        );
        let c = RunConfig::from_json(
            r#"{"laws": ["llg"], "dt": 0.1, "t_end": 1.0, "params": {"k_i": 0.2}}"#,
        )
        .unwrap();
        assert_eq!(c.laws, vec![Law::Llg]);
        assert_eq!(c.params.k_i, 0.2);
        assert_eq!(c.params.gamma, 1.0);
    }

    #[test]
    fn grid_validation() {
        let mut c = RunConfig {
            dt: Some(0.1),
            t_end: Some(1.0),
            ..RunConfig::default()
        };
        assert_eq!(c.grid().unwrap(), (1.0, 0.1));
        c.t_end = Some(0.05);
        assert_eq!(c.grid().unwrap_err().code, EXIT_CONFIG);
        c.dt = None;
        assert_eq!(c.grid().unwrap_err().code, EXIT_CONFIG);
    }

    #[test]
    fn row_layouts() {
        for law in Law::ALL {
            let s = State::from_angles(law, default_initial());
            assert_eq!(
                row(0.0, &s, &Diagnostics::of(&s)).len(),
                columns(law.representation()).len()
            );
        }
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.123233995736766e-17, -2.5e300, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
