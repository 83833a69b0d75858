//! Command-line driver.
//!
//! Every subcommand resolves a [`RunConfig`] from `--scene` plus flag
//! overrides, writes its outputs into `--out` and records a manifest next to
//! them. CSV files carry a header row and 9 significant digits.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::chain::{aligned_error, lowpass_snapshot, verify_chain, ChainSettings, Scatterer};
use crate::config::{load_config, RunConfig};
use crate::error::{Error, Result};
use crate::model::ArrayMode;
use crate::phasecode::{design_phase_codes, validate_phase_codes};
use crate::scene::CnrMode;
use crate::selftest::run_selftest;
use crate::stap::{pattern_cut, sinr_loss_curve, AdaptedPatternGrid, CutAxis, GridSpec, Processor};
use crate::system::C64;

/// Relative L2 error accepted by `chain-verify`.
pub const CHAIN_TOLERANCE: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "fdastap", version, about = "Coherent FDA airborne radar simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    pub scene: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Seed for the Monte-Carlo checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of pulses L.
    #[arg(long, global = true)]
    pub pulses: Option<usize>,
    /// fda, mimo or pa.
    #[arg(long, global = true)]
    pub mode: Option<ArrayMode>,
    /// per-patch or total.
    #[arg(long = "cnr-mode", global = true)]
    pub cnr_mode: Option<CnrMode>,
    /// Diagonal loading added to the covariance.
    #[arg(long, global = true)]
    pub loading: Option<f64>,
    /// Also write a gnuplot script per CSV.
    #[arg(long, global = true)]
    pub gnuplot: bool,
    /// Do not echo the resolved configuration.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Design the slow-time phase codes and check their Doppler gaps.
    PhaseCode,
    /// Run the time-domain chain and compare it with the analytic snapshot.
    ChainVerify,
    /// Interference power over the Doppler-azimuth grid.
    Spectrum,
    /// MVDR adapted pattern over the Doppler-azimuth grid.
    Pattern,
    /// Adapted-pattern cuts through the target.
    Cut,
    /// SINR loss against Doppler at a fixed azimuth.
    SinrLoss,
    /// Quick internal consistency checks.
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PhaseCode => "phase-code",
            Command::ChainVerify => "chain-verify",
            Command::Spectrum => "spectrum",
            Command::Pattern => "pattern",
            Command::Cut => "cut",
            Command::SinrLoss => "sinr-loss",
            Command::Selftest => "selftest",
        }
    }
}

/// Result of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// False when a verification subcommand ran but its check failed.
    pub pass: bool,
    pub files: Vec<PathBuf>,
}

/// Formats with 9 significant digits, switching to exponent form outside
/// `[1e-5, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Applies command-line overrides on top of the config file.
pub fn resolve_config(args: &CommonArgs) -> Result<(RunConfig, Vec<String>)> {
    let mut cfg = match &args.scene {
        Some(path) => load_config(path)?.0,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(pulses) = args.pulses {
        cfg.system.pulses = pulses;
    }
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(cnr) = args.cnr_mode {
        cfg.scene.cnr_mode = cnr;
    }
    if let Some(loading) = args.loading {
        cfg.loading = loading;
    }
    let warnings = cfg.validate()?;
    Ok((cfg, warnings))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// Writes rows of numbers under a header.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row.iter().map(|x| format_sig9(*x))).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

const GRID_HEADER: [&str; 3] = ["azimuth_deg", "doppler_hz", "value_db"];

fn write_grid(path: &Path, grid: &AdaptedPatternGrid) -> Result<()> {
    let rows = grid.azimuth_deg.iter().enumerate().flat_map(|(i, a)| {
        grid.doppler_hz
            .iter()
            .enumerate()
            .map(move |(j, f)| vec![*a, *f, grid.db(i, j)])
    });
    write_csv(path, &GRID_HEADER, rows)
}

fn gnuplot_grid(csv: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set title '{title}'\n\
         set xlabel 'Doppler (Hz)'\n\
         set ylabel 'Azimuth (deg)'\n\
         set cblabel 'dB'\n\
         set view map\n\
         set palette rgb 33,13,10\n\
         plot '{csv}' every ::1 using 2:1:3 with image notitle\n\
         pause mouse close\n"
    )
}

fn gnuplot_series(csv: &str, title: &str, x_col: usize, x_label: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set title '{title}'\n\
         set xlabel '{x_label}'\n\
         set ylabel 'dB'\n\
         set grid\n\
         plot '{csv}' every ::1 using {x_col}:3 with lines notitle\n\
         pause mouse close\n"
    )
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    fdastap_version: &'a str,
    rustc_version: &'a str,
    config_hash: String,
    seed: u64,
    mode: ArrayMode,
    pulses: usize,
    outputs: Vec<String>,
    warnings: &'a [String],
    pass: bool,
    wall_time_s: f64,
}

struct Run<'a> {
    args: &'a CommonArgs,
    cfg: RunConfig,
    files: Vec<PathBuf>,
}

impl Run<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.args.out.join(name)
    }

    fn output(&mut self, name: &str, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        let path = self.path(name);
        write(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn script(&mut self, name: &str, body: String) -> Result<()> {
        if self.args.gnuplot {
            self.output(name, |p| fs::write(p, body).map_err(io_err(p)))?;
        }
        Ok(())
    }

    fn processor(&self) -> Result<Processor> {
        let c = &self.cfg;
        Processor::new(&c.system, &c.scene, c.mode, c.loading)
    }

    fn target_doppler(&self) -> Result<f64> {
        self.cfg.scene.target.doppler_hz(&self.cfg.system)
    }

    fn phase_code(&mut self) -> Result<bool> {
        let sys = &self.cfg.system;
        let code = design_phase_codes(sys);
        let f_td = self.target_doppler()?.abs();
        let report = validate_phase_codes(&code, f_td, self.cfg.phase_code_slack_hz, sys)?;
        let rows: Vec<Vec<f64>> = code
            .phi
            .iter()
            .zip(&code.band_centers)
            .enumerate()
            .map(|(m, (phi, c))| vec![m as f64, *phi, *c])
            .collect();
        self.output("phase_code.csv", |p| write_csv(p, &["element", "phi_hz", "band_center_hz"], rows))?;
        println!(
            "phase code: min_gap {} Hz, required {} Hz less {} Hz slack, up to |f_td| = {f_td} Hz: {}",
            format_sig9(report.min_gap_hz),
            format_sig9(report.required_gap_hz),
            self.cfg.phase_code_slack_hz,
            if report.feasible { "feasible" } else { "INFEASIBLE" }
        );
        Ok(report.feasible)
    }

    fn chain_verify(&mut self) -> Result<bool> {
        let sys = self.cfg.system.clone();
        let t = &self.cfg.scene.target;
        let target = Scatterer {
            range_m: t.range_m,
            azimuth: t.azimuth_deg.to_radians(),
            depression: t.depression_deg.to_radians(),
            doppler_hz: t.doppler_hz(&sys)?,
            amplitude: C64::new(1.0, 0.0),
        };
        let w = vec![C64::new(1.0, 0.0); sys.n_tx];
        let v = verify_chain(&sys, &design_phase_codes(&sys), &w, &target, ChainSettings::default())?;
        let filtered = aligned_error(v.chain.as_vector(), &lowpass_snapshot(&v.model, &sys)?).1;
        let pass = v.relative_error <= CHAIN_TOLERANCE;
        let (nt, nr) = (sys.n_tx, sys.n_rx);
        let rows: Vec<Vec<f64>> = (0..sys.pulses)
            .flat_map(|l| (0..nr).flat_map(move |n| (0..nt).map(move |m| (l, n, m))))
            .map(|(l, n, m)| {
                let s = v.chain.get(l, n, m);
                let q = v.model[v.chain.index(l, n, m)] * v.alpha;
                vec![l as f64, n as f64, m as f64, s.re, s.im, q.re, q.im]
            })
            .collect();
        self.output("chain_verify.csv", |p| {
            write_csv(p, &["pulse", "rx", "tx", "chain_re", "chain_im", "model_re", "model_im"], rows)
        })?;
        println!(
            "chain vs model: relative L2 error {:.4} % (threshold {} %): {}",
            100.0 * v.relative_error,
            100.0 * CHAIN_TOLERANCE,
            if pass { "PASS" } else { "FAIL" }
        );
        println!("chain vs low-passed model: relative L2 error {:.4} %", 100.0 * filtered);
        Ok(pass)
    }

    fn spectrum(&mut self) -> Result<bool> {
        let g = self.processor()?.interference_spectrum(&self.cfg.grid)?;
        self.output("spectrum.csv", |p| write_grid(p, &g))?;
        self.script("spectrum.gp", gnuplot_grid("spectrum.csv", "Interference spectrum"))?;
        Ok(true)
    }

    fn pattern(&mut self) -> Result<bool> {
        let g = self.processor()?.adapted_pattern(&self.cfg.grid)?;
        let (i, j, peak) = g.peak();
        println!(
            "pattern peak {} dB at ({} deg, {} Hz)",
            format_sig9(db(peak)),
            g.azimuth_deg[i],
            g.doppler_hz[j]
        );
        self.output("pattern.csv", |p| write_grid(p, &g))?;
        self.script("pattern.gp", gnuplot_grid("pattern.csv", &format!("Adapted pattern ({})", g.mode)))?;
        Ok(true)
    }

    fn cut(&mut self) -> Result<bool> {
        let p = self.processor()?;
        let grid = &self.cfg.grid;
        let t = &self.cfg.scene.target;
        let az = self.cfg.cut.azimuth_deg.unwrap_or(t.azimuth_deg);
        let dop = match self.cfg.cut.doppler_hz {
            Some(f) => f,
            None => self.target_doppler()?,
        };
        let row = GridSpec {
            azimuth_min_deg: az,
            azimuth_max_deg: az,
            ..grid.clone()
        };
        let col = GridSpec {
            doppler_min_hz: dop,
            doppler_max_hz: dop,
            ..grid.clone()
        };
        let v = p.mvdr()?;
        let along_doppler = pattern_cut(&p.pattern_of(&v, &row)?, CutAxis::Azimuth, az)?;
        let along_azimuth = pattern_cut(&p.pattern_of(&v, &col)?, CutAxis::Doppler, dop)?;
        let rows: Vec<Vec<f64>> = along_doppler.coords.iter().zip(&along_doppler.values).map(|(f, x)| vec![az, *f, db(*x)]).collect();
        self.output("cut_azimuth.csv", |p| write_csv(p, &GRID_HEADER, rows))?;
        let rows: Vec<Vec<f64>> = along_azimuth.coords.iter().zip(&along_azimuth.values).map(|(a, x)| vec![*a, dop, db(*x)]).collect();
        self.output("cut_doppler.csv", |p| write_csv(p, &GRID_HEADER, rows))?;
        self.script("cut_azimuth.gp", gnuplot_series("cut_azimuth.csv", &format!("Cut at {az} deg"), 2, "Doppler (Hz)"))?;
        self.script("cut_doppler.gp", gnuplot_series("cut_doppler.csv", &format!("Cut at {dop} Hz"), 1, "Azimuth (deg)"))?;
        Ok(true)
    }

    fn sinr_loss(&mut self) -> Result<bool> {
        let c = &self.cfg;
        let s = &c.sinr_loss;
        let dopplers = s.dopplers()?;
        let loss = sinr_loss_curve(&c.scene, &c.system, &dopplers, s.azimuth_deg, c.mode, c.loading, s.convention)?;
        let (az, mode) = (s.azimuth_deg, c.mode);
        let rows: Vec<Vec<f64>> = dopplers.iter().zip(&loss).map(|(f, x)| vec![az, *f, *x]).collect();
        self.output("sinr_loss.csv", |p| write_csv(p, &GRID_HEADER, rows))?;
        self.script("sinr_loss.gp", gnuplot_series("sinr_loss.csv", &format!("SINR loss at {az} deg ({mode})"), 2, "Doppler (Hz)"))?;
        Ok(true)
    }

    fn selftest(&mut self) -> Result<bool> {
        let checks = run_selftest(self.cfg.seed)?;
        let mut all = true;
        for c in &checks {
            all &= c.pass;
            println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        Ok(all)
    }
}

/// Executes one subcommand.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let start = Instant::now();
    let (cfg, warnings) = resolve_config(&cli.common)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    fs::create_dir_all(&cli.common.out).map_err(io_err(&cli.common.out))?;
    let mut run = Run {
        args: &cli.common,
        cfg,
        files: Vec::new(),
    };
    if !cli.common.quiet {
        println!("resolved config (hash {}):\n{}", run.cfg.hash(), run.cfg.to_json());
    }
    let pass = match cli.command {
        Command::PhaseCode => run.phase_code()?,
        Command::ChainVerify => run.chain_verify()?,
        Command::Spectrum => run.spectrum()?,
        Command::Pattern => run.pattern()?,
        Command::Cut => run.cut()?,
        Command::SinrLoss => run.sinr_loss()?,
        Command::Selftest => run.selftest()?,
    };
    let name = cli.command.name();
    let manifest_path = run.path(&format!("{name}.manifest.json"));
    let manifest = Manifest {
        command: name,
        fdastap_version: env!("CARGO_PKG_VERSION"),
        rustc_version: env!("FDASTAP_RUSTC_VERSION"),
        config_hash: run.cfg.hash(),
        seed: run.cfg.seed,
        mode: run.cfg.mode,
        pulses: run.cfg.system.pulses,
        outputs: run
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        warnings: &warnings,
        pass,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text + "\n").map_err(io_err(&manifest_path))?;
    run.files.push(manifest_path);
    Ok(Outcome { pass, files: run.files })
}

/// Process exit code: 0 on success, 2 on invalid input, 1 otherwise
/// (including a verification subcommand whose check failed).
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.pass => 0,
        Ok(_) => 1,
        Err(e) if e.is_validation() => 2,
        Err(_) => 1,
    }
}
