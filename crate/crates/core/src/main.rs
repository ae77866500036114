use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cfor_burgers::config::{Mode, RunConfig};
use cfor_burgers::scenario::run_scenario;
use cfor_burgers::Error;

/// DSC Burgers solver with conjugated filter oscillation reduction.
///
/// Flags override values read from --config.
#[derive(Debug, Parser)]
#[command(name = "cfor", version)]
struct Cli {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Reynolds number, or "inf" for the inviscid equation.
    #[arg(long)]
    re: Option<String>,
    /// Number of grid points on [0, 1], boundaries included.
    #[arg(long)]
    n: Option<usize>,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
    /// End time (mode default if omitted).
    #[arg(long)]
    t_final: Option<f64>,
    /// Stencil half-width W.
    #[arg(long)]
    w: Option<usize>,
    /// σ/Δ of the derivative filters.
    #[arg(long)]
    sigma_deriv: Option<f64>,
    /// σ/Δ of the low-pass filter.
    #[arg(long)]
    sigma_lowpass: Option<f64>,
    /// Alarm threshold, or "auto" to calibrate on a smooth run.
    #[arg(long)]
    eta: Option<String>,
    /// Wavelet scales in the high-pass measure.
    #[arg(long)]
    scales: Option<usize>,
    /// Comma-separated snapshot times.
    #[arg(long)]
    snapshots: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file with defaults for any of the above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Echo the config and the files written; adds l_1_sum to the table.
    #[arg(short, long)]
    verbose: bool,
}

impl Cli {
    fn to_config(&self) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        let pairs = [
            ("re", self.re.clone()),
            ("n", self.n.map(|v| v.to_string())),
            ("dt", self.dt.map(|v| v.to_string())),
            ("t_final", self.t_final.map(|v| v.to_string())),
            ("w", self.w.map(|v| v.to_string())),
            ("sigma_deriv", self.sigma_deriv.map(|v| v.to_string())),
            ("sigma_lowpass", self.sigma_lowpass.map(|v| v.to_string())),
            ("eta", self.eta.clone()),
            ("scales", self.scales.map(|v| v.to_string())),
            ("snapshots", self.snapshots.clone()),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.to_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.verbose {
        eprint!("{}", cfg.to_text());
    }
    match run_scenario(&cfg, cli.verbose) {
        Ok(outcome) => {
            if cli.verbose {
                for f in &outcome.files {
                    eprintln!("wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e @ Error::BlowUp { .. }) => {
            eprintln!(
                "error: {e}; partial results in {}",
                cfg.output_dir.display()
            );
            ExitCode::from(1)
        }
        Err(
            e @ (Error::Config(_)
            | Error::InvalidProblem(_)
            | Error::InvalidKernel(_)
            | Error::InvalidGrid(_)),
        ) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
