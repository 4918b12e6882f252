mod cmd;
mod io;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use cmd::SupplyKind;

/// Analysis and synthesis of sampled-data controllers for jump-flow systems.
///
/// Exit codes: 0 feasible, 1 infeasible, 2 error.
#[derive(Parser)]
#[command(name = "jumpflow", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a closed loop against a supply rate and certify the verdict.
    ///
    /// Reads a system file (plant, hold, controller), closes the loop, and
    /// decides dissipativity for the requested supply. With --supply hinf
    /// and no --gamma, bisects to the smallest certifiable level.
    Analyze {
        /// System file (plant + hold, controller embedded or via --controller)
        #[arg(long)]
        system: PathBuf,
        /// Controller file overriding the one embedded in the system file
        #[arg(long)]
        controller: Option<PathBuf>,
        /// Supply rate family
        #[arg(long, value_enum)]
        supply: SupplyKind,
        /// Performance level for --supply hinf; omit to minimize it
        #[arg(long)]
        gamma: Option<f64>,
        /// Feasibility margin the certificate must clear
        #[arg(long)]
        tol: Option<f64>,
        /// Write the verdict as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Synthesize a controller rendering the loop dissipative.
    ///
    /// The controller is re-verified by an independent closed-loop analysis
    /// before it is written to --out.
    Synthesize {
        /// System file (plant + hold)
        #[arg(long)]
        system: PathBuf,
        /// Design objective
        #[arg(long, value_enum)]
        objective: SupplyKind,
        /// Performance level for --objective hinf; omit to minimize it
        #[arg(long)]
        gamma: Option<f64>,
        /// Where to write the synthesized controller
        #[arg(long)]
        out: PathBuf,
        /// Feasibility margin the certificate must clear
        #[arg(long)]
        tol: Option<f64>,
        /// Write the verdict as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fit a discrete filter to a continuous one, minimizing the worst-case
    /// mismatch through sample and hold.
    ///
    /// The CSV (--csv) has columns: omega, then one pointwise response error
    /// per method (err_synthesized first, then err_<method> in --compare
    /// order), on a log grid from 0.1 to pi/h.
    MatchFilter {
        /// Continuous-time filter file (A, B, C, D)
        #[arg(long)]
        ct: PathBuf,
        /// Sampling period
        #[arg(long)]
        h: f64,
        /// Where to write the fitted discrete filter
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated baselines: zoh, foh, tustin, prewarp
        #[arg(long, default_value = "zoh,foh,tustin,prewarp")]
        compare: String,
        /// Anchor frequency for prewarp (default pi/(2h))
        #[arg(long)]
        prewarp_omega: Option<f64>,
        /// Write the frequency-error CSV here
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Number of grid points in the CSV
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Measure baseline methods on this many threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Feasibility margin the certificates must clear
        #[arg(long)]
        tol: Option<f64>,
        /// Write the verdict and per-method tables as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fit a discrete controller to a continuous one around a plant model.
    ///
    /// The CSV (--csv) has columns: time, y_ct (continuous reference loop),
    /// then one step response per closed loop (y_synthesized first, then
    /// y_<method> in --compare order); unstable or failed loops are NaN.
    MatchController {
        /// Continuous-time plant model file (A, B, C, D)
        #[arg(long)]
        plant: PathBuf,
        /// Continuous-time controller file to match
        #[arg(long)]
        ct_controller: PathBuf,
        /// Sampling period
        #[arg(long)]
        h: f64,
        /// Where to write the fitted discrete controller
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated baselines: zoh, foh, tustin, prewarp
        #[arg(long, default_value = "tustin,foh")]
        compare: String,
        /// Write the step-response CSV here
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Number of sampling periods to simulate
        #[arg(long, default_value_t = 100)]
        periods: usize,
        /// Flow samples per period in the CSV
        #[arg(long, default_value_t = 8)]
        intra: usize,
        /// Measure baseline methods on this many threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Feasibility margin the certificates must clear
        #[arg(long)]
        tol: Option<f64>,
        /// Write the verdict and per-method tables as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Simulate the closed loop under a constant discrete disturbance.
    ///
    /// The CSV has columns: time, each state x_i, each flow output zc_i.
    /// Within each period the first row is the post-jump sample at t_k.
    Simulate {
        /// System file (plant + hold, controller embedded or via --controller)
        #[arg(long)]
        system: PathBuf,
        /// Controller file overriding the one embedded in the system file
        #[arg(long)]
        controller: Option<PathBuf>,
        /// Number of sampling periods
        #[arg(long, default_value_t = 100)]
        periods: usize,
        /// Flow samples per period
        #[arg(long, default_value_t = 8)]
        intra: usize,
        /// Amplitude of the discrete disturbance
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        /// Write the trajectory CSV here
        #[arg(long)]
        csv: PathBuf,
    },
    /// Frequency response of a state-space system on a log grid.
    ///
    /// The CSV has columns: omega, then mag_i_j and arg_i_j (radians) for
    /// every output i and input j; rows at a pole hold NaN.
    Freqresp {
        /// Continuous-time system file
        #[arg(long)]
        ct: Option<PathBuf>,
        /// Discrete-time system file (needs an "h" field)
        #[arg(long)]
        dt: Option<PathBuf>,
        /// Lowest frequency (rad/s)
        #[arg(long, default_value_t = 1e-2)]
        min: f64,
        /// Highest frequency (rad/s); defaults to 1e3, or pi/h for --dt
        #[arg(long)]
        max: Option<f64>,
        /// Number of grid points
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Write the response CSV here
        #[arg(long)]
        csv: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32, io::CliError> {
    match cli.command {
        Command::Analyze {
            system,
            controller,
            supply,
            gamma,
            tol,
            report,
        } => cmd::analyze(&cmd::AnalyzeArgs {
            system,
            controller,
            supply,
            gamma,
            tol,
            report,
        }),
        Command::Synthesize {
            system,
            objective,
            gamma,
            out,
            tol,
            report,
        } => cmd::synthesize(&cmd::SynthesizeArgs {
            system,
            objective,
            gamma,
            out,
            tol,
            report,
        }),
        Command::MatchFilter {
            ct,
            h,
            out,
            compare,
            prewarp_omega,
            csv,
            points,
            jobs,
            tol,
            report,
        } => cmd::match_filter(&cmd::MatchFilterArgs {
            ct,
            h,
            out,
            compare,
            prewarp_omega,
            csv,
            points,
            jobs,
            tol,
            report,
        }),
        Command::MatchController {
            plant,
            ct_controller,
            h,
            out,
            compare,
            csv,
            periods,
            intra,
            jobs,
            tol,
            report,
        } => cmd::match_controller(&cmd::MatchControllerArgs {
            plant,
            ct_controller,
            h,
            out,
            compare,
            csv,
            periods,
            intra,
            jobs,
            tol,
            report,
        }),
        Command::Simulate {
            system,
            controller,
            periods,
            intra,
            step,
            csv,
        } => cmd::simulate(&cmd::SimulateArgs {
            system,
            controller,
            periods,
            intra,
            step,
            csv,
        }),
        Command::Freqresp {
            ct,
            dt,
            min,
            max,
            points,
            csv,
        } => cmd::freqresp(&cmd::FreqrespArgs {
            ct,
            dt,
            min,
            max,
            points,
            csv,
        }),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
