use std::path::PathBuf;
use std::process::ExitCode;

use chemowave_harness::{keys_help, load_config, run_experiment, Mode, Report};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "chemowave",
    version,
    about = "Forced waves of a chemotaxis model in a shifting habitat"
)]
#[command(after_help = keys_help())]
struct Cli {
    /// More logging (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the truncated problem and classify the outcome
    Simulate(Common),
    /// Principal eigenvalue on [-L, L] and its limit in L
    Eig(Common),
    /// Evaluate the parameter hypotheses
    Regime(Common),
    /// Certify envelopes and kernel bounds, compute ignition waves and the fixed point
    Verify(Common),
    /// Classify outcomes over a parameter grid
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Config file (`key = value` lines)
    config: PathBuf,
    /// Output directory (overrides `out`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Snapshot times, comma separated (overrides `snapshot_times`)
    #[arg(long, value_name = "T1,T2,...")]
    snapshot_times: Option<String>,
    /// Skip the tau/h^2 <= 1/2 check
    #[arg(long)]
    allow_unstable: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let (mode, common) = match cli.command {
        Command::Simulate(c) => (Mode::Simulate, c),
        Command::Eig(c) => (Mode::Eig, c),
        Command::Regime(c) => (Mode::Regime, c),
        Command::Verify(c) => (Mode::Verify, c),
        Command::Sweep(c) => (Mode::Sweep, c),
    };
    let mut overrides = vec![("mode", mode.to_string())];
    if let Some(out) = &common.out {
        overrides.push(("out", out.display().to_string()));
    }
    if let Some(times) = common.snapshot_times {
        overrides.push(("snapshot_times", times));
    }
    if common.allow_unstable {
        overrides.push(("allow_unstable", "true".into()));
    }

    let result = load_config(&common.config, &overrides).and_then(|spec| run_experiment(&spec));
    match result {
        Ok(art) => {
            print_summary(&art.report);
            for f in &art.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn print_summary(report: &Report) {
    match report {
        Report::Simulate(r) => {
            let o = &r.outcome;
            println!("outcome = {}", o.kind);
            println!("final_sup_diff = {:e}", o.final_sup_diff);
            println!("final_sup_u = {}", o.final_sup_u);
            println!("u_at_L = {}", o.u_at_right);
        }
        Report::Eig(e) => {
            println!(
                "lambda_L = {} (L = {})",
                e.at_length.lambda, e.at_length.half_length
            );
            println!(
                "lambda_inf = {} (converged: {})",
                e.lambda_inf.estimate, e.lambda_inf.converged
            );
        }
        Report::Regime(r) => print!("{r}"),
        Report::Verify(v) => {
            for c in &v.certifications {
                println!(
                    "certification: {:?}, worst residual {:e}",
                    c.status,
                    c.worst()
                );
            }
            println!(
                "kernel bounds: psi slack {:e}, psi_x slack {:e}",
                v.kernel_bounds.psi_slack, v.kernel_bounds.psi_x_slack
            );
            for row in &v.ignition {
                println!(
                    "ignition eps = {}: speed {} (bound {})",
                    row.epsilon, row.speed, row.bound
                );
            }
            if let Some(e) = &v.extrapolation {
                println!("extrapolated speed = {} (order {})", e.limit, e.order);
            }
            if let Some(fp) = &v.fixed_point {
                println!(
                    "fixed point: converged {} after {} iterations, residual {:e}",
                    fp.converged, fp.outer_iterations, fp.residual_sup
                );
            }
        }
        Report::Sweep(s) => {
            println!("points = {}, skipped = {}", s.rows.len(), s.skipped);
            if let Some(t) = s.transition {
                println!("c_transition = {t}");
            }
        }
    }
}
