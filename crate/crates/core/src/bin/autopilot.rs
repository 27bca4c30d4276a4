use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use adaptive_autopilot::scenario::{
    load_config, run_scenario, to_json, write_report, Overrides, ScenarioConfig, ScenarioKind,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(version, about = "Missile autopilot and engagement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constant acceleration command.
    Step(RunArgs),
    /// Sinusoidal acceleration command.
    Harmonic(RunArgs),
    /// Pursuit of an evader under proportional navigation.
    Intercept(RunArgs),
    /// Gain or aerodynamic-coefficient sweep.
    Sweep(RunArgs),
    /// Particle swarm search over the adaptive hyperparameters.
    Tune(RunArgs),
    /// Prints the effective configuration as JSON.
    PrintConfig {
        #[arg(long, value_enum, default_value = "step")]
        scenario: Kind,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Step,
    Harmonic,
    Intercept,
    Sweep,
    Tune,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    alpha_tla: Option<f64>,
    #[arg(long, value_enum)]
    adaptive: Option<OnOff>,
    #[arg(long)]
    seed: Option<u64>,
    /// Controller sample time, s.
    #[arg(long)]
    ts: Option<f64>,
}

fn resolve(kind: ScenarioKind, args: &RunArgs) -> adaptive_autopilot::Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let mut c = load_config(path)?;
            c.scenario = kind;
            c
        }
        None => ScenarioConfig::new(kind),
    };
    Overrides {
        alpha_tla: args.alpha_tla,
        adaptive: args.adaptive.map(|a| matches!(a, OnOff::On)),
        seed: args.seed,
        t_s: args.ts,
        out: args.out.clone(),
    }
    .apply(&mut cfg)?;
    Ok(cfg)
}

fn scenario_kind(k: Kind) -> ScenarioKind {
    match k {
        Kind::Step => ScenarioKind::Step,
        Kind::Harmonic => ScenarioKind::Harmonic,
        Kind::Intercept => ScenarioKind::Intercept,
        Kind::Sweep => ScenarioKind::Sweep,
        Kind::Tune => ScenarioKind::Tune,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args, print) = match cli.command {
        Command::Step(a) => (Kind::Step, a, false),
        Command::Harmonic(a) => (Kind::Harmonic, a, false),
        Command::Intercept(a) => (Kind::Intercept, a, false),
        Command::Sweep(a) => (Kind::Sweep, a, false),
        Command::Tune(a) => (Kind::Tune, a, false),
        Command::PrintConfig { scenario, args } => (scenario, args, true),
    };
    let cfg = match resolve(scenario_kind(kind), &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if print {
        let _ = writeln!(std::io::stdout(), "{}", to_json(&cfg));
        return ExitCode::SUCCESS;
    }
    let report = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = write_report(&report, &cfg.output.dir) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for run in &report.summary.runs {
        match (&run.error, run.miss_distance_m) {
            (Some(e), _) => eprintln!("{}: failed at t = {:.3} s: {e}", run.label, run.end_time_s),
            (None, Some(m)) => println!("{}: miss {m:.3} m", run.label),
            (None, None) => println!("{}: mean |z| {:.4} m/s^2", run.label, run.mean_abs_z_m_s2),
        }
    }
    if let Some(t) = &report.summary.tune {
        println!(
            "best r_u {:.5}, log10 r_theta {:.4}, cost {:.6}",
            t.best_r_u, t.best_log10_r_theta, t.best_cost
        );
    }
    if report.summary.all_completed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
