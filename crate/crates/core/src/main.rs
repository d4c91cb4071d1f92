use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use matrix_routing::fixture::{reference_instance, reference_scenario, REFERENCE_DOCUMENT};
use matrix_routing::pipeline::{
    run_pipeline, solve_monolithic_oracle, MSource, Scenario, ScenarioName,
};
use matrix_routing::report::{emit_report, Format, Report};
use matrix_routing::{Error, Instance};

#[derive(Parser)]
#[command(
    name = "matrix-routing",
    version,
    about = "Multi-vehicle routing by incidence-matrix decomposition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose, assign and route an instance.
    Solve {
        /// Instance document (JSON). Defaults to the bundled reference network.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value = "mass_volume")]
        scenario: ScenarioName,
        #[arg(long, default_value = "derived")]
        m_source: MSource,
        /// Also compute the joint exhaustive optimum and re-check each stage exhaustively.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value = "text")]
        format: Format,
        /// Include the incidence partition and coefficients in the report.
        #[arg(long)]
        dump_partition: bool,
    },
    /// Joint exhaustive optimum only.
    Oracle {
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value = "mass_volume")]
        scenario: ScenarioName,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Bundled data.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    /// List the bundled scenarios.
    List,
    /// Print the bundled instance document.
    Show,
}

fn load(path: &Option<PathBuf>) -> Result<Instance, Error> {
    match path {
        None => Ok(reference_instance()),
        Some(path) => Instance::from_json(&std::fs::read_to_string(path)?),
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Solve {
            instance,
            scenario,
            m_source,
            oracle,
            format,
            dump_partition,
        } => {
            let instance = load(&instance)?;
            let scenario = Scenario::resolve(scenario, &instance);
            let plan = run_pipeline(&instance, &scenario, m_source)?;
            let joint = if oracle {
                Some(solve_monolithic_oracle(&instance, &scenario)?)
            } else {
                None
            };
            let report = Report::new(plan, joint, oracle).with_partition_dump(dump_partition);
            Ok(emit_report(&report, format))
        }
        Command::Oracle {
            instance,
            scenario,
            format,
        } => {
            let instance = load(&instance)?;
            let scenario = Scenario::resolve(scenario, &instance);
            let plan = solve_monolithic_oracle(&instance, &scenario)?;
            Ok(emit_report(&Report::new(plan, None, false), format))
        }
        Command::Fixtures { action } => match action {
            FixtureAction::Show => Ok(REFERENCE_DOCUMENT.to_string()),
            FixtureAction::List => {
                let mut out = String::from(
                    "reference network: 11 points, 3 vehicles (cost scales 1, 1.2, 1.25)\n",
                );
                for name in ScenarioName::ALL {
                    let s = reference_scenario(name);
                    let caps = |c: &Option<Vec<matrix_routing::instance::Capacity>>| {
                        c.as_ref().map_or("instance".to_string(), |caps| {
                            caps.iter()
                                .map(|c| c.limit().map_or("∞".into(), |l| l.to_string()))
                                .collect::<Vec<_>>()
                                .join("/")
                        })
                    };
                    out.push_str(&format!(
                        "  {:<14} mass caps {:<10} volume caps {}\n",
                        name.as_str(),
                        caps(&s.mass_capacities),
                        caps(&s.volume_capacities)
                    ));
                }
                Ok(out)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
