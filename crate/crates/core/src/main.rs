use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use maxhyp::material::{ElasticParams, MaxwellParams};
use maxhyp::scenarios::{
    error_manifest, fmt_float, parse_config, run_scenario, validate_spec, write_outputs, RunConfig, ScenarioId,
    ScenarioSpec,
};
use maxhyp::symmetrizer::{assemble_symmetric, wave_speeds};
use maxhyp::system::{Elasto7, LagrangianSystem, Ucm10};
use maxhyp::tensor::Vec2;
use maxhyp::{Error, Result};

#[derive(Parser)]
#[command(name = "maxhyp", version, about = "Symmetric-hyperbolic Maxwell viscoelasticity and elastodynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Random-state symmetry and wave-speed audit.
    AuditSymmetry {
        #[arg(long)]
        system: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        directions: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Characteristic speeds of one state in direction `nu`.
    Speeds {
        /// 7 or 10 comma-separated conserved values, or a file holding them.
        #[arg(long)]
        state: String,
        #[arg(long)]
        nu: String,
        #[arg(long, default_value_t = 1.0)]
        d1_sq: f64,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
    },
    /// Refinement study of the configured scenario.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Relaxation-time sweep of the shear mode.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated relaxation times.
        #[arg(long)]
        lambdas: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn init_threads() -> Result<()> {
    let n = match std::env::var("MAXHYP_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| Error::Validation {
            field: "MAXHYP_THREADS".into(),
            message: format!("not a count: `{v}`"),
        })?,
        Err(_) => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Io(e.to_string()))?;
    }
    Ok(())
}

fn parse_list(s: &str, field: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            match x {
                "inf" => Ok(f64::INFINITY),
                _ => x
                    .parse::<f64>()
                    .map_err(|_| Error::Validation { field: field.into(), message: format!("cannot parse `{x}`") }),
            }
        })
        .collect()
}

fn load(path: &Path) -> Result<(RunConfig, ScenarioSpec)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn execute(config: &RunConfig, spec: &ScenarioSpec, out: &Path) -> Result<u8> {
    let outcome = match run_scenario(spec, config) {
        Ok(o) => o,
        Err(e) => {
            std::fs::create_dir_all(out)?;
            std::fs::write(out.join("manifest.json"), error_manifest(Some((config, spec)), &e))?;
            return Err(e);
        }
    };
    write_outputs(out, &outcome.tables, &outcome.manifest)?;
    let m = &outcome.manifest;
    println!("scenario {}", m.scenario);
    for (name, s) in &m.summary {
        println!("  {name}: final {} (min {}, max {})", fmt_float(s.last), fmt_float(s.min), fmt_float(s.max));
    }
    for g in &m.gates {
        println!(
            "  [{}] {}: {} {} {}",
            if g.passed { "PASS" } else { "FAIL" },
            g.name,
            fmt_float(g.value),
            g.relation,
            fmt_float(g.threshold)
        );
    }
    println!("content_hash {}", m.content_hash());
    println!("wrote {}", out.display());
    Ok(m.exit_code() as u8)
}

fn speeds(state: &str, nu: &str, d1_sq: f64, gamma: f64) -> Result<()> {
    let text = if Path::new(state).is_file() { std::fs::read_to_string(state)? } else { state.to_string() };
    let values = parse_list(&text.replace('\n', ","), "state")?;
    let nu = match parse_list(nu, "nu")?.as_slice() {
        [a, b] if a.hypot(*b) > 0.0 => Vec2::new(a / a.hypot(*b), b / a.hypot(*b)),
        _ => {
            return Err(Error::Validation {
                field: "nu".into(),
                message: "expected two components a,b, not both zero".into(),
            })
        }
    };
    let elastic = ElasticParams::new(1.0, d1_sq, gamma, 1.0)?;
    let (speeds, defect, closed) = match values.len() {
        7 => {
            let sys = Elasto7::new(elastic);
            let u: [f64; 7] = values.try_into().expect("length checked");
            sys.check_admissible(&u).map_err(|r| Error::AdmissibilityLoss { cell: 0, reason: r })?;
            (wave_speeds(&sys, &u, nu)?, assemble_symmetric(&sys, &u, nu)?.symmetry_defect, sys.max_speed(&u, nu)?)
        }
        10 => {
            let sys = Ucm10::new(MaxwellParams::new(elastic, f64::INFINITY)?);
            let u: [f64; 10] = values.try_into().expect("length checked");
            sys.check_admissible(&u).map_err(|r| Error::AdmissibilityLoss { cell: 0, reason: r })?;
            (wave_speeds(&sys, &u, nu)?, assemble_symmetric(&sys, &u, nu)?.symmetry_defect, sys.max_speed(&u, nu)?)
        }
        n => {
            return Err(Error::Validation {
                field: "state".into(),
                message: format!("expected 7 (elasto7) or 10 (ucm10) values, got {n}"),
            })
        }
    };
    let listed: Vec<String> = speeds.iter().map(|s| fmt_float(*s)).collect();
    println!("speeds {}", listed.join(","));
    println!("max_speed_closed_form {}", fmt_float(closed));
    println!("symmetry_defect {}", fmt_float(defect));
    Ok(())
}

fn dispatch(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run { config, out } => {
            let (c, s) = load(&config)?;
            execute(&c, &s, &out)
        }
        Command::AuditSymmetry { system, samples, seed, directions, out } => {
            let text = format!(
                "[run]\nsystem = {system}\nscenario = audit_symmetry\nseed = {seed}\n\n[scenario]\nsamples = {samples}\ndirections = {directions}\n"
            );
            let (c, s) = parse_config(&text)?;
            execute(&c, &s, &out)
        }
        Command::Speeds { state, nu, d1_sq, gamma } => speeds(&state, &nu, d1_sq, gamma).map(|_| 0),
        Command::Converge { config, levels, out } => {
            let (mut c, mut s) = load(&config)?;
            if c.scenario != ScenarioId::Converge {
                s.target = c.scenario;
            }
            c.scenario = ScenarioId::Converge;
            s.id = ScenarioId::Converge;
            if let Some(l) = levels {
                s.levels = l;
            }
            if matches!(s.target, ScenarioId::Converge | ScenarioId::AuditSymmetry | ScenarioId::LimitSweep) {
                return Err(Error::Validation {
                    field: "target".into(),
                    message: format!("{} cannot be refined", s.target.name()),
                });
            }
            validate_spec(&s)?;
            execute(&c, &s, &out)
        }
        Command::Sweep { config, lambdas, out } => {
            let (mut c, mut s) = load(&config)?;
            c.scenario = ScenarioId::LimitSweep;
            s.id = ScenarioId::LimitSweep;
            if let Some(l) = lambdas {
                s.lambdas = parse_list(&l, "lambdas")?;
            }
            validate_spec(&s)?;
            execute(&c, &s, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| dispatch(cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
