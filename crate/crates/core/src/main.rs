use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fbu_core::harness::{
    self, CouplingSection, GridSection, Mode, OracleSection, ProofSection, RunConfig, RunOutput, RunSection,
    ShapeSection, ThreeBodySection,
};
use fbu_core::potential::{Shape, ShapeKind};

/// Heavy-light few-body bound states in one dimension.
#[derive(Parser)]
#[command(name = "fbu", version)]
struct Cli {
    /// Directory for CSV, JSON and gnuplot output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Wave-function / tensor grid as NP,NK.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run { config: PathBuf },
    /// Potential-shape catalog.
    Shapes {
        #[command(subcommand)]
        command: ShapesCommand,
    },
    /// Two-body bound states.
    #[command(name = "two-body")]
    TwoBody {
        #[command(subcommand)]
        command: TwoBodyCommand,
    },
    /// Three-body bound states.
    #[command(name = "three-body")]
    ThreeBody {
        #[command(subcommand)]
        command: ThreeBodyCommand,
    },
    /// Coordinate-space cross-checks.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Subcommand)]
enum ShapesCommand {
    List,
}

#[derive(Args, Clone)]
struct ShapeArgs {
    /// Catalog name (default: gaussian; mexican-hat for verify-proof).
    #[arg(long)]
    shape: Option<String>,
    /// Range of the profile in units of xi0.
    #[arg(long)]
    width: Option<f64>,
    /// Translation of the profile.
    #[arg(long)]
    shift: Option<f64>,
    /// Asymmetry parameter of the skew shapes.
    #[arg(long)]
    skew: Option<f64>,
}

impl ShapeArgs {
    fn section(&self, default: &str) -> ShapeSection {
        let name = self.shape.clone().unwrap_or_else(|| default.to_string());
        ShapeSection { name, width: self.width, shift: self.shift, skew: self.skew }
    }
}

#[derive(Args, Clone)]
struct SectorArgs {
    /// Mass ratios, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    alpha: Vec<f64>,
    /// Parities (`even`, `odd`), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "even")]
    parity: Vec<String>,
}

#[derive(Subcommand)]
enum TwoBodyCommand {
    /// Solve at one or more couplings.
    Solve {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Couplings, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        v0: Vec<f64>,
        /// Also write the momentum-space wave functions.
        #[arg(long)]
        wavefunctions: bool,
    },
    /// Halving sequence with power-law and overlap checks.
    Sweep {
        #[command(flatten)]
        shape: ShapeArgs,
        /// First coupling of the sequence.
        #[arg(long, allow_hyphen_values = true)]
        start: f64,
        /// Number of times the coupling is halved.
        #[arg(long, default_value_t = 4)]
        halvings: usize,
        /// Repeat the sequence with the opposite sign of `v0`.
        #[arg(long)]
        both_signs: bool,
    },
}

#[derive(Subcommand)]
enum ThreeBodyCommand {
    /// Zero-range spectrum in scaled units.
    Contact {
        #[command(flatten)]
        sector: SectorArgs,
        /// Bound states per sector.
        #[arg(long, default_value_t = 1)]
        states: usize,
        /// `reduced`, `tensor-dense` or `tensor-matrix-free`.
        #[arg(long, default_value = "reduced")]
        method: String,
        /// Also write the wave functions on the NP x NK grid.
        #[arg(long)]
        wavefunctions: bool,
    },
    /// Finite-range spectrum at given couplings.
    Finite {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Couplings, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        v0: Vec<f64>,
        #[command(flatten)]
        sector: SectorArgs,
        /// Bound states per sector.
        #[arg(long, default_value_t = 1)]
        states: usize,
        /// Also write the wave functions on the NP x NK grid.
        #[arg(long)]
        wavefunctions: bool,
        /// Compare against the zero-range spectrum along the couplings.
        #[arg(long)]
        sweep: bool,
    },
    /// Iteration diagnostics for type-II shapes along a sequence of q0.
    VerifyProof {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Binding momenta, comma separated, largest first.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025,0.0125")]
        q0: Vec<f64>,
        #[command(flatten)]
        sector: SectorArgs,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Finite-difference two-body energy against the momentum solver.
    TwoBody {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Couplings, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        v0: Vec<f64>,
    },
    /// Two-dimensional finite-difference ground state against the momentum solver.
    ThreeBody {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Coupling for finite-range shapes.
        #[arg(long, allow_hyphen_values = true)]
        v0: Option<f64>,
        #[command(flatten)]
        sector: SectorArgs,
        /// Box half-width.
        #[arg(long)]
        extent: Option<f64>,
        /// Odd grid sizes per axis, coarse first.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
    },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected NP,NK, got `{s}`"))?;
    let p = a.trim().parse().map_err(|e| format!("NP: {e}"))?;
    let k = b.trim().parse().map_err(|e| format!("NK: {e}"))?;
    Ok((p, k))
}

fn base(name: &str, mode: Mode) -> RunConfig {
    RunConfig {
        run: RunSection { name: name.into(), mode },
        shape: ShapeSection::default(),
        coupling: CouplingSection::default(),
        three_body: ThreeBodySection::default(),
        grid: GridSection::default(),
        tolerance: Default::default(),
        output: Default::default(),
        oracle: OracleSection::default(),
        proof: ProofSection::default(),
    }
}

fn sector(cfg: &mut RunConfig, s: &SectorArgs) {
    cfg.three_body.alpha = s.alpha.clone();
    cfg.three_body.parity = s.parity.clone();
}

fn list(v: Vec<f64>) -> CouplingSection {
    CouplingSection { v0: Some(v), start: None, halvings: None }
}

fn build(command: &Command) -> Option<RunConfig> {
    let cfg = match command {
        Command::Run { .. } | Command::Shapes { .. } => return None,
        Command::TwoBody { command } => match command {
            TwoBodyCommand::Solve { shape, v0, wavefunctions } => {
                let mut c = base("two-body", Mode::TwoBody);
                c.shape = shape.section("gaussian");
                c.coupling = list(v0.clone());
                c.output.wavefunctions = *wavefunctions;
                c
            }
            TwoBodyCommand::Sweep { shape, start, halvings, both_signs } => {
                let mut c = base("two-body-sweep", Mode::TwoBody);
                c.shape = shape.section("gaussian");
                let mut v: Vec<f64> = (0..=*halvings).map(|k| start / 2f64.powi(k as i32)).collect();
                if *both_signs {
                    v.extend(v.clone().into_iter().map(|x| -x));
                }
                c.coupling = list(v);
                c
            }
        },
        Command::ThreeBody { command } => match command {
            ThreeBodyCommand::Contact { sector: s, states, method, wavefunctions } => {
                let mut c = base("three-body-contact", Mode::ThreeBody);
                c.shape.name = "contact".into();
                sector(&mut c, s);
                c.three_body.states = *states;
                c.three_body.contact_method = method.clone();
                c.output.wavefunctions = *wavefunctions;
                c
            }
            ThreeBodyCommand::Finite { shape, v0, sector: s, states, wavefunctions, sweep } => {
                let mut c = if *sweep {
                    base("three-body-sweep", Mode::Sweep)
                } else {
                    base("three-body-finite", Mode::ThreeBody)
                };
                c.shape = shape.section("gaussian");
                c.coupling = list(v0.clone());
                sector(&mut c, s);
                c.three_body.states = *states;
                c.output.wavefunctions = *wavefunctions;
                c
            }
            ThreeBodyCommand::VerifyProof { shape, q0, sector: s } => {
                let mut c = base("verify-proof", Mode::VerifyProof);
                c.shape = shape.section("mexican-hat");
                c.proof.q0 = q0.clone();
                sector(&mut c, s);
                c
            }
        },
        Command::Oracle { command } => match command {
            OracleCommand::TwoBody { shape, v0 } => {
                let mut c = base("oracle-two-body", Mode::Oracle);
                c.shape = shape.section("gaussian");
                c.coupling = list(v0.clone());
                c
            }
            OracleCommand::ThreeBody { shape, v0, sector: s, extent, levels } => {
                let mut c = base("oracle-three-body", Mode::Oracle);
                match v0 {
                    None => c.shape = shape.section("contact"),
                    Some(v) => {
                        c.shape = shape.section("gaussian");
                        c.coupling = list(vec![*v]);
                    }
                }
                sector(&mut c, s);
                c.oracle = OracleSection { kind: "three-body".into(), extent: *extent, levels: levels.clone() };
                c
            }
        },
    };
    Some(cfg)
}

fn shapes_list() {
    println!("{:<22} {:<8} {:>14} {:>14}  params", "name", "kind", "F(0)", "J");
    for s in Shape::catalog() {
        let f0 = s.f0().map(|c| format!("{:.6e}", c)).unwrap_or_else(|_| "-".into());
        let j = if s.kind == ShapeKind::TypeII {
            s.moment_j().map(|j| format!("{j:.6e}")).unwrap_or_else(|_| "-".into())
        } else {
            "-".into()
        };
        let params: Vec<String> = s.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{:<22} {:<8} {:>14} {:>14}  {}", s.name, s.kind.to_string(), f0, j, params.join(" "));
    }
}

fn report(out: &RunOutput) {
    for f in &out.files {
        if f.name.ends_with(".csv") && !f.name.contains("_wf") {
            println!("== {}", f.name);
            print!("{}", f.contents);
        }
    }
    for n in &out.report.notes {
        println!("note: {n}");
    }
    for f in &out.report.flags {
        println!("{} {}: {}", if f.passed { "PASS" } else { "FAIL" }, f.name, f.detail);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Shapes { command: ShapesCommand::List } = cli.command {
        shapes_list();
        return ExitCode::SUCCESS;
    }
    let (mut cfg, default_dir) = match &cli.command {
        Command::Run { config } => match RunConfig::from_file(config) {
            Ok(c) => {
                let d = c.output.dir.clone().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
                (c, Some(d))
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        other => (build(other).expect("subcommand builds a config"), None),
    };
    if let Some((np, nk)) = cli.grid {
        cfg.grid = GridSection { np, nk };
    }
    let out = match harness::run_with_threads(&cfg, cli.threads) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    report(&out);
    if let Some(dir) = cli.out.or(default_dir) {
        match out.write(&dir) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if out.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
