use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chipfire::engine::EngineError;
use chipfire::model::{from_json, to_json, ModelError};
use chipfire::space::{SpaceError, DEFAULT_STATE_BUDGET};
use chipfire::transform::{self, TransformError, DEFAULT_SPLIT_CAP};
use chipfire::{build_space, fixtures, ConfigSpace, FiringPolicy, Game, LatticeReport, Simulator};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Chip firing games, sandpiles and mutating games, and their configuration spaces.
///
/// Game files are JSON; `-` reads standard input. CHIPFIRE_BUDGET overrides
/// the default step and state budgets.
#[derive(Parser)]
#[command(name = "chipfire", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a game to its final configuration.
    Simulate {
        file: PathBuf,
        /// `smallest`, `random` or `random:SEED`.
        #[arg(long, default_value = "smallest", value_parser = parse_policy)]
        policy: FiringPolicy,
        /// Maximum number of firings.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Build the configuration space. Prints JSON unless `--dot` or `--json` is given.
    Space {
        file: PathBuf,
        /// Write the Hasse diagram in DOT (`-` for stdout).
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write states and covers as JSON (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Maximum number of states.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Report the order-theoretic properties of the configuration space.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Rewrite a game.
    Transform {
        file: PathBuf,
        #[arg(long)]
        op: Op,
        /// Vertex for `ground`, `multiply` and `split`.
        #[arg(long)]
        vertex: Option<String>,
        /// Amount for `ground` and `multiply`.
        #[arg(long, default_value_t = 1)]
        factor: u64,
        /// Skip the simplicity check of `ground` and `multiply`.
        #[arg(long)]
        unchecked: bool,
        /// Maximum number of splits for `mcfg-simplify`.
        #[arg(long, default_value_t = DEFAULT_SPLIT_CAP)]
        cap: usize,
        /// Check that both games have isomorphic configuration spaces.
        #[arg(long)]
        verify: bool,
        /// Output file; stdout by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two games have isomorphic configuration spaces.
    Isocheck {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// The built-in example games.
    Fixtures {
        #[command(subcommand)]
        command: FixtureCommand,
    },
}

#[derive(Subcommand)]
enum FixtureCommand {
    /// Name, kind, size and description of every fixture.
    List,
    /// Print one fixture, or write several (all by default) into `--dir`.
    Dump {
        names: Vec<String>,
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Ground,
    Multiply,
    ToAsm,
    Split,
    McfgSimplify,
    McfgToCfg,
}

fn parse_policy(s: &str) -> Result<FiringPolicy, String> {
    match s.split_once(':') {
        None if s == "smallest" => Ok(FiringPolicy::Smallest),
        None if s == "random" => Ok(FiringPolicy::Random(0)),
        Some(("random", seed)) => seed
            .parse()
            .map(FiringPolicy::Random)
            .map_err(|e| format!("bad seed: {e}")),
        _ => Err(format!("unknown policy `{s}`")),
    }
}

mod code {
    pub const NOT_EQUIVALENT: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const BUDGET: u8 = 3;
    pub const DIVERGES: u8 = 4;
    pub const VERIFY: u8 = 5;
    pub const CYCLIC_SUPPORT: u8 = 6;
    pub const NOT_SIMPLE: u8 = 7;
    pub const MULTIPLE_SINKS: u8 = 8;
    pub const WRONG_KIND: u8 = 9;
    pub const BAD_ARGUMENT: u8 = 10;
    pub const FIRED_ONCE: u8 = 11;
    pub const ITERATIONS: u8 = 12;
    pub const NEVER_FIRED: u8 = 13;
    pub const NO_SINK: u8 = 14;
    pub const INTERNAL: u8 = 15;
    pub const UNDECIDED: u8 = 16;
}

struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            lines: vec![message.into()],
        }
    }
}

fn violations<T: ToString>(vs: &[T]) -> Failure {
    Failure {
        code: code::INPUT,
        lines: vs
            .iter()
            .map(|v| format!("invalid game: {}", v.to_string()))
            .collect(),
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match &e {
            EngineError::Invalid(vs) => return violations(vs),
            EngineError::UnknownVertex(_) | EngineError::NotFireable(_) => code::BAD_ARGUMENT,
            EngineError::BudgetExceeded(_) => code::BUDGET,
            EngineError::Undecided(_) => code::UNDECIDED,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::Invalid(vs) => return violations(&vs),
            ModelError::Engine(e) => return e.into(),
            ModelError::Json(_) | ModelError::DuplicateVertex(_) => code::INPUT,
            ModelError::NotAnAsm(_) | ModelError::NotACfg(_) => code::WRONG_KIND,
            ModelError::NonConvergent => code::DIVERGES,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SpaceError> for Failure {
    fn from(e: SpaceError) -> Self {
        let code = match e {
            SpaceError::Engine(e) => return e.into(),
            SpaceError::NonConvergent => code::DIVERGES,
            SpaceError::BudgetExceeded(_) | SpaceError::TooManyVertices(_) => code::BUDGET,
            SpaceError::NotSimple => code::NOT_SIMPLE,
            SpaceError::UnknownVertex(_) | SpaceError::UnknownState(_) => code::BAD_ARGUMENT,
            SpaceError::InternalInconsistency(_) | SpaceError::Lattice(_) => code::INTERNAL,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<TransformError> for Failure {
    fn from(e: TransformError) -> Self {
        use TransformError::*;
        let code = match e {
            Engine(e) => return e.into(),
            Space(e) => return e.into(),
            Invalid(vs) => return violations(&vs),
            NotCfg(_) | NotMcfg(_) => code::WRONG_KIND,
            NotSimple => code::NOT_SIMPLE,
            NonConvergent => code::DIVERGES,
            UnknownVertex(_) | SinkVertex(_) | InvalidFactor => code::BAD_ARGUMENT,
            NoSink => code::NO_SINK,
            MultipleSinks(_) => code::MULTIPLE_SINKS,
            CyclicSupport(_) => code::CYCLIC_SUPPORT,
            VertexFiredOnce(_) => code::FIRED_ONCE,
            NeverFired(_) => code::NEVER_FIRED,
            IterationBudget(_) => code::ITERATIONS,
            NameCollision(_) | InternalInconsistency(_) => code::INTERNAL,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn budget(flag: Option<u64>) -> Result<Option<u64>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("CHIPFIRE_BUDGET") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Failure::new(
                code::BAD_ARGUMENT,
                format!("CHIPFIRE_BUDGET is not a number: `{v}`"),
            )
        }),
        Err(_) => Ok(None),
    }
}

fn state_budget(flag: Option<u64>) -> Result<usize, Failure> {
    Ok(budget(flag)?.map_or(DEFAULT_STATE_BUDGET, |b| b as usize))
}

fn load(path: &Path) -> Result<Game, Failure> {
    let mut text = String::new();
    let read = if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| text = t)
    };
    read.map_err(|e| Failure::new(code::INPUT, format!("{}: {e}", path.display())))?;
    let game = from_json(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.lines[0] = format!("{}: {}", path.display(), f.lines[0]);
        f
    })?;
    let problems = chipfire::model::validate(&game);
    if !problems.is_empty() {
        let mut f = violations(&problems);
        for line in &mut f.lines {
            *line = format!("{}: {line}", path.display());
        }
        return Err(f);
    }
    Ok(game)
}

fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, text)
            .map_err(|e| Failure::new(code::INPUT, format!("{}: {e}", p.display()))),
        _ => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(code::INPUT, format!("stdout: {e}"))),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn space_of(game: &Game, flag: Option<u64>) -> Result<ConfigSpace, Failure> {
    Ok(build_space(game, state_budget(flag)?)?)
}

fn simulate(file: &Path, policy: FiringPolicy, flag: Option<u64>) -> Outcome {
    let game = load(file)?;
    let sim = Simulator::new(&game)?;
    let steps = budget(flag)?.unwrap_or_else(|| sim.default_step_budget());
    let record = sim.run_to_fixpoint(policy, steps)?;
    emit(None, &pretty(&record))
}

fn space(file: &Path, dot: Option<&Path>, json: Option<&Path>, flag: Option<u64>) -> Outcome {
    let s = space_of(&load(file)?, flag)?;
    if let Some(p) = dot {
        emit(Some(p), &s.to_dot())?;
    }
    if json.is_some() || dot.is_none() {
        emit(json, &pretty(&s.to_export()))?;
    }
    Ok(())
}

fn analyze(file: &Path, flag: Option<u64>) -> Outcome {
    let s = space_of(&load(file)?, flag)?;
    emit(None, &pretty(&LatticeReport::of(&s.to_poset())))
}

struct TransformArgs<'a> {
    op: Op,
    vertex: Option<&'a str>,
    factor: u64,
    unchecked: bool,
    cap: usize,
}

fn apply(game: &Game, args: &TransformArgs) -> Result<Game, Failure> {
    let vertex = || {
        args.vertex
            .ok_or_else(|| Failure::new(code::BAD_ARGUMENT, "this operation needs --vertex"))
    };
    Ok(match args.op {
        Op::Ground if args.unchecked => transform::ground_unchecked(game, vertex()?, args.factor)?,
        Op::Ground => transform::ground(game, vertex()?, args.factor)?,
        Op::Multiply if args.unchecked => {
            transform::multiply_unchecked(game, vertex()?, args.factor)?
        }
        Op::Multiply => transform::multiply(game, vertex()?, args.factor)?,
        Op::ToAsm => transform::cfg_to_asm(game)?,
        Op::Split => transform::mcfg_split_vertex(game, vertex()?)?.game,
        Op::McfgSimplify => transform::mcfg_simplify_traced(game, args.cap)?.0,
        Op::McfgToCfg => transform::mcfg_to_cfg(game)?,
    })
}

fn transform_file(file: &Path, args: TransformArgs, verify: bool, out: Option<&Path>) -> Outcome {
    let game = load(file)?;
    let result = apply(&game, &args)?;
    if verify {
        let a = space_of(&game, None)?;
        let b = space_of(&result, None)?;
        if a.to_poset().isomorphic(&b.to_poset()).is_none() {
            return Err(Failure::new(
                code::VERIFY,
                format!(
                    "verification failed: {} states / {} covers became {} / {}",
                    a.len(),
                    a.covers().len(),
                    b.len(),
                    b.covers().len()
                ),
            ));
        }
        eprintln!("verified: isomorphic spaces with {} states", a.len());
    }
    emit(out, &to_json(&result))
}

#[derive(Serialize)]
struct Verdict {
    equivalent: bool,
    states: [usize; 2],
    covers: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    bijection: Option<Vec<[usize; 2]>>,
}

fn isocheck(a: &Path, b: &Path, flag: Option<u64>) -> Outcome {
    let sa = space_of(&load(a)?, flag)?;
    let sb = space_of(&load(b)?, flag)?;
    let map = sa.to_poset().isomorphic(&sb.to_poset());
    let verdict = Verdict {
        equivalent: map.is_some(),
        states: [sa.len(), sb.len()],
        covers: [sa.covers().len(), sb.covers().len()],
        bijection: map.map(|m| m.into_iter().enumerate().map(|(i, j)| [i, j]).collect()),
    };
    emit(None, &pretty(&verdict))?;
    if verdict.equivalent {
        Ok(())
    } else {
        Err(Failure {
            code: code::NOT_EQUIVALENT,
            lines: vec![],
        })
    }
}

fn fixture(name: &str) -> Result<&'static fixtures::Fixture, Failure> {
    fixtures::get(name)
        .ok_or_else(|| Failure::new(code::BAD_ARGUMENT, format!("no fixture named `{name}`")))
}

fn fixtures_cmd(command: FixtureCommand) -> Outcome {
    match command {
        FixtureCommand::List => {
            let mut out = String::new();
            for f in fixtures::all() {
                let kind = f.game().kind;
                out += &format!(
                    "{:<12} {:<5} {:>3} states  {}\n",
                    f.name, kind, f.expected.states, f.summary
                );
            }
            emit(None, &out)
        }
        FixtureCommand::Dump {
            names,
            dir: Some(dir),
        } => {
            let chosen: Vec<_> = if names.is_empty() {
                fixtures::all().iter().collect()
            } else {
                names.iter().map(|n| fixture(n)).collect::<Result<_, _>>()?
            };
            fs::create_dir_all(&dir)
                .map_err(|e| Failure::new(code::INPUT, format!("{}: {e}", dir.display())))?;
            for f in chosen {
                emit(Some(&dir.join(format!("{}.json", f.name))), f.json)?;
            }
            Ok(())
        }
        FixtureCommand::Dump { names, dir: None } => match &names[..] {
            [name] => emit(None, fixture(name)?.json),
            _ => Err(Failure::new(
                code::BAD_ARGUMENT,
                "name exactly one fixture, or use --dir",
            )),
        },
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Simulate {
            file,
            policy,
            budget,
        } => simulate(&file, policy, budget),
        Command::Space {
            file,
            dot,
            json,
            budget,
        } => space(&file, dot.as_deref(), json.as_deref(), budget),
        Command::Analyze { file, budget } => analyze(&file, budget),
        Command::Transform {
            file,
            op,
            vertex,
            factor,
            unchecked,
            cap,
            verify,
            out,
        } => {
            let args = TransformArgs {
                op,
                vertex: vertex.as_deref(),
                factor,
                unchecked,
                cap,
            };
            transform_file(&file, args, verify, out.as_deref())
        }
        Command::Isocheck { a, b, budget } => isocheck(&a, &b, budget),
        Command::Fixtures { command } => fixtures_cmd(command),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                code::BAD_ARGUMENT
            } else {
                0
            });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for line in &f.lines {
                eprintln!("error: {line}");
            }
            ExitCode::from(f.code)
        }
    }
}
