//! The `agg` command line. Summaries are `key=value` lines. A command that
//! produces a document writes it to `--output`, or to stdout when no output
//! path is given (the summary then goes to stderr).
//!
//! Exit codes: 0 success, 1 failed gate, guard or check, 2 I/O or parse error.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::Instant;

use agg_core::oracle::{enumerate_pure_nash_with_guard, DEFAULT_GUARD};
use agg_core::ptas::{normalize_payoffs, ptas_solve, ptas_solve_overlap, GridMode};
use agg_core::reductions::{
    agents_per_pair, apply_copy_gadget, circuit_to_agg, circuit_to_symmetric_agg, circuit_to_tw1_agg,
    graphical_to_agg, graphical_to_symmetric_agg_with_limit, sparsify_to_tw1,
};
use agg_core::{expand_profile, regret, validate, ActionGraphGame, GameBuilder};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::format::{self, FormatError, ProfileFile};
use crate::generate::{random_general_game, random_tree_game, GenParams};
use crate::parallel::{grid_search, with_threads};

/// Name of the generator behind `--seed`, recorded in reports.
pub const RNG_NAME: &str = "ChaCha8Rng";

#[derive(Parser, Debug)]
#[command(name = "agg", version, about = "Approximate equilibria of action-graph games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed of the random generator.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses one per core. Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Size limit for enumerations and generated tables.
    #[arg(long, global = true)]
    pub guard: Option<u128>,
    /// Also write the summary as a JSON object to this path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a game file and print structural facts.
    Validate { game: PathBuf },
    /// Approximate a type-symmetric equilibrium of a tree game.
    Solve {
        game: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Probability step; overrides `--grid`.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_enum, default_value_t = Grid::Theoretical)]
        grid: Grid,
        /// Require connected type regions meeting at most this many per node.
        #[arg(long)]
        overlap: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute the regret of every agent under a profile.
    Check {
        game: PathBuf,
        profile: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Measure regret after mapping payoffs into [0, 1].
        #[arg(long)]
        normalized: bool,
    },
    /// List every pure equilibrium.
    PureEnum {
        game: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List every type-symmetric grid profile with regret at most `eps`.
    GridSearch {
        game: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        eps: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transform a game, graphical game or circuit.
    Reduce {
        #[arg(value_enum)]
        kind: Reduction,
        input: PathBuf,
        /// Agent to copy (`copy`).
        #[arg(long)]
        agent: Option<usize>,
        /// Target accuracy (`gg2sym`).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a random game.
    Gen {
        #[arg(long, default_value_t = 3)]
        agents: u32,
        #[arg(long, default_value_t = 4)]
        strategies: usize,
        #[arg(long, default_value_t = 1)]
        types: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 0.3)]
        self_loops: f64,
        #[arg(long, value_enum, default_value_t = Shape::Tree)]
        shape: Shape,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Grid {
    /// delta = eps / (2 d n)
    Theoretical,
    /// delta = eps / (8 d n)
    Guaranteed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Reduction {
    Copy,
    Gg2agg,
    Gg2tw1,
    Gg2sym,
    Circ2agg,
    Circ2tw1,
    Circ2sym,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Tree,
    General,
}

/// A failed command.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Domain(#[from] agg_core::Error),
    /// The command ran but its check did not pass; the summary says why.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } => 2,
            CliError::Domain(_) | CliError::Failed(_) => 1,
        }
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub summary: Vec<(String, String)>,
    pub document: Option<String>,
}

impl Outcome {
    fn put(&mut self, key: &str, value: impl Display) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn summary_text(&self) -> String {
        self.summary.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn report_json(&self, command: &str, seed: u64) -> String {
        let mut fields = vec![
            format!("  \"command\": {}", format::quote(command)),
            format!("  \"seed\": {seed}"),
            format!("  \"rng\": {}", format::quote(RNG_NAME)),
        ];
        fields.extend(self.summary.iter().map(|(k, v)| format!("  {}: {}", format::quote(k), format::quote(v))));
        format!("{{\n{}\n}}\n", fields.join(",\n"))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn parsed<T>(path: &Path, f: impl Fn(&str) -> Result<T, FormatError>) -> Result<T, CliError> {
    f(&read(path)?).map_err(|source| CliError::Format { path: path.to_owned(), source })
}

fn load_game(path: &Path) -> Result<ActionGraphGame, CliError> {
    parsed(path, format::read_game)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

pub fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Solve { .. } => "solve",
        Command::Check { .. } => "check",
        Command::PureEnum { .. } => "pure-enum",
        Command::GridSearch { .. } => "grid-search",
        Command::Reduce { .. } => "reduce",
        Command::Gen { .. } => "gen",
    }
}

/// Runs a command. On [`CliError::Failed`] the partial outcome is still
/// returned so the caller can print it.
pub fn run(cli: &Cli) -> (Outcome, Result<(), CliError>) {
    let mut out = Outcome::default();
    let result = with_threads(cli.common.threads, || dispatch(cli, &mut out));
    (out, result)
}

fn dispatch(cli: &Cli, out: &mut Outcome) -> Result<(), CliError> {
    let guard = cli.common.guard;
    match &cli.command {
        Command::Validate { game } => {
            let g = load_game(game)?;
            let r = validate(&g);
            out.put("valid", r.is_valid());
            out.put("strategies", r.strategy_count);
            out.put("agents", r.agent_count);
            out.put("types", r.type_count);
            out.put("max_degree", r.max_degree);
            out.put("forest", r.is_forest);
            out.put("tree", r.is_tree);
            out.put("self_loops", r.self_loops);
            out.put("orphans", list(&r.orphans));
            for v in &r.violations {
                out.put("violation", v);
            }
            if !r.is_valid() {
                return Err(CliError::Failed(format!("{} violation(s)", r.violations.len())));
            }
        }
        Command::Solve { game, eps, delta, grid, overlap, output } => {
            let g = load_game(game)?;
            let mode = match (delta, grid) {
                (Some(d), _) => GridMode::Delta(*d),
                (None, Grid::Theoretical) => GridMode::Theoretical,
                (None, Grid::Guaranteed) => GridMode::Guaranteed,
            };
            let start = Instant::now();
            let sol = match overlap {
                Some(cap) => ptas_solve_overlap(&g, *eps, mode, *cap)?,
                None => ptas_solve(&g, *eps, mode)?,
            };
            // Timing goes to stderr so that stdout stays reproducible.
            eprintln!("runtime_ms={}", start.elapsed().as_millis());
            out.put("status", "ok");
            out.put("eps", eps);
            out.put("delta", sol.grid.delta());
            out.put("units", sol.grid.units());
            out.put("root", sol.root);
            out.put("regret", format::prob(sol.regret));
            out.put("regret_original", format::prob(sol.regret_original));
            out.put("payoff_scale", sol.map.scale());
            emit(out, output, format::write_profile(&ProfileFile::Type(sol.profile)))?;
        }
        Command::Check { game, profile, eps, normalized } => {
            let mut g = load_game(game)?;
            if *normalized {
                g = normalize_payoffs(&g).0;
            }
            let p = match parsed(profile, format::read_profile)? {
                ProfileFile::Agent(m) => m,
                ProfileFile::Type(t) => expand_profile(&t, &g)?,
            };
            let r = regret(&g, &p)?;
            for (a, x) in r.per_agent.iter().enumerate() {
                out.put(&format!("regret[{a}]"), format::prob(*x));
            }
            out.put("max_regret", format::prob(r.max));
            out.put("eps", eps);
            let ok = r.max <= eps + agg_core::expected_utility::NASH_SLACK;
            out.put("eps_nash", ok);
            if !ok {
                return Err(CliError::Failed(format!("regret {} exceeds eps {eps}", r.max)));
            }
        }
        Command::PureEnum { game, output } => {
            let g = load_game(game)?;
            let ne = enumerate_pure_nash_with_guard(&g, guard.unwrap_or(DEFAULT_GUARD))?;
            out.put("count", ne.len());
            emit(out, output, format::write_pure_listing(&ne))?;
        }
        Command::GridSearch { game, delta, eps, output } => {
            let g = load_game(game)?;
            let (units, found) = grid_search(&g, *delta, *eps, guard.unwrap_or(DEFAULT_GUARD))?;
            out.put("units", units);
            out.put("count", found.len());
            emit(out, output, format::write_grid_listing(units, *eps, &found))?;
        }
        Command::Reduce { kind, input, agent, eps, output } => {
            let limit = guard.unwrap_or(GameBuilder::DEFAULT_ENTRY_LIMIT);
            let game = reduce(*kind, input, *agent, *eps, limit, out)?;
            out.put("strategies", game.strategy_count());
            out.put("agents", game.agent_count());
            out.put("types", game.types().len());
            out.put("forest", game.graph().is_forest());
            out.put("max_degree", game.graph().max_degree());
            emit(out, output, format::write_game(&game))?;
        }
        Command::Gen { agents, strategies, types, degree, self_loops, shape, output } => {
            let p = GenParams {
                agents: *agents,
                strategies: *strategies,
                types: *types,
                degree: *degree,
                self_loops: *self_loops,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cli.common.seed);
            let g = match shape {
                Shape::Tree => random_tree_game(&mut rng, &p)?,
                Shape::General => random_general_game(&mut rng, &p)?,
            };
            out.put("seed", cli.common.seed);
            out.put("rng", RNG_NAME);
            out.put("strategies", g.strategy_count());
            out.put("agents", g.agent_count());
            out.put("max_degree", g.graph().max_degree());
            emit(out, output, format::write_game(&g))?;
        }
    }
    Ok(())
}

fn reduce(
    kind: Reduction,
    input: &Path,
    agent: Option<usize>,
    eps: Option<f64>,
    limit: u128,
    out: &mut Outcome,
) -> Result<ActionGraphGame, CliError> {
    let needs = |what: &str| CliError::Domain(agg_core::Error::InvalidParameter(format!("`{kind:?}` needs --{what}")));
    Ok(match kind {
        Reduction::Copy => {
            let g = load_game(input)?;
            let (game, gadget) = apply_copy_gadget(&g, agent.ok_or_else(|| needs("agent"))?)?;
            out.put("gadget", format!("f_a={} t_a={} f_c={} t_c={}", gadget.f_a, gadget.t_a, gadget.f_c, gadget.t_c));
            game
        }
        Reduction::Gg2agg => graphical_to_agg(&parsed(input, format::read_graphical)?)?,
        Reduction::Gg2tw1 => {
            let (game, gadgets) = sparsify_to_tw1(&graphical_to_agg(&parsed(input, format::read_graphical)?)?)?;
            out.put("gadgets", gadgets.len());
            game
        }
        Reduction::Gg2sym => {
            let h = parsed(input, format::read_graphical)?;
            let eps = eps.ok_or_else(|| needs("eps"))?;
            out.put("agents_per_pair", agents_per_pair(eps)?);
            graphical_to_symmetric_agg_with_limit(&h, eps, limit)?
        }
        Reduction::Circ2agg => circuit_to_agg(&parsed(input, format::read_circuit)?)?,
        Reduction::Circ2tw1 => {
            let (game, gadgets) = circuit_to_tw1_agg(&parsed(input, format::read_circuit)?)?;
            out.put("gadgets", gadgets.len());
            game
        }
        Reduction::Circ2sym => circuit_to_symmetric_agg(&parsed(input, format::read_circuit)?)?,
    })
}

fn emit(out: &mut Outcome, path: &Option<PathBuf>, text: String) -> Result<(), CliError> {
    match path {
        Some(p) => {
            write(p, &text)?;
            out.put("output", p.display());
        }
        None => out.document = Some(text),
    }
    Ok(())
}

fn list(ids: &[usize]) -> String {
    ids.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses `args`, runs the command, prints, and returns the exit code.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (out, result) = run(&cli);
    let summary = out.summary_text();
    match &out.document {
        Some(doc) => {
            print!("{doc}");
            eprint!("{summary}");
        }
        None => print!("{summary}"),
    }
    if let Some(path) = &cli.common.report {
        if let Err(e) = write(path, &out.report_json(command_name(&cli.command), cli.common.seed)) {
            eprintln!("error: {e}");
            return 2;
        }
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
