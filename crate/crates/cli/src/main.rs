//! Command-line front end for the limgame solver.
//!
//! Exit codes: 0 success (and YES for `decide`), 1 NO for `decide`,
//! 2 cross-check mismatch, 64 usage error, 65 instance parse/validation
//! error, 70 internal certificate failure.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use limgame::game_solver::{check_determinacy, decide, solve_game, GameSolution};
use limgame::generator::{generate, GenParams, GraphClass};
use limgame::graph::{
    parse_game, serialize_game, GameGraph, PureMemorylessStrategy, RewardFunction, ValueVector,
};
use limgame::max_solver::solve_max;
use limgame::oracle::simulate;
use limgame::pipeline::solve_mdp;
use limgame::qualitative::{almost_sure_buchi, almost_sure_cobuchi, mec_decompose};
use limgame::rational::{approx_decimal, format_rational, parse_rational};
use limgame::reductions::ConvertedMdp;
use limgame::solver;
use limgame::{Error, Objective, Owner, DEFAULT_BUDGET};

const EXIT_MISMATCH: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(
    name = "limgame",
    version,
    about = "Exact solver for stochastic games and MDPs with limsup, liminf and max objectives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute exact per-state values (and optionally witness strategies).
    Solve(SolveArgs),
    /// Decide Val(state) >= threshold; exits 0 for YES, 1 for NO.
    Decide(DecideArgs),
    /// Almost-sure winning set of a Büchi or coBüchi objective on an MDP.
    Qualitative(QualitativeArgs),
    /// Maximal end components of an MDP.
    Mec(MecArgs),
    /// Values by brute-force strategy enumeration.
    Oracle(OracleArgs),
    /// Monte Carlo estimate under the computed optimal strategies.
    Simulate(SimulateArgs),
    /// Emit a random valid instance file.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Limsup,
    Liminf,
    Max,
}

impl From<ObjectiveArg> for Objective {
    fn from(arg: ObjectiveArg) -> Objective {
        match arg {
            ObjectiveArg::Limsup => Objective::Limsup,
            ObjectiveArg::Liminf => Objective::Liminf,
            ObjectiveArg::Max => Objective::Max,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Args)]
struct InputArgs {
    /// Instance file; stdin when omitted or "-".
    input: Option<PathBuf>,
    /// Output format; JSON emits one object with values keyed by state id.
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Add a 6-place decimal rendering next to exact rationals (text mode).
    #[arg(long)]
    approx: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Limsup)]
    objective: ObjectiveArg,
    /// Print the optimal strategies next to the values.
    #[arg(long)]
    witness: bool,
    /// Dump the reduction's per-level log.
    #[arg(long)]
    trace: bool,
    /// Re-solve with the enumeration oracle and fail on any mismatch.
    #[arg(long)]
    oracle_verify: bool,
    /// Check both determinacy identities; any nonzero sum fails.
    #[arg(long)]
    check_determinacy: bool,
    /// Solution method registered under this name.
    #[arg(long, default_value = "reduction")]
    method: String,
}

#[derive(Args)]
struct DecideArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Limsup)]
    objective: ObjectiveArg,
    /// State whose value is compared.
    #[arg(long)]
    state: String,
    /// Exact rational threshold, e.g. "6" or "13/2".
    #[arg(long, allow_hyphen_values = true)]
    threshold: String,
}

#[derive(Args)]
struct QualitativeArgs {
    #[command(flatten)]
    io: InputArgs,
    /// buchi: some target visited infinitely often; cobuchi: eventually
    /// only targets visited.
    #[arg(long, value_parser = ["buchi", "cobuchi"])]
    property: String,
    /// Comma-separated target state ids.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
}

#[derive(Args)]
struct MecArgs {
    #[command(flatten)]
    io: InputArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Limsup)]
    objective: ObjectiveArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Limsup)]
    objective: ObjectiveArg,
    /// Start state; first declared state when omitted.
    #[arg(long)]
    state: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    episodes: u64,
    #[arg(long, default_value_t = 200)]
    horizon: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 6)]
    states: usize,
    /// Edge density in (0, 1].
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
    min_reward: i64,
    #[arg(long, default_value_t = 6, allow_hyphen_values = true)]
    max_reward: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// mdp, game or chain.
    #[arg(long, default_value = "mdp")]
    class: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes, not usage errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::CertificateFailure(_) => EXIT_INTERNAL,
                _ => EXIT_DATA,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Decide(args) => run_decide(args),
        Command::Qualitative(args) => run_qualitative(args),
        Command::Mec(args) => run_mec(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Gen(args) => run_gen(args),
    }
}

fn budget() -> Result<u64, Error> {
    match std::env::var("LIMGAME_BUDGET") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|_| Error::InvalidStrategy(format!("LIMGAME_BUDGET is not a number: {text}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn read_instance(input: &Option<PathBuf>) -> Result<(GameGraph, RewardFunction), Error> {
    let text = match input {
        Some(path) if path.as_os_str() != "-" => std::fs::read_to_string(path)
            .map_err(|e| Error::Json(format!("cannot read {}: {e}", path.display())))?,
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Error::Json(format!("cannot read stdin: {e}")))?;
            text
        }
    };
    parse_game(&text)
}

fn state_index(graph: &GameGraph, id: &str) -> Result<usize, Error> {
    graph
        .index_of(id)
        .ok_or_else(|| Error::UnknownState(id.to_string()))
}

fn render_value(io: &InputArgs, value: &limgame::Rational) -> String {
    if io.approx {
        format!("{} (~{})", format_rational(value), approx_decimal(value))
    } else {
        format_rational(value)
    }
}

fn values_json(graph: &GameGraph, values: &ValueVector) -> Value {
    let mut map = Map::new();
    for s in graph.states() {
        map.insert(
            graph.name(s).to_string(),
            json!(format_rational(values.get(s))),
        );
    }
    Value::Object(map)
}

fn strategy_json(graph: &GameGraph, strategy: &PureMemorylessStrategy) -> Value {
    let mut map = Map::new();
    for (&s, &t) in strategy.choices() {
        map.insert(graph.name(s).to_string(), json!(graph.name(t)));
    }
    Value::Object(map)
}

fn print_strategy(graph: &GameGraph, label: &str, strategy: &PureMemorylessStrategy) {
    for (&s, &t) in strategy.choices() {
        println!("{label}: {} -> {}", graph.name(s), graph.name(t));
    }
}

/// Values plus witness strategies via the reduction pipeline; max-objective
/// inputs must already be in converted form.
fn reduction_solution(
    graph: &GameGraph,
    rewards: &RewardFunction,
    objective: Objective,
    budget: u64,
) -> Result<GameSolution, Error> {
    if objective == Objective::Max {
        let converted = ConvertedMdp::from_instance(graph, rewards)?;
        let solution = solve_max(&converted)?;
        let other = match solution.strategy.owner() {
            Owner::Player1 => Owner::Player2,
            _ => Owner::Player1,
        };
        return Ok(GameSolution {
            kind: objective,
            values: solution.values,
            strategy1: solution.strategy,
            strategy2: PureMemorylessStrategy::new(other, Default::default()),
        });
    }
    solve_game(graph, rewards, objective, budget)
}

fn run_solve(args: SolveArgs) -> Result<u8, Error> {
    let (graph, rewards) = read_instance(&args.io.input)?;
    let objective = Objective::from(args.objective);
    let budget = budget()?;
    let method = solver::lookup(&args.method)?;

    let (values, witnesses) = if method.name() == "reduction" {
        let solution = reduction_solution(&graph, &rewards, objective, budget)?;
        let pair = (solution.strategy1.clone(), solution.strategy2.clone());
        (solution.values, Some(pair))
    } else {
        (method.solve(&graph, &rewards, objective, budget)?, None)
    };

    if args.trace && objective != Objective::Max {
        // Trace of the MDP left once the optimal minimizer is fixed (the
        // input itself when player 2 owns nothing).
        let residual = match &witnesses {
            Some((_, strategy2)) if !strategy2.choices().is_empty() => {
                graph.fix_strategy(strategy2)?
            }
            _ => graph.clone(),
        };
        let solved = solve_mdp(&residual, &rewards, objective)?;
        for it in &solved.reduction.iterations {
            eprintln!(
                "trace: level {} |winning| {} |removed| {}",
                format_rational(&it.level),
                it.winning.len(),
                it.removed.len()
            );
        }
    }

    let mut exit = 0u8;
    let mut oracle_matches = None;
    if args.oracle_verify {
        let check = solver::lookup("enumeration")?.solve(&graph, &rewards, objective, budget)?;
        let matches = check == values;
        oracle_matches = Some(matches);
        if !matches {
            for s in graph.states() {
                if values.get(s) != check.get(s) {
                    eprintln!(
                        "mismatch at {}: reduction {} vs enumeration {}",
                        graph.name(s),
                        format_rational(values.get(s)),
                        format_rational(check.get(s))
                    );
                }
            }
            exit = EXIT_MISMATCH;
        }
    }

    let mut determinacy = None;
    if args.check_determinacy {
        let report = check_determinacy(&graph, &rewards, budget)?;
        if !report.all_zero() {
            exit = EXIT_MISMATCH;
        }
        determinacy = Some(report);
    }

    match args.io.format {
        FormatArg::Text => {
            for s in graph.states() {
                println!(
                    "{} = {}",
                    graph.name(s),
                    render_value(&args.io, values.get(s))
                );
            }
            if args.witness {
                if let Some((strategy1, strategy2)) = &witnesses {
                    print_strategy(&graph, "strategy1", strategy1);
                    print_strategy(&graph, "strategy2", strategy2);
                }
            }
            if let Some(matches) = oracle_matches {
                println!("oracle-verify: {}", if matches { "ok" } else { "MISMATCH" });
            }
            if let Some(report) = &determinacy {
                for s in graph.states() {
                    println!(
                        "determinacy: {} limsup-sum {} liminf-sum {}",
                        graph.name(s),
                        format_rational(report.limsup_sums.get(s)),
                        format_rational(report.liminf_sums.get(s))
                    );
                }
                println!(
                    "determinacy: {}",
                    if report.all_zero() { "ok" } else { "FAILED" }
                );
            }
        }
        FormatArg::Json => {
            let mut object = Map::new();
            object.insert("objective".into(), json!(objective.name()));
            object.insert("method".into(), json!(method.name()));
            object.insert("values".into(), values_json(&graph, &values));
            if args.witness {
                if let Some((strategy1, strategy2)) = &witnesses {
                    object.insert(
                        "witness".into(),
                        json!({
                            "strategy1": strategy_json(&graph, strategy1),
                            "strategy2": strategy_json(&graph, strategy2),
                        }),
                    );
                }
            }
            if let Some(matches) = oracle_matches {
                object.insert("oracle_verified".into(), json!(matches));
            }
            if let Some(report) = &determinacy {
                object.insert(
                    "determinacy".into(),
                    json!({
                        "limsup_sums": values_json(&graph, &report.limsup_sums),
                        "liminf_sums": values_json(&graph, &report.liminf_sums),
                        "all_zero": report.all_zero(),
                    }),
                );
            }
            println!("{}", Value::Object(object));
        }
    }
    Ok(exit)
}

fn run_decide(args: DecideArgs) -> Result<u8, Error> {
    let (graph, rewards) = read_instance(&args.io.input)?;
    let objective = Objective::from(args.objective);
    if objective == Objective::Max {
        return Err(Error::UnsupportedObjective("max"));
    }
    let state = state_index(&graph, &args.state)?;
    let threshold = parse_rational(&args.threshold)?;
    let outcome = decide(&graph, &rewards, objective, state, &threshold, budget()?)?;

    match args.io.format {
        FormatArg::Text => {
            println!("{}", if outcome.satisfied { "YES" } else { "NO" });
            println!(
                "value: {} = {}",
                args.state,
                render_value(&args.io, &outcome.value)
            );
            let label = if outcome.satisfied {
                "strategy1"
            } else {
                "strategy2"
            };
            print_strategy(&graph, label, &outcome.witness);
        }
        FormatArg::Json => {
            println!(
                "{}",
                json!({
                    "objective": objective.name(),
                    "state": args.state,
                    "threshold": format_rational(&threshold),
                    "answer": if outcome.satisfied { "YES" } else { "NO" },
                    "value": format_rational(&outcome.value),
                    "witness": strategy_json(&graph, &outcome.witness),
                })
            );
        }
    }
    Ok(u8::from(!outcome.satisfied))
}

fn run_qualitative(args: QualitativeArgs) -> Result<u8, Error> {
    let (graph, _) = read_instance(&args.io.input)?;
    let targets: BTreeSet<usize> = args
        .targets
        .iter()
        .map(|id| state_index(&graph, id))
        .collect::<Result<_, _>>()?;
    let winning = match args.property.as_str() {
        "buchi" => almost_sure_buchi(&graph, &targets)?,
        _ => almost_sure_cobuchi(&graph, &targets)?,
    };
    let names: Vec<&str> = winning.iter().map(|&s| graph.name(s)).collect();

    match args.io.format {
        FormatArg::Text => {
            for name in &names {
                println!("{name}");
            }
        }
        FormatArg::Json => {
            println!(
                "{}",
                json!({
                    "property": args.property,
                    "targets": args.targets,
                    "winning": names,
                })
            );
        }
    }
    Ok(0)
}

fn run_mec(args: MecArgs) -> Result<u8, Error> {
    let (graph, _) = read_instance(&args.io.input)?;
    let decomposition = mec_decompose(&graph)?;
    let components: Vec<Vec<&str>> = decomposition
        .components
        .iter()
        .map(|c| c.states.iter().map(|&s| graph.name(s)).collect())
        .collect();

    match args.io.format {
        FormatArg::Text => {
            for (i, component) in components.iter().enumerate() {
                println!("mec {}: {}", i, component.join(" "));
            }
        }
        FormatArg::Json => {
            println!("{}", json!({ "components": components }));
        }
    }
    Ok(0)
}

fn run_oracle(args: OracleArgs) -> Result<u8, Error> {
    let (graph, rewards) = read_instance(&args.io.input)?;
    let objective = Objective::from(args.objective);
    let values = solver::lookup("enumeration")?.solve(&graph, &rewards, objective, budget()?)?;

    match args.io.format {
        FormatArg::Text => {
            for s in graph.states() {
                println!(
                    "{} = {}",
                    graph.name(s),
                    render_value(&args.io, values.get(s))
                );
            }
        }
        FormatArg::Json => {
            println!(
                "{}",
                json!({
                    "objective": objective.name(),
                    "method": "enumeration",
                    "values": values_json(&graph, &values),
                })
            );
        }
    }
    Ok(0)
}

fn run_simulate(args: SimulateArgs) -> Result<u8, Error> {
    let (graph, rewards) = read_instance(&args.io.input)?;
    let objective = Objective::from(args.objective);
    let start = match &args.state {
        Some(id) => state_index(&graph, id)?,
        None => 0,
    };
    let solution = reduction_solution(&graph, &rewards, objective, budget()?)?;
    let report = simulate(
        &graph,
        &rewards,
        Some(&solution.strategy1),
        Some(&solution.strategy2),
        objective,
        start,
        args.episodes,
        args.horizon,
        args.seed,
    )?;

    match args.io.format {
        FormatArg::Text => {
            println!(
                "mean: {} (~{})",
                format_rational(&report.mean),
                approx_decimal(&report.mean)
            );
            println!("half-width (95%): {:.6}", report.half_width);
            println!(
                "episodes: {} horizon: {} seed: {}",
                report.episodes, report.horizon, report.seed
            );
            println!(
                "exact: {} = {}",
                graph.name(start),
                format_rational(solution.values.get(start))
            );
        }
        FormatArg::Json => {
            println!(
                "{}",
                json!({
                    "objective": objective.name(),
                    "state": graph.name(start),
                    "mean": format_rational(&report.mean),
                    "mean_approx": approx_decimal(&report.mean),
                    "half_width": report.half_width,
                    "episodes": report.episodes,
                    "horizon": report.horizon,
                    "seed": report.seed,
                    "exact": format_rational(solution.values.get(start)),
                })
            );
        }
    }
    Ok(0)
}

fn run_gen(args: GenArgs) -> Result<u8, Error> {
    let class = GraphClass::parse(&args.class)
        .ok_or_else(|| Error::InvalidStrategy(format!("unknown class `{}`", args.class)))?;
    let params = GenParams {
        states: args.states,
        density: args.density,
        min_reward: args.min_reward,
        max_reward: args.max_reward,
        seed: args.seed,
        class,
    };
    let (graph, rewards) = generate(&params)?;
    println!("{}", serialize_game(&graph, &rewards));
    Ok(0)
}
