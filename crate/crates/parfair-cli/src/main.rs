//! Command line front end: instance generation, solving, verification,
//! benchmarking, and the stable-matching reduction.
//!
//! Exit codes: 0 ok, 1 fairness check failed, 2 precondition violated,
//! 3 parse failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use parfair::const_agents::{solve_const_agents, DEFAULT_NODE_BUDGET};
use parfair::efk_alloc::{solve_ef_eps, solve_ef_sqrt};
use parfair::graph_alloc::solve_graph;
use parfair::hypergraph_alloc::{solve_hypergraph, DEFAULT_MAX_RANK};
use parfair::matching_alloc::solve_matching_rounds;
use parfair::model::{verify_efk, Allocation, Instance};
use parfair::parexec::{self, Ctx};
use parfair::round_robin::{fixed_order_round_robin, AgentOrder};
use parfair::two_agent::solve_two_agent;
use parfair::{cc_reduce, generate, Error};

const EXIT_FAIRNESS: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_PARSE: u8 = 3;

#[derive(Parser)]
#[command(name = "parfair", about = "Parallel fair division of indivisible goods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Solve an instance and write the allocation.
    Solve(SolveArgs),
    /// Check an allocation against an EF(k) threshold.
    Verify(VerifyArgs),
    /// Sweep instance sizes and report work/depth/wall-clock rows.
    Bench(BenchArgs),
    /// Emit the stable matching instance of Fixed-Order Round Robin.
    Reduce(ReduceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Dense,
    Graph,
    Hypergraph,
    Sparse,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    max_value: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Max support size per good (hypergraph).
    #[arg(long, default_value_t = 3)]
    rank: usize,
    /// Max number of intersecting hyperedges per hyperedge (hypergraph).
    #[arg(long, default_value_t = 4)]
    edge_degree: usize,
    /// Max positively valued goods per agent (sparse).
    #[arg(long, default_value_t = 3)]
    per_agent: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    TwoAgent,
    Graph,
    Rr,
    ConstAgents,
    Hypergraph,
    Matching,
    EfSqrt,
    EfEps,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::TwoAgent => "two-agent",
            Algo::Graph => "graph",
            Algo::Rr => "rr",
            Algo::ConstAgents => "const-agents",
            Algo::Hypergraph => "hypergraph",
            Algo::Matching => "matching",
            Algo::EfSqrt => "ef-sqrt",
            Algo::EfEps => "ef-eps",
        }
    }

    fn randomized(self) -> bool {
        matches!(self, Algo::EfSqrt | Algo::EfEps)
    }

    /// The bound the internal fairness check enforces, if any.
    fn guarantee(self, inst: &Instance, k: usize) -> Option<usize> {
        match self {
            Algo::EfSqrt => None,
            Algo::EfEps => Some(inst.m() / (inst.n() * k)),
            _ => Some(1),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Agent order as comma-separated 0-based ids (rr, const-agents).
    #[arg(long)]
    order: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Part-size multiplier for ef-eps.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_RANK)]
    max_rank: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    /// Print the overall envy bound of the result.
    #[arg(long)]
    verify: bool,
    /// Allocation output path (defaults to INSTANCE.alloc).
    #[arg(long)]
    out: Option<PathBuf>,
    instance: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Envy threshold to check against.
    #[arg(long, default_value_t = 1)]
    k: usize,
    instance: PathBuf,
    allocation: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Comma-separated good counts.
    #[arg(long)]
    ms: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    out: PathBuf,
    instance: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Reduce(args) => cmd_reduce(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) | Error::Io(_) => EXIT_PARSE,
        _ => EXIT_PRECONDITION,
    }
}

fn parse_order(text: Option<&str>, n: usize) -> Result<AgentOrder, Error> {
    match text {
        None => Ok(AgentOrder::identity(n)),
        Some(text) => {
            let ids = text
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad agent id {tok:?} in --order")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            AgentOrder::new(ids)
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance, Error> {
    let text = std::fs::read_to_string(path)?;
    Instance::from_text(&text)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, Error> {
    let inst = match args.kind {
        Kind::Dense => generate::dense(args.n, args.m, args.max_value, args.seed),
        Kind::Graph => generate::graph(args.n, args.m, args.max_value, args.seed),
        Kind::Hypergraph => generate::hypergraph(
            args.n,
            args.m,
            args.max_value,
            args.rank,
            args.edge_degree,
            args.seed,
        )?,
        Kind::Sparse => {
            generate::sparse(args.n, args.m, args.max_value, args.per_agent, args.seed)
        }
    };
    std::fs::write(&args.out, inst.to_text())?;
    Ok(ExitCode::SUCCESS)
}

fn run_algo(args: &SolveArgs, inst: &Instance, ctx: &mut Ctx) -> Result<Allocation, Error> {
    let order = parse_order(args.order.as_deref(), inst.n())?;
    match args.algo {
        Algo::TwoAgent => solve_two_agent(ctx, inst),
        Algo::Graph => solve_graph(ctx, inst),
        Algo::Rr => fixed_order_round_robin(ctx, inst, &order),
        Algo::ConstAgents => solve_const_agents(ctx, inst, &order, args.node_budget),
        Algo::Hypergraph => solve_hypergraph(ctx, inst, args.max_rank, args.node_budget),
        Algo::Matching => solve_matching_rounds(ctx, inst),
        Algo::EfSqrt => solve_ef_sqrt(ctx, inst, args.seed),
        Algo::EfEps => solve_ef_eps(ctx, inst, args.k, args.seed),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let bytes = std::fs::read(&args.instance)?;
    let inst = Instance::from_text(&String::from_utf8_lossy(&bytes))?;
    let digest = fnv1a64(&bytes);

    let started = Instant::now();
    let mut ctx = Ctx::new();
    let alloc = parexec::install(|| run_algo(&args, &inst, &mut ctx).map(|a| (a, ctx.metrics())))?;
    let (alloc, metrics) = alloc;
    let wall_ms = started.elapsed().as_millis();

    // Defense against solver bugs: every solve re-checks its own fairness
    // guarantee before anything is written.
    let report = verify_efk(&inst, &alloc)?;
    if let Some(bound) = args.algo.guarantee(&inst, args.k) {
        if report.overall_k > bound {
            eprintln!(
                "error: {} produced overall_k={} > {bound}; refusing to write",
                args.algo.name(),
                report.overall_k
            );
            return Ok(ExitCode::from(EXIT_FAIRNESS));
        }
    }

    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.instance.with_extension("alloc"));
    std::fs::write(&out, alloc.to_text())?;

    println!("algo={}", args.algo.name());
    println!("digest={digest:016x}");
    if args.algo.randomized() {
        println!("seed={}", args.seed);
    }
    println!("work={}", metrics.work);
    println!("depth={}", metrics.depth);
    if args.verify {
        println!("overall_k={}", report.overall_k);
    }
    println!("wall_ms={wall_ms}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let inst = read_instance(&args.instance)?;
    let alloc = Allocation::from_text(&std::fs::read_to_string(&args.allocation)?)?;
    let report = verify_efk(&inst, &alloc)?;
    for i in 0..inst.n() {
        for j in 0..inst.n() {
            if i != j {
                println!("envy[{i}][{j}]={}", report.counts[i][j]);
            }
        }
    }
    println!("overall_k={}", report.overall_k);
    if report.overall_k <= args.k {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_FAIRNESS))
    }
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, Error> {
    let ms = args
        .ms
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad size {tok:?} in --ms")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = if args.algo == Algo::TwoAgent { 2 } else { args.n };
    for (i, &m) in ms.iter().enumerate() {
        let inst = match args.algo {
            Algo::Graph => generate::graph(n, m, 100, args.seed + i as u64),
            Algo::Hypergraph => {
                generate::hypergraph(n, m, 100, DEFAULT_MAX_RANK.min(n), 4, args.seed + i as u64)?
            }
            _ => generate::dense(n, m, 100, args.seed + i as u64),
        };
        let order = AgentOrder::identity(n);
        let started = Instant::now();
        let mut ctx = Ctx::new();
        parexec::install(|| -> Result<(), Error> {
            match args.algo {
                Algo::TwoAgent => solve_two_agent(&mut ctx, &inst).map(drop),
                Algo::Graph => solve_graph(&mut ctx, &inst).map(drop),
                Algo::Rr => fixed_order_round_robin(&mut ctx, &inst, &order).map(drop),
                Algo::ConstAgents => {
                    solve_const_agents(&mut ctx, &inst, &order, args.node_budget).map(drop)
                }
                Algo::Hypergraph => {
                    solve_hypergraph(&mut ctx, &inst, DEFAULT_MAX_RANK, args.node_budget).map(drop)
                }
                Algo::Matching => solve_matching_rounds(&mut ctx, &inst).map(drop),
                Algo::EfSqrt => solve_ef_sqrt(&mut ctx, &inst, args.seed).map(drop),
                Algo::EfEps => solve_ef_eps(&mut ctx, &inst, 1, args.seed).map(drop),
            }
        })?;
        let wall_ms = started.elapsed().as_millis();
        let metrics = ctx.metrics();
        println!("{m} {n} {} {} {wall_ms}", metrics.work, metrics.depth);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_reduce(args: ReduceArgs) -> Result<ExitCode, Error> {
    let inst = read_instance(&args.instance)?;
    let order = parse_order(args.order.as_deref(), inst.n())?;
    let smi = cc_reduce::reduce_to_stable_matching(&inst, &order)?;
    std::fs::write(&args.out, smi.to_text())?;
    Ok(ExitCode::SUCCESS)
}
