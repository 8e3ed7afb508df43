use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use delaycode::flow_graph::{
    build_line_graph, compute_flows, find_knots, parse_network, validate, FlowNetwork, KnotKind,
};
use delaycode::life_star::{compile, EncodeError, EncoderConfig, NetworkCode};
use delaycode::mason::{line_graph_dot, prune_for_symbol, MasonLimits};
use delaycode::report::{network_dot, render_json, render_text};
use delaycode::simulator::{verify, SimError, SourceSchedule, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "delaycode", version, about = "Binary network coding with delay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check flow paths and print the derived structure.
    Validate(InputArgs),
    /// Compute local and global encodings.
    Compile(CompileArgs),
    /// Compile, run both simulators and decode at every sink.
    Simulate(SimulateArgs),
    /// Fill in flow paths by max-flow and print the network.
    Flows(InputArgs),
    /// Write DOT drawings of the network and, with --knots, its line graphs.
    Dot(DotArgs),
}

#[derive(Args)]
struct InputArgs {
    input: PathBuf,
}

#[derive(Args)]
struct EncoderArgs {
    /// Disable the post-knot shortcut.
    #[arg(long)]
    no_shortcut: bool,
    /// Exclusive bound on every delay exponent (default: number of sinks involved).
    #[arg(long)]
    exponent_cap: Option<usize>,
    /// Maximum number of simple cycles per line graph.
    #[arg(long, default_value_t = MasonLimits::default().cycle_cap)]
    cycle_cap: usize,
    /// Maximum number of forward paths per transfer function.
    #[arg(long, default_value_t = MasonLimits::default().path_cap)]
    path_cap: usize,
    /// Comma-separated edges visited first, in this order, when eligible.
    #[arg(long, value_delimiter = ',')]
    priority: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Args)]
struct CompileArgs {
    input: PathBuf,
    #[command(flatten)]
    encoder: EncoderArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    input: PathBuf,
    #[command(flatten)]
    encoder: EncoderArgs,
    #[arg(long, default_value_t = 128)]
    horizon: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Source bits, one line of h bits per time step, instead of random ones.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Write the edge trace as CSV (time,edge,bit).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct DotArgs {
    input: PathBuf,
    /// Also draw every knot's line graph and its per-symbol pruned copies.
    #[arg(long)]
    knots: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

enum Failure {
    Input(String),
    Compile(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Compile(_) => 1,
            Failure::Input(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Compile(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<EncodeError> for Failure {
    fn from(e: EncodeError) -> Self {
        if e.is_resource_limit() {
            Failure::Resource(e.to_string())
        } else if matches!(e, EncodeError::Flow(_)) {
            Failure::Input(e.to_string())
        } else {
            Failure::Compile(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(a) => cmd_validate(&a.input),
        Command::Compile(a) => cmd_compile(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Flows(a) => cmd_flows(&a.input),
        Command::Dot(a) => cmd_dot(&a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err((out, f)) => {
            print!("{out}");
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

type Outcome = Result<String, (String, Failure)>;

fn fail<T>(f: Failure) -> Result<T, (String, Failure)> {
    Err((String::new(), f))
}

fn load(path: &Path) -> Result<FlowNetwork, (String, Failure)> {
    let text = std::fs::read_to_string(path)
        .or_else(|e| fail(Failure::Input(format!("{}: {e}", path.display()))))?;
    parse_network(&text).or_else(|e| fail(Failure::Input(format!("{}: {e}", path.display()))))
}

fn config(net: &FlowNetwork, a: &EncoderArgs) -> Result<EncoderConfig, (String, Failure)> {
    let mut priority = None;
    if !a.priority.is_empty() {
        let mut rank = vec![usize::MAX; net.edges().len()];
        for (i, name) in a.priority.iter().enumerate() {
            let Some(e) = net.edge_by_name(name) else {
                return fail(Failure::Input(format!("--priority: unknown edge {name}")));
            };
            rank[e] = i;
        }
        priority = Some(rank);
    }
    Ok(EncoderConfig {
        shortcut: !a.no_shortcut,
        exponent_cap: a.exponent_cap,
        limits: MasonLimits {
            cycle_cap: a.cycle_cap,
            path_cap: a.path_cap,
        },
        priority,
        ..Default::default()
    })
}

fn build(path: &Path, a: &EncoderArgs) -> Result<(FlowNetwork, NetworkCode), (String, Failure)> {
    let net = load(path)?;
    let config = config(&net, a)?;
    let code = compile(&net, &config).map_err(|e| (String::new(), e.into()))?;
    Ok((net, code))
}

fn cmd_validate(path: &Path) -> Outcome {
    let net = load(path)?;
    let s = validate(&net).or_else(|e| fail(Failure::Input(e.to_string())))?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} edges, {} sources, {} sinks, {} flows",
        net.edges().len(),
        net.sources().len(),
        net.sinks().len(),
        net.flows().len()
    );
    for e in 0..net.edges().len() {
        let preds: Vec<&str> = s.preds_of(e).iter().map(|&p| net.edge_name(p)).collect();
        let sinks: Vec<&str> = s.sinks_using(e).iter().map(|&t| net.sinks()[t].name.as_str()).collect();
        let _ = writeln!(
            out,
            "{}: P = {{{}}} T = {{{}}}",
            net.edge_name(e),
            preds.join(","),
            sinks.join(",")
        );
    }
    let knots = find_knots(&net, &s);
    if knots.is_empty() {
        out.push_str("no knots\n");
    }
    for k in &knots {
        let edges: Vec<&str> = k.edges.iter().map(|&e| net.edge_name(e)).collect();
        let preds: Vec<&str> = k.predecessors.iter().map(|&e| net.edge_name(e)).collect();
        let kind = match k.kind {
            KnotKind::SimpleCycle => "flow cycle",
            KnotKind::Knot => "knot",
        };
        let _ = writeln!(out, "{kind} {{{}}} P(C) = {{{}}}", edges.join(","), preds.join(","));
    }
    for w in s.warnings() {
        let _ = writeln!(out, "warning: {w}");
    }
    out.push_str("ok\n");
    Ok(out)
}

fn cmd_compile(a: &CompileArgs) -> Outcome {
    let (net, code) = build(&a.input, &a.encoder)?;
    Ok(match a.format {
        Format::Text => render_text(&net, &code),
        Format::Json => render_json(&net, &code),
        Format::Dot => network_dot(&net),
    })
}

fn cmd_simulate(a: &SimulateArgs) -> Outcome {
    let (net, code) = build(&a.input, &a.encoder)?;
    let schedule = match &a.schedule {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .or_else(|e| fail(Failure::Input(format!("{}: {e}", path.display()))))?;
            SourceSchedule::parse(&text, code.h, a.horizon)
                .or_else(|e| fail(Failure::Input(format!("{}: {e}", path.display()))))?
        }
        None => SourceSchedule::random(code.h, a.horizon, a.seed),
    };
    let v = match verify(&net, &code, &schedule) {
        Ok(v) => v,
        Err(e @ SimError::HorizonTooShort { .. }) => {
            return fail(Failure::Input(e.to_string()))
        }
        Err(e) => return fail(Failure::Compile(e.to_string())),
    };
    if let Some(path) = &a.trace {
        std::fs::write(path, v.structural.to_csv(&net))
            .or_else(|e| fail(Failure::Input(format!("{}: {e}", path.display()))))?;
    }
    let out = v.summary(&net);
    let bad = v.sinks.iter().filter(|s| s.realized_delay() != Some(s.delay)).count();
    if bad > 0 {
        return Err((out, Failure::Compile(format!("{bad} sinks failed to decode"))));
    }
    Ok(out)
}

fn cmd_flows(path: &Path) -> Outcome {
    let net = load(path)?;
    let with_flows = compute_flows(&net).or_else(|e| fail(Failure::Input(e.to_string())))?;
    Ok(with_flows.to_text())
}

fn cmd_dot(a: &DotArgs) -> Outcome {
    let net = load(&a.input)?;
    let s = validate(&net).or_else(|e| fail(Failure::Input(e.to_string())))?;
    let stem = a
        .input
        .file_stem()
        .map_or_else(|| "network".to_string(), |s| s.to_string_lossy().into_owned());
    let mut files = vec![(format!("{stem}.dot"), network_dot(&net))];
    let mut out = String::new();
    if a.knots {
        let knots = find_knots(&net, &s);
        if knots.is_empty() {
            out.push_str("no knots\n");
        }
        for (i, k) in knots.iter().enumerate() {
            let line = build_line_graph(k, &s);
            let title = format!("{stem}_knot{i}");
            files.push((format!("{title}.dot"), line_graph_dot(&line, &net, &title)));
            for &p in &k.predecessors {
                let pruned = prune_for_symbol(&line, k, &net, p)
                    .or_else(|e| fail(Failure::Compile(e.to_string())))?;
                let title = format!("{stem}_knot{i}_{}", net.edge_name(p));
                files.push((format!("{title}.dot"), line_graph_dot(&pruned, &net, &title)));
            }
        }
    }
    std::fs::create_dir_all(&a.out_dir)
        .or_else(|e| fail(Failure::Input(format!("{}: {e}", a.out_dir.display()))))?;
    for (name, body) in files {
        let path = a.out_dir.join(name);
        std::fs::write(&path, body)
            .or_else(|e| fail(Failure::Input(format!("{}: {e}", path.display()))))?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(out)
}
