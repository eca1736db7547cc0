//! `litmap`: build, screen and analyze a literature corpus from a config file.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use litmap_core::pipeline::{read_manifest, Manifest, Pipeline, PipelineConfig, PipelineError, SourceConfig};
use litmap_core::screening::Pass;
use litmap_server::AppState;

#[derive(Parser)]
#[command(name = "litmap", version, about = "Citation-corpus harvesting, screening and analytics")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// pipeline config (TOML)
    #[arg(long, global = true, default_value = "litmap.toml")]
    config: PathBuf,
    /// continue from the last checkpoint
    #[arg(long, global = true)]
    resume: bool,
    /// output directory, overriding the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `replay:PATH` or `live`, overriding the config
    #[arg(long, global = true)]
    source: Option<String>,
    /// listen address for `screen-serve`
    #[arg(long, global = true, default_value = "127.0.0.1:8080")]
    serve_addr: String,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scoping queries
    Harvest,
    /// Serve the screening API over the harvested corpus
    ScreenServe,
    /// Apply recorded decisions, finalize seeds and collect citers
    Snowball,
    /// Write reports and the manifest from the corpus snapshot
    Analyze,
    /// Print the summary of the last analysis
    Report,
    /// All stages
    Run,
}

fn parse_source(raw: &str) -> Result<SourceConfig, PipelineError> {
    if let Some(path) = raw.strip_prefix("replay:") {
        if path.is_empty() {
            return Err(PipelineError::Config("--source replay: needs a path".into()));
        }
        return Ok(SourceConfig::Replay { path: path.into() });
    }
    if raw == "live" {
        return PipelineConfig::from_toml("[source]\nkind = \"live\"\n[output]\ndir = \".\"").map(|c| c.source);
    }
    Err(PipelineError::Config(format!("--source must be replay:PATH or live, got {raw:?}")))
}

fn load(g: &Global) -> Result<Pipeline, PipelineError> {
    let mut cfg = PipelineConfig::load(&g.config)?;
    if let Some(out) = &g.out {
        cfg.output.dir = out.clone();
    }
    if let Some(s) = &g.source {
        cfg.source = parse_source(s)?;
    }
    Pipeline::new(cfg)
}

fn print_manifest(m: &Manifest) {
    let f = &m.flow;
    println!("scoping {}  pruned {}  eligible {}", f.scoping, f.pruned, f.eligible);
    println!("notable {}  seeds {}  citation corpus {}", f.notable_added, f.seeds, f.citation_corpus);
    for pass in Pass::ALL {
        if let Some(t) = f.passes.get(&pass) {
            let g = t.groups;
            println!(
                "{:<9} groups 0..4 = {} {} {} {} {}  pending {}  conflicts {}",
                pass.as_str(),
                g[0],
                g[1],
                g[2],
                g[3],
                g[4],
                t.pending,
                t.conflicts
            );
        }
    }
    let q = &m.summary.queries;
    println!(
        "memberships {}  unique docs {}  max overlap {} ({} docs)",
        q.total_memberships, q.unique_docs, q.max_overlap, q.docs_at_max
    );
    println!("non-English share {:.3}", m.summary.non_english_share);
    for b in &m.summary.budgets {
        println!("reading {:>7} docs: {:.2} weeks, {:.2} years", b.n_docs, b.weeks, b.years);
    }
    println!("snapshot {} sha256 {}", m.snapshot.path, m.snapshot.sha256);
    println!("{} reports", m.reports.len());
}

fn serve(p: &Pipeline, addr: &str) -> Result<(), PipelineError> {
    let addr: SocketAddr = addr.parse().map_err(|e| PipelineError::Config(format!("--serve-addr {addr:?}: {e}")))?;
    let (mut store, mut state) = p.open(true)?;
    p.harvest(&mut store, &mut state)?;
    let saved = state.clone();
    let writer = Arc::new(p.clone());
    let app = AppState::new(store, p.engine())
        .with_persist(Arc::new(move |s| writer.persist(s, &saved).map_err(|e| e.to_string())));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(litmap_server::serve(addr, Arc::new(app)))?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), PipelineError> {
    let p = load(&cli.global)?;
    match cli.command {
        Command::Harvest => {
            let (mut store, mut state) = p.open(cli.global.resume)?;
            p.harvest(&mut store, &mut state)?;
            println!("{} documents, {} memberships", store.len(), store.membership_count());
        }
        Command::ScreenServe => serve(&p, &cli.global.serve_addr)?,
        Command::Snowball => {
            let (mut store, mut state) = p.open(true)?;
            p.screen(&mut store, &mut state)?;
            let r = p.snowball(&mut store, &mut state)?;
            for l in &r.layers {
                println!("layer {}: {} documents", l.layer, l.documents);
            }
        }
        Command::Analyze => print_manifest(&p.analyze()?),
        Command::Report => print_manifest(&read_manifest(p.out_dir())?),
        Command::Run => print_manifest(&p.run(cli.global.resume)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("litmap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
