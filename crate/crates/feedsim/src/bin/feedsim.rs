//! Command-line front end for the simulator.
//!
//! Subcommands cover the whole pipeline: survey rows to personas, the
//! follow graph, simulation runs, outcome analysis and a plain-text
//! timeline view. Progress goes to standard error; machine-readable
//! output goes to files named by flags or the run manifest.
//!
//! Exit codes: 0 success, 1 usage or inconsistent arguments, 2 file
//! errors, 3 backend failures, 4 integrity violations (hash or chain
//! mismatches).

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use feedsim::config::{ConfigError, PartialConfig, PartialMockParams, StopRule};
use feedsim::engine::{
    self, read_log_file, replay, run_simulation, ActionLog, EngineError, LogError, LogHeader,
};
use feedsim::feed::{ContentState, Platform};
use feedsim::generation::{
    GenerationBackend, MockBackend, MockParams, OpenAiBackend, RemoteOptions,
};
use feedsim::graph::{generate_follow_graph, read_edges_file, GraphError};
use feedsim::manifest::{
    file_entry, load_verified, sha256_file, write_manifest_file, ManifestError, RunManifest,
};
use feedsim::metrics::{
    build_report, text_table, timeline_excerpt, write_report_file, LexiconScorer,
    PerspectiveOptions, PerspectiveScorer, ToxicityScorer,
};
use feedsim::persona::{
    enrich_persona, load_survey_file, read_personas_file, render_persona, write_personas_file,
    Party, RenderOptions,
};
use feedsim::seed::derive_seed;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "feedsim",
    version,
    about = "Agent-based simulator of feed ranking on a text social platform"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render survey rows into persona files, optionally enriched by a
    /// generation backend.
    GenPersonas(GenPersonasArgs),
    /// Generate the partisan-homophilous follow graph.
    GenGraph(GenGraphArgs),
    /// Run a simulation, writing an action log and a run manifest.
    Simulate(SimulateArgs),
    /// Verify a run's artifacts and compute its outcome report.
    Analyze(AnalyzeArgs),
    /// Print the top threads of a finished run as plain text.
    RenderTimeline(RenderTimelineArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    /// Deterministic offline policy.
    Mock,
    /// OpenAI-compatible chat endpoint (OPENAI_API_KEY, OPENAI_BASE_URL,
    /// OPENAI_MODEL).
    Remote,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScorerKind {
    /// Offline word-list scorer.
    Lexicon,
    /// Perspective-style toxicity endpoint (PERSPECTIVE_API_KEY,
    /// PERSPECTIVE_URL).
    Remote,
}

#[derive(Args)]
struct GenPersonasArgs {
    /// Survey TSV to render.
    #[arg(long)]
    survey: PathBuf,
    /// Output personas file (JSON Lines).
    #[arg(long)]
    out: PathBuf,
    /// Root seed for enrichment requests.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip backend enrichment; personas carry survey sentences only.
    #[arg(long)]
    no_enrich: bool,
    #[arg(long, value_enum, default_value_t = BackendKind::Mock)]
    backend: BackendKind,
    /// |partisanship| above which an agent gets a major-party label.
    #[arg(long, default_value_t = 0.1)]
    party_threshold: f64,
}

#[derive(Args)]
struct GenGraphArgs {
    /// Personas file providing partisanship scores.
    #[arg(long)]
    personas: PathBuf,
    /// Output edge-list file.
    #[arg(long)]
    out: PathBuf,
    /// Homophily exponent; higher flattens partisan distance weights.
    #[arg(long)]
    homophily: f64,
    #[arg(long, default_value_t = 30)]
    out_degree: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    personas: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// News stories TSV offered to posting agents.
    #[arg(long)]
    stories: PathBuf,
    /// Run directory; inputs are copied in so the run is self-contained.
    #[arg(long)]
    out_dir: PathBuf,
    /// Optional TOML config; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// follow, global or bridging.
    #[arg(long)]
    platform: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = BackendKind::Mock)]
    backend: BackendKind,
    /// Posts shown per timeline view.
    #[arg(long)]
    timeline_k: Option<usize>,
    /// Fraction of agents that must like and comment before the run stops.
    #[arg(long)]
    stop_fraction: Option<f64>,
    /// Fraction of agents that write a first post.
    #[arg(long)]
    posting_fraction: Option<f64>,
    /// both: stop counts agents with a like and a comment; either: or.
    #[arg(long)]
    stop_rule: Option<String>,
    #[arg(long)]
    max_turns: Option<u64>,
    /// Mock backend: probability of liking a same-party post.
    #[arg(long)]
    p_agree: Option<f64>,
    /// Mock backend: probability of liking a cross-party post.
    #[arg(long)]
    p_cross: Option<f64>,
    /// Mock backend: share of comments that pick a fight.
    #[arg(long)]
    q_conflict: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Run manifest written by simulate.
    #[arg(long)]
    manifest: PathBuf,
    /// Report destination; defaults to the manifest's report path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScorerKind::Lexicon)]
    scorer: ScorerKind,
}

#[derive(Args)]
struct RenderTimelineArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// How many threads to show.
    #[arg(long, default_value_t = 5)]
    top: usize,
    /// Write to a file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Backend(String),
    Integrity(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Backend(_) => 3,
            CliError::Integrity(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Backend(m) | CliError::Integrity(m) => m,
        }
    }
}

fn io_err(context: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{context}: {err}"))
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        match err {
            ConfigError::Io(e) => CliError::Io(format!("config file: {e}")),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<ManifestError> for CliError {
    fn from(err: ManifestError) -> Self {
        match err {
            ManifestError::Io(e) => CliError::Io(e.to_string()),
            ManifestError::FileUnreadable { .. } => CliError::Io(err.to_string()),
            other => CliError::Integrity(other.to_string()),
        }
    }
}

impl From<LogError> for CliError {
    fn from(err: LogError) -> Self {
        match err {
            LogError::Io(e) => CliError::Io(format!("action log: {e}")),
            other => CliError::Integrity(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenPersonas(args) => gen_personas(args),
        Command::GenGraph(args) => gen_graph(args),
        Command::Simulate(args) => simulate(args),
        Command::Analyze(args) => analyze(args),
        Command::RenderTimeline(args) => render_timeline(args),
    }
}

fn make_backend(kind: BackendKind, mock: MockParams, remote: RemoteOptions) -> Box<dyn GenerationBackend> {
    match kind {
        BackendKind::Mock => Box::new(MockBackend::new(mock)),
        BackendKind::Remote => Box::new(OpenAiBackend::new(remote)),
    }
}

fn remote_options_from(partial: Option<RemoteOptions>) -> RemoteOptions {
    let mut opts = partial.unwrap_or_default();
    if let Ok(url) = std::env::var("OPENAI_BASE_URL") {
        if !url.is_empty() {
            opts.base_url = url;
        }
    }
    if let Ok(model) = std::env::var("OPENAI_MODEL") {
        if !model.is_empty() {
            opts.model = model;
        }
    }
    opts
}

fn gen_personas(args: GenPersonasArgs) -> Result<(), CliError> {
    let rows = load_survey_file(&args.survey)
        .map_err(|e| io_err(&format!("survey {}", args.survey.display()), e))?;
    let opts = RenderOptions { party_threshold: args.party_threshold, ..Default::default() };
    let backend = make_backend(args.backend, MockParams::default(), remote_options_from(None));
    let mut personas = Vec::with_capacity(rows.len());
    for row in &rows {
        let persona = render_persona(row, &opts);
        let persona = if args.no_enrich {
            persona
        } else {
            enrich_persona(&persona, backend.as_ref(), derive_seed(args.seed, &format!("enrich-{}", persona.id)))
        };
        personas.push(persona);
    }
    write_personas_file(&args.out, &personas)
        .map_err(|e| io_err(&format!("writing {}", args.out.display()), e))?;
    let enriched = personas.iter().filter(|p| p.enriched).count();
    eprintln!(
        "wrote {} personas to {} ({enriched} enriched)",
        personas.len(),
        args.out.display()
    );
    Ok(())
}

fn gen_graph(args: GenGraphArgs) -> Result<(), CliError> {
    let personas = read_personas_file(&args.personas)
        .map_err(|e| io_err(&format!("personas {}", args.personas.display()), e))?;
    let partisanship: Vec<f64> = personas.iter().map(|p| p.partisanship).collect();
    let graph = generate_follow_graph(&partisanship, args.out_degree, args.homophily, args.seed)
        .map_err(|e| match e {
            GraphError::Io(io) => io_err("writing graph", io),
            other => CliError::Usage(other.to_string()),
        })?;
    feedsim::graph::write_edges_file(&args.out, &graph)
        .map_err(|e| io_err(&format!("writing {}", args.out.display()), e))?;
    eprintln!(
        "wrote follow graph ({} agents, out-degree {}, homophily {}) to {}",
        graph.n,
        graph.out_degree,
        graph.homophily,
        args.out.display()
    );
    Ok(())
}

/// Copy an input into the run directory so the manifest can reference
/// it by a relative path. A no-op if the source already is the staged
/// file.
fn stage_input(src: &Path, out_dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    let dst = out_dir.join(name);
    let already_there = match (src.canonicalize(), dst.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if !already_there {
        std::fs::copy(src, &dst).map_err(|e| io_err(&format!("staging {}", src.display()), e))?;
    }
    Ok(dst)
}

fn parse_platform(s: &str) -> Result<Platform, CliError> {
    s.parse::<Platform>().map_err(CliError::Usage)
}

fn parse_stop_rule(s: &str) -> Result<StopRule, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "both" => Ok(StopRule::Both),
        "either" => Ok(StopRule::Either),
        _ => Err(CliError::Usage(format!("unknown stop rule {s:?} (expected both or either)"))),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| io_err(&format!("creating {}", args.out_dir.display()), e))?;

    let personas_path = stage_input(&args.personas, &args.out_dir, "personas.jsonl")?;
    let graph_path = stage_input(&args.graph, &args.out_dir, "follow_graph.edges")?;
    let stories_path = stage_input(&args.stories, &args.out_dir, "stories.tsv")?;

    let personas = read_personas_file(&personas_path)
        .map_err(|e| io_err(&format!("personas {}", args.personas.display()), e))?;
    let graph = read_edges_file(&graph_path).map_err(|e| match e {
        GraphError::Io(io) => io_err(&format!("graph {}", args.graph.display()), io),
        other => CliError::Io(format!("graph {}: {other}", args.graph.display())),
    })?;
    let stories = feedsim::generation::load_stories_file(&stories_path)
        .map_err(|e| CliError::Io(format!("stories {}: {e}", args.stories.display())))?;

    let mut flags = PartialConfig {
        seed: args.seed,
        timeline_k: args.timeline_k,
        stop_fraction: args.stop_fraction,
        posting_fraction: args.posting_fraction,
        max_turns: args.max_turns,
        ..Default::default()
    };
    if let Some(p) = &args.platform {
        flags.platform = Some(parse_platform(p)?);
    }
    if let Some(r) = &args.stop_rule {
        flags.stop_rule = Some(parse_stop_rule(r)?);
    }
    if args.p_agree.is_some() || args.p_cross.is_some() || args.q_conflict.is_some() {
        flags.mock = Some(PartialMockParams {
            p_agree: args.p_agree,
            p_cross: args.p_cross,
            q_conflict: args.q_conflict,
        });
    }
    let file = match &args.config {
        Some(path) => PartialConfig::from_toml_file(path)?,
        None => PartialConfig::default(),
    };
    let mut partial = flags.or(file);
    let remote_opts = remote_options_from(partial.remote.take());

    // Structural values come from the inputs themselves; explicit
    // conflicting settings are refused rather than silently ignored.
    let derived = [
        ("n_agents", &mut partial.n_agents as &mut Option<usize>, personas.len()),
        ("out_degree", &mut partial.out_degree, graph.out_degree),
    ];
    for (name, slot, actual) in derived {
        match slot {
            Some(v) if *v != actual => {
                return Err(CliError::Usage(format!(
                    "config sets {name} = {v} but the input files give {actual}"
                )));
            }
            _ => *slot = Some(actual),
        }
    }
    match partial.homophily {
        Some(h) if h != graph.homophily => {
            return Err(CliError::Usage(format!(
                "config sets homophily = {h} but the graph was generated with {}",
                graph.homophily
            )));
        }
        _ => partial.homophily = Some(graph.homophily),
    }

    let config = partial.build()?;
    let backend = make_backend(args.backend, config.mock.clone(), remote_opts);

    let mut input_sha = std::collections::BTreeMap::new();
    for (role, path) in
        [("personas", &personas_path), ("graph", &graph_path), ("stories", &stories_path)]
    {
        input_sha.insert(
            role.to_string(),
            sha256_file(path).map_err(|e| io_err(&format!("hashing {}", path.display()), e))?,
        );
    }
    let header = LogHeader::new(&config, backend.name(), input_sha);
    let log_path = args.out_dir.join("actions.jsonl");

    eprintln!(
        "simulating {} agents on {} (seed {}, backend {})",
        config.n_agents,
        config.platform,
        config.seed,
        backend.name()
    );
    let result = run_simulation(&config, &personas, &graph, &stories, backend.as_ref());
    let (output, failure) = match result {
        Ok(output) => (output, None),
        Err(EngineError::FailureBudget { failed, turns, output }) => {
            (*output, Some((failed, turns)))
        }
        Err(EngineError::Config(e)) => return Err(e.into()),
        Err(EngineError::Input(msg)) => return Err(CliError::Usage(msg)),
    };

    let state_hash = output.content.state_hash();
    let log_file = std::fs::File::create(&log_path)
        .map_err(|e| io_err(&format!("creating {}", log_path.display()), e))?;
    engine::write_log(
        std::io::BufWriter::new(log_file),
        &header,
        &output.records,
        output.turns,
        &state_hash,
        output.backend_calls,
    )
    .map_err(|e| io_err(&format!("writing {}", log_path.display()), e))?;

    if let Some((failed, turns)) = failure {
        eprintln!("partial log written to {}", log_path.display());
        return Err(CliError::Backend(format!(
            "backend failure budget exceeded: {failed} of {turns} turns failed"
        )));
    }

    let manifest = RunManifest {
        format_version: feedsim::manifest::MANIFEST_FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        backend: backend.name().to_string(),
        config: config.clone(),
        personas: file_entry(&args.out_dir, &personas_path)
            .map_err(|e| io_err("hashing personas", e))?,
        graph: file_entry(&args.out_dir, &graph_path).map_err(|e| io_err("hashing graph", e))?,
        stories: file_entry(&args.out_dir, &stories_path)
            .map_err(|e| io_err("hashing stories", e))?,
        log: file_entry(&args.out_dir, &log_path).map_err(|e| io_err("hashing log", e))?,
        report_path: "report.json".to_string(),
        final_state_sha256: state_hash,
        turns: output.turns,
        records: output.records.len() as u64,
        backend_calls: output.backend_calls,
    };
    let manifest_path = args.out_dir.join("manifest.json");
    write_manifest_file(&manifest_path, &manifest)?;

    eprintln!(
        "done: {} turns, {} posts, {} comments, {} likes ({:?}); \
         {} satisfied agents, {} empty views, {} failed turns",
        output.turns,
        output.content.posts().len(),
        output.content.comments().len(),
        output.content.likes().len(),
        output.stop,
        output.satisfied_agents,
        output.empty_timeline_turns,
        output.failed_turns,
    );
    eprintln!("log: {}", log_path.display());
    eprintln!("manifest: {}", manifest_path.display());
    Ok(())
}

/// Load a manifest, verify artifact digests, check the log chain and
/// replay it back into the final content state.
fn load_run(manifest_path: &Path) -> Result<(RunManifest, PathBuf, ActionLog, ContentState, Vec<Party>), CliError> {
    let (manifest, base) = load_verified(manifest_path)?;
    let log = read_log_file(&manifest.resolve(&base, &manifest.log))?;
    if log.footer.state_sha256 != manifest.final_state_sha256 {
        return Err(CliError::Integrity(
            "log footer state hash does not match the manifest".to_string(),
        ));
    }
    let content = replay(&log)?;
    let personas = read_personas_file(&manifest.resolve(&base, &manifest.personas))
        .map_err(|e| io_err("personas", e))?;
    if personas.len() != manifest.config.n_agents {
        return Err(CliError::Integrity(format!(
            "manifest config says {} agents but the personas file has {}",
            manifest.config.n_agents,
            personas.len()
        )));
    }
    let party_of: Vec<Party> = personas.iter().map(|p| p.party).collect();
    Ok((manifest, base, log, content, party_of))
}

fn analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let (manifest, base, log, content, party_of) = load_run(&args.manifest)?;
    let scorer: Box<dyn ToxicityScorer> = match args.scorer {
        ScorerKind::Lexicon => Box::new(LexiconScorer),
        ScorerKind::Remote => {
            let mut opts = PerspectiveOptions::default();
            if let Ok(url) = std::env::var("PERSPECTIVE_URL") {
                if !url.is_empty() {
                    opts.url = url;
                }
            }
            Box::new(PerspectiveScorer::new(opts).map_err(|e| CliError::Backend(e.to_string()))?)
        }
    };
    eprintln!(
        "analyzing {} posts, {} comments, {} likes from {} records",
        content.posts().len(),
        content.comments().len(),
        content.likes().len(),
        log.footer.records
    );
    let report = build_report(
        &content,
        &party_of,
        manifest.config.platform,
        manifest.config.seed,
        scorer.as_ref(),
    );
    let out = args.out.unwrap_or_else(|| base.join(&manifest.report_path));
    write_report_file(&out, &report).map_err(|e| io_err(&format!("writing {}", out.display()), e))?;
    print!("{}", text_table(std::slice::from_ref(&report)));
    eprintln!("report: {}", out.display());
    Ok(())
}

fn render_timeline(args: RenderTimelineArgs) -> Result<(), CliError> {
    let (_, _, _, content, party_of) = load_run(&args.manifest)?;
    let text = timeline_excerpt(&content, &party_of, args.top);
    match args.out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| io_err(&format!("writing {}", path.display()), e))?,
        None => print!("{text}"),
    }
    Ok(())
}
