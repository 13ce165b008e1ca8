//! Command-line driver: sweeps, preference elicitation, consensus artifacts,
//! KeNN training and analysis, SVG export and the session service.
//!
//! Exit codes: 0 success, 1 domain or data error, 2 usage error.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use coos_core::consensus::{positionality_choice, ConsensusGeometry, SocialChoiceResult};
use coos_core::intent::{diagnose, IntentGroup};
use coos_core::kenn::{self, FeatureSchema, KennModel, TrainParams};
use coos_core::pclm::{
    read_response_log, select_question, write_response_log, ComparisonResponse, LoggedResponse, ParticipantId,
    PreferenceModel, PreferenceSummary, ScenarioCloud, SimulatedResponder, Winner,
};
use coos_core::service::{Hub, HubConfig, ScenarioSet};
use coos_core::sim::{normalize_set, read_scenarios, sweep, write_scenarios, Scenario, SweepConfig};
use coos_core::ternary::{Axis, BoundKind, CoordinateBound};
use coos_core::{board, CoosError, Result, TernaryPoint};

#[derive(Parser)]
#[command(name = "coos", version, about = "Consensus and cooperation analytics over a three-value simplex")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write scenarios as JSON Lines.
    Simulate(SimulateArgs),
    /// Re-normalize a scenario file onto the simplex.
    Normalize(NormalizeArgs),
    /// Paired-comparison questioning in the terminal (or by a simulated responder).
    Ask(AskArgs),
    /// Estimate preference points from response logs.
    Estimate(EstimateArgs),
    /// Cluster preference points into intent groups.
    Intent(IntentArgs),
    /// Consensus geometry (JSON) and board (SVG) for a set of preference points.
    Consensus(ConsensusArgs),
    /// Positionality-weighted choice between the majority and minority group.
    Choose(ChooseArgs),
    /// Train a cooperation model on a corpus.
    KennTrain(KennTrainArgs),
    /// Predict cooperation rates and determinant scores.
    KennPredict(KennPredictArgs),
    /// Rank interventions by their mean effect on the predicted rate.
    KennInterventions(KennInterventionsArgs),
    /// Generate a synthetic corpus from a random generator model.
    KennSynth(KennSynthArgs),
    /// Start the HTTP session service.
    Serve(ServeArgs),
    /// Render a scenario cloud or a consensus geometry file as SVG.
    ExportTernary(ExportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Sweep configuration (JSON); the built-in 20,000-scenario sweep if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Write raw indices only, without normalization.
    #[arg(long)]
    raw: bool,
}

#[derive(Args)]
struct NormalizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AskArgs {
    #[arg(long)]
    scenarios: PathBuf,
    #[arg(long)]
    participant: u64,
    /// Response log; existing entries are kept and this participant's resumed.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = coos_core::pclm::MAX_QUESTIONS)]
    max_questions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Answer with a simulated responder holding these weights (a,b,c).
    #[arg(long, value_parser = parse_point)]
    simulate: Option<TernaryPoint>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    scenarios: PathBuf,
    /// One or more response logs.
    #[arg(long, required = true, num_args = 1..)]
    responses: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntentArgs {
    /// Points file written by `estimate`.
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ConsensusArgs {
    #[arg(long)]
    points: PathBuf,
    /// Geometry JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG board output.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Candidate-region bound, e.g. `A:min:0.3` (repeatable).
    #[arg(long = "constraint", value_parser = parse_bound)]
    constraints: Vec<CoordinateBound>,
    /// Unweighted centroid of group points for the reference point.
    #[arg(long)]
    unweighted: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ChooseArgs {
    /// Groups file written by `intent` (or a consensus output).
    #[arg(long)]
    groups: PathBuf,
    #[arg(long)]
    scenarios: PathBuf,
    #[arg(long, default_value_t = 3)]
    dims_total: u32,
    #[arg(long, default_value_t = 3)]
    dims_respected: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KennTrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Model JSON output.
    #[arg(long)]
    out: PathBuf,
    /// Training report JSON output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Feature schema JSON; the built-in schema if omitted.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Hyperparameters JSON; fields not given keep their defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct KennPredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KennInterventionsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// JSON object mapping actionable feature names to intervention levels.
    #[arg(long)]
    interventions: PathBuf,
    /// Ranking JSON output; the plain-text table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KennSynthArgs {
    #[arg(long, default_value_t = 700)]
    n: usize,
    #[arg(long, default_value_t = 0.02)]
    noise_sd: f64,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Corpus JSON Lines output.
    #[arg(long)]
    out: PathBuf,
    /// Hidden generator model output.
    #[arg(long)]
    generator_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Scenario set as `name=path` (repeatable).
    #[arg(long = "scenarios", value_parser = parse_named_path, required = true)]
    scenario_sets: Vec<(String, PathBuf)>,
    /// Directory for append-only session logs.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Service configuration JSON (rule thresholds, question budget).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ExportSource {
    /// Scenario file: render the scenario cloud.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Consensus output file: render the consensus board.
    #[arg(long)]
    geometry: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    source: ExportSource,
    #[arg(long)]
    out: PathBuf,
}

/// Preference points keyed by participant, plus the estimates they came from.
#[derive(Debug, Serialize, Deserialize)]
struct PointsFile {
    participants: BTreeMap<ParticipantId, TernaryPoint>,
    #[serde(default)]
    summaries: Vec<PreferenceSummary>,
}

/// Output of `consensus`, read back by `choose` and `export-ternary`.
#[derive(Debug, Serialize, Deserialize)]
struct ConsensusFile {
    groups: Vec<IntentGroup>,
    geometry: ConsensusGeometry,
    impasse: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GroupsInput {
    Groups(Vec<IntentGroup>),
    Consensus(ConsensusFile),
}

#[derive(Serialize)]
struct Prediction {
    rate: f64,
    scores: kenn::DeterminantScores,
}

fn parse_point(s: &str) -> std::result::Result<TernaryPoint, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    match parts.as_slice() {
        [a, b, c] => TernaryPoint::new(*a, *b, *c).map_err(|e| e.to_string()),
        _ => Err("expected three comma-separated values a,b,c".into()),
    }
}

fn parse_bound(s: &str) -> std::result::Result<CoordinateBound, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [axis, kind, value] = parts.as_slice() else {
        return Err("expected AXIS:min|max:VALUE".into());
    };
    let axis: Axis = axis.parse().map_err(|e: CoosError| e.to_string())?;
    let kind = match *kind {
        "min" => BoundKind::Min,
        "max" => BoundKind::Max,
        other => return Err(format!("unknown bound kind {other:?}")),
    };
    let value: f64 = value.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    CoordinateBound::new(axis, kind, value).map_err(|e| e.to_string())
}

fn parse_named_path(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err("expected NAME=PATH".into()),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoosError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline, to a file or stdout.
fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit_text(&text, out)
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_schema(path: Option<&Path>) -> Result<FeatureSchema> {
    let schema = match path {
        Some(p) => read_json(p)?,
        None => FeatureSchema::default(),
    };
    schema.validate()?;
    Ok(schema)
}

fn question_seed(seed: u64, participant: ParticipantId, answered: usize) -> u64 {
    seed ^ participant.0.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (answered as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let config = match &args.config {
        Some(p) => read_json(p)?,
        None => SweepConfig::default(),
    };
    let mut scenarios = sweep(&config)?;
    if !args.raw {
        scenarios = normalize_set(&scenarios)?;
    }
    write_scenarios(&args.out, &scenarios)?;
    eprintln!("wrote {} scenarios to {}", scenarios.len(), args.out.display());
    Ok(())
}

fn normalize(args: NormalizeArgs) -> Result<()> {
    let scenarios = normalize_set(&read_scenarios(&args.input)?)?;
    write_scenarios(&args.out, &scenarios)
}

fn describe(s: &Scenario, label: &str) -> String {
    format!(
        "  [{label}] scenario {}: circulation {:.1}%, renewables {:.1}%, cost {:.0}/household/yr",
        s.id,
        100.0 * s.raw.social,
        100.0 * s.raw.environmental,
        s.raw.economic_cost
    )
}

fn ask(args: AskArgs) -> Result<()> {
    let scenarios = read_scenarios(&args.scenarios)?;
    let by_id: BTreeMap<u64, &Scenario> = scenarios.iter().map(|s| (s.id, s)).collect();
    let cloud = ScenarioCloud::from_scenarios(&scenarios)?;
    let pid = ParticipantId(args.participant);
    let mut log = if args.out.exists() {
        read_response_log(&args.out)?
    } else {
        Vec::new()
    };
    let mine: Vec<ComparisonResponse> = log
        .iter()
        .filter(|r| r.participant_id == pid)
        .map(|r| r.response)
        .collect();
    let mut model = PreferenceModel::replay(pid, &mine, &cloud)?;
    let mut asked: BTreeSet<(u64, u64)> = mine.iter().map(|r| r.pair()).collect();
    let mut next_qid = log.iter().map(|r| r.response.question_id + 1).max().unwrap_or(0);
    let mut responder = args.simulate.map(|w| SimulatedResponder::new(w, args.seed));
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();

    while model.responses().len() < args.max_questions && !model.estimate().converged {
        let seed = question_seed(args.seed, pid, model.responses().len());
        let Some((a, b)) = select_question(&model, &cloud, &asked, seed)? else {
            break;
        };
        let (winner, timestamp) = match &mut responder {
            Some(r) => (r.answer(cloud.get(a)?, cloud.get(b)?), 0),
            None => {
                println!("Question {} — which scenario do you prefer?", model.responses().len() + 1);
                println!("{}", describe(by_id[&a], "a"));
                println!("{}", describe(by_id[&b], "b"));
                let winner = loop {
                    print!("answer (a/b, q to stop): ");
                    std::io::stdout().flush()?;
                    match lines.next().transpose()?.as_deref().map(str::trim) {
                        Some("a") | Some("A") => break Some(Winner::A),
                        Some("b") | Some("B") => break Some(Winner::B),
                        Some("q") | None => break None,
                        Some(_) => println!("please type a or b"),
                    }
                };
                let Some(winner) = winner else { break };
                let now = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_millis() as u64)
                    .unwrap_or(0);
                (winner, now)
            }
        };
        let response = ComparisonResponse {
            question_id: next_qid,
            scenario_a_id: a,
            scenario_b_id: b,
            winner,
            timestamp,
        };
        next_qid += 1;
        model.apply(&response, &cloud)?;
        asked.insert(response.pair());
        log.push(LoggedResponse {
            participant_id: pid,
            response,
        });
        // keep the log current so an interrupted session can resume
        write_response_log(&args.out, &log)?;
    }
    write_response_log(&args.out, &log)?;
    let est = model.estimate();
    eprintln!(
        "participant {pid}: {} responses, estimate {}, credible diameter {:.3}{}",
        model.responses().len(),
        est.map_estimate,
        est.credible_region_diameter,
        if est.converged { " (converged)" } else { "" }
    );
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let scenarios = read_scenarios(&args.scenarios)?;
    let cloud = ScenarioCloud::from_scenarios(&scenarios)?;
    let mut by_participant: BTreeMap<ParticipantId, Vec<ComparisonResponse>> = BTreeMap::new();
    for path in &args.responses {
        for r in read_response_log(path)? {
            by_participant.entry(r.participant_id).or_default().push(r.response);
        }
    }
    let mut out = PointsFile {
        participants: BTreeMap::new(),
        summaries: Vec::new(),
    };
    for (pid, responses) in by_participant {
        let model = PreferenceModel::replay(pid, &responses, &cloud)?;
        let summary = model.summary();
        out.participants.insert(pid, summary.map_estimate);
        out.summaries.push(summary);
    }
    emit_json(&out, args.out.as_deref())
}

fn intent(args: IntentArgs) -> Result<()> {
    let points: PointsFile = read_json(&args.points)?;
    let groups = diagnose(&points.participants, args.seed)?;
    emit_json(&groups, args.out.as_deref())
}

fn consensus(args: ConsensusArgs) -> Result<()> {
    let points: PointsFile = read_json(&args.points)?;
    let groups = diagnose(&points.participants, args.seed)?;
    let mut geometry = ConsensusGeometry::build(&groups, !args.unweighted)?;
    for bound in &args.constraints {
        geometry = geometry.narrow(*bound)?;
    }
    if let Some(svg) = &args.svg {
        std::fs::write(svg, board::consensus(&groups, &geometry, None))?;
    }
    let out = ConsensusFile {
        impasse: geometry.is_impasse(),
        groups,
        geometry,
    };
    emit_json(&out, args.out.as_deref())
}

fn choose(args: ChooseArgs) -> Result<()> {
    let groups = match read_json::<GroupsInput>(&args.groups)? {
        GroupsInput::Groups(g) => g,
        GroupsInput::Consensus(c) => c.groups,
    };
    let [majority, minority, ..] = groups.as_slice() else {
        return Err(CoosError::domain("a positionality choice needs at least two groups"));
    };
    let scenarios = read_scenarios(&args.scenarios)?;
    let cloud = ScenarioCloud::from_scenarios(&scenarios)?;
    let points = scenarios
        .iter()
        .map(|s| Ok((s.id, s.point.map_or_else(|| cloud.point(s.id), Ok)?)))
        .collect::<Result<Vec<_>>>()?;
    let result: SocialChoiceResult =
        positionality_choice(majority, minority, args.dims_total, args.dims_respected, &points)?;
    emit_json(&result, args.out.as_deref())
}

fn kenn_train(args: KennTrainArgs) -> Result<()> {
    let schema = load_schema(args.schema.as_deref())?;
    let mut params: TrainParams = match &args.params {
        Some(p) => read_json(p)?,
        None => TrainParams::default(),
    };
    if let Some(n) = args.iterations {
        params.iterations = n;
    }
    let corpus = kenn::read_corpus_file(&args.corpus)?;
    let (model, report) = kenn::train(&corpus, &schema, &params, args.seed)?;
    let mut text = model.to_json()?;
    text.push('\n');
    std::fs::write(&args.out, text)?;
    if let Some(path) = &args.report {
        emit_json(&report, Some(path))?;
    }
    eprintln!(
        "trained on {} records: train R {:.3}, held-out R {}, final loss {:.6}",
        report.train_size,
        report.train_r,
        report.holdout_r.map_or("n/a".to_string(), |r| format!("{r:.3}")),
        report.final_loss
    );
    Ok(())
}

fn kenn_predict(args: KennPredictArgs) -> Result<()> {
    let model = KennModel::from_json(&std::fs::read_to_string(&args.model)?)?;
    let corpus = kenn::read_corpus_file(&args.corpus)?;
    let predictions = corpus
        .iter()
        .map(|r| model.predict(r).map(|(rate, scores)| Prediction { rate, scores }))
        .collect::<Result<Vec<_>>>()?;
    emit_json(&predictions, args.out.as_deref())
}

fn kenn_interventions(args: KennInterventionsArgs) -> Result<()> {
    let model = KennModel::from_json(&std::fs::read_to_string(&args.model)?)?;
    let corpus = kenn::read_corpus_file(&args.corpus)?;
    let interventions: BTreeMap<String, f64> = read_json(&args.interventions)?;
    let ranked = kenn::rank_interventions(&model, &corpus, &interventions)?;
    if let Some(path) = &args.out {
        emit_json(&ranked, Some(path))?;
    }
    emit_text(&kenn::ranking_table(&ranked), None)
}

fn kenn_synth(args: KennSynthArgs) -> Result<()> {
    let schema = load_schema(args.schema.as_deref())?;
    let (corpus, generator) = kenn::generate_synthetic_corpus(&schema, args.seed, args.n, args.noise_sd)?;
    kenn::write_corpus_file(&args.out, &corpus)?;
    if let Some(path) = &args.generator_out {
        let mut text = generator.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let config: HubConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => HubConfig::default(),
    };
    let library = args
        .scenario_sets
        .iter()
        .map(|(name, path)| ScenarioSet::new(name.clone(), read_scenarios(path)?))
        .collect::<Result<Vec<_>>>()?;
    let mut hub = Hub::new(config, library);
    if let Some(dir) = &args.data_dir {
        hub = hub.with_data_dir(dir)?;
    }
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("serving on http://{}", args.addr);
    runtime.block_on(coos_core::service::serve(args.addr, Arc::new(hub)))?;
    Ok(())
}

fn export_ternary(args: ExportArgs) -> Result<()> {
    let svg = if let Some(path) = &args.source.scenarios {
        let scenarios = read_scenarios(path)?;
        let cloud = ScenarioCloud::from_scenarios(&scenarios)?;
        let points = scenarios
            .iter()
            .map(|s| Ok((s.id, s.point.map_or_else(|| cloud.point(s.id), Ok)?)))
            .collect::<Result<Vec<_>>>()?;
        board::scenario_cloud(&points, &format!("{} scenarios", points.len()))
    } else if let Some(path) = &args.source.geometry {
        let file: ConsensusFile = read_json(path)?;
        board::consensus(&file.groups, &file.geometry, None)
    } else {
        unreachable!("clap requires one source");
    };
    std::fs::write(&args.out, svg)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Normalize(a) => normalize(a),
        Command::Ask(a) => ask(a),
        Command::Estimate(a) => estimate(a),
        Command::Intent(a) => intent(a),
        Command::Consensus(a) => consensus(a),
        Command::Choose(a) => choose(a),
        Command::KennTrain(a) => kenn_train(a),
        Command::KennPredict(a) => kenn_predict(a),
        Command::KennInterventions(a) => kenn_interventions(a),
        Command::KennSynth(a) => kenn_synth(a),
        Command::Serve(a) => serve(a),
        Command::ExportTernary(a) => export_ternary(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
