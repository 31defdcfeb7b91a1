use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use nl2milp::classifier::{
    classify_llm, classify_rules, score_classifier, split_dataset, write_finetune, Origin, DEFAULT_VALIDATION_RATIO,
};
use nl2milp::evaluator::{compute_metrics, diff_models, grade_instance, GeneratedResult, InstanceReport};
use nl2milp::gateway::{Gateway, HttpProvider, InstanceFixture, ReplayProvider, StubProvider};
use nl2milp::io::{
    emit_latex, emit_lp, load_json, load_labeled, load_model, save_json, to_json_pretty, write_atomic,
    ClassifierBackend, RunConfig,
};
use nl2milp::pipeline::{synthesize, ProblemInstance, SynthesisConfig};
use nl2milp::Model;

#[derive(Parser)]
#[command(name = "nl2milp", version, about = "Build MILP models from natural-language problem descriptions")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where completions come from.
    #[arg(long, global = true, value_enum)]
    provider: Option<ProviderKind>,
    /// Stub fixture file, or a directory holding `<instance id>.json`.
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    /// Transcript file: read by the replay provider, written by the others.
    #[arg(long, global = true)]
    transcript: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProviderKind {
    Stub,
    Http,
    Replay,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Lp,
    Latex,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Rules,
    Llm,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a model from an instance file, a text file or a directory.
    Synthesize {
        /// Defaults to `paths.instances` from the configuration.
        input: Option<PathBuf>,
        /// Model file, or output directory when INPUT is a directory.
        /// Defaults to `paths.output`.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the synthesis trace here (single instance).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the gradable result here (single instance).
        #[arg(long)]
        result: Option<PathBuf>,
        #[arg(long, value_enum)]
        classifier: Option<Backend>,
        #[arg(long)]
        big_m: Option<f64>,
    },
    /// Print the type code of each paragraph.
    Classify {
        /// Paragraphs to classify.
        text: Vec<String>,
        /// Read paragraphs from a file, one per line.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Score against a labeled JSON set instead.
        #[arg(long, conflicts_with_all = ["text", "file"])]
        labeled: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "rules")]
        backend: Backend,
    },
    /// Grade generated results against ground truth.
    Evaluate {
        /// Directory of `*.json` results, or one JSON array.
        generated: PathBuf,
        /// Directory of instance files, or one JSON array.
        truth: PathBuf,
        /// Also write reports and metrics as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Print a diff for every incorrect model.
        #[arg(long)]
        diff: bool,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Split a labeled set and write fine-tuning files.
    ExportFinetune {
        labeled: PathBuf,
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VALIDATION_RATIO)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a model as LP or LaTeX.
    Emit {
        model: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// A transcript file shared by several gateways.
#[derive(Clone)]
struct SharedSink(Arc<Mutex<File>>);

impl Write for SharedSink {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap_or_else(|p| p.into_inner()).write(buf)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.0.lock().unwrap_or_else(|p| p.into_inner()).flush()
    }
}

struct Providers {
    kind: ProviderKind,
    config: RunConfig,
    fixtures: Option<PathBuf>,
    replay: Option<PathBuf>,
    sink: Option<SharedSink>,
}

impl Providers {
    fn new(cli: &Cli, config: RunConfig) -> Result<Self> {
        let kind = cli.provider.unwrap_or(ProviderKind::Http);
        let mut p = Providers {
            kind,
            config,
            fixtures: cli.fixtures.clone(),
            replay: None,
            sink: None,
        };
        let transcript = cli.transcript.clone().or_else(|| p.config.paths.transcript.clone());
        match (kind, &transcript) {
            (ProviderKind::Replay, Some(t)) => p.replay = Some(t.clone()),
            (ProviderKind::Replay, None) => bail!("--provider replay needs --transcript"),
            (_, Some(t)) => {
                let f = File::create(t).with_context(|| t.display().to_string())?;
                p.sink = Some(SharedSink(Arc::new(Mutex::new(f))));
            }
            (_, None) => {}
        }
        if kind == ProviderKind::Stub && p.fixtures.is_none() {
            bail!("--provider stub needs --fixtures");
        }
        Ok(p)
    }

    fn gateway(&self, instance_id: &str) -> Result<Gateway> {
        let cfg = self.config.provider.clone();
        let gw = match self.kind {
            ProviderKind::Stub => {
                let path = self.fixtures.as_ref().expect("checked in new");
                let path = if path.is_dir() {
                    path.join(format!("{instance_id}.json"))
                } else {
                    path.clone()
                };
                let fixture = InstanceFixture::load(&path).map_err(|e| anyhow!(e))?;
                Gateway::new(StubProvider::new(fixture), cfg)?
            }
            ProviderKind::Http => Gateway::new(HttpProvider::new(&cfg), cfg)?,
            ProviderKind::Replay => {
                let r = ReplayProvider::open(self.replay.as_ref().expect("checked in new")).map_err(|e| anyhow!(e))?;
                Gateway::new(r, cfg)?
            }
        };
        Ok(match &self.sink {
            Some(s) => gw.with_transcript(s.clone()),
            None => gw,
        })
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn read_instance(path: &Path) -> Result<ProblemInstance<f64>> {
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(nl2milp::io::load_instance(path)?);
    }
    let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let inst = ProblemInstance::from_text(id, &text);
    inst.validate().with_context(|| path.display().to_string())?;
    Ok(inst)
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| dir.display().to_string())?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "json" || e == "txt"));
    files.sort();
    Ok(files)
}

/// Run `f` over `items` on at most `width` threads, keeping input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], width: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let mut out = Vec::with_capacity(items.len());
    for chunk in items.chunks(width.max(1)) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|item| s.spawn(|| f(item))).collect();
            out.extend(handles.into_iter().map(|h| h.join().expect("worker panicked")));
        });
    }
    out
}

struct Outcome {
    id: String,
    model: Option<Model>,
    trace: nl2milp::pipeline::SynthesisTrace,
    error: Option<String>,
}

fn run_one(inst: &ProblemInstance<f64>, providers: &Providers, cfg: &SynthesisConfig<f64>) -> Result<Outcome> {
    let gw = providers.gateway(&inst.id)?;
    Ok(match synthesize(inst, &gw, cfg) {
        Ok((model, trace)) => Outcome {
            id: inst.id.clone(),
            model: Some(model),
            trace,
            error: None,
        },
        Err(f) => Outcome {
            id: inst.id.clone(),
            model: None,
            trace: f.trace,
            error: Some(f.error.to_string()),
        },
    })
}

fn cmd_synthesize(
    cli: &Cli,
    input: Option<&Path>,
    output: Option<&Path>,
    trace: Option<&Path>,
    result: Option<&Path>,
    classifier: Option<Backend>,
    big_m: Option<f64>,
) -> Result<()> {
    let mut config = load_config(cli.config.as_deref())?;
    if let Some(b) = classifier {
        config.classifier = match b {
            Backend::Rules => ClassifierBackend::Rules,
            Backend::Llm => ClassifierBackend::Llm,
        };
    }
    if let Some(m) = big_m {
        config.big_m = m;
    }
    let input = input
        .map(Path::to_path_buf)
        .or_else(|| config.paths.instances.clone())
        .ok_or_else(|| anyhow!("no INPUT given and no paths.instances configured"))?;
    let input = input.as_path();
    let output = output.map(Path::to_path_buf).or_else(|| config.paths.output.clone());
    let output = output.as_deref();
    config.validate().map_err(|e| anyhow!(e))?;
    let syn = SynthesisConfig {
        big_m: config.big_m,
        classifier: config.classifier.into(),
        ..SynthesisConfig::default()
    };
    let width = config.provider.max_concurrency;

    // Inputs are read before any file is created.
    if input.is_dir() {
        let out_dir = output.ok_or_else(|| anyhow!("a directory input needs --output DIR"))?;
        let instances = instance_files(input)?
            .iter()
            .map(|p| read_instance(p))
            .collect::<Result<Vec<_>>>()?;
        let providers = Providers::new(cli, config)?;
        let outcomes = parallel_map(&instances, width, |inst| run_one(inst, &providers, &syn));
        std::fs::create_dir_all(out_dir).with_context(|| out_dir.display().to_string())?;
        let mut failed = 0;
        for o in outcomes {
            let o = o?;
            let res = GeneratedResult::from_trace(&o.trace, o.model.clone());
            if let Some(m) = &o.model {
                save_json(m, out_dir.join(format!("{}.model.json", o.id)))?;
            }
            save_json(&o.trace, out_dir.join(format!("{}.trace.json", o.id)))?;
            save_json(&res, out_dir.join(format!("{}.result.json", o.id)))?;
            match o.error {
                Some(e) => {
                    failed += 1;
                    eprintln!("{}: {e}", o.id);
                }
                None => println!("{}: ok", o.id),
            }
        }
        if failed > 0 {
            bail!("{failed} of {} instances failed", instances.len());
        }
        return Ok(());
    }

    let inst = read_instance(input)?;
    let providers = Providers::new(cli, config)?;
    let o = run_one(&inst, &providers, &syn)?;
    if let Some(p) = trace {
        save_json(&o.trace, p)?;
    }
    if let Some(p) = result {
        save_json(&GeneratedResult::from_trace(&o.trace, o.model.clone()), p)?;
    }
    if let Some(e) = o.error {
        bail!("{}: {e}", o.id);
    }
    let model = o.model.expect("set on success");
    match output {
        Some(p) => save_json(&model, p)?,
        None => print!("{}", to_json_pretty(&model)),
    }
    Ok(())
}

fn cmd_classify(cli: &Cli, text: &[String], file: Option<&Path>, labeled: Option<&Path>, backend: Backend) -> Result<()> {
    let gateway = match backend {
        Backend::Rules => None,
        Backend::Llm => {
            let providers = Providers::new(cli, load_config(cli.config.as_deref())?)?;
            Some(providers.gateway("classify")?)
        }
    };
    let classify = |t: &str| match &gateway {
        None => classify_rules(t).map(|m| m.code),
        Some(g) => classify_llm(t, g),
    };
    if let Some(path) = labeled {
        let data = load_labeled(path)?;
        let score = score_classifier(classify, &data);
        for &i in &score.misses {
            println!("miss: expected {} for {:?}", data[i].label, data[i].text);
        }
        println!("accuracy {} ({}/{})", score.accuracy(), score.correct, score.total);
        return Ok(());
    }
    let mut paragraphs: Vec<String> = text.to_vec();
    if let Some(f) = file {
        let body = std::fs::read_to_string(f).with_context(|| f.display().to_string())?;
        paragraphs.extend(body.lines().filter(|l| !l.trim().is_empty()).map(String::from));
    }
    if paragraphs.is_empty() {
        bail!("nothing to classify");
    }
    let mut failed = false;
    for p in &paragraphs {
        match classify(p) {
            Ok(code) => println!("{code}"),
            Err(e) => {
                failed = true;
                println!("?");
                eprintln!("{p:?}: {e}");
            }
        }
    }
    if failed {
        bail!("some paragraphs could not be classified");
    }
    Ok(())
}

fn load_many<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        files.retain(|p| p.extension().is_some_and(|e| e == "json"));
        files.sort();
        return files.iter().map(|f| Ok(load_json(f)?)).collect();
    }
    Ok(load_json(path)?)
}

fn cmd_evaluate(cli: &Cli, generated: &Path, truth: &Path, json: Option<&Path>, diff: bool, tol: Option<f64>) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    let tol = tol.unwrap_or(config.tolerance);
    if !(tol > 0.0) {
        bail!("tolerance must be positive");
    }
    let results: Vec<GeneratedResult<f64>> = load_many(generated)?;
    let instances: Vec<ProblemInstance<f64>> = load_many(truth)?;
    let reports: Vec<InstanceReport> = parallel_map(&instances, config.provider.max_concurrency, |inst| {
        let res = results
            .iter()
            .find(|r| r.id == inst.id)
            .ok_or_else(|| anyhow!("no generated result for `{}`", inst.id))?;
        Ok::<_, anyhow::Error>(grade_instance(res, inst, tol)?)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let metrics = compute_metrics(&reports)?;
    for r in reports.iter().filter(|r| r.t == 0) {
        println!(
            "{}: incorrect (objective {}, wrong constraints {:?}, missing linking {}, extra {}, missing {})",
            r.id,
            if r.objective_correct { "ok" } else { "wrong" },
            r.wrong_constraints,
            r.missing_linking,
            r.extra_constraints,
            r.missing_constraints
        );
        if diff {
            let res = results.iter().find(|x| x.id == r.id).expect("graded above");
            let inst = instances.iter().find(|x| x.id == r.id).expect("graded above");
            if let (Some(m), Some(t)) = (&res.model, &inst.ground_truth) {
                print!("{}", diff_models(m, t, tol));
            }
        }
    }
    print!("{metrics}");
    if let Some(p) = json {
        save_json(&serde_json::json!({ "reports": reports, "metrics": metrics }), p)?;
    }
    Ok(())
}

fn cmd_export(cli: &Cli, labeled: &Path, out_dir: &Path, ratio: f64, seed: u64) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    let data = load_labeled(labeled)?;
    let split = split_dataset(&data, ratio, seed)?;
    if split.validation.is_empty() {
        bail!("validation set is empty");
    }
    std::fs::create_dir_all(out_dir).with_context(|| out_dir.display().to_string())?;
    for (name, items) in [("train.jsonl", &split.train), ("validation.jsonl", &split.validation)] {
        let mut buf = Vec::new();
        write_finetune(items, &mut buf)?;
        write_atomic(out_dir.join(name), &buf)?;
    }
    save_json(&config.finetune, out_dir.join("hyperparameters.json"))?;
    let authored = data.iter().filter(|d| d.origin == Origin::Authored).count();
    println!(
        "train {} / validation {} ({} items, {} authored)",
        split.train.len(),
        split.validation.len(),
        data.len(),
        authored
    );
    Ok(())
}

fn cmd_emit(model: &Path, format: Format, output: Option<&Path>) -> Result<()> {
    let m: Model = load_model(model)?;
    let text = match format {
        Format::Lp => emit_lp(&m),
        Format::Latex => emit_latex(&m),
    };
    match output {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synthesize {
            input,
            output,
            trace,
            result,
            classifier,
            big_m,
        } => cmd_synthesize(cli, input.as_deref(), output.as_deref(), trace.as_deref(), result.as_deref(), *classifier, *big_m),
        Command::Classify {
            text,
            file,
            labeled,
            backend,
        } => cmd_classify(cli, text, file.as_deref(), labeled.as_deref(), *backend),
        Command::Evaluate {
            generated,
            truth,
            json,
            diff,
            tolerance,
        } => cmd_evaluate(cli, generated, truth, json.as_deref(), *diff, *tolerance),
        Command::ExportFinetune {
            labeled,
            out_dir,
            ratio,
            seed,
        } => cmd_export(cli, labeled, out_dir, *ratio, *seed),
        Command::Emit { model, format, output } => cmd_emit(model, *format, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
