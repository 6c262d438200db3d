use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use speller_core::engine::EngineConfig;
use speller_core::insilico::{
    self, synth::CorpusStyle, PhrasebookTag, SimulationConfig, SimulationRecord,
};
use speller_core::kb::KB_HEADER;
use speller_core::text::normalize;
use speller_core::{estimate_rates, KnowledgeBase, NormalizeMode, RateConfig, Sentence, SpellerKind};
use speller_server::AppState;

#[derive(Parser)]
#[command(name = "speller", version, about = "Predictive P300 speller toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a knowledge-base file from a phrasebook.
    KbBuild {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "phrasebook-rule")]
        normalize: NormalizeMode,
    },
    /// Draw the A_in / A_out test phrasebooks from a corpus.
    Split {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 200)]
        n_in: usize,
        #[arg(long, default_value_t = 200)]
        n_out: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Receives a_in.txt, a_out.txt and p_l.txt.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Spell a phrasebook with one speller and report per-sentence totals.
    Simulate {
        /// Knowledge-base file or phrasebook.
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        phrasebook: PathBuf,
        #[arg(long, default_value = "polymorph")]
        speller: SpellerName,
        #[arg(long, default_value = "on")]
        predictions: Toggle,
        /// Label written to the `phrasebook` column.
        #[arg(long, default_value = "other")]
        tag: PhrasebookTag,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Split a corpus, build the experiment knowledge base and run every
    /// speller over both test phrasebooks.
    Experiment {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 200)]
        n_in: usize,
        #[arg(long, default_value_t = 200)]
        n_out: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Estimate information rates by Monte Carlo.
    Rates {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, default_value = "polymorph")]
        speller: SpellerName,
        #[arg(long, default_value = "on")]
        predictions: Toggle,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Print the matrices an error-free user sees while spelling `target`.
    Spell {
        #[arg(long)]
        kb: PathBuf,
        /// Sentence to spell; normalized like phrasebook lines.
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "on")]
        predictions: Toggle,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Write one of the bundled synthetic corpora.
    Corpus {
        #[arg(long)]
        style: CorpusStyle,
        /// Destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, env = "PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of `<name>.kb` files, loaded at start and updated on
        /// every commit.
        #[arg(long)]
        kb_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CorpusArgs {
    /// Corpus file, one sentence per line, optionally `count<TAB>sentence`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// One of the bundled corpora.
    #[arg(long)]
    bundled: Option<CorpusStyle>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
    /// Commit each spelled sentence before the next one.
    #[arg(long)]
    learn: bool,
    #[arg(long, default_value = "en")]
    lang: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Attach rate estimates with this stream length.
    #[arg(long, requires = "rate_runs")]
    rate_n: Option<usize>,
    #[arg(long, requires = "rate_n")]
    rate_runs: Option<usize>,
}

#[derive(Args)]
struct EngineArgs {
    /// Prediction slots.
    #[arg(long, default_value_t = 4)]
    p_sharp: usize,
    #[arg(long)]
    nrs: Option<u32>,
    #[arg(long)]
    sd: Option<f64>,
    #[arg(long)]
    isi: Option<f64>,
    #[arg(long)]
    pre_s: Option<f64>,
    #[arg(long)]
    post_s: Option<f64>,
    #[arg(long)]
    ppd: Option<f64>,
}

impl EngineArgs {
    fn config(&self) -> Result<EngineConfig> {
        let mut c = EngineConfig {
            p_sharp: self.p_sharp,
            ..EngineConfig::default()
        };
        let t = &mut c.timing;
        if let Some(v) = self.nrs {
            t.nrs = v;
        }
        for (field, value) in [
            (&mut t.sd, self.sd),
            (&mut t.isi, self.isi),
            (&mut t.pre_s, self.pre_s),
            (&mut t.post_s, self.post_s),
            (&mut t.ppd, self.ppd),
        ] {
            if let Some(v) = value {
                *field = v;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpellerName {
    Baseline,
    Polymorph,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

fn speller_kind(name: SpellerName, predictions: Toggle) -> SpellerKind {
    match name {
        SpellerName::Baseline => SpellerKind::Baseline,
        SpellerName::Polymorph => SpellerKind::Polymorph {
            predictions: matches!(predictions, Toggle::On),
        },
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

/// Loads a saved knowledge base, or builds one when `path` is a phrasebook.
fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    let mut reader = open(path)?;
    let is_kb = reader.fill_buf()?.starts_with(KB_HEADER.as_bytes());
    let kb = if is_kb {
        KnowledgeBase::load(reader)?
    } else {
        let mut kb = KnowledgeBase::new();
        kb.ingest_phrasebook(reader, NormalizeMode::default())?;
        kb
    };
    Ok(kb)
}

fn load_corpus(args: &CorpusArgs) -> Result<insilico::Corpus> {
    let corpus = match (&args.input, args.bundled) {
        (Some(path), _) => insilico::read_corpus(open(path)?, NormalizeMode::default())
            .with_context(|| format!("reading {}", path.display()))?,
        (None, Some(style)) => insilico::read_corpus(style.bundled().as_bytes(), NormalizeMode::default())?,
        (None, None) => bail!("give --in or --bundled"),
    };
    Ok(corpus)
}

fn sim_config(run: &RunArgs) -> Result<SimulationConfig> {
    if let Some(jobs) = run.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    Ok(SimulationConfig {
        lang: run.lang.clone(),
        engine: run.engine.config()?,
        learn: run.learn,
        seed: run.seed,
        rates: run.rate_n.zip(run.rate_runs),
    })
}

fn emit_csv(records: &[SimulationRecord], dest: Option<&Path>) -> Result<()> {
    match dest {
        Some(path) => {
            let mut sink = create(path)?;
            insilico::write_csv(&mut sink, records)?;
            sink.flush()?;
        }
        None => insilico::write_csv(io::stdout().lock(), records)?,
    }
    Ok(())
}

fn summarize(records: &[SimulationRecord]) {
    for r in records {
        let a = r.aggregates();
        eprintln!(
            "{:<9} {:<8} {:<6} sentences={:<4} OCM={:.3} SM={:.3} ISR={:.3}",
            r.speller.name(),
            if r.predictions() { "pred" } else { "no-pred" },
            r.phrasebook.as_str(),
            a.sentences,
            a.ocm,
            a.sm,
            a.isr,
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::KbBuild { input, out, normalize } => {
            let mut kb = KnowledgeBase::new();
            let stats = kb
                .ingest_phrasebook(open(&input)?, normalize)
                .with_context(|| format!("reading {}", input.display()))?;
            kb.save_to_path(&out)
                .with_context(|| format!("cannot write {}", out.display()))?;
            eprintln!(
                "{} sentences ({} unterminated lines), {} distinct words",
                stats.sentences,
                stats.unterminated,
                kb.words().distinct()
            );
        }
        Command::Split {
            corpus,
            n_in,
            n_out,
            seed,
            out_dir,
        } => {
            let corpus = load_corpus(&corpus)?;
            let split = insilico::split_phrasebook(&corpus, n_in, n_out, seed)?;
            std::fs::create_dir_all(&out_dir)?;
            for (name, part) in [("a_in.txt", &split.a_in), ("a_out.txt", &split.a_out), ("p_l.txt", &split.p_l)] {
                let mut sink = create(&out_dir.join(name))?;
                insilico::write_corpus(&mut sink, part)?;
                sink.flush()?;
            }
            eprintln!(
                "a_in={} a_out={} p_l={} (from {} distinct sentences)",
                split.a_in.len(),
                split.a_out.len(),
                split.p_l.len(),
                corpus.len()
            );
        }
        Command::Simulate {
            kb,
            phrasebook,
            speller,
            predictions,
            tag,
            run,
        } => {
            let config = sim_config(&run)?;
            let kb = load_kb(&kb)?;
            let book = insilico::read_corpus(open(&phrasebook)?, NormalizeMode::default())?;
            let record = insilico::simulate_phrasebook(
                &kb,
                &insilico::sentences_of(&book),
                speller_kind(speller, predictions),
                tag,
                &config,
            )?;
            let records = [record];
            summarize(&records);
            emit_csv(&records, run.csv.as_deref())?;
        }
        Command::Experiment {
            corpus,
            n_in,
            n_out,
            run,
        } => {
            let config = sim_config(&run)?;
            let corpus = load_corpus(&corpus)?;
            let split = insilico::split_phrasebook(&corpus, n_in, n_out, config.seed)?;
            let kb = insilico::build_experiment_kb(&split);
            let records = insilico::run_experiment(
                &kb,
                &insilico::sentences_of(&split.a_in),
                &insilico::sentences_of(&split.a_out),
                &config,
            )?;
            summarize(&records);
            emit_csv(&records, run.csv.as_deref())?;
        }
        Command::Rates {
            kb,
            speller,
            predictions,
            n,
            runs,
            seed,
            engine,
        } => {
            let kb = load_kb(&kb)?;
            let mut rc = RateConfig::new(speller_kind(speller, predictions), n, runs, seed);
            rc.engine = engine.config()?;
            let est = estimate_rates(&kb, &rc)?;
            println!("speller\tn\truns\tR_n\tr_n\tD_n\tstd_error");
            println!(
                "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
                rc.speller, est.n, est.runs, est.big_r_n, est.r_n, est.d_n, est.std_error
            );
        }
        Command::Spell {
            kb,
            target,
            predictions,
            engine,
        } => {
            let kb = load_kb(&kb)?;
            let mut config = engine.config()?;
            config.predictions = matches!(predictions, Toggle::On);
            let normalized = normalize(&target, NormalizeMode::default());
            let sentence = Sentence::new(normalized.clone())
                .with_context(|| format!("{target:?} normalizes to {normalized:?}, which is not a sentence"))?;
            let speller = SpellerKind::Polymorph {
                predictions: config.predictions,
            };
            let session = insilico::spell_with_oracle(&kb, &sentence, speller, &config)?;
            print_trace(&kb, &sentence, &session, &config)?;
        }
        Command::Corpus { style, out } => {
            let text = style.bundled();
            match out {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?,
                None => io::stdout().lock().write_all(text.as_bytes())?,
            }
        }
        Command::Serve { port, host, kb_dir } => {
            let state = match kb_dir {
                Some(dir) => AppState::with_kb_dir(&dir).with_context(|| format!("loading {}", dir.display()))?,
                None => AppState::in_memory(),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .with_context(|| format!("cannot bind {host}:{port}"))?;
                speller_server::serve(listener, state).await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}

/// Replays the oracle session, printing each matrix and the chosen cell.
fn print_trace(
    kb: &KnowledgeBase,
    target: &Sentence,
    session: &speller_core::SpellSession,
    config: &EngineConfig,
) -> Result<()> {
    let mut out = io::stdout().lock();
    let mut replay = speller_core::SpellSession::new(kb, config);
    let goal = target.as_str();
    for record in session.log() {
        let m = replay.matrix();
        writeln!(out, "step {}  spelled {:?}  {}x{}", record.step, replay.spelled(), m.rows(), m.cols())?;
        for (id, word, spell) in m.predictions() {
            writeln!(out, "  {id}' {word} -> {spell}")?;
        }
        for r in 0..m.rows() {
            let cells: Vec<String> = (0..m.cols())
                .map(|c| format!("{:>5}", m.get(r, c).map(|s| s.label()).unwrap_or_default()))
                .collect();
            writeln!(out, " {}", cells.join(""))?;
        }
        let symbol = speller_core::oracle_choice(m, &goal[replay.spelled().len()..])
            .context("trace diverged from the simulated session")?
            .clone();
        let applied = replay.apply_frozen(kb, config, &symbol)?;
        if let speller_core::Delta::Spelled(text) = &applied.delta {
            writeln!(out, "  select {} ({}) -> +{text:?}", symbol.label(), symbol.kind().as_str())?;
        }
    }
    let report = session.metrics(config)?;
    writeln!(
        out,
        "done: {:?} in {} selections, {:.3} s, OCM {:.3}",
        session.spelled(),
        session.log().len(),
        session.virtual_time(),
        report.ocm
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt().with_writer(io::stderr).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
