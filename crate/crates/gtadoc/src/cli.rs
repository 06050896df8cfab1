//! `gtadoc compress | analyze | verify | bench | synth`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gtadoc_core::{Direction, Grammar, Strategy, Task, TraversalConfig};

use crate::corpus::Corpus;
use crate::error::CliError;
use crate::format;
use crate::manifest::{digest, RunManifest, Timings};
use crate::parallel::Workers;
use crate::run;
use crate::synth::{self, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "gtadoc", version, about = "Text analytics on grammar-compressed corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    #[value(name = "topdown", alias = "top-down")]
    TopDown,
    #[value(name = "bottomup", alias = "bottom-up")]
    BottomUp,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::TopDown => Strategy::TopDown,
            StrategyArg::BottomUp => Strategy::BottomUp,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Words per sequence for sequence-count and ranked-inverted-index
    #[arg(long = "l", value_name = "N", default_value_t = gtadoc_core::tasks::DEFAULT_SEQUENCE_LEN)]
    pub l: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
    /// Worker threads [default: available cores]
    #[arg(long, env = "GTADOC_WORKERS")]
    pub workers: Option<usize>,
    /// Split rule bodies longer than this many times the average
    #[arg(long, default_value_t = 16)]
    pub chunk_factor: usize,
    /// Files tracked by a bitset before switching to id lists
    #[arg(long, default_value_t = 64)]
    pub file_set_width: usize,
}

impl EngineArgs {
    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    fn config(&self) -> Result<TraversalConfig, CliError> {
        let cfg = TraversalConfig {
            strategy: self.strategy.into(),
            workers: self.workers(),
            chunk_factor: self.chunk_factor,
            file_set_width: self.file_set_width,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct TaskArgs {
    /// word-count, sort, inverted-index, term-vector, sequence-count, ranked-inverted-index
    #[arg(value_name = "TASK")]
    pub task: Option<String>,
    #[arg(long = "task", value_name = "TASK", conflicts_with = "task")]
    pub task_flag: Option<String>,
}

impl TaskArgs {
    fn get(&self) -> Result<Option<Task>, CliError> {
        match self.task.as_ref().or(self.task_flag.as_ref()) {
            None => Ok(None),
            Some(s) => Ok(Some(s.parse::<Task>()?)),
        }
    }

    fn required(&self) -> Result<Task, CliError> {
        self.get()?.ok_or_else(|| CliError::Usage("a task is required".into()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress every file of a directory into one GTDC file
    Compress { input: PathBuf, output: PathBuf },
    /// Run a task on a GTDC file; TSV on stdout, manifest on stderr
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        engine: EngineArgs,
        /// Write the TSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check compressed results against decompress-then-analyze
    Verify {
        input: PathBuf,
        /// Omit to check every task
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        engine: EngineArgs,
        /// Use this GTDC file instead of compressing the directory
        #[arg(long)]
        compressed: Option<PathBuf>,
    },
    /// Time parallel, sequential, and decompress-then-analyze runs
    Bench {
        input: PathBuf,
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, default_value_t = 5)]
        repeat: usize,
    },
    /// Write a synthetic Zipf corpus
    Synth {
        output: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        files: usize,
        #[arg(long, default_value_t = 100_000)]
        tokens: usize,
        #[arg(long, default_value_t = 5_000)]
        vocab: usize,
        #[arg(long, default_value_t = 1.1)]
        exponent: f64,
        #[arg(long, default_value_t = 0.2)]
        repeat_prob: f64,
    },
}

fn read_grammar(path: &Path) -> Result<Grammar, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    format::deserialize(&bytes).map_err(|source| CliError::Format {
        path: path.into(),
        source,
    })
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::TopDown => "top-down",
        Direction::BottomUp => "bottom-up",
    }
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn compress(input: &Path, output: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = Corpus::read_dir(input)?;
    let g = corpus.compress()?;
    let bytes = format::serialize(&g);
    fs::write(output, &bytes).map_err(|e| CliError::io(output, e))?;
    let ratio = corpus.bytes as f64 / bytes.len() as f64;
    let text = format!(
        "files: {}\nrules: {}\nvocabulary: {}\ntokens: {}\ninput_bytes: {}\ncompressed_bytes: {}\ncompression_ratio: {ratio:.3}\n",
        corpus.names.len(),
        g.rules.len(),
        g.dictionary.num_words(),
        corpus.tokens(),
        corpus.bytes,
        bytes.len(),
    );
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

fn analyze(
    input: &Path,
    task: Task,
    engine: &EngineArgs,
    dest: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = engine.config()?;
    let workers = Workers::new(cfg.workers)?;
    let start = Instant::now();
    let g = read_grammar(input)?;
    let load = start.elapsed();
    let a = run::analyze(&g, task, engine.l, &cfg, &workers)?;
    match dest {
        Some(p) => fs::write(p, &a.tsv).map_err(|e| CliError::io(p, e))?,
        None => out
            .write_all(a.tsv.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e))?,
    }
    let manifest = RunManifest {
        command: "analyze".into(),
        inputs: vec![input.display().to_string()],
        task: task.name().into(),
        l: engine.l,
        strategy: format!("{:?}", cfg.strategy).to_lowercase(),
        direction: direction_name(a.report.direction).into(),
        workers: cfg.workers,
        chunk_factor: cfg.chunk_factor,
        timings: Timings {
            load_ms: ms(load),
            init_ms: ms(a.init),
            traversal_ms: ms(a.traversal),
            total_ms: ms(start.elapsed()),
        },
        digest: digest(a.tsv.as_bytes()),
    };
    writeln!(err, "{}", manifest.to_json_line()).map_err(|e| CliError::io("<stderr>", e))
}

fn verify(
    input: &Path,
    task: Option<Task>,
    engine: &EngineArgs,
    compressed: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = engine.config()?;
    let workers = Workers::new(cfg.workers)?;
    let corpus = Corpus::read_dir(input)?;
    let g = match compressed {
        Some(p) => read_grammar(p)?,
        // through the file format, as analyze would see it
        None => {
            let bytes = format::serialize(&corpus.compress()?);
            format::deserialize(&bytes).map_err(|source| CliError::Format {
                path: input.into(),
                source,
            })?
        }
    };
    if let Some((f, i, e, a)) = corpus.first_mismatch(&g)? {
        return Err(CliError::Divergence {
            task: "decompression".into(),
            detail: format!(
                "{} token {i}: expected `{e}`, actual `{a}`",
                corpus.names.get(f).map_or("<extra file>", String::as_str)
            ),
        });
    }
    let tasks = task.map_or(Task::ALL.to_vec(), |t| vec![t]);
    for t in tasks {
        run::verify(&g, t, engine.l, &cfg, &workers)?;
        writeln!(out, "ok\t{t}").map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(())
}

fn bench(
    input: &Path,
    task: Task,
    engine: &EngineArgs,
    repeat: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = engine.config()?;
    let corpus = Corpus::read_dir(input)?;
    let t = Instant::now();
    let g = corpus.compress()?;
    let compress_ms = ms(t.elapsed());
    let report = run::bench(&g, task, engine.l, &cfg, cfg.workers, repeat)?;
    let head = format!(
        "corpus\tfiles={}\ttokens={}\trules={}\tcompress_ms={compress_ms:.3}\n",
        corpus.names.len(),
        corpus.tokens(),
        g.rules.len()
    );
    out.write_all(head.as_bytes())
        .and_then(|_| out.write_all(report.to_text().as_bytes()))
        .map_err(|e| CliError::io("<stdout>", e))?;
    let json = serde_json::to_string(&report).expect("report serializes");
    writeln!(err, "{json}").map_err(|e| CliError::io("<stderr>", e))
}

fn synth_cmd(output: &Path, cfg: SynthConfig) -> Result<(), CliError> {
    let corpus = synth::generate(&cfg);
    fs::create_dir_all(output).map_err(|e| CliError::io(output, e))?;
    for (name, words) in corpus.names.iter().zip(&corpus.files) {
        let path = output.join(name);
        fs::write(&path, words.join(" ") + "\n").map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Compress { input, output } => compress(&input, &output, out),
        Command::Analyze {
            input,
            task,
            engine,
            out: dest,
        } => analyze(&input, task.required()?, &engine, dest.as_deref(), out, err),
        Command::Verify {
            input,
            task,
            engine,
            compressed,
        } => verify(&input, task.get()?, &engine, compressed.as_deref(), out),
        Command::Bench {
            input,
            task,
            engine,
            repeat,
        } => bench(&input, task.required()?, &engine, repeat, out, err),
        Command::Synth {
            output,
            seed,
            files,
            tokens,
            vocab,
            exponent,
            repeat_prob,
        } => {
            if vocab == 0 || exponent.is_nan() || exponent <= 0.0 || !(0.0..=1.0).contains(&repeat_prob) {
                return Err(CliError::Usage("invalid synthetic corpus parameters".into()));
            }
            let cfg = SynthConfig {
                seed,
                files,
                tokens,
                vocab,
                exponent,
                repeat_prob,
                ..SynthConfig::default()
            };
            synth_cmd(&output, cfg)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // help and version go to stdout with status 0
            return if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                1
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
