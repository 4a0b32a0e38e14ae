//! The `amrforge` command line.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::corrupt::{compose, example_rng, Corruption, CorruptionConfig};
use crate::graph::validate;
use crate::linearize::{delinearize, linearize, repair_or_fallback, strip_markers, TokenSeq};
use crate::metrics::{corpus_bleu, fine_grained, FineGrained, DEFAULT_RESTARTS};
use crate::penman::{parse_penman, serialize_graph, ParseMode, PenmanDocument};
use crate::stats::{compute_stats, BucketSummary};
use crate::tasks::{build_pair, parse_task_set, MaskSchedule};
use crate::vocab::{build_vocabulary, collect_symbols, DEFAULT_MAX_POINTERS};

pub const SEED_ENV: &str = "AMRFORGE_SEED";

#[derive(Parser, Debug)]
#[command(name = "amrforge", version, about = "AMR linearization, corruption, task building and evaluation")]
pub struct Cli {
    /// Seed for every random choice [env: AMRFORGE_SEED, default: 0]
    #[arg(long, global = true, env = SEED_ENV, hide_env = true)]
    seed: Option<u64>,
    /// Worker threads; 0 picks one per core. Output order never changes.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Stop at the first malformed document (default)
    #[arg(long, global = true, overrides_with = "lenient")]
    strict: bool,
    /// Repair or skip malformed documents with a warning
    #[arg(long, global = true, overrides_with = "strict")]
    lenient: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Rates {
    #[arg(long, default_value_t = 0.15)]
    node_rate: f64,
    #[arg(long, default_value_t = 0.15)]
    edge_rate: f64,
    #[arg(long, default_value_t = 0.35)]
    subgraph_rate: f64,
    #[arg(long, default_value_t = 0.15)]
    text_rate: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every graph and list its problems
    Validate { input: Option<PathBuf> },
    /// Per-graph size, depth and reentrancy rows plus a bucket summary
    Stats { input: Option<PathBuf> },
    /// Print each graph as one line of tokens
    Linearize { input: Option<PathBuf> },
    /// Turn token lines back into PENMAN graphs
    Delinearize { input: Option<PathBuf> },
    /// Mask graphs (and `::snt` text when present), one JSON object per graph
    Corrupt {
        input: Option<PathBuf>,
        #[command(flatten)]
        rates: Rates,
    },
    /// Emit training samples as JSON Lines
    BuildTasks {
        input: Option<PathBuf>,
        #[command(flatten)]
        rates: Rates,
        /// Total steps of the masking schedule [default: number of pairs]
        #[arg(long = "T", value_name = "STEPS")]
        total_steps: Option<u64>,
        /// all, finetune, every, or comma-separated task names
        #[arg(long, default_value = "all")]
        tasks: String,
    },
    /// Build the extended vocabulary
    Vocab {
        input: Option<PathBuf>,
        /// Extra base tokens, one per line
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_POINTERS)]
        max_pointers: u32,
        /// Vocabulary file; stdout when omitted
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Partition map [default: <output>.partitions.json]
        #[arg(long)]
        partitions: Option<PathBuf>,
    },
    /// Smatch and fine-grained scores of predicted graphs against gold
    Smatch {
        predicted: PathBuf,
        gold: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Corpus BLEU-4 of hypothesis lines against reference lines
    Bleu { hypotheses: PathBuf, references: PathBuf },
}

/// Error that ends a run with exit code 1.
struct Failure(String);

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Ctx<'a> {
    seed: u64,
    jobs: usize,
    mode: ParseMode,
    stdin: &'a mut dyn BufRead,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on bad input, 2 on a usage error.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut ctx = Ctx {
        seed: cli.seed.unwrap_or(0),
        jobs: cli.jobs,
        mode: if cli.lenient { ParseMode::Lenient } else { ParseMode::Strict },
        stdin,
        stdout,
        stderr,
    };
    let result = match cli.command {
        Command::Validate { input } => cmd_validate(&mut ctx, input.as_deref()),
        Command::Stats { input } => cmd_stats(&mut ctx, input.as_deref()),
        Command::Linearize { input } => cmd_linearize(&mut ctx, input.as_deref()),
        Command::Delinearize { input } => cmd_delinearize(&mut ctx, input.as_deref()),
        Command::Corrupt { input, rates } => cmd_corrupt(&mut ctx, input.as_deref(), &rates),
        Command::BuildTasks { input, rates, total_steps, tasks } => {
            cmd_build_tasks(&mut ctx, input.as_deref(), &rates, total_steps, &tasks)
        }
        Command::Vocab { input, base, max_pointers, output, partitions } => {
            cmd_vocab(&mut ctx, input.as_deref(), base.as_deref(), max_pointers, output.as_deref(), partitions.as_deref())
        }
        Command::Smatch { predicted, gold, restarts } => cmd_smatch(&mut ctx, &predicted, &gold, restarts),
        Command::Bleu { hypotheses, references } => cmd_bleu(&mut ctx, &hypotheses, &references),
    };
    let flushed = ctx.stdout.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => 0,
        (Err(Failure(msg)), _) => {
            let _ = writeln!(ctx.stderr, "error: {}", msg);
            1
        }
        (_, Err(e)) => {
            let _ = writeln!(ctx.stderr, "error: {}", e);
            1
        }
    }
}

fn read_text(ctx: &mut Ctx, path: Option<&Path>) -> Result<String, Failure> {
    let mut text = String::new();
    match path {
        None => {
            ctx.stdin.read_to_string(&mut text)?;
        }
        Some(p) if p.as_os_str() == "-" => {
            ctx.stdin.read_to_string(&mut text)?;
        }
        Some(p) => {
            text = std::fs::read_to_string(p).map_err(with_path(p))?;
        }
    }
    Ok(text)
}

fn with_path(p: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure(format!("{}: {}", p.display(), e))
}

/// Blank-line separated blocks that contain something besides comments,
/// with their starting line (zero-based).
fn blocks(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let mut content = false;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if content {
                out.push((start, std::mem::take(&mut current)));
            }
            current.clear();
            content = false;
            start = i + 1;
            continue;
        }
        content |= !line.trim_start().starts_with('#');
        current.push_str(line);
        current.push('\n');
    }
    if content {
        out.push((start, current));
    }
    out
}

fn par_map<T: Sync, U: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    if jobs == 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

/// Parses a PENMAN corpus. Strict mode fails on the first bad document;
/// lenient mode warns and drops documents whose graph is still invalid.
fn load_corpus(ctx: &mut Ctx, path: Option<&Path>) -> Result<Vec<(usize, PenmanDocument)>, Failure> {
    let text = read_text(ctx, path)?;
    let blocks = blocks(&text);
    let mode = ctx.mode;
    let parsed = par_map(ctx.jobs, &blocks, |(line, block)| {
        parse_penman(block, mode).map_err(|e| e.shift_lines(*line))
    });
    let mut docs = Vec::with_capacity(parsed.len());
    for (index, result) in parsed.into_iter().enumerate() {
        let doc = result.map_err(|e| Failure(format!("document {}: {}", index, e)))?;
        for d in &doc.diagnostics {
            writeln!(ctx.stderr, "warning: document {}: {}", index, d)?;
        }
        if !validate(&doc.graph).is_empty() {
            writeln!(ctx.stderr, "warning: document {}: skipped", index)?;
            continue;
        }
        docs.push((index, doc));
    }
    Ok(docs)
}

fn label(index: usize, doc: &PenmanDocument) -> String {
    doc.id().map_or_else(|| index.to_string(), str::to_owned)
}

fn cmd_validate(ctx: &mut Ctx, input: Option<&Path>) -> Outcome {
    let text = read_text(ctx, input)?;
    let blocks = blocks(&text);
    let reports = par_map(ctx.jobs, &blocks, |(line, block)| match parse_penman(block, ParseMode::Strict) {
        Ok(doc) => (doc.id().map(str::to_owned), Vec::new()),
        Err(e) => {
            let id = parse_penman(block, ParseMode::Lenient).ok().and_then(|d| d.id().map(str::to_owned));
            let problems = match e {
                crate::penman::PenmanError::Invalid(inv) => inv.0.iter().map(|d| d.to_string()).collect(),
                other => vec![other.shift_lines(*line).to_string()],
            };
            (id, problems)
        }
    });
    let mut bad = 0;
    for (index, (id, problems)) in reports.into_iter().enumerate() {
        let id = id.unwrap_or_else(|| index.to_string());
        if problems.is_empty() {
            writeln!(ctx.stdout, "{}\tok", id)?;
        } else {
            bad += 1;
            writeln!(ctx.stdout, "{}\tinvalid\t{}", id, problems.join("; "))?;
        }
    }
    if bad > 0 {
        return Err(Failure(format!("{} of {} graphs invalid", bad, blocks.len())));
    }
    Ok(())
}

fn cmd_stats(ctx: &mut Ctx, input: Option<&Path>) -> Outcome {
    let docs = load_corpus(ctx, input)?;
    let mut summary = BucketSummary::default();
    writeln!(ctx.stdout, "id\tsize\tdepth\treentrancies\tsize_bucket\tdepth_bucket\treentrancy_bucket")?;
    for (index, doc) in &docs {
        let s = compute_stats(&doc.graph)?;
        summary.add(&s);
        writeln!(
            ctx.stdout,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            label(*index, doc),
            s.size,
            s.depth,
            s.reentrancies,
            s.size_bucket,
            s.depth_bucket,
            s.reent_bucket
        )?;
    }
    writeln!(ctx.stdout)?;
    write!(ctx.stdout, "{}", summary)?;
    Ok(())
}

fn cmd_linearize(ctx: &mut Ctx, input: Option<&Path>) -> Outcome {
    let docs = load_corpus(ctx, input)?;
    let lines = par_map(ctx.jobs, &docs, |(_, doc)| linearize(&doc.graph).map(|t| t.to_string()));
    for line in lines {
        writeln!(ctx.stdout, "{}", line?)?;
    }
    Ok(())
}

fn cmd_delinearize(ctx: &mut Ctx, input: Option<&Path>) -> Outcome {
    let text = read_text(ctx, input)?;
    let lines: Vec<(usize, &str)> =
        text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l)).collect();
    let lenient = ctx.mode == ParseMode::Lenient;
    let graphs = par_map(ctx.jobs, &lines, |(n, line)| {
        let tokens = TokenSeq::parse_graph(line);
        let tokens = strip_markers(&tokens);
        match delinearize(tokens) {
            Ok(g) => Ok((g, None)),
            Err(e) if lenient => {
                let repaired = repair_or_fallback(tokens);
                let g = delinearize(&repaired).expect("repaired sequences are well formed");
                Ok((g, Some(format!("warning: line {}: {}; repaired", n, e))))
            }
            Err(e) => Err(Failure(format!("line {}: {}", n, e))),
        }
    });
    for (i, result) in graphs.into_iter().enumerate() {
        let (g, warning) = result?;
        if let Some(w) = warning {
            writeln!(ctx.stderr, "{}", w)?;
        }
        if i > 0 {
            writeln!(ctx.stdout)?;
        }
        writeln!(ctx.stdout, "{}", serialize_graph(&g)?)?;
    }
    Ok(())
}

fn config(rates: &Rates, seed: u64) -> Result<CorruptionConfig, Failure> {
    let c = CorruptionConfig {
        node_rate: rates.node_rate,
        edge_rate: rates.edge_rate,
        subgraph_rate: rates.subgraph_rate,
        text_rate: rates.text_rate,
        seed,
    };
    c.check()?;
    Ok(c)
}

fn text_of(doc: &PenmanDocument) -> Option<TokenSeq> {
    doc.metadata.get("tok").or_else(|| doc.metadata.get("snt")).map(TokenSeq::words).filter(|t| !t.is_empty())
}

#[derive(Serialize)]
struct CorruptLine<'a> {
    id: String,
    graph: Vec<String>,
    text: Option<Vec<String>>,
    masked_nodes: Vec<&'a str>,
    masked_edges: &'a BTreeSet<usize>,
    masked_text: &'a BTreeSet<usize>,
    subgraph_masked: bool,
}

fn cmd_corrupt(ctx: &mut Ctx, input: Option<&Path>, rates: &Rates) -> Outcome {
    let cfg = config(rates, ctx.seed)?;
    writeln!(ctx.stderr, "seed: {}", cfg.seed)?;
    let docs = load_corpus(ctx, input)?;
    let lines = par_map(ctx.jobs, &docs, |(index, doc)| -> Result<String, Failure> {
        let text = text_of(doc);
        let mut ops = Corruption::graph_ops(&cfg).to_vec();
        if text.is_some() {
            ops.push(Corruption::Text { rate: cfg.text_rate });
        }
        let mut rng = example_rng(cfg.seed, *index as u64);
        let c = compose(Some(&doc.graph), text.as_deref().map(|t| t.as_slice()), &ops, &mut rng)?;
        let line = CorruptLine {
            id: label(*index, doc),
            graph: c.graph.as_ref().map(TokenSeq::to_strings).unwrap_or_default(),
            text: c.text.as_ref().map(TokenSeq::to_strings),
            masked_nodes: c.record.masked_node_ids.iter().map(|n| n.as_str()).collect(),
            masked_edges: &c.record.masked_edge_indices,
            masked_text: &c.record.masked_text_positions,
            subgraph_masked: c.record.removed_subgraph.is_some(),
        };
        Ok(serde_json::to_string(&line)?)
    });
    for line in lines {
        writeln!(ctx.stdout, "{}", line?)?;
    }
    Ok(())
}

fn cmd_build_tasks(ctx: &mut Ctx, input: Option<&Path>, rates: &Rates, total: Option<u64>, tasks: &str) -> Outcome {
    let cfg = config(rates, ctx.seed)?;
    let tasks = parse_task_set(tasks)?;
    writeln!(ctx.stderr, "seed: {}", cfg.seed)?;
    let docs = load_corpus(ctx, input)?;
    let schedule = MaskSchedule::new(total.unwrap_or(docs.len().max(1) as u64))?;
    let lenient = ctx.mode == ParseMode::Lenient;
    let results = par_map(ctx.jobs, &docs, |(index, doc)| {
        let text = text_of(doc).unwrap_or_default();
        build_pair(*index, &text, &doc.graph, &schedule, &cfg, &tasks)
    });
    for result in results {
        match result {
            Ok(samples) => {
                for s in samples {
                    writeln!(ctx.stdout, "{}", s.to_json_line())?;
                }
            }
            Err(e) if lenient => writeln!(ctx.stderr, "warning: {}; skipped", e)?,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn cmd_vocab(
    ctx: &mut Ctx,
    input: Option<&Path>,
    base_file: Option<&Path>,
    max_pointers: u32,
    output: Option<&Path>,
    partitions: Option<&Path>,
) -> Outcome {
    let docs = load_corpus(ctx, input)?;
    let mut base: Vec<String> = vec!["(".into(), ")".into()];
    if let Some(p) = base_file {
        let text = std::fs::read_to_string(p).map_err(with_path(p))?;
        base.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned));
    }
    let words: BTreeSet<String> =
        docs.iter().filter_map(|(_, d)| text_of(d)).flat_map(|t| t.to_strings()).collect();
    base.extend(words);
    let inventory = collect_symbols(docs.iter().map(|(_, d)| d));
    let vocab = build_vocabulary(&base, &inventory, max_pointers)?;
    match output {
        Some(p) => {
            let mut f = io::BufWriter::new(File::create(p).map_err(with_path(p))?);
            vocab.write_tokens(&mut f).map_err(with_path(p))?;
            f.flush().map_err(with_path(p))?;
        }
        None => vocab.write_tokens(ctx.stdout)?,
    }
    let sidecar = partitions
        .map(Path::to_path_buf)
        .or_else(|| output.map(|p| PathBuf::from(format!("{}.partitions.json", p.display()))));
    if let Some(p) = sidecar {
        std::fs::write(&p, vocab.partitions_json() + "\n").map_err(with_path(&p))?;
    }
    writeln!(ctx.stderr, "{} tokens", vocab.len())?;
    Ok(())
}

fn cmd_smatch(ctx: &mut Ctx, predicted: &Path, gold: &Path, restarts: usize) -> Outcome {
    let test = load_corpus(ctx, Some(predicted))?;
    let reference = load_corpus(ctx, Some(gold))?;
    if test.len() != reference.len() {
        return Err(Failure(format!("{} predicted graphs but {} gold graphs", test.len(), reference.len())));
    }
    let pairs: Vec<_> = test.iter().zip(&reference).collect();
    let scores = par_map(ctx.jobs, &pairs, |((_, t), (_, g))| fine_grained(&t.graph, &g.graph, restarts));
    let mut total = FineGrained::default();
    for s in scores {
        total.add(&s?);
    }
    writeln!(ctx.stdout, "{}", serde_json::to_string_pretty(&total)?)?;
    Ok(())
}

fn cmd_bleu(ctx: &mut Ctx, hypotheses: &Path, references: &Path) -> Outcome {
    let read = |p: &Path| -> Result<Vec<Vec<String>>, Failure> {
        let text = std::fs::read_to_string(p).map_err(with_path(p))?;
        Ok(text.lines().map(|l| l.split_whitespace().map(str::to_owned).collect()).collect())
    };
    let score = corpus_bleu(&read(hypotheses)?, &read(references)?)?;
    writeln!(ctx.stdout, "{}", serde_json::to_string_pretty(&score)?)?;
    Ok(())
}
