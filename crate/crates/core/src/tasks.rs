//! Training-sample construction for the unified text+graph input format.
//!
//! Every input is `<s> text </s> <g> graph </g>`; a side can be original,
//! masked, or empty (a lone `[mask]` between its markers). The target is the
//! uncorrupted text or graph.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::corrupt::{compose, CorruptError, Corruption, CorruptionConfig, CorruptionRecord};
use crate::graph::AmrGraph;
use crate::linearize::{linearize, Token, TokenSeq};

/// How one side of the input is presented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Original,
    Masked,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Text,
    Graph,
}

/// The eight unified pre-training and fine-tuning formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskTag {
    /// Masked text, empty graph, predict text.
    MaskedTextEmptyGraphToText,
    /// Empty text, masked graph, predict graph.
    EmptyTextMaskedGraphToGraph,
    /// Masked text with the full graph, predict text. Dynamic rate.
    MaskedTextGraphToText,
    /// Full text with a masked graph, predict graph. Dynamic rate.
    TextMaskedGraphToGraph,
    MaskedTextMaskedGraphToText,
    MaskedTextMaskedGraphToGraph,
    /// Generation fine-tuning: empty text, full graph, predict text.
    EmptyTextGraphToText,
    /// Parsing fine-tuning: full text, empty graph, predict graph.
    TextEmptyGraphToGraph,
}

impl TaskTag {
    pub const ALL: [TaskTag; 8] = [
        TaskTag::MaskedTextEmptyGraphToText,
        TaskTag::EmptyTextMaskedGraphToGraph,
        TaskTag::MaskedTextGraphToText,
        TaskTag::TextMaskedGraphToGraph,
        TaskTag::MaskedTextMaskedGraphToText,
        TaskTag::MaskedTextMaskedGraphToGraph,
        TaskTag::EmptyTextGraphToText,
        TaskTag::TextEmptyGraphToGraph,
    ];

    pub const PRETRAINING: [TaskTag; 6] = [
        TaskTag::MaskedTextEmptyGraphToText,
        TaskTag::EmptyTextMaskedGraphToGraph,
        TaskTag::MaskedTextGraphToText,
        TaskTag::TextMaskedGraphToGraph,
        TaskTag::MaskedTextMaskedGraphToText,
        TaskTag::MaskedTextMaskedGraphToGraph,
    ];

    pub const FINETUNING: [TaskTag; 2] = [TaskTag::EmptyTextGraphToText, TaskTag::TextEmptyGraphToGraph];

    pub fn name(self) -> &'static str {
        match self {
            TaskTag::MaskedTextEmptyGraphToText => "mt_eg2t",
            TaskTag::EmptyTextMaskedGraphToGraph => "et_mg2g",
            TaskTag::MaskedTextGraphToText => "mt_g2t",
            TaskTag::TextMaskedGraphToGraph => "t_mg2g",
            TaskTag::MaskedTextMaskedGraphToText => "mt_mg2t",
            TaskTag::MaskedTextMaskedGraphToGraph => "mt_mg2g",
            TaskTag::EmptyTextGraphToText => "et_g2t",
            TaskTag::TextEmptyGraphToGraph => "t_eg2g",
        }
    }

    pub fn text_side(self) -> Side {
        let name = self.name();
        if name.starts_with("mt_") {
            Side::Masked
        } else if name.starts_with("et_") {
            Side::Empty
        } else {
            Side::Original
        }
    }

    pub fn graph_side(self) -> Side {
        let graph = self.name().split('_').nth(1).unwrap();
        if graph.starts_with("mg") {
            Side::Masked
        } else if graph.starts_with("eg") {
            Side::Empty
        } else {
            Side::Original
        }
    }

    pub fn target(self) -> Target {
        if self.name().ends_with("2t") {
            Target::Text
        } else {
            Target::Graph
        }
    }

    /// Tasks whose masked side follows the step-dependent rate.
    pub fn uses_dynamic_rate(self) -> bool {
        matches!(self, TaskTag::MaskedTextGraphToText | TaskTag::TextMaskedGraphToGraph)
    }

    pub fn needs_text(self) -> bool {
        self.text_side() != Side::Empty || self.target() == Target::Text
    }

    pub fn needs_graph(self) -> bool {
        self.graph_side() != Side::Empty || self.target() == Target::Graph
    }

    fn stream(self) -> u64 {
        TaskTag::ALL.iter().position(|&t| t == self).unwrap() as u64
    }
}

impl fmt::Display for TaskTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskTag {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, TaskError> {
        TaskTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| TaskError::UnknownTask(s.to_owned()))
    }
}

impl Serialize for TaskTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Parses `all` / `pretrain` (the six pre-training tasks), `finetune` (the
/// two fine-tuning tasks), `every` (all eight) or a comma-separated list of
/// task names. Duplicates are removed, order is kept.
pub fn parse_task_set(spec: &str) -> Result<Vec<TaskTag>, TaskError> {
    let mut out: Vec<TaskTag> = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let tags: Vec<TaskTag> = match part {
            "all" | "pretrain" => TaskTag::PRETRAINING.to_vec(),
            "finetune" => TaskTag::FINETUNING.to_vec(),
            "every" => TaskTag::ALL.to_vec(),
            name => vec![name.parse()?],
        };
        for t in tags {
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    if out.is_empty() {
        return Err(TaskError::NoTasks);
    }
    Ok(out)
}

/// Linearly increasing masking rate `0.1 + 0.75 * t / T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaskSchedule {
    total_steps: u64,
}

impl MaskSchedule {
    pub const INITIAL_RATE: f64 = 0.1;
    pub const SLOPE: f64 = 0.75;

    pub fn new(total_steps: u64) -> Result<Self, TaskError> {
        if total_steps == 0 {
            return Err(TaskError::ZeroSteps);
        }
        Ok(MaskSchedule { total_steps })
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }
}

pub fn schedule_rate(step: u64, schedule: &MaskSchedule) -> Result<f64, TaskError> {
    if step > schedule.total_steps {
        return Err(TaskError::StepOutOfRange { step, total: schedule.total_steps });
    }
    Ok(MaskSchedule::INITIAL_RATE + MaskSchedule::SLOPE * step as f64 / schedule.total_steps as f64)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaskError {
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("no tasks selected")]
    NoTasks,
    #[error("total steps must be positive")]
    ZeroSteps,
    #[error("step {step} is outside [0, {total}]")]
    StepOutOfRange { step: u64, total: u64 },
    #[error("task {tag} needs a {missing}")]
    TagInputMismatch { tag: TaskTag, missing: &'static str },
    #[error(transparent)]
    Corrupt(#[from] CorruptError),
    #[error("pair {index}: {source}")]
    Pair {
        index: usize,
        #[source]
        source: Box<TaskError>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskSample {
    pub tag: TaskTag,
    pub input: TokenSeq,
    pub output: TokenSeq,
    pub step: u64,
    pub record: CorruptionRecord,
}

#[derive(Serialize)]
struct SampleLine<'a> {
    task: &'a str,
    step: u64,
    input: Vec<String>,
    output: Vec<String>,
}

impl TaskSample {
    /// One JSON Lines record: `{"task", "step", "input", "output"}`.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&SampleLine {
            task: self.tag.name(),
            step: self.step,
            input: self.input.to_strings(),
            output: self.output.to_strings(),
        })
        .expect("plain data serializes")
    }
}

fn wrap(start: Token, body: impl IntoIterator<Item = Token>, end: Token) -> Vec<Token> {
    let mut v = vec![start];
    v.extend(body);
    v.push(end);
    v
}

/// Generator for the sample of `tag` built from pair `index`.
pub fn sample_rng(seed: u64, index: u64, tag: TaskTag) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index);
    rng.set_stream(tag.stream());
    rng
}

/// Builds one sample of `tag`. `text` holds whitespace-tokenized words.
pub fn build_sample(
    tag: TaskTag,
    text: &[Token],
    graph: Option<&AmrGraph>,
    step: u64,
    schedule: &MaskSchedule,
    config: &CorruptionConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TaskSample, TaskError> {
    let rate = schedule_rate(step, schedule)?;
    config.check()?;
    if tag.needs_text() && text.is_empty() {
        return Err(TaskError::TagInputMismatch { tag, missing: "text" });
    }
    let graph = match (tag.needs_graph(), graph) {
        (true, None) => return Err(TaskError::TagInputMismatch { tag, missing: "graph" }),
        (true, Some(g)) => Some(g),
        (false, _) => None,
    };

    let mut ops = Vec::new();
    if tag.text_side() == Side::Masked {
        let text_rate = if tag.uses_dynamic_rate() { rate } else { config.text_rate };
        ops.push(Corruption::Text { rate: text_rate });
    }
    if tag.graph_side() == Side::Masked {
        let (node_rate, edge_rate) =
            if tag.uses_dynamic_rate() { (rate, rate) } else { (config.node_rate, config.edge_rate) };
        ops.push(Corruption::Subgraph { probability: config.subgraph_rate });
        ops.push(Corruption::NodesEdges { node_rate, edge_rate });
    }
    let corrupted = compose(graph, Some(text).filter(|t| !t.is_empty()), &ops, rng)?;
    let original_graph = graph.map(linearize).transpose().map_err(CorruptError::from)?;

    let text_body: Vec<Token> = match tag.text_side() {
        Side::Empty => vec![Token::Mask],
        Side::Masked => corrupted.text.clone().unwrap().0,
        Side::Original => text.to_vec(),
    };
    let graph_body: Vec<Token> = match tag.graph_side() {
        Side::Empty => vec![Token::Mask],
        Side::Masked => corrupted.graph.clone().unwrap().0,
        Side::Original => original_graph.clone().unwrap().0,
    };
    let mut input = wrap(Token::TextStart, text_body, Token::TextEnd);
    input.extend(wrap(Token::GraphStart, graph_body, Token::GraphEnd));
    let output = match tag.target() {
        Target::Text => wrap(Token::TextStart, text.iter().cloned(), Token::TextEnd),
        Target::Graph => wrap(Token::GraphStart, original_graph.unwrap().0, Token::GraphEnd),
    };
    Ok(TaskSample {
        tag,
        input: TokenSeq(input),
        output: TokenSeq(output),
        step,
        record: corrupted.record,
    })
}

/// All samples for pair `index` (whose step is `index`), one per task.
pub fn build_pair(
    index: usize,
    text: &[Token],
    graph: &AmrGraph,
    schedule: &MaskSchedule,
    config: &CorruptionConfig,
    tasks: &[TaskTag],
) -> Result<Vec<TaskSample>, TaskError> {
    tasks
        .iter()
        .map(|&tag| {
            let mut rng = sample_rng(config.seed, index as u64, tag);
            build_sample(tag, text, Some(graph), index as u64, schedule, config, &mut rng)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| TaskError::Pair { index, source: Box::new(e) })
}

/// Streams samples for every pair and selected task. The step counter
/// advances once per pair. The stream ends after the first error.
pub fn build_corpus<'a, I>(
    pairs: I,
    schedule: MaskSchedule,
    config: CorruptionConfig,
    tasks: &'a [TaskTag],
) -> Result<impl Iterator<Item = Result<TaskSample, TaskError>> + 'a, TaskError>
where
    I: IntoIterator<Item = (TokenSeq, AmrGraph)>,
    I::IntoIter: 'a,
{
    if tasks.is_empty() {
        return Err(TaskError::NoTasks);
    }
    config.check()?;
    let mut failed = false;
    Ok(pairs
        .into_iter()
        .enumerate()
        .map_while(move |(index, (text, graph))| {
            if failed {
                return None;
            }
            match build_pair(index, &text, &graph, &schedule, &config, tasks) {
                Ok(samples) => Some(samples.into_iter().map(Ok).collect::<Vec<_>>()),
                Err(e) => {
                    failed = true;
                    Some(vec![Err(e)])
                }
            }
        })
        .flatten())
}

/// Writes samples as JSON Lines.
pub fn write_jsonl<'s, W: Write>(out: &mut W, samples: impl IntoIterator<Item = &'s TaskSample>) -> io::Result<()> {
    for s in samples {
        writeln!(out, "{}", s.to_json_line())?;
    }
    Ok(())
}
