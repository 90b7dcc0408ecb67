//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use thiserror::Error;

use crate::corpusio::{self, CaseEnding, CorpusError, EvalRecord, Report, ReportFormat};
use crate::metrics::{self, Condition, ConditionLabel, CoverageMode, MetricError};
use crate::orthography::{normalize, parse, OrthographyError, ParsePolicy, SentenceForm};
use crate::restorer::{LexiconModel, ModelError};

pub const LOG_ENV: &str = "TASHKEEL_EVAL_LOG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tashkeel-eval", version, about = "Diacritic-aware evaluation for Arabic ASR and text diacritizers")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Report output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Markdown, global = true)]
    pub format: FormatArg,
    /// Reject malformed diacritic sequences (default).
    #[arg(long, global = true, conflicts_with = "lenient")]
    pub strict: bool,
    /// Drop stray marks and repair conflicting vowels instead of failing.
    #[arg(long, global = true)]
    pub lenient: bool,
    #[arg(long, value_enum, default_value_t = CoverageArg::Marks, global = true)]
    pub coverage_mode: CoverageArg,
    /// Precision/DER variants to print.
    #[arg(long, value_enum, default_value_t = CaseArg::Both, global = true)]
    pub case_ending: CaseArg,
    /// Worker threads for per-record scoring.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..), global = true)]
    pub jobs: u16,
}

impl GlobalOpts {
    fn policy(&self) -> ParsePolicy {
        if self.lenient {
            ParsePolicy::Lenient
        } else {
            ParsePolicy::Strict
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Markdown,
    Tsv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Markdown => ReportFormat::Markdown,
            FormatArg::Tsv => ReportFormat::Tsv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoverageArg {
    Marks,
    MarkedLetters,
}

impl From<CoverageArg> for CoverageMode {
    fn from(c: CoverageArg) -> Self {
        match c {
            CoverageArg::Marks => CoverageMode::Marks,
            CoverageArg::MarkedLetters => CoverageMode::MarkedLetters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    With,
    Without,
    Both,
}

impl From<CaseArg> for CaseEnding {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::With => CaseEnding::With,
            CaseArg::Without => CaseEnding::Without,
            CaseArg::Both => CaseEnding::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    Ud,
    Md,
    Ad,
    Other,
}

impl From<ConditionArg> for ConditionLabel {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::Ud => ConditionLabel::Undiacritized,
            ConditionArg::Md => ConditionLabel::ManuallyDiacritized,
            ConditionArg::Ad => ConditionLabel::AutomaticallyDiacritized,
            ConditionArg::Other => ConditionLabel::Other,
        }
    }
}

/// Either a pair of parallel text files or one JSONL file.
#[derive(Debug, Args)]
pub struct PairedInput {
    #[arg(long = "ref", alias = "gold", value_name = "FILE", requires = "hyp", conflicts_with = "jsonl")]
    pub reference: Option<PathBuf>,
    #[arg(long, alias = "pred", value_name = "FILE", requires = "reference")]
    pub hyp: Option<PathBuf>,
    /// JSONL records with `id`, `ref` and `hyp` fields.
    #[arg(long, value_name = "FILE", required_unless_present = "reference")]
    pub jsonl: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Remove all diacritics, one line at a time.
    Strip {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print letter, mark and word counts with diacritic coverage.
    Stats { input: PathBuf },
    /// Score ASR hypotheses against references.
    EvalAsr {
        #[command(flatten)]
        input: PairedInput,
        #[arg(long, value_enum, default_value_t = ConditionArg::Other)]
        condition: ConditionArg,
        /// Free-form system tag shown in table output.
        #[arg(long)]
        tag: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score a text diacritizer's predictions against gold text.
    EvalDiac {
        #[command(flatten)]
        input: PairedInput,
        #[arg(long, default_value = "diacritizer")]
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train a lexicon diacritizer on diacritized text.
    Train {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Diacritize text with a trained lexicon.
    Restore {
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Strip and re-diacritize the hypotheses with a lexicon, then score.
    Pipeline {
        #[arg(long = "ref", value_name = "FILE")]
        reference: PathBuf,
        #[arg(long, value_name = "FILE")]
        hyp: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Re-diacritize the reference instead and score the hypotheses
        /// as given.
        #[arg(long)]
        ad: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: OrthographyError,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("record {id}: predicted base text differs from gold")]
    BaseTextMismatch { id: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("input file not found: {}", path.display())))
    }
}

fn paired_paths(p: &PairedInput) -> Vec<&Path> {
    [&p.reference, &p.hyp, &p.jsonl]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path)
        .collect()
}

fn paths_to_check(command: &Command) -> Vec<&Path> {
    match command {
        Command::Strip { input, .. } | Command::Stats { input } => vec![input],
        Command::EvalAsr { input, .. } | Command::EvalDiac { input, .. } => paired_paths(input),
        Command::Train { corpus, .. } => vec![corpus],
        Command::Restore { model, input, .. } => vec![model, input],
        Command::Pipeline {
            reference, hyp, model, ..
        } => vec![reference, hyp, model],
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn parse_line(text: &str, policy: ParsePolicy, context: impl FnOnce() -> String) -> Result<SentenceForm> {
    parse(&normalize(text), policy).map_err(|source| CliError::Parse {
        context: context(),
        source,
    })
}

fn parse_lines(lines: &[String], policy: ParsePolicy, path: &Path) -> Result<Vec<SentenceForm>> {
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| parse_line(l, policy, || format!("{}: line {}", path.display(), i + 1)))
        .collect()
}

/// Parses both sides of each record. Records without a hypothesis get an
/// empty one.
fn parse_records(records: &[EvalRecord], policy: ParsePolicy) -> Result<(Vec<SentenceForm>, Vec<SentenceForm>)> {
    let mut refs = Vec::with_capacity(records.len());
    let mut hyps = Vec::with_capacity(records.len());
    for r in records {
        refs.push(parse_line(&r.reference, policy, || format!("record {} (ref)", r.id))?);
        let hyp = r.hyp.as_deref().unwrap_or("");
        hyps.push(parse_line(hyp, policy, || format!("record {} (hyp)", r.id))?);
    }
    Ok((refs, hyps))
}

fn load_paired(input: &PairedInput) -> Result<Vec<EvalRecord>> {
    let records = match (&input.reference, &input.hyp, &input.jsonl) {
        (Some(r), Some(h), None) => corpusio::load_parallel(r, h)?,
        (None, None, Some(j)) => corpusio::load_jsonl(j)?,
        _ => return Err(CliError::Usage("give either --ref/--hyp or --jsonl".into())),
    };
    corpusio::check_references(&records)?;
    debug!("loaded {} records", records.len());
    Ok(records)
}

fn load_model(path: &Path) -> Result<LexiconModel> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(LexiconModel::load(&bytes)?)
}

fn with_pool<T: Send>(jobs: u16, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("could not start {jobs} workers ({e}); scoring serially");
            f()
        }
    }
}

fn render_lines(sentences: &[SentenceForm]) -> Vec<u8> {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.render());
        out.push('\n');
    }
    out.into_bytes()
}

fn emit(report: Report, opts: &GlobalOpts, output: Option<&Path>) -> Result<()> {
    let bytes = corpusio::emit_report(&report, opts.format.into(), opts.case_ending.into());
    write_output(output, &bytes)
}

fn cmd_strip(opts: &GlobalOpts, input: &Path, output: Option<&Path>) -> Result<()> {
    let lines = corpusio::load_lines(input)?;
    let parsed = parse_lines(&lines, opts.policy(), input)?;
    let stripped: Vec<_> = parsed.iter().map(SentenceForm::strip).collect();
    write_output(output, &render_lines(&stripped))
}

fn cmd_stats(opts: &GlobalOpts, input: &Path) -> Result<()> {
    let lines = corpusio::load_lines(input)?;
    let parsed = parse_lines(&lines, opts.policy(), input)?;
    let mode: CoverageMode = opts.coverage_mode.into();
    let coverage = metrics::coverage(&parsed, mode)?;
    let counts = metrics::corpus_counts(&parsed);
    let words: usize = parsed.iter().map(|s| s.words().len()).sum();
    let text = match opts.format {
        FormatArg::Json => {
            let value = serde_json::json!({
                "lines": parsed.len(),
                "words": words,
                "letters": counts.letters,
                "marks": counts.marks,
                "marked_letters": counts.marked_letters,
                "coverage_mode": mode,
                "coverage": coverage,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).expect("json"))
        }
        _ => format!(
            "lines\t{}\nwords\t{words}\nletters\t{}\nmarks\t{}\ncoverage\t{:.2}%\n",
            parsed.len(),
            counts.letters,
            counts.marks,
            coverage * 100.0
        ),
    };
    write_output(None, text.as_bytes())
}

fn cmd_eval_asr(
    opts: &GlobalOpts,
    input: &PairedInput,
    condition: Condition,
    output: Option<&Path>,
) -> Result<()> {
    let records = load_paired(input)?;
    let (refs, hyps) = parse_records(&records, opts.policy())?;
    let mode = opts.coverage_mode.into();
    let report = with_pool(opts.jobs, || metrics::evaluate_asr(&refs, &hyps, condition, mode))?;
    emit(report.into(), opts, output)
}

fn diacritizer_report(
    opts: &GlobalOpts,
    records: &[EvalRecord],
    gold: &[SentenceForm],
    predicted: &[SentenceForm],
    name: &str,
) -> Result<Report> {
    let mode = opts.coverage_mode.into();
    let report = with_pool(opts.jobs, || metrics::evaluate_diacritizer(gold, predicted, name, mode));
    match report {
        Ok(r) => Ok(r.into()),
        Err(MetricError::BaseTextMismatch { record }) => Err(CliError::BaseTextMismatch {
            id: records[record].id.clone(),
        }),
        Err(e) => Err(e.into()),
    }
}

fn cmd_eval_diac(opts: &GlobalOpts, input: &PairedInput, name: &str, output: Option<&Path>) -> Result<()> {
    let records = load_paired(input)?;
    let (gold, predicted) = parse_records(&records, opts.policy())?;
    let report = diacritizer_report(opts, &records, &gold, &predicted, name)?;
    emit(report, opts, output)
}

fn cmd_train(opts: &GlobalOpts, corpus: &Path, output: &Path) -> Result<()> {
    let lines = corpusio::load_lines(corpus)?;
    let parsed = parse_lines(&lines, opts.policy(), corpus)?;
    let model = LexiconModel::train(&parsed)?;
    let stats = model.stats();
    info!(
        "trained on {} lines, {} tokens, {} keys, ambiguity {:.2}%",
        parsed.len(),
        stats.word_tokens,
        stats.unique_forms,
        stats.ambiguity_rate * 100.0
    );
    write_output(Some(output), model.save().as_bytes())
}

fn cmd_restore(opts: &GlobalOpts, model: &Path, input: &Path, output: Option<&Path>) -> Result<()> {
    let model = load_model(model)?;
    let lines = corpusio::load_lines(input)?;
    let parsed = parse_lines(&lines, opts.policy(), input)?;
    let restored: Vec<_> = parsed.iter().map(|s| model.restore(s)).collect();
    write_output(output, &render_lines(&restored))
}

fn cmd_pipeline(
    opts: &GlobalOpts,
    reference: &Path,
    hyp: &Path,
    model: &Path,
    ad: bool,
    output: Option<&Path>,
) -> Result<()> {
    let model = load_model(model)?;
    let records = corpusio::load_parallel(reference, hyp)?;
    corpusio::check_references(&records)?;
    let (mut refs, mut hyps) = parse_records(&records, opts.policy())?;
    let condition = if ad {
        refs = refs.iter().map(|r| model.restore(&r.strip())).collect();
        Condition::tagged(ConditionLabel::AutomaticallyDiacritized, "AD:lexicon")
    } else {
        hyps = hyps.iter().map(|h| model.restore(&h.strip())).collect();
        Condition::tagged(ConditionLabel::Undiacritized, "UD+lexicon")
    };
    let mode = opts.coverage_mode.into();
    let report = with_pool(opts.jobs, || metrics::evaluate_asr(&refs, &hyps, condition, mode))?;
    emit(report.into(), opts, output)
}

pub fn run(cli: &Cli) -> Result<()> {
    for path in paths_to_check(&cli.command) {
        require_file(path)?;
    }
    let opts = &cli.global;
    match &cli.command {
        Command::Strip { input, output } => cmd_strip(opts, input, output.as_deref()),
        Command::Stats { input } => cmd_stats(opts, input),
        Command::EvalAsr {
            input,
            condition,
            tag,
            output,
        } => {
            let condition = Condition {
                label: (*condition).into(),
                tag: tag.clone(),
            };
            cmd_eval_asr(opts, input, condition, output.as_deref())
        }
        Command::EvalDiac { input, name, output } => cmd_eval_diac(opts, input, name, output.as_deref()),
        Command::Train { corpus, output } => cmd_train(opts, corpus, output),
        Command::Restore { model, input, output } => cmd_restore(opts, model, input, output.as_deref()),
        Command::Pipeline {
            reference,
            hyp,
            model,
            ad,
            output,
        } => cmd_pipeline(opts, reference, hyp, model, *ad, output.as_deref()),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}
