use std::collections::{HashMap, HashSet};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nightjar::config::{Config, CONFIG_ENV};
use nightjar::corpus::{self, Annotation};
use nightjar::error::{Error, Result};
use nightjar::eval::evaluate_corpus;
use nightjar::masking::{resolve_spans, Masker, PolicyPreset};
use nightjar::model::{Detection, Tweet};
use nightjar::pipeline::{map_ordered, Pipeline};
use nightjar::recognizer::{ExternalRecognizer, GazetteerRecognizer, Recognizer, RecognizerHandle};
use nightjar::synth::{generate_synthetic_corpus, InjectionRates};

#[derive(Parser)]
#[command(name = "nightjar", version, about = "De-identify tweets and score detectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write resolved detections for every tweet.
    Detect(DetectArgs),
    /// Write masked tweets.
    Mask(MaskArgs),
    /// Score predictions against gold annotations.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic gold-labeled corpus.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Common {
    /// Tweets, one JSON object per line.
    #[arg(long)]
    input: PathBuf,
    /// TOML configuration.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// `builtin`, `none`, or `external:COMMAND`, comma separated. An
    /// `external:` item takes the rest of the value, commas included.
    #[arg(long, default_value = "builtin")]
    recognizers: Vec<String>,
    /// Keep only tweets with this language code.
    #[arg(long)]
    lang: Option<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MaskArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
    /// default, placeholder, delete or synthetic.
    #[arg(long)]
    policy: Option<PolicyPreset>,
    /// Mask these detections instead of running the detectors.
    #[arg(long)]
    detections: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Tweets file, needed when annotation records carry no text.
    #[arg(long)]
    tweets: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Overrides such as `URL=0.5,PERSON=0,VERIFIED=0.1`.
    #[arg(long, default_value = "")]
    rates: String,
    #[arg(long)]
    out_tweets: PathBuf,
    #[arg(long)]
    out_gold: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Detect(a) => detect(a),
        Command::Mask(a) => mask(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nightjar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn recognizer_specs(values: &[String]) -> Vec<String> {
    let mut specs = Vec::new();
    for value in values {
        let mut rest = value.as_str();
        while !rest.is_empty() {
            let item = rest.trim_start();
            if item.starts_with("external:") {
                specs.push(item.to_string());
                break;
            }
            let (head, tail) = item.split_once(',').unwrap_or((item, ""));
            if !head.trim().is_empty() {
                specs.push(head.trim().to_string());
            }
            rest = tail;
        }
    }
    specs
}

fn build_recognizers(values: &[String], config: &Config) -> Result<Vec<Box<dyn Recognizer>>> {
    let mut out: Vec<Box<dyn Recognizer>> = Vec::new();
    let mut externals = 0;
    for spec in recognizer_specs(values) {
        match spec.as_str() {
            "none" => {}
            "builtin" => out.push(Box::new(GazetteerRecognizer::new("builtin", config.gazetteer()?))),
            s => match s.strip_prefix("external:") {
                Some(cmd) if !cmd.trim().is_empty() => {
                    externals += 1;
                    let handle = RecognizerHandle {
                        label_map: config.label_map(),
                        ..RecognizerHandle::external(format!("ext{externals}"))
                    };
                    out.push(Box::new(ExternalRecognizer::spawn(handle, cmd, config.adapter_timeout())?));
                }
                _ => return Err(Error::Config(format!("unknown recognizer `{s}`"))),
            },
        }
    }
    Ok(out)
}

fn load_tweets(common: &Common) -> Result<Vec<Tweet>> {
    let tweets = corpus::read_tweets_path(&common.input)?;
    Ok(match &common.lang {
        Some(code) => corpus::filter_language(tweets, code),
        None => tweets,
    })
}

fn with_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => write(&mut corpus::create(p)?),
        None => write(&mut io::stdout().lock()),
    }
}

fn detect(args: DetectArgs) -> Result<()> {
    let c = &args.common;
    let config = Config::load_or_default(c.config.as_deref())?;
    let pipeline = Pipeline::new(config.detectors()?, build_recognizers(&c.recognizers, &config)?)?;
    let tweets = load_tweets(c)?;
    let detections = pipeline.detect_corpus(&tweets, c.jobs.into())?;
    let results: Vec<(Tweet, Vec<Detection>)> = tweets.into_iter().zip(detections).collect();
    with_output(c.output.as_deref(), |w| corpus::write_detections(&results, w))
}

fn mask(args: MaskArgs) -> Result<()> {
    let c = &args.common;
    let config = Config::load_or_default(c.config.as_deref())?;
    let masker = Masker::new(config.policy(args.seed, args.policy), config.pool()?)?;
    let tweets = load_tweets(c)?;
    let masked = match &args.detections {
        Some(path) => {
            let records = corpus::read_annotations_path(path)?;
            let by_id = index_records(&tweets, &records)?;
            map_ordered(&tweets, c.jobs.into(), |t| {
                let dets = match by_id.get(t.id.as_str()) {
                    Some(r) => resolve_spans(&r.to_detections(t, "file")?),
                    None => Vec::new(),
                };
                masker.mask_tweet(t, &dets)
            })?
        }
        None => {
            let pipeline = Pipeline::new(config.detectors()?, build_recognizers(&c.recognizers, &config)?)?;
            pipeline.mask_corpus(&masker, &tweets, c.jobs.into())?
        }
    };
    with_output(c.output.as_deref(), |w| corpus::write_masked(&masked, w))
}

// Records by tweet id; every record must name a tweet in `tweets`.
fn index_records<'a>(tweets: &[Tweet], records: &'a [Annotation]) -> Result<HashMap<&'a str, &'a Annotation>> {
    let known: HashSet<&str> = tweets.iter().map(|t| t.id.as_str()).collect();
    records
        .iter()
        .map(|r| {
            if known.contains(r.tweet_id.as_str()) {
                Ok((r.tweet_id.as_str(), r))
            } else {
                Err(Error::UnknownTweet(r.tweet_id.clone()))
            }
        })
        .collect()
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let tweets = args.tweets.as_deref().map(corpus::read_tweets_path).transpose()?;
    let gold_records = corpus::read_annotations_path(&args.gold)?;
    let gold = corpus::join_annotations(tweets.as_deref(), &gold_records)?;
    let pred = corpus::read_annotations_path(&args.pred)?;
    let texts: Vec<Tweet> = gold.iter().map(|g| g.tweet.clone()).collect();
    let by_id = index_records(&texts, &pred)?;
    for t in &texts {
        if let Some(p) = by_id.get(t.id.as_str()) {
            p.to_detections(t, "file")?;
        }
    }
    let report = evaluate_corpus(&gold, &pred)?;
    if let Some(path) = &args.report {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::Io {
            context: path.display().to_string(),
            source: e,
        })?;
    }
    print!("{}", report.to_table());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let rates: InjectionRates = args.rates.parse()?;
    let corpus = generate_synthetic_corpus(args.seed, args.n, &rates)?;
    let tweets: Vec<Tweet> = corpus.iter().map(|a| a.tweet.clone()).collect();
    let gold: Vec<Annotation> = corpus.iter().map(Annotation::from_gold).collect();
    corpus::write_tweets(&tweets, corpus::create(&args.out_tweets)?)?;
    corpus::write_annotations(&gold, corpus::create(&args.out_gold)?)
}
