use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dunstan::corpus::{run_all, token_stats, Corpus, Summary};
use dunstan::decoder::{decode_line, enumerate_readings, segment, DecodeOptions, Reading};
use dunstan::encoder::encode_line;
use dunstan::sidecodes::{order_masked_letters, parse_placements, roman_date_candidates};
use dunstan::transcription::{parse_document, serialize};
use dunstan::Codebook;

const EXIT_FIXTURE: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    /// One JSON object per line.
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "dunstan", version, about = "Decode and encode symbol transcriptions")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank readings for every line of a DST file.
    Decode {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        top: usize,
        /// Show the rules applied in each reading.
        #[arg(long)]
        explain: bool,
    },
    /// Turn uppercase words into DST.
    Encode { text: String },
    /// Split a letter string into lexicon words.
    Segment { word: String },
    /// Order masked letters, one `CH,x,y` per line.
    Masked { file: PathBuf },
    /// Date readings of a roman numeral string.
    Romandate { letters: String },
    /// Symbol frequencies of a DST file.
    Stats { file: PathBuf },
    /// Run the fixture corpus.
    Fixtures {
        #[arg(long)]
        filter: Option<String>,
        /// Fixture file to run instead of the shipped corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

/// An input error: reported on stderr, exit 2.
struct Fail(String);

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail(format!("{}: {e}", path.display())))
}

fn emit(format: Format, text: String, value: Value) {
    match format {
        Format::Text => println!("{text}"),
        Format::Structured => println!("{value}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cb = Codebook::shipped();
    match run(&cli, &cb) {
        Ok(code) => code,
        Err(Fail(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: &Cli, cb: &Codebook) -> Result<ExitCode, Fail> {
    let f = cli.format;
    match &cli.command {
        Command::Decode { file, top, explain } => {
            let doc = parse_document(&read(file)?, &cb.table).map_err(|e| Fail(e.to_string()))?;
            for line in &doc.lines {
                let lattice = decode_line(line, DecodeOptions::default(), cb);
                for (i, r) in enumerate_readings(&lattice, *top, cb).iter().enumerate() {
                    print_reading(f, &line.source_tag, i + 1, r, *explain);
                }
            }
        }
        Command::Encode { text } => {
            let text = text.to_uppercase();
            let enc = encode_line(&text, cb);
            let dst = serialize(&enc.line, &cb.table);
            let residual: Vec<&str> = enc.residual.iter().map(|r| &text[r.clone()]).collect();
            let mut out = dst.clone();
            if !residual.is_empty() {
                out.push_str(&format!("\nresidual: {}", residual.join(" ")));
            }
            emit(f, out, json!({ "dst": dst, "residual": residual }));
        }
        Command::Segment { word } => {
            let s = segment(&word.to_uppercase(), &cb.lexicon);
            let text = format!("{} | {}", s.words().join(" "), glosses(&s));
            emit(f, text, json!({
                "input": word,
                "segments": s.segments,
                "lexicon_chars": s.lexicon_chars,
                "opaque_chars": s.opaque_chars,
            }));
        }
        Command::Masked { file } => {
            let letters = parse_placements(&read(file)?).map_err(|e| Fail(e.to_string()))?;
            if letters.is_empty() {
                return Err(Fail(format!("{}: no letters", file.display())));
            }
            let word = order_masked_letters(&letters);
            emit(f, word.clone(), json!({ "word": word }));
        }
        Command::Romandate { letters } => {
            let cands = roman_date_candidates(letters).map_err(|e| Fail(e.to_string()))?;
            for c in cands {
                let terms: Vec<String> = c.terms.iter().map(|(l, v)| format!("{l}{v:+}")).collect();
                emit(
                    f,
                    format!("{} {} {}", c.value, c.interpretation, terms.join(" ")),
                    json!(c),
                );
            }
        }
        Command::Stats { file } => {
            let doc = parse_document(&read(file)?, &cb.table).map_err(|e| Fail(e.to_string()))?;
            let s = token_stats(&doc, &cb.table);
            let mean = s.mean_letters_per_symbol();
            let mut text = format!(
                "symbols {} letters {} mean {}",
                s.symbol_tokens,
                s.letters,
                mean.map_or("-".into(), |m| format!("{m:.3}"))
            );
            for (id, n) in &s.frequencies {
                text.push_str(&format!("\n{} {n}", cb.table.name_of(*id)));
            }
            let freq: serde_json::Map<String, Value> = s
                .frequencies
                .iter()
                .map(|(id, n)| (cb.table.name_of(*id).to_string(), json!(n)))
                .collect();
            emit(f, text, json!({
                "symbol_tokens": s.symbol_tokens,
                "letters": s.letters,
                "mean_letters_per_symbol": mean,
                "frequencies": freq,
                "line_lengths": s.line_lengths,
            }));
        }
        Command::Fixtures { filter, corpus } => {
            let corpus = match corpus {
                Some(p) => Corpus::parse(&read(p)?).map_err(|e| Fail(e.to_string()))?,
                None => Corpus::shipped(),
            };
            let summary = run_all(corpus.fixtures(), filter.as_deref(), cb);
            print_summary(f, &summary);
            if !summary.all_passed() {
                return Ok(ExitCode::from(EXIT_FIXTURE));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn glosses(s: &dunstan::decoder::Segmentation) -> String {
    s.segments
        .iter()
        .map(|g| g.gloss.as_deref().unwrap_or("?"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_reading(f: Format, tag: &str, rank: usize, r: &Reading, explain: bool) {
    let text = format!(
        "{tag}#{rank} | {} | {} | {} | {}",
        r.score,
        r.surface,
        r.segmentation.words().join(" "),
        glosses(&r.segmentation)
    );
    let mut value = json!({
        "tag": tag,
        "rank": rank,
        "score": r.score,
        "surface": r.surface,
        "segmentation": r.segmentation.segments,
    });
    let mut text = text;
    if explain {
        for s in &r.trace.steps {
            text.push_str(&format!(
                "\n    {} {}..{}: {} -> {}",
                s.rule, s.span.start, s.span.end, s.before, s.after
            ));
        }
        value["trace"] = json!(r.trace.steps);
    }
    emit(f, text, value);
}

fn print_summary(f: Format, s: &Summary) {
    for r in &s.results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let ranks: Vec<String> = r
            .ranks
            .iter()
            .map(|x| x.map_or("-".into(), |n| n.to_string()))
            .collect();
        let mut text = format!("{status} {} [{}]", r.id, r.kind);
        if !ranks.is_empty() {
            text.push_str(&format!(" rank {}", ranks.join(",")));
        }
        if let Some(d) = &r.diff {
            text.push_str(&format!("\n    got:  {}\n    diff: {d}", r.got));
        }
        emit(f, text, json!(r));
    }
    emit(
        f,
        format!("{}/{} passed", s.passed, s.total),
        json!({ "passed": s.passed, "total": s.total }),
    );
}
