//! Command-line front end. [`run`] is the whole program; `main` only maps
//! its result to an exit status.
//!
//! Exit statuses: 0 success, 1 semantic negative (invalid, countermodel,
//! rejected), 2 usage, file or parse error, 3 resource cap exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::num::NonZeroU64;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::algebra::Ultrafilter;
use crate::frames::{
    correspondence_check, enumerate_frames, fixture, indiscernibility, FrameProperty, FIXTURE_NAMES,
};
use crate::kripke::{
    countermodel_search, frame_validity, Frame, KripkeError, Limits, Model, ModelDocument,
    SearchOutcome,
};
use crate::proofs::{crosscheck_judgment, Derivation, ProofError};
use crate::prop4::{consequence4, Prop4Error};
use crate::syntax::{parse, Formula, ParseError};

/// Environment variable setting the number of worker threads.
pub const THREADS_ENV: &str = "BALLMODAL_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ballmodal",
    version,
    about = "Many-valued modal logic workbench"
)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct RunConfig {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: Format,
    /// Cap on frames enumerated by one search.
    #[arg(long, global = true, default_value = "16777216")]
    max_frames: NonZeroU64,
    /// Cap on valuations enumerated per frame.
    #[arg(long, global = true, default_value = "16777216")]
    max_valuations: NonZeroU64,
    /// Wall-clock budget in seconds.
    #[arg(long, global = true)]
    time_limit: Option<NonZeroU64>,
}

impl RunConfig {
    fn limits(&self) -> Limits {
        Limits {
            max_frames: self.max_frames.get(),
            max_valuations: self.max_valuations.get(),
            deadline: self
                .time_limit
                .map(|s| Instant::now() + Duration::from_secs(s.get())),
        }
    }
}

#[derive(Debug, Args)]
struct UltrafilterArgs {
    /// Designate the up-set of this atom.
    #[arg(long, value_parser = parse_ultrafilter, conflicts_with = "all_ultrafilters")]
    ultrafilter: Option<Ultrafilter>,
    /// Check under every ultrafilter.
    #[arg(long)]
    all_ultrafilters: bool,
}

impl UltrafilterArgs {
    fn selection(&self, default_all: bool) -> Vec<Ultrafilter> {
        match (self.ultrafilter, self.all_ultrafilters) {
            (Some(u), _) => vec![u],
            (None, true) => Ultrafilter::ALL.to_vec(),
            (None, false) if default_all => Ultrafilter::ALL.to_vec(),
            (None, false) => vec![Ultrafilter::default()],
        }
    }
}

fn parse_ultrafilter(s: &str) -> Result<Ultrafilter, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a formula at a world of a model file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        world: String,
        #[arg(long)]
        formula: String,
        /// Override the model's ultrafilter.
        #[arg(long, value_parser = parse_ultrafilter)]
        ultrafilter: Option<Ultrafilter>,
    },
    /// Check validity of a formula on a frame (file or `fixture:NAME`).
    Valid {
        #[arg(long)]
        frame: String,
        #[arg(long)]
        formula: String,
        #[command(flatten)]
        filters: UltrafilterArgs,
    },
    /// Check that a modal-free formula is designated under every 4-valued valuation.
    Taut4 {
        #[arg(long)]
        formula: String,
    },
    /// Check 4-valued consequence from premises to a goal.
    Cons4 {
        #[arg(long, num_args = 0..)]
        premises: Vec<String>,
        #[arg(long)]
        goal: String,
    },
    /// Search for a model of the premises refuting the goal (all ultrafilters by default).
    Search {
        #[arg(long, num_args = 0..)]
        premises: Vec<String>,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value_t = 2)]
        max_worlds: usize,
        #[command(flatten)]
        filters: UltrafilterArgs,
    },
    /// Compare a frame property with validity of a formula on all small frames.
    Correspond {
        #[arg(long)]
        property: FrameProperty,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
        #[command(flatten)]
        filters: UltrafilterArgs,
    },
    /// List every frame with the given number of worlds.
    Enumerate {
        #[arg(long)]
        worlds: usize,
        /// Keep one representative per isomorphism class.
        #[arg(long)]
        up_to_iso: bool,
    },
    /// Compare the two super-out-of-the-bubble fixtures on a formula corpus
    /// (all ultrafilters by default).
    Indiscern {
        #[arg(long, default_value_t = 3)]
        corpus_depth: usize,
        #[command(flatten)]
        filters: UltrafilterArgs,
    },
    /// Check a proof file.
    Checkproof {
        file: PathBuf,
        /// Also search for a countermodel to the final judgment up to this many worlds.
        #[arg(long)]
        crosscheck: Option<usize>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("formula `{text}`: {source}")]
    Parse { text: String, source: ParseError },
    #[error(transparent)]
    Prop4(#[from] Prop4Error),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Kripke(KripkeError::ResourceBound(_))
            | Self::Proof(ProofError::Search(KripkeError::ResourceBound(_))) => EXIT_RESOURCE,
            _ => EXIT_USAGE,
        }
    }
}

type Outcome = Result<u8, CliError>;

/// Runs the program with `args` (including the program name), writing
/// reports to stdout and diagnostics to stderr.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    configure_threads(err);
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads(err: &mut dyn Write) {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return;
    };
    match value.parse::<usize>() {
        Ok(n) if n > 0 => {
            // A second call in the same process keeps the first pool.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => {
            let _ = writeln!(err, "warning: ignoring {THREADS_ENV}={value}");
        }
    }
}

fn formula(text: &str) -> Result<Formula, CliError> {
    parse(text).map_err(|source| CliError::Parse {
        text: text.to_string(),
        source,
    })
}

fn formulas(texts: &[String]) -> Result<Vec<Formula>, CliError> {
    texts.iter().map(|t| formula(t)).collect()
}

fn read_document(path: &str) -> Result<ModelDocument, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_string(),
        source,
    })
}

fn load_frame(spec: &str) -> Result<Frame, CliError> {
    match spec.strip_prefix("fixture:") {
        Some(name) => fixture(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown fixture `{name}` (known: {})",
                FIXTURE_NAMES.join(", ")
            ))
        }),
        None => Ok(read_document(spec)?.to_frame()?),
    }
}

fn model_json(model: &Model) -> String {
    serde_json::to_string_pretty(&model.to_document()).expect("model documents serialize")
}

fn io_ok(r: io::Result<()>) -> Result<(), CliError> {
    r.map_err(|source| CliError::Io {
        path: "<output>".into(),
        source,
    })
}

fn csv_line(fields: &[&str]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let format = cli.config.format;
    let limits = cli.config.limits();
    match &cli.command {
        Command::Eval {
            model,
            world,
            formula: text,
            ultrafilter,
        } => {
            let path = model.to_string_lossy();
            let mut model = read_document(&path)?.to_model()?;
            if let Some(u) = ultrafilter {
                model = model.with_ultrafilter(*u);
            }
            let w = model.frame().world(world)?;
            let f = formula(text)?;
            let value = model.eval(w, &f)?;
            let designated = model.ultrafilter().contains(value);
            let shown = if designated {
                "designated"
            } else {
                "not designated"
            };
            io_ok(match format {
                Format::Human => writeln!(out, "{value}, {shown}"),
                Format::Csv => write!(
                    out,
                    "{}{}",
                    csv_line(&["world", "formula", "value", "designated"]),
                    csv_line(&[
                        world,
                        &f.to_string(),
                        &value.to_string(),
                        &designated.to_string()
                    ])
                ),
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({"world": world, "formula": f.to_string(), "value": value, "designated": designated})
                ),
            })?;
            Ok(EXIT_OK)
        }
        Command::Valid {
            frame,
            formula: text,
            filters,
        } => {
            let frame = load_frame(frame)?;
            let f = formula(text)?;
            let verdicts = frame_validity(&frame, &f, &filters.selection(false), &limits)?;
            let all_valid = verdicts.iter().all(|v| v.valid);
            match format {
                Format::Human => {
                    for v in &verdicts {
                        match &v.countermodel {
                            None => io_ok(writeln!(out, "valid under {}", v.ultrafilter))?,
                            Some((model, w)) => io_ok(writeln!(
                                out,
                                "invalid under {}: fails at {}\n{}",
                                v.ultrafilter,
                                frame.name(*w),
                                model_json(model)
                            ))?,
                        }
                    }
                }
                Format::Csv => {
                    let mut text =
                        csv_line(&["frame_encoding", "ultrafilter", "valid", "failing_world"]);
                    for v in &verdicts {
                        let failing = v
                            .countermodel
                            .as_ref()
                            .map_or(String::new(), |(_, w)| frame.name(*w).to_string());
                        text.push_str(&csv_line(&[
                            &frame.encoding(),
                            v.ultrafilter.name(),
                            &v.valid.to_string(),
                            &failing,
                        ]));
                    }
                    io_ok(write!(out, "{text}"))?;
                }
                Format::Json => {
                    let rows: Vec<_> = verdicts
                        .iter()
                        .map(|v| {
                            json!({
                                "ultrafilter": v.ultrafilter,
                                "valid": v.valid,
                                "countermodel": v.countermodel.as_ref().map(|(m, w)| json!({
                                    "world": frame.name(*w),
                                    "model": m.to_document(),
                                })),
                            })
                        })
                        .collect();
                    io_ok(writeln!(
                        out,
                        "{}",
                        json!({"formula": f.to_string(), "verdicts": rows})
                    ))?;
                }
            }
            Ok(if all_valid { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Taut4 { formula: text } => {
            let f = formula(text)?;
            let result = consequence4(&[], &f)?;
            report_prop4(out, format, &result.witness, "tautology")
        }
        Command::Cons4 { premises, goal } => {
            let premises = formulas(premises)?;
            let goal = formula(goal)?;
            let result = consequence4(&premises, &goal)?;
            report_prop4(out, format, &result.witness, "consequence")
        }
        Command::Search {
            premises,
            goal,
            max_worlds,
            filters,
        } => {
            if !(1..=7).contains(max_worlds) {
                return Err(CliError::Usage(
                    "--max-worlds must be between 1 and 7".into(),
                ));
            }
            let premises = formulas(premises)?;
            let goal = formula(goal)?;
            let outcome = countermodel_search(
                &premises,
                &goal,
                *max_worlds,
                &filters.selection(true),
                &limits,
            )?;
            match &outcome {
                SearchOutcome::Found { model, world } => {
                    let name = model.frame().name(*world);
                    io_ok(match format {
                        Format::Human => writeln!(
                            out,
                            "countermodel found; goal fails at {name} under {}\n{}",
                            model.ultrafilter(),
                            model_json(model)
                        ),
                        Format::Csv => write!(
                            out,
                            "{}{}",
                            csv_line(&["found", "frame_encoding", "ultrafilter", "failing_world"]),
                            csv_line(&[
                                "true",
                                &model.frame().encoding(),
                                model.ultrafilter().name(),
                                name
                            ])
                        ),
                        Format::Json => writeln!(
                            out,
                            "{}",
                            json!({"found": true, "world": name, "model": model.to_document()})
                        ),
                    })?;
                    Ok(EXIT_NEGATIVE)
                }
                SearchOutcome::NoneUpToBound {
                    max_worlds,
                    frames_checked,
                } => {
                    io_ok(match format {
                        Format::Human => writeln!(
                            out,
                            "no countermodel up to {max_worlds} worlds ({frames_checked} frames checked)"
                        ),
                        Format::Csv => write!(
                            out,
                            "{}{}",
                            csv_line(&["found", "max_worlds", "frames_checked"]),
                            csv_line(&["false", &max_worlds.to_string(), &frames_checked.to_string()])
                        ),
                        Format::Json => writeln!(
                            out,
                            "{}",
                            json!({"found": false, "max_worlds": max_worlds, "frames_checked": frames_checked})
                        ),
                    })?;
                    Ok(EXIT_OK)
                }
            }
        }
        Command::Correspond {
            property,
            formula: text,
            max_worlds,
            filters,
        } => {
            if !(1..=7).contains(max_worlds) {
                return Err(CliError::Usage(
                    "--max-worlds must be between 1 and 7".into(),
                ));
            }
            let f = formula(text)?;
            let report = correspondence_check(
                *property,
                &f,
                *max_worlds,
                &filters.selection(false),
                &limits,
            )?;
            io_ok(match format {
                Format::Human => {
                    let mut text = format!("{}\n", report.summary());
                    for m in &report.mismatches {
                        text.push_str(&format!(
                            "  {} {} {}\n",
                            m.direction.name(),
                            m.frame.encoding(),
                            m.witness_text()
                        ));
                    }
                    write!(out, "{text}")
                }
                Format::Csv => write!(out, "{}", report.to_csv()),
                Format::Json => {
                    let mismatches: Vec<_> = report
                        .mismatches
                        .iter()
                        .map(|m| {
                            json!({
                                "frame": m.frame.encoding(),
                                "ultrafilter": m.ultrafilter,
                                "direction": m.direction.name(),
                                "witness": m.witness_text(),
                            })
                        })
                        .collect();
                    writeln!(
                        out,
                        "{}",
                        json!({
                            "property": report.property.name(),
                            "formula": report.formula.to_string(),
                            "max_worlds": report.max_worlds,
                            "frames_per_size": report.frames_per_size,
                            "ultrafilters": report.ultrafilters,
                            "summary": report.summary(),
                            "mismatches": mismatches,
                        })
                    )
                }
            })?;
            Ok(if report.holds() {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            })
        }
        Command::Enumerate { worlds, up_to_iso } => {
            if !(1..=7).contains(worlds) {
                return Err(CliError::Usage("--worlds must be between 1 and 7".into()));
            }
            let count = Frame::count(*worlds);
            if count > limits.max_frames {
                return Err(KripkeError::ResourceBound(format!(
                    "{count} frames exceed the cap of {}",
                    limits.max_frames
                ))
                .into());
            }
            let frames = enumerate_frames(*worlds, *up_to_iso);
            let mut text = String::new();
            match format {
                Format::Human => {
                    for frame in frames {
                        text.push_str(&frame.encoding());
                        text.push('\n');
                    }
                }
                Format::Csv => {
                    text.push_str(&csv_line(&["index", "frame_encoding"]));
                    for frame in frames {
                        text.push_str(&csv_line(&[&frame.index().to_string(), &frame.encoding()]));
                    }
                }
                Format::Json => {
                    let list: Vec<String> = frames.map(|f| f.encoding()).collect();
                    text = format!("{}\n", json!(list));
                }
            }
            io_ok(write!(out, "{text}"))?;
            Ok(EXIT_OK)
        }
        Command::Indiscern {
            corpus_depth,
            filters,
        } => {
            let report = indiscernibility(*corpus_depth, &filters.selection(true), &limits)?;
            let n = report.formulas_checked;
            let agree = report.disagreements.is_empty();
            io_ok(match format {
                Format::Human if agree => writeln!(
                    out,
                    "soob_F and soob_Fprime agree on all {n} corpus formulas"
                ),
                Format::Human => {
                    let mut text = format!(
                        "soob_F and soob_Fprime disagree on {} of {n} (formula, ultrafilter) checks\n",
                        report.disagreements.len()
                    );
                    for d in &report.disagreements {
                        text.push_str(&format!(
                            "  {} under {}: F {} F' {}\n",
                            d.formula, d.ultrafilter, d.valid_on_f, d.valid_on_fprime
                        ));
                    }
                    write!(out, "{text}")
                }
                Format::Csv => {
                    let mut text =
                        csv_line(&["formula", "ultrafilter", "valid_on_F", "valid_on_Fprime"]);
                    for d in &report.disagreements {
                        text.push_str(&csv_line(&[
                            &d.formula.to_string(),
                            d.ultrafilter.name(),
                            &d.valid_on_f.to_string(),
                            &d.valid_on_fprime.to_string(),
                        ]));
                    }
                    write!(out, "{text}")
                }
                Format::Json => {
                    let rows: Vec<_> = report
                        .disagreements
                        .iter()
                        .map(|d| {
                            json!({
                                "formula": d.formula.to_string(),
                                "ultrafilter": d.ultrafilter,
                                "valid_on_F": d.valid_on_f,
                                "valid_on_Fprime": d.valid_on_fprime,
                            })
                        })
                        .collect();
                    writeln!(
                        out,
                        "{}",
                        json!({"formulas_checked": n, "ultrafilters": report.ultrafilters, "disagreements": rows})
                    )
                }
            })?;
            Ok(if agree { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Checkproof { file, crosscheck } => {
            let path = file.to_string_lossy().into_owned();
            let text = fs::read_to_string(file).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let derivation = Derivation::from_json(&text)?;
            check_proof(out, format, &derivation, *crosscheck, &limits)
        }
    }
}

fn report_prop4(
    out: &mut dyn Write,
    format: Format,
    witness: &Option<crate::prop4::Valuation4>,
    noun: &str,
) -> Outcome {
    let witness_text = witness.as_ref().map(|w| w.to_string());
    io_ok(match (format, &witness_text) {
        (Format::Human, None) => writeln!(out, "{noun}"),
        (Format::Human, Some(w)) if w.is_empty() => writeln!(out, "not a {noun}"),
        (Format::Human, Some(w)) => writeln!(out, "not a {noun}; witness {w}"),
        (Format::Csv, _) => write!(
            out,
            "{}{}",
            csv_line(&["holds", "witness"]),
            csv_line(&[
                &witness.is_none().to_string(),
                witness_text.as_deref().unwrap_or("")
            ])
        ),
        (Format::Json, _) => writeln!(
            out,
            "{}",
            json!({"holds": witness.is_none(), "witness": witness_text})
        ),
    })?;
    Ok(if witness.is_none() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn check_proof(
    out: &mut dyn Write,
    format: Format,
    derivation: &Derivation,
    crosscheck: Option<usize>,
    limits: &Limits,
) -> Outcome {
    let judgment = match derivation.check() {
        Ok(j) => j,
        Err(v) => {
            io_ok(match format {
                Format::Human => writeln!(out, "rejected: {v}"),
                Format::Csv => write!(
                    out,
                    "{}{}",
                    csv_line(&["accepted", "step", "rule", "reason"]),
                    csv_line(&["false", &(v.step + 1).to_string(), v.rule.tag(), &v.reason])
                ),
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({"accepted": false, "step": v.step + 1, "rule": v.rule.tag(), "reason": v.reason})
                ),
            })?;
            return Ok(EXIT_NEGATIVE);
        }
    };
    let alarm = match crosscheck {
        None => None,
        Some(n) if !(1..=7).contains(&n) => {
            return Err(CliError::Usage(
                "--crosscheck must be between 1 and 7".into(),
            ))
        }
        Some(n) => match crosscheck_judgment(judgment, n, limits)?.outcome {
            SearchOutcome::Found { model, world } => Some((model, world)),
            SearchOutcome::NoneUpToBound { .. } => None,
        },
    };
    io_ok(match format {
        Format::Human => {
            let mut text = format!("accepted: {judgment}\n");
            if let (Some(n), None) = (crosscheck, &alarm) {
                text.push_str(&format!("no countermodel up to {n} worlds\n"));
            }
            if let Some((model, world)) = &alarm {
                text.push_str(&format!(
                    "soundness alarm: countermodel at {} under {}\n{}\n",
                    model.frame().name(*world),
                    model.ultrafilter(),
                    model_json(model)
                ));
            }
            write!(out, "{text}")
        }
        Format::Csv => write!(
            out,
            "{}{}",
            csv_line(&["accepted", "judgment", "countermodel"]),
            csv_line(&[
                "true",
                &judgment.to_string(),
                &alarm
                    .as_ref()
                    .map_or(String::new(), |(m, _)| m.frame().encoding()),
            ])
        ),
        Format::Json => writeln!(
            out,
            "{}",
            json!({
                "accepted": true,
                "judgment": judgment.to_string(),
                "countermodel": alarm.as_ref().map(|(m, w)| json!({
                    "world": m.frame().name(*w),
                    "model": m.to_document(),
                })),
            })
        ),
    })?;
    Ok(if alarm.is_some() {
        EXIT_NEGATIVE
    } else {
        EXIT_OK
    })
}
