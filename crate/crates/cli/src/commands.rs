//! Subcommand implementations. Each returns [`Status`]; an `Err` is an
//! environment failure (unreadable input, unwritable output, bind error).

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde_json::json;

use giml_core::diagnostics::count_errors;
use giml_core::gaze::RunHeader;
use giml_core::{
    parse_bytes, registry, replay, translate, validate, CallbackRegistry, Code, Diagnostic, EngineConfig, GimlDocument,
    IdtParams, Language, Severity, TranslateError,
};

use crate::outputs::{write_inputs, write_run, RunData, RunReport, INPUTS};
use crate::server;
use crate::session::{Clock, Session};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
        }
    }
}

pub fn parse_language(s: &str) -> Result<Language, String> {
    s.parse::<Language>().map_err(|e| e.to_string())
}

fn parse_sound(s: &str) -> Result<(String, u64), String> {
    let (name, ms) = s.split_once('=').ok_or_else(|| format!("expected NAME=MS, got `{s}`"))?;
    let ms = ms.trim().parse::<u64>().map_err(|e| format!("bad duration in `{s}`: {e}"))?;
    Ok((name.trim().to_string(), ms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Files or directories (directories contribute their `.giml` and `.xml` files).
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Language of the documents when it cannot be detected.
    #[arg(long, value_parser = parse_language)]
    pub language: Option<Language>,
    /// Directory holding resource files; enables resource checks.
    #[arg(long, env = "GIML_ASSET_ROOT")]
    pub asset_root: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    pub path: PathBuf,
    /// Target language code.
    #[arg(long, value_parser = parse_language)]
    pub to: Language,
    #[arg(long, value_parser = parse_language)]
    pub language: Option<Language>,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub path: PathBuf,
    #[arg(long, value_parser = parse_language)]
    pub language: Option<Language>,
}

/// Settings shared by `run` and `serve`.
#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long, value_parser = parse_language)]
    pub language: Option<Language>,
    /// Seed for every random draw; time-derived when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub dwell_ms: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub tick_ms: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Refuse documents with missing resource files.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, env = "GIML_ASSET_ROOT")]
    pub asset_root: Option<PathBuf>,
    /// Duration of a sound that cannot be probed, as NAME=MS. Repeatable.
    #[arg(long = "sound-ms", value_parser = parse_sound)]
    pub sound_ms: Vec<(String, u64)>,
    #[arg(long, default_value_t = 80.0)]
    pub dispersion_px: f64,
    #[arg(long, default_value_t = 100.0)]
    pub min_fix_ms: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub document: PathBuf,
    /// Gaze trace CSV (`t_ms,x,y,valid[,pupil][,key]`).
    pub trace: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub document: PathBuf,
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub bind: String,
    /// Take sample times from the client's `t_ms` instead of arrival time.
    #[arg(long)]
    pub client_clock: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
}

fn time_seed() -> u64 {
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or_default();
    (nanos as u64) ^ ((nanos >> 64) as u64) ^ u64::from(std::process::id())
}

fn print_diagnostics(file: &str, diags: &[Diagnostic], to: &mut dyn Write) -> io::Result<()> {
    for d in diags {
        writeln!(to, "{}", d.to_report_line(file))?;
    }
    Ok(())
}

fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("cannot read directory {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "giml" || x == "xml"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn check_bytes(bytes: &[u8], language: Option<Language>, asset_root: Option<&Path>) -> Vec<Diagnostic> {
    match parse_bytes(bytes, language) {
        Ok((doc, mut diags)) => {
            diags.extend(validate(&doc, asset_root));
            diags
        }
        Err(e) => vec![e.diagnostic],
    }
}

pub fn validate_cmd(args: &ValidateArgs) -> Result<Status> {
    let files = collect_files(&args.paths)?;
    let mut reports = Vec::new();
    for f in &files {
        let bytes = fs::read(f).with_context(|| format!("cannot read {}", f.display()))?;
        reports.push((f.display().to_string(), check_bytes(&bytes, args.language, args.asset_root.as_deref())));
    }
    let count = |s: Severity| reports.iter().flat_map(|(_, d)| d).filter(|d| d.severity == s).count();
    let (errors, warnings) = (count(Severity::Error), count(Severity::Warning));
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match args.format {
        Format::Text => {
            for (file, diags) in &reports {
                print_diagnostics(file, diags, &mut out)?;
                let e = count_errors(diags);
                let w = diags.iter().filter(|d| d.severity == Severity::Warning).count();
                writeln!(out, "{file}: {}, {e} error(s), {w} warning(s)", if e == 0 { "ok" } else { "failed" })?;
            }
            writeln!(out, "summary: {} file(s), {errors} error(s), {warnings} warning(s)", files.len())?;
        }
        Format::Json => {
            for (file, diags) in &reports {
                for d in diags {
                    let mut v = serde_json::to_value(d)?;
                    v["file"] = json!(file);
                    writeln!(out, "{v}")?;
                }
            }
            writeln!(out, "{}", json!({ "summary": { "files": files.len(), "errors": errors, "warnings": warnings } }))?;
        }
    }
    Ok(if errors == 0 { Status::Ok } else { Status::Failed })
}

pub fn translate_cmd(args: &TranslateArgs) -> Result<Status> {
    let bytes = fs::read(&args.path).with_context(|| format!("cannot read {}", args.path.display()))?;
    let file = args.path.display().to_string();
    let Ok(text) = std::str::from_utf8(&bytes) else {
        eprintln!("{file}: input is not valid UTF-8");
        return Ok(Status::Failed);
    };
    let translated = match translate(text, args.to, args.language) {
        Ok(t) => t,
        Err(TranslateError::Parse(e)) => {
            print_diagnostics(&file, &[e.diagnostic], &mut io::stderr())?;
            return Ok(Status::Failed);
        }
        Err(TranslateError::Invalid(diags)) => {
            let errors: Vec<Diagnostic> = diags.into_iter().filter(Diagnostic::is_error).collect();
            print_diagnostics(&file, &errors, &mut io::stderr())?;
            eprintln!("{file}: {} error(s); not translated", errors.len());
            return Ok(Status::Failed);
        }
    };
    match &args.out {
        Some(path) => fs::write(path, translated).with_context(|| format!("cannot write {}", path.display()))?,
        None => io::stdout().write_all(translated.as_bytes())?,
    }
    Ok(Status::Ok)
}

pub fn inspect_cmd(args: &InspectArgs) -> Result<Status> {
    let bytes = fs::read(&args.path).with_context(|| format!("cannot read {}", args.path.display()))?;
    let file = args.path.display().to_string();
    match parse_bytes(&bytes, args.language) {
        Ok((doc, diags)) => {
            print_diagnostics(&file, &diags, &mut io::stderr())?;
            print!("{}", giml_core::inspect(&doc));
            Ok(Status::Ok)
        }
        Err(e) => {
            print_diagnostics(&file, &[e.diagnostic], &mut io::stderr())?;
            Ok(Status::Failed)
        }
    }
}

pub fn keywords_cmd() -> Result<Status> {
    print!("{}", registry().dump());
    Ok(Status::Ok)
}

/// Reads, parses and validates a document for running. Missing resource
/// files only block the run in strict mode.
fn load_document(path: &Path, args: &EngineArgs) -> Result<Option<(GimlDocument, Vec<Diagnostic>)>> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let file = path.display().to_string();
    let (doc, mut diags) = match parse_bytes(&bytes, args.language) {
        Ok(r) => r,
        Err(e) => {
            print_diagnostics(&file, &[e.diagnostic], &mut io::stderr())?;
            return Ok(None);
        }
    };
    diags.extend(validate(&doc, args.asset_root.as_deref()));
    if !args.strict {
        for d in diags.iter_mut().filter(|d| d.code == Code::ResourceNotFound) {
            d.severity = Severity::Warning;
        }
    }
    print_diagnostics(&file, &diags, &mut io::stderr())?;
    if count_errors(&diags) > 0 {
        eprintln!("{file}: document has errors; not running");
        return Ok(None);
    }
    Ok(Some((doc, diags)))
}

fn engine_config(args: &EngineArgs, seed: u64) -> EngineConfig {
    EngineConfig {
        dwell_ms: args.dwell_ms,
        tick_ms: args.tick_ms,
        seed,
        strict: args.strict,
        asset_root: args.asset_root.clone(),
        sound_durations_ms: args.sound_ms.iter().cloned().collect::<HashMap<_, _>>(),
        ..EngineConfig::default()
    }
}

fn header(document: &Path, args: &EngineArgs, seed: u64, clock: &str, incomplete: Option<String>) -> RunHeader {
    RunHeader {
        document: document.display().to_string(),
        seed,
        dwell_ms: args.dwell_ms,
        tick_ms: args.tick_ms,
        clock: clock.to_string(),
        incomplete,
    }
}

fn idt(args: &EngineArgs) -> IdtParams {
    IdtParams { dispersion_px: args.dispersion_px, min_duration_ms: args.min_fix_ms }
}

pub fn run_cmd(args: &RunArgs) -> Result<Status> {
    let e = &args.engine;
    let seed = e.seed.unwrap_or_else(time_seed);
    let failed = || {
        println!("seed: {seed}");
        Ok(Status::Failed)
    };
    let Some((doc, diags)) = load_document(&args.document, e)? else { return failed() };
    let file = fs::File::open(&args.trace).with_context(|| format!("cannot open {}", args.trace.display()))?;
    let trace = match giml_core::read_trace(BufReader::new(file)) {
        Ok(t) => t,
        Err(giml_core::gaze::TraceError::Io(err)) => {
            return Err(err).with_context(|| format!("cannot read {}", args.trace.display()))
        }
        Err(err) => {
            eprintln!("{}: {err}", args.trace.display());
            return failed();
        }
    };
    if trace.malformed() > 0 {
        eprintln!("{}: skipped {} malformed line(s)", args.trace.display(), trace.malformed());
    }
    let output = match replay(&doc, engine_config(e, seed), CallbackRegistry::new(), &trace.samples) {
        Ok(o) => o,
        Err(err) => {
            eprintln!("{}: {err}", args.document.display());
            return failed();
        }
    };
    let h = header(&args.document, e, seed, Clock::Client.name(), output.failure.clone());
    let data = RunData { document: &output.document, events: &output.events, records: &output.records };
    let paths = write_run(&e.out_dir, &h, &data, idt(e))
        .with_context(|| format!("cannot write outputs to {}", e.out_dir.display()))?;
    let mut report = RunReport::new(seed, &output.events, &diags, paths);
    report.incomplete = output.failure.clone();
    print!("{}", report.render());
    Ok(if output.failure.is_some() { Status::Failed } else { Status::Ok })
}

pub fn serve_cmd(args: &ServeArgs) -> Result<Status> {
    let e = &args.engine;
    let seed = e.seed.unwrap_or_else(time_seed);
    println!("seed: {seed}");
    let Some((doc, diags)) = load_document(&args.document, e)? else { return Ok(Status::Failed) };
    let clock = if args.client_clock { Clock::Client } else { Clock::Server };
    let session = match Session::new(&doc, engine_config(e, seed), clock) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("{}: {err}", args.document.display());
            return Ok(Status::Failed);
        }
    };
    let listener = TcpListener::bind(&args.bind).with_context(|| format!("cannot bind {}", args.bind))?;
    println!("listening on {}", listener.local_addr()?);
    io::stdout().flush()?;
    let session = server::serve(listener, session, e.tick_ms)?;

    let failure = session.failure().map(str::to_string);
    let h = header(&args.document, e, seed, clock.name(), failure.clone());
    let data = RunData { document: session.document(), events: session.events(), records: session.records() };
    let mut paths = write_run(&e.out_dir, &h, &data, idt(e))
        .with_context(|| format!("cannot write outputs to {}", e.out_dir.display()))?;
    let inputs = e.out_dir.join(INPUTS);
    write_inputs(&inputs, &h, session.inputs()).with_context(|| format!("cannot write {}", inputs.display()))?;
    paths.push(inputs);
    let mut report = RunReport::new(seed, session.events(), &diags, paths);
    report.incomplete = failure.clone();
    print!("{}", report.render());
    Ok(if failure.is_some() { Status::Failed } else { Status::Ok })
}
