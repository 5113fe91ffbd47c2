//! Output files of a run and the summary printed afterwards.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use giml_core::gaze::{saccades_between, write_aoi, write_events, write_fixations, write_saccades, write_samples, RunHeader};
use giml_core::{accumulate_aoi, detect_fixations, Diagnostic, EngineEvent, GimlDocument, IdtParams, SampleRecord, Severity};

use crate::session::InputLog;

pub const SAMPLES: &str = "samples.csv";
pub const EVENTS: &str = "events.csv";
pub const AOI: &str = "aoi.csv";
pub const FIXATIONS: &str = "fixations.csv";
pub const SACCADES: &str = "saccades.csv";
pub const INPUTS: &str = "inputs.csv";

/// Everything the CSV writers need from a finished run.
pub struct RunData<'a> {
    pub document: &'a GimlDocument,
    pub events: &'a [EngineEvent],
    pub records: &'a [SampleRecord],
}

/// Writes one file; a half-written file is removed on failure.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> io::Result<()> {
    let result = File::create(path).and_then(|file| {
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush()
    });
    if result.is_err() {
        let _ = std::fs::remove_file(path);
    }
    result
}

/// Writes samples, events, AOI, fixation and saccade tables into `dir`.
pub fn write_run(dir: &Path, header: &RunHeader, data: &RunData<'_>, idt: IdtParams) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let samples: Vec<_> = data.records.iter().map(|r| r.sample.clone()).collect();
    let fixations = detect_fixations(&samples, idt);
    let saccades = saccades_between(&fixations);
    let aoi = accumulate_aoi(data.document, data.records, data.events);
    let mut paths = Vec::new();
    let mut out = |name: &str, f: &dyn Fn(&mut BufWriter<File>) -> io::Result<()>| -> io::Result<()> {
        let p = dir.join(name);
        write_file(&p, |w| f(w))?;
        paths.push(p);
        Ok(())
    };
    out(SAMPLES, &|w| write_samples(w, header, data.records))?;
    out(EVENTS, &|w| write_events(w, header, data.events))?;
    out(AOI, &|w| write_aoi(w, header, &aoi))?;
    out(FIXATIONS, &|w| write_fixations(w, header, &fixations))?;
    out(SACCADES, &|w| write_saccades(w, header, &saccades))?;
    Ok(paths)
}

/// The live-session input log: arrival time on the engine clock next to the
/// client's own timestamp.
pub fn write_inputs(path: &Path, header: &RunHeader, inputs: &[InputLog]) -> io::Result<()> {
    write_file(path, |w| {
        writeln!(w, "# document: {}", header.document)?;
        writeln!(w, "# seed: {}", header.seed)?;
        writeln!(w, "# clock: {}", header.clock)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["engine_t_ms", "client_t_ms", "kind", "x", "y", "valid", "key"])?;
        for i in inputs {
            csv.write_record([
                format!("{:.3}", i.engine_t_ms),
                i.client_t_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
                i.kind.to_string(),
                i.x.map(|v| v.to_string()).unwrap_or_default(),
                i.y.map(|v| v.to_string()).unwrap_or_default(),
                i.valid.map(|v| u8::from(v).to_string()).unwrap_or_default(),
                i.key.clone().unwrap_or_default(),
            ])?;
        }
        csv.flush()
    })
}

/// What a finished command reports on standard output.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub seed: u64,
    pub events_by_kind: BTreeMap<String, usize>,
    pub diagnostics_by_severity: Vec<(Severity, usize)>,
    pub outputs: Vec<PathBuf>,
    pub incomplete: Option<String>,
}

impl RunReport {
    pub fn new(seed: u64, events: &[EngineEvent], diagnostics: &[Diagnostic], outputs: Vec<PathBuf>) -> RunReport {
        let mut events_by_kind = BTreeMap::new();
        for e in events {
            *events_by_kind.entry(e.kind.as_str().to_string()).or_insert(0) += 1;
        }
        let diagnostics_by_severity = [Severity::Error, Severity::Warning, Severity::Info]
            .into_iter()
            .map(|s| (s, diagnostics.iter().filter(|d| d.severity == s).count()))
            .collect();
        RunReport { seed, events_by_kind, diagnostics_by_severity, outputs, incomplete: None }
    }

    pub fn render(&self) -> String {
        let mut s = format!("seed: {}\n", self.seed);
        let total: usize = self.events_by_kind.values().sum();
        s.push_str(&format!("events: {total}\n"));
        for (k, n) in &self.events_by_kind {
            s.push_str(&format!("  {k}: {n}\n"));
        }
        let diags: Vec<String> = self.diagnostics_by_severity.iter().map(|(k, n)| format!("{n} {k}(s)")).collect();
        s.push_str(&format!("diagnostics: {}\n", diags.join(", ")));
        for p in &self.outputs {
            s.push_str(&format!("wrote {}\n", p.display()));
        }
        if let Some(why) = &self.incomplete {
            s.push_str(&format!("incomplete: {why}\n"));
        }
        s
    }
}
