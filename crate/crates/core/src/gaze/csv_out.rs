//! CSV writers. Each file starts with `#` comment lines describing the run.

use std::io::{self, Write};

use super::aoi::AoiRow;
use super::fixation::{Fixation, Saccade};
use crate::engine::EngineEvent;
use crate::replay::SampleRecord;

/// Run metadata written as comments at the top of every output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunHeader {
    pub document: String,
    pub seed: u64,
    pub dwell_ms: u64,
    pub tick_ms: u64,
    pub clock: String,
    /// Set when the run ended on an error; written as an `# incomplete:` line.
    pub incomplete: Option<String>,
}

impl RunHeader {
    fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# document: {}", self.document)?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# dwell_ms: {}", self.dwell_ms)?;
        writeln!(w, "# tick_ms: {}", self.tick_ms)?;
        writeln!(w, "# clock: {}", self.clock)?;
        if let Some(why) = &self.incomplete {
            writeln!(w, "# incomplete: {why}")?;
        }
        Ok(())
    }
}

fn write_table<W: Write>(
    mut w: W,
    header: &RunHeader,
    columns: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> io::Result<()> {
    header.write_to(&mut w)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(columns)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn fixed(v: f64) -> String {
    format!("{v:.3}")
}

pub fn write_samples<W: Write>(w: W, header: &RunHeader, records: &[SampleRecord]) -> io::Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.sample.t_ms.to_string(),
            r.sample.x.to_string(),
            r.sample.y.to_string(),
            u8::from(r.sample.valid).to_string(),
            opt(&r.sample.pupil),
            r.scene.clone(),
            r.hits.join(";"),
        ]
    });
    write_table(w, header, &["t_ms", "x", "y", "valid", "pupil", "scene", "region_hit"], rows)
}

pub fn write_events<W: Write>(w: W, header: &RunHeader, events: &[EngineEvent]) -> io::Result<()> {
    let rows = events.iter().map(|e| {
        vec![e.t_ms.to_string(), e.kind.to_string(), e.scene.clone(), opt(&e.region), opt(&e.payload)]
    });
    write_table(w, header, &["t_ms", "kind", "scene", "region", "payload"], rows)
}

pub fn write_aoi<W: Write>(w: W, header: &RunHeader, rows: &[AoiRow]) -> io::Result<()> {
    let rows = rows.iter().map(|r| {
        vec![
            r.scene.clone(),
            r.region.clone(),
            r.dwell_ms.to_string(),
            r.entry_count.to_string(),
            opt(&r.first_entry_ms),
            r.reaction_count.to_string(),
        ]
    });
    write_table(w, header, &["scene", "region", "dwell_ms", "entry_count", "first_entry_ms", "reaction_count"], rows)
}

pub fn write_fixations<W: Write>(w: W, header: &RunHeader, fixations: &[Fixation]) -> io::Result<()> {
    let rows = fixations.iter().map(|f| {
        vec![
            f.start_ms.to_string(),
            f.end_ms.to_string(),
            fixed(f.x),
            fixed(f.y),
            fixed(f.dispersion),
            f.sample_count.to_string(),
        ]
    });
    write_table(w, header, &["start_ms", "end_ms", "x", "y", "dispersion", "sample_count"], rows)
}

pub fn write_saccades<W: Write>(w: W, header: &RunHeader, saccades: &[Saccade]) -> io::Result<()> {
    let rows = saccades.iter().map(|s| {
        vec![
            s.start_ms.to_string(),
            s.end_ms.to_string(),
            fixed(s.from_x),
            fixed(s.from_y),
            fixed(s.to_x),
            fixed(s.to_y),
            fixed(s.amplitude),
        ]
    });
    write_table(w, header, &["start_ms", "end_ms", "from_x", "from_y", "to_x", "to_y", "amplitude"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EventKind;

    fn header() -> RunHeader {
        RunHeader { document: "doc.giml".into(), seed: 3, dwell_ms: 1000, tick_ms: 10, clock: "server".into(), incomplete: None }
    }

    #[test]
    fn empty_events_is_header_only() {
        let mut buf = Vec::new();
        write_events(&mut buf, &header(), &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().last(), Some("t_ms,kind,scene,region,payload"));
        assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 5);
    }

    #[test]
    fn event_rows() {
        let mut buf = Vec::new();
        let ev = EngineEvent::new(10, EventKind::TagEmitted, "s").region("r").payload("a,b");
        write_events(&mut buf, &header(), &[ev]).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("10,TagEmitted,s,r,\"a,b\"\n"));
    }
}
