//! The normalized event file: one JSON-encoded [`ThreadEvent`] per line.

use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use cascadekit_core::cascade::{Assembly, CascadeBuilder};
use cascadekit_core::event::ThreadEvent;

use crate::dump::open_input;

pub struct EventWriter<W: Write> {
    out: W,
    written: u64,
}

impl EventWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(EventWriter::new(BufWriter::new(file)))
    }
}

impl<W: Write> EventWriter<W> {
    pub fn new(out: W) -> Self {
        EventWriter { out, written: 0 }
    }

    pub fn write(&mut self, event: &ThreadEvent) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, event)?;
        self.out.write_all(b"\n")?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Strict reader: unlike raw dumps, an event file is our own output, so a
/// bad line is an error carrying its line number.
pub struct EventReader<R> {
    reader: R,
    line: String,
    line_no: usize,
}

impl<R: BufRead> EventReader<R> {
    pub fn new(reader: R) -> Self {
        EventReader { reader, line: String::new(), line_no: 0 }
    }
}

impl<R: BufRead> Iterator for EventReader<R> {
    type Item = Result<ThreadEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line.clear();
            match self.reader.read_line(&mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let text = self.line.trim();
            if text.is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<ThreadEvent>(text)
                .map_err(anyhow::Error::from)
                .and_then(|e| e.validate().map(|_| e).map_err(anyhow::Error::from))
                .with_context(|| format!("event line {}", self.line_no));
            return Some(parsed);
        }
    }
}

pub fn read_events(path: &Path) -> Result<EventReader<Box<dyn BufRead + Send>>> {
    let input = open_input(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(EventReader::new(input))
}

/// Calls `f` on every event of the file in order.
pub fn for_each_event(path: &Path, mut f: impl FnMut(ThreadEvent)) -> Result<()> {
    for event in read_events(path)? {
        f(event?);
    }
    Ok(())
}

/// Streams an event file into cascade trees, keeping only structure.
pub fn load_cascades(path: &Path) -> Result<Assembly> {
    let mut builder = CascadeBuilder::new();
    for_each_event(path, |e| builder.push(&e))?;
    Ok(builder.finish())
}
