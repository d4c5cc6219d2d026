//! Streaming parser for line-delimited JSON post and comment dumps.

use std::borrow::Cow;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use cascadekit_core::event::{canonical_id, EventKind, IngestReport, ThreadEvent};
use flate2::read::MultiGzDecoder;
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

/// Lines longer than this release their buffer after being parsed.
const BUFFER_RETAIN_LIMIT: usize = 1 << 20;

/// Opens a dump file, transparently decompressing `.gz`.
pub fn open_input(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz")) {
        Ok(Box::new(BufReader::with_capacity(1 << 16, MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::with_capacity(1 << 16, file)))
    }
}

/// Distinguishes an absent key from an explicit `null`.
#[derive(Debug, Default)]
enum Field<T> {
    #[default]
    Missing,
    Null,
    Value(T),
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Field<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Option::<T>::deserialize(d)?.map_or(Field::Null, Field::Value))
    }
}

impl<T> Field<T> {
    fn required(self) -> Option<Option<T>> {
        match self {
            Field::Missing => None,
            Field::Null => Some(None),
            Field::Value(v) => Some(Some(v)),
        }
    }
}

/// Epoch seconds given as an integer, a float or a numeric string.
#[derive(Debug, Clone, Copy)]
struct Timestamp(i64);

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Timestamp;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("epoch seconds")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Timestamp, E> {
                Ok(Timestamp(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Timestamp, E> {
                i64::try_from(v).map(Timestamp).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Timestamp, E> {
                if v.is_finite() && v.abs() < 9.0e15 {
                    Ok(Timestamp(v.floor() as i64))
                } else {
                    Err(E::custom("timestamp out of range"))
                }
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Timestamp, E> {
                let v = v.trim();
                match v.parse::<i64>() {
                    Ok(t) => Ok(Timestamp(t)),
                    Err(_) => v.parse::<f64>().map_err(E::custom).and_then(|f| self.visit_f64(f)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
struct RawRecord<'a> {
    #[serde(borrow, default)]
    id: Field<Cow<'a, str>>,
    #[serde(borrow, default)]
    author: Field<Cow<'a, str>>,
    #[serde(default)]
    created_utc: Field<Timestamp>,
    #[serde(borrow, default)]
    subreddit: Field<Cow<'a, str>>,
    #[serde(borrow, default)]
    title: Field<Cow<'a, str>>,
    #[serde(borrow, default)]
    selftext: Field<Cow<'a, str>>,
    #[serde(borrow, default)]
    url: Field<Cow<'a, str>>,
    #[serde(borrow, default)]
    parent_id: Field<Cow<'a, str>>,
    #[serde(borrow, default)]
    link_id: Field<Cow<'a, str>>,
    #[serde(borrow, default)]
    body: Field<Cow<'a, str>>,
}

/// Maps one JSON line to an event, or `None` when a required field is
/// missing or invalid.
pub fn parse_record(line: &str, kind: EventKind) -> Option<ThreadEvent> {
    let raw: RawRecord<'_> = serde_json::from_str(line).ok()?;
    let id = raw.id.required()??;
    let author = raw.author.required()?;
    let created = raw.created_utc.required()??.0;
    let community = raw.subreddit.required()?.unwrap_or_default();
    if canonical_id(&id).is_empty() || created <= 0 {
        return None;
    }
    let event = match kind {
        EventKind::Post => {
            let title = raw.title.required()?.unwrap_or_default();
            let selftext = raw.selftext.required()?.unwrap_or_default();
            let text = match (title.is_empty(), selftext.is_empty()) {
                (_, true) => title.into_owned(),
                (true, false) => selftext.into_owned(),
                (false, false) => format!("{title}\n{selftext}"),
            };
            let url = match raw.url {
                Field::Value(u) => Some(u),
                _ => None,
            };
            ThreadEvent::post(&id, author.as_deref(), created, &text, url.as_deref(), &community)
        }
        EventKind::Comment => {
            let parent = raw.parent_id.required()??;
            let link = raw.link_id.required()??;
            let body = raw.body.required()?.unwrap_or_default();
            ThreadEvent::comment(&id, &parent, &link, author.as_deref(), created, &body, &community)
        }
    };
    event.validate().ok().map(|_| event)
}

/// Iterator over the events of one dump stream. Malformed lines are
/// counted and skipped; only I/O failures are surfaced as errors.
pub struct DumpReader<R> {
    reader: R,
    kind: EventKind,
    buf: Vec<u8>,
    report: IngestReport,
    max_buffer: usize,
}

impl<R: BufRead> DumpReader<R> {
    pub fn new(reader: R, kind: EventKind) -> Self {
        DumpReader { reader, kind, buf: Vec::with_capacity(4096), report: IngestReport::default(), max_buffer: 0 }
    }

    pub fn report(&self) -> IngestReport {
        self.report
    }

    /// Largest line buffer held so far, in bytes.
    pub fn peak_buffer(&self) -> usize {
        self.max_buffer
    }
}

/// Streams `reader` as a dump of `kind` records.
pub fn parse_dump_stream<R: BufRead>(reader: R, kind: EventKind) -> DumpReader<R> {
    DumpReader::new(reader, kind)
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = io::Result<ThreadEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e)),
            }
            self.max_buffer = self.max_buffer.max(self.buf.capacity());
            self.report.lines_read += 1;
            let parsed = std::str::from_utf8(&self.buf).ok().and_then(|line| parse_record(line.trim(), self.kind));
            if self.buf.capacity() > BUFFER_RETAIN_LIMIT {
                self.buf = Vec::with_capacity(4096);
            }
            match parsed {
                Some(event) => {
                    self.report.events_accepted += 1;
                    return Some(Ok(event));
                }
                None => self.report.malformed_lines += 1,
            }
        }
    }
}
