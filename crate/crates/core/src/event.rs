//! Thread events: the validated unit produced by dump ingestion.

use alloc::collections::BTreeSet;
use alloc::string::String;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Username the platform assigns to removed accounts.
pub const DELETED_AUTHOR: &str = "[deleted]";

/// The moderator bot whose comments are stripped before cascade assembly.
pub const DEFAULT_BOT: &str = "AutoModerator";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum EventKind {
    Post,
    Comment,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Post => "post",
            EventKind::Comment => "comment",
        }
    }
}

/// One post or comment, with identifiers already in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ThreadEvent {
    pub id: String,
    pub kind: EventKind,
    #[cfg_attr(feature = "serde", serde(default))]
    pub parent_id: Option<String>,
    pub root_id: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub author: Option<String>,
    pub created_utc: i64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub text: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub url: Option<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub community: String,
}

impl ThreadEvent {
    /// A post; its root is itself.
    pub fn post(id: &str, author: Option<&str>, created_utc: i64, text: &str, url: Option<&str>, community: &str) -> Self {
        let id = String::from(canonical_id(id));
        ThreadEvent {
            root_id: id.clone(),
            id,
            kind: EventKind::Post,
            parent_id: None,
            author: normalize_author(author),
            created_utc,
            text: String::from(text),
            url: url.filter(|u| !u.is_empty()).map(String::from),
            community: String::from(community),
        }
    }

    pub fn comment(
        id: &str,
        parent_id: &str,
        root_id: &str,
        author: Option<&str>,
        created_utc: i64,
        text: &str,
        community: &str,
    ) -> Self {
        ThreadEvent {
            id: String::from(canonical_id(id)),
            kind: EventKind::Comment,
            parent_id: Some(String::from(canonical_id(parent_id))),
            root_id: String::from(canonical_id(root_id)),
            author: normalize_author(author),
            created_utc,
            text: String::from(text),
            url: None,
            community: String::from(community),
        }
    }

    pub fn is_post(&self) -> bool {
        self.kind == EventKind::Post
    }

    /// Checks the structural invariants of the event.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidParameter("empty event id".into()));
        }
        if self.created_utc <= 0 {
            return Err(Error::InvalidParameter("created_utc must be positive".into()));
        }
        match self.kind {
            EventKind::Post if self.parent_id.is_some() || self.root_id != self.id => {
                Err(Error::InvalidParameter("post must be its own root and have no parent".into()))
            }
            EventKind::Comment if self.parent_id.as_deref().is_none_or(str::is_empty) || self.root_id.is_empty() => {
                Err(Error::InvalidParameter("comment needs parent and root ids".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Strips the dump's type prefixes (`t1_` comment, `t3_` link) so that
/// parent and root references join against bare ids.
pub fn canonical_id(raw: &str) -> &str {
    let raw = raw.trim();
    raw.strip_prefix("t1_").or_else(|| raw.strip_prefix("t3_")).unwrap_or(raw)
}

/// Deleted or blank authors become `None`.
pub fn normalize_author(author: Option<&str>) -> Option<String> {
    match author.map(str::trim) {
        None | Some("") => None,
        Some(a) if a == DELETED_AUTHOR => None,
        Some(a) => Some(String::from(a)),
    }
}

/// Line accounting for one ingestion run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct IngestReport {
    pub lines_read: u64,
    pub events_accepted: u64,
    pub malformed_lines: u64,
    pub bot_comments_dropped: u64,
    pub orphan_comments_dropped: u64,
}

impl IngestReport {
    pub fn merge(&mut self, other: &IngestReport) {
        self.lines_read += other.lines_read;
        self.events_accepted += other.events_accepted;
        self.malformed_lines += other.malformed_lines;
        self.bot_comments_dropped += other.bot_comments_dropped;
        self.orphan_comments_dropped += other.orphan_comments_dropped;
    }

    /// Events that survive parsing and filtering, before orphan removal.
    pub fn events_kept(&self) -> u64 {
        self.events_accepted - self.bot_comments_dropped
    }

    /// True when every line read is attributed to exactly one outcome.
    pub fn is_balanced(&self) -> bool {
        let kept = self.events_accepted - self.bot_comments_dropped - self.orphan_comments_dropped;
        kept + self.malformed_lines + self.bot_comments_dropped + self.orphan_comments_dropped == self.lines_read
    }
}

/// Set of account names whose comments are discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BotFilter {
    names: BTreeSet<String>,
}

impl Default for BotFilter {
    fn default() -> Self {
        BotFilter::new([DEFAULT_BOT])
    }
}

impl BotFilter {
    /// Names are matched ASCII case-insensitively, as account names are on the platform.
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let names = names
            .into_iter()
            .map(|n| n.as_ref().trim().to_ascii_lowercase())
            .filter(|n| !n.is_empty())
            .collect();
        BotFilter { names }
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_bot(&self, author: &str) -> bool {
        self.names.contains(&author.to_ascii_lowercase())
    }

    /// Only comments are ever dropped.
    pub fn drops(&self, event: &ThreadEvent) -> bool {
        event.kind == EventKind::Comment && event.author.as_deref().is_some_and(|a| self.is_bot(a))
    }

    pub fn filter<I>(&self, events: I) -> FilterEvents<'_, I::IntoIter>
    where
        I: IntoIterator<Item = ThreadEvent>,
    {
        FilterEvents { inner: events.into_iter(), bots: self, dropped: 0 }
    }
}

/// Removes bot-authored comments from an event stream, preserving order.
pub fn filter_events<I>(events: I, bots: &BotFilter) -> FilterEvents<'_, I::IntoIter>
where
    I: IntoIterator<Item = ThreadEvent>,
{
    bots.filter(events)
}

/// Iterator adapter returned by [`filter_events`].
#[derive(Debug)]
pub struct FilterEvents<'a, I> {
    inner: I,
    bots: &'a BotFilter,
    dropped: u64,
}

impl<I> FilterEvents<'_, I> {
    pub fn bot_comments_dropped(&self) -> u64 {
        self.dropped
    }

    pub fn report(&self) -> IngestReport {
        IngestReport { bot_comments_dropped: self.dropped, ..IngestReport::default() }
    }
}

impl<I: Iterator<Item = ThreadEvent>> Iterator for FilterEvents<'_, I> {
    type Item = ThreadEvent;

    fn next(&mut self) -> Option<ThreadEvent> {
        for event in self.inner.by_ref() {
            if self.bots.drops(&event) {
                self.dropped += 1;
                continue;
            }
            return Some(event);
        }
        None
    }
}
