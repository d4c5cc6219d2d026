//! Source attribution: map post URLs to media and platform subgroups and
//! summarize cascades per subgroup.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cascade::CascadeMetrics;
use crate::event::ThreadEvent;
use crate::stats::{summary_stats, SummaryStats};
use crate::{Error, Result};

/// Seed domain map shipped with the crate (`domain,subgroup` CSV).
pub const SEED_DOMAIN_MAP: &str = include_str!("../data/media_bias.csv");

/// Hosts that belong to the discussion platform itself.
pub const PLATFORM_DOMAINS: &[&str] = &["reddit.com", "redd.it", "redditmedia.com"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Social {
    Twitter,
    Facebook,
    Imgur,
    Google,
    Youtube,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subgroup {
    Social(Social),
    Left,
    LeftLeaning,
    Center,
    RightLeaning,
    Right,
    Homegrown,
}

impl Subgroup {
    pub const ALL: [Subgroup; 11] = [
        Subgroup::Social(Social::Twitter),
        Subgroup::Social(Social::Facebook),
        Subgroup::Social(Social::Imgur),
        Subgroup::Social(Social::Google),
        Subgroup::Social(Social::Youtube),
        Subgroup::Left,
        Subgroup::LeftLeaning,
        Subgroup::Center,
        Subgroup::RightLeaning,
        Subgroup::Right,
        Subgroup::Homegrown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subgroup::Social(Social::Twitter) => "social:twitter",
            Subgroup::Social(Social::Facebook) => "social:facebook",
            Subgroup::Social(Social::Imgur) => "social:imgur",
            Subgroup::Social(Social::Google) => "social:google",
            Subgroup::Social(Social::Youtube) => "social:youtube",
            Subgroup::Left => "left",
            Subgroup::LeftLeaning => "left_leaning",
            Subgroup::Center => "center",
            Subgroup::RightLeaning => "right_leaning",
            Subgroup::Right => "right",
            Subgroup::Homegrown => "homegrown",
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subgroup {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        Subgroup::ALL.into_iter().find(|g| g.as_str() == s).ok_or(())
    }
}

/// Lowercased host with a leading `www.` removed, or `None` when `url` is
/// not an absolute `scheme://host` URL.
pub fn extract_domain(url: &str) -> Option<String> {
    let url = url.trim();
    let (scheme, rest) = url.split_once("://")?;
    if scheme.is_empty() || !scheme.chars().all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c)) {
        return None;
    }
    let authority = rest.split(['/', '?', '#']).next()?;
    let host_port = authority.rsplit('@').next()?;
    let host = match host_port.rsplit_once(':') {
        Some((h, port)) if port.chars().all(|c| c.is_ascii_digit()) => h,
        _ => host_port,
    };
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    let host = host.strip_prefix("www.").unwrap_or(&host);
    let valid = host.contains('.')
        && !host.starts_with('.')
        && !host.contains("..")
        && host.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '.');
    valid.then(|| host.to_string())
}

/// Domain to subgroup lookup with longest-suffix matching.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DomainMap {
    entries: BTreeMap<String, Subgroup>,
    platform: Vec<String>,
}

impl DomainMap {
    /// An empty map that treats [`PLATFORM_DOMAINS`] as internal.
    pub fn new() -> Self {
        DomainMap { entries: BTreeMap::new(), platform: PLATFORM_DOMAINS.iter().map(|d| d.to_string()).collect() }
    }

    pub fn seeded() -> Self {
        Self::parse_csv(SEED_DOMAIN_MAP).expect("seed map is valid")
    }

    /// Parses `domain,subgroup` lines. A header row, blank lines and `#`
    /// comments are skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut map = DomainMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| Error::DomainMap { line: i + 1, reason: reason.into() };
            let (domain, group) = line.split_once(',').ok_or_else(|| err("expected domain,subgroup"))?;
            let (domain, group) = (domain.trim(), group.trim());
            if i == 0 && domain.eq_ignore_ascii_case("domain") {
                continue;
            }
            let group: Subgroup = group.parse().map_err(|_| err("unknown subgroup"))?;
            let domain = domain.to_ascii_lowercase();
            let domain = domain.strip_prefix("www.").unwrap_or(&domain);
            if domain.is_empty() {
                return Err(err("empty domain"));
            }
            map.insert(domain, group);
        }
        Ok(map)
    }

    pub fn insert(&mut self, domain: &str, group: Subgroup) {
        self.entries.insert(domain.to_ascii_lowercase(), group);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, Subgroup)> {
        self.entries.iter().map(|(d, g)| (d.as_str(), *g))
    }

    /// Exact host first, then each parent domain, longest first.
    pub fn lookup(&self, host: &str) -> Option<(&str, Subgroup)> {
        suffixes(host).find_map(|s| self.entries.get_key_value(s).map(|(k, g)| (k.as_str(), *g)))
    }

    pub fn is_platform(&self, host: &str) -> bool {
        suffixes(host).any(|s| self.platform.iter().any(|p| p == s))
    }
}

fn suffixes(host: &str) -> impl Iterator<Item = &str> {
    core::iter::successors(Some(host), |h| h.split_once('.').map(|(_, rest)| rest)).filter(|s| s.contains('.'))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceAssignment {
    pub root_id: String,
    /// `None` means unclassified.
    pub subgroup: Option<Subgroup>,
    pub matched_domain: Option<String>,
}

/// Assigns a post to its source subgroup. Posts without a URL, or linking
/// back to the platform, are homegrown; unmapped domains are unclassified.
pub fn classify_source(post: &ThreadEvent, map: &DomainMap) -> SourceAssignment {
    let root_id = post.root_id.clone();
    let Some(url) = post.url.as_deref().filter(|u| !u.trim().is_empty()) else {
        return SourceAssignment { root_id, subgroup: Some(Subgroup::Homegrown), matched_domain: None };
    };
    let Some(host) = extract_domain(url) else {
        return SourceAssignment { root_id, subgroup: None, matched_domain: None };
    };
    if map.is_platform(&host) {
        return SourceAssignment { root_id, subgroup: Some(Subgroup::Homegrown), matched_domain: Some(host) };
    }
    match map.lookup(&host) {
        Some((domain, group)) => {
            SourceAssignment { root_id, subgroup: Some(group), matched_domain: Some(domain.to_string()) }
        }
        None => SourceAssignment { root_id, subgroup: None, matched_domain: None },
    }
}

/// One row of the per-subgroup comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupRow {
    /// A subgroup name, `unclassified` or `general`.
    pub label: String,
    pub count: usize,
    pub size: Option<SummaryStats>,
    /// Over cascades with depth ≥ 1 (unrestricted for `general`).
    pub depth: Option<SummaryStats>,
    /// Over cascades with virality ≥ 1 (unrestricted for `general`).
    pub virality: Option<SummaryStats>,
}

/// Counts and box statistics per subgroup, then an `unclassified` count
/// row and an unrestricted `general` row over every cascade in `metrics`.
pub fn subgroup_report(assignments: &[SourceAssignment], metrics: &[CascadeMetrics]) -> Vec<SubgroupRow> {
    let by_root: BTreeMap<&str, &CascadeMetrics> = metrics.iter().map(|m| (m.root_id.as_str(), m)).collect();
    let mut groups: BTreeMap<Subgroup, Vec<&CascadeMetrics>> = BTreeMap::new();
    let mut unclassified = 0;
    for a in assignments {
        let Some(m) = by_root.get(a.root_id.as_str()) else { continue };
        match a.subgroup {
            Some(g) => groups.entry(g).or_default().push(m),
            None => unclassified += 1,
        }
    }

    let stats = |vals: Vec<f64>| summary_stats(&vals, false).ok();
    let row = |label: &str, ms: &[&CascadeMetrics], restrict: bool| SubgroupRow {
        label: label.to_string(),
        count: ms.len(),
        size: stats(ms.iter().map(|m| m.size as f64).collect()),
        depth: stats(ms.iter().filter(|m| !restrict || m.depth >= 1).map(|m| m.depth as f64).collect()),
        virality: stats(ms.iter().filter(|m| !restrict || m.virality >= 1.0).map(|m| m.virality).collect()),
    };

    let mut rows: Vec<SubgroupRow> = Subgroup::ALL
        .iter()
        .map(|g| row(g.as_str(), groups.get(g).map_or(&[][..], Vec::as_slice), true))
        .collect();
    rows.push(SubgroupRow { label: "unclassified".into(), count: unclassified, size: None, depth: None, virality: None });
    let all: Vec<&CascadeMetrics> = metrics.iter().collect();
    rows.push(row("general", &all, false));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{compute_metrics, CascadeTree};
    use alloc::vec;

    fn post(id: &str, url: Option<&str>) -> ThreadEvent {
        ThreadEvent::post(id, Some("u"), 1, "", url, "conspiracy")
    }

    #[test]
    fn domain_extraction() {
        assert_eq!(extract_domain("https://www.nytimes.com/2018/a.html").as_deref(), Some("nytimes.com"));
        assert_eq!(extract_domain("not a url"), None);
        assert_eq!(extract_domain("http://news.antiwar.com/x").as_deref(), Some("news.antiwar.com"));
        assert_eq!(extract_domain("HTTPS://User@WWW.Example.COM:8080/p?q#f").as_deref(), Some("example.com"));
        assert_eq!(extract_domain("http:///nohost"), None);
        assert_eq!(extract_domain("ftp://localhost/x"), None);
    }

    #[test]
    fn seeded_map_assignments() {
        let map = DomainMap::seeded();
        let g = |u: &str| classify_source(&post("p", Some(u)), &map).subgroup;
        assert_eq!(g("https://www.nytimes.com/x"), Some(Subgroup::LeftLeaning));
        assert_eq!(g("http://foxnews.com/a"), Some(Subgroup::Right));
        assert_eq!(g("https://i.imgur.com/a.png"), Some(Subgroup::Social(Social::Imgur)));
        assert_eq!(g("https://youtu.be/abc"), Some(Subgroup::Social(Social::Youtube)));
        assert_eq!(g("https://www.reddit.com/r/conspiracy/comments/x"), Some(Subgroup::Homegrown));
        assert_eq!(g("https://unknown-blog.example/x"), None);
        assert_eq!(classify_source(&post("p", None), &map).subgroup, Some(Subgroup::Homegrown));
        // the map's casing does not matter
        assert_eq!(g("https://WWW.NYTIMES.COM/x"), Some(Subgroup::LeftLeaning));
    }

    #[test]
    fn longest_suffix_wins() {
        let mut map = DomainMap::new();
        map.insert("antiwar.com", Subgroup::Left);
        map.insert("news.antiwar.com", Subgroup::RightLeaning);
        assert_eq!(map.lookup("news.antiwar.com"), Some(("news.antiwar.com", Subgroup::RightLeaning)));
        assert_eq!(map.lookup("original.antiwar.com"), Some(("antiwar.com", Subgroup::Left)));
        assert_eq!(map.lookup("antiwar.org"), None);
    }

    #[test]
    fn map_parse_errors() {
        assert!(matches!(DomainMap::parse_csv("domain,subgroup\nfoo.com,sideways"), Err(Error::DomainMap { line: 2, .. })));
        assert!(matches!(DomainMap::parse_csv("nocomma"), Err(Error::DomainMap { line: 1, .. })));
        let m = DomainMap::parse_csv("domain,subgroup\nwww.Foo.com,center\n").unwrap();
        assert_eq!(m.lookup("foo.com"), Some(("foo.com", Subgroup::Center)));
    }

    fn metrics_with_depth(id: &str, depth: usize) -> CascadeMetrics {
        let parents: Vec<Option<usize>> = (0..=depth).map(|i| i.checked_sub(1)).collect();
        let mut m = compute_metrics(&CascadeTree::from_parents(&parents).unwrap());
        m.root_id = id.into();
        m
    }

    #[test]
    fn report_restricts_depth_and_virality() {
        let metrics = vec![metrics_with_depth("a", 0), metrics_with_depth("b", 0), metrics_with_depth("c", 2)];
        let assign = |id: &str, g| SourceAssignment { root_id: id.into(), subgroup: g, matched_domain: None };
        let assignments = vec![
            assign("a", Some(Subgroup::Left)),
            assign("b", Some(Subgroup::Left)),
            assign("c", Some(Subgroup::Left)),
        ];
        let rows = subgroup_report(&assignments, &metrics);
        let left = rows.iter().find(|r| r.label == "left").unwrap();
        assert_eq!(left.count, 3);
        assert_eq!(left.size.unwrap().count, 3);
        let depth = left.depth.unwrap();
        assert_eq!((depth.count, depth.median), (1, 2.0));
        let right = rows.iter().find(|r| r.label == "right").unwrap();
        assert_eq!(right.count, 0);
        assert!(right.size.is_none() && right.depth.is_none());
        let general = rows.last().unwrap();
        assert_eq!(general.label, "general");
        assert_eq!(general.count, metrics.len());
        assert_eq!(general.depth.unwrap().count, 3);
    }

    #[test]
    fn counts_partition_posts() {
        let map = DomainMap::seeded();
        let posts = [
            post("a", None),
            post("b", Some("https://cnn.com/x")),
            post("c", Some("https://nowhere.example/x")),
            post("d", Some("garbage")),
        ];
        let metrics: Vec<CascadeMetrics> = posts
            .iter()
            .map(|p| {
                let mut m = metrics_with_depth(&p.id, 0);
                m.root_id = p.id.clone();
                m
            })
            .collect();
        let assignments: Vec<_> = posts.iter().map(|p| classify_source(p, &map)).collect();
        let rows = subgroup_report(&assignments, &metrics);
        let assigned: usize = rows.iter().filter(|r| r.label != "general").map(|r| r.count).sum();
        assert_eq!(assigned, posts.len());
    }
}
