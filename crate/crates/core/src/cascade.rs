//! Cascade trees: assembly from thread events, structural and temporal
//! indicators, and per-cascade growth curves.
//!
//! Nodes of a [`CascadeTree`] are stored in *arrival order*: the root first,
//! then comments ordered by `(created_utc, id)` subject to every parent
//! preceding its children. Any prefix of that order is itself a rooted tree,
//! which is what the growth curves rely on.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::event::{EventKind, ThreadEvent};
use crate::time::Month;
use crate::{Error, Result};

/// Default cap on growth-curve indices (depth and size).
pub const DEFAULT_GROWTH_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub parent: Option<usize>,
    pub author: Option<String>,
    pub created_utc: i64,
    pub depth: usize,
}

/// A post and the hierarchy of comments beneath it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeTree {
    nodes: Vec<Node>,
    children: Vec<Vec<usize>>,
    pub community: String,
    pub url: Option<String>,
}

/// Structural description of one node, used to assemble trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: String,
    /// `None` only for the root.
    pub parent_id: Option<String>,
    pub author: Option<String>,
    pub created_utc: i64,
}

impl NodeRecord {
    pub fn new(id: &str, parent_id: Option<&str>, author: Option<&str>, created_utc: i64) -> Self {
        NodeRecord {
            id: id.into(),
            parent_id: parent_id.map(String::from),
            author: author.map(String::from),
            created_utc,
        }
    }

    fn from_event(event: &ThreadEvent) -> Self {
        NodeRecord {
            id: event.id.clone(),
            parent_id: event.parent_id.clone(),
            author: event.author.clone(),
            created_utc: event.created_utc,
        }
    }
}

/// Result of assembling one tree from a root and candidate comments.
#[derive(Debug, Clone)]
pub struct TreeAssembly {
    pub tree: CascadeTree,
    pub orphans: u64,
    pub duplicates: u64,
}

impl CascadeTree {
    /// Assembles a tree from its root record and comment records. Comments
    /// whose parent chain does not reach the root are dropped as orphans;
    /// repeated ids keep their first occurrence.
    pub fn assemble(root: NodeRecord, comments: Vec<NodeRecord>) -> TreeAssembly {
        let mut duplicates = 0u64;
        let mut records = Vec::with_capacity(comments.len() + 1);
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        index.insert(root.id.clone(), 0);
        records.push(root);
        for rec in comments {
            if index.contains_key(&rec.id) {
                duplicates += 1;
                continue;
            }
            index.insert(rec.id.clone(), records.len());
            records.push(rec);
        }

        let n = records.len();
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, rec) in records.iter().enumerate().skip(1) {
            if let Some(&p) = rec.parent_id.as_deref().and_then(|pid| index.get(pid)) {
                if p != i {
                    kids[p].push(i);
                }
            }
        }
        drop(index);

        // Greedy topological order: earliest available node by (time, id).
        let mut order = Vec::with_capacity(n);
        let mut depth_of = vec![0usize; n];
        let mut parent_of = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        order.push(0);
        for &c in &kids[0] {
            depth_of[c] = 1;
            parent_of[c] = 0;
            heap.push(Reverse((records[c].created_utc, records[c].id.as_str(), c)));
        }
        while let Some(Reverse((_, _, i))) = heap.pop() {
            order.push(i);
            for &c in &kids[i] {
                depth_of[c] = depth_of[i] + 1;
                parent_of[c] = i;
                heap.push(Reverse((records[c].created_utc, records[c].id.as_str(), c)));
            }
        }
        let orphans = (n - order.len()) as u64;

        let mut new_index = vec![usize::MAX; n];
        for (pos, &old) in order.iter().enumerate() {
            new_index[old] = pos;
        }
        let mut slots: Vec<Option<NodeRecord>> = records.into_iter().map(Some).collect();
        let mut nodes = Vec::with_capacity(order.len());
        let mut children = vec![Vec::new(); order.len()];
        for (pos, &old) in order.iter().enumerate() {
            let rec = slots[old].take().expect("each node placed once");
            let parent = (pos > 0).then(|| new_index[parent_of[old]]);
            if let Some(p) = parent {
                children[p].push(pos);
            }
            nodes.push(Node { id: rec.id, parent, author: rec.author, created_utc: rec.created_utc, depth: depth_of[old] });
        }
        TreeAssembly {
            tree: CascadeTree { nodes, children, community: String::new(), url: None },
            orphans,
            duplicates,
        }
    }

    /// Builds a tree from a parent array where `parents[0]` is `None` and
    /// every other entry points to an earlier index. Timestamps default to
    /// the node index in seconds and authors are absent.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<CascadeTree> {
        let times: Vec<i64> = (0..parents.len() as i64).collect();
        Self::from_parents_with_times(parents, &times)
    }

    pub fn from_parents_with_times(parents: &[Option<usize>], times: &[i64]) -> Result<CascadeTree> {
        if parents.is_empty() {
            return Err(Error::InvalidTree("no nodes".into()));
        }
        if parents.len() != times.len() {
            return Err(Error::Dimension { expected: parents.len(), got: times.len() });
        }
        if parents[0].is_some() {
            return Err(Error::InvalidTree("node 0 must be the root".into()));
        }
        let mut comments = Vec::with_capacity(parents.len() - 1);
        for (i, p) in parents.iter().enumerate().skip(1) {
            match p {
                Some(p) if *p < parents.len() && *p != i => {}
                _ => return Err(Error::InvalidTree(alloc::format!("node {i} has no valid parent"))),
            }
            comments.push(NodeRecord {
                id: alloc::format!("{i}"),
                parent_id: p.map(|p| alloc::format!("{p}")),
                author: None,
                created_utc: times[i],
            });
        }
        let root = NodeRecord { id: "0".into(), parent_id: None, author: None, created_utc: times[0] };
        let asm = Self::assemble(root, comments);
        if asm.orphans > 0 {
            return Err(Error::InvalidTree("cycle or unreachable node".into()));
        }
        Ok(asm.tree)
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn root_id(&self) -> &str {
        &self.nodes[0].id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn children(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Parent index per node; the root maps to itself.
    fn parent_indices(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.parent.unwrap_or(0)).collect()
    }

    pub fn unique_users(&self) -> usize {
        self.nodes.iter().filter_map(|n| n.author.as_deref()).collect::<BTreeSet<_>>().len()
    }
}

/// Streaming grouper that turns thread events into cascade trees.
///
/// Only structural fields are retained (ids, parent ids, authors, times),
/// so memory is proportional to the number of nodes, not the text volume.
#[derive(Debug, Default)]
pub struct CascadeBuilder {
    posts: Vec<(NodeRecord, String, Option<String>)>,
    post_index: BTreeMap<String, usize>,
    comments: BTreeMap<String, Vec<NodeRecord>>,
    duplicate_posts: u64,
}

/// Trees produced by [`build_cascades`] plus the bookkeeping counts.
#[derive(Debug, Clone, Default)]
pub struct Assembly {
    pub trees: Vec<CascadeTree>,
    pub orphans: u64,
    pub duplicates: u64,
}

impl Assembly {
    pub fn total_nodes(&self) -> usize {
        self.trees.iter().map(CascadeTree::size).sum()
    }
}

impl CascadeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: &ThreadEvent) {
        match event.kind {
            EventKind::Post => {
                if self.post_index.contains_key(&event.id) {
                    self.duplicate_posts += 1;
                    return;
                }
                self.post_index.insert(event.id.clone(), self.posts.len());
                self.posts.push((NodeRecord::from_event(event), event.community.clone(), event.url.clone()));
            }
            EventKind::Comment => {
                self.comments.entry(event.root_id.clone()).or_default().push(NodeRecord::from_event(event));
            }
        }
    }

    /// Assembles every tree, in the order posts were first seen.
    pub fn finish(mut self) -> Assembly {
        let mut out = Assembly { duplicates: self.duplicate_posts, ..Assembly::default() };
        drop(core::mem::take(&mut self.post_index));
        out.trees.reserve(self.posts.len());
        for (root, community, url) in self.posts {
            let comments = self.comments.remove(&root.id).unwrap_or_default();
            let mut asm = CascadeTree::assemble(root, comments);
            asm.tree.community = community;
            asm.tree.url = url;
            out.orphans += asm.orphans;
            out.duplicates += asm.duplicates;
            out.trees.push(asm.tree);
        }
        // Comments whose post never appeared.
        out.orphans += self.comments.values().map(|v| v.len() as u64).sum::<u64>();
        out
    }
}

/// Groups events into one tree per post. Comments whose post or parent
/// chain is missing are counted as orphans.
pub fn build_cascades<'a, I>(events: I) -> Assembly
where
    I: IntoIterator<Item = &'a ThreadEvent>,
{
    let mut builder = CascadeBuilder::new();
    for e in events {
        builder.push(e);
    }
    builder.finish()
}

/// The per-cascade indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeMetrics {
    pub root_id: String,
    pub community: String,
    pub size: usize,
    pub unique_users: usize,
    pub depth: usize,
    pub virality: f64,
    pub lifetime_minutes: f64,
    /// `None` when fewer than three events or a degenerate spacing.
    pub burstiness: Option<f64>,
    pub created_month: Month,
    /// The last comment predates the post; lifetime was clamped to zero.
    pub lifetime_clamped: bool,
}

pub fn compute_metrics(tree: &CascadeTree) -> CascadeMetrics {
    let root = tree.root();
    let last = tree.nodes[1..].iter().map(|n| n.created_utc).max();
    let (lifetime_minutes, lifetime_clamped) = match last {
        Some(t) if t >= root.created_utc => ((t - root.created_utc) as f64 / 60.0, false),
        Some(_) => (0.0, true),
        None => (0.0, false),
    };
    CascadeMetrics {
        root_id: root.id.clone(),
        community: tree.community.clone(),
        size: tree.size(),
        unique_users: tree.unique_users(),
        depth: tree.depth(),
        virality: wiener_index(tree),
        lifetime_minutes,
        burstiness: burstiness(tree),
        created_month: Month::from_unix(root.created_utc),
        lifetime_clamped,
    }
}

/// Structural virality: mean shortest-path distance over all unordered node
/// pairs, computed in linear time as `Σ_edges s·(n−s) / C(n, 2)` where `s` is
/// the size of the subtree below each edge. Zero for a single node.
pub fn wiener_index(tree: &CascadeTree) -> f64 {
    mean_pair_distance(&tree.parent_indices())
}

/// Mean pairwise distance of the tree given by a parent array in which every
/// non-root entry points to an earlier index.
fn mean_pair_distance(parents: &[usize]) -> f64 {
    let n = parents.len();
    if n < 2 {
        return 0.0;
    }
    let mut subtree = vec![1u64; n];
    let mut total: u128 = 0;
    for i in (1..n).rev() {
        let s = subtree[i];
        total += u128::from(s) * u128::from(n as u64 - s);
        subtree[parents[i]] += s;
    }
    let pairs = (n as u128) * (n as u128 - 1) / 2;
    total as f64 / pairs as f64
}

/// Burstiness of the cascade's event times (post plus comments).
/// Comments stamped before the post are treated as arriving with it.
pub fn burstiness(tree: &CascadeTree) -> Option<f64> {
    let root = tree.root().created_utc;
    let mut times: Vec<i64> = tree.nodes.iter().map(|n| n.created_utc.max(root)).collect();
    times[1..].sort_unstable();
    burstiness_of_times(&times)
}

/// `B = (σ − m) / (σ + m)` over consecutive differences of `times`, with the
/// population standard deviation. Expects ascending times.
pub fn burstiness_of_times(times: &[i64]) -> Option<f64> {
    if times.len() < 3 {
        return None;
    }
    let gaps: Vec<f64> = times.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / n;
    let sd = libm::sqrt(var);
    let denom = sd + mean;
    if denom == 0.0 {
        return None;
    }
    Some((sd - mean) / denom)
}

/// A curve over consecutive integer indices starting at `first_index`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Curve<T> {
    pub first_index: usize,
    pub values: Vec<T>,
}

impl<T: Copy> Curve<T> {
    pub fn get(&self, index: usize) -> Option<T> {
        index.checked_sub(self.first_index).and_then(|i| self.values.get(i).copied())
    }

    pub fn last_index(&self) -> Option<usize> {
        (!self.values.is_empty()).then(|| self.first_index + self.values.len() - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| (self.first_index + i, *v))
    }
}

/// Growth of one cascade, indexed by depth (from 0) or size (from 1).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrowthCurves {
    /// Distinct identifiable users among nodes at depth ≤ d.
    pub users_at_depth: Curve<usize>,
    /// Minutes until the first node at depth d arrived.
    pub time_to_depth: Curve<f64>,
    /// Minutes until the s-th node arrived.
    pub time_to_size: Curve<f64>,
    /// Structural virality of the first s nodes.
    pub virality_at_size: Curve<f64>,
}

/// Growth curves capped at `max_index` for both depth and size.
///
/// Arrival times are taken along the tree's arrival order and made
/// non-decreasing (a running maximum), so clock skew cannot make a later
/// arrival look earlier.
pub fn growth_curves(tree: &CascadeTree, max_index: usize) -> GrowthCurves {
    let root_t = tree.root().created_utc;
    let n = tree.size();
    let mut arrival = Vec::with_capacity(n);
    let mut latest = 0.0f64;
    for node in &tree.nodes {
        let t = ((node.created_utc - root_t) as f64 / 60.0).max(0.0);
        latest = latest.max(t);
        arrival.push(latest);
    }

    let size_cap = n.min(max_index);
    let time_to_size = Curve { first_index: 1, values: arrival[..size_cap].to_vec() };

    let parents = tree.parent_indices();
    let virality_at_size = Curve {
        first_index: 1,
        values: (1..=size_cap).map(|s| mean_pair_distance(&parents[..s])).collect(),
    };

    let depth_cap = tree.depth().min(max_index);
    let mut first_at_depth = vec![f64::NAN; depth_cap + 1];
    let mut by_depth: Vec<Vec<&str>> = vec![Vec::new(); depth_cap + 1];
    for (i, node) in tree.nodes.iter().enumerate() {
        if node.depth <= depth_cap {
            if first_at_depth[node.depth].is_nan() {
                first_at_depth[node.depth] = arrival[i];
            }
            if let Some(a) = node.author.as_deref() {
                by_depth[node.depth].push(a);
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut users = Vec::with_capacity(depth_cap + 1);
    for authors in by_depth {
        seen.extend(authors);
        users.push(seen.len());
    }

    GrowthCurves {
        users_at_depth: Curve { first_index: 0, values: users },
        time_to_depth: Curve { first_index: 0, values: first_at_depth },
        time_to_size,
        virality_at_size,
    }
}

/// Cascade counts per UTC calendar month of the root post.
pub fn monthly_counts<'a, I>(metrics: I) -> BTreeMap<Month, usize>
where
    I: IntoIterator<Item = &'a CascadeMetrics>,
{
    let mut out = BTreeMap::new();
    for m in metrics {
        *out.entry(m.created_month).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::VecDeque;
    use proptest::prelude::*;

    /// All-pairs BFS mean distance; independent of the subtree identity.
    fn brute_force_mean_distance(tree: &CascadeTree) -> f64 {
        let n = tree.size();
        if n < 2 {
            return 0.0;
        }
        let mut adj = vec![Vec::new(); n];
        for (i, node) in tree.nodes().iter().enumerate() {
            if let Some(p) = node.parent {
                adj[i].push(p);
                adj[p].push(i);
            }
        }
        let mut total = 0usize;
        for s in 0..n {
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        q.push_back(v);
                    }
                }
            }
            total += dist.iter().skip(s + 1).sum::<usize>();
        }
        total as f64 / (n * (n - 1) / 2) as f64
    }

    fn fig3a() -> CascadeTree {
        // r; a, b under r; c, d under a; e under b
        CascadeTree::from_parents(&[None, Some(0), Some(0), Some(1), Some(1), Some(2)]).unwrap()
    }

    fn events(spec: &[(&str, Option<&str>, Option<&str>, i64)]) -> Vec<ThreadEvent> {
        spec.iter()
            .map(|&(id, parent, author, t)| match parent {
                None => ThreadEvent::post(id, author, t, "", None, "conspiracy"),
                Some(p) => ThreadEvent::comment(id, p, "P", author, t, "", "conspiracy"),
            })
            .collect()
    }

    #[test]
    fn simple_chain_assembly() {
        let ev = events(&[("P", None, Some("u"), 1), ("A", Some("P"), Some("v"), 2), ("B", Some("A"), Some("w"), 3)]);
        let asm = build_cascades(&ev);
        assert_eq!(asm.trees.len(), 1);
        assert_eq!(asm.trees[0].size(), 3);
        assert_eq!(asm.trees[0].depth(), 2);
        assert_eq!(asm.orphans, 0);
    }

    #[test]
    fn missing_parent_is_orphan() {
        let ev = events(&[("P", None, Some("u"), 1), ("X", Some("missing"), Some("v"), 2)]);
        let asm = build_cascades(&ev);
        assert_eq!(asm.trees[0].size(), 1);
        assert_eq!(asm.orphans, 1);
    }

    #[test]
    fn descendants_of_orphans_are_orphans_too() {
        let ev = events(&[
            ("P", None, Some("u"), 1),
            ("X", Some("gone"), Some("v"), 2),
            ("Y", Some("X"), Some("w"), 3),
            ("Z", Some("P"), Some("w"), 4),
        ]);
        let asm = build_cascades(&ev);
        assert_eq!(asm.trees[0].size(), 2);
        assert_eq!(asm.orphans, 2);
    }

    #[test]
    fn comment_without_post_is_orphan() {
        let ev = vec![ThreadEvent::comment("c", "q", "q", Some("a"), 5, "", "x")];
        let asm = build_cascades(&ev);
        assert!(asm.trees.is_empty());
        assert_eq!(asm.orphans, 1);
    }

    #[test]
    fn duplicate_ids_keep_first() {
        let ev = events(&[("P", None, Some("u"), 1), ("A", Some("P"), Some("v"), 2), ("A", Some("P"), Some("w"), 3)]);
        let asm = build_cascades(&ev);
        assert_eq!(asm.trees[0].size(), 2);
        assert_eq!(asm.duplicates, 1);
        assert_eq!(asm.trees[0].nodes()[1].author.as_deref(), Some("v"));
    }

    #[test]
    fn cycle_is_dropped() {
        let ev = events(&[("P", None, Some("u"), 1), ("A", Some("B"), None, 2), ("B", Some("A"), None, 3)]);
        let asm = build_cascades(&ev);
        assert_eq!(asm.trees[0].size(), 1);
        assert_eq!(asm.orphans, 2);
    }

    #[test]
    fn children_sorted_by_time_then_id() {
        let ev = events(&[
            ("P", None, None, 1),
            ("b", Some("P"), None, 5),
            ("a", Some("P"), None, 5),
            ("c", Some("P"), None, 3),
        ]);
        let tree = &build_cascades(&ev).trees[0];
        let ids: Vec<&str> = tree.children(0).iter().map(|&i| tree.nodes()[i].id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn skewed_child_still_follows_parent() {
        // child stamped before its parent
        let ev = events(&[("P", None, None, 10), ("A", Some("P"), None, 50), ("B", Some("A"), None, 20)]);
        let tree = &build_cascades(&ev).trees[0];
        let ids: Vec<&str> = tree.nodes().iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, ["P", "A", "B"]);
    }

    #[test]
    fn fig3a_fixture() {
        let t = fig3a();
        let m = compute_metrics(&t);
        assert_eq!(m.size, 6);
        assert_eq!(m.depth, 2);
        assert!((m.virality - 32.0 / 15.0).abs() < 1e-12);
        assert!((brute_force_mean_distance(&t) - 32.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn single_node_metrics() {
        let t = CascadeTree::from_parents(&[None]).unwrap();
        let m = compute_metrics(&t);
        assert_eq!((m.size, m.depth), (1, 0));
        assert_eq!(m.virality, 0.0);
        assert_eq!(m.lifetime_minutes, 0.0);
        assert_eq!(m.burstiness, None);
    }

    #[test]
    fn path_virality() {
        let t = CascadeTree::from_parents(&[None, Some(0), Some(1)]).unwrap();
        assert!((wiener_index(&t) - 4.0 / 3.0).abs() < 1e-12);
        assert!((brute_force_mean_distance(&t) - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lifetime_in_minutes() {
        let t = CascadeTree::from_parents_with_times(&[None, Some(0), Some(0)], &[0, 600, 3600]).unwrap();
        assert_eq!(compute_metrics(&t).lifetime_minutes, 60.0);
    }

    #[test]
    fn negative_lifetime_clamped() {
        let t = CascadeTree::from_parents_with_times(&[None, Some(0)], &[1000, 400]).unwrap();
        let m = compute_metrics(&t);
        assert_eq!(m.lifetime_minutes, 0.0);
        assert!(m.lifetime_clamped);
    }

    #[test]
    fn unique_users_skip_deleted() {
        let ev = events(&[
            ("P", None, Some("u1"), 1),
            ("A", Some("P"), Some("u2"), 2),
            ("B", Some("P"), Some("u1"), 3),
            ("C", Some("P"), Some("[deleted]"), 4),
        ]);
        let tree = &build_cascades(&ev).trees[0];
        assert_eq!(tree.size(), 4);
        assert_eq!(compute_metrics(tree).unique_users, 2);
    }

    #[test]
    fn burstiness_cases() {
        assert_eq!(burstiness_of_times(&[0, 60, 120, 180]), Some(-1.0));
        let b = burstiness_of_times(&[0, 60, 180, 420]).unwrap();
        // tau = [60,120,240], m = 140, sigma = sqrt(16800/3)
        let sd = (5600.0f64).sqrt();
        assert!((b - (sd - 140.0) / (sd + 140.0)).abs() < 1e-12);
        assert!((b - (-0.303_34)).abs() < 1e-5);
        assert_eq!(burstiness_of_times(&[0, 10]), None);
        assert_eq!(burstiness_of_times(&[5, 5, 5]), None);
        // gaps [0, 2]: sigma = 1 = mean
        assert_eq!(burstiness_of_times(&[0, 0, 2]), Some(0.0));
    }

    #[test]
    fn growth_example() {
        // root t=0, a t=10 (d1), b t=20 (d1), c t=30 child of a
        let t = CascadeTree::from_parents_with_times(&[None, Some(0), Some(0), Some(1)], &[0, 10, 20, 30]).unwrap();
        let g = growth_curves(&t, DEFAULT_GROWTH_CAP);
        assert_eq!(g.time_to_depth.values, vec![0.0, 10.0 / 60.0, 30.0 / 60.0]);
        assert!((g.virality_at_size.get(3).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(g.time_to_size.get(4), Some(0.5));
    }

    #[test]
    fn growth_single_node() {
        let t = CascadeTree::from_parents(&[None]).unwrap();
        let g = growth_curves(&t, 100);
        assert_eq!(g.time_to_depth.iter().collect::<Vec<_>>(), vec![(0, 0.0)]);
        assert_eq!(g.users_at_depth.iter().collect::<Vec<_>>(), vec![(0, 0)]);
        assert_eq!(g.time_to_size.iter().collect::<Vec<_>>(), vec![(1, 0.0)]);
        assert_eq!(g.virality_at_size.iter().collect::<Vec<_>>(), vec![(1, 0.0)]);
    }

    #[test]
    fn growth_cap_applies() {
        let parents: Vec<Option<usize>> = (0..150).map(|i| if i == 0 { None } else { Some(i - 1) }).collect();
        let t = CascadeTree::from_parents(&parents).unwrap();
        let g = growth_curves(&t, 100);
        assert_eq!(g.time_to_size.last_index(), Some(100));
        assert_eq!(g.time_to_depth.last_index(), Some(100));
    }

    #[test]
    fn monthly_buckets() {
        let mk = |t| {
            let mut m = compute_metrics(&CascadeTree::from_parents_with_times(&[None], &[t]).unwrap());
            m.created_month = Month::from_unix(t);
            m
        };
        // 2016-10-05 and 2016-10-20
        let ms = [mk(1_475_625_600), mk(1_476_921_600)];
        let counts = monthly_counts(&ms);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&Month { year: 2016, month: 10 }], 2);
        assert!(monthly_counts(&[]).is_empty());
    }

    fn arb_tree() -> impl Strategy<Value = (Vec<Option<usize>>, Vec<i64>)> {
        (1usize..80).prop_flat_map(|n| {
            let parents = (0..n)
                .map(|i| if i == 0 { Just(None).boxed() } else { (0..i).prop_map(Some).boxed() })
                .collect::<Vec<_>>();
            (parents, proptest::collection::vec(0i64..100_000, n))
        })
    }

    proptest! {
        #[test]
        fn wiener_matches_brute_force((parents, times) in arb_tree()) {
            let t = CascadeTree::from_parents_with_times(&parents, &times).unwrap();
            prop_assert!((wiener_index(&t) - brute_force_mean_distance(&t)).abs() < 1e-9);
        }

        #[test]
        fn structural_invariants((parents, times) in arb_tree()) {
            let t = CascadeTree::from_parents_with_times(&parents, &times).unwrap();
            let m = compute_metrics(&t);
            prop_assert!(m.depth < m.size);
            prop_assert!(m.virality >= 0.0);
            prop_assert_eq!(m.virality == 0.0, m.size == 1);
            if let Some(b) = m.burstiness {
                prop_assert!((-1.0..=1.0).contains(&b));
            }
            for (i, node) in t.nodes().iter().enumerate().skip(1) {
                prop_assert!(node.parent.unwrap() < i);
            }
        }

        #[test]
        fn growth_monotone((parents, times) in arb_tree()) {
            let t = CascadeTree::from_parents_with_times(&parents, &times).unwrap();
            let g = growth_curves(&t, 100);
            prop_assert!(g.time_to_size.values.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(g.time_to_depth.values.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(g.users_at_depth.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn assembly_ignores_input_order((parents, times) in arb_tree(), seed in any::<u64>()) {
            let mut ev: Vec<ThreadEvent> = vec![ThreadEvent::post("0", Some("u0"), times[0] + 1, "", None, "c")];
            for i in 1..parents.len() {
                let p = alloc::format!("{}", parents[i].unwrap());
                ev.push(ThreadEvent::comment(&alloc::format!("{i}"), &p, "0", Some("u"), times[i] + 1, "", "c"));
            }
            let a = compute_metrics(&build_cascades(&ev).trees[0]);
            let mut rng = crate::rng::Rng::new(seed);
            rng.shuffle(&mut ev[1..]);
            let b = compute_metrics(&build_cascades(&ev).trees[0]);
            prop_assert_eq!(a, b);
        }
    }
}
