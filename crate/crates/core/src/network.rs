//! User comment networks and targeted degree percolation.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cascade::CascadeTree;
use crate::stats::{ccdf, Ccdf};
use crate::{Error, Result};

/// Directed user graph: an edge `u → v` means `v` replied to `u`.
///
/// Nodes are the users incident to at least one edge, sorted by name; the
/// node id used for tie-breaking is the position in that order. Repeated
/// replies collapse into one edge whose weight counts them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommentNetwork {
    names: Vec<String>,
    /// Sorted by `(from, to)`, no duplicates, no self-loops.
    edges: Vec<(u32, u32, u32)>,
}

impl CommentNetwork {
    /// Builds from weighted named edges; duplicates are merged by summing
    /// weights and self-loops are dropped.
    pub fn from_weighted_edges<I, S>(edges: I) -> Self
    where
        I: IntoIterator<Item = (S, S, u32)>,
        S: AsRef<str>,
    {
        let mut agg: BTreeMap<(String, String), u32> = BTreeMap::new();
        for (a, b, w) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b || w == 0 {
                continue;
            }
            *agg.entry((a.into(), b.into())).or_insert(0) += w;
        }
        let mut names: Vec<String> = agg.keys().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        names.sort_unstable();
        names.dedup();
        let id = |n: &str| names.binary_search_by(|x| x.as_str().cmp(n)).expect("name collected") as u32;
        let mut edges: Vec<(u32, u32, u32)> = agg.iter().map(|((a, b), &w)| (id(a), id(b), w)).collect();
        edges.sort_unstable();
        CommentNetwork { names, edges }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self) -> &[(u32, u32, u32)] {
        &self.edges
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| u64::from(e.2)).sum()
    }

    /// `2E / N` under the distinct-edge convention.
    pub fn mean_degree(&self) -> f64 {
        if self.names.is_empty() {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.names.len() as f64
    }

    /// In-degree plus out-degree over distinct edges, indexed by node id.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.names.len()];
        for &(a, b, _) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    fn undirected_adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.names.len()];
        for &(a, b, _) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        adj
    }
}

/// Adds one edge per reply between two identifiable, distinct users.
pub fn build_comment_network<'a, I>(trees: I) -> CommentNetwork
where
    I: IntoIterator<Item = &'a CascadeTree>,
{
    let mut pairs: Vec<(&'a str, &'a str, u32)> = Vec::new();
    for tree in trees {
        let nodes = tree.nodes();
        for node in nodes {
            let Some(p) = node.parent else { continue };
            if let (Some(to), Some(from)) = (node.author.as_deref(), nodes[p].author.as_deref()) {
                pairs.push((from, to, 1));
            }
        }
    }
    CommentNetwork::from_weighted_edges(pairs)
}

/// CCDF of node degrees.
pub fn degree_distribution(net: &CommentNetwork) -> Result<Ccdf> {
    if net.node_count() == 0 {
        return Err(Error::EmptyNetwork);
    }
    let deg: Vec<f64> = net.degrees().into_iter().map(|d| d as f64).collect();
    ccdf(&deg)
}

/// `(q, G(q))` samples of the giant-component curve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PercolationTrace {
    pub points: Vec<(f64, f64)>,
}

/// Number of nodes removed at fraction `q`: `⌈q·N⌉`, clamped to `[0, N]`.
/// A relative slack of 1e-9 absorbs representation error in `q·N`.
pub fn removal_count(q: f64, n: usize) -> usize {
    let x = q * n as f64;
    let r = libm::ceil(x - 1e-9 * x.abs().max(1.0));
    if r <= 0.0 {
        0
    } else {
        (r as usize).min(n)
    }
}

/// Removal order by descending initial degree, ties by ascending node id.
pub fn static_removal_order(net: &CommentNetwork) -> Vec<u32> {
    let deg = net.degrees();
    let mut order: Vec<u32> = (0..net.node_count() as u32).collect();
    order.sort_by(|&a, &b| deg[b as usize].cmp(&deg[a as usize]).then(a.cmp(&b)));
    order
}

/// Removal order that always takes the node of largest *current* degree
/// (degree recomputed after each removal), ties by ascending node id.
pub fn adaptive_removal_order(net: &CommentNetwork) -> Vec<u32> {
    let n = net.node_count();
    let adj = net.undirected_adjacency();
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut heap: BinaryHeap<(usize, core::cmp::Reverse<u32>)> =
        (0..n as u32).map(|i| (deg[i as usize], core::cmp::Reverse(i))).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((d, core::cmp::Reverse(u))) = heap.pop() {
        let ui = u as usize;
        if removed[ui] || d != deg[ui] {
            continue;
        }
        removed[ui] = true;
        order.push(u);
        for &v in &adj[ui] {
            let vi = v as usize;
            if !removed[vi] {
                deg[vi] -= 1;
                heap.push((deg[vi], core::cmp::Reverse(v)));
            }
        }
    }
    order
}

/// `gcc[r]` = largest weakly connected component after removing the first
/// `r` nodes of `order`, for `r = 0..=N`. Computed by re-inserting nodes in
/// reverse removal order into a union-find.
pub fn giant_component_sizes(net: &CommentNetwork, order: &[u32]) -> Vec<usize> {
    let n = net.node_count();
    debug_assert_eq!(order.len(), n);
    let adj = net.undirected_adjacency();
    let mut uf = UnionFind::new(n);
    let mut present = vec![false; n];
    let mut gcc = vec![0usize; n + 1];
    let mut largest = 0usize;
    for r in (0..n).rev() {
        let u = order[r] as usize;
        present[u] = true;
        largest = largest.max(1);
        for &v in &adj[u] {
            if present[v as usize] {
                largest = largest.max(uf.union(u, v as usize));
            }
        }
        gcc[r] = largest;
    }
    gcc
}

/// Targeted attack: remove the highest-degree nodes and track the relative
/// size of the giant weakly connected component at each grid fraction.
pub fn percolate(net: &CommentNetwork, grid: &[f64], adaptive: bool) -> Result<PercolationTrace> {
    let n = net.node_count();
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    let order = if adaptive { adaptive_removal_order(net) } else { static_removal_order(net) };
    let gcc = giant_component_sizes(net, &order);
    let points = grid.iter().map(|&q| (q, gcc[removal_count(q, n)] as f64 / n as f64)).collect();
    Ok(PercolationTrace { points })
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(alloc::format!("grid `{spec}` is not start:stop:step"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, s] = parts.as_slice() else { return Err(bad()) };
    let (start, stop, step): (f64, f64, f64) =
        (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?, s.trim().parse().map_err(|_| bad())?);
    if step.is_nan() || step <= 0.0 || !(0.0..=1.0).contains(&start) || !(start..=1.0).contains(&stop) {
        return Err(bad());
    }
    let steps = libm::floor((stop - start) / step + 1e-9) as usize;
    Ok((0..=steps).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges and returns the size of the resulting set.
    fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return self.size[ra];
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.size[ra]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::ThreadEvent;
    use crate::rng::Rng;
    use alloc::collections::VecDeque;
    use alloc::format;

    /// Largest component among nodes not in `removed`, by BFS.
    fn naive_gcc(net: &CommentNetwork, removed: &[bool]) -> usize {
        let adj = net.undirected_adjacency();
        let mut seen = removed.to_vec();
        let mut best = 0;
        for s in 0..net.node_count() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            let mut size = 0;
            while let Some(u) = q.pop_front() {
                size += 1;
                for &v in &adj[u] {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        q.push_back(v as usize);
                    }
                }
            }
            best = best.max(size);
        }
        best
    }

    fn star(leaves: usize) -> CommentNetwork {
        CommentNetwork::from_weighted_edges((0..leaves).map(|i| ("hub".into(), format!("leaf{i:02}"), 1)))
    }

    fn random_net(n: usize, edges: usize, seed: u64) -> CommentNetwork {
        let mut rng = Rng::new(seed);
        CommentNetwork::from_weighted_edges(
            (0..edges).map(|_| (format!("u{}", rng.below(n)), format!("u{}", rng.below(n)), 1)),
        )
    }

    #[test]
    fn reply_creates_edge_from_parent_author() {
        let ev = [
            ThreadEvent::post("p", Some("U"), 1, "", None, "c"),
            ThreadEvent::comment("a", "p", "p", Some("V"), 2, "", "c"),
            ThreadEvent::comment("b", "p", "p", Some("U"), 3, "", "c"),
            ThreadEvent::comment("c", "a", "p", Some("[deleted]"), 4, "", "c"),
            ThreadEvent::comment("d", "p", "p", Some("V"), 5, "", "c"),
        ];
        let asm = crate::cascade::build_cascades(&ev);
        let net = build_comment_network(&asm.trees);
        assert_eq!(net.names(), ["U", "V"]);
        // U→V twice collapses with weight 2; U on own post is no edge
        assert_eq!(net.edges(), [(0, 1, 2)]);
        assert_eq!(net.total_weight(), 2);
    }

    #[test]
    fn degree_examples() {
        let tri = CommentNetwork::from_weighted_edges([("a", "b", 1), ("b", "c", 1), ("c", "a", 1)]);
        assert_eq!(tri.degrees(), [2, 2, 2]);
        let single = CommentNetwork::from_weighted_edges([("u", "v", 1)]);
        assert_eq!(single.degrees(), [1, 1]);
        let s = star(10);
        let deg = s.degrees();
        assert_eq!(deg[0], 10);
        assert!(deg[1..].iter().all(|&d| d == 1));
        let c = degree_distribution(&s).unwrap();
        assert_eq!(c.points, [(1.0, 1.0), (10.0, 1.0 / 11.0)]);
        assert_eq!(degree_distribution(&CommentNetwork::default()), Err(Error::EmptyNetwork));
    }

    #[test]
    fn mean_degree_matches_degree_sequence() {
        let net = random_net(60, 300, 4);
        let deg = net.degrees();
        let mean = deg.iter().sum::<usize>() as f64 / deg.len() as f64;
        assert_eq!(net.mean_degree(), mean);
    }

    #[test]
    fn star_collapses_after_hub_removal() {
        let s = star(10);
        let trace = percolate(&s, &[0.0, 0.05, 0.1], false).unwrap();
        assert_eq!(trace.points[0].1, 1.0);
        assert_eq!(trace.points[1].1, 1.0 / 11.0);
        assert_eq!(trace.points[2].1, 1.0 / 11.0);
    }

    #[test]
    fn removal_count_rounds_up() {
        assert_eq!(removal_count(0.0, 10), 0);
        assert_eq!(removal_count(0.1, 10), 1);
        assert_eq!(removal_count(0.3, 10), 3);
        assert_eq!(removal_count(0.31, 10), 4);
        assert_eq!(removal_count(1.0, 10), 10);
        assert_eq!(removal_count(2.0, 10), 10);
    }

    #[test]
    fn reverse_merge_matches_naive() {
        for seed in 0..5 {
            let net = random_net(120, 200, seed);
            for adaptive in [false, true] {
                let order = if adaptive { adaptive_removal_order(&net) } else { static_removal_order(&net) };
                let gcc = giant_component_sizes(&net, &order);
                let mut removed = vec![false; net.node_count()];
                for r in 0..=net.node_count() {
                    assert_eq!(gcc[r], naive_gcc(&net, &removed), "seed {seed} r {r}");
                    if r < order.len() {
                        removed[order[r] as usize] = true;
                    }
                }
                assert!(gcc.windows(2).all(|w| w[0] >= w[1]));
                assert_eq!(gcc[net.node_count() - 1], 1);
            }
        }
    }

    #[test]
    fn adaptive_order_tracks_current_degree() {
        // c goes first (degree 3); afterwards a and b tie at 1 while d and e
        // drop to 0, so the smaller id wins
        let net = CommentNetwork::from_weighted_edges([("a", "b", 1), ("b", "c", 1), ("c", "d", 1), ("c", "e", 1)]);
        let order = adaptive_removal_order(&net);
        assert_eq!(net.names()[order[0] as usize], "c");
        assert_eq!(net.names()[order[1] as usize], "a");
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:0.15:0.05").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[3] - 0.15).abs() < 1e-12);
        assert_eq!(parse_grid("0:0.15:0.001").unwrap().len(), 151);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }
}
