//! Category graph: directed parent -> child edges over lexicon ids, BFS
//! depths from an area, and the depth-decay weights used to score how
//! "general" a topic is relative to that area.
//!
//! Cycles are tolerated (real category systems have them); a topic's depth is
//! the length of the shallowest path from the area.  Self-loops are dropped
//! at insertion.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use crate::TopicId;

/// Default depth bound for the candidate set.
pub const DEFAULT_CANDIDATE_DEPTH: u32 = 3;

/// Default depth bound for the contributive set.
pub const DEFAULT_CONTRIBUTIVE_DEPTH: u32 = 1;

/// What happened to one inserted edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOutcome {
    Added,
    /// Parent -> child was already present.
    Duplicate,
    /// Parent == child; never stored.
    SelfLoopDropped,
}

/// Directed category graph with set-valued adjacency.
#[derive(Debug, Clone, Default)]
pub struct CategoryGraph {
    children: BTreeMap<TopicId, BTreeSet<TopicId>>,
}

impl CategoryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(&mut self, parent: TopicId, child: TopicId) -> EdgeOutcome {
        if parent == child {
            return EdgeOutcome::SelfLoopDropped;
        }
        if self.children.entry(parent).or_default().insert(child) {
            EdgeOutcome::Added
        } else {
            EdgeOutcome::Duplicate
        }
    }

    pub fn children(&self, parent: TopicId) -> impl Iterator<Item = TopicId> + '_ {
        self.children.get(&parent).into_iter().flatten().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.children.values().map(BTreeSet::len).sum()
    }

    /// `(parent, child)` pairs in ascending id order.
    pub fn edges(&self) -> impl Iterator<Item = (TopicId, TopicId)> + '_ {
        self.children
            .iter()
            .flat_map(|(&p, cs)| cs.iter().map(move |&c| (p, c)))
    }

    /// Shallowest-path depths from `area` by breadth-first search.
    ///
    /// The area itself gets depth 0; every topic reachable within
    /// `max_depth` (all reachable topics if `None`) appears exactly once with
    /// the length of its shortest parent-chain.  Cycles are harmless: the
    /// visited set stops revisits.
    pub fn bfs_depths(&self, area: TopicId, max_depth: Option<u32>) -> DepthMap {
        let mut depths = BTreeMap::new();
        depths.insert(area, 0u32);
        let mut queue = VecDeque::new();
        queue.push_back(area);
        while let Some(node) = queue.pop_front() {
            let depth = depths[&node];
            if let Some(limit) = max_depth {
                if depth >= limit {
                    continue;
                }
            }
            for child in self.children(node) {
                if !depths.contains_key(&child) {
                    depths.insert(child, depth + 1);
                    queue.push_back(child);
                }
            }
        }
        DepthMap { area, depths }
    }
}

/// Shallowest depth of each topic reachable from one area.
#[derive(Debug, Clone)]
pub struct DepthMap {
    area: TopicId,
    depths: BTreeMap<TopicId, u32>,
}

impl DepthMap {
    pub fn area(&self) -> TopicId {
        self.area
    }

    /// Depth of `t`, or `None` if unreachable from the area.
    pub fn depth(&self, t: TopicId) -> Option<u32> {
        self.depths.get(&t).copied()
    }

    pub fn len(&self) -> usize {
        self.depths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TopicId, u32)> + '_ {
        self.depths.iter().map(|(&t, &d)| (t, d))
    }

    /// Topics with depth <= `d1`, the area itself excluded: the pool the
    /// extractor ranks.  Ascending id order.
    pub fn candidates_within(&self, d1: u32) -> Vec<TopicId> {
        self.depths
            .iter()
            .filter(|&(&t, &d)| d <= d1 && t != self.area)
            .map(|(&t, _)| t)
            .collect()
    }

    /// Topics with depth <= `d2`, the area included: the reference topics
    /// candidates are scored against.  Ascending id order.
    pub fn contributive_within(&self, d2: u32) -> Vec<TopicId> {
        self.depths
            .iter()
            .filter(|&(_, &d)| d <= d2)
            .map(|(&t, _)| t)
            .collect()
    }
}

/// Generality weight of a topic at depth `n`: `exp(offset - n)`.
///
/// Strictly decreasing in depth, so shallow (general) topics dominate.  The
/// default offset is 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFunction {
    pub offset: f64,
}

impl Default for WeightFunction {
    fn default() -> Self {
        Self { offset: 4.0 }
    }
}

impl WeightFunction {
    pub fn weight(&self, depth: u32) -> f64 {
        libm::exp(self.offset - depth as f64)
    }
}

/// `exp(4 - n)`, the default generality weight.
pub fn general_weight(depth: u32) -> f64 {
    WeightFunction::default().weight(depth)
}

/// Per-topic generality weights for one area; topics outside the searched
/// subgraph weigh 0.
#[derive(Debug, Clone)]
pub struct WeightMap {
    area: TopicId,
    weights: BTreeMap<TopicId, f64>,
}

impl WeightMap {
    pub fn from_depths(depths: &DepthMap, f: &WeightFunction) -> Self {
        Self {
            area: depths.area(),
            weights: depths.iter().map(|(t, d)| (t, f.weight(d))).collect(),
        }
    }

    /// Arbitrary explicit weights, mostly for synthetic instances.
    pub fn from_entries<I>(area: TopicId, entries: I) -> Self
    where
        I: IntoIterator<Item = (TopicId, f64)>,
    {
        Self { area, weights: entries.into_iter().collect() }
    }

    pub fn area(&self) -> TopicId {
        self.area
    }

    /// Weight of `t`; 0 outside the searched subgraph.
    pub fn get(&self, t: TopicId) -> f64 {
        self.weights.get(&t).copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(raw: u32) -> TopicId {
        TopicId(raw)
    }

    #[test]
    fn bfs_takes_the_shallowest_path() {
        let mut g = CategoryGraph::new();
        g.add_edge(t(0), t(1));
        g.add_edge(t(1), t(2));
        g.add_edge(t(0), t(2)); // short-cut: depth of 2 must be 1, not 2
        g.add_edge(t(2), t(0)); // cycle back to the area
        let depths = g.bfs_depths(t(0), None);
        assert_eq!(depths.depth(t(0)), Some(0));
        assert_eq!(depths.depth(t(1)), Some(1));
        assert_eq!(depths.depth(t(2)), Some(1));
        assert_eq!(depths.len(), 3);
    }

    #[test]
    fn bfs_honors_max_depth() {
        let mut g = CategoryGraph::new();
        g.add_edge(t(0), t(1));
        g.add_edge(t(1), t(2));
        g.add_edge(t(2), t(3));
        let depths = g.bfs_depths(t(0), Some(2));
        assert_eq!(depths.depth(t(2)), Some(2));
        assert_eq!(depths.depth(t(3)), None);
    }

    #[test]
    fn bfs_of_an_isolated_area_is_just_the_area() {
        let g = CategoryGraph::new();
        let depths = g.bfs_depths(t(7), None);
        assert_eq!(depths.len(), 1);
        assert_eq!(depths.depth(t(7)), Some(0));
        assert!(depths.candidates_within(3).is_empty());
        assert_eq!(depths.contributive_within(1), [t(7)]);
    }

    #[test]
    fn self_loops_and_duplicates_are_reported() {
        let mut g = CategoryGraph::new();
        assert_eq!(g.add_edge(t(1), t(1)), EdgeOutcome::SelfLoopDropped);
        assert_eq!(g.add_edge(t(1), t(2)), EdgeOutcome::Added);
        assert_eq!(g.add_edge(t(1), t(2)), EdgeOutcome::Duplicate);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn candidate_set_excludes_area_contributive_includes_it() {
        let mut g = CategoryGraph::new();
        g.add_edge(t(0), t(1));
        g.add_edge(t(0), t(2));
        g.add_edge(t(2), t(3));
        let depths = g.bfs_depths(t(0), Some(3));
        assert_eq!(depths.candidates_within(3), [t(1), t(2), t(3)]);
        assert_eq!(depths.candidates_within(1), [t(1), t(2)]);
        assert_eq!(depths.contributive_within(1), [t(0), t(1), t(2)]);
        assert_eq!(depths.contributive_within(0), [t(0)]);
    }

    #[test]
    fn candidate_sets_grow_with_depth() {
        let mut g = CategoryGraph::new();
        for i in 0..5 {
            g.add_edge(t(i), t(i + 1));
        }
        let depths = g.bfs_depths(t(0), None);
        let mut previous = 0;
        for d in 0..6 {
            let now = depths.candidates_within(d).len();
            assert!(now >= previous, "candidate set shrank at depth {d}");
            previous = now;
        }
    }

    #[test]
    fn general_weight_matches_the_closed_form() {
        assert!((general_weight(0) - 54.598150033144236).abs() < 1e-9); // e^4
        assert_eq!(general_weight(4), 1.0);
        for n in 0..10 {
            assert!(
                general_weight(n + 1) < general_weight(n),
                "weight must strictly decrease with depth"
            );
        }
    }

    #[test]
    fn weight_map_is_zero_outside_the_subgraph() {
        let mut g = CategoryGraph::new();
        g.add_edge(t(0), t(1));
        let depths = g.bfs_depths(t(0), Some(3));
        let weights = WeightMap::from_depths(&depths, &WeightFunction::default());
        assert!((weights.get(t(0)) - libm::exp(4.0)).abs() < 1e-9);
        assert!((weights.get(t(1)) - libm::exp(3.0)).abs() < 1e-9);
        assert_eq!(weights.get(t(99)), 0.0);
    }
}
