use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::Transition;
use crate::ingest::DisjointSet;

/// Undirected station graph; the weight of `{a, b}` counts accepted
/// transitions in either direction. Keys are stored as `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionGraph {
    edges: BTreeMap<(u32, u32), u64>,
}

impl TransitionGraph {
    pub fn from_edges(edges: BTreeMap<(u32, u32), u64>) -> Self {
        TransitionGraph { edges }
    }

    pub fn edges(&self) -> &BTreeMap<(u32, u32), u64> {
        &self.edges
    }

    pub fn weight(&self, a: u32, b: u32) -> u64 {
        self.edges.get(&(a.min(b), a.max(b))).copied().unwrap_or(0)
    }

    pub fn vertices(&self) -> BTreeSet<u32> {
        self.edges.keys().flat_map(|&(a, b)| [a, b]).collect()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn merge(mut a: BTreeMap<(u32, u32), u64>, b: BTreeMap<(u32, u32), u64>) -> BTreeMap<(u32, u32), u64> {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (k, w) in b {
        *a.entry(k).or_insert(0) += w;
    }
    a
}

/// Counts transitions per unordered station pair. Same-station transitions
/// are skipped.
pub fn build_graph(accepted: &[Transition]) -> TransitionGraph {
    let edges = accepted
        .par_iter()
        .filter(|t| t.from_station != t.to_station)
        .fold(BTreeMap::new, |mut m, t| {
            let key = (t.from_station.min(t.to_station), t.from_station.max(t.to_station));
            *m.entry(key).or_insert(0u64) += 1;
            m
        })
        .reduce(BTreeMap::new, merge);
    TransitionGraph { edges }
}

/// A surviving edge of the pruned graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RoadSegment {
    pub from: u32,
    pub to: u32,
    pub weight: u64,
    /// Components are numbered by their smallest station id, ascending.
    pub component: usize,
}

/// Drops edges lighter than `min_weight`, then components with fewer than
/// `min_component` vertices. Components are formed by the kept edges only.
pub fn prune(graph: &TransitionGraph, min_weight: u64, min_component: usize) -> Vec<RoadSegment> {
    let kept: Vec<((u32, u32), u64)> = graph
        .edges
        .iter()
        .filter(|(_, &w)| w >= min_weight)
        .map(|(&k, &w)| (k, w))
        .collect();
    let vertices: Vec<u32> = kept
        .iter()
        .flat_map(|&((a, b), _)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let slot = |v: u32| vertices.binary_search(&v).expect("vertex of a kept edge");
    let mut dsu = DisjointSet::new(vertices.len());
    for &((a, b), _) in &kept {
        dsu.union(slot(a), slot(b));
    }
    let mut size = vec![0usize; vertices.len()];
    for i in 0..vertices.len() {
        size[dsu.find(i)] += 1;
    }
    // vertices are ascending, so first sighting of a root is at its smallest id
    let mut component_of_root = vec![usize::MAX; vertices.len()];
    let mut next = 0;
    for i in 0..vertices.len() {
        let r = dsu.find(i);
        if size[r] >= min_component && component_of_root[r] == usize::MAX {
            component_of_root[r] = next;
            next += 1;
        }
    }
    kept.into_iter()
        .filter_map(|((a, b), weight)| {
            let r = dsu.find(slot(a));
            (size[r] >= min_component).then(|| RoadSegment {
                from: a,
                to: b,
                weight,
                component: component_of_root[r],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tr(a: u32, b: u32) -> Transition {
        Transition {
            user_id: 1,
            from_station: a,
            to_station: b,
            t_start: 0,
            t_end: 60,
            distance_km: 1.0,
            dt_s: 60,
            velocity_kmh: 60.0,
        }
    }

    fn graph_of(edges: &[((u32, u32), u64)]) -> TransitionGraph {
        TransitionGraph::from_edges(edges.iter().copied().collect())
    }

    /// A path 1-2-...-n with every edge at weight `w`.
    fn path(start: u32, n: u32, w: u64) -> Vec<((u32, u32), u64)> {
        (start..start + n - 1).map(|v| ((v, v + 1), w)).collect()
    }

    #[test]
    fn directions_are_merged() {
        let mut ts = vec![tr(1, 2); 12];
        ts.extend(vec![tr(2, 1); 3]);
        let g = build_graph(&ts);
        assert_eq!(g.len(), 1);
        assert_eq!(g.weight(1, 2), 15);
        assert_eq!(g.weight(2, 1), 15);
    }

    #[test]
    fn empty_input_empty_graph() {
        assert!(build_graph(&[]).is_empty());
    }

    #[test]
    fn self_loops_skipped() {
        let g = build_graph(&[tr(3, 3), tr(3, 4)]);
        assert_eq!(g.len(), 1);
        assert_eq!(g.weight(3, 3), 0);
    }

    #[test]
    fn weight_threshold_is_inclusive() {
        let mut edges = path(1, 10, 20);
        edges.push(((100, 101), 9));
        edges.push(((1, 100), 9));
        edges.push(((10, 101), 10));
        let segs = prune(&graph_of(&edges), 10, 10);
        assert!(segs.iter().all(|s| s.weight >= 10));
        assert!(segs.iter().any(|s| (s.from, s.to) == (10, 101)));
        assert!(!segs.iter().any(|s| s.weight == 9));
    }

    #[test]
    fn heavy_nine_clique_removed() {
        let mut edges = Vec::new();
        for a in 1..=9u32 {
            for b in a + 1..=9 {
                edges.push(((a, b), 1000));
            }
        }
        assert!(prune(&graph_of(&edges), 10, 10).is_empty());
        edges.push(((9, 10), 1000));
        assert_eq!(prune(&graph_of(&edges), 10, 10).len(), 37);
    }

    #[test]
    fn light_edges_do_not_join_components() {
        // two 6-vertex paths joined by a light edge: each is too small alone
        let mut edges = path(1, 6, 50);
        edges.extend(path(11, 6, 50));
        edges.push(((6, 11), 5));
        assert!(prune(&graph_of(&edges), 10, 10).is_empty());
        assert_eq!(prune(&graph_of(&edges), 5, 10).len(), 11);
    }

    #[test]
    fn components_numbered_by_smallest_vertex() {
        let mut edges = path(50, 10, 10);
        edges.extend(path(5, 10, 10));
        let segs = prune(&graph_of(&edges), 10, 10);
        for s in &segs {
            let expected = if s.from < 50 { 0 } else { 1 };
            assert_eq!(s.component, expected);
        }
    }

    fn edges_strategy() -> impl Strategy<Value = Vec<((u32, u32), u64)>> {
        proptest::collection::btree_map((0u32..30, 0u32..30), 1u64..40, 0..120).prop_map(|m| {
            let mut out: BTreeMap<(u32, u32), u64> = BTreeMap::new();
            for ((a, b), w) in m {
                if a != b {
                    *out.entry((a.min(b), a.max(b))).or_insert(0) += w;
                }
            }
            out.into_iter().collect()
        })
    }

    proptest! {
        #[test]
        fn aggregation_matches_pair_count(
            pairs in proptest::collection::vec((0u32..15, 0u32..15), 0..300)
        ) {
            let ts: Vec<Transition> = pairs.iter().map(|&(a, b)| tr(a, b)).collect();
            let g = build_graph(&ts);
            let mut oracle: std::collections::HashMap<(u32, u32), u64> = Default::default();
            for &(a, b) in &pairs {
                if a != b {
                    *oracle.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
            prop_assert_eq!(g.len(), oracle.len());
            for (k, w) in oracle {
                prop_assert_eq!(g.weight(k.0, k.1), w);
            }
        }

        #[test]
        fn raising_thresholds_never_adds(
            edges in edges_strategy(),
            w in 1u64..30, dw in 0u64..10,
            c in 1usize..8, dc in 0usize..5
        ) {
            let g = graph_of(&edges);
            let key = |s: &RoadSegment| (s.from, s.to);
            let base: BTreeSet<_> = prune(&g, w, c).iter().map(key).collect();
            let heavier: BTreeSet<_> = prune(&g, w + dw, c).iter().map(key).collect();
            let bigger: BTreeSet<_> = prune(&g, w, c + dc).iter().map(key).collect();
            prop_assert!(heavier.is_subset(&base));
            prop_assert!(bigger.is_subset(&base));
        }

        #[test]
        fn survivors_meet_both_thresholds(edges in edges_strategy(), w in 1u64..30, c in 1usize..8) {
            let segs = prune(&graph_of(&edges), w, c);
            let mut members: BTreeMap<usize, BTreeSet<u32>> = BTreeMap::new();
            for s in &segs {
                prop_assert!(s.weight >= w);
                members.entry(s.component).or_default().extend([s.from, s.to]);
            }
            for m in members.values() {
                prop_assert!(m.len() >= c);
            }
        }
    }
}
