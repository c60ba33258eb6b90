use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Undirected weighted graph over labelled nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    nodes: Vec<String>,
    edges: BTreeMap<(usize, usize), f64>,
}

impl Graph {
    pub fn new(nodes: Vec<String>) -> Self {
        Self {
            nodes,
            edges: BTreeMap::new(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adds `weight` to edge {a, b}.
    pub fn add_edge(&mut self, a: usize, b: usize, weight: f64) -> Result<()> {
        if a == b {
            return Err(Error::Validation("self-loops are not allowed".into()));
        }
        if a >= self.nodes.len() || b >= self.nodes.len() {
            return Err(Error::Validation(format!("edge ({a}, {b}) out of range")));
        }
        if !weight.is_finite() {
            return Err(Error::Validation("edge weight must be finite".into()));
        }
        *self.edges.entry((a.min(b), a.max(b))).or_insert(0.0) += weight;
        Ok(())
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.edges.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    /// Connected components as node-index lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (a, b, _) in self.edges() {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }

    /// Edge list CSV `src,dst,weight`.
    pub fn write_edges<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["src", "dst", "weight"])?;
        for (a, b, wt) in self.edges() {
            out.write_record([self.nodes[a].as_str(), self.nodes[b].as_str(), &format!("{wt:.6}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Community id per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub membership: Vec<usize>,
}

impl Partition {
    pub fn singletons(n: usize) -> Self {
        Self {
            membership: (0..n).collect(),
        }
    }

    pub fn n_communities(&self) -> usize {
        self.membership.iter().collect::<BTreeSet<_>>().len()
    }

    /// Renumbers communities by first appearance.
    fn canonical(mut self) -> Self {
        let mut map = BTreeMap::new();
        for c in &mut self.membership {
            let next = map.len();
            *c = *map.entry(*c).or_insert(next);
        }
        self
    }

    /// CSV `node,community`.
    pub fn write_csv<W: Write>(&self, graph: &Graph, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["node", "community"])?;
        for (node, c) in graph.nodes.iter().zip(&self.membership) {
            out.write_record([node.clone(), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// |A ∩ B| / |A ∪ B|; two empty sets give 0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Community graph with Jaccard-weighted edges where the overlap of user
/// sets reaches `threshold` and is non-zero.
pub fn overlap_graph(user_sets: &BTreeMap<String, BTreeSet<String>>, threshold: f64) -> Result<Graph> {
    if user_sets.len() < 2 {
        return Err(Error::InsufficientData("overlap graph needs at least two communities".into()));
    }
    let sets: Vec<&BTreeSet<String>> = user_sets.values().collect();
    let mut g = Graph::new(user_sets.keys().cloned().collect());
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let w = jaccard(sets[i], sets[j]);
            if w > 0.0 && w >= threshold {
                g.add_edge(i, j, w)?;
            }
        }
    }
    Ok(g)
}

/// Q = Σ_c (e_cc − a_c²) with weighted degrees.
pub fn modularity(graph: &Graph, partition: &Partition) -> f64 {
    let m2: f64 = 2.0 * graph.edges().map(|e| e.2).sum::<f64>();
    if m2 == 0.0 {
        return 0.0;
    }
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut total: BTreeMap<usize, f64> = BTreeMap::new();
    for (a, b, w) in graph.edges() {
        let (ca, cb) = (partition.membership[a], partition.membership[b]);
        if ca == cb {
            *internal.entry(ca).or_default() += 2.0 * w;
        }
        *total.entry(ca).or_default() += w;
        *total.entry(cb).or_default() += w;
    }
    total
        .iter()
        .map(|(c, t)| internal.get(c).copied().unwrap_or(0.0) / m2 - (t / m2).powi(2))
        .sum()
}

/// Weighted graph used between aggregation levels. Self-loop weight is the
/// total internal edge weight of the collapsed community.
struct Level {
    adj: Vec<BTreeMap<usize, f64>>,
    loops: Vec<f64>,
}

impl Level {
    fn degree(&self, i: usize) -> f64 {
        self.adj[i].values().sum::<f64>() + 2.0 * self.loops[i]
    }

    /// Local moving phase. Returns the community per node and whether any
    /// node moved.
    fn local_moves(&self, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.adj.len();
        let k: Vec<f64> = (0..n).map(|i| self.degree(i)).collect();
        let m2: f64 = k.iter().sum();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = k.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let own = comm[i];
                let mut links: BTreeMap<usize, f64> = BTreeMap::new();
                for (&j, &w) in &self.adj[i] {
                    *links.entry(comm[j]).or_default() += w;
                }
                tot[own] -= k[i];
                let gain = |c: usize, links: &BTreeMap<usize, f64>| links.get(&c).copied().unwrap_or(0.0) - tot[c] * k[i] / m2;
                let mut best = own;
                let mut best_gain = gain(own, &links);
                for &c in links.keys() {
                    let g = gain(c, &links);
                    if g > best_gain + 1e-12 {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k[i];
                if best != own {
                    comm[i] = best;
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        (comm, moved_any)
    }

    fn aggregate(&self, comm: &[usize]) -> (Level, Vec<usize>) {
        let mut ids = BTreeMap::new();
        let relabel: Vec<usize> = comm
            .iter()
            .map(|c| {
                let next = ids.len();
                *ids.entry(*c).or_insert(next)
            })
            .collect();
        let n = ids.len();
        let mut adj = vec![BTreeMap::new(); n];
        let mut loops = vec![0.0; n];
        for (i, nbrs) in self.adj.iter().enumerate() {
            loops[relabel[i]] += self.loops[i];
            for (&j, &w) in nbrs {
                let (a, b) = (relabel[i], relabel[j]);
                if a == b {
                    // each internal edge is seen from both endpoints
                    loops[a] += w / 2.0;
                } else {
                    *adj[a].entry(b).or_insert(0.0) += w;
                }
            }
        }
        (Level { adj, loops }, relabel)
    }
}

/// Louvain community detection at resolution 1. Node visiting order is
/// shuffled from `seed`.
pub fn louvain(graph: &Graph, seed: u64) -> Partition {
    let n = graph.node_count();
    if graph.edge_count() == 0 {
        return Partition::singletons(n);
    }
    let mut adj = vec![BTreeMap::new(); n];
    for (a, b, w) in graph.edges() {
        adj[a].insert(b, w);
        adj[b].insert(a, w);
    }
    let mut level = Level { adj, loops: vec![0.0; n] };
    let mut membership: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let (comm, moved) = level.local_moves(&mut rng);
        if !moved {
            break;
        }
        let (next, relabel) = level.aggregate(&comm);
        for m in &mut membership {
            *m = relabel[*m];
        }
        level = next;
    }
    Partition { membership }.canonical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        let mut g = Graph::new((0..n).map(|i| format!("n{i}")).collect());
        for &(a, b) in edges {
            g.add_edge(a, b, 1.0).unwrap();
        }
        g
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard(&set(&["a"]), &set(&["b"])), 0.0);
        assert_eq!(jaccard(&set(&["a", "b", "c"]), &set(&["b", "c", "d"])), 0.5);
        assert_eq!(jaccard::<String>(&set(&[]), &set(&[])), 0.0);
    }

    #[test]
    fn overlap_graph_examples() {
        let mut sets = BTreeMap::new();
        sets.insert("nz".to_string(), set(&["a", "b"]));
        sets.insert("auckland".to_string(), set(&["a", "b"]));
        let g = overlap_graph(&sets, 0.05).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), Some(1.0));
        assert_eq!(overlap_graph(&sets, 1.01).unwrap().edge_count(), 0);
        sets.remove("nz");
        assert!(overlap_graph(&sets, 0.0).is_err());
    }

    #[test]
    fn two_triangles() {
        let g = graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let p = louvain(&g, 1);
        assert_eq!(p.membership, vec![0, 0, 0, 1, 1, 1]);
        assert!((modularity(&g, &p) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn complete_graph_one_community() {
        let edges: Vec<(usize, usize)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        let p = louvain(&graph(5, &edges), 3);
        assert_eq!(p.n_communities(), 1);
    }

    #[test]
    fn edgeless_graph() {
        let g = graph(3, &[]);
        let p = louvain(&g, 0);
        assert_eq!(p, Partition::singletons(3));
        assert_eq!(modularity(&g, &p), 0.0);
    }

    #[test]
    fn ring_of_cliques_split() {
        // four 4-cliques joined in a ring by single edges
        let mut edges = Vec::new();
        for c in 0..4 {
            let base = c * 4;
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push((base + a, base + b));
                }
            }
            edges.push((base + 3, (base + 4) % 16));
        }
        let g = graph(16, &edges);
        let p = louvain(&g, 7);
        assert_eq!(p.n_communities(), 4);
        for c in 0..4 {
            assert!(p.membership[c * 4..c * 4 + 4].iter().all(|m| *m == p.membership[c * 4]));
        }
    }

    #[test]
    fn edge_csv() {
        let g = graph(2, &[(0, 1)]);
        let mut buf = Vec::new();
        g.write_edges(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "src,dst,weight\nn0,n1,1.000000\n");
        assert!(graph(2, &[]).add_edge(1, 1, 1.0).is_err());
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (3usize..14).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n, 0.1f64..5.0), 1..40).prop_map(move |es| {
                let mut g = Graph::new((0..n).map(|i| i.to_string()).collect());
                for (a, b, w) in es {
                    if a != b {
                        g.add_edge(a, b, w).unwrap();
                    }
                }
                g
            })
        })
    }

    proptest! {
        #[test]
        fn louvain_beats_singletons(g in arb_graph(), seed in 0u64..20) {
            let singles = modularity(&g, &Partition::singletons(g.node_count()));
            prop_assert!(singles <= 1e-12);
            let q = modularity(&g, &louvain(&g, seed));
            prop_assert!(q >= singles - 1e-12);
        }

        #[test]
        fn jaccard_symmetric_bounded(a in proptest::collection::btree_set(0u8..20, 0..10), b in proptest::collection::btree_set(0u8..20, 0..10)) {
            let j = jaccard(&a, &b);
            prop_assert_eq!(j, jaccard(&b, &a));
            prop_assert!((0.0..=1.0).contains(&j));
            prop_assert_eq!(j == 1.0, !a.is_empty() && a == b);
        }
    }
}
