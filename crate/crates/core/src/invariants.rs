//! Structural invariants of linear graphs: cutting edges, the forest of
//! two-edge connected components and its leaf count, cactus predicates, and
//! the graph of colored components used in the exponent bookkeeping for split
//! graphs.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::LinearGraph;
use crate::partition::SetPartition;
use crate::word::Letter;

/// Largest order accepted by [`simple_cycles`].
pub const MAX_CYCLE_ENUMERATION_EDGES: usize = 16;

fn undirected_adjacency(g: &LinearGraph) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); g.vertex_count()];
    for (k, &(s, t)) in g.edges().iter().enumerate() {
        if s != t {
            adj[s].push((t, k));
            adj[t].push((s, k));
        }
    }
    adj
}

/// Bridges of the underlying undirected multigraph, by edge index (ascending).
///
/// One low-link depth-first search; only the tree edge itself is skipped when
/// looking back, so parallel edges and loops are never bridges.
pub fn cutting_edges(g: &LinearGraph) -> Vec<usize> {
    let n = g.vertex_count();
    let adj = undirected_adjacency(g);
    let mut tin = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut bridges = Vec::new();
    for root in 0..n {
        if tin[root] != usize::MAX {
            continue;
        }
        tin[root] = timer;
        low[root] = timer;
        timer += 1;
        // (vertex, edge used to enter it, next adjacency slot)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        while let Some(&mut (v, parent_edge, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let (w, k) = adj[v][*next];
                *next += 1;
                if k == parent_edge {
                    continue;
                }
                if tin[w] == usize::MAX {
                    tin[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, k, 0));
                } else {
                    low[v] = low[v].min(tin[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > tin[p] {
                        bridges.push(parent_edge);
                    }
                }
            }
        }
    }
    bridges.sort_unstable();
    bridges
}

/// Edge-disjoint biconnected blocks (each as a sorted list of edge indices).
/// Every loop forms its own block.
pub fn biconnected_blocks(g: &LinearGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let adj = undirected_adjacency(g);
    let mut tin = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut blocks = Vec::new();
    let mut edge_stack: Vec<usize> = Vec::new();
    for root in 0..n {
        if tin[root] != usize::MAX {
            continue;
        }
        tin[root] = timer;
        low[root] = timer;
        timer += 1;
        let mut stack = vec![(root, usize::MAX, 0usize)];
        while let Some(&mut (v, parent_edge, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let (w, k) = adj[v][*next];
                *next += 1;
                if k == parent_edge {
                    continue;
                }
                if tin[w] == usize::MAX {
                    edge_stack.push(k);
                    tin[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, k, 0));
                } else if tin[w] < tin[v] {
                    edge_stack.push(k);
                    low[v] = low[v].min(tin[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= tin[p] {
                        let mut block = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            block.push(e);
                            if e == parent_edge {
                                break;
                            }
                        }
                        block.sort_unstable();
                        blocks.push(block);
                    }
                }
            }
        }
    }
    for (k, &(s, t)) in g.edges().iter().enumerate() {
        if s == t {
            blocks.push(vec![k]);
        }
    }
    blocks.sort();
    blocks
}

/// The forest whose nodes are two-edge connected components and whose edges are bridges.
#[derive(Clone, Debug, Serialize)]
pub struct ForestOfTec {
    /// Vertex sets of the two-edge connected components.
    pub components: Vec<Vec<usize>>,
    /// Component index of every vertex.
    pub component_of: Vec<usize>,
    /// `(component, component, bridge edge index)`.
    pub forest_edges: Vec<(usize, usize, usize)>,
}

impl ForestOfTec {
    pub fn degree(&self, c: usize) -> usize {
        self.forest_edges
            .iter()
            .map(|&(a, b, _)| (a == c) as usize + (b == c) as usize)
            .sum()
    }

    pub fn is_isolated(&self, c: usize) -> bool {
        self.degree(c) == 0
    }

    pub fn is_leaf(&self, c: usize) -> bool {
        self.degree(c) == 1
    }

    /// Leaves of the forest, an isolated node counting as two.
    pub fn leaf_count(&self) -> usize {
        (0..self.components.len())
            .map(|c| match self.degree(c) {
                0 => 2,
                1 => 1,
                _ => 0,
            })
            .sum()
    }
}

pub fn forest_of_tec(g: &LinearGraph) -> ForestOfTec {
    let bridges = cutting_edges(g);
    let mut is_bridge = vec![false; g.order()];
    for &b in &bridges {
        is_bridge[b] = true;
    }
    let kept: Vec<usize> = (0..g.order()).filter(|&k| !is_bridge[k]).collect();
    let component_of = g.edge_subgraph(&kept).component_labels();
    let count = component_of.iter().max().map_or(0, |m| m + 1);
    let mut components = vec![Vec::new(); count];
    for (v, &c) in component_of.iter().enumerate() {
        components[c].push(v);
    }
    let forest_edges = bridges
        .iter()
        .map(|&k| {
            let (s, t) = g.edge(k);
            (component_of[s], component_of[t], k)
        })
        .collect();
    ForestOfTec { components, component_of, forest_edges }
}

/// Number of leaves of the forest of two-edge connected components.
pub fn leaf_count(g: &LinearGraph) -> usize {
    forest_of_tec(g).leaf_count()
}

/// Simple cycles as sorted edge sets, by exhaustive subset search.
///
/// A set of edges is a simple cycle iff it is connected and every vertex it
/// touches has degree two in it (a loop contributes two).
pub fn simple_cycles(g: &LinearGraph) -> Result<Vec<Vec<usize>>> {
    let m = g.order();
    if m > MAX_CYCLE_ENUMERATION_EDGES {
        return Err(Error::limit(format!(
            "simple-cycle enumeration is capped at {} edges, graph has {}",
            MAX_CYCLE_ENUMERATION_EDGES, m
        )));
    }
    let mut cycles = Vec::new();
    let mut deg = vec![0usize; g.vertex_count()];
    for mask in 1u32..(1u32 << m) {
        let edges: Vec<usize> = (0..m).filter(|&k| mask >> k & 1 == 1).collect();
        deg.iter_mut().for_each(|d| *d = 0);
        for &k in &edges {
            let (s, t) = g.edge(k);
            deg[s] += 1;
            deg[t] += 1;
        }
        if deg.iter().any(|&d| d != 0 && d != 2) {
            continue;
        }
        let sub = g.edge_subgraph(&edges);
        let labels = sub.component_labels();
        let touched: Vec<usize> = (0..g.vertex_count()).filter(|&v| deg[v] > 0).collect();
        if touched.iter().all(|&v| labels[v] == labels[touched[0]]) {
            cycles.push(edges);
        }
    }
    Ok(cycles)
}

/// Every edge lies on exactly one simple cycle, decided from the block decomposition:
/// no bridges and every biconnected block has as many edges as vertices.
pub fn is_forest_of_cacti(g: &LinearGraph) -> bool {
    biconnected_blocks(g).iter().all(|block| {
        let mut verts: Vec<usize> = block.iter().flat_map(|&k| {
            let (s, t) = g.edge(k);
            [s, t]
        }).collect();
        verts.sort_unstable();
        verts.dedup();
        let single_plain_edge = block.len() == 1 && verts.len() == 2;
        !single_plain_edge && block.len() == verts.len()
    })
}

/// Second characterization by cycle enumeration: no bridges, and any two
/// distinct simple cycles share at most one vertex.
pub fn is_forest_of_cacti_by_enumeration(g: &LinearGraph) -> Result<bool> {
    if !cutting_edges(g).is_empty() {
        return Ok(false);
    }
    let cycles = simple_cycles(g)?;
    let vertex_sets: Vec<Vec<usize>> = cycles
        .iter()
        .map(|c| {
            let mut vs: Vec<usize> = c.iter().flat_map(|&k| {
                let (s, t) = g.edge(k);
                [s, t]
            }).collect();
            vs.sort_unstable();
            vs.dedup();
            vs
        })
        .collect();
    for i in 0..vertex_sets.len() {
        for j in i + 1..vertex_sets.len() {
            let shared = vertex_sets[i].iter().filter(|v| vertex_sets[j].contains(v)).count();
            if shared > 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// For a forest of cacti, its simple cycles as edge sequences following the
/// orientation when the cycle is directed (otherwise in walk order).
pub fn cactus_cycles(g: &LinearGraph) -> Option<Vec<Vec<usize>>> {
    if !is_forest_of_cacti(g) {
        return None;
    }
    let mut cycles = Vec::new();
    for block in biconnected_blocks(g) {
        let mut order = vec![block[0]];
        let mut used = vec![false; block.len()];
        used[0] = true;
        // walk: from the tail of the current edge, take an unused block edge touching it
        let (mut at, _) = g.edge(block[0]);
        while order.len() < block.len() {
            let pos = (0..block.len())
                .filter(|&i| !used[i])
                .find(|&i| {
                    let (s, t) = g.edge(block[i]);
                    s == at || t == at
                })?;
            used[pos] = true;
            let (s, t) = g.edge(block[pos]);
            at = if s == at { t } else { s };
            order.push(block[pos]);
        }
        cycles.push(order);
    }
    Some(cycles)
}

/// A forest of cacti whose simple cycles are all directed cycles.
pub fn is_well_oriented(g: &LinearGraph) -> bool {
    let Some(cycles) = cactus_cycles(g) else {
        return false;
    };
    cycles.iter().all(|c| {
        c.windows(2).all(|w| g.edge(w[0]).0 == g.edge(w[1]).1)
            && g.edge(*c.last().unwrap()).0 == g.edge(c[0]).1
    })
}

/// Outcome of the validity test on a labelled graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    Valid,
    NotCactus,
    NotWellOriented,
    NotWellColored,
    OddCycle,
    NotAlternated,
}

impl Validity {
    pub fn is_valid(self) -> bool {
        self == Validity::Valid
    }
}

/// Checks a labelling (letter and star flag per edge) against the well-oriented
/// cactus structure: each simple cycle single-lettered, of even length, with
/// alternating stars.
pub fn validity(g: &LinearGraph, labels: &[Letter]) -> Result<Validity> {
    if labels.len() != g.order() {
        return Err(Error::invalid(format!(
            "{} labels for a graph of order {}",
            labels.len(),
            g.order()
        )));
    }
    let Some(cycles) = cactus_cycles(g) else {
        return Ok(Validity::NotCactus);
    };
    if !is_well_oriented(g) {
        return Ok(Validity::NotWellOriented);
    }
    for c in &cycles {
        let letter = labels[c[0]].index;
        if c.iter().any(|&k| labels[k].index != letter) {
            return Ok(Validity::NotWellColored);
        }
    }
    for c in &cycles {
        if c.len() % 2 == 1 {
            return Ok(Validity::OddCycle);
        }
        let alternates = (0..c.len()).all(|i| labels[c[i]].star != labels[c[(i + 1) % c.len()]].star);
        if !alternates {
            return Ok(Validity::NotAlternated);
        }
    }
    Ok(Validity::Valid)
}

pub fn is_valid(g: &LinearGraph, labels: &[Letter]) -> Result<bool> {
    Ok(validity(g, labels)?.is_valid())
}

/// A connected component of one of the two colored subgraphs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColoredNode {
    /// 1 or 2.
    pub color: u8,
    pub vertices: Vec<usize>,
    pub leaves: usize,
    pub has_cutting_edge: bool,
}

/// One edge per vertex of the split graph, joining its color-1 and color-2 components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ColoredLink {
    pub color1_node: usize,
    pub color2_node: usize,
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColoredComponentGraph {
    pub nodes: Vec<ColoredNode>,
    pub links: Vec<ColoredLink>,
}

/// The two colored subgraphs of `g` on its full vertex set.
pub fn colored_subgraphs(g: &LinearGraph, color: &[u8]) -> Result<(LinearGraph, LinearGraph)> {
    if color.len() != g.order() {
        return Err(Error::invalid(format!(
            "{} colors for a graph of order {}",
            color.len(),
            g.order()
        )));
    }
    if let Some(&c) = color.iter().find(|&&c| c != 1 && c != 2) {
        return Err(Error::invalid(format!("edge colors must be 1 or 2, got {}", c)));
    }
    let ones: Vec<usize> = (0..g.order()).filter(|&k| color[k] == 1).collect();
    let twos: Vec<usize> = (0..g.order()).filter(|&k| color[k] == 2).collect();
    Ok((g.edge_subgraph(&ones), g.edge_subgraph(&twos)))
}

fn component_nodes(sub: &LinearGraph, color: u8) -> (Vec<ColoredNode>, Vec<usize>) {
    let labels = sub.component_labels();
    let mut nodes = Vec::new();
    for (verts, edges) in sub.components() {
        let mut relabel = vec![usize::MAX; sub.vertex_count()];
        for (i, &v) in verts.iter().enumerate() {
            relabel[v] = i;
        }
        let local = LinearGraph::new(
            verts.len(),
            edges.iter().map(|&k| {
                let (s, t) = sub.edge(k);
                (relabel[s], relabel[t])
            }).collect(),
        )
        .expect("component edges stay inside the component");
        nodes.push(ColoredNode {
            color,
            leaves: leaf_count(&local),
            has_cutting_edge: !cutting_edges(&local).is_empty(),
            vertices: verts,
        });
    }
    (nodes, labels)
}

impl ColoredComponentGraph {
    pub fn new(g: &LinearGraph, color: &[u8]) -> Result<Self> {
        let (t1, t2) = colored_subgraphs(g, color)?;
        let (mut nodes, labels1) = component_nodes(&t1, 1);
        let offset = nodes.len();
        let (nodes2, labels2) = component_nodes(&t2, 2);
        nodes.extend(nodes2);
        let links = (0..g.vertex_count())
            .map(|v| ColoredLink { color1_node: labels1[v], color2_node: offset + labels2[v], vertex: v })
            .collect();
        Ok(ColoredComponentGraph { nodes, links })
    }

    pub fn degree(&self, node: usize) -> usize {
        self.links
            .iter()
            .map(|l| (l.color1_node == node) as usize + (l.color2_node == node) as usize)
            .sum()
    }

    /// `Σ_C (𝔏(C) − deg(C))`, the quantity preserved by pruning.
    pub fn leaf_surplus(&self) -> i64 {
        (0..self.nodes.len())
            .map(|c| self.nodes[c].leaves as i64 - self.degree(c) as i64)
            .sum()
    }

    /// Removes the lowest-indexed leaf that has no cutting edge, if any.
    pub fn prune_step(&self) -> Option<Self> {
        let flags: Vec<bool> = self.nodes.iter().map(|n| !n.has_cutting_edge).collect();
        self.prune_step_with(&flags)
    }

    fn prune_step_with(&self, removable: &[bool]) -> Option<Self> {
        let victim = (0..self.nodes.len()).find(|&c| removable[c] && self.degree(c) == 1)?;
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::with_capacity(self.nodes.len() - 1);
        for (c, node) in self.nodes.iter().enumerate() {
            if c != victim {
                remap[c] = nodes.len();
                nodes.push(node.clone());
            }
        }
        let links = self
            .links
            .iter()
            .filter(|l| l.color1_node != victim && l.color2_node != victim)
            .map(|l| ColoredLink {
                color1_node: remap[l.color1_node],
                color2_node: remap[l.color2_node],
                vertex: l.vertex,
            })
            .collect();
        Some(ColoredComponentGraph { nodes, links })
    }

    /// Repeatedly deletes leaves flagged as having no cutting edge until none remain.
    pub fn prune(&self) -> Self {
        let flags: Vec<bool> = self.nodes.iter().map(|n| !n.has_cutting_edge).collect();
        self.prune_with(&flags)
    }

    /// Pruning driven by explicit per-node flags (`true` = no cutting edge, removable).
    pub fn prune_with(&self, no_cutting_edge: &[bool]) -> Self {
        assert_eq!(no_cutting_edge.len(), self.nodes.len());
        let mut current = self.clone();
        let mut flags = no_cutting_edge.to_vec();
        loop {
            let Some(victim) = (0..current.nodes.len()).find(|&c| flags[c] && current.degree(c) == 1) else {
                return current;
            };
            current = current.prune_step_with(&flags).expect("a victim exists");
            flags.remove(victim);
        }
    }
}

/// `½(𝔏(T₁) + 𝔏(T₂) − 𝔏(T′) − 2|V′|)` for the split of `g` by `color`.
pub fn eta(g: &LinearGraph, color: &[u8]) -> Result<Rational64> {
    let (t1, t2) = colored_subgraphs(g, color)?;
    let twice = leaf_count(&t1) as i64 + leaf_count(&t2) as i64
        - leaf_count(g) as i64
        - 2 * g.vertex_count() as i64;
    Ok(Rational64::new(twice, 2))
}

/// The same exponent computed from the pruned graph of colored components.
pub fn eta_from_pruning(g: &LinearGraph, color: &[u8]) -> Result<Rational64> {
    let pruned = ColoredComponentGraph::new(g, color)?.prune();
    Ok(Rational64::new(pruned.leaf_surplus() - leaf_count(g) as i64, 2))
}

/// Checks `𝔏(T₀^π) ≤ 𝔏(T₀^{π'})` for `π' ≤ π` in the partitions of `2K`.
pub fn leaf_monotonicity_check(coarse: &SetPartition, fine: &SetPartition, order: usize) -> Result<bool> {
    if coarse.ground_size() != 2 * order {
        return Err(Error::invalid(format!(
            "partitions must live on 2K = {} elements",
            2 * order
        )));
    }
    if !fine.leq(coarse)? {
        return Err(Error::invalid("leaf monotonicity needs fine <= coarse"));
    }
    let t0 = LinearGraph::minimal(order)?;
    Ok(leaf_count(&t0.quotient(coarse)?) <= leaf_count(&t0.quotient(fine)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::enumerate_partitions;

    fn g(n: usize, edges: &[(usize, usize)]) -> LinearGraph {
        LinearGraph::new(n, edges.to_vec()).unwrap()
    }

    fn bridges_brute_force(t: &LinearGraph) -> Vec<usize> {
        let base = t.component_count();
        (0..t.order())
            .filter(|&k| {
                let keep: Vec<usize> = (0..t.order()).filter(|&j| j != k).collect();
                t.edge_subgraph(&keep).component_count() > base
            })
            .collect()
    }

    #[test]
    fn bridge_examples() {
        assert_eq!(cutting_edges(&g(2, &[(1, 0)])), vec![0]);
        assert!(cutting_edges(&g(2, &[(1, 0), (0, 1)])).is_empty());
        assert_eq!(cutting_edges(&LinearGraph::path(2)), vec![0, 1]);
        assert!(cutting_edges(&LinearGraph::loops(2)).is_empty());
    }

    #[test]
    fn bridges_match_brute_force_on_quotients() {
        let t0 = LinearGraph::minimal(3).unwrap();
        for pi in enumerate_partitions(6).unwrap() {
            let q = t0.quotient(&pi).unwrap();
            assert_eq!(cutting_edges(&q), bridges_brute_force(&q), "{:?}", pi);
        }
    }

    #[test]
    fn forest_examples() {
        let two_cycle = g(2, &[(1, 0), (0, 1)]);
        let f = forest_of_tec(&two_cycle);
        assert_eq!(f.components.len(), 1);
        assert!(f.forest_edges.is_empty());

        let dumbbell = g(2, &[(0, 0), (1, 1), (1, 0)]);
        let f = forest_of_tec(&dumbbell);
        assert_eq!(f.components.len(), 2);
        assert_eq!(f.forest_edges, vec![(1, 0, 2)]);
        assert_eq!(f.leaf_count(), 2);
    }

    #[test]
    fn leaf_count_examples() {
        assert_eq!(leaf_count(&g(2, &[(1, 0)])), 2);
        assert_eq!(leaf_count(&LinearGraph::loops(1)), 2);
        assert_eq!(leaf_count(&LinearGraph::path(3)), 2);
        assert_eq!(leaf_count(&g(4, &[(0, 1), (0, 2), (0, 3)])), 3);
        // isolated vertices count two each
        assert_eq!(leaf_count(&g(3, &[])), 6);
    }

    #[test]
    fn figure_four_forest() {
        let blocks: Vec<Vec<usize>> = [
            vec![1, 3, 13],
            vec![2, 14, 15, 16],
            vec![4, 11, 17],
            vec![5, 10],
            vec![6],
            vec![7],
            vec![8, 9, 18],
            vec![12],
        ]
        .iter()
        .map(|b| b.iter().map(|x| x - 1).collect())
        .collect();
        let pi = SetPartition::from_blocks(18, &blocks).unwrap();
        let q = LinearGraph::minimal(9).unwrap().quotient(&pi).unwrap();
        let f = forest_of_tec(&q);
        // Forest structure is acyclic: nodes - edges = number of trees.
        let forest_graph = LinearGraph::new(
            f.components.len(),
            f.forest_edges.iter().map(|&(a, b, _)| (a, b)).collect(),
        )
        .unwrap();
        assert_eq!(f.components.len() - f.forest_edges.len(), forest_graph.component_count());
        assert_eq!(forest_graph.component_count(), q.component_count());
        assert!(f.leaf_count() >= 2 * q.component_count());
    }

    #[test]
    fn cactus_examples() {
        let two_cycle = g(2, &[(1, 0), (0, 1)]);
        assert!(is_forest_of_cacti(&two_cycle));
        assert!(is_well_oriented(&two_cycle));
        assert!(!is_forest_of_cacti(&g(2, &[(1, 0)])));
        let theta = g(2, &[(1, 0), (0, 1), (1, 0)]);
        assert!(!is_forest_of_cacti(&theta));
        assert!(!is_forest_of_cacti_by_enumeration(&theta).unwrap());
        let bowtie = g(3, &[(1, 0), (0, 1), (2, 0), (0, 2)]);
        assert!(is_forest_of_cacti(&bowtie));
        let unoriented = g(2, &[(1, 0), (1, 0)]);
        assert!(is_forest_of_cacti(&unoriented));
        assert!(!is_well_oriented(&unoriented));
    }

    #[test]
    fn cactus_characterizations_agree() {
        let t0 = LinearGraph::minimal(4).unwrap();
        for pi in enumerate_partitions(8).unwrap().iter().step_by(7) {
            let q = t0.quotient(pi).unwrap();
            let by_blocks = is_forest_of_cacti(&q);
            let by_enum = is_forest_of_cacti_by_enumeration(&q).unwrap();
            let cycles = simple_cycles(&q).unwrap();
            let by_definition = (0..q.order())
                .all(|k| cycles.iter().filter(|c| c.contains(&k)).count() == 1);
            assert_eq!(by_blocks, by_enum, "{:?}", pi);
            assert_eq!(by_blocks, by_definition, "{:?}", pi);
        }
    }

    #[test]
    fn validity_examples() {
        let two_cycle = g(2, &[(1, 0), (0, 1)]);
        let u1 = Letter::plain(0);
        let u1s = Letter::star(0);
        let u2s = Letter::star(1);
        assert!(is_valid(&two_cycle, &[u1, u1s]).unwrap());
        assert_eq!(validity(&two_cycle, &[u1, u2s]).unwrap(), Validity::NotWellColored);
        let four = LinearGraph::cycle(4).unwrap();
        assert!(is_valid(&four, &[u1, u1s, u1, u1s]).unwrap());
        assert_eq!(validity(&four, &[u1, u1, u1s, u1s]).unwrap(), Validity::NotAlternated);
        assert!(validity(&four, &[u1]).is_err());
        assert_eq!(validity(&LinearGraph::loops(1), &[u1]).unwrap(), Validity::OddCycle);
    }

    #[test]
    fn colored_component_graph_examples() {
        let two_cycle = g(2, &[(1, 0), (0, 1)]);
        let ccg = ColoredComponentGraph::new(&two_cycle, &[1, 1]).unwrap();
        assert_eq!(ccg.nodes.iter().filter(|n| n.color == 1).count(), 1);
        assert_eq!(ccg.nodes.iter().filter(|n| n.color == 2).count(), 2);
        assert_eq!(ccg.links.len(), 2);

        let two_loops = LinearGraph::loops(2);
        let ccg = ColoredComponentGraph::new(&two_loops, &[1, 2]).unwrap();
        assert_eq!(ccg.nodes.len(), 2);
        assert_eq!(ccg.links.len(), 1);
    }

    #[test]
    fn pruning_examples() {
        // Path in the component graph: a TEC leaf hanging off a component with a bridge.
        // Vertex 0 carries a color-1 loop; vertices 0,1,2 form a color-2 path (has bridges).
        let t = g(3, &[(0, 0), (1, 0), (2, 1)]);
        let ccg = ColoredComponentGraph::new(&t, &[1, 2, 2]).unwrap();
        let before = ccg.leaf_surplus();
        let pruned = ccg.prune();
        assert_eq!(pruned.leaf_surplus(), before);
        // The loop and the two isolated color-1 vertices hang off the color-2 path and go.
        assert_eq!(pruned.nodes.len(), 1);
        assert!(pruned.nodes[0].has_cutting_edge);
        assert!(pruned.links.is_empty());

        // A node with a cutting edge is never removed even when it is a leaf.
        let chain = g(2, &[(1, 0)]);
        let ccg = ColoredComponentGraph::new(&chain, &[2]).unwrap();
        assert_eq!(ccg.nodes.len(), 3);
        let p = ccg.prune();
        assert_eq!(p.nodes.len(), 1);
        assert_eq!(p.nodes[0].color, 2);
    }

    #[test]
    fn chain_of_tecs_prunes_to_single_node() {
        // Color-1 loops at vertices 0 and 1, a color-2 2-cycle on {0,1}: chain loop - cycle - loop.
        let t = g(2, &[(0, 0), (1, 1), (1, 0), (0, 1)]);
        let ccg = ColoredComponentGraph::new(&t, &[1, 1, 2, 2]).unwrap();
        assert_eq!(ccg.nodes.len(), 3);
        let pruned = ccg.prune();
        assert_eq!(pruned.nodes.len(), 1);
        assert!(pruned.links.is_empty());
        assert_eq!(pruned.leaf_surplus(), ccg.leaf_surplus());
    }

    #[test]
    fn eta_examples() {
        let two_cycle = g(2, &[(1, 0), (0, 1)]);
        assert_eq!(eta(&two_cycle, &[1, 1]).unwrap(), Rational64::from_integer(0));
        assert_eq!(eta(&two_cycle, &[1, 2]).unwrap(), Rational64::from_integer(-1));
        assert_eq!(eta(&g(3, &[]), &[]).unwrap(), Rational64::from_integer(0));
    }

    #[test]
    fn eta_routes_agree() {
        let t0 = LinearGraph::minimal(3).unwrap();
        for pi in enumerate_partitions(6).unwrap() {
            let q = t0.quotient(&pi).unwrap();
            for mask in 0..(1u8 << 3) {
                let color: Vec<u8> = (0..3).map(|k| 1 + (mask >> k & 1)).collect();
                assert_eq!(eta(&q, &color).unwrap(), eta_from_pruning(&q, &color).unwrap(), "{:?} {:?}", pi, color);
            }
        }
    }

    #[test]
    fn leaf_monotonicity_exhaustive_k2() {
        let parts = enumerate_partitions(4).unwrap();
        for a in &parts {
            for b in &parts {
                if b.refines(a) {
                    assert!(leaf_monotonicity_check(a, b, 2).unwrap());
                }
            }
        }
        assert!(leaf_monotonicity_check(&SetPartition::discrete(4), &SetPartition::full(4), 2).is_err());
    }
}
