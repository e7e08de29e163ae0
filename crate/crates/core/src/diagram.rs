//! The reduced Rauzy diagram: directed graph over unlabeled combinatorial
//! types with an arrow per realizable split direction.
//!
//! Nodes are canonical forms (first-occurrence relabelings), so the diagram
//! forgets the labeling but not a top/bottom flip. A sink is a strongly
//! connected component with no outgoing edges; unlike the classical case,
//! components need not be strongly connected, so sinks are where the
//! dynamics eventually lives.

use crate::combinatorics::{BandLabel, GeneralizedPermutation, Side};
use crate::matrix::{ElementaryMatrix, ExpansionMatrix};
use serde::Serialize;
use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

#[derive(Debug, Clone, Serialize)]
pub struct DiagramNode {
    pub id: usize,
    pub permutation: GeneralizedPermutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiagramEdge {
    pub from: usize,
    pub to: usize,
    /// Which side's critical band wins along this arrow.
    pub direction: Side,
}

#[derive(Debug, Clone)]
pub struct RauzyDiagram {
    pub nodes: Vec<DiagramNode>,
    pub edges: Vec<DiagramEdge>,
    /// Outgoing edge indices per node, in (Top, Bottom) order.
    adjacency: Vec<Vec<usize>>,
    /// Strongly connected components with no outgoing edges, each sorted.
    pub sinks: Vec<Vec<usize>>,
    index: HashMap<GeneralizedPermutation, usize>,
}

impl RauzyDiagram {
    /// BFS closure of the seed's canonical form under both split directions.
    /// Directions that are undefined (self-critical) or realized by no
    /// positive widths are omitted as edges.
    pub fn build(seed: &GeneralizedPermutation) -> RauzyDiagram {
        let mut nodes: Vec<DiagramNode> = Vec::new();
        let mut edges: Vec<DiagramEdge> = Vec::new();
        let mut adjacency: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<GeneralizedPermutation, usize> = HashMap::new();

        let root = seed.canonical_form();
        index.insert(root.clone(), 0);
        nodes.push(DiagramNode {
            id: 0,
            permutation: root.clone(),
        });
        adjacency.push(Vec::new());

        let mut queue = VecDeque::new();
        queue.push_back(0usize);
        while let Some(id) = queue.pop_front() {
            let pi = nodes[id].permutation.clone();
            for direction in [Side::Top, Side::Bottom] {
                let Ok(out) = pi.split_with_winner(direction) else {
                    continue;
                };
                let canon = out.permutation.canonical_form();
                let to = match index.get(&canon) {
                    Some(&to) => to,
                    None => {
                        let to = nodes.len();
                        index.insert(canon.clone(), to);
                        nodes.push(DiagramNode {
                            id: to,
                            permutation: canon,
                        });
                        adjacency.push(Vec::new());
                        queue.push_back(to);
                        to
                    }
                };
                let edge_id = edges.len();
                edges.push(DiagramEdge {
                    from: id,
                    to,
                    direction,
                });
                adjacency[id].push(edge_id);
            }
        }

        let sinks = find_sinks_from(&nodes, &edges, &adjacency);
        RauzyDiagram {
            nodes,
            edges,
            adjacency,
            sinks,
            index,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_id(&self, pi: &GeneralizedPermutation) -> Option<usize> {
        self.index.get(&pi.canonical_form()).copied()
    }

    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = &DiagramEdge> {
        self.adjacency[node].iter().map(|&e| &self.edges[e])
    }

    pub fn sink_of(&self, node: usize) -> Option<usize> {
        self.sinks.iter().position(|s| s.contains(&node))
    }

    /// BFS shortest directed edge path between two nodes; empty for
    /// `from == to`, `None` if unreachable.
    pub fn shortest_sequence(&self, from: usize, to: usize) -> Option<Vec<DiagramEdge>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut prev: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[from] = true;
        let mut queue = VecDeque::new();
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adjacency[v] {
                let w = self.edges[e].to;
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some(e);
                    if w == to {
                        let mut path = Vec::new();
                        let mut cur = to;
                        while cur != from {
                            let e = prev[cur].unwrap();
                            path.push(self.edges[e]);
                            cur = self.edges[e].from;
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// Finds a splitting sequence from `start` whose accumulated matrix has
    /// every entry positive, by BFS over (labeled type, positivity pattern
    /// of Q) states. Patterns only gain entries along a path, so the state
    /// space is finite and the search terminates.
    ///
    /// Returns the winner/loser sequence together with the directions taken.
    pub fn find_positive_sequence(&self, start: usize) -> Option<PositiveSequence> {
        let pi0 = self.nodes[start].permutation.clone();
        let d = pi0.d();
        let q0 = ExpansionMatrix::identity(d);
        let full: u128 = if d * d == 128 {
            u128::MAX
        } else {
            (1u128 << (d * d)) - 1
        };

        type State = (GeneralizedPermutation, u128);
        let start_state: State = (pi0, q0.positivity_pattern());
        let mut prev: HashMap<State, (State, (BandLabel, BandLabel), Side)> = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back(start_state.clone());
        let mut seen: std::collections::HashSet<State> = std::collections::HashSet::new();
        seen.insert(start_state.clone());

        let mut goal: Option<State> = None;
        'bfs: while let Some((pi, pattern)) = queue.pop_front() {
            for direction in [Side::Top, Side::Bottom] {
                let Ok(out) = pi.split_with_winner(direction) else {
                    continue;
                };
                let rec = out.record;
                let next_pattern = pattern_after_move(pattern, d, rec.winner, rec.loser);
                let state = (out.permutation, next_pattern);
                if seen.insert(state.clone()) {
                    prev.insert(
                        state.clone(),
                        ((pi.clone(), pattern), (rec.winner, rec.loser), direction),
                    );
                    if next_pattern == full {
                        goal = Some(state);
                        break 'bfs;
                    }
                    queue.push_back(state);
                }
            }
        }

        let goal = goal?;
        let mut moves = Vec::new();
        let mut directions = Vec::new();
        let mut cur = goal;
        while cur != start_state {
            let (parent, mv, dir) = prev.get(&cur).unwrap().clone();
            moves.push(mv);
            directions.push(dir);
            cur = parent;
        }
        moves.reverse();
        directions.reverse();
        Some(PositiveSequence { moves, directions })
    }

    /// GraphViz export; nodes show the canonical rows, sink members are
    /// filled with a per-sink color.
    pub fn to_dot(&self) -> String {
        const PALETTE: [&str; 6] = [
            "lightblue",
            "palegreen",
            "lightsalmon",
            "plum",
            "khaki",
            "lightcyan",
        ];
        let mut out = String::from("digraph rauzy {\n  rankdir=LR;\n");
        for node in &self.nodes {
            let label = format!("{:?}", node.permutation);
            match self.sink_of(node.id) {
                Some(s) => {
                    let color = PALETTE[s % PALETTE.len()];
                    let _ = writeln!(
                        out,
                        "  n{} [label=\"{}\", style=filled, fillcolor={}];",
                        node.id, label, color
                    );
                }
                None => {
                    let _ = writeln!(out, "  n{} [label=\"{}\"];", node.id, label);
                }
            }
        }
        for edge in &self.edges {
            let tag = match edge.direction {
                Side::Top => "T",
                Side::Bottom => "B",
            };
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", edge.from, edge.to, tag);
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "nodes": self.nodes,
            "edges": self.edges,
            "sinks": self.sinks,
        })
    }
}

/// Result of the positive-matrix search.
#[derive(Debug, Clone)]
pub struct PositiveSequence {
    pub moves: Vec<(BandLabel, BandLabel)>,
    pub directions: Vec<Side>,
}

impl PositiveSequence {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn matrix(&self, d: usize) -> ExpansionMatrix {
        let mut q = ExpansionMatrix::identity(d);
        for &(winner, loser) in &self.moves {
            q.apply(&ElementaryMatrix { winner, loser });
        }
        q
    }
}

/// Positivity pattern after the loser's column gains the winner's column.
fn pattern_after_move(pattern: u128, d: usize, winner: BandLabel, loser: BandLabel) -> u128 {
    let (w, l) = (winner.index(), loser.index());
    let mut next = pattern;
    for i in 0..d {
        if pattern & (1u128 << (i * d + w)) != 0 {
            next |= 1u128 << (i * d + l);
        }
    }
    next
}

/// Tarjan SCC, then keep the components with no edges leaving them.
fn find_sinks_from(
    nodes: &[DiagramNode],
    edges: &[DiagramEdge],
    adjacency: &[Vec<usize>],
) -> Vec<Vec<usize>> {
    let n = nodes.len();
    let graph: Vec<Vec<usize>> = adjacency
        .iter()
        .map(|out| out.iter().map(|&e| edges[e].to).collect())
        .collect();
    let comps = tarjan_scc(&graph);
    let mut comp_of = vec![usize::MAX; n];
    for (cid, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = cid;
        }
    }
    let mut is_sink = vec![true; comps.len()];
    for (v, out) in graph.iter().enumerate() {
        for &w in out {
            if comp_of[v] != comp_of[w] {
                is_sink[comp_of[v]] = false;
            }
        }
    }
    let mut sinks: Vec<Vec<usize>> = comps
        .into_iter()
        .enumerate()
        .filter(|(cid, _)| is_sink[*cid])
        .map(|(_, mut comp)| {
            comp.sort_unstable();
            comp
        })
        .collect();
    sinks.sort();
    sinks
}

fn tarjan_scc(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'g> {
        graph: &'g [Vec<usize>],
        index: usize,
        stack: Vec<usize>,
        on_stack: Vec<bool>,
        idx: Vec<Option<usize>>,
        low: Vec<usize>,
        comps: Vec<Vec<usize>>,
    }

    fn connect(v: usize, s: &mut State) {
        s.idx[v] = Some(s.index);
        s.low[v] = s.index;
        s.index += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in &s.graph[v] {
            if s.idx[w].is_none() {
                connect(w, s);
                s.low[v] = s.low[v].min(s.low[w]);
            } else if s.on_stack[w] {
                s.low[v] = s.low[v].min(s.idx[w].unwrap());
            }
        }
        if s.low[v] == s.idx[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("stack underflow");
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.comps.push(comp);
        }
    }

    let n = graph.len();
    let mut state = State {
        graph,
        index: 0,
        stack: Vec::new(),
        on_stack: vec![false; n],
        idx: vec![None; n],
        low: vec![0; n],
        comps: Vec::new(),
    };
    for v in 0..n {
        if state.idx[v].is_none() {
            connect(v, &mut state);
        }
    }
    state.comps
}
