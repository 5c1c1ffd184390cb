//! Markings of G-graphs: basis loops at the basepoint, word/path translation
//! and the automorphisms of F_n realized by the group action.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::freegroup::{ConjClass, FreeAutomorphism, Letter, Word};
use crate::ggraph::{Dart, GGraph, InvariantForest, Vertex};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgePath {
    pub start: Vertex,
    pub steps: Vec<Dart>,
}

impl EdgePath {
    pub fn new(start: Vertex, steps: Vec<Dart>) -> Self {
        EdgePath { start, steps }
    }

    pub fn trivial(start: Vertex) -> Self {
        EdgePath { start, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self, g: &GGraph) -> Vertex {
        self.steps.last().map_or(self.start, |&d| g.term(d))
    }

    pub fn is_consecutive(&self, g: &GGraph) -> bool {
        let mut at = self.start;
        for &d in &self.steps {
            if d.index() >= g.dart_count() || g.init(d) != at {
                return false;
            }
            at = g.term(d);
        }
        true
    }

    pub fn is_reduced(&self) -> bool {
        self.steps.windows(2).all(|w| w[1] != w[0].rev())
    }

    /// Cancels backtracks `d d̄`.
    pub fn reduce(&self) -> EdgePath {
        let mut out: Vec<Dart> = Vec::with_capacity(self.steps.len());
        for &d in &self.steps {
            if out.last() == Some(&d.rev()) {
                out.pop();
            } else {
                out.push(d);
            }
        }
        EdgePath { start: self.start, steps: out }
    }

    pub fn inverse(&self, g: &GGraph) -> EdgePath {
        EdgePath {
            start: self.end(g),
            steps: self.steps.iter().rev().map(|d| d.rev()).collect(),
        }
    }

    /// Concatenation followed by reduction. Assumes `self` ends where `other` starts.
    pub fn concat(&self, other: &EdgePath) -> EdgePath {
        let mut out = self.steps.clone();
        for &d in &other.steps {
            if out.last() == Some(&d.rev()) {
                out.pop();
            } else {
                out.push(d);
            }
        }
        EdgePath { start: self.start, steps: out }
    }

    pub fn act(&self, g: &GGraph, x: usize) -> EdgePath {
        EdgePath {
            start: g.act_vertex(x, self.start),
            steps: self.steps.iter().map(|&d| g.act(x, d)).collect(),
        }
    }

    /// Strips backtracking across the ends of a reduced closed path.
    pub fn cyclic_reduce(&self, g: &GGraph) -> EdgePath {
        let p = self.reduce();
        let (mut i, mut j) = (0, p.steps.len());
        while j - i >= 2 && p.steps[j - 1] == p.steps[i].rev() {
            i += 1;
            j -= 1;
        }
        let start = if i < j { g.init(p.steps[i]) } else { p.end(g) };
        EdgePath { start, steps: p.steps[i..j].to_vec() }
    }

    /// Rotation of a cyclically reduced loop with the least dart sequence.
    pub fn least_rotation(&self, g: &GGraph) -> EdgePath {
        let n = self.steps.len();
        if n == 0 {
            return self.clone();
        }
        let best = (0..n)
            .min_by(|&a, &b| {
                let ra = self.steps[a..].iter().chain(&self.steps[..a]);
                let rb = self.steps[b..].iter().chain(&self.steps[..b]);
                ra.cmp(rb)
            })
            .unwrap_or(0);
        let mut steps = self.steps[best..].to_vec();
        steps.extend_from_slice(&self.steps[..best]);
        EdgePath { start: g.init(steps[0]), steps }
    }

    pub fn display(&self, g: &GGraph) -> String {
        if self.steps.is_empty() {
            return format!("[] at {}", g.vertex_name(self.start));
        }
        let names: Vec<String> = self.steps.iter().map(|&d| g.dart_name(d)).collect();
        format!("[{}]", names.join(", "))
    }
}

/// A mismatch between the graph action and a claimed automorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizationViolation {
    pub element: usize,
    pub generator: usize,
    pub message: String,
}

impl fmt::Display for RealizationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "element {} at x{}: {}", self.element, self.generator, self.message)
    }
}

#[derive(Clone, Debug)]
pub struct MarkedGGraph {
    graph: GGraph,
    basis: Vec<EdgePath>,
    realization: Vec<FreeAutomorphism>,
    /// Non-tree edge index -> free generator of π1 via the spanning tree.
    cotree: BTreeMap<usize, usize>,
    /// Inverse of the marking on the spanning-tree basis.
    to_basis: FreeAutomorphism,
}

impl PartialEq for MarkedGGraph {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph && self.basis == other.basis
    }
}

impl Eq for MarkedGGraph {}

impl MarkedGGraph {
    /// Builds a marked graph, deriving the realization `G -> Aut(F_n)` from
    /// the action on basis loops. Basis paths are reduced first.
    pub fn new(graph: GGraph, basis: Vec<EdgePath>) -> Result<Self> {
        let base = graph.basepoint();
        for (i, p) in basis.iter().enumerate() {
            if p.start != base || !p.is_consecutive(&graph) || p.end(&graph) != base {
                return Err(Error::Validation(format!(
                    "marking path of x{} is not a loop at the basepoint",
                    i + 1
                )));
            }
        }
        let basis: Vec<EdgePath> = basis.iter().map(EdgePath::reduce).collect();
        let n = basis.len();
        if !graph.is_connected() {
            return Err(Error::Validation("graph is not connected".into()));
        }
        if graph.rank() != n as isize {
            return Err(Error::Validation(format!(
                "marking has {n} generators but the graph has rank {}",
                graph.rank()
            )));
        }
        if basis.iter().any(EdgePath::is_empty) {
            return Err(Error::Validation("a marking path reduces to the trivial loop".into()));
        }
        let (tree, _) = graph.spanning_tree();
        let cotree: BTreeMap<usize, usize> = (0..graph.edge_count())
            .filter(|k| !tree.contains(k))
            .enumerate()
            .map(|(j, k)| (k, j + 1))
            .collect();
        let images: Vec<Word> = basis.iter().map(|p| tree_word(&cotree, p)).collect();
        let phi = FreeAutomorphism::new(images).map_err(|_| {
            Error::Validation("marking does not induce an isomorphism on π1".into())
        })?;
        let to_basis = phi.inverse()?;
        let mut m = MarkedGGraph { graph, basis, realization: Vec::new(), cotree, to_basis };
        let mut realization = Vec::with_capacity(m.graph.group().order());
        for x in 0..m.graph.group().order() {
            let images: Vec<Word> = m.basis.iter().map(|p| m.word_of_loop(&p.act(&m.graph, x))).collect();
            realization.push(FreeAutomorphism::new(images)?);
        }
        m.realization = realization;
        Ok(m)
    }

    /// Builds a marked graph with a claimed realization, rejecting it when
    /// it disagrees with the graph action.
    pub fn with_realization(graph: GGraph, basis: Vec<EdgePath>, claimed: Vec<FreeAutomorphism>) -> Result<Self> {
        let mut m = Self::new(graph, basis)?;
        m.realization = claimed;
        if let Some(v) = m.verify_realization().first() {
            return Err(Error::Violation(v.to_string()));
        }
        Ok(m)
    }

    pub fn graph(&self) -> &GGraph {
        &self.graph
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[EdgePath] {
        &self.basis
    }

    pub fn realization(&self) -> &[FreeAutomorphism] {
        &self.realization
    }

    /// The automorphism of F_n realized by group element `x`.
    pub fn automorphism(&self, x: usize) -> &FreeAutomorphism {
        &self.realization[x]
    }

    /// The word represented by a loop at the basepoint.
    pub fn word_of_loop(&self, p: &EdgePath) -> Word {
        self.to_basis.apply(&tree_word(&self.cotree, p))
    }

    /// The reduced edge path at the basepoint representing `w`.
    pub fn path_of_word(&self, w: &Word) -> EdgePath {
        let mut p = EdgePath::trivial(self.graph.basepoint());
        for &l in w.letters() {
            let b = &self.basis[l.index() - 1];
            let piece = if l.is_inverse() { b.inverse(&self.graph) } else { b.clone() };
            p = p.concat(&piece);
        }
        p
    }

    /// Rotation-canonical cyclically reduced loop in the free homotopy class.
    pub fn loop_of_class(&self, c: &ConjClass) -> EdgePath {
        self.path_of_word(c.rep()).cyclic_reduce(&self.graph).least_rotation(&self.graph)
    }

    pub fn lyndon_length(&self, w: &Word) -> usize {
        self.path_of_word(w).len()
    }

    /// Length of the cyclically reduced loop of a conjugacy class.
    pub fn loop_length(&self, c: &ConjClass) -> usize {
        self.path_of_word(c.rep()).cyclic_reduce(&self.graph).len()
    }

    /// Checks that each stored automorphism is realized by the graph action,
    /// and that the realization is faithful.
    pub fn verify_realization(&self) -> Vec<RealizationViolation> {
        let mut out = Vec::new();
        let k = self.graph.group().order();
        if self.realization.len() != k {
            out.push(RealizationViolation {
                element: 0,
                generator: 0,
                message: format!("{} automorphisms for a group of order {k}", self.realization.len()),
            });
            return out;
        }
        for x in 0..k {
            let tau = &self.realization[x];
            if tau.rank() != self.rank() {
                out.push(RealizationViolation {
                    element: x,
                    generator: 1,
                    message: "automorphism has the wrong rank".into(),
                });
                continue;
            }
            for (j, b) in self.basis.iter().enumerate() {
                let expected = b.act(&self.graph, x);
                let got = self.path_of_word(&tau.images()[j]);
                if got != expected {
                    out.push(RealizationViolation {
                        element: x,
                        generator: j + 1,
                        message: format!(
                            "path of {} is {} but the action gives {}",
                            tau.images()[j],
                            got.display(&self.graph),
                            expected.display(&self.graph)
                        ),
                    });
                }
            }
        }
        let distinct: BTreeSet<String> = self.realization.iter().map(|t| t.to_string()).collect();
        if distinct.len() != k {
            out.push(RealizationViolation {
                element: 0,
                generator: 0,
                message: "realization is not faithful".into(),
            });
        }
        out
    }

    /// Replaces the graph and marking, keeping nothing else.
    pub(crate) fn remark(graph: GGraph, basis: Vec<EdgePath>) -> Result<Self> {
        Self::new(graph, basis)
    }

    /// Collapses an invariant forest and pushes the marking forward.
    pub fn collapse(&self, forest: &InvariantForest) -> Result<MarkedGGraph> {
        let (graph, vmap, emap) = self.graph.collapse(forest)?;
        let basis = self
            .basis
            .iter()
            .map(|p| {
                let steps = p
                    .steps
                    .iter()
                    .filter_map(|d| emap[d.edge()].map(|k| Dart::new(k, d.is_reversed())))
                    .collect();
                EdgePath::new(vmap[p.start], steps).reduce()
            })
            .collect();
        Self::remark(graph, basis)
    }

    /// Name-independent form: vertices and edges are renamed in order of
    /// first traversal by the basis loops, edges oriented along that first
    /// traversal. Equal strings mean equivalent marked graphs.
    pub fn canonical_form(&self) -> String {
        let g = &self.graph;
        let mut vname: Vec<Option<usize>> = vec![None; g.vertex_count()];
        let mut ename: Vec<Option<(usize, bool)>> = vec![None; g.edge_count()];
        let (mut nv, mut ne) = (1, 0);
        vname[g.basepoint()] = Some(0);
        for p in &self.basis {
            for &d in &p.steps {
                if ename[d.edge()].is_none() {
                    ename[d.edge()] = Some((ne, d.is_reversed()));
                    ne += 1;
                }
                let t = g.term(d);
                if vname[t].is_none() {
                    vname[t] = Some(nv);
                    nv += 1;
                }
            }
        }
        let cdart = |d: Dart| -> String {
            match ename[d.edge()] {
                Some((k, flip)) => {
                    if d.is_reversed() != flip {
                        format!("~e{k}")
                    } else {
                        format!("e{k}")
                    }
                }
                None => format!("?{}", g.dart_name(d)),
            }
        };
        let vn = |v: Vertex| vname[v].map_or_else(|| format!("?{}", g.vertex_name(v)), |i| format!("v{i}"));
        let mut edges: Vec<String> = (0..g.edge_count())
            .map(|k| {
                let fwd = match ename[k] {
                    Some((_, true)) => Dart::new(k, true),
                    _ => Dart::new(k, false),
                };
                format!("{}:{}->{}", cdart(fwd), vn(g.init(fwd)), vn(g.term(fwd)))
            })
            .collect();
        edges.sort();
        let mut actions: Vec<String> = (0..g.group().order())
            .map(|x| {
                let mut images: Vec<String> = g
                    .darts()
                    .map(|d| format!("{}>{}", cdart(d), cdart(g.act(x, d))))
                    .collect();
                images.sort();
                images.join(",")
            })
            .collect();
        actions.sort();
        let basis: Vec<String> = self
            .basis
            .iter()
            .map(|p| p.steps.iter().map(|&d| cdart(d)).collect::<Vec<_>>().join(" "))
            .collect();
        format!(
            "edges {}\nactions {}\nmarking {}\n",
            edges.join(" "),
            actions.join(" | "),
            basis.join(" / ")
        )
    }
}

/// Reads a path as a word in the cotree generators.
fn tree_word(cotree: &BTreeMap<usize, usize>, p: &EdgePath) -> Word {
    Word::reduce(p.steps.iter().filter_map(|d| {
        cotree.get(&d.edge()).map(|&j| if d.is_reversed() { Letter::gen_inv(j) } else { Letter::gen(j) })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn path(m: &MarkedGGraph, names: &[&str]) -> Vec<Dart> {
        names.iter().map(|n| m.graph().dart_by_name(n).unwrap()).collect()
    }

    #[test]
    fn path_of_word_examples() {
        let r2 = fixtures::r2();
        assert_eq!(r2.path_of_word(&w("x1")).steps, path(&r2, &["a"]));
        let theta = fixtures::theta();
        assert_eq!(theta.path_of_word(&w("x1")).steps, path(&theta, &["e1", "~e2"]));
        let r2w = fixtures::r2w();
        assert_eq!(r2w.path_of_word(&w("x2 ~x1")).steps, path(&r2w, &["b"]));
    }

    #[test]
    fn loop_of_class_examples() {
        let r2 = fixtures::r2();
        assert_eq!(r2.loop_of_class(&ConjClass::of(&w("x1"))).steps, path(&r2, &["a"]));
        let theta = fixtures::theta();
        let l = theta.loop_of_class(&ConjClass::of(&w("x1")));
        // Rotation-canonical: the least rotation of the cyclic loop [e1, ~e2].
        let mut expected = path(&theta, &["e1", "~e2"]);
        expected.sort();
        let mut got = l.steps.clone();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(l.len(), 2);
        let r2w = fixtures::r2w();
        assert_eq!(r2w.loop_of_class(&ConjClass::of(&w("x2 ~x1"))).steps, path(&r2w, &["b"]));
    }

    #[test]
    fn lyndon_length_examples() {
        assert_eq!(fixtures::r2().lyndon_length(&Word::empty()), 0);
        assert_eq!(fixtures::r2().lyndon_length(&w("x1 x2")), 2);
        assert_eq!(fixtures::theta().lyndon_length(&w("x1")), 2);
    }

    #[test]
    fn word_of_loop_inverts_path_of_word() {
        for (_, m) in fixtures::all() {
            for word in crate::freegroup::enumerate_words(m.rank(), 4) {
                assert_eq!(m.word_of_loop(&m.path_of_word(&word)), word);
            }
        }
    }

    #[test]
    fn realization_examples() {
        let swap = fixtures::r2_swap();
        assert!(swap.verify_realization().is_empty());
        let t = swap.automorphism(1);
        assert_eq!(t.images(), &[w("x2"), w("x1")]);
        let claimed = vec![FreeAutomorphism::identity(2), FreeAutomorphism::identity(2)];
        let err = MarkedGGraph::with_realization(swap.graph().clone(), swap.basis().to_vec(), claimed);
        assert!(matches!(err, Err(Error::Violation(ref s)) if s.contains("x1")));
        let theta = fixtures::theta();
        assert!(theta.verify_realization().is_empty());
        assert_eq!(theta.automorphism(1).images(), &[w("x2"), w("x1")]);
    }

    #[test]
    fn lyndon_axioms_on_fixtures() {
        for (_, m) in fixtures::all() {
            let words = crate::freegroup::enumerate_words(m.rank(), 3);
            for u in &words {
                assert_eq!(m.lyndon_length(u), m.lyndon_length(&u.inverse()));
                for v in words.iter().take(20) {
                    assert!(m.lyndon_length(&u.mul(v)) <= m.lyndon_length(u) + m.lyndon_length(v));
                }
            }
        }
    }

    #[test]
    fn loop_length_is_min_over_conjugates() {
        for (_, m) in fixtures::all() {
            let conj = crate::freegroup::enumerate_words(m.rank(), 3);
            for word in crate::freegroup::enumerate_words(m.rank(), 3) {
                let c = ConjClass::of(&word);
                let mut best = m.lyndon_length(&word);
                for u in &conj {
                    best = best.min(m.lyndon_length(&u.mul(&word).mul(&u.inverse())));
                }
                assert_eq!(m.loop_length(&c), best, "{word}");
            }
        }
    }

    #[test]
    fn collapse_pushes_marking_forward() {
        let theta = fixtures::theta();
        let forest = theta.graph().invariant_forests()[0].clone();
        let c = theta.collapse(&forest).unwrap();
        assert!(c.verify_realization().is_empty());
        assert_eq!(c.graph().vertex_count(), 1);
        for word in crate::freegroup::enumerate_words(2, 3) {
            let before = theta.path_of_word(&word);
            let after = c.path_of_word(&word);
            let removed = before.steps.iter().filter(|d| forest.edges.contains(&d.edge())).count();
            assert_eq!(after.len() + removed, before.len());
        }
    }

    #[test]
    fn non_generating_marking_rejected() {
        let r2 = fixtures::r2();
        let a = r2.graph().dart_by_name("a").unwrap();
        let basis = vec![EdgePath::new(0, vec![a]), EdgePath::new(0, vec![a, a])];
        assert!(MarkedGGraph::new(r2.graph().clone(), basis).is_err());
    }
}
