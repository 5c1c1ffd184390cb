//! Pointed graphs with an orientation-reversing edge involution and a finite
//! group acting by basepoint-preserving automorphisms.
//!
//! Every undirected edge `k` has two darts: `2k` (forward, named after the
//! edge) and `2k + 1` (reverse, written `~name`). A dart points at its
//! terminal vertex; `E_v` is the set of darts whose terminal vertex is `v`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Subgroup};

pub type Vertex = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart(pub u32);

impl Dart {
    pub fn new(edge: usize, reversed: bool) -> Self {
        Dart((2 * edge + usize::from(reversed)) as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn edge(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_reversed(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn rev(self) -> Dart {
        Dart(self.0 ^ 1)
    }
}

/// A set of darts, as a bitmask. Graphs are limited to 128 darts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DartSet(pub u128);

impl DartSet {
    pub const MAX_DARTS: usize = 128;

    pub fn empty() -> Self {
        DartSet(0)
    }

    pub fn single(d: Dart) -> Self {
        DartSet(1u128 << d.0)
    }

    pub fn from_darts<I: IntoIterator<Item = Dart>>(it: I) -> Self {
        let mut s = DartSet(0);
        for d in it {
            s.insert(d);
        }
        s
    }

    pub fn insert(&mut self, d: Dart) {
        self.0 |= 1u128 << d.0;
    }

    pub fn contains(self, d: Dart) -> bool {
        self.0 >> d.0 & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, o: DartSet) -> DartSet {
        DartSet(self.0 | o.0)
    }

    pub fn intersect(self, o: DartSet) -> DartSet {
        DartSet(self.0 & o.0)
    }

    pub fn minus(self, o: DartSet) -> DartSet {
        DartSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: DartSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: DartSet) -> bool {
        self.0 & o.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Dart> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            let i = bits.trailing_zeros();
            (bits != 0).then(|| {
                bits &= bits - 1;
                Dart(i)
            })
        })
    }

    pub fn first(self) -> Option<Dart> {
        (self.0 != 0).then(|| Dart(self.0.trailing_zeros()))
    }

    /// Darts sorted ascending, the canonical comparison key of a set.
    pub fn sorted(self) -> Vec<Dart> {
        self.iter().collect()
    }
}

/// A problem found by [`GGraph::validate`], naming its witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    FreeEdge,
    LowValence,
    Inversion,
    BasepointMoved,
    IncidenceBroken,
    InvolutionBroken,
    NotHomomorphism,
    NotFaithful,
    Disconnected,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::FreeEdge => "free edge",
            ViolationKind::LowValence => "low valence",
            ViolationKind::Inversion => "inversion",
            ViolationKind::BasepointMoved => "basepoint moved",
            ViolationKind::IncidenceBroken => "incidence broken",
            ViolationKind::InvolutionBroken => "involution broken",
            ViolationKind::NotHomomorphism => "not a homomorphism",
            ViolationKind::NotFaithful => "not faithful",
            ViolationKind::Disconnected => "disconnected",
        };
        f.write_str(s)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeOrbit {
    pub representative: Dart,
    pub members: DartSet,
}

/// A G-invariant set of undirected edges containing no cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InvariantForest {
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GGraph {
    vertex_names: Vec<String>,
    edge_names: Vec<String>,
    /// Terminal vertex of each dart.
    term: Vec<Vertex>,
    basepoint: Vertex,
    group: FiniteGroup,
    /// `dart_action[g][d]` is `g·d`.
    dart_action: Vec<Vec<Dart>>,
    vertex_action: Vec<Vec<Vertex>>,
    /// Named generators, used when serializing.
    generators: Vec<(String, usize)>,
}

/// Result of the graph-level blow-up surgery.
#[derive(Clone, Debug)]
pub(crate) struct BlowUp {
    pub graph: GGraph,
    /// Distinct translates `gα`, the first being `α`.
    pub translates: Vec<DartSet>,
    /// New edge index `e(gα)` per translate; its forward dart runs from the
    /// new vertex to the old one.
    pub new_edges: Vec<usize>,
}

impl GGraph {
    /// Builds a graph whose group is generated by the given dart permutations.
    ///
    /// Only structural consistency is checked here; the semantic invariants
    /// are reported by [`GGraph::validate`].
    pub fn build(
        vertex_names: Vec<String>,
        basepoint: Vertex,
        edges: Vec<(String, Vertex, Vertex)>,
        generators: Vec<(String, Vec<Dart>)>,
    ) -> Result<Self> {
        let nv = vertex_names.len();
        if basepoint >= nv {
            return Err(Error::Validation("basepoint is not a vertex".into()));
        }
        let nd = 2 * edges.len();
        if nd > DartSet::MAX_DARTS {
            return Err(Error::Validation(format!(
                "{} edges exceed the supported maximum of {}",
                edges.len(),
                DartSet::MAX_DARTS / 2
            )));
        }
        let mut term = vec![0; nd];
        let mut edge_names = Vec::with_capacity(edges.len());
        for (k, (name, from, to)) in edges.into_iter().enumerate() {
            if from >= nv || to >= nv {
                return Err(Error::Validation(format!("edge `{name}` has an unknown endpoint")));
            }
            term[2 * k] = to;
            term[2 * k + 1] = from;
            edge_names.push(name);
        }
        let mut gen_perms = Vec::new();
        for (name, perm) in &generators {
            if perm.len() != nd || !is_permutation(perm.iter().map(|d| d.index()), nd) {
                return Err(Error::Validation(format!(
                    "generator `{name}` is not a permutation of the darts"
                )));
            }
            gen_perms.push(perm.iter().map(|d| d.index()).collect::<Vec<_>>());
        }
        let (group, perms) = FiniteGroup::generated_by(&gen_perms, nd)?;
        let dart_action: Vec<Vec<Dart>> = perms
            .iter()
            .map(|p| p.iter().map(|&x| Dart(x as u32)).collect())
            .collect();
        let generators = generators
            .into_iter()
            .enumerate()
            .map(|(i, (name, _))| {
                let idx = perms.iter().position(|p| *p == gen_perms[i]).unwrap_or(0);
                (name, idx)
            })
            .collect();
        Self::assemble(vertex_names, edge_names, term, basepoint, group, dart_action, generators)
    }

    /// Builds a graph from an explicit multiplication table and one dart
    /// permutation per element. The homomorphism property is checked by
    /// [`GGraph::validate`], not assumed.
    pub fn from_table(
        vertex_names: Vec<String>,
        basepoint: Vertex,
        edges: Vec<(String, Vertex, Vertex)>,
        table: Vec<Vec<usize>>,
        dart_action: Vec<Vec<Dart>>,
    ) -> Result<Self> {
        let base = Self::build(vertex_names, basepoint, edges, vec![])?;
        let group = FiniteGroup::from_table(table)?;
        let nd = base.dart_count();
        if dart_action.len() != group.order()
            || dart_action
                .iter()
                .any(|p| p.len() != nd || !is_permutation(p.iter().map(|d| d.index()), nd))
        {
            return Err(Error::Validation("one dart permutation per group element required".into()));
        }
        let generators = (1..group.order()).map(|g| (format!("g{g}"), g)).collect();
        Self::assemble(
            base.vertex_names,
            base.edge_names,
            base.term,
            basepoint,
            group,
            dart_action,
            generators,
        )
    }

    fn assemble(
        vertex_names: Vec<String>,
        edge_names: Vec<String>,
        term: Vec<Vertex>,
        basepoint: Vertex,
        group: FiniteGroup,
        dart_action: Vec<Vec<Dart>>,
        generators: Vec<(String, usize)>,
    ) -> Result<Self> {
        let nv = vertex_names.len();
        // Vertex action inferred from the first dart at each vertex.
        let mut first_dart: Vec<Option<Dart>> = vec![None; nv];
        for (d, &v) in term.iter().enumerate() {
            first_dart[v].get_or_insert(Dart(d as u32));
        }
        let vertex_action = dart_action
            .iter()
            .map(|p| {
                (0..nv)
                    .map(|v| match first_dart[v] {
                        Some(d) => term[p[d.index()].index()],
                        None => v,
                    })
                    .collect()
            })
            .collect();
        Ok(GGraph {
            vertex_names,
            edge_names,
            term,
            basepoint,
            group,
            dart_action,
            vertex_action,
            generators,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_names.len()
    }

    pub fn dart_count(&self) -> usize {
        self.term.len()
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> {
        (0..self.term.len() as u32).map(Dart)
    }

    pub fn all_darts(&self) -> DartSet {
        let nd = self.dart_count();
        DartSet(if nd == 128 { u128::MAX } else { (1u128 << nd) - 1 })
    }

    pub fn basepoint(&self) -> Vertex {
        self.basepoint
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn generators(&self) -> &[(String, usize)] {
        &self.generators
    }

    pub fn vertex_name(&self, v: Vertex) -> &str {
        &self.vertex_names[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn edge_name(&self, k: usize) -> &str {
        &self.edge_names[k]
    }

    pub fn edge_names(&self) -> &[String] {
        &self.edge_names
    }

    pub fn dart_name(&self, d: Dart) -> String {
        if d.is_reversed() {
            format!("~{}", self.edge_names[d.edge()])
        } else {
            self.edge_names[d.edge()].clone()
        }
    }

    pub fn set_name(&self, s: DartSet) -> String {
        let names: Vec<String> = s.iter().map(|d| self.dart_name(d)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn vertex_by_name(&self, name: &str) -> Result<Vertex> {
        self.vertex_names
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Unknown { kind: "vertex", name: name.into() })
    }

    pub fn dart_by_name(&self, name: &str) -> Result<Dart> {
        let (rev, body) = match name.strip_prefix('~') {
            Some(b) => (true, b),
            None => (false, name),
        };
        let k = self
            .edge_names
            .iter()
            .position(|e| e == body)
            .ok_or_else(|| Error::Unknown { kind: "edge", name: name.into() })?;
        Ok(Dart::new(k, rev))
    }

    pub fn term(&self, d: Dart) -> Vertex {
        self.term[d.index()]
    }

    pub fn init(&self, d: Dart) -> Vertex {
        self.term[d.rev().index()]
    }

    pub fn is_loop(&self, d: Dart) -> bool {
        self.term(d) == self.init(d)
    }

    /// `E_v`: darts terminating at `v`.
    pub fn incoming(&self, v: Vertex) -> DartSet {
        DartSet::from_darts(self.darts().filter(|&d| self.term(d) == v))
    }

    pub fn valence(&self, v: Vertex) -> usize {
        self.term.iter().filter(|&&t| t == v).count()
    }

    /// Rank of the fundamental group, `E - V + 1` (for connected graphs).
    pub fn rank(&self) -> isize {
        self.edge_count() as isize - self.vertex_count() as isize + 1
    }

    pub fn act(&self, g: usize, d: Dart) -> Dart {
        self.dart_action[g][d.index()]
    }

    pub fn act_vertex(&self, g: usize, v: Vertex) -> Vertex {
        self.vertex_action[g][v]
    }

    pub fn act_set(&self, g: usize, s: DartSet) -> DartSet {
        DartSet::from_darts(s.iter().map(|d| self.act(g, d)))
    }

    pub fn stabilizer(&self, d: Dart) -> Subgroup {
        self.set_stabilizer(DartSet::single(d))
    }

    pub fn set_stabilizer(&self, s: DartSet) -> Subgroup {
        let mut mask = 0u64;
        for g in 0..self.group.order() {
            if self.act_set(g, s) == s {
                mask |= 1 << g;
            }
        }
        Subgroup(mask)
    }

    pub fn vertex_stabilizer(&self, v: Vertex) -> Subgroup {
        let mut mask = 0u64;
        for g in 0..self.group.order() {
            if self.act_vertex(g, v) == v {
                mask |= 1 << g;
            }
        }
        Subgroup(mask)
    }

    pub fn orbit(&self, d: Dart) -> EdgeOrbit {
        EdgeOrbit {
            representative: d,
            members: DartSet::from_darts((0..self.group.order()).map(|g| self.act(g, d))),
        }
    }

    /// Distinct translates `gS` of a dart set, `S` first.
    pub fn translates(&self, s: DartSet) -> Vec<DartSet> {
        let mut out = vec![s];
        for g in 0..self.group.order() {
            let t = self.act_set(g, s);
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }

    /// Union of all translates of `s`.
    pub fn saturate(&self, s: DartSet) -> DartSet {
        self.translates(s).into_iter().fold(DartSet::empty(), DartSet::union)
    }

    /// Union of the translates `hS` for `h` in a subgroup.
    pub fn saturate_by(&self, h: Subgroup, s: DartSet) -> DartSet {
        h.elements().fold(DartSet::empty(), |acc, g| acc.union(self.act_set(g, s)))
    }

    pub fn is_invariant(&self, s: DartSet) -> bool {
        (0..self.group.order()).all(|g| self.act_set(g, s) == s)
    }

    pub fn is_connected(&self) -> bool {
        let nv = self.vertex_count();
        let mut seen = vec![false; nv];
        let mut stack = vec![self.basepoint];
        seen[self.basepoint] = true;
        while let Some(v) = stack.pop() {
            for d in self.darts() {
                if self.init(d) == v && !seen[self.term(d)] {
                    seen[self.term(d)] = true;
                    stack.push(self.term(d));
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// BFS spanning tree from the basepoint; returns the tree edge indices and,
    /// per vertex, the dart by which it was reached.
    pub fn spanning_tree(&self) -> (BTreeSet<usize>, Vec<Option<Dart>>) {
        let nv = self.vertex_count();
        let mut parent: Vec<Option<Dart>> = vec![None; nv];
        let mut seen = vec![false; nv];
        let mut tree = BTreeSet::new();
        let mut queue = std::collections::VecDeque::from([self.basepoint]);
        seen[self.basepoint] = true;
        while let Some(v) = queue.pop_front() {
            for d in self.darts() {
                if self.init(d) == v && !seen[self.term(d)] {
                    seen[self.term(d)] = true;
                    parent[self.term(d)] = Some(d);
                    tree.insert(d.edge());
                    queue.push_back(self.term(d));
                }
            }
        }
        (tree, parent)
    }

    /// Checks every structural and admissibility invariant.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |kind, message: String| out.push(Violation { kind, message });
        let k = self.group.order();
        for g in 0..k {
            for d in self.darts() {
                let gd = self.act(g, d);
                if self.act(g, d.rev()) != gd.rev() {
                    push(
                        ViolationKind::InvolutionBroken,
                        format!("element {g} does not commute with reversal at {}", self.dart_name(d)),
                    );
                }
                if self.term(gd) != self.act_vertex(g, self.term(d)) {
                    push(
                        ViolationKind::IncidenceBroken,
                        format!("element {g} does not respect incidence at {}", self.dart_name(d)),
                    );
                }
                if gd == d.rev() {
                    push(
                        ViolationKind::Inversion,
                        format!("element {g} inverts edge {}", self.edge_names[d.edge()]),
                    );
                }
            }
            if self.act_vertex(g, self.basepoint) != self.basepoint {
                push(ViolationKind::BasepointMoved, format!("element {g} moves the basepoint"));
            }
            if g != 0 && self.darts().all(|d| self.act(g, d) == d) {
                push(ViolationKind::NotFaithful, format!("element {g} acts trivially"));
            }
            for h in 0..k {
                let gh = self.group.mul(g, h);
                if self.darts().any(|d| self.act(gh, d) != self.act(g, self.act(h, d))) {
                    push(
                        ViolationKind::NotHomomorphism,
                        format!("action of {g}·{h} differs from composite"),
                    );
                }
            }
        }
        for v in 0..self.vertex_count() {
            let val = self.valence(v);
            let name = &self.vertex_names[v];
            if val == 1 {
                push(ViolationKind::FreeEdge, format!("vertex {name} has valence 1"));
            } else if v == self.basepoint && val < 2 {
                push(ViolationKind::LowValence, format!("basepoint {name} has valence {val} < 2"));
            } else if v != self.basepoint && val < 3 {
                push(ViolationKind::LowValence, format!("vertex {name} has valence {val} < 3"));
            }
        }
        if !self.is_connected() {
            push(ViolationKind::Disconnected, "graph is not connected".into());
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Orbits of undirected edges, each as a sorted list of edge indices.
    pub fn undirected_edge_orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.edge_count()];
        let mut out = Vec::new();
        for k in 0..self.edge_count() {
            if seen[k] {
                continue;
            }
            let mut orbit: Vec<usize> = (0..self.group.order())
                .map(|g| self.act(g, Dart::new(k, false)).edge())
                .collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &e in &orbit {
                seen[e] = true;
            }
            out.push(orbit);
        }
        out
    }

    fn is_acyclic(&self, edges: &[usize]) -> bool {
        let mut parent: Vec<usize> = (0..self.vertex_count()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &k in edges {
            let d = Dart::new(k, false);
            let (a, b) = (find(&mut parent, self.init(d)), find(&mut parent, self.term(d)));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// All nonempty G-invariant forests, ordered by orbit-subset mask.
    pub fn invariant_forests(&self) -> Vec<InvariantForest> {
        let orbits = self.undirected_edge_orbits();
        let candidates: Vec<&Vec<usize>> =
            orbits.iter().filter(|o| self.is_acyclic(o)).collect();
        let mut out = Vec::new();
        let m = candidates.len();
        assert!(m < 24, "too many acyclic edge orbits to enumerate forests");
        for mask in 1u32..(1 << m) {
            let mut edges: Vec<usize> = (0..m)
                .filter(|i| mask >> i & 1 == 1)
                .flat_map(|i| candidates[i].iter().copied())
                .collect();
            edges.sort_unstable();
            if self.is_acyclic(&edges) {
                out.push(InvariantForest { edges });
            }
        }
        out
    }

    /// No nonempty invariant forest.
    pub fn is_reduced(&self) -> bool {
        self.invariant_forests().is_empty()
    }

    pub fn is_invariant_forest(&self, edges: &[usize]) -> bool {
        let set: BTreeSet<usize> = edges.iter().copied().collect();
        let invariant = set.iter().all(|&k| {
            (0..self.group.order()).all(|g| set.contains(&self.act(g, Dart::new(k, false)).edge()))
        });
        invariant && set.iter().all(|&k| k < self.edge_count()) && self.is_acyclic(edges)
    }

    /// Collapses an invariant forest. Each tree is merged into the basepoint
    /// if it contains it, otherwise into its least vertex.
    ///
    /// Returns the quotient with the vertex map and the (partial) edge map.
    pub fn collapse(&self, forest: &InvariantForest) -> Result<(GGraph, Vec<Vertex>, Vec<Option<usize>>)> {
        if !self.is_invariant_forest(&forest.edges) {
            return Err(Error::Validation("not an invariant forest".into()));
        }
        let nv = self.vertex_count();
        let mut comp: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &k in &forest.edges {
            let d = Dart::new(k, false);
            let (a, b) = (find(&mut comp, self.init(d)), find(&mut comp, self.term(d)));
            comp[a.max(b)] = a.min(b);
        }
        let roots: Vec<usize> = (0..nv).map(|v| find(&mut comp, v)).collect();
        // Survivor per component: basepoint if present, else least vertex.
        let mut survivor: Vec<usize> = (0..nv).collect();
        survivor[..nv].copy_from_slice(&roots[..nv]);
        let base_root = roots[self.basepoint];
        for v in 0..nv {
            if roots[v] == base_root {
                survivor[v] = self.basepoint;
            }
        }
        let mut new_index = vec![usize::MAX; nv];
        let mut names = Vec::new();
        for v in 0..nv {
            if survivor[v] == v {
                new_index[v] = names.len();
                names.push(self.vertex_names[v].clone());
            }
        }
        let vmap: Vec<Vertex> = (0..nv).map(|v| new_index[survivor[v]]).collect();
        let removed: BTreeSet<usize> = forest.edges.iter().copied().collect();
        let mut emap: Vec<Option<usize>> = vec![None; self.edge_count()];
        let mut edges = Vec::new();
        for k in 0..self.edge_count() {
            if removed.contains(&k) {
                continue;
            }
            emap[k] = Some(edges.len());
            let d = Dart::new(k, false);
            edges.push((self.edge_names[k].clone(), vmap[self.init(d)], vmap[self.term(d)]));
        }
        let graph = self.rebuild(names, vmap[self.basepoint], edges, |d| {
            emap[d.edge()].map(|k| Dart::new(k, d.is_reversed()))
        })?;
        Ok((graph, vmap, emap))
    }

    /// Rebuilds a graph with the same group, transporting the dart action
    /// through `dart_map` (old dart to new dart, `None` for deleted darts).
    pub(crate) fn rebuild(
        &self,
        vertex_names: Vec<String>,
        basepoint: Vertex,
        edges: Vec<(String, Vertex, Vertex)>,
        dart_map: impl Fn(Dart) -> Option<Dart>,
    ) -> Result<GGraph> {
        let nd = 2 * edges.len();
        let mut old_of_new: Vec<Option<Dart>> = vec![None; nd];
        for d in self.darts() {
            if let Some(nd_) = dart_map(d) {
                old_of_new[nd_.index()] = Some(d);
            }
        }
        let mut dart_action = Vec::with_capacity(self.group.order());
        for g in 0..self.group.order() {
            let mut perm = Vec::with_capacity(nd);
            for slot in &old_of_new {
                let old = slot.ok_or_else(|| Error::Validation("rebuild left a dart unmapped".into()))?;
                let img = dart_map(self.act(g, old))
                    .ok_or_else(|| Error::Validation("action does not preserve kept darts".into()))?;
                perm.push(img);
            }
            dart_action.push(perm);
        }
        self.rebuild_with_action(vertex_names, basepoint, edges, dart_action)
    }

    pub(crate) fn rebuild_with_action(
        &self,
        vertex_names: Vec<String>,
        basepoint: Vertex,
        edges: Vec<(String, Vertex, Vertex)>,
        dart_action: Vec<Vec<Dart>>,
    ) -> Result<GGraph> {
        let mut term = vec![0; 2 * edges.len()];
        let mut edge_names = Vec::with_capacity(edges.len());
        for (k, (name, from, to)) in edges.into_iter().enumerate() {
            term[2 * k] = to;
            term[2 * k + 1] = from;
            edge_names.push(name);
        }
        if term.len() > DartSet::MAX_DARTS {
            return Err(Error::Validation("graph exceeds 128 darts".into()));
        }
        Self::assemble(
            vertex_names,
            edge_names,
            term,
            basepoint,
            self.group.clone(),
            dart_action,
            self.generators.clone(),
        )
    }

    /// Equivariant blow-up of the translates of `alpha ⊆ E_v`: each translate
    /// `gα` gets a new vertex `u` and a new edge `e(gα): u -> g·v`, and the
    /// darts of `gα` are re-terminated at `u`. Assumes translates of `alpha`
    /// are pairwise equal or disjoint.
    pub(crate) fn blow_up_graph(&self, alpha: DartSet) -> Result<BlowUp> {
        let v = match alpha.first() {
            Some(d) => self.term(d),
            None => return Err(Error::Validation("cannot blow up an empty set".into())),
        };
        if alpha.iter().any(|d| self.term(d) != v) {
            return Err(Error::Validation("blow-up set is not at a single vertex".into()));
        }
        let translates = self.translates(alpha);
        for (i, a) in translates.iter().enumerate() {
            for b in &translates[i + 1..] {
                if !a.is_disjoint(*b) {
                    return Err(Error::Validation("translates overlap without being equal".into()));
                }
            }
        }
        let nv = self.vertex_count();
        let ne = self.edge_count();
        let mut names = self.vertex_names.clone();
        let mut edges: Vec<(String, Vertex, Vertex)> = (0..ne)
            .map(|k| {
                let d = Dart::new(k, false);
                (self.edge_names[k].clone(), self.init(d), self.term(d))
            })
            .collect();
        let mut taken_v: BTreeSet<String> = names.iter().cloned().collect();
        let mut taken_e: BTreeSet<String> = self.edge_names.iter().cloned().collect();
        let mut new_edges = Vec::new();
        for (j, t) in translates.iter().enumerate() {
            let u = nv + j;
            names.push(fresh_name("u", &mut taken_v));
            let target = self.term(t.first().expect("nonempty translate"));
            new_edges.push(edges.len());
            edges.push((fresh_name("f", &mut taken_e), u, target));
        }
        // Re-terminate darts of each translate at its new vertex.
        let mut term_override: Vec<Option<Vertex>> = vec![None; 2 * ne];
        for (j, t) in translates.iter().enumerate() {
            for d in t.iter() {
                term_override[d.index()] = Some(nv + j);
            }
        }
        for k in 0..ne {
            let fwd = Dart::new(k, false);
            if let Some(u) = term_override[fwd.index()] {
                edges[k].2 = u;
            }
            if let Some(u) = term_override[fwd.rev().index()] {
                edges[k].1 = u;
            }
        }
        let mut dart_action = Vec::new();
        for g in 0..self.group.order() {
            let mut perm: Vec<Dart> = (0..2 * ne).map(|d| self.act(g, Dart(d as u32))).collect();
            for t in &translates {
                let gt = self.act_set(g, *t);
                let j2 = translates.iter().position(|x| *x == gt).ok_or_else(|| {
                    Error::Validation("translates not closed under the group".into())
                })?;
                perm.push(Dart::new(ne + j2, false));
                perm.push(Dart::new(ne + j2, true));
            }
            // New darts were appended in translate order; fix their positions.
            let mut fixed = perm[..2 * ne].to_vec();
            for j in 0..translates.len() {
                fixed.push(perm[2 * ne + 2 * j]);
                fixed.push(perm[2 * ne + 2 * j + 1]);
            }
            dart_action.push(fixed);
        }
        let graph = self.rebuild_with_action(names, self.basepoint, edges, dart_action)?;
        Ok(BlowUp { graph, translates, new_edges })
    }

    /// Graphviz rendering of the graph with its basepoint highlighted.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for (v, name) in self.vertex_names.iter().enumerate() {
            let shape = if v == self.basepoint { "doublecircle" } else { "circle" };
            s.push_str(&format!("  \"{name}\" [shape={shape}];\n"));
        }
        for k in 0..self.edge_count() {
            let d = Dart::new(k, false);
            s.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                self.vertex_names[self.init(d)],
                self.vertex_names[self.term(d)],
                self.edge_names[k]
            ));
        }
        s.push_str("}\n");
        s
    }
}

fn is_permutation(it: impl Iterator<Item = usize>, n: usize) -> bool {
    let mut seen = vec![false; n];
    for x in it {
        if x >= n || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    seen.into_iter().all(|s| s)
}

pub(crate) fn fresh_name(prefix: &str, taken: &mut BTreeSet<String>) -> String {
    let mut i = 1;
    loop {
        let name = format!("{prefix}{i}");
        if taken.insert(name.clone()) {
            return name;
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixtures_validate() {
        for (name, m) in fixtures::all() {
            assert!(m.graph().validate().is_empty(), "{name}: {:?}", m.graph().validate());
        }
    }

    #[test]
    fn free_edge_reported() {
        let g = GGraph::build(
            vec!["*".into(), "w".into()],
            0,
            vec![("a".into(), 0, 0), ("c".into(), 0, 1)],
            vec![],
        )
        .unwrap();
        let v = g.validate();
        assert!(v.iter().any(|x| x.kind == ViolationKind::FreeEdge && x.message.contains('w')));
    }

    #[test]
    fn inversion_reported() {
        // a -> ~a, b -> ~b.
        let perm = vec![Dart(1), Dart(0), Dart(3), Dart(2)];
        let g = GGraph::build(
            vec!["*".into()],
            0,
            vec![("a".into(), 0, 0), ("b".into(), 0, 0)],
            vec![("t".into(), perm)],
        )
        .unwrap();
        assert!(g.validate().iter().any(|x| x.kind == ViolationKind::Inversion));
    }

    #[test]
    fn broken_homomorphism_reported() {
        // Z/2 table but the non-identity element acts trivially and the
        // identity swaps: not a homomorphism.
        let swap = vec![Dart(2), Dart(3), Dart(0), Dart(1)];
        let id: Vec<Dart> = (0..4).map(Dart).collect();
        let g = GGraph::from_table(
            vec!["*".into()],
            0,
            vec![("a".into(), 0, 0), ("b".into(), 0, 0)],
            vec![vec![0, 1], vec![1, 0]],
            vec![swap, id],
        )
        .unwrap();
        assert!(g.validate().iter().any(|x| x.kind == ViolationKind::NotHomomorphism));
    }

    #[test]
    fn stabilizers_and_orbits() {
        let theta = fixtures::theta();
        let g = theta.graph();
        let e1 = g.dart_by_name("e1").unwrap();
        let e2 = g.dart_by_name("e2").unwrap();
        let e3 = g.dart_by_name("e3").unwrap();
        assert_eq!(g.stabilizer(e1), g.group().whole());
        assert_eq!(g.stabilizer(e2), g.group().identity_subgroup());
        assert_eq!(g.orbit(e2).members, DartSet::from_darts([e2, e3]));
        assert_eq!(g.orbit(e1).members, DartSet::single(e1));
        let swap = fixtures::r2_swap();
        let sg = swap.graph();
        let a = sg.dart_by_name("a").unwrap();
        let b = sg.dart_by_name("b").unwrap();
        assert_eq!(sg.orbit(a).members, DartSet::from_darts([a, b]));
        let r2 = fixtures::r2();
        for d in r2.graph().darts() {
            assert_eq!(r2.graph().stabilizer(d).order(), 1);
        }
    }

    #[test]
    fn orbit_stabilizer_on_fixtures() {
        for (_, m) in fixtures::all() {
            let g = m.graph();
            for d in g.darts() {
                assert_eq!(g.orbit(d).members.len() * g.stabilizer(d).order(), g.group().order());
            }
        }
    }

    #[test]
    fn forests_on_fixtures() {
        assert!(fixtures::r2().graph().invariant_forests().is_empty());
        assert!(fixtures::r2().graph().is_reduced());
        assert!(fixtures::r2_swap().graph().is_reduced());
        let theta = fixtures::theta();
        let forests = theta.graph().invariant_forests();
        assert_eq!(forests, vec![InvariantForest { edges: vec![0] }]);
        assert!(!theta.graph().is_reduced());
    }

    #[test]
    fn forest_oracle_matches_enumeration() {
        // Brute force over every edge subset: invariant and acyclic.
        for (_, m) in fixtures::all() {
            let g = m.graph();
            let ne = g.edge_count();
            let mut oracle = Vec::new();
            for mask in 1u32..(1 << ne) {
                let edges: Vec<usize> = (0..ne).filter(|k| mask >> k & 1 == 1).collect();
                if g.is_invariant_forest(&edges) {
                    oracle.push(edges);
                }
            }
            let mut got: Vec<Vec<usize>> = g.invariant_forests().into_iter().map(|f| f.edges).collect();
            got.sort();
            oracle.sort();
            assert_eq!(got, oracle);
        }
    }

    #[test]
    fn collapse_theta_gives_swap_rose() {
        let theta = fixtures::theta();
        let g = theta.graph();
        let (c, vmap, emap) = g.collapse(&InvariantForest { edges: vec![0] }).unwrap();
        assert_eq!(c.vertex_count(), 1);
        assert_eq!(c.edge_count(), 2);
        assert!(c.darts().all(|d| c.is_loop(d)));
        assert_eq!(vmap, vec![0, 0]);
        assert_eq!(emap, vec![None, Some(0), Some(1)]);
        let e2 = c.dart_by_name("e2").unwrap();
        assert_eq!(c.orbit(e2).members.len(), 2);
        assert_eq!(c.rank(), g.rank());
        assert!(c.validate().is_empty());
    }

    #[test]
    fn collapse_empty_forest_is_identity() {
        let theta = fixtures::theta();
        let (c, vmap, emap) = theta.graph().collapse(&InvariantForest { edges: vec![] }).unwrap();
        assert_eq!(&c, theta.graph());
        assert_eq!(vmap, vec![0, 1]);
        assert_eq!(emap, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn collapse_rejects_cycles() {
        let theta = fixtures::theta();
        assert!(theta.graph().collapse(&InvariantForest { edges: vec![1, 2] }).is_err());
        assert!(theta.graph().collapse(&InvariantForest { edges: vec![1] }).is_err());
    }
}
