//! Ideal edges: subsets of `E_v` that can be pulled apart by a blow-up.

use std::fmt;

use crate::error::{Error, Result};
use crate::ggraph::{Dart, DartSet, GGraph, Vertex};
use crate::group::Subgroup;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IdealEdge {
    pub vertex: Vertex,
    pub edges: DartSet,
    pub stab: Subgroup,
}

impl IdealEdge {
    /// Validates `edges` as an ideal edge.
    pub fn new(g: &GGraph, edges: DartSet) -> Result<Self> {
        let vertex = ideal_check(g, edges).map_err(Error::Hypothesis)?;
        Ok(IdealEdge { vertex, edges, stab: g.set_stabilizer(edges) })
    }

    /// Canonical comparison key: vertex, then sorted darts.
    pub fn key(&self) -> (Vertex, Vec<Dart>) {
        (self.vertex, self.edges.sorted())
    }

    pub fn index_in(&self, g: &GGraph) -> usize {
        g.group().index(self.stab)
    }

    pub fn display(&self, g: &GGraph) -> String {
        format!("{}:{}", g.vertex_name(self.vertex), g.set_name(self.edges))
    }

    pub fn translate(&self, g: &GGraph, x: usize) -> IdealEdge {
        let edges = g.act_set(x, self.edges);
        IdealEdge { vertex: g.act_vertex(x, self.vertex), edges, stab: g.set_stabilizer(edges) }
    }
}

impl fmt::Display for IdealEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}:{:#x}", self.vertex, self.edges.0)
    }
}

/// Returns the vertex of an ideal edge, or the reason `s` is not one.
pub fn ideal_check(g: &GGraph, s: DartSet) -> std::result::Result<Vertex, String> {
    let Some(first) = s.first() else {
        return Err("empty set".into());
    };
    let v = g.term(first);
    if s.iter().any(|d| g.term(d) != v) {
        return Err("darts end at different vertices".into());
    }
    let ev = g.incoming(v);
    let rest = ev.minus(s).len();
    if s.len() < 2 {
        return Err("fewer than two darts".into());
    }
    if v == g.basepoint() {
        if rest < 1 {
            return Err("contains all of E_*".into());
        }
    } else if rest < 2 {
        return Err(format!("leaves {rest} dart(s) of E_{} outside", g.vertex_name(v)));
    }
    for x in g.vertex_stabilizer(v).elements() {
        let t = g.act_set(x, s);
        if t != s && !t.is_disjoint(s) {
            return Err(format!("translate by element {x} overlaps without being equal"));
        }
    }
    Ok(v)
}

pub fn is_ideal(g: &GGraph, s: DartSet) -> bool {
    ideal_check(g, s).is_ok()
}

/// Least translate of an ideal edge under the canonical key.
pub fn canonical(g: &GGraph, alpha: &IdealEdge) -> IdealEdge {
    (0..g.group().order())
        .map(|x| alpha.translate(g, x))
        .min_by_key(IdealEdge::key)
        .expect("nonempty group")
}

/// Every ideal edge, not only orbit representatives, in key order.
pub fn all_ideal_edges(g: &GGraph) -> Vec<IdealEdge> {
    let mut out = Vec::new();
    for v in 0..g.vertex_count() {
        let ev: Vec<Dart> = g.incoming(v).sorted();
        assert!(ev.len() <= 24, "vertex valence too large to enumerate ideal edges");
        for mask in 0u32..(1 << ev.len()) {
            if mask.count_ones() < 2 {
                continue;
            }
            let s = DartSet::from_darts((0..ev.len()).filter(|i| mask >> i & 1 == 1).map(|i| ev[i]));
            if is_ideal(g, s) {
                out.push(IdealEdge { vertex: v, edges: s, stab: g.set_stabilizer(s) });
            }
        }
    }
    out.sort_by_key(IdealEdge::key);
    out
}

/// One representative per orbit `Gα`: the least member set.
pub fn enumerate_ideal_edges(g: &GGraph) -> Vec<IdealEdge> {
    all_ideal_edges(g)
        .into_iter()
        .filter(|a| canonical(g, a).edges == a.edges)
        .collect()
}

/// `D(α) = { a ∈ α : stab(a) = stab(α), ā ∉ ∪Gα }`.
pub fn d_set(g: &GGraph, alpha: &IdealEdge) -> DartSet {
    let sat = g.saturate(alpha.edges);
    DartSet::from_darts(
        alpha
            .edges
            .iter()
            .filter(|&a| g.stabilizer(a) == alpha.stab && !sat.contains(a.rev())),
    )
}

/// `α⁻¹ = E_v − α` when it is an ideal edge not contained in `∪Gα`.
pub fn inverse(g: &GGraph, alpha: &IdealEdge) -> Option<IdealEdge> {
    let comp = g.incoming(alpha.vertex).minus(alpha.edges);
    if comp.is_subset(g.saturate(alpha.edges)) {
        return None;
    }
    IdealEdge::new(g, comp).ok()
}

pub fn is_invertible(g: &GGraph, alpha: &IdealEdge) -> bool {
    inverse(g, alpha).is_some()
}

/// Translates of `β` meeting `α` are nested with it or disjoint from it, for
/// every pair of translates.
fn translates_nest(g: &GGraph, alpha: &IdealEdge, beta: &IdealEdge) -> bool {
    let ta = g.translates(alpha.edges);
    let tb = g.translates(beta.edges);
    ta.iter().all(|&a| {
        tb.iter()
            .all(|&b| a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a))
    })
}

/// Orbit compatibility. Orbits are read as families of translates: every
/// pair of translates must be nested or disjoint, and disjoint orbits may
/// not be complementary at a vertex other than the basepoint.
pub fn compatible(g: &GGraph, alpha: &IdealEdge, beta: &IdealEdge) -> bool {
    if !translates_nest(g, alpha, beta) {
        return false;
    }
    let sa = g.saturate(alpha.edges);
    let sb = g.saturate(beta.edges);
    if !sa.is_disjoint(sb) {
        return true;
    }
    if alpha.vertex == g.basepoint() && beta.vertex == g.basepoint() {
        return true;
    }
    // Disjoint orbits: excluded when some translate of α is the complement
    // of some translate of β.
    !g.translates(alpha.edges).iter().any(|&a| {
        let v = g.term(a.first().expect("nonempty"));
        g.translates(beta.edges)
            .iter()
            .any(|&b| g.incoming(v).minus(b) == a)
    })
}

/// Compatible, or one is invertible with its inverse inside a translate of
/// the other.
pub fn pre_compatible(g: &GGraph, alpha: &IdealEdge, beta: &IdealEdge) -> bool {
    if compatible(g, alpha, beta) {
        return true;
    }
    let inside = |x: &IdealEdge, y: &IdealEdge| match inverse(g, x) {
        Some(inv) => g.translates(y.edges).iter().any(|&t| inv.edges.is_subset(t)),
        None => false,
    };
    inside(alpha, beta) || inside(beta, alpha)
}

/// One intersection component: the double coset representative `x` with
/// `γ = α ∩ P x β` and `γ' = β ∩ Q x⁻¹ α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub rep: usize,
    pub gamma: DartSet,
    pub gamma_dual: DartSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crossing {
    /// Number of nonempty components.
    pub number: usize,
    /// All components, one per double coset `P\G/Q`, empty ones included.
    pub components: Vec<Component>,
}

impl Crossing {
    pub fn nonempty(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| !c.gamma.is_empty())
    }
}

/// Intersection components of `α` with `β` and the crossing number.
/// Ideal edges at different vertices never cross.
pub fn crossing(g: &GGraph, alpha: &IdealEdge, beta: &IdealEdge) -> Crossing {
    if alpha.vertex != beta.vertex {
        return Crossing { number: 0, components: Vec::new() };
    }
    let grp = g.group();
    let (p, q) = (alpha.stab, beta.stab);
    let components: Vec<Component> = grp
        .double_coset_reps(p, q)
        .into_iter()
        .map(|x| {
            let xb = g.act_set(x, beta.edges);
            let xinv_a = g.act_set(grp.inv(x), alpha.edges);
            Component {
                rep: x,
                gamma: alpha.edges.intersect(g.saturate_by(p, xb)),
                gamma_dual: beta.edges.intersect(g.saturate_by(q, xinv_a)),
            }
        })
        .collect();
    let number = components.iter().filter(|c| !c.gamma.is_empty()).count();
    Crossing { number, components }
}
