//! Ideal forests, the star subcomplexes `S(C)`, their reduced homology, and
//! the poset retractions taking `S(R)` down to a single forest.
//!
//! Forests are bitmasks over the list of ideal edge orbit representatives,
//! so an instance may have at most 128 orbits.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ggraph::{DartSet, GGraph, InvariantForest};
use crate::ideal::{canonical, compatible, crossing, enumerate_ideal_edges, inverse, pre_compatible, IdealEdge};
use crate::marking::MarkedGGraph;
use crate::moves::{blow_up, is_reductive_set, max_pair_by, RankedMove};
use crate::norms::{NormKind, Norms};

pub type Forest = u128;

/// Cap on the faces of an order complex, to keep homology at desk scale.
pub const MAX_FACES: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    R,
    C0,
    C0p,
    C1,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::R => "R",
            Family::C0 => "C0",
            Family::C0p => "C0p",
            Family::C1 => "C1",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" => Ok(Family::R),
            "C0" => Ok(Family::C0),
            "C0p" | "C0'" => Ok(Family::C0p),
            "C1" => Ok(Family::C1),
            _ => Err(Error::Unknown { kind: "family", name: s.to_string() }),
        }
    }
}

fn bit(i: usize) -> Forest {
    1u128 << i
}

fn members(f: Forest) -> impl Iterator<Item = usize> {
    (0..128).filter(move |&i| f >> i & 1 == 1)
}

fn is_sub(a: Forest, b: Forest) -> bool {
    a & !b == 0
}

/// Orbit data of a reduced marked graph, with tot-reductivity and the
/// maximal pair.
pub struct Star<'a> {
    ns: Norms<'a>,
    orbits: Vec<IdealEdge>,
    index: HashMap<u128, usize>,
    reductive: Forest,
    inverse: Vec<Option<usize>>,
    compat: Vec<Forest>,
    precompat: Vec<Forest>,
    max: Option<RankedMove>,
}

impl<'a> Star<'a> {
    pub fn new(m: &'a MarkedGGraph, horizon: usize) -> Result<Self> {
        let g = m.graph();
        if !g.is_reduced() {
            return Err(Error::Hypothesis("marked graph is not reduced".into()));
        }
        let orbits = enumerate_ideal_edges(g);
        if orbits.len() > 128 {
            return Err(Error::Budget(orbits.len()));
        }
        let ns = Norms::new(m, horizon)?;
        let index: HashMap<u128, usize> = orbits.iter().enumerate().map(|(i, a)| (a.edges.0, i)).collect();
        let reductive = orbits
            .iter()
            .enumerate()
            .filter(|(_, a)| is_reductive_set(&ns, a.edges, NormKind::Tot))
            .fold(0, |f, (i, _)| f | bit(i));
        let inverse = orbits
            .iter()
            .map(|a| inverse(g, a).map(|inv| index[&canonical(g, &inv).edges.0]))
            .collect();
        let n = orbits.len();
        let mut compat = vec![0; n];
        let mut precompat = vec![0; n];
        for i in 0..n {
            for j in 0..n {
                if compatible(g, &orbits[i], &orbits[j]) {
                    compat[i] |= bit(j);
                }
                if pre_compatible(g, &orbits[i], &orbits[j]) {
                    precompat[i] |= bit(j);
                }
            }
        }
        let max = match max_pair_by(&ns, NormKind::Tot) {
            Ok(x) => x,
            Err(Error::Indeterminate { .. }) if reductive == 0 => None,
            Err(e) => return Err(e),
        };
        Ok(Star { ns, orbits, index, reductive, inverse, compat, precompat, max })
    }

    pub fn marked(&self) -> &MarkedGGraph {
        self.ns.marked()
    }

    fn graph(&self) -> &GGraph {
        self.ns.marked().graph()
    }

    pub fn orbits(&self) -> &[IdealEdge] {
        &self.orbits
    }

    pub fn all(&self) -> Forest {
        if self.orbits.len() == 128 {
            u128::MAX
        } else {
            bit(self.orbits.len()) - 1
        }
    }

    pub fn maximal_pair(&self) -> Option<&RankedMove> {
        self.max.as_ref()
    }

    pub fn inverse_of(&self, i: usize) -> Option<usize> {
        self.inverse[i]
    }

    pub fn is_compatible(&self, i: usize, j: usize) -> bool {
        self.compat[i] >> j & 1 == 1
    }

    /// Orbit index of an ideal edge given by any member set.
    pub fn orbit_of(&self, s: DartSet) -> Option<usize> {
        let g = self.graph();
        let a = IdealEdge::new(g, s).ok()?;
        self.index.get(&canonical(g, &a).edges.0).copied()
    }

    fn at_base(&self, i: usize) -> bool {
        self.orbits[i].vertex == self.graph().basepoint()
    }

    pub fn orbit_name(&self, i: usize) -> String {
        self.orbits[i].display(self.graph())
    }

    pub fn forest_name(&self, f: Forest) -> String {
        let parts: Vec<String> = members(f).map(|i| self.orbit_name(i)).collect();
        format!("{{{}}}", parts.join(" "))
    }

    fn mu(&self) -> Result<(usize, &RankedMove)> {
        let best = self
            .max
            .as_ref()
            .ok_or_else(|| Error::Hypothesis("no maximally reductive ideal edge".into()))?;
        let i = self.orbit_of(best.mv.alpha.edges).expect("maximal edge is enumerated");
        Ok((i, best))
    }

    /// `|α ∩ Gμ|` for an orbit.
    fn meets_mu_orbit(&self, i: usize, mu: &IdealEdge) -> usize {
        self.orbits[i].edges.intersect(self.graph().saturate(mu.edges)).len()
    }

    /// The translate of orbit `i` containing the dart, if any.
    fn translate_containing(&self, i: usize, d: crate::ggraph::Dart) -> Option<IdealEdge> {
        let g = self.graph();
        (0..g.group().order())
            .map(|x| self.orbits[i].translate(g, x))
            .find(|a| a.edges.contains(d))
    }

    pub fn family(&self, which: Family) -> Result<Forest> {
        let r = self.reductive;
        if which == Family::R {
            return Ok(r);
        }
        let (mu_i, best) = self.mu()?;
        let mu = &best.mv.alpha;
        let g = self.graph();
        let c0 = members(r).filter(|&i| self.is_compatible(i, mu_i)).fold(0, |f, i| f | bit(i));
        if which == Family::C0 {
            return Ok(c0);
        }
        let c0p = members(r)
            .filter(|&i| self.orbits[i].stab == g.vertex_stabilizer(self.orbits[i].vertex))
            .fold(c0, |f, i| f | bit(i));
        if which == Family::C0p {
            return Ok(c0p);
        }
        let m_orbit = g.orbit(best.mv.collapse).members;
        Ok(members(r)
            .filter(|&i| {
                !g.saturate(self.orbits[i].edges).is_disjoint(m_orbit) && crossing(g, &self.orbits[i], mu).number == 1
            })
            .fold(c0p, |f, i| f | bit(i)))
    }

    /// `C^±`: adjoin inverses of invertible members away from the basepoint.
    pub fn plus_closure(&self, c: Forest) -> Forest {
        members(c)
            .filter(|&i| !self.at_base(i))
            .filter_map(|i| self.inverse[i])
            .fold(c, |f, j| f | bit(j))
    }

    fn pair_ok(&self, i: usize, j: usize) -> bool {
        match (self.at_base(i), self.at_base(j)) {
            (true, true) => self.compat[i] >> j & 1 == 1,
            (false, false) => self.precompat[i] >> j & 1 == 1,
            _ => true,
        }
    }

    fn closed(&self, f: Forest) -> bool {
        members(f)
            .filter(|&i| !self.at_base(i))
            .all(|i| self.inverse[i].is_none_or(|j| f >> j & 1 == 1))
    }

    pub fn is_forest(&self, f: Forest) -> bool {
        f != 0
            && members(f).all(|i| members(f).filter(|&j| j > i).all(|j| self.pair_ok(i, j)))
            && self.closed(f)
    }

    /// Every nonempty ideal forest with orbits in `c`, by size then members.
    pub fn forests(&self, c: Forest) -> Vec<Forest> {
        let items: Vec<usize> = members(c).collect();
        let mut out = Vec::new();
        self.extend(&items, 0, 0, &mut out);
        out.sort_by_key(|&f| (f.count_ones(), members(f).collect::<Vec<_>>()));
        out
    }

    fn extend(&self, items: &[usize], from: usize, cur: Forest, out: &mut Vec<Forest>) {
        if cur != 0 && self.closed(cur) {
            out.push(cur);
        }
        for (k, &i) in items.iter().enumerate().skip(from) {
            if members(cur).all(|j| self.pair_ok(i, j)) {
                self.extend(items, k + 1, cur | bit(i), out);
            }
        }
    }

    /// The order complex of the forest poset of `S(C)`.
    pub fn star_complex(&self, c: Forest) -> Result<StarComplex> {
        let forests = self.forests(c);
        let complex = SimplicialComplex::order_complex(&forests)?;
        Ok(StarComplex { forests, complex })
    }

    /// Hasse diagram of the forest poset of `S(C)` in DOT.
    pub fn hasse_dot(&self, c: Forest) -> String {
        let forests = self.forests(c);
        let mut out = String::from("digraph forests {\n  rankdir=BT;\n");
        for (i, &f) in forests.iter().enumerate() {
            out.push_str(&format!("  n{i} [label=\"{}\"];\n", self.forest_name(f).replace('"', "'")));
        }
        for (i, &a) in forests.iter().enumerate() {
            for (j, &b) in forests.iter().enumerate() {
                let covers = a != b
                    && is_sub(a, b)
                    && !forests.iter().any(|&x| x != a && x != b && is_sub(a, x) && is_sub(x, b));
                if covers {
                    out.push_str(&format!("  n{i} -> n{j};\n"));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A finite simplicial complex stored as faces grouped by dimension, each
/// face a sorted vertex list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    pub vertex_count: usize,
    pub faces: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Downward closure of the given faces.
    pub fn from_maximal(vertex_count: usize, maximal: &[Vec<usize>]) -> Self {
        let mut by_dim: Vec<HashSet<Vec<usize>>> = Vec::new();
        for face in maximal {
            let mut f = face.clone();
            f.sort_unstable();
            f.dedup();
            let k = f.len();
            for mask in 1u64..(1u64 << k) {
                let sub: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| f[i]).collect();
                let d = sub.len() - 1;
                if by_dim.len() <= d {
                    by_dim.resize_with(d + 1, HashSet::new);
                }
                by_dim[d].insert(sub);
            }
        }
        let faces = by_dim
            .into_iter()
            .map(|s| {
                let mut v: Vec<Vec<usize>> = s.into_iter().collect();
                v.sort();
                v
            })
            .collect();
        SimplicialComplex { vertex_count, faces }
    }

    /// Chains of a family of sets under inclusion.
    pub fn order_complex(elements: &[Forest]) -> Result<Self> {
        let n = elements.len();
        let above: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && is_sub(elements[i], elements[j]))
                    .collect()
            })
            .collect();
        let mut faces: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut total = 0usize;
        let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        while let Some(chain) = stack.pop() {
            total += 1;
            if total > MAX_FACES {
                return Err(Error::Budget(MAX_FACES));
            }
            let top = *chain.last().expect("nonempty chain");
            for &j in &above[top] {
                let mut next = chain.clone();
                next.push(j);
                stack.push(next);
            }
            let d = chain.len() - 1;
            if faces.len() <= d {
                faces.resize_with(d + 1, Vec::new);
            }
            let mut face = chain;
            face.sort_unstable();
            faces[d].push(face);
        }
        for level in &mut faces {
            level.sort();
        }
        Ok(SimplicialComplex { vertex_count: n, faces })
    }

    pub fn dimension(&self) -> Option<usize> {
        self.faces.len().checked_sub(1)
    }

    pub fn face_count(&self) -> usize {
        self.faces.iter().map(Vec::len).sum()
    }

    /// Faces contained in no other face.
    pub fn maximal_faces(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for (d, level) in self.faces.iter().enumerate() {
            let above: HashSet<Vec<usize>> = match self.faces.get(d + 1) {
                Some(up) => up
                    .iter()
                    .flat_map(|f| (0..f.len()).map(move |k| [&f[..k], &f[k + 1..]].concat()))
                    .collect(),
                None => HashSet::new(),
            };
            out.extend(level.iter().filter(|f| !above.contains(*f)).cloned());
        }
        out
    }
}

/// Rank of a sparse integer matrix by exact fraction-free elimination.
/// Rows are reduced against pivots keyed by leading column and divided by
/// their content, which keeps boundary-matrix entries small.
fn rank(rows: Vec<Vec<(usize, i128)>>) -> Result<usize> {
    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let overflow = || Error::Inconsistent("integer overflow in boundary elimination".into());
    let mut pivots: HashMap<usize, Vec<(usize, i128)>> = HashMap::new();
    let mut r = 0;
    for mut row in rows {
        row.sort_unstable();
        row.retain(|&(_, v)| v != 0);
        while let Some(&(lead, a)) = row.first() {
            let Some(p) = pivots.get(&lead) else {
                pivots.insert(lead, row);
                r += 1;
                break;
            };
            let b = p[0].1;
            // row := b·row − a·pivot
            let mut merged: BTreeMap<usize, i128> = BTreeMap::new();
            for &(c, v) in &row {
                *merged.entry(c).or_default() = v.checked_mul(b).ok_or_else(overflow)?;
            }
            for &(c, v) in p {
                let e = merged.entry(c).or_default();
                *e = e.checked_sub(v.checked_mul(a).ok_or_else(overflow)?).ok_or_else(overflow)?;
            }
            row = merged.into_iter().filter(|&(_, v)| v != 0).collect();
            let content = row.iter().fold(0, |g, &(_, v)| gcd(g, v));
            if content > 1 {
                for e in &mut row {
                    e.1 /= content;
                }
            }
        }
    }
    Ok(r)
}

/// Reduced Betti numbers over the rationals, one per dimension. An empty
/// complex yields an empty vector.
pub fn reduced_homology(k: &SimplicialComplex) -> Result<Vec<usize>> {
    let dims: Vec<usize> = k.faces.iter().map(Vec::len).collect();
    if dims.first().copied().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    // ranks[d] = rank of the boundary C_d → C_{d-1}; the augmentation for d = 0.
    let mut ranks = vec![1usize];
    for d in 1..k.faces.len() {
        let index: HashMap<&Vec<usize>, usize> = k.faces[d - 1].iter().enumerate().map(|(i, f)| (f, i)).collect();
        let rows = k.faces[d]
            .iter()
            .map(|f| {
                (0..f.len())
                    .map(|j| {
                        let facet = [&f[..j], &f[j + 1..]].concat();
                        let sign = if j % 2 == 0 { 1 } else { -1 };
                        (index[&facet], sign)
                    })
                    .collect()
            })
            .collect();
        ranks.push(rank(rows)?);
    }
    ranks.push(0);
    Ok((0..dims.len()).map(|d| dims[d] - ranks[d] - ranks[d + 1]).collect())
}

#[derive(Clone, Debug)]
pub struct StarComplex {
    pub forests: Vec<Forest>,
    pub complex: SimplicialComplex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// Replace a crossing edge outside `C1` by a shrunken edge.
    Shrink,
    /// Replace an edge of `C1 − C0′` by a pushed edge.
    Push,
    /// Replace an edge whose inverse is compatible with `μ` by that inverse.
    Invert,
    /// Replace an edge, or an edge and its inverse, by a pushed edge.
    PushPair,
    /// Replace the conjugating edge `E_* − {m}` by `μ⁻¹`.
    Conjugator,
    /// Add `μ` to every forest, then drop everything else.
    Cone,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepKind::Shrink => "shrink",
            StepKind::Push => "push",
            StepKind::Invert => "invert",
            StepKind::PushPair => "push-pair",
            StepKind::Conjugator => "conjugator",
            StepKind::Cone => "cone",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct RetractionStep {
    pub kind: StepKind,
    pub removed: Vec<usize>,
    pub added: usize,
    pub forests_before: usize,
    pub forests_after: usize,
    /// Number of `(β, α, α₀)` compatibility transfers verified.
    pub transfers: usize,
    pub betti_after: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Retracted to the single forest shown.
    Point(Forest),
    /// No reductive ideal edges: `S(R)` is empty.
    Empty,
    /// The maximal pair is away from the basepoint.
    OutOfScope(String),
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub mu: Option<usize>,
    pub families: Vec<(Family, Forest)>,
    pub case: Option<&'static str>,
    pub steps: Vec<RetractionStep>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn render(&self, s: &Star) -> String {
        let mut out = String::new();
        if let Some(mu) = self.mu {
            let best = s.maximal_pair().expect("maximal pair");
            out.push_str(&format!(
                "maximal pair: ({}, {})\n",
                s.orbit_name(mu),
                s.graph().dart_name(best.mv.collapse)
            ));
        }
        for (fam, c) in &self.families {
            out.push_str(&format!("{} = {}\n", fam.name(), s.forest_name(*c)));
        }
        if let Some(case) = self.case {
            out.push_str(&format!("case: {case}\n"));
        }
        for (k, st) in self.steps.iter().enumerate() {
            let removed: Vec<String> = st.removed.iter().map(|&i| s.orbit_name(i)).collect();
            out.push_str(&format!(
                "step {}: {} remove [{}] add {} forests {} -> {} transfers={}",
                k + 1,
                st.kind,
                removed.join(" "),
                s.orbit_name(st.added),
                st.forests_before,
                st.forests_after,
                st.transfers
            ));
            if let Some(b) = &st.betti_after {
                out.push_str(&format!(" betti={b:?}"));
            }
            out.push('\n');
        }
        match &self.outcome {
            Outcome::Point(f) => out.push_str(&format!("result: point {}\n", s.forest_name(*f))),
            Outcome::Empty => out.push_str("result: S(R) is empty\n"),
            Outcome::OutOfScope(why) => out.push_str(&format!("result: out of scope ({why})\n")),
        }
        out
    }
}

fn violation(msg: String) -> Error {
    Error::Violation(msg)
}

/// Checks a poset self-map of `domain` landing in `codomain`: order
/// preserving and comparable to the identity in the given direction.
fn check_poset_map(
    s: &Star,
    domain: &[Forest],
    codomain: &HashSet<Forest>,
    map: impl Fn(Forest) -> Forest,
    increasing: bool,
    label: &str,
) -> Result<Vec<Forest>> {
    let images: Vec<Forest> = domain.iter().map(|&f| map(f)).collect();
    for (&f, &im) in domain.iter().zip(&images) {
        if !codomain.contains(&im) {
            return Err(violation(format!(
                "{label}: {} maps to {}, which is not a forest of the complex",
                s.forest_name(f),
                s.forest_name(im)
            )));
        }
        let comparable = if increasing { is_sub(f, im) } else { is_sub(im, f) };
        if !comparable {
            return Err(violation(format!(
                "{label}: {} and its image {} are not comparable",
                s.forest_name(f),
                s.forest_name(im)
            )));
        }
    }
    for (i, &a) in domain.iter().enumerate() {
        for (j, &b) in domain.iter().enumerate() {
            if is_sub(a, b) && !is_sub(images[i], images[j]) {
                return Err(violation(format!(
                    "{label}: not order preserving on {} ⊆ {}",
                    s.forest_name(a),
                    s.forest_name(b)
                )));
            }
        }
    }
    let mut out: Vec<Forest> = images.into_iter().collect::<HashSet<_>>().into_iter().collect();
    out.sort_by_key(|&f| (f.count_ones(), f));
    Ok(out)
}

/// Options for [`run_retractions`].
#[derive(Clone, Copy, Debug, Default)]
pub struct RetractOptions {
    /// Compute reduced homology of `S(C)` after every step.
    pub betti_each_step: bool,
}

struct Runner<'s, 'a> {
    s: &'s Star<'a>,
    opts: RetractOptions,
    steps: Vec<RetractionStep>,
}

impl Runner<'_, '_> {
    /// `f(Φ) = Φ ∪ {α₀}` when `Φ` meets `remove`, then `g(Ψ) = Ψ − remove`;
    /// returns the shrunken family.
    fn substitute(&mut self, kind: StepKind, c: Forest, remove: Forest, add: usize) -> Result<Forest> {
        let s = self.s;
        if c >> add & 1 == 0 || remove >> add & 1 == 1 || !is_sub(remove, c) {
            return Err(violation(format!(
                "{kind}: replacement {} is not available for {}",
                s.orbit_name(add),
                s.forest_name(remove)
            )));
        }
        let before = s.forests(c);
        let set: HashSet<Forest> = before.iter().copied().collect();
        let f_image = check_poset_map(
            s,
            &before,
            &set,
            |f| if f & remove != 0 { f | bit(add) } else { f },
            true,
            &format!("{kind} f"),
        )?;
        let g_codomain: HashSet<Forest> = f_image.iter().copied().collect();
        let g_image = check_poset_map(s, &f_image, &g_codomain, |f| f & !remove, false, &format!("{kind} g"))?;
        let next = c & !remove;
        let after = s.forests(next);
        let expected: HashSet<Forest> = after.iter().copied().collect();
        if g_image.iter().copied().collect::<HashSet<_>>() != expected {
            return Err(violation(format!(
                "{kind}: retraction image differs from S(C − {})",
                s.forest_name(remove)
            )));
        }
        self.record(kind, remove, add, before.len(), after.len(), 0, next)?;
        Ok(next)
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        kind: StepKind,
        removed: Forest,
        added: usize,
        before: usize,
        after: usize,
        transfers: usize,
        c: Forest,
    ) -> Result<()> {
        let betti_after = if self.opts.betti_each_step {
            Some(reduced_homology(&self.s.star_complex(c)?.complex)?)
        } else {
            None
        };
        self.steps.push(RetractionStep {
            kind,
            removed: members(removed).collect(),
            added,
            forests_before: before,
            forests_after: after,
            transfers,
            betti_after,
        });
        Ok(())
    }

    /// Every `β ∈ C` compatible with `α` is compatible with `α₀`.
    fn transfer(&mut self, kind: StepKind, c: Forest, alpha: usize, alpha0: usize) -> Result<()> {
        let s = self.s;
        let mut n = 0;
        for b in members(c) {
            if s.is_compatible(b, alpha) {
                n += 1;
                if !s.is_compatible(b, alpha0) {
                    return Err(violation(format!(
                        "{kind}: {} is compatible with {} but not with {}",
                        s.orbit_name(b),
                        s.orbit_name(alpha),
                        s.orbit_name(alpha0)
                    )));
                }
            }
        }
        if let Some(last) = self.steps.last_mut() {
            last.transfers = n;
        }
        Ok(())
    }
}

/// Picks the extreme candidates by a score, then those extreme under orbit
/// containment, then the first in orbit order.
fn select(s: &Star, cands: &[usize], score: impl Fn(usize) -> usize, largest: bool) -> Option<usize> {
    let g = s.graph();
    let best = if largest {
        cands.iter().map(|&i| score(i)).max()?
    } else {
        cands.iter().map(|&i| score(i)).min()?
    };
    let tied: Vec<usize> = cands.iter().copied().filter(|&i| score(i) == best).collect();
    let sat = |i: usize| g.saturate(s.orbits[i].edges);
    tied.iter()
        .copied()
        .find(|&i| {
            !tied.iter().any(|&j| {
                j != i
                    && if largest {
                        sat(i).is_subset(sat(j)) && sat(i) != sat(j)
                    } else {
                        sat(j).is_subset(sat(i)) && sat(i) != sat(j)
                    }
            })
        })
}

/// When no remaining edge contains `m`, replaces a largest edge whose
/// inverse is compatible with `μ` by that inverse.
fn invert_fallback(runner: &mut Runner, c: Forest, cands: &[usize], mu_i: usize) -> Result<Forest> {
    let s = runner.s;
    let inv_ok = |i: usize| s.inverse[i].filter(|&j| c >> j & 1 == 1 && s.is_compatible(j, mu_i));
    let usable: Vec<usize> = cands.iter().copied().filter(|&i| inv_ok(i).is_some()).collect();
    let Some(ai) = select(s, &usable, |i| s.orbits[i].edges.len(), true) else {
        let rest: Forest = cands.iter().fold(0, |f, &i| f | bit(i));
        return Err(violation(format!(
            "no edge of {} contains m or has an inverse compatible with μ",
            s.forest_name(rest)
        )));
    };
    let inv = inv_ok(ai).expect("usable");
    let next = runner.substitute(StepKind::Invert, c, bit(ai), inv)?;
    runner.transfer(StepKind::Invert, c, ai, inv)?;
    Ok(next)
}

/// Retracts `S(R)` through `S(C1)`, `S(C0′)` and `S(C0)` to a single forest,
/// verifying every poset map and compatibility transfer along the way.
pub fn run_retractions(s: &Star, opts: RetractOptions) -> Result<Trace> {
    let g = s.graph();
    let base = g.basepoint();
    let r = s.reductive;
    let mut trace = Trace { mu: None, families: vec![(Family::R, r)], case: None, steps: Vec::new(), outcome: Outcome::Empty };
    if r == 0 {
        return Ok(trace);
    }
    let (mu_i, best) = s.mu()?;
    let mu = best.mv.alpha;
    let m = best.mv.collapse;
    trace.mu = Some(mu_i);
    if mu.vertex != base {
        trace.outcome = Outcome::OutOfScope("maximal pair is not at the basepoint".into());
        return Ok(trace);
    }
    let c0 = s.family(Family::C0)?;
    let c0p = s.family(Family::C0p)?;
    let c1 = s.family(Family::C1)?;
    trace.families.extend([(Family::C1, c1), (Family::C0p, c0p), (Family::C0, c0)]);
    let e_star = g.incoming(base);
    let conjugator = |i: usize| {
        let a = &s.orbits[i];
        a.vertex == base && a.stab == g.group().whole() && s.inverse[i].is_none() && e_star.minus(a.edges).len() == 1
    };
    let mut runner = Runner { s, opts, steps: Vec::new() };
    let finish = |runner: Runner, mut trace: Trace, c: Forest| -> Result<Trace> {
        let _ = c;
        trace.steps = runner.steps;
        trace.outcome = Outcome::Point(bit(mu_i));
        Ok(trace)
    };

    // (μ, m) = (γ, c): the conjugating move is the only reductive one.
    if conjugator(mu_i) && e_star.minus(mu.edges) == DartSet::single(m.rev()) {
        if r != bit(mu_i) {
            return Err(violation(format!(
                "maximal edge {} is the conjugating edge but R = {}",
                s.orbit_name(mu_i),
                s.forest_name(r)
            )));
        }
        return finish(runner, trace, r);
    }

    // S(R) to S(C1): shrink.
    let mut c = r;
    loop {
        let cands: Vec<usize> = members(c & !c1).collect();
        let Some(ai) = select(s, &cands, |i| s.meets_mu_orbit(i, &mu), false) else { break };
        let alpha = s.orbits[ai];
        let cr = crossing(g, &alpha, &mu);
        let m_orbit = g.orbit(m).members;
        let free: Vec<DartSet> = cr.nonempty().map(|c| c.gamma).filter(|gm| gm.is_disjoint(m_orbit)).collect();
        let rest = free.iter().fold(alpha.edges, |a, gm| a.minus(*gm));
        let pick = std::iter::once(rest)
            .chain(free.iter().copied())
            .filter(|&set| set != alpha.edges && is_reductive_set(&s.ns, set, NormKind::Tot))
            .filter_map(|set| s.orbit_of(set))
            .find(|&j| s.is_compatible(j, mu_i));
        let Some(a0) = pick else {
            return Err(violation(format!(
                "shrink: no reductive edge compatible with μ inside {}",
                s.orbit_name(ai)
            )));
        };
        let next = runner.substitute(StepKind::Shrink, c, bit(ai), a0)?;
        runner.transfer(StepKind::Shrink, c, ai, a0)?;
        c = next;
    }
    if c != c1 {
        return Err(violation(format!("shrink stage ended at {} instead of C1", s.forest_name(c))));
    }

    // S(C1) to S(C0′): push.
    loop {
        let cands: Vec<usize> = members(c & !c0p).collect();
        if cands.is_empty() {
            break;
        }
        let with_m: Vec<usize> = cands.iter().copied().filter(|&i| s.translate_containing(i, m).is_some()).collect();
        let Some(ai) = select(s, &with_m, |i| s.meets_mu_orbit(i, &mu), false) else {
            return Err(violation(format!("push: no edge of {} contains m", s.forest_name(c & !c0p))));
        };
        let alpha = s.translate_containing(ai, m).expect("contains m");
        let p_mu = g.saturate_by(alpha.stab, mu.edges);
        let red = |set: DartSet| is_reductive_set(&s.ns, set, NormKind::Tot);
        let first = red(mu.edges.minus(alpha.edges)) && red(alpha.edges.minus(mu.edges));
        let second = red(alpha.edges.union(p_mu)) && red(alpha.edges.intersect(mu.edges));
        let a0_set = if first {
            alpha.edges.minus(mu.edges)
        } else if second {
            alpha.edges.intersect(mu.edges)
        } else {
            return Err(violation(format!("push: neither pushing option holds for {}", s.orbit_name(ai))));
        };
        let a0 = s
            .orbit_of(a0_set)
            .filter(|&j| c0 >> j & 1 == 1)
            .ok_or_else(|| violation(format!("push: {} is not in C0", g.set_name(a0_set))))?;
        let next = runner.substitute(StepKind::Push, c, bit(ai), a0)?;
        runner.transfer(StepKind::Push, c, ai, a0)?;
        c = next;
    }
    if c != c0p {
        return Err(violation(format!("push stage ended at {} instead of C0'", s.forest_name(c))));
    }

    // S(C0′) to S(C0).
    let gammas: Vec<usize> = members(r).filter(|&i| conjugator(i)).collect();
    if gammas.len() > 1 {
        return Err(violation(format!("{} reductive conjugating edges", gammas.len())));
    }
    let gamma = gammas.first().copied();
    let mu_inv = s.inverse[mu_i];
    let red = |set: DartSet| is_reductive_set(&s.ns, set, NormKind::Tot);
    let in_c0 = |set: DartSet| s.orbit_of(set).filter(|&j| c0 >> j & 1 == 1);
    if let Some(mu_inv) = mu_inv {
        let crossing_gamma = gamma.filter(|&gi| !s.is_compatible(gi, mu_i));
        trace.case = Some(if crossing_gamma.is_some() {
            "mu invertible, conjugating edge not compatible"
        } else {
            "mu invertible, conjugating edge compatible or absent"
        });
        let keep = c0 | crossing_gamma.map_or(0, bit);
        loop {
            let cands: Vec<usize> = members(c & !keep).collect();
            if cands.is_empty() {
                break;
            }
            let with_m: Vec<usize> =
                cands.iter().copied().filter(|&i| s.translate_containing(i, m).is_some()).collect();
            let score = |i: usize| {
                let a = s.translate_containing(i, m).expect("contains m");
                a.edges.intersect(mu.edges).len()
            };
            let Some(ai) = select(s, &with_m, score, true) else {
                c = invert_fallback(&mut runner, c, &cands, mu_i)?;
                continue;
            };
            let alpha = s.translate_containing(ai, m).expect("contains m");
            let ai_inv = s.inverse[ai];
            if let Some(inv) = ai_inv.filter(|&j| s.is_compatible(j, mu_i)) {
                let next = runner.substitute(StepKind::Invert, c, bit(ai), inv)?;
                runner.transfer(StepKind::Invert, c, ai, inv)?;
                c = next;
                continue;
            }
            let Some(ai_inv) = ai_inv else {
                return Err(violation(format!("{} is not invertible", s.orbit_name(ai))));
            };
            let pair = bit(ai) | (bit(ai_inv) & c);
            let minus = mu.edges.minus(alpha.edges);
            let union = alpha.edges.union(mu.edges);
            if let Some(a0) = red(minus).then(|| in_c0(minus)).flatten() {
                c = runner.substitute(StepKind::PushPair, c, pair, a0)?;
            } else if let Some(a0) = red(union).then(|| in_c0(union)).flatten() {
                let a0_inv = s.inverse[a0]
                    .filter(|&j| c0 >> j & 1 == 1)
                    .ok_or_else(|| violation(format!("{} has no inverse in C0", s.orbit_name(a0))))?;
                if c >> ai_inv & 1 == 1 {
                    c = runner.substitute(StepKind::PushPair, c, bit(ai_inv), a0_inv)?;
                }
                c = runner.substitute(StepKind::PushPair, c, bit(ai), a0)?;
            } else {
                return Err(violation(format!("push-pair: no reductive replacement for {}", s.orbit_name(ai))));
            }
        }
        if let Some(gi) = crossing_gamma {
            if c >> gi & 1 == 1 {
                c = runner.substitute(StepKind::Conjugator, c, bit(gi), mu_inv)?;
                runner.transfer(StepKind::Conjugator, c | bit(gi), gi, mu_inv)?;
            }
        }
    } else {
        trace.case = Some("mu not invertible");
        loop {
            let cands: Vec<usize> = members(c & !c0).collect();
            if cands.is_empty() {
                break;
            }
            let with_m: Vec<usize> =
                cands.iter().copied().filter(|&i| s.translate_containing(i, m).is_some()).collect();
            let Some(ai) = select(s, &with_m, |i| s.meets_mu_orbit(i, &mu), true) else {
                c = invert_fallback(&mut runner, c, &cands, mu_i)?;
                continue;
            };
            let alpha = s.translate_containing(ai, m).expect("contains m");
            let union = alpha.edges.union(g.saturate(mu.edges));
            let a0 = red(union)
                .then(|| in_c0(union))
                .flatten()
                .ok_or_else(|| violation(format!("{} is not a reductive edge of C0", g.set_name(union))))?;
            if let Some(ai_inv) = s.inverse[ai].filter(|&j| c >> j & 1 == 1) {
                let a0_inv = s.inverse[a0]
                    .filter(|&j| c0 >> j & 1 == 1)
                    .ok_or_else(|| violation(format!("{} has no inverse in C0", s.orbit_name(a0))))?;
                c = runner.substitute(StepKind::PushPair, c, bit(ai_inv), a0_inv)?;
            }
            c = runner.substitute(StepKind::PushPair, c, bit(ai), a0)?;
        }
    }
    if c != c0 {
        return Err(violation(format!("stage ended at {} instead of C0", s.forest_name(c))));
    }

    // S(C0) to a point: add μ everywhere, then keep only μ.
    let before = s.forests(c);
    let set: HashSet<Forest> = before.iter().copied().collect();
    let with_mu = check_poset_map(s, &before, &set, |f| f | bit(mu_i), true, "cone f")?;
    let cod: HashSet<Forest> = with_mu.iter().copied().collect();
    let point = check_poset_map(s, &with_mu, &cod, |_| bit(mu_i), false, "cone g")?;
    if point != vec![bit(mu_i)] {
        return Err(violation("cone does not end at {μ}".into()));
    }
    runner.record(StepKind::Cone, c & !bit(mu_i), mu_i, before.len(), 1, 0, bit(mu_i))?;
    if let Some(last) = runner.steps.last_mut() {
        last.betti_after = last.betti_after.as_ref().map(|_| Vec::from([0]));
    }
    finish(runner, trace, c)
}

/// Blow-up of a whole forest, orbit by orbit. Returns the marked graph and,
/// per orbit, the names of its new edges in the result.
pub fn blow_up_forest(s: &Star, f: Forest) -> Result<(MarkedGGraph, Vec<(usize, Vec<String>)>)> {
    let mut cur = s.marked().clone();
    let mut pending: Vec<(usize, DartSet)> = members(f).map(|i| (i, s.orbits[i].edges)).collect();
    let mut done: Vec<(usize, Vec<String>)> = Vec::new();
    while !pending.is_empty() {
        let (i, set) = pending.remove(0);
        let g = cur.graph();
        let alpha = IdealEdge::new(g, set)?;
        let bu = blow_up(&cur, &alpha)?;
        let ng = bu.marked.graph();
        done.push((i, bu.new_edges.iter().map(|&k| ng.edge_names()[k].clone()).collect()));
        let v = alpha.vertex;
        let mut next = Vec::new();
        for (j, b) in pending {
            // Carry β across the blow-up of each translate t_k.
            let mut out = b;
            let mut merged_with = None;
            for (k, &t) in bu.translates.iter().enumerate() {
                let f_k = crate::ggraph::Dart::new(bu.new_edges[k], false);
                if b.is_disjoint(t) || b.is_subset(t) {
                    continue;
                }
                if t.is_subset(b) {
                    out = out.minus(t).union(DartSet::single(f_k));
                } else if g.incoming(g.term(t.first().expect("nonempty"))).minus(t).is_subset(b) {
                    out = b.intersect(t).union(DartSet::single(f_k.rev()));
                    if out.len() == 1 {
                        merged_with = Some(k);
                    }
                    break;
                } else {
                    return Err(violation(format!(
                        "forest blow-up: {} crosses {}",
                        g.set_name(b),
                        g.set_name(t)
                    )));
                }
            }
            let _ = v;
            if merged_with.is_some() {
                // β is the inverse of α: the same new edges, reversed.
                done.push((j, done.last().expect("just pushed").1.clone()));
            } else {
                next.push((j, out));
            }
        }
        pending = next;
        cur = bu.marked;
    }
    done.sort_by_key(|(i, _)| *i);
    Ok((cur, done))
}

/// Blow-ups of distinct forests are distinct, and collapsing the new edges
/// of `Φ − Ψ` in the blow-up of `Φ` gives the blow-up of `Ψ`. Returns the
/// number of forests and pairs checked.
pub fn poset_isomorphism_check(s: &Star, c: Forest) -> Result<(usize, usize)> {
    let forests = s.forests(c);
    let mut blown = Vec::with_capacity(forests.len());
    let mut seen: HashMap<String, Forest> = HashMap::new();
    for &f in &forests {
        let (m, names) = blow_up_forest(s, f)?;
        let key = m.canonical_form();
        if let Some(&other) = seen.get(&key) {
            return Err(violation(format!(
                "forests {} and {} blow up to the same marked graph",
                s.forest_name(other),
                s.forest_name(f)
            )));
        }
        seen.insert(key.clone(), f);
        blown.push((f, m, names, key));
    }
    let mut pairs = 0;
    for (phi, m, names, _) in &blown {
        for (psi, _, _, key) in &blown {
            if psi == phi || !is_sub(*psi, *phi) {
                continue;
            }
            let g = m.graph();
            let mut edges: Vec<usize> = names
                .iter()
                .filter(|(i, _)| psi >> i & 1 == 0)
                .flat_map(|(_, ns)| ns.iter())
                .map(|n| g.edge_names().iter().position(|e| e == n).expect("new edge"))
                .collect();
            edges.sort_unstable();
            edges.dedup();
            let collapsed = m.collapse(&InvariantForest { edges })?;
            if &collapsed.canonical_form() != key {
                return Err(violation(format!(
                    "collapsing {} − {} does not give the blow-up of the smaller forest",
                    s.forest_name(*phi),
                    s.forest_name(*psi)
                )));
            }
            pairs += 1;
        }
    }
    Ok((forests.len(), pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::moves::greedy_reduce;

    #[test]
    fn triangle_boundary_is_a_circle() {
        let k = SimplicialComplex::from_maximal(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(reduced_homology(&k).unwrap(), vec![0, 1]);
    }

    #[test]
    fn point_and_cone_are_acyclic() {
        let p = SimplicialComplex::from_maximal(1, &[vec![0]]);
        assert_eq!(reduced_homology(&p).unwrap(), vec![0]);
        let cone = SimplicialComplex::from_maximal(4, &[vec![0, 1, 3], vec![1, 2, 3], vec![0, 2, 3]]);
        assert_eq!(reduced_homology(&cone).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn two_points_and_sphere() {
        let two = SimplicialComplex::from_maximal(2, &[vec![0], vec![1]]);
        assert_eq!(reduced_homology(&two).unwrap(), vec![1]);
        let tetra: Vec<Vec<usize>> = (0..4).map(|i| (0..4).filter(|&j| j != i).collect()).collect();
        let sphere = SimplicialComplex::from_maximal(4, &tetra);
        assert_eq!(reduced_homology(&sphere).unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn order_complex_of_a_chain_is_a_simplex() {
        let k = SimplicialComplex::order_complex(&[0b1, 0b11]).unwrap();
        assert_eq!(k.faces.len(), 2);
        assert_eq!(k.maximal_faces(), vec![vec![0, 1]]);
    }

    #[test]
    fn forests_of_the_rose() {
        let m = fixtures::r2();
        let s = Star::new(&m, 3).unwrap();
        for i in 0..s.orbits().len() {
            if s.inverse_of(i).is_none() {
                assert_eq!(s.forests(bit(i)), vec![bit(i)]);
            }
        }
        // At the basepoint α and α⁻¹ are disjoint and compatible.
        let (i, j) = (0..s.orbits().len())
            .find_map(|i| s.inverse_of(i).map(|j| (i, j)))
            .expect("an invertible edge");
        assert_eq!(s.forests(bit(i) | bit(j)).len(), 3);
    }

    #[test]
    fn reduced_fixture_has_empty_r() {
        let m = fixtures::r2();
        let s = Star::new(&m, 3).unwrap();
        assert_eq!(s.family(Family::R).unwrap(), 0);
        let t = run_retractions(&s, RetractOptions::default()).unwrap();
        assert_eq!(t.outcome, Outcome::Empty);
    }

    #[test]
    fn r2w_retracts_to_a_point() {
        let m = fixtures::r2w();
        let s = Star::new(&m, 4).unwrap();
        let r = s.family(Family::R).unwrap();
        assert_ne!(r, 0);
        let c0 = s.family(Family::C0).unwrap();
        let c0p = s.family(Family::C0p).unwrap();
        let c1 = s.family(Family::C1).unwrap();
        assert!(is_sub(c0, c0p) && is_sub(c0p, c1) && is_sub(c1, r));
        let (mu, _) = s.mu().unwrap();
        assert!(c0 >> mu & 1 == 1);
        let star = s.star_complex(r).unwrap();
        assert!(reduced_homology(&star.complex).unwrap().iter().all(|&b| b == 0));
        let t = run_retractions(&s, RetractOptions { betti_each_step: true }).unwrap();
        assert_eq!(t.outcome, Outcome::Point(bit(mu)));
        for st in &t.steps {
            assert!(st.betti_after.as_ref().unwrap().iter().all(|&b| b == 0));
        }
        // Reduction leaves nothing reductive.
        let red = greedy_reduce(&m, 4, 500).unwrap();
        let s2 = Star::new(&red.result, 4).unwrap();
        assert_eq!(s2.family(Family::R).unwrap(), 0);
    }

    #[test]
    fn forest_blow_ups_match_the_poset() {
        let mut checked = 0;
        for (name, m) in fixtures::all() {
            if !m.graph().is_reduced() {
                continue;
            }
            let s = Star::new(&m, 3).unwrap();
            let all = s.all();
            if s.forests(all).len() > 30 {
                continue;
            }
            let (n, _) = poset_isomorphism_check(&s, all).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(n > 0);
            checked += 1;
        }
        assert!(checked > 0);
    }
}
