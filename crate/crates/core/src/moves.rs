//! Blow-ups, Whitehead moves, reductivity and greedy norm reduction.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ggraph::{Dart, DartSet, InvariantForest};
use crate::ideal::{d_set, enumerate_ideal_edges, IdealEdge};
use crate::marking::{EdgePath, MarkedGGraph};
use crate::norms::{Comparison, NormKind, NormVector, Norms};

/// Result of blowing up an ideal edge orbit.
#[derive(Clone, Debug)]
pub struct BlownUp {
    pub marked: MarkedGGraph,
    /// Translates `gα` in the original graph, `α` first.
    pub translates: Vec<DartSet>,
    /// Index of the new edge `e(gα)` for each translate, oriented from the
    /// new vertex to the old one.
    pub new_edges: Vec<usize>,
}

impl BlownUp {
    /// The new edge `e(α)` as a dart pointing away from the pulled-off darts.
    pub fn e_alpha(&self) -> Dart {
        Dart::new(self.new_edges[0], false)
    }
}

/// Equivariant blow-up of `Gα`. Each marking path crossing a moved dart end
/// is routed through the corresponding new edge, then reduced.
pub fn blow_up(m: &MarkedGGraph, alpha: &IdealEdge) -> Result<BlownUp> {
    let g = m.graph();
    crate::ideal::ideal_check(g, alpha.edges).map_err(Error::Hypothesis)?;
    let bu = g.blow_up_graph(alpha.edges)?;
    let owner = |d: Dart| bu.translates.iter().position(|t| t.contains(d));
    let basis = m
        .basis()
        .iter()
        .map(|p| {
            let mut steps = Vec::with_capacity(p.len() + 2);
            for &d in &p.steps {
                if let Some(j) = owner(d.rev()) {
                    steps.push(Dart::new(bu.new_edges[j], true));
                }
                steps.push(d);
                if let Some(j) = owner(d) {
                    steps.push(Dart::new(bu.new_edges[j], false));
                }
            }
            EdgePath::new(p.start, steps).reduce()
        })
        .collect();
    let marked = MarkedGGraph::new(bu.graph, basis)?;
    Ok(BlownUp { marked, translates: bu.translates, new_edges: bu.new_edges })
}

/// Collapses the orbit of an edge, as an invariant forest.
pub fn collapse_orbit(m: &MarkedGGraph, e: Dart) -> Result<MarkedGGraph> {
    let g = m.graph();
    let mut edges: Vec<usize> = (0..g.group().order()).map(|x| g.act(x, e).edge()).collect();
    edges.sort_unstable();
    edges.dedup();
    let forest = InvariantForest { edges };
    if !g.is_invariant_forest(&forest.edges) {
        return Err(Error::Hypothesis(format!(
            "orbit of {} is not a forest",
            g.dart_name(e)
        )));
    }
    m.collapse(&forest)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhiteheadMove {
    pub alpha: IdealEdge,
    pub collapse: Dart,
}

impl WhiteheadMove {
    pub fn display(&self, m: &MarkedGGraph) -> String {
        let g = m.graph();
        format!("({}, {})", self.alpha.display(g), g.dart_name(self.collapse))
    }
}

/// Blow up `Gα` and collapse `Ga`. Each new edge `e(gα)` takes over the
/// name, slot and orientation of the collapsed edge `ga`.
pub fn whitehead(m: &MarkedGGraph, mv: &WhiteheadMove) -> Result<MarkedGGraph> {
    let g = m.graph();
    let a = mv.collapse;
    if !d_set(g, &mv.alpha).contains(a) {
        return Err(Error::Hypothesis(format!(
            "{} is not in D({})",
            g.dart_name(a),
            g.set_name(mv.alpha.edges)
        )));
    }
    let bu = blow_up(m, &mv.alpha)?;
    let big = bu.marked.graph();
    // The translate of `a` inside each translate of `α`.
    let collapsed: Vec<usize> = bu
        .translates
        .iter()
        .map(|t| {
            (0..big.group().order())
                .map(|x| big.act(x, a))
                .find(|d| t.contains(*d))
                .map(|d| d.edge())
                .ok_or_else(|| Error::Inconsistent("translate without a collapse edge".into()))
        })
        .collect::<Result<_>>()?;
    let (small, vmap, emap) = big.collapse(&InvariantForest {
        edges: {
            let mut e = collapsed.clone();
            e.sort_unstable();
            e
        },
    })?;
    // Old edge k keeps index k; new edge f_j moves into the slot of the
    // collapsed edge.
    let ne = g.edge_count();
    let mut target = vec![usize::MAX; small.edge_count()];
    for k in 0..big.edge_count() {
        let Some(now) = emap[k] else { continue };
        target[now] = if k < ne {
            k
        } else {
            let j = bu.new_edges.iter().position(|&f| f == k).expect("new edge");
            collapsed[j]
        };
    }
    let names: Vec<String> = (0..ne).map(|k| g.edge_name(k).to_string()).collect();
    let vertex_names: Vec<String> = small.vertex_names().to_vec();
    let edges: Vec<(String, usize, usize)> = (0..ne)
        .map(|k| {
            let now = target.iter().position(|&t| t == k).expect("slot");
            let d = Dart::new(now, false);
            (names[k].clone(), small.init(d), small.term(d))
        })
        .collect();
    let remap = |d: Dart| Some(Dart::new(target[d.edge()], d.is_reversed()));
    let graph = small.rebuild(vertex_names, small.basepoint(), edges, remap)?;
    let basis = bu
        .marked
        .basis()
        .iter()
        .map(|p| {
            let steps = p
                .steps
                .iter()
                .filter_map(|d| emap[d.edge()].map(|k| Dart::new(target[k], d.is_reversed())))
                .collect();
            EdgePath::new(vmap[p.start], steps).reduce()
        })
        .collect();
    MarkedGGraph::new(graph, basis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Reductive,
    NotReductive,
    NullAtHorizon,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Reductive => "reductive",
            Verdict::NotReductive => "not reductive",
            Verdict::NullAtHorizon => "null at horizon",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reductivity {
    pub value: NormVector,
    pub verdict: Verdict,
}

impl Reductivity {
    pub fn from_value(value: NormVector) -> Self {
        let verdict = match value.leading_sign() {
            1 => Verdict::Reductive,
            0 => Verdict::NullAtHorizon,
            _ => Verdict::NotReductive,
        };
        Reductivity { value, verdict }
    }

    pub fn is_reductive(&self) -> bool {
        self.verdict == Verdict::Reductive
    }
}

/// `[G:stab(S)]·(|a| − |S|)` for any dart set `S` and dart `a`, with no
/// ideal-edge checks.
pub fn raw_reductivity(ns: &Norms, set: DartSet, a: Dart, kind: NormKind) -> NormVector {
    let g = ns.marked().graph();
    let idx = g.group().index(g.set_stabilizer(set)) as i64;
    ns.edge_abs(a, kind)
        .minus(&ns.set_abs(set, kind))
        .expect("same index set")
        .scale(idx)
}

pub fn reductivity(ns: &Norms, alpha: &IdealEdge, a: Dart, kind: NormKind) -> Result<Reductivity> {
    let g = ns.marked().graph();
    if !d_set(g, alpha).contains(a) {
        return Err(Error::Hypothesis(format!(
            "{} is not in D({})",
            g.dart_name(a),
            g.set_name(alpha.edges)
        )));
    }
    Ok(Reductivity::from_value(raw_reductivity(ns, alpha.edges, a, kind)))
}

/// Every Whitehead move available: orbit representatives `α` with each
/// `a ∈ D(α)`, in canonical order.
pub fn candidate_moves(m: &MarkedGGraph) -> Vec<WhiteheadMove> {
    let g = m.graph();
    enumerate_ideal_edges(g)
        .into_iter()
        .flat_map(|alpha| {
            d_set(g, &alpha)
                .iter()
                .map(move |a| WhiteheadMove { alpha, collapse: a })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Whether a set is an ideal edge admitting a move with positive
/// reductivity of the given kind.
pub fn is_reductive_set(ns: &Norms, set: DartSet, kind: NormKind) -> bool {
    let g = ns.marked().graph();
    let Ok(alpha) = IdealEdge::new(g, set) else { return false };
    d_set(g, &alpha)
        .iter()
        .any(|a| raw_reductivity(ns, alpha.edges, a, kind).leading_sign() > 0)
}

#[derive(Clone, Debug)]
pub struct RankedMove {
    pub mv: WhiteheadMove,
    pub reductivity: Reductivity,
}

/// Reductivity of every candidate move, in canonical order.
pub fn rank_moves(ns: &Norms, kind: NormKind) -> Vec<RankedMove> {
    candidate_moves(ns.marked())
        .into_par_iter()
        .map(|mv| {
            let value = raw_reductivity(ns, mv.alpha.edges, mv.collapse, kind);
            RankedMove { mv, reductivity: Reductivity::from_value(value) }
        })
        .collect()
}

/// The maximally reductive pair under the given kind. Ties keep the least
/// `(vertex, sorted darts, collapse dart)`. Fails as indeterminate when no
/// move is reductive but some move is null at the horizon.
pub fn max_pair_by(ns: &Norms, kind: NormKind) -> Result<Option<RankedMove>> {
    let ranked = rank_moves(ns, kind);
    let mut best: Option<RankedMove> = None;
    for r in ranked.iter().filter(|r| r.reductivity.is_reductive()) {
        let better = match &best {
            None => true,
            Some(b) => r.reductivity.value.compare(&b.reductivity.value)? == Comparison::Greater,
        };
        if better {
            best = Some(r.clone());
        }
    }
    if best.is_none() {
        if let Some(r) = ranked.iter().find(|r| r.reductivity.verdict == Verdict::NullAtHorizon) {
            return Err(Error::Indeterminate {
                horizon: ns.horizon(),
                message: format!(
                    "move {} has zero {kind}-reductivity at every coordinate",
                    r.mv.display(ns.marked())
                ),
            });
        }
    }
    Ok(best)
}

pub fn max_reductive_pair(m: &MarkedGGraph, horizon: usize) -> Result<Option<RankedMove>> {
    max_pair_by(&Norms::new(m, horizon)?, NormKind::Tot)
}

/// The invariant forest with the most edges (earliest on ties), if any.
pub fn maximal_forest(m: &MarkedGGraph) -> Option<InvariantForest> {
    let forests = m.graph().invariant_forests();
    let most = forests.iter().map(|f| f.edges.len()).max()?;
    forests.into_iter().find(|f| f.edges.len() == most)
}

#[derive(Clone, Debug)]
pub struct LogEntry {
    pub step: usize,
    pub action: String,
    pub red_tot: Option<NormVector>,
    pub norm_out: NormVector,
    pub norm_aut: NormVector,
}

impl LogEntry {
    pub fn line(&self) -> String {
        const SHOWN: usize = 16;
        let red = self.red_tot.as_ref().map_or_else(|| "[]".to_string(), |r| r.brief(SHOWN));
        format!(
            "step {}: {} red_tot={} norm_out={} norm_aut={}",
            self.step,
            self.action,
            red,
            self.norm_out.brief(SHOWN),
            self.norm_aut.brief(SHOWN)
        )
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub result: MarkedGGraph,
    pub log: Vec<LogEntry>,
    /// Tot norms after each step, the input's first.
    pub norms: Vec<NormVector>,
}

/// Collapses maximal invariant forests until the graph is reduced.
pub fn to_reduced(m: &MarkedGGraph) -> Result<MarkedGGraph> {
    Ok(collapse_all_forests(m.clone())?.0)
}

fn collapse_all_forests(m: MarkedGGraph) -> Result<(MarkedGGraph, Vec<InvariantForest>)> {
    let mut cur = m;
    let mut done = Vec::new();
    while let Some(f) = maximal_forest(&cur) {
        cur = cur.collapse(&f)?;
        done.push(f);
    }
    Ok((cur, done))
}

/// Collapses a maximal invariant forest, then applies maximally reductive
/// Whitehead moves until none is left, checking strict tot-descent.
pub fn greedy_reduce(m: &MarkedGGraph, horizon: usize, max_steps: usize) -> Result<Reduction> {
    let start_norm = Norms::new(m, horizon)?.norm(NormKind::Tot)?;
    let mut norms = vec![start_norm];
    let mut log = Vec::new();
    let mut cur = m.clone();
    if let Some(f) = maximal_forest(&cur) {
        let names: Vec<&str> = f.edges.iter().map(|&k| cur.graph().edge_name(k)).collect();
        let action = format!("collapse forest {{{}}}", names.join(","));
        let (next, _) = collapse_all_forests(cur)?;
        cur = next;
        push_step(&mut log, &mut norms, &cur, horizon, action, None)?;
    }
    loop {
        let ns = Norms::new(&cur, horizon)?;
        let Some(best) = max_pair_by(&ns, NormKind::Tot)? else { break };
        if log.len() >= max_steps {
            return Err(Error::Budget(max_steps));
        }
        let action = best.mv.display(&cur);
        let moved = whitehead(&cur, &best.mv)?;
        let (next, _) = collapse_all_forests(moved)?;
        cur = next;
        push_step(&mut log, &mut norms, &cur, horizon, action, Some(best.reductivity.value))?;
    }
    Ok(Reduction { result: cur, log, norms })
}

fn push_step(
    log: &mut Vec<LogEntry>,
    norms: &mut Vec<NormVector>,
    cur: &MarkedGGraph,
    horizon: usize,
    action: String,
    red_tot: Option<NormVector>,
) -> Result<()> {
    let ns = Norms::new(cur, horizon)?;
    let tot = ns.norm(NormKind::Tot)?;
    let prev = norms.last().expect("initial norm");
    if tot.compare(prev)? != Comparison::Less {
        return Err(Error::Violation(format!(
            "step {} ({action}) did not decrease the tot norm",
            log.len() + 1
        )));
    }
    let (norm_out, norm_aut) = tot.split_tot();
    log.push(LogEntry { step: log.len() + 1, action, red_tot, norm_out, norm_aut });
    norms.push(tot);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::format::serialize;
    use crate::freegroup::{enumerate_classes, ConjClass, Word};

    fn set(m: &MarkedGGraph, names: &[&str]) -> DartSet {
        DartSet::from_darts(names.iter().map(|n| m.graph().dart_by_name(n).unwrap()))
    }

    fn ideal(m: &MarkedGGraph, names: &[&str]) -> IdealEdge {
        IdealEdge::new(m.graph(), set(m, names)).unwrap()
    }

    fn marking_words(m: &MarkedGGraph) -> Vec<String> {
        m.basis()
            .iter()
            .map(|p| p.steps.iter().map(|&d| m.graph().dart_name(d)).collect::<Vec<_>>().join(" "))
            .collect()
    }

    #[test]
    fn blow_up_swap_rose() {
        let m = fixtures::r2_swap();
        let bu = blow_up(&m, &ideal(&m, &["a", "b"])).unwrap();
        let g = bu.marked.graph();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(bu.translates.len(), 1);
        let f = bu.e_alpha();
        assert_eq!(g.term(f), g.basepoint());
        let u = g.init(f);
        for e in ["a", "b"] {
            let d = g.dart_by_name(e).unwrap();
            assert_eq!((g.init(d), g.term(d)), (g.basepoint(), u));
        }
        let fname = g.dart_name(f);
        assert_eq!(marking_words(&bu.marked), vec![format!("a {fname}"), format!("b {fname}")]);
        assert!(bu.marked.verify_realization().is_empty());
        assert!(g.validate().is_empty());
    }

    #[test]
    fn blow_up_round_trip_and_correspondence() {
        for (_, m) in fixtures::all() {
            let ns = Norms::new(&m, 3).unwrap();
            for alpha in enumerate_ideal_edges(m.graph()) {
                let bu = blow_up(&m, &alpha).unwrap();
                let back = collapse_orbit(&bu.marked, bu.e_alpha()).unwrap();
                assert_eq!(serialize(&back), serialize(&m));
                let nb = Norms::new(&bu.marked, 3).unwrap();
                for kind in [NormKind::Out, NormKind::Aut, NormKind::Tot] {
                    assert_eq!(ns.set_abs(alpha.edges, kind), nb.edge_abs(bu.e_alpha(), kind));
                }
            }
        }
    }

    #[test]
    fn conjugating_move_on_rose() {
        let m = fixtures::r2();
        let mv = WhiteheadMove { alpha: ideal(&m, &["a", "b", "~b"]), collapse: m.graph().dart_by_name("a").unwrap() };
        let out = whitehead(&m, &mv).unwrap();
        assert_eq!(marking_words(&out), vec!["a".to_string(), "~a b a".to_string()]);
        let before = crate::norms::norm(&m, NormKind::Out, 4).unwrap();
        let after = crate::norms::norm(&out, NormKind::Out, 4).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn r2w_move_shortens_x2_loop() {
        let m = fixtures::r2w();
        let mv = WhiteheadMove { alpha: ideal(&m, &["a", "~b"]), collapse: m.graph().dart_by_name("a").unwrap() };
        let out = whitehead(&m, &mv).unwrap();
        let classes = enumerate_classes(2, 3);
        let i = classes.iter().position(|c| *c == ConjClass::of(&Word::parse("x2").unwrap())).unwrap();
        assert_eq!(crate::norms::norm(&out, NormKind::Out, 3).unwrap().coords[i], 1);
        let ns = Norms::new(&m, 3).unwrap();
        let red = reductivity(&ns, &mv.alpha, mv.collapse, NormKind::Out).unwrap();
        assert!(red.is_reductive());
        assert!(red.value.coords[i] > 0);
    }

    #[test]
    fn reductivity_examples_on_rose() {
        let m = fixtures::r2();
        let ns = Norms::new(&m, 2).unwrap();
        let gamma = ideal(&m, &["a", "b", "~b"]);
        let a = m.graph().dart_by_name("a").unwrap();
        let aut = reductivity(&ns, &gamma, a, NormKind::Aut).unwrap();
        assert_eq!(&aut.value.coords[..3], &[0, 0, -2]);
        assert_eq!(aut.verdict, Verdict::NotReductive);
        let out = reductivity(&ns, &gamma, a, NormKind::Out).unwrap();
        assert_eq!(out.verdict, Verdict::NullAtHorizon);
        let b = m.graph().dart_by_name("b").unwrap();
        assert!(matches!(reductivity(&ns, &gamma, b, NormKind::Aut), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn norm_change_law_on_fixtures() {
        for (_, m) in fixtures::all() {
            let ns = Norms::new(&m, 3).unwrap();
            for mv in candidate_moves(&m) {
                let after = whitehead(&m, &mv).unwrap();
                assert!(after.verify_realization().is_empty());
                let na = Norms::new(&after, 3).unwrap();
                for kind in [NormKind::Out, NormKind::Aut, NormKind::Tot] {
                    let diff = na.norm(kind).unwrap().minus(&ns.norm(kind).unwrap()).unwrap();
                    let red = raw_reductivity(&ns, mv.alpha.edges, mv.collapse, kind);
                    assert_eq!(diff, red.scale(-1));
                }
            }
        }
    }

    #[test]
    fn max_pair_examples() {
        assert_eq!(candidate_moves(&fixtures::r2()).len(), 12);
        assert!(max_reductive_pair(&fixtures::r2(), 4).unwrap().is_none());
        assert!(candidate_moves(&fixtures::r2_swap()).is_empty());
        assert!(max_reductive_pair(&fixtures::r2_swap(), 4).unwrap().is_none());
        let m = fixtures::r2w();
        let best = max_reductive_pair(&m, 4).unwrap().unwrap();
        assert!(best.reductivity.is_reductive());
        let after = whitehead(&m, &best.mv).unwrap();
        assert_eq!(crate::norms::norm(&after, NormKind::Out, 1).unwrap().coords, vec![1, 1, 1, 1]);
    }

    #[test]
    fn greedy_reduce_examples() {
        let r = greedy_reduce(&fixtures::r2(), 4, 500).unwrap();
        assert!(r.log.is_empty());
        let t = greedy_reduce(&fixtures::theta(), 4, 500).unwrap();
        assert_eq!(t.log.len(), 1);
        assert!(t.log[0].action.starts_with("collapse forest"));
        assert_eq!(t.result.graph().vertex_count(), 1);
        let w = greedy_reduce(&fixtures::r2w(), 4, 500).unwrap();
        assert!(!w.log.is_empty());
        assert_eq!(crate::norms::norm(&w.result, NormKind::Out, 1).unwrap().coords, vec![1, 1, 1, 1]);
        for pair in w.norms.windows(2) {
            assert_eq!(pair[1].compare(&pair[0]).unwrap(), Comparison::Less);
        }
        assert!(w.log[0].line().starts_with("step 1: (*:{"));
    }
}
