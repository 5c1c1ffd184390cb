//! Exhaustive property checks on a single marked graph. Each check returns a
//! [`Report`] counting the cases examined and describing every failure.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::format::serialize;
use crate::ggraph::{Dart, DartSet, GGraph};
use crate::ideal::{all_ideal_edges, crossing, d_set, enumerate_ideal_edges, inverse, IdealEdge};
use crate::marking::{EdgePath, MarkedGGraph};
use crate::moves::{
    blow_up, candidate_moves, collapse_orbit, greedy_reduce, is_reductive_set, max_pair_by, raw_reductivity,
    whitehead, WhiteheadMove,
};
use crate::norms::{Comparison, NormKind, Norms};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    /// Cases where the hypotheses held and the conclusion was tested.
    pub checked: usize,
    /// Cases skipped because a hypothesis failed or was undecidable.
    pub skipped: usize,
    pub failures: Vec<String>,
    /// Notable non-failures worth surfacing, such as recorded counterexamples
    /// to identities that are expected to fail.
    pub notes: Vec<String>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: Report) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.failures.extend(other.failures);
        self.notes.extend(other.notes);
    }

    fn expect(&mut self, cond: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !cond {
            self.failures.push(msg());
        }
    }
}

const KINDS: [NormKind; 2] = [NormKind::Out, NormKind::Aut];

/// Direct norms equal half-sums of edge absolute values.
pub fn norm_consistency(m: &MarkedGGraph, horizon: usize) -> Result<Report> {
    let ns = Norms::new(m, horizon)?;
    let mut r = Report::default();
    for kind in KINDS {
        let direct = ns.norm_direct(kind);
        let halved = ns.norm_from_edges(kind);
        r.expect(direct == halved, || format!("{kind} norm: direct {direct} vs half-sum {halved}"));
    }
    Ok(r)
}

fn random_set(rng: &mut ChaCha8Rng, all: DartSet) -> DartSet {
    DartSet::from_darts(all.iter().filter(|_| rng.gen_bool(0.5)))
}

/// `|A ⊔ B| = |A| + |B| − 2(A.B)` on random disjoint pairs, plus the
/// out-only identity `|A| = (A.E−A) = |E−A|`. Aut failures of the latter
/// are recorded as notes.
pub fn inclusion_exclusion(m: &MarkedGGraph, horizon: usize, rng: &mut ChaCha8Rng, draws: usize) -> Result<Report> {
    let ns = Norms::new(m, horizon)?;
    let g = m.graph();
    let all = g.all_darts();
    let mut r = Report::default();
    for _ in 0..draws {
        let a = random_set(rng, all);
        let b = random_set(rng, all.minus(a));
        for kind in KINDS {
            let lhs = ns.set_abs(a.union(b), kind);
            let rhs = ns
                .set_abs(a, kind)
                .plus(&ns.set_abs(b, kind))?
                .minus(&ns.dot(a, b, kind).scale(2))?;
            r.expect(lhs == rhs, || {
                format!("{kind}: |A⊔B| mismatch for A={} B={}", g.set_name(a), g.set_name(b))
            });
        }
        let rest = all.minus(a);
        let abs = ns.set_abs(a, NormKind::Out);
        r.expect(abs == ns.dot(a, rest, NormKind::Out) && abs == ns.set_abs(rest, NormKind::Out), || {
            format!("out identity fails for A={}", g.set_name(a))
        });
        if ns.set_abs(a, NormKind::Aut) != ns.dot(a, rest, NormKind::Aut) {
            r.notes.push(format!("aut identity fails for A={}", g.set_name(a)));
        }
    }
    Ok(r)
}

/// All `K`-invariant dart sets, exhaustively when small, else sampled.
fn invariant_sets(g: &GGraph, k: crate::group::Subgroup, rng: &mut ChaCha8Rng) -> Vec<DartSet> {
    // Unions of K-orbits of darts.
    let mut orbits: Vec<DartSet> = Vec::new();
    for d in g.darts() {
        let o = g.saturate_by(k, DartSet::single(d));
        if !orbits.contains(&o) {
            orbits.push(o);
        }
    }
    let union = |mask: u64| {
        orbits
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(DartSet::empty(), |s, (_, o)| s.union(*o))
    };
    if orbits.len() <= 12 {
        (0..1u64 << orbits.len()).map(union).collect()
    } else {
        (0..4096).map(|_| union(rng.gen::<u64>() & ((1u64 << orbits.len()) - 1))).collect()
    }
}

/// `((Ke).A) = [K:stab(e)](e.A)` for every subgroup `K`, `K`-invariant `A`
/// and dart `e` with `stab(e) ⊆ K`.
pub fn coset_identity(m: &MarkedGGraph, horizon: usize, rng: &mut ChaCha8Rng) -> Result<Report> {
    let ns = Norms::new(m, horizon)?;
    let g = m.graph();
    let grp = g.group();
    let mut r = Report::default();
    for k in grp.subgroups() {
        let sets = invariant_sets(g, k, rng);
        for e in g.darts() {
            let stab = g.stabilizer(e);
            if !stab.is_subset_of(k) {
                continue;
            }
            let ke = g.saturate_by(k, DartSet::single(e));
            let idx = (k.order() / stab.order()) as i64;
            for &a in &sets {
                for kind in KINDS {
                    let lhs = ns.dot(ke, a, kind);
                    let rhs = ns.dot(DartSet::single(e), a, kind).scale(idx);
                    r.expect(lhs == rhs, || {
                        format!("{kind}: K={:#x} e={} A={}", k.0, g.dart_name(e), g.set_name(a))
                    });
                }
            }
        }
    }
    Ok(r)
}

/// Norm change of every available Whitehead move equals minus its reductivity.
pub fn norm_change_law(m: &MarkedGGraph, horizon: usize) -> Result<Report> {
    let ns = Norms::new(m, horizon)?;
    let mut r = Report::default();
    for mv in candidate_moves(m) {
        let after = whitehead(m, &mv)?;
        let na = Norms::new(&after, horizon)?;
        for kind in [NormKind::Out, NormKind::Aut, NormKind::Tot] {
            let diff = na.norm(kind)?.minus(&ns.norm(kind)?)?;
            let red = raw_reductivity(&ns, mv.alpha.edges, mv.collapse, kind);
            r.expect(diff == red.scale(-1), || format!("{kind}: norm change of {} ", mv.display(m)));
        }
    }
    Ok(r)
}

/// `|α|` before equals `|e(α)|` after blowing up, and collapsing the new
/// orbit restores the instance.
pub fn blow_up_correspondence(m: &MarkedGGraph, horizon: usize) -> Result<Report> {
    let ns = Norms::new(m, horizon)?;
    let g = m.graph();
    let mut r = Report::default();
    let original = serialize(m);
    for alpha in enumerate_ideal_edges(g) {
        let bu = blow_up(m, &alpha)?;
        let nb = Norms::new(&bu.marked, horizon)?;
        for kind in [NormKind::Out, NormKind::Aut, NormKind::Tot] {
            r.expect(ns.set_abs(alpha.edges, kind) == nb.edge_abs(bu.e_alpha(), kind), || {
                format!("{kind}: |α| ≠ |e(α)| for {}", alpha.display(g))
            });
        }
        let back = collapse_orbit(&bu.marked, bu.e_alpha())?;
        r.expect(serialize(&back) == original && back.canonical_form() == m.canonical_form(), || {
            format!("round trip fails for {}", alpha.display(g))
        });
    }
    Ok(r)
}

/// Crossing inequalities for every pair of ideal edges at a common vertex:
/// the simple-crossing bound (with `α ∩ β ≠ ∅` and `P ≤ Q`) and the
/// per-component bound.
pub fn crossing_inequalities(m: &MarkedGGraph, horizon: usize) -> Result<Report> {
    let ns = Norms::new(m, horizon)?;
    let g = m.graph();
    let grp = g.group();
    let reps = enumerate_ideal_edges(g);
    let every = all_ideal_edges(g);
    let mut r = Report::default();
    for alpha in &reps {
        let p = grp.index(alpha.stab) as i64;
        for beta in reps.iter().filter(|b| b.vertex == alpha.vertex) {
            let cr = crossing(g, alpha, beta);
            if cr.number == 0 {
                continue;
            }
            let q = grp.index(beta.stab) as i64;
            for kind in KINDS {
                let base = ns.set_abs(alpha.edges, kind).scale(p).plus(&ns.set_abs(beta.edges, kind).scale(q))?;
                for c in cr.nonempty() {
                    let lhs = ns
                        .set_abs(alpha.edges.minus(c.gamma), kind)
                        .scale(p)
                        .plus(&ns.set_abs(beta.edges.minus(c.gamma_dual), kind).scale(q))?;
                    r.expect(lhs.dominated_by(&base)?, || {
                        format!(
                            "{kind}: component bound fails for α={} β={} γ={}",
                            alpha.display(g),
                            beta.display(g),
                            g.set_name(c.gamma)
                        )
                    });
                }
            }
            if cr.number != 1 {
                continue;
            }
            // Simple crossing: every translate β' of β meeting α with P ≤ stab(β').
            let translates = g.translates(beta.edges);
            for b2 in every.iter().filter(|b| translates.contains(&b.edges)) {
                if alpha.edges.is_disjoint(b2.edges) || !alpha.stab.is_subset_of(b2.stab) {
                    continue;
                }
                let q2 = grp.index(b2.stab) as i64;
                let q_alpha = g.saturate_by(b2.stab, alpha.edges);
                for kind in KINDS {
                    let lhs = ns
                        .set_abs(alpha.edges.intersect(b2.edges), kind)
                        .scale(p)
                        .plus(&ns.set_abs(b2.edges.union(q_alpha), kind).scale(q2))?;
                    let rhs = ns.set_abs(alpha.edges, kind).scale(p).plus(&ns.set_abs(b2.edges, kind).scale(q2))?;
                    r.expect(lhs.dominated_by(&rhs)?, || {
                        format!(
                            "{kind}: simple-crossing bound fails for α={} β={}",
                            alpha.display(g),
                            b2.display(g)
                        )
                    });
                }
            }
        }
    }
    Ok(r)
}

/// Whether `(α, a)` is reductive for some `a ∈ D(α)`.
pub fn is_reductive(ns: &Norms, alpha: &IdealEdge, kind: NormKind) -> bool {
    is_reductive_set(ns, alpha.edges, kind)
}

/// Pushing and Shrinking lemmas for the maximal pair of the given kind.
///
/// Shrinking is checked for reductive `α` only: without that hypothesis the
/// case where every component contains a translate of `m` leaves `β = α`,
/// and the conclusion would claim every crossing ideal edge is reductive.
pub fn pushing_shrinking(m: &MarkedGGraph, horizon: usize, kind: NormKind) -> Result<Report> {
    let mut r = Report::default();
    if !m.graph().is_reduced() {
        r.skipped += 1;
        return Ok(r);
    }
    let ns = Norms::new(m, horizon)?;
    let g = m.graph();
    let best = match max_pair_by(&ns, kind) {
        Ok(Some(b)) => b,
        Ok(None) | Err(crate::error::Error::Indeterminate { .. }) => {
            r.skipped += 1;
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    let mu = best.mv.alpha;
    let mdart = best.mv.collapse;
    let m_orbit = g.orbit(mdart).members;
    for alpha in all_ideal_edges(g).iter().filter(|a| a.vertex == mu.vertex) {
        let cr = crossing(g, alpha, &mu);
        if cr.number == 0 || !is_reductive(&ns, alpha, kind) {
            continue;
        }
        let reductive = |s: DartSet| is_reductive_set(&ns, s, kind);
        if alpha.edges.contains(mdart) && cr.number == 1 {
            let p_mu = g.saturate_by(alpha.stab, mu.edges);
            let option_a = reductive(mu.edges.minus(alpha.edges)) && reductive(alpha.edges.minus(mu.edges));
            let option_b = reductive(alpha.edges.union(p_mu)) && reductive(alpha.edges.intersect(mu.edges));
            r.expect(option_a || option_b, || {
                format!(
                    "pushing ({kind}): μ={} m={} α={}",
                    mu.display(g),
                    g.dart_name(mdart),
                    alpha.display(g)
                )
            });
        }
        let free: Vec<DartSet> = cr
            .nonempty()
            .map(|c| c.gamma)
            .filter(|gm| gm.is_disjoint(m_orbit))
            .collect();
        let beta = free.iter().fold(alpha.edges, |s, gm| s.minus(*gm));
        let holds = reductive(beta) || free.iter().any(|&gm| reductive(gm));
        r.expect(holds, || {
            format!(
                "shrinking ({kind}): μ={} m={} α={} β={}",
                mu.display(g),
                g.dart_name(mdart),
                alpha.display(g),
                g.set_name(beta)
            )
        });
    }
    Ok(r)
}

/// Tot-reductive moves `(α, a)` with `α` invertible, used by the two
/// checks below.
fn invertible_reductive(ns: &Norms) -> Vec<(IdealEdge, IdealEdge, Vec<Dart>)> {
    let g = ns.marked().graph();
    enumerate_ideal_edges(g)
        .into_iter()
        .filter_map(|alpha| {
            let inv = inverse(g, &alpha)?;
            let reductive: Vec<Dart> = d_set(g, &alpha)
                .iter()
                .filter(|&a| raw_reductivity(ns, alpha.edges, a, NormKind::Tot).leading_sign() > 0)
                .collect();
            (!reductive.is_empty()).then_some((alpha, inv, reductive))
        })
        .collect()
}

/// Invertible tot-reductive ideal edges have tot-reductive inverses.
pub fn invertible_symmetry(m: &MarkedGGraph, horizon: usize) -> Result<Report> {
    let mut r = Report::default();
    if !m.graph().is_reduced() {
        r.skipped += 1;
        return Ok(r);
    }
    let ns = Norms::new(m, horizon)?;
    let g = m.graph();
    for (alpha, inv, _) in invertible_reductive(&ns) {
        r.expect(is_reductive(&ns, &inv, NormKind::Tot), || {
            format!("inverse of tot-reductive {} is not tot-reductive", alpha.display(g))
        });
    }
    Ok(r)
}

/// A tot-reductive move `(α, a)` at the basepoint with `α` invertible and
/// `stab(a) = G` has nonzero out-reductivity within the horizon.
pub fn out_reductivity_nonzero(m: &MarkedGGraph, horizon: usize) -> Result<Report> {
    let mut r = Report::default();
    if !m.graph().is_reduced() {
        r.skipped += 1;
        return Ok(r);
    }
    let ns = Norms::new(m, horizon)?;
    let g = m.graph();
    for (alpha, _, moves) in invertible_reductive(&ns) {
        if alpha.vertex != g.basepoint() {
            continue;
        }
        for a in moves.into_iter().filter(|&a| g.stabilizer(a) == g.group().whole()) {
            let out = raw_reductivity(&ns, alpha.edges, a, NormKind::Out);
            r.expect(!out.is_zero(), || {
                format!(
                    "out-reductivity of ({}, {}) vanishes at the horizon",
                    alpha.display(g),
                    g.dart_name(a)
                )
            });
        }
    }
    Ok(r)
}

/// The conjugating edge `γ = E_* − {c̄}`: at most one is reductive, its move
/// `(γ, c)` keeps the out norm and conjugates the marking by `c`, and if it
/// is incompatible with `μ` then `c = m̄` and `μ` is invertible.
pub fn conjugation_edge(m: &MarkedGGraph, horizon: usize, kind: NormKind) -> Result<Report> {
    let mut r = Report::default();
    let g = m.graph();
    if !g.is_reduced() {
        r.skipped += 1;
        return Ok(r);
    }
    let ns = Norms::new(m, horizon)?;
    let base = g.basepoint();
    let e_star = g.incoming(base);
    let candidates: Vec<IdealEdge> = e_star
        .iter()
        .filter_map(|cbar| IdealEdge::new(g, e_star.minus(DartSet::single(cbar))).ok())
        .filter(|gm| gm.stab == g.group().whole() && inverse(g, gm).is_none())
        .filter(|gm| is_reductive(&ns, gm, kind))
        .collect();
    r.expect(candidates.len() <= 1, || {
        let names: Vec<String> = candidates.iter().map(|c| c.display(g)).collect();
        format!("{} reductive conjugation edges: {}", candidates.len(), names.join(" "))
    });
    let max = match max_pair_by(&ns, kind) {
        Ok(x) => x,
        Err(crate::error::Error::Indeterminate { .. }) => None,
        Err(e) => return Err(e),
    };
    for gamma in candidates {
        let cbar = e_star.minus(gamma.edges).first().expect("one dart");
        let c = cbar.rev();
        if !d_set(g, &gamma).contains(c) {
            r.skipped += 1;
            continue;
        }
        let after = whitehead(m, &WhiteheadMove { alpha: gamma, collapse: c })?;
        let na = Norms::new(&after, horizon)?;
        r.expect(na.norm(NormKind::Out)? == ns.norm(NormKind::Out)?, || {
            format!("move ({}, {}) changes the out norm", gamma.display(g), g.dart_name(c))
        });
        let cpath = EdgePath::new(base, vec![c]);
        // The move renumbers and reorients edges; compare up to isomorphism.
        let conjugated = |w: &EdgePath| -> Result<String> {
            let basis = m.basis().iter().map(|p| w.inverse(g).concat(p).concat(w)).collect();
            Ok(MarkedGGraph::new(g.clone(), basis)?.canonical_form())
        };
        let target = after.canonical_form();
        let conj = conjugated(&cpath)? == target;
        r.expect(conj, || {
            let before: Vec<String> = m.basis().iter().map(|p| p.display(g)).collect();
            let now: Vec<String> = after.basis().iter().map(|p| p.display(after.graph())).collect();
            format!(
                "move ({}, {}) is not conjugation: [{}] -> [{}]",
                gamma.display(g),
                g.dart_name(c),
                before.join(", "),
                now.join(", ")
            )
        });
        if let Some(best) = &max {
            let mu = best.mv.alpha;
            if !crate::ideal::compatible(g, &gamma, &mu) {
                r.expect(c == best.mv.collapse.rev() && inverse(g, &mu).is_some(), || {
                    format!("γ={} incompatible with μ={} but c ≠ m̄ or μ not invertible", gamma.display(g), mu.display(g))
                });
            }
        }
    }
    Ok(r)
}

/// Greedy reduction strictly decreases the tot norm and stops in budget.
pub fn descent(m: &MarkedGGraph, horizon: usize, max_steps: usize) -> Result<Report> {
    let mut r = Report::default();
    match greedy_reduce(m, horizon, max_steps) {
        Ok(red) => {
            let strict = red
                .norms
                .windows(2)
                .all(|w| matches!(w[1].compare(&w[0]), Ok(Comparison::Less)));
            r.expect(strict, || "tot norm did not strictly decrease".into());
        }
        Err(crate::error::Error::Indeterminate { message, .. }) => {
            r.skipped += 1;
            r.notes.push(format!("indeterminate: {message}"));
        }
        Err(e) => r.expect(false, || e.to_string()),
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;

    #[test]
    fn fixtures_pass_every_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (name, m) in fixtures::all() {
            let mut r = Report::default();
            r.merge(norm_consistency(&m, 3).unwrap());
            r.merge(inclusion_exclusion(&m, 3, &mut rng, 50).unwrap());
            r.merge(coset_identity(&m, 3, &mut rng).unwrap());
            r.merge(norm_change_law(&m, 3).unwrap());
            r.merge(blow_up_correspondence(&m, 3).unwrap());
            r.merge(crossing_inequalities(&m, 3).unwrap());
            for kind in [NormKind::Aut, NormKind::Tot] {
                r.merge(pushing_shrinking(&m, 3, kind).unwrap());
                r.merge(conjugation_edge(&m, 3, kind).unwrap());
            }
            r.merge(invertible_symmetry(&m, 3).unwrap());
            r.merge(out_reductivity_nonzero(&m, 3).unwrap());
            r.merge(descent(&m, 3, 500).unwrap());
            assert!(r.ok(), "{name}: {:?}", r.failures);
            assert!(r.checked > 0);
        }
    }
}
