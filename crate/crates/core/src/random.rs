//! Seeded random admissible marked G-graphs for property checks.
//!
//! A graph is assembled from orbits: vertex orbits `G/H` and edge orbits
//! `G/K` with `K` fixing both endpoints, so the action never inverts an
//! edge. Candidates that are disconnected, inadmissible, unfaithful or of
//! the wrong rank are rejected. The marking comes from a spanning tree and
//! is scrambled by a few Nielsen moves.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::ggraph::{Dart, GGraph};
use crate::group::{FiniteGroup, Subgroup};
use crate::marking::{EdgePath, MarkedGGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallGroup {
    Trivial,
    Z2,
    Z3,
    Z4,
    V4,
    Z6,
    S3,
}

impl SmallGroup {
    pub const ALL: [SmallGroup; 7] = [
        SmallGroup::Trivial,
        SmallGroup::Z2,
        SmallGroup::Z3,
        SmallGroup::Z4,
        SmallGroup::V4,
        SmallGroup::Z6,
        SmallGroup::S3,
    ];

    pub fn build(self) -> FiniteGroup {
        let gens: Vec<Vec<usize>> = match self {
            SmallGroup::Trivial => return FiniteGroup::trivial(),
            SmallGroup::Z2 => vec![vec![1, 0]],
            SmallGroup::Z3 => vec![vec![1, 2, 0]],
            SmallGroup::Z4 => vec![vec![1, 2, 3, 0]],
            SmallGroup::V4 => vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]],
            SmallGroup::Z6 => vec![vec![1, 2, 3, 4, 5, 0]],
            SmallGroup::S3 => vec![vec![1, 0, 2], vec![1, 2, 0]],
        };
        let degree = gens[0].len();
        FiniteGroup::generated_by(&gens, degree).expect("small group").0
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    pub max_rank: usize,
    pub max_dart_orbits: usize,
    pub max_extra_vertex_orbits: usize,
    pub max_nielsen_moves: usize,
    pub groups: Vec<SmallGroup>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            max_rank: 3,
            max_dart_orbits: 12,
            max_extra_vertex_orbits: 2,
            max_nielsen_moves: 3,
            groups: SmallGroup::ALL.to_vec(),
        }
    }
}

/// Least element of the left coset `gH`.
fn coset_rep(grp: &FiniteGroup, g: usize, h: Subgroup) -> usize {
    h.elements().map(|x| grp.mul(g, x)).min().expect("nonempty subgroup")
}

/// One attempt; `None` when the candidate is rejected.
fn attempt(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Option<MarkedGGraph> {
    let kind = *cfg.groups.choose(rng)?;
    let grp = kind.build();
    let subs = grp.subgroups();
    // Vertex orbits: the basepoint, then a few orbits G/H.
    let mut vstabs = vec![grp.whole()];
    for _ in 0..rng.gen_range(0..=cfg.max_extra_vertex_orbits) {
        vstabs.push(*subs.choose(rng)?);
    }
    let mut vertices: Vec<(usize, usize)> = Vec::new();
    let mut vertex_names = Vec::new();
    for (o, &h) in vstabs.iter().enumerate() {
        for c in grp.left_coset_reps(h) {
            vertices.push((o, c));
            vertex_names.push(if o == 0 { "*".to_string() } else { format!("v{o}_{c}") });
        }
    }
    let vindex = |o: usize, g: usize| -> usize {
        let c = coset_rep(&grp, g, vstabs[o]);
        vertices.iter().position(|&x| x == (o, c)).expect("vertex")
    };
    // Edge orbits: from vertex (i, 1) to vertex (j, y), stabilizer K inside
    // stab(i) ∩ y stab(j) y⁻¹.
    let max_edge_orbits = cfg.max_dart_orbits / 2;
    let n_orbits = rng.gen_range(1..=max_edge_orbits);
    let mut orbits = Vec::new();
    for _ in 0..n_orbits {
        let i = rng.gen_range(0..vstabs.len());
        let j = rng.gen_range(0..vstabs.len());
        let y = rng.gen_range(0..grp.order());
        let conj = Subgroup(
            vstabs[j]
                .elements()
                .map(|h| 1u64 << grp.mul(grp.mul(y, h), grp.inv(y)))
                .fold(0, |a, b| a | b),
        );
        let allowed = vstabs[i].intersect(conj);
        let ks: Vec<Subgroup> = subs.iter().copied().filter(|k| k.is_subset_of(allowed)).collect();
        let k = *ks.choose(rng)?;
        orbits.push((i, j, y, k));
    }
    let mut edges = Vec::new();
    let mut edge_ids: Vec<(usize, usize)> = Vec::new();
    for (o, &(i, j, y, k)) in orbits.iter().enumerate() {
        for c in grp.left_coset_reps(k) {
            edges.push((format!("e{o}_{c}"), vindex(i, c), vindex(j, grp.mul(c, y))));
            edge_ids.push((o, c));
        }
    }
    let ne = edges.len();
    if ne == 0 || 2 * ne > crate::ggraph::DartSet::MAX_DARTS {
        return None;
    }
    let rank = ne as isize - vertices.len() as isize + 1;
    if rank < 1 || rank > cfg.max_rank as isize {
        return None;
    }
    let dart_action: Vec<Vec<Dart>> = (0..grp.order())
        .map(|g| {
            let mut perm = Vec::with_capacity(2 * ne);
            for &(o, c) in &edge_ids {
                let c2 = coset_rep(&grp, grp.mul(g, c), orbits[o].3);
                let k = edge_ids.iter().position(|&x| x == (o, c2)).expect("edge");
                perm.push(Dart::new(k, false));
                perm.push(Dart::new(k, true));
            }
            perm
        })
        .collect();
    let graph = GGraph::from_table(vertex_names, 0, edges, grp.table().to_vec(), dart_action).ok()?;
    if !graph.validate().is_empty() {
        return None;
    }
    let basis = tree_basis(&graph);
    let basis = nielsen_scramble(rng, &graph, basis, cfg.max_nielsen_moves);
    MarkedGGraph::new(graph, basis).ok()
}

/// Basis of π1 from the BFS spanning tree: one loop per non-tree edge.
pub fn tree_basis(g: &GGraph) -> Vec<EdgePath> {
    let (tree, parent) = g.spanning_tree();
    let to = |v: usize| -> EdgePath {
        let mut steps = Vec::new();
        let mut at = v;
        while let Some(d) = parent[at] {
            steps.push(d);
            at = g.init(d);
        }
        steps.reverse();
        EdgePath::new(g.basepoint(), steps)
    };
    (0..g.edge_count())
        .filter(|k| !tree.contains(k))
        .map(|k| {
            let d = Dart::new(k, false);
            let p = to(g.init(d)).concat(&EdgePath::new(g.init(d), vec![d]));
            p.concat(&to(g.term(d)).inverse(g))
        })
        .collect()
}

fn nielsen_scramble(rng: &mut ChaCha8Rng, g: &GGraph, mut basis: Vec<EdgePath>, max: usize) -> Vec<EdgePath> {
    let n = basis.len();
    if n < 2 {
        return basis;
    }
    for _ in 0..rng.gen_range(0..=max) {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let other = if rng.gen_bool(0.5) { basis[j].clone() } else { basis[j].inverse(g) };
        basis[i] = if rng.gen_bool(0.5) { basis[i].concat(&other) } else { other.concat(&basis[i]) };
    }
    basis
}

/// Deterministic stream of random instances.
pub struct InstanceGenerator {
    rng: ChaCha8Rng,
    cfg: GeneratorConfig,
}

impl InstanceGenerator {
    pub fn new(seed: u64, cfg: GeneratorConfig) -> Self {
        InstanceGenerator { rng: ChaCha8Rng::seed_from_u64(seed), cfg }
    }

    /// Next accepted instance. Panics only if the configuration admits none
    /// in a very large number of attempts.
    pub fn next_instance(&mut self) -> MarkedGGraph {
        for _ in 0..1_000_000 {
            if let Some(m) = attempt(&mut self.rng, &self.cfg) {
                return m;
            }
        }
        panic!("random generator rejected every candidate");
    }
}

/// `count` instances from a seed.
pub fn instances(seed: u64, count: usize) -> Result<Vec<MarkedGGraph>> {
    let mut gen = InstanceGenerator::new(seed, GeneratorConfig::default());
    Ok((0..count).map(|_| gen.next_instance()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize;

    #[test]
    fn groups_have_expected_orders() {
        let orders: Vec<usize> = SmallGroup::ALL.iter().map(|g| g.build().order()).collect();
        assert_eq!(orders, vec![1, 2, 3, 4, 4, 6, 6]);
    }

    #[test]
    fn generated_instances_are_valid() {
        let ms = instances(7, 30).unwrap();
        for m in &ms {
            assert!(m.graph().validate().is_empty());
            assert!(m.verify_realization().is_empty());
            assert!((1..=3).contains(&m.rank()));
        }
        assert!(ms.iter().any(|m| m.graph().group().order() > 1));
        assert!(ms.iter().any(|m| m.graph().vertex_count() > 1));
    }

    #[test]
    fn generator_is_deterministic() {
        let a: Vec<String> = instances(3, 5).unwrap().iter().map(serialize).collect();
        let b: Vec<String> = instances(3, 5).unwrap().iter().map(serialize).collect();
        assert_eq!(a, b);
    }
}
