//! Finite groups given by multiplication tables, with subgroups as bitmasks.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Element 0 is always the identity. `mul[g][h]` is `g·h` (apply `h` first
/// when elements act on the left).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

/// A subset of group elements, usually a subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup(pub u64);

impl Subgroup {
    pub fn contains(self, g: usize) -> bool {
        self.0 >> g & 1 == 1
    }

    pub fn order(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: Subgroup) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn elements(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&g| self.0 >> g & 1 == 1)
    }

    pub fn intersect(self, other: Subgroup) -> Subgroup {
        Subgroup(self.0 & other.0)
    }
}

impl FiniteGroup {
    pub const MAX_ORDER: usize = 64;

    pub fn trivial() -> Self {
        FiniteGroup { mul: vec![vec![0]], inv: vec![0] }
    }

    /// Builds a group from a table, checking identity at 0, closure,
    /// associativity and inverses.
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<Self> {
        let k = mul.len();
        if k == 0 || k > Self::MAX_ORDER {
            return Err(Error::Validation(format!("group order {k} out of range 1..=64")));
        }
        if mul.iter().any(|row| row.len() != k || row.iter().any(|&x| x >= k)) {
            return Err(Error::Validation("multiplication table is not square".into()));
        }
        for g in 0..k {
            if mul[0][g] != g || mul[g][0] != g {
                return Err(Error::Validation("element 0 is not the identity".into()));
            }
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::Validation(format!(
                            "table is not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let mut inv = vec![usize::MAX; k];
        for g in 0..k {
            inv[g] = (0..k)
                .find(|&h| mul[g][h] == 0)
                .ok_or_else(|| Error::Validation(format!("element {g} has no inverse")))?;
        }
        Ok(FiniteGroup { mul, inv })
    }

    /// Closes a set of permutations of `0..degree` under composition.
    /// Returns the group and, for each element, its permutation.
    /// `perm[g][x]` is the image of `x`.
    pub fn generated_by(generators: &[Vec<usize>], degree: usize) -> Result<(Self, Vec<Vec<usize>>)> {
        let identity: Vec<usize> = (0..degree).collect();
        let mut perms = vec![identity.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        index.insert(identity, 0);
        let mut frontier = 0;
        while frontier < perms.len() {
            for gen in generators {
                let p = &perms[frontier];
                let q: Vec<usize> = (0..degree).map(|x| gen[p[x]]).collect();
                if !index.contains_key(&q) {
                    if perms.len() >= Self::MAX_ORDER {
                        return Err(Error::Validation("generated group exceeds order 64".into()));
                    }
                    index.insert(q.clone(), perms.len());
                    perms.push(q);
                }
            }
            frontier += 1;
        }
        let k = perms.len();
        let mut mul = vec![vec![0; k]; k];
        for a in 0..k {
            for b in 0..k {
                // (a·b)(x) = a(b(x))
                let ab: Vec<usize> = (0..degree).map(|x| perms[a][perms[b][x]]).collect();
                mul[a][b] = index[&ab];
            }
        }
        Ok((FiniteGroup::from_table(mul)?, perms))
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn whole(&self) -> Subgroup {
        let k = self.order();
        Subgroup(if k == 64 { u64::MAX } else { (1u64 << k) - 1 })
    }

    pub fn identity_subgroup(&self) -> Subgroup {
        Subgroup(1)
    }

    /// Subgroup generated by a set of elements.
    pub fn closure(&self, gens: Subgroup) -> Subgroup {
        let mut set = gens.0 | 1;
        loop {
            let mut next = set;
            for a in Subgroup(set).elements() {
                for b in Subgroup(set).elements() {
                    next |= 1 << self.mul[a][b];
                }
            }
            if next == set {
                return Subgroup(set);
            }
            set = next;
        }
    }

    pub fn is_subgroup(&self, s: Subgroup) -> bool {
        s.contains(0)
            && s.elements()
                .all(|a| s.elements().all(|b| s.contains(self.mul[a][self.inv[b]])))
    }

    /// All subgroups, ordered by (order, mask).
    pub fn subgroups(&self) -> Vec<Subgroup> {
        let k = self.order();
        let mut found: Vec<Subgroup> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut queue: Vec<Subgroup> = (0..k).map(|g| self.closure(Subgroup(1 << g))).collect();
        while let Some(s) = queue.pop() {
            if !seen.insert(s) {
                continue;
            }
            found.push(s);
            for g in 0..k {
                if !s.contains(g) {
                    queue.push(self.closure(Subgroup(s.0 | 1 << g)));
                }
            }
        }
        found.sort_by_key(|s| (s.order(), s.0));
        found
    }

    /// Left coset representatives of `h` in the group (least element of each `gH`).
    pub fn left_coset_reps(&self, h: Subgroup) -> Vec<usize> {
        let mut covered = 0u64;
        let mut reps = Vec::new();
        for g in 0..self.order() {
            if covered >> g & 1 == 1 {
                continue;
            }
            reps.push(g);
            for x in h.elements() {
                covered |= 1 << self.mul[g][x];
            }
        }
        reps
    }

    /// Left coset representatives of `h` inside the overgroup `k`.
    pub fn left_coset_reps_in(&self, k: Subgroup, h: Subgroup) -> Vec<usize> {
        let mut covered = 0u64;
        let mut reps = Vec::new();
        for g in k.elements() {
            if covered >> g & 1 == 1 {
                continue;
            }
            reps.push(g);
            for x in h.elements() {
                covered |= 1 << self.mul[g][x];
            }
        }
        reps
    }

    pub fn index(&self, h: Subgroup) -> usize {
        self.order() / h.order()
    }

    /// Representatives (least element) of the double cosets `P\G/Q`.
    pub fn double_coset_reps(&self, p: Subgroup, q: Subgroup) -> Vec<usize> {
        let mut covered = 0u64;
        let mut reps = Vec::new();
        for g in 0..self.order() {
            if covered >> g & 1 == 1 {
                continue;
            }
            reps.push(g);
            for a in p.elements() {
                for b in q.elements() {
                    covered |= 1 << self.mul[self.mul[a][g]][b];
                }
            }
        }
        reps
    }

    /// Cyclic group of order `k`.
    pub fn cyclic(k: usize) -> Result<Self> {
        Self::from_table((0..k).map(|a| (0..k).map(|b| (a + b) % k).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> FiniteGroup {
        // Generated by a transposition and a 3-cycle on three points.
        FiniteGroup::generated_by(&[vec![1, 0, 2], vec![1, 2, 0]], 3).unwrap().0
    }

    #[test]
    fn s3_has_six_subgroups() {
        let g = s3();
        assert_eq!(g.order(), 6);
        let subs = g.subgroups();
        assert_eq!(subs.len(), 6);
        assert!(subs.iter().all(|&s| g.is_subgroup(s)));
    }

    #[test]
    fn cosets_partition() {
        let g = s3();
        for h in g.subgroups() {
            assert_eq!(g.left_coset_reps(h).len() * h.order(), 6);
        }
    }

    #[test]
    fn double_cosets_of_s3() {
        let g = s3();
        let subs = g.subgroups();
        let t = *subs.iter().find(|s| s.order() == 2).unwrap();
        // C2\S3/C2 has two double cosets, of sizes 2 and 4.
        assert_eq!(g.double_coset_reps(t, t).len(), 2);
        assert_eq!(g.double_coset_reps(g.whole(), g.identity_subgroup()), vec![0]);
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(FiniteGroup::from_table(vec![vec![1, 0], vec![0, 1]]).is_err());
    }
}
