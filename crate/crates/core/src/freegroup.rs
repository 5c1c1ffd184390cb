//! Free-group words, conjugacy classes, automorphisms and the shortlex
//! enumerations that index every norm vector.
//!
//! Letters are signed generator indices: `+i` is `x_i`, `-i` is `x_i^{-1}`.
//! The letter order is `x1 < x1^-1 < x2 < x2^-1 < ...`; words are compared
//! shortlex over that order.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A signed generator index, never zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter(i32);

impl Letter {
    pub fn new(signed: i32) -> Result<Self> {
        if signed == 0 {
            return Err(Error::Validation("generator index 0 is not allowed".into()));
        }
        Ok(Letter(signed))
    }

    pub fn gen(i: usize) -> Self {
        Letter(i as i32)
    }

    pub fn gen_inv(i: usize) -> Self {
        Letter(-(i as i32))
    }

    /// 1-based generator index.
    pub fn index(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    /// Position in the letter order `x1 < x1^-1 < x2 < ...`.
    pub fn rank(self) -> usize {
        2 * (self.index() - 1) + usize::from(self.is_inverse())
    }

    fn from_rank(rank: usize) -> Self {
        let i = rank / 2 + 1;
        if rank.is_multiple_of(2) {
            Letter::gen(i)
        } else {
            Letter::gen_inv(i)
        }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "~x{}", self.index())
        } else {
            write!(f, "x{}", self.index())
        }
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    /// Reduces a raw signed-index sequence, validating each index against `n`.
    pub fn from_signed(raw: &[i32], n: usize) -> Result<Self> {
        let mut letters = Vec::with_capacity(raw.len());
        for &s in raw {
            let l = Letter::new(s)?;
            if l.index() > n {
                return Err(Error::Validation(format!(
                    "generator index {} exceeds basis size {n}",
                    l.index()
                )));
            }
            letters.push(l);
        }
        Ok(Word::reduce(letters))
    }

    pub fn gen(i: usize) -> Self {
        Word { letters: vec![Letter::gen(i)] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Largest generator index used (0 for the empty word).
    pub fn max_index(&self) -> usize {
        self.letters.iter().map(|l| l.index()).max().unwrap_or(0)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => self.letters.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// Splits `self = conjugator * core * conjugator^-1` with `core`
    /// cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let l = &self.letters;
        let mut i = 0;
        let mut j = l.len();
        while j >= i + 2 && l[i] == l[j - 1].inverse() {
            i += 1;
            j -= 1;
        }
        (
            Word { letters: l[i..j].to_vec() },
            Word { letters: l[..i].to_vec() },
        )
    }

    /// Shortlex-least cyclic rotation of a cyclically reduced word.
    pub fn least_rotation(&self) -> Word {
        let k = self.letters.len();
        if k == 0 {
            return Word::empty();
        }
        let mut best: Option<Vec<Letter>> = None;
        for r in 0..k {
            let rot: Vec<Letter> = self.letters[r..]
                .iter()
                .chain(self.letters[..r].iter())
                .copied()
                .collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
        Word { letters: best.unwrap_or_default() }
    }

    /// Parses whitespace-separated tokens `x1 ~x2 ...`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let (inv, body) = match tok.strip_prefix('~') {
                Some(rest) => (true, rest),
                None => (false, tok),
            };
            let idx: usize = body
                .strip_prefix('x')
                .and_then(|d| d.parse().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| Error::Validation(format!("bad word token `{tok}`")))?;
            letters.push(if inv { Letter::gen_inv(idx) } else { Letter::gen(idx) });
        }
        Ok(Word::reduce(letters))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A conjugacy class, stored by its canonical representative: the
/// shortlex-least rotation of the cyclically reduced core.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConjClass {
    rep: Word,
}

impl ConjClass {
    pub fn of(w: &Word) -> Self {
        let (core, _) = w.cyclic_reduce();
        ConjClass { rep: core.least_rotation() }
    }

    pub fn rep(&self) -> &Word {
        &self.rep
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rep)
    }
}

/// An automorphism of `F_n` given by the images of the basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeAutomorphism {
    images: Vec<Word>,
}

impl FreeAutomorphism {
    /// Builds an automorphism, rejecting endomorphisms that are not invertible.
    pub fn new(images: Vec<Word>) -> Result<Self> {
        let n = images.len();
        if let Some(w) = images.iter().find(|w| w.max_index() > n) {
            return Err(Error::Validation(format!(
                "image `{w}` uses a generator outside 1..={n}"
            )));
        }
        let phi = FreeAutomorphism { images };
        phi.inverse()?;
        Ok(phi)
    }

    pub fn identity(n: usize) -> Self {
        FreeAutomorphism {
            images: (1..=n).map(Word::gen).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn apply(&self, w: &Word) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in w.letters() {
            let img = &self.images[l.index() - 1];
            if l.is_inverse() {
                for &m in img.letters.iter().rev() {
                    push_reduced(&mut out, m.inverse());
                }
            } else {
                for &m in &img.letters {
                    push_reduced(&mut out, m);
                }
            }
        }
        Word { letters: out }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &FreeAutomorphism) -> FreeAutomorphism {
        FreeAutomorphism {
            images: other.images.iter().map(|w| self.apply(w)).collect(),
        }
    }

    /// Inverse computed by Stallings folding of the image rose.
    pub fn inverse(&self) -> Result<FreeAutomorphism> {
        invert_by_folding(&self.images, self.images.len())
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, w)| *w == Word::gen(i + 1))
    }
}

impl fmt::Display for FreeAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "x{} -> {}", i + 1, w)?;
        }
        Ok(())
    }
}

fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&l.inverse()) {
        out.pop();
    } else {
        out.push(l);
    }
}

#[derive(Clone, Debug)]
struct FoldEdge {
    from: usize,
    to: usize,
    /// Target-alphabet generator read when traversing `from -> to`.
    label: usize,
    /// Source word read when traversing `from -> to`.
    source: Word,
}

/// Inverts the homomorphism `F(x_1..x_n) -> F(y_1..y_m)`, `x_j -> images[j]`.
///
/// Folds the rose of image words while carrying source-word labels; every
/// fold is a gauge change at a non-base vertex so based loops keep their
/// source reading. Succeeds iff the map is an isomorphism.
pub(crate) fn invert_by_folding(images: &[Word], target_rank: usize) -> Result<FreeAutomorphism> {
    let n = images.len();
    if n != target_rank {
        return Err(Error::Validation(format!(
            "rank mismatch: {n} images into a free group of rank {target_rank}"
        )));
    }
    let mut edges: Vec<Option<FoldEdge>> = Vec::new();
    let mut next_vertex = 1usize;
    for (j, w) in images.iter().enumerate() {
        if w.is_empty() {
            return Err(Error::Validation(format!("image of x{} is trivial", j + 1)));
        }
        let len = w.len();
        let mut prev = 0usize;
        for (i, &l) in w.letters().iter().enumerate() {
            let cur = if i + 1 == len {
                0
            } else {
                next_vertex += 1;
                next_vertex - 1
            };
            let source = if i == 0 { Word::gen(j + 1) } else { Word::empty() };
            let e = if l.is_inverse() {
                FoldEdge { from: cur, to: prev, label: l.index(), source: source.inverse() }
            } else {
                FoldEdge { from: prev, to: cur, label: l.index(), source }
            };
            edges.push(Some(e));
            prev = cur;
        }
    }

    loop {
        // Outgoing labels: (vertex, signed label) -> (edge, other end, source read outward).
        let mut seen: HashMap<(usize, i64), (usize, usize, Word)> = HashMap::new();
        let mut fold: Option<((usize, usize, Word), (usize, usize, Word), usize)> = None;
        'scan: for (idx, e) in edges.iter().enumerate() {
            let Some(e) = e else { continue };
            let ends = [
                (e.from, e.label as i64, e.to, e.source.clone()),
                (e.to, -(e.label as i64), e.from, e.source.inverse()),
            ];
            for (u, lab, other, src) in ends {
                if let Some(prev) = seen.get(&(u, lab)) {
                    if prev.0 != idx {
                        fold = Some((prev.clone(), (idx, other, src), u));
                        break 'scan;
                    }
                } else {
                    seen.insert((u, lab), (idx, other, src));
                }
            }
        }
        let Some(((e1, mut v1, mut l1), (e2, mut v2, mut l2), _u)) = fold else { break };
        let (mut keep, mut drop) = (e1, e2);
        if v1 == v2 {
            if l1 != l2 {
                return Err(Error::Validation(
                    "images do not freely generate: the map is not injective".into(),
                ));
            }
            edges[drop] = None;
            continue;
        }
        if v2 == 0 {
            std::mem::swap(&mut v1, &mut v2);
            std::mem::swap(&mut l1, &mut l2);
            std::mem::swap(&mut keep, &mut drop);
        }
        // Gauge at v2 by c = l1^-1 l2, then identify v2 with v1.
        let c = l1.inverse().mul(&l2);
        let c_inv = c.inverse();
        for e in edges.iter_mut().flatten() {
            if e.from == v2 {
                e.source = c.mul(&e.source);
            }
            if e.to == v2 {
                e.source = e.source.mul(&c_inv);
            }
        }
        for e in edges.iter_mut().flatten() {
            if e.from == v2 {
                e.from = v1;
            }
            if e.to == v2 {
                e.to = v1;
            }
        }
        let _ = keep;
        edges[drop] = None;
    }

    let live: Vec<&FoldEdge> = edges.iter().flatten().collect();
    let mut inverse_images: Vec<Option<Word>> = vec![None; n];
    for e in &live {
        if e.from != 0 || e.to != 0 {
            return Err(Error::Validation(
                "images do not generate: folded graph has extra vertices".into(),
            ));
        }
        if e.label == 0 || e.label > n || inverse_images[e.label - 1].is_some() {
            return Err(Error::Validation("images do not generate the free group".into()));
        }
        inverse_images[e.label - 1] = Some(e.source.clone());
    }
    let images = inverse_images
        .into_iter()
        .map(|w| w.ok_or_else(|| Error::Validation("images do not generate the free group".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok(FreeAutomorphism { images })
}

/// All nonempty reduced words of length `<= horizon` in shortlex order.
pub fn enumerate_words(n: usize, horizon: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut layer: Vec<Word> = vec![Word::empty()];
    for _ in 0..horizon {
        let mut next = Vec::new();
        for w in &layer {
            for r in 0..2 * n {
                let l = Letter::from_rank(r);
                if w.letters.last() == Some(&l.inverse()) {
                    continue;
                }
                let mut letters = w.letters.clone();
                letters.push(l);
                next.push(Word { letters });
            }
        }
        // Extending a sorted layer by letters in rank order keeps it sorted.
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Canonical representatives of all nontrivial conjugacy classes with
/// cyclic length `<= horizon`, shortlex on representatives.
pub fn enumerate_classes(n: usize, horizon: usize) -> Vec<ConjClass> {
    enumerate_words(n, horizon)
        .into_iter()
        .filter(|w| w.is_cyclically_reduced() && w.least_rotation() == *w)
        .map(|rep| ConjClass { rep })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert!(Word::from_signed(&[1, -1], 2).unwrap().is_empty());
        assert_eq!(Word::from_signed(&[1, 2], 2).unwrap(), w("x1 x2"));
        assert_eq!(Word::from_signed(&[1, 2, -2, 1], 2).unwrap(), w("x1 x1"));
        assert!(Word::from_signed(&[3], 2).is_err());
        assert!(Word::from_signed(&[0], 2).is_err());
    }

    #[test]
    fn cyclic_reduce_examples() {
        assert_eq!(w("x1 x2 ~x1").cyclic_reduce(), (w("x2"), w("x1")));
        assert_eq!(w("x1 x2").cyclic_reduce(), (w("x1 x2"), Word::empty()));
        assert_eq!(w("x1 x2 x2 ~x1").cyclic_reduce(), (w("x2 x2"), w("x1")));
    }

    #[test]
    fn apply_examples() {
        let id = FreeAutomorphism::identity(2);
        assert_eq!(id.apply(&w("x1 ~x2 x1")), w("x1 ~x2 x1"));
        let swap = FreeAutomorphism::new(vec![w("x2"), w("x1")]).unwrap();
        assert_eq!(swap.apply(&w("x1 ~x2")), w("x2 ~x1"));
        let t = FreeAutomorphism::new(vec![w("x1"), w("x1 x2")]).unwrap();
        assert_eq!(t.apply(&w("x2")), w("x1 x2"));
    }

    #[test]
    fn non_invertible_rejected() {
        assert!(FreeAutomorphism::new(vec![w("x1 x1"), w("x2")]).is_err());
        assert!(FreeAutomorphism::new(vec![w("x1"), w("x1")]).is_err());
        assert!(FreeAutomorphism::new(vec![w("x1 x2"), w("x2 x1")]).is_err());
    }

    #[test]
    fn inverse_of_nielsen_product() {
        let phi = FreeAutomorphism::new(vec![w("x1 x2 x1"), w("x2 x1")]).unwrap();
        let inv = phi.inverse().unwrap();
        assert!(phi.compose(&inv).is_identity());
        assert!(inv.compose(&phi).is_identity());
    }

    #[test]
    fn enumerate_words_examples() {
        let one = enumerate_words(1, 1);
        assert_eq!(one, vec![w("x1"), w("~x1")]);
        let two = enumerate_words(2, 1);
        assert_eq!(two, vec![w("x1"), w("~x1"), w("x2"), w("~x2")]);
        assert_eq!(enumerate_words(2, 2).len(), 16);
    }

    #[test]
    fn enumerate_classes_examples() {
        let c: Vec<String> = enumerate_classes(2, 1).iter().map(|c| c.to_string()).collect();
        assert_eq!(c, ["[x1]", "[~x1]", "[x2]", "[~x2]"]);
        let c: Vec<String> = enumerate_classes(1, 2).iter().map(|c| c.to_string()).collect();
        assert_eq!(c, ["[x1]", "[~x1]", "[x1 x1]", "[~x1 ~x1]"]);
        let c2 = enumerate_classes(2, 2);
        assert!(c2.contains(&ConjClass::of(&w("x1 x2"))));
        assert_eq!(ConjClass::of(&w("x2 x1")), ConjClass::of(&w("x1 x2")));
        assert_eq!(c2.iter().filter(|c| c.rep().len() == 2).count(), 8);
    }

    #[test]
    fn display_roundtrip() {
        let x = w("x1 ~x2 x3");
        assert_eq!(Word::parse(&x.to_string()).unwrap(), x);
    }
}
