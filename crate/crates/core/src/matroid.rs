//! Matroid independence oracles and basis-exchange primitives.
//!
//! Every set argument is a sorted, duplicate-free slice of element indices.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::objective::{canonical_set, with_element};
use crate::Element;

/// An independence oracle over the ground set `{0, .., ground_size - 1}`.
pub trait Matroid: Send + Sync {
    fn ground_size(&self) -> usize;

    /// Membership of a sorted set in the independent family. Sets containing
    /// out-of-range elements are never independent.
    fn is_independent(&self, set: &[Element]) -> bool;

    /// Size of a maximum independent set; the matroid greedy is exact.
    fn rank(&self) -> usize {
        let mut basis = Vec::new();
        for u in 0..self.ground_size() {
            basis.push(u);
            if !self.is_independent(&basis) {
                basis.pop();
            }
        }
        basis.len()
    }

    fn is_basis(&self, set: &[Element]) -> bool {
        set.len() == self.rank() && self.is_independent(set)
    }
}

impl<M: Matroid + ?Sized> Matroid for &M {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }

    fn is_independent(&self, set: &[Element]) -> bool {
        (**self).is_independent(set)
    }

    fn rank(&self) -> usize {
        (**self).rank()
    }
}

/// `S` is independent iff `|S| ≤ r`.
#[derive(Clone, Debug, PartialEq)]
pub struct CardinalityMatroid {
    n: usize,
    r: usize,
}

impl CardinalityMatroid {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if r > n {
            return Err(invalid(format!("cardinality bound {r} exceeds ground size {n}")));
        }
        Ok(Self { n, r })
    }

    pub fn bound(&self) -> usize {
        self.r
    }
}

impl Matroid for CardinalityMatroid {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn is_independent(&self, set: &[Element]) -> bool {
        set.len() <= self.r && set.iter().all(|&u| u < self.n)
    }

    fn rank(&self) -> usize {
        self.r
    }
}

/// `S` is independent iff `|S ∩ P_i| ≤ c_i` for every part `P_i`.
///
/// The parts must partition the ground set exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionMatroid {
    part_of: Vec<usize>,
    parts: Vec<Vec<Element>>,
    capacities: Vec<usize>,
    rank: usize,
}

impl PartitionMatroid {
    pub fn new(n: usize, parts: Vec<Vec<Element>>, capacities: Vec<usize>) -> Result<Self> {
        if parts.len() != capacities.len() {
            return Err(invalid(format!(
                "{} parts but {} capacities",
                parts.len(),
                capacities.len()
            )));
        }
        let mut part_of = vec![usize::MAX; n];
        let mut sorted_parts = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            for &u in part {
                if u >= n {
                    return Err(Error::ElementOutOfRange { element: u, n });
                }
                if part_of[u] != usize::MAX {
                    return Err(invalid(format!("element {u} appears in more than one part")));
                }
                part_of[u] = i;
            }
            sorted_parts.push(canonical_set(part));
        }
        if let Some(u) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(invalid(format!("element {u} is not covered by any part")));
        }
        let rank = sorted_parts
            .iter()
            .zip(&capacities)
            .map(|(p, &c)| p.len().min(c))
            .sum();
        Ok(Self {
            part_of,
            parts: sorted_parts,
            capacities,
            rank,
        })
    }

    pub fn parts(&self) -> &[Vec<Element>] {
        &self.parts
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }
}

impl Matroid for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.part_of.len()
    }

    fn is_independent(&self, set: &[Element]) -> bool {
        let mut used = vec![0usize; self.parts.len()];
        for &u in set {
            let Some(&p) = self.part_of.get(u) else {
                return false;
            };
            used[p] += 1;
            if used[p] > self.capacities[p] {
                return false;
            }
        }
        true
    }

    fn rank(&self) -> usize {
        self.rank
    }
}

/// A matroid extended by `dummies` extra elements and truncated at `cap`.
///
/// `S` is independent iff its real part is independent in the inner matroid,
/// every dummy index is in range, and `|S| ≤ cap`. Truncation keeps this a
/// matroid, and with `cap` equal to the inner rank any independent set can
/// be padded to a basis with dummies.
#[derive(Clone, Debug)]
pub struct DummyExtension<M> {
    inner: M,
    real: usize,
    dummies: usize,
    cap: usize,
}

impl<M: Matroid> DummyExtension<M> {
    pub fn new(inner: M, dummies: usize, cap: usize) -> Self {
        let real = inner.ground_size();
        Self {
            inner,
            real,
            dummies,
            cap,
        }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    /// Index of the first dummy.
    pub fn first_dummy(&self) -> Element {
        self.real
    }

    pub fn dummy_count(&self) -> usize {
        self.dummies
    }

    pub fn is_dummy(&self, u: Element) -> bool {
        u >= self.real && u < self.real + self.dummies
    }
}

impl<M: Matroid> Matroid for DummyExtension<M> {
    fn ground_size(&self) -> usize {
        self.real + self.dummies
    }

    fn is_independent(&self, set: &[Element]) -> bool {
        if set.len() > self.cap || set.last().is_some_and(|&u| u >= self.real + self.dummies) {
            return false;
        }
        let split = set.partition_point(|&u| u < self.real);
        self.inner.is_independent(&set[..split])
    }

    fn rank(&self) -> usize {
        self.cap.min(self.inner.rank() + self.dummies)
    }
}

/// Serialized matroid description used by configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatroidSpec {
    Cardinality { r: usize },
    Partition {
        parts: Vec<Vec<Element>>,
        capacities: Vec<usize>,
    },
}

impl MatroidSpec {
    pub fn build(&self, n: usize) -> Result<AnyMatroid> {
        Ok(match self {
            MatroidSpec::Cardinality { r } => AnyMatroid::Cardinality(CardinalityMatroid::new(n, *r)?),
            MatroidSpec::Partition { parts, capacities } => {
                AnyMatroid::Partition(PartitionMatroid::new(n, parts.clone(), capacities.clone())?)
            }
        })
    }
}

/// One of the built-in matroid families.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyMatroid {
    Cardinality(CardinalityMatroid),
    Partition(PartitionMatroid),
}

impl Matroid for AnyMatroid {
    fn ground_size(&self) -> usize {
        match self {
            AnyMatroid::Cardinality(m) => m.ground_size(),
            AnyMatroid::Partition(m) => m.ground_size(),
        }
    }

    fn is_independent(&self, set: &[Element]) -> bool {
        match self {
            AnyMatroid::Cardinality(m) => m.is_independent(set),
            AnyMatroid::Partition(m) => m.is_independent(set),
        }
    }

    fn rank(&self) -> usize {
        match self {
            AnyMatroid::Cardinality(m) => m.rank(),
            AnyMatroid::Partition(m) => m.rank(),
        }
    }
}

/// Elements `u ∉ B` with `B ∪ {u}` independent, in ascending order.
pub fn feasible_extensions<M: Matroid + ?Sized>(mat: &M, base: &[Element]) -> Result<Vec<Element>> {
    if !mat.is_independent(base) {
        return Err(Error::NotIndependent);
    }
    Ok((0..mat.ground_size())
        .filter(|u| base.binary_search(u).is_err())
        .filter(|&u| mat.is_independent(&with_element(base, u)))
        .collect())
}

fn replace(set: &[Element], out: Element, inn: Element) -> Vec<Element> {
    let mut next: Vec<Element> = set.iter().copied().filter(|&v| v != out).collect();
    let pos = next.partition_point(|&v| v < inn);
    next.insert(pos, inn);
    next
}

/// The first `e ∈ B2 \ B1` (ascending) for which `(B1 \ {b}) ∪ {e}` is a basis.
pub fn find_exchange<M: Matroid + ?Sized>(
    mat: &M,
    b1: &[Element],
    b2: &[Element],
    b: Element,
) -> Result<Element> {
    if b1.binary_search(&b).is_err() || b2.binary_search(&b).is_ok() {
        return Err(invalid(format!("element {b} is not in B1 \\ B2")));
    }
    b2.iter()
        .copied()
        .filter(|e| b1.binary_search(e).is_err())
        .find(|&e| mat.is_independent(&replace(b1, b, e)))
        .ok_or(Error::NoExchange(b))
}

/// Like [`find_exchange`] but also requires `(B2 \ {e}) ∪ {b}` to be a basis,
/// so that either side of a swap-rounding step stays a basis.
pub fn find_symmetric_exchange<M: Matroid + ?Sized>(
    mat: &M,
    b1: &[Element],
    b2: &[Element],
    b: Element,
) -> Result<Element> {
    if b1.binary_search(&b).is_err() || b2.binary_search(&b).is_ok() {
        return Err(invalid(format!("element {b} is not in B1 \\ B2")));
    }
    b2.iter()
        .copied()
        .filter(|e| b1.binary_search(e).is_err())
        .find(|&e| mat.is_independent(&replace(b1, b, e)) && mat.is_independent(&replace(b2, e, b)))
        .ok_or(Error::NoExchange(b))
}

/// Randomized merge of two weighted bases into one, as in swap rounding.
///
/// While the bases differ, the smallest `b ∈ B1 \ B2` is exchanged with a
/// partner `e`: with probability `w1 / (w1 + w2)` B2 takes `b`, otherwise B1
/// takes `e`.
pub fn merge_bases<M: Matroid + ?Sized, R: Rng + ?Sized>(
    mat: &M,
    w1: f64,
    b1: &[Element],
    w2: f64,
    b2: &[Element],
    rng: &mut R,
) -> Result<(f64, Vec<Element>)> {
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(invalid(format!("merge weights must be positive, got {w1} and {w2}")));
    }
    if b1.len() != b2.len() {
        return Err(Error::SizeMismatch(b1.len(), b2.len()));
    }
    if !mat.is_independent(b1) || !mat.is_independent(b2) {
        return Err(Error::NotIndependent);
    }
    let keep_first = w1 / (w1 + w2);
    let mut left = b1.to_vec();
    let mut right = b2.to_vec();
    while let Some(&b) = left.iter().find(|u| right.binary_search(u).is_err()) {
        let e = find_symmetric_exchange(mat, &left, &right, b)?;
        if rng.gen::<f64>() < keep_first {
            right = replace(&right, e, b);
        } else {
            left = replace(&left, b, e);
        }
    }
    Ok((w1 + w2, left))
}

/// Greedy basis over a uniformly shuffled element order.
pub fn random_basis<M: Matroid + ?Sized, R: Rng + ?Sized>(mat: &M, rng: &mut R) -> Vec<Element> {
    let mut order: Vec<Element> = (0..mat.ground_size()).collect();
    order.shuffle(rng);
    let mut basis: Vec<Element> = Vec::new();
    for u in order {
        let grown = with_element(&basis, u);
        if mat.is_independent(&grown) {
            basis = grown;
        }
    }
    basis
}
