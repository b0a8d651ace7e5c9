//! Convex combinations of independent sets and randomized swap rounding.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matroid::{merge_bases, DummyExtension, Matroid};
use crate::objective::{canonical_set, with_element};
use crate::Element;

/// Terms lighter than this are dropped after a split.
pub const WEIGHT_FLOOR: f64 = 1e-12;

const NORMALIZED_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub weight: f64,
    pub set: Vec<Element>,
}

/// A fractional point `y = Σ_k w_k 1_{I_k}` kept as its weighted sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexCombination {
    n: usize,
    terms: Vec<Term>,
}

impl ConvexCombination {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: Vec::new(),
        }
    }

    /// The vertex `1_S` with weight one.
    pub fn single(n: usize, set: &[Element]) -> Result<Self> {
        let mut comb = Self::new(n);
        comb.push(1.0, set)?;
        Ok(comb)
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (f64, Vec<Element>)>) -> Result<Self> {
        let mut comb = Self::new(n);
        for (w, set) in terms {
            comb.push(w, &set)?;
        }
        Ok(comb)
    }

    pub fn push(&mut self, weight: f64, set: &[Element]) -> Result<()> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(invalid(format!("term weight must be positive, got {weight}")));
        }
        if let Some(&u) = set.iter().find(|&&u| u >= self.n) {
            return Err(Error::ElementOutOfRange { element: u, n: self.n });
        }
        self.terms.push(Term {
            weight,
            set: canonical_set(set),
        });
        Ok(())
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// The represented point `Σ_k w_k 1_{I_k}`.
    pub fn point(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for term in &self.terms {
            for &u in &term.set {
                y[u] += term.weight;
            }
        }
        y
    }

    /// Merges terms with identical sets and drops negligible weights.
    pub fn coalesce(&mut self) {
        self.terms.sort_by(|a, b| a.set.cmp(&b.set));
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for term in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.set == term.set => last.weight += term.weight,
                _ => merged.push(term),
            }
        }
        merged.retain(|t| t.weight >= WEIGHT_FLOOR);
        self.terms = merged;
    }

    pub fn all_independent<M: Matroid + ?Sized>(&self, mat: &M) -> bool {
        self.terms.iter().all(|t| mat.is_independent(&t.set))
    }
}

/// Divides every weight by the total so the weights sum to one.
pub fn normalize_combination(comb: &ConvexCombination) -> Result<ConvexCombination> {
    let total = comb.total_weight();
    if !(total > 0.0) {
        return Err(Error::NotNormalized(total));
    }
    let mut out = comb.clone();
    for term in &mut out.terms {
        term.weight /= total;
    }
    Ok(out)
}

/// Rounds a normalized combination of equal-size bases to a single basis by
/// folding [`merge_bases`] over the terms from left to right.
pub fn swap_round<M: Matroid + ?Sized, R: Rng + ?Sized>(
    comb: &ConvexCombination,
    mat: &M,
    rng: &mut R,
) -> Result<Vec<Element>> {
    let total = comb.total_weight();
    if (total - 1.0).abs() > NORMALIZED_TOLERANCE {
        return Err(Error::NotNormalized(total));
    }
    let mut terms = comb.terms.iter();
    let first = terms.next().ok_or(Error::NotNormalized(0.0))?;
    let (mut weight, mut basis) = (first.weight, first.set.clone());
    for term in terms {
        (weight, basis) = merge_bases(mat, weight, &basis, term.weight, &term.set, rng)?;
    }
    Ok(basis)
}

/// Chooses which element of `set` to give up so that `u` fits; dummies go
/// first, then real elements in ascending order.
fn repair_exchange<M: Matroid + ?Sized>(mat: &M, set: &[Element], u: Element, first_dummy: usize) -> Option<Vec<Element>> {
    let dummies = set.iter().rev().take_while(|&&v| v >= first_dummy);
    let reals = set.iter().take_while(|&&v| v < first_dummy);
    dummies.chain(reals).find_map(|&e| {
        let swapped: Vec<Element> = set.iter().copied().filter(|&v| v != e).collect();
        let swapped = with_element(&swapped, u);
        mat.is_independent(&swapped).then_some(swapped)
    })
}

/// Moves the represented point from `y` to `y + η(1 − y_u) 1_u`.
///
/// Every term without `u` splits into `(w(1−η), I)` and `(wη, I ∪ {u})`.
/// When `I ∪ {u}` is dependent, an element of `I` is exchanged out instead
/// (dummies preferred); such repairs are counted in the second return value,
/// and the point is only exact when that count is zero. Elements at or above
/// `first_dummy` are treated as dummies.
pub fn measured_split_update<M: Matroid + ?Sized>(
    comb: &ConvexCombination,
    mat: &M,
    u: Element,
    eta: f64,
    first_dummy: usize,
) -> Result<(ConvexCombination, usize)> {
    if u >= comb.n {
        return Err(Error::ElementOutOfRange { element: u, n: comb.n });
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(format!("step size must lie in (0, 1], got {eta}")));
    }
    let mut out = ConvexCombination::new(comb.n);
    let mut repairs = 0;
    for term in &comb.terms {
        if term.set.binary_search(&u).is_ok() {
            out.terms.push(term.clone());
            continue;
        }
        let grown = with_element(&term.set, u);
        let moved = if mat.is_independent(&grown) {
            grown
        } else {
            repairs += 1;
            repair_exchange(mat, &term.set, u, first_dummy).ok_or(Error::NoExchange(u))?
        };
        let stay = term.weight * (1.0 - eta);
        if stay > 0.0 {
            out.terms.push(Term {
                weight: stay,
                set: term.set.clone(),
            });
        }
        out.terms.push(Term {
            weight: term.weight * eta,
            set: moved,
        });
    }
    out.coalesce();
    Ok((normalize_combination(&out)?, repairs))
}

/// Pads every term with unused dummies until it is a basis of `ext`.
pub fn pad_to_basis<M: Matroid>(comb: &ConvexCombination, ext: &DummyExtension<M>) -> Result<ConvexCombination> {
    let rank = ext.rank();
    let dummies: Vec<Element> = (ext.first_dummy()..ext.ground_size()).collect();
    let mut out = ConvexCombination::new(comb.n.max(ext.ground_size()));
    for term in &comb.terms {
        let mut set = term.set.clone();
        for &d in &dummies {
            if set.len() >= rank {
                break;
            }
            if set.binary_search(&d).is_err() {
                set = with_element(&set, d);
            }
        }
        if !ext.is_basis(&set) {
            return Err(Error::NotIndependent);
        }
        out.terms.push(Term {
            weight: term.weight,
            set,
        });
    }
    Ok(out)
}

/// Removes elements at or above `first_dummy`.
pub fn strip_dummies(set: &[Element], first_dummy: usize) -> Vec<Element> {
    set.iter().copied().filter(|&u| u < first_dummy).collect()
}
