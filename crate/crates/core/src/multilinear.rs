//! The multilinear extension, its shared-threshold estimator, and the
//! sample-count formulas for both greedy variants.
//!
//! With thresholds `r^1, .., r^s` drawn once from the unit cube, the
//! estimator is `G(x) = (1/s) Σ_j f({u : r^j_u < x_u})`. Because every query
//! reuses the same thresholds, `G` is a deterministic function of `x` and a
//! single agent's contribution telescopes along a trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::objective::{DecomposableObjective, Tracker};
use crate::Element;

/// Largest ground set [`exact_multilinear`] enumerates.
pub const EXACT_MAX_N: usize = 20;

/// `F(x) = Σ_S f(S) Π_{u∈S} x_u Π_{u∉S} (1 − x_u)`, by enumerating all `2^n` sets.
pub fn exact_multilinear(x: &[f64], f: impl Fn(&[Element]) -> f64) -> Result<f64> {
    let n = x.len();
    if n > EXACT_MAX_N {
        return Err(Error::TooLarge(format!(
            "exact multilinear extension over {n} elements (limit {EXACT_MAX_N})"
        )));
    }
    check_point(x)?;
    let mut total = 0.0;
    let mut set = Vec::with_capacity(n);
    for mask in 0..1usize << n {
        let mut prob = 1.0;
        set.clear();
        for (u, &xu) in x.iter().enumerate() {
            if mask >> u & 1 == 1 {
                prob *= xu;
                set.push(u);
            } else {
                prob *= 1.0 - xu;
            }
        }
        if prob > 0.0 {
            total += prob * f(&set);
        }
    }
    Ok(total)
}

fn check_point(x: &[f64]) -> Result<()> {
    match x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(invalid(format!("fractional coordinate {v} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// `s` threshold vectors drawn uniformly from `[0, 1)^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSamples {
    n: usize,
    s: usize,
    seed: u64,
    /// `data[j * n + u]` is `r^j_u`.
    data: Vec<f64>,
}

/// Draws `s · n` uniforms from a ChaCha8 stream seeded with `seed`.
pub fn draw_thresholds(n: usize, s: usize, seed: u64) -> Result<ThresholdSamples> {
    if s == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    let len = n.checked_mul(s).ok_or_else(|| Error::TooLarge(format!("{s} samples × {n} elements")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..len).map(|_| rng.gen::<f64>()).collect();
    Ok(ThresholdSamples { n, s, seed, data })
}

impl ThresholdSamples {
    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> usize {
        self.s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `r^j_u`.
    pub fn threshold(&self, j: usize, u: Element) -> f64 {
        self.data[j * self.n + u]
    }

    pub fn sample(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    /// `{u : r^j_u < x_u}`.
    pub fn level_set(&self, j: usize, x: &[f64]) -> Vec<Element> {
        self.sample(j)
            .iter()
            .zip(x)
            .enumerate()
            .filter(|(_, (r, xu))| r < xu)
            .map(|(u, _)| u)
            .collect()
    }
}

/// Free-function form of [`ThresholdSamples::level_set`].
pub fn level_set(thresholds: &ThresholdSamples, j: usize, x: &[f64]) -> Vec<Element> {
    thresholds.level_set(j, x)
}

fn check_dims(obj: &DecomposableObjective, thresholds: &ThresholdSamples, x: &[f64]) -> Result<()> {
    if x.len() != obj.len() || thresholds.n != obj.len() {
        return Err(invalid(format!(
            "dimension mismatch: objective {}, thresholds {}, point {}",
            obj.len(),
            thresholds.n,
            x.len()
        )));
    }
    check_point(x)
}

/// `G(x)` evaluated directly from the level sets, summed in sample order.
pub fn estimate_g(obj: &DecomposableObjective, thresholds: &ThresholdSamples, x: &[f64]) -> Result<f64> {
    check_dims(obj, thresholds, x)?;
    let total: f64 = (0..thresholds.s).map(|j| obj.value(&thresholds.level_set(j, x))).sum();
    Ok(total / thresholds.s as f64)
}

/// `G(y + η 1_u) − G(y)` with the moved coordinate clamped to 1.
pub fn gain_monotone(
    obj: &DecomposableObjective,
    thresholds: &ThresholdSamples,
    y: &[f64],
    u: Element,
    eta: f64,
) -> Result<f64> {
    let target = (y.get(u).copied().unwrap_or(0.0) + eta).min(1.0);
    moved_gain(obj, thresholds, y, u, target)
}

/// `G(y + η (1 − y_u) 1_u) − G(y)`; may be negative.
pub fn gain_measured(
    obj: &DecomposableObjective,
    thresholds: &ThresholdSamples,
    y: &[f64],
    u: Element,
    eta: f64,
) -> Result<f64> {
    let yu = y.get(u).copied().unwrap_or(0.0);
    moved_gain(obj, thresholds, y, u, yu + eta * (1.0 - yu))
}

fn moved_gain(
    obj: &DecomposableObjective,
    thresholds: &ThresholdSamples,
    y: &[f64],
    u: Element,
    target: f64,
) -> Result<f64> {
    check_dims(obj, thresholds, y)?;
    if u >= y.len() {
        return Err(Error::ElementOutOfRange { element: u, n: y.len() });
    }
    let mut moved = y.to_vec();
    moved[u] = target;
    Ok(estimate_g(obj, thresholds, &moved)? - estimate_g(obj, thresholds, y)?)
}

/// Incremental form of the estimator along a trajectory that only ever
/// raises coordinates.
///
/// One [`Tracker`] per sample holds that sample's current level set. Moving
/// `y_u` up to `target` changes only the samples with `y_u ≤ r^j_u < target`,
/// so a gain query touches just those samples with one marginal oracle query
/// each; every such query is counted in [`GainEstimator::oracle_calls`].
#[derive(Clone)]
pub struct GainEstimator<'a> {
    obj: &'a DecomposableObjective,
    thresholds: &'a ThresholdSamples,
    /// Per element, sample indices sorted by ascending threshold.
    order: Vec<Vec<u32>>,
    trackers: Vec<Tracker<'a>>,
    y: Vec<f64>,
    oracle_calls: u64,
}

impl<'a> GainEstimator<'a> {
    /// Starts at `y = 0`.
    pub fn new(obj: &'a DecomposableObjective, thresholds: &'a ThresholdSamples) -> Result<Self> {
        let n = obj.len();
        if thresholds.n != n {
            return Err(invalid(format!(
                "thresholds drawn for {} elements, objective has {n}",
                thresholds.n
            )));
        }
        if thresholds.s > u32::MAX as usize {
            return Err(Error::TooLarge(format!("{} samples", thresholds.s)));
        }
        let order = (0..n)
            .map(|u| {
                let mut idx: Vec<u32> = (0..thresholds.s as u32).collect();
                idx.sort_by(|&a, &b| {
                    thresholds
                        .threshold(a as usize, u)
                        .total_cmp(&thresholds.threshold(b as usize, u))
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        let empty = obj.tracker();
        Ok(Self {
            obj,
            thresholds,
            order,
            trackers: vec![empty; thresholds.s],
            y: vec![0.0; n],
            oracle_calls: 0,
        })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    /// `G(y)` at the current point, summed in sample order.
    pub fn value(&self) -> f64 {
        self.trackers.iter().map(|t| t.value()).sum::<f64>() / self.thresholds.s as f64
    }

    /// Positions in `order[u]` of the samples whose level set gains `u`
    /// when `y_u` rises to `target`.
    fn band(&self, u: Element, target: f64) -> std::ops::Range<usize> {
        let order = &self.order[u];
        let th = |j: &u32| self.thresholds.threshold(*j as usize, u);
        let lo = order.partition_point(|j| th(j) < self.y[u]);
        let hi = order.partition_point(|j| th(j) < target);
        lo..hi.max(lo)
    }

    /// `G(y')` − `G(y)` where `y'` equals `y` with `y_u` raised to `target`.
    pub fn gain_to(&mut self, u: Element, target: f64) -> f64 {
        if target <= self.y[u] || self.obj.ground().is_dummy(u) {
            return 0.0;
        }
        let band = self.band(u, target);
        self.oracle_calls += band.len() as u64;
        let total: f64 = self.order[u][band]
            .iter()
            .map(|&j| self.trackers[j as usize].gain(u))
            .sum();
        total / self.thresholds.s as f64
    }

    /// The monotone-mode score `G(y + η 1_u) − G(y)`, clamped at 1.
    pub fn gain_monotone(&mut self, u: Element, eta: f64) -> f64 {
        self.gain_to(u, (self.y[u] + eta).min(1.0))
    }

    /// The measured-mode score `G(y + η(1 − y_u) 1_u) − G(y)`.
    pub fn gain_measured(&mut self, u: Element, eta: f64) -> f64 {
        let yu = self.y[u];
        self.gain_to(u, yu + eta * (1.0 - yu))
    }

    /// Raises `y_u` to `target` (no-op if it is already there).
    pub fn advance(&mut self, u: Element, target: f64) {
        let target = target.min(1.0);
        if target <= self.y[u] {
            return;
        }
        if !self.obj.ground().is_dummy(u) {
            let band = self.band(u, target);
            self.oracle_calls += band.len() as u64;
            for &j in &self.order[u][band] {
                self.trackers[j as usize].insert(u);
            }
        }
        self.y[u] = target;
    }

    pub fn advance_monotone(&mut self, u: Element, eta: f64) {
        self.advance(u, (self.y[u] + eta).min(1.0));
    }

    pub fn advance_measured(&mut self, u: Element, eta: f64) {
        let yu = self.y[u];
        self.advance(u, yu + eta * (1.0 - yu));
    }
}

/// Number of rounds `T = ⌈1/η⌉`, robust to `1/η` landing a hair above an integer.
pub fn rounds_for_step(eta: f64) -> Result<usize> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(format!("step size must lie in (0, 1], got {eta}")));
    }
    Ok(((1.0 / eta) - 1e-9).ceil().max(1.0) as usize)
}

fn sample_formula(coef: f64, r: usize, r_pow: i32, t: usize, t_pow: i32, n: usize, gamma: f64) -> Result<usize> {
    if r == 0 || t == 0 || n == 0 {
        return Err(invalid("rank, rounds and ground size must be positive"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("failure probability must lie in (0, 1], got {gamma}")));
    }
    let raw = coef * (r as f64).powi(r_pow) * (t as f64).powi(t_pow) * (n as f64 / gamma).ln();
    if !raw.is_finite() || raw > u32::MAX as f64 {
        return Err(Error::TooLarge(format!("{raw:.3e} threshold samples")));
    }
    // Shave rounding noise so exact integers are not bumped up by one.
    Ok(((raw * (1.0 - 1e-12)).ceil() as usize).max(1))
}

/// `⌈6 r² T⁴ ln(n/γ)⌉`, the sample count for the monotone algorithm.
pub fn samples_monotone(r: usize, t: usize, n: usize, gamma: f64) -> Result<usize> {
    sample_formula(6.0, r, 2, t, 4, n, gamma)
}

/// `⌈48 r³ T⁷ ln(n/γ)⌉`, the sample count for the measured algorithm; `n`
/// counts the dummy elements too.
pub fn samples_nonmonotone(r: usize, t: usize, n: usize, gamma: f64) -> Result<usize> {
    sample_formula(48.0, r, 3, t, 7, n, gamma)
}
