//! Empirical privacy checks: exact enumeration of the pick-sequence
//! distribution on tiny instances, and a Monte-Carlo simulation of the
//! multiplicative-decay process that drives the rank-invariant budget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgoConfig, GreedyWalk, SampleMode, Variant};
use crate::error::{invalid, Error, Result};
use crate::matroid::{DummyExtension, Matroid};
use crate::multilinear::{draw_thresholds, rounds_for_step};
use crate::objective::DecomposableObjective;
use crate::privacy::{
    eps0_monotone, eps0_nonmonotone, exp_mechanism_probabilities, monotone_guarantee, nonmonotone_guarantee,
    RoundBudget,
};
use crate::Element;

/// Enumeration refuses instances with more pick sequences than this.
pub const MAX_SEQUENCES: f64 = 1e5;

/// Probability of one complete pick sequence under both inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceProbability {
    pub picks: Vec<Element>,
    pub prob_a: f64,
    pub prob_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Guarantee the algorithm claims at this `(ε₀, δ)`.
    pub epsilon_claimed: f64,
    /// Smallest `ε′` whose hockey-stick divergence is at most `δ` in both directions.
    pub epsilon_observed: f64,
    /// Largest `|ln(P_A / P_B)|` over all sequences.
    pub max_log_ratio: f64,
    pub delta: f64,
    /// How far the divergence at the claimed `ε` exceeds `δ` (0 when it holds).
    pub delta_excess: f64,
    pub eps0: f64,
    pub sequences: Vec<SequenceProbability>,
}

/// `Σ max(0, P − e^ε Q)` over the enumerated sequences.
pub fn hockey_stick(pairs: &[(f64, f64)], epsilon: f64) -> f64 {
    let factor = epsilon.exp();
    pairs.iter().map(|&(p, q)| (p - factor * q).max(0.0)).sum()
}

fn two_sided(pairs: &[(f64, f64)], swapped: &[(f64, f64)], epsilon: f64) -> f64 {
    hockey_stick(pairs, epsilon).max(hockey_stick(swapped, epsilon))
}

/// Smallest `ε ≥ 0` with the two-sided divergence at most `δ`, by bisection.
fn observed_epsilon(pairs: &[(f64, f64)], delta: f64, upper: f64) -> f64 {
    let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(p, q)| (q, p)).collect();
    if two_sided(pairs, &swapped, 0.0) <= delta {
        return 0.0;
    }
    let mut hi = upper.max(1e-12);
    while two_sided(pairs, &swapped, hi) > delta {
        hi *= 2.0;
        if hi > 1e6 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if two_sided(pairs, &swapped, mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

struct Enumeration<'a, M: Matroid + ?Sized> {
    eps0: f64,
    sensitivity: f64,
    out: Vec<SequenceProbability>,
    _walk: std::marker::PhantomData<&'a M>,
}

impl<'a, M: Matroid + ?Sized> Enumeration<'a, M> {
    fn descend(
        &mut self,
        mut a: GreedyWalk<'a, M>,
        mut b: GreedyWalk<'a, M>,
        picks: &mut Vec<Element>,
        pa: f64,
        pb: f64,
    ) -> Result<()> {
        if a.is_done() {
            self.out.push(SequenceProbability {
                picks: picks.clone(),
                prob_a: pa,
                prob_b: pb,
            });
            return Ok(());
        }
        let candidates = a.candidates()?;
        if candidates.is_empty() {
            a.close_round();
            b.close_round();
            return self.descend(a, b, picks, pa, pb);
        }
        let probs_a = exp_mechanism_probabilities(&a.scores(&candidates), self.eps0, self.sensitivity)?;
        let probs_b = exp_mechanism_probabilities(&b.scores(&candidates), self.eps0, self.sensitivity)?;
        for (k, &u) in candidates.iter().enumerate() {
            let (mut na, mut nb) = (a.clone(), b.clone());
            na.pick(u);
            nb.pick(u);
            picks.push(u);
            self.descend(na, nb, picks, pa * probs_a[k], pb * probs_b[k])?;
            picks.pop();
        }
        Ok(())
    }
}

/// Exact distribution of the pick sequence of one continuous greedy variant
/// on two neighboring inputs `a` and `b`, sharing the thresholds.
///
/// Rounding is post-processing of the picks, so bounding the divergence of
/// the pick sequences bounds the whole algorithm's.
pub fn audit_enumerate<M: Matroid + ?Sized>(
    variant: Variant,
    a: &DecomposableObjective,
    b: &DecomposableObjective,
    mat: &M,
    cfg: &AlgoConfig,
) -> Result<AuditReport> {
    cfg.validate()?;
    if a.len() != b.len() || mat.ground_size() != a.len() {
        return Err(invalid("neighboring inputs must share the ground set and matroid"));
    }
    let budget = cfg
        .budget
        .ok_or_else(|| invalid("the audit needs a finite privacy budget"))?;
    let SampleMode::Explicit(s) = cfg.samples else {
        return Err(invalid("the audit needs an explicit sample count"));
    };
    let rank = mat.rank();
    let rounds = rounds_for_step(cfg.eta)?;
    let (round, claimed): (RoundBudget, fn(f64, f64) -> f64) = match variant {
        Variant::Monotone => (eps0_monotone(budget.epsilon, budget.delta)?, monotone_guarantee),
        Variant::Measured => (eps0_nonmonotone(budget.epsilon, budget.delta)?, nonmonotone_guarantee),
    };
    let sensitivity = a.lambda().max(b.lambda());

    let (a_obj, b_obj, ext) = match variant {
        Variant::Monotone => (a.clone(), b.clone(), DummyExtension::new(mat, 0, rank)),
        Variant::Measured => (a.with_dummies(rank), b.with_dummies(rank), DummyExtension::new(mat, rank, rank)),
    };
    let n = ext.ground_size();
    let size = (n as f64).powf((rank * rounds) as f64);
    if size > MAX_SEQUENCES {
        return Err(Error::TooLarge(format!(
            "{size:.3e} pick sequences (limit {MAX_SEQUENCES:.0e})"
        )));
    }
    let thresholds = draw_thresholds(n, s, cfg.seeds.thresholds)?;
    let walk_a = GreedyWalk::new(variant, &a_obj, &thresholds, &ext, cfg.eta)?;
    let walk_b = GreedyWalk::new(variant, &b_obj, &thresholds, &ext, cfg.eta)?;
    let mut run = Enumeration {
        eps0: round.eps0,
        sensitivity,
        out: Vec::new(),
        _walk: std::marker::PhantomData,
    };
    run.descend(walk_a, walk_b, &mut Vec::new(), 1.0, 1.0)?;

    let pairs: Vec<(f64, f64)> = run.out.iter().map(|s| (s.prob_a, s.prob_b)).collect();
    let max_log_ratio = pairs
        .iter()
        .map(|&(p, q)| (p.ln() - q.ln()).abs())
        .filter(|r| !r.is_nan())
        .fold(0.0, f64::max);
    let epsilon_claimed = claimed(round.eps0, budget.delta);
    let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(p, q)| (q, p)).collect();
    let delta_excess = (two_sided(&pairs, &swapped, epsilon_claimed) - budget.delta).max(0.0);
    Ok(AuditReport {
        epsilon_claimed,
        epsilon_observed: observed_epsilon(&pairs, budget.delta, max_log_ratio),
        max_log_ratio,
        delta: budget.delta,
        delta_excess,
        eps0: round.eps0,
        sequences: run.out,
    })
}

/// A distribution over `[0, 1]` chosen by the adversary for one round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RoundDistribution {
    PointMass(f64),
    /// `high` with probability `p_high`, otherwise `low`.
    TwoPoint { low: f64, high: f64, p_high: f64 },
    Uniform { low: f64, high: f64 },
}

impl RoundDistribution {
    fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let ok = match *self {
            RoundDistribution::PointMass(v) => unit(v),
            RoundDistribution::TwoPoint { low, high, p_high } => unit(low) && unit(high) && unit(p_high),
            RoundDistribution::Uniform { low, high } => unit(low) && unit(high) && low <= high,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("adversary distribution {self:?} leaves [0, 1]")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            RoundDistribution::PointMass(v) => v,
            RoundDistribution::TwoPoint { low, high, p_high } => low + p_high * (high - low),
            RoundDistribution::Uniform { low, high } => 0.5 * (low + high),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RoundDistribution::PointMass(v) => v,
            RoundDistribution::TwoPoint { low, high, p_high } => {
                if rng.gen::<f64>() < p_high {
                    high
                } else {
                    low
                }
            }
            RoundDistribution::Uniform { low, high } => low + rng.gen::<f64>() * (high - low),
        }
    }
}

/// Picks each round's distribution, possibly from the remaining mass `z`.
pub trait Adversary {
    fn choose(&mut self, round: usize, rounds: usize, z: f64) -> RoundDistribution;
}

/// Takes everything in the first round.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyAdversary;

impl Adversary for GreedyAdversary {
    fn choose(&mut self, _round: usize, _rounds: usize, _z: f64) -> RoundDistribution {
        RoundDistribution::PointMass(1.0)
    }
}

/// A rare all-or-nothing jump with probability `p` per round, which accrues
/// expected decay while the mass stays untouched. Over many rounds `Y` is
/// close to exponentially distributed, so this nearly attains the bound's rate.
#[derive(Clone, Copy, Debug)]
pub struct RareJumpAdversary {
    pub p: f64,
}

impl Adversary for RareJumpAdversary {
    fn choose(&mut self, _round: usize, _rounds: usize, _z: f64) -> RoundDistribution {
        RoundDistribution::TwoPoint {
            low: 0.0,
            high: 1.0,
            p_high: self.p,
        }
    }
}

/// Gambles on rare near-total jumps while plenty of mass remains and
/// switches to small uniform bites once it has been eroded.
#[derive(Clone, Copy, Debug, Default)]
pub struct AdaptiveAdversary;

impl Adversary for AdaptiveAdversary {
    fn choose(&mut self, _round: usize, _rounds: usize, z: f64) -> RoundDistribution {
        if z > 0.5 {
            RoundDistribution::TwoPoint {
                low: 0.0,
                high: 0.6,
                p_high: 0.02,
            }
        } else {
            RoundDistribution::Uniform { low: 0.0, high: 0.05 }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub q: f64,
    pub trials: usize,
    pub hits: usize,
    /// Fraction of trials with `Y ≥ q`.
    pub tail: f64,
    /// The bound `e^{3 − q}`.
    pub bound: f64,
    /// Binomial standard deviation of `tail` at the bound.
    pub sigma: f64,
}

impl TailEstimate {
    /// Whether the empirical tail stays within three binomial σ of the bound.
    pub fn within_bound(&self) -> bool {
        self.tail <= self.bound + 3.0 * self.sigma
    }
}

/// Monte-Carlo tail of the decay process: `Z₁ = 1`, `Z_{i+1} = Z_i (1 − R_i)`
/// with `R_i` drawn from the adversary's round-`i` distribution, and
/// `Y = Σ_i Z_i E[R_i]`. The bound under test is `P(Y ≥ q) ≤ e^{3−q}`.
pub fn simulate_claim3(
    adversary: &mut dyn Adversary,
    rounds: usize,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<TailEstimate> {
    if !(q > 0.0) || rounds == 0 || trials == 0 {
        return Err(invalid("need q > 0 and at least one round and trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..trials {
        let mut z = 1.0;
        let mut y = 0.0;
        for round in 0..rounds {
            let dist = adversary.choose(round, rounds, z);
            dist.validate()?;
            y += z * dist.mean();
            z -= dist.sample(&mut rng) * z;
            if z == 0.0 {
                break;
            }
        }
        if y >= q {
            hits += 1;
        }
    }
    let bound = (3.0 - q).exp();
    let p = bound.min(1.0);
    Ok(TailEstimate {
        q,
        trials,
        hits,
        tail: hits as f64 / trials as f64,
        bound,
        sigma: (p * (1.0 - p) / trials as f64).sqrt(),
    })
}
