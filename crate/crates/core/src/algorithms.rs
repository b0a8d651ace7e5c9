//! The private continuous greedy algorithms, their non-private anchors,
//! the composition-based private greedy baseline, and a brute-force optimum.
//!
//! Both continuous variants run `T = ⌈1/η⌉` rounds of `r` selections. Each
//! selection scores the feasible extensions of the round's current set with
//! the shared-threshold estimator and draws one through the exponential
//! mechanism with sensitivity `λ`. The monotone variant moves `y_u` by `η`
//! and records each round's set with weight `η`; the measured variant moves
//! `y_u` by `η(1 − y_u)` over a ground set padded with `r` dummies and keeps
//! an explicit convex combination. Either way the final combination is
//! swap-rounded to one independent set.

use std::io::{self, Write};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::matroid::{feasible_extensions, DummyExtension, Matroid};
use crate::multilinear::{
    draw_thresholds, rounds_for_step, samples_monotone, samples_nonmonotone, GainEstimator, ThresholdSamples,
};
use crate::objective::{with_element, DecomposableObjective};
use crate::privacy::{
    eps0_composition, eps0_monotone, eps0_nonmonotone, exp_mechanism_select, Composition, PrivacyBudget,
    RoundBudget,
};
use crate::rounding::{measured_split_update, normalize_combination, pad_to_basis, strip_dummies, swap_round, ConvexCombination};
use crate::Element;

/// Largest ground set [`brute_force_opt`] accepts.
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// A stable 64-bit seed derived from a label: the first eight bytes
/// (little-endian) of its SHA-256 digest.
pub fn derive_seed(label: &str) -> u64 {
    let digest = Sha256::digest(label.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Independent random streams of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub thresholds: u64,
    pub mechanism: u64,
    pub rounding: u64,
}

impl Seeds {
    /// Splits one seed into the three streams.
    pub fn from_master(seed: u64) -> Self {
        Self {
            thresholds: derive_seed(&format!("{seed}|thresholds")),
            mechanism: derive_seed(&format!("{seed}|mechanism")),
            rounding: derive_seed(&format!("{seed}|rounding")),
        }
    }
}

/// Number of threshold samples: the theoretical formula or a fixed count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Theory,
    Explicit(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    /// Step size in `(0, 1]`; the number of rounds is `⌈1/η⌉`.
    pub eta: f64,
    /// Failure probability in `(0, 1]`, split evenly between estimation and selection.
    pub gamma: f64,
    /// `None` runs without privacy: every selection is an exact argmax.
    pub budget: Option<PrivacyBudget>,
    pub samples: SampleMode,
    pub seeds: Seeds,
}

impl AlgoConfig {
    pub fn new(eta: f64, gamma: f64, budget: Option<PrivacyBudget>, samples: SampleMode, seeds: Seeds) -> Self {
        Self {
            eta,
            gamma,
            budget,
            samples,
            seeds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        rounds_for_step(self.eta)?;
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(invalid(format!("γ must lie in (0, 1], got {}", self.gamma)));
        }
        if let Some(b) = self.budget {
            PrivacyBudget::new(b.epsilon, b.delta)?;
        }
        if self.samples == SampleMode::Explicit(0) {
            return Err(invalid("explicit sample count must be at least 1"));
        }
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        rounds_for_step(self.eta).unwrap_or(1)
    }

    fn resolve_samples(&self, theory: impl FnOnce() -> Result<usize>) -> Result<usize> {
        match self.samples {
            SampleMode::Explicit(s) => Ok(s),
            SampleMode::Theory => theory(),
        }
    }
}

/// One selection `u^{(t,i)}` of a continuous greedy run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based outer round `t`.
    pub round: usize,
    /// 1-based inner step `i`.
    pub step: usize,
    pub chosen: Element,
    pub candidates: usize,
    pub estimated_gain: f64,
    /// SHA-256 (hex) of the fractional point after the step.
    pub snapshot: String,
}

/// Everything a continuous greedy run did.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: String,
    pub config: AlgoConfig,
    pub rounds: usize,
    pub rank: usize,
    pub samples: usize,
    pub round_budget: RoundBudget,
    pub steps: Vec<StepRecord>,
    pub early_breaks: usize,
    pub combination: ConvexCombination,
    pub repairs: usize,
    /// Rounded basis, dummies included.
    pub rounded: Vec<Element>,
    /// Rounded basis with dummies removed; the returned set.
    pub output: Vec<Element>,
    pub value: f64,
    pub oracle_calls: u64,
}

#[derive(Serialize)]
struct TraceSummary<'a> {
    algorithm: &'a str,
    config: &'a AlgoConfig,
    rounds: usize,
    rank: usize,
    samples: usize,
    eps0: f64,
    derivation: crate::privacy::Derivation,
    early_breaks: usize,
    repairs: usize,
    output: &'a [Element],
    value: f64,
    oracle_calls: u64,
}

impl RunTrace {
    fn new(algorithm: &str, config: &AlgoConfig, rounds: usize, rank: usize, samples: usize, budget: RoundBudget) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            config: config.clone(),
            rounds,
            rank,
            samples,
            round_budget: budget,
            steps: Vec::new(),
            early_breaks: 0,
            combination: ConvexCombination::new(0),
            repairs: 0,
            rounded: Vec::new(),
            output: Vec::new(),
            value: 0.0,
            oracle_calls: 0,
        }
    }

    /// The pick sequence `u^{(1,1)}, u^{(1,2)}, ..`.
    pub fn picks(&self) -> Vec<Element> {
        self.steps.iter().map(|s| s.chosen).collect()
    }

    /// One JSON object per step, newline-terminated.
    pub fn write_steps_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for step in &self.steps {
            serde_json::to_writer(&mut out, step)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Config echo, output value, ε₀, repair count and oracle calls.
    pub fn summary_json(&self) -> String {
        serde_json::to_string(&TraceSummary {
            algorithm: &self.algorithm,
            config: &self.config,
            rounds: self.rounds,
            rank: self.rank,
            samples: self.samples,
            eps0: self.round_budget.eps0,
            derivation: self.round_budget.derivation,
            early_breaks: self.early_breaks,
            repairs: self.repairs,
            output: &self.output,
            value: self.value,
            oracle_calls: self.oracle_calls,
        })
        .expect("summary is serializable")
    }
}

fn snapshot(y: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for v in y {
        hasher.update(v.to_le_bytes());
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Steps of `η`, for monotone objectives.
    Monotone,
    /// Damped steps of `η(1 − y_u)`, for arbitrary non-negative objectives.
    Measured,
}

/// The selection walk shared by both continuous greedy variants: the round
/// structure, the feasible candidates and their estimated scores.
///
/// The walk is deterministic given the picks, which lets the privacy audit
/// replay it along every possible pick sequence.
pub struct GreedyWalk<'a, M: Matroid + ?Sized> {
    variant: Variant,
    est: GainEstimator<'a>,
    mat: &'a M,
    eta: f64,
    rank: usize,
    rounds: usize,
    round: usize,
    base: Vec<Element>,
}

impl<M: Matroid + ?Sized> Clone for GreedyWalk<'_, M> {
    fn clone(&self) -> Self {
        Self {
            variant: self.variant,
            est: self.est.clone(),
            mat: self.mat,
            eta: self.eta,
            rank: self.rank,
            rounds: self.rounds,
            round: self.round,
            base: self.base.clone(),
        }
    }
}

impl<'a, M: Matroid + ?Sized> GreedyWalk<'a, M> {
    pub fn new(
        variant: Variant,
        obj: &'a DecomposableObjective,
        thresholds: &'a ThresholdSamples,
        mat: &'a M,
        eta: f64,
    ) -> Result<Self> {
        if mat.ground_size() != obj.len() {
            return Err(invalid(format!(
                "matroid over {} elements, objective over {}",
                mat.ground_size(),
                obj.len()
            )));
        }
        Ok(Self {
            variant,
            est: GainEstimator::new(obj, thresholds)?,
            mat,
            eta,
            rank: mat.rank(),
            rounds: rounds_for_step(eta)?,
            round: 0,
            base: Vec::new(),
        })
    }

    pub fn is_done(&self) -> bool {
        self.round >= self.rounds || self.rank == 0
    }

    /// 0-based outer round.
    pub fn round(&self) -> usize {
        self.round
    }

    /// 0-based inner step within the round.
    pub fn step(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[Element] {
        &self.base
    }

    pub fn estimator(&self) -> &GainEstimator<'a> {
        &self.est
    }

    pub fn y(&self) -> &[f64] {
        self.est.y()
    }

    /// Feasible extensions of the round's current set.
    pub fn candidates(&self) -> Result<Vec<Element>> {
        feasible_extensions(self.mat, &self.base)
    }

    /// Estimated gains of `candidates`, in the same order.
    pub fn scores(&mut self, candidates: &[Element]) -> Vec<f64> {
        candidates
            .iter()
            .map(|&u| match self.variant {
                Variant::Monotone => self.est.gain_monotone(u, self.eta),
                Variant::Measured => self.est.gain_measured(u, self.eta),
            })
            .collect()
    }

    /// Applies a pick; returns the round's set when the pick completes it.
    pub fn pick(&mut self, u: Element) -> Option<Vec<Element>> {
        match self.variant {
            Variant::Monotone => self.est.advance_monotone(u, self.eta),
            Variant::Measured => self.est.advance_measured(u, self.eta),
        }
        self.base = with_element(&self.base, u);
        (self.base.len() >= self.rank).then(|| self.close_round())
    }

    /// Ends the current round early and returns its set.
    pub fn close_round(&mut self) -> Vec<Element> {
        self.round += 1;
        std::mem::take(&mut self.base)
    }
}

/// Ground set and matroid extended with `count` zero-value dummies.
///
/// The matroid is truncated at the original rank, so every independent set
/// pads to a basis with unused dummies and no basis grows beyond that rank.
pub fn augment_with_dummies<'m, M: Matroid + ?Sized>(
    obj: &DecomposableObjective,
    mat: &'m M,
    count: usize,
) -> (DecomposableObjective, DummyExtension<&'m M>, Range<Element>) {
    let n = obj.len();
    let rank = mat.rank();
    (
        obj.with_dummies(count),
        DummyExtension::new(mat, count, rank),
        n..n + count,
    )
}

fn check_instance<M: Matroid + ?Sized>(obj: &DecomposableObjective, mat: &M) -> Result<()> {
    if mat.ground_size() != obj.len() {
        return Err(invalid(format!(
            "matroid over {} elements, objective over {}",
            mat.ground_size(),
            obj.len()
        )));
    }
    if mat.rank() == 0 {
        return Err(invalid("matroid has rank 0"));
    }
    Ok(())
}

/// Private continuous greedy for monotone decomposable objectives.
pub fn private_continuous_greedy<M: Matroid + ?Sized>(
    obj: &DecomposableObjective,
    mat: &M,
    cfg: &AlgoConfig,
) -> Result<(Vec<Element>, RunTrace)> {
    cfg.validate()?;
    check_instance(obj, mat)?;
    let n = obj.len();
    let rank = mat.rank();
    let rounds = cfg.rounds();
    let budget = match cfg.budget {
        Some(b) => eps0_monotone(b.epsilon, b.delta)?,
        None => RoundBudget::nonprivate(),
    };
    let s = cfg.resolve_samples(|| samples_monotone(rank, rounds, n, cfg.gamma / 2.0))?;
    let thresholds = draw_thresholds(n, s, cfg.seeds.thresholds)?;
    let mut walk = GreedyWalk::new(Variant::Monotone, obj, &thresholds, mat, cfg.eta)?;
    let mut mechanism = ChaCha8Rng::seed_from_u64(cfg.seeds.mechanism);
    let mut trace = RunTrace::new("pcg", cfg, rounds, rank, s, budget);
    let ext = DummyExtension::new(mat, rank, rank);
    let mut comb = ConvexCombination::new(ext.ground_size());

    while !walk.is_done() {
        let candidates = walk.candidates()?;
        if candidates.is_empty() {
            trace.early_breaks += 1;
            let closed = walk.close_round();
            comb.push(cfg.eta, &closed)?;
            continue;
        }
        let scores = walk.scores(&candidates);
        let k = exp_mechanism_select(&scores, budget.eps0, obj.lambda(), &mut mechanism)?;
        let u = candidates[k];
        let (t, i) = (walk.round(), walk.step());
        let closed = walk.pick(u);
        trace.steps.push(StepRecord {
            round: t + 1,
            step: i + 1,
            chosen: u,
            candidates: candidates.len(),
            estimated_gain: scores[k],
            snapshot: snapshot(walk.y()),
        });
        if let Some(closed) = closed {
            comb.push(cfg.eta, &closed)?;
        }
    }

    let comb = pad_to_basis(&normalize_combination(&comb)?, &ext)?;
    let mut rounding = ChaCha8Rng::seed_from_u64(cfg.seeds.rounding);
    let rounded = swap_round(&comb, &ext, &mut rounding)?;
    let output = strip_dummies(&rounded, n);
    trace.value = obj.value(&output);
    trace.oracle_calls = walk.estimator().oracle_calls();
    trace.combination = comb;
    trace.rounded = rounded;
    trace.output = output.clone();
    Ok((output, trace))
}

/// Private measured continuous greedy for non-negative decomposable
/// objectives that need not be monotone.
pub fn private_measured_continuous_greedy<M: Matroid + ?Sized>(
    obj: &DecomposableObjective,
    mat: &M,
    cfg: &AlgoConfig,
) -> Result<(Vec<Element>, RunTrace)> {
    cfg.validate()?;
    check_instance(obj, mat)?;
    let n = obj.len();
    let rank = mat.rank();
    let rounds = cfg.rounds();
    let (padded, ext, _) = augment_with_dummies(obj, mat, rank);
    let n_aug = padded.len();
    let budget = match cfg.budget {
        Some(b) => eps0_nonmonotone(b.epsilon, b.delta)?,
        None => RoundBudget::nonprivate(),
    };
    let s = cfg.resolve_samples(|| samples_nonmonotone(rank, rounds, n_aug, cfg.gamma / 2.0))?;
    let thresholds = draw_thresholds(n_aug, s, cfg.seeds.thresholds)?;
    let mut walk = GreedyWalk::new(Variant::Measured, &padded, &thresholds, &ext, cfg.eta)?;
    let mut mechanism = ChaCha8Rng::seed_from_u64(cfg.seeds.mechanism);
    let mut trace = RunTrace::new("pmcg", cfg, rounds, rank, s, budget);
    let mut comb = ConvexCombination::single(n_aug, &[])?;

    while !walk.is_done() {
        let candidates = walk.candidates()?;
        if candidates.is_empty() {
            trace.early_breaks += 1;
            walk.close_round();
            continue;
        }
        let scores = walk.scores(&candidates);
        let k = exp_mechanism_select(&scores, budget.eps0, padded.lambda(), &mut mechanism)?;
        let u = candidates[k];
        let (t, i) = (walk.round(), walk.step());
        walk.pick(u);
        let (next, repairs) = measured_split_update(&comb, &ext, u, cfg.eta, n)?;
        comb = next;
        trace.repairs += repairs;
        trace.steps.push(StepRecord {
            round: t + 1,
            step: i + 1,
            chosen: u,
            candidates: candidates.len(),
            estimated_gain: scores[k],
            snapshot: snapshot(walk.y()),
        });
    }
    if trace.repairs > 0 {
        log::debug!("measured greedy needed {} exchange repairs", trace.repairs);
    }

    let comb = pad_to_basis(&comb, &ext)?;
    let mut rounding = ChaCha8Rng::seed_from_u64(cfg.seeds.rounding);
    let rounded = swap_round(&comb, &ext, &mut rounding)?;
    let output = strip_dummies(&rounded, n);
    trace.value = obj.value(&output);
    trace.oracle_calls = walk.estimator().oracle_calls();
    trace.combination = comb;
    trace.rounded = rounded;
    trace.output = output.clone();
    Ok((output, trace))
}

/// Continuous greedy with exact argmax selections, seeded from one value.
pub fn nonprivate_continuous_greedy<M: Matroid + ?Sized>(
    obj: &DecomposableObjective,
    mat: &M,
    eta: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<Element>> {
    let cfg = AlgoConfig::new(eta, 1.0, None, SampleMode::Explicit(samples), Seeds::from_master(seed));
    Ok(private_continuous_greedy(obj, mat, &cfg)?.0)
}

/// Discrete greedy: add the feasible element of largest marginal gain
/// (lowest index on ties) until the set is a basis or every feasible gain
/// is negative.
pub fn nonprivate_greedy<M: Matroid + ?Sized>(obj: &DecomposableObjective, mat: &M) -> Result<Vec<Element>> {
    check_instance(obj, mat)?;
    let mut tracker = obj.tracker();
    loop {
        let candidates = feasible_extensions(mat, tracker.members())?;
        let mut best: Option<(Element, f64)> = None;
        for u in candidates {
            let g = tracker.gain(u);
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((u, g));
            }
        }
        match best {
            Some((u, g)) if g >= 0.0 => {
                tracker.insert(u);
            }
            _ => return Ok(tracker.members().to_vec()),
        }
    }
}

/// Which per-round budget the private greedy baseline spends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DpgMode {
    Basic,
    Advanced,
    /// The monotone algorithm's rank-invariant `ε₀`.
    RankInvariant,
}

impl DpgMode {
    pub fn round_budget(self, budget: PrivacyBudget, rank: usize) -> Result<RoundBudget> {
        match self {
            DpgMode::Basic => eps0_composition(budget.epsilon, budget.delta, rank, Composition::Basic),
            DpgMode::Advanced => eps0_composition(budget.epsilon, budget.delta, rank, Composition::Advanced),
            DpgMode::RankInvariant => eps0_monotone(budget.epsilon, budget.delta),
        }
    }
}

/// Private discrete greedy: `r` exponential-mechanism selections over exact
/// marginal gains with sensitivity `λ`. Without a budget it is
/// [`nonprivate_greedy`].
pub fn dpg_baseline<M: Matroid + ?Sized, R: Rng + ?Sized>(
    obj: &DecomposableObjective,
    mat: &M,
    budget: Option<PrivacyBudget>,
    mode: DpgMode,
    rng: &mut R,
) -> Result<(Vec<Element>, RoundBudget)> {
    let Some(budget) = budget else {
        return Ok((nonprivate_greedy(obj, mat)?, RoundBudget::nonprivate()));
    };
    check_instance(obj, mat)?;
    let rank = mat.rank();
    let round = mode.round_budget(budget, rank)?;
    let mut tracker = obj.tracker();
    for _ in 0..rank {
        let candidates = feasible_extensions(mat, tracker.members())?;
        if candidates.is_empty() {
            break;
        }
        let scores: Vec<f64> = candidates.iter().map(|&u| tracker.gain(u)).collect();
        let k = exp_mechanism_select(&scores, round.eps0, obj.lambda(), rng)?;
        tracker.insert(candidates[k]);
    }
    Ok((tracker.members().to_vec(), round))
}

/// Exact optimum over independent sets by depth-first search in
/// lexicographic order; the first set reaching the best value wins ties.
pub fn brute_force_opt<M: Matroid + ?Sized>(obj: &DecomposableObjective, mat: &M) -> Result<(Vec<Element>, f64)> {
    let n = obj.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge(format!(
            "brute force over {n} elements (limit {BRUTE_FORCE_MAX_N})"
        )));
    }
    if mat.ground_size() != n {
        return Err(invalid("matroid and objective ground sets differ"));
    }
    let root = obj.tracker();
    let mut best = (Vec::new(), root.value());
    let mut stack = vec![(root, 0usize)];
    while let Some((tracker, next)) = stack.pop() {
        // Children are pushed in reverse so the smallest extension is explored first.
        for u in (next..n).rev() {
            let grown = with_element(tracker.members(), u);
            if mat.is_independent(&grown) {
                let mut child = tracker.clone();
                child.insert(u);
                stack.push((child, u + 1));
            }
        }
        if tracker.value() > best.1 + 1e-12 {
            best = (tracker.members().to_vec(), tracker.value());
        }
    }
    Ok(best)
}
