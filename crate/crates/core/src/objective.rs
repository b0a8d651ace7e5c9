//! Ground sets, decomposable objectives and the built-in objective families.
//!
//! A [`DecomposableObjective`] is a sum of `m` per-agent submodular functions,
//! each bounded in `[0, λ]`. Sets are passed around as sorted, duplicate-free
//! slices of element indices. Elements at or beyond
//! [`GroundSet::dummy_from`] are dummies: every agent ignores them, so they
//! have zero marginal contribution to every set.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Element;

/// Largest ground set the exhaustive submodularity scan accepts.
pub const EXHAUSTIVE_CHECK_MAX_N: usize = 14;

const CHECK_TOLERANCE: f64 = 1e-9;
const MAX_REPORTED: usize = 32;

/// The ground set `{0, .., n-1}`, optionally labelled, with an optional
/// suffix of dummy elements.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundSet {
    n: usize,
    labels: Option<Vec<String>>,
    dummy_from: Option<usize>,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("ground set must contain at least one element"));
        }
        Ok(Self {
            n,
            labels: None,
            dummy_from: None,
        })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut ground = Self::new(labels.len())?;
        ground.labels = Some(labels);
        Ok(ground)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Human-readable name of `u`, falling back to its index.
    pub fn label(&self, u: Element) -> String {
        match &self.labels {
            Some(labels) if u < labels.len() => labels[u].clone(),
            _ if self.is_dummy(u) => format!("dummy{}", u - self.real_len()),
            _ => u.to_string(),
        }
    }

    /// Index of the first dummy element, if any were appended.
    pub fn dummy_from(&self) -> Option<usize> {
        self.dummy_from
    }

    /// Number of non-dummy elements.
    pub fn real_len(&self) -> usize {
        self.dummy_from.unwrap_or(self.n)
    }

    pub fn is_dummy(&self, u: Element) -> bool {
        u >= self.real_len() && u < self.n
    }

    /// Appends `extra` dummy elements.
    pub fn augmented(&self, extra: usize) -> GroundSet {
        GroundSet {
            n: self.n + extra,
            labels: self.labels.clone(),
            dummy_from: Some(self.real_len()),
        }
    }

    /// Checks that every element of `set` lies in the ground set.
    pub fn check(&self, set: &[Element]) -> Result<()> {
        match set.iter().find(|&&u| u >= self.n) {
            Some(&element) => Err(Error::ElementOutOfRange { element, n: self.n }),
            None => Ok(()),
        }
    }
}

/// Sorts and deduplicates a set given in arbitrary order.
pub fn canonical_set(set: &[Element]) -> Vec<Element> {
    let mut out = set.to_vec();
    out.sort_unstable();
    out.dedup();
    out
}

/// Returns `set ∪ {u}` for a sorted set.
pub fn with_element(set: &[Element], u: Element) -> Vec<Element> {
    let mut out = Vec::with_capacity(set.len() + 1);
    let pos = set.partition_point(|&v| v < u);
    out.extend_from_slice(&set[..pos]);
    if pos == set.len() || set[pos] != u {
        out.push(u);
    }
    out.extend_from_slice(&set[pos..]);
    out
}

/// An evaluation oracle for one agent's submodular function.
///
/// Implementations must be pure: the same set always yields the same value.
pub trait AgentFunction: Send + Sync {
    /// Value on a sorted, duplicate-free set of element indices.
    fn value(&self, set: &[Element]) -> f64;

    /// Declared upper bound of the agent's range.
    fn bound(&self) -> f64;
}

/// Adapts a closure into an [`AgentFunction`].
pub struct FnAgent<F> {
    f: F,
    bound: f64,
}

impl<F> FnAgent<F>
where
    F: Fn(&[Element]) -> f64 + Send + Sync,
{
    pub fn new(bound: f64, f: F) -> Self {
        Self { f, bound }
    }
}

impl<F> AgentFunction for FnAgent<F>
where
    F: Fn(&[Element]) -> f64 + Send + Sync,
{
    fn value(&self, set: &[Element]) -> f64 {
        (self.f)(set)
    }

    fn bound(&self) -> f64 {
        self.bound
    }
}

/// An agent given by an explicit value table indexed by subset bitmask.
#[derive(Clone, Debug)]
pub struct TableAgent {
    n: usize,
    values: Vec<f64>,
    bound: f64,
}

impl TableAgent {
    /// `values[mask]` is the value of the set whose bits are set in `mask`.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > 20 {
            return Err(Error::TooLarge(format!("table agent over {n} elements")));
        }
        if values.len() != 1 << n {
            return Err(invalid(format!(
                "table over {n} elements needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        let bound = values.iter().cloned().fold(0.0, f64::max);
        Ok(Self { n, values, bound })
    }

    /// Tabulates `f` on every subset of `{0, .., n-1}`.
    pub fn from_fn(n: usize, f: impl Fn(&[Element]) -> f64) -> Result<Self> {
        if n > 20 {
            return Err(Error::TooLarge(format!("table agent over {n} elements")));
        }
        let values = (0..1usize << n).map(|mask| f(&mask_to_set(mask))).collect();
        Self::new(n, values)
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl AgentFunction for TableAgent {
    fn value(&self, set: &[Element]) -> f64 {
        let mask = set
            .iter()
            .filter(|&&u| u < self.n)
            .fold(0usize, |m, &u| m | (1 << u));
        self.values[mask]
    }

    fn bound(&self) -> f64 {
        self.bound
    }
}

/// Multiplies another agent by a positive constant.
pub struct ScaledAgent {
    inner: Arc<dyn AgentFunction>,
    factor: f64,
}

impl ScaledAgent {
    pub fn new(inner: Arc<dyn AgentFunction>, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl AgentFunction for ScaledAgent {
    fn value(&self, set: &[Element]) -> f64 {
        self.factor * self.inner.value(set)
    }

    fn bound(&self) -> f64 {
        self.factor * self.inner.bound()
    }
}

/// Expands a bitmask into the sorted set of its bit positions.
pub fn mask_to_set(mask: usize) -> Vec<Element> {
    (0..usize::BITS as usize)
        .filter(|&u| mask >> u & 1 == 1)
        .collect()
}

/// A latitude/longitude pair in decimal degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn l1(&self, other: &GeoPoint) -> f64 {
        (self.lat - other.lat).abs() + (self.lon - other.lon).abs()
    }
}

/// A set of pickup locations, one per agent.
///
/// `normalization` is the constant `C` dividing every location/pickup ℓ1
/// distance. When absent, the smallest admissible value is computed when an
/// objective is built.
#[derive(Clone, Debug, PartialEq)]
pub struct PickupDataset {
    points: Vec<GeoPoint>,
    normalization: Option<f64>,
}

impl PickupDataset {
    pub fn new(points: Vec<GeoPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("pickup dataset is empty"));
        }
        if points.iter().any(|p| !p.lat.is_finite() || !p.lon.is_finite()) {
            return Err(invalid("pickup coordinates must be finite"));
        }
        Ok(Self {
            points,
            normalization: None,
        })
    }

    pub fn with_normalization(points: Vec<GeoPoint>, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("normalization constant must be positive, got {c}")));
        }
        let mut data = Self::new(points)?;
        data.normalization = Some(c);
        Ok(data)
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn normalization(&self) -> Option<f64> {
        self.normalization
    }

    /// A dataset restricted to the points at `indices`.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let points = indices
            .iter()
            .map(|&i| {
                self.points
                    .get(i)
                    .copied()
                    .ok_or_else(|| invalid(format!("pickup index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut data = Self::new(points)?;
        data.normalization = self.normalization;
        Ok(data)
    }
}

/// Normalized ℓ1 distance `(|Δlat| + |Δlon|) / c`, required to lie in `[0, 1]`.
pub fn manhattan_distance(l: GeoPoint, p: GeoPoint, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(invalid(format!("normalization constant must be positive, got {c}")));
    }
    let d = l.l1(&p) / c;
    if d > 1.0 {
        return Err(Error::Normalization(d));
    }
    Ok(d)
}

/// Smallest `C` with every location/pickup distance at most `C`.
pub fn minimal_normalization(locations: &[GeoPoint], pickups: &[GeoPoint]) -> f64 {
    let c = locations
        .iter()
        .flat_map(|l| pickups.iter().map(move |p| l.l1(p)))
        .fold(0.0, f64::max);
    if c > 0.0 {
        c
    } else {
        1.0
    }
}

/// Facility-location objective: one agent per pickup `p` with
/// `f_p(S) = 1 - min_{l ∈ S} M(l, p)` and `f_p(∅) = 0`.
pub fn build_facility_location(
    locations: &[GeoPoint],
    pickups: &PickupDataset,
) -> Result<DecomposableObjective> {
    if locations.is_empty() {
        return Err(invalid("facility location needs at least one location"));
    }
    let c = pickups
        .normalization()
        .unwrap_or_else(|| minimal_normalization(locations, pickups.points()));
    let agents = pickups.len();
    let mut dist = Vec::with_capacity(locations.len() * agents);
    for l in locations {
        for p in pickups.points() {
            dist.push(manhattan_distance(*l, *p, c)?);
        }
    }
    Ok(DecomposableObjective {
        ground: GroundSet::new(locations.len())?,
        lambda: 1.0,
        scale: 1.0,
        agents: Agents::Facility(Arc::new(FacilityTable {
            agents,
            dist,
            normalization: c,
        })),
    })
}

/// One coverage agent: element `u` covers the items `covers[u]` of a
/// universe of size `universe`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageAgentSpec {
    pub universe: usize,
    pub covers: Vec<Vec<usize>>,
}

/// Coverage objective with `f_I(S) = |∪_{u∈S} covers_I(u)| / |universe_I|`.
pub fn build_coverage(n: usize, agents: Vec<CoverageAgentSpec>) -> Result<DecomposableObjective> {
    let ground = GroundSet::new(n)?;
    if agents.is_empty() {
        return Err(invalid("objective needs at least one agent"));
    }
    let mut offsets = Vec::with_capacity(agents.len() + 1);
    offsets.push(0);
    let mut covers = Vec::with_capacity(agents.len());
    for (i, agent) in agents.iter().enumerate() {
        if agent.universe == 0 {
            return Err(invalid(format!("coverage agent {i} has an empty universe")));
        }
        if agent.covers.len() != n {
            return Err(invalid(format!(
                "coverage agent {i} lists {} elements, expected {n}",
                agent.covers.len()
            )));
        }
        let mut per_element = Vec::with_capacity(n);
        for items in &agent.covers {
            if let Some(&bad) = items.iter().find(|&&x| x >= agent.universe) {
                return Err(invalid(format!(
                    "coverage agent {i} item {bad} outside universe of size {}",
                    agent.universe
                )));
            }
            let mut items: Vec<u32> = items.iter().map(|&x| x as u32).collect();
            items.sort_unstable();
            items.dedup();
            per_element.push(items);
        }
        covers.push(per_element);
        offsets.push(offsets[i] + agent.universe);
    }
    Ok(DecomposableObjective {
        ground,
        lambda: 1.0,
        scale: 1.0,
        agents: Agents::Coverage(Arc::new(CoverageTable {
            universes: agents.iter().map(|a| a.universe).collect(),
            offsets,
            covers,
        })),
    })
}

#[derive(Debug)]
struct FacilityTable {
    agents: usize,
    /// Normalized distances, `dist[l * agents + p]`.
    dist: Vec<f64>,
    normalization: f64,
}

impl FacilityTable {
    fn column(&self, l: Element) -> &[f64] {
        &self.dist[l * self.agents..(l + 1) * self.agents]
    }

    fn agent_value(&self, p: usize, set: &[Element]) -> f64 {
        let min = set
            .iter()
            .map(|&l| self.dist[l * self.agents + p])
            .fold(1.0, f64::min);
        1.0 - min
    }
}

#[derive(Debug)]
struct CoverageTable {
    universes: Vec<usize>,
    offsets: Vec<usize>,
    /// `covers[agent][element]` lists covered items.
    covers: Vec<Vec<Vec<u32>>>,
}

impl CoverageTable {
    fn agent_value(&self, i: usize, set: &[Element]) -> f64 {
        let mut seen = vec![false; self.universes[i]];
        let mut count = 0usize;
        for &u in set {
            for &x in &self.covers[i][u] {
                let slot = &mut seen[x as usize];
                if !*slot {
                    *slot = true;
                    count += 1;
                }
            }
        }
        count as f64 / self.universes[i] as f64
    }
}

#[derive(Clone)]
enum Agents {
    Facility(Arc<FacilityTable>),
    Coverage(Arc<CoverageTable>),
    Oracle(Vec<Arc<dyn AgentFunction>>),
}

/// `f(S) = Σ_I f_I(S)` over `m` agents whose values lie in `[0, λ]`.
#[derive(Clone)]
pub struct DecomposableObjective {
    ground: GroundSet,
    lambda: f64,
    scale: f64,
    agents: Agents,
}

impl fmt::Debug for DecomposableObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match &self.agents {
            Agents::Facility(_) => "facility",
            Agents::Coverage(_) => "coverage",
            Agents::Oracle(_) => "oracle",
        };
        f.debug_struct("DecomposableObjective")
            .field("n", &self.ground.len())
            .field("m", &self.num_agents())
            .field("lambda", &self.lambda)
            .field("family", &family)
            .finish()
    }
}

impl DecomposableObjective {
    /// Builds an objective from arbitrary agent oracles; λ is the largest
    /// declared agent bound.
    pub fn from_agents(ground: GroundSet, agents: Vec<Arc<dyn AgentFunction>>) -> Result<Self> {
        if agents.is_empty() {
            return Err(invalid("objective needs at least one agent"));
        }
        let lambda = agents.iter().map(|a| a.bound()).fold(0.0, f64::max);
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("agent bounds must be positive, got λ = {lambda}")));
        }
        Ok(Self {
            ground,
            lambda,
            scale: 1.0,
            agents: Agents::Oracle(agents),
        })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Size of the ground set, dummies included.
    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    pub fn num_agents(&self) -> usize {
        match &self.agents {
            Agents::Facility(t) => t.agents,
            Agents::Coverage(t) => t.universes.len(),
            Agents::Oracle(a) => a.len(),
        }
    }

    /// Common range bound λ.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The facility normalization constant, for facility objectives.
    pub fn facility_normalization(&self) -> Option<f64> {
        match &self.agents {
            Agents::Facility(t) => Some(t.normalization),
            _ => None,
        }
    }

    fn real_part<'s>(&self, set: &'s [Element]) -> &'s [Element] {
        let real = self.ground.real_len();
        &set[..set.partition_point(|&u| u < real)]
    }

    /// Value on a sorted, duplicate-free set. Dummies are ignored.
    pub fn value(&self, set: &[Element]) -> f64 {
        debug_assert!(set.windows(2).all(|w| w[0] < w[1]), "set must be sorted");
        let set = self.real_part(set);
        let total: f64 = match &self.agents {
            Agents::Facility(t) => (0..t.agents).map(|p| t.agent_value(p, set)).sum(),
            Agents::Coverage(t) => (0..t.universes.len()).map(|i| t.agent_value(i, set)).sum(),
            Agents::Oracle(a) => a.iter().map(|f| f.value(set)).sum(),
        };
        total * self.scale
    }

    /// Validated evaluation of `f(S)` for a set in any order.
    pub fn evaluate(&self, set: &[Element]) -> Result<f64> {
        self.ground.check(set)?;
        Ok(self.value(&canonical_set(set)))
    }

    /// Value of a single agent on a sorted set.
    pub fn agent_value(&self, agent: usize, set: &[Element]) -> f64 {
        let set = self.real_part(set);
        let v = match &self.agents {
            Agents::Facility(t) => t.agent_value(agent, set),
            Agents::Coverage(t) => t.agent_value(agent, set),
            Agents::Oracle(a) => a[agent].value(set),
        };
        v * self.scale
    }

    /// `f(S ∪ {u}) - f(S)`; asking for an element already in `S` is an error.
    pub fn marginal_gain(&self, set: &[Element], u: Element) -> Result<f64> {
        self.ground.check(set)?;
        self.ground.check(&[u])?;
        let set = canonical_set(set);
        if set.binary_search(&u).is_ok() {
            return Err(Error::ElementPresent(u));
        }
        Ok(self.value(&with_element(&set, u)) - self.value(&set))
    }

    /// Scales every agent by `1/λ` so the common bound becomes 1.
    pub fn rescale_unit(&self) -> Result<Self> {
        if !(self.lambda > 0.0) {
            return Err(invalid(format!("cannot rescale with λ = {}", self.lambda)));
        }
        let mut out = self.clone();
        out.scale = self.scale / self.lambda;
        out.lambda = 1.0;
        Ok(out)
    }

    /// The objective restricted to the agents at `indices` (in that order).
    pub fn select_agents(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(invalid("objective needs at least one agent"));
        }
        let m = self.num_agents();
        if let Some(&bad) = indices.iter().find(|&&i| i >= m) {
            return Err(invalid(format!("agent {bad} out of range for {m} agents")));
        }
        let agents = match &self.agents {
            Agents::Facility(t) => {
                let mut dist = Vec::with_capacity(indices.len() * self.ground.real_len());
                for l in 0..self.ground.real_len() {
                    let col = t.column(l);
                    dist.extend(indices.iter().map(|&p| col[p]));
                }
                Agents::Facility(Arc::new(FacilityTable {
                    agents: indices.len(),
                    dist,
                    normalization: t.normalization,
                }))
            }
            Agents::Coverage(t) => {
                let universes: Vec<usize> = indices.iter().map(|&i| t.universes[i]).collect();
                let mut offsets = vec![0];
                for u in &universes {
                    offsets.push(offsets.last().unwrap() + u);
                }
                Agents::Coverage(Arc::new(CoverageTable {
                    universes,
                    offsets,
                    covers: indices.iter().map(|&i| t.covers[i].clone()).collect(),
                }))
            }
            Agents::Oracle(a) => Agents::Oracle(indices.iter().map(|&i| a[i].clone()).collect()),
        };
        Ok(Self {
            ground: self.ground.clone(),
            lambda: self.lambda,
            scale: self.scale,
            agents,
        })
    }

    /// The neighboring objective with agent `agent` removed.
    pub fn without_agent(&self, agent: usize) -> Result<Self> {
        let keep: Vec<usize> = (0..self.num_agents()).filter(|&i| i != agent).collect();
        self.select_agents(&keep)
    }

    /// A standalone oracle for one agent, including the current scale.
    pub fn agent_function(&self, agent: usize) -> Arc<dyn AgentFunction> {
        let single = self
            .select_agents(&[agent])
            .expect("agent index in range");
        Arc::new(AgentView { objective: single })
    }

    /// Every agent as a standalone oracle.
    pub fn agent_functions(&self) -> Vec<Arc<dyn AgentFunction>> {
        (0..self.num_agents()).map(|i| self.agent_function(i)).collect()
    }

    /// The same objective over a ground set with `extra` dummies appended.
    pub fn with_dummies(&self, extra: usize) -> Self {
        let mut out = self.clone();
        out.ground = self.ground.augmented(extra);
        out
    }

    /// Incremental evaluator for a growing set, starting from `∅`.
    pub fn tracker(&self) -> Tracker<'_> {
        let state = match &self.agents {
            Agents::Facility(t) => TrackerState::Facility(vec![1.0; t.agents]),
            Agents::Coverage(t) => {
                TrackerState::Coverage(vec![false; *t.offsets.last().unwrap()])
            }
            Agents::Oracle(a) => TrackerState::Oracle(a.iter().map(|f| f.value(&[])).collect()),
        };
        let total = match &state {
            TrackerState::Oracle(values) => values.iter().sum::<f64>() * self.scale,
            _ => 0.0,
        };
        Tracker {
            objective: self,
            members: Vec::new(),
            state,
            total,
        }
    }
}

struct AgentView {
    objective: DecomposableObjective,
}

impl AgentFunction for AgentView {
    fn value(&self, set: &[Element]) -> f64 {
        self.objective.value(set)
    }

    fn bound(&self) -> f64 {
        self.objective.lambda()
    }
}

#[derive(Clone, Debug)]
enum TrackerState {
    /// Current minimum normalized distance per pickup (1 for `∅`).
    Facility(Vec<f64>),
    /// Covered flags, concatenated across agents.
    Coverage(Vec<bool>),
    /// Current per-agent values.
    Oracle(Vec<f64>),
}

/// Incremental evaluation of `f` along a growing set.
///
/// Marginal queries cost `O(m)` for the built-in families instead of a full
/// re-evaluation.
#[derive(Clone)]
pub struct Tracker<'a> {
    objective: &'a DecomposableObjective,
    members: Vec<Element>,
    state: TrackerState,
    total: f64,
}

impl Tracker<'_> {
    /// `f` of the current set.
    pub fn value(&self) -> f64 {
        self.total
    }

    pub fn members(&self) -> &[Element] {
        &self.members
    }

    pub fn contains(&self, u: Element) -> bool {
        self.members.binary_search(&u).is_ok()
    }

    /// `f(S ∪ {u}) - f(S)` for the current set `S`; zero for members and dummies.
    pub fn gain(&self, u: Element) -> f64 {
        if self.objective.ground.is_dummy(u) || self.contains(u) {
            return 0.0;
        }
        let obj = self.objective;
        let raw = match (&self.state, &obj.agents) {
            (TrackerState::Facility(mins), Agents::Facility(t)) => mins
                .iter()
                .zip(t.column(u))
                .map(|(&m, &d)| (m - d).max(0.0))
                .sum::<f64>(),
            (TrackerState::Coverage(covered), Agents::Coverage(t)) => (0..t.universes.len())
                .map(|i| {
                    let base = t.offsets[i];
                    let fresh = t.covers[i][u]
                        .iter()
                        .filter(|&&x| !covered[base + x as usize])
                        .count();
                    fresh as f64 / t.universes[i] as f64
                })
                .sum::<f64>(),
            (TrackerState::Oracle(values), Agents::Oracle(agents)) => {
                let grown = with_element(obj.real_part(&self.members), u);
                agents
                    .iter()
                    .zip(values)
                    .map(|(f, &v)| f.value(&grown) - v)
                    .sum::<f64>()
            }
            _ => unreachable!("tracker state matches its objective family"),
        };
        raw * obj.scale
    }

    /// Adds `u` to the current set and returns its marginal gain.
    pub fn insert(&mut self, u: Element) -> f64 {
        let pos = match self.members.binary_search(&u) {
            Ok(_) => return 0.0,
            Err(pos) => pos,
        };
        let obj = self.objective;
        if obj.ground.is_dummy(u) {
            self.members.insert(pos, u);
            return 0.0;
        }
        let raw = match (&mut self.state, &obj.agents) {
            (TrackerState::Facility(mins), Agents::Facility(t)) => {
                let mut gain = 0.0;
                for (m, &d) in mins.iter_mut().zip(t.column(u)) {
                    if d < *m {
                        gain += *m - d;
                        *m = d;
                    }
                }
                gain
            }
            (TrackerState::Coverage(covered), Agents::Coverage(t)) => {
                let mut gain = 0.0;
                for i in 0..t.universes.len() {
                    let base = t.offsets[i];
                    let mut fresh = 0usize;
                    for &x in &t.covers[i][u] {
                        let slot = &mut covered[base + x as usize];
                        if !*slot {
                            *slot = true;
                            fresh += 1;
                        }
                    }
                    gain += fresh as f64 / t.universes[i] as f64;
                }
                gain
            }
            (TrackerState::Oracle(values), Agents::Oracle(agents)) => {
                let grown = with_element(obj.real_part(&self.members), u);
                let mut gain = 0.0;
                for (f, v) in agents.iter().zip(values.iter_mut()) {
                    let next = f.value(&grown);
                    gain += next - *v;
                    *v = next;
                }
                gain
            }
            _ => unreachable!("tracker state matches its objective family"),
        };
        self.members.insert(pos, u);
        let gain = raw * obj.scale;
        self.total += gain;
        gain
    }
}

/// How [`check_submodular_monotone`] explores the lattice of subsets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CheckMode {
    /// Every `(S, S ∪ {v}, u)` triple; requires `n ≤ 14`.
    Exhaustive,
    /// Random chains `S ⊆ T` with a random `u ∉ T`.
    Sampled { trials: usize, seed: u64 },
}

/// `f(S ∪ {u}) - f(S) < f(T ∪ {u}) - f(T)` for some `S ⊆ T`, `u ∉ T`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiminishingViolation {
    pub smaller: Vec<Element>,
    pub larger: Vec<Element>,
    pub element: Element,
    pub gain_smaller: f64,
    pub gain_larger: f64,
}

/// `f(S) > f(T)` for some `S ⊆ T`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityViolation {
    pub subset: Vec<Element>,
    pub superset: Vec<Element>,
    pub subset_value: f64,
    pub superset_value: f64,
}

/// Violations found by [`check_submodular_monotone`]; at most 32 of each
/// kind are kept, the counts are exact.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubmodularityReport {
    pub submodularity: Vec<DiminishingViolation>,
    pub submodularity_count: usize,
    pub monotonicity: Vec<MonotonicityViolation>,
    pub monotonicity_count: usize,
    pub checks: usize,
}

impl SubmodularityReport {
    pub fn is_submodular(&self) -> bool {
        self.submodularity_count == 0
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_count == 0
    }

    pub fn is_clean(&self) -> bool {
        self.is_submodular() && self.is_monotone()
    }

    fn diminishing(&mut self, v: DiminishingViolation) {
        self.submodularity_count += 1;
        if self.submodularity.len() < MAX_REPORTED {
            self.submodularity.push(v);
        }
    }

    fn monotone(&mut self, v: MonotonicityViolation) {
        self.monotonicity_count += 1;
        if self.monotonicity.len() < MAX_REPORTED {
            self.monotonicity.push(v);
        }
    }
}

/// Scans an objective for violations of diminishing returns and monotonicity.
pub fn check_submodular_monotone(
    obj: &DecomposableObjective,
    mode: CheckMode,
) -> Result<SubmodularityReport> {
    check_set_function(obj.len(), |s| obj.value(s), mode)
}

/// [`check_submodular_monotone`] for an arbitrary set function on `n` elements.
pub fn check_set_function(
    n: usize,
    f: impl Fn(&[Element]) -> f64,
    mode: CheckMode,
) -> Result<SubmodularityReport> {
    let mut report = SubmodularityReport::default();
    match mode {
        CheckMode::Exhaustive => {
            if n > EXHAUSTIVE_CHECK_MAX_N {
                return Err(Error::TooLarge(format!(
                    "exhaustive check over {n} elements (limit {EXHAUSTIVE_CHECK_MAX_N})"
                )));
            }
            let table: Vec<f64> = (0..1usize << n).map(|m| f(&mask_to_set(m))).collect();
            for s in 0..1usize << n {
                for u in (0..n).filter(|&u| s >> u & 1 == 0) {
                    let su = s | 1 << u;
                    let gain_s = table[su] - table[s];
                    report.checks += 1;
                    if gain_s < -CHECK_TOLERANCE {
                        report.monotone(MonotonicityViolation {
                            subset: mask_to_set(s),
                            superset: mask_to_set(su),
                            subset_value: table[s],
                            superset_value: table[su],
                        });
                    }
                    for v in (0..n).filter(|&v| v != u && s >> v & 1 == 0) {
                        let t = s | 1 << v;
                        let gain_t = table[t | 1 << u] - table[t];
                        report.checks += 1;
                        if gain_s < gain_t - CHECK_TOLERANCE {
                            report.diminishing(DiminishingViolation {
                                smaller: mask_to_set(s),
                                larger: mask_to_set(t),
                                element: u,
                                gain_smaller: gain_s,
                                gain_larger: gain_t,
                            });
                        }
                    }
                }
            }
        }
        CheckMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials {
                let larger: Vec<Element> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                let smaller: Vec<Element> =
                    larger.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                let (fs, ft) = (f(&smaller), f(&larger));
                report.checks += 1;
                if fs > ft + CHECK_TOLERANCE {
                    report.monotone(MonotonicityViolation {
                        subset: smaller.clone(),
                        superset: larger.clone(),
                        subset_value: fs,
                        superset_value: ft,
                    });
                }
                let outside: Vec<Element> =
                    (0..n).filter(|u| larger.binary_search(u).is_err()).collect();
                if outside.is_empty() {
                    continue;
                }
                let u = outside[rng.gen_range(0..outside.len())];
                let gain_s = f(&with_element(&smaller, u)) - fs;
                let gain_t = f(&with_element(&larger, u)) - ft;
                report.checks += 1;
                if gain_s < gain_t - CHECK_TOLERANCE {
                    report.diminishing(DiminishingViolation {
                        smaller,
                        larger,
                        element: u,
                        gain_smaller: gain_s,
                        gain_larger: gain_t,
                    });
                }
            }
        }
    }
    Ok(report)
}
