//! Observation sequences, discrete state spaces, empirical measures and
//! transportation costs.
//!
//! States are identified by the exact bit pattern of their coordinates. Two
//! observations are the same state only if every coordinate is bit-identical,
//! so deduplicating an observed sequence never merges distinct values.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance on the total mass of an [`EmpiricalMeasure`].
pub const MASS_TOLERANCE: f64 = 1e-12;

fn state_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

fn check_finite(x: &[f64], what: &str) -> Result<()> {
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return invalid(format!("{what} contains a non-finite value ({v})"));
    }
    Ok(())
}

/// An ordered multiset of `d`-dimensional observations `(x_1, ..., x_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSequence {
    dim: usize,
    data: Vec<f64>,
}

impl SampleSequence {
    /// Builds a sequence from row-major data of dimension `dim`.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("sample dimension must be at least 1");
        }
        if data.is_empty() {
            return invalid("sample sequence is empty");
        }
        if data.len() % dim != 0 {
            return invalid(format!(
                "{} values cannot be split into samples of dimension {dim}",
                data.len()
            ));
        }
        check_finite(&data, "sample sequence")?;
        Ok(Self { dim, data })
    }

    /// Builds a one-dimensional sequence.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = match rows.first() {
            Some(r) => r.len(),
            None => return invalid("sample sequence is empty"),
        };
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return invalid(format!(
                "sample {i} has dimension {} but sample 0 has dimension {dim}",
                r.len()
            ));
        }
        Self::from_flat(dim, rows.concat())
    }

    /// Parses the plain-text sample format: one observation per line,
    /// components separated by whitespace, `#` lines and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::InvalidInput(format!(
                            "line {}: cannot parse {tok:?} as a number",
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn read_from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidInput(format!("cannot read samples from {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false: sequences are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Replaces observation `i` in place.
    pub fn set(&mut self, i: usize, value: &[f64]) {
        assert_eq!(value.len(), self.dim, "replacement has the wrong dimension");
        self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(value);
    }

    /// Number of positions whose observations differ bit-wise.
    pub fn hamming_distance(&self, other: &SampleSequence) -> Result<usize> {
        check_same_shape(self, other)?;
        Ok(self
            .iter()
            .zip(other.iter())
            .filter(|(a, b)| state_key(a) != state_key(b))
            .count())
    }

    /// Bit-level equality of every observation.
    pub fn bit_eq(&self, other: &SampleSequence) -> bool {
        self.dim == other.dim
            && self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn check_same_shape(a: &SampleSequence, b: &SampleSequence) -> Result<()> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return invalid(format!(
            "sequence shapes differ: {}x{} vs {}x{}",
            a.len(),
            a.dim(),
            b.len(),
            b.dim()
        ));
    }
    Ok(())
}

/// A finite ordered set of distinct states.
#[derive(Debug, Clone)]
pub struct StateSpace {
    dim: usize,
    coords: Vec<f64>,
    index: HashMap<Vec<u64>, usize>,
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.coords.len() == other.coords.len()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl StateSpace {
    /// The unique values of `seq`, in order of first occurrence.
    pub fn from_sequence(seq: &SampleSequence) -> Self {
        let mut space = Self {
            dim: seq.dim(),
            coords: Vec::new(),
            index: HashMap::new(),
        };
        for x in seq.iter() {
            space.push_if_new(x);
        }
        space
    }

    /// A user-chosen state set. Duplicate states are rejected.
    pub fn new(states: &[Vec<f64>]) -> Result<Self> {
        let dim = match states.first() {
            Some(s) => s.len(),
            None => return invalid("state space is empty"),
        };
        if dim == 0 {
            return invalid("state dimension must be at least 1");
        }
        let mut space = Self {
            dim,
            coords: Vec::with_capacity(dim * states.len()),
            index: HashMap::with_capacity(states.len()),
        };
        for (i, s) in states.iter().enumerate() {
            if s.len() != dim {
                return invalid(format!("state {i} has dimension {} instead of {dim}", s.len()));
            }
            check_finite(s, "state")?;
            if !space.push_if_new(s) {
                return invalid(format!("state {i} ({s:?}) is listed twice"));
            }
        }
        Ok(space)
    }

    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Self::new(&rows)
    }

    fn push_if_new(&mut self, x: &[f64]) -> bool {
        let key = state_key(x);
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.len());
        self.coords.extend_from_slice(x);
        true
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim {
            return None;
        }
        self.index.get(&state_key(x)).copied()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.index_of(x).is_some()
    }

    /// Position of every observation of `seq` in this state space.
    pub fn indices_of(&self, seq: &SampleSequence) -> Result<Vec<usize>> {
        seq.iter()
            .enumerate()
            .map(|(i, x)| {
                self.index_of(x).ok_or_else(|| {
                    Error::InvalidInput(format!("sample {i} ({x:?}) is not a state of the space"))
                })
            })
            .collect()
    }
}

/// A probability measure made of weighted atoms on a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    support: StateSpace,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(support: StateSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != support.len() {
            return invalid(format!(
                "{} weights for {} states",
                weights.len(),
                support.len()
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return invalid(format!("measure weight {w} is not a nonnegative number"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return invalid(format!("measure weights sum to {total}, not 1"));
        }
        Ok(Self { support, weights })
    }

    /// Uniform weights over `support`.
    pub fn uniform(support: StateSpace) -> Self {
        let n = support.len();
        Self {
            weights: vec![1.0 / n as f64; n],
            support,
        }
    }

    pub fn point_mass(state: &[f64]) -> Result<Self> {
        Ok(Self {
            support: StateSpace::new(&[state.to_vec()])?,
            weights: vec![1.0],
        })
    }

    pub fn support(&self) -> &StateSpace {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.support.iter().zip(self.weights.iter().copied())
    }

    /// Mass at `state`, zero when the state is not in the support.
    pub fn weight_of(&self, state: &[f64]) -> f64 {
        self.support
            .index_of(state)
            .map_or(0.0, |i| self.weights[i])
    }

    /// The mixture `(1 - eps) * self + eps * delta_state`.
    pub fn mix_with_point(&self, eps: f64, state: &[f64]) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return invalid(format!("mixture weight {eps} is outside [0, 1]"));
        }
        if state.len() != self.dim() {
            return invalid("mixture state has the wrong dimension");
        }
        let mut support = self.support.clone();
        let mut weights: Vec<f64> = self.weights.iter().map(|w| (1.0 - eps) * w).collect();
        match support.index_of(state) {
            Some(i) => weights[i] += eps,
            None => {
                check_finite(state, "state")?;
                support.push_if_new(state);
                weights.push(eps);
            }
        }
        Ok(Self { support, weights })
    }

    /// This measure's mass on `states`, renormalized to a probability measure.
    pub fn restricted_to(&self, states: &StateSpace) -> Result<Self> {
        let raw: Vec<f64> = states.iter().map(|s| self.weight_of(s)).collect();
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return invalid("the measure puts no mass on the requested states");
        }
        Ok(Self {
            support: states.clone(),
            weights: raw.iter().map(|w| w / total).collect(),
        })
    }
}

/// The empirical measure of `seq`: mass `count / N` on each unique value.
pub fn empirical_measure(seq: &SampleSequence) -> EmpiricalMeasure {
    let support = StateSpace::from_sequence(seq);
    let mut counts = vec![0usize; support.len()];
    for x in seq.iter() {
        // every sample is a state of its own support
        counts[support.index_of(x).unwrap()] += 1;
    }
    let n = seq.len() as f64;
    EmpiricalMeasure {
        weights: counts.iter().map(|&c| c as f64 / n).collect(),
        support,
    }
}

/// A tabulated cost `c(x, x~)` listed pair by pair.
///
/// Pairs of identical states cost zero unless listed. Looking up any other
/// unlisted pair is an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCost {
    entries: Vec<(Vec<f64>, Vec<f64>, f64)>,
    #[serde(skip)]
    lookup: HashMap<(Vec<u64>, Vec<u64>), f64>,
}

impl TabulatedCost {
    pub fn new(entries: Vec<(Vec<f64>, Vec<f64>, f64)>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(entries.len());
        for (from, to, c) in &entries {
            if !(c.is_finite() && *c >= 0.0) {
                return invalid(format!("tabulated cost {c} is not a nonnegative number"));
            }
            if from.len() != to.len() {
                return invalid("tabulated cost pair mixes dimensions");
            }
            lookup.insert((state_key(from), state_key(to)), *c);
        }
        Ok(Self { entries, lookup })
    }

    /// One-dimensional table from `(from, to, cost)` triples.
    pub fn from_scalar_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        Self::new(
            triples
                .iter()
                .map(|&(a, b, c)| (vec![a], vec![b], c))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(Vec<f64>, Vec<f64>, f64)] {
        &self.entries
    }

    fn get(&self, from: &[f64], to: &[f64]) -> Result<f64> {
        let key = (state_key(from), state_key(to));
        match self.lookup.get(&key) {
            Some(&c) => Ok(c),
            None if key.0 == key.1 => Ok(0.0),
            None => invalid(format!("no tabulated cost for {from:?} -> {to:?}")),
        }
    }
}

/// The per-observation correction cost `c(x, x~)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CostFunctionSpec {
    /// Zero for identical states, one otherwise.
    Indicator,
    /// `scale * ceil(sum_k |x~_k - x_k|)`.
    CeilProportional { scale: f64 },
    Tabulated(TabulatedCost),
}

impl CostFunctionSpec {
    pub fn ceil_proportional(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return invalid(format!("cost scale must be nonnegative, got {scale}"));
        }
        Ok(Self::CeilProportional { scale })
    }

    pub fn cost(&self, from: &[f64], to: &[f64]) -> Result<f64> {
        if from.len() != to.len() {
            return invalid("cost arguments have different dimensions");
        }
        match self {
            Self::Indicator => {
                let same = from
                    .iter()
                    .zip(to)
                    .all(|(a, b)| a.to_bits() == b.to_bits());
                Ok(if same { 0.0 } else { 1.0 })
            }
            Self::CeilProportional { scale } => {
                if *scale < 0.0 {
                    return invalid(format!("cost scale must be nonnegative, got {scale}"));
                }
                let dist: f64 = from.iter().zip(to).map(|(a, b)| (b - a).abs()).sum();
                Ok(scale * dist.ceil())
            }
            Self::Tabulated(table) => table.get(from, to),
        }
    }
}

impl fmt::Display for CostFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Indicator => write!(f, "indicator"),
            Self::CeilProportional { scale } => write!(f, "ceil_proportional:{scale}"),
            Self::Tabulated(t) => write!(f, "tabulated[{}]", t.entries().len()),
        }
    }
}

impl FromStr for CostFunctionSpec {
    type Err = Error;

    /// Accepts `indicator` and `ceil_proportional:<scale>` (alias `ceil:<scale>`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "indicator" {
            return Ok(Self::Indicator);
        }
        if let Some(rest) = s
            .strip_prefix("ceil_proportional:")
            .or_else(|| s.strip_prefix("ceil:"))
        {
            let scale: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad cost scale {rest:?}")))?;
            return Self::ceil_proportional(scale);
        }
        invalid(format!(
            "unknown cost {s:?} (expected \"indicator\" or \"ceil_proportional:<scale>\")"
        ))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CostRepr {
    Named(String),
    Table { tabulated: Vec<(f64, f64, f64)> },
}

impl Serialize for CostFunctionSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Tabulated(t) => {
                let mut triples = Vec::with_capacity(t.entries().len());
                for (a, b, c) in t.entries() {
                    if a.len() != 1 {
                        return Err(serde::ser::Error::custom(
                            "only one-dimensional tabulated costs serialize",
                        ));
                    }
                    triples.push((a[0], b[0], *c));
                }
                CostRepr::Table { tabulated: triples }.serialize(ser)
            }
            other => CostRepr::Named(other.to_string()).serialize(ser),
        }
    }
}

impl<'de> Deserialize<'de> for CostFunctionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        match CostRepr::deserialize(de)? {
            CostRepr::Named(s) => s.parse().map_err(serde::de::Error::custom),
            CostRepr::Table { tabulated } => TabulatedCost::from_scalar_triples(&tabulated)
                .map(Self::Tabulated)
                .map_err(serde::de::Error::custom),
        }
    }
}

/// Cost of moving each source state to each target state.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    pub source: StateSpace,
    pub target: StateSpace,
    pub entries: Array2<f64>,
}

pub fn build_cost_matrix(
    source: &StateSpace,
    target: &StateSpace,
    cost: &CostFunctionSpec,
) -> Result<CostMatrix> {
    if source.dim() != target.dim() {
        return invalid("source and target states have different dimensions");
    }
    let mut entries = Array2::zeros((source.len(), target.len()));
    for (i, s) in source.iter().enumerate() {
        for (j, t) in target.iter().enumerate() {
            entries[[i, j]] = cost.cost(s, t)?;
        }
    }
    Ok(CostMatrix {
        source: source.clone(),
        target: target.clone(),
        entries,
    })
}

/// Total correction cost `sum_i c(x_i, x~_i)`.
pub fn sequence_cost(
    original: &SampleSequence,
    modified: &SampleSequence,
    cost: &CostFunctionSpec,
) -> Result<f64> {
    check_same_shape(original, modified)?;
    original
        .iter()
        .zip(modified.iter())
        .map(|(a, b)| cost.cost(a, b))
        .sum()
}
