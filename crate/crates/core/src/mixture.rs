//! Lotteries over a finite prize set.
//!
//! The set of lotteries is the concrete mixture set used throughout the crate:
//! `mix(x, lam, y)` is the pointwise convex combination and every utility
//! function acts on lotteries by expectation, which makes it mixture linear.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance on probability sums and on componentwise lottery equality.
pub const PROB_TOL: f64 = 1e-12;

/// An ordered, non-empty set of uniquely labelled prizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrizeSet {
    ids: Vec<String>,
}

impl PrizeSet {
    pub fn new<I, S>(ids: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        if ids.is_empty() {
            return Err(Error::argument("prize set must be non-empty"));
        }
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(Error::argument(format!("duplicate prize id `{id}`")));
            }
        }
        Ok(Arc::new(PrizeSet { ids }))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|p| p == id)
    }
}

fn same_prizes(a: &Arc<PrizeSet>, b: &Arc<PrizeSet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A finite probability distribution over a prize set.
#[derive(Clone)]
pub struct Lottery {
    prizes: Arc<PrizeSet>,
    probs: Arc<[f64]>,
}

impl Lottery {
    pub fn new(prizes: Arc<PrizeSet>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != prizes.len() {
            return Err(Error::domain(format!(
                "lottery has {} probabilities for {} prizes",
                probs.len(),
                prizes.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::argument(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::argument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Lottery { prizes, probs: probs.into() })
    }

    /// The lottery paying prize `index` for sure.
    pub fn degenerate(prizes: &Arc<PrizeSet>, index: usize) -> Result<Self> {
        if index >= prizes.len() {
            return Err(Error::argument(format!("prize index {index} out of range")));
        }
        let mut probs = vec![0.0; prizes.len()];
        probs[index] = 1.0;
        Ok(Lottery { prizes: prizes.clone(), probs: probs.into() })
    }

    pub fn degenerate_id(prizes: &Arc<PrizeSet>, id: &str) -> Result<Self> {
        let index = prizes
            .index_of(id)
            .ok_or_else(|| Error::domain(format!("unknown prize `{id}`")))?;
        Self::degenerate(prizes, index)
    }

    /// Build from a sparse map; absent prizes get probability zero.
    pub fn from_map(prizes: &Arc<PrizeSet>, support: &BTreeMap<String, f64>) -> Result<Self> {
        let mut probs = vec![0.0; prizes.len()];
        for (id, p) in support {
            let i = prizes
                .index_of(id)
                .ok_or_else(|| Error::domain(format!("unknown prize `{id}`")))?;
            probs[i] = *p;
        }
        Self::new(prizes.clone(), probs)
    }

    pub fn prizes(&self) -> &Arc<PrizeSet> {
        &self.prizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, id: &str) -> Option<f64> {
        self.prizes.index_of(id).map(|i| self.probs[i])
    }

    /// Non-zero entries keyed by prize id.
    pub fn support(&self) -> BTreeMap<String, f64> {
        self.prizes
            .ids()
            .iter()
            .zip(self.probs.iter())
            .filter(|(_, p)| **p > 0.0)
            .map(|(id, p)| (id.clone(), *p))
            .collect()
    }

    pub fn is_degenerate(&self) -> Option<usize> {
        self.probs.iter().position(|p| (*p - 1.0).abs() <= PROB_TOL)
    }

    pub fn approx_eq(&self, other: &Lottery, tol: f64) -> bool {
        same_prizes(&self.prizes, &other.prizes)
            && self.probs.iter().zip(other.probs.iter()).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Componentwise equality within [`PROB_TOL`].
impl PartialEq for Lottery {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, PROB_TOL)
    }
}

impl fmt::Debug for Lottery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(i) = self.is_degenerate() {
            return write!(f, "δ[{}]", self.prizes.ids()[i]);
        }
        f.debug_map().entries(self.support()).finish()
    }
}

/// The mixture `x lam y`: probability `lam` on `x` and `1 - lam` on `y`.
pub fn mix(x: &Lottery, lam: f64, y: &Lottery) -> Result<Lottery> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::argument(format!("mixture weight {lam} outside [0, 1]")));
    }
    if !same_prizes(&x.prizes, &y.prizes) {
        return Err(Error::domain("lotteries are over different prize sets"));
    }
    if lam == 1.0 {
        return Ok(x.clone());
    }
    if lam == 0.0 {
        return Ok(y.clone());
    }
    let probs: Vec<f64> = x
        .probs
        .iter()
        .zip(y.probs.iter())
        .map(|(a, b)| lam * a + (1.0 - lam) * b)
        .collect();
    Ok(Lottery { prizes: x.prizes.clone(), probs: probs.into() })
}

/// A utility index on prizes, extended to lotteries by expectation.
#[derive(Clone, PartialEq)]
pub struct UtilityFunction {
    prizes: Arc<PrizeSet>,
    values: Vec<f64>,
}

impl UtilityFunction {
    pub fn new(prizes: Arc<PrizeSet>, values: Vec<f64>) -> Result<Self> {
        if values.len() != prizes.len() {
            return Err(Error::domain(format!(
                "utility table has {} values for {} prizes",
                values.len(),
                prizes.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("utility values must be finite"));
        }
        Ok(UtilityFunction { prizes, values })
    }

    /// Every prize of `prizes` must appear in the map.
    pub fn from_map(prizes: &Arc<PrizeSet>, table: &BTreeMap<String, f64>) -> Result<Self> {
        if let Some(id) = table.keys().find(|id| prizes.index_of(id).is_none()) {
            return Err(Error::domain(format!("utility given for unknown prize `{id}`")));
        }
        let values = prizes
            .ids()
            .iter()
            .map(|id| {
                table
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::domain(format!("no utility for prize `{id}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(prizes.clone(), values)
    }

    pub fn prizes(&self) -> &Arc<PrizeSet> {
        &self.prizes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, id: &str) -> Option<f64> {
        self.prizes.index_of(id).map(|i| self.values[i])
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.prizes.ids().iter().cloned().zip(self.values.iter().copied()).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_constant(&self) -> bool {
        self.range() <= 0.0
    }

    /// Indices of a best and a worst prize.
    pub fn extremes(&self) -> (usize, usize) {
        let mut best = 0;
        let mut worst = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
            if *v < self.values[worst] {
                worst = i;
            }
        }
        (best, worst)
    }

    /// `a * u + b`.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        UtilityFunction {
            prizes: self.prizes.clone(),
            values: self.values.iter().map(|v| a * v + b).collect(),
        }
    }

    pub fn expected(&self, x: &Lottery) -> Result<f64> {
        expected_utility(self, x)
    }
}

impl fmt::Debug for UtilityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.to_map()).finish()
    }
}

pub fn expected_utility(u: &UtilityFunction, x: &Lottery) -> Result<f64> {
    if !same_prizes(&u.prizes, &x.prizes) {
        return Err(Error::domain("utility and lottery are over different prize sets"));
    }
    Ok(x.probs.iter().zip(u.values.iter()).map(|(p, v)| p * v).sum())
}
