use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::representation::{Representation, Verdict, EPS_INDIFF};
use crate::streams::Stream;

type Comparator = dyn Fn(&Stream, &Stream) -> Result<Verdict> + Send + Sync;

/// A source of pairwise verdicts.
pub trait Evidence {
    /// `None` when the evidence holds no verdict for the pair.
    fn query(&self, x: &Stream, y: &Stream) -> Result<Option<Verdict>>;

    /// The representation generating the verdicts, when known.
    fn backing(&self) -> Option<&Representation> {
        None
    }

    fn is_tabular(&self) -> bool {
        false
    }

    /// All streams the evidence speaks about, for tabular evidence.
    fn streams(&self) -> Option<&[Stream]> {
        None
    }
}

/// A deterministic comparator with a query counter.
pub struct PreferenceOracle {
    comparator: Box<Comparator>,
    backing: Option<Representation>,
    queries: AtomicU64,
}

impl PreferenceOracle {
    pub fn new<F>(comparator: F) -> Self
    where
        F: Fn(&Stream, &Stream) -> Result<Verdict> + Send + Sync + 'static,
    {
        PreferenceOracle { comparator: Box::new(comparator), backing: None, queries: AtomicU64::new(0) }
    }

    pub fn from_representation(rep: Representation) -> Self {
        Self::with_band(rep, EPS_INDIFF)
    }

    pub fn with_band(rep: Representation, eps: f64) -> Self {
        let inner = rep.clone();
        PreferenceOracle {
            comparator: Box::new(move |x, y| inner.compare_with(x, y, eps)),
            backing: Some(rep),
            queries: AtomicU64::new(0),
        }
    }

    /// Hides the backing representation so checks treat this as a black box.
    pub fn opaque(mut self) -> Self {
        self.backing = None;
        self
    }

    pub fn compare(&self, x: &Stream, y: &Stream) -> Result<Verdict> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        (self.comparator)(x, y)
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_count(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }
}

impl fmt::Debug for PreferenceOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PreferenceOracle")
            .field("backing", &self.backing)
            .field("queries", &self.query_count())
            .finish()
    }
}

impl Evidence for PreferenceOracle {
    fn query(&self, x: &Stream, y: &Stream) -> Result<Option<Verdict>> {
        self.compare(x, y).map(Some)
    }

    fn backing(&self) -> Option<&Representation> {
        self.backing.as_ref()
    }
}

/// A table of verdicts among a fixed list of streams. Entry `(i, j)` is the
/// verdict of stream `i` against stream `j`; gaps are allowed and reported by
/// the weak-order check.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePreferenceRelation {
    streams: Vec<Stream>,
    verdicts: Vec<Vec<Option<Verdict>>>,
}

impl FinitePreferenceRelation {
    pub fn new(streams: Vec<Stream>, verdicts: Vec<Vec<Option<Verdict>>>) -> Result<Self> {
        let n = streams.len();
        if n == 0 {
            return Err(Error::argument("a relation needs at least one stream"));
        }
        if verdicts.len() != n || verdicts.iter().any(|r| r.len() != n) {
            return Err(Error::argument(format!("verdict matrix must be {n} x {n}")));
        }
        for (i, row) in verdicts.iter().enumerate() {
            if let Some(v) = row[i] {
                if v != Verdict::Indifferent {
                    return Err(Error::argument(format!("diagonal entry {i} must be '='")));
                }
            }
        }
        if streams.iter().any(|s| !s.same_prizes(&streams[0])) {
            return Err(Error::domain("relation streams use different prize sets"));
        }
        Ok(FinitePreferenceRelation { streams, verdicts })
    }

    /// The complete relation induced by `rep` on `streams`.
    pub fn from_representation(rep: &Representation, streams: Vec<Stream>) -> Result<Self> {
        let verdicts = streams
            .iter()
            .map(|x| streams.iter().map(|y| rep.compare(x, y).map(Some)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(streams, verdicts)
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    pub fn stream(&self, i: usize) -> &Stream {
        &self.streams[i]
    }

    pub fn verdict(&self, i: usize, j: usize) -> Option<Verdict> {
        self.verdicts[i][j]
    }

    pub fn verdicts(&self) -> &[Vec<Option<Verdict>>] {
        &self.verdicts
    }

    pub fn index_of(&self, x: &Stream) -> Option<usize> {
        self.streams.iter().position(|s| s == x)
    }

    /// Every recorded `(i, j, verdict)` with `i < j`, mirrored entries
    /// folded in when the upper one is missing.
    pub fn pairs(&self) -> Vec<(usize, usize, Verdict)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if let Some(v) = self.verdicts[i][j].or(self.verdicts[j][i].map(Verdict::flip)) {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

impl Evidence for FinitePreferenceRelation {
    fn query(&self, x: &Stream, y: &Stream) -> Result<Option<Verdict>> {
        let (Some(i), Some(j)) = (self.index_of(x), self.index_of(y)) else {
            return Ok(None);
        };
        Ok(self.verdicts[i][j])
    }

    fn is_tabular(&self) -> bool {
        true
    }

    fn streams(&self) -> Option<&[Stream]> {
        Some(&self.streams)
    }
}
