//! Streams of lotteries, indexed from period 1.
//!
//! Infinite streams are eventually constant: a finite prefix followed by a
//! tail lottery repeated forever. With the tail equal to the session anchor
//! this is an ultimately constant stream; with an empty prefix it is a
//! constant stream. Mixing an ultimately constant stream with a constant one
//! leaves the tail at `anchor lam a`, which the same shape covers exactly.

use std::fmt;

use crate::error::{Error, Result};
use crate::mixture::{mix, Lottery};

#[derive(Clone, PartialEq)]
pub struct FiniteStream {
    periods: Vec<Lottery>,
}

impl FiniteStream {
    pub fn new(periods: Vec<Lottery>) -> Result<Self> {
        let first = periods
            .first()
            .ok_or_else(|| Error::argument("a finite stream needs at least one period"))?;
        if periods.iter().any(|p| p.prizes() != first.prizes()) {
            return Err(Error::domain("stream periods use different prize sets"));
        }
        Ok(FiniteStream { periods })
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn periods(&self) -> &[Lottery] {
        &self.periods
    }
}

/// `(prefix_1, ..., prefix_k, tail, tail, ...)`, kept with no trailing
/// prefix entries equal to the tail.
#[derive(Clone, PartialEq)]
pub struct InfiniteStream {
    prefix: Vec<Lottery>,
    tail: Lottery,
}

impl InfiniteStream {
    pub fn new(mut prefix: Vec<Lottery>, tail: Lottery) -> Result<Self> {
        if prefix.iter().any(|p| p.prizes() != tail.prizes()) {
            return Err(Error::domain("stream periods use different prize sets"));
        }
        while prefix.last().is_some_and(|p| *p == tail) {
            prefix.pop();
        }
        Ok(InfiniteStream { prefix, tail })
    }

    pub fn constant(value: Lottery) -> Self {
        InfiniteStream { prefix: Vec::new(), tail: value }
    }

    pub fn prefix(&self) -> &[Lottery] {
        &self.prefix
    }

    pub fn tail(&self) -> &Lottery {
        &self.tail
    }

    pub fn is_constant(&self) -> bool {
        self.prefix.is_empty()
    }

    /// The first `k` periods, padding with the tail.
    pub fn head(&self, k: usize) -> Vec<Lottery> {
        (1..=k).map(|t| self.at(t).clone()).collect()
    }

    pub fn at(&self, t: usize) -> &Lottery {
        self.prefix.get(t - 1).unwrap_or(&self.tail)
    }
}

#[derive(Clone, PartialEq)]
pub enum Stream {
    Finite(FiniteStream),
    Infinite(InfiniteStream),
}

impl Stream {
    pub fn finite(periods: Vec<Lottery>) -> Result<Self> {
        FiniteStream::new(periods).map(Stream::Finite)
    }

    pub fn infinite(prefix: Vec<Lottery>, tail: Lottery) -> Result<Self> {
        InfiniteStream::new(prefix, tail).map(Stream::Infinite)
    }

    pub fn constant(value: Lottery) -> Self {
        Stream::Infinite(InfiniteStream::constant(value))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Stream::Finite(_))
    }

    /// Number of periods, `None` for infinite streams.
    pub fn len(&self) -> Option<usize> {
        match self {
            Stream::Finite(f) => Some(f.len()),
            Stream::Infinite(_) => None,
        }
    }

    /// Periods listed explicitly: all of a finite stream, the prefix otherwise.
    pub fn explicit(&self) -> &[Lottery] {
        match self {
            Stream::Finite(f) => &f.periods,
            Stream::Infinite(s) => &s.prefix,
        }
    }

    pub fn tail(&self) -> Option<&Lottery> {
        match self {
            Stream::Finite(_) => None,
            Stream::Infinite(s) => Some(&s.tail),
        }
    }

    pub fn at(&self, t: usize) -> Result<&Lottery> {
        if t == 0 {
            return Err(Error::argument("periods start at 1"));
        }
        match self {
            Stream::Finite(f) => f
                .periods
                .get(t - 1)
                .ok_or_else(|| Error::argument(format!("period {t} beyond stream length {}", f.len()))),
            Stream::Infinite(s) => Ok(s.at(t)),
        }
    }

    fn any_lottery(&self) -> &Lottery {
        match self {
            Stream::Finite(f) => &f.periods[0],
            Stream::Infinite(s) => &s.tail,
        }
    }

    pub fn same_prizes(&self, other: &Stream) -> bool {
        self.any_lottery().prizes() == other.any_lottery().prizes()
    }

    fn rebuild(&self, periods: Vec<Lottery>) -> Stream {
        match self {
            Stream::Finite(_) => Stream::Finite(FiniteStream { periods }),
            Stream::Infinite(s) => Stream::Infinite(
                InfiniteStream::new(periods, s.tail.clone()).expect("prize sets already checked"),
            ),
        }
    }

    /// Explicit periods covering at least `1..=k`.
    fn materialize(&self, k: usize) -> Result<Vec<Lottery>> {
        match self {
            Stream::Finite(f) => {
                if k > f.len() {
                    return Err(Error::argument(format!("period {k} beyond stream length {}", f.len())));
                }
                Ok(f.periods.clone())
            }
            Stream::Infinite(s) => Ok(s.head(k.max(s.prefix.len()))),
        }
    }

    /// Replace period `k` with `a`.
    pub fn set_at(&self, k: usize, a: &Lottery) -> Result<Stream> {
        if k == 0 {
            return Err(Error::argument("periods start at 1"));
        }
        self.check_lottery(a)?;
        let mut p = self.materialize(k)?;
        p[k - 1] = a.clone();
        Ok(self.rebuild(p))
    }

    /// Exchange periods `i` and `j`.
    pub fn swap(&self, i: usize, j: usize) -> Result<Stream> {
        if i == 0 || j == 0 {
            return Err(Error::argument("periods start at 1"));
        }
        let mut p = self.materialize(i.max(j))?;
        p.swap(i - 1, j - 1);
        Ok(self.rebuild(p))
    }

    /// Finite streams: take period `k` out and append it at the end.
    /// Infinite streams: delete period `k` and shift the rest forward.
    pub fn advance_from(&self, k: usize) -> Result<Stream> {
        if k == 0 {
            return Err(Error::argument("periods start at 1"));
        }
        let mut p = self.materialize(k)?;
        let moved = p.remove(k - 1);
        if self.is_finite() {
            p.push(moved);
        }
        Ok(self.rebuild(p))
    }

    /// `(a, x_1, x_2, ...)` for an infinite stream.
    pub fn prepend(&self, a: &Lottery) -> Result<Stream> {
        match self {
            Stream::Finite(_) => Err(Error::domain("prepending would change a finite stream's length")),
            Stream::Infinite(s) => {
                self.check_lottery(a)?;
                let mut p = Vec::with_capacity(s.prefix.len() + 1);
                p.push(a.clone());
                p.extend(s.prefix.iter().cloned());
                Ok(self.rebuild(p))
            }
        }
    }

    /// `(x_1, ..., x_T, anchor, anchor, ...)`.
    pub fn truncate(&self, t: usize, anchor: &Lottery) -> Result<Stream> {
        match self {
            Stream::Finite(_) => Err(Error::domain("truncation applies to infinite streams")),
            Stream::Infinite(s) => Stream::infinite(s.head(t), anchor.clone()),
        }
    }

    fn check_lottery(&self, a: &Lottery) -> Result<()> {
        if a.prizes() != self.any_lottery().prizes() {
            return Err(Error::domain("lottery and stream use different prize sets"));
        }
        Ok(())
    }
}

impl fmt::Debug for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stream::Finite(s) => f.debug_list().entries(&s.periods).finish(),
            Stream::Infinite(s) => {
                write!(f, "[")?;
                for p in &s.prefix {
                    write!(f, "{p:?}, ")?;
                }
                write!(f, "{:?}...]", s.tail)
            }
        }
    }
}

impl fmt::Debug for FiniteStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.periods).finish()
    }
}

impl fmt::Debug for InfiniteStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Stream::Infinite(self.clone()).fmt(f)
    }
}

/// Componentwise mixture `x lam y`.
pub fn mix_streams(x: &Stream, lam: f64, y: &Stream) -> Result<Stream> {
    match (x, y) {
        (Stream::Finite(a), Stream::Finite(b)) => {
            if a.len() != b.len() {
                return Err(Error::domain(format!(
                    "cannot mix streams of lengths {} and {}",
                    a.len(),
                    b.len()
                )));
            }
            let periods = a
                .periods
                .iter()
                .zip(&b.periods)
                .map(|(p, q)| mix(p, lam, q))
                .collect::<Result<Vec<_>>>()?;
            Ok(Stream::Finite(FiniteStream { periods }))
        }
        (Stream::Infinite(a), Stream::Infinite(b)) => {
            let k = a.prefix.len().max(b.prefix.len());
            let prefix = (1..=k)
                .map(|t| mix(a.at(t), lam, b.at(t)))
                .collect::<Result<Vec<_>>>()?;
            let tail = mix(&a.tail, lam, &b.tail)?;
            Stream::infinite(prefix, tail)
        }
        _ => Err(Error::domain("cannot mix a finite stream with an infinite one")),
    }
}

/// `[a]_k`: `a` in period `k`, the anchor everywhere else.
pub fn place_at(a: &Lottery, k: usize, anchor: &Lottery) -> Result<Stream> {
    if k == 0 {
        return Err(Error::argument("periods start at 1"));
    }
    let mut prefix = vec![anchor.clone(); k];
    prefix[k - 1] = a.clone();
    Stream::infinite(prefix, anchor.clone())
}

/// `(x_1, ..., x_{k-1}, a, x_{k+1}, ..., x_T, anchor, anchor, ...)`.
pub fn replace_and_truncate(x: &Stream, k: usize, a: &Lottery, t: usize, anchor: &Lottery) -> Result<Stream> {
    if k == 0 || k > t {
        return Err(Error::argument(format!("position k = {k} must satisfy 1 <= k <= T = {t}")));
    }
    x.truncate(t, anchor)?.set_at(k, a)
}

pub fn swap(x: &FiniteStream, i: usize, j: usize) -> Result<FiniteStream> {
    let n = x.len();
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::argument(format!("swap({i}, {j}) out of range for length {n}")));
    }
    let mut periods = x.periods.clone();
    periods.swap(i - 1, j - 1);
    Ok(FiniteStream { periods })
}

/// `(a, x_2, ..., x_n)` to `(x_2, ..., x_n, a)`.
pub fn rotate_for_stationarity(x: &FiniteStream) -> Result<FiniteStream> {
    if x.len() < 2 {
        return Err(Error::argument("rotation needs at least two periods"));
    }
    let mut periods = x.periods.clone();
    periods.rotate_left(1);
    Ok(FiniteStream { periods })
}
