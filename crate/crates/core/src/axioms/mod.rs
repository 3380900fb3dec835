//! Executable axiom checks over tabulated relations and preference oracles.
//!
//! Every universally quantified axiom is certified only on the cases a
//! [`Testbed`] enumerates; each result reports how many cases it examined.
//! A failure always carries a [`Witness`] whose comparisons can be replayed
//! against the same evidence.

mod checks;
mod oracle;
mod testbed;

use std::fmt;
use std::str::FromStr;

pub use checks::locate_switch;
pub use oracle::{Evidence, FinitePreferenceRelation, PreferenceOracle};
pub use testbed::Testbed;

use crate::error::{Error, Result};
use crate::mixture::Lottery;
use crate::representation::Verdict;
use crate::streams::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomId {
    F1,
    F2,
    F2p,
    F2pp,
    F3,
    F4,
    F5,
    F6,
    F6p,
    F7,
    F7p,
    F8,
    I1,
    I2,
    I2p,
    I2pp,
    I3,
    I4,
    I5,
    I6,
    I7,
    I7p,
    I8,
}

impl AxiomId {
    pub const ALL: [AxiomId; 23] = [
        AxiomId::F1,
        AxiomId::F2,
        AxiomId::F2p,
        AxiomId::F2pp,
        AxiomId::F3,
        AxiomId::F4,
        AxiomId::F5,
        AxiomId::F6,
        AxiomId::F6p,
        AxiomId::F7,
        AxiomId::F7p,
        AxiomId::F8,
        AxiomId::I1,
        AxiomId::I2,
        AxiomId::I2p,
        AxiomId::I2pp,
        AxiomId::I3,
        AxiomId::I4,
        AxiomId::I5,
        AxiomId::I6,
        AxiomId::I7,
        AxiomId::I7p,
        AxiomId::I8,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AxiomId::F1 => "F1",
            AxiomId::F2 => "F2",
            AxiomId::F2p => "F2'",
            AxiomId::F2pp => "F2''",
            AxiomId::F3 => "F3",
            AxiomId::F4 => "F4",
            AxiomId::F5 => "F5",
            AxiomId::F6 => "F6",
            AxiomId::F6p => "F6'",
            AxiomId::F7 => "F7",
            AxiomId::F7p => "F7'",
            AxiomId::F8 => "F8",
            AxiomId::I1 => "I1",
            AxiomId::I2 => "I2",
            AxiomId::I2p => "I2'",
            AxiomId::I2pp => "I2''",
            AxiomId::I3 => "I3",
            AxiomId::I4 => "I4",
            AxiomId::I5 => "I5",
            AxiomId::I6 => "I6",
            AxiomId::I7 => "I7",
            AxiomId::I7p => "I7'",
            AxiomId::I8 => "I8",
        }
    }

    pub fn name(self) -> &'static str {
        use AxiomId::*;
        match self {
            F1 | I1 => "weak order",
            F2 | I2 => "non-triviality",
            F2p | I2p => "essentiality of period 1",
            F2pp | I2pp => "essentiality of periods 1..T",
            F3 | I3 => "mixture independence",
            F4 | I4 => "mixture continuity",
            F5 | I5 => "monotonicity",
            F6 | F6p => "impatience",
            F7 | I7 => "stationarity",
            F7p | I7p => "stationarity from period T",
            F8 | I8 => "early bias",
            I6 => "convergence",
        }
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AxiomId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace(['′', '`'], "'").replace('″', "''").to_ascii_uppercase().replace('P', "'");
        AxiomId::ALL
            .into_iter()
            .find(|a| a.label() == norm)
            .ok_or_else(|| Error::argument(format!("unknown axiom `{s}`")))
    }
}

/// Axiom bundles characterising each representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    FiniteExp,
    FiniteSh(usize),
    InfiniteExp,
    InfiniteSh(usize),
    AaOnly,
    AaInfinite,
}

impl Profile {
    pub fn axioms(self) -> Vec<AxiomId> {
        use AxiomId::*;
        match self {
            Profile::FiniteExp => vec![F1, F2p, F3, F4, F5, F6, F7],
            Profile::FiniteSh(_) => vec![F1, F2pp, F3, F4, F5, F6p, F7p, F8],
            Profile::InfiniteExp => vec![I1, I2p, I3, I4, I5, I6, I7],
            Profile::InfiniteSh(_) => vec![I1, I2pp, I3, I4, I5, I6, I7p, I8],
            Profile::AaOnly => vec![F1, F2, F3, F4, F5],
            Profile::AaInfinite => vec![I1, I2, I3, I4, I5, I6],
        }
    }

    /// The bias horizon the profile's axioms refer to.
    pub fn bias_horizon(self) -> usize {
        match self {
            Profile::FiniteSh(t) | Profile::InfiniteSh(t) => t,
            _ => 1,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Profile::InfiniteExp | Profile::InfiniteSh(_) | Profile::AaInfinite)
    }

    pub fn label(self) -> String {
        match self {
            Profile::FiniteExp => "FINITE_EXP".into(),
            Profile::FiniteSh(t) => format!("FINITE_SH({t})"),
            Profile::InfiniteExp => "INFINITE_EXP".into(),
            Profile::InfiniteSh(t) => format!("INFINITE_SH({t})"),
            Profile::AaOnly => "AA_ONLY".into(),
            Profile::AaInfinite => "AA_INFINITE".into(),
        }
    }

    /// What an all-pass audit under this profile supports.
    pub fn conclusion(self) -> String {
        match self {
            Profile::FiniteExp => "exponentially discounted expected utility on finite streams".into(),
            Profile::FiniteSh(t) => format!("SH({t}) discounted expected utility on finite streams"),
            Profile::InfiniteExp => "exponentially discounted expected utility on infinite streams".into(),
            Profile::InfiniteSh(t) => format!("SH({t}) discounted expected utility on infinite streams"),
            Profile::AaOnly => "additive (AA) representation on finite streams".into(),
            Profile::AaInfinite => "additive (AA) representation on infinite streams".into(),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Profile {
    type Err = Error;

    /// `finite-exp`, `finite-sh2`, `infinite-exp`, `infinite-sh3`, `aa`,
    /// `aa-infinite`, or the upper-case labels.
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| !matches!(c, '(' | ')'))
            .map(|c| if c == '_' { '-' } else { c })
            .collect();
        let sh = |rest: &str| -> Result<usize> {
            rest.parse::<usize>()
                .ok()
                .filter(|t| *t >= 1)
                .ok_or_else(|| Error::argument(format!("bad bias horizon in profile `{s}`")))
        };
        match norm.as_str() {
            "finite-exp" => Ok(Profile::FiniteExp),
            "infinite-exp" => Ok(Profile::InfiniteExp),
            "aa" | "aa-only" | "aa-finite" => Ok(Profile::AaOnly),
            "aa-infinite" => Ok(Profile::AaInfinite),
            _ => {
                if let Some(rest) = norm.strip_prefix("finite-sh") {
                    Ok(Profile::FiniteSh(sh(rest)?))
                } else if let Some(rest) = norm.strip_prefix("infinite-sh") {
                    Ok(Profile::InfiniteSh(sh(rest)?))
                } else {
                    Err(Error::argument(format!("unknown profile `{s}`")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckVerdict {
    Pass,
    Fail,
    /// No stabilisation up to the horizon cap.
    FailAtHorizon,
    NotApplicable,
}

impl CheckVerdict {
    pub fn label(self) -> &'static str {
        match self {
            CheckVerdict::Pass => "PASS",
            CheckVerdict::Fail => "FAIL",
            CheckVerdict::FailAtHorizon => "FAIL-AT-HORIZON",
            CheckVerdict::NotApplicable => "NOT_APPLICABLE",
        }
    }

    pub fn is_failure(self) -> bool {
        matches!(self, CheckVerdict::Fail | CheckVerdict::FailAtHorizon)
    }
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `streams[x]` compared with `streams[y]` gave `verdict`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Comparison {
    pub x: usize,
    pub y: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub streams: Vec<Stream>,
    pub comparisons: Vec<Comparison>,
    pub lambda: Option<f64>,
    pub periods: Vec<usize>,
    pub note: String,
}

impl Witness {
    pub fn from_pairs(pairs: Vec<(Stream, Stream, Verdict)>, note: impl Into<String>) -> Self {
        let mut streams = Vec::with_capacity(2 * pairs.len());
        let mut comparisons = Vec::with_capacity(pairs.len());
        for (x, y, verdict) in pairs {
            let xi = push_unique(&mut streams, x);
            let yi = push_unique(&mut streams, y);
            comparisons.push(Comparison { x: xi, y: yi, verdict });
        }
        Witness { streams, comparisons, lambda: None, periods: Vec::new(), note: note.into() }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_periods(mut self, periods: Vec<usize>) -> Self {
        self.periods = periods;
        self
    }

    /// Re-query every recorded comparison; true when all verdicts recur.
    pub fn replay(&self, ev: &dyn Evidence) -> Result<bool> {
        for c in &self.comparisons {
            if ev.query(&self.streams[c.x], &self.streams[c.y])? != Some(c.verdict) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Bitwise equality; stream equality proper tolerates tiny probability gaps.
fn identical(a: &Stream, b: &Stream) -> bool {
    let same = |x: &[Lottery], y: &[Lottery]| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.probs() == q.probs());
    a.is_finite() == b.is_finite()
        && same(a.explicit(), b.explicit())
        && match (a.tail(), b.tail()) {
            (Some(p), Some(q)) => p.probs() == q.probs(),
            (None, None) => true,
            _ => false,
        }
}

fn push_unique(streams: &mut Vec<Stream>, s: Stream) -> usize {
    if let Some(i) = streams.iter().position(|t| identical(t, &s)) {
        return i;
    }
    streams.push(s);
    streams.len() - 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomResult {
    pub axiom: AxiomId,
    pub verdict: CheckVerdict,
    pub witness: Option<Witness>,
    pub cases_checked: u64,
    pub note: Option<String>,
}

impl AxiomResult {
    pub(crate) fn pass(axiom: AxiomId, cases: u64) -> Self {
        AxiomResult { axiom, verdict: CheckVerdict::Pass, witness: None, cases_checked: cases, note: None }
    }

    pub(crate) fn fail(axiom: AxiomId, cases: u64, witness: Witness) -> Self {
        AxiomResult { axiom, verdict: CheckVerdict::Fail, witness: Some(witness), cases_checked: cases, note: None }
    }

    pub(crate) fn not_applicable(axiom: AxiomId, why: impl Into<String>) -> Self {
        AxiomResult {
            axiom,
            verdict: CheckVerdict::NotApplicable,
            witness: None,
            cases_checked: 0,
            note: Some(why.into()),
        }
    }

    pub(crate) fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub profile: Profile,
    pub results: Vec<AxiomResult>,
    pub grid: Vec<f64>,
    pub n: usize,
    pub horizon_cap: usize,
    pub seed: u64,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| !r.verdict.is_failure())
    }

    pub fn failures(&self) -> Vec<AxiomId> {
        self.results.iter().filter(|r| r.verdict.is_failure()).map(|r| r.axiom).collect()
    }

    pub fn result(&self, axiom: AxiomId) -> Option<&AxiomResult> {
        self.results.iter().find(|r| r.axiom == axiom)
    }

    /// The representation whose hypotheses hold on the testbed, if any.
    pub fn certified(&self) -> Option<String> {
        self.all_pass().then(|| self.profile.conclusion())
    }
}

/// Check one axiom. `t` is the bias horizon used by the primed axioms.
pub fn check(ev: &dyn Evidence, tb: &Testbed, axiom: AxiomId, t: usize) -> Result<AxiomResult> {
    let infinite = axiom.label().starts_with('I');
    let ctx = checks::Ctx::new(ev, tb, infinite)?;
    ctx.run(axiom, t)
}

/// Run every axiom of `profile`.
pub fn audit(ev: &dyn Evidence, tb: &Testbed, profile: Profile) -> Result<AxiomReport> {
    let t = profile.bias_horizon();
    let ctx = checks::Ctx::new(ev, tb, profile.is_infinite())?;
    if profile.is_infinite() {
        ctx.require_interior_anchor()?;
    }
    let results = profile.axioms().into_iter().map(|a| ctx.run(a, t)).collect::<Result<Vec<_>>>()?;
    Ok(AxiomReport {
        profile,
        results,
        grid: tb.grid().to_vec(),
        n: tb.n(),
        horizon_cap: tb.horizon_cap(),
        seed: tb.seed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axiom_labels_round_trip() {
        for a in AxiomId::ALL {
            assert_eq!(a.label().parse::<AxiomId>().unwrap(), a);
        }
        assert_eq!("F7′".parse::<AxiomId>().unwrap(), AxiomId::F7p);
        assert_eq!("i2″".parse::<AxiomId>().unwrap(), AxiomId::I2pp);
        assert!("F9".parse::<AxiomId>().is_err());
    }

    #[test]
    fn profile_parsing() {
        assert_eq!("finite-sh2".parse::<Profile>().unwrap(), Profile::FiniteSh(2));
        assert_eq!("FINITE_SH(3)".parse::<Profile>().unwrap(), Profile::FiniteSh(3));
        assert_eq!("infinite-exp".parse::<Profile>().unwrap(), Profile::InfiniteExp);
        assert_eq!("aa".parse::<Profile>().unwrap(), Profile::AaOnly);
        assert!("finite-sh0".parse::<Profile>().is_err());
        assert_eq!(Profile::FiniteSh(2).axioms().len(), 8);
    }
}
