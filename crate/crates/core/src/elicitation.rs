//! Recovering utilities and discount parameters from a preference oracle.

use std::cell::Cell;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::axioms::{AxiomId, PreferenceOracle};
use crate::bisection::band_centre;
use crate::discounting::{DiscountModel, Horizon};
use crate::error::{Error, Result};
use crate::mixture::{mix, Lottery, PrizeSet, UtilityFunction};
use crate::representation::{Representation, Verdict};
use crate::streams::Stream;

const PRESCAN: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// Upper bound on the halvings needed to land inside an indifference band.
const SWITCH_STEPS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasHorizon {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub struct ElicitationConfig {
    pub prizes: Arc<PrizeSet>,
    pub anchor: Lottery,
    pub n: usize,
    pub horizon: BiasHorizon,
    /// Probe infinite streams (anchor tail) instead of length-`n` streams.
    pub infinite: bool,
    pub tol: f64,
    pub budget: u64,
    pub probes: usize,
    pub seed: u64,
}

impl ElicitationConfig {
    pub fn new(prizes: Arc<PrizeSet>, anchor: Lottery, n: usize) -> Self {
        ElicitationConfig {
            prizes,
            anchor,
            n,
            horizon: BiasHorizon::Auto,
            infinite: false,
            tol: 1e-9,
            budget: u64::MAX,
            probes: 200,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 0.5) {
            return Err(Error::argument(format!("tolerance {} must lie in (0, 0.5)", self.tol)));
        }
        if self.prizes.len() < 2 {
            return Err(Error::argument("need at least two prizes"));
        }
        if self.anchor.prizes() != &self.prizes {
            return Err(Error::domain("anchor is over a different prize set"));
        }
        match self.horizon {
            BiasHorizon::Fixed(0) => Err(Error::argument("T must be at least 1")),
            BiasHorizon::Fixed(t) if self.n < t + 2 => {
                Err(Error::argument(format!("n = {} is below T + 2 = {}", self.n, t + 2)))
            }
            BiasHorizon::Auto if self.n < 3 => Err(Error::argument("n must be at least 3 to find a geometric tail")),
            _ => Ok(()),
        }
    }

    fn bisection_cost(&self) -> u64 {
        let edge = (1.0 / self.tol).log2().ceil() as u64 + 1;
        PRESCAN.len() as u64 + SWITCH_STEPS + 2 * edge
    }

    /// Most queries [`recover_full`] may spend under this configuration.
    pub fn query_ceiling(&self) -> u64 {
        let k = self.prizes.len() as u64;
        let bisections = k + (self.n as u64 - 1);
        2 * k + bisections * self.bisection_cost() + self.probes as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Recovery {
    Accepted(DiscountModel),
    Rejected { axiom: AxiomId, reason: String },
}

impl Recovery {
    pub fn model(&self) -> Option<&DiscountModel> {
        match self {
            Recovery::Accepted(m) => Some(m),
            Recovery::Rejected { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub queries: u64,
    /// Largest spread among the tail ratios taken as geometric.
    pub tail_residual: f64,
    pub verdict_agreement: Option<f64>,
    /// Elicited `w_{t+1} / w_t` for `t = 1..n-1`.
    pub gammas: Vec<f64>,
    pub horizon_auto: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElicitationResult {
    pub u: UtilityFunction,
    pub recovery: Recovery,
    pub diagnostics: Diagnostics,
}

impl ElicitationResult {
    pub fn representation(&self, cfg: &ElicitationConfig) -> Option<Representation> {
        let m = self.recovery.model()?.clone();
        let h = if cfg.infinite { Horizon::Infinite } else { Horizon::Finite(cfg.n) };
        Representation::discounted(self.u.clone(), m, h).ok()
    }
}

/// An oracle with a per-session query budget.
pub struct Session<'a> {
    oracle: &'a PreferenceOracle,
    cfg: &'a ElicitationConfig,
    used: Cell<u64>,
}

impl<'a> Session<'a> {
    pub fn new(oracle: &'a PreferenceOracle, cfg: &'a ElicitationConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Session { oracle, cfg, used: Cell::new(0) })
    }

    pub fn queries(&self) -> u64 {
        self.used.get()
    }

    fn ask(&self, x: &Stream, y: &Stream) -> Result<Verdict> {
        if self.used.get() >= self.cfg.budget {
            return Err(Error::BudgetExhausted { queries: self.used.get() });
        }
        self.used.set(self.used.get() + 1);
        self.oracle.compare(x, y)
    }

    fn constant(&self, a: &Lottery) -> Stream {
        if self.cfg.infinite {
            Stream::constant(a.clone())
        } else {
            Stream::finite(vec![a.clone(); self.cfg.n]).expect("n >= 1")
        }
    }

    /// Anchor everywhere except the listed periods.
    fn placed(&self, at: &[(usize, &Lottery)]) -> Result<Stream> {
        let mut s = if self.cfg.infinite {
            Stream::constant(self.cfg.anchor.clone())
        } else {
            self.constant(&self.cfg.anchor)
        };
        for (t, a) in at {
            s = s.set_at(*t, a)?;
        }
        Ok(s)
    }

    /// Centre of the band where `f` turns from `PreferY` at 0 to `PreferX`
    /// at 1, after checking the verdicts are monotone on a coarse grid.
    fn bisect<F>(&self, what: &str, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<Verdict>,
    {
        let rank = |v: Verdict| match v {
            Verdict::PreferY => 0,
            Verdict::Indifferent => 1,
            Verdict::PreferX => 2,
        };
        let scan = PRESCAN.iter().map(|&p| f(p)).collect::<Result<Vec<_>>>()?;
        if scan.windows(2).any(|w| rank(w[0]) > rank(w[1])) {
            return Err(Error::OracleInconsistency(format!(
                "{what}: verdicts along the mixture line are not monotone ({})",
                scan.iter().map(|v| v.symbol()).collect::<Vec<_>>().join(" ")
            )));
        }
        let (first, last) = (scan[0], scan[PRESCAN.len() - 1]);
        if first == Verdict::Indifferent && last == Verdict::Indifferent {
            return Err(Error::OracleInconsistency(format!("{what}: indifferent along the whole mixture line")));
        }
        if first != Verdict::PreferY {
            return Ok(0.0);
        }
        if last != Verdict::PreferX {
            return Ok(1.0);
        }
        band_centre(0.0, 1.0, Verdict::PreferY, self.cfg.tol, f)
    }
}

/// Strictly best and worst prizes under constant streams.
pub fn extreme_prizes(s: &Session) -> Result<(usize, usize)> {
    let d = degenerate(&s.cfg.prizes);
    let (mut best, mut worst) = (0, 0);
    for i in 1..d.len() {
        if s.ask(&s.constant(&d[i]), &s.constant(&d[best]))? == Verdict::PreferX {
            best = i;
        }
        if s.ask(&s.constant(&d[i]), &s.constant(&d[worst]))? == Verdict::PreferY {
            worst = i;
        }
    }
    if best == worst || s.ask(&s.constant(&d[best]), &s.constant(&d[worst]))? != Verdict::PreferX {
        return Err(Error::Inessential { period: 0, detail: "every prize is equally good".into() });
    }
    Ok((best, worst))
}

fn degenerate(p: &Arc<PrizeSet>) -> Vec<Lottery> {
    (0..p.len()).map(|i| Lottery::degenerate(p, i).expect("in range")).collect()
}

/// Standard-gamble utilities, rescaled so the anchor is 0 and the best prize 1.
pub fn calibrate_utility(s: &Session) -> Result<UtilityFunction> {
    let (bi, wi) = extreme_prizes(s)?;
    let d = degenerate(&s.cfg.prizes);
    let mut p = vec![0.0; d.len()];
    for (i, z) in d.iter().enumerate() {
        p[i] = if i == bi {
            1.0
        } else if i == wi {
            0.0
        } else {
            let cz = s.constant(z);
            s.bisect(&format!("utility of {}", s.cfg.prizes.ids()[i]), |q| {
                s.ask(&s.constant(&mix(&d[bi], q, &d[wi])?), &cz)
            })?
        };
    }
    let raw = UtilityFunction::new(s.cfg.prizes.clone(), p)?;
    let p0 = raw.expected(&s.cfg.anchor)?;
    if 1.0 - p0 <= s.cfg.tol {
        return Err(Error::AnchorNotInterior("the anchor is as good as the best prize".into()));
    }
    Ok(raw.affine(1.0 / (1.0 - p0), -p0 / (1.0 - p0)))
}

/// `w_t / w_s`, from the mixture weight making the split stream indifferent
/// to a mixture of the all-best and all-worst streams.
pub fn weight_ratio(s: &Session, best: &Lottery, worst: &Lottery, t: usize, r: usize) -> Result<f64> {
    if t == r {
        return Err(Error::argument(format!("periods must differ (both are {t})")));
    }
    if t == 0 || r == 0 || (!s.cfg.infinite && t.max(r) > s.cfg.n) {
        return Err(Error::argument(format!("periods ({t}, {r}) outside 1..={}", s.cfg.n)));
    }
    let x = s.placed(&[(t, best), (r, best)])?;
    let y = s.placed(&[(t, best), (r, worst)])?;
    let z = s.placed(&[(t, worst), (r, worst)])?;
    let lam = s.bisect(&format!("weight ratio of periods {t} and {r}"), |l| {
        s.ask(&crate::streams::mix_streams(&x, l, &z)?, &y)
    })?;
    if lam <= s.cfg.tol {
        return Err(Error::Inessential { period: t, detail: format!("period {t} carries no weight") });
    }
    if lam >= 1.0 - s.cfg.tol {
        return Err(Error::Inessential { period: r, detail: format!("period {r} carries no weight") });
    }
    Ok(lam / (1.0 - lam))
}

fn spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Fit `(T, delta, betas)` to elicited ratios `gammas[t - 1] = w_{t+1} / w_t`.
pub fn model_from_ratios(gammas: &[f64], horizon: BiasHorizon, tol: f64) -> (Recovery, f64) {
    let n1 = gammas.len();
    let band = 10.0 * tol;
    let t = match horizon {
        BiasHorizon::Fixed(t) => t,
        BiasHorizon::Auto => match (1..n1).find(|&t| spread(&gammas[t - 1..]) <= band) {
            Some(t) => t,
            None => {
                return (
                    Recovery::Rejected {
                        axiom: AxiomId::F7p,
                        reason: format!("no geometric tail among the ratios {gammas:?}"),
                    },
                    f64::NAN,
                )
            }
        },
    };
    let tail = &gammas[t - 1..];
    let residual = spread(tail);
    if residual > band {
        let reason = format!("tail ratios from period {t} differ by {residual:.3e}");
        let axiom = if t == 1 { AxiomId::F7 } else { AxiomId::F7p };
        return (Recovery::Rejected { axiom, reason }, residual);
    }
    let delta = tail.iter().sum::<f64>() / tail.len() as f64;
    if delta >= 1.0 {
        let axiom = if t == 1 { AxiomId::F6 } else { AxiomId::F6p };
        return (Recovery::Rejected { axiom, reason: format!("tail ratio {delta} is not below 1") }, residual);
    }
    let mut betas: Vec<f64> = gammas[..t - 1].iter().map(|g| g / delta).collect();
    for (i, b) in betas.iter_mut().enumerate() {
        if *b > 1.0 + band {
            return (
                Recovery::Rejected { axiom: AxiomId::F8, reason: format!("beta_{} = {b} exceeds 1", i + 1) },
                residual,
            );
        }
        *b = b.min(1.0);
    }
    for i in 1..betas.len() {
        if betas[i] < betas[i - 1] - band {
            return (
                Recovery::Rejected {
                    axiom: AxiomId::F8,
                    reason: format!("beta_{} = {} is below beta_{} = {}", i + 1, betas[i], i, betas[i - 1]),
                },
                residual,
            );
        }
        betas[i] = betas[i].max(betas[i - 1]);
    }
    match DiscountModel::new(t, delta, betas) {
        Ok(m) => (Recovery::Accepted(m), residual),
        Err(e) => (Recovery::Rejected { axiom: AxiomId::F8, reason: e.to_string() }, residual),
    }
}

/// Elicit every consecutive ratio and fit the discount model.
pub fn recover_discount(s: &Session, u: &UtilityFunction) -> Result<(Recovery, Vec<f64>, f64)> {
    let (bi, wi) = u.extremes();
    let best = Lottery::degenerate(&s.cfg.prizes, bi)?;
    let worst = Lottery::degenerate(&s.cfg.prizes, wi)?;
    let gammas = (1..s.cfg.n).map(|t| weight_ratio(s, &best, &worst, t + 1, t)).collect::<Result<Vec<_>>>()?;
    let (mut rec, residual) = model_from_ratios(&gammas, s.cfg.horizon, s.cfg.tol);
    if let (true, Recovery::Rejected { axiom, .. }) = (s.cfg.infinite, &mut rec) {
        *axiom = match axiom {
            AxiomId::F7 => AxiomId::I7,
            AxiomId::F7p => AxiomId::I7p,
            AxiomId::F8 => AxiomId::I8,
            _ => AxiomId::I6,
        };
    }
    Ok((rec, gammas, residual))
}

/// Random pairs of streams over degenerate lotteries and even mixtures.
pub fn probe_pairs(cfg: &ElicitationConfig) -> Vec<(Stream, Stream)> {
    let d = degenerate(&cfg.prizes);
    let mut lots = d.clone();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            lots.push(mix(&d[i], 0.5, &d[j]).expect("same prize set"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xE11C_17A7);
    let draw = |rng: &mut ChaCha8Rng| -> Stream {
        let p: Vec<Lottery> = (0..cfg.n).map(|_| lots[rng.gen_range(0..lots.len())].clone()).collect();
        if cfg.infinite {
            Stream::infinite(p, cfg.anchor.clone()).expect("same prize set")
        } else {
            Stream::finite(p).expect("n >= 1")
        }
    };
    (0..cfg.probes).map(|_| (draw(&mut rng), draw(&mut rng))).collect()
}

pub fn recover_full(oracle: &PreferenceOracle, cfg: &ElicitationConfig) -> Result<ElicitationResult> {
    let s = Session::new(oracle, cfg)?;
    let u = calibrate_utility(&s)?;
    let (recovery, gammas, tail_residual) = recover_discount(&s, &u)?;
    let mut result = ElicitationResult {
        u,
        recovery,
        diagnostics: Diagnostics {
            queries: 0,
            tail_residual,
            verdict_agreement: None,
            gammas,
            horizon_auto: cfg.horizon == BiasHorizon::Auto,
        },
    };
    if let Some(rep) = result.representation(cfg) {
        let pairs = probe_pairs(cfg);
        let mut agree = 0usize;
        for (x, y) in &pairs {
            if s.ask(x, y)? == rep.compare(x, y)? {
                agree += 1;
            }
        }
        result.diagnostics.verdict_agreement = Some(if pairs.is_empty() { 1.0 } else { agree as f64 / pairs.len() as f64 });
    }
    result.diagnostics.queries = s.queries();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discounting::WeightProfile;

    fn prizes() -> Arc<PrizeSet> {
        PrizeSet::new(["hi", "mid", "z", "lo"]).unwrap()
    }

    fn oracle(u: Vec<f64>, w: Vec<f64>) -> PreferenceOracle {
        let rep = Representation::aa(UtilityFunction::new(prizes(), u).unwrap(), WeightProfile::new(w).unwrap()).unwrap();
        PreferenceOracle::from_representation(rep).opaque()
    }

    fn cfg(n: usize) -> ElicitationConfig {
        let p = prizes();
        let z = Lottery::degenerate_id(&p, "z").unwrap();
        ElicitationConfig::new(p, z, n)
    }

    #[test]
    fn standard_gamble_recovers_utility() {
        let o = oracle(vec![1.0, 0.37, 0.0, -0.5], vec![1.0, 0.9, 0.81]);
        let c = cfg(3);
        let s = Session::new(&o, &c).unwrap();
        let u = calibrate_utility(&s).unwrap();
        for (got, want) in u.values().iter().zip([1.0, 0.37, 0.0, -0.5]) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn ratio_of_two_periods() {
        let o = oracle(vec![1.0, 0.5, 0.0, -1.0], vec![1.0, 0.5, 0.5]);
        let c = cfg(3);
        let s = Session::new(&o, &c).unwrap();
        let (hi, lo) = (Lottery::degenerate(&c.prizes, 0).unwrap(), Lottery::degenerate(&c.prizes, 3).unwrap());
        assert!((weight_ratio(&s, &hi, &lo, 1, 2).unwrap() - 2.0).abs() < 1e-8);
        assert!((weight_ratio(&s, &hi, &lo, 2, 3).unwrap() - 1.0).abs() < 1e-8);
        assert!(matches!(weight_ratio(&s, &hi, &lo, 2, 2), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_weight_is_inessential() {
        let o = oracle(vec![1.0, 0.5, 0.0, -1.0], vec![1.0, 0.0, 0.5]);
        let c = cfg(3);
        let s = Session::new(&o, &c).unwrap();
        let (hi, lo) = (Lottery::degenerate(&c.prizes, 0).unwrap(), Lottery::degenerate(&c.prizes, 3).unwrap());
        assert!(matches!(weight_ratio(&s, &hi, &lo, 2, 1), Err(Error::Inessential { period: 2, .. })));
    }

    #[test]
    fn decreasing_betas_are_rejected() {
        let g = [0.9, 0.5, 0.9, 0.9];
        let (rec, _) = model_from_ratios(&g, BiasHorizon::Auto, 1e-9);
        assert!(matches!(rec, Recovery::Rejected { axiom: AxiomId::F8, .. }), "{rec:?}");
        let (rec, _) = model_from_ratios(&[0.9, 0.5, 0.7, 0.9], BiasHorizon::Auto, 1e-9);
        assert!(matches!(rec, Recovery::Rejected { axiom: AxiomId::F7p, .. }), "{rec:?}");
        let (rec, _) = model_from_ratios(&[0.8, 0.8], BiasHorizon::Auto, 1e-9);
        assert_eq!(rec.model().unwrap().T(), 1);
    }

    #[test]
    fn exponential_round_trip() {
        let w = WeightProfile::from_model(&DiscountModel::exponential(0.8).unwrap(), 4);
        let o = oracle(vec![0.6, 0.2, 0.0, -0.4], w.weights().to_vec());
        let c = cfg(4);
        let r = recover_full(&o, &c).unwrap();
        let m = r.recovery.model().unwrap();
        assert_eq!(m.T(), 1);
        assert!((m.delta() - 0.8).abs() < 1e-8);
        assert_eq!(r.diagnostics.verdict_agreement, Some(1.0));
        assert!(r.diagnostics.queries <= c.query_ceiling());
        assert!((r.u.values()[1] - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn zero_budget_fails_at_once() {
        let o = oracle(vec![1.0, 0.5, 0.0, -1.0], vec![1.0, 0.9, 0.81]);
        let mut c = cfg(3);
        c.budget = 0;
        assert!(matches!(recover_full(&o, &c), Err(Error::BudgetExhausted { queries: 0 })));
    }

    #[test]
    fn fixed_horizon_needs_room() {
        let mut c = cfg(3);
        c.horizon = BiasHorizon::Fixed(2);
        assert!(c.validate().is_err());
    }
}
