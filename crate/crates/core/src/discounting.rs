//! The semi-hyperbolic family SH(T).
//!
//! `D(1) = 1`, `D(t) = prod_{i<t} beta_i * delta` up to the bias horizon `T`,
//! and geometric with ratio `delta` afterwards. `T = 1` is exponential
//! discounting and `T = 2` is quasi-hyperbolic.

use std::fmt;

use crate::error::{Error, Result};

/// Default tolerance for comparing weight ratios.
pub const EPS_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Finite(n) => write!(f, "{n}"),
            Horizon::Infinite => f.write_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscountModel {
    t: usize,
    delta: f64,
    betas: Vec<f64>,
}

impl DiscountModel {
    /// `betas` holds `beta_1 .. beta_{T-1}`.
    pub fn new(t: usize, delta: f64, betas: Vec<f64>) -> Result<Self> {
        if t == 0 {
            return Err(Error::constraint("bias horizon T must be at least 1"));
        }
        if betas.len() != t - 1 {
            return Err(Error::constraint(format!(
                "SH({t}) needs {} betas, got {}",
                t - 1,
                betas.len()
            )));
        }
        check_delta(delta)?;
        for (i, b) in betas.iter().enumerate() {
            if !(b.is_finite() && *b > 0.0 && *b <= 1.0) {
                return Err(Error::constraint(format!("beta_{} = {b} outside (0, 1]", i + 1)));
            }
        }
        for i in 1..betas.len() {
            if betas[i] < betas[i - 1] {
                return Err(Error::constraint(format!(
                    "beta_{} = {} exceeds beta_{} = {}; betas must be nondecreasing",
                    i,
                    betas[i - 1],
                    i + 1,
                    betas[i]
                )));
            }
        }
        Ok(DiscountModel { t, delta, betas })
    }

    pub fn exponential(delta: f64) -> Result<Self> {
        Self::new(1, delta, Vec::new())
    }

    pub fn quasi_hyperbolic(beta: f64, delta: f64) -> Result<Self> {
        Self::new(2, delta, vec![beta])
    }

    /// Hayashi's parameterisation `beta'_t = delta * beta_t`.
    pub fn from_hayashi(beta_primes: &[f64], delta: f64) -> Result<Self> {
        check_delta(delta)?;
        let betas: Vec<f64> = beta_primes.iter().map(|bp| bp / delta).collect();
        for (i, b) in betas.iter().enumerate() {
            if !(b.is_finite() && *b > 0.0 && *b <= 1.0) {
                return Err(Error::constraint(format!(
                    "beta'_{} / delta = {b} outside (0, 1] at index {}",
                    i + 1,
                    i + 1
                )));
            }
        }
        Self::new(betas.len() + 1, delta, betas)
    }

    /// Reject weakly (but not strictly) increasing betas.
    pub fn check_strict(&self) -> Result<()> {
        for i in 1..self.betas.len() {
            if self.betas[i] <= self.betas[i - 1] {
                return Err(Error::constraint(format!(
                    "beta_{} = {} is not strictly below beta_{} = {}",
                    i,
                    self.betas[i - 1],
                    i + 1,
                    self.betas[i]
                )));
            }
        }
        Ok(())
    }

    #[allow(non_snake_case)]
    pub fn T(&self) -> usize {
        self.t
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn hayashi_betas(&self) -> Vec<f64> {
        self.betas.iter().map(|b| b * self.delta).collect()
    }

    /// `gamma_t = D(t+1) / D(t)`.
    pub fn ratio(&self, t: usize) -> f64 {
        if t < self.t {
            self.betas[t - 1] * self.delta
        } else {
            self.delta
        }
    }

    /// `D(t)` for `t >= 1`.
    pub fn factor(&self, t: usize) -> Result<f64> {
        if t == 0 {
            return Err(Error::argument("periods start at 1"));
        }
        let mut d = 1.0;
        for s in 1..t {
            d *= self.ratio(s);
        }
        Ok(d)
    }

    /// `D(1), ..., D(n)`.
    pub fn factors(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut d = 1.0;
        for t in 1..=n {
            out.push(d);
            d *= self.ratio(t);
        }
        out
    }

    pub fn total_weight(&self, horizon: Horizon) -> f64 {
        match horizon {
            Horizon::Finite(n) => self.factors(n).iter().sum(),
            Horizon::Infinite => {
                let head = self.factors(self.t);
                let d_t = head[self.t - 1];
                head[..self.t - 1].iter().sum::<f64>() + d_t / (1.0 - self.delta)
            }
        }
    }

    /// `sum_{t > k} D(t)` over an infinite horizon.
    pub fn tail_weight(&self, k: usize) -> f64 {
        if k < self.t {
            let f = self.factors(self.t);
            f[k..self.t - 1].iter().sum::<f64>() + f[self.t - 1] / (1.0 - self.delta)
        } else {
            let d = self.factors(k + 1)[k];
            d / (1.0 - self.delta)
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::constraint(format!("delta = {delta} outside (0, 1)")))
    }
}

impl fmt::Display for DiscountModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SH({}) delta={}", self.t, self.delta)?;
        if !self.betas.is_empty() {
            write!(f, " betas={:?}", self.betas)?;
        }
        Ok(())
    }
}

/// A finite sequence of period weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    weights: Vec<f64>,
}

impl WeightProfile {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::argument("weight profile must be non-empty"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::constraint(format!("weight {w} is not a nonnegative real")));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::constraint("at least one weight must be positive"));
        }
        Ok(WeightProfile { weights })
    }

    /// Skips sign checks; used to model preferences that break monotonicity.
    pub fn from_raw(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::argument("weights must be a non-empty list of finite reals"));
        }
        Ok(WeightProfile { weights })
    }

    pub fn from_model(model: &DiscountModel, n: usize) -> Self {
        WeightProfile { weights: model.factors(n) }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|w| *w >= 0.0)
    }

    /// `gamma_t = w_{t+1} / w_t` for `t = 1 .. n-1`.
    pub fn ratios(&self) -> Vec<f64> {
        self.weights.windows(2).map(|p| p[1] / p[0]).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        WeightProfile { weights: self.weights.iter().map(|w| c * w).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Exponential { delta: f64 },
    QuasiHyperbolic { beta: f64, delta: f64 },
    SemiHyperbolic(DiscountModel),
    /// Too short to confirm a geometric tail; `candidate` fits the data.
    Ambiguous { candidate: Option<DiscountModel>, reason: String },
    None { reason: String },
}

impl Classification {
    pub fn model(&self) -> Option<DiscountModel> {
        match self {
            Classification::Exponential { delta } => DiscountModel::exponential(*delta).ok(),
            Classification::QuasiHyperbolic { beta, delta } => {
                DiscountModel::quasi_hyperbolic(*beta, *delta).ok()
            }
            Classification::SemiHyperbolic(m) => Some(m.clone()),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Classification::Exponential { .. } => "EXPONENTIAL",
            Classification::QuasiHyperbolic { .. } => "QUASI_HYPERBOLIC",
            Classification::SemiHyperbolic(_) => "SH",
            Classification::Ambiguous { .. } => "AMBIGUOUS",
            Classification::None { .. } => "NONE",
        }
    }
}

/// Fit SH(T) parameters to the ratios `gammas`, with `t` the bias horizon.
fn fit_with_tail(gammas: &[f64], t: usize, eps: f64) -> std::result::Result<DiscountModel, String> {
    let tail = &gammas[t - 1..];
    let delta = tail.iter().sum::<f64>() / tail.len() as f64;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(format!("tail ratio delta = {delta} outside (0, 1)"));
    }
    let mut betas: Vec<f64> = gammas[..t - 1].iter().map(|g| g / delta).collect();
    for (i, b) in betas.iter_mut().enumerate() {
        if (*b - 1.0).abs() <= eps {
            *b = 1.0;
        }
        if !(*b > 0.0 && *b <= 1.0) {
            return Err(format!("beta_{} = {b} outside (0, 1]", i + 1));
        }
    }
    for i in 1..betas.len() {
        if betas[i] < betas[i - 1] {
            if betas[i - 1] - betas[i] > eps {
                return Err(format!(
                    "beta_{} = {} > beta_{} = {} breaks beta monotonicity",
                    i,
                    betas[i - 1],
                    i + 1,
                    betas[i]
                ));
            }
            betas[i] = betas[i - 1];
        }
    }
    DiscountModel::new(t, delta, betas).map_err(|e| e.to_string())
}

/// Smallest bias horizon `T` whose ratios `gamma_T, gamma_{T+1}, ...` form a
/// constant tail (within `eps`) of length at least two.
pub fn classify(w: &WeightProfile, eps: f64) -> Classification {
    let ws = w.weights();
    if let Some(t) = ws.iter().position(|x| *x == 0.0) {
        return Classification::None {
            reason: format!("inessential period {}: weight is zero", t + 1),
        };
    }
    if let Some(t) = ws.iter().position(|x| *x < 0.0) {
        return Classification::None {
            reason: format!("period {} has negative weight {}", t + 1, ws[t]),
        };
    }
    let gammas = w.ratios();
    let n = ws.len();
    if n <= 1 {
        return Classification::Ambiguous {
            candidate: None,
            reason: "a single period carries no ratio information".into(),
        };
    }
    let constant_from = |t: usize| {
        let tail = &gammas[t - 1..];
        let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo <= eps
    };
    if let Some(t) = (1..=n.saturating_sub(2)).find(|&t| constant_from(t)) {
        return match fit_with_tail(&gammas, t, eps) {
            Ok(m) => match m.T() {
                1 => Classification::Exponential { delta: m.delta() },
                2 => Classification::QuasiHyperbolic { beta: m.betas()[0], delta: m.delta() },
                _ => Classification::SemiHyperbolic(m),
            },
            Err(reason) => Classification::None { reason: format!("T = {t}: {reason}") },
        };
    }
    // Only a one-ratio tail is left; it cannot confirm geometricity.
    match fit_with_tail(&gammas, n - 1, eps) {
        Ok(m) => Classification::Ambiguous {
            reason: format!("no geometric tail of length >= 2; SH({}) fits but is unconfirmed", m.T()),
            candidate: Some(m),
        },
        Err(reason) => Classification::None {
            reason: format!("no geometric tail of length >= 2, and T = {}: {reason}", n - 1),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn factor_examples() {
        let e = DiscountModel::exponential(0.9).unwrap();
        assert_eq!(e.factor(1).unwrap(), 1.0);
        assert!(close(e.factor(3).unwrap(), 0.81, 1e-15));

        let q = DiscountModel::quasi_hyperbolic(0.7, 0.9).unwrap();
        assert!(close(q.factor(2).unwrap(), 0.63, 1e-15));
        assert!(close(q.factor(3).unwrap(), 0.567, 1e-15));

        let s = DiscountModel::new(3, 0.9, vec![0.6, 0.8]).unwrap();
        assert!(close(s.factor(3).unwrap(), 0.3888, 1e-15));
        assert!(close(s.factor(4).unwrap(), 0.34992, 1e-15));
    }

    #[test]
    fn constructor_constraints() {
        assert!(matches!(DiscountModel::exponential(1.0), Err(Error::Constraint(_))));
        assert!(matches!(DiscountModel::exponential(0.0), Err(Error::Constraint(_))));
        assert!(matches!(DiscountModel::quasi_hyperbolic(0.0, 0.9), Err(Error::Constraint(_))));
        assert!(DiscountModel::new(3, 0.9, vec![0.8, 0.6]).is_err());
        assert!(DiscountModel::new(3, 0.9, vec![0.8]).is_err());
        let weak = DiscountModel::new(3, 0.9, vec![0.8, 0.8]).unwrap();
        assert!(weak.check_strict().is_err());
    }

    #[test]
    fn beta_one_collapses_to_exponential() {
        let e = DiscountModel::exponential(0.9).unwrap();
        let q = DiscountModel::quasi_hyperbolic(1.0, 0.9).unwrap();
        assert_eq!(e.factors(40), q.factors(40));
    }

    #[test]
    fn hayashi_examples() {
        let m = DiscountModel::from_hayashi(&[0.54, 0.72], 0.9).unwrap();
        assert!(close(m.betas()[0], 0.6, 1e-15));
        assert!(close(m.betas()[1], 0.8, 1e-15));
        assert_eq!(DiscountModel::from_hayashi(&[0.9], 0.9).unwrap().betas(), &[1.0]);
        let err = DiscountModel::from_hayashi(&[0.95], 0.9).unwrap_err();
        assert!(err.to_string().contains("index 1"), "{err}");
    }

    #[test]
    fn total_weights() {
        let e = DiscountModel::exponential(0.9).unwrap();
        assert!(close(e.total_weight(Horizon::Infinite), 10.0, 1e-12));
        let q = DiscountModel::quasi_hyperbolic(0.7, 0.9).unwrap();
        assert!(close(q.total_weight(Horizon::Infinite), 7.3, 1e-12));
        assert_eq!(q.total_weight(Horizon::Finite(1)), 1.0);
        let s = DiscountModel::new(3, 0.85, vec![0.5, 0.9]).unwrap();
        for k in 0..8 {
            let head: f64 = s.factors(k).iter().sum();
            assert!(close(head + s.tail_weight(k), s.total_weight(Horizon::Infinite), 1e-12));
        }
    }

    #[test]
    fn classify_examples() {
        let w = WeightProfile::new(vec![1.0, 0.9, 0.81, 0.729]).unwrap();
        match classify(&w, EPS_RATIO) {
            Classification::Exponential { delta } => assert!(close(delta, 0.9, 1e-12)),
            other => panic!("{other:?}"),
        }
        let w = WeightProfile::new(vec![1.0, 0.63, 0.567, 0.5103]).unwrap();
        match classify(&w, EPS_RATIO) {
            Classification::QuasiHyperbolic { beta, delta } => {
                assert!(close(beta, 0.7, 1e-12) && close(delta, 0.9, 1e-12))
            }
            other => panic!("{other:?}"),
        }
        let w = WeightProfile::new(vec![1.0, 0.9, 0.45]).unwrap();
        match classify(&w, EPS_RATIO) {
            Classification::None { reason } => assert!(reason.contains("no geometric tail"), "{reason}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_zero_weight_is_inessential() {
        let w = WeightProfile::new(vec![1.0, 0.0, 0.5]).unwrap();
        match classify(&w, EPS_RATIO) {
            Classification::None { reason } => assert!(reason.contains("inessential period 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_round_trip_sh3() {
        let m = DiscountModel::new(3, 0.9, vec![0.6, 0.8]).unwrap();
        let w = WeightProfile::from_model(&m, 5);
        let got = classify(&w, EPS_RATIO).model().unwrap();
        assert_eq!(got.T(), 3);
        assert!(close(got.delta(), 0.9, 1e-9));
        assert!(close(got.betas()[0], 0.6, 1e-9) && close(got.betas()[1], 0.8, 1e-9));
    }

    #[test]
    fn short_profiles_are_ambiguous() {
        let w = WeightProfile::new(vec![1.0, 0.5]).unwrap();
        assert_eq!(classify(&w, EPS_RATIO).label(), "AMBIGUOUS");
        let w = WeightProfile::new(vec![1.0, 1.5]).unwrap();
        assert_eq!(classify(&w, EPS_RATIO).label(), "NONE");
    }
}
