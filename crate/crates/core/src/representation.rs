//! Additive representations `U(x) = sum_t w_t u(x_t)` and their uniqueness
//! transforms.

use std::fmt;

use crate::discounting::{DiscountModel, Horizon, WeightProfile};
use crate::error::{Error, Result};
use crate::mixture::{mix, Lottery, UtilityFunction};
use crate::streams::Stream;

/// Default indifference band on utility differences.
pub const EPS_INDIFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    PreferX,
    PreferY,
    Indifferent,
}

impl Verdict {
    pub fn from_difference(d: f64, eps: f64) -> Self {
        if d > eps {
            Verdict::PreferX
        } else if d < -eps {
            Verdict::PreferY
        } else {
            Verdict::Indifferent
        }
    }

    /// The verdict with the roles of `x` and `y` exchanged.
    pub fn flip(self) -> Self {
        match self {
            Verdict::PreferX => Verdict::PreferY,
            Verdict::PreferY => Verdict::PreferX,
            Verdict::Indifferent => Verdict::Indifferent,
        }
    }

    /// `x` weakly preferred to `y`.
    pub fn weak_x(self) -> bool {
        self != Verdict::PreferY
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::PreferX => ">",
            Verdict::PreferY => "<",
            Verdict::Indifferent => "=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            ">" => Some(Verdict::PreferX),
            "<" => Some(Verdict::PreferY),
            "=" | "~" => Some(Verdict::Indifferent),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Infinite weights that are arbitrary on a head and geometric afterwards:
/// `w_t = head[t]` for `t <= h`, then `w_h * ratio^(t-h)` up to `cutoff`
/// (inclusive) and zero beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct TailWeights {
    pub head: Vec<f64>,
    pub ratio: f64,
    pub cutoff: Option<usize>,
}

impl TailWeights {
    pub fn new(head: Vec<f64>, ratio: f64, cutoff: Option<usize>) -> Result<Self> {
        if head.is_empty() || head.iter().any(|w| !w.is_finite()) {
            return Err(Error::argument("tail weights need a non-empty finite head"));
        }
        if !ratio.is_finite() || ratio < 0.0 {
            return Err(Error::constraint(format!("tail ratio {ratio} must be a nonnegative real")));
        }
        match cutoff {
            None if ratio >= 1.0 => {
                return Err(Error::constraint(format!(
                    "tail ratio {ratio} >= 1 without a cutoff has no finite total weight"
                )))
            }
            Some(c) if c < head.len() => {
                return Err(Error::argument(format!("cutoff {c} falls inside the head")))
            }
            _ => {}
        }
        Ok(TailWeights { head, ratio, cutoff })
    }

    pub fn weight(&self, t: usize) -> f64 {
        let h = self.head.len();
        if t <= h {
            return self.head[t - 1];
        }
        if self.cutoff.is_some_and(|c| t > c) {
            return 0.0;
        }
        self.head[h - 1] * self.ratio.powi((t - h) as i32)
    }

    /// `sum_{t > k} w_t`.
    pub fn tail_sum(&self, k: usize) -> f64 {
        let h = self.head.len();
        let mut s = 0.0;
        if k < h {
            s += self.head[k..].iter().sum::<f64>();
        }
        let from = k.max(h);
        let base = self.head[h - 1] * self.ratio.powi((from - h) as i32);
        let r = self.ratio;
        let geometric = match self.cutoff {
            Some(c) => {
                let m = c.saturating_sub(from) as i32;
                if r == 1.0 {
                    base * m as f64
                } else {
                    base * r * (1.0 - r.powi(m)) / (1.0 - r)
                }
            }
            None => base * r / (1.0 - r),
        };
        s + geometric
    }

    fn scaled(&self, c: f64) -> Self {
        TailWeights { head: self.head.iter().map(|w| c * w).collect(), ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Profile(WeightProfile),
    /// `scale * D(t)` over the given horizon.
    Discounted { model: DiscountModel, horizon: Horizon, scale: f64 },
    Geometric(TailWeights),
}

impl Weights {
    pub fn horizon(&self) -> Horizon {
        match self {
            Weights::Profile(p) => Horizon::Finite(p.len()),
            Weights::Discounted { horizon, .. } => *horizon,
            Weights::Geometric(_) => Horizon::Infinite,
        }
    }

    /// `w_t`; zero beyond a finite horizon.
    pub fn weight(&self, t: usize) -> f64 {
        match self {
            Weights::Profile(p) => p.weights().get(t - 1).copied().unwrap_or(0.0),
            Weights::Discounted { model, horizon, scale } => {
                if matches!(horizon, Horizon::Finite(n) if t > *n) {
                    0.0
                } else {
                    scale * model.factor(t).expect("t >= 1")
                }
            }
            Weights::Geometric(g) => g.weight(t),
        }
    }

    pub fn upto(&self, k: usize) -> Vec<f64> {
        match self {
            Weights::Profile(p) => (1..=k).map(|t| p.weights().get(t - 1).copied().unwrap_or(0.0)).collect(),
            Weights::Discounted { model, horizon, scale } => {
                let mut f = model.factors(k);
                if let Horizon::Finite(n) = horizon {
                    for v in f.iter_mut().skip(*n) {
                        *v = 0.0;
                    }
                }
                f.iter_mut().for_each(|v| *v *= scale);
                f
            }
            Weights::Geometric(g) => (1..=k).map(|t| g.weight(t)).collect(),
        }
    }

    /// `sum_{t > k} w_t`.
    pub fn tail_sum(&self, k: usize) -> f64 {
        match self {
            Weights::Profile(p) => p.weights().iter().skip(k).sum(),
            Weights::Discounted { model, horizon: Horizon::Infinite, scale } => scale * model.tail_weight(k),
            Weights::Discounted { model, horizon: Horizon::Finite(n), scale } => {
                scale * model.factors(*n).iter().skip(k).sum::<f64>()
            }
            Weights::Geometric(g) => g.tail_sum(k),
        }
    }

    pub fn total(&self) -> f64 {
        self.tail_sum(0)
    }

    /// Index from which the weights are geometric (or zero).
    fn regular_from(&self) -> usize {
        match self {
            Weights::Profile(p) => p.len(),
            Weights::Discounted { model, .. } => model.T(),
            Weights::Geometric(g) => g.head.len(),
        }
    }

    fn cutoff(&self) -> Option<usize> {
        match self {
            Weights::Geometric(g) => g.cutoff,
            _ => None,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Weights::Profile(p) => Weights::Profile(p.scaled(c)),
            Weights::Discounted { model, horizon, scale } => {
                Weights::Discounted { model: model.clone(), horizon: *horizon, scale: scale * c }
            }
            Weights::Geometric(g) => Weights::Geometric(g.scaled(c)),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Weights::Profile(p) => p.is_nonnegative(),
            Weights::Discounted { scale, .. } => *scale > 0.0,
            Weights::Geometric(g) => g.head.iter().all(|w| *w >= 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    u: UtilityFunction,
    weights: Weights,
}

impl Representation {
    /// An additive representation with nonnegative finite weights.
    pub fn aa(u: UtilityFunction, w: WeightProfile) -> Result<Self> {
        check_u(&u)?;
        let w = WeightProfile::new(w.weights().to_vec())?;
        Ok(Representation { u, weights: Weights::Profile(w) })
    }

    pub fn discounted(u: UtilityFunction, model: DiscountModel, horizon: Horizon) -> Result<Self> {
        check_u(&u)?;
        if horizon == Horizon::Finite(0) {
            return Err(Error::argument("horizon must be at least 1"));
        }
        Ok(Representation { u, weights: Weights::Discounted { model, horizon, scale: 1.0 } })
    }

    pub fn geometric(u: UtilityFunction, w: TailWeights) -> Result<Self> {
        check_u(&u)?;
        if w.head.iter().any(|x| *x < 0.0) || w.head.iter().all(|x| *x == 0.0) {
            return Err(Error::constraint("head weights must be nonnegative with one positive"));
        }
        Ok(Representation { u, weights: Weights::Geometric(w) })
    }

    /// No sign or constancy checks; for preferences that break axioms.
    pub fn unchecked(u: UtilityFunction, weights: Weights) -> Self {
        Representation { u, weights }
    }

    pub fn u(&self) -> &UtilityFunction {
        &self.u
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn horizon(&self) -> Horizon {
        self.weights.horizon()
    }

    pub fn weight(&self, t: usize) -> f64 {
        self.weights.weight(t)
    }

    pub fn utility(&self, x: &Lottery) -> Result<f64> {
        self.u.expected(x)
    }

    fn check_shape(&self, x: &Stream) -> Result<()> {
        match (self.horizon(), x) {
            (Horizon::Finite(n), Stream::Finite(s)) if s.len() == n => Ok(()),
            (Horizon::Finite(n), Stream::Finite(s)) => Err(Error::domain(format!(
                "stream has {} periods, representation expects {n}",
                s.len()
            ))),
            (Horizon::Finite(_), Stream::Infinite(_)) => {
                Err(Error::domain("finite-horizon representation cannot evaluate an infinite stream"))
            }
            (Horizon::Infinite, Stream::Finite(_)) => {
                Err(Error::domain("infinite-horizon representation cannot evaluate a finite stream"))
            }
            (Horizon::Infinite, Stream::Infinite(_)) => Ok(()),
        }
    }

    pub fn evaluate(&self, x: &Stream) -> Result<f64> {
        self.check_shape(x)?;
        let p = x.explicit();
        let w = self.weights.upto(p.len());
        let mut total = 0.0;
        for (wt, lot) in w.iter().zip(p) {
            total += wt * self.u.expected(lot)?;
        }
        if let Some(tail) = x.tail() {
            let ut = self.u.expected(tail)?;
            if ut != 0.0 {
                total += ut * self.weights.tail_sum(p.len());
            }
        }
        Ok(total)
    }

    /// `U(x) - U(y)`, accumulated period by period.
    pub fn difference(&self, x: &Stream, y: &Stream) -> Result<f64> {
        self.check_shape(x)?;
        self.check_shape(y)?;
        let k = x.explicit().len().max(y.explicit().len());
        let w = self.weights.upto(k);
        let mut d = 0.0;
        for (t, wt) in w.iter().enumerate() {
            let (a, b) = (x.at(t + 1)?, y.at(t + 1)?);
            if wt != &0.0 {
                d += wt * (self.u.expected(a)? - self.u.expected(b)?);
            }
        }
        if let (Some(a), Some(b)) = (x.tail(), y.tail()) {
            let du = self.u.expected(a)? - self.u.expected(b)?;
            if du != 0.0 {
                d += du * self.weights.tail_sum(k);
            }
        }
        Ok(d)
    }

    pub fn compare(&self, x: &Stream, y: &Stream) -> Result<Verdict> {
        self.compare_with(x, y, EPS_INDIFF)
    }

    pub fn compare_with(&self, x: &Stream, y: &Stream, eps: f64) -> Result<Verdict> {
        let d = self.difference(x, y)?;
        if d.is_nan() {
            return Ok(Verdict::Indifferent);
        }
        Ok(Verdict::from_difference(d, eps))
    }

    /// `U_1, ..., U_{t_max}` with `U_T = sum_{t <= T} w_t u(x_t)`.
    pub fn partial_sums(&self, x: &Stream, t_max: usize) -> Result<Vec<f64>> {
        if self.horizon() != Horizon::Infinite {
            return Err(Error::domain("partial sums need an infinite-horizon representation"));
        }
        self.check_shape(x)?;
        let w = self.weights.upto(t_max);
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(t_max);
        for (t, wt) in w.iter().enumerate() {
            acc += wt * self.u.expected(x.at(t + 1)?)?;
            out.push(acc);
        }
        Ok(out)
    }

    /// Upper bound on `|U(x) - U_T(x)|` for any stream.
    pub fn tail_bound(&self, t: usize) -> f64 {
        let m = self.u.max_abs();
        match &self.weights {
            Weights::Discounted { model, horizon: Horizon::Infinite, scale } => {
                let d_next = model.factors(t + 1)[t];
                m * scale * d_next / (1.0 - model.delta())
            }
            w => m * w.tail_sum(t).abs(),
        }
    }
}

fn check_u(u: &UtilityFunction) -> Result<()> {
    if u.is_constant() {
        return Err(Error::constraint("utility must be non-constant"));
    }
    Ok(())
}

/// `u' = A u + B`, `w' = C w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessTransform {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl UniquenessTransform {
    pub const IDENTITY: UniquenessTransform = UniquenessTransform { a: 1.0, b: 0.0, c: 1.0 };

    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let t = UniquenessTransform { a, b, c };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::constraint(format!("A = {} must be positive", self.a)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::constraint(format!("C = {} must be positive", self.c)));
        }
        if !self.b.is_finite() {
            return Err(Error::constraint("B must be finite"));
        }
        Ok(())
    }
}

pub fn apply_transform(rep: &Representation, tr: &UniquenessTransform) -> Result<Representation> {
    tr.validate()?;
    Ok(Representation { u: rep.u.affine(tr.a, tr.b), weights: rep.weights.scaled(tr.c) })
}

/// Canonical form: `u(x0) = 0`, `max |u| = 1`, `w_1 = 1`.
pub fn normalize(rep: &Representation, x0: &Lottery) -> Result<Representation> {
    let w1 = rep.weight(1);
    if w1 == 0.0 {
        return Err(Error::Inessential {
            period: 1,
            detail: "w_1 = 0, so the weights cannot be scaled to w_1 = 1".into(),
        });
    }
    if w1 < 0.0 {
        return Err(Error::constraint(format!("w_1 = {w1} is negative")));
    }
    let u0 = rep.u.expected(x0)?;
    let centred = rep.u.affine(1.0, -u0);
    let m = centred.max_abs();
    if m == 0.0 {
        return Err(Error::constraint("utility must be non-constant"));
    }
    let weights = match &rep.weights {
        Weights::Discounted { model, horizon, .. } => {
            Weights::Discounted { model: model.clone(), horizon: *horizon, scale: 1.0 }
        }
        w => w.scaled(1.0 / w1),
    };
    Ok(Representation { u: centred.affine(1.0 / m, 0.0), weights })
}

/// Two streams on which the representations disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub x: Stream,
    pub y: Stream,
    pub first: Verdict,
    pub second: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Equivalence {
    /// `rep1 = apply_transform(rep2, transform)` within tolerance.
    Equivalent(UniquenessTransform),
    NotEquivalent { reason: String, counterexample: Option<Counterexample> },
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        matches!(self, Equivalence::Equivalent(_))
    }
}

pub fn equivalent(rep1: &Representation, rep2: &Representation, eps: f64) -> Equivalence {
    let not = |reason: String, cx: Option<Counterexample>| Equivalence::NotEquivalent { reason, counterexample: cx };
    if rep1.u.prizes() != rep2.u.prizes() {
        return not("representations use different prize sets".into(), None);
    }
    if rep1.horizon() != rep2.horizon() {
        return not(
            format!("horizons differ: {} vs {}", rep1.horizon(), rep2.horizon()),
            None,
        );
    }
    let (u1, u2) = (rep1.u.values(), rep2.u.values());
    let (r1, r2) = (rep1.u.range(), rep2.u.range());
    if r1 <= 0.0 || r2 <= 0.0 {
        return not("a utility is constant".into(), None);
    }
    let a = r1 / r2;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let b = mean(u1) - a * mean(u2);
    let u_ok = u1.iter().zip(u2).all(|(x, y)| (x - (a * y + b)).abs() <= eps * (1.0 + x.abs()));
    if !u_ok {
        return not(
            "utilities are not positive affine transforms of each other".into(),
            utility_counterexample(rep1, rep2),
        );
    }

    let span = match rep1.horizon() {
        Horizon::Finite(n) => n,
        Horizon::Infinite => {
            let base = rep1.weights.regular_from().max(rep2.weights.regular_from()) + 2;
            base.max(rep1.weights.cutoff().unwrap_or(0)).max(rep2.weights.cutoff().unwrap_or(0)) + 1
        }
    };
    let w1 = rep1.weights.upto(span);
    let w2 = rep2.weights.upto(span);
    let Some(r) = w1.iter().position(|w| *w != 0.0) else {
        return not("first representation has no nonzero weight".into(), None);
    };
    if w2[r] == 0.0 {
        return not(
            format!("period {} carries weight in one representation only", r + 1),
            weight_counterexample(rep1, rep2, &w1, &w2),
        );
    }
    let c = w1[r] / w2[r];
    let mut w_ok = w1.iter().zip(&w2).all(|(x, y)| (x - c * y).abs() <= eps * (1.0 + x.abs()));
    if rep1.horizon() == Horizon::Infinite {
        let (t1, t2) = (rep1.weights.tail_sum(span), rep2.weights.tail_sum(span));
        w_ok &= (t1 - c * t2).abs() <= eps * (1.0 + t1.abs());
        w_ok &= rep1.weights.cutoff() == rep2.weights.cutoff();
    }
    if !w_ok || c <= 0.0 {
        return not(
            "weights are not proportional".into(),
            weight_counterexample(rep1, rep2, &w1, &w2),
        );
    }
    Equivalence::Equivalent(UniquenessTransform { a, b, c })
}

/// Streams equal to `fill` except for `a` at period `t`.
fn single_period(rep: &Representation, fill: &Lottery, t: usize, a: &Lottery) -> Stream {
    let s = match rep.horizon() {
        Horizon::Finite(n) => Stream::finite(vec![fill.clone(); n]).expect("non-empty"),
        Horizon::Infinite => Stream::constant(fill.clone()),
    };
    s.set_at(t, a).expect("period within horizon")
}

fn disagreement(rep1: &Representation, rep2: &Representation, x: Stream, y: Stream) -> Option<Counterexample> {
    let first = rep1.compare(&x, &y).ok()?;
    let second = rep2.compare(&x, &y).ok()?;
    (first != second).then_some(Counterexample { x, y, first, second })
}

fn utility_counterexample(rep1: &Representation, rep2: &Representation) -> Option<Counterexample> {
    let prizes = rep1.u.prizes().clone();
    let horizon = match rep1.horizon() {
        Horizon::Finite(n) => n,
        Horizon::Infinite => rep1.weights.regular_from() + 1,
    };
    let t = (1..=horizon).find(|&t| rep1.weight(t) > 0.0 && rep2.weight(t) > 0.0)?;
    let degen: Vec<Lottery> = (0..prizes.len()).map(|i| Lottery::degenerate(&prizes, i).unwrap()).collect();
    let fill = &degen[0];
    let (v1, v2) = (rep1.u.values(), rep2.u.values());
    // Pairwise order disagreements first.
    for i in 0..degen.len() {
        for j in 0..degen.len() {
            if i != j && v1[i] > v1[j] && v2[i] <= v2[j] {
                let cx = disagreement(
                    rep1,
                    rep2,
                    single_period(rep1, fill, t, &degen[i]),
                    single_period(rep1, fill, t, &degen[j]),
                );
                if cx.is_some() {
                    return cx;
                }
            }
        }
    }
    // Same order but different cardinal spacing: a standard gamble between
    // the best and worst prizes that the two utilities price differently.
    let (best, worst) = rep1.u.extremes();
    for i in 0..degen.len() {
        let p1 = (v1[i] - v1[worst]) / (v1[best] - v1[worst]);
        let p2 = (v2[i] - v2[worst]) / (v2[best] - v2[worst]);
        if (p1 - p2).abs() > 1e-7 && p2.is_finite() {
            let mu = ((p1 + p2) / 2.0).clamp(0.0, 1.0);
            let gamble = mix(&degen[best], mu, &degen[worst]).ok()?;
            let cx = disagreement(
                rep1,
                rep2,
                single_period(rep1, fill, t, &degen[i]),
                single_period(rep1, fill, t, &gamble),
            );
            if cx.is_some() {
                return cx;
            }
        }
    }
    None
}

fn weight_counterexample(
    rep1: &Representation,
    rep2: &Representation,
    w1: &[f64],
    w2: &[f64],
) -> Option<Counterexample> {
    let prizes = rep1.u.prizes().clone();
    let (best, worst) = rep1.u.extremes();
    let hi = Lottery::degenerate(&prizes, best).ok()?;
    let lo = Lottery::degenerate(&prizes, worst).ok()?;
    if rep2.u.expected(&hi).ok()? <= rep2.u.expected(&lo).ok()? {
        return None;
    }
    let n = w1.len();
    for s in 0..n {
        for t in 0..n {
            if s == t || w1[s] + w1[t] <= 0.0 || w2[s] + w2[t] <= 0.0 {
                continue;
            }
            let l1 = w1[s] / (w1[s] + w1[t]);
            let l2 = w2[s] / (w2[s] + w2[t]);
            if (l1 - l2).abs() <= 1e-7 {
                continue;
            }
            let lam = (l1 + l2) / 2.0;
            let both_hi = single_period(rep1, &lo, s + 1, &hi).set_at(t + 1, &hi).ok()?;
            let split = single_period(rep1, &lo, s + 1, &hi);
            let both_lo = single_period(rep1, &lo, s + 1, &lo);
            let mixed = crate::streams::mix_streams(&both_hi, lam, &both_lo).ok()?;
            if let Some(cx) = disagreement(rep1, rep2, split, mixed) {
                return Some(cx);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::PrizeSet;
    use crate::streams::place_at;
    use std::sync::Arc;

    fn prizes() -> Arc<PrizeSet> {
        PrizeSet::new(["a", "b", "z"]).unwrap()
    }

    fn u(p: &Arc<PrizeSet>, v: [f64; 3]) -> UtilityFunction {
        UtilityFunction::new(p.clone(), v.to_vec()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let p = prizes();
        let a = Lottery::degenerate(&p, 0).unwrap();
        let z = Lottery::degenerate(&p, 2).unwrap();
        let e = Representation::discounted(
            u(&p, [1.0, -1.0, 0.0]),
            DiscountModel::exponential(0.9).unwrap(),
            Horizon::Infinite,
        )
        .unwrap();
        assert!((e.evaluate(&Stream::constant(a.clone())).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(e.evaluate(&Stream::constant(z.clone())).unwrap(), 0.0);

        let q = Representation::discounted(
            u(&p, [1.0, -1.0, 0.0]),
            DiscountModel::quasi_hyperbolic(0.7, 0.9).unwrap(),
            Horizon::Infinite,
        )
        .unwrap();
        let v = q.evaluate(&place_at(&a, 2, &z).unwrap()).unwrap();
        assert!((v - 0.63).abs() < 1e-12);
    }

    #[test]
    fn compare_impatience_example() {
        let p = prizes();
        let a = Lottery::degenerate(&p, 0).unwrap();
        let b = Lottery::degenerate(&p, 1).unwrap();
        let rep = Representation::discounted(
            u(&p, [1.0, 0.0, 0.5]),
            DiscountModel::exponential(0.9).unwrap(),
            Horizon::Finite(2),
        )
        .unwrap();
        let x = Stream::finite(vec![a.clone(), b.clone()]).unwrap();
        let y = Stream::finite(vec![b, a]).unwrap();
        assert_eq!(rep.compare(&x, &y).unwrap(), Verdict::PreferX);
        assert_eq!(rep.compare(&x, &x).unwrap(), Verdict::Indifferent);
        let inf = Stream::constant(Lottery::degenerate(&p, 2).unwrap());
        assert!(matches!(rep.evaluate(&inf), Err(Error::Domain(_))));
    }

    #[test]
    fn normalize_example() {
        let p = PrizeSet::new(["a", "b"]).unwrap();
        let rep = Representation::aa(
            UtilityFunction::new(p.clone(), vec![2.0, 0.0]).unwrap(),
            WeightProfile::new(vec![2.0, 1.0]).unwrap(),
        )
        .unwrap();
        let x0 = Lottery::degenerate(&p, 1).unwrap();
        let n = normalize(&rep, &x0).unwrap();
        assert_eq!(n.u().values(), &[1.0, 0.0]);
        assert_eq!(n.weights().upto(2), vec![1.0, 0.5]);
        assert_eq!(normalize(&n, &x0).unwrap(), n);

        let zero_first = Representation::aa(
            UtilityFunction::new(p, vec![2.0, 0.0]).unwrap(),
            WeightProfile::new(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert!(matches!(normalize(&zero_first, &x0), Err(Error::Inessential { period: 1, .. })));
    }

    #[test]
    fn transforms_and_equivalence() {
        let p = prizes();
        let rep = Representation::discounted(
            u(&p, [1.0, -0.5, 0.0]),
            DiscountModel::quasi_hyperbolic(0.7, 0.9).unwrap(),
            Horizon::Infinite,
        )
        .unwrap();
        assert_eq!(apply_transform(&rep, &UniquenessTransform::IDENTITY).unwrap(), rep);
        assert!(UniquenessTransform::new(0.0, 1.0, 1.0).is_err());
        assert!(UniquenessTransform::new(1.0, 1.0, -2.0).is_err());
        let tr = UniquenessTransform::new(2.0, -3.0, 5.0).unwrap();
        let moved = apply_transform(&rep, &tr).unwrap();
        match equivalent(&moved, &rep, 1e-9) {
            Equivalence::Equivalent(got) => {
                assert!((got.a - 2.0).abs() < 1e-12 && (got.b + 3.0).abs() < 1e-12 && (got.c - 5.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }

        let other = Representation::discounted(
            u(&p, [1.0, -0.5, 0.0]),
            DiscountModel::quasi_hyperbolic(0.7, 0.8).unwrap(),
            Horizon::Infinite,
        )
        .unwrap();
        match equivalent(&rep, &other, 1e-9) {
            Equivalence::NotEquivalent { counterexample: Some(cx), .. } => {
                assert_eq!(rep.compare(&cx.x, &cx.y).unwrap(), cx.first);
                assert_eq!(other.compare(&cx.x, &cx.y).unwrap(), cx.second);
                assert_ne!(cx.first, cx.second);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn utility_mismatch_yields_counterexample() {
        let p = prizes();
        let m = DiscountModel::exponential(0.9).unwrap();
        let r1 = Representation::discounted(u(&p, [1.0, 0.0, 0.3]), m.clone(), Horizon::Finite(3)).unwrap();
        let r2 = Representation::discounted(u(&p, [1.0, 0.0, 0.6]), m, Horizon::Finite(3)).unwrap();
        match equivalent(&r1, &r2, 1e-9) {
            Equivalence::NotEquivalent { counterexample: Some(cx), .. } => assert_ne!(cx.first, cx.second),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn partial_sums_and_bound() {
        let p = prizes();
        let a = Lottery::degenerate(&p, 0).unwrap();
        let rep = Representation::discounted(
            u(&p, [1.0, -1.0, 0.0]),
            DiscountModel::exponential(0.9).unwrap(),
            Horizon::Infinite,
        )
        .unwrap();
        let x = Stream::constant(a);
        let s = rep.partial_sums(&x, 50).unwrap();
        assert_eq!(s[0], 1.0);
        assert!((s[1] - 1.9).abs() < 1e-15);
        let full = rep.evaluate(&x).unwrap();
        for (t, ut) in s.iter().enumerate() {
            assert!((ut - (1.0 - 0.9f64.powi(t as i32 + 1)) / 0.1).abs() < 1e-12);
            assert!((full - ut).abs() <= rep.tail_bound(t + 1) + 1e-12);
        }
    }

    #[test]
    fn tail_weights_sums() {
        let g = TailWeights::new(vec![1.0, 0.5], 0.5, None).unwrap();
        assert!((g.tail_sum(0) - 2.0).abs() < 1e-15);
        assert!((g.tail_sum(3) - 0.25).abs() < 1e-15);
        let c = TailWeights::new(vec![1.0], 1.0, Some(10)).unwrap();
        assert_eq!(c.tail_sum(0), 10.0);
        assert_eq!(c.tail_sum(4), 6.0);
        assert_eq!(c.weight(11), 0.0);
        assert!(TailWeights::new(vec![1.0], 1.0, None).is_err());
    }
}
