//! Weight fitting for finite relations, targeted model generators and
//! agreement scans.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::axioms::{AxiomId, FinitePreferenceRelation, Profile, Testbed};
use crate::discounting::{DiscountModel, Horizon, WeightProfile};
use crate::error::{Error, Result};
use crate::mixture::{mix, Lottery, PrizeSet, UtilityFunction};
use crate::representation::{Representation, TailWeights, Verdict, Weights};
use crate::streams::Stream;

pub const DEFAULT_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    pub relation: FinitePreferenceRelation,
    pub u: UtilityFunction,
    /// Strict verdicts need a utility gap of at least this much.
    pub margin: f64,
}

impl FeasibilityProblem {
    pub fn new(relation: FinitePreferenceRelation, u: UtilityFunction) -> Self {
        FeasibilityProblem { relation, u, margin: DEFAULT_MARGIN }
    }

    /// Length of the relation's streams.
    pub fn periods(&self) -> Result<usize> {
        let n = self.relation.stream(0).len().ok_or_else(|| Error::domain("weight fitting needs finite streams"))?;
        for i in 0..self.relation.len() {
            if self.relation.stream(i).len() != Some(n) {
                return Err(Error::domain(format!("stream {i} does not have length {n}")));
            }
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fit {
    Feasible { weights: WeightProfile, margin: f64 },
    /// Verdicts `(i, j, v)` no weight vector satisfies together; irreducible
    /// under greedy deletion but not necessarily of minimum size.
    Infeasible { conflict: Vec<(usize, usize, Verdict)> },
}

struct Row {
    i: usize,
    j: usize,
    verdict: Verdict,
    gaps: Vec<f64>,
}

fn rows(p: &FeasibilityProblem, n: usize) -> Result<Vec<Row>> {
    let k = p.relation.len();
    let eu = |s: usize, t: usize| p.u.expected(p.relation.stream(s).at(t).expect("length checked"));
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let verdict = p
                .relation
                .verdict(i, j)
                .ok_or_else(|| Error::argument(format!("relation has no verdict for streams {i} and {j}")))?;
            let gaps = (1..=n).map(|t| Ok(eu(i, t)? - eu(j, t)?)).collect::<Result<Vec<_>>>()?;
            out.push(Row { i, j, verdict, gaps });
        }
    }
    Ok(out)
}

/// Solve over the given rows. Indifference slack is bounded by `margin / 10`
/// and minimised; a small pull towards uniform weights picks a unique answer
/// when the rows leave freedom.
fn solve(rows: &[&Row], n: usize, margin: f64) -> Option<Vec<f64>> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let mut total = LinearExpr::empty();
    for v in &w {
        total.add(*v, 1.0);
    }
    lp.add_constraint(total, ComparisonOp::Eq, 1.0);
    for v in &w {
        let up = lp.add_var(1e-6, (0.0, f64::INFINITY));
        let down = lp.add_var(1e-6, (0.0, f64::INFINITY));
        lp.add_constraint([(*v, 1.0), (up, -1.0), (down, 1.0)], ComparisonOp::Eq, 1.0 / n as f64);
    }
    for r in rows {
        let expr = |sign: f64| {
            let mut e = LinearExpr::empty();
            for (v, g) in w.iter().zip(&r.gaps) {
                e.add(*v, sign * g);
            }
            e
        };
        match r.verdict {
            Verdict::PreferX => lp.add_constraint(expr(1.0), ComparisonOp::Ge, margin),
            Verdict::PreferY => lp.add_constraint(expr(-1.0), ComparisonOp::Ge, margin),
            Verdict::Indifferent => {
                let slack = lp.add_var(1.0, (0.0, margin / 10.0));
                let mut hi = expr(1.0);
                hi.add(slack, -1.0);
                lp.add_constraint(hi, ComparisonOp::Le, 0.0);
                let mut lo = expr(1.0);
                lo.add(slack, 1.0);
                lp.add_constraint(lo, ComparisonOp::Ge, 0.0);
            }
        }
    }
    let sol = lp.solve().ok()?;
    Some(w.iter().map(|v| sol[*v].max(0.0)).collect())
}

/// Largest strict margin, capped at `cap`, that some weight vector achieves
/// with indifferences held within a tenth of it.
fn max_margin(rows: &[&Row], n: usize, cap: f64) -> Option<f64> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let w: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let m = lp.add_var(1.0, (0.0, cap));
    let mut total = LinearExpr::empty();
    for v in &w {
        total.add(*v, 1.0);
    }
    lp.add_constraint(total, ComparisonOp::Eq, 1.0);
    for r in rows {
        let expr = |sign: f64, slack: f64| {
            let mut e = LinearExpr::empty();
            for (v, g) in w.iter().zip(&r.gaps) {
                e.add(*v, sign * g);
            }
            e.add(m, slack);
            e
        };
        match r.verdict {
            Verdict::PreferX => lp.add_constraint(expr(1.0, -1.0), ComparisonOp::Ge, 0.0),
            Verdict::PreferY => lp.add_constraint(expr(-1.0, -1.0), ComparisonOp::Ge, 0.0),
            Verdict::Indifferent => {
                lp.add_constraint(expr(1.0, -0.1), ComparisonOp::Le, 0.0);
                lp.add_constraint(expr(1.0, 0.1), ComparisonOp::Ge, 0.0);
            }
        }
    }
    let sol = lp.solve().ok()?;
    let got = sol[m];
    (got > MIN_MARGIN).then_some(got)
}

/// Margins below this count as no separation at all.
const MIN_MARGIN: f64 = 1e-12;

/// Nonnegative weights summing to one that reproduce every verdict of the
/// relation under the fixed utility. The strict margin is `p.margin` when
/// attainable and half the largest attainable margin otherwise.
pub fn fit_weights(p: &FeasibilityProblem) -> Result<Fit> {
    if !(p.margin > 0.0) {
        return Err(Error::argument("strictness margin must be positive"));
    }
    if p.u.is_constant() {
        return Err(Error::argument("utility must not be constant"));
    }
    let n = p.periods()?;
    let all = rows(p, n)?;
    let refs: Vec<&Row> = all.iter().collect();
    if let Some(best) = max_margin(&refs, n, p.margin) {
        let margin = if best >= p.margin * (1.0 - 1e-9) { p.margin } else { best / 2.0 };
        let w = solve(&refs, n, margin).ok_or_else(|| Error::constraint("weight fit lost feasibility"))?;
        return Ok(Fit::Feasible { weights: WeightProfile::new(w)?, margin });
    }
    let mut keep = refs;
    let mut k = 0;
    while k < keep.len() {
        let mut trial = keep.clone();
        trial.remove(k);
        if max_margin(&trial, n, p.margin).is_none() {
            keep = trial;
        } else {
            k += 1;
        }
    }
    Ok(Fit::Infeasible { conflict: keep.iter().map(|r| (r.i, r.j, r.verdict)).collect() })
}

/// Fraction of recorded verdicts the weights reproduce, judging differences
/// within `band` as indifference.
pub fn replay(relation: &FinitePreferenceRelation, u: &UtilityFunction, w: &WeightProfile, band: f64) -> Result<f64> {
    let rep = Representation::aa(u.clone(), w.clone())?;
    let (mut hit, mut seen) = (0usize, 0usize);
    for i in 0..relation.len() {
        for j in 0..relation.len() {
            if let Some(v) = relation.verdict(i, j) {
                seen += 1;
                if rep.compare_with(relation.stream(i), relation.stream(j), band)? == v {
                    hit += 1;
                }
            }
        }
    }
    Ok(if seen == 0 { 1.0 } else { hit as f64 / seen as f64 })
}

/// Pairs of streams, indifferent under `rep`, that differ only in periods
/// `t` and `t + 1`. Together they fix every consecutive weight ratio.
pub fn pinning_streams(rep: &Representation, anchor: &Lottery, n: usize) -> Result<Vec<Stream>> {
    let (bi, wi) = rep.u().extremes();
    let prizes = rep.u().prizes();
    let (best, worst) = (Lottery::degenerate(prizes, bi)?, Lottery::degenerate(prizes, wi)?);
    let base = Stream::finite(vec![anchor.clone(); n])?;
    let mut out = Vec::new();
    for t in 1..n {
        let (wt, ws) = (rep.weight(t), rep.weight(t + 1));
        if wt <= 0.0 || ws <= 0.0 {
            continue;
        }
        let kappa = (0.5 * ws / wt).min(1.0);
        let mu = 1.0 - kappa * wt / ws;
        out.push(base.set_at(t, &mix(&best, kappa, &worst)?)?.set_at(t + 1, &mix(&best, mu, &worst)?)?);
        out.push(base.set_at(t, &worst)?.set_at(t + 1, &best)?);
    }
    Ok(out)
}

/// The complete relation `rep` induces on the testbed's finite pool, plus
/// ratio-pinning pairs when `pin` is set.
pub fn sample_relation(rep: &Representation, tb: &Testbed, pin: bool) -> Result<FinitePreferenceRelation> {
    let mut streams = tb.finite_pool();
    if pin {
        for s in pinning_streams(rep, tb.anchor(), tb.n())? {
            if !streams.contains(&s) {
                streams.push(s);
            }
        }
    }
    FinitePreferenceRelation::from_representation(rep, streams)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    /// Axiom to violate; `None` samples a valid model.
    pub target: Option<AxiomId>,
    pub t: Option<usize>,
    pub delta: (f64, f64),
    pub beta_min: f64,
    pub n: Option<usize>,
    pub prizes: usize,
    pub infinite: bool,
    pub horizon_cap: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(target: Option<AxiomId>, seed: u64) -> Self {
        GeneratorSpec {
            target,
            t: None,
            delta: (0.5, 0.95),
            beta_min: 0.3,
            n: None,
            prizes: 3,
            infinite: matches!(target, Some(a) if a.label().starts_with('I')),
            horizon_cap: 200,
            seed,
        }
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = Some(t);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub rep: Representation,
    pub anchor: Lottery,
    pub profile: Profile,
    pub n: usize,
    pub target: Option<AxiomId>,
    /// Axioms the profile's audit is expected to fail.
    pub expected_failures: Vec<AxiomId>,
}

impl Generated {
    pub fn testbed(&self, seed: u64) -> Result<Testbed> {
        Testbed::new(self.rep.u().prizes().clone(), self.anchor.clone(), self.n)?
            .with_grid(&[0.25, 0.5, 0.75])
            .map(|t| t.with_seed(seed))
    }
}

fn sample_betas(rng: &mut ChaCha8Rng, t: usize, lo: f64) -> Vec<f64> {
    let mut b: Vec<f64> = (1..t).map(|_| rng.gen_range(lo..=1.0)).collect();
    b.sort_by(f64::total_cmp);
    b
}

/// `D(1) = 1`, `D(k + 1) = D(k) * gammas[k - 1]`, extended with the last
/// ratio out to `n` periods.
fn compound(gammas: &[f64], n: usize) -> Vec<f64> {
    let mut w = vec![1.0];
    for k in 1..n {
        let g = gammas.get(k - 1).or(gammas.last()).copied().unwrap_or(1.0);
        w.push(w[k - 1] * g);
    }
    w
}

fn sh_gammas(betas: &[f64], delta: f64) -> Vec<f64> {
    betas.iter().map(|b| b * delta).chain([delta]).collect()
}

fn off_geometric(rng: &mut ChaCha8Rng) -> f64 {
    let e = rng.gen_range(0.1..0.3);
    if rng.gen_bool(0.5) {
        1.0 + e
    } else {
        1.0 - e
    }
}

/// A model with utilities on a 1/8 grid, prize `z` as the zero-utility
/// anchor, and weights built to break exactly the targeted axiom.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    use AxiomId::*;
    let fail = |m: String| Err(Error::Spec(m));
    let (dlo, dhi) = spec.delta;
    if !(0.0 < dlo && dlo <= dhi && dhi < 1.0) {
        return fail(format!("delta range ({dlo}, {dhi}) must lie inside (0, 1)"));
    }
    if !(spec.beta_min > 0.0 && spec.beta_min <= 1.0) {
        return fail(format!("beta_min {} must lie in (0, 1]", spec.beta_min));
    }
    if spec.prizes < 3 {
        return fail("need at least three prizes so the anchor is interior".into());
    }
    let target = spec.target;
    let finite_only = matches!(target, Some(F5 | F6 | F7 | F7p | F8));
    if finite_only && spec.infinite {
        return fail(format!("{} is a finite-stream axiom", target.expect("matched")));
    }
    if target == Some(I6) && !spec.infinite {
        return fail("I6 concerns infinite streams".into());
    }
    if let Some(a) = target.filter(|a| !matches!(a, F5 | F6 | F7 | F7p | F8 | I6)) {
        return fail(format!("no generator targets {a}"));
    }
    let t = match (target, spec.t) {
        (Some(F6 | F7), Some(t)) if t != 1 => return fail(format!("{} needs T = 1, got {t}", target.expect("some"))),
        (Some(F7p | F8), Some(1)) => return fail(format!("{} needs T >= 2", target.expect("some"))),
        (Some(F6 | F7 | F5), _) => 1,
        (_, Some(0)) => return fail("T must be at least 1".into()),
        (_, Some(t)) => t,
        (Some(F7p | F8), None) => 2 + (spec.seed % 3) as usize,
        (_, None) => 1 + (spec.seed % 4) as usize,
    };
    let n = match spec.n {
        Some(n) if n < t + 2 => return fail(format!("n = {n} is below T + 2 = {}", t + 2)),
        Some(n) => n,
        None => t + 2,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x6E4E_5A7E);
    let mut ids: Vec<String> = vec!["a".into(), "z".into(), "b".into()];
    ids.extend((3..spec.prizes).map(|k| format!("p{k}")));
    let prizes = PrizeSet::new(ids)?;
    let hi = rng.gen_range(4..=8) as f64 / 8.0;
    let lo = -(rng.gen_range(4..=8) as f64) / 8.0;
    let mut values = vec![hi, 0.0, lo];
    for _ in 3..spec.prizes {
        values.push(rng.gen_range(-3i32..=3) as f64 / 8.0);
    }
    let u = UtilityFunction::new(prizes.clone(), values)?;
    let anchor = Lottery::degenerate(&prizes, 1)?;
    let delta = rng.gen_range(dlo..=dhi);
    let betas = sample_betas(&mut rng, t, spec.beta_min);
    let finite_profile = if t == 1 { Profile::FiniteExp } else { Profile::FiniteSh(t) };
    let (rep, profile) = match target {
        None if spec.infinite => {
            let rep = Representation::discounted(u, DiscountModel::new(t, delta, betas)?, Horizon::Infinite)?;
            (rep, if t == 1 { Profile::InfiniteExp } else { Profile::InfiniteSh(t) })
        }
        None => (Representation::discounted(u, DiscountModel::new(t, delta, betas)?, Horizon::Finite(n))?, finite_profile),
        Some(F5) => {
            let mut w = compound(&[delta], n);
            let k = rng.gen_range(2..=n);
            w[k - 1] *= -rng.gen_range(0.2..0.5);
            let rep = Representation::unchecked(u, Weights::Profile(WeightProfile::from_raw(w)?));
            (rep, Profile::AaOnly)
        }
        Some(F6) => {
            let r = rng.gen_range(1.05..1.5);
            (Representation::aa(u, WeightProfile::new(compound(&[r], n))?)?, Profile::FiniteExp)
        }
        Some(F7) => {
            let g = [delta, delta * off_geometric(&mut rng), delta];
            (Representation::aa(u, WeightProfile::new(compound(&g, n))?)?, Profile::FiniteExp)
        }
        Some(F7p) => {
            let mut g = sh_gammas(&betas, delta);
            g.push(delta * off_geometric(&mut rng));
            g.push(delta);
            (Representation::aa(u, WeightProfile::new(compound(&g, n))?)?, finite_profile)
        }
        Some(F8) => {
            let mut b = betas;
            b.push(1.0);
            let s = rng.gen_range(2..=t);
            b[s - 2] = b[s - 1] * rng.gen_range(1.1..1.3);
            b.pop();
            let g = sh_gammas(&b, delta);
            (Representation::aa(u, WeightProfile::new(compound(&g, n))?)?, finite_profile)
        }
        Some(I6) => {
            let head = compound(&sh_gammas(&betas, delta), t);
            let w = TailWeights::new(head, 1.0, Some(10 * spec.horizon_cap))?;
            let profile = if t == 1 { Profile::InfiniteExp } else { Profile::InfiniteSh(t) };
            (Representation::geometric(u, w)?, profile)
        }
        Some(_) => unreachable!("rejected above"),
    };
    Ok(Generated { rep, anchor, profile, n, target, expected_failures: target.into_iter().collect() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agreement {
    pub fraction: f64,
    pub pairs: usize,
    /// First pair the two representations judge differently.
    pub disagreement: Option<(Stream, Stream, Verdict, Verdict)>,
}

/// Verdict agreement over all pairs of testbed streams and every
/// two-period swap of each stream.
pub fn brute_force_agreement(a: &Representation, b: &Representation, tb: &Testbed) -> Result<Agreement> {
    if a.u().prizes() != b.u().prizes() {
        return Err(Error::domain("representations use different prize sets"));
    }
    let infinite = a.horizon() == Horizon::Infinite;
    if infinite != (b.horizon() == Horizon::Infinite) {
        return Err(Error::domain("one representation is finite and the other infinite"));
    }
    let pool = if infinite { tb.general_pool() } else { tb.finite_pool() };
    let mut pairs: Vec<(Stream, Stream)> = Vec::new();
    for (i, x) in pool.iter().enumerate() {
        for y in &pool[i + 1..] {
            pairs.push((x.clone(), y.clone()));
        }
        if !infinite {
            for p in 1..=tb.n() {
                for q in p + 1..=tb.n() {
                    pairs.push((x.clone(), x.swap(p, q)?));
                }
            }
        }
    }
    let mut agree = 0;
    let mut disagreement = None;
    for (x, y) in &pairs {
        let (va, vb) = (a.compare(x, y)?, b.compare(x, y)?);
        if va == vb {
            agree += 1;
        } else if disagreement.is_none() {
            disagreement = Some((x.clone(), y.clone(), va, vb));
        }
    }
    let fraction = if pairs.is_empty() { 1.0 } else { agree as f64 / pairs.len() as f64 };
    Ok(Agreement { fraction, pairs: pairs.len(), disagreement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discounting::{classify, Classification};

    fn setup() -> (std::sync::Arc<PrizeSet>, UtilityFunction, Lottery) {
        let p = PrizeSet::new(["a", "z", "b"]).unwrap();
        let u = UtilityFunction::new(p.clone(), vec![1.0, 0.0, -0.75]).unwrap();
        let z = Lottery::degenerate(&p, 1).unwrap();
        (p, u, z)
    }

    #[test]
    fn fit_recovers_exponential() {
        let (p, u, z) = setup();
        let rep = Representation::discounted(u.clone(), DiscountModel::exponential(0.9).unwrap(), Horizon::Finite(3))
            .unwrap();
        let tb = Testbed::new(p, z, 3).unwrap().with_seed(5);
        let rel = sample_relation(&rep, &tb, true).unwrap();
        let prob = FeasibilityProblem::new(rel.clone(), u.clone());
        let Fit::Feasible { weights, .. } = fit_weights(&prob).unwrap() else { panic!("infeasible") };
        assert_eq!(replay(&rel, &u, &weights, prob.margin / 2.0).unwrap(), 1.0);
        match classify(&weights, 1e-9) {
            Classification::Exponential { delta } => assert!((delta - 0.9).abs() < 1e-6, "{delta}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contradiction_is_isolated() {
        let (p, u, _) = setup();
        let a = Lottery::degenerate(&p, 0).unwrap();
        let b = Lottery::degenerate(&p, 2).unwrap();
        let x = Stream::finite(vec![a.clone(), b.clone()]).unwrap();
        let y = Stream::finite(vec![b.clone(), a.clone()]).unwrap();
        let w = Stream::finite(vec![a.clone(), a.clone()]).unwrap();
        use Verdict::*;
        let rel = FinitePreferenceRelation::new(
            vec![x, y, w],
            vec![
                vec![Some(Indifferent), Some(PreferX), Some(PreferY)],
                vec![Some(PreferX), Some(Indifferent), Some(PreferY)],
                vec![Some(PreferX), Some(PreferX), Some(Indifferent)],
            ],
        )
        .unwrap();
        match fit_weights(&FeasibilityProblem::new(rel, u)).unwrap() {
            Fit::Infeasible { conflict } => {
                assert_eq!(conflict.len(), 2);
                assert!(conflict.iter().all(|(i, j, _)| i + j == 1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trivial_relation_gives_uniform_weights() {
        let (p, u, z) = setup();
        let s = Stream::finite(vec![z.clone(); 4]).unwrap();
        let _ = p;
        let rel = FinitePreferenceRelation::new(vec![s], vec![vec![Some(Verdict::Indifferent)]]).unwrap();
        let Fit::Feasible { weights, .. } = fit_weights(&FeasibilityProblem::new(rel, u)).unwrap() else {
            panic!()
        };
        for w in weights.weights() {
            assert!((w - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn generator_rejects_contradictions() {
        let mut s = GeneratorSpec::new(Some(AxiomId::F5), 1);
        s.infinite = true;
        assert!(matches!(generate(&s), Err(Error::Spec(_))));
        assert!(matches!(generate(&GeneratorSpec::new(Some(AxiomId::F8), 1).with_t(1)), Err(Error::Spec(_))));
        assert!(matches!(generate(&GeneratorSpec::new(Some(AxiomId::F3), 1)), Err(Error::Spec(_))));
        let g = generate(&GeneratorSpec::new(None, 3).with_t(2)).unwrap();
        assert_eq!(g.profile, Profile::FiniteSh(2));
        assert_eq!(g.n, 4);
    }

    #[test]
    fn agreement_detects_different_patience() {
        let (p, u, z) = setup();
        let tb = Testbed::new(p, z, 3).unwrap();
        let fast = Representation::discounted(u.clone(), DiscountModel::exponential(0.9).unwrap(), Horizon::Finite(3))
            .unwrap();
        let slow = Representation::discounted(u, DiscountModel::exponential(0.5).unwrap(), Horizon::Finite(3)).unwrap();
        assert_eq!(brute_force_agreement(&fast, &fast, &tb).unwrap().fraction, 1.0);
        let ag = brute_force_agreement(&fast, &slow, &tb).unwrap();
        assert!(ag.fraction < 1.0);
        assert!(ag.disagreement.is_some());
    }
}
