use std::sync::Arc;

use shdisc::axioms::{check, locate_switch};
use shdisc::bisection::Switch;
use shdisc::*;

fn prizes() -> Arc<PrizeSet> {
    PrizeSet::new(["a", "z", "b"]).unwrap()
}

fn lot(p: &Arc<PrizeSet>, id: &str) -> Lottery {
    Lottery::degenerate_id(p, id).unwrap()
}

fn u3(p: &Arc<PrizeSet>) -> UtilityFunction {
    UtilityFunction::new(p.clone(), vec![1.0, 0.0, -0.75]).unwrap()
}

fn tb(n: usize) -> Testbed {
    let p = prizes();
    Testbed::new(p.clone(), lot(&p, "z"), n).unwrap()
}

fn weights(w: &[f64]) -> PreferenceOracle {
    let p = prizes();
    PreferenceOracle::from_representation(Representation::aa(u3(&p), WeightProfile::new(w.to_vec()).unwrap()).unwrap())
}

fn assert_fails(ev: &dyn Evidence, r: &AxiomResult) {
    assert!(r.verdict.is_failure(), "{} should fail: {r:?}", r.axiom);
    assert!(r.witness.as_ref().unwrap().replay(ev).unwrap(), "witness for {} does not replay", r.axiom);
}

#[test]
fn min_oracle_breaks_independence() {
    let p = prizes();
    let u = u3(&p);
    let o = PreferenceOracle::new(move |x, y| {
        let worst = |s: &Stream| s.explicit().iter().map(|l| u.expected(l).unwrap()).fold(f64::INFINITY, f64::min);
        Ok(Verdict::from_difference(worst(x) - worst(y), 1e-9))
    });
    let r = check(&o, &tb(2), AxiomId::F3, 1).unwrap();
    assert_fails(&o, &r);
    assert!(r.witness.unwrap().lambda.is_some());
}

#[test]
fn lexicographic_oracle_breaks_continuity() {
    let p = prizes();
    let u = u3(&p);
    let o = PreferenceOracle::new(move |x, y| {
        for t in 1..=2 {
            let d = u.expected(x.at(t)?)? - u.expected(y.at(t)?)?;
            if d.abs() > 1e-12 {
                return Ok(Verdict::from_difference(d, 0.0));
            }
        }
        Ok(Verdict::Indifferent)
    });
    assert_fails(&o, &check(&o, &tb(2), AxiomId::F4, 1).unwrap());
}

#[test]
fn linear_oracle_switch_matches_closed_form() {
    let p = prizes();
    let rep = Representation::aa(u3(&p), WeightProfile::new(vec![1.0, 0.5]).unwrap()).unwrap();
    let o = PreferenceOracle::from_representation(rep.clone());
    let s = |a: &str, b: &str| Stream::finite(vec![lot(&p, a), lot(&p, b)]).unwrap();
    let (x, y, z) = (s("a", "a"), s("z", "a"), s("b", "b"));
    let want = (rep.evaluate(&y).unwrap() - rep.evaluate(&z).unwrap())
        / (rep.evaluate(&x).unwrap() - rep.evaluate(&z).unwrap());
    match locate_switch(&o, &x, &y, &z).unwrap() {
        Some(Switch::Indifferent(a)) => assert!((a - want).abs() < 1e-8, "{a} vs {want}"),
        other => panic!("{other:?}"),
    }
    assert_eq!(check(&o, &tb(2), AxiomId::F4, 1).unwrap().verdict, CheckVerdict::Pass);
}

#[test]
fn signed_weight_breaks_monotonicity() {
    let p = prizes();
    let rep = Representation::unchecked(
        u3(&p),
        Weights::Profile(WeightProfile::from_raw(vec![1.0, -0.5]).unwrap()),
    );
    let o = PreferenceOracle::from_representation(rep);
    let r = check(&o, &tb(2), AxiomId::F5, 1).unwrap();
    assert_fails(&o, &r);
    assert_eq!(r.witness.unwrap().periods, vec![2]);
}

#[test]
fn later_heavier_weight_breaks_impatience() {
    let o = weights(&[1.0, 1.2]);
    assert_fails(&o, &check(&o, &tb(2), AxiomId::F6, 1).unwrap());
    let e = weights(&[1.0, 0.9]);
    assert_eq!(check(&e, &tb(2), AxiomId::F6, 1).unwrap().verdict, CheckVerdict::Pass);
}

#[test]
fn quasi_hyperbolic_stationarity_witness() {
    let p = PrizeSet::new(["p", "q", "r", "s", "x0"]).unwrap();
    let u = UtilityFunction::new(p.clone(), vec![0.9, 0.0, 0.0, 1.0, 0.0]).unwrap();
    let m = DiscountModel::quasi_hyperbolic(0.5, 0.9).unwrap();
    let rep = Representation::discounted(u, m, Horizon::Finite(3)).unwrap();
    let l = |id: &str| lot(&p, id);
    let x = Stream::finite(vec![l("x0"), l("p"), l("q")]).unwrap();
    let y = Stream::finite(vec![l("x0"), l("r"), l("s")]).unwrap();
    assert_eq!(rep.compare(&x, &y).unwrap(), Verdict::Indifferent);
    let (x2, y2) = (x.advance_from(1).unwrap(), y.advance_from(1).unwrap());
    assert!((rep.evaluate(&x2).unwrap() - 0.9).abs() < 1e-12);
    assert!((rep.evaluate(&y2).unwrap() - 0.45).abs() < 1e-12);
    assert_eq!(rep.compare(&x2, &y2).unwrap(), Verdict::PreferX);

    let o = PreferenceOracle::from_representation(rep);
    let tb = Testbed::new(p.clone(), l("x0"), 3).unwrap();
    assert_fails(&o, &check(&o, &tb, AxiomId::F7, 1).unwrap());
    let report = audit(&o, &tb, Profile::FiniteExp).unwrap();
    assert_eq!(report.failures(), vec![AxiomId::F7]);
}

#[test]
fn wrong_bias_horizon_breaks_stationarity_from_t() {
    let p = prizes();
    let m = DiscountModel::new(3, 0.9, vec![0.5, 0.7]).unwrap();
    let o = PreferenceOracle::from_representation(Representation::discounted(u3(&p), m, Horizon::Finite(5)).unwrap());
    assert_fails(&o, &check(&o, &tb(5), AxiomId::F7p, 2).unwrap());
    assert_eq!(check(&o, &tb(5), AxiomId::F7p, 3).unwrap().verdict, CheckVerdict::Pass);
    assert!(audit(&o, &tb(5), Profile::FiniteSh(3)).unwrap().all_pass());
}

#[test]
fn decreasing_ratios_break_early_bias() {
    let o = weights(&[1.0, 0.9, 0.45, 0.405]);
    let r = check(&o, &tb(4), AxiomId::F8, 3).unwrap();
    assert_fails(&o, &r);
    assert_eq!(r.witness.as_ref().unwrap().streams.len(), 4);
    assert_eq!(r.witness.unwrap().periods, vec![2]);
    assert_eq!(check(&o, &tb(4), AxiomId::F8, 1).unwrap().verdict, CheckVerdict::NotApplicable);
}

#[test]
fn black_box_early_bias_matches_analytic() {
    let p = prizes();
    let m = DiscountModel::new(3, 0.85, vec![0.6, 0.8]).unwrap();
    let rep = Representation::discounted(u3(&p), m, Horizon::Finite(5)).unwrap();
    let opaque = PreferenceOracle::from_representation(rep.clone()).opaque();
    assert!(audit(&opaque, &tb(5), Profile::FiniteSh(3)).unwrap().all_pass());
    let bad = weights(&[1.0, 0.9, 0.45, 0.405]).opaque();
    assert_fails(&bad, &check(&bad, &tb(4), AxiomId::F8, 3).unwrap());
}

#[test]
fn zero_weight_period_is_not_essential() {
    let o = weights(&[1.0, 0.0, 0.5]);
    let r = check(&o, &tb(3), AxiomId::F2pp, 2).unwrap();
    assert_fails(&o, &r);
    assert!(r.note.unwrap().contains("[2]"));
    assert_eq!(check(&o, &tb(3), AxiomId::F2p, 1).unwrap().verdict, CheckVerdict::Pass);
}

#[test]
fn anchor_must_be_interior() {
    let p = prizes();
    let rep = Representation::discounted(u3(&p), DiscountModel::exponential(0.9).unwrap(), Horizon::Infinite).unwrap();
    let o = PreferenceOracle::from_representation(rep);
    let good = Testbed::new(p.clone(), lot(&p, "z"), 3).unwrap();
    assert_eq!(check(&o, &good, AxiomId::I2, 1).unwrap().verdict, CheckVerdict::Pass);
    let top = Testbed::new(p.clone(), lot(&p, "a"), 3).unwrap();
    assert_fails(&o, &check(&o, &top, AxiomId::I2, 1).unwrap());
    assert!(matches!(audit(&o, &top, Profile::InfiniteExp), Err(Error::AnchorNotInterior(_))));
}

#[test]
fn undiscounted_weights_fail_convergence_at_horizon() {
    let p = prizes();
    let w = TailWeights::new(vec![1.0], 1.0, Some(2000)).unwrap();
    let o = PreferenceOracle::from_representation(Representation::geometric(u3(&p), w).unwrap());
    let r = check(&o, &tb(3), AxiomId::I6, 1).unwrap();
    assert_eq!(r.verdict, CheckVerdict::FailAtHorizon);
    assert!(r.witness.unwrap().replay(&o).unwrap());

    let ok = Representation::discounted(u3(&p), DiscountModel::exponential(0.8).unwrap(), Horizon::Infinite).unwrap();
    let o = PreferenceOracle::from_representation(ok);
    let r = check(&o, &tb(3), AxiomId::I6, 1).unwrap();
    assert_eq!(r.verdict, CheckVerdict::Pass);
    assert!(r.note.unwrap().contains("horizon cap 200"));
}

#[test]
fn exponential_satisfies_weaker_profiles() {
    let p = prizes();
    let rep = Representation::discounted(u3(&p), DiscountModel::exponential(0.9).unwrap(), Horizon::Finite(5)).unwrap();
    let o = PreferenceOracle::from_representation(rep);
    let report = audit(&o, &tb(5), Profile::FiniteSh(3)).unwrap();
    assert!(report.all_pass());
    assert_eq!(report.certified().unwrap(), Profile::FiniteSh(3).conclusion());
    assert!(audit(&o, &tb(5), Profile::AaOnly).unwrap().all_pass());
}

#[test]
fn constant_utility_fails_nontriviality() {
    let p = prizes();
    let o = PreferenceOracle::new(|_, _| Ok(Verdict::Indifferent));
    assert_fails(&o, &check(&o, &tb(2), AxiomId::F2, 1).unwrap());
    let _ = p;
}

#[test]
fn relation_gaps_fail_completeness() {
    let p = prizes();
    let s = |a: &str| Stream::finite(vec![lot(&p, a), lot(&p, a)]).unwrap();
    let streams = vec![s("a"), s("z"), s("b")];
    use Verdict::*;
    let rel = FinitePreferenceRelation::new(
        streams.clone(),
        vec![
            vec![Some(Indifferent), Some(PreferX), None],
            vec![Some(PreferY), Some(Indifferent), Some(PreferX)],
            vec![None, Some(PreferY), Some(Indifferent)],
        ],
    )
    .unwrap();
    let t = tb(2);
    let r = check(&rel, &t, AxiomId::F1, 1).unwrap();
    assert_eq!(r.verdict, CheckVerdict::Fail);
    assert!(r.witness.unwrap().note.contains("completeness"));

    let rep = Representation::aa(u3(&p), WeightProfile::new(vec![1.0, 0.8]).unwrap()).unwrap();
    let full = FinitePreferenceRelation::from_representation(&rep, streams).unwrap();
    assert_eq!(check(&full, &t, AxiomId::F1, 1).unwrap().verdict, CheckVerdict::Pass);
    assert_eq!(check(&full, &t, AxiomId::F4, 1).unwrap().verdict, CheckVerdict::NotApplicable);
}

#[test]
fn intransitive_relation_is_caught() {
    let p = prizes();
    let s = |a: &str| Stream::finite(vec![lot(&p, a)]).unwrap();
    use Verdict::*;
    let rel = FinitePreferenceRelation::new(
        vec![s("a"), s("z"), s("b")],
        vec![
            vec![Some(Indifferent), Some(PreferX), Some(PreferY)],
            vec![Some(PreferY), Some(Indifferent), Some(PreferX)],
            vec![Some(PreferX), Some(PreferY), Some(Indifferent)],
        ],
    )
    .unwrap();
    let r = check(&rel, &tb(1), AxiomId::F1, 1).unwrap();
    assert_fails(&rel, &r);
    assert_eq!(r.witness.unwrap().comparisons.len(), 3);
}

#[test]
fn audits_are_reproducible() {
    let p = prizes();
    let m = DiscountModel::quasi_hyperbolic(0.7, 0.9).unwrap();
    let o = PreferenceOracle::from_representation(Representation::discounted(u3(&p), m, Horizon::Infinite).unwrap());
    let t = tb(4).with_seed(11);
    let a = audit(&o, &t, Profile::InfiniteSh(2)).unwrap();
    let b = audit(&o, &t, Profile::InfiniteSh(2)).unwrap();
    assert_eq!(a, b);
    assert!(a.all_pass());
    assert!(a.results.iter().all(|r| r.cases_checked > 0));
}
