//! Shared workloads for the benchmarks.

use std::sync::Arc;

use shdisc::fitlab::{sample_relation, FeasibilityProblem};
use shdisc::{
    DiscountModel, Horizon, Lottery, PrizeSet, Representation, Stream, Testbed, UtilityFunction,
};

pub fn prizes() -> Arc<PrizeSet> {
    PrizeSet::new(["a", "z", "b"]).expect("distinct ids")
}

pub fn anchor(p: &Arc<PrizeSet>) -> Lottery {
    Lottery::degenerate_id(p, "z").expect("known prize")
}

pub fn sh(t: usize, horizon: Horizon) -> Representation {
    let p = prizes();
    let u = UtilityFunction::new(p, vec![1.0, 0.0, -0.75]).expect("finite");
    let betas: Vec<f64> = (1..t).map(|i| 0.5 + 0.4 * i as f64 / t as f64).collect();
    let m = DiscountModel::new(t, 0.9, betas).expect("valid model");
    Representation::discounted(u, m, horizon).expect("valid representation")
}

/// Streams of length `n` mixing the three prizes in a fixed pattern.
pub fn streams(n: usize, count: usize) -> Vec<Stream> {
    let p = prizes();
    (0..count)
        .map(|k| {
            let periods = (0..n)
                .map(|t| {
                    let x = ((k * 7 + t * 3) % 9) as f64 / 8.0;
                    Lottery::new(p.clone(), vec![x * 0.5, 1.0 - x, x * 0.5]).expect("probabilities")
                })
                .collect();
            Stream::finite(periods).expect("non-empty")
        })
        .collect()
}

pub fn testbed(n: usize) -> Testbed {
    let p = prizes();
    Testbed::new(p.clone(), anchor(&p), n).expect("valid testbed")
}

pub fn fit_problem(n: usize) -> FeasibilityProblem {
    let rep = sh(2, Horizon::Finite(n));
    let rel = sample_relation(&rep, &testbed(n).with_sizes(12, 24), true).expect("relation");
    FeasibilityProblem::new(rel, rep.u().clone())
}
