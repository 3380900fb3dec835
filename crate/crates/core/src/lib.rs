//! Discounted expected utility over streams of lotteries.

pub mod axioms;
pub mod bisection;
pub mod discounting;
pub mod elicitation;
pub mod error;
pub mod fitlab;
pub mod mixture;
pub mod representation;
pub mod schema;
pub mod streams;

pub use discounting::{classify, Classification, DiscountModel, Horizon, WeightProfile};
pub use elicitation::{recover_full, BiasHorizon, ElicitationConfig, ElicitationResult, Recovery};
pub use error::{Error, Result};
pub use mixture::{expected_utility, mix, Lottery, PrizeSet, UtilityFunction};
pub use representation::{
    apply_transform, equivalent, normalize, Equivalence, Representation, TailWeights, UniquenessTransform,
    Verdict, Weights,
};
pub use streams::{mix_streams, place_at, replace_and_truncate, rotate_for_stationarity, swap, FiniteStream, Stream};
pub use axioms::{
    audit, check, AxiomId, AxiomReport, AxiomResult, CheckVerdict, Evidence, FinitePreferenceRelation, PreferenceOracle,
    Profile, Testbed, Witness,
};
