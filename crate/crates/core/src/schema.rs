//! JSON interchange: input documents, their conversion into library types,
//! and canonical renderings of results.
//!
//! Every document carries `"schema": "1"`. Lotteries are a prize id or a
//! `{prize: probability}` map; streams are `{"periods": [...]}`,
//! `{"prefix": [...], "tail": "anchor" | null | lottery}` or
//! `{"constant": lottery}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::axioms::{AxiomReport, AxiomResult, FinitePreferenceRelation, Testbed, Witness};
use crate::discounting::{Classification, DiscountModel, Horizon, WeightProfile};
use crate::elicitation::{ElicitationConfig, ElicitationResult, Recovery};
use crate::error::{Error, Result};
use crate::fitlab::{Fit, Generated};
use crate::mixture::{Lottery, PrizeSet, UtilityFunction};
use crate::representation::{Representation, TailWeights, Verdict, Weights};
use crate::streams::Stream;

pub const SCHEMA: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LotteryJson {
    Prize(String),
    Mix(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<LotteryJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<Vec<LotteryJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<LotteryJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<LotteryJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HorizonJson {
    Periods(usize),
    Named(String),
}

/// `{"T", "delta", "betas"}`, or a `kind` shorthand:
/// `exponential` (delta), `quasi_hyperbolic` (beta, delta),
/// `hayashi` (beta_primes, delta).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_primes: Option<Vec<f64>>,
}

/// Exactly one of `weights`, `model` (+ `horizon`) or `head` (+ `tail_ratio`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationJson {
    pub u: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<HorizonJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationJson {
    pub streams: Vec<StreamJson>,
    pub verdicts: Vec<Vec<Option<String>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestbedJson {
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(rename = "T", default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub horizon_cap: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonJson {
    pub x: usize,
    pub y: usize,
    pub verdict: String,
}

/// The shape audits print witnesses in; `compare` accepts it back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessJson {
    pub streams: Vec<StreamJson>,
    pub comparisons: Vec<ComparisonJson>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub periods: Vec<usize>,
    #[serde(default)]
    pub note: String,
}

/// One input file. Which fields are required depends on the command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub schema: String,
    #[serde(default)]
    pub prizes: Option<Vec<String>>,
    #[serde(default)]
    pub anchor: Option<LotteryJson>,
    #[serde(default)]
    pub representation: Option<RepresentationJson>,
    #[serde(default)]
    pub streams: Option<Vec<StreamJson>>,
    #[serde(default)]
    pub pairs: Option<Vec<(StreamJson, StreamJson)>>,
    #[serde(default)]
    pub relation: Option<RelationJson>,
    #[serde(default)]
    pub u: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub testbed: Option<TestbedJson>,
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub witness: Option<WitnessJson>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub expected_failures: Option<Vec<String>>,
}

/// Deserialize with the failing field path and source position in the error.
pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            Error::Argument(format!("malformed JSON: {inner}"))
        } else {
            Error::Argument(format!("malformed JSON at `{path}`: {inner}"))
        }
    })
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Document = from_str(text)?;
        if doc.schema != SCHEMA {
            return Err(Error::argument(format!("unsupported schema `{}`, expected `{SCHEMA}`", doc.schema)));
        }
        Ok(doc)
    }

    /// The declared prize ids, else the keys of the first utility table found.
    pub fn domain(&self) -> Result<Domain> {
        let ids: Vec<String> = match (&self.prizes, &self.representation, &self.u) {
            (Some(p), _, _) => p.clone(),
            (None, Some(r), _) => r.u.keys().cloned().collect(),
            (None, None, Some(u)) => u.keys().cloned().collect(),
            _ => return Err(Error::argument("missing field `prizes`")),
        };
        let prizes = PrizeSet::new(ids)?;
        let mut domain = Domain { prizes, anchor: None };
        if let Some(a) = &self.anchor {
            if matches!(a, LotteryJson::Prize(s) if s == "anchor") {
                return Err(Error::argument("`anchor` cannot refer to itself"));
            }
            domain.anchor = Some(domain.lottery(a)?);
        }
        Ok(domain)
    }

    pub fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
        field.as_ref().ok_or_else(|| Error::argument(format!("missing field `{name}`")))
    }
}

/// Prize set and anchor shared by everything in one document.
#[derive(Debug, Clone)]
pub struct Domain {
    pub prizes: Arc<PrizeSet>,
    pub anchor: Option<Lottery>,
}

impl Domain {
    pub fn anchor(&self) -> Result<&Lottery> {
        self.anchor.as_ref().ok_or_else(|| Error::argument("missing field `anchor`"))
    }

    pub fn lottery(&self, l: &LotteryJson) -> Result<Lottery> {
        match l {
            LotteryJson::Prize(id) if id == "anchor" && self.prizes.index_of(id).is_none() => {
                Ok(self.anchor()?.clone())
            }
            LotteryJson::Prize(id) => Lottery::degenerate_id(&self.prizes, id),
            LotteryJson::Mix(m) => Lottery::from_map(&self.prizes, m),
        }
    }

    fn lotteries(&self, ls: &[LotteryJson]) -> Result<Vec<Lottery>> {
        ls.iter().map(|l| self.lottery(l)).collect()
    }

    pub fn stream(&self, s: &StreamJson) -> Result<Stream> {
        match (&s.periods, &s.prefix, &s.constant) {
            (Some(p), None, None) if s.tail.is_none() => Stream::finite(self.lotteries(p)?),
            (None, Some(p), None) => {
                let tail = match &s.tail {
                    Some(t) => self.lottery(t)?,
                    None => self.anchor()?.clone(),
                };
                Stream::infinite(self.lotteries(p)?, tail)
            }
            (None, None, Some(c)) if s.tail.is_none() => Ok(Stream::constant(self.lottery(c)?)),
            _ => Err(Error::argument(
                "a stream needs exactly one of `periods`, `prefix` (with optional `tail`) or `constant`",
            )),
        }
    }

    pub fn streams(&self, ss: &[StreamJson]) -> Result<Vec<Stream>> {
        ss.iter().map(|s| self.stream(s)).collect()
    }

    pub fn utility(&self, u: &BTreeMap<String, f64>) -> Result<UtilityFunction> {
        UtilityFunction::from_map(&self.prizes, u)
    }

    /// Signed or otherwise irregular weight lists are kept as given so that
    /// audits can expose the axioms they break.
    pub fn representation(&self, r: &RepresentationJson) -> Result<Representation> {
        let u = self.utility(&r.u)?;
        match (&r.weights, &r.model, &r.head) {
            (Some(w), None, None) => {
                if r.horizon.is_some() || r.scale.is_some() || r.tail_ratio.is_some() || r.cutoff.is_some() {
                    return Err(Error::argument("`weights` takes no horizon, scale, tail_ratio or cutoff"));
                }
                Ok(Representation::unchecked(u, Weights::Profile(WeightProfile::from_raw(w.clone())?)))
            }
            (None, Some(m), None) => {
                let model = model(m)?;
                let horizon = horizon(Document::require(&r.horizon, "horizon")?)?;
                let rep = Representation::discounted(u.clone(), model.clone(), horizon)?;
                match r.scale {
                    None => Ok(rep),
                    Some(c) if c.is_finite() && c > 0.0 => {
                        Ok(Representation::unchecked(u, Weights::Discounted { model, horizon, scale: c }))
                    }
                    Some(c) => Err(Error::constraint(format!("scale {c} must be positive"))),
                }
            }
            (None, None, Some(h)) => {
                let ratio = *Document::require(&r.tail_ratio, "tail_ratio")?;
                Representation::geometric(u, TailWeights::new(h.clone(), ratio, r.cutoff)?)
            }
            _ => Err(Error::argument("a representation needs exactly one of `weights`, `model` or `head`")),
        }
    }

    /// Stream pairs with the verdicts the witness recorded for them.
    pub fn witness(&self, w: &WitnessJson) -> Result<Vec<(Stream, Stream, Verdict)>> {
        let streams = self.streams(&w.streams)?;
        w.comparisons
            .iter()
            .map(|c| {
                let get = |i: usize| {
                    streams
                        .get(i)
                        .cloned()
                        .ok_or_else(|| Error::argument(format!("comparison refers to missing stream {i}")))
                };
                Ok((get(c.x)?, get(c.y)?, verdict(&c.verdict)?))
            })
            .collect()
    }

    pub fn relation(&self, r: &RelationJson) -> Result<FinitePreferenceRelation> {
        let streams = self.streams(&r.streams)?;
        let verdicts = r
            .verdicts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match v {
                        None => Ok(None),
                        Some(s) => verdict(s).map(Some),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FinitePreferenceRelation::new(streams, verdicts)
    }

    /// Fields left out of `t` fall back to the library defaults.
    pub fn testbed(&self, t: Option<&TestbedJson>, n: usize) -> Result<Testbed> {
        let mut tb = Testbed::new(self.prizes.clone(), self.anchor()?.clone(), n)?;
        if let Some(t) = t {
            if let Some(g) = &t.grid {
                tb = tb.with_grid(g)?;
            }
            if let Some(h) = t.horizon_cap {
                tb = tb.with_horizon_cap(h)?;
            }
            if let Some(s) = t.seed {
                tb = tb.with_seed(s);
            }
        }
        Ok(tb)
    }
}

pub fn verdict(s: &str) -> Result<Verdict> {
    Verdict::from_symbol(s).ok_or_else(|| Error::argument(format!("unknown verdict `{s}`; use >, = or <")))
}

pub fn model(m: &ModelJson) -> Result<DiscountModel> {
    let extra = |ok: bool, kind: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::argument(format!("unexpected parameters for model kind `{kind}`")))
        }
    };
    match m.kind.as_deref() {
        None => {
            extra(m.beta.is_none() && m.beta_primes.is_none(), "general")?;
            let t = *Document::require(&m.t, "T")?;
            DiscountModel::new(t, m.delta, m.betas.clone().unwrap_or_default())
        }
        Some("exponential") => {
            extra(m.t.is_none() && m.betas.is_none() && m.beta.is_none() && m.beta_primes.is_none(), "exponential")?;
            DiscountModel::exponential(m.delta)
        }
        Some("quasi_hyperbolic") => {
            extra(m.t.is_none() && m.betas.is_none() && m.beta_primes.is_none(), "quasi_hyperbolic")?;
            DiscountModel::quasi_hyperbolic(*Document::require(&m.beta, "beta")?, m.delta)
        }
        Some("hayashi") => {
            extra(m.t.is_none() && m.betas.is_none() && m.beta.is_none(), "hayashi")?;
            DiscountModel::from_hayashi(Document::require(&m.beta_primes, "beta_primes")?, m.delta)
        }
        Some(k) => Err(Error::argument(format!(
            "unknown model kind `{k}`; use exponential, quasi_hyperbolic or hayashi"
        ))),
    }
}

pub fn horizon(h: &HorizonJson) -> Result<Horizon> {
    match h {
        HorizonJson::Periods(0) => Err(Error::argument("horizon must be at least 1")),
        HorizonJson::Periods(n) => Ok(Horizon::Finite(*n)),
        HorizonJson::Named(s) if s == "infinite" => Ok(Horizon::Infinite),
        HorizonJson::Named(s) => Err(Error::argument(format!("horizon `{s}` is neither an integer nor \"infinite\""))),
    }
}

pub fn lottery_json(l: &Lottery) -> Value {
    match l.is_degenerate() {
        Some(i) => Value::String(l.prizes().ids()[i].clone()),
        None => {
            let m: Map<String, Value> = l
                .prizes()
                .ids()
                .iter()
                .zip(l.probs())
                .filter(|(_, p)| **p != 0.0)
                .map(|(id, p)| (id.clone(), json!(p)))
                .collect();
            Value::Object(m)
        }
    }
}

/// Tails equal to `anchor` bit for bit are written as `"anchor"`.
pub fn stream_json(s: &Stream, anchor: Option<&Lottery>) -> Value {
    let ls = |v: &[Lottery]| Value::Array(v.iter().map(lottery_json).collect());
    match s.tail() {
        None => json!({ "periods": ls(s.explicit()) }),
        Some(t) => {
            let tail = match anchor {
                Some(a) if a.probs() == t.probs() => json!("anchor"),
                _ => lottery_json(t),
            };
            json!({ "prefix": ls(s.explicit()), "tail": tail })
        }
    }
}

pub fn utility_json(u: &UtilityFunction) -> Value {
    json!(u.to_map())
}

pub fn model_json(m: &DiscountModel) -> Value {
    json!({ "T": m.T(), "delta": m.delta(), "betas": m.betas() })
}

pub fn horizon_json(h: Horizon) -> Value {
    match h {
        Horizon::Finite(n) => json!(n),
        Horizon::Infinite => json!("infinite"),
    }
}

pub fn representation_json(rep: &Representation) -> Value {
    let u = utility_json(rep.u());
    match rep.weights() {
        Weights::Profile(p) => json!({ "u": u, "weights": p.weights() }),
        Weights::Discounted { model, horizon, scale } => {
            let mut v = json!({ "u": u, "model": model_json(model), "horizon": horizon_json(*horizon) });
            if *scale != 1.0 {
                v["scale"] = json!(scale);
            }
            v
        }
        Weights::Geometric(tw) => {
            let mut v = json!({ "u": u, "head": tw.head, "tail_ratio": tw.ratio });
            if let Some(c) = tw.cutoff {
                v["cutoff"] = json!(c);
            }
            v
        }
    }
}

pub fn witness_json(w: &Witness, anchor: Option<&Lottery>) -> Value {
    let comparisons: Vec<Value> = w
        .comparisons
        .iter()
        .map(|c| json!({ "x": c.x, "y": c.y, "verdict": c.verdict.symbol() }))
        .collect();
    json!({
        "streams": w.streams.iter().map(|s| stream_json(s, anchor)).collect::<Vec<_>>(),
        "comparisons": comparisons,
        "lambda": w.lambda,
        "periods": w.periods,
        "note": w.note,
    })
}

pub fn result_json(r: &AxiomResult, anchor: Option<&Lottery>) -> Value {
    json!({
        "axiom": r.axiom.label(),
        "verdict": r.verdict.label(),
        "witness": r.witness.as_ref().map(|w| witness_json(w, anchor)),
        "cases_checked": r.cases_checked,
        "note": r.note,
    })
}

pub fn report_json(r: &AxiomReport, anchor: Option<&Lottery>) -> Value {
    json!({
        "schema": SCHEMA,
        "profile": r.profile.label(),
        "testbed": { "grid": r.grid, "n": r.n, "T": r.profile.bias_horizon(), "horizon_cap": r.horizon_cap, "seed": r.seed },
        "results": r.results.iter().map(|x| result_json(x, anchor)).collect::<Vec<_>>(),
        "all_pass": r.all_pass(),
        "certified": r.certified(),
    })
}

pub fn classification_json(c: &Classification) -> Value {
    let mut v = json!({ "schema": SCHEMA, "class": c.label() });
    match c {
        Classification::Exponential { delta } => v["delta"] = json!(delta),
        Classification::QuasiHyperbolic { beta, delta } => {
            v["beta"] = json!(beta);
            v["delta"] = json!(delta);
        }
        Classification::SemiHyperbolic(_) => {}
        Classification::Ambiguous { reason, .. } | Classification::None { reason } => v["reason"] = json!(reason),
    }
    if let Some(m) = c.model() {
        v["model"] = model_json(&m);
    }
    v
}

pub fn elicitation_json(r: &ElicitationResult, cfg: &ElicitationConfig) -> Value {
    let d = &r.diagnostics;
    let diagnostics = json!({
        "queries": d.queries,
        "tail_residual": d.tail_residual,
        "verdict_agreement": d.verdict_agreement,
        "gammas": d.gammas,
        "horizon_auto": d.horizon_auto,
    });
    let mut v = match (&r.recovery, r.representation(cfg)) {
        (Recovery::Accepted(_), Some(rep)) => {
            let mut v = representation_json(&rep);
            v["status"] = json!("ACCEPTED");
            v
        }
        (Recovery::Rejected { axiom, reason }, _) => json!({
            "u": utility_json(&r.u),
            "status": "REJECTED",
            "axiom": axiom.label(),
            "reason": reason,
        }),
        (Recovery::Accepted(_), None) => json!({ "u": utility_json(&r.u), "status": "ACCEPTED" }),
    };
    v["schema"] = json!(SCHEMA);
    v["diagnostics"] = diagnostics;
    v
}

pub fn fit_json(f: &Fit, relation: &FinitePreferenceRelation, anchor: Option<&Lottery>) -> Value {
    match f {
        Fit::Feasible { weights, margin } => json!({
            "schema": SCHEMA,
            "status": "FEASIBLE",
            "weights": weights.weights(),
            "margin": margin,
        }),
        Fit::Infeasible { conflict } => {
            let mut pairs = Vec::new();
            for (i, j, v) in conflict {
                pairs.push(json!({
                    "x": stream_json(relation.stream(*i), anchor),
                    "y": stream_json(relation.stream(*j), anchor),
                    "verdict": v.symbol(),
                    "index": [i, j],
                }));
            }
            json!({ "schema": SCHEMA, "status": "INFEASIBLE", "conflict": pairs })
        }
    }
}

/// A generated model as a self-contained audit input plus metadata.
pub fn generated_json(g: &Generated, seed: u64) -> Result<Value> {
    let tb = g.testbed(seed)?;
    Ok(json!({
        "schema": SCHEMA,
        "prizes": g.rep.u().prizes().ids(),
        "anchor": lottery_json(&g.anchor),
        "representation": representation_json(&g.rep),
        "profile": g.profile.label(),
        "testbed": { "grid": tb.grid(), "n": g.n, "T": g.profile.bias_horizon(), "seed": seed },
        "target": g.target.map(|a| a.label()),
        "expected_failures": g.expected_failures.iter().map(|a| a.label()).collect::<Vec<_>>(),
    }))
}
