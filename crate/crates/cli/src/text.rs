use std::fmt::Write;

use shdisc::elicitation::ElicitationResult;
use shdisc::fitlab::{Fit, Generated};
use shdisc::schema::{lottery_json, stream_json};
use shdisc::{
    AxiomReport, Classification, DiscountModel, ElicitationConfig, FinitePreferenceRelation, Lottery, Recovery,
};

fn model(m: &DiscountModel) -> String {
    let betas: Vec<String> = m.betas().iter().map(|b| format!("{b:.6}")).collect();
    format!("SH({}) delta={:.6} betas=[{}]", m.T(), m.delta(), betas.join(", "))
}

pub fn report(r: &AxiomReport, anchor: Option<&Lottery>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "profile {}  n={}  horizon_cap={}  seed={}  grid={:?}", r.profile.label(), r.n, r.horizon_cap, r.seed, r.grid);
    for x in &r.results {
        let _ = writeln!(s, "{:<5} {:<16} cases={}", x.axiom.label(), x.verdict.label(), x.cases_checked);
        if let Some(note) = &x.note {
            let _ = writeln!(s, "      {note}");
        }
        if let Some(w) = &x.witness {
            let _ = writeln!(s, "      witness: {}", w.note);
            if let Some(l) = w.lambda {
                let _ = writeln!(s, "      lambda = {l}");
            }
            if !w.periods.is_empty() {
                let _ = writeln!(s, "      periods = {:?}", w.periods);
            }
            for (i, st) in w.streams.iter().enumerate() {
                let _ = writeln!(s, "      s{i} = {}", stream_json(st, anchor));
            }
            for c in &w.comparisons {
                let _ = writeln!(s, "      s{} {} s{}", c.x, c.verdict.symbol(), c.y);
            }
        }
    }
    match r.certified() {
        Some(c) => {
            let _ = writeln!(s, "all PASS: {c}");
        }
        None => {
            let f: Vec<&str> = r.failures().iter().map(|a| a.label()).collect();
            let _ = writeln!(s, "violated: {}", f.join(", "));
        }
    }
    s
}

pub fn elicitation(r: &ElicitationResult, cfg: &ElicitationConfig) -> String {
    let mut s = String::new();
    let ids = cfg.prizes.ids();
    let u: Vec<String> = ids.iter().zip(r.u.values()).map(|(id, v)| format!("{id}={v:.6}")).collect();
    let _ = writeln!(s, "u: {}", u.join(" "));
    match &r.recovery {
        Recovery::Accepted(m) => {
            let _ = writeln!(s, "ACCEPTED {}", model(m));
        }
        Recovery::Rejected { axiom, reason } => {
            let _ = writeln!(s, "REJECTED ({axiom}): {reason}");
        }
    }
    let d = &r.diagnostics;
    let _ = writeln!(s, "queries={} tail_residual={:.3e}", d.queries, d.tail_residual);
    if let Some(a) = d.verdict_agreement {
        let _ = writeln!(s, "verdict agreement {:.4}", a);
    }
    s
}

pub fn classification(c: &Classification) -> String {
    match c {
        Classification::Exponential { delta } => format!("EXPONENTIAL delta={delta:.6}\n"),
        Classification::QuasiHyperbolic { beta, delta } => format!("QUASI_HYPERBOLIC beta={beta:.6} delta={delta:.6}\n"),
        Classification::SemiHyperbolic(m) => format!("{}\n", model(m)),
        Classification::Ambiguous { candidate, reason } => match candidate {
            Some(m) => format!("AMBIGUOUS: {reason}\n  candidate {}\n", model(m)),
            None => format!("AMBIGUOUS: {reason}\n"),
        },
        Classification::None { reason } => format!("NONE: {reason}\n"),
    }
}

pub fn fit(f: &Fit, rel: &FinitePreferenceRelation, anchor: Option<&Lottery>) -> String {
    match f {
        Fit::Feasible { weights, margin } => {
            let w: Vec<String> = weights.weights().iter().map(|x| format!("{x:.6}")).collect();
            format!("FEASIBLE margin={margin:.3e}\nweights [{}]\n", w.join(", "))
        }
        Fit::Infeasible { conflict } => {
            let mut s = String::from("INFEASIBLE; conflicting verdicts:\n");
            for (i, j, v) in conflict {
                let _ = writeln!(s, "  s{i} {} s{j}", v.symbol());
                let _ = writeln!(s, "    s{i} = {}", stream_json(rel.stream(*i), anchor));
                let _ = writeln!(s, "    s{j} = {}", stream_json(rel.stream(*j), anchor));
            }
            s
        }
    }
}

pub fn generated(g: &Generated) -> String {
    let mut s = String::new();
    let target = g.target.map_or("none".to_string(), |a| a.label().to_string());
    let _ = writeln!(s, "target {target}  profile {}  n={}  anchor {}", g.profile.label(), g.n, lottery_json(&g.anchor));
    let _ = writeln!(s, "{}", shdisc::schema::representation_json(&g.rep));
    let f: Vec<&str> = g.expected_failures.iter().map(|a| a.label()).collect();
    let _ = writeln!(s, "expected failures: [{}]", f.join(", "));
    s
}
