use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{AxiomId, AxiomResult, CheckVerdict, Evidence, Testbed, Witness};
use crate::bisection::{band_centre, find_switch, Switch};
use crate::error::{Error, Result};
use crate::mixture::{mix, Lottery};
use crate::representation::Verdict;
use crate::streams::{mix_streams, place_at, replace_and_truncate, Stream};

/// Where the mixture line `x alpha z` crosses `y`, scanning `alpha` over
/// `[0, 1]`. `None` when both endpoints fall strictly on the same side.
pub fn locate_switch(ev: &dyn Evidence, x: &Stream, y: &Stream, z: &Stream) -> Result<Option<Switch>> {
    let at = |a: f64| -> Result<Verdict> {
        let m = mix_streams(x, a, z)?;
        ev.query(&m, y)?.ok_or_else(|| Error::domain("evidence has no verdict on the mixture line"))
    };
    let v0 = at(0.0)?;
    let v1 = at(1.0)?;
    match (v0, v1) {
        (Verdict::Indifferent, _) => Ok(Some(Switch::Indifferent(0.0))),
        (_, Verdict::Indifferent) => Ok(Some(Switch::Indifferent(1.0))),
        (a, b) if a == b => Ok(None),
        (a, _) => find_switch(0.0, 1.0, a, at).map(Some),
    }
}

/// Black-box premises sit at the centre of the indifference band, so the
/// constructed pair is indifferent well inside the verdict tolerance.
const CENTRE_TOL: f64 = 1e-13;

pub(crate) struct Ctx<'a> {
    ev: &'a dyn Evidence,
    tb: &'a Testbed,
    infinite: bool,
    lots: Vec<Lottery>,
    order: Vec<Vec<Option<Verdict>>>,
    /// Finite pool, or every eventually constant stream in infinite mode.
    pool: Vec<Stream>,
    /// Streams allowed as mixture operands: the finite pool, or ultimately
    /// constant and constant streams.
    anchored: Vec<Stream>,
}

fn salt(axiom: AxiomId) -> u64 {
    0x5EED_0000 + axiom as u64
}

impl<'a> Ctx<'a> {
    pub(crate) fn new(ev: &'a dyn Evidence, tb: &'a Testbed, infinite: bool) -> Result<Self> {
        let (lots, pool, anchored) = match ev.streams() {
            Some(all) => {
                let keep: Vec<Stream> = all
                    .iter()
                    .filter(|s| if infinite { !s.is_finite() } else { s.len() == Some(tb.n()) })
                    .cloned()
                    .collect();
                let mut lots: Vec<Lottery> = Vec::new();
                for s in &keep {
                    for l in s.explicit().iter().chain(s.tail()) {
                        if !lots.contains(l) {
                            lots.push(l.clone());
                        }
                    }
                }
                let anchored = keep
                    .iter()
                    .filter(|s| s.tail().is_none_or(|t| t == tb.anchor() || s.explicit().is_empty()))
                    .cloned()
                    .collect();
                (lots, keep, anchored)
            }
            None => {
                let lots = tb.lotteries();
                if infinite {
                    (lots, tb.general_pool(), tb.anchored_pool())
                } else {
                    let p = tb.finite_pool();
                    (lots, p.clone(), p)
                }
            }
        };
        let mut ctx = Ctx { ev, tb, infinite, lots, order: Vec::new(), pool, anchored };
        let consts: Vec<Stream> = ctx.lots.iter().map(|l| ctx.constant(l)).collect();
        ctx.order = consts
            .iter()
            .map(|a| consts.iter().map(|b| ev.query(a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(ctx)
    }

    fn q(&self, x: &Stream, y: &Stream) -> Result<Option<Verdict>> {
        self.ev.query(x, y)
    }

    fn constant(&self, a: &Lottery) -> Stream {
        if self.infinite {
            Stream::constant(a.clone())
        } else {
            Stream::finite(vec![a.clone(); self.tb.n()]).expect("n >= 1")
        }
    }

    fn lot_index(&self, l: &Lottery) -> Option<usize> {
        self.lots.iter().position(|m| m == l)
    }

    fn ord(&self, i: usize, j: usize) -> Option<Verdict> {
        self.order[i][j]
    }

    /// Index ranked highest (or lowest) by the induced order on lotteries.
    fn extreme(&self, best: bool) -> Option<usize> {
        let score = |i: usize| -> Option<usize> {
            let mut s = 0;
            for j in 0..self.lots.len() {
                let v = self.ord(i, j)?;
                if (best && v.weak_x()) || (!best && v != Verdict::PreferX) {
                    s += 1;
                }
            }
            Some(s)
        };
        let mut top: Option<(usize, usize)> = None;
        for i in 0..self.lots.len() {
            let s = score(i)?;
            if top.is_none_or(|(_, b)| s > b) {
                top = Some((i, s));
            }
        }
        top.map(|(i, _)| i)
    }

    fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.lots.len() {
            for j in 0..self.lots.len() {
                if self.ord(i, j) == Some(Verdict::PreferX) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn finish(&self, axiom: AxiomId, cases: u64) -> AxiomResult {
        if cases == 0 && self.ev.is_tabular() {
            AxiomResult::not_applicable(axiom, "the relation covers no case of this axiom")
        } else {
            AxiomResult::pass(axiom, cases)
        }
    }

    fn pick<'s>(&self, rng: &mut ChaCha8Rng, from: &'s [Stream]) -> &'s Stream {
        &from[rng.gen_range(0..from.len())]
    }

    pub(crate) fn run(&self, axiom: AxiomId, t: usize) -> Result<AxiomResult> {
        use AxiomId::*;
        if t == 0 {
            return Err(Error::argument("bias horizon T must be at least 1"));
        }
        if self.pool.is_empty() {
            return Ok(AxiomResult::not_applicable(axiom, "no streams of the required shape"));
        }
        match axiom {
            F1 | I1 => self.weak_order(axiom),
            F2 => self.nontriviality(axiom),
            I2 => self.interiority(axiom),
            F2p | I2p => self.essentiality(axiom, 1),
            F2pp | I2pp => self.essentiality(axiom, t),
            F3 | I3 => self.independence(axiom),
            F4 | I4 => self.continuity(axiom),
            F5 | I5 => self.monotonicity(axiom),
            F6 => self.impatience(axiom, 1),
            F6p => self.impatience(axiom, t),
            F7 | I7 => self.stationarity(axiom, 1),
            F7p | I7p => self.stationarity(axiom, t),
            F8 | I8 => self.early_bias(axiom, t),
            I6 => self.convergence(axiom),
        }
    }

    pub(crate) fn require_interior_anchor(&self) -> Result<()> {
        if self.ev.is_tabular() {
            return Ok(());
        }
        let r = self.interiority(AxiomId::I2)?;
        if r.verdict.is_failure() {
            return Err(Error::AnchorNotInterior(r.note.unwrap_or_default()));
        }
        Ok(())
    }

    fn weak_order(&self, axiom: AxiomId) -> Result<AxiomResult> {
        let s = &self.pool;
        let k = s.len();
        let m = s
            .iter()
            .map(|x| s.iter().map(|y| self.q(x, y)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        for i in 0..k {
            for j in 0..k {
                if m[i][j].is_none() {
                    let w = Witness {
                        streams: vec![s[i].clone(), s[j].clone()],
                        comparisons: Vec::new(),
                        lambda: None,
                        periods: Vec::new(),
                        note: "completeness: no verdict for the first stream against the second".into(),
                    };
                    return Ok(AxiomResult::fail(axiom, (k * k) as u64, w));
                }
            }
        }
        let v = |i: usize, j: usize| m[i][j].expect("checked complete");
        for i in 0..k {
            if v(i, i) != Verdict::Indifferent {
                let w = Witness::from_pairs(vec![(s[i].clone(), s[i].clone(), v(i, i))], "reflexivity fails");
                return Ok(AxiomResult::fail(axiom, (k * k) as u64, w));
            }
            for j in 0..k {
                if v(i, j) != v(j, i).flip() {
                    let w = Witness::from_pairs(
                        vec![(s[i].clone(), s[j].clone(), v(i, j)), (s[j].clone(), s[i].clone(), v(j, i))],
                        "the two directions of one comparison disagree",
                    );
                    return Ok(AxiomResult::fail(axiom, (k * k) as u64, w));
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                if !v(i, j).weak_x() {
                    continue;
                }
                for l in 0..k {
                    if v(j, l).weak_x() && !v(i, l).weak_x() {
                        let w = Witness::from_pairs(
                            vec![
                                (s[i].clone(), s[j].clone(), v(i, j)),
                                (s[j].clone(), s[l].clone(), v(j, l)),
                                (s[i].clone(), s[l].clone(), v(i, l)),
                            ],
                            "transitivity fails on this triple",
                        );
                        return Ok(AxiomResult::fail(axiom, (k * k * k) as u64, w));
                    }
                }
            }
        }
        Ok(AxiomResult::pass(axiom, (k * k * k) as u64))
    }

    fn nontriviality(&self, axiom: AxiomId) -> Result<AxiomResult> {
        let mut cases = 0;
        let mut last = None;
        for i in 0..self.lots.len() {
            for j in 0..self.lots.len() {
                if let Some(v) = self.ord(i, j) {
                    cases += 1;
                    if v == Verdict::PreferX {
                        return Ok(AxiomResult::pass(axiom, cases));
                    }
                    if i != j {
                        last = Some((i, j, v));
                    }
                }
            }
        }
        match last {
            Some((i, j, v)) => {
                let w = Witness::from_pairs(
                    vec![(self.constant(&self.lots[i]), self.constant(&self.lots[j]), v)],
                    "no constant stream is strictly preferred to another",
                );
                Ok(AxiomResult::fail(axiom, cases, w))
            }
            None => Ok(self.finish(axiom, 0)),
        }
    }

    fn interiority(&self, axiom: AxiomId) -> Result<AxiomResult> {
        let anchor = self.tb.anchor();
        let Some(z) = self.lot_index(anchor) else {
            return Ok(AxiomResult::not_applicable(axiom, "the anchor does not occur in the evidence"));
        };
        let n = self.lots.len();
        let above = (0..n).find(|&i| self.ord(i, z) == Some(Verdict::PreferX));
        let below = (0..n).find(|&i| self.ord(z, i) == Some(Verdict::PreferX));
        let cases = 2 * n as u64;
        if above.is_some() && below.is_some() {
            return Ok(AxiomResult::pass(axiom, cases));
        }
        let (probe, note) = if above.is_none() {
            (self.extreme(true), "no lottery is strictly preferred to the anchor")
        } else {
            (self.extreme(false), "no lottery is strictly worse than the anchor")
        };
        let Some(p) = probe.filter(|&p| self.ord(p, z).is_some()) else {
            return Ok(self.finish(axiom, 0));
        };
        let w = Witness::from_pairs(
            vec![(self.constant(&self.lots[p]), self.constant(anchor), self.ord(p, z).expect("filtered"))],
            note,
        );
        Ok(AxiomResult::fail(axiom, cases, w).noted(note))
    }

    /// A common pair `a > b` that is strictly preferred in every period
    /// `1..=upto` of one context (finite), or around the anchor (infinite).
    fn essentiality(&self, axiom: AxiomId, upto: usize) -> Result<AxiomResult> {
        if !self.infinite && upto > self.tb.n() {
            return Ok(AxiomResult::not_applicable(
                axiom,
                format!("T = {upto} exceeds the stream length {}", self.tb.n()),
            ));
        }
        let mut pairs = self.strict_pairs();
        if let (Some(b), Some(w)) = (self.extreme(true), self.extreme(false)) {
            pairs.retain(|p| *p != (b, w));
            pairs.insert(0, (b, w));
        }
        if pairs.is_empty() {
            let l = self.lots.len();
            pairs = (0..l).flat_map(|i| (0..l).filter(move |j| *j != i).map(move |j| (i, j))).collect();
        }
        let contexts: Vec<Stream> = if self.infinite {
            vec![Stream::constant(self.tb.anchor().clone())]
        } else {
            self.pool.iter().take(8).cloned().collect()
        };
        let anchor = Stream::constant(self.tb.anchor().clone());
        let mut cases = 0u64;
        let mut essential = vec![false; upto];
        let mut first_failure: Option<(Stream, Stream, Verdict, usize)> = None;
        for &(ai, bi) in &pairs {
            let (a, b) = (&self.lots[ai], &self.lots[bi]);
            for ctx in &contexts {
                let mut all = true;
                for t in 1..=upto {
                    let ok;
                    if self.infinite {
                        let (pa, pb) = (place_at(a, t, self.tb.anchor())?, place_at(b, t, self.tb.anchor())?);
                        let (Some(v1), Some(v2)) = (self.q(&pa, &anchor)?, self.q(&anchor, &pb)?) else {
                            all = false;
                            continue;
                        };
                        cases += 1;
                        ok = v1 == Verdict::PreferX && v2 == Verdict::PreferX;
                        if !ok && first_failure.is_none() {
                            let (x, y, v) = if v1 != Verdict::PreferX { (pa, anchor.clone(), v1) } else { (anchor.clone(), pb, v2) };
                            first_failure = Some((x, y, v, t));
                        }
                    } else {
                        let (xa, xb) = (ctx.set_at(t, a)?, ctx.set_at(t, b)?);
                        let Some(v) = self.q(&xa, &xb)? else {
                            all = false;
                            continue;
                        };
                        cases += 1;
                        ok = v == Verdict::PreferX;
                        if !ok && first_failure.is_none() {
                            first_failure = Some((xa, xb, v, t));
                        }
                    }
                    essential[t - 1] |= ok;
                    all &= ok;
                }
                if all {
                    return Ok(AxiomResult::pass(axiom, cases));
                }
            }
        }
        let Some((x, y, v, t)) = first_failure else {
            return Ok(self.finish(axiom, cases));
        };
        let dead: Vec<usize> = (1..=upto).filter(|t| !essential[t - 1]).collect();
        let note = if dead.is_empty() {
            format!("every period 1..={upto} is essential on its own, but no single pair works for all of them")
        } else {
            format!("no strict pair found in period(s) {dead:?}")
        };
        let w = Witness::from_pairs(vec![(x, y, v)], note.clone()).with_periods(vec![t]);
        Ok(AxiomResult::fail(axiom, cases, w).noted(note))
    }

    fn independence(&self, axiom: AxiomId) -> Result<AxiomResult> {
        let mut rng = self.tb.rng(salt(axiom));
        let lams = self.tb.interior_grid();
        if lams.is_empty() {
            return Ok(AxiomResult::not_applicable(axiom, "the grid has no interior point"));
        }
        let rounds = if self.ev.is_tabular() { 8 * self.tb.samples() } else { self.tb.samples() };
        let s = &self.anchored;
        let mut cases = 0;
        for _ in 0..rounds {
            let (x, y, z) = (self.pick(&mut rng, s), self.pick(&mut rng, s), self.pick(&mut rng, s));
            let Some(v1) = self.q(x, y)? else { continue };
            for &lam in &lams {
                let (xm, ym) = (mix_streams(x, lam, z)?, mix_streams(y, lam, z)?);
                let Some(v2) = self.q(&xm, &ym)? else { continue };
                cases += 1;
                if v1 != v2 {
                    let w = Witness::from_pairs(
                        vec![(x.clone(), y.clone(), v1), (xm, ym, v2)],
                        "mixing both sides with a common stream changes the verdict",
                    )
                    .with_lambda(lam);
                    return Ok(AxiomResult::fail(axiom, cases, w));
                }
            }
        }
        Ok(self.finish(axiom, cases))
    }

    fn continuity(&self, axiom: AxiomId) -> Result<AxiomResult> {
        if self.ev.is_tabular() {
            return Ok(AxiomResult::not_applicable(axiom, "continuity needs an oracle to bisect"));
        }
        let mut rng = self.tb.rng(salt(axiom));
        let grid = self.tb.grid().to_vec();
        let mut cases = 0;
        for _ in 0..(self.tb.samples() / 2).max(1) {
            let x = self.pick(&mut rng, &self.anchored).clone();
            let z = self.pick(&mut rng, &self.anchored).clone();
            let y = self.pick(&mut rng, &self.pool).clone();
            cases += 1;
            let at = |a: f64| -> Result<(Stream, Verdict)> {
                let m = mix_streams(&x, a, &z)?;
                let v = self.q(&m, &y)?.expect("oracle answers every query");
                Ok((m, v))
            };
            let scan = grid.iter().map(|&g| at(g).map(|(m, v)| (g, m, v))).collect::<Result<Vec<_>>>()?;
            let strict: Vec<&(f64, Stream, Verdict)> = scan.iter().filter(|(_, _, v)| *v != Verdict::Indifferent).collect();
            let flips: Vec<usize> = (1..strict.len()).filter(|&i| strict[i].2 != strict[i - 1].2).collect();
            if flips.len() > 1 {
                let (p, q, r) = (strict[flips[0] - 1], strict[flips[0]], strict[flips[1]]);
                let w = Witness::from_pairs(
                    vec![
                        (p.1.clone(), y.clone(), p.2),
                        (q.1.clone(), y.clone(), q.2),
                        (r.1.clone(), y.clone(), r.2),
                    ],
                    format!("preference switches more than once along the mixture line (alpha = {}, {}, {})", p.0, q.0, r.0),
                )
                .with_lambda(q.0);
                return Ok(AxiomResult::fail(axiom, cases, w));
            }
            for pair in scan.windows(2) {
                let ((g0, _, v0), (g1, _, v1)) = (&pair[0], &pair[1]);
                if *v0 == Verdict::Indifferent || *v1 == Verdict::Indifferent || v0 == v1 {
                    continue;
                }
                let sw = find_switch(*g0, *g1, *v0, |a| at(a).map(|(_, v)| v))?;
                if let Switch::Jump { lo, hi } = sw {
                    let (mlo, vlo) = at(lo)?;
                    let (mhi, vhi) = at(hi)?;
                    let w = Witness::from_pairs(
                        vec![(mlo, y.clone(), vlo), (mhi, y.clone(), vhi)],
                        format!("verdict jumps between alpha = {lo} and alpha = {hi} with no indifference point"),
                    )
                    .with_lambda(lo);
                    return Ok(AxiomResult::fail(axiom, cases, w));
                }
            }
        }
        let r = AxiomResult::pass(axiom, cases);
        Ok(if self.infinite {
            r.noted("the compared stream ranges over eventually constant streams only")
        } else {
            r
        })
    }

    fn monotonicity(&self, axiom: AxiomId) -> Result<AxiomResult> {
        let mut cases = 0;
        let dominance = |y: &Stream, x: Stream, a: usize, b: usize, t: usize, cases: u64| -> Result<Option<AxiomResult>> {
            let Some(v) = self.q(&x, y)? else { return Ok(None) };
            if v != Verdict::PreferY {
                return Ok(None);
            }
            let dom = self.ord(a, b).expect("dominance known");
            let w = Witness::from_pairs(
                vec![
                    (x, y.clone(), v),
                    (self.constant(&self.lots[a]), self.constant(&self.lots[b]), dom),
                ],
                format!("improving period {t} makes the stream worse"),
            )
            .with_periods(vec![t]);
            Ok(Some(AxiomResult::fail(axiom, cases, w)))
        };
        for y in &self.pool {
            let span = if self.infinite { (y.explicit().len() + 1).min(self.tb.n().max(1)) } else { self.tb.n() };
            for t in 1..=span {
                let Some(b) = self.lot_index(y.at(t)?) else { continue };
                for a in 0..self.lots.len() {
                    if a == b || !self.ord(a, b).is_some_and(Verdict::weak_x) {
                        continue;
                    }
                    let x = y.set_at(t, &self.lots[a])?;
                    cases += 1;
                    if let Some(r) = dominance(y, x, a, b, t, cases)? {
                        return Ok(r);
                    }
                }
            }
            if let Some(tail) = y.tail().filter(|_| !y.explicit().is_empty()) {
                let Some(b) = self.lot_index(tail) else { continue };
                for a in 0..self.lots.len() {
                    if a == b || !self.ord(a, b).is_some_and(Verdict::weak_x) {
                        continue;
                    }
                    let x = Stream::infinite(y.explicit().to_vec(), self.lots[a].clone())?;
                    cases += 1;
                    if let Some(r) = dominance(y, x, a, b, y.explicit().len() + 1, cases)? {
                        return Ok(r);
                    }
                }
            }
        }
        // Simultaneous improvements in every period.
        let mut rng = self.tb.rng(salt(axiom));
        for _ in 0..self.tb.samples() {
            let y = self.pick(&mut rng, &self.pool);
            let mut x = y.clone();
            let span = if self.infinite { y.explicit().len() } else { self.tb.n() };
            for t in 1..=span {
                let Some(b) = self.lot_index(y.at(t)?) else { continue };
                let better: Vec<usize> =
                    (0..self.lots.len()).filter(|&a| self.ord(a, b).is_some_and(Verdict::weak_x)).collect();
                if !better.is_empty() {
                    x = x.set_at(t, &self.lots[better[rng.gen_range(0..better.len())]])?;
                }
            }
            let Some(v) = self.q(&x, y)? else { continue };
            cases += 1;
            if v == Verdict::PreferY {
                let w = Witness::from_pairs(
                    vec![(x, y.clone(), v)],
                    "a stream that is weakly better in every period is strictly worse",
                );
                return Ok(AxiomResult::fail(axiom, cases, w));
            }
        }
        Ok(self.finish(axiom, cases))
    }

    /// `(.., a, b, ..) > (.., b, a, ..)` with `a > b` at periods `p, p + 1`.
    fn impatience(&self, axiom: AxiomId, p: usize) -> Result<AxiomResult> {
        let n = self.tb.n();
        if n < p + 1 {
            return Ok(AxiomResult::not_applicable(axiom, format!("periods {p} and {} need n >= {}", p + 1, p + 1)));
        }
        let mut rng = self.tb.rng(salt(axiom));
        let contexts: Vec<Stream> = (0..4).map(|_| self.pick(&mut rng, &self.pool).clone()).collect();
        let mut cases = 0;
        for (ai, bi) in self.strict_pairs() {
            let (a, b) = (&self.lots[ai], &self.lots[bi]);
            for ctx in &contexts {
                let x1 = ctx.set_at(p, a)?.set_at(p + 1, b)?;
                let x2 = ctx.set_at(p, b)?.set_at(p + 1, a)?;
                let Some(v) = self.q(&x1, &x2)? else { continue };
                cases += 1;
                if v != Verdict::PreferX {
                    let w = Witness::from_pairs(
                        vec![(x1, x2, v), (self.constant(a), self.constant(b), Verdict::PreferX)],
                        format!("the better lottery first at periods ({p}, {}) is not strictly preferred", p + 1),
                    )
                    .with_periods(vec![p, p + 1]);
                    return Ok(AxiomResult::fail(axiom, cases, w));
                }
            }
        }
        Ok(self.finish(axiom, cases))
    }

    /// Streams agreeing with `x` before `t`, holding `a` at `t`, and
    /// following `y` after `t`.
    fn splice(&self, x: &Stream, y: &Stream, t: usize, a: &Lottery) -> Result<Stream> {
        let pick = |s: usize| -> Result<Lottery> {
            Ok(if s < t {
                x.at(s)?.clone()
            } else if s == t {
                a.clone()
            } else {
                y.at(s)?.clone()
            })
        };
        if self.infinite {
            let k = x.explicit().len().max(y.explicit().len()).max(t);
            let p = (1..=k).map(pick).collect::<Result<Vec<_>>>()?;
            Stream::infinite(p, y.tail().expect("infinite").clone())
        } else {
            let p = (1..=self.tb.n()).map(pick).collect::<Result<Vec<_>>>()?;
            Stream::finite(p)
        }
    }

    /// Make `base` with `(a, b)` at periods `(i, j)` indifferent to `base`
    /// with `(c, d)` there, where `a` is `a0` pulled towards `c` and `b` lies
    /// on the segment from `d` down to `low`.
    #[allow(clippy::too_many_arguments)]
    fn balance(
        &self,
        base: &Stream,
        i: usize,
        j: usize,
        a0: &Lottery,
        c: &Lottery,
        d: &Lottery,
        low: &Lottery,
    ) -> Result<Option<(Stream, Stream, Lottery, Lottery)>> {
        let rhs = base.set_at(i, c)?.set_at(j, d)?;
        if let Some(rep) = self.ev.backing() {
            let (wi, wj) = (rep.weight(i), rep.weight(j));
            let (ua0, uc, ud, ul) = (rep.utility(a0)?, rep.utility(c)?, rep.utility(d)?, rep.utility(low)?);
            let (gap_a, gap_d) = (ua0 - uc, ud - ul);
            if !(wi > 0.0 && wj > 0.0 && gap_a > 0.0 && gap_d > 0.0) {
                return Ok(None);
            }
            let kappa = (0.5 * gap_d * wj / (wi * gap_a)).min(1.0);
            let a = mix(a0, kappa, c)?;
            let ub = ud - wi / wj * (rep.utility(&a)? - uc);
            let mu = ((ub - ul) / gap_d).clamp(0.0, 1.0);
            let b = mix(d, mu, low)?;
            let lhs = base.set_at(i, &a)?.set_at(j, &b)?;
            return Ok(match self.q(&lhs, &rhs)? {
                Some(Verdict::Indifferent) => Some((lhs, rhs, a, b)),
                _ => None,
            });
        }
        for kappa in [1.0, 0.5, 0.25, 0.125, 0.0625] {
            let a = mix(a0, kappa, c)?;
            let at = |mu: f64| -> Result<Verdict> {
                let lhs = base.set_at(i, &a)?.set_at(j, &mix(d, mu, low)?)?;
                self.q(&lhs, &rhs)?.ok_or_else(|| Error::domain("missing verdict"))
            };
            if at(1.0)? != Verdict::PreferX {
                return Ok(None);
            }
            let mu = match at(0.0)? {
                Verdict::PreferX => continue,
                Verdict::Indifferent => return Ok(None),
                Verdict::PreferY => band_centre(0.0, 1.0, Verdict::PreferY, CENTRE_TOL, at)?,
            };
            let b = mix(d, mu, low)?;
            let lhs = base.set_at(i, &a)?.set_at(j, &b)?;
            return Ok((self.q(&lhs, &rhs)? == Some(Verdict::Indifferent)).then_some((lhs, rhs, a, b)));
        }
        Ok(None)
    }

    fn stationarity(&self, axiom: AxiomId, t: usize) -> Result<AxiomResult> {
        if !self.infinite && self.tb.n() < t + 1 {
            return Ok(AxiomResult::not_applicable(
                axiom,
                format!("n = {} leaves no period after the pivot {t}", self.tb.n()),
            ));
        }
        let mut rng = self.tb.rng(salt(axiom));
        let mut cases = 0;
        let fail = |pairs: Vec<(Stream, Stream, Verdict)>, cases: u64| {
            let w = Witness::from_pairs(pairs, format!("dropping the common period {t} changes the verdict"))
                .with_periods(vec![t]);
            AxiomResult::fail(axiom, cases, w)
        };
        let check = |x1: Stream, y1: Stream, cases: &mut u64| -> Result<Option<Vec<(Stream, Stream, Verdict)>>> {
            let Some(v1) = self.q(&x1, &y1)? else { return Ok(None) };
            let (x2, y2) = (x1.advance_from(t)?, y1.advance_from(t)?);
            let Some(v2) = self.q(&x2, &y2)? else { return Ok(None) };
            *cases += 1;
            Ok((v1 != v2).then(|| vec![(x1, y1, v1), (x2, y2, v2)]))
        };
        // Pairs balanced on the two periods after the pivot.
        let low = if self.ev.backing().is_some() {
            let rep = self.ev.backing().expect("checked");
            Some(Lottery::degenerate(self.tb.prizes(), rep.u().extremes().1)?)
        } else {
            self.extreme(false).map(|w| self.lots[w].clone())
        };
        let room = self.infinite || self.tb.n() >= t + 2;
        if let (Some(low), true) = (low, room) {
            let strict = self.strict_pairs();
            let above_low: Vec<usize> = (0..self.lots.len())
                .filter(|&d| self.lot_index(&low).is_some_and(|l| self.ord(d, l) == Some(Verdict::PreferX)))
                .collect();
            if !strict.is_empty() && !above_low.is_empty() {
                for _ in 0..(self.tb.samples() / 2).max(1) {
                    let (ai, ci) = strict[rng.gen_range(0..strict.len())];
                    let di = above_low[rng.gen_range(0..above_low.len())];
                    let pivot = &self.lots[rng.gen_range(0..self.lots.len())];
                    let base = self.pick(&mut rng, &self.pool).set_at(t, pivot)?;
                    let Some((x1, y1, _, _)) =
                        self.balance(&base, t + 1, t + 2, &self.lots[ai], &self.lots[ci], &self.lots[di], &low)?
                    else {
                        continue;
                    };
                    if let Some(p) = check(x1, y1, &mut cases)? {
                        return Ok(fail(p, cases));
                    }
                }
            }
        }
        for _ in 0..self.tb.samples() {
            let x = self.pick(&mut rng, &self.pool);
            let y = self.pick(&mut rng, &self.pool);
            let a = &self.lots[rng.gen_range(0..self.lots.len())];
            let x1 = x.set_at(t, a)?;
            let y1 = self.splice(x, y, t, a)?;
            if let Some(p) = check(x1, y1, &mut cases)? {
                return Ok(fail(p, cases));
            }
        }
        Ok(self.finish(axiom, cases))
    }

    fn early_bias(&self, axiom: AxiomId, t_max: usize) -> Result<AxiomResult> {
        let last = if self.infinite { t_max } else { t_max.min(self.tb.n().saturating_sub(1)) };
        if last < 2 {
            return Ok(AxiomResult::not_applicable(
                axiom,
                "needs a pair of periods (t, t + 1) with 2 <= t <= T inside the stream",
            ));
        }
        let low = match self.ev.backing() {
            Some(rep) => Some(Lottery::degenerate(self.tb.prizes(), rep.u().extremes().1)?),
            None => self.extreme(false).map(|w| self.lots[w].clone()),
        };
        let Some(low) = low else {
            return Ok(self.finish(axiom, 0));
        };
        let strict = self.strict_pairs();
        let above_low: Vec<usize> = (0..self.lots.len())
            .filter(|&d| self.lot_index(&low).is_some_and(|l| self.ord(d, l) == Some(Verdict::PreferX)))
            .collect();
        if strict.is_empty() || above_low.is_empty() {
            return Ok(self.finish(axiom, 0));
        }
        let mut rng = self.tb.rng(salt(axiom));
        let mut cases = 0;
        for t in 2..=last {
            for _ in 0..self.tb.samples() {
                let (ai, ci) = strict[rng.gen_range(0..strict.len())];
                let di = above_low[rng.gen_range(0..above_low.len())];
                let base = self.pick(&mut rng, &self.pool).clone();
                let (c, d) = (&self.lots[ci], &self.lots[di]);
                let Some((p1, p2, a, b)) = self.balance(&base, t, t + 1, &self.lots[ai], c, d, &low)? else {
                    continue;
                };
                let better = self.q(&self.constant(&a), &self.constant(c))?;
                let worse = self.q(&self.constant(&b), &self.constant(d))?;
                if better != Some(Verdict::PreferX) || worse != Some(Verdict::PreferY) {
                    continue;
                }
                let (c1, c2) = (p1.advance_from(t - 1)?, p2.advance_from(t - 1)?);
                let Some(v) = self.q(&c1, &c2)? else { continue };
                cases += 1;
                if v == Verdict::PreferY {
                    let w = Witness::from_pairs(
                        vec![(p1, p2, Verdict::Indifferent), (c1, c2, v)],
                        format!("indifferent at periods ({t}, {}) but the pair moved one period earlier is worse", t + 1),
                    )
                    .with_periods(vec![t]);
                    return Ok(AxiomResult::fail(axiom, cases, w));
                }
            }
        }
        Ok(self.finish(axiom, cases))
    }

    fn convergence(&self, axiom: AxiomId) -> Result<AxiomResult> {
        let (Some(bi), Some(wi)) = (self.extreme(true), self.extreme(false)) else {
            return Ok(self.finish(axiom, 0));
        };
        let h = self.tb.horizon_cap();
        let anchor = self.tb.anchor();
        let mut cases = 0;
        let mut worst_threshold = 0;
        for x in &self.pool {
            let anchored_tail = x.tail() == Some(anchor);
            let kmax = self.tb.n().min(x.explicit().len().max(1) + 1);
            for k in 1..=kmax {
                let xk = x.at(k)?;
                for (ext, improve) in [(bi, true), (wi, false)] {
                    let e = &self.lots[ext];
                    let want = if improve { Verdict::PreferX } else { Verdict::PreferY };
                    let (pe, pk) = (place_at(e, k, anchor)?, place_at(xk, k, anchor)?);
                    if self.q(&pe, &pk)? != Some(want) {
                        continue;
                    }
                    // x <= x+_{k,T} (improve) or x >= x-_{k,T}.
                    let holds = |tt: usize| -> Result<Option<(Stream, Verdict, bool)>> {
                        let xt = replace_and_truncate(x, k, e, tt, anchor)?;
                        let Some(v) = self.q(x, &xt)? else { return Ok(None) };
                        let ok = if improve { v != Verdict::PreferX } else { v != Verdict::PreferY };
                        Ok(Some((xt, v, ok)))
                    };
                    let Some((xh, vh, ok)) = holds(h)? else { continue };
                    cases += 1;
                    if !ok {
                        let w = Witness::from_pairs(
                            vec![(x.clone(), xh, vh), (pe, pk, want)],
                            format!(
                                "replacing period {k} and truncating at the horizon cap {h} still reverses the verdict"
                            ),
                        )
                        .with_periods(vec![k, h]);
                        return Ok(AxiomResult {
                            axiom,
                            verdict: CheckVerdict::FailAtHorizon,
                            witness: Some(w),
                            cases_checked: cases,
                            note: Some(format!("no threshold found up to T = {h}")),
                        });
                    }
                    // The smallest T from which the relation holds through H.
                    let floor = if anchored_tail { k.max(x.explicit().len()) } else { h };
                    let mut threshold = k.max(floor.min(h));
                    let mut tt = threshold;
                    while tt > k {
                        tt -= 1;
                        match holds(tt)? {
                            Some((_, _, true)) => threshold = tt,
                            _ => break,
                        }
                    }
                    if !anchored_tail {
                        threshold = {
                            let mut th = h;
                            let mut s = h;
                            while s > k {
                                s -= 1;
                                match holds(s)? {
                                    Some((_, _, true)) => th = s,
                                    _ => break,
                                }
                            }
                            th
                        };
                    }
                    worst_threshold = worst_threshold.max(threshold);
                }
            }
        }
        let r = self.finish(axiom, cases);
        Ok(if r.verdict == CheckVerdict::Pass {
            r.noted(format!("holds up to the horizon cap {h}; largest threshold found: {worst_threshold}"))
        } else {
            r
        })
    }
}
