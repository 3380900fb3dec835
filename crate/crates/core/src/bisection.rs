//! Bisection on verdict-valued functions of a mixture weight.

use crate::error::Result;
use crate::representation::Verdict;

/// Where a verdict changes between two opposite strict verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Switch {
    /// A point judged indifferent.
    Indifferent(f64),
    /// Adjacent floats with opposite strict verdicts.
    Jump { lo: f64, hi: f64 },
}

impl Switch {
    pub fn point(self) -> f64 {
        match self {
            Switch::Indifferent(p) => p,
            Switch::Jump { lo, hi } => 0.5 * (lo + hi),
        }
    }
}

/// `f(lo) = v_lo` and `f(hi) = v_lo.flip()`, both strict. Halves the bracket
/// until a point is judged indifferent or the bracket cannot shrink.
pub fn find_switch<F>(mut lo: f64, mut hi: f64, v_lo: Verdict, mut f: F) -> Result<Switch>
where
    F: FnMut(f64) -> Result<Verdict>,
{
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(Switch::Jump { lo, hi });
        }
        match f(mid)? {
            Verdict::Indifferent => return Ok(Switch::Indifferent(mid)),
            v if v == v_lo => lo = mid,
            _ => hi = mid,
        }
    }
}

/// Boundary between a strict verdict at `outside` and indifference at
/// `inside`, located to within `tol`.
pub fn band_edge<F>(mut outside: f64, mut inside: f64, tol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<Verdict>,
{
    while (inside - outside).abs() > tol {
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            break;
        }
        if f(mid)? == Verdict::Indifferent {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (outside + inside))
}

/// Centre of the indifference band between `lo` and `hi`, where the
/// verdicts at the two ends are opposite and strict.
pub fn band_centre<F>(lo: f64, hi: f64, v_lo: Verdict, tol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<Verdict>,
{
    let sw = find_switch(lo, hi, v_lo, &mut f)?;
    let Switch::Indifferent(m) = sw else {
        return Ok(sw.point());
    };
    let left = band_edge(lo, m, tol, &mut f)?;
    let right = band_edge(hi, m, tol, &mut f)?;
    Ok(0.5 * (left + right))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(root: f64, eps: f64) -> impl FnMut(f64) -> Result<Verdict> {
        move |x| Ok(Verdict::from_difference(x - root, eps))
    }

    #[test]
    fn finds_indifference_point() {
        let sw = find_switch(0.0, 1.0, Verdict::PreferY, linear(0.37, 1e-9)).unwrap();
        match sw {
            Switch::Indifferent(p) => assert!((p - 0.37).abs() <= 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_jump_without_indifference() {
        let step = |x: f64| Ok(if x < 0.5 { Verdict::PreferY } else { Verdict::PreferX });
        match find_switch(0.0, 1.0, Verdict::PreferY, step).unwrap() {
            Switch::Jump { lo, hi } => assert!(lo < 0.5 && hi >= 0.5 && hi - lo < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn band_centre_is_accurate_with_wide_band() {
        let c = band_centre(0.0, 1.0, Verdict::PreferY, 1e-12, linear(0.6180339887, 1e-4)).unwrap();
        assert!((c - 0.6180339887).abs() < 1e-11);
    }
}
