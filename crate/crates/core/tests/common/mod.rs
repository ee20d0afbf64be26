//! Brute-force reference computations that only read the raw
//! breakpoint/segment/tail data of a function.

#![allow(dead_code)]

use relaxed_minimax::funcrep::{Segment, Tail};
use relaxed_minimax::PwlFunction;

const INF: f64 = f64::INFINITY;

fn ext(v: relaxed_minimax::ExtReal) -> f64 {
    v.to_f64()
}

/// Value, left limit and right limit at `y`.
pub fn sample(f: &PwlFunction, y: f64) -> (f64, f64, f64) {
    let bps = f.breakpoints();
    let vals = f.values();
    let segs = f.segments();
    let tail = |t: Tail, at: f64| match t {
        Tail::PosInf => INF,
        Tail::NegInf => -INF,
        Tail::Affine { slope, limit } => limit + slope * (y - at),
    };
    let seg = |i: usize| match segs[i] {
        Segment::PosInf => INF,
        Segment::NegInf => -INF,
        Segment::Affine { left, right } => {
            let (a, b) = (bps[i], bps[i + 1]);
            left + (right - left) * (y - a) / (b - a)
        }
    };
    let seg_end = |i: usize, right_end: bool| match segs[i] {
        Segment::PosInf => INF,
        Segment::NegInf => -INF,
        Segment::Affine { left, right } => {
            if right_end {
                right
            } else {
                left
            }
        }
    };
    let tail_lim = |t: Tail| match t {
        Tail::PosInf => INF,
        Tail::NegInf => -INF,
        Tail::Affine { limit, .. } => limit,
    };
    if let Some(i) = bps.iter().position(|&b| b == y) {
        let before = if i == 0 {
            tail_lim(f.left_tail())
        } else {
            seg_end(i - 1, true)
        };
        let after = if i + 1 == bps.len() {
            tail_lim(f.right_tail())
        } else {
            seg_end(i, false)
        };
        return (ext(vals[i]), before, after);
    }
    let v = if y < bps[0] {
        tail(f.left_tail(), bps[0])
    } else if y > bps[bps.len() - 1] {
        tail(f.right_tail(), bps[bps.len() - 1])
    } else {
        let i = bps.iter().rposition(|&b| b < y).unwrap();
        seg(i)
    };
    (v, v, v)
}

pub fn eval(f: &PwlFunction, y: f64) -> f64 {
    sample(f, y).0
}

/// `Σ λₖ fₖ(y)` with `+∞` absorbing, `0·(+∞) = +∞` and `0·(−∞) = 0`.
pub fn weighted(weights: &[f64], values: &[f64]) -> f64 {
    let mut pos = false;
    let mut neg = false;
    let mut total = 0.0;
    for (&w, &v) in weights.iter().zip(values) {
        if v == INF {
            pos = true;
        } else if v == -INF {
            neg |= w > 0.0;
        } else {
            total += w * v;
        }
    }
    if pos {
        INF
    } else if neg {
        -INF
    } else {
        total
    }
}

/// Uniform nodes with step `1/per_unit` on `[lo, hi]`, each paired with
/// points a hair to either side.
pub fn nodes(lo: f64, hi: f64, per_unit: usize) -> Vec<f64> {
    let n = ((hi - lo) * per_unit as f64).round() as usize;
    let h = 2f64.powi(-30);
    (0..=n)
        .flat_map(|i| {
            let y = lo + i as f64 / per_unit as f64;
            [y - h, y, y + h]
        })
        .collect()
}

/// Weight vectors of `Δₙ` whose entries are multiples of `1/m`.
pub fn simplex_grid(n: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, m: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == n {
            cur.push(left as f64 / m as f64);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k as f64 / m as f64);
            rec(n, left - k, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, m, m, &mut Vec::new(), &mut out);
    out
}

/// `inf_y max_k fₖ(y)` over `ys`.
pub fn inf_max(gens: &[PwlFunction], ys: &[f64]) -> f64 {
    ys.iter()
        .map(|&y| gens.iter().map(|g| eval(g, y)).fold(-INF, f64::max))
        .fold(INF, f64::min)
}

/// `max_λ inf_y Σ λₖ fₖ(y)` over `lambdas × ys`.
pub fn max_inf(gens: &[PwlFunction], lambdas: &[Vec<f64>], ys: &[f64]) -> f64 {
    let table: Vec<Vec<f64>> = ys.iter().map(|&y| gens.iter().map(|g| eval(g, y)).collect()).collect();
    lambdas
        .iter()
        .map(|w| table.iter().map(|row| weighted(w, row)).fold(INF, f64::min))
        .fold(-INF, f64::max)
}

/// `f*(s)` from the definition: the supremum of `s·y − f(y)` over an
/// affine piece is reached at a piece end or escapes along a tail.
pub fn conjugate_at(f: &PwlFunction, s: f64) -> f64 {
    let bps = f.breakpoints();
    let mut best = -INF;
    for &b in bps {
        let (v, l, r) = sample(f, b);
        for w in [v, l, r] {
            best = best.max(s * b - w);
        }
    }
    let escape = |t: Tail, dir: f64| match t {
        Tail::PosInf => false,
        Tail::NegInf => true,
        Tail::Affine { slope, .. } => (s - slope) * dir > 0.0,
    };
    if escape(f.left_tail(), -1.0) || escape(f.right_tail(), 1.0) {
        return INF;
    }
    if f.segments().iter().any(|s| matches!(s, Segment::NegInf)) {
        return INF;
    }
    best
}
