use serde::{Deserialize, Serialize};

use super::pwl::{dedupe_sorted, merge_breakpoints, Element, Interval, Piece, PwlFunction, Segment, Tail, MERGE_TOL};
use crate::error::{Error, Result};
use crate::extreal::{ExtReal, NonNegative, DEFAULT_TOL};

/// Tail slopes at most this large in magnitude count as flat.
pub const SLOPE_EPS: f64 = 1e-12;

/// Linear data carried by a segment (`left`, `right` limits) or a tail
/// (`slope`, `limit`). Both pairs transform linearly under scaling and sums.
#[derive(Clone, Copy, Debug)]
enum Val {
    PosInf,
    NegInf,
    Lin(f64, f64),
}

impl Val {
    fn of_segment(s: Segment) -> Val {
        match s {
            Segment::PosInf => Val::PosInf,
            Segment::NegInf => Val::NegInf,
            Segment::Affine { left, right } => Val::Lin(left, right),
        }
    }

    fn of_tail(t: Tail) -> Val {
        match t {
            Tail::PosInf => Val::PosInf,
            Tail::NegInf => Val::NegInf,
            Tail::Affine { slope, limit } => Val::Lin(slope, limit),
        }
    }

    fn segment(self) -> Segment {
        match self {
            Val::PosInf => Segment::PosInf,
            Val::NegInf => Segment::NegInf,
            Val::Lin(left, right) => Segment::Affine { left, right },
        }
    }

    fn tail(self) -> Tail {
        match self {
            Val::PosInf => Tail::PosInf,
            Val::NegInf => Tail::NegInf,
            Val::Lin(slope, limit) => Tail::Affine { slope, limit },
        }
    }

    fn scale(self, t: f64) -> Val {
        match self {
            Val::PosInf => Val::PosInf,
            Val::NegInf if t == 0.0 => Val::Lin(0.0, 0.0),
            Val::NegInf => Val::NegInf,
            Val::Lin(a, b) => Val::Lin(t * a, t * b),
        }
    }

    fn add(self, other: Val) -> Val {
        match (self, other) {
            (Val::PosInf, _) | (_, Val::PosInf) => Val::PosInf,
            (Val::NegInf, _) | (_, Val::NegInf) => Val::NegInf,
            (Val::Lin(a, b), Val::Lin(c, d)) => Val::Lin(a + c, b + d),
        }
    }
}

/// `Σ λₖ fₖ` under the extended-real conventions, on the merged breakpoints.
pub fn weighted_sum(weights: &[f64], funcs: &[PwlFunction]) -> Result<PwlFunction> {
    if weights.len() != funcs.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: funcs.len(),
        });
    }
    if funcs.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let ts = weights
        .iter()
        .map(|&w| NonNegative::new(w))
        .collect::<Result<Vec<_>>>()?;
    let grid = merge_breakpoints(funcs);
    let parts: Vec<PwlFunction> = funcs.iter().map(|f| f.refine(&grid)).collect();
    let values = (0..grid.len())
        .map(|i| parts.iter().zip(&ts).map(|(f, t)| f.values[i].scale(*t)).sum())
        .collect();
    let fold = |pick: &dyn Fn(&PwlFunction) -> Val| {
        parts
            .iter()
            .zip(&ts)
            .map(|(f, t)| pick(f).scale(t.get()))
            .reduce(Val::add)
            .expect("nonempty family")
    };
    let segments = (0..grid.len() - 1)
        .map(|i| fold(&|f| Val::of_segment(f.segments[i])).segment())
        .collect();
    let left = fold(&|f| Val::of_tail(f.left)).tail();
    let right = fold(&|f| Val::of_tail(f.right)).tail();
    Ok(PwlFunction {
        breakpoints: grid,
        values,
        segments,
        left,
        right,
    })
}

/// `f + g` under the extended-real conventions.
pub fn sum(f: &PwlFunction, g: &PwlFunction) -> PwlFunction {
    weighted_sum(&[1.0, 1.0], &[f.clone(), g.clone()]).expect("unit weights")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Max,
    Min,
}

pub fn pointwise_max(funcs: &[PwlFunction]) -> Result<PwlFunction> {
    pointwise(funcs, Extremum::Max)
}

pub fn pointwise_min(funcs: &[PwlFunction]) -> Result<PwlFunction> {
    pointwise(funcs, Extremum::Min)
}

fn pointwise(funcs: &[PwlFunction], which: Extremum) -> Result<PwlFunction> {
    if funcs.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let grid = crossing_grid(funcs);
    let parts: Vec<PwlFunction> = funcs.iter().map(|f| f.refine(&grid)).collect();
    let pick = |a: ExtReal, b: ExtReal| match which {
        Extremum::Max => a.max(b),
        Extremum::Min => a.min(b),
    };
    let values = (0..grid.len())
        .map(|i| parts.iter().map(|f| f.values[i]).reduce(pick).unwrap())
        .collect();
    let segments = (0..grid.len() - 1)
        .map(|i| combine_segments(parts.iter().map(|f| f.segments[i]), which))
        .collect();
    let left = combine_tails(parts.iter().map(|f| f.left), which, -1.0);
    let right = combine_tails(parts.iter().map(|f| f.right), which, 1.0);
    Ok(PwlFunction {
        breakpoints: grid,
        values,
        segments,
        left,
        right,
    })
}

fn combine_segments(segs: impl Iterator<Item = Segment>, which: Extremum) -> Segment {
    let (absorbing, neutral) = match which {
        Extremum::Max => (Segment::PosInf, Segment::NegInf),
        Extremum::Min => (Segment::NegInf, Segment::PosInf),
    };
    let mut acc: Option<(f64, f64)> = None;
    for s in segs {
        match s {
            Segment::Affine { left, right } => {
                acc = Some(match (acc, which) {
                    (None, _) => (left, right),
                    (Some((l, r)), Extremum::Max) => (l.max(left), r.max(right)),
                    (Some((l, r)), Extremum::Min) => (l.min(left), r.min(right)),
                })
            }
            s if s == absorbing => return absorbing,
            _ => {}
        }
    }
    acc.map_or(neutral, |(left, right)| Segment::Affine { left, right })
}

/// `dir` is −1 for the left tail and +1 for the right one.
fn combine_tails(tails: impl Iterator<Item = Tail>, which: Extremum, dir: f64) -> Tail {
    let (absorbing, neutral) = match which {
        Extremum::Max => (Tail::PosInf, Tail::NegInf),
        Extremum::Min => (Tail::NegInf, Tail::PosInf),
    };
    let mut best: Option<(f64, f64)> = None;
    for t in tails {
        match t {
            Tail::Affine { slope, limit } => {
                let better = match best {
                    None => true,
                    Some((s0, l0)) => {
                        // grids are crossing-free, so one unit out decides
                        let here = limit + dir * slope;
                        let there = l0 + dir * s0;
                        match which {
                            Extremum::Max => here > there,
                            Extremum::Min => here < there,
                        }
                    }
                };
                if better {
                    best = Some((slope, limit));
                }
            }
            t if t == absorbing => return absorbing,
            _ => {}
        }
    }
    best.map_or(neutral, |(slope, limit)| Tail::Affine { slope, limit })
}

/// Merged breakpoints plus every point where two affine pieces cross.
fn crossing_grid(funcs: &[PwlFunction]) -> Vec<f64> {
    let mut grid = merge_breakpoints(funcs);
    let parts: Vec<PwlFunction> = funcs.iter().map(|f| f.refine(&grid)).collect();
    let mut extra = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let lines: Vec<(f64, f64)> = parts
            .iter()
            .filter_map(|f| match f.segments[i] {
                Segment::Affine { left, right } => Some((left, right)),
                _ => None,
            })
            .collect();
        for (p, &(l1, r1)) in lines.iter().enumerate() {
            for &(l2, r2) in &lines[p + 1..] {
                let (dl, dr) = (l1 - l2, r1 - r2);
                if dl * dr < 0.0 {
                    let x = a + (b - a) * dl / (dl - dr);
                    if x - a > MERGE_TOL && b - x > MERGE_TOL {
                        extra.push(x);
                    }
                }
            }
        }
    }
    let g0 = grid[0];
    let gl = *grid.last().unwrap();
    for (anchor, left_side) in [(g0, true), (gl, false)] {
        let lines: Vec<(f64, f64)> = parts
            .iter()
            .filter_map(|f| match if left_side { f.left } else { f.right } {
                Tail::Affine { slope, limit } => Some((slope, limit)),
                _ => None,
            })
            .collect();
        for (p, &(s1, l1)) in lines.iter().enumerate() {
            for &(s2, l2) in &lines[p + 1..] {
                if s1 == s2 {
                    continue;
                }
                let x = anchor - (l1 - l2) / (s1 - s2);
                let inside = if left_side {
                    x < anchor - MERGE_TOL
                } else {
                    x > anchor + MERGE_TOL
                };
                if inside && x.is_finite() {
                    extra.push(x);
                }
            }
        }
    }
    if !extra.is_empty() {
        grid.extend(extra);
        dedupe_sorted(&mut grid);
    }
    grid
}

/// Exact infimum and a minimizer when one exists.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Infimum {
    pub value: ExtReal,
    pub argmin: Option<f64>,
}

impl PwlFunction {
    /// Exact infimum over `ℝ`, scanning breakpoints, segments and tails.
    pub fn infimum(&self) -> Infimum {
        // (value, attained at)
        let mut cands: Vec<(ExtReal, Option<f64>)> = Vec::new();
        let flat = |l: f64, r: f64| (l - r).abs() <= 1e-12 * 1f64.max(l.abs()).max(r.abs());
        for (i, &x) in self.breakpoints.iter().enumerate() {
            cands.push((self.values[i], Some(x)));
        }
        for (i, s) in self.segments.iter().enumerate() {
            let mid = 0.5 * (self.breakpoints[i] + self.breakpoints[i + 1]);
            match *s {
                Segment::PosInf => {}
                Segment::NegInf => cands.push((ExtReal::NEG_INF, Some(mid))),
                Segment::Affine { left, right } if flat(left, right) => {
                    cands.push((ExtReal::new(left.min(right)), Some(mid)))
                }
                Segment::Affine { left, right } => cands.push((ExtReal::new(left.min(right)), None)),
            }
        }
        for (tail, dir, anchor) in [(self.left, -1.0, self.first()), (self.right, 1.0, self.last())] {
            match tail {
                Tail::PosInf => {}
                Tail::NegInf => cands.push((ExtReal::NEG_INF, Some(anchor + dir))),
                Tail::Affine { slope, limit } => {
                    let outward = dir * slope;
                    if outward.abs() <= SLOPE_EPS {
                        cands.push((ExtReal::new(limit), Some(anchor + dir)));
                    } else if outward < 0.0 {
                        cands.push((ExtReal::NEG_INF, None));
                    } else {
                        cands.push((ExtReal::new(limit), None));
                    }
                }
            }
        }
        let value = cands.iter().map(|c| c.0).fold(ExtReal::POS_INF, ExtReal::min);
        if value.is_pos_inf() {
            return Infimum { value, argmin: None };
        }
        let argmin = cands
            .iter()
            .filter(|c| c.1.is_some() && c.0.approx_le(value, 1e-12))
            .find_map(|c| c.1);
        Infimum { value, argmin }
    }

    /// Exact supremum over `ℝ` (no maximizer tracking).
    pub fn supremum(&self) -> ExtReal {
        let neg = PwlFunction {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| -*v).collect(),
            segments: self
                .segments
                .iter()
                .map(|s| match *s {
                    Segment::PosInf => Segment::NegInf,
                    Segment::NegInf => Segment::PosInf,
                    Segment::Affine { left, right } => Segment::Affine {
                        left: -left,
                        right: -right,
                    },
                })
                .collect(),
            left: negate_tail(self.left),
            right: negate_tail(self.right),
        };
        -neg.infimum().value
    }

    /// `dom f` as disjoint intervals, left to right.
    pub fn domain(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut open: Option<(f64, bool)> = None;
        for el in self.elements() {
            let inside = el.in_domain();
            match (el, inside, open) {
                (Element::Open { lo, .. }, true, None) => open = Some((lo, false)),
                (Element::Point { x, .. }, true, None) => open = Some((x, true)),
                (Element::Point { x, .. }, false, Some((lo, lc))) => {
                    out.push(Interval::new(lo, x, lc, false));
                    open = None;
                }
                (Element::Open { lo, .. }, false, Some((start, lc))) => {
                    out.push(Interval::new(start, lo, lc, true));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some((lo, lc)) = open {
            out.push(Interval::new(lo, f64::INFINITY, lc, false));
        }
        out
    }

    /// Closed convex hull of `dom f` as a single interval (`None` when empty).
    pub fn domain_hull(&self) -> Option<Interval> {
        let d = self.domain();
        let first = d.first()?;
        let last = d.last()?;
        Some(Interval::new(first.lo, last.hi, first.lo_closed, last.hi_closed))
    }

    pub fn is_identically_pos_inf(&self) -> bool {
        self.elements().iter().all(|e| !e.in_domain())
    }

    pub fn takes_neg_inf(&self) -> bool {
        self.elements().iter().any(Element::has_neg_inf)
    }

    /// Whether `f` is finite at every point of `interval`.
    pub fn finite_on(&self, interval: &Interval) -> bool {
        if interval.is_empty() {
            return true;
        }
        self.elements().iter().all(|e| match *e {
            Element::Point { x, value } => !interval.contains(x) || value.is_finite(),
            Element::Open { lo, hi, piece } => {
                let overlaps = lo < interval.hi && hi > interval.lo;
                !overlaps || matches!(piece, Piece::Line { .. })
            }
        })
    }

    pub fn is_proper(&self) -> bool {
        !self.is_identically_pos_inf() && !self.takes_neg_inf()
    }

    pub fn is_lsc(&self) -> bool {
        self.is_lsc_tol(DEFAULT_TOL)
    }

    pub fn is_lsc_tol(&self, tol: f64) -> bool {
        (0..self.breakpoints.len()).all(|i| {
            let lim = self.limit_before(i).min(self.limit_after(i));
            self.values[i].approx_le(lim, tol)
        })
    }

    pub fn is_convex(&self) -> bool {
        self.is_convex_tol(DEFAULT_TOL)
    }

    pub fn is_convex_tol(&self, tol: f64) -> bool {
        let dom = self.domain();
        if dom.is_empty() {
            return true;
        }
        if dom.len() > 1 {
            return false;
        }
        let d = dom[0];
        let interior = |x: f64| x > d.lo && x < d.hi;
        if self.takes_neg_inf() {
            return self.elements().iter().all(|e| match *e {
                Element::Point { x, value } => !interior(x) || value.is_neg_inf(),
                Element::Open { piece, .. } => !e.in_domain() || matches!(piece, Piece::NegInf),
            });
        }
        let mut prev_slope: Option<f64> = None;
        for (i, &x) in self.breakpoints.iter().enumerate() {
            let before = self.piece_before(i);
            if interior(x) || (x == d.hi && d.hi_closed) || (x == d.lo && d.lo_closed) {
                let v = self.values[i];
                let lb = self.limit_before(i);
                let la = self.limit_after(i);
                let broken = if interior(x) {
                    !(v.approx_eq(lb, tol) && v.approx_eq(la, tol))
                } else {
                    (x == d.lo && x < d.hi && !la.approx_le(v, tol)) || (x == d.hi && x > d.lo && !lb.approx_le(v, tol))
                };
                if broken {
                    return false;
                }
            }
            if let Some(s) = before.slope() {
                if let Some(p) = prev_slope {
                    if s < p - tol * 1f64.max(s.abs()).max(p.abs()) {
                        return false;
                    }
                }
                prev_slope = Some(s);
            }
        }
        if let Some(s) = self.right_piece().slope() {
            if let Some(p) = prev_slope {
                if s < p - tol * 1f64.max(s.abs()).max(p.abs()) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_gamma0(&self) -> bool {
        self.is_proper() && self.is_convex() && self.is_lsc()
    }

    /// `0·f`: the indicator of `dom f` when `f` is proper, keeping the
    /// `0·(−∞) = 0` convention elsewhere.
    pub fn zero_scaled(&self) -> PwlFunction {
        weighted_sum(&[0.0], std::slice::from_ref(self)).expect("zero weight")
    }

    /// Zero wherever `f` is finite, keeping its infinite values.
    pub fn infinity_pattern(&self) -> PwlFunction {
        let flat = |v: ExtReal| if v.is_finite() { ExtReal::ZERO } else { v };
        PwlFunction {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| flat(v)).collect(),
            segments: self
                .segments
                .iter()
                .map(|s| match s {
                    Segment::Affine { .. } => Segment::Affine { left: 0.0, right: 0.0 },
                    other => *other,
                })
                .collect(),
            left: flat_tail(self.left),
            right: flat_tail(self.right),
        }
    }

    /// Largest finite slope magnitude over segments and tails.
    pub fn max_abs_slope(&self) -> f64 {
        let mut m = 0f64;
        for i in 0..self.segments.len() {
            if let Some(s) = self.segment_piece(i).slope() {
                m = m.max(s.abs());
            }
        }
        for t in [self.left, self.right] {
            if let Tail::Affine { slope, .. } = t {
                m = m.max(slope.abs());
            }
        }
        m
    }
}

fn flat_tail(t: Tail) -> Tail {
    match t {
        Tail::Affine { .. } => Tail::Affine { slope: 0.0, limit: 0.0 },
        other => other,
    }
}

fn negate_tail(t: Tail) -> Tail {
    match t {
        Tail::PosInf => Tail::NegInf,
        Tail::NegInf => Tail::PosInf,
        Tail::Affine { slope, limit } => Tail::Affine {
            slope: -slope,
            limit: -limit,
        },
    }
}
