use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;

/// Breakpoints closer than this are the same point.
pub const MERGE_TOL: f64 = 1e-12;

/// Behaviour on an open segment `(x_i, x_{i+1})`.
///
/// `Affine` stores the one-sided limits at both ends; the breakpoint values
/// themselves may differ from these limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    PosInf,
    NegInf,
    Affine { left: f64, right: f64 },
}

/// Behaviour on an unbounded end. `limit` is the one-sided limit at the
/// extreme breakpoint, so the tail reads `limit + slope·(x − anchor)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    PosInf,
    NegInf,
    Affine { slope: f64, limit: f64 },
}

/// An open piece viewed as a function on its own interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Piece {
    PosInf,
    NegInf,
    Line { at: f64, value: f64, slope: f64 },
}

impl Piece {
    pub(crate) fn eval(self, x: f64) -> ExtReal {
        match self {
            Piece::PosInf => ExtReal::POS_INF,
            Piece::NegInf => ExtReal::NEG_INF,
            Piece::Line { at, value, slope } => ExtReal::new(value + slope * (x - at)),
        }
    }

    pub(crate) fn slope(self) -> Option<f64> {
        match self {
            Piece::Line { slope, .. } => Some(slope),
            _ => None,
        }
    }
}

/// Interval of the real line with per-end closedness. Infinite ends ignore
/// their flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "ext_f64")]
    pub lo: f64,
    #[serde(with = "ext_f64")]
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, true, true)
    }

    /// Flags on infinite ends are normalized to `false`.
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn whole_line() -> Self {
        Interval::closed(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed || self.lo == f64::NEG_INFINITY {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed || self.hi == f64::INFINITY {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    /// Distance from `x` to the closure of the interval.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::extreal::ExtReal;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        ExtReal::new(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(ExtReal::deserialize(d)?.to_f64())
    }
}

/// Exact 1-D piecewise-linear extended-real function.
///
/// Total on `ℝ`: left tail on `(−∞, x₁)`, breakpoint values at each `xᵢ`,
/// segments on `(xᵢ, xᵢ₊₁)` and a right tail on `(x_m, +∞)`. Because
/// breakpoint values are stored separately from segment limits, non-lsc
/// functions such as the indicator of `(0, 1]` are representable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "repr::PwlRepr", into = "repr::PwlRepr")]
pub struct PwlFunction {
    pub(crate) breakpoints: Vec<f64>,
    pub(crate) values: Vec<ExtReal>,
    pub(crate) segments: Vec<Segment>,
    pub(crate) left: Tail,
    pub(crate) right: Tail,
}

/// Where a real number falls relative to the breakpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Loc {
    Left,
    Break(usize),
    Seg(usize),
    Right,
}

impl PwlFunction {
    pub fn new(
        breakpoints: Vec<f64>,
        values: Vec<ExtReal>,
        segments: Vec<Segment>,
        left: Tail,
        right: Tail,
    ) -> Result<Self> {
        let invalid = |m: &str| Err(Error::InvalidFunction(m.to_string()));
        if breakpoints.is_empty() {
            return invalid("at least one breakpoint is required");
        }
        if values.len() != breakpoints.len() {
            return invalid("one value per breakpoint is required");
        }
        if segments.len() + 1 != breakpoints.len() {
            return invalid("one segment per pair of consecutive breakpoints is required");
        }
        if breakpoints.iter().any(|x| !x.is_finite()) {
            return invalid("breakpoints must be finite");
        }
        if breakpoints.windows(2).any(|w| w[1] - w[0] <= MERGE_TOL) {
            return invalid("breakpoints must be strictly increasing");
        }
        for s in &segments {
            if let Segment::Affine { left, right } = s {
                if !left.is_finite() || !right.is_finite() {
                    return invalid("affine segment limits must be finite");
                }
            }
        }
        for t in [&left, &right] {
            if let Tail::Affine { slope, limit } = t {
                if !slope.is_finite() || !limit.is_finite() {
                    return invalid("affine tail slope and limit must be finite");
                }
            }
        }
        Ok(PwlFunction {
            breakpoints,
            values,
            segments,
            left,
            right,
        })
    }

    pub fn constant(value: ExtReal) -> Self {
        let tail = match value.finite() {
            Some(v) => Tail::Affine { slope: 0.0, limit: v },
            None if value.is_pos_inf() => Tail::PosInf,
            None => Tail::NegInf,
        };
        PwlFunction {
            breakpoints: vec![0.0],
            values: vec![value],
            segments: vec![],
            left: tail,
            right: tail,
        }
    }

    /// `x ↦ slope·x + intercept`.
    pub fn affine(slope: f64, intercept: f64) -> Self {
        PwlFunction {
            breakpoints: vec![0.0],
            values: vec![ExtReal::new(intercept)],
            segments: vec![],
            left: Tail::Affine {
                slope,
                limit: intercept,
            },
            right: Tail::Affine {
                slope,
                limit: intercept,
            },
        }
    }

    /// `x ↦ scale·|x − center|`.
    pub fn abs_at(center: f64, scale: f64) -> Self {
        PwlFunction {
            breakpoints: vec![center],
            values: vec![ExtReal::ZERO],
            segments: vec![],
            left: Tail::Affine {
                slope: -scale,
                limit: 0.0,
            },
            right: Tail::Affine {
                slope: scale,
                limit: 0.0,
            },
        }
    }

    /// Indicator of an interval: 0 inside, `+∞` outside.
    pub fn indicator(interval: Interval) -> Result<Self> {
        let Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        } = interval;
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidArgument(format!("bad interval [{lo}, {hi}]")));
        }
        let flag = |closed: bool| if closed { ExtReal::ZERO } else { ExtReal::POS_INF };
        let zero_tail = Tail::Affine { slope: 0.0, limit: 0.0 };
        let f = match (lo.is_finite(), hi.is_finite()) {
            (false, false) => PwlFunction::constant(ExtReal::ZERO),
            (true, false) => PwlFunction::new(vec![lo], vec![flag(lo_closed)], vec![], Tail::PosInf, zero_tail)?,
            (false, true) => PwlFunction::new(vec![hi], vec![flag(hi_closed)], vec![], zero_tail, Tail::PosInf)?,
            (true, true) if hi - lo <= MERGE_TOL => {
                let v = if lo_closed && hi_closed {
                    ExtReal::ZERO
                } else {
                    ExtReal::POS_INF
                };
                PwlFunction::new(vec![lo], vec![v], vec![], Tail::PosInf, Tail::PosInf)?
            }
            (true, true) => PwlFunction::new(
                vec![lo, hi],
                vec![flag(lo_closed), flag(hi_closed)],
                vec![Segment::Affine { left: 0.0, right: 0.0 }],
                Tail::PosInf,
                Tail::PosInf,
            )?,
        };
        Ok(f)
    }

    pub fn point_indicator(a: f64) -> Self {
        PwlFunction::new(vec![a], vec![ExtReal::ZERO], vec![], Tail::PosInf, Tail::PosInf).expect("finite point")
    }

    /// Continuous finite function interpolating `vertices` (sorted by x) with
    /// the given tails.
    pub fn from_vertices(vertices: &[(f64, f64)], left: Tail, right: Tail) -> Result<Self> {
        let breakpoints = vertices.iter().map(|v| v.0).collect();
        let values = vertices.iter().map(|v| ExtReal::new(v.1)).collect();
        let segments = vertices
            .windows(2)
            .map(|w| Segment::Affine {
                left: w[0].1,
                right: w[1].1,
            })
            .collect();
        PwlFunction::new(breakpoints, values, segments, left, right)
    }

    /// Convex finite function with vertex at `x0` of height `y0` and the given
    /// increasing list of slopes split around the breakpoints `xs` (sorted,
    /// `slopes.len() == xs.len() + 1`).
    pub fn from_slopes(xs: &[f64], y0: f64, slopes: &[f64]) -> Result<Self> {
        if xs.is_empty() || slopes.len() != xs.len() + 1 {
            return Err(Error::InvalidArgument("need k breakpoints and k+1 slopes".into()));
        }
        let mut verts = vec![(xs[0], y0)];
        for i in 1..xs.len() {
            let (px, py) = verts[i - 1];
            verts.push((xs[i], py + slopes[i] * (xs[i] - px)));
        }
        let left = Tail::Affine {
            slope: slopes[0],
            limit: y0,
        };
        let right = Tail::Affine {
            slope: slopes[xs.len()],
            limit: verts.last().unwrap().1,
        };
        PwlFunction::from_vertices(&verts, left, right)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn left_tail(&self) -> Tail {
        self.left
    }

    pub fn right_tail(&self) -> Tail {
        self.right
    }

    pub(crate) fn first(&self) -> f64 {
        self.breakpoints[0]
    }

    pub(crate) fn last(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub(crate) fn locate(&self, x: f64) -> Loc {
        let bps = &self.breakpoints;
        let idx = bps.partition_point(|&b| b < x);
        if idx < bps.len() && (bps[idx] - x).abs() <= MERGE_TOL {
            return Loc::Break(idx);
        }
        if idx > 0 && (x - bps[idx - 1]).abs() <= MERGE_TOL {
            return Loc::Break(idx - 1);
        }
        if idx == 0 {
            Loc::Left
        } else if idx == bps.len() {
            Loc::Right
        } else {
            Loc::Seg(idx - 1)
        }
    }

    pub(crate) fn left_piece(&self) -> Piece {
        tail_piece(self.left, self.first())
    }

    pub(crate) fn right_piece(&self) -> Piece {
        tail_piece(self.right, self.last())
    }

    pub(crate) fn segment_piece(&self, i: usize) -> Piece {
        let a = self.breakpoints[i];
        let b = self.breakpoints[i + 1];
        match self.segments[i] {
            Segment::PosInf => Piece::PosInf,
            Segment::NegInf => Piece::NegInf,
            Segment::Affine { left, right } => Piece::Line {
                at: a,
                value: left,
                slope: (right - left) / (b - a),
            },
        }
    }

    /// The open piece immediately to the right of breakpoint `i`.
    pub(crate) fn piece_after(&self, i: usize) -> Piece {
        if i + 1 < self.breakpoints.len() {
            self.segment_piece(i)
        } else {
            self.right_piece()
        }
    }

    /// The open piece immediately to the left of breakpoint `i`.
    pub(crate) fn piece_before(&self, i: usize) -> Piece {
        if i == 0 {
            self.left_piece()
        } else {
            self.segment_piece(i - 1)
        }
    }

    /// Limit of the piece right of breakpoint `i`, taken at `x_i`.
    pub(crate) fn limit_after(&self, i: usize) -> ExtReal {
        if i + 1 < self.breakpoints.len() {
            segment_limits(self.segments[i]).0
        } else {
            tail_limit(self.right)
        }
    }

    /// Limit of the piece left of breakpoint `i`, taken at `x_i`.
    pub(crate) fn limit_before(&self, i: usize) -> ExtReal {
        if i == 0 {
            tail_limit(self.left)
        } else {
            segment_limits(self.segments[i - 1]).1
        }
    }

    pub fn evaluate(&self, x: f64) -> ExtReal {
        match self.locate(x) {
            Loc::Break(i) => self.values[i],
            Loc::Left => self.left_piece().eval(x),
            Loc::Right => self.right_piece().eval(x),
            Loc::Seg(i) => self.segment_piece(i).eval(x),
        }
    }

    /// `lim_{t↓x} f(t)`.
    pub fn limit_from_right(&self, x: f64) -> ExtReal {
        match self.locate(x) {
            Loc::Break(i) => self.limit_after(i),
            Loc::Left => self.left_piece().eval(x),
            Loc::Right => self.right_piece().eval(x),
            Loc::Seg(i) => self.segment_piece(i).eval(x),
        }
    }

    /// `lim_{t↑x} f(t)`.
    pub fn limit_from_left(&self, x: f64) -> ExtReal {
        match self.locate(x) {
            Loc::Break(i) => self.limit_before(i),
            Loc::Left => self.left_piece().eval(x),
            Loc::Right => self.right_piece().eval(x),
            Loc::Seg(i) => self.segment_piece(i).eval(x),
        }
    }

    fn piece_containing(&self, x: f64) -> Piece {
        match self.locate(x) {
            Loc::Left => self.left_piece(),
            Loc::Right => self.right_piece(),
            Loc::Seg(i) => self.segment_piece(i),
            Loc::Break(i) if x >= self.breakpoints[i] => self.piece_after(i),
            Loc::Break(i) => self.piece_before(i),
        }
    }

    /// Same function described over `grid`, which must contain every
    /// breakpoint of `self` (up to [`MERGE_TOL`]).
    pub(crate) fn refine(&self, grid: &[f64]) -> PwlFunction {
        debug_assert!(self
            .breakpoints
            .iter()
            .all(|b| grid.iter().any(|g| (g - b).abs() <= MERGE_TOL)));
        let values = grid.iter().map(|&g| self.evaluate(g)).collect();
        let segments = grid
            .windows(2)
            .map(|w| match self.piece_containing(0.5 * (w[0] + w[1])) {
                Piece::PosInf => Segment::PosInf,
                Piece::NegInf => Segment::NegInf,
                Piece::Line { .. } => Segment::Affine {
                    left: self.limit_from_right(w[0]).to_f64(),
                    right: self.limit_from_left(w[1]).to_f64(),
                },
            })
            .collect();
        let g0 = grid[0];
        let gl = *grid.last().unwrap();
        let left = reanchor(self.left, self.left_piece(), g0);
        let right = reanchor(self.right, self.right_piece(), gl);
        PwlFunction {
            breakpoints: grid.to_vec(),
            values,
            segments,
            left,
            right,
        }
    }

    /// Drops breakpoints that carry no information, so that equal functions
    /// share one representation. Functions without any essential
    /// breakpoint are anchored at 0.
    pub fn canonical(&self) -> PwlFunction {
        const TOL: f64 = 1e-12;
        let mut f = self.clone();
        let mut i = 0;
        while i < f.breakpoints.len() {
            if f.breakpoints.len() > 1 && f.is_removable(i, TOL) {
                f.remove_breakpoint(i);
            } else {
                i += 1;
            }
        }
        if f.breakpoints.len() == 1 && f.is_removable(0, TOL) && f.breakpoints[0] != 0.0 {
            f = f.refine_single_to(0.0);
        }
        f
    }

    fn refine_single_to(&self, x: f64) -> PwlFunction {
        let v = self.evaluate(x);
        let re = |t: Tail| match t {
            Tail::Affine { slope, .. } => Tail::Affine {
                slope,
                limit: v.to_f64(),
            },
            other => other,
        };
        PwlFunction {
            breakpoints: vec![x],
            values: vec![v],
            segments: vec![],
            left: re(self.left),
            right: re(self.right),
        }
    }

    fn is_removable(&self, i: usize, tol: f64) -> bool {
        let v = self.values[i];
        let (lb, la) = (self.limit_before(i), self.limit_after(i));
        if !(v.approx_eq(lb, tol) && v.approx_eq(la, tol)) {
            return false;
        }
        match (self.piece_before(i), self.piece_after(i)) {
            (Piece::PosInf, Piece::PosInf) | (Piece::NegInf, Piece::NegInf) => true,
            (Piece::Line { slope: s1, .. }, Piece::Line { slope: s2, .. }) => {
                (s1 - s2).abs() <= tol * 1f64.max(s1.abs()).max(s2.abs())
            }
            _ => false,
        }
    }

    fn remove_breakpoint(&mut self, i: usize) {
        let m = self.breakpoints.len();
        if i == 0 {
            // left tail absorbs the first segment
            let new_first = self.breakpoints[1];
            self.left = match self.left {
                Tail::Affine { slope, .. } => Tail::Affine {
                    slope,
                    limit: self.limit_before(1).to_f64(),
                },
                t => t,
            };
            let _ = new_first;
            self.segments.remove(0);
        } else if i == m - 1 {
            self.right = match self.right {
                Tail::Affine { slope, .. } => Tail::Affine {
                    slope,
                    limit: self.limit_after(m - 2).to_f64(),
                },
                t => t,
            };
            self.segments.remove(m - 2);
        } else {
            let merged = match (self.segments[i - 1], self.segments[i]) {
                (Segment::Affine { left, .. }, Segment::Affine { right, .. }) => Segment::Affine { left, right },
                (s, _) => s,
            };
            self.segments[i - 1] = merged;
            self.segments.remove(i);
        }
        self.breakpoints.remove(i);
        self.values.remove(i);
    }

    /// Largest pointwise discrepancy between two functions, comparing every
    /// breakpoint value, one-sided segment limit and tail on the merged
    /// breakpoint set. `+inf` when the functions differ in an infinite value.
    pub fn max_discrepancy(&self, other: &PwlFunction) -> f64 {
        self.discrepancy_witness(other).0
    }

    /// [`PwlFunction::max_discrepancy`] together with an abscissa where it
    /// is reached.
    pub fn discrepancy_witness(&self, other: &PwlFunction) -> (f64, f64) {
        let grid = merge_breakpoints([self, other]);
        let a = self.refine(&grid);
        let b = other.refine(&grid);
        let mut worst = (0f64, grid[0]);
        let mut bump = |d: f64, x: f64| {
            if d > worst.0 || (d.is_nan() && !worst.0.is_nan()) {
                worst = (d, x);
            }
        };
        for (i, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
            bump(x.discrepancy(*y), grid[i]);
        }
        for (i, (s, t)) in a.segments.iter().zip(&b.segments).enumerate() {
            let (sl, sr) = segment_limits(*s);
            let (tl, tr) = segment_limits(*t);
            let mid = 0.5 * (grid[i] + grid[i + 1]);
            bump(sl.discrepancy(tl).max(sr.discrepancy(tr)), mid);
        }
        bump(tail_discrepancy(a.left, b.left), grid[0] - 1.0);
        bump(tail_discrepancy(a.right, b.right), grid[grid.len() - 1] + 1.0);
        worst
    }

    pub fn approx_eq(&self, other: &PwlFunction, tol: f64) -> bool {
        self.max_discrepancy(other) <= tol
    }

    /// Breakpoint-structure equality: same canonical breakpoints and values.
    pub fn structurally_eq(&self, other: &PwlFunction, tol: f64) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        a.breakpoints.len() == b.breakpoints.len()
            && a.breakpoints
                .iter()
                .zip(&b.breakpoints)
                .all(|(x, y)| (x - y).abs() <= tol * 1f64.max(x.abs()))
            && a.max_discrepancy(&b) <= tol
    }

    /// Walks tails, breakpoints and segments from left to right.
    pub(crate) fn elements(&self) -> Vec<Element> {
        let m = self.breakpoints.len();
        let mut out = Vec::with_capacity(2 * m + 1);
        out.push(Element::Open {
            lo: f64::NEG_INFINITY,
            hi: self.first(),
            piece: self.left_piece(),
        });
        for i in 0..m {
            out.push(Element::Point {
                x: self.breakpoints[i],
                value: self.values[i],
            });
            let hi = if i + 1 < m {
                self.breakpoints[i + 1]
            } else {
                f64::INFINITY
            };
            out.push(Element::Open {
                lo: self.breakpoints[i],
                hi,
                piece: self.piece_after(i),
            });
        }
        out
    }

    /// Probe abscissae: every breakpoint, every segment midpoint and points
    /// beyond both ends.
    pub fn probe_points(&self) -> Vec<f64> {
        let mut xs = Vec::with_capacity(2 * self.breakpoints.len() + 2);
        xs.push(self.first() - 1.0);
        for w in self.breakpoints.windows(2) {
            xs.push(w[0]);
            xs.push(0.5 * (w[0] + w[1]));
        }
        xs.push(self.last());
        xs.push(self.last() + 1.0);
        xs
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Element {
    Point { x: f64, value: ExtReal },
    Open { lo: f64, hi: f64, piece: Piece },
}

impl Element {
    /// Whether the element lies in `dom f`.
    pub(crate) fn in_domain(&self) -> bool {
        match self {
            Element::Point { value, .. } => !value.is_pos_inf(),
            Element::Open { piece, .. } => !matches!(piece, Piece::PosInf),
        }
    }

    pub(crate) fn has_neg_inf(&self) -> bool {
        match self {
            Element::Point { value, .. } => value.is_neg_inf(),
            Element::Open { piece, .. } => matches!(piece, Piece::NegInf),
        }
    }
}

pub(crate) fn tail_piece(t: Tail, at: f64) -> Piece {
    match t {
        Tail::PosInf => Piece::PosInf,
        Tail::NegInf => Piece::NegInf,
        Tail::Affine { slope, limit } => Piece::Line {
            at,
            value: limit,
            slope,
        },
    }
}

pub(crate) fn tail_limit(t: Tail) -> ExtReal {
    match t {
        Tail::PosInf => ExtReal::POS_INF,
        Tail::NegInf => ExtReal::NEG_INF,
        Tail::Affine { limit, .. } => ExtReal::new(limit),
    }
}

pub(crate) fn segment_limits(s: Segment) -> (ExtReal, ExtReal) {
    match s {
        Segment::PosInf => (ExtReal::POS_INF, ExtReal::POS_INF),
        Segment::NegInf => (ExtReal::NEG_INF, ExtReal::NEG_INF),
        Segment::Affine { left, right } => (ExtReal::new(left), ExtReal::new(right)),
    }
}

fn reanchor(t: Tail, piece: Piece, at: f64) -> Tail {
    match t {
        Tail::Affine { slope, .. } => Tail::Affine {
            slope,
            limit: piece.eval(at).to_f64(),
        },
        other => other,
    }
}

fn tail_discrepancy(a: Tail, b: Tail) -> f64 {
    match (a, b) {
        (Tail::PosInf, Tail::PosInf) | (Tail::NegInf, Tail::NegInf) => 0.0,
        (Tail::Affine { slope: s1, limit: l1 }, Tail::Affine { slope: s2, limit: l2 }) => {
            let ds = (s1 - s2).abs() / 1f64.max(s1.abs()).max(s2.abs());
            ds.max(ExtReal::new(l1).discrepancy(ExtReal::new(l2)))
        }
        _ => f64::INFINITY,
    }
}

/// Sorted union of all breakpoints, deduplicated within [`MERGE_TOL`].
pub fn merge_breakpoints<'a, I>(funcs: I) -> Vec<f64>
where
    I: IntoIterator<Item = &'a PwlFunction>,
{
    let mut all: Vec<f64> = funcs.into_iter().flat_map(|f| f.breakpoints.iter().copied()).collect();
    dedupe_sorted(&mut all);
    all
}

pub(crate) fn dedupe_sorted(xs: &mut Vec<f64>) {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    xs.dedup_by(|b, a| (*b - *a).abs() <= MERGE_TOL);
}

mod repr {
    use serde::{Deserialize, Serialize};

    use super::{PwlFunction, Segment, Tail};
    use crate::error::Error;
    use crate::extreal::ExtReal;

    #[derive(Clone, Copy, Serialize, Deserialize)]
    pub enum InfTag {
        #[serde(rename = "inf")]
        PosInf,
        #[serde(rename = "-inf")]
        NegInf,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum SegmentRepr {
        Infinite(InfTag),
        Affine([f64; 2]),
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum TailRepr {
        Infinite(InfTag),
        Affine { slope: f64, limit: f64 },
    }

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct PwlRepr {
        breakpoints: Vec<f64>,
        values: Vec<ExtReal>,
        segments: Vec<SegmentRepr>,
        left_tail: TailRepr,
        right_tail: TailRepr,
    }

    impl From<SegmentRepr> for Segment {
        fn from(s: SegmentRepr) -> Self {
            match s {
                SegmentRepr::Infinite(InfTag::PosInf) => Segment::PosInf,
                SegmentRepr::Infinite(InfTag::NegInf) => Segment::NegInf,
                SegmentRepr::Affine([left, right]) => Segment::Affine { left, right },
            }
        }
    }

    impl From<TailRepr> for Tail {
        fn from(t: TailRepr) -> Self {
            match t {
                TailRepr::Infinite(InfTag::PosInf) => Tail::PosInf,
                TailRepr::Infinite(InfTag::NegInf) => Tail::NegInf,
                TailRepr::Affine { slope, limit } => Tail::Affine { slope, limit },
            }
        }
    }

    fn tail_repr(t: Tail) -> TailRepr {
        match t {
            Tail::PosInf => TailRepr::Infinite(InfTag::PosInf),
            Tail::NegInf => TailRepr::Infinite(InfTag::NegInf),
            Tail::Affine { slope, limit } => TailRepr::Affine { slope, limit },
        }
    }

    impl TryFrom<PwlRepr> for PwlFunction {
        type Error = Error;

        fn try_from(r: PwlRepr) -> Result<Self, Error> {
            PwlFunction::new(
                r.breakpoints,
                r.values,
                r.segments.into_iter().map(Segment::from).collect(),
                r.left_tail.into(),
                r.right_tail.into(),
            )
        }
    }

    impl From<PwlFunction> for PwlRepr {
        fn from(f: PwlFunction) -> Self {
            PwlRepr {
                breakpoints: f.breakpoints,
                values: f.values,
                segments: f
                    .segments
                    .into_iter()
                    .map(|s| match s {
                        Segment::PosInf => SegmentRepr::Infinite(InfTag::PosInf),
                        Segment::NegInf => SegmentRepr::Infinite(InfTag::NegInf),
                        Segment::Affine { left, right } => SegmentRepr::Affine([left, right]),
                    })
                    .collect(),
                left_tail: tail_repr(f.left),
                right_tail: tail_repr(f.right),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_open_unit() -> PwlFunction {
        PwlFunction::indicator(Interval::new(0.0, 1.0, false, true)).unwrap()
    }

    #[test]
    fn evaluates_indicator_endpoints() {
        let f = half_open_unit();
        assert_eq!(f.evaluate(0.0), ExtReal::POS_INF);
        assert_eq!(f.evaluate(1.0), ExtReal::ZERO);
        assert_eq!(f.evaluate(0.5), ExtReal::ZERO);
        assert_eq!(f.evaluate(-3.0), ExtReal::POS_INF);
        assert_eq!(f.limit_from_right(0.0), ExtReal::ZERO);
        assert_eq!(f.limit_from_left(0.0), ExtReal::POS_INF);
    }

    #[test]
    fn evaluates_abs() {
        let f = PwlFunction::abs_at(0.0, 1.0);
        assert_eq!(f.evaluate(-2.0), ExtReal::new(2.0));
        assert_eq!(f.evaluate(3.0), ExtReal::new(3.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PwlFunction::new(vec![], vec![], vec![], Tail::PosInf, Tail::PosInf).is_err());
        assert!(PwlFunction::new(
            vec![1.0, 0.0],
            vec![ExtReal::ZERO; 2],
            vec![Segment::PosInf],
            Tail::PosInf,
            Tail::PosInf
        )
        .is_err());
        assert!(PwlFunction::new(
            vec![0.0],
            vec![ExtReal::ZERO],
            vec![],
            Tail::Affine {
                slope: f64::INFINITY,
                limit: 0.0
            },
            Tail::PosInf
        )
        .is_err());
    }

    #[test]
    fn refinement_preserves_values() {
        let f = PwlFunction::from_slopes(&[-1.0, 2.0], 3.0, &[-2.0, 0.5, 4.0]).unwrap();
        let g = f.refine(&[-5.0, -1.0, 0.0, 2.0, 7.0]);
        for x in [-9.0, -5.0, -3.0, -1.0, 0.3, 1.0, 2.0, 5.0, 11.0] {
            assert!(f.evaluate(x).approx_eq(g.evaluate(x), 1e-12), "x = {x}");
        }
        assert!(f.approx_eq(&g, 1e-12));
        assert!(g.canonical().structurally_eq(&f, 1e-12));
        assert_eq!(g.canonical().breakpoints(), f.breakpoints());
    }

    #[test]
    fn canonical_keeps_non_lsc_breakpoints() {
        let f = half_open_unit();
        assert_eq!(f.canonical().breakpoints(), &[0.0, 1.0]);
        let g = PwlFunction::affine(2.0, 1.0).refine(&[-1.0, 0.0, 3.0]).canonical();
        assert_eq!(g.breakpoints(), &[0.0]);
        assert!(g.approx_eq(&PwlFunction::affine(2.0, 1.0), 1e-12));
    }

    #[test]
    fn discrepancy_detects_breakpoint_overrides() {
        let open = half_open_unit();
        let closed = PwlFunction::indicator(Interval::closed(0.0, 1.0)).unwrap();
        assert_eq!(open.max_discrepancy(&closed), f64::INFINITY);
        assert_eq!(closed.max_discrepancy(&closed.clone()), 0.0);
    }

    #[test]
    fn json_schema_round_trip() {
        let f = half_open_unit();
        let s = serde_json::to_value(&f).unwrap();
        assert_eq!(
            s,
            serde_json::json!({
                "breakpoints": [0.0, 1.0],
                "values": ["inf", 0.0],
                "segments": [[0.0, 0.0]],
                "left_tail": "inf",
                "right_tail": "inf"
            })
        );
        let back: PwlFunction = serde_json::from_value(s).unwrap();
        assert_eq!(back, f);
        let affine = serde_json::to_value(PwlFunction::affine(1.0, 0.0)).unwrap();
        assert_eq!(affine["left_tail"], serde_json::json!({"slope": 1.0, "limit": 0.0}));
        let bad = serde_json::json!({
            "breakpoints": [0.0, 0.0], "values": [0, 0], "segments": ["inf"],
            "left_tail": "inf", "right_tail": "inf"
        });
        assert!(serde_json::from_value::<PwlFunction>(bad).is_err());
    }
}
