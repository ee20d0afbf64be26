use super::ops::SLOPE_EPS;
use super::pwl::{Element, Interval, Piece, PwlFunction, Segment, Tail, MERGE_TOL};
use crate::extreal::ExtReal;

impl PwlFunction {
    /// Largest lsc minorant: each breakpoint value drops to the smaller
    /// adjacent limit when that is lower.
    pub fn lsc_hull(&self) -> PwlFunction {
        let mut f = self.clone();
        for i in 0..f.breakpoints.len() {
            let lim = self.limit_before(i).min(self.limit_after(i));
            f.values[i] = self.values[i].min(lim);
        }
        f
    }

    /// Greatest convex minorant, computed exactly.
    pub fn convex_hull(&self) -> PwlFunction {
        let Some(hull) = self.domain_hull() else {
            return self.clone();
        };
        if self.takes_neg_inf() {
            improper_hull(self, hull)
        } else {
            proper_hull(self, hull)
        }
    }

    pub fn closed_convex_hull(&self) -> PwlFunction {
        self.convex_hull().lsc_hull()
    }
}

/// Value of the convex hull at a finite end `e` of `co dom f`: only points
/// above `e` itself can contribute there.
fn end_value(f: &PwlFunction, e: f64, closed: bool) -> ExtReal {
    if closed {
        f.evaluate(e)
    } else {
        ExtReal::POS_INF
    }
}

/// `f` takes `−∞`: the hull is `−∞` on the interior of `co dom f`.
fn improper_hull(f: &PwlFunction, d: Interval) -> PwlFunction {
    let lo_v = end_value(f, d.lo, d.lo_closed);
    let hi_v = end_value(f, d.hi, d.hi_closed);
    match (d.lo.is_finite(), d.hi.is_finite()) {
        (false, false) => Ok(PwlFunction::constant(ExtReal::NEG_INF)),
        (true, false) => PwlFunction::new(vec![d.lo], vec![lo_v], vec![], Tail::PosInf, Tail::NegInf),
        (false, true) => PwlFunction::new(vec![d.hi], vec![hi_v], vec![], Tail::NegInf, Tail::PosInf),
        (true, true) if d.hi - d.lo <= MERGE_TOL => {
            PwlFunction::new(vec![d.lo], vec![lo_v], vec![], Tail::PosInf, Tail::PosInf)
        }
        (true, true) => PwlFunction::new(
            vec![d.lo, d.hi],
            vec![lo_v, hi_v],
            vec![Segment::NegInf],
            Tail::PosInf,
            Tail::PosInf,
        ),
    }
    .expect("hull data is valid")
}

/// Lower convex chain of `pts` (sorted by x, one point per abscissa).
fn lower_chain(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut uniq: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        match uniq.last() {
            Some(q) if (p.0 - q.0).abs() <= MERGE_TOL => {}
            _ => uniq.push(p),
        }
    }
    let mut chain: Vec<(f64, f64)> = Vec::with_capacity(uniq.len());
    for p in uniq {
        while chain.len() >= 2 {
            let o = chain[chain.len() - 2];
            let a = chain[chain.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }
    chain
}

/// Index of the chain vertex supporting a line of slope `s`, leftmost or
/// rightmost among ties.
fn support(chain: &[(f64, f64)], s: f64, leftmost: bool) -> usize {
    let key = |p: &(f64, f64)| p.1 - s * p.0;
    let best = chain.iter().map(key).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * 1f64.max(best.abs());
    let hit = |i: &usize| key(&chain[*i]) <= best + tol;
    if leftmost {
        (0..chain.len()).find(hit).unwrap()
    } else {
        (0..chain.len()).rfind(hit).unwrap()
    }
}

fn proper_hull(f: &PwlFunction, d: Interval) -> PwlFunction {
    let mut pts = Vec::new();
    for el in f.elements() {
        match el {
            Element::Point { x, value } => {
                if let Some(y) = value.finite() {
                    pts.push((x, y));
                }
            }
            Element::Open {
                lo,
                hi,
                piece: Piece::Line { .. },
            } => {
                if lo.is_finite() {
                    pts.push((lo, f.limit_from_right(lo).to_f64()));
                }
                if hi.is_finite() {
                    pts.push((hi, f.limit_from_left(hi).to_f64()));
                }
            }
            Element::Open { .. } => {}
        }
    }
    let chain = lower_chain(pts);
    let tail_slope = |t: Tail| match t {
        Tail::Affine { slope, .. } => Some(slope),
        _ => None,
    };
    let sl = tail_slope(f.left);
    let sr = tail_slope(f.right);
    if let (Some(a), Some(b)) = (sl, sr) {
        if a - b > SLOPE_EPS * 1f64.max(a.abs()).max(b.abs()) {
            return PwlFunction::constant(ExtReal::NEG_INF);
        }
    }
    let p = sl.map_or(0, |s| support(&chain, s, true));
    let q = sr.map_or(chain.len() - 1, |s| support(&chain, s, false));
    let q = q.max(p);
    let verts = &chain[p..=q];
    let breakpoints: Vec<f64> = verts.iter().map(|v| v.0).collect();
    let mut values: Vec<ExtReal> = verts.iter().map(|v| ExtReal::new(v.1)).collect();
    let segments = verts
        .windows(2)
        .map(|w| Segment::Affine {
            left: w[0].1,
            right: w[1].1,
        })
        .collect();
    let first = verts[0];
    let last = verts[verts.len() - 1];
    let left = match sl {
        Some(slope) => Tail::Affine { slope, limit: first.1 },
        None => {
            values[0] = end_value(f, first.0, d.lo_closed);
            Tail::PosInf
        }
    };
    let right = match sr {
        Some(slope) => Tail::Affine { slope, limit: last.1 },
        None => {
            let k = values.len() - 1;
            // a single-point chain keeps the smaller end rule of both sides
            values[k] = if k == 0 && sl.is_none() {
                end_value(f, last.0, d.lo_closed && d.hi_closed)
            } else {
                end_value(f, last.0, d.hi_closed)
            };
            Tail::PosInf
        }
    };
    PwlFunction::new(breakpoints, values, segments, left, right).expect("hull data is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::{pointwise_min, sum, weighted_sum};

    fn ind(lo: f64, hi: f64, lc: bool, hc: bool) -> PwlFunction {
        PwlFunction::indicator(Interval::new(lo, hi, lc, hc)).unwrap()
    }

    #[test]
    fn lsc_hull_closes_domain() {
        let f = ind(0.0, 1.0, false, true);
        assert!(f.lsc_hull().approx_eq(&ind(0.0, 1.0, true, true), 0.0));
    }

    #[test]
    fn convex_hull_of_two_vees_has_plateau() {
        let f = pointwise_min(&[PwlFunction::abs_at(0.0, 1.0), PwlFunction::abs_at(2.0, 1.0)]).unwrap();
        let h = f.convex_hull();
        let expected = PwlFunction::from_slopes(&[0.0, 2.0], 0.0, &[-1.0, 0.0, 1.0]).unwrap();
        assert!(h.structurally_eq(&expected, 1e-12));
        assert!(h.is_gamma0());
    }

    #[test]
    fn gamma0_fixed_point() {
        let f = PwlFunction::abs_at(0.0, 1.0);
        assert!(f.closed_convex_hull().structurally_eq(&f, 1e-12));
    }

    #[test]
    fn convex_hull_keeps_open_ends() {
        let f = ind(0.0, 1.0, false, false);
        assert!(f.convex_hull().approx_eq(&f, 0.0));
        assert!(f.closed_convex_hull().approx_eq(&ind(0.0, 1.0, true, true), 0.0));
        let pts = pointwise_min(&[PwlFunction::point_indicator(-1.0), PwlFunction::point_indicator(1.0)]).unwrap();
        assert!(pts.convex_hull().approx_eq(&ind(-1.0, 1.0, true, true), 0.0));
    }

    #[test]
    fn hull_of_raised_endpoint() {
        // f = x on [0, 1] with f(0) = 5: the hull keeps the jump at the end
        let mut f = sum(&PwlFunction::affine(1.0, 0.0), &ind(0.0, 1.0, true, true));
        let i = f.breakpoints().iter().position(|&x| x == 0.0).unwrap();
        f.values[i] = ExtReal::new(5.0);
        let h = f.convex_hull();
        assert_eq!(h.evaluate(0.0), ExtReal::new(5.0));
        assert_eq!(h.evaluate(0.5), ExtReal::new(0.5));
        assert_eq!(h.closed_convex_hull().evaluate(0.0), ExtReal::ZERO);
    }

    #[test]
    fn unbounded_envelope_is_neg_inf() {
        let f = pointwise_min(&[PwlFunction::affine(1.0, 0.0), PwlFunction::affine(-1.0, 0.0)]).unwrap();
        assert!(f.convex_hull().approx_eq(&PwlFunction::constant(ExtReal::NEG_INF), 0.0));
    }

    #[test]
    fn improper_hull_shape() {
        let f = weighted_sum(
            &[0.5, 0.5],
            &[ind(0.0, 1.0, true, true), PwlFunction::constant(ExtReal::NEG_INF)],
        )
        .unwrap();
        let h = f.convex_hull();
        assert!(h.approx_eq(&f, 0.0));
        let mut g = ind(0.0, 2.0, true, true);
        g.values[0] = ExtReal::new(3.0);
        let g = pointwise_min(&[
            g,
            sum(
                &PwlFunction::constant(ExtReal::NEG_INF),
                &PwlFunction::point_indicator(1.0),
            ),
        ])
        .unwrap();
        let h = g.convex_hull();
        assert_eq!(h.evaluate(0.0), ExtReal::new(3.0));
        assert_eq!(h.evaluate(0.5), ExtReal::NEG_INF);
        assert_eq!(h.evaluate(2.0), ExtReal::ZERO);
        assert_eq!(h.evaluate(2.5), ExtReal::POS_INF);
        assert_eq!(h.closed_convex_hull().evaluate(0.0), ExtReal::NEG_INF);
    }

    #[test]
    fn half_line_hulls() {
        // max(x, 0) restricted to x ≥ −1 with a bump
        let f = PwlFunction::from_vertices(
            &[(-1.0, 0.0), (0.0, 2.0), (1.0, 1.0)],
            Tail::PosInf,
            Tail::Affine { slope: 1.0, limit: 1.0 },
        )
        .unwrap();
        let h = f.convex_hull();
        assert_eq!(h.evaluate(-1.0), ExtReal::ZERO);
        assert_eq!(h.evaluate(0.0), ExtReal::new(0.5));
        assert_eq!(h.evaluate(3.0), ExtReal::new(3.0));
        assert_eq!(h.evaluate(-2.0), ExtReal::POS_INF);
        assert!(h.is_gamma0());
    }
}
