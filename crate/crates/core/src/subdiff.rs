//! ε-subdifferentials of convex piecewise-linear functions, a grid oracle
//! and the max rule over simplex mixtures.

use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::conjugate::conjugate;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcrep::{pointwise_max, sum, weighted_sum, Element, GridFunction, Piece, PwlFunction};
use crate::minimax::simplex::{self, SimplexPoint, MESH_BUDGET};
use crate::minimax::{lp_dual, BifunctionFamily};
use crate::status::Status;

/// Closed interval of slopes. Serializes as `[lo, hi]` or `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubdiffInterval {
    pub lo: ExtReal,
    pub hi: ExtReal,
    pub empty: bool,
}

impl SubdiffInterval {
    pub const EMPTY: SubdiffInterval = SubdiffInterval {
        lo: ExtReal::POS_INF,
        hi: ExtReal::NEG_INF,
        empty: true,
    };

    pub fn new(lo: ExtReal, hi: ExtReal) -> Self {
        if lo > hi {
            SubdiffInterval::EMPTY
        } else {
            SubdiffInterval { lo, hi, empty: false }
        }
    }

    pub fn whole_line() -> Self {
        SubdiffInterval::new(ExtReal::NEG_INF, ExtReal::POS_INF)
    }

    pub fn point(s: f64) -> Self {
        SubdiffInterval::new(ExtReal::new(s), ExtReal::new(s))
    }

    pub fn contains(&self, s: f64) -> bool {
        !self.empty && self.lo <= ExtReal::new(s) && ExtReal::new(s) <= self.hi
    }

    /// `self ⊆ other` with endpoints compared up to `tol` (relative).
    pub fn subset_of(&self, other: &SubdiffInterval, tol: f64) -> bool {
        self.empty || (!other.empty && other.lo.approx_le(self.lo, tol) && self.hi.approx_le(other.hi, tol))
    }

    /// Distance from `s` to the interval (`+∞` when empty).
    pub fn distance(&self, s: ExtReal) -> f64 {
        if self.empty {
            return f64::INFINITY;
        }
        if s < self.lo {
            if s.is_neg_inf() {
                return f64::INFINITY;
            }
            return self.lo.to_f64() - s.to_f64();
        }
        if s > self.hi {
            if s.is_pos_inf() {
                return f64::INFINITY;
            }
            return s.to_f64() - self.hi.to_f64();
        }
        0.0
    }
}

impl Serialize for SubdiffInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.empty {
            return s.serialize_none();
        }
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.lo)?;
        seq.serialize_element(&self.hi)?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for SubdiffInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Option<[ExtReal; 2]> = Option::deserialize(d)?;
        Ok(match v {
            None => SubdiffInterval::EMPTY,
            Some([lo, hi]) => SubdiffInterval::new(lo, hi),
        })
    }
}

/// `∂_ε f(x)` for convex `f`, via `s ∈ ∂_ε f(x) ⇔ f*(s) − x·s ≤ ε − f(x)`.
pub fn eps_subdifferential(f: &PwlFunction, x: f64, eps: f64) -> Result<SubdiffInterval> {
    if !f.is_convex() {
        return Err(Error::NotConvex);
    }
    if eps < 0.0 {
        return Ok(SubdiffInterval::EMPTY);
    }
    let fx = f.evaluate(x);
    if fx.is_pos_inf() {
        return Ok(SubdiffInterval::EMPTY);
    }
    if fx.is_neg_inf() {
        return Ok(SubdiffInterval::whole_line());
    }
    let h = sum(&conjugate(f), &PwlFunction::affine(-x, 0.0));
    let level = eps - fx.to_f64();
    Ok(sublevel(&h, level, 1e-12 * 1f64.max(level.abs()).max(x.abs())))
}

/// `{s : h(s) ≤ c}` for convex lsc `h`, which is a closed interval. Values
/// within `tol` of `c` count at breakpoints and on flat pieces; sloped pieces
/// cross `c` exactly.
fn sublevel(h: &PwlFunction, c: f64, tol: f64) -> SubdiffInterval {
    let cv = ExtReal::new(c + tol);
    let mut lo: Option<ExtReal> = None;
    let mut hi = ExtReal::NEG_INF;
    for el in h.elements() {
        let part = match el {
            Element::Point { x, value } => (value <= cv).then_some((x, x)),
            Element::Open { lo, hi, piece } => open_sublevel(lo, hi, piece, c, tol),
        };
        if let Some((a, b)) = part {
            if lo.is_none() {
                lo = Some(ExtReal::new(a));
            }
            hi = ExtReal::new(b);
        }
    }
    match lo {
        Some(lo) => SubdiffInterval::new(lo, hi),
        None => SubdiffInterval::EMPTY,
    }
}

/// Closure of `{s ∈ (a, b) : piece(s) ≤ c}` as `(inf, sup)`.
fn open_sublevel(a: f64, b: f64, piece: Piece, c: f64, tol: f64) -> Option<(f64, f64)> {
    match piece {
        Piece::PosInf => None,
        Piece::NegInf => Some((a, b)),
        Piece::Line { at, value, slope } => {
            let flat = slope.abs() <= crate::funcrep::SLOPE_EPS;
            if flat {
                return (value <= c + tol).then_some((a, b));
            }
            let root = at + (c - value) / slope;
            let (lo, hi) = if slope > 0.0 {
                (a, root.min(b))
            } else {
                (root.max(a), b)
            };
            (lo < hi).then_some((lo, hi))
        }
    }
}

/// Probe slopes `s` with `f(y) ≥ f(x) + s(y − x) − ε` at every node `y`.
pub fn eps_subdiff_oracle(f: &GridFunction, x: f64, eps: f64, slope_probes: &[f64]) -> Result<Vec<f64>> {
    if f.dim() != 1 {
        return Err(Error::InvalidGrid("the oracle needs a 1-D grid".into()));
    }
    let fx = f
        .at(x)
        .ok_or_else(|| Error::InvalidArgument(format!("{x} is not a grid node")))?;
    if eps < 0.0 || fx.is_pos_inf() {
        return Ok(vec![]);
    }
    let nodes = &f.axes()[0];
    Ok(slope_probes
        .iter()
        .copied()
        .filter(|&s| {
            nodes.iter().zip(f.values()).all(|(&y, &fy)| {
                let rhs = fx + ExtReal::new(s * (y - x) - eps);
                rhs.approx_le(fy, 1e-12)
            })
        })
        .collect())
}

/// Controls the λ-mesh used for the union side of the max rule.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaSampler {
    pub start_density: usize,
    pub max_density: usize,
    /// Allowed distance between a left-side endpoint and the union.
    pub tol: f64,
    /// Add, for each finite left-side endpoint `s`, a maximizer of the
    /// tilted family `fₖ − s·y`, which is known to cover `s`.
    pub certificates: bool,
}

impl Default for LambdaSampler {
    fn default() -> Self {
        LambdaSampler {
            start_density: 8,
            max_density: 256,
            tol: 1e-6,
            certificates: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxRuleReport {
    pub x: f64,
    pub eps: f64,
    pub hypotheses: BTreeMap<String, bool>,
    pub lhs: SubdiffInterval,
    /// Distinct nonempty members of the union, in sample order.
    pub rhs_cover: Vec<SubdiffInterval>,
    pub inclusion_ok: bool,
    pub endpoint_gap: ExtReal,
    pub density: usize,
    pub samples: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `∂_ε (max fₖ)(x) = ⋃_λ ∂_{ε + f_λ(x) − f(x)} f_λ(x)`.
pub fn max_rule(funcs: &[PwlFunction], x: f64, eps: f64, sampler: &LambdaSampler) -> Result<MaxRuleReport> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "eps must be a nonnegative real, got {eps}"
        )));
    }
    let top = pointwise_max(funcs)?;
    let n = funcs.len();
    let mut hypotheses = BTreeMap::new();
    let convex = funcs.iter().all(PwlFunction::is_convex);
    let proper = funcs.iter().all(PwlFunction::is_proper);
    let lsc = funcs.iter().all(PwlFunction::is_lsc);
    let dom = !top.is_identically_pos_inf();
    hypotheses.insert("all_convex".to_string(), convex);
    hypotheses.insert("all_proper".to_string(), proper);
    hypotheses.insert("all_lsc".to_string(), lsc);
    hypotheses.insert("dom_nonempty".to_string(), dom);
    let fx = top.evaluate(x);
    let vacuous = |lhs: SubdiffInterval, note: &str, hypotheses| MaxRuleReport {
        x,
        eps,
        hypotheses,
        lhs,
        rhs_cover: vec![],
        inclusion_ok: true,
        endpoint_gap: ExtReal::ZERO,
        density: 0,
        samples: 0,
        status: Status::Vacuous,
        notes: vec![note.to_string()],
    };
    if !(convex && dom && (proper || lsc)) {
        let lhs = if convex {
            eps_subdifferential(&top, x, eps)?
        } else {
            SubdiffInterval::EMPTY
        };
        return Ok(vacuous(
            lhs,
            "hypothesis failed: members must be convex and all proper or all lsc",
            hypotheses,
        ));
    }
    let lhs = eps_subdifferential(&top, x, eps)?;
    if !fx.is_finite() {
        return Ok(vacuous(lhs, "formula vacuous at x: f(x) is infinite", hypotheses));
    }
    let member = |l: &SimplexPoint| -> SubdiffInterval {
        let f_l = weighted_sum(l.weights(), funcs).expect("weights match");
        let fl_x = f_l.evaluate(x);
        let shift = ExtReal::new(eps) + fl_x + (-fx);
        let rounding = 1e-12 * (1.0 + eps + fx.to_f64().abs() + fl_x.to_f64().abs());
        match shift.finite() {
            Some(e) if e >= -rounding => {
                eps_subdifferential(&f_l, x, e.max(0.0)).expect("mixtures of convex functions are convex")
            }
            _ => SubdiffInterval::EMPTY,
        }
    };
    let mut certificates = Vec::new();
    if sampler.certificates && !lhs.empty {
        let fam = BifunctionFamily::unrestricted(funcs.to_vec())?;
        for e in [lhs.lo, lhs.hi] {
            if let Some(s) = e.finite() {
                certificates.push(lp_dual(&fam.tilted(s).generators).lambda);
            }
        }
    }
    let cap = simplex::density_cap(n, sampler.max_density.max(sampler.start_density), MESH_BUDGET);
    let mut d = sampler.start_density.max(1);
    loop {
        let mut probes = simplex::mesh(n, d);
        probes.extend(certificates.iter().cloned());
        let members = crate::par::map(&probes, member);
        let inclusion_ok = members.iter().all(|m| m.subset_of(&lhs, 1e-9));
        let gap = endpoint_gap(&lhs, &members);
        if gap <= sampler.tol || d * 2 > cap {
            let mut cover: Vec<SubdiffInterval> = Vec::new();
            for m in members.into_iter().filter(|m| !m.empty) {
                if !cover.iter().any(|c| c.lo == m.lo && c.hi == m.hi) {
                    cover.push(m);
                }
            }
            let ok = inclusion_ok && gap <= sampler.tol;
            return Ok(MaxRuleReport {
                x,
                eps,
                hypotheses,
                lhs,
                rhs_cover: cover,
                inclusion_ok,
                endpoint_gap: ExtReal::new(gap),
                density: d,
                samples: probes.len(),
                status: Status::from_check(ok),
                notes: vec![],
            });
        }
        d *= 2;
    }
}

/// Largest distance from an endpoint of `lhs` to the union of `members`.
fn endpoint_gap(lhs: &SubdiffInterval, members: &[SubdiffInterval]) -> f64 {
    if lhs.empty {
        return 0.0;
    }
    [lhs.lo, lhs.hi]
        .iter()
        .map(|&e| {
            members
                .iter()
                .map(|m| {
                    if e.is_finite() {
                        m.distance(e)
                    } else if !m.empty && (m.lo == e || m.hi == e) {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::{linspace, Interval};

    fn iv(lo: f64, hi: f64) -> SubdiffInterval {
        SubdiffInterval::new(ExtReal::new(lo), ExtReal::new(hi))
    }

    #[test]
    fn abs_examples() {
        let f = PwlFunction::abs_at(0.0, 1.0);
        assert_eq!(eps_subdifferential(&f, 0.0, 0.0).unwrap(), iv(-1.0, 1.0));
        let at1 = eps_subdifferential(&f, 1.0, 0.0).unwrap();
        assert!(at1.lo.approx_eq(ExtReal::new(1.0), 1e-9) && at1.hi == ExtReal::new(1.0));
        assert!(eps_subdifferential(&f, 0.0, -0.1).unwrap().empty);
        // |y| ≥ 1 + s(y − 1) − 1 for all y iff s ∈ [0, 1]
        let wide = eps_subdifferential(&f, 1.0, 1.0).unwrap();
        assert!(wide.lo.approx_eq(ExtReal::ZERO, 1e-9) && wide.hi == ExtReal::new(1.0));
    }

    #[test]
    fn domain_edges() {
        let f = PwlFunction::indicator(Interval::closed(0.0, 1.0)).unwrap();
        let d = eps_subdifferential(&f, 0.0, 0.0).unwrap();
        assert_eq!((d.lo, d.hi), (ExtReal::NEG_INF, ExtReal::ZERO));
        assert!(eps_subdifferential(&f, 2.0, 1.0).unwrap().empty);
        let g = PwlFunction::constant(ExtReal::NEG_INF);
        assert_eq!(
            eps_subdifferential(&g, 0.0, 0.0).unwrap(),
            SubdiffInterval::whole_line()
        );
    }

    #[test]
    fn rejects_non_convex() {
        let f = PwlFunction::abs_at(0.0, -1.0);
        assert!(matches!(eps_subdifferential(&f, 0.0, 0.0), Err(Error::NotConvex)));
    }

    #[test]
    fn oracle_examples() {
        let axis = linspace(-2.0, 2.0, 9);
        let g = GridFunction::sample(&PwlFunction::abs_at(0.0, 1.0), &axis).unwrap();
        let probes = [-2.0, -1.0, 0.0, 1.0, 2.0];
        assert_eq!(eps_subdiff_oracle(&g, 0.0, 0.0, &probes).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(eps_subdiff_oracle(&g, 0.0, 100.0, &probes).unwrap(), probes.to_vec());
        let ind = PwlFunction::indicator(Interval::closed(-1.0, 1.0)).unwrap();
        let h = GridFunction::sample(&ind, &axis).unwrap();
        assert!(eps_subdiff_oracle(&h, 2.0, 0.0, &probes).unwrap().is_empty());
        assert!(eps_subdiff_oracle(&h, 0.3, 0.0, &probes).is_err());
    }

    #[test]
    fn max_rule_lines() {
        let funcs = [PwlFunction::affine(1.0, 0.0), PwlFunction::affine(-1.0, 0.0)];
        let r = max_rule(&funcs, 0.0, 0.0, &LambdaSampler::default()).unwrap();
        assert_eq!(r.lhs, iv(-1.0, 1.0));
        assert_eq!(r.status, Status::Pass);
        let r = max_rule(&funcs, 2.0, 0.0, &LambdaSampler::default()).unwrap();
        assert!(r.lhs.lo.approx_eq(ExtReal::new(1.0), 1e-9));
        assert!(r.rhs_cover.iter().all(|m| m.subset_of(&iv(1.0, 1.0), 1e-9)));
        assert_eq!(r.status, Status::Pass);
    }

    #[test]
    fn max_rule_singleton() {
        let f = PwlFunction::abs_at(1.0, 2.0);
        let r = max_rule(std::slice::from_ref(&f), 0.0, 0.5, &LambdaSampler::default()).unwrap();
        assert_eq!(r.rhs_cover, vec![r.lhs]);
        assert_eq!(r.status, Status::Pass);
    }

    #[test]
    fn max_rule_vacuous_off_domain() {
        let funcs = [
            PwlFunction::indicator(Interval::closed(0.0, 1.0)).unwrap(),
            PwlFunction::affine(1.0, 0.0),
        ];
        let r = max_rule(&funcs, 3.0, 0.0, &LambdaSampler::default()).unwrap();
        assert_eq!(r.status, Status::Vacuous);
    }

    #[test]
    fn interval_json() {
        assert_eq!(serde_json::to_string(&iv(-1.0, 1.0)).unwrap(), "[-1.0,1.0]");
        assert_eq!(serde_json::to_string(&SubdiffInterval::EMPTY).unwrap(), "null");
        let back: SubdiffInterval = serde_json::from_str(r#"["-inf", 2]"#).unwrap();
        assert_eq!(back.lo, ExtReal::NEG_INF);
    }
}
