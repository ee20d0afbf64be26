//! Legendre–Fenchel conjugation of piecewise-linear functions, a brute-force
//! grid oracle, conjugate calculus checks and the Lipschitz envelope.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::extreal::{fold_inf, fold_sup, ExtReal};
use crate::funcrep::{pointwise_max, pointwise_min, sum, GridFunction, PwlFunction, Segment, Tail, MERGE_TOL};

/// A function with its conjugate.
#[derive(Clone, Debug, Serialize)]
pub struct ConjugatePair {
    pub primal: PwlFunction,
    pub dual: PwlFunction,
}

impl ConjugatePair {
    pub fn new(primal: PwlFunction) -> Self {
        let dual = conjugate(&primal);
        ConjugatePair { primal, dual }
    }
}

/// Outcome of checking one identity.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub hypothesis_ok: bool,
    pub lhs: Value,
    pub rhs: Value,
    pub max_discrepancy: ExtReal,
    pub witnesses: Vec<f64>,
    /// `None` when the hypothesis failed and nothing was asserted.
    pub holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentityReport {
    fn compare(identity: &str, lhs: &PwlFunction, rhs: &PwlFunction, tol: f64) -> Self {
        let (d, x) = lhs.discrepancy_witness(rhs);
        IdentityReport {
            identity: identity.to_string(),
            hypothesis_ok: true,
            lhs: to_value(lhs),
            rhs: to_value(rhs),
            max_discrepancy: ExtReal::new(d),
            witnesses: vec![x],
            holds: Some(d <= tol),
            note: None,
        }
    }

    fn vacuous(identity: &str, lhs: Value, rhs: Value, note: &str) -> Self {
        IdentityReport {
            identity: identity.to_string(),
            hypothesis_ok: false,
            lhs,
            rhs,
            max_discrepancy: ExtReal::ZERO,
            witnesses: vec![],
            holds: None,
            note: Some(note.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.holds != Some(false)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Exact conjugate `s ↦ sup_x (s·x − f(x))`.
pub fn conjugate(f: &PwlFunction) -> PwlFunction {
    if f.takes_neg_inf() {
        return PwlFunction::constant(ExtReal::POS_INF);
    }
    if f.is_identically_pos_inf() {
        return PwlFunction::constant(ExtReal::NEG_INF);
    }
    let g = f.closed_convex_hull().canonical();
    if g.takes_neg_inf() {
        return PwlFunction::constant(ExtReal::POS_INF);
    }
    conjugate_closed_convex(&g)
}

/// Conjugate of a proper closed convex `g` in canonical form. Slopes of `g`
/// become breakpoints of the result and vertices of `g` become its slopes.
fn conjugate_closed_convex(g: &PwlFunction) -> PwlFunction {
    let verts: Vec<(f64, f64)> = g
        .breakpoints()
        .iter()
        .zip(g.values())
        .filter_map(|(&x, v)| v.finite().map(|y| (x, y)))
        .collect();
    let k = verts.len() - 1;
    let tail_slope = |t: Tail| match t {
        Tail::Affine { slope, .. } => Some(slope),
        _ => None,
    };
    let sl = tail_slope(g.left_tail());
    let sr = tail_slope(g.right_tail());
    let slope = |j: usize| (verts[j].1 - verts[j - 1].1) / (verts[j].0 - verts[j - 1].0);
    // (lo, hi, vertex): slopes on which `vertex` attains the supremum
    let pieces: Vec<(f64, f64, usize)> = (0..=k)
        .map(|j| {
            let lo = if j == 0 {
                sl.unwrap_or(f64::NEG_INFINITY)
            } else {
                slope(j)
            };
            let hi = if j == k {
                sr.unwrap_or(f64::INFINITY)
            } else {
                slope(j + 1)
            };
            (lo, hi, j)
        })
        .filter(|&(lo, hi, _)| hi - lo > MERGE_TOL)
        .collect();
    let val = |s: f64, j: usize| s * verts[j].0 - verts[j].1;
    if pieces.is_empty() {
        let s = sl.or(sr).expect("an affine piece has a tail");
        return PwlFunction::new(
            vec![s],
            vec![ExtReal::new(val(s, 0))],
            vec![],
            Tail::PosInf,
            Tail::PosInf,
        )
        .expect("point indicator");
    }
    let (first_lo, _, v0) = pieces[0];
    let (_, last_hi, vl) = pieces[pieces.len() - 1];
    if first_lo == f64::NEG_INFINITY && last_hi == f64::INFINITY && pieces.len() == 1 {
        return PwlFunction::affine(verts[v0].0, -verts[v0].1);
    }
    let mut bps = Vec::new();
    let mut values = Vec::new();
    let mut segments = Vec::new();
    if first_lo.is_finite() {
        bps.push(first_lo);
        values.push(ExtReal::new(val(first_lo, v0)));
    }
    for &(lo, hi, j) in &pieces {
        if hi.is_finite() {
            if lo.is_finite() {
                segments.push(Segment::Affine {
                    left: val(lo, j),
                    right: val(hi, j),
                });
            }
            bps.push(hi);
            values.push(ExtReal::new(val(hi, j)));
        }
    }
    let left = if first_lo.is_finite() {
        Tail::PosInf
    } else {
        Tail::Affine {
            slope: verts[v0].0,
            limit: val(bps[0], v0),
        }
    };
    let right = if last_hi.is_finite() {
        Tail::PosInf
    } else {
        Tail::Affine {
            slope: verts[vl].0,
            limit: val(*bps.last().unwrap(), vl),
        }
    };
    PwlFunction::new(bps, values, segments, left, right).expect("conjugate data is valid")
}

/// Brute-force conjugate over the nodes of a 1-D grid function.
pub fn conjugate_grid(f: &GridFunction, dual_axis: &[f64]) -> Result<GridFunction> {
    if f.dim() != 1 {
        return Err(Error::InvalidGrid("conjugate_grid needs a 1-D grid".into()));
    }
    let xs = &f.axes()[0];
    let values = dual_axis
        .iter()
        .map(|&s| fold_sup(xs.iter().zip(f.values()).map(|(&x, &v)| ExtReal::new(s * x) + (-v))))
        .collect();
    GridFunction::one_d(dual_axis.to_vec(), values)
}

pub fn biconjugate(f: &PwlFunction) -> PwlFunction {
    conjugate(&conjugate(f))
}

/// `f** = cl co f` when the closed convex hull is proper, and `f** = f` on
/// Γ₀ inputs.
pub fn check_moreau(f: &PwlFunction, tol: f64) -> IdentityReport {
    let fss = biconjugate(f);
    let hull = f.closed_convex_hull();
    if !hull.is_proper() {
        return IdentityReport::vacuous(
            "moreau",
            to_value(&fss),
            to_value(&hull),
            "improper hull: Moreau hypothesis violated",
        );
    }
    let mut report = IdentityReport::compare("moreau", &fss, &hull, tol);
    if f.is_gamma0() {
        let fixed = fss.structurally_eq(f, tol);
        let (d, x) = fss.discrepancy_witness(f);
        report.identity = "moreau_gamma0".into();
        report.rhs = to_value(f);
        report.max_discrepancy = report.max_discrepancy.max(ExtReal::new(d));
        report.witnesses.push(x);
        report.holds = Some(report.holds == Some(true) && fixed);
    }
    report
}

/// `(inf_t f_t)* = sup_t f_t*`, unconditionally.
pub fn conj_of_inf(family: &[PwlFunction], tol: f64) -> Result<IdentityReport> {
    let lhs = conjugate(&pointwise_min(family)?);
    let conjs: Vec<PwlFunction> = family.iter().map(conjugate).collect();
    let rhs = pointwise_max(&conjs)?;
    Ok(IdentityReport::compare("conj_of_inf", &lhs, &rhs, tol))
}

/// `(sup_t f_t)* = cl co (inf_t f_t*)` for Γ₀ members with Γ₀ supremum.
pub fn conj_of_sup(family: &[PwlFunction], tol: f64) -> Result<IdentityReport> {
    let top = pointwise_max(family)?;
    let lhs = conjugate(&top);
    let conjs: Vec<PwlFunction> = family.iter().map(conjugate).collect();
    let rhs = pointwise_min(&conjs)?.closed_convex_hull();
    if !(family.iter().all(PwlFunction::is_gamma0) && top.is_gamma0()) {
        return Ok(IdentityReport::vacuous(
            "conj_of_sup",
            to_value(&lhs),
            to_value(&rhs),
            "hypothesis failed: a member or the supremum is not in Γ₀",
        ));
    }
    Ok(IdentityReport::compare("conj_of_sup", &lhs, &rhs, tol))
}

/// The conjugate does not see hull operations: `f* = (co f)* = (cl co f)*`.
pub fn check_hull_invariance(f: &PwlFunction, tol: f64) -> IdentityReport {
    let a = conjugate(f);
    let b = conjugate(&f.convex_hull());
    let c = conjugate(&f.closed_convex_hull());
    let mut r = IdentityReport::compare("conjugate_hull_invariance", &a, &b, tol);
    let (d, x) = a.discrepancy_witness(&c);
    r.max_discrepancy = r.max_discrepancy.max(ExtReal::new(d));
    r.witnesses.push(x);
    r.holds = Some(r.max_discrepancy <= ExtReal::new(tol));
    r
}

/// The infimum does not see hull operations either.
pub fn check_infimum_invariance(f: &PwlFunction, tol: f64) -> IdentityReport {
    let vals = [
        f.infimum().value,
        f.lsc_hull().infimum().value,
        f.convex_hull().infimum().value,
        f.closed_convex_hull().infimum().value,
    ];
    let worst = vals.iter().map(|v| v.discrepancy(vals[0])).fold(0.0, f64::max);
    IdentityReport {
        identity: "infimum_hull_invariance".into(),
        hypothesis_ok: true,
        lhs: to_value(&vals[0]),
        rhs: to_value(&vals[1..].to_vec()),
        max_discrepancy: ExtReal::new(worst),
        witnesses: vec![],
        holds: Some(worst <= tol),
        note: None,
    }
}

/// Fenchel–Young: `f(x) + f*(s) ≥ s·x` on every probe pair.
pub fn fenchel_young_holds(f: &PwlFunction, fs: &PwlFunction, xs: &[f64], ss: &[f64], tol: f64) -> bool {
    xs.iter().all(|&x| {
        ss.iter()
            .all(|&s| ExtReal::new(s * x).approx_le(f.evaluate(x) + fs.evaluate(s), tol))
    })
}

/// `inf_x R·|x0 − x| + f(x)`, exact.
pub fn lipschitz_envelope(f: &PwlFunction, r: f64, x0: f64) -> Result<ExtReal> {
    check_radius(r)?;
    Ok(sum(f, &PwlFunction::abs_at(x0, r)).infimum().value)
}

/// Grid version of [`lipschitz_envelope`].
pub fn lipschitz_envelope_grid(f: &GridFunction, r: f64, x0: f64) -> Result<ExtReal> {
    check_radius(r)?;
    if f.dim() != 1 {
        return Err(Error::InvalidGrid("envelope needs a 1-D grid".into()));
    }
    Ok(fold_inf(
        f.axes()[0]
            .iter()
            .zip(f.values())
            .map(|(&x, &v)| ExtReal::new(r * (x0 - x).abs()) + v),
    ))
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "envelope radius must be positive, got {r}"
        )))
    }
}

/// Exact conjugate compared against the grid oracle on interior dual points.
#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub max_discrepancy: f64,
    pub worst_slope: Option<f64>,
    pub dual_points: usize,
}

/// Samples `f` on a uniform axis of `n` nodes around its breakpoints, plus
/// every breakpoint and points `1e-9` to either side, then compares the
/// exact conjugate with the brute-force one on slopes kept `δ = margin·range`
/// away from the extremes of the admissible slope range.
pub fn compare_with_oracle(f: &PwlFunction, n: usize, dual_n: usize, margin: f64) -> Result<OracleComparison> {
    let bps = f.breakpoints();
    let (a, b) = (bps[0], bps[bps.len() - 1]);
    let w = 1.0 + (b - a);
    let mut axis = crate::funcrep::linspace(a - w, b + w, n.max(2));
    for &x in bps {
        axis.extend([x - 1e-9, x, x + 1e-9]);
    }
    axis.sort_by(f64::total_cmp);
    axis.dedup_by(|p, q| *p - *q <= 1e-13);
    let grid = GridFunction::sample(f, &axis)?;
    let mut slopes: Vec<f64> = Vec::new();
    for i in 0..bps.len().saturating_sub(1) {
        if let Segment::Affine { left, right } = f.segments()[i] {
            slopes.push((right - left) / (bps[i + 1] - bps[i]));
        }
    }
    let tail = |t: Tail| match t {
        Tail::Affine { slope, .. } => Some(slope),
        _ => None,
    };
    let (sl, sr) = (tail(f.left_tail()), tail(f.right_tail()));
    slopes.extend(sl);
    slopes.extend(sr);
    let smin = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = if slopes.is_empty() { (-1.0, 1.0) } else { (smin, smax) };
    if hi - lo < 1.0 {
        lo -= 0.5;
        hi += 0.5;
    }
    let lo = sl.unwrap_or(lo);
    let hi = sr.unwrap_or(hi);
    let delta = margin * (hi - lo);
    if hi - lo <= 2.0 * delta || hi <= lo {
        return Ok(OracleComparison {
            max_discrepancy: 0.0,
            worst_slope: None,
            dual_points: 0,
        });
    }
    let dual = crate::funcrep::linspace(lo + delta, hi - delta, dual_n.max(2));
    let exact = conjugate(f);
    let brute = conjugate_grid(&grid, &dual)?;
    let mut worst = (0f64, None);
    for (s, v) in dual.iter().zip(brute.values()) {
        let e = exact.evaluate(*s);
        let d = match (e.finite(), v.finite()) {
            (Some(p), Some(q)) => (p - q).abs(),
            _ if e == *v => 0.0,
            _ => f64::INFINITY,
        };
        if d > worst.0 {
            worst = (d, Some(*s));
        }
    }
    Ok(OracleComparison {
        max_discrepancy: worst.0,
        worst_slope: worst.1,
        dual_points: dual.len(),
    })
}
