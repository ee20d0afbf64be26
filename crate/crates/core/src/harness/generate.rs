//! Seeded random scenario content. Every coordinate is a dyadic rational so
//! payloads round-trip through JSON without drift.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::scenario::{
    ConjIdentity, ConjugacyPayload, DualityPayload, EnvelopePayload, Kind, MarginalPayload, Scenario, SubdiffPayload,
};
use crate::extreal::ExtReal;
use crate::funcrep::{pointwise_min, GridFunction, Interval, PwlFunction, Segment, Tail};
use crate::minimax::{BifunctionFamily, DualMode};
use crate::subdiff::LambdaSampler;

pub const LO: f64 = -10.0;
pub const HI: f64 = 10.0;
/// Every generated family keeps this interval inside each domain.
pub const CORE: (f64, f64) = (-1.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Finite continuous convex generators, solved by the exact LP.
    Lp,
    /// Lsc convex generators, one of them improper.
    LscImproper,
    /// Proper convex generators, at least one not lsc.
    ProperNonLsc,
    /// Every generator takes `−∞` somewhere, so no section is in Γ₀.
    EmptyA0,
    /// Pairwise disjoint domains.
    EmptyDomain,
    /// A generator that is infinite somewhere on the restriction.
    Infinite,
    NonDecreasing,
    /// Envelope base point outside the domain.
    Outside,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_non_lsc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_improper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity: Option<ConjIdentity>,
}

impl GenParams {
    pub fn with_n(n: usize) -> Self {
        GenParams {
            n: Some(n),
            ..GenParams::default()
        }
    }

    pub fn with_variant(v: Variant) -> Self {
        GenParams {
            variant: Some(v),
            ..GenParams::default()
        }
    }
}

/// Generator seeded by `seed`, on a stream private to `kind`.
pub fn rng_for(kind: Kind, seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(Kind::ALL.iter().position(|k| *k == kind).unwrap_or(0) as u64 + 1);
    rng
}

fn q(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

fn coord<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    q(rng.gen_range(lo..=hi), 1.0 / 64.0).clamp(lo, hi)
}

fn slope<R: Rng>(rng: &mut R) -> f64 {
    q(rng.gen_range(-5.0..=5.0), 1.0 / 16.0)
}

fn height<R: Rng>(rng: &mut R) -> f64 {
    q(rng.gen_range(-5.0..=5.0), 1.0 / 16.0)
}

/// `k` distinct sorted dyadic points strictly inside `(lo, hi)`.
fn interior_points<R: Rng>(rng: &mut R, lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..k)
        .map(|_| coord(rng, lo, hi))
        .filter(|&x| x > lo + 1.0 / 64.0 && x < hi - 1.0 / 64.0)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Convex function with the given domain ends (`±∞` for unbounded sides),
/// built from sorted random slopes.
fn convex_on<R: Rng>(rng: &mut R, lo: f64, hi: f64, interior: usize) -> PwlFunction {
    let a = if lo.is_finite() { lo } else { LO };
    let b = if hi.is_finite() { hi } else { HI };
    if lo.is_finite() && hi.is_finite() && hi - lo < 1.0 / 64.0 {
        let v = ExtReal::new(height(rng));
        return PwlFunction::new(vec![lo], vec![v], vec![], Tail::PosInf, Tail::PosInf).expect("single point");
    }
    let mut bps = interior_points(rng, a, b, interior);
    if lo.is_finite() {
        bps.insert(0, lo);
    }
    if hi.is_finite() {
        bps.push(hi);
    }
    if bps.is_empty() {
        bps.push(coord(rng, -5.0, 5.0));
    }
    let pieces = bps.len() - 1 + usize::from(!lo.is_finite()) + usize::from(!hi.is_finite());
    let mut slopes: Vec<f64> = (0..pieces).map(|_| slope(rng)).collect();
    slopes.sort_by(f64::total_cmp);
    let mut it = slopes.into_iter();
    let left_slope = if lo.is_finite() { None } else { it.next() };
    let y0 = height(rng);
    let mut values = vec![y0];
    let mut segments = Vec::new();
    for w in bps.windows(2) {
        let s = it.next().expect("one slope per segment");
        let prev = *values.last().unwrap();
        let next = prev + s * (w[1] - w[0]);
        segments.push(Segment::Affine {
            left: prev,
            right: next,
        });
        values.push(next);
    }
    let right_slope = if hi.is_finite() { None } else { it.next() };
    let tail = |s: Option<f64>, limit: f64| match s {
        Some(slope) => Tail::Affine { slope, limit },
        None => Tail::PosInf,
    };
    let (first, last) = (values[0], *values.last().unwrap());
    PwlFunction::new(
        bps,
        values.into_iter().map(ExtReal::new).collect(),
        segments,
        tail(left_slope, first),
        tail(right_slope, last),
    )
    .expect("generated convex function is valid")
}

/// Random proper convex lsc function. With `contain = Some((a, b))` the
/// domain includes `[a, b]`.
pub fn random_convex<R: Rng>(rng: &mut R, contain: Option<(f64, f64)>) -> PwlFunction {
    let interior = rng.gen_range(0..=4);
    let (lo, hi) = match contain {
        Some((a, b)) => {
            let lo = if rng.gen_bool(0.5) {
                f64::NEG_INFINITY
            } else {
                coord(rng, LO, a)
            };
            let hi = if rng.gen_bool(0.5) {
                f64::INFINITY
            } else {
                coord(rng, b, HI)
            };
            (lo, hi)
        }
        None => match rng.gen_range(0..20) {
            0..=7 => (f64::NEG_INFINITY, f64::INFINITY),
            8..=10 => (coord(rng, LO, HI - 1.0), f64::INFINITY),
            11..=13 => (f64::NEG_INFINITY, coord(rng, LO + 1.0, HI)),
            14 => {
                let p = coord(rng, LO, HI);
                (p, p)
            }
            _ => {
                let lo = coord(rng, LO, HI - 1.0);
                (lo, coord(rng, lo + 0.5, HI))
            }
        },
    };
    convex_on(rng, lo, hi, interior)
}

/// Random finite continuous convex function on the whole line.
pub fn random_convex_finite<R: Rng>(rng: &mut R) -> PwlFunction {
    let k = rng.gen_range(1..=4);
    convex_on(rng, f64::NEG_INFINITY, f64::INFINITY, k)
}

/// Random proper convex function with bounded domain containing `[a, b]`.
pub fn random_convex_bounded<R: Rng>(rng: &mut R, contain: (f64, f64)) -> PwlFunction {
    let lo = coord(rng, LO, contain.0);
    let hi = coord(rng, contain.1, HI);
    let k = rng.gen_range(0..=3);
    convex_on(rng, lo, hi, k)
}

/// Random finite continuous function on the whole line, usually not convex.
pub fn random_finite<R: Rng>(rng: &mut R) -> PwlFunction {
    let k = rng.gen_range(1..=5);
    let mut xs = interior_points(rng, LO, HI, k + 1);
    if xs.is_empty() {
        xs.push(0.0);
    }
    let verts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, height(rng))).collect();
    let first = verts[0].1;
    let last = verts.last().unwrap().1;
    PwlFunction::from_vertices(
        &verts,
        Tail::Affine {
            slope: slope(rng),
            limit: first,
        },
        Tail::Affine {
            slope: slope(rng),
            limit: last,
        },
    )
    .expect("finite vertices")
}

/// Random proper function, possibly not convex and possibly not lsc:
/// isolated breakpoint values, jumps and `+∞` gaps all occur.
pub fn random_pwl<R: Rng>(rng: &mut R) -> PwlFunction {
    let k = rng.gen_range(1..=5);
    let mut bps = interior_points(rng, LO, HI, k);
    if bps.is_empty() {
        bps.push(coord(rng, -5.0, 5.0));
    }
    let mut segments = Vec::new();
    for _ in 1..bps.len() {
        segments.push(if rng.gen_bool(0.15) {
            Segment::PosInf
        } else if rng.gen_bool(0.6) {
            let l = height(rng);
            Segment::Affine {
                left: l,
                right: height(rng),
            }
        } else {
            Segment::Affine {
                left: f64::NAN,
                right: f64::NAN,
            }
        });
    }
    // NaN marks a segment to be made continuous with its neighbours.
    let values: Vec<f64> = bps.iter().map(|_| height(rng)).collect();
    for (i, s) in segments.iter_mut().enumerate() {
        if let Segment::Affine { left, right } = s {
            if left.is_nan() {
                *left = values[i];
                *right = values[i + 1];
            }
        }
    }
    let mut tail = |limit: f64| -> Tail {
        if rng.gen_bool(0.3) {
            Tail::PosInf
        } else {
            Tail::Affine {
                slope: slope(rng),
                limit,
            }
        }
    };
    let left = tail(values[0]);
    let right = tail(*values.last().unwrap());
    let mut vals: Vec<ExtReal> = values.iter().map(|&v| ExtReal::new(v)).collect();
    for v in vals.iter_mut().skip(1) {
        if rng.gen_bool(0.1) {
            *v = ExtReal::POS_INF;
        }
    }
    PwlFunction::new(bps, vals, segments, left, right).expect("generated function is valid")
}

fn piece_limits(f: &PwlFunction, i: usize) -> (ExtReal, ExtReal) {
    (
        f.limit_from_left(f.breakpoints()[i]),
        f.limit_from_right(f.breakpoints()[i]),
    )
}

/// Raises one breakpoint value above a finite neighbouring limit, so the
/// result is not lsc. Domain endpoints are lifted to `+∞`, which keeps a
/// convex input convex; with `keep_convex` only those are used. `None` when
/// no breakpoint qualifies.
pub fn corrupt_non_lsc<R: Rng>(f: &PwlFunction, rng: &mut R, keep_convex: bool) -> Option<PwlFunction> {
    let mut candidates = Vec::new();
    for i in 0..f.breakpoints().len() {
        let v = f.values()[i];
        let (l, r) = piece_limits(f, i);
        if !v.is_finite() || !(l.is_finite() || r.is_finite()) {
            continue;
        }
        let endpoint = l.is_pos_inf() || r.is_pos_inf();
        if endpoint || !keep_convex {
            candidates.push((i, endpoint));
        }
    }
    let &(i, endpoint) = candidates.choose(rng)?;
    let mut values = f.values().to_vec();
    values[i] = if endpoint {
        ExtReal::POS_INF
    } else {
        let (l, r) = piece_limits(f, i);
        let top = if l.is_finite() { l } else { r }.max(if r.is_finite() { r } else { l });
        ExtReal::new(top.to_f64().max(values[i].to_f64()) + q(rng.gen_range(0.5..2.0), 1.0 / 16.0))
    };
    Some(
        PwlFunction::new(
            f.breakpoints().to_vec(),
            values,
            f.segments().to_vec(),
            f.left_tail(),
            f.right_tail(),
        )
        .expect("same layout"),
    )
}

/// `−∞` on `[c, d]`, `+∞` elsewhere: convex, lsc and improper.
pub fn neg_inf_plateau(c: f64, d: f64) -> PwlFunction {
    if d - c <= 1.0 / 64.0 {
        return PwlFunction::new(vec![c], vec![ExtReal::NEG_INF], vec![], Tail::PosInf, Tail::PosInf).expect("point");
    }
    PwlFunction::new(
        vec![c, d],
        vec![ExtReal::NEG_INF; 2],
        vec![Segment::NegInf],
        Tail::PosInf,
        Tail::PosInf,
    )
    .expect("plateau")
}

/// Replaces `f` by `−∞` on an open random sub-interval of `[a, b]`.
pub fn inject_improper<R: Rng>(f: &PwlFunction, rng: &mut R, within: (f64, f64)) -> PwlFunction {
    let c = coord(rng, within.0, within.1 - 0.25);
    let d = coord(rng, c + 0.125, within.1).max(c + 0.125);
    let hole = PwlFunction::new(
        vec![c, d],
        vec![ExtReal::POS_INF; 2],
        vec![Segment::NegInf],
        Tail::PosInf,
        Tail::PosInf,
    )
    .expect("plateau");
    pointwise_min(&[f.clone(), hole]).expect("two functions")
}

/// A closed random sub-interval of `[a, b]`, sometimes with an open end.
fn sub_interval<R: Rng>(rng: &mut R, a: f64, b: f64) -> Interval {
    let lo = coord(rng, a, (a + b) / 2.0);
    let hi = coord(rng, lo + 0.25, b).max(lo + 0.25);
    Interval::new(lo, hi, rng.gen_bool(0.8), rng.gen_bool(0.8))
}

struct Corruptions {
    log: Vec<Value>,
}

impl Corruptions {
    fn new() -> Self {
        Corruptions { log: Vec::new() }
    }

    fn note(&mut self, k: usize, what: &str) {
        self.log.push(json!({"generator": k, "corruption": what}));
    }

    fn any(&self, what: &str) -> bool {
        self.log.iter().any(|v| v["corruption"] == what)
    }

    fn apply<R: Rng>(&mut self, gens: &mut [PwlFunction], rng: &mut R, p_non_lsc: f64, p_improper: f64) {
        for (k, g) in gens.iter_mut().enumerate() {
            if rng.gen_bool(p_improper) {
                *g = inject_improper(g, rng, CORE);
                self.note(k, "improper");
            } else if rng.gen_bool(p_non_lsc) {
                if let Some(h) = corrupt_non_lsc(g, rng, false) {
                    *g = h;
                    self.note(k, "non_lsc");
                }
            }
        }
    }
}

fn count<R: Rng>(rng: &mut R, params: &GenParams, lo: usize, hi: usize) -> usize {
    params.n.unwrap_or_else(|| rng.gen_range(lo..=hi)).clamp(1, 16)
}

fn mixed_generators<R: Rng>(rng: &mut R, n: usize) -> Vec<PwlFunction> {
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.7) {
                random_convex(rng, Some(CORE))
            } else {
                random_finite(rng)
            }
        })
        .collect()
}

/// Pairwise disjoint bounded domains spread over `[LO, HI]`.
fn disjoint_generators<R: Rng>(rng: &mut R, n: usize) -> Vec<PwlFunction> {
    let width = (HI - LO) / n as f64;
    (0..n)
        .map(|k| {
            let a = LO + k as f64 * width;
            let lo = coord(rng, a, a + width / 4.0);
            let hi = coord(rng, a + width / 2.0, a + 3.0 * width / 4.0);
            let k = rng.gen_range(0..=2);
            convex_on(rng, lo, hi, k)
        })
        .collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable payload")
}

/// A deterministic random scenario: equal `(kind, seed, params)` give
/// byte-identical output.
pub fn generate(kind: Kind, seed: u64, params: &GenParams) -> Scenario {
    let mut rng = rng_for(kind, seed);
    let rng = &mut rng;
    let mut c = Corruptions::new();
    let mut metadata = BTreeMap::new();
    let payload = match kind {
        Kind::Conjugacy => {
            let identity = params.identity.unwrap_or_else(|| {
                *[
                    ConjIdentity::Moreau,
                    ConjIdentity::HullInvariance,
                    ConjIdentity::InfimumInvariance,
                    ConjIdentity::ConjOfInf,
                    ConjIdentity::ConjOfSup,
                    ConjIdentity::Oracle,
                ]
                .choose(rng)
                .unwrap()
            });
            let functions: Vec<PwlFunction> = match identity {
                ConjIdentity::ConjOfSup => (0..count(rng, params, 2, 4))
                    .map(|_| random_convex(rng, Some(CORE)))
                    .collect(),
                ConjIdentity::ConjOfInf => (0..count(rng, params, 2, 4))
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            random_pwl(rng)
                        } else {
                            random_convex(rng, None)
                        }
                    })
                    .collect(),
                _ => {
                    let mut f = if rng.gen_bool(0.5) {
                        random_pwl(rng)
                    } else {
                        random_convex(rng, None)
                    };
                    let p = params.p_improper.unwrap_or(0.0);
                    if identity != ConjIdentity::Oracle && rng.gen_bool(p) {
                        f = inject_improper(&f, rng, (LO, HI));
                        c.note(0, "improper");
                    }
                    vec![f]
                }
            };
            to_value(&ConjugacyPayload { identity, functions })
        }
        Kind::Subdiff => {
            let n = count(rng, params, 1, 4);
            let mut functions: Vec<PwlFunction> = (0..n).map(|_| random_convex(rng, Some(CORE))).collect();
            c.apply(
                &mut functions,
                rng,
                params.p_non_lsc.unwrap_or(0.0),
                params.p_improper.unwrap_or(0.0),
            );
            let x = coord(rng, CORE.0, CORE.1);
            let eps = *[0.0, 0.1, 1.0].choose(rng).unwrap();
            to_value(&SubdiffPayload {
                functions,
                x,
                eps,
                sampler: LambdaSampler::default(),
            })
        }
        Kind::Mm1 | Kind::Localized => {
            let n = count(rng, params, 2, 4);
            let mut gens = match params.variant {
                Some(Variant::EmptyDomain) => disjoint_generators(rng, n.max(2)),
                Some(Variant::EmptyA0) => {
                    let gens: Vec<PwlFunction> = (0..n).map(|_| random_convex(rng, Some(CORE))).collect();
                    gens.iter()
                        .enumerate()
                        .map(|(k, g)| {
                            c.note(k, "improper");
                            inject_improper(g, rng, CORE)
                        })
                        .collect()
                }
                _ => mixed_generators(rng, n),
            };
            if !matches!(params.variant, Some(Variant::EmptyA0 | Variant::EmptyDomain)) {
                c.apply(
                    &mut gens,
                    rng,
                    params.p_non_lsc.unwrap_or(0.25),
                    params.p_improper.unwrap_or(0.15),
                );
            }
            let restriction = (kind == Kind::Localized).then(|| sub_interval(rng, CORE.0, CORE.1));
            to_value(&BifunctionFamily::new(gens, restriction).expect("nonempty family"))
        }
        Kind::Mmb => {
            let n = count(rng, params, 2, 4);
            let mut gens: Vec<PwlFunction> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.6) {
                        random_convex_finite(rng)
                    } else {
                        random_finite(rng)
                    }
                })
                .collect();
            let b = sub_interval(rng, -2.0, 2.0);
            for (k, g) in gens.iter_mut().enumerate() {
                if rng.gen_bool(params.p_non_lsc.unwrap_or(0.2)) {
                    if let Some(h) = corrupt_non_lsc(g, rng, false) {
                        *g = h;
                        c.note(k, "non_lsc");
                    }
                }
            }
            if params.variant == Some(Variant::Infinite) {
                let k = rng.gen_range(0..n);
                let mid = q((b.lo + b.hi) / 2.0, 1.0 / 64.0);
                gens[k] = convex_on(rng, mid, f64::INFINITY, 1);
                c.note(k, "infinite_on_b");
            }
            to_value(&BifunctionFamily::new(gens, Some(b)).expect("nonempty family"))
        }
        Kind::InteriorEquality => {
            let n = count(rng, params, 2, 4);
            let mut gens: Vec<PwlFunction> = (0..n).map(|_| random_convex(rng, Some(CORE))).collect();
            c.apply(
                &mut gens,
                rng,
                params.p_non_lsc.unwrap_or(0.0),
                params.p_improper.unwrap_or(0.1),
            );
            to_value(&BifunctionFamily::unrestricted(gens).expect("nonempty family"))
        }
        Kind::SimplexDuality => {
            let variant = params.variant.unwrap_or_else(|| {
                *[Variant::Lp, Variant::LscImproper, Variant::ProperNonLsc]
                    .choose(rng)
                    .unwrap()
            });
            metadata.insert("variant".into(), to_value(&variant));
            let (generators, mode) = match variant {
                Variant::LscImproper => {
                    let n = count(rng, params, 2, 4).max(2);
                    let mut gens = vec![random_convex_bounded(rng, CORE)];
                    gens.extend((2..n).map(|_| random_convex(rng, Some(CORE))));
                    let cc = coord(rng, CORE.0, 0.0);
                    let d = coord(rng, cc, CORE.1);
                    let at = rng.gen_range(0..=gens.len());
                    gens.insert(at, neg_inf_plateau(cc, d));
                    c.note(at, "improper");
                    (gens, DualMode::Grid)
                }
                Variant::ProperNonLsc => {
                    let n = count(rng, params, 2, 4).max(2);
                    let mut gens = vec![random_convex_bounded(rng, CORE)];
                    gens.extend((1..n).map(|_| random_convex(rng, Some(CORE))));
                    let mut hit = false;
                    for (k, g) in gens.iter_mut().enumerate() {
                        if k == 0 || rng.gen_bool(0.5) {
                            if let Some(h) = corrupt_non_lsc(g, rng, true) {
                                *g = h;
                                c.note(k, "non_lsc");
                                hit = true;
                            }
                        }
                    }
                    debug_assert!(hit, "bounded generator always has an endpoint");
                    gens.shuffle(rng);
                    (gens, DualMode::Grid)
                }
                _ => {
                    let n = count(rng, params, 2, 6).min(6);
                    ((0..n).map(|_| random_convex_finite(rng)).collect(), DualMode::Lp)
                }
            };
            to_value(&DualityPayload { generators, mode })
        }
        Kind::Monotone => {
            let len = count(rng, params, 2, 8);
            let nodes = rng.gen_range(2..=64);
            let axis: Vec<f64> = (0..nodes).map(|i| i as f64).collect();
            let mut rows: Vec<Vec<ExtReal>> = (0..len)
                .map(|_| {
                    (0..nodes)
                        .map(|_| match rng.gen_range(0..40) {
                            0 => ExtReal::POS_INF,
                            1 => ExtReal::NEG_INF,
                            _ => ExtReal::new(q(rng.gen_range(-5.0..=5.0), 0.25)),
                        })
                        .collect()
                })
                .collect();
            if params.variant == Some(Variant::NonDecreasing) {
                for i in 1..rows.len() {
                    let (done, rest) = rows.split_at_mut(i);
                    for (v, p) in rest[0].iter_mut().zip(&done[i - 1]) {
                        *v = (*v).max(*p);
                    }
                }
            }
            let terms: Vec<GridFunction> = rows
                .into_iter()
                .map(|r| GridFunction::one_d(axis.clone(), r).expect("matching lengths"))
                .collect();
            json!({ "terms": terms })
        }
        Kind::Envelope => {
            let outside = params.variant == Some(Variant::Outside);
            let function = if outside {
                random_convex_bounded(rng, (-0.5, 0.5))
            } else {
                random_convex(rng, None)
            };
            let bps = function.breakpoints();
            let (first, last) = (bps[0], bps[bps.len() - 1]);
            let x0 = if outside {
                if rng.gen_bool(0.5) {
                    coord(rng, LO - 5.0, first - 0.25)
                } else {
                    coord(rng, last + 0.25, HI + 5.0)
                }
            } else {
                let dom = function.domain_hull().expect("proper function");
                let a = if dom.lo.is_finite() { dom.lo } else { first - 2.0 };
                let b = if dom.hi.is_finite() { dom.hi } else { last + 2.0 };
                coord(rng, a, b)
            };
            metadata.insert("outside".into(), json!(outside));
            to_value(&EnvelopePayload {
                function,
                x0,
                radii: None,
            })
        }
        Kind::Marginal => {
            let n = count(rng, params, 2, 3);
            let gens: Vec<PwlFunction> = (0..n).map(|_| random_convex(rng, Some(CORE))).collect();
            to_value(&MarginalPayload {
                family: BifunctionFamily::unrestricted(gens).expect("nonempty family"),
                dual_axis: None,
                nodes: 41,
            })
        }
    };
    metadata.insert("improper".into(), json!(c.any("improper")));
    metadata.insert("non_lsc".into(), json!(c.any("non_lsc")));
    if !c.log.is_empty() {
        metadata.insert("corruptions".into(), Value::Array(c.log));
    }
    if *params != GenParams::default() {
        metadata.insert("params".into(), to_value(params));
    }
    Scenario {
        id: format!("{kind}-{seed}"),
        kind,
        payload,
        tolerances: Default::default(),
        seed,
        metadata,
        expect: None,
        inject_fault: None,
    }
}

/// `count` scenarios of `kind` with seeds `seed, seed + 1, …`.
pub fn generate_many(kind: Kind, seed: u64, count: usize, params: &GenParams) -> Vec<Scenario> {
    (0..count as u64).map(|i| generate(kind, seed + i, params)).collect()
}

/// A mixed suite touching every kind, for determinism checks.
pub fn mixed_suite(seed: u64, per_kind: usize) -> Vec<Scenario> {
    let mut out = Vec::new();
    for kind in Kind::ALL {
        out.extend(generate_many(kind, seed, per_kind, &GenParams::default()));
    }
    out
}
