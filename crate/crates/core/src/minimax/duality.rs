use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::family::BifunctionFamily;
use super::lp::{LinearProgram, LpOutcome, Relation};
use super::simplex::{self, SimplexPoint, MESH_BUDGET};
use crate::error::Result;
use crate::extreal::ExtReal;
use crate::funcrep::{merge_breakpoints, pointwise_max, weighted_sum, PwlFunction, SLOPE_EPS};
use crate::funcrep::{Element, Piece};
use crate::status::Status;

/// How `max_λ inf_y f(λ,y)` is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualMode {
    #[default]
    Auto,
    /// Exact linear program.
    Lp,
    /// Bracketing search over each face of the simplex.
    Grid,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualSolution {
    pub value: ExtReal,
    pub lambda: SimplexPoint,
    pub mode: DualMode,
    /// Scan density used in grid mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<usize>,
}

/// `g(λ) = inf_y Σ λₖ gₖ(y)`.
pub fn dual_objective(gens: &[PwlFunction], lambda: &SimplexPoint) -> ExtReal {
    weighted_sum(lambda.weights(), gens)
        .expect("lambda matches the family")
        .infimum()
        .value
}

/// `max_{λ∈Δₙ} inf_{y∈B} f(λ,y)` with a maximizer. `Auto` uses the exact
/// program.
pub fn rhs_value(fam: &BifunctionFamily, mode: DualMode, density: usize) -> DualSolution {
    let gens = fam.effective_generators();
    match mode {
        DualMode::Auto | DualMode::Lp => lp_dual(&gens),
        DualMode::Grid => grid_dual(&gens, density),
    }
}

/// Exact dual value.
///
/// Let `D` be the set of elements (breakpoints, open segments, tails) where
/// no generator is `+∞`, and `S*` the generators that never take `−∞` on
/// `D`. Faces leaving `S*` carry `g = −∞` on their relative interior, and on
/// the closed face of `S*` the function `g` is the minimum of finitely many
/// linear forms (values and one-sided limits) subject to the recession
/// conditions of the tails, so one program covers everything.
pub fn lp_dual(gens: &[PwlFunction]) -> DualSolution {
    let n = gens.len();
    let grid = merge_breakpoints(gens);
    let parts: Vec<Vec<Element>> = gens.iter().map(|g| g.refine(&grid).elements()).collect();
    let m = parts[0].len();
    let domain: Vec<usize> = (0..m).filter(|&e| parts.iter().all(|p| p[e].in_domain())).collect();
    let done = |value: ExtReal, lambda: SimplexPoint| DualSolution {
        value,
        lambda,
        mode: DualMode::Lp,
        density: None,
    };
    if domain.is_empty() {
        return done(ExtReal::POS_INF, SimplexPoint::barycenter(n));
    }
    let active: Vec<usize> = (0..n)
        .filter(|&k| domain.iter().all(|&e| !parts[k][e].has_neg_inf()))
        .collect();
    if active.is_empty() {
        return done(ExtReal::NEG_INF, SimplexPoint::barycenter(n));
    }
    let w = active.len();
    let mut objective = vec![0.0; w + 2];
    objective[w] = 1.0;
    objective[w + 1] = -1.0;
    let mut lp = LinearProgram::new(objective);
    let bound = |a: Vec<f64>, lp: &mut LinearProgram| {
        let mut row: Vec<f64> = a.iter().map(|v| -v).collect();
        row.extend([1.0, -1.0]);
        lp.push(row, Relation::Le, 0.0);
    };
    let line = |el: Element| match el {
        Element::Open {
            piece: Piece::Line { at, value, slope },
            ..
        } => (at, value, if slope.abs() <= SLOPE_EPS { 0.0 } else { slope }),
        other => unreachable!("active generator off the line on D: {other:?}"),
    };
    for &e in &domain {
        match parts[active[0]][e] {
            Element::Point { .. } => {
                let a = active
                    .iter()
                    .map(|&k| match parts[k][e] {
                        Element::Point { value, .. } => value.to_f64(),
                        _ => unreachable!("elements are aligned"),
                    })
                    .collect();
                bound(a, &mut lp);
            }
            Element::Open { lo, hi, .. } => {
                let eval_at = |x: f64| {
                    active
                        .iter()
                        .map(|&k| {
                            let (at, v, s) = line(parts[k][e]);
                            v + s * (x - at)
                        })
                        .collect::<Vec<f64>>()
                };
                let slopes: Vec<f64> = active.iter().map(|&k| line(parts[k][e]).2).collect();
                let mut rec = slopes.clone();
                rec.extend([0.0, 0.0]);
                if lo.is_finite() {
                    bound(eval_at(lo), &mut lp);
                } else {
                    lp.push(rec.clone(), Relation::Le, 0.0);
                }
                if hi.is_finite() {
                    bound(eval_at(hi), &mut lp);
                } else {
                    lp.push(rec, Relation::Ge, 0.0);
                }
            }
        }
    }
    let mut simplex_row = vec![1.0; w];
    simplex_row.extend([0.0, 0.0]);
    lp.push(simplex_row, Relation::Eq, 1.0);
    match lp.solve() {
        LpOutcome::Optimal { x, value } => {
            let mut weights = vec![0.0; n];
            for (i, &k) in active.iter().enumerate() {
                weights[k] = x[i];
            }
            done(ExtReal::new(value), SimplexPoint::normalized(&weights))
        }
        LpOutcome::Infeasible => done(ExtReal::NEG_INF, SimplexPoint::barycenter(n)),
        LpOutcome::Unbounded => unreachable!("every element of D bounds t"),
        LpOutcome::PivotLimit => grid_dual(gens, 64),
    }
}

const GOLDEN: f64 = 0.381_966_011_250_105;
const GOLDEN_WIDTH: f64 = 1e-11;
/// Largest family searched face by face in grid mode; bigger ones use the
/// plain mesh.
const GRID_FACE_LIMIT: usize = 4;

/// Grid-mode dual: every face of `Δₙ` is searched on its relative interior
/// with `density` scan points per coordinate followed by a bracketing
/// golden-section search. The partial maximum over the remaining
/// coordinates is concave in each stick-breaking coordinate, so the nested
/// searches stay unimodal.
pub fn grid_dual(gens: &[PwlFunction], density: usize) -> DualSolution {
    let n = gens.len();
    let density = density.max(2);
    let eval = |w: &[f64]| dual_objective(gens, &SimplexPoint::normalized(w));
    let candidates: Vec<(ExtReal, Vec<f64>)> = if n > GRID_FACE_LIMIT {
        let cap = simplex::density_cap(n, density, MESH_BUDGET);
        crate::par::map(&simplex::mesh(n, cap), |p| (eval(p.weights()), p.weights().to_vec()))
    } else {
        crate::par::map(&simplex::faces(n), |support| {
            let mut u = vec![0.5; support.len() - 1];
            let (v, u) = search_level(0, &mut u, &|u: &[f64]| eval(&stick_weights(n, support, u)), density);
            (v, stick_weights(n, support, &u))
        })
    };
    let mut best = &candidates[0];
    for c in &candidates[1..] {
        if c.0 > best.0 {
            best = c;
        }
    }
    DualSolution {
        value: best.0,
        lambda: SimplexPoint::normalized(&best.1),
        mode: DualMode::Grid,
        density: Some(density),
    }
}

fn stick_weights(n: usize, support: &[usize], u: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let mut rest = 1.0;
    for (i, &k) in support.iter().enumerate() {
        if i + 1 == support.len() {
            w[k] = rest;
        } else {
            w[k] = rest * u[i];
            rest -= w[k];
        }
    }
    w
}

fn search_level(level: usize, u: &mut Vec<f64>, eval: &dyn Fn(&[f64]) -> ExtReal, scan: usize) -> (ExtReal, Vec<f64>) {
    if level == u.len() {
        return (eval(u), u.clone());
    }
    let mut h = |t: f64| {
        u[level] = t;
        search_level(level + 1, u, eval, scan)
    };
    let xs: Vec<f64> = (1..scan).map(|i| i as f64 / scan as f64).collect();
    let mut best_i = 0;
    let mut best = h(xs[0]);
    for (i, &x) in xs.iter().enumerate().skip(1) {
        let v = h(x);
        if v.0 > best.0 {
            best = v;
            best_i = i;
        }
    }
    let mut a = if best_i == 0 { 0.0 } else { xs[best_i - 1] };
    let mut b = if best_i + 1 == xs.len() { 1.0 } else { xs[best_i + 1] };
    let mut c = xs[best_i];
    while b - a > GOLDEN_WIDTH {
        let x = if c - a > b - c {
            c - GOLDEN * (c - a)
        } else {
            c + GOLDEN * (b - c)
        };
        if x <= a || x >= b || x == c {
            break;
        }
        let v = h(x);
        if v.0 > best.0 {
            if x < c {
                b = c;
            } else {
                a = c;
            }
            c = x;
            best = v;
        } else if x < c {
            a = x;
        } else {
            b = x;
        }
    }
    best
}

/// Outcome of comparing `inf max fₖ` with `max_λ inf Σλₖfₖ`.
#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub theorem: String,
    pub hypotheses: BTreeMap<String, bool>,
    pub primal: ExtReal,
    pub dual: ExtReal,
    pub gap: ExtReal,
    pub lambda_star: SimplexPoint,
    pub mode: DualMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<usize>,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Tolerances and refinement limits for the verifiers.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Exact assertions.
    pub tol: f64,
    /// Mesh and grid assertions.
    pub grid_tol: f64,
    pub density: usize,
    pub max_density: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: 1e-9,
            grid_tol: 1e-6,
            density: 8,
            max_density: 256,
        }
    }
}

/// `|a − b|` scaled by `max(1, |a|, |b|)`; zero for equal infinities.
pub fn gap_between(a: ExtReal, b: ExtReal) -> ExtReal {
    ExtReal::new(a.discrepancy(b))
}

/// `inf_x max_k fₖ(x) = max_λ inf_x Σ λₖ fₖ(x)` for convex `fₖ` that are all
/// proper or all lsc, with `dom max fₖ ≠ ∅`.
pub fn simplex_duality(funcs: &[PwlFunction], mode: DualMode, opts: &VerifyOptions) -> Result<DualityReport> {
    let top = pointwise_max(funcs)?;
    let primal = top.infimum().value;
    let proper = funcs.iter().all(PwlFunction::is_proper);
    let lsc = funcs.iter().all(PwlFunction::is_lsc);
    let convex = funcs.iter().all(PwlFunction::is_convex);
    let dom = !top.is_identically_pos_inf();
    let mut hypotheses = BTreeMap::new();
    hypotheses.insert("all_proper".to_string(), proper);
    hypotheses.insert("all_lsc".to_string(), lsc);
    hypotheses.insert("all_convex".to_string(), convex);
    hypotheses.insert("dom_nonempty".to_string(), dom);
    let mode = match mode {
        DualMode::Auto if proper && lsc => DualMode::Lp,
        DualMode::Auto => DualMode::Grid,
        m => m,
    };
    let (sol, tol) = match mode {
        DualMode::Grid => {
            let cap = opts.max_density.max(opts.density);
            let mut d = opts.density.max(2);
            loop {
                let sol = grid_dual(funcs, d);
                if sol.value.discrepancy(primal) <= opts.grid_tol || d * 2 > cap {
                    break (sol, opts.grid_tol);
                }
                d *= 2;
            }
        }
        _ => (lp_dual(funcs), opts.tol),
    };
    let gap = gap_between(primal, sol.value);
    let applies = dom && convex && (proper || lsc);
    let mut notes = Vec::new();
    let status = if applies {
        Status::from_check(gap <= ExtReal::new(tol))
    } else {
        notes.push(if dom {
            "hypothesis failed: members must be convex and either all proper or all lsc".to_string()
        } else {
            "hypothesis failed: dom max f_k is empty".to_string()
        });
        Status::Vacuous
    };
    Ok(DualityReport {
        theorem: "simplex_duality".into(),
        hypotheses,
        primal,
        dual: sol.value,
        gap,
        lambda_star: sol.lambda,
        mode: sol.mode,
        density: sol.density,
        status,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::Interval;

    fn ind(lo: f64, hi: f64, lc: bool, hc: bool) -> PwlFunction {
        PwlFunction::indicator(Interval::new(lo, hi, lc, hc)).unwrap()
    }

    fn lines() -> Vec<PwlFunction> {
        vec![PwlFunction::affine(1.0, 0.0), PwlFunction::affine(-1.0, 0.0)]
    }

    #[test]
    fn opposite_lines_balance() {
        let s = lp_dual(&lines());
        assert_eq!(s.value, ExtReal::ZERO);
        assert_eq!(s.lambda.weights(), &[0.5, 0.5]);
        let g = grid_dual(&lines(), 8);
        assert_eq!(g.value, ExtReal::ZERO);
        let r = simplex_duality(&lines(), DualMode::Auto, &VerifyOptions::default()).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.mode, DualMode::Lp);
    }

    #[test]
    fn improper_member_uses_vertex() {
        let gens = vec![ind(0.0, 1.0, true, true), PwlFunction::constant(ExtReal::NEG_INF)];
        let s = lp_dual(&gens);
        assert_eq!(s.value, ExtReal::ZERO);
        assert_eq!(s.lambda.weights(), &[1.0, 0.0]);
        let r = simplex_duality(&gens, DualMode::Auto, &VerifyOptions::default()).unwrap();
        assert_eq!(r.mode, DualMode::Grid);
        assert_eq!(
            (r.primal, r.dual, r.status),
            (ExtReal::ZERO, ExtReal::ZERO, Status::Pass)
        );
        assert_eq!(r.lambda_star.weights(), &[1.0, 0.0]);
    }

    #[test]
    fn non_lsc_proper_case() {
        let gens = vec![ind(0.0, 1.0, false, true), PwlFunction::affine(1.0, 0.0)];
        let r = simplex_duality(&gens, DualMode::Auto, &VerifyOptions::default()).unwrap();
        assert_eq!(r.primal, ExtReal::ZERO);
        assert!(r.dual.approx_eq(ExtReal::ZERO, 1e-9), "{:?}", r.dual);
        assert_eq!(r.status, Status::Pass);
    }

    #[test]
    fn single_generator_is_its_infimum() {
        let g = PwlFunction::abs_at(2.0, 3.0);
        let s = lp_dual(std::slice::from_ref(&g));
        assert_eq!(s.value, ExtReal::ZERO);
    }

    #[test]
    fn balanced_vees() {
        let gens = vec![PwlFunction::abs_at(0.0, 1.0), PwlFunction::abs_at(1.0, 1.0)];
        let s = lp_dual(&gens);
        assert!(s.value.approx_eq(ExtReal::new(0.5), 1e-12));
        let g = grid_dual(&gens, 8);
        assert!(g.value.approx_eq(ExtReal::new(0.5), 1e-9));
    }

    #[test]
    fn empty_common_domain_is_pos_inf() {
        let gens = vec![ind(0.0, 1.0, true, true), ind(2.0, 3.0, true, true)];
        assert_eq!(lp_dual(&gens).value, ExtReal::POS_INF);
        assert_eq!(grid_dual(&gens, 4).value, ExtReal::POS_INF);
        let r = simplex_duality(&gens, DualMode::Auto, &VerifyOptions::default()).unwrap();
        assert_eq!(r.status, Status::Vacuous);
    }

    #[test]
    fn unbounded_everywhere_is_neg_inf() {
        let gens = vec![PwlFunction::affine(1.0, 0.0), PwlFunction::affine(2.0, 0.0)];
        assert_eq!(lp_dual(&gens).value, ExtReal::NEG_INF);
        assert_eq!(grid_dual(&gens, 8).value, ExtReal::NEG_INF);
    }

    #[test]
    fn stick_breaking_covers_face() {
        let w = stick_weights(4, &[0, 2, 3], &[0.5, 0.5]);
        assert_eq!(w, vec![0.5, 0.0, 0.25, 0.25]);
    }
}
