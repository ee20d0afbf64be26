use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use super::report::{Report, SuiteReport};
use super::scenario::{ConjIdentity, Fault, Payload, Resolved, Scenario};
use crate::conjugate::{
    check_hull_invariance, check_infimum_invariance, check_moreau, compare_with_oracle, conj_of_inf, conj_of_sup,
    lipschitz_envelope, IdentityReport,
};
use crate::error::Result;
use crate::extreal::ExtReal;
use crate::minimax::verify::signed_gap;
use crate::minimax::{
    default_dual_axis, interior_equality, marginal_check, monotone_minimax, simplex_duality, verify_localized,
    verify_mm1, verify_mmb, DualMode, MinimaxReport, VerifyOptions,
};
use crate::status::Status;
use crate::subdiff::max_rule;

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` lets rayon decide.
    pub jobs: Option<usize>,
    /// Overrides the default exact tolerance where a scenario sets none.
    pub tol: Option<f64>,
}

/// The relation a report's final check re-asserts.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Relation {
    /// `lhs ≤ rhs`.
    Le,
    /// `lhs = rhs`.
    Eq,
    /// `gap ≤ tol`.
    GapWithin,
    /// Nothing scalar to re-check.
    Opaque,
}

struct Outcome {
    status: Status,
    hypotheses: BTreeMap<String, bool>,
    lhs: Option<ExtReal>,
    rhs: Option<ExtReal>,
    gap: Option<ExtReal>,
    tol: f64,
    relation: Relation,
    witnesses: Value,
    notes: Vec<String>,
}

impl Outcome {
    fn holds(&self) -> bool {
        match (self.relation, self.lhs, self.rhs, self.gap) {
            (Relation::Le, Some(l), Some(r), _) => l.approx_le(r, self.tol),
            (Relation::Eq, Some(l), Some(r), _) => l.discrepancy(r) <= self.tol,
            (Relation::GapWithin, _, _, Some(g)) => g <= ExtReal::new(self.tol),
            _ => true,
        }
    }

    fn skew(&mut self) {
        match self.relation {
            Relation::Le => self.rhs = self.rhs.map(|r| r + ExtReal::new(-1.0)),
            Relation::Eq => self.rhs = self.rhs.map(|r| r + ExtReal::new(1.0)),
            Relation::GapWithin => self.gap = self.gap.map(|g| g + ExtReal::new(1.0)),
            Relation::Opaque => self.notes.push("skew fault has no scalar to act on".into()),
        }
    }
}

fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn options(t: &Resolved) -> VerifyOptions {
    VerifyOptions {
        tol: t.exact,
        grid_tol: t.grid,
        ..VerifyOptions::default()
    }
}

fn from_minimax(r: MinimaxReport, relation: Relation, tol: f64) -> Outcome {
    let gap = match relation {
        Relation::Eq => ExtReal::new(r.lhs.discrepancy(r.rhs)),
        _ => signed_gap(r.lhs, r.rhs),
    };
    Outcome {
        status: r.status,
        hypotheses: r.hypotheses.clone(),
        lhs: Some(r.lhs),
        rhs: Some(r.rhs),
        gap: Some(gap),
        tol,
        relation,
        notes: r.notes.clone(),
        witnesses: json(&r),
    }
}

fn conjugacy(identity: ConjIdentity, funcs: &[crate::funcrep::PwlFunction], t: &Resolved) -> Result<Outcome> {
    let mut tol = t.exact;
    let reports: Vec<IdentityReport> = match identity {
        ConjIdentity::Moreau => funcs.iter().map(|f| check_moreau(f, t.exact)).collect(),
        ConjIdentity::HullInvariance => funcs.iter().map(|f| check_hull_invariance(f, t.exact)).collect(),
        ConjIdentity::InfimumInvariance => funcs.iter().map(|f| check_infimum_invariance(f, t.exact)).collect(),
        ConjIdentity::ConjOfInf => vec![conj_of_inf(funcs, t.exact)?],
        ConjIdentity::ConjOfSup => vec![conj_of_sup(funcs, t.exact)?],
        ConjIdentity::Oracle => {
            tol = t.grid;
            let mut out = Vec::new();
            for f in funcs {
                if !f.is_proper() {
                    out.push(IdentityReport {
                        identity: "oracle".into(),
                        hypothesis_ok: false,
                        lhs: Value::Null,
                        rhs: Value::Null,
                        max_discrepancy: ExtReal::ZERO,
                        witnesses: vec![],
                        holds: None,
                        note: Some("oracle comparison needs a proper function".into()),
                    });
                    continue;
                }
                let c = compare_with_oracle(f, 2001, 401, 0.05)?;
                out.push(IdentityReport {
                    identity: "oracle".into(),
                    hypothesis_ok: true,
                    lhs: json(&c),
                    rhs: Value::Null,
                    max_discrepancy: ExtReal::new(c.max_discrepancy),
                    witnesses: c.worst_slope.into_iter().collect(),
                    holds: Some(c.max_discrepancy <= t.grid),
                    note: None,
                });
            }
            out
        }
    };
    let asserted: Vec<&IdentityReport> = reports.iter().filter(|r| r.holds.is_some()).collect();
    let status = if asserted.is_empty() {
        Status::Vacuous
    } else {
        Status::from_check(asserted.iter().all(|r| r.holds == Some(true)))
    };
    let gap = asserted.iter().map(|r| r.max_discrepancy).max();
    let mut hypotheses = BTreeMap::new();
    hypotheses.insert("hypothesis_ok".to_string(), reports.iter().all(|r| r.hypothesis_ok));
    Ok(Outcome {
        status,
        hypotheses,
        lhs: None,
        rhs: None,
        gap,
        tol,
        relation: Relation::GapWithin,
        notes: reports.iter().filter_map(|r| r.note.clone()).collect(),
        witnesses: json(&reports),
    })
}

/// Radii `(1 + m)·10ᵏ`, `k = 0..=6`, with `m` the largest finite slope.
pub fn default_radii(f: &crate::funcrep::PwlFunction) -> Vec<f64> {
    let base = 1.0 + f.max_abs_slope();
    (0..=6).map(|k| base * 10f64.powi(k)).collect()
}

fn envelope(f: &crate::funcrep::PwlFunction, x0: f64, radii: &[f64], t: &Resolved) -> Result<Outcome> {
    let fx = f.evaluate(x0);
    let values = radii
        .iter()
        .map(|&r| lipschitz_envelope(f, r, x0))
        .collect::<Result<Vec<_>>>()?;
    let monotone = values.windows(2).all(|w| w[0].approx_le(w[1], t.exact));
    let bounded = values.iter().all(|v| v.approx_le(fx, t.exact));
    let gamma0 = f.is_gamma0();
    let last = *values.last().expect("at least one radius");
    let mut hypotheses = BTreeMap::new();
    hypotheses.insert("gamma0".to_string(), gamma0);
    hypotheses.insert("x0_in_domain".to_string(), fx.is_finite());
    let mut notes = Vec::new();
    let mut gap = None;
    let mut relation = Relation::Opaque;
    let mut ok = monotone && bounded;
    if gamma0 && fx.is_finite() {
        gap = Some(ExtReal::new(fx.discrepancy(last)));
        relation = Relation::GapWithin;
    } else if gamma0 && fx.is_pos_inf() {
        // past every slope the minimizer sits at the nearest domain point
        let d = f.domain_hull().map_or(f64::INFINITY, |dom| dom.distance(x0));
        let growth = match values.len() {
            n if n >= 2 => {
                let (r0, r1) = (radii[n - 2], radii[n - 1]);
                let rise = values[n - 1].to_f64() - values[n - 2].to_f64();
                values[n - 1].is_pos_inf() || rise >= (r1 - r0) * d * (1.0 - 1e-6)
            }
            _ => false,
        };
        hypotheses.insert("diverges".to_string(), growth && d > 0.0);
        ok &= growth && d > 0.0;
    } else {
        notes.push("convergence is only asserted for Gamma0 inputs".into());
    }
    Ok(Outcome {
        status: Status::from_check(ok),
        hypotheses,
        lhs: Some(fx),
        rhs: Some(last),
        gap,
        tol: t.envelope,
        relation,
        witnesses: serde_json::json!({"radii": radii, "values": values, "monotone": monotone, "bounded": bounded}),
        notes,
    })
}

fn evaluate(s: &Scenario, t: &Resolved) -> Result<Outcome> {
    if s.inject_fault == Some(Fault::Panic) {
        panic!("injected fault in scenario {}", s.id);
    }
    let opts = options(t);
    let mut out = match s.payload()? {
        Payload::Conjugacy(c) => conjugacy(c.identity, &c.functions, t)?,
        Payload::Subdiff(p) => {
            let mut sampler = p.sampler;
            sampler.tol = t.grid;
            let r = max_rule(&p.functions, p.x, p.eps, &sampler)?;
            Outcome {
                status: r.status,
                hypotheses: r.hypotheses.clone(),
                lhs: None,
                rhs: None,
                gap: Some(r.endpoint_gap),
                tol: t.grid,
                relation: Relation::GapWithin,
                notes: r.notes.clone(),
                witnesses: json(&r),
            }
        }
        Payload::Family(fam) => match s.kind {
            super::Kind::Mmb => from_minimax(verify_mmb(&fam, &opts), Relation::Le, t.exact),
            super::Kind::Localized => from_minimax(verify_localized(&fam, &opts), Relation::Le, t.exact),
            super::Kind::InteriorEquality => from_minimax(interior_equality(&fam, &opts), Relation::Eq, t.exact),
            _ => from_minimax(verify_mm1(&fam, &opts), Relation::Le, t.exact),
        },
        Payload::Duality(d) => {
            let r = simplex_duality(&d.generators, d.mode, &opts)?;
            let tol = if r.mode == DualMode::Grid { t.grid } else { t.exact };
            Outcome {
                status: r.status,
                hypotheses: r.hypotheses.clone(),
                lhs: Some(r.primal),
                rhs: Some(r.dual),
                gap: Some(r.gap),
                tol,
                relation: Relation::Eq,
                notes: r.notes.clone(),
                witnesses: json(&r),
            }
        }
        Payload::Monotone(seq) => {
            let r = monotone_minimax(&seq);
            let mut hypotheses = BTreeMap::new();
            hypotheses.insert("non_decreasing".to_string(), r.non_decreasing);
            Outcome {
                status: r.status,
                hypotheses,
                lhs: Some(r.lhs),
                rhs: Some(r.rhs),
                gap: Some(ExtReal::new(r.lhs.discrepancy(r.rhs))),
                tol: t.exact,
                relation: Relation::Eq,
                notes: vec![],
                witnesses: json(&r),
            }
        }
        Payload::Envelope(e) => {
            let radii = e.radii.clone().unwrap_or_else(|| default_radii(&e.function));
            envelope(&e.function, e.x0, &radii, t)?
        }
        Payload::Marginal(m) => {
            let axis = m
                .dual_axis
                .clone()
                .unwrap_or_else(|| default_dual_axis(&m.family, m.nodes));
            let r = marginal_check(&m.family, &axis, &opts);
            let mut hypotheses = BTreeMap::new();
            hypotheses.insert("lsc_automatic".to_string(), r.lsc_automatic);
            Outcome {
                status: r.status,
                hypotheses,
                lhs: None,
                rhs: None,
                gap: None,
                tol: opts.tol,
                relation: Relation::Opaque,
                notes: vec![],
                witnesses: json(&r),
            }
        }
    };
    if s.inject_fault == Some(Fault::Skew) {
        out.skew();
    }
    if out.status == Status::Pass && !out.holds() {
        out.status = Status::Fail;
        out.notes.push("final check failed".into());
    }
    if let Some(exp) = &s.expect {
        let tol = out.tol.max(1e-9);
        let close = |want: Option<ExtReal>, got: Option<ExtReal>| match (want, got) {
            (None, _) => true,
            (Some(w), Some(g)) => w.discrepancy(g) <= tol,
            (Some(_), None) => false,
        };
        let mut mismatch = Vec::new();
        if !close(exp.lhs, out.lhs) {
            mismatch.push(format!("lhs expected {:?}, got {:?}", exp.lhs, out.lhs));
        }
        if !close(exp.rhs, out.rhs) {
            mismatch.push(format!("rhs expected {:?}, got {:?}", exp.rhs, out.rhs));
        }
        if exp.status.is_some_and(|st| st != out.status) {
            mismatch.push(format!("status expected {:?}, got {}", exp.status, out.status.as_str()));
        }
        if !mismatch.is_empty() {
            out.status = Status::Fail;
            out.notes.extend(mismatch);
        }
    }
    Ok(out)
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

/// Runs one scenario; errors and panics become status `error`.
pub fn run_scenario(s: &Scenario, tol: Option<f64>) -> Report {
    let start = Instant::now();
    let t = s.tolerances.resolve(tol);
    let outcome = match catch_unwind(AssertUnwindSafe(|| evaluate(s, &t))) {
        Ok(Ok(o)) => Ok(o),
        Ok(Err(e)) => Err(e.to_string()),
        Err(p) => Err(format!("panic: {}", panic_message(p.as_ref()))),
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(o) => Report {
            id: s.id.clone(),
            kind: s.kind,
            status: o.status,
            hypotheses: o.hypotheses,
            lhs: o.lhs,
            rhs: o.rhs,
            gap: o.gap,
            tol: o.tol,
            witnesses: o.witnesses,
            notes: o.notes,
            wall_time_ms,
        },
        Err(msg) => Report {
            id: s.id.clone(),
            kind: s.kind,
            status: Status::Error,
            hypotheses: BTreeMap::new(),
            lhs: None,
            rhs: None,
            gap: None,
            tol: t.exact,
            witnesses: Value::Null,
            notes: vec![msg],
            wall_time_ms,
        },
    }
}

#[cfg(feature = "parallel")]
fn run_all(scenarios: &[Scenario], opts: &RunOptions) -> Vec<Report> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build();
    match pool {
        Ok(pool) => pool.install(|| scenarios.par_iter().map(|s| run_scenario(s, opts.tol)).collect()),
        Err(_) => scenarios.iter().map(|s| run_scenario(s, opts.tol)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_all(scenarios: &[Scenario], opts: &RunOptions) -> Vec<Report> {
    scenarios.iter().map(|s| run_scenario(s, opts.tol)).collect()
}

/// Runs every scenario and merges the reports in input order.
pub fn run_suite(scenarios: &[Scenario], opts: &RunOptions) -> SuiteReport {
    SuiteReport::new(run_all(scenarios, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::{Interval, PwlFunction};
    use crate::harness::generate::{generate, GenParams};
    use crate::harness::scenario::{Expectation, Kind};
    use serde_json::json;

    fn scenario(kind: Kind, payload: Value) -> Scenario {
        Scenario {
            id: format!("{kind}"),
            kind,
            payload,
            tolerances: Default::default(),
            seed: 0,
            metadata: Default::default(),
            expect: None,
            inject_fault: None,
        }
    }

    fn vees() -> Value {
        json!({"generators": [PwlFunction::abs_at(0.0, 1.0), PwlFunction::abs_at(1.0, 1.0)]})
    }

    #[test]
    fn mm1_passes_and_skew_fails() {
        let mut s = scenario(Kind::Mm1, vees());
        let r = run_scenario(&s, None);
        assert_eq!(r.status, Status::Pass);
        assert!(r.lhs.unwrap().approx_eq(ExtReal::new(0.5), 1e-12));
        s.inject_fault = Some(Fault::Skew);
        assert_eq!(run_scenario(&s, None).status, Status::Fail);
    }

    #[test]
    fn panic_is_isolated() {
        let mut bad = scenario(Kind::Mm1, vees());
        bad.id = "bad".into();
        bad.inject_fault = Some(Fault::Panic);
        let good = scenario(Kind::Mm1, vees());
        let alone = run_scenario(&good, None);
        let suite = run_suite(
            &[bad, good],
            &RunOptions {
                jobs: Some(2),
                tol: None,
            },
        );
        assert_eq!(suite.reports[0].status, Status::Error);
        assert!(suite.reports[0].notes[0].contains("injected fault"));
        let mut with = suite.reports[1].clone();
        with.wall_time_ms = alone.wall_time_ms;
        assert_eq!(with, alone);
        assert_eq!(suite.summary.exit_code(), 1);
    }

    #[test]
    fn violated_hypothesis_is_vacuous() {
        let gens = vec![
            PwlFunction::indicator(Interval::closed(0.0, 1.0)).unwrap(),
            PwlFunction::indicator(Interval::closed(2.0, 3.0)).unwrap(),
        ];
        let s = scenario(Kind::SimplexDuality, json!({"generators": gens}));
        assert_eq!(run_scenario(&s, None).status, Status::Vacuous);
    }

    #[test]
    fn expectation_mismatch_fails() {
        let mut s = scenario(Kind::Mm1, vees());
        s.expect = Some(Expectation {
            lhs: Some(ExtReal::new(0.5)),
            rhs: Some(ExtReal::new(0.5)),
            status: Some(Status::Pass),
        });
        assert_eq!(run_scenario(&s, None).status, Status::Pass);
        s.expect.as_mut().unwrap().rhs = Some(ExtReal::new(0.25));
        assert_eq!(run_scenario(&s, None).status, Status::Fail);
    }

    #[test]
    fn bad_payload_is_an_error_status() {
        let s = scenario(Kind::Monotone, json!({"terms": []}));
        assert_eq!(run_scenario(&s, None).status, Status::Error);
    }

    #[test]
    fn envelope_examples() {
        let f = crate::funcrep::sum(
            &PwlFunction::affine(2.0, 0.0),
            &PwlFunction::indicator(Interval::closed(0.0, 1.0)).unwrap(),
        );
        let s = scenario(
            Kind::Envelope,
            json!({"function": f, "x0": 1.0, "radii": [1.0, 1.5, 2.0, 3.0]}),
        );
        let r = run_scenario(&s, None);
        assert_eq!(r.status, Status::Pass);
        let vals: Vec<ExtReal> = serde_json::from_value(r.witnesses["values"].clone()).unwrap();
        assert_eq!(vals, [1.0, 1.5, 2.0, 2.0].map(ExtReal::new));
        let s = scenario(
            Kind::Envelope,
            json!({"function": PwlFunction::point_indicator(1.0), "x0": 0.0}),
        );
        let r = run_scenario(&s, None);
        assert_eq!(r.status, Status::Pass);
        assert!(r.hypotheses["diverges"]);
    }

    #[test]
    fn every_generated_kind_runs() {
        for kind in Kind::ALL {
            for seed in 0..3 {
                let s = generate(kind, seed, &GenParams::default());
                let r = run_scenario(&s, None);
                assert!(
                    !r.status.is_failure(),
                    "{kind} seed {seed}: {:?} {:?}",
                    r.status,
                    r.notes
                );
            }
        }
    }
}
