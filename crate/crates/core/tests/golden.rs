mod common;

use std::path::PathBuf;

use relaxed_minimax::harness::{load_suite, run_suite, Kind, Payload, RunOptions, Scenario};
use relaxed_minimax::minimax::BifunctionFamily;
use relaxed_minimax::{ExtReal, Status};

use common::{eval, inf_max, nodes, simplex_grid, weighted};

fn suite(name: &str) -> Vec<Scenario> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../suites")
        .join(name);
    load_suite(path).unwrap()
}

fn ys(fam: &BifunctionFamily) -> Vec<f64> {
    nodes(-4.0, 4.0, 192)
        .into_iter()
        .filter(|&y| fam.y_restriction.is_none_or(|b| b.contains(y)))
        .collect()
}

/// `sup_λ inf_y f(λ, y)` over weights whose section is proper.
fn proper_max_inf(fam: &BifunctionFamily, ys: &[f64]) -> f64 {
    let gens = &fam.generators;
    simplex_grid(gens.len(), 192)
        .iter()
        .filter_map(|w| {
            let sec: Vec<f64> = ys
                .iter()
                .map(|&y| weighted(w, &gens.iter().map(|g| eval(g, y)).collect::<Vec<_>>()))
                .collect();
            let proper = sec.iter().all(|&v| v > f64::NEG_INFINITY) && sec.iter().any(|v| v.is_finite());
            proper.then(|| sec.into_iter().fold(f64::INFINITY, f64::min))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `(lhs, rhs)` as the runner reports them, recomputed by brute force.
fn oracle(s: &Scenario) -> Option<(f64, f64)> {
    match s.payload().unwrap() {
        Payload::Family(fam) => {
            let ys = ys(&fam);
            let primal = inf_max(&fam.generators, &ys);
            Some((proper_max_inf(&fam, &ys), primal))
        }
        Payload::Duality(d) => {
            let ys = nodes(-4.0, 4.0, 192);
            let lambdas = simplex_grid(d.generators.len(), 48);
            Some((
                inf_max(&d.generators, &ys),
                common::max_inf(&d.generators, &lambdas, &ys),
            ))
        }
        Payload::Monotone(seq) => {
            let rows: Vec<Vec<f64>> = seq
                .terms()
                .iter()
                .map(|t| t.values().iter().map(|v| v.to_f64()).collect())
                .collect();
            let (len, m) = (rows.len(), rows[0].len());
            let psi: Vec<Vec<f64>> = (0..len)
                .map(|i| {
                    (0..m)
                        .map(|j| (i..len).map(|k| rows[k][j]).fold(f64::INFINITY, f64::min))
                        .collect()
                })
                .collect();
            let lhs = (0..m)
                .map(|j| psi.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min);
            let rhs = psi
                .iter()
                .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max);
            Some((lhs, rhs))
        }
        Payload::Envelope(e) => {
            let r = *e.radii.as_ref().unwrap().last().unwrap();
            let env = nodes(-8.0, 8.0, 64)
                .into_iter()
                .map(|x| r * (e.x0 - x).abs() + eval(&e.function, x))
                .fold(f64::INFINITY, f64::min);
            Some((eval(&e.function, e.x0), env))
        }
        _ => None,
    }
}

#[test]
fn frozen_values_agree_with_brute_force() {
    let scenarios = suite("golden.json");
    assert_eq!(scenarios.len(), 12);
    let mut checked = 0;
    for s in &scenarios {
        let exp = s.expect.as_ref().unwrap();
        let Some((lhs, rhs)) = oracle(s) else {
            assert!(exp.lhs.is_none() && exp.rhs.is_none(), "{}", s.id);
            continue;
        };
        for (name, want, got) in [("lhs", exp.lhs, lhs), ("rhs", exp.rhs, rhs)] {
            let want = want.unwrap().to_f64();
            assert!(
                (want - got).abs() <= 1e-8,
                "{} {name}: frozen {want}, oracle {got}",
                s.id
            );
        }
        checked += 1;
    }
    assert_eq!(checked, 9);
}

#[test]
fn golden_suite_passes() {
    let scenarios = suite("golden.json");
    let kinds: std::collections::BTreeSet<Kind> = scenarios.iter().map(|s| s.kind).collect();
    assert_eq!(kinds.len(), Kind::ALL.len());
    let r = run_suite(&scenarios, &RunOptions::default());
    for rep in &r.reports {
        assert_eq!(rep.status, Status::Pass, "{} {:?}", rep.id, rep.notes);
    }
    assert_eq!(r.summary.exit_code(), 0);
}

#[test]
fn hypothesis_violations_are_vacuous() {
    let r = run_suite(&suite("vacuous.json"), &RunOptions::default());
    assert!(r.reports.iter().all(|rep| rep.status == Status::Vacuous));
    assert_eq!(r.summary.exit_code(), 0);
}

#[test]
fn skew_fault_is_caught() {
    let r = run_suite(&suite("faults.json"), &RunOptions::default());
    let skewed = &r.reports[0];
    assert_eq!(skewed.status, Status::Fail);
    assert_eq!(skewed.rhs, Some(ExtReal::ZERO));
    assert_eq!(r.reports[1].status, Status::Pass);
    assert_eq!(r.summary.exit_code(), 1);
}
