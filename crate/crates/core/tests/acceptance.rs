use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use relaxed_minimax::conjugate::{biconjugate, compare_with_oracle};
use relaxed_minimax::funcrep::{linspace, GridFunction};
use relaxed_minimax::harness::generate::{random_convex, random_pwl, rng_for};
use relaxed_minimax::harness::{
    generate, generate_many, mixed_suite, run_scenario, run_suite, ConjIdentity, GenParams, Kind, Report, RunOptions,
    Variant,
};
use relaxed_minimax::subdiff::{eps_subdiff_oracle, eps_subdifferential};
use relaxed_minimax::{ExtReal, Status};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn params(variant: Option<Variant>) -> GenParams {
    GenParams {
        variant,
        ..GenParams::default()
    }
}

fn identity(id: ConjIdentity, p_improper: f64) -> GenParams {
    GenParams {
        identity: Some(id),
        p_improper: Some(p_improper),
        ..GenParams::default()
    }
}

fn run(kind: Kind, seed: u64, count: usize, p: &GenParams) -> Vec<Report> {
    let suite = generate_many(kind, seed, count, p);
    run_suite(&suite, &RunOptions::default()).reports
}

fn tally(reports: &[Report]) -> (usize, usize, usize, usize) {
    let n = |s: Status| reports.iter().filter(|r| r.status == s).count();
    (n(Status::Pass), n(Status::Fail), n(Status::Vacuous), n(Status::Error))
}

fn first_bad(reports: &[Report]) -> String {
    reports
        .iter()
        .find(|r| r.status.is_failure())
        .map(|r| format!(" first failure {} {:?}", r.id, r.notes))
        .unwrap_or_default()
}

fn biconjugates() -> Outcome {
    let mut rng = rng_for(Kind::Conjugacy, 1);
    let mut convex_bad = 0;
    for _ in 0..200 {
        let f = random_convex(&mut rng, None);
        if !biconjugate(&f).structurally_eq(&f, 1e-9) {
            convex_bad += 1;
        }
    }
    let mut general_bad = 0;
    let mut improper_hull = 0;
    for _ in 0..200 {
        let f = random_pwl(&mut rng);
        let hull = f.closed_convex_hull();
        improper_hull += usize::from(!hull.is_proper());
        if !biconjugate(&f).approx_eq(&hull, 1e-9) {
            general_bad += 1;
        }
    }
    outcome(
        convex_bad == 0 && general_bad == 0,
        format!(
            "convex f**=f mismatches {convex_bad}/200, general f**=cl co f mismatches {general_bad}/200 \
             ({improper_hull} with hull identically -inf)"
        ),
    )
}

fn conjugate_oracle() -> Outcome {
    let mut rng = rng_for(Kind::Conjugacy, 2);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..200 {
        let f = random_pwl(&mut rng);
        let c = compare_with_oracle(&f, 2001, 401, 0.05).expect("oracle comparison");
        worst = worst.max(c.max_discrepancy);
        bad += usize::from(c.max_discrepancy > 1e-6);
    }
    outcome(bad == 0, format!("200 functions, {bad} beyond 1e-6, worst {worst:.3e}"))
}

fn conjugate_calculus() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (id, count, p_improper, seed) in [
        (ConjIdentity::ConjOfInf, 100, 0.0, 3_000),
        (ConjIdentity::ConjOfSup, 100, 0.0, 3_100),
        (ConjIdentity::HullInvariance, 200, 0.3, 3_200),
        (ConjIdentity::InfimumInvariance, 200, 0.3, 3_400),
    ] {
        let reports = run(Kind::Conjugacy, seed, count, &identity(id, p_improper));
        let (pass, fail, vac, err) = tally(&reports);
        ok &= pass == count && fail + vac + err == 0;
        lines.push(format!("{id:?} {pass}/{count}{}", first_bad(&reports)));
    }
    let improper_inputs = generate_many(
        Kind::Conjugacy,
        3_200,
        200,
        &identity(ConjIdentity::HullInvariance, 0.3),
    )
    .iter()
    .chain(&generate_many(
        Kind::Conjugacy,
        3_400,
        200,
        &identity(ConjIdentity::InfimumInvariance, 0.3),
    ))
    .filter(|s| s.metadata.get("improper") == Some(&serde_json::Value::Bool(true)))
    .count();
    ok &= improper_inputs > 0;
    outcome(ok, format!("{}, {improper_inputs} improper inputs", lines.join(", ")))
}

fn mm1() -> Outcome {
    let reports = run(Kind::Mm1, 4_000, 300, &GenParams::default());
    let suite = generate_many(Kind::Mm1, 4_000, 300, &GenParams::default());
    let corrupted = suite
        .iter()
        .filter(|s| {
            let flag = |k: &str| s.metadata.get(k) == Some(&serde_json::Value::Bool(true));
            flag("improper") || flag("non_lsc")
        })
        .count();
    let reduced = reports.iter().filter(|r| r.witnesses["subset_full"] == false).count();
    let (pass, fail, vac, err) = tally(&reports);
    let empty_a0 = run(Kind::Mm1, 4_500, 10, &params(Some(Variant::EmptyA0)));
    let a0_ok = empty_a0
        .iter()
        .filter(|r| r.status == Status::Pass && r.witnesses["subset_size"] == 0 && r.lhs == Some(ExtReal::NEG_INF))
        .count();
    let empty_dom = run(Kind::Mm1, 4_600, 10, &params(Some(Variant::EmptyDomain)));
    let dom_ok = empty_dom
        .iter()
        .filter(|r| r.status == Status::Pass && r.rhs == Some(ExtReal::POS_INF))
        .count();
    outcome(
        pass == 300 && fail + vac + err == 0 && corrupted >= 100 && reduced >= 100 && a0_ok >= 5 && dom_ok >= 5,
        format!(
            "{pass}/300 pass, {corrupted} corrupted, {reduced} with A0 a proper subset; \
             empty A0 {a0_ok}/10, sup identically +inf {dom_ok}/10{}",
            first_bad(&reports)
        ),
    )
}

fn mmb() -> Outcome {
    let reports = run(Kind::Mmb, 5_000, 200, &GenParams::default());
    let (pass, fail, vac, err) = tally(&reports);
    let violated = run(Kind::Mmb, 5_500, 50, &params(Some(Variant::Infinite)));
    let (_, vfail, vvac, verr) = tally(&violated);
    outcome(
        pass == 200 && fail + vac + err == 0 && vfail + verr == 0 && vvac == 50,
        format!(
            "{pass}/200 pass; hypothesis violations: {vvac}/50 vacuous, {vfail} fail{}",
            first_bad(&reports)
        ),
    )
}

fn simplex_duality() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (variant, count, seed, tol) in [
        (Variant::Lp, 200, 6_000, 1e-9),
        (Variant::LscImproper, 50, 6_300, 1e-6),
        (Variant::ProperNonLsc, 50, 6_400, 1e-6),
    ] {
        let reports = run(Kind::SimplexDuality, seed, count, &params(Some(variant)));
        let (pass, ..) = tally(&reports);
        let worst = reports
            .iter()
            .filter_map(|r| r.gap.map(|g| g.to_f64().abs()))
            .fold(0.0f64, f64::max);
        let tight = reports.iter().all(|r| r.tol == tol);
        ok &= pass == count && worst <= tol && tight;
        parts.push(format!(
            "{variant:?} {pass}/{count} worst gap {worst:.2e}{}",
            first_bad(&reports)
        ));
    }
    outcome(ok, parts.join(", "))
}

fn max_rule() -> Outcome {
    let reports = run(Kind::Subdiff, 7_000, 100, &GenParams::default());
    let (pass, ..) = tally(&reports);
    let eps_seen: std::collections::BTreeSet<String> = reports.iter().map(|r| r.witnesses["eps"].to_string()).collect();
    let worst = reports
        .iter()
        .filter_map(|r| r.gap)
        .map(ExtReal::to_f64)
        .fold(0.0f64, f64::max);
    let inclusion = reports.iter().all(|r| r.witnesses["inclusion_ok"] == true);

    let mut rng = rng_for(Kind::Subdiff, 7_100);
    let mut disagreements = 0;
    for _ in 0..100 {
        let f = random_convex(&mut rng, Some((-1.0, 1.0)));
        let x = (rng.gen_range(-1.0..=1.0) * 64.0f64).round() / 64.0;
        let eps = [0.0, 0.1, 1.0][rng.gen_range(0..3)];
        let exact = eps_subdifferential(&f, x, eps).expect("convex input");
        let mut nodes: Vec<f64> = linspace(-12.0, 12.0, 481);
        nodes.extend(f.breakpoints());
        nodes.extend([x, -1e4, 1e4]);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let values = nodes.iter().map(|&y| f.evaluate(y)).collect();
        let grid = GridFunction::one_d(nodes, values).expect("sorted nodes");
        let probes = linspace(-40.0, 40.0, 801);
        let inside = eps_subdiff_oracle(&grid, x, eps, &probes).expect("x is a node");
        for &s in &probes {
            let near_edge = [exact.lo, exact.hi].iter().any(|e| (e.to_f64() - s).abs() <= 1e-6);
            if !near_edge && exact.contains(s) != inside.contains(&s) {
                disagreements += 1;
            }
        }
    }
    outcome(
        pass == 100 && inclusion && worst <= 1e-6 && eps_seen.len() == 3 && disagreements == 0,
        format!(
            "max rule {pass}/100, eps values {eps_seen:?}, worst endpoint gap {worst:.2e}; \
             grid oracle disagreements {disagreements}{}",
            first_bad(&reports)
        ),
    )
}

fn monotone() -> Outcome {
    let general = run(Kind::Monotone, 8_000, 100, &GenParams::default());
    let nd = run(Kind::Monotone, 8_100, 100, &params(Some(Variant::NonDecreasing)));
    let (gp, ..) = tally(&general);
    let (np, ..) = tally(&nd);
    let nd_equal = nd
        .iter()
        .filter(|r| r.witnesses["non_decreasing"] == true && r.witnesses["monotone_lhs"] == r.witnesses["monotone_rhs"])
        .count();
    outcome(
        gp == 100 && np == 100 && nd_equal == 100,
        format!(
            "general {gp}/100, non-decreasing {np}/100 with equality in {nd_equal}{}",
            first_bad(&general)
        ),
    )
}

fn envelope() -> Outcome {
    let inside = run(Kind::Envelope, 9_000, 50, &GenParams::default());
    let outside = run(Kind::Envelope, 9_100, 10, &params(Some(Variant::Outside)));
    let (ip, ..) = tally(&inside);
    let converged = inside
        .iter()
        .filter(|r| r.hypotheses["gamma0"] && r.gap.is_some_and(|g| g.to_f64() <= 1e-6))
        .count();
    let diverged = outside
        .iter()
        .filter(|r| r.status == Status::Pass && r.hypotheses["diverges"])
        .count();
    outcome(
        ip == 50 && converged == 50 && diverged == 10,
        format!("inside {ip}/50 with gap within 1e-6 in {converged}; divergence outside {diverged}/10"),
    )
}

fn marginal() -> Outcome {
    let reports = run(Kind::Marginal, 10_000, 50, &GenParams::default());
    let (pass, ..) = tally(&reports);
    outcome(
        pass == 50,
        format!("{pass}/50 discretely convex{}", first_bad(&reports)),
    )
}

fn determinism() -> Outcome {
    let a = run_suite(&mixed_suite(11, 6), &RunOptions::default()).to_json_untimed();
    let b = run_suite(&mixed_suite(11, 6), &RunOptions::default()).to_json_untimed();
    let c = run_suite(
        &mixed_suite(11, 6),
        &RunOptions {
            jobs: Some(1),
            tol: None,
        },
    )
    .to_json_untimed();
    let single = run_scenario(&generate(Kind::Mm1, 11, &GenParams::default()), None);
    outcome(
        a == b && a == c && !single.id.is_empty(),
        format!(
            "{} bytes, identical across two runs and a single-threaded run: {}",
            a.len(),
            a == b && a == c
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("biconjugate", biconjugates),
        ("conjugate oracle", conjugate_oracle),
        ("conjugate calculus", conjugate_calculus),
        ("relaxed minimax on simplex", mm1),
        ("minimax on restricted set", mmb),
        ("simplex duality", simplex_duality),
        ("max rule", max_rule),
        ("monotone sequences", monotone),
        ("lipschitz envelope", envelope),
        ("marginal convexity", marginal),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.ok);
        println!(
            "criterion {:>2} {:<28} {} ({:.1}s) {}",
            i + 1,
            name,
            if o.ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
