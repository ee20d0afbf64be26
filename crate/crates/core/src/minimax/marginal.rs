use serde::Serialize;

use super::duality::{rhs_value, DualMode, VerifyOptions};
use super::family::BifunctionFamily;
use super::simplex::{self, SimplexPoint, MESH_BUDGET};
use crate::conjugate::conjugate;
use crate::extreal::ExtReal;
use crate::funcrep::{linspace, GridFunction};
use crate::status::Status;

#[derive(Clone, Debug, Serialize)]
pub struct MarginalReport {
    pub dual_axis: Vec<f64>,
    /// `g(s) = min_λ (f(λ,·))*(s)` over the probed `λ`.
    pub values: Vec<ExtReal>,
    pub convex: bool,
    /// Grids carry no closure information.
    pub lsc_automatic: bool,
    pub density: usize,
    pub probes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<[f64; 3]>,
    pub status: Status,
}

/// Symmetric dual axis covering every finite slope of the generators.
pub fn default_dual_axis(fam: &BifunctionFamily, nodes: usize) -> Vec<f64> {
    let m = fam
        .effective_generators()
        .iter()
        .map(|g| g.max_abs_slope())
        .fold(0.0, f64::max);
    let r = m + 1.0;
    linspace(-r, r, nodes.max(3))
}

/// Convexity of the marginal `g(s) = inf_λ (f(λ,·))*(s)` on a dual grid.
/// Each node also probes the maximizer of the tilted family
/// `gₖ(y) − s·y`, which attains the infimum there, so the mesh only has to
/// supply the remaining candidates.
pub fn marginal_check(fam: &BifunctionFamily, dual_axis: &[f64], opts: &VerifyOptions) -> MarginalReport {
    let n = fam.n();
    let certificates: Vec<SimplexPoint> = crate::par::map(dual_axis, |&s| {
        rhs_value(&fam.tilted(s), DualMode::Lp, opts.density).lambda
    });
    let cap = simplex::density_cap(n, opts.max_density.max(opts.density), MESH_BUDGET);
    let mut d = opts.density.max(1);
    loop {
        let mut probes = simplex::mesh(n, d);
        probes.extend(certificates.iter().cloned());
        let conj = crate::par::map(&probes, |l| conjugate(&fam.section(l).expect("probe matches family")));
        let values: Vec<ExtReal> = dual_axis
            .iter()
            .map(|&s| conj.iter().map(|c| c.evaluate(s)).fold(ExtReal::POS_INF, ExtReal::min))
            .collect();
        let grid = GridFunction::one_d(dual_axis.to_vec(), values.clone()).expect("axis is increasing");
        let violation = grid.convexity_violation(opts.tol);
        if violation.is_none() || d * 2 > cap {
            return MarginalReport {
                dual_axis: dual_axis.to_vec(),
                values,
                convex: violation.is_none(),
                lsc_automatic: true,
                density: d,
                probes: probes.len(),
                violation: violation.map(|(a, b, c)| [dual_axis[a], dual_axis[b], dual_axis[c]]),
                status: Status::from_check(violation.is_none()),
            };
        }
        d *= 2;
    }
}
