use serde::{Deserialize, Serialize};

use super::simplex::{self, SimplexPoint};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcrep::{merge_breakpoints, pointwise_max, sum, weighted_sum, Interval, PwlFunction};

/// `f(λ, y) = Σ λₖ gₖ(y)` for `λ ∈ Δₙ`, optionally restricted to `y ∈ B`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifunctionFamily {
    pub generators: Vec<PwlFunction>,
    #[serde(default)]
    pub y_restriction: Option<Interval>,
}

impl BifunctionFamily {
    pub fn new(generators: Vec<PwlFunction>, y_restriction: Option<Interval>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if generators.len() > 16 {
            return Err(Error::InvalidArgument("at most 16 generators are supported".into()));
        }
        Ok(BifunctionFamily {
            generators,
            y_restriction,
        })
    }

    pub fn unrestricted(generators: Vec<PwlFunction>) -> Result<Self> {
        Self::new(generators, None)
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }

    fn check_lambda(&self, lambda: &SimplexPoint) -> Result<()> {
        if lambda.dim() == self.n() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                left: lambda.dim(),
                right: self.n(),
            })
        }
    }

    /// `I_B`, or `None` without a restriction.
    pub fn restriction_indicator(&self) -> Option<PwlFunction> {
        self.y_restriction
            .map(|b| PwlFunction::indicator(b).expect("restriction interval is valid"))
    }

    /// `f(λ,·)` on all of `Y`.
    pub fn raw_section(&self, lambda: &SimplexPoint) -> Result<PwlFunction> {
        self.check_lambda(lambda)?;
        weighted_sum(lambda.weights(), &self.generators)
    }

    /// `f(λ,·) + I_B`.
    pub fn section(&self, lambda: &SimplexPoint) -> Result<PwlFunction> {
        let f = self.raw_section(lambda)?;
        Ok(self.restrict(&f))
    }

    pub fn restrict(&self, f: &PwlFunction) -> PwlFunction {
        match self.restriction_indicator() {
            Some(ind) => sum(f, &ind),
            None => f.clone(),
        }
    }

    pub fn value(&self, lambda: &SimplexPoint, y: f64) -> Result<ExtReal> {
        Ok(self.section(lambda)?.evaluate(y))
    }

    /// Generators `gₖ + I_B`.
    pub fn effective_generators(&self) -> Vec<PwlFunction> {
        self.generators.iter().map(|g| self.restrict(g)).collect()
    }

    /// The same family with the restriction folded into the generators.
    pub fn localized(&self) -> BifunctionFamily {
        BifunctionFamily {
            generators: self.effective_generators(),
            y_restriction: None,
        }
    }

    /// Family of `gₖ(y) − s·y`.
    pub fn tilted(&self, s: f64) -> BifunctionFamily {
        let line = PwlFunction::affine(-s, 0.0);
        BifunctionFamily {
            generators: self.generators.iter().map(|g| sum(g, &line)).collect(),
            y_restriction: self.y_restriction,
        }
    }

    /// `sup_{λ ∈ ri S} f(λ,·)` on all of `Y` for the face with support `S`.
    pub fn face_sup(&self, support: &[usize]) -> PwlFunction {
        let members: Vec<PwlFunction> = support.iter().map(|&k| self.generators[k].clone()).collect();
        let mut h = pointwise_max(&members).expect("nonempty face");
        for k in 0..self.n() {
            let extra = if support.contains(&k) {
                self.generators[k].infinity_pattern()
            } else {
                self.generators[k].zero_scaled()
            };
            h = sum(&h, &extra);
        }
        h
    }

    pub fn all_convex(&self) -> bool {
        self.generators.iter().all(PwlFunction::is_convex)
    }

    /// Every generator finite everywhere and continuous.
    pub fn finite_continuous(&self) -> bool {
        self.generators.iter().all(|g| {
            g.values().iter().all(|v| v.is_finite())
                && g.finite_on(&Interval::whole_line())
                && (0..g.breakpoints().len())
                    .all(|i| g.limit_before(i) == g.values()[i] && g.limit_after(i) == g.values()[i])
        })
    }
}

/// Which subset of `Δₙ` a classification describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    /// Sections in Γ₀.
    A0,
    /// Convex sections.
    A1,
    Full,
}

/// How the subset was determined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassMode {
    /// Exact: membership is constant on each open face.
    Faces,
    /// Exact: the subset is a polytope given by its vertices.
    Polytope,
    /// Sampled on a barycentric mesh.
    Mesh,
}

/// A classified subset of `Δₙ`.
#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub subset: Subset,
    pub mode: ClassMode,
    /// Member faces (`Faces` mode).
    pub faces: Vec<Vec<usize>>,
    /// Vertices (`Polytope` mode) or member mesh points (`Mesh` mode).
    pub points: Vec<SimplexPoint>,
    /// Every probed mesh point with its membership.
    pub probes: Vec<(SimplexPoint, bool)>,
    pub full: bool,
}

impl Classification {
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty() && self.points.is_empty()
    }

    pub fn size(&self) -> usize {
        self.faces.len() + self.points.len()
    }

    /// Membership of `λ`, decided from the exact description when there is
    /// one.
    pub fn contains(&self, lambda: &SimplexPoint) -> Option<bool> {
        match self.mode {
            ClassMode::Faces => Some(self.faces.contains(&lambda.support())),
            _ => None,
        }
    }
}

/// Membership predicate behind a subset.
pub fn member(fam: &BifunctionFamily, subset: Subset, lambda: &SimplexPoint) -> bool {
    match subset {
        Subset::A0 => fam.section(lambda).map(|f| f.is_gamma0()).unwrap_or(false),
        Subset::A1 => fam.raw_section(lambda).map(|f| f.is_convex()).unwrap_or(false),
        Subset::Full => true,
    }
}

/// `A₀ = {λ : f(λ,·) + I_B ∈ Γ₀}`.
pub fn classify_a0(fam: &BifunctionFamily, density: usize) -> Classification {
    classify(fam, Subset::A0, density)
}

/// `A₁ = {λ : f(λ,·) convex on Y}`.
pub fn classify_a1(fam: &BifunctionFamily, density: usize) -> Classification {
    classify(fam, Subset::A1, density)
}

pub fn classify(fam: &BifunctionFamily, subset: Subset, density: usize) -> Classification {
    let n = fam.n();
    let probes: Vec<(SimplexPoint, bool)> =
        crate::par::map(&simplex::mesh(n, density), |p| (p.clone(), member(fam, subset, p)));
    let all_faces = simplex::faces(n);
    if subset == Subset::Full {
        return Classification {
            subset,
            mode: ClassMode::Faces,
            faces: all_faces,
            points: vec![],
            probes,
            full: true,
        };
    }
    if fam.all_convex() {
        let flags = crate::par::map(&all_faces, |s| {
            member(fam, subset, &SimplexPoint::face_barycenter(n, s))
        });
        let faces: Vec<Vec<usize>> = all_faces
            .into_iter()
            .zip(flags)
            .filter_map(|(s, ok)| ok.then_some(s))
            .collect();
        let full = faces.len() == (1 << n) - 1;
        return Classification {
            subset,
            mode: ClassMode::Faces,
            faces,
            points: vec![],
            probes,
            full,
        };
    }
    let restricted_ok = subset == Subset::A1 || fam.y_restriction.is_none();
    if n <= 4 && restricted_ok && fam.finite_continuous() {
        let (points, full) = convexity_polytope(fam);
        return Classification {
            subset,
            mode: ClassMode::Polytope,
            faces: vec![],
            points,
            probes,
            full,
        };
    }
    let points: Vec<SimplexPoint> = probes.iter().filter(|(_, ok)| *ok).map(|(p, _)| p.clone()).collect();
    let full = points.len() == probes.len();
    Classification {
        subset,
        mode: ClassMode::Mesh,
        faces: vec![],
        points,
        probes,
        full,
    }
}

/// Vertices of `{λ ∈ Δₙ : Σ λₖ (s⁺ₖ(b) − s⁻ₖ(b)) ≥ 0 at every breakpoint b}`,
/// the set of convex sections of a finite continuous family. The flag tells
/// whether the polytope is all of `Δₙ`.
fn convexity_polytope(fam: &BifunctionFamily) -> (Vec<SimplexPoint>, bool) {
    let n = fam.n();
    let grid = merge_breakpoints(&fam.generators);
    let parts: Vec<PwlFunction> = fam.generators.iter().map(|g| g.refine(&grid)).collect();
    // rows a with a·λ ≥ 0
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..grid.len() {
        let jumps: Vec<f64> = parts
            .iter()
            .map(|g| {
                let after = g.piece_after(i).slope().expect("finite piece");
                let before = g.piece_before(i).slope().expect("finite piece");
                after - before
            })
            .collect();
        if jumps.iter().any(|j| *j < 0.0) {
            rows.push(jumps);
        }
    }
    let full = rows.is_empty();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        rows.push(e);
    }
    let feasible = |l: &[f64]| {
        rows.iter().all(|r| {
            let scale = r.iter().fold(1f64, |m, a| m.max(a.abs()));
            r.iter().zip(l).map(|(a, b)| a * b).sum::<f64>() >= -1e-10 * scale
        })
    };
    let mut out: Vec<SimplexPoint> = Vec::new();
    for combo in combinations(rows.len(), n - 1) {
        let mut a: Vec<Vec<f64>> = combo.iter().map(|&i| rows[i].clone()).collect();
        a.push(vec![1.0; n]);
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        let Some(l) = solve_dense(a, b) else { continue };
        if !feasible(&l) {
            continue;
        }
        let p = SimplexPoint::normalized(&l);
        let dup = out
            .iter()
            .any(|q| q.weights().iter().zip(p.weights()).all(|(x, y)| (x - y).abs() <= 1e-10));
        if !dup {
            out.push(p);
        }
    }
    (out, full)
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        let scale = a[p].iter().fold(0f64, |m, v| m.max(v.abs()));
        if a[p][c].abs() <= 1e-12 * scale.max(1e-300) {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                if f != 0.0 {
                    let pivot = a[c].clone();
                    for (x, p) in a[r][c..].iter_mut().zip(&pivot[c..]) {
                        *x -= f * p;
                    }
                    b[r] -= f * b[c];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(lo: f64, hi: f64, lc: bool, hc: bool) -> PwlFunction {
        PwlFunction::indicator(Interval::new(lo, hi, lc, hc)).unwrap()
    }

    fn fam(gens: Vec<PwlFunction>) -> BifunctionFamily {
        BifunctionFamily::unrestricted(gens).unwrap()
    }

    #[test]
    fn improper_member_shrinks_a0() {
        let f = fam(vec![ind(0.0, 1.0, true, true), PwlFunction::constant(ExtReal::NEG_INF)]);
        let c = classify_a0(&f, 8);
        assert_eq!(c.mode, ClassMode::Faces);
        assert_eq!(c.faces, vec![vec![0]]);
        let a1 = classify_a1(&f, 8);
        assert!(a1.full);
    }

    #[test]
    fn non_lsc_everywhere_empties_a0() {
        let f = fam(vec![ind(0.0, 1.0, false, true), PwlFunction::affine(1.0, 0.0)]);
        assert!(classify_a0(&f, 8).is_empty());
    }

    #[test]
    fn gamma0_generators_fill_simplex() {
        let f = fam(vec![PwlFunction::abs_at(0.0, 1.0), PwlFunction::abs_at(1.0, 1.0)]);
        let c = classify_a0(&f, 8);
        assert!(c.full);
        assert_eq!(c.size(), 3);
    }

    #[test]
    fn face_constancy_on_mesh() {
        let f = fam(vec![
            ind(0.0, 1.0, false, true),
            PwlFunction::constant(ExtReal::NEG_INF),
            PwlFunction::abs_at(0.5, 2.0),
        ]);
        for subset in [Subset::A0, Subset::A1] {
            let c = classify(&f, subset, 8);
            for (p, ok) in &c.probes {
                assert_eq!(c.contains(p), Some(*ok), "{p:?}");
            }
        }
    }

    #[test]
    fn polytope_for_nonconvex_finite_family() {
        // g₁ = |y|, g₂ = −|y|: sections convex iff λ₁ ≥ λ₂
        let f = fam(vec![PwlFunction::abs_at(0.0, 1.0), PwlFunction::abs_at(0.0, -1.0)]);
        assert!(f.finite_continuous());
        let c = classify_a1(&f, 8);
        assert_eq!(c.mode, ClassMode::Polytope);
        let mut ws: Vec<Vec<f64>> = c.points.iter().map(|p| p.weights().to_vec()).collect();
        ws.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(ws, vec![vec![0.5, 0.5], vec![1.0, 0.0]]);
        for (p, ok) in &c.probes {
            assert_eq!(*ok, p.weights()[0] >= p.weights()[1]);
        }
    }

    #[test]
    fn face_sup_conventions() {
        let f = fam(vec![ind(0.0, 1.0, true, true), PwlFunction::constant(ExtReal::NEG_INF)]);
        let h = f.face_sup(&[0, 1]);
        assert_eq!(h.evaluate(0.5), ExtReal::NEG_INF);
        assert_eq!(h.evaluate(2.0), ExtReal::POS_INF);
        let h0 = f.face_sup(&[0]);
        assert_eq!(h0.evaluate(0.5), ExtReal::ZERO);
        let g = fam(vec![PwlFunction::affine(1.0, 0.0), PwlFunction::affine(-1.0, 0.0)]);
        assert!(g.face_sup(&[0, 1]).approx_eq(&PwlFunction::abs_at(0.0, 1.0), 1e-12));
    }

    #[test]
    fn json_shape() {
        let json = r#"{"generators": [{"breakpoints": [0.0], "values": [0.0], "segments": [],
            "left_tail": {"slope": -1.0, "limit": 0.0}, "right_tail": {"slope": 1.0, "limit": 0.0}}],
            "y_restriction": {"lo": 0.0, "hi": 1.0, "lo_closed": true, "hi_closed": false}}"#;
        let f: BifunctionFamily = serde_json::from_str(json).unwrap();
        assert_eq!(f.n(), 1);
        assert_eq!(f.value(&SimplexPoint::vertex(1, 0), 1.0).unwrap(), ExtReal::POS_INF);
    }
}
