use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of mesh points the λ-mesh may hold.
pub const MESH_BUDGET: usize = 60_000;

/// A point of the probability simplex `Δₙ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        SimplexPoint::new(w)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.weights
    }
}

impl SimplexPoint {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("simplex point needs at least one weight".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weights must be nonnegative: {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(SimplexPoint { weights })
    }

    /// Clamps tiny negatives produced by rounding and renormalizes.
    pub fn normalized(raw: &[f64]) -> Self {
        let clipped: Vec<f64> = raw.iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        assert!(total > 0.0, "cannot normalize a zero vector");
        SimplexPoint {
            weights: clipped.iter().map(|w| w / total).collect(),
        }
    }

    pub fn vertex(n: usize, k: usize) -> Self {
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        SimplexPoint { weights: w }
    }

    pub fn barycenter(n: usize) -> Self {
        SimplexPoint {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Barycenter of the face spanned by `support`.
    pub fn face_barycenter(n: usize, support: &[usize]) -> Self {
        let mut w = vec![0.0; n];
        for &k in support {
            w[k] = 1.0 / support.len() as f64;
        }
        SimplexPoint { weights: w }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&k| self.weights[k] > 0.0).collect()
    }

    pub fn support_mask(&self) -> u32 {
        self.support().iter().fold(0, |m, &k| m | (1 << k))
    }
}

/// Supports of all faces of `Δₙ` as index lists, ordered by bitmask.
pub fn faces(n: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n)).map(|m| mask_members(m, n)).collect()
}

pub fn mask_members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|k| mask & (1 << k) != 0).collect()
}

/// Uniform barycentric mesh with `density` steps per edge.
pub fn mesh(n: usize, density: usize) -> Vec<SimplexPoint> {
    let mut out = Vec::with_capacity(mesh_size(n, density));
    let mut parts = vec![0usize; n];
    compositions(density, 0, &mut parts, &mut |p| {
        out.push(SimplexPoint {
            weights: p.iter().map(|&c| c as f64 / density as f64).collect(),
        })
    });
    out
}

fn compositions(left: usize, k: usize, parts: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
    let n = parts.len();
    if k == n - 1 {
        parts[k] = left;
        emit(parts);
        return;
    }
    for c in (0..=left).rev() {
        parts[k] = c;
        compositions(left - c, k + 1, parts, emit);
    }
}

/// `C(density + n − 1, n − 1)`.
pub fn mesh_size(n: usize, density: usize) -> usize {
    let (top, k) = (density + n - 1, n - 1);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (top - i) as u128 / (i + 1) as u128;
    }
    r.min(usize::MAX as u128) as usize
}

/// Largest density in `8, 16, …, max` whose mesh fits in `budget` points
/// (at least 8).
pub fn density_cap(n: usize, max: usize, budget: usize) -> usize {
    let mut d = 8;
    while d * 2 <= max && mesh_size(n, d * 2) <= budget {
        d *= 2;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_weights() {
        assert!(SimplexPoint::new(vec![0.5, 0.5]).is_ok());
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![-0.1, 1.1]).is_err());
        assert!(SimplexPoint::new(vec![]).is_err());
        let p: SimplexPoint = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(p.support(), vec![0, 1]);
        assert!(serde_json::from_str::<SimplexPoint>("[0.25, 0.25]").is_err());
    }

    #[test]
    fn mesh_counts() {
        for (n, d) in [(1, 8), (2, 8), (3, 8), (4, 16), (6, 8)] {
            let m = mesh(n, d);
            assert_eq!(m.len(), mesh_size(n, d));
            for p in &m {
                assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(mesh_size(3, 8), 45);
        assert_eq!(density_cap(2, 256, MESH_BUDGET), 256);
        assert_eq!(density_cap(6, 256, MESH_BUDGET), 16);
        assert_eq!(density_cap(4, 256, MESH_BUDGET), 64);
    }

    #[test]
    fn faces_cover_supports() {
        let f = faces(3);
        assert_eq!(f.len(), 7);
        assert!(f.contains(&vec![0, 2]));
        assert_eq!(SimplexPoint::face_barycenter(3, &[0, 2]).support_mask(), 0b101);
    }
}
