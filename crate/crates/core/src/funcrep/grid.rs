use serde::{Deserialize, Serialize};

use super::pwl::PwlFunction;
use crate::error::{Error, Result};
use crate::extreal::{fold_inf, fold_sup, ExtReal, NonNegative};

/// Extended-real values on a rectangular lattice in one or two dimensions,
/// stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct GridFunction {
    axes: Vec<Vec<f64>>,
    values: Vec<ExtReal>,
}

#[derive(Deserialize)]
struct GridRepr {
    axes: Vec<Vec<f64>>,
    values: Vec<ExtReal>,
}

impl TryFrom<GridRepr> for GridFunction {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        GridFunction::new(r.axes, r.values)
    }
}

impl GridFunction {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<ExtReal>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        if axes.is_empty() || axes.len() > 2 {
            return bad(format!("dimension {} not in {{1, 2}}", axes.len()));
        }
        for (k, ax) in axes.iter().enumerate() {
            if ax.is_empty() {
                return bad(format!("axis {k} is empty"));
            }
            if ax.iter().any(|x| !x.is_finite()) || ax.windows(2).any(|w| w[1] <= w[0]) {
                return bad(format!("axis {k} must be finite and strictly increasing"));
            }
        }
        let n: usize = axes.iter().map(Vec::len).product();
        if values.len() != n {
            return bad(format!("{} values for {n} nodes", values.len()));
        }
        Ok(GridFunction { axes, values })
    }

    pub fn one_d(axis: Vec<f64>, values: Vec<ExtReal>) -> Result<Self> {
        GridFunction::new(vec![axis], values)
    }

    /// Samples `f` at every node of `axis`.
    pub fn sample(f: &PwlFunction, axis: &[f64]) -> Result<Self> {
        GridFunction::one_d(axis.to_vec(), axis.iter().map(|&x| f.evaluate(x)).collect())
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        match *idx {
            [i] => i,
            [i, j] => i * self.axes[1].len() + j,
            _ => panic!("index dimension mismatch"),
        }
    }

    /// Value at the node with the given per-axis indices.
    pub fn grid_eval(&self, idx: &[usize]) -> ExtReal {
        assert_eq!(idx.len(), self.dim(), "index dimension mismatch");
        self.values[self.flat(idx)]
    }

    /// Value at an exact node coordinate of a 1-D grid.
    pub fn at(&self, x: f64) -> Option<ExtReal> {
        self.axes[0]
            .iter()
            .position(|&a| (a - x).abs() <= 1e-12 * 1f64.max(x.abs()))
            .map(|i| self.values[i])
    }

    pub fn grid_inf(&self) -> ExtReal {
        fold_inf(self.values.iter().copied())
    }

    pub fn grid_sup(&self) -> ExtReal {
        fold_sup(self.values.iter().copied())
    }

    /// Discrete midpoint convexity along every axis-aligned triple of
    /// collinear equally spaced nodes.
    pub fn grid_convexity_check(&self, tol: f64) -> bool {
        self.convexity_violation(tol).is_none()
    }

    /// First failing triple as flat node indices `(left, mid, right)`.
    pub fn convexity_violation(&self, tol: f64) -> Option<(usize, usize, usize)> {
        let half = NonNegative::new(0.5).unwrap();
        let lines: Vec<Vec<usize>> = match self.dim() {
            1 => vec![(0..self.len()).collect()],
            _ => {
                let (r, c) = (self.axes[0].len(), self.axes[1].len());
                let rows = (0..r).map(|i| (0..c).map(|j| i * c + j).collect());
                let cols = (0..c).map(|j| (0..r).map(|i| i * c + j).collect());
                rows.chain(cols).collect()
            }
        };
        for (li, line) in lines.iter().enumerate() {
            let axis = if self.dim() == 1 || li < self.axes[0].len() {
                self.axes[self.dim() - 1].as_slice()
            } else {
                self.axes[0].as_slice()
            };
            let n = line.len();
            for m in 1..n.saturating_sub(1) {
                for h in 1..=m.min(n - 1 - m) {
                    let (a, b, c) = (axis[m - h], axis[m], axis[m + h]);
                    let span = (c - a).abs();
                    if ((b - a) - (c - b)).abs() > 1e-9 * span {
                        continue;
                    }
                    let (l, mid, r) = (line[m - h], line[m], line[m + h]);
                    let avg = self.values[l].scale(half) + self.values[r].scale(half);
                    if !self.values[mid].approx_le(avg, tol) {
                        return Some((l, mid, r));
                    }
                }
            }
        }
        None
    }
}

/// Evenly spaced axis with `n ≥ 2` nodes on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two nodes");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(vals: &[f64]) -> GridFunction {
        let axis = (0..vals.len()).map(|i| i as f64).collect();
        GridFunction::one_d(axis, vals.iter().map(|&v| ExtReal::new(v)).collect()).unwrap()
    }

    #[test]
    fn scans() {
        assert_eq!(g1(&[3.0, 1.0, 2.0]).grid_inf(), ExtReal::new(1.0));
        let all_neg = GridFunction::one_d(vec![0.0, 1.0], vec![ExtReal::NEG_INF; 2]).unwrap();
        assert_eq!(all_neg.grid_sup(), ExtReal::NEG_INF);
    }

    #[test]
    fn midpoint_convexity() {
        assert!(!g1(&[0.0, 2.0, 3.0]).grid_convexity_check(1e-12));
        assert!(g1(&[3.0, 1.0, 0.0, 1.0, 3.0]).grid_convexity_check(1e-12));
        // non-adjacent triple catches what adjacent ones miss on an uneven axis
        let g = GridFunction::one_d(
            vec![0.0, 1.0, 2.0, 2.5],
            vec![0.0, 1.0, 0.0, 0.0].into_iter().map(ExtReal::new).collect(),
        )
        .unwrap();
        assert!(!g.grid_convexity_check(1e-12));
    }

    #[test]
    fn two_d_checks_both_axes() {
        let axes = vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]];
        let vals: Vec<ExtReal> = (0..9)
            .map(|k| {
                let (i, j) = ((k / 3) as f64 - 1.0, (k % 3) as f64 - 1.0);
                ExtReal::new(i * i + j.abs())
            })
            .collect();
        let g = GridFunction::new(axes.clone(), vals.clone()).unwrap();
        assert!(g.grid_convexity_check(1e-12));
        assert_eq!(g.grid_eval(&[1, 1]), ExtReal::ZERO);
        let mut bad = vals;
        bad[3 * 2 + 1] = ExtReal::new(-5.0);
        bad[3 + 1] = ExtReal::new(7.0);
        assert!(!GridFunction::new(axes, bad).unwrap().grid_convexity_check(1e-12));
    }

    #[test]
    fn validation() {
        assert!(GridFunction::one_d(vec![0.0, 0.0], vec![ExtReal::ZERO; 2]).is_err());
        assert!(GridFunction::one_d(vec![0.0, 1.0], vec![ExtReal::ZERO]).is_err());
        let json = serde_json::json!({"axes": [[0.0, 1.0]], "values": [0, "inf"]});
        let g: GridFunction = serde_json::from_value(json).unwrap();
        assert_eq!(g.grid_sup(), ExtReal::POS_INF);
    }
}
