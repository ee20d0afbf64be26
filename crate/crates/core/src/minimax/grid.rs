use serde::{Deserialize, Serialize};

use super::family::BifunctionFamily;
use super::simplex::SimplexPoint;
use crate::error::{Error, Result};
use crate::extreal::{fold_inf, fold_sup, ExtReal};

/// Brute-force bifunction: values on finitely many `x` nodes times a sorted
/// list of `y` nodes. Every function on a finite grid is lsc, so `A₀` and
/// `A₁` only differ through properness here.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct BifunctionGrid {
    x_nodes: Vec<Vec<f64>>,
    y_nodes: Vec<f64>,
    values: Vec<Vec<ExtReal>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRepr {
    x_nodes: Vec<Vec<f64>>,
    y_nodes: Vec<f64>,
    values: Vec<Vec<ExtReal>>,
}

impl TryFrom<GridRepr> for BifunctionGrid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        BifunctionGrid::new(r.x_nodes, r.y_nodes, r.values)
    }
}

impl BifunctionGrid {
    pub fn new(x_nodes: Vec<Vec<f64>>, y_nodes: Vec<f64>, values: Vec<Vec<ExtReal>>) -> Result<Self> {
        if x_nodes.is_empty() || y_nodes.is_empty() {
            return Err(Error::InvalidGrid("bifunction grid needs nodes on both sides".into()));
        }
        if y_nodes.iter().any(|y| !y.is_finite()) || y_nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "y nodes must be finite and strictly increasing".into(),
            ));
        }
        if values.len() != x_nodes.len() || values.iter().any(|r| r.len() != y_nodes.len()) {
            return Err(Error::InvalidGrid("value matrix shape does not match the nodes".into()));
        }
        Ok(BifunctionGrid {
            x_nodes,
            y_nodes,
            values,
        })
    }

    /// Samples `f(λ, y)` (with the restriction) at every pair of nodes.
    pub fn from_family(fam: &BifunctionFamily, lambdas: &[SimplexPoint], y_nodes: &[f64]) -> Result<Self> {
        let rows = crate::par::map(lambdas, |l| {
            fam.section(l)
                .map(|f| y_nodes.iter().map(|&y| f.evaluate(y)).collect::<Vec<_>>())
        });
        let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
        let x_nodes = lambdas.iter().map(|l| l.weights().to_vec()).collect();
        BifunctionGrid::new(x_nodes, y_nodes.to_vec(), values)
    }

    pub fn x_nodes(&self) -> &[Vec<f64>] {
        &self.x_nodes
    }

    pub fn y_nodes(&self) -> &[f64] {
        &self.y_nodes
    }

    pub fn row(&self, i: usize) -> &[ExtReal] {
        &self.values[i]
    }

    /// Whether row `i` extends to a convex function of `y`.
    pub fn row_is_convex(&self, i: usize) -> bool {
        let v = &self.values[i];
        let y = &self.y_nodes;
        let dom: Vec<usize> = (0..v.len()).filter(|&j| !v[j].is_pos_inf()).collect();
        let (Some(&p), Some(&q)) = (dom.first(), dom.last()) else {
            return true;
        };
        if q - p + 1 != dom.len() {
            return false;
        }
        if v[p..=q].iter().any(|x| x.is_neg_inf()) {
            return (p + 1..q).all(|j| v[j].is_neg_inf());
        }
        let slopes: Vec<f64> = (p..q)
            .map(|j| (v[j + 1].to_f64() - v[j].to_f64()) / (y[j + 1] - y[j]))
            .collect();
        slopes
            .windows(2)
            .all(|w| w[1] >= w[0] - 1e-9 * 1f64.max(w[0].abs()).max(w[1].abs()))
    }

    pub fn row_is_proper(&self, i: usize) -> bool {
        let v = &self.values[i];
        v.iter().all(|x| !x.is_neg_inf()) && v.iter().any(|x| x.is_finite())
    }

    pub fn classify_a0(&self) -> Vec<usize> {
        (0..self.x_nodes.len())
            .filter(|&i| self.row_is_proper(i) && self.row_is_convex(i))
            .collect()
    }

    pub fn classify_a1(&self) -> Vec<usize> {
        (0..self.x_nodes.len()).filter(|&i| self.row_is_convex(i)).collect()
    }

    /// `min_y max_{i∈rows} f(xᵢ, y)`; `−∞` for no rows.
    pub fn lhs(&self, rows: &[usize]) -> ExtReal {
        if rows.is_empty() {
            return ExtReal::NEG_INF;
        }
        fold_inf((0..self.y_nodes.len()).map(|j| fold_sup(rows.iter().map(|&i| self.values[i][j]))))
    }

    /// `max_i min_y f(xᵢ, y)` with the first maximizing row.
    pub fn rhs(&self) -> (ExtReal, usize) {
        let mut best = (ExtReal::NEG_INF, 0);
        for (i, r) in self.values.iter().enumerate() {
            let v = fold_inf(r.iter().copied());
            if v > best.0 || i == 0 {
                best = (v, i);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::{linspace, PwlFunction};
    use crate::minimax::simplex::mesh;

    #[test]
    fn non_convex_row_is_excluded() {
        let vals = vec![
            vec![2.0, 1.0, 2.0].into_iter().map(ExtReal::new).collect(),
            vec![0.0, 2.0, 1.0].into_iter().map(ExtReal::new).collect(),
        ];
        let g = BifunctionGrid::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 1.0, 2.0], vals).unwrap();
        assert_eq!(g.classify_a1(), vec![0]);
        assert_eq!(g.lhs(&[0]), ExtReal::new(1.0));
        assert_eq!(g.lhs(&[]), ExtReal::NEG_INF);
        assert_eq!(g.rhs(), (ExtReal::new(1.0), 0));
    }

    #[test]
    fn improper_row_is_convex_not_proper() {
        let inf = ExtReal::POS_INF;
        let row = vec![
            inf,
            ExtReal::new(1.0),
            ExtReal::NEG_INF,
            ExtReal::NEG_INF,
            ExtReal::ZERO,
            inf,
        ];
        let g = BifunctionGrid::new(vec![vec![1.0]], (0..6).map(f64::from).collect(), vec![row]).unwrap();
        assert!(g.row_is_convex(0));
        assert!(g.classify_a0().is_empty());
    }

    #[test]
    fn agrees_with_family_on_matching_grid() {
        let fam =
            BifunctionFamily::unrestricted(vec![PwlFunction::abs_at(0.0, 1.0), PwlFunction::abs_at(1.0, 1.0)]).unwrap();
        let g = BifunctionGrid::from_family(&fam, &mesh(2, 8), &linspace(-2.0, 3.0, 21)).unwrap();
        let (rhs, i) = g.rhs();
        assert!(rhs.approx_eq(ExtReal::new(0.5), 1e-12));
        assert_eq!(g.x_nodes()[i], vec![0.5, 0.5]);
        assert!(g.lhs(&g.classify_a0()).approx_eq(ExtReal::new(0.5), 1e-12));
    }
}
