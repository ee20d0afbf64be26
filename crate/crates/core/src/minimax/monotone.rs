use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::{fold_inf, fold_sup, ExtReal};
use crate::funcrep::GridFunction;
use crate::status::Status;

/// Finite sequence `φ₁, φ₂, …` of functions on one common finite grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SequenceRepr")]
pub struct FunctionSequence {
    terms: Vec<GridFunction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceRepr {
    terms: Vec<GridFunction>,
}

impl TryFrom<SequenceRepr> for FunctionSequence {
    type Error = Error;

    fn try_from(r: SequenceRepr) -> Result<Self> {
        FunctionSequence::new(r.terms)
    }
}

impl FunctionSequence {
    pub fn new(terms: Vec<GridFunction>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::EmptyFamily);
        };
        if terms.iter().any(|t| t.axes() != first.axes()) {
            return Err(Error::InvalidGrid("sequence terms must share one grid".into()));
        }
        Ok(FunctionSequence { terms })
    }

    pub fn terms(&self) -> &[GridFunction] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn nodes(&self) -> usize {
        self.terms[0].len()
    }

    /// `φᵢ ≤ φᵢ₊₁` at every node.
    pub fn is_non_decreasing(&self) -> bool {
        self.terms
            .windows(2)
            .all(|w| w[0].values().iter().zip(w[1].values()).all(|(a, b)| a <= b))
    }

    /// `ψᵢ = min_{j≥i} φⱼ`, node by node.
    pub fn tail_infima(&self) -> Vec<Vec<ExtReal>> {
        let mut out = vec![Vec::new(); self.len()];
        let mut acc = vec![ExtReal::POS_INF; self.nodes()];
        for i in (0..self.len()).rev() {
            for (a, v) in acc.iter_mut().zip(self.terms[i].values()) {
                *a = ExtReal::min(*a, *v);
            }
            out[i] = acc.clone();
        }
        out
    }
}

fn min_max(rows: &[Vec<ExtReal>]) -> ExtReal {
    let nodes = rows[0].len();
    fold_inf((0..nodes).map(|x| fold_sup(rows.iter().map(|r| r[x]))))
}

fn max_min(rows: &[Vec<ExtReal>]) -> ExtReal {
    fold_sup(rows.iter().map(|r| fold_inf(r.iter().copied())))
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneReport {
    pub theorem: String,
    /// `min_x max_i ψᵢ(x)`.
    pub lhs: ExtReal,
    /// `max_i min_x ψᵢ(x)`.
    pub rhs: ExtReal,
    pub equality_holds: bool,
    pub non_decreasing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone_lhs: Option<ExtReal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone_rhs: Option<ExtReal>,
    /// `min_x max_{i≤L} φᵢ(x)` for `L = 1, 2, …`.
    pub truncation_values: Vec<ExtReal>,
    pub truncation_monotone: bool,
    pub status: Status,
}

/// Minimax identities for a finite sequence on a finite grid, where the
/// closure is the identity.
pub fn monotone_minimax(seq: &FunctionSequence) -> MonotoneReport {
    let psi = seq.tail_infima();
    let lhs = min_max(&psi);
    let rhs = max_min(&psi);
    let equality_holds = lhs == rhs;
    let phi: Vec<Vec<ExtReal>> = seq.terms.iter().map(|t| t.values().to_vec()).collect();
    let non_decreasing = seq.is_non_decreasing();
    let (monotone_lhs, monotone_rhs) = if non_decreasing {
        (Some(min_max(&phi)), Some(max_min(&phi)))
    } else {
        (None, None)
    };
    let truncation_values: Vec<ExtReal> = (1..=phi.len()).map(|l| min_max(&phi[..l])).collect();
    let truncation_monotone = truncation_values.windows(2).all(|w| w[0] <= w[1]);
    let ok = equality_holds && monotone_lhs == monotone_rhs && truncation_monotone;
    MonotoneReport {
        theorem: "monotone".into(),
        lhs,
        rhs,
        equality_holds,
        non_decreasing,
        monotone_lhs,
        monotone_rhs,
        truncation_values,
        truncation_monotone,
        status: Status::from_check(ok),
    }
}
