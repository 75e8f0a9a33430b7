//! The similarity decision: canonicalize both sides, compare per-cell
//! signatures across the coordinate matching, and on demand assemble an
//! exact cellwise witness from the two canonical conjugators.

use std::fmt;

use nnormal_core::{refine_common, CellId, Matrix, OperatorModel, Scalar};

use crate::canon::canonicalize;
use crate::error::CanonError;
use crate::invariant::{sig_text, signature};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Similar,
    NotSimilar,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Similar => write!(f, "similar"),
            Verdict::NotSimilar => write!(f, "not-similar"),
        }
    }
}

/// The first cell (in left partition order, then right) whose signatures
/// disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub cell: CellId,
    pub coordinate: Scalar,
    pub left: Vec<(usize, usize)>,
    pub right: Vec<(usize, usize)>,
}

/// Cellwise invertible intertwiner: for each matched covered pair,
/// `matrix · fiber(A, left) = fiber(B, right) · matrix`, verified
/// exactly at construction.
#[derive(Clone, Debug)]
pub struct Witness {
    pub cells: Vec<(CellId, CellId, Matrix)>,
}

#[derive(Clone, Debug)]
pub struct SimilarityReport {
    pub verdict: Verdict,
    pub divergence: Option<Divergence>,
    pub witness: Option<Witness>,
    /// True when the operands were not both full-support models over one
    /// coordinate set; the verdict then rests on the cellwise signature
    /// comparison rather than the single-measure case.
    pub extension_used: bool,
}

impl fmt::Display for SimilarityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        if let Some(d) = &self.divergence {
            writeln!(
                f,
                "divergence: cell {} (coordinate {}): A = {}, B = {}",
                d.cell,
                d.coordinate,
                sig_text(&d.left),
                sig_text(&d.right)
            )?;
        }
        writeln!(f, "extension: {}", self.extension_used)?;
        if let Some(w) = &self.witness {
            writeln!(f, "witness: {} matched cell pair(s), verified exactly", w.cells.len())?;
        }
        Ok(())
    }
}

/// Decides similarity of two structurally valid (possibly raw) models.
pub fn are_similar(
    a: &OperatorModel,
    b: &OperatorModel,
    want_witness: bool,
) -> Result<SimilarityReport, CanonError> {
    let ca = canonicalize(a)?;
    let cb = canonicalize(b)?;
    let sig_a = signature(&ca.model)?;
    let sig_b = signature(&cb.model)?;
    let matching = refine_common(a.partition(), b.partition());

    let full_support = |m: &OperatorModel| {
        m.blocks()
            .iter()
            .all(|mb| m.partition().ids().all(|id| mb.block.covers(id)))
    };
    let extension_used = !(matching.unmatched_left.is_empty()
        && matching.unmatched_right.is_empty()
        && full_support(&ca.model)
        && full_support(&cb.model));

    let mut divergence = None;
    for (left, right) in &matching.matched {
        let sa = sig_a.at(left);
        let sb = sig_b.at(right);
        if sa != sb {
            divergence = Some(Divergence {
                cell: left.clone(),
                coordinate: a
                    .partition()
                    .get(left)
                    .expect("matched cell exists")
                    .coordinate
                    .clone(),
                left: sa.to_vec(),
                right: sb.to_vec(),
            });
            break;
        }
    }
    if divergence.is_none() {
        for id in &matching.unmatched_left {
            let sa = sig_a.at(id);
            if !sa.is_empty() {
                divergence = Some(Divergence {
                    cell: id.clone(),
                    coordinate: a.partition().get(id).expect("cell exists").coordinate.clone(),
                    left: sa.to_vec(),
                    right: Vec::new(),
                });
                break;
            }
        }
    }
    if divergence.is_none() {
        for id in &matching.unmatched_right {
            let sb = sig_b.at(id);
            if !sb.is_empty() {
                divergence = Some(Divergence {
                    cell: id.clone(),
                    coordinate: b.partition().get(id).expect("cell exists").coordinate.clone(),
                    left: Vec::new(),
                    right: sb.to_vec(),
                });
                break;
            }
        }
    }

    if let Some(d) = divergence {
        return Ok(SimilarityReport {
            verdict: Verdict::NotSimilar,
            divergence: Some(d),
            witness: None,
            extension_used,
        });
    }

    let witness = if want_witness {
        let mut cells = Vec::new();
        for (left, right) in &matching.matched {
            let sa = ca.conjugators.get(left).ok_or(CanonError::Internal("missing conjugator"))?;
            let sb = cb.conjugators.get(right).ok_or(CanonError::Internal("missing conjugator"))?;
            if sa.rows() == 0 && sb.rows() == 0 {
                continue;
            }
            let sb_inv =
                sb.inverse().ok_or(CanonError::Internal("conjugator not invertible"))?;
            let w = &sb_inv * sa;
            // equal signatures at equal coordinates give equal canonical
            // fibers, so w intertwines the raw fibers; verify anyway
            let fa = a.fiber(left);
            let fb = b.fiber(right);
            if &(&w * &fa) != &(&fb * &w) {
                return Err(CanonError::Internal("witness failed the intertwining identity"));
            }
            if w.inverse().is_none() {
                return Err(CanonError::Internal("witness fiber not invertible"));
            }
            cells.push((left.clone(), right.clone(), w));
        }
        Some(Witness { cells })
    } else {
        None
    };

    Ok(SimilarityReport {
        verdict: Verdict::Similar,
        divergence: None,
        witness,
        extension_used,
    })
}
