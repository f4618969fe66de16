//! Rotations in the semigroup closure that send a vector into `ker L`.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{IfsError, Result};
use crate::geometry::{orth_mul, orth_residual, LinearMap, Mat, Vect, Word};
use crate::tolerance::TAU_ORTH;

#[derive(Debug, Clone, Serialize)]
pub struct Annihilation {
    #[serde(skip)]
    pub rotation: Mat,
    /// Word over the generator list.
    pub word: Word,
    /// `‖L O v‖ / (‖L‖ ‖v‖)`.
    pub residual: f64,
}

/// Distinct rotations explored before giving up.
const MAX_STATES: usize = 2_000_000;

/// Breadth-first search over generator words of length at most `word_cap`
/// for `O` with `‖L O v‖ < tol ‖L‖ ‖v‖`.
pub fn annihilating_rotation(
    generators: &[Mat],
    l: &LinearMap,
    v: &Vect,
    tol: f64,
    word_cap: usize,
) -> Result<Annihilation> {
    let first = generators.first().ok_or(IfsError::Empty("generator list"))?;
    let d = first.nrows();
    if v.len() != d || l.source_dim() != d {
        return Err(IfsError::DimensionMismatch {
            what: "annihilation input",
            expected: d,
            got: if v.len() != d { v.len() } else { l.source_dim() },
        });
    }
    for g in generators {
        let residual = orth_residual(g);
        if g.nrows() != d || residual > TAU_ORTH {
            return Err(IfsError::NotOrthogonal { residual, tol: TAU_ORTH });
        }
    }
    let scale = l.op_norm() * v.norm();
    if !(scale > 0.0) {
        return Err(IfsError::InvalidArgument("L and v must be nonzero".into()));
    }
    let residual = |o: &Mat| (l.matrix() * o * v).norm() / scale;

    let id = Mat::identity(d, d);
    let r0 = residual(&id);
    if r0 < tol {
        return Ok(Annihilation { rotation: id, word: Word::empty(), residual: r0 });
    }
    let key = |m: &Mat| -> Vec<i64> { m.iter().map(|x| (x * 1e12).round() as i64).collect() };
    let mut seen: HashSet<Vec<i64>> = HashSet::from([key(&id)]);
    let mut frontier: Vec<(Mat, Word)> = vec![(id, Word::empty())];
    for _ in 0..word_cap {
        let mut next = Vec::new();
        for (o, w) in &frontier {
            for (g, gen) in generators.iter().enumerate() {
                let p = orth_mul(o, gen);
                if !seen.insert(key(&p)) {
                    continue;
                }
                let r = residual(&p);
                let word = w.push(g);
                if r < tol {
                    return Ok(Annihilation { rotation: p, word, residual: r });
                }
                next.push((p, word));
                if seen.len() > MAX_STATES {
                    return Err(IfsError::SearchExhausted(format!(
                        "{MAX_STATES} rotations explored without annihilating v"
                    )));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Err(IfsError::SearchExhausted(format!(
        "no word of length <= {word_cap} annihilates v within {tol}"
    )))
}
