//! Linear programming by exhaustive enumeration of facet intersections.
//!
//! Deliberately self-contained (its own elimination, no shared vertex cache)
//! so that it can serve as an independent check on [`super::HPolytope`].

use crate::error::{invalid, OracleError};
use crate::geometry::Vector;

use super::polytope::for_each_subset;
use super::HPolytope;

pub const MAX_DIM: usize = 4;
pub const MAX_FACETS: usize = 32;

/// Gaussian elimination with partial pivoting on an `n × (n+1)` augmented matrix.
fn solve_augmented(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-11 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][n] - tail) / m[row][row];
    }
    Some(x)
}

/// `max ⟨c, x⟩` over the polytope, by checking every vertex candidate.
///
/// Works from the raw rows; the polytope's cached vertex list is not used.
pub fn brute_force_lp(p: &HPolytope, c: &Vector) -> Result<(f64, Vector), OracleError> {
    let n = p.dim();
    if c.dim() != n {
        return Err(invalid(format!(
            "objective has dimension {}, expected {n}",
            c.dim()
        )));
    }
    if n > MAX_DIM || p.normals().len() > MAX_FACETS {
        return Err(OracleError::Unsupported(format!(
            "brute-force LP handles n <= {MAX_DIM} and <= {MAX_FACETS} facets (got n = {n}, {} facets)",
            p.normals().len()
        )));
    }
    let rows: Vec<(&Vector, f64)> = p.rows().collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_subset(rows.len(), n, |subset| {
        let aug: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| {
                let mut r = rows[i].0.as_slice().to_vec();
                r.push(rows[i].1);
                r
            })
            .collect();
        let Some(x) = solve_augmented(aug) else {
            return;
        };
        let feasible = rows.iter().all(|(a, b)| {
            a.as_slice()
                .iter()
                .zip(&x)
                .map(|(ai, xi)| ai * xi)
                .sum::<f64>()
                <= b + 1e-9
        });
        if !feasible {
            return;
        }
        let value: f64 = c.as_slice().iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, x));
        }
    });
    match best {
        Some((value, x)) => Ok((value, Vector::from_raw(x))),
        None => Err(invalid("polytope has no feasible vertex")),
    }
}
