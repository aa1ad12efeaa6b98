use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, OracleError};
use crate::geometry::Vector;
use crate::oracle::ProblemGeometry;

/// Upper bound on facet subsets examined by vertex enumeration.
pub const MAX_ENUMERATION_SUBSETS: u128 = 1 << 20;

const FEASIBILITY_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-9;
const INNER_BALL_TOL: f64 = 1e-12;

/// A bounded polytope `{x : ⟨a_i, x⟩ ≤ b_i}` with unit-norm rows, a certified
/// inner ball, and its vertex list.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    normals: Vec<Vector>,
    offsets: Vec<f64>,
    vertices: Vec<Vector>,
    geometry: ProblemGeometry,
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Lexicographic `k`-subsets of `0..n`, calling `visit` on each.
pub(crate) fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl HPolytope {
    /// Builds the polytope from raw rows `(a, b)`, verifies that
    /// `B(center, inner_radius)` fits, enumerates vertices and derives the
    /// outer radius from them.
    pub fn new(
        rows: Vec<(Vector, f64)>,
        center: Vector,
        inner_radius: f64,
    ) -> Result<Self, OracleError> {
        let n = center.dim();
        if rows.len() < n + 1 {
            return Err(invalid(format!(
                "a bounded polytope in dimension {n} needs at least {} facets, got {}",
                n + 1,
                rows.len()
            )));
        }
        let mut normals = Vec::with_capacity(rows.len());
        let mut offsets = Vec::with_capacity(rows.len());
        for (i, (a, b)) in rows.into_iter().enumerate() {
            if a.dim() != n {
                return Err(invalid(format!(
                    "facet {i} has dimension {}, expected {n}",
                    a.dim()
                )));
            }
            let norm = a.norm2();
            if !(norm > 0.0) || !b.is_finite() {
                return Err(invalid(format!(
                    "facet {i} has a zero normal or non-finite offset"
                )));
            }
            let slack = (b - a.dot(&center)) / norm;
            if slack < inner_radius - INNER_BALL_TOL {
                return Err(invalid(format!(
                    "inner ball of radius {inner_radius} crosses facet {i} (distance {slack})"
                )));
            }
            normals.push(a.scaled(1.0 / norm));
            offsets.push(b / norm);
        }

        let subsets = binomial(normals.len(), n);
        if subsets > MAX_ENUMERATION_SUBSETS {
            return Err(OracleError::Unsupported(format!(
                "vertex enumeration over {subsets} facet subsets exceeds the limit of {MAX_ENUMERATION_SUBSETS}"
            )));
        }
        let vertices = enumerate_vertices(&normals, &offsets, n);
        if vertices.is_empty() {
            return Err(invalid("polytope has no vertices, so it is unbounded"));
        }
        if has_unbounded_edge(&normals, &offsets, &vertices) {
            return Err(invalid("polytope is unbounded"));
        }
        let outer = vertices
            .iter()
            .map(|v| v.dist2(&center))
            .fold(0.0f64, f64::max)
            .max(inner_radius);
        let geometry = ProblemGeometry::new(center, inner_radius, outer)?;
        Ok(HPolytope {
            normals,
            offsets,
            vertices,
            geometry,
        })
    }

    /// The cube `[-h, h]ⁿ` written as `2n` facets.
    pub fn cube(n: usize, half_width: f64) -> Result<Self, OracleError> {
        let mut rows = Vec::with_capacity(2 * n);
        for i in 0..n {
            rows.push((Vector::basis(n, i), half_width));
            rows.push((-&Vector::basis(n, i), half_width));
        }
        HPolytope::new(rows, Vector::zeros(n), half_width)
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Vector, f64)> {
        self.normals.iter().zip(self.offsets.iter().copied())
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn geometry(&self) -> &ProblemGeometry {
        &self.geometry
    }

    /// Largest violation `max_i ⟨a_i, y⟩ − b_i`; nonpositive iff `y` is inside.
    pub fn max_violation(&self, y: &Vector) -> (usize, f64) {
        self.rows()
            .enumerate()
            .map(|(i, (a, b))| (i, a.dot(y) - b))
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            })
    }

    pub fn contains(&self, y: &Vector) -> bool {
        self.max_violation(y).1 <= 0.0
    }

    /// Exact `max ⟨c, x⟩` over the vertex list; ties go to the lowest vertex.
    pub fn support(&self, c: &Vector) -> (f64, Vector) {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, v) in self.vertices.iter().enumerate() {
            let value = c.dot(v);
            if value > best.0 {
                best = (value, i);
            }
        }
        (best.0, self.vertices[best.1].clone())
    }
}

fn solve_subset(normals: &[Vector], offsets: &[f64], subset: &[usize], n: usize) -> Option<Vector> {
    let a = DMatrix::from_fn(n, n, |r, c| normals[subset[r]][c]);
    let b = DVector::from_fn(n, |r, _| offsets[subset[r]]);
    let lu = a.lu();
    // Rows are unit vectors, so a tiny |det| means (nearly) dependent facets.
    if lu.determinant().abs() < 1e-10 {
        return None;
    }
    let x = lu.solve(&b)?;
    x.iter()
        .all(|v| v.is_finite())
        .then(|| Vector::from_raw(x.iter().copied().collect()))
}

fn enumerate_vertices(normals: &[Vector], offsets: &[f64], n: usize) -> Vec<Vector> {
    let mut vertices: Vec<Vector> = Vec::new();
    for_each_subset(normals.len(), n, |subset| {
        let Some(x) = solve_subset(normals, offsets, subset, n) else {
            return;
        };
        let feasible = normals
            .iter()
            .zip(offsets)
            .all(|(a, b)| a.dot(&x) <= b + FEASIBILITY_TOL);
        if feasible && !vertices.iter().any(|v| v.dist2(&x) <= DEDUP_TOL) {
            vertices.push(x);
        }
    });
    vertices
}

/// Checks every candidate edge direction leaving each vertex for a ray that
/// stays feasible forever.
fn has_unbounded_edge(normals: &[Vector], offsets: &[f64], vertices: &[Vector]) -> bool {
    let n = vertices[0].dim();
    if n == 1 {
        let has_up = normals.iter().any(|a| a[0] > 0.0);
        let has_down = normals.iter().any(|a| a[0] < 0.0);
        return !(has_up && has_down);
    }
    for v in vertices {
        let active: Vec<usize> = normals
            .iter()
            .zip(offsets)
            .enumerate()
            .filter(|(_, (a, b))| (a.dot(v) - *b).abs() <= 1e-7)
            .map(|(i, _)| i)
            .collect();
        let mut unbounded = false;
        for_each_subset(active.len(), n - 1, |sub| {
            if unbounded {
                return;
            }
            let m = DMatrix::from_fn(n - 1, n, |r, c| normals[active[sub[r]]][c]);
            let svd = m.svd(false, true);
            let Some(v_t) = svd.v_t else { return };
            // Rank must be n-1 for a well-defined edge direction.
            let min_sv = svd
                .singular_values
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min_sv < 1e-9 {
                return;
            }
            // v_t has min(n-1, n) = n-1 rows; complete the null direction
            // through the cross-product generalization: project e_k out.
            let d = null_direction(&v_t, n);
            for sign in [1.0, -1.0] {
                let dir = d.scaled(sign);
                if normals.iter().all(|a| a.dot(&dir) <= 1e-9) {
                    unbounded = true;
                }
            }
        });
        if unbounded {
            return true;
        }
    }
    false
}

/// A unit vector orthogonal to the `n-1` orthonormal rows of `v_t`.
fn null_direction(v_t: &DMatrix<f64>, n: usize) -> Vector {
    let mut best: Option<DVector<f64>> = None;
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        for r in 0..v_t.nrows() {
            let row = v_t.row(r).transpose();
            let proj = row.dot(&e);
            e -= row * proj;
        }
        if best.as_ref().map_or(true, |b| e.norm() > b.norm()) {
            best = Some(e);
        }
    }
    let d = best.expect("n >= 1");
    let norm = d.norm();
    Vector::from_raw(d.iter().map(|x| x / norm).collect())
}
