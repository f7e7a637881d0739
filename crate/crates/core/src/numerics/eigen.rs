use super::{DenseMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector for `eigenvalues[i]`.
    pub eigenvectors: DenseMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.column(i)
    }

    /// `Σ λᵢ vᵢ vᵢ†`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        DenseMatrix::from_fn(n, n, |r, c| {
            (0..n)
                .map(|k| v[(r, k)] * v[(c, k)].conj() * self.eigenvalues[k])
                .sum()
        })
    }

    /// Groups of indices whose eigenvalues lie within `tol` of their neighbour.
    pub fn clusters(&self, tol: f64) -> Vec<Vec<usize>> {
        cluster_indices(&self.eigenvalues, tol)
    }
}

fn cluster_indices(sorted: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        match out.last_mut() {
            Some(group) if x - sorted[*group.last().unwrap()] <= tol => group.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// the classical real Jacobi rotation, so the working matrix stays Hermitian
/// with a real diagonal throughout.
pub fn hermitian_eigensystem(m: &DenseMatrix, tol: &Tolerances) -> Result<EigenSystem> {
    if !m.is_square() {
        return Err(Error::validation(
            "square matrix",
            format!("got {}x{}", m.rows(), m.cols()),
        ));
    }
    let residual = m.hermiticity_residual();
    if residual > tol.hermiticity {
        return Err(Error::validation(
            "hermitian input",
            format!("‖A − A†‖_F = {residual:.3e} exceeds {:.1e}", tol.hermiticity),
        ));
    }

    let n = m.rows();
    // Symmetrize so rounding in the input cannot leak into the rotations.
    let mut a = DenseMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q, scale);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut columns: Vec<Vec<C64>> = order.iter().map(|&i| v.column(i)).collect();

    for group in cluster_indices(&eigenvalues, tol.eigen_cluster) {
        if group.len() > 1 {
            orthonormalize(&mut columns, &group);
        }
    }

    Ok(EigenSystem {
        eigenvalues,
        eigenvectors: DenseMatrix::from_columns(&columns),
    })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, scale: f64) {
    let g = a[(p, q)];
    let abs = g.norm();
    if abs <= 1e-300 || abs <= 1e-18 * scale {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = g / abs;
    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] restricted to the (p, q) plane.
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Modified Gram-Schmidt over the listed columns, run twice for stability.
pub(crate) fn orthonormalize(columns: &mut [Vec<C64>], indices: &[usize]) {
    for _ in 0..2 {
        for (pos, &i) in indices.iter().enumerate() {
            for &j in &indices[..pos] {
                let proj: C64 = columns[j]
                    .iter()
                    .zip(&columns[i])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let (head, tail) = if j < i {
                    let (h, t) = columns.split_at_mut(i);
                    (&h[j], &mut t[0])
                } else {
                    let (h, t) = columns.split_at_mut(j);
                    (&t[0], &mut h[i])
                };
                for (x, y) in tail.iter_mut().zip(head) {
                    *x -= proj * y;
                }
            }
            let norm = columns[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                columns[i].iter_mut().for_each(|z| *z /= norm);
            }
        }
    }
}
