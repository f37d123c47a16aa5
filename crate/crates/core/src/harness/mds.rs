//! Classical multidimensional scaling of circuit distance matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::circuit_metric::distance_matrices;
use crate::error::{QnasError, Result};
use crate::gate_metric::GateDistanceTable;
use crate::objectives::templates;

/// Rows are points. Double-centres `-½ D²`, keeps the top `dims`
/// eigenpairs and clips negative eigenvalues to zero.
pub fn mds_embed(d: &DMatrix<f64>, dims: usize) -> Result<DMatrix<f64>> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(QnasError::DimensionMismatch { expected: n, got: d.ncols() });
    }
    let scale = d.amax().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if (d[(i, j)] - d[(j, i)]).abs() > 1e-8 * scale {
                return Err(QnasError::InvalidArgument(format!("distance matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, dims));
    }
    let sq = d.map(|v| v * v);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).mean()).collect();
    let all_mean = sq.mean();
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + all_mean));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut coords = DMatrix::zeros(n, dims);
    for (k, &idx) in order.iter().take(dims).enumerate() {
        let s = eig.eigenvalues[idx].max(0.0).sqrt();
        for i in 0..n {
            coords[(i, k)] = eig.eigenvectors[(i, idx)] * s;
        }
    }
    Ok(coords)
}

/// Other points ordered by Euclidean distance from each point.
pub fn neighbor_order(coords: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = coords.nrows();
    let dist = |i: usize, j: usize| (coords.row(i) - coords.row(j)).norm();
    (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| dist(i, a).total_cmp(&dist(i, b)));
            others
        })
        .collect()
}

/// Whether `i` and `j` are each among the other's `k` nearest neighbours.
pub fn mutual_top_k(order: &[Vec<usize>], i: usize, j: usize, k: usize) -> bool {
    order[i].iter().take(k).any(|&x| x == j) && order[j].iter().take(k).any(|&x| x == i)
}

/// Pairwise distances between the shipped templates (one layer, 4 qubits).
pub fn template_distances(nu: f64, normalized: bool, table: &GateDistanceTable) -> Result<DMatrix<f64>> {
    let circuits = templates().iter().map(|t| t.circuit(4, 1)).collect::<Result<Vec<_>>>()?;
    Ok(distance_matrices(&circuits, &[(nu, normalized)], table)?.remove(0))
}
