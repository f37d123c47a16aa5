//! Balanced transportation problem solved with the primal transportation
//! simplex (MODI potentials on a spanning-tree basis).

use nalgebra::DMatrix;

use crate::error::{QnasError, Result};

#[derive(Clone, Debug)]
pub struct TransportProblem {
    pub cost: DMatrix<f64>,
    pub supply: Vec<f64>,
    pub demand: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TransportPlan {
    pub z: DMatrix<f64>,
    pub objective: f64,
    /// Row and column potentials certifying optimality.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

impl TransportPlan {
    /// Largest violation of the row and column sums, and of `c - u - v ≥ 0`.
    pub fn certificate(&self, p: &TransportProblem) -> (f64, f64) {
        let (m, n) = p.cost.shape();
        let mut mass: f64 = 0.0;
        for i in 0..m {
            mass = mass.max((self.z.row(i).sum() - p.supply[i]).abs());
        }
        for j in 0..n {
            mass = mass.max((self.z.column(j).sum() - p.demand[j]).abs());
        }
        let mut dual: f64 = 0.0;
        for i in 0..m {
            for j in 0..n {
                dual = dual.max(self.u[i] + self.v[j] - p.cost[(i, j)]);
            }
        }
        (mass, dual)
    }
}

const EPS: f64 = 1e-12;

struct Basis {
    m: usize,
    n: usize,
    cells: Vec<(usize, usize)>,
}

impl Basis {
    /// Adjacency over `m + n` nodes: rows `0..m`, columns `m..m+n`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }

    fn potentials(&self, cost: &DMatrix<f64>, adj: &[Vec<(usize, usize)>]) -> (Vec<f64>, Vec<f64>) {
        let total = self.m + self.n;
        let mut pot = vec![f64::NAN; total];
        let mut stack = vec![0usize];
        pot[0] = 0.0;
        while let Some(a) = stack.pop() {
            for &(b, k) in &adj[a] {
                if pot[b].is_nan() {
                    let (i, j) = self.cells[k];
                    pot[b] = cost[(i, j)] - pot[a];
                    stack.push(b);
                }
            }
        }
        (pot[..self.m].to_vec(), pot[self.m..].to_vec())
    }

    /// Basis cells on the tree path from row `i` to column `j`, alternating
    /// starting with a cell in row `i`.
    fn path(&self, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<usize> {
        let total = self.m + self.n;
        let target = self.m + j;
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut seen = vec![false; total];
        let mut queue = std::collections::VecDeque::from([i]);
        seen[i] = true;
        while let Some(a) = queue.pop_front() {
            if a == target {
                break;
            }
            for &(b, k) in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    prev[b] = Some((a, k));
                    queue.push_back(b);
                }
            }
        }
        let mut out = Vec::new();
        let mut cur = target;
        while cur != i {
            let (p, k) = prev[cur].expect("basis is a spanning tree");
            out.push(k);
            cur = p;
        }
        out.reverse();
        out
    }
}

/// Least-cost start: repeatedly fill the cheapest open cell, then complete
/// the basis to a spanning tree with zero-valued cells.
fn initial_basis(p: &TransportProblem) -> (DMatrix<f64>, Basis) {
    let (m, n) = p.cost.shape();
    let mut supply = p.supply.clone();
    let mut demand = p.demand.clone();
    let mut order: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    order.sort_by(|a, b| p.cost[*a].total_cmp(&p.cost[*b]).then(a.cmp(b)));
    let mut z = DMatrix::zeros(m, n);
    let mut cells = Vec::with_capacity(m + n - 1);
    let mut row_done = vec![false; m];
    let mut col_done = vec![false; n];
    let (mut rows_left, mut cols_left) = (m, n);
    for &(i, j) in &order {
        if row_done[i] || col_done[j] {
            continue;
        }
        let q = supply[i].min(demand[j]);
        z[(i, j)] = q;
        supply[i] -= q;
        demand[j] -= q;
        cells.push((i, j));
        // close exactly one line per cell, keeping the last line open
        if (supply[i] <= demand[j] && rows_left > 1) || cols_left == 1 {
            row_done[i] = true;
            rows_left -= 1;
            demand[j] = demand[j].max(0.0);
        } else {
            col_done[j] = true;
            cols_left -= 1;
            supply[i] = supply[i].max(0.0);
        }
        if rows_left == 0 || cols_left == 0 {
            break;
        }
    }
    (z, Basis { m, n, cells })
}

pub fn solve_transport(p: &TransportProblem) -> Result<TransportPlan> {
    let (m, n) = p.cost.shape();
    if m == 0 || n == 0 || p.supply.len() != m || p.demand.len() != n {
        return Err(QnasError::Transport("cost matrix and marginals disagree in shape".into()));
    }
    if p.supply.iter().chain(&p.demand).any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(QnasError::Transport("marginals must be finite and non-negative".into()));
    }
    if p.cost.iter().any(|c| !c.is_finite()) {
        return Err(QnasError::Transport("costs must be finite".into()));
    }
    let (ts, td) = (p.supply.iter().sum::<f64>(), p.demand.iter().sum::<f64>());
    let scale = ts.max(td).max(1.0);
    if (ts - td).abs() > 1e-9 * scale {
        return Err(QnasError::Transport(format!("unbalanced marginals: {ts} vs {td}")));
    }
    let (mut z, mut basis) = initial_basis(p);
    debug_assert_eq!(basis.cells.len(), m + n - 1);
    let tol = 1e-12 * p.cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let mut pivots = 0;
    let mut degenerate_run = 0;
    let max_pivots = 50 * (m + n) * (m + n) + 1000;
    loop {
        let adj = basis.adjacency();
        let (u, v) = basis.potentials(&p.cost, &adj);
        let bland = degenerate_run > m + n;
        let mut entering: Option<(usize, usize, f64)> = None;
        'scan: for i in 0..m {
            for j in 0..n {
                let r = p.cost[(i, j)] - u[i] - v[j];
                if r < -tol && entering.map_or(true, |e| r < e.2) {
                    entering = Some((i, j, r));
                    if bland {
                        break 'scan;
                    }
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            let objective = z.component_mul(&p.cost).sum();
            return Ok(TransportPlan { z, objective, u, v, pivots });
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(QnasError::Transport("pivot limit reached".into()));
        }
        // cycle: entering (+), then alternating (-, +, ...) along the tree path
        // from column ej back to row ei
        let path = basis.path(&adj, ei, ej);
        let mut cycle = path;
        cycle.reverse();
        let minus: Vec<usize> = cycle.iter().copied().step_by(2).collect();
        let mut leave = minus[0];
        for &k in &minus[1..] {
            let (a, b) = (basis.cells[k], basis.cells[leave]);
            if z[a] < z[b] - EPS || ((z[a] - z[b]).abs() <= EPS && a < b) {
                leave = k;
            }
        }
        let theta = z[basis.cells[leave]];
        degenerate_run = if theta <= EPS { degenerate_run + 1 } else { 0 };
        for (pos, &k) in cycle.iter().enumerate() {
            let cell = basis.cells[k];
            if pos % 2 == 0 {
                z[cell] = (z[cell] - theta).max(0.0);
            } else {
                z[cell] += theta;
            }
        }
        z[(ei, ej)] += theta;
        z[basis.cells[leave]] = 0.0;
        basis.cells[leave] = (ei, ej);
    }
}
