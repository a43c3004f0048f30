//! Dense transportation simplex.
//!
//! Solves the balanced transportation problem
//! `min sum_ij f_ij c_ij` s.t. row sums = supply, column sums = demand,
//! `f >= 0`, and returns the optimal value together with dual potentials
//! `(u, v)` satisfying `u_i + v_j <= c_ij` with complementary slackness.
//!
//! Supplies are deterministically perturbed at relative size ~1e-14 to break
//! degenerate ties; the returned value is the dual objective evaluated on the
//! unperturbed masses, so the perturbation never leaks beyond ~1e-11 relative.

pub(crate) struct Transport {
    pub value: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

struct Basis {
    cell_i: Vec<usize>,
    cell_j: Vec<usize>,
    flow: Vec<f64>,
    /// node id -> basic cell ids touching it; rows are 0..m, cols m..m+n
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl Basis {
    fn add(&mut self, i: usize, j: usize, f: f64) -> usize {
        let id = self.cell_i.len();
        self.cell_i.push(i);
        self.cell_j.push(j);
        self.flow.push(f);
        self.adj[i].push(id);
        self.adj[self.m + j].push(id);
        id
    }

    fn remove(&mut self, id: usize) {
        // swap-remove from both incidence lists, then swap-remove the cell
        // itself and fix up the moved cell's references
        let i = self.cell_i[id];
        let j = self.cell_j[id];
        for node in [i, self.m + j] {
            let pos = self.adj[node].iter().position(|&c| c == id).unwrap();
            self.adj[node].swap_remove(pos);
        }
        let last = self.cell_i.len() - 1;
        if id != last {
            let (li, lj) = (self.cell_i[last], self.cell_j[last]);
            for node in [li, self.m + lj] {
                let pos = self.adj[node].iter().position(|&c| c == last).unwrap();
                self.adj[node][pos] = id;
            }
        }
        self.cell_i.swap_remove(id);
        self.cell_j.swap_remove(id);
        self.flow.swap_remove(id);
    }
}

/// Row-by-row least-cost initial basic feasible solution. Produces exactly
/// `m + n - 1` basic cells forming a spanning tree.
fn initial_basis(supply: &[f64], demand: &[f64], cost: &[f64], n: usize) -> Basis {
    let m = supply.len();
    let mut basis = Basis {
        cell_i: Vec::with_capacity(m + n),
        cell_j: Vec::with_capacity(m + n),
        flow: Vec::with_capacity(m + n),
        adj: vec![Vec::new(); m + n],
        m,
    };
    let mut rs = supply.to_vec();
    let mut ds = demand.to_vec();
    let mut col_open = vec![true; n];
    let mut open_cols = n;
    for i in 0..m {
        let last_row = i == m - 1;
        loop {
            // cheapest still-open column for this row
            let mut best = usize::MAX;
            let mut best_c = f64::INFINITY;
            for j in 0..n {
                if col_open[j] && cost[i * n + j] < best_c {
                    best_c = cost[i * n + j];
                    best = j;
                }
            }
            debug_assert!(best != usize::MAX, "ran out of open columns");
            let j = best;
            let q = rs[i].min(ds[j]);
            basis.add(i, j, q);
            rs[i] -= q;
            ds[j] -= q;
            // close exactly one entity per allocation so the basis stays a tree
            if !last_row && rs[i] <= ds[j] {
                break; // row closed, move on
            }
            if open_cols == 1 && last_row {
                break; // final cell closes both
            }
            col_open[j] = false;
            open_cols -= 1;
        }
    }
    debug_assert_eq!(basis.cell_i.len(), m + n - 1);
    basis
}

/// Duals from the basis tree: u[0] = 0, propagate over basic cells.
fn compute_duals(basis: &Basis, cost: &[f64], n: usize, u: &mut [f64], v: &mut [f64]) {
    let m = basis.m;
    let mut seen = vec![false; m + n];
    let mut stack = Vec::with_capacity(m + n);
    u[0] = 0.0;
    seen[0] = true;
    stack.push(0usize);
    while let Some(node) = stack.pop() {
        for &cid in &basis.adj[node] {
            let (i, j) = (basis.cell_i[cid], basis.cell_j[cid]);
            let other = if node == i { m + j } else { i };
            if seen[other] {
                continue;
            }
            seen[other] = true;
            if other >= m {
                v[other - m] = cost[i * n + j] - u[i];
            } else {
                u[other] = cost[i * n + j] - v[j];
            }
            stack.push(other);
        }
    }
    debug_assert!(seen.iter().all(|&s| s), "basis is not a spanning tree");
}

/// Path between two nodes in the basis tree; returns the list of basic cell
/// ids along the way.
fn tree_path(basis: &Basis, from: usize, to: usize, n: usize) -> Vec<usize> {
    let m = basis.m;
    let total = m + n;
    let mut parent_cell = vec![usize::MAX; total];
    let mut parent_node = vec![usize::MAX; total];
    let mut seen = vec![false; total];
    let mut stack = vec![from];
    seen[from] = true;
    'outer: while let Some(node) = stack.pop() {
        for &cid in &basis.adj[node] {
            let (i, j) = (basis.cell_i[cid], basis.cell_j[cid]);
            let other = if node == i { m + j } else { i };
            if seen[other] {
                continue;
            }
            seen[other] = true;
            parent_cell[other] = cid;
            parent_node[other] = node;
            if other == to {
                break 'outer;
            }
            stack.push(other);
        }
    }
    let mut path = Vec::new();
    let mut node = to;
    while node != from {
        path.push(parent_cell[node]);
        node = parent_node[node];
    }
    path.reverse();
    path
}

/// Solves the balanced problem. `cost` is row-major `m x n`. Both sides must
/// be nonempty and the mass balanced; zero supplies/demands are fine.
pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[f64], n: usize) -> Transport {
    let m = supply.len();
    debug_assert_eq!(demand.len(), n);
    debug_assert_eq!(cost.len(), m * n);
    debug_assert!(m > 0 && n > 0);

    let mass: f64 = supply.iter().sum();
    debug_assert!(
        (mass - demand.iter().sum::<f64>()).abs() <= 1e-9 * (1.0 + mass.abs()),
        "unbalanced transportation instance"
    );

    // deterministic anti-degeneracy perturbation
    let tau = mass.max(1e-300) * 1e-14 / (m as f64 + 1.0);
    let mut ps = supply.to_vec();
    let mut extra = 0.0;
    for (i, s) in ps.iter_mut().enumerate() {
        let e = tau * (i + 1) as f64;
        *s += e;
        extra += e;
    }
    let mut pd = demand.to_vec();
    pd[n - 1] += extra;

    let mut basis = initial_basis(&ps, &pd, cost, n);
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];

    let cost_scale = cost.iter().cloned().fold(0.0f64, f64::max) + 1.0;
    let eps = 1e-12 * cost_scale;

    let soft_cap = 40 * (m + n) + 4000;
    let hard_cap = 400 * (m + n) + 40000;
    let block = (m * n / 16).max(512);
    let mut cursor = 0usize;

    for pivot in 0..hard_cap {
        compute_duals(&basis, cost, n, &mut u, &mut v);

        // entering arc: block search from a rotating cursor, most negative
        // within the first window that contains a violation; Bland-style
        // first-negative once past the soft cap
        let bland = pivot >= soft_cap;
        let mut enter = None;
        let mut best_red = -eps;
        let mut examined = 0usize;
        let total = m * n;
        while examined < total {
            let idx = cursor;
            cursor += 1;
            if cursor == total {
                cursor = 0;
            }
            examined += 1;
            let i = idx / n;
            let j = idx - i * n;
            let red = cost[idx] - u[i] - v[j];
            if red < best_red {
                best_red = red;
                enter = Some((i, j));
                if bland {
                    break;
                }
            }
            if enter.is_some() && examined >= block {
                break;
            }
        }
        let Some((ei, ej)) = enter else {
            break; // optimal
        };

        let path = tree_path(&basis, ei, basis.m + ej, n);
        // walking from the entering row: even-position arcs lose theta
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &cid) in path.iter().enumerate() {
            if pos % 2 == 0 && basis.flow[cid] < theta {
                theta = basis.flow[cid];
                leave = cid;
            }
        }
        debug_assert!(leave != usize::MAX);
        for (pos, &cid) in path.iter().enumerate() {
            if pos % 2 == 0 {
                basis.flow[cid] -= theta;
            } else {
                basis.flow[cid] += theta;
            }
        }
        basis.add(ei, ej, theta);
        basis.remove(leave);
    }

    // dual objective on the unperturbed masses
    let value = supply.iter().zip(&u).map(|(a, ui)| a * ui).sum::<f64>()
        + demand.iter().zip(&v).map(|(b, vj)| b * vj).sum::<f64>();
    Transport { value, u, v }
}
