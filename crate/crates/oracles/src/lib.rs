//! Slow, literal reference computations used only by tests.
//!
//! Nothing here shares code with `valnet-core`: each function follows the
//! textbook definition as directly as possible and favours clarity over
//! speed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// `sum_{k>=0} A^k`, summed until the newest term's largest entry drops
/// below `tol`. Panics if that takes more than `max_terms` terms.
pub fn leontief_series(a: &DMatrix<f64>, tol: f64, max_terms: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for _ in 0..max_terms {
        term = &term * a;
        sum += &term;
        if term.amax() < tol {
            return sum;
        }
    }
    panic!("power series did not converge in {max_terms} terms");
}

/// `diag(v) L diag(f)`.
pub fn gvan_literal(v: &[f64], l: &DMatrix<f64>, f: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(l.nrows(), l.ncols(), |i, j| v[i] * l[(i, j)] * f[j])
}

/// Output of the pseudo-inverse Hodge reference.
pub struct HodgeReference {
    pub phi: Vec<f64>,
    pub circular: DMatrix<f64>,
}

/// Decomposes `F' = F - F^T` with unit weights on every pair carrying flow,
/// using the Moore-Penrose pseudo-inverse of the full Laplacian built from
/// its eigendecomposition. The pseudo-inverse solution sums to zero on every
/// connected component.
pub fn hodge_pseudoinverse(f: &DMatrix<f64>) -> HodgeReference {
    let n = f.nrows();
    let w = DMatrix::from_fn(n, n, |i, j| {
        if i != j && f[(i, j)] + f[(j, i)] > 0.0 {
            1.0
        } else {
            0.0
        }
    });
    let net = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { f[(i, j)] - f[(j, i)] });
    let mut lap = -w.clone();
    for i in 0..n {
        lap[(i, i)] = w.row(i).sum();
    }
    let div = DVector::from_fn(n, |i, _| net.row(i).sum());

    let eig: SymmetricEigen<f64, nalgebra::Dyn> = SymmetricEigen::new(lap);
    let cutoff: f64 = 1e-9 * eig.eigenvalues.amax().max(1.0);
    let mut pinv = DMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = eig.eigenvalues[k];
        if lambda > cutoff {
            let v = eig.eigenvectors.column(k);
            pinv += (v * v.transpose()) / lambda;
        }
    }
    let phi = pinv * div;
    let circular = DMatrix::from_fn(n, n, |i, j| net[(i, j)] - w[(i, j)] * (phi[i] - phi[j]));
    HodgeReference {
        phi: phi.iter().copied().collect(),
        circular,
    }
}

/// Stationary distribution of `P_ab = (1 - tau) w_ab / s_a + tau / n`, with
/// rows of nodes lacking out-weight replaced by the uniform row. Solves
/// `p (P - I) = 0`, `sum p = 1` by dense LU.
pub fn stationary_dense(w: &DMatrix<f64>, tau: f64) -> Vec<f64> {
    let n = w.nrows();
    let nf = n as f64;
    let p = DMatrix::from_fn(n, n, |a, b| {
        let s = w.row(a).sum();
        if s > 0.0 {
            (1.0 - tau) * w[(a, b)] / s + tau / nf
        } else {
            1.0 / nf
        }
    });
    let mut m = p.transpose() - DMatrix::identity(n, n);
    for b in 0..n {
        m[(n - 1, b)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let x = m.lu().solve(&rhs).expect("irreducible chain");
    x.iter().copied().collect()
}

fn entropy(parts: &[f64]) -> f64 {
    let total: f64 = parts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    parts
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let r = x / total;
            -r * r.log2()
        })
        .sum()
}

/// Two-level map equation `q H(Q) + sum_i p_i H(P^i)` evaluated term by term
/// with recorded teleportation. A step from `a` leaves module `i` when it
/// follows a link out of `i` or teleports to a node outside `i`; nodes
/// without out-weight always teleport.
pub fn map_equation_literal(w: &DMatrix<f64>, tau: f64, assignment: &[usize]) -> f64 {
    let n = w.nrows();
    let nf = n as f64;
    let p = stationary_dense(w, tau);
    let modules = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut exit = vec![0.0; modules];
    let mut size = vec![0usize; modules];
    for &m in assignment {
        size[m] += 1;
    }
    for a in 0..n {
        let m = assignment[a];
        let outside = (nf - size[m] as f64) / nf;
        let s = w.row(a).sum();
        if s > 0.0 {
            let leaving: f64 = (0..n).filter(|&b| assignment[b] != m).map(|b| w[(a, b)]).sum();
            exit[m] += p[a] * ((1.0 - tau) * leaving / s + tau * outside);
        } else {
            exit[m] += p[a] * outside;
        }
    }
    let q: f64 = exit.iter().sum();
    let mut total = q * entropy(&exit);
    for m in 0..modules {
        let mut parts = vec![exit[m]];
        parts.extend((0..n).filter(|&a| assignment[a] == m).map(|a| p[a]));
        let pm: f64 = parts.iter().sum();
        total += pm * entropy(&parts);
    }
    total
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for label in 0..=max + 1 {
            prefix.push(label);
            grow(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut prefix = vec![0];
    grow(&mut prefix, 0, n, &mut out);
    out
}

/// Minimum codelength over all partitions, with the first minimiser found
/// (partitions enumerated in restricted-growth order).
pub fn partition_bruteforce(w: &DMatrix<f64>, tau: f64) -> (Vec<usize>, f64) {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for candidate in set_partitions(w.nrows()) {
        let l = map_equation_literal(w, tau, &candidate);
        if best.as_ref().is_none_or(|(_, b)| l < *b) {
            best = Some((candidate, l));
        }
    }
    best.expect("at least one partition")
}

/// Unweighted directed betweenness from all-pairs distances and shortest
/// path counts, summed over ordered pairs `(s, t)` with `s != v != t`.
pub fn betweenness_bruteforce(adj: &DMatrix<f64>) -> Vec<f64> {
    let n = adj.nrows();
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if i != j && adj[(i, j)] > 0.0 {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    // sigma[s][t]: shortest-path count, built up in order of distance.
    let mut sigma = vec![vec![0.0f64; n]; n];
    for s in 0..n {
        sigma[s][s] = 1.0;
        let mut targets: Vec<usize> = (0..n).filter(|&t| t != s && d[s][t] < INF).collect();
        targets.sort_by_key(|&t| d[s][t]);
        for t in targets {
            sigma[s][t] = (0..n)
                .filter(|&u| u != t && adj[(u, t)] > 0.0 && d[s][u] + 1 == d[s][t])
                .map(|u| sigma[s][u])
                .sum();
        }
    }
    (0..n)
        .map(|v| {
            let mut b = 0.0;
            for s in 0..n {
                for t in 0..n {
                    if s == t || s == v || t == v || d[s][t] >= INF {
                        continue;
                    }
                    if d[s][v] + d[v][t] == d[s][t] {
                        b += sigma[s][v] * sigma[v][t] / sigma[s][t];
                    }
                }
            }
            b
        })
        .collect()
}

/// Sample Pearson correlation; `None` when either variance is zero.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx * vy).sqrt())
    }
}

/// Degree assortativity of the undirected projection: Pearson correlation of
/// the degrees at both ends of every edge, each edge listed in both
/// directions.
pub fn assortativity_undirected(adj: &DMatrix<f64>) -> Option<f64> {
    let n = adj.nrows();
    let linked = |i: usize, j: usize| i != j && (adj[(i, j)] > 0.0 || adj[(j, i)] > 0.0);
    let degree: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| linked(i, j)).count() as f64)
        .collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..n {
        for j in 0..n {
            if linked(i, j) {
                xs.push(degree[i]);
                ys.push(degree[j]);
            }
        }
    }
    pearson(&xs, &ys)
}

/// Mean of `2 T_i / (k_i (k_i - 1))` on the undirected projection, where
/// `T_i` counts linked neighbour pairs; nodes with `k_i < 2` count as zero.
pub fn clustering_literal(adj: &DMatrix<f64>) -> f64 {
    let n = adj.nrows();
    let linked = |i: usize, j: usize| i != j && (adj[(i, j)] > 0.0 || adj[(j, i)] > 0.0);
    let mut total = 0.0;
    for i in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&j| linked(i, j)).collect();
        let k = nb.len();
        if k < 2 {
            continue;
        }
        let mut t = 0;
        for a in 0..k {
            for b in a + 1..k {
                if linked(nb[a], nb[b]) {
                    t += 1;
                }
            }
        }
        total += 2.0 * t as f64 / (k * (k - 1)) as f64;
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..=6).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn series_of_nilpotent_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        let l = leontief_series(&a, 1e-15, 10);
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]));
    }

    #[test]
    fn stationary_of_symmetric_pair() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = stationary_dense(&w, 0.15);
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn path_betweenness() {
        let adj = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(betweenness_bruteforce(&adj), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn triangle_hodge_is_circular() {
        let f = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let h = hodge_pseudoinverse(&f);
        assert!(h.phi.iter().all(|p| p.abs() < 1e-12));
        assert!((h.circular[(0, 1)] - 1.0).abs() < 1e-12);
    }
}
