//! Banded LU for shifted operators `H − z` and selected inversion of the band
//! of `(H − z)⁻¹`.
//!
//! For `Im z ≠ 0` the matrix `i(H − z)` has Hermitian part `Im z · 1`, which
//! is definite, so Gaussian elimination needs no pivoting: every leading
//! principal submatrix inherits the definite Hermitian part.

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::SparseHermitian;

/// Reverse Cuthill–McKee ordering of an undirected graph. Returns `order`
/// with `order[new] = old`.
pub fn reverse_cuthill_mckee(graph: &[Vec<usize>]) -> Vec<usize> {
    let n = graph.len();
    let degree: Vec<usize> = graph.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(graph, seed);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = graph[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// BFS levels from `root`: (eccentricity, a farthest vertex of minimum degree).
fn farthest(graph: &[Vec<usize>], root: usize) -> (usize, usize) {
    let mut dist = vec![usize::MAX; graph.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last = root;
    while let Some(v) = queue.pop_front() {
        for &w in &graph[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
        last = v;
    }
    let ecc = dist[last];
    let pick = (0..graph.len())
        .filter(|&v| dist[v] == ecc)
        .min_by_key(|&v| (graph[v].len(), v))
        .unwrap_or(last);
    (ecc, pick)
}

fn pseudo_peripheral(graph: &[Vec<usize>], seed: usize) -> usize {
    let mut current = seed;
    let (mut ecc, mut cand) = farthest(graph, current);
    for _ in 0..8 {
        let (e2, c2) = farthest(graph, cand);
        if e2 <= ecc {
            break;
        }
        current = cand;
        ecc = e2;
        cand = c2;
    }
    current
}

/// Half-bandwidth of the graph under `order` (`order[new] = old`).
pub fn bandwidth(graph: &[Vec<usize>], order: &[usize]) -> usize {
    let mut position = vec![0usize; order.len()];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }
    graph
        .iter()
        .enumerate()
        .flat_map(|(v, nb)| nb.iter().map(move |&w| (v, w)))
        .map(|(v, w)| position[v].abs_diff(position[w]))
        .max()
        .unwrap_or(0)
}

/// Site ordering with the smaller bandwidth of RCM and the natural order.
pub fn site_ordering(h: &SparseHermitian) -> Vec<usize> {
    let graph = h.site_graph();
    let natural: Vec<usize> = (0..graph.len()).collect();
    let rcm = reverse_cuthill_mckee(&graph);
    if bandwidth(&graph, &rcm) < bandwidth(&graph, &natural) {
        rcm
    } else {
        natural
    }
}

/// Dense band of a square matrix: row `i` stores columns `i − bw ..= i + bw`.
#[derive(Clone, Debug)]
struct Band {
    n: usize,
    bw: usize,
    data: Vec<Complex64>,
}

impl Band {
    fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![Complex64::new(0.0, 0.0); n * (2 * bw + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// Row `i`, columns `lo .. hi` (all within the band).
    #[inline]
    fn row(&self, i: usize, lo: usize, hi: usize) -> &[Complex64] {
        let a = self.idx(i, lo);
        &self.data[a..a + (hi - lo)]
    }
}

/// In-place `LU` of the permuted shifted operator `P (H − z) Pᵀ`, with unit
/// lower `L` stored below the diagonal and `U` on and above it.
#[derive(Clone, Debug)]
pub struct BandLu {
    lu: Band,
    /// `order[new] = old` at scalar level.
    order: Vec<usize>,
    position: Vec<usize>,
    shift: Complex64,
}

impl BandLu {
    /// Factorizes `H − z` under the given site ordering.
    pub fn factor(h: &SparseHermitian, shift: Complex64, site_order: &[usize]) -> Result<Self> {
        let n = h.dim();
        let mut site_pos = vec![0usize; h.n_sites()];
        for (new, &old) in site_order.iter().enumerate() {
            site_pos[old] = new;
        }
        let site_bw = bandwidth(&h.site_graph(), site_order);
        let bw = 4 * site_bw + 3;
        let order: Vec<usize> = site_order
            .iter()
            .flat_map(|&s| (0..4).map(move |o| 4 * s + o))
            .collect();
        let mut position = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }

        let mut a = Band::zeros(n, bw.min(n.saturating_sub(1)));
        for r in 0..h.n_sites() {
            for (c, b) in h.row(r) {
                let (pr, pc) = (site_pos[r], site_pos[c]);
                for i in 0..4 {
                    for j in 0..4 {
                        let v = b[(i, j)];
                        if v.re != 0.0 || v.im != 0.0 {
                            a.set(4 * pr + i, 4 * pc + j, v);
                        }
                    }
                }
            }
        }
        for i in 0..n {
            let d = a.get(i, i) - shift;
            a.set(i, i, d);
        }

        let bw = a.bw;
        let width = 2 * bw + 1;
        for k in 0..n {
            let pivot = a.get(k, k);
            if pivot.norm() < 1e-300 {
                return Err(Error::Solver(format!("zero pivot at row {k}")));
            }
            let end = (k + bw + 1).min(n);
            let inv = pivot.inv();
            // split so row k and rows below can be borrowed at once
            let (head, tail) = a.data.split_at_mut((k + 1) * width);
            let row_k_start = k * width + bw + 1;
            let row_k = &head[row_k_start..row_k_start + (end - k - 1)];
            for i in k + 1..end {
                let base = (i - k - 1) * width;
                let lk = base + (k + bw - i);
                let l = tail[lk] * inv;
                tail[lk] = l;
                if l.re == 0.0 && l.im == 0.0 {
                    continue;
                }
                let start = base + (k + 1 + bw - i);
                let row_i = &mut tail[start..start + (end - k - 1)];
                for (x, &u) in row_i.iter_mut().zip(row_k.iter()) {
                    *x -= l * u;
                }
            }
        }
        Ok(Self {
            lu: a,
            order,
            position,
            shift,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.n
    }

    pub fn bandwidth(&self) -> usize {
        self.lu.bw
    }

    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    /// Solves `(H − z) x = b` in the original index space.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        let bw = self.lu.bw;
        let mut y: Vec<Complex64> = self.order.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = self.lu.row(i, lo, i);
            let acc: Complex64 = row.iter().zip(&y[lo..i]).map(|(l, v)| l * v).sum();
            y[i] -= acc;
        }
        for i in (0..n).rev() {
            let hi = (i + bw + 1).min(n);
            let row = self.lu.row(i, i + 1, hi);
            let acc: Complex64 = row.iter().zip(&y[i + 1..hi]).map(|(u, v)| u * v).sum();
            y[i] = (y[i] - acc) / self.lu.get(i, i);
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (new, &old) in self.order.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Diagonal of `(H − z)⁻¹` (original indexing) by the Takahashi
    /// recurrences restricted to the band.
    pub fn inverse_diagonal(&self) -> Vec<Complex64> {
        let n = self.lu.n;
        let bw = self.lu.bw;
        let lu = &self.lu;
        let mut z = Band::zeros(n, bw);
        let mut col_l = vec![Complex64::new(0.0, 0.0); bw];
        let mut row_u = vec![Complex64::new(0.0, 0.0); bw];
        let mut acc_row = vec![Complex64::new(0.0, 0.0); bw];
        for i in (0..n).rev() {
            let hi = (i + bw + 1).min(n);
            let m = hi - i - 1;
            let d = lu.get(i, i);
            let d_inv = d.inv();
            for k in 0..m {
                col_l[k] = lu.get(i + 1 + k, i);
                row_u[k] = lu.get(i, i + 1 + k) * d_inv;
            }
            // upper row: Z[i, j] = −Σ_k Ũ[i, k] Z[k, j], j, k ∈ (i, hi)
            acc_row[..m].iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for k in 0..m {
                let u = row_u[k];
                if u.re == 0.0 && u.im == 0.0 {
                    continue;
                }
                let zk = z.row(i + 1 + k, i + 1, hi);
                for (acc, &v) in acc_row[..m].iter_mut().zip(zk) {
                    *acc += u * v;
                }
            }
            for j in 0..m {
                z.set(i, i + 1 + j, -acc_row[j]);
            }
            // lower column: Z[j, i] = −Σ_k Z[j, k] L[k, i]
            for j in 0..m {
                let zj = z.row(i + 1 + j, i + 1, hi);
                let s: Complex64 = zj.iter().zip(&col_l[..m]).map(|(a, b)| a * b).sum();
                z.set(i + 1 + j, i, -s);
            }
            let mut diag = d_inv;
            for k in 0..m {
                diag -= row_u[k] * z.get(i + 1 + k, i);
            }
            z.set(i, i, diag);
        }
        (0..n).map(|old| z.get(self.position[old], self.position[old])).collect()
    }
}
