//! Block-compressed-row storage for Hermitian operators on `C⁴ ⊗ ℓ²(sites)`.

use std::collections::BTreeMap;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64;

use crate::clifford::{max_norm, Mat4};
use crate::error::Result;

/// Accumulates 4x4 blocks keyed by `(row, col)` site pairs; duplicate keys add.
#[derive(Default, Debug)]
pub struct BlockBuilder {
    n_sites: usize,
    entries: BTreeMap<(usize, usize), Mat4>,
}

impl BlockBuilder {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            entries: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, block: Mat4) {
        assert!(row < self.n_sites && col < self.n_sites, "block index out of range");
        *self.entries.entry((row, col)).or_insert_with(Mat4::zeros) += block;
    }

    pub fn build(self) -> SparseHermitian {
        let mut row_ptr = vec![0usize; self.n_sites + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut blocks = Vec::with_capacity(self.entries.len());
        for ((r, c), b) in self.entries {
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            blocks.push(b);
        }
        for r in 0..self.n_sites {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseHermitian {
            n_sites: self.n_sites,
            row_ptr,
            col_idx,
            blocks,
        }
    }
}

/// A Hermitian operator stored as block-CSR with dense 4x4 blocks. Site `s`
/// occupies scalar rows `4s .. 4s + 4`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    n_sites: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    blocks: Vec<Mat4>,
}

impl SparseHermitian {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        4 * self.n_sites
    }

    pub fn nnz_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Blocks of block-row `row` as `(col, block)` pairs, columns ascending.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, &Mat4)> {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.blocks[span].iter())
    }

    pub fn block(&self, row: usize, col: usize) -> Option<&Mat4> {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[span.clone()]
            .binary_search(&col)
            .ok()
            .map(|k| &self.blocks[span.start + k])
    }

    /// Max-norm of `H − H†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n_sites {
            for (c, b) in self.row(r) {
                let d = match self.block(c, r) {
                    Some(t) => max_norm(&(b - t.adjoint())),
                    None => max_norm(b),
                };
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Max-norm of `(J ⊗ 1) H (J ⊗ 1) + H` with `J = diag(1, 1, −1, −1)`.
    pub fn chiral_defect(&self) -> f64 {
        let sign = |i: usize| if i < 2 { 1.0 } else { -1.0 };
        self.blocks.iter().fold(0.0, |acc, b| {
            let mut worst: f64 = acc;
            for i in 0..4 {
                for j in 0..4 {
                    worst = worst.max((b[(i, j)] * (sign(i) * sign(j)) + b[(i, j)]).norm());
                }
            }
            worst
        })
    }

    /// Largest Gershgorin radius bound `max_i Σ_j |H_ij|`.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n_sites)
            .flat_map(|r| {
                (0..4).map(move |i| {
                    self.row(r)
                        .map(|(_, b)| (0..4).map(|j| b[(i, j)].norm()).sum::<f64>())
                        .sum::<f64>()
                })
            })
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim());
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        for r in 0..self.n_sites {
            for (c, b) in self.row(r) {
                for i in 0..4 {
                    let mut acc = y[4 * r + i];
                    for j in 0..4 {
                        acc += b[(i, j)] * x[4 * c + j];
                    }
                    y[4 * r + i] = acc;
                }
            }
        }
        y
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let n = self.dim();
        let mut m = Mat::<Complex64>::zeros(n, n);
        for r in 0..self.n_sites {
            for (c, b) in self.row(r) {
                for i in 0..4 {
                    for j in 0..4 {
                        m[(4 * r + i, 4 * c + j)] = b[(i, j)];
                    }
                }
            }
        }
        m
    }

    /// Site-level adjacency (off-diagonal block pattern).
    pub fn site_graph(&self) -> Vec<Vec<usize>> {
        (0..self.n_sites)
            .map(|r| self.row(r).map(|(c, _)| c).filter(|&c| c != r).collect())
            .collect()
    }

    /// Text triplets `row,col,re,im` over the `4N`-dimensional index space,
    /// one line per stored scalar entry that is not exactly zero.
    pub fn write_triplets<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["row", "col", "re", "im"])?;
        for r in 0..self.n_sites {
            for (c, b) in self.row(r) {
                for i in 0..4 {
                    for j in 0..4 {
                        let z = b[(i, j)];
                        if z.re != 0.0 || z.im != 0.0 {
                            out.write_record(&[
                                (4 * r + i).to_string(),
                                (4 * c + j).to_string(),
                                z.re.to_string(),
                                z.im.to_string(),
                            ])?;
                        }
                    }
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}
