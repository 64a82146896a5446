use defectlab::sparse::BlockBuilder;
use defectlab::SparseHermitian;
use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

/// Places the `2N × 2N` open chain `[[0, Ŝ†], [Ŝ, 0]]` on `N` sites using
/// orbitals 0 (A) and 2 (B), so the chain grading is the site-local
/// `diag(1, 1, −1, −1)`. Orbitals 1 and 3 are paired onsite and sit at ±1.
pub fn embed_chain(chain: &DMatrix<f64>) -> SparseHermitian {
    let n = chain.nrows() / 2;
    let mut b = BlockBuilder::new(n);
    for r in 0..n {
        let mut spectator = Matrix4::<Complex64>::zeros();
        spectator[(3, 1)] = Complex64::from(1.0);
        spectator[(1, 3)] = Complex64::from(1.0);
        b.add(r, r, spectator);
        for c in 0..n {
            let s = chain[(n + r, c)];
            if s != 0.0 {
                let mut lower = Matrix4::<Complex64>::zeros();
                lower[(2, 0)] = Complex64::from(s);
                b.add(r, c, lower);
                b.add(c, r, lower.adjoint());
            }
        }
    }
    b.build()
}
