//! The fixed 4x4 representation of the four Clifford generators and the
//! chiral grading.
//!
//! `Γ_i = [[0, σ_i†], [σ_i, 0]]` with the Pauli matrices and `σ_4 = i·I₂`.
//! Every entry is one of `0, ±1, ±i`, so the algebraic identities hold with
//! no rounding at all.

use nalgebra::{Matrix2, Matrix4, Vector3};
use num_complex::Complex64;

pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct CliffordSet {
    /// σ₁, σ₂, σ₃ and σ₄ = i·I₂.
    pub sigma: [Mat2; 4],
    /// Γ₁ … Γ₄.
    pub gamma: [Mat4; 4],
    /// J = diag(1, 1, −1, −1).
    pub chiral: Mat4,
}

impl Default for CliffordSet {
    fn default() -> Self {
        make_clifford()
    }
}

pub fn make_clifford() -> CliffordSet {
    let sigma = [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
        Matrix2::new(I, ZERO, ZERO, I),
    ];
    let gamma = sigma.map(|s| off_diagonal(&s.adjoint(), &s));
    let chiral = Matrix4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, -ONE, -ONE));
    CliffordSet {
        sigma,
        gamma,
        chiral,
    }
}

/// Assembles `[[0, upper], [lower, 0]]`.
pub fn off_diagonal(upper: &Mat2, lower: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(upper);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(lower);
    m
}

/// The lower-left block `q` of a chiral matrix `[[0, q†], [q, 0]]`.
pub fn lower_block(h: &Mat4) -> Mat2 {
    h.fixed_view::<2, 2>(2, 0).into_owned()
}

impl CliffordSet {
    pub fn g(&self, i: usize) -> &Mat4 {
        &self.gamma[i]
    }

    /// `v · Γ⃗ = v_x Γ₁ + v_y Γ₂ + v_z Γ₃`.
    pub fn dot(&self, v: &Vector3<f64>) -> Mat4 {
        self.gamma[0] * Complex64::from(v.x)
            + self.gamma[1] * Complex64::from(v.y)
            + self.gamma[2] * Complex64::from(v.z)
    }

    /// `Σ c_i Γ_i` over all four generators.
    pub fn combine(&self, coeffs: [f64; 4]) -> Mat4 {
        coeffs
            .iter()
            .zip(self.gamma.iter())
            .fold(Mat4::zeros(), |acc, (&c, g)| acc + g * Complex64::from(c))
    }
}

/// Entry-wise max norm.
pub fn max_norm<R: nalgebra::Dim, C: nalgebra::Dim, S>(m: &nalgebra::Matrix<Complex64, R, C, S>) -> f64
where
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
