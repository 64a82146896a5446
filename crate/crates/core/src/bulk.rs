//! Momentum-space bulk models, gap scans and the 3D winding number of the
//! flat-band unitary.
//!
//! Fourier convention: the shift `S|n⟩ = |n − 1⟩` has symbol `e^{ik}`, so
//! `(S − S*)/2i → sin k` and `(S + S*)/2 → cos k`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{lower_block, make_clifford, CliffordSet, Mat2, Mat4};
use crate::error::{Error, Result};
use crate::pattern::frame_for_alpha;

/// Winding integrals are refused below this half-gap.
pub const GAP_THRESHOLD: f64 = 1e-3;

/// Smallest singular value of `q(k)` accepted by [`flat_band_unitary`].
pub const SINGULAR_THRESHOLD: f64 = 1e-8;

pub const DEFAULT_WINDING_GRID: usize = 40;

/// Global sign applied to the discretized odd Chern character. Pinned so that
/// the `1 < M < 3` phase of the torus model reports +1.
const ORIENTATION: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    /// The three-dimensional torus model.
    Torus3d,
    /// The torus model with `k₃` replaced by the circle parameter `β`.
    Cylinder { beta: f64 },
    /// The far-field model seen along the ray `θ₀` of a cone with parameter `α`.
    Asymptotic { alpha: f64, theta0: f64 },
    /// The flat square-lattice model without any `k₃`/`β` terms; the exact
    /// symbol of the undefected real-space Hamiltonian.
    Planar,
}

#[derive(Clone, Debug)]
pub struct BlochModel {
    pub mass: f64,
    pub variant: Variant,
    pub clifford: CliffordSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub grid_n: usize,
    pub raw: f64,
    pub rounded: i64,
}

impl WindingResult {
    pub fn deviation(&self) -> f64 {
        (self.raw - self.rounded as f64).abs()
    }
}

impl BlochModel {
    pub fn new(mass: f64, variant: Variant) -> Self {
        Self {
            mass,
            variant,
            clifford: make_clifford(),
        }
    }

    pub fn torus3d(mass: f64) -> Self {
        Self::new(mass, Variant::Torus3d)
    }

    pub fn cylinder(mass: f64, beta: f64) -> Self {
        Self::new(mass, Variant::Cylinder { beta })
    }

    pub fn asymptotic(mass: f64, alpha: f64, theta0: f64) -> Self {
        Self::new(mass, Variant::Asymptotic { alpha, theta0 })
    }

    pub fn planar(mass: f64) -> Self {
        Self::new(mass, Variant::Planar)
    }

    /// Number of momentum components the model depends on.
    pub fn k_dim(&self) -> usize {
        match self.variant {
            Variant::Torus3d => 3,
            _ => 2,
        }
    }

    /// `h(k)`. Two-dimensional variants ignore `k[2]`.
    pub fn h(&self, k: [f64; 3]) -> Mat4 {
        match self.variant {
            Variant::Torus3d => self.clifford.combine([
                k[0].sin(),
                k[1].sin(),
                k[2].sin(),
                self.mass + k[0].cos() + k[1].cos() + k[2].cos(),
            ]),
            Variant::Cylinder { beta } => self.cylinder_h(k[0], k[1], beta),
            Variant::Asymptotic { alpha, theta0 } => self.asymptotic_h(k[0], k[1], alpha, theta0),
            Variant::Planar => self.clifford.combine([
                k[0].sin(),
                k[1].sin(),
                0.0,
                self.mass + k[0].cos() + k[1].cos(),
            ]),
        }
    }

    fn cylinder_h(&self, k1: f64, k2: f64, beta: f64) -> Mat4 {
        self.clifford.combine([
            k1.sin(),
            k2.sin(),
            beta.sin(),
            self.mass + beta.cos() + k1.cos() + k2.cos(),
        ])
    }

    fn asymptotic_h(&self, k1: f64, k2: f64, alpha: f64, theta0: f64) -> Mat4 {
        let f = frame_for_alpha(theta0, alpha);
        let phi = theta0 / alpha;
        let c = &self.clifford;
        c.dot(&(f.a1 * k1.sin() + f.a2 * k2.sin() + f.normal * phi.sin()))
            + c.gamma[3] * Complex64::from(self.mass + phi.cos() + k1.cos() + k2.cos())
    }

    /// The model along its three-parameter family: the Brillouin 3-torus for
    /// `Torus3d`, `(k₁, k₂, β)` for `Cylinder`, and `(k₁, k₂, t)` with
    /// `θ₀ = α t` for `Asymptotic`, so `t ∈ [0, 2π)` sweeps the full rim.
    pub fn family_h(&self, p: [f64; 3]) -> Result<Mat4> {
        match self.variant {
            Variant::Torus3d => Ok(self.h(p)),
            Variant::Cylinder { .. } => Ok(self.cylinder_h(p[0], p[1], p[2])),
            Variant::Asymptotic { alpha, .. } => Ok(self.asymptotic_h(p[0], p[1], alpha, alpha * p[2])),
            Variant::Planar => Err(Error::InvalidParameter(
                "the planar model has no third parameter to wind over".into(),
            )),
        }
    }
}

/// Eigenvalues of a 4x4 Hermitian matrix in ascending order.
pub fn eigenvalues4(h: &Mat4) -> [f64; 4] {
    let mut ev: Vec<f64> = SymmetricEigen::new(*h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    [ev[0], ev[1], ev[2], ev[3]]
}

pub fn bloch_h(model: &BlochModel, k: [f64; 3]) -> Mat4 {
    model.h(k)
}

/// Uniform periodic grid `2πj/n`, `j = 0 … n−1`.
pub fn k_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

fn half_gap(h: &Mat4) -> f64 {
    eigenvalues4(h).iter().fold(f64::INFINITY, |acc, e| acc.min(e.abs()))
}

/// Minimum over the grid of the smallest `|eigenvalue|` of `h(k)` (the
/// half-gap at E = 0). The grid is 3D for `Torus3d` and 2D otherwise.
pub fn gap_scan(model: &BlochModel, grid_n: usize) -> Result<f64> {
    check_grid(grid_n)?;
    let ks = k_grid(grid_n);
    let k3: &[f64] = if model.k_dim() == 3 { &ks } else { &[0.0] };
    let mut gap = f64::INFINITY;
    for &a in &ks {
        for &b in &ks {
            for &c in k3 {
                gap = gap.min(half_gap(&model.h([a, b, c])));
            }
        }
    }
    Ok(gap)
}

/// Half-gap minimized over the model's three-parameter family.
pub fn family_gap_scan(model: &BlochModel, grid_n: usize) -> Result<f64> {
    check_grid(grid_n)?;
    let ks = k_grid(grid_n);
    let mut gap = f64::INFINITY;
    for &a in &ks {
        for &b in &ks {
            for &c in &ks {
                gap = gap.min(half_gap(&model.family_h([a, b, c])?));
            }
        }
    }
    Ok(gap)
}

fn check_grid(grid_n: usize) -> Result<()> {
    if grid_n < 8 {
        return Err(Error::InvalidParameter(format!(
            "grid_n must be at least 8, got {grid_n}"
        )));
    }
    Ok(())
}

/// Unitary part of the lower block: `u = q (q†q)^{-1/2}` for
/// `h = [[0, q†], [q, 0]]`.
pub fn polar_unitary(h: &Mat4, at: [f64; 3]) -> Result<Mat2> {
    let q = lower_block(h);
    let qq = q.adjoint() * q;
    let eig = SymmetricEigen::new(qq);
    let s_min = eig.eigenvalues.min().max(0.0).sqrt();
    if s_min < SINGULAR_THRESHOLD {
        return Err(Error::GapClosed {
            sigma_min: s_min,
            k: at,
        });
    }
    let inv_sqrt = eig.eigenvalues.map(|l| Complex64::from(1.0 / l.sqrt()));
    let v = &eig.eigenvectors;
    Ok(q * (v * Mat2::from_diagonal(&inv_sqrt) * v.adjoint()))
}

pub fn flat_band_unitary(model: &BlochModel, k: [f64; 3]) -> Result<Mat2> {
    polar_unitary(&model.h(k), k)
}

/// Discretized odd Chern character `(1/24π²) ∫ tr[(u†du)³]` over the
/// model's three-parameter family, with central differences for `∂u`.
pub fn winding3d(model: &BlochModel, grid_n: usize) -> Result<WindingResult> {
    let gap = family_gap_scan(model, grid_n)?;
    if gap < GAP_THRESHOLD {
        return Err(Error::Critical {
            gap,
            threshold: GAP_THRESHOLD,
        });
    }
    let raw = ORIENTATION * winding_density_sum(|p| polar_unitary(&model.family_h(p)?, p), grid_n)?;
    Ok(WindingResult {
        grid_n,
        raw,
        rounded: raw.round() as i64,
    })
}

/// Unsigned-orientation winding integral of an arbitrary unitary field on
/// the periodic 3-torus. [`winding3d`] applies the pinned orientation.
pub fn winding_of<F>(field: F, grid_n: usize) -> Result<f64>
where
    F: Fn([f64; 3]) -> Result<Mat2>,
{
    check_grid(grid_n)?;
    Ok(ORIENTATION * winding_density_sum(field, grid_n)?)
}

fn winding_density_sum<F>(field: F, grid_n: usize) -> Result<f64>
where
    F: Fn([f64; 3]) -> Result<Mat2>,
{
    let h = TAU / grid_n as f64;
    let ks = k_grid(grid_n);
    let mut total = 0.0;
    for &a in &ks {
        for &b in &ks {
            let mut line = 0.0;
            for &c in &ks {
                let p = [a, b, c];
                let u_dag = field(p)?.adjoint();
                let mut conn = [Mat2::zeros(); 3];
                for (axis, slot) in conn.iter_mut().enumerate() {
                    let mut fwd = p;
                    let mut bwd = p;
                    fwd[axis] += h;
                    bwd[axis] -= h;
                    let du = (field(fwd)? - field(bwd)?) / Complex64::from(2.0 * h);
                    *slot = u_dag * du;
                }
                let comm = conn[1] * conn[2] - conn[2] * conn[1];
                line += (conn[0] * comm).trace().re;
            }
            total += line;
        }
    }
    Ok(total * h * h * h / (8.0 * PI * PI))
}

/// The half-line shift toy model.
#[derive(Clone, Debug)]
pub struct SshSpectra {
    /// Eigenvalues of the 2x2 Bloch matrix over a k-grid.
    pub bulk: Vec<f64>,
    /// Eigenvalues of the open chain, ascending.
    pub chain: Vec<f64>,
    /// Zero modes of the open chain in the chiral basis, as `2N` real vectors
    /// ordered `(A_0 … A_{N-1}, B_0 … B_{N-1})`.
    pub zero_modes: Vec<DVector<f64>>,
}

/// Bloch matrix `[[0, e^{−ik}], [e^{ik}, 0]]`.
pub fn ssh_bloch(k: f64) -> nalgebra::Matrix2<Complex64> {
    let z = Complex64::from_polar(1.0, k);
    nalgebra::Matrix2::new(Complex64::from(0.0), z.conj(), z, Complex64::from(0.0))
}

/// `[[0, Ŝ†], [Ŝ, 0]]` with the truncated shift `Ŝ|n⟩ = |n−1⟩`, `Ŝ|0⟩ = 0`.
pub fn ssh_open_chain(chain_len: usize) -> DMatrix<f64> {
    let n = chain_len;
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for site in 1..n {
        // Ŝ maps A_site to B_{site-1}
        h[(n + site - 1, site)] = 1.0;
        h[(site, n + site - 1)] = 1.0;
    }
    h
}

pub fn ssh_spectra(chain_len: usize) -> Result<SshSpectra> {
    if chain_len < 4 {
        return Err(Error::InvalidParameter(format!(
            "chain_len must be at least 4, got {chain_len}"
        )));
    }
    let bulk = k_grid(64)
        .into_iter()
        .flat_map(|k| {
            let ev = SymmetricEigen::new(ssh_bloch(k)).eigenvalues;
            [ev[0], ev[1]]
        })
        .collect();

    let h = ssh_open_chain(chain_len);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let chain: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let zero: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i].abs() < 1e-8)
        .collect();
    let zero_modes = chiral_basis(&eig.eigenvectors, &zero, chain_len);
    Ok(SshSpectra {
        bulk,
        chain,
        zero_modes,
    })
}

/// Rotates a degenerate zero subspace onto eigenvectors of the chiral
/// grading `diag(1_N, −1_N)`.
fn chiral_basis(vectors: &DMatrix<f64>, cols: &[usize], n: usize) -> Vec<DVector<f64>> {
    let basis: Vec<DVector<f64>> = cols.iter().map(|&c| vectors.column(c).into_owned()).collect();
    let d = basis.len();
    let chirality = |v: &DVector<f64>, w: &DVector<f64>| -> f64 {
        (0..2 * n)
            .map(|i| if i < n { v[i] * w[i] } else { -v[i] * w[i] })
            .sum()
    };
    let mut small = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            small[(i, j)] = chirality(&basis[i], &basis[j]);
        }
    }
    let rot = SymmetricEigen::new(small);
    (0..d)
        .map(|c| {
            basis
                .iter()
                .enumerate()
                .fold(DVector::zeros(2 * n), |acc, (i, b)| acc + b * rot.eigenvectors[(i, c)])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::max_norm;

    #[test]
    fn gamma_point_of_gapped_model() {
        let m = BlochModel::torus3d(4.0);
        let h = m.h([0.0; 3]);
        assert_eq!(max_norm(&(h - m.clifford.gamma[3] * Complex64::from(7.0))), 0.0);
        let ev = eigenvalues4(&h);
        assert!((ev[0] + 7.0).abs() < 1e-12 && (ev[3] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn critical_corner_closes_gap() {
        let m = BlochModel::torus3d(3.0);
        assert!(max_norm(&m.h([PI, PI, PI])) < 1e-15);
    }

    #[test]
    fn gap_scan_on_grid_closing_points() {
        assert!(gap_scan(&BlochModel::torus3d(3.0), 8).unwrap() < 1e-12);
        assert!(gap_scan(&BlochModel::torus3d(1.0), 8).unwrap() < 1e-12);
        assert!(gap_scan(&BlochModel::torus3d(4.0), 8).unwrap() > 0.5);
    }

    #[test]
    fn gap_scan_rejects_coarse_grid() {
        assert!(gap_scan(&BlochModel::torus3d(4.0), 4).is_err());
    }

    #[test]
    fn unitary_at_gamma() {
        let u = flat_band_unitary(&BlochModel::torus3d(4.0), [0.0; 3]).unwrap();
        let i = Complex64::new(0.0, 1.0);
        assert!(max_norm(&(u - Mat2::identity() * i)) < 1e-15);
    }

    #[test]
    fn unitary_signals_gap_closing() {
        let err = flat_band_unitary(&BlochModel::torus3d(3.0), [PI, PI, PI]).unwrap_err();
        assert!(matches!(err, Error::GapClosed { .. }));
    }

    #[test]
    fn winding_refused_at_criticality() {
        let err = winding3d(&BlochModel::torus3d(1.0), 8).unwrap_err();
        assert!(matches!(err, Error::Critical { .. }));
    }

    #[test]
    fn planar_model_has_no_family() {
        assert!(winding3d(&BlochModel::planar(2.0), 8).is_err());
    }

    #[test]
    fn asymptotic_at_zero_matches_cylinder() {
        let a = BlochModel::asymptotic(2.0, 0.75, 0.0);
        let c = BlochModel::cylinder(2.0, 0.0);
        for &k1 in &k_grid(12) {
            for &k2 in &k_grid(12) {
                let ea = eigenvalues4(&a.h([k1, k2, 0.0]));
                let ec = eigenvalues4(&c.h([k1, k2, 0.0]));
                for (x, y) in ea.iter().zip(ec.iter()) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ssh_chain_structure() {
        let h = ssh_open_chain(4);
        assert_eq!(h[(4, 1)], 1.0);
        assert_eq!(h[(1, 4)], 1.0);
        assert_eq!(h[(0, 7)], 0.0);
        assert!(ssh_spectra(3).is_err());
    }
}
