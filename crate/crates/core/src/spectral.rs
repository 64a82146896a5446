//! Spectra near zero, resolvent LDOS and the chiral index diagnostic.
//!
//! Site LDOS is the orbital trace of the broadened spectral function,
//!
//! ```text
//! LDOS(E, x) = Σ_o Im ⟨x,o| (H − E − iε)⁻¹ |x,o⟩ = Σ_n |ψ_n(x)|² ε / ((E − λ_n)² + ε²)
//! ```
//!
//! which is nonnegative and integrates to `4π` over energy. Two independent
//! evaluations are provided: a dense eigendecomposition (reference) and a
//! shifted banded LU with selected inversion (scaling path).

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band::{site_ordering, BandLu};
use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::sparse::SparseHermitian;

pub const DEFAULT_EPSILON: f64 = 0.06;
pub const DEFAULT_DENSE_CAP: usize = 12_000;

/// Eigenvalues closer than this are flagged as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LdosMethod {
    DenseEig,
    ShiftedSolve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteSelection {
    All,
    Explicit(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdosRequest {
    pub energies: Vec<f64>,
    pub epsilon: f64,
    pub sites: SiteSelection,
    pub method: LdosMethod,
    pub dense_cap: usize,
}

impl LdosRequest {
    pub fn new(energies: Vec<f64>, method: LdosMethod) -> Self {
        Self {
            energies,
            epsilon: DEFAULT_EPSILON,
            sites: SiteSelection::All,
            method,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("energies must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SiteMeta {
    pub id: usize,
    pub radius: f64,
    pub x1: f64,
    pub x2: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub mass: Option<f64>,
    pub alpha: Option<f64>,
    pub r_max: Option<f64>,
    pub core_cut: Option<f64>,
    pub epsilon: f64,
    pub method: Option<LdosMethod>,
}

/// LDOS values `values[e][s]` for `energies[e]` and `sites[s]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdosGrid {
    pub energies: Vec<f64>,
    pub sites: Vec<SiteMeta>,
    pub values: Vec<Vec<f64>>,
    pub meta: RunMeta,
}

impl LdosGrid {
    /// Fills positions and radii from the pattern the operator was built on.
    pub fn attach(&mut self, pattern: &Pattern) {
        for s in &mut self.sites {
            let site = &pattern.sites[s.id];
            s.radius = site.radius;
            s.x1 = site.position.x;
            s.x2 = site.position.y;
        }
        self.meta.alpha = Some(pattern.params.alpha);
        self.meta.r_max = Some(pattern.params.r_max);
        self.meta.core_cut = Some(pattern.params.core_cut);
    }

    pub fn energy_index(&self, e: f64) -> Option<usize> {
        self.energies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - e).abs().total_cmp(&(b.1 - e).abs()))
            .map(|(k, _)| k)
    }

    /// Sum of LDOS over sites with radius below `radius` at energy index `e`.
    pub fn core_weight(&self, e: usize, radius: f64) -> f64 {
        self.sites
            .iter()
            .zip(&self.values[e])
            .filter(|(s, _)| s.radius < radius)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV `E,site_id,radius,x1,x2,ldos`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["E", "site_id", "radius", "x1", "x2", "ldos"])?;
        for (e, row) in self.energies.iter().zip(&self.values) {
            for (s, v) in self.sites.iter().zip(row) {
                out.write_record(&[
                    e.to_string(),
                    s.id.to_string(),
                    s.radius.to_string(),
                    s.x1.to_string(),
                    s.x2.to_string(),
                    v.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Full eigendecomposition of a dense copy of `H`.
pub struct DenseSpectrum {
    pub values: Vec<f64>,
    pub vectors: Mat<Complex64>,
}

impl DenseSpectrum {
    pub fn compute(h: &SparseHermitian, cap: usize) -> Result<Self> {
        if h.dim() > cap {
            return Err(Error::DimensionCap { dim: h.dim(), cap });
        }
        let dense = h.to_dense();
        let evd = dense
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Solver(format!("dense eigensolver: {e:?}")))?;
        let values = (0..h.dim()).map(|k| evd.S()[k].re).collect();
        Ok(Self {
            values,
            vectors: evd.U().to_owned(),
        })
    }

    /// `w[n][s] = Σ_o |ψ_n(s, o)|²` for the listed sites.
    pub fn site_weights(&self, sites: &[usize]) -> Vec<Vec<f64>> {
        (0..self.values.len())
            .map(|n| {
                let col = self.vectors.col(n);
                sites
                    .iter()
                    .map(|&s| (0..4).map(|o| col[4 * s + o].norm_sqr()).sum())
                    .collect()
            })
            .collect()
    }

    /// `⟨ψ_n| J ⊗ 1 |ψ_n⟩`.
    pub fn chirality(&self, n: usize) -> f64 {
        let col = self.vectors.col(n);
        (0..col.nrows())
            .map(|i| if i % 4 < 2 { col[i].norm_sqr() } else { -col[i].norm_sqr() })
            .sum()
    }
}

fn selected_sites(h: &SparseHermitian, sel: &SiteSelection) -> Result<Vec<usize>> {
    match sel {
        SiteSelection::All => Ok((0..h.n_sites()).collect()),
        SiteSelection::Explicit(list) => {
            if let Some(bad) = list.iter().find(|&&s| s >= h.n_sites()) {
                return Err(Error::InvalidParameter(format!("site {bad} out of range")));
            }
            Ok(list.clone())
        }
    }
}

pub fn ldos(h: &SparseHermitian, req: &LdosRequest) -> Result<LdosGrid> {
    req.validate()?;
    let sites = selected_sites(h, &req.sites)?;
    let values = match req.method {
        LdosMethod::DenseEig => {
            let spec = DenseSpectrum::compute(h, req.dense_cap)?;
            ldos_from_spectrum(&spec, &sites, &req.energies, req.epsilon)
        }
        LdosMethod::ShiftedSolve => ldos_shifted(h, &sites, &req.energies, req.epsilon, &req.sites)?,
    };
    Ok(LdosGrid {
        energies: req.energies.clone(),
        sites: sites
            .iter()
            .map(|&id| SiteMeta {
                id,
                ..Default::default()
            })
            .collect(),
        values,
        meta: RunMeta {
            epsilon: req.epsilon,
            method: Some(req.method),
            ..Default::default()
        },
    })
}

/// Lorentzian-broadened LDOS from a precomputed spectrum.
pub fn ldos_from_spectrum(spec: &DenseSpectrum, sites: &[usize], energies: &[f64], epsilon: f64) -> Vec<Vec<f64>> {
    let weights = spec.site_weights(sites);
    energies
        .iter()
        .map(|&e| {
            let mut row = vec![0.0; sites.len()];
            for (lambda, w) in spec.values.iter().zip(&weights) {
                let d = e - lambda;
                let lorentz = epsilon / (d * d + epsilon * epsilon);
                for (r, wi) in row.iter_mut().zip(w) {
                    *r += lorentz * wi;
                }
            }
            row
        })
        .collect()
}

fn ldos_shifted(
    h: &SparseHermitian,
    sites: &[usize],
    energies: &[f64],
    epsilon: f64,
    sel: &SiteSelection,
) -> Result<Vec<Vec<f64>>> {
    let order = site_ordering(h);
    energies
        .iter()
        .map(|&e| {
            let lu = BandLu::factor(h, Complex64::new(e, epsilon), &order)?;
            let row = match sel {
                SiteSelection::All => {
                    let diag = lu.inverse_diagonal();
                    sites
                        .iter()
                        .map(|&s| (0..4).map(|o| diag[4 * s + o].im).sum())
                        .collect()
                }
                SiteSelection::Explicit(_) => sites
                    .iter()
                    .map(|&s| {
                        (0..4)
                            .map(|o| {
                                let mut rhs = vec![Complex64::new(0.0, 0.0); h.dim()];
                                rhs[4 * s + o] = Complex64::new(1.0, 0.0);
                                lu.solve(&rhs)[4 * s + o].im
                            })
                            .sum()
                    })
                    .collect(),
            };
            Ok(row)
        })
        .collect()
}

/// Mean LDOS per radial bin `[kΔ, (k+1)Δ)`; bins without sites are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub bin_width: f64,
    pub energies: Vec<f64>,
    pub counts: Vec<usize>,
    /// `means[e][bin]`.
    pub means: Vec<Vec<Option<f64>>>,
}

impl RadialProfile {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// CSV `E,R_bin,ldos_mean,count`; empty bins leave `ldos_mean` blank.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["E", "R_bin", "ldos_mean", "count"])?;
        for (e, row) in self.energies.iter().zip(&self.means) {
            for (k, (m, c)) in row.iter().zip(&self.counts).enumerate() {
                out.write_record(&[
                    e.to_string(),
                    (k as f64 * self.bin_width).to_string(),
                    m.map(|v| v.to_string()).unwrap_or_default(),
                    c.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub fn radial_profile(grid: &LdosGrid, bin_width: f64, r_max: f64) -> Result<RadialProfile> {
    if !(bin_width > 0.0) || !(r_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bin width and r_max must be positive, got {bin_width}, {r_max}"
        )));
    }
    let n_bins = (r_max / bin_width).ceil() as usize;
    let bin_of = |r: f64| ((r / bin_width).floor() as usize).min(n_bins - 1);
    let mut counts = vec![0usize; n_bins];
    for s in &grid.sites {
        counts[bin_of(s.radius)] += 1;
    }
    let means = grid
        .values
        .iter()
        .map(|row| {
            let mut sums = vec![0.0; n_bins];
            for (s, v) in grid.sites.iter().zip(row) {
                sums[bin_of(s.radius)] += v;
            }
            sums.iter()
                .zip(&counts)
                .map(|(&sum, &c)| (c > 0).then(|| sum / c as f64))
                .collect()
        })
        .collect();
    Ok(RadialProfile {
        bin_width,
        energies: grid.energies.clone(),
        counts,
        means,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigMethod {
    Dense,
    ShiftInvert,
}

#[derive(Clone, Debug)]
pub struct NearZero {
    /// Eigenvalues ordered by increasing `|λ|`.
    pub values: Vec<f64>,
    /// `site_weights[k][s] = Σ_o |ψ_k(s, o)|²`.
    pub site_weights: Vec<Vec<f64>>,
    /// Chirality `⟨ψ_k|J ⊗ 1|ψ_k⟩` after rotating degenerate zero clusters
    /// onto chirality eigenvectors.
    pub chirality: Vec<f64>,
    pub degenerate: bool,
}

pub fn eigs_near_zero(h: &SparseHermitian, count: usize, method: EigMethod) -> Result<NearZero> {
    let count = count.min(h.dim());
    let (values, vectors) = match method {
        EigMethod::Dense => {
            let spec = DenseSpectrum::compute(h, DEFAULT_DENSE_CAP)?;
            let mut idx: Vec<usize> = (0..spec.values.len()).collect();
            idx.sort_by(|&a, &b| spec.values[a].abs().total_cmp(&spec.values[b].abs()));
            idx.truncate(count);
            let vals: Vec<f64> = idx.iter().map(|&k| spec.values[k]).collect();
            let vecs: Vec<Vec<Complex64>> = idx
                .iter()
                .map(|&k| {
                    let c = spec.vectors.col(k);
                    (0..c.nrows()).map(|i| c[i]).collect()
                })
                .collect();
            (vals, vecs)
        }
        EigMethod::ShiftInvert => shift_invert(h, count)?,
    };
    let (values, vectors) = chiral_rotate(values, vectors);
    let site_weights = vectors
        .iter()
        .map(|v| {
            (0..h.n_sites())
                .map(|s| (0..4).map(|o| v[4 * s + o].norm_sqr()).sum())
                .collect()
        })
        .collect();
    let chirality = vectors.iter().map(|v| chirality_of(v)).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let degenerate = sorted.windows(2).any(|w| (w[1] - w[0]).abs() < DEGENERACY_TOL);
    if degenerate {
        log::info!("near-zero spectrum contains degenerate eigenvalues");
    }
    Ok(NearZero {
        values,
        site_weights,
        chirality,
        degenerate,
    })
}

fn chirality_of(v: &[Complex64]) -> f64 {
    v.iter()
        .enumerate()
        .map(|(i, z)| if i % 4 < 2 { z.norm_sqr() } else { -z.norm_sqr() })
        .sum()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Within every cluster of eigenvalues that vanish to `DEGENERACY_TOL`, rotate
/// onto eigenvectors of the chiral grading.
fn chiral_rotate(values: Vec<f64>, mut vectors: Vec<Vec<Complex64>>) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let zero: Vec<usize> = (0..values.len()).filter(|&k| values[k].abs() < 1e-8).collect();
    if zero.len() < 2 {
        return (values, vectors);
    }
    let d = zero.len();
    let j_apply = |v: &[Complex64]| -> Vec<Complex64> {
        v.iter()
            .enumerate()
            .map(|(i, z)| if i % 4 < 2 { *z } else { -z })
            .collect()
    };
    let mut small = nalgebra::DMatrix::<Complex64>::zeros(d, d);
    for (a, &ka) in zero.iter().enumerate() {
        let jv = j_apply(&vectors[ka]);
        for (b, &kb) in zero.iter().enumerate() {
            small[(b, a)] = dot(&vectors[kb], &jv);
        }
    }
    let eig = nalgebra::SymmetricEigen::new(small);
    let old: Vec<Vec<Complex64>> = zero.iter().map(|&k| vectors[k].clone()).collect();
    for (c, &k) in zero.iter().enumerate() {
        let mut v = vec![Complex64::new(0.0, 0.0); old[0].len()];
        for (r, o) in old.iter().enumerate() {
            let w = eig.eigenvectors[(r, c)];
            for (vi, oi) in v.iter_mut().zip(o) {
                *vi += w * oi;
            }
        }
        vectors[k] = v;
    }
    (values, vectors)
}

/// Imaginary shift used by the shift-invert iteration; keeps `H − iτ`
/// nonsingular even with exact zero modes.
const SHIFT_INVERT_TAU: f64 = 1e-3;
const SHIFT_INVERT_MAX_ITER: usize = 300;
const SHIFT_INVERT_TOL: f64 = 1e-10;

/// Subspace iteration on `(H − iτ)⁻¹` with Rayleigh–Ritz on `H`.
fn shift_invert(h: &SparseHermitian, count: usize) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let n = h.dim();
    let block = (2 * count + 8).min(n);
    let lu = BandLu::factor(h, Complex64::new(0.0, SHIFT_INVERT_TAU), &site_ordering(h))?;
    // deterministic start
    let mut basis: Vec<Vec<Complex64>> = (0..block)
        .map(|c| {
            (0..n)
                .map(|i| {
                    let t = (i * (c + 1)) as f64;
                    Complex64::new((0.7 * t + c as f64).sin(), (0.3 * t).cos())
                })
                .collect()
        })
        .collect();
    orthonormalize(&mut basis)?;
    let mut residual = f64::INFINITY;
    for _ in 0..SHIFT_INVERT_MAX_ITER {
        basis = basis.iter().map(|v| lu.solve(v)).collect();
        orthonormalize(&mut basis)?;
        let (vals, vecs) = rayleigh_ritz(h, &basis);
        residual = ritz_residual(h, &vals, &vecs, count);
        if residual < SHIFT_INVERT_TOL {
            return Ok(truncate_pairs(vals, vecs, count));
        }
        // (H − iτ)⁻¹ does not separate λ from −λ, so inside a degenerate |λ|
        // cluster larger than the block the iterate only converges to an
        // invariant subspace of H². span{V, HV} is then H-invariant.
        let mut extended = basis.clone();
        extended.extend(basis.iter().map(|v| h.matvec(v)));
        let (xvals, xvecs) = rayleigh_ritz(h, &orthonormal_span(extended));
        let xres = ritz_residual(h, &xvals, &xvecs, count);
        if xres < SHIFT_INVERT_TOL {
            return Ok(truncate_pairs(xvals, xvecs, count));
        }
        residual = residual.min(xres);
        basis = vecs;
    }
    Err(Error::NoConvergence {
        iterations: SHIFT_INVERT_MAX_ITER,
        residual,
    })
}

fn ritz_residual(h: &SparseHermitian, vals: &[f64], vecs: &[Vec<Complex64>], count: usize) -> f64 {
    vecs.iter()
        .zip(vals)
        .take(count)
        .map(|(v, &l)| {
            let hv = h.matvec(v);
            hv.iter().zip(v).map(|(a, b)| (a - b * l).norm_sqr()).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

fn truncate_pairs(vals: Vec<f64>, vecs: Vec<Vec<Complex64>>, count: usize) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    (vals.into_iter().take(count).collect(), vecs.into_iter().take(count).collect())
}

fn orthonormalize(basis: &mut [Vec<Complex64>]) -> Result<()> {
    for k in 0..basis.len() {
        for _ in 0..2 {
            for j in 0..k {
                let (done, rest) = basis.split_at_mut(k);
                let p = dot(&done[j], &rest[0]);
                for (x, y) in rest[0].iter_mut().zip(&done[j]) {
                    *x -= p * y;
                }
            }
        }
        let norm = basis[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return Err(Error::Solver("subspace iteration broke down (rank loss)".into()));
        }
        basis[k].iter_mut().for_each(|z| *z /= norm);
    }
    Ok(())
}

/// Orthonormal basis of the span of `vectors`, dropping dependent ones.
fn orthonormal_span(vectors: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        let before = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for _ in 0..2 {
            for u in &out {
                let p = dot(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= p * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-10 * before.max(f64::MIN_POSITIVE) {
            v.iter_mut().for_each(|z| *z /= norm);
            out.push(v);
        }
    }
    out
}

/// Ritz pairs of `H` on an orthonormal basis, ordered by `|λ|`.
fn rayleigh_ritz(h: &SparseHermitian, basis: &[Vec<Complex64>]) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let p = basis.len();
    let hv: Vec<Vec<Complex64>> = basis.iter().map(|v| h.matvec(v)).collect();
    let mut small = nalgebra::DMatrix::<Complex64>::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            small[(i, j)] = dot(&basis[i], &hv[j]);
        }
    }
    let small = (&small + small.adjoint()) * Complex64::from(0.5);
    let eig = nalgebra::SymmetricEigen::new(small);
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].abs().total_cmp(&eig.eigenvalues[b].abs()));
    let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = idx
        .iter()
        .map(|&k| {
            let mut v = vec![Complex64::new(0.0, 0.0); basis[0].len()];
            for (r, b) in basis.iter().enumerate() {
                let w = eig.eigenvectors[(r, k)];
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += w * bi;
                }
            }
            v
        })
        .collect();
    (vals, vecs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiralIndex {
    pub delta: f64,
    /// `Tr((J ⊗ 1) P_[−δ, δ](H))`.
    pub value: f64,
    /// Number of eigenvalues inside the window.
    pub states: usize,
    /// Eigenvalues within `1e−8` of `±δ`, where the projector is ill-conditioned.
    pub edge_states: usize,
}

pub fn chiral_index(h: &SparseHermitian, delta: f64) -> Result<ChiralIndex> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let spec = DenseSpectrum::compute(h, DEFAULT_DENSE_CAP)?;
    chiral_index_from(&spec, delta)
}

pub fn chiral_index_from(spec: &DenseSpectrum, delta: f64) -> Result<ChiralIndex> {
    let mut value = 0.0;
    let mut states = 0;
    let mut edge_states = 0;
    for (n, &l) in spec.values.iter().enumerate() {
        if (l.abs() - delta).abs() < 1e-8 {
            edge_states += 1;
        }
        if l.abs() <= delta {
            value += spec.chirality(n);
            states += 1;
        }
    }
    if edge_states > 0 {
        log::warn!("{edge_states} eigenvalue(s) within 1e-8 of the window edge ±{delta}");
    }
    Ok(ChiralIndex {
        delta,
        value,
        states,
        edge_states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::make_clifford;
    use crate::sparse::BlockBuilder;

    fn gamma4_site() -> SparseHermitian {
        let mut b = BlockBuilder::new(1);
        b.add(0, 0, make_clifford().gamma[3]);
        b.build()
    }

    #[test]
    fn single_site_closed_form() {
        let h = gamma4_site();
        let eps = 0.06;
        for method in [LdosMethod::DenseEig, LdosMethod::ShiftedSolve] {
            let mut req = LdosRequest::new(vec![0.0], method);
            req.epsilon = eps;
            let g = ldos(&h, &req).unwrap();
            let want = 4.0 * eps / (1.0 + eps * eps);
            assert!((g.values[0][0] - want).abs() < 1e-12, "{method:?}");
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let h = gamma4_site();
        let mut req = LdosRequest::new(vec![0.0], LdosMethod::DenseEig);
        req.epsilon = 0.0;
        assert!(ldos(&h, &req).is_err());
        let mut req = LdosRequest::new(vec![f64::NAN], LdosMethod::DenseEig);
        assert!(ldos(&h, &req).is_err());
        req.energies = vec![0.0];
        req.sites = SiteSelection::Explicit(vec![3]);
        assert!(ldos(&h, &req).is_err());
        req.sites = SiteSelection::All;
        req.dense_cap = 2;
        assert!(matches!(ldos(&h, &req), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn radial_bins() {
        let grid = LdosGrid {
            energies: vec![0.0],
            sites: (0..10)
                .map(|k| SiteMeta {
                    id: k,
                    radius: k as f64 * 0.5,
                    ..Default::default()
                })
                .collect(),
            values: vec![vec![2.5; 10]],
            meta: RunMeta::default(),
        };
        let prof = radial_profile(&grid, 1.0, 7.5).unwrap();
        assert_eq!(prof.n_bins(), 8);
        assert_eq!(prof.means[0][0], Some(2.5));
        assert_eq!(prof.means[0][5], None);
        assert_eq!(prof.counts[5], 0);
    }

    #[test]
    fn gamma4_has_no_chiral_weight() {
        let idx = chiral_index(&gamma4_site(), 0.5).unwrap();
        assert_eq!(idx.states, 0);
        assert_eq!(idx.value, 0.0);
        assert!(chiral_index(&gamma4_site(), 0.0).is_err());
    }

    #[test]
    fn window_edge_is_flagged() {
        let idx = chiral_index(&gamma4_site(), 1.0).unwrap();
        assert_eq!(idx.edge_states, 4);
    }
}
