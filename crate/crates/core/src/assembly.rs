//! Real-space chiral Hamiltonian on a defect pattern.
//!
//! Three kinds of terms, all real multiples of `Γ` matrices (or `i` times
//! one), so the result anticommutes exactly with `J ⊗ 1`:
//!
//! * onsite `(m − ½) Γ₄`,
//! * hopping `½ [i e_yx · Γ⃗ + Γ₄] ⊗ |y⟩⟨x|` on every directed bond,
//! * onsite plaquette terms
//!   `⅛ Σ_{(z,y)} [(ê_y·e)(e·Γ⃗)/cos ξ + (ê_z·e)(ê_x·e) Γ₄/(sin ξ cos ξ)]`
//!   with `e = e_zyx = (z − x) × (y − x)` in the fixed global axes.
//!
//! Far from the tip the plaquette sum reproduces the rotating mass texture
//! `sin(θ₀/α) n̂·Γ⃗ + cos(θ₀/α) Γ₄` of the asymptotic bulk model.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::bulk::BlochModel;
use crate::clifford::{max_norm, CliffordSet, Mat4};
use crate::error::{Error, Result};
use crate::pattern::{build_pattern, frame, Pattern, PatternParams};
use crate::sparse::{BlockBuilder, SparseHermitian};

/// Onsite mass `m` for a requested bulk mass `M`.
///
/// The far-field limit of the hopping contributes nothing to the constant
/// `Γ₄` term, so the onsite `(m − ½)Γ₄` has to carry `M` by itself:
/// `m = M + ½`. See [`asymptotic_residual`].
pub fn onsite_mass(mass: f64) -> f64 {
    mass + 0.5
}

/// `½ [i e · Γ⃗ + Γ₄]`, the block on `|y⟩⟨x|` for bond `e = y − x`.
pub fn hopping_block(bond: &Vector3<f64>, clifford: &CliffordSet) -> Mat4 {
    let i = Complex64::new(0.0, 1.0);
    (clifford.dot(bond) * i + clifford.gamma[3]) * Complex64::from(0.5)
}

/// Onsite block of site `x`: the mass term plus the plaquette sum.
pub fn onsite_block(pattern: &Pattern, x: usize, mass: f64, clifford: &CliffordSet) -> Mat4 {
    let m = onsite_mass(mass);
    let mut block = clifford.gamma[3] * Complex64::from(m - 0.5);
    if pattern.params.is_flat() {
        return block;
    }
    let cos_xi = pattern.params.cos_xi();
    let sin_xi = pattern.params.sin_xi();
    let mut vec_part = Vector3::zeros();
    let mut g4_part = 0.0;
    for p in &pattern.plaquettes[x] {
        let e = &p.normal;
        vec_part += e * (e.y / cos_xi);
        g4_part += e.z * e.x / (sin_xi * cos_xi);
    }
    block += clifford.dot(&(vec_part / 8.0));
    block += clifford.gamma[3] * Complex64::from(g4_part / 8.0);
    block
}

fn check_xi(params: &PatternParams) -> Result<()> {
    if params.is_flat() {
        return Ok(());
    }
    if params.cos_xi() == 0.0 || params.sin_xi() == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "plaquette terms undefined for alpha = {}",
            params.alpha
        )));
    }
    Ok(())
}

/// Assembles the defect Hamiltonian for bulk mass `M`. Blocks are inserted in
/// site-id order, so identical patterns give bit-identical operators.
pub fn assemble_defect(pattern: &Pattern, mass: f64, clifford: &CliffordSet) -> Result<SparseHermitian> {
    check_xi(&pattern.params)?;
    let mut b = BlockBuilder::new(pattern.len());
    for x in 0..pattern.len() {
        b.add(x, x, onsite_block(pattern, x, mass, clifford));
        for nb in &pattern.neighbors[x] {
            b.add(nb.id, x, hopping_block(&nb.bond, clifford));
        }
    }
    Ok(b.build())
}

/// Max-norm deviation between the local blocks around the site nearest to
/// `(r0, θ₀)` and the coefficients of the translation-invariant far-field
/// model at that site's angle.
///
/// For `α < 1` the reference is the asymptotic bulk model (hopping
/// `½[∓i a_i·Γ⃗ + Γ₄]`, onsite `sin φ n̂·Γ⃗ + (M + cos φ)Γ₄`, `φ = θ₀/α`). The
/// flat lattice has no plaquette terms and its reference is the planar model
/// with onsite `M Γ₄`.
pub fn asymptotic_residual(pattern: &Pattern, mass: f64, r0: f64, theta0: f64) -> Result<f64> {
    Ok(residual_report(pattern, mass, r0, theta0)?.residual)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    pub site: usize,
    pub radius: f64,
    pub theta0: f64,
    pub onsite: f64,
    pub hopping: f64,
    pub residual: f64,
}

pub fn residual_report(pattern: &Pattern, mass: f64, r0: f64, theta0: f64) -> Result<ResidualReport> {
    check_xi(&pattern.params)?;
    if r0 + 5.0 >= pattern.params.r_max || r0 - 5.0 < pattern.params.core_cut {
        return Err(Error::InvalidParameter(format!(
            "r0 = {r0} needs a full neighborhood inside [{}, {}] with margin 5",
            pattern.params.core_cut, pattern.params.r_max
        )));
    }
    let clifford = CliffordSet::default();
    let x = pattern
        .nearest_site(r0, theta0)
        .ok_or_else(|| Error::DegeneratePattern("empty pattern".into()))?;
    let site = &pattern.sites[x];
    let f = frame(site.theta0, &pattern.params);
    let directions = [f.a1, -f.a1, f.a2, -f.a2];
    let slots = classify_neighbors(pattern, x, &directions)?;

    let mut hopping: f64 = 0.0;
    for (slot, dir) in slots.iter().zip(directions.iter()) {
        let bond = pattern.neighbors[x][*slot].bond;
        let actual = hopping_block(&bond, &clifford);
        let ideal = hopping_block(dir, &clifford);
        hopping = hopping.max(max_norm(&(actual - ideal)));
    }

    let expected_onsite = if pattern.params.is_flat() {
        clifford.gamma[3] * Complex64::from(mass)
    } else {
        let phi = site.theta0 / pattern.params.alpha;
        clifford.dot(&(f.normal * phi.sin())) + clifford.gamma[3] * Complex64::from(mass + phi.cos())
    };
    let onsite = max_norm(&(onsite_block(pattern, x, mass, &clifford) - expected_onsite));
    Ok(ResidualReport {
        site: x,
        radius: site.radius,
        theta0: site.theta0,
        onsite,
        hopping,
        residual: onsite.max(hopping),
    })
}

/// Matches the neighbors of `x` to the four frame directions and checks that
/// every pair of perpendicular neighbors closes a plaquette, i.e. that the
/// 3x3 patch around `x` is a square patch.
fn classify_neighbors(pattern: &Pattern, x: usize, directions: &[Vector3<f64>; 4]) -> Result<[usize; 4]> {
    let irregular = |reason: String| Error::IrregularNeighborhood { site: x, reason };
    let nb = &pattern.neighbors[x];
    if nb.len() != 4 {
        return Err(irregular(format!("{} neighbors", nb.len())));
    }
    let mut slots = [usize::MAX; 4];
    for (d, dir) in directions.iter().enumerate() {
        let (slot, score) = nb
            .iter()
            .enumerate()
            .map(|(k, n)| (k, n.bond.normalize().dot(dir)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("four neighbors");
        if score < 0.9 {
            return Err(irregular(format!("no bond along frame direction {d}")));
        }
        if slots.contains(&slot) {
            return Err(irregular("two frame directions share a bond".into()));
        }
        slots[d] = slot;
    }
    for &a in &slots[..2] {
        for &b in &slots[2..] {
            let ya = nb[a].id;
            let yb = nb[b].id;
            let closes = pattern.neighbors[ya]
                .iter()
                .any(|n| n.id != x && pattern.neighbors[yb].iter().any(|m| m.id == n.id));
            if !closes {
                return Err(irregular(format!("corner between {ya} and {yb} missing")));
            }
        }
    }
    Ok(slots)
}

/// Residual at radius `r0` computed on an annulus `[r0 − 6, r0 + 6]`, which
/// holds the whole neighborhood without building the full disk.
pub fn residual_on_annulus(alpha: f64, mass: f64, r0: f64, theta0: f64) -> Result<ResidualReport> {
    let params = PatternParams::new(alpha, r0 + 6.0, (r0 - 6.0).max(0.0))?;
    let pattern = build_pattern(params)?;
    residual_report(&pattern, mass, r0, theta0)
}

/// The Bloch model whose real-space lattice operator the flat (α = 1)
/// assembly reproduces exactly.
pub fn flat_reference_model(mass: f64) -> BlochModel {
    BlochModel::planar(mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::make_clifford;

    #[test]
    fn hopping_blocks_are_adjoint_pairs() {
        let c = make_clifford();
        let e = Vector3::new(0.3, -0.7, 0.2);
        let fwd = hopping_block(&e, &c);
        let back = hopping_block(&(-e), &c);
        assert_eq!(max_norm(&(fwd.adjoint() - back)), 0.0);
    }

    #[test]
    fn small_defect_is_hermitian_and_chiral() {
        let pat = build_pattern(PatternParams::new(0.75, 6.0, 0.0).unwrap()).unwrap();
        let h = assemble_defect(&pat, 2.0, &make_clifford()).unwrap();
        assert_eq!(h.dim(), 4 * pat.len());
        assert!(h.hermiticity_defect() < 1e-14);
        assert_eq!(h.chiral_defect(), 0.0);
    }

    #[test]
    fn flat_onsite_is_bare_mass() {
        let pat = Pattern::flat_torus(4).unwrap();
        let c = make_clifford();
        let b = onsite_block(&pat, 0, 1.3, &c);
        assert!(max_norm(&(b - c.gamma[3] * Complex64::from(1.3))) < 1e-15);
    }

    #[test]
    fn residual_needs_room() {
        let pat = build_pattern(PatternParams::new(0.75, 20.0, 0.0).unwrap()).unwrap();
        assert!(asymptotic_residual(&pat, 2.0, 18.0, 0.3).is_err());
    }

    #[test]
    fn residual_needs_room_outside_core_cut() {
        let pat = build_pattern(PatternParams::new(0.75, 20.0, 8.0).unwrap()).unwrap();
        assert!(asymptotic_residual(&pat, 2.0, 12.0, 0.3).is_err());
        assert!(asymptotic_residual(&pat, 2.0, 13.5, 0.3).is_ok());
    }
}
