use defectlab::bulk::{
    eigenvalues4, family_gap_scan, gap_scan, ssh_spectra, winding3d, BlochModel, DEFAULT_WINDING_GRID,
};
use defectlab::spectral::chiral_index;
use defectlab::Error;
use proptest::prelude::*;

mod common;
use common::embed_chain;

#[test]
fn winding_table() {
    for (mass, expected) in [(4.0, 0), (2.0, 1), (0.0, -2), (-2.0, 1), (-4.0, 0)] {
        let w = winding3d(&BlochModel::torus3d(mass), DEFAULT_WINDING_GRID).unwrap();
        println!("M = {mass}: raw = {:.6}", w.raw);
        assert_eq!(w.rounded, expected, "M = {mass}, raw = {}", w.raw);
        assert!(w.deviation() < 0.05, "M = {mass}, raw = {}", w.raw);
    }
}

#[test]
fn winding_stable_under_refinement() {
    let coarse = winding3d(&BlochModel::torus3d(2.0), 24).unwrap();
    let fine = winding3d(&BlochModel::torus3d(2.0), 48).unwrap();
    assert_eq!(coarse.rounded, fine.rounded);
    assert!(fine.deviation() <= coarse.deviation() + 1e-12);
}

#[test]
fn gaps_open_and_close() {
    for mass in [0.0, 2.0, -2.0, 4.0, -4.0] {
        let g = gap_scan(&BlochModel::torus3d(mass), 60).unwrap();
        assert!(g > 0.1, "M = {mass}: gap {g}");
    }
    for mass in [1.0, -1.0, 3.0, -3.0] {
        let g = gap_scan(&BlochModel::torus3d(mass), 60).unwrap();
        assert!(g < 1e-12, "M = {mass}: gap {g}");
        assert!(matches!(
            winding3d(&BlochModel::torus3d(mass), 40),
            Err(Error::Critical { .. })
        ));
    }
}

#[test]
fn asymptotic_family_is_gapped_in_topological_phase() {
    let g = family_gap_scan(&BlochModel::asymptotic(2.0, 0.75, 0.0), 24).unwrap();
    assert!(g > 0.1, "gap {g}");
}

#[test]
fn ssh_end_modes() {
    let s = ssh_spectra(100).unwrap();
    assert_eq!(s.zero_modes.len(), 2);
    assert_eq!(s.chain.iter().filter(|l| l.abs() < 1e-10).count(), 2);
    for mode in &s.zero_modes {
        let n = mode.len() / 2;
        let a: f64 = mode.iter().take(n).map(|c| c * c).sum();
        let b: f64 = mode.iter().skip(n).map(|c| c * c).sum();
        assert!(a.max(b) > 0.99, "sublattice weights {a} {b}");
        let first = mode[0] * mode[0] + mode[n] * mode[n];
        let last = mode[n - 1] * mode[n - 1] + mode[2 * n - 1] * mode[2 * n - 1];
        assert!(first.max(last) > 0.99, "end weights {first} {last}");
    }
    for k in &s.bulk {
        assert!((k.abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ssh_chiral_index_vanishes() {
    let n = 30;
    let chain = defectlab::bulk::ssh_open_chain(n);
    let h = embed_chain(&chain);
    let idx = chiral_index(&h, 0.5).unwrap();
    assert!(idx.value.abs() < 1e-9, "index {}", idx.value);
    assert_eq!(idx.states, 2);
}

proptest! {
    #[test]
    fn torus_spectrum_is_plus_minus_norm(
        mass in -5.0f64..5.0,
        k1 in -3.2f64..3.2,
        k2 in -3.2f64..3.2,
        k3 in -3.2f64..3.2,
    ) {
        let h = BlochModel::torus3d(mass).h([k1, k2, k3]);
        let d2 = k1.sin().powi(2) + k2.sin().powi(2) + k3.sin().powi(2)
            + (mass + k1.cos() + k2.cos() + k3.cos()).powi(2);
        let ev = eigenvalues4(&h);
        let d = d2.sqrt();
        for (got, want) in ev.iter().zip([-d, -d, d, d]) {
            prop_assert!((got - want).abs() < 1e-10);
        }
    }
}
