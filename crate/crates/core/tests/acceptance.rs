//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use defectlab::assembly::residual_on_annulus;
use defectlab::bulk::{ssh_spectra, winding3d, BlochModel};
use defectlab::clifford::{max_norm, Mat4};
use defectlab::pattern::frame_for_alpha;
use defectlab::spectral::DenseSpectrum;
use defectlab::{
    assemble_defect, build_pattern, gap_scan, ldos, make_clifford, LdosGrid, LdosMethod, LdosRequest, Pattern,
    PatternParams,
};
use num_complex::Complex64;

const EXACT: f64 = 0.0;
const FRAME_TOL: f64 = 1e-12;
const GAP_OPEN: f64 = 0.1;
const WINDING_DEV: f64 = 0.05;
const SSH_TOL: f64 = 1e-12;
const SSH_ZERO_TOL: f64 = 1e-10;
const END_WEIGHT: f64 = 0.99;
const ORACLE_TOL: f64 = 1e-8;
const RESIDUAL_MAX: f64 = 0.05;
const CORE_RADIUS: f64 = 5.0;
const CORE_RATIO: f64 = 5.0;
const CORE_SURVIVAL: f64 = 0.5;
const EQUIV_TOL: f64 = 1e-6;
const SYMMETRY_TOL: f64 = 1e-8;
const POSITIVITY_TOL: f64 = -1e-12;
const EPSILON: f64 = 0.06;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let elapsed = t.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    println!(
        "{} {name}: {} [{:.1} s, limit {} s]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn clifford_suite() -> Outcome {
    let c = make_clifford();
    let id = Mat4::identity();
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        worst = worst.max(max_norm(&(c.gamma[i].adjoint() - c.gamma[i])));
        worst = worst.max(max_norm(&(c.chiral * c.gamma[i] * c.chiral + c.gamma[i])));
        for j in 0..4 {
            let anti = c.gamma[i] * c.gamma[j] + c.gamma[j] * c.gamma[i];
            let want = if i == j { id * Complex64::from(2.0) } else { Mat4::zeros() };
            worst = worst.max(max_norm(&(anti - want)));
        }
    }
    worst = worst.max(max_norm(&(c.chiral * c.chiral - id)));
    Outcome {
        pass: worst <= EXACT,
        detail: format!("max identity defect {worst:e}"),
    }
}

fn frame_twist() -> Outcome {
    let alpha = 0.75;
    let mut ortho: f64 = 0.0;
    for j in 0..1000 {
        let f = frame_for_alpha(TAU * alpha * j as f64 / 1000.0, alpha);
        ortho = ortho
            .max((f.a1.norm() - 1.0).abs())
            .max((f.a2.norm() - 1.0).abs())
            .max(f.a1.dot(&f.a2).abs());
    }
    let f0 = frame_for_alpha(0.0, alpha);
    let f1 = frame_for_alpha(1.5 * PI, alpha);
    let twist = (f1.a1 - f0.a2).norm().max((f1.a2 + f0.a1).norm());
    Outcome {
        pass: ortho < FRAME_TOL && twist < FRAME_TOL,
        detail: format!("orthonormality defect {ortho:.1e}, twist defect {twist:.1e}"),
    }
}

fn bulk_phase_diagram() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for mass in [3.0, -3.0, 1.0, -1.0] {
        let g = gap_scan(&BlochModel::torus3d(mass), 60).unwrap_or(f64::NAN);
        pass &= g == 0.0 || g < 1e-12;
        parts.push(format!("gap(M={mass})={g:.1e}"));
    }
    for mass in [0.0, 2.0, -2.0, 4.0, -4.0] {
        let g = gap_scan(&BlochModel::torus3d(mass), 60).unwrap_or(f64::NAN);
        pass &= g > GAP_OPEN;
        parts.push(format!("gap(M={mass})={g:.3}"));
    }
    let mut windings = Vec::new();
    for (mass, want) in [(4.0, 0), (2.0, 1), (0.0, -2), (-2.0, 1), (-4.0, 0)] {
        match winding3d(&BlochModel::torus3d(mass), 40) {
            Ok(w) => {
                pass &= w.rounded == want && w.deviation() < WINDING_DEV;
                windings.push(format!("{:.4}", w.raw));
            }
            Err(e) => {
                pass = false;
                windings.push(format!("error {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: format!("{}; winding(4,2,0,-2,-4) = [{}]", parts.join(" "), windings.join(", ")),
    }
}

fn ssh_toy() -> Outcome {
    let s = match ssh_spectra(100) {
        Ok(s) => s,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: e.to_string(),
            }
        }
    };
    let bulk = s.bulk.iter().map(|l| (l.abs() - 1.0).abs()).fold(0.0, f64::max);
    let zeros = s.chain.iter().filter(|l| l.abs() < SSH_ZERO_TOL).count();
    let n = 100;
    let end = s
        .zero_modes
        .iter()
        .map(|v| {
            let first = v[0] * v[0] + v[n] * v[n];
            let last = v[n - 1] * v[n - 1] + v[2 * n - 1] * v[2 * n - 1];
            first.max(last)
        })
        .fold(1.0, f64::min);
    Outcome {
        pass: bulk < SSH_TOL && zeros == 2 && s.zero_modes.len() == 2 && end >= END_WEIGHT,
        detail: format!("bulk |λ|−1 ≤ {bulk:.1e}, {zeros} zero eigenvalues, min end weight {end:.4}"),
    }
}

fn assembly_oracle() -> Outcome {
    let l = 6;
    let mass = 1.3;
    let pat = Pattern::flat_torus(l).unwrap();
    let h = assemble_defect(&pat, mass, &make_clifford()).unwrap();
    let spec = DenseSpectrum::compute(&h, 10_000).unwrap();
    let mut got = spec.values.clone();
    let model = BlochModel::planar(mass);
    let mut want = Vec::new();
    for a in 0..l {
        for b in 0..l {
            let k = [TAU * a as f64 / l as f64, TAU * b as f64 / l as f64, 0.0];
            want.extend(defectlab::bulk::eigenvalues4(&model.h(k)));
        }
    }
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    let dev = got.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut chiral: f64 = 0.0;
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        let p = build_pattern(PatternParams::new(alpha, 12.0, 0.0).unwrap()).unwrap();
        chiral = chiral.max(assemble_defect(&p, 2.0, &make_clifford()).unwrap().chiral_defect());
    }
    Outcome {
        pass: got.len() == want.len() && dev < ORACLE_TOL && chiral <= EXACT,
        detail: format!("torus {l}x{l} spectrum deviation {dev:.1e}, chiral defect {chiral:e}"),
    }
}

fn asymptotic_convergence() -> Outcome {
    let alpha = 0.75;
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut decays = 0;
    for j in 0..8 {
        let theta0 = TAU * alpha * (j as f64 + 0.5) / 8.0;
        let res: Vec<f64> = [50.0, 100.0, 200.0]
            .iter()
            .map(|&r0| residual_on_annulus(alpha, 2.0, r0, theta0).map(|r| r.residual).unwrap_or(f64::NAN))
            .collect();
        worst = worst.max(res[2]);
        pass &= res[2] < RESIDUAL_MAX;
        if res[1] < res[0] && res[2] < res[1] {
            decays += 1;
        } else {
            pass = false;
        }
    }
    Outcome {
        pass,
        detail: format!("max residual at r0=200 {worst:.4}; decreasing 50→100→200 on {decays}/8 rays"),
    }
}

fn zero_energy_grid(alpha: f64, mass: f64, core_cut: f64) -> LdosGrid {
    let pat = build_pattern(PatternParams::new(alpha, 30.0, core_cut).unwrap()).unwrap();
    let h = assemble_defect(&pat, mass, &make_clifford()).unwrap();
    let mut req = LdosRequest::new(vec![0.0], LdosMethod::ShiftedSolve);
    req.epsilon = EPSILON;
    let mut g = ldos(&h, &req).unwrap();
    g.attach(&pat);
    g
}

fn bulk_defect_correspondence() -> Outcome {
    let top = zero_energy_grid(0.75, 2.0, 0.0).core_weight(0, CORE_RADIUS);
    let triv = zero_energy_grid(0.75, 4.0, 0.0).core_weight(0, CORE_RADIUS);
    let cut = zero_energy_grid(0.75, 2.0, 2.5).core_weight(0, CORE_RADIUS);
    let ratio = top / triv;
    let change = (cut - top).abs() / top;
    Outcome {
        pass: ratio >= CORE_RATIO && change < CORE_SURVIVAL,
        detail: format!(
            "core weight M=2 {top:.3}, M=4 {triv:.3}, ratio {ratio:.1}; core_cut 2.5 gives {cut:.3} (change {:.1}%)",
            100.0 * change
        ),
    }
}

fn defect_sequence() -> Outcome {
    let weights: Vec<f64> = [0.75, 0.5, 0.25]
        .iter()
        .map(|&a| zero_energy_grid(a, 2.0, 0.0).core_weight(0, CORE_RADIUS))
        .collect();
    let monotone = weights.windows(2).all(|w| w[1] >= w[0]);
    Outcome {
        pass: monotone,
        detail: format!(
            "integrated core LDOS for alpha 3/4, 2/4, 1/4 = {:.3}, {:.3}, {:.3}",
            weights[0], weights[1], weights[2]
        ),
    }
}

fn spectral_equivalence() -> Outcome {
    let pat = build_pattern(PatternParams::new(0.75, 14.5, 0.0).unwrap()).unwrap();
    let h = assemble_defect(&pat, 2.0, &make_clifford()).unwrap();
    let energies = vec![-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0];
    let mut req = LdosRequest::new(energies.clone(), LdosMethod::DenseEig);
    req.epsilon = EPSILON;
    let dense = ldos(&h, &req).unwrap();
    req.method = LdosMethod::ShiftedSolve;
    let shifted = ldos(&h, &req).unwrap();
    let mut rel: f64 = 0.0;
    for (d, s) in dense.values.iter().zip(&shifted.values) {
        for (a, b) in d.iter().zip(s) {
            rel = rel.max((a - b).abs() / a.abs());
        }
    }
    let mut sym: f64 = 0.0;
    let mut min = f64::INFINITY;
    for g in [&dense, &shifted] {
        let n = energies.len();
        for e in 0..n {
            for (a, b) in g.values[e].iter().zip(&g.values[n - 1 - e]) {
                sym = sym.max((a - b).abs());
            }
        }
        min = min.min(g.min_value());
    }
    Outcome {
        pass: rel < EQUIV_TOL && sym < SYMMETRY_TOL && min >= POSITIVITY_TOL,
        detail: format!(
            "{} sites, max relative deviation {rel:.1e}, E-symmetry defect {sym:.1e}, min LDOS {min:.3e}",
            pat.len()
        ),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        report("clifford suite", secs(1), clifford_suite),
        report("frame and twist", secs(1), frame_twist),
        report("bulk phase diagram", secs(120), bulk_phase_diagram),
        report("ssh toy", secs(1), ssh_toy),
        report("assembly oracle", secs(60), assembly_oracle),
        report("asymptotic convergence", secs(600), asymptotic_convergence),
        report("bulk-defect correspondence", secs(1800), bulk_defect_correspondence),
        report("defect sequence", secs(1800), defect_sequence),
        report("spectral engine equivalence", secs(600), spectral_equivalence),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
