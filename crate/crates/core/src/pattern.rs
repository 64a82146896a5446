//! Conical defect patterns of the square lattice.
//!
//! A defect with cone parameter `α` keeps the lattice points whose polar
//! angle lies in `[0, 2πα)` and rolls that sector into a cone in R³:
//!
//! ```text
//! (n, m) ↦ (rα cos(θ/α), rα sin(θ/α), −r √(1 − α²))
//! ```
//!
//! The map is an isometry of the sector onto the cone surface, so the two
//! straight edges of the sector (θ = 0 and θ = 2πα) land on the same ray.
//! That ray is the glue seam. Neighbors are found geometrically from the
//! embedded positions, which makes bonds across the seam appear without any
//! special casing.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sites closer than this are treated as the same point.
pub const DEDUP_TOLERANCE: f64 = 1e-6;

/// Bond-length window selecting nearest neighbors: keeps unit bonds (and the
/// slightly shortened chords near the tip) and rejects the √2 diagonals.
pub const DEFAULT_WINDOW: (f64, f64) = (0.5, 1.3);

const ANGLE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternParams {
    /// Cone parameter in (0, 1]; `α = 1` is the undefected plane.
    pub alpha: f64,
    /// Outer radius cutoff in lattice constants.
    pub r_max: f64,
    /// Sites with radius below this are removed (0 keeps the tip).
    #[serde(default)]
    pub core_cut: f64,
    /// Neighbor distance window `(d_min, d_max)`.
    #[serde(default = "default_window")]
    pub window: (f64, f64),
}

fn default_window() -> (f64, f64) {
    DEFAULT_WINDOW
}

impl PatternParams {
    pub fn new(alpha: f64, r_max: f64, core_cut: f64) -> Result<Self> {
        let p = Self {
            alpha,
            r_max,
            core_cut,
            window: DEFAULT_WINDOW,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_window(mut self, d_min: f64, d_max: f64) -> Result<Self> {
        self.window = (d_min, d_max);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        validate_alpha(self.alpha)?;
        if !(self.r_max > 0.0) || !self.r_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "r_max must be positive, got {}",
                self.r_max
            )));
        }
        if !(self.core_cut >= 0.0) || self.core_cut >= self.r_max {
            return Err(Error::InvalidParameter(format!(
                "core_cut must lie in [0, r_max), got {}",
                self.core_cut
            )));
        }
        let (lo, hi) = self.window;
        if !(lo >= 0.0 && hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "neighbor window must satisfy 0 <= d_min < d_max, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// The angle ξ with `sin ξ = α`.
    pub fn xi(&self) -> f64 {
        self.alpha.asin()
    }

    pub fn sin_xi(&self) -> f64 {
        self.alpha
    }

    pub fn cos_xi(&self) -> f64 {
        (1.0 - self.alpha * self.alpha).max(0.0).sqrt()
    }

    /// Opening angle `2πα` of the kept sector.
    pub fn sector(&self) -> f64 {
        TAU * self.alpha
    }

    pub fn is_flat(&self) -> bool {
        self.alpha == 1.0
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "cone parameter alpha must lie in (0, 1], got {alpha}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub id: usize,
    /// Canonical preimage in Z², with polar angle in `[0, 2πα)`.
    pub lattice: (i64, i64),
    pub position: Vector3<f64>,
    pub radius: f64,
    pub theta0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    /// `e_yx = position(y) − position(x)`.
    pub bond: Vector3<f64>,
}

/// An ordered pair of distinct neighbors `(z, y)` of a site `x`, with the
/// cached normal `e_zyx = (z − x) × (y − x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plaquette {
    pub z: usize,
    pub y: usize,
    pub normal: Vector3<f64>,
}

#[derive(Clone, Debug)]
pub struct Pattern {
    pub params: PatternParams,
    pub sites: Vec<Site>,
    pub neighbors: Vec<Vec<Neighbor>>,
    pub plaquettes: Vec<Vec<Plaquette>>,
    /// Side length when the pattern is a periodic flat torus.
    pub periodic: Option<usize>,
}

/// Polar angle of a lattice point in `[0, 2π)`; exact on the axes, 0 at the origin.
pub fn lattice_angle(n: i64, m: i64) -> f64 {
    match (n.signum(), m.signum()) {
        (0, 0) | (1, 0) => 0.0,
        (0, 1) => FRAC_PI_2,
        (-1, 0) => PI,
        (0, -1) => 3.0 * FRAC_PI_2,
        _ => {
            let t = (m as f64).atan2(n as f64);
            if t < 0.0 {
                t + TAU
            } else {
                t
            }
        }
    }
}

/// Whether the lattice point lies in the kept sector `[0, 2πα)`.
pub fn in_sector(n: i64, m: i64, alpha: f64) -> bool {
    alpha >= 1.0 || lattice_angle(n, m) < TAU * alpha - ANGLE_SLACK
}

/// Cone embedding of the lattice point `(n, m)`.
pub fn map_point(n: i64, m: i64, alpha: f64) -> Result<Vector3<f64>> {
    validate_alpha(alpha)?;
    let r = ((n * n + m * m) as f64).sqrt();
    Ok(cone_point(r, lattice_angle(n, m), alpha))
}

/// Cone embedding of the planar point with polar coordinates `(r, θ)`.
pub fn cone_point(r: f64, theta: f64, alpha: f64) -> Vector3<f64> {
    let phi = theta / alpha;
    let cos_xi = (1.0 - alpha * alpha).max(0.0).sqrt();
    Vector3::new(r * alpha * phi.cos(), r * alpha * phi.sin(), -r * cos_xi)
}

/// The asymptotic lattice frame seen far from the tip along the ray θ₀.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub theta0: f64,
    pub a1: Vector3<f64>,
    pub a2: Vector3<f64>,
    pub normal: Vector3<f64>,
}

pub fn frame(theta0: f64, params: &PatternParams) -> Frame {
    frame_for_alpha(theta0, params.alpha)
}

pub fn frame_for_alpha(theta0: f64, alpha: f64) -> Frame {
    let sin_xi = alpha;
    let cos_xi = (1.0 - alpha * alpha).max(0.0).sqrt();
    let (s0, c0) = theta0.sin_cos();
    let (sp, cp) = (theta0 / alpha).sin_cos();
    let a1 = Vector3::new(
        sin_xi * c0 * cp + s0 * sp,
        sin_xi * c0 * sp - s0 * cp,
        -cos_xi * c0,
    );
    let a2 = Vector3::new(
        sin_xi * s0 * cp - c0 * sp,
        sin_xi * s0 * sp + c0 * cp,
        -cos_xi * s0,
    );
    Frame {
        theta0,
        a1,
        a2,
        normal: a1.cross(&a2),
    }
}

/// Integer cell of a point on a grid of spacing `h`.
fn cell(p: &Vector3<f64>, h: f64) -> [i64; 3] {
    [
        (p.x / h).floor() as i64,
        (p.y / h).floor() as i64,
        (p.z / h).floor() as i64,
    ]
}

struct SpatialHash {
    h: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl SpatialHash {
    fn new(h: f64) -> Self {
        Self {
            h,
            cells: HashMap::new(),
        }
    }

    fn insert(&mut self, id: usize, p: &Vector3<f64>) {
        self.cells.entry(cell(p, self.h)).or_default().push(id);
    }

    /// Candidates in the 27 cells around `p`.
    fn around<'a>(&'a self, p: &Vector3<f64>) -> impl Iterator<Item = usize> + 'a {
        let c = cell(p, self.h);
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                (-1..=1).flat_map(move |dz| {
                    self.cells
                        .get(&[c[0] + dx, c[1] + dy, c[2] + dz])
                        .into_iter()
                        .flatten()
                        .copied()
                })
            })
        })
    }
}

/// Enumerates the sector, embeds it, removes seam duplicates and builds
/// adjacency and plaquettes.
pub fn build_pattern(params: PatternParams) -> Result<Pattern> {
    params.validate()?;
    if params.r_max < 1.0 {
        return Err(Error::DegeneratePattern(format!(
            "r_max = {} < 1 leaves no bonds",
            params.r_max
        )));
    }

    let bound = params.r_max.floor() as i64;
    let r2_max = params.r_max * params.r_max * (1.0 + 1e-12);
    let r2_min = params.core_cut * params.core_cut * (1.0 - 1e-12);
    let mut raw: Vec<(i64, f64, i64, i64)> = Vec::new();
    for n in -bound..=bound {
        for m in -bound..=bound {
            let r2 = n * n + m * m;
            let r2f = r2 as f64;
            if r2f > r2_max || r2f < r2_min {
                continue;
            }
            if !in_sector(n, m, params.alpha) {
                continue;
            }
            raw.push((r2, lattice_angle(n, m), n, m));
        }
    }
    raw.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });

    let mut sites: Vec<Site> = Vec::with_capacity(raw.len());
    let mut dedup = SpatialHash::new(DEDUP_TOLERANCE);
    for (r2, theta, n, m) in raw {
        let radius = (r2 as f64).sqrt();
        let position = cone_point(radius, theta, params.alpha);
        let duplicate = dedup
            .around(&position)
            .any(|j| (sites[j].position - position).norm() < DEDUP_TOLERANCE);
        if duplicate {
            continue;
        }
        let id = sites.len();
        dedup.insert(id, &position);
        sites.push(Site {
            id,
            lattice: (n, m),
            position,
            radius,
            theta0: theta,
        });
    }
    if sites.is_empty() {
        return Err(Error::DegeneratePattern("no lattice points in range".into()));
    }

    let mut pattern = Pattern {
        params,
        sites,
        neighbors: Vec::new(),
        plaquettes: Vec::new(),
        periodic: None,
    };
    pattern.neighbors = build_adjacency(&pattern, params.window);
    pattern.plaquettes = build_plaquettes(&pattern);
    Ok(pattern)
}

/// Geometric adjacency: `x ~ y` iff `d_min ≤ |y − x| ≤ d_max`.
pub fn build_adjacency(pattern: &Pattern, window: (f64, f64)) -> Vec<Vec<Neighbor>> {
    let (d_min, d_max) = window;
    let mut grid = SpatialHash::new(d_max);
    for s in &pattern.sites {
        grid.insert(s.id, &s.position);
    }
    let mut out: Vec<Vec<Neighbor>> = pattern
        .sites
        .iter()
        .map(|x| {
            let mut nb: Vec<Neighbor> = grid
                .around(&x.position)
                .filter(|&j| j != x.id)
                .filter_map(|j| {
                    let bond = pattern.sites[j].position - x.position;
                    let d = bond.norm();
                    (d >= d_min && d <= d_max).then_some(Neighbor { id: j, bond })
                })
                .collect();
            nb.sort_by_key(|n| n.id);
            nb
        })
        .collect();
    out.shrink_to_fit();

    let crowded = out.iter().filter(|nb| nb.len() > 4).count();
    if crowded > 0 {
        log::warn!(
            "{crowded} site(s) have more than 4 neighbors (alpha = {}); geometry is anomalous near the tip",
            pattern.params.alpha
        );
    }
    out
}

/// All ordered pairs of distinct neighbors for every site. Collinear pairs are
/// kept; their normal vanishes.
pub fn build_plaquettes(pattern: &Pattern) -> Vec<Vec<Plaquette>> {
    pattern
        .neighbors
        .iter()
        .map(|nb| {
            let mut out = Vec::with_capacity(nb.len() * nb.len().saturating_sub(1));
            for (iz, z) in nb.iter().enumerate() {
                for (iy, y) in nb.iter().enumerate() {
                    if iz != iy {
                        out.push(Plaquette {
                            z: z.id,
                            y: y.id,
                            normal: z.bond.cross(&y.bond),
                        });
                    }
                }
            }
            out
        })
        .collect()
}

impl Pattern {
    /// The flat `L × L` square lattice with periodic identifications.
    pub fn flat_torus(l: usize) -> Result<Self> {
        if l < 3 {
            return Err(Error::InvalidParameter(format!(
                "torus side must be at least 3, got {l}"
            )));
        }
        let li = l as i64;
        let sites: Vec<Site> = (0..li)
            .flat_map(|n| (0..li).map(move |m| (n, m)))
            .enumerate()
            .map(|(id, (n, m))| {
                let position = Vector3::new(n as f64, m as f64, 0.0);
                Site {
                    id,
                    lattice: (n, m),
                    position,
                    radius: position.norm(),
                    theta0: lattice_angle(n, m),
                }
            })
            .collect();
        let index = |n: i64, m: i64| (n.rem_euclid(li) * li + m.rem_euclid(li)) as usize;
        let neighbors = sites
            .iter()
            .map(|s| {
                let (n, m) = s.lattice;
                let mut nb: Vec<Neighbor> = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .map(|&(dn, dm)| Neighbor {
                        id: index(n + dn, m + dm),
                        bond: Vector3::new(dn as f64, dm as f64, 0.0),
                    })
                    .collect();
                nb.sort_by_key(|n| n.id);
                nb
            })
            .collect();
        let mut pattern = Pattern {
            params: PatternParams {
                alpha: 1.0,
                r_max: (2.0_f64).sqrt() * l as f64,
                core_cut: 0.0,
                window: DEFAULT_WINDOW,
            },
            sites,
            neighbors,
            plaquettes: Vec::new(),
            periodic: Some(l),
        };
        pattern.plaquettes = build_plaquettes(&pattern);
        Ok(pattern)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn bond_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Map from canonical lattice coordinates to site ids.
    pub fn lattice_index(&self) -> HashMap<(i64, i64), usize> {
        self.sites.iter().map(|s| (s.lattice, s.id)).collect()
    }

    /// Site whose planar polar coordinates are closest to `(r, θ)`.
    pub fn nearest_site(&self, r: f64, theta: f64) -> Option<usize> {
        let target = cone_point(r, theta, self.params.alpha);
        self.sites
            .iter()
            .min_by(|a, b| {
                (a.position - target)
                    .norm_squared()
                    .total_cmp(&(b.position - target).norm_squared())
            })
            .map(|s| s.id)
    }

    /// CSV with header `id,n,m,x,y,z,radius,theta0`.
    pub fn write_sites_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "n", "m", "x", "y", "z", "radius", "theta0"])?;
        for s in &self.sites {
            out.write_record(&[
                s.id.to_string(),
                s.lattice.0.to_string(),
                s.lattice.1.to_string(),
                s.position.x.to_string(),
                s.position.y.to_string(),
                s.position.z.to_string(),
                s.radius.to_string(),
                s.theta0.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// CSV with header `id_from,id_to,ex,ey,ez`, one row per directed bond.
    pub fn write_adjacency_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id_from", "id_to", "ex", "ey", "ez"])?;
        for (x, nb) in self.neighbors.iter().enumerate() {
            for n in nb {
                out.write_record(&[
                    x.to_string(),
                    n.id.to_string(),
                    n.bond.x.to_string(),
                    n.bond.y.to_string(),
                    n.bond.z.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}
