//! Gridded grain-orientation maps: ingestion, bilinear interpolation, and
//! Gaussian smoothing.
//!
//! Grain angles are axial quantities (θ and θ + π describe the same
//! grain), so every node is kept in (−π/2, π/2]. Interpolation unwraps the
//! four cell corners onto a common branch before blending, and smoothing
//! averages the doubled-angle vectors (cos 2θ, sin 2θ).

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use crate::error::{Error, Result};

/// Wraps an angle into (−π/2, π/2].
pub fn wrap_axial(theta: f64) -> f64 {
    let mut t = theta % PI;
    if t > FRAC_PI_2 {
        t -= PI;
    } else if t <= -FRAC_PI_2 {
        t += PI;
    }
    t
}

/// Smallest signed difference a − b between two axial angles.
pub fn axial_difference(a: f64, b: f64) -> f64 {
    let d = wrap_axial(a - b);
    if d == FRAC_PI_2 {
        // ±π/2 are the same; keep the magnitude
        FRAC_PI_2
    } else {
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationGrid {
    pub origin: (f64, f64),
    pub spacing: (f64, f64),
    pub nx: usize,
    pub nz: usize,
    /// Node angles (rad), index `iz * nx + ix`.
    angles: Vec<f64>,
    /// σ of the Gaussian smoothing applied so far, mm.
    pub smoothing_radius: f64,
}

impl OrientationGrid {
    pub fn new(origin: (f64, f64), spacing: (f64, f64), nx: usize, nz: usize, angles: Vec<f64>) -> Result<Self> {
        if !(spacing.0 > 0.0 && spacing.1 > 0.0) {
            return Err(Error::param("spacing", "grid spacing must be positive"));
        }
        if nx < 2 || nz < 2 {
            return Err(Error::param("grid", "need at least 2×2 nodes"));
        }
        if angles.len() != nx * nz {
            return Err(Error::param("grid", format!("expected {} angles, got {}", nx * nz, angles.len())));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::param("grid", "non-finite angle"));
        }
        Ok(OrientationGrid {
            origin,
            spacing,
            nx,
            nz,
            angles: angles.into_iter().map(wrap_axial).collect(),
            smoothing_radius: 0.0,
        })
    }

    /// Samples `f(x, z)` on a lattice.
    pub fn from_fn(origin: (f64, f64), spacing: (f64, f64), nx: usize, nz: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut angles = Vec::with_capacity(nx * nz);
        for iz in 0..nz {
            for ix in 0..nx {
                angles.push(f(origin.0 + ix as f64 * spacing.0, origin.1 + iz as f64 * spacing.1));
            }
        }
        Self::new(origin, spacing, nx, nz, angles)
    }

    pub fn node(&self, ix: usize, iz: usize) -> f64 {
        self.angles[iz * self.nx + ix]
    }

    pub fn node_position(&self, ix: usize, iz: usize) -> (f64, f64) {
        (
            self.origin.0 + ix as f64 * self.spacing.0,
            self.origin.1 + iz as f64 * self.spacing.1,
        )
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn x_max(&self) -> f64 {
        self.origin.0 + (self.nx - 1) as f64 * self.spacing.0
    }

    pub fn z_max(&self) -> f64 {
        self.origin.1 + (self.nz - 1) as f64 * self.spacing.1
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        let eps = 1e-9 * (self.spacing.0 + self.spacing.1);
        x >= self.origin.0 - eps && x <= self.x_max() + eps && z >= self.origin.1 - eps && z <= self.z_max() + eps
    }

    /// Bilinear interpolation inside the hull.
    pub fn angle(&self, x: f64, z: f64) -> Result<f64> {
        if !self.contains(x, z) {
            return Err(Error::OutOfDomain {
                what: "orientation grid".into(),
                x,
                z,
            });
        }
        Ok(self.angle_clamped(x, z))
    }

    /// Bilinear interpolation with the query clamped onto the hull.
    pub fn angle_clamped(&self, x: f64, z: f64) -> f64 {
        let (ix, fx) = Self::locate((x - self.origin.0) / self.spacing.0, self.nx);
        let (iz, fz) = Self::locate((z - self.origin.1) / self.spacing.1, self.nz);
        let a00 = self.node(ix, iz);
        if fx == 0.0 && fz == 0.0 {
            return a00;
        }
        let unwrap = |a: f64| a00 + axial_difference(a, a00);
        let a10 = unwrap(self.node(ix + 1, iz));
        let a01 = unwrap(self.node(ix, iz + 1));
        let a11 = unwrap(self.node(ix + 1, iz + 1));
        let v = (1.0 - fx) * (1.0 - fz) * a00 + fx * (1.0 - fz) * a10 + (1.0 - fx) * fz * a01 + fx * fz * a11;
        wrap_axial(v)
    }

    // Cell index and fractional offset, snapping near-integer coordinates onto nodes.
    fn locate(u: f64, n: usize) -> (usize, f64) {
        let u = u.clamp(0.0, (n - 1) as f64);
        let r = u.round();
        let u = if (u - r).abs() < 1e-9 { r } else { u };
        let i = (u.floor() as usize).min(n - 2);
        (i, u - i as f64)
    }

    /// Gaussian smoothing with σ = `radius` mm (kernel truncated at 3σ,
    /// renormalized at the borders). Radius 0 returns the grid unchanged.
    pub fn smoothed(&self, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::param("smooth_mm", format!("{radius} must be ≥ 0")));
        }
        if radius == 0.0 {
            return Ok(self.clone());
        }
        let kernel = |h: f64| -> Vec<f64> {
            let half = (3.0 * radius / h).ceil() as isize;
            (-half..=half)
                .map(|k| {
                    let d = k as f64 * h;
                    (-0.5 * d * d / (radius * radius)).exp()
                })
                .collect()
        };
        let kx = kernel(self.spacing.0);
        let kz = kernel(self.spacing.1);
        let c: Vec<f64> = self.angles.iter().map(|a| (2.0 * a).cos()).collect();
        let s: Vec<f64> = self.angles.iter().map(|a| (2.0 * a).sin()).collect();
        let c = self.convolve(&self.convolve(&c, &kx, true), &kz, false);
        let s = self.convolve(&self.convolve(&s, &kx, true), &kz, false);
        let angles = c.iter().zip(&s).map(|(c, s)| wrap_axial(0.5 * s.atan2(*c))).collect();
        Ok(OrientationGrid {
            angles,
            smoothing_radius: (self.smoothing_radius.powi(2) + radius * radius).sqrt(),
            ..self.clone()
        })
    }

    fn convolve(&self, field: &[f64], kernel: &[f64], along_x: bool) -> Vec<f64> {
        let half = (kernel.len() / 2) as isize;
        let (n_along, n_across) = if along_x { (self.nx, self.nz) } else { (self.nz, self.nx) };
        let idx = |along: usize, across: usize| {
            if along_x {
                across * self.nx + along
            } else {
                along * self.nx + across
            }
        };
        let mut out = vec![0.0; field.len()];
        for across in 0..n_across {
            for along in 0..n_along {
                let mut acc = 0.0;
                let mut wsum = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    let j = along as isize + k as isize - half;
                    if j < 0 || j >= n_along as isize {
                        continue;
                    }
                    acc += w * field[idx(j as usize, across)];
                    wsum += w;
                }
                out[idx(along, across)] = acc / wsum;
            }
        }
        out
    }

    /// Largest |Δθ| / distance between adjacent nodes (rad/mm).
    pub fn lipschitz_bound(&self) -> f64 {
        let mut worst = 0.0_f64;
        for iz in 0..self.nz {
            for ix in 0..self.nx {
                let a = self.node(ix, iz);
                if ix + 1 < self.nx {
                    worst = worst.max(axial_difference(self.node(ix + 1, iz), a).abs() / self.spacing.0);
                }
                if iz + 1 < self.nz {
                    worst = worst.max(axial_difference(self.node(ix, iz + 1), a).abs() / self.spacing.1);
                }
            }
        }
        worst
    }

    /// Parses a `x_mm,z_mm,theta_deg` CSV holding a complete rectangular lattice.
    pub fn from_csv_reader<R: std::io::Read>(reader: R, path: &Path) -> Result<Self> {
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| perr(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x_mm", "z_mm", "theta_deg"] {
            return Err(perr(format!("expected header `x_mm,z_mm,theta_deg`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| perr(e.to_string()))?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| perr(format!("line {}: column {} is not a number", line + 2, headers.get(i).unwrap_or("?"))))
            };
            rows.push((field(0)?, field(1)?, field(2)?));
        }
        let axis = |vals: Vec<f64>| -> Vec<f64> {
            let mut v = vals;
            v.sort_by(|a, b| a.total_cmp(b));
            v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            v
        };
        let xs = axis(rows.iter().map(|r| r.0).collect());
        let zs = axis(rows.iter().map(|r| r.1).collect());
        if xs.len() < 2 || zs.len() < 2 || xs.len() * zs.len() != rows.len() {
            return Err(perr(format!("rows do not form a complete rectangular lattice ({} rows)", rows.len())));
        }
        let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        let dz = (zs[zs.len() - 1] - zs[0]) / (zs.len() - 1) as f64;
        let uniform = |v: &[f64], h: f64| v.windows(2).all(|w| ((w[1] - w[0]) - h).abs() < 1e-6 * h.max(1.0));
        if !uniform(&xs, dx) || !uniform(&zs, dz) {
            return Err(perr("lattice spacing is not uniform".into()));
        }
        let mut angles = vec![f64::NAN; xs.len() * zs.len()];
        for &(x, z, t) in &rows {
            let ix = ((x - xs[0]) / dx).round() as usize;
            let iz = ((z - zs[0]) / dz).round() as usize;
            angles[iz * xs.len() + ix] = t.to_radians();
        }
        if angles.iter().any(|a| a.is_nan()) {
            return Err(perr("duplicate lattice node".into()));
        }
        Self::new((xs[0], zs[0]), (dx, dz), xs.len(), zs.len(), angles).map_err(|e| perr(e.to_string()))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(f, path)
    }

    /// Row-major CSV with header `x_mm,z_mm,theta_deg`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_mm,z_mm,theta_deg\n");
        for iz in 0..self.nz {
            for ix in 0..self.nx {
                let (x, z) = self.node_position(ix, iz);
                out.push_str(&format!("{x},{z},{}\n", self.node(ix, iz).to_degrees()));
            }
        }
        out
    }
}

pub fn grid_angle(grid: &OrientationGrid, x: f64, z: f64) -> Result<f64> {
    grid.angle(x, z)
}

pub fn smooth_grid(grid: &OrientationGrid, radius: f64) -> Result<OrientationGrid> {
    grid.smoothed(radius)
}
