//! Uniform space-time grids, field construction and sampling, the
//! variable change u <-> u^m, and the exact Barenblatt (ZKB) oracle.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance below which negative solution values are treated as zero.
pub const TOL_NEG: f64 = 1e-12;

/// Cell-centered uniform space-time grid in dimension 1 or 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub extents: Vec<(f64, f64)>,
    pub nx: Vec<usize>,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
    pub dx: Vec<f64>,
    pub dt: f64,
}

impl Grid {
    /// Number of cells in one spatial slice.
    pub fn spatial_len(&self) -> usize {
        self.nx.iter().product()
    }

    /// Number of stored time slices (time levels), `nt + 1`.
    pub fn time_len(&self) -> usize {
        self.nt + 1
    }

    /// Spatial cell volume, the product of the spacings.
    pub fn cell_volume(&self) -> f64 {
        self.dx.iter().product()
    }

    /// Space-time cell measure `dt * prod(dx)`.
    pub fn cell_measure(&self) -> f64 {
        self.dt * self.cell_volume()
    }

    pub fn time(&self, ti: usize) -> f64 {
        self.t0 + ti as f64 * self.dt
    }

    /// Cell-center coordinates of the flattened spatial index.
    pub fn center(&self, flat: usize) -> Vec<f64> {
        let mut coords = Vec::with_capacity(self.n);
        let mut rem = flat;
        for axis in 0..self.n {
            let i = rem % self.nx[axis];
            rem /= self.nx[axis];
            coords.push(self.extents[axis].0 + (i as f64 + 0.5) * self.dx[axis]);
        }
        coords
    }

    /// Flattened index from per-axis cell indices.
    pub fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        let mut stride = 1;
        for (i, nx) in idx.iter().zip(self.nx.iter()) {
            f += i * stride;
            stride *= nx;
        }
        f
    }

    /// Per-axis indices from the flattened spatial index.
    pub fn unflatten(&self, flat: usize) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.n);
        let mut rem = flat;
        for axis in 0..self.n {
            idx.push(rem % self.nx[axis]);
            rem /= self.nx[axis];
        }
        idx
    }

    /// Index of the grid time closest to `t`, or an error when `t` lies
    /// outside the time interval (up to roundoff).
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * self.dt.max(1e-300);
        if t < self.t0 - tol || t > self.t1 + tol {
            return Err(Error::InvalidArgument(format!(
                "time {t} outside grid interval [{}, {}]",
                self.t0, self.t1
            )));
        }
        let i = ((t - self.t0) / self.dt).round() as usize;
        Ok(i.min(self.nt))
    }
}

/// A scalar function sampled at the cell centers of a [`Grid`].
///
/// Values are stored one spatial slice per time level; fields are
/// immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub name: String,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        let expect = grid.time_len() * grid.spatial_len();
        if values.len() != expect {
            return Err(Error::InvalidArgument(format!(
                "value buffer length {} does not match grid ({} slices x {} cells)",
                values.len(),
                grid.time_len(),
                grid.spatial_len()
            )));
        }
        Ok(Field {
            grid,
            values,
            name: name.into(),
        })
    }

    pub fn zeros(grid: Grid, name: impl Into<String>) -> Self {
        let len = grid.time_len() * grid.spatial_len();
        Field {
            grid,
            values: vec![0.0; len],
            name: name.into(),
        }
    }

    pub fn at(&self, ti: usize, flat: usize) -> f64 {
        self.values[ti * self.grid.spatial_len() + flat]
    }

    pub fn slice(&self, ti: usize) -> &[f64] {
        let s = self.grid.spatial_len();
        &self.values[ti * s..(ti + 1) * s]
    }

    /// Multilinear interpolation in space and linear interpolation in
    /// time at an arbitrary point of the grid domain. Coordinates are
    /// clamped to the cell-center hull.
    pub fn interpolate(&self, t: f64, x: &[f64]) -> f64 {
        let g = &self.grid;
        let tf = if g.nt == 0 {
            0.0
        } else {
            ((t - g.t0) / g.dt).clamp(0.0, g.nt as f64)
        };
        let ti0 = (tf.floor() as usize).min(g.nt.saturating_sub(1));
        let ti1 = (ti0 + 1).min(g.nt);
        let wt = tf - ti0 as f64;

        let mut lo = vec![0usize; g.n];
        let mut w = vec![0.0f64; g.n];
        for axis in 0..g.n {
            let f = ((x[axis] - g.extents[axis].0) / g.dx[axis] - 0.5)
                .clamp(0.0, (g.nx[axis] - 1) as f64);
            let i0 = (f.floor() as usize).min(g.nx[axis].saturating_sub(2));
            lo[axis] = i0;
            w[axis] = (f - i0 as f64).clamp(0.0, 1.0);
        }

        let corners = 1usize << g.n;
        let interp_slice = |ti: usize| -> f64 {
            let mut acc = 0.0;
            for c in 0..corners {
                let mut weight = 1.0;
                let mut idx = vec![0usize; g.n];
                for axis in 0..g.n {
                    if c >> axis & 1 == 1 {
                        idx[axis] = (lo[axis] + 1).min(g.nx[axis] - 1);
                        weight *= w[axis];
                    } else {
                        idx[axis] = lo[axis];
                        weight *= 1.0 - w[axis];
                    }
                }
                acc += weight * self.at(ti, g.flat(&idx));
            }
            acc
        };
        let v0 = interp_slice(ti0);
        if ti1 == ti0 {
            v0
        } else {
            (1.0 - wt) * v0 + wt * interp_slice(ti1)
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Parameters of the Zel'dovich-Kompaneets-Barenblatt self-similar
/// solution of the unforced porous medium equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarenblattParams {
    pub m: f64,
    pub mass: f64,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
    /// Normalization fixed by the mass (computed by quadrature at t=1).
    pub a: f64,
}

impl BarenblattParams {
    pub fn new(m: f64, mass: f64, n: usize) -> Result<Self> {
        if m <= 1.0 {
            return Err(Error::InvalidArgument(format!("m must exceed 1, got {m}")));
        }
        if mass <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if n == 0 || n > 2 {
            return Err(Error::InvalidArgument(format!(
                "dimension must be 1 or 2, got {n}"
            )));
        }
        let nf = n as f64;
        let alpha = nf / (nf * (m - 1.0) + 2.0);
        let beta = alpha / nf;
        let k = alpha * (m - 1.0) / (2.0 * m * nf);

        // Profile integral over the unit ball: J = int_{|y|<=1} (1-|y|^2)^{1/(m-1)} dy
        // by midpoint quadrature; then A follows from the homogeneity
        // I(A) = A^{1/(m-1)+n/2} k^{-n/2} J = mass.
        let exponent = 1.0 / (m - 1.0);
        let cells = 4000usize;
        let h = 2.0 / cells as f64;
        let mut j = 0.0;
        match n {
            1 => {
                for i in 0..cells {
                    let y = -1.0 + (i as f64 + 0.5) * h;
                    let r2 = y * y;
                    if r2 < 1.0 {
                        j += (1.0 - r2).powf(exponent) * h;
                    }
                }
            }
            _ => {
                for i in 0..cells {
                    let y0 = -1.0 + (i as f64 + 0.5) * h;
                    for l in 0..cells {
                        let y1 = -1.0 + (l as f64 + 0.5) * h;
                        let r2 = y0 * y0 + y1 * y1;
                        if r2 < 1.0 {
                            j += (1.0 - r2).powf(exponent) * h * h;
                        }
                    }
                }
            }
        }
        let a = (mass * k.powf(nf / 2.0) / j).powf(1.0 / (exponent + nf / 2.0));
        Ok(BarenblattParams {
            m,
            mass,
            n,
            alpha,
            beta,
            k,
            a,
        })
    }

    /// Exact solution value U(t, x) for t > 0.
    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|xi| xi * xi).sum();
        let inner = self.a - self.k * r2 * t.powf(-2.0 * self.beta);
        if inner <= 0.0 {
            0.0
        } else {
            t.powf(-self.alpha) * inner.powf(1.0 / (self.m - 1.0))
        }
    }

    /// Radius of the support of the solution at time t.
    pub fn support_radius(&self, t: f64) -> f64 {
        (self.a / self.k).sqrt() * t.powf(self.beta)
    }
}

/// Build a uniform cell-centered grid.
pub fn make_grid(
    n: usize,
    extents: &[(f64, f64)],
    nx: &[usize],
    t0: f64,
    t1: f64,
    nt: usize,
) -> Result<Grid> {
    if n == 0 || n > 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be 1 or 2, got {n}"
        )));
    }
    if extents.len() != n || nx.len() != n {
        return Err(Error::InvalidArgument(
            "extents/nx length must match the dimension".into(),
        ));
    }
    if nt < 1 {
        return Err(Error::InvalidArgument("nt must be at least 1".into()));
    }
    if t1 <= t0 {
        return Err(Error::InvalidArgument(format!(
            "degenerate time interval [{t0}, {t1}]"
        )));
    }
    let mut dx = Vec::with_capacity(n);
    for axis in 0..n {
        if nx[axis] < 2 {
            return Err(Error::InvalidArgument(format!(
                "nx must be at least 2 on axis {axis}, got {}",
                nx[axis]
            )));
        }
        let len = extents[axis].1 - extents[axis].0;
        if len <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "degenerate extent on axis {axis}: [{}, {}]",
                extents[axis].0, extents[axis].1
            )));
        }
        dx.push(len / nx[axis] as f64);
    }
    Ok(Grid {
        n,
        extents: extents.to_vec(),
        nx: nx.to_vec(),
        t0,
        t1,
        nt,
        dx,
        dt: (t1 - t0) / nt as f64,
    })
}

/// Sample a function at every cell center; exact, no interpolation.
pub fn sample_field<F>(grid: &Grid, name: &str, f: F) -> Result<Field>
where
    F: Fn(f64, &[f64]) -> f64,
{
    let slen = grid.spatial_len();
    let mut values = Vec::with_capacity(grid.time_len() * slen);
    for ti in 0..grid.time_len() {
        let t = grid.time(ti);
        for flat in 0..slen {
            let v = f(t, &grid.center(flat));
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    time_index: ti,
                    cell: flat,
                });
            }
            values.push(v);
        }
    }
    Field::new(grid.clone(), values, name)
}

/// Sample the Barenblatt oracle on a grid whose time interval lies in (0, inf).
pub fn barenblatt_field(grid: &Grid, params: &BarenblattParams) -> Result<Field> {
    if grid.t0 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Barenblatt solution requires t0 > 0, got {}",
            grid.t0
        )));
    }
    if grid.n != params.n {
        return Err(Error::InvalidArgument(
            "grid and Barenblatt dimensions disagree".into(),
        ));
    }
    sample_field(grid, "barenblatt", |t, x| params.value(t, x))
}

/// Pointwise power of a nonnegative field.
pub fn pow_transform(field: &Field, exponent: f64) -> Result<Field> {
    let mut values = Vec::with_capacity(field.values.len());
    for &v in &field.values {
        if v < -TOL_NEG {
            return Err(Error::Domain(format!(
                "negative value {v} beyond tolerance in pow_transform"
            )));
        }
        let v = v.max(0.0);
        values.push(v.powf(exponent));
    }
    Field::new(
        field.grid.clone(),
        values,
        format!("{}^{}", field.name, exponent),
    )
}

/// Write a field as CSV (`t,x[,y],value`) plus a JSON sidecar with the
/// grid descriptor. Floats are written with round-trip decimal formatting.
pub fn save_field(field: &Field, csv_path: &Path, sidecar_path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(csv_path)?);
    match field.grid.n {
        1 => writeln!(w, "t,x,value")?,
        _ => writeln!(w, "t,x,y,value")?,
    }
    for ti in 0..field.grid.time_len() {
        let t = field.grid.time(ti);
        for flat in 0..field.grid.spatial_len() {
            let c = field.grid.center(flat);
            match field.grid.n {
                1 => writeln!(w, "{},{},{}", t, c[0], field.at(ti, flat))?,
                _ => writeln!(w, "{},{},{},{}", t, c[0], c[1], field.at(ti, flat))?,
            }
        }
    }
    w.flush()?;
    let json = serde_json::to_string_pretty(&field.grid)?;
    std::fs::write(sidecar_path, json)?;
    Ok(())
}

/// Read a field back from its CSV and grid sidecar.
pub fn load_field(csv_path: &Path, sidecar_path: &Path, name: &str) -> Result<Field> {
    let grid: Grid = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
    let r = BufReader::new(std::fs::File::open(csv_path)?);
    let mut values = Vec::with_capacity(grid.time_len() * grid.spatial_len());
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            continue; // header
        }
        let last = line.rsplit(',').next().ok_or_else(|| {
            Error::InvalidArgument(format!("malformed CSV line {}", i + 1))
        })?;
        let v: f64 = last.parse().map_err(|e| {
            Error::InvalidArgument(format!("bad value on CSV line {}: {e}", i + 1))
        })?;
        values.push(v);
    }
    Field::new(grid, values, name)
}
