//! Intrinsic parabolic cylinders, sup/oscillation statistics, the scale
//! transform, the unit rescaling, and the exponent bookkeeping
//! (sigma0, q', p*, q*).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Backward-in-time intrinsic cylinder Q_{rho,M}(t0, x0) whose time
/// length is rho^2 / M^{1-1/m}; the optional `theta0` selects the
/// shortened variant of length (theta0/2) * rho^2 / M^{1-1/m}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntrinsicCylinder {
    pub t0: f64,
    pub x0: Vec<f64>,
    pub rho: f64,
    #[serde(rename = "M")]
    pub m_scale: f64,
    pub m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
}

impl IntrinsicCylinder {
    /// Full intrinsic time length rho^2 / M^{1-1/m}.
    pub fn full_time_length(&self) -> f64 {
        self.rho * self.rho / self.m_scale.powf(1.0 - 1.0 / self.m)
    }

    /// Time length of this cylinder (shortened when theta0 is set).
    pub fn time_length(&self) -> f64 {
        match self.theta0 {
            Some(theta0) => 0.5 * theta0 * self.full_time_length(),
            None => self.full_time_length(),
        }
    }

    /// The theta0-shortened variant of this cylinder.
    pub fn shortened(&self, theta0: f64) -> IntrinsicCylinder {
        IntrinsicCylinder {
            theta0: Some(theta0),
            ..self.clone()
        }
    }

    /// Same cylinder with a different radius.
    pub fn with_rho(&self, rho: f64) -> IntrinsicCylinder {
        IntrinsicCylinder { rho, ..self.clone() }
    }

    /// Whether a spatial cell center lies in the open ball B_rho(x0).
    pub fn contains_point(&self, x: &[f64]) -> bool {
        let r2: f64 = x
            .iter()
            .zip(self.x0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        r2 < self.rho * self.rho
    }

    /// Flattened indices of grid cells whose center lies in B_rho(x0).
    pub fn ball_cells(&self, grid: &Grid) -> Vec<usize> {
        (0..grid.spatial_len())
            .filter(|&flat| self.contains_point(&grid.center(flat)))
            .collect()
    }

    /// Grid time indices in the backward interval (t0 - len, t0].
    pub fn time_indices(&self, grid: &Grid) -> Vec<usize> {
        let len = self.time_length();
        let eps = 1e-9 * grid.dt;
        (0..grid.time_len())
            .filter(|&ti| {
                let t = grid.time(ti);
                t > self.t0 - len + eps && t <= self.t0 + eps
            })
            .collect()
    }

    /// Validate that the cylinder (with a margin) sits inside the grid.
    pub fn check_in_domain(&self, grid: &Grid, margin: f64) -> Result<()> {
        for axis in 0..grid.n {
            let (lo, hi) = grid.extents[axis];
            if self.x0[axis] - self.rho - margin < lo || self.x0[axis] + self.rho + margin > hi {
                return Err(Error::OutOfDomain(format!(
                    "ball of radius {} (margin {margin}) around {:?} exits axis {axis} extent [{lo}, {hi}]",
                    self.rho, self.x0
                )));
            }
        }
        let len = self.time_length();
        if self.t0 - len < grid.t0 - 1e-9 * grid.dt || self.t0 > grid.t1 + 1e-9 * grid.dt {
            return Err(Error::OutOfDomain(format!(
                "time interval ({}, {}] exits grid time range [{}, {}]",
                self.t0 - len,
                self.t0,
                grid.t0,
                grid.t1
            )));
        }
        Ok(())
    }

    /// Discrete space-time measure of the cylinder on a grid (cell count
    /// times cell measure).
    pub fn discrete_measure(&self, grid: &Grid) -> f64 {
        let cells = self.ball_cells(grid).len();
        let slices = self.time_indices(grid).len();
        cells as f64 * slices as f64 * grid.cell_measure()
    }

    /// Index nesting: every (time, cell) index of `self` also belongs to
    /// `other` on the same grid.
    pub fn nested_in(&self, other: &IntrinsicCylinder, grid: &Grid) -> bool {
        let outer_cells: std::collections::HashSet<usize> =
            other.ball_cells(grid).into_iter().collect();
        let outer_times: std::collections::HashSet<usize> =
            other.time_indices(grid).into_iter().collect();
        self.ball_cells(grid).iter().all(|c| outer_cells.contains(c))
            && self.time_indices(grid).iter().all(|t| outer_times.contains(t))
    }
}

/// Construct a cylinder, validating the geometric parameters.
pub fn make_cylinder(
    t0: f64,
    x0: &[f64],
    rho: f64,
    m_scale: f64,
    m: f64,
    theta0: Option<f64>,
) -> Result<IntrinsicCylinder> {
    if rho <= 0.0 || m_scale <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rho and M must be positive (rho={rho}, M={m_scale})"
        )));
    }
    if m <= 1.0 {
        return Err(Error::InvalidArgument(format!("m must exceed 1, got {m}")));
    }
    if let Some(theta0) = theta0 {
        if !(0.0 < theta0 && theta0 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "theta0 must lie in (0,1), got {theta0}"
            )));
        }
    }
    Ok(IntrinsicCylinder {
        t0,
        x0: x0.to_vec(),
        rho,
        m_scale,
        m,
        theta0,
    })
}

/// Approximated supremum/oscillation bookkeeping for a cylinder,
/// constrained by sup <= M <= 3 sup and (3/4) omega <= osc <= omega.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscStats {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub osc: f64,
    pub omega: f64,
    #[serde(rename = "M")]
    pub m_scale: f64,
}

impl OscStats {
    /// Override the (omega, M) choices within the admissible windows.
    pub fn with_choices(&self, omega: f64, m_scale: f64) -> Result<OscStats> {
        if !(self.mu_plus <= m_scale && m_scale <= 3.0 * self.mu_plus) {
            return Err(Error::InvalidArgument(format!(
                "M={m_scale} outside [sup, 3 sup] = [{}, {}]",
                self.mu_plus,
                3.0 * self.mu_plus
            )));
        }
        if !(0.75 * omega <= self.osc && self.osc <= omega) {
            return Err(Error::InvalidArgument(format!(
                "omega={omega} violates (3/4) omega <= osc <= omega with osc={}",
                self.osc
            )));
        }
        Ok(OscStats {
            omega,
            m_scale,
            ..self.clone()
        })
    }
}

/// Discrete max/min statistics of a field over a cylinder; the default
/// choices are omega = osc and M = sup.
pub fn osc_stats(field: &Field, cyl: &IntrinsicCylinder) -> Result<OscStats> {
    let cells = cyl.ball_cells(&field.grid);
    let times = cyl.time_indices(&field.grid);
    if cells.is_empty() || times.is_empty() {
        return Err(Error::OutOfDomain(
            "cylinder contains no grid cells".into(),
        ));
    }
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for &ti in &times {
        for &c in &cells {
            let v = field.at(ti, c);
            hi = hi.max(v);
            lo = lo.min(v);
        }
    }
    if hi <= 0.0 {
        return Err(Error::Degenerate(
            "sup over cylinder is zero; intrinsic time length undefined".into(),
        ));
    }
    Ok(OscStats {
        mu_plus: hi,
        mu_minus: lo,
        osc: hi - lo,
        omega: hi - lo,
        m_scale: hi,
    })
}

/// Scale transform: values divided by M, time axis relabeled by
/// s = M^{m-1} t (no resampling).
pub fn scale_transform(field: &Field, m_scale: f64, m: f64) -> Result<Field> {
    if m_scale <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "M must be positive, got {m_scale}"
        )));
    }
    let factor = m_scale.powf(m - 1.0);
    let mut grid = field.grid.clone();
    grid.t0 *= factor;
    grid.t1 *= factor;
    grid.dt *= factor;
    let values = field.values.iter().map(|v| v / m_scale).collect();
    Field::new(grid, values, format!("{}_scaled", field.name))
}

/// Rescale a cylinder to the unit cylinder Q_1: s = (t - t0) M^{1-1/m} / rho^2,
/// y = (x - x0)/rho, values divided by M; resampled by multilinear
/// interpolation.
pub fn rescale_to_unit(field: &Field, cyl: &IntrinsicCylinder) -> Result<Field> {
    cyl.check_in_domain(&field.grid, 0.0)?;
    let g = &field.grid;
    let len = cyl.full_time_length();
    let nt = ((len / g.dt).ceil() as usize).max(1);
    let nx: Vec<usize> = (0..g.n)
        .map(|axis| ((2.0 * cyl.rho / g.dx[axis]).ceil() as usize).max(4))
        .collect();
    let extents: Vec<(f64, f64)> = (0..g.n).map(|_| (-1.0, 1.0)).collect();
    let unit = crate::grid::make_grid(g.n, &extents, &nx, -1.0, 0.0, nt)?;

    let slen = unit.spatial_len();
    let mut values = Vec::with_capacity(unit.time_len() * slen);
    for ti in 0..unit.time_len() {
        let s = unit.time(ti);
        let t = cyl.t0 + s * len;
        for flat in 0..slen {
            let y = unit.center(flat);
            let x: Vec<f64> = y
                .iter()
                .zip(cyl.x0.iter())
                .map(|(yi, xi)| xi + cyl.rho * yi)
                .collect();
            values.push(field.interpolate(t, &x) / cyl.m_scale);
        }
    }
    Field::new(unit, values, format!("{}_unit", field.name))
}

/// Forcing exponents and the derived Sobolev bookkeeping of the theory.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExponentSet {
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub sigma0: f64,
    pub q_prime: f64,
    pub p_star: f64,
    pub q_star: f64,
}

/// Derive sigma0 = 1 - 2/q - n/p, q' with 1/2 = 1/q + 1/q', and the
/// pair (p*, q*) with 2/q' = (2/q*)(1 + 2 sigma0/n) and
/// q'(1/2 - 1/p) = q*/p*.
pub fn derive_exponents(p: f64, q: f64, n: usize) -> Result<ExponentSet> {
    if p <= 2.0 || q <= 2.0 {
        return Err(Error::InvalidArgument(format!(
            "p and q must exceed 2 (p={p}, q={q})"
        )));
    }
    let nf = n as f64;
    let sigma0 = 1.0 - 2.0 / q - nf / p;
    if sigma0 <= 0.0 {
        return Err(Error::HypothesisViolation(format!(
            "2/q + n/p = {} >= 1; the standing assumption requires it below 1",
            2.0 / q + nf / p
        )));
    }
    let q_prime = 2.0 * q / (q - 2.0);
    let q_star = q_prime * (1.0 + 2.0 * sigma0 / nf);
    let p_star = q_star / (q_prime * (0.5 - 1.0 / p));
    Ok(ExponentSet {
        p,
        q,
        n,
        sigma0,
        q_prime,
        p_star,
        q_star,
    })
}
