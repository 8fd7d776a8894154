//! Explicit conservative time stepping for the forced porous medium
//! equation and the discrete weak-form residual.

use serde::{Deserialize, Serialize};

use crate::diffops::{gradient_axis, time_derivative};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, TOL_NEG};

const EPS_GUARD: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    ZeroFlux,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub m: f64,
    pub boundary: Boundary,
    #[serde(default = "default_cfl_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Optional fixed step; must not exceed the CFL step at any state.
    #[serde(default)]
    pub fixed_dt: Option<f64>,
    /// Upper cap on the step returned by [`cfl_dt`].
    #[serde(default)]
    pub max_dt: Option<f64>,
}

fn default_cfl_safety() -> f64 {
    0.9
}

fn default_max_steps() -> usize {
    10_000_000
}

impl SolverConfig {
    pub fn new(m: f64, boundary: Boundary) -> Result<Self> {
        if m <= 1.0 {
            return Err(Error::InvalidArgument(format!("m must exceed 1, got {m}")));
        }
        Ok(SolverConfig {
            m,
            boundary,
            cfl_safety: default_cfl_safety(),
            max_steps: default_max_steps(),
            fixed_dt: None,
            max_dt: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.m <= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "m must exceed 1, got {}",
                self.m
            )));
        }
        if !(0.0 < self.cfl_safety && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cfl_safety must lie in (0,1], got {}",
                self.cfl_safety
            )));
        }
        Ok(())
    }
}

/// Flux forcing f (one component per spatial axis, possibly empty) and
/// source g on a shared grid.
#[derive(Debug, Clone)]
pub struct ForcingPair {
    pub f: Vec<Field>,
    pub g: Field,
}

impl ForcingPair {
    pub fn new(f: Vec<Field>, g: Field) -> Result<Self> {
        for comp in &f {
            if comp.grid != g.grid {
                return Err(Error::InvalidArgument(
                    "forcing components must share one grid".into(),
                ));
            }
            if comp.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(
                    "forcing component contains non-finite values".into(),
                ));
            }
        }
        if g.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "source field contains non-finite values".into(),
            ));
        }
        Ok(ForcingPair { f, g })
    }

    pub fn zero(grid: &Grid) -> Result<Self> {
        Ok(ForcingPair {
            f: Vec::new(),
            g: Field::zeros(grid.clone(), "g"),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.g.grid
    }

    pub fn is_zero(&self) -> bool {
        self.f.iter().all(|c| c.values.iter().all(|&v| v == 0.0))
            && self.g.values.iter().all(|&v| v == 0.0)
    }

    /// Per-cell Euclidean magnitude of the flux components.
    pub fn f_magnitude(&self) -> Result<Field> {
        let grid = self.g.grid.clone();
        if self.f.is_empty() {
            return Ok(Field::zeros(grid, "|f|"));
        }
        let len = self.f[0].values.len();
        let mut mag = vec![0.0; len];
        for comp in &self.f {
            for (m, v) in mag.iter_mut().zip(comp.values.iter()) {
                *m += v * v;
            }
        }
        Field::new(grid, mag.iter().map(|s| s.sqrt()).collect(), "|f|")
    }
}

/// CFL-stable explicit step for the diffusivity m u^{m-1}:
/// dt = cfl_safety * min(dx^2) / (2 n m max(u)^{m-1} + eps_guard),
/// capped at `config.max_dt` when present.
pub fn cfl_dt(state: &[f64], config: &SolverConfig, grid: &Grid) -> f64 {
    let max_u = state.iter().cloned().fold(0.0_f64, f64::max);
    let min_dx2 = grid
        .dx
        .iter()
        .map(|h| h * h)
        .fold(f64::INFINITY, f64::min);
    let denom = 2.0 * grid.n as f64 * config.m * max_u.powf(config.m - 1.0) + EPS_GUARD;
    let dt = config.cfl_safety * min_dx2 / denom;
    match config.max_dt {
        Some(cap) => dt.min(cap),
        None => dt,
    }
}

fn face_pairs_1d(nx: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    // faces as (left cell, right cell); for zero-flux only interior faces
    let mut faces: Vec<(usize, usize)> = (0..nx - 1).map(|i| (i, i + 1)).collect();
    if boundary == Boundary::Periodic {
        faces.push((nx - 1, 0));
    }
    faces
}

/// One explicit flux-form update of the state in place.
fn step(
    state: &mut [f64],
    grid: &Grid,
    config: &SolverConfig,
    forcing: &ForcingPair,
    forcing_ti: usize,
    dt: f64,
) {
    let m = config.m;
    let w: Vec<f64> = state.iter().map(|u| u.max(0.0).powf(m)).collect();
    let mut delta = vec![0.0; state.len()];

    match grid.n {
        1 => {
            let nx = grid.nx[0];
            let h = grid.dx[0];
            let fx = forcing.f.first();
            for (l, r) in face_pairs_1d(nx, config.boundary) {
                let mut flux = (w[r] - w[l]) / h;
                if let Some(fc) = fx {
                    flux += 0.5 * (fc.at(forcing_ti, l) + fc.at(forcing_ti, r));
                }
                delta[l] += flux / h;
                delta[r] -= flux / h;
            }
        }
        _ => {
            let (nx0, nx1) = (grid.nx[0], grid.nx[1]);
            for axis in 0..2 {
                let h = grid.dx[axis];
                let fc = forcing.f.get(axis);
                let (outer, inner) = if axis == 0 { (nx1, nx0) } else { (nx0, nx1) };
                for o in 0..outer {
                    for (li, ri) in face_pairs_1d(inner, config.boundary) {
                        let (l, r) = if axis == 0 {
                            (li + nx0 * o, ri + nx0 * o)
                        } else {
                            (o + nx0 * li, o + nx0 * ri)
                        };
                        let mut flux = (w[r] - w[l]) / h;
                        if let Some(fc) = fc {
                            flux += 0.5 * (fc.at(forcing_ti, l) + fc.at(forcing_ti, r));
                        }
                        delta[l] += flux / h;
                        delta[r] -= flux / h;
                    }
                }
            }
        }
    }

    for (i, u) in state.iter_mut().enumerate() {
        *u += dt * (delta[i] + forcing.g.at(forcing_ti, i));
    }
}

/// Evolve an initial slice through `[t_start, t_end]` (both aligned with
/// grid times), recording the state at every grid time in the span.
///
/// The scheme is explicit and flux-form: constants are exact steady
/// states of the unforced problem and discrete mass is conserved with
/// periodic or zero-flux boundaries.
pub fn evolve(
    u0: &[f64],
    forcing: &ForcingPair,
    config: &SolverConfig,
    t_start: f64,
    t_end: f64,
) -> Result<Field> {
    config.validate()?;
    let grid = forcing.grid();
    if u0.len() != grid.spatial_len() {
        return Err(Error::InvalidArgument(
            "initial slice length does not match the grid".into(),
        ));
    }
    if u0.iter().any(|&v| v < -TOL_NEG) {
        return Err(Error::InvalidArgument(
            "initial slice has negative values beyond tolerance".into(),
        ));
    }
    let i_start = grid.time_index(t_start)?;
    let i_end = grid.time_index(t_end)?;
    if i_end <= i_start {
        return Err(Error::InvalidArgument(format!(
            "empty time span [{t_start}, {t_end}]"
        )));
    }

    let out_grid = Grid {
        t0: grid.time(i_start),
        t1: grid.time(i_end),
        nt: i_end - i_start,
        ..grid.clone()
    };
    let slen = grid.spatial_len();
    let mut out = Vec::with_capacity(out_grid.time_len() * slen);
    let mut state: Vec<f64> = u0.iter().map(|&v| v.max(0.0)).collect();
    out.extend_from_slice(&state);

    let mut total_steps = 0usize;
    for slice_i in i_start..i_end {
        let slice_t0 = grid.time(slice_i);
        let slice_t1 = grid.time(slice_i + 1);
        let mut t = slice_t0;
        while t < slice_t1 - 1e-12 * grid.dt {
            let stable = cfl_dt(&state, config, grid);
            let dt = match config.fixed_dt {
                Some(fixed) => {
                    if fixed > stable {
                        return Err(Error::InvalidArgument(format!(
                            "requested dt {fixed} exceeds the CFL step {stable}"
                        )));
                    }
                    fixed.min(slice_t1 - t)
                }
                None => stable.min(slice_t1 - t),
            };
            step(&mut state, grid, config, forcing, slice_i, dt);
            t += dt;
            total_steps += 1;
            if total_steps > config.max_steps {
                return Err(Error::InvalidArgument(format!(
                    "step cap {} exceeded at t = {t}",
                    config.max_steps
                )));
            }
            for (cell, u) in state.iter_mut().enumerate() {
                if *u < -TOL_NEG {
                    return Err(Error::SchemeFailure {
                        step: total_steps,
                        cell,
                        value: *u,
                    });
                }
                if *u < 0.0 {
                    *u = 0.0;
                }
            }
        }
        out.extend_from_slice(&state);
    }
    Field::new(out_grid, out, "u")
}

/// Discrete weak-form residual of the definition of a weak solution at
/// time `t`: all space integrals by midpoint rule on cell centers, time
/// integrals by the trapezoid rule on slices, gradients by centered
/// differences.
pub fn weak_form_residual(
    u: &Field,
    u0: &[f64],
    forcing: &ForcingPair,
    phi: &Field,
    t: f64,
    m: f64,
) -> Result<f64> {
    let grid = &u.grid;
    if phi.grid != *grid {
        return Err(Error::InvalidArgument(
            "test function must live on the solution grid".into(),
        ));
    }
    // compact support: the boundary ring of cells must be zero
    for ti in 0..grid.time_len() {
        for flat in 0..grid.spatial_len() {
            let idx = grid.unflatten(flat);
            let on_ring = (0..grid.n).any(|a| idx[a] == 0 || idx[a] == grid.nx[a] - 1);
            if on_ring && phi.at(ti, flat) != 0.0 {
                return Err(Error::InvalidArgument(
                    "test function is nonzero on the boundary ring".into(),
                ));
            }
        }
    }
    let it = grid.time_index(t)?;
    let vol = grid.cell_volume();
    let slen = grid.spatial_len();

    let inner = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>() * vol
    };

    // boundary terms
    let mut res = inner(u.slice(it), phi.slice(it)) - inner(u0, phi.slice(0));

    // time integrals from the first slice to t by trapezoid rule
    let dphi_dt = time_derivative(&phi.values, grid);
    let mut time_terms = vec![0.0; it + 1];
    for (ti, term) in time_terms.iter_mut().enumerate() {
        let u_slice = u.slice(ti);
        let phi_slice = phi.slice(ti);
        let dphi_slice = &dphi_dt[ti * slen..(ti + 1) * slen];

        // -int u d(phi)/dt
        let mut v = -inner(u_slice, dphi_slice);

        // + int grad(u^m) . grad(phi)
        let w: Vec<f64> = u_slice.iter().map(|x| x.max(0.0).powf(m)).collect();
        for axis in 0..grid.n {
            let gw = gradient_axis(&w, grid, axis);
            let gphi = gradient_axis(phi_slice, grid, axis);
            v += inner(&gw, &gphi);
        }

        // + int f . grad(phi) - int g phi
        for (axis, comp) in forcing.f.iter().enumerate() {
            let gphi = gradient_axis(phi_slice, grid, axis);
            let fvals: Vec<f64> = (0..slen).map(|c| comp.at(ti, c)).collect();
            v += inner(&fvals, &gphi);
        }
        let gvals: Vec<f64> = (0..slen).map(|c| forcing.g.at(ti, c)).collect();
        v -= inner(&gvals, phi_slice);

        *term = v;
    }
    let mut integral = 0.0;
    for ti in 0..it {
        integral += 0.5 * (time_terms[ti] + time_terms[ti + 1]) * grid.dt;
    }
    res += integral;
    Ok(res)
}
