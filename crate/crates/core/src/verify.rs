//! Standalone numerical checks: the two-sequence recursive convergence
//! bound, the space-time interpolation inequality, and the level-set
//! Poincaré inequality on a ball.

use serde::{Deserialize, Serialize};

use crate::diffops::{gradient_axis, gradient_magnitude};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::norms::strong_lp_norm;

/// Parameters of the recursive bound together with its derived
/// threshold: d = min{delta, eps/(1+eps)} and
/// lambda = min{(2C)^{-1/delta} b^{-1/(delta d)},
///              (2C)^{-(1+eps)/eps} b^{-1/(eps d)}}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RecursionParams {
    pub c: f64,
    pub b: f64,
    pub delta: f64,
    pub eps: f64,
    pub d: f64,
    pub lambda: f64,
}

impl RecursionParams {
    pub fn new(c: f64, b: f64, delta: f64, eps: f64) -> Result<Self> {
        if c <= 0.0 || delta <= 0.0 || eps <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "C, delta, eps must be positive (C={c}, delta={delta}, eps={eps})"
            )));
        }
        if b < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "b must be at least 1, got {b}"
            )));
        }
        let d = delta.min(eps / (1.0 + eps));
        let lambda = ((2.0 * c).powf(-1.0 / delta) * b.powf(-1.0 / (delta * d)))
            .min((2.0 * c).powf(-(1.0 + eps) / eps) * b.powf(-1.0 / (eps * d)));
        Ok(RecursionParams {
            c,
            b,
            delta,
            eps,
            d,
            lambda,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecursionTrace {
    pub params: RecursionParams,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// Step at which the iteration overflowed, when it did.
    pub diverged_at: Option<usize>,
    /// Whether the decay bound held at every computed step (meaningful
    /// when the initial thresholds were satisfied).
    pub bound_ok: bool,
    pub thresholds_met: bool,
}

/// Iterate the worst case of the recursion with equality:
/// Y_{n+1} = C b^n (Y_n^{1+delta} + Y_n^delta Z_n^{1+eps}),
/// Z_{n+1} = C b^n (Y_n + Z_n^{1+eps}),
/// and check Y_n <= lambda b^{-n/d}, Z_n <= (lambda b^{-n/d})^{1/(1+eps)}.
pub fn recursion_lemma(
    params: &RecursionParams,
    y0: f64,
    z0: f64,
    n_steps: usize,
) -> Result<RecursionTrace> {
    if y0 <= 0.0 || z0 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Y0 and Z0 must be positive (Y0={y0}, Z0={z0})"
        )));
    }
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    let thresholds_met =
        y0 <= params.lambda && z0 <= params.lambda.powf(1.0 / (1.0 + params.eps));
    let mut y = vec![y0];
    let mut z = vec![z0];
    let mut bound_ok = true;
    let mut diverged_at = None;
    for n in 0..=n_steps {
        let decay = params.lambda * params.b.powf(-(n as f64) / params.d);
        if y[n] > decay || z[n] > decay.powf(1.0 / (1.0 + params.eps)) {
            bound_ok = false;
        }
        if n == n_steps {
            break;
        }
        let bn = params.b.powf(n as f64);
        let yn = y[n];
        let zn = z[n];
        let y_next = params.c * bn * (yn.powf(1.0 + params.delta)
            + yn.powf(params.delta) * zn.powf(1.0 + params.eps));
        let z_next = params.c * bn * (yn + zn.powf(1.0 + params.eps));
        if !y_next.is_finite() || !z_next.is_finite() {
            diverged_at = Some(n + 1);
            bound_ok = false;
            break;
        }
        y.push(y_next);
        z.push(z_next);
    }
    Ok(RecursionTrace {
        params: *params,
        y,
        z,
        diverged_at,
        bound_ok,
        thresholds_met,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CheckReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Set when the denominator degenerates (level set fills the ball).
    pub degenerate: bool,
}

/// Interpolation inequality on a space-time field compactly supported in
/// space: ||f||_{L^q(L^p)} against ||f||_{L^infty(L^2)} + ||grad f||_{L^2},
/// for exponents with 2/q + n/p = n/2 (the pair q=2, p=infinity is
/// rejected in dimension 2).
pub fn ladyzhenskaya_check(field: &Field, p: f64, q: f64) -> Result<CheckReport> {
    let grid = &field.grid;
    let n = grid.n as f64;
    if grid.n == 2 && q == 2.0 && p.is_infinite() {
        return Err(Error::InvalidArgument(
            "the pair q=2, p=infinity is excluded in dimension 2".into(),
        ));
    }
    let identity = if p.is_infinite() {
        2.0 / q
    } else {
        2.0 / q + n / p
    };
    if (identity - n / 2.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "exponents violate 2/q + n/p = n/2: got {identity}"
        )));
    }
    let vol = grid.cell_volume();
    let slen = grid.spatial_len();
    let mut lhs_acc = 0.0;
    let mut sup_l2: f64 = 0.0;
    let mut grad_l2_sq = 0.0;
    for ti in 0..grid.time_len() {
        let slice = field.slice(ti);
        let lp = strong_lp_norm(slice, vol, p);
        lhs_acc += lp.powf(q) * grid.dt;
        sup_l2 = sup_l2.max(strong_lp_norm(slice, vol, 2.0));
        let grad = gradient_magnitude(slice, grid);
        grad_l2_sq += grad.iter().map(|g| g * g * vol).sum::<f64>() * grid.dt;
        let _ = slen;
    }
    let lhs = lhs_acc.powf(1.0 / q);
    let rhs = sup_l2 + grad_l2_sq.sqrt();
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(CheckReport {
        lhs,
        rhs,
        ratio,
        degenerate: false,
    })
}

/// Level-set Poincaré inequality on one spatial slice over a ball:
/// (l-k) m_n({f > l}) against
/// rho^{n+1} / (m_n(B_rho) - m_n({f > k})) * int_{k < f <= l} |grad f|.
pub fn poincare_levelset_check(
    slice: &[f64],
    grid: &crate::grid::Grid,
    cyl: &crate::geometry::IntrinsicCylinder,
    k: f64,
    l: f64,
) -> Result<CheckReport> {
    if l <= k {
        return Err(Error::InvalidArgument(format!(
            "need l > k, got k={k}, l={l}"
        )));
    }
    if k < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "levels must be nonnegative, got k={k}"
        )));
    }
    if slice.len() != grid.spatial_len() {
        return Err(Error::InvalidArgument(
            "slice length does not match the grid".into(),
        ));
    }
    if slice.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument(
            "the inequality applies to nonnegative functions".into(),
        ));
    }
    let vol = grid.cell_volume();
    let cells = cyl.ball_cells(grid);
    let ball = cells.len() as f64 * vol;
    let above_l = cells.iter().filter(|&&c| slice[c] > l).count() as f64 * vol;
    let above_k = cells.iter().filter(|&&c| slice[c] > k).count() as f64 * vol;
    let lhs = (l - k) * above_l;
    if above_k >= ball {
        return Ok(CheckReport {
            lhs,
            rhs: f64::INFINITY,
            ratio: 0.0,
            degenerate: true,
        });
    }
    let mut grad_mag = vec![0.0; slice.len()];
    for axis in 0..grid.n {
        let g = gradient_axis(slice, grid, axis);
        for (s, gi) in grad_mag.iter_mut().zip(g.iter()) {
            *s += gi * gi;
        }
    }
    let band_integral: f64 = cells
        .iter()
        .filter(|&&c| slice[c] > k && slice[c] <= l)
        .map(|&c| grad_mag[c].sqrt() * vol)
        .sum();
    let rhs = cyl.rho.powi(grid.n as i32 + 1) / (ball - above_k) * band_integral;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(CheckReport {
        lhs,
        rhs,
        ratio,
        degenerate: false,
    })
}
