//! Distribution functions, weak-Lp (Marcinkiewicz) norms, mixed
//! space-time norms L^q(L^p_w), and the forcing functional h(rho, M, omega).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::IntrinsicCylinder;
use crate::grid::Field;
use crate::solver::ForcingPair;

/// Specification of a mixed space-time norm.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormSpec {
    /// Spatial exponent, > 1 when `weak` is set.
    pub p: f64,
    /// Temporal exponent, >= 1; `f64::INFINITY` selects the sup in time.
    pub q: f64,
    /// Weak (Marcinkiewicz) inner norm instead of the strong L^p norm.
    pub weak: bool,
}

/// Mixed weak norms of the forcing over a cylinder and the functional
/// h = ||f||^2_{L^q(L^p_w)} + omega * ||g||_{L^{q/2}(L^{p/2}_w)}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForcingNorms {
    pub p: f64,
    pub q: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    pub h: f64,
}

/// Distribution function: measure of {|f| > lambda} on a slice of cells
/// sharing one cell volume. Right-continuous and nonincreasing in lambda.
pub fn distribution_function(values: &[f64], cell_volume: f64, lambda: f64) -> f64 {
    values.iter().filter(|v| v.abs() > lambda).count() as f64 * cell_volume
}

/// Discrete weak-Lp norm: the sup over candidate compacts is attained on
/// descending-sorted prefix sets of |f| (bathtub principle), so prefixes
/// suffice.
pub fn weak_lp_norm(values: &[f64], cell_volume: f64, p: f64) -> Result<f64> {
    if p <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "weak norm requires p > 1, got {p}"
        )));
    }
    let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut best: f64 = 0.0;
    let mut prefix = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        prefix += v;
        let measure = (k + 1) as f64 * cell_volume;
        let cand = prefix * cell_volume / measure.powf(1.0 - 1.0 / p);
        best = best.max(cand);
    }
    Ok(best)
}

/// Strong discrete L^p norm of a slice.
pub fn strong_lp_norm(values: &[f64], cell_volume: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    (values
        .iter()
        .map(|v| v.abs().powf(p) * cell_volume)
        .sum::<f64>())
    .powf(1.0 / p)
}

/// The Marcinkiewicz sandwich: S = sup_lambda lambda * mu(lambda)^{1/p}
/// together with the two-sided comparison against the weak norm,
/// ((p-1)/p^{1+1/p}) ||f||_w <= S <= ||f||_w.
pub fn marcinkiewicz_bounds(
    values: &[f64],
    cell_volume: f64,
    p: f64,
) -> Result<(bool, bool, f64)> {
    if p <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Marcinkiewicz bounds require p > 1, got {p}"
        )));
    }
    // The sup is attained just below each attained value of |f|.
    let mut sup: f64 = 0.0;
    for v in values {
        let a = v.abs();
        if a == 0.0 {
            continue;
        }
        let lambda = a * (1.0 - 1e-9);
        let mu = distribution_function(values, cell_volume, lambda);
        sup = sup.max(lambda * mu.powf(1.0 / p));
    }
    let weak = weak_lp_norm(values, cell_volume, p)?;
    let lower = (p - 1.0) / p.powf(1.0 + 1.0 / p) * weak;
    Ok((lower <= sup, sup <= weak, sup))
}

/// Mixed space-time norm of a field over a cylinder: the inner (weak or
/// strong) spatial norm per time slice, then a rectangle-rule L^q norm
/// in time (q = infinity gives the max over slices).
pub fn mixed_norm(field: &Field, cyl: &IntrinsicCylinder, spec: &NormSpec) -> Result<f64> {
    cyl.check_in_domain(&field.grid, 0.0)?;
    let cells = cyl.ball_cells(&field.grid);
    let times = cyl.time_indices(&field.grid);
    if cells.is_empty() || times.is_empty() {
        return Err(Error::OutOfDomain("cylinder contains no grid cells".into()));
    }
    let vol = field.grid.cell_volume();
    let mut inner = Vec::with_capacity(times.len());
    for &ti in &times {
        let slice: Vec<f64> = cells.iter().map(|&c| field.at(ti, c)).collect();
        let norm = if spec.weak {
            weak_lp_norm(&slice, vol, spec.p)?
        } else {
            strong_lp_norm(&slice, vol, spec.p)
        };
        inner.push(norm);
    }
    if spec.q.is_infinite() {
        return Ok(inner.into_iter().fold(0.0, f64::max));
    }
    if spec.q < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "temporal exponent must be >= 1, got {}",
            spec.q
        )));
    }
    let dt = field.grid.dt;
    let sum: f64 = inner.iter().map(|n| n.powf(spec.q) * dt).sum();
    Ok(sum.powf(1.0 / spec.q))
}

/// The forcing functional h(rho, M, omega) over a cylinder, with |f| the
/// per-cell Euclidean norm of the components.
pub fn forcing_h(
    forcing: &ForcingPair,
    cyl: &IntrinsicCylinder,
    p: f64,
    q: f64,
    omega: f64,
) -> Result<ForcingNorms> {
    if p <= 2.0 || q <= 2.0 {
        return Err(Error::HypothesisViolation(format!(
            "forcing exponents must exceed 2 (p={p}, q={q})"
        )));
    }
    if omega < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "omega must be nonnegative, got {omega}"
        )));
    }
    let f_mag = forcing.f_magnitude()?;
    let norm_f = mixed_norm(
        &f_mag,
        cyl,
        &NormSpec {
            p,
            q,
            weak: true,
        },
    )?;
    let norm_g = mixed_norm(
        &forcing.g,
        cyl,
        &NormSpec {
            p: p / 2.0,
            q: q / 2.0,
            weak: true,
        },
    )?;
    Ok(ForcingNorms {
        p,
        q,
        norm_f,
        norm_g,
        h: norm_f * norm_f + omega * norm_g,
    })
}
