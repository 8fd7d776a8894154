//! Level-set measures, the two-sided alternative classifier, truncation
//! energy (Caccioppoli) residuals, the shrinking-level iteration, slice
//! diagnostics, the oscillation cascade, and the Hölder-exponent fit.

use serde::{Deserialize, Serialize};

use crate::diffops::gradient_magnitude;
use crate::error::{Error, Result};
use crate::geometry::{osc_stats, ExponentSet, IntrinsicCylinder, OscStats};
use crate::grid::Field;
use crate::norms::{forcing_h, ForcingNorms};
use crate::solver::ForcingPair;

/// Convergence threshold for the shrinking-level iteration: the grid
/// floors the measure fraction at one cell anyway.
pub const Y_CONVERGED: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Below,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alternative {
    First,
    Second,
}

/// Space-time measure of the sub/super-level set within a cylinder:
/// exact cell count times the cell measure (strict inequality).
pub fn levelset_measure(field: &Field, cyl: &IntrinsicCylinder, k: f64, side: Side) -> f64 {
    let grid = &field.grid;
    let cells = cyl.ball_cells(grid);
    let times = cyl.time_indices(grid);
    let mut count = 0usize;
    for &ti in &times {
        for &c in &cells {
            let v = field.at(ti, c);
            let hit = match side {
                Side::Below => v < k,
                Side::Above => v > k,
            };
            if hit {
                count += 1;
            }
        }
    }
    count as f64 * grid.cell_measure()
}

/// Spatial measure of the level set on one time slice of a cylinder.
pub fn slice_levelset_measure(
    field: &Field,
    cyl: &IntrinsicCylinder,
    ti: usize,
    k: f64,
    side: Side,
) -> f64 {
    let grid = &field.grid;
    let count = cyl
        .ball_cells(grid)
        .into_iter()
        .filter(|&c| {
            let v = field.at(ti, c);
            match side {
                Side::Below => v < k,
                Side::Above => v > k,
            }
        })
        .count();
    count as f64 * grid.cell_volume()
}

/// Two-sided alternative: First iff the sub-level fraction at
/// mu_minus + omega/2 is at most theta0 (inclusive). Returns the
/// classification together with the measured fraction.
pub fn alternative_classify(
    field: &Field,
    cyl: &IntrinsicCylinder,
    stats: &OscStats,
    theta0: f64,
) -> Result<(Alternative, f64)> {
    if stats.omega <= 0.0 {
        return Err(Error::Degenerate(
            "zero oscillation: the alternative is meaningless".into(),
        ));
    }
    if !(0.0 < theta0 && theta0 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "theta0 must lie in (0,1), got {theta0}"
        )));
    }
    let total = cyl.discrete_measure(&field.grid);
    if total == 0.0 {
        return Err(Error::OutOfDomain("cylinder contains no grid cells".into()));
    }
    let k = stats.mu_minus + 0.5 * stats.omega;
    let fraction = levelset_measure(field, cyl, k, Side::Below) / total;
    let class = if fraction <= theta0 {
        Alternative::First
    } else {
        Alternative::Second
    };
    Ok((class, fraction))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IterationVariant {
    Sublevel,
    Superlevel { q0: u32 },
}

/// Shrinking-level iteration record: levels k_i, radii rho_i, measure
/// fractions Y_i and the slice-integral quantities Z_i, all computed on
/// the unit-rescaled field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationTrace {
    pub variant: IterationVariant,
    pub k: Vec<f64>,
    pub rho: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub converged: bool,
}

/// Run the shrinking-level iteration on the unit rescaling of the field
/// over the cylinder. Sub-level variant: k_i = mu- + w/4 + w/2^{i+1},
/// rho_i = 1/2 + 2^{-(i+1)}; super-level: k_i = mu+ - w/2^{q0} +
/// w/2^{q0+i+2}, rho_i = 1/2 + 2^{-(i+2)} on theta0-shortened cylinders.
pub fn yz_sequences(
    field: &Field,
    cyl: &IntrinsicCylinder,
    stats: &OscStats,
    exponents: &ExponentSet,
    variant: IterationVariant,
    i_max: usize,
) -> Result<IterationTrace> {
    if i_max == 0 {
        return Err(Error::InvalidArgument("i_max must be at least 1".into()));
    }
    let tilde = crate::geometry::rescale_to_unit(field, cyl)?;
    let ug = tilde.grid.clone();
    let scale = stats.m_scale;
    // statistics transfer to the rescaled field by division
    let mu_minus = stats.mu_minus / scale;
    let mu_plus = stats.mu_plus / scale;
    let omega = stats.omega / scale;

    let (base_rho, theta0, side) = match variant {
        IterationVariant::Sublevel => (1.0, None, Side::Below),
        IterationVariant::Superlevel { .. } => (0.75, cyl.theta0, Side::Above),
    };
    if matches!(variant, IterationVariant::Superlevel { .. }) && theta0.is_none() {
        return Err(Error::InvalidArgument(
            "super-level iteration requires a theta0-shortened cylinder".into(),
        ));
    }
    let unit_cyl = |rho: f64| IntrinsicCylinder {
        t0: 0.0,
        x0: vec![0.0; ug.n],
        rho,
        m_scale: 1.0,
        m: cyl.m,
        theta0,
    };
    let base = unit_cyl(base_rho);
    let base_measure = base.discrete_measure(&ug);
    if base_measure == 0.0 {
        return Err(Error::OutOfDomain(
            "rescaled base cylinder contains no grid cells".into(),
        ));
    }

    let mut trace = IterationTrace {
        variant,
        k: Vec::new(),
        rho: Vec::new(),
        y: Vec::new(),
        z: Vec::new(),
        converged: false,
    };
    for i in 0..i_max {
        let (k_i, rho_i) = match variant {
            IterationVariant::Sublevel => (
                mu_minus + 0.25 * omega + omega / 2f64.powi(i as i32 + 1),
                0.5 + 0.5f64.powi(i as i32 + 1),
            ),
            IterationVariant::Superlevel { q0 } => (
                mu_plus - omega / 2f64.powi(q0 as i32)
                    + omega / 2f64.powi(q0 as i32 + i as i32 + 2),
                0.5 + 0.5f64.powi(i as i32 + 2),
            ),
        };
        let q_i = unit_cyl(rho_i);
        let y_i = levelset_measure(&tilde, &q_i, k_i, side) / base_measure;

        // slice integral with the intrinsic time element of the unit grid
        let mut integral = 0.0;
        for &ti in &q_i.time_indices(&ug) {
            let mslice = slice_levelset_measure(&tilde, &q_i, ti, k_i, side);
            integral += mslice.powf(exponents.q_star / exponents.p_star) * ug.dt;
        }
        let z_i = base_rho * base_rho / base_measure * integral.powf(2.0 / exponents.q_star);

        trace.k.push(k_i);
        trace.rho.push(rho_i);
        trace.y.push(y_i);
        trace.z.push(z_i);
        if y_i < Y_CONVERGED {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruncationVariant {
    Sub,
    Super,
}

/// The cut-off family: a linear ramp in time from the cylinder bottom
/// times a quintic-smoothstep radial profile vanishing on the lateral
/// boundary.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CutoffSpec {
    /// Fraction of the radius over which the radial profile falls to 0.
    pub sigma: f64,
    /// Fraction of the time length over which the ramp rises from 0.
    pub time_fraction: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec {
            sigma: 0.25,
            time_fraction: 0.5,
        }
    }
}

fn smoothstep5(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (6.0 * s * s - 15.0 * s + 10.0)
}

fn smoothstep5_deriv(s: f64) -> f64 {
    if !(0.0..=1.0).contains(&s) {
        return 0.0;
    }
    30.0 * s * s * (s - 1.0) * (s - 1.0)
}

impl CutoffSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.sigma && self.sigma < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff sigma must lie in (0,1), got {}",
                self.sigma
            )));
        }
        if !(0.0 < self.time_fraction && self.time_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff time_fraction must lie in (0,1], got {}",
                self.time_fraction
            )));
        }
        Ok(())
    }

    fn radial(&self, cyl: &IntrinsicCylinder, x: &[f64]) -> (f64, f64) {
        let dist = x
            .iter()
            .zip(cyl.x0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let band = self.sigma * cyl.rho;
        let s = (cyl.rho - dist) / band;
        (smoothstep5(s), smoothstep5_deriv(s) / band)
    }

    fn ramp(&self, cyl: &IntrinsicCylinder, t: f64) -> (f64, f64) {
        let len = cyl.time_length();
        let a = cyl.t0 - len;
        let width = self.time_fraction * len;
        let s = (t - a) / width;
        if s <= 0.0 {
            (0.0, 0.0)
        } else if s >= 1.0 {
            (1.0, 0.0)
        } else {
            (s, 1.0 / width)
        }
    }

    /// (eta, d eta/dt, |grad eta|) at a space-time point of the cylinder.
    pub fn evaluate(&self, cyl: &IntrinsicCylinder, t: f64, x: &[f64]) -> (f64, f64, f64) {
        let (ramp, dramp) = self.ramp(cyl, t);
        let (rad, drad) = self.radial(cyl, x);
        (ramp * rad, dramp * rad, ramp * drad)
    }
}

/// Truncation energy balance over a cylinder: the left side (sup-in-time
/// energy plus weighted gradient energy of the truncation), the three
/// right-side terms, and their ratio (the unknown constant).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaccioppoliReport {
    pub variant: TruncationVariant,
    pub k: f64,
    pub lhs: f64,
    pub rhs_terms: [f64; 3],
    pub ratio: f64,
    pub h: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn caccioppoli_residual(
    field: &Field,
    forcing: &ForcingPair,
    cyl: &IntrinsicCylinder,
    k: f64,
    cutoff: &CutoffSpec,
    variant: TruncationVariant,
    stats: &OscStats,
    exponents: &ExponentSet,
) -> Result<CaccioppoliReport> {
    cutoff.validate()?;
    if stats.omega <= 0.0 {
        return Err(Error::Degenerate(
            "zero oscillation: no admissible truncation level".into(),
        ));
    }
    match variant {
        TruncationVariant::Sub => {
            if !(stats.mu_minus < k && k < stats.mu_minus + 0.5 * stats.omega) {
                return Err(Error::InvalidArgument(format!(
                    "sub-level k={k} outside (mu-, mu- + omega/2) = ({}, {})",
                    stats.mu_minus,
                    stats.mu_minus + 0.5 * stats.omega
                )));
            }
        }
        TruncationVariant::Super => {
            if k < stats.mu_plus - 0.5 * stats.omega {
                return Err(Error::InvalidArgument(format!(
                    "super-level k={k} below mu+ - omega/2 = {}",
                    stats.mu_plus - 0.5 * stats.omega
                )));
            }
        }
    }

    let grid = &field.grid;
    let cells = cyl.ball_cells(grid);
    let times = cyl.time_indices(grid);
    if cells.is_empty() || times.is_empty() {
        return Err(Error::OutOfDomain("cylinder contains no grid cells".into()));
    }
    let vol = grid.cell_volume();
    let dt = grid.dt;
    let one_m = 1.0 - 1.0 / cyl.m;
    let weight = match variant {
        TruncationVariant::Sub => stats.mu_plus.powf(one_m),
        TruncationVariant::Super => stats.m_scale.powf(one_m),
    };

    let mut sup_energy: f64 = 0.0;
    let mut grad_energy = 0.0;
    let mut rhs = [0.0f64; 3];
    let mut slice_integral = 0.0;
    let slice_exp = exponents.q_prime * (0.5 - 1.0 / exponents.p);

    for &ti in &times {
        let t = grid.time(ti);
        // truncation on the full slice so the stencil has neighbors
        let trunc: Vec<f64> = field
            .slice(ti)
            .iter()
            .map(|&u| match variant {
                TruncationVariant::Sub => (k - u).max(0.0),
                TruncationVariant::Super => (u - k).max(0.0),
            })
            .collect();
        let grad = gradient_magnitude(&trunc, grid);

        let mut slice_energy = 0.0;
        let mut levelset_count = 0usize;
        for &c in &cells {
            let x = grid.center(c);
            let (eta, eta_t, eta_grad) = cutoff.evaluate(cyl, t, &x);
            let v = trunc[c];
            slice_energy += v * v * eta * eta * vol;
            grad_energy += grad[c] * grad[c] * eta * eta * vol * dt;
            match variant {
                TruncationVariant::Sub => {
                    rhs[0] += stats.omega * v * eta * eta_t * vol * dt;
                }
                TruncationVariant::Super => {
                    rhs[0] += v * v * 2.0 * eta * eta_t * vol * dt;
                }
            }
            rhs[1] += v * v * eta_grad * eta_grad * vol * dt;
            let u = field.at(ti, c);
            let in_set = match variant {
                TruncationVariant::Sub => u < k,
                TruncationVariant::Super => u > k,
            };
            if in_set {
                levelset_count += 1;
            }
        }
        sup_energy = sup_energy.max(slice_energy);
        slice_integral += (levelset_count as f64 * vol).powf(slice_exp) * dt;
    }

    let norms = forcing_h(forcing, cyl, exponents.p, exponents.q, stats.omega)?;
    match variant {
        TruncationVariant::Sub => {}
        TruncationVariant::Super => {
            rhs[0] *= (stats.m_scale / stats.mu_plus).powf(one_m);
        }
    }
    rhs[1] *= weight;
    rhs[2] = weight * norms.h * slice_integral.powf(2.0 / exponents.q_prime);

    let lhs = sup_energy + weight * grad_energy;
    let rhs_sum: f64 = rhs.iter().sum();
    let ratio = if rhs_sum > 0.0 { lhs / rhs_sum } else { 0.0 };
    Ok(CaccioppoliReport {
        variant,
        k,
        lhs,
        rhs_terms: rhs,
        ratio,
        h: norms.h,
    })
}

/// Find the earliest grid time tau0 in (t0 - L, t0 - theta L) whose slice
/// sub-level measure at mu- + omega/2 is at most
/// ((1-theta0)/(1-theta)) m_n(B_rho). Requires the second alternative.
pub fn select_good_slice(
    field: &Field,
    cyl: &IntrinsicCylinder,
    stats: &OscStats,
    theta: f64,
    theta0: f64,
) -> Result<f64> {
    if !(0.0 < theta && theta < theta0 && theta0 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < theta < theta0 < 1, got theta={theta}, theta0={theta0}"
        )));
    }
    let (class, fraction) = alternative_classify(field, cyl, stats, theta0)?;
    if class != Alternative::Second {
        return Err(Error::HypothesisViolation(format!(
            "sub-level fraction {fraction} is at most theta0 = {theta0}; \
             the slice estimate does not apply"
        )));
    }
    let grid = &field.grid;
    let len = cyl.full_time_length();
    let ball = cyl.ball_cells(grid).len() as f64 * grid.cell_volume();
    let bound = (1.0 - theta0) / (1.0 - theta) * ball;
    let k = stats.mu_minus + 0.5 * stats.omega;
    for ti in 0..grid.time_len() {
        let t = grid.time(ti);
        if t <= cyl.t0 - len || t >= cyl.t0 - theta * len {
            continue;
        }
        let above = slice_levelset_measure(field, cyl, ti, k, Side::Above);
        if above <= bound {
            return Ok(t);
        }
    }
    Err(Error::InsufficientData(
        "no slice satisfies the measure estimate: counterexample to the slice selection".into(),
    ))
}

/// Per-slice outcome of the logarithmic level-set estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShrinkSlice {
    pub time_index: usize,
    pub time: f64,
    pub measure: f64,
    pub bound: f64,
    pub pass: bool,
    pub psi_energy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShrinkReport {
    pub k: f64,
    pub h_gap: f64,
    pub c_level: f64,
    pub slices: Vec<ShrinkSlice>,
    pub all_pass: bool,
}

/// Logarithmic estimate diagnostics: with k = mu- + omega/2,
/// H = mu+ - k and c = omega/2^{r0_level}, check per slice of the
/// theta0-shortened interval that the super-level measure at
/// mu+ - omega/2^{r0_level} is at most (1 - (theta0/2)^2) m_n(B_rho),
/// and report the log-weight energies.
pub fn log_levelset_shrink(
    field: &Field,
    cyl: &IntrinsicCylinder,
    stats: &OscStats,
    theta0: f64,
    r0_level: u32,
) -> Result<ShrinkReport> {
    if r0_level <= 2 {
        return Err(Error::InvalidArgument(format!(
            "dyadic level must exceed 2, got {r0_level}"
        )));
    }
    if stats.omega <= 0.0 {
        return Err(Error::Degenerate("zero oscillation".into()));
    }
    let k = stats.mu_minus + 0.5 * stats.omega;
    let h_gap = stats.mu_plus - k;
    if h_gap <= 0.0 {
        return Err(Error::Degenerate(format!(
            "non-positive gap mu+ - (mu- + omega/2) = {h_gap}"
        )));
    }
    let c = stats.omega / 2f64.powi(r0_level as i32);
    let level = stats.mu_plus - c;
    let grid = &field.grid;
    let short = cyl.shortened(theta0);
    let cells = short.ball_cells(grid);
    let ball = cells.len() as f64 * grid.cell_volume();
    let bound = (1.0 - (theta0 / 2.0) * (theta0 / 2.0)) * ball;
    let psi = |u: f64| -> f64 {
        let denom = h_gap - (u - k).max(0.0) + c;
        (h_gap / denom).max(1.0).ln()
    };
    let mut slices = Vec::new();
    let mut all_pass = true;
    for &ti in &short.time_indices(grid) {
        let measure = slice_levelset_measure(field, &short, ti, level, Side::Above);
        let pass = measure <= bound;
        all_pass &= pass;
        let psi_energy: f64 = cells
            .iter()
            .map(|&cidx| {
                let w = psi(field.at(ti, cidx));
                w * w * grid.cell_volume()
            })
            .sum();
        slices.push(ShrinkSlice {
            time_index: ti,
            time: grid.time(ti),
            measure,
            bound,
            pass,
            psi_energy,
        });
    }
    Ok(ShrinkReport {
        k,
        h_gap,
        c_level: c,
        slices,
        all_pass,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    /// Smallest dyadic offset meeting the target fraction, if any.
    pub q0: Option<u32>,
    /// (level offset, super-level fraction) for every level examined.
    pub table: Vec<(u32, f64)>,
}

/// Smallest q0 <= q0_max such that the super-level fraction of
/// Q^{theta0}_{(3/4)rho} at level mu+ - omega/2^{q0+1} is at most nu.
pub fn dyadic_measure_decay(
    field: &Field,
    cyl: &IntrinsicCylinder,
    stats: &OscStats,
    theta0: f64,
    nu: f64,
    q0_max: u32,
) -> Result<DecayReport> {
    if !(0.0 < nu && nu < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "nu must lie in (0,1), got {nu}"
        )));
    }
    if stats.omega <= 0.0 {
        return Err(Error::Degenerate("zero oscillation".into()));
    }
    let inner = cyl.with_rho(0.75 * cyl.rho).shortened(theta0);
    let total = inner.discrete_measure(&field.grid);
    if total == 0.0 {
        return Err(Error::OutOfDomain(
            "shrunken cylinder contains no grid cells".into(),
        ));
    }
    let mut table = Vec::new();
    let mut found = None;
    for q0 in 1..=q0_max {
        let level = stats.mu_plus - stats.omega / 2f64.powi(q0 as i32 + 1);
        let fraction = levelset_measure(field, &inner, level, Side::Above) / total;
        table.push((q0, fraction));
        if found.is_none() && fraction <= nu {
            found = Some(q0);
        }
    }
    Ok(DecayReport { q0: found, table })
}

/// Geometric controls of the oscillation cascade.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeParams {
    pub theta0: f64,
    pub eta0: f64,
    pub delta0: f64,
    pub m: f64,
    pub max_levels: usize,
    /// min{(1-eta0)^{1/sigma0}, (1/2)(1/3)^{(1-1/m)/2}(theta0/2)^{1/2}}.
    pub shrink_ratio: f64,
}

impl CascadeParams {
    pub fn new(
        theta0: f64,
        eta0: f64,
        delta0: f64,
        m: f64,
        sigma0: f64,
        max_levels: usize,
    ) -> Result<Self> {
        for (name, v) in [("theta0", theta0), ("eta0", eta0), ("delta0", delta0)] {
            if !(0.0 < v && v < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in (0,1), got {v}"
                )));
            }
        }
        if m <= 1.0 {
            return Err(Error::InvalidArgument(format!("m must exceed 1, got {m}")));
        }
        if sigma0 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sigma0 must be positive, got {sigma0}"
            )));
        }
        if max_levels == 0 {
            return Err(Error::InvalidArgument("max_levels must be positive".into()));
        }
        let geometric = 0.5 * (1.0f64 / 3.0).powf(0.5 * (1.0 - 1.0 / m)) * (theta0 / 2.0).sqrt();
        let shrink_ratio = (1.0 - eta0).powf(1.0 / sigma0).min(geometric);
        Ok(CascadeParams {
            theta0,
            eta0,
            delta0,
            m,
            max_levels,
            shrink_ratio,
        })
    }
}

/// One level of the cascade with its verification flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeLevel {
    pub j: usize,
    pub rho: f64,
    pub omega: f64,
    #[serde(rename = "M")]
    pub m_level: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub osc: f64,
    pub h: f64,
    /// osc over Q_j stays within omega_j.
    pub pass_osc: bool,
    /// sup over Q_j stays within M_j.
    pub pass_sup: bool,
    /// rho_j^{sigma0} <= delta0 omega_j M_j^{-(1/q)(1-1/m)} h^{-1/2}.
    pub pass_rho_cond: bool,
    /// mu+_{j-1} <= max{3 omega_j / (2(1-eta0)), 3 mu+_j}.
    pub pass_chain: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeState {
    pub params: CascadeParams,
    pub t0: f64,
    pub x0: Vec<f64>,
    pub levels: Vec<CascadeLevel>,
    /// Why iteration stopped: "resolution", "max-levels", or "domain".
    pub stopped: String,
}

impl CascadeState {
    /// (rho, osc) pairs for exponent fitting.
    pub fn osc_table(&self) -> Vec<(f64, f64)> {
        self.levels.iter().map(|l| (l.rho, l.osc)).collect()
    }
}

/// Run the geometric oscillation cascade seeded with M_0 = omega_0 =
/// the global supremum: omega_j = (1-eta0) omega_{j-1},
/// rho_j = shrink_ratio * rho_{j-1}, M_j = max{mu+_{j-1}, omega_j},
/// verifying the oscillation, supremum, smallness and chain inequalities
/// at every level until the grid can no longer resolve the ball.
pub fn oscillation_cascade(
    field: &Field,
    t0: f64,
    x0: &[f64],
    rho0: f64,
    params: &CascadeParams,
    exponents: &ExponentSet,
    forcing: &ForcingPair,
) -> Result<CascadeState> {
    let grid = &field.grid;
    let m0 = field.max_value();
    if m0 <= 0.0 {
        return Err(Error::Degenerate(
            "global supremum is not positive".into(),
        ));
    }
    let min_dx = grid.dx.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut state = CascadeState {
        params: params.clone(),
        t0,
        x0: x0.to_vec(),
        levels: Vec::new(),
        stopped: String::new(),
    };

    let mut omega = m0;
    let mut rho = rho0;
    let mut m_level = m0;
    let mut prev_mu_plus: Option<f64> = None;
    let exp_mq = -(1.0 / exponents.q) * (1.0 - 1.0 / params.m);

    for j in 0..params.max_levels {
        if rho < 3.0 * min_dx {
            state.stopped = "resolution".into();
            break;
        }
        let cyl = IntrinsicCylinder {
            t0,
            x0: x0.to_vec(),
            rho,
            m_scale: m_level,
            m: params.m,
            theta0: None,
        };
        if cyl.check_in_domain(grid, 0.0).is_err() {
            state.stopped = "domain".into();
            break;
        }
        let stats = osc_stats(field, &cyl)?;
        if j == 0 && stats.osc <= 0.0 {
            return Err(Error::Degenerate(
                "zero oscillation over the initial cylinder".into(),
            ));
        }
        let norms = forcing_h(forcing, &cyl, exponents.p, exponents.q, omega)?;
        // h = 0 leaves the smallness condition vacuous
        let pass_rho_cond = if norms.h == 0.0 {
            true
        } else {
            rho.powf(exponents.sigma0)
                <= params.delta0 * omega * m_level.powf(exp_mq) / norms.h.sqrt()
        };
        let pass_chain = match prev_mu_plus {
            None => true,
            Some(prev) => {
                prev <= (1.5 * omega / (1.0 - params.eta0)).max(3.0 * stats.mu_plus)
            }
        };
        state.levels.push(CascadeLevel {
            j,
            rho,
            omega,
            m_level,
            mu_plus: stats.mu_plus,
            mu_minus: stats.mu_minus,
            osc: stats.osc,
            h: norms.h,
            pass_osc: stats.osc <= omega + 1e-12 * omega,
            pass_sup: stats.mu_plus <= m_level + 1e-12 * m_level,
            pass_rho_cond,
            pass_chain,
        });

        prev_mu_plus = Some(stats.mu_plus);
        omega *= 1.0 - params.eta0;
        rho *= params.shrink_ratio;
        m_level = stats.mu_plus.max(omega);
    }
    if state.stopped.is_empty() {
        state.stopped = "max-levels".into();
    }
    if state.levels.is_empty() {
        return Err(Error::InsufficientData(
            "initial radius already below the grid resolution".into(),
        ));
    }
    Ok(state)
}

/// Hölder-exponent fit against the oscillation-vs-radius record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderFit {
    pub sigma: f64,
    pub c_fit: f64,
    pub bracket: f64,
    pub bracket_components: [f64; 3],
    pub flat: bool,
    pub levels_used: usize,
}

/// Least-squares slope of log(osc) against log(rho), with the constant
/// normalized by M0 + M0^{(1/q)(1-1/m)}||f|| + M0^{(2/q)(1-1/m)}||g||.
pub fn holder_fit(
    table: &[(f64, f64)],
    m0: f64,
    norms: &ForcingNorms,
    m: f64,
) -> Result<HolderFit> {
    if m0 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "supremum bound must be positive, got {m0}"
        )));
    }
    let one_m = 1.0 - 1.0 / m;
    let comp = [
        m0,
        m0.powf(one_m / norms.q) * norms.norm_f,
        m0.powf(2.0 * one_m / norms.q) * norms.norm_g,
    ];
    let bracket: f64 = comp.iter().sum();

    if table.iter().all(|&(_, osc)| osc == 0.0) {
        return Ok(HolderFit {
            sigma: f64::NAN,
            c_fit: 0.0,
            bracket,
            bracket_components: comp,
            flat: true,
            levels_used: 0,
        });
    }
    let usable: Vec<(f64, f64)> = table
        .iter()
        .copied()
        .filter(|&(rho, osc)| rho > 0.0 && osc > 0.0)
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "exponent fit needs at least 3 levels with positive radius and \
             oscillation, got {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(rho, osc) in &usable {
        let x = rho.ln();
        let y = osc.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let sigma = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let c_raw = usable
        .iter()
        .map(|&(rho, osc)| osc / rho.powf(sigma))
        .fold(0.0f64, f64::max);
    Ok(HolderFit {
        sigma,
        c_fit: c_raw / bracket,
        bracket,
        bracket_components: comp,
        flat: false,
        levels_used: usable.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{derive_exponents, make_cylinder};
    use crate::grid::{barenblatt_field, make_grid, sample_field, BarenblattParams};
    use crate::solver::ForcingPair;
    use rand::{Rng, SeedableRng};

    fn test_grid() -> crate::grid::Grid {
        make_grid(1, &[(-2.0, 2.0)], &[64], 0.0, 2.0, 64).unwrap()
    }

    fn synthetic_stats(mu_minus: f64, mu_plus: f64) -> OscStats {
        OscStats {
            mu_plus,
            mu_minus,
            osc: mu_plus - mu_minus,
            omega: mu_plus - mu_minus,
            m_scale: mu_plus,
        }
    }

    #[test]
    fn levelset_measure_trivial_cases() {
        let g = test_grid();
        let z = sample_field(&g, "z", |_, _| 0.0).unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let total = cyl.discrete_measure(&g);
        assert_eq!(levelset_measure(&z, &cyl, 1.0, Side::Below), total);
        assert_eq!(levelset_measure(&z, &cyl, 0.0, Side::Below), 0.0);
    }

    #[test]
    fn levelset_partition_of_region() {
        let g = test_grid();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<f64> = (0..g.time_len() * g.spatial_len())
            .map(|_| rng.gen_range(0.0..2.0))
            .collect();
        let f = Field::new(g.clone(), vals, "r").unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let total = cyl.discrete_measure(&g);
        for k in [0.3, 1.0, 1.7] {
            let below = levelset_measure(&f, &cyl, k, Side::Below);
            let above = levelset_measure(&f, &cyl, k, Side::Above);
            // continuous draws: {u = k} has measure 0
            assert!((below + above - total).abs() < 1e-12);
            // exact multiples of the cell measure
            let cells = below / g.cell_measure();
            assert!((cells - cells.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn levelset_matches_brute_force() {
        let g = test_grid();
        let f = sample_field(&g, "f", |t, x| (3.0 * x[0]).sin() + t * 0.3).unwrap();
        let cyl = make_cylinder(2.0, &[0.3], 0.9, 1.0, 2.0, None).unwrap();
        let k = 0.4;
        let mut count = 0usize;
        for ti in 0..g.time_len() {
            let t = g.time(ti);
            if !(t > cyl.t0 - cyl.time_length() && t <= cyl.t0 + 1e-12) {
                continue;
            }
            for c in 0..g.spatial_len() {
                if cyl.contains_point(&g.center(c)) && f.at(ti, c) < k {
                    count += 1;
                }
            }
        }
        assert_eq!(
            levelset_measure(&f, &cyl, k, Side::Below),
            count as f64 * g.cell_measure()
        );
    }

    #[test]
    fn classify_first_second_and_boundary() {
        let g = test_grid();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = synthetic_stats(0.0, 1.0);

        // everything far above the level: fraction 0
        let hi = sample_field(&g, "h", |_, _| 1.0).unwrap();
        let (class, frac) = alternative_classify(&hi, &cyl, &stats, 0.3).unwrap();
        assert_eq!(class, Alternative::First);
        assert_eq!(frac, 0.0);

        // half the cells at mu-, half at mu- + omega
        let two = sample_field(&g, "t", |_, x| if x[0] < 0.0 { 0.0 } else { 1.0 }).unwrap();
        let (class, frac) = alternative_classify(&two, &cyl, &stats, 0.3).unwrap();
        assert_eq!(class, Alternative::Second);
        assert!((frac - 0.5).abs() < 0.05, "fraction {frac}");

        // inclusive boundary: fraction exactly theta0 stays First
        let (class, frac) = alternative_classify(&two, &cyl, &stats, frac).unwrap();
        assert_eq!(class, Alternative::First);

        let flat = synthetic_stats(1.0, 1.0);
        assert!(matches!(
            alternative_classify(&hi, &cyl, &flat, 0.3),
            Err(Error::Degenerate(_))
        ));
        let _ = frac;
    }

    #[test]
    fn yz_zero_for_constant_at_sup() {
        let g = test_grid();
        let f = sample_field(&g, "c", |_, _| 1.0).unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = synthetic_stats(0.0, 1.0); // u sits at mu+ everywhere
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let trace =
            yz_sequences(&f, &cyl, &stats, &e, IterationVariant::Sublevel, 6).unwrap();
        assert!(trace.converged);
        assert!(trace.y.iter().all(|&y| y == 0.0));
        assert!(trace.z.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn yz_monotone_sublevel() {
        let g = test_grid();
        let f = sample_field(&g, "f", |t, x| {
            0.5 + 0.5 * (2.0 * x[0]).sin() * (0.5 * t).cos()
        })
        .unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = osc_stats(&f, &cyl).unwrap();
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let trace =
            yz_sequences(&f, &cyl, &stats, &e, IterationVariant::Sublevel, 8).unwrap();
        for w in trace.y.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "Y not monotone: {:?}", trace.y);
        }
        for (y, z) in trace.y.iter().zip(trace.z.iter()) {
            if *y == 0.0 {
                assert_eq!(*z, 0.0);
            }
        }
    }

    #[test]
    fn yz_first_step_brute_force() {
        // 8 cells, 8 slices, indicator of the left half below k_0
        let g = make_grid(1, &[(-1.0, 1.0)], &[8], 0.0, 1.0, 8).unwrap();
        let f = sample_field(&g, "i", |_, x| if x[0] < 0.0 { 0.0 } else { 1.0 }).unwrap();
        let cyl = make_cylinder(1.0, &[0.0], 0.9, 1.0, 2.0, None).unwrap();
        let stats = synthetic_stats(0.0, 1.0);
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let trace =
            yz_sequences(&f, &cyl, &stats, &e, IterationVariant::Sublevel, 1).unwrap();
        // k_0 = 0 + 1/4 + 1/2 = 3/4; rho_0 = 1 (whole unit ball)
        assert!((trace.k[0] - 0.75).abs() < 1e-15);
        assert_eq!(trace.rho[0], 1.0);
        // the indicator maps to {0, 1} under rescaling; exactly the zero
        // cells fall below 3/4. Brute-force the unit grid directly.
        let tilde = crate::geometry::rescale_to_unit(&f, &cyl).unwrap();
        let ug = &tilde.grid;
        let mut below = 0usize;
        let mut total = 0usize;
        for ti in 0..ug.time_len() {
            let t = ug.time(ti);
            if t <= -1.0 + 1e-12 * ug.dt {
                continue;
            }
            for c in 0..ug.spatial_len() {
                if ug.center(c)[0].abs() < 1.0 {
                    total += 1;
                    if tilde.at(ti, c) < 0.75 {
                        below += 1;
                    }
                }
            }
        }
        let expect = below as f64 / total as f64;
        assert!(
            (trace.y[0] - expect).abs() < 1e-12,
            "Y_0 = {} vs brute force {expect}",
            trace.y[0]
        );
    }

    #[test]
    fn caccioppoli_zero_truncation() {
        let g = test_grid();
        // minimum at the cylinder center; nothing dips below k elsewhere
        let f = sample_field(&g, "f", |_, x| 1.8 - 0.4 * x[0].cos()).unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 2.0, 2.0, None).unwrap();
        let stats = osc_stats(&f, &cyl).unwrap();
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let forcing = ForcingPair::zero(&g).unwrap();
        let k = stats.mu_minus + 1e-9; // admissible, but u >= mu- everywhere
        let rep = caccioppoli_residual(
            &f,
            &forcing,
            &cyl,
            k,
            &CutoffSpec::default(),
            TruncationVariant::Sub,
            &stats,
            &e,
        )
        .unwrap();
        // k sits a hair above the minimum, so the truncation energy is
        // quadratically small against the linear right side
        assert!(rep.lhs < 1e-15);
        assert!(rep.ratio < 1e-3);
    }

    #[test]
    fn caccioppoli_rejects_inadmissible_k() {
        let g = test_grid();
        let f = sample_field(&g, "f", |_, x| 1.0 + 0.5 * x[0]).unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 2.0, 2.0, None).unwrap();
        let stats = osc_stats(&f, &cyl).unwrap();
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let forcing = ForcingPair::zero(&g).unwrap();
        let bad_sub = stats.mu_minus + stats.omega; // above the half window
        assert!(caccioppoli_residual(
            &f,
            &forcing,
            &cyl,
            bad_sub,
            &CutoffSpec::default(),
            TruncationVariant::Sub,
            &stats,
            &e
        )
        .is_err());
        let bad_super = stats.mu_plus - stats.omega; // below mu+ - omega/2
        assert!(caccioppoli_residual(
            &f,
            &forcing,
            &cyl,
            bad_super,
            &CutoffSpec::default(),
            TruncationVariant::Super,
            &stats,
            &e
        )
        .is_err());
    }

    #[test]
    fn caccioppoli_terms_nonnegative() {
        let g = test_grid();
        let f = sample_field(&g, "f", |t, x| {
            0.6 + 0.4 * (1.5 * x[0]).sin() * (0.7 * t + 0.2).cos()
        })
        .unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = osc_stats(&f, &cyl).unwrap();
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let g_src = sample_field(&g, "g", |_, x| 0.2 * x[0].cos()).unwrap();
        let forcing = ForcingPair::new(vec![], g_src).unwrap();
        for (variant, k) in [
            (TruncationVariant::Sub, stats.mu_minus + 0.25 * stats.omega),
            (TruncationVariant::Super, stats.mu_plus - 0.25 * stats.omega),
        ] {
            let rep = caccioppoli_residual(
                &f,
                &forcing,
                &cyl,
                k,
                &CutoffSpec::default(),
                variant,
                &stats,
                &e,
            )
            .unwrap();
            assert!(rep.lhs >= 0.0);
            for term in rep.rhs_terms {
                assert!(term >= 0.0, "negative rhs term in {variant:?}: {term}");
            }
            assert!(rep.ratio.is_finite());
        }
    }

    #[test]
    fn caccioppoli_forcing_term_closed_form() {
        // field entirely below k: the level-set slice measure is the full
        // ball, so the third term reduces to weight * h * (|B|^a L)^{2/q'}
        let g = test_grid();
        let f = sample_field(&g, "f", |_, x| 0.1 + 0.01 * x[0]).unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = synthetic_stats(0.0, 1.0);
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let g_src = sample_field(&g, "g", |_, _| 0.5).unwrap();
        let forcing = ForcingPair::new(vec![], g_src).unwrap();
        let k = 0.4; // admissible: (0, 0.5)
        let rep = caccioppoli_residual(
            &f,
            &forcing,
            &cyl,
            k,
            &CutoffSpec::default(),
            TruncationVariant::Sub,
            &stats,
            &e,
        )
        .unwrap();
        let ball = cyl.ball_cells(&g).len() as f64 * g.cell_volume();
        let slices = cyl.time_indices(&g).len() as f64;
        let a = e.q_prime * (0.5 - 1.0 / e.p);
        let integral = ball.powf(a) * slices * g.dt;
        let expect = stats.mu_plus.powf(0.5) * rep.h * integral.powf(2.0 / e.q_prime);
        assert!(
            (rep.rhs_terms[2] - expect).abs() < 1e-12 * expect,
            "{} vs {expect}",
            rep.rhs_terms[2]
        );
    }

    #[test]
    fn good_slice_time_independent_field() {
        let g = test_grid();
        // most of the cylinder sits below mu- + omega/2
        let f = sample_field(&g, "f", |_, x| if x[0].abs() < 0.8 { 0.0 } else { 1.0 }).unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = synthetic_stats(0.0, 1.0);
        let tau0 = select_good_slice(&f, &cyl, &stats, 0.2, 0.5).unwrap();
        // earliest admissible grid time strictly inside (t0 - L, t0 - theta L)
        let len = cyl.full_time_length();
        let first = (0..g.time_len())
            .map(|ti| g.time(ti))
            .find(|&t| t > cyl.t0 - len && t < cyl.t0 - 0.2 * len)
            .unwrap();
        assert_eq!(tau0, first);
    }

    #[test]
    fn good_slice_hypothesis_violated() {
        let g = test_grid();
        let f = sample_field(&g, "f", |_, _| 1.0).unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = synthetic_stats(0.0, 1.0);
        assert!(matches!(
            select_good_slice(&f, &cyl, &stats, 0.2, 0.5),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn good_slice_two_phase_in_time() {
        let g = test_grid();
        let len = 1.0; // rho=1, M=1: full time length 1, cylinder (1, 2]
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        assert!((cyl.full_time_length() - len).abs() < 1e-15);
        // early times good (below the level), late times bad
        let f = sample_field(&g, "f", |t, _| if t < 1.7 { 0.0 } else { 1.0 }).unwrap();
        let stats = synthetic_stats(0.0, 1.0);
        let tau0 = select_good_slice(&f, &cyl, &stats, 0.2, 0.5).unwrap();
        assert!(tau0 < 1.7);
        // brute-force scan agrees on the earliest qualifying slice
        let k = 0.5;
        let ball = cyl.ball_cells(&g).len() as f64 * g.cell_volume();
        let bound = 0.5 / 0.8 * ball;
        let brute = (0..g.time_len())
            .map(|ti| (ti, g.time(ti)))
            .find(|&(ti, t)| {
                t > cyl.t0 - len
                    && t < cyl.t0 - 0.2 * len
                    && slice_levelset_measure(&f, &cyl, ti, k, Side::Above) <= bound
            })
            .unwrap()
            .1;
        assert_eq!(tau0, brute);
    }

    #[test]
    fn shrink_passes_when_levelset_empty() {
        let g = test_grid();
        // omega comes from early times; the shortened interval is quiet
        let f = sample_field(&g, "f", |t, _| if t < 1.7 { 1.0 } else { 0.2 }).unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = osc_stats(&f, &cyl).unwrap();
        let rep = log_levelset_shrink(&f, &cyl, &stats, 0.5, 4).unwrap();
        assert!(rep.all_pass);
        assert!(!rep.slices.is_empty());
    }

    #[test]
    fn shrink_fails_at_the_sup() {
        let g = test_grid();
        // shortened interval pinned at mu+
        let f = sample_field(&g, "f", |t, _| if t < 1.7 { 0.2 } else { 1.0 }).unwrap();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = osc_stats(&f, &cyl).unwrap();
        let rep = log_levelset_shrink(&f, &cyl, &stats, 0.5, 4).unwrap();
        assert!(rep.slices.iter().all(|s| !s.pass));
    }

    #[test]
    fn shrink_psi_monotone() {
        let stats = synthetic_stats(0.0, 1.0);
        let k = 0.5;
        let h_gap = 0.5;
        let c = 1.0 / 16.0;
        let psi = |u: f64| (h_gap / (h_gap - (u - k).max(0.0) + c)).max(1.0).ln();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let a: f64 = rng.gen_range(0.0..1.0);
            let b: f64 = rng.gen_range(0.0..1.0);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            assert!(psi(lo) <= psi(hi) + 1e-15);
        }
        let _ = stats;
    }

    #[test]
    fn decay_trivial_cases() {
        let g = test_grid();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = synthetic_stats(0.0, 1.0);

        let low = sample_field(&g, "l", |_, _| 0.0).unwrap();
        let rep = dyadic_measure_decay(&low, &cyl, &stats, 0.5, 0.5, 10).unwrap();
        assert_eq!(rep.q0, Some(1));

        let high = sample_field(&g, "h", |_, _| 1.0).unwrap();
        let rep = dyadic_measure_decay(&high, &cyl, &stats, 0.5, 0.5, 10).unwrap();
        assert_eq!(rep.q0, None);
        assert!(rep.table.iter().all(|&(_, f)| (f - 1.0).abs() < 1e-12));
    }

    #[test]
    fn decay_two_valued_fraction() {
        let g = test_grid();
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = synthetic_stats(0.0, 1.0);
        // fraction of ball cells at mu+; the rest at mu-
        let f = sample_field(&g, "f", |_, x| if x[0] > 0.4 { 1.0 } else { 0.0 }).unwrap();
        let rep = dyadic_measure_decay(&f, &cyl, &stats, 0.5, 0.5, 10).unwrap();
        assert_eq!(rep.q0, Some(1));
        let inner = cyl.with_rho(0.75).shortened(0.5);
        let frac = levelset_measure(&f, &inner, 1.0 - 0.25, Side::Above)
            / inner.discrete_measure(&g);
        assert_eq!(rep.table[0], (1, frac));
        assert!(frac <= 0.5);
    }

    #[test]
    fn cascade_params_shrink_ratio() {
        let p = CascadeParams::new(0.5, 0.25, 0.5, 2.0, 0.5, 20).unwrap();
        let geometric = 0.5 * (1.0f64 / 3.0).powf(0.25) * 0.25f64.sqrt();
        let expected = (0.75f64.powf(2.0)).min(geometric);
        assert!((p.shrink_ratio - expected).abs() < 1e-15);
        assert!(p.shrink_ratio > 0.0 && p.shrink_ratio < 1.0);
    }

    #[test]
    fn cascade_degenerate_on_constants() {
        let g = test_grid();
        let f = sample_field(&g, "c", |_, _| 1.0).unwrap();
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let p = CascadeParams::new(0.5, 0.25, 0.5, 2.0, e.sigma0, 10).unwrap();
        let forcing = ForcingPair::zero(&g).unwrap();
        assert!(matches!(
            oscillation_cascade(&f, 2.0, &[0.0], 1.0, &p, &e, &forcing),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn cascade_unforced_smallness_vacuous() {
        let g = test_grid();
        let f = sample_field(&g, "f", |t, x| 1.0 + 0.3 * (x[0] + 0.1 * t).sin()).unwrap();
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let p = CascadeParams::new(0.5, 0.25, 0.5, 2.0, e.sigma0, 10).unwrap();
        let forcing = ForcingPair::zero(&g).unwrap();
        let state = oscillation_cascade(&f, 2.0, &[0.0], 1.0, &p, &e, &forcing).unwrap();
        assert!(!state.levels.is_empty());
        assert!(state.levels.iter().all(|l| l.pass_rho_cond));
        assert!(state.levels.iter().all(|l| l.h == 0.0));
    }

    #[test]
    fn cascade_barenblatt_interior() {
        let bp = BarenblattParams::new(2.0, 1.0, 1).unwrap();
        let g = make_grid(1, &[(-3.0, 3.0)], &[1024], 1.0, 3.0, 256).unwrap();
        let u = barenblatt_field(&g, &bp).unwrap();
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let p = CascadeParams::new(0.5, 0.25, 0.5, 2.0, e.sigma0, 30).unwrap();
        let forcing = ForcingPair::zero(&g).unwrap();
        let state = oscillation_cascade(&u, 3.0, &[0.2], 0.8, &p, &e, &forcing).unwrap();
        assert!(state.levels.len() >= 3, "only {} levels", state.levels.len());
        for l in &state.levels {
            assert!(l.pass_osc, "oscillation bound failed at level {}", l.j);
            assert!(l.pass_sup, "supremum bound failed at level {}", l.j);
            assert!(l.pass_chain, "chain inequality failed at level {}", l.j);
        }
    }

    #[test]
    fn holder_fit_exact_half_power() {
        // osc = rho^{1/2} over two decades
        let table: Vec<(f64, f64)> = (0..8)
            .map(|j| {
                let rho = 1.0 * 0.5f64.powi(j);
                (rho, rho.sqrt())
            })
            .collect();
        let norms = ForcingNorms {
            p: 6.0,
            q: 6.0,
            norm_f: 0.0,
            norm_g: 0.0,
            h: 0.0,
        };
        let fit = holder_fit(&table, 1.0, &norms, 2.0).unwrap();
        assert!((fit.sigma - 0.5).abs() < 1e-12);
        assert!((fit.c_fit - 1.0).abs() < 1e-12);
        assert!(!fit.flat);
    }

    #[test]
    fn holder_fit_flat_and_insufficient() {
        let norms = ForcingNorms {
            p: 6.0,
            q: 6.0,
            norm_f: 0.0,
            norm_g: 0.0,
            h: 0.0,
        };
        let flat = holder_fit(&[(1.0, 0.0), (0.5, 0.0), (0.25, 0.0)], 1.0, &norms, 2.0).unwrap();
        assert!(flat.flat);
        assert_eq!(flat.c_fit, 0.0);
        assert!(flat.sigma.is_nan());

        assert!(matches!(
            holder_fit(&[(1.0, 1.0), (0.5, 0.7)], 1.0, &norms, 2.0),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn holder_fit_bracket_structure() {
        let norms = ForcingNorms {
            p: 6.0,
            q: 6.0,
            norm_f: 2.0,
            norm_g: 3.0,
            h: 0.0,
        };
        let table = [(1.0, 0.5), (0.5, 0.35), (0.25, 0.25)];
        let m0 = 4.0;
        let fit = holder_fit(&table, m0, &norms, 2.0).unwrap();
        // m = 2, q = 6: exponents 1/12 and 1/6
        let expect = [
            m0,
            m0.powf(1.0 / 12.0) * 2.0,
            m0.powf(1.0 / 6.0) * 3.0,
        ];
        for (a, b) in fit.bracket_components.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((fit.bracket - expect.iter().sum::<f64>()).abs() < 1e-14);
    }
}
