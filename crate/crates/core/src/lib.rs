//! Library core: grids and exact solutions, the explicit PME solver,
//! intrinsic geometry, mixed weak norms, the oscillation-reduction
//! machinery, and closed-form verification checks.

pub mod degiorgi;
pub mod diffops;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod norms;
pub mod solver;
pub mod verify;

pub use degiorgi::{
    alternative_classify, caccioppoli_residual, dyadic_measure_decay, holder_fit,
    levelset_measure, log_levelset_shrink, oscillation_cascade, select_good_slice,
    slice_levelset_measure, yz_sequences, Alternative, CaccioppoliReport, CascadeLevel,
    CascadeParams, CascadeState, CutoffSpec, DecayReport, HolderFit, IterationTrace,
    IterationVariant, ShrinkReport, Side, TruncationVariant,
};
pub use error::{Error, Result};
pub use geometry::{
    derive_exponents, make_cylinder, osc_stats, rescale_to_unit, scale_transform, ExponentSet,
    IntrinsicCylinder, OscStats,
};
pub use grid::{
    barenblatt_field, load_field, make_grid, pow_transform, sample_field, save_field,
    BarenblattParams, Field, Grid, TOL_NEG,
};
pub use norms::{
    distribution_function, forcing_h, marcinkiewicz_bounds, mixed_norm, strong_lp_norm,
    weak_lp_norm, ForcingNorms, NormSpec,
};
pub use solver::{cfl_dt, evolve, weak_form_residual, Boundary, ForcingPair, SolverConfig};
pub use verify::{
    ladyzhenskaya_check, poincare_levelset_check, recursion_lemma, CheckReport,
    RecursionParams, RecursionTrace,
};
