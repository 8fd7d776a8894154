//! Experiment configuration: one JSON document describing the scenario,
//! grid, solver, forcing, and the cylinder analysis to run on the result.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pmelab_core::{
    derive_exponents, load_field, make_grid, BarenblattParams, Field, ForcingPair, Grid,
    SolverConfig,
};
use serde::Deserialize;

use crate::expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Barenblatt,
    CustomInitial,
    Forced,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub extents: Vec<(f64, f64)>,
    pub nx: Vec<usize>,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

/// A field given either as an analytic expression or as a CSV checkpoint
/// with its grid sidecar.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default)]
    pub expr: Option<String>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    /// One flux component per spatial axis.
    #[serde(default)]
    pub f: Vec<FieldSpec>,
    #[serde(default)]
    pub g: Option<FieldSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    pub t0: f64,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    pub anchors: Vec<Anchor>,
    pub rho0: f64,
    pub theta0: f64,
    pub eta0: f64,
    pub delta0: f64,
    pub p: f64,
    pub q: f64,
    pub max_levels: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    /// Mass of the self-similar initial condition (barenblatt scenario).
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub initial: Option<FieldSpec>,
    #[serde(default)]
    pub forcing: Option<ForcingSpec>,
    pub analysis: AnalysisSpec,
    pub out: PathBuf,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    validate(&config)?;
    Ok(config)
}

fn validate(config: &ExperimentConfig) -> Result<()> {
    let g = &config.grid;
    if g.n == 0 || g.n > 2 {
        bail!("grid.n: dimension must be 1 or 2, got {}", g.n);
    }
    if g.extents.len() != g.n || g.nx.len() != g.n {
        bail!("grid.extents/grid.nx: expected {} entries", g.n);
    }
    config.solver.validate().map_err(anyhow::Error::from)?;

    let a = &config.analysis;
    derive_exponents(a.p, a.q, g.n).with_context(|| {
        format!(
            "analysis.p/analysis.q: the regularity hypothesis requires integrability \
             exponents p > 2, q > 2 with 1 - 2/q - n/p > 0 (got p={}, q={})",
            a.p, a.q
        )
    })?;
    if a.rho0 <= 0.0 {
        bail!("analysis.rho0: radius must be positive, got {}", a.rho0);
    }
    if a.anchors.is_empty() {
        bail!("analysis.anchors: at least one anchor point is required");
    }
    for (i, anchor) in a.anchors.iter().enumerate() {
        if anchor.x0.len() != g.n {
            bail!("analysis.anchors[{i}].x0: expected {} coordinates", g.n);
        }
        for axis in 0..g.n {
            let (lo, hi) = g.extents[axis];
            if anchor.x0[axis] - a.rho0 < lo || anchor.x0[axis] + a.rho0 > hi {
                bail!(
                    "analysis.anchors[{i}]: ball of radius {} around {:?} leaves the domain",
                    a.rho0,
                    anchor.x0
                );
            }
        }
        if anchor.t0 < g.t0 || anchor.t0 > g.t1 {
            bail!(
                "analysis.anchors[{i}].t0: {} outside the grid time range",
                anchor.t0
            );
        }
    }

    match config.scenario {
        Scenario::Barenblatt => {
            if g.t0 <= 0.0 {
                bail!("grid.t0: the self-similar scenario requires t0 > 0");
            }
        }
        Scenario::CustomInitial | Scenario::Forced => {
            let init = config
                .initial
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("initial: required for this scenario"))?;
            check_field_spec(init, g.n, "initial")?;
        }
    }
    if let Some(forcing) = &config.forcing {
        if config.scenario != Scenario::Forced {
            bail!("forcing: only allowed in the forced scenario");
        }
        if forcing.f.len() > g.n {
            bail!(
                "forcing.f: at most {} flux components in dimension {}",
                g.n,
                g.n
            );
        }
        for (i, spec) in forcing.f.iter().enumerate() {
            check_field_spec(spec, g.n, &format!("forcing.f[{i}]"))?;
        }
        if let Some(gspec) = &forcing.g {
            check_field_spec(gspec, g.n, "forcing.g")?;
        }
    }
    Ok(())
}

fn check_field_spec(spec: &FieldSpec, n: usize, path: &str) -> Result<()> {
    match (&spec.expr, &spec.csv) {
        (Some(src), None) => {
            let e = expr::parse(src).with_context(|| format!("{path}.expr"))?;
            if e.max_axis() >= n {
                bail!("{path}.expr: coordinate y is unavailable in dimension {n}");
            }
            Ok(())
        }
        (None, Some(csv)) => {
            let sidecar = spec
                .sidecar
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("{path}.sidecar: required with csv"))?;
            if !csv.exists() {
                bail!("{path}.csv: {} does not exist", csv.display());
            }
            if !sidecar.exists() {
                bail!("{path}.sidecar: {} does not exist", sidecar.display());
            }
            Ok(())
        }
        _ => bail!("{path}: give exactly one of expr or csv"),
    }
}

pub fn build_grid(spec: &GridSpec) -> Result<Grid> {
    Ok(make_grid(
        spec.n,
        &spec.extents,
        &spec.nx,
        spec.t0,
        spec.t1,
        spec.nt,
    )?)
}

fn build_field(spec: &FieldSpec, grid: &Grid, name: &str) -> Result<Field> {
    if let Some(src) = &spec.expr {
        let e = expr::parse(src)?;
        return Ok(pmelab_core::sample_field(grid, name, |t, x| {
            e.eval(t, x)
        })?);
    }
    let field = load_field(
        spec.csv.as_ref().unwrap(),
        spec.sidecar.as_ref().unwrap(),
        name,
    )?;
    if field.grid != *grid {
        bail!("{name}: checkpoint grid does not match the configured grid");
    }
    Ok(field)
}

pub fn build_forcing(config: &ExperimentConfig, grid: &Grid) -> Result<ForcingPair> {
    let Some(spec) = &config.forcing else {
        return Ok(ForcingPair::zero(grid)?);
    };
    let mut f = Vec::new();
    for (i, comp) in spec.f.iter().enumerate() {
        f.push(build_field(comp, grid, &format!("f{i}"))?);
    }
    let g = match &spec.g {
        Some(gspec) => build_field(gspec, grid, "g")?,
        None => Field::zeros(grid.clone(), "g"),
    };
    Ok(ForcingPair::new(f, g)?)
}

pub fn build_initial(config: &ExperimentConfig, grid: &Grid) -> Result<Vec<f64>> {
    match config.scenario {
        Scenario::Barenblatt => {
            let mass = config.mass.unwrap_or(1.0);
            let bp = BarenblattParams::new(config.solver.m, mass, grid.n)?;
            Ok((0..grid.spatial_len())
                .map(|c| bp.value(grid.t0, &grid.center(c)))
                .collect())
        }
        Scenario::CustomInitial | Scenario::Forced => {
            let field = build_field(config.initial.as_ref().unwrap(), grid, "u0")?;
            Ok(field.slice(0).to_vec())
        }
    }
}
