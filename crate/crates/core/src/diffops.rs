//! Centered-difference stencils shared by the residual and diagnostic
//! modules. One-sided stencils are used at the boundary ring.

use crate::grid::Grid;

/// Gradient component along `axis` of one spatial slice.
pub fn gradient_axis(values: &[f64], grid: &Grid, axis: usize) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let nx = grid.nx[axis];
    let h = grid.dx[axis];
    let stride: usize = grid.nx[..axis].iter().product();
    for flat in 0..values.len() {
        let i = flat / stride % nx;
        out[flat] = if i == 0 {
            (values[flat + stride] - values[flat]) / h
        } else if i == nx - 1 {
            (values[flat] - values[flat - stride]) / h
        } else {
            (values[flat + stride] - values[flat - stride]) / (2.0 * h)
        };
    }
    out
}

/// Euclidean norm of the spatial gradient of one slice.
pub fn gradient_magnitude(values: &[f64], grid: &Grid) -> Vec<f64> {
    let mut sq = vec![0.0; values.len()];
    for axis in 0..grid.n {
        let g = gradient_axis(values, grid, axis);
        for (s, gi) in sq.iter_mut().zip(g.iter()) {
            *s += gi * gi;
        }
    }
    sq.iter().map(|s| s.sqrt()).collect()
}

/// Time derivative of a space-time buffer by centered differences in the
/// time index (one-sided at the first and last slices).
pub fn time_derivative(values: &[f64], grid: &Grid) -> Vec<f64> {
    let slen = grid.spatial_len();
    let nt = grid.time_len();
    let mut out = vec![0.0; values.len()];
    for ti in 0..nt {
        for c in 0..slen {
            let idx = ti * slen + c;
            out[idx] = if nt == 1 {
                0.0
            } else if ti == 0 {
                (values[idx + slen] - values[idx]) / grid.dt
            } else if ti == nt - 1 {
                (values[idx] - values[idx - slen]) / grid.dt
            } else {
                (values[idx + slen] - values[idx - slen]) / (2.0 * grid.dt)
            };
        }
    }
    out
}
