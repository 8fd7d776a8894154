//! Property tests over randomized fields and parameters.

use pmelab_core::*;
use proptest::prelude::*;

fn small_field(values: Vec<f64>) -> (Grid, Field) {
    // 16 cells x 9 slices on a fixed geometry
    let g = make_grid(1, &[(-2.0, 2.0)], &[16], 0.0, 2.0, 8).unwrap();
    let need = g.time_len() * g.spatial_len();
    let vals: Vec<f64> = (0..need).map(|i| values[i % values.len()]).collect();
    let f = Field::new(g.clone(), vals, "p").unwrap();
    (g, f)
}

proptest! {
    #[test]
    fn levelset_partition(values in proptest::collection::vec(-3.0..3.0f64, 8..64),
                          k in -3.0..3.0f64) {
        let (g, f) = small_field(values);
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let below = levelset_measure(&f, &cyl, k, Side::Below);
        let above = levelset_measure(&f, &cyl, k, Side::Above);
        let cells = cyl.ball_cells(&g);
        let times = cyl.time_indices(&g);
        let at: usize = times
            .iter()
            .map(|&ti| cells.iter().filter(|&&c| f.at(ti, c) == k).count())
            .sum();
        let total = cyl.discrete_measure(&g);
        let sum = below + above + at as f64 * g.cell_measure();
        prop_assert!((sum - total).abs() < 1e-12 * total.max(1.0));
        // measures are exact cell-measure multiples
        let m = below / g.cell_measure();
        prop_assert!((m - m.round()).abs() < 1e-9);
    }

    #[test]
    fn weak_norm_dominated_by_strong(values in proptest::collection::vec(-5.0..5.0f64, 1..40),
                                     p in 1.1..5.0f64,
                                     vol in 0.05..2.0f64) {
        let weak = weak_lp_norm(&values, vol, p).unwrap();
        let strong = strong_lp_norm(&values, vol, p);
        prop_assert!(weak <= strong * (1.0 + 1e-12));
    }

    #[test]
    fn marcinkiewicz_sandwich(values in proptest::collection::vec(-5.0..5.0f64, 1..40),
                              p in 1.1..5.0f64) {
        let (lower_ok, upper_ok, _) = marcinkiewicz_bounds(&values, 0.3, p).unwrap();
        prop_assert!(lower_ok && upper_ok);
    }

    #[test]
    fn sublevel_iteration_monotone(values in proptest::collection::vec(0.1..2.0f64, 8..32)) {
        let (_, f) = small_field(values);
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = osc_stats(&f, &cyl).unwrap();
        if stats.osc == 0.0 {
            return Ok(());
        }
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let trace = yz_sequences(&f, &cyl, &stats, &e, IterationVariant::Sublevel, 6).unwrap();
        for w in trace.y.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        for (y, z) in trace.y.iter().zip(trace.z.iter()) {
            if *y == 0.0 {
                prop_assert!(*z == 0.0);
            }
        }
    }

    #[test]
    fn classify_invariant_under_scaling(values in proptest::collection::vec(0.1..2.0f64, 8..32),
                                        m_scale in 0.5..4.0f64,
                                        theta0 in 0.2..0.8f64) {
        // dividing values by M and stretching times by M^{m-1} maps level
        // sets cell-to-cell; a cylinder relabeled the same way covers the
        // identical index set, so the classification cannot change
        let (g, f) = small_field(values);
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = osc_stats(&f, &cyl).unwrap();
        if stats.osc == 0.0 {
            return Ok(());
        }
        let m = 2.0;
        let factor = m_scale.powf(m - 1.0);
        let scaled = scale_transform(&f, m_scale, m).unwrap();
        // same ball; the time length stretches by the factor through the
        // cylinder's own M (time length = rho^2 / M^{1-1/m})
        let scaled_cyl = IntrinsicCylinder {
            t0: cyl.t0 * factor,
            x0: cyl.x0.clone(),
            rho: cyl.rho,
            m_scale: cyl.m_scale / factor.powf(m / (m - 1.0)),
            m,
            theta0: None,
        };
        prop_assert_eq!(
            cyl.time_indices(&g).len(),
            scaled_cyl.time_indices(&scaled.grid).len()
        );
        let scaled_stats = OscStats {
            mu_plus: stats.mu_plus / m_scale,
            mu_minus: stats.mu_minus / m_scale,
            osc: stats.osc / m_scale,
            omega: stats.omega / m_scale,
            m_scale: stats.m_scale / m_scale,
        };
        let (a, fa) = alternative_classify(&f, &cyl, &stats, theta0).unwrap();
        let (b, fb) = alternative_classify(&scaled, &scaled_cyl, &scaled_stats, theta0).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((fa - fb).abs() < 1e-12);
    }

    #[test]
    fn osc_window_validation(mu_plus in 0.1..5.0f64, osc_frac in 0.1..1.0f64) {
        let osc = mu_plus * osc_frac;
        let stats = OscStats {
            mu_plus,
            mu_minus: mu_plus - osc,
            osc,
            omega: osc,
            m_scale: mu_plus,
        };
        // within the windows
        prop_assert!(stats.with_choices(osc * 1.2, mu_plus * 2.0).is_ok());
        // outside them
        prop_assert!(stats.with_choices(osc * 2.0, mu_plus).is_err());
        prop_assert!(stats.with_choices(osc, mu_plus * 3.5).is_err());
    }

    #[test]
    fn caccioppoli_terms_nonnegative_random(seed_vals in proptest::collection::vec(0.2..1.8f64, 8..32),
                                            k_frac in 0.05..0.45f64) {
        let (g, f) = small_field(seed_vals);
        let cyl = make_cylinder(2.0, &[0.0], 1.0, 1.0, 2.0, None).unwrap();
        let stats = osc_stats(&f, &cyl).unwrap();
        if stats.osc == 0.0 {
            return Ok(());
        }
        let e = derive_exponents(6.0, 6.0, 1).unwrap();
        let forcing = ForcingPair::zero(&g).unwrap();
        let k = stats.mu_minus + k_frac * stats.omega;
        let rep = caccioppoli_residual(
            &f, &forcing, &cyl, k, &CutoffSpec::default(),
            TruncationVariant::Sub, &stats, &e,
        ).unwrap();
        prop_assert!(rep.lhs >= 0.0);
        for t in rep.rhs_terms {
            prop_assert!(t >= 0.0);
        }
    }

    #[test]
    fn recursion_bound_random(c in 0.5..4.0f64, b in 1.0..8.0f64,
                              delta in 0.25..2.0f64, eps in 0.25..2.0f64,
                              y_frac in 0.05..1.0f64, z_frac in 0.05..1.0f64) {
        let p = RecursionParams::new(c, b, delta, eps).unwrap();
        let y0 = p.lambda * y_frac;
        let z0 = p.lambda.powf(1.0 / (1.0 + eps)) * z_frac;
        let t = recursion_lemma(&p, y0, z0, 40).unwrap();
        prop_assert!(t.thresholds_met);
        prop_assert!(t.bound_ok);
    }
}
