use har_core::data::DesignMatrix;
use har_core::ncqr::{fit_ncqr, QuantileGrid};
use har_core::risk_metrics::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Midpoint rule on `nodes` equal cells of `[a, b]`.
fn quadrature(qf: &QuantileFunction, a: f64, b: f64, nodes: usize) -> f64 {
    let h = (b - a) / nodes as f64;
    (0..nodes).map(|i| qf.eval(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn random_fan(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = rng.random_range(-3.0..3.0);
    (0..9)
        .map(|_| {
            v += rng.random_range(0.0..1.5);
            v
        })
        .collect()
}

#[test]
fn tail_means_match_quadrature() {
    let grid = QuantileGrid::deciles();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let values = random_fan(&mut rng);
        let qf = QuantileFunction::new(&grid, &values).unwrap();
        // Knots fall on cell edges, so the midpoint rule is exact up to round-off.
        let es = quadrature(&qf, 0.0, 0.05, 100_000) / 0.05;
        let el = quadrature(&qf, 0.95, 1.0, 100_000) / 0.05;
        assert!((expected_shortfall(&qf, 0.05).unwrap() - es).abs() <= 1e-8);
        assert!((expected_longrise(&qf, 0.95).unwrap() - el).abs() <= 1e-8);
        // A level off the grid that splits a segment.
        let es2 = quadrature(&qf, 0.0, 0.37, 100_000) / 0.37;
        assert!((expected_shortfall(&qf, 0.37).unwrap() - es2).abs() <= 1e-8);
    }
}

#[test]
fn midpoint_between_knots_is_average() {
    let grid = QuantileGrid::deciles();
    let values: Vec<f64> = (0..9).map(|i| (i * i) as f64).collect();
    let qf = QuantileFunction::new(&grid, &values).unwrap();
    for i in 0..8 {
        let mid = (grid.taus()[i] + grid.taus()[i + 1]) / 2.0;
        assert!((qf.eval(mid) - (values[i] + values[i + 1]) / 2.0).abs() < 1e-12);
        assert_eq!(qf.eval(grid.taus()[i]), values[i]);
    }
}

#[test]
fn fitted_series_respects_ordering_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let raw: Vec<Vec<f64>> = (0..70).map(|_| vec![rng.random(), rng.random()]).collect();
    let y = raw.iter().map(|r| r[0] - r[1] + (0.2 + r[1]) * rng.random_range(-2.0..2.0)).collect();
    let d = DesignMatrix::from_raw(&["a".into(), "b".into()], raw, y).unwrap();
    let fit = fit_ncqr(&d, &QuantileGrid::deciles()).unwrap();
    let series = fitted_risk(&fit, &d, &RiskOptions::default()).unwrap();
    assert_eq!(series.len(), 70);
    for (p, row) in series.points.iter().zip(&d.predictors) {
        let qf = QuantileFunction::new(&fit.taus, &fit.evaluate_scaled(row).iter().scan(f64::NEG_INFINITY, |m, v| {
            *m = f64::max(*m, *v);
            Some(*m)
        }).collect::<Vec<_>>()).unwrap();
        assert!(p.u >= 0.0);
        assert!((-1.0..=1.0).contains(&p.s));
        assert_eq!(p.left + p.right, p.u);
        assert!(p.es <= qf.eval(0.05) + 1e-12);
        assert!(qf.eval(0.05) <= qf.eval(0.95));
        assert!(qf.eval(0.95) <= p.el + 1e-12);
    }
    let mut buf = Vec::new();
    series.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 72);
    assert!(text.starts_with("# columns: date,U,S,left,right,ES,EL\n"));
}

#[test]
fn degenerate_fan_collapses_to_median() {
    let grid = QuantileGrid::deciles();
    let p = risk_point(&grid, &[1.5; 9], &RiskOptions::default()).unwrap();
    assert!(p.degenerate);
    assert_eq!((p.u, p.s, p.es, p.el), (0.0, 0.0, 1.5, 1.5));
}

proptest! {
    #[test]
    fn decomposition_reproduces_half_widths(a in -5.0f64..5.0, d1 in 0.0f64..3.0, d2 in 0.0f64..3.0) {
        let (q10, q50, q90) = (a, a + d1, a + d1 + d2);
        prop_assume!(d1 + d2 > 0.0);
        let u = uncertainty(q10, q90).unwrap();
        let (l, r) = decompose(u, skewness(q10, q50, q90).value);
        prop_assert!((l - (q50 - q10)).abs() <= 1e-12 * (1.0 + u));
        prop_assert!((r - (q90 - q50)).abs() <= 1e-12 * (1.0 + u));
        prop_assert!((l + r - u).abs() <= 1e-15 * (1.0 + u));
    }

    #[test]
    fn raising_an_inner_quantile_never_lowers_tail_means(seed in 0u64..1000, pick in 0usize..7, frac in 0.0f64..1.0) {
        // Every level except the two that set the extrapolated tail slopes.
        let idx = [0usize, 2, 3, 4, 5, 6, 8][pick];
        let grid = QuantileGrid::deciles();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_fan(&mut rng);
        let mut raised = base.clone();
        raised[idx] += if idx == 8 { 2.0 * frac } else { frac * (base[idx + 1] - base[idx]) };
        let (a, b) = (QuantileFunction::new(&grid, &base).unwrap(), QuantileFunction::new(&grid, &raised).unwrap());
        prop_assert!(expected_longrise(&b, 0.95).unwrap() >= expected_longrise(&a, 0.95).unwrap() - 1e-12);
        prop_assert!(expected_shortfall(&b, 0.05).unwrap() >= expected_shortfall(&a, 0.05).unwrap() - 1e-12);
    }
}

#[test]
fn raising_the_level_next_to_a_tail_flattens_it() {
    // Lifting q(0.8) toward q(0.9) lowers the upper tail slope and hence EL.
    let grid = QuantileGrid::deciles();
    let base: Vec<f64> = (0..9).map(|i| i as f64).collect();
    let mut raised = base.clone();
    raised[7] = 7.9;
    let (a, b) = (QuantileFunction::new(&grid, &base).unwrap(), QuantileFunction::new(&grid, &raised).unwrap());
    assert!(expected_longrise(&b, 0.95).unwrap() < expected_longrise(&a, 0.95).unwrap());
}
