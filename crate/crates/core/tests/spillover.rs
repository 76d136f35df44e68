use har_core::data::Quarter;
use har_core::spillover::*;
use har_core::synth::{rng, RegimeSwitchVar};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

fn dates(n: usize) -> Vec<Quarter> {
    let start = Quarter::new(1990, 1).unwrap();
    (0..n).map(|i| start.offset(i as i64)).collect()
}

fn data(names: &[&str], values: Vec<Vec<f64>>) -> VarData {
    let n = values.len();
    VarData::new(names.iter().map(|s| s.to_string()).collect(), dates(n), values).unwrap()
}

fn model(a: DMatrix<f64>, sigma: DMatrix<f64>) -> VarModel {
    let n = a.nrows();
    VarModel {
        variables: (0..n).map(|i| format!("v{i}")).collect(),
        lag_order: 1,
        coefficients: vec![a],
        intercept: DVector::zeros(n),
        sigma,
        dates: Vec::new(),
        stable: true,
    }
}

fn random_stable(seed: u64, diagonal_sigma: bool) -> VarModel {
    let mut r = rng(seed);
    let a = DMatrix::from_fn(3, 3, |_, _| r.random_range(-0.25..0.25));
    let sigma = if diagonal_sigma {
        DMatrix::from_diagonal(&DVector::from_fn(3, |_, _| r.random_range(0.2..2.0)))
    } else {
        let b = DMatrix::from_fn(3, 3, |_, _| r.random_range(-1.0..1.0));
        &b * b.transpose() + DMatrix::identity(3, 3) * 0.1
    };
    model(a, sigma)
}

fn simulate(a: &DMatrix<f64>, len: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let n = a.nrows();
    let mut y = DVector::zeros(n);
    (0..len)
        .map(|_| {
            let e = DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
            y = a * &y + e;
            y.iter().copied().collect()
        })
        .collect()
}

#[test]
fn ar1_coefficient_recovered() {
    let a = DMatrix::from_element(1, 1, 0.5);
    for seed in 0..10 {
        let m = fit_var(&data(&["y"], simulate(&a, 500, seed)), 1).unwrap();
        assert!((m.coefficients[0][(0, 0)] - 0.5).abs() < 0.1, "seed {seed}");
        assert!(m.stable);
    }
}

#[test]
fn white_noise_has_small_dynamics() {
    let a = DMatrix::zeros(3, 3);
    for seed in 0..5 {
        let m = fit_var(&data(&["a", "b", "c"], simulate(&a, 500, seed)), 1).unwrap();
        assert!(m.coefficients[0].norm() < 0.2, "seed {seed}");
    }
}

#[test]
fn lag_zero_is_sample_covariance() {
    let v = vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![4.0, 1.0], vec![5.0, 2.0]];
    let m = fit_var(&data(&["a", "b"], v.clone()), 0).unwrap();
    assert!(m.coefficients.is_empty());
    let mean = [3.0, 1.0];
    for i in 0..2 {
        assert!((m.intercept[i] - mean[i]).abs() < 1e-12);
        for j in 0..2 {
            let c: f64 = v.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / 3.0;
            assert!((m.sigma[(i, j)] - c).abs() < 1e-12);
        }
    }
}

#[test]
fn ols_matches_normal_equations() {
    let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
    let v = simulate(&a, 60, 3);
    let m = fit_var(&data(&["a", "b"], v.clone()), 2).unwrap();
    // Independent solve via the normal equations.
    let t = v.len() - 2;
    let x = DMatrix::from_fn(t, 5, |r, c| match c {
        0 => 1.0,
        1 | 2 => v[r + 1][c - 1],
        _ => v[r][c - 3],
    });
    let y = DMatrix::from_fn(t, 2, |r, c| v[r + 2][c]);
    let b = (x.transpose() * &x).try_inverse().unwrap() * x.transpose() * &y;
    for i in 0..2 {
        assert!((m.intercept[i] - b[(0, i)]).abs() < 1e-9);
        for j in 0..2 {
            assert!((m.coefficients[0][(i, j)] - b[(1 + j, i)]).abs() < 1e-9);
            assert!((m.coefficients[1][(i, j)] - b[(3 + j, i)]).abs() < 1e-9);
        }
    }
    let resid = &y - &x * &b;
    let s = resid.transpose() * resid / (t - 4 - 1) as f64;
    assert!((&m.sigma - s).norm() < 1e-9);
}

#[test]
fn short_and_degenerate_inputs_rejected() {
    let v = vec![vec![1.0, 2.0]; 3];
    assert!(fit_var(&data(&["a", "b"], v), 1).is_err());
    let constant = vec![vec![1.0, 2.0]; 20];
    assert!(fit_var(&data(&["a", "b"], constant), 1).is_err());
}

#[test]
fn lag_selection_finds_first_order() {
    let a = DMatrix::from_row_slice(2, 2, &[0.6, 0.2, 0.0, 0.5]);
    let mut hits = 0;
    for seed in 0..10 {
        if select_lag_order(&data(&["a", "b"], simulate(&a, 300, seed)), 4).unwrap() == 1 {
            hits += 1;
        }
    }
    assert!(hits >= 8, "{hits}/10");
}

#[test]
fn ma_of_first_order_is_matrix_power() {
    let m = random_stable(1, false);
    let a = m.coefficients[0].clone();
    let phi = ma_coefficients(&m, 8);
    assert_eq!(phi[0], DMatrix::identity(3, 3));
    let mut p = DMatrix::identity(3, 3);
    for ph in &phi {
        assert!((ph - &p).norm() < 1e-12);
        p = &a * p;
    }
}

#[test]
fn fevd_rows_sum_to_one() {
    for seed in 0..20 {
        let m = random_stable(seed, false);
        for flag in [true, false] {
            let f = girf_fevd(&m, 12, flag).unwrap();
            for i in 0..3 {
                assert!((f.normalized.row(i).sum() - 1.0).abs() < 1e-10);
            }
            assert!(f.normalized.iter().all(|v| *v >= 0.0));
        }
    }
}

#[test]
fn single_variable_owns_its_variance() {
    let m = model(DMatrix::from_element(1, 1, 0.7), DMatrix::from_element(1, 1, 2.0));
    let f = girf_fevd(&m, 5, true).unwrap();
    assert!((f.normalized[(0, 0)] - 1.0).abs() < 1e-15);
}

#[test]
fn diagonal_sigma_matches_cholesky() {
    for seed in 0..20 {
        let m = random_stable(seed, true);
        let g = girf_fevd(&m, 10, true).unwrap();
        let c = cholesky_fevd(&m, 10).unwrap();
        assert!((&g.raw - &c.raw).amax() < 1e-10, "seed {seed}");
        assert!((&g.normalized - &c.normalized).amax() < 1e-10, "seed {seed}");
    }
}

#[test]
fn no_dynamics_gives_identity() {
    let m = model(DMatrix::zeros(3, 3), DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0, 0.5])));
    let f = girf_fevd(&m, 12, true).unwrap();
    assert!((&f.normalized - DMatrix::identity(3, 3)).amax() < 1e-15);
    let r = connectedness(&f);
    assert_eq!(r.total, 0.0);
}

#[test]
fn zero_variance_rejected() {
    let m = model(DMatrix::zeros(2, 2), DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])));
    assert!(girf_fevd(&m, 4, true).is_err());
    assert!(girf_fevd(&m, 0, true).is_err());
}

#[test]
fn generalized_fevd_is_ordering_invariant() {
    let perm = [2usize, 0, 1];
    for seed in 0..10 {
        let m = random_stable(seed, false);
        let pm = model(
            DMatrix::from_fn(3, 3, |i, j| m.coefficients[0][(perm[i], perm[j])]),
            DMatrix::from_fn(3, 3, |i, j| m.sigma[(perm[i], perm[j])]),
        );
        let f = girf_fevd(&m, 12, true).unwrap();
        let pf = girf_fevd(&pm, 12, true).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((pf.normalized[(i, j)] - f.normalized[(perm[i], perm[j])]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn pairwise_antisymmetric_and_totals_consistent() {
    for seed in 0..10 {
        let r = connectedness(&girf_fevd(&random_stable(seed, false), 12, true).unwrap());
        assert_eq!(r.pairwise.clone(), -r.pairwise.transpose());
        let to: f64 = r.to_others.iter().sum();
        let from: f64 = r.from_others.iter().sum();
        assert!((to - r.total).abs() < 1e-9 && (from - r.total).abs() < 1e-9);
        assert!(r.net().iter().sum::<f64>().abs() < 1e-9);
    }
}

#[test]
fn impulse_responses() {
    let m = random_stable(4, false);
    let a = m.coefficients[0].clone();
    for j in 0..3 {
        let irf = impulse_response(&m, 40, j).unwrap();
        let impact = m.sigma[(j, j)].sqrt();
        assert!((irf[0][j] - impact).abs() < 1e-12);
        let col = m.sigma.column(j) / impact;
        let mut p = DMatrix::identity(3, 3);
        for row in &irf {
            let expect = &p * &col;
            for i in 0..3 {
                assert!((row[i] - expect[i]).abs() < 1e-10);
            }
            p = &a * p;
        }
        assert!(irf[40].iter().all(|v| v.abs() < 1e-3 * impact));
    }
    let flat = model(DMatrix::zeros(2, 2), DMatrix::identity(2, 2));
    let irf = impulse_response(&flat, 3, 1).unwrap();
    assert!(irf[1..].iter().flatten().all(|v| *v == 0.0));
    assert!(impulse_response(&flat, 3, 2).is_err());
}

#[test]
fn rolling_window_count_and_dates() {
    let a = DMatrix::from_element(2, 2, 0.1);
    let d = data(&["a", "b"], simulate(&a, 10, 0));
    let pts = rolling_spillover(&d, 10, 1, 12, true).unwrap();
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0].date, d.dates[9]);
    let d = data(&["a", "b"], simulate(&a, 30, 0));
    let pts = rolling_spillover(&d, 10, 1, 12, true).unwrap();
    assert_eq!(pts.len(), 21);
    assert!(pts.windows(2).all(|w| w[0].date < w[1].date));
    assert!(rolling_spillover(&d, 3, 1, 12, true).is_err());
    assert!(rolling_spillover(&d, 31, 1, 12, true).is_err());
}

#[test]
fn constant_series_gives_gaps() {
    let d = data(&["a", "b"], vec![vec![1.0, 2.0]; 15]);
    let pts = rolling_spillover(&d, 10, 1, 12, true).unwrap();
    assert_eq!(pts.len(), 6);
    assert!(pts.iter().all(|p| p.report.is_err()));
    let mut buf = Vec::new();
    write_rolling_csv(&d.names, &pts, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(",gap,")).count(), 6);
}

#[test]
fn spillover_rises_after_regime_switch() {
    let dgp = RegimeSwitchVar::default();
    let mut rises = 0;
    for seed in 0..20 {
        let v: Vec<Vec<f64>> = dgp.simulate(120, seed).unwrap().iter().map(|r| r.to_vec()).collect();
        let d = data(&["a", "b", "c"], v);
        let pts = rolling_spillover(&d, 10, 1, 12, true).unwrap();
        // Windows ending before the switch versus those starting after it.
        let mean = |sel: &[RollingPoint]| {
            let ok: Vec<f64> = sel.iter().filter_map(|p| p.report.as_ref().ok().map(|r| r.total)).collect();
            ok.iter().sum::<f64>() / ok.len() as f64
        };
        let before = mean(&pts[..51]);
        let after = mean(&pts[60..]);
        if after > before {
            rises += 1;
        }
    }
    assert!(rises >= 18, "{rises}/20");
}

#[test]
fn csv_layouts() {
    let m = random_stable(2, false);
    let mut buf = Vec::new();
    write_irf_csv(&m, 4, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("# columns: shock,horizon,v0,v1,v2\n"));
    assert_eq!(text.lines().count(), 2 + 3 * 5);
    let mut buf = Vec::new();
    write_fevd_csv(&m.variables, &girf_fevd(&m, 12, true).unwrap(), &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
}
