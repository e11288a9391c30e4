use nbl_core::data::{zaire_dataset, REFERENCE};
use nbl_core::error::Error;
use nbl_core::estimate::{fit_mle, CountData};
use nbl_core::gof::*;
use nbl_core::nbl::NblParams;

fn p(r: f64, theta: f64) -> NblParams {
    NblParams::new(r, theta).unwrap()
}

#[test]
fn expected_counts_at_published_parameters() {
    let e = expected_counts(&zaire_dataset(), p(0.486, 6.381)).unwrap();
    let want = [3719.060617, 232.791491, 36.549486, 8.200576, 2.262609, 0.717656];
    assert_eq!(e.cells.len(), 6);
    for ((x, v), w) in e.cells.iter().zip(want) {
        assert!((v - w).abs() < 1e-5, "x={x}: {v}");
    }
    let total: f64 = e.cells.iter().map(|c| c.1).sum::<f64>() + e.tail;
    assert!((total - 4000.0).abs() < 1e-6);
    assert!((e.tail - 0.4176).abs() < 1e-3);
}

#[test]
fn expected_counts_at_the_fit_match_the_table() {
    let d = zaire_dataset();
    let fit = fit_mle(&d, p(0.5, 6.5)).unwrap();
    let e = expected_counts(&d, fit.params).unwrap();
    for ((_, v), w) in e.cells.iter().zip(REFERENCE.nbl.expected) {
        assert!((v - w).abs() <= 0.05, "{v} vs {w}");
    }
}

#[test]
fn chi_square_at_the_fit() {
    let d = zaire_dataset();
    let fit = fit_mle(&d, p(0.5, 6.5)).unwrap();
    let g = chi_square_test(&d, fit.params, 2).unwrap();
    assert_eq!(g.cells.len(), 4);
    assert_eq!(g.cells[3].label, "3-5");
    assert_eq!(g.cells[3].observed, 11);
    assert_eq!(g.dof, 1);
    assert!(
        (g.chi_square - REFERENCE.nbl.chi_square).abs() <= 0.01,
        "{}",
        g.chi_square
    );
    assert!(
        (100.0 * g.p_value - REFERENCE.nbl.p_value_percent).abs() <= 1.0,
        "{}",
        g.p_value
    );
    assert!((g.log_likelihood.unwrap() - REFERENCE.nbl.log_likelihood).abs() < 0.01);
    let observed: u64 = g.cells.iter().map(|c| c.observed).sum();
    assert_eq!(observed, 4000);
}

#[test]
fn pooled_tail_variant() {
    let d = zaire_dataset();
    let g = chi_square_test_with(&d, p(0.486, 6.381), 2, TailCell::Pooled).unwrap();
    assert_eq!(g.cells.last().unwrap().label, "3+");
    let total: f64 = g.cells.iter().map(|c| c.expected).sum();
    assert!((total - 4000.0).abs() < 1e-6);
    assert!((g.chi_square - 0.0911).abs() < 1e-3);
    let omitted = chi_square_test(&d, p(0.486, 6.381), 2).unwrap();
    assert!((omitted.chi_square - 0.0632).abs() < 1e-3);
}

#[test]
fn competing_models_from_their_expected_columns() {
    let observed = [3719, 232, 38, 7, 4];
    for (fit, want) in [
        (REFERENCE.negative_binomial, REFERENCE.negative_binomial.chi_square),
        (
            REFERENCE.poisson_inverse_gaussian,
            REFERENCE.poisson_inverse_gaussian.chi_square,
        ),
    ] {
        let e = fit.expected;
        let listed: f64 = e.iter().sum();
        let expected = [e[0], e[1], e[2], e[3], e[4] + e[5] + (4000.0 - listed)];
        let g = chi_square_from_expected(&observed, &expected, 2).unwrap();
        assert!((g.chi_square - want).abs() <= 0.02, "{} vs {want}", g.chi_square);
        assert!((100.0 * g.p_value - fit.p_value_percent).abs() <= 1.0);
        assert!(g.log_likelihood.is_none());
    }
}

#[test]
fn perfect_fit_scores_zero() {
    let params = p(1.0, 2.0);
    let scratch = CountData::new(vec![(0, 1), (8, 1)]).unwrap();
    let e = expected_counts(&scratch, params).unwrap();
    let obs: Vec<u64> = e.cells.iter().map(|c| (c.1 * 1e6).round() as u64).collect();
    let exp: Vec<f64> = obs.iter().map(|&o| o as f64).collect();
    let g = chi_square_from_expected(&obs, &exp, 2).unwrap();
    assert_eq!(g.chi_square, 0.0);
    assert_eq!(g.p_value, 1.0);
}

#[test]
fn p_value_falls_as_statistic_grows() {
    let mut prev = 1.0;
    for k in 1..100 {
        let v = chi_square_p_value(0.2 * k as f64, 3).unwrap();
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn bad_tables() {
    assert!(matches!(
        chi_square_from_expected(&[1, 2], &[1.0], 1),
        Err(Error::InvalidData(_))
    ));
    assert!(matches!(
        chi_square_from_expected(&[1, 2], &[1.0, 0.0], 1),
        Err(Error::InvalidData(_))
    ));
    assert!(matches!(
        chi_square_from_expected(&[1, 2], &[1.0, 2.0], 2),
        Err(Error::InsufficientCells(_))
    ));
    let tiny = CountData::new(vec![(0, 3), (1, 1)]).unwrap();
    assert!(matches!(
        chi_square_test(&tiny, p(1.0, 2.0), 2),
        Err(Error::InsufficientCells(_))
    ));
}

#[test]
fn table_rendering() {
    let g = chi_square_test(&zaire_dataset(), p(0.486, 6.381), 2).unwrap();
    let t = g.to_table();
    assert!(t.contains("3-5"));
    assert!(t.contains("chi-square 0.06"));
    assert!(t.contains("log-likelihood"));
}

#[test]
fn large_theta_puts_everything_at_zero() {
    let e = expected_counts(&zaire_dataset(), p(1.0, 1e6)).unwrap();
    assert!(e.cells[0].1 > 3999.99);
    let total: f64 = e.cells.iter().map(|c| c.1).sum::<f64>() + e.tail;
    assert!((total - 4000.0).abs() < 1e-6);
}
