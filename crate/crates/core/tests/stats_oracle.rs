use proptest::prelude::*;
use scaffolding_core::stats::{
    f_upper_p, one_way_ancova, one_way_anova, pooled_t_test, t_two_sided_p,
};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

#[test]
fn ancova_worked_example() {
    // Sums of squares by hand: within-group Sxx = 20, Sxy = 28, Syy = 40.4,
    // so the common slope is 1.4 and the residual SS is 40.4 - 28^2/20 = 1.2.
    // Totals: Sxx = 22.5, Sxy = 22.5, Syy = 52.5, residual 52.5 - 22.5 = 30.
    let a = [(3.0, 8.0), (5.0, 11.0), (2.0, 7.0), (6.0, 13.0), (4.0, 9.0)];
    let b = [(4.0, 6.0), (6.0, 9.0), (3.0, 5.0), (7.0, 10.0), (5.0, 7.0)];
    let r = one_way_ancova(&a, &b).unwrap();
    assert!((r.slope - 1.4).abs() < 1e-12);
    assert!((r.ss_residual - 1.2).abs() < 1e-9);
    let ss_res_total = 52.5 - 22.5f64.powi(2) / 22.5;
    assert!((r.ss_adjusted_between - (ss_res_total - 1.2)).abs() < 1e-9);
    assert!((r.test.statistic - 168.0).abs() < 1e-6);
    assert_eq!(r.test.df, (1.0, 7.0));
    // Frozen from a reference OLS fit (y ~ x + group).
    assert!((r.ss_adjusted_between - 28.8).abs() < 1e-9);
    assert!((r.test.p_value - 3.78454536956e-06).abs() < 1e-12);
    assert!((r.adjusted_means.0 - r.adjusted_means.1 - 3.6).abs() < 1e-12);
}

#[test]
fn ancova_with_orthogonal_covariate_reduces_to_anova() {
    let ya = [3.0, 5.0, 4.0, 6.0];
    let yb = [1.0, 2.0, 2.0, 3.0];
    // Covariate centred within each group and orthogonal to the outcome.
    let xa = [1.0, -1.0, -1.0, 1.0];
    let xb = [1.0, -1.0, -1.0, 1.0];
    let a: Vec<_> = xa.iter().copied().zip(ya).collect();
    let b: Vec<_> = xb.iter().copied().zip(yb).collect();
    let anova = one_way_anova(&ya, &yb).unwrap();
    let ancova = one_way_ancova(&a, &b).unwrap();
    assert!(ancova.slope.abs() < 1e-12);
    let n = 8.0;
    let ss_between = anova.statistic * ancova.ss_residual / (n - 2.0);
    assert!((ancova.ss_adjusted_between - ss_between).abs() < 1e-9);
    // Same sums of squares; the covariate costs one residual df.
    assert!((ancova.test.statistic - anova.statistic * (n - 3.0) / (n - 2.0)).abs() < 1e-9);
}

proptest! {
    #[test]
    fn anova_f_is_t_squared(
        a in prop::collection::vec(-50.0f64..50.0, 2..15),
        b in prop::collection::vec(-50.0f64..50.0, 2..15),
    ) {
        let (Ok(f), Ok(t)) = (one_way_anova(&a, &b), pooled_t_test(&a, &b)) else {
            return Ok(());
        };
        prop_assert!((f.statistic - t.statistic.powi(2)).abs() <= 1e-9 * f.statistic.max(1.0));
        prop_assert!((f.p_value - t.p_value).abs() < 1e-9);
        prop_assert!((f.effect_size - t.effect_size).abs() < 1e-9);
    }

    #[test]
    fn t_p_values_match_reference(t in -40.0f64..40.0, df in 1u32..300) {
        let dist = StudentsT::new(0.0, 1.0, df as f64).unwrap();
        let reference = 2.0 * dist.cdf(-t.abs());
        prop_assert!((t_two_sided_p(t, df as f64) - reference).abs() < 1e-9);
    }

    #[test]
    fn f_p_values_match_reference(f in 0.0f64..200.0, d1 in 1u32..10, d2 in 1u32..300) {
        let dist = FisherSnedecor::new(d1 as f64, d2 as f64).unwrap();
        let reference = dist.sf(f);
        prop_assert!((f_upper_p(f, d1 as f64, d2 as f64) - reference).abs() < 1e-9);
    }

    #[test]
    fn swapping_groups_negates_t(
        a in prop::collection::vec(-5.0f64..5.0, 2..10),
        b in prop::collection::vec(-5.0f64..5.0, 2..10),
    ) {
        if let (Ok(x), Ok(y)) = (pooled_t_test(&a, &b), pooled_t_test(&b, &a)) {
            prop_assert!((x.statistic + y.statistic).abs() < 1e-12);
            prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
        }
    }
}
