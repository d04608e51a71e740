use proptest::prelude::*;

use opb_core::bounds::{
    lambda_grid_select, main_bound_rhs, naive_bound_rhs, opb_test_rhs, opb_train_rhs, opbd_test_rhs,
    optimal_lambda_test, PhiVariant,
};

fn params() -> impl Strategy<Value = (f64, f64, usize, f64, f64)> {
    (0.0..1e3f64, 1e-3..10.0f64, 1usize..5000, 0.1..100.0f64, 1e-4..0.9f64)
}

proptest! {
    #[test]
    fn totals_grow_with_each_term_and_shrink_with_delta(
        (emp, lambda, m, k, delta) in params(),
        bump in 1e-3..10.0f64,
        kl in prop::collection::vec(0.0..5.0f64, 1..20),
    ) {
        let base = main_bound_rhs(emp, &kl, lambda, m, k, delta).unwrap().total;
        prop_assert!(main_bound_rhs(emp + bump, &kl, lambda, m, k, delta).unwrap().total > base);
        let mut more = kl.clone();
        more[0] += bump;
        prop_assert!(main_bound_rhs(emp, &more, lambda, m, k, delta).unwrap().total > base);
        prop_assert!(main_bound_rhs(emp, &kl, lambda, m, k * (1.0 + bump), delta).unwrap().total > base);
        prop_assert!(main_bound_rhs(emp, &kl, lambda, m, k, delta * 1.05).unwrap().total < base);
        let t = opb_test_rhs(emp, lambda, m, k, delta).unwrap().total;
        prop_assert!(opb_test_rhs(emp, lambda, m, k, delta * 1.05).unwrap().total < t);
        for v in [PhiVariant::Phi1Test, PhiVariant::Phi2Test] {
            let p = opbd_test_rhs(v, emp, lambda, m, k, delta).unwrap().total;
            prop_assert!(opbd_test_rhs(v, emp, lambda, m, k * 1.1, delta).unwrap().total > p);
            prop_assert!(opbd_test_rhs(v, emp, lambda, m, k, delta * 1.05).unwrap().total < p);
        }
    }

    #[test]
    fn zero_kl_main_bound_is_the_test_bound((emp, lambda, m, k, delta) in params()) {
        let zeros = vec![0.0; m];
        let main = main_bound_rhs(emp, &zeros, lambda, m, k, delta).unwrap();
        let test = opb_test_rhs(emp, lambda, m, k, delta).unwrap();
        prop_assert!((main.total - test.total).abs() <= 1e-12 * test.total.abs().max(1.0));
        let train = opb_train_rhs(emp, &zeros, lambda, m, k, delta).unwrap();
        prop_assert_eq!(train.total, main.total);
    }

    #[test]
    fn optimal_penalty_is_closed_form(m in 1usize..100_000, k in 0.01..1e3f64, delta in 1e-6..0.99f64) {
        let l = optimal_lambda_test(m, k, delta).unwrap();
        let r = opb_test_rhs(0.0, l, m, k, delta).unwrap();
        let want = (2.0 * m as f64 * k * k * (1.0 / delta).ln()).sqrt();
        prop_assert!((r.penalty() - want).abs() <= 1e-12 * want);
        // and it is the minimiser
        for f in [0.9, 1.1] {
            prop_assert!(opb_test_rhs(0.0, l * f, m, k, delta).unwrap().total >= r.total);
        }
    }

    #[test]
    fn naive_never_below_main((emp, lambda, m, k, delta) in params(), kl in 0.0..3.0f64) {
        let kls = vec![kl; m];
        let main = main_bound_rhs(emp, &kls, lambda, m, k, delta).unwrap().total;
        let naive = naive_bound_rhs(emp, &kls, lambda, m, k, delta).unwrap().total;
        prop_assert!(naive >= main);
    }

    #[test]
    fn grid_choice_is_the_grid_minimum(
        grid in prop::collection::vec(1e-4..1.0f64, 1..12),
        m in 1usize..1000,
        emp in 0.0..100.0f64,
    ) {
        let (k, delta) = (1.0, 0.05);
        let (_, chosen) = lambda_grid_select(&grid, m, k, delta, |_| emp).unwrap();
        let each = delta / grid.len() as f64;
        for &l in &grid {
            prop_assert!(chosen.total <= opb_test_rhs(emp, l, m, k, each).unwrap().total);
        }
    }
}

#[test]
fn optimal_scale_example() {
    let l: f64 = optimal_lambda_test(1000, 1.0, 0.05).unwrap();
    assert!((l - 0.077_404_55).abs() < 1e-6, "{l}");
}
