use proptest::prelude::*;

use opb_core::{DataPoint, LossFamily, LossSpec};

fn family() -> impl Strategy<Value = LossFamily> {
    prop_oneof![Just(LossFamily::Hinge), Just(LossFamily::Squared)]
}

fn instance(max_d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (1..=max_d).prop_flat_map(|d| {
        (
            prop::collection::vec(-3.0..3.0f64, d),
            prop::collection::vec(-3.0..3.0f64, d),
            -2.0..2.0f64,
        )
    })
}

fn label(family: LossFamily, y: f64) -> f64 {
    match family {
        LossFamily::Hinge if y >= 0.0 => 1.0,
        LossFamily::Hinge => -1.0,
        LossFamily::Squared => y,
    }
}

fn prox_objective(loss: &LossSpec<f64>, u: &[f64], v: &[f64], z: &DataPoint<f64>, tau: f64) -> f64 {
    let d: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    loss.raw_unchecked(u, z) + d / (2.0 * tau)
}

proptest! {
    #[test]
    fn eval_stays_in_range(fam in family(), (h, x, y) in instance(6), k in 0.1..50.0f64) {
        let loss = LossSpec::new(fam, k).unwrap();
        let z = DataPoint::new(x, label(fam, y));
        let v = loss.eval(&h, &z).unwrap();
        prop_assert!((0.0..=k).contains(&v));
    }

    #[test]
    fn prox_beats_its_neighbourhood(
        fam in family(),
        (v, x, y) in instance(5),
        tau in 0.01..5.0f64,
        dirs in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 5), 40),
    ) {
        let loss = LossSpec::new(fam, 1e9).unwrap();
        let z = DataPoint::new(x, label(fam, y));
        let u = loss.prox(&z, &v, tau).unwrap();
        let best = prox_objective(&loss, &u, &v, &z, tau);
        for dir in &dirs {
            for scale in [1e-4, 1e-2, 0.3] {
                let p: Vec<f64> = u.iter().zip(dir).map(|(a, b)| a + scale * b).collect();
                prop_assert!(best <= prox_objective(&loss, &p, &v, &z, tau) + 1e-9);
            }
        }
    }

    #[test]
    fn prox_is_non_expansive(
        fam in family(),
        (v1, x, y) in instance(5),
        shift in prop::collection::vec(-2.0..2.0f64, 5),
        tau in 0.01..5.0f64,
    ) {
        let loss = LossSpec::new(fam, 10.0).unwrap();
        let z = DataPoint::new(x, label(fam, y));
        let v2: Vec<f64> = v1.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let p1 = loss.prox(&z, &v1, tau).unwrap();
        let p2 = loss.prox(&z, &v2, tau).unwrap();
        let dp: f64 = p1.iter().zip(&p2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let dv: f64 = v1.iter().zip(&v2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!(dp <= dv + 1e-12);
    }

    #[test]
    fn subgradient_matches_central_differences(fam in family(), (h, x, y) in instance(5)) {
        let loss = LossSpec::new(fam, 1e9).unwrap();
        let z = DataPoint::new(x, label(fam, y));
        let margin: f64 = h.iter().zip(&z.x).map(|(a, b)| a * b).sum::<f64>() * z.y;
        // the hinge is not differentiable near the kink
        prop_assume!(fam == LossFamily::Squared || (margin - 1.0).abs() > 1e-3);
        let g = loss.subgradient(&h, &z).unwrap();
        let step = 1e-6;
        for j in 0..h.len() {
            let mut hp = h.clone();
            hp[j] += step;
            let mut hm = h.clone();
            hm[j] -= step;
            let fd = (loss.raw_unchecked(&hp, &z) - loss.raw_unchecked(&hm, &z)) / (2.0 * step);
            prop_assert!((fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1.0), "coord {j}: {fd} vs {}", g[j]);
        }
    }
}

#[test]
fn clipping_caps_the_value_and_flattens_the_plateau() {
    let loss = LossSpec::squared(1.0).unwrap();
    let z = DataPoint::new(vec![1.0], 5.0);
    assert_eq!(loss.eval(&[0.0], &z).unwrap(), 1.0);
    assert_eq!(loss.raw(&[0.0], &z).unwrap(), 25.0);
    assert_eq!(loss.subgradient(&[0.0], &z).unwrap(), vec![0.0]);
    // the prox ignores the threshold
    assert_eq!(loss.prox(&z, &[0.0], 0.25).unwrap(), vec![5.0 / 3.0]);
}
