use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crowdmec::incentive::{
    expected_gain, penalty, reward, truthful_expected_gain, try_reward, Belief, Order,
};
use crowdmec::Error;

fn order(k: u32) -> Order {
    Order::new(k).unwrap()
}

fn belief(x: f64) -> Belief {
    Belief::new(x).unwrap()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow(base: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * base)
}

/// Unreduced reward and penalty in exact arithmetic, with 2^k and x^k kept apart.
fn exact_reward_penalty(k: u32, x: &BigRational) -> (BigRational, BigRational) {
    let kk = rat(k as i64, 1);
    let two_k = pow(&rat(2, 1), k);
    let den = &two_k - &kk - BigRational::one();
    let r = (-(&kk - BigRational::one()) * &two_k * pow(x, k) + &two_k * &kk * pow(x, k - 1)
        - (&kk + BigRational::one()))
        / &den;
    let p = ((&kk - BigRational::one()) * &two_k * pow(x, k) - (&kk - BigRational::one())) / &den;
    (r, p)
}

#[test]
fn matches_exact_rational_oracle() {
    for k in [2, 3, 4, 5, 8, 10, 16, 24] {
        for n in (5000..=10000).step_by(125) {
            let xr = rat(n, 10000);
            let x = n as f64 / 10000.0;
            let (r, p) = exact_reward_penalty(k, &xr);
            let (r, p) = (r.to_f64().unwrap(), p.to_f64().unwrap());
            let tol = |v: f64| 1e-12 * v.abs().max(1.0);
            assert!((reward(order(k), belief(x)) - r).abs() <= tol(r), "reward k={k} x={x}");
            assert!((penalty(order(k), belief(x)) - p).abs() <= tol(p), "penalty k={k} x={x}");
        }
    }
}

#[test]
fn worked_values() {
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    assert!(close(reward(order(2), belief(0.75)), 0.75));
    assert!(close(reward(order(3), belief(0.75)), 0.6875));
    assert!(close(penalty(order(2), Belief::ONE), 3.0));
    assert!(close(penalty(order(3), Belief::ONE), 3.5));
    assert!(close(expected_gain(order(2), belief(0.75), belief(0.75)), 0.25));
    assert!(close(expected_gain(order(2), Belief::ONE, Belief::HALF), -1.0));
    assert!(close(truthful_expected_gain(order(3), belief(0.75)), 0.21875));
}

#[test]
fn boundary_identities() {
    for k in 2..=10 {
        assert!(reward(order(k), Belief::HALF).abs() <= 1e-12);
        assert!(penalty(order(k), Belief::HALF).abs() <= 1e-12);
        assert!((reward(order(k), Belief::ONE) - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn reward_and_penalty_increase_in_x() {
    for k in 2..=10 {
        let xs: Vec<f64> = (0..=500).map(|i| 0.5 + i as f64 * 1e-3).collect();
        for w in xs.windows(2) {
            let (a, b) = (belief(w[0]), belief(w[1]));
            assert!(reward(order(k), b) > reward(order(k), a), "reward k={k} x={}", w[0]);
            assert!(penalty(order(k), b) > penalty(order(k), a), "penalty k={k} x={}", w[0]);
        }
    }
}

#[test]
fn truthful_gain_is_a_monotone_weight() {
    for k in 2..=10 {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let g = truthful_expected_gain(order(k), belief(0.5 + i as f64 * 5e-4));
            assert!((-1e-12..=1.0 + 1e-12).contains(&g));
            assert!(g >= prev - 1e-15);
            prev = g;
        }
    }
}

#[test]
fn large_orders_stay_finite() {
    let k = order(64);
    for x in [0.5, 0.75, 0.99, 1.0] {
        assert!(reward(k, belief(x)).is_finite());
        assert!(penalty(k, belief(x)).is_finite());
    }
    assert!((reward(k, Belief::ONE) - 1.0).abs() <= 1e-12);
}

#[test]
fn domain_errors_name_parameter() {
    assert!(matches!(try_reward(1, 0.7), Err(Error::Domain { param: "k", .. })));
    assert!(matches!(try_reward(2, 0.4), Err(Error::Domain { param: "x", .. })));
    assert!(matches!(try_reward(65, 0.7), Err(Error::Domain { param: "k", .. })));
}
