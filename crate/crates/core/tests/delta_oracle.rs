//! Big-integer fixed-point recomputation of the reference triple at
//! (η, η̂, π, α, γ) = (1/2, 1/2, 1/2, 1, 1).

use num_bigint::BigInt;
use synthmix::theory::{solve_deltas, DeltaInputs, SolverOptions};

const DIGITS: u32 = 80;

struct Fixed {
    scale: BigInt,
}

impl Fixed {
    fn new() -> Self {
        Fixed { scale: BigInt::from(10).pow(DIGITS) }
    }
    fn from_ratio(&self, num: i64, den: i64) -> BigInt {
        &self.scale * num / den
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b / &self.scale
    }
    fn div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * &self.scale / b
    }
    fn to_f64(&self, a: &BigInt) -> f64 {
        // 17 significant digits are plenty for comparison against f64.
        let shifted: BigInt = a / BigInt::from(10).pow(DIGITS - 18);
        shifted.to_string().parse::<f64>().unwrap() / 1e18
    }
}

#[test]
fn reference_triple_matches_big_integer_iteration() {
    let fx = Fixed::new();
    let half = fx.from_ratio(1, 2);
    let one = fx.from_ratio(1, 1);
    let (eta, eta_hat, pi, alpha, gamma) = (half.clone(), half.clone(), half.clone(), one.clone(), one.clone());
    let weight = fx.mul(&alpha, &(&one - &pi));

    let (mut r, mut s, mut g) = (BigInt::from(0), BigInt::from(0), BigInt::from(0));
    let tol = fx.from_ratio(1, 1) / BigInt::from(10).pow(40);
    let mut converged = false;
    for _ in 0..10_000 {
        let b = &gamma + fx.div(&pi, &(&one + &r)) + fx.div(&weight, &fx.mul(&(&one + &s), &(&one + &g)));
        let r_new = fx.div(&eta, &b);
        let s_new = fx.div(&fx.mul(&alpha, &r_new), &(&one + &g));
        let g_new = fx.div(&fx.mul(&weight, &eta_hat), &fx.mul(&(&one + &s_new), &b));
        let step = [(&r_new - &r), (&s_new - &s), (&g_new - &g)]
            .into_iter()
            .map(|d| if d < BigInt::from(0) { -d } else { d })
            .max()
            .unwrap();
        r = r_new;
        s = s_new;
        g = g_new;
        if step < tol {
            converged = true;
            break;
        }
    }
    assert!(converged);

    let want = (fx.to_f64(&r), fx.to_f64(&s), fx.to_f64(&g));
    assert!((want.0 - 0.286_411_941_945_375_47).abs() < 1e-16);
    assert!((want.1 - 0.257_121_726_287_490_14).abs() < 1e-16);
    assert!((want.2 - 0.113_915_755_314_802_41).abs() < 1e-16);

    let inputs = DeltaInputs { eta: 0.5, eta_hat: 0.5, pi: 0.5, alpha: 1.0, gamma: 1.0 };
    let d = solve_deltas(inputs, SolverOptions::default()).unwrap();
    assert!((d.delta_r - want.0).abs() < 1e-13);
    assert!((d.delta_s - want.1).abs() < 1e-13);
    assert!((d.delta_g - want.2).abs() < 1e-13);
}
