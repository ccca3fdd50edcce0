//! Randomized invariants for information curves: repairs produce valid
//! curves and never lower a feasible point, evaluation respects the
//! concavity envelope, and the binary symmetric step behaves like a
//! single-use information bound.

use proptest::prelude::*;

use sdpi::ficurve::{bsc_step, Curve, CURVE_TOL};

/// Strictly increasing positive grid plus arbitrary raw values in [0, 2t].
fn raw_curve_data() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((0.01f64..1.0, 0.0f64..2.0), 2..12).prop_map(|pairs| {
        let mut t_acc = 0.0;
        let mut ts = Vec::with_capacity(pairs.len());
        let mut fs = Vec::with_capacity(pairs.len());
        for (dt, frac) in pairs {
            t_acc += dt;
            ts.push(t_acc);
            fs.push(frac * t_acc);
        }
        (ts, fs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Repair always yields a valid curve that dominates the clipped input.
    #[test]
    fn repair_produces_valid_dominating_curve((ts, fs) in raw_curve_data()) {
        let curve = Curve::repair_lower_bound(ts.clone(), fs.clone()).unwrap();
        for (i, (&t, &f)) in ts.iter().zip(fs.iter()).enumerate() {
            let clipped = f.max(0.0).min(t);
            prop_assert!(
                curve.values()[i] >= clipped - 1e-12,
                "repair lowered point {i}: {} < {clipped}",
                curve.values()[i]
            );
            prop_assert!((curve.args()[i] - t).abs() < 1e-15);
        }
        // Idempotence: repairing a repaired curve changes nothing.
        let again = Curve::repair_lower_bound(curve.args().to_vec(), curve.values().to_vec()).unwrap();
        for i in 0..ts.len() {
            prop_assert!((again.values()[i] - curve.values()[i]).abs() < 1e-12);
        }
    }

    /// Evaluation is monotone, 1-Lipschitz from above, and ratio-monotone:
    /// the defining invariants extend from knots to every evaluated point.
    #[test]
    fn eval_respects_envelope((ts, fs) in raw_curve_data(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let curve = Curve::repair_lower_bound(ts, fs).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let flo = curve.eval(lo).unwrap();
        let fhi = curve.eval(hi).unwrap();
        prop_assert!(flo <= fhi + CURVE_TOL, "F not nondecreasing: {flo} > {fhi}");
        prop_assert!(fhi - flo <= (hi - lo) + 1e-9, "slope above 1");
        prop_assert!(flo >= -CURVE_TOL && flo <= lo + 1e-9, "outside [0, t]");
        // The ratio law is an in-domain property: past the last knot the
        // curve continues with unit slope, where F/t may rise again.
        if lo > 1e-9 && hi <= curve.domain_max() {
            prop_assert!(
                flo / lo + 1e-6 >= fhi / hi,
                "F/t increased: {} to {}",
                flo / lo,
                fhi / hi
            );
        }
    }

    /// The binary symmetric dissipation step stays inside [0, t], is
    /// nondecreasing in t, and dissipates more as the channel gets noisier.
    #[test]
    fn bsc_step_envelope(t in 0.0f64..3.0, delta in 0.005f64..=0.5, bump in 0.001f64..0.3) {
        let f = bsc_step(t, delta).unwrap();
        prop_assert!((-1e-12..=t + 1e-12).contains(&f));
        let f_more = bsc_step(t + bump, delta).unwrap();
        prop_assert!(f_more >= f - 1e-9, "dissipation decreased in t");
        let noisier = (delta + bump).min(0.5);
        let f_noisy = bsc_step(t, noisier).unwrap();
        prop_assert!(f_noisy >= f - 1e-9, "dissipation shrank with extra noise");
    }
}
