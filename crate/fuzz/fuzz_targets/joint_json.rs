//! Fuzzes the joint-distribution JSON decoder: parsing must never panic,
//! accepted joints must be rectangular with unit mass, and marginals must
//! themselves validate.

#![no_main]

use libfuzzer_sys::fuzz_target;
use sdpi::channels::JointDistribution;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(j) = serde_json::from_str::<JointDistribution>(text) {
        assert!(j.rows() > 0 && j.cols() > 0);
        let mut mass = 0.0;
        for r in 0..j.rows() {
            for c in 0..j.cols() {
                let v = j.prob(r, c);
                assert!(v >= 0.0);
                mass += v;
            }
        }
        assert!((mass - 1.0).abs() <= 1e-8);
        // Marginals of a valid joint must construct.
        j.marginal_rows().expect("row marginal");
        j.marginal_cols().expect("column marginal");
        let encoded = serde_json::to_string(&j).expect("serializes");
        let again: JointDistribution = serde_json::from_str(&encoded).expect("round-trips");
        assert_eq!(j, again);
    }
});
