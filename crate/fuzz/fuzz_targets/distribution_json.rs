//! Fuzzes the distribution JSON decoder: parsing must never panic, and an
//! accepted distribution must be a valid probability vector that round-trips.

#![no_main]

use libfuzzer_sys::fuzz_target;
use sdpi::probcore::Distribution;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = serde_json::from_str::<Distribution>(text) {
        assert!(!p.as_slice().is_empty());
        let mass: f64 = p.as_slice().iter().sum();
        assert!((mass - 1.0).abs() <= 1e-9);
        assert!(p.as_slice().iter().all(|&v| v >= 0.0));
        let encoded = serde_json::to_string(&p).expect("serializes");
        let again: Distribution = serde_json::from_str(&encoded).expect("round-trips");
        assert_eq!(p, again);
    }
});
