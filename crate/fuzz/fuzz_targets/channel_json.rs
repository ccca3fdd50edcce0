//! Fuzzes the channel JSON decoder: parsing must never panic, and an
//! accepted channel must satisfy its invariants and round-trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use sdpi::channels::Channel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ch) = serde_json::from_str::<Channel>(text) {
        // Accepted channels are row-stochastic with consistent sizes.
        assert!(ch.input_size() > 0 && ch.output_size() > 0);
        for row in ch.matrix() {
            assert_eq!(row.len(), ch.output_size());
            let mass: f64 = row.iter().sum();
            assert!((mass - 1.0).abs() <= 1e-9);
            assert!(row.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
        }
        let encoded = serde_json::to_string(&ch).expect("serializes");
        let again: Channel = serde_json::from_str(&encoded).expect("round-trips");
        assert_eq!(ch, again);
    }
});
