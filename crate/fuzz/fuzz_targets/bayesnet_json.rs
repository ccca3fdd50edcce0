//! Fuzzes the Bayesian-network JSON decoder: parsing must never panic, and
//! accepted networks must support the percolation operations without panics.

#![no_main]

use libfuzzer_sys::fuzz_target;
use sdpi::netbound::{perc_exact, BayesNet, EtaMode};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(net) = serde_json::from_str::<BayesNet>(text) {
        let encoded = serde_json::to_string(&net).expect("serializes");
        let again: BayesNet = serde_json::from_str(&encoded).expect("round-trips");
        assert_eq!(net, again);
        // Percolation on small accepted nets must not panic; TV coefficients
        // avoid kernel-size-dependent optimization cost.
        if net.len() <= 10 {
            let ids: Vec<&str> = (0..net.len().min(3))
                .map(|i| net.node(i).id.as_str())
                .collect();
            if let Ok(p) = perc_exact(&net, &ids, EtaMode::Tv) {
                assert!((0.0..=1.0 + 1e-12).contains(&p.value));
            }
        }
    }
});
