//! Fuzzes the channel-spec mini-language parser: must never panic, and
//! successfully parsed constructor specs must round-trip through Display.

#![no_main]

use libfuzzer_sys::fuzz_target;
use sdpi::chanspec::ChannelSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = ChannelSpec::parse(text) {
        // Display must re-parse to the same spec (file paths included).
        let shown = spec.to_string();
        let again = ChannelSpec::parse(&shown).expect("display output re-parses");
        assert_eq!(spec, again);
        // Resolving constructors must validate, never panic; skip file I/O.
        if !matches!(spec, ChannelSpec::File { .. }) {
            let _ = spec.resolve();
        }
    }
});
