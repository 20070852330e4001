#![no_main]
use hamlin::polyapprox::DominatedPair;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let s = std::str::from_utf8(data).unwrap_or("");
    if let Ok(pair) = DominatedPair::from_json(s) {
        // Anything accepted must survive its own serialization.
        DominatedPair::from_json(&pair.to_json()).expect("round trip");
    }
});
