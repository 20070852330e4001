#![no_main]
use hamlin::fermions::QuadCoeff;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let s = std::str::from_utf8(data).unwrap_or("");
    let _ = QuadCoeff::from_json(s);
});
