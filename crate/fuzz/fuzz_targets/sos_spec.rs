#![no_main]
use hamlin::fermions::SosSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let s = std::str::from_utf8(data).unwrap_or("");
    let _ = SosSpec::from_json(s);
});
