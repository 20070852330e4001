#![no_main]
use hamlin_cli::config::{resolve, ConfigFile, Overrides};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let s = std::str::from_utf8(data).unwrap_or("");
    if let Ok(file) = ConfigFile::from_json(s) {
        let _ = resolve(file, Overrides::default(), None);
    }
});
