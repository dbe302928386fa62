#![no_main]

use gqcrb_core::sweep::Preset;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(name) = std::str::from_utf8(data) else { return };
    if let Ok(preset) = Preset::parse(name) {
        assert_eq!(preset.as_str(), name);
    }
});
