#![no_main]

use gqcrb_core::gaussian::GaussianState;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(state) = GaussianState::from_json(text) {
        let again = GaussianState::from_json(&state.to_json()).expect("serialized state parses");
        assert_eq!(again, state);
    }
});
