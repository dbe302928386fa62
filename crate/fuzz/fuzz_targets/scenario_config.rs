#![no_main]

use gqcrb_core::scenarios::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ScenarioConfig::from_json(text) {
        let json = serde_json::to_string(&cfg).expect("config serializes");
        assert_eq!(ScenarioConfig::from_json(&json).expect("serialized config parses"), cfg);
        let _ = cfg.family();
    }
});
