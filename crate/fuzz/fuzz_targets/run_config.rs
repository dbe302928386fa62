#![no_main]

use gqcrb_cli::{CommandName, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(text) {
        for command in [CommandName::Qfi, CommandName::Sweep, CommandName::OracleCheck, CommandName::ListScenarios] {
            if let Err(e) = cfg.validate(command) {
                assert!(matches!(e.exit_code(), 1 | 2));
            }
        }
    }
});
