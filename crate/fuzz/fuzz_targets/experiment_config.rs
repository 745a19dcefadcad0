#![no_main]

use fairclust::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(config) = ExperimentConfig::from_toml_str(data) {
        let _ = config.validate();
    }
});
