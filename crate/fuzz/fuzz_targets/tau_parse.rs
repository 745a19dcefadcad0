#![no_main]

use fairclust::model::TauSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(tau) = TauSpec::parse(data) {
        let reparsed = TauSpec::parse(&tau.to_string()).expect("display output parses");
        assert_eq!(tau, reparsed);
    }
});
