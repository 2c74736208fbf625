#![no_main]

use hdloc::harness::ExperimentSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ExperimentSpec::from_json(text) else { return };
    if spec.validate().is_ok() {
        for &p in &spec.dims {
            assert!(spec.sample_sizes_for(p).iter().all(|&n| n >= 2));
        }
        let again = ExperimentSpec::from_json(&spec.to_json()).expect("serialised spec parses");
        assert_eq!(again.to_json(), spec.to_json());
    }
    let _ = spec.warnings();
});
