#![no_main]

use hdloc::io::{parse_dataset, write_dataset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for header in [false, true] {
        if let Ok(parsed) = parse_dataset(text, header) {
            assert!(parsed.n_obs() >= 2 && parsed.dim() >= 1);
            let again = parse_dataset(&write_dataset(&parsed), false).expect("written data parse back");
            assert_eq!(again, parsed);
        }
    }
});
