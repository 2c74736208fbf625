#![no_main]

use hdloc::io::parse_vector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_vector(text) {
        assert!(v.iter().all(|x| x.is_finite()));
        let joined: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
        assert_eq!(parse_vector(&joined.join(",")).expect("round trip"), v);
    }
});
