#![no_main]

use conecert::exactfield::{format_rat, parse_qs, parse_rat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 512 {
        return;
    }
    if let Ok(x) = parse_qs(s) {
        // canonical form parses back to the same number
        assert_eq!(parse_qs(&x.to_string()).unwrap(), x);
    }
    if let Ok(r) = parse_rat(s) {
        assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
    }
});
