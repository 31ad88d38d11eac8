#![no_main]

use conecert::multop::{coeffs_from_seed, compression, FourierCoeffs};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(f) = serde_json::from_slice::<FourierCoeffs>(data) else { return };
    if f.m() > 64 {
        return;
    }
    let a = compression(&f, 5);
    if f.m() <= 6 {
        let back = coeffs_from_seed(&a).unwrap();
        assert_eq!(&back.as_slice()[..f.m()], f.as_slice());
    }
});
