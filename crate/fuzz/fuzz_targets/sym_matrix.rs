#![no_main]

use conecert::cones::{eig_sym, SymMatrix};
use conecert::exactfield::{is_psd_exact, ExactSymMatrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(a) = serde_json::from_slice::<ExactSymMatrix>(data) {
        if a.n() <= 8 {
            let _ = is_psd_exact(&a);
        }
    }
    if let Ok(a) = serde_json::from_slice::<SymMatrix>(data) {
        if a.n() <= 16 && a.upper().iter().all(|v| v.is_finite()) {
            let _ = eig_sym(&a);
        }
    }
});
