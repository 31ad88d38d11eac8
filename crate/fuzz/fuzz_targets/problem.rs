#![no_main]

use conecert::solver::{solve, ConicProblem};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(p) = serde_json::from_slice::<ConicProblem>(data) else { return };
    if p.dim() > 64 || p.num_constraints() > 64 {
        return;
    }
    let _ = solve(&p, 1e-7, 25);
    let again: ConicProblem = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(again, p);
});
