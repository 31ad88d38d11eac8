use std::path::PathBuf;

use conecert::cones::{copositivity_sample_check, is_nn, is_psd, SymMatrix};
use conecert::error::Error;
use conecert::exactfield::*;
use conecert::multop::compression;
use conecert::pipeline::*;
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(name: &str) -> Certificate {
    Certificate::read(&fixture(name)).unwrap()
}

fn failed_names(r: &VerifyReport) -> Vec<String> {
    r.failed().map(|c| c.name.clone()).collect()
}

fn float_side_ok(c: &Certificate) {
    let a = SymMatrix::from(&c.matrix);
    assert!(is_nn(&a).is_in());
    assert!(is_psd(&a, 1e-9).is_in());
}

#[test]
fn bundled_fixtures_verify() {
    for name in ["ref_ednn.json", "ref_ecop.json", "seed_default.json", "seed_eps_1_100.json", "ecop_from_seed.json"] {
        let r = run_verify(&fixture(name)).unwrap();
        assert!(r.all_passed(), "{name}:\n{r}");
    }
}

#[test]
fn reference_gram_matrix_is_off_by_two() {
    let r = run_verify(&fixture("ref_ednn_with_gram.json")).unwrap();
    assert_eq!(failed_names(&r), ["sos"]);
}

#[test]
fn one_changed_digit_is_caught() {
    let text = std::fs::read_to_string(fixture("ref_ednn.json")).unwrap();
    let tampered = text.replacen("\"dual_value\": \"-1/20\"", "\"dual_value\": \"-1/21\"", 1);
    assert_ne!(tampered, text);
    let r = verify_certificate(&Certificate::from_json(&tampered).unwrap());
    assert_eq!(failed_names(&r), ["not-cp"]);

    let mut c = load("ref_ednn.json");
    let v = c.matrix.get(1, 2) + &QSqrt2::frac(1, 1000);
    c.matrix.set(1, 2, v);
    let r = verify_certificate(&c);
    assert!(failed_names(&r).contains(&"compression".to_string()), "{r}");
}

#[test]
fn garbage_is_a_parse_error() {
    assert!(matches!(Certificate::from_json("{\"kind\": \"e-DNN\"}"), Err(Error::Parse(_))));
    assert!(Certificate::from_json("not json").is_err());
}

#[test]
fn seed_is_deterministic() {
    let config = PipelineConfig::default();
    let a = run_seed(&config).unwrap().to_json();
    let b = run_seed(&config).unwrap().to_json();
    assert_eq!(a, b);
    assert_eq!(a, std::fs::read_to_string(fixture("seed_default.json")).unwrap().trim_end());
}

#[test]
fn seed_outcomes() {
    let c = run_seed(&PipelineConfig { epsilon: rat(1, 100), ..Default::default() }).unwrap();
    assert!(verify_certificate(&c).all_passed());
    float_side_ok(&c);
    for bad in [PipelineConfig { epsilon: rat(10, 1), ..Default::default() }, PipelineConfig { m: 6, m_prime: 3, ..Default::default() }] {
        assert!(matches!(run_seed(&bad), Err(Error::SolveFailed(_))));
    }
    assert!(run_seed(&PipelineConfig { epsilon: rat(-1, 20), ..Default::default() }).is_err());
}

#[test]
fn extension_family() {
    let seed = load("seed_default.json");
    for n in 6..=12 {
        let c = run_extend(&seed, n).unwrap();
        assert_eq!(c.n(), n);
        let r = verify_certificate(&c);
        assert!(r.all_passed(), "n = {n}:\n{r}");
        float_side_ok(&c);
        assert_eq!(c.matrix.leading(5), seed.matrix);
    }
    assert_eq!(run_extend(&seed, 5).unwrap().matrix, seed.matrix);
    assert!(run_extend(&seed, 4).is_err());
}

#[test]
fn negative_coefficient_fails_nn() {
    let mut c = load("ref_ednn.json");
    let mut a: Vec<QSqrt2> = c.coeffs.clone().unwrap().as_slice().to_vec();
    a[0] = QSqrt2::frac(-1, 100);
    let f = conecert::multop::FourierCoeffs::new(a).unwrap();
    c.matrix = compression(&f, 7);
    c.coeffs = Some(f);
    let r = verify_certificate(&c);
    let failed = failed_names(&r);
    assert!(failed.contains(&"nn".to_string()) && failed.contains(&"coeffs-nonneg".to_string()), "{r}");
}

#[test]
fn ecop_on_reference_and_extended_matrices() {
    let reference = load("ref_ednn.json");
    let c = run_ecop(&reference, &PipelineConfig::default()).unwrap();
    assert_eq!(c.kind, CertificateKind::ECop);
    let back = Certificate::from_json(&c.to_json()).unwrap();
    assert!(verify_certificate(&back).all_passed());
    assert!(c.dual_value.is_negative());
    assert!(c.metadata.contains_key("sample_check"));
    assert!(!copositivity_sample_check(&SymMatrix::from(&c.matrix), 5_000, 11).violation);

    let six = run_extend(&load("seed_default.json"), 6).unwrap();
    let c6 = run_ecop(&six, &PipelineConfig::default()).unwrap();
    assert_eq!(c6.n(), 6);
    assert!(verify_certificate(&c6).all_passed());
}

#[test]
fn ecop_needs_an_e_dnn_input() {
    let ecop = load("ref_ecop.json");
    assert!(run_ecop(&ecop, &PipelineConfig::default()).is_err());
    assert!(run_extend(&ecop, 6).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn emitted_certificates_round_trip(eps in 20i64..120, m in 8usize..11, mp in 4usize..6) {
        let config = PipelineConfig { epsilon: rat(1, eps), m, m_prime: mp, ..Default::default() };
        match run_seed(&config) {
            Ok(c) => {
                let back = Certificate::from_json(&c.to_json()).unwrap();
                prop_assert_eq!(&back, &c);
                prop_assert!(verify_certificate(&back).all_passed());
                float_side_ok(&c);
            }
            Err(e) => prop_assert!(matches!(e, Error::SolveFailed(_) | Error::CertificationExhausted { .. }), "{e}"),
        }
    }
}
