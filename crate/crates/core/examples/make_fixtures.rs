//! Regenerates the bundled certificate fixtures in `fixtures/`.
//!
//! cargo run --release -p conecert --example make_fixtures

use std::collections::BTreeMap;
use std::path::Path;

use conecert::cones::horn_matrix;
use conecert::exactfield::{frobenius_exact, parse_qs, rat, ExactSymMatrix, QSqrt2};
use conecert::multop::{compression, FourierCoeffs};
use conecert::pipeline::*;
use conecert::sos::{BasisSpec, GramCertificate, TrigPoly};

fn q(s: &str) -> QSqrt2 {
    parse_qs(s).unwrap()
}

fn matrix(rows: &[&[&str]]) -> ExactSymMatrix {
    ExactSymMatrix::from_rows(rows.iter().map(|r| r.iter().map(|s| q(s)).collect()).collect()).unwrap()
}

fn ref_coeffs() -> FourierCoeffs {
    FourierCoeffs::new(
        ["16/27", "1/123", "1/294", "5/21", "4/29", "-2440263/3254580+1777340/3254580*sqrt2"].iter().map(|s| q(s)).collect(),
    )
    .unwrap()
}

fn ref_b() -> ExactSymMatrix {
    matrix(&[
        &["9/22", "7/37", "-3/22", "-206923/5678316"],
        &["7/37", "336929/243540-88867/162729*sqrt2", "2210/28971", "-200129/487080+88867/325458*sqrt2"],
        &["-3/22", "2210/28971", "46466763/35800380-19550740/35800380*sqrt2", "4/29"],
        &["-206923/5678316", "-200129/487080+88867/325458*sqrt2", "4/29", "-2440263/1627290+1777340/1627290*sqrt2"],
    ])
}

fn ref_c() -> ExactSymMatrix {
    matrix(&[
        &["17", "-91/5", "33/2", "38/3", "-36/5"],
        &["-91/5", "59/3", "-53/4", "8", "33/4"],
        &["33/2", "-53/4", "39/4", "-13/2", "8"],
        &["38/3", "8", "-13/2", "16/3", "-13/3"],
        &["-36/5", "33/4", "8", "-13/3", "1373628701/353935575"],
    ])
}

fn write(dir: &Path, name: &str, cert: &Certificate) {
    cert.write(&dir.join(name)).unwrap();
    let report = verify_certificate(cert);
    println!("{name}: {}", if report.all_passed() { "verifies" } else { "does not verify" });
    print!("{report}");
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).unwrap();

    let f = ref_coeffs();
    let a5 = compression(&f, 5);
    let reference = Certificate {
        kind: CertificateKind::EDnn,
        version: VERSION.into(),
        config: None,
        coeffs: Some(f.clone()),
        matrix: a5.clone(),
        dnn_matrix: None,
        dual_value: frobenius_exact(&a5, &horn_matrix()).unwrap(),
        gram: None,
        metadata: BTreeMap::from([("source".into(), "reference seed matrix A(5), epsilon = 1/20".into())]),
    };
    write(&dir, "ref_ednn.json", &reference);

    let mut with_b = reference.clone();
    with_b.gram = Some(GramCertificate { basis: BasisSpec::Trig { m_prime: 3 }, gram: ref_b(), target: TrigPoly::from_coeffs(&f).c });
    with_b.metadata.insert("source".into(), "reference seed matrix A(5) with the reference Gram matrix B (m' = 3)".into());
    write(&dir, "ref_ednn_with_gram.json", &with_b);

    let c = ref_c();
    let cfg = PipelineConfig::default();
    let gram = certify_cop_relaxation(&c, 1, &cfg).unwrap();
    let ecop = Certificate {
        kind: CertificateKind::ECop,
        version: VERSION.into(),
        config: None,
        coeffs: None,
        matrix: c.clone(),
        dnn_matrix: Some(a5.clone()),
        dual_value: frobenius_exact(&c, &a5).unwrap(),
        gram: Some(gram),
        metadata: BTreeMap::from([
            ("source".into(), "reference exceptional copositive C; Gram matrix solved and rationalized here".into()),
            ("k".into(), "1".into()),
        ]),
    };
    write(&dir, "ref_ecop.json", &ecop);

    let seed = run_seed(&cfg).unwrap();
    write(&dir, "seed_default.json", &seed);
    let seed100 = run_seed(&PipelineConfig { epsilon: rat(1, 100), ..cfg.clone() }).unwrap();
    write(&dir, "seed_eps_1_100.json", &seed100);
    let ecop_seed = run_ecop(&seed, &cfg).unwrap();
    write(&dir, "ecop_from_seed.json", &ecop_seed);
}
