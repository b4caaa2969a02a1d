use dirac_virial::corpus::corpus;
use dirac_virial::io::*;
use dirac_virial::potentials::*;
use dirac_virial::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn field_roundtrips_through_binary(d in 1usize..=3, n in prop::sample::select(vec![4usize, 6, 8]), seed in 0u64..100, offset: bool) {
        let mut spec = GridSpec::new(d, n, 3.0);
        spec.origin_offset = offset;
        let g = Grid::<f64>::new(spec).unwrap();
        let f = corpus(&g, 2, seed, 1).next().unwrap();
        let back: Field = decode_field(&encode_field(&f)).unwrap();
        prop_assert_eq!(back.data(), f.data());
        prop_assert_eq!(back.grid().spec(), f.grid().spec());
    }

    #[test]
    fn threshold_scales_inversely_with_coupling(nu in 0.05f64..2.0) {
        let pot = PotentialSpec::electrostatic(nu);
        let mesh = RadialMesh::default();
        let c = extract_constants(&pot, WeightFamily::Stationary, 3, &mesh).unwrap();
        let s = coupling_threshold(|k| certify_stationary(3, 0.0, &pot, k), &c, 100.0).unwrap();
        prop_assert!((s * nu - 0.25).abs() <= 1e-10);
    }
}

#[test]
fn corrupted_payloads_are_rejected() {
    let g = Grid::<f64>::new(GridSpec::new(2, 4, 1.0)).unwrap();
    let f = Field::zeros(&g, 2);
    let bytes = encode_field(&f);
    assert!(decode_field::<f64>(&bytes[..bytes.len() - 1]).is_err());
    assert!(decode_field::<f64>(b"XXXX").is_err());
    let mut bad = bytes.clone();
    bad[24] = 7;
    assert!(decode_field::<f64>(&bad).is_err());
}

#[test]
fn file_and_sidecar_written() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::<f64>::new(GridSpec::new(2, 8, 2.0)).unwrap();
    let f = corpus(&g, 2, 1, 1).next().unwrap();
    let p = dir.path().join("f.dvf");
    write_field(&p, &f).unwrap();
    let back: Field = read_field(&p).unwrap();
    assert_eq!(back.data(), f.data());
    let meta: FieldMeta = serde_json::from_str(&std::fs::read_to_string(sidecar(&p)).unwrap()).unwrap();
    assert_eq!(meta.ncomp, 2);
    assert!((meta.l2_norm - f.l2_norm()).abs() < 1e-14);
}

#[test]
fn potential_and_certificate_json_roundtrip() {
    for pot in catalog() {
        let text = serde_json::to_string(&pot).unwrap();
        let back: PotentialSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, pot);
    }
    let pot = PotentialSpec::electrostatic(0.2);
    let c = extract_constants(&pot, WeightFamily::Stationary, 3, &RadialMesh::default()).unwrap();
    let cert = certify_stationary(3, 0.0, &pot, &c).unwrap();
    assert_eq!(cert.verdict, Verdict::Absent);
    let json = serde_json::to_value(&cert).unwrap();
    assert_eq!(json["verdict"], "ABSENT");
    let back: Certificate = serde_json::from_value(json).unwrap();
    assert_eq!(back, cert);
}

#[test]
fn unknown_potential_keys_rejected() {
    let bad = r#"{"name": "x", "scalar": null, "extra": 1}"#;
    assert!(serde_json::from_str::<PotentialSpec>(bad).is_err());
}

#[test]
fn stationary_theorems_need_three_dimensions() {
    let pot = PotentialSpec::electrostatic(0.1);
    let c = HypothesisConstants::zero(WeightFamily::Stationary);
    assert!(certify_stationary(2, 0.0, &pot, &c).is_err());
}

#[test]
fn massive_certificate_needs_fast_decay() {
    let mesh = RadialMesh::default();
    let coulomb = PotentialSpec::lorentz_scalar(0.05);
    let c = extract_constants(&coulomb, WeightFamily::Stationary, 3, &mesh).unwrap();
    assert!(c.c3.is_infinite());
    assert_eq!(certify_stationary(3, 1.0, &coulomb, &c).unwrap().verdict, Verdict::Inconclusive);

    let well = PotentialSpec::gaussian_well(0.01, 1.0);
    let c = extract_constants(&well, WeightFamily::Stationary, 3, &mesh).unwrap();
    assert!(c.as_array().iter().all(|x| x.is_finite()));
    let cert = certify_stationary(3, 1.0, &well, &c).unwrap();
    assert_eq!(cert.verdict, Verdict::Absent);
    let deep = certify_stationary(3, 1.0, &well, &c.scaled(1e4)).unwrap();
    assert_eq!(deep.verdict, Verdict::Inconclusive);
}
