use mlea::potentials::PotentialSpec;

// Values computed independently at 50 digits with mpmath.
const ERFI_EPS2_D16: [(f64, u64, f64); 18] = [
    (0.0, 1, -0.125),
    (0.0, 4, -0.25),
    (0.0, 64, -1.0),
    (0.5, 1, -0.1210732770782979438779),
    (0.5, 4, -0.2480443278892962673719),
    (0.5, 64, -0.9995116790096893006326),
    (3.0, 1, 0.04936213640741379290277),
    (3.0, 4, -0.1761964726468998935168),
    (3.0, 64, -0.9823701949679436067032),
    (20.0, 1, 6685779199639421950.979),
    (20.0, 4, 3101.226747080955266026),
    (20.0, 64, -0.09861158471705398212778),
    (60.0, 1, 3.772573237746836493112e191),
    (60.0, 4, 8.124003791152136058383e45),
    (60.0, 64, 110.5048323861437868192),
    (-7.25, 1, 9.590164575878454104352),
    (-7.25, 4, 0.3243649378818931209968),
    (-7.25, 64, -0.8955455780308538518205),
];

#[test]
fn erfi_potential_matches_reference() {
    let p = PotentialSpec::erfi(2.0, 16).unwrap();
    for (s, t, want) in ERFI_EPS2_D16 {
        let got = p.eval(s, t).unwrap();
        let err = (got - want).abs() / want.abs().max(1.0);
        assert!(err < 1e-12, "s={s} t={t}: got {got:e}, want {want:e}, rel err {err:e}");
    }
}

#[test]
fn erfi_potential_in_single_precision() {
    let p = PotentialSpec::<f32>::erfi(2.0, 16).unwrap();
    for (s, t, want) in ERFI_EPS2_D16.iter().filter(|r| r.2.abs() < 1e30) {
        let got = p.eval(*s as f32, *t).unwrap() as f64;
        let err = (got - want).abs() / want.abs().max(1.0);
        assert!(err < 1e-4, "s={s} t={t}: got {got:e}, want {want:e}");
    }
}
