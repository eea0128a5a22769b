use postcap_web::demo;

#[test]
fn alpha_curve_endpoints_and_midpoint() {
    let c = demo::post_alpha_curve(3).unwrap();
    assert!((c[0] - 1.0).abs() < 1e-12);
    assert!((c[1] - 0.321_928_094_887_362_3).abs() < 1e-12);
    assert_eq!(c[2], 0.0);
    let p = demo::post_alpha_point(0.5).unwrap();
    assert!((p[1] - 0.6).abs() < 1e-12 && (p[3] - 0.2).abs() < 1e-12);
}

#[test]
fn ab_field_is_row_major_in_a() {
    let f = demo::post_ab_field(3).unwrap();
    assert_eq!(f.len(), 9);
    // (a, b) = (0, 0.5) and (0.5, 0)
    let z = demo::post_ab_point(0.0, 0.5).unwrap()[0];
    assert!((f[1] - z).abs() < 1e-15 && (f[3] - z).abs() < 1e-15);
    assert_eq!(f[4], 0.0);
}

#[test]
fn mary_value_iteration_brackets_closed_form() {
    let r = demo::mary_compare(4).unwrap();
    assert!((r[0] - 1.0).abs() < 1e-9);
    assert!((r[1] - 2.0 / 3.0).abs() < 1e-12);
    assert!(r[2] <= r[0] + 1e-9 && r[0] <= r[3] + 1e-9);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(demo::post_alpha_curve(1).is_err());
    assert!(demo::post_ab_field(100_000).is_err());
    assert!(demo::post_alpha_point(-0.1).is_err());
    assert!(demo::post_ab_point(0.5, 2.0).is_err());
    assert!(demo::mary_compare(0).is_err());
    assert!(demo::mary_compare(1000).is_err());
}
