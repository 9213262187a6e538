//! Prabhakar function against a high-precision series computed offline with mpmath.

use genfpp::specfun::{evaluate, PrabhakarArgs};

const ORACLE: &str = include_str!("data/prabhakar_oracle.csv");

#[test]
fn matches_high_precision_series() {
    let mut worst = 0.0f64;
    let mut count = 0;
    for line in ORACLE.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let args = PrabhakarArgs::new(f[0], f[1], f[2], f[3]);
        let ev = evaluate(args).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        let expect = f[4];
        let err = if expect.abs() < 1e-290 {
            (ev.value - expect).abs()
        } else {
            (ev.value - expect).abs() / expect.abs()
        };
        assert!(err < 1e-10, "{args:?}: got {} ({:?}) expected {expect}, rel {err:e}", ev.value, ev.route);
        worst = worst.max(err);
        count += 1;
    }
    assert_eq!(count, 700);
    eprintln!("worst relative error {worst:e}");
}
