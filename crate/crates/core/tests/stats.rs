use proptest::prelude::*;
use serde::Deserialize;
use socialtie::stats::{kruskal_wallis, mann_whitney_u, PValueMethod};

#[derive(Deserialize)]
struct Case {
    groups: Vec<Vec<f64>>,
    kw_statistic: f64,
    kw_p: f64,
    mw_u: f64,
    mw_p: f64,
    mw_exact: bool,
}

#[derive(Deserialize)]
struct Reference {
    cases: Vec<Case>,
}

fn reference() -> Reference {
    let text = include_str!("fixtures/stats_reference.json");
    serde_json::from_str(text).unwrap()
}

#[test]
fn exact_mann_whitney_small_sample() {
    let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], 0.05).unwrap();
    assert_eq!(r.method, PValueMethod::Exact);
    assert_eq!(r.statistic, 0.0);
    assert_eq!(r.p_value, 0.1);
}

#[test]
fn matches_scipy_reference() {
    let cases = reference().cases;
    assert_eq!(cases.len(), 50);
    for (i, c) in cases.iter().enumerate() {
        let groups: Vec<&[f64]> = c.groups.iter().map(Vec::as_slice).collect();
        let kw = kruskal_wallis(&groups, 0.05).unwrap();
        assert!(
            (kw.statistic - c.kw_statistic).abs() < 1e-6,
            "case {i}: H {} vs {}",
            kw.statistic,
            c.kw_statistic
        );
        assert!(
            (kw.p_value - c.kw_p).abs() < 1e-6,
            "case {i}: KW p {} vs {}",
            kw.p_value,
            c.kw_p
        );
        let mw = mann_whitney_u(groups[0], groups[1], 0.05).unwrap();
        assert_eq!(mw.method == PValueMethod::Exact, c.mw_exact, "case {i}");
        assert!(
            (mw.statistic - c.mw_u).abs() < 1e-9,
            "case {i}: U {} vs {}",
            mw.statistic,
            c.mw_u
        );
        assert!(
            (mw.p_value - c.mw_p).abs() < 1e-6,
            "case {i}: MW p {} vs {}",
            mw.p_value,
            c.mw_p
        );
    }
}

fn samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    let g = || prop::collection::vec(-50i32..50, 1..30).prop_map(|v| v.into_iter().map(f64::from).collect());
    (g(), g(), g())
}

proptest! {
    /// Rank tests see only the order of the pooled sample, so any strictly
    /// increasing transform leaves them unchanged.
    #[test]
    fn monotone_invariance((a, b, c) in samples()) {
        let f = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * x * x + 7.0).collect() };
        let (fa, fb, fc) = (f(&a), f(&b), f(&c));
        let kw = kruskal_wallis(&[&a, &b, &c], 0.05).unwrap();
        let kw2 = kruskal_wallis(&[&fa, &fb, &fc], 0.05).unwrap();
        prop_assert_eq!(kw.statistic, kw2.statistic);
        prop_assert_eq!(kw.p_value, kw2.p_value);
        let mw = mann_whitney_u(&a, &b, 0.05).unwrap();
        let mw2 = mann_whitney_u(&fa, &fb, 0.05).unwrap();
        prop_assert_eq!(mw.statistic, mw2.statistic);
        prop_assert_eq!(mw.p_value, mw2.p_value);
    }

    #[test]
    fn mann_whitney_is_symmetric((a, b, _) in samples()) {
        let x = mann_whitney_u(&a, &b, 0.05).unwrap();
        let y = mann_whitney_u(&b, &a, 0.05).unwrap();
        prop_assert_eq!(x.statistic, y.statistic);
        prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }
}
