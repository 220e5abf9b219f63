use knflow_core::analysis::{check_evi_kn, KnForm};
use knflow_core::flows::{oracle_flow, TimeGrid};
use knflow_core::reparam::{r1, r2};
use knflow_core::{CurvatureParams, Functional, SampleSpec, Tolerance};
use proptest::prelude::*;

fn kn(k: f64, n: f64) -> CurvatureParams {
    CurvatureParams::new(k, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn time_changes_are_increasing(y0 in 0.5f64..3.0, frac in 0.2f64..0.9, n in -3.0f64..-0.2) {
        let q = kn(0.0, n);
        let f = Functional::from_name("log-x", q).unwrap();
        let stop = y0 * y0 / (-2.0 * n);
        let grid = TimeGrid::uniform(frac * stop, 200).unwrap();
        let c = oracle_flow("log-x", &q, &y0.into(), &grid).unwrap();
        let z = r1(&c, &f, &q).unwrap();
        prop_assert!(z.times().windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(z.points(), &c.points()[..z.len()]);
        let back = r2(&z, &f, &q).unwrap();
        prop_assert!(back.times().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn evi_reports_are_reproducible(seed in any::<u64>(), k in -1.0f64..0.5) {
        let q = kn(0.0, -1.0);
        let f = Functional::from_name("log-x", q).unwrap();
        let c = oracle_flow("log-x", &q, &1.0.into(), &TimeGrid::uniform(0.45, 120).unwrap()).unwrap();
        let spec = SampleSpec::new(seed, 20);
        let run = || check_evi_kn(&c, &f, &kn(k, -1.0), KnForm::II, &spec, &Tolerance::default()).unwrap();
        prop_assert_eq!(run(), run());
    }
}
