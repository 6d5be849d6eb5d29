use std::f64::consts::PI;

use mcflab_core::explicit::{area_sharpness_data, gradient_sharpness_data, GrimReaper, Sign};
use mcflab_core::{Axis, Grid};
use proptest::prelude::*;

proptest! {
    #[test]
    fn reaper_translates_vertically(lam in 0.2..4.0f64, shift in -3.0..3.0f64, c in -2.0..2.0f64,
                                    xi in 0.01..0.99f64, t in -1.0..1.0f64, s in -1.0..1.0f64, up in any::<bool>()) {
        let sign = if up { Sign::Plus } else { Sign::Minus };
        let r = GrimReaper::new(lam, shift, c, sign).unwrap();
        let x = shift + xi * PI / lam;
        let (a, da) = r.eval(x, t).unwrap();
        let (b, db) = r.eval(x, t + s).unwrap();
        prop_assert!((b - a - sign.value() * lam * s).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()));
        prop_assert_eq!(da, db);
    }

    #[test]
    fn parabolic_rescaling(lam in 0.2..4.0f64, xi in 0.01..0.99f64, t in -1.0..1.0f64) {
        let x = xi * PI / lam;
        let scaled = GrimReaper::rescaled(lam).unwrap().value(x, t).unwrap();
        let unit = GrimReaper::unit().value(lam * x, lam * lam * t).unwrap() / lam;
        prop_assert!((scaled - unit).abs() <= 1e-12 * (1.0 + unit.abs()));
    }

    #[test]
    fn reaper_slope_matches_difference_quotient(lam in 0.5..3.0f64, xi in 0.1..0.9f64) {
        let r = GrimReaper::rescaled(lam).unwrap();
        let x = xi * PI / lam;
        let h = 1e-6;
        let fd = (r.value(x + h, 0.0).unwrap() - r.value(x - h, 0.0).unwrap()) / (2.0 * h);
        let (_, slope) = r.eval(x, 0.0).unwrap();
        prop_assert!((fd - slope).abs() < 1e-6 * (1.0 + slope.abs()));
    }
}

#[test]
fn constructed_data_verify_their_inequalities() {
    for lam in [1.5f64, 2.0] {
        let e = (-lam * lam).exp();
        let ax = Axis::graded(-4.0 * PI / lam, 4.0 * PI / lam, &[-e, 0.0, e], 1e-6, 1.1, 0.02).unwrap();
        let g = Grid::new(vec![ax]).unwrap();
        let d = gradient_sharpness_data(lam, &g).unwrap();
        assert!(d.min_gap > 0.0);
    }
    let ax = Axis::graded(-2.0 * PI - 2.0, 2.0 * PI + 2.0, &[0.0], 1e-5, 1.1, 0.02).unwrap();
    let d = area_sharpness_data(2, &Grid::new(vec![ax]).unwrap()).unwrap();
    assert!(d.min_gap > 0.0);
}
