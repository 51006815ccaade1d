use std::f64::consts::PI;

use heatcontent::coefficients::{bc_correction_coefficient, c_boundary, x_fn, ParamPair};
use heatcontent::quadrature::{
    c_k_integral, heat_content_interval, kernel_line, quadrant_correction, CutoffSpec, TanhSinh, DEFAULT_TOL,
};
use heatcontent::Error;
use proptest::prelude::*;

fn real(a: f64, b: f64) -> ParamPair {
    ParamPair::real(a, b).unwrap()
}

#[test]
fn kernel_line_values() {
    assert!((kernel_line(0.0, 0.0, 1.0 / (4.0 * PI)) - 1.0).abs() < 1e-15);
    let t = 0.07;
    let k = kernel_line(1.0, 0.0, t);
    assert!((k - (-1.0 / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()).abs() < 1e-16);
    let mass = TanhSinh::new(1e-14)
        .integrate(|n| kernel_line(n.x, 0.0, 0.01) + kernel_line(-n.x, 0.0, 0.01), 0.0, 5.0)
        .unwrap()
        .value;
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn constant_data_closed_form() {
    for t in [1e-6, 1e-4, 1e-2] {
        let h = heat_content_interval(&real(0.0, 0.0), t, None, DEFAULT_TOL).unwrap();
        assert!(
            (h.value - (1.0 - 2.0 * (t / PI).sqrt())).abs() < 1e-10,
            "t = {t}: {}",
            h.value
        );
        assert!(h.error_estimate <= DEFAULT_TOL && h.nodes_used > 0);
    }
}

#[test]
fn decreasing_in_t_for_constant_data() {
    let values: Vec<f64> = (0..10)
        .map(|i| 10f64.powf(-7.0 + 7.0 * i as f64 / 9.0))
        .map(|t| {
            heat_content_interval(&real(0.0, 0.0), t, None, DEFAULT_TOL)
                .unwrap()
                .value
        })
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn refinement_stays_within_the_error_estimate() {
    for (a, b, t) in [(0.3, 0.4, 1e-3), (0.9, -0.2, 1e-5), (-1.5, 0.6, 0.1)] {
        let p = real(a, b);
        let coarse = heat_content_interval(&p, t, None, 1e-8).unwrap();
        let fine = heat_content_interval(&p, t, None, 5e-9).unwrap();
        assert!(
            (coarse.value - fine.value).abs() <= coarse.error_estimate.max(1e-15),
            "({a}, {b}, {t}): moved {:e}, estimate {:e}",
            (coarse.value - fine.value).abs(),
            coarse.error_estimate
        );
    }
}

#[test]
fn rejects_bad_inputs() {
    assert!(matches!(
        heat_content_interval(&real(0.0, 0.0), 1e-8, None, 1e-10),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        heat_content_interval(&real(0.0, 0.0), 2.0, None, 1e-10),
        Err(Error::Domain(_))
    ));
    assert!(ParamPair::real(1.0, 0.0).is_err());
    let complex = ParamPair::new(heatcontent::Complex::new(0.1, 0.2), heatcontent::Complex::new(0.1, 0.0)).unwrap();
    assert!(heat_content_interval(&complex, 1e-3, None, 1e-10).is_err());
    assert!(c_k_integral(1, &real(0.3, 0.4)).is_err());
}

#[test]
fn quadrant_correction_leading_term() {
    for t in [1e-4, 1e-3, 1e-2] {
        let v = quadrant_correction(&real(0.0, 0.0), t).unwrap().value;
        assert!(
            (v - (t / PI).sqrt()).abs() < 1e-12 + (-1.0 / (5.0 * t)).exp(),
            "t = {t}: {v}"
        );
    }
    let p = real(0.3, -0.4);
    let q = bc_correction_coefficient(&p).unwrap().re;
    let v = quadrant_correction(&p, 1e-3).unwrap().value;
    assert!((v / 1e-3f64.powf(0.55) - q).abs() < 1e-10 * q);
}

#[test]
fn half_line_constant_near_the_plane() {
    // (a+b−1) C_{−1} = −𝒳 → 1 as a+b ↓ 1
    let mut products = Vec::new();
    for s in [0.1, 0.05, 0.025] {
        let p = real(0.6 + s, 0.4);
        let c = c_k_integral(-1, &p).unwrap().value;
        assert!((c - c_boundary(&p).unwrap().re).abs() < 1e-8 * c.abs().max(1.0));
        let prod = s * c;
        assert!((prod + x_fn(&p).unwrap().re).abs() < 1e-8);
        products.push(prod);
    }
    let gaps: Vec<f64> = products.iter().map(|v| (v - 1.0).abs()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 0.05, "{products:?}");
}

#[test]
fn cutoff_shape() {
    let c = CutoffSpec::default();
    assert_eq!((c.plateau_end(), c.support_end()), (1.0 / 3.0, 2.0 / 3.0));
    assert_eq!(c.eval(0.2), 1.0);
    assert_eq!(c.eval(0.7), 0.0);
    let xs: Vec<f64> = (0..=100).map(|i| 1.0 / 3.0 + i as f64 / 300.0).collect();
    assert!(xs.windows(2).all(|w| c.eval(w[1]) <= c.eval(w[0])));
    assert!(CutoffSpec::smooth_step(0.5, 0.4).is_err());
    assert_eq!(CutoffSpec::None.eval(10.0), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_and_positive(a in -2.0f64..0.95, b in -2.0f64..0.95, lt in -6.0f64..-1.0) {
        let t = 10f64.powf(lt);
        let h = heat_content_interval(&real(a, b), t, None, 1e-10).unwrap().value;
        let hs = heat_content_interval(&real(b, a), t, None, 1e-10).unwrap().value;
        prop_assert!(h > 0.0);
        prop_assert!((h - hs).abs() <= 1e-12 * h.max(1.0));
    }

    #[test]
    fn quadrant_is_dominated(a in 0.0f64..0.95, b in 0.0f64..0.95, lt in -5.0f64..-1.0) {
        let t = 10f64.powf(lt);
        let p = real(a, b);
        let q = quadrant_correction(&p, t).unwrap().value;
        let h = heat_content_interval(&p, t, None, 1e-10).unwrap().value;
        prop_assert!(q > 0.0 && q < h);
    }

    #[test]
    fn cutoff_data_is_dominated(a in 0.0f64..0.9, b in 0.0f64..0.9, lt in -5.0f64..-1.0) {
        let t = 10f64.powf(lt);
        let p = real(a, b);
        let cut = CutoffSpec::default();
        let hc = heat_content_interval(&p, t, Some((cut, cut)), 1e-10).unwrap().value;
        let h = heat_content_interval(&p, t, None, 1e-10).unwrap().value;
        prop_assert!(hc > 0.0 && hc < h);
    }
}
