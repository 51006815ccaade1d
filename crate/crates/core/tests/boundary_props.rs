use std::f64::consts::PI;

use heatcontent::asymptotics::log_grid;
use heatcontent::boundary::{
    half_line_l1, heat_content_bc, image_kernel, kernel_mass, l1_norm, series_bc, verify_theorem51, BCSpec,
    BoundaryCondition, DEFAULT_IMAGES,
};
use heatcontent::coefficients::ParamPair;
use heatcontent::quadrature::{kernel_line, CutoffSpec, DataFunction};
use proptest::prelude::*;

fn real(a: f64, b: f64) -> ParamPair {
    ParamPair::real(a, b).unwrap()
}

fn all_specs() -> [BCSpec; 4] {
    use BoundaryCondition::*;
    [
        BCSpec::dirichlet(),
        BCSpec::neumann(),
        BCSpec::new(Dirichlet, Neumann),
        BCSpec::new(Neumann, Dirichlet),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_symmetric(x in 0.0f64..=1.0, y in 0.0f64..=1.0, lt in -5.0f64..0.0, which in 0usize..4) {
        let t = 10f64.powf(lt);
        let bc = all_specs()[which];
        let (k, ks) = (image_kernel(x, y, t, bc, DEFAULT_IMAGES), image_kernel(y, x, t, bc, DEFAULT_IMAGES));
        prop_assert!((k - ks).abs() <= 1e-12 * k.abs().max(1.0));
    }

    #[test]
    fn neumann_kernel_dominates_the_line(x in 0.0f64..=1.0, y in 0.0f64..=1.0, lt in -5.0f64..0.0) {
        let t = 10f64.powf(lt);
        prop_assert!(image_kernel(x, y, t, BCSpec::neumann(), DEFAULT_IMAGES) >= kernel_line(x, y, t));
    }
}

#[test]
fn dirichlet_mass_decays() {
    let masses: Vec<f64> = [1e-5, 1e-4, 1e-3, 1e-2, 0.05]
        .iter()
        .map(|&t| kernel_mass(t, BCSpec::dirichlet(), DEFAULT_IMAGES).unwrap().value)
        .collect();
    assert!(masses.iter().all(|m| (0.0..=1.0).contains(m)), "{masses:?}");
    assert!(masses.windows(2).all(|w| w[1] < w[0]), "{masses:?}");
    for t in [1e-4, 1e-3] {
        let m = kernel_mass(t, BCSpec::dirichlet(), DEFAULT_IMAGES).unwrap().value;
        assert!((m - (1.0 - 4.0 * (t / PI).sqrt())).abs() < 1e-10, "t = {t}: {m}");
    }
}

#[test]
fn neumann_conserves_heat() {
    for t in [1e-6, 1e-3, 0.05] {
        let m = kernel_mass(t, BCSpec::neumann(), DEFAULT_IMAGES).unwrap().value;
        assert!((m - 1.0).abs() < 1e-10, "t = {t}: {m}");
    }
}

#[test]
fn mixed_conditions_follow_their_series() {
    use BoundaryCondition::*;
    let p = real(0.3, 0.4);
    let t = 1e-4;
    for bc in [BCSpec::new(Dirichlet, Neumann), BCSpec::new(Neumann, Dirichlet)] {
        let v = heat_content_bc(&p, t, bc).unwrap().value;
        let s = series_bc(&p, 4, bc).unwrap().eval(t).re;
        // first omitted power is t^{5/2}
        assert!((v - s).abs() < 10.0 * t.powf(2.5), "{bc:?}: {v} vs {s}");
    }
}

#[test]
fn half_line_operator_contracts() {
    let samples = [
        DataFunction::indicator(),
        DataFunction::power(0.5, CutoffSpec::default()),
        DataFunction::power(-1.0, CutoffSpec::None),
        DataFunction::Polynomial(vec![0.0, 1.0, -1.0]),
        DataFunction::Polynomial(vec![1.0, -3.0]),
    ];
    for phi in &samples {
        let norm = l1_norm(phi).unwrap();
        for t in [1e-3, 1e-2, 0.1] {
            let image = half_line_l1(phi, t, 0.0).unwrap();
            assert!(image <= norm, "{phi:?} at t = {t}: {image} > {norm}");
        }
    }
}

#[test]
fn tail_bound_slope() {
    let delta = 0.5;
    let phi = DataFunction::indicator();
    let pts: Vec<(f64, f64)> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&t| (1.0 / t, half_line_l1(&phi, t, delta).unwrap().ln()))
        .collect();
    let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
    assert!(slope <= -delta * delta / 8.0, "slope {slope}");
}

#[test]
fn log_plane_fits_for_both_conditions() {
    let p = real(-0.3, -0.7);
    let grid = log_grid(1e-5, 1e-2, 12).unwrap();
    for bc in [BCSpec::dirichlet(), BCSpec::neumann()] {
        let r = verify_theorem51(&p, &grid, bc, 4, 0.05).unwrap();
        assert!(r.pass, "{bc:?}: fitted {:?}", r.fitted_log_coeff);
    }
}

#[test]
fn parse_conditions() {
    use BoundaryCondition::*;
    assert_eq!(BCSpec::parse("DN"), Some(BCSpec::new(Dirichlet, Neumann)));
    assert_eq!(BCSpec::parse("n,d"), Some(BCSpec::new(Neumann, Dirichlet)));
    assert_eq!(BCSpec::parse("NN"), Some(BCSpec::neumann()));
    assert_eq!(BCSpec::parse("DX"), None);
    assert_eq!(BCSpec::parse("D"), None);
    assert_eq!(BoundaryCondition::parse("Dirichlet"), Some(Dirichlet));
    assert!(heat_content_bc(&real(0.0, 0.0), 0.1, BCSpec::neumann()).is_err());
}
