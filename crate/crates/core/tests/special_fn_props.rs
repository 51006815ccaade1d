#![allow(clippy::excessive_precision)]

use heatcontent::special_fn::{complex_power, digamma, gamma, log_gamma};
use heatcontent::Complex;
use proptest::prelude::*;

fn rel(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / b.norm()
}

// Reference values computed once with 30-digit mpmath.
#[test]
fn gamma_matches_high_precision_fixtures() {
    let cases = [
        ((4.2, 1.3), (-0.985_006_378_176_944_48, 6.129_555_052_047_170_4)),
        ((-2.3, 0.7), (-0.062_275_072_013_688_240, -0.274_869_820_381_396_89)),
        ((0.1, -5.0), (-3.808_606_913_812_056_8e-4, -3.411_170_124_492_653_2e-4)),
        ((30.0, 20.0), (1.560_965_427_529_007_7e28, -1.079_533_640_186_851_2e27)),
        ((-7.5, 0.25), (1.472_229_715_427_245_7e-4, 8.430_661_417_403_400_5e-5)),
        ((0.5, 40.0), (9.529_551_049_431_158_8e-28, 8.737_568_201_838_441_8e-28)),
    ];
    for ((zr, zi), (gr, gi)) in cases {
        let g = gamma(Complex::new(zr, zi)).unwrap();
        assert!(rel(g, Complex::new(gr, gi)) < 1e-13, "gamma({zr}+{zi}i) = {g}");
    }
}

#[test]
fn digamma_and_log_gamma_fixtures() {
    let psi = [
        ((3.0, 4.0), (1.550_359_817_333_410_9, 1.010_502_209_186_044_5)),
        ((-1.5, 0.5), (0.731_892_637_354_522_69, 2.640_659_519_977_514_6)),
        ((0.2, 0.0), (-5.289_039_896_592_188, 0.0)),
    ];
    for ((zr, zi), (r, i)) in psi {
        let v = digamma(Complex::new(zr, zi)).unwrap();
        assert!(rel(v, Complex::new(r, i)) < 1e-13, "digamma({zr}+{zi}i) = {v}");
    }
    let lg = [
        ((20.0, 30.0), (21.345_074_493_863_445, 96.714_347_689_536_18)),
        ((0.7, -12.0), (-17.433_684_724_710_883, -18.134_845_138_606_467)),
    ];
    for ((zr, zi), (r, i)) in lg {
        let v = log_gamma(Complex::new(zr, zi)).unwrap();
        assert!(rel(v, Complex::new(r, i)) < 1e-13, "log_gamma({zr}+{zi}i) = {v}");
    }
}

fn away_from_integers() -> impl Strategy<Value = Complex> {
    (-20.0f64..20.0, -20.0f64..20.0)
        .prop_filter("bounded and away from integers", |(re, im)| {
            let z = Complex::new(*re, *im);
            z.norm() < 20.0 && (im.abs() > 0.05 || (re - re.round()).abs() > 0.05)
        })
        .prop_map(|(re, im)| Complex::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reflection_formula(z in away_from_integers()) {
        let one = Complex::new(1.0, 0.0);
        let pi = std::f64::consts::PI;
        let prod = gamma(z).unwrap() * gamma(one - z).unwrap() * (z * pi).sin() / pi;
        prop_assert!((prod - one).norm() < 1e-10, "z={z} prod={prod}");
    }

    #[test]
    fn recurrence(z in away_from_integers()) {
        let one = Complex::new(1.0, 0.0);
        let lhs = gamma(z + one).unwrap();
        let rhs = z * gamma(z).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-12, "z={z}");
    }

    #[test]
    fn exp_log_gamma_is_gamma(z in away_from_integers()) {
        let g = gamma(z).unwrap();
        prop_assert!(rel(log_gamma(z).unwrap().exp(), g) < 1e-12);
    }

    #[test]
    fn digamma_is_log_gamma_slope(z in away_from_integers()) {
        let h = 1e-5;
        let dz = Complex::new(h, 0.0);
        let fd = (log_gamma(z + dz).unwrap() - log_gamma(z - dz).unwrap()) / (2.0 * h);
        let psi = digamma(z).unwrap();
        prop_assert!((fd - psi).norm() < 1e-8 * psi.norm().max(1.0), "z={z} fd={fd} psi={psi}");
    }

    #[test]
    fn real_exponent_gives_real_power(x in 1e-6f64..1e3, s in -5.0f64..5.0) {
        let p = complex_power(x, Complex::new(s, 0.0)).unwrap();
        prop_assert_eq!(p.im, 0.0);
        prop_assert!((p.re - x.powf(s)).abs() <= 1e-15 * x.powf(s));
    }
}

#[test]
fn log_gamma_continuous_along_rays() {
    for &theta in &[0.3f64, 0.9, 1.4, -1.2] {
        let dir = Complex::new(theta.cos(), theta.sin());
        let mut prev: Option<Complex> = None;
        for i in 0..400 {
            let z = dir * (0.6 + 0.1 * i as f64);
            if z.re < 0.5 {
                continue;
            }
            let v = log_gamma(z).unwrap();
            if let Some(p) = prev {
                assert!((v - p).norm() < 1.5, "jump at {z}");
            }
            prev = Some(v);
        }
    }
}
