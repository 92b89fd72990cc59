use std::f64::consts::PI;

use nhwigner::lineshape::{energy_distribution, hyperbolic_energy_distribution, measure_hwhm, time_signal};
use nhwigner::special::adaptive_simpson;
use nhwigner::{ModeIndex, NhParams};

/// (mode, params) pairs with 1/tau = 0.5, 1 and 3.
fn cases() -> Vec<(ModeIndex, NhParams)> {
    vec![
        (ModeIndex::new(0, 0), NhParams::elliptic(0.5, 0.0).unwrap()),
        (ModeIndex::new(0, 0), NhParams::elliptic(1.0, 0.0).unwrap()),
        (ModeIndex::new(1, 0), NhParams::elliptic(1.0, 0.0).unwrap()),
        (ModeIndex::new(0, 2), NhParams::elliptic(0.25, 0.25).unwrap()),
    ]
}

#[test]
fn quadrature_matches_closed_form() {
    for (mode, params) in cases() {
        let s = time_signal(mode, &params).unwrap();
        let ups = s.decay_constant();
        for k in 0..=200 {
            let e = -s.frequency() + ups * (-5.0 + 10.0 * k as f64 / 200.0);
            let closed = s.half_line_fourier(e).unwrap();
            let numeric = s.half_line_fourier_numeric(e).unwrap();
            assert!((closed - numeric).norm() / closed.norm() < 1e-6, "{mode} E={e}");
        }
    }
}

#[test]
fn squared_transform_is_the_lorentzian() {
    for (mode, params) in cases() {
        let s = time_signal(mode, &params).unwrap();
        let f = energy_distribution(mode, &params).unwrap();
        for k in 0..50 {
            let e = -7.0 + 0.3 * k as f64;
            let via_transform = s.decay_constant() / PI * s.half_line_fourier(e).unwrap().norm_sqr();
            assert!((via_transform - f.pdf(e)).abs() < 1e-14 * f.peak());
        }
    }
}

#[test]
fn distribution_is_normalized() {
    for (mode, params) in cases() {
        let f = energy_distribution(mode, &params).unwrap();
        let (ups, loc) = (f.hwhm(), f.location());
        let mass = adaptive_simpson(&|e| f.pdf(e), loc - 1e3 * ups, loc + 1e3 * ups, 1e-10);
        assert!((0.999..=1.0).contains(&mass), "{mode}: {mass}");
        // the exact tail beyond 1000 widths is 2 atan(1/1000) / pi
        let tail = 2.0 * (1e-3f64).atan() / PI;
        assert!((mass + tail - 1.0).abs() < 1e-8);
    }
}

#[test]
fn half_maximum_sits_one_width_from_the_peak() {
    for (mode, params) in cases() {
        let f = energy_distribution(mode, &params).unwrap();
        let (ups, loc) = (f.hwhm(), f.location());
        assert!((f.pdf(loc + ups) - 0.5 * f.peak()).abs() < 1e-14);
        assert!((f.pdf(loc - ups) - 0.5 * f.peak()).abs() < 1e-14);
        let energies: Vec<f64> = (0..=2000).map(|k| loc - 4.0 * ups + 8.0 * ups * k as f64 / 2000.0).collect();
        let values: Vec<f64> = energies.iter().map(|&e| f.pdf(e)).collect();
        let measured = measure_hwhm(&energies, &values).unwrap();
        assert!((measured / ups - 1.0).abs() < 1e-3);
    }
}

#[test]
fn elliptic_widths_grow_while_hyperbolic_widths_do_not() {
    let (alpha, gamma) = (0.5, 0.3);
    let ell = NhParams::elliptic(alpha, gamma).unwrap();
    let hyp = NhParams::hyperbolic(alpha, gamma).unwrap();
    let spacing = (1.0 + alpha * alpha).sqrt();
    for nu in 0..5 {
        let a = energy_distribution(ModeIndex::new(0, nu), &ell).unwrap();
        let b = energy_distribution(ModeIndex::new(0, nu + 1), &ell).unwrap();
        assert!((b.hwhm() - a.hwhm() - alpha).abs() < 1e-14);
        assert!((a.location() - b.location() - 1.0).abs() < 1e-14);

        let a = hyperbolic_energy_distribution(nu, &hyp).unwrap();
        let b = hyperbolic_energy_distribution(nu + 1, &hyp).unwrap();
        assert_eq!(a.hwhm(), b.hwhm());
        assert!((b.location() - a.location() - spacing).abs() < 1e-14);
    }
}

#[test]
fn non_decaying_modes_have_no_distribution() {
    let critical = NhParams::elliptic(1.0, -1.0).unwrap();
    assert!(energy_distribution(ModeIndex::new(0, 0), &critical).is_err());
    let growing = NhParams::elliptic(1.0, -2.0).unwrap();
    assert!(time_signal(ModeIndex::new(0, 0), &growing).is_err());
    assert!(hyperbolic_energy_distribution(1, &NhParams::hyperbolic(1.0, 0.0).unwrap()).is_err());
}
