use std::f64::consts::PI;

use nhwigner::elliptic::{eigenvalue, evolve_analytic, project, SpectralCoeffs};
use nhwigner::grid::{inner_product, GridSpec, WignerGrid};
use nhwigner::io::{read_coeffs, read_csv_matrix, write_coeffs, write_csv_matrix, RunConfig};
use nhwigner::lineshape::Lorentzian;
use nhwigner::special::{laguerre, laguerre_sequence};
use nhwigner::{ModeIndex, NhParams, Parity};
use proptest::prelude::*;

fn coeffs_strategy(n_max: u32, nu_max: u32) -> impl Strategy<Value = SpectralCoeffs> {
    let count = ((n_max + 1) * (2 * nu_max + 1)) as usize;
    prop::collection::vec(-1.0f64..1.0, count).prop_map(move |v| {
        let mut c = SpectralCoeffs::new(n_max, nu_max);
        let mut it = v.into_iter();
        for n in 0..=n_max {
            for nu in 0..=nu_max as i32 {
                c.set(ModeIndex::new(n, nu), Parity::Plus, it.next().unwrap()).unwrap();
                if nu > 0 {
                    c.set(ModeIndex::new(n, nu), Parity::Minus, it.next().unwrap()).unwrap();
                }
            }
        }
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_inverts_synthesis(c in coeffs_strategy(3, 3)) {
        let spec = GridSpec::new(6.0, 129).unwrap();
        let params = NhParams::elliptic(1.0, 0.0).unwrap();
        let w = evolve_analytic(&c, 0.0, spec, &params).unwrap();
        let back = project(&w, 3, 3);
        for (m, p, v) in c.iter() {
            prop_assert!((back.coeffs.get(m, p) - v).abs() < 1e-8);
        }
        prop_assert!(back.residual < 1e-8);
    }

    #[test]
    fn analytic_evolution_is_linear_and_decays_each_mode(
        c in coeffs_strategy(2, 2), t in 0.0f64..2.0, gamma in -0.5f64..1.0
    ) {
        let spec = GridSpec::new(6.0, 65).unwrap();
        let params = NhParams::elliptic(1.0, gamma).unwrap();
        let w = evolve_analytic(&c, t, spec, &params).unwrap();
        let proj = project(&w, 2, 2).coeffs;
        for (m, _, _) in c.iter() {
            let decay = (-eigenvalue(m, &params).unwrap().re * t).exp();
            let (a, b) = (c.get(m, Parity::Plus), c.get(m, Parity::Minus));
            let energy = (proj.get(m, Parity::Plus).powi(2) + proj.get(m, Parity::Minus).powi(2)).sqrt();
            prop_assert!((energy - decay * (a * a + b * b).sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn inner_product_is_symmetric(seed_a in 0.1f64..2.0, seed_b in -1.0f64..1.0) {
        let spec = GridSpec::new(4.0, 33).unwrap();
        let x = WignerGrid::from_fn(spec, |q, p| (-(seed_a * q * q + p * p)).exp());
        let y = WignerGrid::from_fn(spec, |q, p| (q - seed_b) * (-(q * q + p * p)).exp());
        prop_assert_eq!(inner_product(&x, &y).unwrap(), inner_product(&y, &x).unwrap());
    }

    #[test]
    fn csv_matrix_round_trip_is_exact(values in prop::collection::vec(-1e3f64..1e3, 16 * 16)) {
        let spec = GridSpec::new(2.5, 16).unwrap();
        let grid = WignerGrid::from_values(spec, values, 0.0).unwrap();
        let mut buf = Vec::new();
        write_csv_matrix(&mut buf, &grid).unwrap();
        let back = read_csv_matrix(buf.as_slice()).unwrap();
        prop_assert_eq!(back.values(), grid.values());
        prop_assert!(back.spec().same_as(grid.spec()));
    }

    #[test]
    fn coefficient_file_round_trip_is_exact(c in coeffs_strategy(2, 3)) {
        let mut buf = Vec::new();
        write_coeffs(&mut buf, &c).unwrap();
        let back = read_coeffs(buf.as_slice()).unwrap();
        for (m, p, v) in c.iter() {
            prop_assert_eq!(back.get(m, p), v);
        }
    }

    #[test]
    fn run_config_round_trip(
        alpha in 0.01f64..5.0, gamma in -3.0f64..3.0, n in 16usize..600, t_end in 0.01f64..10.0,
        normalized: bool
    ) {
        let cfg = RunConfig {
            params: NhParams::elliptic(alpha, gamma).unwrap(),
            n_points: n,
            t_end,
            normalized,
            ..RunConfig::default()
        };
        prop_assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn laguerre_sequence_agrees_pointwise(n_max in 0u32..30, a in 0u32..8, x in 0.0f64..40.0) {
        let mut seq = Vec::new();
        laguerre_sequence(n_max, a, x, &mut seq);
        for (n, v) in seq.iter().enumerate() {
            prop_assert_eq!(*v, laguerre(n as u32, a, x));
        }
    }

    #[test]
    fn lorentzian_half_maximum_and_mass(hwhm in 1e-3f64..10.0, loc in -10.0f64..10.0) {
        let f = Lorentzian::new(hwhm, loc).unwrap();
        prop_assert!((f.pdf(loc + hwhm) / f.peak() - 0.5).abs() < 1e-12);
        prop_assert!((f.peak() - 1.0 / (PI * hwhm)).abs() < 1e-12 * f.peak());
        prop_assert!((f.mass(loc - hwhm, loc + hwhm) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn spectrum_is_evenly_spaced(n in 0u32..50, nu in -20i32..20, alpha in 0.01f64..5.0, gamma in -5.0f64..5.0) {
        let p = NhParams::elliptic(alpha, gamma).unwrap();
        let a = eigenvalue(ModeIndex::new(n, nu), &p).unwrap();
        let b = eigenvalue(ModeIndex::new(n + 1, nu), &p).unwrap();
        prop_assert!((b.re - a.re - 2.0 * alpha).abs() < 1e-9);
        prop_assert_eq!(a.im, -(nu as f64));
    }
}
