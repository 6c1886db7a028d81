use ballnorm::filter_bank::FilterBank;
use ballnorm::harness::{equivalence_study, generate, refinement_study, TestFunctionSpec};
use ballnorm::multiplier::{a_ell, MultiplierKind, RadialMultiplierTable};
use ballnorm::norms::{norm, Method, NormParams, ScaleRange, Space};
use ballnorm::quadrature::QuadratureRule;
use ballnorm::torus::{Exponent, GridSpec, SampledField};

fn besov_2_inf(alpha: f64, ell: u32) -> NormParams {
    NormParams::new(
        Space::Besov,
        Method::Ball,
        alpha,
        Exponent::Finite(2.0),
        Exponent::Infinity,
        ell,
    )
    .with_range(ScaleRange::new(0, 7).unwrap())
}

/// A single band bump: both norms are multiplier sums over its spectrum, so
/// the ratio follows from Parseval and the tables.
#[test]
fn single_band_ratio_from_tables() {
    let grid = GridSpec::new(1, 512).unwrap();
    let spec = TestFunctionSpec::band_bump(4, grid);
    let params = besov_2_inf(1.3, 2);
    let study = equivalence_study(std::slice::from_ref(&spec), &params).unwrap();
    let rule = QuadratureRule::gauss_legendre(256).unwrap();
    let bump = |m: f64| FilterBank::phi_hat(m / 16.0);
    let piece = |k: i32, mu: &dyn Fn(f64) -> f64| -> f64 {
        let sum: f64 = (-256i64..256)
            .map(|m| {
                let m = m as f64;
                (mu(m.abs() * 2f64.powi(-k)) * bump(m.abs())).powi(2)
            })
            .sum();
        2f64.powf(k as f64 * 1.3) * (2.0 * std::f64::consts::PI * sum).sqrt()
    };
    let ball = (0..=7)
        .map(|k| piece(k, &|s| a_ell(2, 1, s, &rule).unwrap()))
        .fold(0.0, f64::max);
    let classical = (0..=7)
        .map(|k| piece(k, &FilterBank::phi_hat))
        .fold(0.0, f64::max);
    let predicted = ball / classical;
    let got = study.entries[0].ratio;
    assert!((got / predicted - 1.0).abs() < 0.02, "{got} vs {predicted}");
}

/// Modulating a fixed low-frequency profile up one octave scales the
/// homogeneous norms by 2^α.
#[test]
fn modulated_band_covariance() {
    let grid = GridSpec::new(1, 1024).unwrap();
    let alpha = 1.3;
    let profile = |m: i32, x: &[f64]| {
        let c = (2f64.powi(m) * x[0]).cos();
        (1.0 + x[0].cos()) * c
    };
    for (method, p) in [Method::Ball, Method::Classical]
        .into_iter()
        .flat_map(|m| [(m, Exponent::Finite(2.0)), (m, Exponent::Infinity)])
    {
        let mut params = besov_2_inf(alpha, 2);
        params.method = method;
        params.p = p;
        params.range = Some(ScaleRange::new(0, 8).unwrap());
        let norms: Vec<f64> = (5..=7)
            .map(|m| {
                norm(&SampledField::from_fn(grid, |x| profile(m, x)), &params)
                    .unwrap()
                    .aggregate
            })
            .collect();
        for w in norms.windows(2) {
            let ratio = w[1] / w[0];
            assert!(
                (ratio / 2f64.powf(alpha) - 1.0).abs() < 0.02,
                "{method} p={p:?}: {ratio}"
            );
        }
    }
}

#[test]
fn weierstrass_refinement_tracks_added_levels() {
    let grid = GridSpec::new(1, 256).unwrap();
    let spec = TestFunctionSpec::weierstrass(0.5, None, grid);
    let params = NormParams::new(
        Space::Besov,
        Method::Ball,
        0.25,
        Exponent::Infinity,
        Exponent::Infinity,
        1,
    )
    .with_range(ScaleRange::new(0, 5).unwrap());
    let table = refinement_study(&spec, &params, &[256, 512, 1024, 2048]).unwrap();
    for row in table.rows.iter().skip(1) {
        let change = row.change.unwrap();
        let level = (row.samples_per_axis as f64 / 2.0).log2();
        let expected = 2f64.powf(-0.5 * level);
        assert!(
            change < 3.0 * expected,
            "N={} change {change} vs {expected}",
            row.samples_per_axis
        );
    }
    assert!(!table.growing);
}

#[test]
fn band_bump_refinement_is_exact() {
    let spec = TestFunctionSpec::band_bump(3, GridSpec::new(1, 64).unwrap());
    let params = besov_2_inf(1.0, 2).with_range(ScaleRange::new(0, 4).unwrap());
    let table = refinement_study(&spec, &params, &[64, 128, 256, 512]).unwrap();
    assert!(table.rows.iter().skip(1).all(|r| r.change.unwrap() < 1e-12));
}

#[test]
fn two_dimensional_smoke() {
    let grid = GridSpec::new(2, 256).unwrap();
    let f = generate(&TestFunctionSpec::weierstrass(0.8, None, grid)).unwrap();
    let row = SampledField::from_fn(GridSpec::new(1, 256).unwrap(), |x| {
        (0..=7)
            .map(|j| 2f64.powf(-0.8 * j as f64) * (2f64.powi(j) * x[0]).cos())
            .sum()
    });
    for i in 0..256 {
        for j in [0, 17, 255] {
            assert!((f.values()[i * 256 + j] - row.values()[i]).norm() < 1e-13);
        }
    }
    let table = RadialMultiplierTable::for_grid(MultiplierKind::AEll, 2, &grid, 0.01).unwrap();
    assert!(table.iter().all(|(_, v)| v.is_finite()));
}

/// Moving the scale range outward by two octaves barely changes the norms of
/// band-limited members of the standard family.
#[test]
fn scale_truncation_stability() {
    let grid = GridSpec::new(1, 1024).unwrap();
    let fields = [
        generate(&TestFunctionSpec::band_bump(3, grid)).unwrap(),
        generate(&TestFunctionSpec::power_spectrum(1.0, 1, Some(32), grid)).unwrap(),
    ];
    for f in &fields {
        let mut params = besov_2_inf(1.0, 2);
        params.method = Method::Classical;
        let base = params.default_range(&grid).unwrap();
        let narrow = norm(f, &params.clone().with_range(base)).unwrap().aggregate;
        let wide = norm(f, &params.clone().with_range(base.widened(2)))
            .unwrap()
            .aggregate;
        assert!(
            (wide / narrow - 1.0).abs() <= 0.01,
            "classical {narrow} {wide}"
        );

        params.method = Method::Ball;
        let base = params.default_range(&grid).unwrap();
        let upper = ScaleRange::new(base.k_min, base.k_max + 2).unwrap();
        let narrow = norm(f, &params.clone().with_range(base)).unwrap().aggregate;
        let wide = norm(f, &params.with_range(upper)).unwrap().aggregate;
        assert!((wide / narrow - 1.0).abs() <= 0.01, "ball {narrow} {wide}");
    }
}
