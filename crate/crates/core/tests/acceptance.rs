//! Acceptance suite: one pass/fail line per criterion. Expected values come
//! from closed forms computed here, not from the library's own paths.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ballnorm::averaging::ball_difference;
use ballnorm::averaging::pointwise::{
    log_radii, pointwise_difference, polynomial_reproduction_check, Monomial, PointProbe,
};
use ballnorm::averaging::{higher_average, verify_central_difference_identity, AverageSpec};
use ballnorm::body::BodySpec;
use ballnorm::filter_bank::{
    band_project, build_bank, eta_project, low_pass, t_kj_apply, FilterBank,
};
use ballnorm::harness::{
    decay_series, decay_slope, equivalence_drift, generate, slope_window, standard_family,
    TestFunctionSpec,
};
use ballnorm::multiplier::{
    a_ell, a_ell_body, ball_hat, body_ratio_and_derivative_check, gamma_n, m_ell,
    trig_identity_residual, BodyCheckPlan,
};
use ballnorm::norms::hardy::{discrete_hardy_check, hardy_batch, FiniteSequence};
use ballnorm::norms::maximal::maximal_control_check;
use ballnorm::norms::{Method, NormParams, Space};
use ballnorm::quadrature::QuadratureRule;
use ballnorm::torus::{Exponent, GridSpec, SampledField};

const TOL_SUM_IDENTITY: f64 = 1e-10;
const TOL_BALL_HAT: f64 = 1e-12;
const TOL_GAMMA: f64 = 1e-13;
const TOL_TRIG: f64 = 1e-10;
const TOL_CENTRAL_DIFF: f64 = 1e-9;
const TOL_REPRODUCTION: f64 = 1e-9;
const TOL_TOP_SLOPE: f64 = 0.05;
const TOL_QUARTIC: f64 = 1e-9;
const TOL_PARTITION: f64 = 1e-14;
const TOL_RECONSTRUCTION: f64 = 1e-12;
const MIN_C0: f64 = 0.05;
const TOL_DECOMPOSITION: f64 = 1e-10;
const TOL_SLOPE: f64 = 0.1;
const TOL_SLOPE_ORACLE: f64 = 1e-8;
const TOL_BRACKET_DRIFT: f64 = 0.1;
const MAX_MAXIMAL_FACTOR: f64 = 2.0;
const TOL_HARDY_SEEDS: f64 = 0.2;
const TOL_CUBE_VS_BALL: f64 = 1e-10;
const TOL_GRADIENT_STEP: f64 = 1e-3;

/// Outcome of one criterion: verdict plus a one-line measurement summary.
struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn sinc(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        s.sin() / s
    }
}

/// `3(sin s − s cos s)/s³`, with its Taylor series near the origin.
fn ball_hat_3d(s: f64) -> f64 {
    if s < 0.5 {
        let mut term_sum = 0.0;
        let mut fact = 1.0; // (2k+1)!
        for k in 1..=11u32 {
            fact *= ((2 * k) * (2 * k + 1)) as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            term_sum += sign * 2.0 * k as f64 * s.powi(2 * k as i32 - 2) / fact;
        }
        3.0 * term_sum
    } else {
        3.0 * (s.sin() - s * s.cos()) / s.powi(3)
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `A_ℓ(s)` in one dimension from the sinc symbol of the interval average.
fn a_ell_1d(ell: u32, s: f64) -> f64 {
    let c = binomial(2 * ell as u64, ell as u64);
    let m: f64 = (1..=ell)
        .map(|j| {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            2.0 / c * sign * binomial(2 * ell as u64, (ell - j) as u64) * sinc(j as f64 * s)
        })
        .sum();
    1.0 - m
}

fn mean_zero(f: SampledField) -> SampledField {
    let mean = f.real_parts().iter().sum::<f64>() / f.grid().len() as f64;
    f.sub(&SampledField::constant(*f.grid(), mean)).unwrap()
}

fn criterion_1() -> Verdict {
    let rule = QuadratureRule::standard();
    let mut worst: f64 = 0.0;
    for ell in 1..=3 {
        for dim in 1..=3 {
            for i in 0..10_000 {
                let s = 50.0 * i as f64 / 9_999.0;
                let r =
                    m_ell(ell, dim, s, &rule).unwrap() - 1.0 + a_ell(ell, dim, s, &rule).unwrap();
                worst = worst.max(r.abs());
            }
        }
    }
    verdict(
        worst <= TOL_SUM_IDENTITY,
        format!("max |m_l - 1 + A_l| = {worst:.2e} (tol {TOL_SUM_IDENTITY:.0e}), l,n in 1..3, 10^4 samples on [0,50]"),
    )
}

fn criterion_2() -> Verdict {
    let rule = QuadratureRule::standard();
    let (mut w1, mut w3): (f64, f64) = (0.0, 0.0);
    for i in 1..=10_000 {
        let s = 50.0 * i as f64 / 10_000.0;
        w1 = w1.max((ball_hat(1, s, &rule).unwrap() - sinc(s)).abs());
        w3 = w3.max((ball_hat(3, s, &rule).unwrap() - ball_hat_3d(s)).abs());
    }
    let gammas = [(1, 1.0), (2, 4.0 / PI), (3, 1.5)];
    let wg = gammas
        .iter()
        .map(|&(n, g)| (gamma_n(n).unwrap() - g).abs())
        .fold(0.0, f64::max);
    verdict(
        w1 <= TOL_BALL_HAT && w3 <= TOL_BALL_HAT && wg <= TOL_GAMMA,
        format!("n=1 err {w1:.2e}, n=3 err {w3:.2e} (tol {TOL_BALL_HAT:.0e}); gamma err {wg:.2e} (tol {TOL_GAMMA:.0e})"),
    )
}

fn criterion_3() -> Verdict {
    let mut worst: f64 = 0.0;
    for ell in 1..=5 {
        for i in 0..10_000 {
            let s = 8.0 * PI * i as f64 / 9_999.0;
            worst = worst.max(trig_identity_residual(ell, s));
        }
    }
    verdict(
        worst <= TOL_TRIG,
        format!("max residual {worst:.2e} (tol {TOL_TRIG:.0e}), l in 1..5 on [0,8pi]"),
    )
}

fn criterion_4() -> Verdict {
    let grid = GridSpec::new(1, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let f = generate(&TestFunctionSpec::power_spectrum(1.0, seed, Some(32), grid)).unwrap();
        let probes: Vec<usize> = (0..16).map(|_| rng.gen_range(0..grid.len())).collect();
        for ell in 1..=3 {
            let t = rng.gen_range(0.02..0.9);
            let spec = AverageSpec::ball(ell, t, 1).unwrap();
            let r = verify_central_difference_identity(&f, &spec, &probes).unwrap() / f.max_abs();
            worst = worst.max(r);
        }
    }
    verdict(
        worst <= TOL_CENTRAL_DIFF,
        format!("max residual / |f|_inf = {worst:.2e} (tol {TOL_CENTRAL_DIFF:.0e}), 10 fields x 16 probes x l in 1..3"),
    )
}

fn criterion_5() -> Verdict {
    let radii = log_radii(0.01, 0.5, 8);
    let (mut repro, mut slope_dev): (f64, f64) = (0.0, 0.0);
    let mut slopes = 0;
    for ell in 1..=3 {
        for dim in 1..=2 {
            let r = polynomial_reproduction_check(2 * ell, ell, dim, &radii, BodySpec::ball(dim))
                .unwrap();
            repro = repro.max(r.max_reproduced_residual());
            slope_dev = slope_dev.max(r.max_slope_deviation());
            slopes += r.top_degree.iter().filter(|m| m.slope.is_some()).count();
        }
    }
    let quartic = Monomial::new(vec![4]);
    let mut quartic_err: f64 = 0.0;
    for &t in &radii {
        let probe = PointProbe::new(vec![0.3], 8, &quartic);
        let got = pointwise_difference(&probe, &AverageSpec::ball(2, t, 1).unwrap()).unwrap();
        let expected = 0.8 * t.powi(4);
        quartic_err = quartic_err.max((got - expected).abs() / expected);
    }
    verdict(
        repro <= TOL_REPRODUCTION && slope_dev <= TOL_TOP_SLOPE && slopes >= 6 && quartic_err <= TOL_QUARTIC,
        format!(
            "degree<2l residual {repro:.2e} (tol {TOL_REPRODUCTION:.0e}); degree-2l slope dev {slope_dev:.2e} over {slopes} fits (tol {TOL_TOP_SLOPE}); x^4 vs 4t^4/5 rel err {quartic_err:.2e} (tol {TOL_QUARTIC:.0e})"
        ),
    )
}

fn oracle_step(s: f64) -> f64 {
    let psi = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let v = s.log2();
        psi(1.0 - v) / (psi(1.0 - v) + psi(v))
    }
}

fn criterion_6() -> Verdict {
    let bank = build_bank();
    let mut partition: f64 = 0.0;
    for i in 0..10_000 {
        let s = 2f64.powf(-18.0 + 36.0 * i as f64 / 9_999.0);
        let total: f64 = (-20..=20)
            .map(|j| FilterBank::phi_hat(2f64.powi(-j) * s))
            .sum();
        partition = partition.max((total - 1.0).abs());
    }
    let mut recon: f64 = 0.0;
    for (dim, n, cap) in [(1, 256, 100), (2, 64, 25)] {
        let grid = GridSpec::new(dim, n).unwrap();
        let f = generate(&TestFunctionSpec::power_spectrum(0.5, 11, Some(cap), grid)).unwrap();
        let mut acc = low_pass(&f).unwrap();
        for j in 1..=grid.nyquist_level() + 2 {
            acc = acc.add(&band_project(&f, j, &bank).unwrap()).unwrap();
        }
        recon = recon.max(acc.max_abs_difference(&f) / f.max_abs());
    }
    let c0_oracle = (0..=10_000)
        .map(|i| {
            let s = 0.6 + (5.0 / 3.0 - 0.6) * i as f64 / 10_000.0;
            oracle_step(s) - oracle_step(2.0 * s)
        })
        .fold(f64::INFINITY, f64::min);
    let c0_match = (bank.c0 - c0_oracle).abs() <= 1e-12;
    verdict(
        partition <= TOL_PARTITION && recon <= TOL_RECONSTRUCTION && bank.c0 >= MIN_C0 && c0_match,
        format!(
            "partition {partition:.2e} (tol {TOL_PARTITION:.0e}); reconstruction {recon:.2e} (tol {TOL_RECONSTRUCTION:.0e}); c0 = {:.4} (min {MIN_C0}, oracle {c0_oracle:.4})",
            bank.c0
        ),
    )
}

fn criterion_7() -> Verdict {
    let bank = build_bank();
    let mut decomposition: f64 = 0.0;
    let mut reproduction: f64 = 0.0;
    for (dim, n, cap) in [(1, 128, 40), (2, 32, 10)] {
        let grid = GridSpec::new(dim, n).unwrap();
        let f = mean_zero(
            generate(&TestFunctionSpec::power_spectrum(1.0, 3, Some(cap), grid)).unwrap(),
        );
        let scale = f.max_abs();
        let top = grid.nyquist_level() + 2;
        for ell in 1..=3 {
            for k in 0..=4 {
                let spec = AverageSpec::ball(ell, 2f64.powi(-k), dim).unwrap();
                let target = ball_difference(&f, &spec).unwrap();
                let mut acc = SampledField::zeros(grid);
                for j in -2..=top {
                    acc = acc.add(&t_kj_apply(&f, k, j, ell, &bank).unwrap()).unwrap();
                }
                decomposition = decomposition.max(acc.max_abs_difference(&target) / scale);
            }
            for j in 0..=grid.nyquist_level() {
                let spec = AverageSpec::ball(ell, 2f64.powi(-j), dim).unwrap();
                let back =
                    eta_project(&ball_difference(&f, &spec).unwrap(), j, ell, &bank).unwrap();
                let band = band_project(&f, j, &bank).unwrap();
                reproduction = reproduction.max(back.max_abs_difference(&band) / scale);
            }
        }
    }
    verdict(
        decomposition <= TOL_DECOMPOSITION && reproduction <= TOL_DECOMPOSITION,
        format!("decomposition {decomposition:.2e}, reproduction {reproduction:.2e} (tol {TOL_DECOMPOSITION:.0e}), l in 1..3, n in 1..2"),
    )
}

fn criterion_8() -> Verdict {
    let grid = GridSpec::new(1, 4096).unwrap();
    let matrix: [(u32, &[f64]); 2] = [(1, &[0.5, 1.0, 1.5]), (2, &[0.5, 1.5, 2.5, 3.5])];
    let ps = [Exponent::Finite(2.0), Exponent::Infinity];
    let mut worst: f64 = 0.0;
    let mut min_window = usize::MAX;
    for (ell, alphas) in matrix {
        let window = slope_window(&grid, ell).unwrap();
        min_window = min_window.min(window.scales().count());
        for &alpha in alphas {
            let f = generate(&TestFunctionSpec::weierstrass(alpha, None, grid)).unwrap();
            for p in ps {
                let fit = decay_slope(&f, ell, p, window).unwrap();
                worst = worst.max((fit.slope + alpha.min(2.0 * ell as f64)).abs());
            }
        }
    }
    // Saturation split: same W_α under ℓ = 1 and ℓ = 2.
    let mut split_ok = true;
    let mut split = Vec::new();
    for alpha in [1.5, 2.5, 3.0] {
        let f = generate(&TestFunctionSpec::weierstrass(alpha, None, grid)).unwrap();
        let s1 = decay_slope(&f, 1, Exponent::Infinity, slope_window(&grid, 1).unwrap())
            .unwrap()
            .slope;
        let s2 = decay_slope(&f, 2, Exponent::Infinity, slope_window(&grid, 2).unwrap())
            .unwrap()
            .slope;
        if alpha < 2.0 {
            split_ok &= (s1 - s2).abs() <= 2.0 * TOL_SLOPE;
        } else {
            split_ok &= (s1 + 2.0).abs() <= TOL_SLOPE && (s2 + alpha).abs() <= TOL_SLOPE;
        }
        split.push(format!("a={alpha}: {s1:.2}/{s2:.2}"));
    }
    // Direct per-mode evaluation of the sup norm, which sits at x = 0.
    let mut oracle: f64 = 0.0;
    let levels = grid.nyquist_level();
    for (ell, alpha) in [(1, 0.5), (1, 3.0), (2, 3.0)] {
        let f = generate(&TestFunctionSpec::weierstrass(alpha, None, grid)).unwrap();
        let window = slope_window(&grid, ell).unwrap();
        for (k, d) in decay_series(&f, ell, Exponent::Infinity, window).unwrap() {
            let direct: f64 = (0..=levels)
                .map(|j| 2f64.powf(-j as f64 * alpha) * a_ell_1d(ell, 2f64.powi(j - k)))
                .sum();
            oracle = oracle.max((d - direct).abs() / direct);
        }
    }
    verdict(
        worst <= TOL_SLOPE && split_ok && min_window >= 5 && oracle <= TOL_SLOPE_ORACLE,
        format!(
            "max |slope + min(a,2l)| = {worst:.3} (tol {TOL_SLOPE}), window {min_window} scales, N=4096; split l=1/l=2 [{}]; per-mode oracle rel err {oracle:.1e}",
            split.join(", ")
        ),
    )
}

fn criterion_9() -> Verdict {
    let family = standard_family(GridSpec::new(1, 1024).unwrap());
    let mut worst: f64 = 0.0;
    let mut positive = true;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut runs = 0;
    for space in [Space::Besov, Space::TriebelLizorkin] {
        for homogeneous in [true, false] {
            for alpha in [0.7, 1.9, 3.1] {
                for p in [Exponent::Finite(2.0), Exponent::Infinity] {
                    for q in [Exponent::Finite(2.0), Exponent::Infinity] {
                        let mut params = NormParams::new(space, Method::Ball, alpha, p, q, 2);
                        if !homogeneous {
                            params = params.inhomogeneous();
                        }
                        let drift = equivalence_drift(&family, &params).unwrap();
                        for study in [&drift.coarse, &drift.fine] {
                            let (a, b) = (study.min_ratio.unwrap(), study.max_ratio.unwrap());
                            positive &= a > 0.0 && b.is_finite();
                            lo = lo.min(a);
                            hi = hi.max(b);
                        }
                        worst = worst.max(drift.worst_change());
                        runs += 1;
                    }
                }
            }
        }
    }
    verdict(
        positive && worst <= TOL_BRACKET_DRIFT,
        format!("{runs} configurations, ratios in [{lo:.3}, {hi:.3}], worst bracket drift N=1024->2048 {worst:.4} (tol {TOL_BRACKET_DRIFT})"),
    )
}

fn criterion_10() -> Verdict {
    let bank = build_bank();
    let mut worst: f64 = 1.0;
    let mut finite = true;
    let mut parts = Vec::new();
    for alpha in [0.5, 1.0, 1.5] {
        let c: Vec<f64> = [1024usize, 2048]
            .iter()
            .map(|&n| {
                let f = generate(&TestFunctionSpec::weierstrass(
                    alpha,
                    None,
                    GridSpec::new(1, n).unwrap(),
                ))
                .unwrap();
                maximal_control_check(&f, 1, &bank, &[2, 3, 4, 5, 6])
                    .unwrap()
                    .max_constant
            })
            .collect();
        finite &= c.iter().all(|v| v.is_finite() && *v > 0.0);
        worst = worst.max(c[0].max(c[1]) / c[0].min(c[1]));
        parts.push(format!("a={alpha}: {:.3}/{:.3}", c[0], c[1]));
    }
    verdict(
        finite && worst <= MAX_MAXIMAL_FACTOR,
        format!(
            "constants N=1024/2048 [{}], worst factor {worst:.4} (max {MAX_MAXIMAL_FACTOR})",
            parts.join(", ")
        ),
    )
}

fn criterion_11() -> Verdict {
    let mut hold = true;
    let mut drift: f64 = 0.0;
    for beta in [0.5, 1.0, 2.0] {
        for q in [
            Exponent::Finite(0.5),
            Exponent::Finite(1.0),
            Exponent::Finite(2.0),
            Exponent::Infinity,
        ] {
            let a = hardy_batch(beta, q, 1000, 20, 1).unwrap();
            let b = hardy_batch(beta, q, 1000, 20, 2).unwrap();
            hold &= a.all_hold && b.all_hold;
            for (x, y) in [
                (a.max_forward_ratio, b.max_forward_ratio),
                (a.max_backward_ratio, b.max_backward_ratio),
            ] {
                drift = drift.max((x - y).abs() / x.min(y));
            }
        }
    }
    let delta =
        discrete_hardy_check(&FiniteSequence::delta(0), 1.0, Exponent::Finite(1.0)).unwrap();
    let exact = delta.forward_ratio == 2.0 && delta.backward_ratio == 2.0;
    verdict(
        hold && drift <= TOL_HARDY_SEEDS && exact,
        format!(
            "all 24000 sequences hold: {hold}; seed drift of batch max {drift:.3} (tol {TOL_HARDY_SEEDS}); delta ratios {} / {}",
            delta.forward_ratio, delta.backward_ratio
        ),
    )
}

fn criterion_12() -> Verdict {
    let rule = QuadratureRule::standard();
    let mut ratio_lo = f64::INFINITY;
    let mut ratio_hi: f64 = 0.0;
    let mut step_change: f64 = 0.0;
    for dim in 1..=2 {
        let plan = BodyCheckPlan::standard(dim, 16, 40);
        for ell in 1..=3 {
            let r =
                body_ratio_and_derivative_check(ell, &BodySpec::cube(dim), &plan, &rule).unwrap();
            ratio_lo = ratio_lo.min(r.ratio_min);
            ratio_hi = ratio_hi.max(r.ratio_max);
            step_change = step_change.max(r.gradient_constant_relative_change);
        }
    }
    let mut coincide: f64 = 0.0;
    let grid = GridSpec::new(1, 256).unwrap();
    let f = generate(&TestFunctionSpec::power_spectrum(1.0, 5, Some(60), grid)).unwrap();
    for ell in 1..=3 {
        for i in 1..=400 {
            let s = 4.0 * i as f64 / 400.0;
            let cube = a_ell_body(ell, &BodySpec::cube(1), &[s], &rule).unwrap();
            coincide = coincide.max((cube - a_ell_1d(ell, s)).abs());
        }
        for t in [0.05, 0.3, 0.9] {
            let cube =
                higher_average(&f, &AverageSpec::new(ell, t, BodySpec::cube(1)).unwrap()).unwrap();
            let ball = higher_average(&f, &AverageSpec::ball(ell, t, 1).unwrap()).unwrap();
            coincide = coincide.max(cube.max_abs_difference(&ball) / f.max_abs());
        }
    }
    verdict(
        ratio_lo > 0.0 && ratio_hi.is_finite() && coincide <= TOL_CUBE_VS_BALL && step_change <= TOL_GRADIENT_STEP,
        format!(
            "ratio bracket [{ratio_lo:.3e}, {ratio_hi:.3e}] on |x|<=4; 1-D cube vs ball {coincide:.2e} (tol {TOL_CUBE_VS_BALL:.0e}); gradient constant change under step halving {step_change:.2e} (tol {TOL_GRADIENT_STEP:.0e})"
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 12] = [
        ("multiplier sum identity", criterion_1),
        ("closed-form ball multipliers", criterion_2),
        ("trigonometric identity", criterion_3),
        ("central-difference identity", criterion_4),
        ("polynomial annihilation", criterion_5),
        ("filter bank", criterion_6),
        ("decomposition and reproduction", criterion_7),
        ("slope recovery", criterion_8),
        ("norm equivalence bracket", criterion_9),
        ("maximal control", criterion_10),
        ("discrete Hardy inequalities", criterion_11),
        ("cube body extension", criterion_12),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !outcome.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} [{}] {}: {} ({:.1}s)",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            name,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
