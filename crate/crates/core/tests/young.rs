use std::f64::consts::PI;

use proptest::prelude::*;

use nlcap::geometry::pv::Angular;
use nlcap::reduction::build_phi;
use nlcap::young::{
    cancellation_d, classify_regime, dual_angle, sigma_bound, solve_contact_angle,
    wedge_young_residual, Deficit, Regime, YoungProblem,
};
use nlcap::{AnisotropyFn, Error, PhiProfile};

/// Tanh-sinh quadrature on `[a, b]`; endpoint power singularities cost nothing.
fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let r = 0.5 * (b - a);
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    for k in -400..=400 {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let w = 0.5 * PI * t.cosh() / u.cosh().powi(2);
        // distance to the nearer endpoint without cancellation
        let d = r / (u.abs().exp() * u.abs().cosh());
        let x = if u < 0.0 { a + d } else { b - d };
        if d > 0.0 && x > a && x < b {
            sum += f(x) * w;
        }
    }
    sum * r * h
}

fn sin_moment(phi: impl Fn(f64) -> f64, s: f64, a: f64, b: f64) -> f64 {
    tanh_sinh(|t| phi(t) * t.sin().powf(s), a, b)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn trig(c: &[(f64, f64)], a: f64) -> f64 {
    1.0 + c
        .iter()
        .enumerate()
        .map(|(k, &(p, q))| {
            let f = 2.0 * (k + 1) as f64 * a;
            p * f.cos() + q * f.sin()
        })
        .sum::<f64>()
}

fn trig_profile(s: f64, c: &[(f64, f64)]) -> PhiProfile {
    PhiProfile::from_fn(s, 1024, |a| trig(c, a)).unwrap()
}

#[test]
fn quadrature_oracle_is_sound() {
    // ∫₀^π sin^s = √π Γ((1+s)/2) / Γ(1+s/2); for s = 1 it is 2
    assert!((sin_moment(|_| 1.0, 1.0, 0.0, PI) - 2.0).abs() < 1e-13);
    assert!(
        (sin_moment(|_| 1.0, 0.5, 0.0, PI / 2.0) - 0.5 * sin_moment(|_| 1.0, 0.5, 0.0, PI)).abs()
            < 1e-13
    );
}

#[test]
fn isotropic_angle_matches_volume_fraction_oracle() {
    let total = sin_moment(|_| 1.0, 0.5, 0.0, PI);
    let want = bisect(
        |th| sin_moment(|_| 1.0, 0.5, 0.0, th) - 0.65 * total,
        1e-3,
        PI - 1e-3,
    );
    let sol = solve_contact_angle(&YoungProblem::isotropic(0.5, 0.5, 0.3).unwrap()).unwrap();
    assert_eq!(sol.regime, Regime::Interior);
    assert!(sol.unique);
    assert!((sol.theta - want).abs() < 1e-8, "{} vs {want}", sol.theta);

    let (reduced, direct) =
        wedge_young_residual(&YoungProblem::isotropic(0.5, 0.5, 0.3).unwrap(), sol.theta).unwrap();
    assert!(
        reduced.abs() < 1e-8 && direct.abs() < 1e-6,
        "({reduced}, {direct})"
    );
}

#[test]
fn sigma_bound_matches_oracle() {
    let s = 0.5;
    let one = PhiProfile::constant(s, 1.0).unwrap();
    let two = PhiProfile::constant(s, 2.0).unwrap();
    assert!((sigma_bound(&one, &one, s) - 1.0).abs() < 1e-14);
    assert!((sigma_bound(&two, &one, s) - 2.0).abs() < 1e-14);
    let bumped = PhiProfile::from_fn(s, 1024, |a| 1.0 + a.cos().powi(2)).unwrap();
    let want = sin_moment(|a| 1.0 + a.cos().powi(2), s, 0.0, PI) / sin_moment(|_| 1.0, s, 0.0, PI);
    // the profile is a 1024-point linear interpolant of 1 + cos²
    assert!((sigma_bound(&bumped, &one, s) - want).abs() < 1e-5);
}

#[test]
fn regimes_from_exponents() {
    assert_eq!(
        classify_regime(0.3, 0.7, -1.0, None).unwrap(),
        Regime::Sticking
    );
    assert_eq!(
        classify_regime(0.3, 0.7, 2.0, None).unwrap(),
        Regime::Detachment
    );
    assert_eq!(
        classify_regime(0.5, 0.5, 0.4, Some(1.0)).unwrap(),
        Regime::Interior
    );
    let sol = solve_contact_angle(&YoungProblem::isotropic(0.3, 0.7, -1.0).unwrap()).unwrap();
    assert_eq!((sol.theta, sol.residual), (0.0, None));
    for (s1, s2) in [(0.3, 0.7), (0.7, 0.3), (0.5, 0.5)] {
        let sol = solve_contact_angle(&YoungProblem::isotropic(s1, s2, 0.0).unwrap()).unwrap();
        assert!((sol.theta - PI / 2.0).abs() < 1e-9);
    }
}

#[test]
fn oversized_sigma_has_no_interior_root() {
    let p = YoungProblem::isotropic(0.5, 0.5, 2.0).unwrap();
    assert!(matches!(
        solve_contact_angle(&p),
        Err(Error::NoInteriorSolution { .. })
    ));
}

#[test]
fn wedge_residual_at_quarter_pi() {
    let (s, theta) = (0.4, PI / 4.0);
    let p = YoungProblem::isotropic(s, s, 0.0).unwrap();
    let (reduced, direct) = wedge_young_residual(&p, theta).unwrap();
    let want = (sin_moment(|_| 1.0, s, 0.0, theta) - sin_moment(|_| 1.0, s, theta, PI))
        / (s * theta.sin().powf(s));
    assert!(want < 0.0);
    assert!((reduced - want).abs() < 1e-10 * want.abs());
    assert!(
        (direct - want).abs() < 1e-6 * want.abs(),
        "{direct} vs {want}"
    );

    let (r, d) = wedge_young_residual(&p, PI / 2.0).unwrap();
    assert!(r.abs() < 1e-12 && d.abs() < 1e-8);
}

#[test]
fn cancellation_is_monotone_with_one_sign_change() {
    let a = AnisotropyFn::constant(2, 1.0).unwrap();
    for theta in [0.5, PI / 2.0, 2.3] {
        let d: Vec<f64> = (1..40)
            .map(|k| {
                cancellation_d(
                    Angular::Anisotropy(&a),
                    0.5,
                    theta,
                    2.0 * PI * k as f64 / 40.0,
                )
                .unwrap()
            })
            .collect();
        assert!(d.windows(2).all(|w| w[1] > w[0]), "θ = {theta}");
        assert_eq!(
            d.windows(2).filter(|w| w[0] < 0.0 && w[1] >= 0.0).count(),
            1
        );
        assert!(
            cancellation_d(Angular::Anisotropy(&a), 0.5, theta, theta)
                .unwrap()
                .abs()
                < 1e-8
        );
    }
    let near = cancellation_d(Angular::Anisotropy(&a), 0.5, 1.0, 0.05).unwrap();
    let far = cancellation_d(Angular::Anisotropy(&a), 0.5, 1.0, 0.2).unwrap();
    assert!(near < far && far < 0.0);
}

#[test]
fn dual_angle_reflects_the_contact_angle() {
    let s = 0.5;
    let a = AnisotropyFn::planar(0.5, 1.5, |t| 1.0 + 0.5 * (2.0 * t).cos()).unwrap();
    let phi = build_phi(&a, 2, s, 1024).unwrap();
    let star = solve_contact_angle(&YoungProblem::new(s, s, 0.0, phi.clone(), None).unwrap())
        .unwrap()
        .theta;
    // this weight is symmetric about π/2, so both angles are right angles
    assert!((star - PI / 2.0).abs() < 1e-9);
    let r = dual_angle(Angular::Profile(&phi), s, star, 0.0).unwrap();
    assert!((r.theta_hat - PI / 2.0).abs() < 1e-6);

    let tilted = AnisotropyFn::planar(0.5, 1.5, |t| 1.0 + 0.5 * (2.0 * t + 0.6).cos()).unwrap();
    let phi = build_phi(&tilted, 2, s, 1024).unwrap();
    let star = solve_contact_angle(&YoungProblem::new(s, s, 0.0, phi.clone(), None).unwrap())
        .unwrap()
        .theta;
    assert!((star - PI / 2.0).abs() > 0.05);
    let r = dual_angle(Angular::Profile(&phi), s, star, 0.0).unwrap();
    assert!(
        (r.theta_hat - (PI - star)).abs() < 1e-6,
        "{} vs {}",
        r.theta_hat,
        PI - star
    );

    let one = AnisotropyFn::constant(2, 1.0).unwrap();
    let r = dual_angle(Angular::Anisotropy(&one), s, PI / 2.0, 0.0).unwrap();
    assert!((r.theta_hat - PI / 2.0).abs() < 1e-8);
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-0.15..0.15f64, -0.15..0.15f64), 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deficit_is_increasing_with_the_predicted_slope(
        c1 in coeffs(), c2 in coeffs(), s in 0.1..0.9f64, frac in -0.9..0.9f64,
        pairs in prop::collection::vec((0.01..3.13f64, 0.01..3.13f64), 200),
    ) {
        let (phi1, phi2) = (trig_profile(s, &c1), trig_profile(s, &c2));
        let sigma = frac * sigma_bound(&phi1, &phi2, s);
        let w = Deficit::new(&phi1, Some(&phi2), s, sigma);
        for (a, b) in pairs {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(w.eval(lo) < w.eval(hi));
        }
        for k in 1..20 {
            let th = PI * k as f64 / 20.0;
            let fd = (w.eval(th + 1e-6) - w.eval(th - 1e-6)) / 2e-6;
            let want = 2.0 * phi1.eval(th) * th.sin().powf(s);
            prop_assert!((fd - want).abs() <= 1e-4 * want);
        }
    }

    #[test]
    fn sigma_shifts_the_deficit_uniformly(c1 in coeffs(), c2 in coeffs(), s in 0.1..0.9f64, sigma in -2.0..2.0f64) {
        let (phi1, phi2) = (trig_profile(s, &c1), trig_profile(s, &c2));
        let (w, w0) = (Deficit::new(&phi1, Some(&phi2), s, sigma), Deficit::new(&phi1, Some(&phi2), s, 0.0));
        let shifts: Vec<f64> = (1..50).map(|k| PI * k as f64 / 50.0).map(|th| w.eval(th) - w0.eval(th)).collect();
        let spread = shifts.iter().fold(0.0f64, |m, d| m.max((d - shifts[0]).abs()));
        prop_assert!(spread < 1e-12);
        // the tables interpolate φ₂ linearly on 1024 points
        let want = -sigma * sin_moment(|a| trig(&c2, a), s, 0.0, PI);
        prop_assert!((shifts[0] - want).abs() < 1e-5 * sigma.abs().max(1e-3));
    }

    #[test]
    fn angle_increases_with_sigma(c1 in coeffs(), c2 in coeffs(), s in 0.1..0.9f64) {
        let (phi1, phi2) = (trig_profile(s, &c1), trig_profile(s, &c2));
        let bound = sigma_bound(&phi1, &phi2, s);
        let angles: Vec<f64> = (0..10)
            .map(|k| -0.9 * bound + 1.8 * bound * k as f64 / 9.0)
            .map(|sigma| solve_contact_angle(&YoungProblem::new(s, s, sigma, phi1.clone(), Some(phi2.clone())).unwrap()).unwrap().theta)
            .collect();
        prop_assert!(angles.windows(2).all(|w| w[1] > w[0]), "{:?}", angles);
    }

    #[test]
    fn endpoint_signs_for_equal_profiles(c in coeffs(), s in 0.1..0.9f64, sigma in -0.99..0.99f64) {
        let phi = trig_profile(s, &c);
        let w = Deficit::new(&phi, Some(&phi), s, sigma);
        prop_assert!(w.eval(1e-3) < 0.0 && w.eval(PI - 1e-3) > 0.0);
    }
}
