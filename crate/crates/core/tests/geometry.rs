use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use statrs::function::gamma::gamma;

use nlcap::geometry::region::unit;
use nlcap::geometry::{
    c_star, c_star_exact, el_residual, interaction_integral, k_mean_curvature, slab_annulus_bound,
    slab_halfspace_interaction, Mask, Point, QuadratureParams, RegionSpec,
};
use nlcap::kernel::validate_kernel_class;
use nlcap::reduction::build_phi;
use nlcap::young::Deficit;
use nlcap::{AnisotropyFn, KernelForm, KernelSpec, RadialFn};

fn q() -> QuadratureParams {
    QuadratureParams::default()
}

fn grid(mask: Mask, h: f64) -> RegionSpec {
    RegionSpec::grid(Arc::new(mask), h, [0.0, 0.0])
}

fn interaction(k: &KernelSpec, a: &RegionSpec, b: &RegionSpec) -> f64 {
    interaction_integral(k, a, b, &q()).unwrap().value
}

/// `∫₀^∞ f` by the trapezoid rule after `ℓ = e^{sinh u}`.
fn half_line(f: impl Fn(f64) -> f64) -> f64 {
    let h = 5e-3;
    (-1200..=1200)
        .map(|k| {
            let u = k as f64 * h;
            let l = u.sinh().exp();
            f(l) * l * u.cosh()
        })
        .sum::<f64>()
        * h
}

#[test]
fn slab_constant_from_its_line_integral() {
    for (n, s) in [(2usize, 0.5), (3, 0.5), (2, 0.2), (3, 0.8)] {
        let nf = n as f64;
        let line = half_line(|l| l.powf(nf - 2.0) * (l * l + 1.0).powf(-0.5 * (nf + s)));
        let closed =
            gamma(0.5 * (nf - 1.0)) * gamma(0.5 * (1.0 + s)) / (2.0 * gamma(0.5 * (nf + s)));
        assert!(
            (line - closed).abs() < 1e-10 * closed,
            "n = {n}: {line} vs {closed}"
        );
        let from_line = 4.0 * PI.powf(0.5 * (2.0 * nf - 1.0)) * line
            / (s * (1.0 - s) * gamma(0.5 * nf) * gamma(0.5 * (nf - 1.0)));
        let c = c_star(n, s).unwrap();
        assert!((c - from_line).abs() < 1e-9 * c);
    }
    let want = 8.0 * PI.powf(1.5) * gamma(0.75) / gamma(1.25);
    assert!((c_star(2, 0.5).unwrap() - want).abs() < 1e-12 * want);
}

#[test]
fn slab_integral_scaling() {
    for n in [2, 3] {
        let s = 0.5;
        let (base, _) = slab_halfspace_interaction(n, s, 1.0, 1.0, &q()).unwrap();
        let exact = c_star_exact(n, s).unwrap();
        assert!(
            (base - exact).abs() < 1e-6 * exact,
            "n = {n}: {base} vs {exact}"
        );
        let (tall, _) = slab_halfspace_interaction(n, s, 1.0, 2.0, &q()).unwrap();
        let (wide, _) = slab_halfspace_interaction(n, s, 2.0, 1.0, &q()).unwrap();
        assert!((tall / base / 2f64.powf(1.0 - s) - 1.0).abs() < 0.02);
        assert!((wide / base / 2f64.powi(n as i32 - 1) - 1.0).abs() < 0.02);
    }
}

// The shell integral is A·t·r^{1−s} − B·r·t^{1−s} + …, so the pure power
// laws only emerge once (r/t)^s is small.
#[test]
fn annulus_integral_scaling() {
    let (n, s) = (2, 0.5);
    let at = |r: f64, t: f64| slab_annulus_bound(n, s, r, t, &q()).unwrap().0;
    let (r, t) = (1.0, 128.0);
    let base = at(r, t);
    let ratio_t = at(r, 2.0 * t) / base;
    assert!((1.9..=2.1).contains(&ratio_t), "t ratio {ratio_t}");
    let ratio_r = at(2.0 * r, t) / base;
    let want = 2f64.powf(n as f64 - 1.0 - s);
    assert!(
        (ratio_r / want - 1.0).abs() <= 0.05,
        "r ratio {ratio_r} vs {want}"
    );
    let mut prev = 0.0;
    for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let v = at(1.0, t);
        assert!(v > prev);
        prev = v;
    }
}

#[test]
fn far_squares_follow_the_far_field() {
    let k = KernelSpec::isotropic(2, 0.5).unwrap();
    let a = RegionSpec::rect([0.0, 0.0], [1.0, 1.0]).unwrap();
    let b = RegionSpec::rect([10.0, 0.0], [11.0, 1.0]).unwrap();
    let v = interaction(&k, &a, &b);
    let far = k.eval(&[10.0, 0.0]).unwrap();
    assert!((v - far).abs() < 0.02 * far, "{v} vs {far}");
    assert!((v - interaction(&k, &b, &a)).abs() < 1e-9 * v);

    let wide = RegionSpec::rect([0.0, 0.0], [1.5, 1.0]).unwrap();
    let near = RegionSpec::rect([3.0, 0.0], [4.0, 1.0]).unwrap();
    assert!(interaction(&k, &a, &near) < interaction(&k, &wide, &near));
}

#[test]
fn grid_interaction_is_symmetric() {
    let k = KernelSpec::homogeneous(
        AnisotropyFn::planar(0.7, 1.3, |t| 1.0 + 0.3 * (2.0 * t).sin()).unwrap(),
        0.4,
        2.0,
    )
    .unwrap();
    let a = grid(Mask::from_fn(8, 8, |i, j| i + 2 * j < 7), 0.125);
    let b = grid(
        Mask::from_fn(8, 8, |i, j| i + 2 * j > 9 && i % 3 != 0),
        0.125,
    );
    let (ab, ba) = (interaction(&k, &a, &b), interaction(&k, &b, &a));
    assert!((ab - ba).abs() <= 1e-12 * ab);
}

fn labels() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..4, 100)
}

/// Kernel with `K ≥ |ζ|^{-2-s}/λ` for `|ζ| < 0.7` but decaying faster beyond.
fn local_kernel(s: f64) -> KernelSpec {
    let a = AnisotropyFn::planar(0.7, 1.3, |t| 1.0 + 0.3 * (2.0 * t + 0.4).cos()).unwrap();
    let m = RadialFn::new(|r| 1.0 / (1.0 + r.powi(4)));
    KernelSpec::new(
        2,
        s,
        2.0,
        0.6,
        KernelForm::Profiled {
            anisotropy: a,
            radial: m,
        },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grid_interaction_is_additive(cells in labels(), s in 0.1..0.9f64) {
        let k = KernelSpec::isotropic(2, s).unwrap();
        let pick = |l: u8| grid(Mask::from_cells(10, 10, cells.iter().map(|&c| c == l).collect()).unwrap(), 0.1);
        let union = grid(Mask::from_cells(10, 10, cells.iter().map(|&c| c == 1 || c == 2).collect()).unwrap(), 0.1);
        let (a, a2, b) = (pick(1), pick(2), pick(3));
        let whole = interaction(&k, &union, &b);
        let parts = interaction(&k, &a, &b) + interaction(&k, &a2, &b);
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1e-300));
    }

    #[test]
    fn interaction_dominates_the_local_isotropic_one(
        cells in prop::collection::vec(any::<bool>(), 256), px in 0.2..0.8f64, py in 0.2..0.8f64, s in 0.1..0.9f64,
    ) {
        let k = local_kernel(s);
        let h = 1.0 / 16.0;
        let samples: Vec<Vec<f64>> = (1..=40).map(|j| {
            let (r, t) = (0.7 * j as f64 / 40.0, 0.37 * j as f64);
            vec![r * t.cos(), r * t.sin()]
        }).collect();
        prop_assert!(validate_kernel_class(&k, &samples).passed());
        let f = Mask::from_cells(16, 16, cells).unwrap();
        let lhs = interaction(&k, &grid(f.clone(), h), &grid(f.not(), h));
        let (r, p) = (0.3, [px, py]);
        let near = |i: usize, j: usize| ((i as f64 + 0.5) * h - p[0]).hypot((j as f64 + 0.5) * h - p[1]) < r;
        let fb = Mask::from_fn(16, 16, |i, j| f.get(i, j) && near(i, j));
        let cb = Mask::from_fn(16, 16, |i, j| !f.get(i, j) && near(i, j));
        let iso = KernelSpec::isotropic(2, s).unwrap();
        let rhs = interaction(&iso, &grid(fb, h), &grid(cb, h)) / k.lambda;
        prop_assert!(lhs >= rhs * (1.0 - 1e-9), "{} < {}", lhs, rhs);
    }

    #[test]
    fn principal_values_do_not_depend_on_the_pairing_radius(
        theta in 0.3..2.8f64, amp in 0.0..0.5f64, s in 0.2..0.8f64,
    ) {
        let a = AnisotropyFn::planar(1.0 - amp, 1.0 + amp, move |t| 1.0 + amp * (2.0 * t - 0.5).cos()).unwrap();
        let k = KernelSpec::homogeneous(a, s, 2.0).unwrap();
        let wedge = RegionSpec::wedge(0.0, theta).unwrap();
        let at = |d: f64| k_mean_curvature(&k, &wedge, unit(theta), &QuadratureParams { delta: Some(d), ..q() }).unwrap();
        let (v, half) = (at(0.25), at(0.125));
        prop_assert!((v - half).abs() < 1e-6 * v.abs().max(1e-3), "{} vs {}", v, half);
    }
}

#[test]
fn half_space_curvature_vanishes_everywhere() {
    let k = KernelSpec::homogeneous(
        AnisotropyFn::planar(0.6, 1.4, |t| 1.0 + 0.4 * (2.0 * t).cos()).unwrap(),
        0.3,
        2.0,
    )
    .unwrap();
    let e = RegionSpec::half_space([1.0, 2.0], 0.5).unwrap();
    for t in [-3.0, 0.0, 0.7, 12.0] {
        let x: Point = [0.5 - 2.0 * t, t];
        assert!(k_mean_curvature(&k, &e, x, &q()).unwrap().abs() < 1e-8);
    }
}

#[test]
fn wedge_curvature_reduces_to_the_deficit() {
    let s = 0.4;
    let a = AnisotropyFn::planar(0.7, 1.3, |t| 1.0 + 0.3 * (2.0 * t).sin()).unwrap();
    let k = KernelSpec::homogeneous(a.clone(), s, 2.0).unwrap();
    let phi = build_phi(&a, 2, s, 4096).unwrap();
    let zero = |_: Point| 0.0;
    for theta in [0.6, 1.4, 2.5] {
        let e = RegionSpec::wedge(0.0, theta).unwrap();
        let h = RegionSpec::upper_half_plane();
        let v = el_residual(&k, &k, 0.0, &zero, &h, &e, unit(theta), &q()).unwrap();
        let want = -Deficit::new(&phi, None, s, 0.0).eval(theta) / (s * theta.sin().powf(s));
        assert!(
            (v - want).abs() < 1e-5 * want.abs().max(1.0),
            "θ = {theta}: {v} vs {want}"
        );

        let far = k_mean_curvature(&k, &e, [2.0 * theta.cos(), 2.0 * theta.sin()], &q()).unwrap();
        let near = k_mean_curvature(&k, &e, unit(theta), &q()).unwrap();
        assert!((far - 2f64.powf(-s) * near).abs() < 1e-8 * near.abs());
    }
}

#[test]
fn euler_lagrange_residual_respects_symmetry() {
    let k = KernelSpec::isotropic(2, 0.5).unwrap();
    let zero = |_: Point| 0.0;
    let boxed = RegionSpec::rect([-20.0, -20.0], [20.0, 20.0]).unwrap();
    let half = RegionSpec::upper_half_plane();
    let l = el_residual(&k, &k, 0.0, &zero, &boxed, &half, [-0.3, 0.0], &q()).unwrap();
    let r = el_residual(&k, &k, 0.0, &zero, &boxed, &half, [0.3, 0.0], &q()).unwrap();
    assert!(l < 0.0 && (l - r).abs() < 1e-9 * l.abs());

    let omega = RegionSpec::rect([-3.0, -3.0], [3.0, 3.0]).unwrap();
    let disk = RegionSpec::ball([0.0, 0.0], 1.0).unwrap();
    // images of one boundary point under the symmetries of the square
    let values: Vec<f64> = (0..4)
        .flat_map(|j| {
            [
                0.3 + 0.5 * PI * j as f64,
                0.5 * PI - 0.3 + 0.5 * PI * j as f64,
            ]
        })
        .map(|a| el_residual(&k, &k, 0.4, &zero, &omega, &disk, unit(a), &q()).unwrap())
        .collect();
    let spread = values
        .iter()
        .fold(0.0f64, |m, v| m.max((v - values[0]).abs()));
    assert!(spread < 1e-7 * values[0].abs(), "{values:?}");
}
