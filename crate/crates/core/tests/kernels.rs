use memwave::kernels::*;
use memwave::{FracOrder, KernelOrder, SampledSignal};

fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    quadrature::integrate(f, a, b, 1e-13).integral
}

#[test]
fn memory_kernel_is_overlap_of_boundary_kernels() {
    let pts: Vec<f64> = (0..5).map(|i| 0.1 + 1.9 * i as f64 / 4.0).collect();
    for j in [KernelOrder::Zero, KernelOrder::One] {
        for &r in &pts {
            for &s in &pts {
                let direct = quad(
                    |z| boundary_kernel(j, r, z).unwrap() * boundary_kernel(j, s, z).unwrap(),
                    -60.0,
                    0.0,
                );
                let closed = memory_kernel_m(j, r, s).unwrap();
                assert!(
                    ((closed - direct) / direct).abs() < 1e-6,
                    "j={j:?} r={r} s={s}: {closed} vs {direct}"
                );
            }
        }
    }
}

#[test]
fn half_order_kernels_coincide_with_memory_kernels() {
    for &(r, s) in &[(0.1, 0.4), (1.0, 1.0), (2.5, 0.3)] {
        for j in [KernelOrder::Zero, KernelOrder::One] {
            let n = frac_kernel_n(j, FracOrder::HALF, r, s).unwrap();
            let m = memory_kernel_m(j, r, s).unwrap();
            assert!((n - m).abs() < 1e-14 * m);
        }
    }
}

#[test]
fn heat_kernel_has_unit_mass() {
    for &t in &[0.01, 0.5, 3.0] {
        let f = |z| heat_kernel(t, z).unwrap();
        let mass = quad(f, -40.0, 0.0) + quad(f, 0.0, 40.0);
        assert!((mass - 1.0).abs() < 1e-10);
    }
}

#[test]
fn gauss_cdf_integrates_the_unit_kernel() {
    for &y in &[-3.0, -0.5, 0.0, 1.2] {
        let direct = quad(|x| heat_kernel(1.0, x).unwrap(), -40.0, y);
        assert!((gauss_cdf(y) - direct).abs() < 1e-10);
    }
}

#[test]
fn gaussian_moment_identity() {
    // ∫_0^∞ y^{2α-1} e^{-b y²} dy = Γ(α) / (2 b^α); y = x^{1/(2α)} removes the
    // endpoint singularity
    for &alpha in &[0.25f64, 0.5, 0.75] {
        for &b in &[0.3f64, 1.0, 4.0] {
            let upper = (60.0 / b).powf(alpha);
            let lhs = quad(|x| (-b * x.powf(1.0 / alpha)).exp() / (2.0 * alpha), 0.0, upper);
            let rhs = libm::tgamma(alpha) / (2.0 * b.powf(alpha));
            assert!(((lhs - rhs) / rhs).abs() < 1e-10, "alpha={alpha} b={b}");
        }
    }
}

fn caputo_of_power(alpha: f64, p: f64, t: f64) -> f64 {
    libm::tgamma(p + 1.0) / libm::tgamma(p + 1.0 - alpha) * t.powf(p - alpha)
}

#[test]
fn l1_caputo_converges_for_quadratic_data() {
    for &alpha in &[0.25, 0.5, 0.75] {
        let a = FracOrder::new(alpha).unwrap();
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let phi = SampledSignal::from_fn(dt, n, |t| t * t).unwrap();
            let d = caputo_derivative(a, &phi).unwrap();
            d.times()
                .zip(d.values())
                .skip(1)
                .map(|(t, v)| (v - caputo_of_power(alpha, 2.0, t)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(200), err(400));
        let order = (e1 / e2).log2();
        assert!(order > 2.0 - alpha - 0.15, "alpha={alpha}: order {order}");
    }
}

#[test]
fn caputo_is_linear() {
    let a = FracOrder::new(0.3).unwrap();
    let f = SampledSignal::from_fn(0.01, 100, |t| t.sin()).unwrap();
    let g = SampledSignal::from_fn(0.01, 100, |t| t * t * t).unwrap();
    let h = SampledSignal::from_fn(0.01, 100, |t| 2.0 * t.sin() - 3.0 * t * t * t).unwrap();
    let (df, dg, dh) = (
        caputo_derivative(a, &f).unwrap(),
        caputo_derivative(a, &g).unwrap(),
        caputo_derivative(a, &h).unwrap(),
    );
    for i in 0..dh.len() {
        let combo = 2.0 * df.values()[i] - 3.0 * dg.values()[i];
        assert!((dh.values()[i] - combo).abs() < 1e-12);
    }
}

#[test]
fn boundary_kernels_reject_points_above_membrane() {
    assert!(boundary_kernel(KernelOrder::Zero, 1.0, 0.1).is_err());
    assert!(memory_kernel_m(KernelOrder::One, 0.0, 0.0).is_err());
}
