//! The vector inequalities behind the absorption estimates, evaluated at a
//! single pair of points in R^3.

pub type Vec3 = [f64; 3];

#[inline]
fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[inline]
fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// |w|^{r-1} w, zero at w = 0.
pub fn absorption_pointwise(w: Vec3, r: f64) -> Vec3 {
    let m = norm(w);
    if m == 0.0 {
        return [0.0; 3];
    }
    let s = if r == 1.0 { 1.0 } else { m.powf(r - 1.0) };
    w.map(|x| s * x)
}

/// Constant in the monotonicity lower bound,
/// (|u|^{r-1}u - |v|^{r-1}v).(u - v) >= c(r) |u - v|^{r+1}.
///
/// The two cases of the argument give 1/r (when |u| >= |u - v|) and
/// 3^{-(r+1)/2}/4 times (|u|^2 + u.v + |v|^2)^{(r+1)/2}, where the bracket is
/// at least |u - v|^2 / 4.
pub fn certified_monotonicity_constant(r: f64) -> f64 {
    (1.0 / r).min(0.25 * 12f64.powf(-(r + 1.0) / 2.0))
}

/// Returns `(lhs, certified)` with lhs = (|u|^{r-1}u - |v|^{r-1}v).(u-v) and
/// certified = c(r)|u - v|^{r+1}.
pub fn monotonicity_gap(u: Vec3, v: Vec3, r: f64) -> (f64, f64) {
    let w = sub(u, v);
    let lhs = dot(sub(absorption_pointwise(u, r), absorption_pointwise(v, r)), w);
    let certified = certified_monotonicity_constant(r) * norm(w).powf(r + 1.0);
    (lhs, certified)
}

/// Returns `(lhs, rhs)` for the difference bound
/// ||u|^{r-1}u - |v|^{r-1}v| <= 2^{r-2} r (|u|^{r-1}|w| + |w|^r), w = u - v.
pub fn difference_bound_check(u: Vec3, v: Vec3, r: f64) -> (f64, f64) {
    let w = norm(sub(u, v));
    let lhs = norm(sub(absorption_pointwise(u, r), absorption_pointwise(v, r)));
    let nu = norm(u);
    let u_pow = if r == 1.0 { 1.0 } else { nu.powf(r - 1.0) };
    let rhs = 2f64.powf(r - 2.0) * r * (u_pow * w + w.powf(r));
    (lhs, rhs)
}

/// Returns `(value, bound)` = ((1+x)^s / (1+x^s), 2^{s-1}).
pub fn power_mean_fact(x: f64, s: f64) -> (f64, f64) {
    let value = (1.0 + x).powf(s) / (1.0 + x.powf(s));
    (value, 2f64.powf(s - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorption_pointwise_examples() {
        assert_eq!(absorption_pointwise([1.0, 0.0, 0.0], 3.0), [1.0, 0.0, 0.0]);
        let a = absorption_pointwise([1.0, 2.0, 2.0], 3.0);
        for (x, y) in a.iter().zip([9.0, 18.0, 18.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        for r in [1.0, 1.5, 3.0] {
            assert_eq!(absorption_pointwise([0.0; 3], r), [0.0; 3]);
        }
    }

    #[test]
    fn monotonicity_examples() {
        let (lhs, cert) = monotonicity_gap([1.0, 0.0, 0.0], [0.0; 3], 2.0);
        assert_eq!(lhs, 1.0);
        // The |u| >= |w| case gives the sharper 1/r bound.
        assert!(lhs >= 0.5);
        assert!(cert <= 0.5);
        let u = [0.3, -1.0, 2.0];
        assert_eq!(monotonicity_gap(u, u, 2.5), (0.0, 0.0));
    }

    #[test]
    fn difference_bound_examples() {
        let (lhs, rhs) = difference_bound_check([1.0, 0.0, 0.0], [0.0; 3], 3.0);
        assert_eq!(lhs, 1.0);
        assert_eq!(rhs, 12.0);
        let u = [0.4, 2.0, -1.0];
        let v = [1.5, -0.5, 0.25];
        let (lhs, rhs) = difference_bound_check(u, v, 1.0);
        assert!((lhs - rhs).abs() < 1e-14);
        assert!((lhs - norm(sub(u, v))).abs() < 1e-14);
    }

    #[test]
    fn power_mean_examples() {
        for s in [0.5, 1.0, 2.0, 3.7] {
            let (value, bound) = power_mean_fact(1.0, s);
            assert!((value - bound).abs() < 1e-14);
        }
        for x in [0.0, 0.3, 5.0, 1e3] {
            let (value, bound) = power_mean_fact(x, 1.0);
            assert!((value - 1.0).abs() < 1e-14 && bound == 1.0);
        }
    }

    #[test]
    fn certified_constant_values() {
        assert!((certified_monotonicity_constant(1.0) - 1.0 / 48.0).abs() < 1e-15);
        assert!((certified_monotonicity_constant(3.0) - 0.25 / 144.0).abs() < 1e-15);
    }
}
