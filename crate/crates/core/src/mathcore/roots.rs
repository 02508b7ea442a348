/// Root of a continuous function on a sign-changing bracket, by the Illinois
/// variant of regula falsi.
///
/// Requires `f(lo) < 0 <= f(hi)` (the orientation may be either way round
/// on the axis). Returns the end of the final bracket on the `>= 0` side, so
/// the returned point always satisfies `f(x) >= 0`.
pub fn bracketed_root<F>(f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let (mut neg, mut pos) = (lo, hi);
    let (mut f_neg, mut f_pos) = (f(neg), f(pos));
    debug_assert!(f_neg < 0.0 && f_pos >= 0.0);
    let mut side = 0i8;
    for _ in 0..max_iter {
        if (pos - neg).abs() <= x_tol {
            break;
        }
        let mut x = (neg * f_pos - pos * f_neg) / (f_pos - f_neg);
        // Fall back to bisection when the secant point is useless.
        let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };
        if !x.is_finite() || x <= a || x >= b {
            x = 0.5 * (neg + pos);
        }
        let fx = f(x);
        if fx >= 0.0 {
            pos = x;
            f_pos = fx;
            if side == 1 {
                f_neg *= 0.5;
            }
            side = 1;
        } else {
            neg = x;
            f_neg = fx;
            if side == -1 {
                f_pos *= 0.5;
            }
            side = -1;
        }
    }
    pos
}
