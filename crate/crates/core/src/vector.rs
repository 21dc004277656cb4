// Small helpers over D-vectors stored as slices.

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(a.iter().map(|x| x * x).sum())
}

/// Folds `value` back into `[lo, hi]` by mirroring at the bounds as often as needed.
pub(crate) fn reflect(value: f64, lo: f64, hi: f64) -> f64 {
    if (lo..=hi).contains(&value) {
        return value;
    }
    let width = hi - lo;
    if width <= 0.0 {
        return lo;
    }
    let period = 2.0 * width;
    let mut t = libm::fmod(value - lo, period);
    if t < 0.0 {
        t += period;
    }
    if t > width {
        t = period - t;
    }
    (lo + t).clamp(lo, hi)
}
