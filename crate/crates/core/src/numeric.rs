//! Floating-point helpers shared by the criteria that are checked exactly.

/// Correctly rounded sum of `values` (Shewchuk's exact partials).
///
/// When the real sum of the inputs is representable the result is exact,
/// regardless of ordering or cancellation.
pub fn fsum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    let mut special = 0.0;
    for mut x in values {
        if !x.is_finite() {
            special += x;
            continue;
        }
        let mut kept = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    if special != 0.0 || special.is_nan() {
        return special;
    }

    // Round the partials to nearest, fixing the half-way case.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// `b - a` as an unevaluated sum `hi + lo` that is exact (Knuth's TwoSum).
pub fn exact_diff(a: f64, b: f64) -> (f64, f64) {
    let (x, y) = (b, -a);
    let hi = x + y;
    let yv = hi - x;
    let xv = hi - yv;
    let lo = (x - xv) + (y - yv);
    (hi, lo)
}

/// `|x|^p`, using repeated multiplication when `p` is a small integer so
/// dyadic inputs give exact results.
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let x = x.abs();
    if p.fract() == 0.0 && p.abs() <= 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// `|a - b| / max(|a|, |b|)`, or `0` when both vanish.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Relative agreement with an absolute floor of `rel * floor` for values near zero.
pub fn close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(floor)
}
