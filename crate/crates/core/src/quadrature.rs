//! Adaptive Gauss–Kronrod (7/15) quadrature, used as the independent
//! reference for the closed-form arc length and by the benchmark command.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = r * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

/// Integrate `f` over `[a, b]` by recursive bisection.
///
/// A panel is accepted once its Kronrod–Gauss difference and the change
/// against the sum of its two halves are both below its share of `tol`
/// (relative to the size of the integral, absolute below 1). The second
/// test catches panels whose two rules agree by accident, which happens
/// on integrands with kinks at unknown places.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, evaluations: 0 };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let width = hi - lo;
    let (whole, err) = gk15(&f, lo, hi);
    let scale = whole.abs().max(1.0);
    let mut evals = 15;
    let mut stack = vec![(lo, hi, whole, err, 0u32)];
    let mut value = 0.0;
    let mut error = 0.0;
    while let Some((x0, x1, v, e, depth)) = stack.pop() {
        let m = 0.5 * (x0 + x1);
        let (vl, el) = gk15(&f, x0, m);
        let (vr, er) = gk15(&f, m, x1);
        evals += 30;
        let budget = tol * ((x1 - x0) / width) * scale;
        let refined = vl + vr;
        if (e <= budget && (v - refined).abs() <= budget) || depth >= 50 {
            value += refined;
            error += el + er;
            continue;
        }
        stack.push((m, x1, vr, er, depth + 1));
        stack.push((x0, m, vl, el, depth + 1));
    }
    QuadResult { value: sign * value, error, evaluations: evals }
}

/// [`integrate`] over the pieces of `[a, b]` cut at `breaks`.
///
/// Needed for piecewise integrands: a panel whose nodes all fall on one
/// side of a break integrates the wrong polynomial exactly and reports no
/// error at all.
pub fn integrate_with_breaks(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, evaluations: 0 };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    cuts.sort_by(f64::total_cmp);
    let mut pts = Vec::with_capacity(cuts.len() + 2);
    pts.push(lo);
    pts.extend(cuts);
    pts.push(hi);
    let mut out = QuadResult { value: 0.0, error: 0.0, evaluations: 0 };
    for w in pts.windows(2) {
        // per-piece tolerance scaled so the sum meets `tol` on the whole
        let r = integrate(&f, w[0], w[1], tol * (w[1] - w[0]) / (hi - lo));
        out.value += r.value;
        out.error += r.error;
        out.evaluations += r.evaluations;
    }
    out.value *= sign;
    out
}
