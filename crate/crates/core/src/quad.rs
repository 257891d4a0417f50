//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

#![allow(clippy::excessive_precision)]

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights at the odd-indexed Kronrod nodes (and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod estimate and its difference to the embedded 7-point Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Panel budget per call to [`integrate`].
const MAX_PANELS: usize = 4000;

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: (f64, f64),
    abs_tol: f64,
    budget: &mut usize,
) -> f64 {
    let (value, err) = whole;
    // Estimates below a few ulps of the panel value are round-off, not error.
    let floor = 50.0 * f64::EPSILON * value.abs();
    if err <= abs_tol.max(floor) || *budget < 2 || b - a <= f64::EPSILON * a.abs().max(b.abs()) {
        return value;
    }
    *budget -= 2;
    let mid = 0.5 * (a + b);
    let left = gk15(f, a, mid);
    let right = gk15(f, mid, b);
    adapt(f, a, mid, left, 0.5 * abs_tol, budget) + adapt(f, mid, b, right, 0.5 * abs_tol, budget)
}

/// Integrates `f` over `[a, b]`, bisecting until each panel's error estimate
/// is below its share of `max(abs_tol, rel_tol * |coarse estimate|)` or the
/// panel budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let first = gk15(&f, a, b);
    let scale = first.0.abs().max(first.1);
    let mut budget = MAX_PANELS;
    adapt(&f, a, b, first, abs_tol.max(rel_tol * scale), &mut budget)
}

/// Integrates over `[a, b]` split at the given interior points.
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    let mut edges = vec![a];
    edges.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], rel_tol, abs_tol))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_panel_is_exact_for_low_degree_polynomials() {
        for k in 0..=22 {
            let (v, _) = gk15(&|x: f64| x.powi(k), 0.0, 1.0);
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((v - exact).abs() < 1e-14, "degree {k}: {v}");
        }
    }

    #[test]
    fn adaptive_handles_sharp_peak() {
        let eps: f64 = 1e-4;
        let f = |x: f64| eps / (std::f64::consts::PI * ((x - 0.3).powi(2) + eps * eps));
        let exact = ((0.7 / eps).atan() + (0.3 / eps).atan()) / std::f64::consts::PI;
        let v = integrate_split(f, 0.0, 1.0, &[0.3], 1e-13, 0.0);
        assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn smooth_integrand() {
        let v = integrate(|x: f64| x.exp(), -2.0, 3.0, 1e-14, 0.0);
        let exact = 3f64.exp() - (-2f64).exp();
        assert!((v - exact).abs() < 1e-12 * exact);
    }
}
