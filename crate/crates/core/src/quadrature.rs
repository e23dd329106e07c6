//! One-dimensional adaptive quadrature.

// Kronrod abscissae, descending, for the 7-point Gauss / 15-point Kronrod pair.
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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= MAX_DEPTH || (b - a).abs() < 1e-14 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth + 1) + adapt(f, mid, b, 0.5 * tol, depth + 1)
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    adapt(&mut f, a, b, tol, 0)
}

/// Integral over `[a, b]` split at the given interior breakpoints, so that
/// kinks of the integrand fall on panel edges.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: f64) -> f64 {
    let panels = breaks.len().saturating_sub(1).max(1) as f64;
    breaks
        .windows(2)
        .map(|w| adapt(&mut f, w[0], w[1], tol / panels, 0))
        .sum()
}

/// Composite midpoint rule with `n` panels.
pub fn midpoint<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        for k in 0..=20 {
            let got = integrate(|x| x.powi(k), 0.0, 1.0, 1e-14);
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "degree {k}: {got}");
        }
    }

    #[test]
    fn kinked_integrand() {
        let got = integrate_pieces(
            |t: f64| t.cos().abs(),
            &[
                0.0,
                std::f64::consts::FRAC_PI_2,
                std::f64::consts::PI,
                1.5 * std::f64::consts::PI,
                std::f64::consts::TAU,
            ],
            1e-12,
        );
        assert!((got - 4.0).abs() < 1e-11);
        // Without breakpoints the adaptive refinement still gets there.
        let got = integrate(|t: f64| t.cos().abs(), 0.0, std::f64::consts::TAU, 1e-10);
        assert!((got - 4.0).abs() < 1e-9);
    }

    #[test]
    fn midpoint_second_order() {
        let exact = 1.0 / 3.0;
        let e1 = (midpoint(|x| x * x, 0.0, 1.0, 16) - exact).abs();
        let e2 = (midpoint(|x| x * x, 0.0, 1.0, 32) - exact).abs();
        assert!((e1 / e2 - 4.0).abs() < 1e-6);
    }
}
