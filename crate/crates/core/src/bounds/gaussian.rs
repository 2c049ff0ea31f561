#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF `G(t)` and density `g(t)`.
pub fn gaussian(t: f64) -> (f64, f64) {
    let cdf = 0.5 * libm::erfc(-t * FRAC_1_SQRT_2);
    let pdf = (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    (cdf, pdf)
}

pub fn gaussian_cdf(t: f64) -> f64 {
    gaussian(t).0
}

pub fn gaussian_pdf(t: f64) -> f64 {
    gaussian(t).1
}

// Gauss-Kronrod 7/15 nodes on [-1, 1], non-negative half.
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
// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 30;

/// Kronrod estimate and |Kronrod - Gauss| on one interval.
fn gk15(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, lo, hi);
    // stop once the error estimate is at roundoff level for this panel
    if err <= tol || err <= 50.0 * f64::EPSILON * value.abs() || depth >= MAX_DEPTH {
        return value;
    }
    let mid = 0.5 * (lo + hi);
    adapt(f, lo, mid, 0.5 * tol, depth + 1) + adapt(f, mid, hi, 0.5 * tol, depth + 1)
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[lo, hi]` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    adapt(&f, lo, hi, tol, 0)
}

/// `integral_{-inf}^{hi} f`, through `u = hi - s / (1 - s)` on `[0, 1)`.
pub fn integrate_to(f: impl Fn(f64) -> f64, hi: f64, tol: f64) -> f64 {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let r = 1.0 - s;
        let v = f(hi - s / r);
        if v == 0.0 { 0.0 } else { v / (r * r) }
    };
    adapt(&g, 0.0, 1.0, tol, 0)
}
