//! Adaptive Gauss–Kronrod (7, 15) quadrature for complex-valued integrands
//! on a real interval.

use num_complex::Complex64;

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
    0.209_482_141_084_728_0,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7K15 panel: `(kronrod estimate, |kronrod - gauss|)`.
fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_depth: 40,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
}

/// Integrates `f` over `[a, b]` by recursive bisection of G7K15 panels.
pub fn integrate<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    let (whole, err) = gk15(&mut f, a, b);
    let mut out = QuadResult {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
        converged: true,
    };
    let scale = whole.norm();
    recurse(&mut f, a, b, whole, err, scale, opts, 0, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    est: Complex64,
    err: f64,
    scale: f64,
    opts: QuadOptions,
    depth: u32,
    out: &mut QuadResult,
) {
    let tol = opts.abs_tol.max(opts.rel_tol * scale);
    if err <= tol || depth >= opts.max_depth {
        if err > tol {
            out.converged = false;
        }
        out.value += est;
        out.error += err;
        return;
    }
    let m = 0.5 * (a + b);
    let (l, el) = gk15(f, a, m);
    let (r, er) = gk15(f, m, b);
    let scale = scale.max((l + r).norm());
    // halve the tolerance budget per child
    let child = QuadOptions {
        abs_tol: opts.abs_tol * 0.5,
        ..opts
    };
    recurse(f, a, m, l, el, scale, child, depth + 1, out);
    recurse(f, m, b, r, er, scale, child, depth + 1, out);
}

/// Fixed `n`-point Gauss–Legendre nodes and weights on `[-1, 1]` for small `n`.
pub fn gauss_legendre(n: usize) -> (&'static [f64], &'static [f64]) {
    match n {
        3 => (&GL3_X, &GL3_W),
        _ => (&GL8_X, &GL8_W),
    }
}

const GL3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_W: [f64; 3] = [
    0.555_555_555_555_555_6,
    0.888_888_888_888_888_9,
    0.555_555_555_555_555_6,
];

const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];
