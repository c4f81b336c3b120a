//! Globally adaptive Gauss-Kronrod (7/15) quadrature for small vector integrands.

/// Kronrod abscissae on `[0, 1)`; the odd entries are the Gauss nodes.
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

/// Gauss weights for nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel<const M: usize> {
    lo: f64,
    hi: f64,
    value: [f64; M],
    error: f64,
}

fn gk15<const M: usize>(f: &impl Fn(f64) -> [f64; M], lo: f64, hi: f64) -> Panel<M> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kronrod = [0.0; M];
    let mut gauss = [0.0; M];
    let fc = f(center);
    for m in 0..M {
        kronrod[m] = WGK[7] * fc[m];
        gauss[m] = WG[3] * fc[m];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for m in 0..M {
            let s = f1[m] + f2[m];
            kronrod[m] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[m] += WG[j / 2] * s;
            }
        }
    }
    let mut error = 0.0;
    for m in 0..M {
        kronrod[m] *= half;
        gauss[m] *= half;
        error += (kronrod[m] - gauss[m]).abs();
    }
    Panel {
        lo,
        hi,
        value: kronrod,
        error,
    }
}

/// Outcome of [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Integral<const M: usize> {
    pub value: [f64; M],
    /// Summed Kronrod-Gauss discrepancy over all components.
    pub error: f64,
    pub panels: usize,
}

/// Integrate `f` over the intervals delimited by `breakpoints` (ascending).
///
/// The panel with the largest error is bisected until the summed error drops
/// below `rel_tol * sum_m |value_m|` or `max_panels` is reached; the latter
/// returns `None`.
pub fn integrate<const M: usize>(
    f: impl Fn(f64) -> [f64; M],
    breakpoints: &[f64],
    rel_tol: f64,
    max_panels: usize,
) -> Option<Integral<M>> {
    let mut panels: Vec<Panel<M>> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    if panels.is_empty() {
        return Some(Integral {
            value: [0.0; M],
            error: 0.0,
            panels: 0,
        });
    }
    loop {
        let mut total = [0.0; M];
        let mut error = 0.0;
        for p in &panels {
            for m in 0..M {
                total[m] += p.value[m];
            }
            error += p.error;
        }
        let scale: f64 = total.iter().map(|v| v.abs()).sum();
        if !error.is_finite() || !scale.is_finite() {
            return None;
        }
        if error <= rel_tol * scale || error < f64::MIN_POSITIVE {
            return Some(Integral {
                value: total,
                error,
                panels: panels.len(),
            });
        }
        if panels.len() >= max_panels {
            return None;
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .expect("non-empty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            // Cannot bisect further in floating point.
            return None;
        }
        panels.push(gk15(&f, p.lo, mid));
        panels.push(gk15(&f, mid, p.hi));
    }
}
