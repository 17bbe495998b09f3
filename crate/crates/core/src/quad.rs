//! One-dimensional quadrature: a 7/15-point Gauss-Kronrod pair and a globally
//! adaptive integrator built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Kronrod abscissae on [-1, 1], descending; the odd entries are the 7-point
// Gauss nodes.
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
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// `|K15 - G7|`, a conservative bound for smooth integrands.
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

/// Single application of the G7/K15 pair on `[a, b]`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Estimate {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Estimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-8,
            abs: 1e-14,
            max_intervals: 4096,
        }
    }
}

impl Tolerance {
    pub fn with_rel(rel: f64) -> Self {
        Tolerance {
            rel,
            ..Tolerance::default()
        }
    }

    /// Whether an estimate satisfies `error <= max(abs, rel * |value|)`.
    pub fn accepts(&self, e: &Estimate) -> bool {
        e.error <= self.abs.max(self.rel * e.value.abs())
    }
}

/// Globally adaptive integration: the sub-interval with the largest error is
/// bisected until the summed error meets `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let first = gauss_kronrod(&f, a, b);
    if tol.accepts(&first) {
        return Ok(first);
    }
    let mut pieces = vec![(a, b, first)];
    loop {
        let total = pieces
            .iter()
            .fold(Estimate { value: 0.0, error: 0.0 }, |acc, p| acc + p.2);
        if tol.accepts(&total) {
            return Ok(total);
        }
        if pieces.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                requested: tol.abs.max(tol.rel * total.value.abs()),
                achieved: total.error,
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .expect("non-empty");
        let (lo, hi, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, gauss_kronrod(&f, lo, mid)));
        pieces.push((mid, hi, gauss_kronrod(&f, mid, hi)));
    }
}
