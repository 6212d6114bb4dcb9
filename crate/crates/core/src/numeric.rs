//! Small numerical kernels shared by the distribution code: compensated
//! summation, log-space helpers, adaptive Gauss–Kronrod quadrature and
//! monotone bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `ln Σ exp(a_i)`, stabilised by the largest term.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + compensated_sum(terms.iter().map(|a| (a - max).exp())).ln()
}

/// `ln(1 − e^{−a})` for `a ≥ 0`, switching branch at `ln 2`.
pub fn log1mexp(a: f64) -> f64 {
    if a <= 0.0 {
        f64::NEG_INFINITY
    } else if a < std::f64::consts::LN_2 {
        (-(-a).exp_m1()).ln()
    } else {
        (-(-a).exp()).ln_1p()
    }
}

/// Result of an adaptive quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub panels: usize,
}

// 15-point Kronrod abscissae (non-negative half) with the embedded 7-point
// Gauss rule on every other node.
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
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::Numeric(format!("integrand is not finite on [{a}, {b}]")));
    }
    Ok(Panel { a, b, value, error })
}

/// Globally adaptive G7–K15 quadrature of `f` over `[a, b]`.
///
/// The interval starts as `initial_panels` equal pieces; the panel with the
/// largest error estimate is bisected until the summed estimate drops below
/// `max(abs_tol, rel_tol·|I|)` or `max_panels` is reached. Hitting the panel
/// limit is reported through `converged = false`, never as an error.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    initial_panels: usize,
    max_panels: usize,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Usage(format!("integration bounds must be finite with a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, converged: true, panels: 0 });
    }
    let initial = initial_panels.clamp(1, max_panels.max(1));
    let width = (b - a) / initial as f64;
    let mut heap = BinaryHeap::with_capacity(max_panels + 1);
    for k in 0..initial {
        let lo = a + width * k as f64;
        let hi = if k + 1 == initial { b } else { a + width * (k + 1) as f64 };
        heap.push(gauss_kronrod(&mut f, lo, hi)?);
    }
    loop {
        let value = compensated_sum(heap.iter().map(|p| p.value));
        let error = compensated_sum(heap.iter().map(|p| p.error));
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(Quadrature { value, error, converged: true, panels: heap.len() });
        }
        if heap.len() >= max_panels {
            return Ok(Quadrature { value, error, converged: false, panels: heap.len() });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in floating point.
            heap.push(worst);
            let value = compensated_sum(heap.iter().map(|p| p.value));
            return Ok(Quadrature { value, error, converged: false, panels: heap.len() });
        }
        heap.push(gauss_kronrod(&mut f, worst.a, mid)?);
        heap.push(gauss_kronrod(&mut f, mid, worst.b)?);
    }
}

/// Smallest `x` in `[lo, hi]` (to within `rel_width·max(1, |x|)`) at which the
/// monotone predicate `reached` switches from false to true.
///
/// The caller guarantees `!reached(lo)` and `reached(hi)`.
pub fn bisect<P: FnMut(f64) -> bool>(mut reached: P, mut lo: f64, mut hi: f64, rel_width: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= rel_width * mid.abs().max(1.0) {
            return mid;
        }
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}
