//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    /// Integral of |f| over the same partition, useful as a magnitude scale.
    pub magnitude: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_intervals: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    magnitude: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    let mut magnitude = fc.norm() * KRONROD_WEIGHTS[7];
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let (lo, hi) = (f(center - dx), f(center + dx));
        kron += (lo + hi) * KRONROD_WEIGHTS[i];
        magnitude += (lo.norm() + hi.norm()) * KRONROD_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += (lo + hi) * GAUSS_WEIGHTS[i / 2];
        }
    }
    Piece {
        a,
        b,
        value: kron * half,
        magnitude: magnitude * half.abs(),
        error: ((kron - gauss) * half).norm(),
    }
}

/// Integrates `f` over `[a, b]` by repeatedly bisecting the interval with the
/// largest error estimate.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult {
            value: Complex64::new(0.0, 0.0),
            magnitude: 0.0,
            error: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let first = kronrod(&f, a, b);
    let mut total = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::from([first]);
    let mut converged = false;
    loop {
        if error <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            converged = true;
            break;
        }
        if heap.len() >= opts.max_intervals {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            heap.push(worst);
            break;
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum in interval order.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = pieces.iter().map(|p| p.value).sum();
    let magnitude = pieces.iter().map(|p| p.magnitude).sum();
    let error = pieces.iter().map(|p| p.error).sum();
    QuadResult {
        value,
        magnitude,
        error,
        intervals: pieces.len(),
        converged,
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts)
}
