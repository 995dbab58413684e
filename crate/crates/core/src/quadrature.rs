//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! The driver keeps every subinterval in a max-heap keyed on its error
//! estimate and bisects the worst one until the summed error drops below
//! `max(abs_tol, rel_tol * |I|)`. Callers can seed the partition with
//! breakpoints, which matters for oscillatory integrands: a single 15-point
//! panel spanning many periods can return a deceptively small error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

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

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of subintervals held at once.
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
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
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// One 15-point Kronrod panel: (integral, error estimate).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrate over the union of consecutive intervals given by sorted `breaks`.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Err(Error::invalid("quadrature needs at least two breakpoints"));
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, error) = gk15(&mut f, a, b);
        total += value;
        total_err += error;
        heap.push(Panel { a, b, value, error });
    }
    let mut evaluations = 15 * heap.len();
    let lo = breaks[0];
    let hi = breaks[breaks.len() - 1];

    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                lo,
                hi,
                estimate: total,
                error: total_err,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature {
                lo,
                hi,
                estimate: total,
                error: total_err,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    // Re-sum to shed drift from the incremental updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// Nodes per panel of the Filon-Legendre rule.
const FILON_NODES: usize = 24;
const FILON_MAX_DEPTH: u32 = 40;

struct LegendreRule {
    nodes: [f64; FILON_NODES],
    /// `(2n+1)/2 · w_k · P_n(x_k)`: maps node values to Legendre coefficients.
    projection: [[f64; FILON_NODES]; FILON_NODES],
}

fn legendre_rule() -> &'static LegendreRule {
    static RULE: OnceLock<LegendreRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = FILON_NODES;
        let mut nodes = [0.0; FILON_NODES];
        let mut weights = [0.0; FILON_NODES];
        for k in 0..n {
            let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[k] = x;
            weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        let mut projection = [[0.0; FILON_NODES]; FILON_NODES];
        for k in 0..n {
            let (mut p0, mut p1) = (1.0, nodes[k]);
            for (m, row) in projection.iter_mut().enumerate() {
                let pm = if m == 0 { p0 } else { p1 };
                row[k] = (2 * m + 1) as f64 / 2.0 * weights[k] * pm;
                if m >= 1 {
                    let next = ((2 * m + 1) as f64 * nodes[k] * p1 - m as f64 * p0) / (m + 1) as f64;
                    p0 = p1;
                    p1 = next;
                }
            }
        }
        LegendreRule { nodes, projection }
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for m in 1..n {
        let next = ((2 * m + 1) as f64 * x * p1 - m as f64 * p0) / (m + 1) as f64;
        p0 = p1;
        p1 = next;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Spherical Bessel functions `j_0(x) .. j_{n−1}(x)` for `x ≥ 0`.
pub fn spherical_bessel(x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    if x < 0.5 {
        let mut lead = 1.0;
        for (m, o) in out.iter_mut().enumerate() {
            if m > 0 {
                lead *= x / (2 * m + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..20 {
                term *= -0.5 * x * x / (k as f64 * (2 * m + 2 * k + 1) as f64);
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *o = lead * sum;
        }
        return;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if x >= n as f64 {
        out[0] = j0;
        if n > 1 {
            out[1] = j1;
        }
        for m in 2..n {
            out[m] = (2 * m - 1) as f64 / x * out[m - 1] - out[m - 2];
        }
        return;
    }
    // Miller's backward recurrence, normalized against the larger of j0, j1.
    let start = n + 40 + x as usize;
    let (mut above, mut cur) = (0.0, 1e-280);
    for m in (0..=start).rev() {
        if m < n {
            out[m] = cur;
        }
        if m == 0 {
            break;
        }
        let below = (2 * m + 1) as f64 / x * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > 1e250 {
            let scale = 1e-250;
            cur *= scale;
            above *= scale;
            for o in out.iter_mut() {
                *o *= scale;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() { j0 / out[0] } else { j1 / out[1] };
    for o in out.iter_mut() {
        *o *= scale;
    }
}

/// `∫ [f(x) + Re(g(x) e^{iωx})] dx` over the union of intervals in `breaks`,
/// for amplitudes `f`, `g` that are smooth on the scale of each interval.
///
/// Both amplitudes are expanded in Legendre polynomials on each panel and
/// the products with `e^{iωx}` are integrated exactly, so the cost does not
/// grow with `ω`. A panel is bisected while the trailing coefficients exceed
/// `rel_tol` times the panel's coefficient mass.
pub fn filon_integrate<F>(mut amp: F, omega: f64, breaks: &[f64], rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, Complex64),
{
    if breaks.len() < 2 {
        return Err(Error::invalid("quadrature needs at least two breakpoints"));
    }
    let rule = legendre_rule();
    let mut bessel = [0.0; FILON_NODES];
    let mut total = 0.0;
    let mut stack: Vec<(f64, f64, u32)> = breaks.windows(2).rev().filter(|w| w[1] > w[0]).map(|w| (w[0], w[1], 0)).collect();
    while let Some((a, b, depth)) = stack.pop() {
        let c = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let mut fv = [0.0; FILON_NODES];
        let mut gv = [Complex64::new(0.0, 0.0); FILON_NODES];
        for k in 0..FILON_NODES {
            let (f, g) = amp(c + hw * rule.nodes[k]);
            fv[k] = f;
            gv[k] = g;
        }
        let mut fa = [0.0; FILON_NODES];
        let mut ga = [Complex64::new(0.0, 0.0); FILON_NODES];
        for m in 0..FILON_NODES {
            let row = &rule.projection[m];
            for k in 0..FILON_NODES {
                fa[m] += row[k] * fv[k];
                ga[m] += gv[k] * row[k];
            }
        }
        let mass: f64 = fa.iter().map(|v| v.abs()).sum::<f64>() + ga.iter().map(|v| v.norm()).sum::<f64>();
        let trailing: f64 = (FILON_NODES - 3..FILON_NODES).map(|m| fa[m].abs() + ga[m].norm()).sum();
        if trailing > rel_tol * mass && mass > 0.0 {
            if depth >= FILON_MAX_DEPTH {
                return Err(Error::Quadrature {
                    lo: a,
                    hi: b,
                    estimate: total,
                    error: trailing * hw,
                });
            }
            stack.push((c, b, depth + 1));
            stack.push((a, c, depth + 1));
            continue;
        }
        spherical_bessel((omega * hw).abs(), &mut bessel);
        let mut osc = Complex64::new(0.0, 0.0);
        let mut ipow = Complex64::new(1.0, 0.0);
        for m in 0..FILON_NODES {
            let jm = if omega * hw < 0.0 && m % 2 == 1 { -bessel[m] } else { bessel[m] };
            osc += ga[m] * ipow * jm;
            ipow *= Complex64::new(0.0, 1.0);
        }
        let phase = Complex64::from_polar(1.0, omega * c);
        total += hw * (2.0 * fa[0] + 2.0 * (phase * osc).re);
    }
    Ok(total)
}

/// Composite Simpson rule on `n` (even) panels. Fixed-grid oracle for tests.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}
