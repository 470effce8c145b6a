//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.
//!
//! Intervals are refined worst-first; ties break on position so the
//! refinement sequence, and therefore the result, is deterministic.

// node tables are quoted to the published digits
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::CompensatedSum;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Integrand sample: a value and the error already carried by it (zero for
/// exact evaluations, nonzero when the integrand is itself a quadrature).
#[derive(Debug, Clone, Copy, Default)]
pub struct Sample {
    pub value: f64,
    pub err: f64,
}

impl From<f64> for Sample {
    fn from(value: f64) -> Self {
        Sample { value, err: 0.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum bisection depth of any interval.
    pub max_depth: u32,
    /// Panels shallower than this are split whatever their error estimate.
    pub min_depth: u32,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_depth: 30,
            min_depth: 0,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptiveResult {
    pub value: f64,
    /// Quadrature error plus the propagated integrand error.
    pub err: f64,
    /// Integral of `|f|`, a scale for relative tolerances.
    pub abs_value: f64,
    pub max_depth: u32,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    carried: f64,
    abs_value: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
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
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// The 15 Kronrod abscissae on `[a, b]`, centre first.
fn nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [c; 15];
    for j in 0..7 {
        x[1 + 2 * j] = c - h * XGK[j];
        x[2 + 2 * j] = c + h * XGK[j];
    }
    x
}

fn panel(a: f64, b: f64, depth: u32, f: &[Sample; 15]) -> Panel {
    let h = 0.5 * (b - a);
    let fc = f[0];
    let mut resk = fc.value * WGK[7];
    let mut resg = fc.value * WG[3];
    let mut resabs = fc.value.abs() * WGK[7];
    let mut carried = fc.err * WGK[7];
    for j in 0..7 {
        let (f1, f2) = (f[1 + 2 * j], f[2 + 2 * j]);
        resk += WGK[j] * (f1.value + f2.value);
        resabs += WGK[j] * (f1.value.abs() + f2.value.abs());
        carried += WGK[j] * (f1.err + f2.err);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1.value + f2.value);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc.value - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((f[1 + 2 * j].value - mean).abs() + (f[2 + 2 * j].value - mean).abs());
    }
    let value = resk * h;
    let resasc = resasc * h.abs();
    let resabs = resabs * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Panel {
        a,
        b,
        value,
        err,
        carried: carried * h.abs(),
        abs_value: resabs,
        depth,
    }
}

fn kronrod<F: FnMut(f64) -> Sample>(f: &mut F, a: f64, b: f64, depth: u32) -> Panel {
    let x = nodes(a, b);
    let mut v = [Sample::default(); 15];
    for (slot, &xi) in v.iter_mut().zip(&x) {
        *slot = f(xi);
    }
    panel(a, b, depth, &v)
}

fn kronrod_par<F: Fn(f64) -> Sample + Sync>(f: &F, a: f64, b: f64, depth: u32) -> Panel {
    use rayon::prelude::*;
    let x = nodes(a, b);
    let vals: Vec<Sample> = x.par_iter().map(|&xi| f(xi)).collect();
    let mut v = [Sample::default(); 15];
    v.copy_from_slice(&vals);
    panel(a, b, depth, &v)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> Sample>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> AdaptiveResult {
    drive(|lo, hi, depth| kronrod(&mut f, lo, hi, depth), a, b, opts)
}

/// As [`integrate`], evaluating the nodes of each panel in parallel. The
/// result is identical to the sequential one.
pub fn integrate_par<F: Fn(f64) -> Sample + Sync>(
    f: F,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> AdaptiveResult {
    drive(|lo, hi, depth| kronrod_par(&f, lo, hi, depth), a, b, opts)
}

fn drive<P: FnMut(f64, f64, u32) -> Panel>(
    mut make: P,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> AdaptiveResult {
    if a == b {
        return AdaptiveResult::default();
    }
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    let first = make(a, b, 0);
    let mut evaluations = 15;
    let mut total_err = first.err;
    let mut total_abs = first.abs_value;
    heap.push(first);
    let mut count = 1;
    // uniform split down to min_depth first, so that a kink cannot hide in an
    // unrefined panel
    let mut level = 0;
    while level < opts.min_depth.min(opts.max_depth) {
        let panels = std::mem::take(&mut heap).into_vec();
        for p in panels {
            let mid = 0.5 * (p.a + p.b);
            let left = make(p.a, mid, p.depth + 1);
            let right = make(mid, p.b, p.depth + 1);
            evaluations += 30;
            total_err += left.err + right.err - p.err;
            total_abs += left.abs_value + right.abs_value - p.abs_value;
            heap.push(left);
            heap.push(right);
            count += 1;
        }
        level += 1;
    }
    while let Some(worst) = heap.peek().copied() {
        let tol = opts.abs_tol.max(opts.rel_tol * total_abs);
        if total_err <= tol || count >= opts.max_intervals {
            break;
        }
        heap.pop();
        if worst.depth >= opts.max_depth {
            done.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = make(worst.a, mid, worst.depth + 1);
        let right = make(mid, worst.b, worst.depth + 1);
        evaluations += 30;
        total_err += left.err + right.err - worst.err;
        total_abs += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        count += 1;
    }
    done.extend(heap.into_vec());
    done.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = CompensatedSum::new();
    let mut err = CompensatedSum::new();
    let mut abs_value = CompensatedSum::new();
    let mut max_depth = 0;
    for p in &done {
        value.add(p.value);
        err.add(p.err + p.carried);
        abs_value.add(p.abs_value);
        max_depth = max_depth.max(p.depth);
    }
    AdaptiveResult {
        value: value.value(),
        err: err.value(),
        abs_value: abs_value.value(),
        max_depth,
        evaluations,
    }
}

/// Integrates over `[a, b]` after the change of variables
/// `x = a + (b - a) w(u)`, `w(u) = u^p / (u^p + (1 - u)^p)`. An endpoint
/// singularity `|x - a|^{-s}` becomes `u^{p(1 - s) - 1}`, which is smooth
/// enough for Gauss-Kronrod once `p >= 2 / (1 - s)`.
pub fn integrate_endpoint_singular<F: FnMut(f64) -> Sample>(
    mut f: F,
    a: f64,
    b: f64,
    p: i32,
    opts: &AdaptiveOptions,
) -> AdaptiveResult {
    let len = b - a;
    integrate(
        |u| {
            let (w, dw) = cluster(u, p);
            let s = f(a + len * w);
            Sample {
                value: s.value * len * dw,
                err: s.err * (len * dw).abs(),
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// The clustering map `u -> (w(u), w'(u))` used by
/// [`integrate_endpoint_singular`].
pub fn cluster(u: f64, p: i32) -> (f64, f64) {
    let v = 1.0 - u;
    let up = u.powi(p);
    let vp = v.powi(p);
    let den = up + vp;
    (
        up / den,
        p as f64 * u.powi(p - 1) * v.powi(p - 1) / (den * den),
    )
}

/// Clustering power that flattens `|x - a|^{-s}`.
pub fn clustering_power(s: f64) -> i32 {
    ((2.0 / (1.0 - s.clamp(0.0, 0.95))).ceil() as i32).clamp(3, 40)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(
            |x| (x * x * x).into(),
            0.0,
            2.0,
            &AdaptiveOptions::default(),
        );
        assert!((r.value - 4.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_oscillatory() {
        let r = integrate(
            |x: f64| x.sin().into(),
            0.0,
            std::f64::consts::PI,
            &AdaptiveOptions::default(),
        );
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.err < 1e-8);
    }

    #[test]
    fn endpoint_singularity_resolved() {
        // int_0^1 x^{-0.75} dx = 4
        let opts = AdaptiveOptions {
            rel_tol: 1e-10,
            ..Default::default()
        };
        let r = integrate_endpoint_singular(
            |x: f64| x.powf(-0.75).into(),
            0.0,
            1.0,
            clustering_power(0.75),
            &opts,
        );
        assert!((r.value - 4.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn kink_is_refined() {
        let r = integrate(
            |x: f64| (x - 0.3).abs().into(),
            0.0,
            1.0,
            &AdaptiveOptions::default(),
        );
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-10);
        assert!(r.max_depth > 3);
    }

    #[test]
    fn parallel_matches_sequential() {
        let f = |x: f64| Sample::from((3.0 * x).cos() * (-x * x).exp());
        let a = integrate(f, -2.0, 3.0, &AdaptiveOptions::default());
        let b = integrate_par(f, -2.0, 3.0, &AdaptiveOptions::default());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.err.to_bits(), b.err.to_bits());
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| Sample::from((10.0 * x).sin() / (1.0 + x * x));
        let a = integrate(f, -3.0, 5.0, &AdaptiveOptions::default());
        let b = integrate(f, -3.0, 5.0, &AdaptiveOptions::default());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
