//! Vector-valued quadrature: adaptive Gauss-Legendre panels and the
//! periodic trapezoid rule.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0);
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x.into_iter().map(T::lit).collect(), w.into_iter().map(T::lit).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions<T> {
    pub rel_tol: T,
    pub order: usize,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl<T: Real> Default for AdaptiveOptions<T> {
    fn default() -> Self {
        AdaptiveOptions { rel_tol: T::lit(1e-4), order: 8, initial_panels: 4, max_panels: 256 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral<T, const N: usize> {
    pub value: [T; N],
    pub error: [T; N],
    pub evaluations: usize,
    pub panels: usize,
}

fn add<T: Real, const N: usize>(a: [T; N], b: [T; N]) -> [T; N] {
    std::array::from_fn(|i| a[i] + b[i])
}

/// Per-component tolerance: relative to the component itself, with a floor
/// relative to the summed magnitude so that vanishing components converge.
fn tolerances<T: Real, const N: usize>(value: &[T; N], rel: T) -> [T; N] {
    let scale: T = value.iter().map(|v| v.abs()).sum();
    let floor = rel * T::lit(1e-3) * scale + T::min_positive_value();
    std::array::from_fn(|i| rel * value[i].abs() + floor)
}

struct Panel<T, const N: usize> {
    lo: T,
    hi: T,
    /// Two-half estimate (used as the panel value).
    value: [T; N],
    left: [T; N],
    right: [T; N],
    error: [T; N],
}

/// `integral_a^b f` to relative tolerance, refining the worst panel first.
pub fn adaptive<T, const N: usize, F>(f: &F, a: T, b: T, opts: &AdaptiveOptions<T>) -> Result<Integral<T, N>>
where
    T: Real,
    F: Fn(T) -> Result<[T; N]> + Sync,
{
    let zero = [T::zero(); N];
    if !(b > a) {
        return Ok(Integral { value: zero, error: zero, evaluations: 0, panels: 0 });
    }
    let (xs, ws) = gauss_legendre::<T>(opts.order);
    let half = T::lit(0.5);
    let mut evaluations = 0usize;
    // Gauss rule on each interval, nodes evaluated in parallel and summed in order.
    let mut rule = |intervals: &[(T, T)]| -> Result<Vec<[T; N]>> {
        let nodes: Vec<(usize, T, T)> = intervals
            .iter()
            .enumerate()
            .flat_map(|(j, &(lo, hi))| {
                let c = half * (lo + hi);
                let h = half * (hi - lo);
                xs.iter().zip(&ws).map(move |(x, w)| (j, c + h * *x, h * *w)).collect::<Vec<_>>()
            })
            .collect();
        evaluations += nodes.len();
        let vals: Vec<[T; N]> = nodes.par_iter().map(|(_, x, _)| f(*x)).collect::<Result<_>>()?;
        let mut out = vec![zero; intervals.len()];
        for ((j, _, w), v) in nodes.iter().zip(vals) {
            out[*j] = add(out[*j], std::array::from_fn(|i| *w * v[i]));
        }
        Ok(out)
    };
    let make = |lo: T, hi: T, whole: [T; N], l: [T; N], r: [T; N]| -> Panel<T, N> {
        let value = add(l, r);
        Panel { lo, hi, value, left: l, right: r, error: std::array::from_fn(|i| (value[i] - whole[i]).abs()) }
    };
    let n0 = opts.initial_panels.max(1);
    let edges: Vec<T> = (0..=n0).map(|i| a + (b - a) * T::of(i) / T::of(n0)).collect();
    let mut intervals = Vec::new();
    for i in 0..n0 {
        let (lo, hi) = (edges[i], edges[i + 1]);
        let m = half * (lo + hi);
        intervals.extend([(lo, hi), (lo, m), (m, hi)]);
    }
    let g = rule(&intervals)?;
    let mut panels: Vec<Panel<T, N>> = (0..n0).map(|i| make(edges[i], edges[i + 1], g[3 * i], g[3 * i + 1], g[3 * i + 2])).collect();
    loop {
        let mut value = zero;
        let mut error = zero;
        for p in &panels {
            value = add(value, p.value);
            error = add(error, p.error);
        }
        let tol = tolerances(&value, opts.rel_tol);
        if (0..N).all(|i| error[i] <= tol[i]) {
            return Ok(Integral { value, error, evaluations, panels: panels.len() });
        }
        // worst panel relative to the per-component tolerance; ties go to the lowest index
        let score = |p: &Panel<T, N>| (0..N).map(|i| p.error[i] / tol[i]).fold(T::zero(), T::max);
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if score(p) > score(&panels[worst]) {
                worst = i;
            }
        }
        if panels.len() >= opts.max_panels {
            let p = &panels[worst];
            let err: T = p.error.iter().copied().fold(T::zero(), T::max);
            return Err(Error::Quadrature { lo: p.lo.to_f64_lossy(), hi: p.hi.to_f64_lossy(), error: err.to_f64_lossy() });
        }
        let p = panels.remove(worst);
        let m = half * (p.lo + p.hi);
        let (lm, mr) = (half * (p.lo + m), half * (m + p.hi));
        let g = rule(&[(p.lo, lm), (lm, m), (m, mr), (mr, p.hi)])?;
        panels.insert(worst, make(m, p.hi, p.right, g[2], g[3]));
        panels.insert(worst, make(p.lo, m, p.left, g[0], g[1]));
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodicOptions<T> {
    pub rel_tol: T,
    pub min_points: usize,
    pub max_points: usize,
}

impl<T: Real> Default for PeriodicOptions<T> {
    fn default() -> Self {
        PeriodicOptions { rel_tol: T::lit(1e-5), min_points: 16, max_points: 4096 }
    }
}

/// Trapezoid rule over one period `[0, period)`, doubling the point count
/// until two successive estimates agree.
pub fn periodic_trapezoid<T, const N: usize, F>(f: &F, period: T, opts: &PeriodicOptions<T>) -> Result<Integral<T, N>>
where
    T: Real,
    F: Fn(T) -> Result<[T; N]> + Sync,
{
    let mut n = opts.min_points.max(2);
    let eval = |idx: Vec<T>| -> Result<[T; N]> {
        let vals: Vec<[T; N]> = idx.par_iter().map(|x| f(*x)).collect::<Result<_>>()?;
        Ok(vals.into_iter().fold([T::zero(); N], add))
    };
    let mut sum = eval((0..n).map(|j| period * T::of(j) / T::of(n)).collect())?;
    let mut evaluations = n;
    let mut estimate: [T; N] = std::array::from_fn(|i| sum[i] * period / T::of(n));
    loop {
        if 2 * n > opts.max_points {
            return Err(Error::Quadrature { lo: 0.0, hi: period.to_f64_lossy(), error: f64::NAN });
        }
        let mids = eval((0..n).map(|j| period * (T::of(2 * j + 1)) / T::of(2 * n)).collect())?;
        evaluations += n;
        n *= 2;
        sum = add(sum, mids);
        let next: [T; N] = std::array::from_fn(|i| sum[i] * period / T::of(n));
        let error: [T; N] = std::array::from_fn(|i| (next[i] - estimate[i]).abs());
        let tol = tolerances(&next, opts.rel_tol);
        estimate = next;
        if (0..N).all(|i| error[i] <= tol[i]) {
            return Ok(Integral { value: estimate, error, evaluations, panels: n });
        }
    }
}
