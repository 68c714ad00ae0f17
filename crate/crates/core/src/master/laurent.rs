use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this magnitude count as zero when trimming orders.
pub const ORDER_EPS: f64 = 1e-8;

const N_START: usize = 64;
const N_MAX: usize = 4096;
pub(crate) const NODE_GRID: usize = N_MAX;
const STABLE: f64 = 1e-9;

/// Principal part `Σ_l α_l / (z - z*)^l` of a function at one pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleData {
    pub center: Complex64,
    /// Shift index `w` of `z* = iK' + w·T/p`.
    pub w: i64,
    /// Last `l` with `|α_l| > ORDER_EPS`, zero at a regular point.
    pub order: usize,
    /// `α_1 ..= α_max_order`, untrimmed.
    pub alphas: Vec<Complex64>,
    pub radius: f64,
    pub nodes: usize,
}

/// `α_l = (1/2πi) ∮ f(z) (z - z*)^{l-1} dz` on the circle `|z - z*| = radius`
/// by the trapezoid rule, doubling the node count from 64 until every `α_l`
/// moves by less than 1e-9 relative to
/// `max(1, max_l |α_l|)`. `others` lists the remaining poles of `f`; the
/// radius must stay below a third of the distance to the nearest.
pub fn extract_alphas<F>(f: F, center: Complex64, max_order: usize, radius: f64, others: &[Complex64]) -> Result<PoleData>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    extract_indexed(|_, z| f(z), center, max_order, radius, others)
}

/// As [`extract_alphas`], passing `f` the position of each node on the
/// finest grid (`NODE_GRID` points) alongside the point itself, so callers
/// can share work between contours of equal radius.
pub(crate) fn extract_indexed<F>(f: F, center: Complex64, max_order: usize, radius: f64, others: &[Complex64]) -> Result<PoleData>
where
    F: Fn(usize, Complex64) -> Result<Complex64>,
{
    let nearest = others
        .iter()
        .map(|o| (o - center).norm())
        .filter(|d| *d > 1e-12)
        .fold(f64::INFINITY, f64::min);
    if !(radius > 0.0) || 3.0 * radius >= nearest {
        return Err(Error::RadiusTooLarge { radius, distance: nearest });
    }
    let mut sums = vec![Complex64::new(0.0, 0.0); max_order];
    accumulate(&f, center, radius, N_START, 0, 1, &mut sums)?;
    let mut n = N_START;
    let mut prev: Vec<Complex64> = sums.iter().map(|a| a / n as f64).collect();
    loop {
        // the new nodes are the odd ones of the doubled grid
        accumulate(&f, center, radius, 2 * n, 1, 2, &mut sums)?;
        n *= 2;
        let cur: Vec<Complex64> = sums.iter().map(|a| a / n as f64).collect();
        let change = cur.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = cur.iter().map(|a| a.norm()).fold(1.0, f64::max);
        if change <= STABLE * scale {
            let order = cur.iter().rposition(|a| a.norm() > ORDER_EPS).map_or(0, |i| i + 1);
            return Ok(PoleData {
                center,
                w: 0,
                order,
                alphas: cur,
                radius,
                nodes: n,
            });
        }
        if n >= N_MAX {
            return Err(Error::NonConvergence {
                what: "Laurent coefficients".into(),
                detail: format!("still moving by {change:e} at {n} contour nodes"),
            });
        }
        prev = cur;
    }
}

/// Adds `f·ρ^l e^{ilθ}` at nodes `first, first + step, ...` of an `n`-point
/// grid to `acc[l - 1]`.
fn accumulate<F>(f: &F, center: Complex64, radius: f64, n: usize, first: usize, step: usize, acc: &mut [Complex64]) -> Result<()>
where
    F: Fn(usize, Complex64) -> Result<Complex64>,
{
    for k in (first..n).step_by(step) {
        let e = node(k * (NODE_GRID / n));
        let v = f(k * (NODE_GRID / n), center + radius * e)?;
        // dz = iρe^{iθ}dθ, so α_l is the mean of f·ρ^l e^{ilθ}
        let mut w = v * radius * e;
        for a in acc.iter_mut() {
            *a += w;
            w *= radius * e;
        }
    }
    Ok(())
}

/// `e^{iθ}` at node `k` of the finest grid.
pub(crate) fn node(k: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / NODE_GRID as f64)
}
