//! Deterministic adaptive cubature over axis-aligned boxes.
//!
//! Each region is scored with a tensor-product Gauss-Kronrod (G7, K15)
//! rule; the error estimate is |K15 - G7|. Regions live in a max-heap by
//! error and the worst one is bisected along its widest axis until the
//! summed error meets the target. Evaluation order is fixed, so results
//! are bit-reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

// QUADPACK 15-point Kronrod nodes (positive half) and weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
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

/// (node offset in [-1,1], Kronrod weight, Gauss weight or 0)
fn rule_points() -> [(f64, f64, f64); 15] {
    let mut pts = [(0.0, 0.0, 0.0); 15];
    for (i, p) in pts.iter_mut().enumerate() {
        let m = i as i64 - 7;
        let k = (7 - m.abs()) as usize;
        let x = if m < 0 { -XGK[k] } else { XGK[k] };
        let wg = if m % 2 == 0 { WG[(7 - m.abs() as usize - 1) / 2] } else { 0.0 };
        *p = (x, WGK[k], wg);
    }
    pts
}

struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    error: f64,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    /// Error estimate actually achieved.
    pub error: f64,
}

fn eval_region<F: Fn(&[f64]) -> f64>(f: &F, lo: &[f64], hi: &[f64], pts: &[(f64, f64, f64); 15]) -> (f64, f64) {
    let d = lo.len();
    let mut jac = 1.0;
    let mut center = vec![0.0; d];
    let mut half = vec![0.0; d];
    for i in 0..d {
        center[i] = 0.5 * (lo[i] + hi[i]);
        half[i] = 0.5 * (hi[i] - lo[i]);
        jac *= half[i];
    }

    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    'outer: loop {
        let mut wk = 1.0;
        let mut wg = 1.0;
        for i in 0..d {
            let (node, wgk, wgg) = pts[idx[i]];
            x[i] = center[i] + half[i] * node;
            wk *= wgk;
            wg *= wgg;
        }
        let fx = f(&x);
        kronrod += wk * fx;
        if wg != 0.0 {
            gauss += wg * fx;
        }
        for i in 0..d {
            idx[i] += 1;
            if idx[i] < 15 {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    let value = kronrod * jac;
    let error = (kronrod - gauss).abs() * jac;
    (value, error)
}

/// Adaptive integration of `f` over the box `[lo, hi]`, seeded with an
/// optional per-dimension list of interior split points (useful when the
/// integrand has known kink manifolds aligned with the axes).
pub fn integrate_with_splits<F: Fn(&[f64]) -> f64>(
    f: F,
    lo: &[f64],
    hi: &[f64],
    splits: &[Vec<f64>],
    rel_tol: f64,
    abs_tol: f64,
    max_regions: usize,
) -> Result<QuadResult> {
    assert_eq!(lo.len(), hi.len());
    let d = lo.len();
    assert!(d >= 1);
    let pts = rule_points();

    // per-dimension breakpoints
    let mut grids: Vec<Vec<f64>> = Vec::with_capacity(d);
    for i in 0..d {
        let mut g = vec![lo[i]];
        if let Some(s) = splits.get(i) {
            for &p in s {
                if p > lo[i] && p < hi[i] {
                    g.push(p);
                }
            }
        }
        g.push(hi[i]);
        g.sort_by(f64::total_cmp);
        g.dedup();
        grids.push(g);
    }

    let mut heap = BinaryHeap::new();
    let mut total_value = 0.0;
    let mut total_error = 0.0;

    // seed with the grid cells
    let mut cell = vec![0usize; d];
    'cells: loop {
        let mut clo = vec![0.0; d];
        let mut chi = vec![0.0; d];
        for i in 0..d {
            clo[i] = grids[i][cell[i]];
            chi[i] = grids[i][cell[i] + 1];
        }
        let (value, error) = eval_region(&f, &clo, &chi, &pts);
        total_value += value;
        total_error += error;
        heap.push(Region { lo: clo, hi: chi, value, error });
        for i in 0..d {
            cell[i] += 1;
            if cell[i] + 1 < grids[i].len() {
                continue 'cells;
            }
            cell[i] = 0;
        }
        break;
    }

    while total_error > abs_tol.max(rel_tol * total_value.abs()) {
        if heap.len() >= max_regions {
            return Err(Error::QuadratureFailed {
                achieved: total_error,
                target: abs_tol.max(rel_tol * total_value.abs()),
            });
        }
        let worst = heap.pop().expect("heap cannot be empty");
        total_value -= worst.value;
        total_error -= worst.error;
        // bisect along widest axis
        let mut axis = 0;
        let mut width = 0.0;
        for i in 0..d {
            let w = worst.hi[i] - worst.lo[i];
            if w > width {
                width = w;
                axis = i;
            }
        }
        let mid = 0.5 * (worst.lo[axis] + worst.hi[axis]);
        for half_idx in 0..2 {
            let mut clo = worst.lo.clone();
            let mut chi = worst.hi.clone();
            if half_idx == 0 {
                chi[axis] = mid;
            } else {
                clo[axis] = mid;
            }
            let (value, error) = eval_region(&f, &clo, &chi, &pts);
            total_value += value;
            total_error += error;
            heap.push(Region { lo: clo, hi: chi, value, error });
        }
    }

    Ok(QuadResult { value: total_value, error: total_error })
}

pub fn integrate<F: Fn(&[f64]) -> f64>(
    f: F,
    lo: &[f64],
    hi: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_regions: usize,
) -> Result<QuadResult> {
    integrate_with_splits(f, lo, hi, &[], rel_tol, abs_tol, max_regions)
}

pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_regions: usize,
) -> Result<QuadResult> {
    integrate(|x| f(x[0]), &[a], &[b], rel_tol, abs_tol, max_regions)
}

pub fn integrate_1d_with_splits<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_regions: usize,
) -> Result<QuadResult> {
    integrate_with_splits(
        |x| f(x[0]),
        &[a],
        &[b],
        &[splits.to_vec()],
        rel_tol,
        abs_tol,
        max_regions,
    )
}
