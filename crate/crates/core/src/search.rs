//! One-dimensional maximization: coarse grid scan followed by golden-section
//! refinement.

/// `(√5 - 1) / 2`
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search until the
/// bracket is narrower than `tol`. Returns `(argmax, max)`.
pub fn golden_section_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        }
    }
    if fa >= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// `points` values log-spaced from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (llo, lhi) = (lo.ln(), hi.ln());
            let step = (lhi - llo) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == points - 1 {
                        hi
                    } else {
                        (llo + step * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Maximizes `f` over `[lo, hi]` (both positive): scans a `grid_points` log
/// grid, then refines the best cell's neighbourhood by golden section in
/// `ln x` until the relative width is below `rel_tol`.
///
/// Returns `None` if every grid value is non-positive.
pub fn maximize_log_scale<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    rel_tol: f64,
) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let grid = log_grid(lo, hi, grid_points.max(3));
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let (best, &best_value) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if best_value <= 0.0 {
        return None;
    }
    let left = grid[best.saturating_sub(1)].ln();
    let right = grid[(best + 1).min(grid.len() - 1)].ln();
    let (lx, value) = golden_section_max(|lx| f(lx.exp()), left, right, rel_tol);
    if value >= best_value {
        Some((lx.exp(), value))
    } else {
        Some((grid[best], best_value))
    }
}
