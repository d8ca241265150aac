//! Derivative-free local search shared by the descent solver and the null
//! space constant estimator.

const GOLDEN_ITERS: usize = 16;
const MAX_SWEEPS: usize = 2000;

/// Cyclic coordinate descent with golden-section line searches on
/// `[−h, h]`. A move must lower `f` by more than `tol`. The window doubles
/// after a move that lands near its edge and shrinks fourfold after a sweep
/// without progress; the search ends once it falls below `min_step`.
pub(crate) fn descend(
    f: &impl Fn(&[f64]) -> f64,
    start: Vec<f64>,
    h0: f64,
    tol: f64,
    min_step: f64,
) -> (Vec<f64>, f64) {
    let mut c = start;
    let mut fc = f(&c);
    let mut h = h0;
    let mut trial = c.clone();
    for _ in 0..MAX_SWEEPS {
        let mut improved = false;
        for j in 0..c.len() {
            let base = c[j];
            trial.copy_from_slice(&c);
            let (t, ft) = golden_min(
                |t| {
                    trial[j] = base + t;
                    f(&trial)
                },
                -h,
                h,
            );
            if ft < fc - tol {
                c[j] = base + t;
                fc = ft;
                improved = true;
                if t.abs() > 0.8 * h {
                    h *= 2.0;
                }
            }
        }
        if !improved {
            h *= 0.25;
            if h < min_step {
                break;
            }
        }
    }
    (c, fc)
}

/// Golden-section search for a minimum of `g` on `[lo, hi]`. Returns the best
/// point evaluated.
fn golden_min(mut g: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = g(x1);
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = g(x2);
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}
