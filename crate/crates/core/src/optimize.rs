//! Bounded scalar maximization: a coarse grid followed by golden-section
//! refinement around the best grid point.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

pub const COARSE_POINTS: usize = 64;
pub const X_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

impl Maximum {
    /// Strictly better, or equal at a smaller argument.
    fn beats(&self, other: &Maximum) -> bool {
        self.value > other.value || (self.value == other.value && self.x < other.x)
    }
}

fn eval(f: &impl Fn(f64) -> f64, x: f64) -> Maximum {
    let v = f(x);
    Maximum { x, value: if v.is_nan() { f64::NEG_INFINITY } else { v } }
}

/// Maximizes `f` on `[lo, hi]` with the default 64-point grid and 1e-8 width.
pub fn maximize(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Maximum {
    maximize_with(f, lo, hi, COARSE_POINTS, X_TOLERANCE)
}

/// The objective need not be concave; the grid picks the basin and the
/// golden-section pass refines it. Ties go to the smaller argument.
pub fn maximize_with(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize, tol: f64) -> Maximum {
    assert!(lo <= hi, "empty interval [{lo}, {hi}]");
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let grid: Vec<Maximum> =
        (0..points).map(|i| eval(&f, if i + 1 == points { hi } else { lo + step * i as f64 })).collect();
    let (i_best, mut best) =
        grid.iter().copied().enumerate().fold((0, grid[0]), |acc, (i, m)| if m.beats(&acc.1) { (i, m) } else { acc });
    if step == 0.0 {
        return best;
    }

    let mut a = grid[i_best.saturating_sub(1)].x;
    let mut b = grid[(i_best + 1).min(points - 1)].x;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(&f, c);
    let mut fd = eval(&f, d);
    while b - a > tol {
        if fc.value >= fd.value {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(&f, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(&f, d);
        }
        for m in [fc, fd] {
            if m.beats(&best) {
                best = m;
            }
        }
    }
    best
}
