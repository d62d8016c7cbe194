//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use keylen::{JointTable, MarginalTable};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact `P[Binomial(n, num/den) ≤ k]` for `k = 0..=n`.
pub fn rational_binom_cdf(n: u64, num: i64, den: i64) -> Vec<BigRational> {
    let q = BigRational::new(BigInt::from(num), BigInt::from(den));
    let p = BigRational::one() - &q;
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = BigRational::zero();
    let mut binom = BigInt::one();
    for k in 0..=n {
        if k > 0 {
            binom = binom * BigInt::from(n - k + 1) / BigInt::from(k);
        }
        let mut term = BigRational::from_integer(binom.clone());
        for _ in 0..k {
            term *= &q;
        }
        for _ in 0..(n - k) {
            term *= &p;
        }
        acc += term;
        out.push(acc.clone());
    }
    out
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("representable")
}

/// `Φ(x)` for `x < 0` by composite Simpson integration of the density.
pub fn normal_cdf_by_quadrature(x: f64) -> f64 {
    let lo = x - 12.0;
    let steps = 20_000;
    let h = (x - lo) / steps as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(lo) + pdf(x);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * pdf(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// `Φ⁻¹(p)` for small `p` by bisection on the quadrature CDF.
pub fn normal_quantile_by_bisection(p: f64) -> f64 {
    let (mut lo, mut hi) = (-12.0, 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf_by_quadrature(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `max H_min(Q|R)` over `Q` in the ε-ball around `P`, solved as a linear
/// program in `(t, Q, |P − Q|)`. `normalized` selects `ΣQ = 1` instead of
/// `ΣQ ≤ 1`. Requires `R` with full support.
pub fn smooth_hmin_lp(p: &JointTable, r: &MarginalTable, eps: f64, normalized: bool) -> f64 {
    let zs = p.z_size();
    let cells = p.cells();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let q: Vec<_> = (0..cells).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let u: Vec<_> = (0..cells).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for i in 0..cells {
        let w = p.weights()[i];
        lp.add_constraint(&[(u[i], 1.0), (q[i], 1.0)], ComparisonOp::Ge, w);
        lp.add_constraint(&[(u[i], 1.0), (q[i], -1.0)], ComparisonOp::Ge, -w);
        lp.add_constraint(&[(q[i], 1.0), (t, -r.prob(i % zs))], ComparisonOp::Le, 0.0);
    }
    let all_u: Vec<_> = u.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(&all_u, ComparisonOp::Le, 2.0 * eps);
    let all_q: Vec<_> = q.iter().map(|&v| (v, 1.0)).collect();
    let op = if normalized { ComparisonOp::Eq } else { ComparisonOp::Le };
    lp.add_constraint(&all_q, op, 1.0);
    let solution = lp.solve().expect("feasible: Q = P");
    -solution.objective().ln()
}
