//! Key-length bounds for privacy amplification, in nats.
//!
//! Each bound has a closed form for the BSC source and a general form for
//! an explicit joint table. The closed forms fold `q` into `[0, 1/2]`.

use std::borrow::Cow;
use std::f64::consts::LN_2;

use serde::Serialize;

use crate::entropy::{
    conditional_entropy, dispersion, h_spectral, h_spectral_of, smooth_hmin, smooth_hmin_bar, ConditionalProfile,
};
use crate::error::{Error, Result};
use crate::numeric::{binom_cdf_inverse_with, normal_quantile, BinomialModel, QuantileConvention};
use crate::optimize::{maximize, Maximum};
use crate::prob::{binary_entropy, total_variation, BscSource, JointTable, MarginalTable};
use crate::real::{log_sum_exp, Real};

/// Lower end of the `θ` search for the exponential bound, whose objective
/// diverges to `-inf` at `θ = 0`.
pub const THETA_FLOOR: f64 = 1e-6;

/// Candidate references closer than this to `P_Z` (in total variation) are
/// treated as `P_Z` itself.
const SAME_REFERENCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    SpectralLower,
    SpectralUpper,
    ExponentialLower,
    HybridLower,
    GaussianApprox,
    SmoothMinLower,
    SmoothMinUpper,
}

#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Bsc(BscSource),
    /// A one-shot source, typically an already materialized `P^n`.
    Table(&'a JointTable),
}

#[derive(Debug, Clone, Copy)]
pub struct BoundParams<'a> {
    pub eps: f64,
    pub eta: f64,
    pub zeta: f64,
    pub source: Source<'a>,
    /// Quantile convention for the BSC closed forms.
    pub convention: QuantileConvention,
}

impl<'a> BoundParams<'a> {
    /// Requires `0 < ε < 1`, `0 < η ≤ ε` and `0 < ζ ≤ 1 − ε`.
    pub fn new(eps: f64, eta: f64, zeta: f64, source: Source<'a>) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Parameter(format!("ε = {eps} outside (0, 1)")));
        }
        if !(eta > 0.0 && eta <= eps) {
            return Err(Error::Parameter(format!("η = {eta} outside (0, ε]")));
        }
        if !(zeta > 0.0 && zeta <= 1.0 - eps) {
            return Err(Error::Parameter(format!("ζ = {zeta} outside (0, 1 − ε]")));
        }
        Ok(Self { eps, eta, zeta, source, convention: QuantileConvention::default() })
    }

    /// `η = ζ = ε/2`.
    pub fn with_defaults(eps: f64, source: Source<'a>) -> Result<Self> {
        Self::new(eps, eps / 2.0, eps / 2.0, source)
    }

    pub fn with_convention(mut self, convention: QuantileConvention) -> Self {
        self.convention = convention;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub label: &'static str,
    pub nats: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub value_nats: f64,
    pub value_bits: f64,
    pub kind: BoundKind,
    pub theta_star: Option<f64>,
    pub r_star: Option<f64>,
    pub k_star: Option<i64>,
    pub components: Vec<Component>,
}

impl BoundResult {
    fn from_components(kind: BoundKind, components: Vec<(&'static str, f64)>) -> Self {
        let value_nats = components.iter().fold(0.0, |acc, c| acc + c.1);
        Self {
            value_nats,
            value_bits: value_nats / LN_2,
            kind,
            theta_star: None,
            r_star: None,
            k_star: None,
            components: components.into_iter().map(|(label, nats)| Component { label, nats }).collect(),
        }
    }

    fn theta(mut self, theta: f64) -> Self {
        self.theta_star = Some(theta);
        self
    }

    fn threshold(mut self, r: f64, k: Option<i64>) -> Self {
        self.r_star = Some(r);
        self.k_star = k;
        self
    }
}

/// `ln 4η²`, the leftover-hash slack for target distance `η`.
fn hash_slack(eta: f64) -> f64 {
    (4.0 * eta * eta).ln()
}

/// `(k*, r)` with `r = k* ln((1-q)/q) − n ln(1-q)`, the spectral threshold of
/// the BSC at level `a`.
fn bsc_threshold(bsc: &BscSource, a: f64, convention: QuantileConvention) -> Result<(i64, f64)> {
    let q = bsc.folded_q();
    if q == 0.0 {
        // Every outcome sits at log-likelihood ratio zero.
        return Ok((0, 0.0));
    }
    let n = bsc.n();
    let model = BinomialModel::new(n, q)?;
    let k = binom_cdf_inverse_with(&model, a, convention)?;
    let r = k as f64 * ((1.0 - q) / q).ln() - n as f64 * (-q).ln_1p();
    Ok((k, r))
}

fn table_of<'a>(params: &BoundParams<'a>) -> Result<&'a JointTable> {
    match params.source {
        Source::Table(t) => {
            t.ensure_normalized()?;
            Ok(t)
        }
        Source::Bsc(_) => Err(Error::Unsupported("expected a table source".into())),
    }
}

/// Table for the general path, materializing a small BSC product on demand.
fn materialized<'a>(params: &BoundParams<'a>) -> Result<Cow<'a, JointTable>> {
    match params.source {
        Source::Table(t) => {
            t.ensure_normalized()?;
            Ok(Cow::Borrowed(t))
        }
        Source::Bsc(bsc) => Ok(Cow::Owned(bsc.materialize()?)),
    }
}

fn spectral_level_below(params: &BoundParams) -> Result<f64> {
    let a = params.eps - params.eta;
    if a <= 0.0 {
        return Err(Error::Parameter(format!("ε − η = {a} must be positive")));
    }
    Ok(a)
}

/// Reference marginal maximizing the order-`1+θ` term:
/// `R(z) ∝ (Σ_x P(x,z)^{1+θ})^{1/(1+θ)}`.
pub fn optimal_rz<T: Real>(p: &JointTable<T>, theta: T) -> Result<MarginalTable<T>> {
    if !(theta >= T::zero() && theta <= T::one()) {
        return Err(Error::Parameter(format!("θ = {theta} outside [0, 1]")));
    }
    p.ensure_normalized()?;
    let a = T::one() + theta;
    let log_mass: Vec<T> =
        (0..p.z_size()).map(|z| log_sum_exp((0..p.x_size()).map(|x| a * p.log_weight(x, z))) / a).collect();
    normalized_reference(log_mass).or_else(|_| MarginalTable::from_weights(p.z_weights()))
}

fn normalized_reference<T: Real>(log_mass: Vec<T>) -> Result<MarginalTable<T>> {
    let norm = log_sum_exp(log_mass.iter().copied());
    MarginalTable::new(log_mass.into_iter().map(|l| (l - norm).exp()).collect())
}

/// Spectral lower bound `max_R H_s^{ε−η}(P|R) + ln 4η² − 1`, with `R`
/// restricted to `P_Z` in the general path.
pub fn ell_spectral_lower(params: &BoundParams) -> Result<BoundResult> {
    let a = spectral_level_below(params)?;
    let slack = hash_slack(params.eta);
    match params.source {
        Source::Bsc(bsc) => {
            let (k, r) = bsc_threshold(&bsc, a, params.convention)?;
            Ok(BoundResult::from_components(
                BoundKind::SpectralLower,
                vec![("spectral_entropy", r), ("hash_slack", slack), ("rounding", -1.0)],
            )
            .threshold(r, Some(k)))
        }
        Source::Table(_) => {
            let p = table_of(params)?;
            let r = h_spectral_of(p, &p.z_marginal()?, a)?.value;
            Ok(BoundResult::from_components(
                BoundKind::SpectralLower,
                vec![("spectral_entropy", r), ("hash_slack", slack), ("rounding", -1.0)],
            )
            .threshold(r, None))
        }
    }
}

/// Spectral upper bound `H_s^{ε+ζ}(P|P_Z) − ln ζ`.
pub fn ell_spectral_upper(params: &BoundParams) -> Result<BoundResult> {
    let b = params.eps + params.zeta;
    if b >= 1.0 {
        return Err(Error::Parameter(format!("ε + ζ = {b} must be below 1")));
    }
    let slack = -params.zeta.ln();
    let (k, r) = match params.source {
        Source::Bsc(bsc) => {
            let (k, r) = bsc_threshold(&bsc, b, params.convention)?;
            (Some(k), r)
        }
        Source::Table(_) => {
            let p = table_of(params)?;
            (None, h_spectral_of(p, &p.z_marginal()?, b)?.value)
        }
    };
    Ok(BoundResult::from_components(
        BoundKind::SpectralUpper,
        vec![("spectral_entropy", r), ("smoothing_slack", slack)],
    )
    .threshold(r, k))
}

/// The two algebraic forms of the exponential bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentialRoute {
    /// `sup_ρ (−φ(ρ) + ln(2ε/3))/ρ − 1`, searched through `ρ = θ/(1+θ)`.
    Gallager,
    /// `sup_θ H_{1+θ}(P|P_Z) + ((1+θ)/θ) ln(2ε/3) − 1`.
    Renyi,
}

/// Exponential lower bound along one route; `θ` ranges over `(0, 1]`.
pub fn ell_exponential_lower_via(params: &BoundParams, route: ExponentialRoute) -> Result<BoundResult> {
    let security = (2.0 * params.eps / 3.0).ln();
    // entropy_term(θ) is the θ-dependent entropic part divided by θ.
    let entropy_term: Box<dyn Fn(f64) -> f64 + '_> = match (params.source, route) {
        (Source::Bsc(bsc), ExponentialRoute::Renyi) => {
            let n = bsc.n() as f64;
            Box::new(move |t| -n * bsc.renyi_log_sum(t) / t)
        }
        (Source::Bsc(bsc), ExponentialRoute::Gallager) => {
            let n = bsc.n() as f64;
            let q = bsc.folded_q();
            Box::new(move |t| {
                let rho = t / (1.0 + t);
                let s = 1.0 / (1.0 - rho);
                let phi1 = (1.0 - rho) * (q.powf(s) + (1.0 - q).powf(s)).ln();
                -n * phi1 / rho
            })
        }
        (Source::Table(_), ExponentialRoute::Renyi) => {
            let p = table_of(params)?;
            let pz = p.z_marginal()?;
            let profile = ConditionalProfile::new(p);
            Box::new(move |t| profile.renyi_log_sum(&pz, t).map_or(f64::NAN, |v| -v / t))
        }
        (Source::Table(_), ExponentialRoute::Gallager) => {
            let profile = ConditionalProfile::new(table_of(params)?);
            Box::new(move |t| {
                let rho = t / (1.0 + t);
                profile.phi(rho).map_or(f64::NAN, |v| -v / rho)
            })
        }
    };
    let objective = |t: f64| entropy_term(t) + (1.0 + t) / t * security;
    let Maximum { x: theta, .. } = maximize(&objective, THETA_FLOOR, 1.0);
    Ok(BoundResult::from_components(
        BoundKind::ExponentialLower,
        vec![
            ("entropy_term", entropy_term(theta)),
            ("security_term", (1.0 + theta) / theta * security),
            ("rounding", -1.0),
        ],
    )
    .theta(theta))
}

/// Exponential lower bound: the larger of the two routes.
pub fn ell_exponential_lower(params: &BoundParams) -> Result<BoundResult> {
    let gallager = ell_exponential_lower_via(params, ExponentialRoute::Gallager)?;
    let renyi = ell_exponential_lower_via(params, ExponentialRoute::Renyi)?;
    Ok(if gallager.value_nats >= renyi.value_nats { gallager } else { renyi })
}

/// Hybrid lower bound
/// `max_θ max_R [θ H_{1+θ}(P|R) + (1−θ) H_s^{ε−η}(P|R)] + ln 4η² − 1`.
///
/// The general path searches `R ∈ {P_Z, optimal_rz(P, θ)}`; at `θ = 0` the
/// Rényi addend is exactly zero so the bound reduces to the spectral lower
/// bound.
pub fn ell_hybrid_lower(params: &BoundParams) -> Result<BoundResult> {
    let a = spectral_level_below(params)?;
    let slack = hash_slack(params.eta);
    match params.source {
        Source::Bsc(bsc) => {
            let (k, spectral) = bsc_threshold(&bsc, a, params.convention)?;
            let n = bsc.n() as f64;
            let renyi = |t: f64| if t == 0.0 { 0.0 } else { -n * bsc.renyi_log_sum(t) };
            let Maximum { x: theta, .. } = maximize(|t| renyi(t) + (1.0 - t) * spectral, 0.0, 1.0);
            Ok(BoundResult::from_components(
                BoundKind::HybridLower,
                vec![
                    ("renyi_term", renyi(theta)),
                    ("spectral_term", (1.0 - theta) * spectral),
                    ("hash_slack", slack),
                    ("rounding", -1.0),
                ],
            )
            .theta(theta)
            .threshold(spectral, Some(k)))
        }
        Source::Table(_) => {
            let p = table_of(params)?;
            let pz = p.z_marginal()?;
            let profile = ConditionalProfile::new(p);
            let spectral_pz = h_spectral(&profile.spectrum(&pz)?, a)?.value;
            // Best (renyi, spectral) addend pair at θ over the candidate references.
            let terms = |t: f64| -> (f64, f64) {
                let renyi_pz = if t == 0.0 { 0.0 } else { -profile.renyi_log_sum(&pz, t).unwrap_or(f64::NAN) };
                let mut best = (renyi_pz, spectral_pz);
                if t > 0.0 {
                    if let Ok(r) = normalized_reference(profile.optimal_log_weights(t)) {
                        if total_variation(r.probs(), pz.probs()).is_ok_and(|d| d > SAME_REFERENCE) {
                            let renyi_r = -profile.renyi_log_sum(&r, t).unwrap_or(f64::NAN);
                            let spectral_r = profile
                                .spectrum(&r)
                                .and_then(|spec| h_spectral(&spec, a))
                                .map_or(f64::NAN, |v| v.value);
                            if renyi_r + (1.0 - t) * spectral_r > best.0 + (1.0 - t) * best.1 {
                                best = (renyi_r, spectral_r);
                            }
                        }
                    }
                }
                best
            };
            let Maximum { x: theta, .. } = maximize(
                |t| {
                    let (renyi, spectral) = terms(t);
                    renyi + (1.0 - t) * spectral
                },
                0.0,
                1.0,
            );
            let (renyi, spectral) = terms(theta);
            Ok(BoundResult::from_components(
                BoundKind::HybridLower,
                vec![
                    ("renyi_term", renyi),
                    ("spectral_term", (1.0 - theta) * spectral),
                    ("hash_slack", slack),
                    ("rounding", -1.0),
                ],
            )
            .theta(theta)
            .threshold(spectral, None))
        }
    }
}

/// Two-term Gaussian approximation `n H(X|Z) + sqrt(n V) Φ⁻¹(ε)`.
pub fn gaussian_approx(params: &BoundParams) -> Result<BoundResult> {
    let (h, v) = match params.source {
        Source::Bsc(bsc) => {
            let n = bsc.n() as f64;
            (n * binary_entropy(bsc.q()), n * bsc.dispersion())
        }
        Source::Table(_) => {
            let p = table_of(params)?;
            (conditional_entropy(p)?, dispersion(p)?)
        }
    };
    let second = if v > 0.0 { v.sqrt() * normal_quantile(params.eps)? } else { 0.0 };
    Ok(BoundResult::from_components(BoundKind::GaussianApprox, vec![("first_order", h), ("second_order", second)]))
}

/// Lower bound through the sub-normalized smooth min-entropy at radius
/// `(ε − η)/2`, maximized over `R ∈ {P_Z, optimal_rz(P, 1)}`.
///
/// Exact but needs the explicit table; BSC sources are materialized.
pub fn ell_smooth_min_lower(params: &BoundParams) -> Result<BoundResult> {
    let a = spectral_level_below(params)?;
    let p = materialized(params)?;
    let radius = a / 2.0;
    let mut best = f64::NEG_INFINITY;
    for r in [p.z_marginal()?, optimal_rz(&p, 1.0)?] {
        best = best.max(smooth_hmin_bar(&p, &r, radius)?.value);
    }
    Ok(BoundResult::from_components(
        BoundKind::SmoothMinLower,
        vec![("smooth_min_entropy", best), ("hash_slack", hash_slack(params.eta)), ("rounding", -1.0)],
    ))
}

/// Upper bound `H_min^ε(P|P_Z)` over the normalized ball.
pub fn ell_smooth_min_upper(params: &BoundParams) -> Result<BoundResult> {
    let p = materialized(params)?;
    let h = smooth_hmin(&p, &p.z_marginal()?, params.eps)?.value;
    Ok(BoundResult::from_components(BoundKind::SmoothMinUpper, vec![("smooth_min_entropy", h)]))
}
