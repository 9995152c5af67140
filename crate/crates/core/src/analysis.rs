//! Empirical diagnostics for the local and semi-local convergence theory.
//!
//! Every supremum (Lipschitz constants, the geodesic-spread constant `K_p`,
//! `max ‖V^{-1}‖`) is approximated by seeded random sampling plus a few
//! structured samples, so the reported numbers are lower bounds on the true
//! constants. Same seed, same result.

use crate::fields::{SelectionRule, TangentMap, VectorField};
use crate::geometry::{
    distance, exp_map, log_map, parallel_transport, tangent_basis, ManifoldKind, ManifoldPoint,
    TangentVector,
};
use crate::scalar::Real;
use crate::solver::NewtonTrace;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Pairs closer than this are resampled by the Lipschitz estimator.
pub const MIN_PAIR_DISTANCE: f64 = 1e-12;

/// Distances below this are treated as converged by order estimation.
pub const ORDER_DISTANCE_FLOOR: f64 = 1e-13;

/// Scan residuals at or below this many ulps of 1 count as exact.
pub const ROUNDOFF_FACTOR: f64 = 64.0;

/// Sampling radius cap for `K_p` on the sphere (`π` minus this margin).
pub const KP_RADIUS_MARGIN: f64 = 1e-3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed unit tangent direction at `p`.
pub fn random_unit_tangent<T: Real, R: Rng>(p: &ManifoldPoint<T>, rng: &mut R) -> TangentVector<T> {
    loop {
        let g: Vec<T> = (0..p.coords().len())
            .map(|_| T::c(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let v = p.project(&g).expect("matching length");
        let n = v.norm();
        if n > T::c(1e-6) {
            return v.scale(T::one() / n);
        }
    }
}

/// `exp_c(r u)` for a random unit direction `u`.
pub fn random_point_at_distance<T: Real, R: Rng>(
    center: &ManifoldPoint<T>,
    r: T,
    rng: &mut R,
) -> Result<ManifoldPoint<T>> {
    let u = random_unit_tangent(center, rng);
    exp_map(center, &u.scale(r))
}

/// Random point of the geodesic ball `B_radius(center)`.
pub fn random_point_in_ball<T: Real, R: Rng>(
    center: &ManifoldPoint<T>,
    radius: T,
    rng: &mut R,
) -> Result<ManifoldPoint<T>> {
    let r = radius * T::c(rng.random::<f64>());
    random_point_at_distance(center, r, rng)
}

fn check_radius<T: Real>(kind: ManifoldKind, radius: T) -> Result<()> {
    let ok = radius > T::zero()
        && kind
            .injectivity_radius::<T>()
            .is_none_or(|limit| radius < limit);
    if !ok {
        return Err(Error::Contract(format!(
            "radius {radius} must lie in (0, injectivity radius) on {kind}"
        )));
    }
    Ok(())
}

/// Lower bound on the Lipschitz constant of `X` on `B_radius(center)`:
/// the largest `‖P_{pq} X(p) - X(q)‖ / d(p, q)` over sampled pairs.
///
/// Besides `samples` random pairs, each sample contributes a nearby pair
/// (`d ≈ radius·1e-3`), and every basis axis through the center contributes
/// one pair on each side.
pub fn estimate_lipschitz<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    center: &ManifoldPoint<T>,
    radius: T,
    samples: usize,
    seed: u64,
) -> Result<T> {
    check_radius(center.kind(), radius)?;
    if samples < 2 {
        return Err(Error::Contract("need at least two samples".into()));
    }
    let mut rng = rng(seed);
    let ratio = |p: &ManifoldPoint<T>, q: &ManifoldPoint<T>| -> Result<Option<T>> {
        let d = distance(p, q)?;
        if d < T::c(MIN_PAIR_DISTANCE) {
            return Ok(None);
        }
        let moved = parallel_transport(p, q, &field.eval(p)?)?;
        Ok(Some(moved.sub(&field.eval(q)?)?.norm() / d))
    };

    let mut best = T::zero();
    for e in tangent_basis(center).vectors() {
        for side in [-T::one(), T::one()] {
            let p = exp_map(center, &e.scale(side * radius * T::c(0.5)))?;
            let q = exp_map(center, &e.scale(side * radius * T::c(0.25)))?;
            if let Some(r) = ratio(&p, &q)? {
                best = best.max(r);
            }
        }
    }
    let mut taken = 0;
    let mut attempts = 0;
    while taken < samples {
        attempts += 1;
        if attempts > 100 * samples {
            return Err(Error::InsufficientData(
                "could not draw separated sample pairs".into(),
            ));
        }
        let p = random_point_in_ball(center, radius, &mut rng)?;
        let q = random_point_in_ball(center, radius, &mut rng)?;
        let Some(r) = ratio(&p, &q)? else { continue };
        best = best.max(r);
        taken += 1;
        let near = random_point_at_distance(&p, radius * T::c(1e-3), &mut rng)?;
        if distance(center, &near)? < radius {
            if let Some(r) = ratio(&p, &near)? {
                best = best.max(r);
            }
        }
    }
    Ok(best)
}

/// Metric Lipschitz constant `√(1 + L²)` of the section `p ↦ X(p)` into the
/// tangent bundle, for `L >= 0`.
pub fn lipschitz_to_metric<T: Real>(l: T) -> T {
    assert!(l >= T::zero(), "Lipschitz constant must be nonnegative");
    (T::one() + l * l).sqrt()
}

/// `√(d(p, q)² + ‖P_{pq} u - v‖²)` for `u ∈ T_p M`, `v ∈ T_q M`: the
/// tangent-bundle length of the lift of the minimal geodesic.
pub fn tm_distance_upper_bound<T: Real>(u: &TangentVector<T>, v: &TangentVector<T>) -> Result<T> {
    let (p, q) = (u.base(), v.base());
    let d = distance(p, q)?;
    let moved = parallel_transport(p, q, u)?;
    let gap = moved.sub(v)?.norm();
    Ok((d * d + gap * gap).sqrt())
}

/// `d(exp_q u, exp_q v) / ‖u - v‖`.
pub fn kp_ratio<T: Real>(u: &TangentVector<T>, v: &TangentVector<T>) -> Result<T> {
    let q = u.base();
    let diff = u.sub(v)?.norm();
    if diff == T::zero() {
        return Err(Error::Contract("K_p ratio needs u != v".into()));
    }
    Ok(distance(&exp_map(q, u)?, &exp_map(q, v)?)? / diff)
}

/// Lower bound on `K_p`, the supremum of [`kp_ratio`] over
/// `q ∈ B_{r_p}(p)`, `‖v‖ <= r_p`, `‖u - v‖ <= r_p`.
///
/// On the sphere `r_p` is capped at `π - 1e-3`; besides random pairs every
/// sample also tries a collinear pair `u = s v`. Flat space returns 1:
/// the exponential map is a translation there.
pub fn estimate_kp<T: Real>(
    kind: ManifoldKind,
    p: &ManifoldPoint<T>,
    samples: usize,
    seed: u64,
) -> Result<T> {
    if samples < 1 {
        return Err(Error::Contract("need at least one sample".into()));
    }
    if p.kind() != kind {
        return Err(Error::Contract(format!("point not on {kind}")));
    }
    let Some(inj) = kind.injectivity_radius::<T>() else {
        return Ok(T::one());
    };
    let r = inj - T::c(KP_RADIUS_MARGIN);
    let min_gap = T::c(1e-3);
    let mut rng = rng(seed);
    let mut best = T::zero();
    for _ in 0..samples {
        let q = random_point_in_ball(p, r, &mut rng)?;
        let v_len = r * T::c(rng.random::<f64>());
        let v = random_unit_tangent(&q, &mut rng).scale(v_len);
        let gap = min_gap + (r - min_gap) * T::c(rng.random::<f64>());
        let u = v.add(&random_unit_tangent(&q, &mut rng).scale(gap))?;
        best = best.max(kp_ratio(&u, &v)?);

        // collinear: u = s v with |s - 1| ‖v‖ = gap
        if v_len > min_gap {
            let sign = if rng.random::<bool>() {
                T::one()
            } else {
                -T::one()
            };
            let s = T::one() + sign * gap / v_len;
            best = best.max(kp_ratio(&v.scale(s), &v)?);
        }
    }
    Ok(best)
}

/// Semismoothness residuals around a singularity and their log-log fit.
#[derive(Clone, Debug)]
pub struct SemismoothScan<T> {
    pub center: ManifoldPoint<T>,
    /// Strictly decreasing.
    pub radii: Vec<T>,
    /// Max over samples at each radius of
    /// `‖X(p*) - P_{p p*}[X(p) + V_p log_p p*]‖`.
    pub residuals: Vec<T>,
    /// Fitted slope minus one, clamped to `[0, 1.5]`; `None` when some
    /// residual is at roundoff level (the linear model is exact at scan
    /// precision).
    pub fitted_mu: Option<T>,
    /// `exp(intercept)` of the fit; zero when `fitted_mu` is `None`.
    pub fitted_eps: T,
    /// Unclamped least-squares slope of `log residual` against `log r`.
    pub raw_slope: Option<T>,
}

impl<T: Real> SemismoothScan<T> {
    /// Fitted order above one: reported, but outside the admissible range.
    pub fn mu_above_one(&self) -> bool {
        self.raw_slope.is_some_and(|s| s > T::c(2.0))
    }

    /// Smallest `ε` with `residual(r) <= ε r^{1+μ}` at every scanned radius.
    pub fn order_constant(&self, mu: T) -> T {
        self.radii
            .iter()
            .zip(&self.residuals)
            .fold(T::zero(), |acc, (&r, &res)| {
                acc.max(res / r.powf(T::one() + mu))
            })
    }
}

/// Residual of the semismoothness inequality at one sample point.
pub fn semismooth_residual<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    p_star: &ManifoldPoint<T>,
    p: &ManifoldPoint<T>,
    rule: SelectionRule,
) -> Result<T> {
    let v = field.clarke_element(p, rule)?;
    let predicted = field.eval(p)?.add(&v.apply(&log_map(p, p_star)?)?)?;
    let moved = parallel_transport(p, p_star, &predicted)?;
    Ok(field.eval(p_star)?.sub(&moved)?.norm())
}

/// Scans the semismoothness residual over shrinking spheres around `p_star`
/// and fits `residual ≈ ε r^{1+μ}` by least squares in log-log scale.
///
/// Each radius uses every `± basis` direction plus `samples_per_radius`
/// random directions.
pub fn semismooth_scan<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    p_star: &ManifoldPoint<T>,
    radii: &[T],
    samples_per_radius: usize,
    rule: SelectionRule,
    seed: u64,
) -> Result<SemismoothScan<T>> {
    let x_star = field.eval(p_star)?.norm();
    if x_star > T::tol(1e-10, 1e3) {
        return Err(Error::Contract(format!(
            "scan center is not a singularity (|X| = {x_star:e})"
        )));
    }
    if radii.len() < 2 {
        return Err(Error::InsufficientData("need at least two radii".into()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Contract("radii must be strictly decreasing".into()));
    }
    for &r in radii {
        check_radius(p_star.kind(), r)?;
    }
    let mut rng = rng(seed);
    let basis = tangent_basis(p_star);
    let mut residuals = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut worst = T::zero();
        let structured = basis
            .vectors()
            .iter()
            .flat_map(|e| [e.clone(), e.scale(-T::one())]);
        let random: Vec<_> = (0..samples_per_radius)
            .map(|_| random_unit_tangent(p_star, &mut rng))
            .collect();
        for u in structured.chain(random) {
            let p = exp_map(p_star, &u.scale(r))?;
            worst = worst.max(semismooth_residual(field, p_star, &p, rule)?);
        }
        residuals.push(worst);
    }

    let floor = T::epsilon() * T::c(ROUNDOFF_FACTOR);
    let (fitted_mu, fitted_eps, raw_slope) = if residuals.iter().any(|&r| r <= floor) {
        (None, T::zero(), None)
    } else {
        let xs: Vec<T> = radii.iter().map(|r| r.ln()).collect();
        let ys: Vec<T> = residuals.iter().map(|r| r.ln()).collect();
        let (slope, intercept) = least_squares(&xs, &ys);
        let mu = (slope - T::one()).max(T::zero()).min(T::c(1.5));
        (Some(mu), intercept.exp(), Some(slope))
    };
    Ok(SemismoothScan {
        center: p_star.clone(),
        radii: radii.to_vec(),
        residuals,
        fitted_mu,
        fitted_eps,
        raw_slope,
    })
}

fn least_squares<T: Real>(xs: &[T], ys: &[T]) -> (T, T) {
    let n = T::c(xs.len() as f64);
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (sxy, sxx) = xs
        .iter()
        .zip(ys)
        .fold((T::zero(), T::zero()), |(sxy, sxx), (&x, &y)| {
            (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
        });
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Banach perturbation bound: if `‖A^{-1}‖ ‖B - A‖ < 1`, then `B` is
/// invertible and `‖B^{-1}‖ <= ‖A^{-1}‖ / (1 - ‖A^{-1}(B - A)‖)`.
///
/// Returns `Ok(None)` when the hypothesis fails.
pub fn banach_inverse_bound<T: Real>(a: &TangentMap<T>, b: &TangentMap<T>) -> Result<Option<T>> {
    a.check_same_base(b)?;
    let svd = a.svd();
    let a_inv = svd.inverse().ok_or(Error::Singular {
        sigma_min: svd.smallest().as_f64(),
    })?;
    let inv_norm = T::one() / svd.smallest();
    let diff = b.matrix().sub(a.matrix());
    if !(inv_norm * diff.operator_norm() < T::one()) {
        return Ok(None);
    }
    let rel = a_inv.matmul(&diff).operator_norm();
    Ok(Some(inv_norm / (T::one() - rel)))
}

/// Largest `‖V^{-1}‖` over the elements of `∂X(p)` returned by every
/// deterministic rule and a few seeded random vertices.
pub fn max_inverse_norm<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    p: &ManifoldPoint<T>,
    seed: u64,
) -> Result<T> {
    let mut worst = T::zero();
    for rule in sample_rules(seed) {
        let v = field.clarke_element(p, rule)?;
        let smin = v.svd().smallest();
        if !(smin > T::tol(1e-10, 64.0)) {
            return Err(Error::RegularityViolation {
                sigma_min: smin.as_f64(),
            });
        }
        worst = worst.max(T::one() / smin);
    }
    Ok(worst)
}

fn sample_rules(seed: u64) -> Vec<SelectionRule> {
    let mut rules = SelectionRule::deterministic().to_vec();
    rules.extend((0..4).map(|k| SelectionRule::RandomVertex(seed.wrapping_add(k))));
    rules
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityProbe<T> {
    /// `λ`: largest sampled `‖V^{-1}‖` at the center.
    pub lambda: T,
    /// `λ / (1 - ε λ)`.
    pub bound: T,
    /// Largest listed radius such that every sampled element in every ball up
    /// to it is nonsingular with `‖V_p^{-1}‖ <= bound`; zero if none.
    pub radius: T,
}

/// Finds how far from `p_star` the perturbed inverse bound
/// `‖V_p^{-1}‖ <= λ/(1 - ελ)` keeps holding.
pub fn regularity_radius_probe<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    p_star: &ManifoldPoint<T>,
    eps: T,
    radii: &[T],
    samples: usize,
    seed: u64,
) -> Result<RegularityProbe<T>> {
    let lambda = max_inverse_norm(field, p_star, seed)?;
    if !(eps > T::zero() && eps * lambda < T::one()) {
        return Err(Error::Contract(format!(
            "need 0 < eps * lambda < 1 (eps = {eps}, lambda = {lambda})"
        )));
    }
    let bound = lambda / (T::one() - eps * lambda);
    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut rng = rng(seed);
    let mut radius = T::zero();
    'radii: for r in sorted {
        check_radius(p_star.kind(), r)?;
        for _ in 0..samples {
            let p = random_point_in_ball(p_star, r, &mut rng)?;
            for rule in SelectionRule::deterministic() {
                let smin = field.clarke_element(&p, rule)?.svd().smallest();
                if !(smin > T::zero() && T::one() / smin <= bound) {
                    break 'radii;
                }
            }
        }
        radius = r;
    }
    Ok(RegularityProbe {
        lambda,
        bound,
        radius,
    })
}

/// Verdicts of the semi-local (Kantorovich-type) existence conditions
/// `ελ < 1/2` and `λ‖X(p0)‖ / (1 - 2ελ) <= δ̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct KantorovichCertificate<T> {
    pub p0: ManifoldPoint<T>,
    pub lambda0: T,
    pub eps: T,
    pub delta_bar: T,
    pub field_norm: T,
    pub cond1: bool,
    /// `None` (not applicable) when `cond1` fails.
    pub cond2: Option<bool>,
    /// `λ‖X(p0)‖ / (1 - 2ελ)`: the smallest admissible `δ̄`.
    pub required_radius: Option<T>,
    /// `ελ / (1 - 2ελ)` in `d(p_k, p*) <= coeff · d(p_k, p_{k-1})`.
    pub predicted_error_coeff: Option<T>,
}

impl<T: Real> KantorovichCertificate<T> {
    pub fn certified(&self) -> bool {
        self.cond1 && self.cond2 == Some(true)
    }

    /// Evaluates the a-posteriori error bound at every `k >= 1` of `trace`.
    pub fn check_error_bound(
        &self,
        trace: &NewtonTrace<T>,
        p_star: &ManifoldPoint<T>,
    ) -> Result<ErrorBoundCheck<T>> {
        let coeff = self.predicted_error_coeff.ok_or_else(|| {
            Error::Contract("error bound needs a certificate with eps * lambda < 1/2".into())
        })?;
        let mut rows = Vec::new();
        for k in 1..trace.iterates.len() {
            let actual = distance(&trace.iterates[k], p_star)?;
            let bound = coeff * distance(&trace.iterates[k], &trace.iterates[k - 1])?;
            rows.push((actual, bound));
        }
        Ok(ErrorBoundCheck { rows })
    }
}

#[derive(Clone, Debug)]
pub struct ErrorBoundCheck<T> {
    /// `(d(p_k, p*), coeff · d(p_k, p_{k-1}))` for `k = 1, 2, ...`.
    pub rows: Vec<(T, T)>,
}

impl<T: Real> ErrorBoundCheck<T> {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|&(a, b)| a <= b)
    }
}

pub fn kantorovich_check<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    p0: &ManifoldPoint<T>,
    delta_bar: T,
    eps: T,
    lambda0: T,
) -> Result<KantorovichCertificate<T>> {
    if !(lambda0 > T::zero() && eps > T::zero()) {
        return Err(Error::Contract("lambda0 and eps must be positive".into()));
    }
    check_radius(p0.kind(), delta_bar)?;
    let field_norm = field.eval(p0)?.norm();
    let el = eps * lambda0;
    let cond1 = el < T::c(0.5);
    let (cond2, required_radius, predicted_error_coeff) = if cond1 {
        let denom = T::one() - T::c(2.0) * el;
        let required = lambda0 * field_norm / denom;
        (
            Some(required <= delta_bar),
            Some(required),
            Some(el / denom),
        )
    } else {
        (None, None, None)
    };
    Ok(KantorovichCertificate {
        p0: p0.clone(),
        lambda0,
        eps,
        delta_bar,
        field_norm,
        cond1,
        cond2,
        required_radius,
        predicted_error_coeff,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderEstimate<T> {
    pub distances: Vec<T>,
    /// `q_k = log(d_{k+1}/d_k) / log(d_k/d_{k-1})` over valid `k`.
    pub orders: Vec<T>,
    /// Median of the last three valid `q_k`.
    pub final_order: T,
    /// `d_{k+1}/d_k` while `d_{k+1}` is above the floor.
    pub ratios: Vec<T>,
    /// Ratios strictly decreasing (at least two of them).
    pub superlinear: bool,
}

/// Convergence order of a trace relative to a known limit.
pub fn estimate_order<T: Real>(
    trace: &NewtonTrace<T>,
    p_star: &ManifoldPoint<T>,
) -> Result<OrderEstimate<T>> {
    if trace.iterates.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "order estimation needs at least 4 iterates, trace has {}",
            trace.iterates.len()
        )));
    }
    let ds = trace
        .iterates
        .iter()
        .map(|p| distance(p, p_star))
        .collect::<Result<Vec<T>>>()?;
    estimate_order_from_distances(&ds)
}

/// Order estimate from an error sequence `d_k`.
///
/// `q_k` is used only while `d_{k+1} >= 1e-13` and `d_k / d_{k-1} <= 1/2`.
pub fn estimate_order_from_distances<T: Real>(ds: &[T]) -> Result<OrderEstimate<T>> {
    let floor = T::c(ORDER_DISTANCE_FLOOR);
    let mut orders = Vec::new();
    for k in 1..ds.len().saturating_sub(1) {
        let (prev, cur, next) = (ds[k - 1], ds[k], ds[k + 1]);
        if next < floor || !(prev > T::zero()) || !(cur > T::zero()) {
            continue;
        }
        if cur / prev > T::c(0.5) {
            continue;
        }
        orders.push((next / cur).ln() / (cur / prev).ln());
    }
    if orders.is_empty() {
        return Err(Error::InsufficientData(
            "no valid successive-order quotient".into(),
        ));
    }
    let mut tail: Vec<T> = orders[orders.len().saturating_sub(3)..].to_vec();
    tail.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let final_order = if tail.len() % 2 == 1 {
        tail[tail.len() / 2]
    } else {
        (tail[tail.len() / 2 - 1] + tail[tail.len() / 2]) / T::c(2.0)
    };
    let ratios: Vec<T> = ds
        .windows(2)
        .take_while(|w| w[1] >= floor && w[0] > T::zero())
        .map(|w| w[1] / w[0])
        .collect();
    let superlinear = ratios.len() >= 2 && ratios.windows(2).all(|w| w[1] < w[0]);
    Ok(OrderEstimate {
        distances: ds.to_vec(),
        orders,
        final_order,
        ratios,
        superlinear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{example51, flat_field, AffineMap};
    use crate::linalg::Matrix;

    fn s1(t: f64) -> ManifoldPoint<f64> {
        ManifoldPoint::from_f64(ManifoldKind::Sphere(1), &[t.sin(), t.cos()]).unwrap()
    }

    #[test]
    fn metric_constant() {
        assert_eq!(lipschitz_to_metric(0.0), 1.0);
        assert_eq!(lipschitz_to_metric(5.0f64), 26f64.sqrt());
        assert!(lipschitz_to_metric(1.0) < lipschitz_to_metric(1.5f64));
    }

    #[test]
    fn tm_bound_examples() {
        let p = s1(0.3);
        let u = p.tangent(vec![0.3f64.cos(), -0.3f64.sin()]).unwrap();
        assert_eq!(tm_distance_upper_bound(&u, &u).unwrap(), 0.0);
        let v = u.scale(2.5);
        assert!((tm_distance_upper_bound(&u, &v).unwrap() - 1.5).abs() < 1e-15);
        let q = s1(1.0);
        let w = q.zero_tangent();
        assert!(tm_distance_upper_bound(&u, &w).unwrap() >= 0.7);
    }

    #[test]
    fn constant_flat_field_has_zero_lipschitz_constant() {
        let f = flat_field(AffineMap::new(Matrix::zeros(2, 2), vec![1.0, -2.0]).unwrap());
        let c = ManifoldPoint::from_f64(ManifoldKind::Euclidean(2), &[0.0, 1.0]).unwrap();
        assert_eq!(estimate_lipschitz(&f, &c, 1.0, 50, 1).unwrap(), 0.0);
        assert!(estimate_lipschitz(&f, &c, 1.0, 1, 1).is_err());
    }

    #[test]
    fn euclidean_kp_is_one() {
        let k = ManifoldKind::Euclidean(3);
        let p = ManifoldPoint::<f64>::from_f64(k, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(estimate_kp(k, &p, 10, 0).unwrap(), 1.0);
    }

    #[test]
    fn collinear_kp_ratio_is_one() {
        let q = ManifoldPoint::<f64>::normalized(ManifoldKind::Sphere(2), vec![0.2, -0.4, 0.9])
            .unwrap();
        let v = q.project(&[1.0, 0.5, -0.2]).unwrap();
        for s in [0.0, 0.3, -0.7, 1.8] {
            let r = kp_ratio(&v.scale(s), &v).unwrap();
            assert!((r - 1.0).abs() < 1e-12, "s={s}: {r}");
        }
    }

    #[test]
    fn banach_examples() {
        let p = s1(0.0);
        let a = TangentMap::new(&p, Matrix::diag(&[2.0])).unwrap();
        assert_eq!(banach_inverse_bound(&a, &a).unwrap(), Some(0.5));
        let id = TangentMap::new(&p, Matrix::diag(&[1.0])).unwrap();
        let b = TangentMap::new(&p, Matrix::diag(&[1.5])).unwrap();
        assert_eq!(banach_inverse_bound(&id, &b).unwrap(), Some(2.0));
        let far = TangentMap::new(&p, Matrix::diag(&[3.0])).unwrap();
        assert_eq!(banach_inverse_bound(&id, &far).unwrap(), None);
        let zero = TangentMap::new(&p, Matrix::diag(&[0.0])).unwrap();
        assert!(banach_inverse_bound(&zero, &id).is_err());
    }

    #[test]
    fn example51_lambda_is_one_third() {
        let lambda = max_inverse_norm(&example51::<f64>(), &s1(0.0), 3).unwrap();
        assert!((lambda - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn regularity_probe_rejects_singular_center() {
        // V = diag(0, 1) at (0,0,1)
        let f = crate::fields::projected_field(
            AffineMap::new(Matrix::diag(&[1.0, 2.0, 3.0]), vec![1.0, 0.0, 2.0]).unwrap(),
        )
        .unwrap();
        let p = ManifoldPoint::from_f64(ManifoldKind::Sphere(2), &[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            regularity_radius_probe(&f, &p, 0.1, &[0.1], 10, 0),
            Err(Error::RegularityViolation { .. })
        ));
    }

    #[test]
    fn kantorovich_trivial_cases() {
        let f = example51::<f64>();
        let c = kantorovich_check(&f, &s1(0.1), 0.5, 1.8, 1.0 / 3.0).unwrap();
        assert!(!c.cond1);
        assert_eq!(c.cond2, None);
        assert_eq!(c.predicted_error_coeff, None);
        let c = kantorovich_check(&f, &s1(0.0), 1e-3, 0.1, 1.0 / 3.0).unwrap();
        assert!(c.certified());
        assert_eq!(c.required_radius, Some(0.0));
    }

    #[test]
    fn synthetic_orders() {
        let quad: Vec<f64> = (0..5).map(|k| 10f64.powi(-(1 << k))).collect();
        let est = estimate_order_from_distances(&quad).unwrap();
        assert!((est.final_order - 2.0).abs() < 1e-6);
        assert!(est.superlinear);
        let lin: Vec<f64> = (0..30).map(|k| 2f64.powi(-k)).collect();
        let est = estimate_order_from_distances(&lin).unwrap();
        assert!((est.final_order - 1.0).abs() < 1e-6);
        assert!(!est.superlinear);
        assert!(estimate_order_from_distances(&[1.0, 0.9, 0.8, 0.7]).is_err());
    }
}
