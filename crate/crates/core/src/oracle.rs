//! Reference computations that share no code path with the primary
//! implementation beyond point construction and field evaluation.
//!
//! - central finite differences of transported field values,
//! - RK4 integration of the parallel-transport ODE on the sphere,
//! - classical flat semismooth Newton with an LU solve.

use crate::fields::{AmbientMap, TangentMap, VectorField};
use crate::geometry::{
    exp_map, parallel_transport, tangent_basis, ManifoldKind, ManifoldPoint, TangentVector,
    ANTIPODAL_MARGIN,
};
use crate::linalg::Matrix;
use crate::scalar::{dot, norm, Real};
use crate::solver::{SolverConfig, Termination};
use crate::{Error, Result};

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// `(1/2h) [P_{p+ p} X(p+) - P_{p- p} X(p-)]` with `p± = exp_p(±h v)`.
///
/// Only meaningful where `X` is differentiable; the caller asserts that.
pub fn fd_directional_derivative<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    p: &ManifoldPoint<T>,
    v: &TangentVector<T>,
    h: T,
) -> Result<TangentVector<T>> {
    if !(h > T::zero()) {
        return Err(Error::Contract(
            "finite-difference step must be positive".into(),
        ));
    }
    let plus = exp_map(p, &v.scale(h))?;
    let minus = exp_map(p, &v.scale(-h))?;
    let xp = parallel_transport(&plus, p, &field.eval(&plus)?)?;
    let xm = parallel_transport(&minus, p, &field.eval(&minus)?)?;
    Ok(xp.sub(&xm)?.scale(T::one() / (T::c(2.0) * h)))
}

/// Matrix of finite-difference directional derivatives along
/// `tangent_basis(p)`.
pub fn fd_covariant_derivative<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    p: &ManifoldPoint<T>,
    h: T,
) -> Result<TangentMap<T>> {
    let basis = tangent_basis(p);
    let n = basis.dim();
    let mut m = Matrix::zeros(n, n);
    for (j, e) in basis.vectors().iter().enumerate() {
        let col = basis.coords_of(&fd_directional_derivative(field, p, e, h)?)?;
        for (i, c) in col.into_iter().enumerate() {
            m[(i, j)] = c;
        }
    }
    TangentMap::new(p, m)
}

/// Integrates `∇_{γ'} Y = 0` along the minimal geodesic from `p` to `q`.
///
/// On the sphere the ambient form is `Y' = -<γ', Y> γ`; classic RK4 with
/// `steps` uniform steps, re-projecting `Y` onto the tangent space after each
/// step.
pub fn ode_parallel_transport<T: Real>(
    p: &ManifoldPoint<T>,
    q: &ManifoldPoint<T>,
    v: &TangentVector<T>,
    steps: usize,
) -> Result<TangentVector<T>> {
    v.check_base(p)?;
    if p.kind() != q.kind() {
        return Err(Error::Contract("points on different manifolds".into()));
    }
    if let ManifoldKind::Euclidean(_) = p.kind() {
        return q.tangent(v.comps().to_vec());
    }
    if steps == 0 {
        return Err(Error::Contract("need at least one integration step".into()));
    }
    let (pc, qc) = (p.coords(), q.coords());
    let cos_t = dot(pc, qc);
    let w: Vec<T> = qc.iter().zip(pc).map(|(&b, &a)| b - cos_t * a).collect();
    let wn = norm(&w);
    let theta = wn.atan2(cos_t);
    if theta > T::PI() - T::c(ANTIPODAL_MARGIN) {
        return Err(Error::NearAntipodal {
            distance: theta.as_f64(),
            margin: ANTIPODAL_MARGIN,
        });
    }
    if wn == T::zero() {
        return q.tangent(v.comps().to_vec());
    }
    let dir: Vec<T> = w.iter().map(|&x| x / wn).collect();
    let gamma = |t: T| -> Vec<T> {
        let (c, s) = ((t * theta).cos(), (t * theta).sin());
        pc.iter().zip(&dir).map(|(&a, &b)| c * a + s * b).collect()
    };
    let velocity = |t: T| -> Vec<T> {
        let (c, s) = ((t * theta).cos(), (t * theta).sin());
        pc.iter()
            .zip(&dir)
            .map(|(&a, &b)| theta * (c * b - s * a))
            .collect()
    };
    let rhs = |t: T, y: &[T]| -> Vec<T> {
        let g = gamma(t);
        let a = dot(&velocity(t), y);
        g.iter().map(|&x| -a * x).collect()
    };
    let axpy =
        |y: &[T], k: &[T], s: T| -> Vec<T> { y.iter().zip(k).map(|(&a, &b)| a + s * b).collect() };

    let h = T::one() / T::c(steps as f64);
    let half = h / T::c(2.0);
    let mut y = v.comps().to_vec();
    for i in 0..steps {
        let t = T::c(i as f64) * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + half, &axpy(&y, &k1, half));
        let k3 = rhs(t + half, &axpy(&y, &k2, half));
        let k4 = rhs(t + h, &axpy(&y, &k3, h));
        for j in 0..y.len() {
            y[j] = y[j] + h / T::c(6.0) * (k1[j] + T::c(2.0) * (k2[j] + k3[j]) + k4[j]);
        }
        let g = gamma(t + h);
        let a = dot(&g, &y);
        y.iter_mut().zip(&g).for_each(|(x, &gi)| *x = *x - a * gi);
    }
    q.project(&y)
}

/// Iterates of the classical flat semismooth Newton method.
#[derive(Clone, Debug)]
pub struct FlatTrace<T> {
    pub iterates: Vec<Vec<T>>,
    pub termination: Termination,
}

/// `x_{k+1} = x_k - V_k^{-1} Y(x_k)`, `V_k ∈ ∂Y(x_k)`, with the same stopping
/// rules as the Riemannian solver.
pub fn flat_semismooth_newton<T: Real, M: AmbientMap<T> + ?Sized>(
    map: &M,
    x0: &[T],
    cfg: &SolverConfig<T>,
) -> Result<FlatTrace<T>> {
    cfg.validate()?;
    if x0.len() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: x0.len(),
        });
    }
    let mut iterates = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    let mut small_step = false;
    let termination = loop {
        let y = map.eval(&x);
        if norm(&y) <= cfg.tol_field {
            break Termination::FieldTolerance;
        }
        if small_step {
            break Termination::StepTolerance;
        }
        if iterates.len() > cfg.max_iters {
            break Termination::MaxIters;
        }
        let v = map.clarke_element(&x, cfg.selection);
        let Some(s) = lu_solve(&v, &y, cfg.singular_threshold) else {
            break Termination::SingularElement;
        };
        x = x.iter().zip(&s).map(|(&a, &b)| a - b).collect();
        iterates.push(x.clone());
        small_step = norm(&s) <= cfg.tol_step;
    };
    Ok(FlatTrace {
        iterates,
        termination,
    })
}

/// Gaussian elimination with partial pivoting; `None` when a pivot falls
/// below `threshold`.
fn lu_solve<T: Real>(a: &Matrix<T>, b: &[T], threshold: T) -> Option<Vec<T>> {
    let n = b.len();
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| {
            m[(i, k)]
                .abs()
                .partial_cmp(&m[(j, k)].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(m[(piv, k)].abs() >= threshold) {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = tmp;
            }
            x.swap(k, piv);
        }
        for i in (k + 1)..n {
            let f = m[(i, k)] / m[(k, k)];
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                m[(i, j)] = m[(i, j)] - f * m[(k, j)];
            }
            x[i] = x[i] - f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s = ((k + 1)..n).fold(x[k], |acc, j| acc - m[(k, j)] * x[j]);
        x[k] = s / m[(k, k)];
    }
    Some(x)
}
