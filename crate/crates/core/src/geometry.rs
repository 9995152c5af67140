//! Closed-form differential geometry of the unit sphere `S^n ⊂ R^{n+1}` and of
//! flat `R^n`.
//!
//! Points and tangent vectors live in ambient coordinates. Constructors repair
//! small violations of the manifold and tangency constraints (below
//! [`Real::repair_tol`]) and reject anything larger, so long iterations cannot
//! drift off the sphere unnoticed.
//!
//! Geodesic computations on the sphere are restricted to minimal geodesics:
//! pairs closer than [`ANTIPODAL_MARGIN`] to antipodal are rejected since the
//! minimal geodesic joining them is not unique.

use crate::linalg::Matrix;
use crate::scalar::{dot, norm, Real};
use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Pairs with `d(p, q) > π - ANTIPODAL_MARGIN` have no usable minimal geodesic.
pub const ANTIPODAL_MARGIN: f64 = 1e-6;

/// Vectors shorter than this are treated as zero by `exp_map`.
pub const SMALL_VECTOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    /// `S^n` embedded in `R^{n+1}`.
    Sphere(usize),
    /// `R^n` with the flat metric.
    Euclidean(usize),
}

impl ManifoldKind {
    /// Intrinsic dimension `n`.
    pub fn dim(&self) -> usize {
        match *self {
            ManifoldKind::Sphere(n) | ManifoldKind::Euclidean(n) => n,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldKind::Sphere(n) => n + 1,
            ManifoldKind::Euclidean(n) => n,
        }
    }

    /// `π` on the sphere; `None` means unbounded.
    pub fn injectivity_radius<T: Real>(&self) -> Option<T> {
        match self {
            ManifoldKind::Sphere(_) => Some(T::PI()),
            ManifoldKind::Euclidean(_) => None,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, ManifoldKind::Sphere(_))
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Sphere(n) => write!(f, "sphere:{n}"),
            ManifoldKind::Euclidean(n) => write!(f, "euclidean:{n}"),
        }
    }
}

impl FromStr for ManifoldKind {
    type Err = String;

    /// Parses `sphere:<n>` or `euclidean:<n>` with `n >= 1`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (name, dim) = s
            .split_once(':')
            .ok_or_else(|| format!("expected <sphere|euclidean>:<dim>, got {s:?}"))?;
        let n: usize = dim
            .trim()
            .parse()
            .map_err(|_| format!("invalid manifold dimension {dim:?}"))?;
        if n == 0 {
            return Err("manifold dimension must be at least 1".into());
        }
        match name.trim() {
            "sphere" => Ok(ManifoldKind::Sphere(n)),
            "euclidean" => Ok(ManifoldKind::Euclidean(n)),
            other => Err(format!("unknown manifold {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint<T> {
    kind: ManifoldKind,
    coords: Vec<T>,
}

impl<T: Real> ManifoldPoint<T> {
    pub fn new(kind: ManifoldKind, mut coords: Vec<T>) -> Result<Self> {
        if kind.dim() == 0 {
            return Err(Error::Contract(
                "manifold dimension must be at least 1".into(),
            ));
        }
        check_len(kind.ambient_dim(), coords.len())?;
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("non-finite point coordinates".into()));
        }
        if kind.is_sphere() {
            let r = norm(&coords);
            let deviation = (r - T::one()).abs();
            if deviation > T::repair_tol() {
                return Err(Error::NotOnManifold {
                    deviation: deviation.as_f64(),
                });
            }
            if deviation > T::tight_tol() {
                coords.iter_mut().for_each(|x| *x = *x / r);
            }
        }
        Ok(ManifoldPoint { kind, coords })
    }

    pub fn from_f64(kind: ManifoldKind, coords: &[f64]) -> Result<Self> {
        Self::new(kind, coords.iter().map(|&x| T::c(x)).collect())
    }

    /// Radially normalizes arbitrary nonzero coordinates onto the sphere.
    pub fn normalized(kind: ManifoldKind, coords: Vec<T>) -> Result<Self> {
        if kind.is_sphere() {
            let r = norm(&coords);
            if !(r > T::zero()) {
                return Err(Error::Contract("cannot normalize the zero vector".into()));
            }
            Self::new(kind, coords.into_iter().map(|x| x / r).collect())
        } else {
            Self::new(kind, coords)
        }
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Tangent vector at this point, repairing a small normal component.
    pub fn tangent(&self, comps: Vec<T>) -> Result<TangentVector<T>> {
        TangentVector::new(self.clone(), comps)
    }

    /// Orthogonal projection of an arbitrary ambient vector onto the tangent
    /// space (`(I - p p^T) w` on the sphere).
    pub fn project(&self, ambient: &[T]) -> Result<TangentVector<T>> {
        check_len(self.coords.len(), ambient.len())?;
        let comps = if self.kind.is_sphere() {
            let a = dot(&self.coords, ambient);
            ambient
                .iter()
                .zip(&self.coords)
                .map(|(&w, &p)| w - a * p)
                .collect()
        } else {
            ambient.to_vec()
        };
        Ok(TangentVector {
            base: self.clone(),
            comps,
        })
    }

    pub fn zero_tangent(&self) -> TangentVector<T> {
        TangentVector {
            base: self.clone(),
            comps: vec![T::zero(); self.coords.len()],
        }
    }

    fn same_manifold(&self, other: &ManifoldPoint<T>) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::Contract(format!(
                "points on different manifolds ({} vs {})",
                self.kind, other.kind
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector<T> {
    base: ManifoldPoint<T>,
    comps: Vec<T>,
}

impl<T: Real> TangentVector<T> {
    pub fn new(base: ManifoldPoint<T>, mut comps: Vec<T>) -> Result<Self> {
        check_len(base.coords.len(), comps.len())?;
        if comps.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("non-finite tangent components".into()));
        }
        if base.kind.is_sphere() {
            let normal = dot(&base.coords, &comps);
            let scale = norm(&comps).max(T::one());
            if normal.abs() > T::repair_tol() * scale {
                return Err(Error::NotTangent {
                    normal: normal.as_f64(),
                });
            }
            comps
                .iter_mut()
                .zip(&base.coords)
                .for_each(|(v, &p)| *v = *v - normal * p);
        }
        Ok(TangentVector { base, comps })
    }

    pub fn base(&self) -> &ManifoldPoint<T> {
        &self.base
    }

    pub fn comps(&self) -> &[T] {
        &self.comps
    }

    pub fn norm(&self) -> T {
        norm(&self.comps)
    }

    pub fn inner(&self, other: &TangentVector<T>) -> Result<T> {
        self.check_base(&other.base)?;
        Ok(dot(&self.comps, &other.comps))
    }

    pub fn scale(&self, s: T) -> TangentVector<T> {
        TangentVector {
            base: self.base.clone(),
            comps: self.comps.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &TangentVector<T>) -> Result<TangentVector<T>> {
        self.check_base(&other.base)?;
        Ok(TangentVector {
            base: self.base.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &TangentVector<T>) -> Result<TangentVector<T>> {
        self.add(&other.scale(-T::one()))
    }

    /// Errors unless this vector is attached to `p`.
    pub fn check_base(&self, p: &ManifoldPoint<T>) -> Result<()> {
        if self.base != *p {
            return Err(Error::Contract(
                "tangent vector is attached to a different base point".into(),
            ));
        }
        Ok(())
    }
}

/// Orthonormal basis of one tangent space.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentBasis<T> {
    base: ManifoldPoint<T>,
    vectors: Vec<TangentVector<T>>,
}

impl<T: Real> TangentBasis<T> {
    pub fn base(&self) -> &ManifoldPoint<T> {
        &self.base
    }

    pub fn vectors(&self) -> &[TangentVector<T>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Coordinates `B^T v` of a tangent vector at the same base.
    pub fn coords_of(&self, v: &TangentVector<T>) -> Result<Vec<T>> {
        v.check_base(&self.base)?;
        Ok(self
            .vectors
            .iter()
            .map(|e| dot(&e.comps, &v.comps))
            .collect())
    }

    /// Tangent vector `B c`.
    pub fn vector_from(&self, coords: &[T]) -> Result<TangentVector<T>> {
        check_len(self.dim(), coords.len())?;
        let mut comps = vec![T::zero(); self.base.coords.len()];
        for (e, &c) in self.vectors.iter().zip(coords) {
            comps
                .iter_mut()
                .zip(&e.comps)
                .for_each(|(x, &b)| *x = *x + c * b);
        }
        Ok(TangentVector {
            base: self.base.clone(),
            comps,
        })
    }

    /// Ambient `(n+1) x n` (or `n x n`) matrix with the basis as columns.
    pub fn matrix(&self) -> Matrix<T> {
        let cols: Vec<Vec<T>> = self.vectors.iter().map(|e| e.comps.clone()).collect();
        Matrix::from_columns(&cols).expect("basis vectors share one length")
    }
}

/// Exponential map. On the sphere `cos|v| p + sin|v| v/|v|`; flat: `p + v`.
pub fn exp_map<T: Real>(p: &ManifoldPoint<T>, v: &TangentVector<T>) -> Result<ManifoldPoint<T>> {
    v.check_base(p)?;
    match p.kind {
        ManifoldKind::Euclidean(_) => {
            let coords = p
                .coords
                .iter()
                .zip(&v.comps)
                .map(|(&a, &b)| a + b)
                .collect();
            ManifoldPoint::new(p.kind, coords)
        }
        ManifoldKind::Sphere(_) => {
            let theta = v.norm();
            if theta <= T::c(SMALL_VECTOR) {
                return Ok(p.clone());
            }
            let (c, s) = (theta.cos(), theta.sinc());
            let coords = p
                .coords
                .iter()
                .zip(&v.comps)
                .map(|(&x, &w)| c * x + s * w)
                .collect();
            ManifoldPoint::new(p.kind, coords)
        }
    }
}

/// Riemannian distance. On the sphere this is `arccos<p, q>`, evaluated as
/// `2 asin(|p - q| / 2)` to keep full relative accuracy for nearby points.
pub fn distance<T: Real>(p: &ManifoldPoint<T>, q: &ManifoldPoint<T>) -> Result<T> {
    p.same_manifold(q)?;
    let chord = chord(p, q);
    Ok(match p.kind {
        ManifoldKind::Euclidean(_) => chord,
        ManifoldKind::Sphere(_) => T::c(2.0) * (chord / T::c(2.0)).min(T::one()).asin(),
    })
}

fn chord<T: Real>(p: &ManifoldPoint<T>, q: &ManifoldPoint<T>) -> T {
    p.coords
        .iter()
        .zip(&q.coords)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
        .sqrt()
}

fn check_not_antipodal<T: Real>(theta: T) -> Result<()> {
    let limit = T::PI() - T::c(ANTIPODAL_MARGIN);
    if theta > limit {
        return Err(Error::NearAntipodal {
            distance: theta.as_f64(),
            margin: ANTIPODAL_MARGIN,
        });
    }
    Ok(())
}

/// Logarithm map: the initial velocity of the minimal geodesic from `p` to
/// `q`, with norm `d(p, q)`.
pub fn log_map<T: Real>(p: &ManifoldPoint<T>, q: &ManifoldPoint<T>) -> Result<TangentVector<T>> {
    p.same_manifold(q)?;
    let diff: Vec<T> = q
        .coords
        .iter()
        .zip(&p.coords)
        .map(|(&b, &a)| b - a)
        .collect();
    match p.kind {
        ManifoldKind::Euclidean(_) => Ok(TangentVector {
            base: p.clone(),
            comps: diff,
        }),
        ManifoldKind::Sphere(_) => {
            let c = norm(&diff);
            let theta = T::c(2.0) * (c / T::c(2.0)).min(T::one()).asin();
            check_not_antipodal(theta)?;
            // q - <p,q> p, using <p,q> = 1 - c^2/2 for unit p, q
            let half_c2 = c * c / T::c(2.0);
            let w: Vec<T> = diff
                .iter()
                .zip(&p.coords)
                .map(|(&d, &x)| d + half_c2 * x)
                .collect();
            let wn = norm(&w);
            if wn == T::zero() {
                return Ok(p.zero_tangent());
            }
            let s = theta / wn;
            TangentVector::new(p.clone(), w.into_iter().map(|x| x * s).collect())
        }
    }
}

/// Parallel transport of `v ∈ T_p M` to `T_q M` along the minimal geodesic.
///
/// Sphere closed form, with `u = log_p q` and `θ = |u|`:
/// `v - <u, v> [ (1 - cos θ)/θ² u + (sin θ / θ) p ]`.
pub fn parallel_transport<T: Real>(
    p: &ManifoldPoint<T>,
    q: &ManifoldPoint<T>,
    v: &TangentVector<T>,
) -> Result<TangentVector<T>> {
    v.check_base(p)?;
    match p.kind {
        ManifoldKind::Euclidean(_) => {
            p.same_manifold(q)?;
            Ok(TangentVector {
                base: q.clone(),
                comps: v.comps.clone(),
            })
        }
        ManifoldKind::Sphere(_) => {
            let u = log_map(p, q)?;
            let theta = u.norm();
            let uv = dot(&u.comps, &v.comps);
            let (a, b) = (theta.versinc(), theta.sinc());
            let comps = v
                .comps
                .iter()
                .zip(u.comps.iter().zip(&p.coords))
                .map(|(&vi, (&ui, &pi))| vi - uv * (a * ui + b * pi))
                .collect();
            TangentVector::new(q.clone(), comps)
        }
    }
}

/// Deterministic orthonormal basis of `T_p M`.
///
/// Sphere: Gram-Schmidt (two passes) over the standard basis vectors in index
/// order, skipping the one most aligned with `p` (lowest index on ties); each
/// vector's sign makes its first nonzero component positive.
/// Euclidean: the standard basis.
pub fn tangent_basis<T: Real>(p: &ManifoldPoint<T>) -> TangentBasis<T> {
    let m = p.coords.len();
    let unit = |i: usize| {
        let mut e = vec![T::zero(); m];
        e[i] = T::one();
        e
    };
    let vectors = match p.kind {
        ManifoldKind::Euclidean(_) => (0..m).map(unit).collect::<Vec<_>>(),
        ManifoldKind::Sphere(_) => {
            let skip = (0..m).fold(0, |best, i| {
                if p.coords[i].abs() > p.coords[best].abs() {
                    i
                } else {
                    best
                }
            });
            let mut out: Vec<Vec<T>> = Vec::with_capacity(m - 1);
            for i in (0..m).filter(|&i| i != skip) {
                let mut v = unit(i);
                for _ in 0..2 {
                    let a = dot(&p.coords, &v);
                    v.iter_mut()
                        .zip(&p.coords)
                        .for_each(|(x, &c)| *x = *x - a * c);
                    for e in &out {
                        let a = dot(e, &v);
                        v.iter_mut().zip(e).for_each(|(x, &c)| *x = *x - a * c);
                    }
                }
                let n = norm(&v);
                let sign = v
                    .iter()
                    .find(|x| **x != T::zero())
                    .map_or(T::one(), |x| x.signum());
                v.iter_mut().for_each(|x| *x = *x * sign / n);
                out.push(v);
            }
            out
        }
    };
    TangentBasis {
        base: p.clone(),
        vectors: vectors
            .into_iter()
            .map(|comps| TangentVector {
                base: p.clone(),
                comps,
            })
            .collect(),
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
