//! Nonsmooth vector fields and their Clarke generalized covariant derivatives.
//!
//! Fields on the sphere are built from an ambient map `Y: R^{n+1} -> R^{n+1}`
//! by tangential projection, `X(p) = (I - p p^T) Y(p)`. A Clarke element of
//! `X` at `p` is then `(I - p p^T) Ṽ - (p^T Y(p)) I` for `Ṽ ∈ ∂Y(p)`, which
//! we store compressed to the `n x n` block `B^T Ṽ B - (p^T Y(p)) I` in the
//! deterministic basis `B` of [`tangent_basis`].
//!
//! Only one element of `∂X(p)` is produced per call; a [`SelectionRule`]
//! decides which one at kinks. Kinks are detected exactly, up to a snap
//! tolerance of [`KINK_SNAP`].

use crate::geometry::{
    parallel_transport, tangent_basis, ManifoldKind, ManifoldPoint, TangentBasis, TangentVector,
};
use crate::linalg::{Matrix, Svd};
use crate::scalar::{dot, Real};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Coordinates (or max-branch gaps) at most this far from zero count as kinks.
pub const KINK_SNAP: f64 = 1e-14;

/// Which element of a set-valued generalized derivative to return at a kink.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum SelectionRule {
    /// Center of each kink interval (e.g. 0 for `|·|` at 0).
    #[default]
    Midpoint,
    LowerEndpoint,
    UpperEndpoint,
    /// A vertex drawn from a generator seeded by this value and the point.
    RandomVertex(u64),
}

impl SelectionRule {
    /// Position in `[-1, 1]` within the kink interval at `slot`.
    pub fn kink_parameter<T: Real>(&self, x: &[T], slot: usize) -> T {
        match *self {
            SelectionRule::Midpoint => T::zero(),
            SelectionRule::LowerEndpoint => -T::one(),
            SelectionRule::UpperEndpoint => T::one(),
            SelectionRule::RandomVertex(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(point_hash(seed, x, slot));
                if rng.random::<bool>() {
                    T::one()
                } else {
                    -T::one()
                }
            }
        }
    }

    /// The three deterministic rules.
    pub fn deterministic() -> [SelectionRule; 3] {
        [
            SelectionRule::Midpoint,
            SelectionRule::LowerEndpoint,
            SelectionRule::UpperEndpoint,
        ]
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionRule::Midpoint => f.write_str("midpoint"),
            SelectionRule::LowerEndpoint => f.write_str("lower"),
            SelectionRule::UpperEndpoint => f.write_str("upper"),
            SelectionRule::RandomVertex(s) => write!(f, "random:{s}"),
        }
    }
}

impl std::str::FromStr for SelectionRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "midpoint" => Ok(SelectionRule::Midpoint),
            "lower" => Ok(SelectionRule::LowerEndpoint),
            "upper" => Ok(SelectionRule::UpperEndpoint),
            other => other
                .strip_prefix("random:")
                .and_then(|seed| seed.trim().parse().ok())
                .map(SelectionRule::RandomVertex)
                .ok_or_else(|| format!("unknown selection rule {other:?}")),
        }
    }
}

// splitmix64 over the seed, the coordinate bit patterns and the slot.
fn point_hash<T: Real>(seed: u64, x: &[T], slot: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut h = mix(seed);
    for v in x {
        h = mix(h ^ v.as_f64().to_bits());
    }
    mix(h ^ slot as u64)
}

/// A linear map on one tangent space, stored as its matrix in
/// `tangent_basis(base)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentMap<T> {
    basis: TangentBasis<T>,
    matrix: Matrix<T>,
}

impl<T: Real> TangentMap<T> {
    pub fn new(base: &ManifoldPoint<T>, matrix: Matrix<T>) -> Result<Self> {
        let n = base.kind().dim();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.rows().max(matrix.cols()),
            });
        }
        Ok(TangentMap {
            basis: tangent_basis(base),
            matrix,
        })
    }

    /// Compresses an ambient operator to the tangent block `B^T A B`.
    pub fn from_ambient(base: &ManifoldPoint<T>, ambient: &Matrix<T>) -> Result<Self> {
        let m = base.kind().ambient_dim();
        if ambient.rows() != m || ambient.cols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: ambient.rows().max(ambient.cols()),
            });
        }
        let basis = tangent_basis(base);
        let matrix = match base.kind() {
            ManifoldKind::Euclidean(_) => ambient.clone(),
            ManifoldKind::Sphere(_) => {
                let b = basis.matrix();
                b.transpose().matmul(ambient).matmul(&b)
            }
        };
        Ok(TangentMap { basis, matrix })
    }

    pub fn base(&self) -> &ManifoldPoint<T> {
        self.basis.base()
    }

    pub fn basis(&self) -> &TangentBasis<T> {
        &self.basis
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn apply(&self, v: &TangentVector<T>) -> Result<TangentVector<T>> {
        let c = self.basis.coords_of(v)?;
        self.basis.vector_from(&self.matrix.mul_vec(&c))
    }

    pub fn svd(&self) -> Svd<T> {
        self.matrix.svd()
    }

    /// Operator norm (largest singular value).
    pub fn norm(&self) -> T {
        self.matrix.operator_norm()
    }

    /// `‖V^{-1}‖ = 1 / σ_min`; infinite when singular.
    pub fn inverse_norm(&self) -> T {
        let s = self.svd().smallest();
        if s > T::zero() {
            T::one() / s
        } else {
            T::infinity()
        }
    }

    /// Solves `V s = rhs`, failing when `σ_min < threshold`.
    pub fn solve(&self, rhs: &TangentVector<T>, threshold: T) -> Result<TangentVector<T>> {
        let c = self.basis.coords_of(rhs)?;
        let x = self.svd().solve(&c, threshold)?;
        self.basis.vector_from(&x)
    }

    /// `V - W` for maps on the same tangent space.
    pub fn sub(&self, other: &TangentMap<T>) -> Result<TangentMap<T>> {
        self.check_same_base(other)?;
        Ok(TangentMap {
            basis: self.basis.clone(),
            matrix: self.matrix.sub(&other.matrix),
        })
    }

    pub fn check_same_base(&self, other: &TangentMap<T>) -> Result<()> {
        if self.base() != other.base() {
            return Err(Error::Contract(
                "tangent maps act on different tangent spaces".into(),
            ));
        }
        Ok(())
    }

    /// Conjugation by parallel transport, `P_{pq} V P_{qp}`, as a map on
    /// `T_q M`.
    pub fn transport_to(&self, q: &ManifoldPoint<T>) -> Result<TangentMap<T>> {
        let p = self.base();
        let target = tangent_basis(q);
        let n = target.dim();
        let mut m = Matrix::zeros(n, n);
        for (j, e) in target.vectors().iter().enumerate() {
            let back = parallel_transport(q, p, e)?;
            let image = parallel_transport(p, q, &self.apply(&back)?)?;
            for (i, c) in target.coords_of(&image)?.into_iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        Ok(TangentMap {
            basis: target,
            matrix: m,
        })
    }
}

/// Ambient map `Y` from which a vector field is built, together with its
/// Clarke generalized Jacobian selection.
pub trait AmbientMap<T: Real>: Send + Sync {
    /// Dimension of the domain and codomain.
    fn dim(&self) -> usize;
    fn eval(&self, x: &[T]) -> Vec<T>;
    fn clarke_element(&self, x: &[T], rule: SelectionRule) -> Matrix<T>;
    /// Lower bound on the distance from `x` to the set where `Y` is not
    /// differentiable (infinite for smooth maps).
    fn kink_distance(&self, _x: &[T]) -> T {
        T::infinity()
    }
}

/// `Y(x) = A x - |x| - b` with the absolute value taken componentwise.
#[derive(Clone, Debug)]
pub struct AbsMap<T> {
    a: Matrix<T>,
    b: Vec<T>,
}

/// Builds `Y(x) = A x - |x| - b`.
pub fn abs_field_builder<T: Real>(a: Matrix<T>, b: Vec<T>) -> Result<AbsMap<T>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    Ok(AbsMap { a, b })
}

impl<T: Real> AmbientMap<T> for AbsMap<T> {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        let ax = self.a.mul_vec(x);
        ax.iter()
            .zip(x)
            .zip(&self.b)
            .map(|((&a, &xi), &bi)| a - xi.abs() - bi)
            .collect()
    }

    /// `A - D`, `D = diag(sign x_i)` with the kink entries chosen by `rule`.
    fn clarke_element(&self, x: &[T], rule: SelectionRule) -> Matrix<T> {
        let snap = T::c(KINK_SNAP);
        let mut m = self.a.clone();
        for (i, &xi) in x.iter().enumerate() {
            let d = if xi.abs() <= snap {
                rule.kink_parameter(x, i)
            } else {
                xi.signum()
            };
            m[(i, i)] = m[(i, i)] - d;
        }
        m
    }

    fn kink_distance(&self, x: &[T]) -> T {
        x.iter().fold(T::infinity(), |acc, v| acc.min(v.abs()))
    }
}

/// `Y_i(x) = max(c_i^T x, d_i^T x) - e_i`.
#[derive(Clone, Debug)]
pub struct MaxMap<T> {
    c: Matrix<T>,
    d: Matrix<T>,
    e: Vec<T>,
}

impl<T: Real> MaxMap<T> {
    pub fn new(c: Matrix<T>, d: Matrix<T>, e: Vec<T>) -> Result<Self> {
        if !c.is_square() || c.rows() != d.rows() || c.cols() != d.cols() || c.rows() != e.len() {
            return Err(Error::DimensionMismatch {
                expected: c.rows(),
                found: e.len(),
            });
        }
        Ok(MaxMap { c, d, e })
    }

    /// Chooses `e` so that `Y(root) = 0` exactly.
    pub fn planted(c: Matrix<T>, d: Matrix<T>, root: &[T]) -> Result<Self> {
        let e = Self::branches(&c, &d, root);
        Self::new(c, d, e)
    }

    fn branches(c: &Matrix<T>, d: &Matrix<T>, x: &[T]) -> Vec<T> {
        c.mul_vec(x)
            .into_iter()
            .zip(d.mul_vec(x))
            .map(|(a, b)| a.max(b))
            .collect()
    }
}

impl<T: Real> AmbientMap<T> for MaxMap<T> {
    fn dim(&self) -> usize {
        self.e.len()
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        Self::branches(&self.c, &self.d, x)
            .into_iter()
            .zip(&self.e)
            .map(|(m, &e)| m - e)
            .collect()
    }

    /// Row `i` is `c_i` or `d_i` for the active branch; on ties it is the
    /// convex combination `(1-t)/2 c_i + (1+t)/2 d_i` with `t` from `rule`.
    fn clarke_element(&self, x: &[T], rule: SelectionRule) -> Matrix<T> {
        let snap = T::c(KINK_SNAP);
        let (cx, dx) = (self.c.mul_vec(x), self.d.mul_vec(x));
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        let half = T::c(0.5);
        for i in 0..n {
            let (wc, wd) = if (cx[i] - dx[i]).abs() <= snap {
                let t = rule.kink_parameter(x, i);
                ((T::one() - t) * half, (T::one() + t) * half)
            } else if cx[i] > dx[i] {
                (T::one(), T::zero())
            } else {
                (T::zero(), T::one())
            };
            for j in 0..n {
                m[(i, j)] = wc * self.c[(i, j)] + wd * self.d[(i, j)];
            }
        }
        m
    }

    fn kink_distance(&self, x: &[T]) -> T {
        let (cx, dx) = (self.c.mul_vec(x), self.d.mul_vec(x));
        (0..self.dim()).fold(T::infinity(), |acc, i| {
            let g: Vec<T> = self
                .c
                .row(i)
                .iter()
                .zip(self.d.row(i))
                .map(|(&a, &b)| a - b)
                .collect();
            let gn = crate::scalar::norm(&g);
            if gn == T::zero() {
                acc
            } else {
                acc.min((cx[i] - dx[i]).abs() / gn)
            }
        })
    }
}

/// Smooth `Y(x) = A x - b`.
#[derive(Clone, Debug)]
pub struct AffineMap<T> {
    a: Matrix<T>,
    b: Vec<T>,
}

impl<T: Real> AffineMap<T> {
    pub fn new(a: Matrix<T>, b: Vec<T>) -> Result<Self> {
        if !a.is_square() || a.rows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: b.len(),
            });
        }
        Ok(AffineMap { a, b })
    }

    pub fn linear(a: Matrix<T>) -> Result<Self> {
        let n = a.rows();
        Self::new(a, vec![T::zero(); n])
    }
}

impl<T: Real> AmbientMap<T> for AffineMap<T> {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        self.a
            .mul_vec(x)
            .into_iter()
            .zip(&self.b)
            .map(|(a, &b)| a - b)
            .collect()
    }

    fn clarke_element(&self, _x: &[T], _rule: SelectionRule) -> Matrix<T> {
        self.a.clone()
    }
}

/// A (possibly nonsmooth) vector field with selectable Clarke elements.
pub trait VectorField<T: Real>: Send + Sync {
    fn manifold(&self) -> ManifoldKind;
    /// `X(p)`; `X(p).base() == p`.
    fn eval(&self, p: &ManifoldPoint<T>) -> Result<TangentVector<T>>;
    /// One element of `∂X(p)`, chosen by `rule` at kinks.
    fn clarke_element(&self, p: &ManifoldPoint<T>, rule: SelectionRule) -> Result<TangentMap<T>>;
    fn exact_solution(&self) -> Option<ManifoldPoint<T>> {
        None
    }
    /// Ambient distance to the nondifferentiability locus (infinite if smooth).
    fn kink_distance(&self, _p: &ManifoldPoint<T>) -> T {
        T::infinity()
    }
}

fn check_on<T: Real>(kind: ManifoldKind, p: &ManifoldPoint<T>) -> Result<()> {
    if p.kind() != kind {
        return Err(Error::Contract(format!(
            "field lives on {kind}, point on {}",
            p.kind()
        )));
    }
    Ok(())
}

/// `X(p) = (I - p p^T) Y(p)` on `S^n`.
#[derive(Clone, Debug)]
pub struct ProjectedField<M> {
    kind: ManifoldKind,
    map: M,
    solution: Option<Vec<f64>>,
}

/// Projects the ambient map onto the tangent spaces of `S^{dim-1}`.
pub fn projected_field<T: Real, M: AmbientMap<T>>(map: M) -> Result<ProjectedField<M>> {
    if map.dim() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: map.dim(),
        });
    }
    Ok(ProjectedField {
        kind: ManifoldKind::Sphere(map.dim() - 1),
        map,
        solution: None,
    })
}

impl<M> ProjectedField<M> {
    pub fn with_solution(mut self, solution: Vec<f64>) -> Self {
        self.solution = Some(solution);
        self
    }

    pub fn map(&self) -> &M {
        &self.map
    }
}

impl<T: Real, M: AmbientMap<T>> VectorField<T> for ProjectedField<M> {
    fn manifold(&self) -> ManifoldKind {
        self.kind
    }

    fn eval(&self, p: &ManifoldPoint<T>) -> Result<TangentVector<T>> {
        check_on(self.kind, p)?;
        p.project(&self.map.eval(p.coords()))
    }

    fn clarke_element(&self, p: &ManifoldPoint<T>, rule: SelectionRule) -> Result<TangentMap<T>> {
        check_on(self.kind, p)?;
        let y = self.map.eval(p.coords());
        let py = dot(p.coords(), &y);
        let ambient = self.map.clarke_element(p.coords(), rule);
        let mut v = TangentMap::from_ambient(p, &ambient)?;
        let n = self.kind.dim();
        v.matrix = v.matrix.sub(&Matrix::identity(n).scale(py));
        Ok(v)
    }

    fn exact_solution(&self) -> Option<ManifoldPoint<T>> {
        self.solution
            .as_ref()
            .and_then(|s| ManifoldPoint::from_f64(self.kind, s).ok())
    }

    fn kink_distance(&self, p: &ManifoldPoint<T>) -> T {
        self.map.kink_distance(p.coords())
    }
}

/// `X = Y` on flat `R^n`.
#[derive(Clone, Debug)]
pub struct FlatField<M> {
    kind: ManifoldKind,
    map: M,
    solution: Option<Vec<f64>>,
}

pub fn flat_field<T: Real, M: AmbientMap<T>>(map: M) -> FlatField<M> {
    FlatField {
        kind: ManifoldKind::Euclidean(map.dim()),
        map,
        solution: None,
    }
}

impl<M> FlatField<M> {
    pub fn with_solution(mut self, solution: Vec<f64>) -> Self {
        self.solution = Some(solution);
        self
    }

    pub fn map(&self) -> &M {
        &self.map
    }
}

impl<T: Real, M: AmbientMap<T>> VectorField<T> for FlatField<M> {
    fn manifold(&self) -> ManifoldKind {
        self.kind
    }

    fn eval(&self, p: &ManifoldPoint<T>) -> Result<TangentVector<T>> {
        check_on(self.kind, p)?;
        p.tangent(self.map.eval(p.coords()))
    }

    fn clarke_element(&self, p: &ManifoldPoint<T>, rule: SelectionRule) -> Result<TangentMap<T>> {
        check_on(self.kind, p)?;
        TangentMap::from_ambient(p, &self.map.clarke_element(p.coords(), rule))
    }

    fn exact_solution(&self) -> Option<ManifoldPoint<T>> {
        self.solution
            .as_ref()
            .and_then(|s| ManifoldPoint::from_f64(self.kind, s).ok())
    }

    fn kink_distance(&self, p: &ManifoldPoint<T>) -> T {
        self.map.kink_distance(p.coords())
    }
}

/// `A = diag(4, 3)`, `b = (0, 2)`: `Y(x) = A x - |x| - b`, zero at `(0, 1)`.
pub fn example51_map<T: Real>() -> AbsMap<T> {
    abs_field_builder(
        Matrix::diag(&[T::c(4.0), T::c(3.0)]),
        vec![T::zero(), T::c(2.0)],
    )
    .expect("consistent dimensions")
}

/// The projected absolute-value field on the circle `S^1`, singular at `(0, 1)`
/// with tangent Clarke multipliers filling `[3, 5]` there.
pub fn example51<T: Real>() -> ProjectedField<AbsMap<T>> {
    projected_field(example51_map())
        .expect("two-dimensional ambient map")
        .with_solution(vec![0.0, 1.0])
}

pub struct BatteryEntry<T> {
    pub id: &'static str,
    pub field: Box<dyn VectorField<T>>,
    pub solution: ManifoldPoint<T>,
    /// Expected semismoothness order of the field at its solution.
    pub expected_mu: f64,
    /// How the instance and its solution were constructed.
    pub planting: &'static str,
}

impl<T: Real> BatteryEntry<T> {
    pub fn manifold(&self) -> ManifoldKind {
        self.field.manifold()
    }
}

/// Identifiers of [`test_battery`], in its order.
pub const BATTERY_IDS: [&str; 5] = [
    "example51",
    "smooth-proj",
    "maxcomp-s2",
    "abs-flat",
    "linear-flat",
];

fn s2_root<T: Real>() -> ManifoldPoint<T> {
    ManifoldPoint::normalized(
        ManifoldKind::Sphere(2),
        vec![T::one(), T::c(2.0), T::c(2.0)],
    )
    .expect("nonzero")
}

fn from_point<T: Real>(p: &ManifoldPoint<T>) -> Vec<f64> {
    p.coords().iter().map(|x| x.as_f64()).collect()
}

/// Looks up one battery instance by identifier.
pub fn battery_entry<T: Real>(id: &str) -> Option<BatteryEntry<T>> {
    let entry = match id {
        "example51" => BatteryEntry {
            id: "example51",
            field: Box::new(example51::<T>()),
            solution: ManifoldPoint::from_f64(ManifoldKind::Sphere(1), &[0.0, 1.0]).ok()?,
            expected_mu: 1.0,
            planting: "Y(p) = diag(4,3) p - |p| - (0,2) projected onto S^1; Y(0,1) = 0",
        },
        "smooth-proj" => {
            let root = s2_root::<T>();
            let a =
                Matrix::from_f64_rows(&[&[3.0, 1.0, -0.5], &[0.5, 2.0, 1.0], &[-1.0, 0.5, 4.0]])
                    .ok()?;
            let ap = a.mul_vec(root.coords());
            let b = ap
                .iter()
                .zip(root.coords())
                .map(|(&y, &p)| y - T::c(0.5) * p)
                .collect();
            BatteryEntry {
                id: "smooth-proj",
                field: Box::new(
                    projected_field(AffineMap::new(a, b).ok()?)
                        .ok()?
                        .with_solution(from_point(&root)),
                ),
                solution: root,
                expected_mu: 1.0,
                planting: "Y(p) = A p - b on S^2 with b = A p* - p*/2, so Y(p*) is parallel to p* at p* = (1,2,2)/3",
            }
        }
        "maxcomp-s2" => {
            let root = s2_root::<T>();
            let c =
                Matrix::from_f64_rows(&[&[2.0, 0.5, -1.0], &[1.0, 3.0, 0.0], &[0.0, -1.0, 2.5]])
                    .ok()?;
            let d =
                Matrix::from_f64_rows(&[&[1.0, 1.0, -1.0], &[-1.0, 0.0, 0.5], &[1.0, -2.0, 0.0]])
                    .ok()?;
            BatteryEntry {
                id: "maxcomp-s2",
                field: Box::new(
                    projected_field(MaxMap::planted(c, d, root.coords()).ok()?)
                        .ok()?
                        .with_solution(from_point(&root)),
                ),
                solution: root,
                expected_mu: 1.0,
                planting: "Y_i(p) = max(c_i.p, d_i.p) - e_i on S^2 with e_i = max(c_i.p*, d_i.p*) at p* = (1,2,2)/3; row 1 branches tie at p*",
            }
        }
        "abs-flat" => BatteryEntry {
            id: "abs-flat",
            field: Box::new(flat_field(example51_map::<T>()).with_solution(vec![0.0, 1.0])),
            solution: ManifoldPoint::from_f64(ManifoldKind::Euclidean(2), &[0.0, 1.0]).ok()?,
            expected_mu: 1.0,
            planting:
                "Y(x) = diag(4,3) x - |x| - (0,2) on R^2; orthant x >= 0 gives 3 x1 = 0, 2 x2 = 2",
        },
        "linear-flat" => BatteryEntry {
            id: "linear-flat",
            field: Box::new(
                flat_field(AffineMap::linear(Matrix::diag(&[T::c(2.0), T::c(4.0)])).ok()?)
                    .with_solution(vec![0.0, 0.0]),
            ),
            solution: ManifoldPoint::from_f64(ManifoldKind::Euclidean(2), &[0.0, 0.0]).ok()?,
            expected_mu: 1.0,
            planting: "Y(x) = diag(2,4) x on R^2; root at the origin",
        },
        _ => return None,
    };
    Some(entry)
}

/// All battery instances, in [`BATTERY_IDS`] order.
pub fn test_battery<T: Real>() -> Vec<BatteryEntry<T>> {
    BATTERY_IDS
        .iter()
        .map(|id| battery_entry(id).expect("battery ids resolve"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p51() -> ManifoldPoint<f64> {
        ManifoldPoint::from_f64(ManifoldKind::Sphere(1), &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn example51_vanishes_at_solution() {
        let x = example51::<f64>().eval(&p51()).unwrap();
        assert_eq!(x.comps(), &[0.0, 0.0]);
        assert_eq!(example51_map::<f64>().eval(&[0.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn example51_ambient_midpoint_element() {
        let v = example51_map::<f64>().clarke_element(&[0.0, 1.0], SelectionRule::Midpoint);
        assert_eq!(v, Matrix::diag(&[4.0, 2.0]));
    }

    #[test]
    fn example51_tangent_elements_span_interval() {
        let f = example51::<f64>();
        let get = |r| f.clarke_element(&p51(), r).unwrap().matrix()[(0, 0)];
        assert_eq!(get(SelectionRule::Midpoint), 4.0);
        assert_eq!(get(SelectionRule::LowerEndpoint), 5.0);
        assert_eq!(get(SelectionRule::UpperEndpoint), 3.0);
        let r = get(SelectionRule::RandomVertex(11));
        assert!(r == 3.0 || r == 5.0);
    }

    #[test]
    fn rules_coincide_at_differentiability_points() {
        let m = example51_map::<f64>();
        let x = [0.3, -0.7];
        let reference = m.clarke_element(&x, SelectionRule::Midpoint);
        for r in [
            SelectionRule::LowerEndpoint,
            SelectionRule::UpperEndpoint,
            SelectionRule::RandomVertex(3),
        ] {
            assert_eq!(m.clarke_element(&x, r), reference);
        }
    }

    #[test]
    fn random_vertex_is_reproducible() {
        let x = [0.0, 0.0, 0.5];
        for slot in 0..3 {
            let a: f64 = SelectionRule::RandomVertex(9).kink_parameter(&x, slot);
            let b: f64 = SelectionRule::RandomVertex(9).kink_parameter(&x, slot);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn selection_rules_parse() {
        for r in [
            SelectionRule::Midpoint,
            SelectionRule::LowerEndpoint,
            SelectionRule::UpperEndpoint,
            SelectionRule::RandomVertex(42),
        ] {
            assert_eq!(r.to_string().parse::<SelectionRule>().unwrap(), r);
        }
        assert!("random:x".parse::<SelectionRule>().is_err());
    }

    #[test]
    fn max_map_ties_average_rows() {
        let c = Matrix::from_f64_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let d = Matrix::from_f64_rows(&[&[0.0, 1.0], &[0.0, -1.0]]).unwrap();
        let m = MaxMap::planted(c, d, &[1.0, 1.0]).unwrap();
        assert_eq!(m.eval(&[1.0, 1.0]), vec![0.0, 0.0]);
        let v = m.clarke_element(&[1.0, 1.0], SelectionRule::Midpoint);
        assert_eq!(v.row(0), &[0.5, 0.5]);
        assert_eq!(v.row(1), &[0.0, 1.0]);
        assert_eq!(
            m.clarke_element(&[1.0, 1.0], SelectionRule::LowerEndpoint)
                .row(0),
            &[1.0, 0.0]
        );
    }

    #[test]
    fn battery_roots_are_planted() {
        let battery = test_battery::<f64>();
        assert_eq!(battery.len(), BATTERY_IDS.len());
        for e in &battery {
            let x = e.field.eval(&e.solution).unwrap();
            assert!(x.norm() <= 1e-14, "{} residual {}", e.id, x.norm());
            assert_eq!(e.field.exact_solution().as_ref(), Some(&e.solution));
        }
        assert!(battery_entry::<f64>("nope").is_none());
    }

    #[test]
    fn projected_field_rejects_wrong_manifold() {
        let p = ManifoldPoint::from_f64(ManifoldKind::Euclidean(2), &[0.0, 1.0]).unwrap();
        assert!(example51::<f64>().eval(&p).is_err());
        let tiny = AffineMap::linear(Matrix::<f64>::identity(1)).unwrap();
        assert!(projected_field(tiny).is_err());
    }
}
