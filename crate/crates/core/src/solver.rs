//! Riemannian semismooth Newton iteration
//! `p_{k+1} = exp_{p_k}(-V_k^{-1} X(p_k))`, `V_k ∈ ∂X(p_k)`.
//!
//! The method is purely local: no damping, no line search.

use crate::fields::{SelectionRule, TangentMap, VectorField};
use crate::geometry::{exp_map, ManifoldPoint};
use crate::scalar::Real;
use crate::{Error, Result};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub max_iters: usize,
    /// Stop once `‖X(p_k)‖ <= tol_field`.
    pub tol_field: T,
    /// Stop once a step has norm `<= tol_step`.
    pub tol_step: T,
    pub selection: SelectionRule,
    /// Smallest admissible singular value of `V_k`.
    pub singular_threshold: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            max_iters: 50,
            tol_field: T::tol(1e-12, 16.0),
            tol_step: T::tol(1e-14, 4.0),
            selection: SelectionRule::Midpoint,
            singular_threshold: T::tol(1e-10, 64.0),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: T| x > T::zero() && x.is_finite();
        if self.max_iters < 1
            || !positive(self.tol_field)
            || !positive(self.tol_step)
            || !positive(self.singular_threshold)
        {
            return Err(Error::Contract(
                "solver tolerances must be positive and max_iters at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    FieldTolerance,
    StepTolerance,
    MaxIters,
    SingularElement,
}

impl Termination {
    pub fn converged(&self) -> bool {
        matches!(
            self,
            Termination::FieldTolerance | Termination::StepTolerance
        )
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::FieldTolerance => "field-tolerance",
            Termination::StepTolerance => "step-tolerance",
            Termination::MaxIters => "max-iters",
            Termination::SingularElement => "singular-element",
        })
    }
}

/// Full history of one run: `k + 1` iterates, `k` steps and elements.
#[derive(Clone, Debug)]
pub struct NewtonTrace<T> {
    pub iterates: Vec<ManifoldPoint<T>>,
    /// `‖X(iterates[i])‖`.
    pub field_norms: Vec<T>,
    /// Norm of the step leaving `iterates[i]`.
    pub step_norms: Vec<T>,
    pub clarke_elements: Vec<TangentMap<T>>,
    pub termination: Termination,
    /// Smallest singular value of the rejected element on `SingularElement`.
    pub singular_value: Option<T>,
}

impl<T: Real> NewtonTrace<T> {
    pub fn last(&self) -> &ManifoldPoint<T> {
        self.iterates
            .last()
            .expect("trace holds at least the start point")
    }

    pub fn steps(&self) -> usize {
        self.step_norms.len()
    }
}

#[derive(Clone, Debug)]
pub struct NewtonStep<T> {
    pub point: ManifoldPoint<T>,
    pub element: TangentMap<T>,
    pub step_norm: T,
}

/// One application of the Newton iteration mapping at `p`.
pub fn solve_step<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    p: &ManifoldPoint<T>,
    rule: SelectionRule,
    singular_threshold: T,
) -> Result<NewtonStep<T>> {
    let x = field.eval(p)?;
    let element = field.clarke_element(p, rule)?;
    if x.comps().iter().all(|c| *c == T::zero()) {
        return Ok(NewtonStep {
            point: p.clone(),
            element,
            step_norm: T::zero(),
        });
    }
    step_with(p, &x, element, singular_threshold)
}

fn step_with<T: Real>(
    p: &ManifoldPoint<T>,
    x: &crate::geometry::TangentVector<T>,
    element: TangentMap<T>,
    singular_threshold: T,
) -> Result<NewtonStep<T>> {
    let s = element.solve(&x.scale(-T::one()), singular_threshold)?;
    Ok(NewtonStep {
        point: exp_map(p, &s)?,
        step_norm: s.norm(),
        element,
    })
}

/// Runs the iteration from `p0`.
///
/// Checks at each iterate, in order: field tolerance, singular element, then
/// (after stepping) step tolerance and the iteration cap. Hitting a singular
/// element ends the run with [`Termination::SingularElement`]; errors are
/// reserved for contract violations.
pub fn newton_solve<T: Real, F: VectorField<T> + ?Sized>(
    field: &F,
    p0: &ManifoldPoint<T>,
    cfg: &SolverConfig<T>,
) -> Result<NewtonTrace<T>> {
    cfg.validate()?;
    if p0.kind() != field.manifold() {
        return Err(Error::Contract(format!(
            "start point on {}, field on {}",
            p0.kind(),
            field.manifold()
        )));
    }
    let mut trace = NewtonTrace {
        iterates: vec![p0.clone()],
        field_norms: Vec::new(),
        step_norms: Vec::new(),
        clarke_elements: Vec::new(),
        termination: Termination::MaxIters,
        singular_value: None,
    };
    let mut p = p0.clone();
    let mut small_step = false;
    loop {
        let x = field.eval(&p)?;
        let fnorm = x.norm();
        trace.field_norms.push(fnorm);
        if fnorm <= cfg.tol_field {
            trace.termination = Termination::FieldTolerance;
            break;
        }
        if small_step {
            trace.termination = Termination::StepTolerance;
            break;
        }
        if trace.steps() >= cfg.max_iters {
            trace.termination = Termination::MaxIters;
            break;
        }
        let element = field.clarke_element(&p, cfg.selection)?;
        let step = match step_with(&p, &x, element, cfg.singular_threshold) {
            Ok(step) => step,
            Err(Error::Singular { sigma_min }) => {
                trace.termination = Termination::SingularElement;
                trace.singular_value = Some(T::c(sigma_min));
                break;
            }
            Err(e) => return Err(e),
        };
        trace.step_norms.push(step.step_norm);
        trace.clarke_elements.push(step.element);
        trace.iterates.push(step.point.clone());
        p = step.point;
        small_step = step.step_norm <= cfg.tol_step;
    }
    Ok(trace)
}
