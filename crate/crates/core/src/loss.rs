//! The [`ProperLoss`] handle: a 1-homogeneous concave Bayes risk paired with
//! a 0-homogeneous loss map selected from its superdifferential.

use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::numeric;
use crate::vector::{LossVector, PosVector};

/// Backing implementation of a proper loss.
///
/// Both maps take raw slices on the closed nonnegative cone. `bayes_risk`
/// must return `-inf` for points with a negative entry; `loss` may assume the
/// point is nonzero and nonnegative.
pub trait LossModel: Send + Sync {
    fn dim(&self) -> usize;

    /// Resolved spec text; reparses to an equivalent loss.
    fn name(&self) -> String;

    fn bayes_risk(&self, p: &[f64]) -> f64;

    fn loss(&self, p: &[f64]) -> Vec<f64>;

    /// Closed-form antipolar, when one is known.
    fn antipolar_hint(&self) -> Option<ProperLoss> {
        None
    }

    /// Whether the superdifferential is a singleton on the open cone.
    fn strictly_proper(&self) -> bool {
        true
    }

    /// Whether values come out of an optimizer or finite differences.
    fn numeric(&self) -> bool {
        false
    }
}

/// Cheaply clonable handle to a proper loss.
#[derive(Clone)]
pub struct ProperLoss {
    model: Arc<dyn LossModel>,
}

impl fmt::Debug for ProperLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProperLoss")
            .field("name", &self.name())
            .field("dim", &self.dim())
            .finish()
    }
}

impl ProperLoss {
    pub fn from_model<M: LossModel + 'static>(model: M) -> Self {
        Self {
            model: Arc::new(model),
        }
    }

    /// A loss from plain closures. No properness is assumed or checked.
    pub fn from_fns<R, L>(name: impl Into<String>, dim: usize, risk: R, loss: L) -> Self
    where
        R: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        L: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::from_model(FnLoss {
            name: name.into(),
            dim,
            risk: Box::new(risk),
            loss: Box::new(loss),
        })
    }

    /// A loss defined only by its Bayes risk; the loss map is the numeric
    /// supergradient.
    pub fn from_risk<R>(name: impl Into<String>, dim: usize, risk: R) -> Self
    where
        R: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::from_model(RiskOnly {
            name: name.into(),
            dim,
            risk: Box::new(risk),
        })
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn name(&self) -> String {
        self.model.name()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.model.strictly_proper()
    }

    pub fn is_numeric(&self) -> bool {
        self.model.numeric()
    }

    pub fn antipolar_hint(&self) -> Option<ProperLoss> {
        self.model.antipolar_hint()
    }

    pub fn bayes_risk(&self, p: &PosVector) -> Result<f64> {
        self.check_dim(p.dim())?;
        Ok(self.model.bayes_risk(p.as_slice()))
    }

    pub fn loss(&self, p: &PosVector) -> Result<LossVector> {
        self.check_dim(p.dim())?;
        if p.is_zero() {
            return Err(GeomError::ZeroVector);
        }
        Ok(LossVector::from_raw(self.model.loss(p.as_slice())))
    }

    /// Bayes risk on a raw slice, skipping validation.
    pub fn risk_raw(&self, p: &[f64]) -> f64 {
        self.model.bayes_risk(p)
    }

    /// Loss map on a raw slice, skipping validation.
    pub fn loss_raw(&self, p: &[f64]) -> Vec<f64> {
        self.model.loss(p)
    }

    /// Expected loss `L(p, q) = ⟨l(q), p⟩`.
    pub fn conditional_risk(&self, p: &PosVector, q: &PosVector) -> Result<f64> {
        let lq = self.loss(q)?;
        crate::vector::inner(p, &lq)
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }
}

/// Something that evaluates a Bayes risk on the nonnegative cone.
pub trait BayesRisk: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, p: &[f64]) -> f64;
}

impl BayesRisk for ProperLoss {
    fn dim(&self) -> usize {
        ProperLoss::dim(self)
    }

    fn eval(&self, p: &[f64]) -> f64 {
        self.risk_raw(p)
    }
}

/// Adapter turning a closure into a [`BayesRisk`].
pub struct FnRisk<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnRisk<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> BayesRisk for FnRisk<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, p: &[f64]) -> f64 {
        (self.f)(p)
    }
}

type RiskFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type LossFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

struct FnLoss {
    name: String,
    dim: usize,
    risk: RiskFn,
    loss: LossFn,
}

impl LossModel for FnLoss {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        (self.risk)(p)
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        (self.loss)(p)
    }
}

struct RiskOnly {
    name: String,
    dim: usize,
    risk: RiskFn,
}

impl LossModel for RiskOnly {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        (self.risk)(p)
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        let risk = FnRisk::new(self.dim, |x: &[f64]| (self.risk)(x));
        numeric::supergradient_raw(&risk, p).unwrap_or_else(|_| vec![f64::NAN; self.dim])
    }

    fn numeric(&self) -> bool {
        true
    }
}
