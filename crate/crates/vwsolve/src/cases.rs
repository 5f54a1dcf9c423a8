//! Built-in model experiments on [0,1] with T = 1.
//!
//! All five share the initial profile u0(x) = exp(1/((x-0.5)^2 + 0.025)) and
//! unit coefficients; each of cases 2..5 replaces one piece of data with
//! 1 + delta (or a bare delta on the boundary):
//!   1: a = b = q = 1
//!   2: a = 1 + delta(x - 0.45)
//!   3: b = 1 + delta(t - 0.5)
//!   4: q = 1 + delta(x - 0.45)
//!   5: g1 = delta(t - 0.45)
//! The delta location can be overridden to run the figure variants.

use crate::dist::DistExpr;
use crate::problem::{ProblemSpec, SpaceTimeExpr};
use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("unknown case id {0}; valid ids are 1..=5")]
    UnknownCase(u32),
}

pub const SNAPSHOT_TIMES: [f64; 5] = [0.0, 0.125, 0.25, 0.5, 1.0];

/// Default singular locations per case id (0 for case 1).
pub fn default_location(id: u32) -> f64 {
    match id {
        3 => 0.5,
        2 | 4 | 5 => 0.45,
        _ => 0.0,
    }
}

/// The shared initial profile.
pub fn initial_profile<T: Real>(x: T) -> T {
    let half = T::from_f64_c(0.5);
    let c = T::from_f64_c(0.025);
    let d = x - half;
    (T::one() / (d * d + c)).exp()
}

pub fn initial_expr<T: Real>() -> DistExpr<T> {
    DistExpr::smooth(initial_profile, (T::from_f64_c(-1.0), T::from_f64_c(2.0)))
}

pub fn builtin_case<T: Real>(id: u32) -> Result<ProblemSpec<T>, CaseError> {
    builtin_case_at(id, None)
}

/// Case with an overridden singular location.
pub fn builtin_case_at<T: Real>(id: u32, location: Option<T>) -> Result<ProblemSpec<T>, CaseError> {
    if !(1..=5).contains(&id) {
        return Err(CaseError::UnknownCase(id));
    }
    let one = T::one();
    let loc = location.unwrap_or_else(|| T::from_f64_c(default_location(id)));
    let mut spec = ProblemSpec::unit(initial_expr());
    let one_plus_delta =
        || DistExpr::sum(vec![DistExpr::Constant(one), DistExpr::delta(loc, one)]);
    match id {
        1 => {}
        2 => spec.a = SpaceTimeExpr::SpaceOnly(one_plus_delta()),
        3 => spec.b = SpaceTimeExpr::TimeOnly(one_plus_delta()),
        4 => spec.q = one_plus_delta(),
        5 => spec.g1 = DistExpr::delta(loc, one),
        _ => unreachable!(),
    }
    Ok(spec)
}
