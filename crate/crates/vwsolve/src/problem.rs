//! Problem specification, validation, boundary lifting, and assembly of the
//! epsilon-regularized instance.

use crate::dist::{mollify, DistExpr, MollifierNet};
use crate::grid::{linspace, Grid2};
use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(
        "ellipticity violated at eps={epsilon}: min a_eps = {min_a} < alpha = {alpha}"
    )]
    EllipticityViolated {
        epsilon: f64,
        min_a: f64,
        alpha: f64,
    },
    #[error(
        "grid too coarse for eps={epsilon}: need h <= eps/4 and tau <= eps/4, got h={h}, tau={tau}"
    )]
    ResolutionInsufficient {
        epsilon: f64,
        h: f64,
        tau: f64,
    },
    #[error("non-finite samples in field {field}")]
    NonFinite { field: &'static str },
}

/// Coefficient or source over (t,x); separable by construction.
#[derive(Clone, Debug)]
pub enum SpaceTimeExpr<T: Real> {
    SpaceOnly(DistExpr<T>),
    TimeOnly(DistExpr<T>),
    Product { t: DistExpr<T>, x: DistExpr<T> },
}

impl<T: Real> SpaceTimeExpr<T> {
    pub fn constant(k: T) -> Self {
        SpaceTimeExpr::SpaceOnly(DistExpr::Constant(k))
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn is_singular(&self) -> bool {
        match self {
            SpaceTimeExpr::SpaceOnly(e) | SpaceTimeExpr::TimeOnly(e) => e.is_singular(),
            SpaceTimeExpr::Product { t, x } => t.is_singular() || x.is_singular(),
        }
    }
}

/// Which parts of an expression go through the convolution.
///
/// `SingularOnly` samples constants and smooth closures directly and only
/// regularizes delta and step terms; `All` convolves every term, which is
/// what the net-comparison and consistency experiments need.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MollifyPolicy {
    SingularOnly,
    All,
}

/// The data septuple with horizon and ellipticity floor.
#[derive(Clone, Debug)]
pub struct ProblemSpec<T: Real> {
    pub a: SpaceTimeExpr<T>,
    pub b: SpaceTimeExpr<T>,
    pub q: DistExpr<T>,
    pub f: SpaceTimeExpr<T>,
    pub u0: DistExpr<T>,
    pub g0: DistExpr<T>,
    pub g1: DistExpr<T>,
    pub t_horizon: T,
    pub alpha: T,
}

impl<T: Real> ProblemSpec<T> {
    /// Homogeneous template: a=b=q=1, f=0, g0=g1=0, T=1, alpha=1.
    pub fn unit(u0: DistExpr<T>) -> Self {
        let one = T::one();
        ProblemSpec {
            a: SpaceTimeExpr::constant(one),
            b: SpaceTimeExpr::constant(one),
            q: DistExpr::Constant(one),
            f: SpaceTimeExpr::zero(),
            u0,
            g0: DistExpr::zero(),
            g1: DistExpr::zero(),
            t_horizon: one,
            alpha: one,
        }
    }
}

/// Grid-sampled smooth fields for one epsilon.
#[derive(Clone, Debug)]
pub struct RegularizedInstance<T: Real> {
    pub epsilon: T,
    pub nx: usize,
    pub nt: usize,
    pub h: T,
    pub tau: T,
    pub t_horizon: T,
    pub alpha: T,
    pub xs: Vec<T>,
    pub ts: Vec<T>,
    pub a: Grid2<T>,
    pub b: Grid2<T>,
    pub q: Grid2<T>,
    pub f: Grid2<T>,
    pub u0: Vec<T>,
    pub g0: Vec<T>,
    pub g1: Vec<T>,
}

/// Affine boundary lifting psi(t,x) = (1-x) g0(t) + x g1(t).
#[derive(Clone, Debug)]
pub struct Lifting<T: Real> {
    pub psi: Grid2<T>,
    /// g1(t) - g0(t); independent of x.
    pub dpsi_dx: Vec<T>,
    pub g0_dot: Vec<T>,
    pub g1_dot: Vec<T>,
}

impl<T: Real> Lifting<T> {
    /// u = w + psi.
    pub fn add_to(&self, w: &Grid2<T>) -> Grid2<T> {
        let mut u = w.clone();
        for n in 0..=u.nt {
            let psi = self.psi.row(n).to_vec();
            let row = u.row_mut(n);
            for (v, p) in row.iter_mut().zip(psi) {
                *v += p;
            }
        }
        u
    }
}

#[derive(Clone, Debug)]
pub struct EpsCheck<T: Real> {
    pub epsilon: T,
    pub min_a: T,
    pub resolution_ok: bool,
}

#[derive(Clone, Debug)]
pub struct ValidationReport<T: Real> {
    pub checks: Vec<EpsCheck<T>>,
    pub all_finite: bool,
}

fn sample_expr<T: Real>(
    expr: &DistExpr<T>,
    net: &MollifierNet<T>,
    eps: T,
    grid: &[T],
    domain: (T, T),
    policy: MollifyPolicy,
) -> Vec<T> {
    match policy {
        MollifyPolicy::All => mollify(expr, net, eps, grid, domain).values,
        MollifyPolicy::SingularOnly => match expr {
            DistExpr::Constant(_) | DistExpr::Smooth { .. } => {
                grid.iter().map(|&x| expr.eval_regular(x)).collect()
            }
            DistExpr::Delta { .. } | DistExpr::Heaviside { .. } => {
                mollify(expr, net, eps, grid, domain).values
            }
            DistExpr::Sum(terms) => {
                let mut acc = vec![T::zero(); grid.len()];
                for t in terms {
                    let part = sample_expr(t, net, eps, grid, domain, policy);
                    for (a, p) in acc.iter_mut().zip(part) {
                        *a += p;
                    }
                }
                acc
            }
        },
    }
}

fn sample_space_time<T: Real>(
    expr: &SpaceTimeExpr<T>,
    net: &MollifierNet<T>,
    eps: T,
    xs: &[T],
    ts: &[T],
    t_horizon: T,
    policy: MollifyPolicy,
) -> Grid2<T> {
    let nt = ts.len() - 1;
    let xdom = (T::zero(), T::one());
    let tdom = (T::zero(), t_horizon);
    match expr {
        SpaceTimeExpr::SpaceOnly(e) => {
            let prof = sample_expr(e, net, eps, xs, xdom, policy);
            Grid2::from_profile(nt, &prof)
        }
        SpaceTimeExpr::TimeOnly(e) => {
            let tprof = sample_expr(e, net, eps, ts, tdom, policy);
            let mut g = Grid2::zeros(nt, xs.len() - 1);
            for (n, &v) in tprof.iter().enumerate() {
                for val in g.row_mut(n) {
                    *val = v;
                }
            }
            g
        }
        SpaceTimeExpr::Product { t, x } => {
            let tprof = sample_expr(t, net, eps, ts, tdom, policy);
            let xprof = sample_expr(x, net, eps, xs, xdom, policy);
            let mut g = Grid2::zeros(nt, xs.len() - 1);
            for (n, &tv) in tprof.iter().enumerate() {
                for (val, &xv) in g.row_mut(n).iter_mut().zip(&xprof) {
                    *val = tv * xv;
                }
            }
            g
        }
    }
}

/// Resolution rule: the grid must resolve the mollified scale, h <= eps/4
/// and tau <= eps/4.
pub fn resolution_ok<T: Real>(eps: T, t_horizon: T, nx: usize, nt: usize) -> bool {
    let h = T::one() / T::from_usize_c(nx);
    let tau = t_horizon / T::from_usize_c(nt);
    let quarter = eps / T::from_f64_c(4.0);
    let slack = T::from_f64_c(1.0 + 1e-12);
    h <= quarter * slack && tau <= quarter * slack
}

/// Check ellipticity, finiteness and grid adequacy for every epsilon on the
/// net's ladder with the given grid.
pub fn validate<T: Real>(
    spec: &ProblemSpec<T>,
    net: &MollifierNet<T>,
    nx: usize,
    nt: usize,
) -> Result<ValidationReport<T>, ProblemError> {
    let mut checks = Vec::new();
    let mut all_finite = true;
    for &eps in &net.epsilons {
        if !resolution_ok(eps, spec.t_horizon, nx, nt) {
            return Err(ProblemError::ResolutionInsufficient {
                epsilon: eps.to_f64_c(),
                h: (T::one() / T::from_usize_c(nx)).to_f64_c(),
                tau: (spec.t_horizon / T::from_usize_c(nt)).to_f64_c(),
            });
        }
    }
    // ellipticity and finiteness at the ends of the ladder
    for &eps in [net.eps_max(), net.eps_min()].iter() {
        let inst = build_fields(spec, net, eps, nx, nt, MollifyPolicy::SingularOnly)?;
        let min_a = inst.a.min();
        let tol = T::from_f64_c(1e-10) * T::one().max(spec.alpha.abs());
        if min_a < spec.alpha - tol {
            return Err(ProblemError::EllipticityViolated {
                epsilon: eps.to_f64_c(),
                min_a: min_a.to_f64_c(),
                alpha: spec.alpha.to_f64_c(),
            });
        }
        let finite = inst.a.all_finite()
            && inst.b.all_finite()
            && inst.q.all_finite()
            && inst.f.all_finite()
            && inst.u0.iter().all(|v| v.is_finite())
            && inst.g0.iter().all(|v| v.is_finite())
            && inst.g1.iter().all(|v| v.is_finite());
        all_finite &= finite;
        checks.push(EpsCheck {
            epsilon: eps,
            min_a,
            resolution_ok: true,
        });
    }
    if !all_finite {
        return Err(ProblemError::NonFinite { field: "sampled" });
    }
    Ok(ValidationReport { checks, all_finite })
}

/// Validate a single epsilon with its own grid.
pub fn validate_at<T: Real>(
    spec: &ProblemSpec<T>,
    net: &MollifierNet<T>,
    eps: T,
    nx: usize,
    nt: usize,
) -> Result<(), ProblemError> {
    if !resolution_ok(eps, spec.t_horizon, nx, nt) {
        return Err(ProblemError::ResolutionInsufficient {
            epsilon: eps.to_f64_c(),
            h: (T::one() / T::from_usize_c(nx)).to_f64_c(),
            tau: (spec.t_horizon / T::from_usize_c(nt)).to_f64_c(),
        });
    }
    let inst = build_fields(spec, net, eps, nx, nt, MollifyPolicy::SingularOnly)?;
    let min_a = inst.a.min();
    let tol = T::from_f64_c(1e-10) * T::one().max(spec.alpha.abs());
    if min_a < spec.alpha - tol {
        return Err(ProblemError::EllipticityViolated {
            epsilon: eps.to_f64_c(),
            min_a: min_a.to_f64_c(),
            alpha: spec.alpha.to_f64_c(),
        });
    }
    Ok(())
}

fn build_fields<T: Real>(
    spec: &ProblemSpec<T>,
    net: &MollifierNet<T>,
    eps: T,
    nx: usize,
    nt: usize,
    policy: MollifyPolicy,
) -> Result<RegularizedInstance<T>, ProblemError> {
    let xs = linspace(T::zero(), T::one(), nx);
    let ts = linspace(T::zero(), spec.t_horizon, nt);
    let xdom = (T::zero(), T::one());
    let tdom = (T::zero(), spec.t_horizon);
    let a = sample_space_time(&spec.a, net, eps, &xs, &ts, spec.t_horizon, policy);
    let b = sample_space_time(&spec.b, net, eps, &xs, &ts, spec.t_horizon, policy);
    let qprof = sample_expr(&spec.q, net, eps, &xs, xdom, policy);
    let q = Grid2::from_profile(nt, &qprof);
    let f = sample_space_time(&spec.f, net, eps, &xs, &ts, spec.t_horizon, policy);
    let u0 = sample_expr(&spec.u0, net, eps, &xs, xdom, policy);
    let g0 = sample_expr(&spec.g0, net, eps, &ts, tdom, policy);
    let g1 = sample_expr(&spec.g1, net, eps, &ts, tdom, policy);
    Ok(RegularizedInstance {
        epsilon: eps,
        nx,
        nt,
        h: T::one() / T::from_usize_c(nx),
        tau: spec.t_horizon / T::from_usize_c(nt),
        t_horizon: spec.t_horizon,
        alpha: spec.alpha,
        xs,
        ts,
        a,
        b,
        q,
        f,
        u0,
        g0,
        g1,
    })
}

/// Assemble the regularized instance for one epsilon. Distributional terms
/// are convolved with the kernel, smooth terms sampled directly.
pub fn build_instance<T: Real>(
    spec: &ProblemSpec<T>,
    net: &MollifierNet<T>,
    eps: T,
    nx: usize,
    nt: usize,
) -> Result<RegularizedInstance<T>, ProblemError> {
    build_instance_with(spec, net, eps, nx, nt, MollifyPolicy::SingularOnly)
}

pub fn build_instance_with<T: Real>(
    spec: &ProblemSpec<T>,
    net: &MollifierNet<T>,
    eps: T,
    nx: usize,
    nt: usize,
    policy: MollifyPolicy,
) -> Result<RegularizedInstance<T>, ProblemError> {
    validate_at(spec, net, eps, nx, nt)?;
    build_fields(spec, net, eps, nx, nt, policy)
}

/// Centered first differences, one-sided at the ends.
pub fn diff1<T: Real>(v: &[T], h: T) -> Vec<T> {
    let n = v.len();
    let two_h = h + h;
    let mut d = vec![T::zero(); n];
    if n < 2 {
        return d;
    }
    d[0] = (v[1] - v[0]) / h;
    d[n - 1] = (v[n - 1] - v[n - 2]) / h;
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / two_h;
    }
    d
}

/// Boundary lifting: returns the lifting, the modified source
/// f_tilde = f - (1-x) g0' - x g1' + (da/dx - b)(g1 - g0) - q psi,
/// and the shifted initial datum w0 = u0 - psi(0, .).
pub fn lift<T: Real>(
    instance: &RegularizedInstance<T>,
) -> (Lifting<T>, Grid2<T>, Vec<T>) {
    let nx = instance.nx;
    let nt = instance.nt;
    let one = T::one();
    let g0_dot = diff1(&instance.g0, instance.tau);
    let g1_dot = diff1(&instance.g1, instance.tau);
    let mut psi = Grid2::zeros(nt, nx);
    let mut f_tilde = Grid2::zeros(nt, nx);
    let mut dpsi_dx = vec![T::zero(); nt + 1];
    for n in 0..=nt {
        let g0 = instance.g0[n];
        let g1 = instance.g1[n];
        dpsi_dx[n] = g1 - g0;
        let da = diff1(instance.a.row(n), instance.h);
        for i in 0..=nx {
            let x = instance.xs[i];
            let p = (one - x) * g0 + x * g1;
            psi.set(n, i, p);
            let val = instance.f.at(n, i)
                - (one - x) * g0_dot[n]
                - x * g1_dot[n]
                + (da[i] - instance.b.at(n, i)) * (g1 - g0)
                - instance.q.at(n, i) * p;
            f_tilde.set(n, i, val);
        }
    }
    let w0: Vec<T> = instance
        .u0
        .iter()
        .zip(psi.row(0))
        .map(|(&u, &p)| u - p)
        .collect();
    (
        Lifting {
            psi,
            dpsi_dx,
            g0_dot,
            g1_dot,
        },
        f_tilde,
        w0,
    )
}

/// Homogeneous-boundary companion instance: same coefficients, source
/// f_tilde, initial datum w0, zero boundary. Solving it and adding psi back
/// reproduces the original boundary values exactly.
pub fn lifted_instance<T: Real>(
    instance: &RegularizedInstance<T>,
) -> (RegularizedInstance<T>, Lifting<T>) {
    let (lifting, f_tilde, w0) = lift(instance);
    let mut h = instance.clone();
    h.f = f_tilde;
    h.u0 = w0;
    h.g0 = vec![T::zero(); instance.nt + 1];
    h.g1 = vec![T::zero(); instance.nt + 1];
    (h, lifting)
}
