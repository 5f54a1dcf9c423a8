//! Theta-scheme finite-difference integrator for one regularized instance.
//!
//! The spatial operator L_h discretizes -d/dx(a du/dx) + b du/dx + q u in
//! conservative flux form with arithmetic-mean face coefficients and centered
//! drift. Time stepping solves
//!   (I + theta tau L_h(t_{n+1})) u^{n+1}
//!     = (I - (1-theta) tau L_h(t_n)) u^n + tau (theta f^{n+1} + (1-theta) f^n)
//! with Dirichlet rows pinned to the boundary nets.

use crate::grid::Grid2;
use crate::linalg::{LinalgError, Tridiag};
use crate::problem::RegularizedInstance;
use crate::scalar::Real;
use std::io::Write;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("theta {0} outside [0.5, 1]")]
    InvalidTheta(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct SchemeConfig<T> {
    pub theta: T,
}

impl<T: Real> Default for SchemeConfig<T> {
    fn default() -> Self {
        SchemeConfig { theta: T::one() }
    }
}

impl<T: Real> SchemeConfig<T> {
    pub fn implicit_euler() -> Self {
        Self::default()
    }

    pub fn crank_nicolson() -> Self {
        SchemeConfig {
            theta: T::from_f64_c(0.5),
        }
    }

    pub fn check(&self) -> Result<(), SolverError> {
        let t = self.theta.to_f64_c();
        if !(0.5..=1.0).contains(&t) {
            return Err(SolverError::InvalidTheta(t));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolutionTrajectory<T: Real> {
    pub nx: usize,
    pub nt: usize,
    pub h: T,
    pub tau: T,
    pub t_horizon: T,
    pub theta: T,
    pub values: Grid2<T>,
    pub max_value: T,
    pub min_value: T,
    pub wall_seconds: f64,
    /// max |b| h / (2 min a) over the instance.
    pub cell_peclet: T,
    pub peclet_warning: bool,
}

impl<T: Real> SolutionTrajectory<T> {
    pub fn profile(&self, n: usize) -> &[T] {
        self.values.row(n)
    }

    /// Spatial profile at the time node nearest to `t`.
    pub fn profile_at(&self, t: T) -> &[T] {
        let n = (t / self.tau).round().to_f64_c() as usize;
        self.values.row(n.min(self.nt))
    }

    /// CSV export, header `t,x,u`, row-major by time.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,x,u")?;
        for n in 0..=self.nt {
            let t = self.tau * T::from_usize_c(n);
            for (i, v) in self.values.row(n).iter().enumerate() {
                let x = self.h * T::from_usize_c(i);
                writeln!(out, "{},{},{}", t.to_f64_c(), x.to_f64_c(), v.to_f64_c())?;
            }
        }
        Ok(())
    }

    /// CSV snapshot of the profiles nearest to the requested times.
    pub fn write_snapshots_csv<W: Write>(&self, out: &mut W, times: &[T]) -> std::io::Result<()> {
        writeln!(out, "t,x,u")?;
        for &t in times {
            let n = ((t / self.tau).round().to_f64_c() as usize).min(self.nt);
            let tn = self.tau * T::from_usize_c(n);
            for (i, v) in self.values.row(n).iter().enumerate() {
                let x = self.h * T::from_usize_c(i);
                writeln!(out, "{},{},{}", tn.to_f64_c(), x.to_f64_c(), v.to_f64_c())?;
            }
        }
        Ok(())
    }
}

/// Tridiagonal L_h(t_n): conservative flux diffusion, centered drift,
/// reaction on the diagonal; identity rows at both boundary nodes.
pub fn discretize_operator<T: Real>(instance: &RegularizedInstance<T>, n: usize) -> Tridiag<T> {
    let nx = instance.nx;
    let h = instance.h;
    let h2 = h * h;
    let two_h = h + h;
    let half = T::from_f64_c(0.5);
    let a = instance.a.row(n);
    let b = instance.b.row(n);
    let q = instance.q.row(n);
    let mut op = Tridiag::zeros(nx + 1);
    op.diag[0] = T::one();
    op.diag[nx] = T::one();
    for i in 1..nx {
        let a_w = half * (a[i - 1] + a[i]);
        let a_e = half * (a[i] + a[i + 1]);
        op.lower[i] = -a_w / h2 - b[i] / two_h;
        op.diag[i] = (a_w + a_e) / h2 + q[i];
        op.upper[i] = -a_e / h2 + b[i] / two_h;
    }
    op
}

/// One theta step from time node `n` to `n+1`.
pub fn step<T: Real>(
    u_n: &[T],
    instance: &RegularizedInstance<T>,
    cfg: &SchemeConfig<T>,
    n: usize,
) -> Result<Vec<T>, SolverError> {
    cfg.check()?;
    let nx = instance.nx;
    let tau = instance.tau;
    let theta = cfg.theta;
    let expl = T::one() - theta;

    let mut rhs = u_n.to_vec();
    if expl != T::zero() {
        let l_n = discretize_operator(instance, n);
        let lu = l_n.apply(u_n);
        for i in 1..nx {
            rhs[i] -= expl * tau * lu[i];
        }
    }
    let f_n = instance.f.row(n);
    let f_n1 = instance.f.row(n + 1);
    for i in 1..nx {
        rhs[i] += tau * (theta * f_n1[i] + expl * f_n[i]);
    }
    rhs[0] = instance.g0[n + 1];
    rhs[nx] = instance.g1[n + 1];

    let l_n1 = discretize_operator(instance, n + 1);
    let mut lhs = Tridiag::zeros(nx + 1);
    lhs.diag[0] = T::one();
    lhs.diag[nx] = T::one();
    let c = theta * tau;
    for i in 1..nx {
        lhs.lower[i] = c * l_n1.lower[i];
        lhs.diag[i] = T::one() + c * l_n1.diag[i];
        lhs.upper[i] = c * l_n1.upper[i];
    }
    Ok(lhs.solve(&rhs)?)
}

fn cell_peclet<T: Real>(instance: &RegularizedInstance<T>) -> T {
    let b_max = instance.b.max_abs();
    let a_min = instance.a.min();
    let two = T::from_f64_c(2.0);
    b_max * instance.h / (two * a_min)
}

/// Integrate the full trajectory.
pub fn solve<T: Real>(
    instance: &RegularizedInstance<T>,
    cfg: &SchemeConfig<T>,
) -> Result<SolutionTrajectory<T>, SolverError> {
    cfg.check()?;
    let start = Instant::now();
    let nx = instance.nx;
    let nt = instance.nt;
    let mut values = Grid2::zeros(nt, nx);
    let mut row0 = instance.u0.clone();
    row0[0] = instance.g0[0];
    row0[nx] = instance.g1[0];
    values.row_mut(0).copy_from_slice(&row0);
    let mut current = row0;
    for n in 0..nt {
        current = step(&current, instance, cfg, n)?;
        values.row_mut(n + 1).copy_from_slice(&current);
    }
    let mut max_v = T::neg_infinity();
    let mut min_v = T::infinity();
    for r in values.rows() {
        for &v in r {
            max_v = max_v.max(v);
            min_v = min_v.min(v);
        }
    }
    let pe = cell_peclet(instance);
    Ok(SolutionTrajectory {
        nx,
        nt,
        h: instance.h,
        tau: instance.tau,
        t_horizon: instance.t_horizon,
        theta: cfg.theta,
        values,
        max_value: max_v,
        min_value: min_v,
        wall_seconds: start.elapsed().as_secs_f64(),
        cell_peclet: pe,
        peclet_warning: pe > T::one(),
    })
}
