//! Spectral Galerkin oracle on the sine basis w_k(x) = sqrt(2) sin(k pi x).
//!
//! Projecting the homogeneous-boundary problem yields the ODE system
//!   d' + K(t) d = f(t),   K[k][l] = a^{lk} + b^{lk} + g^{lk},
//! with a^{lk} = <a w_l', w_k'>, b^{lk} = <b w_l', w_k>, g^{lk} = <q w_l, w_k>,
//! integrated by implicit Euler with dense solves. Inhomogeneous boundaries
//! must be lifted first.

use crate::fdsolver::SolutionTrajectory;
use crate::grid::{trapezoid_weights, Grid2};
use crate::linalg::{dense_solve, LinalgError};
use crate::problem::RegularizedInstance;
use crate::scalar::Real;
use std::io::Write;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GalerkinError {
    #[error("quadrature under-resolved: m*h = {mh} > 1/4 (m={m}, nx={nx})")]
    QuadratureUnderResolved { m: usize, nx: usize, mh: f64 },
    #[error("boundary data not homogeneous (max |g| = {0}); lift the problem first")]
    InhomogeneousBoundary(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub struct GalerkinSystem<T: Real> {
    pub m: usize,
    pub nx: usize,
    pub nt: usize,
    pub tau: T,
    /// basis[k] holds w_{k+1} sampled on the spatial grid.
    pub basis: Vec<Vec<T>>,
    pub basis_dx: Vec<Vec<T>>,
    weights: Vec<T>,
    a: Grid2<T>,
    b: Grid2<T>,
    q: Grid2<T>,
    f: Grid2<T>,
    /// initial coefficients d_k(0) = <u0, w_k>
    pub d0: Vec<T>,
    time_constant: bool,
}

pub fn assemble<T: Real>(
    instance: &RegularizedInstance<T>,
    m: usize,
) -> Result<GalerkinSystem<T>, GalerkinError> {
    let g_max = instance
        .g0
        .iter()
        .chain(&instance.g1)
        .fold(T::zero(), |acc, &v| acc.max(v.abs()));
    if g_max > T::from_f64_c(1e-12) {
        return Err(GalerkinError::InhomogeneousBoundary(g_max.to_f64_c()));
    }
    let mh = instance.h.to_f64_c() * m as f64;
    if mh > 0.25 {
        return Err(GalerkinError::QuadratureUnderResolved {
            m,
            nx: instance.nx,
            mh,
        });
    }
    let nx = instance.nx;
    let sqrt2 = T::from_f64_c(std::f64::consts::SQRT_2);
    let pi = T::from_f64_c(std::f64::consts::PI);
    let mut basis = Vec::with_capacity(m);
    let mut basis_dx = Vec::with_capacity(m);
    for k in 1..=m {
        let kpi = pi * T::from_usize_c(k);
        let w: Vec<T> = instance.xs.iter().map(|&x| sqrt2 * (kpi * x).sin()).collect();
        let wp: Vec<T> = instance
            .xs
            .iter()
            .map(|&x| sqrt2 * kpi * (kpi * x).cos())
            .collect();
        basis.push(w);
        basis_dx.push(wp);
    }
    let weights = trapezoid_weights(nx, instance.h);
    let d0: Vec<T> = (0..m)
        .map(|k| inner(&instance.u0, &basis[k], &weights))
        .collect();
    let time_constant = instance.a.is_time_constant()
        && instance.b.is_time_constant()
        && instance.q.is_time_constant();
    Ok(GalerkinSystem {
        m,
        nx,
        nt: instance.nt,
        tau: instance.tau,
        basis,
        basis_dx,
        weights,
        a: instance.a.clone(),
        b: instance.b.clone(),
        q: instance.q.clone(),
        f: instance.f.clone(),
        d0,
        time_constant,
    })
}

fn inner<T: Real>(u: &[T], v: &[T], w: &[T]) -> T {
    u.iter().zip(v).zip(w).map(|((&a, &b), &c)| a * b * c).sum()
}

fn weighted_inner<T: Real>(c: &[T], u: &[T], v: &[T], w: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..u.len() {
        s += w[i] * c[i] * u[i] * v[i];
    }
    s
}

impl<T: Real> GalerkinSystem<T> {
    /// Stiffness entries a^{lk} = <a(t_n) w_l', w_k'> as an m x m row-major
    /// matrix indexed [l][k].
    pub fn a_matrix(&self, n: usize) -> Vec<T> {
        self.pairing(self.a.row(n), &self.basis_dx, &self.basis_dx)
    }

    /// Drift entries b^{lk} = <b(t_n) w_l', w_k>.
    pub fn b_matrix(&self, n: usize) -> Vec<T> {
        self.pairing(self.b.row(n), &self.basis_dx, &self.basis)
    }

    /// Potential entries g^{lk} = <q w_l, w_k>.
    pub fn g_matrix(&self, n: usize) -> Vec<T> {
        self.pairing(self.q.row(n), &self.basis, &self.basis)
    }

    fn pairing(&self, c: &[T], left: &[Vec<T>], right: &[Vec<T>]) -> Vec<T> {
        let m = self.m;
        let mut out = vec![T::zero(); m * m];
        for l in 0..m {
            for k in 0..m {
                out[l * m + k] = weighted_inner(c, &left[l], &right[k], &self.weights);
            }
        }
        out
    }

    /// ODE matrix K at time node n: K[k][l] = a^{lk} + b^{lk} + g^{lk}.
    pub fn ode_matrix(&self, n: usize) -> Vec<T> {
        let m = self.m;
        let a = self.a_matrix(n);
        let b = self.b_matrix(n);
        let g = self.g_matrix(n);
        let mut k_mat = vec![T::zero(); m * m];
        for l in 0..m {
            for k in 0..m {
                k_mat[k * m + l] = a[l * m + k] + b[l * m + k] + g[l * m + k];
            }
        }
        k_mat
    }

    /// Load vector f^k(t_n) = <f(t_n), w_k>.
    pub fn load(&self, n: usize) -> Vec<T> {
        (0..self.m)
            .map(|k| inner(self.f.row(n), &self.basis[k], &self.weights))
            .collect()
    }
}

/// Coefficient trajectory from implicit Euler: rows are time nodes.
pub fn integrate<T: Real>(system: &GalerkinSystem<T>) -> Result<Vec<Vec<T>>, GalerkinError> {
    let m = system.m;
    let nt = system.nt;
    let tau = system.tau;
    let mut d = Vec::with_capacity(nt + 1);
    d.push(system.d0.clone());
    let cached = if system.time_constant {
        Some(lhs_matrix(system, 0))
    } else {
        None
    };
    for n in 0..nt {
        let lhs = match &cached {
            Some(c) => c.clone(),
            None => lhs_matrix(system, n + 1),
        };
        let f = system.load(n + 1);
        let mut rhs = d[n].clone();
        for k in 0..m {
            rhs[k] += tau * f[k];
        }
        d.push(dense_solve(&lhs, &rhs, m)?);
    }
    Ok(d)
}

fn lhs_matrix<T: Real>(system: &GalerkinSystem<T>, n: usize) -> Vec<T> {
    let m = system.m;
    let tau = system.tau;
    let mut lhs = system.ode_matrix(n);
    for v in lhs.iter_mut() {
        *v *= tau;
    }
    for k in 0..m {
        lhs[k * m + k] += T::one();
    }
    lhs
}

/// Sample u_m(t,x) = sum_k d_k(t) w_k(x) on a uniform spatial grid.
pub fn reconstruct<T: Real>(
    d: &[Vec<T>],
    xs: &[T],
    tau: T,
    t_horizon: T,
) -> SolutionTrajectory<T> {
    let start = Instant::now();
    let nt = d.len() - 1;
    let nx = xs.len() - 1;
    let m = d[0].len();
    let sqrt2 = T::from_f64_c(std::f64::consts::SQRT_2);
    let pi = T::from_f64_c(std::f64::consts::PI);
    let basis: Vec<Vec<T>> = (1..=m)
        .map(|k| {
            let kpi = pi * T::from_usize_c(k);
            xs.iter().map(|&x| sqrt2 * (kpi * x).sin()).collect()
        })
        .collect();
    let mut values = Grid2::zeros(nt, nx);
    let mut max_v = T::neg_infinity();
    let mut min_v = T::infinity();
    for n in 0..=nt {
        let row = values.row_mut(n);
        for k in 0..m {
            let dk = d[n][k];
            for (i, v) in row.iter_mut().enumerate() {
                *v += dk * basis[k][i];
            }
        }
        for &v in row.iter() {
            max_v = max_v.max(v);
            min_v = min_v.min(v);
        }
    }
    SolutionTrajectory {
        nx,
        nt,
        h: xs[1] - xs[0],
        tau,
        t_horizon,
        theta: T::one(),
        values,
        max_value: max_v,
        min_value: min_v,
        wall_seconds: start.elapsed().as_secs_f64(),
        cell_peclet: T::zero(),
        peclet_warning: false,
    }
}

/// CSV export of the coefficient trajectory, header `t,k,d_k`.
pub fn write_coeff_csv<T: Real, W: Write>(
    d: &[Vec<T>],
    tau: T,
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "t,k,d_k")?;
    for (n, row) in d.iter().enumerate() {
        let t = tau * T::from_usize_c(n);
        for (k, &v) in row.iter().enumerate() {
            writeln!(out, "{},{},{}", t.to_f64_c(), k + 1, v.to_f64_c())?;
        }
    }
    Ok(())
}
