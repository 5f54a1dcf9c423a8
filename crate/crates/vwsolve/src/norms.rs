//! Discrete energy norms and a priori estimate checks.
//!
//! Space integrals use composite trapezoid, time sup-norms take the max over
//! nodes, spatial derivatives are centered, time derivatives forward on
//! slabs. The negative norm realizes ||v||_{H^-1} = ||w'||_{L^2} with
//! -w'' = v under Dirichlet conditions. Estimate ratios are recorded with
//! the multiplicative constant set to one; they are meaningful as
//! finiteness, scaling and stability properties, not as absolute bounds.

use crate::fdsolver::SolutionTrajectory;
use crate::grid::{l2, trapezoid_weights};
use crate::linalg::Tridiag;
use crate::problem::{diff1, RegularizedInstance};
use crate::scalar::Real;
use std::io::Write;

#[derive(Clone, Copy, Debug)]
pub struct EnergyReport<T> {
    pub linf_l2: T,
    pub l2_l2: T,
    /// ||du/dx||_{L2 L2}
    pub l2_h1: T,
    /// max_t ||du/dx(t)||_{L2}
    pub linf_h1: T,
    /// ||sqrt(q) u||_{L2 L2} with q clipped at zero
    pub weighted: T,
    pub dtu_l2: T,
    pub dtu_hneg: T,
    /// ||d/dx(a du/dx)||_{L2 L2}
    pub flux_div: T,
    /// ||d2u/dx2||_{L2 L2}
    pub dxx: T,
    /// magnitude clipped from q before the square root
    pub q_clip: T,
    pub rhs_bound: T,
    pub ratio: T,
}

impl<T: Real> EnergyReport<T> {
    /// The solution-net moderateness quantity: ||dt u|| + ||dxx u||.
    pub fn very_weak_quantity(&self) -> T {
        self.dtu_l2 + self.dxx
    }

    pub fn csv_header() -> &'static str {
        "linf_l2,l2_l2,l2_h1,linf_h1,weighted,dtu_l2,dtu_hneg,flux_div,dxx,q_clip,rhs_bound,ratio"
    }

    pub fn write_csv_row<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.linf_l2.to_f64_c(),
            self.l2_l2.to_f64_c(),
            self.l2_h1.to_f64_c(),
            self.linf_h1.to_f64_c(),
            self.weighted.to_f64_c(),
            self.dtu_l2.to_f64_c(),
            self.dtu_hneg.to_f64_c(),
            self.flux_div.to_f64_c(),
            self.dxx.to_f64_c(),
            self.q_clip.to_f64_c(),
            self.rhs_bound.to_f64_c(),
            self.ratio.to_f64_c(),
        )
    }
}

/// Discrete H^-1 norm of an interior field: solve -w'' = v with zero
/// boundary, return the L2 norm of w'.
pub fn hneg_norm<T: Real>(v: &[T], h: T) -> T {
    let n = v.len();
    if n == 0 {
        return T::zero();
    }
    let h2 = h * h;
    let two = T::from_f64_c(2.0);
    let mut lap = Tridiag::zeros(n);
    for i in 0..n {
        lap.diag[i] = two / h2;
        if i > 0 {
            lap.lower[i] = -T::one() / h2;
        }
        if i + 1 < n {
            lap.upper[i] = -T::one() / h2;
        }
    }
    let w = lap.solve(v).expect("discrete Laplacian is nonsingular");
    // forward differences of [0, w, 0]
    let mut s = T::zero();
    let mut prev = T::zero();
    for &wi in &w {
        let d = (wi - prev) / h;
        s += d * d;
        prev = wi;
    }
    let d = (T::zero() - prev) / h;
    s += d * d;
    (s * h).sqrt()
}

pub(crate) fn centered_dx<T: Real>(row: &[T], h: T) -> Vec<T> {
    let n = row.len();
    let two_h = h + h;
    (1..n - 1).map(|i| (row[i + 1] - row[i - 1]) / two_h).collect()
}

pub(crate) fn second_dx<T: Real>(row: &[T], h: T) -> Vec<T> {
    let n = row.len();
    let h2 = h * h;
    let two = T::from_f64_c(2.0);
    (1..n - 1)
        .map(|i| (row[i + 1] - two * row[i] + row[i - 1]) / h2)
        .collect()
}

fn flux_divergence<T: Real>(u: &[T], a: &[T], h: T) -> Vec<T> {
    let n = u.len();
    let half = T::from_f64_c(0.5);
    let h2 = h * h;
    (1..n - 1)
        .map(|i| {
            let a_w = half * (a[i - 1] + a[i]);
            let a_e = half * (a[i] + a[i + 1]);
            (a_e * (u[i + 1] - u[i]) - a_w * (u[i] - u[i - 1])) / h2
        })
        .collect()
}

pub(crate) fn sq_sum<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum()
}

/// Sup norms of the instance data entering the estimate right-hand sides.
#[derive(Clone, Copy, Debug)]
pub struct DataNorms<T> {
    pub u0_l2: T,
    pub u0_h10: T,
    pub f_l2l2: T,
    pub g0_h1: T,
    pub g1_h1: T,
    pub a_sup: T,
    pub b_sup: T,
    pub q_sup: T,
    pub dxb_sup: T,
    pub dxa_sup: T,
    pub dta_sup: T,
}

pub fn data_norms<T: Real>(instance: &RegularizedInstance<T>) -> DataNorms<T> {
    let h = instance.h;
    let tau = instance.tau;
    let u0_l2 = l2(&instance.u0, h);
    let u0_h10 = {
        let d = diff1(&instance.u0, h);
        l2(&d, h)
    };
    let f_l2l2 = {
        let mut s = T::zero();
        for row in instance.f.rows() {
            let r = l2(row, h);
            s += r * r;
        }
        (s * tau).sqrt()
    };
    let h1t = |g: &[T]| {
        let gd = diff1(g, tau);
        (l2(g, tau).powi(2) + l2(&gd, tau).powi(2)).sqrt()
    };
    let mut dxb_sup = T::zero();
    let mut dxa_sup = T::zero();
    for n in 0..=instance.nt {
        for d in diff1(instance.b.row(n), h) {
            dxb_sup = dxb_sup.max(d.abs());
        }
        for d in diff1(instance.a.row(n), h) {
            dxa_sup = dxa_sup.max(d.abs());
        }
    }
    let mut dta_sup = T::zero();
    for n in 0..instance.nt {
        let r0 = instance.a.row(n);
        let r1 = instance.a.row(n + 1);
        for i in 0..r0.len() {
            dta_sup = dta_sup.max(((r1[i] - r0[i]) / tau).abs());
        }
    }
    DataNorms {
        u0_l2,
        u0_h10,
        f_l2l2,
        g0_h1: h1t(&instance.g0),
        g1_h1: h1t(&instance.g1),
        a_sup: instance.a.max_abs(),
        b_sup: instance.b.max_abs(),
        q_sup: instance.q.max_abs(),
        dxb_sup,
        dxa_sup,
        dta_sup,
    }
}

/// All discrete norms plus the homogeneous energy-estimate ratio.
pub fn energy_norms<T: Real>(
    traj: &SolutionTrajectory<T>,
    instance: &RegularizedInstance<T>,
) -> EnergyReport<T> {
    let h = traj.h;
    let tau = traj.tau;
    let u = &traj.values;
    let nt = traj.nt;

    let mut linf_l2 = T::zero();
    let mut l2_l2_sq = T::zero();
    let mut l2_h1_sq = T::zero();
    let mut linf_h1 = T::zero();
    let mut weighted_sq = T::zero();
    let mut flux_sq = T::zero();
    let mut dxx_sq = T::zero();
    let mut q_clip = T::zero();
    let wts = trapezoid_weights(traj.nx, h);

    for n in 0..=nt {
        let row = u.row(n);
        let r = l2(row, h);
        linf_l2 = linf_l2.max(r);
        l2_l2_sq += r * r;
        let dx = centered_dx(row, h);
        let h1 = (sq_sum(&dx) * h).sqrt();
        linf_h1 = linf_h1.max(h1);
        l2_h1_sq += h1 * h1;
        dxx_sq += sq_sum(&second_dx(row, h)) * h;
        flux_sq += sq_sum(&flux_divergence(row, instance.a.row(n), h)) * h;
        let qrow = instance.q.row(n);
        let mut wsq = T::zero();
        for i in 0..row.len() {
            let qv = qrow[i];
            if qv < T::zero() {
                q_clip = q_clip.max(-qv);
            }
            let qc = qv.max(T::zero());
            wsq += wts[i] * qc * row[i] * row[i];
        }
        weighted_sq += wsq;
    }

    let mut dtu_sq = T::zero();
    let mut hneg_sq = T::zero();
    for n in 0..nt {
        let r0 = u.row(n);
        let r1 = u.row(n + 1);
        let dt: Vec<T> = r0
            .iter()
            .zip(r1)
            .map(|(&a, &b)| (b - a) / tau)
            .collect();
        let r = l2(&dt, h);
        dtu_sq += r * r;
        let hn = hneg_norm(&dt[1..dt.len() - 1], h);
        hneg_sq += hn * hn;
    }

    let dn = data_norms(instance);
    let alpha = instance.alpha;
    let report = EnergyReport {
        linf_l2,
        l2_l2: (l2_l2_sq * tau).sqrt(),
        l2_h1: (l2_h1_sq * tau).sqrt(),
        linf_h1,
        weighted: (weighted_sq * tau).sqrt(),
        dtu_l2: (dtu_sq * tau).sqrt(),
        dtu_hneg: (hneg_sq * tau).sqrt(),
        flux_div: (flux_sq * tau).sqrt(),
        dxx: (dxx_sq * tau).sqrt(),
        q_clip,
        rhs_bound: T::zero(),
        ratio: T::zero(),
    };
    let rhs = rhs_bound(&dn, alpha, instance.t_horizon, Estimate::Energy);
    let lhs = report.linf_l2
        + alpha.sqrt() * report.l2_h1
        + report.weighted
        + report.dtu_hneg;
    EnergyReport {
        rhs_bound: rhs,
        ratio: if rhs > T::zero() { lhs / rhs } else { T::zero() },
        ..report
    }
}

/// Which a priori estimate to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimate {
    /// homogeneous energy estimate
    Energy,
    /// time and second space derivative bounds, homogeneous data
    Derivatives,
    /// energy estimate with boundary data
    EnergyBoundary,
    /// derivative bounds with boundary data
    DerivativesBoundary,
}

fn rhs_bound<T: Real>(dn: &DataNorms<T>, alpha: T, t_horizon: T, which: Estimate) -> T {
    let one = T::one();
    let growth = (t_horizon * dn.dxb_sup).exp();
    let sqrt_alpha = alpha.sqrt();
    match which {
        Estimate::Energy => {
            growth
                * (one + dn.a_sup / sqrt_alpha + dn.b_sup + dn.q_sup.sqrt())
                * (dn.u0_l2 + dn.f_l2l2)
        }
        Estimate::EnergyBoundary => {
            growth
                * (one + dn.a_sup.sqrt() + dn.q_sup.sqrt())
                * (dn.u0_l2 + dn.f_l2l2 + dn.g0_h1 + dn.g1_h1)
        }
        Estimate::Derivatives | Estimate::DerivativesBoundary => {
            let bracket1 = dn.a_sup.sqrt()
                + dn.q_sup
                + (dn.dta_sup.sqrt() + dn.dxa_sup + dn.b_sup) / sqrt_alpha;
            let bracket2 = one + (dn.a_sup + dn.b_sup) / sqrt_alpha + dn.q_sup.sqrt();
            let data = match which {
                Estimate::Derivatives => dn.u0_h10 + dn.f_l2l2,
                _ => dn.u0_h10 + dn.f_l2l2 + dn.g0_h1 + dn.g1_h1,
            };
            growth / alpha * bracket1 * bracket2 * data
        }
    }
}

/// lhs/rhs for the selected estimate with the constant set to one.
pub fn check_estimate<T: Real>(
    report: &EnergyReport<T>,
    instance: &RegularizedInstance<T>,
    which: Estimate,
) -> T {
    let dn = data_norms(instance);
    let alpha = instance.alpha;
    let two = T::from_f64_c(2.0);
    let lhs = match which {
        Estimate::Energy => {
            report.linf_l2
                + alpha.sqrt() * report.l2_h1
                + report.weighted
                + report.dtu_hneg
        }
        Estimate::EnergyBoundary => {
            report.linf_l2 + alpha.sqrt() * report.l2_h1 + report.weighted
        }
        Estimate::Derivatives => {
            report.dtu_l2
                + (two * alpha).sqrt() * report.linf_h1
                + report.flux_div
                + report.dxx
        }
        Estimate::DerivativesBoundary => report.dtu_l2 + report.flux_div + report.dxx,
    };
    let rhs = rhs_bound(&dn, alpha, instance.t_horizon, which);
    if rhs > T::zero() {
        lhs / rhs
    } else {
        T::zero()
    }
}
