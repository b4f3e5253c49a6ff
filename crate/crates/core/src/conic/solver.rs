//! Mehrotra predictor-corrector on the homogeneous self-dual embedding with
//! Nesterov-Todd scaling.

use nalgebra::{DMatrix, DVector};

use super::cones::{identity, jordan_div, jordan_product, max_step, total_degree, Cone, Scaling};
use super::{ConicProblem, ConicSolution, Feasibility, Status, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub max_iter: usize,
    /// Stop as soon as the primal iterate is feasible to `tol`, ignoring the
    /// objective.
    pub stop_when_feasible: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: super::DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            stop_when_feasible: false,
        }
    }
}

const STATIC_REG: f64 = 1e-11;
const REFINE_STEPS: usize = 4;
const STEP_FRACTION: f64 = 0.99;
const POLISH: f64 = 1e-5;
const POLISH_STEPS: usize = 10;

#[derive(Clone)]
struct Iterate {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
}

struct Residuals {
    rx: DVector<f64>,
    ry: DVector<f64>,
    rz: DVector<f64>,
    rt: f64,
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    dz: DVector<f64>,
    ds: DVector<f64>,
    dtau: f64,
    dkappa: f64,
}

fn residuals(p: &ConicProblem, it: &Iterate) -> Residuals {
    Residuals {
        rx: p.a.tr_mul(&it.y) + p.g.tr_mul(&it.z) + &p.c * it.tau,
        ry: &p.b * it.tau - &p.a * &it.x,
        rz: &it.s + &p.g * &it.x - &p.h * it.tau,
        rt: it.kappa + p.c.dot(&it.x) + p.b.dot(&it.y) + p.h.dot(&it.z),
    }
}

/// Factored reduced KKT system `[0 Aᵀ Gᵀ; A 0 0; G 0 −W²]`.
struct Kkt {
    exact: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
    m: usize,
}

impl Kkt {
    fn new(p: &ConicProblem, w2: &DMatrix<f64>) -> Self {
        let (n, m, q) = (p.num_vars(), p.num_eq(), p.num_cone_rows());
        let dim = n + m + q;
        let mut k = DMatrix::zeros(dim, dim);
        k.view_mut((0, n), (n, m)).copy_from(&p.a.transpose());
        k.view_mut((0, n + m), (n, q)).copy_from(&p.g.transpose());
        k.view_mut((n, 0), (m, n)).copy_from(&p.a);
        k.view_mut((n + m, 0), (q, n)).copy_from(&p.g);
        k.view_mut((n + m, n + m), (q, q)).copy_from(&(-w2));
        let mut reg = k.clone();
        for i in 0..dim {
            reg[(i, i)] += if i < n { STATIC_REG } else { -STATIC_REG };
        }
        Self {
            exact: k,
            lu: reg.lu(),
            n,
            m,
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let mut sol = self.lu.solve(rhs)?;
        for _ in 0..REFINE_STEPS {
            let res = rhs - &self.exact * &sol;
            sol += self.lu.solve(&res)?;
        }
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let q = sol.len() - self.n - self.m;
        Some((
            sol.rows(0, self.n).into_owned(),
            sol.rows(self.n, self.m).into_owned(),
            sol.rows(self.n + self.m, q).into_owned(),
        ))
    }
}

fn stack(a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len() + c.len(), a.iter().chain(b.iter()).chain(c.iter()).cloned())
}

/// Newton direction for complementarity targets `ds_target` (cone) and
/// `dk_target` (τκ), reducing the linear residuals by the factor `1 − eta`.
#[allow(clippy::too_many_arguments)]
fn direction(
    p: &ConicProblem,
    it: &Iterate,
    r: &Residuals,
    w: &Scaling,
    kkt: &Kkt,
    tau_col: &(DVector<f64>, DVector<f64>, DVector<f64>),
    eta: f64,
    ds_target: &DVector<f64>,
    dk_target: f64,
) -> Option<Direction> {
    let q = jordan_div(&p.cones, &w.lambda, ds_target);
    let wq = w.w(&q);
    let rhs = stack(&(-eta * &r.rx), &(eta * &r.ry), &(-eta * &r.rz - &wq));
    let (dx1, dy1, dz1) = kkt.solve(&rhs)?;
    let (dx2, dy2, dz2) = tau_col;

    let l1 = p.c.dot(&dx1) + p.b.dot(&dy1) + p.h.dot(&dz1);
    let l2 = p.c.dot(dx2) + p.b.dot(dy2) + p.h.dot(dz2);
    let denom = l2 - it.kappa / it.tau;
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    let dtau = (-eta * r.rt - dk_target / it.tau - l1) / denom;
    let dx = dx1 + dx2 * dtau;
    let dy = dy1 + dy2 * dtau;
    let dz = dz1 + dz2 * dtau;
    let ds = w.w(&(q - w.w(&dz)));
    let dkappa = (dk_target - it.kappa * dtau) / it.tau;
    Some(Direction {
        dx,
        dy,
        dz,
        ds,
        dtau,
        dkappa,
    })
}

fn step_bound(cones: &[Cone], it: &Iterate, d: &Direction) -> f64 {
    let mut alpha = max_step(cones, &it.s, &d.ds).min(max_step(cones, &it.z, &d.dz));
    if d.dtau < 0.0 {
        alpha = alpha.min(-it.tau / d.dtau);
    }
    if d.dkappa < 0.0 {
        alpha = alpha.min(-it.kappa / d.dkappa);
    }
    alpha
}

fn complementarity(it: &Iterate, degree: f64) -> f64 {
    (it.s.dot(&it.z) + it.tau * it.kappa) / (degree + 1.0)
}

fn advance(it: &Iterate, d: &Direction, alpha: f64) -> Iterate {
    Iterate {
        x: &it.x + &d.dx * alpha,
        y: &it.y + &d.dy * alpha,
        z: &it.z + &d.dz * alpha,
        s: &it.s + &d.ds * alpha,
        tau: it.tau + d.dtau * alpha,
        kappa: it.kappa + d.dkappa * alpha,
    }
}

struct Measures {
    pres: f64,
    dres: f64,
    gap: f64,
    pcost: f64,
}

fn measures(p: &ConicProblem, it: &Iterate, r: &Residuals) -> Measures {
    let t = it.tau;
    Measures {
        pres: (r.ry.norm() / t / (1.0 + p.b.norm())).max(r.rz.norm() / t / (1.0 + p.h.norm())),
        dres: r.rx.norm() / t / (1.0 + p.c.norm()),
        gap: it.s.dot(&it.z) / (t * t),
        pcost: p.c.dot(&it.x) / t,
    }
}

pub fn solve(p: &ConicProblem, tol: f64, max_iter: usize) -> Result<ConicSolution> {
    solve_with(
        p,
        &Settings {
            tol,
            max_iter,
            stop_when_feasible: false,
        },
    )
}

pub fn solve_with(p: &ConicProblem, settings: &Settings) -> Result<ConicSolution> {
    p.validate()?;
    let tol = settings.tol;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    let cones = &p.cones;
    let degree = total_degree(cones) as f64;
    let e = identity(cones);
    let mut it = Iterate {
        x: DVector::zeros(p.num_vars()),
        y: DVector::zeros(p.num_eq()),
        z: e.clone(),
        s: e.clone(),
        tau: 1.0,
        kappa: 1.0,
    };

    let mut status = Status::MaxIterations;
    let mut trace = Vec::new();
    let mut iterations = 0;
    // Last iterate meeting the tolerance, and the extra steps taken since.
    let mut accepted: Option<(Iterate, usize)> = None;
    loop {
        let r = residuals(p, &it);
        let mu = complementarity(&it, degree);
        trace.push(mu);
        let m = measures(p, &it, &r);
        let gap_scale = 1.0 + m.pcost.abs();
        if m.pres <= tol && settings.stop_when_feasible {
            status = Status::Optimal;
            break;
        }
        if m.pres <= tol && m.dres <= tol && m.gap <= tol * gap_scale {
            // The argmin converges like the square root of the gap, so keep
            // going a few steps towards a much smaller one.
            let extra = accepted.as_ref().map_or(0, |(_, e)| e + 1);
            let done = m.gap <= POLISH * tol * gap_scale || extra >= POLISH_STEPS;
            accepted = Some((it.clone(), extra));
            if done {
                break;
            }
        }
        if accepted.is_some() {
            if iterations >= settings.max_iter {
                break;
            }
        } else {
            let dual_obj = p.h.dot(&it.z) + p.b.dot(&it.y);
            if dual_obj < 0.0 && (p.a.tr_mul(&it.y) + p.g.tr_mul(&it.z)).norm() / -dual_obj <= tol {
                status = Status::PrimalInfeasible;
                break;
            }
            let primal_obj = p.c.dot(&it.x);
            if primal_obj < 0.0 {
                let ray = (&p.a * &it.x).norm().max((&p.g * &it.x + &it.s).norm());
                if ray / -primal_obj <= tol {
                    status = Status::DualInfeasible;
                    break;
                }
            }
            if iterations >= settings.max_iter {
                break;
            }
        }

        let Some(w) = Scaling::new(cones, &it.s, &it.z) else {
            break;
        };
        let kkt = Kkt::new(p, &w.w_squared());
        let Some(tau_col) = kkt.solve(&stack(&(-&p.c), &p.b, &p.h)) else {
            break;
        };

        let ll = jordan_product(cones, &w.lambda, &w.lambda);
        let Some(aff) = direction(p, &it, &r, &w, &kkt, &tau_col, 1.0, &(-&ll), -it.tau * it.kappa) else {
            break;
        };
        let alpha_aff = step_bound(cones, &it, &aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        let cross = jordan_product(cones, &w.w_inv(&aff.ds), &w.w(&aff.dz));
        let ds_target = -&ll - cross + &e * (sigma * mu);
        let dk_target = -it.tau * it.kappa - aff.dtau * aff.dkappa + sigma * mu;
        let Some(d) = direction(p, &it, &r, &w, &kkt, &tau_col, 1.0 - sigma, &ds_target, dk_target) else {
            break;
        };

        let mut alpha = (STEP_FRACTION * step_bound(cones, &it, &d)).min(1.0);
        let mut next = advance(&it, &d, alpha);
        // Keep the complementarity measure monotone.
        let mut halvings = 0;
        while complementarity(&next, degree) > mu && halvings < 40 {
            alpha *= 0.5;
            next = advance(&it, &d, alpha);
            halvings += 1;
        }
        if alpha < 1e-12 || complementarity(&next, degree) > mu || !next.tau.is_finite() {
            break;
        }
        it = next;
        iterations += 1;
    }
    if let Some((best, _)) = accepted {
        it = best;
        status = Status::Optimal;
    }
    Ok(finish(p, it, status, iterations, trace))
}

fn finish(p: &ConicProblem, it: Iterate, status: Status, iterations: usize, trace: Vec<f64>) -> ConicSolution {
    let (x, y, z, s, obj) = match status {
        Status::PrimalInfeasible => {
            let scale = -(p.h.dot(&it.z) + p.b.dot(&it.y));
            let x = &it.x / it.tau;
            let s = &it.s / it.tau;
            (x, &it.y / scale, &it.z / scale, s, f64::INFINITY)
        }
        Status::DualInfeasible => {
            let scale = -p.c.dot(&it.x);
            let y = &it.y / it.tau;
            let z = &it.z / it.tau;
            (&it.x / scale, y, z, &it.s / scale, f64::NEG_INFINITY)
        }
        Status::Optimal | Status::MaxIterations => {
            let x = &it.x / it.tau;
            let obj = p.c.dot(&x);
            (x, &it.y / it.tau, &it.z / it.tau, &it.s / it.tau, obj)
        }
    };
    let primal_residual = ((&p.a * &x - &p.b).norm() / (1.0 + p.b.norm()))
        .max((&p.g * &x + &s - &p.h).norm() / (1.0 + p.h.norm()));
    let dual_residual = (p.a.tr_mul(&y) + p.g.tr_mul(&z) + &p.c).norm() / (1.0 + p.c.norm());
    let gap = s.dot(&z);
    ConicSolution {
        status,
        x,
        y,
        z,
        s,
        obj,
        primal_residual,
        dual_residual,
        gap,
        iterations,
        gap_trace: trace,
    }
}

/// Finds a point satisfying the constraints of `p` (its objective is
/// ignored). A run that ends without a certificate either way is judged by
/// the primal residual of its last iterate.
pub fn feasibility(p: &ConicProblem, tol: f64) -> Result<Feasibility> {
    let mut q = p.clone();
    q.c.fill(0.0);
    let sol = solve_with(
        &q,
        &Settings {
            tol,
            max_iter: DEFAULT_MAX_ITER,
            stop_when_feasible: true,
        },
    )?;
    Ok(match sol.status {
        Status::Optimal => Feasibility::Feasible(sol.x),
        Status::MaxIterations if sol.primal_residual <= tol => Feasibility::Feasible(sol.x),
        _ => Feasibility::Infeasible,
    })
}

/// `min cᵀx  s.t.  G x ≤ h,  A x = b`.
pub fn solve_lp(
    c: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    tol: f64,
) -> Result<ConicSolution> {
    let p = ConicProblem {
        c: c.clone(),
        a: a.clone(),
        b: b.clone(),
        g: g.clone(),
        h: h.clone(),
        cones: vec![Cone::NonNeg(h.len())],
    };
    solve(&p, tol, DEFAULT_MAX_ITER)
}
