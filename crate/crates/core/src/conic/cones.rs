//! Cone algebra for products of nonnegative orthants and second-order
//! cones: Jordan products, step lengths and Nesterov-Todd scalings.

use nalgebra::{DMatrix, DVector};

/// One block of the product cone, sized by its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// `{ s : s_i >= 0 }`.
    NonNeg(usize),
    /// `{ (t, u) : ||u|| <= t }`, dimension counts `t`.
    SecondOrder(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::NonNeg(d) | Cone::SecondOrder(d) => d,
        }
    }

    /// Barrier degree of the block.
    pub fn degree(&self) -> usize {
        match *self {
            Cone::NonNeg(d) => d,
            Cone::SecondOrder(d) => usize::from(d > 0),
        }
    }
}

pub fn total_dim(cones: &[Cone]) -> usize {
    cones.iter().map(Cone::dim).sum()
}

pub fn total_degree(cones: &[Cone]) -> usize {
    cones.iter().map(Cone::degree).sum()
}

/// Iterates `(cone, offset)` pairs.
fn blocks(cones: &[Cone]) -> impl Iterator<Item = (Cone, usize)> + '_ {
    cones.iter().scan(0, |off, c| {
        let start = *off;
        *off += c.dim();
        Some((*c, start))
    })
}

/// Identity element of the Jordan algebra.
pub fn identity(cones: &[Cone]) -> DVector<f64> {
    let mut e = DVector::zeros(total_dim(cones));
    for (c, off) in blocks(cones) {
        match c {
            Cone::NonNeg(d) => e.rows_mut(off, d).fill(1.0),
            Cone::SecondOrder(d) if d > 0 => e[off] = 1.0,
            Cone::SecondOrder(_) => {}
        }
    }
    e
}

/// `u ∘ v`.
pub fn jordan_product(cones: &[Cone], u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(u.len());
    for (c, off) in blocks(cones) {
        match c {
            Cone::NonNeg(d) => {
                for i in off..off + d {
                    out[i] = u[i] * v[i];
                }
            }
            Cone::SecondOrder(0) => {}
            Cone::SecondOrder(d) => {
                let (u0, v0) = (u[off], v[off]);
                out[off] = u.rows(off, d).dot(&v.rows(off, d));
                for i in off + 1..off + d {
                    out[i] = u0 * v[i] + v0 * u[i];
                }
            }
        }
    }
    out
}

/// Solves `λ ∘ x = d` for `x`, with `λ` in the cone interior.
pub fn jordan_div(cones: &[Cone], lambda: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(d.len());
    for (c, off) in blocks(cones) {
        match c {
            Cone::NonNeg(n) => {
                for i in off..off + n {
                    out[i] = d[i] / lambda[i];
                }
            }
            Cone::SecondOrder(0) => {}
            Cone::SecondOrder(n) => {
                let l0 = lambda[off];
                let l1 = lambda.rows(off + 1, n - 1);
                let d1 = d.rows(off + 1, n - 1);
                let det = l0 * l0 - l1.norm_squared();
                let x0 = (l0 * d[off] - l1.dot(&d1)) / det;
                out[off] = x0;
                for i in 1..n {
                    out[off + i] = (d[off + i] - x0 * lambda[off + i]) / l0;
                }
            }
        }
    }
    out
}

/// `t² − ||u||²` for one second-order block.
fn soc_residual(v: &DVector<f64>, off: usize, d: usize) -> f64 {
    v[off] * v[off] - v.rows(off + 1, d - 1).norm_squared()
}

/// Whether `v` lies strictly inside the cone.
pub fn is_interior(cones: &[Cone], v: &DVector<f64>) -> bool {
    blocks(cones).all(|(c, off)| match c {
        Cone::NonNeg(d) => v.rows(off, d).iter().all(|x| *x > 0.0),
        Cone::SecondOrder(0) => true,
        Cone::SecondOrder(d) => v[off] > 0.0 && soc_residual(v, off, d) > 0.0,
    })
}

/// Largest violation of cone membership (0 when `v` is in the cone).
pub fn violation(cones: &[Cone], v: &DVector<f64>) -> f64 {
    blocks(cones)
        .map(|(c, off)| match c {
            Cone::NonNeg(d) => v.rows(off, d).iter().map(|x| (-x).max(0.0)).fold(0.0, f64::max),
            Cone::SecondOrder(0) => 0.0,
            Cone::SecondOrder(d) => (v.rows(off + 1, d - 1).norm() - v[off]).max(0.0),
        })
        .fold(0.0, f64::max)
}

/// Smallest positive root of `a t² + 2 b t + c` (∞ if none).
fn first_positive_root(a: f64, b: f64, c: f64) -> f64 {
    let disc = b * b - a * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let t = -(b + b.signum() * disc.sqrt());
    if t == 0.0 {
        return f64::INFINITY;
    }
    let mut best = f64::INFINITY;
    for r in [c / t, if a != 0.0 { t / a } else { f64::INFINITY }] {
        if r > 0.0 && r < best {
            best = r;
        }
    }
    best
}

/// Largest `α ≥ 0` with `u + α d` in the cone, for `u` in the interior.
pub fn max_step(cones: &[Cone], u: &DVector<f64>, d: &DVector<f64>) -> f64 {
    let mut alpha = f64::INFINITY;
    for (c, off) in blocks(cones) {
        match c {
            Cone::NonNeg(n) => {
                for i in off..off + n {
                    if d[i] < 0.0 {
                        alpha = alpha.min(-u[i] / d[i]);
                    }
                }
            }
            Cone::SecondOrder(0) => {}
            Cone::SecondOrder(n) => {
                let u1 = u.rows(off + 1, n - 1);
                let d1 = d.rows(off + 1, n - 1);
                let a = d[off] * d[off] - d1.norm_squared();
                let b = u[off] * d[off] - u1.dot(&d1);
                let c = u[off] * u[off] - u1.norm_squared();
                alpha = alpha.min(first_positive_root(a, b, c));
            }
        }
    }
    alpha
}

#[derive(Debug, Clone)]
enum Block {
    NonNeg(DVector<f64>),
    Soc { eta: f64, w0: f64, w1: DVector<f64> },
}

/// Nesterov-Todd scaling `W` with `W z = W⁻¹ s = λ`.
#[derive(Debug, Clone)]
pub struct Scaling {
    cones: Vec<Cone>,
    blocks: Vec<Block>,
    pub lambda: DVector<f64>,
}

impl Scaling {
    /// `None` unless both `s` and `z` are strictly interior.
    pub fn new(cones: &[Cone], s: &DVector<f64>, z: &DVector<f64>) -> Option<Self> {
        if !is_interior(cones, s) || !is_interior(cones, z) {
            return None;
        }
        let mut out = Vec::with_capacity(cones.len());
        for (c, off) in blocks(cones) {
            match c {
                Cone::NonNeg(d) => {
                    let w = DVector::from_fn(d, |i, _| (s[off + i] / z[off + i]).sqrt());
                    out.push(Block::NonNeg(w));
                }
                Cone::SecondOrder(0) => out.push(Block::Soc {
                    eta: 1.0,
                    w0: 1.0,
                    w1: DVector::zeros(0),
                }),
                Cone::SecondOrder(d) => {
                    let sn = soc_residual(s, off, d).sqrt();
                    let zn = soc_residual(z, off, d).sqrt();
                    let sb = s.rows(off, d) / sn;
                    let zb = z.rows(off, d) / zn;
                    let gamma = ((1.0 + sb.dot(&zb)) / 2.0).sqrt();
                    let w0 = (sb[0] + zb[0]) / (2.0 * gamma);
                    let w1 = (sb.rows(1, d - 1) - zb.rows(1, d - 1)) / (2.0 * gamma);
                    out.push(Block::Soc {
                        eta: (sn / zn).sqrt(),
                        w0,
                        w1,
                    });
                }
            }
        }
        let mut scaling = Self {
            cones: cones.to_vec(),
            blocks: out,
            lambda: DVector::zeros(0),
        };
        scaling.lambda = scaling.apply(z, false);
        Some(scaling)
    }

    fn apply(&self, v: &DVector<f64>, inverse: bool) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for ((c, off), b) in blocks(&self.cones).zip(&self.blocks) {
            let d = c.dim();
            match b {
                Block::NonNeg(w) => {
                    for i in 0..d {
                        out[off + i] = if inverse { v[off + i] / w[i] } else { v[off + i] * w[i] };
                    }
                }
                Block::Soc { eta, w0, w1 } => {
                    if d == 0 {
                        continue;
                    }
                    let (sign, scale) = if inverse { (-1.0, 1.0 / eta) } else { (1.0, *eta) };
                    let v0 = v[off];
                    let v1 = v.rows(off + 1, d - 1);
                    let w1v1 = w1.dot(&v1);
                    out[off] = scale * (w0 * v0 + sign * w1v1);
                    let coef = sign * v0 + w1v1 / (1.0 + w0);
                    for i in 0..d - 1 {
                        out[off + 1 + i] = scale * (v1[i] + coef * w1[i]);
                    }
                }
            }
        }
        out
    }

    pub fn w(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply(v, false)
    }

    pub fn w_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply(v, true)
    }

    /// Dense `W²`, block diagonal.
    pub fn w_squared(&self) -> DMatrix<f64> {
        let p = self.lambda.len();
        let mut m = DMatrix::zeros(p, p);
        for ((c, off), b) in blocks(&self.cones).zip(&self.blocks) {
            let d = c.dim();
            match b {
                Block::NonNeg(w) => {
                    for i in 0..d {
                        m[(off + i, off + i)] = w[i] * w[i];
                    }
                }
                Block::Soc { .. } => {
                    for j in 0..d {
                        let mut e = DVector::zeros(p);
                        e[off + j] = 1.0;
                        let col = self.w(&self.w(&e));
                        m.view_mut((off, off + j), (d, 1)).copy_from(&col.rows(off, d));
                    }
                }
            }
        }
        m
    }
}
