use nalgebra::DMatrix;

use super::{DualVerdict, Domain};
use crate::error::{Error, Result};
use crate::grassmann::{GrassmannContext, Plane, ProjParam};
use crate::numerics::{sym_eigenvalues, Tolerance};
use crate::rng::SplitRng;

/// Planes on which a symmetric form of signature (p, q) is positive definite.
#[derive(Debug, Clone)]
pub struct SymmetricDomain {
    ctx: GrassmannContext,
    form: DMatrix<f64>,
    /// `F` with `Fᵀ φ F = diag(I_p, −I_q)`.
    frame: DMatrix<f64>,
    frame_inv: DMatrix<f64>,
}

impl SymmetricDomain {
    /// Domain of a nondegenerate symmetric form; `(p, q)` is read off its signature.
    pub fn new(form: DMatrix<f64>, tol: Tolerance) -> Result<Self> {
        let n = form.nrows();
        if form.ncols() != n || n < 2 {
            return Err(Error::InvalidInput(format!(
                "form must be square of size >= 2 (got {}x{})",
                form.nrows(),
                form.ncols()
            )));
        }
        if form.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("form has non-finite entries".into()));
        }
        let scale = form.abs().max().max(1.0);
        if (&form - form.transpose()).abs().max() > 1e-12 * scale {
            return Err(Error::InvalidInput("form is not symmetric".into()));
        }
        let form = (&form + form.transpose()) * 0.5;
        let eig = form.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.abs().max();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        if order.iter().any(|&i| eig.eigenvalues[i].abs() <= tol.rank_rel * lmax) {
            return Err(Error::InvalidInput("form is degenerate".into()));
        }
        let p = order.iter().filter(|&&i| eig.eigenvalues[i] > 0.0).count();
        let ctx = GrassmannContext::with_tolerance(p, n - p, tol)?;
        let frame = DMatrix::from_fn(n, n, |r, c| {
            let i = order[c];
            eig.eigenvectors[(r, i)] / eig.eigenvalues[i].abs().sqrt()
        });
        let j = DMatrix::from_fn(n, n, |r, c| match (r == c, r < p) {
            (true, true) => 1.0,
            (true, false) => -1.0,
            _ => 0.0,
        });
        let frame_inv = &j * frame.transpose() * &form;
        Ok(SymmetricDomain {
            ctx,
            form,
            frame,
            frame_inv,
        })
    }

    /// `diag(I_p, −I_q)`.
    pub fn standard(p: usize, q: usize) -> Result<Self> {
        let n = p + q;
        let form = DMatrix::from_fn(n, n, |r, c| match (r == c, r < p) {
            (true, true) => 1.0,
            (true, false) => -1.0,
            _ => 0.0,
        });
        SymmetricDomain::new(form, Tolerance::default())
    }

    pub fn form(&self) -> &DMatrix<f64> {
        &self.form
    }

    /// Basis change `F` taking the standard form to this one: `Fᵀ φ F = diag(I_p, −I_q)`.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn frame_inv(&self) -> &DMatrix<f64> {
        &self.frame_inv
    }

    /// Smallest eigenvalue of the form restricted to an orthonormal basis of `x`.
    pub fn margin(&self, x: &Plane) -> Result<f64> {
        self.ctx.check_point(x, "x")?;
        Ok(self.restricted_min(x.basis()))
    }

    fn restricted_min(&self, basis: &DMatrix<f64>) -> f64 {
        min_eigenvalue(&(basis.transpose() * &self.form * basis))
    }

    /// `span(F·[I_p; C])` for a q×p matrix `C`; inside the domain iff `‖C‖ < 1`.
    pub fn graph_point(&self, c: &DMatrix<f64>) -> Result<Plane> {
        let (p, q) = (self.ctx.p, self.ctx.q);
        if c.shape() != (q, p) {
            return Err(Error::DimensionMismatch {
                what: "graph chart matrix rows",
                expected: q,
                found: c.nrows(),
            });
        }
        let mut m = DMatrix::zeros(p + q, p);
        m.view_mut((0, 0), (p, p)).fill_with_identity();
        m.view_mut((p, 0), (q, p)).copy_from(c);
        Plane::from_basis(&self.frame * m, &self.ctx.tol)
    }

    /// `span(F·[C; I_q])` for a p×q matrix `C`; a dual point iff `‖C‖ < 1`.
    pub fn dual_graph_point(&self, c: &DMatrix<f64>) -> Result<Plane> {
        let (p, q) = (self.ctx.p, self.ctx.q);
        if c.shape() != (p, q) {
            return Err(Error::DimensionMismatch {
                what: "dual chart matrix rows",
                expected: p,
                found: c.nrows(),
            });
        }
        let mut m = DMatrix::zeros(p + q, q);
        m.view_mut((0, 0), (p, q)).copy_from(c);
        m.view_mut((p, 0), (q, q)).fill_with_identity();
        Plane::from_basis(&self.frame * m, &self.ctx.tol)
    }

    /// The point `span(F e_1, …, F e_p)`.
    pub fn base_point(&self) -> Plane {
        self.graph_point(&DMatrix::zeros(self.ctx.q, self.ctx.p))
            .expect("frame columns are independent")
    }
}

/// Smallest eigenvalue of a small symmetric matrix, in closed form up to 2×2.
fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    match g.nrows() {
        0 => f64::INFINITY,
        1 => g[(0, 0)],
        2 => {
            let (a, b, d) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
            let mean = 0.5 * (a + d);
            let rad = (0.5 * (a - d)).hypot(b);
            // product form avoids cancellation when the small eigenvalue is tiny
            let big = if mean >= 0.0 { mean + rad } else { mean - rad };
            let det = a * d - b * b;
            if mean >= 0.0 {
                if big == 0.0 {
                    0.0
                } else {
                    det / big
                }
            } else {
                big
            }
        }
        _ => sym_eigenvalues(g)[0],
    }
}

impl Domain for SymmetricDomain {
    fn context(&self) -> &GrassmannContext {
        &self.ctx
    }

    fn contains(&self, x: &Plane) -> Result<bool> {
        Ok(self.margin(x)? > self.ctx.tol.geom_abs)
    }

    fn dual_contains(&self, xi: &Plane) -> Result<DualVerdict> {
        self.ctx.check_dual(xi, "xi")?;
        let g = xi.basis().transpose() * &self.form * xi.basis();
        let top = sym_eigenvalues(&g).last().copied().unwrap_or(f64::NEG_INFINITY);
        Ok(DualVerdict {
            contained: top < -self.ctx.tol.geom_abs,
            heuristic: false,
        })
    }

    /// Points at distance `t_1 + … + t_r` from the base point, with the `t_i`
    /// uniform in `[0, scale]` and a Haar-random flat.
    fn sample_interior(&self, rng: &mut SplitRng, scale: f64) -> Result<Plane> {
        let (p, q) = (self.ctx.p, self.ctx.q);
        let r = self.ctx.rank();
        let u = rng.orthogonal(q);
        let v = rng.orthogonal(p);
        let mut c = DMatrix::zeros(q, p);
        for i in 0..r {
            let s = (0.5 * rng.uniform(0.0, scale)).tanh();
            c += u.column(i) * v.column(i).transpose() * s;
        }
        self.graph_point(&c)
    }

    fn photon_membership<'a>(&'a self, pp: &'a ProjParam) -> Box<dyn Fn(f64) -> bool + 'a> {
        let margin = self.photon_margin(pp, 0.0);
        let eps = self.ctx.tol.geom_abs;
        Box::new(move |t| margin(t) > eps)
    }

    /// Smallest eigenvalue of the restricted Gram matrix of the continuous
    /// basis `[v0 | cos θ·u + sin θ·w]`.
    fn photon_margin<'a>(&'a self, pp: &'a ProjParam, _seed: f64) -> Box<dyn Fn(f64) -> f64 + 'a> {
        // Gram blocks of [v0 | u | w], so each angle costs O(p²)
        let v0 = pp.photon.v0.basis();
        let k = v0.ncols();
        let n = v0.nrows();
        let mut basis = DMatrix::zeros(n, k + 2);
        basis.columns_mut(0, k).copy_from(v0);
        for i in 0..n {
            basis[(i, k)] = pp.u[i];
            basis[(i, k + 1)] = pp.w[i];
        }
        let full = basis.transpose() * &self.form * &basis;
        Box::new(move |t| {
            let (s, c) = t.sin_cos();
            let mut g = full.view((0, 0), (k + 1, k + 1)).into_owned();
            for i in 0..k {
                let v = c * full[(i, k)] + s * full[(i, k + 1)];
                g[(i, k)] = v;
                g[(k, i)] = v;
            }
            g[(k, k)] = c * c * full[(k, k)] + 2.0 * c * s * full[(k, k + 1)] + s * s * full[(k + 1, k + 1)];
            min_eigenvalue(&g)
        })
    }
}
