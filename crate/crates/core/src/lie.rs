//! Matrix models of sl(3,ℝ), sl(4,ℝ) and su(3) with their Cartan
//! decompositions, Killing forms and the symmetric-space curvature tensor.
//!
//! Basis ordering (fixed, Frobenius-orthonormal under `Re Tr(X Y*)`):
//!
//! | block | elements |
//! |-------|----------|
//! | k     | `(E_ij − E_ji)/√2`, `i < j` lexicographic |
//! | p, diagonal | `(E_11 + … + E_mm − m E_{m+1,m+1})/√(m(m+1))`, `m = 1..n−1` |
//! | p, off-diagonal | `(E_ij + E_ji)/√2`, `i < j` lexicographic |
//!
//! For su(3) every p element is multiplied by `i`, so that `p = i·Sym⁰(3,ℝ)`
//! and `k = so(3)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub type CMat = DMatrix<Complex64>;

const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Sl3,
    Sl4,
    Su3,
}

impl ModelKind {
    pub fn size(self) -> usize {
        match self {
            ModelKind::Sl3 | ModelKind::Su3 => 3,
            ModelKind::Sl4 => 4,
        }
    }

    /// Sign of the Einstein constant of the symmetric space.
    pub fn epsilon(self) -> f64 {
        match self {
            ModelKind::Su3 => 1.0,
            _ => -1.0,
        }
    }

    pub fn rank(self) -> usize {
        self.size() - 1
    }

    pub fn is_compact(self) -> bool {
        self == ModelKind::Su3
    }

    /// Metric scale on `−εB`. The sl3/su3 values match the flat ambient
    /// embeddings `Q ↦ QQᵗ` and `Q ↦ (QQᵗ, (QQᵗ)⁻¹)`; see
    /// `ambient::calibrate_scale`.
    pub fn default_scale(self) -> f64 {
        match self {
            ModelKind::Sl3 | ModelKind::Su3 => 2.0 / 3.0,
            ModelKind::Sl4 => 1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sl3" | "sl3R" => Some(ModelKind::Sl3),
            "sl4" | "sl4R" => Some(ModelKind::Sl4),
            "su3" => Some(ModelKind::Su3),
            _ => None,
        }
    }
}

/// A member of one of the built-in matrix Lie algebras.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub model: ModelKind,
    pub mat: CMat,
}

impl AlgebraElement {
    pub fn new(model: ModelKind, mat: CMat) -> Self {
        Self { model, mat }
    }

    pub fn zero(model: ModelKind) -> Self {
        let n = model.size();
        Self::new(model, CMat::zeros(n, n))
    }

    pub fn from_real(model: ModelKind, m: &DMatrix<f64>) -> Self {
        Self::new(model, m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.model, self.mat.map(|z| z * c))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.model, &self.mat + &o.mat)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.model, &self.mat - &o.mat)
    }

    pub fn frob(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Linear combination `Σ cᵢ Xᵢ`.
pub fn combine(model: ModelKind, coeffs: &[f64], elems: &[AlgebraElement]) -> AlgebraElement {
    let mut out = AlgebraElement::zero(model);
    for (c, e) in coeffs.iter().zip(elems) {
        out.mat += e.mat.map(|z| z * *c);
    }
    out
}

pub fn unit(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// One of the three matrix algebras together with its cached structure.
#[derive(Clone, Debug)]
pub struct AlgebraModel {
    pub kind: ModelKind,
    pub scale: f64,
    basis: Vec<AlgebraElement>,
    k_dim: usize,
    killing: DMatrix<f64>,
    p_onb: Vec<AlgebraElement>,
}

impl AlgebraModel {
    pub fn new(kind: ModelKind) -> Self {
        Self::with_scale(kind, kind.default_scale())
    }

    pub fn with_scale(kind: ModelKind, scale: f64) -> Self {
        assert!(scale > 0.0, "metric scale must be positive");
        let n = kind.size();
        let mut basis = Vec::new();
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..n {
            for j in i + 1..n {
                let m = (unit(n, i, j) - unit(n, j, i)) * s2;
                basis.push(AlgebraElement::from_real(kind, &m));
            }
        }
        let k_dim = basis.len();
        let pfac = if kind == ModelKind::Su3 { Complex64::i() } else { Complex64::new(1.0, 0.0) };
        for m in 1..n {
            let mut d = DMatrix::zeros(n, n);
            for l in 0..m {
                d[(l, l)] = 1.0;
            }
            d[(m, m)] = -(m as f64);
            d /= ((m * (m + 1)) as f64).sqrt();
            basis.push(AlgebraElement::new(kind, d.map(|x| pfac * x)));
        }
        for i in 0..n {
            for j in i + 1..n {
                let m = (unit(n, i, j) + unit(n, j, i)) * s2;
                basis.push(AlgebraElement::new(kind, m.map(|x| pfac * x)));
            }
        }
        let mut model = Self { kind, scale, basis, k_dim, killing: DMatrix::zeros(0, 0), p_onb: Vec::new() };
        let dim = model.basis.len();
        let ads: Vec<DMatrix<f64>> = (0..dim).map(|a| model.ad_matrix_unchecked(&model.basis[a])).collect();
        model.killing = DMatrix::from_fn(dim, dim, |a, b| (&ads[a] * &ads[b]).trace());
        // Inner-orthonormal p basis.
        let pb: Vec<AlgebraElement> = model.basis[k_dim..].to_vec();
        let gram = DMatrix::from_fn(pb.len(), pb.len(), |a, b| model.inner_unchecked(&pb[a], &pb[b]));
        let coeffs = linalg::gram_schmidt(&DMatrix::identity(pb.len(), pb.len()), &gram, 1e-12);
        model.p_onb = (0..coeffs.ncols())
            .map(|c| combine(kind, coeffs.column(c).as_slice(), &pb))
            .collect();
        model
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn k_dim(&self) -> usize {
        self.k_dim
    }

    pub fn p_dim(&self) -> usize {
        self.dim() - self.k_dim
    }

    pub fn basis(&self) -> &[AlgebraElement] {
        &self.basis
    }

    pub fn k_basis(&self) -> &[AlgebraElement] {
        &self.basis[..self.k_dim]
    }

    /// Frobenius-orthonormal p basis (not inner-orthonormal).
    pub fn p_frobenius_basis(&self) -> &[AlgebraElement] {
        &self.basis[self.k_dim..]
    }

    /// Inner-orthonormal p basis.
    pub fn p_basis(&self) -> &[AlgebraElement] {
        &self.p_onb
    }

    /// The diagonal Cartan subalgebra of p, inner-orthonormal.
    pub fn diagonal_cartan(&self) -> Vec<AlgebraElement> {
        self.p_onb[..self.kind.rank()].to_vec()
    }

    pub fn killing_gram(&self) -> &DMatrix<f64> {
        &self.killing
    }

    fn check(&self, x: &AlgebraElement) -> Result<()> {
        if x.model != self.kind {
            return Err(Error::ModelMismatch(self.kind, x.model));
        }
        Ok(())
    }

    /// Coordinates in the fixed Frobenius basis, with the membership residual.
    pub fn coords_with_residual(&self, x: &AlgebraElement) -> (Vec<f64>, f64) {
        let c: Vec<f64> = self
            .basis
            .iter()
            .map(|b| x.mat.iter().zip(b.mat.iter()).map(|(u, v)| (u * v.conj()).re).sum())
            .collect();
        let back = combine(self.kind, &c, &self.basis);
        (c, back.sub(x).frob())
    }

    pub fn coords(&self, x: &AlgebraElement) -> Result<Vec<f64>> {
        self.check(x)?;
        let (c, res) = self.coords_with_residual(x);
        if res > MEMBERSHIP_TOL * x.frob().max(1.0) {
            return Err(Error::NotInAlgebra(res));
        }
        Ok(c)
    }

    pub fn from_coords(&self, c: &[f64]) -> AlgebraElement {
        combine(self.kind, c, &self.basis)
    }

    /// Cartan involution.
    pub fn theta(&self, x: &AlgebraElement) -> AlgebraElement {
        let m = match self.kind {
            ModelKind::Su3 => x.mat.map(|z| z.conj()),
            _ => -x.mat.transpose(),
        };
        AlgebraElement::new(x.model, m)
    }

    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(self.kind, &x.mat * &y.mat - &y.mat * &x.mat)
    }

    fn ad_matrix_unchecked(&self, x: &AlgebraElement) -> DMatrix<f64> {
        let dim = self.basis.len();
        let mut m = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            let (c, _) = self.coords_with_residual(&self.bracket_unchecked(x, &self.basis[a]));
            for b in 0..dim {
                m[(b, a)] = c[b];
            }
        }
        m
    }

    /// Matrix of `ad_X` in the fixed basis.
    pub fn ad_matrix(&self, x: &AlgebraElement) -> Result<DMatrix<f64>> {
        self.coords(x)?;
        Ok(self.ad_matrix_unchecked(x))
    }

    /// `B(X, Y) = Tr(ad_X ∘ ad_Y)` via the cached Gram matrix.
    pub fn killing_form(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
        let cx = self.coords(x)?;
        let cy = self.coords(y)?;
        Ok(quad(&self.killing, &cx, &cy))
    }

    pub fn cartan_split(&self, x: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
        let t = self.theta(x);
        (x.add(&t).scale(0.5), x.sub(&t).scale(0.5))
    }

    /// Norm of the k-component, relative to the element.
    pub fn p_residual(&self, x: &AlgebraElement) -> f64 {
        let (k, _) = self.cartan_split(x);
        k.frob()
    }

    pub fn is_in_p(&self, x: &AlgebraElement) -> bool {
        x.model == self.kind && self.p_residual(x) <= MEMBERSHIP_TOL * x.frob().max(1.0)
    }

    pub fn is_in_k(&self, x: &AlgebraElement) -> bool {
        let (_, p) = self.cartan_split(x);
        x.model == self.kind && p.frob() <= MEMBERSHIP_TOL * x.frob().max(1.0)
    }

    fn require_p(&self, x: &AlgebraElement) -> Result<()> {
        self.check(x)?;
        let r = self.p_residual(x);
        if r > MEMBERSHIP_TOL * x.frob().max(1.0) {
            return Err(Error::NotInP(r));
        }
        Ok(())
    }

    fn inner_unchecked(&self, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
        let (cx, _) = self.coords_with_residual(x);
        let (cy, _) = self.coords_with_residual(y);
        -self.kind.epsilon() * self.scale * quad(&self.killing, &cx, &cy)
    }

    /// `⟨X, Y⟩ = s·(−ε)·B(X, Y)` on p.
    pub fn inner(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
        self.require_p(x)?;
        self.require_p(y)?;
        Ok(self.inner_unchecked(x, y))
    }

    /// Coordinates of a p element in the inner-orthonormal p basis.
    pub fn p_coords(&self, x: &AlgebraElement) -> Result<Vec<f64>> {
        self.require_p(x)?;
        Ok(self.p_onb.iter().map(|e| self.inner_unchecked(x, e)).collect())
    }

    pub fn from_p_coords(&self, c: &[f64]) -> AlgebraElement {
        combine(self.kind, c, &self.p_onb)
    }

    pub fn p_norm(&self, x: &AlgebraElement) -> Result<f64> {
        Ok(self.inner(x, x)?.max(0.0).sqrt())
    }

    /// `R̃(X, Y)Z = −[[X, Y], Z]`.
    pub fn curvature(&self, x: &AlgebraElement, y: &AlgebraElement, z: &AlgebraElement) -> Result<AlgebraElement> {
        self.require_p(x)?;
        self.require_p(y)?;
        self.require_p(z)?;
        Ok(self.bracket_unchecked(&self.bracket_unchecked(x, y), z).scale(-1.0))
    }

    /// `⟨R̃(X, Y)Z, W⟩`.
    pub fn curvature4(&self, x: &AlgebraElement, y: &AlgebraElement, z: &AlgebraElement, w: &AlgebraElement) -> Result<f64> {
        let r = self.curvature(x, y, z)?;
        self.inner(&r, w)
    }

    /// Sectional curvature of the plane spanned by `X, Y`.
    pub fn sectional(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
        let num = self.curvature4(x, y, y, x)?;
        let den = self.inner(x, x)? * self.inner(y, y)? - self.inner(x, y)?.powi(2);
        if den.abs() < 1e-14 {
            return Err(Error::DegenerateBasis("sectional curvature of a degenerate plane".into()));
        }
        Ok(num / den)
    }

    /// Jacobi operator `Y ↦ R̃(Y, ξ)ξ` in the inner-orthonormal p basis.
    pub fn jacobi_operator(&self, xi: &AlgebraElement) -> Result<DMatrix<f64>> {
        self.require_p(xi)?;
        let n = self.p_onb.len();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            let r = self.curvature(&self.p_onb[a], xi, xi)?;
            for b in 0..n {
                m[(b, a)] = self.inner_unchecked(&r, &self.p_onb[b]);
            }
        }
        Ok((&m + m.transpose()) * 0.5)
    }

    /// Ricci form of the symmetric-space metric in the inner-orthonormal p basis.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.p_onb.len();
        let e = &self.p_onb;
        let mut ric = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for c in 0..n {
                    let r = self.bracket_unchecked(&self.bracket_unchecked(&e[c], &e[a]), &e[b]).scale(-1.0);
                    s += self.inner_unchecked(&r, &e[c]);
                }
                ric[(a, b)] = s;
            }
        }
        ric
    }

    /// Einstein constant `Tr(Ric)/dim p`.
    pub fn einstein_constant(&self) -> f64 {
        self.ricci().trace() / self.p_dim() as f64
    }

    /// Tests `[[p′, p′], p′] ⊂ p′` for the span of `basis`.
    pub fn is_lie_triple_system(&self, basis: &[AlgebraElement], tol: f64) -> Result<bool> {
        Ok(self.lie_triple_residual(basis)? <= tol)
    }

    /// Largest inner-norm of the component of `[[bᵢ, bⱼ], bₖ]` orthogonal to
    /// the span, over an orthonormalized basis.
    pub fn lie_triple_residual(&self, basis: &[AlgebraElement]) -> Result<f64> {
        for b in basis {
            self.require_p(b)?;
        }
        let onb = self.orthonormalize(basis)?;
        let mut worst: f64 = 0.0;
        for a in &onb {
            for b in &onb {
                for c in &onb {
                    let w = self.bracket_unchecked(&self.bracket_unchecked(a, b), c);
                    let mut r = w.clone();
                    for e in &onb {
                        r = r.sub(&e.scale(self.inner_unchecked(&w, e)));
                    }
                    worst = worst.max(self.inner_unchecked(&r, &r).max(0.0).sqrt());
                }
            }
        }
        Ok(worst)
    }

    /// Inner-orthonormalizes a list of p elements; errors on dependence.
    pub fn orthonormalize(&self, basis: &[AlgebraElement]) -> Result<Vec<AlgebraElement>> {
        let coords: Vec<Vec<f64>> = basis.iter().map(|b| self.p_coords(b)).collect::<Result<_>>()?;
        let m = DMatrix::from_fn(self.p_dim(), basis.len(), |r, c| coords[c][r]);
        let q = linalg::gram_schmidt(&m, &DMatrix::identity(self.p_dim(), self.p_dim()), 1e-10);
        if q.ncols() < basis.len() {
            return Err(Error::DegenerateBasis(format!("{} vectors span only {} dimensions", basis.len(), q.ncols())));
        }
        Ok((0..q.ncols()).map(|c| self.from_p_coords(q.column(c).as_slice())).collect())
    }

    /// Random element of p with standard-normal inner-orthonormal coordinates.
    pub fn random_p<R: Rng>(&self, rng: &mut R) -> AlgebraElement {
        let c: Vec<f64> = (0..self.p_dim()).map(|_| normal(rng)).collect();
        self.from_p_coords(&c)
    }

    /// Random element of g in the fixed basis.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> AlgebraElement {
        let c: Vec<f64> = (0..self.dim()).map(|_| normal(rng)).collect();
        self.from_coords(&c)
    }
}

fn quad(m: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in 0..x.len() {
        if x[a] == 0.0 {
            continue;
        }
        for b in 0..y.len() {
            s += x[a] * m[(a, b)] * y[b];
        }
    }
    s
}

/// Standard normal sample.
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}
