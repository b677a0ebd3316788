//! Iwasawa decompositions, the solvable algebra `s = a ⊕ n` with the metric
//! making it isometric to the symmetric space, its codimension-one
//! subalgebras `ξ^⊥`, and left-invariant Ricci curvature from the Koszul
//! formula.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, AlgebraModel, ModelKind};
use crate::linalg;
use crate::roots::RootDatum;

#[derive(Clone, Debug)]
pub struct Iwasawa {
    pub k: Vec<AlgebraElement>,
    pub a: Vec<AlgebraElement>,
    /// `X_β + θ_β X_β` over positive roots and an orthonormal basis of `p_β`.
    pub n: Vec<AlgebraElement>,
}

/// A solvable Lie algebra with an orthonormal basis: `a_dim` abelian vectors
/// followed by the nilradical.
#[derive(Clone, Debug)]
pub struct MetricSolvAlgebra {
    pub a_dim: usize,
    dim: usize,
    /// `c[(i * dim + j) * dim + k] = ⟨[e_i, e_j], e_k⟩`.
    c: Vec<f64>,
    pub model: Option<ModelKind>,
    /// Matrix realizations of the basis, when built from a model.
    pub elements: Option<Vec<AlgebraElement>>,
}

pub fn iwasawa(model: &AlgebraModel, datum: &RootDatum) -> Result<Iwasawa> {
    if model.kind.is_compact() {
        return Err(Error::CompactModel(model.kind));
    }
    let mut n = Vec::new();
    for root in datum.positive_roots() {
        for x in &root.p_basis {
            n.push(x.add(&datum.theta_map(model, root, x)?));
        }
    }
    let iw = Iwasawa { k: model.k_basis().to_vec(), a: datum.cartan.clone(), n };
    let all: Vec<&AlgebraElement> = iw.k.iter().chain(&iw.a).chain(&iw.n).collect();
    let m = DMatrix::from_fn(model.dim(), all.len(), |r, c| model.coords(all[c]).map(|v| v[r]).unwrap_or(f64::NAN));
    let r = linalg::rank(&m, 1e-10);
    if r != model.dim() {
        return Err(Error::DegenerateBasis(format!("k + a + n spans {r} of {} dimensions", model.dim())));
    }
    Ok(iw)
}

/// Dimensions of the lower central series `n ⊃ [n, n] ⊃ …` until it vanishes.
pub fn lower_central_series(model: &AlgebraModel, n: &[AlgebraElement]) -> Result<Vec<usize>> {
    let span_dim = |v: &[AlgebraElement]| -> Result<usize> {
        if v.is_empty() {
            return Ok(0);
        }
        let cs: Vec<Vec<f64>> = v.iter().map(|e| model.coords(e)).collect::<Result<_>>()?;
        Ok(linalg::rank(&DMatrix::from_fn(model.dim(), cs.len(), |r, c| cs[c][r]), 1e-10))
    };
    let mut dims = vec![span_dim(n)?];
    let mut cur: Vec<AlgebraElement> = n.to_vec();
    for _ in 0..model.dim() {
        let mut next = Vec::new();
        for x in n {
            for y in &cur {
                let b = model.bracket(x, y)?;
                if b.frob() > 1e-12 {
                    next.push(b);
                }
            }
        }
        let d = span_dim(&next)?;
        dims.push(d);
        if d == 0 {
            break;
        }
        cur = next;
    }
    Ok(dims)
}

impl MetricSolvAlgebra {
    /// Builds an algebra from structure constants `c[i][j][k] = ⟨[e_i, e_j], e_k⟩`.
    pub fn from_structure_constants(a_dim: usize, c: Vec<Vec<Vec<f64>>>) -> Self {
        let dim = c.len();
        let flat = c.into_iter().flatten().flatten().collect::<Vec<_>>();
        assert_eq!(flat.len(), dim * dim * dim, "structure constants must be dim³");
        Self { a_dim, dim, c: flat, model: None, elements: None }
    }

    /// `s = a ⊕ n` from an Iwasawa decomposition, with the metric pulled
    /// back from `p` by the Cartan projection.
    pub fn from_iwasawa(model: &AlgebraModel, iw: &Iwasawa) -> Result<Self> {
        let p_part = |x: &AlgebraElement| model.cartan_split(x).1;
        let mut basis: Vec<AlgebraElement> = iw.a.clone();
        basis.extend(iw.n.iter().cloned());
        let dim = basis.len();
        let pp: Vec<AlgebraElement> = basis.iter().map(p_part).collect();
        let gram = DMatrix::from_fn(dim, dim, |i, j| model.inner(&pp[i], &pp[j]).unwrap_or(f64::NAN));
        if linalg::frobenius(&(gram - DMatrix::identity(dim, dim))) > 1e-10 {
            return Err(Error::DegenerateBasis("Iwasawa basis is not orthonormal under the projected metric".into()));
        }
        let mut c = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let b = model.bracket(&basis[i], &basis[j])?;
                let bp = p_part(&b);
                let mut recon = AlgebraElement::zero(model.kind);
                for k in 0..dim {
                    let v = model.inner(&bp, &pp[k])?;
                    c[(i * dim + j) * dim + k] = v;
                    recon = recon.add(&basis[k].scale(v));
                }
                let res = recon.sub(&b).frob();
                if res > 1e-10 {
                    return Err(Error::DegenerateBasis(format!("s is not closed under brackets (residual {res:.3e})")));
                }
            }
        }
        Ok(Self { a_dim: iw.a.len(), dim, c, model: Some(model.kind), elements: Some(basis) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_dim(&self) -> usize {
        self.dim - self.a_dim
    }

    /// `⟨[e_i, e_j], e_k⟩`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn structure_constants(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| (0..self.dim).map(|k| self.c(i, j, k)).collect()).collect()).collect()
    }

    /// Matrix of `ad_{e_i}`: column `j` holds `[e_i, e_j]`.
    pub fn ad(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, j| self.c(i, j, k))
    }

    /// `ad_X` for `X = Σ xᵢ eᵢ`.
    pub fn ad_of(&self, x: &[f64]) -> DMatrix<f64> {
        (0..self.dim).fold(DMatrix::zeros(self.dim, self.dim), |acc, i| acc + self.ad(i) * x[i])
    }

    /// Coordinates of `A_H` in the `a`-basis: `⟨A_H, A⟩ = Tr ad_A`.
    pub fn mean_curvature_vector(&self) -> Vec<f64> {
        (0..self.a_dim).map(|i| self.ad(i).trace()).collect()
    }

    /// Largest `|⟨A_H, eᵢ⟩ − Tr ad_{eᵢ}|` over the `a`-basis.
    pub fn mean_curvature_residual(&self) -> f64 {
        let h = self.mean_curvature_vector();
        (0..self.a_dim).map(|i| (h[i] - self.ad(i).trace()).abs()).fold(0.0, f64::max)
    }

    /// Largest asymmetry `‖ad_A − ad_Aᵗ‖` over the `a`-basis.
    pub fn ad_a_asymmetry(&self) -> f64 {
        (0..self.a_dim).map(|i| {
            let m = self.ad(i);
            linalg::frobenius(&(&m - m.transpose()))
        }).fold(0.0, f64::max)
    }

    /// Largest norm of the `a`-component of any bracket `[e_i, e_j]`.
    pub fn derived_algebra_leak(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let s: f64 = (0..self.a_dim).map(|k| self.c(i, j, k).powi(2)).sum();
                worst = worst.max(s.sqrt());
            }
        }
        worst
    }

    /// Dimension of `[s, s]`.
    pub fn derived_dim(&self) -> usize {
        let cols: Vec<f64> = (0..self.dim)
            .flat_map(|i| (0..self.dim).flat_map(move |j| (0..self.dim).map(move |k| (i, j, k))))
            .map(|(i, j, k)| self.c(i, j, k))
            .collect();
        let m = DMatrix::from_column_slice(self.dim, self.dim * self.dim, &cols);
        linalg::rank(&m, 1e-10)
    }

    /// Spectrum of `ad_{A_H}` on `n`.
    pub fn ad_mean_curvature_spectrum_on_n(&self) -> Vec<f64> {
        let mut h = self.mean_curvature_vector();
        h.resize(self.dim, 0.0);
        let ad = self.ad_of(&h);
        let nn = self.n_dim();
        let block = ad.view((self.a_dim, self.a_dim), (nn, nn)).into_owned();
        linalg::sym_eigen(&block).0
    }

    /// Spectrum of `Σᵢ (ad_{Aᵢ}|n)²` over the orthonormal `a`-basis; an
    /// isometry invariant used to tell `ξ^⊥` algebras apart.
    pub fn ad_a_square_spectrum(&self) -> Vec<f64> {
        let nn = self.n_dim();
        let mut sum = DMatrix::zeros(nn, nn);
        for i in 0..self.a_dim {
            let b = self.ad(i).view((self.a_dim, self.a_dim), (nn, nn)).into_owned();
            sum += &b * &b;
        }
        linalg::sym_eigen(&sum).0
    }

    /// Left-invariant Ricci form via the Koszul formula.
    pub fn ricci(&self) -> DMatrix<f64> {
        let d = self.dim;
        // Γ[i][j][k] = ⟨∇_{e_i} e_j, e_k⟩.
        let mut g = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    g[(i * d + j) * d + k] = 0.5 * (self.c(i, j, k) - self.c(j, k, i) + self.c(k, i, j));
                }
            }
        }
        let gam = |i: usize, j: usize, k: usize| g[(i * d + j) * d + k];
        let mut ric = DMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                let mut s = 0.0;
                for i in 0..d {
                    // ⟨R(e_i, e_j) e_k, e_i⟩
                    let mut r = 0.0;
                    for l in 0..d {
                        r += gam(j, k, l) * gam(i, l, i) - gam(i, k, l) * gam(j, l, i) - self.c(i, j, l) * gam(l, k, i);
                    }
                    s += r;
                }
                ric[(j, k)] = s;
            }
        }
        (&ric + ric.transpose()) * 0.5
    }

    /// `(‖Ric − c·id‖ ≤ tol, c)` with `c = Tr Ric / dim`.
    pub fn is_einstein(&self, tol: f64) -> (bool, f64) {
        let (res, c) = self.einstein_residual();
        (res <= tol, c)
    }

    pub fn einstein_residual(&self) -> (f64, f64) {
        let ric = self.ricci();
        let c = ric.trace() / self.dim as f64;
        let res = linalg::frobenius(&(ric - DMatrix::identity(self.dim, self.dim) * c));
        (res, c)
    }

    /// Largest Jacobi-identity residual over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut v = vec![0.0; d];
                    for l in 0..d {
                        for m in 0..d {
                            v[m] += self.c(i, j, l) * self.c(l, k, m) + self.c(j, k, l) * self.c(l, i, m) + self.c(k, i, l) * self.c(l, j, m);
                        }
                    }
                    worst = worst.max(v.iter().map(|x| x * x).sum::<f64>().sqrt());
                }
            }
        }
        worst
    }

    /// Default `ξ` for rank-two algebras: `A_H` rotated by a quarter turn.
    pub fn default_xi(&self) -> Result<Vec<f64>> {
        if self.a_dim != 2 {
            return Err(Error::InvalidXi(format!("a default ξ exists only in rank 2 (rank {})", self.a_dim)));
        }
        let h = self.mean_curvature_vector();
        let n = (h[0] * h[0] + h[1] * h[1]).sqrt();
        if n < 1e-12 {
            return Err(Error::InvalidXi("A_H vanishes".into()));
        }
        Ok(vec![-h[1] / n, h[0] / n])
    }

    /// A random unit `ξ ∈ a` orthogonal to `A_H`.
    pub fn random_xi<R: rand::Rng>(&self, rng: &mut R) -> Result<Vec<f64>> {
        if self.a_dim < 2 {
            return Err(Error::InvalidXi("rank-one algebra has no admissible ξ".into()));
        }
        let h = self.mean_curvature_vector();
        let hh: f64 = h.iter().map(|x| x * x).sum();
        loop {
            let mut v: Vec<f64> = (0..self.a_dim).map(|_| crate::lie::normal(rng)).collect();
            let dot: f64 = v.iter().zip(&h).map(|(a, b)| a * b).sum();
            if hh > 0.0 {
                v.iter_mut().zip(&h).for_each(|(a, b)| *a -= dot / hh * b);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 {
                return Ok(v.into_iter().map(|x| x / n).collect());
            }
        }
    }

    /// The codimension-one subalgebra `ξ^⊥` for a unit `ξ ∈ a` orthogonal to `A_H`.
    pub fn codim1_subalgebra(&self, xi: &[f64]) -> Result<Codim1> {
        if self.a_dim < 2 {
            return Err(Error::InvalidXi("rank-one algebra has no admissible ξ".into()));
        }
        if xi.len() != self.a_dim {
            return Err(Error::InvalidXi(format!("ξ must have {} coordinates in a, got {}", self.a_dim, xi.len())));
        }
        let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidXi(format!("ξ is not a unit vector (norm {norm})")));
        }
        let h = self.mean_curvature_vector();
        let dot: f64 = h.iter().zip(xi).map(|(a, b)| a * b).sum();
        if dot.abs() > 1e-10 * h.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0) {
            return Err(Error::InvalidXi(format!("ξ is not orthogonal to A_H (⟨ξ, A_H⟩ = {dot:.3e})")));
        }
        let d = self.dim;
        let mut xi_full = vec![0.0; d];
        xi_full[..self.a_dim].copy_from_slice(xi);
        // Orthonormal basis of ξ^⊥: a ∩ ξ^⊥ first, then n.
        let mut cand = DMatrix::zeros(d, self.a_dim);
        for i in 0..self.a_dim {
            cand[(i, i)] = 1.0;
            for r in 0..self.a_dim {
                cand[(r, i)] -= xi[i] * xi[r];
            }
        }
        let aperp = linalg::gram_schmidt(&cand, &DMatrix::identity(d, d), 1e-8);
        let new_a = aperp.ncols();
        let mut t = DMatrix::zeros(d, d - 1);
        t.view_mut((0, 0), (d, new_a)).copy_from(&aperp);
        for j in 0..self.n_dim() {
            t[(self.a_dim + j, new_a + j)] = 1.0;
        }
        let m = d - 1;
        let mut c = vec![0.0; m * m * m];
        let mut leak: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                let mut br = vec![0.0; d];
                for i in 0..d {
                    for j in 0..d {
                        let w = t[(i, a)] * t[(j, b)];
                        if w == 0.0 {
                            continue;
                        }
                        for l in 0..d {
                            br[l] += w * self.c(i, j, l);
                        }
                    }
                }
                leak = leak.max(br.iter().zip(&xi_full).map(|(p, q)| p * q).sum::<f64>().abs());
                for k in 0..m {
                    c[(a * m + b) * m + k] = (0..d).map(|l| br[l] * t[(l, k)]).sum();
                }
            }
        }
        // Tr ad_ξ on ξ^⊥.
        let ad_xi = self.ad_of(&xi_full);
        let tr_ad_xi = (0..m).map(|k| (t.column(k).transpose() * &ad_xi * t.column(k))[0]).sum();
        let elements = self.elements.as_ref().map(|els| {
            let kind = els[0].model;
            (0..m)
                .map(|k| crate::lie::combine(kind, t.column(k).as_slice(), els))
                .collect::<Vec<_>>()
        });
        let algebra = MetricSolvAlgebra { a_dim: new_a, dim: m, c, model: self.model, elements };
        Ok(Codim1 { algebra, xi: xi.to_vec(), closure_leak: leak, tr_ad_xi })
    }
}

#[derive(Clone, Debug)]
pub struct Codim1 {
    pub algebra: MetricSolvAlgebra,
    pub xi: Vec<f64>,
    /// Largest `|⟨[X, Y], ξ⟩|` over basis pairs of `ξ^⊥`.
    pub closure_leak: f64,
    /// Trace of `ad_ξ` restricted to `ξ^⊥`.
    pub tr_ad_xi: f64,
}

/// Certificate printed and serialized by the `iwasawa` command.
#[derive(Clone, Debug, Serialize)]
pub struct IwasawaCertificate {
    pub model: ModelKind,
    pub dim_k: usize,
    pub dim_a: usize,
    pub dim_n: usize,
    pub dim_g: usize,
    pub lower_central_series: Vec<usize>,
    pub mean_curvature_vector: Vec<f64>,
    pub ricci_spectrum: Vec<f64>,
    pub einstein_constant: f64,
    pub einstein_residual: f64,
    pub ad_a_asymmetry: f64,
    pub ad_mean_curvature_spectrum: Vec<f64>,
    pub xi: Option<Vec<f64>>,
    pub codim1_ricci_spectrum: Option<Vec<f64>>,
    pub codim1_einstein_constant: Option<f64>,
    pub codim1_einstein_residual: Option<f64>,
    pub codim1_closure_leak: Option<f64>,
    pub tr_ad_xi: Option<f64>,
    pub pass: bool,
}

/// Builds `s` for a noncompact model, optionally with `ξ` (default for rank 2),
/// and certifies the Einstein properties at tolerance `tol`.
pub fn certify(model: &AlgebraModel, xi: Option<&[f64]>, tol: f64) -> Result<IwasawaCertificate> {
    let datum = crate::roots::standard_roots(model)?;
    let iw = iwasawa(model, &datum)?;
    let lcs = lower_central_series(model, &iw.n)?;
    let s = MetricSolvAlgebra::from_iwasawa(model, &iw)?;
    let (res, c) = s.einstein_residual();
    let ric_spec = linalg::sym_eigen(&s.ricci()).0;
    let xi = match xi {
        Some(x) => Some(x.to_vec()),
        None if s.a_dim == 2 => Some(s.default_xi()?),
        None => None,
    };
    let sub = xi.as_ref().map(|x| s.codim1_subalgebra(x)).transpose()?;
    let mut pass = res <= tol && s.ad_a_asymmetry() <= tol;
    let (mut sub_spec, mut sub_c, mut sub_res, mut leak, mut tr) = (None, None, None, None, None);
    if let Some(sub) = &sub {
        let (r2, c2) = sub.algebra.einstein_residual();
        pass &= r2 <= tol && (c2 - c).abs() <= tol && sub.tr_ad_xi.abs() <= tol && sub.closure_leak <= tol;
        sub_spec = Some(linalg::sym_eigen(&sub.algebra.ricci()).0);
        sub_c = Some(c2);
        sub_res = Some(r2);
        leak = Some(sub.closure_leak);
        tr = Some(sub.tr_ad_xi);
    }
    Ok(IwasawaCertificate {
        model: model.kind,
        dim_k: iw.k.len(),
        dim_a: iw.a.len(),
        dim_n: iw.n.len(),
        dim_g: model.dim(),
        lower_central_series: lcs,
        mean_curvature_vector: s.mean_curvature_vector(),
        ricci_spectrum: ric_spec,
        einstein_constant: c,
        einstein_residual: res,
        ad_a_asymmetry: s.ad_a_asymmetry(),
        ad_mean_curvature_spectrum: s.ad_mean_curvature_spectrum_on_n(),
        xi,
        codim1_ricci_spectrum: sub_spec,
        codim1_einstein_constant: sub_c,
        codim1_einstein_residual: sub_res,
        codim1_closure_leak: leak,
        tr_ad_xi: tr,
        pass,
    })
}
