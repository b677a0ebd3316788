//! Restricted roots of a Cartan subalgebra `a ⊂ p`.
//!
//! A root `β ∈ a` is a nonzero vector with a nontrivial joint eigenspace
//! `g_β = {X : [A, [A, X]] = −ε⟨β, A⟩² X for all A ∈ a}`. The space is shared
//! by `±β` and splits as `p_β ⊕ k_β`, each of dimension `m_β`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{combine, normal, AlgebraElement, AlgebraModel, ModelKind};
use crate::linalg;

/// Threshold on singular values of `ad_X|p` when computing centralizers.
pub const CENTRALIZER_TOL: f64 = 1e-9;
/// Eigenvalue clustering threshold for multiplicities.
pub const CLUSTER_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct Root {
    /// `⟨β, Aᵢ⟩` over the orthonormal Cartan basis.
    pub coords: Vec<f64>,
    pub element: AlgebraElement,
    pub multiplicity: usize,
    /// Inner-orthonormal basis of `p_β`.
    pub p_basis: Vec<AlgebraElement>,
    /// Frobenius-orthonormal basis of `k_β`.
    pub k_basis: Vec<AlgebraElement>,
    pub positive: bool,
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    pub model: ModelKind,
    /// Inner-orthonormal basis of `a`.
    pub cartan: Vec<AlgebraElement>,
    /// Regular element of `a` fixing the positive set.
    pub covector: AlgebraElement,
    pub roots: Vec<Root>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootSummary {
    pub model: ModelKind,
    pub rank: usize,
    pub covector: Vec<f64>,
    pub roots: Vec<RootEntry>,
    pub dim_p: usize,
    pub dim_a: usize,
    pub sum_positive_multiplicities: usize,
    pub dimension_audit_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootEntry {
    pub coords: Vec<f64>,
    pub multiplicity: usize,
    pub positive: bool,
}

/// Orthonormal basis of `{Y ∈ p : [X, Y] = 0}`.
pub fn centralizer_in_p(model: &AlgebraModel, x: &AlgebraElement) -> Result<Vec<AlgebraElement>> {
    model.p_coords(x)?;
    let pb = model.p_basis();
    let dim = model.dim();
    let mut m = DMatrix::zeros(dim, pb.len());
    for (a, e) in pb.iter().enumerate() {
        let c = model.coords(&model.bracket(x, e)?)?;
        for b in 0..dim {
            m[(b, a)] = c[b];
        }
    }
    let ns = linalg::null_space(&m, CENTRALIZER_TOL);
    Ok((0..ns.ncols()).map(|c| combine(model.kind, ns.column(c).as_slice(), pb)).collect())
}

pub fn is_regular(model: &AlgebraModel, x: &AlgebraElement) -> Result<bool> {
    Ok(centralizer_in_p(model, x)?.len() == model.kind.rank())
}

/// The default regular covector `diag(n, …, 1)` minus its mean (times `i` for
/// su3). Makes `n` the strictly upper triangular matrices.
pub fn default_covector(kind: ModelKind) -> AlgebraElement {
    let n = kind.size();
    let mean = (n as f64 + 1.0) / 2.0;
    let d = DVector::from_iterator(n, (0..n).map(|i| (n - i) as f64 - mean));
    let m = DMatrix::from_diagonal(&d);
    let f = if kind == ModelKind::Su3 { num_complex::Complex64::i() } else { num_complex::Complex64::new(1.0, 0.0) };
    AlgebraElement::new(kind, m.map(|x| f * x))
}

/// Roots of the diagonal Cartan subalgebra with the default covector.
pub fn standard_roots(model: &AlgebraModel) -> Result<RootDatum> {
    restricted_roots(model, &model.diagonal_cartan())
}

pub fn restricted_roots(model: &AlgebraModel, cartan: &[AlgebraElement]) -> Result<RootDatum> {
    restricted_roots_seeded(model, cartan, 0)
}

/// Restricted roots, with `seed` choosing the random regular elements used for
/// the diagonalization. The root set does not depend on the seed.
pub fn restricted_roots_seeded(model: &AlgebraModel, cartan: &[AlgebraElement], seed: u64) -> Result<RootDatum> {
    let rank = model.kind.rank();
    if cartan.len() != rank {
        return Err(Error::InvalidCartan(format!("expected {rank} generators, got {}", cartan.len())));
    }
    for c in cartan {
        if !model.is_in_p(c) {
            return Err(Error::NotInP(model.p_residual(c)));
        }
    }
    for a in cartan {
        for b in cartan {
            let r = model.bracket(a, b)?.frob();
            if r > 1e-10 * (a.frob() * b.frob()).max(1.0) {
                return Err(Error::InvalidCartan(format!("not abelian (bracket norm {r:.3e})")));
            }
        }
    }
    let onb = model.orthonormalize(cartan)?;
    let ads: Vec<DMatrix<f64>> = onb.iter().map(|a| model.ad_matrix(a)).collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rand_sq = || {
        let c: Vec<f64> = (0..rank).map(|_| normal(&mut rng)).collect();
        let ad = ads.iter().zip(&c).fold(DMatrix::zeros(model.dim(), model.dim()), |acc, (m, ci)| acc + m * *ci);
        &ad * &ad
    };
    let m1 = rand_sq();
    let m2 = rand_sq();

    // Eigenspaces of (ad_A)² for a random A, each refined by (ad_A')².
    let (vals, vecs) = linalg::sym_eigen(&m1);
    let scale = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    let mut spaces: Vec<DMatrix<f64>> = Vec::new();
    for (_, idx) in linalg::cluster(&vals, CLUSTER_TOL * scale) {
        let v = DMatrix::from_fn(model.dim(), idx.len(), |r, c| vecs[(r, idx[c])]);
        let restricted = v.transpose() * &m2 * &v;
        let (sv, sw) = linalg::sym_eigen(&restricted);
        for (_, sidx) in linalg::cluster(&sv, CLUSTER_TOL * scale) {
            let w = DMatrix::from_fn(idx.len(), sidx.len(), |r, c| sw[(r, sidx[c])]);
            spaces.push(&v * w);
        }
    }

    let eps = model.kind.epsilon();
    let covector = {
        let d = default_covector(model.kind);
        let proj = onb.iter().fold(AlgebraElement::zero(model.kind), |acc, a| acc.add(&a.scale(model.inner(&d, a).unwrap_or(0.0))));
        if proj.sub(&d).frob() < 1e-10 && is_regular(model, &d)? {
            d
        } else {
            let mut r = ChaCha8Rng::seed_from_u64(0x5eed);
            let c: Vec<f64> = (0..rank).map(|_| normal(&mut r)).collect();
            combine(model.kind, &c, &onb)
        }
    };
    let cov_coords: Vec<f64> = onb.iter().map(|a| model.inner(&covector, a)).collect::<Result<_>>()?;

    let mut roots = Vec::new();
    for v in spaces {
        let dimv = v.ncols();
        let g = DMatrix::from_fn(rank, rank, |i, j| {
            let prod = &ads[i] * &ads[j];
            -eps * (v.transpose() * prod * &v).trace() / dimv as f64
        });
        let k = (0..rank).max_by(|&a, &b| g[(a, a)].total_cmp(&g[(b, b)])).unwrap();
        if g[(k, k)] <= CLUSTER_TOL * scale {
            continue; // centralizer of a
        }
        let mut beta: Vec<f64> = (0..rank).map(|i| g[(i, k)] / g[(k, k)].sqrt()).collect();
        let pairing: f64 = beta.iter().zip(&cov_coords).map(|(b, c)| b * c).sum();
        if pairing < 0.0 {
            beta.iter_mut().for_each(|b| *b = -*b);
        }
        let element = combine(model.kind, &beta, &onb);

        // p- and k-parts of the eigenspace.
        let kd = model.k_dim();
        let elems: Vec<AlgebraElement> = (0..dimv).map(|c| model.from_coords(v.column(c).as_slice())).collect();
        let mut pparts: Vec<AlgebraElement> = Vec::new();
        for e in &elems {
            let (_, p) = model.cartan_split(e);
            if p.frob() > 1e-8 {
                pparts.push(p);
            }
        }
        let pcoords: Vec<Vec<f64>> = pparts.iter().map(|p| model.p_coords(p)).collect::<Result<_>>()?;
        let pm = DMatrix::from_fn(model.p_dim(), pcoords.len(), |r, c| pcoords[c][r]);
        let q = linalg::gram_schmidt(&pm, &DMatrix::identity(model.p_dim(), model.p_dim()), 1e-6);
        let p_basis: Vec<AlgebraElement> = (0..q.ncols()).map(|c| model.from_p_coords(q.column(c).as_slice())).collect();
        let mult = p_basis.len();
        if 2 * mult != dimv {
            return Err(Error::InvalidCartan(format!("eigenspace of dimension {dimv} has {mult}-dimensional p-part")));
        }
        let kc: Vec<Vec<f64>> = elems
            .iter()
            .map(|e| model.coords(&model.cartan_split(e).0).map(|c| c[..kd].to_vec()))
            .collect::<Result<_>>()?;
        let km = DMatrix::from_fn(kd, kc.len(), |r, c| kc[c][r]);
        let kq = linalg::gram_schmidt(&km, &DMatrix::identity(kd, kd), 1e-6);
        let k_basis: Vec<AlgebraElement> = (0..kq.ncols())
            .map(|c| {
                let mut full = vec![0.0; model.dim()];
                full[..kd].copy_from_slice(kq.column(c).as_slice());
                model.from_coords(&full)
            })
            .collect();
        let neg: Vec<f64> = beta.iter().map(|b| -b).collect();
        roots.push(Root {
            coords: beta,
            element: element.clone(),
            multiplicity: mult,
            p_basis: p_basis.clone(),
            k_basis: k_basis.clone(),
            positive: true,
        });
        roots.push(Root {
            coords: neg,
            element: element.scale(-1.0),
            multiplicity: mult,
            p_basis,
            k_basis,
            positive: false,
        });
    }
    // Deterministic order: positive roots by decreasing pairing with the covector.
    let pair = |r: &Root| r.coords.iter().zip(&cov_coords).map(|(b, c)| b * c).sum::<f64>();
    roots.sort_by(|a, b| pair(b).total_cmp(&pair(a)));
    Ok(RootDatum { model: model.kind, cartan: onb, covector, roots })
}

impl RootDatum {
    pub fn positive_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.positive)
    }

    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    /// `⟨β, A⟩` for `A ∈ a`.
    pub fn pairing(&self, model: &AlgebraModel, root: &Root, a: &AlgebraElement) -> Result<f64> {
        model.inner(&root.element, a)
    }

    /// Finds the root with the given coordinates (tolerance `tol`).
    pub fn find(&self, coords: &[f64], tol: f64) -> Option<&Root> {
        self.roots
            .iter()
            .find(|r| r.coords.iter().zip(coords).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= tol)
    }

    /// `p_β` for a root, `a` for zero, and the empty space otherwise.
    pub fn p_space(&self, coords: &[f64], tol: f64) -> Vec<AlgebraElement> {
        if coords.iter().all(|c| c.abs() <= tol) {
            return self.cartan.clone();
        }
        self.find(coords, tol).map(|r| r.p_basis.clone()).unwrap_or_default()
    }

    /// `θ_β X_β = [A, X_β] / ⟨β, A⟩`, using the element of `a` best paired
    /// with `β`.
    pub fn theta_map(&self, model: &AlgebraModel, root: &Root, x: &AlgebraElement) -> Result<AlgebraElement> {
        let mut best: Option<(f64, &AlgebraElement)> = None;
        for a in std::iter::once(&self.covector).chain(self.cartan.iter()) {
            let b = model.inner(&root.element, a)? / model.p_norm(a)?;
            if best.is_none_or(|(v, _)| b.abs() > v.abs() * 1.5) {
                best = Some((b, a));
            }
        }
        let (_, a) = best.expect("cartan is nonempty");
        let pair = model.inner(&root.element, a)?;
        if pair.abs() < 1e-12 {
            return Err(Error::DegenerateRoot);
        }
        Ok(model.bracket(a, x)?.scale(1.0 / pair))
    }

    pub fn summary(&self, model: &AlgebraModel) -> RootSummary {
        let sum: usize = self.positive_roots().map(|r| r.multiplicity).sum();
        RootSummary {
            model: self.model,
            rank: self.rank(),
            covector: self.cartan.iter().map(|a| model.inner(&self.covector, a).unwrap_or(f64::NAN)).collect(),
            roots: self
                .roots
                .iter()
                .map(|r| RootEntry { coords: r.coords.clone(), multiplicity: r.multiplicity, positive: r.positive })
                .collect(),
            dim_p: model.p_dim(),
            dim_a: self.rank(),
            sum_positive_multiplicities: sum,
            dimension_audit_ok: sum + self.rank() == model.p_dim(),
        }
    }
}

/// Hausdorff distance between two root sets (coordinates in a common basis).
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = |x: &Vec<f64>, y: &Vec<f64>| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let one = |s: &[Vec<f64>], t: &[Vec<f64>]| s.iter().map(|x| t.iter().map(|y| d(x, y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}
