//! Extrinsic geometry of the hypersurfaces `M = ∪_{u} S_{F(u)}` swept out by
//! the leaves over a (para-)Legendrian surface, and of codimension-one
//! solvmanifold orbits, with a consolidated verification report.
//!
//! Every quantity is computed from one exact second-order jet of the chart
//! `(u₁, u₂, t₁, t₂) ↦ g(u)·exp(X(t))·o`, expressed in the transported
//! orthonormal frame `dL_h(2Eₐ)` of `T M̃`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::{
    ambient_inner, c3_from_f64, c3_val, expm3, expm3_real, flat_sl, flat_su, inv3, leaf_group_sl, leaf_group_su, push_forward, r3_val,
    tangent_basis_at, unflat_sl, unflat_su, AVec, AmbientPoint, GroupElem, Space, C3, R3,
};
use crate::dual::{cx_real, seed, seed2, Cx, Dual, Jet2, Real};
use crate::error::{Error, Result};
use crate::lie::{combine, AlgebraElement, AlgebraModel};
use crate::linalg;
use crate::solv::Codim1;
use crate::surface::{Frame, SurfaceChart, SurfaceModel};

/// Default sampling box of the leaf coordinates: `t₁` stays clear of the
/// singular set `t₁ = 0` of the adapted frames.
pub const DEFAULT_LEAF_BOX: [[f64; 2]; 2] = [[0.3, 1.5], [-1.0, 1.0]];

#[derive(Clone, Debug)]
pub enum ChartMap {
    Leaves(SurfaceChart),
    /// `y ↦ exp(y₁S₁)⋯exp(y₄S₄)·o` for a basis `Sᵢ` of a codimension-one subalgebra.
    SolvOrbit { elements: Vec<Matrix3<f64>>, xi: AlgebraElement },
}

#[derive(Clone, Debug, Serialize)]
pub struct Anchor {
    pub x: [f64; 4],
    /// Global sign applied to the cofactor normal.
    pub orientation: f64,
}

#[derive(Clone, Debug)]
pub struct HypersurfaceChart {
    pub space: Space,
    pub map: ChartMap,
    /// Sampling box for the last two coordinates.
    pub leaf_box: [[f64; 2]; 2],
    pub anchor: Anchor,
    lie: AlgebraModel,
}

/// Everything the checks need at one chart point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub x: [f64; 4],
    pub point: AVec,
    pub group: GroupElem,
    /// Ambient-orthonormal frame of `T M̃`.
    pub frame: [AVec; 5],
    pub d1: [AVec; 4],
    pub d2: [[AVec; 4]; 4],
    /// Chart tangents in the frame (4 × 5).
    pub coords: DMatrix<f64>,
    pub gram: DMatrix<f64>,
    pub xi_coords: DVector<f64>,
    pub xi: AlgebraElement,
    pub normal: AVec,
    pub second_form: DMatrix<f64>,
    pub shape: DMatrix<f64>,
    /// `⟨R̃_ξ ∂ᵢ, ∂ⱼ⟩`.
    pub jacobi: DMatrix<f64>,
    pub tangency_residual: f64,
}

fn avec(a: &[f64; 18]) -> AVec {
    AVec::from_column_slice(a)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn frame_point<T: Real>(f: &Frame<T>) -> [T; 18] {
    match f {
        Frame::Su(h) => flat_su(&(h * h.transpose())),
        Frame::Sl(h) => {
            let hi = inv3(h);
            flat_sl(&(h * h.transpose()), &(hi.transpose() * hi))
        }
    }
}

impl HypersurfaceChart {
    /// The union of leaves over `surface`; the surface model must match the space.
    pub fn new(surface: SurfaceChart, space: Space) -> Result<Self> {
        let ok = matches!(
            (surface.model, space),
            (SurfaceModel::Legendrian, Space::Su3So3) | (SurfaceModel::Para | SurfaceModel::Affine, Space::Sl3So3)
        );
        if !ok {
            return Err(Error::WrongSurfaceModel(format!("{:?} chart '{}' does not live over {}", surface.model, surface.name, space.name())));
        }
        let u = anchor_u(&surface);
        let x = [u[0], u[1], 0.5 * (DEFAULT_LEAF_BOX[0][0] + DEFAULT_LEAF_BOX[0][1]), 0.0];
        let mut chart = Self {
            space,
            map: ChartMap::Leaves(surface),
            leaf_box: DEFAULT_LEAF_BOX,
            anchor: Anchor { x, orientation: 1.0 },
            lie: AlgebraModel::new(space.lie_kind()),
        };
        chart.fix_orientation()?;
        Ok(chart)
    }

    /// The orbit through `o` of the connected subgroup with Lie algebra `ξ^⊥ ⊂ s`
    /// (SL(3)/SO(3) only).
    pub fn solv_orbit(sub: &Codim1) -> Result<Self> {
        let els = sub.algebra.elements.as_ref().ok_or_else(|| Error::Precondition("subalgebra carries no matrix realization".into()))?;
        if els.len() != 4 || els[0].model != crate::lie::ModelKind::Sl3 {
            return Err(Error::Precondition("solvmanifold orbits are available for sl3 only".into()));
        }
        let lie = AlgebraModel::new(crate::lie::ModelKind::Sl3);
        let elements = els.iter().map(|e| Matrix3::from_fn(|i, j| e.mat[(i, j)].re)).collect();
        // ξ ∈ a: the unit vector of a orthogonal to ξ^⊥ ∩ a.
        let aperp = lie.cartan_split(&els[0]).1;
        let diag = lie.p_basis()[..2].to_vec();
        let c: Vec<f64> = diag.iter().map(|d| lie.inner(d, &aperp).unwrap_or(0.0)).collect();
        let xi = combine(lie.kind, &[-c[1], c[0]], &diag);
        let xi = xi.scale(1.0 / lie.p_norm(&xi)?);
        let mut chart = Self {
            space: Space::Sl3So3,
            map: ChartMap::SolvOrbit { elements, xi },
            leaf_box: [[-0.5, 0.5], [-0.5, 0.5]],
            anchor: Anchor { x: [0.0; 4], orientation: 1.0 },
            lie,
        };
        chart.fix_orientation()?;
        Ok(chart)
    }

    pub fn name(&self) -> String {
        match &self.map {
            ChartMap::Leaves(s) => s.name.clone(),
            ChartMap::SolvOrbit { .. } => "solv_orbit".into(),
        }
    }

    pub fn surface(&self) -> Option<&SurfaceChart> {
        match &self.map {
            ChartMap::Leaves(s) => Some(s),
            ChartMap::SolvOrbit { .. } => None,
        }
    }

    pub fn has_leaves(&self) -> bool {
        matches!(self.map, ChartMap::Leaves(_))
    }

    pub fn lie(&self) -> &AlgebraModel {
        &self.lie
    }

    /// Expected `α` (half the Einstein constant).
    pub fn expected_alpha(&self) -> f64 {
        0.5 * self.space.einstein_constant()
    }

    /// Reference normal at a leaf point: the parallel transport of the
    /// anchor-leaf normal `diag(−2, 1, 1)/√6` (times `i` for su).
    fn reference_normal(&self, x: [f64; 4]) -> AVec {
        match &self.map {
            ChartMap::Leaves(_) => {
                let d = nalgebra::DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 1.0, 1.0])) / (2.0 * 6f64.sqrt());
                let x0 = match self.space {
                    Space::Su3So3 => AlgebraElement::new(self.lie.kind, d.map(|v| num_complex::Complex64::new(0.0, v))),
                    Space::Sl3So3 => AlgebraElement::from_real(self.lie.kind, &d),
                };
                push_forward(&self.group(x), &x0)
            }
            ChartMap::SolvOrbit { xi, .. } => push_forward(&self.group(x), xi),
        }
    }

    fn fix_orientation(&mut self) -> Result<()> {
        let x = self.anchor.x;
        let g = self.geometry_raw(x, 1.0)?;
        let r = self.reference_normal(x);
        let s = ambient_inner(self.space, &g.normal, &r);
        if s.abs() < 1e-6 {
            return Err(Error::Precondition("anchor normal is orthogonal to the reference normal".into()));
        }
        self.anchor.orientation = s.signum();
        Ok(())
    }

    /// `h(x)` with `L_h(o) = F(x)`, generic in the scalar.
    pub fn group_t<T: Real>(&self, x: [T; 4]) -> Frame<T> {
        match &self.map {
            ChartMap::Leaves(s) => match s.frame([x[0], x[1]]) {
                Frame::Su(g) => Frame::Su(leaf_group_su(&g, [x[2], x[3]])),
                Frame::Sl(g) => Frame::Sl(leaf_group_sl(&g, [x[2], x[3]])),
            },
            ChartMap::SolvOrbit { elements, .. } => {
                let mut h = R3::<T>::identity();
                for (k, e) in elements.iter().enumerate() {
                    h *= expm3_real(&e.map(|v| T::cst(v) * x[k]));
                }
                Frame::Sl(h)
            }
        }
    }

    pub fn point_t<T: Real>(&self, x: [T; 4]) -> [T; 18] {
        frame_point(&self.group_t(x))
    }

    pub fn group(&self, x: [f64; 4]) -> GroupElem {
        match self.group_t(x) {
            Frame::Su(h) => GroupElem::Su(c3_val(&h)),
            Frame::Sl(h) => GroupElem::Sl(r3_val(&h)),
        }
    }

    pub fn ambient_point(&self, x: [f64; 4]) -> AmbientPoint {
        let v = avec(&self.point_t(x));
        match self.space {
            Space::Su3So3 => AmbientPoint::Su(unflat_su(&v)),
            Space::Sl3So3 => {
                let (p, pinv) = unflat_sl(&v);
                AmbientPoint::Sl { p, pinv }
            }
        }
    }

    /// First derivatives only: point, tangents, frame coordinates.
    fn first_order(&self, x: [f64; 4]) -> (AVec, [AVec; 4], DMatrix<f64>) {
        let pt: [Dual<f64, 4>; 18] = self.point_t(seed(x));
        let f = AVec::from_fn(|k, _| pt[k].v);
        let d1: [AVec; 4] = std::array::from_fn(|i| AVec::from_fn(|k, _| pt[k].d[i]));
        let e = tangent_basis_at(&self.lie, &self.group(x));
        let c = DMatrix::from_fn(4, 5, |i, a| ambient_inner(self.space, &d1[i], &e[a]));
        (f, d1, c)
    }

    /// Induced metric from the exact first derivatives.
    pub fn metric(&self, x: [f64; 4]) -> DMatrix<f64> {
        let (_, d1, _) = self.first_order(x);
        DMatrix::from_fn(4, 4, |i, j| ambient_inner(self.space, &d1[i], &d1[j]))
    }

    /// Smallest singular value of the chart differential in an orthonormal frame.
    pub fn min_singular_value(&self, x: [f64; 4]) -> f64 {
        let (_, _, c) = self.first_order(x);
        linalg::singular_values(&c)[3]
    }

    fn geometry_raw(&self, x: [f64; 4], orientation: f64) -> Result<PointGeometry> {
        let pt: [Jet2<4>; 18] = self.point_t(seed2(x));
        let point = AVec::from_fn(|k, _| pt[k].value());
        let d1: [AVec; 4] = std::array::from_fn(|i| AVec::from_fn(|k, _| pt[k].grad(i)));
        let d2: [[AVec; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| AVec::from_fn(|k, _| pt[k].hess(i, j))));
        let finite = point.iter().chain(d1.iter().flat_map(|v| v.iter())).chain(d2.iter().flatten().flat_map(|v| v.iter())).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Precondition(format!("chart is not finite at {x:?} (degenerate surface frame)")));
        }
        let group = self.group(x);
        let frame = tangent_basis_at(&self.lie, &group);
        let space = self.space;
        let coords = DMatrix::from_fn(4, 5, |i, a| ambient_inner(space, &d1[i], &frame[a]));
        let mut tangency_residual: f64 = 0.0;
        for i in 0..4 {
            let mut w = d1[i];
            for a in 0..5 {
                w -= frame[a] * coords[(i, a)];
            }
            tangency_residual = tangency_residual.max(w.norm() / d1[i].norm().max(1.0));
        }
        let gram = &coords * coords.transpose();
        let (gev, _) = linalg::sym_eigen(&gram);
        if gev[0] <= 1e-10 {
            return Err(Error::RankDeficient(gev[0].max(0.0).sqrt()));
        }
        // Generalized cross product: det[C; n] = |n|² > 0.
        let mut n = DVector::zeros(5);
        for k in 0..5 {
            let minor = DMatrix::from_fn(4, 4, |i, j| coords[(i, if j < k { j } else { j + 1 })]);
            n[k] = if k % 2 == 0 { 1.0 } else { -1.0 } * minor.determinant();
        }
        let nn = n.norm();
        let xi_coords = n * (orientation / nn);
        let pb = self.lie.p_basis();
        let xi = combine(self.lie.kind, xi_coords.as_slice(), pb);
        let mut normal = AVec::zeros();
        for a in 0..5 {
            normal += frame[a] * xi_coords[a];
        }
        let second_form = symmetrize(&DMatrix::from_fn(4, 4, |i, j| ambient_inner(space, &normal, &d2[i][j])));
        let ginv = gram.clone().try_inverse().ok_or(Error::RankDeficient(0.0))?;
        let shape = &ginv * &second_form;
        let j5 = self.lie.jacobi_operator(&xi)?;
        let jacobi = symmetrize(&(&coords * j5 * coords.transpose()));
        Ok(PointGeometry { x, point, group, frame, d1, d2, coords, gram, xi_coords, xi, normal, second_form, shape, jacobi, tangency_residual })
    }

    pub fn geometry(&self, x: [f64; 4]) -> Result<PointGeometry> {
        self.geometry_raw(x, self.anchor.orientation)
    }

    /// `u`-part of the chart domain (with excluded loci).
    pub fn in_domain(&self, x: [f64; 4]) -> bool {
        match &self.map {
            ChartMap::Leaves(s) => s.in_domain([x[0], x[1]]),
            ChartMap::SolvOrbit { .. } => true,
        }
    }
}

fn anchor_u(s: &SurfaceChart) -> [f64; 2] {
    let mid = |k: usize| 0.5 * (s.domain[k][0] + s.domain[k][1]);
    let c = [mid(0), mid(1)];
    if s.in_domain(c) {
        return c;
    }
    for r in 1..20 {
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 1.0)] {
            let w = [
                c[0] + a * r as f64 * 0.05 * (s.domain[0][1] - s.domain[0][0]),
                c[1] + b * r as f64 * 0.05 * (s.domain[1][1] - s.domain[1][0]),
            ];
            if s.in_domain(w) {
                return w;
            }
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Named operations

pub fn first_fundamental_form(chart: &HypersurfaceChart, x: [f64; 4]) -> Result<DMatrix<f64>> {
    Ok(chart.geometry(x)?.gram)
}

pub fn unit_normal(chart: &HypersurfaceChart, x: [f64; 4]) -> Result<AVec> {
    Ok(chart.geometry(x)?.normal)
}

/// `S = G⁻¹h` in the chart basis.
pub fn shape_operator(chart: &HypersurfaceChart, x: [f64; 4]) -> Result<DMatrix<f64>> {
    Ok(chart.geometry(x)?.shape)
}

/// `⟨R̃_ξ ∂ᵢ, ∂ⱼ⟩` in the chart basis.
pub fn jacobi_restriction(chart: &HypersurfaceChart, x: [f64; 4]) -> Result<DMatrix<f64>> {
    Ok(chart.geometry(x)?.jacobi)
}

/// `Ric = c·G − R̃_ξ + H·h − h G⁻¹ h`.
pub fn gauss_equation_ricci(chart: &HypersurfaceChart, x: [f64; 4]) -> Result<DMatrix<f64>> {
    Ok(gauss_ricci_of(&chart.geometry(x)?, chart.space.einstein_constant()))
}

fn gauss_ricci_of(g: &PointGeometry, c: f64) -> DMatrix<f64> {
    let h = &g.second_form;
    let hs = h * &g.shape;
    let mean = g.shape.trace();
    symmetrize(&(&g.gram * c - &g.jacobi + h * mean - hs))
}

/// Intrinsic Ricci tensor of a metric given pointwise, by central differences:
/// Christoffel symbols from differenced metrics, curvature from differenced
/// Christoffel symbols.
pub fn fd_ricci<F>(metric: F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    let n = x.len();
    let shift = |y: &[f64], k: usize, s: f64| {
        let mut w = y.to_vec();
        w[k] += s;
        w
    };
    let christoffel = |y: &[f64]| -> Vec<f64> {
        let g = metric(y);
        let ginv = g.clone().try_inverse().unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN));
        let dg: Vec<DMatrix<f64>> = (0..n).map(|l| (metric(&shift(y, l, h)) - metric(&shift(y, l, -h))) / (2.0 * h)).collect();
        // gam[(k * n + i) * n + j] = Γ^k_ij
        let mut gam = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    gam[(k * n + i) * n + j] = 0.5 * s;
                }
            }
        }
        gam
    };
    let g0 = christoffel(x);
    let dgam: Vec<Vec<f64>> = (0..n)
        .map(|m| {
            let a = christoffel(&shift(x, m, h));
            let b = christoffel(&shift(x, m, -h));
            a.iter().zip(&b).map(|(p, q)| (p - q) / (2.0 * h)).collect()
        })
        .collect();
    let gm = |k: usize, i: usize, j: usize| g0[(k * n + i) * n + j];
    let mut ric = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += dgam[i][(i * n + j) * n + k] - dgam[k][(i * n + i) * n + j];
                for p in 0..n {
                    s += gm(i, i, p) * gm(p, j, k) - gm(i, k, p) * gm(p, i, j);
                }
            }
            ric[(j, k)] = s;
        }
    }
    symmetrize(&ric)
}

/// Finite-difference intrinsic Ricci of `M` at `x` with step `h`.
pub fn intrinsic_ricci_fd(chart: &HypersurfaceChart, x: [f64; 4], h: f64) -> Result<DMatrix<f64>> {
    for i in 0..4 {
        for j in 0..4 {
            for (a, b) in [(2.0, 0.0), (-2.0, 0.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut y = x;
                y[i] += a * h;
                y[j] += b * h;
                if !chart.in_domain(y) {
                    return Err(Error::StencilOutsideDomain);
                }
            }
        }
    }
    Ok(fd_ricci(|y| chart.metric([y[0], y[1], y[2], y[3]]), &x, h))
}

/// Finite-difference Gauss curvature of the leaf through `x` (leaf charts only).
pub fn leaf_curvature_fd(chart: &HypersurfaceChart, x: [f64; 4], h: f64) -> Result<f64> {
    if !chart.has_leaves() {
        return Err(Error::Precondition("chart has no leaf coordinates".into()));
    }
    let metric = |t: &[f64]| {
        let g = chart.metric([x[0], x[1], t[0], t[1]]);
        DMatrix::from_fn(2, 2, |i, j| g[(i + 2, j + 2)])
    };
    let ric = fd_ricci(metric, &[x[2], x[3]], h);
    let g = metric(&[x[2], x[3]]);
    Ok((g.clone().try_inverse().ok_or(Error::RankDeficient(0.0))? * ric).trace() / 2.0)
}

/// Relative disagreement `‖Ric_fd − Ric_gauss‖ / ‖G‖`.
pub fn oracle_disagreement(chart: &HypersurfaceChart, x: [f64; 4], h: f64) -> Result<f64> {
    let geo = chart.geometry(x)?;
    let gauss = gauss_ricci_of(&geo, chart.space.einstein_constant());
    let fd = intrinsic_ricci_fd(chart, x, h)?;
    Ok(linalg::frobenius(&(fd - gauss)) / linalg::frobenius(&geo.gram))
}

/// G-orthonormal tangent vectors as p-elements.
fn transported(chart: &HypersurfaceChart, g: &PointGeometry, v: &DVector<f64>) -> AlgebraElement {
    let e = g.coords.transpose() * v;
    combine(chart.lie.kind, e.as_slice(), chart.lie.p_basis())
}

/// Rank of `X ↦ ([X, ξ], −SX)` on `T_xM`; its nullity is `dim(ker S ∩ ker R̃_ξ)`.
pub fn gauss_map_singular_values(chart: &HypersurfaceChart, g: &PointGeometry) -> Result<Vec<f64>> {
    let w = linalg::inv_sqrt_spd(&g.gram).ok_or(Error::RankDeficient(0.0))?;
    let mut rows = DMatrix::zeros(4, 18 + 5);
    for j in 0..4 {
        let v = w.column(j).into_owned();
        let y = transported(chart, g, &v);
        let b = chart.lie.bracket(&y, &g.xi)?;
        for (k, z) in b.mat.iter().enumerate() {
            rows[(j, 2 * k)] = z.re;
            rows[(j, 2 * k + 1)] = z.im;
        }
        let sv = g.coords.transpose() * (&g.shape * &v);
        for a in 0..5 {
            rows[(j, 18 + a)] = -sv[a];
        }
    }
    Ok(linalg::singular_values(&rows))
}

pub fn gauss_map_rank(chart: &HypersurfaceChart, x: [f64; 4], rel_tol: f64) -> Result<usize> {
    let g = chart.geometry(x)?;
    let s = gauss_map_singular_values(chart, &g)?;
    Ok(rank_of(&s, rel_tol))
}

fn rank_of(s: &[f64], rel_tol: f64) -> usize {
    let top = s.first().copied().unwrap_or(0.0).max(1.0);
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Shape-operator eigenframe ordered `(X₁, X₂, X₃, X₄)`: the two largest
/// `|λ|` first (ascending), then the kernel directions.
#[derive(Clone, Debug)]
pub struct EigenFrame {
    pub lambda: [f64; 4],
    pub vectors: DMatrix<f64>,
}

pub fn eigen_frame(g: &PointGeometry) -> Result<EigenFrame> {
    let (vals, vecs) = linalg::gen_sym_eigen(&g.second_form, &g.gram).ok_or(Error::RankDeficient(0.0))?;
    let mut idx: Vec<usize> = (0..4).collect();
    idx.sort_by(|&a, &b| vals[b].abs().total_cmp(&vals[a].abs()));
    let (mut i1, mut i2) = (idx[0], idx[1]);
    if vals[i1] > vals[i2] {
        std::mem::swap(&mut i1, &mut i2);
    }
    let (i3, i4) = (idx[2].min(idx[3]), idx[2].max(idx[3]));
    let order = [i1, i2, i3, i4];
    Ok(EigenFrame { lambda: order.map(|i| vals[i]), vectors: DMatrix::from_fn(4, 4, |r, c| vecs[(r, order[c])]) })
}

/// The two combinations `(b + c, d − a)` with `a = R̃(X₃,X₁,X₁,ξ)`,
/// `b = R̃(X₄,X₁,X₁,ξ)`, `c = R̃(X₃,X₁,X₂,ξ)`, `d = R̃(X₄,X₁,X₂,ξ)`.
pub fn kahler_combinations(lie: &AlgebraModel, x: &[AlgebraElement; 4], xi: &AlgebraElement) -> Result<(f64, f64)> {
    let a = lie.curvature4(&x[2], &x[0], &x[0], xi)?;
    let b = lie.curvature4(&x[3], &x[0], &x[0], xi)?;
    let c = lie.curvature4(&x[2], &x[0], &x[1], xi)?;
    let d = lie.curvature4(&x[3], &x[0], &x[1], xi)?;
    Ok((b + c, d - a))
}

/// Kähler residual at a `λ`-generic point; `None` where `|λ₁ − λ₂| ≤ gap`.
/// The complex structure is fixed up to orientation by the frame, so the
/// smaller residual over the two orientations of `(X₃, X₄)` is reported.
pub fn kahler_residual(chart: &HypersurfaceChart, x: [f64; 4], gap: f64) -> Result<Option<f64>> {
    let g = chart.geometry(x)?;
    let ef = eigen_frame(&g)?;
    kahler_of(chart, &g, &ef, gap)
}

fn frame_elements(chart: &HypersurfaceChart, g: &PointGeometry, ef: &EigenFrame) -> [AlgebraElement; 4] {
    std::array::from_fn(|k| transported(chart, g, &ef.vectors.column(k).into_owned()))
}

fn kahler_of(chart: &HypersurfaceChart, g: &PointGeometry, ef: &EigenFrame, gap: f64) -> Result<Option<f64>> {
    if (ef.lambda[1] - ef.lambda[0]).abs() <= gap {
        return Ok(None);
    }
    let mut xs = frame_elements(chart, g, ef);
    let (p, q) = kahler_combinations(&chart.lie, &xs, &g.xi)?;
    xs[3] = xs[3].scale(-1.0);
    let (r, s) = kahler_combinations(&chart.lie, &xs, &g.xi)?;
    Ok(Some(p.abs().max(q.abs()).min(r.abs().max(s.abs()))))
}

/// Gauss curvature of the leaf from its second fundamental form in the flat ambient.
fn leaf_curvature_of(space: Space, g: &PointGeometry) -> f64 {
    let t = [g.d1[2], g.d1[3]];
    let gl = nalgebra::Matrix2::from_fn(|i, j| ambient_inner(space, &t[i], &t[j]));
    let gi = gl.try_inverse().unwrap_or_else(nalgebra::Matrix2::zeros);
    let nrm = |w: &AVec| {
        let c = nalgebra::Vector2::new(ambient_inner(space, &t[0], w), ambient_inner(space, &t[1], w));
        let k = gi * c;
        w - t[0] * k[0] - t[1] * k[1]
    };
    let n11 = nrm(&g.d2[2][2]);
    let n22 = nrm(&g.d2[3][3]);
    let n12 = nrm(&g.d2[2][3]);
    (ambient_inner(space, &n11, &n22) - ambient_inner(space, &n12, &n12)) / gl.determinant()
}

/// Distance of `F_{tᵢtⱼ}`'s `T M̃`-component from the leaf tangent plane.
fn leaf_geodesy_of(g: &PointGeometry) -> f64 {
    let t = DMatrix::from_fn(5, 2, |a, k| g.coords[(k + 2, a)]);
    let q = t.clone().qr().q();
    let mut worst: f64 = 0.0;
    for (i, j) in [(2, 2), (2, 3), (3, 3)] {
        let w = DVector::from_fn(5, |a, _| ambient_inner_frame(g, a, &g.d2[i][j]));
        let r = &w - &q * (q.transpose() * &w);
        worst = worst.max(r.norm());
    }
    worst
}

fn ambient_inner_frame(g: &PointGeometry, a: usize, w: &AVec) -> f64 {
    let space = match g.group {
        GroupElem::Su(_) => Space::Su3So3,
        GroupElem::Sl(_) => Space::Sl3So3,
    };
    ambient_inner(space, &g.frame[a], w)
}

/// `max |S ∂_{tᵢ}| / |∂_{tᵢ}|`.
fn xi_parallel_of(g: &PointGeometry) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 2..4 {
        let v = g.shape.column(i).into_owned();
        let n = (v.transpose() * &g.gram * &v)[0].max(0.0).sqrt();
        worst = worst.max(n / g.gram[(i, i)].sqrt());
    }
    worst
}

// ---------------------------------------------------------------------------
// Per-sample records and the report

#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    pub u: [f64; 2],
    pub t: [f64; 2],
    pub mean_curvature: f64,
    pub c_estimate: f64,
    pub einstein_constant: f64,
    pub lambda: [f64; 4],
    pub alpha: Vec<f64>,
    pub einstein_residual: f64,
    pub gauss_equation_residual: f64,
    pub gauss_map_rank: usize,
    pub gauss_map_singular_values: Vec<f64>,
    pub leaf_geodesy_residual: Option<f64>,
    pub xi_parallel_residual: Option<f64>,
    pub leaf_curvature: Option<f64>,
    pub holomorphic_curvature: f64,
    pub kahler_residual: Option<f64>,
    pub lambda_gap: f64,
    pub min_singular_value: f64,
    pub gram_min_eigenvalue: f64,
    pub normal_residual: f64,
    pub membership_residual: f64,
    pub consistency_residual: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    pub einstein: f64,
    pub alpha: f64,
    pub lambda_product: f64,
    pub zero_cluster: f64,
    pub gauss_equation: f64,
    pub leaf_geodesy: f64,
    pub xi_parallel: f64,
    pub leaf_curvature: f64,
    pub kahler: f64,
    pub lambda_gap: f64,
    pub rank: f64,
    pub chart: f64,
    pub minimal: f64,
}

impl Tolerances {
    pub fn analytic(einstein: f64) -> Self {
        Self {
            einstein,
            alpha: 1e-8,
            lambda_product: 1e-7,
            zero_cluster: 1e-6,
            gauss_equation: 1e-6,
            leaf_geodesy: 1e-8,
            xi_parallel: 1e-8,
            leaf_curvature: 1e-6,
            kahler: 1e-8,
            lambda_gap: 1e-6,
            rank: 1e-8,
            chart: 1e-10,
            minimal: 1e-6,
        }
    }

    /// Finite-difference charts: every residual check runs at `tol`.
    pub fn finite_difference(tol: f64) -> Self {
        let mut t = Self::analytic(tol);
        for v in [&mut t.alpha, &mut t.lambda_product, &mut t.zero_cluster, &mut t.gauss_equation, &mut t.leaf_geodesy, &mut t.xi_parallel, &mut t.leaf_curvature, &mut t.kahler] {
            *v = v.max(tol);
        }
        t.rank = 1e-5;
        t.minimal = t.minimal.max(tol);
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.is_pass() { "PASS" } else { "FAIL" })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Aggregates {
    pub max: BTreeMap<String, f64>,
    pub mean: BTreeMap<String, f64>,
    pub min_einstein_residual: f64,
    pub einstein_constant_mean: f64,
    pub c_estimate_mean: f64,
    pub lambda_product_mean: f64,
    pub alpha_clusters: Vec<Cluster>,
    pub gauss_map_ranks: BTreeMap<String, usize>,
    pub lambda_generic_samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub space: Space,
    pub surface: String,
    pub derivative_mode: String,
    pub seed: u64,
    pub samples_requested: usize,
    pub samples_accepted: usize,
    pub samples_rejected: usize,
    pub anchor: Anchor,
    pub einstein_constant_expected: f64,
    pub alpha_expected: f64,
    pub tolerances: Tolerances,
    pub aggregates: Aggregates,
    pub verdicts: BTreeMap<String, Verdict>,
    /// Properties reported but not required (e.g. minimality).
    pub observations: BTreeMap<String, Verdict>,
    pub records: Vec<SampleRecord>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| v.is_pass())
    }
}

/// Evaluates the full per-sample record at `x`.
pub fn evaluate(chart: &HypersurfaceChart, x: [f64; 4], tol: &Tolerances) -> Result<SampleRecord> {
    let g = chart.geometry(x)?;
    let c = chart.space.einstein_constant();
    let w = linalg::inv_sqrt_spd(&g.gram).ok_or(Error::RankDeficient(0.0))?;
    let h = &g.second_form;
    let ginv = g.gram.clone().try_inverse().ok_or(Error::RankDeficient(0.0))?;
    let hgh = symmetrize(&(h * &ginv * h));
    let mean = g.shape.trace();
    let ric = gauss_ricci_of(&g, c);
    let dev = &w * (&ric - &g.gram * c) * &w;
    let einstein_residual = linalg::frobenius(&dev) / 2.0;
    let einstein_constant = (&w * &ric * &w).trace() / 4.0;
    let traceless_part = &w * (&g.jacobi + &hgh - h * mean) * &w;
    let c_estimate = traceless_part.trace() / 4.0;
    let gauss_equation_residual = linalg::frobenius(&traceless_part);

    let (alpha, avecs) = linalg::gen_sym_eigen(&g.jacobi, &g.gram).ok_or(Error::RankDeficient(0.0))?;
    let ef = eigen_frame(&g)?;
    let lambda_gap = (ef.lambda[1] - ef.lambda[0]).abs();
    let resid_alpha = linalg::frobenius(&(&g.jacobi * &avecs - &g.gram * &avecs * DMatrix::from_diagonal(&DVector::from_vec(alpha.clone()))));
    let consistency_residual = (mean - ef.lambda.iter().sum::<f64>()).abs() + resid_alpha;

    let sv = gauss_map_singular_values(chart, &g)?;
    let gauss_map_rank = rank_of(&sv, tol.rank);
    let xs = frame_elements(chart, &g, &ef);
    let holomorphic_curvature = chart.lie.curvature4(&xs[0], &xs[1], &xs[1], &xs[0])? + ef.lambda[0] * ef.lambda[1];
    let kahler_residual = kahler_of(chart, &g, &ef, tol.lambda_gap)?;

    let (leaf_geodesy_residual, xi_parallel_residual, leaf_curvature) = if chart.has_leaves() {
        (Some(leaf_geodesy_of(&g)), Some(xi_parallel_of(&g)), Some(leaf_curvature_of(chart.space, &g)))
    } else {
        (None, None, None)
    };
    let normal_residual = (0..4).map(|i| ambient_inner(chart.space, &g.normal, &g.d1[i]).abs()).fold(0.0, f64::max);
    let membership_residual = chart.ambient_point(x).membership_residual();
    let (gev, _) = linalg::sym_eigen(&g.gram);
    let csv = linalg::singular_values(&g.coords);
    Ok(SampleRecord {
        u: [x[0], x[1]],
        t: [x[2], x[3]],
        mean_curvature: mean,
        c_estimate,
        einstein_constant,
        lambda: ef.lambda,
        alpha,
        einstein_residual,
        gauss_equation_residual,
        gauss_map_rank,
        gauss_map_singular_values: sv,
        leaf_geodesy_residual,
        xi_parallel_residual,
        leaf_curvature,
        holomorphic_curvature,
        kahler_residual,
        lambda_gap,
        min_singular_value: csv[3],
        gram_min_eigenvalue: gev[0],
        normal_residual,
        membership_residual,
        consistency_residual,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SamplingPlan {
    pub samples: usize,
    pub seed: u64,
    /// Samples whose Gram matrix has a smaller eigenvalue are rejected.
    pub margin: f64,
    pub max_reject_fraction: f64,
}

impl SamplingPlan {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, margin: 1e-4, max_reject_fraction: 0.2 }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0 / base as f64;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f /= base as f64;
    }
    r
}

/// Candidate chart points: a Cranley–Patterson-shifted Halton sequence in the
/// chart box, skipping excluded loci.
pub fn candidate_points(chart: &HypersurfaceChart, plan: &SamplingPlan) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let shift: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
    let boxes: [[f64; 2]; 4] = match &chart.map {
        ChartMap::Leaves(s) => [s.domain[0], s.domain[1], chart.leaf_box[0], chart.leaf_box[1]],
        ChartMap::SolvOrbit { .. } => [[-0.5, 0.5], [-0.5, 0.5], chart.leaf_box[0], chart.leaf_box[1]],
    };
    let bases = [2u64, 3, 5, 7];
    let mut out = Vec::with_capacity(plan.samples);
    let mut k = 1u64;
    while out.len() < plan.samples && k < 50 * plan.samples as u64 + 100 {
        let x: [f64; 4] = std::array::from_fn(|d| {
            let v = (radical_inverse(k, bases[d]) + shift[d]).fract();
            boxes[d][0] + v * (boxes[d][1] - boxes[d][0])
        });
        k += 1;
        if chart.in_domain(x) {
            out.push(x);
        }
    }
    out
}

/// Evaluates every check over the sampling plan and aggregates verdicts.
pub fn einstein_report(chart: &HypersurfaceChart, plan: &SamplingPlan, tol: &Tolerances) -> Result<VerificationReport> {
    let cands = candidate_points(chart, plan);
    let results: Vec<Option<Result<SampleRecord>>> = cands
        .par_iter()
        .map(|&x| {
            let g = chart.metric(x);
            let (ev, _) = linalg::sym_eigen(&g);
            if !(ev[0] >= plan.margin) {
                None
            } else {
                Some(evaluate(chart, x, tol))
            }
        })
        .collect();
    let mut records = Vec::new();
    let mut rejected = 0;
    for r in results {
        match r {
            None | Some(Err(Error::RankDeficient(_))) => rejected += 1,
            Some(Err(e)) => return Err(e),
            Some(Ok(rec)) => records.push(rec),
        }
    }
    let total = cands.len();
    if total == 0 || rejected as f64 > plan.max_reject_fraction * total as f64 {
        return Err(Error::SamplingPlan { rejected, total });
    }
    Ok(assemble(chart, plan, tol, records, rejected))
}

fn assemble(chart: &HypersurfaceChart, plan: &SamplingPlan, tol: &Tolerances, records: Vec<SampleRecord>, rejected: usize) -> VerificationReport {
    let c = chart.space.einstein_constant();
    let alpha = 0.5 * c;
    let n = records.len().max(1) as f64;
    let mut agg = Aggregates::default();
    let mut put = |name: &str, vals: Vec<f64>| {
        let m = vals.iter().copied().fold(0.0, f64::max);
        let mean = vals.iter().sum::<f64>() / (vals.len().max(1) as f64);
        agg.max.insert(name.into(), m);
        agg.mean.insert(name.into(), mean);
    };
    let alpha_dev: Vec<f64> = records
        .iter()
        .map(|r| {
            let want = if alpha > 0.0 { [0.0, 0.0, alpha, alpha] } else { [alpha, alpha, 0.0, 0.0] };
            r.alpha.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .collect();
    let lp_dev: Vec<f64> = records.iter().map(|r| (r.lambda[0] * r.lambda[1] - alpha).abs()).collect();
    let lz: Vec<f64> = records.iter().map(|r| r.lambda[2].abs().max(r.lambda[3].abs())).collect();
    let opt = |f: fn(&SampleRecord) -> Option<f64>| records.iter().filter_map(f).collect::<Vec<f64>>();
    put("einstein_residual", records.iter().map(|r| r.einstein_residual).collect());
    put("gauss_equation_residual", records.iter().map(|r| r.gauss_equation_residual).collect());
    put("alpha_deviation", alpha_dev.clone());
    put("lambda_product_deviation", lp_dev.clone());
    put("lambda_zero", lz.clone());
    put("abs_mean_curvature", records.iter().map(|r| r.mean_curvature.abs()).collect());
    put("abs_c_estimate", records.iter().map(|r| r.c_estimate.abs()).collect());
    put("normal_residual", records.iter().map(|r| r.normal_residual).collect());
    put("membership_residual", records.iter().map(|r| r.membership_residual).collect());
    put("consistency_residual", records.iter().map(|r| r.consistency_residual).collect());
    let leaf_target = (4.0 / 3.0) * alpha;
    let holo_dev: Vec<f64> = records.iter().map(|r| (r.holomorphic_curvature - leaf_target).abs()).collect();
    put("holomorphic_curvature_deviation", holo_dev);
    let kahler = opt(|r| r.kahler_residual);
    let leafk: Vec<f64> = opt(|r| r.leaf_curvature).iter().map(|k| (k - leaf_target).abs()).collect();
    let geod = opt(|r| r.leaf_geodesy_residual);
    let xip = opt(|r| r.xi_parallel_residual);
    if chart.has_leaves() {
        put("leaf_geodesy_residual", geod.clone());
        put("xi_parallel_residual", xip.clone());
        put("leaf_curvature_deviation", leafk.clone());
    }
    put("kahler_residual", kahler.clone());
    agg.min_einstein_residual = records.iter().map(|r| r.einstein_residual).fold(f64::INFINITY, f64::min);
    agg.einstein_constant_mean = records.iter().map(|r| r.einstein_constant).sum::<f64>() / n;
    agg.c_estimate_mean = records.iter().map(|r| r.c_estimate).sum::<f64>() / n;
    agg.lambda_product_mean = records.iter().map(|r| r.lambda[0] * r.lambda[1]).sum::<f64>() / n;
    let mut pooled: Vec<f64> = records.iter().flat_map(|r| r.alpha.iter().copied()).collect();
    pooled.sort_by(f64::total_cmp);
    agg.alpha_clusters = linalg::cluster(&pooled, tol.zero_cluster).into_iter().map(|(v, idx)| Cluster { value: v, count: idx.len() }).collect();
    for r in &records {
        *agg.gauss_map_ranks.entry(r.gauss_map_rank.to_string()).or_insert(0) += 1;
    }
    agg.lambda_generic_samples = kahler.len();

    let maxv = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let nonempty = !records.is_empty();
    let mut verdicts = BTreeMap::new();
    let max_e = records.iter().map(|r| r.einstein_residual).fold(0.0, f64::max);
    verdicts.insert("einstein".into(), Verdict::of(nonempty && max_e <= tol.einstein));
    verdicts.insert("jacobi_spectrum".into(), Verdict::of(nonempty && maxv(&alpha_dev) <= tol.alpha));
    verdicts.insert("lambda_structure".into(), Verdict::of(nonempty && maxv(&lp_dev) <= tol.lambda_product && maxv(&lz) <= tol.zero_cluster));
    verdicts.insert(
        "gauss_equation".into(),
        Verdict::of(nonempty && records.iter().all(|r| r.gauss_equation_residual <= tol.gauss_equation)),
    );
    let rank_ok = if chart.has_leaves() { records.iter().all(|r| r.gauss_map_rank == 2) } else { records.iter().all(|r| r.gauss_map_rank <= 3) };
    verdicts.insert("gauss_map_rank".into(), Verdict::of(nonempty && rank_ok));
    if chart.has_leaves() {
        verdicts.insert("leaf_geodesy".into(), Verdict::of(maxv(&geod) <= tol.leaf_geodesy));
        verdicts.insert("xi_parallel".into(), Verdict::of(maxv(&xip) <= tol.xi_parallel));
        verdicts.insert("leaf_curvature".into(), Verdict::of(maxv(&leafk) <= tol.leaf_curvature));
    }
    verdicts.insert("kahler".into(), Verdict::of(!kahler.is_empty() && maxv(&kahler) <= tol.kahler));
    if chart.space == Space::Sl3So3 {
        verdicts.insert("lambda_generic".into(), Verdict::of(nonempty && records.iter().all(|r| r.lambda_gap > tol.lambda_gap)));
    }
    let chart_ok = records.iter().all(|r| r.normal_residual <= tol.chart && r.membership_residual <= tol.chart && r.consistency_residual <= tol.chart);
    verdicts.insert("chart".into(), Verdict::of(nonempty && chart_ok));
    let mut observations = BTreeMap::new();
    observations.insert("minimal".into(), Verdict::of(nonempty && records.iter().all(|r| r.mean_curvature.abs() <= tol.minimal)));

    let mode = match chart.surface().map(|s| s.mode) {
        Some(crate::surface::DerivMode::FiniteDifference { .. }) => "finite-difference",
        _ => "analytic",
    };
    VerificationReport {
        space: chart.space,
        surface: chart.name(),
        derivative_mode: mode.into(),
        seed: plan.seed,
        samples_requested: plan.samples,
        samples_accepted: records.len(),
        samples_rejected: rejected,
        anchor: chart.anchor.clone(),
        einstein_constant_expected: c,
        alpha_expected: alpha,
        tolerances: *tol,
        aggregates: agg,
        verdicts,
        observations,
        records,
    }
}

// ---------------------------------------------------------------------------
// Singular loci

#[derive(Clone, Debug, Serialize)]
pub struct LeafScanPoint {
    pub theta: f64,
    /// Minimizing `t₁`.
    pub t1: f64,
    pub sigma_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularProbe {
    pub u: [f64; 2],
    pub theta_range: [f64; 2],
    pub t1_range: [f64; 2],
    pub threshold: f64,
    pub scan: Vec<LeafScanPoint>,
    /// Scan points with `σ_min` below the threshold.
    pub drops: Vec<LeafScanPoint>,
    /// `max |t₁|` over the drops: the distance from the predicted family `t₁ = 0`.
    pub max_deviation: Option<f64>,
}

/// Scans the leaf through `F(u)`: for each `θ = t₂` on an `n`-point grid,
/// minimizes the chart's smallest singular value over `t₁` and records dips
/// below `threshold` (default `1e−6`).
pub fn singular_locus_probe(chart: &HypersurfaceChart, u: [f64; 2], theta: [f64; 2], t1_range: [f64; 2], n: usize, threshold: f64) -> Result<SingularProbe> {
    if !chart.has_leaves() {
        return Err(Error::Precondition("singular-locus probes need a leaf chart".into()));
    }
    if !chart.in_domain([u[0], u[1], 0.0, 0.0]) {
        return Err(Error::Precondition(format!("u = {u:?} is outside the surface domain")));
    }
    let thetas: Vec<f64> = (0..n).map(|k| if n == 1 { theta[0] } else { theta[0] + (theta[1] - theta[0]) * k as f64 / (n - 1) as f64 }).collect();
    let scan: Vec<LeafScanPoint> = thetas
        .par_iter()
        .map(|&th| {
            let f = |t1: f64| chart.min_singular_value([u[0], u[1], t1, th]);
            let m = 64;
            let grid: Vec<f64> = (0..=m).map(|k| t1_range[0] + (t1_range[1] - t1_range[0]) * k as f64 / m as f64).collect();
            let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
            let k = (0..=m).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
            let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(m)]);
            let r = 0.5 * (5f64.sqrt() - 1.0);
            let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
            let (mut fc, mut fd) = (f(c), f(d));
            for _ in 0..80 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - r * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + r * (b - a);
                    fd = f(d);
                }
                if (b - a).abs() < 1e-13 {
                    break;
                }
            }
            let (t1, s) = if fc < fd { (c, fc) } else { (d, fd) };
            let (t1, s) = if s < vals[k] { (t1, s) } else { (grid[k], vals[k]) };
            LeafScanPoint { theta: th, t1, sigma_min: s }
        })
        .collect();
    let drops: Vec<LeafScanPoint> = scan.iter().filter(|p| p.sigma_min < threshold).cloned().collect();
    let max_deviation = if drops.is_empty() { None } else { Some(drops.iter().map(|p| p.t1.abs()).fold(0.0, f64::max)) };
    Ok(SingularProbe { u, theta_range: theta, t1_range, threshold, scan, drops, max_deviation })
}

// ---------------------------------------------------------------------------
// The symmetric space itself

/// Ricci tensor of `M̃` at `L_g(o)` from the Gauss equation of the flat
/// embedding, in the orthonormal frame `dL_g(2Eₐ)`.
pub fn symmetric_ricci_extrinsic(space: Space, g: &GroupElem) -> Result<DMatrix<f64>> {
    let lie = AlgebraModel::new(space.lie_kind());
    let pb = lie.p_basis();
    let y = seed2([0.0; 5]);
    let pt: [Jet2<5>; 18] = match (space, g) {
        (Space::Su3So3, GroupElem::Su(g0)) => {
            let mut m: C3<Jet2<5>> = C3::zeros();
            for (a, e) in pb.iter().enumerate() {
                m += Matrix3::from_fn(|i, j| Cx::new(Jet2::<5>::cst(e.mat[(i, j)].re), Jet2::<5>::cst(e.mat[(i, j)].im)) * cx_real(y[a]));
            }
            let q = c3_from_f64::<Jet2<5>>(g0) * expm3(&m);
            flat_su(&(q * q.transpose()))
        }
        (Space::Sl3So3, GroupElem::Sl(g0)) => {
            let mut m: R3<Jet2<5>> = R3::zeros();
            for (a, e) in pb.iter().enumerate() {
                m += Matrix3::from_fn(|i, j| Jet2::<5>::cst(e.mat[(i, j)].re) * y[a]);
            }
            let q = g0.map(Jet2::<5>::cst) * expm3_real(&m);
            let qi = inv3(&q);
            flat_sl(&(q * q.transpose()), &(qi.transpose() * qi))
        }
        _ => return Err(Error::Precondition("group element does not match the space".into())),
    };
    let d1: [AVec; 5] = std::array::from_fn(|a| AVec::from_fn(|k, _| pt[k].grad(a)));
    let nrm = |w: AVec| {
        let mut r = w;
        for e in &d1 {
            r -= e * ambient_inner(space, e, &w);
        }
        r
    };
    let ii: Vec<Vec<AVec>> = (0..5).map(|a| (0..5).map(|b| nrm(AVec::from_fn(|k, _| pt[k].hess(a, b)))).collect()).collect();
    let mut ric = DMatrix::zeros(5, 5);
    for b in 0..5 {
        for c in 0..5 {
            let mut s = 0.0;
            for a in 0..5 {
                s += ambient_inner(space, &ii[a][a], &ii[b][c]) - ambient_inner(space, &ii[a][c], &ii[b][a]);
            }
            ric[(b, c)] = s;
        }
    }
    let gram = DMatrix::from_fn(5, 5, |a, b| ambient_inner(space, &d1[a], &d1[b]));
    if linalg::frobenius(&(gram - DMatrix::identity(5, 5))) > 1e-10 {
        return Err(Error::DegenerateBasis("exponential chart is not orthonormal at the origin".into()));
    }
    Ok(symmetrize(&ric))
}
