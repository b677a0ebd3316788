//! Flat-ambient models of SU(3)/SO(3) and SL(3)/SO(3).
//!
//! * `su3so3`: `Q ↦ QQᵗ` into `ℂ^{3×3} ≅ ℝ^18` with `⟨X, Y⟩ = Re Tr(X Y*)`.
//! * `sl3so3`: `Q ↦ (QQᵗ, (QQᵗ)⁻¹)` into `ℝ^{3×3} ⊕ ℝ^{3×3}` with the
//!   indefinite pairing `−½ Tr(P₁Q₂ + Q₁P₂)`.
//!
//! The orbit map sends `X ∈ p` to the tangent vector `2X` (su) or
//! `(2X, −2X)` (sl) at the base point, so the lie-side metric is calibrated
//! to make that an isometry.
//!
//! Ambient vectors are flattened row-major: su interleaves `(re, im)` per
//! entry; sl stores the nine entries of the first slot, then the second.

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dual::{cx_real, Cx, Real};
use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, AlgebraModel, ModelKind};
use crate::linalg;

pub type AVec = SVector<f64, 18>;
pub type C3<T> = Matrix3<Cx<T>>;
pub type R3<T> = Matrix3<T>;

const GROUP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    #[serde(rename = "su3so3")]
    Su3So3,
    #[serde(rename = "sl3so3")]
    Sl3So3,
}

impl Space {
    pub fn lie_kind(self) -> ModelKind {
        match self {
            Space::Su3So3 => ModelKind::Su3,
            Space::Sl3So3 => ModelKind::Sl3,
        }
    }

    pub fn epsilon(self) -> f64 {
        self.lie_kind().epsilon()
    }

    /// Einstein constant of the calibrated symmetric metric.
    pub fn einstein_constant(self) -> f64 {
        0.75 * self.epsilon()
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "su3so3" => Some(Space::Su3So3),
            "sl3so3" => Some(Space::Sl3So3),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Space::Su3So3 => "su3so3",
            Space::Sl3So3 => "sl3so3",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupElem {
    Su(Matrix3<Complex64>),
    Sl(Matrix3<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AmbientPoint {
    Su(Matrix3<Complex64>),
    Sl { p: Matrix3<f64>, pinv: Matrix3<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum LeafLabel {
    Z([Complex64; 3]),
    Pq([f64; 3], [f64; 3]),
}

// ---------------------------------------------------------------------------
// Generic small-matrix helpers

pub fn c3_from_f64<T: Real>(m: &Matrix3<Complex64>) -> C3<T> {
    m.map(|z| Cx::new(T::cst(z.re), T::cst(z.im)))
}

pub fn c3_val<T: Real>(m: &C3<T>) -> Matrix3<Complex64> {
    m.map(|z| Complex64::new(z.re.val(), z.im.val()))
}

pub fn r3_val<T: Real>(m: &R3<T>) -> Matrix3<f64> {
    m.map(|z| z.val())
}

pub fn conj3<T: Real>(m: &C3<T>) -> C3<T> {
    m.map(|z| z.conj())
}

pub fn det3<S>(m: &Matrix3<S>) -> S
where
    S: nalgebra::Scalar + Copy + num_traits::Num,
{
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]) - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Inverse by adjugate (no pivoting; callers keep matrices well away from singular).
pub fn inv3<T: Real>(m: &R3<T>) -> R3<T> {
    let d = det3(m);
    let c = |i: usize, j: usize| {
        let r = |k: usize| (k + i + 1) % 3;
        let s = |k: usize| (k + j + 1) % 3;
        m[(r(0), s(0))] * m[(r(1), s(1))] - m[(r(0), s(1))] * m[(r(1), s(0))]
    };
    // Cyclic index choice makes the cofactor signs implicit.
    R3::from_fn(|i, j| c(j, i) / d)
}

/// Matrix exponential by scaling and squaring a truncated Taylor series.
/// The scaling depends only on the value part, so derivative parts are exact.
pub fn expm3<T: Real>(m: &C3<T>) -> C3<T> {
    let norm = m.iter().map(|z| z.re.val().abs() + z.im.val().abs()).fold(0.0, f64::max) * 3.0;
    let mut s = 0;
    while norm / f64::from(1u32 << s) > 0.25 && s < 40 {
        s += 1;
    }
    let a = m.map(|z| z * T::cst(0.5f64.powi(s)));
    let mut term = C3::<T>::identity();
    let mut sum = C3::<T>::identity();
    for k in 1..=14 {
        term = term * a;
        term = term.map(|z| z / T::cst(k as f64));
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

pub fn expm3_real<T: Real>(m: &R3<T>) -> R3<T> {
    expm3(&m.map(cx_real)).map(|z| z.re)
}

fn herm<T: Real>(a: &[Cx<T>; 3], b: &[Cx<T>; 3]) -> Cx<T> {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

fn cnorm<T: Real>(a: &[Cx<T>; 3]) -> T {
    herm(a, a).re.sqrt()
}

fn cross<S: Copy + num_traits::Num>(a: &[S; 3], b: &[S; 3]) -> [S; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn c3_from_cols<T: Real>(c: [[Cx<T>; 3]; 3]) -> C3<T> {
    C3::from_fn(|i, j| c[j][i])
}

fn r3_from_cols<T: Real>(c: [[T; 3]; 3]) -> R3<T> {
    R3::from_fn(|i, j| c[j][i])
}

// ---------------------------------------------------------------------------
// Frames

/// `g ∈ SU(3)` with first column `Z`: Gram–Schmidt against the standard
/// basis (least-aligned first), third column `conj(Z × v)` so `det g = 1`.
pub fn frame_from_z(z: &[Complex64; 3]) -> Matrix3<Complex64> {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| z[a].norm().total_cmp(&z[b].norm()));
    let mut v = [Complex64::new(0.0, 0.0); 3];
    for &k in &order {
        let mut e = [Complex64::new(0.0, 0.0); 3];
        e[k] = Complex64::new(1.0, 0.0);
        let c = herm(&e, z);
        let w = [e[0] - c * z[0], e[1] - c * z[1], e[2] - c * z[2]];
        let n = cnorm(&w);
        if n > 0.5 {
            v = [w[0] / n, w[1] / n, w[2] / n];
            break;
        }
    }
    let w = cross(z, &v).map(|x| x.conj());
    c3_from_cols([*z, v, w])
}

/// `g ∈ SL(3)` with `g e₁ = p` and `gᵗ q = e₁`.
pub fn frame_from_pq(p: &[f64; 3], q: &[f64; 3]) -> Result<Matrix3<f64>> {
    let pq = dot(p, q);
    if (pq - 1.0).abs() > GROUP_TOL {
        return Err(Error::Precondition(format!("⟨p, q⟩ = {pq}, expected 1")));
    }
    Ok(frame_from_pq_generic(p, q))
}

pub fn frame_from_pq_generic<T: Real>(p: &[T; 3], q: &[T; 3]) -> R3<T> {
    let qn = dot(q, q).sqrt();
    let qh = q.map(|x| x / qn);
    let k = (0..3).min_by(|&a, &b| qh[a].val().abs().total_cmp(&qh[b].val().abs())).unwrap();
    let mut e = [T::zero(); 3];
    e[k] = T::one();
    let c = qh[k];
    let w = [e[0] - c * qh[0], e[1] - c * qh[1], e[2] - c * qh[2]];
    let wn = dot(&w, &w).sqrt();
    let a = w.map(|x| x / wn);
    let b = cross(&qh, &a);
    let s = qn.sqrt();
    r3_from_cols([*p, a.map(|x| x * s), b.map(|x| x * s)])
}

/// Frame adapted to a Legendrian surface: `[Z | Z₁ | Z₂ / det(Z, Z₁, Z₂)]`
/// with `(Z₁, Z₂)` the Gram–Schmidt orthonormalization of `(∂₁Z, ∂₂Z)`.
pub fn frame_adapted_z<T: Real>(z: &[Cx<T>; 3], dz: &[[Cx<T>; 3]; 2]) -> C3<T> {
    let proj = |v: &[Cx<T>; 3], e: &[Cx<T>; 3]| {
        let c = herm(v, e);
        [v[0] - c * e[0], v[1] - c * e[1], v[2] - c * e[2]]
    };
    let v1 = proj(&dz[0], z);
    let n1 = cnorm(&v1);
    let z1 = v1.map(|x| x / cx_real(n1));
    let v2 = proj(&proj(&dz[1], z), &z1);
    let n2 = cnorm(&v2);
    let z2 = v2.map(|x| x / cx_real(n2));
    let g = c3_from_cols([*z, z1, z2]);
    let d = det3(&g);
    c3_from_cols([*z, z1, z2.map(|x| x / d)])
}

/// Frame adapted to a para-Legendrian surface: `[p | ∂_a p | ∂_b p]` where
/// `(a, b)` diagonalizes `B(X, Y) = ⟨∂_X p, ∂_Y q⟩` to `diag(1, −1)`. Falls
/// back to [`frame_from_pq_generic`] where `B` is degenerate or definite.
pub fn frame_adapted_pq<T: Real>(p: &[T; 3], q: &[T; 3], dp: &[[T; 3]; 2], dq: &[[T; 3]; 2]) -> R3<T> {
    let half = T::cst(0.5);
    let b11 = dot(&dp[0], &dq[0]);
    let b22 = dot(&dp[1], &dq[1]);
    let b12 = (dot(&dp[0], &dq[1]) + dot(&dp[1], &dq[0])) * half;
    let scale = b11.val().abs() + b22.val().abs() + b12.val().abs();
    let mean = (b11 + b22) * half;
    let diff = (b11 - b22) * half;
    let rad = (diff * diff + b12 * b12).sqrt();
    let (mu_p, mu_m) = (mean + rad, mean - rad);
    if scale < 1e-8 || mu_p.val() <= 1e-8 * scale || mu_m.val() >= -1e-8 * scale {
        return frame_from_pq_generic(p, q);
    }
    let phi = (b12 * T::cst(2.0)).atan2(b11 - b22) * half;
    let (c, s) = (phi.cos(), phi.sin());
    let (sp, sm) = (mu_p.sqrt(), (-mu_m).sqrt());
    let a = [c / sp, s / sp];
    let b = [-s / sm, c / sm];
    let comb = |w: &[T; 2]| -> [T; 3] { std::array::from_fn(|k| w[0] * dp[0][k] + w[1] * dp[1][k]) };
    let pa = comb(&a);
    let mut pb = comb(&b);
    let mut d = det3(&r3_from_cols([*p, pa, pb]));
    if d.val() < 0.0 {
        pb = pb.map(|x| -x);
        d = -d;
    }
    let f = T::one() / d.sqrt();
    r3_from_cols([*p, pa.map(|x| x * f), pb.map(|x| x * f)])
}

// ---------------------------------------------------------------------------
// Points, actions, inner products

pub fn embed(g: &GroupElem) -> Result<AmbientPoint> {
    match g {
        GroupElem::Su(q) => {
            let res = (q * q.adjoint() - Matrix3::identity()).norm() + (q.determinant() - Complex64::new(1.0, 0.0)).norm();
            if res > GROUP_TOL {
                return Err(Error::NotInGroup(res));
            }
            Ok(AmbientPoint::Su(q * q.transpose()))
        }
        GroupElem::Sl(q) => {
            let res = (q.determinant() - 1.0).abs();
            if res > GROUP_TOL {
                return Err(Error::NotInGroup(res));
            }
            let p = q * q.transpose();
            let pinv = inv3(&p);
            Ok(AmbientPoint::Sl { p, pinv })
        }
    }
}

/// `L_g x = g x gᵗ` (su) and `L_g(P₁, P₂) = (g P₁ gᵗ, g⁻ᵗ P₂ g⁻¹)` (sl).
pub fn act(g: &GroupElem, x: &AmbientPoint) -> Result<AmbientPoint> {
    match (g, x) {
        (GroupElem::Su(g), AmbientPoint::Su(x)) => Ok(AmbientPoint::Su(g * x * g.transpose())),
        (GroupElem::Sl(g), AmbientPoint::Sl { p, pinv }) => {
            let gi = inv3(g);
            Ok(AmbientPoint::Sl { p: g * p * g.transpose(), pinv: gi.transpose() * pinv * gi })
        }
        _ => Err(Error::Precondition("group element and point belong to different models".into())),
    }
}

impl AmbientPoint {
    pub fn space(&self) -> Space {
        match self {
            AmbientPoint::Su(_) => Space::Su3So3,
            AmbientPoint::Sl { .. } => Space::Sl3So3,
        }
    }

    pub fn base(space: Space) -> Self {
        match space {
            Space::Su3So3 => AmbientPoint::Su(Matrix3::identity()),
            Space::Sl3So3 => AmbientPoint::Sl { p: Matrix3::identity(), pinv: Matrix3::identity() },
        }
    }

    pub fn flat(&self) -> AVec {
        match self {
            AmbientPoint::Su(x) => flat_su(&c3_from_f64::<f64>(x)).into(),
            AmbientPoint::Sl { p, pinv } => flat_sl(p, pinv).into(),
        }
    }

    /// Residual of the defining conditions of the model.
    pub fn membership_residual(&self) -> f64 {
        match self {
            AmbientPoint::Su(x) => {
                (x - x.transpose()).norm() + (x * x.adjoint() - Matrix3::identity()).norm() + (x.determinant() - Complex64::new(1.0, 0.0)).norm()
            }
            AmbientPoint::Sl { p, pinv } => {
                let eig = linalg::sym_eigen(&nalgebra::DMatrix::from_fn(3, 3, |i, j| p[(i, j)])).0;
                let pos = if eig[0] > 0.0 { 0.0 } else { -eig[0] + 1.0 };
                (p - p.transpose()).norm() + (p.determinant() - 1.0).abs() + (p * pinv - Matrix3::identity()).norm() + pos
            }
        }
    }
}

pub fn flat_su<T: Real>(x: &C3<T>) -> [T; 18] {
    std::array::from_fn(|k| {
        let e = x[(k / 2 / 3, (k / 2) % 3)];
        if k % 2 == 0 {
            e.re
        } else {
            e.im
        }
    })
}

pub fn flat_sl<T: Real>(p: &R3<T>, pinv: &R3<T>) -> [T; 18] {
    std::array::from_fn(|k| if k < 9 { p[(k / 3, k % 3)] } else { pinv[((k - 9) / 3, (k - 9) % 3)] })
}

pub fn unflat_su(v: &AVec) -> Matrix3<Complex64> {
    Matrix3::from_fn(|i, j| Complex64::new(v[2 * (3 * i + j)], v[2 * (3 * i + j) + 1]))
}

pub fn unflat_sl(v: &AVec) -> (Matrix3<f64>, Matrix3<f64>) {
    (Matrix3::from_fn(|i, j| v[3 * i + j]), Matrix3::from_fn(|i, j| v[9 + 3 * i + j]))
}

/// Gram matrix `J` of the ambient pairing on flattened vectors.
pub fn ambient_metric(space: Space) -> SMatrix<f64, 18, 18> {
    match space {
        Space::Su3So3 => SMatrix::identity(),
        Space::Sl3So3 => {
            let mut j = SMatrix::zeros();
            for a in 0..3 {
                for b in 0..3 {
                    j[(3 * a + b, 9 + 3 * b + a)] = -0.5;
                    j[(9 + 3 * b + a, 3 * a + b)] = -0.5;
                }
            }
            j
        }
    }
}

pub fn ambient_inner(space: Space, u: &AVec, v: &AVec) -> f64 {
    match space {
        Space::Su3So3 => u.dot(v),
        Space::Sl3So3 => {
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += u[3 * a + b] * v[9 + 3 * b + a] + u[9 + 3 * b + a] * v[3 * a + b];
                }
            }
            -0.5 * s
        }
    }
}

/// Generic version of [`ambient_inner`] on flattened jets.
pub fn ambient_inner_t<T: Real>(space: Space, u: &[T; 18], v: &[T; 18]) -> T {
    let mut s = T::zero();
    match space {
        Space::Su3So3 => {
            for k in 0..18 {
                s += u[k] * v[k];
            }
            s
        }
        Space::Sl3So3 => {
            for a in 0..3 {
                for b in 0..3 {
                    s += u[3 * a + b] * v[9 + 3 * b + a] + u[9 + 3 * b + a] * v[3 * a + b];
                }
            }
            s * T::cst(-0.5)
        }
    }
}

// ---------------------------------------------------------------------------
// Tangent spaces and transport

/// Lifts an element of p to the ambient tangent vector at `L_g(o)`.
pub fn push_forward(g: &GroupElem, x: &AlgebraElement) -> AVec {
    match g {
        GroupElem::Su(g) => {
            let xm = Matrix3::from_fn(|i, j| x.mat[(i, j)]);
            let v = g * xm * g.transpose() * Complex64::new(2.0, 0.0);
            flat_su(&c3_from_f64::<f64>(&v)).into()
        }
        GroupElem::Sl(g) => {
            let xm = Matrix3::from_fn(|i, j| x.mat[(i, j)].re);
            let gi = inv3(g);
            flat_sl(&(g * xm * g.transpose() * 2.0), &(gi.transpose() * xm * gi * -2.0)).into()
        }
    }
}

/// The five ambient-orthonormal tangent vectors `dL_g(2Xₐ)`.
pub fn tangent_basis_at(lie: &AlgebraModel, g: &GroupElem) -> [AVec; 5] {
    let pb = lie.p_basis();
    std::array::from_fn(|a| push_forward(g, &pb[a]))
}

/// Group element `g` with `L_g(o) = x`: for su any `Q ∈ SU(3)` with
/// `QQᵗ = x` (from a real simultaneous diagonalization), for sl `P^{1/2}`.
pub fn group_from_point(x: &AmbientPoint) -> Result<GroupElem> {
    match x {
        AmbientPoint::Su(x) => {
            let a = x.map(|z| z.re);
            let b = x.map(|z| z.im);
            // A and B commute for symmetric unitary x; diagonalize a generic combination.
            let m = a + b * std::f64::consts::FRAC_1_SQRT_2 * 1.1;
            let (_, o) = linalg::sym_eigen(&nalgebra::DMatrix::from_fn(3, 3, |i, j| m[(i, j)]));
            let o = Matrix3::from_fn(|i, j| o[(i, j)]);
            let oc = o.map(|v| Complex64::new(v, 0.0));
            let d = oc.transpose() * x * oc;
            let off = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| d[(i, j)].norm()).fold(0.0, f64::max);
            if off > 1e-8 {
                return Err(Error::SqrtFailure(format!("x is not simultaneously diagonalizable (off-diagonal {off:.3e})")));
            }
            let half = Matrix3::from_diagonal(&nalgebra::Vector3::from_fn(|k, _| (d[(k, k)].ln() * 0.5).exp()));
            let mut q = oc * half;
            if q.determinant().re < 0.0 {
                for i in 0..3 {
                    q[(i, 0)] = -q[(i, 0)];
                }
            }
            Ok(GroupElem::Su(q))
        }
        AmbientPoint::Sl { p, .. } => {
            let (vals, v) = linalg::sym_eigen(&nalgebra::DMatrix::from_fn(3, 3, |i, j| p[(i, j)]));
            if vals[0] <= 0.0 {
                return Err(Error::SqrtFailure(format!("P is not positive definite (eigenvalue {:.3e})", vals[0])));
            }
            let v = Matrix3::from_fn(|i, j| v[(i, j)]);
            let d = Matrix3::from_diagonal(&nalgebra::Vector3::from_fn(|k, _| vals[k].sqrt()));
            Ok(GroupElem::Sl(v * d * v.transpose()))
        }
    }
}

/// Gram-orthonormalized tangent basis of `M̃` at `x`.
pub fn tangent_basis(lie: &AlgebraModel, x: &AmbientPoint) -> Result<[AVec; 5]> {
    let g = group_from_point(x)?;
    let raw = tangent_basis_at(lie, &g);
    let space = x.space();
    let mut out: Vec<AVec> = Vec::new();
    for v in raw {
        let mut w = v;
        for _ in 0..2 {
            for e in &out {
                w -= e * ambient_inner(space, e, &w);
            }
        }
        let n = ambient_inner(space, &w, &w);
        if n <= 0.0 {
            return Err(Error::DegenerateBasis("tangent vectors are not spacelike".into()));
        }
        out.push(w / n.sqrt());
    }
    Ok(std::array::from_fn(|k| out[k]))
}

/// Residual of `v` after removing its projection on the tangent basis.
pub fn tangency_residual(space: Space, basis: &[AVec; 5], v: &AVec) -> f64 {
    let mut w = *v;
    for e in basis {
        w -= e * ambient_inner(space, e, v);
    }
    w.norm()
}

/// `dL_{g⁻¹} V` as an element of p: `½ g⁻¹ V g⁻ᵗ` on the first slot.
pub fn transport_raw(lie: &AlgebraModel, g: &GroupElem, v: &AVec) -> AlgebraElement {
    match g {
        GroupElem::Su(g) => {
            let vm = unflat_su(v);
            let gi = g.adjoint();
            let x = gi * vm * gi.transpose() * Complex64::new(0.5, 0.0);
            AlgebraElement::new(lie.kind, nalgebra::DMatrix::from_fn(3, 3, |i, j| x[(i, j)]))
        }
        GroupElem::Sl(g) => {
            let (v1, _) = unflat_sl(v);
            let gi = inv3(g);
            let x = gi * v1 * gi.transpose() * 0.5;
            AlgebraElement::from_real(lie.kind, &nalgebra::DMatrix::from_fn(3, 3, |i, j| x[(i, j)]))
        }
    }
}

/// Transports a tangent vector at `x` to the base point, checking tangency.
pub fn transport_to_origin(lie: &AlgebraModel, x: &AmbientPoint, v: &AVec) -> Result<AlgebraElement> {
    let basis = tangent_basis(lie, x)?;
    let res = tangency_residual(x.space(), &basis, v);
    if res > 1e-8 * v.norm().max(1.0) {
        return Err(Error::NotTangent(res));
    }
    let g = group_from_point(x)?;
    Ok(transport_raw(lie, &g, v))
}

/// Ratio between the ambient norm of the orbit-map image of `X ∈ p` at the
/// base point and `−εB(X, X)`; this is the metric scale on p.
pub fn calibrate_scale(space: Space) -> f64 {
    let raw = AlgebraModel::with_scale(space.lie_kind(), 1.0);
    let x = raw.p_frobenius_basis()[0].clone();
    let g = match space {
        Space::Su3So3 => GroupElem::Su(Matrix3::identity()),
        Space::Sl3So3 => GroupElem::Sl(Matrix3::identity()),
    };
    let v = push_forward(&g, &x);
    ambient_inner(space, &v, &v) / raw.inner(&x, &x).expect("p element")
}

// ---------------------------------------------------------------------------
// Leaves

impl LeafLabel {
    /// Canonical sign: first non-negligible coordinate positive.
    pub fn canonical(self) -> Self {
        match self {
            LeafLabel::Z(z) => {
                let lead = z.iter().find(|c| c.norm() > 1e-12).copied().unwrap_or(Complex64::new(1.0, 0.0));
                let flip = if lead.re.abs() > 1e-12 { lead.re < 0.0 } else { lead.im < 0.0 };
                if flip {
                    LeafLabel::Z(z.map(|c| -c))
                } else {
                    LeafLabel::Z(z)
                }
            }
            LeafLabel::Pq(p, q) => {
                let lead = p.iter().find(|c| c.abs() > 1e-12).copied().unwrap_or(1.0);
                if lead < 0.0 {
                    LeafLabel::Pq(p.map(|c| -c), q.map(|c| -c))
                } else {
                    LeafLabel::Pq(p, q)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LeafLabel::Z(z) => {
                let n: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                if (n - 1.0).abs() > GROUP_TOL {
                    return Err(Error::InvalidLabel(format!("‖Z‖² = {n}")));
                }
            }
            LeafLabel::Pq(p, q) => {
                let d = dot(p, q);
                if (d - 1.0).abs() > GROUP_TOL {
                    return Err(Error::InvalidLabel(format!("⟨p, q⟩ = {d}")));
                }
            }
        }
        Ok(())
    }

    pub fn frame(&self) -> Result<GroupElem> {
        self.validate()?;
        Ok(match self {
            LeafLabel::Z(z) => GroupElem::Su(frame_from_z(z)),
            LeafLabel::Pq(p, q) => GroupElem::Sl(frame_from_pq(p, q)?),
        })
    }
}

/// `P(t) = t₁ diag(1, −1) + t₂ offdiag(1, 1)` embedded in the lower 2×2 block.
pub fn leaf_block<T: Real>(t: [T; 2]) -> R3<T> {
    let mut m = R3::zeros();
    m[(1, 1)] = t[0];
    m[(2, 2)] = -t[0];
    m[(1, 2)] = t[1];
    m[(2, 1)] = t[1];
    m
}

/// Group element `g · exp(X(t))` whose orbit image is the leaf point at `t`,
/// where `X(t) = iP(t)/2` (su) or `P(t)/2` (sl).
pub fn leaf_group_su<T: Real>(g: &C3<T>, t: [T; 2]) -> C3<T> {
    let half = T::cst(0.5);
    let p = leaf_block([t[0] * half, t[1] * half]).map(|x| Cx::new(T::zero(), x));
    g * expm3(&p)
}

pub fn leaf_group_sl<T: Real>(g: &R3<T>, t: [T; 2]) -> R3<T> {
    let half = T::cst(0.5);
    g * expm3_real(&leaf_block([t[0] * half, t[1] * half]))
}

/// Flattened leaf point for a generic-scalar frame.
pub fn leaf_point_su<T: Real>(g: &C3<T>, t: [T; 2]) -> [T; 18] {
    let h = leaf_group_su(g, t);
    flat_su(&(h * h.transpose()))
}

pub fn leaf_point_sl<T: Real>(g: &R3<T>, t: [T; 2]) -> [T; 18] {
    let h = leaf_group_sl(g, t);
    let p = h * h.transpose();
    let hi = inv3(&h);
    flat_sl(&p, &(hi.transpose() * hi))
}

/// `g · blockdiag(1, exp(iP(t))) · gᵗ` (su) or its sl analogue.
pub fn leaf_chart(label: &LeafLabel, t: [f64; 2]) -> Result<AmbientPoint> {
    Ok(match label.frame()? {
        GroupElem::Su(g) => AmbientPoint::Su(unflat_su(&leaf_point_su(&c3_from_f64::<f64>(&g), t).into())),
        GroupElem::Sl(g) => {
            let (p, pinv) = unflat_sl(&leaf_point_sl(&g, t).into());
            AmbientPoint::Sl { p, pinv }
        }
    })
}

/// Defining leaf equation residual: `‖x Z̄ − Z‖` (su) or `‖Pq − p‖` (sl).
pub fn leaf_residual(label: &LeafLabel, x: &AmbientPoint) -> Result<f64> {
    match (label, x) {
        (LeafLabel::Z(z), AmbientPoint::Su(x)) => {
            let zc = nalgebra::Vector3::from_fn(|i, _| z[i].conj());
            let zv = nalgebra::Vector3::from_fn(|i, _| z[i]);
            Ok((x * zc - zv).norm())
        }
        (LeafLabel::Pq(p, q), AmbientPoint::Sl { p: pm, .. }) => {
            let qv = nalgebra::Vector3::from_column_slice(q);
            let pv = nalgebra::Vector3::from_column_slice(p);
            Ok((pm * qv - pv).norm())
        }
        _ => Err(Error::InvalidLabel("label and point belong to different models".into())),
    }
}
