//! Legendrian surfaces in `S⁵ ⊂ ℂ³`, para-Legendrian surfaces in
//! `S⁵₋ = {⟨p, q⟩ = 1} ⊂ ℝ³ ⊕ ℝ³`, and the affine-sphere toolbox.
//!
//! Charts evaluate over any [`Real`] scalar; derivatives come from dual
//! numbers (analytic mode) or from central differences evaluated in the same
//! scalar (finite-difference mode, used for user charts).

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Matrix3x2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ambient::{det3, frame_adapted_pq, frame_adapted_z, C3, R3};
use crate::dual::{cx_real, Cx, Dual, Real};
use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceModel {
    Legendrian,
    Para,
    Affine,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DerivMode {
    Analytic,
    FiniteDifference { h1: f64, h2: f64 },
}

impl DerivMode {
    pub const FD_DEFAULT: DerivMode = DerivMode::FiniteDifference { h1: 1e-5, h2: 1e-4 };
}

/// A parameter region excluded from sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Locus {
    Disc { center: [f64; 2], radius: f64 },
    Band { axis: usize, value: f64, half_width: f64 },
}

impl Locus {
    pub fn contains(&self, u: [f64; 2]) -> bool {
        match self {
            Locus::Disc { center, radius } => ((u[0] - center[0]).powi(2) + (u[1] - center[1]).powi(2)).sqrt() < *radius,
            Locus::Band { axis, value, half_width } => (u[*axis] - value).abs() < *half_width,
        }
    }
}

/// Curves `γ` with `det(γ, γ′, γ″) = 1` for ruled affine spheres.
#[derive(Clone, Debug, PartialEq)]
pub enum Curve {
    /// `(−sin s, cos s, 1)`: rules the hyperboloid `x₁² + x₂² − x₃² = 1`.
    Circle,
    /// `(e^{−3ks}, e^{ks}, e^{2ks})` with `k = 20^{−1/3}`.
    Exponential,
    /// `(1, s, s²/2)`: rules the quadric `x₂² − 2x₁x₃ = 1`.
    Cubic,
    Scaled(Box<Curve>, f64),
}

impl Curve {
    pub fn eval<T: Real>(&self, s: T) -> [T; 3] {
        match self {
            Curve::Circle => [-s.sin(), s.cos(), T::one()],
            Curve::Exponential => {
                let k = T::cst(20f64.powf(-1.0 / 3.0));
                [(T::cst(-3.0) * k * s).exp(), (k * s).exp(), (T::cst(2.0) * k * s).exp()]
            }
            Curve::Cubic => [T::one(), s, s * s * T::cst(0.5)],
            Curve::Scaled(c, f) => c.eval(s).map(|x| x * T::cst(*f)),
        }
    }

    /// `(γ, γ′, γ″)` at `s`.
    pub fn jet<T: Real>(&self, s: T) -> [[T; 3]; 3] {
        let ss = Dual::<Dual<T, 1>, 1> { v: Dual::var(s, 0), d: [Dual::constant(T::one())] };
        let g = self.eval(ss);
        [g.map(|x| x.v.v), g.map(|x| x.v.d[0]), g.map(|x| x.d[0].d[0])]
    }

    pub fn normalization(&self, s: f64) -> f64 {
        let [g, g1, g2] = self.jet(s);
        det3(&Matrix3::from_fn(|i, j| [g, g1, g2][j][i]))
    }
}

#[derive(Clone, Debug)]
pub enum ChartFn {
    LegendrianSphere,
    LegendrianTorus,
    NonLegendrianControl,
    Hyperboloid,
    Hexenhut,
    Rank1Plane,
    UnitSphere,
    Ruled(Curve),
    ExprZ(Box<[[Expr; 2]; 3]>),
    ExprPq(Box<[Expr; 3]>, Box<[Expr; 3]>),
    ExprP(Box<[Expr; 3]>),
    /// `Z ↦ g Z` for a unitary `g`.
    Unitary(Box<SurfaceChart>, Matrix3<Complex64>),
    /// `(p, q) ↦ (g p, g⁻ᵗ q)` for `g ∈ GL(3)`.
    Linear(Box<SurfaceChart>, Matrix3<f64>),
}

#[derive(Clone, Debug)]
pub struct SurfaceChart {
    pub name: String,
    pub model: SurfaceModel,
    pub f: ChartFn,
    /// `[[u₁ min, u₁ max], [u₂ min, u₂ max]]`.
    pub domain: [[f64; 2]; 2],
    pub excluded: Vec<Locus>,
    pub mode: DerivMode,
}

pub const BUILTIN_NAMES: &[&str] = &[
    "legendrian_sphere",
    "legendrian_torus",
    "torus_beta0_control",
    "non_legendrian_control",
    "hyperboloid",
    "hexenhut",
    "rank1_plane",
    "ruled_hyperboloid",
    "ruled_exp",
    "ruled_cubic",
    "unit_sphere",
];

pub fn builtin_surface(name: &str) -> Result<SurfaceChart> {
    use SurfaceModel::*;
    let mk = |model, f, domain| SurfaceChart { name: name.to_string(), model, f, domain, excluded: Vec::new(), mode: DerivMode::Analytic };
    Ok(match name {
        "legendrian_sphere" => mk(Legendrian, ChartFn::LegendrianSphere, [[0.25, PI - 0.25], [0.0, TAU]]),
        "legendrian_torus" => mk(Legendrian, ChartFn::LegendrianTorus, [[0.0, TAU], [0.0, TAU]]),
        "torus_beta0_control" => {
            let g = Matrix3::from_diagonal(&nalgebra::Vector3::new(Complex64::i(), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)));
            let mut c = mk(Legendrian, ChartFn::Unitary(Box::new(builtin_surface("legendrian_torus")?), g), [[0.0, TAU], [0.0, TAU]]);
            c.name = name.into();
            c
        }
        "non_legendrian_control" => mk(Legendrian, ChartFn::NonLegendrianControl, [[0.2, 1.3], [0.0, TAU]]),
        "hyperboloid" => mk(Para, ChartFn::Hyperboloid, [[0.0, TAU], [-1.0, 1.0]]),
        "hexenhut" => mk(Para, ChartFn::Hexenhut, [[0.0, TAU], [-0.8, 0.8]]),
        "rank1_plane" => mk(Para, ChartFn::Rank1Plane, [[-1.5, 1.5], [-1.5, 1.5]]),
        "ruled_hyperboloid" => mk(Para, ChartFn::Ruled(Curve::Circle), [[0.0, TAU], [-1.0, 1.0]]),
        "ruled_exp" => mk(Para, ChartFn::Ruled(Curve::Exponential), [[-1.0, 1.0], [-1.0, 1.0]]),
        "ruled_cubic" => mk(Para, ChartFn::Ruled(Curve::Cubic), [[-1.0, 1.0], [-1.0, 1.0]]),
        "unit_sphere" => mk(Affine, ChartFn::UnitSphere, [[0.25, PI - 0.25], [0.0, TAU]]),
        _ => return Err(Error::Unknown(format!("surface '{name}' (known: {})", BUILTIN_NAMES.join(", ")))),
    })
}

/// Ruled chart `p = γ′(u₁) + u₂ γ(u₁)`, `q = γ″ × γ + u₂ γ′ × γ`, after
/// checking `det(γ, γ′, γ″) = 1` on 50 points of `[s_min, s_max]`.
pub fn ruled_affine_sphere(curve: Curve, s_range: [f64; 2], u2_range: [f64; 2]) -> Result<SurfaceChart> {
    for k in 0..50 {
        let s = s_range[0] + (s_range[1] - s_range[0]) * k as f64 / 49.0;
        let d = curve.normalization(s);
        if (d - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(format!("det(γ, γ′, γ″) = {d} at s = {s}, expected 1")));
        }
    }
    Ok(SurfaceChart {
        name: "ruled".into(),
        model: SurfaceModel::Para,
        f: ChartFn::Ruled(curve),
        domain: [s_range, u2_range],
        excluded: Vec::new(),
        mode: DerivMode::Analytic,
    })
}

fn cross<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn det_cols<T: Real>(a: &[T; 3], b: &[T; 3], c: &[T; 3]) -> T {
    dot(a, &cross(b, c))
}

fn seed_u<T: Real>(u: [T; 2]) -> [Dual<T, 2>; 2] {
    [Dual::var(u[0], 0), Dual::var(u[1], 1)]
}

/// First derivatives of a vector-valued map, either exactly or by central
/// differences with step `h`.
fn jet1<T: Real, const K: usize, V, F>(mode: DerivMode, u: [T; 2], f: F, val: impl Fn(&V) -> [T; K], der: impl Fn(&V, usize) -> [T; K]) -> ([T; K], [[T; K]; 2])
where
    F: Fn([Dual<T, 2>; 2]) -> V,
{
    let exact = f(seed_u(u));
    match mode {
        DerivMode::Analytic => (val(&exact), [der(&exact, 0), der(&exact, 1)]),
        DerivMode::FiniteDifference { h1, .. } => {
            let at = |k: usize, s: f64| {
                let mut w = u;
                w[k] += T::cst(s);
                val(&f(seed_u(w)))
            };
            let d = |k: usize| {
                let (a, b) = (at(k, h1), at(k, -h1));
                std::array::from_fn(|i| (a[i] - b[i]) / T::cst(2.0 * h1))
            };
            (val(&exact), [d(0), d(1)])
        }
    }
}

impl SurfaceChart {
    pub fn with_mode(mut self, mode: DerivMode) -> Self {
        self.mode = mode;
        self
    }

    fn need(&self, models: &[SurfaceModel], what: &str) -> Result<()> {
        if models.contains(&self.model) {
            Ok(())
        } else {
            Err(Error::WrongSurfaceModel(format!("{what} is not defined for {:?} chart '{}'", self.model, self.name)))
        }
    }

    /// `Z(u)` for Legendrian charts.
    pub fn z<T: Real>(&self, u: [T; 2]) -> [Cx<T>; 3] {
        let i = Cx::new(T::zero(), T::one());
        match &self.f {
            ChartFn::LegendrianSphere => {
                let (s1, c1, s2, c2) = (u[0].sin(), u[0].cos(), u[1].sin(), u[1].cos());
                [s1 * c2, s1 * s2, c1].map(|x| i * cx_real(x))
            }
            ChartFn::LegendrianTorus => {
                let f = T::cst(1.0 / 3f64.sqrt());
                let e = |a: T| Cx::new(a.cos(), a.sin()) * i * cx_real(f);
                [e(u[0]), e(u[1]), e(-(u[0] + u[1]))]
            }
            ChartFn::NonLegendrianControl => {
                let (s1, c1) = (u[0].sin(), u[0].cos());
                [cx_real(c1), Cx::new(s1 * u[1].cos(), s1 * u[1].sin()), cx_real(T::zero())]
            }
            ChartFn::ExprZ(e) => std::array::from_fn(|k| Cx::new(e[k][0].eval(&u), e[k][1].eval(&u))),
            ChartFn::Unitary(inner, g) => {
                let z = inner.z(u);
                std::array::from_fn(|r| (0..3).fold(cx_real(T::zero()), |acc, c| acc + Cx::new(T::cst(g[(r, c)].re), T::cst(g[(r, c)].im)) * z[c]))
            }
            _ => [cx_real(T::cst(f64::NAN)); 3],
        }
    }

    /// `p(u)` for para and affine charts.
    pub fn p<T: Real>(&self, u: [T; 2]) -> [T; 3] {
        self.pq_direct(u).0
    }

    /// `(p, q)` where `q` is given in closed form (para charts only).
    fn pq_direct<T: Real>(&self, u: [T; 2]) -> ([T; 3], Option<[T; 3]>) {
        match &self.f {
            ChartFn::Hyperboloid => {
                let (ch, sh) = (u[1].cosh(), u[1].sinh());
                let p = [ch * u[0].cos(), ch * u[0].sin(), sh];
                (p, Some([p[0], p[1], -p[2]]))
            }
            ChartFn::Hexenhut => {
                let c = T::cst(2.0 / (3.0 * 3f64.sqrt()));
                let (ev, em) = (u[1].exp(), (-u[1]).exp());
                let two3 = T::cst(2.0 / 3.0);
                let p = [ev * u[0].cos(), ev * u[0].sin(), c * em * em];
                let q = [two3 * em * u[0].cos(), two3 * em * u[0].sin(), ev * ev / (T::cst(3.0) * c)];
                (p, Some(q))
            }
            ChartFn::Rank1Plane => ([T::one(), u[0], T::zero()], Some([T::one(), T::zero(), u[1]])),
            ChartFn::UnitSphere => {
                let (s1, c1) = (u[0].sin(), u[0].cos());
                ([s1 * u[1].cos(), s1 * u[1].sin(), c1], None)
            }
            ChartFn::Ruled(curve) => {
                let [g, g1, g2] = curve.jet(u[0]);
                let p = std::array::from_fn(|k| g1[k] + u[1] * g[k]);
                let a = cross(&g2, &g);
                let b = cross(&g1, &g);
                (p, Some(std::array::from_fn(|k| a[k] + u[1] * b[k])))
            }
            ChartFn::ExprPq(p, q) => (std::array::from_fn(|k| p[k].eval(&u)), Some(std::array::from_fn(|k| q[k].eval(&u)))),
            ChartFn::ExprP(p) => (std::array::from_fn(|k| p[k].eval(&u)), None),
            ChartFn::Linear(inner, g) => {
                let (p, q) = inner.pq_direct(u);
                let gt = g.map(T::cst);
                let gi = crate::ambient::inv3(&gt).transpose();
                let app = |m: &R3<T>, v: [T; 3]| -> [T; 3] { std::array::from_fn(|r| m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2]) };
                (app(&gt, p), q.map(|q| app(&gi, q)))
            }
            _ => ([T::cst(f64::NAN); 3], None),
        }
    }

    /// `(p, q)`: closed-form `q`, or `q = (∂₁p × ∂₂p)/det(p, ∂₁p, ∂₂p)`.
    pub fn pq<T: Real>(&self, u: [T; 2]) -> ([T; 3], [T; 3]) {
        let (p, q) = self.pq_direct(u);
        if let Some(q) = q {
            return (p, q);
        }
        let (p, dp) = self.p_jet(u);
        (p, q_from_derivs(&p, &dp))
    }

    /// `(p, [∂₁p, ∂₂p])`.
    pub fn p_jet<T: Real>(&self, u: [T; 2]) -> ([T; 3], [[T; 3]; 2]) {
        jet1(self.mode, u, |w| self.p(w), |v: &[Dual<T, 2>; 3]| v.map(|x| x.v), |v, k| v.map(|x| x.d[k]))
    }

    /// `(p, q, [∂p], [∂q])`.
    pub fn pq_jet<T: Real>(&self, u: [T; 2]) -> ([T; 3], [T; 3], [[T; 3]; 2], [[T; 3]; 2]) {
        let flat = |w: [Dual<T, 2>; 2]| {
            let (p, q) = self.pq(w);
            [p[0], p[1], p[2], q[0], q[1], q[2]]
        };
        let (v, d) = jet1(self.mode, u, flat, |v: &[Dual<T, 2>; 6]| v.map(|x| x.v), |v, k| v.map(|x| x.d[k]));
        let split = |a: [T; 6]| ([a[0], a[1], a[2]], [a[3], a[4], a[5]]);
        let (p, q) = split(v);
        let (p1, q1) = split(d[0]);
        let (p2, q2) = split(d[1]);
        (p, q, [p1, p2], [q1, q2])
    }

    /// `(Z, [∂₁Z, ∂₂Z])`.
    pub fn z_jet<T: Real>(&self, u: [T; 2]) -> ([Cx<T>; 3], [[Cx<T>; 3]; 2]) {
        let flat = |w: [Dual<T, 2>; 2]| {
            let z = self.z(w);
            [z[0].re, z[0].im, z[1].re, z[1].im, z[2].re, z[2].im]
        };
        let (v, d) = jet1(self.mode, u, flat, |v: &[Dual<T, 2>; 6]| v.map(|x| x.v), |v, k| v.map(|x| x.d[k]));
        let c = |a: [T; 6]| [Cx::new(a[0], a[1]), Cx::new(a[2], a[3]), Cx::new(a[4], a[5])];
        (c(v), [c(d[0]), c(d[1])])
    }

    /// Second derivatives `∂ᵢ∂ⱼp` (for the affine toolbox).
    pub fn p_hess(&self, u: [f64; 2]) -> [[[f64; 3]; 2]; 2] {
        match self.mode {
            DerivMode::Analytic => {
                let s = crate::dual::seed2(u);
                let p = self.p(s);
                std::array::from_fn(|i| std::array::from_fn(|j| p.map(|x| x.hess(i, j))))
            }
            DerivMode::FiniteDifference { h2, .. } => {
                let at = |a: f64, b: f64| self.p([u[0] + a, u[1] + b]);
                let c = self.p(u);
                let d = |i: usize, j: usize| -> [f64; 3] {
                    if i == j {
                        let e = |s: f64| if i == 0 { at(s, 0.0) } else { at(0.0, s) };
                        let (a, b) = (e(h2), e(-h2));
                        std::array::from_fn(|k| (a[k] - 2.0 * c[k] + b[k]) / (h2 * h2))
                    } else {
                        let (pp, pm, mp, mm) = (at(h2, h2), at(h2, -h2), at(-h2, h2), at(-h2, -h2));
                        std::array::from_fn(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h2 * h2))
                    }
                };
                std::array::from_fn(|i| std::array::from_fn(|j| d(i, j)))
            }
        }
    }

    /// The leaf frame `g(u)` used by the hypersurface chart.
    pub fn frame<T: Real>(&self, u: [T; 2]) -> Frame<T> {
        match self.model {
            SurfaceModel::Legendrian => {
                let (z, dz) = self.z_jet(u);
                Frame::Su(frame_adapted_z(&z, &dz))
            }
            _ => {
                let (p, q, dp, dq) = self.pq_jet(u);
                Frame::Sl(frame_adapted_pq(&p, &q, &dp, &dq))
            }
        }
    }

    pub fn in_domain(&self, u: [f64; 2]) -> bool {
        (0..2).all(|k| u[k] >= self.domain[k][0] && u[k] <= self.domain[k][1]) && !self.excluded.iter().any(|l| l.contains(u))
    }

    /// `(|‖Z‖² − 1|, maxⱼ |Re⟨iZ, ∂ⱼZ⟩|)`.
    pub fn legendrian_residual(&self, u: [f64; 2]) -> Result<(f64, f64)> {
        self.need(&[SurfaceModel::Legendrian], "legendrian_residual")?;
        let (z, dz) = self.z_jet(u);
        let n: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let iz = z.map(|c| c * Complex64::i());
        let contact = (0..2)
            .map(|j| (0..3).map(|k| (iz[k] * dz[j][k].conj()).re).sum::<f64>().abs())
            .fold(0.0, f64::max);
        Ok(((n - 1.0).abs(), contact))
    }

    /// Legendrian angle `β ∈ [0, π)` and `|det_ℂ(Z, Z₁, Z₂)|`.
    pub fn legendrian_angle(&self, u: [f64; 2]) -> Result<(f64, f64)> {
        let (nres, cres) = self.legendrian_residual(u)?;
        if nres > 1e-8 || cres > 1e-8 {
            return Err(Error::Precondition(format!("not Legendrian at {u:?} (residuals {nres:.2e}, {cres:.2e})")));
        }
        let (z, dz) = self.z_jet(u);
        let re = |a: &[Complex64; 3], b: &[Complex64; 3]| (0..3).map(|k| (a[k] * b[k].conj()).re).sum::<f64>();
        let n1 = re(&dz[0], &dz[0]).sqrt();
        if n1 < 1e-8 {
            return Err(Error::RankDeficient(n1));
        }
        let z1 = dz[0].map(|c| c / n1);
        let c = re(&dz[1], &z1);
        let w = [dz[1][0] - z1[0] * c, dz[1][1] - z1[1] * c, dz[1][2] - z1[2] * c];
        let n2 = re(&w, &w).sqrt();
        if n2 < 1e-8 {
            return Err(Error::RankDeficient(n2));
        }
        let z2 = w.map(|c| c / n2);
        let d = Matrix3::from_fn(|i, j| [z, z1, z2][j][i]).determinant();
        if (d.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Precondition(format!("|det(Z, Z₁, Z₂)| = {} is not 1", d.norm())));
        }
        Ok((d.arg().rem_euclid(PI), d.norm()))
    }

    /// The four residuals of the special para-Legendrian system:
    /// `⟨p, q⟩ − 1`, `⟨p, ∂q⟩`, `⟨q, ∂p⟩`, `det(p, ∂₁p, ∂₂p) + det(q, ∂₁q, ∂₂q)`.
    pub fn para_residuals(&self, u: [f64; 2]) -> Result<[f64; 4]> {
        self.need(&[SurfaceModel::Para, SurfaceModel::Affine], "para_residuals")?;
        let (p, q, dp, dq) = self.pq_jet(u);
        let c1 = (0..2).map(|i| dot(&p, &dq[i]).abs()).fold(0.0, f64::max);
        let c2 = (0..2).map(|i| dot(&q, &dp[i]).abs()).fold(0.0, f64::max);
        let sp = det_cols(&p, &dp[0], &dp[1]) + det_cols(&q, &dq[0], &dq[1]);
        Ok([(dot(&p, &q) - 1.0).abs(), c1, c2, sp.abs()])
    }

    /// `q = (∂₁p × ∂₂p) / det(p, ∂₁p, ∂₂p)`.
    pub fn q_from_p(&self, u: [f64; 2]) -> Result<[f64; 3]> {
        self.need(&[SurfaceModel::Para, SurfaceModel::Affine], "q_from_p")?;
        let (p, dp) = self.p_jet(u);
        if self.dp_rank(u)? < 2 {
            return Err(Error::RankDeficient(singular_values_3x2(&dp)[1]));
        }
        let d = det_cols(&p, &dp[0], &dp[1]);
        if d.abs() < 1e-8 {
            return Err(Error::Precondition(format!("tangent plane passes through the origin (det = {d:.3e})")));
        }
        Ok(q_from_derivs(&p, &dp))
    }

    /// Numerical rank of `dp` (threshold `1e−8·σ_max`).
    pub fn dp_rank(&self, u: [f64; 2]) -> Result<usize> {
        self.need(&[SurfaceModel::Para, SurfaceModel::Affine], "dp_rank")?;
        let (_, dp) = self.p_jet(u);
        let s = singular_values_3x2(&dp);
        Ok(if s[0] <= 1e-300 {
            0
        } else {
            s.iter().filter(|v| **v > 1e-8 * s[0]).count()
        })
    }

    /// `K ⟨p, n⟩⁻⁴` with `K` the Euclidean Gauss curvature and `n` the unit normal.
    pub fn centro_affine_curvature(&self, u: [f64; 2]) -> Result<f64> {
        self.need(&[SurfaceModel::Para, SurfaceModel::Affine], "centro_affine_curvature")?;
        let (p, dp) = self.p_jet(u);
        let nrm = cross(&dp[0], &dp[1]);
        let len = dot(&nrm, &nrm).sqrt();
        if len < 1e-10 {
            return Err(Error::RankDeficient(len));
        }
        let n = nrm.map(|x| x / len);
        let hs = self.p_hess(u);
        let g = [[dot(&dp[0], &dp[0]), dot(&dp[0], &dp[1])], [dot(&dp[1], &dp[0]), dot(&dp[1], &dp[1])]];
        let b: [[f64; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|j| dot(&hs[i][j], &n)));
        let det_g = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let det_b = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        let scale = (b[0][0].abs() + b[1][1].abs() + b[0][1].abs()).powi(2);
        if det_b.abs() <= 1e-12 * scale.max(1e-300) {
            return Err(Error::Precondition("degenerate second fundamental form".into()));
        }
        let support = dot(&p, &n);
        if support.abs() < 1e-10 {
            return Err(Error::Precondition("tangent plane passes through the origin".into()));
        }
        Ok(det_b / det_g / support.powi(4))
    }
}

pub fn q_from_derivs<T: Real>(p: &[T; 3], dp: &[[T; 3]; 2]) -> [T; 3] {
    let c = cross(&dp[0], &dp[1]);
    let d = dot(p, &c);
    c.map(|x| x / d)
}

fn singular_values_3x2(dp: &[[f64; 3]; 2]) -> [f64; 2] {
    let m = Matrix3x2::from_fn(|i, j| dp[j][i]);
    let s = m.singular_values();
    [s[0].max(s[1]), s[0].min(s[1])]
}

#[derive(Clone, Debug)]
pub enum Frame<T: Real> {
    Su(C3<T>),
    Sl(R3<T>),
}

// ---------------------------------------------------------------------------
// Surface-spec files

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub model: SurfaceModel,
    #[serde(default)]
    pub name: Option<String>,
    /// Legendrian: `[[re, im]; 3]`.
    #[serde(default)]
    pub z: Option<[[String; 2]; 3]>,
    #[serde(default)]
    pub p: Option<[String; 3]>,
    #[serde(default)]
    pub q: Option<[String; 3]>,
    pub domain: [[f64; 2]; 2],
    #[serde(default)]
    pub excluded: Vec<Locus>,
}

impl SurfaceSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn into_chart(self) -> Result<SurfaceChart> {
        let parse3 = |v: &[String; 3]| -> Result<[Expr; 3]> {
            Ok([Expr::parse(&v[0])?, Expr::parse(&v[1])?, Expr::parse(&v[2])?])
        };
        for k in 0..2 {
            if !(self.domain[k][0] < self.domain[k][1]) {
                return Err(Error::Spec(format!("empty domain interval {:?}", self.domain[k])));
            }
        }
        let f = match self.model {
            SurfaceModel::Legendrian => {
                let z = self.z.as_ref().ok_or_else(|| Error::Spec("legendrian spec needs 'z'".into()))?;
                let mut out: Vec<[Expr; 2]> = Vec::new();
                for c in z {
                    out.push([Expr::parse(&c[0])?, Expr::parse(&c[1])?]);
                }
                let arr: [[Expr; 2]; 3] = out.try_into().expect("three coordinates");
                ChartFn::ExprZ(Box::new(arr))
            }
            SurfaceModel::Para => {
                let p = self.p.as_ref().ok_or_else(|| Error::Spec("para spec needs 'p'".into()))?;
                let q = self.q.as_ref().ok_or_else(|| Error::Spec("para spec needs 'q'".into()))?;
                ChartFn::ExprPq(Box::new(parse3(p)?), Box::new(parse3(q)?))
            }
            SurfaceModel::Affine => {
                let p = self.p.as_ref().ok_or_else(|| Error::Spec("affine spec needs 'p'".into()))?;
                ChartFn::ExprP(Box::new(parse3(p)?))
            }
        };
        Ok(SurfaceChart {
            name: self.name.unwrap_or_else(|| "spec".into()),
            model: self.model,
            f,
            domain: self.domain,
            excluded: self.excluded,
            mode: DerivMode::FD_DEFAULT,
        })
    }
}

/// Per-point residuals reported by `surface-check`.
#[derive(Clone, Debug, Serialize)]
pub struct SurfacePointCheck {
    pub u: [f64; 2],
    /// Model residuals (Legendrian: norm, contact; para: the four special residuals).
    pub residuals: Vec<f64>,
    pub legendrian_angle: Option<f64>,
    pub dp_rank: Option<usize>,
    pub centro_affine_curvature: Option<f64>,
}

/// Evaluates the model residuals on an `n × n` grid of the chart domain.
pub fn surface_grid(chart: &SurfaceChart, n: usize) -> Vec<SurfacePointCheck> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let f = |k: usize, t: usize| {
                let [a, b] = chart.domain[k];
                a + (b - a) * (t as f64 + 0.5) / n as f64
            };
            let u = [f(0, i), f(1, j)];
            if !chart.in_domain(u) {
                continue;
            }
            let rec = match chart.model {
                SurfaceModel::Legendrian => {
                    let (a, b) = chart.legendrian_residual(u).unwrap_or((f64::NAN, f64::NAN));
                    SurfacePointCheck { u, residuals: vec![a, b], legendrian_angle: chart.legendrian_angle(u).ok().map(|x| x.0), dp_rank: None, centro_affine_curvature: None }
                }
                _ => SurfacePointCheck {
                    u,
                    residuals: chart.para_residuals(u).map(|r| r.to_vec()).unwrap_or_else(|_| vec![f64::NAN; 4]),
                    legendrian_angle: None,
                    dp_rank: chart.dp_rank(u).ok(),
                    centro_affine_curvature: chart.centro_affine_curvature(u).ok(),
                },
            };
            out.push(rec);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(chart: &SurfaceChart, n: usize) -> Vec<[f64; 2]> {
        surface_grid(chart, n).into_iter().map(|r| r.u).collect()
    }

    #[test]
    fn torus_and_sphere_are_special_legendrian() {
        for name in ["legendrian_torus", "legendrian_sphere"] {
            let c = builtin_surface(name).unwrap();
            for u in grid(&c, 8) {
                let (a, b) = c.legendrian_residual(u).unwrap();
                assert!(a < 1e-14 && b < 1e-14);
                let (beta, m) = c.legendrian_angle(u).unwrap();
                assert!((beta - PI / 2.0).abs() < 1e-12, "{name} {u:?} {beta}");
                assert!((m - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotated_torus_has_angle_zero() {
        let c = builtin_surface("torus_beta0_control").unwrap();
        let (beta, _) = c.legendrian_angle([0.3, 1.1]).unwrap();
        assert!(beta.min(PI - beta) < 1e-12, "{beta}");
    }

    #[test]
    fn non_legendrian_control_fails_contact() {
        let c = builtin_surface("non_legendrian_control").unwrap();
        let worst = grid(&c, 8).into_iter().map(|u| c.legendrian_residual(u).unwrap().1).fold(0.0, f64::max);
        assert!(worst > 1e-2);
    }

    #[test]
    fn hyperboloid_q_matches_q_from_p() {
        let c = builtin_surface("hyperboloid").unwrap();
        assert_eq!(c.q_from_p([0.0, 0.0]).unwrap(), [1.0, 0.0, 0.0]);
        for u in grid(&c, 6) {
            let q = c.q_from_p(u).unwrap();
            let (_, q0) = c.pq(u);
            for k in 0..3 {
                assert!((q[k] - q0[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_plane_residuals_vanish() {
        let c = builtin_surface("rank1_plane").unwrap();
        for u in grid(&c, 5) {
            assert_eq!(c.para_residuals(u).unwrap(), [0.0; 4]);
            assert_eq!(c.dp_rank(u).unwrap(), 1);
        }
    }

    #[test]
    fn perturbed_q_breaks_normalization() {
        let mut c = builtin_surface("rank1_plane").unwrap();
        let g = Matrix3::identity();
        c = SurfaceChart { f: ChartFn::Linear(Box::new(c), g), ..builtin_surface("rank1_plane").unwrap() };
        let spec = SurfaceSpec::from_json(r#"{"model":"para","p":["1","u1","0"],"q":["1+0.01","0.01*u1","u2"],"domain":[[-1,1],[-1,1]]}"#).unwrap();
        let pert = spec.into_chart().unwrap();
        let r = pert.para_residuals([0.5, 0.2]).unwrap();
        assert!((r[0] - 0.01 * (1.0 + 0.25)).abs() < 1e-12);
        assert_eq!(c.para_residuals([0.3, 0.3]).unwrap(), [0.0; 4]);
    }

    #[test]
    fn affine_curvatures() {
        for name in ["hyperboloid", "hexenhut", "ruled_hyperboloid", "ruled_exp", "ruled_cubic"] {
            let c = builtin_surface(name).unwrap();
            for u in grid(&c, 7) {
                let k = c.centro_affine_curvature(u).unwrap();
                assert!((k + 1.0).abs() < 1e-8, "{name} {u:?} {k}");
            }
        }
        let s = builtin_surface("unit_sphere").unwrap();
        assert!((s.centro_affine_curvature([1.0, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        assert!(s.para_residuals([1.0, 0.5]).unwrap()[3] > 1e-3);
    }

    #[test]
    fn ruled_hyperboloid_lies_on_the_quadric() {
        let c = builtin_surface("ruled_hyperboloid").unwrap();
        for u in grid(&c, 6) {
            let p = c.p(u);
            assert!((p[0] * p[0] + p[1] * p[1] - p[2] * p[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ruled_normalization_is_checked() {
        assert!(ruled_affine_sphere(Curve::Exponential, [-1.0, 1.0], [-1.0, 1.0]).is_ok());
        let bad = ruled_affine_sphere(Curve::Scaled(Box::new(Curve::Cubic), 1.1), [-1.0, 1.0], [-1.0, 1.0]);
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }

    #[test]
    fn unknown_and_wrong_model() {
        assert!(matches!(builtin_surface("klein_bottle"), Err(Error::Unknown(_))));
        let t = builtin_surface("legendrian_torus").unwrap();
        assert!(matches!(t.dp_rank([0.0, 0.0]), Err(Error::WrongSurfaceModel(_))));
    }

    #[test]
    fn finite_difference_mode_tracks_analytic() {
        let a = builtin_surface("hexenhut").unwrap();
        let f = a.clone().with_mode(DerivMode::FD_DEFAULT);
        let u = [0.7, 0.2];
        let ka = a.centro_affine_curvature(u).unwrap();
        let kf = f.centro_affine_curvature(u).unwrap();
        assert!((ka - kf).abs() < 1e-5, "{ka} {kf}");
    }

    #[test]
    fn spec_round_trip() {
        let text = r#"{"model":"legendrian","z":[["0","0.5773502691896258*cos(u1)"],["0","0.5773502691896258*cos(u2)"],["0","0.5773502691896258*cos(-(u1+u2))"]],"domain":[[0,6.28],[0,6.28]],"excluded":[{"kind":"disc","center":[0,0],"radius":0.1}]}"#;
        let spec = SurfaceSpec::from_json(text).unwrap();
        let c = spec.into_chart().unwrap();
        assert!(!c.in_domain([0.05, 0.05]));
        assert!(SurfaceSpec::from_json(r#"{"model":"para","p":["1","u1","0"],"domain":[[0,1],[0,1]]}"#).unwrap().into_chart().is_err());
        assert!(SurfaceSpec::from_json("{").is_err());
    }
}
