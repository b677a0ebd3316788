//! Invariant checks shared by the property suite and the acceptance run.
//! Each returns the worst residual (or margin) over its random draws.
#![allow(dead_code)]

use ehyp_core::ambient::{
    act, ambient_inner, c3_from_f64, embed, expm3, expm3_real, leaf_chart, leaf_point_sl, leaf_point_su, leaf_residual, tangent_basis, transport_to_origin, AVec,
    AmbientPoint, GroupElem, LeafLabel, Space,
};
use ehyp_core::dual::{seed, Dual};
use ehyp_core::lie::{normal, AlgebraElement, AlgebraModel, ModelKind};
use ehyp_core::linalg;
use ehyp_core::roots::{hausdorff, restricted_roots_seeded, standard_roots};
use ehyp_core::solv::{self, MetricSolvAlgebra};
use ehyp_core::surface::{builtin_surface, surface_grid, ChartFn, SurfaceChart, SurfaceModel};
use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const KINDS: [ModelKind; 3] = [ModelKind::Su3, ModelKind::Sl3, ModelKind::Sl4];

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn random_su3(r: &mut ChaCha8Rng) -> Matrix3<Complex64> {
    let m = Matrix3::from_fn(|_, _| Complex64::new(normal(r), normal(r)) * 0.5);
    let h = m - m.adjoint();
    let tr = h.trace() / Complex64::new(3.0, 0.0);
    expm3(&c3_from_f64::<f64>(&(h - Matrix3::identity() * tr)))
}

pub fn random_sl3(r: &mut ChaCha8Rng) -> Matrix3<f64> {
    let m = Matrix3::from_fn(|_, _| normal(r) * 0.4);
    expm3_real(&(m - Matrix3::identity() * (m.trace() / 3.0)))
}

pub fn random_group(space: Space, r: &mut ChaCha8Rng) -> GroupElem {
    match space {
        Space::Su3So3 => GroupElem::Su(random_su3(r)),
        Space::Sl3So3 => GroupElem::Sl(random_sl3(r)),
    }
}

// ---------------------------------------------------------------------------
// Lie algebra and curvature

pub fn jacobi_identity(kind: ModelKind, r: &mut ChaCha8Rng, n: usize) -> f64 {
    let m = AlgebraModel::new(kind);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let (x, y, z) = (m.random_element(r), m.random_element(r), m.random_element(r));
        let b = |a: &AlgebraElement, c: &AlgebraElement| m.bracket(a, c).unwrap();
        let s = b(&x, &b(&y, &z)).add(&b(&y, &b(&z, &x))).add(&b(&z, &b(&x, &y)));
        let scale = x.frob() * y.frob() * z.frob();
        worst = worst.max(s.frob() / scale.max(1.0));
    }
    worst
}

pub fn curvature_symmetries(kind: ModelKind, r: &mut ChaCha8Rng, n: usize) -> f64 {
    let m = AlgebraModel::new(kind);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let v: Vec<AlgebraElement> = (0..4).map(|_| m.random_p(r)).collect();
        let (x, y, z, w) = (&v[0], &v[1], &v[2], &v[3]);
        let r4 = |a, b, c, d| m.curvature4(a, b, c, d).unwrap();
        let base = r4(x, y, z, w);
        worst = worst.max((base + r4(y, x, z, w)).abs());
        worst = worst.max((base - r4(z, w, x, y)).abs());
        worst = worst.max((base + r4(x, y, w, z)).abs());
        let bianchi = m.curvature(x, y, z).unwrap().add(&m.curvature(y, z, x).unwrap()).add(&m.curvature(z, x, y).unwrap());
        worst = worst.max(bianchi.frob());
    }
    worst
}

/// Smallest, over random pairs, of `max_{a,b} |R̃(X, E_a, E_b, Y)|` for unit X, Y.
pub fn curvature_nondegeneracy(kind: ModelKind, r: &mut ChaCha8Rng, n: usize) -> f64 {
    let m = AlgebraModel::new(kind);
    let e = m.p_basis().to_vec();
    let mut least = f64::INFINITY;
    for _ in 0..n {
        let x = m.random_p(r);
        let y = m.random_p(r);
        let x = x.scale(1.0 / m.p_norm(&x).unwrap());
        let y = y.scale(1.0 / m.p_norm(&y).unwrap());
        let mut best = 0.0f64;
        for a in &e {
            for b in &e {
                best = best.max(m.curvature4(&x, a, b, &y).unwrap().abs());
            }
        }
        least = least.min(best);
    }
    least
}

pub fn symmetric_einstein(kind: ModelKind) -> f64 {
    let m = AlgebraModel::new(kind);
    let want = match kind {
        ModelKind::Su3 => 0.75,
        ModelKind::Sl3 => -0.75,
        ModelKind::Sl4 => -0.5,
    };
    let ric = m.ricci();
    linalg::frobenius(&(ric - DMatrix::identity(m.p_dim(), m.p_dim()) * want))
}

// ---------------------------------------------------------------------------
// Restricted roots

/// Smallest `‖R̃(A, X_β)X_γ‖` over non-proportional, non-orthogonal root pairs.
pub fn mixed_curvature_nonvanishing(kind: ModelKind, r: &mut ChaCha8Rng) -> f64 {
    let m = AlgebraModel::new(kind);
    let rd = standard_roots(&m).unwrap();
    let mut least = f64::INFINITY;
    for b in &rd.roots {
        for g in &rd.roots {
            let dot: f64 = b.coords.iter().zip(&g.coords).map(|(x, y)| x * y).sum();
            let nb: f64 = b.coords.iter().map(|x| x * x).sum::<f64>().sqrt();
            let ng: f64 = g.coords.iter().map(|x| x * x).sum::<f64>().sqrt();
            if dot.abs() < 1e-9 || (dot.abs() - nb * ng).abs() < 1e-9 {
                continue;
            }
            let rand_in = |basis: &[AlgebraElement], r: &mut ChaCha8Rng| {
                let c: Vec<f64> = basis.iter().map(|_| normal(r)).collect();
                ehyp_core::lie::combine(kind, &c, basis)
            };
            let xb = rand_in(&b.p_basis, r);
            let xg = rand_in(&g.p_basis, r);
            let a = loop {
                let a = rand_in(&rd.cartan, r);
                if rd.pairing(&m, b, &a).unwrap().abs() > 1e-3 {
                    break a;
                }
            };
            let v = m.curvature(&a, &xb, &xg).unwrap();
            let scale = m.p_norm(&a).unwrap() * m.p_norm(&xb).unwrap() * m.p_norm(&xg).unwrap();
            least = least.min(m.p_norm(&v).unwrap() / scale);
        }
    }
    least
}

fn project_out(m: &AlgebraModel, v: &AlgebraElement, basis: &[AlgebraElement]) -> f64 {
    let mut w = v.clone();
    for e in basis {
        w = w.sub(&e.scale(m.inner(v, e).unwrap()));
    }
    m.p_norm(&w).unwrap()
}

/// Largest component of `[k_β, p_γ]` outside `p_{β+γ} ⊕ p_{β−γ}`.
pub fn bracket_grading(kind: ModelKind) -> f64 {
    let m = AlgebraModel::new(kind);
    let rd = standard_roots(&m).unwrap();
    let mut worst = 0.0f64;
    let combos: Vec<Vec<f64>> = rd.roots.iter().map(|r| r.coords.clone()).chain(std::iter::once(vec![0.0; rd.rank()])).collect();
    for b in &rd.roots {
        for (gi, gc) in combos.iter().enumerate() {
            let pg = if gi < rd.roots.len() { rd.roots[gi].p_basis.clone() } else { rd.cartan.clone() };
            let plus: Vec<f64> = b.coords.iter().zip(gc).map(|(x, y)| x + y).collect();
            let minus: Vec<f64> = b.coords.iter().zip(gc).map(|(x, y)| x - y).collect();
            let mut target = rd.p_space(&plus, 1e-7);
            if (0..rd.rank()).any(|i| (plus[i] - minus[i]).abs() > 1e-7) {
                target.extend(rd.p_space(&minus, 1e-7));
            }
            let target = m.orthonormalize(&target).unwrap_or_default();
            for k in &b.k_basis {
                for p in &pg {
                    let v = m.bracket(k, p).unwrap();
                    let scale = k.frob() * m.p_norm(p).unwrap();
                    worst = worst.max(project_out(&m, &v, &target) / scale);
                }
            }
        }
    }
    worst
}

/// `|⟨[X_β, θ_β X_β], A⟩ − ε⟨β, A⟩‖X_β‖²|` over roots and random `X_β`, `A`.
pub fn theta_pairing(kind: ModelKind, r: &mut ChaCha8Rng) -> f64 {
    let m = AlgebraModel::new(kind);
    let rd = standard_roots(&m).unwrap();
    let mut worst = 0.0f64;
    for b in &rd.roots {
        let c: Vec<f64> = b.p_basis.iter().map(|_| normal(r)).collect();
        let x = ehyp_core::lie::combine(kind, &c, &b.p_basis);
        let c: Vec<f64> = rd.cartan.iter().map(|_| normal(r)).collect();
        let a = ehyp_core::lie::combine(kind, &c, &rd.cartan);
        let tx = rd.theta_map(&m, b, &x).unwrap();
        let lhs = m.inner(&m.bracket(&x, &tx).unwrap(), &a).unwrap();
        let rhs = kind.epsilon() * rd.pairing(&m, b, &a).unwrap() * m.inner(&x, &x).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// Hausdorff distances: root set vs its negative, and vs a recomputation
/// with a different random regular element.
pub fn root_set_stability(kind: ModelKind, seed: u64) -> (f64, f64) {
    let m = AlgebraModel::new(kind);
    let rd = standard_roots(&m).unwrap();
    let a: Vec<Vec<f64>> = rd.roots.iter().map(|r| r.coords.clone()).collect();
    let neg: Vec<Vec<f64>> = a.iter().map(|c| c.iter().map(|x| -x).collect()).collect();
    let other = restricted_roots_seeded(&m, &rd.cartan, seed).unwrap();
    let b: Vec<Vec<f64>> = other.roots.iter().map(|r| r.coords.clone()).collect();
    (hausdorff(&a, &neg), hausdorff(&a, &b))
}

// ---------------------------------------------------------------------------
// Solvable algebras

pub fn solv_algebra(kind: ModelKind) -> MetricSolvAlgebra {
    let m = AlgebraModel::new(kind);
    let rd = standard_roots(&m).unwrap();
    let iw = solv::iwasawa(&m, &rd).unwrap();
    MetricSolvAlgebra::from_iwasawa(&m, &iw).unwrap()
}

pub struct SolvAudit {
    pub ad_asymmetry: f64,
    pub derived_leak: f64,
    pub derived_dim_ok: bool,
    pub constant_gap: f64,
    pub codim1_residual: f64,
    pub trace_ad_xi: f64,
}

/// Iwasawa-type audit on `s` and on `ξ^⊥` for `n` random admissible `ξ`.
pub fn solv_audit(kind: ModelKind, r: &mut ChaCha8Rng, n: usize) -> SolvAudit {
    let s = solv_algebra(kind);
    let (res, c) = s.einstein_residual();
    let mut out = SolvAudit {
        ad_asymmetry: s.ad_a_asymmetry(),
        derived_leak: s.derived_algebra_leak(),
        derived_dim_ok: s.derived_dim() == s.n_dim(),
        constant_gap: 0.0,
        codim1_residual: res,
        trace_ad_xi: 0.0,
    };
    for _ in 0..n {
        let xi = s.random_xi(r).unwrap();
        let sub = s.codim1_subalgebra(&xi).unwrap();
        let (r2, c2) = sub.algebra.einstein_residual();
        out.ad_asymmetry = out.ad_asymmetry.max(sub.algebra.ad_a_asymmetry());
        out.constant_gap = out.constant_gap.max((c2 - c).abs());
        out.codim1_residual = out.codim1_residual.max(r2);
        out.trace_ad_xi = out.trace_ad_xi.max(sub.tr_ad_xi.abs());
    }
    out
}

// ---------------------------------------------------------------------------
// Ambient models and leaves

fn random_label(space: Space, r: &mut ChaCha8Rng) -> LeafLabel {
    match space {
        Space::Su3So3 => {
            let v: [Complex64; 3] = std::array::from_fn(|_| Complex64::new(normal(r), normal(r)));
            let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            LeafLabel::Z(v.map(|c| c / n))
        }
        Space::Sl3So3 => loop {
            let p: [f64; 3] = std::array::from_fn(|_| normal(r));
            let q: [f64; 3] = std::array::from_fn(|_| normal(r));
            let d: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
            if d.abs() > 0.3 {
                break LeafLabel::Pq(p, q.map(|x| x / d));
            }
        },
    }
}

fn act_label(g: &GroupElem, l: &LeafLabel) -> LeafLabel {
    match (g, l) {
        (GroupElem::Su(g), LeafLabel::Z(z)) => {
            let v = g * nalgebra::Vector3::from_column_slice(z);
            LeafLabel::Z([v[0], v[1], v[2]])
        }
        (GroupElem::Sl(g), LeafLabel::Pq(p, q)) => {
            let pv = g * nalgebra::Vector3::from_column_slice(p);
            let qv = g.try_inverse().unwrap().transpose() * nalgebra::Vector3::from_column_slice(q);
            LeafLabel::Pq([pv[0], pv[1], pv[2]], [qv[0], qv[1], qv[2]])
        }
        _ => unreachable!(),
    }
}

/// `g` maps the leaf of `Z` onto the leaf of `gZ`: worst leaf-equation residual.
pub fn leaf_equivariance(space: Space, r: &mut ChaCha8Rng, n: usize) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..n {
        let label = random_label(space, r);
        let g = random_group(space, r);
        let t = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let x = leaf_chart(&label, t).unwrap();
        let y = act(&g, &x).unwrap();
        let scale = y.flat().norm();
        worst = worst.max(leaf_residual(&act_label(&g, &label), &y).unwrap() / scale.max(1.0));
    }
    worst
}

/// Worst deviation of the leaf sectional curvature from `±1/2`.
pub fn leaf_sectional(space: Space, r: &mut ChaCha8Rng, n: usize) -> f64 {
    let lie = AlgebraModel::new(space.lie_kind());
    let want = 0.5 * space.epsilon();
    let mut worst = 0.0f64;
    for _ in 0..n {
        let label = random_label(space, r);
        let t = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let tt = seed(t);
        let flat: [Dual<f64, 2>; 18] = match label.frame().unwrap() {
            GroupElem::Su(g) => leaf_point_su(&c3_from_f64::<Dual<f64, 2>>(&g), tt),
            GroupElem::Sl(g) => leaf_point_sl(&g.map(Dual::constant), tt),
        };
        let tangent = |k: usize| AVec::from_fn(|i, _| flat[i].d[k]);
        let x = leaf_chart(&label, t).unwrap();
        let a = transport_to_origin(&lie, &x, &tangent(0)).unwrap();
        let b = transport_to_origin(&lie, &x, &tangent(1)).unwrap();
        worst = worst.max((lie.sectional(&a, &b).unwrap() - want).abs());
    }
    worst
}

/// Smallest eigenvalue of the induced metric on the tangent frame at random points.
pub fn induced_metric_min_eigenvalue(space: Space, r: &mut ChaCha8Rng, n: usize) -> f64 {
    let lie = AlgebraModel::new(space.lie_kind());
    let mut least = f64::INFINITY;
    for _ in 0..n {
        let x: AmbientPoint = embed(&random_group(space, r)).unwrap();
        let b = tangent_basis(&lie, &x).unwrap();
        let g = DMatrix::from_fn(5, 5, |i, j| ambient_inner(space, &b[i], &b[j]));
        least = least.min(linalg::sym_eigen(&g).0[0]);
    }
    least
}

// ---------------------------------------------------------------------------
// Surfaces

/// Built-in charts whose construction is special (Einstein hypersurface input).
pub const SPECIAL_SURFACES: [&str; 8] = ["legendrian_sphere", "legendrian_torus", "hyperboloid", "hexenhut", "rank1_plane", "ruled_hyperboloid", "ruled_exp", "ruled_cubic"];

/// Largest model residual on an `n × n` grid. Controls only keep the
/// residuals they are designed to keep: the sphere p-chart keeps the
/// normalization and contact conditions but not the special one, and the
/// non-Legendrian control keeps the unit norm only.
pub fn model_residual(name: &str, n: usize) -> f64 {
    let c = builtin_surface(name).unwrap();
    let keep = match name {
        "unit_sphere" => 3,
        "non_legendrian_control" => 1,
        _ => usize::MAX,
    };
    surface_grid(&c, n)
        .iter()
        .flat_map(|p| p.residuals.iter().take(keep).copied().collect::<Vec<_>>())
        .fold(0.0, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
}

/// Standard deviation of the Legendrian angle over the grid.
pub fn angle_spread(name: &str, n: usize) -> f64 {
    let c = builtin_surface(name).unwrap();
    let a: Vec<f64> = surface_grid(&c, n).iter().map(|p| p.legendrian_angle.unwrap_or(f64::NAN)).collect();
    let pi = std::f64::consts::PI;
    let un: Vec<f64> = a.iter().map(|x| a[0] + (x - a[0] + pi / 2.0).rem_euclid(pi) - pi / 2.0).collect();
    let mean = un.iter().sum::<f64>() / un.len() as f64;
    (un.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / un.len() as f64).sqrt()
}

pub fn random_unimodular(r: &mut ChaCha8Rng) -> Matrix3<f64> {
    loop {
        let m = Matrix3::from_fn(|_, _| normal(r));
        let d = m.determinant();
        if d.abs() > 0.2 {
            let s = d.abs().cbrt() * d.signum();
            return m / s;
        }
    }
}

pub fn transformed(chart: &SurfaceChart, g: Matrix3<f64>) -> SurfaceChart {
    SurfaceChart { f: ChartFn::Linear(Box::new(chart.clone()), g), ..chart.clone() }
}

/// Worst change of the centro-affine curvature under `n` random unimodular maps.
pub fn unimodular_invariance(name: &str, r: &mut ChaCha8Rng, n: usize) -> f64 {
    let c = builtin_surface(name).unwrap();
    assert_ne!(c.model, SurfaceModel::Legendrian);
    let pts: Vec<[f64; 2]> = surface_grid(&c, 3).into_iter().map(|p| p.u).collect();
    let mut worst = 0.0f64;
    for _ in 0..n {
        let g = random_unimodular(r);
        let t = transformed(&c, g);
        for &u in &pts {
            let k0 = c.centro_affine_curvature(u).unwrap();
            let k1 = t.centro_affine_curvature(u).unwrap();
            worst = worst.max((k1 - k0).abs());
        }
    }
    worst
}

/// At each grid point: does `(p, q_from_p)` satisfy the full system, and is
/// the centro-affine curvature −1? Returns the number of points where the
/// two answers disagree.
pub fn special_iff_curvature_minus_one(name: &str, n: usize) -> usize {
    let c = builtin_surface(name).unwrap();
    let mut bad = 0;
    for p in surface_grid(&c, n) {
        let Ok(q) = c.q_from_p(p.u) else {
            bad += 1;
            continue;
        };
        let (_, q0) = c.pq(p.u);
        let consistent = q.iter().zip(&q0).all(|(a, b)| (a - b).abs() < 1e-9);
        let special = consistent && p.residuals.iter().all(|&x| x <= 1e-10);
        let minus_one = p.centro_affine_curvature.map(|k| (k + 1.0).abs() <= 1e-8).unwrap_or(false);
        if special != minus_one {
            bad += 1;
        }
    }
    bad
}
