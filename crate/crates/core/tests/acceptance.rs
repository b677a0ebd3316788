//! Acceptance run: one PASS/FAIL line per criterion, detail lines indented.
//! Runs without the libtest harness so the table always shows in `cargo test`.

mod common;

use std::time::{Duration, Instant};

use common::*;
use ehyp_core::ambient::{GroupElem, Space};
use ehyp_core::lie::{AlgebraModel, ModelKind};
use ehyp_core::linalg;
use ehyp_core::roots::hausdorff;
use ehyp_core::solv;
use ehyp_core::surface::{builtin_surface, SurfaceModel, BUILTIN_NAMES};
use ehyp_core::verify::{
    candidate_points, einstein_report, evaluate, oracle_disagreement, singular_locus_probe, symmetric_ricci_extrinsic, HypersurfaceChart, SamplingPlan,
    Tolerances, VerificationReport,
};
use nalgebra::{DMatrix, Matrix3};

struct Criterion {
    id: u32,
    title: &'static str,
    ok: bool,
    details: Vec<String>,
    elapsed: Duration,
    budget: Option<Duration>,
}

impl Criterion {
    fn new(id: u32, title: &'static str, budget: Option<u64>) -> Self {
        Self { id, title, ok: true, details: Vec::new(), elapsed: Duration::ZERO, budget: budget.map(Duration::from_secs) }
    }

    fn check(&mut self, ok: bool, msg: String) {
        self.ok &= ok;
        self.details.push(format!("{} {msg}", if ok { "ok  " } else { "FAIL" }));
    }

    fn time<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let t = Instant::now();
        let out = f(self);
        self.elapsed += t.elapsed();
        out
    }

    fn finish(mut self) -> Self {
        if let Some(b) = self.budget {
            let ok = self.elapsed < b;
            self.check(ok, format!("runtime {:.2?} < {b:?}", self.elapsed));
        }
        println!("[{}] {}. {}", if self.ok { "PASS" } else { "FAIL" }, self.id, self.title);
        for d in &self.details {
            println!("       {d}");
        }
        self
    }
}

fn chart(name: &str) -> HypersurfaceChart {
    let s = builtin_surface(name).unwrap();
    let space = if s.model == SurfaceModel::Legendrian { Space::Su3So3 } else { Space::Sl3So3 };
    HypersurfaceChart::new(s, space).unwrap()
}

fn max_of(r: &VerificationReport, key: &str) -> f64 {
    r.aggregates.max.get(key).copied().unwrap_or(f64::NAN)
}

fn records_max(r: &VerificationReport, f: impl Fn(&ehyp_core::verify::SampleRecord) -> Option<f64>) -> f64 {
    r.records.iter().filter_map(f).fold(0.0, f64::max)
}

fn symmetric_calibration() -> Criterion {
    let mut c = Criterion::new(1, "symmetric-space calibration: Ric = ±(3/4) g", Some(1));
    c.time(|c| {
        for (kind, want) in [(ModelKind::Su3, 0.75), (ModelKind::Sl3, -0.75)] {
            let m = AlgebraModel::new(kind);
            let res = linalg::frobenius(&(m.ricci() - DMatrix::identity(5, 5) * want));
            c.check(res <= 1e-10, format!("{kind:?} algebraic Ricci − ({want}) g: {res:.2e} ≤ 1e-10"));
        }
        let mut r = rng(1);
        for space in [Space::Su3So3, Space::Sl3So3] {
            let want = space.einstein_constant();
            let mut worst = 0.0f64;
            let mut points = vec![match space {
                Space::Su3So3 => GroupElem::Su(Matrix3::identity()),
                Space::Sl3So3 => GroupElem::Sl(Matrix3::identity()),
            }];
            points.extend((0..4).map(|_| random_group(space, &mut r)));
            for g in &points {
                let ric = symmetric_ricci_extrinsic(space, g).unwrap();
                worst = worst.max(linalg::frobenius(&(ric - DMatrix::identity(5, 5) * want)));
            }
            c.check(worst <= 1e-10, format!("{} Gauss-equation Ricci at {} points, worst {worst:.2e} ≤ 1e-10", space.name(), points.len()));
        }
    });
    c.finish()
}

fn solvmanifolds() -> Criterion {
    let mut c = Criterion::new(2, "Iwasawa solvmanifolds and their codimension-one subgroups are Einstein", Some(5));
    c.time(|c| {
        for kind in [ModelKind::Sl3, ModelKind::Sl4] {
            let m = AlgebraModel::new(kind);
            let s = solv_algebra(kind);
            let (res, k) = s.einstein_residual();
            c.check(res <= 1e-9, format!("{kind:?}: s Einstein constant {k:.12}, residual {res:.2e} ≤ 1e-9"));
            let mut r = rng(2);
            let (mut worst_res, mut worst_gap, mut worst_tr, mut all) = (0.0f64, 0.0f64, 0.0f64, true);
            for _ in 0..20 {
                let xi = s.random_xi(&mut r).unwrap();
                let cert = solv::certify(&m, Some(&xi), 1e-9).unwrap();
                all &= cert.pass;
                worst_res = worst_res.max(cert.codim1_einstein_residual.unwrap());
                worst_gap = worst_gap.max((cert.codim1_einstein_constant.unwrap() - k).abs());
                worst_tr = worst_tr.max(cert.tr_ad_xi.unwrap().abs());
            }
            c.check(
                all && worst_res <= 1e-9 && worst_gap <= 1e-9 && worst_tr <= 1e-9,
                format!("{kind:?}: 20 random ξ ⊥ A_H — residual {worst_res:.2e}, constant gap {worst_gap:.2e}, |Tr ad_ξ| {worst_tr:.2e} (all ≤ 1e-9)"),
            );
        }
    });
    c.finish()
}

/// Shared suite for criteria 3 and 4.
fn construction_suite(c: &mut Criterion, name: &str, constant: f64, alpha: f64, leaf_k: f64, need_generic: bool) {
    let hc = chart(name);
    let r = einstein_report(&hc, &SamplingPlan::new(256, 0), &Tolerances::analytic(1e-5)).unwrap();
    let n = r.samples_accepted;
    let e = max_of(&r, "einstein_residual");
    let kmean = r.aggregates.einstein_constant_mean;
    c.check(n == 256 && e <= 1e-5 && (kmean - constant).abs() <= 1e-6, format!("{name}: {n} samples, max Einstein residual {e:.2e} ≤ 1e-5, constant {kmean:.10}"));
    let alpha_dev = records_max(&r, |s| {
        let mut a = s.alpha.clone();
        a.sort_by(f64::total_cmp);
        let want = if alpha > 0.0 { [0.0, 0.0, alpha, alpha] } else { [alpha, alpha, 0.0, 0.0] };
        Some(a.iter().zip(want).map(|(x, w)| (x - w).abs()).fold(0.0, f64::max))
    });
    let prod = records_max(&r, |s| {
        let mut l = s.lambda;
        l.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        Some((l[0] * l[1] - alpha).abs().max(l[2].abs()).max(l[3].abs()))
    });
    c.check(alpha_dev <= 1e-8 && prod <= 1e-7, format!("{name}: α multiset {{{alpha},{alpha},0,0}} dev {alpha_dev:.2e} ≤ 1e-8; |λ₁λ₂ − α|, |λ₃|, |λ₄| ≤ {prod:.2e} ≤ 1e-7"));
    let geo = records_max(&r, |s| s.leaf_geodesy_residual);
    let par = records_max(&r, |s| s.xi_parallel_residual);
    let lk = records_max(&r, |s| s.leaf_curvature.map(|k| (k - leaf_k).abs()));
    c.check(geo <= 1e-8 && par <= 1e-8, format!("{name}: leaf geodesy {geo:.2e}, ξ-parallelism {par:.2e} (≤ 1e-8)"));
    c.check(lk <= 1e-6, format!("{name}: leaf curvature {leaf_k} ± {lk:.2e} (≤ 1e-6)"));
    let ranks = &r.aggregates.gauss_map_ranks;
    c.check(ranks.len() == 1 && ranks.get("2") == Some(&n), format!("{name}: Gauss-map ranks {ranks:?}"));
    let generic = r.aggregates.lambda_generic_samples;
    let kahler = records_max(&r, |s| s.kahler_residual);
    c.check(kahler <= 1e-8, format!("{name}: Kähler residual {kahler:.2e} ≤ 1e-8 at {generic} λ-generic samples"));
    if need_generic {
        c.check(generic == n, format!("{name}: λ₁ ≠ λ₂ at {generic}/{n} samples"));
    }
    let failed: Vec<&String> = r.verdicts.iter().filter(|(_, v)| !v.is_pass()).map(|(k, _)| k).collect();
    c.check(failed.is_empty(), format!("{name}: report verdicts all PASS (failed: {failed:?})"));
}

fn su3_constructions() -> Criterion {
    let mut c = Criterion::new(3, "SU(3)/SO(3): Legendrian sphere and torus hypersurfaces", Some(60));
    c.time(|c| {
        for name in ["legendrian_sphere", "legendrian_torus"] {
            construction_suite(c, name, 0.75, 0.375, 0.5, false);
        }
    });
    c.finish()
}

fn sl3_constructions() -> Criterion {
    let mut c = Criterion::new(4, "SL(3)/SO(3): hyperboloid, hexenhut, ruled sphere, rank-one plane", Some(90));
    c.time(|c| {
        for name in ["hyperboloid", "hexenhut", "ruled_exp", "rank1_plane"] {
            construction_suite(c, name, -0.75, -0.375, -0.5, true);
        }
    });
    c.finish()
}

fn negative_control() -> Criterion {
    let mut c = Criterion::new(5, "β = 0 torus: minimal but not Einstein", None);
    c.time(|c| {
        let r = einstein_report(&chart("torus_beta0_control"), &SamplingPlan::new(256, 0), &Tolerances::analytic(1e-5)).unwrap();
        let h = max_of(&r, "abs_mean_curvature");
        let e = r.aggregates.min_einstein_residual;
        c.check(h <= 1e-6, format!("max |H| {h:.2e} ≤ 1e-6 over {} samples", r.samples_accepted));
        c.check(e >= 1e-2, format!("min Einstein residual {e:.3} ≥ 1e-2"));
        c.check(!r.verdicts["einstein"].is_pass(), "report verdict einstein = FAIL".into());
    });
    c.finish()
}

fn oracle_equivalence() -> Criterion {
    let mut c = Criterion::new(6, "intrinsic finite-difference Ricci agrees with the Gauss equation, O(h²)", None);
    c.time(|c| {
        let mut charts: Vec<HypersurfaceChart> = BUILTIN_NAMES.iter().filter_map(|n| HypersurfaceChart::new(builtin_surface(n).unwrap(), space_for(n)).ok()).collect();
        charts.push(solv_orbit());
        for hc in &charts {
            let mut rows = Vec::new();
            for x in candidate_points(hc, &SamplingPlan::new(40, 6)) {
                if rows.len() == 3 {
                    break;
                }
                if hc.metric(x).symmetric_eigenvalues().min() < 1e-2 {
                    continue;
                }
                let (Ok(d1), Ok(d2)) = (oracle_disagreement(hc, x, 1e-3), oracle_disagreement(hc, x, 5e-4)) else { continue };
                rows.push((d1, d2));
            }
            let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
            let orders: Vec<f64> = rows.iter().map(|(a, b)| (a / b).log2()).collect();
            let conv = rows.iter().zip(&orders).all(|((a, _), o)| *a < 1e-10 || (1.6..=2.4).contains(o));
            let ords: Vec<String> = orders.iter().map(|o| format!("{o:.2}")).collect();
            c.check(
                rows.len() == 3 && worst <= 1e-3 && conv,
                format!("{}: worst relative gap {worst:.2e} ≤ 1e-3 at h = 1e-3; observed orders [{}]", hc.name(), ords.join(", ")),
            );
        }
    });
    c.finish()
}

fn space_for(name: &str) -> Space {
    match builtin_surface(name).unwrap().model {
        SurfaceModel::Legendrian => Space::Su3So3,
        _ => Space::Sl3So3,
    }
}

fn solv_orbit() -> HypersurfaceChart {
    let s = solv_algebra(ModelKind::Sl3);
    let sub = s.codim1_subalgebra(&s.default_xi().unwrap()).unwrap();
    HypersurfaceChart::solv_orbit(&sub).unwrap()
}

fn singular_loci() -> Criterion {
    let mut c = Criterion::new(7, "singular loci: rank drops exactly along the predicted leaf family", None);
    c.time(|c| {
        let pi = std::f64::consts::PI;
        for (name, theta) in [("legendrian_torus", [-pi, pi]), ("legendrian_sphere", [-pi, pi]), ("hyperboloid", [-5.0, 5.0]), ("hexenhut", [-5.0, 5.0]), ("ruled_exp", [-5.0, 5.0])] {
            let hc = chart(name);
            let s = hc.surface().unwrap().clone();
            for (a, b) in [(0.37, 0.61), (0.71, 0.23)] {
                let u = [s.domain[0][0] + a * (s.domain[0][1] - s.domain[0][0]), s.domain[1][0] + b * (s.domain[1][1] - s.domain[1][0])];
                let p = singular_locus_probe(&hc, u, theta, [-1.0, 1.0], 41, 1e-6).unwrap();
                let dev = p.max_deviation.unwrap_or(f64::INFINITY);
                let found: Vec<Vec<f64>> = p.drops.iter().map(|d| vec![d.theta]).collect();
                let predicted: Vec<Vec<f64>> = p.scan.iter().map(|d| vec![d.theta]).collect();
                let dtheta = if found.is_empty() { f64::INFINITY } else { hausdorff(&found, &predicted) };
                c.check(
                    dev <= 1e-4 && dtheta <= 1e-4,
                    format!("{name} at u = ({:.3}, {:.3}): {}/{} θ-samples drop, θ-set distance {dtheta:.1e}, off-locus {dev:.1e} (≤ 1e-4)", u[0], u[1], p.drops.len(), p.scan.len()),
                );
            }
        }
        let hc = chart("rank1_plane");
        for u in [[0.3, -0.4], [-1.0, 0.8]] {
            let p = singular_locus_probe(&hc, u, [-5.0, 5.0], [-1.0, 1.0], 101, 1e-6).unwrap();
            let floor = p.scan.iter().map(|s| s.sigma_min).fold(f64::INFINITY, f64::min);
            c.check(p.drops.is_empty(), format!("rank1_plane at u = {u:?}: no drops for |θ| ≤ 5 (smallest σ {floor:.3})"));
        }
    });
    c.finish()
}

fn property_suites() -> Criterion {
    let mut c = Criterion::new(8, "structural property suites", None);
    c.time(|c| {
        let mut r = rng(8);
        for k in KINDS {
            let j = jacobi_identity(k, &mut r, 1000);
            c.check(j <= 1e-13, format!("{k:?}: Jacobi identity over 1000 triples {j:.1e} ≤ 1e-13"));
            let s = curvature_symmetries(k, &mut r, 100);
            c.check(s <= 1e-12, format!("{k:?}: curvature symmetries and Bianchi {s:.1e} ≤ 1e-12"));
            let nd = curvature_nondegeneracy(k, &mut r, 100);
            c.check(nd > 1e-8, format!("{k:?}: min over 100 pairs of max |R(X,E_a,E_b,Y)| = {nd:.3} > 1e-8"));
            let mixed = mixed_curvature_nonvanishing(k, &mut r);
            c.check(mixed > 1e-8, format!("{k:?}: min ‖R(A,X_β)X_γ‖ = {mixed:.2e} > 1e-8"));
            let g = bracket_grading(k);
            c.check(g <= 1e-11, format!("{k:?}: [k_β, p_γ] outside p_(β±γ) {g:.1e} ≤ 1e-11"));
            let t = theta_pairing(k, &mut r);
            c.check(t <= 1e-11, format!("{k:?}: ⟨[X_β, θX_β], A⟩ identity {t:.1e} ≤ 1e-11"));
            let (neg, reseed) = root_set_stability(k, 99);
            c.check(neg <= 1e-9 && reseed <= 1e-9, format!("{k:?}: root set ±-symmetric {neg:.1e}, reseeded {reseed:.1e} (≤ 1e-9)"));
            let e = symmetric_einstein(k);
            c.check(e <= 1e-10, format!("{k:?}: symmetric Ricci = c·g residual {e:.1e} ≤ 1e-10"));
        }
        for k in [ModelKind::Sl3, ModelKind::Sl4] {
            let a = solv_audit(k, &mut r, 20);
            c.check(
                a.ad_asymmetry <= 1e-12 && a.derived_leak <= 1e-11 && a.derived_dim_ok && a.constant_gap <= 1e-9 && a.trace_ad_xi <= 1e-12,
                format!(
                    "{k:?}: ad_a asymmetry {:.1e}, n = [s,s] leak {:.1e}, Einstein gap {:.1e}, Tr ad_ξ {:.1e}",
                    a.ad_asymmetry, a.derived_leak, a.constant_gap, a.trace_ad_xi
                ),
            );
        }
        for sp in [Space::Su3So3, Space::Sl3So3] {
            let eq = leaf_equivariance(sp, &mut r, 100);
            let ls = leaf_sectional(sp, &mut r, 100);
            let pd = induced_metric_min_eigenvalue(sp, &mut r, 100);
            c.check(eq <= 1e-11 && ls <= 1e-8 && pd > 0.0, format!("{}: leaf equivariance {eq:.1e}, leaf curvature dev {ls:.1e}, min metric eigenvalue {pd:.3}", sp.name()));
        }
        for name in BUILTIN_NAMES {
            let m = model_residual(name, 32);
            c.check(m <= 1e-10, format!("{name}: model residuals on 32×32 grid {m:.1e} ≤ 1e-10"));
        }
        for name in ["legendrian_sphere", "legendrian_torus", "torus_beta0_control"] {
            let sd = angle_spread(name, 32);
            c.check(sd <= 1e-9, format!("{name}: Legendrian angle std {sd:.1e} ≤ 1e-9"));
        }
        for name in ["hyperboloid", "hexenhut", "ruled_exp", "unit_sphere"] {
            let u = unimodular_invariance(name, &mut r, 10);
            c.check(u <= 1e-8, format!("{name}: centro-affine curvature under 10 unimodular maps {u:.1e} ≤ 1e-8"));
        }
        for name in ["hyperboloid", "hexenhut", "ruled_hyperboloid", "ruled_exp", "ruled_cubic", "unit_sphere"] {
            let bad = special_iff_curvature_minus_one(name, 12);
            c.check(bad == 0, format!("{name}: full system ⇔ K = −1 disagrees at {bad} points"));
        }
        // Self-consistency of every sample record on one chart per space.
        for name in ["legendrian_torus", "hexenhut"] {
            let hc = chart(name);
            let worst = candidate_points(&hc, &SamplingPlan::new(32, 4))
                .into_iter()
                .filter_map(|x| evaluate(&hc, x, &Tolerances::analytic(1e-5)).ok())
                .map(|s| s.consistency_residual)
                .fold(0.0, f64::max);
            c.check(worst <= 1e-10, format!("{name}: record self-consistency (H = Tr S, α = spec R̃_ξ) {worst:.1e}"));
        }
    });
    c.finish()
}

fn main() {
    let results = vec![symmetric_calibration(), solvmanifolds(), su3_constructions(), sl3_constructions(), negative_control(), oracle_equivalence(), singular_loci(), property_suites()];
    let failed: Vec<u32> = results.iter().filter(|c| !c.ok).map(|c| c.id).collect();
    println!("acceptance: {}/{} criteria PASS", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
