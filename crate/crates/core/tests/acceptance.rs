//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use common::*;
use groupoidal::atiyah::{build_atiyah, enumerate_projectable_bisections, verify_atiyah_sequence, verify_trident};
use groupoidal::automorphism::{
    automorphism_to_bisection, bisection_to_automorphism, enumerate_automorphisms, enumerate_gauge_group, same_automorphism,
    verify_automorphisms,
};
use groupoidal::bisection::{check_action_laws, check_structure_identities, enumerate_bisections, r_equivariant_commutant};
use groupoidal::bundle::{three_point_z2, verify_b_actions, verify_duck_quotient, verify_principal_axioms};
use groupoidal::connection::family::Family;
use groupoidal::connection::forms::{
    apply_theta, coherence_residual, gauge_transform_connection, gluing_residual, left_mult, shadow_theta, ActionArrow,
    BundleTangent, ChartSection, Connection, ConnectionSpec, GaugeData, LinearConnection,
};
use groupoidal::connection::forms::{anchor, covariant_derivative, mc_right, shadow_pushforward, tangent_conjugation};
use groupoidal::connection::lie::{rotation, rotation_generator, so3_generator, Mat, Vector};
use groupoidal::connection::scenario::{so2_single, so2_two_chart, so3_three_chart, Scenario};
use groupoidal::connection::sweep_max;
use groupoidal::connection::transport::{
    convergence_order, equivariance_residual, parallel_transport, shadow_transport, BasePath, Itinerary,
};
use groupoidal::groupoid::{pair, validate_groupoid, z2_swap};
use groupoidal::report::ValidationReport;

const CAP: u128 = 1 << 20;
const SEED: u64 = 0x5eed;

type Outcome = Result<String, String>;

fn require(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn report_ok(r: &ValidationReport, what: &str) -> Result<(), String> {
    let bad: Vec<String> = r.failed().map(|c| format!("{} {:?}", c.name, c.witnesses.first())).collect();
    require(bad.is_empty(), format!("{what}: {}", bad.join("; ")))
}

fn below(x: f64, limit: f64, what: &str) -> Result<(), String> {
    require(x < limit, format!("{what} = {x:.3e} (limit {limit:.0e})"))
}

fn groupoid_identities() -> Outcome {
    let mut cases = 0;
    for (name, g, n_bis, n_arrows) in [("Z2⋉{0,1}", z2_swap(), 2, 4), ("Pair(3)", pair(3), 6, 9)] {
        report_ok(&validate_groupoid(&g), name)?;
        require(g.n_arrows() == n_arrows, format!("{name}: {} arrows", g.n_arrows()))?;
        let group = enumerate_bisections(&g, CAP).map_err(|e| e.to_string())?;
        require(group.len() == n_bis, format!("{name}: {} bisections", group.len()))?;
        let ids = check_structure_identities(&g, CAP).map_err(|e| e.to_string())?;
        report_ok(&ids, name)?;
        report_ok(&check_action_laws(&g, &group), name)?;
        cases += ids.checks.iter().map(|c| c.cases).sum::<usize>();
    }
    Ok(format!("{cases} identity cases"))
}

fn commutant_oracle() -> Outcome {
    let mut sizes = Vec::new();
    for (name, g, want) in [("Z2⋉{0,1}", z2_swap(), 2), ("Pair(3)", pair(3), 6)] {
        let r = r_equivariant_commutant(&g, CAP).map_err(|e| e.to_string())?;
        require(r.r_equivariant_is_l, format!("{name}: equivariant bijections differ from left translations"))?;
        require(r.r_equivariant.len() == want, format!("{name}: {} equivariant bijections", r.r_equivariant.len()))?;
        sizes.push(r.r_equivariant.len());
    }
    Ok(format!("sizes {sizes:?}"))
}

fn bundle_battery() -> Outcome {
    let b = three_point_z2();
    require(b.points().len() == 12, format!("|P| = {}", b.points().len()))?;
    require(b.shadow_points().len() == 6, format!("|F| = {}", b.shadow_points().len()))?;
    report_ok(&verify_principal_axioms(&b), "axioms")?;
    report_ok(&verify_duck_quotient(&b), "duck quotient")?;
    report_ok(&verify_b_actions(&b, CAP).map_err(|e| e.to_string())?, "bisection actions")?;
    Ok("|P| = 12, |F| = 6".into())
}

fn atiyah_battery() -> Outcome {
    let b = three_point_z2();
    let at = build_atiyah(&b);
    require(at.len() == 36, format!("|At| = {}", at.len()))?;
    report_ok(&verify_atiyah_sequence(&at), "sequence")?;
    let t = verify_trident(&at);
    report_ok(&t, "trident")?;
    let inv = t.check("left.principal.inverse").ok_or("no left.principal.inverse check")?;
    require(inv.cases > 0, "left.principal.inverse is vacuous")?;
    Ok(format!("|At| = 36, {} division pairs", inv.cases))
}

fn theorem_c() -> Outcome {
    let b = three_point_z2();
    let at = build_atiyah(&b);
    let gauge = enumerate_gauge_group(&b, CAP).map_err(|e| e.to_string())?;
    require(gauge.len() == 8, format!("|Gauge| = {}", gauge.len()))?;
    let pb = enumerate_projectable_bisections(&at, CAP).map_err(|e| e.to_string())?;
    require(pb.vertical.len() == 8, format!("{} vertical bisections", pb.vertical.len()))?;
    for d in &gauge.elements {
        let beta = automorphism_to_bisection(&at, d);
        let back = bisection_to_automorphism(&at, &beta).map_err(|e| e.to_string())?;
        require(same_automorphism(&b, d, &back), "automorphism round trip")?;
    }
    report_ok(&verify_automorphisms(&at, &gauge, &pb.vertical), "gauge")?;
    let aut = enumerate_automorphisms(&b, CAP).map_err(|e| e.to_string())?;
    let all: Vec<_> = pb.projectable.iter().map(|p| p.bisection.clone()).collect();
    report_ok(&verify_automorphisms(&at, &aut, &all), "automorphisms")?;
    Ok(format!("|Gauge| = 8, |Aut| = {}, |Bisec_π| = {}", aut.len(), all.len()))
}

fn connection_suite() -> Outcome {
    let s = so2_two_chart();
    let a = constructed(&s);
    let glue = sweep_max(100, SEED, |rng| {
        let sigma = sample_in(&s, &[0, 1], rng);
        let (m, u) = (s.random_point(rng, 2.0), s.random_direction(rng));
        Ok(gluing_residual(&s, &a, 0, 1, &sigma, &m, &u)?.max(gluing_residual(&s, &a, 1, 0, &sigma, &m, &u)?))
    });
    below(glue, 1e-7, "gluing residual")?;
    let closed = sweep_max(100, SEED + 1, |rng| {
        let j = rng.gen_index(2);
        let sigma = s.charts[j].sample(rng, 0.02);
        let (m, u) = (s.random_point(rng, 2.0), s.random_direction(rng));
        let h = bump_weights(&s, &sigma);
        // Angle of the chart-0 trivializer: 0.8 σ₁ + 0.3 sin σ₂.
        let dtheta = 0.8 * u[0] + 0.3 * sigma[1].cos() * u[1];
        let want = if j == 1 { rotation_generator() * (h[0] * dtheta) } else { rotation_generator() * (-h[1] * dtheta) };
        Ok((a.eval(j, &sigma, &m, &u)? - want).norm())
    });
    below(closed, 1e-9, "abelian closed form")?;
    let mut coherence = 0.0f64;
    for (sc, triples) in [
        (&s, vec![(0, 1, 0), (1, 0, 1), (0, 0, 1)]),
        (&so3_three_chart(), vec![(0, 1, 2), (2, 1, 0), (1, 2, 0)]),
    ] {
        for (i, j, k) in triples {
            coherence = coherence.max(sweep_max(100, SEED + 2, |rng| {
                let sigma = sample_in(sc, &[i, j, k], rng);
                let (m, u, x) = (sc.random_point(rng, 2.0), sc.random_direction(rng), sc.random_algebra(rng, 1.0));
                coherence_residual(sc, (i, j, k), &sigma, &m, &u, &x)
            }));
        }
    }
    below(coherence, 1e-6, "triple-overlap coherence")?;
    let projector = sweep_max(100, SEED + 3, |rng| {
        let j = rng.gen_index(2);
        let sigma = s.charts[j].sample(rng, 0.02);
        let (ag, m) = (s.random_group(rng), s.random_point(rng, 2.0));
        let t = BundleTangent {
            u: s.random_direction(rng),
            v: s.random_algebra(rng, 1.0) * &ag,
            w: s.random_point(rng, 1.0),
        };
        let once = apply_theta(&a, j, &sigma, (&ag, &m), &t)?;
        let twice = apply_theta(&a, j, &sigma, (&ag, &m), &once)?;
        let horizontal = BundleTangent {
            u: t.u.clone(),
            v: -(a.eval(j, &sigma, &(&ag * &m), &t.u)? * &ag),
            w: Vector::zeros(2),
        };
        let kernel = apply_theta(&a, j, &sigma, (&ag, &m), &horizontal)?;
        Ok((&twice.v - &once.v).norm() + (&once.w - &t.w).norm() + kernel.v.norm() + once.u.iter().map(|x| x.abs()).sum::<f64>())
    });
    below(projector, 1e-9, "projector residual")?;
    let intertwine = sweep_max(100, SEED + 4, |rng| {
        let j = rng.gen_index(2);
        let sigma = s.charts[j].sample(rng, 0.02);
        let (ag, m) = (s.random_group(rng), s.random_point(rng, 2.0));
        let t = BundleTangent {
            u: s.random_direction(rng),
            v: s.random_algebra(rng, 1.0) * &ag,
            w: s.random_point(rng, 1.0),
        };
        let lhs = shadow_theta(&a, j, &sigma, &(&ag * &m), &t.u, &fd_duck(&ag, &m, &t.v, &t.w))?;
        let th = apply_theta(&a, j, &sigma, (&ag, &m), &t)?;
        Ok(rel_v(&lhs, &fd_duck(&ag, &m, &th.v, &th.w)))
    });
    below(intertwine, 1e-6, "shadow intertwining")?;
    Ok(format!(
        "gluing {glue:.1e}, closed form {closed:.1e}, coherence {coherence:.1e}, projector {projector:.1e}, intertwining {intertwine:.1e}"
    ))
}

fn circle_path() -> BasePath {
    BasePath::Circle { center: [0.5, 0.6], radius: 1.1, turns: 1.0, phase: 0.3 }
}

fn transport_suite() -> Outcome {
    let single = so2_single();
    let unit_j = LinearConnection { coeffs: vec![vec![rotation_generator(), Mat::zeros(2, 2)]] };
    let line = BasePath::Line { from: vec![0.0, 0.0], to: vec![1.0, 0.0] };
    let a0 = rotation(0.7);
    let m0 = Vector::from_vec(vec![0.4, -1.2]);
    let lift = parallel_transport(&single, &unit_j, &line, &Itinerary::single(0), (&a0, &m0), 1e-3).map_err(|e| e.to_string())?;
    let closed = (&lift.a - rotation(-1.0) * &a0).norm();
    below(closed, 1e-8, "closed-form endpoint")?;
    let order_so2 = convergence_order(&single, &unit_j, &line, &Itinerary::single(0), (&a0, &m0), 0.1).map_err(|e| e.to_string())?;

    let s = Arc::new(so3_three_chart());
    let a = ConnectionSpec::Global { coeffs: vec![vec![0.4, -0.2, 0.7], vec![0.1, 0.5, -0.3]] }
        .build(&s)
        .map_err(|e| e.to_string())?;
    let a = a.as_ref();
    let path = circle_path();
    let itin = Itinerary::auto(&s, &path).map_err(|e| e.to_string())?;
    let g0 = so3_generator(0).scale(0.6).exp() * so3_generator(2).scale(-1.1).exp();
    let x0 = Vector::from_vec(vec![0.8, -0.3, 1.1]);
    let order_so3 = convergence_order(&s, a, &path, &itin, (&g0, &x0), 0.1).map_err(|e| e.to_string())?;
    for (name, order) in [("SO(2)", order_so2), ("SO(3)", order_so3)] {
        require((3.7..=4.3).contains(&order), format!("{name} RK4 order {order:.3}"))?;
    }
    let b = so3_generator(1).scale(0.9).exp();
    let equiv = equivariance_residual(&s, a, &path, &itin, (&g0, &x0), &b, 1e-2).map_err(|e| e.to_string())?;
    below(equiv, 1e-6, "equivariance residual")?;
    let lift = parallel_transport(&s, a, &path, &itin, (&g0, &x0), 1e-2).map_err(|e| e.to_string())?;
    let shadow = shadow_transport(&s, a, &path, &itin, &(&g0 * &x0), 1e-2).map_err(|e| e.to_string())?;
    let shadow_res = (lift.shadow() - shadow).norm();
    below(shadow_res, 1e-6, "shadow-of-lift residual")?;
    Ok(format!(
        "closed form {closed:.1e}, order {order_so2:.3} (SO(2)) {order_so3:.3} (SO(3), {} legs), equivariance {equiv:.1e}, shadow {shadow_res:.1e}",
        itin.legs.len()
    ))
}

fn so2_gauge(s: &Scenario) -> GaugeData {
    GaugeData::from_chart_zero(s, Family::exp(rotation_generator(), so2_gauge_phase()))
}

fn so3_gauge(s: &Scenario) -> GaugeData {
    use groupoidal::connection::family::Phase;
    let phase = Phase::sigma_linear(vec![0.3, -0.2]).plus(Phase::Affine { c: 0.1, sigma: vec![], m: vec![0.0, 0.25, 0.0] });
    GaugeData::from_chart_zero(s, Family::exp(so3_generator(1), phase))
}

fn global_section(s: &Scenario) -> Arc<dyn Fn(&[f64]) -> Vector + Send + Sync> {
    if s.n() == 2 {
        Arc::new(|x: &[f64]| Vector::from_vec(vec![(x[0] + x[1]).cos() + 0.5, 0.3 * x[1] - 0.2 * x[0] * x[0]]))
    } else {
        Arc::new(|x: &[f64]| Vector::from_vec(vec![x[0].cos(), (0.7 * x[1]).sin() + 0.2, 0.5 * x[0] * x[1] - 0.3]))
    }
}

fn gauge_suite() -> Outcome {
    let mut worst = [0.0f64; 4];
    for (s, gauge) in [
        (so2_two_chart(), so2_gauge as fn(&Scenario) -> GaugeData),
        (so3_three_chart(), so3_gauge),
    ] {
        let s = Arc::new(s);
        let base: Arc<dyn Connection> = Arc::new(constructed(&s));
        let g = gauge(&s);
        let gauged: Arc<dyn Connection> = Arc::new(gauge_transform_connection(base.clone(), g.clone()).map_err(|e| e.to_string())?);
        let back = gauge_transform_connection(gauged.clone(), g.inverse().unwrap()).map_err(|e| e.to_string())?;
        let nc = s.n_charts();
        let round = sweep_max(100, SEED + 5, |rng| {
            let j = rng.gen_index(nc);
            let sigma = s.charts[j].sample(rng, 0.02);
            let (m, u) = (s.random_point(rng, 2.0), s.random_direction(rng));
            Ok(s.group.norm(&(back.eval(j, &sigma, &m, &u)? - base.eval(j, &sigma, &m, &u)?)))
        });
        let glue = sweep_max(100, SEED + 6, |rng| {
            let i = rng.gen_index(nc);
            let j = (i + 1 + rng.gen_index(nc - 1)) % nc;
            let Some(ov) = s.overlap(&[i, j]) else { return Ok(0.0) };
            let sigma = ov.sample(rng, 0.02);
            let (m, u) = (s.random_point(rng, 2.0), s.random_direction(rng));
            gluing_residual(&s, gauged.as_ref(), i, j, &sigma, &m, &u)
        });
        let section = ChartSection::from_global(&s, global_section(&s)).map_err(|e| e.to_string())?;
        let moved = section.gauged(&g).map_err(|e| e.to_string())?;
        let covariance = sweep_max(100, SEED + 7, |rng| {
            let j = rng.gen_index(nc);
            let sigma = s.charts[j].sample(rng, 0.05);
            let u = s.random_direction(rng);
            let lhs = covariant_derivative(gauged.as_ref(), &moved, j, &sigma, &u, s.fd_step)?;
            let plain = covariant_derivative(base.as_ref(), &section, j, &sigma, &u, s.fd_step)?;
            let rhs = shadow_pushforward(&g.families[j], &sigma, &section.charts[j](&sigma), &plain);
            Ok(rel_v(&lhs, &rhs))
        });
        worst[0] = worst[0].max(round);
        worst[1] = worst[1].max(glue);
        worst[2] = worst[2].max(covariance);
    }
    below(worst[0], 1e-7, "gauge round trip")?;
    below(worst[1], 1e-7, "gauged gluing residual")?;
    below(worst[2], 1e-6, "covariance residual")?;
    let s = so3_three_chart();
    let fam = s.transition(0, 1).clone();
    worst[3] = sweep_max(1000, SEED + 8, |rng| {
        let sigma = sample_in(&s, &[0, 1], rng);
        let (r, v) = (s.random_group(rng), s.random_point(rng, 2.0));
        let l = left_mult(&fam, &sigma, &ActionArrow { g: r.clone(), m: v.clone() });
        Ok((l.g - fam.group(&sigma, &(&r * &v)) * &r).norm() + (l.m - v).norm())
    });
    below(worst[3], 1e-9, "left-multiplication closed form")?;
    Ok(format!(
        "round trip {:.1e}, gluing {:.1e}, covariance {:.1e}, left mult {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn fd_oracles() -> Outcome {
    let mut worst = [0.0f64; 3];
    for s in [so2_two_chart(), so3_three_chart()] {
        let mut families: Vec<Family> = Vec::new();
        for i in 0..s.n_charts() {
            for j in 0..s.n_charts() {
                if i != j && s.has_transition(i, j) {
                    families.push(s.transition(i, j).clone());
                }
            }
        }
        families.extend(s.trivializers.clone().unwrap_or_default());
        let nf = families.len();
        let nc = s.n_charts();
        let mc = sweep_max(1000, SEED + 9, |rng| {
            let f = &families[rng.gen_index(nf)];
            let sigma = s.charts[rng.gen_index(nc)].sample(rng, 0.0);
            let (m, u) = (s.random_point(rng, 2.0), s.random_direction(rng));
            Ok(rel(&mc_right(f, &m, &sigma, &u), &fd_mc_right(f, &m, &sigma, &u)))
        });
        let tc = sweep_max(1000, SEED + 10, |rng| {
            let f = &families[rng.gen_index(nf)];
            let sigma = s.charts[rng.gen_index(nc)].sample(rng, 0.0);
            let (m, x) = (s.random_point(rng, 2.0), s.random_algebra(rng, 1.0));
            Ok(rel(&tangent_conjugation(f, &sigma, &m, &x).0, &fd_tangent_conjugation(f, &sigma, &m, &x)))
        });
        let an = sweep_max(1000, SEED + 11, |rng| {
            let (m, x) = (s.random_point(rng, 2.0), s.random_algebra(rng, 1.0));
            Ok(rel_v(&anchor(&m, &x), &fd_anchor(&m, &x)))
        });
        for (w, v) in worst.iter_mut().zip([mc, tc, an]) {
            *w = w.max(v);
        }
    }
    below(worst[0], 1e-7, "mc_right vs finite differences")?;
    below(worst[1], 1e-7, "tangent_conjugation vs finite differences")?;
    below(worst[2], 1e-7, "anchor vs finite differences")?;
    Ok(format!("mc_right {:.1e}, tangent_conjugation {:.1e}, anchor {:.1e}", worst[0], worst[1], worst[2]))
}

trait Pick {
    fn gen_index(&mut self, n: usize) -> usize;
}

impl Pick for rand_chacha::ChaCha8Rng {
    fn gen_index(&mut self, n: usize) -> usize {
        use rand::Rng;
        self.gen_range(0..n)
    }
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 9] = [
        ("groupoid and bisection identities", 1.0, groupoid_identities),
        ("equivariant bijections are left translations", 1.0, commutant_oracle),
        ("bundle battery", 1.0, bundle_battery),
        ("Atiyah battery", 2.0, atiyah_battery),
        ("automorphisms and projectable bisections", 5.0, theorem_c),
        ("numeric connection suite", 5.0, connection_suite),
        ("parallel transport", 5.0, transport_suite),
        ("gauge covariance", 10.0, gauge_suite),
        ("finite-difference oracles", 10.0, fd_oracles),
    ];
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = outcome.and_then(|d| if secs < budget { Ok(d) } else { Err(format!("took {secs:.2} s, budget {budget} s; {d}")) });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.2} s) {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.2} s) {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
