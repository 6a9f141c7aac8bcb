use std::sync::Arc;

use clap::ValueEnum;
use groupoidal::atiyah::{build_atiyah, enumerate_projectable_bisections, verify_atiyah_sequence, verify_trident};
use groupoidal::automorphism::{
    enumerate_automorphisms, enumerate_gauge_group, validate_automorphism, verify_automorphisms, AutomorphismError,
};
use groupoidal::bisection::{
    check_action_laws, check_structure_identities, enumerate_bisections, is_id_reducible, r_equivariant_commutant, CapExceeded,
    IdReducibility,
};
use groupoidal::bundle::{
    build_bundle_unchecked, three_point_z2, validate_cocycle, verify_b_actions, verify_duck_quotient, verify_principal_axioms,
    BundleDoc, BundleError, PrincipaloidBundle,
};
use groupoidal::connection::forms::{gluing_residual, ConnectionSpec};
use groupoidal::connection::lie::{Mat, Vector};
use groupoidal::connection::scenario::{shipped, verify_scenario, Scenario, ScenarioDoc};
use groupoidal::connection::transport::{summarize, BasePath, Itinerary};
use groupoidal::connection::{seeded_rng, sweep, NumericError};
use groupoidal::groupoid::{pair, validate_groupoid, z2_swap, FiniteGroupoid};
use groupoidal::report::ValidationReport;
use rand::Rng;
use serde::Deserialize;
use serde_json::Value;

use crate::input::{parse_as, parse_doc, parse_tagged, read_source, AutomorphismInput, InputDoc};
use crate::report::{Abort, Report};
use crate::{BundleReport, Cli, Command};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    Z2,
    Pair3,
    Pair4,
    ThreePoint,
    GaugeElement,
    So2Single,
    So2TwoChart,
    So3Single,
    So3ThreeChart,
}

pub fn example(name: ExampleName) -> Value {
    let scenario = |s: &str| InputDoc::Scenario(shipped(s).expect("shipped").to_doc());
    let doc = match name {
        ExampleName::Z2 => InputDoc::Groupoid(z2_swap().to_doc()),
        ExampleName::Pair3 => InputDoc::Groupoid(pair(3).to_doc()),
        ExampleName::Pair4 => InputDoc::Groupoid(pair(4).to_doc()),
        ExampleName::ThreePoint => InputDoc::Bundle(three_point_z2().to_doc()),
        ExampleName::GaugeElement => {
            let b = three_point_z2();
            let gauge = enumerate_gauge_group(&b, 1 << 20).expect("small");
            let d = gauge.elements.iter().find(|d| d.gamma.values().any(|x| x.assign().iter().any(|&a| !b.groupoid().is_unit(a))));
            InputDoc::Automorphism(AutomorphismInput {
                bundle: b.to_doc(),
                automorphism: d.expect("non-trivial gauge transformation").to_doc(&b),
            })
        }
        ExampleName::So2Single => scenario("so2-single"),
        ExampleName::So2TwoChart => scenario("so2-two-chart"),
        ExampleName::So3Single => scenario("so3-single"),
        ExampleName::So3ThreeChart => scenario("so3-three-chart"),
    };
    doc.to_json()
}

pub fn run(cli: &Cli) -> Report {
    let name = match &cli.command {
        Command::Validate { .. } => "validate",
        Command::CheckIdentities { .. } => "check-identities",
        Command::Bundle { .. } => "bundle",
        Command::Transport { .. } => "transport",
        Command::Example { .. } => "example",
    };
    let mut report = Report::new(name, cli.seed);
    let outcome = match &cli.command {
        Command::Validate { path } => validate(&mut report, cli, path),
        Command::CheckIdentities { path, cap } => check_identities(&mut report, path, *cap),
        Command::Bundle { path, report: which, cap } => bundle(&mut report, path, *which, *cap),
        Command::Transport {
            scenario,
            path,
            step,
            connection,
            start,
        } => transport(&mut report, cli, scenario, path.as_deref(), *step, connection, start.as_deref()),
        Command::Example { .. } => Ok(()),
    };
    report.finish(outcome);
    report
}

fn cap_abort(c: CapExceeded) -> Abort {
    Abort::cap(format!("enumeration needs {} candidates, cap is {}", c.needed, c.cap))
}

fn bundle_abort(e: BundleError) -> Abort {
    match e {
        BundleError::InvalidCocycle(_) => Abort::property(e),
        _ => Abort::input(e),
    }
}

fn automorphism_abort(e: AutomorphismError) -> Abort {
    match e {
        AutomorphismError::Cap(c) => cap_abort(c),
        AutomorphismError::UnknownBase(_) | AutomorphismError::Missing { .. } => Abort::input(e),
        _ => Abort::property(e),
    }
}

fn numeric_abort(e: NumericError) -> Abort {
    match e {
        NumericError::Input(_) | NumericError::Domain(_) => Abort::input(e),
        NumericError::NoConvergence(_) | NumericError::Divergence(_) => Abort::numeric(e),
    }
}

fn groupoid_from(report: &mut Report, doc: &groupoidal::groupoid::GroupoidDoc) -> Result<Option<FiniteGroupoid>, Abort> {
    let g = FiniteGroupoid::from_doc(doc).map_err(Abort::input)?;
    report.put("objects", g.n_objects());
    report.put("arrows", g.n_arrows());
    let r = report.timed("groupoid", || validate_groupoid(&g));
    let ok = r.is_ok();
    report.add_checks("groupoid", r);
    Ok(ok.then_some(g))
}

/// The bundle, if its groupoid and cocycle validate; the checks go into `report`.
fn bundle_from(report: &mut Report, doc: &BundleDoc) -> Result<Option<PrincipaloidBundle>, Abort> {
    let (base, cocycle, _) = doc.parts().map_err(bundle_abort)?;
    let Some(g) = groupoid_from(report, &doc.groupoid)? else { return Ok(None) };
    let r = report.timed("cocycle", || validate_cocycle(&base, &cocycle, &g)).map_err(bundle_abort)?;
    let ok = r.is_ok();
    report.add_checks("", r);
    Ok(ok.then(|| build_bundle_unchecked(base, cocycle, g)))
}

fn validate(report: &mut Report, cli: &Cli, path: &str) -> Result<(), Abort> {
    let (bytes, digest) = read_source(path)?;
    report.inputs.push(digest);
    let doc = parse_doc(&bytes)?;
    report.put("kind", doc.kind());
    match doc {
        InputDoc::Groupoid(d) => {
            groupoid_from(report, &d)?;
        }
        InputDoc::Bundle(d) => {
            bundle_from(report, &d)?;
        }
        InputDoc::Automorphism(a) => {
            if let Some(b) = bundle_from(report, &a.bundle)? {
                let data = a.automorphism.resolve(&b).map_err(automorphism_abort)?;
                let r = validate_automorphism(&b, &data).map_err(automorphism_abort)?;
                report.add_checks("automorphism", r);
                report.put("vertical", data.is_vertical());
            }
        }
        InputDoc::Scenario(d) => {
            let s = scenario_with_overrides(report, cli, Scenario::from_doc(&d).map_err(numeric_abort)?);
            let r = report.timed("scenario", || verify_scenario(&s, 200, &mut seeded_rng(cli.seed)));
            report.add_checks("scenario", r);
        }
    }
    Ok(())
}

fn groupoid_input(report: &mut Report, path: &str) -> Result<groupoidal::groupoid::GroupoidDoc, Abort> {
    let (bytes, digest) = read_source(path)?;
    report.inputs.push(digest);
    match parse_doc(&bytes)? {
        InputDoc::Groupoid(d) => Ok(d),
        InputDoc::Bundle(d) => Ok(d.groupoid),
        InputDoc::Automorphism(a) => Ok(a.bundle.groupoid),
        InputDoc::Scenario(_) => Err(Abort::input("expected a groupoid or bundle document")),
    }
}

fn check_identities(report: &mut Report, path: &str, cap: u128) -> Result<(), Abort> {
    let doc = groupoid_input(report, path)?;
    let Some(g) = groupoid_from(report, &doc)? else { return Ok(()) };
    let group = report.timed("enumerate", || enumerate_bisections(&g, cap)).map_err(cap_abort)?;
    report.put("bisections", group.len());
    let ids = report.timed("identities", || check_structure_identities(&g, cap)).map_err(cap_abort)?;
    report.add_checks("identities", ids);
    report.add_checks("actions", check_action_laws(&g, &group));
    let c = report.timed("commutant", || r_equivariant_commutant(&g, cap)).map_err(cap_abort)?;
    let (n_eq, n_left) = (c.r_equivariant.len(), c.left_translations.len());
    report.check("commutant.r-equivariant-is-left", c.r_equivariant_is_l, || {
        format!("{n_eq} equivariant bijections, {n_left} left translations")
    });
    report.put("r_equivariant_bijections", n_eq);
    report.put("left_translations", n_left);
    report.put("bisection_commutant_size", c.r_bisection_commutant.len());
    report.put("bisection_commutant_is_left", c.r_bisection_commutant_is_l);
    match report.timed("id-reducible", || is_id_reducible(&g, None)) {
        IdReducibility::Reducible { .. } => report.put("id_reducible", true),
        IdReducibility::NotReducible { counterexample } => {
            report.put("id_reducible", false);
            report.put("no_bisection_through", g.arrow_name(counterexample));
        }
    }
    Ok(())
}

fn bundle(report: &mut Report, path: &str, which: BundleReport, cap: u128) -> Result<(), Abort> {
    let (bytes, digest) = read_source(path)?;
    report.inputs.push(digest);
    let doc = match parse_doc(&bytes)? {
        InputDoc::Bundle(d) => d,
        InputDoc::Automorphism(a) => a.bundle,
        _ => return Err(Abort::input("expected a bundle document")),
    };
    let Some(b) = bundle_from(report, &doc)? else { return Ok(()) };
    match which {
        BundleReport::Counts => {
            let at = report.timed("atiyah", || build_atiyah(&b));
            let gauge = report.timed("gauge", || enumerate_gauge_group(&b, cap)).map_err(automorphism_abort)?;
            let counts = [b.points().len(), b.shadow_points().len(), at.adjoint_elements().len(), at.len(), gauge.len()];
            report.put("bundle", counts[0]);
            report.put("shadow", counts[1]);
            report.put("adjoint", counts[2]);
            report.put("atiyah", counts[3]);
            report.put("gauge", counts[4]);
            report.put("counts", counts.map(|c| c.to_string()).join("/"));
        }
        BundleReport::Axioms => {
            let r = report.timed("axioms", || verify_principal_axioms(&b));
            report.add_checks("principal", r);
            report.add_checks("quotient", verify_duck_quotient(&b));
            let r = report.timed("bisection-actions", || verify_b_actions(&b, cap)).map_err(cap_abort)?;
            report.add_checks("bisection-actions", r);
        }
        BundleReport::Atiyah => {
            let at = build_atiyah(&b);
            report.put("atiyah", at.len());
            let r = report.timed("sequence", || verify_atiyah_sequence(&at));
            report.add_checks("atiyah", r);
        }
        BundleReport::Trident => {
            let at = build_atiyah(&b);
            let r = report.timed("trident", || verify_trident(&at));
            report.add_checks("trident", r);
        }
        BundleReport::Gauge => {
            let at = build_atiyah(&b);
            let gauge = report.timed("gauge", || enumerate_gauge_group(&b, cap)).map_err(automorphism_abort)?;
            let pb = report.timed("projectable", || enumerate_projectable_bisections(&at, cap)).map_err(cap_abort)?;
            let (ng, nv) = (gauge.len(), pb.vertical.len());
            report.check("gauge.counts-match", ng == nv, || format!("{ng} gauge transformations, {nv} vertical bisections"));
            let r = report.timed("gauge-checks", || verify_automorphisms(&at, &gauge, &pb.vertical));
            report.add_checks("gauge", r);
            let aut = report.timed("automorphisms", || enumerate_automorphisms(&b, cap)).map_err(automorphism_abort)?;
            let all: Vec<_> = pb.projectable.iter().map(|p| p.bisection.clone()).collect();
            let (na, np) = (aut.len(), all.len());
            report.check("automorphisms.counts-match", na == np, || format!("{na} automorphisms, {np} projectable bisections"));
            let r = report.timed("automorphism-checks", || verify_automorphisms(&at, &aut, &all));
            report.add_checks("automorphisms", r);
            report.put("gauge", ng);
            report.put("automorphisms", na);
            report.put("projectable_bisections", np);
        }
    }
    Ok(())
}

fn scenario_with_overrides(report: &mut Report, cli: &Cli, mut s: Scenario) -> Scenario {
    if let Some(x) = cli.fd_step {
        s.fd_step = x;
    }
    if let Some(x) = cli.ode_step {
        s.ode_step = x;
    }
    if let Some(x) = cli.tol {
        s.tol = x;
    }
    report.tolerances.insert("tol".into(), s.tol);
    report.tolerances.insert("fd_step".into(), s.fd_step);
    report.tolerances.insert("ode_step".into(), s.ode_step);
    s
}

fn load_scenario(report: &mut Report, source: &str) -> Result<Scenario, Abort> {
    if let Some(s) = shipped(source) {
        report.inputs.push(crate::report::InputDigest::of(source, source.as_bytes()));
        return Ok(s);
    }
    let (bytes, digest) = read_source(source)?;
    report.inputs.push(digest);
    let doc: ScenarioDoc = parse_as(&bytes, "scenario")?;
    Scenario::from_doc(&doc).map_err(numeric_abort)
}

fn default_path(s: &Scenario) -> BasePath {
    if s.n_charts() == 1 {
        let mut to = vec![0.0; s.base_dim];
        to[0] = 1.0;
        BasePath::Line {
            from: vec![0.0; s.base_dim],
            to,
        }
    } else {
        BasePath::Circle {
            center: [0.5, 0.6],
            radius: 1.1,
            turns: 1.0,
            phase: 0.3,
        }
    }
}

#[derive(Deserialize)]
struct StartDoc {
    a: Vec<Vec<f64>>,
    m: Vec<f64>,
}

fn load_start(report: &mut Report, s: &Scenario, source: Option<&str>) -> Result<(Mat, Vector), Abort> {
    let n = s.n();
    let Some(source) = source else {
        let mut m = Vector::zeros(n);
        m[0] = 1.0;
        return Ok((Mat::identity(n, n), m));
    };
    let (bytes, digest) = read_source(source)?;
    report.inputs.push(digest);
    let doc: StartDoc = parse_as(&bytes, "start point")?;
    if doc.a.len() != n || doc.a.iter().any(|r| r.len() != n) || doc.m.len() != n {
        return Err(Abort::input(format!("start point must be {n}×{n} and length {n}")));
    }
    let a = Mat::from_row_iterator(n, n, doc.a.into_iter().flatten());
    if (a.transpose() * &a - Mat::identity(n, n)).norm() > 1e-9 || a.determinant() < 0.0 {
        return Err(Abort::input("start group element is not a rotation"));
    }
    Ok((a, Vector::from_vec(doc.m)))
}

fn load_connection(report: &mut Report, s: &Arc<Scenario>, source: &str) -> Result<ConnectionSpec, Abort> {
    Ok(match source {
        "zero" => ConnectionSpec::Zero,
        "constructed" => ConnectionSpec::Constructed,
        "first-generator" => {
            let mut first = vec![0.0; s.group.dim()];
            first[0] = 1.0;
            let mut per = vec![vec![0.0; s.group.dim()]; s.base_dim];
            per[0] = first;
            ConnectionSpec::Linear {
                coeffs: vec![per; s.n_charts()],
            }
        }
        other => {
            let (bytes, digest) = read_source(other)?;
            report.inputs.push(digest);
            parse_tagged(&bytes, "connection")?
        }
    })
}

fn transport(
    report: &mut Report,
    cli: &Cli,
    scenario: &str,
    path: Option<&str>,
    step: Option<f64>,
    connection: &str,
    start: Option<&str>,
) -> Result<(), Abort> {
    let s = load_scenario(report, scenario)?;
    let s = Arc::new(scenario_with_overrides(report, cli, s));
    let h = step.unwrap_or(s.ode_step);
    if !(h > 0.0 && h.is_finite()) {
        return Err(Abort::input("step must be positive"));
    }
    report.tolerances.insert("step".into(), h);
    let path = match path {
        Some(src) => {
            let (bytes, digest) = read_source(src)?;
            report.inputs.push(digest);
            parse_tagged(&bytes, "path")?
        }
        None => default_path(&s),
    };
    path.validate(s.base_dim).map_err(numeric_abort)?;
    let spec = load_connection(report, &s, connection)?;
    report.put("connection", &spec);
    let conn = spec.build(&s).map_err(numeric_abort)?;
    let (a0, m0) = load_start(report, &s, start)?;
    let itin = Itinerary::auto(&s, &path).map_err(numeric_abort)?;
    let b = s.random_group(&mut seeded_rng(cli.seed));

    let summary = report
        .timed("transport", || summarize(&s, conn.as_ref(), &path, &itin, (&a0, &m0), &b, h))
        .map_err(numeric_abort)?;
    let mut r = ValidationReport::new();
    r.record("finite", summary.endpoint.iter().flatten().all(|x| x.is_finite()), || "non-finite endpoint".into());
    r.record("shadow-consistent", summary.shadow_residual < 1e-6, || format!("residual {:e}", summary.shadow_residual));
    r.record("equivariant", summary.equivariance_residual < 1e-6, || {
        format!("residual {:e}", summary.equivariance_residual)
    });
    report.add_checks("transport", r);

    let pairs: Vec<(usize, usize)> = (0..s.n_charts())
        .flat_map(|i| (0..s.n_charts()).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && s.overlap(&[i, j]).is_some())
        .collect();
    let mut glue = ValidationReport::new();
    glue.declare("gluing");
    if !pairs.is_empty() {
        let results = report.timed("gluing", || {
            sweep(100, cli.seed, |rng| {
                let (i, j) = pairs[rng.gen_range(0..pairs.len())];
                let sigma = s.overlap(&[i, j]).expect("overlap").sample(rng, 0.02);
                let (m, u) = (s.random_point(rng, 2.0), s.random_direction(rng));
                (i, j, sigma.clone(), gluing_residual(&s, conn.as_ref(), i, j, &sigma, &m, &u))
            })
        });
        for (i, j, sigma, res) in results {
            let res = res.map_err(numeric_abort)?;
            glue.record("gluing", res < s.tol, || format!("({i},{j}) at {sigma:?}: {res:e}"));
        }
    }
    report.add_checks("connection", glue);
    report.put("transport", &summary);
    Ok(())
}
