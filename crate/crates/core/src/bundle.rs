//! Principaloid bundles clutched from a finite base, a cover and a
//! bisection-valued 1-cocycle.
//!
//! A point of 𝒫 is a class of triples (σ, g, i) with σ ∈ O_i, where
//! (σ, g, j) ~ (σ, β_ij(σ)▹g, i). Points are stored in their canonical chart,
//! the least cover index containing σ. The shadow bundle ℱ is glued the same
//! way by the shadow action of the cocycle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bisection::{
    bisection_inverse, bisection_product, bisection_through, enumerate_bisections, left_mult, right_mult,
    shadow, validate_bisection, Bisection, CapExceeded,
};
use crate::groupoid::{Arrow, FiniteGroupoid, GroupoidDoc, Obj, StructureError};
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BundleError {
    #[error("base: {0}")]
    Base(String),
    #[error("cocycle entry ({i}, {j}, {sigma}): {reason}")]
    CocycleEntry {
        i: usize,
        j: usize,
        sigma: usize,
        reason: String,
    },
    #[error("cocycle violates {} condition(s)", .0.failed().map(|c| c.failures).sum::<usize>())]
    InvalidCocycle(ValidationReport),
    #[error(transparent)]
    Groupoid(#[from] StructureError),
    #[error("base point {sigma} is not in chart {chart}")]
    OutsideChart { sigma: usize, chart: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("moment {moment} does not match target {target} of the acting arrow")]
    MomentMismatch { moment: Obj, target: Obj },
    #[error("points lie in different fibres of the sitting-duck map")]
    DifferentDuckFibres,
}

/// Finite base Σ with an indexed cover {O_i}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CechBase {
    names: Vec<String>,
    cover: Vec<BTreeSet<usize>>,
    charts_at: Vec<Vec<usize>>,
}

impl CechBase {
    pub fn new(names: Vec<String>, cover: Vec<Vec<usize>>) -> Result<Self, BundleError> {
        let n = names.len();
        let mut charts_at = vec![Vec::new(); n];
        let mut sets = Vec::with_capacity(cover.len());
        for (i, set) in cover.into_iter().enumerate() {
            if set.is_empty() {
                return Err(BundleError::Base(format!("chart {i} is empty")));
            }
            let set: BTreeSet<usize> = set.into_iter().collect();
            for &s in &set {
                if s >= n {
                    return Err(BundleError::Base(format!("chart {i} names base point {s}")));
                }
                charts_at[s].push(i);
            }
            sets.push(set);
        }
        if let Some(s) = charts_at.iter().position(Vec::is_empty) {
            return Err(BundleError::Base(format!("base point {} is not covered", names[s])));
        }
        Ok(Self {
            names,
            cover: sets,
            charts_at,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn n_charts(&self) -> usize {
        self.cover.len()
    }

    pub fn name(&self, sigma: usize) -> &str {
        &self.names[sigma]
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, chart: usize, sigma: usize) -> bool {
        self.cover.get(chart).is_some_and(|c| c.contains(&sigma))
    }

    /// Charts containing σ, ascending.
    pub fn charts_at(&self, sigma: usize) -> &[usize] {
        &self.charts_at[sigma]
    }

    pub fn canonical_chart(&self, sigma: usize) -> usize {
        self.charts_at[sigma][0]
    }

    pub fn chart(&self, i: usize) -> &BTreeSet<usize> {
        &self.cover[i]
    }
}

/// β_ij(σ) for σ ∈ O_i ∩ O_j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle {
    values: HashMap<(usize, usize, usize), Bisection>,
}

impl Cocycle {
    /// Takes the given values and fills gaps: β_ii(σ) = Id, and β_ji(σ) = β_ij(σ)⁻¹
    /// when only one orientation is given. Any other missing overlap is an error.
    pub fn complete(
        base: &CechBase,
        g: &FiniteGroupoid,
        given: impl IntoIterator<Item = ((usize, usize, usize), Bisection)>,
    ) -> Result<Self, BundleError> {
        let mut values = HashMap::new();
        for ((i, j, sigma), b) in given {
            if !base.contains(i, sigma) || !base.contains(j, sigma) {
                return Err(BundleError::CocycleEntry {
                    i,
                    j,
                    sigma,
                    reason: "base point outside the overlap".into(),
                });
            }
            if !validate_bisection(g, &b) {
                return Err(BundleError::CocycleEntry {
                    i,
                    j,
                    sigma,
                    reason: "value is not a bisection".into(),
                });
            }
            if values.insert((i, j, sigma), b).is_some() {
                return Err(BundleError::CocycleEntry {
                    i,
                    j,
                    sigma,
                    reason: "given twice".into(),
                });
            }
        }
        for sigma in 0..base.len() {
            for &i in base.charts_at(sigma) {
                for &j in base.charts_at(sigma) {
                    if values.contains_key(&(i, j, sigma)) {
                        continue;
                    }
                    let fill = if i == j {
                        Bisection::identity(g)
                    } else if let Some(b) = values.get(&(j, i, sigma)) {
                        bisection_inverse(g, b)
                    } else {
                        return Err(BundleError::CocycleEntry {
                            i,
                            j,
                            sigma,
                            reason: "missing".into(),
                        });
                    };
                    values.insert((i, j, sigma), fill);
                }
            }
        }
        Ok(Self { values })
    }

    /// The trivial cocycle β_ij ≡ Id.
    pub fn trivial(base: &CechBase, g: &FiniteGroupoid) -> Self {
        let mut given = Vec::new();
        for sigma in 0..base.len() {
            for &i in base.charts_at(sigma) {
                for &j in base.charts_at(sigma).iter().filter(|&&j| j > i) {
                    given.push(((i, j, sigma), Bisection::identity(g)));
                }
            }
        }
        Self::complete(base, g, given).expect("identity fills every overlap")
    }

    pub fn get(&self, i: usize, j: usize, sigma: usize) -> &Bisection {
        self.values
            .get(&(i, j, sigma))
            .unwrap_or_else(|| panic!("no cocycle value at ({i}, {j}, {sigma})"))
    }

    /// Entries sorted by (i, j, σ).
    pub fn entries(&self) -> Vec<((usize, usize, usize), &Bisection)> {
        let mut v: Vec<_> = self.values.iter().map(|(&k, b)| (k, b)).collect();
        v.sort_by_key(|e| e.0);
        v
    }

    /// Copy with one value replaced, bypassing every check.
    pub fn with_value(mut self, i: usize, j: usize, sigma: usize, b: Bisection) -> Self {
        self.values.insert((i, j, sigma), b);
        self
    }
}

/// Checks β_ii = Id, β_ij·β_ji = Id and β_ij·β_jk = β_ik at every overlap point.
pub fn validate_cocycle(base: &CechBase, c: &Cocycle, g: &FiniteGroupoid) -> Result<ValidationReport, BundleError> {
    for (&(i, j, sigma), b) in &c.values {
        if !validate_bisection(g, b) {
            return Err(BundleError::CocycleEntry {
                i,
                j,
                sigma,
                reason: "value is not a bisection".into(),
            });
        }
    }
    let mut r = ValidationReport::new();
    for name in ["cocycle.unit", "cocycle.inverse", "cocycle.triple"] {
        r.declare(name);
    }
    let id = Bisection::identity(g);
    for sigma in 0..base.len() {
        let charts = base.charts_at(sigma);
        let sn = base.name(sigma);
        for &i in charts {
            r.record("cocycle.unit", c.get(i, i, sigma) == &id, || format!("({i},{i},{sn})"));
            for &j in charts {
                let ok = bisection_product(g, c.get(i, j, sigma), c.get(j, i, sigma)) == id;
                r.record("cocycle.inverse", ok, || format!("({i},{j},{sn})"));
                for &k in charts {
                    let ok = bisection_product(g, c.get(i, j, sigma), c.get(j, k, sigma)) == *c.get(i, k, sigma);
                    r.record("cocycle.triple", ok, || format!("({i},{j},{k},{sn})"));
                }
            }
        }
    }
    Ok(r)
}

/// A point of 𝒫 in its canonical chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BundlePoint {
    pub sigma: usize,
    pub chart: usize,
    pub arrow: Arrow,
}

/// A point of the shadow bundle ℱ in its canonical chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShadowPoint {
    pub sigma: usize,
    pub chart: usize,
    pub object: Obj,
}

#[derive(Debug, Clone)]
pub struct PrincipaloidBundle {
    base: CechBase,
    cocycle: Cocycle,
    groupoid: FiniteGroupoid,
}

pub fn build_bundle(base: CechBase, cocycle: Cocycle, groupoid: FiniteGroupoid) -> Result<PrincipaloidBundle, BundleError> {
    let report = validate_cocycle(&base, &cocycle, &groupoid)?;
    if !report.is_ok() {
        return Err(BundleError::InvalidCocycle(report));
    }
    Ok(PrincipaloidBundle {
        base,
        cocycle,
        groupoid,
    })
}

/// Builds without validating the cocycle. Only for exercising the checkers.
pub fn build_bundle_unchecked(base: CechBase, cocycle: Cocycle, groupoid: FiniteGroupoid) -> PrincipaloidBundle {
    PrincipaloidBundle {
        base,
        cocycle,
        groupoid,
    }
}

impl PrincipaloidBundle {
    pub fn base(&self) -> &CechBase {
        &self.base
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn transition(&self, i: usize, j: usize, sigma: usize) -> &Bisection {
        self.cocycle.get(i, j, sigma)
    }

    fn check_chart(&self, sigma: usize, chart: usize) -> Result<(), BundleError> {
        if self.base.contains(chart, sigma) {
            Ok(())
        } else {
            Err(BundleError::OutsideChart { sigma, chart })
        }
    }

    /// The class of (σ, g, chart), brought to the canonical chart.
    pub fn point(&self, sigma: usize, chart: usize, arrow: Arrow) -> Result<BundlePoint, BundleError> {
        self.check_chart(sigma, chart)?;
        let i = self.base.canonical_chart(sigma);
        let arrow = left_mult(&self.groupoid, self.transition(i, chart, sigma), arrow);
        Ok(BundlePoint {
            sigma,
            chart: i,
            arrow,
        })
    }

    pub fn shadow_point(&self, sigma: usize, chart: usize, object: Obj) -> Result<ShadowPoint, BundleError> {
        self.check_chart(sigma, chart)?;
        let i = self.base.canonical_chart(sigma);
        let object = shadow(&self.groupoid, self.transition(i, chart, sigma))[object];
        Ok(ShadowPoint {
            sigma,
            chart: i,
            object,
        })
    }

    /// The fibre coordinate of `p` in chart `j`.
    pub fn in_chart(&self, p: BundlePoint, j: usize) -> Result<Arrow, BundleError> {
        self.check_chart(p.sigma, j)?;
        Ok(left_mult(&self.groupoid, self.transition(j, p.chart, p.sigma), p.arrow))
    }

    pub fn shadow_in_chart(&self, f: ShadowPoint, j: usize) -> Result<Obj, BundleError> {
        self.check_chart(f.sigma, j)?;
        Ok(shadow(&self.groupoid, self.transition(j, f.chart, f.sigma))[f.object])
    }

    pub fn points(&self) -> Vec<BundlePoint> {
        (0..self.base.len())
            .flat_map(|sigma| {
                let chart = self.base.canonical_chart(sigma);
                self.groupoid.arrows().map(move |arrow| BundlePoint { sigma, chart, arrow })
            })
            .collect()
    }

    pub fn shadow_points(&self) -> Vec<ShadowPoint> {
        (0..self.base.len())
            .flat_map(|sigma| {
                let chart = self.base.canonical_chart(sigma);
                self.groupoid.objects().map(move |object| ShadowPoint { sigma, chart, object })
            })
            .collect()
    }

    /// μ, locally the source map.
    pub fn moment(&self, p: BundlePoint) -> Obj {
        self.groupoid.s(p.arrow)
    }

    /// 𝒟, locally the target map.
    pub fn sitting_duck(&self, p: BundlePoint) -> ShadowPoint {
        ShadowPoint {
            sigma: p.sigma,
            chart: p.chart,
            object: self.groupoid.t(p.arrow),
        }
    }

    /// p◁h, locally (σ, g.h). Requires t(h) = μ(p).
    pub fn right_action(&self, p: BundlePoint, h: Arrow) -> Result<BundlePoint, ActionError> {
        self.right_action_via(p, h, p.chart)
    }

    /// The right action evaluated in chart `j` and read back in the canonical chart.
    pub fn right_action_via(&self, p: BundlePoint, h: Arrow, j: usize) -> Result<BundlePoint, ActionError> {
        let g = &self.groupoid;
        let moment = self.moment(p);
        if g.t(h) != moment {
            return Err(ActionError::MomentMismatch {
                moment,
                target: g.t(h),
            });
        }
        let local = self.in_chart(p, j).expect("chart contains the base point");
        let moved = g.try_mul(local, h).ok_or(ActionError::MomentMismatch {
            moment: g.s(local),
            target: g.t(h),
        })?;
        Ok(self.point(p.sigma, j, moved).expect("chart contains the base point"))
    }

    /// φ(p1, p2) = g1⁻¹.g2, the arrow taking p1 to p2.
    pub fn division(&self, p1: BundlePoint, p2: BundlePoint) -> Result<Arrow, ActionError> {
        self.division_via(p1, p2, p1.chart)
    }

    pub fn division_via(&self, p1: BundlePoint, p2: BundlePoint, j: usize) -> Result<Arrow, ActionError> {
        if self.sitting_duck(p1) != self.sitting_duck(p2) {
            return Err(ActionError::DifferentDuckFibres);
        }
        let g = &self.groupoid;
        let a = self.in_chart(p1, j).expect("chart contains the base point");
        let b = self.in_chart(p2, j).expect("chart contains the base point");
        g.try_mul(g.inv(a), b).ok_or(ActionError::DifferentDuckFibres)
    }

    /// (σ, g, i)◁β = (σ, R_β(g), i).
    pub fn b_action(&self, p: BundlePoint, b: &Bisection) -> BundlePoint {
        self.b_action_via(p, b, p.chart)
    }

    pub fn b_action_via(&self, p: BundlePoint, b: &Bisection, j: usize) -> BundlePoint {
        let local = self.in_chart(p, j).expect("chart contains the base point");
        self.point(p.sigma, j, right_mult(&self.groupoid, local, b))
            .expect("chart contains the base point")
    }

    /// x◀β⁻¹(μ(x))⁻¹, the 𝔹-action induced by the 𝒢-action.
    pub fn induced_b_action(&self, p: BundlePoint, b: &Bisection) -> BundlePoint {
        let g = &self.groupoid;
        let h = g.inv(bisection_inverse(g, b).at(self.moment(p)));
        self.right_action(p, h).expect("t(β⁻¹(μ)⁻¹) = μ")
    }

    pub fn show_point(&self, p: BundlePoint) -> String {
        format!(
            "({},{},{})",
            self.base.name(p.sigma),
            p.chart,
            self.groupoid.arrow_name(p.arrow)
        )
    }

    pub fn show_shadow(&self, f: ShadowPoint) -> String {
        format!(
            "({},{},{})",
            self.base.name(f.sigma),
            f.chart,
            self.groupoid.object_name(f.object)
        )
    }

    pub fn to_doc(&self) -> BundleDoc {
        BundleDoc {
            base: self.base.names.iter().cloned().map(BaseRef::Name).collect(),
            cover: self
                .base
                .cover
                .iter()
                .map(|c| c.iter().map(|&s| BaseRef::Name(self.base.names[s].clone())).collect())
                .collect(),
            cocycle: self
                .cocycle
                .entries()
                .into_iter()
                .filter(|((i, j, _), _)| i < j)
                .map(|((i, j, sigma), b)| CocycleDoc {
                    i,
                    j,
                    sigma: BaseRef::Name(self.base.names[sigma].clone()),
                    bisection: b.clone(),
                })
                .collect(),
            groupoid: self.groupoid.to_doc(),
        }
    }
}

impl fmt::Display for BundlePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.sigma, self.chart, self.arrow)
    }
}

/// A base point given by index or by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleDoc {
    pub i: usize,
    pub j: usize,
    pub sigma: BaseRef,
    pub bisection: Bisection,
}

/// JSON form of a bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleDoc {
    pub base: Vec<BaseRef>,
    pub cover: Vec<Vec<BaseRef>>,
    pub cocycle: Vec<CocycleDoc>,
    pub groupoid: GroupoidDoc,
}

impl BundleDoc {
    /// Resolves names and fills the cocycle without validating it.
    pub fn parts(&self) -> Result<(CechBase, Cocycle, FiniteGroupoid), BundleError> {
        let names: Vec<String> = self
            .base
            .iter()
            .map(|b| match b {
                BaseRef::Name(n) => n.clone(),
                BaseRef::Index(i) => i.to_string(),
            })
            .collect();
        let resolve = |r: &BaseRef| -> Result<usize, BundleError> {
            match r {
                BaseRef::Name(n) => names
                    .iter()
                    .position(|x| x == n)
                    .ok_or_else(|| BundleError::Base(format!("unknown base point {n}"))),
                BaseRef::Index(i) if *i < names.len() => Ok(*i),
                BaseRef::Index(i) => Err(BundleError::Base(format!("base index {i} out of range"))),
            }
        };
        let cover = self
            .cover
            .iter()
            .map(|c| c.iter().map(resolve).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let base = CechBase::new(names.clone(), cover)?;
        let g = FiniteGroupoid::from_doc(&self.groupoid)?;
        let given = self
            .cocycle
            .iter()
            .map(|e| Ok(((e.i, e.j, resolve(&e.sigma)?), e.bisection.clone())))
            .collect::<Result<Vec<_>, BundleError>>()?;
        let cocycle = Cocycle::complete(&base, &g, given)?;
        Ok((base, cocycle, g))
    }

    pub fn build(&self) -> Result<PrincipaloidBundle, BundleError> {
        let (base, cocycle, g) = self.parts()?;
        build_bundle(base, cocycle, g)
    }
}

/// GrM1–3 (right 𝒢-module), PGr2 (𝒟 is 𝒢-invariant) and PGr3 ((pr₁, ϱ) is a
/// bijection onto 𝒫 ×_ℱ 𝒫 with inverse (pr₁, φ)), evaluated in every chart
/// containing the base point.
pub fn verify_principal_axioms(bundle: &PrincipaloidBundle) -> ValidationReport {
    let g = bundle.groupoid();
    let mut r = ValidationReport::new();
    for name in ["GrM1", "GrM2", "GrM3", "PGr2", "PGr3.inverse", "PGr3.section", "PGr3.bijective"] {
        r.declare(name);
    }
    let points = bundle.points();
    let sp = |p: BundlePoint| bundle.show_point(p);
    let an = |a: Arrow| g.arrow_name(a).to_string();
    let mut domain = 0usize;
    let mut images = BTreeSet::new();
    for &p in &points {
        for &j in bundle.base().charts_at(p.sigma) {
            let act = |x: BundlePoint, h: Arrow| bundle.right_action_via(x, h, j).ok();
            let mu = bundle.moment(p);
            r.record("GrM2", act(p, g.unit(mu)) == Some(p), || format!("{} chart {j}", sp(p)));
            for &h in g.target_fibre(mu) {
                let w = || format!("p={}, h={}, chart {j}", sp(p), an(h));
                let ph = act(p, h);
                r.record("GrM1", ph.map(|q| bundle.moment(q)) == Some(g.s(h)), w);
                r.record(
                    "PGr2",
                    ph.map(|q| bundle.sitting_duck(q)) == Some(bundle.sitting_duck(p)),
                    w,
                );
                if let Some(q) = ph {
                    r.record("PGr3.inverse", bundle.division_via(p, q, j).ok() == Some(h), w);
                    if j == p.chart {
                        domain += 1;
                        images.insert((p, q));
                    }
                }
                for &k in g.target_fibre(g.s(h)) {
                    let lhs = ph.and_then(|q| act(q, k));
                    let rhs = act(p, g.mul(h, k));
                    r.record("GrM3", lhs.is_some() && lhs == rhs, || {
                        format!("p={}, g={}, h={}, chart {j}", sp(p), an(h), an(k))
                    });
                }
            }
        }
    }
    let mut codomain = 0usize;
    for &p1 in &points {
        for &p2 in &points {
            if bundle.sitting_duck(p1) != bundle.sitting_duck(p2) {
                continue;
            }
            codomain += 1;
            for &j in bundle.base().charts_at(p1.sigma) {
                let back = bundle
                    .division_via(p1, p2, j)
                    .ok()
                    .and_then(|h| bundle.right_action_via(p1, h, j).ok());
                r.record("PGr3.section", back == Some(p2), || {
                    format!("p1={}, p2={}, chart {j}", sp(p1), sp(p2))
                });
            }
        }
    }
    r.record("PGr3.bijective", domain == codomain && images.len() == domain, || {
        format!("|P x_mu G| = {domain}, |P x_F P| = {codomain}, |image| = {}", images.len())
    });
    r
}

/// 𝒟 is constant on orbits, its fibres are exactly the orbits, and the fibres
/// over one base point partition the |arrows| points there.
pub fn verify_duck_quotient(bundle: &PrincipaloidBundle) -> ValidationReport {
    let g = bundle.groupoid();
    let mut r = ValidationReport::new();
    for name in ["duck.invariant", "duck.fibre-is-orbit", "duck.partition"] {
        r.declare(name);
    }
    let points = bundle.points();
    let mut fibres: BTreeMap<ShadowPoint, BTreeSet<BundlePoint>> = BTreeMap::new();
    for &p in &points {
        fibres.entry(bundle.sitting_duck(p)).or_default().insert(p);
    }
    for &p in &points {
        let orbit: BTreeSet<BundlePoint> = g
            .target_fibre(bundle.moment(p))
            .iter()
            .map(|&h| bundle.right_action(p, h).expect("composable"))
            .collect();
        for q in &orbit {
            r.record("duck.invariant", bundle.sitting_duck(*q) == bundle.sitting_duck(p), || {
                bundle.show_point(*q)
            });
        }
        let fibre = &fibres[&bundle.sitting_duck(p)];
        r.record("duck.fibre-is-orbit", &orbit == fibre, || bundle.show_point(p));
    }
    for sigma in 0..bundle.base().len() {
        let total: usize = fibres
            .iter()
            .filter(|(f, _)| f.sigma == sigma)
            .map(|(_, s)| s.len())
            .sum();
        r.record("duck.partition", total == g.n_arrows(), || bundle.base().name(sigma).to_string());
    }
    r
}

/// The 𝔹-action on 𝒫 from right multiplication against the one induced by the
/// 𝒢-action, plus the bisection-through formula for the 𝒢-action.
pub fn verify_b_actions(bundle: &PrincipaloidBundle, cap: u128) -> Result<ValidationReport, CapExceeded> {
    let g = bundle.groupoid();
    let group = enumerate_bisections(g, cap)?;
    let mut r = ValidationReport::new();
    for name in [
        "b_action.unit",
        "b_action.right-action",
        "b_action.fibre",
        "b_action.chart-independent",
        "b_action.matches-induced",
        "induced.right-action",
        "through-bisection",
    ] {
        r.declare(name);
    }
    let id = Bisection::identity(g);
    let points = bundle.points();
    for &p in &points {
        let sp = bundle.show_point(p);
        r.record("b_action.unit", bundle.b_action(p, &id) == p, || sp.clone());
        for b1 in group.elements() {
            let q = bundle.b_action(p, b1);
            let w = || format!("p={sp}, beta={}", b1.describe(g));
            r.record("b_action.fibre", q.sigma == p.sigma, w);
            r.record("b_action.matches-induced", q == bundle.induced_b_action(p, b1), w);
            for &j in bundle.base().charts_at(p.sigma) {
                r.record("b_action.chart-independent", bundle.b_action_via(p, b1, j) == q, w);
            }
            for b2 in group.elements() {
                let w2 = || format!("p={sp}, b1={}, b2={}", b1.describe(g), b2.describe(g));
                let b12 = bisection_product(g, b1, b2);
                r.record("b_action.right-action", bundle.b_action(q, b2) == bundle.b_action(p, &b12), w2);
                r.record(
                    "induced.right-action",
                    bundle.induced_b_action(bundle.induced_b_action(p, b1), b2) == bundle.induced_b_action(p, &b12),
                    w2,
                );
            }
        }
        // ϱ(p, h) = p◁β⁻¹ for every bisection β through h⁻¹
        for &h in g.target_fibre(bundle.moment(p)) {
            let want = bundle.right_action(p, h).expect("composable");
            for b in group.elements().iter().filter(|b| b.at(g.s(g.inv(h))) == g.inv(h)) {
                let got = bundle.b_action(p, &bisection_inverse(g, b));
                r.record("through-bisection", got == want, || {
                    format!("p={sp}, h={}, beta={}", g.arrow_name(h), b.describe(g))
                });
            }
            debug_assert!(bisection_through(g, g.inv(h), None).is_some());
        }
    }
    Ok(r)
}

/// Σ = {a, b, c}, O₀ = {a, b}, O₁ = {b, c}, β₀₁(b) = β_r over ℤ₂⋉{0,1}.
pub fn three_point_z2() -> PrincipaloidBundle {
    let g = crate::groupoid::z2_swap();
    let base = CechBase::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![vec![0, 1], vec![1, 2]],
    )
    .expect("valid cover");
    let beta_r = Bisection::new(vec![g.find_arrow("(r,0)").unwrap(), g.find_arrow("(r,1)").unwrap()]);
    let cocycle = Cocycle::complete(&base, &g, [((0, 1, 1), beta_r)]).expect("complete");
    build_bundle(base, cocycle, g).expect("valid cocycle")
}

/// Single chart over the given base: the trivial bundle Σ × 𝒢.
pub fn trivial_bundle(names: Vec<String>, g: FiniteGroupoid) -> PrincipaloidBundle {
    let n = names.len();
    let base = CechBase::new(names, vec![(0..n).collect()]).expect("single chart covers");
    let cocycle = Cocycle::trivial(&base, &g);
    build_bundle(base, cocycle, g).expect("trivial cocycle")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{cyclic, pair, z2_swap};

    fn arrow(b: &PrincipaloidBundle, name: &str) -> Arrow {
        b.groupoid().find_arrow(name).unwrap()
    }

    fn pt(b: &PrincipaloidBundle, s: &str, chart: usize, a: &str) -> BundlePoint {
        b.point(b.base().find(s).unwrap(), chart, arrow(b, a)).unwrap()
    }

    #[test]
    fn cocycle_examples() {
        let b = three_point_z2();
        let r = validate_cocycle(b.base(), b.cocycle(), b.groupoid()).unwrap();
        assert!(r.is_ok());

        let g = z2_swap();
        let broken = b.cocycle().clone().with_value(1, 0, 1, Bisection::identity(&g));
        let r = validate_cocycle(b.base(), &broken, &g).unwrap();
        let inv = r.check("cocycle.inverse").unwrap();
        assert!(inv.failures > 0);
        assert!(inv.witnesses.iter().any(|w| w.contains(",b)")));

        let single = CechBase::new(vec!["x".into()], vec![vec![0]]).unwrap();
        let r = validate_cocycle(&single, &Cocycle::trivial(&single, &g), &g).unwrap();
        assert!(r.is_ok());
    }

    #[test]
    fn counts() {
        let b = three_point_z2();
        assert_eq!(b.points().len(), 12);
        assert_eq!(b.shadow_points().len(), 6);
    }

    #[test]
    fn moment_examples() {
        let b = three_point_z2();
        assert_eq!(b.moment(pt(&b, "a", 0, "(r,0)")), 0);
        let p = pt(&b, "b", 0, "(e,1)");
        let in1 = b.in_chart(p, 1).unwrap();
        assert_eq!(b.groupoid().arrow_name(in1), "(r,1)");
        assert_eq!(b.moment(p), 1);
        assert_eq!(b.moment(b.point(1, 1, in1).unwrap()), 1);
        assert_eq!(b.point(1, 1, in1).unwrap(), p);
    }

    #[test]
    fn action_examples() {
        let b = three_point_z2();
        let p = pt(&b, "b", 0, "(e,0)");
        let q = b.right_action(p, arrow(&b, "(r,1)")).unwrap();
        assert_eq!(b.show_point(q), "(b,0,(r,1))");
        assert_eq!(b.right_action(p, b.groupoid().unit(0)).unwrap(), p);
        assert!(matches!(
            b.right_action(p, arrow(&b, "(r,0)")),
            Err(ActionError::MomentMismatch { .. })
        ));
    }

    #[test]
    fn duck_examples() {
        let b = three_point_z2();
        let f = b.sitting_duck(pt(&b, "b", 0, "(r,0)"));
        assert_eq!(b.show_shadow(f), "(b,0,1)");
        let over: Vec<String> = b
            .points()
            .into_iter()
            .filter(|&p| b.sitting_duck(p) == b.shadow_point(1, 0, 0).unwrap())
            .map(|p| b.show_point(p))
            .collect();
        assert_eq!(over, vec!["(b,0,(e,0))", "(b,0,(r,1))"]);
    }

    #[test]
    fn division_examples() {
        let b = three_point_z2();
        let p1 = pt(&b, "b", 0, "(e,0)");
        let p2 = pt(&b, "b", 0, "(r,1)");
        assert_eq!(b.groupoid().arrow_name(b.division(p1, p2).unwrap()), "(r,1)");
        assert_eq!(b.division(p1, p1).unwrap(), b.groupoid().unit(0));
        let p3 = pt(&b, "b", 0, "(r,0)");
        assert_eq!(b.division(p1, p3), Err(ActionError::DifferentDuckFibres));
    }

    #[test]
    fn b_action_examples() {
        let b = three_point_z2();
        let g = b.groupoid();
        let beta_r = Bisection::new(vec![arrow(&b, "(r,0)"), arrow(&b, "(r,1)")]);
        let p = pt(&b, "b", 0, "(e,0)");
        assert_eq!(b.show_point(b.b_action(p, &beta_r)), "(b,0,(r,1))");
        assert_eq!(b.b_action(p, &Bisection::identity(g)), p);
        assert_eq!(b.b_action_via(p, &beta_r, 1), b.b_action(p, &beta_r));
        assert_eq!(b.show_point(b.induced_b_action(p, &beta_r)), "(b,0,(r,1))");
    }

    #[test]
    fn batteries_pass_on_three_point_example() {
        let b = three_point_z2();
        for r in [
            verify_principal_axioms(&b),
            verify_duck_quotient(&b),
            verify_b_actions(&b, 1000).unwrap(),
        ] {
            assert!(r.is_ok(), "{:?}", r.failed().collect::<Vec<_>>());
        }
    }

    #[test]
    fn corrupted_cocycle_breaks_pgr3() {
        let good = three_point_z2();
        let g = good.groupoid().clone();
        let broken = good.cocycle().clone().with_value(1, 0, 1, Bisection::identity(&g));
        let b = build_bundle_unchecked(good.base().clone(), broken.clone(), g.clone());
        let r = verify_principal_axioms(&b);
        let c = r.check("PGr3.section").unwrap();
        assert!(c.failures > 0);
        assert!(!c.witnesses.is_empty());
        assert!(matches!(
            build_bundle(good.base().clone(), broken, g),
            Err(BundleError::InvalidCocycle(_))
        ));
    }

    #[test]
    fn group_case_is_classical() {
        let b = trivial_bundle(vec!["x".into(), "y".into()], cyclic(3));
        assert_eq!(b.points().len(), 6);
        assert_eq!(b.shadow_points().len(), 2);
        // free and transitive on fibres
        for p in b.points() {
            for q in b.points().into_iter().filter(|q| q.sigma == p.sigma) {
                let h = b.division(p, q).unwrap();
                assert_eq!(b.right_action(p, h).unwrap(), q);
            }
        }
        assert!(verify_principal_axioms(&b).is_ok());
    }

    #[test]
    fn pair_fibre_splits_as_shadow_times_moment() {
        let g = pair(3);
        let base = CechBase::new(vec!["a".into(), "b".into()], vec![vec![0, 1], vec![1]]).unwrap();
        let cyc = Bisection::new(vec![
            crate::groupoid::pair_arrow(3, 1, 0),
            crate::groupoid::pair_arrow(3, 2, 1),
            crate::groupoid::pair_arrow(3, 0, 2),
        ]);
        let cocycle = Cocycle::complete(&base, &g, [((0, 1, 1), cyc)]).unwrap();
        let b = build_bundle(base, cocycle, g).unwrap();
        let pairs: BTreeSet<(ShadowPoint, Obj)> =
            b.points().into_iter().map(|p| (b.sitting_duck(p), b.moment(p))).collect();
        assert_eq!(pairs.len(), b.points().len());
        assert_eq!(pairs.len(), b.shadow_points().len() * 3);
        assert!(verify_principal_axioms(&b).is_ok());
    }

    #[test]
    fn doc_round_trip() {
        let b = three_point_z2();
        let text = serde_json::to_string(&b.to_doc()).unwrap();
        let doc: BundleDoc = serde_json::from_str(&text).unwrap();
        let back = doc.build().unwrap();
        assert_eq!(back.points(), b.points());
        assert_eq!(back.cocycle(), b.cocycle());
    }
}
