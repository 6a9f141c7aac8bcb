//! The Atiyah groupoid At(𝒫) ⇉ ℱ, the adjoint bundle Ad(𝒫), the projection
//! onto Pair(Σ) and the two commuting actions on 𝒫.
//!
//! Elements are classes of (σ₁, g, σ₂, i, j) with σ₁ ∈ O_i, σ₂ ∈ O_j, where
//! (σ₁, g, σ₂, k, l) ~ (σ₁, β_ik(σ₁)▹g◁β_lj(σ₂), σ₂, i, j).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bisection::{enumerate_bisections, left_mult, right_mult, Bisection, CapExceeded};
use crate::bundle::{BundlePoint, PrincipaloidBundle, ShadowPoint};
use crate::groupoid::{pair_arrow, validate_groupoid, Arrow, FiniteGroupoid, Obj};
use crate::report::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AtiyahError {
    #[error("source of the left factor differs from the target of the right factor")]
    NotComposable,
    #[error("source of the element differs from the shadow of the point")]
    MomentMismatch,
    #[error("bisection is not projectable onto a base bijection")]
    NotProjectable,
}

/// Canonical class [(σ₁, g, σ₂, i, j)]. Serialized as the quintuple in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, Arrow, usize, usize, usize)", into = "(usize, Arrow, usize, usize, usize)")]
pub struct AtiyahElement {
    pub sigma1: usize,
    pub arrow: Arrow,
    pub sigma2: usize,
    pub chart_i: usize,
    pub chart_j: usize,
}

impl From<(usize, Arrow, usize, usize, usize)> for AtiyahElement {
    fn from((sigma1, arrow, sigma2, chart_i, chart_j): (usize, Arrow, usize, usize, usize)) -> Self {
        Self {
            sigma1,
            arrow,
            sigma2,
            chart_i,
            chart_j,
        }
    }
}

impl From<AtiyahElement> for (usize, Arrow, usize, usize, usize) {
    fn from(e: AtiyahElement) -> Self {
        (e.sigma1, e.arrow, e.sigma2, e.chart_i, e.chart_j)
    }
}

/// Canonical class [(σ, g, i)] of Ad(𝒫), glued by conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AdjointElement {
    pub sigma: usize,
    pub chart: usize,
    pub arrow: Arrow,
}

/// At(𝒫) together with its realisation as a finite groupoid over the
/// canonical points of ℱ.
#[derive(Debug, Clone)]
pub struct AtiyahGroupoid {
    bundle: PrincipaloidBundle,
    groupoid: FiniteGroupoid,
}

pub fn build_atiyah(bundle: &PrincipaloidBundle) -> AtiyahGroupoid {
    let g = bundle.groupoid();
    let n_base = bundle.base().len();
    let n_obj = g.n_objects();
    let mut at = AtiyahGroupoid {
        bundle: bundle.clone(),
        groupoid: FiniteGroupoid::from_tables(0, vec![], vec![], vec![], vec![], []).expect("empty"),
    };
    let elements = at.elements();
    let obj_id = |f: ShadowPoint| f.sigma * n_obj + f.object;
    let src = elements.iter().map(|&e| obj_id(at.source(e))).collect();
    let tgt = elements.iter().map(|&e| obj_id(at.target(e))).collect();
    let inv = elements.iter().map(|&e| at.index(at.invert(e))).collect();
    let shadows = bundle.shadow_points();
    let unit = shadows.iter().map(|&f| at.index(at.unit(f))).collect();
    let mut mul = Vec::new();
    for &a in &elements {
        for &b in elements.iter().filter(|&&b| a.sigma2 == b.sigma1) {
            if let Ok(c) = at.multiply(a, b) {
                mul.push((at.index(a), at.index(b), at.index(c)));
            }
        }
    }
    let names = elements.iter().map(|&e| at.show(e)).collect();
    let obj_names = shadows.iter().map(|&f| bundle.show_shadow(f)).collect();
    at.groupoid = FiniteGroupoid::from_tables(n_base * n_obj, src, tgt, unit, inv, mul)
        .expect("canonical tables are well formed")
        .with_names(obj_names, names);
    at
}

impl AtiyahGroupoid {
    pub fn bundle(&self) -> &PrincipaloidBundle {
        &self.bundle
    }

    /// At(𝒫) as a finite groupoid; arrow ids follow [`Self::index`], object ids
    /// are σ·|M| + m.
    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn len(&self) -> usize {
        let n = self.bundle.base().len();
        n * n * self.bundle.groupoid().n_arrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, e: AtiyahElement) -> Arrow {
        (e.sigma1 * self.bundle.base().len() + e.sigma2) * self.bundle.groupoid().n_arrows() + e.arrow
    }

    pub fn element(&self, idx: Arrow) -> AtiyahElement {
        let k = self.bundle.groupoid().n_arrows();
        let n = self.bundle.base().len();
        let (pair, arrow) = (idx / k, idx % k);
        let (sigma1, sigma2) = (pair / n, pair % n);
        let base = self.bundle.base();
        AtiyahElement {
            sigma1,
            arrow,
            sigma2,
            chart_i: base.canonical_chart(sigma1),
            chart_j: base.canonical_chart(sigma2),
        }
    }

    pub fn elements(&self) -> Vec<AtiyahElement> {
        (0..self.len()).map(|i| self.element(i)).collect()
    }

    pub fn shadow_index(&self, f: ShadowPoint) -> Obj {
        f.sigma * self.bundle.groupoid().n_objects() + f.object
    }

    pub fn shadow_at(&self, idx: Obj) -> ShadowPoint {
        let n = self.bundle.groupoid().n_objects();
        let sigma = idx / n;
        ShadowPoint {
            sigma,
            chart: self.bundle.base().canonical_chart(sigma),
            object: idx % n,
        }
    }

    /// Moves the arrow of (σ₁, g, σ₂, k, l) into charts (i, j).
    pub fn rechart(&self, sigma1: usize, g: Arrow, sigma2: usize, from: (usize, usize), to: (usize, usize)) -> Arrow {
        let b = &self.bundle;
        let gr = b.groupoid();
        let (k, l) = from;
        let (i, j) = to;
        left_mult(gr, b.transition(i, k, sigma1), right_mult(gr, g, b.transition(l, j, sigma2)))
    }

    /// The class of (σ₁, g, σ₂, k, l).
    pub fn class(&self, sigma1: usize, g: Arrow, sigma2: usize, k: usize, l: usize) -> AtiyahElement {
        let base = self.bundle.base();
        let (i, j) = (base.canonical_chart(sigma1), base.canonical_chart(sigma2));
        AtiyahElement {
            sigma1,
            arrow: self.rechart(sigma1, g, sigma2, (k, l), (i, j)),
            sigma2,
            chart_i: i,
            chart_j: j,
        }
    }

    /// The arrow representing `e` in charts (k, l).
    pub fn represent(&self, e: AtiyahElement, k: usize, l: usize) -> Arrow {
        self.rechart(e.sigma1, e.arrow, e.sigma2, (e.chart_i, e.chart_j), (k, l))
    }

    pub fn source(&self, e: AtiyahElement) -> ShadowPoint {
        ShadowPoint {
            sigma: e.sigma2,
            chart: e.chart_j,
            object: self.bundle.groupoid().s(e.arrow),
        }
    }

    pub fn target(&self, e: AtiyahElement) -> ShadowPoint {
        ShadowPoint {
            sigma: e.sigma1,
            chart: e.chart_i,
            object: self.bundle.groupoid().t(e.arrow),
        }
    }

    pub fn unit(&self, f: ShadowPoint) -> AtiyahElement {
        let f = self.bundle.shadow_point(f.sigma, f.chart, f.object).expect("chart contains σ");
        AtiyahElement {
            sigma1: f.sigma,
            arrow: self.bundle.groupoid().unit(f.object),
            sigma2: f.sigma,
            chart_i: f.chart,
            chart_j: f.chart,
        }
    }

    pub fn invert(&self, e: AtiyahElement) -> AtiyahElement {
        AtiyahElement {
            sigma1: e.sigma2,
            arrow: self.bundle.groupoid().inv(e.arrow),
            sigma2: e.sigma1,
            chart_i: e.chart_j,
            chart_j: e.chart_i,
        }
    }

    pub fn multiply(&self, e1: AtiyahElement, e2: AtiyahElement) -> Result<AtiyahElement, AtiyahError> {
        if self.source(e1) != self.target(e2) {
            return Err(AtiyahError::NotComposable);
        }
        let g = self.bundle.groupoid().try_mul(e1.arrow, e2.arrow).ok_or(AtiyahError::NotComposable)?;
        Ok(AtiyahElement {
            sigma1: e1.sigma1,
            arrow: g,
            sigma2: e2.sigma2,
            chart_i: e1.chart_i,
            chart_j: e2.chart_j,
        })
    }

    /// π(e) = (σ₁, σ₂) as an arrow of Pair(Σ).
    pub fn project(&self, e: AtiyahElement) -> Arrow {
        pair_arrow(self.bundle.base().len(), e.sigma1, e.sigma2)
    }

    /// λ_𝒫([(σ₁,g,σ₂,i,j)], [(σ₂,h,j)]) = [(σ₁, g.h, i)].
    pub fn act_on_bundle(&self, e: AtiyahElement, p: BundlePoint) -> Result<BundlePoint, AtiyahError> {
        if self.source(e) != self.bundle.sitting_duck(p) {
            return Err(AtiyahError::MomentMismatch);
        }
        let arrow = self.bundle.groupoid().try_mul(e.arrow, p.arrow).ok_or(AtiyahError::MomentMismatch)?;
        Ok(BundlePoint {
            sigma: e.sigma1,
            chart: e.chart_i,
            arrow,
        })
    }

    /// λ_ℱ([(σ₁,g,σ₂,i,j)], [(σ₂,s(g),j)]) = [(σ₁, t(g), i)].
    pub fn act_on_shadow(&self, e: AtiyahElement, f: ShadowPoint) -> Result<ShadowPoint, AtiyahError> {
        if self.source(e) != f {
            return Err(AtiyahError::MomentMismatch);
        }
        Ok(self.target(e))
    }

    /// ψ_𝒫([(σ₁,g,i)], [(σ₂,h,j)]) = [(σ₁, g.h⁻¹, σ₂, i, j)].
    pub fn atiyah_division(&self, p1: BundlePoint, p2: BundlePoint) -> Result<AtiyahElement, AtiyahError> {
        let g = self.bundle.groupoid();
        if self.bundle.moment(p1) != self.bundle.moment(p2) {
            return Err(AtiyahError::MomentMismatch);
        }
        let arrow = g.try_mul(p1.arrow, g.inv(p2.arrow)).ok_or(AtiyahError::MomentMismatch)?;
        Ok(AtiyahElement {
            sigma1: p1.sigma,
            arrow,
            sigma2: p2.sigma,
            chart_i: p1.chart,
            chart_j: p2.chart,
        })
    }

    pub fn show(&self, e: AtiyahElement) -> String {
        let base = self.bundle.base();
        format!(
            "[({},{},{},{},{})]",
            base.name(e.sigma1),
            self.bundle.groupoid().arrow_name(e.arrow),
            base.name(e.sigma2),
            e.chart_i,
            e.chart_j
        )
    }

    /// Looks up an element by its printed form, e.g. `[(a,(r,0),b,0,0)]`.
    pub fn find(&self, text: &str) -> Option<AtiyahElement> {
        self.elements().into_iter().find(|&e| self.show(e) == text)
    }

    // ---- adjoint bundle ----

    pub fn adjoint_point(&self, sigma: usize, chart: usize, arrow: Arrow) -> AdjointElement {
        let b = &self.bundle;
        let i = b.base().canonical_chart(sigma);
        AdjointElement {
            sigma,
            chart: i,
            arrow: crate::bisection::conjugate(b.groupoid(), b.transition(i, chart, sigma), arrow),
        }
    }

    pub fn adjoint_elements(&self) -> Vec<AdjointElement> {
        let b = &self.bundle;
        (0..b.base().len())
            .flat_map(|sigma| {
                let chart = b.base().canonical_chart(sigma);
                b.groupoid().arrows().map(move |arrow| AdjointElement { sigma, chart, arrow })
            })
            .collect()
    }

    /// ȷ([(σ, g, i)]) = [(σ, g, σ, i, i)].
    pub fn embed(&self, a: AdjointElement) -> AtiyahElement {
        self.class(a.sigma, a.arrow, a.sigma, a.chart, a.chart)
    }

    pub fn adjoint_source(&self, a: AdjointElement) -> ShadowPoint {
        self.source(self.embed(a))
    }
}

/// Chart independence of every structure map, groupoid axioms over ℱ, and the
/// short exact sequence Ad(𝒫) ↪ At(𝒫) ↠ Pair(Σ).
pub fn verify_atiyah_sequence(at: &AtiyahGroupoid) -> ValidationReport {
    let b = at.bundle();
    let g = b.groupoid();
    let base = b.base();
    let n = base.len();
    let pair = crate::groupoid::pair(n);
    let mut r = validate_groupoid(at.groupoid()).prefixed("groupoid.");
    for name in [
        "well-defined.S",
        "well-defined.T",
        "well-defined.I",
        "well-defined.J",
        "well-defined.M",
        "well-defined.embedding",
        "pi.morphism",
        "pi.units",
        "pi.inverse",
        "pi.surjective",
        "pi.fibre-size",
        "embedding.injective",
        "embedding.kernel",
        "adjoint.count",
    ] {
        r.declare(name);
    }
    let elements = at.elements();
    for &e in &elements {
        let w = || at.show(e);
        for &k in base.charts_at(e.sigma1) {
            for &l in base.charts_at(e.sigma2) {
                let rep = at.represent(e, k, l);
                r.record("well-defined.S", b.shadow_point(e.sigma2, l, g.s(rep)).ok() == Some(at.source(e)), || {
                    format!("{} in charts ({k},{l})", w())
                });
                r.record("well-defined.T", b.shadow_point(e.sigma1, k, g.t(rep)).ok() == Some(at.target(e)), || {
                    format!("{} in charts ({k},{l})", w())
                });
                r.record("well-defined.J", at.class(e.sigma2, g.inv(rep), e.sigma1, l, k) == at.invert(e), || {
                    format!("{} in charts ({k},{l})", w())
                });
                for &e2 in elements.iter().filter(|e2| at.source(e) == at.target(**e2)) {
                    for &q in base.charts_at(e2.sigma2) {
                        let rep2 = at.represent(e2, l, q);
                        let got = g.try_mul(rep, rep2).map(|c| at.class(e.sigma1, c, e2.sigma2, k, q));
                        r.record("well-defined.M", got.is_some() && got == at.multiply(e, e2).ok(), || {
                            format!("{} . {} in charts ({k},{l},{q})", w(), at.show(e2))
                        });
                    }
                }
            }
        }
        let pe = at.project(e);
        r.record("pi.inverse", at.project(at.invert(e)) == pair.inv(pe), w);
    }
    for f in b.shadow_points() {
        for &k in base.charts_at(f.sigma) {
            let local = b.shadow_in_chart(f, k).expect("chart contains σ");
            let u = at.class(f.sigma, g.unit(local), f.sigma, k, k);
            r.record("well-defined.I", u == at.unit(f), || format!("{} chart {k}", b.show_shadow(f)));
        }
        r.record("pi.units", at.project(at.unit(f)) == pair.unit(f.sigma), || b.show_shadow(f));
    }
    for (a, c) in at.groupoid().composable_pairs() {
        let (ea, ec) = (at.element(a), at.element(c));
        let prod = at.multiply(ea, ec).expect("composable in the table");
        r.record("pi.morphism", at.project(prod) == pair.mul(at.project(ea), at.project(ec)), || {
            format!("{} . {}", at.show(ea), at.show(ec))
        });
    }
    let mut fibre = vec![0usize; n * n];
    for &e in &elements {
        fibre[at.project(e)] += 1;
    }
    for pa in pair.arrows() {
        r.record("pi.surjective", fibre[pa] > 0, || pair.arrow_name(pa).to_string());
        r.record("pi.fibre-size", fibre[pa] == g.n_arrows(), || {
            format!("{}: {}", pair.arrow_name(pa), fibre[pa])
        });
    }

    let adj = at.adjoint_elements();
    r.record("adjoint.count", adj.len() == n * g.n_arrows(), || adj.len().to_string());
    for &a in &adj {
        for &k in base.charts_at(a.sigma) {
            let local = crate::bisection::conjugate(g, b.transition(k, a.chart, a.sigma), a.arrow);
            r.record(
                "well-defined.embedding",
                at.adjoint_point(a.sigma, k, local) == a && at.embed(AdjointElement { chart: k, arrow: local, ..a }) == at.embed(a),
                || format!("({},{},{}) chart {k}", base.name(a.sigma), a.chart, g.arrow_name(a.arrow)),
            );
        }
    }
    let image: BTreeSet<AtiyahElement> = adj.iter().map(|&a| at.embed(a)).collect();
    r.record("embedding.injective", image.len() == adj.len(), || {
        format!("{} images for {} elements", image.len(), adj.len())
    });
    let kernel: BTreeSet<AtiyahElement> = elements
        .iter()
        .copied()
        .filter(|&e| pair.is_unit(at.project(e)))
        .collect();
    r.record("embedding.kernel", kernel == image, || {
        kernel
            .symmetric_difference(&image)
            .map(|&e| at.show(e))
            .collect::<Vec<_>>()
            .join(" ")
    });
    r
}

/// The trident: 𝒢 acting on the right, At(𝒫) on the left, both principal,
/// commuting, with mutually invariant moments, over Σ.
pub fn verify_trident(at: &AtiyahGroupoid) -> ValidationReport {
    let b = at.bundle();
    let g = b.groupoid();
    let base = b.base();
    let pair = crate::groupoid::pair(base.len());
    let mut r = ValidationReport::new();
    for name in [
        "right.preserves-pi-fibres",
        "left.covers-pair",
        "left.GlM1",
        "left.GlM2",
        "left.GlM3",
        "left.chart-independent",
        "left.intertwines-duck",
        "actions.commute",
        "moments.mu-left-invariant",
        "moments.duck-right-invariant",
        "right.principal",
        "left.principal.inverse",
        "left.principal.section",
        "left.principal.bijective",
        "orbits.left",
        "orbits.right",
    ] {
        r.declare(name);
    }
    let points = b.points();
    let elements = at.elements();
    let sp = |p: BundlePoint| b.show_point(p);
    for &p in &points {
        for &h in g.target_fibre(b.moment(p)) {
            let q = b.right_action(p, h).expect("composable");
            r.record("right.preserves-pi-fibres", q.sigma == p.sigma, || sp(p));
            r.record("moments.duck-right-invariant", b.sitting_duck(q) == b.sitting_duck(p), || sp(p));
        }
        let duck = b.sitting_duck(p);
        r.record("left.GlM2", at.act_on_bundle(at.unit(duck), p).ok() == Some(p), || sp(p));
    }
    let mut left_domain = 0usize;
    let mut left_image = BTreeSet::new();
    for &e in &elements {
        for &p in points.iter().filter(|&&p| b.sitting_duck(p) == at.source(e)) {
            left_domain += 1;
            let w = || format!("e={}, p={}", at.show(e), sp(p));
            let q = at.act_on_bundle(e, p).expect("S(e) = D(p)");
            left_image.insert((q, p));
            r.record("left.covers-pair", pair.t(at.project(e)) == q.sigma && pair.s(at.project(e)) == p.sigma, w);
            r.record("left.GlM1", b.sitting_duck(q) == at.target(e), w);
            r.record(
                "left.intertwines-duck",
                at.act_on_shadow(e, b.sitting_duck(p)).ok() == Some(b.sitting_duck(q)),
                w,
            );
            r.record("moments.mu-left-invariant", b.moment(q) == b.moment(p), w);
            r.record("left.principal.inverse", at.atiyah_division(q, p).ok() == Some(e), w);
            for &k in base.charts_at(e.sigma1) {
                for &l in base.charts_at(e.sigma2) {
                    let local = g.try_mul(at.represent(e, k, l), b.in_chart(p, l).expect("chart"));
                    let got = local.and_then(|a| b.point(e.sigma1, k, a).ok());
                    r.record("left.chart-independent", got == Some(q), || format!("{} charts ({k},{l})", w()));
                }
            }
            for &h in g.target_fibre(b.moment(p)) {
                let lhs = at.act_on_bundle(e, b.right_action(p, h).expect("composable")).ok();
                let rhs = b.right_action(q, h).ok();
                r.record("actions.commute", lhs.is_some() && lhs == rhs, || format!("{}, h={}", w(), g.arrow_name(h)));
            }
            for &e0 in elements.iter().filter(|&&e0| at.source(e0) == at.target(e)) {
                let lhs = at.multiply(e0, e).ok().and_then(|e01| at.act_on_bundle(e01, p).ok());
                let rhs = at.act_on_bundle(e0, q).ok();
                r.record("left.GlM3", lhs.is_some() && lhs == rhs, || format!("e0={}, {}", at.show(e0), w()));
            }
        }
    }
    let mut left_codomain = 0usize;
    for &p1 in &points {
        for &p2 in &points {
            if b.moment(p1) == b.moment(p2) {
                left_codomain += 1;
                let back = at.atiyah_division(p1, p2).ok().and_then(|e| at.act_on_bundle(e, p2).ok());
                r.record("left.principal.section", back == Some(p1), || format!("p1={}, p2={}", sp(p1), sp(p2)));
            }
            if b.sitting_duck(p1) == b.sitting_duck(p2) {
                let back = b.division(p1, p2).ok().and_then(|h| b.right_action(p1, h).ok());
                r.record("right.principal", back == Some(p2), || format!("p1={}, p2={}", sp(p1), sp(p2)));
            }
        }
    }
    r.record(
        "left.principal.bijective",
        left_domain == left_codomain && left_image.len() == left_domain,
        || format!("|At x P| = {left_domain}, |P x_mu P| = {left_codomain}, |image| = {}", left_image.len()),
    );
    let left_orbits = orbit_count(&points, |p| {
        elements
            .iter()
            .filter_map(|&e| at.act_on_bundle(e, p).ok())
            .collect()
    });
    r.record("orbits.left", left_orbits == g.n_objects(), || {
        format!("{left_orbits} orbits, {} objects", g.n_objects())
    });
    let right_orbits = orbit_count(&points, |p| {
        g.target_fibre(b.moment(p))
            .iter()
            .map(|&h| b.right_action(p, h).expect("composable"))
            .collect()
    });
    r.record("orbits.right", right_orbits == b.shadow_points().len(), || {
        format!("{right_orbits} orbits, {} shadow points", b.shadow_points().len())
    });
    r
}

fn orbit_count(points: &[BundlePoint], orbit: impl Fn(BundlePoint) -> Vec<BundlePoint>) -> usize {
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for &p in points {
        if seen.contains(&p) {
            continue;
        }
        count += 1;
        seen.extend(orbit(p));
        seen.insert(p);
    }
    count
}

/// A bisection of At(𝒫) covering the base bijection `base_map`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectableBisection {
    pub base_map: Vec<usize>,
    pub bisection: Bisection,
}

#[derive(Debug, Clone)]
pub struct ProjectableBisections {
    pub all_count: usize,
    pub projectable: Vec<ProjectableBisection>,
    /// Those over Id(Σ).
    pub vertical: Vec<Bisection>,
}

/// The base map covered by a bisection of At(𝒫), if it is π-projectable.
pub fn projection_of(at: &AtiyahGroupoid, b: &Bisection) -> Result<Vec<usize>, AtiyahError> {
    let n = at.bundle().base().len();
    let mut f = vec![usize::MAX; n];
    for idx in at.groupoid().objects() {
        let e = at.element(b.at(idx));
        let sigma = at.shadow_at(idx).sigma;
        if f[sigma] == usize::MAX {
            f[sigma] = e.sigma1;
        } else if f[sigma] != e.sigma1 {
            return Err(AtiyahError::NotProjectable);
        }
    }
    let distinct: BTreeSet<usize> = f.iter().copied().collect();
    if distinct.len() != n {
        return Err(AtiyahError::NotProjectable);
    }
    Ok(f)
}

pub fn enumerate_projectable_bisections(at: &AtiyahGroupoid, cap: u128) -> Result<ProjectableBisections, CapExceeded> {
    let group = enumerate_bisections(at.groupoid(), cap)?;
    let mut projectable = Vec::new();
    let mut vertical = Vec::new();
    for b in group.elements() {
        if let Ok(f) = projection_of(at, b) {
            if f.iter().enumerate().all(|(i, &x)| i == x) {
                vertical.push(b.clone());
            }
            projectable.push(ProjectableBisection {
                base_map: f,
                bisection: b.clone(),
            });
        }
    }
    Ok(ProjectableBisections {
        all_count: group.len(),
        projectable,
        vertical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisection::validate_bisection;
    use crate::bundle::{three_point_z2, trivial_bundle, Cocycle};
    use crate::groupoid::{cyclic, pair};

    fn example() -> AtiyahGroupoid {
        build_atiyah(&three_point_z2())
    }

    fn el(at: &AtiyahGroupoid, s: &str) -> AtiyahElement {
        at.find(s).unwrap_or_else(|| panic!("no element {s}"))
    }

    #[test]
    fn counts_and_validation() {
        let at = example();
        assert_eq!(at.len(), 36);
        assert_eq!(at.groupoid().n_arrows(), 36);
        assert_eq!(at.groupoid().n_objects(), 6);
        assert_eq!(at.adjoint_elements().len(), 12);
        assert!(validate_groupoid(at.groupoid()).is_ok());
        for (i, e) in at.elements().into_iter().enumerate() {
            assert_eq!(at.index(e), i);
        }
    }

    #[test]
    fn structure_map_examples() {
        let at = example();
        let b = at.bundle();
        let e = el(&at, "[(a,(r,0),b,0,0)]");
        assert_eq!(b.show_shadow(at.source(e)), "(b,0,0)");
        assert_eq!(b.show_shadow(at.target(e)), "(a,0,1)");
        assert_eq!(at.show(at.invert(e)), "[(b,(r,1),a,0,0)]");
        let e2 = el(&at, "[(b,(r,1),c,0,1)]");
        assert_eq!(at.show(at.multiply(e, e2).unwrap()), "[(a,(e,1),c,0,1)]");
        assert_eq!(at.multiply(e, at.unit(at.source(e))).unwrap(), e);
        assert_eq!(at.multiply(e, e), Err(AtiyahError::NotComposable));
    }

    #[test]
    fn noncanonical_representatives() {
        let at = example();
        // chart 1 representative of b carries β_10(b) = β_r on both sides
        let e = at.class(1, 0, 1, 1, 1);
        assert_eq!(at.show(e), "[(b,(e,1),b,0,0)]");
        let x = at.class(1, at.bundle().groupoid().find_arrow("(r,0)").unwrap(), 2, 1, 1);
        assert_eq!(at.show(x), "[(b,(e,0),c,0,1)]");
        assert_eq!(at.represent(x, 1, 1), 2);
    }

    #[test]
    fn action_examples() {
        let at = example();
        let b = at.bundle();
        let gr = b.groupoid();
        let e = el(&at, "[(a,(r,0),b,0,0)]");
        let p = b.point(1, 0, gr.find_arrow("(e,0)").unwrap()).unwrap();
        let q = at.act_on_bundle(e, p).unwrap();
        assert_eq!(b.show_point(q), "(a,0,(r,0))");
        assert_eq!(at.act_on_bundle(at.unit(b.sitting_duck(p)), p).unwrap(), p);
        let f = at.act_on_shadow(e, b.sitting_duck(p)).unwrap();
        assert_eq!(b.show_shadow(f), "(a,0,1)");
        assert_eq!(f, b.sitting_duck(q));
        assert_eq!(at.atiyah_division(q, p).unwrap(), e);
        assert_eq!(at.atiyah_division(p, p).unwrap(), at.unit(b.sitting_duck(p)));
        let p_other = b.point(1, 0, gr.find_arrow("(e,1)").unwrap()).unwrap();
        assert_eq!(at.atiyah_division(q, p_other), Err(AtiyahError::MomentMismatch));
        assert_eq!(at.act_on_bundle(e, p_other), Err(AtiyahError::MomentMismatch));
    }

    #[test]
    fn sequence_and_trident_pass() {
        let at = example();
        let r = verify_atiyah_sequence(&at);
        assert!(r.is_ok(), "{:?}", r.failed().collect::<Vec<_>>());
        let r = verify_trident(&at);
        assert!(r.is_ok(), "{:?}", r.failed().collect::<Vec<_>>());
        assert_eq!(r.check("left.principal.section").unwrap().cases, 72);
    }

    #[test]
    fn adjoint_is_kernel() {
        let at = example();
        for a in at.adjoint_elements() {
            let e = at.embed(a);
            assert_eq!(e.sigma1, e.sigma2);
        }
    }

    #[test]
    fn single_chart_group_bundle_is_gauge_groupoid() {
        let b = trivial_bundle(vec!["x".into(), "y".into()], cyclic(3));
        let at = build_atiyah(&b);
        assert_eq!(at.len(), 4 * 3);
        // ψ identifies At with the diagonal orbits of P×P
        let pts = b.points();
        let mut orbit_of = std::collections::BTreeMap::new();
        for &p1 in &pts {
            for &p2 in &pts {
                let e = at.atiyah_division(p1, p2).unwrap();
                for h in b.groupoid().arrows() {
                    let (q1, q2) = (b.right_action(p1, h).unwrap(), b.right_action(p2, h).unwrap());
                    assert_eq!(at.atiyah_division(q1, q2).unwrap(), e);
                }
                orbit_of.entry(e).or_insert_with(BTreeSet::new).insert((p1, p2));
            }
        }
        assert_eq!(orbit_of.len(), at.len());
        assert!(orbit_of.values().all(|o| o.len() == 3));
        assert!(verify_atiyah_sequence(&at).is_ok());
        assert!(verify_trident(&at).is_ok());
        let pb = enumerate_projectable_bisections(&at, 1 << 20).unwrap();
        assert_eq!(pb.all_count, pb.projectable.len());
    }

    #[test]
    fn pair_fibre_gives_pair_groupoid_of_shadow() {
        let g = pair(2);
        let b = trivial_bundle(vec!["x".into(), "y".into()], g);
        let at = build_atiyah(&b);
        let anchors: BTreeSet<(ShadowPoint, ShadowPoint)> =
            at.elements().into_iter().map(|e| (at.target(e), at.source(e))).collect();
        assert_eq!(anchors.len(), at.len());
        assert_eq!(at.len(), b.shadow_points().len().pow(2));
    }

    #[test]
    fn projectable_bisections_of_example() {
        let at = example();
        let pb = enumerate_projectable_bisections(&at, 1 << 20).unwrap();
        assert_eq!(pb.all_count, 720);
        assert_eq!(pb.vertical.len(), 8);
        assert_eq!(pb.projectable.len(), 48);
        for p in &pb.projectable {
            assert!(validate_bisection(at.groupoid(), &p.bisection));
        }
    }

    #[test]
    fn bisection_splitting_a_base_point_is_not_projectable() {
        let at = example();
        // (a,1) and (b,1) trade base points, everything else stays put
        let mut assign = Vec::new();
        for idx in at.groupoid().objects() {
            let f = at.shadow_at(idx);
            let target_sigma = match (f.sigma, f.object) {
                (0, 1) => 1,
                (1, 1) => 0,
                (s, _) => s,
            };
            let e = at
                .elements()
                .into_iter()
                .find(|&e| at.source(e) == f && e.sigma1 == target_sigma && at.bundle().groupoid().is_unit(e.arrow))
                .unwrap();
            assign.push(at.index(e));
        }
        let b = Bisection::new(assign);
        assert!(validate_bisection(at.groupoid(), &b));
        assert_eq!(projection_of(&at, &b), Err(AtiyahError::NotProjectable));
    }

    #[test]
    fn trivial_cocycle_on_same_cover() {
        let nt = three_point_z2();
        let c = Cocycle::trivial(nt.base(), nt.groupoid());
        let b = crate::bundle::build_bundle(nt.base().clone(), c, nt.groupoid().clone()).unwrap();
        let at = build_atiyah(&b);
        assert!(verify_trident(&at).is_ok());
    }

    #[test]
    fn elements_serialize_as_quintuples() {
        let at = example();
        let e = el(&at, "[(a,(r,0),b,0,0)]");
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, "[0,2,1,0,0]");
        assert_eq!(serde_json::from_str::<AtiyahElement>(&s).unwrap(), e);
    }
}
