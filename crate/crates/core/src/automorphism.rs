//! Bundle automorphisms from local bisection-valued data, the gauge group,
//! the induced maps on ℱ and Ad(𝒫), and the correspondence with
//! π-projectable bisections of At(𝒫).
//!
//! Data over a base bijection f is a family γ_(j,i)(σ) for σ ∈ O_i with
//! f(σ) ∈ O_j, subject to γ_(l,k) = f*β_lj · γ_(j,i) · β_ik.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atiyah::{projection_of, AdjointElement, AtiyahElement, AtiyahGroupoid};
use crate::bisection::{
    bisection_inverse, bisection_product, conjugate, enumerate_bisections, left_mult, shadow, validate_bisection,
    Bisection, CapExceeded,
};
use crate::bundle::{BaseRef, BundlePoint, PrincipaloidBundle, ShadowPoint};
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomorphismError {
    #[error("base map is not a bijection with the given inverse")]
    NotBijective,
    #[error("no γ value at (j={j}, i={i}, σ={sigma})")]
    Missing { j: usize, i: usize, sigma: usize },
    #[error("γ value at (j={j}, i={i}, σ={sigma}) is outside the refined cover or not a bisection")]
    BadEntry { j: usize, i: usize, sigma: usize },
    #[error("the adjoint map is only defined for vertical automorphisms")]
    NotVertical,
    #[error("bisection of the Atiyah groupoid is not projectable")]
    NotProjectable,
    #[error("unknown base point {0}")]
    UnknownBase(String),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
}

/// (f, f⁻¹, γ) with γ keyed by (j, i, σ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomorphismData {
    pub f: Vec<usize>,
    pub f_inv: Vec<usize>,
    pub gamma: BTreeMap<(usize, usize, usize), Bisection>,
}

fn check_bijection(f: &[usize], f_inv: &[usize]) -> Result<(), AutomorphismError> {
    let n = f.len();
    let ok = f_inv.len() == n
        && f.iter().all(|&x| x < n)
        && f_inv.iter().all(|&x| x < n)
        && (0..n).all(|s| f_inv[f[s]] == s && f[f_inv[s]] == s);
    if ok {
        Ok(())
    } else {
        Err(AutomorphismError::NotBijective)
    }
}

/// (j, i, σ) with σ ∈ O_i and f(σ) ∈ O_j.
pub fn refined_cover(bundle: &PrincipaloidBundle, f: &[usize]) -> Vec<(usize, usize, usize)> {
    let base = bundle.base();
    let mut out = Vec::new();
    for sigma in 0..base.len() {
        for &i in base.charts_at(sigma) {
            for &j in base.charts_at(f[sigma]) {
                out.push((j, i, sigma));
            }
        }
    }
    out
}

fn glue(bundle: &PrincipaloidBundle, f: &[usize], from: (usize, usize), to: (usize, usize), sigma: usize, b: &Bisection) -> Bisection {
    let g = bundle.groupoid();
    let (j, i) = from;
    let (l, k) = to;
    let left = bundle.transition(l, j, f[sigma]);
    let right = bundle.transition(i, k, sigma);
    bisection_product(g, left, &bisection_product(g, b, right))
}

impl AutomorphismData {
    pub fn identity(bundle: &PrincipaloidBundle) -> Self {
        let n = bundle.base().len();
        let id: Vec<usize> = (0..n).collect();
        let canonical = vec![Bisection::identity(bundle.groupoid()); n];
        Self::from_canonical(bundle, id.clone(), id, canonical).expect("identity data")
    }

    /// Fills every refined-cover entry not given from a given entry at the same
    /// base point via the gluing law. Given entries are kept verbatim, so
    /// inconsistent input survives for [`validate_automorphism`] to report.
    pub fn complete(
        bundle: &PrincipaloidBundle,
        f: Vec<usize>,
        f_inv: Vec<usize>,
        given: impl IntoIterator<Item = ((usize, usize, usize), Bisection)>,
    ) -> Result<Self, AutomorphismError> {
        check_bijection(&f, &f_inv)?;
        let g = bundle.groupoid();
        let cover: BTreeSet<_> = refined_cover(bundle, &f).into_iter().collect();
        let mut gamma = BTreeMap::new();
        for ((j, i, sigma), b) in given {
            if !cover.contains(&(j, i, sigma)) || !validate_bisection(g, &b) {
                return Err(AutomorphismError::BadEntry { j, i, sigma });
            }
            gamma.insert((j, i, sigma), b);
        }
        for &(l, k, sigma) in &cover {
            if gamma.contains_key(&(l, k, sigma)) {
                continue;
            }
            let seed = gamma
                .iter()
                .find(|((_, _, s), _)| *s == sigma)
                .map(|(&(j, i, _), b)| ((j, i), b.clone()));
            let Some((from, b)) = seed else {
                return Err(AutomorphismError::Missing { j: l, i: k, sigma });
            };
            let filled = glue(bundle, &f, from, (l, k), sigma, &b);
            gamma.insert((l, k, sigma), filled);
        }
        Ok(Self { f, f_inv, gamma })
    }

    /// Data from one bisection per base point, read in the canonical charts of σ and f(σ).
    pub fn from_canonical(
        bundle: &PrincipaloidBundle,
        f: Vec<usize>,
        f_inv: Vec<usize>,
        canonical: Vec<Bisection>,
    ) -> Result<Self, AutomorphismError> {
        check_bijection(&f, &f_inv)?;
        let base = bundle.base();
        let given: Vec<_> = canonical
            .into_iter()
            .enumerate()
            .map(|(sigma, b)| {
                let key = (base.canonical_chart(f[sigma]), base.canonical_chart(sigma), sigma);
                (key, b)
            })
            .collect();
        Self::complete(bundle, f, f_inv, given)
    }

    pub fn is_vertical(&self) -> bool {
        self.f.iter().enumerate().all(|(s, &x)| s == x)
    }

    pub fn gamma_at(&self, j: usize, i: usize, sigma: usize) -> &Bisection {
        &self.gamma[&(j, i, sigma)]
    }

    pub fn to_doc(&self, bundle: &PrincipaloidBundle) -> AutomorphismDoc {
        AutomorphismDoc {
            f: self.f.clone(),
            f_inv: self.f_inv.clone(),
            gamma: self
                .gamma
                .iter()
                .map(|(&(j, i, sigma), b)| GammaDoc {
                    j,
                    i,
                    sigma: BaseRef::Name(bundle.base().name(sigma).to_string()),
                    bisection: b.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaDoc {
    pub j: usize,
    pub i: usize,
    pub sigma: BaseRef,
    pub bisection: Bisection,
}

/// JSON form: `{"f": [...], "f_inv": [...], "gamma": [{"j","i","sigma","bisection"}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismDoc {
    pub f: Vec<usize>,
    pub f_inv: Vec<usize>,
    pub gamma: Vec<GammaDoc>,
}

impl AutomorphismDoc {
    /// Resolves base names against `bundle`; missing entries are filled by gluing.
    pub fn resolve(&self, bundle: &PrincipaloidBundle) -> Result<AutomorphismData, AutomorphismError> {
        let base = bundle.base();
        let given = self
            .gamma
            .iter()
            .map(|e| {
                let sigma = match &e.sigma {
                    BaseRef::Index(i) if *i < base.len() => *i,
                    BaseRef::Index(i) => return Err(AutomorphismError::UnknownBase(i.to_string())),
                    BaseRef::Name(n) => base.find(n).ok_or_else(|| AutomorphismError::UnknownBase(n.clone()))?,
                };
                Ok(((e.j, e.i, sigma), e.bisection.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if self.f.len() != base.len() {
            return Err(AutomorphismError::NotBijective);
        }
        AutomorphismData::complete(bundle, self.f.clone(), self.f_inv.clone(), given)
    }
}

/// Gluing relations between every pair of refined-cover entries at each σ.
pub fn validate_automorphism(bundle: &PrincipaloidBundle, d: &AutomorphismData) -> Result<ValidationReport, AutomorphismError> {
    check_bijection(&d.f, &d.f_inv)?;
    let g = bundle.groupoid();
    let cover = refined_cover(bundle, &d.f);
    for &(j, i, sigma) in &cover {
        match d.gamma.get(&(j, i, sigma)) {
            None => return Err(AutomorphismError::Missing { j, i, sigma }),
            Some(b) if !validate_bisection(g, b) => return Err(AutomorphismError::BadEntry { j, i, sigma }),
            _ => {}
        }
    }
    if let Some(&(j, i, sigma)) = d.gamma.keys().find(|k| !cover.contains(k)) {
        return Err(AutomorphismError::BadEntry { j, i, sigma });
    }
    let mut r = ValidationReport::new();
    r.declare("gluing");
    for &(j, i, sigma) in &cover {
        for &(l, k, s2) in cover.iter().filter(|c| c.2 == sigma) {
            let want = glue(bundle, &d.f, (j, i), (l, k), s2, d.gamma_at(j, i, sigma));
            r.record("gluing", &want == d.gamma_at(l, k, sigma), || {
                format!("(i={i},j={j},k={k},l={l},{})", bundle.base().name(sigma))
            });
        }
    }
    Ok(r)
}

/// (σ, g, i) ↦ (f(σ), L_{γ_(j,i)(σ)}(g), j).
pub fn apply_automorphism(bundle: &PrincipaloidBundle, d: &AutomorphismData, p: BundlePoint) -> BundlePoint {
    apply_via(bundle, d, p, p.chart, bundle.base().canonical_chart(d.f[p.sigma]))
}

/// The same map evaluated with source chart `i` and target chart `j`.
pub fn apply_via(bundle: &PrincipaloidBundle, d: &AutomorphismData, p: BundlePoint, i: usize, j: usize) -> BundlePoint {
    let g = bundle.groupoid();
    let local = bundle.in_chart(p, i).expect("chart contains σ");
    let moved = left_mult(g, d.gamma_at(j, i, p.sigma), local);
    bundle.point(d.f[p.sigma], j, moved).expect("chart contains f(σ)")
}

/// Extensional key: the image of every point of 𝒫.
pub fn extension(bundle: &PrincipaloidBundle, d: &AutomorphismData) -> Vec<BundlePoint> {
    bundle.points().into_iter().map(|p| apply_automorphism(bundle, d, p)).collect()
}

pub fn same_automorphism(bundle: &PrincipaloidBundle, d1: &AutomorphismData, d2: &AutomorphismData) -> bool {
    extension(bundle, d1) == extension(bundle, d2)
}

/// d2 ∘ d1.
pub fn compose_automorphisms(bundle: &PrincipaloidBundle, d2: &AutomorphismData, d1: &AutomorphismData) -> AutomorphismData {
    let g = bundle.groupoid();
    let base = bundle.base();
    let f: Vec<usize> = d1.f.iter().map(|&x| d2.f[x]).collect();
    let f_inv: Vec<usize> = d2.f_inv.iter().map(|&x| d1.f_inv[x]).collect();
    let mut gamma = BTreeMap::new();
    for (l, i, sigma) in refined_cover(bundle, &f) {
        let mid = d1.f[sigma];
        let j = base.canonical_chart(mid);
        let b = bisection_product(g, d2.gamma_at(l, j, mid), d1.gamma_at(j, i, sigma));
        gamma.insert((l, i, sigma), b);
    }
    AutomorphismData { f, f_inv, gamma }
}

pub fn invert_automorphism(bundle: &PrincipaloidBundle, d: &AutomorphismData) -> AutomorphismData {
    let g = bundle.groupoid();
    let mut gamma = BTreeMap::new();
    for (i, j, tau) in refined_cover(bundle, &d.f_inv) {
        let sigma = d.f_inv[tau];
        gamma.insert((i, j, tau), bisection_inverse(g, d.gamma_at(j, i, sigma)));
    }
    AutomorphismData {
        f: d.f_inv.clone(),
        f_inv: d.f.clone(),
        gamma,
    }
}

/// ℱ_*(Φ): (σ, m, i) ↦ (f(σ), t_*γ_(j,i)(σ)(m), j).
pub fn shadow_map(bundle: &PrincipaloidBundle, d: &AutomorphismData, x: ShadowPoint) -> ShadowPoint {
    let j = bundle.base().canonical_chart(d.f[x.sigma]);
    let moved = shadow(bundle.groupoid(), d.gamma_at(j, x.chart, x.sigma))[x.object];
    bundle.shadow_point(d.f[x.sigma], j, moved).expect("chart contains f(σ)")
}

/// 𝒜_*(Φ): (σ, g, i) ↦ (σ, C_{γ_(i,i)(σ)}(g), i), vertical data only.
pub fn adjoint_map(
    at: &AtiyahGroupoid,
    d: &AutomorphismData,
    a: AdjointElement,
) -> Result<AdjointElement, AutomorphismError> {
    if !d.is_vertical() {
        return Err(AutomorphismError::NotVertical);
    }
    let g = at.bundle().groupoid();
    let moved = conjugate(g, d.gamma_at(a.chart, a.chart, a.sigma), a.arrow);
    Ok(at.adjoint_point(a.sigma, a.chart, moved))
}

#[derive(Debug, Clone)]
pub struct InducedMaps {
    pub shadow: BTreeMap<ShadowPoint, ShadowPoint>,
    pub adjoint: Option<BTreeMap<AdjointElement, AdjointElement>>,
}

pub fn induced_maps(at: &AtiyahGroupoid, d: &AutomorphismData) -> InducedMaps {
    let b = at.bundle();
    let shadow = b.shadow_points().into_iter().map(|x| (x, shadow_map(b, d, x))).collect();
    let adjoint = d.is_vertical().then(|| {
        at.adjoint_elements()
            .into_iter()
            .map(|a| (a, adjoint_map(at, d, a).expect("vertical")))
            .collect()
    });
    InducedMaps { shadow, adjoint }
}

/// β_Φ([(σ, m, i)]) = [(f(σ), γ_(j,i)(σ)(m), σ, j, i)], indexed by the objects of At(𝒫).
pub fn automorphism_to_bisection(at: &AtiyahGroupoid, d: &AutomorphismData) -> Bisection {
    let b = at.bundle();
    let assign = at
        .groupoid()
        .objects()
        .map(|idx| {
            let x = at.shadow_at(idx);
            let j = b.base().canonical_chart(d.f[x.sigma]);
            let arrow = d.gamma_at(j, x.chart, x.sigma).at(x.object);
            at.index(at.class(d.f[x.sigma], arrow, x.sigma, j, x.chart))
        })
        .collect();
    Bisection::new(assign)
}

pub fn bisection_to_automorphism(at: &AtiyahGroupoid, beta: &Bisection) -> Result<AutomorphismData, AutomorphismError> {
    if !validate_bisection(at.groupoid(), beta) {
        return Err(AutomorphismError::NotProjectable);
    }
    let f = projection_of(at, beta).map_err(|_| AutomorphismError::NotProjectable)?;
    let mut f_inv = vec![0; f.len()];
    for (s, &x) in f.iter().enumerate() {
        f_inv[x] = s;
    }
    let b = at.bundle();
    let g = b.groupoid();
    let canonical = (0..b.base().len())
        .map(|sigma| {
            let assign = g
                .objects()
                .map(|m| {
                    let idx = at.shadow_index(ShadowPoint {
                        sigma,
                        chart: b.base().canonical_chart(sigma),
                        object: m,
                    });
                    at.element(beta.at(idx)).arrow
                })
                .collect();
            Bisection::new(assign)
        })
        .collect();
    AutomorphismData::from_canonical(b, f, f_inv, canonical)
}

/// A group of automorphisms, deduplicated extensionally.
#[derive(Debug, Clone)]
pub struct AutomorphismGroup {
    pub elements: Vec<AutomorphismData>,
    keys: BTreeMap<Vec<BundlePoint>, usize>,
}

impl AutomorphismGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, bundle: &PrincipaloidBundle, d: &AutomorphismData) -> Option<usize> {
        self.keys.get(&extension(bundle, d)).copied()
    }

    fn insert(&mut self, bundle: &PrincipaloidBundle, d: AutomorphismData) {
        let key = extension(bundle, &d);
        if !self.keys.contains_key(&key) {
            self.keys.insert(key, self.elements.len());
            self.elements.push(d);
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                go(cur, used, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Brute force over every assignment of bisections to the refined-cover
/// entries, keeping the ones satisfying the gluing relations.
fn enumerate_over(
    bundle: &PrincipaloidBundle,
    maps: &[Vec<usize>],
    cap: u128,
) -> Result<AutomorphismGroup, AutomorphismError> {
    let g = bundle.groupoid();
    let group = enumerate_bisections(g, cap)?;
    let k = group.len() as u128;
    let mut out = AutomorphismGroup {
        elements: Vec::new(),
        keys: BTreeMap::new(),
    };
    let mut budget: u128 = 0;
    let mut plans = Vec::new();
    for f in maps {
        let cover = refined_cover(bundle, f);
        // entries at different base points never interact
        let mut per_sigma: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); bundle.base().len()];
        for e in cover {
            per_sigma[e.2].push(e);
        }
        for entries in &per_sigma {
            budget = budget.saturating_add(k.saturating_pow(entries.len() as u32));
        }
        plans.push((f.clone(), per_sigma));
    }
    if budget > cap {
        return Err(CapExceeded { needed: budget, cap }.into());
    }
    for (f, per_sigma) in plans {
        let mut f_inv = vec![0; f.len()];
        for (s, &x) in f.iter().enumerate() {
            f_inv[x] = s;
        }
        let mut local_choices: Vec<Vec<Vec<Bisection>>> = Vec::new();
        for (sigma, entries) in per_sigma.iter().enumerate() {
            let mut valid = Vec::new();
            let mut idx = vec![0usize; entries.len()];
            loop {
                let vals: Vec<Bisection> = idx.iter().map(|&x| group.get(x).clone()).collect();
                let ok = entries.iter().zip(&vals).all(|(&(j, i, _), bj)| {
                    entries
                        .iter()
                        .zip(&vals)
                        .all(|(&(l, kk, _), bl)| &glue(bundle, &f, (j, i), (l, kk), sigma, bj) == bl)
                });
                if ok {
                    valid.push(vals);
                }
                let mut pos = 0;
                while pos < idx.len() {
                    idx[pos] += 1;
                    if idx[pos] < group.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == idx.len() {
                    break;
                }
            }
            local_choices.push(valid);
        }
        let mut pick = vec![0usize; per_sigma.len()];
        if local_choices.iter().any(Vec::is_empty) {
            continue;
        }
        loop {
            let mut gamma = BTreeMap::new();
            for (sigma, entries) in per_sigma.iter().enumerate() {
                for (e, b) in entries.iter().zip(&local_choices[sigma][pick[sigma]]) {
                    gamma.insert(*e, b.clone());
                }
            }
            out.insert(
                bundle,
                AutomorphismData {
                    f: f.clone(),
                    f_inv: f_inv.clone(),
                    gamma,
                },
            );
            let mut pos = 0;
            while pos < pick.len() {
                pick[pos] += 1;
                if pick[pos] < local_choices[pos].len() {
                    break;
                }
                pick[pos] = 0;
                pos += 1;
            }
            if pos == pick.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// Gauge(𝒫): vertical automorphisms.
pub fn enumerate_gauge_group(bundle: &PrincipaloidBundle, cap: u128) -> Result<AutomorphismGroup, AutomorphismError> {
    let id: Vec<usize> = (0..bundle.base().len()).collect();
    enumerate_over(bundle, &[id], cap)
}

/// Aut(𝒫) over every base bijection.
pub fn enumerate_automorphisms(bundle: &PrincipaloidBundle, cap: u128) -> Result<AutomorphismGroup, AutomorphismError> {
    let n = bundle.base().len();
    let mut fact: u128 = 1;
    for k in 2..=n as u128 {
        fact = fact.saturating_mul(k);
    }
    if fact > cap {
        return Err(CapExceeded { needed: fact, cap }.into());
    }
    enumerate_over(bundle, &permutations(n), cap)
}

/// Equivariance, covering and group laws of a set of automorphisms together
/// with the correspondence with π-projectable bisections of At(𝒫).
pub fn verify_automorphisms(at: &AtiyahGroupoid, group: &AutomorphismGroup, projectable: &[Bisection]) -> ValidationReport {
    let b = at.bundle();
    let g = b.groupoid();
    let ag = at.groupoid();
    let mut r = ValidationReport::new();
    for name in [
        "valid",
        "bijective",
        "covers-base",
        "equivariant",
        "chart-independent",
        "duck-intertwines",
        "shadow.bijective",
        "adjoint.source",
        "adjoint.bijective",
        "group.closed",
        "group.inverse",
        "shadow.homomorphism",
        "adjoint.homomorphism",
        "bisection.S-section",
        "bisection.T-shadow",
        "bisection.round-trip",
        "bisection.homomorphism",
        "bisection.injective",
        "bisection.onto",
        "bisection.back-round-trip",
        "geometric-implementation",
    ] {
        r.declare(name);
    }
    let points = b.points();
    let shadows = b.shadow_points();
    let mut images = BTreeSet::new();
    for (n, d) in group.elements.iter().enumerate() {
        let wn = || format!("#{n}");
        r.record("valid", validate_automorphism(b, d).map(|x| x.is_ok()).unwrap_or(false), wn);
        let ext = extension(b, d);
        let distinct: BTreeSet<_> = ext.iter().collect();
        r.record("bijective", distinct.len() == points.len(), wn);
        for &p in &points {
            let q = apply_automorphism(b, d, p);
            let w = || format!("#{n} at {}", b.show_point(p));
            r.record("covers-base", q.sigma == d.f[p.sigma], w);
            r.record(
                "duck-intertwines",
                b.sitting_duck(q) == shadow_map(b, d, b.sitting_duck(p)),
                w,
            );
            for &i in b.base().charts_at(p.sigma) {
                for &j in b.base().charts_at(d.f[p.sigma]) {
                    r.record("chart-independent", apply_via(b, d, p, i, j) == q, w);
                }
            }
            for &h in g.target_fibre(b.moment(p)) {
                let lhs = apply_automorphism(b, d, b.right_action(p, h).expect("composable"));
                r.record("equivariant", b.right_action(q, h).ok() == Some(lhs), w);
            }
            let beta = automorphism_to_bisection(at, d);
            let e = at.element(beta.at(at.shadow_index(b.sitting_duck(p))));
            r.record("geometric-implementation", at.act_on_bundle(e, p).ok() == Some(q), w);
        }
        let shadow_img: BTreeSet<_> = shadows.iter().map(|&x| shadow_map(b, d, x)).collect();
        r.record("shadow.bijective", shadow_img.len() == shadows.len(), wn);
        if d.is_vertical() {
            let adj = at.adjoint_elements();
            let mut img = BTreeSet::new();
            for &a in &adj {
                let a2 = adjoint_map(at, d, a).expect("vertical");
                img.insert(a2);
                r.record(
                    "adjoint.source",
                    at.adjoint_source(a2) == shadow_map(b, d, at.adjoint_source(a)),
                    || format!("#{n} at ({},{})", b.base().name(a.sigma), g.arrow_name(a.arrow)),
                );
            }
            r.record("adjoint.bijective", img.len() == adj.len(), wn);
        }
        let beta = automorphism_to_bisection(at, d);
        r.record("bisection.S-section", ag.objects().all(|o| ag.s(beta.at(o)) == o), wn);
        r.record(
            "bisection.T-shadow",
            ag.objects()
                .all(|o| at.shadow_at(ag.t(beta.at(o))) == shadow_map(b, d, at.shadow_at(o))),
            wn,
        );
        let back = bisection_to_automorphism(at, &beta);
        r.record(
            "bisection.round-trip",
            back.as_ref().is_ok_and(|x| same_automorphism(b, x, d)),
            wn,
        );
        images.insert(beta);
        let inv = invert_automorphism(b, d);
        r.record(
            "group.inverse",
            same_automorphism(b, &compose_automorphisms(b, &inv, d), &AutomorphismData::identity(b)),
            wn,
        );
    }
    for (n2, d2) in group.elements.iter().enumerate() {
        for (n1, d1) in group.elements.iter().enumerate() {
            let w = || format!("#{n2} . #{n1}");
            let c = compose_automorphisms(b, d2, d1);
            let pointwise = points
                .iter()
                .all(|&p| apply_automorphism(b, &c, p) == apply_automorphism(b, d2, apply_automorphism(b, d1, p)));
            r.record("group.closed", pointwise && group.index_of(b, &c).is_some(), w);
            r.record(
                "shadow.homomorphism",
                shadows
                    .iter()
                    .all(|&x| shadow_map(b, &c, x) == shadow_map(b, d2, shadow_map(b, d1, x))),
                w,
            );
            if c.is_vertical() && d1.is_vertical() {
                r.record(
                    "adjoint.homomorphism",
                    at.adjoint_elements().into_iter().all(|a| {
                        adjoint_map(at, &c, a).ok()
                            == adjoint_map(at, d2, adjoint_map(at, d1, a).expect("vertical")).ok()
                    }),
                    w,
                );
            }
            let lhs = automorphism_to_bisection(at, &c);
            let rhs = crate::bisection::bisection_product(
                ag,
                &automorphism_to_bisection(at, d2),
                &automorphism_to_bisection(at, d1),
            );
            r.record("bisection.homomorphism", lhs == rhs, w);
        }
    }
    r.record("bisection.injective", images.len() == group.len(), || {
        format!("{} bisections for {} automorphisms", images.len(), group.len())
    });
    let target: BTreeSet<Bisection> = projectable.iter().cloned().collect();
    r.record("bisection.onto", images == target, || {
        format!("{} images, {} projectable bisections", images.len(), target.len())
    });
    for beta in projectable {
        let back = bisection_to_automorphism(at, beta).map(|d| automorphism_to_bisection(at, &d));
        r.record("bisection.back-round-trip", back.as_ref() == Ok(beta), || {
            ag.arrow_name(beta.at(0)).to_string()
        });
    }
    r
}

/// The element of At(𝒫) that β_Φ assigns to an ℱ point.
pub fn bisection_value(at: &AtiyahGroupoid, beta: &Bisection, x: ShadowPoint) -> AtiyahElement {
    at.element(beta.at(at.shadow_index(x)))
}
