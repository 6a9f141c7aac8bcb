//! Global bisections of a finite groupoid, their group, and their actions on arrows.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groupoid::{Arrow, FiniteGroupoid, Obj};
use crate::report::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("search space of {needed} exceeds the cap of {cap}")]
pub struct CapExceeded {
    pub needed: u128,
    pub cap: u128,
}

/// A section of the source map, stored as its value at each object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bisection(Vec<Arrow>);

impl Bisection {
    pub fn new(assign: Vec<Arrow>) -> Self {
        Self(assign)
    }

    pub fn identity(g: &FiniteGroupoid) -> Self {
        Self(g.objects().map(|m| g.unit(m)).collect())
    }

    pub fn at(&self, m: Obj) -> Arrow {
        self.0[m]
    }

    pub fn assign(&self) -> &[Arrow] {
        &self.0
    }

    pub fn describe(&self, g: &FiniteGroupoid) -> String {
        let parts: Vec<&str> = self.0.iter().map(|&a| g.arrow_name(a)).collect();
        format!("[{}]", parts.join(" "))
    }
}

/// True iff `b` is total, a section of s, and has a bijective shadow.
pub fn validate_bisection(g: &FiniteGroupoid, b: &Bisection) -> bool {
    if b.0.len() != g.n_objects() || b.0.iter().any(|&a| a >= g.n_arrows()) {
        return false;
    }
    let mut hit = vec![false; g.n_objects()];
    for (m, &a) in b.0.iter().enumerate() {
        if g.s(a) != m || std::mem::replace(&mut hit[g.t(a)], true) {
            return false;
        }
    }
    true
}

/// The object bijection m ↦ t(β(m)).
pub fn shadow(g: &FiniteGroupoid, b: &Bisection) -> Vec<Obj> {
    b.0.iter().map(|&a| g.t(a)).collect()
}

pub fn shadow_inverse(g: &FiniteGroupoid, b: &Bisection) -> Vec<Obj> {
    let mut out = vec![0; b.0.len()];
    for (m, &a) in b.0.iter().enumerate() {
        out[g.t(a)] = m;
    }
    out
}

/// (β₂·β₁)(m) = β₂(t(β₁(m))).β₁(m)
pub fn bisection_product(g: &FiniteGroupoid, b2: &Bisection, b1: &Bisection) -> Bisection {
    Bisection(
        b1.0.iter()
            .map(|&a| g.mul(b2.at(g.t(a)), a))
            .collect(),
    )
}

/// β⁻¹ = Inv ∘ β ∘ (t_*β)⁻¹
pub fn bisection_inverse(g: &FiniteGroupoid, b: &Bisection) -> Bisection {
    let back = shadow_inverse(g, b);
    Bisection(back.iter().map(|&m| g.inv(b.at(m))).collect())
}

/// L_β(a) = β(t(a)).a
pub fn left_mult(g: &FiniteGroupoid, b: &Bisection, a: Arrow) -> Arrow {
    g.mul(b.at(g.t(a)), a)
}

/// R_β(a) = a.β((t_*β)⁻¹(s(a)))
pub fn right_mult(g: &FiniteGroupoid, a: Arrow, b: &Bisection) -> Arrow {
    let m = b.0.iter().position(|&x| g.t(x) == g.s(a)).expect("bijective shadow");
    g.mul(a, b.at(m))
}

/// C_β(a) = β(t(a)).a.β(s(a))⁻¹
pub fn conjugate(g: &FiniteGroupoid, b: &Bisection, a: Arrow) -> Arrow {
    g.mul(g.mul(b.at(g.t(a)), a), g.inv(b.at(g.s(a))))
}

/// The enumerated bisection group with a lazily built product table.
#[derive(Debug)]
pub struct BisectionGroup {
    elements: Vec<Bisection>,
    index: HashMap<Bisection, usize>,
    identity: usize,
    table: OnceLock<Vec<Vec<usize>>>,
    inverses: OnceLock<Vec<usize>>,
}

impl BisectionGroup {
    fn from_elements(g: &FiniteGroupoid, elements: Vec<Bisection>) -> Self {
        let index = elements.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect::<HashMap<_, _>>();
        let identity = index[&Bisection::identity(g)];
        Self {
            elements,
            index,
            identity,
            table: OnceLock::new(),
            inverses: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Bisection] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> &Bisection {
        &self.elements[i]
    }

    pub fn index_of(&self, b: &Bisection) -> Option<usize> {
        self.index.get(b).copied()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    /// Index of elements[i]·elements[j].
    pub fn product(&self, g: &FiniteGroupoid, i: usize, j: usize) -> usize {
        self.table.get_or_init(|| {
            (0..self.len())
                .map(|i| {
                    (0..self.len())
                        .map(|j| {
                            self.index[&bisection_product(g, &self.elements[i], &self.elements[j])]
                        })
                        .collect()
                })
                .collect()
        })[i][j]
    }

    pub fn inverse(&self, g: &FiniteGroupoid, i: usize) -> usize {
        self.inverses.get_or_init(|| {
            self.elements
                .iter()
                .map(|b| self.index[&bisection_inverse(g, b)])
                .collect()
        })[i]
    }
}

/// Number of sections of s, the size of the raw search space.
pub fn section_count(g: &FiniteGroupoid) -> u128 {
    g.objects()
        .map(|m| g.source_fibre(m).len() as u128)
        .fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// All bisections in lexicographic order of their arrow assignments.
pub fn enumerate_bisections(g: &FiniteGroupoid, cap: u128) -> Result<BisectionGroup, CapExceeded> {
    let needed = section_count(g);
    if needed > cap {
        return Err(CapExceeded { needed, cap });
    }
    let n = g.n_objects();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn go(
        g: &FiniteGroupoid,
        current: &mut Vec<Arrow>,
        used: &mut [bool],
        out: &mut Vec<Bisection>,
    ) {
        let m = current.len();
        if m == g.n_objects() {
            out.push(Bisection(current.clone()));
            return;
        }
        let mut choices = g.source_fibre(m).to_vec();
        choices.sort_unstable();
        for a in choices {
            let t = g.t(a);
            if !used[t] {
                used[t] = true;
                current.push(a);
                go(g, current, used, out);
                current.pop();
                used[t] = false;
            }
        }
    }
    go(g, &mut current, &mut used, &mut out);
    Ok(BisectionGroup::from_elements(g, out))
}

/// A bisection through `a`, i.e. with β(s(a)) = a, drawn from `restrict` when given.
///
/// Unrestricted, the remaining values come from an augmenting-path matching
/// of objects to targets.
pub fn bisection_through(
    g: &FiniteGroupoid,
    a: Arrow,
    restrict: Option<&[Bisection]>,
) -> Option<Bisection> {
    let m0 = g.s(a);
    if let Some(class) = restrict {
        return class.iter().find(|b| b.at(m0) == a).cloned();
    }
    let n = g.n_objects();
    // edges[m] = (target, arrow) candidates for object m
    let edges: Vec<Vec<(Obj, Arrow)>> = g
        .objects()
        .map(|m| {
            if m == m0 {
                vec![(g.t(a), a)]
            } else {
                let mut v: Vec<(Obj, Arrow)> = g.source_fibre(m).iter().map(|&x| (g.t(x), x)).collect();
                v.sort_unstable();
                v.dedup_by_key(|e| e.0);
                v
            }
        })
        .collect();
    let mut owner: Vec<Option<Obj>> = vec![None; n];
    let mut pick: Vec<Option<Arrow>> = vec![None; n];
    fn augment(
        m: Obj,
        edges: &[Vec<(Obj, Arrow)>],
        seen: &mut [bool],
        owner: &mut [Option<Obj>],
        pick: &mut [Option<Arrow>],
    ) -> bool {
        for &(t, x) in &edges[m] {
            if seen[t] {
                continue;
            }
            seen[t] = true;
            let free = match owner[t] {
                None => true,
                Some(other) => augment(other, edges, seen, owner, pick),
            };
            if free {
                owner[t] = Some(m);
                pick[m] = Some(x);
                return true;
            }
        }
        false
    }
    let mut order: Vec<Obj> = vec![m0];
    order.extend(g.objects().filter(|&m| m != m0));
    for m in order {
        let mut seen = vec![false; n];
        if !augment(m, &edges, &mut seen, &mut owner, &mut pick) {
            return None;
        }
    }
    let b = Bisection(pick.into_iter().map(|x| x.expect("perfect matching")).collect());
    debug_assert!(validate_bisection(g, &b) && b.at(m0) == a);
    Some(b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdReducibility {
    /// `witness[a]` passes through arrow a.
    Reducible { witness: Vec<Bisection> },
    NotReducible { counterexample: Arrow },
}

impl IdReducibility {
    pub fn holds(&self) -> bool {
        matches!(self, IdReducibility::Reducible { .. })
    }
}

pub fn is_id_reducible(g: &FiniteGroupoid, restrict: Option<&[Bisection]>) -> IdReducibility {
    let mut witness = Vec::with_capacity(g.n_arrows());
    for a in g.arrows() {
        match bisection_through(g, a, restrict) {
            Some(b) => witness.push(b),
            None => return IdReducibility::NotReducible { counterexample: a },
        }
    }
    IdReducibility::Reducible { witness }
}

/// Sweeps every structure-map identity for left/right multiplication and
/// conjugation over all bisections and all admissible arrows.
///
/// Check names are `E1.<item>.left`, `E1.<item>.right` for items i..vi,
/// `E2.<item>` for items i..v, and `E3.i`, `E3.ii`.
pub fn check_structure_identities(g: &FiniteGroupoid, cap: u128) -> Result<ValidationReport, CapExceeded> {
    let group = enumerate_bisections(g, cap)?;
    Ok(structure_identities(g, group.elements()))
}

pub fn structure_identities(g: &FiniteGroupoid, bisections: &[Bisection]) -> ValidationReport {
    let mut r = ValidationReport::new();
    for item in ["i", "ii", "iii", "iv", "v", "vi"] {
        r.declare(&format!("E1.{item}.left"));
        r.declare(&format!("E1.{item}.right"));
    }
    for item in ["i", "ii", "iii", "iv", "v"] {
        r.declare(&format!("E2.{item}"));
    }
    r.declare("E3.i");
    r.declare("E3.ii");

    // Products go through try_mul so that a corrupted table is reported, not a panic.
    type P = Option<Arrow>;
    let mul = |a: P, b: P| a.zip(b).and_then(|(a, b)| g.try_mul(a, b));
    let inv = |a: P| a.map(|a| g.inv(a));
    let s = |a: P| a.map(|a| g.s(a));
    let t = |a: P| a.map(|a| g.t(a));
    let same = |a: P, b: P| a.is_some() && a == b;
    let an = |a: Arrow| g.arrow_name(a).to_string();

    for b in bisections {
        let bd = b.describe(g);
        let sh = shadow(g, b);
        let sh_inv = shadow_inverse(g, b);
        let binv = bisection_inverse(g, b);
        let l_with = |b: &Bisection, x: P| mul(x.map(|x| b.at(g.t(x))), x);
        let r_with = |x: P, b: &Bisection| {
            let back = shadow_inverse(g, b);
            mul(x, x.map(|x| b.at(back[g.s(x)])))
        };
        let l = |x: P| l_with(b, x);
        let r_ = |x: P| r_with(x, b);
        let c = |x: P| mul(l(x), inv(x.map(|x| b.at(g.s(x)))));
        let w1 = |x: Arrow| format!("beta={bd}, h={}", an(x));

        for h in g.arrows() {
            let hh = Some(h);
            r.record("E1.i.left", same(s(l(hh)), s(hh)), || w1(h));
            r.record("E1.i.right", same(s(r_(hh)), Some(sh_inv[g.s(h)])), || w1(h));
            r.record("E1.ii.left", same(t(l(hh)), Some(sh[g.t(h)])), || w1(h));
            r.record("E1.ii.right", same(t(r_(hh)), t(hh)), || w1(h));
            r.record("E1.iv.left", same(inv(l(hh)), r_with(inv(hh), &binv)), || w1(h));
            r.record("E1.iv.right", same(inv(r_(hh)), l_with(&binv, inv(hh))), || w1(h));

            r.record("E2.i", same(s(c(hh)), Some(sh[g.s(h)])), || w1(h));
            r.record("E2.ii", same(t(c(hh)), Some(sh[g.t(h)])), || w1(h));
            r.record("E2.iv", same(c(inv(hh)), inv(c(hh))), || w1(h));

            // u ∈ s⁻¹(t h)
            for &u in g.source_fibre(g.t(h)) {
                let ok = same(l(mul(Some(u), hh)), mul(l(Some(u)), hh));
                r.record("E1.v.left", ok, || format!("beta={bd}, u={}, g={}", an(u), an(h)));
            }
            // v ∈ t⁻¹(s h)
            for &v in g.target_fibre(g.s(h)) {
                let ok = same(r_(mul(hh, Some(v))), mul(hh, r_(Some(v))));
                r.record("E1.v.right", ok, || format!("beta={bd}, g={}, v={}", an(h), an(v)));
            }
            // w ∈ s⁻¹(t_*β(t h))
            for &w in g.source_fibre(sh[g.t(h)]) {
                let ok = same(mul(r_(Some(w)), hh), mul(Some(w), l(hh)));
                r.record("E1.vi.left", ok, || format!("beta={bd}, w={}, g={}", an(w), an(h)));
            }
            // y ∈ t⁻¹((t_*β)⁻¹(s h))
            for &y in g.target_fibre(sh_inv[g.s(h)]) {
                let ok = same(mul(hh, l(Some(y))), mul(r_(hh), Some(y)));
                r.record("E1.vi.right", ok, || format!("beta={bd}, g={}, y={}", an(h), an(y)));
            }
            for &k in g.target_fibre(g.s(h)) {
                let ok = same(c(mul(hh, Some(k))), mul(c(hh), c(Some(k))));
                r.record("E2.v", ok, || format!("beta={bd}, g={}, h={}", an(h), an(k)));
            }
        }
        for m in g.objects() {
            let u = Some(g.unit(m));
            let wm = || format!("beta={bd}, m={}", g.object_name(m));
            r.record("E1.iii.left", same(l(u), Some(b.at(m))), wm);
            r.record("E1.iii.right", same(r_(u), Some(b.at(sh_inv[m]))), wm);
            r.record("E2.iii", same(c(u), Some(g.unit(sh[m]))), wm);
        }
        // Prop E.3 at every arrow this bisection passes through
        for m in g.objects() {
            let a = b.at(m);
            r.record("E3.i", b.at(sh_inv[g.t(a)]) == a, || format!("beta={bd}, g={}", an(a)));
            for &h in g.source_fibre(g.t(a)) {
                let ok = same(mul(Some(h), Some(a)), r_(Some(h)));
                r.record("E3.ii", ok, || format!("beta={bd}, g={}, h={}", an(a), an(h)));
            }
        }
    }
    r
}

/// Group axioms of 𝔹, the shadow homomorphism, and the action laws of L, R and C.
pub fn check_action_laws(g: &FiniteGroupoid, group: &BisectionGroup) -> ValidationReport {
    let mut r = ValidationReport::new();
    let n = group.len();
    let e = group.identity();
    let d = |i: usize| group.get(i).describe(g);
    for i in 0..n {
        r.record("group.unit", group.product(g, i, e) == i && group.product(g, e, i) == i, || d(i));
        let j = group.inverse(g, i);
        r.record("group.inverse", group.product(g, i, j) == e && group.product(g, j, i) == e, || d(i));
        for j in 0..n {
            for k in 0..n {
                let lhs = group.product(g, group.product(g, i, j), k);
                let rhs = group.product(g, i, group.product(g, j, k));
                r.record("group.assoc", lhs == rhs, || format!("{} {} {}", d(i), d(j), d(k)));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let (b2, b1) = (group.get(i), group.get(j));
            let p = group.get(group.product(g, i, j));
            let s2 = shadow(g, b2);
            let s1 = shadow(g, b1);
            let sp = shadow(g, p);
            let ok = g.objects().all(|m| sp[m] == s2[s1[m]]);
            r.record("shadow.hom", ok, || format!("{} {}", d(i), d(j)));
            for a in g.arrows() {
                let w = || format!("{} {} {}", d(i), d(j), g.arrow_name(a));
                r.record("L.action", left_mult(g, p, a) == left_mult(g, b2, left_mult(g, b1, a)), w);
                r.record("R.action", right_mult(g, a, p) == right_mult(g, right_mult(g, a, b2), b1), w);
                r.record("C.action", conjugate(g, p, a) == conjugate(g, b2, conjugate(g, b1, a)), w);
                r.record(
                    "LR.commute",
                    left_mult(g, b2, right_mult(g, a, b1)) == right_mult(g, left_mult(g, b2, a), b1),
                    w,
                );
            }
        }
    }
    r
}

/// Bijections of arrows commuting with a family of partial maps, by
/// backtracking with forced propagation along each map.
fn equivariant_bijections(
    n: usize,
    maps: &[Vec<Option<Arrow>>],
    candidates: &dyn Fn(Arrow) -> Vec<Arrow>,
    cap: u128,
) -> Result<Vec<Vec<Arrow>>, CapExceeded> {
    struct State<'a> {
        maps: &'a [Vec<Option<Arrow>>],
        phi: Vec<Option<Arrow>>,
        used: Vec<bool>,
        trail: Vec<Arrow>,
        nodes: u128,
    }
    impl State<'_> {
        fn assign(&mut self, x: Arrow, c: Arrow) -> bool {
            let mut queue = vec![(x, c)];
            while let Some((x, c)) = queue.pop() {
                match self.phi[x] {
                    Some(d) if d == c => continue,
                    Some(_) => return false,
                    None => {}
                }
                if self.used[c] {
                    return false;
                }
                self.phi[x] = Some(c);
                self.used[c] = true;
                self.trail.push(x);
                for f in self.maps {
                    if let Some(fx) = f[x] {
                        match f[c] {
                            Some(fc) => queue.push((fx, fc)),
                            None => return false,
                        }
                    }
                }
            }
            true
        }

        fn undo(&mut self, mark: usize) {
            while self.trail.len() > mark {
                let x = self.trail.pop().expect("trail");
                let c = self.phi[x].take().expect("assigned");
                self.used[c] = false;
            }
        }
    }
    fn go(
        st: &mut State,
        candidates: &dyn Fn(Arrow) -> Vec<Arrow>,
        out: &mut Vec<Vec<Arrow>>,
        cap: u128,
    ) -> Result<(), CapExceeded> {
        let Some(x) = st.phi.iter().position(Option::is_none) else {
            out.push(st.phi.iter().map(|c| c.expect("total")).collect());
            return Ok(());
        };
        for c in candidates(x) {
            st.nodes += 1;
            if st.nodes > cap {
                return Err(CapExceeded {
                    needed: st.nodes,
                    cap,
                });
            }
            let mark = st.trail.len();
            if st.assign(x, c) {
                go(st, candidates, out, cap)?;
            }
            st.undo(mark);
        }
        Ok(())
    }
    let mut st = State {
        maps,
        phi: vec![None; n],
        used: vec![false; n],
        trail: Vec::new(),
        nodes: 0,
    };
    let mut out = Vec::new();
    go(&mut st, candidates, &mut out, cap)?;
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutantReport {
    /// All arrow bijections Φ with Φ(g.h) = Φ(g).h.
    pub r_equivariant: Vec<Vec<Arrow>>,
    /// {L_β : β ∈ 𝔹} as arrow bijections.
    pub left_translations: Vec<Vec<Arrow>>,
    pub r_equivariant_is_l: bool,
    /// All arrow bijections commuting with every R_β. Reported, not asserted.
    pub r_bisection_commutant: Vec<Vec<Arrow>>,
    pub r_bisection_commutant_is_l: bool,
}

pub fn r_equivariant_commutant(g: &FiniteGroupoid, cap: u128) -> Result<CommutantReport, CapExceeded> {
    let group = enumerate_bisections(g, cap)?;
    let n = g.n_arrows();
    let mut left: Vec<Vec<Arrow>> = group
        .elements()
        .iter()
        .map(|b| g.arrows().map(|a| left_mult(g, b, a)).collect())
        .collect();
    left.sort();
    left.dedup();

    let right_by_arrow: Vec<Vec<Option<Arrow>>> = g
        .arrows()
        .map(|h| g.arrows().map(|x| g.try_mul(x, h)).collect())
        .collect();
    let same_source = |x: Arrow| -> Vec<Arrow> {
        let mut v = g.source_fibre(g.s(x)).to_vec();
        v.sort_unstable();
        v
    };
    let r_equivariant = equivariant_bijections(n, &right_by_arrow, &same_source, cap)?;

    let right_by_bisection: Vec<Vec<Option<Arrow>>> = group
        .elements()
        .iter()
        .map(|b| g.arrows().map(|x| Some(right_mult(g, x, b))).collect())
        .collect();
    let any = |_: Arrow| -> Vec<Arrow> { (0..n).collect() };
    let r_bisection_commutant = equivariant_bijections(n, &right_by_bisection, &any, cap)?;

    Ok(CommutantReport {
        r_equivariant_is_l: r_equivariant == left,
        r_bisection_commutant_is_l: r_bisection_commutant == left,
        r_equivariant,
        left_translations: left,
        r_bisection_commutant,
    })
}
