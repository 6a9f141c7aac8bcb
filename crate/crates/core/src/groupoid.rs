//! Finite groupoids with array-backed structure maps.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::ValidationReport;

pub type Obj = usize;
pub type Arrow = usize;

/// Malformed tables: ids out of range, wrong lengths, products off their domain.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("arrow id {0} out of range")]
    ArrowOutOfRange(usize),
    #[error("object id {0} out of range")]
    ObjectOutOfRange(usize),
    #[error("table `{table}` has {found} entries, expected {expected}")]
    TableLength {
        table: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("product given for non-composable pair ({0}, {1})")]
    ProductOffDomain(Arrow, Arrow),
    #[error("product missing for composable pair ({0}, {1})")]
    ProductMissing(Arrow, Arrow),
    #[error("product for ({0}, {1}) given twice")]
    DuplicateProduct(Arrow, Arrow),
    #[error("arrow list entry {index} carries id {id}")]
    ArrowIdMismatch { index: usize, id: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("arrows {left} and {right} do not compose: s({left}) = {left_source} but t({right}) = {right_target}")]
pub struct NotComposable {
    pub left: Arrow,
    pub right: Arrow,
    pub left_source: Obj,
    pub right_target: Obj,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("group table: {0}")]
    Group(String),
    #[error("action table: {0}")]
    Action(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupoid {
    src: Vec<Obj>,
    tgt: Vec<Obj>,
    unit: Vec<Arrow>,
    inv: Vec<Arrow>,
    mul: HashMap<(Arrow, Arrow), Arrow>,
    from: Vec<Vec<Arrow>>,
    into: Vec<Vec<Arrow>>,
    arrow_names: Vec<String>,
    object_names: Vec<String>,
}

impl FiniteGroupoid {
    /// Builds a groupoid from raw tables. Only structural well-formedness is
    /// checked here; the axioms are left to [`validate_groupoid`].
    pub fn from_tables(
        n_objects: usize,
        src: Vec<Obj>,
        tgt: Vec<Obj>,
        unit: Vec<Arrow>,
        inv: Vec<Arrow>,
        mul: impl IntoIterator<Item = (Arrow, Arrow, Arrow)>,
    ) -> Result<Self, StructureError> {
        let n = src.len();
        if tgt.len() != n {
            return Err(StructureError::TableLength {
                table: "tgt",
                expected: n,
                found: tgt.len(),
            });
        }
        if inv.len() != n {
            return Err(StructureError::TableLength {
                table: "inv",
                expected: n,
                found: inv.len(),
            });
        }
        if unit.len() != n_objects {
            return Err(StructureError::TableLength {
                table: "units",
                expected: n_objects,
                found: unit.len(),
            });
        }
        for &o in src.iter().chain(&tgt) {
            if o >= n_objects {
                return Err(StructureError::ObjectOutOfRange(o));
            }
        }
        for &a in unit.iter().chain(&inv) {
            if a >= n {
                return Err(StructureError::ArrowOutOfRange(a));
            }
        }
        let mut table = HashMap::new();
        for (a, b, c) in mul {
            for x in [a, b, c] {
                if x >= n {
                    return Err(StructureError::ArrowOutOfRange(x));
                }
            }
            if src[a] != tgt[b] {
                return Err(StructureError::ProductOffDomain(a, b));
            }
            if table.insert((a, b), c).is_some() {
                return Err(StructureError::DuplicateProduct(a, b));
            }
        }
        let mut from = vec![Vec::new(); n_objects];
        let mut into = vec![Vec::new(); n_objects];
        for a in 0..n {
            from[src[a]].push(a);
            into[tgt[a]].push(a);
        }
        for a in 0..n {
            for &b in &into[src[a]] {
                if !table.contains_key(&(a, b)) {
                    return Err(StructureError::ProductMissing(a, b));
                }
            }
        }
        Ok(Self {
            arrow_names: (0..n).map(|a| a.to_string()).collect(),
            object_names: (0..n_objects).map(|o| o.to_string()).collect(),
            src,
            tgt,
            unit,
            inv,
            mul: table,
            from,
            into,
        })
    }

    pub fn with_names(mut self, objects: Vec<String>, arrows: Vec<String>) -> Self {
        assert_eq!(objects.len(), self.n_objects(), "object name count");
        assert_eq!(arrows.len(), self.n_arrows(), "arrow name count");
        self.object_names = objects;
        self.arrow_names = arrows;
        self
    }

    pub fn n_objects(&self) -> usize {
        self.unit.len()
    }

    pub fn n_arrows(&self) -> usize {
        self.src.len()
    }

    pub fn objects(&self) -> std::ops::Range<Obj> {
        0..self.n_objects()
    }

    pub fn arrows(&self) -> std::ops::Range<Arrow> {
        0..self.n_arrows()
    }

    pub fn s(&self, a: Arrow) -> Obj {
        self.src[a]
    }

    pub fn t(&self, a: Arrow) -> Obj {
        self.tgt[a]
    }

    pub fn unit(&self, m: Obj) -> Arrow {
        self.unit[m]
    }

    pub fn inv(&self, a: Arrow) -> Arrow {
        self.inv[a]
    }

    /// Arrows with source `m`.
    pub fn source_fibre(&self, m: Obj) -> &[Arrow] {
        &self.from[m]
    }

    /// Arrows with target `m`.
    pub fn target_fibre(&self, m: Obj) -> &[Arrow] {
        &self.into[m]
    }

    pub fn try_mul(&self, a: Arrow, b: Arrow) -> Option<Arrow> {
        self.mul.get(&(a, b)).copied()
    }

    pub fn compose(&self, a: Arrow, b: Arrow) -> Result<Arrow, NotComposable> {
        self.try_mul(a, b).ok_or(NotComposable {
            left: a,
            right: b,
            left_source: self.s(a),
            right_target: self.t(b),
        })
    }

    /// Product of a pair known to be composable.
    ///
    /// # Panics
    /// If `s(a) != t(b)`.
    pub fn mul(&self, a: Arrow, b: Arrow) -> Arrow {
        match self.try_mul(a, b) {
            Some(c) => c,
            None => panic!("{}", self.compose(a, b).unwrap_err()),
        }
    }

    pub fn is_unit(&self, a: Arrow) -> bool {
        self.unit[self.s(a)] == a
    }

    pub fn arrow_name(&self, a: Arrow) -> &str {
        &self.arrow_names[a]
    }

    pub fn object_name(&self, m: Obj) -> &str {
        &self.object_names[m]
    }

    pub fn find_arrow(&self, name: &str) -> Option<Arrow> {
        self.arrow_names.iter().position(|n| n == name)
    }

    /// Composable pairs (a, b), i.e. s(a) = t(b), in lexicographic order.
    pub fn composable_pairs(&self) -> impl Iterator<Item = (Arrow, Arrow)> + '_ {
        self.arrows()
            .flat_map(move |a| self.into[self.s(a)].iter().map(move |&b| (a, b)))
    }

    /// Copy with one entry of the inverse table replaced.
    pub fn with_inverse(mut self, a: Arrow, b: Arrow) -> Self {
        self.inv[a] = b;
        self
    }

    /// Copy with one entry of the product table replaced; the pair must stay composable.
    pub fn with_product(mut self, a: Arrow, b: Arrow, c: Arrow) -> Result<Self, StructureError> {
        if c >= self.n_arrows() {
            return Err(StructureError::ArrowOutOfRange(c));
        }
        match self.mul.get_mut(&(a, b)) {
            Some(slot) => *slot = c,
            None => return Err(StructureError::ProductOffDomain(a, b)),
        }
        Ok(self)
    }

    pub fn to_doc(&self) -> GroupoidDoc {
        let mut mul: Vec<[Arrow; 3]> = self.mul.iter().map(|(&(a, b), &c)| [a, b, c]).collect();
        mul.sort_unstable();
        GroupoidDoc {
            objects: self.n_objects(),
            arrows: self
                .arrows()
                .map(|a| ArrowDoc {
                    id: a,
                    src: self.s(a),
                    tgt: self.t(a),
                })
                .collect(),
            units: self.unit.clone(),
            inv: self.inv.clone(),
            mul,
            object_names: Some(self.object_names.clone()),
            arrow_names: Some(self.arrow_names.clone()),
        }
    }

    pub fn from_doc(doc: &GroupoidDoc) -> Result<Self, StructureError> {
        let mut src = vec![0; doc.arrows.len()];
        let mut tgt = vec![0; doc.arrows.len()];
        for (i, a) in doc.arrows.iter().enumerate() {
            if a.id != i {
                return Err(StructureError::ArrowIdMismatch { index: i, id: a.id });
            }
            src[i] = a.src;
            tgt[i] = a.tgt;
        }
        let g = Self::from_tables(
            doc.objects,
            src,
            tgt,
            doc.units.clone(),
            doc.inv.clone(),
            doc.mul.iter().map(|&[a, b, c]| (a, b, c)),
        )?;
        let objects = match &doc.object_names {
            Some(n) if n.len() == g.n_objects() => n.clone(),
            _ => g.object_names.clone(),
        };
        let arrows = match &doc.arrow_names {
            Some(n) if n.len() == g.n_arrows() => n.clone(),
            _ => g.arrow_names.clone(),
        };
        Ok(g.with_names(objects, arrows))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowDoc {
    pub id: Arrow,
    pub src: Obj,
    pub tgt: Obj,
}

/// JSON form of a groupoid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupoidDoc {
    pub objects: usize,
    pub arrows: Vec<ArrowDoc>,
    pub units: Vec<Arrow>,
    pub inv: Vec<Arrow>,
    pub mul: Vec<[Arrow; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrow_names: Option<Vec<String>>,
}

/// Above this many composable triples associativity is sampled instead of swept.
pub const EXHAUSTIVE_TRIPLE_LIMIT: usize = 4_000_000;
const SAMPLED_TRIPLES: usize = 200_000;

/// Checks the four groupoid axioms, collecting every violation.
///
/// Check names: `i` (source/target of products), `ii` (associativity),
/// `iii` (units), `iv` (inverses), plus `surjective-s` and `surjective-t`.
pub fn validate_groupoid(g: &FiniteGroupoid) -> ValidationReport {
    let mut r = ValidationReport::new();
    for name in ["i", "ii", "iii", "iv", "surjective-s", "surjective-t"] {
        r.declare(name);
    }
    let an = |a: Arrow| g.arrow_name(a).to_string();

    for (a, b) in g.composable_pairs() {
        let c = g.mul(a, b);
        r.record("i", g.s(c) == g.s(b) && g.t(c) == g.t(a), || {
            format!("({}, {})", an(a), an(b))
        });
    }

    let triples: usize = g
        .arrows()
        .map(|a| {
            g.target_fibre(g.s(a))
                .iter()
                .map(|&b| g.target_fibre(g.s(b)).len())
                .sum::<usize>()
        })
        .sum();
    let assoc = |r: &mut ValidationReport, a: Arrow, b: Arrow, c: Arrow| {
        let lhs = g.try_mul(a, b).and_then(|ab| g.try_mul(ab, c));
        let rhs = g.try_mul(b, c).and_then(|bc| g.try_mul(a, bc));
        r.record("ii", lhs.is_some() && lhs == rhs, || {
            format!("({}, {}, {})", an(a), an(b), an(c))
        });
    };
    if triples <= EXHAUSTIVE_TRIPLE_LIMIT {
        for (a, b) in g.composable_pairs() {
            for &c in g.target_fibre(g.s(b)) {
                assoc(&mut r, a, b, c);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..SAMPLED_TRIPLES {
            let a = rng.gen_range(0..g.n_arrows());
            let bs = g.target_fibre(g.s(a));
            let b = bs[rng.gen_range(0..bs.len())];
            let cs = g.target_fibre(g.s(b));
            let c = cs[rng.gen_range(0..cs.len())];
            assoc(&mut r, a, b, c);
        }
    }

    for m in g.objects() {
        let u = g.unit(m);
        r.record("iii", g.s(u) == m && g.t(u) == m, || {
            format!("unit of object {}", g.object_name(m))
        });
    }
    for a in g.arrows() {
        let left = g.try_mul(g.unit(g.t(a)), a);
        let right = g.try_mul(a, g.unit(g.s(a)));
        r.record("iii", left == Some(a) && right == Some(a), || an(a));
    }

    for a in g.arrows() {
        let i = g.inv(a);
        let ok = g.s(i) == g.t(a)
            && g.t(i) == g.s(a)
            && g.try_mul(a, i) == Some(g.unit(g.t(a)))
            && g.try_mul(i, a) == Some(g.unit(g.s(a)));
        r.record("iv", ok, || an(a));
    }

    let mut hit_s = vec![false; g.n_objects()];
    let mut hit_t = vec![false; g.n_objects()];
    for a in g.arrows() {
        hit_s[g.s(a)] = true;
        hit_t[g.t(a)] = true;
    }
    for m in g.objects() {
        r.record("surjective-s", hit_s[m], || g.object_name(m).to_string());
        r.record("surjective-t", hit_t[m], || g.object_name(m).to_string());
    }
    r
}

/// A finite group acting on a finite set. The group is a one-object groupoid.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupAction {
    group: FiniteGroupoid,
    carrier: usize,
    act: Vec<Vec<Obj>>,
}

impl FiniteGroupAction {
    /// `act[g][m]` is g.m.
    pub fn new(
        group: FiniteGroupoid,
        carrier: usize,
        act: Vec<Vec<Obj>>,
    ) -> Result<Self, ConstructionError> {
        if group.n_objects() != 1 {
            return Err(ConstructionError::Action(format!(
                "acting groupoid has {} objects",
                group.n_objects()
            )));
        }
        if act.len() != group.n_arrows() {
            return Err(ConstructionError::Action(format!(
                "{} rows for {} group elements",
                act.len(),
                group.n_arrows()
            )));
        }
        for (g, row) in act.iter().enumerate() {
            if row.len() != carrier || row.iter().any(|&m| m >= carrier) {
                return Err(ConstructionError::Action(format!("row {g} is malformed")));
            }
        }
        let e = group.unit(0);
        for m in 0..carrier {
            if act[e][m] != m {
                return Err(ConstructionError::Action(format!("identity moves {m}")));
            }
        }
        for h in group.arrows() {
            for g in group.arrows() {
                let hg = group.mul(h, g);
                for m in 0..carrier {
                    if act[h][act[g][m]] != act[hg][m] {
                        return Err(ConstructionError::Action(format!(
                            "h.(g.m) != (hg).m for h={h}, g={g}, m={m}"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            group,
            carrier,
            act,
        })
    }

    pub fn group(&self) -> &FiniteGroupoid {
        &self.group
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    pub fn act(&self, g: Arrow, m: Obj) -> Obj {
        self.act[g][m]
    }
}

/// Arrow id of (g, m) in [`action`].
pub fn action_arrow(carrier: usize, g: Arrow, m: Obj) -> Arrow {
    g * carrier + m
}

/// Arrow id of (m2, m1), the arrow m1 -> m2, in [`pair`].
pub fn pair_arrow(n: usize, target: Obj, source: Obj) -> Arrow {
    target * n + source
}

/// One-object groupoid from a Cayley table `table[a][b] = a·b`.
pub fn group(table: Vec<Vec<usize>>, names: Option<Vec<String>>) -> Result<FiniteGroupoid, ConstructionError> {
    let n = table.len();
    if n == 0 || table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
        return Err(ConstructionError::Group("table is not square over its elements".into()));
    }
    let e = (0..n)
        .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
        .ok_or_else(|| ConstructionError::Group("no identity".into()))?;
    let mut inv = vec![0; n];
    for a in 0..n {
        inv[a] = (0..n)
            .find(|&b| table[a][b] == e && table[b][a] == e)
            .ok_or_else(|| ConstructionError::Group(format!("element {a} has no inverse")))?;
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return Err(ConstructionError::Group(format!(
                        "not associative at ({a}, {b}, {c})"
                    )));
                }
            }
        }
    }
    let mul = (0..n).flat_map(|a| {
        let row = table[a].clone();
        (0..n).map(move |b| (a, b, row[b]))
    });
    let g = FiniteGroupoid::from_tables(1, vec![0; n], vec![0; n], vec![e], inv, mul)?;
    let names = names.unwrap_or_else(|| (0..n).map(|a| a.to_string()).collect());
    if names.len() != n {
        return Err(ConstructionError::Group("name count".into()));
    }
    Ok(g.with_names(vec!["*".into()], names))
}

/// The cyclic group of order n; element k is rotation by k.
pub fn cyclic(n: usize) -> FiniteGroupoid {
    let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    let names = if n == 2 {
        vec!["e".to_string(), "r".to_string()]
    } else {
        (0..n).map(|k| format!("r{k}")).collect()
    };
    group(table, Some(names)).expect("cyclic table is a group")
}

/// Pair groupoid of an n-set: arrows (m2, m1) from m1 to m2.
pub fn pair(n: usize) -> FiniteGroupoid {
    let mut src = Vec::with_capacity(n * n);
    let mut tgt = Vec::with_capacity(n * n);
    let mut inv = Vec::with_capacity(n * n);
    let mut names = Vec::with_capacity(n * n);
    for m2 in 0..n {
        for m1 in 0..n {
            src.push(m1);
            tgt.push(m2);
            inv.push(pair_arrow(n, m1, m2));
            names.push(format!("({m2},{m1})"));
        }
    }
    let unit = (0..n).map(|m| pair_arrow(n, m, m)).collect();
    let mut mul = Vec::with_capacity(n * n * n);
    for m3 in 0..n {
        for m2 in 0..n {
            for m1 in 0..n {
                mul.push((pair_arrow(n, m3, m2), pair_arrow(n, m2, m1), pair_arrow(n, m3, m1)));
            }
        }
    }
    FiniteGroupoid::from_tables(n, src, tgt, unit, inv, mul)
        .expect("pair tables are well formed")
        .with_names((0..n).map(|m| m.to_string()).collect(), names)
}

/// Σ-fibred pair groupoid: arrows (m2, m1) with `fibre[m2] == fibre[m1]`.
pub fn fibred_pair(fibre: &[usize]) -> FiniteGroupoid {
    let n = fibre.len();
    let mut ids = HashMap::new();
    let (mut src, mut tgt, mut names) = (Vec::new(), Vec::new(), Vec::new());
    for m2 in 0..n {
        for m1 in 0..n {
            if fibre[m1] == fibre[m2] {
                ids.insert((m2, m1), src.len());
                src.push(m1);
                tgt.push(m2);
                names.push(format!("({m2},{m1})"));
            }
        }
    }
    let inv = (0..src.len()).map(|a| ids[&(src[a], tgt[a])]).collect();
    let unit = (0..n).map(|m| ids[&(m, m)]).collect();
    let mut mul = Vec::new();
    for (&(m3, m2), &a) in &ids {
        for m1 in 0..n {
            if let Some(&b) = ids.get(&(m2, m1)) {
                mul.push((a, b, ids[&(m3, m1)]));
            }
        }
    }
    FiniteGroupoid::from_tables(n, src, tgt, unit, inv, mul)
        .expect("fibred pair tables are well formed")
        .with_names((0..n).map(|m| m.to_string()).collect(), names)
}

/// Action groupoid G⋉M: arrow (g, m) has source m, target g.m, and
/// (h, g.m).(g, m) = (h·g, m).
pub fn action(a: &FiniteGroupAction) -> FiniteGroupoid {
    let grp = a.group();
    let n = a.carrier();
    let k = grp.n_arrows();
    let id = |g: Arrow, m: Obj| action_arrow(n, g, m);
    let mut src = Vec::with_capacity(k * n);
    let mut tgt = Vec::with_capacity(k * n);
    let mut inv = Vec::with_capacity(k * n);
    let mut names = Vec::with_capacity(k * n);
    for g in grp.arrows() {
        for m in 0..n {
            src.push(m);
            tgt.push(a.act(g, m));
            inv.push(id(grp.inv(g), a.act(g, m)));
            names.push(format!("({},{m})", grp.arrow_name(g)));
        }
    }
    let e = grp.unit(0);
    let unit = (0..n).map(|m| id(e, m)).collect();
    let mut mul = Vec::with_capacity(k * k * n);
    for h in grp.arrows() {
        for g in grp.arrows() {
            for m in 0..n {
                mul.push((id(h, a.act(g, m)), id(g, m), id(grp.mul(h, g), m)));
            }
        }
    }
    FiniteGroupoid::from_tables(n, src, tgt, unit, inv, mul)
        .expect("action tables are well formed")
        .with_names((0..n).map(|m| m.to_string()).collect(), names)
}

/// Product groupoid: arrow (a1, a2) has id `a1 * |arrows(g2)| + a2`.
pub fn product(g1: &FiniteGroupoid, g2: &FiniteGroupoid) -> FiniteGroupoid {
    let (n2, k2) = (g2.n_objects(), g2.n_arrows());
    let obj = |o1: Obj, o2: Obj| o1 * n2 + o2;
    let arr = |a1: Arrow, a2: Arrow| a1 * k2 + a2;
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    let mut inv = Vec::new();
    let mut names = Vec::new();
    for a1 in g1.arrows() {
        for a2 in g2.arrows() {
            src.push(obj(g1.s(a1), g2.s(a2)));
            tgt.push(obj(g1.t(a1), g2.t(a2)));
            inv.push(arr(g1.inv(a1), g2.inv(a2)));
            names.push(format!("[{};{}]", g1.arrow_name(a1), g2.arrow_name(a2)));
        }
    }
    let mut unit = Vec::new();
    let mut onames = Vec::new();
    for o1 in g1.objects() {
        for o2 in g2.objects() {
            unit.push(arr(g1.unit(o1), g2.unit(o2)));
            onames.push(format!("[{};{}]", g1.object_name(o1), g2.object_name(o2)));
        }
    }
    let mut mul = Vec::new();
    for (a1, b1) in g1.composable_pairs() {
        for (a2, b2) in g2.composable_pairs() {
            mul.push((arr(a1, a2), arr(b1, b2), arr(g1.mul(a1, b1), g2.mul(a2, b2))));
        }
    }
    FiniteGroupoid::from_tables(g1.n_objects() * n2, src, tgt, unit, inv, mul)
        .expect("product tables are well formed")
        .with_names(onames, names)
}

/// The swap action of ℤ₂ on {0,1} as an action groupoid.
/// Arrows: (e,0)=0, (e,1)=1, (r,0)=2, (r,1)=3.
pub fn z2_swap() -> FiniteGroupoid {
    action(&z2_swap_action())
}

pub fn z2_swap_action() -> FiniteGroupAction {
    FiniteGroupAction::new(cyclic(2), 2, vec![vec![0, 1], vec![1, 0]]).expect("swap is an action")
}

/// Which standard constructor to run, with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StandardKind {
    Group { table: Vec<Vec<usize>> },
    Cyclic { order: usize },
    Pair { n: usize },
    Action { table: Vec<Vec<usize>>, carrier: usize, act: Vec<Vec<usize>> },
    FibredPair { fibre: Vec<usize> },
    Product { left: Box<StandardKind>, right: Box<StandardKind> },
}

pub fn construct_standard(kind: &StandardKind) -> Result<FiniteGroupoid, ConstructionError> {
    Ok(match kind {
        StandardKind::Group { table } => group(table.clone(), None)?,
        StandardKind::Cyclic { order } => {
            if *order == 0 {
                return Err(ConstructionError::Group("order 0".into()));
            }
            cyclic(*order)
        }
        StandardKind::Pair { n } => pair(*n),
        StandardKind::Action {
            table,
            carrier,
            act,
        } => action(&FiniteGroupAction::new(group(table.clone(), None)?, *carrier, act.clone())?),
        StandardKind::FibredPair { fibre } => fibred_pair(fibre),
        StandardKind::Product { left, right } => {
            product(&construct_standard(left)?, &construct_standard(right)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_of_two_is_valid() {
        let g = pair(2);
        assert_eq!(g.n_arrows(), 4);
        assert!(validate_groupoid(&g).is_ok());
    }

    #[test]
    fn corrupted_inverse_is_axiom_iv() {
        let g = pair(2);
        let a = g.find_arrow("(0,1)").unwrap();
        let bad = g.with_inverse(a, a);
        let r = validate_groupoid(&bad);
        let iv = r.check("iv").unwrap();
        assert_eq!(iv.failures, 1);
        assert_eq!(iv.witnesses, vec!["(0,1)".to_string()]);
        assert!(r.check("i").unwrap().passed());
        assert!(r.check("ii").unwrap().passed());
        assert!(r.check("iii").unwrap().passed());
    }

    #[test]
    fn z2_swap_is_valid_with_eight_pairs() {
        let g = z2_swap();
        let r = validate_groupoid(&g);
        assert!(r.is_ok(), "{r:?}");
        assert_eq!(r.check("i").unwrap().cases, 8);
        assert_eq!(g.n_arrows(), 4);
    }

    #[test]
    fn compose_examples() {
        let p = pair(3);
        let a = p.find_arrow("(2,1)").unwrap();
        let b = p.find_arrow("(1,0)").unwrap();
        assert_eq!(p.arrow_name(p.compose(a, b).unwrap()), "(2,0)");

        let z = z2_swap();
        let r1 = z.find_arrow("(r,1)").unwrap();
        let r0 = z.find_arrow("(r,0)").unwrap();
        assert_eq!(z.arrow_name(z.compose(r1, r0).unwrap()), "(e,0)");

        let p2 = pair(2);
        let x = p2.find_arrow("(0,1)").unwrap();
        let err = p2.compose(x, x).unwrap_err();
        assert_eq!((err.left_source, err.right_target), (1, 0));
    }

    #[test]
    fn inverse_examples() {
        let p = pair(3);
        let a = p.find_arrow("(2,0)").unwrap();
        assert_eq!(p.arrow_name(p.inv(a)), "(0,2)");
        let z = z2_swap();
        assert_eq!(z.arrow_name(z.inv(z.find_arrow("(r,0)").unwrap())), "(r,1)");
        for m in z.objects() {
            assert_eq!(z.inv(z.unit(m)), z.unit(m));
        }
    }

    #[test]
    fn product_of_pair_and_swap() {
        let g = product(&pair(2), &z2_swap());
        assert_eq!(g.n_arrows(), 16);
        assert!(validate_groupoid(&g).is_ok());
    }

    #[test]
    fn fibred_pair_counts() {
        let g = fibred_pair(&[0, 0, 1, 1, 1]);
        assert_eq!(g.n_arrows(), 4 + 9);
        assert!(validate_groupoid(&g).is_ok());
    }

    #[test]
    fn action_rejects_non_action() {
        let bad = FiniteGroupAction::new(cyclic(2), 2, vec![vec![0, 1], vec![1, 1]]);
        assert!(matches!(bad, Err(ConstructionError::Action(_))));
    }

    #[test]
    fn structural_errors() {
        let e = FiniteGroupoid::from_tables(1, vec![0], vec![0], vec![0], vec![5], [(0, 0, 0)]);
        assert_eq!(e.unwrap_err(), StructureError::ArrowOutOfRange(5));
        let e = FiniteGroupoid::from_tables(1, vec![0], vec![0], vec![0], vec![0], []);
        assert_eq!(e.unwrap_err(), StructureError::ProductMissing(0, 0));
    }

    #[test]
    fn doc_round_trip() {
        let g = z2_swap();
        let doc = g.to_doc();
        let text = serde_json::to_string(&doc).unwrap();
        let back = FiniteGroupoid::from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn standard_kinds() {
        let k: StandardKind = serde_json::from_str(r#"{"kind":"pair","n":3}"#).unwrap();
        assert_eq!(construct_standard(&k).unwrap().n_arrows(), 9);
        let k = StandardKind::Product {
            left: Box::new(StandardKind::Pair { n: 2 }),
            right: Box::new(StandardKind::Action {
                table: vec![vec![0, 1], vec![1, 0]],
                carrier: 2,
                act: vec![vec![0, 1], vec![1, 0]],
            }),
        };
        assert_eq!(construct_standard(&k).unwrap().n_arrows(), 16);
    }
}
