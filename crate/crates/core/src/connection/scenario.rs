//! Bundles over boxes in ℝᵈ with structure groupoid G⋉ℝⁿ, clutched by
//! bisection families on chart overlaps.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::family::{Family, Phase};
use super::lie::{inverse, rotation_generator, so3_generator, Mat, MatrixGroup, Vector};
use super::NumericError;
use crate::report::ValidationReport;

/// Open box ∏ (lo_k, hi_k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Chart {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, sigma: &[f64]) -> bool {
        sigma
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| lo < x && x < hi)
    }

    pub fn intersect(&self, other: &Chart) -> Option<Chart> {
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        lo.iter().zip(&hi).all(|(a, b)| a < b).then_some(Chart { lo, hi })
    }

    /// Uniform sample from the box shrunk by `margin` of its width on each side.
    pub fn sample(&self, rng: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(lo, hi)| {
                let w = hi - lo;
                rng.gen_range(lo + margin * w..hi - margin * w)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub group: MatrixGroup,
    pub base_dim: usize,
    pub charts: Vec<Chart>,
    cocycle: BTreeMap<(usize, usize), Family>,
    /// Global families δ_i with β_ij = δ_i·δ_j⁻¹, when the cocycle was built that way.
    pub trivializers: Option<Vec<Family>>,
    pub fd_step: f64,
    pub ode_step: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDoc {
    pub i: usize,
    pub j: usize,
    pub family: Family,
}

fn default_fd() -> f64 {
    1e-5
}

fn default_ode() -> f64 {
    1e-3
}

fn default_tol() -> f64 {
    1e-7
}

/// JSON form of a scenario. Transitions β_ij may be listed for one orientation
/// only, or replaced by `trivializers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub name: String,
    pub group: MatrixGroup,
    pub base_dim: usize,
    pub charts: Vec<Chart>,
    #[serde(default)]
    pub cocycle: Vec<TransitionDoc>,
    #[serde(default)]
    pub trivializers: Option<Vec<Family>>,
    #[serde(default = "default_fd")]
    pub fd_step: f64,
    #[serde(default = "default_ode")]
    pub ode_step: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Scenario {
    pub fn from_doc(doc: &ScenarioDoc) -> Result<Self, NumericError> {
        let n = doc.group.n();
        for c in &doc.charts {
            if c.lo.len() != doc.base_dim || c.hi.len() != doc.base_dim {
                return Err(NumericError::Input("chart dimension differs from base_dim".into()));
            }
        }
        if doc.charts.is_empty() {
            return Err(NumericError::Input("no charts".into()));
        }
        let mut cocycle = BTreeMap::new();
        if let Some(deltas) = &doc.trivializers {
            if deltas.len() != doc.charts.len() {
                return Err(NumericError::Input("one trivializer per chart expected".into()));
            }
            for i in 0..deltas.len() {
                for j in 0..deltas.len() {
                    if i != j {
                        cocycle.insert((i, j), Family::product(deltas[i].clone(), deltas[j].inverse()));
                    }
                }
            }
        }
        for t in &doc.cocycle {
            if t.i >= doc.charts.len() || t.j >= doc.charts.len() || t.i == t.j {
                return Err(NumericError::Input(format!("bad transition index ({}, {})", t.i, t.j)));
            }
            cocycle.insert((t.i, t.j), t.family.clone());
        }
        let given: Vec<_> = cocycle.iter().map(|(&k, f)| (k, f.clone())).collect();
        for ((i, j), f) in given {
            cocycle.entry((j, i)).or_insert_with(|| f.inverse());
        }
        for i in 0..doc.charts.len() {
            for j in 0..doc.charts.len() {
                if i != j && doc.charts[i].intersect(&doc.charts[j]).is_some() && !cocycle.contains_key(&(i, j)) {
                    return Err(NumericError::Input(format!("no transition on overlap ({i}, {j})")));
                }
            }
            cocycle.insert((i, i), Family::Identity { n });
        }
        Ok(Self {
            name: doc.name.clone(),
            group: doc.group,
            base_dim: doc.base_dim,
            charts: doc.charts.clone(),
            cocycle,
            trivializers: doc.trivializers.clone(),
            fd_step: doc.fd_step,
            ode_step: doc.ode_step,
            tol: doc.tol,
        })
    }

    pub fn to_doc(&self) -> ScenarioDoc {
        ScenarioDoc {
            name: self.name.clone(),
            group: self.group,
            base_dim: self.base_dim,
            charts: self.charts.clone(),
            cocycle: if self.trivializers.is_some() {
                vec![]
            } else {
                self.cocycle
                    .iter()
                    .filter(|((i, j), _)| i < j)
                    .map(|(&(i, j), f)| TransitionDoc { i, j, family: f.clone() })
                    .collect()
            },
            trivializers: self.trivializers.clone(),
            fd_step: self.fd_step,
            ode_step: self.ode_step,
            tol: self.tol,
        }
    }

    pub fn n(&self) -> usize {
        self.group.n()
    }

    pub fn n_charts(&self) -> usize {
        self.charts.len()
    }

    /// β_ij as a family; defined on O_i ∩ O_j.
    pub fn transition(&self, i: usize, j: usize) -> &Family {
        &self.cocycle[&(i, j)]
    }

    pub fn has_transition(&self, i: usize, j: usize) -> bool {
        self.cocycle.contains_key(&(i, j))
    }

    pub fn charts_at(&self, sigma: &[f64]) -> Vec<usize> {
        (0..self.charts.len()).filter(|&i| self.charts[i].contains(sigma)).collect()
    }

    pub fn overlap(&self, charts: &[usize]) -> Option<Chart> {
        let mut it = charts.iter();
        let first = self.charts[*it.next()?].clone();
        it.try_fold(first, |acc, &k| acc.intersect(&self.charts[k]))
    }

    pub fn random_point(&self, rng: &mut ChaCha8Rng, radius: f64) -> Vector {
        Vector::from_iterator(self.n(), (0..self.n()).map(|_| rng.gen_range(-radius..radius)))
    }

    pub fn random_algebra(&self, rng: &mut ChaCha8Rng, radius: f64) -> Mat {
        let c: Vec<f64> = (0..self.group.dim()).map(|_| rng.gen_range(-radius..radius)).collect();
        self.group.hat(&c)
    }

    pub fn random_group(&self, rng: &mut ChaCha8Rng) -> Mat {
        super::lie::expm(&self.random_algebra(rng, std::f64::consts::PI))
    }

    pub fn random_direction(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.base_dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
}

/// x with g(σ, x)·x = y. Products are inverted factor by factor, families
/// constant in m in closed form, the rest by damped Newton iteration to a
/// residual of `tol`·max(1, ‖y‖).
pub fn shadow_inverse(family: &Family, sigma: &[f64], y: &Vector, tol: f64) -> Result<Vector, NumericError> {
    match family {
        Family::Product { outer, inner } => {
            let mid = shadow_inverse(outer, sigma, y, tol)?;
            shadow_inverse(inner, sigma, &mid, tol)
        }
        f if f.is_constant_in_m() => Ok(inverse(&f.group(sigma, y)) * y),
        f => newton_shadow_inverse(f, sigma, y, tol),
    }
}

fn newton_shadow_inverse(family: &Family, sigma: &[f64], y: &Vector, tol: f64) -> Result<Vector, NumericError> {
    let n = y.len();
    let residual = |x: &Vector| &family.group(sigma, x) * x - y;
    let mut x = inverse(&family.group(sigma, y)) * y;
    let mut f = residual(&x);
    let scale = y.norm().max(1.0);
    for _ in 0..100 {
        if f.norm() <= tol * scale {
            return Ok(x);
        }
        let g = family.group(sigma, &x);
        let mut jac = Mat::zeros(n, n);
        for k in 0..n {
            let e = Vector::from_fn(n, |r, _| if r == k { 1.0 } else { 0.0 });
            let col = family.d_m(sigma, &x, &e) * &x + &g * &e;
            jac.set_column(k, &col);
        }
        let step = jac
            .lu()
            .solve(&f)
            .ok_or_else(|| NumericError::NoConvergence("singular shadow Jacobian".into()))?;
        let mut t = 1.0;
        loop {
            let trial = &x - &step * t;
            let ft = residual(&trial);
            if ft.norm() < f.norm() || t < 1e-6 {
                x = trial;
                f = ft;
                break;
            }
            t /= 2.0;
        }
        if !x.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    Err(NumericError::NoConvergence(format!("shadow inverse at σ = {sigma:?}")))
}

/// Cocycle and group-valuedness checks at sampled overlap points.
pub fn verify_scenario(s: &Scenario, samples: usize, rng: &mut ChaCha8Rng) -> ValidationReport {
    let mut r = ValidationReport::new();
    for name in ["cocycle.inverse", "cocycle.triple", "transition.in-group", "shadow.invertible"] {
        r.declare(name);
    }
    let tol = 1e-12;
    let k = s.n_charts();
    let eye = s.group.identity();
    for i in 0..k {
        for j in (0..k).filter(|&j| j != i) {
            let Some(ov) = s.overlap(&[i, j]) else { continue };
            for _ in 0..samples {
                let sigma = ov.sample(rng, 0.0);
                let m = s.random_point(rng, 2.0);
                let w = || format!("({i},{j}) at sigma={sigma:?}");
                let b = s.transition(i, j);
                let g = b.group(&sigma, &m);
                let orth = (g.transpose() * &g - &eye).norm();
                r.record("transition.in-group", orth < tol && (g.determinant() - 1.0).abs() < tol, w);
                let back = Family::product(b.clone(), s.transition(j, i).clone()).group(&sigma, &m);
                r.record("cocycle.inverse", (back - &eye).norm() < tol, w);
                let y = b.shadow(&sigma, &m);
                let x = shadow_inverse(b, &sigma, &y, 1e-13);
                r.record("shadow.invertible", x.is_ok_and(|x| (x - &m).norm() < 1e-10 * m.norm().max(1.0)), w);
                for l in (0..k).filter(|&l| l != i && l != j) {
                    if !s.charts[l].contains(&sigma) {
                        continue;
                    }
                    let lhs = Family::product(b.clone(), s.transition(j, l).clone()).group(&sigma, &m);
                    let rhs = s.transition(i, l).group(&sigma, &m);
                    r.record("cocycle.triple", (lhs - rhs).norm() < tol, || format!("({i},{j},{l}) at {sigma:?}"));
                }
            }
        }
    }
    r
}

fn doc(name: &str, group: MatrixGroup, charts: Vec<Chart>, trivializers: Option<Vec<Family>>) -> Scenario {
    Scenario::from_doc(&ScenarioDoc {
        name: name.into(),
        group,
        base_dim: 2,
        charts,
        cocycle: vec![],
        trivializers,
        fd_step: default_fd(),
        ode_step: default_ode(),
        tol: default_tol(),
    })
    .expect("shipped scenario")
}

/// SO(2)⋉ℝ² over one chart (−10, 10)².
pub fn so2_single() -> Scenario {
    doc("so2-single", MatrixGroup::So2, vec![Chart::new(vec![-10.0, -10.0], vec![10.0, 10.0])], None)
}

/// SO(2)⋉ℝ² over (−2,1)×(−2,2) and (0,3)×(−2,2), with β₀₁(σ) = Rot(θ(σ)),
/// θ(σ) = 0.8σ₁ + 0.3 sin σ₂, constant in m.
pub fn so2_two_chart() -> Scenario {
    doc(
        "so2-two-chart",
        MatrixGroup::So2,
        vec![
            Chart::new(vec![-2.0, -2.0], vec![1.0, 2.0]),
            Chart::new(vec![0.0, -2.0], vec![3.0, 2.0]),
        ],
        Some(vec![so2_angle_family(), Family::Identity { n: 2 }]),
    )
}

/// θ of [`so2_two_chart`] as a rotation family.
pub fn so2_angle_family() -> Family {
    Family::exp(
        rotation_generator(),
        Phase::sigma_linear(vec![0.8, 0.0]).plus(Phase::Sin {
            amp: 0.3,
            sigma: vec![0.0, 1.0],
            m: vec![],
            offset: 0.0,
        }),
    )
}

/// SO(3)⋉ℝ³ over one chart (−10, 10)².
pub fn so3_single() -> Scenario {
    doc("so3-single", MatrixGroup::So3, vec![Chart::new(vec![-10.0, -10.0], vec![10.0, 10.0])], None)
}

/// SO(3)⋉ℝ³ over three boxes with a common triple overlap (0,1)×(0,2).
/// The cocycle is δ_i·δ_j⁻¹ with δ_i = exp(φ_i(σ, m)·L_i), each φ_i depending
/// on m only through the coordinate fixed by L_i, so the transitions depend on m.
pub fn so3_three_chart() -> Scenario {
    doc(
        "so3-three-chart",
        MatrixGroup::So3,
        vec![
            Chart::new(vec![-2.0, -2.0], vec![1.0, 2.0]),
            Chart::new(vec![0.0, -2.0], vec![3.0, 2.0]),
            Chart::new(vec![-1.0, 0.0], vec![2.0, 3.0]),
        ],
        Some(so3_trivializers()),
    )
}

pub fn so3_trivializers() -> Vec<Family> {
    vec![
        Family::exp(
            so3_generator(2),
            Phase::Affine {
                c: 0.0,
                sigma: vec![0.5, 0.0],
                m: vec![0.0, 0.0, 0.4],
            }
            .plus(Phase::SigmaProduct { coef: 0.3, i: 0, j: 1 }),
        ),
        Family::exp(
            so3_generator(0),
            Phase::Sin {
                amp: 0.4,
                sigma: vec![0.0, 1.0],
                m: vec![],
                offset: 0.2,
            }
            .plus(Phase::Affine {
                c: 0.0,
                sigma: vec![],
                m: vec![0.25, 0.0, 0.0],
            }),
        ),
        Family::exp(
            so3_generator(1),
            Phase::Affine {
                c: 0.1,
                sigma: vec![0.3, -0.2],
                m: vec![0.0, 0.35, 0.0],
            },
        ),
    ]
}

pub fn shipped(name: &str) -> Option<Scenario> {
    match name {
        "so2-single" => Some(so2_single()),
        "so2-two-chart" => Some(so2_two_chart()),
        "so3-single" => Some(so3_single()),
        "so3-three-chart" => Some(so3_three_chart()),
        _ => None,
    }
}

pub const SHIPPED: [&str; 4] = ["so2-single", "so2-two-chart", "so3-single", "so3-three-chart"];
