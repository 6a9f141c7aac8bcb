//! Local connection data and the operations built from it.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::family::Family;
use super::lie::{adjoint, inverse, Mat, MatrixGroup, Vector};
use super::scenario::{shadow_inverse, Chart, Scenario};
use super::NumericError;

/// θ_R-pullback of σ ↦ β(σ)(m) along u: (∂_u g)(σ, m)·g(σ, m)⁻¹, tagged at g·m.
pub fn mc_right(family: &Family, m: &Vector, sigma: &[f64], u: &[f64]) -> Mat {
    family.d_sigma(sigma, m, u) * inverse(&family.group(sigma, m))
}

/// Differential of C_β at Id_m applied to X: Ad_{g(m)}X + (∂_{X·m} g)(m)·g(m)⁻¹,
/// returned with its base point g(m)·m.
pub fn tangent_conjugation(family: &Family, sigma: &[f64], m: &Vector, x: &Mat) -> (Mat, Vector) {
    let g = family.group(sigma, m);
    let dir = x * m;
    let value = adjoint(&g, x) + family.d_m(sigma, m, &dir) * inverse(&g);
    (value, &g * m)
}

/// ρ(X)(m) = X·m.
pub fn anchor(m: &Vector, x: &Mat) -> Vector {
    x * m
}

/// A section m ↦ fᴬ(m) of the action algebroid, as basis coefficients.
pub type AlgebroidSection = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// [s₁, s₂]ᴬ = f₂ᴮ𝒦_B(f₁ᴬ) − f₁ᴮ𝒦_B(f₂ᴬ) − f₁ᴮf₂ᶜ f_BCᴬ with 𝒦_B = −ρ(t_B) acting
/// by directional derivative (central differences of step `h`).
pub fn algebroid_bracket(group: MatrixGroup, s1: AlgebroidSection, s2: AlgebroidSection, h: f64) -> AlgebroidSection {
    let basis = group.basis();
    let f = group.structure_constants();
    Arc::new(move |m: &Vector| {
        let f1 = s1(m);
        let f2 = s2(m);
        let dim = basis.len();
        let along = |s: &AlgebroidSection, b: usize| {
            let v = -anchor(m, &basis[b]);
            (s(&(m + &v * h)) - s(&(m - &v * h))) / (2.0 * h)
        };
        let mut out = Vector::zeros(dim);
        for b in 0..dim {
            out += along(&s1, b) * f2[b] - along(&s2, b) * f1[b];
            for c in 0..dim {
                out -= &f[b][c] * (f1[b] * f2[c]);
            }
        }
        out
    })
}

/// Local connection data: A_i(σ, m)(u) ∈ 𝔤, linear in u.
pub trait Connection: Send + Sync {
    fn n_charts(&self) -> usize;
    fn eval(&self, chart: usize, sigma: &[f64], m: &Vector, u: &[f64]) -> Result<Mat, NumericError>;
}

pub struct ZeroConnection {
    pub n: usize,
    pub charts: usize,
}

impl Connection for ZeroConnection {
    fn n_charts(&self) -> usize {
        self.charts
    }

    fn eval(&self, _: usize, _: &[f64], _: &Vector, _: &[f64]) -> Result<Mat, NumericError> {
        Ok(Mat::zeros(self.n, self.n))
    }
}

/// A_i(σ, m)(u) = Σ_k u_k C_ik.
pub struct LinearConnection {
    pub coeffs: Vec<Vec<Mat>>,
}

impl Connection for LinearConnection {
    fn n_charts(&self) -> usize {
        self.coeffs.len()
    }

    fn eval(&self, chart: usize, _: &[f64], m: &Vector, u: &[f64]) -> Result<Mat, NumericError> {
        let mut out = Mat::zeros(m.len(), m.len());
        for (c, uk) in self.coeffs[chart].iter().zip(u) {
            out += c * *uk;
        }
        Ok(out)
    }
}

/// Adds Σ_k u_k D_k on one chart.
pub struct PerturbedConnection {
    pub inner: Arc<dyn Connection>,
    pub chart: usize,
    pub delta: Vec<Mat>,
}

impl Connection for PerturbedConnection {
    fn n_charts(&self) -> usize {
        self.inner.n_charts()
    }

    fn eval(&self, chart: usize, sigma: &[f64], m: &Vector, u: &[f64]) -> Result<Mat, NumericError> {
        let mut a = self.inner.eval(chart, sigma, m, u)?;
        if chart == self.chart {
            for (d, uk) in self.delta.iter().zip(u) {
                a += d * *uk;
            }
        }
        Ok(a)
    }
}

/// A partition of unity subordinate to the charts.
pub trait Partition: Send + Sync {
    fn weights(&self, sigma: &[f64]) -> Vec<f64>;
}

/// Normalised products of exp(−1/(s(1−s))) bumps, one per chart box.
pub struct BumpPartition {
    pub charts: Vec<Chart>,
}

fn bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

impl Partition for BumpPartition {
    fn weights(&self, sigma: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = self
            .charts
            .iter()
            .map(|c| {
                sigma
                    .iter()
                    .zip(c.lo.iter().zip(&c.hi))
                    .map(|(x, (lo, hi))| bump((x - lo) / (hi - lo)))
                    .product()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            raw.into_iter().map(|x| x / total).collect()
        } else {
            raw
        }
    }
}

/// Σ_i h_i times the chart-i flat datum carried into chart j by the gluing law.
pub struct ConstructedConnection {
    scenario: Arc<Scenario>,
    partition: Arc<dyn Partition>,
}

/// Builds a connection from a partition of unity, after checking at sample
/// points of every chart (shrunk by 5% per side) that the weights are
/// non-negative, sum to one and vanish off their charts.
pub fn construct_connection(scenario: Arc<Scenario>, partition: Arc<dyn Partition>) -> Result<ConstructedConnection, NumericError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a27);
    for chart in &scenario.charts {
        for _ in 0..200 {
            let sigma = chart.sample(&mut rng, 0.05);
            let w = partition.weights(&sigma);
            if w.len() != scenario.n_charts() {
                return Err(NumericError::Input("one weight per chart expected".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(NumericError::Input(format!("weights sum to {total} at {sigma:?}")));
            }
            for (i, &x) in w.iter().enumerate() {
                if x < 0.0 || (x > 0.0 && !scenario.charts[i].contains(&sigma)) {
                    return Err(NumericError::Input(format!("weight {i} not supported in its chart at {sigma:?}")));
                }
            }
        }
    }
    Ok(ConstructedConnection { scenario, partition })
}

impl Connection for ConstructedConnection {
    fn n_charts(&self) -> usize {
        self.scenario.n_charts()
    }

    fn eval(&self, j: usize, sigma: &[f64], m: &Vector, u: &[f64]) -> Result<Mat, NumericError> {
        let s = &self.scenario;
        if !s.charts[j].contains(sigma) {
            return Err(NumericError::Domain(format!("{sigma:?} not in chart {j}")));
        }
        let n = s.n();
        let mut out = Mat::zeros(n, n);
        for (i, h) in self.partition.weights(sigma).into_iter().enumerate() {
            if h == 0.0 || i == j {
                continue;
            }
            let m_i = s.transition(i, j).shadow(sigma, m);
            out -= mc_right(s.transition(j, i), &m_i, sigma, u) * h;
        }
        Ok(out)
    }
}

/// (σ, m, X) in chart j ↦ (t_*β_ij(m), T C_{β_ij}(X) − mc_right(β_ij, m, σ, u)) in chart i.
pub fn transition_transform(s: &Scenario, i: usize, j: usize, sigma: &[f64], m: &Vector, u: &[f64], x: &Mat) -> (Vector, Mat) {
    let b = s.transition(i, j);
    let (tc, at) = tangent_conjugation(b, sigma, m, x);
    (at, tc - mc_right(b, m, sigma, u))
}

fn in_charts(s: &Scenario, charts: &[usize], sigma: &[f64]) -> Result<(), NumericError> {
    match charts.iter().find(|&&c| !s.charts[c].contains(sigma)) {
        Some(c) => Err(NumericError::Domain(format!("{sigma:?} not in chart {c}"))),
        None => Ok(()),
    }
}

/// ‖A_i(σ, β_ij(σ)▹m)(u) − T C_{β_ij(σ)}(A_j(σ, m)(u)) + mc_right(β_ij, m, σ, u)‖.
pub fn gluing_residual(
    s: &Scenario,
    a: &dyn Connection,
    i: usize,
    j: usize,
    sigma: &[f64],
    m: &Vector,
    u: &[f64],
) -> Result<f64, NumericError> {
    in_charts(s, &[i, j], sigma)?;
    let aj = a.eval(j, sigma, m, u)?;
    let (m_i, want) = transition_transform(s, i, j, sigma, m, u, &aj);
    let ai = a.eval(i, sigma, &m_i, u)?;
    Ok(s.group.norm(&(ai - want)))
}

/// Distance between the law applied k→j→i and k→i directly, for a datum X at m in chart k.
pub fn coherence_residual(
    s: &Scenario,
    (i, j, k): (usize, usize, usize),
    sigma: &[f64],
    m: &Vector,
    u: &[f64],
    x: &Mat,
) -> Result<f64, NumericError> {
    in_charts(s, &[i, j, k], sigma)?;
    let (m_j, x_j) = transition_transform(s, j, k, sigma, m, u, x);
    let (m_i, x_i) = transition_transform(s, i, j, sigma, &m_j, u, &x_j);
    let (m_d, x_d) = transition_transform(s, i, k, sigma, m, u, x);
    Ok((m_i - m_d).norm() + s.group.norm(&(x_i - x_d)))
}

/// Tangent to 𝒫 at (σ, (a, m)) in a chart: base direction u, fibre velocity V
/// at a, and ṁ = w.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleTangent {
    pub u: Vec<f64>,
    pub v: Mat,
    pub w: Vector,
}

/// Θ(u, V, w) = (0, V + A_i(σ, a·m)(u)·a, w).
pub fn apply_theta(
    a_conn: &dyn Connection,
    chart: usize,
    sigma: &[f64],
    (a, m): (&Mat, &Vector),
    t: &BundleTangent,
) -> Result<BundleTangent, NumericError> {
    let x = a_conn.eval(chart, sigma, &(a * m), &t.u)?;
    Ok(BundleTangent {
        u: vec![0.0; t.u.len()],
        v: &t.v + x * a,
        w: t.w.clone(),
    })
}

/// Γ_i(σ, (a, m))(u) = A_i(σ, a·m)(u)·a, with zero ṁ.
pub fn christoffel(a_conn: &dyn Connection, chart: usize, sigma: &[f64], (a, m): (&Mat, &Vector), u: &[f64]) -> Result<Mat, NumericError> {
    Ok(a_conn.eval(chart, sigma, &(a * m), u)? * a)
}

/// Θ_ℱ(u, w) at (σ, m): the fibre part w + ρ(A_i(σ, m)(u))(m).
pub fn shadow_theta(a_conn: &dyn Connection, chart: usize, sigma: &[f64], m: &Vector, u: &[f64], w: &Vector) -> Result<Vector, NumericError> {
    Ok(w + anchor(m, &a_conn.eval(chart, sigma, m, u)?))
}

pub type BaseFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type LocalSection = Arc<dyn Fn(&[f64]) -> Vector + Send + Sync>;

/// A base map with inverse and differential, for non-vertical gauge data.
#[derive(Clone)]
pub struct BaseMap {
    pub f: BaseFn,
    pub f_inv: BaseFn,
    pub tf: Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>,
}

/// Per-chart families γ_i, optionally over a base map f with f(O_i) ⊆ O_i.
#[derive(Clone)]
pub struct GaugeData {
    pub families: Vec<Family>,
    pub base_map: Option<BaseMap>,
}

impl GaugeData {
    pub fn vertical(families: Vec<Family>) -> Self {
        Self { families, base_map: None }
    }

    /// Inverse of vertical data.
    pub fn inverse(&self) -> Option<Self> {
        self.base_map
            .is_none()
            .then(|| Self::vertical(self.families.iter().map(Family::inverse).collect()))
    }

    /// Vertical data glued from a chart-0 family: γ_i = β_i0·γ_0·β_0i, using
    /// the transition formulas off their overlaps.
    pub fn from_chart_zero(s: &Scenario, gamma0: Family) -> Self {
        let families = (0..s.n_charts())
            .map(|i| {
                if i == 0 {
                    gamma0.clone()
                } else {
                    Family::product(
                        s.transition(i, 0).clone(),
                        Family::product(gamma0.clone(), s.transition(0, i).clone()),
                    )
                }
            })
            .collect();
        Self::vertical(families)
    }

    /// σ and u in the source chart for a target-side (σ', u').
    fn pull_base(&self, sigma: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NumericError> {
        match &self.base_map {
            None => Ok((sigma.to_vec(), u.to_vec())),
            Some(bm) => {
                let s0 = (bm.f_inv)(sigma);
                let tf = (bm.tf)(&s0);
                let u0 = tf
                    .lu()
                    .solve(&Vector::from_column_slice(u))
                    .ok_or_else(|| NumericError::Input("singular base differential".into()))?;
                Ok((s0, u0.iter().copied().collect()))
            }
        }
    }
}

/// Aᶲ_i(f(σ), t_*γ_i(σ)(m))(T f(u)) = T C_{γ_i(σ)}(A_i(σ, m)(u)) − mc_right(γ_i, m, σ, u).
pub struct GaugedConnection {
    inner: Arc<dyn Connection>,
    gauge: GaugeData,
    newton_tol: f64,
}

pub fn gauge_transform_connection(inner: Arc<dyn Connection>, gauge: GaugeData) -> Result<GaugedConnection, NumericError> {
    if gauge.families.len() != inner.n_charts() {
        return Err(NumericError::Input("one gauge family per chart expected".into()));
    }
    Ok(GaugedConnection {
        inner,
        gauge,
        newton_tol: 1e-12,
    })
}

impl Connection for GaugedConnection {
    fn n_charts(&self) -> usize {
        self.inner.n_charts()
    }

    fn eval(&self, chart: usize, sigma: &[f64], m: &Vector, u: &[f64]) -> Result<Mat, NumericError> {
        let (s0, u0) = self.gauge.pull_base(sigma, u)?;
        let gamma = &self.gauge.families[chart];
        let m0 = shadow_inverse(gamma, &s0, m, self.newton_tol)?;
        let x = self.inner.eval(chart, &s0, &m0, &u0)?;
        let (tc, _) = tangent_conjugation(gamma, &s0, &m0, &x);
        Ok(tc - mc_right(gamma, &m0, &s0, &u0))
    }
}

/// The chart data of a connection on the trivial bundle, moved into chart i by
/// the trivializer δ_i. `global` must give the same datum in every chart.
pub fn trivialized_connection(s: &Scenario, global: Arc<dyn Connection>) -> Result<GaugedConnection, NumericError> {
    let deltas = s
        .trivializers
        .clone()
        .ok_or_else(|| NumericError::Input("scenario has no trivializers".into()))?;
    gauge_transform_connection(global, GaugeData::vertical(deltas))
}

/// A section of ℱ given per chart by σ ↦ m_i(σ).
#[derive(Clone)]
pub struct ChartSection {
    pub charts: Vec<LocalSection>,
}

impl ChartSection {
    /// Checks m_i = t_*β_ij(m_j) at sampled overlap points.
    pub fn new(s: &Scenario, charts: Vec<LocalSection>) -> Result<Self, NumericError> {
        if charts.len() != s.n_charts() {
            return Err(NumericError::Input("one local section per chart expected".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ec7);
        for i in 0..s.n_charts() {
            for j in (0..s.n_charts()).filter(|&j| j != i) {
                let Some(ov) = s.overlap(&[i, j]) else { continue };
                for _ in 0..50 {
                    let sigma = ov.sample(&mut rng, 0.0);
                    let mj = charts[j](&sigma);
                    let d = (s.transition(i, j).shadow(&sigma, &mj) - charts[i](&sigma)).norm();
                    if d > 1e-9 * mj.norm().max(1.0) {
                        return Err(NumericError::Input(format!("section charts {i},{j} disagree by {d} at {sigma:?}")));
                    }
                }
            }
        }
        Ok(Self { charts })
    }

    /// A section given by a global representative through the trivializers:
    /// m_i(σ) = t_*δ_i(σ)(m̂(σ)).
    pub fn from_global(s: &Scenario, global: LocalSection) -> Result<Self, NumericError> {
        let deltas = s
            .trivializers
            .clone()
            .ok_or_else(|| NumericError::Input("scenario has no trivializers".into()))?;
        let charts = deltas
            .into_iter()
            .map(|d| {
                let g = global.clone();
                Arc::new(move |sigma: &[f64]| d.shadow(sigma, &g(sigma))) as Arc<dyn Fn(&[f64]) -> Vector + Send + Sync>
            })
            .collect();
        Self::new(s, charts)
    }

    /// m^Φ_i(σ) = t_*γ_i(σ)(m_i(σ)), for vertical gauge data.
    pub fn gauged(&self, gauge: &GaugeData) -> Result<Self, NumericError> {
        if gauge.base_map.is_some() {
            return Err(NumericError::Input("sections are only transformed by vertical gauge data".into()));
        }
        let charts = self
            .charts
            .iter()
            .zip(&gauge.families)
            .map(|(m, g)| {
                let (m, g) = (m.clone(), g.clone());
                Arc::new(move |sigma: &[f64]| g.shadow(sigma, &m(sigma))) as Arc<dyn Fn(&[f64]) -> Vector + Send + Sync>
            })
            .collect();
        Ok(Self { charts })
    }
}

/// ∇_u φ = ∂_u m_i(σ) + ρ(A_i(σ, m_i(σ))(u))(m_i(σ)), with ∂_u by central differences of step `h`.
pub fn covariant_derivative(
    a_conn: &dyn Connection,
    section: &ChartSection,
    chart: usize,
    sigma: &[f64],
    u: &[f64],
    h: f64,
) -> Result<Vector, NumericError> {
    let m = &section.charts[chart];
    let shift = |k: f64| -> Vec<f64> { sigma.iter().zip(u).map(|(x, d)| x + k * d).collect() };
    let dm = (m(&shift(h)) - m(&shift(-h))) / (2.0 * h);
    let here = m(sigma);
    Ok(dm + anchor(&here, &a_conn.eval(chart, sigma, &here, u)?))
}

/// T ℱ_*(Φ) on a vertical vector w at (σ, m): (∂_w g_γ)(σ, m)·m + g_γ(σ, m)·w.
pub fn shadow_pushforward(gamma: &Family, sigma: &[f64], m: &Vector, w: &Vector) -> Vector {
    gamma.d_m(sigma, m, w) * m + gamma.group(sigma, m) * w
}

/// An arrow (g, m) of G⋉ℝⁿ: source m, target g·m.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionArrow {
    pub g: Mat,
    pub m: Vector,
}

impl ActionArrow {
    pub fn target(&self) -> Vector {
        &self.g * &self.m
    }

    /// (h, g·m)·(g, m) = (hg, m), when the source of `self` matches the target of `other`.
    pub fn compose(&self, other: &ActionArrow, tol: f64) -> Result<ActionArrow, NumericError> {
        let gap = (&self.m - other.target()).norm();
        if gap > tol * self.m.norm().max(1.0) {
            return Err(NumericError::Input(format!("arrows not composable (gap {gap})")));
        }
        Ok(ActionArrow {
            g: &self.g * &other.g,
            m: other.m.clone(),
        })
    }

    pub fn invert(&self) -> ActionArrow {
        ActionArrow {
            g: inverse(&self.g),
            m: self.target(),
        }
    }
}

/// β(σ) evaluated at m as an arrow.
pub fn bisection_arrow(family: &Family, sigma: &[f64], m: &Vector) -> ActionArrow {
    ActionArrow {
        g: family.group(sigma, m),
        m: m.clone(),
    }
}

/// L_β(a) = β(t(a))·a.
pub fn left_mult(family: &Family, sigma: &[f64], a: &ActionArrow) -> ActionArrow {
    bisection_arrow(family, sigma, &a.target())
        .compose(a, 1e-12)
        .expect("β(t(a)) starts at t(a)")
}

/// C_β(a) = β(t(a))·a·β(s(a))⁻¹.
pub fn conjugate(family: &Family, sigma: &[f64], a: &ActionArrow) -> ActionArrow {
    let back = bisection_arrow(family, sigma, &a.m).invert();
    left_mult(family, sigma, a).compose(&back, 1e-12).expect("β(s(a))⁻¹ ends at s(a)")
}

/// Serializable description of the connections the CLI can build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConnectionSpec {
    Zero,
    /// From the bump partition of the scenario charts.
    Constructed,
    /// coeffs[chart][direction] = algebra coordinates of C_ik.
    Linear { coeffs: Vec<Vec<Vec<f64>>> },
    /// coeffs[direction]: one linear datum on the trivial bundle, carried into
    /// every chart by the scenario's trivializers.
    Global { coeffs: Vec<Vec<f64>> },
}

impl ConnectionSpec {
    pub fn build(&self, s: &Arc<Scenario>) -> Result<Arc<dyn Connection>, NumericError> {
        Ok(match self {
            ConnectionSpec::Zero => Arc::new(ZeroConnection { n: s.n(), charts: s.n_charts() }),
            ConnectionSpec::Constructed => Arc::new(construct_connection(
                s.clone(),
                Arc::new(BumpPartition { charts: s.charts.clone() }),
            )?),
            ConnectionSpec::Linear { coeffs } => {
                if coeffs.len() != s.n_charts()
                    || coeffs.iter().flatten().any(|c| c.len() != s.group.dim())
                    || coeffs.iter().any(|c| c.len() != s.base_dim)
                {
                    return Err(NumericError::Input("linear coefficients have the wrong shape".into()));
                }
                Arc::new(LinearConnection {
                    coeffs: coeffs
                        .iter()
                        .map(|per| per.iter().map(|c| s.group.hat(c)).collect())
                        .collect(),
                })
            }
            ConnectionSpec::Global { coeffs } => {
                if coeffs.len() != s.base_dim || coeffs.iter().any(|c| c.len() != s.group.dim()) {
                    return Err(NumericError::Input("global coefficients have the wrong shape".into()));
                }
                let per: Vec<Mat> = coeffs.iter().map(|c| s.group.hat(c)).collect();
                let global = LinearConnection {
                    coeffs: vec![per; s.n_charts()],
                };
                Arc::new(trivialized_connection(s, Arc::new(global))?)
            }
        })
    }
}
