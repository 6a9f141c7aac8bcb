//! Smooth families σ ↦ β(σ) of bisections of G⋉ℝⁿ, written through their
//! group part: β(σ)(m) = (g(σ, m), m), with analytic derivatives.

use serde::{Deserialize, Serialize};

use super::lie::{expm, inverse, Mat, Vector};

fn dot(coeffs: &[f64], x: impl IntoIterator<Item = f64>) -> f64 {
    coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn padded(coeffs: &[f64], n: usize) -> Vec<f64> {
    let mut v = coeffs.to_vec();
    v.resize(n, 0.0);
    v
}

/// Scalar field φ(σ, m). Missing coefficients are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Phase {
    /// c + a·σ + b·m
    Affine {
        #[serde(default)]
        c: f64,
        #[serde(default)]
        sigma: Vec<f64>,
        #[serde(default)]
        m: Vec<f64>,
    },
    /// amp · sin(a·σ + b·m + offset)
    Sin {
        amp: f64,
        #[serde(default)]
        sigma: Vec<f64>,
        #[serde(default)]
        m: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// coef · σ_i · σ_j
    SigmaProduct { coef: f64, i: usize, j: usize },
    Sum { terms: Vec<Phase> },
    Scaled { factor: f64, inner: Box<Phase> },
}

impl Phase {
    pub fn zero() -> Self {
        Phase::Affine {
            c: 0.0,
            sigma: vec![],
            m: vec![],
        }
    }

    pub fn sigma_linear(sigma: Vec<f64>) -> Self {
        Phase::Affine { c: 0.0, sigma, m: vec![] }
    }

    pub fn plus(self, other: Phase) -> Self {
        match self {
            Phase::Sum { mut terms } => {
                terms.push(other);
                Phase::Sum { terms }
            }
            p => Phase::Sum { terms: vec![p, other] },
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Phase::Scaled {
            factor,
            inner: Box::new(self),
        }
    }

    pub fn value(&self, sigma: &[f64], m: &Vector) -> f64 {
        match self {
            Phase::Affine { c, sigma: a, m: b } => c + dot(a, sigma.iter().copied()) + dot(b, m.iter().copied()),
            Phase::Sin { amp, sigma: a, m: b, offset } => {
                amp * (dot(a, sigma.iter().copied()) + dot(b, m.iter().copied()) + offset).sin()
            }
            Phase::SigmaProduct { coef, i, j } => coef * sigma[*i] * sigma[*j],
            Phase::Sum { terms } => terms.iter().map(|t| t.value(sigma, m)).sum(),
            Phase::Scaled { factor, inner } => factor * inner.value(sigma, m),
        }
    }

    pub fn grad_sigma(&self, sigma: &[f64], m: &Vector) -> Vec<f64> {
        let d = sigma.len();
        match self {
            Phase::Affine { sigma: a, .. } => padded(a, d),
            Phase::Sin { amp, sigma: a, m: b, offset } => {
                let c = amp * (dot(a, sigma.iter().copied()) + dot(b, m.iter().copied()) + offset).cos();
                padded(a, d).into_iter().map(|x| c * x).collect()
            }
            Phase::SigmaProduct { coef, i, j } => {
                let mut g = vec![0.0; d];
                g[*i] += coef * sigma[*j];
                g[*j] += coef * sigma[*i];
                g
            }
            Phase::Sum { terms } => terms.iter().fold(vec![0.0; d], |acc, t| {
                acc.iter().zip(t.grad_sigma(sigma, m)).map(|(a, b)| a + b).collect()
            }),
            Phase::Scaled { factor, inner } => inner.grad_sigma(sigma, m).into_iter().map(|x| factor * x).collect(),
        }
    }

    pub fn grad_m(&self, sigma: &[f64], m: &Vector) -> Vector {
        let n = m.len();
        match self {
            Phase::Affine { m: b, .. } => Vector::from_vec(padded(b, n)),
            Phase::Sin { amp, sigma: a, m: b, offset } => {
                let c = amp * (dot(a, sigma.iter().copied()) + dot(b, m.iter().copied()) + offset).cos();
                Vector::from_vec(padded(b, n)) * c
            }
            Phase::SigmaProduct { .. } => Vector::zeros(n),
            Phase::Sum { terms } => terms.iter().fold(Vector::zeros(n), |acc, t| acc + t.grad_m(sigma, m)),
            Phase::Scaled { factor, inner } => inner.grad_m(sigma, m) * *factor,
        }
    }
}

/// Group part of a bisection family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Identity { n: usize },
    Constant {
        #[serde(with = "mat_rows")]
        matrix: Mat,
    },
    /// exp(φ(σ, m)·X). The closed-form inverse assumes φ is constant along
    /// the flow of X on ℝⁿ.
    Exp {
        #[serde(with = "mat_rows")]
        generator: Mat,
        phase: Phase,
    },
    /// Bisection product outer·inner: g(σ, m) = g_outer(σ, g_inner(σ, m)·m)·g_inner(σ, m).
    Product { outer: Box<Family>, inner: Box<Family> },
}

impl Family {
    pub fn exp(generator: Mat, phase: Phase) -> Self {
        Family::Exp { generator, phase }
    }

    pub fn product(outer: Family, inner: Family) -> Self {
        Family::Product {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn group(&self, sigma: &[f64], m: &Vector) -> Mat {
        match self {
            Family::Identity { n } => Mat::identity(*n, *n),
            Family::Constant { matrix } => matrix.clone(),
            Family::Exp { generator, phase } => expm(&(generator * phase.value(sigma, m))),
            Family::Product { outer, inner } => {
                let g1 = inner.group(sigma, m);
                let y = &g1 * m;
                outer.group(sigma, &y) * g1
            }
        }
    }

    /// ∂_u g(σ, m) for u ∈ ℝᵈ.
    pub fn d_sigma(&self, sigma: &[f64], m: &Vector, u: &[f64]) -> Mat {
        match self {
            Family::Identity { n } => Mat::zeros(*n, *n),
            Family::Constant { matrix } => Mat::zeros(matrix.nrows(), matrix.ncols()),
            Family::Exp { generator, phase } => {
                let rate = dot(&phase.grad_sigma(sigma, m), u.iter().copied());
                generator * expm(&(generator * phase.value(sigma, m))) * rate
            }
            Family::Product { outer, inner } => {
                let g1 = inner.group(sigma, m);
                let dg1 = inner.d_sigma(sigma, m, u);
                let y = &g1 * m;
                let dy = &dg1 * m;
                let g2 = outer.group(sigma, &y);
                let dg2 = outer.d_sigma(sigma, &y, u) + outer.d_m(sigma, &y, &dy);
                dg2 * &g1 + g2 * dg1
            }
        }
    }

    /// ∂_v g(σ, m) for v ∈ ℝⁿ.
    pub fn d_m(&self, sigma: &[f64], m: &Vector, v: &Vector) -> Mat {
        match self {
            Family::Identity { n } => Mat::zeros(*n, *n),
            Family::Constant { matrix } => Mat::zeros(matrix.nrows(), matrix.ncols()),
            Family::Exp { generator, phase } => {
                let rate = phase.grad_m(sigma, m).dot(v);
                generator * expm(&(generator * phase.value(sigma, m))) * rate
            }
            Family::Product { outer, inner } => {
                let g1 = inner.group(sigma, m);
                let dg1 = inner.d_m(sigma, m, v);
                let y = &g1 * m;
                let dy = &dg1 * m + &g1 * v;
                let g2 = outer.group(sigma, &y);
                outer.d_m(sigma, &y, &dy) * &g1 + g2 * dg1
            }
        }
    }

    /// The shadow t_*β(σ): m ↦ g(σ, m)·m.
    pub fn shadow(&self, sigma: &[f64], m: &Vector) -> Vector {
        self.group(sigma, m) * m
    }

    /// The family of inverse bisections, in closed form.
    pub fn inverse(&self) -> Family {
        match self {
            Family::Identity { n } => Family::Identity { n: *n },
            Family::Constant { matrix } => Family::Constant { matrix: inverse(matrix) },
            Family::Exp { generator, phase } => Family::Exp {
                generator: generator.clone(),
                phase: phase.clone().scaled(-1.0),
            },
            Family::Product { outer, inner } => Family::product(inner.inverse(), outer.inverse()),
        }
    }

    /// True when g does not depend on m.
    pub fn is_constant_in_m(&self) -> bool {
        match self {
            Family::Identity { .. } | Family::Constant { .. } => true,
            Family::Exp { phase, .. } => phase_constant_in_m(phase),
            Family::Product { outer, inner } => outer.is_constant_in_m() && inner.is_constant_in_m(),
        }
    }
}

fn phase_constant_in_m(p: &Phase) -> bool {
    match p {
        Phase::Affine { m, .. } | Phase::Sin { m, .. } => m.iter().all(|&x| x == 0.0),
        Phase::SigmaProduct { .. } => true,
        Phase::Sum { terms } => terms.iter().all(phase_constant_in_m),
        Phase::Scaled { inner, .. } => phase_constant_in_m(inner),
    }
}

mod mat_rows {
    use super::Mat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(Mat::from_row_iterator(n, k, rows.into_iter().flatten()))
    }
}
