//! Finite-difference oracles and sampling helpers shared by the numeric tests.
//! Nothing here calls the library's split formulas.
#![allow(dead_code)]

use std::sync::Arc;

use groupoidal::connection::family::{Family, Phase};
use groupoidal::connection::forms::{construct_connection, BumpPartition, ConstructedConnection};
use groupoidal::connection::lie::{Mat, Vector};
use groupoidal::connection::scenario::Scenario;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-5;

/// ‖a − b‖ / max(1, ‖b‖).
pub fn rel(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn rel_v(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn shift(sigma: &[f64], u: &[f64], k: f64) -> Vec<f64> {
    sigma.iter().zip(u).map(|(x, d)| x + k * d).collect()
}

/// Central difference of σ ↦ g(σ, m) along u, right-translated by g(σ, m)ᵀ.
pub fn fd_mc_right(f: &Family, m: &Vector, sigma: &[f64], u: &[f64]) -> Mat {
    let d = (f.group(&shift(sigma, u, H), m) - f.group(&shift(sigma, u, -H), m)) / (2.0 * H);
    d * f.group(sigma, m).transpose()
}

/// Central difference at t = 0 of the group part of β·(exp(tX), m)·β⁻¹.
pub fn fd_tangent_conjugation(f: &Family, sigma: &[f64], m: &Vector, x: &Mat) -> Mat {
    let back = f.group(sigma, m).transpose();
    let curve = |t: f64| {
        let e = (x * t).exp();
        f.group(sigma, &(&e * m)) * &e * &back
    };
    (curve(H) - curve(-H)) / (2.0 * H)
}

pub fn fd_anchor(m: &Vector, x: &Mat) -> Vector {
    ((x * H).exp() * m - (x * -H).exp() * m) / (2.0 * H)
}

/// Fibre part of the tangent of (σ, a, m) ↦ a·m along (u, V, w).
pub fn fd_duck(a: &Mat, m: &Vector, v: &Mat, w: &Vector) -> Vector {
    let xi = v * a.transpose();
    let curve = |t: f64| (&xi * t).exp() * a * (m + w * t);
    (curve(H) - curve(-H)) / (2.0 * H)
}

pub fn constructed(s: &Scenario) -> ConstructedConnection {
    let s = Arc::new(s.clone());
    construct_connection(s.clone(), Arc::new(BumpPartition { charts: s.charts.clone() })).unwrap()
}

pub fn bump_weights(s: &Scenario, sigma: &[f64]) -> Vec<f64> {
    use groupoidal::connection::forms::Partition;
    BumpPartition { charts: s.charts.clone() }.weights(sigma)
}

pub fn sample_in(s: &Scenario, charts: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    s.overlap(charts).expect("charts overlap").sample(rng, 0.02)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// A vertical gauge phase for SO(2) scenarios: Rot(φ(σ)).
pub fn so2_gauge_phase() -> Phase {
    Phase::sigma_linear(vec![0.3, -0.5]).plus(Phase::Sin {
        amp: 0.4,
        sigma: vec![0.0, 1.0],
        m: vec![0.0, 0.0],
        offset: 0.1,
    })
}
