//! Horizontal lifts of base paths: ȧ = −A_i(σ, a·m)(σ̇)·a with m fixed, by RK4,
//! switching charts along an itinerary.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::forms::Connection;
use super::lie::{Mat, Vector};
use super::scenario::Scenario;
use super::NumericError;

/// A path σ: [0, 1] → ℝᵈ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BasePath {
    Line { from: Vec<f64>, to: Vec<f64> },
    /// Equal time per segment.
    Polyline { points: Vec<Vec<f64>> },
    Circle {
        center: [f64; 2],
        radius: f64,
        #[serde(default = "one")]
        turns: f64,
        #[serde(default)]
        phase: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl BasePath {
    pub fn dim(&self) -> usize {
        match self {
            BasePath::Line { from, .. } => from.len(),
            BasePath::Polyline { points } => points.first().map_or(0, Vec::len),
            BasePath::Circle { .. } => 2,
        }
    }

    pub fn validate(&self, base_dim: usize) -> Result<(), NumericError> {
        let ok = match self {
            BasePath::Line { from, to } => from.len() == base_dim && to.len() == base_dim,
            BasePath::Polyline { points } => points.len() >= 2 && points.iter().all(|p| p.len() == base_dim),
            BasePath::Circle { radius, .. } => base_dim == 2 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(NumericError::Input(format!("path does not fit a {base_dim}-dimensional base")))
        }
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        let BasePath::Polyline { points } = self else { return (0, t) };
        let n = points.len() - 1;
        let x = (t.clamp(0.0, 1.0) * n as f64).min(n as f64 - 1e-15);
        let k = (x.floor() as usize).min(n - 1);
        (k, x - k as f64)
    }

    pub fn position(&self, t: f64) -> Vec<f64> {
        match self {
            BasePath::Line { from, to } => from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect(),
            BasePath::Polyline { points } => {
                let (k, s) = self.segment(t);
                points[k].iter().zip(&points[k + 1]).map(|(a, b)| a + s * (b - a)).collect()
            }
            BasePath::Circle { center, radius, turns, phase } => {
                let th = phase + TAU * turns * t;
                vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            }
        }
    }

    /// σ̇(t); on a polyline, the velocity of the segment containing t
    /// (the later one at a node).
    pub fn velocity(&self, t: f64) -> Vec<f64> {
        match self {
            BasePath::Line { from, to } => from.iter().zip(to).map(|(a, b)| b - a).collect(),
            BasePath::Polyline { points } => {
                let n = (points.len() - 1) as f64;
                let (k, _) = self.segment(t);
                points[k].iter().zip(&points[k + 1]).map(|(a, b)| n * (b - a)).collect()
            }
            BasePath::Circle { radius, turns, phase, .. } => {
                let th = phase + TAU * turns * t;
                let w = TAU * turns * radius;
                vec![-w * th.sin(), w * th.cos()]
            }
        }
    }

    /// Times in (0, 1) where the velocity jumps.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            BasePath::Polyline { points } => {
                let n = points.len() - 1;
                (1..n).map(|k| k as f64 / n as f64).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn length(&self) -> f64 {
        let n = 2000;
        (0..n)
            .map(|k| {
                let (a, b) = (self.position(k as f64 / n as f64), self.position((k + 1) as f64 / n as f64));
                a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
            })
            .sum()
    }
}

/// Chart `chart` is used on (previous `until`, `until`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub until: f64,
    pub chart: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Itinerary {
    pub legs: Vec<Leg>,
}

impl Itinerary {
    pub fn single(chart: usize) -> Self {
        Self {
            legs: vec![Leg { until: 1.0, chart }],
        }
    }

    /// Stays in the current chart as long as possible; at a sample where the
    /// path leaves it, switches at the previous sample to the chart that
    /// keeps the path longest.
    pub fn auto(s: &Scenario, path: &BasePath) -> Result<Self, NumericError> {
        path.validate(s.base_dim)?;
        let n = 4096;
        let at = |k: usize| path.position(k as f64 / n as f64);
        let runs = |c: usize, from: usize| (from..=n).take_while(|&k| s.charts[c].contains(&at(k))).count();
        let pick = |from: usize, need: &[Vec<f64>]| {
            (0..s.n_charts())
                .filter(|&c| need.iter().all(|p| s.charts[c].contains(p)))
                .max_by_key(|&c| (runs(c, from), std::cmp::Reverse(c)))
        };
        let outside = |k: usize| NumericError::Domain(format!("path leaves every chart near t = {}", k as f64 / n as f64));
        let mut chart = pick(0, &[at(0)]).ok_or_else(|| outside(0))?;
        let mut legs = Vec::new();
        for k in 1..=n {
            if s.charts[chart].contains(&at(k)) {
                continue;
            }
            let next = pick(k - 1, &[at(k - 1), at(k)]).ok_or_else(|| outside(k))?;
            legs.push(Leg {
                until: (k - 1) as f64 / n as f64,
                chart,
            });
            chart = next;
        }
        legs.push(Leg { until: 1.0, chart });
        Ok(Self { legs })
    }

    pub fn validate(&self, s: &Scenario) -> Result<(), NumericError> {
        let bad = |m: &str| Err(NumericError::Input(format!("itinerary: {m}")));
        if self.legs.is_empty() || (self.legs.last().unwrap().until - 1.0).abs() > 1e-15 {
            return bad("must end at t = 1");
        }
        let mut prev = 0.0;
        for w in self.legs.windows(2) {
            if !s.has_transition(w[1].chart, w[0].chart) {
                return bad("consecutive charts do not overlap");
            }
        }
        for leg in &self.legs {
            if leg.chart >= s.n_charts() {
                return bad("unknown chart");
            }
            if leg.until <= prev && !(prev == 0.0 && leg.until == 0.0) {
                return bad("switch times must increase");
            }
            prev = leg.until;
        }
        Ok(())
    }

    pub fn start_chart(&self) -> usize {
        self.legs[0].chart
    }

    pub fn end_chart(&self) -> usize {
        self.legs.last().unwrap().chart
    }

    /// (t₀, t₁, chart) intervals, also split at the path's kinks.
    fn intervals(&self, path: &BasePath) -> Vec<(f64, f64, usize)> {
        let kinks = path.kinks();
        let mut out = Vec::new();
        let mut t0 = 0.0;
        for leg in &self.legs {
            let mut cuts: Vec<f64> = kinks.iter().copied().filter(|&k| k > t0 && k < leg.until).collect();
            cuts.push(leg.until);
            for c in cuts {
                if c > t0 {
                    out.push((t0, c, leg.chart));
                }
                t0 = c;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    pub a: Mat,
    pub m: Vector,
    pub chart: usize,
    pub steps: usize,
}

impl Lift {
    pub fn shadow(&self) -> Vector {
        &self.a * &self.m
    }
}

fn check_in(s: &Scenario, chart: usize, sigma: &[f64], t: f64) -> Result<(), NumericError> {
    if s.charts[chart].contains(sigma) {
        Ok(())
    } else {
        Err(NumericError::Domain(format!("σ({t}) = {sigma:?} is outside chart {chart}")))
    }
}

fn finite(x: &Mat, what: &str) -> Result<(), NumericError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NumericError::Divergence(what.to_string()))
    }
}

/// RK4 over the itinerary for a state X with right-hand side F(chart, σ, σ̇, X)
/// and chart switch S(to, from, σ, X).
fn integrate(
    s: &Scenario,
    path: &BasePath,
    itin: &Itinerary,
    (h, refine): (f64, usize),
    x0: Mat,
    rhs: impl Fn(usize, &[f64], &[f64], &Mat) -> Result<Mat, NumericError>,
    switch: impl Fn(usize, usize, &[f64], &Mat) -> Mat,
) -> Result<(Mat, usize), NumericError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(NumericError::Input("step must be positive".into()));
    }
    path.validate(s.base_dim)?;
    itin.validate(s)?;
    let mut x = x0;
    let mut chart = itin.start_chart();
    let mut steps = 0;
    for (t0, t1, c) in itin.intervals(path) {
        if c != chart {
            let sigma = path.position(t0);
            check_in(s, chart, &sigma, t0)?;
            check_in(s, c, &sigma, t0)?;
            x = switch(c, chart, &sigma, &x);
            chart = c;
        }
        let n = refine * ((t1 - t0) / h - 1e-9).ceil().max(1.0) as usize;
        let dt = (t1 - t0) / n as f64;
        // Velocity is sampled just inside the interval so a polyline kink at
        // either end uses this segment.
        let vel = |t: f64| path.velocity(t.clamp(t0 + 1e-12 * dt, t1 - 1e-12 * dt));
        let f = |t: f64, x: &Mat| -> Result<Mat, NumericError> {
            let sigma = path.position(t);
            check_in(s, chart, &sigma, t)?;
            rhs(chart, &sigma, &vel(t), x)
        };
        for k in 0..n {
            let t = t0 + k as f64 * dt;
            let k1 = f(t, &x)?;
            let k2 = f(t + dt / 2.0, &(&x + &k1 * (dt / 2.0)))?;
            let k3 = f(t + dt / 2.0, &(&x + &k2 * (dt / 2.0)))?;
            let k4 = f(t + dt, &(&x + &k3 * dt))?;
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            steps += 1;
        }
        finite(&x, "transport state")?;
    }
    Ok((x, steps))
}

/// Horizontal lift of `path` through (a₀, m₀) in the itinerary's first chart,
/// with steps of at most `h`.
pub fn parallel_transport(
    s: &Scenario,
    conn: &dyn Connection,
    path: &BasePath,
    itin: &Itinerary,
    start: (&Mat, &Vector),
    h: f64,
) -> Result<Lift, NumericError> {
    parallel_transport_refined(s, conn, path, itin, start, h, 1)
}

/// As [`parallel_transport`], with every interval's step count at `h`
/// multiplied by `refine`, so that refinements halve the steps exactly.
pub fn parallel_transport_refined(
    s: &Scenario,
    conn: &dyn Connection,
    path: &BasePath,
    itin: &Itinerary,
    (a0, m0): (&Mat, &Vector),
    h: f64,
    refine: usize,
) -> Result<Lift, NumericError> {
    let (a, steps) = integrate(
        s,
        path,
        itin,
        (h, refine),
        a0.clone(),
        |c, sigma, vel, a| Ok(-(conn.eval(c, sigma, &(a * m0), vel)? * a)),
        |to, from, sigma, a| s.transition(to, from).group(sigma, &(a * m0)) * a,
    )?;
    Ok(Lift {
        a,
        m: m0.clone(),
        chart: itin.end_chart(),
        steps,
    })
}

/// Θ_ℱ-horizontal lift in the shadow bundle: ẋ = −A_i(σ, x)(σ̇)·x.
pub fn shadow_transport(s: &Scenario, conn: &dyn Connection, path: &BasePath, itin: &Itinerary, x0: &Vector, h: f64) -> Result<Vector, NumericError> {
    let start = Mat::from_column_slice(x0.len(), 1, x0.as_slice());
    let (x, _) = integrate(
        s,
        path,
        itin,
        (h, 1),
        start,
        |c, sigma, vel, x| {
            let v = x.column(0).into_owned();
            Ok(-(conn.eval(c, sigma, &v, vel)? * x))
        },
        |to, from, sigma, x| {
            let v = x.column(0).into_owned();
            let y = s.transition(to, from).shadow(sigma, &v);
            Mat::from_column_slice(y.len(), 1, y.as_slice())
        },
    )?;
    Ok(x.column(0).into_owned())
}

/// log₂ of successive endpoint differences at steps H, H/2, H/4.
pub fn convergence_order(
    s: &Scenario,
    conn: &dyn Connection,
    path: &BasePath,
    itin: &Itinerary,
    start: (&Mat, &Vector),
    coarse: f64,
) -> Result<f64, NumericError> {
    let ends = [1, 2, 4]
        .into_iter()
        .map(|r| parallel_transport_refined(s, conn, path, itin, start, coarse, r).map(|l| l.a))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(((&ends[0] - &ends[1]).norm() / (&ends[1] - &ends[2]).norm()).log2())
}

/// ‖T(p◁b) − T(p)◁b‖ for the arrow b ending at m₀: p◁b = (a₀·b, b⁻¹·m₀).
pub fn equivariance_residual(
    s: &Scenario,
    conn: &dyn Connection,
    path: &BasePath,
    itin: &Itinerary,
    (a0, m0): (&Mat, &Vector),
    b: &Mat,
    h: f64,
) -> Result<f64, NumericError> {
    let moved_m = super::lie::inverse(b) * m0;
    let lifted = parallel_transport(s, conn, path, itin, (a0, m0), h)?;
    let moved = parallel_transport(s, conn, path, itin, (&(a0 * b), &moved_m), h)?;
    Ok((moved.a - lifted.a * b).norm() + (moved.m - moved_m).norm())
}

/// Everything the transport command reports.
#[derive(Debug, Clone, Serialize)]
pub struct TransportSummary {
    pub chart: usize,
    pub endpoint: Vec<Vec<f64>>,
    pub moment: Vec<f64>,
    pub shadow_endpoint: Vec<f64>,
    pub shadow_residual: f64,
    pub equivariance_residual: f64,
    pub order: f64,
    pub order_steps: [f64; 3],
    pub steps: usize,
    pub itinerary: Itinerary,
}

pub const ORDER_COARSE_STEP: f64 = 0.1;

pub fn summarize(
    s: &Scenario,
    conn: &dyn Connection,
    path: &BasePath,
    itin: &Itinerary,
    start: (&Mat, &Vector),
    b: &Mat,
    h: f64,
) -> Result<TransportSummary, NumericError> {
    let lift = parallel_transport(s, conn, path, itin, start, h)?;
    let shadow = shadow_transport(s, conn, path, itin, &(start.0 * start.1), h)?;
    let c = ORDER_COARSE_STEP;
    Ok(TransportSummary {
        chart: lift.chart,
        endpoint: lift.a.row_iter().map(|r| r.iter().copied().collect()).collect(),
        moment: lift.m.iter().copied().collect(),
        shadow_endpoint: shadow.iter().copied().collect(),
        shadow_residual: (lift.shadow() - &shadow).norm(),
        equivariance_residual: equivariance_residual(s, conn, path, itin, start, b, h)?,
        order: convergence_order(s, conn, path, itin, start, c)?,
        order_steps: [c, c / 2.0, c / 4.0],
        steps: lift.steps,
        itinerary: itin.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::forms::{LinearConnection, ZeroConnection};
    use crate::connection::lie::{rotation, rotation_generator};
    use crate::connection::scenario::{so2_single, so2_two_chart};

    fn unit_j(charts: usize) -> LinearConnection {
        LinearConnection {
            coeffs: vec![vec![rotation_generator(), Mat::zeros(2, 2)]; charts],
        }
    }

    #[test]
    fn closed_form_rotation() {
        let s = so2_single();
        let path = BasePath::Line { from: vec![0.0, 0.0], to: vec![1.0, 0.0] };
        let a0 = rotation(0.4);
        let m0 = Vector::from_vec(vec![1.0, 2.0]);
        let lift = parallel_transport(&s, &unit_j(1), &path, &Itinerary::single(0), (&a0, &m0), 1e-3).unwrap();
        assert!((lift.a - rotation(-1.0) * a0).norm() < 1e-12);
        assert_eq!(lift.m, m0);
    }

    #[test]
    fn zero_connection_keeps_start() {
        let s = so2_two_chart();
        let path = BasePath::Line { from: vec![-1.0, 0.0], to: vec![-0.5, 1.0] };
        let z = ZeroConnection { n: 2, charts: 2 };
        let a0 = rotation(1.0);
        let m0 = Vector::from_vec(vec![0.5, 0.0]);
        let lift = parallel_transport(&s, &z, &path, &Itinerary::single(0), (&a0, &m0), 1e-2).unwrap();
        assert_eq!(lift.a, a0);
    }

    #[test]
    fn leaving_the_charts_is_a_domain_error() {
        let s = so2_two_chart();
        let path = BasePath::Line { from: vec![0.0, 0.0], to: vec![5.0, 0.0] };
        assert!(matches!(Itinerary::auto(&s, &path), Err(NumericError::Domain(_))));
        let z = ZeroConnection { n: 2, charts: 2 };
        let r = parallel_transport(&s, &z, &path, &Itinerary::single(0), (&rotation(0.0), &Vector::zeros(2)), 0.1);
        assert!(matches!(r, Err(NumericError::Domain(_))));
    }

    #[test]
    fn auto_itinerary_switches_in_overlap() {
        let s = so2_two_chart();
        let path = BasePath::Line { from: vec![-1.5, 0.0], to: vec![2.5, 0.0] };
        let it = Itinerary::auto(&s, &path).unwrap();
        assert_eq!(it.legs.len(), 2);
        assert_eq!((it.legs[0].chart, it.legs[1].chart), (0, 1));
        let sw = path.position(it.legs[0].until);
        assert!(s.charts[0].contains(&sw) && s.charts[1].contains(&sw));
    }

    #[test]
    fn path_json() {
        let p: BasePath = serde_json::from_str(r#"{"kind":"circle","center":[0.5,0],"radius":1}"#).unwrap();
        assert_eq!(p, BasePath::Circle { center: [0.5, 0.0], radius: 1.0, turns: 1.0, phase: 0.0 });
        let q = BasePath::Polyline { points: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]] };
        assert_eq!(q.kinks(), vec![0.5]);
        assert_eq!(q.velocity(0.75), vec![0.0, 2.0]);
        assert!((q.length() - 2.0).abs() < 1e-12);
    }
}
