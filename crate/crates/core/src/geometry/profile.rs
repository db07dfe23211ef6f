//! Rough boundary profiles `x2 = height(x1)` on `0 <= x1 <= 1`.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;

/// A unit-periodic cell shape `gamma(t)`, `gamma(t + 1) = gamma(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum UnitCell {
    Flat,
    /// `amplitude * (cos(2 pi (t + phase)) - 1)`.
    Cosine {
        amplitude: f64,
        phase: f64,
    },
}

impl UnitCell {
    pub fn cosine(amplitude: f64) -> Self {
        UnitCell::Cosine { amplitude, phase: 0.0 }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            UnitCell::Flat => 0.0,
            UnitCell::Cosine { amplitude, phase } => amplitude * ((2.0 * PI * (t + phase)).cos() - 1.0),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            UnitCell::Flat => 0.0,
            UnitCell::Cosine { amplitude, phase } => -2.0 * PI * amplitude * (2.0 * PI * (t + phase)).sin(),
        }
    }

    /// Translated copy, `gamma_s(t) = gamma(t + shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        match *self {
            UnitCell::Flat => UnitCell::Flat,
            UnitCell::Cosine { amplitude, phase } => UnitCell::Cosine { amplitude, phase: phase + shift },
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            UnitCell::Flat => 0.0,
            UnitCell::Cosine { amplitude, .. } => 2.0 * PI * amplitude.abs(),
        }
    }

    pub fn is_flat(&self) -> bool {
        match *self {
            UnitCell::Flat => true,
            UnitCell::Cosine { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// Panel breakpoints on [a, b] over which `gamma` is smooth and well
    /// resolved by five-point Gauss (32 panels per period).
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let panels = if self.is_flat() { 1 } else { ((b - a) * 32.0).ceil().max(1.0) as usize };
        (0..=panels).map(|k| a + (b - a) * k as f64 / panels as f64).collect()
    }
}

/// How a profile was produced. This is what gets serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSource {
    /// `height(x1) = epsilon * gamma(x1 / epsilon)`.
    Periodic { cell: UnitCell },
    /// Seeded piecewise-linear `gamma` on `m` panels;
    /// `height(x1) = scale * epsilon * (gamma(x1) - 1)`.
    Random { m: usize, seed: u64, random_abscissae: bool, scale: f64 },
    /// Explicit knots; same height rule as `Random`.
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64>, scale: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileRepr {
    epsilon: f64,
    #[serde(flatten)]
    source: ProfileSource,
}

/// The rough bottom boundary of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct BoundaryProfile {
    epsilon: f64,
    source: ProfileSource,
    knots: Vec<f64>,
    values: Vec<f64>,
    scale: f64,
}

impl TryFrom<ProfileRepr> for BoundaryProfile {
    type Error = Error;
    fn try_from(r: ProfileRepr) -> Result<Self> {
        match r.source {
            ProfileSource::Periodic { cell } => BoundaryProfile::periodic(cell, r.epsilon),
            ProfileSource::Random { m, seed, random_abscissae, scale } => {
                BoundaryProfile::random(m, seed, random_abscissae, scale, r.epsilon)
            }
            ProfileSource::PiecewiseLinear { knots, values, scale } => {
                BoundaryProfile::piecewise_linear(knots, values, scale, r.epsilon)
            }
        }
    }
}

impl From<BoundaryProfile> for ProfileRepr {
    fn from(p: BoundaryProfile) -> Self {
        ProfileRepr { epsilon: p.epsilon, source: p.source }
    }
}

/// Uniform draw in [0, 1) from the top 53 bits of the generator output.
fn uniform01(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl BoundaryProfile {
    pub fn periodic(cell: UnitCell, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(BoundaryProfile {
            epsilon,
            source: ProfileSource::Periodic { cell },
            knots: Vec::new(),
            values: Vec::new(),
            scale: 1.0,
        })
    }

    pub fn flat() -> Self {
        BoundaryProfile::periodic(UnitCell::Flat, 1.0).expect("valid flat profile")
    }

    /// Seeded random piecewise-linear profile. The generator is PCG-64
    /// (XSL-RR 128/64) seeded through `seed_from_u64`; abscissae are drawn
    /// first (when requested), then the `m + 1` knot values.
    pub fn random(m: usize, seed: u64, random_abscissae: bool, scale: f64, epsilon: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Parameter(format!("random profile needs at least 2 panels, got {m}")));
        }
        if !(scale > 0.0) {
            return Err(Error::Parameter(format!("scale must be positive, got {scale}")));
        }
        let mut rng = Pcg64::seed_from_u64(seed);
        let knots = if random_abscissae {
            let mut inner: Vec<f64> = Vec::with_capacity(m - 1);
            while inner.len() < m - 1 {
                let s = uniform01(&mut rng);
                if s > 0.0 && !inner.contains(&s) {
                    inner.push(s);
                }
            }
            inner.sort_by(|a, b| a.total_cmp(b));
            let mut k = Vec::with_capacity(m + 1);
            k.push(0.0);
            k.extend(inner);
            k.push(1.0);
            k
        } else {
            (0..=m).map(|i| i as f64 / m as f64).collect()
        };
        let values = (0..=m).map(|_| uniform01(&mut rng)).collect();
        let mut p = BoundaryProfile::piecewise_linear(knots, values, scale, epsilon)?;
        p.source = ProfileSource::Random { m, seed, random_abscissae, scale };
        Ok(p)
    }

    pub fn piecewise_linear(knots: Vec<f64>, values: Vec<f64>, scale: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::Parameter("knots and values must have equal length >= 2".into()));
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
            return Err(Error::Parameter("knots must start at 0 and end at 1".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("knots must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Parameter("knot values must lie in [0, 1]".into()));
        }
        Ok(BoundaryProfile {
            epsilon,
            source: ProfileSource::PiecewiseLinear { knots: knots.clone(), values: values.clone(), scale },
            knots,
            values,
            scale,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn source(&self) -> &ProfileSource {
        &self.source
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot_values(&self) -> &[f64] {
        &self.values
    }

    /// The unit cell for periodic profiles.
    pub fn cell(&self) -> Option<UnitCell> {
        match self.source {
            ProfileSource::Periodic { cell } => Some(cell),
            _ => None,
        }
    }

    pub fn is_flat(&self) -> bool {
        match self.source {
            ProfileSource::Periodic { cell } => cell.is_flat(),
            _ => self.values.iter().all(|&v| v == 1.0),
        }
    }

    /// Height of the rough boundary at `x1`; rejects points outside [0, 1].
    pub fn eval(&self, x1: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x1) {
            return Err(Error::Domain(format!("x1 = {x1} outside [0, 1]")));
        }
        Ok(self.height(x1))
    }

    /// Height without the domain check; piecewise-linear profiles are
    /// extended by their end values.
    pub fn height(&self, x1: f64) -> f64 {
        match self.source {
            ProfileSource::Periodic { cell } => self.epsilon * cell.value(x1 / self.epsilon),
            _ => {
                let (i, t) = self.panel(x1);
                let g = self.values[i] + t * (self.values[i + 1] - self.values[i]);
                self.scale * self.epsilon * (g - 1.0)
            }
        }
    }

    /// d(height)/dx1; right-sided at piecewise-linear knots.
    pub fn slope(&self, x1: f64) -> f64 {
        match self.source {
            ProfileSource::Periodic { cell } => cell.derivative(x1 / self.epsilon),
            _ => {
                let (i, _) = self.panel(x1);
                let ds = self.knots[i + 1] - self.knots[i];
                self.scale * self.epsilon * (self.values[i + 1] - self.values[i]) / ds
            }
        }
    }

    fn panel(&self, x1: f64) -> (usize, f64) {
        let k = &self.knots;
        let x = x1.clamp(0.0, 1.0);
        let i = match k.binary_search_by(|s| s.total_cmp(&x)) {
            Ok(i) => i.min(k.len() - 2),
            Err(i) => i.saturating_sub(1).min(k.len() - 2),
        };
        (i, (x - k[i]) / (k[i + 1] - k[i]))
    }

    /// ess-sup |d(height)/dx1|.
    pub fn lipschitz(&self) -> f64 {
        match self.source {
            ProfileSource::Periodic { cell } => cell.lipschitz(),
            _ => (0..self.knots.len() - 1)
                .map(|i| {
                    self.scale * self.epsilon * (self.values[i + 1] - self.values[i]).abs()
                        / (self.knots[i + 1] - self.knots[i])
                })
                .fold(0.0, f64::max),
        }
    }

    /// Quadrature panel breakpoints on [a, b] over which the height is smooth.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        match self.source {
            ProfileSource::Periodic { cell } => {
                let local = cell.breakpoints(a / self.epsilon, b / self.epsilon);
                local.into_iter().map(|t| t * self.epsilon).collect()
            }
            _ => {
                let mut pts = vec![a];
                pts.extend(self.knots.iter().copied().filter(|&s| s > a && s < b));
                pts.push(b);
                pts
            }
        }
    }

    /// Mean arc-length density of the boundary over (a, b); always >= 1.
    pub fn arc_length_ratio(&self, a: f64, b: f64) -> Result<f64> {
        if !(a < b) {
            return Err(Error::Parameter(format!("empty interval ({a}, {b})")));
        }
        let breaks = self.breakpoints(a, b);
        let len = quadrature::composite_gauss5(&breaks, |x| (1.0 + self.slope(x).powi(2)).sqrt());
        Ok(len / (b - a))
    }

    /// ∫_a^b height(x1) dx1.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        quadrature::composite_gauss5(&self.breakpoints(a, b), |x| self.height(x))
    }

    /// Stable textual key used for caching.
    pub fn cache_key(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_profile(eps: f64) -> BoundaryProfile {
        BoundaryProfile::periodic(UnitCell::cosine(0.1), eps).unwrap()
    }

    #[test]
    fn periodic_height_values() {
        let eps = 1.0 / 128.0;
        let p = paper_profile(eps);
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
        assert!((p.eval(eps / 2.0).unwrap() + 1.0 / 640.0).abs() < 1e-15);
        assert!(matches!(p.eval(1.5), Err(Error::Domain(_))));
        assert!(matches!(p.eval(-1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn cell_is_periodic() {
        let c = UnitCell::Cosine { amplitude: 0.1, phase: 0.3 };
        for k in 0..50 {
            let t = k as f64 * 0.137;
            assert!((c.value(t + 1.0) - c.value(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_knots_give_zero_height() {
        let p = BoundaryProfile::piecewise_linear(vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![1.0; 5], 0.1, 0.25).unwrap();
        for k in 0..=40 {
            assert_eq!(p.eval(k as f64 / 40.0).unwrap(), 0.0);
        }
        assert!(p.is_flat());
    }

    #[test]
    fn random_profile_shapes() {
        let p = BoundaryProfile::random(128, 42, false, 0.1, 1.0 / 128.0).unwrap();
        assert_eq!(p.knots().len(), 129);
        assert!(p.knot_values().iter().all(|v| (0.0..=1.0).contains(v)));
        for (i, s) in p.knots().iter().enumerate() {
            assert_eq!(*s, i as f64 / 128.0);
        }

        let q = BoundaryProfile::random(2, 7, false, 1.0, 0.25).unwrap();
        assert_eq!(q.knots(), &[0.0, 0.5, 1.0]);

        let r = BoundaryProfile::random(128, 42, true, 1.0, 1.0 / 128.0).unwrap();
        assert_eq!(r.knots()[0], 0.0);
        assert_eq!(*r.knots().last().unwrap(), 1.0);
        assert!(r.knots().windows(2).all(|w| w[1] > w[0]));

        assert!(matches!(BoundaryProfile::random(1, 0, false, 1.0, 0.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn random_profile_is_reproducible() {
        let a = BoundaryProfile::random(64, 9, true, 1.0, 1.0 / 64.0).unwrap();
        let b = BoundaryProfile::random(64, 9, true, 1.0, 1.0 / 64.0).unwrap();
        for k in 0..=500 {
            let x = k as f64 / 500.0;
            assert_eq!(a.height(x).to_bits(), b.height(x).to_bits());
        }
        let c = BoundaryProfile::random(64, 10, true, 1.0, 1.0 / 64.0).unwrap();
        assert_ne!(a.knot_values(), c.knot_values());
    }

    #[test]
    fn arc_length_ratio_cases() {
        let flat = BoundaryProfile::flat();
        assert_eq!(flat.arc_length_ratio(0.0, 1.0).unwrap(), 1.0);

        // sawtooth with |slope| = 1: scale * eps = 1, values alternate 0, 1/4
        let saw = BoundaryProfile::piecewise_linear(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![0.0, 0.25, 0.0, 0.25, 0.0],
            1.0,
            1.0,
        )
        .unwrap();
        assert!((saw.arc_length_ratio(0.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((saw.arc_length_ratio(0.1, 0.6).unwrap() - 2f64.sqrt()).abs() < 1e-14);

        assert!(matches!(flat.arc_length_ratio(0.5, 0.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn arc_length_ratio_is_additive() {
        let p = paper_profile(1.0 / 16.0);
        let (a, c, b) = (0.05, 0.31, 0.83);
        let whole = p.arc_length_ratio(a, b).unwrap() * (b - a);
        let parts = p.arc_length_ratio(a, c).unwrap() * (c - a) + p.arc_length_ratio(c, b).unwrap() * (b - c);
        assert!((whole - parts).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_bounds() {
        assert!((paper_profile(0.1).lipschitz() - 0.2 * PI).abs() < 1e-15);
        let saw = BoundaryProfile::piecewise_linear(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(saw.lipschitz(), 1.0);
    }

    #[test]
    fn json_round_trip_regenerates_random_profile() {
        let p = BoundaryProfile::random(32, 5, true, 1.0, 1.0 / 32.0).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"kind\":\"random\""));
        assert!(!s.contains("knots"));
        let q: BoundaryProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
