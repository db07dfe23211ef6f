//! Problem data of the numerical examples.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryProfile, UnitCell};
use crate::harness::config::Case;
use crate::homogenization::PeriodicFn;
use crate::msfem::{FluxSpec, ModelData};

/// Unit cell of the periodic examples: `gamma(t) = (cos 2 pi t - 1) / 10`.
pub fn example_cell() -> UnitCell {
    UnitCell::cosine(0.1)
}

#[derive(Clone)]
pub struct CaseSetup {
    pub profile: BoundaryProfile,
    pub data: ModelData,
    /// Periodic flux `g(t)` with `g_eps(x1) = g(x1 / eps)`, for periodic cases.
    pub g_periodic: Option<PeriodicFn>,
    /// Identifies the data (not the geometry) in cache keys.
    pub label: String,
}

fn model(
    f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    flux: FluxSpec,
    dirichlet: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
) -> ModelData {
    ModelData { f: Arc::new(f), flux, dirichlet: Arc::new(dirichlet) }
}

/// `sign(1/2 - x1)`.
pub fn sign_half(x: [f64; 2]) -> f64 {
    if x[0] < 0.5 {
        1.0
    } else if x[0] > 0.5 {
        -1.0
    } else {
        0.0
    }
}

/// Geometry and data of `case` at roughness `eps`. `COND` uses the EX4
/// setup and `HOMOG_RATES` the EX1 setup.
pub fn case_setup(case: Case, eps: f64, seed: u64) -> Result<CaseSetup> {
    let m = (1.0 / eps).round() as usize;
    Ok(match case {
        Case::Ex1 | Case::HomogRates => CaseSetup {
            profile: BoundaryProfile::periodic(example_cell(), eps)?,
            data: model(|_| 1.0, FluxSpec::zero(eps), |_| 0.0),
            g_periodic: Some(Arc::new(|_| 0.0)),
            label: "f=1;g=0;u=0".into(),
        },
        Case::Ex2 => {
            let g = move |x: [f64; 2]| 0.5 * (1.0 - (2.0 * PI * x[0] / eps).cos());
            CaseSetup {
                profile: BoundaryProfile::periodic(example_cell(), eps)?,
                data: model(|_| 0.0, FluxSpec::new(g, "g=(1-cos(2 pi x1/eps))/2", eps), |x| 0.5 * (1.0 - x[1])),
                g_periodic: Some(Arc::new(|t| 0.5 * (1.0 - (2.0 * PI * t).cos()))),
                label: "f=0;g=(1-cos)/2;u=(1-x2)/2".into(),
            }
        }
        Case::Ex3 => CaseSetup {
            profile: BoundaryProfile::random(m, seed, false, 0.1, eps)?,
            data: model(|_| 1.0, FluxSpec::zero(eps), |_| 0.0),
            g_periodic: None,
            label: "f=1;g=0;u=0".into(),
        },
        Case::Ex4 | Case::Cond => CaseSetup {
            profile: BoundaryProfile::random(m, seed, true, 1.0, eps)?,
            data: model(sign_half, FluxSpec::zero(eps), |_| 0.0),
            g_periodic: None,
            label: "f=sign(1/2-x1);g=0;u=0".into(),
        },
    })
    .and_then(|s: CaseSetup| if m == 0 { Err(Error::Parameter("epsilon too large".into())) } else { Ok(s) })
}
