use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// Periodic cosine roughness, `f = 1`, `g = 0`.
    #[serde(rename = "EX1")]
    Ex1,
    /// Same geometry, oscillating flux and inhomogeneous Dirichlet data.
    #[serde(rename = "EX2")]
    Ex2,
    /// Seeded random roughness on uniform knots, scale 1/10.
    #[serde(rename = "EX3")]
    Ex3,
    /// Seeded random roughness on random knots, discontinuous source.
    #[serde(rename = "EX4")]
    Ex4,
    /// Condition numbers of the MsFEM systems in the EX4 setup.
    #[serde(rename = "COND")]
    Cond,
    /// Zeroth- and first-order homogenization errors over several epsilon.
    #[serde(rename = "HOMOG_RATES")]
    HomogRates,
}

impl Case {
    pub const ALL: [Case; 6] = [Case::Ex1, Case::Ex2, Case::Ex3, Case::Ex4, Case::Cond, Case::HomogRates];

    pub fn as_str(self) -> &'static str {
        match self {
            Case::Ex1 => "EX1",
            Case::Ex2 => "EX2",
            Case::Ex3 => "EX3",
            Case::Ex4 => "EX4",
            Case::Cond => "COND",
            Case::HomogRates => "HOMOG_RATES",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase().replace('-', "_");
        Case::ALL.into_iter().find(|c| c.as_str() == up).ok_or_else(|| {
            Error::Parameter(format!("unknown case `{s}` (expected one of EX1, EX2, EX3, EX4, COND, HOMOG_RATES)"))
        })
    }
}

/// Everything that determines an experiment run. Serialized verbatim into
/// the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub case: Case,
    pub epsilon: f64,
    /// Coarse divisions, strictly increasing.
    pub n_list: Vec<usize>,
    /// Subgrid size; `None` means `epsilon / 20`.
    pub htilde: Option<f64>,
    /// Reference mesh size; `None` means `epsilon / 10`.
    pub hfine: Option<f64>,
    pub seed: u64,
    pub cg_tol: f64,
    /// Relative accuracy of the condition-number estimate.
    pub cond_tol: f64,
    /// Epsilon values of the homogenization-rate study.
    pub eps_list: Vec<f64>,
    /// Strip truncation height `L`.
    pub strip_height: f64,
    /// Strip columns per period.
    pub strip_cols: usize,
    pub output: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub mode: ExecMode,
    /// Record wall times; disable for byte-reproducible CSVs.
    pub timings: bool,
    /// Also solve the reference at `2 hfine` and log the two-level estimate
    /// of the reference error.
    pub reference_check: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            case: Case::Ex1,
            epsilon: 1.0 / 64.0,
            n_list: vec![5, 10, 20, 40],
            htilde: None,
            hfine: None,
            seed: 42,
            cg_tol: 1e-10,
            cond_tol: 1e-3,
            eps_list: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
            strip_height: 5.0,
            strip_cols: 64,
            output: None,
            cache: None,
            mode: ExecMode::Parallel,
            timings: true,
            reference_check: false,
        }
    }
}

impl ExperimentConfig {
    pub fn for_case(case: Case) -> Self {
        ExperimentConfig { case, ..Default::default() }
    }

    /// Larger runs closer to the published scale: epsilon 1/128, a 1e-3
    /// reference mesh with the two-level check, and h down to 1/160 for EX1.
    /// Too slow and memory hungry for CI.
    pub fn paper_scale(case: Case) -> Self {
        let n_list = match case {
            Case::Ex1 => vec![5, 10, 20, 40, 80, 160],
            Case::Cond => vec![5, 10, 20, 40],
            _ => vec![5, 10, 20, 40, 80],
        };
        ExperimentConfig {
            case,
            epsilon: 1.0 / 128.0,
            n_list,
            hfine: Some(1e-3),
            eps_list: vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0],
            reference_check: true,
            ..Default::default()
        }
    }

    pub fn htilde_for(&self, eps: f64) -> f64 {
        self.htilde.unwrap_or(eps / 20.0)
    }

    pub fn hfine_for(&self, eps: f64) -> f64 {
        self.hfine.unwrap_or(eps / 10.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad(format!("epsilon must lie in (0, 1], got {}", self.epsilon));
        }
        if self.case == Case::HomogRates {
            if self.eps_list.len() < 3 || self.eps_list.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
                return bad("homogenization rates need at least three epsilon values in (0, 1]".into());
            }
        } else {
            if self.n_list.is_empty() {
                return bad("empty N list".into());
            }
            if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("N list must be strictly increasing, got {:?}", self.n_list));
            }
            if self.n_list[0] < 2 {
                return bad("coarse meshes need N >= 2".into());
            }
        }
        for (name, v) in [("htilde", self.htilde), ("hfine", self.hfine)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return bad(format!("{name} must be positive"));
                }
            }
        }
        if !(self.cg_tol > 0.0 && self.cond_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.strip_height >= 1.0) || self.strip_cols < 2 {
            return bad("strip needs height >= 1 and at least two columns".into());
        }
        Ok(())
    }
}
