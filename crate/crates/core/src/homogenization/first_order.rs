//! First-order approximant `u0 + eps * u1` built from strip fields.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::femcore::Evaluator;
use crate::geometry::Point;
use crate::homogenization::strip::StripEvaluator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstOrderForm {
    /// `u1 = beta0 + beta_i d_i u0`.
    Standard,
    /// `u1 = tilde_beta0 d_n u0 + beta_i d_i u0`, `d_n = -d_2` on the flat bottom.
    NormalDerivative,
}

/// Boundary-layer fields entering the approximant; `None` means identically zero.
pub struct BoundaryLayer<'a> {
    pub beta0: Option<StripEvaluator<'a>>,
    pub beta1: Option<StripEvaluator<'a>>,
    pub beta2: Option<StripEvaluator<'a>>,
    pub form: FirstOrderForm,
}

pub struct FirstOrderField<'a> {
    pub u0: &'a dyn Evaluator,
    pub layer: BoundaryLayer<'a>,
    pub epsilon: f64,
}

fn eval_opt(b: &Option<StripEvaluator<'_>>, xi: Point) -> Result<(f64, [f64; 2])> {
    match b {
        Some(e) => e.eval(xi),
        None => Ok((0.0, [0.0; 2])),
    }
}

/// `u0 + eps * u1` and its gradient; `grad u0` is piecewise constant, so
/// only the fast derivatives of the layer fields contribute.
pub fn first_order_field<'a>(u0: &'a dyn Evaluator, layer: BoundaryLayer<'a>, epsilon: f64) -> FirstOrderField<'a> {
    FirstOrderField { u0, layer, epsilon }
}

impl Evaluator for FirstOrderField<'_> {
    fn eval(&self, p: Point) -> Result<(f64, [f64; 2])> {
        let (u, g) = self.u0.eval(p)?;
        let xi = [p[0] / self.epsilon, p[1] / self.epsilon];
        let (b0, db0) = eval_opt(&self.layer.beta0, xi)?;
        let (b1, db1) = eval_opt(&self.layer.beta1, xi)?;
        let (b2, db2) = eval_opt(&self.layer.beta2, xi)?;
        let c0 = match self.layer.form {
            FirstOrderForm::Standard => 1.0,
            FirstOrderForm::NormalDerivative => -g[1],
        };
        let value = u + self.epsilon * (c0 * b0 + b1 * g[0] + b2 * g[1]);
        let grad =
            [g[0] + c0 * db0[0] + db1[0] * g[0] + db2[0] * g[1], g[1] + c0 * db0[1] + db1[1] * g[0] + db2[1] * g[1]];
        Ok((value, grad))
    }
}
