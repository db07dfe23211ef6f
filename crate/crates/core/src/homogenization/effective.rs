use crate::geometry::UnitCell;
use crate::quadrature;

/// Effective boundary data of a periodic rough boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveFlux {
    /// Arc length of one period.
    pub r: f64,
    /// Arc-length mean of `g` over one period.
    pub gbar: f64,
    /// `r * gbar`, the Neumann datum of the homogenized problem.
    pub flux: f64,
}

/// `r = ∫ sqrt(1 + gamma'^2)` and `<g> = (1/r) ∫ g sqrt(1 + gamma'^2)` over one period.
pub fn effective_flux(cell: &UnitCell, g: &dyn Fn(f64) -> f64) -> EffectiveFlux {
    let breaks = cell.breakpoints(0.0, 1.0);
    let weight = |t: f64| (1.0 + cell.derivative(t).powi(2)).sqrt();
    let r = quadrature::composite_gauss5(&breaks, weight);
    let flux = quadrature::composite_gauss5(&breaks, |t| g(t) * weight(t));
    EffectiveFlux { r, gbar: flux / r, flux }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_cell_gives_plain_mean() {
        let e = effective_flux(&UnitCell::Flat, &|t| t * t);
        assert_eq!(e.r, 1.0);
        assert!((e.gbar - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_flux_has_unit_mean() {
        let e = effective_flux(&UnitCell::cosine(0.1), &|_| 1.0);
        assert!((e.gbar - 1.0).abs() < 1e-15);
        assert!(e.r > 1.0);
    }
}
