/// Elementary charge in coulombs (exact, SI 2019).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Default variance of each vacuum quadrature, so that `<x^2 + y^2> = 1/2`.
pub const VACUUM_QUADRATURE_VARIANCE: f64 = 0.25;
