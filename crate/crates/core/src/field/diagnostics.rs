//! Finite-difference checks of the reconstructed fields.

use super::*;

/// Fourth-order central difference.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// `(div v, d_y v^1 - d_x v^2)` at `p`.
pub fn div_curl(vel: &VelocityField, p: &FieldPoint, h: f64) -> (f64, f64) {
    let u = |a: f64, b: f64| vel.velocity_unchecked(a, b, Kernel::Periodic);
    let div = central_diff(|s| u(s, p.y)[0], p.x, h) + central_diff(|s| u(p.x, s)[1], p.y, h);
    let curl = central_diff(|s| u(p.x, s)[0], p.y, h) - central_diff(|s| u(s, p.y)[1], p.x, h);
    (div, curl)
}

/// `|v + (k/mu_i)(grad p_i + (0, rho_i g))|` at an interior point.
pub fn darcy_residual(pf: &PressureField, params: &crate::params::FluidParams, p: &FieldPoint, h: f64) -> Result<f64> {
    let i = p.region.fluid().ok_or(Error::EvaluationRefused {
        x: p.x,
        y: p.y,
        distance: p.distance,
    })?;
    let u = pf.velocity_field().velocity(p)?;
    let px = central_diff(|s| pf.pressure_unchecked(i, s, p.y), p.x, h);
    let py = central_diff(|s| pf.pressure_unchecked(i, p.x, s), p.y, h);
    let km = params.permeability / params.mu[i];
    Ok((u[0] + km * px).hypot(u[1] + km * (py + params.rho[i] * params.gravity)))
}

/// Deterministic low-discrepancy points in a box, keeping only those at
/// least `margin` away from both interfaces.
pub fn interior_probes(vel: &VelocityField, bounds: [f64; 4], count: usize, margin: f64) -> Vec<FieldPoint> {
    let [x0, x1, y0, y1] = bounds;
    let mut pts = Vec::with_capacity(count);
    let (g1, g2) = (0.754_877_666_246_692_8, 0.569_840_290_998_053_3);
    for k in 1..(count * 100 + 100) {
        if pts.len() == count {
            break;
        }
        let (u, v) = ((k as f64 * g1).fract(), (k as f64 * g2).fract());
        let p = vel.classify(x0 + (x1 - x0) * u, y0 + (y1 - y0) * v);
        if p.region != Region::NearInterface && p.distance >= margin {
            pts.push(p);
        }
    }
    pts
}
