//! Integral identities satisfied by the interface traces of any sheet velocity.

use super::*;

/// Values of the three identities and the integrated magnitude of their terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RellichResiduals {
    pub residuals: [f64; 3],
    pub scales: [f64; 3],
}

impl RellichResiduals {
    pub fn relative(&self) -> [f64; 3] {
        let mut r = [0.0; 3];
        for i in 0..3 {
            r[i] = if self.residuals[i] == 0.0 {
                0.0
            } else {
                self.residuals[i].abs() / self.scales[i].max(f64::MIN_POSITIVE)
            };
        }
        r
    }

    pub fn max_relative(&self) -> f64 {
        self.relative().into_iter().fold(0.0, f64::max)
    }
}

/// Signed integral and magnitude of
/// `[(A + s w)^2 - 2u'B(A + s w) - B^2] / (1 + u'^2)`.
fn quadratic_form(a: &[f64], b: &[f64], w: &[f64], up: &[f64], s: f64, dx: f64) -> (f64, f64) {
    let mut val = 0.0;
    let mut mag = 0.0;
    for i in 0..a.len() {
        let t = a[i] + s * w[i];
        let n = 1.0 + up[i] * up[i];
        let terms = [t * t, -2.0 * up[i] * b[i] * t, -b[i] * b[i]];
        val += terms.iter().sum::<f64>() / n;
        mag += terms.iter().map(|v| v.abs()).sum::<f64>() / n;
    }
    (val * dx, mag * dx)
}

/// The three identities for `(X, w)`. The periodic images add the constant
/// far-field velocity `-(M_1 + M_2) / 2L` above and below the strip, which
/// contributes `(M_1 + M_2)^2 / 2L` to the outer two.
pub fn rellich_residuals(x: &InterfaceState, w: &VorticityDensity) -> Result<RellichResiduals> {
    let (a1, a2) = apply_block_operator(Which::CalA, x, w)?;
    let (b1, b2) = apply_block_operator(Which::CalB, x, w)?;
    let g = *x.grid();
    let dx = g.dx();
    let (w1, w2) = (w.w1.values(), w.w2.values());
    let upper_minus = quadratic_form(a1.values(), b1.values(), w1, x.fp(), -1.0, dx);
    let upper_plus = quadratic_form(a1.values(), b1.values(), w1, x.fp(), 1.0, dx);
    let lower_minus = quadratic_form(a2.values(), b2.values(), w2, x.hp(), -1.0, dx);
    let lower_plus = quadratic_form(a2.values(), b2.values(), w2, x.hp(), 1.0, dx);
    let m: f64 = w1.iter().chain(w2).sum::<f64>() * dx;
    let far = m * m / (2.0 * g.half_length());
    Ok(RellichResiduals {
        residuals: [
            upper_minus.0 - far,
            upper_plus.0 - lower_minus.0,
            lower_plus.0 - far,
        ],
        scales: [
            upper_minus.1 + far,
            upper_plus.1 + lower_minus.1,
            lower_plus.1 + far,
        ],
    })
}
