//! Derivative-free maximization for smooth, unimodal objectives.

use crate::error::{SimError, SimResult};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location and value of a maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> SimResult<Maximum> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(SimError::invalid(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(SimError::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    Ok(Maximum { x, value: f(x) })
}

/// Maximum of a two-parameter objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum2 {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Grid scan over `[x0, x1] × [y0, y1]` followed by alternating golden-section
/// refinement inside the winning cell. Non-finite objective values are
/// treated as `−∞`.
pub fn grid_refine_max<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    points: usize,
    tol: f64,
) -> SimResult<Maximum2> {
    if points < 2 {
        return Err(SimError::invalid("grid needs at least two points per axis"));
    }
    if !(x1 > x0 && y1 > y0) {
        return Err(SimError::invalid(format!("invalid box [{x0}, {x1}] × [{y0}, {y1}]")));
    }
    let mut g = |x: f64, y: f64| {
        let v = f(x, y);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let hx = (x1 - x0) / (points - 1) as f64;
    let hy = (y1 - y0) / (points - 1) as f64;
    let mut best = Maximum2 { x: x0, y: y0, value: f64::NEG_INFINITY };
    for i in 0..points {
        for j in 0..points {
            let (x, y) = (x0 + i as f64 * hx, y0 + j as f64 * hy);
            let v = g(x, y);
            if v > best.value {
                best = Maximum2 { x, y, value: v };
            }
        }
    }
    for _ in 0..8 {
        let prev = best.value;
        let y = best.y;
        let mx = golden_section_max(|x| g(x, y), (best.x - hx).max(x0), (best.x + hx).min(x1), tol)?;
        if mx.value > best.value {
            best = Maximum2 { x: mx.x, y, value: mx.value };
        }
        let x = best.x;
        let my = golden_section_max(|y| g(x, y), (best.y - hy).max(y0), (best.y + hy).min(y1), tol)?;
        if my.value > best.value {
            best = Maximum2 { x, y: my.x, value: my.value };
        }
        if best.value - prev <= 1e-15 * best.value.abs().max(1.0) {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let m = golden_section_max(|x| -(x - 0.3).powi(2) + 2.0, -1.0, 2.0, 1e-10).unwrap();
        // value comparisons resolve a flat peak only to ~√ε in x
        assert!((m.x - 0.3).abs() < 1e-7);
        assert!((m.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bad_bracket() {
        assert!(golden_section_max(|x| x, 1.0, 1.0, 1e-6).is_err());
        assert!(golden_section_max(|x| x, 2.0, 1.0, 1e-6).is_err());
        assert!(golden_section_max(|x| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn boundary_maximum() {
        let m = golden_section_max(|x| x, 0.0, 1.0, 1e-9).unwrap();
        assert!((m.x - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_dimensional() {
        let f = |x: f64, y: f64| (x - 0.4).cos() * (2.0 * (y + 0.2)).cos();
        let m = grid_refine_max(f, (-1.0, 1.0), (-1.0, 1.0), 21, 1e-10).unwrap();
        assert!((m.x - 0.4).abs() < 1e-6 && (m.y + 0.2).abs() < 1e-6);
        assert!((m.value - 1.0).abs() < 1e-12);
    }
}
