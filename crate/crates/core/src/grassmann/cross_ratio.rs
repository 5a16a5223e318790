use super::photon::ExtReal;
use super::{is_transverse, GrassmannContext, Plane};
use crate::error::{Error, Result};
use crate::numerics::hstack;

fn det2(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Cross ratio on the projective line, normalized so that `(0, 1, t, ∞) = t`:
/// `((c−a)(d−b)) / ((b−a)(d−c))`, with the usual limits at ∞.
pub fn cross_ratio_proj(a: ExtReal, b: ExtReal, c: ExtReal, d: ExtReal) -> Result<ExtReal> {
    let pts = [a, b, c, d];
    let mut distinct: Vec<ExtReal> = Vec::with_capacity(4);
    for p in pts {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    if distinct.len() < 3 {
        return Err(Error::DegenerateQuadruple);
    }
    let (a, b, c, d) = (a.homogeneous(), b.homogeneous(), c.homogeneous(), d.homogeneous());
    let num = det2(a, c) * det2(b, d);
    let den = det2(a, b) * det2(c, d);
    if den == 0.0 {
        return Ok(ExtReal::Infinity);
    }
    Ok(ExtReal::Finite(num / den))
}

/// Same cross ratio for points `[cos θ : sin θ]` given by their angles.
pub(crate) fn cross_ratio_angles(a: f64, b: f64, c: f64, d: f64) -> f64 {
    ((c - a).sin() * (d - b).sin()) / ((b - a).sin() * (d - c).sin())
}

fn det_pair(z: &Plane, zeta: &Plane) -> f64 {
    hstack(z.basis(), zeta.basis()).determinant()
}

/// Flag cross ratio `det[x|ξ]·det[y|η] / (det[y|ξ]·det[x|η])` of two p-planes
/// and two q-planes, using orthonormal representatives.
pub fn cross_ratio_flag(ctx: &GrassmannContext, xi: &Plane, x: &Plane, y: &Plane, eta: &Plane) -> Result<f64> {
    for (name, z, zeta) in [("(x, xi)", x, xi), ("(y, xi)", y, xi), ("(x, eta)", x, eta), ("(y, eta)", y, eta)] {
        if !is_transverse(ctx, z, zeta)? {
            return Err(Error::NonTransverseConfiguration { pair: name.to_string() });
        }
    }
    Ok(det_pair(x, xi) * det_pair(y, eta) / (det_pair(y, xi) * det_pair(x, eta)))
}

/// `log|det[x|ξ]| − log|det[y|ξ]|`; the flag cross ratio factors as
/// `exp(h(ξ) − h(η))` in absolute value.
pub(crate) fn log_det_ratio(x: &Plane, y: &Plane, xi: &Plane) -> f64 {
    det_pair(x, xi).abs().ln() - det_pair(y, xi).abs().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExtReal::{Finite, Infinity};

    #[test]
    fn normalization_and_examples() {
        let t = cross_ratio_proj(Finite(0.0), Finite(1.0), Finite(7.0), Infinity).unwrap();
        assert_eq!(t, Finite(7.0));
        let one = cross_ratio_proj(Finite(-2.0), Finite(0.5), Finite(0.5), Finite(4.0)).unwrap();
        assert_eq!(one, Finite(1.0));
        match cross_ratio_proj(Finite(-1.0), Finite(0.0), Finite(0.5), Finite(1.0)).unwrap() {
            Finite(v) => assert!((v - 3.0).abs() < 1e-15),
            Infinity => panic!(),
        }
        assert_eq!(
            cross_ratio_proj(Finite(1.0), Finite(1.0), Finite(2.0), Finite(2.0)).unwrap_err(),
            Error::DegenerateQuadruple
        );
    }

    #[test]
    fn angle_form_matches() {
        let pts = [Finite(-1.0), Finite(0.0), Finite(0.5), Finite(1.0)];
        let th: Vec<f64> = pts.iter().map(|p| p.to_angle()).collect();
        assert!((cross_ratio_angles(th[0], th[1], th[2], th[3]) - 3.0).abs() < 1e-14);
        // shifting a point by π does not change the class
        let shifted = cross_ratio_angles(th[0] + std::f64::consts::PI, th[1], th[2], th[3]);
        assert!((shifted - 3.0).abs() < 1e-13);
    }

    #[test]
    fn flag_cross_ratio_two_by_two() {
        let ctx = GrassmannContext::new(1, 1).unwrap();
        let (s1, s2) = (0.7, -2.5);
        let x = Plane::from_columns(2, &[vec![1.0, s1]], &ctx.tol).unwrap();
        let y = Plane::from_columns(2, &[vec![1.0, s2]], &ctx.tol).unwrap();
        let xi = Plane::coordinate(2, &[1]);
        let eta = Plane::coordinate(2, &[0]);
        let v = cross_ratio_flag(&ctx, &xi, &x, &y, &eta).unwrap();
        assert!((v - s2 / s1).abs() < 1e-12, "{v}");
        let w = cross_ratio_flag(&ctx, &eta, &x, &y, &xi).unwrap();
        assert!((v * w - 1.0).abs() < 1e-12);
        assert!((cross_ratio_flag(&ctx, &xi, &x, &x, &eta).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flag_cross_ratio_names_bad_pair() {
        let ctx = GrassmannContext::new(1, 1).unwrap();
        let x = Plane::coordinate(2, &[0]);
        let y = Plane::from_columns(2, &[vec![1.0, 1.0]], &ctx.tol).unwrap();
        let err = cross_ratio_flag(&ctx, &Plane::coordinate(2, &[1]), &x, &y, &Plane::coordinate(2, &[0])).unwrap_err();
        assert_eq!(err, Error::NonTransverseConfiguration { pair: "(x, eta)".into() });
    }
}
