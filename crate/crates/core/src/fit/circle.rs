use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::result::{param, FitResult};
use crate::optim::{levenberg_marquardt, LmOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct CircleFit {
    pub center: Complex64,
    pub radius: f64,
    pub fit: FitResult,
}

/// Pratt algebraic circle `A(x²+y²) + Bx + Cy + D = 0` on centred, scaled
/// points, returned as (centre, radius).
fn pratt(u: &[f64], v: &[f64]) -> Result<(f64, f64, f64)> {
    let n = u.len() as f64;
    let mut m = Matrix4::<f64>::zeros();
    for (&x, &y) in u.iter().zip(v) {
        let row = Vector4::new(x * x + y * y, x, y, 1.0);
        m += row * row.transpose();
    }
    m /= n;
    let b = Matrix4::new(
        0.0, 0.0, 0.0, -2.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        -2.0, 0.0, 0.0, 0.0,
    );
    let eig = SymmetricEigen::new(m);
    let (imin, lmin) = eig.eigenvalues.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &l)| if l < b.1 { (i, l) } else { b });
    let lmax = eig.eigenvalues.amax();
    let a = if lmin <= 1e-12 * lmax {
        // points lie exactly on a conic of the family
        eig.eigenvectors.column(imin).into_owned()
    } else {
        // M a = η B a  ⇔  (L⁻¹ B L⁻ᵀ) w = (1/η) w  with a = L⁻ᵀ w
        let chol = m.cholesky().ok_or_else(|| Error::Degenerate("moment matrix is not positive definite".into()))?;
        let l = chol.l();
        let linv = l.try_inverse().ok_or_else(|| Error::Degenerate("moment matrix is singular".into()))?;
        let c = linv * b * linv.transpose();
        let ce = SymmetricEigen::new((c + c.transpose()) * 0.5);
        let (imax, mu) = ce.eigenvalues.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &l)| if l > b.1 { (i, l) } else { b });
        if !(mu > 0.0) {
            return Err(Error::Degenerate("no admissible circle".into()));
        }
        linv.transpose() * ce.eigenvectors.column(imax)
    };
    let (aa, bb, cc, dd) = (a[0], a[1], a[2], a[3]);
    let disc = bb * bb + cc * cc - 4.0 * aa * dd;
    if aa.abs() <= 1e-9 * disc.abs().sqrt() || disc <= 0.0 {
        return Err(Error::Degenerate("points are collinear".into()));
    }
    Ok((-bb / (2.0 * aa), -cc / (2.0 * aa), disc.sqrt() / (2.0 * aa.abs())))
}

/// Circle through complex IQ samples: algebraic (Pratt) estimate refined by
/// geometric least squares.
pub fn circle_fit(points: &[Complex64]) -> Result<CircleFit> {
    if points.len() < 5 {
        return Err(Error::InsufficientSamples { needed: 5, got: points.len() });
    }
    if points.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::invalid("IQ points must be finite"));
    }
    let n = points.len() as f64;
    let mean = points.iter().sum::<Complex64>() / n;
    let scale = (points.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n).sqrt();
    if !(scale > 1e-12 * (1.0 + mean.norm())) {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let u: Vec<f64> = points.iter().map(|z| (z.re - mean.re) / scale).collect();
    let v: Vec<f64> = points.iter().map(|z| (z.im - mean.im) / scale).collect();
    let (xc, yc, r) = pratt(&u, &v)?;
    if r > 1e6 {
        return Err(Error::Degenerate("points are collinear".into()));
    }

    let residuals = |p: &[f64]| u.iter().zip(&v).map(|(x, y)| (x - p[0]).hypot(y - p[1]) - p[2]).collect::<Vec<_>>();
    let rep = levenberg_marquardt(residuals, &[xc, yc, r], &LmOptions::default())?;
    if !rep.converged {
        return Err(Error::NotConverged(rep.n_iter));
    }
    let center = mean + Complex64::new(rep.x[0], rep.x[1]) * scale;
    let radius = rep.x[2].abs() * scale;
    let fit = FitResult {
        residual_norm: rep.residual_norm * scale,
        ..FitResult::from_report(
            &rep,
            vec![
                param("center_re", center.re, rep.stderr[0] * scale),
                param("center_im", center.im, rep.stderr[1] * scale),
                param("radius", radius, rep.stderr[2] * scale),
            ],
        )
    };
    Ok(CircleFit { center, radius, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices;
    use crate::freq::{linspace, reflection_weak};
    use proptest::prelude::*;

    fn weak_points(atom: &crate::AtomParams) -> Vec<Complex64> {
        let g = atom.gamma_10();
        linspace(-5.0 * g, 5.0 * g, 101).into_iter().map(|d| reflection_weak(atom, d)).collect()
    }

    #[test]
    fn unit_circle() {
        let pts: Vec<Complex64> = (0..12).map(|k| Complex64::from_polar(1.0, k as f64 * 0.5)).collect();
        let c = circle_fit(&pts).unwrap();
        assert!(c.center.norm() < 1e-12);
        assert!((c.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn device_circles() {
        for (atom, diameter) in [(devices::device2(), 2.316 / 1.176), (devices::device1a(), 6.96 / 11.8)] {
            let c = circle_fit(&weak_points(&atom)).unwrap();
            let half = diameter / 2.0;
            assert!((c.radius - half).abs() <= 1e-9 * half);
            assert!((c.center.re - (1.0 - half)).abs() <= 1e-9);
            assert!(c.center.im.abs() <= 1e-9);
        }
        let d = 2.0 * circle_fit(&weak_points(&devices::device2())).unwrap().radius;
        assert!((d - 1.969).abs() < 1e-3);
        let d = 2.0 * circle_fit(&weak_points(&devices::device1a())).unwrap().radius;
        assert!((d - 0.590).abs() < 1e-3);
    }

    #[test]
    fn short_arc_still_fits() {
        let atom = devices::device2();
        let g = atom.gamma_10();
        let pts: Vec<Complex64> = linspace(0.5 * g, 3.0 * g, 30).into_iter().map(|d| reflection_weak(&atom, d)).collect();
        let c = circle_fit(&pts).unwrap();
        assert!((c.radius - 2.316 / 1.176 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        let line: Vec<Complex64> = (0..10).map(|k| Complex64::new(k as f64, 2.0 * k as f64 + 1.0)).collect();
        assert!(matches!(circle_fit(&line), Err(Error::Degenerate(_))));
        let same = vec![Complex64::new(0.3, 0.1); 8];
        assert!(matches!(circle_fit(&same), Err(Error::Degenerate(_))));
        assert!(matches!(circle_fit(&line[..4]), Err(Error::InsufficientSamples { .. })));
    }

    proptest! {
        #[test]
        fn rigid_motion_invariance(theta in 0.0f64..std::f64::consts::TAU, tx in -3.0f64..3.0, ty in -3.0f64..3.0) {
            let pts = weak_points(&devices::device1b());
            let base = circle_fit(&pts).unwrap();
            let rot = Complex64::from_polar(1.0, theta);
            let shift = Complex64::new(tx, ty);
            let moved: Vec<Complex64> = pts.iter().map(|z| z * rot + shift).collect();
            let c = circle_fit(&moved).unwrap();
            let back = (c.center - shift) / rot;
            prop_assert!((back - base.center).norm() < 1e-9);
            prop_assert!((c.radius - base.radius).abs() < 1e-9);
        }
    }
}
