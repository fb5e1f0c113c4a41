//! Normalizing constants shared by the centroid bodies and the affine energies.

use crate::spherequad::unit_ball_volume as omega;

/// `alpha_{n,p} = omega_{n+p-2} / ((n+p) omega_n omega_{p-1})`, chosen so that
/// the centroid body of the unit ball is the unit ball.
pub fn alpha_np(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    omega(nf + p - 2.0) / ((nf + p) * omega(nf) * omega(p - 1.0))
}

/// `c_{n,p} = (n omega_n)^{1/n} (n omega_n omega_{p-1} / omega_{n+p-2})^{1/p}`.
pub fn c_np(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let s = nf * omega(nf);
    s.powf(1.0 / nf) * (s * omega(p - 1.0) / omega(nf + p - 2.0)).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherequad::{SphereGrid, Scheme};

    /// `int_S |<e1,u>|^p du = 2 omega_{n+p-2} / omega_{p-1}`, checked by quadrature.
    #[test]
    fn alpha_matches_quadrature() {
        let g = SphereGrid::new(2, 4096, Scheme::UniformAngle, 0).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let q = g.integrate(|u| u[0].abs().powf(p)).unwrap();
            let nf = 2.0;
            // h(Gamma B, e1)^p = (1/(alpha V(B) (n+p))) int |u1|^p / 2 du = 1
            let h = q / 2.0 / (alpha_np(2, p) * omega(nf) * (nf + p));
            assert!((h - 1.0).abs() < 1e-6, "p={p}: {h}");
        }
        let g3 = SphereGrid::new(3, 128, Scheme::ProductGauss, 0).unwrap();
        let q = g3.integrate(|u| u[2].abs().powf(2.0)).unwrap();
        let h = q / 2.0 / (alpha_np(3, 2.0) * omega(3.0) * 5.0);
        assert!((h - 1.0).abs() < 1e-6);
    }

    #[test]
    fn c_np_closed_form() {
        // n = 2, p = 2: (2 pi)^{1/2} (2 pi * omega_1 / omega_2)^{1/2}
        let expect = (2.0 * std::f64::consts::PI).sqrt() * 2.0;
        assert!((c_np(2, 2.0) - expect).abs() < 1e-12);
    }
}
