//! Complex coordinate stretching and the PML-modified weak-form coefficients.
//!
//! Every direction carries a cubic ramp `g(t) = sigma * t^3` starting at a
//! grid node. With `gamma = 1 + i g'` the coefficients of the bilinear form
//! are `D_ii = gamma_i^-2` and `beta_i = gamma_i' / gamma_i^3`.

use std::sync::Arc;

use crate::grid::{GlobalGrid, Subdomain, LOWER, UPPER};
use crate::C64;

/// Value and first two derivatives of the stretching function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stretch {
    pub g: f64,
    pub dg: f64,
    pub d2g: f64,
}

impl Stretch {
    const ZERO: Stretch = Stretch {
        g: 0.0,
        dg: 0.0,
        d2g: 0.0,
    };

    pub fn gamma(&self) -> C64 {
        C64::new(1.0, self.dg)
    }

    pub fn gamma_prime(&self) -> C64 {
        C64::new(0.0, self.d2g)
    }
}

/// One-dimensional PML scaling. Ramps below `lower_start` and above
/// `upper_start`; in between it is zero or, for subdomain scalings, the
/// global scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling1D {
    pub lower_start: Option<f64>,
    pub upper_start: Option<f64>,
    pub sigma: f64,
    pub global_ref: Option<Arc<Scaling1D>>,
}

impl Scaling1D {
    pub fn new(lower_start: Option<f64>, upper_start: Option<f64>, sigma: f64) -> Self {
        Self {
            lower_start,
            upper_start,
            sigma,
            global_ref: None,
        }
    }

    /// Subdomain scaling that equals `global` between its own ramp starts.
    pub fn inheriting(lower_start: Option<f64>, upper_start: Option<f64>, global: Arc<Scaling1D>) -> Self {
        Self {
            lower_start,
            upper_start,
            sigma: global.sigma,
            global_ref: Some(global),
        }
    }

    /// No stretching anywhere.
    pub fn identity() -> Self {
        Self::new(None, None, 0.0)
    }

    pub fn inherit_global(&self) -> bool {
        self.global_ref.is_some()
    }

    pub fn eval(&self, x: f64) -> Stretch {
        let s = self.sigma;
        if let Some(b) = self.upper_start {
            if x >= b {
                let t = x - b;
                return Stretch {
                    g: s * t * t * t,
                    dg: 3.0 * s * t * t,
                    d2g: 6.0 * s * t,
                };
            }
        }
        if let Some(a) = self.lower_start {
            if x <= a {
                let t = a - x;
                return Stretch {
                    g: -s * t * t * t,
                    dg: 3.0 * s * t * t,
                    d2g: -6.0 * s * t,
                };
            }
        }
        match &self.global_ref {
            Some(global) => global.eval(x),
            None => Stretch::ZERO,
        }
    }

    pub fn gamma(&self, x: f64) -> C64 {
        self.eval(x).gamma()
    }

    /// `(D, beta)` along this direction: `(gamma^-2, gamma' / gamma^3)`.
    pub fn coeff(&self, x: f64) -> (C64, C64) {
        let st = self.eval(x);
        if st.dg == 0.0 && st.d2g == 0.0 {
            return (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        }
        let inv = st.gamma().inv();
        let inv2 = inv * inv;
        (inv2, st.gamma_prime() * inv2 * inv)
    }
}

/// Weak-form coefficients for a (sub)domain: one scaling per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PmlCoeffs {
    pub scalings: [Scaling1D; 2],
}

impl PmlCoeffs {
    pub fn new(sx: Scaling1D, sy: Scaling1D) -> Self {
        Self { scalings: [sx, sy] }
    }

    pub fn identity() -> Self {
        Self::new(Scaling1D::identity(), Scaling1D::identity())
    }

    /// Global scaling: ramps start at the edges of the physical box.
    pub fn global(grid: &GlobalGrid, sigma: f64) -> Self {
        let mk = |d: usize| {
            if grid.n_pml_g == 0 || sigma == 0.0 {
                Scaling1D::new(None, None, sigma)
            } else {
                let (a, b) = grid.interior_bounds(d);
                Scaling1D::new(Some(a), Some(b), sigma)
            }
        };
        Self::new(mk(0), mk(1))
    }

    /// Local scaling of a subdomain: fresh ramps start at the interior faces
    /// of its int box, the global scaling applies in between.
    pub fn subdomain(grid: &GlobalGrid, global: &PmlCoeffs, sub: &Subdomain) -> Self {
        let mk = |d: usize| {
            let shared = Arc::new(global.scalings[d].clone());
            let lo = (sub.pml_cells[d][LOWER] > 0).then(|| grid.coord(d, sub.int_box[d].start));
            let hi = (sub.pml_cells[d][UPPER] > 0).then(|| grid.coord(d, sub.int_box[d].end));
            Scaling1D::inheriting(lo, hi, shared)
        };
        Self::new(mk(0), mk(1))
    }

    /// `((D11, D22), (beta1, beta2))` at `x`.
    pub fn coeffs_at(&self, x: [f64; 2]) -> ([C64; 2], [C64; 2]) {
        let (d0, b0) = self.scalings[0].coeff(x[0]);
        let (d1, b1) = self.scalings[1].coeff(x[1]);
        ([d0, d1], [b0, b1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn gamma_is_one_between_ramps() {
        let s = Scaling1D::new(Some(0.0), Some(1.0), 3000.0);
        for x in [0.001, 0.3, 0.5, 0.999] {
            assert_eq!(s.gamma(x), C64::new(1.0, 0.0));
        }
        assert_eq!(s.gamma(0.0), C64::new(1.0, 0.0));
        assert_eq!(s.gamma(1.0), C64::new(1.0, 0.0));
    }

    #[test]
    fn gamma_one_wavelength_deep() {
        let k = 300.0;
        let sigma = 10.0 * k;
        let t = 2.0 * PI / k;
        let s = Scaling1D::new(Some(0.0), Some(1.0), sigma);
        let expected = C64::new(1.0, 3.0 * sigma * t * t);
        assert!(close(s.gamma(1.0 + t), expected, 1e-12));
        assert!(close(s.gamma(-t), expected, 1e-12));
        assert!((expected.im - 3.947_841_760).abs() < 1e-8);
    }

    #[test]
    fn subdomain_inherits_global_pml() {
        let grid = GlobalGrid::uniform([40, 40], 1.0 / 40.0, 10);
        let global = PmlCoeffs::global(&grid, 500.0);
        let layout = crate::grid::decompose(&grid, [2, 2], 4, 3, crate::assembly::BcVariant::PmlImpedance).unwrap();
        let sub = &layout.subdomains[0];
        let local = PmlCoeffs::subdomain(&grid, &global, sub);
        // Lower-left subdomain: a point in the global PML, inside its int box.
        let x = [grid.coord(0, 3) + 0.3 * grid.h, grid.coord(1, 5) + 0.1 * grid.h];
        assert_eq!(local.coeffs_at(x), global.coeffs_at(x));
        assert!(local.coeffs_at(x).0[0] != C64::new(1.0, 0.0));
    }

    #[test]
    fn coefficients_in_interior_and_single_ramp() {
        let s = Scaling1D::new(Some(0.0), Some(1.0), 3000.0);
        let c = PmlCoeffs::new(s.clone(), s);
        let (d, b) = c.coeffs_at([0.4, 0.6]);
        assert_eq!(d, [C64::new(1.0, 0.0); 2]);
        assert_eq!(b, [C64::new(0.0, 0.0); 2]);

        let t = 0.01;
        let (d, b) = c.coeffs_at([1.0 + t, 0.5]);
        assert_eq!(d[1], C64::new(1.0, 0.0));
        assert_eq!(b[1], C64::new(0.0, 0.0));
        let gamma = C64::new(1.0, 3.0 * 3000.0 * t * t);
        assert!(close(d[0], (gamma * gamma).inv(), 1e-12));
    }

    #[test]
    fn beta_one_wavelength_deep() {
        let k = 300.0;
        let sigma = 10.0 * k;
        let t = 2.0 * PI / k;
        let s = Scaling1D::new(Some(0.0), Some(1.0), sigma);
        let (_, beta) = s.coeff(1.0 + t);
        let gamma = C64::new(1.0, 3.947_841_760_435_743);
        let expected = C64::new(0.0, 6.0 * sigma * t) / (gamma * gamma * gamma);
        assert!(close(beta, expected, 1e-9));
    }

    // D_ii * u'' - beta_i * u' must reproduce gamma^-1 (gamma^-1 u')' for a
    // smooth u, computed here by nested finite differences.
    #[test]
    fn beta_matches_finite_difference_operator() {
        let s = Scaling1D::new(Some(0.0), Some(1.0), 2000.0);
        let u = |x: f64| (7.0 * x).sin() + x * x;
        let du = |x: f64| 7.0 * (7.0 * x).cos() + 2.0 * x;
        let d2u = |x: f64| -49.0 * (7.0 * x).sin() + 2.0;
        let flux = |x: f64, e: f64| (u(x + e) - u(x - e)) / (2.0 * e) / s.gamma(x);
        let e = 1e-4;
        for &x in &[1.02, 1.05, 1.1, -0.03, -0.07] {
            let fd = (flux(x + e, e) - flux(x - e, e)) / (2.0 * e) / s.gamma(x);
            let (d, beta) = s.coeff(x);
            let exact = d * d2u(x) - beta * du(x);
            assert!(
                (fd - exact).norm() < 1e-4 * exact.norm().max(1.0),
                "x = {x}: {fd} vs {exact}"
            );
        }
    }

    #[test]
    fn derivatives_match_centered_differences() {
        let k = 100.0;
        let lambda = 2.0 * PI / k;
        let s = Scaling1D::new(Some(0.0), Some(1.0), 10.0 * k);
        let delta = 1e-5 * lambda;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let depth = rng.random_range(0.05..3.0) * lambda;
            let x = if rng.random_bool(0.5) { 1.0 + depth } else { -depth };
            let g = |y: f64| s.eval(y).g;
            let g1 = |y: f64| s.eval(y).dg;
            let dg = (g(x + delta) - g(x - delta)) / (2.0 * delta);
            let d2g = (g1(x + delta) - g1(x - delta)) / (2.0 * delta);
            let st = s.eval(x);
            assert!((dg - st.dg).abs() <= 1e-6 * st.dg.abs());
            assert!((d2g - st.d2g).abs() <= 1e-6 * st.d2g.abs());
        }
    }

    #[test]
    fn gamma_is_continuous_at_ramp_starts() {
        let s = Scaling1D::new(Some(0.0), Some(1.0), 1e4);
        for &(x, e) in &[(1.0, 1e-9), (0.0, 1e-9)] {
            assert!((s.gamma(x + e) - s.gamma(x - e)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_sigma_is_identity() {
        let s = Scaling1D::new(Some(0.0), Some(1.0), 0.0);
        let c = PmlCoeffs::new(s.clone(), s);
        for &x in &[[-0.3, 0.5], [1.2, 1.4], [0.5, -0.1]] {
            let (d, b) = c.coeffs_at(x);
            assert_eq!(d, [C64::new(1.0, 0.0); 2]);
            assert_eq!(b, [C64::new(0.0, 0.0); 2]);
        }
    }

    #[test]
    fn imaginary_part_nonnegative() {
        let s = Scaling1D::new(Some(0.0), Some(1.0), 1e3);
        for i in -100..200 {
            let x = i as f64 * 0.01;
            assert!(s.gamma(x).im >= 0.0);
        }
    }
}
