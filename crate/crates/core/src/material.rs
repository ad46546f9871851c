//! Lamé parameters per subdomain and the compliance map for plane problems.

use crate::geometry::Side;

/// Symmetric 2x2 tensor stored as (t11, t22, t12).
pub type SymTensor = [f64; 3];

/// Isotropic material with per-side Lamé coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Material {
    pub mu: [f64; 2],
    pub lambda: [f64; 2],
}

impl Material {
    pub fn from_lame(mu: [f64; 2], lambda: [f64; 2]) -> Self {
        assert!(mu.iter().all(|&m| m > 0.0), "mu must be positive");
        assert!(lambda.iter().all(|&l| l > 0.0), "lambda must be positive");
        Material { mu, lambda }
    }

    pub fn uniform(mu: f64, lambda: f64) -> Self {
        Self::from_lame([mu, mu], [lambda, lambda])
    }

    /// Plane strain: mu = E/(2(1+nu)), lambda = E nu/((1+nu)(1-2nu)).
    pub fn plane_strain(e: [f64; 2], nu: [f64; 2]) -> Self {
        let mut mu = [0.0; 2];
        let mut lambda = [0.0; 2];
        for i in 0..2 {
            assert!(nu[i] < 0.5, "nu = 0.5 gives infinite lambda");
            mu[i] = e[i] / (2.0 * (1.0 + nu[i]));
            lambda[i] = e[i] * nu[i] / ((1.0 + nu[i]) * (1.0 - 2.0 * nu[i]));
        }
        Material { mu, lambda }
    }

    /// Plane stress: same mu, lambda = E nu/((1+nu)(1-nu)).
    pub fn plane_stress(e: [f64; 2], nu: [f64; 2]) -> Self {
        let mut mu = [0.0; 2];
        let mut lambda = [0.0; 2];
        for i in 0..2 {
            mu[i] = e[i] / (2.0 * (1.0 + nu[i]));
            lambda[i] = e[i] * nu[i] / ((1.0 + nu[i]) * (1.0 - nu[i]));
        }
        Material { mu, lambda }
    }

    pub fn mu(&self, side: Side) -> f64 {
        self.mu[side.index()]
    }

    pub fn lambda(&self, side: Side) -> f64 {
        self.lambda[side.index()]
    }

    /// Compliance map A w = (1/2mu)(w - lambda/(2mu + 2lambda) tr(w) I) for
    /// d = 2; linear, symmetric and positive definite on symmetric tensors.
    pub fn apply_compliance(&self, side: Side, w: SymTensor) -> SymTensor {
        let mu = self.mu(side);
        let beta = self.compliance_beta(side);
        let tr = w[0] + w[1];
        [
            (w[0] - beta * tr) / (2.0 * mu),
            (w[1] - beta * tr) / (2.0 * mu),
            w[2] / (2.0 * mu),
        ]
    }

    fn compliance_beta(&self, side: Side) -> f64 {
        let mu = self.mu(side);
        let la = self.lambda(side);
        la / (2.0 * mu + 2.0 * la)
    }

    /// Gram matrix of the compliance map in the component basis
    /// E11 = [[1,0],[0,0]], E22 = [[0,0],[0,1]], E12 = [[0,1],[1,0]] under
    /// the Frobenius pairing: G[c][d] = (A E_c) : E_d.
    pub fn compliance_gram(&self, side: Side) -> [[f64; 3]; 3] {
        let mu = self.mu(side);
        let beta = self.compliance_beta(side);
        let a = (1.0 - beta) / (2.0 * mu);
        let b = -beta / (2.0 * mu);
        [[a, b, 0.0], [b, a, 0.0], [0.0, 0.0, 1.0 / mu]]
    }

    /// Stabilization value tau = eta = 2 mu_i / h_K on a face of an element
    /// with diameter `h_k`, seen from material side `side`.
    pub fn stabilization(&self, side: Side, h_k: f64) -> f64 {
        2.0 * self.mu(side) / h_k
    }
}

/// w n for a symmetric tensor in component form.
pub fn tensor_dot_normal(w: SymTensor, n: [f64; 2]) -> [f64; 2] {
    [w[0] * n[0] + w[2] * n[1], w[2] * n[0] + w[1] * n[1]]
}

/// Frobenius inner product of two symmetric tensors in component form.
pub fn sym_inner(a: SymTensor, b: SymTensor) -> f64 {
    a[0] * b[0] + a[1] * b[1] + 2.0 * a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_with_unit_lame() {
        // mu = lambda = 1: A I = I/4.
        let m = Material::uniform(1.0, 1.0);
        let out = m.apply_compliance(Side::One, [1.0, 1.0, 0.0]);
        assert_eq!(out, [0.25, 0.25, 0.0]);
    }

    #[test]
    fn traceless_tensors_scale_by_inverse_2mu() {
        let m = Material::from_lame([2.5, 0.7], [3.0, 9.0]);
        let w = [0.4, -0.4, 1.3];
        for side in Side::all() {
            let out = m.apply_compliance(side, w);
            let mu = m.mu(side);
            for c in 0..3 {
                assert!((out[c] - w[c] / (2.0 * mu)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stabilization_values() {
        let m = Material::from_lame([1.5, 1.5], [1.0, 1.0]);
        assert!((m.stabilization(Side::One, 0.25) - 12.0).abs() < 1e-14);
        // Halving h doubles tau.
        assert!((m.stabilization(Side::One, 0.125) - 24.0).abs() < 1e-14);
    }

    #[test]
    fn equal_mu_gives_equal_tau_on_both_sides() {
        let m = Material::from_lame([2.0, 2.0], [1.0, 5.0]);
        assert_eq!(m.stabilization(Side::One, 0.3), m.stabilization(Side::Two, 0.3));
    }

    #[test]
    fn gram_matches_apply() {
        let m = Material::from_lame([1.3, 0.8], [0.6, 4.4]);
        let basis: [SymTensor; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for side in Side::all() {
            let g = m.compliance_gram(side);
            for c in 0..3 {
                let aw = m.apply_compliance(side, basis[c]);
                for d in 0..3 {
                    assert!((sym_inner(aw, basis[d]) - g[c][d]).abs() < 1e-15);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn compliance_positive_definite(
            w11 in -10.0f64..10.0,
            w22 in -10.0f64..10.0,
            w12 in -10.0f64..10.0,
            mu in 0.01f64..100.0,
            la in 0.01f64..1e9,
        ) {
            let w = [w11, w22, w12];
            prop_assume!(sym_inner(w, w) > 1e-12);
            let m = Material::uniform(mu, la);
            let aw = m.apply_compliance(Side::One, w);
            prop_assert!(sym_inner(aw, w) > 0.0, "(A w, w) must be positive");
        }
    }
}
