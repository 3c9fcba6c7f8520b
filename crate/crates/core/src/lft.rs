//! Legendre-Fenchel transforms on the power-law K∞ family γ(s) = a·s^p and
//! the Young-type inequality aᵀb ≤ γ(|a|) + ℓ_γ(|b|) they generate.
//!
//! Only the power family is implemented: the transform of a·s^p is again a
//! power law with exponent p/(p-1), the double transform is the identity,
//! and the whole synthesis pipeline only ever needs the quadratic members
//! (the p = 2 case is exactly when ℓ_γ(2εs) = ε²ℓ_γ(2s), the scaling the
//! auxiliary system needs to stay homogeneous).

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LftError {
    #[error("coefficient must be positive, got {0}")]
    NonPositiveCoefficient(f64),
    #[error("exponent must exceed 1 for a K-infinity derivative, got {0}")]
    ExponentNotAboveOne(f64),
}

/// γ(s) = a·s^p with a > 0, p > 1; both γ and γ' are class K∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerKInfinity {
    a: f64,
    p: f64,
}

impl PowerKInfinity {
    pub fn new(a: f64, p: f64) -> Result<Self, LftError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(LftError::NonPositiveCoefficient(a));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(LftError::ExponentNotAboveOne(p));
        }
        Ok(PowerKInfinity { a, p })
    }

    /// γ(s) = s²/μ.
    pub fn quadratic_over(mu: f64) -> Result<Self, LftError> {
        Self::new(1.0 / mu, 2.0)
    }

    pub fn coefficient(&self) -> f64 {
        self.a
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// For a quadratic member s²/μ, the μ; otherwise None.
    pub fn quadratic_mu(&self) -> Option<f64> {
        if (self.p - 2.0).abs() <= 1e-12 {
            Some(1.0 / self.a)
        } else {
            None
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.a * s.abs().powf(self.p)
    }

    /// γ'(s) = a·p·s^{p-1}.
    pub fn derivative(&self, s: f64) -> f64 {
        self.a * self.p * s.abs().powf(self.p - 1.0)
    }

    /// (γ')⁻¹(s) = (s/(a·p))^{1/(p-1)}.
    pub fn derivative_inv(&self, s: f64) -> f64 {
        (s.abs() / (self.a * self.p)).powf(1.0 / (self.p - 1.0))
    }

    /// Legendre-Fenchel transform ℓ_γ(s) = s·(γ')⁻¹(s) − γ((γ')⁻¹(s)),
    /// in closed form: (p−1)·a^{−1/(p−1)}·(s/p)^{p/(p−1)}.
    pub fn lf_transform(&self) -> PowerKInfinity {
        let p = self.p;
        let q = p / (p - 1.0);
        let coeff = (p - 1.0) * self.a.powf(-1.0 / (p - 1.0)) * p.powf(-q);
        PowerKInfinity { a: coeff, p: q }
    }

    /// True iff ℓ_γ(2εs) = ε²·ℓ_γ(2s) for all ε > 0, i.e. the transform is
    /// degree-2 homogeneous; on the power family that is exactly p = 2.
    /// Also spot-checked numerically on an (ε, s) grid.
    pub fn check_scaling(&self) -> bool {
        if (self.p - 2.0).abs() > 1e-12 {
            return false;
        }
        let l = self.lf_transform();
        for eps in [0.1, 0.5, 2.0, 7.5] {
            for s in [0.3, 1.0, 4.2] {
                let lhs = l.eval(2.0 * eps * s);
                let rhs = eps * eps * l.eval(2.0 * s);
                if (lhs - rhs).abs() > 1e-10 * rhs.abs().max(1.0) {
                    return false;
                }
            }
        }
        true
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// γ(|a|) + ℓ_γ(|b|) − aᵀb; nonnegative by the Young-type inequality.
pub fn young_gap(g: &PowerKInfinity, a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "young_gap needs equal dimensions");
    g.eval(norm(a)) + g.lf_transform().eval(norm(b)) - dot(a, b)
}

/// The unique a achieving equality in the Young-type inequality for a given
/// b ≠ 0: a = b·(γ')⁻¹(|b|)/|b|. Returns the zero vector for b = 0.
pub fn young_argmax(g: &PowerKInfinity, b: &[f64]) -> Vec<f64> {
    let nb = norm(b);
    if nb == 0.0 {
        return vec![0.0; b.len()];
    }
    let r = g.derivative_inv(nb);
    b.iter().map(|&bi| bi * r / nb).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_of_plain_square() {
        // γ(s)=s² has ℓ_γ(s)=s²/4
        let g = PowerKInfinity::new(1.0, 2.0).unwrap();
        let l = g.lf_transform();
        assert!((l.coefficient() - 0.25).abs() < 1e-15);
        assert!((l.exponent() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn transform_of_two_s_squared() {
        // γ(s)=2s²: ℓ_γ(2s) = s²/2
        let g = PowerKInfinity::new(2.0, 2.0).unwrap();
        let l = g.lf_transform();
        for s in [0.1, 1.0, 3.7] {
            assert!((l.eval(2.0 * s) - 0.5 * s * s).abs() < 1e-12 * (s * s).max(1.0));
        }
    }

    #[test]
    fn double_transform_is_identity() {
        for (a, p) in [(3.0, 2.0), (0.5, 1.5), (2.0, 4.0)] {
            let g = PowerKInfinity::new(a, p).unwrap();
            let gg = g.lf_transform().lf_transform();
            assert!(
                (gg.coefficient() - a).abs() <= 1e-12 * a,
                "coefficient {} vs {}",
                gg.coefficient(),
                a
            );
            assert!((gg.exponent() - p).abs() <= 1e-12 * p);
        }
    }

    #[test]
    fn conjugate_exponent_relation() {
        // (p-1)(p'-1) = 1
        for p in [1.2, 1.5, 2.0, 3.0, 6.0] {
            let g = PowerKInfinity::new(1.7, p).unwrap();
            let q = g.lf_transform().exponent();
            assert!(((p - 1.0) * (q - 1.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_holds_exactly_for_quadratics() {
        assert!(PowerKInfinity::quadratic_over(1.0).unwrap().check_scaling());
        assert!(PowerKInfinity::quadratic_over(0.2).unwrap().check_scaling());
        assert!(PowerKInfinity::new(5.0, 2.0).unwrap().check_scaling());
        assert!(!PowerKInfinity::new(1.0, 3.0).unwrap().check_scaling());
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(PowerKInfinity::new(0.0, 2.0).is_err());
        assert!(PowerKInfinity::new(1.0, 1.0).is_err());
    }

    #[test]
    fn young_gap_zero_a() {
        let g = PowerKInfinity::new(1.0, 2.0).unwrap();
        let b = [3.0, -4.0];
        let gap = young_gap(&g, &[0.0, 0.0], &b);
        assert!((gap - g.lf_transform().eval(5.0)).abs() < 1e-12);
        assert!(gap >= 0.0);
    }

    #[test]
    fn equality_at_the_young_argmax() {
        let g = PowerKInfinity::new(2.0, 2.0).unwrap();
        for b in [[2.0, 0.0], [1.0, -3.0], [0.2, 0.1]] {
            let a = young_argmax(&g, &b);
            assert!(young_gap(&g, &a, &b).abs() <= 1e-10);
            // equality only there: perturbations strictly increase the gap
            for delta in [[1e-3, 0.0], [0.0, 1e-3], [-1e-3, 1e-3]] {
                let ap: Vec<f64> = a.iter().zip(&delta).map(|(x, d)| x + d).collect();
                assert!(young_gap(&g, &ap, &b) > 0.0);
            }
        }
    }

    #[test]
    fn argmax_closed_form_case() {
        // γ(s)=s², b=(2,0): (γ')⁻¹(2)=1, so a=(1,0)
        let g = PowerKInfinity::new(1.0, 2.0).unwrap();
        let a = young_argmax(&g, &[2.0, 0.0]);
        assert!((a[0] - 1.0).abs() < 1e-14 && a[1] == 0.0);
        assert_eq!(young_argmax(&g, &[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn gap_nonnegative_on_random_pairs() {
        let g = PowerKInfinity::new(2.0, 2.0).unwrap();
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 20.0 - 10.0
        };
        let mut min_gap = f64::INFINITY;
        for _ in 0..1000 {
            let a = [next(), next(), next()];
            let b = [next(), next(), next()];
            let gap = young_gap(&g, &a, &b);
            min_gap = min_gap.min(gap);
        }
        assert!(min_gap >= -1e-12, "min gap {min_gap}");
    }

    #[test]
    fn argmax_matches_radial_grid_search() {
        // maximize aᵀb − γ(|a|) over a = r·b/|b|, r in [0,10]
        let g = PowerKInfinity::new(1.0, 2.0).unwrap();
        let b = [3.0, 1.0];
        let nb = (10.0_f64).sqrt();
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..100_000 {
            let r = 10.0 * i as f64 / 99_999.0;
            let v = r * nb - g.eval(r);
            if v > best.1 {
                best = (r, v);
            }
        }
        let a = young_argmax(&g, &b);
        let ra = (a[0] * a[0] + a[1] * a[1]).sqrt();
        assert!(
            (ra - best.0).abs() < 1e-4,
            "grid {} vs closed {}",
            best.0,
            ra
        );
    }
}
