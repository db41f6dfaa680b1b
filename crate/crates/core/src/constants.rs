//! The single ledger of numerical constants that the theory leaves
//! symbolic. Every default lives here, next to the quantity it stands for.

use serde::{Deserialize, Serialize};
use std::f64::consts::E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// `α = c_alpha · M · M*` in the main perturbation.
    pub c_alpha: f64,
    /// `α = c_prime · (1 + βδ/γ)` in the near-origin perturbation.
    pub c_prime: f64,
    /// Constant of the one-dimensional tail inequality.
    pub tail_c1: f64,
    /// `α = quasi_c3 · C / overlap` in the quasi-convex perturbation.
    pub quasi_c3: f64,
    /// Constant of the quasi tail-mass bound `(c1/α)^{n-1} Vol(conv K)`.
    pub quasi_tail_c1: f64,
    /// Standard errors required for a Monte Carlo margin.
    pub sigma: f64,
    /// Bound on `E_μ|x|² · M′²` for the perturbed measure.
    pub second_moment_bound: f64,
    /// Accepted range for the isotropic constant of a perturbed body.
    pub l_min: f64,
    pub l_max: f64,
    /// `d_G(K, T) <= distance_factor · α`.
    pub distance_factor: f64,
    /// Bound on `L_{F_K}` for quasi-convex inputs.
    pub quasi_l_bound: f64,
    /// `L_T <= near_origin_l_factor · γ` in the near-origin perturbation.
    pub near_origin_l_factor: f64,
    /// `Vol(K ∩ E)^{1/n} <= section_factor · A` for isotropic constant `A`.
    pub section_factor: f64,
    /// Accepted range of `L_{K_f} / L_f`.
    pub l_ratio_max: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            c_alpha: 16.0 * E,
            c_prime: 4.0 * E,
            tail_c1: 1.0,
            quasi_c3: 8.0,
            quasi_tail_c1: 1.0,
            sigma: 3.0,
            second_moment_bound: 10.0,
            l_min: 0.2,
            l_max: 0.6,
            distance_factor: 10.0,
            quasi_l_bound: 1.0,
            near_origin_l_factor: 1.0,
            section_factor: 3.0,
            l_ratio_max: 3.0,
        }
    }
}

/// One row of the constants ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub name: String,
    pub value: f64,
    pub stands_for: String,
}

impl Constants {
    pub fn ledger(&self) -> Vec<LedgerEntry> {
        let row = |name: &str, value: f64, stands_for: &str| LedgerEntry {
            name: name.into(),
            value,
            stands_for: stands_for.into(),
        };
        vec![
            row(
                "c_alpha",
                self.c_alpha,
                "α = c·M(K)·M*(K); from α+1 > 4e·V1/V0 with V1/V0 <= 4·M·M*",
            ),
            row(
                "c_prime",
                self.c_prime,
                "α = c′·(1+βδ/γ); from α+1 > 4e·V1/V0 with V1/V0 <= 1+βδ/γ",
            ),
            row(
                "tail_c1",
                self.tail_c1,
                "c1 in ∫_a^b (1-(t-a)/(b-a))^{αn} t^n dt < (c1/α)^n ∫_a^b t^n dt",
            ),
            row("quasi_c3", self.quasi_c3, "α = c3·C/overlap for quasi-convex bodies"),
            row(
                "quasi_tail_c1",
                self.quasi_tail_c1,
                "c1 in ∫_{|x|>c2√n} F_K < (c1/α)^{n-1} Vol(conv K)",
            ),
            row("sigma", self.sigma, "Monte Carlo margin in standard errors"),
            row("second_moment_bound", self.second_moment_bound, "c in E_μ|x|² < c/M′²"),
            row(
                "l_min",
                self.l_min,
                "lower end of the accepted isotropic constant range",
            ),
            row(
                "l_max",
                self.l_max,
                "upper end of the accepted isotropic constant range",
            ),
            row("distance_factor", self.distance_factor, "c in d_G(K, T) < c·α"),
            row("quasi_l_bound", self.quasi_l_bound, "c4(A, B) in L_{F_K} < c4"),
            row("near_origin_l_factor", self.near_origin_l_factor, "c in L_T < c·γ"),
            row("section_factor", self.section_factor, "c in Vol(K ∩ E)^{1/n} < c·A"),
            row(
                "l_ratio_max",
                self.l_ratio_max,
                "c2 = 1/c1 in c1·L_f < L_{K_f} < c2·L_f",
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_merge_with_defaults_and_reject_unknown_keys() {
        let c: Constants = serde_json::from_str(r#"{"c_alpha": 43.5}"#).unwrap();
        assert_eq!(c.c_alpha, 43.5);
        assert_eq!(c.quasi_c3, 8.0);
        assert!(serde_json::from_str::<Constants>(r#"{"c_beta": 1}"#).is_err());
        assert_eq!(c.ledger().len(), 14);
    }
}
