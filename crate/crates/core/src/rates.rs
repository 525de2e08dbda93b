//! Closed-form Eyring-Kramers quantities computed from a [`SaddleTable`].

use serde::Serialize;
use std::f64::consts::PI;

use crate::domain::OTHER;
use crate::error::{Error, Result};
use crate::landscape::SaddleTable;

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "temperature h must be > 0, got {h}"
        )))
    }
}

fn check_k(table: &SaddleTable, k: usize) -> Result<()> {
    if k < table.saddles.len() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "saddle index {k} out of range (table has {})",
            table.saddles.len()
        )))
    }
}

fn det0(table: &SaddleTable) -> Result<f64> {
    let d = table.minimum.det_hess;
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::InvalidParameter(format!(
            "det Hess f(x0) must be > 0, got {d}"
        )))
    }
}

fn det_z(table: &SaddleTable, k: usize) -> Result<f64> {
    let d = table.saddles[k].abs_det_hess;
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::InvalidParameter(format!(
            "|det Hess f| at saddle {} must be > 0, got {d}",
            table.saddles[k].label
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EkRate {
    pub label: String,
    pub prefactor: f64,
    pub barrier: f64,
}

impl EkRate {
    pub fn rate(&self, h: f64) -> f64 {
        self.prefactor * (-2.0 * self.barrier / h).exp()
    }
}

/// `|mu_z| sqrt(det Hess f(x0)) / (pi sqrt(|det Hess f(z)|))`.
pub fn ek_prefactor(table: &SaddleTable, k: usize) -> Result<f64> {
    check_k(table, k)?;
    let s = &table.saddles[k];
    if !(s.abs_mu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "|mu| at saddle {} must be > 0",
            s.label
        )));
    }
    Ok(s.abs_mu * det0(table)?.sqrt() / (PI * det_z(table, k)?.sqrt()))
}

pub fn ek_rates(table: &SaddleTable) -> Result<Vec<EkRate>> {
    (0..table.saddles.len())
        .map(|k| {
            Ok(EkRate {
                label: table.saddles[k].label.clone(),
                prefactor: ek_prefactor(table, k)?,
                barrier: table.saddles[k].value - table.minimum.value,
            })
        })
        .collect()
}

pub fn ek_rate(table: &SaddleTable, k: usize, h: f64) -> Result<f64> {
    check_h(h)?;
    let p = ek_prefactor(table, k)?;
    Ok(p * (-2.0 * (table.saddles[k].value - table.minimum.value) / h).exp())
}

/// `sum_{l <= n0} P_l e^{-2 (f(z1) - f(x0)) / h}`.
pub fn lambda_h_asymptotic(table: &SaddleTable, h: f64) -> Result<f64> {
    check_h(h)?;
    let mut sum = 0.0;
    for k in 0..table.n0 {
        sum += ek_prefactor(table, k)?;
    }
    Ok(sum * (-2.0 * table.barrier() / h).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitProbabilities {
    pub labels: Vec<String>,
    /// Leading-order values before normalization.
    pub raw: Vec<f64>,
    /// `raw / sum(raw)`.
    pub normalized: Vec<f64>,
    /// `1 - sum(raw)`, clamped at zero.
    pub other: f64,
}

impl ExitProbabilities {
    pub fn get(&self, label: &str) -> Option<f64> {
        if label == OTHER {
            return Some(self.other);
        }
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.normalized[i])
    }
}

pub fn exit_probabilities(table: &SaddleTable, h: f64) -> Result<ExitProbabilities> {
    check_h(h)?;
    let a: Vec<f64> = (0..table.saddles.len())
        .map(|k| Ok(table.saddles[k].abs_mu / det_z(table, k)?.sqrt()))
        .collect::<Result<_>>()?;
    let lead: f64 = a[..table.n0].iter().sum();
    let f1 = table.saddles[0].value;
    let raw: Vec<f64> = table
        .saddles
        .iter()
        .zip(&a)
        .enumerate()
        .map(|(k, (s, ak))| {
            if k < table.n0 {
                ak / lead
            } else {
                ak / lead * (-2.0 * (s.value - f1) / h).exp()
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(ExitProbabilities {
        labels: table.saddles.iter().map(|s| s.label.clone()).collect(),
        normalized: raw.iter().map(|r| r / total).collect(),
        other: (1.0 - total).max(0.0),
        raw,
    })
}

/// `log` of `(pi h)^{d/4} det(Hess f(x0))^{-1/4} e^{-f(x0)/h}`.
pub fn log_mass_asymptotic(table: &SaddleTable, h: f64) -> Result<f64> {
    check_h(h)?;
    let d = table.dimension as f64;
    Ok(d / 4.0 * (PI * h).ln() - 0.25 * det0(table)?.ln() - table.minimum.value / h)
}

pub fn mass_asymptotic(table: &SaddleTable, h: f64) -> Result<f64> {
    Ok(log_mass_asymptotic(table, h)?.exp())
}

/// `log` of `2 |mu| det(H0)^{1/4} pi^{(d-4)/4} |det Hz|^{-1/2} h^{d/4-1} e^{-(2 f(z) - f(x0))/h}`.
pub fn log_flux_asymptotic(table: &SaddleTable, k: usize, h: f64) -> Result<f64> {
    check_h(h)?;
    check_k(table, k)?;
    let d = table.dimension as f64;
    let s = &table.saddles[k];
    Ok(
        (2.0 * s.abs_mu).ln() + 0.25 * det0(table)?.ln() + (d - 4.0) / 4.0 * PI.ln()
            - 0.5 * det_z(table, k)?.ln()
            + (d / 4.0 - 1.0) * h.ln()
            - (2.0 * s.value - table.minimum.value) / h,
    )
}

pub fn flux_asymptotic(table: &SaddleTable, k: usize, h: f64) -> Result<f64> {
    Ok(log_flux_asymptotic(table, k, h)?.exp())
}

/// The same flux with the coefficient `pi^{-3d/4}` in place of
/// `pi^{(d-4)/4}`. Kept only to compare against the discrete flux.
pub fn flux_asymptotic_alt(table: &SaddleTable, k: usize, h: f64) -> Result<f64> {
    let d = table.dimension as f64;
    Ok(
        (log_flux_asymptotic(table, k, h)? - (d - 4.0) / 4.0 * PI.ln() - 3.0 * d / 4.0 * PI.ln())
            .exp(),
    )
}

/// `A h e^{-2 (f(z) - f(x0)) / h}` with `A = 2 P_z`.
pub fn mixed_eigenvalue_asymptotic(table: &SaddleTable, k: usize, h: f64) -> Result<f64> {
    check_h(h)?;
    let a = 2.0 * ek_prefactor(table, k)?;
    Ok(a * h * (-2.0 * (table.saddles[k].value - table.minimum.value) / h).exp())
}

/// `b h^{d/4 - 1/2} e^{-f(z)/h}` with `b = sqrt(A pi^{d/2} / sqrt(det H0))`.
pub fn mixed_flux_asymptotic(table: &SaddleTable, k: usize, h: f64) -> Result<f64> {
    check_h(h)?;
    let d = table.dimension as f64;
    let a = 2.0 * ek_prefactor(table, k)?;
    let kappa = PI.powf(d / 2.0) / det0(table)?.sqrt();
    let b = (a * kappa).sqrt();
    Ok(b * h.powf(d / 4.0 - 0.5) * (-table.saddles[k].value / h).exp())
}

/// Rescales a time observed at `h_hi` to `h_lo` for a barrier `barrier`.
pub fn tad_extrapolate_barrier(barrier: f64, t_hi: f64, h_hi: f64, h_lo: f64) -> Result<f64> {
    if !(h_lo > 0.0 && h_hi >= h_lo) {
        return Err(Error::InvalidParameter(format!(
            "need h_hi >= h_lo > 0, got h_hi = {h_hi}, h_lo = {h_lo}"
        )));
    }
    Ok(t_hi * (2.0 * barrier * (1.0 / h_lo - 1.0 / h_hi)).exp())
}

pub fn tad_extrapolate(
    table: &SaddleTable,
    k: usize,
    t_hi: f64,
    h_hi: f64,
    h_lo: f64,
) -> Result<f64> {
    check_k(table, k)?;
    tad_extrapolate_barrier(
        table.saddles[k].value - table.minimum.value,
        t_hi,
        h_hi,
        h_lo,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddlePrediction {
    pub label: String,
    pub barrier: f64,
    pub prefactor: f64,
    pub rate: f64,
    pub probability: f64,
    pub flux: f64,
    pub mixed_eigenvalue: f64,
    pub mixed_flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePrediction {
    pub h: f64,
    pub lambda: f64,
    pub mass: f64,
    pub other_probability: f64,
    pub saddles: Vec<SaddlePrediction>,
}

pub fn predict(table: &SaddleTable, h: f64) -> Result<RatePrediction> {
    let probs = exit_probabilities(table, h)?;
    let mut saddles = Vec::with_capacity(table.saddles.len());
    for (k, s) in table.saddles.iter().enumerate() {
        saddles.push(SaddlePrediction {
            label: s.label.clone(),
            barrier: s.value - table.minimum.value,
            prefactor: ek_prefactor(table, k)?,
            rate: ek_rate(table, k, h)?,
            probability: probs.normalized[k],
            flux: flux_asymptotic(table, k, h)?,
            mixed_eigenvalue: mixed_eigenvalue_asymptotic(table, k, h)?,
            mixed_flux: mixed_flux_asymptotic(table, k, h)?,
        });
    }
    Ok(RatePrediction {
        h,
        lambda: lambda_h_asymptotic(table, h)?,
        mass: mass_asymptotic(table, h)?,
        other_probability: probs.other,
        saddles,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::domain::Face;
    use crate::landscape::{MinimumInfo, Saddle};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Table for the cosine lattice built by hand from its Hessians.
    pub(crate) fn lattice_table(c: f64) -> SaddleTable {
        let pi2 = PI * PI;
        let mk = |label: &str, loc: [f64; 2], face: &str, value: f64, mu: f64| Saddle {
            label: label.into(),
            location: loc.to_vec(),
            value,
            mu,
            abs_mu: mu.abs(),
            abs_det_hess: c * pi2 * pi2,
            face: face.parse::<Face>().unwrap(),
            sigma: label.into(),
            gamma: label.into(),
        };
        let mut saddles = vec![
            mk("a", [-1.0, 0.0], "-x", 1.0 - c, -pi2),
            mk("b", [1.0, 0.0], "+x", 1.0 - c, -pi2),
            mk("c", [0.0, -1.0], "-y", c - 1.0, -c * pi2),
            mk("d", [0.0, 1.0], "+y", c - 1.0, -c * pi2),
        ];
        saddles.sort_by(|x, y| x.value.total_cmp(&y.value));
        let n0 = if c == 1.0 { 4 } else { 2 };
        SaddleTable {
            dimension: 2,
            minimum: MinimumInfo {
                location: vec![0.0, 0.0],
                value: -1.0 - c,
                det_hess: c * pi2 * pi2,
                hess_eigs: vec![pi2, c * pi2],
            },
            saddles,
            n0,
        }
    }

    #[test]
    fn prefactors() {
        let t = lattice_table(1.0);
        for k in 0..4 {
            assert_relative_eq!(ek_prefactor(&t, k).unwrap(), PI, max_relative = 1e-14);
        }
        let t = lattice_table(1.5);
        assert_relative_eq!(ek_prefactor(&t, 0).unwrap(), PI, max_relative = 1e-14);
        assert_relative_eq!(ek_prefactor(&t, 3).unwrap(), 1.5 * PI, max_relative = 1e-14);
        assert!(ek_prefactor(&t, 4).is_err());
    }

    #[test]
    fn rates_and_lambda() {
        let t = lattice_table(1.0);
        let r = ek_rate(&t, 0, 0.5).unwrap();
        assert_relative_eq!(r, PI * (-8.0f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(r, 1.0539e-3, max_relative = 1e-4);
        let l = lambda_h_asymptotic(&t, 0.5).unwrap();
        assert_relative_eq!(l, 4.2156e-3, max_relative = 1e-4);
        let t = lattice_table(1.5);
        assert_relative_eq!(
            lambda_h_asymptotic(&t, 0.5).unwrap(),
            2.0 * PI * (-8.0f64).exp(),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            ek_rate(&t, 2, 0.5).unwrap(),
            1.5 * PI * (-12.0f64).exp(),
            max_relative = 1e-13
        );
        assert!(ek_rate(&t, 0, 0.0).is_err());
        assert!(lambda_h_asymptotic(&t, -1.0).is_err());
    }

    #[test]
    fn probabilities() {
        let p = exit_probabilities(&lattice_table(1.0), 0.3).unwrap();
        for v in &p.normalized {
            assert_relative_eq!(*v, 0.25, max_relative = 1e-14);
        }
        assert!(p.other.abs() < 1e-15);
        let p = exit_probabilities(&lattice_table(1.5), 0.5).unwrap();
        assert_relative_eq!(p.raw[0], 0.5, max_relative = 1e-14);
        assert_relative_eq!(p.raw[2], 0.75 * (-4.0f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(p.raw[2], 1.374e-2, max_relative = 1e-3);
        assert!((p.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(p.other, 0.0);
    }

    #[test]
    fn single_saddle_probability_is_one() {
        let mut t = lattice_table(1.5);
        t.saddles.truncate(1);
        t.n0 = 1;
        let p = exit_probabilities(&t, 0.4).unwrap();
        assert_eq!(p.normalized, vec![1.0]);
    }

    #[test]
    fn flux_and_mass_example() {
        let t = lattice_table(1.0);
        let h = 0.4;
        let mass = mass_asymptotic(&t, h).unwrap();
        assert_relative_eq!(
            mass,
            (0.4 * PI).sqrt() / PI * 5f64.exp(),
            max_relative = 1e-13
        );
        let flux = flux_asymptotic(&t, 0, h).unwrap();
        assert_relative_eq!(
            flux,
            2.0 * PI.sqrt() / 0.4f64.sqrt() * (-5f64).exp(),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            h / 2.0 * flux / mass,
            PI * (-10f64).exp(),
            max_relative = 1e-13
        );
        let alt = flux_asymptotic_alt(&t, 0, h).unwrap();
        assert_relative_eq!(flux / alt, PI, max_relative = 1e-13);
    }

    #[test]
    fn one_dimensional_flux_forms_agree() {
        let mut t = lattice_table(1.0);
        t.dimension = 1;
        assert_relative_eq!(
            flux_asymptotic(&t, 0, 0.3).unwrap(),
            flux_asymptotic_alt(&t, 0, 0.3).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn mixed_problem() {
        let t = lattice_table(1.0);
        let l = mixed_eigenvalue_asymptotic(&t, 0, 0.25).unwrap();
        assert_relative_eq!(l, 2.0 * PI * 0.25 * (-16f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(l, 1.7690e-7, max_relative = 1e-3);
        // b = sqrt(2) in 2D
        let f = mixed_flux_asymptotic(&t, 0, 0.25).unwrap();
        assert_relative_eq!(f, 2f64.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn tad() {
        assert_relative_eq!(
            tad_extrapolate_barrier(2.0, 1.0, 0.5, 0.25).unwrap(),
            2980.957987,
            max_relative = 1e-9
        );
        assert_eq!(tad_extrapolate_barrier(2.0, 3.0, 0.4, 0.4).unwrap(), 3.0);
        assert!(tad_extrapolate_barrier(2.0, 1.0, 0.25, 0.5).is_err());
        let t = lattice_table(1.0);
        assert_relative_eq!(
            tad_extrapolate(&t, 0, 1.0, 0.5, 0.25).unwrap(),
            8f64.exp(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn prediction_bundle() {
        let p = predict(&lattice_table(1.5), 0.4).unwrap();
        assert_eq!(p.saddles.len(), 4);
        let s: f64 = p.saddles.iter().map(|s| s.probability).sum();
        assert!((s - 1.0).abs() < 1e-12);
        for s in &p.saddles {
            assert_relative_eq!(s.mixed_eigenvalue, 2.0 * s.rate * 0.4, max_relative = 1e-13);
        }
    }

    fn random_table(
        dim: usize,
        v0: f64,
        gaps: Vec<f64>,
        mus: Vec<f64>,
        dets: Vec<f64>,
        d0: f64,
    ) -> SaddleTable {
        let mut acc = v0 + 0.5;
        let mut saddles = Vec::new();
        for (k, ((g, m), dz)) in gaps.iter().zip(&mus).zip(&dets).enumerate() {
            acc += g;
            let mut loc = vec![0.0; dim];
            loc[0] = k as f64;
            saddles.push(Saddle {
                label: format!("s{k}"),
                location: loc,
                value: acc,
                mu: -m,
                abs_mu: *m,
                abs_det_hess: *dz,
                face: Face::new(0, true),
                sigma: format!("s{k}"),
                gamma: format!("s{k}"),
            });
        }
        SaddleTable {
            dimension: dim,
            minimum: MinimumInfo {
                location: vec![0.0; dim],
                value: v0,
                det_hess: d0,
                hess_eigs: vec![1.0; dim],
            },
            saddles,
            n0: 1,
        }
    }

    fn table_strategy() -> impl Strategy<Value = SaddleTable> {
        (1usize..=3, 1usize..5).prop_flat_map(|(dim, n)| {
            (
                Just(dim),
                -3.0f64..3.0,
                prop::collection::vec(0.01f64..1.0, n),
                prop::collection::vec(0.1f64..20.0, n),
                prop::collection::vec(0.1f64..200.0, n),
                0.1f64..200.0,
            )
                .prop_map(|(dim, v0, gaps, mus, dets, d0)| {
                    random_table(dim, v0, gaps, mus, dets, d0)
                })
        })
    }

    proptest! {
        #[test]
        fn flux_over_mass_is_rate(t in table_strategy(), h in 0.05f64..2.0) {
            for k in 0..t.saddles.len() {
                let lhs = (h / 2.0) * (log_flux_asymptotic(&t, k, h).unwrap() - log_mass_asymptotic(&t, h).unwrap()).exp();
                let rate = ek_rate(&t, k, h).unwrap();
                prop_assert!(((lhs - rate) / rate).abs() < 1e-12, "{lhs} vs {rate}");
            }
        }

        #[test]
        fn rate_increases_with_temperature(t in table_strategy(), h in 0.05f64..2.0, dh in 0.001f64..1.0) {
            for k in 0..t.saddles.len() {
                prop_assert!(ek_rate(&t, k, h + dh).unwrap() > ek_rate(&t, k, h).unwrap());
            }
        }

        #[test]
        fn log_lambda_affine_in_inverse_h(t in table_strategy(), h1 in 0.1f64..1.0, h2 in 0.1f64..1.0) {
            prop_assume!((1.0 / h1 - 1.0 / h2).abs() > 0.1);
            let slope = (lambda_h_asymptotic(&t, h1).unwrap().ln() - lambda_h_asymptotic(&t, h2).unwrap().ln()) / (1.0 / h1 - 1.0 / h2);
            prop_assert!((slope + 2.0 * t.barrier()).abs() < 1e-9 * (1.0 + t.barrier()));
        }

        #[test]
        fn probabilities_shift_and_relabel_invariant(t in table_strategy(), h in 0.1f64..1.0, shift in -5.0f64..5.0) {
            let p = exit_probabilities(&t, h).unwrap();
            let mut s = t.clone();
            s.minimum.value += shift;
            for z in &mut s.saddles {
                z.value += shift;
                z.label = format!("renamed-{}", z.label);
            }
            let q = exit_probabilities(&s, h).unwrap();
            for (a, b) in p.normalized.iter().zip(&q.normalized) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!((p.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn mixed_constant_is_twice_prefactor(t in table_strategy(), h in 0.1f64..1.0) {
            for k in 0..t.saddles.len() {
                let ratio = mixed_eigenvalue_asymptotic(&t, k, h).unwrap() / (h * ek_rate(&t, k, h).unwrap());
                prop_assert!((ratio - 2.0).abs() < 1e-12);
            }
        }

        #[test]
        fn tad_preserves_order_iff_consistent(t1 in 0.1f64..10.0, t2 in 0.1f64..10.0, e1 in 0.1f64..3.0, e2 in 0.1f64..3.0) {
            let (hh, hl) = (0.5, 0.25);
            let l1 = tad_extrapolate_barrier(e1, t1, hh, hl).unwrap();
            let l2 = tad_extrapolate_barrier(e2, t2, hh, hl).unwrap();
            // brute force: when the faster event at high T also has the
            // lower barrier, it stays faster
            if t1 < t2 && e1 <= e2 {
                prop_assert!(l1 < l2);
            }
            if t2 < t1 && e2 <= e1 {
                prop_assert!(l2 < l1);
            }
        }
    }
}
