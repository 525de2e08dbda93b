use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::path::{Path, PathBuf};

use crate::domain::{BoundaryPatch, DomainSpec, Face, GammaPatch};
use crate::error::{Error, Result};
use crate::langevin::ExitTest;
use crate::potential::{Monomial, PotentialSpec};

/// A value that is either given or computed from the landscape.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Auto<T> {
    #[default]
    Auto,
    Value(T),
}

impl<T: Serialize> Serialize for Auto<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Auto::Auto => s.serialize_str("auto"),
            Auto::Value(v) => v.serialize(s),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Auto<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<T> {
            Text(String),
            Value(T),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) if s == "auto" => Ok(Auto::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "expected \"auto\" or a value, got \"{s}\""
            ))),
            Raw::Value(v) => Ok(Auto::Value(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialBlock {
    /// `cosine_lattice`, `polynomial` or `quadratic`.
    pub family: String,
    /// Cosine lattice anisotropy.
    pub c: f64,
    /// Dimension of `polynomial` and `quadratic`.
    pub dim: usize,
    /// Curvature of `quadratic`: `f = a |x|^2 / 2`.
    pub a: f64,
    /// Polynomial terms `[coeff, p_1, ..., p_d]`.
    pub terms: Vec<Vec<f64>>,
    pub tilt: Vec<f64>,
}

impl Default for PotentialBlock {
    fn default() -> Self {
        PotentialBlock {
            family: "cosine_lattice".into(),
            c: 1.0,
            dim: 2,
            a: 1.0,
            terms: Vec::new(),
            tilt: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainBlock {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Radius of the patches put around saddles without a declared patch.
    /// `auto` is 0.2 times the smallest saddle separation.
    pub rho: Auto<f64>,
    pub patches: Vec<BoundaryPatch>,
    pub gamma: Vec<GammaPatch>,
}

impl Default for DomainBlock {
    fn default() -> Self {
        DomainBlock {
            lower: vec![-1.0, -1.0],
            upper: vec![1.0, 1.0],
            rho: Auto::Auto,
            patches: Vec::new(),
            gamma: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeBlock {
    pub seeds_per_axis: usize,
    pub tol: f64,
    pub boundary_samples: usize,
    /// Expected `m_q` for `q = 0..=d`; empty skips the check.
    pub expected_counts: Vec<usize>,
}

impl Default for LandscapeBlock {
    fn default() -> Self {
        LandscapeBlock {
            seeds_per_axis: 9,
            tol: 1e-10,
            boundary_samples: 200,
            expected_counts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesBlock {
    pub h: Vec<f64>,
}

impl Default for RatesBlock {
    fn default() -> Self {
        RatesBlock {
            h: vec![0.5, 0.4, 0.35, 0.3, 0.25],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralBlock {
    pub enabled: bool,
    /// The first spacing is used by `run`; the whole list by a `delta` sweep.
    pub delta: Vec<f64>,
    pub tol: f64,
    pub max_iters: usize,
    /// Temperature of the small eigenvalue count; `auto` is the `h` closest
    /// to 0.3.
    pub count_h: Auto<f64>,
    /// Count threshold as a multiple of `h`.
    pub count_factor: f64,
}

impl Default for SpectralBlock {
    fn default() -> Self {
        SpectralBlock {
            enabled: true,
            delta: vec![0.01],
            tol: 1e-12,
            max_iters: 200,
            count_h: Auto::Auto,
            count_factor: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixedBlock {
    pub enabled: bool,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub face: Face,
    pub h: Vec<f64>,
    pub delta: f64,
}

impl Default for MixedBlock {
    fn default() -> Self {
        MixedBlock {
            enabled: false,
            lower: vec![-0.6, -0.6],
            upper: vec![1.0, 0.6],
            face: Face::new(0, true),
            h: vec![0.35, 0.25],
            delta: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LangevinBlock {
    pub enabled: bool,
    pub h: f64,
    pub dt: f64,
    pub n: usize,
    /// `auto` is 20 / (smallest eigenvalue of Hess f at the minimum).
    pub burn_in: Auto<f64>,
    /// `auto` starts at the minimum.
    pub start: Auto<Vec<f64>>,
    pub max_steps: u64,
    pub exit_test: ExitTest,
    /// Also run at `dt / 2` on the same Brownian paths.
    pub dt_halving: bool,
}

impl Default for LangevinBlock {
    fn default() -> Self {
        LangevinBlock {
            enabled: true,
            h: 0.5,
            dt: 1e-3,
            n: 2000,
            burn_in: Auto::Auto,
            start: Auto::Auto,
            max_steps: 100_000_000,
            exit_test: ExitTest::Bridge,
            dt_halving: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KmcBlock {
    pub enabled: bool,
    pub h: f64,
    pub n: usize,
}

impl Default for KmcBlock {
    fn default() -> Self {
        KmcBlock {
            enabled: true,
            h: 0.5,
            n: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgmonBlock {
    pub enabled: bool,
    pub delta: f64,
    pub n_pairs: usize,
    /// Extra sources; the minimum is always included.
    pub sources: Vec<Vec<f64>>,
}

impl Default for AgmonBlock {
    fn default() -> Self {
        AgmonBlock {
            enabled: true,
            delta: 0.005,
            n_pairs: 1000,
            sources: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    H,
    Delta,
    Dt,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" => Ok(SweepAxis::H),
            "delta" => Ok(SweepAxis::Delta),
            "dt" => Ok(SweepAxis::Dt),
            other => Err(Error::Config(format!(
                "unknown sweep axis `{other}` (h, delta or dt)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Temperature of a `delta` sweep.
    pub h: f64,
}

impl Default for SweepBlock {
    fn default() -> Self {
        SweepBlock {
            axis: SweepAxis::H,
            values: vec![0.5, 0.4, 0.35, 0.3, 0.25],
            h: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub potential: PotentialBlock,
    pub domain: DomainBlock,
    pub landscape: LandscapeBlock,
    pub rates: RatesBlock,
    pub spectral: SpectralBlock,
    pub mixed: MixedBlock,
    pub langevin: LangevinBlock,
    pub kmc: KmcBlock,
    pub agmon: AgmonBlock,
    pub sweep: SweepBlock,
    pub output: OutputBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            potential: PotentialBlock::default(),
            domain: DomainBlock::default(),
            landscape: LandscapeBlock::default(),
            rates: RatesBlock::default(),
            spectral: SpectralBlock::default(),
            mixed: MixedBlock::default(),
            langevin: LangevinBlock::default(),
            kmc: KmcBlock::default(),
            agmon: AgmonBlock::default(),
            sweep: SweepBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be > 0, got {v}")))
    }
}

fn all_positive(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    v.iter().try_for_each(|&x| positive(name, x))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that can be checked before any stage runs.
    pub fn validate(&self) -> Result<()> {
        let p = self.potential()?;
        let dom = self.domain()?;
        if dom.dimension() != p.dimension() {
            return Err(Error::Config(format!(
                "domain has dimension {} but the potential has {}",
                dom.dimension(),
                p.dimension()
            )));
        }
        if let Auto::Value(rho) = self.domain.rho {
            positive("domain.rho", rho)?;
        }
        all_positive("rates.h", &self.rates.h)?;
        all_positive("spectral.delta", &self.spectral.delta)?;
        positive("spectral.tol", self.spectral.tol)?;
        positive("spectral.count_factor", self.spectral.count_factor)?;
        if let Auto::Value(h) = self.spectral.count_h {
            positive("spectral.count_h", h)?;
        }
        if self.mixed.enabled {
            all_positive("mixed.h", &self.mixed.h)?;
            positive("mixed.delta", self.mixed.delta)?;
            let sub = DomainSpec::new(self.mixed.lower.clone(), self.mixed.upper.clone())
                .map_err(|e| Error::Config(format!("mixed subdomain: {e}")))?;
            if sub.dimension() != p.dimension() || self.mixed.face.axis >= sub.dimension() {
                return Err(Error::Config(
                    "mixed subdomain or face does not match the dimension".into(),
                ));
            }
        }
        positive("langevin.h", self.langevin.h)?;
        positive("langevin.dt", self.langevin.dt)?;
        if let Auto::Value(t) = self.langevin.burn_in {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!(
                    "langevin.burn_in must be >= 0, got {t}"
                )));
            }
        }
        if let Auto::Value(s) = &self.langevin.start {
            if s.len() != p.dimension() || !dom.strictly_inside(s, 0.0) {
                return Err(Error::Config(format!(
                    "langevin.start {s:?} is not strictly inside the box"
                )));
            }
        }
        if self.langevin.enabled && self.langevin.n < 100 {
            return Err(Error::Config(format!(
                "langevin.n must be >= 100, got {}",
                self.langevin.n
            )));
        }
        positive("kmc.h", self.kmc.h)?;
        if self.kmc.enabled && self.kmc.n == 0 {
            return Err(Error::Config("kmc.n must be >= 1".into()));
        }
        positive("agmon.delta", self.agmon.delta)?;
        for s in &self.agmon.sources {
            if s.len() != p.dimension() || !dom.contains(s) {
                return Err(Error::Config(format!(
                    "agmon source {s:?} is outside the box"
                )));
            }
        }
        all_positive("sweep.values", &self.sweep.values)?;
        positive("sweep.h", self.sweep.h)?;
        let expected = &self.landscape.expected_counts;
        if !expected.is_empty() && expected.len() != p.dimension() + 1 {
            return Err(Error::Config(format!(
                "landscape.expected_counts needs {} entries, got {}",
                p.dimension() + 1,
                expected.len()
            )));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        let b = &self.potential;
        let p = match b.family.as_str() {
            "cosine_lattice" => PotentialSpec::cosine_lattice(b.c),
            "quadratic" => PotentialSpec::isotropic_quadratic(b.dim, b.a),
            "polynomial" => {
                let terms = b
                    .terms
                    .iter()
                    .map(|t| {
                        if t.len() != b.dim + 1 || t[1..].iter().any(|p| *p < 0.0 || p.fract() != 0.0) {
                            return Err(Error::Config(format!(
                                "polynomial term {t:?} must be [coeff, {} non-negative integer powers]",
                                b.dim
                            )));
                        }
                        let powers: Vec<u32> = t[1..].iter().map(|p| *p as u32).collect();
                        Ok(Monomial::new(t[0], &powers))
                    })
                    .collect::<Result<Vec<_>>>()?;
                PotentialSpec::polynomial(b.dim, terms)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown potential family `{other}` (cosine_lattice, polynomial or quadratic)"
                )))
            }
        }
        .map_err(|e| Error::Config(format!("potential: {e}")))?;
        if b.tilt.is_empty() {
            Ok(p)
        } else {
            p.with_tilt(b.tilt.clone())
                .map_err(|e| Error::Config(format!("potential.tilt: {e}")))
        }
    }

    /// The box with the declared patches and `Gamma` pieces.
    pub fn domain(&self) -> Result<DomainSpec> {
        let b = &self.domain;
        let mut dom = DomainSpec::new(b.lower.clone(), b.upper.clone())
            .map_err(|e| Error::Config(format!("domain: {e}")))?;
        for p in &b.patches {
            dom.add_patch(p.clone())
                .map_err(|e| Error::Config(format!("patch `{}`: {e}", p.label)))?;
        }
        for g in &b.gamma {
            if !b.patches.iter().any(|p| p.label == g.label) {
                return Err(Error::Config(format!(
                    "gamma `{}` does not name a declared patch",
                    g.label
                )));
            }
            dom.set_gamma(g.clone())
                .map_err(|e| Error::Config(format!("gamma `{}`: {e}", g.label)))?;
        }
        Ok(dom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml();
        assert!(text.contains("rho = \"auto\""));
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(
            ExperimentConfig::from_toml("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn unknown_family_is_a_config_error() {
        let e = ExperimentConfig::from_toml("[potential]\nfamily = \"morse\"\n").unwrap_err();
        assert!(
            matches!(e, Error::Config(ref m) if m.contains("morse")),
            "{e}"
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            ExperimentConfig::from_toml("[rates]\nhh = [0.5]\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn non_positive_values_are_rejected() {
        for text in [
            "[rates]\nh = [0.5, 0.0]\n",
            "[spectral]\ndelta = [-0.01]\n",
            "[langevin]\ndt = 0.0\n",
            "[rates]\nh = []\n",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn gamma_must_name_a_patch() {
        let text = "[[domain.gamma]]\nlabel = \"nope\"\nface = \"+x\"\n";
        assert!(matches!(
            ExperimentConfig::from_toml(text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn polynomial_terms_are_parsed() {
        let text =
            "[potential]\nfamily = \"polynomial\"\ndim = 2\nterms = [[0.5, 2, 0], [0.5, 0, 2]]\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let p = cfg.potential().unwrap();
        assert!((p.value(&[1.0, 2.0]) - 2.5).abs() < 1e-15);
        let bad = "[potential]\nfamily = \"polynomial\"\ndim = 2\nterms = [[0.5, 1.5, 0]]\n";
        assert!(ExperimentConfig::from_toml(bad).is_err());
    }

    #[test]
    fn explicit_values_replace_auto() {
        let cfg = ExperimentConfig::from_toml(
            "[domain]\nrho = 1.0\n[langevin]\nburn_in = 0.0\nstart = [0.1, 0.2]\n",
        )
        .unwrap();
        assert_eq!(cfg.domain.rho, Auto::Value(1.0));
        assert_eq!(cfg.langevin.burn_in, Auto::Value(0.0));
        assert_eq!(cfg.langevin.start, Auto::Value(vec![0.1, 0.2]));
        assert!(ExperimentConfig::from_toml("[domain]\nrho = \"big\"\n").is_err());
    }
}
