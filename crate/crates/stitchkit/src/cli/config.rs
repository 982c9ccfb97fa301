//! JSON experiment configs. The schema is strict: every payload lives in its
//! own struct with `deny_unknown_fields`, so a typo cannot silently
//! invalidate an expensive run.

use serde::{Deserialize, Serialize};

use crate::circuits::{apply_circuit, random_site_bases, sample_random_circuit, ProductInput};
use crate::dense::{DenseOperator, Interval};
use crate::error::{Error, Result};
use crate::tn::HamiltonianSpec;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingParams {
    pub h_x: f64,
    pub h_z: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XxzParams {
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Ising(IsingParams),
    Xxz(XxzParams),
}

impl ModelConfig {
    pub fn ising(h_x: f64, h_z: f64) -> Self {
        ModelConfig::Ising(IsingParams { h_x, h_z })
    }

    pub fn xxz(delta: f64) -> Self {
        ModelConfig::Xxz(XxzParams { delta })
    }

    pub fn spec(&self) -> HamiltonianSpec {
        match *self {
            ModelConfig::Ising(IsingParams { h_x, h_z }) => HamiltonianSpec::Ising { h_x, h_z },
            ModelConfig::Xxz(XxzParams { delta }) => HamiltonianSpec::Xxz { delta },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Ising(_) => "ising",
            ModelConfig::Xxz(_) => "xxz",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdqcParams {
    pub l: usize,
    pub ell: usize,
    pub gamma: f64,
    pub circuit_seed: u64,
    pub basis_seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsParams {
    pub l: usize,
    pub beta: f64,
    pub model: ModelConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhzMixtureParams {
    pub l: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeParams {
    pub l: usize,
}

/// States the dense pipelines can prepare.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    /// depolarized random brickwork circuit state
    Fdqc(FdqcParams),
    /// Gibbs state of a benchmark Hamiltonian
    Gibbs(GibbsParams),
    /// GHZ state mixed with white noise, the long-range counterexample
    GhzMixture(GhzMixtureParams),
    MaximallyMixed(SizeParams),
    Bell,
}

impl StateConfig {
    pub fn chain_length(&self) -> usize {
        match self {
            StateConfig::Fdqc(p) => p.l,
            StateConfig::Gibbs(p) => p.l,
            StateConfig::GhzMixture(p) => p.l,
            StateConfig::MaximallyMixed(p) => p.l,
            StateConfig::Bell => 2,
        }
    }

    pub fn build_dense(&self) -> Result<DenseOperator> {
        match self {
            StateConfig::Fdqc(p) => {
                let circuit = sample_random_circuit(p.l, p.ell, p.circuit_seed)?;
                let bases = random_site_bases(p.l, p.basis_seed);
                apply_circuit(&circuit, &ProductInput::depolarized(&bases, p.gamma)?)
            }
            StateConfig::Gibbs(p) => {
                let h = p.model.spec().dense(p.l)?;
                crate::dense::gibbs_state(&h, p.beta)
            }
            StateConfig::GhzMixture(p) => {
                if !(0.0..=1.0).contains(&p.weight) {
                    return Err(Error::Config(format!(
                        "mixture weight {} outside [0,1]",
                        p.weight
                    )));
                }
                Ok(DenseOperator::ghz(p.l).mix(&DenseOperator::maximally_mixed(p.l), p.weight))
            }
            StateConfig::MaximallyMixed(p) => Ok(DenseOperator::maximally_mixed(p.l)),
            StateConfig::Bell => Ok(DenseOperator::bell_pair()),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReuseParams {
    pub n_u: usize,
    pub n_m: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeConfig {
    Shadow,
    Reuse(ReuseParams),
}

impl SchemeConfig {
    pub fn scheme(&self) -> crate::shadows::Scheme {
        match *self {
            SchemeConfig::Shadow => crate::shadows::Scheme::Shadow,
            SchemeConfig::Reuse(ReuseParams { n_u, n_m }) => {
                crate::shadows::Scheme::Reuse { n_u, n_m }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub state: StateConfig,
    /// moment orders to evaluate (default 1..=5)
    #[serde(default = "default_moments")]
    pub moments: Vec<u32>,
    /// region for subsystem moments; full system when absent
    #[serde(default)]
    pub region: Option<Interval>,
    /// bipartition cut position for PT quantities; half chain when absent
    #[serde(default)]
    pub cut: Option<usize>,
    #[serde(default)]
    pub output_path: Option<String>,
}

fn default_moments() -> Vec<u32> {
    vec![1, 2, 3, 4, 5]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdqcCheckConfig {
    pub l: usize,
    pub ell: usize,
    pub gamma: f64,
    pub seed: u64,
    /// separator sizes |B| for the three-interval identity
    pub b_sizes: Vec<usize>,
    /// interval sizes k for the chain identity
    pub k_sizes: Vec<usize>,
    /// PT moment order for the four-interval identity
    #[serde(default = "default_pt_order")]
    pub pt_order: u32,
    #[serde(default)]
    pub output_path: Option<String>,
}

fn default_pt_order() -> u32 {
    3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowSimConfig {
    pub state: StateConfig,
    pub region: Interval,
    pub m: usize,
    pub scheme: SchemeConfig,
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
    /// where the raw batch goes; `<output>.batch` when absent
    #[serde(default)]
    pub batch_path: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StitchRunConfig {
    pub state: StateConfig,
    pub alpha2: f64,
    pub xi2: f64,
    pub delta: f64,
    pub confidence: f64,
    pub seed: u64,
    /// measurements per region; the bound value is used when absent
    #[serde(default)]
    pub m: Option<usize>,
    /// cap applied to the bound-implied M (desk-scale override)
    #[serde(default)]
    pub m_cap: Option<usize>,
    /// also run the f₃ estimation pipeline
    #[serde(default)]
    pub with_f3: bool,
    #[serde(default)]
    pub output_path: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpsDemoConfig {
    pub l: usize,
    pub chi: usize,
    pub k: usize,
    pub n_m: usize,
    /// distinct-unitary counts to sweep (x axis of the error curves)
    pub n_u_list: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    Dense,
    Mpo(MpoBackendParams),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpoBackendParams {
    pub max_chi: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AfcScanConfig {
    pub model: ModelConfig,
    pub beta: f64,
    pub l_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub backend: BackendConfig,
    /// also evaluate the PT additive error where feasible
    #[serde(default)]
    pub with_additive: bool,
    #[serde(default)]
    pub output_path: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PptScanConfig {
    pub model: ModelConfig,
    pub beta_list: Vec<f64>,
    pub l_list: Vec<usize>,
    #[serde(default = "default_c3")]
    pub c3: f64,
    #[serde(default = "default_c5")]
    pub c5: f64,
    #[serde(default)]
    pub output_path: Option<String>,
}

fn default_c3() -> f64 {
    crate::afc::DEFAULT_C3
}

fn default_c5() -> f64 {
    crate::afc::DEFAULT_C5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpdoBoundConfig {
    pub chi: usize,
    /// number of admissible random tensors to check
    pub tensors: usize,
    pub l_list: Vec<usize>,
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
}

pub fn parse_config<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let good = r#"{ "state": {"kind": "bell"}, "moments": [1, 2] }"#;
        assert!(parse_config::<OracleConfig>(good).is_ok());
        let bad = r#"{ "state": {"kind": "bell"}, "momnets": [1, 2] }"#;
        assert!(parse_config::<OracleConfig>(bad).is_err());
        let bad_state = r#"{ "state": {"kind": "bell", "l": 3} }"#;
        assert!(parse_config::<OracleConfig>(bad_state).is_err());
        let bad_params = r#"{ "state": {"kind": "maximally_mixed", "params": {"l": 3, "x": 1}} }"#;
        assert!(parse_config::<OracleConfig>(bad_params).is_err());
    }

    #[test]
    fn state_configs_build() {
        let fdqc = StateConfig::Fdqc(FdqcParams {
            l: 4,
            ell: 1,
            gamma: 0.2,
            circuit_seed: 1,
            basis_seed: 2,
        });
        assert_eq!(fdqc.build_dense().unwrap().n_qubits(), 4);
        let gibbs: StateConfig = serde_json::from_str(
            r#"{ "kind": "gibbs", "params": { "l": 3, "beta": 1.0,
                 "model": {"name": "ising", "params": {"h_x": 1.1, "h_z": -0.04}} } }"#,
        )
        .unwrap();
        assert_eq!(gibbs.build_dense().unwrap().n_qubits(), 3);
        let ghz = StateConfig::GhzMixture(GhzMixtureParams { l: 3, weight: 1.5 });
        assert!(ghz.build_dense().is_err());
    }
}
