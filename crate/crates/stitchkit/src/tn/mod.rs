//! MPS/MPO backend: random matrix-product states with perfect sampling,
//! thermal MPOs from imaginary-time evolution, and the transfer-matrix
//! analysis of translation-invariant matrix-product density operators.

mod container;
mod mpo;
mod mps;
mod thermal;
mod transfer;

pub use container::{load_mpdo_tensor, load_mpo, load_mps, save_mpdo_tensor, save_mpo, save_mps};
pub use mpo::{Mpo, MpoTensor};
pub use mps::{basis_mps, perfect_sample, random_mps, CanonicalForm, Mps, SiteTensor};
pub use thermal::{thermal_mpo, HamiltonianSpec, ThermalOptions};
pub use transfer::{
    analyze_transfer_spectrum, build_transfer_matrix, mpdo_purity_bound_check, mpdo_to_dense,
    random_mpdo_purified, random_mpdo_tensor, BoundCheck, MpdoTensor, PeriodicMpdo,
    TransferSpectrum,
};
