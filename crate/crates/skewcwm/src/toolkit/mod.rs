//! Initialization, model selection, classification metrics, simulation
//! generators, and the replicated study drivers.

pub(crate) fn mix_seed(master: u64, parts: &[u64]) -> u64 {
    // splitmix64 chain over the coordinates
    let mut s = master;
    for &p in parts {
        s = s.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p);
        let mut z = s;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        s = z ^ (z >> 31);
    }
    s
}

mod init;
mod metrics;
mod protocol;
mod simulate;
mod study;

pub use init::{init_labels, InitScheme};
pub use metrics::{adjusted_rand_index, bic, count_params, ModelId};
pub use protocol::{fit_model, run_protocol};
pub use simulate::{preset, simulate_cwm, Preset, PRESET_NAMES};
pub use study::{
    best_permutation, recovery_study, selection_study, CellOutcome, RecoveryResult,
    SelectionGrid, StudyResult,
};
