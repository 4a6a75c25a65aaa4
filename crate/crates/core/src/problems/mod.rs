//! Built-in saddle problems with known or computable solutions.

mod mac;
mod random;
mod rt0;

use alloc::string::String;
use alloc::vec::Vec;

use crate::system::SaddleSystem;

pub use mac::gen_mac_stokes_channel;
pub use random::gen_random_saddle;
pub use rt0::gen_mixed_poisson_rt0;

/// Names accepted by [`generate`].
pub const GENERATOR_NAMES: [&str; 3] = ["mixed-poisson", "mac-stokes", "random"];

#[derive(Debug, Clone)]
pub struct GeneratedProblem {
    pub system: SaddleSystem,
    /// Reference primal solution `w` of the original system, when known.
    pub w_exact: Option<Vec<f64>>,
    pub p_exact: Option<Vec<f64>>,
    pub description: String,
    /// Mesh width (0 for problems without a mesh).
    pub h: f64,
}

/// Parameters for [`generate`]; fields a generator does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub n: usize,
    pub nx: usize,
    pub ny: usize,
    pub length: f64,
    pub m: usize,
    pub cond: f64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            n: 16,
            nx: 32,
            ny: 8,
            length: 5.0,
            m: 20,
            cond: 1e4,
            seed: 0,
        }
    }
}

/// Dispatches on a generator name from [`GENERATOR_NAMES`].
pub fn generate(name: &str, params: &GeneratorParams) -> crate::Result<GeneratedProblem> {
    match name {
        "mixed-poisson" => gen_mixed_poisson_rt0(params.n, params.seed),
        "mac-stokes" => gen_mac_stokes_channel(params.nx, params.ny, params.length),
        "random" => gen_random_saddle(params.m, params.n, params.cond, params.seed),
        other => Err(crate::Error::Invalid(alloc::format!(
            "unknown generator '{other}'; valid names: {}",
            GENERATOR_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_generator_lists_names() {
        let err = generate("q2q1", &GeneratorParams::default()).unwrap_err();
        let msg = alloc::format!("{err}");
        for name in GENERATOR_NAMES {
            assert!(msg.contains(name), "{msg}");
        }
    }
}
