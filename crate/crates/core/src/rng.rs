//! Seeded random streams.
//!
//! Every consumer of randomness draws from a ChaCha8 generator keyed by the
//! master seed and a stream id, so a partial re-run (one row of edges, one
//! optimiser start) reproduces exactly what the full run produced, and the
//! results do not depend on thread scheduling.
//!
//! Stream ids:
//!
//! | id                     | consumer                               |
//! |------------------------|----------------------------------------|
//! | `1`                    | vertex latents `X_1..X_n`              |
//! | `2`                    | decomposition split (vertex types)     |
//! | `EDGE_BASE + i`        | edges `ij`, `j > i`, of row `i`        |
//! | `MULTISTART_BASE + s`  | optimiser start `s`                    |
//! | `COLOUR_BASE + t`      | balanced classes of strategy part `t`  |
//! | `COLOUR_BASE + 2²⁴ + r`| independent-set restart `r`            |
//! | `PROPERTY_BASE + 2²⁴·s + t` | trial `t` of property suite `s`   |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const LATENTS: u64 = 1;
pub const SPLIT: u64 = 2;
pub const EDGE_BASE: u64 = 1 << 32;
pub const MULTISTART_BASE: u64 = 2 << 32;
pub const COLOUR_BASE: u64 = 3 << 32;
pub const PROPERTY_BASE: u64 = 4 << 32;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
