//! Staggered central schemes for scalar conservation laws with a
//! discontinuous, spatially varying flux `u_t + f(k(x), u)_x = 0`.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod flux;
pub mod grid;
pub mod limiter;
pub mod scheme;
pub mod verify;

pub use error::{DfluxError, Result};
pub use flux::{Coefficient, FluxModel};
pub use grid::{InitialData, Mesh, Parity, StaggeredState};
pub use limiter::{LimiterConfig, LimiterKind};
pub use scheme::{march, CflLevel, Scheme, SchemeConfig};
