//! Exact computation in nilpotent products of cyclic p-groups.

pub mod arith;
pub mod capability;
pub mod collector;
pub mod engine;
pub mod error;
pub mod hallbasis;
pub mod oracle;
pub mod wordlang;

pub use arith::Valuation;
pub use capability::{Justification, Status, Verdict, WitnessReport};
pub use collector::{Collector, FreeNilpotent, NormalForm, PcGroup};
pub use engine::{build_group, GroupView, Id, Subgroup, DEFAULT_BUDGET};
pub use error::{Error, Result};
pub use hallbasis::{HallBasis, Variant};
pub use oracle::{CheckReport, CheckStatus, IdentityCheck};
pub use wordlang::{parse_group_spec, parse_word, GroupSpec, Presentation11, WordAst};
