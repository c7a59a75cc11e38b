pub mod channel;
pub mod error;
pub mod gate;
pub mod json;
pub mod linalg;
pub mod protocol;
pub mod sweep;
pub mod zoo;

pub use channel::{channels_equal, operator_schmidt_rank, DensityMatrix, KrausChannel};
pub use error::{Error, Result};
pub use gate::{gate_channel, gate_party, GateVerdict, PartyGateReport, Verdict, DEFAULT_GATE_TOL};
pub use linalg::{ComplexMatrix, ComplexVector, IndependentSubset, OperatorBasis};
pub use protocol::{protocol_to_channel, validate_protocol, verify_protocol, ProtocolNode, ProtocolTree, Verification};
pub use sweep::{run_sweep, SweepConfig, SweepRow};
