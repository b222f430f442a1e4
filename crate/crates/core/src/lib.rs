//! Private linear transformation from a single server with joint privacy.
//!
//! A user wants `L` linear combinations `V X_W` of `D` out of the server's `K`
//! messages and must not reveal which `D` messages are involved. The user
//! sends a `(K - D + L) x K` MDS generator matrix `G` whose code contains the
//! demand rows; the server returns `G X`, and the user reads the demand back
//! with `L` fixed linear functionals. The download rate is `L / (K - D + L)`.
//!
//! Module map:
//! - [`ff`]: GF(p) arithmetic and messages in GF(p)^m
//! - [`matgf`]: matrices over GF(p), elimination, MDS tests, shortened codes
//! - [`grscode`]: generalized Reed-Solomon machinery
//! - [`protocol`]: query construction, answering, recovery, baselines, rates
//! - [`audit`]: structural and exact posterior privacy checks
//! - [`codec`], [`wire`]: binary files, JSON documents and TCP framing

pub mod audit;
pub mod codec;
pub mod error;
pub mod ff;
pub mod grscode;
pub mod matgf;
pub mod protocol;
pub mod wire;

pub use error::{Error, Result};
pub use ff::{msg_linear_combination, Dataset, FieldElement, Message, PrimeField};
pub use grscode::{ColumnAssignment, Extension, GrsSpec};
pub use matgf::Matrix;
pub use protocol::{
    build_query, direct_demand_eval, rate_report, recover, server_answer, Answer, DemandSpec, Mode, Query, QueryKey,
    RateReport, RecoveryPlan,
};
