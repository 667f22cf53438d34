//! Acknowledgments: the composite signature interface, a mock backend and the
//! byte-exact simple and path ACK formats.

mod mock;
mod scheme;
mod wire;

use thiserror::Error;

pub use mock::MockScheme;
pub use scheme::{
    CompositeScheme, KeyPair, MessageDescriptor, SecretKey, Signature, Verdict, VerificationKey,
    KEY_LEN, SIGNATURE_LEN,
};
pub use wire::{
    extend_path_ack, make_simple_ack, path_ack_len, verify_path_ack, Hop, PathAck, SimpleAck,
    TaskId, AMOUNT_LEN, HOP_LEN, SIMPLE_ACK_LEN, TASK_ID_LEN,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AckError {
    #[error("security parameter must be positive")]
    SecurityParameter,
    #[error("amount {0} does not fit in 4 bytes")]
    AmountOverflow(u64),
    #[error("previous path acknowledgment does not verify")]
    InvalidPrev,
    #[error("hop message already present in the path")]
    DuplicateHop,
    #[error("bad encoding length: expected {expected} bytes, got {got}")]
    Length { expected: String, got: usize },
}
