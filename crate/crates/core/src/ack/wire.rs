//! Byte-exact ACK encodings.
//!
//! Every signed message is `task_id (32) || contributor_vk (33) || amount (4, BE)`.
//!
//! * simple ACK: `message || signature` = 102 bytes
//! * path ACK: `hop_0 || ... || hop_{n-1} || composite` = 33 + 69n bytes,
//!   hops ordered root first.
//!
//! Neither format carries the key of the final signer; the verifier supplies
//! it. Inside a path, hop `k` is signed by the contributor named in hop
//! `k + 1`.

use std::fmt;

use super::scheme::{
    CompositeScheme, KeyPair, MessageDescriptor, Signature, Verdict, VerificationKey, KEY_LEN,
    SIGNATURE_LEN,
};
use super::AckError;

pub const TASK_ID_LEN: usize = 32;
pub const AMOUNT_LEN: usize = 4;
pub const HOP_LEN: usize = TASK_ID_LEN + KEY_LEN + AMOUNT_LEN;
pub const SIMPLE_ACK_LEN: usize = HOP_LEN + SIGNATURE_LEN;

/// Size in bytes of an encoded path ACK with `hops` hops.
pub const fn path_ack_len(hops: usize) -> usize {
    SIGNATURE_LEN + HOP_LEN * hops
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TaskId(pub [u8; TASK_ID_LEN]);

impl TaskId {
    /// Convenience constructor: the id's last 8 bytes hold `n` big-endian.
    pub fn from_u64(n: u64) -> Self {
        let mut id = [0u8; TASK_ID_LEN];
        id[TASK_ID_LEN - 8..].copy_from_slice(&n.to_be_bytes());
        Self(id)
    }
}

impl fmt::Debug for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "task:{}", hex::encode(self.0))
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

/// One signed claim: "`contributor_vk` did task `task_id` for `amount`".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hop {
    pub task_id: TaskId,
    pub contributor_vk: VerificationKey,
    pub amount: u32,
}

impl Hop {
    pub fn new(task_id: TaskId, contributor_vk: VerificationKey, amount: u64) -> Result<Self, AckError> {
        let amount = u32::try_from(amount).map_err(|_| AckError::AmountOverflow(amount))?;
        Ok(Self {
            task_id,
            contributor_vk,
            amount,
        })
    }

    pub fn message(&self) -> [u8; HOP_LEN] {
        let mut out = [0u8; HOP_LEN];
        out[..TASK_ID_LEN].copy_from_slice(&self.task_id.0);
        out[TASK_ID_LEN..TASK_ID_LEN + KEY_LEN].copy_from_slice(&self.contributor_vk.0);
        out[TASK_ID_LEN + KEY_LEN..].copy_from_slice(&self.amount.to_be_bytes());
        out
    }

    fn decode(bytes: &[u8]) -> Self {
        debug_assert_eq!(bytes.len(), HOP_LEN);
        let mut task = [0u8; TASK_ID_LEN];
        task.copy_from_slice(&bytes[..TASK_ID_LEN]);
        let mut vk = [0u8; KEY_LEN];
        vk.copy_from_slice(&bytes[TASK_ID_LEN..TASK_ID_LEN + KEY_LEN]);
        let mut amount = [0u8; AMOUNT_LEN];
        amount.copy_from_slice(&bytes[TASK_ID_LEN + KEY_LEN..]);
        Self {
            task_id: TaskId(task),
            contributor_vk: VerificationKey(vk),
            amount: u32::from_be_bytes(amount),
        }
    }
}

fn read_signature(bytes: &[u8]) -> Signature {
    let mut sig = [0u8; SIGNATURE_LEN];
    sig.copy_from_slice(bytes);
    Signature(sig)
}

/// Acknowledgment for simple mining: a plain signature by the beneficiary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimpleAck {
    pub hop: Hop,
    pub signature: Signature,
}

impl SimpleAck {
    pub fn task_id(&self) -> TaskId {
        self.hop.task_id
    }

    pub fn encode(&self) -> [u8; SIMPLE_ACK_LEN] {
        let mut out = [0u8; SIMPLE_ACK_LEN];
        out[..HOP_LEN].copy_from_slice(&self.hop.message());
        out[HOP_LEN..].copy_from_slice(&self.signature.0);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, AckError> {
        if bytes.len() != SIMPLE_ACK_LEN {
            return Err(AckError::Length {
                expected: SIMPLE_ACK_LEN.to_string(),
                got: bytes.len(),
            });
        }
        Ok(Self {
            hop: Hop::decode(&bytes[..HOP_LEN]),
            signature: read_signature(&bytes[HOP_LEN..]),
        })
    }

    pub fn verify<B: CompositeScheme>(&self, scheme: &B, beneficiary_vk: &VerificationKey) -> Verdict {
        scheme.verify(
            &MessageDescriptor::single(self.hop.message().to_vec(), *beneficiary_vk),
            &self.signature,
        )
    }
}

/// Beneficiary signs `(task_id, contributor_vk, amount)`.
pub fn make_simple_ack<B: CompositeScheme>(
    scheme: &B,
    beneficiary: &KeyPair,
    task_id: TaskId,
    contributor_vk: VerificationKey,
    amount: u64,
) -> Result<SimpleAck, AckError> {
    let hop = Hop::new(task_id, contributor_vk, amount)?;
    let signature = scheme.sign(&beneficiary.secret, &hop.message());
    Ok(SimpleAck { hop, signature })
}

/// Acknowledgment for progressive mining: every hop from the DAG root down
/// to the uploader, under one composite signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathAck {
    hops: Vec<Hop>,
    composite: Signature,
}

impl PathAck {
    pub fn hops(&self) -> &[Hop] {
        &self.hops
    }

    pub fn composite(&self) -> &Signature {
        &self.composite
    }

    pub fn depth(&self) -> usize {
        self.hops.len()
    }

    pub fn leaf(&self) -> &Hop {
        self.hops.last().expect("path ack has at least one hop")
    }

    /// Key that signed hop `k`, given the key of whoever signed the last hop.
    pub fn signer(&self, k: usize, leaf_vk: &VerificationKey) -> VerificationKey {
        self.hops
            .get(k + 1)
            .map(|next| next.contributor_vk)
            .unwrap_or(*leaf_vk)
    }

    pub fn descriptor(&self, leaf_vk: &VerificationKey) -> MessageDescriptor {
        (0..self.hops.len())
            .map(|k| (self.hops[k].message().to_vec(), self.signer(k, leaf_vk)))
            .collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(path_ack_len(self.hops.len()));
        for hop in &self.hops {
            out.extend_from_slice(&hop.message());
        }
        out.extend_from_slice(&self.composite.0);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, AckError> {
        let body = bytes.len().checked_sub(SIGNATURE_LEN);
        match body {
            Some(body) if body > 0 && body % HOP_LEN == 0 => {
                let hops = bytes[..body].chunks_exact(HOP_LEN).map(Hop::decode).collect();
                Ok(Self {
                    hops,
                    composite: read_signature(&bytes[body..]),
                })
            }
            _ => Err(AckError::Length {
                expected: "33 + 69n, n >= 1".into(),
                got: bytes.len(),
            }),
        }
    }

    /// Drops hop `k` while keeping the composite; used to build forgery
    /// attempts in tests and demos.
    pub fn without_hop(&self, k: usize) -> Self {
        let mut hops = self.hops.clone();
        hops.remove(k);
        Self {
            hops,
            composite: self.composite,
        }
    }

    /// Replaces the composite; used to build forgery attempts.
    pub fn with_composite(&self, composite: Signature) -> Self {
        Self {
            hops: self.hops.clone(),
            composite,
        }
    }

    /// Replaces one hop; used to build forgery attempts.
    pub fn with_hop(&self, k: usize, hop: Hop) -> Self {
        let mut hops = self.hops.clone();
        hops[k] = hop;
        Self {
            hops,
            composite: self.composite,
        }
    }
}

/// Appends a hop signed by `beneficiary` to `prev` (or starts a new path at
/// the root when `prev` is `None`). `contributor_vk` must be the key that
/// signed `prev`'s last hop.
pub fn extend_path_ack<B: CompositeScheme>(
    scheme: &B,
    prev: Option<&PathAck>,
    beneficiary: &KeyPair,
    task_id: TaskId,
    contributor_vk: VerificationKey,
    amount: u64,
) -> Result<PathAck, AckError> {
    let hop = Hop::new(task_id, contributor_vk, amount)?;
    let message = hop.message();
    let signature = scheme.sign(&beneficiary.secret, &message);
    let Some(prev) = prev else {
        return Ok(PathAck {
            hops: vec![hop],
            composite: signature,
        });
    };

    let prev_descriptor = prev.descriptor(&contributor_vk);
    if !scheme.verify(&prev_descriptor, &prev.composite).is_valid() {
        return Err(AckError::InvalidPrev);
    }
    let new_entry = MessageDescriptor::single(message.to_vec(), beneficiary.public);
    if !prev_descriptor.is_disjoint(&new_entry) {
        return Err(AckError::DuplicateHop);
    }
    let composite = scheme
        .compose((&prev_descriptor, &prev.composite), (&new_entry, &signature))
        .ok_or(AckError::InvalidPrev)?;
    let mut hops = prev.hops.clone();
    hops.push(hop);
    Ok(PathAck { hops, composite })
}

/// Valid iff the first hop names `expected_root_vk` as contributor and the
/// composite covers exactly the hops, with `leaf_vk` as the final signer.
pub fn verify_path_ack<B: CompositeScheme>(
    scheme: &B,
    ack: &PathAck,
    expected_root_vk: &VerificationKey,
    leaf_vk: &VerificationKey,
) -> Verdict {
    match ack.hops.first() {
        Some(first) if first.contributor_vk == *expected_root_vk => {
            scheme.verify(&ack.descriptor(leaf_vk), &ack.composite)
        }
        _ => Verdict::Invalid,
    }
}
