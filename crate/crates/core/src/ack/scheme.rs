use std::collections::BTreeSet;
use std::fmt;

use super::AckError;

pub const KEY_LEN: usize = 33;
pub const SIGNATURE_LEN: usize = 33;

/// 33-byte public verification key.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VerificationKey(pub [u8; KEY_LEN]);

impl Default for VerificationKey {
    fn default() -> Self {
        Self([0; KEY_LEN])
    }
}

impl fmt::Debug for VerificationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vk:{}", hex::encode(&self.0[..6]))
    }
}

impl fmt::Display for VerificationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey(pub [u8; 32]);

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub secret: SecretKey,
    pub public: VerificationKey,
}

/// A (possibly composite) signature. Its length does not depend on how many
/// signatures were composed into it.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature(pub [u8; SIGNATURE_LEN]);

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sig:{}", hex::encode(&self.0[..6]))
    }
}

/// Set of `(message, verification key)` pairs a composite signature claims
/// to cover.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MessageDescriptor {
    entries: Vec<(Vec<u8>, VerificationKey)>,
}

impl MessageDescriptor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(message: impl Into<Vec<u8>>, vk: VerificationKey) -> Self {
        let mut l = Self::new();
        l.push(message, vk);
        l
    }

    pub fn push(&mut self, message: impl Into<Vec<u8>>, vk: VerificationKey) {
        self.entries.push((message.into(), vk));
    }

    pub fn entries(&self) -> &[(Vec<u8>, VerificationKey)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when no message occurs twice.
    pub fn messages_unique(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.entries.iter().all(|(m, _)| seen.insert(m.as_slice()))
    }

    /// True when the two descriptors share no message.
    pub fn is_disjoint(&self, other: &Self) -> bool {
        let mine: BTreeSet<&[u8]> = self.entries.iter().map(|(m, _)| m.as_slice()).collect();
        other.entries.iter().all(|(m, _)| !mine.contains(m.as_slice()))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Self { entries }
    }
}

impl FromIterator<(Vec<u8>, VerificationKey)> for MessageDescriptor {
    fn from_iter<T: IntoIterator<Item = (Vec<u8>, VerificationKey)>>(iter: T) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid,
}

impl Verdict {
    pub fn is_valid(self) -> bool {
        self == Verdict::Valid
    }
}

impl From<bool> for Verdict {
    fn from(ok: bool) -> Self {
        if ok {
            Verdict::Valid
        } else {
            Verdict::Invalid
        }
    }
}

/// Composite signature scheme: incremental composition over disjoint message
/// descriptors, order-independent.
pub trait CompositeScheme {
    /// Public parameters for security level `security_parameter`.
    fn setup(security_parameter: u32) -> Result<Self, AckError>
    where
        Self: Sized;

    /// Deterministic key pair derived from `seed`.
    fn keygen(&self, seed: &[u8]) -> KeyPair;

    fn sign(&self, secret: &SecretKey, message: &[u8]) -> Signature;

    /// Valid iff `signature` is the composition of signatures on exactly the
    /// entries of `descriptor`. Duplicate messages are always invalid.
    fn verify(&self, descriptor: &MessageDescriptor, signature: &Signature) -> Verdict;

    /// Combines two signatures without checking them.
    fn combine(&self, a: &Signature, b: &Signature) -> Signature;

    /// Composite over `l1 ∪ l2`, or `None` when either input fails to verify
    /// or the descriptors overlap.
    fn compose(
        &self,
        first: (&MessageDescriptor, &Signature),
        second: (&MessageDescriptor, &Signature),
    ) -> Option<Signature> {
        let (l1, s1) = first;
        let (l2, s2) = second;
        if !self.verify(l1, s1).is_valid() || !self.verify(l2, s2).is_valid() {
            return None;
        }
        if !l1.is_disjoint(l2) {
            return None;
        }
        Some(self.combine(s1, s2))
    }
}
