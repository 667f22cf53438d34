//! Deterministic hash-based stand-in for an aggregate signature scheme.
//!
//! A signature on `m` under key `vk` is the first 33 bytes of
//! `SHA-512(domain || vk || m)`; composition is bytewise XOR. This gives
//! constant-size, order-free, incrementally composable signatures, and
//! verification only needs public data. It is NOT unforgeable: anyone who
//! knows `vk` can produce the tag. Use it for simulation only.

use sha2::{Digest, Sha256, Sha512};

use super::scheme::{
    CompositeScheme, KeyPair, MessageDescriptor, SecretKey, Signature, Verdict, VerificationKey,
    KEY_LEN, SIGNATURE_LEN,
};
use super::AckError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MockScheme {
    security_parameter: u32,
    domain: [u8; 32],
}

impl MockScheme {
    pub fn security_parameter(&self) -> u32 {
        self.security_parameter
    }

    fn public_from_secret(&self, secret: &SecretKey) -> VerificationKey {
        let digest = Sha256::new()
            .chain_update(self.domain)
            .chain_update(b"vk")
            .chain_update(secret.0)
            .finalize();
        let mut vk = [0u8; KEY_LEN];
        // compressed-point style prefix
        vk[0] = 0x02 | (digest[31] & 1);
        vk[1..].copy_from_slice(&digest[..32]);
        VerificationKey(vk)
    }

    fn tag(&self, vk: &VerificationKey, message: &[u8]) -> Signature {
        let digest = Sha512::new()
            .chain_update(self.domain)
            .chain_update(vk.0)
            .chain_update(message)
            .finalize();
        let mut sig = [0u8; SIGNATURE_LEN];
        sig.copy_from_slice(&digest[..SIGNATURE_LEN]);
        Signature(sig)
    }
}

impl CompositeScheme for MockScheme {
    fn setup(security_parameter: u32) -> Result<Self, AckError> {
        if security_parameter == 0 {
            return Err(AckError::SecurityParameter);
        }
        let digest = Sha256::new()
            .chain_update(b"pop-mock-composite")
            .chain_update(security_parameter.to_be_bytes())
            .finalize();
        Ok(Self {
            security_parameter,
            domain: digest.into(),
        })
    }

    fn keygen(&self, seed: &[u8]) -> KeyPair {
        let secret = SecretKey(
            Sha256::new()
                .chain_update(self.domain)
                .chain_update(b"sk")
                .chain_update(seed)
                .finalize()
                .into(),
        );
        let public = self.public_from_secret(&secret);
        KeyPair { secret, public }
    }

    fn sign(&self, secret: &SecretKey, message: &[u8]) -> Signature {
        self.tag(&self.public_from_secret(secret), message)
    }

    fn verify(&self, descriptor: &MessageDescriptor, signature: &Signature) -> Verdict {
        if descriptor.is_empty() || !descriptor.messages_unique() {
            return Verdict::Invalid;
        }
        let expected = descriptor
            .entries()
            .iter()
            .map(|(m, vk)| self.tag(vk, m))
            .fold(Signature([0; SIGNATURE_LEN]), |acc, s| self.combine(&acc, &s));
        (expected == *signature).into()
    }

    fn combine(&self, a: &Signature, b: &Signature) -> Signature {
        let mut out = a.0;
        for (o, x) in out.iter_mut().zip(b.0) {
            *o ^= x;
        }
        Signature(out)
    }
}
