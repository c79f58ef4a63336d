//! Signature schemes a community controller can sign certificates with.

use ed25519_dalek::{Signature, Signer as _, SigningKey, Verifier as _, VerifyingKey};
use hmac::{Hmac, Mac};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

/// Sign/verify contract shared by every scheme.
pub trait SignatureScheme: Send + Sync {
    fn kind(&self) -> SignerKind;
    fn sign(&self, message: &[u8]) -> Vec<u8>;
    fn verify(&self, message: &[u8], signature: &[u8]) -> bool;
    /// Public verification material, if the scheme has any.
    fn public_key(&self) -> Option<Vec<u8>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignerKind {
    /// Ed25519 signatures.
    Ed25519,
    /// HMAC-SHA256 under a controller-held key. Cheap; used in the
    /// simulation hot path.
    KeyedHash,
}

impl SignerKind {
    pub fn generate<R: RngCore + CryptoRng>(self, rng: &mut R) -> Box<dyn SignatureScheme> {
        match self {
            SignerKind::Ed25519 => Box::new(Ed25519Signer::generate(rng)),
            SignerKind::KeyedHash => Box::new(KeyedHashSigner::generate(rng)),
        }
    }
}

#[derive(Clone)]
pub struct Ed25519Signer {
    signing: SigningKey,
    verifying: VerifyingKey,
}

impl Ed25519Signer {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let signing = SigningKey::generate(rng);
        let verifying = signing.verifying_key();
        Self { signing, verifying }
    }
}

impl SignatureScheme for Ed25519Signer {
    fn kind(&self) -> SignerKind {
        SignerKind::Ed25519
    }

    fn sign(&self, message: &[u8]) -> Vec<u8> {
        self.signing.sign(message).to_bytes().to_vec()
    }

    fn verify(&self, message: &[u8], signature: &[u8]) -> bool {
        let Ok(bytes) = <[u8; 64]>::try_from(signature) else {
            return false;
        };
        self.verifying
            .verify(message, &Signature::from_bytes(&bytes))
            .is_ok()
    }

    fn public_key(&self) -> Option<Vec<u8>> {
        Some(self.verifying.to_bytes().to_vec())
    }
}

pub struct KeyedHashSigner {
    key: [u8; 32],
}

impl KeyedHashSigner {
    pub fn new(key: [u8; 32]) -> Self {
        Self { key }
    }

    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Self { key }
    }

    fn mac(&self) -> Hmac<Sha256> {
        <Hmac<Sha256> as Mac>::new_from_slice(&self.key).expect("HMAC accepts any key length")
    }
}

impl SignatureScheme for KeyedHashSigner {
    fn kind(&self) -> SignerKind {
        SignerKind::KeyedHash
    }

    fn sign(&self, message: &[u8]) -> Vec<u8> {
        let mut mac = self.mac();
        mac.update(message);
        mac.finalize().into_bytes().to_vec()
    }

    fn verify(&self, message: &[u8], signature: &[u8]) -> bool {
        let mut mac = self.mac();
        mac.update(message);
        mac.verify_slice(signature).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn both_schemes_satisfy_the_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [SignerKind::Ed25519, SignerKind::KeyedHash] {
            let signer = kind.generate(&mut rng);
            let other = kind.generate(&mut rng);
            let sig = signer.sign(b"certificate");
            assert!(signer.verify(b"certificate", &sig));
            assert!(!signer.verify(b"certificatf", &sig));
            assert!(!other.verify(b"certificate", &sig));
            assert!(!signer.verify(b"certificate", &sig[1..]));
            assert_eq!(signer.kind(), kind);
        }
    }
}
