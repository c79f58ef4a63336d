//! Certificate lifecycle and the per-community identity registry.
//!
//! Each community controller is the only CA for its residents. It assigns
//! certificate IDs, signs certificates with its own scheme, and is the
//! authority that verifies them for other communities.

mod signer;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{CommunityId, Second, UeId};

pub use signer::{Ed25519Signer, KeyedHashSigner, SignatureScheme, SignerKind};

/// Default certificate lifetime in simulated seconds.
pub const DEFAULT_LIFETIME: Second = 3600;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentityError {
    #[error("certificate request rejected: {0}")]
    RequestRejected(&'static str),
    #[error("unknown certificate {0}")]
    UnknownCertificate(u64),
    #[error("certificate {0} is revoked")]
    CertificateRevoked(u64),
    #[error("invalid registry: {0}")]
    InvalidRegistry(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UeType {
    IoT,
    Handset,
    Server,
    NetworkEntity,
}

impl UeType {
    fn code(self) -> u8 {
        match self {
            UeType::IoT => 0,
            UeType::Handset => 1,
            UeType::Server => 2,
            UeType::NetworkEntity => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateOrigin {
    SelfGenerated,
    HomeGenerated,
}

/// An already-decrypted certificate submission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateRequest {
    pub subject_public_key: Vec<u8>,
    pub ue_type: UeType,
    pub os_version: String,
    pub proof_of_identity: Vec<u8>,
    pub origin: CertificateOrigin,
}

impl CertificateRequest {
    fn validate(&self) -> Result<(), IdentityError> {
        if self.proof_of_identity.is_empty() {
            return Err(IdentityError::RequestRejected("empty proof of identity"));
        }
        if self.subject_public_key.is_empty() {
            return Err(IdentityError::RequestRejected("empty subject public key"));
        }
        if self.os_version.trim().is_empty() {
            return Err(IdentityError::RequestRejected("empty operating system version"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertStatus {
    Active,
    Revoked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub cert_id: u64,
    pub community_id: CommunityId,
    pub asn: u32,
    #[serde(with = "b64")]
    pub subject_public_key: Vec<u8>,
    pub ue_type: UeType,
    pub os_version: String,
    pub issued_at: Second,
    pub valid_until: Second,
    pub status: CertStatus,
    #[serde(with = "b64")]
    pub issuer_signature: Vec<u8>,
}

impl Certificate {
    pub fn ue_id(&self) -> UeId {
        UeId::new(self.asn, self.community_id, self.cert_id)
    }

    /// Canonical bytes covered by the issuer signature: every field except
    /// the signature, fixed order, big-endian, length-prefixed variable parts.
    pub fn signed_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.subject_public_key.len() + self.os_version.len());
        out.extend_from_slice(b"zt6g-cert-v1");
        out.extend_from_slice(&self.cert_id.to_be_bytes());
        out.extend_from_slice(&self.community_id.to_be_bytes());
        out.extend_from_slice(&self.asn.to_be_bytes());
        out.extend_from_slice(&(self.subject_public_key.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.subject_public_key);
        out.push(self.ue_type.code());
        out.extend_from_slice(&(self.os_version.len() as u32).to_be_bytes());
        out.extend_from_slice(self.os_version.as_bytes());
        out.extend_from_slice(&self.issued_at.to_be_bytes());
        out.extend_from_slice(&self.valid_until.to_be_bytes());
        out.push(match self.status {
            CertStatus::Active => 0,
            CertStatus::Revoked => 1,
        });
        out
    }

    /// True when both certificates carry the same issued content, ignoring
    /// status and signature.
    fn same_content(&self, other: &Certificate) -> bool {
        self.cert_id == other.cert_id
            && self.community_id == other.community_id
            && self.asn == other.asn
            && self.subject_public_key == other.subject_public_key
            && self.ue_type == other.ue_type
            && self.os_version == other.os_version
            && self.issued_at == other.issued_at
            && self.valid_until == other.valid_until
    }
}

/// Outcome of certificate verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verification {
    Valid,
    Expired,
    Revoked,
    SignatureMismatch,
    Unknown,
}

/// Identity database of one community controller.
pub struct IdentityRegistry {
    asn: u32,
    community_id: CommunityId,
    signer: Box<dyn SignatureScheme>,
    records: BTreeMap<u64, Certificate>,
    next_cert_id: u64,
    lifetime: Second,
}

impl std::fmt::Debug for IdentityRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdentityRegistry")
            .field("asn", &self.asn)
            .field("community_id", &self.community_id)
            .field("signer", &self.signer.kind())
            .field("records", &self.records.len())
            .field("next_cert_id", &self.next_cert_id)
            .field("lifetime", &self.lifetime)
            .finish()
    }
}

impl IdentityRegistry {
    pub fn new(asn: u32, community_id: CommunityId, signer: Box<dyn SignatureScheme>) -> Self {
        Self::with_lifetime(asn, community_id, signer, DEFAULT_LIFETIME)
    }

    pub fn with_lifetime(
        asn: u32,
        community_id: CommunityId,
        signer: Box<dyn SignatureScheme>,
        lifetime: Second,
    ) -> Self {
        assert!(lifetime > 0, "certificate lifetime must be positive");
        Self {
            asn,
            community_id,
            signer,
            records: BTreeMap::new(),
            next_cert_id: 1,
            lifetime,
        }
    }

    pub fn community_id(&self) -> CommunityId {
        self.community_id
    }

    pub fn asn(&self) -> u32 {
        self.asn
    }

    pub fn lifetime(&self) -> Second {
        self.lifetime
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, cert_id: u64) -> Option<&Certificate> {
        self.records.get(&cert_id)
    }

    fn sign(&self, cert: &mut Certificate) {
        cert.issuer_signature = self.signer.sign(&cert.signed_bytes());
    }

    pub fn register_certificate(
        &mut self,
        req: &CertificateRequest,
        now: Second,
    ) -> Result<Certificate, IdentityError> {
        req.validate()?;
        let cert_id = self.next_cert_id;
        self.next_cert_id += 1;
        let mut cert = Certificate {
            cert_id,
            community_id: self.community_id,
            asn: self.asn,
            subject_public_key: req.subject_public_key.clone(),
            ue_type: req.ue_type,
            os_version: req.os_version.clone(),
            issued_at: now,
            valid_until: now + self.lifetime,
            status: CertStatus::Active,
            issuer_signature: Vec::new(),
        };
        self.sign(&mut cert);
        self.records.insert(cert_id, cert.clone());
        Ok(cert)
    }

    /// Checks, in order: the issuer signature over the presented bytes, the
    /// record on file, that the presented content is the current record,
    /// revocation, and expiry.
    pub fn verify_certificate(&self, cert: &Certificate, now: Second) -> Verification {
        if !self.signer.verify(&cert.signed_bytes(), &cert.issuer_signature) {
            return Verification::SignatureMismatch;
        }
        let Some(record) = self.records.get(&cert.cert_id) else {
            return Verification::Unknown;
        };
        if !record.same_content(cert) {
            // Superseded by an update: the presented signature no longer
            // covers what is on record.
            return Verification::SignatureMismatch;
        }
        if record.status == CertStatus::Revoked {
            return Verification::Revoked;
        }
        if now > record.valid_until {
            return Verification::Expired;
        }
        Verification::Valid
    }

    /// Re-issues an active certificate under its original ID with new
    /// subject content and a lifetime restarted from `now`.
    pub fn update_certificate(
        &mut self,
        cert_id: u64,
        req: &CertificateRequest,
        now: Second,
    ) -> Result<Certificate, IdentityError> {
        let status = self
            .records
            .get(&cert_id)
            .ok_or(IdentityError::UnknownCertificate(cert_id))?
            .status;
        if status == CertStatus::Revoked {
            return Err(IdentityError::CertificateRevoked(cert_id));
        }
        req.validate()?;
        let mut cert = self.records[&cert_id].clone();
        cert.subject_public_key = req.subject_public_key.clone();
        cert.ue_type = req.ue_type;
        cert.os_version = req.os_version.clone();
        cert.issued_at = now;
        cert.valid_until = now + self.lifetime;
        self.sign(&mut cert);
        self.records.insert(cert_id, cert.clone());
        Ok(cert)
    }

    /// Marks a certificate revoked. Revoking twice is a no-op.
    pub fn revoke_certificate(&mut self, cert_id: u64) -> Result<(), IdentityError> {
        let mut cert = self
            .records
            .get(&cert_id)
            .ok_or(IdentityError::UnknownCertificate(cert_id))?
            .clone();
        if cert.status == CertStatus::Revoked {
            return Ok(());
        }
        cert.status = CertStatus::Revoked;
        self.sign(&mut cert);
        self.records.insert(cert_id, cert);
        Ok(())
    }

    pub fn snapshot(&self) -> RegistrySnapshot {
        RegistrySnapshot {
            asn: self.asn,
            community_id: self.community_id,
            signer: self.signer.kind(),
            public_key: self.signer.public_key(),
            lifetime_s: self.lifetime,
            next_cert_id: self.next_cert_id,
            records: self.records.values().cloned().collect(),
        }
    }

    /// Restores a registry from a snapshot. The signer must be the one the
    /// snapshot was produced with; key material is never exported.
    pub fn from_snapshot(
        snapshot: RegistrySnapshot,
        signer: Box<dyn SignatureScheme>,
    ) -> Result<Self, IdentityError> {
        if signer.kind() != snapshot.signer {
            return Err(IdentityError::InvalidRegistry("signer kind mismatch"));
        }
        if snapshot.public_key.is_some() && signer.public_key() != snapshot.public_key {
            return Err(IdentityError::InvalidRegistry("public key mismatch"));
        }
        if snapshot.lifetime_s == 0 {
            return Err(IdentityError::InvalidRegistry("zero lifetime"));
        }
        let mut records = BTreeMap::new();
        for cert in snapshot.records {
            if cert.cert_id >= snapshot.next_cert_id
                || cert.community_id != snapshot.community_id
                || cert.asn != snapshot.asn
            {
                return Err(IdentityError::InvalidRegistry("record outside registry scope"));
            }
            if records.insert(cert.cert_id, cert).is_some() {
                return Err(IdentityError::InvalidRegistry("duplicate certificate id"));
            }
        }
        Ok(Self {
            asn: snapshot.asn,
            community_id: snapshot.community_id,
            signer,
            records,
            next_cert_id: snapshot.next_cert_id,
            lifetime: snapshot.lifetime_s,
        })
    }
}

/// JSON-serialisable registry export. Byte fields are base64.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistrySnapshot {
    pub asn: u32,
    pub community_id: CommunityId,
    pub signer: SignerKind,
    #[serde(default, with = "b64_opt", skip_serializing_if = "Option::is_none")]
    pub public_key: Option<Vec<u8>>,
    pub lifetime_s: Second,
    pub next_cert_id: u64,
    pub records: Vec<Certificate>,
}

mod b64 {
    use base64::{engine::general_purpose::STANDARD, Engine};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        STANDARD.decode(text).map_err(serde::de::Error::custom)
    }
}

mod b64_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &Option<Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
        match bytes {
            Some(b) => super::b64::serialize(b, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<u8>>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::b64")] Vec<u8>);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
