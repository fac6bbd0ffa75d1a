//! Encrypted register of authentication secrets.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! version: u8 = 1
//! count:   u32
//! count × { id_len: u16, id: [u8], blob_len: u32, blob: [u8], tag: [u8; 32] }
//! ```
//!
//! `blob` is a 16-byte nonce followed by the entry encrypted with a
//! SHA-256 counter keystream; `tag` is HMAC-SHA256 over version, id and blob.

use std::collections::BTreeMap;
use std::path::Path;

use hmac::{Hmac, KeyInit, Mac};
use rand::Rng;
use sha2::{Digest, Sha256};

use super::AuthSecret;
use crate::bits::BitVector;
use crate::error::{Error, Result};

pub const WALLET_VERSION: u8 = 1;
const NONCE_LEN: usize = 16;
const TAG_LEN: usize = 32;

type HmacSha256 = Hmac<Sha256>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Wallet {
    register: BTreeMap<String, AuthSecret>,
}

fn derive(master: &[u8], label: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(label);
    h.update(master);
    h.finalize().into()
}

fn keystream_xor(key: &[u8; 32], nonce: &[u8], data: &mut [u8]) {
    for (block, chunk) in data.chunks_mut(32).enumerate() {
        let mut h = Sha256::new();
        h.update(key);
        h.update(nonce);
        h.update((block as u64).to_le_bytes());
        let ks = h.finalize();
        for (d, k) in chunk.iter_mut().zip(ks.iter()) {
            *d ^= k;
        }
    }
}

fn tag(mac_key: &[u8; 32], id: &[u8], blob: &[u8]) -> [u8; TAG_LEN] {
    let mut mac = <HmacSha256 as KeyInit>::new_from_slice(mac_key).expect("any key length");
    mac.update(&[WALLET_VERSION]);
    mac.update(&(id.len() as u64).to_le_bytes());
    mac.update(id);
    mac.update(blob);
    mac.finalize().into_bytes().into()
}

fn put_bits(out: &mut Vec<u8>, v: &BitVector) {
    out.extend_from_slice(&(v.len() as u32).to_le_bytes());
    out.extend_from_slice(&v.to_packed_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Wallet("truncated wallet data".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn bits(&mut self) -> Result<BitVector> {
        let len = self.u32()? as usize;
        BitVector::from_packed_bytes(len, self.take(len.div_ceil(8))?)
            .map_err(|e| Error::Wallet(e.to_string()))
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn encode_secret(s: &AuthSecret) -> Vec<u8> {
    let mut out = Vec::new();
    out.push(u8::from(s.s_a.is_some()) | (u8::from(s.compromised) << 1));
    out.extend_from_slice(&s.reuse_counter.to_le_bytes());
    if let Some(a) = &s.s_a {
        put_bits(&mut out, a);
    }
    put_bits(&mut out, &s.s_b);
    out
}

fn decode_secret(id: &str, plain: &[u8]) -> Result<AuthSecret> {
    let mut r = Reader { buf: plain, pos: 0 };
    let flags = r.u8()?;
    let reuse_counter = r.u32()?;
    let s_a = if flags & 1 == 1 { Some(r.bits()?) } else { None };
    let s_b = r.bits()?;
    if !r.done() {
        return Err(Error::Wallet("trailing bytes in wallet entry".into()));
    }
    Ok(AuthSecret {
        partner_id: id.to_string(),
        s_a,
        s_b,
        reuse_counter,
        compromised: flags & 2 == 2,
    })
}

impl Wallet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, secret: AuthSecret) -> Option<AuthSecret> {
        self.register.insert(secret.partner_id.clone(), secret)
    }

    pub fn get(&self, partner_id: &str) -> Option<&AuthSecret> {
        self.register.get(partner_id)
    }

    pub fn get_mut(&mut self, partner_id: &str) -> Option<&mut AuthSecret> {
        self.register.get_mut(partner_id)
    }

    pub fn remove(&mut self, partner_id: &str) -> Option<AuthSecret> {
        self.register.remove(partner_id)
    }

    pub fn len(&self) -> usize {
        self.register.len()
    }

    pub fn is_empty(&self) -> bool {
        self.register.is_empty()
    }

    pub fn partners(&self) -> impl Iterator<Item = &str> {
        self.register.keys().map(String::as_str)
    }

    /// Serializes and encrypts the register under `master`.
    pub fn to_bytes<R: Rng + ?Sized>(&self, master: &[u8], rng: &mut R) -> Vec<u8> {
        let enc_key = derive(master, b"wallet-enc");
        let mac_key = derive(master, b"wallet-mac");
        let mut out = vec![WALLET_VERSION];
        out.extend_from_slice(&(self.register.len() as u32).to_le_bytes());
        for (id, secret) in &self.register {
            let mut blob = vec![0u8; NONCE_LEN];
            rng.fill(&mut blob[..]);
            let mut body = encode_secret(secret);
            keystream_xor(&enc_key, &blob[..NONCE_LEN], &mut body);
            blob.extend_from_slice(&body);
            out.extend_from_slice(&(id.len() as u16).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
            out.extend_from_slice(&(blob.len() as u32).to_le_bytes());
            out.extend_from_slice(&blob);
            out.extend_from_slice(&tag(&mac_key, id.as_bytes(), &blob));
        }
        out
    }

    /// Decrypts and authenticates a register; any modification or a wrong
    /// master key yields [`Error::Wallet`].
    pub fn from_bytes(bytes: &[u8], master: &[u8]) -> Result<Self> {
        let enc_key = derive(master, b"wallet-enc");
        let mac_key = derive(master, b"wallet-mac");
        let mut r = Reader { buf: bytes, pos: 0 };
        let version = r.u8()?;
        if version != WALLET_VERSION {
            return Err(Error::Wallet(format!("unsupported wallet version {version}")));
        }
        let count = r.u32()?;
        let mut register = BTreeMap::new();
        for _ in 0..count {
            let id_len = r.u16()? as usize;
            let id_bytes = r.take(id_len)?;
            let blob_len = r.u32()? as usize;
            let blob = r.take(blob_len)?;
            let stored_tag = r.take(TAG_LEN)?;
            if tag(&mac_key, id_bytes, blob)[..] != stored_tag[..] {
                return Err(Error::Wallet(
                    "authentication tag mismatch (wrong master key or tampered data)".into(),
                ));
            }
            if blob.len() < NONCE_LEN {
                return Err(Error::Wallet("entry too short".into()));
            }
            let id = std::str::from_utf8(id_bytes)
                .map_err(|_| Error::Wallet("partner id is not UTF-8".into()))?
                .to_string();
            let mut body = blob[NONCE_LEN..].to_vec();
            keystream_xor(&enc_key, &blob[..NONCE_LEN], &mut body);
            let secret = decode_secret(&id, &body)?;
            if register.insert(id.clone(), secret).is_some() {
                return Err(Error::Wallet(format!("duplicate partner '{id}'")));
            }
        }
        if !r.done() {
            return Err(Error::Wallet("trailing bytes after last entry".into()));
        }
        Ok(Self { register })
    }

    pub fn save<R: Rng + ?Sized>(&self, path: &Path, master: &[u8], rng: &mut R) -> Result<()> {
        std::fs::write(path, self.to_bytes(master, rng))?;
        Ok(())
    }

    pub fn load(path: &Path, master: &[u8]) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?, master)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn sample_wallet() -> Wallet {
        let mut rng = seeded(50);
        let mut w = Wallet::new();
        w.insert(AuthSecret::random("alice", 8, &mut rng));
        let mut bob = AuthSecret::random("bob", 12, &mut rng);
        bob.reuse_counter = 2;
        w.insert(bob);
        w.insert(AuthSecret::one_way("public-server", BitVector::from_bits(&[1, 0, 1])));
        w
    }

    #[test]
    fn roundtrip() {
        let w = sample_wallet();
        let bytes = w.to_bytes(b"master", &mut seeded(1));
        assert_eq!(bytes[0], WALLET_VERSION);
        let back = Wallet::from_bytes(&bytes, b"master").unwrap();
        assert_eq!(back, w);
        assert!(back.get("public-server").unwrap().is_half_empty());
        assert_eq!(back.partners().collect::<Vec<_>>(), vec!["alice", "bob", "public-server"]);
    }

    #[test]
    fn wrong_key_fails() {
        let bytes = sample_wallet().to_bytes(b"master", &mut seeded(2));
        assert!(matches!(Wallet::from_bytes(&bytes, b"other"), Err(Error::Wallet(_))));
    }

    #[test]
    fn every_single_byte_tamper_is_detected() {
        let bytes = sample_wallet().to_bytes(b"master", &mut seeded(3));
        for pos in 0..bytes.len() {
            let mut bad = bytes.clone();
            bad[pos] ^= 0x01;
            assert!(Wallet::from_bytes(&bad, b"master").is_err(), "byte {pos}");
        }
        assert!(Wallet::from_bytes(&bytes[..bytes.len() - 1], b"master").is_err());
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(Wallet::from_bytes(&longer, b"master").is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = std::env::temp_dir().join(format!("wallet-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.bin");
        let w = sample_wallet();
        w.save(&path, b"k", &mut seeded(4)).unwrap();
        assert_eq!(Wallet::load(&path, b"k").unwrap(), w);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
