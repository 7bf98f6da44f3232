//! Wire encodings for the two case-study packets.
//!
//! ```text
//! beacon        [0x01][xc f64 LE][yc f64 LE][chno u16 LE]            19 octets
//! cluster head  [0x02][xc f64 LE][yc f64 LE][qno u16 LE][aa u16 LE]  21 octets
//! ```
//!
//! The codec checks layout only. Whether a quadrant number or actor address
//! makes sense is the receiving node's business.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BEACON_TAG: u8 = 0x01;
pub const CLUSTER_HEAD_TAG: u8 = 0x02;
pub const BEACON_LEN: usize = 19;
pub const CLUSTER_HEAD_LEN: usize = 21;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("cannot encode non-finite coordinate")]
    NonFinite,
    #[error("expected kind tag {expected:#04x}, found {found:#04x}")]
    KindMismatch { expected: u8, found: u8 },
    #[error("expected {expected} octets, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("decoded coordinate is not finite")]
    Corrupt,
}

/// Sensor → cluster head detection report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeaconNodePacket {
    pub xc: f64,
    pub yc: f64,
    pub chno: u16,
}

/// Cluster head → actor dispatch command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterHeadNodePacket {
    pub xc: f64,
    pub yc: f64,
    pub qno: u16,
    pub aa: u16,
}

/// An encoded packet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WireFrame(Vec<u8>);

impl WireFrame {
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        Self(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn kind_tag(&self) -> Option<u8> {
        self.0.first().copied()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

fn check_coords(xc: f64, yc: f64) -> Result<(), CodecError> {
    if xc.is_finite() && yc.is_finite() {
        Ok(())
    } else {
        Err(CodecError::NonFinite)
    }
}

pub fn encode_beacon(p: &BeaconNodePacket) -> Result<WireFrame, CodecError> {
    check_coords(p.xc, p.yc)?;
    let mut buf = Vec::with_capacity(BEACON_LEN);
    buf.push(BEACON_TAG);
    buf.extend_from_slice(&p.xc.to_le_bytes());
    buf.extend_from_slice(&p.yc.to_le_bytes());
    buf.extend_from_slice(&p.chno.to_le_bytes());
    Ok(WireFrame(buf))
}

pub fn encode_cluster_head(p: &ClusterHeadNodePacket) -> Result<WireFrame, CodecError> {
    check_coords(p.xc, p.yc)?;
    let mut buf = Vec::with_capacity(CLUSTER_HEAD_LEN);
    buf.push(CLUSTER_HEAD_TAG);
    buf.extend_from_slice(&p.xc.to_le_bytes());
    buf.extend_from_slice(&p.yc.to_le_bytes());
    buf.extend_from_slice(&p.qno.to_le_bytes());
    buf.extend_from_slice(&p.aa.to_le_bytes());
    Ok(WireFrame(buf))
}

/// Checks tag and length, then hands back the octets after the tag.
fn body(bytes: &[u8], tag: u8, len: usize) -> Result<&[u8], CodecError> {
    match bytes.first() {
        None => return Err(CodecError::Truncated { expected: len, found: 0 }),
        Some(&found) if found != tag => {
            return Err(CodecError::KindMismatch { expected: tag, found })
        }
        _ => {}
    }
    if bytes.len() != len {
        return Err(CodecError::Truncated { expected: len, found: bytes.len() });
    }
    Ok(&bytes[1..])
}

fn read_f64(b: &[u8]) -> f64 {
    let mut raw = [0u8; 8];
    raw.copy_from_slice(&b[..8]);
    f64::from_le_bytes(raw)
}

fn read_u16(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn read_coords(b: &[u8]) -> Result<(f64, f64), CodecError> {
    let xc = read_f64(&b[0..8]);
    let yc = read_f64(&b[8..16]);
    if !(xc.is_finite() && yc.is_finite()) {
        return Err(CodecError::Corrupt);
    }
    Ok((xc, yc))
}

pub fn decode_beacon(f: &WireFrame) -> Result<BeaconNodePacket, CodecError> {
    let b = body(f.as_bytes(), BEACON_TAG, BEACON_LEN)?;
    let (xc, yc) = read_coords(b)?;
    Ok(BeaconNodePacket { xc, yc, chno: read_u16(&b[16..18]) })
}

pub fn decode_cluster_head(f: &WireFrame) -> Result<ClusterHeadNodePacket, CodecError> {
    let b = body(f.as_bytes(), CLUSTER_HEAD_TAG, CLUSTER_HEAD_LEN)?;
    let (xc, yc) = read_coords(b)?;
    Ok(ClusterHeadNodePacket {
        xc,
        yc,
        qno: read_u16(&b[16..18]),
        aa: read_u16(&b[18..20]),
    })
}
