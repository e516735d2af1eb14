use super::net::{Mlp, OutputActivation};
use super::RlError;

/// File magic of serialized networks.
pub const WEIGHTS_MAGIC: &[u8; 4] = b"GSRL";
/// Current weights format version.
pub const WEIGHTS_VERSION: u32 = 1;

/// `"GSRL"`, version (u32 LE), layer count (u32 LE), layer sizes (u32 LE each),
/// then every parameter as f64 LE in layer order.
pub fn encode_weights(net: &Mlp) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * net.sizes().len() + 8 * net.num_params());
    out.extend_from_slice(WEIGHTS_MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(net.sizes().len() as u32).to_le_bytes());
    for s in net.sizes() {
        out.extend_from_slice(&(*s as u32).to_le_bytes());
    }
    for p in net.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_weights(bytes: &[u8], output: OutputActivation) -> Result<Mlp, RlError> {
    let corrupt = |msg: &str| RlError::Weights(msg.to_string());
    let mut cursor = bytes;
    let mut take = |n: usize| -> Result<&[u8], RlError> {
        if cursor.len() < n {
            return Err(corrupt("truncated file"));
        }
        let (head, tail) = cursor.split_at(n);
        cursor = tail;
        Ok(head)
    };
    if take(4)? != WEIGHTS_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes"));
    let version = u32_at(take(4)?);
    if version != WEIGHTS_VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let count = u32_at(take(4)?) as usize;
    if !(2..=64).contains(&count) {
        return Err(corrupt("implausible layer count"));
    }
    let mut sizes = Vec::with_capacity(count);
    for _ in 0..count {
        let s = u32_at(take(4)?) as usize;
        if s == 0 {
            return Err(corrupt("zero layer size"));
        }
        sizes.push(s);
    }
    let expected: usize = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    let body = take(8 * expected)?;
    let params = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if !cursor.is_empty() {
        return Err(corrupt("trailing bytes"));
    }
    Mlp::from_params(&sizes, output, params).ok_or_else(|| corrupt("non-finite parameters"))
}
