//! Versioned little-endian binary files for topic models and comment
//! networks.
//!
//! Both start with an 8-byte magic and a `u32` version. Strings are a `u32`
//! byte length followed by UTF-8.

use std::io::{self, Read, Write};

use cascadekit_core::network::CommentNetwork;
use cascadekit_core::topics::TopicModel;

pub const LDA_MAGIC: &[u8; 8] = b"CKLDA\0\0\0";
pub const NET_MAGIC: &[u8; 8] = b"CKNET\0\0\0";
pub const FORMAT_VERSION: u32 = 1;

/// Upper bound on element counts read from a header, so a corrupt header
/// cannot request an absurd allocation before the data runs out.
const MAX_ELEMENTS: u64 = 1 << 32;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a {0} file (bad magic)")]
    Magic(&'static str),
    #[error("unsupported {kind} format version {found}")]
    Version { kind: &'static str, found: u32 },
    #[error("corrupt file: {0}")]
    Corrupt(String),
}

fn put_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn get<const N: usize>(r: &mut impl Read) -> Result<[u8; N], FormatError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FormatError::Corrupt("truncated".into()),
        _ => FormatError::Io(e),
    })?;
    Ok(b)
}

fn get_u32(r: &mut impl Read) -> Result<u32, FormatError> {
    get::<4>(r).map(u32::from_le_bytes)
}

fn get_u64(r: &mut impl Read) -> Result<u64, FormatError> {
    get::<8>(r).map(u64::from_le_bytes)
}

fn get_f64(r: &mut impl Read) -> Result<f64, FormatError> {
    get::<8>(r).map(f64::from_le_bytes)
}

fn get_str(r: &mut impl Read) -> Result<String, FormatError> {
    let len = get_u32(r)? as usize;
    let mut buf = Vec::new();
    r.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(FormatError::Corrupt("truncated string".into()));
    }
    String::from_utf8(buf).map_err(|_| FormatError::Corrupt("string is not UTF-8".into()))
}

fn header(r: &mut impl Read, magic: &[u8; 8], kind: &'static str) -> Result<(), FormatError> {
    if &get::<8>(r).map_err(|_| FormatError::Magic(kind))? != magic {
        return Err(FormatError::Magic(kind));
    }
    match get_u32(r)? {
        FORMAT_VERSION => Ok(()),
        found => Err(FormatError::Version { kind, found }),
    }
}

fn count(v: u64, what: &str) -> Result<usize, FormatError> {
    if v > MAX_ELEMENTS {
        return Err(FormatError::Corrupt(format!("{what} count {v} too large")));
    }
    Ok(v as usize)
}

fn expect_end(r: &mut impl Read) -> Result<(), FormatError> {
    let mut extra = [0u8; 1];
    match r.read(&mut extra)? {
        0 => Ok(()),
        _ => Err(FormatError::Corrupt("trailing bytes".into())),
    }
}

/// Layout: magic, version, k: u32, V: u32, alpha: f64, beta: f64,
/// iterations: u64, seed: u64, V words, then `k·V` phi values row-major.
pub fn write_topic_model(w: &mut impl Write, model: &TopicModel) -> io::Result<()> {
    w.write_all(LDA_MAGIC)?;
    put_u32(w, FORMAT_VERSION)?;
    put_u32(w, model.k as u32)?;
    put_u32(w, model.vocab_size() as u32)?;
    put_f64(w, model.alpha)?;
    put_f64(w, model.beta)?;
    put_u64(w, model.iterations as u64)?;
    put_u64(w, model.seed)?;
    for word in &model.words {
        put_str(w, word)?;
    }
    for &p in &model.phi {
        put_f64(w, p)?;
    }
    Ok(())
}

pub fn read_topic_model(r: &mut impl Read) -> Result<TopicModel, FormatError> {
    header(r, LDA_MAGIC, "topic model")?;
    let k = count(get_u32(r)?.into(), "topic")?;
    let v = count(get_u32(r)?.into(), "word")?;
    if k == 0 || v == 0 {
        return Err(FormatError::Corrupt("empty model".into()));
    }
    count((k as u64) * (v as u64), "phi")?;
    let alpha = get_f64(r)?;
    let beta = get_f64(r)?;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(FormatError::Corrupt("non-positive hyperparameter".into()));
    }
    let iterations = get_u64(r)? as usize;
    let seed = get_u64(r)?;
    let words = (0..v).map(|_| get_str(r)).collect::<Result<Vec<_>, _>>()?;
    let phi = (0..k * v).map(|_| get_f64(r)).collect::<Result<Vec<_>, _>>()?;
    for t in 0..k {
        let row = &phi[t * v..(t + 1) * v];
        let sum: f64 = row.iter().sum();
        if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (sum - 1.0).abs() > 1e-6 {
            return Err(FormatError::Corrupt(format!("phi row {t} is not a distribution")));
        }
    }
    expect_end(r)?;
    Ok(TopicModel { k, alpha, beta, iterations, seed, words, phi })
}

/// Layout: magic, version, N: u32, E: u64, N names, then E
/// `(from, to, weight)` u32 triples sorted by `(from, to)`.
pub fn write_network(w: &mut impl Write, net: &CommentNetwork) -> io::Result<()> {
    w.write_all(NET_MAGIC)?;
    put_u32(w, FORMAT_VERSION)?;
    put_u32(w, net.node_count() as u32)?;
    put_u64(w, net.edge_count() as u64)?;
    for name in net.names() {
        put_str(w, name)?;
    }
    for &(a, b, wt) in net.edges() {
        put_u32(w, a)?;
        put_u32(w, b)?;
        put_u32(w, wt)?;
    }
    Ok(())
}

/// Reads a network, checking that names are sorted and unique and edges
/// are in range, loop-free, sorted and positive.
pub fn read_network(r: &mut impl Read) -> Result<CommentNetwork, FormatError> {
    header(r, NET_MAGIC, "network")?;
    let n = count(get_u32(r)?.into(), "node")?;
    let e = count(get_u64(r)?, "edge")?;
    let names = (0..n).map(|_| get_str(r)).collect::<Result<Vec<_>, _>>()?;
    if names.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FormatError::Corrupt("node names not sorted and unique".into()));
    }
    let mut edges = Vec::with_capacity(e.min(1 << 20));
    let mut prev: Option<(u32, u32)> = None;
    for _ in 0..e {
        let (a, b, wt) = (get_u32(r)?, get_u32(r)?, get_u32(r)?);
        if a as usize >= n || b as usize >= n || a == b || wt == 0 || prev.is_some_and(|p| p >= (a, b)) {
            return Err(FormatError::Corrupt(format!("invalid edge ({a}, {b}, {wt})")));
        }
        prev = Some((a, b));
        edges.push((names[a as usize].as_str(), names[b as usize].as_str(), wt));
    }
    expect_end(r)?;
    let net = CommentNetwork::from_weighted_edges(edges);
    if net.node_count() != n {
        return Err(FormatError::Corrupt("isolated nodes in node table".into()));
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> TopicModel {
        TopicModel {
            k: 2,
            alpha: 25.0,
            beta: 0.01,
            iterations: 10,
            seed: 7,
            words: vec!["a".into(), "b".into(), "c".into()],
            phi: vec![0.5, 0.25, 0.25, 0.1, 0.1, 0.8],
        }
    }

    #[test]
    fn topic_model_round_trip() {
        let mut buf = Vec::new();
        write_topic_model(&mut buf, &model()).unwrap();
        assert_eq!(&buf[..8], LDA_MAGIC);
        assert_eq!(read_topic_model(&mut &buf[..]).unwrap(), model());
    }

    #[test]
    fn topic_model_rejects_damage() {
        let mut buf = Vec::new();
        write_topic_model(&mut buf, &model()).unwrap();
        assert!(matches!(read_topic_model(&mut &buf[..buf.len() - 3]), Err(FormatError::Corrupt(_))));
        let mut v2 = buf.clone();
        v2[8] = 2;
        assert!(matches!(read_topic_model(&mut &v2[..]), Err(FormatError::Version { found: 2, .. })));
        assert!(matches!(read_topic_model(&mut &b"CKNET\0\0\0"[..]), Err(FormatError::Magic(_))));
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_topic_model(&mut &extra[..]).is_err());
    }

    #[test]
    fn network_round_trip() {
        let net = CommentNetwork::from_weighted_edges([("bob", "ann", 2), ("ann", "cy", 1), ("cy", "bob", 3)]);
        let mut buf = Vec::new();
        write_network(&mut buf, &net).unwrap();
        assert_eq!(read_network(&mut &buf[..]).unwrap(), net);
        // flip an edge endpoint into a self-loop
        let last = buf.len() - 12;
        buf.copy_within(last + 4..last + 8, last);
        assert!(read_network(&mut &buf[..]).is_err());
    }
}
