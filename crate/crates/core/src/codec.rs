//! Encoding, any-k decoding, and single systematic-node repair.
//!
//! Node c < k stores (a_c, b_c). Parity node k + j stores
//!
//! ```text
//! ( P_jᵀa + λ·Σ_{i ∈ B_j} b_i ,  P_jᵀb + Σ_{i ∈ A_j} a_i )
//! ```
//!
//! where A_j and B_j are the plan's parts for column j (empty for j = 0).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::base_code::{decode_substripe, CodeParams};
use crate::construct::{BpdCode, Half};
use crate::error::{BpdError, Result};
use crate::field::{Elem, FieldTower};
use crate::linalg::solve;

/// The 2k data symbols of one stripe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stripe {
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
}

impl Stripe {
    pub fn zero(k: usize) -> Self {
        Stripe {
            a: vec![Elem::ZERO; k],
            b: vec![Elem::ZERO; k],
        }
    }

    pub fn pairs(&self) -> Vec<(Elem, Elem)> {
        self.a.iter().copied().zip(self.b.iter().copied()).collect()
    }

    pub fn from_pairs(pairs: &[(Elem, Elem)]) -> Self {
        Stripe {
            a: pairs.iter().map(|p| p.0).collect(),
            b: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// Contents of all n nodes: (first-substripe symbol, second-substripe symbol).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub nodes: Vec<(Elem, Elem)>,
}

fn check_stripe(params: &CodeParams, stripe: &Stripe) -> Result<()> {
    for len in [stripe.a.len(), stripe.b.len()] {
        if len != params.k {
            return Err(BpdError::DimensionMismatch {
                expected: params.k,
                got: len,
            });
        }
    }
    Ok(())
}

pub fn encode(code: &BpdCode, stripe: &Stripe) -> Result<Codeword> {
    let params = code.params();
    check_stripe(params, stripe)?;
    let tower = code.tower();
    let parity = code.parity();
    let plan = code.plan();
    let mut nodes = stripe.pairs();
    for j in 0..params.r {
        let mut first = parity.parity(tower, j, &stripe.a);
        let mut second = parity.parity(tower, j, &stripe.b);
        let b_sum = sum(tower, plan.part(Half::B, j).iter().map(|&i| stripe.b[i]));
        first = tower.add(first, tower.mul(code.lambda(), b_sum));
        second = tower.add(
            second,
            sum(tower, plan.part(Half::A, j).iter().map(|&i| stripe.a[i])),
        );
        nodes.push((first, second));
    }
    Ok(Codeword { nodes })
}

fn sum(tower: &FieldTower, xs: impl Iterator<Item = Elem>) -> Elem {
    xs.fold(Elem::ZERO, |acc, x| tower.add(acc, x))
}

/// Reconstructs the stripe from the first k available nodes (by index).
pub fn decode_any_k(code: &BpdCode, available: &BTreeMap<usize, (Elem, Elem)>) -> Result<Stripe> {
    let CodeParams { n, k, .. } = *code.params();
    if let Some(&bad) = available.keys().find(|&&c| c >= n) {
        return Err(BpdError::InvalidParameter(format!(
            "node {} out of range",
            bad + 1
        )));
    }
    if available.len() < k {
        return Err(BpdError::InsufficientData {
            needed: k,
            got: available.len(),
        });
    }
    if (0..k).all(|c| available.contains_key(&c)) {
        return Ok(Stripe::from_pairs(
            &(0..k).map(|c| available[&c]).collect::<Vec<_>>(),
        ));
    }
    let g = code.generator_matrix();
    let chosen: Vec<(usize, (Elem, Elem))> =
        available.iter().take(k).map(|(&c, &v)| (c, v)).collect();
    // Each received symbol y_col = Σ_row x_row · G[row][col]; solve for x.
    let mut a = Vec::with_capacity(2 * k);
    let mut y = Vec::with_capacity(2 * k);
    for &(c, (s0, s1)) in &chosen {
        for (sub, value) in [(0, s0), (1, s1)] {
            a.push((0..2 * k).map(|row| g[row][2 * c + sub]).collect());
            y.push(value);
        }
    }
    let x = solve(code.tower(), a, y)?;
    Ok(Stripe {
        a: (0..k).map(|i| x[2 * i]).collect(),
        b: (0..k).map(|i| x[2 * i + 1]).collect(),
    })
}

/// One downloaded symbol: node (0-based) and substripe (0 = first, 1 = second).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SymbolRead {
    pub node: usize,
    pub substripe: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairReport {
    pub failed: usize,
    pub reads: Vec<SymbolRead>,
    pub symbols_downloaded: usize,
    pub recovered: (Elem, Elem),
}

impl RepairReport {
    /// JSON record with 1-based node numbers and hex symbols.
    pub fn to_json(&self, tower: &FieldTower, ok: bool) -> serde_json::Value {
        serde_json::json!({
            "failed": self.failed + 1,
            "reads": self.reads.iter().map(|r| serde_json::json!({
                "node": r.node + 1,
                "substripe": r.substripe + 1,
            })).collect::<Vec<_>>(),
            "downloaded": self.symbols_downloaded,
            "recovered": [tower.to_hex(self.recovered.0), tower.to_hex(self.recovered.1)],
            "ok": ok,
        })
    }
}

/// Records every symbol fetched from surviving nodes.
struct Downloader<'a> {
    word: &'a Codeword,
    failed: usize,
    reads: Vec<SymbolRead>,
}

impl Downloader<'_> {
    fn get(&mut self, node: usize, substripe: usize) -> Elem {
        assert_ne!(node, self.failed, "repair must not read the failed node");
        self.reads.push(SymbolRead { node, substripe });
        let pair = self.word.nodes[node];
        if substripe == 0 {
            pair.0
        } else {
            pair.1
        }
    }
}

/// Rebuilds systematic node `failed` (0-based) from the other nodes.
///
/// First the companion substripe symbol is decoded from the k-1 other
/// systematic symbols and the clean column-0 parity. Then the piggybacked
/// parity holding the failed node's own symbol is read together with the
/// other members of its part.
pub fn repair_systematic(code: &BpdCode, failed: usize, word: &Codeword) -> Result<RepairReport> {
    let params = *code.params();
    let CodeParams { n, k, .. } = params;
    if failed >= k {
        return Err(BpdError::Unsupported(format!(
            "node {} is a parity node; only systematic repair is supported",
            failed + 1
        )));
    }
    if word.nodes.len() != n {
        return Err(BpdError::DimensionMismatch {
            expected: n,
            got: word.nodes.len(),
        });
    }
    let tower = code.tower();
    let parity = code.parity();
    let Some((half, column)) = code.plan().placement(failed) else {
        return Err(BpdError::Unsupported(format!(
            "node {} is not piggybacked under this plan",
            failed + 1
        )));
    };
    // A-half nodes decode their b symbol first; B-half nodes their a symbol.
    let (clean_sub, piggy_sub) = match half {
        Half::A => (1, 0),
        Half::B => (0, 1),
    };
    let mut dl = Downloader {
        word,
        failed,
        reads: Vec::new(),
    };

    let mut known = BTreeMap::new();
    for c in (0..k).filter(|&c| c != failed) {
        known.insert(c, dl.get(c, clean_sub));
    }
    known.insert(k, dl.get(k, clean_sub));
    let clean_data = decode_substripe(parity, &known, tower)?;
    let clean_symbol = clean_data[failed];

    // The piggybacked parity lives on the clean substripe's side.
    let carrier = dl.get(k + column, clean_sub);
    let base = parity.parity(tower, column, &clean_data);
    let mut residue = tower.add(carrier, base);
    let part = code.plan().part(half, column);
    if half == Half::B {
        residue = tower
            .div(residue, code.lambda())
            .map_err(|_| BpdError::InvalidParameter("λ = 0 cannot carry piggybacks".into()))?;
    }
    for &other in part.iter().filter(|&&i| i != failed) {
        residue = tower.add(residue, dl.get(other, piggy_sub));
    }
    let recovered = match half {
        Half::A => (residue, clean_symbol),
        Half::B => (clean_symbol, residue),
    };
    Ok(RepairReport {
        failed,
        symbols_downloaded: dl.reads.len(),
        reads: dl.reads,
        recovered,
    })
}

/// Baseline repair: read both symbols of k surviving nodes and decode everything.
pub fn repair_trivial(code: &BpdCode, failed: usize, word: &Codeword) -> Result<RepairReport> {
    let CodeParams { n, k, .. } = *code.params();
    if failed >= n {
        return Err(BpdError::InvalidParameter(format!(
            "node {} out of range",
            failed + 1
        )));
    }
    let mut dl = Downloader {
        word,
        failed,
        reads: Vec::new(),
    };
    let mut available = BTreeMap::new();
    for c in (0..n).filter(|&c| c != failed).take(k) {
        available.insert(c, (dl.get(c, 0), dl.get(c, 1)));
    }
    let stripe = decode_any_k(code, &available)?;
    let recovered = encode(code, &stripe)?.nodes[failed];
    Ok(RepairReport {
        failed,
        symbols_downloaded: dl.reads.len(),
        reads: dl.reads,
        recovered,
    })
}

/// Magic bytes of stripe and codeword files.
pub const MAGIC: &[u8; 4] = b"BPD2";
pub const FORMAT_VERSION: u8 = 1;

/// Parsed stripe (k pairs) or codeword (n pairs) file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolFile {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub pairs: Vec<(Elem, Elem)>,
}

impl SymbolFile {
    pub fn is_codeword(&self) -> bool {
        self.pairs.len() == self.n
    }
}

fn elem_width(m: usize) -> usize {
    (4 * m).div_ceil(8)
}

/// Header `BPD2`, version, n, k, m, then the pairs in node order.
pub fn write_symbols(params: &CodeParams, tower: &FieldTower, pairs: &[(Elem, Elem)]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 2 * pairs.len() * tower.byte_len());
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.push(params.n as u8);
    out.push(params.k as u8);
    out.push(tower.degree() as u8);
    for &(x, y) in pairs {
        out.extend(tower.to_bytes(x));
        out.extend(tower.to_bytes(y));
    }
    out
}

pub fn write_stripe(code: &BpdCode, stripe: &Stripe) -> Vec<u8> {
    write_symbols(code.params(), code.tower(), &stripe.pairs())
}

pub fn write_codeword(code: &BpdCode, word: &Codeword) -> Vec<u8> {
    write_symbols(code.params(), code.tower(), &word.nodes)
}

pub fn read_symbols(bytes: &[u8]) -> Result<SymbolFile> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(BpdError::Format("bad magic (expected BPD2)".into()));
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(BpdError::Format(format!(
            "unsupported version {}",
            bytes[4]
        )));
    }
    let (n, k, m) = (bytes[5] as usize, bytes[6] as usize, bytes[7] as usize);
    if !(1..=3).contains(&m) || k == 0 || k >= n {
        return Err(BpdError::Format(format!("bad header n={n} k={k} m={m}")));
    }
    let w = elem_width(m);
    let body = &bytes[8..];
    if !body.len().is_multiple_of(2 * w) {
        return Err(BpdError::Format("truncated symbol data".into()));
    }
    let count = body.len() / (2 * w);
    if count != k && count != n {
        return Err(BpdError::DimensionMismatch {
            expected: n,
            got: count,
        });
    }
    let q = 1u32 << (4 * m);
    let parse = |chunk: &[u8]| -> Result<Elem> {
        let mut buf = [0u8; 2];
        buf[..w].copy_from_slice(chunk);
        let v = u16::from_le_bytes(buf);
        if (v as u32) >= q {
            return Err(BpdError::Format(format!("symbol {v:#x} out of range")));
        }
        Ok(crate::field::Elem::from_raw(v))
    };
    let pairs = body
        .chunks(2 * w)
        .map(|c| Ok((parse(&c[..w])?, parse(&c[w..])?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolFile { n, k, m, pairs })
}

fn check_header(code: &BpdCode, file: &SymbolFile) -> Result<()> {
    let p = code.params();
    if (file.n, file.k, file.m) != (p.n, p.k, code.tower().degree()) {
        return Err(BpdError::DimensionMismatch {
            expected: p.n,
            got: file.n,
        });
    }
    Ok(())
}

pub fn read_stripe(code: &BpdCode, bytes: &[u8]) -> Result<Stripe> {
    let file = read_symbols(bytes)?;
    check_header(code, &file)?;
    if file.pairs.len() != file.k {
        return Err(BpdError::DimensionMismatch {
            expected: file.k,
            got: file.pairs.len(),
        });
    }
    Ok(Stripe::from_pairs(&file.pairs))
}

pub fn read_codeword(code: &BpdCode, bytes: &[u8]) -> Result<Codeword> {
    let file = read_symbols(bytes)?;
    check_header(code, &file)?;
    if !file.is_codeword() {
        return Err(BpdError::DimensionMismatch {
            expected: file.n,
            got: file.pairs.len(),
        });
    }
    Ok(Codeword { nodes: file.pairs })
}
