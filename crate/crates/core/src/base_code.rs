//! The base [n, k] MDS code over E shared by both substripes.
//!
//! Each substripe is encoded with a systematic generator (I | P) where P is a
//! k×r superregular matrix over E. Two constructions are provided: a Cauchy
//! matrix (the default) and the parity part of a systematic Reed-Solomon
//! generator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{BpdError, Result};
use crate::field::{Elem, FieldTower, Gf16};
use crate::linalg::{combinations, det_gf16, invert_gf16, solve};

/// Largest supported node count: every construction needs n distinct points of E.
pub const MAX_NODES: usize = 16;

/// Code dimensions and the partition sizes used by the piggyback plan.
///
/// `alpha1 = ⌊k/2⌋`, `alpha2 = ⌈k/2⌉`, and `alpha_h = (r-1)·u_h + v_h` with
/// `0 ≤ v_h < r-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub alpha1: usize,
    pub alpha2: usize,
    pub u1: usize,
    pub v1: usize,
    pub u2: usize,
    pub v2: usize,
}

impl CodeParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k >= n || n - k < 2 {
            return Err(BpdError::InvalidParameter(format!(
                "({n},{k}): need at least two parity nodes"
            )));
        }
        let r = n - k;
        if k <= r {
            return Err(BpdError::InvalidParameter(format!(
                "({n},{k}): need k > r = {r}"
            )));
        }
        if n > MAX_NODES {
            return Err(BpdError::InvalidParameter(format!(
                "({n},{k}): at most {MAX_NODES} nodes are supported"
            )));
        }
        let alpha1 = k / 2;
        let alpha2 = k - alpha1;
        let parts = r - 1;
        Ok(CodeParams {
            n,
            k,
            r,
            alpha1,
            alpha2,
            u1: alpha1 / parts,
            v1: alpha1 % parts,
            u2: alpha2 / parts,
            v2: alpha2 % parts,
        })
    }

    /// Every valid (n, k) with r in `r_range` and at most `max_n` nodes.
    pub fn grid(r_range: std::ops::RangeInclusive<usize>, max_n: usize) -> Vec<CodeParams> {
        let mut out = Vec::new();
        for r in r_range {
            for k in r + 1..=max_n.saturating_sub(r) {
                if let Ok(p) = CodeParams::new(k + r, k) {
                    out.push(p);
                }
            }
        }
        out
    }
}

pub fn make_params(n: usize, k: usize) -> Result<CodeParams> {
    CodeParams::new(n, k)
}

/// How a parity matrix was generated, with its points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Construction {
    /// `P[i][j] = 1 / (xs[i] + ys[j])`.
    Cauchy { xs: Vec<Gf16>, ys: Vec<Gf16> },
    /// Parity part of the systematic generator of the RS code with these evaluation points.
    RsSystematic { points: Vec<Gf16> },
}

impl Construction {
    pub fn tag(&self) -> &'static str {
        match self {
            Construction::Cauchy { .. } => "cauchy",
            Construction::RsSystematic { .. } => "rs",
        }
    }

    /// Generating points in order (Cauchy: xs then ys).
    pub fn points(&self) -> Vec<Gf16> {
        match self {
            Construction::Cauchy { xs, ys } => xs.iter().chain(ys).copied().collect(),
            Construction::RsSystematic { points } => points.clone(),
        }
    }
}

/// Which base construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseKind {
    #[default]
    Cauchy,
    Rs,
}

impl std::str::FromStr for BaseKind {
    type Err = BpdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cauchy" => Ok(BaseKind::Cauchy),
            "rs" => Ok(BaseKind::Rs),
            other => Err(BpdError::InvalidParameter(format!(
                "unknown base {other:?}"
            ))),
        }
    }
}

/// The k×r parity part P of the base generator (I | P).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityMatrix {
    entries: Vec<Vec<Gf16>>,
    construction: Construction,
}

fn distinct_points(n: usize) -> Result<Vec<Gf16>> {
    if n > MAX_NODES {
        return Err(BpdError::FieldTooSmall {
            needed: n,
            available: MAX_NODES,
        });
    }
    Ok(Gf16::all().take(n).collect())
}

impl ParityMatrix {
    /// Cauchy matrix on the first k + r elements of E in value order.
    pub fn cauchy(k: usize, r: usize) -> Result<Self> {
        let pts = distinct_points(k + r)?;
        Self::cauchy_with_points(pts[..k].to_vec(), pts[k..].to_vec())
    }

    pub fn cauchy_with_points(xs: Vec<Gf16>, ys: Vec<Gf16>) -> Result<Self> {
        let entries = xs
            .iter()
            .map(|&x| {
                ys.iter()
                    .map(|&y| {
                        (x + y).inv().map_err(|_| {
                            BpdError::InvalidParameter("Cauchy points must be distinct".into())
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ParityMatrix {
            entries,
            construction: Construction::Cauchy { xs, ys },
        })
    }

    /// Systematic RS parity for evaluation points `points` (n of them, distinct).
    pub fn rs_systematic(k: usize, points: &[Gf16]) -> Result<Self> {
        let n = points.len();
        if k == 0 || k >= n {
            return Err(BpdError::InvalidParameter(format!(
                "RS code needs 0 < k < n (k={k}, n={n})"
            )));
        }
        for (i, a) in points.iter().enumerate() {
            if points[..i].contains(a) {
                return Err(BpdError::InvalidParameter(format!(
                    "duplicate evaluation point {a}"
                )));
            }
        }
        // Vandermonde generator: row i, column c holds points[c]^i.
        let vander: Vec<Vec<Gf16>> = (0..k)
            .map(|i| points.iter().map(|&x| x.pow(i as u64)).collect())
            .collect();
        let head: Vec<Vec<Gf16>> = vander.iter().map(|row| row[..k].to_vec()).collect();
        let head_inv = invert_gf16(&head)?;
        let entries = (0..k)
            .map(|i| {
                (k..n)
                    .map(|c| (0..k).fold(Gf16::ZERO, |acc, l| acc + head_inv[i][l] * vander[l][c]))
                    .collect()
            })
            .collect();
        Ok(ParityMatrix {
            entries,
            construction: Construction::RsSystematic {
                points: points.to_vec(),
            },
        })
    }

    /// Rebuilds a matrix from its construction and checks it against stored entries.
    pub fn from_parts(construction: Construction, entries: Vec<Vec<Gf16>>) -> Result<Self> {
        let rebuilt = match &construction {
            Construction::Cauchy { xs, ys } => Self::cauchy_with_points(xs.clone(), ys.clone())?,
            Construction::RsSystematic { points } => {
                let k = entries.len();
                Self::rs_systematic(k, points)?
            }
        };
        if rebuilt.entries != entries {
            return Err(BpdError::Format(
                "parity entries do not match their construction".into(),
            ));
        }
        Ok(rebuilt)
    }

    /// Wraps arbitrary entries; used for negative tests and experiments.
    pub fn from_entries_unchecked(entries: Vec<Vec<Gf16>>) -> Self {
        ParityMatrix {
            entries,
            construction: Construction::RsSystematic { points: Vec::new() },
        }
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn r(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn get(&self, i: usize, j: usize) -> Gf16 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<Gf16>] {
        &self.entries
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    /// Generator entry G[i][c] of (I | P).
    pub fn generator_entry(&self, i: usize, c: usize) -> Gf16 {
        let k = self.k();
        if c < k {
            if i == c {
                Gf16::ONE
            } else {
                Gf16::ZERO
            }
        } else {
            self.entries[i][c - k]
        }
    }

    /// Substripe codeword (data, Pᵀ·data) for F_q-valued data.
    pub fn encode(&self, tower: &FieldTower, data: &[Elem]) -> Result<Vec<Elem>> {
        if data.len() != self.k() {
            return Err(BpdError::DimensionMismatch {
                expected: self.k(),
                got: data.len(),
            });
        }
        let mut out = data.to_vec();
        out.extend((0..self.r()).map(|j| self.parity(tower, j, data)));
        Ok(out)
    }

    /// P_jᵀ · data.
    pub fn parity(&self, tower: &FieldTower, j: usize, data: &[Elem]) -> Elem {
        data.iter()
            .zip(&self.entries)
            .fold(Elem::ZERO, |acc, (&d, row)| {
                tower.add(acc, tower.mul_base(row[j], d))
            })
    }
}

pub fn build_cauchy_parity(params: &CodeParams) -> Result<ParityMatrix> {
    ParityMatrix::cauchy(params.k, params.r)
}

pub fn build_rs_parity(params: &CodeParams, points: &[Gf16]) -> Result<ParityMatrix> {
    if points.len() != params.n {
        return Err(BpdError::InvalidParameter(format!(
            "need {} evaluation points, got {}",
            params.n,
            points.len()
        )));
    }
    ParityMatrix::rs_systematic(params.k, points)
}

/// RS parity on the first n elements of E in value order.
pub fn build_default_rs_parity(params: &CodeParams) -> Result<ParityMatrix> {
    build_rs_parity(params, &distinct_points(params.n)?)
}

pub fn build_parity(params: &CodeParams, base: BaseKind) -> Result<ParityMatrix> {
    let p = match base {
        BaseKind::Cauchy => build_cauchy_parity(params)?,
        BaseKind::Rs => build_default_rs_parity(params)?,
    };
    if !verify_superregular(&p) {
        return Err(BpdError::InvalidParameter(format!(
            "{} parity matrix is not superregular",
            p.construction.tag()
        )));
    }
    Ok(p)
}

/// True iff every square submatrix of P is invertible over E.
pub fn verify_superregular(p: &ParityMatrix) -> bool {
    let (k, r) = (p.k(), p.r());
    for t in 1..=k.min(r) {
        let col_sets = combinations(r, t);
        for rows in combinations(k, t) {
            for cols in &col_sets {
                let sub = rows
                    .iter()
                    .map(|&i| cols.iter().map(|&j| p.entries[i][j]).collect())
                    .collect();
                if det_gf16(sub).is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// Recovers the k data symbols of one substripe from any k known positions
/// (0-based, systematic positions first, then parity columns).
pub fn decode_substripe(
    p: &ParityMatrix,
    known: &BTreeMap<usize, Elem>,
    tower: &FieldTower,
) -> Result<Vec<Elem>> {
    let k = p.k();
    let n = k + p.r();
    if let Some((&bad, _)) = known.iter().find(|(&pos, _)| pos >= n) {
        return Err(BpdError::InvalidParameter(format!(
            "position {bad} out of range"
        )));
    }
    if known.len() < k {
        return Err(BpdError::InsufficientData {
            needed: k,
            got: known.len(),
        });
    }
    if (0..k).all(|i| known.contains_key(&i)) {
        return Ok((0..k).map(|i| known[&i]).collect());
    }
    let chosen: Vec<(usize, Elem)> = known.iter().take(k).map(|(&c, &v)| (c, v)).collect();
    let a = chosen
        .iter()
        .map(|&(c, _)| {
            (0..k)
                .map(|i| Elem::embed(p.generator_entry(i, c)))
                .collect()
        })
        .collect();
    let b = chosen.iter().map(|&(_, v)| v).collect();
    solve(tower, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Leibniz expansion; in characteristic 2 every sign is +1.
    fn det_oracle(m: &[Vec<Gf16>]) -> Gf16 {
        fn go(m: &[Vec<Gf16>], row: usize, used: &mut Vec<bool>) -> Gf16 {
            if row == m.len() {
                return Gf16::ONE;
            }
            let mut acc = Gf16::ZERO;
            for c in 0..m.len() {
                if !used[c] && !m[row][c].is_zero() {
                    used[c] = true;
                    acc += m[row][c] * go(m, row + 1, used);
                    used[c] = false;
                }
            }
            acc
        }
        go(m, 0, &mut vec![false; m.len()])
    }

    fn superregular_oracle(p: &ParityMatrix) -> bool {
        let (k, r) = (p.k(), p.r());
        (1..=k.min(r)).all(|t| {
            combinations(k, t).iter().all(|rows| {
                combinations(r, t).iter().all(|cols| {
                    let sub: Vec<Vec<Gf16>> = rows
                        .iter()
                        .map(|&i| cols.iter().map(|&j| p.get(i, j)).collect())
                        .collect();
                    !det_oracle(&sub).is_zero()
                })
            })
        })
    }

    #[test]
    fn params_examples() {
        let p = make_params(9, 6).unwrap();
        assert_eq!(
            (p.r, p.alpha1, p.alpha2, p.u1, p.u2, p.v1, p.v2),
            (3, 3, 3, 1, 1, 1, 1)
        );
        let p = make_params(14, 10).unwrap();
        assert_eq!(
            (p.r, p.alpha1, p.alpha2, p.u1, p.u2, p.v1, p.v2),
            (4, 5, 5, 1, 1, 2, 2)
        );
        let p = make_params(8, 6).unwrap();
        assert_eq!(
            (p.r, p.alpha1, p.alpha2, p.u1, p.u2, p.v1, p.v2),
            (2, 3, 3, 3, 3, 0, 0)
        );
        let p = make_params(12, 7).unwrap();
        assert_eq!((p.alpha1, p.alpha2), (3, 4));
    }

    #[test]
    fn params_errors() {
        assert!(make_params(7, 6).is_err());
        assert!(make_params(6, 6).is_err());
        assert!(make_params(6, 3).is_err());
        assert!(make_params(17, 13).is_err());
        assert!(make_params(16, 12).is_ok());
    }

    #[test]
    fn params_grid_relations() {
        let grid = CodeParams::grid(2..=7, 16);
        assert!(!grid.is_empty());
        for p in grid {
            assert_eq!(p.alpha1 + p.alpha2, p.k);
            assert_eq!(p.alpha1, (p.r - 1) * p.u1 + p.v1);
            assert_eq!(p.alpha2, (p.r - 1) * p.u2 + p.v2);
            assert!(p.v1 < p.r - 1 || (p.r == 2 && p.v1 == 0));
            assert!(p.v2 < p.r - 1 || (p.r == 2 && p.v2 == 0));
        }
    }

    #[test]
    fn cauchy_9_6_superregular() {
        let p = build_cauchy_parity(&make_params(9, 6).unwrap()).unwrap();
        assert!(p.entries().iter().flatten().all(|e| !e.is_zero()));
        assert!(superregular_oracle(&p));
        assert!(verify_superregular(&p));
    }

    #[test]
    fn cauchy_field_too_small() {
        assert_eq!(
            ParityMatrix::cauchy(13, 4),
            Err(BpdError::FieldTooSmall {
                needed: 17,
                available: 16
            })
        );
    }

    #[test]
    fn rs_examples() {
        let p = ParityMatrix::rs_systematic(1, &[Gf16::new(0), Gf16::new(1)]).unwrap();
        assert_eq!((p.k(), p.r()), (1, 1));
        assert!(!p.get(0, 0).is_zero());

        for (n, k) in [(9, 6), (14, 10)] {
            let p = build_default_rs_parity(&make_params(n, k).unwrap()).unwrap();
            assert!(superregular_oracle(&p), "({n},{k})");
            assert!(verify_superregular(&p), "({n},{k})");
        }
    }

    #[test]
    fn rs_generator_spans_vandermonde_code() {
        // Each row of (I | P) must be a polynomial of degree < k evaluated at the points.
        let params = make_params(9, 6).unwrap();
        let pts: Vec<Gf16> = Gf16::all().take(9).collect();
        let p = build_rs_parity(&params, &pts).unwrap();
        for i in 0..6 {
            let row: Vec<Gf16> = (0..9).map(|c| p.generator_entry(i, c)).collect();
            // Lagrange interpolate through the first k points and check the rest.
            for c in 6..9 {
                let mut v = Gf16::ZERO;
                for l in 0..6 {
                    let mut basis = Gf16::ONE;
                    for o in 0..6 {
                        if o != l {
                            basis *= (pts[c] + pts[o]) * (pts[l] + pts[o]).inv().unwrap();
                        }
                    }
                    v += row[l] * basis;
                }
                assert_eq!(v, row[c]);
            }
        }
    }

    #[test]
    fn rs_duplicate_points() {
        let params = make_params(9, 6).unwrap();
        let mut pts: Vec<Gf16> = Gf16::all().take(9).collect();
        pts[8] = pts[0];
        assert!(matches!(
            build_rs_parity(&params, &pts),
            Err(BpdError::InvalidParameter(_))
        ));
    }

    #[test]
    fn superregular_negative_and_trivial() {
        let ones = ParityMatrix::from_entries_unchecked(vec![vec![Gf16::ONE; 3]; 4]);
        assert!(!verify_superregular(&ones));
        let row = ParityMatrix::from_entries_unchecked(vec![vec![Gf16::new(3), Gf16::new(7)]]);
        assert!(verify_superregular(&row));
    }

    #[test]
    fn both_constructions_superregular_on_grid() {
        for params in CodeParams::grid(2..=4, 16) {
            for base in [BaseKind::Cauchy, BaseKind::Rs] {
                let p = build_parity(&params, base).unwrap();
                assert!(verify_superregular(&p), "{params:?} {base:?}");
            }
        }
    }

    #[test]
    fn decode_examples() {
        let tower = FieldTower::build(2).unwrap();
        let params = make_params(9, 6).unwrap();
        let p = build_cauchy_parity(&params).unwrap();
        let data: Vec<Elem> = (0..6).map(|i| tower.elem(0x31 + 17 * i).unwrap()).collect();
        let word = p.encode(&tower, &data).unwrap();

        let systematic: BTreeMap<usize, Elem> = (0..6).map(|i| (i, word[i])).collect();
        assert_eq!(decode_substripe(&p, &systematic, &tower).unwrap(), data);

        // b_2..b_6 plus the first parity recovers b_1.
        let known: BTreeMap<usize, Elem> = (1..7).map(|i| (i, word[i])).collect();
        assert_eq!(decode_substripe(&p, &known, &tower).unwrap()[0], data[0]);

        let few: BTreeMap<usize, Elem> = (0..5).map(|i| (i, word[i])).collect();
        assert_eq!(
            decode_substripe(&p, &few, &tower),
            Err(BpdError::InsufficientData { needed: 6, got: 5 })
        );
    }

    #[test]
    fn decode_every_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, k, m) in [(9, 6, 2), (10, 7, 3), (8, 6, 2)] {
            let tower = FieldTower::build(m).unwrap();
            let params = make_params(n, k).unwrap();
            for base in [BaseKind::Cauchy, BaseKind::Rs] {
                let p = build_parity(&params, base).unwrap();
                for subset in combinations(n, k) {
                    let data: Vec<Elem> = (0..k)
                        .map(|_| tower.elem(rng.gen_range(0..tower.size() as u16)).unwrap())
                        .collect();
                    let word = p.encode(&tower, &data).unwrap();
                    let known = subset.iter().map(|&c| (c, word[c])).collect();
                    assert_eq!(decode_substripe(&p, &known, &tower).unwrap(), data);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn decode_sampled_subsets(seed in any::<u64>(), k in 10usize..=12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tower = FieldTower::build(2).unwrap();
            let params = make_params(k + 4, k).unwrap();
            let p = build_cauchy_parity(&params).unwrap();
            let data: Vec<Elem> = (0..k).map(|_| Elem::embed(Gf16::new(rng.gen_range(0..16)))).collect();
            let word = p.encode(&tower, &data).unwrap();
            let mut positions: Vec<usize> = (0..params.n).collect();
            for i in (1..positions.len()).rev() {
                positions.swap(i, rng.gen_range(0..=i));
            }
            let known = positions[..k].iter().map(|&c| (c, word[c])).collect();
            prop_assert_eq!(decode_substripe(&p, &known, &tower).unwrap(), data);
        }
    }
}
