//! MDS verification of the expanded code.
//!
//! The code (I | P̃) is MDS iff every square block submatrix R of P̃ is
//! invertible. Each det(R) is a polynomial f_R(λ) over E; it is computed once
//! symbolically and then evaluated at candidate λ values. Since the field has
//! characteristic 2, the determinant equals the permanent, so the expansion
//! below carries no signs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{decode_any_k, encode, Stripe};
use crate::construct::{BlockGenerator, BlockKind, BpdCode};
use crate::field::{EPoly, Elem, FieldTower};
use crate::linalg::combinations;

/// A t×t selection of 2×2 blocks of P̃.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockSubmatrix {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl BlockSubmatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// The 2t×2t entry matrix over E[λ].
    pub fn entries(&self, gen: &BlockGenerator) -> Vec<Vec<EPoly>> {
        let mut out = Vec::with_capacity(2 * self.size());
        for &i in &self.rows {
            for sub_row in 0..2 {
                let mut line = Vec::with_capacity(2 * self.size());
                for &j in &self.cols {
                    let block = gen.block(i, j);
                    line.push(block.entry(sub_row, 0));
                    line.push(block.entry(sub_row, 1));
                }
                out.push(line);
            }
        }
        out
    }

    pub fn det(&self, gen: &BlockGenerator) -> EPoly {
        symbolic_det(&self.entries(gen))
    }

    /// Number of (upper, lower) triangular blocks inside R.
    pub fn triangular_counts(&self, gen: &BlockGenerator) -> (usize, usize) {
        let mut counts = (0, 0);
        for &i in &self.rows {
            for &j in &self.cols {
                match gen.block(i, j).kind {
                    BlockKind::Upper => counts.0 += 1,
                    BlockKind::Lower => counts.1 += 1,
                    BlockKind::Diagonal => {}
                }
            }
        }
        counts
    }

    /// Row blocks drawn from the first ⌊k/2⌋ rows (g) and from the rest (h).
    pub fn half_counts(&self, gen: &BlockGenerator) -> (usize, usize) {
        let alpha1 = gen.params().alpha1;
        let g = self.rows.iter().filter(|&&i| i < alpha1).count();
        (g, self.size() - g)
    }
}

/// Every square block submatrix of a k×r block matrix, by size then lexicographically.
pub fn block_submatrices(k: usize, r: usize) -> Vec<BlockSubmatrix> {
    let mut out = Vec::new();
    for t in 1..=k.min(r) {
        let col_sets = combinations(r, t);
        for rows in combinations(k, t) {
            for cols in &col_sets {
                out.push(BlockSubmatrix {
                    rows: rows.clone(),
                    cols: cols.clone(),
                });
            }
        }
    }
    out
}

/// Determinant over E[λ] by memoized cofactor expansion along rows.
///
/// States are the sets of columns consumed by the rows expanded so far; only
/// states reached through nonzero entries are kept.
pub fn symbolic_det(matrix: &[Vec<EPoly>]) -> EPoly {
    let n = matrix.len();
    assert!(n < 32, "matrix too large for bitmask expansion");
    assert!(
        matrix.iter().all(|row| row.len() == n),
        "matrix must be square"
    );
    let mut states: BTreeMap<u32, EPoly> = BTreeMap::new();
    states.insert(0, EPoly::constant(crate::field::Gf16::ONE));
    for row in matrix {
        let mut next: BTreeMap<u32, EPoly> = BTreeMap::new();
        for (&mask, acc) in &states {
            for (c, entry) in row.iter().enumerate() {
                if mask & (1 << c) != 0 || entry.is_zero() {
                    continue;
                }
                let term = acc * entry;
                let slot = next.entry(mask | (1 << c)).or_default();
                *slot = &*slot + &term;
            }
        }
        next.retain(|_, p| !p.is_zero());
        states = next;
    }
    states
        .remove(&((1u64 << n) as u32).wrapping_sub(1))
        .unwrap_or_default()
}

/// f_R for one block submatrix, with the structural data the structural checks need.
#[derive(Debug, Clone)]
pub struct DetRecord {
    pub sub: BlockSubmatrix,
    pub poly: EPoly,
    pub upper: usize,
    pub lower: usize,
}

impl DetRecord {
    /// R contains triangular blocks of at most one orientation.
    pub fn one_sided(&self) -> bool {
        self.upper == 0 || self.lower == 0
    }
}

/// All f_R(λ) of a generator, computed once.
#[derive(Debug, Clone)]
pub struct SymbolicTable {
    records: Vec<DetRecord>,
}

impl SymbolicTable {
    pub fn new(gen: &BlockGenerator) -> Self {
        let records = block_submatrices(gen.params().k, gen.params().r)
            .into_par_iter()
            .map(|sub| {
                let poly = sub.det(gen);
                let (upper, lower) = sub.triangular_counts(gen);
                DetRecord {
                    sub,
                    poly,
                    upper,
                    lower,
                }
            })
            .collect();
        SymbolicTable { records }
    }

    pub fn records(&self) -> &[DetRecord] {
        &self.records
    }

    pub fn passes(&self, tower: &FieldTower, lambda: Elem) -> bool {
        self.records
            .iter()
            .all(|rec| !rec.poly.eval(tower, lambda).is_zero())
    }

    pub fn report(&self, tower: &FieldTower, lambda: Elem) -> MdsReport {
        let mut report = MdsReport {
            pass: true,
            submatrices_checked: self.records.len(),
            max_degree_seen: 0,
            zero_at_origin: 0,
            one_sided_nonconstant: 0,
            witness: None,
        };
        for rec in &self.records {
            report.max_degree_seen = report.max_degree_seen.max(rec.poly.degree().unwrap_or(0));
            if rec.poly.constant_term().is_zero() {
                report.zero_at_origin += 1;
            }
            if rec.one_sided() && rec.poly.degree().unwrap_or(0) > 0 {
                report.one_sided_nonconstant += 1;
            }
            if report.witness.is_none() && rec.poly.eval(tower, lambda).is_zero() {
                report.pass = false;
                report.witness = Some(Witness {
                    rows: rec.sub.rows.iter().map(|i| i + 1).collect(),
                    cols: rec.sub.cols.iter().map(|j| j + 1).collect(),
                    coeffs: rec.poly.coeffs().iter().map(|c| format!("{c}")).collect(),
                });
            }
        }
        report
    }
}

/// A block submatrix whose determinant vanishes at the chosen λ (1-based indices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// f_R coefficients, low degree first, as hex nibbles.
    pub coeffs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MdsReport {
    pub pass: bool,
    pub submatrices_checked: usize,
    pub max_degree_seen: usize,
    /// Submatrices with f_R(0) = 0.
    pub zero_at_origin: usize,
    /// Submatrices with one triangular orientation but nonconstant f_R.
    pub one_sided_nonconstant: usize,
    pub witness: Option<Witness>,
}

impl std::fmt::Display for MdsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "mds: {}", if self.pass { "pass" } else { "FAIL" })?;
        writeln!(f, "submatrices checked: {}", self.submatrices_checked)?;
        writeln!(f, "max deg f_R: {}", self.max_degree_seen)?;
        writeln!(f, "f_R(0) = 0: {}", self.zero_at_origin)?;
        write!(
            f,
            "one-sided with nonconstant f_R: {}",
            self.one_sided_nonconstant
        )?;
        if let Some(w) = &self.witness {
            write!(
                f,
                "\nwitness: rows {:?} cols {:?} f_R = [{}]",
                w.rows,
                w.cols,
                w.coeffs.join(" ")
            )?;
        }
        Ok(())
    }
}

pub fn verify_mds(gen: &BlockGenerator, lambda: Elem, tower: &FieldTower) -> MdsReport {
    SymbolicTable::new(gen).report(tower, lambda)
}

/// Classification of every λ of full degree over E.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaCensus {
    pub candidates: usize,
    pub passing: Vec<Elem>,
    pub failing: Vec<Elem>,
}

pub fn lambda_census(gen: &BlockGenerator, tower: &FieldTower) -> LambdaCensus {
    let table = SymbolicTable::new(gen);
    let candidates = crate::construct::lambda_candidates(tower);
    let verdicts: Vec<bool> = candidates
        .par_iter()
        .map(|&l| table.passes(tower, l))
        .collect();
    let (passing, failing): (Vec<_>, Vec<_>) =
        candidates.iter().zip(verdicts).partition(|(_, ok)| *ok);
    LambdaCensus {
        candidates: candidates.len(),
        passing: passing.into_iter().map(|(l, _)| *l).collect(),
        failing: failing.into_iter().map(|(l, _)| *l).collect(),
    }
}

/// Subsets of nodes used by the decoding oracle: all of them for n ≤ 10,
/// otherwise `samples` random ones (seeded).
pub fn decoding_subsets(n: usize, k: usize, samples: usize, seed: u64) -> Vec<Vec<usize>> {
    if n <= 10 {
        return combinations(n, k);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<usize> = (0..n).collect();
    (0..samples)
        .map(|_| {
            nodes.shuffle(&mut rng);
            let mut s = nodes[..k].to_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

pub fn random_stripe<R: Rng>(code: &BpdCode, rng: &mut R) -> Stripe {
    let tower = code.tower();
    let q = tower.size() as u16;
    let k = code.params().k;
    let mut draw = || tower.elem(rng.gen_range(0..q)).expect("value below q");
    let a = (0..k).map(|_| draw()).collect();
    let b = (0..k).map(|_| draw()).collect();
    Stripe { a, b }
}

/// Independent MDS check: encode random stripes and decode them from node subsets.
pub fn verify_mds_by_decoding(code: &BpdCode, trials: usize, seed: u64) -> bool {
    let (n, k) = (code.params().n, code.params().k);
    let subsets = decoding_subsets(n, k, trials, seed);
    subsets.par_iter().enumerate().all(|(idx, subset)| {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let stripe = random_stripe(code, &mut rng);
        let Ok(word) = encode(code, &stripe) else {
            return false;
        };
        let available = subset.iter().map(|&c| (c, word.nodes[c])).collect();
        matches!(decode_any_k(code, &available), Ok(s) if s == stripe)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_code::{build_cauchy_parity, build_parity, make_params, BaseKind, CodeParams};
    use crate::construct::{construct, expand_generator, make_plan};
    use crate::field::Gf16;

    /// Brute-force permanent over all permutations (equals det in characteristic 2).
    fn det_oracle(m: &[Vec<EPoly>]) -> EPoly {
        fn go(m: &[Vec<EPoly>], row: usize, used: &mut Vec<bool>) -> EPoly {
            if row == m.len() {
                return EPoly::constant(Gf16::ONE);
            }
            let mut acc = EPoly::zero();
            for c in 0..m.len() {
                if !used[c] {
                    used[c] = true;
                    acc = &acc + &(&m[row][c] * &go(m, row + 1, used));
                    used[c] = false;
                }
            }
            acc
        }
        go(m, 0, &mut vec![false; m.len()])
    }

    fn gen_for(n: usize, k: usize) -> BlockGenerator {
        let params = make_params(n, k).unwrap();
        expand_generator(&build_cauchy_parity(&params).unwrap(), &make_plan(&params)).unwrap()
    }

    #[test]
    fn symbolic_det_matches_permutation_expansion() {
        let gen = gen_for(9, 6);
        for sub in block_submatrices(6, 3) {
            assert_eq!(sub.det(&gen), det_oracle(&sub.entries(&gen)), "{sub:?}");
        }
    }

    #[test]
    fn single_lower_block_is_constant() {
        let p = Gf16::new(7);
        let m = vec![
            vec![EPoly::constant(p), EPoly::zero()],
            vec![EPoly::lambda(), EPoly::constant(p)],
        ];
        assert_eq!(symbolic_det(&m), EPoly::constant(p * p));
    }

    #[test]
    fn submatrix_count() {
        // Σ_t C(11,t)·C(4,t) = C(15,4) - 1.
        assert_eq!(block_submatrices(11, 4).len(), 1364);
        assert_eq!(block_submatrices(6, 3).len(), 83);
    }

    #[test]
    fn lambda_zero_passes() {
        for params in CodeParams::grid(2..=4, 16) {
            let gen = expand_generator(
                &build_parity(&params, BaseKind::Rs).unwrap(),
                &make_plan(&params),
            )
            .unwrap();
            let tower = FieldTower::build(2).unwrap();
            let report = verify_mds(&gen, Elem::ZERO, &tower);
            assert!(report.pass, "{params:?}");
            assert_eq!(report.zero_at_origin, 0);
        }
    }

    #[test]
    fn degree_bound_9_6() {
        let gen = gen_for(9, 6);
        let tower = FieldTower::build(2).unwrap();
        for l in tower.elements().filter(|l| !l.in_base_field()) {
            let report = verify_mds(&gen, l, &tower);
            assert!(report.pass);
            assert!(report.max_degree_seen <= 1);
            assert_eq!(report.one_sided_nonconstant, 0);
        }
    }

    #[test]
    fn verifiers_agree_on_every_lambda_9_6() {
        let c = construct(9, 6, BaseKind::Cauchy, None).unwrap();
        let table = SymbolicTable::new(c.code.generator());
        let tower = c.code.tower().clone();
        for l in tower.elements() {
            let code = c.code.with_lambda(l).unwrap();
            let symbolic = table.report(&tower, l).pass;
            assert_eq!(symbolic, verify_mds_by_decoding(&code, 0, 1), "λ = {l}");
        }
    }

    #[test]
    fn failing_lambda_in_subfield_is_caught_by_both() {
        // Some λ ∈ E makes an f_R vanish; find one and check both verifiers reject it.
        let c = construct(9, 6, BaseKind::Cauchy, None).unwrap();
        let table = SymbolicTable::new(c.code.generator());
        let tower = c.code.tower().clone();
        let bad: Vec<Elem> = tower
            .elements()
            .filter(|l| !table.passes(&tower, *l))
            .collect();
        assert!(bad.iter().all(|l| l.in_base_field()));
        if let Some(&l) = bad.first() {
            let report = table.report(&tower, l);
            assert!(!report.pass && report.witness.is_some());
            assert!(!verify_mds_by_decoding(
                &c.code.with_lambda(l).unwrap(),
                0,
                3
            ));
        }
    }

    #[test]
    fn degree_three_tower_15_11() {
        let gen = gen_for(15, 11);
        let tower = FieldTower::build(3).unwrap();
        let table = SymbolicTable::new(&gen);
        for l in tower.elements().filter(|l| !l.in_base_field()).step_by(97) {
            assert!(table.passes(&tower, l));
        }
    }

    #[test]
    fn subsets_are_exhaustive_or_sampled() {
        assert_eq!(decoding_subsets(9, 6, 5, 0).len(), 84);
        let s = decoding_subsets(14, 10, 50, 0);
        assert_eq!(s.len(), 50);
        assert!(s
            .iter()
            .all(|v| v.len() == 10 && v.windows(2).all(|w| w[0] < w[1])));
    }
}
