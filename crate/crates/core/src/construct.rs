//! Bidirectional piggyback plan, the expanded 2k×2r block parity matrix, and
//! selection of the scalar λ.
//!
//! Indices are 0-based throughout: data index `i ∈ 0..k`, parity column
//! `j ∈ 0..r`. Column 0 always carries clean parities.

use rayon::prelude::*;

use crate::base_code::{build_parity, BaseKind, CodeParams, ParityMatrix};
use crate::error::{BpdError, Result};
use crate::field::{EPoly, Elem, FieldTower, Gf16};
use crate::verify::{verify_mds, MdsReport, SymbolicTable};

/// Which data symbols ride on which parity column.
///
/// `a_target[i] = Some(j)`: a_i is added to the b-substripe parity of column j.
/// `b_target[i] = Some(j)`: λ·b_i is added to the a-substripe parity of column j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiggybackPlan {
    params: CodeParams,
    a_target: Vec<Option<usize>>,
    b_target: Vec<Option<usize>>,
}

/// Which substripe a piggyback rides on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    /// a_i added plainly to a b-parity.
    A,
    /// λ·b_i added to an a-parity.
    B,
}

/// Part sizes for one half: `r-1-v` parts of size u, then v parts of size u+1.
fn part_sizes(r: usize, u: usize, v: usize) -> impl Iterator<Item = usize> {
    (0..r - 1).map(move |p| if p < r - 1 - v { u } else { u + 1 })
}

impl PiggybackPlan {
    /// The even contiguous partition: smaller parts go to lower-numbered columns.
    pub fn new(params: CodeParams) -> Self {
        let k = params.k;
        let mut a_target = vec![None; k];
        let mut b_target = vec![None; k];
        let mut next = 0;
        for (p, size) in part_sizes(params.r, params.u1, params.v1).enumerate() {
            for slot in &mut a_target[next..next + size] {
                *slot = Some(p + 1);
            }
            next += size;
        }
        debug_assert_eq!(next, params.alpha1);
        for (p, size) in part_sizes(params.r, params.u2, params.v2).enumerate() {
            for slot in &mut b_target[next..next + size] {
                *slot = Some(p + 1);
            }
            next += size;
        }
        debug_assert_eq!(next, k);
        PiggybackPlan {
            params,
            a_target,
            b_target,
        }
    }

    /// A plan from explicit targets. Each data index may be piggybacked at most
    /// once, never onto column 0.
    pub fn from_targets(
        params: CodeParams,
        a_target: Vec<Option<usize>>,
        b_target: Vec<Option<usize>>,
    ) -> Result<Self> {
        let k = params.k;
        if a_target.len() != k || b_target.len() != k {
            return Err(BpdError::DimensionMismatch {
                expected: k,
                got: a_target.len().min(b_target.len()),
            });
        }
        for i in 0..k {
            for t in [a_target[i], b_target[i]].into_iter().flatten() {
                if t == 0 || t >= params.r {
                    return Err(BpdError::InvalidParameter(format!(
                        "data index {i} targets parity column {t}"
                    )));
                }
            }
            if a_target[i].is_some() && b_target[i].is_some() {
                return Err(BpdError::InvalidParameter(format!(
                    "data index {i} is piggybacked twice"
                )));
            }
        }
        Ok(PiggybackPlan {
            params,
            a_target,
            b_target,
        })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn a_target(&self) -> &[Option<usize>] {
        &self.a_target
    }

    pub fn b_target(&self) -> &[Option<usize>] {
        &self.b_target
    }

    /// Data indices whose `half` symbol rides on column `j`.
    pub fn part(&self, half: Half, j: usize) -> Vec<usize> {
        let targets = match half {
            Half::A => &self.a_target,
            Half::B => &self.b_target,
        };
        (0..self.params.k)
            .filter(|&i| targets[i] == Some(j))
            .collect()
    }

    /// Where data index `i` is piggybacked, if anywhere.
    pub fn placement(&self, i: usize) -> Option<(Half, usize)> {
        self.a_target[i]
            .map(|j| (Half::A, j))
            .or_else(|| self.b_target[i].map(|j| (Half::B, j)))
    }
}

pub fn make_plan(params: &CodeParams) -> PiggybackPlan {
    PiggybackPlan::new(*params)
}

/// Shape of a 2×2 block of the expanded parity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// [[p, 0], [0, p]]
    Diagonal,
    /// [[p, 1], [0, p]]: a_i added to the b-parity.
    Upper,
    /// [[p, 0], [λ, p]]: λ·b_i added to the a-parity.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub p: Gf16,
    pub kind: BlockKind,
}

impl Block {
    /// Entry (row, col) as a polynomial in λ. Row 0 is a_i, row 1 is b_i;
    /// column 0 is the a-substripe parity, column 1 the b-substripe parity.
    pub fn entry(&self, row: usize, col: usize) -> EPoly {
        match (row, col, self.kind) {
            (0, 0, _) | (1, 1, _) => EPoly::constant(self.p),
            (0, 1, BlockKind::Upper) => EPoly::constant(Gf16::ONE),
            (1, 0, BlockKind::Lower) => EPoly::lambda(),
            _ => EPoly::zero(),
        }
    }

    /// Entry (row, col) with λ substituted.
    pub fn entry_at(&self, row: usize, col: usize, lambda: Elem) -> Elem {
        match (row, col, self.kind) {
            (0, 0, _) | (1, 1, _) => Elem::embed(self.p),
            (0, 1, BlockKind::Upper) => Elem::ONE,
            (1, 0, BlockKind::Lower) => lambda,
            _ => Elem::ZERO,
        }
    }
}

/// The parity part P̃ of the expanded generator, as a k×r array of 2×2 blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGenerator {
    params: CodeParams,
    blocks: Vec<Vec<Block>>,
    lambda: Option<Elem>,
}

impl BlockGenerator {
    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn block(&self, i: usize, j: usize) -> Block {
        self.blocks[i][j]
    }

    pub fn blocks(&self) -> &[Vec<Block>] {
        &self.blocks
    }

    pub fn lambda(&self) -> Option<Elem> {
        self.lambda
    }

    pub fn with_lambda(mut self, lambda: Elem) -> Self {
        self.lambda = Some(lambda);
        self
    }
}

pub fn expand_generator(p: &ParityMatrix, plan: &PiggybackPlan) -> Result<BlockGenerator> {
    let params = *plan.params();
    if p.k() != params.k || p.r() != params.r {
        return Err(BpdError::DimensionMismatch {
            expected: params.k * params.r,
            got: p.k() * p.r(),
        });
    }
    let blocks = (0..params.k)
        .map(|i| {
            (0..params.r)
                .map(|j| {
                    let kind = match plan.placement(i) {
                        Some((Half::A, t)) if t == j => BlockKind::Upper,
                        Some((Half::B, t)) if t == j => BlockKind::Lower,
                        _ => BlockKind::Diagonal,
                    };
                    Block {
                        p: p.get(i, j),
                        kind,
                    }
                })
                .collect()
        })
        .collect();
    Ok(BlockGenerator {
        params,
        blocks,
        lambda: None,
    })
}

/// Result of a λ search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaChoice {
    pub lambda: Elem,
    /// Candidates examined, including the winner.
    pub tried: usize,
}

/// Elements of F_q with minimal polynomial of full degree m, in value order.
pub fn lambda_candidates(tower: &FieldTower) -> Vec<Elem> {
    let m = tower.degree();
    tower
        .elements()
        .filter(|&x| tower.min_poly_degree(x) == m)
        .collect()
}

/// Least λ generating F_q over E for which the expanded code is MDS.
pub fn find_lambda(gen: &BlockGenerator, tower: &FieldTower) -> Result<LambdaChoice> {
    let m = tower.degree();
    if m < 2 {
        return Err(BpdError::InvalidParameter(
            "λ search needs an extension of degree at least 2".into(),
        ));
    }
    let table = SymbolicTable::new(gen);
    let candidates = lambda_candidates(tower);
    candidates
        .par_iter()
        .position_first(|&l| table.passes(tower, l))
        .map(|idx| LambdaChoice {
            lambda: candidates[idx],
            tried: idx + 1,
        })
        .ok_or(BpdError::NoValidLambda {
            m,
            tried: candidates.len(),
        })
}

/// A fully specified BPD code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpdCode {
    tower: FieldTower,
    parity: ParityMatrix,
    plan: PiggybackPlan,
    generator: BlockGenerator,
    lambda: Elem,
}

impl BpdCode {
    pub fn new(
        tower: FieldTower,
        parity: ParityMatrix,
        plan: PiggybackPlan,
        lambda: Elem,
    ) -> Result<Self> {
        tower.elem(lambda.value())?;
        let generator = expand_generator(&parity, &plan)?.with_lambda(lambda);
        Ok(BpdCode {
            tower,
            parity,
            plan,
            generator,
            lambda,
        })
    }

    pub fn params(&self) -> &CodeParams {
        self.plan.params()
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn parity(&self) -> &ParityMatrix {
        &self.parity
    }

    pub fn plan(&self) -> &PiggybackPlan {
        &self.plan
    }

    pub fn generator(&self) -> &BlockGenerator {
        &self.generator
    }

    pub fn lambda(&self) -> Elem {
        self.lambda
    }

    /// Same code with a different λ.
    pub fn with_lambda(&self, lambda: Elem) -> Result<Self> {
        Self::new(
            self.tower.clone(),
            self.parity.clone(),
            self.plan.clone(),
            lambda,
        )
    }

    /// The full 2k×2n generator G̃ = (I | P̃) with λ substituted. Row 2i is a_i,
    /// row 2i+1 is b_i; column 2c is node c's first symbol, 2c+1 its second.
    pub fn generator_matrix(&self) -> Vec<Vec<Elem>> {
        let CodeParams { n, k, .. } = *self.params();
        let mut g = vec![vec![Elem::ZERO; 2 * n]; 2 * k];
        for (row, line) in g.iter_mut().enumerate() {
            let i = row / 2;
            line[row] = Elem::ONE;
            for j in 0..self.params().r {
                let block = self.generator.block(i, j);
                for col in 0..2 {
                    line[2 * (k + j) + col] = block.entry_at(row % 2, col, self.lambda);
                }
            }
        }
        g
    }
}

/// Outcome of the full construction pipeline.
#[derive(Debug, Clone)]
pub struct Constructed {
    pub code: BpdCode,
    pub report: MdsReport,
    /// λ candidates examined in the tower that succeeded.
    pub candidates_tried: usize,
    /// Extension degrees attempted, in order.
    pub degrees_tried: Vec<usize>,
}

/// Extension degrees to try for redundancy r: ⌊r/2⌋+1, except that r ≥ 4 first
/// tries GF(256) and then the largest supported tower.
pub fn tower_schedule(r: usize) -> Vec<usize> {
    match r / 2 + 1 {
        m @ (1 | 2) => vec![m],
        3 if r == 5 => vec![3],
        _ => vec![2, 3],
    }
}

/// Builds parameters, base matrix and plan, then searches for λ tower by tower.
pub fn construct(
    n: usize,
    k: usize,
    base: BaseKind,
    m_override: Option<usize>,
) -> Result<Constructed> {
    let params = CodeParams::new(n, k)?;
    let parity = build_parity(&params, base)?;
    let plan = make_plan(&params);
    let gen = expand_generator(&parity, &plan)?;
    let schedule = match m_override {
        Some(m) => vec![m],
        None => tower_schedule(params.r),
    };
    let mut degrees_tried = Vec::new();
    let mut last_err = None;
    for m in schedule {
        degrees_tried.push(m);
        let tower = FieldTower::build(m)?;
        match find_lambda(&gen, &tower) {
            Ok(choice) => {
                let code = BpdCode::new(tower, parity, plan, choice.lambda)?;
                let report = verify_mds(code.generator(), code.lambda(), code.tower());
                return Ok(Constructed {
                    code,
                    report,
                    candidates_tried: choice.tried,
                    degrees_tried,
                });
            }
            Err(e @ BpdError::NoValidLambda { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("schedule is never empty"))
}
