//! Self-contained JSON description of a constructed code.
//!
//! Field order is fixed by the struct layout, so save → load → save is
//! byte-identical. Parity columns in the plan are 1-based; 0 means the data
//! index is not piggybacked in that direction.

use serde::{Deserialize, Serialize};

use crate::base_code::{CodeParams, Construction, ParityMatrix};
use crate::construct::{BpdCode, PiggybackPlan};
use crate::error::{BpdError, Result};
use crate::field::{FieldTower, Gf16};

pub const DESCRIPTOR_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDescriptor {
    pub format_version: u32,
    pub n: usize,
    pub k: usize,
    pub tower: TowerDesc,
    pub base: BaseDesc,
    /// λ in element byte order, hex.
    pub lambda: String,
    pub plan: PlanDesc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerDesc {
    pub m: usize,
    /// μ coefficients as hex nibbles, highest degree first.
    pub mu: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseDesc {
    /// "cauchy" or "rs".
    pub tag: String,
    /// Generating points as hex nibbles (Cauchy: the k row points, then the r column points).
    pub points: Vec<String>,
    /// Row-major P, one string of r hex nibbles per row.
    pub p: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDesc {
    pub a_target: Vec<usize>,
    pub b_target: Vec<usize>,
}

fn nibble(c: Gf16) -> String {
    format!("{:x}", c.value())
}

fn parse_nibble(s: &str) -> Result<Gf16> {
    u8::from_str_radix(s, 16)
        .ok()
        .filter(|_| s.len() == 1)
        .and_then(Gf16::from_nibble)
        .ok_or_else(|| BpdError::Format(format!("bad hex nibble {s:?}")))
}

fn targets_out(targets: &[Option<usize>]) -> Vec<usize> {
    targets.iter().map(|t| t.map_or(0, |j| j + 1)).collect()
}

fn targets_in(targets: &[usize]) -> Vec<Option<usize>> {
    targets.iter().map(|&t| t.checked_sub(1)).collect()
}

impl CodeDescriptor {
    pub fn from_code(code: &BpdCode) -> Self {
        let params = code.params();
        let tower = code.tower();
        let parity = code.parity();
        CodeDescriptor {
            format_version: DESCRIPTOR_VERSION,
            n: params.n,
            k: params.k,
            tower: TowerDesc {
                m: tower.degree(),
                mu: tower.modulus().iter().rev().map(|&c| nibble(c)).collect(),
            },
            base: BaseDesc {
                tag: parity.construction().tag().to_string(),
                points: parity
                    .construction()
                    .points()
                    .into_iter()
                    .map(nibble)
                    .collect(),
                p: parity
                    .entries()
                    .iter()
                    .map(|row| row.iter().map(|&c| nibble(c)).collect())
                    .collect(),
            },
            lambda: tower.to_hex(code.lambda()),
            plan: PlanDesc {
                a_target: targets_out(code.plan().a_target()),
                b_target: targets_out(code.plan().b_target()),
            },
        }
    }

    pub fn to_code(&self) -> Result<BpdCode> {
        if self.format_version != DESCRIPTOR_VERSION {
            return Err(BpdError::Format(format!(
                "unsupported descriptor version {}",
                self.format_version
            )));
        }
        let params = CodeParams::new(self.n, self.k)?;
        let mut mu = self
            .tower
            .mu
            .iter()
            .map(|s| parse_nibble(s))
            .collect::<Result<Vec<_>>>()?;
        mu.reverse();
        if mu.len() != self.tower.m + 1 {
            return Err(BpdError::Format(format!(
                "μ must have {} coefficients",
                self.tower.m + 1
            )));
        }
        let tower = FieldTower::with_modulus(&mu)?;

        let points = self
            .base
            .points
            .iter()
            .map(|s| parse_nibble(s))
            .collect::<Result<Vec<_>>>()?;
        if points.len() != params.n {
            return Err(BpdError::Format(format!(
                "expected {} base points",
                params.n
            )));
        }
        let construction = match self.base.tag.as_str() {
            "cauchy" => Construction::Cauchy {
                xs: points[..params.k].to_vec(),
                ys: points[params.k..].to_vec(),
            },
            "rs" => Construction::RsSystematic { points },
            other => return Err(BpdError::Format(format!("unknown base tag {other:?}"))),
        };
        if self.base.p.len() != params.k {
            return Err(BpdError::Format(format!("P must have {} rows", params.k)));
        }
        let entries = self
            .base
            .p
            .iter()
            .map(|row| {
                if row.len() != params.r {
                    return Err(BpdError::Format(format!(
                        "P rows must have {} entries",
                        params.r
                    )));
                }
                (0..row.len())
                    .map(|i| parse_nibble(&row[i..i + 1]))
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        let parity = ParityMatrix::from_parts(construction, entries)?;

        let plan = PiggybackPlan::from_targets(
            params,
            targets_in(&self.plan.a_target),
            targets_in(&self.plan.b_target),
        )?;
        let lambda = tower.from_hex(&self.lambda)?;
        BpdCode::new(tower, parity, plan, lambda)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("descriptor serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| BpdError::Format(format!("descriptor: {e}")))
    }
}

pub fn save(code: &BpdCode) -> String {
    CodeDescriptor::from_code(code).to_json()
}

pub fn load(text: &str) -> Result<BpdCode> {
    CodeDescriptor::from_json(text)?.to_code()
}
