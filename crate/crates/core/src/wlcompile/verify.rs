//! Sweeps comparing compiled formulas against the direct computation of X.

use rayon::prelude::*;
use serde::Serialize;

use super::{compile_x_formula, CompileParams};
use crate::clogic::{Evaluator, FormulaId, FormulaStore};
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::structure::ElemId;
use crate::xfix::{encode_tau_n, XInstance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub id: usize,
    pub v: ElemId,
    pub i: i64,
    pub formula: bool,
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub n: usize,
    pub r: u32,
    pub h: u32,
    pub instances: usize,
    pub checks: usize,
    pub mismatches: Vec<Mismatch>,
}

impl SweepReport {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compiled `φ_1 … φ_{i_max}` for one size bound.
pub struct CompiledFamily {
    pub params: CompileParams,
    pub store: FormulaStore,
    pub formulas: Vec<FormulaId>,
}

impl CompiledFamily {
    pub fn new(params: CompileParams, i_max: i64) -> Result<Self> {
        let mut store = FormulaStore::new();
        let formulas = (1..=i_max).map(|i| compile_x_formula(&mut store, params, i)).collect::<Result<_>>()?;
        Ok(CompiledFamily { params, store, formulas })
    }
}

/// Checks `φ_i(v)` on the τ encoding against `(v, i) ∈ X` for every
/// instance, vertex and `i ∈ [1, i_max]`. Instances run in parallel; the
/// report lists mismatches by instance id.
pub fn verify_compiled(instances: &[Instance], family: &CompiledFamily) -> Result<SweepReport> {
    let n = family.params.n;
    if let Some(big) = instances.iter().find(|inst| inst.graph.n() > n) {
        return Err(Error::SizeExceeded(format!("instance {} has {} vertices, bound is {n}", big.id, big.graph.n())));
    }
    let per: Vec<(usize, Vec<Mismatch>)> = instances
        .par_iter()
        .map(|inst| -> Result<(usize, Vec<Mismatch>)> {
            let s = encode_tau_n(&inst.graph, &inst.condition, n)?;
            let mut x = XInstance::new(inst.graph.clone(), inst.condition.clone())?;
            let mut ev = Evaluator::new(&family.store, &s);
            let x_var = family.store.lookup_var("x").expect("compiled formulas use x");
            let mut checks = 0;
            let mut bad = Vec::new();
            for v in 0..inst.graph.n() as ElemId {
                for (k, &f) in family.formulas.iter().enumerate() {
                    let i = k as i64 + 1;
                    let formula = ev.eval_bound(f, &[(x_var, v)])?;
                    let oracle = x.compute_x(v, i)?;
                    checks += 1;
                    if formula != oracle {
                        bad.push(Mismatch { id: inst.id, v, i, formula, oracle });
                    }
                }
            }
            Ok((checks, bad))
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport {
        n,
        r: family.params.r,
        h: family.params.h,
        instances: instances.len(),
        checks: per.iter().map(|p| p.0).sum(),
        mismatches: per.into_iter().flat_map(|p| p.1).collect(),
    })
}
