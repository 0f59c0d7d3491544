//! Compilation of the recursion relation X(G,C) into bounded-variable
//! counting formulas of logarithmic quantifier depth.
//!
//! `φ_i(x) := ψ^H_{t0,i}(x)` holds at `v` on the τ encoding of `(G, C)` iff
//! `(v, i) ∈ X(G, C)`. The families `deg`, `path`, `ψ_t0`, `ψ_t1`,
//! `children_t0` and `children_t1` are built through one cache, so the
//! result is a DAG whose size is polynomial in `n` and `H`.

mod numelim;
mod translate;
mod verify;

use num_bigint::BigUint;
use rustc_hash::FxHashMap;

use crate::clogic::{CountMode, FormulaId, FormulaStore, VarId};
use crate::error::{Error, Result};
use crate::xfix::p_name;

pub use numelim::{NumberEliminator, NumberValues};
pub use translate::{translate_lrec_once, TranslateOptions};
pub use verify::{verify_compiled, CompiledFamily, Mismatch, SweepReport};

/// Largest resource exponent accepted by [`CompileParams::new`].
pub const MAX_R: u32 = 2;

/// Default variable palette; the compiler uses its first three names.
pub const DEFAULT_PALETTE: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct CompileParams {
    pub n: usize,
    pub r: u32,
    /// Recursion budget `H = ⌈(4r+2)·log₂(n+1)⌉`.
    pub h: u32,
}

impl CompileParams {
    pub fn new(n: usize, r: u32) -> Result<Self> {
        if !(1..=MAX_R).contains(&r) {
            return Err(Error::RangeViolation(format!("r must be in [1, {MAX_R}], got {r}")));
        }
        Self::with_budget(n, r, recursion_budget(n, r))
    }

    /// Parameters with an explicit recursion budget.
    pub fn with_budget(n: usize, r: u32, h: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::RangeViolation("n must be at least 1".into()));
        }
        if r == 0 {
            return Err(Error::RangeViolation("r must be at least 1".into()));
        }
        Ok(CompileParams { n, r, h })
    }

    /// Largest admissible resource, `(n+1)^r`.
    pub fn max_resource(&self) -> u64 {
        (self.n as u64 + 1).pow(self.r)
    }
}

/// `⌈(4r+2)·log₂(n+1)⌉`, computed exactly as the least `h` with
/// `2^h ≥ (n+1)^(4r+2)`.
pub fn recursion_budget(n: usize, r: u32) -> u32 {
    let target = BigUint::from(n as u64 + 1).pow(4 * r + 2);
    let mut h = 0u32;
    let mut p = BigUint::from(1u8);
    while p < target {
        p <<= 1;
        h += 1;
    }
    h
}

/// The primitive relations the compiled formulas are phrased in. The direct
/// signature uses the τ encoding; the lrec translation substitutes formulas
/// over the source structure.
pub trait Signature {
    fn edge(&mut self, st: &mut FormulaStore, a: VarId, b: VarId) -> Result<FormulaId>;
    /// `P_c(a)`: `c ∈ C(a)`.
    fn label(&mut self, st: &mut FormulaStore, c: usize, a: VarId) -> Result<FormulaId>;
    fn equal(&mut self, st: &mut FormulaStore, a: VarId, b: VarId) -> Result<FormulaId>;
    /// Exactly `t` vertices `var` satisfy `body`.
    fn count_exact(&mut self, st: &mut FormulaStore, t: usize, var: VarId, body: FormulaId) -> Result<FormulaId>;
}

/// Atoms `E` and `P_c` of the τ encoding.
#[derive(Debug, Default, Clone, Copy)]
pub struct TauSignature;

impl Signature for TauSignature {
    fn edge(&mut self, st: &mut FormulaStore, a: VarId, b: VarId) -> Result<FormulaId> {
        let e = st.sym("E", 2)?;
        st.atom(e, &[a, b])
    }

    fn label(&mut self, st: &mut FormulaStore, c: usize, a: VarId) -> Result<FormulaId> {
        let p = st.sym(&p_name(c), 1)?;
        st.atom(p, &[a])
    }

    fn equal(&mut self, st: &mut FormulaStore, a: VarId, b: VarId) -> Result<FormulaId> {
        Ok(st.eq(a, b))
    }

    fn count_exact(&mut self, st: &mut FormulaStore, t: usize, var: VarId, body: FormulaId) -> Result<FormulaId> {
        let t = u32::try_from(t).map_err(|_| Error::RangeViolation(format!("count {t}")))?;
        st.count(CountMode::Exactly, t, var, body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Deg(usize, VarId),
    Path(u32, i64, i64, VarId, VarId),
    Psi0(u32, i64, VarId),
    Psi1(u32, i64, i64, usize, VarId, VarId),
    Child0(u32, i64, usize, VarId),
    Child1(u32, i64, i64, usize, usize, VarId, VarId),
}

/// Builds the formula families over a signature, with one shared cache.
pub struct Compiler<'s, S: Signature> {
    st: &'s mut FormulaStore,
    sig: S,
    params: CompileParams,
    palette: Vec<VarId>,
    cache: FxHashMap<Key, FormulaId>,
}

/// `⌊(ℓ−1)/d⌋` for `d ≥ 1`.
pub fn child_resource(l: i64, d: usize) -> i64 {
    (l - 1).div_euclid(d as i64)
}

impl<'s> Compiler<'s, TauSignature> {
    pub fn new(st: &'s mut FormulaStore, params: CompileParams) -> Self {
        Self::with_signature(st, params, TauSignature, &DEFAULT_PALETTE).expect("default palette is valid")
    }
}

impl<'s, S: Signature> Compiler<'s, S> {
    pub fn with_signature(st: &'s mut FormulaStore, params: CompileParams, sig: S, palette: &[&str]) -> Result<Self> {
        if palette.len() < 3 {
            return Err(Error::RangeViolation("the palette needs at least three variables".into()));
        }
        let palette = palette.iter().map(|p| st.var(p)).collect();
        Ok(Compiler { st, sig, params, palette, cache: FxHashMap::default() })
    }

    pub fn params(&self) -> CompileParams {
        self.params
    }

    pub fn store(&self) -> &FormulaStore {
        self.st
    }

    pub fn store_mut(&mut self) -> &mut FormulaStore {
        self.st
    }

    pub fn signature_mut(&mut self) -> &mut S {
        &mut self.sig
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    /// The first palette variable.
    pub fn main_var(&self) -> VarId {
        self.palette[0]
    }

    fn fresh(&self, used: &[VarId]) -> VarId {
        *self.palette.iter().find(|v| !used.contains(v)).expect("palette has three variables")
    }

    fn cached(&mut self, key: Key, build: impl FnOnce(&mut Self) -> Result<FormulaId>) -> Result<FormulaId> {
        if let Some(&f) = self.cache.get(&key) {
            return Ok(f);
        }
        let f = build(self)?;
        self.cache.insert(key, f);
        Ok(f)
    }

    /// `deg⁻_d(t) := ∃^{=d} aux E(aux, t)`.
    pub fn deg(&mut self, d: usize, t: VarId) -> Result<FormulaId> {
        let aux = self.fresh(&[t]);
        self.deg_with(d, t, aux)
    }

    /// `deg⁻_d(t)` with an explicit auxiliary variable.
    pub fn deg_with(&mut self, d: usize, t: VarId, aux: VarId) -> Result<FormulaId> {
        if d > self.params.n {
            return Err(Error::RangeViolation(format!("degree {d} exceeds n = {}", self.params.n)));
        }
        if aux == t {
            return Err(Error::RangeViolation("auxiliary variable must differ from the target".into()));
        }
        if aux == self.fresh(&[t]) {
            return self.cached(Key::Deg(d, t), |c| {
                let e = c.sig.edge(c.st, aux, t)?;
                c.sig.count_exact(c.st, d, aux, e)
            });
        }
        let e = self.sig.edge(self.st, aux, t)?;
        self.sig.count_exact(self.st, d, aux, e)
    }

    /// A resource-annotated path from `(x, ℓ)` to `(y, ℓ′)` checkable in `h`
    /// doubling steps.
    pub fn path(&mut self, h: u32, l: i64, l2: i64, x: VarId, y: VarId) -> Result<FormulaId> {
        if l2 < 1 || l < l2 {
            return Ok(self.st.bot());
        }
        if l == l2 {
            // resources strictly decrease along edges, so only the trivial path remains
            return self.sig.equal(self.st, x, y);
        }
        self.cached(Key::Path(h, l, l2, x, y), |c| {
            if h == 0 {
                let mut degs = Vec::new();
                for d in 1..=c.params.n {
                    if child_resource(l, d) == l2 {
                        degs.push(c.deg(d, y)?);
                    }
                }
                let some_deg = c.st.or(degs);
                let e = c.sig.edge(c.st, x, y)?;
                return Ok(c.st.and2(e, some_deg));
            }
            let z = c.fresh(&[x, y]);
            let mut parts = Vec::new();
            for j in l2..=l {
                let a = c.path(h - 1, l, j, x, z)?;
                if c.st.as_bool(a) == Some(false) {
                    continue;
                }
                let b = c.path(h - 1, j, l2, z, y)?;
                parts.push(c.st.and2(a, b));
            }
            let body = c.st.or(parts);
            Ok(c.st.exists(z, body))
        })
    }

    /// `ψ⁰_{t0,i}(x) := P_0(x) ∧ ∀y[E(x,y) → ⋁_{d=i′}^{n} deg⁻_d(y)]` with `i′`
    /// the local resource: a child receives resource 0 iff its in-degree is
    /// at least `i′`.
    fn psi0_t0(&mut self, i: i64, x: VarId) -> Result<FormulaId> {
        let y = self.fresh(&[x]);
        let mut degs = Vec::new();
        for d in i.max(1) as usize..=self.params.n {
            degs.push(self.deg(d, y)?);
        }
        let some_deg = self.st.or(degs);
        let e = self.sig.edge(self.st, x, y)?;
        let imp = self.st.implies(e, some_deg);
        let all = self.st.forall(y, imp);
        let p0 = self.sig.label(self.st, 0, x)?;
        Ok(self.st.and2(p0, all))
    }

    /// `(x, i) ∈ X`, verified with recursion budget `h`.
    pub fn psi_t0(&mut self, h: u32, i: i64, x: VarId) -> Result<FormulaId> {
        if i < 1 {
            return Ok(self.st.bot());
        }
        self.cached(Key::Psi0(h, i, x), |c| {
            let base = c.psi0_t0(i, x)?;
            if h == 0 {
                return Ok(base);
            }
            let y = c.fresh(&[x]);
            let mut parts = Vec::new();
            // the split point may be (x, i) itself, hence ℓ up to i
            for l in 1..=i {
                let p = c.path(h, i, l, x, y)?;
                if c.st.as_bool(p) == Some(false) {
                    continue;
                }
                for cnt in 0..=c.params.n {
                    let ch = c.children_t0(h - 1, l, cnt, y)?;
                    if c.st.as_bool(ch) == Some(false) {
                        continue;
                    }
                    let t1 = c.psi_t1(h - 1, i, l, cnt, x, y)?;
                    parts.push(c.st.and([p, ch, t1]));
                }
            }
            let body = c.st.or(parts);
            let ex = c.st.exists(y, body);
            Ok(c.st.or2(base, ex))
        })
    }

    /// `(y, ℓ)` has exactly `cnt` children in X, each verified by `ψ^h_{t0}`.
    pub fn children_t0(&mut self, h: u32, l: i64, cnt: usize, y: VarId) -> Result<FormulaId> {
        self.cached(Key::Child0(h, l, cnt, y), |c| {
            let z = c.fresh(&[y]);
            let mut parts = Vec::new();
            for d in 1..=c.params.n {
                let q = child_resource(l, d);
                let p = c.psi_t0(h, q, z)?;
                if c.st.as_bool(p) == Some(false) {
                    continue;
                }
                let dg = c.deg(d, z)?;
                parts.push(c.st.and2(dg, p));
            }
            let any = c.st.or(parts);
            let e = c.sig.edge(c.st, y, z)?;
            let body = c.st.and2(e, any);
            c.sig.count_exact(c.st, cnt, z, body)
        })
    }

    /// `(x, i) ∈ X` under the assumption that `(y, j)` has exactly `cnt`
    /// children in X, with recursion stopped at `(y, j)`.
    pub fn psi_t1(&mut self, h: u32, i: i64, j: i64, cnt: usize, x: VarId, y: VarId) -> Result<FormulaId> {
        if i < 1 || j < 1 || j > i {
            return Ok(self.st.bot());
        }
        self.cached(Key::Psi1(h, i, j, cnt, x, y), |c| {
            let base = if i == j {
                let p = c.sig.label(c.st, cnt, x)?;
                let e = c.sig.equal(c.st, x, y)?;
                c.st.and2(p, e)
            } else {
                c.st.bot()
            };
            if h == 0 {
                return Ok(base);
            }
            let z = c.fresh(&[x, y]);
            let mut parts = Vec::new();
            // as for ψ_t0, the split point may be (x, i) itself
            for l in j + 1..=i {
                let p1 = c.path(h, i, l, x, z)?;
                if c.st.as_bool(p1) == Some(false) {
                    continue;
                }
                let p2 = c.path(h, l, j, z, y)?;
                if c.st.as_bool(p2) == Some(false) {
                    continue;
                }
                for cnt2 in 0..=c.params.n {
                    let ch = c.children_t1(h - 1, l, j, cnt, cnt2, z, y)?;
                    if c.st.as_bool(ch) == Some(false) {
                        continue;
                    }
                    let t = c.psi_t1(h - 1, i, l, cnt2, x, z)?;
                    parts.push(c.st.and([p1, p2, ch, t]));
                }
            }
            let body = c.st.or(parts);
            let ex = c.st.exists(z, body);
            Ok(c.st.or2(base, ex))
        })
    }

    /// `(z, ℓ)` has exactly `cnt2` children in X, given that `(y, j)` has
    /// exactly `cnt` children in X. Children above `(y, j)` are checked by
    /// `ψ_t1`, the others by `ψ_t0`.
    #[allow(clippy::too_many_arguments)]
    pub fn children_t1(
        &mut self,
        h: u32,
        l: i64,
        j: i64,
        cnt: usize,
        cnt2: usize,
        z: VarId,
        y: VarId,
    ) -> Result<FormulaId> {
        self.cached(Key::Child1(h, l, j, cnt, cnt2, z, y), |c| {
            let z2 = c.fresh(&[z, y]);
            let mut parts = Vec::new();
            for d in 1..=c.params.n {
                let q = child_resource(l, d);
                if q < 1 {
                    continue;
                }
                let below = c.path(h, q, j, z2, y)?;
                let t0 = c.psi_t0(h, q, z2)?;
                let not_below = c.st.not(below);
                let side0 = c.st.and2(t0, not_below);
                let t1 = c.psi_t1(h, q, j, cnt, z2, y)?;
                let side1 = c.st.and2(t1, below);
                let either = c.st.or2(side0, side1);
                if c.st.as_bool(either) == Some(false) {
                    continue;
                }
                let dg = c.deg(d, z2)?;
                parts.push(c.st.and2(dg, either));
            }
            let any = c.st.or(parts);
            let e = c.sig.edge(c.st, z, z2)?;
            let body = c.st.and2(e, any);
            c.sig.count_exact(c.st, cnt2, z2, body)
        })
    }

    /// `φ_i(x) := ψ^H_{t0,i}(x)` in the first palette variable. Resources
    /// `i ≤ 0` give `⊥`.
    pub fn compile_x(&mut self, i: i64) -> Result<FormulaId> {
        if i > 0 && i as u64 > self.params.max_resource() {
            return Err(Error::RangeViolation(format!(
                "resource {i} exceeds (n+1)^r = {}",
                self.params.max_resource()
            )));
        }
        let x = self.main_var();
        self.psi_t0(self.params.h, i, x)
    }
}

/// One-shot compilation of `φ_i(x)` over the τ encoding.
pub fn compile_x_formula(st: &mut FormulaStore, params: CompileParams, i: i64) -> Result<FormulaId> {
    Compiler::new(st, params).compile_x(i)
}
