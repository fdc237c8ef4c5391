//! Bottom-up feasibility tables and the top-down reconstruction pass.
//!
//! For a node `c` with parent `P` and children `R`, `L`:
//!
//! * `F_c(p_c, p_R, p_L, v)` is the set of subtree masses `w` (one per type
//!   whose region contains `c`) reachable by grid probabilities below `c`
//!   that satisfy every utility window strictly below `c`. Rows of `F` are
//!   rebuilt on demand as `b + G_R + G_L` (Minkowski sum of bitsets).
//! * `G_c(p_P, p_c, v)` folds `c`'s own window into `F_c`, which needs the
//!   parent's probabilities, and projects away the children's probabilities
//!   and the types whose region starts at `c` (their mass must be complete
//!   there and their target value is free). Only `G` is stored.
//!
//! Probabilities are whole units out of `U = 1/delta`; every index below
//! is a mixed-radix number with radix `U + 1` (first coordinate most
//! significant), and target values are indices into the value grid.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expected_utility::GroupedEvaluator;
use crate::game::ActionGraphGame;
use crate::StrategyId;

use super::grid::GridSpec;
use super::tree::{RootedTree, TypeRegions};
use super::{PtasOptions, WindowRule};

/// Lexicographic successor among unit vectors where, for every type, the
/// coordinates of that type plus the units already `used` stay within
/// `units`. Returns `false` after the last point, leaving all zeros.
fn next_point(vals: &mut [u32], types: &[usize], used: &mut [u32], units: u32) -> bool {
    for k in (0..vals.len()).rev() {
        let t = types[k];
        if used[t] < units {
            vals[k] += 1;
            used[t] += 1;
            return true;
        }
        used[t] -= vals[k];
        vals[k] = 0;
    }
    false
}

fn encode(vals: &[u32], radix: usize) -> usize {
    vals.iter().fold(0, |acc, &x| acc * radix + x as usize)
}

fn decode(mut idx: usize, radix: usize, out: &mut [usize]) {
    for d in out.iter_mut().rev() {
        *d = idx % radix;
        idx /= radix;
    }
}

fn pow(base: usize, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn get_bit(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

fn set_bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        core::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w * 64 + b)
        })
    })
}

fn popcount(row: &[u64]) -> u32 {
    row.iter().map(|w| w.count_ones()).sum()
}

/// `dst |= src << shift`, truncated to `bits`.
fn shl_or(dst: &mut [u64], src: &[u64], shift: usize, bits: usize) {
    let ws = shift / 64;
    let bs = shift % 64;
    let n = dst.len();
    for i in (ws..n).rev() {
        let j = i - ws;
        let mut v = src[j] << bs;
        if bs > 0 && j > 0 {
            v |= src[j - 1] >> (64 - bs);
        }
        dst[i] |= v;
    }
    let tail = bits % 64;
    if tail != 0 {
        dst[n - 1] &= (1u64 << tail) - 1;
    }
}

/// Per-node bookkeeping of which types are tracked where.
#[derive(Debug, Clone)]
struct Layout {
    own: Vec<usize>,
    reg: Vec<usize>,
    sh: Vec<usize>,
    /// Positions in `reg` of the types shared with the parent.
    sh_pos: Vec<usize>,
    /// Positions in `reg` of the types entering at this node.
    ent_pos: Vec<usize>,
    /// Positions in `reg` of the own types.
    own_pos: Vec<usize>,
    /// Positions of `sh` inside the parent's `reg`.
    sh_in_parent: Vec<usize>,
    nu: Vec<StrategyId>,
    bump: Option<usize>,
    /// For every value index over `reg`: the value index over `sh`.
    v_to_sh: Vec<usize>,
    /// For every value index over the parent's `reg`: the value index over `sh`.
    parent_v_to_sh: Vec<usize>,
    vreg: usize,
    vsh: usize,
    fbits: usize,
    fwords: usize,
}

#[derive(Debug, Clone)]
struct GTable {
    vrows: usize,
    words: usize,
    data: Vec<u64>,
}

impl GTable {
    fn row(&self, key: usize, v: usize) -> &[u64] {
        let at = (key * self.vrows + v) * self.words;
        &self.data[at..at + self.words]
    }

    fn row_mut(&mut self, key: usize, v: usize) -> &mut [u64] {
        let at = (key * self.vrows + v) * self.words;
        &mut self.data[at..at + self.words]
    }
}

/// What the reconstruction pass produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Units per type, aligned with the type's strategy list; each sums to `U`.
    pub units: Vec<Vec<u32>>,
    /// Target value chosen for each type.
    pub values: Vec<f64>,
}

/// The stored tables of one PTAS run.
#[derive(Debug, Clone)]
pub struct DpTables<'g> {
    game: &'g ActionGraphGame,
    tree: RootedTree,
    regions: TypeRegions,
    grid: GridSpec,
    window: WindowRule,
    k: usize,
    radix: usize,
    layouts: Vec<Layout>,
    g: Vec<GTable>,
}

fn positions(of: &[usize], within: &[usize]) -> Vec<usize> {
    of.iter().map(|t| within.iter().position(|x| x == t).expect("subset")).collect()
}

/// Builds the tables bottom-up. `game` must already be normalized to
/// payoffs in `[0, 1]` and its strategy graph rooted as `tree`.
pub fn build_tables<'g>(
    game: &'g ActionGraphGame,
    tree: RootedTree,
    regions: TypeRegions,
    grid: GridSpec,
    options: &PtasOptions,
) -> Result<DpTables<'g>> {
    if game.agent_count() != game.n() as usize {
        return Err(Error::InvalidGame("agent count mismatch".into()));
    }
    let k = game.types().len();
    let nv = grid.values().len();
    let radix = grid.units() as usize + 1;
    let count = tree.len();
    let mut layouts = Vec::with_capacity(count);
    for c in 0..count {
        let own = regions.own[c].clone();
        let reg = regions.region[c].clone();
        let parent_reg: &[usize] = match tree.parent(c) {
            Some(p) => &regions.region[p],
            None => &[],
        };
        let sh: Vec<usize> = reg.iter().copied().filter(|t| parent_reg.contains(t)).collect();
        let sh_pos = positions(&sh, &reg);
        let ent_pos = (0..reg.len()).filter(|i| !sh_pos.contains(i)).collect();
        let own_pos = positions(&own, &reg);
        let sh_in_parent = positions(&sh, parent_reg);
        let nu = game.neighbors(c).to_vec();
        let bump = nu.binary_search(&c).ok();
        let vreg = pow(nv, reg.len());
        let vsh = pow(nv, sh.len());
        let fbits = pow(radix, reg.len());
        if vreg > options.table_limit || fbits > options.table_limit {
            return Err(Error::GuardExceeded { what: "PTAS table words", size: vreg.max(fbits), limit: options.table_limit });
        }
        let (vreg, vsh, fbits) = (vreg as usize, vsh as usize, fbits as usize);
        let mut digits = vec![0usize; reg.len()];
        let v_to_sh = (0..vreg)
            .map(|v| {
                decode(v, nv, &mut digits);
                sh_pos.iter().fold(0, |acc, &p| acc * nv + digits[p])
            })
            .collect();
        let mut pdigits = vec![0usize; parent_reg.len()];
        let parent_vreg = pow(nv, parent_reg.len()) as usize;
        let parent_v_to_sh = (0..parent_vreg)
            .map(|v| {
                decode(v, nv, &mut pdigits);
                sh_in_parent.iter().fold(0, |acc, &p| acc * nv + pdigits[p])
            })
            .collect();
        layouts.push(Layout {
            own,
            reg,
            sh,
            sh_pos,
            ent_pos,
            own_pos,
            sh_in_parent,
            nu,
            bump,
            v_to_sh,
            parent_v_to_sh,
            vreg,
            vsh,
            fbits,
            fwords: words_for(fbits),
        });
    }
    let mut tables = DpTables {
        game,
        tree,
        regions,
        grid,
        window: options.window,
        k,
        radix,
        layouts,
        g: Vec::with_capacity(count),
    };
    tables.g = (0..count).map(|_| GTable { vrows: 0, words: 0, data: Vec::new() }).collect();
    let order = tables.tree.post_order().to_vec();
    for c in order {
        let g = tables.build_node(c, options)?;
        tables.g[c] = g;
    }
    Ok(tables)
}

impl<'g> DpTables<'g> {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn regions(&self) -> &TypeRegions {
        &self.regions
    }

    fn units(&self) -> u32 {
        self.grid.units()
    }

    fn parent_own(&self, c: StrategyId) -> &[usize] {
        match self.tree.parent(c) {
            Some(p) => &self.layouts[p].own,
            None => &[],
        }
    }

    fn child_types(&self, c: StrategyId) -> Vec<usize> {
        self.tree.children(c).flat_map(|x| self.layouts[x].own.iter().copied()).collect()
    }

    /// Writes the own-type units of `node` into the scratch vector.
    fn place(&self, units: &mut [u32], node: Option<StrategyId>, vals: &[u32]) {
        if let Some(x) = node {
            for (i, &t) in self.layouts[x].own.iter().enumerate() {
                units[x * self.k + t] = vals[i];
            }
        }
    }

    /// Expected payoff of strategy `c` for an agent of type `j`, with every
    /// type's probabilities on `nu(c)` read from `units`.
    fn eu(&self, ev: &mut GroupedEvaluator, c: StrategyId, j: usize, units: &[u32], probs: &mut [f64]) -> f64 {
        let lay = &self.layouts[c];
        let total = self.units();
        let scale = f64::from(total);
        ev.reset();
        for (t, ty) in self.game.types().iter().enumerate() {
            let mut sum = 0;
            for (i, &x) in lay.nu.iter().enumerate() {
                let q = units[x * self.k + t];
                probs[i] = f64::from(q) / scale;
                sum += q;
            }
            let count = ty.agent_count - u32::from(t == j);
            if sum == 0 || count == 0 {
                continue;
            }
            ev.add_group(count, probs, f64::from(total - sum) / scale);
        }
        ev.expectation(self.game.utility_table(c), lay.bump)
    }

    fn window_ok(&self, eu: f64, v: f64, played: bool) -> bool {
        let h = self.grid.eps() / 2.0;
        if !played {
            return eu <= v + h;
        }
        match self.window {
            WindowRule::HalfOpen => eu >= v - h && eu < v + h,
            WindowRule::Open => eu > v - h && eu < v + h,
        }
    }

    fn evaluator(&self, c: StrategyId) -> GroupedEvaluator {
        GroupedEvaluator::new(self.layouts[c].nu.len(), self.game.n())
    }

    /// `F_c` row for one value index over `reg(c)`; `scratch` holds one row.
    fn f_row(&self, c: StrategyId, pc: &[u32], pr: &[u32], pl: &[u32], v: usize, out: &mut [u64], scratch: &mut [u64]) {
        let lay = &self.layouts[c];
        out.iter_mut().for_each(|w| *w = 0);
        let mut b = vec![0u32; lay.reg.len()];
        for (i, &p) in lay.own_pos.iter().enumerate() {
            b[p] = pc[i];
        }
        set_bit(out, encode(&b, self.radix));
        for (x, px) in [(self.tree.right(c), pr), (self.tree.left(c), pl)] {
            let Some(x) = x else { continue };
            let xl = &self.layouts[x];
            let key = encode(pc, self.radix) * pow(self.radix, px.len()) as usize + encode(px, self.radix);
            let grow = self.g[x].row(key, xl.parent_v_to_sh[v]);
            scratch.iter_mut().for_each(|w| *w = 0);
            self.minkowski(out, grow, &xl.sh_in_parent, lay.reg.len(), lay.fbits, scratch);
            out.copy_from_slice(scratch);
            if out.iter().all(|&w| w == 0) {
                return;
            }
        }
    }

    /// `out = a + b` where `a` lives on `dims` coordinates and `b` on the
    /// coordinates listed in `b_pos`.
    fn minkowski(&self, a: &[u64], b: &[u64], b_pos: &[usize], dims: usize, bits: usize, out: &mut [u64]) {
        if b_pos.is_empty() {
            if get_bit(b, 0) {
                out.copy_from_slice(a);
            }
            return;
        }
        if dims == 1 {
            let (sparse, dense) = if popcount(a) <= popcount(b) { (a, b) } else { (b, a) };
            for s in set_bits(sparse) {
                shl_or(out, dense, s, bits);
            }
            return;
        }
        let r = self.radix;
        let mut da = vec![0usize; dims];
        let mut db = vec![0usize; b_pos.len()];
        for ia in set_bits(a) {
            decode(ia, r, &mut da);
            'pairs: for ib in set_bits(b) {
                decode(ib, r, &mut db);
                let mut sum = da.clone();
                for (i, &p) in b_pos.iter().enumerate() {
                    sum[p] += db[i];
                    if sum[p] >= r {
                        continue 'pairs;
                    }
                }
                set_bit(out, sum.iter().fold(0, |acc, &d| acc * r + d));
            }
        }
    }

    /// ORs the projection of an `F_c` row (entering types at full mass) into a `G_c` row.
    fn project(&self, c: StrategyId, frow: &[u64], grow: &mut [u64]) {
        let lay = &self.layouts[c];
        if lay.ent_pos.is_empty() {
            for (g, f) in grow.iter_mut().zip(frow) {
                *g |= f;
            }
            return;
        }
        let full = self.units() as usize;
        if lay.reg.len() == 1 {
            if get_bit(frow, full) {
                set_bit(grow, 0);
            }
            return;
        }
        let mut d = vec![0usize; lay.reg.len()];
        for i in set_bits(frow) {
            decode(i, self.radix, &mut d);
            if lay.ent_pos.iter().all(|&p| d[p] == full) {
                set_bit(grow, lay.sh_pos.iter().fold(0, |acc, &p| acc * self.radix + d[p]));
            }
        }
    }

    fn build_node(&self, c: StrategyId, options: &PtasOptions) -> Result<GTable> {
        let lay = &self.layouts[c];
        let units = self.units();
        let radix = self.radix;
        let p_own = self.parent_own(c).to_vec();
        let parent = self.tree.parent(c);
        let (right, left) = (self.tree.right(c), self.tree.left(c));
        let r_len = right.map_or(0, |x| self.layouts[x].own.len());
        let ch_types = self.child_types(c);

        let key_len = p_own.len() + lay.own.len();
        let gbits = pow(radix, lay.sh.len());
        let gwords = words_for(gbits as usize) as u128;
        let size = pow(radix, key_len).saturating_mul(lay.vsh as u128).saturating_mul(gwords);
        if size > options.table_limit {
            return Err(Error::GuardExceeded { what: "PTAS table words", size, limit: options.table_limit });
        }
        let mut table = GTable { vrows: lay.vsh, words: gwords as usize, data: vec![0; size as usize] };

        let outer_len = p_own.len() + ch_types.len();
        let cached = lay.bump.is_none() && !lay.own.is_empty();
        let cache_size = if cached { pow(radix, outer_len).saturating_mul(lay.own.len() as u128) } else { 0 };
        if cache_size > options.table_limit {
            return Err(Error::GuardExceeded { what: "PTAS table words", size: cache_size, limit: options.table_limit });
        }
        let mut cache = vec![f64::NAN; cache_size as usize];
        let mut ev = self.evaluator(c);
        let mut probs = vec![0.0; lay.nu.len()];
        let mut scratch_units = vec![0u32; self.tree.len() * self.k];
        let values = self.grid.values();
        let nv = values.len();
        let mut vdigits = vec![0usize; lay.reg.len()];
        let mut eus = vec![0.0; lay.own.len()];

        if cached && !options.prune {
            // Eager fill; the pruned path fills lazily. Both give the same table.
            let mut used = vec![0u32; self.k];
            let mut pp = vec![0u32; p_own.len()];
            let mut ch = vec![0u32; ch_types.len()];
            loop {
                loop {
                    self.place(&mut scratch_units, parent, &pp);
                    self.place(&mut scratch_units, right, &ch[..r_len]);
                    self.place(&mut scratch_units, left, &ch[r_len..]);
                    let key = encode(&pp, radix) * pow(radix, ch.len()) as usize + encode(&ch, radix);
                    for (i, &j) in lay.own.iter().enumerate() {
                        cache[key * lay.own.len() + i] = self.eu(&mut ev, c, j, &scratch_units, &mut probs);
                    }
                    if !next_point(&mut pp, &p_own, &mut used, units) {
                        break;
                    }
                }
                if !next_point(&mut ch, &ch_types, &mut used, units) {
                    break;
                }
            }
        }

        let mut fbuf = vec![0u64; lay.vreg * lay.fwords];
        let mut scratch = vec![0u64; lay.fwords];
        let mut used = vec![0u32; self.k];
        let mut ch = vec![0u32; ch_types.len()];
        let mut pc = vec![0u32; lay.own.len()];
        let mut pp = vec![0u32; p_own.len()];
        loop {
            let (pr, pl) = ch.split_at(r_len);
            loop {
                let mut any = false;
                for v in 0..lay.vreg {
                    let row = &mut fbuf[v * lay.fwords..(v + 1) * lay.fwords];
                    self.f_row(c, &pc, pr, pl, v, row, &mut scratch);
                    any |= row.iter().any(|&w| w != 0);
                }
                if any || !options.prune {
                    self.place(&mut scratch_units, Some(c), &pc);
                    self.place(&mut scratch_units, right, pr);
                    self.place(&mut scratch_units, left, pl);
                    loop {
                        self.place(&mut scratch_units, parent, &pp);
                        let outer_key = encode(&pp, radix) * pow(radix, ch.len()) as usize + encode(&ch, radix);
                        for (i, &j) in lay.own.iter().enumerate() {
                            eus[i] = if cached {
                                let slot = &mut cache[outer_key * lay.own.len() + i];
                                if slot.is_nan() {
                                    *slot = self.eu(&mut ev, c, j, &scratch_units, &mut probs);
                                }
                                *slot
                            } else {
                                self.eu(&mut ev, c, j, &scratch_units, &mut probs)
                            };
                        }
                        let gkey = encode(&pp, radix) * pow(radix, pc.len()) as usize + encode(&pc, radix);
                        for v in 0..lay.vreg {
                            let frow = &fbuf[v * lay.fwords..(v + 1) * lay.fwords];
                            if frow.iter().all(|&w| w == 0) {
                                continue;
                            }
                            decode(v, nv, &mut vdigits);
                            let ok = lay.own_pos.iter().enumerate().all(|(i, &p)| {
                                self.window_ok(eus[i], values[vdigits[p]], pc[i] > 0)
                            });
                            if ok {
                                let grow = table.row_mut(gkey, lay.v_to_sh[v]);
                                self.project(c, frow, grow);
                            }
                        }
                        if !next_point(&mut pp, &p_own, &mut used, units) {
                            break;
                        }
                    }
                }
                if !next_point(&mut pc, &lay.own, &mut used, units) {
                    break;
                }
            }
            if !next_point(&mut ch, &ch_types, &mut used, units) {
                break;
            }
        }
        Ok(table)
    }

    fn check_lengths(&self, c: StrategyId, pc: &[u32], pr: &[u32], pl: &[u32]) -> bool {
        let lay = &self.layouts[c];
        let r = self.tree.right(c).map_or(0, |x| self.layouts[x].own.len());
        let l = self.tree.left(c).map_or(0, |x| self.layouts[x].own.len());
        pc.len() == lay.own.len()
            && pr.len() == r
            && pl.len() == l
            && pc.iter().chain(pr).chain(pl).all(|&x| x <= self.units())
    }

    fn value_index(&self, v: &[usize]) -> Option<usize> {
        let nv = self.grid.values().len();
        v.iter().try_fold(0, |acc, &d| (d < nv).then_some(acc * nv + d))
    }

    fn w_index(&self, w: &[u32]) -> Option<usize> {
        w.iter().all(|&x| x <= self.units()).then(|| encode(w, self.radix))
    }

    /// Types tracked at `node`: (own, region, shared with the parent).
    pub fn node_types(&self, node: StrategyId) -> (&[usize], &[usize], &[usize]) {
        let l = &self.layouts[node];
        (&l.own, &l.reg, &l.sh)
    }

    /// `F_node(pc, pr, pl, v) ∋ w`. Probabilities are units per own type of
    /// the node and of its right and left child; `v` and `w` run over the
    /// node's region types.
    pub fn f_entry(&self, node: StrategyId, pc: &[u32], pr: &[u32], pl: &[u32], v: &[usize], w: &[u32]) -> bool {
        let lay = &self.layouts[node];
        if !self.check_lengths(node, pc, pr, pl) || v.len() != lay.reg.len() || w.len() != lay.reg.len() {
            return false;
        }
        let (Some(vi), Some(wi)) = (self.value_index(v), self.w_index(w)) else { return false };
        let mut row = vec![0u64; lay.fwords];
        let mut scratch = vec![0u64; lay.fwords];
        self.f_row(node, pc, pr, pl, vi, &mut row, &mut scratch);
        get_bit(&row, wi)
    }

    /// `G_node(pp, pc, v) ∋ w`, with `v` and `w` over the types shared with the parent.
    pub fn g_entry(&self, node: StrategyId, pp: &[u32], pc: &[u32], v: &[usize], w: &[u32]) -> bool {
        let lay = &self.layouts[node];
        if pp.len() != self.parent_own(node).len()
            || pc.len() != lay.own.len()
            || v.len() != lay.sh.len()
            || w.len() != lay.sh.len()
            || pp.iter().chain(pc).any(|&x| x > self.units())
        {
            return false;
        }
        let (Some(vi), Some(wi)) = (self.value_index(v), self.w_index(w)) else { return false };
        let key = encode(pp, self.radix) * pow(self.radix, pc.len()) as usize + encode(pc, self.radix);
        get_bit(self.g[node].row(key, vi), wi)
    }

    fn window_at(&self, c: StrategyId, pp: &[u32], pc: &[u32], pr: &[u32], pl: &[u32], v_reg: &[usize]) -> bool {
        let lay = &self.layouts[c];
        let mut units = vec![0u32; self.tree.len() * self.k];
        self.place(&mut units, self.tree.parent(c), pp);
        self.place(&mut units, Some(c), pc);
        self.place(&mut units, self.tree.right(c), pr);
        self.place(&mut units, self.tree.left(c), pl);
        let mut ev = self.evaluator(c);
        let mut probs = vec![0.0; lay.nu.len()];
        let values = self.grid.values();
        lay.own.iter().enumerate().all(|(i, &j)| {
            let eu = self.eu(&mut ev, c, j, &units, &mut probs);
            self.window_ok(eu, values[v_reg[lay.own_pos[i]]], pc[i] > 0)
        })
    }

    /// The root rule: `F_root` holds full mass for every region type and the
    /// root's own windows hold.
    pub fn root_entry(&self, pc: &[u32], pr: &[u32], pl: &[u32], v: &[usize]) -> bool {
        let root = self.tree.root();
        let full = vec![self.units(); self.layouts[root].reg.len()];
        self.f_entry(root, pc, pr, pl, v, &full) && self.window_at(root, &[], pc, pr, pl, v)
    }

    /// Root probability vectors (units per own type of the root) that admit
    /// a complete solution, in lexicographic order.
    pub fn feasible_roots(&self) -> Vec<Vec<u32>> {
        let root = self.tree.root();
        let own = &self.layouts[root].own;
        let mut out = Vec::new();
        let mut pc = vec![0u32; own.len()];
        let mut used = vec![0u32; self.k];
        loop {
            if get_bit(self.g[root].row(encode(&pc, self.radix), 0), 0) {
                out.push(pc.clone());
            }
            if !next_point(&mut pc, own, &mut used, self.units()) {
                break;
            }
        }
        out
    }

    pub fn is_feasible(&self) -> bool {
        !self.feasible_roots().is_empty()
    }

    /// Split of `w - b` between the children: the smallest `w^R` (over the
    /// right child's shared types) such that the remainder is reachable on
    /// the left. `None` when the entry is not in `F`.
    pub fn witness(
        &self,
        node: StrategyId,
        pc: &[u32],
        pr: &[u32],
        pl: &[u32],
        v: &[usize],
        w: &[u32],
    ) -> Option<(Vec<u32>, Vec<u32>)> {
        if !self.f_entry(node, pc, pr, pl, v, w) {
            return None;
        }
        let lay = &self.layouts[node];
        let vi = self.value_index(v)?;
        let mut rest: Vec<i64> = w.iter().map(|&x| i64::from(x)).collect();
        for (i, &p) in lay.own_pos.iter().enumerate() {
            rest[p] -= i64::from(pc[i]);
        }
        let child_row = |x: StrategyId, px: &[u32]| {
            let key = encode(pc, self.radix) * pow(self.radix, px.len()) as usize + encode(px, self.radix);
            self.g[x].row(key, self.layouts[x].parent_v_to_sh[vi])
        };
        let Some(r) = self.tree.right(node) else {
            return rest.iter().all(|&x| x == 0).then(|| (Vec::new(), Vec::new()));
        };
        let rl = &self.layouts[r];
        let mut dr = vec![0usize; rl.sh.len()];
        for ir in set_bits(child_row(r, pr)) {
            decode(ir, self.radix, &mut dr);
            let mut left_rest = rest.clone();
            for (i, &p) in rl.sh_in_parent.iter().enumerate() {
                left_rest[p] -= dr[i] as i64;
            }
            if left_rest.iter().any(|&x| x < 0) {
                continue;
            }
            let wr: Vec<u32> = dr.iter().map(|&x| x as u32).collect();
            match self.tree.left(node) {
                None => {
                    if left_rest.iter().all(|&x| x == 0) {
                        return Some((wr, Vec::new()));
                    }
                }
                Some(l) => {
                    let ll = &self.layouts[l];
                    let covered = (0..left_rest.len()).all(|p| left_rest[p] == 0 || ll.sh_in_parent.contains(&p));
                    if !covered {
                        continue;
                    }
                    let wl: Vec<u32> = ll.sh_in_parent.iter().map(|&p| left_rest[p] as u32).collect();
                    if wl.iter().any(|&x| x > self.units()) {
                        continue;
                    }
                    if get_bit(child_row(l, pl), encode(&wl, self.radix)) {
                        return Some((wr, wl));
                    }
                }
            }
        }
        None
    }

    /// Top-down pass from the lexicographically smallest feasible root
    /// entry. Each node picks its target values for entering types and its
    /// children's probabilities (smallest first, windows re-checked), then
    /// splits its mass between the children with [`Self::witness`].
    pub fn reconstruct(&self) -> Result<Reconstruction> {
        let root = self.tree.root();
        let pc = self.feasible_roots().into_iter().next().ok_or(Error::NoFeasibleRootEntry)?;
        let nv = self.grid.values().len();
        let values = self.grid.values();
        let mut assigned = vec![0u32; self.tree.len() * self.k];
        let mut chosen_v = vec![None; self.k];
        // (node, parent probabilities, node probabilities, shared values, shared masses)
        let mut stack = vec![(root, Vec::new(), pc, Vec::new(), Vec::new())];
        while let Some((c, pp, pc, v_sh, w_sh)) = stack.pop() {
            let lay = &self.layouts[c];
            self.place(&mut assigned, Some(c), &pc);
            let ch_types = self.child_types(c);
            let r_len = self.tree.right(c).map_or(0, |x| self.layouts[x].own.len());
            let mut v_reg = vec![0usize; lay.reg.len()];
            let mut w_reg = vec![self.units(); lay.reg.len()];
            for (i, &p) in lay.sh_pos.iter().enumerate() {
                v_reg[p] = v_sh[i];
                w_reg[p] = w_sh[i];
            }
            let mut ent_digits = vec![0usize; lay.ent_pos.len()];
            let mut found = None;
            'search: for ve in 0..pow(nv, lay.ent_pos.len()) as usize {
                decode(ve, nv, &mut ent_digits);
                for (i, &p) in lay.ent_pos.iter().enumerate() {
                    v_reg[p] = ent_digits[i];
                }
                let mut used = vec![0u32; self.k];
                for (i, &t) in self.parent_own(c).iter().enumerate() {
                    used[t] += pp[i];
                }
                for (i, &t) in lay.own.iter().enumerate() {
                    used[t] += pc[i];
                }
                if used.iter().any(|&u| u > self.units()) {
                    break;
                }
                let mut ch = vec![0u32; ch_types.len()];
                loop {
                    let (pr, pl) = ch.split_at(r_len);
                    if self.window_at(c, &pp, &pc, pr, pl, &v_reg) {
                        if let Some(split) = self.witness(c, &pc, pr, pl, &v_reg, &w_reg) {
                            found = Some((pr.to_vec(), pl.to_vec(), split));
                            break 'search;
                        }
                    }
                    if !next_point(&mut ch, &ch_types, &mut used, self.units()) {
                        break;
                    }
                }
            }
            let (pr, pl, (wr, wl)) = found.ok_or(Error::NoFeasibleRootEntry)?;
            for &p in &lay.ent_pos {
                chosen_v[lay.reg[p]] = Some(v_reg[p]);
            }
            if let Some(l) = self.tree.left(c) {
                let vl = self.layouts[l].sh_in_parent.iter().map(|&p| v_reg[p]).collect();
                stack.push((l, pc.clone(), pl, vl, wl));
            }
            if let Some(r) = self.tree.right(c) {
                let vr = self.layouts[r].sh_in_parent.iter().map(|&p| v_reg[p]).collect();
                stack.push((r, pc.clone(), pr, vr, wr));
            }
        }
        let mut units = Vec::with_capacity(self.k);
        for (j, t) in self.game.types().iter().enumerate() {
            let u: Vec<u32> = t.strategies.iter().map(|&s| assigned[s * self.k + j]).collect();
            if u.iter().sum::<u32>() != self.units() {
                return Err(Error::NoFeasibleRootEntry);
            }
            units.push(u);
        }
        let values = chosen_v.iter().map(|v| v.map_or(0.0, |i| values[i])).collect();
        Ok(Reconstruction { units, values })
    }
}
