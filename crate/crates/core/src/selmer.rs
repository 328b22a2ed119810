//! Local conditions on group cochains, the cone Selmer complex and the
//! chain-level duality pairing between H^1 and the dual H^2.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cochains::{
    cochain_complex, conjugate, cup, dualize, mu_module, reduce_cochain, restrict, restriction_matrix, CochainComplex,
    FiniteGroup, GModule, Pairing,
};
use crate::complex::{cone, induced_map, check_exact, ExactnessSpot, ModChainMap, ModComplex, ModSpace};
use crate::error::{Error, Result};
use crate::linalg::{kernel, solve, unit_vec, GroupMap, Subquotient, Submodule, ZMat};
use crate::zmod::Zmod;

/// A chain-level local condition: spanning cochains of the condition
/// subcomplex per degree, and cocycles spanning the declared subgroup of
/// each cohomology group.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionLift {
    pub spans: Vec<Vec<Vec<u64>>>,
    pub declared: Vec<Vec<Vec<u64>>>,
}

impl ConditionLift {
    /// C_𝓛 = 0 and 𝓛 = 0.
    pub fn zero() -> Self {
        ConditionLift::default()
    }

    /// C_𝓛 = C and 𝓛 = H in every degree.
    pub fn full(local: &CochainComplex) -> Self {
        let mut spans = Vec::new();
        let mut declared = Vec::new();
        for i in 0..=local.top {
            let dim = local.dim(i);
            spans.push((0..dim).map(|k| unit_vec(dim, k)).collect());
            declared.push(if i < local.top { local.cocycles(i).gens() } else { Vec::new() });
        }
        ConditionLift { spans, declared }
    }

    pub fn span(&self, i: usize) -> &[Vec<u64>] {
        self.spans.get(i).map_or(&[], |s| s.as_slice())
    }

    pub fn declared(&self, i: usize) -> &[Vec<u64>] {
        self.declared.get(i).map_or(&[], |s| s.as_slice())
    }
}

/// A place: local group, its map to the global group, conditions for M
/// and (optionally) M*, and an optional invariant functional on
/// C^2(G_v, μ) given as a row vector.
#[derive(Clone, Debug)]
pub struct Place {
    pub label: String,
    pub group: FiniteGroup,
    pub iota: Vec<usize>,
    pub lift: ConditionLift,
    pub dual_lift: Option<ConditionLift>,
    pub inv: Option<Vec<u64>>,
}

/// Global group and module, cochain degree cap, and places.
#[derive(Clone, Debug)]
pub struct SelmerData {
    pub group: FiniteGroup,
    pub module: GModule,
    pub maxdeg: usize,
    pub places: Vec<Place>,
}

/// Cochain complexes attached to one place.
#[derive(Clone, Debug)]
pub struct LocalComplexes {
    pub module: GModule,
    pub dual: GModule,
    pub mu: GModule,
    pub m: CochainComplex,
    pub d: CochainComplex,
    pub mu_c: CochainComplex,
}

/// Everything derived from a `SelmerData` that does not depend on the
/// choice of conditions.
#[derive(Clone, Debug)]
pub struct SelmerContext {
    pub data: SelmerData,
    pub dual: GModule,
    pub eval: Pairing,
    pub mu: GModule,
    pub global_m: CochainComplex,
    pub global_d: CochainComplex,
    pub global_mu: CochainComplex,
    pub locals: Vec<LocalComplexes>,
}

impl SelmerContext {
    pub fn new(data: SelmerData, budget: u128) -> Result<Self> {
        let top = data.maxdeg;
        if top == 0 {
            return Err(Error::DegreeRange("maxdeg must be at least 1".into()));
        }
        let g = &data.group;
        let (dual, eval, mu) = dualize(g, &data.module)?;
        let global_m = cochain_complex(g, &data.module, top, budget)?;
        let global_d = cochain_complex(g, &dual, top, budget)?;
        let global_mu = cochain_complex(g, &mu, top, budget)?;
        let zm = data.module.zm();
        let mut locals = Vec::new();
        for place in &data.places {
            place.group.check_hom(g, &place.iota)?;
            let module = data.module.restrict(&place.group, &place.iota)?;
            let dual_v = dual.restrict(&place.group, &place.iota)?;
            let mu_v = mu_module(&place.group, zm.p(), zm.n())?;
            let m = cochain_complex(&place.group, &module, top, budget)?;
            let d = cochain_complex(&place.group, &dual_v, top, budget)?;
            let mu_c = cochain_complex(&place.group, &mu_v, top, budget)?;
            check_lift_shape(&place.label, &place.lift, &m)?;
            if let Some(l) = &place.dual_lift {
                check_lift_shape(&place.label, l, &d)?;
            }
            if let Some(f) = &place.inv {
                if f.len() != mu_c.dim(2) {
                    return Err(Error::Shape(format!("place {}: invariant functional has wrong length", place.label)));
                }
                let d1 = mu_c.d(1);
                for j in 0..d1.cols() {
                    if dot(zm, f, &d1.col(j)) != 0 {
                        return Err(Error::Axiom(format!(
                            "place {}: invariant functional does not vanish on coboundaries",
                            place.label
                        )));
                    }
                }
            }
            locals.push(LocalComplexes { module, dual: dual_v, mu: mu_v, m, d, mu_c });
        }
        Ok(SelmerContext { data, dual, eval, mu, global_m, global_d, global_mu, locals })
    }

    pub fn zm(&self) -> Zmod {
        self.data.module.zm()
    }

    pub fn top(&self) -> usize {
        self.data.maxdeg
    }

    /// Axioms (i)–(iii) for the lift at place `k` (or its dual lift), and
    /// (iv) when both lifts are present.
    pub fn check_axioms(&self, k: usize) -> AxiomReport {
        let place = &self.data.places[k];
        let loc = &self.locals[k];
        let mut report = AxiomReport { place: place.label.clone(), ..Default::default() };
        let primary = check_single(&place.group, &loc.m, &place.lift);
        report.absorb("lift", primary);
        if let Some(dl) = &place.dual_lift {
            let dual = check_single(&place.group, &loc.d, dl);
            report.absorb("dual lift", dual);
            let mut ok = true;
            let top = self.top();
            for i in 0..=3usize.min(top) {
                let j = 3 - i;
                if j > top {
                    continue;
                }
                for a in place.lift.span(i) {
                    for b in dl.span(j) {
                        let c = cup(&place.group, &loc.module, a, i, &loc.dual, b, j, &self.eval, &loc.mu);
                        if c.iter().any(|&x| x != 0) {
                            ok = false;
                        }
                    }
                }
                if !ok {
                    report.failures.push(format!("cup of degree {} and {} conditions is nonzero", i, j));
                    break;
                }
            }
            report.cup_vanishes = Some(ok);
        }
        report
    }

    /// Cone Selmer complex for M (or M* with the dual lifts).
    pub fn selmer_complex(&self, dual: bool) -> Result<SelmerComplex> {
        let zm = self.zm();
        let top = self.top();
        let global = if dual { &self.global_d } else { &self.global_m };
        let mut quotients = Vec::new();
        for (place, loc) in self.data.places.iter().zip(&self.locals) {
            let (cc, lift) = if dual {
                let l = place
                    .dual_lift
                    .as_ref()
                    .ok_or_else(|| Error::Invalid(format!("place {} has no dual lift", place.label)))?;
                (&loc.d, l)
            } else {
                (&loc.m, &place.lift)
            };
            quotients.push(quotient_complex(cc, lift).map_err(|_| {
                Error::Axiom(format!("place {}: condition is not closed under the differential", place.label))
            })?);
        }
        let quotient = if quotients.is_empty() {
            ModComplex::zero(zm)
        } else {
            let refs: Vec<&ModComplex> = quotients.iter().collect();
            ModComplex::direct_sum(&refs)?
        };
        let mut maps = BTreeMap::new();
        let r = global.module.rank();
        for i in 0..=top {
            let mut rows = 0;
            let mut blocks = Vec::new();
            for place in &self.data.places {
                let b = restriction_matrix(&place.group, &place.iota, &self.data.group, i, zm, r);
                rows += b.rows();
                blocks.push(b);
            }
            let mut m = ZMat::zeros(zm, rows, global.dim(i));
            let mut off = 0;
            for b in &blocks {
                m.set_block(off, 0, b);
                off += b.rows();
            }
            maps.insert(-(i as i64), m);
        }
        let res = ModChainMap { maps };
        res.validate(&global.complex, &quotient)?;
        let cone_c = cone(&res, &global.complex, &quotient)?;
        let local_dims = (0..=top)
            .map(|i| self.data.places.iter().map(|p| p.group.tuple_count(i) * r).collect())
            .collect();
        Ok(SelmerComplex { global: global.complex.clone(), quotient, res, cone: cone_c, top, global_dims: (0..=top).map(|i| global.dim(i)).collect(), local_dims })
    }
}

fn check_lift_shape(label: &str, lift: &ConditionLift, cc: &CochainComplex) -> Result<()> {
    for (i, s) in lift.spans.iter().enumerate() {
        if i > cc.top && !s.is_empty() {
            return Err(Error::DegreeRange(format!("place {}: condition given above maxdeg", label)));
        }
        if s.iter().any(|v| v.len() != cc.dim(i)) {
            return Err(Error::Shape(format!("place {}: condition cochain of degree {} has wrong length", label, i)));
        }
    }
    for (i, s) in lift.declared.iter().enumerate() {
        if s.iter().any(|v| v.len() != cc.dim(i)) {
            return Err(Error::Shape(format!("place {}: declared class of degree {} has wrong length", label, i)));
        }
    }
    Ok(())
}

fn dot(zm: Zmod, f: &[u64], x: &[u64]) -> u64 {
    f.iter().zip(x).fold(0, |acc, (&a, &b)| zm.mul_add(acc, a, b))
}

/// C_v / C_{𝓛,v} as a complex in homological indexing (cochain degree i at -i).
pub fn quotient_complex(cc: &CochainComplex, lift: &ConditionLift) -> Result<ModComplex> {
    let zm = cc.module.zm();
    let mut terms = Vec::new();
    let mut diffs = Vec::new();
    for i in (0..=cc.top).rev() {
        let t = cc.complex.term(-(i as i64));
        terms.push(ModSpace { dim: t.dim, caps: t.caps.clone(), rel: lift.span(i).to_vec() });
        diffs.push(cc.complex.d(-(i as i64)));
    }
    ModComplex::new(zm, -(cc.top as i64), terms, diffs)
}

/// Order (log_p) of the subgroup of ⊕ Z/p^{e_k} generated by `gens`.
pub fn subgroup_order_log(zm: Zmod, exps: &[u32], gens: &[Vec<u64>]) -> u64 {
    let rel = Submodule::from_caps(zm, exps);
    let all = rel.with_gens(gens.iter().cloned());
    all.order_log() - rel.order_log()
}

/// Outcome of the axiom checks at one place.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub place: String,
    pub closed_under_d: bool,
    pub conjugation_invariant: bool,
    pub quotient_cohomology: Vec<bool>,
    pub dual_closed_under_d: Option<bool>,
    pub dual_conjugation_invariant: Option<bool>,
    pub dual_quotient_cohomology: Option<Vec<bool>>,
    pub cup_vanishes: Option<bool>,
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, which: &str, s: SingleCheck) {
        for f in &s.failures {
            self.failures.push(format!("{}: {}", which, f));
        }
        if which == "lift" {
            self.closed_under_d = s.closed;
            self.conjugation_invariant = s.conj;
            self.quotient_cohomology = s.quotient;
        } else {
            self.dual_closed_under_d = Some(s.closed);
            self.dual_conjugation_invariant = Some(s.conj);
            self.dual_quotient_cohomology = Some(s.quotient);
        }
    }
}

struct SingleCheck {
    closed: bool,
    conj: bool,
    quotient: Vec<bool>,
    failures: Vec<String>,
}

fn check_single(group: &FiniteGroup, cc: &CochainComplex, lift: &ConditionLift) -> SingleCheck {
    let zm = cc.module.zm();
    let top = cc.top;
    let mut failures = Vec::new();
    let subs: Vec<Submodule> = (0..=top)
        .map(|i| {
            let t = cc.complex.term(-(i as i64));
            Submodule::from_caps(zm, &t.caps).with_gens(lift.span(i).iter().cloned())
        })
        .collect();
    let full: Vec<bool> = (0..=top)
        .map(|i| {
            let caps = cc.complex.term(-(i as i64)).caps;
            subs[i].order_log() == caps.iter().map(|&c| c as u64).sum::<u64>() + Submodule::from_caps(zm, &caps).order_log()
        })
        .collect();
    // (i)
    let mut closed = true;
    for i in 0..top {
        if full[i + 1] {
            continue;
        }
        let d = cc.d(i);
        if lift.span(i).iter().any(|s| !subs[i + 1].contains(&d.apply(s))) {
            closed = false;
            failures.push(format!("(i) differential leaves the condition in degree {}", i));
        }
    }
    // (ii)
    let mut conj = true;
    'outer: for i in 0..=top {
        if full[i] {
            continue;
        }
        for s in lift.span(i) {
            for g in 0..group.order() {
                if !subs[i].contains(&conjugate(group, &cc.module, g, s, i)) {
                    conj = false;
                    failures.push(format!("(ii) conjugation by element {} leaves the condition in degree {}", g, i));
                    break 'outer;
                }
            }
        }
    }
    // (iii)
    let mut quotient = Vec::new();
    if closed {
        match quotient_complex(cc, lift) {
            Ok(q) => {
                for i in 0..top {
                    let ok = check_quotient_degree(cc, &q, lift, i);
                    if let Err(msg) = &ok {
                        failures.push(format!("(iii) degree {}: {}", i, msg));
                    }
                    quotient.push(ok.is_ok());
                }
            }
            Err(e) => failures.push(format!("(iii) quotient complex invalid: {}", e)),
        }
    } else {
        failures.push("(iii) skipped because (i) fails".into());
    }
    SingleCheck { closed, conj, quotient, failures }
}

fn check_quotient_degree(cc: &CochainComplex, q: &ModComplex, lift: &ConditionLift, i: usize) -> std::result::Result<(), String> {
    let zm = cc.module.zm();
    let h = cc.cohomology(i);
    let hq = q.homology(-(i as i64));
    let id = ZMat::identity(zm, cc.dim(i));
    let map = induced_map(&id, &h, &hq).map_err(|e| e.to_string())?;
    let mut coords = Vec::new();
    for c in lift.declared(i) {
        let x = h.coords(c).ok_or_else(|| "declared class is not a cocycle".to_string())?;
        if !hq.is_trivial_class(c) {
            return Err("declared class survives in the quotient".into());
        }
        coords.push(x);
    }
    if map.image_order_log(zm) != hq.order_log() {
        return Err("H → H(C/C_𝓛) is not surjective".into());
    }
    let declared_log = subgroup_order_log(zm, &h.exponents(), &coords);
    if map.kernel_order_log(zm) != declared_log {
        return Err(format!(
            "kernel has order p^{} but the declared subgroup has order p^{}",
            map.kernel_order_log(zm),
            declared_log
        ));
    }
    Ok(())
}

/// The cone of restriction C(G, M) → ⊕_v C_v/C_{𝓛,v}. Cohomological
/// degree n sits at homological degree 1 - n with term
/// C^n(G, M) ⊕ ⊕_v C^{n-1}(G_v, M_v).
#[derive(Clone, Debug)]
pub struct SelmerComplex {
    pub global: ModComplex,
    pub quotient: ModComplex,
    pub res: ModChainMap,
    pub cone: ModComplex,
    pub top: usize,
    global_dims: Vec<usize>,
    local_dims: Vec<Vec<usize>>,
}

/// A cone cochain split into its global part and per-place parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeCochain {
    pub x: Vec<u64>,
    pub y: Vec<Vec<u64>>,
}

impl SelmerComplex {
    /// H^n_𝓛 for 0 ≤ n < top.
    pub fn cohomology(&self, n: usize) -> Subquotient {
        self.cone.homology(1 - n as i64)
    }

    pub fn split(&self, n: usize, v: &[u64]) -> ConeCochain {
        let gd = self.global_dims[n];
        let x = v[..gd].to_vec();
        let mut y = Vec::new();
        let mut off = gd;
        if n >= 1 {
            for &d in &self.local_dims[n - 1] {
                y.push(v[off..off + d].to_vec());
                off += d;
            }
        } else {
            y = self.local_dims[0].iter().map(|_| Vec::new()).collect();
        }
        ConeCochain { x, y }
    }

    pub fn join(&self, c: &ConeCochain) -> Vec<u64> {
        let mut v = c.x.clone();
        for y in &c.y {
            v.extend_from_slice(y);
        }
        v
    }

    /// Exactness of
    /// H^{n-1}(G) → H^{n-1}(Q) → H^n_𝓛 → H^n(G) → H^n(Q) → …
    /// at every spot whose groups are all in the valid range n < top.
    pub fn les(&self) -> Result<Vec<ExactnessSpot>> {
        let zm = self.cone.zm();
        let a = &self.global;
        let b = &self.quotient;
        let c = &self.cone;
        let top = self.top as i64;
        let mut seq: Vec<(String, GroupMap)> = Vec::new();
        let mut ha_cache: BTreeMap<i64, Subquotient> = BTreeMap::new();
        let mut hom_a = |h: i64| ha_cache.entry(h).or_insert_with(|| a.homology(h)).clone();
        // homological h runs from 1 (H^0_𝓛) down to 2 - top (H^{top-1}_𝓛)
        for h in ((2 - top)..=1).rev() {
            let ha = hom_a(h);
            let hb = b.homology(h);
            let hc = c.homology(h);
            let ha1 = hom_a(h - 1);
            let fa = induced_map(&self.res.at(h, a, b), &ha, &hb)?;
            let mut inc = ZMat::zeros(zm, a.dim(h - 1) + b.dim(h), b.dim(h));
            inc.set_block(a.dim(h - 1), 0, &ZMat::identity(zm, b.dim(h)));
            let ib = induced_map(&inc, &hb, &hc)?;
            let mut proj = ZMat::zeros(zm, a.dim(h - 1), a.dim(h - 1) + b.dim(h));
            proj.set_block(0, 0, &ZMat::identity(zm, a.dim(h - 1)));
            let conn = induced_map(&proj, &hc, &ha1)?;
            let n = 1 - h;
            seq.push((format!("H^{}(G)", n - 1), fa));
            seq.push((format!("H^{}(Q)", n - 1), ib));
            seq.push((format!("H^{}_L", n), conn));
        }
        // close the window at H^{top-1}(G) → H^{top-1}(Q)
        let h = 1 - top;
        let ha = hom_a(h);
        let hb = b.homology(h);
        seq.push((format!("H^{}(G)", top - 1), induced_map(&self.res.at(h, a, b), &ha, &hb)?));
        Ok(check_exact(zm, &seq))
    }
}

/// Functionals φ_v on C^2(G_v, μ), one per place, vanishing on local
/// coboundaries and with Σ_v φ_v ∘ res_v = 0 on global 2-cocycles: a
/// seeded random element of that solution space.
pub fn reciprocity_functionals<R: Rng + ?Sized>(
    group: &FiniteGroup,
    places: &[(FiniteGroup, Vec<usize>)],
    p: u64,
    level: u32,
    rng: &mut R,
    budget: u128,
) -> Result<Vec<Vec<u64>>> {
    let zm = Zmod::new(p, level)?;
    let mu = mu_module(group, p, level)?;
    let global = cochain_complex(group, &mu, 3, budget)?;
    let z2 = global.cocycles(2).gens();
    let dims: Vec<usize> = places.iter().map(|(g, _)| g.tuple_count(2)).collect();
    let total: usize = dims.iter().sum();
    let mut cols: Vec<Vec<u64>> = Vec::new();
    let mut off = 0;
    for ((g, iota), &d) in places.iter().zip(&dims) {
        g.check_hom(group, iota)?;
        let mu_v = mu_module(g, p, level)?;
        let local = cochain_complex(g, &mu_v, 2, budget)?;
        let d1 = local.d(1);
        for j in 0..d1.cols() {
            let mut c = vec![0u64; total];
            c[off..off + d].copy_from_slice(&d1.col(j));
            cols.push(c);
        }
        off += d;
    }
    for w in &z2 {
        let mut c = vec![0u64; total];
        let mut off = 0;
        for ((g, iota), &d) in places.iter().zip(&dims) {
            c[off..off + d].copy_from_slice(&restrict(g, iota, group, w, 2, 1));
            off += d;
        }
        cols.push(c);
    }
    let constraints = ZMat::from_rows(zm, total, &cols);
    let basis = kernel(&constraints);
    let mut f = vec![0u64; total];
    for b in &basis {
        let c = rng.gen_range(0..zm.modulus());
        for (x, &y) in f.iter_mut().zip(b) {
            *x = zm.mul_add(*x, c, y);
        }
    }
    let mut out = Vec::new();
    let mut off = 0;
    for &d in &dims {
        out.push(f[off..off + d].to_vec());
        off += d;
    }
    Ok(out)
}

/// A functional on C^2(G_v, μ) vanishing on coboundaries that reads off the
/// `component`-th cyclic summand of H^2(G_v, μ), scaled into Z/p^N.
pub fn local_invariant(group: &FiniteGroup, p: u64, level: u32, component: usize, budget: u128) -> Result<Vec<u64>> {
    let zm = Zmod::new(p, level)?;
    let mu = mu_module(group, p, level)?;
    let c = cochain_complex(group, &mu, 3, budget)?;
    let h2 = c.cohomology(2);
    let exps = h2.exponents();
    if component >= exps.len() {
        return Err(Error::Invalid(format!("H^2 has only {} cyclic summands", exps.len())));
    }
    let scale = zm.p_pow(level - exps[component]);
    let z = c.cocycles(2);
    let gens = z.gens();
    let mut b = c.d(1);
    let mut targets = vec![0u64; b.cols()];
    let zmat = ZMat::from_cols(zm, c.dim(2), &gens);
    b = b.hstack(&zmat);
    for g in &gens {
        let v = h2.coords(g).expect("cocycle")[component];
        targets.push(zm.mul(v, scale));
    }
    solve(&b.transpose(), &targets).ok_or_else(|| Error::NoSolution("functional does not extend".into()))
}

/// Unramified-type lift from spanning cocycles of l ⊆ H^1 and its dual lift
/// built from l^⊥ under (a, b) ↦ φ(a ∪ b).
pub fn example_unramified_lift(
    group: &FiniteGroup,
    module: &GModule,
    top: usize,
    l: &[Vec<u64>],
    inv: Option<&[u64]>,
    budget: u128,
) -> Result<(ConditionLift, ConditionLift)> {
    let inv = inv.ok_or_else(|| Error::Invalid("no pairing available to form the orthogonal complement".into()))?;
    if top < 2 {
        return Err(Error::DegreeRange("unramified lift needs maxdeg ≥ 2".into()));
    }
    let zm = module.zm();
    let (dual, eval, mu) = dualize(group, module)?;
    let cm = cochain_complex(group, module, top, budget)?;
    let cd = cochain_complex(group, &dual, top, budget)?;
    for a in l {
        if a.len() != cm.dim(1) || !cm.is_cocycle(1, a) {
            return Err(Error::Invalid("spanning element of l is not a 1-cocycle".into()));
        }
    }
    let build = |cc: &CochainComplex, classes: Vec<Vec<u64>>| {
        let r = cc.module.rank();
        let mut spans = vec![(0..r).map(|k| unit_vec(r, k)).collect::<Vec<_>>()];
        let d0 = cc.d(0);
        let mut s1: Vec<Vec<u64>> = (0..d0.cols()).map(|j| d0.col(j)).filter(|c| c.iter().any(|&x| x != 0)).collect();
        s1.extend(classes.iter().cloned());
        spans.push(s1);
        let declared = vec![cc.cocycles(0).gens(), classes];
        ConditionLift { spans, declared }
    };
    let z1 = cd.cocycles(1).gens();
    let mut w = ZMat::zeros(zm, l.len(), z1.len());
    for (k, a) in l.iter().enumerate() {
        for (j, b) in z1.iter().enumerate() {
            let c = cup(group, module, a, 1, &dual, b, 1, &eval, &mu);
            w.set(k, j, dot(zm, inv, &c));
        }
    }
    let perp: Vec<Vec<u64>> = if l.is_empty() {
        z1.clone()
    } else {
        kernel(&w)
            .into_iter()
            .map(|c| {
                let mut v = vec![0u64; cd.dim(1)];
                for (cj, b) in c.iter().zip(&z1) {
                    for (o, &x) in v.iter_mut().zip(b) {
                        *o = zm.mul_add(*o, *cj, x);
                    }
                }
                reduce_cochain(&dual, &mut v);
                v
            })
            .filter(|v| v.iter().any(|&x| x != 0))
            .collect()
    };
    Ok((build(&cm, l.to_vec()), build(&cd, perp)))
}

/// The chain-level pairing H^1_𝓛(M) × H^2_{𝓛⊥}(M*) → Z/p^N.
#[derive(Clone, Debug)]
pub struct DualityPairing<'a> {
    pub ctx: &'a SelmerContext,
    pub sel: SelmerComplex,
    pub sel_dual: SelmerComplex,
    pub inv: Vec<Vec<u64>>,
}

impl<'a> DualityPairing<'a> {
    pub fn new(ctx: &'a SelmerContext) -> Result<Self> {
        if ctx.top() < 3 {
            return Err(Error::DegreeRange("the pairing needs cochains up to degree 3".into()));
        }
        let mut inv = Vec::new();
        for (k, place) in ctx.data.places.iter().enumerate() {
            let f = place
                .inv
                .clone()
                .ok_or_else(|| Error::Invalid(format!("place {} has no invariant functional", place.label)))?;
            let report = ctx.check_axioms(k);
            if report.cup_vanishes != Some(true) {
                return Err(Error::Axiom(format!("place {}: cup of conditions does not vanish", place.label)));
            }
            inv.push(f);
        }
        let sel = ctx.selmer_complex(false)?;
        let sel_dual = ctx.selmer_complex(true)?;
        Ok(DualityPairing { ctx, sel, sel_dual, inv })
    }

    fn zm(&self) -> Zmod {
        self.ctx.zm()
    }

    /// Representatives of the generators of H^1_𝓛 and H^2_{𝓛⊥}.
    pub fn generators(&self) -> (Subquotient, Subquotient) {
        (self.sel.cohomology(1), self.sel_dual.cohomology(2))
    }

    /// ε_v = d y_v + x_v for a degree-1 cone cocycle of M.
    pub fn epsilon(&self, xi: &ConeCochain) -> Vec<Vec<u64>> {
        let ctx = self.ctx;
        let r = ctx.data.module.rank();
        ctx.data
            .places
            .iter()
            .zip(&ctx.locals)
            .zip(&xi.y)
            .map(|((p, loc), y)| {
                let xv = restrict(&p.group, &p.iota, &ctx.data.group, &xi.x, 1, r);
                let mut e = loc.m.d(0).apply(y);
                for (a, b) in e.iter_mut().zip(&xv) {
                    *a = self.zm().add(*a, *b);
                }
                reduce_cochain(&loc.module, &mut e);
                e
            })
            .collect()
    }

    /// ε'_v = d y'_v + x'_v for a degree-2 cone cocycle of M*.
    pub fn epsilon_dual(&self, xi: &ConeCochain) -> Vec<Vec<u64>> {
        let ctx = self.ctx;
        let r = ctx.data.module.rank();
        ctx.data
            .places
            .iter()
            .zip(&ctx.locals)
            .zip(&xi.y)
            .map(|((p, loc), y)| {
                let xv = restrict(&p.group, &p.iota, &ctx.data.group, &xi.x, 2, r);
                let mut e = loc.d.d(1).apply(y);
                for (a, b) in e.iter_mut().zip(&xv) {
                    *a = self.zm().add(*a, *b);
                }
                reduce_cochain(&loc.dual, &mut e);
                e
            })
            .collect()
    }

    /// x ∪ x' in C^3(G, μ).
    pub fn global_cup(&self, x: &[u64], xd: &[u64]) -> Vec<u64> {
        let ctx = self.ctx;
        cup(&ctx.data.group, &ctx.data.module, x, 1, &ctx.dual, xd, 2, &ctx.eval, &ctx.mu)
    }

    /// Some z ∈ C^2(G, μ) with dz = x ∪ x'.
    pub fn solve_z(&self, x: &[u64], xd: &[u64]) -> Result<Vec<u64>> {
        let rhs = self.global_cup(x, xd);
        solve(&self.ctx.global_mu.d(2), &rhs)
            .ok_or_else(|| Error::NoSolution("x ∪ x' is not a coboundary in the global model".into()))
    }

    /// Local 2-cochains y_v ∪ x'_v − ε_v ∪ y'_v + z_v.
    pub fn local_cochains(&self, xi: &ConeCochain, xd: &ConeCochain, z: &[u64]) -> Vec<Vec<u64>> {
        let ctx = self.ctx;
        let zm = self.zm();
        let r = ctx.data.module.rank();
        let eps = self.epsilon(xi);
        let mut out = Vec::new();
        for (k, (p, loc)) in ctx.data.places.iter().zip(&ctx.locals).enumerate() {
            let g = &p.group;
            let xdv = restrict(g, &p.iota, &ctx.data.group, &xd.x, 2, r);
            let zv = restrict(g, &p.iota, &ctx.data.group, z, 2, 1);
            let a = cup(g, &loc.module, &xi.y[k], 0, &loc.dual, &xdv, 2, &ctx.eval, &loc.mu);
            let b = cup(g, &loc.module, &eps[k], 1, &loc.dual, &xd.y[k], 1, &ctx.eval, &loc.mu);
            out.push(
                a.iter()
                    .zip(&b)
                    .zip(&zv)
                    .map(|((&a, &b), &z)| zm.add(zm.sub(a, b), z))
                    .collect(),
            );
        }
        out
    }

    /// Local 2-cochains −x_v ∪ y'_v + y_v ∪ ε'_v + z_v.
    pub fn symmetric_local_cochains(&self, xi: &ConeCochain, xd: &ConeCochain, z: &[u64]) -> Vec<Vec<u64>> {
        let ctx = self.ctx;
        let zm = self.zm();
        let r = ctx.data.module.rank();
        let epsd = self.epsilon_dual(xd);
        let mut out = Vec::new();
        for (k, (p, loc)) in ctx.data.places.iter().zip(&ctx.locals).enumerate() {
            let g = &p.group;
            let xv = restrict(g, &p.iota, &ctx.data.group, &xi.x, 1, r);
            let zv = restrict(g, &p.iota, &ctx.data.group, z, 2, 1);
            let a = cup(g, &loc.module, &xv, 1, &loc.dual, &xd.y[k], 1, &ctx.eval, &loc.mu);
            let b = cup(g, &loc.module, &xi.y[k], 0, &loc.dual, &epsd[k], 2, &ctx.eval, &loc.mu);
            out.push(
                a.iter()
                    .zip(&b)
                    .zip(&zv)
                    .map(|((&a, &b), &z)| zm.add(zm.sub(b, a), z))
                    .collect(),
            );
        }
        out
    }

    fn sum_invariants(&self, locals: &[Vec<u64>]) -> u64 {
        let zm = self.zm();
        locals.iter().zip(&self.inv).fold(0, |acc, (c, f)| zm.add(acc, dot(zm, f, c)))
    }

    pub fn value_with(&self, xi: &ConeCochain, xd: &ConeCochain, z: &[u64]) -> u64 {
        self.sum_invariants(&self.local_cochains(xi, xd, z))
    }

    pub fn symmetric_value_with(&self, xi: &ConeCochain, xd: &ConeCochain, z: &[u64]) -> u64 {
        self.sum_invariants(&self.symmetric_local_cochains(xi, xd, z))
    }

    /// The pairing value, solving for z.
    pub fn value(&self, xi: &ConeCochain, xd: &ConeCochain) -> Result<u64> {
        let z = self.solve_z(&xi.x, &xd.x)?;
        Ok(self.value_with(xi, xd, &z))
    }

    /// Checks d(local cochain) = ε_v ∪ ε'_v and that this vanishes.
    pub fn check_differential(&self, xi: &ConeCochain, xd: &ConeCochain, z: &[u64]) -> (bool, bool) {
        let ctx = self.ctx;
        let eps = self.epsilon(xi);
        let epsd = self.epsilon_dual(xd);
        let locals = self.local_cochains(xi, xd, z);
        let mut equal = true;
        let mut zero = true;
        for (k, (p, loc)) in ctx.data.places.iter().zip(&ctx.locals).enumerate() {
            let dp = loc.mu_c.d(2).apply(&locals[k]);
            let ee = cup(&p.group, &loc.module, &eps[k], 1, &loc.dual, &epsd[k], 2, &ctx.eval, &loc.mu);
            equal &= dp == ee;
            zero &= ee.iter().all(|&x| x == 0);
        }
        (equal, zero)
    }

    /// Pairing matrix on generator representatives; `None` where no z exists.
    pub fn matrix(&self) -> PairingMatrix {
        let (h1, h2) = self.generators();
        let mut values = Vec::new();
        for a in h1.reps() {
            let xi = self.sel.split(1, &a);
            let row = h2
                .reps()
                .iter()
                .map(|b| self.value(&xi, &self.sel_dual.split(2, b)).ok())
                .collect();
            values.push(row);
        }
        PairingMatrix { left: h1.exponents(), right: h2.exponents(), values }
    }
}

/// Values of the pairing on generator pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingMatrix {
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub values: Vec<Vec<Option<u64>>>,
}

impl PairingMatrix {
    pub fn complete(&self) -> bool {
        self.values.iter().all(|r| r.iter().all(|v| v.is_some()))
    }

    /// log_p of the left and right kernels (only when complete).
    pub fn kernels_log(&self, zm: Zmod) -> Option<(u64, u64)> {
        if !self.complete() {
            return None;
        }
        let n = zm.n();
        let left = GroupMap {
            source: self.left.clone(),
            target: vec![n; self.right.len()],
            columns: self.values.iter().map(|r| r.iter().map(|v| v.unwrap_or(0)).collect()).collect(),
        };
        let right = GroupMap {
            source: self.right.clone(),
            target: vec![n; self.left.len()],
            columns: (0..self.right.len())
                .map(|j| self.values.iter().map(|r| r[j].unwrap_or(0)).collect())
                .collect(),
        };
        Some((left.kernel_order_log(zm), right.kernel_order_log(zm)))
    }
}

/// Σ_v φ_v(α_v ∪ β_v) for α ∈ M^G satisfying the degree-0 conditions and
/// local 2-cocycles β_v of M*.
pub fn degree_zero_pairing(ctx: &SelmerContext, alpha: &[u64], beta: &[Vec<u64>]) -> Result<u64> {
    let zm = ctx.zm();
    if !ctx.global_m.is_cocycle(0, alpha) {
        return Err(Error::Invalid("α is not fixed by the group".into()));
    }
    if beta.len() != ctx.data.places.len() {
        return Err(Error::Shape("need one local class per place".into()));
    }
    let mut total = 0;
    for (k, (p, loc)) in ctx.data.places.iter().zip(&ctx.locals).enumerate() {
        let inv = p.inv.as_ref().ok_or_else(|| Error::Invalid(format!("place {} has no invariant functional", p.label)))?;
        let av = restrict(&p.group, &p.iota, &ctx.data.group, alpha, 0, ctx.data.module.rank());
        let allowed = Submodule::from_caps(zm, &loc.m.complex.term(0).caps).with_gens(p.lift.declared(0).iter().cloned());
        if !allowed.contains(&av) {
            return Err(Error::Axiom(format!("α violates the local condition at place {}", p.label)));
        }
        if beta[k].len() != loc.d.dim(2) || !loc.d.is_cocycle(2, &beta[k]) {
            return Err(Error::Invalid(format!("β at place {} is not a 2-cocycle", p.label)));
        }
        let c = cup(&p.group, &loc.module, &av, 0, &loc.dual, &beta[k], 2, &ctx.eval, &loc.mu);
        total = zm.add(total, dot(zm, inv, &c));
    }
    Ok(total)
}

/// Result of the pairing suite on one instance.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingSuiteReport {
    pub h1_exponents: Vec<u32>,
    pub h2_dual_exponents: Vec<u32>,
    pub les_exact: bool,
    pub les_dual_exact: bool,
    pub axioms_pass: bool,
    pub pairs_evaluated: usize,
    pub pairs_without_z: usize,
    pub differential_ok: bool,
    pub independence_ok: bool,
    pub symmetric_ok: bool,
    pub bilinear_ok: bool,
    pub failures: Vec<String>,
}

impl PairingSuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_vec<R: Rng + ?Sized>(zm: Zmod, len: usize, rng: &mut R) -> Vec<u64> {
    (0..len).map(|_| rng.gen_range(0..zm.modulus())).collect()
}

fn random_combo<R: Rng + ?Sized>(zm: Zmod, gens: &[Vec<u64>], len: usize, rng: &mut R) -> Vec<u64> {
    let mut v = vec![0u64; len];
    for g in gens {
        let c = rng.gen_range(0..zm.modulus());
        for (o, &x) in v.iter_mut().zip(g) {
            *o = zm.mul_add(*o, c, x);
        }
    }
    v
}

fn add_vec(zm: Zmod, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| zm.add(x, y)).collect()
}

fn sub_vec(zm: Zmod, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| zm.sub(x, y)).collect()
}

/// Runs the LES, differential, independence, symmetry and bilinearity
/// checks with `trials` random modifications per generator pair.
pub fn pairing_suite<R: Rng + ?Sized>(ctx: &SelmerContext, trials: usize, rng: &mut R) -> Result<PairingSuiteReport> {
    let zm = ctx.zm();
    let mut rep = PairingSuiteReport::default();
    rep.axioms_pass = (0..ctx.data.places.len()).all(|k| {
        let a = ctx.check_axioms(k);
        for f in &a.failures {
            rep.failures.push(format!("axioms at {}: {}", a.place, f));
        }
        a.passed()
    });
    let pairing = DualityPairing::new(ctx)?;
    let les = pairing.sel.les()?;
    let les_d = pairing.sel_dual.les()?;
    rep.les_exact = les.iter().all(|s| s.exact);
    rep.les_dual_exact = les_d.iter().all(|s| s.exact);
    for s in les.iter().chain(&les_d).filter(|s| !s.exact) {
        rep.failures.push(format!("LES not exact at {}", s.label));
    }
    let (h1, h2) = pairing.generators();
    rep.h1_exponents = h1.exponents();
    rep.h2_dual_exponents = h2.exponents();
    rep.differential_ok = true;
    rep.independence_ok = true;
    rep.symmetric_ok = true;
    rep.bilinear_ok = true;
    let g = &ctx.data.group;
    let r = ctx.data.module.rank();
    let z2_global = ctx.global_mu.cocycles(2).gens();
    let reps1 = h1.reps();
    let reps2 = h2.reps();
    let mut evaluated: Vec<(ConeCochain, ConeCochain, Vec<u64>, u64)> = Vec::new();
    for a in &reps1 {
        for b in &reps2 {
            let xi = pairing.sel.split(1, a);
            let xd = pairing.sel_dual.split(2, b);
            let z = match pairing.solve_z(&xi.x, &xd.x) {
                Ok(z) => z,
                Err(_) => {
                    rep.pairs_without_z += 1;
                    continue;
                }
            };
            rep.pairs_evaluated += 1;
            let base = pairing.value_with(&xi, &xd, &z);
            let (equal, zero) = pairing.check_differential(&xi, &xd, &z);
            if !(equal && zero) {
                rep.differential_ok = false;
                rep.failures.push("d of the pairing cochain differs from ε ∪ ε' or ε ∪ ε' ≠ 0".into());
            }
            if pairing.symmetric_value_with(&xi, &xd, &z) != base {
                rep.symmetric_ok = false;
                rep.failures.push("symmetric formula disagrees".into());
            }
            for _ in 0..trials {
                let mut variants: Vec<(&str, ConeCochain, ConeCochain, Vec<u64>)> = Vec::new();
                // y_v ↦ y_v + w, w ∈ C^0_𝓛
                let mut xi2 = xi.clone();
                for (k, p) in ctx.data.places.iter().enumerate() {
                    let w = random_combo(zm, p.lift.span(0), xi2.y[k].len(), rng);
                    xi2.y[k] = add_vec(zm, &xi2.y[k], &w);
                    reduce_cochain(&ctx.locals[k].module, &mut xi2.y[k]);
                }
                variants.push(("y shift by C^0_L", xi2, xd.clone(), z.clone()));
                // y'_v ↦ y'_v + w', w' ∈ C^1_𝓛⊥, and y'_v ↦ y'_v + du_v
                let mut xd2 = xd.clone();
                for (k, p) in ctx.data.places.iter().enumerate() {
                    let dl = p.dual_lift.as_ref().expect("checked in new");
                    let w = random_combo(zm, dl.span(1), xd2.y[k].len(), rng);
                    let u = random_vec(zm, ctx.locals[k].d.dim(0), rng);
                    let du = ctx.locals[k].d.d(0).apply(&u);
                    xd2.y[k] = add_vec(zm, &add_vec(zm, &xd2.y[k], &w), &du);
                    reduce_cochain(&ctx.locals[k].dual, &mut xd2.y[k]);
                }
                variants.push(("y' shift by C^1_L⊥ and local coboundary", xi.clone(), xd2, z.clone()));
                // z ↦ z + global 2-cocycle
                let w = random_combo(zm, &z2_global, z.len(), rng);
                variants.push(("z shift by global cocycle", xi.clone(), xd.clone(), add_vec(zm, &z, &w)));
                // (x, y, z) ↦ (x - da, y + a|_v, z - a ∪ x')
                let a0 = random_vec(zm, ctx.global_m.dim(0), rng);
                let mut a0 = a0;
                reduce_cochain(&ctx.data.module, &mut a0);
                let da = ctx.global_m.d(0).apply(&a0);
                let mut xi3 = xi.clone();
                xi3.x = sub_vec(zm, &xi.x, &da);
                reduce_cochain(&ctx.data.module, &mut xi3.x);
                for (k, p) in ctx.data.places.iter().enumerate() {
                    let av = restrict(&p.group, &p.iota, g, &a0, 0, r);
                    xi3.y[k] = add_vec(zm, &xi3.y[k], &av);
                    reduce_cochain(&ctx.locals[k].module, &mut xi3.y[k]);
                }
                let ax = cup(g, &ctx.data.module, &a0, 0, &ctx.dual, &xd.x, 2, &ctx.eval, &ctx.mu);
                variants.push(("global coboundary on the H^1 side", xi3, xd.clone(), sub_vec(zm, &z, &ax)));
                // (x', y', z) ↦ (x' - da', y' + a'|_v, z + x ∪ a')
                let mut a1 = random_vec(zm, ctx.global_d.dim(1), rng);
                reduce_cochain(&ctx.dual, &mut a1);
                let da1 = ctx.global_d.d(1).apply(&a1);
                let mut xd3 = xd.clone();
                xd3.x = sub_vec(zm, &xd.x, &da1);
                reduce_cochain(&ctx.dual, &mut xd3.x);
                for (k, p) in ctx.data.places.iter().enumerate() {
                    let av = restrict(&p.group, &p.iota, g, &a1, 1, r);
                    xd3.y[k] = add_vec(zm, &xd3.y[k], &av);
                    reduce_cochain(&ctx.locals[k].dual, &mut xd3.y[k]);
                }
                let xa = cup(g, &ctx.data.module, &xi.x, 1, &ctx.dual, &a1, 1, &ctx.eval, &ctx.mu);
                variants.push(("global coboundary on the H^2 side", xi.clone(), xd3, add_vec(zm, &z, &xa)));
                for (label, v1, v2, vz) in variants {
                    if pairing.global_cup(&v1.x, &v2.x) != ctx.global_mu.d(2).apply(&vz) {
                        rep.independence_ok = false;
                        rep.failures.push(format!("{}: modified z is not a primitive", label));
                        continue;
                    }
                    if pairing.value_with(&v1, &v2, &vz) != base {
                        rep.independence_ok = false;
                        rep.failures.push(format!("{}: value changed", label));
                    }
                    if pairing.symmetric_value_with(&v1, &v2, &vz) != base {
                        rep.symmetric_ok = false;
                        rep.failures.push(format!("{}: symmetric value changed", label));
                    }
                }
            }
            evaluated.push((xi, xd, z, base));
        }
    }
    // additivity in the first argument: (ξ1 + ξ2, ξ') with z1 + z2
    for i in 0..evaluated.len() {
        for j in i + 1..evaluated.len() {
            let (a, b) = (&evaluated[i], &evaluated[j]);
            if a.1 != b.1 {
                continue;
            }
            let xi = ConeCochain {
                x: add_vec(zm, &a.0.x, &b.0.x),
                y: a.0.y.iter().zip(&b.0.y).map(|(u, v)| add_vec(zm, u, v)).collect(),
            };
            let z = add_vec(zm, &a.2, &b.2);
            if pairing.value_with(&xi, &a.1, &z) != zm.add(a.3, b.3) {
                rep.bilinear_ok = false;
                rep.failures.push("pairing is not additive".into());
            }
        }
    }
    Ok(rep)
}

/// Seeded SelmerData generator: |G| ≤ 8, |M| ≤ 27, maxdeg 3, up to three
/// places carrying zero, full or unramified-type conditions, with
/// invariant functionals satisfying reciprocity.
pub fn sample_instance<R: Rng + ?Sized>(rng: &mut R, budget: u128) -> Result<SelmerData> {
    let choice = rng.gen_range(0..10);
    let (group, p) = match choice {
        0 => (FiniteGroup::cyclic(2), 2),
        1 => (FiniteGroup::cyclic(4), 2),
        2 => (FiniteGroup::abelian(&[2, 2])?, 2),
        3 => (FiniteGroup::cyclic(3), 3),
        4 => (FiniteGroup::cyclic(6), 3),
        5 => (FiniteGroup::symmetric3(), 3),
        6 => (FiniteGroup::dihedral(4), 2),
        7 => (FiniteGroup::quaternion(), 2),
        8 => (FiniteGroup::abelian(&[2, 4])?, 2),
        _ => (FiniteGroup::cyclic(5), 5),
    };
    let module = sample_module(&group, p, rng)?;
    let nplaces = rng.gen_range(0..=3usize);
    let mut local_groups = Vec::new();
    for _ in 0..nplaces {
        let kind = rng.gen_range(0..4);
        let (gv, iota) = match kind {
            0 => (FiniteGroup::trivial(), vec![group.identity()]),
            1 => (group.clone(), (0..group.order()).collect()),
            _ => group.cyclic_subgroup(rng.gen_range(0..group.order())),
        };
        local_groups.push((gv, iota));
    }
    let zm = module.zm();
    let invs = reciprocity_functionals(&group, &local_groups, p, zm.n(), rng, budget)?;
    let top = 3;
    let mut places = Vec::new();
    for (k, ((gv, iota), inv)) in local_groups.into_iter().zip(invs).enumerate() {
        let mv = module.restrict(&gv, &iota)?;
        let kind = rng.gen_range(0..4);
        let (lift, dual_lift) = match kind {
            0 => {
                let (dual, _, _) = dualize(&gv, &mv)?;
                let cd = cochain_complex(&gv, &dual, top, budget)?;
                (ConditionLift::zero(), ConditionLift::full(&cd))
            }
            1 => {
                let cm = cochain_complex(&gv, &mv, top, budget)?;
                (ConditionLift::full(&cm), ConditionLift::zero())
            }
            _ => {
                let cm = cochain_complex(&gv, &mv, top, budget)?;
                let z1 = cm.cocycles(1).gens();
                let count = rng.gen_range(0..=z1.len().min(2));
                let l: Vec<Vec<u64>> = (0..count).map(|_| random_combo(zm, &z1, cm.dim(1), rng)).collect();
                example_unramified_lift(&gv, &mv, top, &l, Some(&inv), budget)?
            }
        };
        places.push(Place { label: format!("v{}", k), group: gv, iota, lift, dual_lift: Some(dual_lift), inv: Some(inv) });
    }
    Ok(SelmerData { group, module, maxdeg: top, places })
}

fn sample_module<R: Rng + ?Sized>(group: &FiniteGroup, p: u64, rng: &mut R) -> Result<GModule> {
    let kind = rng.gen_range(0..4);
    let order = group.order();
    match kind {
        // trivial Z/p or Z/p^2
        0 => GModule::trivial(group, p, vec![rng.gen_range(1..=2)]),
        // trivial Z/p ⊕ Z/p^a
        1 => GModule::trivial(group, p, vec![1, if p == 5 { 1 } else { rng.gen_range(1..=2) }]),
        // sign-type character through a homomorphism to {±1}, or unipotent
        // Jordan block through a homomorphism to Z/p
        _ => {
            let zm = Zmod::new(p, 1)?;
            let homs = small_characters(group, p);
            if kind == 2 && p != 2 {
                let signs = small_characters(group, 2);
                let chi = &signs[rng.gen_range(0..signs.len())];
                let action = (0..order)
                    .map(|g| ZMat::from_vec(zm, 1, 1, vec![if chi[g] == 0 { 1 } else { p - 1 }]))
                    .collect();
                GModule::from_element_actions(group, p, vec![1], action)
            } else {
                let chi = &homs[rng.gen_range(0..homs.len())];
                let action = (0..order).map(|g| ZMat::from_vec(zm, 2, 2, vec![1, chi[g], 0, 1])).collect();
                GModule::from_element_actions(group, p, vec![1, 1], action)
            }
        }
    }
}

/// Homomorphisms G → Z/m found by brute force (m small, |G| ≤ 8).
fn small_characters(group: &FiniteGroup, m: u64) -> Vec<Vec<u64>> {
    let n = group.order();
    let mut out = Vec::new();
    let total = (m as usize).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let vals: Vec<u64> = (0..n)
            .map(|_| {
                let v = (c % m as usize) as u64;
                c /= m as usize;
                v
            })
            .collect();
        if vals[group.identity()] != 0 {
            continue;
        }
        let ok = (0..n).all(|a| (0..n).all(|b| vals[group.mul(a, b)] == (vals[a] + vals[b]) % m));
        if ok {
            out.push(vals);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochains::DEFAULT_BUDGET;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_places_gives_global_cohomology() {
        let g = FiniteGroup::cyclic(3);
        let m = GModule::trivial(&g, 3, vec![1]).unwrap();
        let ctx = SelmerContext::new(SelmerData { group: g, module: m, maxdeg: 3, places: vec![] }, DEFAULT_BUDGET).unwrap();
        let s = ctx.selmer_complex(false).unwrap();
        for n in 0..3 {
            assert_eq!(s.cohomology(n).exponents(), vec![1]);
        }
        assert!(s.les().unwrap().iter().all(|x| x.exact));
    }

    #[test]
    fn sampled_instances_pass_suite() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..4 {
            let data = sample_instance(&mut rng, DEFAULT_BUDGET).unwrap();
            let ctx = SelmerContext::new(data, DEFAULT_BUDGET).unwrap();
            let rep = pairing_suite(&ctx, 2, &mut rng).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures);
        }
    }
}
