//! Scenario files: parsing, dispatch by kind, and report assembly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use deskalg::cochains::{group_cohomology, FiniteGroup, GModule};
use deskalg::complex::ModSpace;
use deskalg::deformation::{
    ci_tangent_dims, expected_size_ci_check, random_ci_presentation, wiles_numerology, NumerologyInput, Presentation,
};
use deskalg::dold_kan::{check_n_gamma, eilenberg_maclane, gamma_n_iso, homotopy_ring, random_complex, square_zero};
use deskalg::linalg::ZMat;
use deskalg::patching::{cg_check, cg_instance, simulate, CgDiagnosis, CgFamily, PatchScenario, Verdict};
use deskalg::resolution::{
    binom, limit_tor_algebra, periodic_tor_system, tor, tuples, PolyQuotientRing, Relations, SModule, TorStrategy,
};
use deskalg::selmer::{pairing_suite, sample_instance, SelmerContext};
use deskalg::zmod::Zmod;
use deskalg::Error;

use crate::{classify, resolve_budget, Outcome, RunError, Status, SCHEMA};

/// One verified (or refuted) property, named by a stable id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Property {
    pub id: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Property {
    fn new(id: &str, holds: bool) -> Self {
        Property { id: id.to_string(), holds, detail: None }
    }
    fn with(id: &str, holds: bool, detail: impl Into<String>) -> Self {
        Property { id: id.to_string(), holds, detail: Some(detail.into()) }
    }
}

/// What one kind contributes to the report.
struct KindOutput {
    properties: Vec<Property>,
    result: Value,
    inconclusive: bool,
}

impl KindOutput {
    fn new(properties: Vec<Property>, result: Value) -> Self {
        KindOutput { properties, result, inconclusive: false }
    }
}

/// Scenario kinds accepted by `run`.
pub const KINDS: &[&str] = &["tor", "limit-tor", "groupcoh", "selmer", "pairing", "doldkan", "ci", "numerology", "patch", "cg"];

/// Parses and runs a scenario. `seed` and `budget` come from the command
/// line and take precedence over the file (the budget environment variable
/// beats both).
pub fn run_text(text: &str, seed: Option<u64>, budget: Option<u64>) -> Result<Outcome, RunError> {
    let value: Value = serde_json::from_str(text).map_err(|e| RunError::Input(format!("malformed JSON: {}", e)))?;
    let Value::Object(mut obj) = value else {
        return Err(RunError::Input("scenario must be a JSON object".into()));
    };
    match obj.remove("schema") {
        Some(Value::String(s)) if s == SCHEMA => {}
        Some(other) => return Err(RunError::Input(format!("unsupported schema {}", other))),
        None => return Err(RunError::Input("missing \"schema\" field".into())),
    }
    let kind = match obj.remove("kind") {
        Some(Value::String(k)) => k,
        _ => return Err(RunError::Input("missing or non-string \"kind\" field".into())),
    };
    let file_seed = take_u64(&mut obj, "seed")?;
    let file_budget = take_u64(&mut obj, "budget")?;
    let seed = seed.or(file_seed).unwrap_or(0);
    let budget = resolve_budget(budget, file_budget)?;
    let payload = Value::Object(obj);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = match kind.as_str() {
        "tor" => run_tor(parse(payload)?, budget),
        "limit-tor" => run_limit_tor(parse(payload)?, budget),
        "groupcoh" => run_groupcoh(parse(payload)?, budget),
        "selmer" => run_selmer(parse(payload)?, &mut rng, budget),
        "pairing" => run_pairing(parse(payload)?, &mut rng, budget),
        "doldkan" => run_doldkan(parse(payload)?, &mut rng, budget),
        "ci" => run_ci(parse(payload)?, &mut rng),
        "numerology" => run_numerology(parse(payload)?),
        "patch" => run_patch(parse(payload)?, &mut rng, budget),
        "cg" => run_cg(parse(payload)?, &mut rng),
        other => return Err(RunError::Input(format!("unknown kind {:?}; expected one of {}", other, KINDS.join(", ")))),
    }?;
    let status = if out.inconclusive {
        Status::Inconclusive
    } else if out.properties.iter().any(|p| !p.holds) {
        Status::PropertyFailure
    } else {
        Status::Ok
    };
    let report = json!({
        "schema": SCHEMA,
        "kind": kind,
        "seed": seed,
        "budget": budget,
        "status": status.label(),
        "properties": out.properties,
        "result": out.result,
    });
    Ok(Outcome { status, report })
}

fn take_u64(obj: &mut Map<String, Value>, key: &str) -> Result<Option<u64>, RunError> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v.as_u64().map(Some).ok_or_else(|| RunError::Input(format!("\"{}\" must be a nonnegative integer", key))),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(payload: Value) -> Result<T, RunError> {
    serde_json::from_value(payload).map_err(|e| RunError::Input(format!("invalid payload: {}", e)))
}

fn check_budget(needed: u128, budget: u64) -> Result<(), RunError> {
    if needed > budget as u128 {
        return Err(classify(Error::Budget { needed, budget: budget as u128 }));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum ModuleSpec {
    Residue,
    Quotient { ideal: Vec<Vec<deskalg::deformation::Term>> },
}

impl ModuleSpec {
    fn build(&self, ring: &PolyQuotientRing) -> Result<(SModule, Vec<Vec<u64>>), RunError> {
        match self {
            ModuleSpec::Residue => Ok((SModule::residue(ring), Vec::new())),
            ModuleSpec::Quotient { ideal } => {
                let mut elems = Vec::new();
                for f in ideal {
                    let terms: Vec<(i64, Vec<u32>)> = f.iter().map(|t| (t.coeff, t.exponents.clone())).collect();
                    elems.push(ring.element(&terms).map_err(classify)?);
                }
                Ok((SModule::quotient(ring, &elems), elems))
            }
        }
    }
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum StrategyName {
    Koszul,
    Periodic,
    Minimal,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TorPayload {
    p: u64,
    n: u32,
    vars: usize,
    relations: Relations,
    module: ModuleSpec,
    #[serde(default)]
    coefficients: Option<ModuleSpec>,
    strategy: StrategyName,
    maxdeg: usize,
}

fn run_tor(x: TorPayload, budget: u64) -> Result<KindOutput, RunError> {
    let ring = PolyQuotientRing::new(x.p, x.n, x.vars, x.relations).map_err(classify)?;
    let (m, elems) = x.module.build(&ring)?;
    let (n, _) = x.coefficients.as_ref().unwrap_or(&ModuleSpec::Residue).build(&ring)?;
    let strategy = match x.strategy {
        StrategyName::Koszul => TorStrategy::Koszul(elems),
        StrategyName::Periodic => TorStrategy::Periodic,
        StrategyName::Minimal => TorStrategy::Minimal,
    };
    let mut props = Vec::new();
    let groups = match tor(&ring, &m, &n, x.maxdeg, &strategy, budget as u128) {
        Ok(g) => g,
        Err(Error::NotRegular { truncation, witness }) => {
            props.push(Property::with("tor.koszul-regular", false, format!("Koszul H_1 ≠ 0 at truncation {}: {}", truncation, witness)));
            return Ok(KindOutput::new(props, json!({ "truncation": truncation })));
        }
        Err(e) => return Err(classify(e)),
    };
    let range = 0..=x.maxdeg as i64;
    if matches!(x.strategy, StrategyName::Koszul) {
        props.push(Property::new("tor.koszul-regular", true));
    }
    let per_degree: Vec<Vec<u32>> = range.clone().map(|i| groups.get(i).exponents).collect();
    let level = ring.zm().n();
    Ok(KindOutput::new(
        props,
        json!({
            "groups": per_degree,
            "free_ranks": groups.free_ranks(level, range.clone()),
            "num_cyclic": groups.num_cyclic(range),
            "ring_dim": ring.dim(),
        }),
    ))
}

fn default_levels() -> Vec<u32> {
    vec![1, 2, 3]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitTorPayload {
    p: u64,
    s: usize,
    delta: usize,
    #[serde(default = "default_levels")]
    levels: Vec<u32>,
    #[serde(default)]
    maxdeg: Option<usize>,
}

fn level_model_size(delta: usize, maxdeg: usize, levels: usize) -> u128 {
    let per_level: u128 = (0..=maxdeg + 1).map(|i| tuples(delta, i as u32).len() as u128).sum();
    per_level * levels as u128
}

fn run_limit_tor(x: LimitTorPayload, budget: u64) -> Result<KindOutput, RunError> {
    let sc = PatchScenario::new(x.p, x.s, x.delta, x.levels.clone(), x.maxdeg.unwrap_or(x.delta + 2));
    sc.validate().map_err(classify)?;
    check_budget(level_model_size(sc.delta, sc.maxdeg, sc.levels.len()), budget)?;
    let (sys, _) = periodic_tor_system(sc.p, sc.delta, &sc.levels, sc.maxdeg).map_err(classify)?;
    let (limit, algebra) = limit_tor_algebra(sc.p, sc.delta, &sc.levels, sc.maxdeg).map_err(classify)?;
    let ranks = limit.ranks();
    let expected: Vec<usize> = (0..=sc.maxdeg).map(|i| binom(sc.delta, i)).collect();
    let inconclusive = !limit.stabilized();
    let mut props = Vec::new();
    if !inconclusive {
        props.push(Property::new("limit-tor.binomial-ranks", ranks == expected));
        props.push(Property::new("limit-tor.vanishing-band", ranks.iter().skip(sc.delta + 1).all(|&r| r == 0)));
        props.push(Property::new("limit-tor.graded-commutative", algebra.is_graded_commutative()));
    }
    let transitions: Vec<Vec<Vec<u32>>> = sys
        .transitions
        .iter()
        .zip(&sys.levels)
        .map(|(t, &lo)| {
            let zm = Zmod::new(sc.p, lo).expect("validated level");
            t.iter().map(|g| g.image_group(zm).exponents).collect()
        })
        .collect();
    Ok(KindOutput {
        properties: props,
        result: json!({
            "levels": sc.levels,
            "per_level": sys.groups,
            "transition_images": transitions,
            "limit_ranks": ranks,
            "stabilized": limit.stabilized(),
            "stabilized_at": limit.degrees.iter().map(|d| d.stabilized_at).collect::<Vec<_>>(),
            "stable_images": limit.degrees.iter().map(|d| d.stable_image.clone()).collect::<Vec<_>>(),
        }),
        inconclusive,
    })
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum GroupSpec {
    Cyclic { order: u64 },
    Abelian { invariants: Vec<u64> },
    Dihedral { m: usize },
    Quaternion,
    Symmetric3,
    Table { rows: Vec<Vec<usize>> },
}

impl GroupSpec {
    fn build(&self) -> Result<FiniteGroup, RunError> {
        match self {
            GroupSpec::Cyclic { order } => FiniteGroup::abelian(&[*order]).map_err(classify),
            GroupSpec::Abelian { invariants } => FiniteGroup::abelian(invariants).map_err(classify),
            GroupSpec::Dihedral { m } if *m >= 1 => Ok(FiniteGroup::dihedral(*m)),
            GroupSpec::Dihedral { .. } => Err(RunError::Input("dihedral group needs m ≥ 1".into())),
            GroupSpec::Quaternion => Ok(FiniteGroup::quaternion()),
            GroupSpec::Symmetric3 => Ok(FiniteGroup::symmetric3()),
            GroupSpec::Table { rows } => FiniteGroup::from_table(rows).map_err(classify),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorAction {
    element: usize,
    matrix: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GModuleSpec {
    p: u64,
    exponents: Vec<u32>,
    /// Actions of generating elements; empty means the trivial action.
    #[serde(default)]
    generators: Vec<GeneratorAction>,
}

impl GModuleSpec {
    fn build(&self, group: &FiniteGroup) -> Result<GModule, RunError> {
        if self.generators.is_empty() {
            return GModule::trivial(group, self.p, self.exponents.clone()).map_err(classify);
        }
        let level = self.exponents.iter().copied().max().unwrap_or(1).max(1);
        let zm = Zmod::new(self.p, level).map_err(classify)?;
        let r = self.exponents.len();
        let mut gens = Vec::new();
        for g in &self.generators {
            if g.element >= group.order() || g.matrix.len() != r || g.matrix.iter().any(|row| row.len() != r) {
                return Err(RunError::Input(format!("generator action for element {} has the wrong shape", g.element)));
            }
            let flat: Vec<i64> = g.matrix.iter().flatten().copied().collect();
            gens.push((g.element, ZMat::from_i64(zm, r, r, &flat)));
        }
        GModule::from_generators(group, self.p, self.exponents.clone(), &gens).map_err(classify)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupCohPayload {
    group: GroupSpec,
    module: GModuleSpec,
    maxdeg: usize,
}

fn run_groupcoh(x: GroupCohPayload, budget: u64) -> Result<KindOutput, RunError> {
    let g = x.group.build()?;
    let m = x.module.build(&g)?;
    let groups = group_cohomology(&g, &m, x.maxdeg, budget as u128).map_err(classify)?;
    let h0_ok = groups[0].order_log() == m.fixed_points_order_log(&g);
    Ok(KindOutput::new(
        vec![Property::new("groupcoh.h0-fixed-points", h0_ok)],
        json!({
            "group_order": g.order(),
            "groups": groups.iter().map(|a| a.exponents.clone()).collect::<Vec<_>>(),
            "dims": groups.iter().map(|a| a.num_cyclic()).collect::<Vec<_>>(),
        }),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampledPayload {
    instances: usize,
    #[serde(default = "default_trials")]
    trials: usize,
}

fn default_trials() -> usize {
    2
}

fn run_selmer(x: SampledPayload, rng: &mut ChaCha8Rng, budget: u64) -> Result<KindOutput, RunError> {
    let mut props = Vec::new();
    let mut rows = Vec::new();
    for k in 0..x.instances {
        let data = sample_instance(rng, budget as u128).map_err(classify)?;
        let (order, exps, places) = (data.group.order(), data.module.exps().to_vec(), data.places.len());
        let ctx = SelmerContext::new(data, budget as u128).map_err(classify)?;
        let sel = ctx.selmer_complex(false).map_err(classify)?;
        let spots = sel.les().map_err(classify)?;
        let exact = spots.iter().all(|s| s.exact);
        let bad: Vec<String> = spots.iter().filter(|s| !s.exact).map(|s| s.label.clone()).collect();
        props.push(if exact {
            Property::new(&format!("selmer.{}.cone-les-exact", k), true)
        } else {
            Property::with(&format!("selmer.{}.cone-les-exact", k), false, bad.join("; "))
        });
        let axioms = (0..places).all(|v| ctx.check_axioms(v).passed());
        props.push(Property::new(&format!("selmer.{}.condition-axioms", k), axioms));
        rows.push(json!({
            "group_order": order,
            "module": exps,
            "places": places,
            "selmer_groups": (0..sel.top).map(|n| sel.cohomology(n).exponents()).collect::<Vec<_>>(),
        }));
    }
    Ok(KindOutput::new(props, json!({ "instances": rows })))
}

fn run_pairing(x: SampledPayload, rng: &mut ChaCha8Rng, budget: u64) -> Result<KindOutput, RunError> {
    let mut props = Vec::new();
    let mut rows = Vec::new();
    for k in 0..x.instances {
        let data = sample_instance(rng, budget as u128).map_err(classify)?;
        let ctx = SelmerContext::new(data, budget as u128).map_err(classify)?;
        let rep = pairing_suite(&ctx, x.trials, rng).map_err(classify)?;
        let id = |s: &str| format!("pairing.{}.{}", k, s);
        props.push(Property::new(&id("cone-les-exact"), rep.les_exact && rep.les_dual_exact));
        props.push(Property::new(&id("differential"), rep.differential_ok));
        props.push(Property::new(&id("independence"), rep.independence_ok));
        props.push(Property::new(&id("symmetric-formula"), rep.symmetric_ok));
        props.push(Property::new(&id("bilinear"), rep.bilinear_ok));
        rows.push(serde_json::to_value(&rep).expect("plain data"));
    }
    Ok(KindOutput::new(props, json!({ "instances": rows })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DoldKanPayload {
    p: u64,
    #[serde(default = "one")]
    n: u32,
    instances: usize,
    top: usize,
    #[serde(default = "two")]
    max_rank: usize,
    /// Degree of the square-zero check k ⊕ k[d]; skipped when absent.
    #[serde(default)]
    em_degree: Option<usize>,
}

fn one() -> u32 {
    1
}
fn two() -> usize {
    2
}

fn run_doldkan(x: DoldKanPayload, rng: &mut ChaCha8Rng, budget: u64) -> Result<KindOutput, RunError> {
    if x.top > 6 {
        return Err(RunError::Input(format!("truncation {} above the supported maximum 6", x.top)));
    }
    let zm = Zmod::new(x.p, x.n).map_err(classify)?;
    let gamma_size = (1u128 << x.top) * (x.top as u128 + 1) * x.max_rank as u128;
    check_budget(gamma_size * gamma_size, budget)?;
    let mut props = Vec::new();
    let mut ranks = Vec::new();
    for k in 0..x.instances {
        let c = random_complex(zm, x.top, x.max_rank, rng).map_err(classify)?;
        ranks.push((0..=x.top as i64).map(|h| c.dim(h)).collect::<Vec<_>>());
        let rt = check_n_gamma(&c, x.top).map_err(classify)?;
        props.push(match rt.failure {
            None => Property::new(&format!("doldkan.{}.n-gamma-identity", k), rt.identity),
            Some(f) => Property::with(&format!("doldkan.{}.n-gamma-identity", k), false, f),
        });
        let g = deskalg::dold_kan::dk_inverse(&c, x.top).map_err(classify)?;
        let iso = gamma_n_iso(&g);
        props.push(match iso {
            Ok(_) => Property::new(&format!("doldkan.{}.gamma-n-iso", k), true),
            Err(e) => Property::with(&format!("doldkan.{}.gamma-n-iso", k), false, e.to_string()),
        });
    }
    let mut em = Value::Null;
    if let Some(d) = x.em_degree {
        if d > x.top {
            return Err(RunError::Input(format!("em_degree {} above truncation {}", d, x.top)));
        }
        let v = eilenberg_maclane(zm, ModSpace::free(1, x.n), d, x.top).map_err(classify)?;
        let ring = square_zero(&v).map_err(classify)?;
        let pi = homotopy_ring(&ring, x.top).map_err(classify)?;
        let ok = pi.degrees.iter().enumerate().all(|(i, e)| {
            if i == 0 || i == d {
                e == &vec![x.n]
            } else {
                e.is_empty()
            }
        });
        props.push(Property::new("doldkan.square-zero-homotopy", ok));
        em = json!(pi.degrees);
    }
    Ok(KindOutput::new(props, json!({ "complex_ranks": ranks, "square_zero_homotopy": em })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratedCi {
    count: usize,
    p: u64,
    #[serde(default = "four")]
    max_vars: usize,
    #[serde(default = "three")]
    max_relations: usize,
}

fn three() -> usize {
    3
}
fn four() -> usize {
    4
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CiPayload {
    #[serde(default)]
    presentation: Option<Presentation>,
    /// Expected (b0, b1) for the expected-size criterion.
    #[serde(default)]
    expected: Option<(usize, usize)>,
    #[serde(default)]
    generated: Option<GeneratedCi>,
}

fn run_ci(x: CiPayload, rng: &mut ChaCha8Rng) -> Result<KindOutput, RunError> {
    let mut props = Vec::new();
    match (x.presentation, x.generated) {
        (Some(pres), None) => {
            let dims = match ci_tangent_dims(&pres) {
                Ok(d) => Some(d),
                Err(Error::NotRegular { truncation, witness }) => {
                    props.push(Property::with("ci.regular", false, format!("Koszul H_1 ≠ 0 at truncation {}: {}", truncation, witness)));
                    None
                }
                Err(e) => return Err(classify(e)),
            };
            if dims.is_some() {
                props.push(Property::new("ci.regular", true));
            }
            let check = match x.expected {
                Some((b0, b1)) => {
                    let c = expected_size_ci_check(&pres, b0, b1).map_err(classify)?;
                    props.push(Property::new("ci.expected-size", c.holds));
                    Some(c)
                }
                None => None,
            };
            Ok(KindOutput::new(props, json!({ "tangent_dims": dims, "expected_size": check })))
        }
        (None, Some(gen)) => {
            Zmod::new(gen.p, 1).map_err(classify)?;
            let mut rows = Vec::new();
            for k in 0..gen.count {
                let pres = random_ci_presentation(rng, gen.p, gen.max_vars, gen.max_relations);
                let want = vec![pres.vars, pres.relations.len(), 0];
                let got = ci_tangent_dims(&pres).map(|d| d.dims);
                let holds = got.as_ref().map(|d| d == &want).unwrap_or(false);
                props.push(Property::new(&format!("ci.{}.tangent-dims", k), holds));
                rows.push(json!({ "vars": pres.vars, "relations": pres.relations.len(), "dims": got.ok() }));
            }
            Ok(KindOutput::new(props, json!({ "generated": rows })))
        }
        _ => Err(RunError::Input("ci payload needs exactly one of \"presentation\" and \"generated\"".into())),
    }
}

fn run_numerology(x: NumerologyInput) -> Result<KindOutput, RunError> {
    let n = wiles_numerology(&x).map_err(classify)?;
    let mut props = vec![Property::new("numerology.relations", n.relations_hold)];
    if n.relations_hold {
        props.push(Property::new("numerology.value-equals-expected", n.value == n.expected));
    }
    Ok(KindOutput::new(props, serde_json::to_value(&n).expect("plain data")))
}

fn run_patch(sc: PatchScenario, rng: &mut ChaCha8Rng, budget: u64) -> Result<KindOutput, RunError> {
    sc.validate().map_err(classify)?;
    let koszul = binom(sc.truncation() as usize + sc.delta, sc.delta) as u128 * (1u128 << sc.delta);
    check_budget(level_model_size(sc.delta, sc.maxdeg, sc.levels.len()) + koszul, budget)?;
    let rep = simulate(&sc, rng).map_err(classify)?;
    let inconclusive = rep.limit.verdict == Verdict::Inconclusive;
    let mut props = vec![
        Property::new("patch.descent", rep.levels.iter().all(|l| l.descent_holds)),
        Property::with(
            "patch.composition-law",
            rep.composition_failure.is_none(),
            rep.composition_failure.map(|(a, b, c)| format!("e_{{{},{}}} ≠ e_{{{},{}}}∘e_{{{},{}}}", a, c, b, c, a, b)).unwrap_or_default(),
        ),
        Property::new("patch.thread", rep.selection.thread.as_ref().is_some_and(|t| rep.selection.system.is_thread(t))),
    ];
    if !inconclusive {
        let lim = &rep.limit;
        props.push(Property::new("patch.binomial-ranks", lim.ranks_match));
        props.push(Property::new("patch.vanishing-band", lim.limit.ranks().iter().skip(sc.delta + 1).all(|&r| r == 0)));
        props.push(Property::with("patch.exterior", lim.exterior.matches, lim.exterior.failure.clone().unwrap_or_default()));
        props.push(Property::new("patch.koszul-exterior", lim.koszul_exterior.matches));
        if sc.maxdeg >= sc.delta {
            props.push(Property::new("patch.euler", lim.euler == if sc.delta == 0 { 1 } else { 0 }));
        }
    }
    for p in props.iter_mut() {
        if p.detail.as_deref() == Some("") {
            p.detail = None;
        }
    }
    Ok(KindOutput {
        properties: props,
        result: json!({
            "levels": rep.levels,
            "transition_images": rep.transition_images,
            "limit_ranks": rep.limit.limit.ranks(),
            "stabilized_at": rep.limit.limit.degrees.iter().map(|d| d.stabilized_at).collect::<Vec<_>>(),
            "koszul_ranks": rep.limit.koszul_ranks,
            "koszul_truncation": rep.limit.koszul_truncation,
            "exterior_verdict": rep.limit.exterior.matches,
            "verdict": rep.limit.verdict,
            "euler": rep.limit.euler,
            "selection": rep.selection,
        }),
        inconclusive,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CgPayload {
    #[serde(default)]
    free: usize,
    #[serde(default)]
    unconcentrated: usize,
    #[serde(default)]
    nonfree: usize,
}

fn run_cg(x: CgPayload, rng: &mut ChaCha8Rng) -> Result<KindOutput, RunError> {
    let mut props = Vec::new();
    let mut rows = Vec::new();
    let plan = [(CgFamily::Free, x.free), (CgFamily::Unconcentrated, x.unconcentrated), (CgFamily::NonFree, x.nonfree)];
    let mut k = 0;
    for (family, count) in plan {
        for _ in 0..count {
            let inst = cg_instance(rng, family).map_err(classify)?;
            let rep = cg_check(&inst).map_err(classify)?;
            let correct = match family {
                CgFamily::Free => rep.diagnosis.is_none(),
                CgFamily::Unconcentrated => matches!(rep.diagnosis, Some(CgDiagnosis::Concentration { .. })),
                CgFamily::NonFree => matches!(rep.diagnosis, Some(CgDiagnosis::Freeness { tor1 }) if tor1 > 0),
            };
            props.push(Property::new(&format!("cg.{}.diagnosis", k), correct));
            rows.push(json!({ "family": family, "q": inst.q, "report": rep }));
            k += 1;
        }
    }
    Ok(KindOutput::new(props, json!({ "instances": rows })))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIG: Option<u64> = Some(1 << 32);

    fn status(text: &str) -> Status {
        match run_text(text, Some(1), BIG) {
            Ok(o) => o.status,
            Err(e) => e.status(),
        }
    }

    #[test]
    fn header_is_validated() {
        assert_eq!(status("[]"), Status::InputError);
        assert_eq!(status(r#"{"kind": "numerology"}"#), Status::InputError);
        assert_eq!(status(r#"{"schema": 1, "kind": "numerology"}"#), Status::InputError);
        assert_eq!(status(r#"{"schema": "1", "kind": "nope"}"#), Status::InputError);
        assert_eq!(status(r#"{"schema": "1", "kind": "groupcoh", "seed": -1}"#), Status::InputError);
    }

    #[test]
    fn numerology_report() {
        let text = r#"{"schema": "1", "kind": "numerology", "h1_global": 5, "h2_global": 3, "h1_local": 4, "h1_f": 1, "rank": 2, "num_primes": 3, "delta": 1}"#;
        let out = run_text(text, None, BIG).unwrap();
        assert_eq!(out.status, Status::Ok);
        assert_eq!(out.report["result"]["value"], 5);
        assert_eq!(out.report["seed"], 0);
    }

    #[test]
    fn command_line_seed_beats_file_seed() {
        let text = r#"{"schema": "1", "kind": "groupcoh", "seed": 9, "group": {"kind": "cyclic", "order": 2}, "module": {"p": 2, "exponents": [1]}, "maxdeg": 2}"#;
        assert_eq!(run_text(text, Some(4), BIG).unwrap().report["seed"], 4);
        assert_eq!(run_text(text, None, BIG).unwrap().report["seed"], 9);
    }

    #[test]
    fn every_kind_is_dispatched() {
        for kind in KINDS {
            let text = format!(r#"{{"schema": "1", "kind": "{}", "unexpected_field_only": true}}"#, kind);
            // Each kind either runs on defaults or rejects the payload; none is unknown.
            if let Err(e) = run_text(&text, Some(1), BIG) {
                assert!(!e.to_string().contains("unknown kind"), "{}", kind);
            }
        }
    }
}
