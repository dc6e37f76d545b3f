use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use katetov::bergman::{build_chain, encode_word, evaluate_word, verify_distortion, EndoSequence};
use katetov::classes::k_object;
use katetov::limits::{embed_endomorphisms, extend_partial_morphism, k_omega_morphism, EndoTruncation, PartialMap};
use katetov::pushout::{generic_k, realized_types, realizes_all_extensions};
use katetov::structures::{
    all_morphisms, to_dot, ClassTag, ElemId, FiniteStructure, MapData, Morphism, MorphismKind,
};
use katetov::tower::{verify_extension_property, TowerAddress, TowerHandle};
use katetov::{Error, Execution, Result};
use serde_json::{json, Value};

use crate::config::{load_json, load_structure, ClassArgs, Format, OutArgs};
use crate::report::{emit, pretty, Artifact, Report};

/// Morphism kind used for a class's endomorphisms: homomorphisms where the class has them.
fn endo_kind(class: ClassTag) -> MorphismKind {
    if class.allows_homomorphisms() {
        MorphismKind::Homomorphism
    } else {
        MorphismKind::Embedding
    }
}

fn sizes(t: &TowerHandle) -> String {
    format!("{:?}", t.level_sizes())
}

fn level_dot(t: &TowerHandle, level: usize) -> Option<String> {
    to_dot(t.level(level).ok()?, &format!("level{level}")).ok()
}

/// Endomorphism tables from JSON: a list of point tables, or of atom tables for Boolean
/// algebras.
fn load_endos(src: &str, on: &Arc<FiniteStructure>) -> Result<Vec<Morphism>> {
    let v = load_json(src)?;
    let bad = |e: serde_json::Error| Error::Format(format!("{src}: expected a list of endomorphism tables: {e}"));
    let maps: Vec<MapData> = if on.class() == ClassTag::BooleanAlgebra {
        let t: Vec<Vec<Vec<ElemId>>> = serde_json::from_value(v).map_err(bad)?;
        t.into_iter().map(MapData::Atoms).collect()
    } else {
        let t: Vec<Vec<ElemId>> = serde_json::from_value(v).map_err(bad)?;
        t.into_iter().map(MapData::Points).collect()
    };
    maps.into_iter()
        .enumerate()
        .map(|(i, m)| {
            Morphism::new(on.clone(), on.clone(), m, endo_kind(on.class()))
                .map_err(|e| Error::Contract(format!("endomorphism {i}: {e}")))
        })
        .collect()
}

fn table_json(m: &Morphism) -> Value {
    match m.map() {
        MapData::Points(t) => json!(t),
        MapData::Atoms(t) => json!(t),
    }
}

#[derive(Args, Debug)]
pub struct BuildCmd {
    #[command(flatten)]
    class: ClassArgs,
    /// Number of Katětov steps.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Level drawn by `--format dot` (defaults to the top level).
    #[arg(long)]
    level: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

impl BuildCmd {
    pub fn run(self, _exec: Execution) -> Result<bool> {
        let mut t = self.class.tower()?;
        t.expand_to(self.depth)?;
        let mut r = Report::new("build");
        r.line(format!("class {}", t.class()));
        r.line(format!("depth {}", self.depth));
        r.line(format!("level sizes {}", sizes(&t)));
        r.set("class", t.class().name());
        r.set("depth", self.depth);
        r.set("level_sizes", json!(t.level_sizes()));
        let art = Artifact {
            json: Some(t.to_json()),
            dot: level_dot(&t, self.level.unwrap_or(self.depth)),
        };
        emit(&r, art, &self.out)?;
        Ok(r.passed)
    }
}

#[derive(Args, Debug)]
pub struct VerifyCmd {
    #[command(flatten)]
    class: ClassArgs,
    /// Level whose substructures are checked.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Largest substructure size (atoms for Boolean algebras).
    #[arg(long, default_value_t = 1)]
    size_bound: usize,
    #[command(flatten)]
    out: OutArgs,
}

impl VerifyCmd {
    pub fn run(self, exec: Execution) -> Result<bool> {
        let mut t = self.class.tower()?;
        let rep = verify_extension_property(&mut t, self.depth, self.size_bound, exec)?;
        let mut r = Report::new("verify-ep");
        r.line(format!("class {}", t.class()));
        r.line(format!("base level {} of sizes {}", self.depth, sizes(&t)));
        let mut by_size: BTreeMap<usize, (BTreeSet<&[TowerAddress]>, usize)> = BTreeMap::new();
        for c in &rep.certificates {
            let e = by_size.entry(c.base.len()).or_default();
            e.0.insert(&c.base);
            e.1 += 1;
        }
        let mut groups = Vec::new();
        for (k, (bases, certs)) in &by_size {
            let per = if bases.is_empty() { 0.0 } else { *certs as f64 / bases.len() as f64 };
            r.line(format!("base size {k}: {} bases, {certs} certificates, {per} per base", bases.len()));
            groups.push(json!({ "base_size": k, "bases": bases.len(), "certificates": certs }));
        }
        r.line(format!("certificates {}", rep.certificates.len()));
        if let Some(w) = rep.max_witness_level() {
            r.line(format!("deepest witness level {w}"));
        }
        r.set("class", t.class().name());
        r.set("base_depth", self.depth);
        r.set("size_bound", self.size_bound);
        r.set("certificates", rep.certificates.len());
        r.set("by_base_size", groups);
        if let Some(cx) = &rep.counterexample {
            r.fail(format!("base {:?}: {}", cx.base, cx.reason));
            r.set(
                "counterexample",
                json!({
                    "base": cx.base,
                    "new_element": format!("{:?}", cx.extension.new_element()),
                    "reason": cx.reason,
                }),
            );
        }
        let art = Artifact { json: Some(r.to_json()), dot: None };
        emit(&r, art, &self.out)?;
        Ok(r.passed)
    }
}

#[derive(Args, Debug)]
pub struct ExtendCmd {
    /// Tower JSON (file or inline); when absent the tower is built from the class flags.
    #[arg(long)]
    tower: Option<String>,
    #[command(flatten)]
    class: ClassArgs,
    /// Partial map JSON: `{"domain": [...], "images": [...], "kind": ...}` with tower addresses.
    #[arg(long)]
    map: String,
    /// Level on which the extension must be total (defaults to the map's deepest level).
    #[arg(long)]
    depth: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

impl ExtendCmd {
    pub fn run(self, exec: Execution) -> Result<bool> {
        let mut t = match &self.tower {
            Some(src) => TowerHandle::from_json(&load_json(src)?)?,
            None => self.class.tower()?,
        };
        let pm: PartialMap = serde_json::from_value(load_json(&self.map)?)
            .map_err(|e| Error::Format(format!("{}: not a partial map: {e}", self.map)))?;
        let pm = PartialMap::new(pm.domain, pm.images, pm.kind)?;
        let depth = self
            .depth
            .unwrap_or_else(|| pm.domain.iter().chain(&pm.images).map(|a| a.level).max().unwrap_or(0));
        let out = extend_partial_morphism(&mut t, &pm, depth, exec)?;
        let mut r = Report::new("extend");
        r.line(format!("class {}", t.class()));
        r.line(format!("partial map of {} points, kind {}", pm.len(), pm.kind));
        r.line(format!("input depth {}, output depth {}", out.depth_in, out.depth_out));
        r.set("class", t.class().name());
        r.set("depth_in", out.depth_in);
        r.set("depth_out", out.depth_out);
        r.set("points", out.table.len());
        if !out.extends(&pm) {
            r.fail("the truncation does not restrict to the partial map");
        }
        let want = if pm.kind == MorphismKind::Homomorphism { MorphismKind::Homomorphism } else { MorphismKind::Embedding };
        if let Err(e) = out.to_morphism(&t).and_then(|m| m.with_kind(want)) {
            r.fail(format!("the truncation is not a {want}: {e}"));
        }
        let art = Artifact {
            json: Some(serde_json::to_value(&out).expect("plain data serializes")),
            dot: None,
        };
        emit(&r, art, &self.out)?;
        Ok(r.passed)
    }
}

#[derive(Args, Debug)]
pub struct EmbedCmd {
    #[command(flatten)]
    class: ClassArgs,
    /// Tower depth the endomorphisms are lifted to.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// JSON list of endomorphism tables of the seed; defaults to all of them.
    #[arg(long)]
    endos: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

/// A lifted endomorphism, comparable by value.
#[derive(PartialEq)]
enum Lift {
    Points(EndoTruncation),
    Atoms(Morphism),
}

impl Lift {
    fn then(&self, other: &Lift) -> Result<Lift> {
        match (self, other) {
            (Lift::Points(a), Lift::Points(b)) => Ok(Lift::Points(a.then(b)?)),
            (Lift::Atoms(a), Lift::Atoms(b)) => Ok(Lift::Atoms(a.then(b)?)),
            _ => unreachable!("one class per run"),
        }
    }

    fn agrees_with(&self, other: &Lift) -> bool {
        match (self, other) {
            (Lift::Points(a), Lift::Points(b)) => a.agrees_with(b),
            (Lift::Atoms(a), Lift::Atoms(b)) => a.map() == b.map(),
            _ => false,
        }
    }

    fn is_identity(&self) -> bool {
        match self {
            Lift::Points(e) => e.table.iter().all(|(x, y)| x.id == y.id),
            Lift::Atoms(m) => *m == Morphism::identity(m.source().clone()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Lift::Points(e) => serde_json::to_value(e).expect("plain data serializes"),
            Lift::Atoms(m) => json!({ "atoms": table_json(m) }),
        }
    }
}

impl EmbedCmd {
    pub fn run(self, exec: Execution) -> Result<bool> {
        let c = self.class.seed()?;
        let class = c.class();
        let mut gs = match &self.endos {
            Some(src) => load_endos(src, &c)?,
            None => all_morphisms(&c, &c, endo_kind(class)),
        };
        let id = Morphism::identity(c.clone()).with_kind(endo_kind(class))?;
        let id_at = match gs.iter().position(|g| g.map() == id.map()) {
            Some(i) => i,
            None => {
                gs.push(id);
                gs.len() - 1
            }
        };
        let lifts: Vec<Lift> = if class == ClassTag::BooleanAlgebra {
            gs.iter()
                .map(|g| Ok(Lift::Atoms(k_omega_morphism(g, self.depth)?.maps[self.depth].clone())))
                .collect::<Result<_>>()?
        } else {
            let (_, e) = embed_endomorphisms(&c, &gs, self.depth, exec)?;
            e.into_iter().map(Lift::Points).collect()
        };
        let index: HashMap<&MapData, usize> = gs.iter().enumerate().map(|(i, g)| (g.map(), i)).collect();

        let mut r = Report::new("embed-endos");
        r.line(format!("class {}, seed of size {}, depth {}", class, c.len(), self.depth));
        r.line(format!("endomorphisms {}", gs.len()));
        if !lifts[id_at].is_identity() {
            r.fail("the identity does not lift to the identity");
        }
        let (mut products, mut pairs) = (0usize, 0usize);
        for (i, g) in gs.iter().enumerate() {
            for (j, h) in gs.iter().enumerate() {
                pairs += 1;
                if i != j && lifts[i].agrees_with(&lifts[j]) {
                    r.fail(format!("endomorphisms {i} and {j} lift to the same map"));
                }
                let Some(&k) = index.get(g.then(h)?.map()) else { continue };
                products += 1;
                if !lifts[k].agrees_with(&lifts[i].then(&lifts[j])?) {
                    r.fail(format!("lift of {i} then {j} is not the product of the lifts"));
                }
            }
        }
        r.line(format!("products checked {products}"));
        r.line(format!("pairs checked for injectivity {pairs}"));
        r.set("class", class.name());
        r.set("depth", self.depth);
        r.set("endomorphisms", gs.len());
        r.set("products_checked", products);
        r.set("pairs_checked", pairs);
        let art = Artifact {
            json: Some(json!(lifts.iter().map(Lift::to_json).collect::<Vec<_>>())),
            dot: None,
        };
        emit(&r, art, &self.out)?;
        Ok(r.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Compare {
    Handcrafted,
}

#[derive(Args, Debug)]
pub struct GenericKCmd {
    /// Graph JSON (file or inline).
    #[arg(long = "in")]
    input: String,
    /// Also build K(A) directly and compare the extension types realized.
    #[arg(long)]
    compare: Option<Compare>,
    #[command(flatten)]
    out: OutArgs,
}

impl GenericKCmd {
    pub fn run(self, _exec: Execution) -> Result<bool> {
        let a = Arc::new(load_structure(&self.input)?);
        let k = generic_k(&a)?;
        let types = realized_types(&k);
        let mut r = Report::new("generic-k");
        r.line(format!("input of size {}", a.len()));
        r.line(format!("K(A) of size {}", k.object().len()));
        r.line(format!("extension types realized {}", types.len()));
        r.set("input_size", a.len());
        r.set("k_size", k.object().len());
        r.set("types_realized", types.len());
        if !realizes_all_extensions(&k)? {
            r.fail("some one-point extension is not realized over eta");
        }
        if self.compare == Some(Compare::Handcrafted) {
            let h = k_object(&a)?;
            let same = realized_types(&h) == types && h.object().len() == k.object().len();
            r.line(format!("handcrafted K(A) of size {}, agrees {same}", h.object().len()));
            r.set("handcrafted_agrees", same);
            if !same {
                r.fail("pushout and handcrafted K(A) realize different extension types");
            }
        }
        let art = Artifact {
            json: Some(k.object().to_json()),
            dot: to_dot(k.object(), "k").ok(),
        };
        emit(&r, art, &self.out)?;
        Ok(r.passed)
    }
}

#[derive(Args, Debug)]
pub struct MetricCmd {
    /// Points of the discrete seed space.
    #[arg(long, default_value_t = 2)]
    size: usize,
    /// Grid denominator: distances are multiples of 1/q in [0, 1].
    #[arg(long, default_value_t = 2)]
    q: u32,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Largest substructure checked for the extension property.
    #[arg(long, default_value_t = 1)]
    size_bound: usize,
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

impl MetricCmd {
    pub fn run(self, exec: Execution) -> Result<bool> {
        if self.q == 0 {
            return Err(Error::Contract("--q 0: the metric grid needs q >= 1".into()));
        }
        let args = ClassArgs {
            class: Some(format!("metric-q{}", self.q)),
            clique: None,
            q: None,
            seed: "empty".into(),
            budget: self.budget,
        };
        let seed = Arc::new(FiniteStructure::discrete_metric(self.q, self.size));
        let mut t = TowerHandle::with_budget(seed, args.budget()?)?;
        t.expand_to(self.depth)?;
        let mut r = Report::new("metric-demo");
        r.line(format!("discrete space of {} points on the 1/{} grid", self.size, self.q));
        r.line(format!("level sizes {}", sizes(&t)));
        r.set("q", self.q);
        r.set("size", self.size);
        r.set("level_sizes", json!(t.level_sizes()));
        for i in 0..self.depth {
            if let Err(e) = t.link(i)?.with_kind(MorphismKind::Embedding) {
                r.fail(format!("eta at level {i} is not isometric: {e}"));
            }
        }
        if self.depth >= 1 {
            let base = self.depth - 1;
            let rep = verify_extension_property(&mut t, base, self.size_bound, exec)?;
            r.line(format!(
                "extensions over subspaces of level {base} of size <= {}: {} realized",
                self.size_bound,
                rep.certificates.len()
            ));
            r.set("certificates", rep.certificates.len());
            if let Some(cx) = &rep.counterexample {
                r.fail(format!("base {:?}: {}", cx.base, cx.reason));
            }
        }
        let art = Artifact { json: Some(t.to_json()), dot: None };
        emit(&r, art, &self.out)?;
        Ok(r.passed)
    }
}

#[derive(Args, Debug)]
pub struct BergmanCmd {
    #[command(flatten)]
    class: ClassArgs,
    /// Tower level used as the truncation L.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Largest index n of the identities and words checked; the chain has depth n + 1.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// JSON list of at least n + 1 endomorphism tables of L; defaults to identities.
    #[arg(long)]
    seed_endos: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

impl BergmanCmd {
    pub fn run(self, _exec: Execution) -> Result<bool> {
        if self.n == 0 {
            return Err(Error::Contract("--n must be at least 1".into()));
        }
        let mut t = self.class.tower()?;
        let chain = build_chain(&mut t, self.depth, self.n + 1)?;
        let base = chain.base().clone();
        let maps = match &self.seed_endos {
            Some(src) => load_endos(src, &base)?,
            None => vec![Morphism::identity(base.clone()); self.n + 1],
        };
        if maps.len() < self.n + 1 {
            return Err(Error::Contract(format!(
                "{} endomorphisms given, the identities up to n = {} need {}",
                maps.len(),
                self.n,
                self.n + 1
            )));
        }
        let fs = EndoSequence::new(&base, maps)?;
        let rep = verify_distortion(&chain, &fs, self.n)?;
        let mut r = Report::new("bergman-check");
        r.line(format!("class {}, truncation level {} of size {}", t.class(), self.depth, base.len()));
        r.line(format!("chain depth {}, levels {:?}", chain.depth(), chain.level_sizes()));
        for c in &rep.counts {
            r.line(format!("{}: {} checked, {} failed", c.identity, c.checked, c.failed));
        }
        for m in &rep.mismatches {
            r.fail(m.clone());
        }
        if !rep.passed() {
            r.passed = false;
        }
        let mut words = Vec::new();
        if base.class() != ClassTag::BooleanAlgebra {
            let depths: &[usize] = if base.class() == ClassTag::Graph { &[0, 1] } else { &[0] };
            for k in 1..=self.n {
                let w = encode_word(k)?;
                let f = &fs.maps()[k - 1];
                let want: Vec<TowerAddress> = base.elements().map(|v| chain.addresses()[f.at(v) as usize]).collect();
                for &d in depths {
                    let got = evaluate_word(&mut t, &chain, &fs, &w, d)?;
                    let ok = got == want;
                    r.line(format!("word {w} (length {}) at depth {d}: {}", w.len(), if ok { "matches" } else { "differs" }));
                    if !ok {
                        r.fail(format!("word for f{k} at depth {d} does not reproduce f{k}"));
                    }
                    words.push(json!({ "n": k, "word": w.to_string(), "length": w.len(), "depth": d, "matches": ok }));
                }
            }
        } else {
            r.line("word evaluation is offered for point classes only; skipped");
        }
        r.set("class", t.class().name());
        r.set("truncation", self.depth);
        r.set("n_max", self.n);
        r.set("distortion", serde_json::to_value(&rep).expect("plain data serializes"));
        r.set("words", words);
        let art = Artifact { json: Some(r.to_json()), dot: None };
        emit(&r, art, &self.out)?;
        Ok(r.passed)
    }
}

#[derive(Args, Debug)]
pub struct ExportCmd {
    /// Tower JSON written by `build`.
    #[arg(long = "in")]
    input: String,
    /// Level drawn by `--format dot` (defaults to the top level).
    #[arg(long)]
    level: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

impl ExportCmd {
    pub fn run(self, _exec: Execution) -> Result<bool> {
        let t = TowerHandle::from_json(&load_json(&self.input)?)?;
        let top = t.depth();
        let level = self.level.unwrap_or(top);
        let mut r = Report::new("export");
        r.line(format!("class {}", t.class()));
        r.line(format!("level sizes {}", sizes(&t)));
        for (i, l) in t.levels().iter().enumerate() {
            r.line(format!("level {i}: {} elements, {} related pairs", l.len(), l.pairs().len()));
        }
        r.set("class", t.class().name());
        r.set("level_sizes", json!(t.level_sizes()));
        let body = match self.out.format {
            Format::Json => pretty(&t.to_json()),
            Format::Dot => {
                let l = t.level(level)?;
                to_dot(l, &format!("level{level}"))?
            }
            Format::ReportText => r.text(),
        };
        match &self.out.out {
            Some(path) => std::fs::write(path, body)
                .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{body}"),
        }
        if let Some(path) = &self.out.report {
            std::fs::write(path, pretty(&r.to_json()))
                .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(true)
    }
}
