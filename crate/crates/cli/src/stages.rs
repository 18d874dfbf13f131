//! Pipeline stages. Each stage reads its inputs from the run directory,
//! writes fixed-name artifacts back into it, and never modifies its inputs.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use kcgml_core::analytics::{
    assemble_report, embedding_drift, joint_projection, pagerank, procrustes_align, ranking, top_k_comparison,
    InfluenceSummary, PageRankSummary, ProjectionSummary, RankedNode, ReportParts,
};
use kcgml_core::archive::{read_graph, write_graph};
use kcgml_core::graphsage::{
    aggregation_influence, build_features, forward, sample_neighborhoods, train_unsupervised, SageTrainingTrace,
};
use kcgml_core::ingest::{build_kg, parse_contacts, parse_metadata, write_contacts, write_metadata, IngestReport};
use kcgml_core::kc::{edge_strengths, propagate_contagion, transitive_closure_step, KcReport};
use kcgml_core::node2vec::{generate_walks, train_skipgram, TrainingTrace};
use kcgml_core::synthetic::generate_synthetic;
use kcgml_core::{ContactGraph, EmbeddingMatrix, Generator, KnowledgeGraph, NodeId};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{core, io, CliError, CliResult, ExitKind};

pub const KG_RAW: &str = "kg_raw.kg";
pub const KG_KC: &str = "kg_kc.kg";
pub const CONTACTS: &str = "contacts.txt";
pub const METADATA: &str = "metadata.txt";
pub const INGEST_REPORT: &str = "ingest_report.json";
pub const KC_REPORT: &str = "kc_report.json";
pub const ANALYTICS_REPORT: &str = "analytics_report.json";

/// Distinct contact pairs before and after completion on the original
/// office dataset.
pub const REFERENCE_RAW_PAIRS: usize = 1694;
pub const REFERENCE_KC_PAIRS: usize = 1882;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Raw,
    Kc,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Raw => "raw",
            Variant::Kc => "kc",
        }
    }

    fn graph_file(self) -> &'static str {
        match self {
            Variant::Raw => KG_RAW,
            Variant::Kc => KG_KC,
        }
    }

    fn producer(self) -> &'static str {
        match self {
            Variant::Raw => "ingest",
            Variant::Kc => "complete",
        }
    }
}

pub fn walks_file(v: Variant) -> String {
    format!("walks_{}.txt", v.as_str())
}

pub fn embeddings_file(v: Variant, g: Generator) -> String {
    format!("embeddings_{}_{}.csv", v.as_str(), g.as_str())
}

pub fn features_file(v: Variant) -> String {
    format!("graphsage_features_{}.txt", v.as_str())
}

pub fn weights_file(v: Variant) -> String {
    format!("graphsage_weights_{}.txt", v.as_str())
}

pub fn training_file(v: Variant) -> String {
    format!("training_{}.json", v.as_str())
}

pub fn projection_file(g: Generator) -> String {
    format!("projection_{}.csv", g.as_str())
}

/// Stage name plus wall seconds, recorded in the manifest.
pub type Timing = (String, f64);

struct Stage<'a> {
    name: &'static str,
    out: &'a Path,
    log: &'a mut (dyn Write + Send),
}

impl Stage<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn say(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.log, "[{}] {}", self.name, line.as_ref());
    }

    fn internal(&self) -> impl Fn(std::io::Error) -> CliError {
        let stage = self.name;
        move |e| CliError::new(ExitKind::Internal, stage, e.to_string())
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        fs::create_dir_all(self.out).map_err(self.internal())?;
        fs::write(self.path(name), bytes).map_err(self.internal())
    }

    fn write_with(&self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> kcgml_core::Result<()>) -> CliResult<()> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(core(self.name))?;
        self.write_bytes(name, &buf)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let json = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::new(ExitKind::Internal, self.name, e.to_string()))?;
        self.write_bytes(name, (json + "\n").as_bytes())
    }

    fn require(&self, name: &str, producer: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        if path.is_file() {
            Ok(path)
        } else {
            Err(CliError::missing(self.name, &path, producer))
        }
    }

    fn load_graph(&self, v: Variant) -> CliResult<KnowledgeGraph> {
        let path = self.require(v.graph_file(), v.producer())?;
        let file = File::open(&path).map_err(io(self.name, &path))?;
        read_graph(BufReader::new(file)).map_err(core(self.name))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceCheck {
    pub reference_raw_pairs: usize,
    pub observed_raw_pairs: usize,
    pub raw_matches: bool,
    pub reference_kc_pairs: usize,
    pub observed_kc_pairs: Option<usize>,
    pub kc_matches: Option<bool>,
}

impl ReferenceCheck {
    pub fn new(raw: usize, kc: Option<usize>) -> Self {
        Self {
            reference_raw_pairs: REFERENCE_RAW_PAIRS,
            observed_raw_pairs: raw,
            raw_matches: raw == REFERENCE_RAW_PAIRS,
            reference_kc_pairs: REFERENCE_KC_PAIRS,
            observed_kc_pairs: kc,
            kc_matches: kc.map(|k| k == REFERENCE_KC_PAIRS),
        }
    }

    pub fn summary(&self) -> String {
        let verdict = |m: bool| if m { "match" } else { "differs" };
        let mut s = format!(
            "distinct pairs {} (reference {}: {})",
            self.observed_raw_pairs,
            self.reference_raw_pairs,
            verdict(self.raw_matches)
        );
        if let (Some(kc), Some(m)) = (self.observed_kc_pairs, self.kc_matches) {
            s += &format!(
                "; after completion {kc} (reference {}: {})",
                self.reference_kc_pairs,
                verdict(m)
            );
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IngestDocument {
    pub source: &'static str,
    #[serde(flatten)]
    pub report: IngestReport,
    /// Only for user-supplied files; informational.
    pub reference: Option<ReferenceCheck>,
}

pub fn cmd_ingest(cfg: &PipelineConfig, log: &mut (dyn Write + Send)) -> CliResult<(IngestDocument, Vec<Timing>)> {
    cfg.validate()?;
    cfg.validate_input()?;
    let start = Instant::now();
    let seeded = cfg.seeded();
    let mut stage = Stage {
        name: "ingest",
        out: &cfg.out,
        log,
    };

    // Everything is read and parsed before anything is written.
    let (contact_bytes, metadata_bytes, source) = match &seeded.synthetic {
        Some(syn) => {
            let (contacts, metadata) = generate_synthetic(syn).map_err(core("ingest"))?;
            let mut c = Vec::new();
            let mut m = Vec::new();
            write_contacts(&contacts, &mut c).map_err(core("ingest"))?;
            write_metadata(&metadata, &mut m).map_err(core("ingest"))?;
            (c, m, "synthetic")
        }
        None => {
            let cp = cfg.input.contacts.as_ref().expect("validated");
            let mp = cfg.input.metadata.as_ref().expect("validated");
            let c = fs::read(cp).map_err(io("ingest", cp))?;
            let m = fs::read(mp).map_err(io("ingest", mp))?;
            (c, m, "files")
        }
    };
    let (contacts, contact_report) = parse_contacts(contact_bytes.as_slice()).map_err(core("ingest"))?;
    let (metadata, metadata_report) = parse_metadata(metadata_bytes.as_slice()).map_err(core("ingest"))?;
    let (graph, build) = build_kg(&contacts, &metadata).map_err(core("ingest"))?;

    let reference = (source == "files").then(|| ReferenceCheck::new(build.distinct_pairs, None));
    let doc = IngestDocument {
        source,
        report: IngestReport {
            contacts: contact_report,
            metadata: metadata_report,
            graph: build,
        },
        reference,
    };

    if source == "synthetic" {
        stage.write_bytes(CONTACTS, &contact_bytes)?;
        stage.write_bytes(METADATA, &metadata_bytes)?;
    }
    stage.write_with(KG_RAW, |buf| write_graph(&graph, buf))?;
    stage.write_json(INGEST_REPORT, &doc)?;

    let g = &doc.report.graph;
    stage.say(format!(
        "{} people, {} departments, {} distinct pairs, {} contact events; {} malformed, {} self-loops, {} duplicates skipped",
        g.people,
        g.departments,
        g.distinct_pairs,
        g.contact_events,
        doc.report.contacts.malformed,
        doc.report.contacts.self_loops,
        doc.report.contacts.duplicates
    ));
    if g.metadata_only_people > 0 {
        stage.say(format!(
            "warning: {} people appear only in metadata",
            g.metadata_only_people
        ));
    }
    if let Some(r) = &doc.reference {
        stage.say(r.summary());
    }
    Ok((doc, vec![("ingest".into(), start.elapsed().as_secs_f64())]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedNode {
    pub node: NodeId,
    pub name: String,
    pub pagerank: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompleteDocument {
    #[serde(flatten)]
    pub kc: KcReport,
    /// Contagion seeds: top PageRank people on the raw graph.
    pub contagion_seeds: Vec<SeedNode>,
    pub reference: Option<ReferenceCheck>,
}

fn top_people(graph: &KnowledgeGraph, cfg: &PipelineConfig, k: usize) -> CliResult<Vec<SeedNode>> {
    let pr = pagerank(&ContactGraph::from_graph(graph), &cfg.pagerank).map_err(core("complete"))?;
    ranking(&pr.scores)
        .into_iter()
        .take(k)
        .map(|(node, score)| {
            Ok(SeedNode {
                node,
                name: graph.node(node).map_err(core("complete"))?.name.clone(),
                pagerank: score,
            })
        })
        .collect()
}

pub fn cmd_complete(cfg: &PipelineConfig, log: &mut (dyn Write + Send)) -> CliResult<(CompleteDocument, Vec<Timing>)> {
    cfg.validate()?;
    let start = Instant::now();
    let mut stage = Stage {
        name: "complete",
        out: &cfg.out,
        log,
    };
    let raw = stage.load_graph(Variant::Raw)?;

    let (closed, closure) = transitive_closure_step(&raw);
    let mut kc = edge_strengths(&closed, &cfg.strength);
    let second_pass_added_pairs = transitive_closure_step(&kc).1.inferred_pairs;

    let (seeds, contagion, raw_contagion) =
        if cfg.analysis.contagion && cfg.analysis.seed_k > 0 && raw.person_ids().next().is_some() {
            let seeds = top_people(&raw, cfg, cfg.analysis.seed_k)?;
            let ids: Vec<NodeId> = seeds.iter().map(|s| s.node).collect();
            let (with_cp, report) = propagate_contagion(&kc, &ids, &cfg.strength).map_err(core("complete"))?;
            kc = with_cp;
            let raw_weighted = edge_strengths(&raw, &cfg.strength);
            let (_, raw_report) = propagate_contagion(&raw_weighted, &ids, &cfg.strength).map_err(core("complete"))?;
            (seeds, Some(report), Some(raw_report))
        } else {
            (Vec::new(), None, None)
        };

    let reference = cfg
        .input
        .synthetic
        .is_none()
        .then(|| ReferenceCheck::new(closure.direct_pairs, Some(closure.total_pairs)));
    let doc = CompleteDocument {
        kc: KcReport {
            model: cfg.strength.clone(),
            closure,
            second_pass_added_pairs,
            contagion,
            raw_contagion,
        },
        contagion_seeds: seeds,
        reference,
    };
    stage.write_with(KG_KC, |buf| write_graph(&kc, buf))?;
    stage.write_json(KC_REPORT, &doc)?;

    let c = &doc.kc.closure;
    stage.say(format!(
        "{} -> {} contact pairs ({} inferred, growth {:.1}%), tau {} beta {}; second pass adds {}",
        c.direct_pairs,
        c.total_pairs,
        c.inferred_pairs,
        100.0 * c.growth_ratio,
        cfg.strength.tau,
        cfg.strength.beta,
        doc.kc.second_pass_added_pairs
    ));
    if let Some(r) = &doc.kc.contagion {
        stage.say(format!(
            "contagion from {} seeds reached {}, {} at risk",
            r.seeds.len(),
            r.reached,
            r.at_risk_count
        ));
    }
    if let Some(r) = &doc.reference {
        stage.say(r.summary());
    }
    Ok((doc, vec![("complete".into(), start.elapsed().as_secs_f64())]))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrainingDocument {
    pub node2vec: Option<TrainingTrace>,
    pub graphsage: Option<SageTrainingTrace>,
}

/// Variants that `embed` will process when none is named: raw always, KC
/// when its archive exists.
pub fn available_variants(cfg: &PipelineConfig) -> Vec<Variant> {
    let mut v = vec![Variant::Raw];
    if cfg.out.join(KG_KC).is_file() {
        v.push(Variant::Kc);
    }
    v
}

pub fn cmd_embed(cfg: &PipelineConfig, variants: &[Variant], log: &mut (dyn Write + Send)) -> CliResult<Vec<Timing>> {
    cfg.validate()?;
    let seeded = cfg.seeded();
    let mut stage = Stage {
        name: "embed",
        out: &cfg.out,
        log,
    };
    let mut timings = Vec::new();
    for &v in variants {
        let mut graph = stage.load_graph(v)?;
        if cfg.enable_strength_weighting {
            graph = edge_strengths(&graph, &cfg.strength);
        }
        let contacts = ContactGraph::from_graph(&graph);
        let mut training = TrainingDocument::default();

        if cfg.embedder.node2vec() {
            let start = Instant::now();
            let corpus = generate_walks(&contacts, &seeded.walks).map_err(core("embed"))?;
            stage.write_with(&walks_file(v), |buf| corpus.write_text(buf))?;
            let (emb, trace) = train_skipgram(&corpus, contacts.node_ids(), &seeded.skipgram).map_err(core("embed"))?;
            stage.write_with(&embeddings_file(v, Generator::Node2vec), |buf| emb.write_csv(buf))?;
            stage.say(format!(
                "{} node2vec: {} walks, {} dims, final epoch loss {:.4}",
                v.as_str(),
                corpus.walks.len(),
                emb.dimensions(),
                trace.epoch_losses.last().copied().unwrap_or(f64::NAN)
            ));
            training.node2vec = Some(trace);
            timings.push((format!("embed_{}_node2vec", v.as_str()), start.elapsed().as_secs_f64()));
        }
        if cfg.embedder.graphsage() {
            let start = Instant::now();
            let features = build_features(&graph);
            let (weights, hoods, trace) =
                train_unsupervised(&contacts, &features, &seeded.graphsage).map_err(core("embed"))?;
            let emb = forward(&features, &hoods, &weights, &seeded.graphsage).map_err(core("embed"))?;
            stage.write_with(&features_file(v), |buf| features.write(buf))?;
            stage.write_with(&weights_file(v), |buf| weights.write(buf))?;
            stage.write_with(&embeddings_file(v, Generator::Graphsage), |buf| emb.write_csv(buf))?;
            stage.say(format!(
                "{} graphsage: fanouts {:?}, {} dims, loss {:.4} -> {:.4}",
                v.as_str(),
                seeded.graphsage.fanouts,
                emb.dimensions(),
                trace.epoch_losses.first().copied().unwrap_or(f64::NAN),
                trace.epoch_losses.last().copied().unwrap_or(f64::NAN)
            ));
            training.graphsage = Some(trace);
            timings.push((format!("embed_{}_graphsage", v.as_str()), start.elapsed().as_secs_f64()));
        }
        stage.write_json(&training_file(v), &training)?;
    }
    Ok(timings)
}

fn load_embedding(stage: &Stage, v: Variant, g: Generator, seed: u64) -> CliResult<EmbeddingMatrix> {
    let path = stage.require(&embeddings_file(v, g), "embed")?;
    let file = File::open(&path).map_err(io(stage.name, &path))?;
    EmbeddingMatrix::read_csv(BufReader::new(file), g, seed).map_err(core(stage.name))
}

fn generators(cfg: &PipelineConfig) -> Vec<Generator> {
    let mut g = Vec::new();
    if cfg.embedder.node2vec() {
        g.push(Generator::Node2vec);
    }
    if cfg.embedder.graphsage() {
        g.push(Generator::Graphsage);
    }
    g
}

/// Config as echoed into reports: the output directory is left out so
/// reports do not depend on where a run was written.
fn config_echo(cfg: &PipelineConfig) -> CliResult<serde_json::Value> {
    let mut v = serde_json::to_value(cfg).map_err(|e| CliError::new(ExitKind::Internal, "analyze", e.to_string()))?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("out");
    }
    Ok(v)
}

pub fn cmd_analyze(
    cfg: &PipelineConfig,
    log: &mut (dyn Write + Send),
) -> CliResult<(kcgml_core::analytics::AnalyticsReport, Vec<Timing>)> {
    cfg.validate()?;
    let start = Instant::now();
    let seeded = cfg.seeded();
    let mut stage = Stage {
        name: "analyze",
        out: &cfg.out,
        log,
    };

    // Check every upstream artifact before computing anything.
    let variants: Vec<Variant> = if cfg.enable_kc {
        vec![Variant::Raw, Variant::Kc]
    } else {
        vec![Variant::Raw]
    };
    for &v in &variants {
        stage.require(v.graph_file(), v.producer())?;
    }
    let gens = generators(cfg);
    let gen_seed = |g: Generator| match g {
        Generator::Node2vec => seeded.skipgram.seed,
        Generator::Graphsage => seeded.graphsage.seed,
    };
    let mut embeddings: HashMap<(Generator, Variant), EmbeddingMatrix> = HashMap::new();
    for &g in &gens {
        for &v in &variants {
            let e = load_embedding(&stage, v, g, gen_seed(g))?;
            embeddings.insert((g, v), e);
        }
    }

    let raw = stage.load_graph(Variant::Raw)?;
    let kc = if cfg.enable_kc {
        Some(stage.load_graph(Variant::Kc)?)
    } else {
        None
    };
    let raw_contacts = ContactGraph::from_graph(&raw);
    let kc_contacts = kc.as_ref().map(ContactGraph::from_graph);

    let mut parts = ReportParts {
        config: config_echo(cfg)?,
        seeds: BTreeMap::from([
            ("global".to_owned(), cfg.seed),
            ("node2vec_walks".to_owned(), seeded.walks.seed),
            ("node2vec_skipgram".to_owned(), seeded.skipgram.seed),
            ("graphsage".to_owned(), seeded.graphsage.seed),
        ]),
        ..ReportParts::default()
    };

    let pr_raw = pagerank(&raw_contacts, &cfg.pagerank).map_err(core("analyze"))?;
    let pr_kc = match &kc_contacts {
        Some(g) => Some(pagerank(g, &cfg.pagerank).map_err(core("analyze"))?),
        None => None,
    };
    parts.pagerank = Some(PageRankSummary {
        config: cfg.pagerank.clone(),
        raw_iterations: pr_raw.iterations,
        raw_converged: pr_raw.converged,
        kc_iterations: pr_kc.as_ref().map(|p| p.iterations),
        kc_converged: pr_kc.as_ref().map(|p| p.converged),
    });
    for (name, pr) in [("raw", Some(&pr_raw)), ("kc", pr_kc.as_ref())] {
        if let Some(pr) = pr {
            if !pr.converged {
                parts.notices.push(format!(
                    "{name} PageRank stopped at {} iterations without converging",
                    pr.iterations
                ));
            }
        }
    }

    match &pr_kc {
        Some(pr_kc) => {
            let mut cmp =
                top_k_comparison(&pr_raw.scores, &pr_kc.scores, cfg.analysis.top_k).map_err(core("analyze"))?;
            cmp.label_with(&raw);
            parts.ranking = Some(cmp);
            parts.closure = Some(transitive_closure_step(&raw).1);
        }
        None => {
            parts.baseline_top = Some(
                ranking(&pr_raw.scores)
                    .into_iter()
                    .take(cfg.analysis.top_k)
                    .enumerate()
                    .map(|(i, (node, score))| RankedNode {
                        rank: i + 1,
                        node,
                        name: raw.node(node).ok().map(|n| n.name.clone()),
                        score,
                    })
                    .collect(),
            );
            parts
                .notices
                .push("completion disabled: drift and ranking comparison skipped".into());
        }
    }

    for &g in &gens {
        let raw_emb = &embeddings[&(g, Variant::Raw)];
        let mut variants_for_pca = vec![("raw", raw_emb.clone())];
        if let Some(kc_emb) = embeddings.get(&(g, Variant::Kc)) {
            let kc_emb = if g == Generator::Node2vec && cfg.analysis.align_node2vec {
                procrustes_align(kc_emb, raw_emb).map_err(core("analyze"))?
            } else {
                kc_emb.clone()
            };
            let drift = embedding_drift(raw_emb, &kc_emb).map_err(core("analyze"))?;
            stage.say(format!(
                "{g} drift: mean {:.4}, median {:.4}, max {:.4}",
                drift.mean, drift.median, drift.max
            ));
            parts.drift.insert(g.as_str().to_owned(), drift);
            variants_for_pca.push(("kc", kc_emb));
        }
        let refs: Vec<(&str, &EmbeddingMatrix)> = variants_for_pca.iter().map(|(n, e)| (*n, e)).collect();
        let joint = joint_projection(&refs).map_err(core("analyze"))?;
        let file = projection_file(g);
        stage.write_with(&file, |buf| joint.write_csv(buf))?;
        parts.projections.insert(
            g.as_str().to_owned(),
            ProjectionSummary {
                file,
                explained_variance: joint.projection.explained_variance.clone(),
                degenerate: joint.projection.degenerate,
            },
        );
    }

    if let Some(kc_g) = &kc_contacts {
        if cfg.embedder.graphsage() {
            let fan = &seeded.graphsage.fanouts;
            let before = aggregation_influence(&sample_neighborhoods(&raw_contacts, fan, seeded.graphsage.seed));
            let after = aggregation_influence(&sample_neighborhoods(kc_g, fan, seeded.graphsage.seed));
            let mean = |m: &BTreeMap<NodeId, f64>| m.values().sum::<f64>() / m.len().max(1) as f64;
            parts.influence = Some(InfluenceSummary {
                raw_mean: mean(&before),
                kc_mean: mean(&after),
                decreased: before.iter().filter(|(id, i)| after[id] < **i).count(),
            });
        }
    }

    let report = assemble_report(parts).map_err(core("analyze"))?;
    stage.write_bytes(ANALYTICS_REPORT, report.to_json().map_err(core("analyze"))?.as_bytes())?;
    if let Some(r) = &report.ranking {
        stage.say(format!(
            "top-{} PageRank overlap (Jaccard) {:.3}, max rank shift {}",
            r.k, r.jaccard, r.max_displacement
        ));
    }
    Ok((report, vec![("analyze".into(), start.elapsed().as_secs_f64())]))
}

/// Ingest, complete, embed both graphs, analyze. With completion disabled
/// only the raw graph is embedded.
pub fn cmd_pipeline(cfg: &PipelineConfig, log: &mut (dyn Write + Send)) -> CliResult<Vec<Timing>> {
    cfg.validate()?;
    cfg.validate_input()?;
    let mut timings = cmd_ingest(cfg, log)?.1;
    let variants = if cfg.enable_kc {
        timings.extend(cmd_complete(cfg, log)?.1);
        vec![Variant::Raw, Variant::Kc]
    } else {
        remove_kc_artifacts(&cfg.out);
        vec![Variant::Raw]
    };
    timings.extend(cmd_embed(cfg, &variants, log)?);
    timings.extend(cmd_analyze(cfg, log)?.1);
    Ok(timings)
}

/// Drops KC outputs of an earlier run so a baseline run directory only holds
/// baseline artifacts.
fn remove_kc_artifacts(out: &Path) {
    let Ok(entries) = fs::read_dir(out) else {
        return;
    };
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if name == KG_KC || name == KC_REPORT || name.contains("_kc.") || name.contains("_kc_") {
            let _ = fs::remove_file(entry.path());
        }
    }
}
