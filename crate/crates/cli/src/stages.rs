//! Pipeline stages. Every stage works on one year at a time, writes its files
//! under `<out>/<year>/<stage>/` and finishes with a stamp holding the
//! configuration hash; a rerun under the same configuration skips the stage.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context as _, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use valnet_core::community::{
    label_regions, sankey_links, CommunityRegions, Partition, SankeyLink, ScanResult,
};
use valnet_core::export::{
    circular_dot, circular_edges_csv, circular_gexf, edge_list_csv, potentials_csv, top_circular_links,
};
use valnet_core::hhd::{decompose_with, group_table, GroupBy, HodgeDecomposition, PotentialTable, Ranked};
use valnet_core::ingest::{load_io_table, Manifest};
use valnet_core::integration::{
    build_networks, community_report, select_communities, CirculationMode, IntegrationReport,
};
use valnet_core::metrics::{strength_fit, structural_report, LogBase, LogNormalFit, StructuralReport};
use valnet_core::{FlowNetwork, NetworkKind, NodeLabel};

use crate::config::RunConfig;
use crate::output::{read_cache, read_json_data, write_atomic, write_cache, Metadata, Stage};

pub const ALL_STAGES: [Stage; 5] = [
    Stage::Build,
    Stage::Communities,
    Stage::Decompose,
    Stage::Metrics,
    Stage::Integrate,
];

const MODES: [CirculationMode; 2] = [CirculationMode::NetOnly, CirculationMode::NetPlusBilateral];

/// One input year.
#[derive(Clone, Debug)]
pub struct Job {
    pub year: i32,
    pub manifest: PathBuf,
}

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub force: bool,
    hash: String,
}

impl Context {
    pub fn new(config: RunConfig, out: PathBuf, force: bool) -> Self {
        let hash = config.hash();
        Context {
            config,
            out,
            force,
            hash,
        }
    }

    pub fn stage_dir(&self, year: i32, stage: Stage) -> PathBuf {
        self.out.join(year.to_string()).join(stage.name())
    }

    fn meta(&self, stage: Stage, year: i32) -> Metadata {
        Metadata::new(stage, &self.config).with("year", year)
    }
}

/// Result for one input, labelled by year (or by manifest path when the
/// manifest itself could not be read).
pub type Outcome = (String, Result<()>);

pub struct RunSummary {
    pub outcomes: Vec<Outcome>,
}

impl RunSummary {
    pub fn success(&self) -> bool {
        self.outcomes.iter().all(|(_, r)| r.is_ok())
    }
}

/// Reads the year of every manifest. Unreadable manifests become failed
/// outcomes; duplicate years are a configuration error.
pub fn plan_jobs(manifests: &[PathBuf]) -> Result<(Vec<Job>, Vec<Outcome>)> {
    let mut jobs = Vec::new();
    let mut failed = Vec::new();
    let mut years = BTreeSet::new();
    for path in manifests {
        match Manifest::read(path) {
            Ok(m) => {
                ensure!(years.insert(m.year), "year {} is listed twice", m.year);
                jobs.push(Job {
                    year: m.year,
                    manifest: path.clone(),
                });
            }
            Err(e) => failed.push((path.display().to_string(), Err(anyhow::Error::new(e)))),
        }
    }
    jobs.sort_by_key(|j| j.year);
    Ok((jobs, failed))
}

/// Runs `stages` in order for every job, years in parallel on the current
/// rayon pool, then writes the cross-year files of the stages that ran.
pub fn run_stages(ctx: &Context, jobs: &[Job], stages: &[Stage]) -> Result<Vec<Outcome>> {
    let outcomes: Vec<(i32, Result<()>)> = jobs
        .par_iter()
        .map(|job| {
            let result = stages
                .iter()
                .try_for_each(|&s| run_stage(ctx, job, s))
                .with_context(|| format!("year {}", job.year));
            if let Err(e) = &result {
                log::error!("{e:#}");
            }
            (job.year, result)
        })
        .collect();
    let done: Vec<i32> = outcomes
        .iter()
        .filter(|(_, r)| r.is_ok())
        .map(|(y, _)| *y)
        .collect();
    if stages.contains(&Stage::Communities) {
        write_sankey(ctx, &done)?;
    }
    if stages.contains(&Stage::Integrate) {
        write_integration_series(ctx, &done)?;
    }
    Ok(outcomes.into_iter().map(|(y, r)| (y.to_string(), r)).collect())
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct Stamp {
    config_sha256: String,
    stage: String,
    stage_version: u32,
}

impl Stamp {
    fn current(ctx: &Context, stage: Stage) -> Self {
        Stamp {
            config_sha256: ctx.hash.clone(),
            stage: stage.name().to_string(),
            stage_version: stage.version(),
        }
    }
}

fn read_stamp(dir: &Path) -> Option<Stamp> {
    let text = std::fs::read_to_string(dir.join("stamp.json")).ok()?;
    serde_json::from_str(&text).ok()
}

/// Errors unless `stage` has completed for `year` under this configuration.
fn require(ctx: &Context, year: i32, stage: Stage) -> Result<()> {
    let dir = ctx.stage_dir(year, stage);
    match read_stamp(&dir) {
        None => bail!(
            "missing {} output in {}; run `valnet {}` first",
            stage.name(),
            dir.display(),
            stage.name()
        ),
        Some(s) if s != Stamp::current(ctx, stage) => bail!(
            "{} output in {} was produced under a different configuration; rerun `valnet {}`",
            stage.name(),
            dir.display(),
            stage.name()
        ),
        Some(_) => Ok(()),
    }
}

fn run_stage(ctx: &Context, job: &Job, stage: Stage) -> Result<()> {
    let dir = ctx.stage_dir(job.year, stage);
    if !ctx.force && read_stamp(&dir).is_some_and(|s| s == Stamp::current(ctx, stage)) {
        log::info!("year {}: {} is up to date", job.year, stage.name());
        return Ok(());
    }
    if dir.exists() {
        std::fs::remove_dir_all(&dir).with_context(|| format!("clearing {}", dir.display()))?;
    }
    log::info!("year {}: {}", job.year, stage.name());
    match stage {
        Stage::Build => build(ctx, job, &dir),
        Stage::Communities => communities(ctx, job.year, &dir),
        Stage::Decompose => decompose(ctx, job.year, &dir),
        Stage::Metrics => metrics(ctx, job.year, &dir),
        Stage::Integrate => integrate(ctx, job.year, &dir),
    }?;
    let stamp = serde_json::to_string_pretty(&Stamp::current(ctx, stage))? + "\n";
    write_atomic(&dir.join("stamp.json"), stamp.as_bytes())
}

fn csv_body(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Serialize, Deserialize)]
struct NetworkData {
    year: i32,
    countries: Vec<String>,
    sectors: Vec<String>,
    nodes: Vec<NodeLabel>,
    clamped_links: usize,
}

struct LoadedNetworks {
    gvan: FlowNetwork,
    ivan: FlowNetwork,
}

fn take_matrix(
    matrices: &mut BTreeMap<String, DMatrix<f64>>,
    name: &str,
    path: &Path,
) -> Result<DMatrix<f64>> {
    matrices
        .remove(name)
        .with_context(|| format!("{} has no matrix {name}", path.display()))
}

fn load_networks(ctx: &Context, year: i32) -> Result<LoadedNetworks> {
    require(ctx, year, Stage::Build)?;
    let path = ctx.stage_dir(year, Stage::Build).join("networks.bin");
    let mut cache = read_cache::<NetworkData>(&path)?;
    ensure!(cache.config_hash == ctx.hash, "{} is stale", path.display());
    let gvan = take_matrix(&mut cache.matrices, "gvan", &path)?;
    let ivan = take_matrix(&mut cache.matrices, "ivan", &path)?;
    Ok(LoadedNetworks {
        gvan: FlowNetwork::new(cache.data.nodes.clone(), gvan, NetworkKind::Gvan)?,
        ivan: FlowNetwork::new(cache.data.nodes, ivan, NetworkKind::Ivan)?,
    })
}

fn build(ctx: &Context, job: &Job, dir: &Path) -> Result<()> {
    let table = load_io_table(&job.manifest, &ctx.config.load_options())?;
    ensure!(
        table.year == job.year,
        "manifest year changed from {} to {}",
        job.year,
        table.year
    );
    let nets = build_networks(&table, &ctx.config.drop_countries)?;
    if nets.clamped_links > 0 {
        log::warn!(
            "year {}: {} negative GVAN entries clamped to zero",
            job.year,
            nets.clamped_links
        );
    }
    let meta = ctx
        .meta(Stage::Build, job.year)
        .with("nodes", nets.ivan.len())
        .with("clamped_negative_links", nets.clamped_links);
    let edges = meta
        .clone()
        .with("network", "IVAN")
        .with("links", nets.ivan.link_count())
        .csv(&edge_list_csv(&nets.ivan)?);
    write_atomic(&dir.join("ivan_edges.csv"), edges.as_bytes())?;
    let data = NetworkData {
        year: job.year,
        countries: nets.table.countries.clone(),
        sectors: nets.table.sectors.clone(),
        nodes: nets.ivan.nodes.clone(),
        clamped_links: nets.clamped_links,
    };
    write_cache(
        &dir.join("networks.bin"),
        &meta,
        &data,
        &[("gvan", &nets.gvan.weights), ("ivan", &nets.ivan.weights)],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeCommunity {
    pub community: usize,
    pub region: Option<String>,
    pub purity: f64,
    /// Indices into the IVAN.
    pub members: Vec<usize>,
}

/// Everything later stages need from community detection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionData {
    pub year: i32,
    pub k_used: usize,
    pub selected_k: Option<usize>,
    pub size_floor: usize,
    /// IVAN index of every partitioned node.
    pub nodes: Vec<usize>,
    pub labels: Vec<NodeLabel>,
    pub partition: Partition,
    pub large: Vec<LargeCommunity>,
}

#[derive(Serialize)]
struct CommunitySummary<'a> {
    k_used: usize,
    selected_k: Option<usize>,
    codelength: f64,
    num_communities: usize,
    regions: &'a [CommunityRegions],
    large: Vec<LargeSummary<'a>>,
}

#[derive(Serialize)]
struct LargeSummary<'a> {
    community: usize,
    size: usize,
    region: &'a Option<String>,
    purity: f64,
}

const SELECTION_RULE: &str =
    "largest k with at least two communities above size_floor; unthresholded IVAN when none qualifies";

fn scan_csv(scan: Option<&ScanResult>) -> Result<String> {
    let rows = scan.into_iter().flat_map(|s| {
        s.entries.iter().map(move |e| {
            vec![
                e.k.to_string(),
                e.active_nodes.to_string(),
                e.num_communities.to_string(),
                e.num_large_communities.to_string(),
                e.codelength.to_string(),
                (Some(e.k) == s.selected_k).to_string(),
            ]
        })
    });
    csv_body(
        &[
            "k",
            "active_nodes",
            "num_communities",
            "num_large_communities",
            "codelength",
            "selected",
        ],
        rows,
    )
}

fn communities(ctx: &Context, year: i32, dir: &Path) -> Result<()> {
    let nets = load_networks(ctx, year)?;
    let cfg = &ctx.config;
    let selection = select_communities(&nets.ivan, cfg.scan_options().as_ref(), &cfg.detect_options())?;
    let tp = &selection.partition;
    let labels: Vec<NodeLabel> = tp.nodes.iter().map(|&i| nets.ivan.nodes[i].clone()).collect();
    let regions = label_regions(&tp.partition, &labels, &cfg.region_map());
    let large: Vec<LargeCommunity> = tp
        .large_communities(cfg.size_floor)
        .into_iter()
        .map(|(c, members)| LargeCommunity {
            community: c,
            region: regions[c].dominant_region.clone(),
            purity: regions[c].purity,
            members,
        })
        .collect();
    let selected_k = selection.scan.as_ref().and_then(|s| s.selected_k);
    if large.len() < 2 {
        log::warn!("year {year}: {} communities above the size floor", large.len());
    }

    let meta = ctx
        .meta(Stage::Communities, year)
        .with("k_used", selection.k_used)
        .with("selection_rule", SELECTION_RULE);
    let scan_text = scan_csv(selection.scan.as_ref())?;
    write_atomic(&dir.join("scan.csv"), meta.csv(&scan_text).as_bytes())?;

    let sizes = tp.partition.sizes();
    let partition_rows = labels.iter().zip(&tp.partition.assignment).map(|(l, &c)| {
        vec![
            l.country.clone(),
            l.sector.clone(),
            c.to_string(),
            sizes[c].to_string(),
        ]
    });
    let body = csv_body(
        &["node_country", "node_sector", "community_id", "community_size"],
        partition_rows,
    )?;
    let partition_meta = meta
        .clone()
        .with("coverage", "nodes with at least one link among the top k_used");
    write_atomic(&dir.join("partition.csv"), partition_meta.csv(&body).as_bytes())?;

    let summary = CommunitySummary {
        k_used: selection.k_used,
        selected_k,
        codelength: tp.partition.codelength,
        num_communities: tp.partition.num_communities(),
        regions: &regions,
        large: large
            .iter()
            .map(|lc| LargeSummary {
                community: lc.community,
                size: lc.members.len(),
                region: &lc.region,
                purity: lc.purity,
            })
            .collect(),
    };
    write_atomic(&dir.join("communities.json"), meta.wrap_json(&summary).as_bytes())?;

    let data = PartitionData {
        year,
        k_used: selection.k_used,
        selected_k,
        size_floor: cfg.size_floor,
        nodes: tp.nodes.clone(),
        labels,
        partition: tp.partition.clone(),
        large,
    };
    write_atomic(&dir.join("partition.json"), meta.wrap_json(&data).as_bytes())
}

fn load_partition(ctx: &Context, year: i32) -> Result<PartitionData> {
    require(ctx, year, Stage::Communities)?;
    read_json_data(&ctx.stage_dir(year, Stage::Communities).join("partition.json"))
}

#[derive(Serialize)]
struct SankeyStep {
    year_from: i32,
    year_to: i32,
    links: Vec<SankeyLink>,
}

/// Node overlaps between the partitions of consecutive completed years.
fn write_sankey(ctx: &Context, years: &[i32]) -> Result<()> {
    let partitions = years
        .iter()
        .map(|&y| load_partition(ctx, y))
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<SankeyStep> = partitions
        .windows(2)
        .map(|w| SankeyStep {
            year_from: w[0].year,
            year_to: w[1].year,
            links: sankey_links(&w[0].partition, &w[0].labels, &w[1].partition, &w[1].labels),
        })
        .collect();
    let meta = Metadata::new(Stage::Communities, &ctx.config)
        .with(
            "years",
            years
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" "),
        )
        .with("community_ids", "as in each year's partition.json");
    write_atomic(&ctx.out.join("sankey.json"), meta.wrap_json(&steps).as_bytes())
}

#[derive(Serialize, Deserialize)]
struct DecompositionData {
    community: usize,
    region: Option<String>,
    members: Vec<usize>,
    nodes: Vec<NodeLabel>,
    residual: f64,
}

#[derive(Serialize)]
struct GroupRankings {
    highest_potential: Vec<Ranked>,
    lowest_potential: Vec<Ranked>,
    circulation: Vec<Ranked>,
}

impl GroupRankings {
    fn new(table: &PotentialTable, top: usize) -> Self {
        let potential = table.rank_potentials(top);
        GroupRankings {
            highest_potential: potential.highest,
            lowest_potential: potential.lowest,
            circulation: table.rank_circulation(top),
        }
    }
}

#[derive(Serialize)]
struct Rankings {
    country: GroupRankings,
    sector: GroupRankings,
    node: GroupRankings,
}

#[derive(Serialize)]
struct DecomposeSummary {
    community: usize,
    region: Option<String>,
    size: usize,
    residual: f64,
    circular_links: usize,
}

const STRENGTH_NOTE: &str = "sum over incident pairs of |circular flow|, each pair counted once";

fn node_potentials_csv(d: &HodgeDecomposition) -> Result<String> {
    let strength = d.circular_strength();
    let divergence = d.divergence();
    csv_body(
        &[
            "node_country",
            "node_sector",
            "phi",
            "circular_strength",
            "net_outflow",
        ],
        d.nodes.iter().enumerate().map(|(i, l)| {
            vec![
                l.country.clone(),
                l.sector.clone(),
                d.phi[i].to_string(),
                strength[i].to_string(),
                divergence[i].to_string(),
            ]
        }),
    )
}

fn decompose(ctx: &Context, year: i32, dir: &Path) -> Result<()> {
    let pdata = load_partition(ctx, year)?;
    let nets = load_networks(ctx, year)?;
    let cfg = &ctx.config;
    let mut summaries = Vec::new();
    for lc in &pdata.large {
        let sub = nets.ivan.subnetwork(
            &lc.members,
            NetworkKind::Subnetwork(format!("community-{}", lc.community)),
        );
        let d = decompose_with(&sub, cfg.hhd_solver);
        let cdir = dir.join(format!("community_{}", lc.community));
        let meta = ctx
            .meta(Stage::Decompose, year)
            .with("community", lc.community)
            .with("region", lc.region.as_deref().unwrap_or("none"));

        let table_meta = meta.clone().with("circular_strength", STRENGTH_NOTE);
        write_atomic(
            &cdir.join("potentials.csv"),
            table_meta.csv(&node_potentials_csv(&d)?).as_bytes(),
        )?;
        let by_country = group_table(&d, &sub, GroupBy::Country, cfg.ranking_mode);
        let by_sector = group_table(&d, &sub, GroupBy::Sector, cfg.ranking_mode);
        let group_meta = table_meta
            .clone()
            .with("ranking_mode", serde_json::to_string(&cfg.ranking_mode)?);
        write_atomic(
            &cdir.join("potentials_country.csv"),
            group_meta.csv(&potentials_csv(&by_country)?).as_bytes(),
        )?;
        write_atomic(
            &cdir.join("potentials_sector.csv"),
            group_meta.csv(&potentials_csv(&by_sector)?).as_bytes(),
        )?;
        write_atomic(
            &cdir.join("circular_edges.csv"),
            meta.csv(&circular_edges_csv(&d)?).as_bytes(),
        )?;

        let top = top_circular_links(&d, cfg.top_k_export);
        let top_meta = meta
            .clone()
            .with("links", top.links.len())
            .with("node_size", "sqrt of degree in the exported subgraph");
        write_atomic(
            &cdir.join("top_circular.gexf"),
            top_meta.gexf(&circular_gexf(&top)).as_bytes(),
        )?;
        write_atomic(
            &cdir.join("top_circular.dot"),
            top_meta.dot(&circular_dot(&top)).as_bytes(),
        )?;

        let rankings = Rankings {
            country: GroupRankings::new(&by_country, cfg.top_rank),
            sector: GroupRankings::new(&by_sector, cfg.top_rank),
            node: GroupRankings::new(&d.table(), cfg.top_rank),
        };
        write_atomic(
            &cdir.join("rankings.json"),
            group_meta.wrap_json(&rankings).as_bytes(),
        )?;

        let phi = DMatrix::from_column_slice(d.len(), 1, &d.phi);
        let data = DecompositionData {
            community: lc.community,
            region: lc.region.clone(),
            members: lc.members.clone(),
            nodes: d.nodes.clone(),
            residual: d.residual,
        };
        write_cache(
            &cdir.join("decomposition.bin"),
            &meta,
            &data,
            &[
                ("phi", &phi),
                ("weights", &d.weights),
                ("net_flow", &d.net_flow),
                ("circular", &d.circular),
                ("bilateral", &d.bilateral),
            ],
        )?;
        summaries.push(DecomposeSummary {
            community: lc.community,
            region: lc.region.clone(),
            size: d.len(),
            residual: d.residual,
            circular_links: d.positive_circular_links().len(),
        });
    }
    let meta = ctx.meta(Stage::Decompose, year);
    write_atomic(&dir.join("summary.json"), meta.wrap_json(&summaries).as_bytes())
}

fn load_decomposition(
    ctx: &Context,
    year: i32,
    community: usize,
) -> Result<(DecompositionData, HodgeDecomposition)> {
    let path = ctx
        .stage_dir(year, Stage::Decompose)
        .join(format!("community_{community}"))
        .join("decomposition.bin");
    let mut cache = read_cache::<DecompositionData>(&path)?;
    ensure!(cache.config_hash == ctx.hash, "{} is stale", path.display());
    let phi = take_matrix(&mut cache.matrices, "phi", &path)?;
    let d = HodgeDecomposition {
        nodes: cache.data.nodes.clone(),
        phi: phi.iter().copied().collect(),
        weights: take_matrix(&mut cache.matrices, "weights", &path)?,
        net_flow: take_matrix(&mut cache.matrices, "net_flow", &path)?,
        circular: take_matrix(&mut cache.matrices, "circular", &path)?,
        bilateral: take_matrix(&mut cache.matrices, "bilateral", &path)?,
        residual: cache.data.residual,
    };
    Ok((cache.data, d))
}

#[derive(Serialize)]
struct MetricsReport {
    network: &'static str,
    structural: StructuralReport,
    strength: StrengthSummary,
}

#[derive(Serialize)]
struct StrengthSummary {
    log_base: LogBase,
    in_strength: FitSummary,
    out_strength: FitSummary,
}

#[derive(Serialize)]
struct FitSummary {
    count: usize,
    mu: f64,
    sigma: f64,
}

impl FitSummary {
    fn new(fit: &LogNormalFit, base: LogBase) -> Self {
        FitSummary {
            count: fit.count,
            mu: fit.mu(base),
            sigma: fit.sigma(base),
        }
    }
}

fn metrics(ctx: &Context, year: i32, dir: &Path) -> Result<()> {
    let nets = load_networks(ctx, year)?;
    let base = ctx.config.log_base;
    let structural = structural_report(&nets.ivan)?;
    let fit = strength_fit(&nets.ivan)?;
    let report = MetricsReport {
        network: "IVAN",
        structural,
        strength: StrengthSummary {
            log_base: base,
            in_strength: FitSummary::new(&fit.in_fit, base),
            out_strength: FitSummary::new(&fit.out_fit, base),
        },
    };
    let meta = ctx
        .meta(Stage::Metrics, year)
        .with("network", "IVAN")
        .with("averages", "over nodes with a nonzero value");
    write_atomic(&dir.join("report.json"), meta.wrap_json(&report).as_bytes())?;

    let rows = [("in", &fit.in_fit), ("out", &fit.out_fit)]
        .into_iter()
        .flat_map(|(dir, f)| {
            f.ccdf
                .iter()
                .map(move |(x, p)| vec![dir.to_string(), x.to_string(), p.to_string()])
        });
    let body = csv_body(&["direction", "strength", "ccdf"], rows)?;
    write_atomic(&dir.join("strength_ccdf.csv"), meta.csv(&body).as_bytes())
}

fn integration_rows(reports: &[IntegrationReport]) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let mut totals = Vec::new();
    let mut sectoral = Vec::new();
    for r in reports {
        let region = r.region.clone().unwrap_or_default();
        totals.push(vec![
            r.year.to_string(),
            r.community.to_string(),
            region.clone(),
            r.size.to_string(),
            r.mode.as_str().to_string(),
            opt(r.index.value),
            r.index.numerator.to_string(),
            r.index.denominator.to_string(),
        ]);
        for (sector, v) in &r.sectoral {
            sectoral.push(vec![
                r.year.to_string(),
                r.community.to_string(),
                region.clone(),
                r.mode.as_str().to_string(),
                sector.clone(),
                opt(v.value),
                v.numerator.to_string(),
                v.denominator.to_string(),
            ]);
        }
    }
    (totals, sectoral)
}

const TOTAL_HEADER: [&str; 8] = [
    "year",
    "community",
    "region_label",
    "size",
    "mode",
    "E",
    "numerator",
    "denominator",
];
const SECTORAL_HEADER: [&str; 8] = [
    "year",
    "community",
    "region_label",
    "mode",
    "sector",
    "E_k",
    "numerator",
    "denominator",
];

fn write_integration_csvs(
    ctx: &Context,
    meta: Metadata,
    dir: &Path,
    reports: &[IntegrationReport],
) -> Result<()> {
    let (totals, sectoral) = integration_rows(reports);
    let meta = meta
        .with("denominator", serde_json::to_string(&ctx.config.denominator)?)
        .with("empty_E", "denominator is zero")
        .with(
            "empty_E_k",
            "fewer than two countries of the sector in the community",
        );
    write_atomic(
        &dir.join("integration.csv"),
        meta.csv(&csv_body(&TOTAL_HEADER, totals)?).as_bytes(),
    )?;
    write_atomic(
        &dir.join("sectoral.csv"),
        meta.csv(&csv_body(&SECTORAL_HEADER, sectoral)?).as_bytes(),
    )
}

fn integrate(ctx: &Context, year: i32, dir: &Path) -> Result<()> {
    require(ctx, year, Stage::Decompose)?;
    let pdata = load_partition(ctx, year)?;
    let nets = load_networks(ctx, year)?;
    let mut reports = Vec::new();
    for lc in &pdata.large {
        let (data, d) = load_decomposition(ctx, year, lc.community)?;
        ensure!(
            data.members == lc.members,
            "community {} changed since decomposition",
            lc.community
        );
        for mode in MODES {
            reports.push(community_report(
                year,
                lc.community,
                lc.region.clone(),
                &d,
                &nets.gvan,
                &lc.members,
                mode,
                ctx.config.denominator,
            )?);
        }
    }
    let meta = ctx.meta(Stage::Integrate, year);
    write_atomic(&dir.join("integration.json"), meta.wrap_json(&reports).as_bytes())?;
    write_integration_csvs(ctx, meta, dir, &reports)
}

/// Concatenates the per-year integration results of completed years.
fn write_integration_series(ctx: &Context, years: &[i32]) -> Result<()> {
    let mut all = Vec::new();
    for &year in years {
        require(ctx, year, Stage::Integrate)?;
        let path = ctx.stage_dir(year, Stage::Integrate).join("integration.json");
        let reports: Vec<IntegrationReport> = read_json_data(&path)?;
        all.extend(reports);
    }
    let meta = Metadata::new(Stage::Integrate, &ctx.config).with(
        "years",
        years
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" "),
    );
    write_integration_csvs(ctx, meta, &ctx.out, &all)
}
