use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use vintage_core::synthgen::generate as synthesize;
use vintage_core::{PeriodReport, Registry, RunConfig};

use crate::failure::Failure;
use crate::render;
use crate::Format;

pub const DATA_FILE: &str = "data.csv";
pub const REPORT_FILE: &str = "report.json";
pub const METRICS_FILE: &str = "metrics.tsv";
pub const LINEAGE_FILE: &str = "lineage.tsv";
pub const SUMMARY_FILE: &str = "summary.tsv";

fn load(config: &Path) -> Result<RunConfig, Failure> {
    Ok(RunConfig::load(config)?)
}

fn out_dir(cfg: &RunConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.clone())
}

fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn generate(config: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let cfg = load(config)?;
    let spec = cfg
        .drift_spec()
        .ok_or_else(|| Failure::new("invalid-config", "generate needs a [data.synthetic] section"))?;
    let synth = synthesize(&spec).map_err(Failure::from)?;
    let dir = out_dir(&cfg, out);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(DATA_FILE);
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    synth
        .raw
        .write_csv(std::io::BufWriter::new(file))
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} rows to {}", synth.raw.n_rows(), path.display());
    Ok(())
}

pub fn replay(config: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let cfg = load(config)?;
    let table = cfg.load_data().map_err(Failure::from)?;
    let registry = Registry::open(&cfg.store).map_err(Failure::from)?;
    if !registry.is_empty().map_err(Failure::from)? {
        return Err(Failure::new(
            "store-not-empty",
            format!("replay needs an empty store, {} already has runs", cfg.store.display()),
        )
        .into());
    }
    let report =
        vintage_core::replay(&table, &cfg.split, &cfg.schedule, cfg.seed, Some(&registry)).map_err(Failure::from)?;

    let dir = out_dir(&cfg, out);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let json = serde_json::to_string_pretty(&report).context("serializing report")?;
    write(&dir, REPORT_FILE, &json)?;
    write(&dir, METRICS_FILE, &render::metrics_tsv(&report.periods))?;
    write(&dir, LINEAGE_FILE, &render::lineage_tsv(&report.periods))?;
    let summary = render::summary_tsv(&report.periods);
    write(&dir, SUMMARY_FILE, &summary)?;

    print!("{summary}");
    println!("report hash\t{}", report.content_hash());
    println!("store hash\t{}", registry.content_hash().map_err(Failure::from)?);
    Ok(())
}

/// Period reports recorded in a store, in period order.
pub fn stored_periods(registry: &Registry) -> Result<Vec<PeriodReport>, Failure> {
    let lineage = registry.champion_lineage()?;
    lineage
        .iter()
        .map(|(p, _)| registry.read_period(*p).map_err(Failure::from))
        .collect()
}

pub fn report(config: &Path, out: Option<&Path>, format: Format) -> anyhow::Result<()> {
    let cfg = load(config)?;
    let registry = Registry::open_existing(&cfg.store)
        .map_err(|e| Failure::new("empty-store", format!("no store at {}: {e}", cfg.store.display())))?;
    let periods = stored_periods(&registry)?;
    if periods.is_empty() {
        return Err(Failure::new(
            "empty-store",
            format!("store {} has no completed periods", cfg.store.display()),
        )
        .into());
    }
    let text = match format {
        Format::Delimited => render::candidates_delimited(&periods),
        Format::Table => render::candidates_table(&periods),
    };
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let name = match format {
                Format::Delimited => "report.tsv",
                Format::Table => "report.txt",
            };
            write(dir, name, &text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
