//! Text renderings of period reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use vintage_core::orchestrator::CandidateOutcome;
use vintage_core::{Family, MetricReport, PeriodReport, Strategy};

const METRICS: [(&str, fn(&MetricReport) -> f64); 4] = [
    ("auc", |m| m.auc),
    ("ks", |m| m.ks),
    ("f1", |m| m.f1),
    ("3dcr", |m| m.three_decile_capture),
];

fn f4(v: f64) -> String {
    format!("{v:.4}")
}

fn tsv(rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&r.join("\t"));
        s.push('\n');
    }
    s
}

/// Left-aligned first column, right-aligned rest.
fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut s = String::new();
    for r in rows {
        let mut line = String::new();
        for (c, cell) in r.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[c]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        s.push_str(line.trim_end());
        s.push('\n');
    }
    s
}

/// One row per period: champion and baseline on PROD, and their difference.
pub fn metrics_tsv(periods: &[PeriodReport]) -> String {
    let mut header = vec!["period", "champion", "run_id", "promoted", "otv_score", "prod_rows"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    for prefix in ["champion", "baseline", "delta"] {
        for (m, _) in METRICS {
            header.push(format!("{prefix}_{m}"));
        }
    }
    header.push("champion_psi".into());
    let mut rows = vec![header];
    for p in periods {
        let mut r = vec![
            p.period.to_string(),
            p.champion.clone(),
            p.champion_run.to_string(),
            p.promoted.to_string(),
            f4(p.champion_score),
            p.champion_prod.rows.to_string(),
        ];
        for (_, get) in METRICS {
            r.push(f4(get(&p.champion_prod)));
        }
        for (_, get) in METRICS {
            r.push(f4(get(&p.baseline_prod)));
        }
        for (_, get) in METRICS {
            r.push(format!("{:+.4}", get(&p.champion_prod) - get(&p.baseline_prod)));
        }
        r.push(p.champion_prod.psi.map_or_else(|| "-".into(), f4));
        rows.push(r);
    }
    tsv(&rows)
}

pub fn lineage_tsv(periods: &[PeriodReport]) -> String {
    let mut rows = vec![vec!["period".to_string(), "champion".into(), "run_id".into()]];
    for p in periods {
        rows.push(vec![
            p.period.to_string(),
            p.champion.clone(),
            p.champion_run.to_string(),
        ]);
    }
    tsv(&rows)
}

/// Final-period champion, baseline and delta for each headline metric.
pub fn summary_tsv(periods: &[PeriodReport]) -> String {
    let Some(last) = periods.last() else {
        return String::new();
    };
    let mut rows = vec![
        vec![
            "final_period".to_string(),
            last.period.to_string(),
            String::new(),
            String::new(),
        ],
        vec![
            "champion".into(),
            last.champion.clone(),
            "baseline".into(),
            last.baseline.clone(),
        ],
        vec!["metric".into(), "champion".into(), "baseline".into(), "delta".into()],
    ];
    for (name, get) in METRICS {
        let (c, b) = (get(&last.champion_prod), get(&last.baseline_prod));
        rows.push(vec![name.to_uppercase(), f4(c), f4(b), format!("{:+.4}", c - b)]);
    }
    tsv(&rows)
}

fn strategy_of(c: &CandidateOutcome) -> Strategy {
    c.window.strategy
}

fn status(c: &CandidateOutcome) -> &'static str {
    match (&c.error, c.objective) {
        (Some(_), _) => "failed",
        (None, Some(_)) => "ok",
        (None, None) => "skipped",
    }
}

pub const CANDIDATE_HEADER: [&str; 10] = [
    "period",
    "candidate",
    "family",
    "strategy",
    "status",
    "otv_auc",
    "otv_ks",
    "otv_f1",
    "otv_3dcr",
    "otv_psi",
];

/// Long form: a candidate block with one row per trained candidate, a blank
/// line, then a champion block with one row per period.
pub fn candidates_delimited(periods: &[PeriodReport]) -> String {
    let mut rows = vec![CANDIDATE_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for p in periods {
        for c in &p.candidates {
            let mut r = vec![
                p.period.to_string(),
                c.candidate.clone(),
                c.family.to_string(),
                strategy_of(c).code().to_string(),
                status(c).to_string(),
            ];
            match &c.otv {
                Some(m) => {
                    r.extend(METRICS.iter().map(|(_, get)| f4(get(m))));
                    r.push(m.psi.map_or_else(|| "-".into(), f4));
                }
                None => r.extend(std::iter::repeat("-".to_string()).take(5)),
            }
            rows.push(r);
        }
    }
    let mut s = tsv(&rows);
    s.push('\n');
    let mut champ = vec![
        ["period", "champion", "run_id", "prod_auc", "baseline_auc", "delta_auc"]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>(),
    ];
    for p in periods {
        champ.push(vec![
            p.period.to_string(),
            p.champion.clone(),
            p.champion_run.to_string(),
            f4(p.champion_prod.auc),
            f4(p.baseline_prod.auc),
            format!("{:+.4}", p.uplift.auc),
        ]);
    }
    s.push_str(&tsv(&champ));
    s
}

/// One OTV matrix (metric by period) per strategy and family, then the
/// champion and baseline PROD rows.
pub fn candidates_table(periods: &[PeriodReport]) -> String {
    let mut groups: BTreeMap<(Strategy, Family), BTreeMap<u32, &CandidateOutcome>> = BTreeMap::new();
    for p in periods {
        for c in &p.candidates {
            groups
                .entry((strategy_of(c), c.family))
                .or_default()
                .insert(p.period, c);
        }
    }
    let header: Vec<String> = std::iter::once(String::new())
        .chain(periods.iter().map(|p| format!("M{}", p.period + 1)))
        .collect();

    let mut s = String::new();
    for ((strategy, family), by_period) in &groups {
        let _ = writeln!(s, "{family}^{} (OTV)", strategy.code());
        let mut rows = vec![header.clone()];
        for (name, get) in METRICS {
            let mut r = vec![name.to_uppercase()];
            for p in periods {
                r.push(match by_period.get(&p.period) {
                    Some(c) => c.otv.as_ref().map_or_else(|| status(c).to_string(), |m| f4(get(m))),
                    None => "-".into(),
                });
            }
            rows.push(r);
        }
        s.push_str(&aligned(&rows));
        s.push('\n');
    }

    s.push_str("Champion (PROD)\n");
    let mut rows = vec![header];
    let mut names = vec!["champion".to_string()];
    let mut champ = vec!["champion AUC".to_string()];
    let mut base = vec!["baseline AUC".to_string()];
    let mut delta = vec!["delta AUC".to_string()];
    for p in periods {
        names.push(p.champion.clone());
        champ.push(f4(p.champion_prod.auc));
        base.push(f4(p.baseline_prod.auc));
        delta.push(format!("{:+.4}", p.uplift.auc));
    }
    rows.extend([names, champ, base, delta]);
    s.push_str(&aligned(&rows));
    s
}
