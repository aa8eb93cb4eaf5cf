//! The six commands: thin adapters from resolved configuration to core
//! routines, and from their reports to JSON records. Each record's
//! `params` map carries the canonical resolved configuration.

use crate::config::Resolved;
use bohrdiff_core::bohr::dense_upto;
use bohrdiff_core::construction::{
    density_report, difference_threshold_brute, verify_disjointness, verify_shifted_avoidance,
    ConstructionParams,
};
use bohrdiff_core::hamming::{enumerate_ball, Ball};
use bohrdiff_core::partition::{
    count_cell, group_count, verify_shift_lemma, CellLabel, CountConfig, PartitionSpec,
    VerifyMode,
};
use bohrdiff_core::report::CheckRecord;
use bohrdiff_core::{Error, FieldSubset, GroupElement, Prime, Result};
use std::collections::HashSet;

const DEFAULT_BUDGET: u64 = 1 << 24;
const DEFAULT_SAMPLES: u64 = 10_000;

pub fn dispatch(cfg: &Resolved) -> Result<Vec<CheckRecord>> {
    match cfg.command {
        "verify-lemmas" => verify_lemmas(cfg),
        "build" => build(cfg),
        "check-construction" => check_construction(cfg),
        "bohr-density" => bohr_density(cfg),
        "count" => count(cfg),
        "brute-threshold" => brute_threshold(cfg),
        other => unreachable!("unmapped command {other}"),
    }
}

fn verify_lemmas(cfg: &Resolved) -> Result<Vec<CheckRecord>> {
    let p = prime(cfg)?;
    let spec = PartitionSpec::parse(p, require(&cfg.spec, "spec", cfg.command)?)?;
    let shifts = parse_u64_list(require(&cfg.shifts, "shifts", cfg.command)?, "shifts")?;
    let mode = mode(cfg)?;
    let report = verify_shift_lemma(&spec, &shifts, mode)?;
    Ok(report
        .parts
        .iter()
        .map(|part| {
            with_mode(CheckRecord::new(cfg.command, part.tag), mode)
                .with_outcome(part)
                .param("p", p)
                .param("spec", spec_text(&spec))
                .param("shifts", u64_list_text(&shifts))
        })
        .collect())
}

fn build(cfg: &Resolved) -> Result<Vec<CheckRecord>> {
    let params = construction_params(cfg)?;
    let report = density_report(&params, &CountConfig::default());
    let vacuous = params.vacuous_levels();
    Ok(report
        .levels
        .iter()
        .map(|ld| {
            construction_record(cfg, &params, "level-density")
                .mode("exact")
                .param("level", ld.level + 1)
                .exact("scale", ld.scale)
                .exact("cell", &ld.cell)
                .exact("members", &ld.members)
                .exact("group", &ld.group)
                .exact("concat_bound", &ld.concat_bound)
                .exact("fraction", ld.fraction)
                .exact("exact", ld.exact)
                .exact("vacuous", vacuous.contains(&ld.level))
        })
        .collect())
}

fn check_construction(cfg: &Resolved) -> Result<Vec<CheckRecord>> {
    let params = construction_params(cfg)?;
    let mode = mode(cfg)?;
    let report = verify_disjointness(&params, mode)?;
    let mut records: Vec<CheckRecord> = report
        .checks
        .iter()
        .map(|check| {
            with_mode(construction_record(cfg, &params, check.tag), mode)
                .with_outcome(check)
                .exact("coverage", report.coverage)
                .exact("a_empty", report.a_empty)
        })
        .collect();
    // The shifted family needs margin headroom for two reductions; check
    // it whenever the parameters allow.
    if params.levels().iter().all(|lv| 2 * lv.radius < lv.margin) {
        let shifted = verify_shifted_avoidance(&params, mode)?;
        records.extend(shifted.checks.iter().map(|check| {
            with_mode(construction_record(cfg, &params, check.tag), mode)
                .with_outcome(check)
                .exact("coverage", shifted.coverage)
                .exact("a_empty", shifted.a_empty)
        }));
    }
    Ok(records)
}

fn bohr_density(cfg: &Resolved) -> Result<Vec<CheckRecord>> {
    let p = prime(cfg)?;
    let scale = require_value(cfg.scale, "scale", cfg.command)?;
    let dmax = require_value(cfg.dmax, "dmax", cfg.command)?;
    let balls_text = require(&cfg.balls, "balls", cfg.command)?;
    let budget = cfg.budget.unwrap_or(DEFAULT_BUDGET);

    let mut members: Vec<GroupElement> = Vec::new();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    for part in balls_text.split(',') {
        let (n, k) = part
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("ball {part:?}: expected scale:radius")))?;
        let n: u32 = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad scale in ball {part:?}")))?;
        let k: u64 = k
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad radius in ball {part:?}")))?;
        if n > scale {
            return Err(Error::Parse(format!(
                "ball scale {n} exceeds the ambient scale {scale}"
            )));
        }
        for u in enumerate_ball(p, Ball::new(n, k), budget)? {
            let v = u.add_constant(1).embed(scale);
            if seen.insert(v.to_digits()) {
                members.push(v);
            }
        }
    }
    let report = dense_upto(p, scale, &members, dmax, budget)?;
    let mut rec = CheckRecord::new(cfg.command, "coset-coverage")
        .mode("exhaustive")
        .param("p", p)
        .param("scale", scale)
        .param("dmax", dmax)
        .param("balls", balls_text)
        .param("budget", budget)
        .exact("members", members.len())
        .exact("dense", report.dense);
    rec.trials = report.systems_checked;
    rec.violations = u64::from(!report.dense);
    rec.witnesses.extend(report.witness);
    Ok(vec![rec])
}

fn count(cfg: &Resolved) -> Result<Vec<CheckRecord>> {
    let p = prime(cfg)?;
    let spec = PartitionSpec::parse(p, require(&cfg.spec, "spec", cfg.command)?)?;
    let cell_text = cfg.cell.as_deref().unwrap_or("0");
    let label = match cell_text {
        "z" | "Z" => CellLabel::Z,
        x => {
            let x: u64 = x
                .parse()
                .map_err(|_| Error::Parse(format!("cell must be an index or z (got {x:?})")))?;
            if x >= p.get() {
                return Err(Error::Parse(format!("cell index {x} not below {p}")));
            }
            CellLabel::Cell(x as u8)
        }
    };
    let counts = CountConfig::default();
    let tag = match label {
        CellLabel::Cell(_) => "cell-size",
        CellLabel::Z => "remainder-size",
    };
    Ok(vec![CheckRecord::new(cfg.command, tag)
        .mode("exact")
        .param("p", p)
        .param("spec", spec_text(&spec))
        .param("cell", label)
        .exact("count", count_cell(&spec, label, &counts))
        .exact("group", group_count(p, spec.scale(), &counts))])
}

fn brute_threshold(cfg: &Resolved) -> Result<Vec<CheckRecord>> {
    let p = prime(cfg)?;
    let scale = require_value(cfg.scale, "scale", cfg.command)?;
    let mode = mode(cfg)?;
    let report = difference_threshold_brute(p, scale, mode)?;
    Ok(report
        .checks
        .iter()
        .map(|check| {
            with_mode(CheckRecord::new(cfg.command, check.tag), mode)
                .with_outcome(check)
                .param("p", p)
                .param("scale", scale)
                .exact("group", report.group)
                .exact("min_size", report.min_size)
                .exact("coverage", report.coverage)
        })
        .collect())
}

fn prime(cfg: &Resolved) -> Result<Prime> {
    Prime::new(require_value(cfg.p, "p", cfg.command)?)
}

fn require<'a>(value: &'a Option<String>, key: &str, command: &str) -> Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| Error::Parse(format!("{command} requires --{key}")))
}

fn require_value<T: Copy>(value: Option<T>, key: &str, command: &str) -> Result<T> {
    value.ok_or_else(|| Error::Parse(format!("{command} requires --{key}")))
}

fn mode(cfg: &Resolved) -> Result<VerifyMode> {
    match cfg.mode.as_deref().unwrap_or("exhaustive") {
        "exhaustive" => Ok(VerifyMode::Exhaustive {
            budget: cfg.budget.unwrap_or(DEFAULT_BUDGET),
        }),
        "sampled" => Ok(VerifyMode::Sampled {
            trials: cfg.samples.unwrap_or(DEFAULT_SAMPLES),
            seed: cfg.seed.unwrap_or(0),
        }),
        other => Err(Error::Parse(format!(
            "mode must be exhaustive or sampled (got {other:?})"
        ))),
    }
}

fn with_mode(rec: CheckRecord, mode: VerifyMode) -> CheckRecord {
    match mode {
        VerifyMode::Exhaustive { budget } => rec.mode("exhaustive").param("budget", budget),
        VerifyMode::Sampled { trials, seed } => rec
            .mode("sampled")
            .param("samples", trials)
            .param("seed", seed),
    }
}

fn parse_u64_list(text: &str, key: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{key}: bad entry {part:?}")))
        })
        .collect()
}

fn construction_params(cfg: &Resolved) -> Result<ConstructionParams> {
    let mut params = match &cfg.preset {
        Some(name) => {
            if cfg.p.is_some() || cfg.spec.is_some() || cfg.shifts.is_some() {
                return Err(Error::Parse(
                    "give either --preset or --p/--spec/--shifts, not both".into(),
                ));
            }
            ConstructionParams::preset(name)?
        }
        None => {
            let p = prime(cfg)?;
            let spec = PartitionSpec::parse(p, require(&cfg.spec, "spec", cfg.command)?)?;
            let shifts = parse_u64_list(require(&cfg.shifts, "shifts", cfg.command)?, "shifts")?;
            if shifts.len() != spec.depth() {
                return Err(Error::Parse(format!(
                    "need one shift radius per level ({} levels, {} radii)",
                    spec.depth(),
                    shifts.len()
                )));
            }
            let levels: Vec<(u32, u64, u64)> = spec
                .levels()
                .iter()
                .zip(&shifts)
                .map(|(lv, &k)| (lv.scale, lv.margin, k))
                .collect();
            ConstructionParams::new(p, &levels)?
        }
    };
    if let Some(e_text) = &cfg.e {
        let e = FieldSubset::from_members(params.prime(), parse_u64_list(e_text, "e")?)?;
        let levels: Vec<(u32, u64, u64)> = params
            .levels()
            .iter()
            .map(|lv| (lv.scale, lv.margin, lv.radius))
            .collect();
        params = ConstructionParams::with_residues(params.prime(), &levels, e)?;
    }
    if let Some(level) = cfg.level {
        if level < 1 || level > params.depth() {
            return Err(Error::Parse(format!(
                "level {level} out of range 1..={}",
                params.depth()
            )));
        }
        params = params.truncate(level);
    }
    Ok(params)
}

fn construction_record(cfg: &Resolved, params: &ConstructionParams, tag: &str) -> CheckRecord {
    let shifts: Vec<u64> = params.radii().to_vec();
    let mut rec = CheckRecord::new(cfg.command, tag)
        .param("p", params.prime())
        .param("spec", spec_text(params.spec()))
        .param("shifts", u64_list_text(&shifts))
        .param("e", residues_text(params.e()))
        .param("level", params.depth());
    if let Some(name) = &cfg.preset {
        rec = rec.param("preset", name);
    }
    rec
}

fn spec_text(spec: &PartitionSpec) -> String {
    let parts: Vec<String> = spec
        .levels()
        .iter()
        .map(|lv| format!("{}:{}", lv.scale, lv.margin))
        .collect();
    parts.join(",")
}

fn u64_list_text(values: &[u64]) -> String {
    let parts: Vec<String> = values.iter().map(u64::to_string).collect();
    parts.join(",")
}

fn residues_text(e: FieldSubset) -> String {
    let parts: Vec<String> = e.iter().map(|x| x.to_string()).collect();
    parts.join(",")
}
