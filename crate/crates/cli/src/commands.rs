//! Subcommand handlers. Each returns a [`Report`].

use std::fmt;
use std::path::Path;

use bcsec_core::bounds::{
    self, prop1_region, prop2_inner_region, prop3_outer_region, theorem2_region, Affine, AuxSpec, BoundId,
    RateRegionSample,
};
use bcsec_core::chanfile::SpecFile;
use bcsec_core::example::{reproduce_example, Cardinalities, ExampleChannel};
use bcsec_core::fme::fixtures::{fixture, run_fixture, FIXTURES};
use bcsec_core::fme::{
    eliminate_all, parse_system, project, region_equal, remove_redundant, ComparisonMode, InequalitySystem,
    RegionComparison,
};
use bcsec_core::orderings::{check_degraded, check_less_noisy, check_more_capable, OrderingVerdict, Witness};
use bcsec_core::prob::{ConditionalPmf, FactoredDistribution, JointPmf, Pmf};
use bcsec_core::search::SearchBudget;
use bcsec_core::sim::{
    lemma1_experiment, run_experiment, Caps, ExperimentConfig, ExperimentRow, Lemma1Stats, TypicalityParams,
};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::report::Report;
use crate::{BoundArgs, FmeArgs, InfoArgs, OrderingArgs, RegionArgs, ReproArgs, SearchArgs, SimulateArgs};

#[derive(Debug)]
pub enum CliError {
    Core(bcsec_core::Error),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_cap_exceeded() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(m) => f.write_str(m),
        }
    }
}

impl From<bcsec_core::Error> for CliError {
    fn from(e: bcsec_core::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parse errors keep their line numbers and gain the file name.
fn in_file<T>(path: &Path, r: bcsec_core::Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        bcsec_core::Error::Parse { .. } => CliError::Input(format!("{}: {e}", path.display())),
        other => CliError::Core(other),
    })
}

fn load_spec(path: &Path) -> Result<SpecFile> {
    in_file(path, SpecFile::parse(&read(path)?))
}

fn load_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    toml::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn require_seed(s: &SearchArgs, what: &str) -> Result<SearchBudget> {
    let seed = s
        .seed
        .ok_or_else(|| CliError::Input(format!("{what} is randomized; pass --seed")))?;
    Ok(SearchBudget::new(s.grid, s.restarts, seed))
}

fn dist_text(d: &FactoredDistribution) -> Result<String> {
    let mut f = SpecFile::default();
    f.add_dist("argmax", d.clone())?;
    Ok(f.to_text())
}

fn table_text(c: &ConditionalPmf) -> String {
    (0..c.rows())
        .map(|r| {
            let row: Vec<String> = c.row(r).iter().map(|v| format!("{v:.6}")).collect();
            format!("  {}", row.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Serialize)]
struct ChannelInfo {
    name: String,
    input: String,
    output: String,
    inputs: usize,
    outputs: usize,
    input_law: &'static str,
    mutual_information: f64,
    output_entropy: f64,
    noise_entropy: f64,
}

pub fn info(a: &InfoArgs) -> Result<Report> {
    let spec = load_spec(&a.file)?;
    let dist = match &a.dist {
        Some(n) => Some(spec.dist(n)?),
        None => spec.pick_dist(None).ok(),
    };
    let mut out = Vec::new();
    for (name, c) in &spec.channels {
        let (law, px) = match dist.filter(|d| d.joint().has_axis(&c.input)) {
            Some(d) => ("dist", d.joint().marginal_pmf(&c.input)?),
            None => ("uniform", Pmf::uniform(c.pmf.rows())),
        };
        let j = JointPmf::from_pmf(c.input.clone(), &px).attach_channel(&c.input, &c.output, &c.pmf)?;
        out.push(ChannelInfo {
            name: name.clone(),
            input: c.input.clone(),
            output: c.output.clone(),
            inputs: c.pmf.rows(),
            outputs: c.pmf.cols(),
            input_law: law,
            mutual_information: j.mutual_information(&[&c.input], &[&c.output])?,
            output_entropy: j.entropy(&[&c.output])?,
            noise_entropy: j.conditional_entropy(&[&c.output], &[&c.input])?,
        });
    }
    let mut r = Report::new(&out);
    r.csv_row([
        "channel",
        "input",
        "output",
        "input_law",
        "mutual_information",
        "output_entropy",
        "noise_entropy",
    ]);
    for c in &out {
        r.line(format!(
            "{}: {} ({}) -> {} ({}), {} input: I = {:.10}, H(out) = {:.10}, H(out|in) = {:.10}",
            c.name,
            c.input,
            c.inputs,
            c.output,
            c.outputs,
            c.input_law,
            c.mutual_information,
            c.output_entropy,
            c.noise_entropy
        ));
        r.csv_row([
            c.name.clone(),
            c.input.clone(),
            c.output.clone(),
            c.input_law.to_string(),
            c.mutual_information.to_string(),
            c.output_entropy.to_string(),
            c.noise_entropy.to_string(),
        ]);
    }
    for (name, d) in &spec.dists {
        r.line(format!("dist {name}: pattern {}", d.pattern()));
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RelationArg {
    Degraded,
    LessNoisy,
    MoreCapable,
    All,
}

fn verdict_lines(r: &mut Report, v: &OrderingVerdict) {
    let name = serde_json::to_value(v.relation).expect("relation");
    let holds = serde_json::to_value(v.holds).expect("holds");
    let name = name.as_str().unwrap_or_default();
    let holds = holds.as_str().unwrap_or_default();
    r.line(format!("{name}: {holds}"));
    if let Some(m) = v.margin {
        r.line(format!("  margin = {m:.10}"));
    }
    match &v.witness {
        Some(Witness::Channel(w)) => {
            r.line(format!(
                "  witness channel ({}):",
                if v.exact { "exact" } else { "float" }
            ));
            r.line(table_text(w));
        }
        Some(Witness::Distribution(d)) => {
            r.line("  counterexample distribution:");
            for f in d.factors() {
                let t: Vec<&str> = f.targets.iter().map(|a| a.name.as_str()).collect();
                r.line(format!("  p({} | {})", t.join(","), f.given.join(",")));
                r.line(table_text(&f.table));
            }
        }
        None => {}
    }
    r.csv_row([
        name.to_string(),
        holds.to_string(),
        v.margin.map(|m| m.to_string()).unwrap_or_default(),
        v.exact.to_string(),
    ]);
}

pub fn ordering(a: &OrderingArgs) -> Result<Report> {
    let spec = load_spec(&a.file)?;
    let y = spec.channel(&a.y)?;
    let z = spec.channel(&a.z)?;
    let mut verdicts = Vec::new();
    let wants = |rel| a.relation == rel || a.relation == RelationArg::All;
    if wants(RelationArg::Degraded) {
        verdicts.push(check_degraded(y, z)?);
    }
    if wants(RelationArg::LessNoisy) || wants(RelationArg::MoreCapable) {
        let budget = require_seed(&a.search, "the less-noisy and more-capable searches")?;
        if wants(RelationArg::LessNoisy) {
            verdicts.push(check_less_noisy(y, z, a.aux_card, &budget)?);
        }
        if wants(RelationArg::MoreCapable) {
            verdicts.push(check_more_capable(y, z, &budget)?);
        }
    }
    let mut r = Report::new(&verdicts);
    r.csv_row(["relation", "holds", "margin", "exact"]);
    r.line(format!("{} versus {}", a.y, a.z));
    for v in &verdicts {
        verdict_lines(&mut r, v);
    }
    Ok(r)
}

pub fn bound(a: &BoundArgs) -> Result<Report> {
    let spec = load_spec(&a.file)?;
    let id = BoundId::parse(&a.id)?;
    let model = spec.model()?;
    if a.evaluate {
        let d = spec.pick_dist(a.dist.as_deref())?;
        let value = bounds::evaluate(id, d, &model)?;
        let mut r = Report::new(&json!({ "bound": id, "value": value, "admissible": value.is_some() }));
        match value {
            Some(v) => r.line(format!("{} = {v:.10}", id.name())),
            None => r.line(format!("{}: distribution is not admissible", id.name())),
        }
        r.csv_row(["bound", "value"]);
        r.csv_row([id.name().to_string(), value.map(|v| v.to_string()).unwrap_or_default()]);
        return Ok(r);
    }
    let budget = require_seed(&a.search, "maximization")?;
    let aux = AuxSpec {
        q: a.q,
        u: a.u,
        u3: a.u3,
        v: a.v,
        v0: a.v0,
        v1: a.v1,
        v2: a.v2,
    };
    let res = bounds::maximize(id, &aux, &model, &budget)?;
    let argmax = dist_text(&res.argmax)?;
    if let Some(p) = &a.argmax_out {
        write_file(p, &argmax)?;
    }
    let mut r = Report::new(&res);
    r.line(format!("{} >= {:.10}", id.name(), res.value));
    r.line(format!(
        "pattern {}, {} restarts, {} evaluations, seed {}",
        res.pattern, res.restarts, res.evaluations, budget.seed
    ));
    r.line("argmax:");
    r.human.push_str(&argmax);
    r.csv_row(["bound", "value", "restarts", "evaluations", "seed"]);
    r.csv_row([
        id.name().to_string(),
        res.value.to_string(),
        res.restarts.to_string(),
        res.evaluations.to_string(),
        budget.seed.to_string(),
    ]);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegionKind {
    Theorem2,
    Prop1,
    Prop2Inner,
    Prop3Outer,
}

fn affine_text(a: &Affine) -> String {
    let mut s = format!("{:.10}", a.constant);
    for (v, c) in &a.terms {
        let sign = if *c < 0.0 { '-' } else { '+' };
        s.push_str(&format!(" {sign} {}*{v}", c.abs()));
    }
    s
}

fn parse_point(text: &str) -> Result<Vec<(String, f64)>> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("expected NAME=VALUE, found `{p}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("`{}` is not a number", v.trim())))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

pub fn region(a: &RegionArgs) -> Result<Report> {
    let spec = load_spec(&a.file)?;
    let d = spec.pick_dist(a.dist.as_deref())?;
    let sample: Option<RateRegionSample> = match a.kind {
        RegionKind::Theorem2 => theorem2_region(d, &spec.three_receiver()?)?,
        RegionKind::Prop1 => Some(prop1_region(d, &spec.three_receiver()?)?),
        RegionKind::Prop2Inner => Some(prop2_inner_region(d, &spec.multilevel()?)?),
        RegionKind::Prop3Outer => Some(prop3_outer_region(d, &spec.multilevel()?)?),
    };
    let Some(sample) = sample else {
        let mut r = Report::new(&json!({ "admissible": false }));
        r.line("distribution is not admissible for this region");
        r.csv_row(["admissible"]);
        r.csv_row(["false"]);
        return Ok(r);
    };
    let point = a.point.as_deref().map(parse_point).transpose()?;
    let member = match &point {
        Some(p) => {
            let refs: Vec<(&str, f64)> = p.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            Some((sample.contains(&refs)?, sample.contains_strict(&refs)?))
        }
        None => None,
    };
    let mut r = Report::new(&json!({
        "admissible": true,
        "region": sample,
        "contains": member.map(|m| m.0),
        "contains_strict": member.map(|m| m.1),
    }));
    r.csv_row(["label", "lhs", "relation", "rhs"]);
    for row in &sample.rows {
        let lhs: Vec<String> = row
            .lhs
            .iter()
            .map(|(v, c)| if *c == 1.0 { v.clone() } else { format!("{c}*{v}") })
            .collect();
        let rhs: Vec<String> = row.rhs.iter().map(affine_text).collect();
        let rhs = if rhs.len() == 1 {
            rhs[0].clone()
        } else {
            format!("max{{{}}}", rhs.join(", "))
        };
        let rel = if row.strict { "<" } else { "<=" };
        r.line(format!("{}: {} {rel} {rhs}", row.label, lhs.join(" + ")));
        r.csv_row([row.label.clone(), lhs.join(" + "), rel.to_string(), rhs]);
    }
    if let Some((c, s)) = member {
        r.line(format!("point in closure: {c}; in region: {s}"));
    }
    Ok(r)
}

fn comparison_lines(r: &mut Report, c: &RegionComparison, certificates: bool) {
    r.line(format!("regions equal: {}", c.equal));
    for (dir, checks) in [
        ("derived => expected", &c.forward),
        ("expected => derived", &c.backward),
    ] {
        for chk in checks {
            match &chk.certificate {
                Some(cert) if certificates => {
                    let mut parts: Vec<String> = cert.rows.iter().map(|(row, m)| format!("{m} * [{row}]")).collect();
                    parts.extend(cert.assumptions.iter().map(|(row, m)| format!("{m} * assume [{row}]")));
                    r.line(format!("  {dir}: {} <= {}", chk.row, parts.join(" + ")));
                }
                Some(_) => {}
                None => r.line(format!("  {dir}: not implied: {}", chk.row)),
            }
        }
    }
}

pub fn fme(a: &FmeArgs) -> Result<Report> {
    if a.list {
        let names: Vec<_> = FIXTURES
            .iter()
            .map(|f| json!({ "name": f.name, "description": f.description }))
            .collect();
        let mut r = Report::new(&names);
        r.csv_row(["name", "description"]);
        for f in FIXTURES {
            r.line(format!("{}: {}", f.name, f.description));
            r.csv_row([f.name, f.description]);
        }
        return Ok(r);
    }
    if let Some(name) = &a.fixture {
        let run = run_fixture(fixture(name)?)?;
        let mut r = Report::new(&json!({
            "fixture": run.name,
            "equal": run.comparison.equal,
            "derived_rows": run.derived.rows.len(),
            "reduced": run.reduced.to_text(),
            "expected": run.expected.to_text(),
            "comparison": run.comparison,
        }));
        r.line(format!("fixture {}", run.name));
        r.line(format!(
            "derived {} inequalities, {} after redundancy removal; conditions: {}",
            run.derived.inequalities().count(),
            run.reduced.inequalities().count(),
            run.reduced.conditions().count()
        ));
        r.human.push_str(&run.reduced.to_text());
        comparison_lines(&mut r, &run.comparison, a.certificates);
        r.csv_row(["row"]);
        for row in run.reduced.to_text().lines() {
            r.csv_row([row]);
        }
        return Ok(r);
    }
    let Some(path) = &a.system else {
        return Err(CliError::Input("pass --fixture NAME, --system FILE or --list".into()));
    };
    let sys = in_file(path, parse_system(&read(path)?))?;
    let order = a.order.as_deref();
    let mut out: InequalitySystem = if a.plain {
        eliminate_all(&sys, order)?
    } else {
        project(&sys, order)?
    };
    if a.reduce {
        out = remove_redundant(&out, &[])?;
    }
    let comparison = match &a.compare {
        Some(p) => {
            let other = in_file(p, parse_system(&read(p)?))?;
            let mode = if a.closure {
                ComparisonMode::Closure
            } else {
                ComparisonMode::Exact
            };
            Some(region_equal(&out, &other, &[], mode)?)
        }
        None => None,
    };
    let mut r = Report::new(&json!({ "region": out.to_text(), "comparison": comparison }));
    r.human.push_str(&out.to_text());
    if let Some(c) = &comparison {
        comparison_lines(&mut r, c, a.certificates);
    }
    r.csv_row(["row"]);
    for row in out.to_text().lines() {
        r.csv_row([row]);
    }
    Ok(r)
}

/// Covering-count experiment over axes `U`, `V`, `Z`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Lemma1Config {
    #[serde(default)]
    dist: Option<String>,
    /// Index rate; exclusive with `s_margin`.
    #[serde(default)]
    s: Option<f64>,
    /// Index rate as `I(V;Z|U) + s_margin`.
    #[serde(default)]
    s_margin: Option<f64>,
    n: Vec<usize>,
    epsilon: f64,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    delta1: Option<f64>,
    trials: usize,
    seed: u64,
    #[serde(default)]
    caps: Caps,
}

fn simulate_lemma1(cfg: &Lemma1Config, spec: &SpecFile) -> Result<Report> {
    let d = spec.pick_dist(cfg.dist.as_deref())?.joint();
    let i = d.conditional_mutual_information(&["V"], &["Z"], &["U"])?;
    let s = match (cfg.s, cfg.s_margin) {
        (Some(s), None) => s,
        (None, Some(m)) => i + m,
        _ => return Err(CliError::Input("set exactly one of `s` and `s_margin`".into())),
    };
    let mut stats: Vec<Lemma1Stats> = Vec::new();
    for &n in &cfg.n {
        let base = TypicalityParams::new(n, cfg.epsilon)?;
        let p = base.with_slack(cfg.delta.unwrap_or(base.delta), cfg.delta1.unwrap_or(base.delta1));
        let mut st = lemma1_experiment(d, s, &p, cfg.trials, cfg.seed, &cfg.caps)?;
        st.counts.clear();
        stats.push(st);
    }
    let mut r = Report::new(&stats);
    r.line(format!("S = {s:.6}, I(V;Z|U) = {i:.6}"));
    r.csv_row([
        "n",
        "s",
        "index_bits",
        "threshold",
        "in_regime",
        "trials",
        "exceedance",
        "mean_count",
        "true_index_typical",
    ]);
    for st in &stats {
        r.line(format!(
            "n = {:2}: 2^{} sequences, threshold {:.3}, exceedance {:.4}, mean count {:.3}{}",
            st.n,
            st.index_bits,
            st.threshold,
            st.exceedance,
            st.mean_count,
            if st.in_regime {
                ""
            } else {
                " (outside the concentration regime)"
            }
        ));
        r.csv_row([
            st.n.to_string(),
            st.s.to_string(),
            st.index_bits.to_string(),
            st.threshold.to_string(),
            st.in_regime.to_string(),
            st.trials.to_string(),
            st.exceedance.to_string(),
            st.mean_count.to_string(),
            st.true_index_typical.to_string(),
        ]);
    }
    Ok(r)
}

pub fn simulate(a: &SimulateArgs) -> Result<Report> {
    let spec = load_spec(&a.spec)?;
    if a.lemma1 {
        return simulate_lemma1(&load_toml(&a.config)?, &spec);
    }
    let cfg: ExperimentConfig = load_toml(&a.config)?;
    let rows: Vec<ExperimentRow> = run_experiment(&cfg, &spec)?;
    let mut r = Report::new(&rows);
    r.line(format!(
        "seed {}, {} trials, {} codebooks per blocklength",
        cfg.seed, cfg.trials, cfg.codebooks
    ));
    r.line(" n  msg bits  P_e       equivocation  leakage");
    for row in &rows {
        let rep = &row.report;
        let ci = if rep.exact {
            "exact".to_string()
        } else {
            format!("+/- {:.4}", rep.leakage_ci)
        };
        r.line(format!(
            "{:2}  {:8}  {:.4}    {:.6}      {:.6} ({ci})",
            rep.n, row.message_bits, rep.p_error, rep.equivocation_rate, rep.leakage_rate
        ));
    }
    r.csv
        .push(ExperimentRow::CSV_HEADER.split(',').map(String::from).collect());
    for row in &rows {
        r.csv.push(row.to_csv().split(',').map(String::from).collect());
    }
    Ok(r)
}

pub fn repro_example(a: &ReproArgs) -> Result<Report> {
    let ch = ExampleChannel::new();
    if let Some(p) = &a.channel_out {
        write_file(p, &ch.spec_file()?.to_text())?;
    }
    let budget = SearchBudget::new(a.grid, a.restarts, a.seed);
    let rep = reproduce_example(&budget, Cardinalities::default())?;
    let mut r = Report::new(&rep);
    r.line(format!("achievable = {:.10}", rep.achievable));
    r.line(format!(
        "R_CK best = {:.10} over |Q2| <= {}, |V2| <= {} ({} restarts, {} evaluations, seed {})",
        rep.rck_best, rep.cardinalities.q2, rep.cardinalities.v2, rep.restarts, rep.evaluations, a.seed
    ));
    r.line(format!("gap = {:.10}", rep.rck_gap));
    r.line(if rep.rck_below_achievable() {
        "R_CK best < achievable"
    } else {
        "R_CK best >= achievable"
    });
    r.line(format!(
        "zero-leakage points: {}, max |I(V2;Y12|Q2) - I(V2;Z2|Q2)| = {:.3e}",
        rep.identity_points, rep.identity_max_diff
    ));
    r.csv_row([
        "achievable",
        "rck_best",
        "rck_gap",
        "identity_points",
        "identity_max_diff",
    ]);
    r.csv_row([
        rep.achievable.to_string(),
        rep.rck_best.to_string(),
        rep.rck_gap.to_string(),
        rep.identity_points.to_string(),
        rep.identity_max_diff.to_string(),
    ]);
    Ok(r)
}
