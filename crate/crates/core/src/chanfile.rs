//! Plain-text channel and distribution files.
//!
//! ```text
//! # comments start with '#'
//! alphabet X 2
//! alphabet Y 2
//! channel y X -> Y
//!   9/10 1/10
//!   1/10 9/10
//! end
//! dist input
//!   factor X
//!     1/2 1/2
//! end
//! ```
//!
//! Table entries are exact (`p/q`, integers or decimals) and every row must
//! sum to exactly one. A `float` suffix on a `channel` or `factor` header
//! switches that table to binary floating point with tolerance checks.
//! Receivers are looked up by role name: `y`, `z` (wiretap), `y1`, `y2`,
//! `z` (three receivers), `y1`, `z2`, `z3` (multilevel), and `y1_L`, `y2_L`,
//! `z_L` for component `L = 1, 2, ...` of a product channel.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bounds::{ChannelModel, MultilevelChannel, ProductChannel, ThreeReceiverChannel, WiretapChannel};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::prob::{Axis, ConditionalPmf, Factor, FactoredDistribution};

#[derive(Clone, Debug, PartialEq)]
pub struct NamedChannel {
    pub input: String,
    pub output: String,
    pub pmf: ConditionalPmf,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpecFile {
    pub alphabets: BTreeMap<String, usize>,
    pub channels: BTreeMap<String, NamedChannel>,
    pub dists: BTreeMap<String, FactoredDistribution>,
}

enum Block {
    Channel {
        name: String,
        input: String,
        output: String,
        float: bool,
        rows: Vec<Vec<String>>,
        start: usize,
    },
    Dist {
        name: String,
        factors: Vec<PendingFactor>,
        start: usize,
    },
}

struct PendingFactor {
    targets: Vec<String>,
    given: Vec<String>,
    float: bool,
    rows: Vec<Vec<String>>,
    line: usize,
}

fn names(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(String::from)
        .collect()
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn table(rows: &[Vec<String>], n_rows: usize, n_cols: usize, float: bool, line: usize) -> Result<ConditionalPmf> {
    if rows.len() != n_rows {
        return Err(Error::parse(
            line,
            format!("expected {n_rows} rows, found {}", rows.len()),
        ));
    }
    if let Some(r) = rows.iter().position(|r| r.len() != n_cols) {
        return Err(Error::parse(
            line,
            format!("row {} has {} entries, expected {n_cols}", r + 1, rows[r].len()),
        ));
    }
    if float {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for tok in rows.iter().flatten() {
            data.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::parse(line, format!("`{tok}` is not a number")))?,
            );
        }
        ConditionalPmf::new(n_rows, n_cols, data).map_err(|e| Error::parse(line, e.to_string()))
    } else {
        let mut exact_rows = Vec::with_capacity(n_rows);
        for row in rows {
            let mut r: Vec<Rational> = Vec::with_capacity(n_cols);
            for tok in row {
                r.push(
                    exact::parse_rational(tok)
                        .ok_or_else(|| Error::parse(line, format!("`{tok}` is not an exact number")))?,
                );
            }
            exact_rows.push(r);
        }
        ConditionalPmf::from_exact_rows(exact_rows).map_err(|e| Error::parse(line, e.to_string()))
    }
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = SpecFile::default();
        let mut block: Option<Block> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            if words[0] == "end" {
                match block.take() {
                    Some(b) => out.finish(b)?,
                    None => return Err(Error::parse(line, "`end` outside a block")),
                }
                continue;
            }
            match &mut block {
                None => out.top_level(line, content, &words, &mut block)?,
                Some(Block::Channel { rows, .. }) => rows.push(words.iter().map(|s| s.to_string()).collect()),
                Some(Block::Dist { factors, .. }) => {
                    if words[0] == "factor" {
                        let rest = content["factor".len()..].trim();
                        let (rest, float) = match rest.strip_suffix("float") {
                            Some(r) => (r.trim(), true),
                            None => (rest, false),
                        };
                        let (t, g) = rest.split_once('|').unwrap_or((rest, ""));
                        let targets = names(t);
                        if targets.is_empty() {
                            return Err(Error::parse(line, "factor without target axes"));
                        }
                        factors.push(PendingFactor {
                            targets,
                            given: names(g),
                            float,
                            rows: Vec::new(),
                            line,
                        });
                    } else {
                        match factors.last_mut() {
                            Some(f) => f.rows.push(words.iter().map(|s| s.to_string()).collect()),
                            None => return Err(Error::parse(line, "table row before any `factor` header")),
                        }
                    }
                }
            }
        }
        if let Some(b) = block {
            let start = match b {
                Block::Channel { start, .. } | Block::Dist { start, .. } => start,
            };
            return Err(Error::parse(start, "block is not closed with `end`"));
        }
        Ok(out)
    }

    fn top_level(&mut self, line: usize, content: &str, words: &[&str], block: &mut Option<Block>) -> Result<()> {
        match words[0] {
            "alphabet" => {
                let [_, name, size] = words else {
                    return Err(Error::parse(line, "expected `alphabet NAME SIZE`"));
                };
                if !valid_name(name) {
                    return Err(Error::parse(line, format!("invalid name `{name}`")));
                }
                let size: usize = size
                    .parse()
                    .ok()
                    .filter(|&s| s >= 1)
                    .ok_or_else(|| Error::parse(line, format!("invalid alphabet size `{size}`")))?;
                if self.alphabets.insert(name.to_string(), size).is_some() {
                    return Err(Error::parse(line, format!("alphabet `{name}` declared twice")));
                }
            }
            "channel" => {
                let float = words.last() == Some(&"float");
                let w = if float { &words[..words.len() - 1] } else { words };
                let [_, name, input, "->", output] = w else {
                    return Err(Error::parse(line, "expected `channel NAME IN -> OUT [float]`"));
                };
                if !valid_name(name) {
                    return Err(Error::parse(line, format!("invalid name `{name}`")));
                }
                *block = Some(Block::Channel {
                    name: name.to_string(),
                    input: input.to_string(),
                    output: output.to_string(),
                    float,
                    rows: Vec::new(),
                    start: line,
                });
            }
            "dist" => {
                let [_, name] = words else {
                    return Err(Error::parse(line, "expected `dist NAME`"));
                };
                *block = Some(Block::Dist {
                    name: name.to_string(),
                    factors: Vec::new(),
                    start: line,
                });
            }
            _ => return Err(Error::parse(line, format!("unexpected `{content}`"))),
        }
        Ok(())
    }

    fn size(&self, name: &str, line: usize) -> Result<usize> {
        self.alphabets
            .get(name)
            .copied()
            .ok_or_else(|| Error::parse(line, format!("alphabet `{name}` is not declared")))
    }

    fn finish(&mut self, block: Block) -> Result<()> {
        match block {
            Block::Channel {
                name,
                input,
                output,
                float,
                rows,
                start,
            } => {
                let pmf = table(
                    &rows,
                    self.size(&input, start)?,
                    self.size(&output, start)?,
                    float,
                    start,
                )?;
                if self
                    .channels
                    .insert(name.clone(), NamedChannel { input, output, pmf })
                    .is_some()
                {
                    return Err(Error::parse(start, format!("channel `{name}` defined twice")));
                }
            }
            Block::Dist { name, factors, start } => {
                let mut built = Vec::with_capacity(factors.len());
                for f in factors {
                    let nr: usize = f
                        .given
                        .iter()
                        .map(|g| self.size(g, f.line))
                        .product::<Result<usize>>()?;
                    let nc: usize = f
                        .targets
                        .iter()
                        .map(|t| self.size(t, f.line))
                        .product::<Result<usize>>()?;
                    let t = table(&f.rows, nr, nc, f.float, f.line)?;
                    let axes = f
                        .targets
                        .iter()
                        .map(|n| Ok(Axis::new(n, self.size(n, f.line)?)))
                        .collect::<Result<Vec<_>>>()?;
                    let given: Vec<&str> = f.given.iter().map(String::as_str).collect();
                    built.push(Factor::new(axes, &given, t));
                }
                let d = FactoredDistribution::new(built).map_err(|e| Error::parse(start, e.to_string()))?;
                if self.dists.insert(name.clone(), d).is_some() {
                    return Err(Error::parse(start, format!("dist `{name}` defined twice")));
                }
            }
        }
        Ok(())
    }

    fn declare(&mut self, name: &str, size: usize) -> Result<()> {
        match self.alphabets.get(name) {
            Some(&s) if s != size => Err(Error::DimensionMismatch(format!(
                "alphabet `{name}` has size {s}, not {size}"
            ))),
            _ => {
                self.alphabets.insert(name.to_string(), size);
                Ok(())
            }
        }
    }

    pub fn add_channel(&mut self, name: &str, input: &str, output: &str, pmf: ConditionalPmf) -> Result<()> {
        self.declare(input, pmf.rows())?;
        self.declare(output, pmf.cols())?;
        self.channels.insert(
            name.to_string(),
            NamedChannel {
                input: input.to_string(),
                output: output.to_string(),
                pmf,
            },
        );
        Ok(())
    }

    pub fn add_dist(&mut self, name: &str, dist: FactoredDistribution) -> Result<()> {
        for a in dist.joint().axes() {
            self.declare(&a.name, a.size)?;
        }
        self.dists.insert(name.to_string(), dist);
        Ok(())
    }

    /// Adds the receivers of a channel model under their role names.
    pub fn add_model(&mut self, model: &ChannelModel) -> Result<()> {
        match model {
            ChannelModel::Wiretap(w) => {
                self.add_channel("y", "X", "Y", w.y.clone())?;
                self.add_channel("z", "X", "Z", w.z.clone())
            }
            ChannelModel::ThreeReceiver(c) => {
                self.add_channel("y1", "X", "Y1", c.y1.clone())?;
                self.add_channel("y2", "X", "Y2", c.y2.clone())?;
                self.add_channel("z", "X", "Z", c.z.clone())
            }
            ChannelModel::Product(p) => {
                for (l, c) in p.components.iter().enumerate() {
                    let l = l + 1;
                    let x = format!("X{l}");
                    self.add_channel(&format!("y1_{l}"), &x, &format!("Y1{l}"), c.y1.clone())?;
                    self.add_channel(&format!("y2_{l}"), &x, &format!("Y2{l}"), c.y2.clone())?;
                    self.add_channel(&format!("z_{l}"), &x, &format!("Z{l}"), c.z.clone())?;
                }
                Ok(())
            }
        }
    }

    pub fn channel(&self, name: &str) -> Result<&ConditionalPmf> {
        self.channels
            .get(name)
            .map(|c| &c.pmf)
            .ok_or_else(|| Error::UnknownName(format!("channel {name}")))
    }

    pub fn dist(&self, name: &str) -> Result<&FactoredDistribution> {
        self.dists
            .get(name)
            .ok_or_else(|| Error::UnknownName(format!("dist {name}")))
    }

    /// The only distribution in the file, or the one called `name`.
    pub fn pick_dist(&self, name: Option<&str>) -> Result<&FactoredDistribution> {
        match name {
            Some(n) => self.dist(n),
            None if self.dists.len() == 1 => Ok(self.dists.values().next().expect("one dist")),
            None => Err(Error::InvalidParameter(format!(
                "file has {} distributions; pick one by name",
                self.dists.len()
            ))),
        }
    }

    pub fn wiretap(&self) -> Result<WiretapChannel> {
        WiretapChannel::new(self.channel("y")?.clone(), self.channel("z")?.clone())
    }

    pub fn multilevel(&self) -> Result<MultilevelChannel> {
        MultilevelChannel::new(
            self.channel("y1")?.clone(),
            self.channel("z2")?.clone(),
            self.channel("z3")?.clone(),
        )
    }

    pub fn product(&self) -> Result<ProductChannel> {
        let mut comps = Vec::new();
        for l in 1.. {
            if !self.channels.contains_key(&format!("y1_{l}")) {
                break;
            }
            comps.push(ThreeReceiverChannel::new(
                self.channel(&format!("y1_{l}"))?.clone(),
                self.channel(&format!("y2_{l}"))?.clone(),
                self.channel(&format!("z_{l}"))?.clone(),
            )?);
        }
        ProductChannel::new(comps)
    }

    /// Three receivers, combining product components when the file lists them.
    pub fn three_receiver(&self) -> Result<ThreeReceiverChannel> {
        if self.channels.contains_key("y1") && self.channels.contains_key("y2") {
            ThreeReceiverChannel::new(
                self.channel("y1")?.clone(),
                self.channel("y2")?.clone(),
                self.channel("z")?.clone(),
            )
        } else if self.channels.contains_key("y1_1") {
            self.product()?.combined()
        } else {
            Err(Error::UnknownName(
                "channels y1, y2 and z (or product components y1_1, y2_1, z_1, ...)".into(),
            ))
        }
    }

    /// The richest model the role names support.
    pub fn model(&self) -> Result<ChannelModel> {
        if self.channels.contains_key("y1_1") {
            Ok(ChannelModel::Product(self.product()?))
        } else if self.channels.contains_key("y1") && self.channels.contains_key("y2") {
            Ok(ChannelModel::ThreeReceiver(self.three_receiver()?))
        } else {
            Ok(ChannelModel::Wiretap(self.wiretap()?))
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (n, k) in &self.alphabets {
            let _ = writeln!(s, "alphabet {n} {k}");
        }
        for (n, c) in &self.channels {
            let float = if c.pmf.exact().is_some() { "" } else { " float" };
            let _ = writeln!(s, "\nchannel {n} {} -> {}{float}", c.input, c.output);
            write_table(&mut s, &c.pmf, "  ");
            s.push_str("end\n");
        }
        for (n, d) in &self.dists {
            let _ = writeln!(s, "\ndist {n}");
            for f in d.factors() {
                let targets: Vec<&str> = f.targets.iter().map(|a| a.name.as_str()).collect();
                let given = if f.given.is_empty() {
                    String::new()
                } else {
                    format!(" | {}", f.given.join(","))
                };
                let float = if f.table.exact().is_some() { "" } else { " float" };
                let _ = writeln!(s, "  factor {}{given}{float}", targets.join(","));
                write_table(&mut s, &f.table, "    ");
            }
            s.push_str("end\n");
        }
        s
    }
}

fn write_table(s: &mut String, t: &ConditionalPmf, indent: &str) {
    for r in 0..t.rows() {
        let entries: Vec<String> = (0..t.cols())
            .map(|c| match t.exact_get(r, c) {
                Some(q) => exact::format_rational(q),
                None => format!("{:?}", t.get(r, c)),
            })
            .collect();
        let _ = writeln!(s, "{indent}{}", entries.join(" "));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::search::{random_table, rng_for};

    const SAMPLE: &str = "\
# BSC pair
alphabet X 2
alphabet Y 2
alphabet Z 2
alphabet V 2
channel y X -> Y
  0.9 0.1
  1/10 9/10
end
channel z X -> Z float
  0.8 0.2
  0.2 0.8
end
dist d
  factor V
    1/2 1/2
  factor X | V
    1 0
    0 1
end
";

    #[test]
    fn parses_sample() {
        let f = SpecFile::parse(SAMPLE).unwrap();
        assert_eq!(
            f.channel("y").unwrap(),
            &ConditionalPmf::bsc_exact(ratio(1, 10)).unwrap()
        );
        assert!(f.channel("z").unwrap().exact().is_none());
        assert_eq!(f.dist("d").unwrap().joint().tensor(), &[0.5, 0.0, 0.0, 0.5]);
        let w = f.wiretap().unwrap();
        assert_eq!(w.inputs(), 2);
    }

    #[test]
    fn round_trips() {
        let mut f = SpecFile::parse(SAMPLE).unwrap();
        let mut rng = rng_for(3, 0);
        f.add_channel("w", "X", "W3", random_table(&mut rng, 2, 3)).unwrap();
        let again = SpecFile::parse(&f.to_text()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let cases = [
            ("alphabet X two\n", 1),
            ("alphabet X 2\nchannel c X -> Y\n1 0\n0 1\nend\n", 2),
            ("alphabet X 2\nchannel c X -> X\n1/2 1/3\n0 1\nend\n", 2),
            ("alphabet X 2\nchannel c X -> X\n1 0\n", 2),
            ("end\n", 1),
            ("alphabet X 2\n\nbogus\n", 3),
            ("alphabet X 2\ndist d\n1 0\nend\n", 3),
        ];
        for (text, line) in cases {
            match SpecFile::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
