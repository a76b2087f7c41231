//! One result rendered three ways.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Csv,
    Json,
}

pub struct Report {
    pub human: String,
    pub csv: Vec<Vec<String>>,
    pub json: Value,
}

impl Report {
    pub fn new(json: &impl Serialize) -> Self {
        Report {
            human: String::new(),
            csv: Vec::new(),
            json: serde_json::to_value(json).expect("report fields serialize"),
        }
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        self.human.push_str(text.as_ref());
        self.human.push('\n');
    }

    pub fn csv_row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.csv.push(cells.into_iter().map(|c| c.to_string()).collect());
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.human.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("json value");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                for row in &self.csv {
                    let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
                    let _ = writeln!(s, "{}", cells.join(","));
                }
                s
            }
        }
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}
