//! Signal files and estimate reports.
//!
//! Text signals start with a `layout: d=<int>` or `layout: <len>,<len>,...`
//! header followed by one value per line; blank lines and `#` comments are
//! skipped. Binary signals start with the 8-byte magic [`BINARY_MAGIC`] and a
//! little-endian `u64` block length; a block length of 0 is followed by a
//! `u64` block count and that many `u64` block lengths. Values follow as
//! little-endian `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimate::SparsityEstimate;
use crate::signal::{BlockLayout, BlockSignal};

pub const BINARY_MAGIC: [u8; 8] = *b"BSPARSE1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    Text,
    Binary,
}

enum LayoutSpec {
    Uniform(usize),
    Lengths(Vec<usize>),
}

fn parse_layout_header(line: &str) -> Result<LayoutSpec> {
    let parse_err = |msg: String| Error::Parse { line: 1, msg };
    let rest = line
        .strip_prefix("layout:")
        .ok_or_else(|| parse_err(format!("expected 'layout: d=<int>' or 'layout: <lengths>', got '{line}'")))?
        .trim();
    if let Some(d) = rest.strip_prefix("d=") {
        let d = d.trim().parse().map_err(|_| parse_err(format!("bad block length '{d}'")))?;
        return Ok(LayoutSpec::Uniform(d));
    }
    rest.split(',')
        .map(|t| t.trim().parse().map_err(|_| parse_err(format!("bad block length '{}'", t.trim()))))
        .collect::<Result<Vec<usize>>>()
        .map(LayoutSpec::Lengths)
}

fn build(spec: LayoutSpec, values: Vec<f64>) -> Result<BlockSignal> {
    let layout = match spec {
        LayoutSpec::Uniform(d) => BlockLayout::uniform(values.len(), d)?,
        LayoutSpec::Lengths(lengths) => BlockLayout::new(lengths)?,
    };
    BlockSignal::new(values, layout)
}

pub fn parse_text_signal(text: &str) -> Result<BlockSignal> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty signal file".into() })?;
    let spec = parse_layout_header(header).map_err(|e| match e {
        Error::Parse { msg, .. } => Error::Parse { line: header_line, msg },
        other => other,
    })?;
    let values = lines
        .map(|(line, l)| {
            l.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("not a number: '{l}'") })
        })
        .collect::<Result<Vec<_>>>()?;
    build(spec, values)
}

/// Writes `layout: d=<int>` when every block has the same length.
pub fn render_text_signal(x: &BlockSignal) -> String {
    let layout = x.layout();
    let mut s = match layout.uniform_length() {
        Some(d) => format!("layout: d={d}\n"),
        None => {
            let lengths: Vec<String> = layout.block_lengths().iter().map(|l| l.to_string()).collect();
            format!("layout: {}\n", lengths.join(","))
        }
    };
    for v in x.values() {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn encode_binary_signal(x: &BlockSignal) -> Vec<u8> {
    let layout = x.layout();
    let mut out = Vec::with_capacity(16 + 8 * x.values().len());
    out.extend_from_slice(&BINARY_MAGIC);
    match layout.uniform_length() {
        Some(d) => out.extend_from_slice(&(d as u64).to_le_bytes()),
        None => {
            out.extend_from_slice(&0u64.to_le_bytes());
            out.extend_from_slice(&(layout.num_blocks() as u64).to_le_bytes());
            for &l in layout.block_lengths() {
                out.extend_from_slice(&(l as u64).to_le_bytes());
            }
        }
    }
    for v in x.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_binary_signal(bytes: &[u8]) -> Result<BlockSignal> {
    let bad = |msg: &str| Error::Parse { line: 0, msg: format!("binary signal: {msg}") };
    let body = bytes.strip_prefix(&BINARY_MAGIC[..]).ok_or_else(|| bad("missing magic"))?;
    let mut words = body.chunks_exact(8);
    if !words.remainder().is_empty() {
        return Err(bad("length is not a multiple of 8 bytes"));
    }
    let mut next_u64 = || {
        words
            .next()
            .map(|w| u64::from_le_bytes(w.try_into().unwrap()))
            .ok_or_else(|| bad("truncated header"))
    };
    let d = next_u64()? as usize;
    let spec = if d > 0 {
        LayoutSpec::Uniform(d)
    } else {
        let count = next_u64()? as usize;
        if count > body.len() / 8 {
            return Err(bad("block count exceeds file size"));
        }
        LayoutSpec::Lengths((0..count).map(|_| next_u64().map(|l| l as usize)).collect::<Result<_>>()?)
    };
    let values: Vec<f64> = words.map(|w| f64::from_le_bytes(w.try_into().unwrap())).collect();
    build(spec, values)
}

/// Reads a signal file, picking the format from its first bytes.
pub fn read_signal(path: &Path) -> Result<BlockSignal> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(&BINARY_MAGIC) {
        decode_binary_signal(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::Parse { line: 0, msg: "signal file is not UTF-8".into() })?;
        parse_text_signal(&text)
    }
}

pub fn write_signal(path: &Path, x: &BlockSignal, format: SignalFormat) -> Result<()> {
    match format {
        SignalFormat::Text => fs::write(path, render_text_signal(x))?,
        SignalFormat::Binary => fs::write(path, encode_binary_signal(x))?,
    }
    Ok(())
}

/// Flat summary of a [`SparsityEstimate`] for printing.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub alpha: f64,
    pub n1: usize,
    pub n_alpha: usize,
    pub v1_hat: f64,
    pub va_hat: f64,
    pub k_hat: f64,
    pub theta1: f64,
    pub theta_a: f64,
    pub w_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub clamped1: bool,
    pub clamped_a: bool,
    pub seed: u64,
    /// Exact `k_alpha(x)`, when requested.
    pub k_true: Option<f64>,
}

impl EstimateReport {
    pub fn new(est: &SparsityEstimate, seed: u64, k_true: Option<f64>) -> Self {
        Self {
            alpha: est.alpha,
            n1: est.n1,
            n_alpha: est.n_alpha,
            v1_hat: est.norm1.v_hat,
            va_hat: est.norm_alpha.v_hat,
            k_hat: est.k_hat,
            theta1: est.norm1.theta_hat,
            theta_a: est.norm_alpha.theta_hat,
            w_hat: est.w_hat,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            clamped1: est.norm1.clamped,
            clamped_a: est.norm_alpha.clamped,
            seed,
            k_true,
        }
    }

    /// `none`, `v1`, `va` or `v1+va`.
    pub fn clamped_flags(&self) -> &'static str {
        match (self.clamped1, self.clamped_a) {
            (false, false) => "none",
            (true, false) => "v1",
            (false, true) => "va",
            (true, true) => "v1+va",
        }
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        let mut f = vec![
            ("alpha", self.alpha.to_string()),
            ("n1", self.n1.to_string()),
            ("n_alpha", self.n_alpha.to_string()),
            ("v1_hat", self.v1_hat.to_string()),
            ("va_hat", self.va_hat.to_string()),
            ("k_hat", self.k_hat.to_string()),
            ("theta1", self.theta1.to_string()),
            ("theta_a", self.theta_a.to_string()),
            ("w_hat", self.w_hat.to_string()),
            ("ci_low", self.ci_low.to_string()),
            ("ci_high", self.ci_high.to_string()),
            ("clamped_flags", self.clamped_flags().to_string()),
            ("seed", self.seed.to_string()),
        ];
        if let Some(k) = self.k_true {
            f.push(("k_true", k.to_string()));
        }
        f
    }

    pub fn to_key_value(&self) -> String {
        self.fields().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Header row and one data row.
    pub fn to_csv(&self) -> String {
        let (keys, values): (Vec<&str>, Vec<String>) = self.fields().into_iter().unzip();
        format!("{}\n{}\n", keys.join(","), values.join(","))
    }
}
