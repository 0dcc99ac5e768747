use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimate::{ReferenceLaw, DEFAULT_BETA};
use crate::noise::{NoiseFamily, NoiseModel};
use crate::signal::{make_exact_signal, make_nearly_sparse_signal, make_stepped_signal, BlockSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    ErrorCurve,
    Normality,
    L20SmallAlpha,
    MeasureCompare,
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Study::ErrorCurve => "error_curve",
            Study::Normality => "normality",
            Study::L20SmallAlpha => "l20_small_alpha",
            Study::MeasureCompare => "measure_compare",
        }
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error_curve" => Ok(Study::ErrorCurve),
            "normality" => Ok(Study::Normality),
            "l20_small_alpha" => Ok(Study::L20SmallAlpha),
            "measure_compare" => Ok(Study::MeasureCompare),
            _ => Err(Error::param(format!(
                "unknown study '{s}' (error_curve|normality|l20_small_alpha|measure_compare)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// `(1/sqrt(10)) 1_10` then zeros.
    Exact,
    /// Block norms decaying like `1/j` over every block.
    NearlySparse,
    /// Block norms `1, 1/2, ..., 1/k` then zeros.
    Stepped,
}

impl SignalKind {
    pub fn name(&self) -> &'static str {
        match self {
            SignalKind::Exact => "exact",
            SignalKind::NearlySparse => "nearly_sparse",
            SignalKind::Stepped => "stepped",
        }
    }

    pub fn build(&self, n: usize, d: usize, k: usize) -> Result<BlockSignal> {
        match self {
            SignalKind::Exact => make_exact_signal(n, d),
            SignalKind::NearlySparse => make_nearly_sparse_signal(n, d),
            SignalKind::Stepped => make_stepped_signal(n, d, k),
        }
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SignalKind::Exact),
            "nearly_sparse" => Ok(SignalKind::NearlySparse),
            "stepped" => Ok(SignalKind::Stepped),
            _ => Err(Error::param(format!("unknown signal '{s}' (exact|nearly_sparse|stepped)"))),
        }
    }
}

/// Parameter varied across the curves of an error-curve study.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    None,
    SignalLength(Vec<usize>),
    BlockLength(Vec<usize>),
    Sigma(Vec<f64>),
}

impl Sweep {
    fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(Sweep::None);
        }
        let (key, values) = s
            .split_once(':')
            .ok_or_else(|| Error::param(format!("sweep must look like 'N:20,100' , got '{s}'")))?;
        match key.trim() {
            "N" | "signal_length" => Ok(Sweep::SignalLength(parse_list(values)?)),
            "d" | "block_length" => Ok(Sweep::BlockLength(parse_list(values)?)),
            "sigma" => Ok(Sweep::Sigma(parse_list(values)?)),
            other => Err(Error::param(format!("cannot sweep over '{other}' (N|d|sigma)"))),
        }
    }

    fn render(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
        }
        match self {
            Sweep::None => "none".into(),
            Sweep::SignalLength(v) => format!("N:{}", join(v)),
            Sweep::BlockLength(v) => format!("d:{}", join(v)),
            Sweep::Sigma(v) => format!("sigma:{}", join(v)),
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::param(format!("bad list entry '{}'", t.trim()))))
        .collect()
}

/// Everything a study needs, including its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub study: Study,
    pub signal: SignalKind,
    pub signal_length: usize,
    pub block_length: usize,
    /// Stepped-signal block count.
    pub k: usize,
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma_alpha: f64,
    pub sigma: f64,
    /// One family for error curves and the small-alpha study; any number for normality.
    pub noise: Vec<NoiseFamily>,
    /// `(n_1, n_alpha)` pairs.
    pub grid: Vec<(usize, usize)>,
    pub replications: usize,
    pub seed: u64,
    /// `None` picks [`crate::noise::eta0_for`] of the noise family.
    pub eta0: Option<f64>,
    pub sweep: Sweep,
    /// Block counts of the small-alpha study.
    pub ks: Vec<usize>,
    /// Reference law in the population pilot constant of the theory curves.
    pub reference: ReferenceLaw,
    pub beta: f64,
    /// Monte Carlo draws behind each theoretical constant.
    pub theory_draws: usize,
}

fn sample_size_grid() -> Vec<(usize, usize)> {
    [50, 100, 200, 300, 400, 500].iter().map(|&n| (n, n)).collect()
}

impl ExperimentConfig {
    /// Relative-error curves for `k_2` on the exact signal (N = 1000, d = 5, sigma = 0.1).
    pub fn error_curve() -> Self {
        Self {
            study: Study::ErrorCurve,
            signal: SignalKind::Exact,
            signal_length: 1000,
            block_length: 5,
            k: 10,
            alpha: 2.0,
            gamma1: 1.0,
            gamma_alpha: std::f64::consts::SQRT_2 / 2.0,
            sigma: 0.1,
            noise: vec![NoiseFamily::Gaussian],
            grid: sample_size_grid(),
            replications: 200,
            seed: 2018,
            eta0: Some(1.0),
            sweep: Sweep::None,
            ks: vec![10, 50, 100, 200],
            reference: ReferenceLaw::Cauchy,
            beta: DEFAULT_BETA,
            theory_draws: 1_000_000,
        }
    }

    /// 1000 standardized statistics per case, Gaussian and t(2) noise.
    pub fn normality() -> Self {
        Self {
            study: Study::Normality,
            noise: vec![NoiseFamily::Gaussian, NoiseFamily::StudentT(2.0)],
            grid: vec![(500, 500), (1000, 1000)],
            replications: 1000,
            eta0: None,
            ..Self::error_curve()
        }
    }

    /// `k_0.06` as an estimate of the block count on stepped signals.
    pub fn l20_small_alpha() -> Self {
        Self {
            study: Study::L20SmallAlpha,
            signal: SignalKind::Stepped,
            alpha: 0.06,
            gamma_alpha: 1.0,
            ..Self::error_curve()
        }
    }

    /// Block count versus `k_2` on hand-built profiles in R^100 with d = 5.
    pub fn measure_compare() -> Self {
        Self {
            study: Study::MeasureCompare,
            signal_length: 100,
            block_length: 5,
            k: 5,
            replications: 1,
            ..Self::error_curve()
        }
    }

    pub fn defaults_for(study: Study) -> Self {
        match study {
            Study::ErrorCurve => Self::error_curve(),
            Study::Normality => Self::normality(),
            Study::L20SmallAlpha => Self::l20_small_alpha(),
            Study::MeasureCompare => Self::measure_compare(),
        }
    }

    /// Parses `key = value` lines (`#` starts a comment). `study` selects the
    /// defaults, every other key overrides one field.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), (line_no, value.trim().to_string())).is_some() {
                return Err(Error::Parse { line: line_no, msg: format!("duplicate key '{key}'") });
            }
        }
        let (study_line, study) = entries
            .remove("study")
            .ok_or_else(|| Error::Parse { line: 0, msg: "missing 'study' key".into() })?;
        let study: Study = study.parse().map_err(|e: Error| Error::Parse { line: study_line, msg: e.to_string() })?;
        let mut cfg = Self::defaults_for(study);
        for (key, (line, value)) in entries {
            cfg.set(&key, &value).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::param(format!("'{key}' expects a number, got '{v}'")))
        }
        match key {
            "signal" => self.signal = value.parse()?,
            "signal_length" | "N" => self.signal_length = num(key, value)?,
            "block_length" | "d" => self.block_length = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "gamma1" => self.gamma1 = num(key, value)?,
            "gamma_alpha" => self.gamma_alpha = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "noise" => self.noise = parse_list(value)?,
            "grid" => self.grid = parse_grid(value)?,
            "replications" => self.replications = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "eta0" => self.eta0 = if value == "auto" { None } else { Some(num(key, value)?) },
            "sweep" => self.sweep = Sweep::parse(value)?,
            "ks" => self.ks = parse_list(value)?,
            "reference" => {
                self.reference = match value {
                    "cauchy" => ReferenceLaw::Cauchy,
                    "alpha" => ReferenceLaw::MatchIndex,
                    _ => return Err(Error::param(format!("reference must be 'cauchy' or 'alpha', got '{value}'"))),
                }
            }
            "beta" => self.beta = num(key, value)?,
            "theory_draws" => self.theory_draws = num(key, value)?,
            _ => return Err(Error::param(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::param("replications must be at least 1"));
        }
        if self.grid.is_empty() || self.grid.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(Error::param("grid must be a nonempty list of positive sample sizes"));
        }
        if self.noise.is_empty() {
            return Err(Error::param("at least one noise family is required"));
        }
        if matches!(self.study, Study::ErrorCurve | Study::L20SmallAlpha) && self.noise.len() != 1 {
            return Err(Error::param(format!("{} takes exactly one noise family", self.study.name())));
        }
        for fam in &self.noise {
            NoiseModel::new(*fam, self.sigma)?;
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) || self.alpha == 1.0 {
            return Err(Error::param(format!("alpha must lie in (0, 2] and differ from 1, got {}", self.alpha)));
        }
        if self.study == Study::L20SmallAlpha && self.alpha >= 1.0 {
            return Err(Error::param("the block-count study needs alpha < 1"));
        }
        if !(self.gamma1 > 0.0 && self.gamma_alpha > 0.0) {
            return Err(Error::param("gamma1 and gamma_alpha must be positive"));
        }
        if let Some(eta0) = self.eta0 {
            if !(eta0 > 0.0) {
                return Err(Error::param("eta0 must be positive"));
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::param("beta must lie in (0, 1)"));
        }
        if self.theory_draws == 0 {
            return Err(Error::param("theory_draws must be at least 1"));
        }
        match self.study {
            Study::L20SmallAlpha => {
                if self.ks.is_empty() {
                    return Err(Error::param("ks must list at least one block count"));
                }
                for &k in &self.ks {
                    make_stepped_signal(self.signal_length, self.block_length, k)?;
                }
            }
            Study::MeasureCompare => {
                let p = self.signal_length / self.block_length.max(1);
                if self.block_length == 0 || !self.signal_length.is_multiple_of(self.block_length) || self.k == 0 || self.k > p {
                    return Err(Error::param("measure comparison needs d | N and 1 <= k <= N/d"));
                }
            }
            _ => {
                for (n, d, _) in self.variants() {
                    self.signal.build(n, d, self.k)?;
                }
            }
        }
        Ok(())
    }

    /// `(N, d, sigma)` of every curve of an error-curve study.
    pub(crate) fn variants(&self) -> Vec<(usize, usize, f64)> {
        match &self.sweep {
            Sweep::None => vec![(self.signal_length, self.block_length, self.sigma)],
            Sweep::SignalLength(v) => v.iter().map(|&n| (n, self.block_length, self.sigma)).collect(),
            Sweep::BlockLength(v) => v.iter().map(|&d| (self.signal_length, d, self.sigma)).collect(),
            Sweep::Sigma(v) => v.iter().map(|&s| (self.signal_length, self.block_length, s)).collect(),
        }
    }

    /// Canonical `key = value` rendering; parses back to an equal config.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let join = |v: Vec<String>| v.join(",");
        let eta0 = self.eta0.map_or("auto".to_string(), |e| e.to_string());
        let reference = match self.reference {
            ReferenceLaw::Cauchy => "cauchy",
            ReferenceLaw::MatchIndex => "alpha",
        };
        let fields: [(&str, String); 18] = [
            ("study", self.study.name().into()),
            ("signal", self.signal.name().into()),
            ("signal_length", self.signal_length.to_string()),
            ("block_length", self.block_length.to_string()),
            ("k", self.k.to_string()),
            ("alpha", self.alpha.to_string()),
            ("gamma1", self.gamma1.to_string()),
            ("gamma_alpha", self.gamma_alpha.to_string()),
            ("sigma", self.sigma.to_string()),
            ("noise", join(self.noise.iter().map(|f| f.to_string()).collect())),
            ("grid", join(self.grid.iter().map(|(a, b)| format!("{a}:{b}")).collect())),
            ("replications", self.replications.to_string()),
            ("seed", self.seed.to_string()),
            ("eta0", eta0),
            ("sweep", self.sweep.render()),
            ("ks", join(self.ks.iter().map(|k| k.to_string()).collect())),
            ("reference", reference.into()),
            ("beta", self.beta.to_string()),
        ];
        for (k, v) in fields {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "theory_draws = {}", self.theory_draws);
        s
    }
}

/// `50,100` means `(50,50),(100,100)`; `50:80` sets `n_1` and `n_alpha` separately.
fn parse_grid(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            let bad = || Error::param(format!("bad grid entry '{item}'"));
            match item.split_once(':') {
                Some((a, b)) => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
                None => {
                    let n: usize = item.parse().map_err(|_| bad())?;
                    Ok((n, n))
                }
            }
        })
        .collect()
}
