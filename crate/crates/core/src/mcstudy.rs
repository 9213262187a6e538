//! Monte Carlo bias/RMSE study of the moment estimators.
//!
//! Every (row, sample size, replication) triple draws from its own ChaCha
//! stream, so results do not depend on scheduling or thread count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{GenIIParams, GenIParams};
use crate::error::{Error, Result};
use crate::estimate::{estimate_gen1, estimate_gen2_with, log_moment_summary, EstimationResult, GammaSign};
use crate::process::Model;
use crate::rng::RngStream;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gen1,
    Gen2,
}

/// Which estimate enters the bias/RMSE accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Score {
    /// Root of the moment equations, even when nu exceeds 1. Falls back to
    /// the admissible estimate when no such root exists.
    #[default]
    Unconstrained,
    /// The returned parameters, with nu clamped to (0, 1].
    Admissible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub model: ModelKind,
    /// True parameters (nu, delta or gamma, lambda), one per row.
    pub rows: Vec<[f64; 3]>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub score: Score,
    #[serde(default)]
    pub gamma_sign: GammaSign,
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| Error::Parse(format!("{key}: cannot parse '{}'", v.trim())))
        })
        .collect()
}

impl StudyConfig {
    /// Parse `key = value` lines. `#` starts a comment.
    ///
    /// Rows are either the product of the `nu`, `delta`/`gamma` and `lambda`
    /// lists (nu varying slowest) or explicit `row = nu, shape, lambda` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut model = None;
        let (mut nus, mut shapes, mut lambdas) = (None::<Vec<f64>>, None::<Vec<f64>>, None::<Vec<f64>>);
        let mut explicit = Vec::new();
        let mut sizes = None;
        let mut reps = None;
        let mut seed = None;
        let mut score = Score::default();
        let mut sign = GammaSign::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "model" => {
                    model = Some(match value {
                        "gen1" => ModelKind::Gen1,
                        "gen2" => ModelKind::Gen2,
                        _ => return Err(Error::Parse(format!("model must be gen1 or gen2, got '{value}'"))),
                    })
                }
                "nu" => nus = Some(parse_list(key, value)?),
                "delta" | "gamma" => shapes = Some(parse_list(key, value)?),
                "lambda" => lambdas = Some(parse_list(key, value)?),
                "row" => {
                    let r: Vec<f64> = parse_list(key, value)?;
                    if r.len() != 3 {
                        return Err(Error::Parse(format!("line {}: row needs three values", lineno + 1)));
                    }
                    explicit.push([r[0], r[1], r[2]]);
                }
                "sample_sizes" => sizes = Some(parse_list(key, value)?),
                "replications" => reps = Some(parse_list::<usize>(key, value)?[0]),
                "seed" => seed = Some(parse_list::<u64>(key, value)?[0]),
                "score" => {
                    score = match value {
                        "unconstrained" => Score::Unconstrained,
                        "admissible" => Score::Admissible,
                        _ => return Err(Error::Parse(format!("score must be unconstrained or admissible, got '{value}'"))),
                    }
                }
                "gamma_sign" => {
                    sign = match value {
                        "sign_rule" => GammaSign::SignRule,
                        "positive" => GammaSign::Positive,
                        _ => return Err(Error::Parse(format!("gamma_sign must be sign_rule or positive, got '{value}'"))),
                    }
                }
                _ => return Err(Error::Parse(format!("line {}: unknown key '{key}'", lineno + 1))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("missing key '{k}'"));
        let mut rows = explicit;
        match (nus, shapes, lambdas) {
            (Some(n), Some(s), Some(l)) => {
                for &a in &n {
                    for &b in &s {
                        for &c in &l {
                            rows.push([a, b, c]);
                        }
                    }
                }
            }
            (None, None, None) => {}
            _ => return Err(Error::Parse("nu, delta/gamma and lambda must be given together".into())),
        }
        let cfg = StudyConfig {
            model: model.ok_or_else(|| missing("model"))?,
            rows,
            sample_sizes: sizes.ok_or_else(|| missing("sample_sizes"))?,
            replications: reps.ok_or_else(|| missing("replications"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            score,
            gamma_sign: sign,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::domain("replications must be at least 1"));
        }
        if self.rows.is_empty() || self.rows.len() > u16::MAX as usize {
            return Err(Error::domain("need between 1 and 65535 parameter rows"));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.len() > 255 {
            return Err(Error::domain("need between 1 and 255 sample sizes"));
        }
        if let Some(m) = self.sample_sizes.iter().find(|&&m| m < 3) {
            return Err(Error::domain(format!("sample sizes must be at least 3, got {m}")));
        }
        if self.replications > u32::MAX as usize {
            return Err(Error::domain("too many replications"));
        }
        for i in 0..self.rows.len() {
            self.model_for(i)?;
        }
        Ok(())
    }

    pub fn model_for(&self, row: usize) -> Result<Model> {
        let [a, b, c] = self.rows[row];
        Ok(match self.model {
            ModelKind::Gen1 => Model::Gen1(GenIParams::new(a, b, c)?),
            ModelKind::Gen2 => Model::Gen2(GenIIParams::new(a, b, c)?),
        })
    }

    /// Stream identifier of one replication: row in bits 48..64, sample-size
    /// index in 40..48, replication in 0..32.
    pub fn stream_id(row: usize, m_index: usize, rep: usize) -> u64 {
        ((row as u64) << 48) | ((m_index as u64) << 40) | rep as u64
    }
}

pub const PARAM_NAMES: [[&str; 3]; 2] = [["nu", "delta", "lambda"], ["nu", "gamma", "lambda"]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    /// True (nu, delta or gamma, lambda).
    pub truth: [f64; 3],
    pub m: usize,
    pub param: String,
    pub bias: f64,
    pub rmse: f64,
    /// Standard deviation of the estimates (denominator = successful replications).
    pub sd: f64,
    pub failures: usize,
    /// Successful replications whose admissible estimate had nu clamped to 1.
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub schema_version: String,
    pub config: StudyConfig,
    pub rng: String,
    pub cells: Vec<Cell>,
}

/// Outcome of one replication: scored estimate and whether nu was clamped.
type Replicate = Option<([f64; 3], bool)>;

fn replicate(cfg: &StudyConfig, model: &Model, row: usize, mi: usize, rep: usize) -> Replicate {
    let m = cfg.sample_sizes[mi];
    let mut rng = RngStream::new(cfg.seed, StudyConfig::stream_id(row, mi, rep));
    let mut fit = || -> Result<EstimationResult> {
        let s = log_moment_summary(&model.sample_n(m, &mut rng)?)?;
        match cfg.model {
            ModelKind::Gen1 => estimate_gen1(&s),
            ModelKind::Gen2 => estimate_gen2_with(&s, cfg.gamma_sign),
        }
    };
    let r = fit().ok()?;
    let est = match (cfg.score, r.unconstrained) {
        (Score::Unconstrained, Some(u)) => [u.nu, u.shape, u.lambda],
        _ => r.triple(),
    };
    est.iter().all(|x| x.is_finite()).then_some((est, r.diagnostics.nu_clamped))
}

/// Run the study on the current rayon pool.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let names = PARAM_NAMES[match cfg.model {
        ModelKind::Gen1 => 0,
        ModelKind::Gen2 => 1,
    }];
    let mut cells = Vec::new();
    for row in 0..cfg.rows.len() {
        let model = cfg.model_for(row)?;
        let truth = cfg.rows[row];
        for (mi, &m) in cfg.sample_sizes.iter().enumerate() {
            let outcomes: Vec<Replicate> = (0..cfg.replications)
                .into_par_iter()
                .map(|rep| replicate(cfg, &model, row, mi, rep))
                .collect();
            let ok: Vec<_> = outcomes.iter().flatten().collect();
            let failures = outcomes.len() - ok.len();
            if 2 * failures > cfg.replications {
                return Err(Error::convergence(
                    "run_study",
                    format!("{failures} of {} replications failed at row {row}, m = {m}", cfg.replications),
                ));
            }
            let clamped = ok.iter().filter(|(_, c)| *c).count();
            let n = ok.len() as f64;
            for (j, name) in names.iter().enumerate() {
                let (mut s1, mut s2) = (0.0, 0.0);
                for (est, _) in &ok {
                    let e = est[j] - truth[j];
                    s1 += e;
                    s2 += e * e;
                }
                let bias = s1 / n;
                let var = ok.iter().map(|(est, _)| (est[j] - truth[j] - bias).powi(2)).sum::<f64>() / n;
                cells.push(Cell {
                    row,
                    truth,
                    m,
                    param: name.to_string(),
                    bias,
                    rmse: (s2 / n).sqrt(),
                    sd: var.sqrt(),
                    failures,
                    clamped,
                });
            }
        }
    }
    Ok(StudyResult {
        schema_version: SCHEMA_VERSION.into(),
        config: cfg.clone(),
        rng: "ChaCha20, stream = row << 48 | m_index << 40 | replication; failed replications excluded from bias/rmse and counted".into(),
        cells,
    })
}

/// Run the study on a dedicated pool of `threads` workers.
pub fn run_study_threads(cfg: &StudyConfig, threads: usize) -> Result<StudyResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::domain(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_study(cfg))
}

impl StudyResult {
    pub fn model_name(&self) -> &'static str {
        match self.config.model {
            ModelKind::Gen1 => "gen1",
            ModelKind::Gen2 => "gen2",
        }
    }

    pub fn cell(&self, row: usize, m: usize, param: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.row == row && c.m == m && c.param == param)
    }

    /// model,nu,delta_or_gamma,lambda,m,param,bias,rmse,failures
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,nu,delta_or_gamma,lambda,m,param,bias,rmse,failures\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.model_name(),
                c.truth[0],
                c.truth[1],
                c.truth[2],
                c.m,
                c.param,
                c.bias,
                c.rmse,
                c.failures
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study results serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> StudyConfig {
        StudyConfig::parse(
            "model = gen1\nnu = 0.7\ndelta = 0.5\nlambda = 0.5\nsample_sizes = 50, 500\nreplications = 20\nseed = 7\n",
        )
        .unwrap()
    }

    #[test]
    fn parses_config() {
        let c = small();
        assert_eq!(c.rows, vec![[0.7, 0.5, 0.5]]);
        assert_eq!(c.sample_sizes, vec![50, 500]);
        assert_eq!(c.score, Score::Unconstrained);
        assert!(StudyConfig::parse("model = gen3").is_err());
        assert!(StudyConfig::parse("model = gen1\nrow = 0.5, 0.5\n").is_err());
        let e = StudyConfig::parse("model = gen1\nrow=0.5,0.5,0.5\nsample_sizes=2\nreplications=1\nseed=1");
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn deterministic_across_pools() {
        let c = small();
        let a = run_study_threads(&c, 1).unwrap();
        let b = run_study_threads(&c, 4).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.cells.len(), 6);
        for c in &a.cells {
            assert!(c.rmse >= c.bias.abs());
            let gap = c.rmse.powi(2) - c.bias.powi(2) - c.sd.powi(2);
            assert!(gap.abs() <= 1e-12 * c.rmse.powi(2).max(1e-300), "{c:?}");
        }
    }

    #[test]
    fn single_replication_rmse_is_abs_bias() {
        let mut c = small();
        c.replications = 1;
        let r = run_study(&c).unwrap();
        for cell in &r.cells {
            assert!(cell.failures == 0);
            assert!((cell.rmse - cell.bias.abs()).abs() <= 1e-15 * cell.rmse.max(1.0));
        }
    }
}
