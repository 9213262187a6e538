//! Renewal counting processes built on the waiting-time laws in [`crate::dist`].

mod operator;
mod pmf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{genml_sample, genml_sample_n, ssml_sample, ssml_sample_n, GenIIParams, GenIParams};
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub use operator::prabhakar_integral;
pub use pmf::{
    fpp_count_variance, fpp_mgf, fpp_state_pmf, fpp_state_pmf_double_series, mean_count,
    state_pmf, MeanCount,
};

/// Cap on simulated events per path; guards against runaway horizons.
pub const MAX_EVENTS: usize = 50_000_000;

/// Waiting-time model of a renewal process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Model {
    Gen1(GenIParams),
    Gen2(GenIIParams),
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Gen1(p) => p.validate(),
            Model::Gen2(p) => p.validate(),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        match self {
            Model::Gen1(p) => genml_sample(p, rng),
            Model::Gen2(p) => ssml_sample(p, rng),
        }
    }

    pub fn sample_n(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        match self {
            Model::Gen1(p) => genml_sample_n(p, n, rng),
            Model::Gen2(p) => ssml_sample_n(p, n, rng),
        }
    }
}

/// When to stop simulating a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stop {
    /// Keep all events in (0, t_max].
    Horizon(f64),
    /// Exactly this many events.
    Events(usize),
}

/// Event epochs of one simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub event_times: Vec<f64>,
    /// The drawn waiting times. Differences of `event_times` lose the short
    /// ones once the epochs grow large, so they are kept separately.
    pub waits: Vec<f64>,
    pub stop: Stop,
}

impl SamplePath {
    /// Build a path from its waiting times.
    pub fn from_waits(waits: Vec<f64>, stop: Stop) -> Self {
        let mut now = 0.0;
        let event_times = waits
            .iter()
            .map(|w| {
                now += w;
                now
            })
            .collect();
        SamplePath { event_times, waits, stop }
    }

    /// N(t) = #{i : T_i <= t}; zero for t < first event, right-continuous.
    pub fn count(&self, t: f64) -> usize {
        self.event_times.partition_point(|&x| x <= t)
    }

    /// Waiting times between successive events.
    pub fn waiting_times(&self) -> &[f64] {
        &self.waits
    }
}

/// Simulate one path by accumulating i.i.d. waiting times.
pub fn simulate_path(model: &Model, stop: Stop, rng: &mut RngStream) -> Result<SamplePath> {
    model.validate()?;
    let mut times = Vec::new();
    let mut waits = Vec::new();
    let mut now = 0.0;
    match stop {
        Stop::Horizon(t_max) => {
            if !(t_max >= 0.0 && t_max.is_finite()) {
                return Err(Error::domain(format!("horizon must be nonnegative, got {t_max}")));
            }
            loop {
                let w = model.sample(rng)?;
                now += w;
                if now > t_max {
                    break;
                }
                if times.len() >= MAX_EVENTS {
                    return Err(Error::domain(format!(
                        "more than {MAX_EVENTS} events before the horizon {t_max}"
                    )));
                }
                times.push(now);
                waits.push(w);
            }
        }
        Stop::Events(m) => {
            if m > MAX_EVENTS {
                return Err(Error::domain(format!("at most {MAX_EVENTS} events per path")));
            }
            times.reserve(m);
            waits.reserve(m);
            for _ in 0..m {
                let w = model.sample(rng)?;
                now += w;
                times.push(now);
                waits.push(w);
            }
        }
    }
    Ok(SamplePath { event_times: times, waits, stop })
}

/// Simulate `n` paths in parallel; path `i` uses `rng.substream(i)`, so the
/// result does not depend on the thread count.
pub fn simulate_paths(model: &Model, stop: Stop, n: usize, rng: &RngStream) -> Result<Vec<SamplePath>> {
    (0..n)
        .into_par_iter()
        .map(|i| simulate_path(model, stop, &mut rng.substream(i as u64)))
        .collect()
}

/// Probabilities p_0..p_K of the count at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePmf {
    pub t: f64,
    pub probs: Vec<f64>,
    /// Pr{N(t) > K} for exact pmfs; 0 for empirical ones.
    pub tail_bound: f64,
    /// Standard error per k, present for empirical pmfs.
    pub std_errors: Option<Vec<f64>>,
}

impl StatePmf {
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// Relative frequencies of N(t) over `n_paths` simulated Generalization II paths.
pub fn empirical_pmf(model: &GenIIParams, t: f64, n_paths: usize, rng: &RngStream) -> Result<StatePmf> {
    empirical_pmf_for(&Model::Gen2(*model), t, n_paths, rng)
}

/// Empirical pmf for any model.
pub fn empirical_pmf_for(model: &Model, t: f64, n_paths: usize, rng: &RngStream) -> Result<StatePmf> {
    if n_paths == 0 {
        return Err(Error::domain("n_paths must be at least 1"));
    }
    let paths = simulate_paths(model, Stop::Horizon(t), n_paths, rng)?;
    let counts: Vec<usize> = paths.iter().map(|p| p.event_times.len()).collect();
    let k_max = counts.iter().copied().max().unwrap_or(0);
    let mut freq = vec![0usize; k_max + 1];
    for c in counts {
        freq[c] += 1;
    }
    let n = n_paths as f64;
    let probs: Vec<f64> = freq.iter().map(|&f| f as f64 / n).collect();
    let se = probs.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(StatePmf {
        t,
        probs,
        tail_bound: 0.0,
        std_errors: Some(se),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_rate() {
        let m = Model::Gen1(GenIParams::new(1.0, 1.0, 5.0).unwrap());
        let mut rng = RngStream::new(3, 0);
        let path = simulate_path(&m, Stop::Horizon(100.0), &mut rng).unwrap();
        let c = path.count(100.0) as f64;
        // Poisson(500): sd ~ 22.4
        assert!((c - 500.0).abs() < 3.0 * 500f64.sqrt(), "{c}");
        assert_eq!(path.count(0.0), 0);
        assert!(path.event_times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn deterministic_paths() {
        let m = Model::Gen2(GenIIParams::new(0.5, 0.5, 0.5).unwrap());
        let a = simulate_paths(&m, Stop::Events(100), 8, &RngStream::new(9, 0)).unwrap();
        let b = simulate_paths(&m, Stop::Events(100), 8, &RngStream::new(9, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.event_times.len() == 100));
    }

    #[test]
    fn waiting_times_invert_cumulative_sums() {
        let p = SamplePath::from_waits(vec![1.0, 0.5, 2.5], Stop::Events(3));
        assert_eq!(p.event_times, vec![1.0, 1.5, 4.0]);
        assert_eq!(p.waiting_times(), &[1.0, 0.5, 2.5]);
        assert_eq!(p.count(1.5), 2);
        assert_eq!(p.count(1.49), 1);
    }
}
