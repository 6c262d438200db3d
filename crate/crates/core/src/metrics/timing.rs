use serde::{Deserialize, Serialize};

/// Stimulation parameters of one selection, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    /// Stimulus duration.
    pub sd: f64,
    /// Inter-stimulus interval.
    pub isi: f64,
    /// Pause between matrix appearance and the first stimulus.
    pub pre_s: f64,
    /// Pause after the last stimulus when no prediction phase follows.
    pub post_s: f64,
    /// Duration of the prediction phase.
    pub ppd: f64,
    /// Repetitions per stimulus.
    pub nrs: u32,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            sd: 0.125,
            isi: 0.125,
            pre_s: 3.0,
            post_s: 3.0,
            ppd: 10.0,
            nrs: 12,
        }
    }
}

impl TimingConfig {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [("sd", self.sd), ("isi", self.isi), ("pre_s", self.pre_s), ("post_s", self.post_s), ("ppd", self.ppd)];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(format!("{name} must be a nonnegative number, got {v}"));
        }
        if self.nrs == 0 {
            return Err("nrs must be at least 1".into());
        }
        Ok(())
    }
}

/// Whether a prediction phase precedes the identification phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Prediction,
    Plain,
}

/// Row and column flashes for one selection: `(rows + cols) * NRS`.
pub fn intensifications(rows: usize, cols: usize, timing: &TimingConfig) -> u64 {
    (rows + cols) as u64 * u64::from(timing.nrs)
}

/// Duration of one selection on a `rows x cols` matrix.
pub fn selection_time(rows: usize, cols: usize, timing: &TimingConfig, phase: Phase) -> f64 {
    let n = intensifications(rows, cols, timing) as f64;
    let tail = match phase {
        Phase::Prediction => timing.ppd,
        Phase::Plain => timing.post_s,
    };
    n * timing.sd + (n - 1.0) * timing.isi + timing.pre_s + tail
}
