//! Synthetic two-channel (HR/RR) corpus generator: periodic base signals,
//! per-patient correlated Gaussian noise, and three perturbation shapes
//! injected into the tail of designated files, all reproducible from a seed.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::signal::{PatientRecord, SampleRecord};

/// The three injected abnormality shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationType {
    /// Constant step offset on HR only.
    Type1,
    /// Linear ramp up on both HR and RR.
    Type2,
    /// Linear ramp up on HR, ramp down on RR.
    Type3,
}

impl PerturbationType {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(PerturbationType::Type1),
            "2" => Ok(PerturbationType::Type2),
            "3" => Ok(PerturbationType::Type3),
            other => Err(Error::Config(format!(
                "unknown perturbation type '{other}', expected 1, 2 or 3"
            ))),
        }
    }
}

impl fmt::Display for PerturbationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            PerturbationType::Type1 => 1,
            PerturbationType::Type2 => 2,
            PerturbationType::Type3 => 3,
        };
        write!(f, "{n}")
    }
}

/// Generator parameters. Defaults reproduce the standard experiment:
/// 20 patients, 8 days at one sample per minute, six perturbed files
/// (two per type) over the trailing 10%.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_patients: usize,
    pub duration_days: u32,
    pub diurnal_period_minutes: u32,
    pub secondary_period_minutes: u32,
    pub diurnal_amplitude: f64,
    pub secondary_amplitude: f64,
    /// Uniform range the per-patient HR-RR noise correlation is drawn from.
    pub noise_cov_range: (f64, f64),
    /// Multiplier on the unit-variance noise; 0 yields the noise-free skeleton.
    pub noise_scale: f64,
    /// Fraction of each designated file that is perturbed, at the tail.
    pub perturbation_fraction: f64,
    /// Perturbation magnitude in standard deviations of the unperturbed signal.
    pub perturbation_scale: f64,
    /// Minutes a type-2/3 ramp takes to reach full magnitude, measured from
    /// the window start; it holds there for the rest of the window. `None`
    /// ramps over the whole window.
    pub ramp_rise_minutes: Option<usize>,
    /// (patient index, type) pairs naming the perturbed files.
    pub perturbed_files: Vec<(usize, PerturbationType)>,
    pub seed: u64,
}

/// Seed used by the documented reference experiment.
pub const DEFAULT_SEED: u64 = 1;

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_patients: 20,
            duration_days: 8,
            diurnal_period_minutes: 1440,
            secondary_period_minutes: 240,
            diurnal_amplitude: 0.25,
            secondary_amplitude: 0.0625,
            noise_cov_range: (0.15, 0.6),
            noise_scale: 1.0,
            perturbation_fraction: 0.10,
            perturbation_scale: 1.5,
            ramp_rise_minutes: Some(216),
            perturbed_files: vec![
                (0, PerturbationType::Type1),
                (1, PerturbationType::Type1),
                (2, PerturbationType::Type2),
                (3, PerturbationType::Type2),
                (4, PerturbationType::Type3),
                (5, PerturbationType::Type3),
            ],
            seed: DEFAULT_SEED,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_patients == 0 {
            return Err(Error::Config("n_patients must be at least 1".into()));
        }
        if self.duration_days == 0 {
            return Err(Error::Config("duration_days must be at least 1".into()));
        }
        if self.diurnal_period_minutes == 0 || self.secondary_period_minutes == 0 {
            return Err(Error::Config("periods must be positive".into()));
        }
        if !(self.perturbation_fraction > 0.0 && self.perturbation_fraction < 1.0) {
            return Err(Error::Config(
                "perturbation_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        let (lo, hi) = self.noise_cov_range;
        if !(0.0 <= lo && lo <= hi && hi < 1.0) {
            return Err(Error::Config(
                "noise_cov_range must satisfy 0 <= lo <= hi < 1".into(),
            ));
        }
        if self.noise_scale < 0.0 || self.perturbation_scale < 0.0 {
            return Err(Error::Config("scales must be non-negative".into()));
        }
        for &(idx, _) in &self.perturbed_files {
            if idx >= self.n_patients {
                return Err(Error::Config(format!(
                    "perturbed file index {idx} out of range for {} patients",
                    self.n_patients
                )));
            }
        }
        Ok(())
    }

    /// Samples per file: one per minute.
    pub fn n_samples(&self) -> usize {
        self.duration_days as usize * 1440
    }

    /// Tail window that receives a perturbation.
    pub fn perturbation_window(&self) -> Range<usize> {
        let n = self.n_samples();
        let len = (self.perturbation_fraction * n as f64).floor() as usize;
        n - len..n
    }

    /// Total perturbed minutes across the corpus.
    pub fn abnormal_minutes(&self) -> usize {
        self.perturbation_window().len() * self.perturbed_files.len()
    }
}

/// Splitmix64: tiny, seedable, and stable across platforms forever, which is
/// what byte-identical corpus regeneration needs.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    cached_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 {
            state: seed,
            cached_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller; draws come in cached pairs.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        // u1 in (0, 1] so the logarithm stays finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64;
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Deterministic per-patient sub-seed so patients can generate independently.
fn patient_seed(master: u64, index: usize) -> u64 {
    let mut rng = SplitMix64::new(
        master ^ (index as u64 + 1).wrapping_mul(0xD1B54A32D192ED03),
    );
    rng.next_u64()
}

/// Noise-free base signal shared by both channels: a diurnal sine plus a
/// low-amplitude four-hour component.
pub fn base_signal(t_minutes: f64, config: &SynthConfig) -> f64 {
    use std::f64::consts::TAU;
    config.diurnal_amplitude * (TAU * t_minutes / config.diurnal_period_minutes as f64).sin()
        + config.secondary_amplitude
            * (TAU * t_minutes / config.secondary_period_minutes as f64).sin()
}

/// Draws the 2x2 noise covariance [[1, rho], [rho, 1]] with rho uniform in
/// the configured range; positive-definite by construction since rho < 1.
pub fn sample_noise_covariance(rng: &mut SplitMix64, range: (f64, f64)) -> [[f64; 2]; 2] {
    let rho = range.0 + rng.next_f64() * (range.1 - range.0);
    [[1.0, rho], [rho, 1.0]]
}

/// Adds the given perturbation over `window`, scaled per channel to
/// `scale * sigma`. Ramps run linearly from zero at the window start to
/// full magnitude after `rise` minutes (the whole window when `None`) and
/// hold there; the final sample always carries the full magnitude.
pub fn apply_perturbation(
    hr: &mut [f64],
    rr: &mut [f64],
    kind: PerturbationType,
    window: Range<usize>,
    sigma_hr: f64,
    sigma_rr: f64,
    scale: f64,
    rise: Option<usize>,
) -> Result<()> {
    if window.is_empty() {
        return Err(Error::EmptyPerturbationWindow);
    }
    if window.end > hr.len() || hr.len() != rr.len() {
        return Err(Error::Data("perturbation window out of range".into()));
    }
    let len = window.len();
    let rise = rise.unwrap_or(len).clamp(1, len);
    let ramp = |idx: usize| -> f64 {
        if rise == 1 {
            1.0
        } else {
            (idx as f64 / (rise - 1) as f64).min(1.0)
        }
    };
    for (idx, t) in window.enumerate() {
        match kind {
            PerturbationType::Type1 => {
                hr[t] += scale * sigma_hr;
            }
            PerturbationType::Type2 => {
                let r = ramp(idx);
                hr[t] += scale * sigma_hr * r;
                rr[t] += scale * sigma_rr * r;
            }
            PerturbationType::Type3 => {
                let r = ramp(idx);
                hr[t] += scale * sigma_hr * r;
                rr[t] -= scale * sigma_rr * r;
            }
        }
    }
    Ok(())
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Generates one patient's two channels, without any perturbation.
fn generate_channels(config: &SynthConfig, index: usize) -> (Vec<f64>, Vec<f64>) {
    let n = config.n_samples();
    let mut rng = SplitMix64::new(patient_seed(config.seed, index));
    let cov = sample_noise_covariance(&mut rng, config.noise_cov_range);
    let rho = cov[0][1];
    let mix = (1.0 - rho * rho).sqrt();

    let mut hr = Vec::with_capacity(n);
    let mut rr = Vec::with_capacity(n);
    for t in 0..n {
        let base = base_signal(t as f64, config);
        let z1 = rng.next_normal();
        let z2 = rng.next_normal();
        hr.push(base + config.noise_scale * z1);
        rr.push(base + config.noise_scale * (rho * z1 + mix * z2));
    }
    (hr, rr)
}

/// Generates the full corpus: every patient shares the base signal shape,
/// carries its own correlated noise, and designated files receive their
/// perturbation over the tail window. Fully reproducible from the seed.
pub fn generate_corpus(config: &SynthConfig) -> Result<Vec<PatientRecord>> {
    config.validate()?;
    let width = patient_id_width(config.n_patients);
    let mut records = Vec::with_capacity(config.n_patients);
    for index in 0..config.n_patients {
        let (mut hr, mut rr) = generate_channels(config, index);
        if let Some(&(_, kind)) = config.perturbed_files.iter().find(|(i, _)| *i == index) {
            // Magnitude is calibrated on the file's own unperturbed spread.
            let sigma_hr = population_std(&hr);
            let sigma_rr = population_std(&rr);
            apply_perturbation(
                &mut hr,
                &mut rr,
                kind,
                config.perturbation_window(),
                sigma_hr,
                sigma_rr,
                config.perturbation_scale,
                config.ramp_rise_minutes,
            )?;
        }
        let samples: Vec<SampleRecord> = hr
            .iter()
            .zip(&rr)
            .enumerate()
            .map(|(t, (&h, &r))| SampleRecord::new(t as i64, vec![Some(h), Some(r)]))
            .collect();
        records.push(PatientRecord::new(
            format!("p{index:0width$}"),
            vec!["hr".into(), "rr".into()],
            samples,
        )?);
    }
    Ok(records)
}

/// Zero-padded width so patient ids sort in generation order.
pub fn patient_id_width(n_patients: usize) -> usize {
    n_patients.saturating_sub(1).to_string().len().max(2)
}
