//! Monte Carlo simulation of protocol rounds, parameter estimation from the
//! resulting transcript, and a brute-force sweep over Bell-diagonal states.
//!
//! Randomness is counter based: round `i` reads a fixed window of words from
//! a ChaCha8 stream keyed by the master seed, so a transcript does not depend
//! on how rounds are split across threads.

use std::f64::consts::TAU;
use std::fmt;
use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{holevo_exact, AttackSpec};
use crate::bounds::{
    chi_lambda_upper, dw_rate, holevo_bound, KeyRateReport, ObservedStatistics, TSIRELSON,
};
use crate::error::{Error, Result};
use crate::qmat::random::random_simplex;
use crate::qmat::{
    chsh_value, joint_probabilities, BellDiagonalSpectrum, DensityMatrix, PlanarMeasurement,
};

const PROB_SUM_TOL: f64 = 1e-12;
const CHUNK: usize = 4096;
/// u64 draws per round: Alice's setting, Bob's setting, the outcome pair.
const DRAWS_PER_ROUND: u128 = 3;
const ROUND_STREAM: u64 = 0;
const COIN_STREAM: u64 = 1;

pub const ALICE_LABELS: [&str; 3] = ["A0", "A1", "A2"];
pub const BOB_LABELS: [&str; 2] = ["B1", "B2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n_rounds: u64,
    /// Over (A0, A1, A2).
    pub setting_probs_alice: [f64; 3],
    /// Over (B1, B2).
    pub setting_probs_bob: [f64; 2],
    pub seed: u64,
    pub symmetrize: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n_rounds: 100_000,
            setting_probs_alice: [0.5, 0.25, 0.25],
            setting_probs_bob: [0.5, 0.5],
            seed: 0,
            symmetrize: true,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::InvalidArgument("n_rounds must be at least 1".into()));
        }
        check_distribution("Alice", &self.setting_probs_alice)?;
        check_distribution("Bob", &self.setting_probs_bob)
    }
}

fn check_distribution(who: &str, probs: &[f64]) -> Result<()> {
    if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Probability { value: p });
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidArgument(format!(
            "{who}'s setting probabilities sum to {sum}"
        )));
    }
    Ok(())
}

/// One protocol round. Outcomes are ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Round {
    /// 0, 1, 2 for A0, A1, A2
    pub alice_setting: u8,
    /// 0, 1 for B1, B2
    pub bob_setting: u8,
    pub a_out: i8,
    pub b_out: i8,
}

/// Joint outcome tables for every setting pair, `tables[x][y][a][b]` with + first.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeModel {
    pub tables: [[[[f64; 2]; 2]; 2]; 3],
}

impl OutcomeModel {
    pub fn from_attack(attack: &AttackSpec) -> Result<Self> {
        let bob = [attack.b1, attack.b2];
        let mut tables = [[[[0.0; 2]; 2]; 2]; 3];
        for (y, &b) in bob.iter().enumerate() {
            tables[0][y] = attack.key_table(b)?;
            tables[1][y] = joint_probabilities(&attack.rho_ab, attack.a1, b)?;
            tables[2][y] = joint_probabilities(&attack.rho_ab, attack.a2, b)?;
        }
        Ok(Self { tables })
    }

    /// Plain planar measurements on a two-qubit state, A0 without added noise.
    pub fn from_state(
        rho: &DensityMatrix,
        alice: [PlanarMeasurement; 3],
        bob: [PlanarMeasurement; 2],
    ) -> Result<Self> {
        let mut tables = [[[[0.0; 2]; 2]; 2]; 3];
        for (x, &a) in alice.iter().enumerate() {
            for (y, &b) in bob.iter().enumerate() {
                tables[x][y] = joint_probabilities(rho, a, b)?;
            }
        }
        Ok(Self { tables })
    }

    /// Exact ⟨a b⟩ for a setting pair.
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        let t = &self.tables[x][y];
        t[0][0] + t[1][1] - t[0][1] - t[1][0]
    }
}

fn unit_float(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn pick(u: f64, probs: &[f64]) -> usize {
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding at the top end: last index with positive mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn stream_at(seed: u64, stream: u64, first_round: u64, words_per_round: u128) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // word_pos counts u32 words; every u64 draw consumes two.
    rng.set_word_pos(first_round as u128 * words_per_round * 2);
    rng
}

/// Draw the rounds of a transcript (no symmetrization).
pub fn generate_transcript(model: &OutcomeModel, config: &ProtocolConfig) -> Result<Vec<Round>> {
    config.validate()?;
    let n = usize::try_from(config.n_rounds)
        .map_err(|_| Error::InvalidArgument("n_rounds exceeds address space".into()))?;
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<Vec<Round>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            let mut rng = stream_at(config.seed, ROUND_STREAM, start as u64, DRAWS_PER_ROUND);
            (start..end)
                .map(|_| {
                    let x = pick(unit_float(rng.next_u64()), &config.setting_probs_alice);
                    let y = pick(unit_float(rng.next_u64()), &config.setting_probs_bob);
                    let t = &model.tables[x][y];
                    let cell = pick(
                        unit_float(rng.next_u64()),
                        &[t[0][0], t[0][1], t[1][0], t[1][1]],
                    );
                    let sign = |bit: usize| if bit == 0 { 1 } else { -1 };
                    Round {
                        alice_setting: x as u8,
                        bob_setting: y as u8,
                        a_out: sign(cell / 2),
                        b_out: sign(cell % 2),
                    }
                })
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Flip both outcomes of each round on a shared coin of bias one half.
pub fn symmetrize_transcript(records: &[Round], seed: u64) -> Vec<Round> {
    symmetrize_transcript_with(records, 0.5, seed)
}

/// Flip both outcomes of round `i` when the shared coin for `i` lands below `flip_prob`.
pub fn symmetrize_transcript_with(records: &[Round], flip_prob: f64, seed: u64) -> Vec<Round> {
    records
        .par_chunks(CHUNK)
        .enumerate()
        .flat_map_iter(|(c, chunk)| {
            let mut rng = stream_at(seed, COIN_STREAM, (c * CHUNK) as u64, 1);
            chunk
                .iter()
                .map(|r| {
                    if unit_float(rng.next_u64()) < flip_prob {
                        Round {
                            a_out: -r.a_out,
                            b_out: -r.b_out,
                            ..*r
                        }
                    } else {
                        *r
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn within(&self, target: f64, n_se: f64) -> bool {
        (self.value - target).abs() <= n_se * self.se
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub n_rounds: u64,
    /// (A0, B1) rounds
    pub n_key: u64,
    /// `n_test[x][y]` for A_{x+1}, B_{y+1}
    pub n_test: [[u64; 2]; 2],
    /// (A0, B2) rounds, used by neither estimator
    pub n_discarded: u64,
    pub qber: Estimate,
    pub chsh: Estimate,
    /// Empirical ⟨a b⟩ for the four test pairs.
    pub correlators: [[f64; 2]; 2],
    /// Mean outcome per setting; `None` if the setting never occurred.
    pub marginal_means_alice: [Option<f64>; 3],
    pub marginal_means_bob: [Option<f64>; 2],
    /// Rates at (Ŝ, Q̂), with |Ŝ| capped at 2√2. `None` if Q̂ > 1/2.
    pub key_rates: Option<KeyRateReport>,
    pub chsh_capped: bool,
}

/// `counts[x][y][a][b]`, outcome index 0 for +1.
type Counts = [[[[u64; 2]; 2]; 2]; 3];

fn count(records: &[Round]) -> Counts {
    records
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut c: Counts = [[[[0; 2]; 2]; 2]; 3];
            for r in chunk {
                let a = usize::from(r.a_out < 0);
                let b = usize::from(r.b_out < 0);
                c[r.alice_setting as usize][r.bob_setting as usize][a][b] += 1;
            }
            c
        })
        .reduce(
            || [[[[0; 2]; 2]; 2]; 3],
            |mut acc, c| {
                for x in 0..3 {
                    for y in 0..2 {
                        for a in 0..2 {
                            for b in 0..2 {
                                acc[x][y][a][b] += c[x][y][a][b];
                            }
                        }
                    }
                }
                acc
            },
        )
}

pub fn estimate_parameters(records: &[Round]) -> Result<EstimationReport> {
    if let Some(bad) = records.iter().find(|r| {
        r.alice_setting > 2 || r.bob_setting > 1 || r.a_out.abs() != 1 || r.b_out.abs() != 1
    }) {
        return Err(Error::InvalidArgument(format!("malformed round {bad:?}")));
    }
    let c = count(records);
    let total = |x: usize, y: usize| c[x][y].iter().flatten().sum::<u64>();
    let starved = |x: usize, y: usize| {
        Error::EstimationUndefined(format!("({}, {})", ALICE_LABELS[x], BOB_LABELS[y]))
    };

    let n_key = total(0, 0);
    if n_key == 0 {
        return Err(starved(0, 0));
    }
    let errors = c[0][0][0][1] + c[0][0][1][0];
    let q = errors as f64 / n_key as f64;
    let qber = Estimate {
        value: q,
        se: (q * (1.0 - q) / n_key as f64).sqrt(),
    };

    let mut n_test = [[0u64; 2]; 2];
    let mut correlators = [[0.0; 2]; 2];
    let mut s = 0.0;
    let mut var = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let n = total(x + 1, y);
            if n == 0 {
                return Err(starved(x + 1, y));
            }
            let t = &c[x + 1][y];
            let same = (t[0][0] + t[1][1]) as i64;
            let diff = (t[0][1] + t[1][0]) as i64;
            let e = (same - diff) as f64 / n as f64;
            n_test[x][y] = n;
            correlators[x][y] = e;
            s += if x == 1 && y == 1 { -e } else { e };
            var += (1.0 - e * e) / n as f64;
        }
    }
    let chsh = Estimate {
        value: s,
        se: var.sqrt(),
    };

    let mean = |plus: u64, minus: u64| {
        let n = plus + minus;
        (n > 0).then(|| (plus as f64 - minus as f64) / n as f64)
    };
    let marginal_means_alice = [0, 1, 2].map(|x| {
        let plus: u64 = (0..2).map(|y| c[x][y][0][0] + c[x][y][0][1]).sum();
        let minus: u64 = (0..2).map(|y| c[x][y][1][0] + c[x][y][1][1]).sum();
        mean(plus, minus)
    });
    let marginal_means_bob = [0, 1].map(|y| {
        let plus: u64 = (0..3).map(|x| c[x][y][0][0] + c[x][y][1][0]).sum();
        let minus: u64 = (0..3).map(|x| c[x][y][0][1] + c[x][y][1][1]).sum();
        mean(plus, minus)
    });

    let capped = s.clamp(-TSIRELSON, TSIRELSON);
    let key_rates = ObservedStatistics::new(capped, q).and_then(dw_rate).ok();

    Ok(EstimationReport {
        n_rounds: records.len() as u64,
        n_key,
        n_test,
        n_discarded: total(0, 1),
        qber,
        chsh,
        correlators,
        marginal_means_alice,
        marginal_means_bob,
        key_rates,
        chsh_capped: capped != s,
    })
}

/// Transcript (after optional symmetrization) together with its estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub transcript: Vec<Round>,
    pub report: EstimationReport,
}

pub fn run_protocol(attack: &AttackSpec, config: &ProtocolConfig) -> Result<EstimationReport> {
    Ok(run_protocol_with_transcript(attack, config)?.report)
}

pub fn run_protocol_with_transcript(
    attack: &AttackSpec,
    config: &ProtocolConfig,
) -> Result<ProtocolRun> {
    let model = OutcomeModel::from_attack(attack)?;
    run_model(&model, config)
}

pub fn run_model(model: &OutcomeModel, config: &ProtocolConfig) -> Result<ProtocolRun> {
    let mut transcript = generate_transcript(model, config)?;
    if config.symmetrize {
        transcript = symmetrize_transcript(&transcript, config.seed);
    }
    let report = estimate_parameters(&transcript)?;
    Ok(ProtocolRun { transcript, report })
}

/// CSV with columns round_index, alice_setting, bob_setting, a_out, b_out.
pub fn write_transcript_csv<W: Write>(records: &[Round], mut out: W) -> std::io::Result<()> {
    writeln!(out, "round_index,alice_setting,bob_setting,a_out,b_out")?;
    for (i, r) in records.iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{}",
            ALICE_LABELS[r.alice_setting as usize],
            BOB_LABELS[r.bob_setting as usize],
            r.a_out,
            r.b_out
        )?;
    }
    Ok(())
}

/// One Bell-diagonal state with planar settings, evaluated against both bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSample {
    pub index: u64,
    pub spectrum: BellDiagonalSpectrum,
    /// (a1, a2, b1, b2) in radians.
    pub angles: [f64; 4],
    pub chsh: f64,
    pub chi_exact: f64,
    pub bound: f64,
    pub chi_lambda_upper: f64,
}

impl OracleSample {
    /// F(S) − χ
    pub fn slack_bound(&self) -> f64 {
        self.bound - self.chi_exact
    }

    /// (H(λ) − h(λΦ+ + λΦ−)) − χ
    pub fn slack_lambda(&self) -> f64 {
        self.chi_lambda_upper - self.chi_exact
    }

    pub fn violates(&self, tol: f64) -> bool {
        self.slack_bound() < -tol || self.slack_lambda() < -tol
    }
}

impl fmt::Display for OracleSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = self.spectrum.as_array();
        write!(
            f,
            "sample {}: lambda=({:.17e}, {:.17e}, {:.17e}, {:.17e}) angles=({:.17e}, {:.17e}, {:.17e}, {:.17e}) S={:.17e} chi={:.17e} F(S)={:.17e} chi_lambda={:.17e}",
            self.index, l[0], l[1], l[2], l[3],
            self.angles[0], self.angles[1], self.angles[2], self.angles[3],
            self.chsh, self.chi_exact, self.bound, self.chi_lambda_upper
        )
    }
}

pub fn oracle_sample(
    index: u64,
    spectrum: BellDiagonalSpectrum,
    angles: [f64; 4],
) -> Result<OracleSample> {
    let rho = spectrum.state();
    let [a1, a2, b1, b2] = angles.map(PlanarMeasurement::new);
    let chsh = chsh_value(&rho, a1, a2, b1, b2)?;
    let chi_exact = holevo_exact(&rho, b1)?;
    Ok(OracleSample {
        index,
        spectrum,
        angles,
        chsh,
        chi_exact,
        bound: holevo_bound(chsh.clamp(-TSIRELSON, TSIRELSON))?,
        chi_lambda_upper: chi_lambda_upper(&spectrum),
    })
}

pub const ORACLE_TOL: f64 = 1e-9;
const MAX_REPORTED_VIOLATIONS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n_samples: u64,
    pub seed: u64,
    pub n_violations: u64,
    /// First violations by sample index.
    pub violations: Vec<OracleSample>,
    pub min_slack_bound: f64,
    pub argmin_bound: OracleSample,
    pub min_slack_lambda: f64,
    pub argmin_lambda: OracleSample,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.n_violations == 0
    }
}

fn draw_oracle_sample(seed: u64, index: u64) -> Result<OracleSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let weights: [f64; 4] = random_simplex(&mut rng);
    let spectrum = BellDiagonalSpectrum::canonical_from(weights, rng.gen_range(0..3))?;
    let angles = [(); 4].map(|_| rng.gen_range(0.0..TAU));
    oracle_sample(index, spectrum, angles)
}

/// Random canonical Bell-diagonal states and planar settings, checked against
/// F(S) and the Bell-diagonal entropy bound.
pub fn oracle_step3_sweep(n_samples: u64, seed: u64) -> Result<OracleReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "oracle needs at least one sample".into(),
        ));
    }
    let samples: Vec<OracleSample> = (0..n_samples)
        .into_par_iter()
        .map(|i| draw_oracle_sample(seed, i))
        .collect::<Result<_>>()?;

    // ties keep the lower index, so the report is independent of scheduling
    let argmin = |slack: fn(&OracleSample) -> f64| {
        samples
            .iter()
            .min_by(|a, b| slack(a).total_cmp(&slack(b)).then(a.index.cmp(&b.index)))
            .expect("nonempty")
            .clone()
    };
    let argmin_bound = argmin(OracleSample::slack_bound);
    let argmin_lambda = argmin(OracleSample::slack_lambda);
    let violating: Vec<&OracleSample> = samples.iter().filter(|s| s.violates(ORACLE_TOL)).collect();

    Ok(OracleReport {
        n_samples,
        seed,
        n_violations: violating.len() as u64,
        violations: violating
            .into_iter()
            .take(MAX_REPORTED_VIOLATIONS)
            .cloned()
            .collect(),
        min_slack_bound: argmin_bound.slack_bound(),
        min_slack_lambda: argmin_lambda.slack_lambda(),
        argmin_bound,
        argmin_lambda,
    })
}
