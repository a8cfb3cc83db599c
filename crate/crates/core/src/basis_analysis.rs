//! Evaluation of the even theta functions `z -> theta[k](2z)` at 2-torsion
//! points, their normalization to the sign matrix `M`, the span of the fourth
//! powers `theta[k](z)^4`, and detection of vanishing theta-nulls.
//!
//! All rank statements are numerical: a singular value counts as zero when it
//! falls below `rel_sv_threshold` times the largest one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::char2::{self, Characteristic};
use crate::error::{Error, Result};
use crate::identities;
use crate::mmatrix::SignMatrix;
use crate::theta_eval::{self, PeriodMatrix, Point, TruncationPolicy};

/// Default relative cutoff for vanishing theta-nulls.
pub const DEFAULT_NULL_THRESHOLD: f64 = 1e-8;

/// Nulls between the threshold and this relative size make a verdict unreliable.
pub const WARN_NULL_BAND: f64 = 1e-4;

/// Largest tolerated `m_deviation` for a consistent report.
pub const M_DEVIATION_TOL: f64 = 1e-6;

/// Relative size below which a normalizing theta value counts as zero.
const NEAR_ZERO: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NumericalRankPolicy {
    pub rel_sv_threshold: f64,
}

impl Default for NumericalRankPolicy {
    fn default() -> Self {
        NumericalRankPolicy {
            rel_sv_threshold: 1e-7,
        }
    }
}

impl NumericalRankPolicy {
    pub fn new(rel_sv_threshold: f64) -> Result<Self> {
        let p = NumericalRankPolicy { rel_sv_threshold };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_sv_threshold > 0.0 && self.rel_sv_threshold < 1.0) {
            return Err(Error::InvalidPolicy(format!(
                "rel_sv_threshold = {:e} must lie in (0, 1)",
                self.rel_sv_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankInfo {
    pub rank: usize,
    /// Singular values divided by the largest, descending.
    pub relative_singular_values: Vec<f64>,
}

pub fn numerical_rank(
    matrix: &DMatrix<Complex64>,
    policy: &NumericalRankPolicy,
) -> Result<RankInfo> {
    policy.validate()?;
    let mut sv: Vec<f64> = matrix.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv.first().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Ok(RankInfo {
            rank: 0,
            relative_singular_values: vec![0.0; sv.len()],
        });
    }
    let rel: Vec<f64> = sv.iter().map(|s| s / top).collect();
    Ok(RankInfo {
        rank: rel.iter().filter(|&&s| s > policy.rel_sv_threshold).count(),
        relative_singular_values: rel,
    })
}

/// `theta[k](2 z_a)` for even `k` (rows) and `a` in `even_points(kappa0)` (columns).
#[derive(Clone, Debug)]
pub struct EvaluationMatrix {
    pub kappa0: Characteristic,
    pub rows: Vec<Characteristic>,
    pub cols: Vec<Characteristic>,
    pub values: DMatrix<Complex64>,
}

impl EvaluationMatrix {
    pub fn entry(&self, row: &Characteristic, col: &Characteristic) -> Option<Complex64> {
        let i = self.rows.iter().position(|r| r == row)?;
        let j = self.cols.iter().position(|c| c == col)?;
        Some(self.values[(i, j)])
    }

    /// Rank after scaling each column to unit norm; a column rescaling is a
    /// change of trivialization at that point and leaves the rank alone.
    pub fn rank(&self, policy: &NumericalRankPolicy) -> Result<RankInfo> {
        let mut scaled = self.values.clone();
        for mut col in scaled.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= Complex64::new(norm, 0.0);
            }
        }
        numerical_rank(&scaled, policy)
    }
}

fn require_even(c: &Characteristic) -> Result<()> {
    if !c.is_even() {
        return Err(Error::OddCharacteristic(c.to_string()));
    }
    Ok(())
}

/// Doubled argument of the column attached to the 2-torsion point `a`: a
/// lattice vector whose half shifts characteristics by `a`.
fn doubled_point(a: &Characteristic, tau: &PeriodMatrix) -> Result<Point> {
    Ok(theta_eval::translation_point(a, tau)?.scaled(2.0))
}

pub fn evaluation_matrix(
    tau: &PeriodMatrix,
    kappa0: &Characteristic,
    policy: &TruncationPolicy,
) -> Result<EvaluationMatrix> {
    require_even(kappa0)?;
    if kappa0.genus() != tau.genus() {
        return Err(Error::GenusMismatch {
            left: kappa0.genus(),
            right: tau.genus(),
        });
    }
    let rows = char2::even_characteristics(tau.genus())?;
    let cols = char2::even_points(kappa0)?;
    let points: Vec<Point> = cols
        .iter()
        .map(|a| doubled_point(a, tau))
        .collect::<Result<_>>()?;
    let n = rows.len();
    let flat: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            Ok(theta_eval::theta_with_char(&rows[i], &points[j], tau, policy)?.value)
        })
        .collect::<Result<_>>()?;
    Ok(EvaluationMatrix {
        kappa0: *kappa0,
        rows,
        cols,
        values: DMatrix::from_row_slice(n, n, &flat),
    })
}

/// `[theta[k](0) theta[k'](2 z_a)] / [theta[k](2 z_a) theta[k'](0)]` from the
/// four theta values.
pub fn mu_from_values(
    null_kappa: Complex64,
    null_kappa_prime: Complex64,
    at_a_kappa: Complex64,
    at_a_kappa_prime: Complex64,
) -> Complex64 {
    (null_kappa * at_a_kappa_prime) / (at_a_kappa * null_kappa_prime)
}

fn nonzero(v: &theta_eval::ThetaValue, what: impl FnOnce() -> String) -> Result<Complex64> {
    if v.value.norm() < NEAR_ZERO * v.term_modulus_sum {
        return Err(Error::NearZeroDenominator {
            modulus: v.value.norm(),
            context: what(),
        });
    }
    Ok(v.value)
}

/// The quotient `mu(a, k, k')`, equal to `k(a) k'(a)` when no theta-null vanishes.
pub fn mu(
    a: &Characteristic,
    kappa: &Characteristic,
    kappa_prime: &Characteristic,
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    require_even(kappa)?;
    require_even(kappa_prime)?;
    let zero = Point::zero(tau.genus());
    let at = doubled_point(a, tau)?;
    let null_k = theta_eval::theta_with_char(kappa, &zero, tau, policy)?;
    let null_kp = theta_eval::theta_with_char(kappa_prime, &zero, tau, policy)?;
    let at_k = theta_eval::theta_with_char(kappa, &at, tau, policy)?;
    let at_kp = theta_eval::theta_with_char(kappa_prime, &at, tau, policy)?;
    let den_at = nonzero(&at_k, || format!("theta[{kappa}] at 2-torsion point {a}"))?;
    let den_null = nonzero(&null_kp, || format!("theta-null of {kappa_prime}"))?;
    Ok(mu_from_values(null_k.value, den_null, den_at, at_kp.value))
}

/// Theta-nulls with their sizes relative to the largest even one.
#[derive(Clone, Debug, Serialize)]
pub struct NullScan {
    pub nulls: Vec<(Characteristic, Complex64)>,
    pub max_modulus: f64,
    pub null_threshold: f64,
    pub vanishing: Vec<Characteristic>,
    /// Relative size in `[null_threshold, WARN_NULL_BAND)`.
    pub near_vanishing: Vec<Characteristic>,
}

impl NullScan {
    pub fn relative(&self, c: &Characteristic) -> Option<f64> {
        self.nulls
            .iter()
            .find(|(k, _)| k == c)
            .map(|(_, v)| v.norm() / self.max_modulus)
    }
}

pub fn scan_nulls(
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
    null_threshold: f64,
) -> Result<NullScan> {
    if !(null_threshold > 0.0 && null_threshold < 1.0) {
        return Err(Error::InvalidPolicy(format!(
            "null_threshold = {null_threshold:e} must lie in (0, 1)"
        )));
    }
    let nulls = theta_eval::theta_nulls(tau, policy)?;
    let max_modulus = nulls.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let mut vanishing = Vec::new();
    let mut near_vanishing = Vec::new();
    for (c, v) in &nulls {
        let rel = v.norm() / max_modulus;
        if rel < null_threshold {
            vanishing.push(*c);
        } else if rel < WARN_NULL_BAND {
            near_vanishing.push(*c);
        }
    }
    Ok(NullScan {
        nulls,
        max_modulus,
        null_threshold,
        vanishing,
        near_vanishing,
    })
}

/// Even characteristics whose theta-null is below `null_threshold` times the largest.
pub fn vanishing_nulls(
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
    null_threshold: f64,
) -> Result<Vec<Characteristic>> {
    Ok(scan_nulls(tau, policy, null_threshold)?.vanishing)
}

/// The evaluation matrix rescaled so that row `b` (the section `b + kappa0`)
/// and column `a` hold `<a, b>`.
#[derive(Clone, Debug)]
pub struct NormalizedEvaluation {
    /// Labels `b` of the rows and labels `a` of the columns: `even_points(kappa0)`.
    pub index: Vec<Characteristic>,
    pub values: DMatrix<Complex64>,
    pub reference: SignMatrix,
    /// `max |values - reference|`.
    pub m_deviation: f64,
}

pub fn normalized_evaluation_matrix(
    tau: &PeriodMatrix,
    kappa0: &Characteristic,
    policy: &TruncationPolicy,
    null_threshold: f64,
) -> Result<NormalizedEvaluation> {
    require_even(kappa0)?;
    let scan = scan_nulls(tau, policy, null_threshold)?;
    if !scan.vanishing.is_empty() {
        return Err(Error::VanishingNull(
            scan.vanishing.iter().map(|c| c.to_string()).collect(),
        ));
    }
    let ev = evaluation_matrix(tau, kappa0, policy)?;
    normalize(&ev)
}

/// Normalizes an evaluation matrix. Column `a` is divided by the
/// `kappa0` entry, then row `b + kappa0` by its value at `a = 0`.
pub fn normalize(ev: &EvaluationMatrix) -> Result<NormalizedEvaluation> {
    let kappa0 = ev.kappa0;
    let reference = SignMatrix::pairing_table(&kappa0)?;
    let index = reference.index().to_vec();
    let n = index.len();
    let row_of = |k: &Characteristic| ev.rows.iter().position(|r| r == k);
    let base = row_of(&kappa0).expect("kappa0 is an even row");
    debug_assert!(ev.cols[0].is_zero());

    let mut values = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (i, b) in index.iter().enumerate() {
        let kappa = char2::translate(b, &kappa0)?;
        let row = row_of(&kappa).expect("translate of an even point is even");
        let at_zero = ev.values[(row, 0)] / ev.values[(base, 0)];
        for j in 0..n {
            let col_scale = ev.values[(base, j)];
            if col_scale.norm() == 0.0 || at_zero.norm() == 0.0 {
                return Err(Error::NearZeroDenominator {
                    modulus: col_scale.norm().min(at_zero.norm()),
                    context: format!("normalizing row {kappa}, column {}", ev.cols[j]),
                });
            }
            values[(i, j)] = ev.values[(row, j)] / col_scale / at_zero;
        }
    }
    let mut m_deviation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = Complex64::new(reference.entry(i, j) as f64, 0.0);
            m_deviation = m_deviation.max((values[(i, j)] - want).norm());
        }
    }
    Ok(NormalizedEvaluation {
        index,
        values,
        reference,
        m_deviation,
    })
}

/// Seeded points for the fourth-power sample matrix.
pub fn fourth_power_samples(tau: &PeriodMatrix, n_samples: usize, seed: u64) -> Result<Vec<Point>> {
    let points = identities::sample_points(tau, n_samples, seed);
    for i in 0..points.len() {
        for j in 0..i {
            if points[i] == points[j] {
                return Err(Error::DegenerateSampling(j, i));
            }
        }
    }
    Ok(points)
}

/// Numerical rank of `V[i, k] = theta[k](z_i)^4` over even `k`, each sample
/// row scaled to unit norm.
pub fn fourth_power_rank_info(
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
    rank_policy: &NumericalRankPolicy,
    n_samples: usize,
    seed: u64,
) -> Result<RankInfo> {
    let evens = char2::even_characteristics(tau.genus())?;
    let d = evens.len();
    if n_samples < 2 * d {
        return Err(Error::Input(format!(
            "n_samples = {n_samples} must be at least 2 d+ = {}",
            2 * d
        )));
    }
    let points = fourth_power_samples(tau, n_samples, seed)?;
    let rows: Vec<Vec<Complex64>> = points
        .par_iter()
        .map(|z| {
            let mut row: Vec<Complex64> = theta_eval::theta_batch(&evens, z, tau, policy)?
                .into_iter()
                .map(|v| v.powi(4))
                .collect();
            let norm = row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    numerical_rank(&DMatrix::from_row_slice(n_samples, d, &flat), rank_policy)
}

pub fn fourth_power_rank(
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
    rank_policy: &NumericalRankPolicy,
    n_samples: usize,
    seed: u64,
) -> Result<usize> {
    Ok(fourth_power_rank_info(tau, policy, rank_policy, n_samples, seed)?.rank)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    /// Verdicts agree with the vanishing-null count.
    Consistent,
    /// Verdicts contradict the vanishing-null count.
    Inconsistent,
    /// A theta-null is too close to zero for a reliable verdict.
    Warn,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisReport {
    pub tau: PeriodMatrix,
    pub kappa0: Characteristic,
    pub d_plus: usize,
    pub vanishing_nulls: Vec<Characteristic>,
    pub near_vanishing_nulls: Vec<Characteristic>,
    pub null_threshold: f64,
    pub null_relative_moduli: Vec<(Characteristic, f64)>,
    pub ev_matrix_rank: usize,
    pub ev_singular_values: Vec<f64>,
    pub fourth_power_rank: usize,
    pub fourth_power_singular_values: Vec<f64>,
    /// Only computed when no theta-null vanishes.
    pub m_deviation: Option<f64>,
    pub theorem11_verdict: bool,
    pub theorem12_verdict: bool,
    pub status: ReportStatus,
    pub issues: Vec<String>,
    pub truncation: TruncationPolicy,
    pub rank_policy: NumericalRankPolicy,
    pub n_samples: usize,
    pub seed: u64,
}

impl BasisReport {
    /// Number of characteristics whose theta-null vanishes.
    pub fn vanishing_count(&self) -> usize {
        self.vanishing_nulls.len()
    }
}

/// Runs every basis test on `tau` and cross-checks the verdicts against the
/// vanishing-null count.
pub fn basis_report(
    tau: &PeriodMatrix,
    kappa0: &Characteristic,
    policy: &TruncationPolicy,
    rank_policy: &NumericalRankPolicy,
    null_threshold: f64,
    seed: u64,
) -> Result<BasisReport> {
    require_even(kappa0).map_err(Error::at_stage("kappa0"))?;
    rank_policy
        .validate()
        .map_err(Error::at_stage("rank policy"))?;
    let d_plus = char2::even_count(tau.genus());
    let n_samples = 2 * d_plus;

    let scan = scan_nulls(tau, policy, null_threshold).map_err(Error::at_stage("theta-nulls"))?;
    let ev =
        evaluation_matrix(tau, kappa0, policy).map_err(Error::at_stage("evaluation matrix"))?;
    let ev_rank = ev
        .rank(rank_policy)
        .map_err(Error::at_stage("evaluation rank"))?;
    let fp = fourth_power_rank_info(tau, policy, rank_policy, n_samples, seed)
        .map_err(Error::at_stage("fourth-power rank"))?;
    let m_deviation = if scan.vanishing.is_empty() {
        Some(
            normalize(&ev)
                .map_err(Error::at_stage("normalization"))?
                .m_deviation,
        )
    } else {
        None
    };

    let theorem11_verdict = ev_rank.rank == d_plus;
    let theorem12_verdict = fp.rank == d_plus;
    let no_vanishing = scan.vanishing.is_empty();
    let k = scan.vanishing.len();
    let mut issues = Vec::new();
    if theorem11_verdict != no_vanishing {
        issues.push(format!(
            "evaluation-matrix verdict {theorem11_verdict} but {k} vanishing null(s)"
        ));
    }
    if theorem12_verdict != no_vanishing {
        issues.push(format!(
            "fourth-power verdict {theorem12_verdict} but {k} vanishing null(s)"
        ));
    }
    if d_plus - fp.rank != k {
        issues.push(format!(
            "fourth-power corank {} differs from vanishing-null count {k}",
            d_plus - fp.rank
        ));
    }
    if d_plus - ev_rank.rank != k {
        issues.push(format!(
            "evaluation-matrix corank {} differs from vanishing-null count {k}",
            d_plus - ev_rank.rank
        ));
    }
    if let Some(dev) = m_deviation {
        if !(dev < M_DEVIATION_TOL) {
            issues.push(format!(
                "normalized evaluation matrix deviates from M by {dev:e}"
            ));
        }
    }
    let status = if !scan.near_vanishing.is_empty() {
        ReportStatus::Warn
    } else if issues.is_empty() {
        ReportStatus::Consistent
    } else {
        ReportStatus::Inconsistent
    };
    let null_relative_moduli = scan
        .nulls
        .iter()
        .map(|(c, v)| (*c, v.norm() / scan.max_modulus))
        .collect();

    Ok(BasisReport {
        tau: tau.clone(),
        kappa0: *kappa0,
        d_plus,
        vanishing_nulls: scan.vanishing,
        near_vanishing_nulls: scan.near_vanishing,
        null_threshold,
        null_relative_moduli,
        ev_matrix_rank: ev_rank.rank,
        ev_singular_values: ev_rank.relative_singular_values,
        fourth_power_rank: fp.rank,
        fourth_power_singular_values: fp.relative_singular_values,
        m_deviation,
        theorem11_verdict,
        theorem12_verdict,
        status,
        issues,
        truncation: *policy,
        rank_policy: *rank_policy,
        n_samples,
        seed,
    })
}
