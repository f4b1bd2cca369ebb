//! Random commuting parameter families, sample points and batch validation of the catalog.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wildmatch::WildMatch;

use crate::catalog::{catalog, Direction, Form, IdentityEntry};
use crate::error::{Error, Result};
use crate::identity::{check_hypotheses, evaluate_identity};
use crate::kind::{Group, LauricellaKind};
use crate::matrix::{condition_estimate, inverse, matmul, ComplexMatrix, ToleranceConfig};
use crate::parallel::{map_ordered, Execution};
use crate::series::{ParameterSet, SeriesConfig};

/// Condition estimate above which the shared similarity is re-drawn.
pub const MAX_SIMILARITY_COND: f64 = 50.0;

/// Draws per trial before giving up on finding inputs that satisfy the hypotheses.
const MAX_ATTEMPTS: u32 = 16;

/// Eigenvalue region for generated parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub real_range: (f64, f64),
    pub imag_range: (f64, f64),
    /// Keep real parts at least δ away from every integer.
    pub forbid_integer_reals: bool,
    /// δ: distance kept from `0, −1, …, −max_degree`.
    pub min_separation_from_nonpositive: f64,
    pub max_degree: usize,
    /// When set, also keep eigenvalues away from `1, …, n` and require `|Im| ≥ 0.2` or
    /// `Re > n + δ`, so that lowered denominators stay invertible.
    pub lowering_n_max: Option<u32>,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        Self {
            real_range: (0.6, 2.4),
            imag_range: (-0.5, 0.5),
            forbid_integer_reals: true,
            min_separation_from_nonpositive: 0.1,
            max_degree: 64,
            lowering_n_max: None,
        }
    }
}

impl SpectrumSpec {
    pub fn admits(&self, z: Complex64) -> bool {
        let delta = self.min_separation_from_nonpositive;
        let (r0, r1) = self.real_range;
        let (i0, i1) = self.imag_range;
        if !(r0..=r1).contains(&z.re) || !(i0..=i1).contains(&z.im) {
            return false;
        }
        if self.forbid_integer_reals && (z.re - z.re.round()).abs() < delta {
            return false;
        }
        let near_nonpositive = (0..=self.max_degree as i64).any(|m| (z + m as f64).norm() < delta);
        if near_nonpositive {
            return false;
        }
        if let Some(n) = self.lowering_n_max {
            if (1..=n).any(|j| (z - j as f64).norm() < delta) {
                return false;
            }
            if z.im.abs() < 0.2 && z.re <= n as f64 + delta {
                return false;
            }
        }
        true
    }

    fn check(&self) -> Result<()> {
        let (r0, r1) = self.real_range;
        let (i0, i1) = self.imag_range;
        if !(r0.is_finite() && r1.is_finite() && i0.is_finite() && i1.is_finite()) || r0 > r1 || i0 > i1 {
            return Err(Error::SpecInfeasible(format!("bad ranges {:?} {:?}", self.real_range, self.imag_range)));
        }
        if self.min_separation_from_nonpositive < 0.0 {
            return Err(Error::SpecInfeasible("negative separation".into()));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Complex64> {
        let (r0, r1) = self.real_range;
        let (i0, i1) = self.imag_range;
        for _ in 0..10_000 {
            let z = Complex64::new(uniform(rng, r0, r1), uniform(rng, i0, i1));
            if self.admits(z) {
                return Ok(z);
            }
        }
        Err(Error::SpecInfeasible(format!("no admissible eigenvalue found in {:?} x {:?}", self.real_range, self.imag_range)))
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// A commuting family `S · D_j · S⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyDraw {
    pub similarity: ComplexMatrix,
    pub eigenvalues: Vec<Vec<Complex64>>,
    pub matrices: Vec<ComplexMatrix>,
    /// Similarities rejected for conditioning.
    pub redraws: u32,
}

/// `count` commuting `dim × dim` matrices with eigenvalues drawn from `spec`.
pub fn generate_family(dim: usize, count: usize, spec: &SpectrumSpec, seed: u64) -> Result<FamilyDraw> {
    if dim == 0 {
        return Err(Error::InvalidParameters("dimension must be at least 1".into()));
    }
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = ToleranceConfig::default();
    let mut redraws = 0;
    let (similarity, inv) = loop {
        let s = if dim == 1 {
            ComplexMatrix::identity(1)
        } else {
            let scale = 0.6 / (dim as f64).sqrt();
            let mut s = ComplexMatrix::identity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    let e = Complex64::new(uniform(&mut rng, -scale, scale), uniform(&mut rng, -scale, scale));
                    s.set(i, j, s.get(i, j) + e);
                }
            }
            s
        };
        match condition_estimate(&s) {
            Ok(c) if c <= MAX_SIMILARITY_COND => break (s.clone(), inverse(&s, &tol)?),
            _ => redraws += 1,
        }
        if redraws > 1000 {
            return Err(Error::SpecInfeasible("no well-conditioned similarity found".into()));
        }
    };
    let mut eigenvalues = Vec::with_capacity(count);
    let mut matrices = Vec::with_capacity(count);
    for _ in 0..count {
        let d: Vec<Complex64> = (0..dim).map(|_| spec.draw(&mut rng)).collect::<Result<_>>()?;
        let m = matmul(&matmul(&similarity, &ComplexMatrix::from_diag(&d))?, &inv)?;
        eigenvalues.push(d);
        matrices.push(m);
    }
    Ok(FamilyDraw {
        similarity,
        eigenvalues,
        matrices,
        redraws,
    })
}

/// A random point with `ρ(x) < log(0.5 · radius_scale)`, i.e. strictly inside the guard region
/// shrunk by `radius_scale`.
pub fn sample_point(kind: &LauricellaKind, radius_scale: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Complex64> = (0..kind.arity())
        .map(|_| {
            let r = uniform(&mut rng, 0.2, 1.0);
            let phase = uniform(&mut rng, 0.0, std::f64::consts::TAU);
            Complex64::from_polar(r, phase)
        })
        .collect();
    let frac = uniform(&mut rng, 0.5, 0.95);
    // ρ(t·x) = ρ(x) + log t.
    let t = 0.5 * radius_scale * frac / kind.growth_rate(&raw).exp();
    raw.into_iter().map(|z| z * t).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub trials: u32,
    pub dims: Vec<usize>,
    pub n_max: u32,
    pub seed: u64,
    /// Radius scale at n = 0; trials at magnitude n use `radius_scale / (1 + n)`.
    pub radius_scale: f64,
    pub series: SeriesConfig,
    /// Overrides the per-dimension residual tolerance.
    pub residual_tol: Option<f64>,
    pub spectrum: SpectrumSpec,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            trials: 3,
            dims: vec![1],
            n_max: 2,
            seed: 0,
            radius_scale: 1.0,
            series: SeriesConfig::default(),
            residual_tol: None,
            spectrum: SpectrumSpec::default(),
            execution: Execution::default(),
        }
    }
}

impl SuiteConfig {
    pub fn tolerance(&self, dim: usize) -> ToleranceConfig {
        let mut t = ToleranceConfig::for_dim(dim);
        if let Some(r) = self.residual_tol {
            t.residual_tol = r;
        }
        t
    }
}

/// Inputs of a failed trial, enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureInput {
    pub dim: usize,
    pub n: u32,
    pub trial: u32,
    pub draw_seed: u64,
    pub x: Vec<[f64; 2]>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub id: String,
    pub equation: String,
    pub kind: String,
    pub trials: u32,
    pub max_residual: Option<f64>,
    pub pass: bool,
    pub inconclusive: u32,
    pub typo_candidate: bool,
    /// Largest residual of the printed form, for typo candidates.
    pub printed_variant_residual: Option<f64>,
    pub note: Option<String>,
    pub failures: Vec<FailureInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub config: SuiteConfig,
    pub entry_count: usize,
    pub pass: bool,
    /// Draws rejected because the inputs violated a hypothesis.
    pub redraws: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marker: Option<String>,
    pub entries: Vec<EntryReport>,
}

impl ValidationReport {
    /// Ids of entries that failed.
    pub fn failing(&self) -> Vec<&str> {
        self.entries.iter().filter(|e| !e.pass).map(|e| e.id.as_str()).collect()
    }

    /// SHA-256 of the serialized body.
    pub fn body_sha256(&self) -> String {
        let body = serde_json::to_vec(self).expect("report serializes");
        hex::encode(Sha256::digest(&body))
    }

    /// The body plus a `meta` block holding the timestamp and body hash.
    pub fn to_json_with_meta(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        let generated_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        v["meta"] = serde_json::json!({
            "generated_at": generated_at,
            "body_sha256": self.body_sha256(),
        });
        v
    }
}

/// Validates every catalog entry whose id matches `filter`.
pub fn run_suite(filter: &str, config: &SuiteConfig) -> ValidationReport {
    let pattern = WildMatch::new(filter);
    let entries: Vec<IdentityEntry> = catalog().into_iter().filter(|e| pattern.matches(&e.id)).collect();
    run_entries(&entries, config)
}

struct Job<'a> {
    entry: &'a IdentityEntry,
    dim: usize,
    n: u32,
    trial: u32,
}

struct TrialOutcome {
    residual: Option<f64>,
    printed: Option<f64>,
    converged: bool,
    redraws: u32,
    failure: Option<FailureInput>,
}

/// [`run_suite`] over an explicit entry list.
pub fn run_entries(entries: &[IdentityEntry], config: &SuiteConfig) -> ValidationReport {
    let mut jobs = Vec::new();
    for entry in entries {
        for &dim in &config.dims {
            for n in 1..=config.n_max {
                for trial in 0..config.trials {
                    jobs.push(Job { entry, dim, n, trial });
                }
            }
        }
    }
    let outcomes = map_ordered(&jobs, config.execution, |job| run_trial(job, config));

    let mut reports = Vec::with_capacity(entries.len());
    let mut redraws = 0u64;
    let mut at = 0;
    for entry in entries {
        let count = config.dims.len() * config.n_max as usize * config.trials as usize;
        let mine = &outcomes[at..at + count];
        let my_jobs = &jobs[at..at + count];
        at += count;
        let mut report = EntryReport {
            id: entry.id.clone(),
            equation: entry.equation.clone(),
            kind: entry.kind.to_string(),
            trials: count as u32,
            max_residual: None,
            pass: true,
            inconclusive: 0,
            typo_candidate: entry.typo_candidate,
            printed_variant_residual: None,
            note: entry.note.clone(),
            failures: Vec::new(),
        };
        for (o, job) in mine.iter().zip(my_jobs) {
            redraws += o.redraws as u64;
            if let Some(p) = o.printed {
                report.printed_variant_residual = Some(report.printed_variant_residual.map_or(p, |m: f64| m.max(p)));
            }
            if !o.converged {
                report.inconclusive += 1;
                continue;
            }
            if let Some(r) = o.residual {
                report.max_residual = Some(report.max_residual.map_or(r, |m: f64| m.max(r)));
                if r.is_nan() || r > config.tolerance(job.dim).residual_tol {
                    report.pass = false;
                }
            }
            if let Some(f) = &o.failure {
                if f.error.is_some() {
                    report.pass = false;
                }
                if !report.pass && report.failures.len() < 5 {
                    report.failures.push(f.clone());
                }
            }
        }
        reports.push(report);
    }
    ValidationReport {
        seed: config.seed,
        config: config.clone(),
        entry_count: reports.len(),
        pass: reports.iter().all(|r| r.pass),
        redraws,
        marker: reports.is_empty().then(|| "0 entries".to_string()),
        entries: reports,
    }
}

/// Seed for one draw, from the suite seed and the trial coordinates.
pub fn draw_seed(seed: u64, id: &str, dim: usize, n: u32, trial: u32, attempt: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    h.update((dim as u64).to_le_bytes());
    h.update(n.to_le_bytes());
    h.update(trial.to_le_bytes());
    h.update(attempt.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Spectrum used for an entry: lowering a denominator adds the lowering exclusions.
fn spectrum_for(entry: &IdentityEntry, config: &SuiteConfig) -> SpectrumSpec {
    let mut spec = config.spectrum.clone();
    spec.max_degree = spec.max_degree.max(config.series.max_degree);
    let lhs = entry.lhs();
    if entry.kind.signature()[lhs.target].group == Group::C && lhs.direction == Direction::Lower {
        spec.lowering_n_max = Some(spec.lowering_n_max.unwrap_or(0).max(config.n_max.max(lhs.effective(config.n_max))));
    }
    spec
}

fn run_trial(job: &Job<'_>, config: &SuiteConfig) -> TrialOutcome {
    let entry = job.entry;
    let tol = config.tolerance(job.dim);
    let spec = spectrum_for(entry, config);
    let slots = entry.kind.signature().len();
    let mut redraws = 0;
    let fail = |seed: u64, x: &[Complex64], residual: Option<f64>, error: Option<String>| FailureInput {
        dim: job.dim,
        n: job.n,
        trial: job.trial,
        draw_seed: seed,
        x: x.iter().map(|z| [z.re, z.im]).collect(),
        residual,
        error,
    };
    for attempt in 0..MAX_ATTEMPTS {
        let seed = draw_seed(config.seed, &entry.id, job.dim, job.n, job.trial, attempt);
        let family = match generate_family(job.dim, slots, &spec, seed) {
            Ok(f) => f,
            Err(e) => {
                return TrialOutcome {
                    residual: None,
                    printed: None,
                    converged: true,
                    redraws,
                    failure: Some(fail(seed, &[], None, Some(e.to_string()))),
                }
            }
        };
        let params = ParameterSet::from_slots(&entry.kind, family.matrices).expect("family has one matrix per slot");
        if check_hypotheses(entry, &params, job.n, &tol).is_err() {
            redraws += 1;
            continue;
        }
        let x = sample_point(&entry.kind, config.radius_scale / (1.0 + job.n as f64), seed ^ 0x9e37_79b9_7f4a_7c15);
        let corrected = evaluate_identity(entry, Form::Corrected, &params, &x, job.n, &config.series, &tol);
        let printed = if entry.typo_candidate {
            evaluate_identity(entry, Form::Printed, &params, &x, job.n, &config.series, &tol)
                .ok()
                .map(|e| e.residual)
        } else {
            None
        };
        return match corrected {
            Ok(ev) => {
                let bad = ev.residual.is_nan() || ev.residual > tol.residual_tol;
                TrialOutcome {
                    residual: Some(ev.residual),
                    printed,
                    converged: ev.converged,
                    redraws,
                    failure: bad.then(|| fail(seed, &x, Some(ev.residual), None)),
                }
            }
            Err(e) => TrialOutcome {
                residual: None,
                printed,
                converged: true,
                redraws,
                failure: Some(fail(seed, &x, None, Some(e.to_string()))),
            },
        };
    }
    TrialOutcome {
        residual: None,
        printed: None,
        converged: true,
        redraws,
        failure: Some(fail(
            0,
            &[],
            None,
            Some(format!("no hypothesis-satisfying draw in {MAX_ATTEMPTS} attempts")),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{commutator, frobenius_norm};

    #[test]
    fn scalar_family_lies_in_the_region() {
        let spec = SpectrumSpec::default();
        let f = generate_family(1, 6, &spec, 11).unwrap();
        for (m, d) in f.matrices.iter().zip(&f.eigenvalues) {
            assert!((m.get(0, 0) - d[0]).norm() < 1e-15);
            assert!(spec.admits(d[0]));
        }
    }

    #[test]
    fn family_is_deterministic_and_commuting() {
        let spec = SpectrumSpec::default();
        let a = generate_family(3, 5, &spec, 42).unwrap();
        assert_eq!(a, generate_family(3, 5, &spec, 42).unwrap());
        assert_ne!(a, generate_family(3, 5, &spec, 43).unwrap());
        assert!(condition_estimate(&a.similarity).unwrap() <= MAX_SIMILARITY_COND);
        for i in 0..5 {
            for j in 0..5 {
                let c = commutator(&a.matrices[i], &a.matrices[j]).unwrap();
                assert!(frobenius_norm(&c) < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn infeasible_spectrum_is_reported() {
        let spec = SpectrumSpec {
            real_range: (0.97, 1.03),
            imag_range: (0.0, 0.0),
            ..SpectrumSpec::default()
        };
        assert!(matches!(generate_family(2, 1, &spec, 1), Err(Error::SpecInfeasible(_))));
        let spec = SpectrumSpec {
            real_range: (2.0, 1.0),
            ..SpectrumSpec::default()
        };
        assert!(matches!(generate_family(2, 1, &spec, 1), Err(Error::SpecInfeasible(_))));
    }

    #[test]
    fn lowering_exclusions() {
        let spec = SpectrumSpec {
            lowering_n_max: Some(2),
            ..SpectrumSpec::default()
        };
        assert!(!spec.admits(Complex64::new(1.5, 0.1)));
        assert!(spec.admits(Complex64::new(1.5, 0.3)));
        assert!(spec.admits(Complex64::new(2.3, 0.0)));
        assert!(!spec.admits(Complex64::new(2.05, 0.3)));
    }

    #[test]
    fn sample_points_respect_the_guard() {
        let ga = LauricellaKind::GA(3);
        for seed in 0..20 {
            let x = sample_point(&ga, 1.0, seed);
            assert!(x.iter().map(|z| z.norm()).sum::<f64>() <= 0.5);
            assert_eq!(x, sample_point(&ga, 1.0, seed));
        }
        for (_, kind) in LauricellaKind::acceptance_list() {
            let x = sample_point(&kind, 0.3, 5);
            assert!(kind.check_guard(&x, 0.3).is_ok(), "{kind}");
        }
        let tiny = sample_point(&ga, 1e-9, 3);
        assert!(tiny.iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn empty_filter_gives_marked_report() {
        let r = run_suite("none-matching*", &SuiteConfig::default());
        assert_eq!(r.entry_count, 0);
        assert!(r.pass);
        assert_eq!(r.marker.as_deref(), Some("0 entries"));
    }

    #[test]
    fn report_is_identical_across_execution_modes() {
        let mut cfg = SuiteConfig {
            dims: vec![1, 2],
            trials: 2,
            seed: 99,
            ..SuiteConfig::default()
        };
        cfg.execution = Execution::Sequential;
        let a = run_suite("F6.A2.*", &cfg);
        cfg.execution = Execution::Parallel;
        let b = run_suite("F6.A2.*", &cfg);
        assert_eq!(a.body_sha256(), b.body_sha256());
        assert!(a.pass, "{:?}", a.failing());
        assert!(a.entries.iter().any(|e| e.printed_variant_residual.is_some_and(|r| r > 1e-6)));
        let meta = a.to_json_with_meta();
        assert_eq!(meta["meta"]["body_sha256"], a.body_sha256());
    }

    #[test]
    fn halving_the_point_does_not_break_a_passing_entry() {
        let ids = ["FA.A.raise.unit", "FC.C2.lower", "F4.A1.raise.multi", "F7.C1.lower", "F14.B1.lower.unit"];
        let cfg = SuiteConfig::default();
        let tol = cfg.tolerance(2);
        for id in ids {
            let entry = crate::catalog::find(id).unwrap();
            let fam = generate_family(2, entry.kind.signature().len(), &spectrum_for(&entry, &cfg), 8).unwrap();
            let params = ParameterSet::from_slots(&entry.kind, fam.matrices).unwrap();
            let x = sample_point(&entry.kind, 0.5, 8);
            let half: Vec<Complex64> = x.iter().map(|z| z * 0.5).collect();
            let r = evaluate_identity(&entry, Form::Corrected, &params, &x, 2, &cfg.series, &tol).unwrap();
            let r_half = evaluate_identity(&entry, Form::Corrected, &params, &half, 2, &cfg.series, &tol).unwrap();
            assert!(r.residual <= tol.residual_tol, "{id}");
            assert!(r_half.residual <= tol.residual_tol, "{id} at half scale");
        }
    }
}
