//! The variational loop: CVaR loss estimation from shots, the two-stage
//! quenched tail schedule, gradient estimators, and Adam updates.
//!
//! Three gradient routes coexist on purpose. `parameter-shift` differentiates
//! the exact expectation ⟨ψ(θ)|H|ψ(θ)⟩ — inside [`run_vqe`] it is computed by
//! an algebraically identical adjoint reverse sweep ([`hea_adjoint_gradient`])
//! that costs one forward and one backward pass instead of two circuit
//! evaluations per parameter; the literal two-point rule
//! ([`parameter_shift_gradient`]) is kept as the reference implementation and
//! the two are pinned equal by tests. `finite-difference` also targets the
//! exact expectation and works for any ansatz. `spsa` is the only route that
//! sees the shot-sampled CVaR loss, so it is the route on which the tail
//! ratio r actually steers training — and the default whenever noise is on,
//! mirroring how such stacks split between simulator gradients and
//! hardware-style stochastic estimation.
//!
//! All routes feed the same Adam update; the classic SPSA gain sequence a_t
//! is carried in [`SpsaConfig`] for completeness but the training loop never
//! applies it.

use crate::error::{Error, Result};
use crate::scoring::{EnergyFn, EnergyTable, Instance};
use crate::sim::{apply_readout, sample_circuit, AnsatzKind, AnsatzSpec, NoiseConfig, ShotTable};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// Central-difference step used by the finite-difference gradient route.
pub const FD_STEP: f64 = 1e-5;

/// The CVaR tail schedule: optimize the mean of the lowest r·m shot energies,
/// with a warm-up stage at a tighter tail before quenching to `r_final`.
///
/// `r_at(t)` equals `r0` strictly before `warmup_iters` and `r_final` from
/// `warmup_iters` onward.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CvarConfig {
    pub r0: f64,
    pub warmup_iters: usize,
    pub r_final: f64,
}

impl CvarConfig {
    pub fn new(r0: f64, warmup_iters: usize, r_final: f64) -> Result<Self> {
        for r in [r0, r_final] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::CvarRatio(r));
            }
        }
        Ok(CvarConfig {
            r0,
            warmup_iters,
            r_final,
        })
    }

    /// Plain VQE: the full mean at every iteration.
    pub fn standard() -> Self {
        CvarConfig {
            r0: 1.0,
            warmup_iters: 0,
            r_final: 1.0,
        }
    }

    /// The two-stage protocol: 100 warm-up iterations at r = 0.6, then the
    /// full mean.
    pub fn quenched() -> Self {
        CvarConfig {
            r0: 0.6,
            warmup_iters: 100,
            r_final: 1.0,
        }
    }

    pub fn r_at(&self, iter: usize) -> f64 {
        if iter < self.warmup_iters {
            self.r0
        } else {
            self.r_final
        }
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.r0, self.warmup_iters, self.r_final).map(|_| ())
    }
}

/// CVaR of a sample: sort ascending, average the lowest ceil(r·m) values.
/// r = 1 recovers the plain mean; r = 1/m recovers the minimum.
pub fn cvar_loss(shot_energies: &[f64], r: f64) -> Result<f64> {
    if shot_energies.is_empty() {
        return Err(Error::EmptyEnergies);
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::CvarRatio(r));
    }
    let m = shot_energies.len();
    let k = ((r * m as f64).ceil() as usize).clamp(1, m);
    let mut sorted = shot_energies.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted[..k].iter().sum::<f64>() / k as f64)
}

/// Samples the circuit and scores each shot classically: the hybrid split in
/// one operation. Returns the CVaR-r loss over the per-shot energies together
/// with the table itself.
pub fn estimate_loss<R: Rng>(
    spec: &AnsatzSpec,
    energy: &dyn EnergyFn,
    theta: &[f64],
    r: f64,
    shots: u64,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<(f64, ShotTable)> {
    let table = sample_circuit(spec, theta, Some(energy), shots, noise, rng)?;
    let loss = cvar_loss(&table.energies(energy), r)?;
    Ok((loss, table))
}

/// SPSA gain/perturbation schedules. Only `c_t` (the perturbation scale) is
/// consumed by [`run_vqe`], which delegates the update itself to Adam; the
/// gain sequence `a_t` is provided for classic standalone SPSA use.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    /// The stability constant usually written A.
    pub stability: f64,
}

/// Standard SPSA decay exponents.
const SPSA_ALPHA: f64 = 0.602;
const SPSA_GAMMA: f64 = 0.101;

impl Default for SpsaConfig {
    fn default() -> Self {
        SpsaConfig {
            a: 0.2,
            c: 0.1,
            stability: 10.0,
        }
    }
}

impl SpsaConfig {
    pub fn c_at(&self, t: usize) -> f64 {
        self.c / (t as f64 + 1.0).powf(SPSA_GAMMA)
    }

    pub fn a_at(&self, t: usize) -> f64 {
        self.a / (t as f64 + 1.0 + self.stability).powf(SPSA_ALPHA)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("spsa.a", self.a), ("spsa.c", self.c)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositive { name, value });
            }
        }
        Ok(())
    }
}

/// One SPSA gradient estimate: a single Rademacher direction Δ and exactly
/// two loss evaluations, g_k = [L(θ+c_tΔ) − L(θ−c_tΔ)] / (2·c_t·Δ_k).
///
/// The loss closure receives the RNG so stochastic losses draw their shots
/// from the same deterministic stream as the perturbation.
pub fn spsa_gradient<R, F>(
    mut loss_fn: F,
    theta: &[f64],
    t: usize,
    cfg: &SpsaConfig,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    R: Rng,
    F: FnMut(&[f64], &mut R) -> Result<f64>,
{
    cfg.validate()?;
    let c_t = cfg.c_at(t);
    let delta: Vec<f64> = (0..theta.len())
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let plus: Vec<f64> = theta.iter().zip(&delta).map(|(&x, &d)| x + c_t * d).collect();
    let minus: Vec<f64> = theta.iter().zip(&delta).map(|(&x, &d)| x - c_t * d).collect();
    let lp = loss_fn(&plus, rng)?;
    let lm = loss_fn(&minus, rng)?;
    Ok(delta
        .iter()
        .map(|&d| (lp - lm) / (2.0 * c_t * d))
        .collect())
}

/// The literal two-point parameter-shift rule on the exact expectation:
/// g_k = [C(θ_k + π/2) − C(θ_k − π/2)] / 2. Exact for Ry-based circuits;
/// rejected for QAOA, whose phase separator is not a two-eigenvalue gate.
pub fn parameter_shift_gradient(
    spec: &AnsatzSpec,
    theta: &[f64],
    energy: &dyn EnergyFn,
) -> Result<Vec<f64>> {
    if spec.kind != AnsatzKind::Hea {
        return Err(Error::UnshiftableAnsatz {
            method: "parameter-shift",
            ansatz: "qaoa",
        });
    }
    let mut shifted = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        shifted[k] = theta[k] + std::f64::consts::FRAC_PI_2;
        let plus = spec.prepare(&shifted, None)?.exact_expectation(energy)?;
        shifted[k] = theta[k] - std::f64::consts::FRAC_PI_2;
        let minus = spec.prepare(&shifted, None)?.exact_expectation(energy)?;
        shifted[k] = theta[k];
        grad.push((plus - minus) / 2.0);
    }
    Ok(grad)
}

/// Central finite differences on the exact expectation. Works for both
/// ansatz families (it never opens the gates up), at 2·P circuit evaluations.
pub fn finite_difference_gradient(
    spec: &AnsatzSpec,
    theta: &[f64],
    energy: &dyn EnergyFn,
    h: f64,
) -> Result<Vec<f64>> {
    let mut shifted = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        shifted[k] = theta[k] + h;
        let plus = spec
            .prepare(&shifted, Some(energy))?
            .exact_expectation(energy)?;
        shifted[k] = theta[k] - h;
        let minus = spec
            .prepare(&shifted, Some(energy))?
            .exact_expectation(energy)?;
        shifted[k] = theta[k];
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// Exact expectation value and full gradient of an HEA circuit in one
/// forward-plus-reverse sweep.
///
/// After the forward preparation, λ = H·ψ is propagated backward together
/// with ψ. Undoing each rotation pair gate U (real orthogonal, so U⁻¹ = Uᵀ)
/// exposes the pre-gate state, and each parameter's derivative is the
/// overlap 2·Re⟨λ|∂U/∂θ|ψ_pre⟩ with ∂Ry/∂θ = ½·Ry(θ+π). Values agree with
/// [`parameter_shift_gradient`] to floating-point accuracy (pinned by tests)
/// at O(gate count) cost instead of O(parameter count · gate count).
pub fn hea_adjoint_gradient(
    spec: &AnsatzSpec,
    theta: &[f64],
    energy: &dyn EnergyFn,
) -> Result<(f64, Vec<f64>)> {
    if spec.kind != AnsatzKind::Hea {
        return Err(Error::UnshiftableAnsatz {
            method: "adjoint",
            ansatz: "qaoa",
        });
    }
    let n = spec.num_qubits;
    let mut psi = spec.prepare(theta, None)?;
    let value = psi.exact_expectation(energy)?;
    let mut lam = psi.clone();
    for (i, a) in lam.amplitudes_mut().iter_mut().enumerate() {
        *a *= energy.energy(i);
    }
    let mut grad = vec![0.0; theta.len()];
    for layer in (0..=spec.layers).rev() {
        let thetas = &theta[layer * n..(layer + 1) * n];
        let mut q = 0;
        while q + 1 < n {
            let (g_hi, g_lo) = pair_reverse_pass(
                psi.amplitudes_mut(),
                lam.amplitudes_mut(),
                n,
                q,
                thetas[q],
                thetas[q + 1],
            );
            grad[layer * n + q] = g_hi;
            grad[layer * n + q + 1] = g_lo;
            q += 2;
        }
        if q < n {
            grad[layer * n + q] =
                single_reverse_pass(psi.amplitudes_mut(), lam.amplitudes_mut(), n, q, thetas[q]);
        }
        if layer > 0 {
            psi.apply_cz_chain();
            lam.apply_cz_chain();
        }
    }
    Ok((value, grad))
}

/// Reverse-sweep step for the fused rotation pair on qubits (q, q+1): undo U
/// on ψ, accumulate both parameters' derivative overlaps against λ, undo U on
/// λ — all in one pass over the amplitude arrays.
fn pair_reverse_pass(
    psi: &mut [Complex64],
    lam: &mut [Complex64],
    n: usize,
    q: usize,
    th_hi: f64,
    th_lo: f64,
) -> (f64, f64) {
    let (sh, ch) = (th_hi / 2.0).sin_cos();
    let (sl, cl) = (th_lo / 2.0).sin_cos();
    let a = [[ch, -sh], [sh, ch]];
    let b = [[cl, -sl], [sl, cl]];
    let da = [[-sh / 2.0, -ch / 2.0], [ch / 2.0, -sh / 2.0]];
    let db = [[-sl / 2.0, -cl / 2.0], [cl / 2.0, -sl / 2.0]];
    let mut u = [[0.0f64; 4]; 4];
    let mut dh = [[0.0f64; 4]; 4];
    let mut dl = [[0.0f64; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            u[r][c] = a[r >> 1][c >> 1] * b[r & 1][c & 1];
            dh[r][c] = da[r >> 1][c >> 1] * b[r & 1][c & 1];
            dl[r][c] = a[r >> 1][c >> 1] * db[r & 1][c & 1];
        }
    }
    let m2 = 1usize << (n - 2 - q);
    let dim = psi.len();
    let (mut g_hi, mut g_lo) = (0.0, 0.0);
    let mut base = 0;
    while base < dim {
        for i in base..base + m2 {
            let idx = [i, i + m2, i + 2 * m2, i + 3 * m2];
            let p = [psi[idx[0]], psi[idx[1]], psi[idx[2]], psi[idx[3]]];
            let l = [lam[idx[0]], lam[idx[1]], lam[idx[2]], lam[idx[3]]];
            let mut pre = [Complex64::ZERO; 4];
            for (r, amp) in pre.iter_mut().enumerate() {
                // Uᵀ row r is U column r.
                *amp = p[0] * u[0][r] + p[1] * u[1][r] + p[2] * u[2][r] + p[3] * u[3][r];
            }
            for r in 0..4 {
                let dh_pre =
                    pre[0] * dh[r][0] + pre[1] * dh[r][1] + pre[2] * dh[r][2] + pre[3] * dh[r][3];
                let dl_pre =
                    pre[0] * dl[r][0] + pre[1] * dl[r][1] + pre[2] * dl[r][2] + pre[3] * dl[r][3];
                g_hi += 2.0 * (l[r].conj() * dh_pre).re;
                g_lo += 2.0 * (l[r].conj() * dl_pre).re;
            }
            for (r, &index) in idx.iter().enumerate() {
                psi[index] = pre[r];
                lam[index] = l[0] * u[0][r] + l[1] * u[1][r] + l[2] * u[2][r] + l[3] * u[3][r];
            }
        }
        base += 4 * m2;
    }
    (g_hi, g_lo)
}

/// [`pair_reverse_pass`] for the odd leftover qubit of a rotation column.
fn single_reverse_pass(
    psi: &mut [Complex64],
    lam: &mut [Complex64],
    n: usize,
    q: usize,
    theta: f64,
) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    let m = 1usize << (n - 1 - q);
    let dim = psi.len();
    let mut g = 0.0;
    let mut base = 0;
    while base < dim {
        for i in base..base + m {
            let (p0, p1) = (psi[i], psi[i + m]);
            // Uᵀ = [[c, s], [−s, c]].
            let pre0 = p0 * c + p1 * s;
            let pre1 = -p0 * s + p1 * c;
            // ∂U = ½[[−s, −c], [c, −s]].
            let d0 = pre0 * (-s / 2.0) + pre1 * (-c / 2.0);
            let d1 = pre0 * (c / 2.0) + pre1 * (-s / 2.0);
            let (l0, l1) = (lam[i], lam[i + m]);
            g += 2.0 * ((l0.conj() * d0).re + (l1.conj() * d1).re);
            psi[i] = pre0;
            psi[i + m] = pre1;
            lam[i] = l0 * c + l1 * s;
            lam[i + m] = -l0 * s + l1 * c;
        }
        base += 2 * m;
    }
    g
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub step: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            step: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("adam.step", self.step), ("adam.epsilon", self.epsilon)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositive { name, value });
            }
        }
        for (name, value) in [("adam.beta1", self.beta1), ("adam.beta2", self.beta2)] {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::BetaRange { name, value });
            }
        }
        Ok(())
    }
}

/// Adam's moment accumulators for one parameter vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    /// One bias-corrected Adam step: θ ← θ − step·m̂ / (√v̂ + ε).
    pub fn update(&mut self, cfg: &AdamConfig, theta: &mut [f64], grad: &[f64]) {
        assert_eq!(theta.len(), grad.len());
        assert_eq!(theta.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.t as i32);
        for k in 0..theta.len() {
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * grad[k];
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            theta[k] -= cfg.step * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
}

/// Gradient route selector for [`run_vqe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    /// Exact expectation gradient (adjoint-accelerated shift rule); HEA only.
    ParameterShift,
    /// Central differences on the exact expectation; any ansatz.
    FiniteDifference,
    /// Two-evaluation stochastic estimate on the shot-sampled CVaR loss.
    Spsa,
}

impl GradientMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            GradientMethod::ParameterShift => "parameter-shift",
            GradientMethod::FiniteDifference => "finite-difference",
            GradientMethod::Spsa => "spsa",
        }
    }
}

/// Everything [`run_vqe`] needs besides the problem and the schedule.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptimizerConfig {
    pub method: GradientMethod,
    pub adam: AdamConfig,
    pub spsa: SpsaConfig,
    pub shots: u64,
    pub max_iters: usize,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(method: GradientMethod, shots: u64, max_iters: usize, seed: u64) -> Self {
        OptimizerConfig {
            method,
            adam: AdamConfig::default(),
            spsa: SpsaConfig::default(),
            shots,
            max_iters,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::ZeroShots);
        }
        self.adam.validate()?;
        self.spsa.validate()
    }
}

/// One trace row: where the optimizer stood entering iteration `iteration`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub theta: Vec<f64>,
    /// CVaR-r estimate from this iteration's shot table.
    pub loss: f64,
    /// Tail ratio in effect at this iteration.
    pub r: f64,
    /// Exact ⟨H⟩ at θ; absent when gate noise makes the state a random
    /// trajectory rather than a deterministic pure state.
    pub exact_energy: Option<f64>,
    pub shots: ShotTable,
}

/// The full history of one optimization run: T+1 records (one per iteration
/// entry plus the final evaluation) and the best-ever sampled solution.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<TraceRecord>,
    /// Basis index of the lowest-energy bitstring in any trace shot table.
    pub best_index: usize,
    pub best_energy: f64,
    /// Wall-clock seconds per optimization iteration. Excluded from
    /// serialization so that result files stay byte-deterministic; timing is
    /// reported through separate sidecar channels.
    #[serde(skip)]
    pub iteration_seconds: Vec<f64>,
}

impl TrainingTrace {
    pub fn final_record(&self) -> &TraceRecord {
        self.records.last().expect("traces hold at least one record")
    }

    /// One JSON object per line, one line per trace record.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Per-iteration scalars as CSV: iteration, r, loss, exact energy.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "r", "loss", "exact_energy"])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        for rec in &self.records {
            w.write_record([
                rec.iteration.to_string(),
                rec.r.to_string(),
                rec.loss.to_string(),
                rec.exact_energy.map_or_else(String::new, |e| e.to_string()),
            ])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The phase separator's view of the loss: scaled so max|E| = 1. Scaling the
/// diagonal is a pure reparametrization of γ, but it keeps the uniform
/// [0, 2π) initialization meaningful — raw alignment losses span tens, which
/// would turn a random γ into a phase scrambler with a hopelessly
/// oscillatory training landscape.
struct ScaledEnergy<'a> {
    inner: &'a EnergyTable,
    inv: f64,
}

impl EnergyFn for ScaledEnergy<'_> {
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn energy(&self, index: usize) -> f64 {
        self.inner.energy(index) * self.inv
    }
}

/// Trains the ansatz against the instance's loss under the given CVaR
/// schedule and noise model.
///
/// Per iteration t = 0…max_iters−1: estimate the CVaR-r_t loss from a fresh
/// shot table at θ_t (recorded, along with the exact expectation when the
/// state is noiseless), compute the configured gradient, and apply one Adam
/// update. A final record is taken at θ_max_iters, so the trace always holds
/// max_iters+1 records. The reported solution is the lowest-energy bitstring
/// appearing in any recorded shot table — not merely the final modal state.
///
/// θ is initialized uniformly in [0, 2π) from the config seed; the whole run
/// consumes one deterministic RNG stream, so (config, seed) fixes the trace
/// exactly. QAOA circuits receive max-|E|-normalized energies in their phase
/// separators (see [`ScaledEnergy`]); losses, traces, and reported
/// expectations always use the raw energies.
pub fn run_vqe(
    instance: &Instance,
    spec: &AnsatzSpec,
    opt: &OptimizerConfig,
    cvar: &CvarConfig,
    noise: &NoiseConfig,
) -> Result<TrainingTrace> {
    opt.validate()?;
    cvar.validate()?;
    if spec.num_qubits != instance.num_qubits() {
        return Err(Error::DimensionMismatch {
            state: spec.num_qubits,
            energy: instance.num_qubits(),
        });
    }
    if spec.kind == AnsatzKind::Qaoa && opt.method == GradientMethod::ParameterShift {
        return Err(Error::UnshiftableAnsatz {
            method: "parameter-shift",
            ansatz: "qaoa",
        });
    }
    // The dense table pays for itself immediately: the adjoint sweep, phase
    // separators, and shot scoring all hit it every iteration.
    let table = instance.energy_table()?;
    let energy: &dyn EnergyFn = &table;
    let max_abs = table
        .energies()
        .iter()
        .fold(0.0f64, |m, &e| m.max(e.abs()));
    let scaled = (spec.kind == AnsatzKind::Qaoa && max_abs > 0.0).then(|| ScaledEnergy {
        inner: &table,
        inv: max_abs.recip(),
    });
    let phase: &dyn EnergyFn = scaled.as_ref().map_or(energy, |s| s as &dyn EnergyFn);
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let mut theta: Vec<f64> = (0..spec.param_count())
        .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
        .collect();
    let mut adam = AdamState::new(theta.len());
    let mut records = Vec::with_capacity(opt.max_iters + 1);
    let mut iteration_seconds = Vec::with_capacity(opt.max_iters);
    let mut best_index = 0usize;
    let mut best_energy = f64::INFINITY;

    for t in 0..=opt.max_iters {
        let started = std::time::Instant::now();
        let r = cvar.r_at(t);
        let (loss, shot_table, exact) = if noise.gate == 0.0 {
            let psi = spec.prepare(&theta, Some(phase))?;
            let sampled = psi.sample(opt.shots, &mut rng)?;
            let sampled = apply_readout(sampled, noise.readout, &mut rng);
            let loss = cvar_loss(&sampled.energies(energy), r)?;
            let exact = psi.exact_expectation(energy)?;
            (loss, sampled, Some(exact))
        } else {
            let sampled = sample_circuit(spec, &theta, Some(phase), opt.shots, noise, &mut rng)?;
            let loss = cvar_loss(&sampled.energies(energy), r)?;
            (loss, sampled, None)
        };
        for &index in shot_table.counts().keys() {
            let e = energy.energy(index);
            if e < best_energy {
                best_energy = e;
                best_index = index;
            }
        }
        records.push(TraceRecord {
            iteration: t,
            theta: theta.clone(),
            loss,
            r,
            exact_energy: exact,
            shots: shot_table,
        });
        if t == opt.max_iters {
            break;
        }
        let grad = match opt.method {
            GradientMethod::ParameterShift => hea_adjoint_gradient(spec, &theta, energy)?.1,
            // For QAOA this differentiates the scaled objective ⟨Ê⟩ —
            // identical direction, and Adam's √v̂ normalization absorbs the
            // magnitude.
            GradientMethod::FiniteDifference => {
                finite_difference_gradient(spec, &theta, phase, FD_STEP)?
            }
            GradientMethod::Spsa => spsa_gradient(
                |th, rng| {
                    let sampled = sample_circuit(spec, th, Some(phase), opt.shots, noise, rng)?;
                    cvar_loss(&sampled.energies(energy), r)
                },
                &theta,
                t,
                &opt.spsa,
                &mut rng,
            )?,
        };
        adam.update(&opt.adam, &mut theta, &grad);
        iteration_seconds.push(started.elapsed().as_secs_f64());
    }
    Ok(TrainingTrace {
        records,
        best_index,
        best_energy,
        iteration_seconds,
    })
}
