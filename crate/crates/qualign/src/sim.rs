//! Dense state-vector simulation of the two ansatz families.
//!
//! States live in a flat `Vec<Complex64>` of 2^n amplitudes. Qubit q's
//! measurement bit is bit position n−1−q of the basis-state index — qubit 0
//! is the most significant bit — which keeps simulator indices, printed
//! bitstrings, and [`BitAssignment`](crate::align::BitAssignment) indices
//! numerically identical. Every routine that maps a qubit to an index mask
//! goes through [`StateVector::mask_of`]; there is deliberately no second
//! place where the convention could drift.
//!
//! The noiseless preparation path is fused for throughput on wide registers:
//! rotation columns apply Ry to qubit pairs as one real 4×4 kernel, and a
//! whole linear CZ chain collapses to one sign-flip pass driven by the parity
//! of adjacent set bits. The noisy path deliberately un-fuses everything so
//! that a Pauli fault can be injected after each individual gate.

use crate::error::{Error, Result};
use crate::scoring::{EnergyFn, DEFAULT_TABLE_CAP};
use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;
use std::io::Write;

/// A pure n-qubit state as 2^n complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    n: usize,
}

impl StateVector {
    /// The computational basis state |0…0⟩.
    pub fn new_zero(n: usize) -> Result<Self> {
        if n == 0 || n > DEFAULT_TABLE_CAP {
            return Err(Error::OverCap {
                n,
                cap: DEFAULT_TABLE_CAP,
            });
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[0] = Complex64::ONE;
        Ok(StateVector { amps, n })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Mutable amplitude access for in-crate kernels (the gradient reverse
    /// sweep); not part of the public surface.
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// Index mask of qubit q under the qubit-0-is-MSB convention.
    #[inline]
    fn mask_of(&self, q: usize) -> usize {
        debug_assert!(q < self.n);
        1 << (self.n - 1 - q)
    }

    /// Applies a single-qubit unitary [[u00, u01], [u10, u11]] to qubit q.
    fn apply_one_qubit(&mut self, q: usize, u: [Complex64; 4]) {
        let m = self.mask_of(q);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + m {
                let a = self.amps[i];
                let b = self.amps[i + m];
                self.amps[i] = u[0] * a + u[1] * b;
                self.amps[i + m] = u[2] * a + u[3] * b;
            }
            base += 2 * m;
        }
    }

    pub fn apply_ry(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let r = |x: f64| Complex64::new(x, 0.0);
        self.apply_one_qubit(q, [r(c), r(-s), r(s), r(c)]);
    }

    pub fn apply_rx(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let d = Complex64::new(c, 0.0);
        let o = Complex64::new(0.0, -s);
        self.apply_one_qubit(q, [d, o, o, d]);
    }

    pub fn apply_h(&mut self, q: usize) {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_one_qubit(q, [h, h, h, -h]);
    }

    pub fn apply_x(&mut self, q: usize) {
        let m = self.mask_of(q);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + m {
                self.amps.swap(i, i + m);
            }
            base += 2 * m;
        }
    }

    pub fn apply_y(&mut self, q: usize) {
        let i_pos = Complex64::new(0.0, 1.0);
        let i_neg = Complex64::new(0.0, -1.0);
        self.apply_one_qubit(q, [Complex64::ZERO, i_neg, i_pos, Complex64::ZERO]);
    }

    pub fn apply_z(&mut self, q: usize) {
        let m = self.mask_of(q);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a = -*a;
            }
        }
    }

    /// Controlled-Z on any qubit pair: flips the sign where both bits are set.
    pub fn apply_cz(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        let m = self.mask_of(a) | self.mask_of(b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & m == m {
                *amp = -*amp;
            }
        }
    }

    /// Applies Ry(thetas[q]) to every qubit q, fused two qubits at a time:
    /// each adjacent pair becomes one real 4×4 kernel (the Kronecker product
    /// of the two rotations), roughly halving memory passes on wide
    /// registers. Equivalent to n separate [`apply_ry`](Self::apply_ry)
    /// calls.
    pub fn apply_rotation_column(&mut self, thetas: &[f64]) {
        assert_eq!(thetas.len(), self.n, "one angle per qubit");
        let dim = self.amps.len();
        let mut q = 0;
        while q + 1 < self.n {
            let (sh, ch) = (thetas[q] / 2.0).sin_cos();
            let (sl, cl) = (thetas[q + 1] / 2.0).sin_cos();
            let hi = [[ch, -sh], [sh, ch]];
            let lo = [[cl, -sl], [sl, cl]];
            let mut u = [[0.0f64; 4]; 4];
            for (r, row) in u.iter_mut().enumerate() {
                for (c, cell) in row.iter_mut().enumerate() {
                    *cell = hi[r >> 1][c >> 1] * lo[r & 1][c & 1];
                }
            }
            // m2 is qubit q+1's mask; qubit q's mask is 2·m2. Indices with
            // both bits clear tile the register in blocks of m2 every 4·m2.
            let m2 = self.mask_of(q + 1);
            let mut base = 0;
            while base < dim {
                for i in base..base + m2 {
                    let a0 = self.amps[i];
                    let a1 = self.amps[i + m2];
                    let a2 = self.amps[i + 2 * m2];
                    let a3 = self.amps[i + 3 * m2];
                    self.amps[i] = a0 * u[0][0] + a1 * u[0][1] + a2 * u[0][2] + a3 * u[0][3];
                    self.amps[i + m2] =
                        a0 * u[1][0] + a1 * u[1][1] + a2 * u[1][2] + a3 * u[1][3];
                    self.amps[i + 2 * m2] =
                        a0 * u[2][0] + a1 * u[2][1] + a2 * u[2][2] + a3 * u[2][3];
                    self.amps[i + 3 * m2] =
                        a0 * u[3][0] + a1 * u[3][1] + a2 * u[3][2] + a3 * u[3][3];
                }
                base += 4 * m2;
            }
            q += 2;
        }
        if q < self.n {
            self.apply_ry(q, thetas[q]);
        }
    }

    /// Applies the full linear entangling chain CZ(0,1) CZ(1,2) … CZ(n−2,n−1)
    /// in one pass. A basis state's sign flips once per adjacent pair of set
    /// bits, so the accumulated phase is the parity of popcount(i & (i≫1)).
    pub fn apply_cz_chain(&mut self) {
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if (i & (i >> 1)).count_ones() & 1 == 1 {
                *amp = -*amp;
            }
        }
    }

    /// Multiplies each amplitude by exp(−i·gamma·E(index)): the diagonal
    /// phase separator.
    pub fn apply_phase(&mut self, energy: &dyn EnergyFn, gamma: f64) -> Result<()> {
        self.check_energy_dim(energy)?;
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp *= Complex64::from_polar(1.0, -gamma * energy.energy(i));
        }
        Ok(())
    }

    /// ⟨ψ|H|ψ⟩ for the diagonal Hamiltonian: Σ |a_i|²·E(i).
    pub fn exact_expectation(&self, energy: &dyn EnergyFn) -> Result<f64> {
        self.check_energy_dim(energy)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * energy.energy(i))
            .sum())
    }

    fn check_energy_dim(&self, energy: &dyn EnergyFn) -> Result<()> {
        if energy.num_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                state: self.n,
                energy: energy.num_qubits(),
            });
        }
        Ok(())
    }

    /// Draws `shots` basis states from |ψ|². One sorted batch of uniforms is
    /// folded against the running probability sum in a single pass over the
    /// amplitudes, so the cost is O(shots·log shots + 2^n) with no cumulative
    /// array. Deterministic for a given RNG state.
    pub fn sample<R: Rng>(&self, shots: u64, rng: &mut R) -> Result<ShotTable> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut us: Vec<f64> = (0..shots).map(|_| rng.gen::<f64>()).collect();
        us.sort_unstable_by(f64::total_cmp);
        let mut counts = BTreeMap::new();
        let mut cum = 0.0;
        let mut next = 0usize;
        let mut last_nonzero = 0usize;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            last_nonzero = i;
            cum += p;
            let mut hit = 0u64;
            while next < us.len() && us[next] < cum {
                hit += 1;
                next += 1;
            }
            if hit > 0 {
                counts.insert(i, hit);
            }
            if next == us.len() {
                break;
            }
        }
        // Uniforms beyond the accumulated total (float round-off at the top
        // end) land on the last state with any probability mass.
        if next < us.len() {
            *counts.entry(last_nonzero).or_insert(0) += (us.len() - next) as u64;
        }
        Ok(ShotTable {
            counts,
            shots,
            n: self.n,
        })
    }

    /// Draws a single basis state from |ψ|².
    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> usize {
        let u = rng.gen::<f64>();
        let mut cum = 0.0;
        let mut last_nonzero = 0usize;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            last_nonzero = i;
            cum += p;
            if u < cum {
                return i;
            }
        }
        last_nonzero
    }
}

/// Measured shot counts over basis states, keyed by index in ascending
/// order. The register width travels along so indices can be rendered as
/// bitstrings.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ShotTable {
    counts: BTreeMap<usize, u64>,
    shots: u64,
    n: usize,
}

impl ShotTable {
    pub fn from_counts(counts: BTreeMap<usize, u64>, n: usize) -> Self {
        let shots = counts.values().sum();
        ShotTable { counts, shots, n }
    }

    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn frequency(&self, index: usize) -> f64 {
        *self.counts.get(&index).unwrap_or(&0) as f64 / self.shots as f64
    }

    /// The most frequently measured state; ties break toward the smaller
    /// index so the answer is deterministic.
    pub fn modal_state(&self) -> usize {
        self.counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&i, _)| i)
            .expect("shot tables are never empty")
    }

    /// The `k` most frequent states, descending by count, ties ascending by
    /// index.
    pub fn top_k(&self, k: usize) -> Vec<(usize, u64)> {
        let mut rows: Vec<(usize, u64)> = self.counts.iter().map(|(&i, &c)| (i, c)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        rows.truncate(k);
        rows
    }

    /// Mean energy over the shots.
    pub fn mean_energy(&self, energy: &dyn EnergyFn) -> f64 {
        let total: f64 = self
            .counts
            .iter()
            .map(|(&i, &c)| c as f64 * energy.energy(i))
            .sum();
        total / self.shots as f64
    }

    /// The lowest-energy state among those measured, with its energy. Ties
    /// break toward the smaller index (BTreeMap iteration order).
    pub fn min_energy_state(&self, energy: &dyn EnergyFn) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for &i in self.counts.keys() {
            let e = energy.energy(i);
            if e < best.1 {
                best = (i, e);
            }
        }
        best
    }

    /// Per-shot energies, expanded from the counts in ascending index order.
    pub fn energies(&self, energy: &dyn EnergyFn) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.shots as usize);
        for (&i, &c) in &self.counts {
            let e = energy.energy(i);
            out.extend(std::iter::repeat_n(e, c as usize));
        }
        out
    }

    /// Writes the full table as CSV rows of (index, bitstring, count).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "bitstring", "count"])
            .map_err(csv_err)?;
        for (&i, &c) in &self.counts {
            w.write_record([i.to_string(), format!("{i:0width$b}", width = self.n), c.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("csv: {other:?}"))),
    }
}

/// The two circuit families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzKind {
    /// Hardware-efficient: Ry rotation columns interleaved with linear CZ
    /// chains. `layers` counts the entangling layers (depth d), so there are
    /// d+1 rotation columns.
    Hea,
    /// Alternating-operator: a Hadamard wall, then `layers` rounds of
    /// problem-phase exp(−iγH) followed by an Rx(2β) mixer column.
    Qaoa,
}

/// A circuit shape: family, register width, and layer count. Parameters are
/// supplied separately at preparation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub num_qubits: usize,
    pub layers: usize,
}

impl AnsatzSpec {
    pub fn hea(num_qubits: usize, depth: usize) -> Self {
        AnsatzSpec {
            kind: AnsatzKind::Hea,
            num_qubits,
            layers: depth,
        }
    }

    pub fn qaoa(num_qubits: usize, rounds: usize) -> Self {
        AnsatzSpec {
            kind: AnsatzKind::Qaoa,
            num_qubits,
            layers: rounds,
        }
    }

    /// Trainable parameter count: n·(d+1) angles for HEA, 2p interleaved
    /// (γ, β) pairs for QAOA.
    pub fn param_count(&self) -> usize {
        match self.kind {
            AnsatzKind::Hea => self.num_qubits * (self.layers + 1),
            AnsatzKind::Qaoa => 2 * self.layers,
        }
    }

    /// Total gate count as executed by the un-fused path (each CZ and each
    /// rotation counted individually; the QAOA phase separator counts as one
    /// gate).
    pub fn gate_count(&self) -> usize {
        let n = self.num_qubits;
        match self.kind {
            AnsatzKind::Hea => n * (self.layers + 1) + self.layers * n.saturating_sub(1),
            AnsatzKind::Qaoa => n + self.layers * (1 + n),
        }
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::ParamLength {
                got: params.len(),
                expected: self.param_count(),
            });
        }
        Ok(())
    }

    /// Prepares |ψ(θ)⟩ through the fused noiseless path. HEA ignores
    /// `energy`; QAOA requires it for the phase separator.
    ///
    /// HEA parameter layout: θ[t·n + q] rotates qubit q in rotation column t.
    /// QAOA layout: θ = [γ₁, β₁, γ₂, β₂, …].
    pub fn prepare(&self, params: &[f64], energy: Option<&dyn EnergyFn>) -> Result<StateVector> {
        self.check_params(params)?;
        let n = self.num_qubits;
        let mut psi = StateVector::new_zero(n)?;
        match self.kind {
            AnsatzKind::Hea => {
                psi.apply_rotation_column(&params[..n]);
                for layer in 1..=self.layers {
                    psi.apply_cz_chain();
                    psi.apply_rotation_column(&params[layer * n..(layer + 1) * n]);
                }
            }
            AnsatzKind::Qaoa => {
                let energy = energy.ok_or(Error::QaoaNeedsEnergy)?;
                psi.check_energy_dim(energy)?;
                for q in 0..n {
                    psi.apply_h(q);
                }
                for layer in 0..self.layers {
                    let gamma = params[2 * layer];
                    let beta = params[2 * layer + 1];
                    psi.apply_phase(energy, gamma)?;
                    for q in 0..n {
                        psi.apply_rx(q, 2.0 * beta);
                    }
                }
            }
        }
        Ok(psi)
    }

    /// One noisy trajectory: the same circuit applied gate by gate (no
    /// fusion), where after each gate every qubit it touched suffers a
    /// uniformly random Pauli fault with probability `noise.gate`. The QAOA
    /// phase separator touches the whole register. Readout error is not
    /// applied here — it belongs to measurement, see [`sample_circuit`].
    pub fn prepare_noisy<R: Rng>(
        &self,
        params: &[f64],
        energy: Option<&dyn EnergyFn>,
        noise: &NoiseConfig,
        rng: &mut R,
    ) -> Result<StateVector> {
        self.check_params(params)?;
        let n = self.num_qubits;
        let mut psi = StateVector::new_zero(n)?;
        let fault = |psi: &mut StateVector, rng: &mut R, touched: &[usize]| {
            for &q in touched {
                if rng.gen::<f64>() < noise.gate {
                    match rng.gen_range(0..3u8) {
                        0 => psi.apply_x(q),
                        1 => psi.apply_y(q),
                        _ => psi.apply_z(q),
                    }
                }
            }
        };
        match self.kind {
            AnsatzKind::Hea => {
                for (q, &th) in params[..n].iter().enumerate() {
                    psi.apply_ry(q, th);
                    fault(&mut psi, rng, &[q]);
                }
                for layer in 1..=self.layers {
                    for q in 0..n - 1 {
                        psi.apply_cz(q, q + 1);
                        fault(&mut psi, rng, &[q, q + 1]);
                    }
                    for q in 0..n {
                        psi.apply_ry(q, params[layer * n + q]);
                        fault(&mut psi, rng, &[q]);
                    }
                }
            }
            AnsatzKind::Qaoa => {
                let energy = energy.ok_or(Error::QaoaNeedsEnergy)?;
                psi.check_energy_dim(energy)?;
                let all: Vec<usize> = (0..n).collect();
                for q in 0..n {
                    psi.apply_h(q);
                    fault(&mut psi, rng, &[q]);
                }
                for layer in 0..self.layers {
                    psi.apply_phase(energy, params[2 * layer])?;
                    fault(&mut psi, rng, &all);
                    for q in 0..n {
                        psi.apply_rx(q, 2.0 * params[2 * layer + 1]);
                        fault(&mut psi, rng, &[q]);
                    }
                }
            }
        }
        Ok(psi)
    }
}

/// Gate and readout error rates, both probabilities in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseConfig {
    /// Per-gate, per-touched-qubit probability of a uniform Pauli fault.
    pub gate: f64,
    /// Per-measured-bit flip probability.
    pub readout: f64,
}

impl NoiseConfig {
    pub fn new(gate: f64, readout: f64) -> Result<Self> {
        for (name, value) in [("gate", gate), ("readout", readout)] {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(Error::NoiseRate { name, value });
            }
        }
        Ok(NoiseConfig { gate, readout })
    }

    pub fn noiseless() -> Self {
        NoiseConfig {
            gate: 0.0,
            readout: 0.0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.gate == 0.0 && self.readout == 0.0
    }
}

/// Prepares and measures a circuit in one call — the measurement entry point
/// used by the optimizer.
///
/// Noiseless gate path: the state is prepared once (fused) and all shots are
/// drawn from it. With gate noise on, every shot runs its own un-fused
/// trajectory with independently drawn Pauli faults, which samples the noise
/// channel exactly rather than averaging a few trajectories. Readout error
/// flips each measured bit independently, after state sampling, in both
/// paths.
pub fn sample_circuit<R: Rng>(
    spec: &AnsatzSpec,
    params: &[f64],
    energy: Option<&dyn EnergyFn>,
    shots: u64,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<ShotTable> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let n = spec.num_qubits;
    let table = if noise.gate == 0.0 {
        spec.prepare(params, energy)?.sample(shots, rng)?
    } else {
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let psi = spec.prepare_noisy(params, energy, noise, rng)?;
            *counts.entry(psi.sample_one(rng)).or_insert(0u64) += 1;
        }
        ShotTable {
            counts,
            shots,
            n,
        }
    };
    Ok(apply_readout(table, noise.readout, rng))
}

/// Flips each measured bit of each shot independently with probability
/// `rate`. Shots are processed in ascending index order, each consuming one
/// uniform draw per bit, so the transformation is deterministic for a given
/// RNG state. `rate` 0 is a no-op that consumes no randomness.
pub fn apply_readout<R: Rng>(table: ShotTable, rate: f64, rng: &mut R) -> ShotTable {
    if rate == 0.0 {
        return table;
    }
    let n = table.n;
    let shots = table.shots;
    let mut flipped = BTreeMap::new();
    for (&index, &count) in &table.counts {
        for _ in 0..count {
            let mut out = index;
            for q in 0..n {
                if rng.gen::<f64>() < rate {
                    out ^= 1 << (n - 1 - q);
                }
            }
            *flipped.entry(out).or_insert(0u64) += 1;
        }
    }
    ShotTable {
        counts: flipped,
        shots,
        n,
    }
}
