//! Acceptance suite: eleven numbered end-to-end claims about the solver,
//! each checked against exact oracles or pre-registered statistical
//! protocols. Runs as a plain binary (`harness = false`) so that each
//! criterion prints exactly one `criterion N: PASS/FAIL — detail` line the
//! moment it finishes, cheapest first. The process exits nonzero if any
//! criterion fails.
//!
//! Optional args select a subset by number: `cargo test --test acceptance -- 5 7`.

use qualign::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::io::Write as _;
use std::time::Instant;

/// The 20-qubit four-sequence demo: S = {AAKGT, AT, AKG, KT}, L = 5.
const DEMO_20Q: &str = "protein-demo-20q";
/// Known optimal alignment of the demo instance, sequence-major bit order.
const DEMO_OPTIMUM: &str = "11111100011011000101";

/// Stand-in for the two-fragment DNA demo (7- and 8-base sequences over
/// L = 10) used by the quenched-CVaR study alongside [`DEMO_20Q`].
const DNA_PAIR_20Q: &str = "dna-pair-20q";

/// 12-qubit stand-in shared by the entanglement and ansatz-comparison
/// studies.
const TRIO_12Q: &str = "dna-trio-12q";

/// QAOA rounds for criterion 10 (the criterion allows any p ≥ 3).
const C10_ROUNDS: usize = 10;
/// Training length for the criterion-10 arms.
const C10_ITERS: usize = 1500;
/// Seeds per arm for criterion 10.
const C10_SEEDS: u64 = 10;

fn main() {
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let all: Vec<(usize, fn() -> (bool, String))> = vec![
        (1, criterion1),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
        (11, criterion11),
        (2, criterion2),
        (10, criterion10),
        (9, criterion9),
    ];
    let selected: Vec<_> = all
        .into_iter()
        .filter(|(id, _)| wanted.is_empty() || wanted.contains(id))
        .collect();

    let t0 = Instant::now();
    let mut failed: Vec<usize> = Vec::new();
    let total = selected.len();
    for (id, check) in selected {
        let started = Instant::now();
        let (pass, detail) = check();
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id}: {verdict} — {detail} [{:.1}s]",
            started.elapsed().as_secs_f64()
        );
        std::io::stdout().flush().ok();
        if !pass {
            failed.push(id);
        }
    }
    let passed = total - failed.len();
    if failed.is_empty() {
        println!(
            "acceptance: {passed} of {total} criteria passed ({:.0}s total)",
            t0.elapsed().as_secs_f64()
        );
    } else {
        failed.sort_unstable();
        println!(
            "acceptance: {passed} of {total} criteria passed, FAILED: {failed:?} ({:.0}s total)",
            t0.elapsed().as_secs_f64()
        );
        std::process::exit(1);
    }
}

fn instance_of(name: &str) -> Instance {
    preset(name).expect("preset exists").instance()
}

fn optimum_index() -> usize {
    usize::from_str_radix(DEMO_OPTIMUM, 2).unwrap()
}

/// Exhaustive minimum of the 2^20-state demo: exactly −10, the published
/// alignment among the minimizers, under 30 s on one thread.
fn criterion1() -> (bool, String) {
    let inst = instance_of(DEMO_20Q);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let started = Instant::now();
    let report = pool.install(|| brute_force_min(&inst, false)).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let energy_ok = report.global_energy == -10.0;
    let state_ok = report.global_states.contains(&optimum_index());
    let time_ok = elapsed < 30.0;
    (
        energy_ok && state_ok && time_ok,
        format!(
            "min {} over 2^20 states ({} minimizers, known optimum {}), {:.1}s single-threaded",
            report.global_energy,
            report.global_states.len(),
            if state_ok { "included" } else { "MISSING" },
            elapsed
        ),
    )
}

/// Ten seeded VQE runs on the 20-qubit demo (HEA d=2, parameter-shift +
/// Adam, 2000 shots, 400 iterations): ≥6/10 sample a −10 state at some
/// point, ≥5/10 end with a −10 state as the modal measurement.
fn criterion2() -> (bool, String) {
    let inst = instance_of(DEMO_20Q);
    let spec = AnsatzSpec::hea(20, 2);
    let cvar = CvarConfig::standard();
    let mut best_hits = 0u32;
    let mut modal_hits = 0u32;
    for seed in 0..10u64 {
        let opt = OptimizerConfig::new(GradientMethod::ParameterShift, 2000, 400, seed);
        let trace = run_vqe(&inst, &spec, &opt, &cvar, &NoiseConfig::noiseless()).unwrap();
        if trace.best_energy == -10.0 {
            best_hits += 1;
        }
        let modal = trace.final_record().shots.modal_state();
        if inst.energy_of_index(modal) == -10.0 {
            modal_hits += 1;
        }
    }
    (
        best_hits >= 6 && modal_hits >= 5,
        format!("best-ever -10 in {best_hits}/10 seeds (need ≥6), modal -10 in {modal_hits}/10 (need ≥5)"),
    )
}

/// Pair-order convention: summing similarity over ordered pairs doubles the
/// optimum's score to −20; the implementation must report the unordered −10.
fn criterion3() -> (bool, String) {
    let inst = instance_of(DEMO_20Q);
    let set = inst.set();
    let idx = optimum_index();
    let bits = BitAssignment::from_index(idx, set.num_sequences(), set.padded_len());
    let maps: Vec<PositionMap> = (0..set.num_sequences())
        .map(|i| set.position_map(i, &bits).unwrap())
        .collect();
    // The ordered-pair reading, computed from scratch: i ≠ j rather than
    // i < j. The similarity table is symmetric, so this counts every
    // interaction twice.
    let mut ordered = 0i64;
    for i in 0..set.num_sequences() {
        for j in 0..set.num_sequences() {
            if i == j {
                continue;
            }
            for k in 0..set.padded_len() {
                let (fi, fj) = (maps[i].get(k), maps[j].get(k));
                if fi >= 0 && fj >= 0 {
                    ordered += inst.weights().weight(i, j, fi as usize, fj as usize) as i64;
                }
            }
        }
    }
    let unordered = scoring::sp_score(set, inst.weights(), &bits);
    (
        ordered == -20 && unordered == -10.0 && inst.energy_of_index(idx) == -10.0,
        format!("ordered-pair reading {ordered}, implemented unordered score {unordered}"),
    )
}

/// Worked single-sequence example: s = AG queried through x = 0111 yields
/// the position map [−1, 0, 1, −1].
fn criterion4() -> (bool, String) {
    let set = SequenceSet::with_padded_len(&["AG"], 4).unwrap();
    let bits = BitAssignment::from_binary_str("0111", 1, 4).unwrap();
    let map = set.position_map(0, &bits).unwrap();
    let got = map.values().to_vec();
    (
        got == vec![-1, 0, 1, -1],
        format!("AG with x=0111 → {got:?} (want [-1, 0, 1, -1])"),
    )
}

/// CVaR identities on 1000 random half-integer energy lists: r = 1 is the
/// mean, r = 1/m is the minimum, and the loss is monotone in r. Energies on
/// the half-integer lattice make every comparison exact in f64.
fn criterion5() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..1000 {
        let m = rng.gen_range(1..=200);
        let es: Vec<f64> = (0..m)
            .map(|_| rng.gen_range(-100i32..=100) as f64 * 0.5)
            .collect();
        let full = cvar_loss(&es, 1.0).unwrap();
        if full != mean(&es) {
            return (false, format!("case {case}: cvar(1) = {full} ≠ mean {}", mean(&es)));
        }
        let tail = cvar_loss(&es, 1.0 / m as f64).unwrap();
        let min = es.iter().copied().fold(f64::INFINITY, f64::min);
        if tail != min {
            return (false, format!("case {case}: cvar(1/m) = {tail} ≠ min {min}"));
        }
        let mut last = f64::NEG_INFINITY;
        for k in 1..=20 {
            let v = cvar_loss(&es, k as f64 / 20.0).unwrap();
            if v < last {
                return (false, format!("case {case}: cvar not monotone at r = {}/20", k));
            }
            last = v;
        }
    }
    (true, "mean/minimum/monotonicity identities exact on 1000 random lists".into())
}

/// Parameter-shift gradients agree with central finite differences
/// (h = 1e−5) within 1e−6 on 20 random small HEA configurations.
fn criterion6() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(2..=4usize);
        let d = rng.gen_range(0..=2usize);
        let energies: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let table = EnergyTable::from_energies(energies).unwrap();
        let spec = AnsatzSpec::hea(n, d);
        let theta: Vec<f64> = (0..spec.param_count())
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        let ps = parameter_shift_gradient(&spec, &theta, &table).unwrap();
        let fd = finite_difference_gradient(&spec, &theta, &table, 1e-5).unwrap();
        for (a, b) in ps.iter().zip(&fd) {
            worst = worst.max((a - b).abs());
        }
    }
    (
        worst <= 1e-6,
        format!("max |parameter-shift − finite-difference| = {worst:.2e} over 20 configs (bound 1e-6)"),
    )
}

/// Simulator exactness: unit norm after 100 random circuits, expectation
/// values agreeing with the independent oracle summation, and sampled
/// frequencies consistent with |amplitude|² under a chi-square test.
fn criterion7() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_norm = 0.0f64;
    let mut worst_expect = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=8usize);
        let mut psi = StateVector::new_zero(n).unwrap();
        for _ in 0..40 {
            let q = rng.gen_range(0..n);
            match rng.gen_range(0..8u8) {
                0 => psi.apply_ry(q, rng.gen::<f64>() * std::f64::consts::TAU),
                1 => psi.apply_rx(q, rng.gen::<f64>() * std::f64::consts::TAU),
                2 => psi.apply_h(q),
                3 => psi.apply_x(q),
                4 => psi.apply_y(q),
                5 => psi.apply_z(q),
                6 if n > 1 => {
                    let mut b = rng.gen_range(0..n);
                    while b == q {
                        b = rng.gen_range(0..n);
                    }
                    psi.apply_cz(q, b);
                }
                _ => psi.apply_cz_chain(),
            }
        }
        worst_norm = worst_norm.max((psi.norm() - 1.0).abs());

        let energies: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(-9.0..9.0)).collect();
        let table = EnergyTable::from_energies(energies).unwrap();
        // verify_expectation returns |fast path − independent Kahan sum|.
        worst_expect = worst_expect.max(verify_expectation(&psi, &table).unwrap());
    }

    let mut chi_ps = Vec::new();
    let mut chi_ok = true;
    for n in 2..=4usize {
        let spec = AnsatzSpec::hea(n, 1);
        let theta: Vec<f64> = (0..spec.param_count())
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        let psi = spec.prepare(&theta, None).unwrap();
        let shots = 100_000u64;
        let tableau = psi.sample(shots, &mut rng).unwrap();
        let mut observed = vec![0u64; 1 << n];
        for (&idx, &c) in tableau.counts() {
            observed[idx] = c;
        }
        let expected: Vec<f64> = (0..1usize << n)
            .map(|i| psi.probability(i) * shots as f64)
            .collect();
        let outcome = chi_square_gof(&observed, &expected).unwrap();
        chi_ok &= outcome.consistent(0.001);
        chi_ps.push(format!("n={n} p={:.3}", outcome.p));
    }

    (
        worst_norm <= 1e-10 && worst_expect <= 1e-9 && chi_ok,
        format!(
            "norm dev {worst_norm:.1e} (≤1e-10), expectation dev {worst_expect:.1e} (≤1e-9), chi-square {}",
            chi_ps.join(" ")
        ),
    )
}

/// Entanglement helps: on the 12-qubit stand-in over 50 seeds and 100
/// iterations, mean final energy at d=1 beats d=0 (one-sided Welch,
/// α = 0.05). The d-ranking of ground-state hit rates is reported but not
/// enforced — the published instance differs from the stand-in.
fn criterion8() -> (bool, String) {
    let inst = instance_of(TRIO_12Q);
    let (_, minimizers) = global_minimum(&inst, false).unwrap();
    let cvar = CvarConfig::standard();
    let mut finals: Vec<Vec<f64>> = Vec::new();
    let mut hit_rates: Vec<f64> = Vec::new();
    for d in 0..=3usize {
        let spec = AnsatzSpec::hea(12, d);
        let mut fin = Vec::new();
        let mut hits = 0u32;
        for seed in 0..50u64 {
            let opt = OptimizerConfig::new(GradientMethod::ParameterShift, 2000, 100, seed);
            let trace = run_vqe(&inst, &spec, &opt, &cvar, &NoiseConfig::noiseless()).unwrap();
            let rec = trace.final_record();
            fin.push(rec.exact_energy.unwrap());
            if minimizers.contains(&rec.shots.modal_state()) {
                hits += 1;
            }
        }
        finals.push(fin);
        hit_rates.push(hits as f64 / 50.0);
    }
    let welch = welch_one_sided_less(&finals[1], &finals[0]).unwrap();
    let hard = welch.significant(0.05);
    let argmax = hit_rates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let soft = if argmax == 2 { "as published" } else { "reported, not enforced" };
    (
        hard,
        format!(
            "d1 {:.3} < d0 {:.3} (Welch p = {:.2e}); hit rates {:?} peak at d={argmax} ({soft})",
            mean(&finals[1]),
            mean(&finals[0]),
            welch.p,
            hit_rates
        ),
    )
}

/// Quenched CVaR helps on both 20-qubit demos: 100 seeds each, two-stage
/// schedule (100 iterations at r = 0.6, then 300 at r = 1) vs 400 at r = 1.
/// Passes when the two-stage mean final energy is no worse on each
/// instance; the one-sided Welch p-value is reported alongside.
fn criterion9() -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in [DEMO_20Q, DNA_PAIR_20Q] {
        let inst = instance_of(name);
        let spec = AnsatzSpec::hea(20, 2);
        let mut means = Vec::new();
        let mut arm_finals: Vec<Vec<f64>> = Vec::new();
        for cvar in [CvarConfig::quenched(), CvarConfig::standard()] {
            let finals: Vec<f64> = (0..100u64)
                .map(|seed| {
                    let opt = OptimizerConfig::new(GradientMethod::Spsa, 2000, 400, seed);
                    let trace = run_vqe(&inst, &spec, &opt, &cvar, &NoiseConfig::noiseless()).unwrap();
                    trace.final_record().exact_energy.unwrap()
                })
                .collect();
            means.push(mean(&finals));
            arm_finals.push(finals);
        }
        let welch = welch_one_sided_less(&arm_finals[0], &arm_finals[1]).unwrap();
        let ok = means[0] <= means[1];
        pass &= ok;
        parts.push(format!(
            "{name}: two-stage {:.3} vs standard {:.3} (Welch p = {:.3}){}",
            means[0],
            means[1],
            welch.p,
            if ok { "" } else { " WORSE" }
        ));
    }
    (pass, parts.join("; "))
}

/// QAOA (p ≥ 3) and HEA (d = 2) both train to within 10% of the oracle
/// minimum on a 12-qubit instance, and HEA costs less wall time per
/// iteration.
fn criterion10() -> (bool, String) {
    let inst = instance_of(TRIO_12Q);
    let (oracle_min, _) = global_minimum(&inst, false).unwrap();
    let threshold = oracle_min + 0.1 * oracle_min.abs();
    let cvar = CvarConfig::standard();

    let arm = |spec: &AnsatzSpec, method: GradientMethod, iters: usize| {
        let mut best = f64::INFINITY;
        let mut iter_secs = Vec::new();
        for seed in 0..C10_SEEDS {
            let opt = OptimizerConfig::new(method, 2000, iters, seed);
            let trace = run_vqe(&inst, spec, &opt, &cvar, &NoiseConfig::noiseless()).unwrap();
            for rec in &trace.records {
                if let Some(e) = rec.exact_energy {
                    best = best.min(e);
                }
            }
            iter_secs.extend_from_slice(&trace.iteration_seconds);
        }
        (best, mean(&iter_secs))
    };

    let qaoa_spec = AnsatzSpec::qaoa(12, C10_ROUNDS);
    let (qaoa_best, qaoa_secs) = arm(&qaoa_spec, GradientMethod::FiniteDifference, C10_ITERS);
    let hea_spec = AnsatzSpec::hea(12, 2);
    let (hea_best, hea_secs) = arm(&hea_spec, GradientMethod::ParameterShift, 300);

    let qaoa_ok = qaoa_best <= threshold;
    let hea_ok = hea_best <= threshold;
    let faster = hea_secs < qaoa_secs;
    (
        qaoa_ok && hea_ok && faster,
        format!(
            "oracle min {oracle_min}, 10% band ≤ {threshold}; QAOA p={C10_ROUNDS} best ⟨H⟩ {qaoa_best:.3}{}, HEA d=2 best ⟨H⟩ {hea_best:.3}{}; {:.2} vs {:.2} ms/iter{}",
            if qaoa_ok { "" } else { " MISS" },
            if hea_ok { "" } else { " MISS" },
            hea_secs * 1e3,
            qaoa_secs * 1e3,
            if faster { "" } else { " (HEA NOT FASTER)" }
        ),
    )
}

/// Hardware-scale results are out of desk reach; the stand-in claim is that
/// the optimum stays the modal measured state under small noise. Ten seeded
/// 8-qubit runs per arm (gate, readout) ∈ {(0,0), (1e-3,1e-2), (2e-3,2e-2)},
/// CVaR held at r = 0.2: the pooled final histogram of every arm must be
/// modal on a ground state.
fn criterion11() -> (bool, String) {
    let inst = instance_of("dna-pair-8q");
    let (_, minimizers) = global_minimum(&inst, false).unwrap();
    let spec = AnsatzSpec::hea(8, 1);
    let cvar = CvarConfig::new(0.2, 0, 0.2).unwrap();
    let arms = [
        ("noiseless", NoiseConfig::noiseless()),
        ("gate 1e-3 / readout 1e-2", NoiseConfig::new(1e-3, 1e-2).unwrap()),
        ("gate 2e-3 / readout 2e-2", NoiseConfig::new(2e-3, 2e-2).unwrap()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, noise) in arms {
        let mut pooled: BTreeMap<usize, u64> = BTreeMap::new();
        let mut seed_hits = 0u32;
        for seed in 0..10u64 {
            let opt = OptimizerConfig::new(GradientMethod::Spsa, 2000, 300, seed);
            let trace = run_vqe(&inst, &spec, &opt, &cvar, &noise).unwrap();
            let table = &trace.final_record().shots;
            if minimizers.contains(&table.modal_state()) {
                seed_hits += 1;
            }
            for (&idx, &c) in table.counts() {
                *pooled.entry(idx).or_insert(0) += c;
            }
        }
        let modal = ShotTable::from_counts(pooled, 8).modal_state();
        let ok = minimizers.contains(&modal);
        pass &= ok;
        parts.push(format!(
            "{label}: pooled modal {}ground state, {seed_hits}/10 per-seed",
            if ok { "" } else { "NOT " }
        ));
    }
    (pass, parts.join("; "))
}
