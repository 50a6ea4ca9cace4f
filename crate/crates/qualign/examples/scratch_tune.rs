// Scratch validation harness for stand-in instance selection. Not part of
// the shipped artifact.

use qualign::*;
use rayon::prelude::*;
use std::time::Instant;

fn run(
    inst: &scoring::Instance,
    spec: &AnsatzSpec,
    method: GradientMethod,
    cvar: CvarConfig,
    shots: u64,
    iters: usize,
    seed: u64,
) -> TrainingTrace {
    let opt = OptimizerConfig::new(method, shots, iters, seed);
    run_vqe(inst, spec, &opt, &cvar, &NoiseConfig::noiseless()).unwrap()
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "oracle".into());
    match which.as_str() {
        "oracle" => oracle_scan(),
        "crit8" => crit8(),
        "crit10" => crit10(),
        "crit10s" => crit10_scaled(),
        "crit10c" => crit10_cvar_trained(),
        "crit11" => crit11(),
        "crit11s" => crit11_sweep(),
        "probe20" => probe20(),
        "crit2" => crit2(),
        "crit9" => crit9(),
        "pairs" => pair_screen(),
        "crit9p" => crit9_pair(),
        other => eprintln!("unknown study {other}"),
    }
}

fn oracle_scan() {
    for p in PRESETS {
        let inst = p.instance();
        let t0 = Instant::now();
        let (min, states) = global_minimum(&inst, false).unwrap();
        let feasible = (0..1usize << p.num_qubits())
            .filter(|&i| inst.is_feasible_index(i))
            .count();
        println!(
            "{:<18} n={:>2} min={:>8.3} minimizers={:<4} feasible={:<6} scan={:?}",
            p.name,
            p.num_qubits(),
            min,
            states.len(),
            feasible,
            t0.elapsed()
        );
    }
}

fn crit8() {
    let alt = std::env::args().nth(2);
    let inst = match alt.as_deref() {
        Some("frustrated") => scoring::Instance::new(
            align::SequenceSet::with_padded_len(&["AGT", "ACT", "GCT"], 4).unwrap(),
            scoring::Penalty::default(),
        ),
        Some("mixed") => scoring::Instance::new(
            align::SequenceSet::with_padded_len(&["ACG", "AG", "CG"], 4).unwrap(),
            scoring::Penalty::default(),
        ),
        _ => preset("dna-trio-12q").unwrap().instance(),
    };
    let (oracle_min, opt_states) = global_minimum(&inst, false).unwrap();
    println!("oracle min {oracle_min} minimizers {}", opt_states.len());
    let seeds: Vec<u64> = (0..12).collect();
    let mut finals: Vec<Vec<f64>> = Vec::new();
    for d in 0..=3usize {
        let spec = AnsatzSpec::hea(12, d);
        let t0 = Instant::now();
        let mut fin = Vec::new();
        let mut hits = 0;
        for &s in &seeds {
            let tr = run(
                &inst,
                &spec,
                GradientMethod::ParameterShift,
                CvarConfig::standard(),
                2000,
                100,
                s,
            );
            let f = tr.final_record();
            fin.push(f.exact_energy.unwrap());
            if opt_states.contains(&f.shots.modal_state()) {
                hits += 1;
            }
        }
        println!(
            "d={d} mean_final={:8.4} std={:7.4} hit_rate={:}/{} elapsed={:?}",
            mean(&fin),
            std_dev(&fin),
            hits,
            seeds.len(),
            t0.elapsed()
        );
        finals.push(fin);
    }
    let w = welch_one_sided_less(&finals[1], &finals[0]).unwrap();
    println!("welch d1<d0: t={:.3} dof={:.1} p={:.5}", w.t, w.dof, w.p);
    let w2 = welch_one_sided_less(&finals[2], &finals[1]).unwrap();
    println!("welch d2<d1: t={:.3} dof={:.1} p={:.5}", w2.t, w2.dof, w2.p);
}

struct Scaled<'a> {
    inner: &'a scoring::EnergyTable,
    inv: f64,
}

impl scoring::EnergyFn for Scaled<'_> {
    fn num_qubits(&self) -> usize {
        scoring::EnergyFn::num_qubits(self.inner)
    }
    fn energy(&self, index: usize) -> f64 {
        self.inner.energy(index) * self.inv
    }
}

fn instance_by_key(key: &str) -> scoring::Instance {
    let (seqs, padded): (&[&str], usize) = match key {
        "pair6" => (&["ACGTA", "ACGT"], 6),
        "pair6b" => (&["ACGTAC", "ACGTA"], 6),
        "trio3" => (&["ACG", "AG", "CG"], 3),
        "quad3" => (&["ACG", "AG", "CG", "AC"], 3),
        _ => (&["AGT", "AT", "GT"], 4),
    };
    scoring::Instance::new(
        align::SequenceSet::with_padded_len(seqs, padded).unwrap(),
        scoring::Penalty::default(),
    )
}

fn crit10_scaled() {
    use rand::{Rng, SeedableRng};
    let key = std::env::args().nth(3).unwrap_or_default();
    let inst = instance_by_key(&key);
    let table = inst.energy_table().unwrap();
    let scale = table.energies().iter().fold(0f64, |m, e| m.max(e.abs()));
    let scaled = Scaled { inner: &table, inv: 1.0 / scale };
    let (oracle_min, opt_states) = global_minimum(&inst, false).unwrap();
    let threshold = oracle_min + 0.1 * oracle_min.abs();
    let n = scoring::EnergyFn::num_qubits(&table);
    let ground_mass = opt_states.len() as f64 / (1usize << n) as f64;
    let emean = table.energies().iter().sum::<f64>() / table.len() as f64;
    println!("n={n} scale={scale} min={oracle_min} threshold={threshold} ground_states={} mean_energy={emean:.2}", opt_states.len());
    let iters: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(300);
    let _ = ground_mass;
    let rounds_list: Vec<usize> = std::env::args()
        .nth(4)
        .map(|s| s.split(',').map(|x| x.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![3, 5]);
    for rounds in rounds_list {
        let spec = AnsatzSpec::qaoa(n, rounds);
        let mut best_overall = f64::INFINITY;
        for seed in 1u64..=10 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut theta: Vec<f64> = (0..spec.param_count())
                .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
                .collect();
            let cfg = AdamConfig::default();
            let mut adam = AdamState::new(theta.len());
            let t0 = Instant::now();
            let mut best = f64::INFINITY;
            for _ in 0..iters {
                let g = finite_difference_gradient(&spec, &theta, &scaled, 1e-5).unwrap();
                adam.update(&cfg, &mut theta, &g);
                let raw = spec
                    .prepare(&theta, Some(&scaled))
                    .unwrap()
                    .exact_expectation(&table)
                    .unwrap();
                best = best.min(raw);
            }
            let _ = t0;
            best_overall = best_overall.min(best);
        }
        println!(
            "qaoa-p{rounds}: best over restarts = {best_overall:8.4} within10%={}",
            best_overall <= threshold
        );
    }
}

fn crit10_cvar_trained() {
    use rand::{Rng, SeedableRng};
    let inst = instance_by_key("default");
    let table = inst.energy_table().unwrap();
    let scale = table.energies().iter().fold(0f64, |m, e| m.max(e.abs()));
    let scaled = Scaled { inner: &table, inv: 1.0 / scale };
    let (oracle_min, _) = global_minimum(&inst, false).unwrap();
    println!("min {oracle_min}; training p=3 QAOA via SPSA on CVaR r=0.25");
    let spec = AnsatzSpec::qaoa(12, 3);
    let mut best_overall = f64::INFINITY;
    for seed in 1u64..=10 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut theta: Vec<f64> = (0..spec.param_count())
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        let cfg = AdamConfig::default();
        let spsa = SpsaConfig::default();
        let mut adam = AdamState::new(theta.len());
        let mut best = f64::INFINITY;
        for t in 0..400 {
            let g = spsa_gradient(
                |th, rng| {
                    let psi = spec.prepare(th, Some(&scaled)).unwrap();
                    let shots = psi.sample(2000, rng).unwrap();
                    cvar_loss(&shots.energies(&table), 0.25)
                },
                &theta,
                t,
                &spsa,
                &mut rng,
            )
            .unwrap();
            adam.update(&cfg, &mut theta, &g);
            let raw = spec
                .prepare(&theta, Some(&scaled))
                .unwrap()
                .exact_expectation(&table)
                .unwrap();
            best = best.min(raw);
        }
        println!("  seed={seed} best ⟨H⟩ = {best:8.4}");
        best_overall = best_overall.min(best);
    }
    println!("best over restarts: {best_overall:8.4}");
}

fn crit10() {
    let p = preset("dna-trio-12q").unwrap();
    let inst = p.instance();
    let table = inst.energy_table().unwrap();
    let (lo, hi) = table.energies().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &e| (l.min(e), h.max(e)));
    let (oracle_min, _) = global_minimum(&inst, false).unwrap();
    let threshold = oracle_min + 0.1 * oracle_min.abs();
    println!("oracle min {oracle_min}, threshold {threshold}, energy range [{lo}, {hi}]");
    let iters: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(150);
    let step: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    for (label, spec, method) in [
        (
            "hea-d2",
            AnsatzSpec::hea(12, 2),
            GradientMethod::ParameterShift,
        ),
        (
            "qaoa-p3",
            AnsatzSpec::qaoa(12, 3),
            GradientMethod::FiniteDifference,
        ),
    ] {
        for seed in [1u64, 2, 3, 4, 5] {
            let mut opt = OptimizerConfig::new(method, 2000, iters, seed);
            opt.adam.step = step;
            let t0 = Instant::now();
            let tr = run_vqe(&inst, &spec, &opt, &CvarConfig::standard(), &NoiseConfig::noiseless()).unwrap();
            let per_iter = t0.elapsed().as_secs_f64() / iters as f64;
            let best_exact = tr
                .records
                .iter()
                .filter_map(|r| r.exact_energy)
                .fold(f64::INFINITY, f64::min);
            println!(
                "{label} seed={seed} final={:8.4} best_trace={:8.4} within10%={} s/iter={:.4}",
                tr.final_record().exact_energy.unwrap(),
                best_exact,
                best_exact <= threshold,
                per_iter
            );
        }
    }
}

fn crit11_sweep() {
    let p = preset("dna-pair-8q").unwrap();
    let inst = p.instance();
    let (_oracle_min, opt_states) = global_minimum(&inst, false).unwrap();
    let configs: Vec<(&str, CvarConfig, usize, usize, f64)> = vec![
        ("quench d1 300", CvarConfig::quenched(), 1, 300, 0.05),
        ("r=0.3 d1 300", CvarConfig::new(0.3, 0, 0.3).unwrap(), 1, 300, 0.05),
        ("r=0.2 d1 300", CvarConfig::new(0.2, 0, 0.2).unwrap(), 1, 300, 0.05),
        ("r=0.3 d2 300", CvarConfig::new(0.3, 0, 0.3).unwrap(), 2, 300, 0.05),
        ("r=0.3 d1 500", CvarConfig::new(0.3, 0, 0.3).unwrap(), 1, 500, 0.05),
        ("r03->1@200 d1 400", CvarConfig::new(0.3, 200, 1.0).unwrap(), 1, 400, 0.05),
        ("quench d1 300 step.1", CvarConfig::quenched(), 1, 300, 0.1),
        ("r=0.3 d1 300 step.1", CvarConfig::new(0.3, 0, 0.3).unwrap(), 1, 300, 0.1),
    ];
    for (name, cvar, depth, iters, step) in configs {
        let seeds = 10u64;
        let mut modal_hits = 0;
        let mut pooled = vec![0u64; 1 << 8];
        for seed in 0..seeds {
            let mut opt = OptimizerConfig::new(GradientMethod::Spsa, 2000, iters, seed);
            opt.adam.step = step;
            let tr = run_vqe(
                &inst,
                &AnsatzSpec::hea(8, depth),
                &opt,
                &CvarConfig::new(cvar.r0, cvar.warmup_iters, cvar.r_final).unwrap(),
                &NoiseConfig::noiseless(),
            )
            .unwrap();
            let table = &tr.final_record().shots;
            if opt_states.contains(&table.modal_state()) {
                modal_hits += 1;
            }
            for (state, count) in table.counts() {
                pooled[*state] += count;
            }
        }
        let pooled_modal = pooled
            .iter()
            .enumerate()
            .max_by_key(|(_, c)| **c)
            .map(|(s, _)| s)
            .unwrap();
        println!(
            "{name}: per-seed modal {modal_hits}/{seeds} pooled-modal {pooled_modal} (optimal: {})",
            opt_states.contains(&pooled_modal)
        );
    }
}

fn crit11() {
    let p = preset("dna-pair-8q").unwrap();
    let inst = p.instance();
    let (oracle_min, opt_states) = global_minimum(&inst, false).unwrap();
    println!("oracle min {oracle_min} minimizers {:?}", opt_states);
    let iters: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(150);
    let step: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let depth: usize = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(1);
    for (gate, readout) in [(0.0, 0.0), (0.001, 0.01), (0.002, 0.02)] {
        let noise = NoiseConfig::new(gate, readout).unwrap();
        let mut modal_hits = 0;
        let mut best_hits = 0;
        let seeds = 10u64;
        let t0 = Instant::now();
        let mut finals = Vec::new();
        let mut pooled = vec![0u64; 1 << 8];
        for seed in 0..seeds {
            let mut opt = OptimizerConfig::new(GradientMethod::Spsa, 2000, iters, seed);
            opt.adam.step = step;
            let tr = run_vqe(
                &inst,
                &AnsatzSpec::hea(8, depth),
                &opt,
                &CvarConfig::new(0.2, 0, 0.2).unwrap(),
                &noise,
            )
            .unwrap();
            let table = &tr.final_record().shots;
            if opt_states.contains(&table.modal_state()) {
                modal_hits += 1;
            }
            for (state, count) in table.counts() {
                pooled[*state] += count;
            }
            if tr.best_energy == oracle_min {
                best_hits += 1;
            }
            finals.push(tr.final_record().loss);
        }
        let pooled_modal = pooled
            .iter()
            .enumerate()
            .max_by_key(|(_, c)| **c)
            .map(|(s, _)| s)
            .unwrap();
        println!(
            "gate={gate} readout={readout}: modal-hit {modal_hits}/{seeds} pooled-modal {pooled_modal} (optimal {}) best-ever-hit {best_hits}/{seeds} mean_final_loss={:.3} elapsed={:?}",
            opt_states.contains(&pooled_modal),
            mean(&finals),
            t0.elapsed()
        );
    }
}

fn crit2() {
    let p = preset("protein-demo-20q").unwrap();
    let inst = p.instance();
    let spec = AnsatzSpec::hea(20, 2);
    for seed in [0u64, 1, 2] {
        let t0 = Instant::now();
        let tr = run(
            &inst,
            &spec,
            GradientMethod::ParameterShift,
            CvarConfig::standard(),
            2000,
            400,
            seed,
        );
        let f = tr.final_record();
        let modal = f.shots.modal_state();
        let modal_energy = inst.energy_of_index(modal);
        println!(
            "seed={seed} best_ever={:7.3} final_exact={:7.3} modal_energy={:7.3} elapsed={:?} s/iter={:.3}",
            tr.best_energy,
            f.exact_energy.unwrap(),
            modal_energy,
            t0.elapsed(),
            t0.elapsed().as_secs_f64() / 400.0
        );
    }
}

fn probe20() {
    let p = preset("protein-demo-20q").unwrap();
    let inst = p.instance();
    let spec = AnsatzSpec::hea(20, 2);
    let iters = 20;
    let t0 = Instant::now();
    let opt = OptimizerConfig::new(GradientMethod::Spsa, 2000, iters, 0);
    let _ = run_vqe(&inst, &spec, &opt, &CvarConfig::standard(), &NoiseConfig::noiseless()).unwrap();
    let per_iter = t0.elapsed().as_secs_f64() / iters as f64;
    println!("20q SPSA d=2: {:.1} ms/iter -> crit9 est {:.2} h", per_iter * 1e3, per_iter * 400.0 * 100.0 * 2.0 * 2.0 / 3600.0);
    let t0 = Instant::now();
    let opt = OptimizerConfig::new(GradientMethod::ParameterShift, 2000, iters, 0);
    let _ = run_vqe(&inst, &spec, &opt, &CvarConfig::standard(), &NoiseConfig::noiseless()).unwrap();
    let per_iter = t0.elapsed().as_secs_f64() / iters as f64;
    println!("20q adjoint d=2: {:.1} ms/iter -> crit2 est {:.1} min", per_iter * 1e3, per_iter * 400.0 * 10.0 / 60.0);
}

fn pair_screen() {
    // 7/8-base candidate pairs for the two-fragment 20q stand-in, screened
    // for landscape degeneracy (minimizer count) at L=10, p=1.5.
    let candidates: &[(&str, &str)] = &[
        ("ACGTCGA", "ACGTTCGA"),
        ("ACGTGCT", "ACGTAGCT"),
        ("AGCACGT", "AGCTACGT"),
        ("ACGTAGC", "TACGTAGC"),
        // ancestor ACGTAGCT, one deletion on one branch plus one
        // substitution on the other
        ("CCGTGCT", "ACGTAGCT"),
        ("ACGTGCA", "ACGTAGCT"),
        ("AGGTGCT", "ACGTAGCT"),
        ("ACGAGCT", "ACGTACCT"),
        // two substitutions
        ("CCGTGCA", "ACGTAGCT"),
    ];
    for (s1, s2) in candidates {
        let set = align::SequenceSet::with_padded_len(&[s1, s2], 10).unwrap();
        let inst = scoring::Instance::new(set, scoring::Penalty::default());
        let t0 = Instant::now();
        let report = brute_force_min(&inst, false).unwrap();
        println!(
            "{s1}/{s2}: min {} minimizers {} local_minima {} flat {} ({:?})",
            report.global_energy,
            report.global_states.len(),
            report.local_minima.len(),
            report.flat_nodes.len(),
            t0.elapsed()
        );
    }
}

fn crit9_pair() {
    let seeds: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(10);
    let s1 = std::env::args().nth(3).expect("s1");
    let s2 = std::env::args().nth(4).expect("s2");
    let set = align::SequenceSet::with_padded_len(&[&s1, &s2], 10).unwrap();
    let inst = scoring::Instance::new(set, scoring::Penalty::default());
    let (oracle_min, states) = global_minimum(&inst, false).unwrap();
    println!("{s1}/{s2}: oracle min {oracle_min} minimizers {}", states.len());
    let spec = AnsatzSpec::hea(20, 2);
    let mut arm_finals = Vec::new();
    for (label, cvar) in [
        ("two-stage", CvarConfig::quenched()),
        ("standard ", CvarConfig::standard()),
    ] {
        let t0 = Instant::now();
        let finals: Vec<f64> = (0..seeds)
            .into_par_iter()
            .map(|seed| {
                let tr = run(&inst, &spec, GradientMethod::Spsa, cvar, 2000, 400, seed);
                tr.final_record().exact_energy.unwrap()
            })
            .collect();
        println!(
            "  {label} mean_final={:8.4} std={:7.4} finals={:?} elapsed={:?}",
            mean(&finals),
            std_dev(&finals),
            finals.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>(),
            t0.elapsed()
        );
        arm_finals.push(finals);
    }
    let w = welch_one_sided_less(&arm_finals[0], &arm_finals[1]).unwrap();
    println!(
        "  welch two-stage<standard: t={:.3} dof={:.1} p={:.4} | point-estimate ok: {}",
        w.t,
        w.dof,
        w.p,
        mean(&arm_finals[0]) <= mean(&arm_finals[1])
    );
}

fn crit9() {
    let seeds: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(5);
    let only: Option<String> = std::env::args().nth(3);
    for name in ["protein-demo-20q", "dna-pair-20q"] {
        if let Some(filter) = &only {
            if !name.contains(filter.as_str()) {
                continue;
            }
        }
        let p = preset(name).unwrap();
        let inst = p.instance();
        let (oracle_min, _) = global_minimum(&inst, false).unwrap();
        println!("{name}: oracle min {oracle_min}");
        let spec = AnsatzSpec::hea(20, 2);
        let mut arm_finals = Vec::new();
        for (label, cvar) in [
            ("two-stage", CvarConfig::quenched()),
            ("standard ", CvarConfig::standard()),
        ] {
            let t0 = Instant::now();
            let finals: Vec<f64> = (0..seeds)
                .into_par_iter()
                .map(|seed| {
                    let tr = run(&inst, &spec, GradientMethod::Spsa, cvar, 2000, 400, seed);
                    tr.final_record().exact_energy.unwrap()
                })
                .collect();
            println!(
                "  {label} mean_final={:8.4} std={:7.4} finals={:?} elapsed={:?}",
                mean(&finals),
                std_dev(&finals),
                finals.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>(),
                t0.elapsed()
            );
            arm_finals.push(finals);
        }
        if arm_finals.len() == 2 {
            let w = welch_one_sided_less(&arm_finals[0], &arm_finals[1]).unwrap();
            println!(
                "  welch two-stage<standard: t={:.3} dof={:.1} p={:.4} | point-estimate ok: {}",
                w.t,
                w.dof,
                w.p,
                mean(&arm_finals[0]) <= mean(&arm_finals[1])
            );
        }
    }
}
