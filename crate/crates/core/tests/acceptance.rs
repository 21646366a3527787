//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vouw::cli::format::{parse_mask, parse_matrix, write_mask, write_matrix, PatternSet};
use vouw::encoding::{prequential_length, DEFAULT_EPSILON, RISSANEN_CONSTANT};
use vouw::eval::{coverage_mask, evaluate, spearman, EvalReport, Variant};
use vouw::grid::{Mask, Matrix, Pattern};
use vouw::miner::{mine, step, MiningState};
use vouw::ril::{generate, generate_shape, RilConfig};

const SEEDS: std::ops::RangeInclusive<u64> = 1..=5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

// ---------------------------------------------------------------------
// Independent description-length oracle: universal code by iterated logs,
// binomials by summed logarithms, the instance code by sequentially
// encoding every instance with the running plug-in probabilities.

fn oracle_universal(log2_n: f64) -> f64 {
    let mut bits = RISSANEN_CONSTANT.log2();
    let mut t = log2_n;
    while t > 0.0 {
        bits += t;
        t = t.log2();
    }
    bits
}

fn oracle_log2_binomial(n: u64, k: u64) -> f64 {
    (0..k).map(|i| ((n - i) as f64).log2() - ((i + 1) as f64).log2()).sum()
}

fn oracle_bits(state: &MiningState) -> f64 {
    let (m, n) = state.dims();
    let index = ((m * n) as f64).log2();
    let symbol = (state.matrix().alphabet_size() as f64).log2();
    let mut usage: BTreeMap<_, u64> = BTreeMap::new();
    for (_, id) in state.instances() {
        *usage.entry(id).or_default() += 1;
    }
    let h = usage.len() as f64;
    let mut model = oracle_universal(h.log2());
    for id in usage.keys() {
        let p = state.pattern(*id).unwrap();
        let card = p.cardinality() as u64;
        model += index + oracle_universal(oracle_log2_binomial(p.area(), card)) + card as f64 * symbol;
    }
    let eps = DEFAULT_EPSILON;
    let mut seen: HashMap<_, f64> = HashMap::new();
    let mut total = 0.0;
    let mut pp = 0.0;
    for (_, id) in state.instances() {
        let c = seen.entry(id).or_default();
        pp -= ((*c + eps) / (total + eps * h)).log2();
        *c += 1.0;
        total += 1.0;
    }
    model + index + pp
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, alphabet: u32) -> Matrix {
    let cells = (0..rows * cols).map(|_| rng.gen_range(0..alphabet)).collect();
    Matrix::new(rows, cols, alphabet, cells).unwrap()
}

fn gain_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut checked, mut worst, mut support_mismatch) = (0usize, 0.0f64, 0usize);
    for k in 0..500u64 {
        let alphabet = [2, 4, 16][(k % 3) as usize];
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k);
        let m = random_matrix(&mut rng, 16, 16, alphabet);
        let mut state = MiningState::new(&m);
        loop {
            let candidates = state.find_candidates();
            let before = oracle_bits(&state);
            for c in &candidates {
                let fast = state.gain(c).unwrap();
                let mut after = state.clone();
                let merged = after.apply_merge(c).unwrap();
                if merged.replacements != c.support {
                    support_mismatch += 1;
                }
                worst = worst.max((fast - (before - oracle_bits(&after))).abs());
                checked += 1;
            }
            match state.best_candidate(&candidates).unwrap() {
                Some(best) if best.gain > 0.0 => {
                    state.apply_merge(&best.candidate).unwrap();
                }
                _ => break,
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && support_mismatch == 0 && secs < 300.0,
        format!("{checked} candidates, max |fast - brute force| = {worst:.2e} bits, {support_mismatch} support mismatches, {secs:.1}s"),
    )
}

// ---------------------------------------------------------------------

fn sequential_plugin(order: &[usize], patterns: usize, eps: f64) -> f64 {
    let mut counts = vec![0.0; patterns];
    let mut bits = 0.0;
    for (i, &x) in order.iter().enumerate() {
        bits -= ((counts[x] + eps) / (i as f64 + eps * patterns as f64)).log2();
        counts[x] += 1.0;
    }
    bits
}

fn prequential_identities() -> Outcome {
    let single_ok = [1u64, 2, 7, 100, 65536].iter().all(|&u| prequential_length([u], 0.5) == 0.0);
    let pair = prequential_length([1, 1], 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let h = rng.gen_range(1..8);
        let usages: Vec<u64> = (0..h).map(|_| rng.gen_range(1..40)).collect();
        let mut order: Vec<usize> =
            usages.iter().enumerate().flat_map(|(i, &u)| std::iter::repeat_n(i, u as usize)).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let closed = prequential_length(usages.iter().copied(), 0.5);
        worst = worst.max((closed - sequential_plugin(&order, h, 0.5)).abs());
    }
    outcome(
        single_ok && (pair - 3.0).abs() <= 1e-9 && worst <= 1e-9,
        format!(
            "single pattern exact zero: {single_ok}, {{1,1}} -> {pair:.12} bits, max order deviation {worst:.2e} bits"
        ),
    )
}

// ---------------------------------------------------------------------

/// Largest set of disjoint adjacent pairs in a line of `n` cells.
fn max_disjoint_pairs(n: usize) -> u64 {
    fn go(i: usize, n: usize) -> u64 {
        if i + 1 >= n {
            return 0;
        }
        go(i + 1, n).max(1 + go(i + 2, n))
    }
    go(0, n)
}

fn self_overlap_counting() -> Outcome {
    let mut failures = Vec::new();
    let mut line_of_five = 0;
    for n in 2..=10usize {
        for (rows, cols) in [(1, n), (n, 1)] {
            let m = Matrix::new(rows, cols, 1, vec![0; n]).unwrap();
            let s = MiningState::new(&m);
            let c = s.find_candidates();
            let support = c.first().map_or(0, |c| c.support);
            let merged = c.first().map_or(0, |c| s.clone().apply_merge(c).unwrap().replacements);
            if n == 5 && rows == 1 {
                line_of_five = support;
            }
            if c.len() != 1 || support != max_disjoint_pairs(n) || merged != support {
                failures.push(format!("{rows}x{cols}: support {support}"));
            }
        }
    }
    outcome(
        line_of_five == 2 && failures.is_empty(),
        format!("line of 5 -> support {line_of_five}; lengths 2..=10 both orientations mismatches: {failures:?}"),
    )
}

// ---------------------------------------------------------------------

/// Benchmark runs shared between criteria.
#[derive(Default)]
struct Runs {
    cache: HashMap<(usize, u64, Variant, u64), EvalReport>,
}

impl Runs {
    fn snr(&mut self, size: usize, snr: f64, variant: Variant, seed: u64) -> EvalReport {
        *self.cache.entry((size, snr.to_bits(), variant, seed)).or_insert_with(|| {
            let (m, truth) = generate(&RilConfig::with_snr(size, size, snr, seed).unwrap()).unwrap();
            evaluate(&m, &truth, variant).unwrap()
        })
    }

    fn cell(&mut self, size: usize, snr: f64, variant: Variant) -> Vec<EvalReport> {
        SEEDS.map(|seed| self.snr(size, snr, variant, seed)).collect()
    }
}

fn table_reproduction(runs: &mut Runs) -> Outcome {
    let low = runs.cell(256, 0.05, Variant::Local);
    let high = runs.cell(256, 0.3, Variant::Local);
    let (lp, lr) = (mean(low.iter().map(|r| r.precision)), mean(low.iter().map(|r| r.recall)));
    let (hp, hr) = (mean(high.iter().map(|r| r.precision)), mean(high.iter().map(|r| r.recall)));
    let slowest = low.iter().chain(&high).map(|r| r.seconds).fold(0.0, f64::max);
    outcome(
        lp >= 0.95 && lr >= 0.95 && hp >= 0.95 && hr >= 0.80 && slowest <= 60.0,
        format!("256/.05 Local P/R {lp:.3}/{lr:.3}; 256/.3 Local P/R {hp:.3}/{hr:.3}; slowest run {slowest:.1}s"),
    )
}

fn heuristic_ordering(runs: &mut Runs) -> Outcome {
    let none = runs.cell(256, 0.05, Variant::None);
    let star = runs.cell(256, 0.05, Variant::BestStar);
    let local = runs.cell(256, 0.05, Variant::Local);
    let (pn, ps) = (mean(none.iter().map(|r| r.precision)), mean(star.iter().map(|r| r.precision)));
    let (tn, tl) = (mean(none.iter().map(|r| r.seconds)), mean(local.iter().map(|r| r.seconds)));
    outcome(
        ps <= pn && tl < tn,
        format!("precision Best-* {ps:.3} vs None {pn:.3}; mean time Local {tl:.2}s vs None {tn:.2}s"),
    )
}

fn snr_compression_correlation(runs: &mut Runs) -> Outcome {
    let snrs = [0.05, 0.1, 0.2, 0.3];
    let mut pass = true;
    let mut parts = Vec::new();
    let (mut all_x, mut all_y) = (Vec::new(), Vec::new());
    for size in [128, 256] {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for &snr in &snrs {
            for r in runs.cell(size, snr, Variant::Local) {
                xs.push(r.snr_ground_truth);
                ys.push(1.0 - r.compression_ratio);
            }
        }
        let rho = spearman(&xs, &ys).unwrap_or(f64::NAN);
        pass &= rho > 0.9;
        parts.push(format!("size {size}: rho {rho:.3}"));
        all_x.extend(xs);
        all_y.extend(ys);
    }
    let pooled = spearman(&all_x, &all_y).unwrap_or(f64::NAN);
    outcome(pass, format!("{} (pooled {pooled:.3})", parts.join(", ")))
}

fn prevalence_recall() -> Outcome {
    let recall = |prevalence: usize| {
        mean(SEEDS.map(|seed| {
            let config = RilConfig::with_counts(256, 256, 12, 5, prevalence, seed).unwrap();
            let (m, truth) = generate(&config).unwrap();
            evaluate(&m, &truth, Variant::Local).unwrap().recall
        }))
    };
    let (high, low) = (recall(20), recall(2));
    outcome(high - low >= 0.1, format!("mean recall prevalence 20: {high:.3}, prevalence 2: {low:.3}"))
}

// ---------------------------------------------------------------------

fn losslessness_and_monotonicity() -> Outcome {
    let mut violations = Vec::new();
    let mut worst_ratio = 0.0f64;
    let mut merges = 0usize;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = if seed % 2 == 0 {
            let snr = rng.gen_range(0.0..0.25);
            let config = RilConfig::with_snr(32, 32, snr, seed).unwrap().alphabet(rng.gen_range(2..64)).unwrap();
            generate(&config).unwrap().0
        } else {
            let alphabet = rng.gen_range(1..6);
            random_matrix(&mut rng, 32, 32, alphabet)
        };
        let variant = Variant::ALL[(seed % 4) as usize];
        let mut state = MiningState::new(&m);
        let mut prev = state.total_bits();
        let config = variant.miner_config();
        let mut iteration = 1;
        while let Some(record) = step(&mut state, &config, iteration).unwrap() {
            merges += record.merges + record.local_merges;
            iteration += 1;
            if state.reconstruct().as_ref() != Ok(&m) {
                violations.push(format!("seed {seed}: reconstruction differs"));
                break;
            }
            let bits = state.total_bits();
            if bits > prev + 1e-9 {
                violations.push(format!("seed {seed}: {prev} -> {bits}"));
            }
            prev = bits;
        }
        worst_ratio = worst_ratio.max(state.lengths().ratio);
    }
    outcome(
        violations.is_empty() && worst_ratio <= 1.0,
        format!("100 runs, {merges} merges, max final ratio {worst_ratio:.4}, violations: {violations:?}"),
    )
}

fn noise_floor() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for variant in Variant::ALL {
        let (mut covered, mut ratio) = (Vec::new(), Vec::new());
        for seed in 1..=10u64 {
            let config = RilConfig::with_counts(64, 64, 12, 0, 1, seed).unwrap();
            let (m, _) = generate(&config).unwrap();
            let out = mine(&m, &variant.miner_config()).unwrap();
            covered.push(coverage_mask(&out.state).count() as f64 / 4096.0);
            ratio.push(out.state.lengths().ratio);
        }
        let (c, r) = (mean(covered), mean(ratio));
        pass &= c <= 0.05 && r >= 0.9;
        parts.push(format!("{variant}: covered {c:.4}, ratio {r:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn format_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = 0;
    for _ in 0..1000 {
        let (rows, cols) = (rng.gen_range(1..12), rng.gen_range(1..12));
        let alphabet = rng.gen_range(1..300);
        let m = random_matrix(&mut rng, rows, cols, alphabet);
        failures += (parse_matrix(&write_matrix(&m)).ok() != Some(m)) as usize;
        let bits = (0..rows * cols).map(|_| rng.gen_bool(0.3)).collect();
        let mask = Mask::from_bits(rows, cols, bits).unwrap();
        failures += (parse_mask(&write_mask(&mask)).ok() != Some(mask)) as usize;
        let patterns: Vec<(Pattern, u64)> = (0..rng.gen_range(0..6))
            .map(|_| (generate_shape(rng.gen_range(1..8), 50, &mut rng), rng.gen_range(0..20)))
            .collect();
        let instances = if patterns.is_empty() {
            Vec::new()
        } else {
            (0..rng.gen_range(0..10))
                .map(|_| ((rng.gen_range(0..100), rng.gen_range(0..100)), rng.gen_range(0..patterns.len())))
                .collect()
        };
        let set = PatternSet { patterns, instances };
        failures += (PatternSet::parse(&set.write()).ok() != Some(set)) as usize;
    }
    let mut mined_failures = 0;
    for seed in 0..50u64 {
        let (m, _) = generate(&RilConfig::with_snr(32, 32, 0.2, seed).unwrap()).unwrap();
        let out = mine(&m, &Variant::ALL[(seed % 4) as usize].miner_config()).unwrap();
        let text = PatternSet::from_state(&out.state).write();
        let back = PatternSet::parse(&text).and_then(|s| s.reconstruct(32, 32, m.alphabet_size()));
        mined_failures += (back.ok() != Some(m)) as usize;
    }
    outcome(
        failures == 0 && mined_failures == 0,
        format!("1000 random matrix/mask/pattern-set round trips: {failures} failures; 50 mined sets: {mined_failures} reconstruction failures"),
    )
}

type Criterion = (&'static str, Box<dyn FnOnce(&mut Runs) -> Outcome>);

fn main() {
    let mut runs = Runs::default();
    let criteria: Vec<Criterion> = vec![
        ("gain oracle equivalence", Box::new(|_| gain_oracle_equivalence())),
        ("prequential identities", Box::new(|_| prequential_identities())),
        ("self-overlap counting", Box::new(|_| self_overlap_counting())),
        ("results table reproduction", Box::new(table_reproduction)),
        ("heuristic quality ordering", Box::new(heuristic_ordering)),
        ("SNR-compression correlation", Box::new(snr_compression_correlation)),
        ("prevalence-recall effect", Box::new(|_| prevalence_recall())),
        ("losslessness and monotonicity", Box::new(|_| losslessness_and_monotonicity())),
        ("noise floor", Box::new(|_| noise_floor())),
        ("format round trips", Box::new(|_| format_round_trips())),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let o = run(&mut runs);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as usize;
        println!("criterion {:2} {name}: {verdict} ({}) [{:.1}s]", i + 1, o.detail, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
