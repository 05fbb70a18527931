//! End-to-end acceptance checks. Each criterion prints one `[PASS]` or
//! `[FAIL]` line; the process exits non-zero if any criterion fails.
//!
//! Run alone with `cargo test --release -p recmwpm --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recmwpm::code::{CodeLayout, FlavorPair};
use recmwpm::decoder::{conditional_probability, Decoder, DecoderConfig, WeightMode};
use recmwpm::experiment::{self, BisectionOptions, CampaignOptions, ExposureFamily, NoiseFamily, RateEstimate};
use recmwpm::matching::{min_weight_perfect_matching, WeightedGraph};
use recmwpm::noise::{self, Bias, CalibrationEntry, ExtremeOrdering, NoiseModel};
use recmwpm::pauli::{Pauli, PauliString};

const SEED: u64 = 7;
const RECURSIVE: DecoderConfig = DecoderConfig::Recmwpm { n_max: 10 };

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into() }
}

fn pooled(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

fn c1_conditionals() -> Outcome {
    let mut worst = String::new();
    let mut pass = true;
    let code = CodeLayout::rotated_planar(3, FlavorPair::Xz).unwrap();
    for p in [0.03, 0.1, 0.3] {
        let ch = noise::depolarizing(p).unwrap();
        for spec in Decoder::new(&code).specs() {
            let recovered = conditional_probability(&ch, &spec, true);
            let unrecovered = conditional_probability(&ch, &spec, false);
            if recovered != 0.5 || unrecovered != p / 3.0 {
                pass = false;
                worst = format!("p={p} {:?}: {recovered} / {unrecovered}", spec.flavor);
            }
        }
    }
    outcome(pass, format!("p(flip|other flipped)=1/2 and p(flip|other idle)=p/3 for p in {{0.03,0.1,0.3}} {worst}"))
}

fn c2_pta() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut max_dev: f64 = 0.0;
    for _ in 0..10_000 {
        let t1 = rng.gen_range(1.0..500.0);
        let t = rng.gen_range(0.0..1000.0);
        let ch = noise::pta_channel(t1, t1, t).unwrap();
        max_dev = max_dev.max((ch.p_x - ch.p_y).abs()).max((ch.p_x - ch.p_z).abs());
    }
    let mut rejected = true;
    for _ in 0..1000 {
        let t1 = rng.gen_range(1.0..500.0);
        let t2 = 2.0 * t1 * rng.gen_range(1.0001..5.0);
        rejected &= noise::pta_channel(t1, t2, rng.gen_range(0.0..100.0)).is_err();
    }
    outcome(max_dev <= 1e-12 && rejected, format!("T1=T2 max |p_i - p_j| = {max_dev:.2e} over 10^4 points, T2>2T1 rejected: {rejected}"))
}

/// Exhaustive minimum perfect matching weight.
fn oracle(w: &[Vec<f64>], free: &mut Vec<usize>) -> f64 {
    if free.is_empty() {
        return 0.0;
    }
    let u = free.remove(0);
    let mut best = f64::INFINITY;
    for i in 0..free.len() {
        let v = free.remove(i);
        best = best.min(w[u][v] + oracle(w, free));
        free.insert(i, v);
    }
    free.insert(0, u);
    best
}

fn c3_matching() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for trial in 0..1000 {
        let n = 2 * rng.gen_range(2..=5);
        let integral = trial % 2 == 0;
        let mut w = vec![vec![0.0; n]; n];
        for u in 0..n {
            for v in u + 1..n {
                let x = if integral { rng.gen_range(0..20) as f64 } else { rng.gen_range(0.0..10.0) };
                w[u][v] = x;
                w[v][u] = x;
            }
        }
        let mut g = WeightedGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set_weight(u, v, w[u][v]);
            }
        }
        let m = min_weight_perfect_matching(&g).unwrap();
        let expected = oracle(&w, &mut (0..n).collect());
        let got = m.total_weight(&g);
        let ok = m.is_perfect(n) && if integral { got == expected } else { (got - expected).abs() <= 1e-9 * expected.max(1.0) };
        mismatches += usize::from(!ok);
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches against exhaustive search on 1000 graphs (4-10 nodes)"))
}

fn c4_single_errors() -> Outcome {
    let code = CodeLayout::rotated_planar(3, FlavorPair::Xz).unwrap();
    let model = NoiseModel::iid(9, noise::depolarizing(0.1).unwrap());
    let dec = Decoder::new(&code);
    let mut failures = 0;
    for q in 0..9 {
        for p in Pauli::NON_TRIVIAL {
            let e = PauliString::from_support(9, &[q], p).unwrap();
            let s = code.syndrome(&e).unwrap();
            for config in [DecoderConfig::Mwpm, RECURSIVE] {
                let c = dec.decode(&s, config, &model, None).unwrap().correction;
                failures += usize::from(code.logical_class(&e.multiply(&c).unwrap()).unwrap() != Pauli::I);
            }
        }
    }
    outcome(failures == 0, format!("{failures} of 27 single-qubit errors x 2 decoders left a logical error at d=3"))
}

fn c5_fallback() -> Outcome {
    let code = CodeLayout::rotated_planar(5, FlavorPair::Xz).unwrap();
    let dec = Decoder::new(&code);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut differ = 0;
    for _ in 0..1000 {
        let p = rng.gen_range(0.01..0.3);
        let model = NoiseModel::iid(25, noise::depolarizing(p).unwrap());
        let s = code.syndrome(&model.sample_error(&mut rng)).unwrap();
        let a = dec.recursive(&s, &model, 0, None).unwrap();
        let b = dec.mwpm(&s, WeightMode::Uniform, None).unwrap();
        differ += usize::from(a.correction != b.correction || !a.fallback_used);
    }
    outcome(differ == 0, format!("{differ} of 1000 d=5 syndromes differ between n_max=0 and uniform matching"))
}

fn threshold_grid() -> Vec<f64> {
    (0..9).map(|i| 0.12 + 0.07 * i as f64 / 8.0).collect()
}

fn c6_thresholds() -> Outcome {
    let layouts: Vec<CodeLayout> = [5, 7].iter().map(|&d| CodeLayout::rotated_planar(d, FlavorPair::Xz).unwrap()).collect();
    let grid = threshold_grid();
    let mut found = Vec::new();
    for (config, target) in [(DecoderConfig::Mwpm, 0.14), (RECURSIVE, 0.165)] {
        let table = experiment::sweep(&layouts, config, NoiseFamily::Depolarizing, &grid, 20_000, SEED).unwrap();
        let crossing = experiment::threshold_estimate(&table).map(|r| r.p_th).ok();
        found.push((config.name(), target, crossing));
    }
    let pass = found.iter().all(|&(_, target, c)| c.is_some_and(|c| (c - target).abs() <= 0.015));
    let text: Vec<String> = found.iter().map(|(name, target, c)| format!("{name} {} (target {target}±0.015)", c.map_or("none".into(), |c| format!("{c:.4}")))).collect();
    outcome(pass, format!("d=5/7 crossings: {}", text.join(", ")))
}

fn bias_point(eta: Bias, config: DecoderConfig) -> RateEstimate {
    let code = CodeLayout::rotated_planar(5, FlavorPair::Xy).unwrap();
    let model = NoiseModel::iid(25, noise::biased(0.1, eta).unwrap());
    experiment::logical_error_rate(&code, config, &model, 10_000, experiment::derive_seed(SEED, 70)).unwrap()
}

fn c7_bias() -> Outcome {
    let mut pass = true;
    let mut text = Vec::new();
    for eta in [Bias::Finite(0.5), Bias::Finite(3.0), Bias::Finite(10.0), Bias::Infinite] {
        let rec = bias_point(eta, RECURSIVE);
        let conv = bias_point(eta, DecoderConfig::Mwpm);
        let margin = (conv.p_logical - rec.p_logical) / pooled(rec.std_error, conv.std_error);
        let strong = !matches!(eta, Bias::Finite(b) if b < 3.0);
        pass &= rec.p_logical <= conv.p_logical && (!strong || margin >= 3.0);
        text.push(format!("eta={eta}: {:.4} vs {:.4} ({margin:.1} SE)", rec.p_logical, conv.p_logical));
    }
    outcome(pass, format!("XY d=5 p=0.1 recMWPM vs MWPM: {}", text.join(", ")))
}

fn synthetic_calibration() -> Vec<CalibrationEntry> {
    (0..18)
        .map(|i| {
            let t = if i < 9 { 200.0 } else { 20.0 };
            CalibrationEntry::new(format!("Q{i}"), t, t)
        })
        .collect()
}

fn inid_bisection(selected: &[CalibrationEntry]) -> BisectionOptions {
    let t_bracket = ExposureFamily::IidMean(selected.to_vec()).bracket_for(0.001, 0.35).unwrap();
    BisectionOptions { t_bracket, tolerance: 1e-4, max_steps: 10 }
}

fn c8_inid() -> Outcome {
    let code = CodeLayout::rotated_planar(3, FlavorPair::Xz).unwrap();
    let entries = synthetic_calibration();
    let selected = noise::select_extremes(&entries, 9, ExtremeOrdering::T1).unwrap();
    let bisection = inid_bisection(&selected);
    let iid = experiment::pseudo_threshold(&code, DecoderConfig::Mwpm, &ExposureFamily::IidMean(selected), &bisection, 10_000, experiment::campaign_shot_seed(SEED)).unwrap();
    let opts = CampaignOptions { arrangements: 20, bisection, shots: 10_000, seed: SEED, ordering: ExtremeOrdering::T1 };
    let rec = experiment::inid_campaign(&code, RECURSIVE, &entries, &opts).unwrap();
    let conv = experiment::inid_campaign(&code, DecoderConfig::Mwpm, &entries, &opts).unwrap();
    let gap_iid = (iid.p_pth - rec.p_pth) / pooled(iid.std_error, rec.std_error);
    let gap_dec = (rec.p_pth - conv.p_pth) / pooled(rec.std_error, conv.std_error);
    outcome(
        gap_iid >= 3.0 && gap_dec >= 3.0,
        format!(
            "d=3 p_pth: i.i.d. {:.5}±{:.5} > i.ni.d. recMWPM {:.5}±{:.5} ({gap_iid:.1} SE) > i.ni.d. MWPM {:.5}±{:.5} ({gap_dec:.1} SE)",
            iid.p_pth, iid.std_error, rec.p_pth, rec.std_error, conv.p_pth, conv.std_error
        ),
    )
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn c9_determinism() -> Outcome {
    let runs: Vec<Vec<u64>> = [1, 3, 8]
        .into_iter()
        .map(|threads| {
            with_threads(threads, || {
                let mut counts = Vec::new();
                let layouts = [CodeLayout::rotated_planar(5, FlavorPair::Xz).unwrap()];
                for config in [DecoderConfig::Mwpm, RECURSIVE] {
                    let table = experiment::sweep(&layouts, config, NoiseFamily::Depolarizing, &threshold_grid()[3..5], 4000, SEED).unwrap();
                    counts.extend(table.iter().map(|pt| pt.estimate.failures));
                }
                counts.push(bias_point(Bias::Finite(3.0), RECURSIVE).failures);
                let code = CodeLayout::rotated_planar(3, FlavorPair::Xz).unwrap();
                let entries = synthetic_calibration();
                let selected = noise::select_extremes(&entries, 9, ExtremeOrdering::T1).unwrap();
                let opts = CampaignOptions { arrangements: 2, bisection: inid_bisection(&selected), shots: 4000, seed: SEED, ordering: ExtremeOrdering::T1 };
                let campaign = experiment::inid_campaign(&code, RECURSIVE, &entries, &opts).unwrap();
                counts.extend(campaign.per_arrangement.iter().map(|r| r.estimate.failures));
                counts
            })
        })
        .collect();
    let pass = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(pass, format!("failure counts with 1, 3 and 8 threads identical: {pass} ({} counts compared)", runs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("conditional probabilities", c1_conditionals),
        ("pure-dephasing channel", c2_pta),
        ("matching optimality", c3_matching),
        ("distance guarantee", c4_single_errors),
        ("fallback equivalence", c5_fallback),
        ("depolarizing thresholds", c6_thresholds),
        ("bias advantage", c7_bias),
        ("i.ni.d. ordering", c8_inid),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!result.pass);
        println!("[{}] {} {name}: {} ({:.1}s)", if result.pass { "PASS" } else { "FAIL" }, i + 1, result.summary, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
