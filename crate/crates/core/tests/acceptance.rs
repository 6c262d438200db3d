//! Acceptance criteria, one PASS/FAIL line each.
//!
//! cargo test -p speller-core --test acceptance

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use speller_core::engine::{matrix_total, EngineConfig, Mandatory, SpellSession, Symbol};
use speller_core::insilico::{
    build_experiment_kb, read_corpus, run_experiment, sentences_of, simulate_phrasebook, split_phrasebook, synth,
    PhrasebookTag, SimulationConfig,
};
use speller_core::metrics::{ac, ec, estimate_rates, selection_time, Phase, RateConfig, SpellerKind, TimingConfig};
use speller_core::{build_matrix, KnowledgeBase, NormalizeMode, Sentence, Word};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn bundled_corpora() -> Vec<(&'static str, Vec<(Sentence, u64)>)> {
    synth::BUNDLED
        .iter()
        .map(|(name, raw)| (*name, read_corpus(raw.as_bytes(), NormalizeMode::default()).expect("bundled corpus")))
        .collect()
}

fn kb_of_corpus(corpus: &[(Sentence, u64)]) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    for (s, n) in corpus {
        kb.add_sentence_n(s, *n).expect("corpus sentence");
    }
    kb
}

const PRED: SpellerKind = SpellerKind::Polymorph { predictions: true };
const NO_PRED: SpellerKind = SpellerKind::Polymorph { predictions: false };

fn baseline_isr() -> Outcome {
    let start = Instant::now();
    let book: Vec<Sentence> = ["piace_tanto_alla_gente.", "a.", "where_is_the_station?"]
        .iter()
        .map(|t| Sentence::new(*t).unwrap())
        .collect();
    let config = SimulationConfig::default();
    let mut isrs = Vec::new();
    for s in &book {
        let rec = simulate_phrasebook(&KnowledgeBase::new(), std::slice::from_ref(s), SpellerKind::Baseline, PhrasebookTag::Other, &config)
            .map_err(|e| e.to_string())?;
        isrs.push(rec.aggregates().isr);
    }
    check(isrs.iter().all(|&x| x == 12.0), || format!("ISR {isrs:?}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("ISR = {:.2} for {} sentences", isrs[0], isrs.len()))
}

fn baseline_timing() -> Outcome {
    let start = Instant::now();
    let timing = TimingConfig::default();
    let t = selection_time(6, 6, &timing, Phase::Plain);
    check(t == 41.875, || format!("selection time {t}"))?;
    let target = Sentence::new("piace_tanto_alla_gente.").unwrap();
    let rec = simulate_phrasebook(&KnowledgeBase::new(), &[target], SpellerKind::Baseline, PhrasebookTag::Other, &SimulationConfig::default())
        .map_err(|e| e.to_string())?;
    let a = rec.aggregates();
    check(a.time_s == 23.0 * 41.875, || format!("sentence time {}", a.time_s))?;
    for (name, v) in [("SM", a.sm), ("OCM", a.ocm)] {
        check((v - 1.4328).abs() < 5e-5, || format!("{name} = {v}"))?;
        check((v - 1.42).abs() <= 0.02, || format!("{name} = {v} not within 0.02 of 1.42"))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("t = {t} s, SM = OCM = {:.4}", a.sm))
}

fn absolute_rate_bound() -> Outcome {
    let expected = 31f64.log2();
    let mut seen = Vec::new();
    for (name, corpus) in bundled_corpora() {
        let kb = kb_of_corpus(&corpus);
        let est = estimate_rates(&kb, &RateConfig::new(SpellerKind::Baseline, 1000, 5, 11)).map_err(|e| e.to_string())?;
        check(est.big_r_n.to_bits() == expected.to_bits(), || format!("{name}: R_n = {:.17}", est.big_r_n))?;
        seen.push(est.big_r_n);
    }
    check((expected - 4.9542).abs() < 5e-5, || format!("log2 31 = {expected}"))?;
    Ok(format!("R_n = {:.4} bit-exact on {} corpora", seen[0], seen.len()))
}

fn redundancy_ordering() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for (name, corpus) in bundled_corpora() {
        let kb = kb_of_corpus(&corpus);
        let d = |speller| {
            estimate_rates(&kb, &RateConfig::new(speller, 1000, 20, 2024))
                .map(|e| e.d_n)
                .map_err(|e| e.to_string())
        };
        let (base, no_pred, pred) = (d(SpellerKind::Baseline)?, d(NO_PRED)?, d(PRED)?);
        check(base > no_pred && pred < base, || {
            format!("{name}: D baseline {base:.3}, no-pred {no_pred:.3}, pred {pred:.3}")
        })?;
        lines.push(format!("{name} {base:.2}/{no_pred:.2}/{pred:.2}"));
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("D baseline/no-pred/pred: {}", lines.join(", ")))
}

/// Longest common prefix of a non-empty set of words.
fn lcp<'a>(words: &[&'a str]) -> &'a str {
    let first = words[0];
    let mut len = first.len();
    for w in &words[1..] {
        len = len.min(first.bytes().zip(w.bytes()).take_while(|(a, b)| a == b).count());
    }
    &first[..len]
}

/// Independent reference speller: the text spelled by the next selection
/// when `remaining` is still to be spelled after `spelled`.
fn reference_delta(vocab: &[&str], kb: &KnowledgeBase, speller: SpellerKind, spelled: &str, remaining: &str) -> String {
    let next = remaining.chars().next().unwrap();
    if speller == SpellerKind::Baseline {
        return next.to_string();
    }
    if speller == PRED {
        let m = build_matrix(kb, spelled, &EngineConfig::default());
        let hit = m
            .predictions()
            .filter(|(_, _, spell)| remaining.starts_with(spell))
            .min_by_key(|(id, _, _)| *id);
        if let Some((_, _, spell)) = hit {
            return spell.to_string();
        }
    }
    if next == '_' {
        return "_".into();
    }
    let swp = &spelled[spelled.rfind('_').map_or(0, |i| i + 1)..];
    let stem = format!("{swp}{next}");
    let cands: Vec<&str> = vocab.iter().copied().filter(|w| w.starts_with(&stem)).collect();
    lcp(&cands)[swp.len()..].to_string()
}

/// Exact entropy per selection of the first `n` selections, by summing
/// the probability of every word sequence per resulting selection sequence.
fn exhaustive_rate(words: &[(&str, u64)], speller: SpellerKind, n: usize) -> f64 {
    let mut kb = KnowledgeBase::new();
    for (w, c) in words {
        kb.add_word(&Word::new(*w).unwrap(), *c);
    }
    let vocab: Vec<&str> = words.iter().map(|w| w.0).collect();
    let total: u64 = words.iter().map(|w| w.1).sum();
    let mut joint: BTreeMap<Vec<String>, f64> = BTreeMap::new();

    struct Ctx<'a> {
        words: &'a [(&'a str, u64)],
        vocab: &'a [&'a str],
        kb: &'a KnowledgeBase,
        speller: SpellerKind,
        n: usize,
        total: u64,
    }
    fn walk(ctx: &Ctx, target: String, spelled: String, deltas: Vec<String>, p: f64, joint: &mut BTreeMap<Vec<String>, f64>) {
        if deltas.len() == ctx.n {
            *joint.entry(deltas).or_default() += p;
            return;
        }
        if spelled.len() == target.len() {
            for (w, c) in ctx.words {
                let q = *c as f64 / ctx.total as f64;
                walk(ctx, format!("{target}{w}_"), spelled.clone(), deltas.clone(), p * q, joint);
            }
            return;
        }
        let d = reference_delta(ctx.vocab, ctx.kb, ctx.speller, &spelled, &target[spelled.len()..]);
        assert!(target[spelled.len()..].starts_with(&d), "reference speller left the target");
        let mut deltas = deltas;
        deltas.push(d.clone());
        walk(ctx, target, format!("{spelled}{d}"), deltas, p, joint);
    }
    let ctx = Ctx { words, vocab: &vocab, kb: &kb, speller, n, total };
    walk(&ctx, String::new(), String::new(), Vec::new(), 1.0, &mut joint);
    let mass: f64 = joint.values().sum();
    assert!((mass - 1.0).abs() < 1e-9, "joint mass {mass}");
    -joint.values().map(|p| p * p.log2()).sum::<f64>() / n as f64
}

fn entropy_oracle() -> Outcome {
    let toy = [("the", 5), ("then", 2), ("to", 3), ("a", 4), ("ant", 1)];
    let mut kb = KnowledgeBase::new();
    for (w, c) in toy {
        kb.add_word(&Word::new(w).unwrap(), c);
    }
    let mut lines = Vec::new();
    for speller in [SpellerKind::Baseline, NO_PRED, PRED] {
        for n in [3, 6] {
            let exact = exhaustive_rate(&toy, speller, n);
            let mc = estimate_rates(&kb, &RateConfig::new(speller, n, 10_000, 99)).map_err(|e| e.to_string())?.r_n;
            let rel = (mc - exact).abs() / exact;
            check(rel < 0.01, || format!("{speller} pred={} n={n}: exact {exact:.5}, MC {mc:.5}", speller.predictions()))?;
            lines.push(format!("{}{}@{n} {:.2}%", speller, if speller == PRED { "+pred" } else { "" }, rel * 100.0));
        }
    }
    Ok(format!("relative error: {}", lines.join(", ")))
}

fn ocm_ordering() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for (name, corpus) in bundled_corpora() {
        let split = split_phrasebook(&corpus, 200, 200, 7).map_err(|e| e.to_string())?;
        let kb = build_experiment_kb(&split);
        let records = run_experiment(&kb, &sentences_of(&split.a_in), &sentences_of(&split.a_out), &SimulationConfig::default())
            .map_err(|e| e.to_string())?;
        let ocm = |sp: SpellerKind, tag: PhrasebookTag| {
            records
                .iter()
                .find(|r| r.speller == sp && r.phrasebook == tag)
                .map(|r| r.aggregates().ocm)
                .unwrap()
        };
        let v = [
            ocm(PRED, PhrasebookTag::AIn),
            ocm(PRED, PhrasebookTag::AOut),
            ocm(NO_PRED, PhrasebookTag::AOut),
            ocm(SpellerKind::Baseline, PhrasebookTag::AOut),
        ];
        check(v[0] > v[1] && v[1] > v[2] && v[2] > v[3], || format!("{name}: {v:?}"))?;
        lines.push(format!("{name} {:.2}>{:.2}>{:.2}>{:.2}", v[0], v[1], v[2], v[3]));
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(lines.join(", "))
}

fn worked_examples() -> Outcome {
    let config = EngineConfig::default();
    let mut kb = KnowledgeBase::new();
    kb.add_word(&Word::new("xylophone").unwrap(), 1);
    kb.add_word(&Word::new("xylem").unwrap(), 1);
    kb.add_word(&Word::new("xylograph").unwrap(), 1);
    let mut session = SpellSession::new(&kb, &config);
    for c in ['x', 'o', 'p'] {
        let applied = session.apply_frozen(&kb, &config, &Symbol::Character(c)).map_err(|e| e.to_string())?;
        if c == 'p' {
            check(applied.delta.spelled() == Some("phone"), || format!("xylo + p spelled {:?}", applied.delta))?;
        }
    }
    check(session.spelled() == "xylophone", || format!("spelled {:?}", session.spelled()))?;

    let mut kb = KnowledgeBase::new();
    kb.add_sentence_n(&Sentence::new("the_word_that_matters.").unwrap(), 2).unwrap();
    kb.add_word(&Word::new("the").unwrap(), 50);
    kb.add_word(&Word::new("those").unwrap(), 10);
    let m = build_matrix(&kb, "the_word_th", &config);
    let preds: Vec<(usize, String, String)> = m.predictions().map(|(i, w, s)| (i, w.to_string(), s.to_string())).collect();
    check(preds.first().map(|p| (p.0, p.1.as_str(), p.2.as_str())) == Some((0, "that", "at_")), || format!("{preds:?}"))?;
    check(preds.get(1).map(|p| p.1.as_str()) == Some("the"), || format!("{preds:?}"))?;
    let mut session = SpellSession::new(&kb, &config);
    for sym in [
        Symbol::Character('t'),
        Symbol::Character('e'),
        Symbol::Mandatory(Mandatory::Space),
        Symbol::Character('w'),
        Symbol::Mandatory(Mandatory::Space),
        Symbol::Character('t'),
    ] {
        session.apply_frozen(&kb, &config, &sym).map_err(|e| format!("{e} at {:?}", session.spelled()))?;
    }
    check(session.spelled() == "the_word_th", || format!("spelled {:?}", session.spelled()))?;
    let zero = session.matrix().get(0, 0).cloned().ok_or("empty first cell")?;
    let applied = session.apply_frozen(&kb, &config, &zero).map_err(|e| e.to_string())?;
    check(applied.delta.spelled() == Some("at_"), || format!("prediction 0 spelled {:?}", applied.delta))?;
    check(session.ssp() == "the_word_that_", || format!("ssp {:?}", session.ssp()))?;
    Ok("xylo+p -> phone; the_word_th offers 0'=that spelling at_".into())
}

fn random_kb(rng: &mut ChaCha8Rng) -> KnowledgeBase {
    const LETTERS: &[u8] = b"abcde'";
    let vocab: Vec<String> = (0..rng.gen_range(1..14))
        .map(|_| {
            let len = rng.gen_range(1..6);
            let mut w: String = (0..len).map(|_| LETTERS[rng.gen_range(0..5)] as char).collect();
            if rng.gen_bool(0.05) {
                w.push('\'');
            }
            w
        })
        .collect();
    let mut kb = KnowledgeBase::new();
    for _ in 0..rng.gen_range(0..8) {
        let k = rng.gen_range(1..5);
        let words: Vec<&str> = (0..k).map(|_| vocab.choose(rng).unwrap().as_str()).collect();
        let term = if rng.gen_bool(0.7) { '.' } else { '?' };
        kb.add_sentence_n(&Sentence::new(format!("{}{term}", words.join("_"))).unwrap(), rng.gen_range(1..5))
            .unwrap();
    }
    for _ in 0..rng.gen_range(0..4) {
        kb.add_word(&Word::new(vocab.choose(rng).unwrap().clone()).unwrap(), rng.gen_range(1..4));
    }
    kb
}

fn shape_fuzz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut selections = 0usize;
    let mut undos = 0usize;
    for session_no in 0..10_000 {
        let mut kb = random_kb(&mut rng);
        let config = EngineConfig {
            p_sharp: rng.gen_range(0..7),
            predictions: rng.gen_bool(0.7),
            ..EngineConfig::default()
        };
        let mut session = SpellSession::new(&kb, &config);
        let mut history: Vec<String> = Vec::new();
        for _ in 0..rng.gen_range(1..25) {
            let m = session.matrix();
            check(m.rows() == m.cols() || m.rows() + 1 == m.cols(), || format!("session {session_no}: {}x{}", m.rows(), m.cols()))?;
            let available = if config.predictions { kb.words().prefix_words(session.swp()) as usize } else { 0 };
            check(available <= config.p_sharp || m.n_pred() > config.p_sharp, || {
                format!("session {session_no}: {} predictions with {available} candidates, P# {}", m.n_pred(), config.p_sharp)
            })?;
            check(m.n_pred() <= available, || format!("session {session_no}: more predictions than candidates"))?;
            let expected = matrix_total(m.n_char() + m.n_mand(), config.p_sharp, available);
            check(expected == m.dims(), || format!("session {session_no}: dims {:?} vs {expected:?}", m.dims()))?;

            let symbol = if rng.gen_bool(0.2) {
                Symbol::Mandatory(Mandatory::Undo)
            } else {
                m.symbols().collect::<Vec<_>>().choose(&mut rng).map(|s| (*s).clone()).unwrap()
            };
            let before = session.spelled().to_string();
            session.apply_selection(&mut kb, &config, &symbol).map_err(|e| format!("session {session_no}: {e}"))?;
            selections += 1;
            if symbol == Symbol::Mandatory(Mandatory::Undo) {
                undos += 1;
                let restored = history.pop().unwrap_or(before);
                check(session.spelled() == restored, || {
                    format!("session {session_no}: undo gave {:?}, expected {restored:?}", session.spelled())
                })?;
            } else {
                history.push(before);
            }
        }
    }
    Ok(format!("10000 sessions, {selections} selections, {undos} undos"))
}

fn persistence_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0b);
    let mut queries = 0usize;
    for i in 0..100 {
        let kb = random_kb(&mut rng);
        let mut buf = Vec::new();
        kb.save(&mut buf).map_err(|e| e.to_string())?;
        let back = KnowledgeBase::load(buf.as_slice()).map_err(|e| format!("kb {i}: {e}"))?;
        let mut again = Vec::new();
        back.save(&mut again).map_err(|e| e.to_string())?;
        check(buf == again, || format!("kb {i}: re-save differs"))?;

        let mut prefixes: BTreeSet<String> = BTreeSet::new();
        for (w, _) in kb.words().iter() {
            for k in 0..=w.len() {
                prefixes.insert(w[..k].to_string());
            }
        }
        for p in &prefixes {
            let (a, b) = (kb.swp_distribution(p), back.swp_distribution(p));
            let bits = |d: &[(Word, f64)]| d.iter().map(|(w, x)| (w.to_string(), x.to_bits())).collect::<Vec<_>>();
            check(bits(&a) == bits(&b), || format!("kb {i}: swp distribution at {p:?}"))?;
            check(kb.char_candidates(p) == back.char_candidates(p), || format!("kb {i}: candidates at {p:?}"))?;
            for c in kb.char_candidates(p) {
                check(kb.label_extension(p, c).ok() == back.label_extension(p, c).ok(), || format!("kb {i}: label at {p:?}+{c}"))?;
            }
            check(kb.words().count(p) == back.words().count(p), || format!("kb {i}: count {p:?}"))?;
            queries += 1;
        }
        let mut ssps: BTreeSet<String> = BTreeSet::new();
        for (s, _) in kb.sentences().with_prefix("") {
            for (k, _) in s.char_indices() {
                ssps.insert(s[..k].to_string());
            }
        }
        for p in &ssps {
            let bits = |d: Vec<(Word, f64)>| d.into_iter().map(|(w, x)| (w.to_string(), x.to_bits())).collect::<Vec<_>>();
            check(bits(kb.ssp_distribution(p)) == bits(back.ssp_distribution(p)), || format!("kb {i}: ssp distribution at {p:?}"))?;
            queries += 1;
        }
        check(kb.stats() == back.stats(), || format!("kb {i}: stats"))?;
    }
    Ok(format!("100 knowledge bases, {queries} queries identical"))
}

fn invivo_arithmetic() -> Outcome {
    let a = ac(272, 311).map_err(|e| e.to_string())?;
    let e = ec(41, 230).map_err(|e| e.to_string())?;
    check((a - 0.874598).abs() < 1e-6, || format!("ac = {a}"))?;
    check((e - 0.178261).abs() < 1e-6, || format!("ec = {e}"))?;
    Ok(format!("ac = {a:.6}, ec = {e:.6}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("baseline ISR", baseline_isr),
        ("baseline timing", baseline_timing),
        ("absolute-rate bound", absolute_rate_bound),
        ("redundancy ordering", redundancy_ordering),
        ("entropy oracle equivalence", entropy_oracle),
        ("OCM ordering", ocm_ordering),
        ("worked examples", worked_examples),
        ("shape invariant fuzz", shape_fuzz),
        ("KB persistence", persistence_round_trip),
        ("in-vivo metric arithmetic", invivo_arithmetic),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {name:<28} {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<28} {why} [{elapsed:.2?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
