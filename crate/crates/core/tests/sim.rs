mod common;

use std::path::Path;

use p300_core::signal::{build_pools, SamplerState, ScoredFlash};
use p300_core::sim::{
    load_subjects, run_batch, simulate_passage, write_results, CvMode, Scheme, SimConfig,
    RESULTS_HEADER,
};
use p300_core::swlda::write_scored_subject;
use p300_core::synthetic::gaussian_subject;
use proptest::prelude::*;

proptest! {
    #[test]
    fn sampled_scores_come_from_the_matching_pool(
        flashes in proptest::collection::vec((-5.0f64..5.0, any::<bool>()), 2..60),
        asks in proptest::collection::vec(any::<bool>(), 1..40),
        seed in any::<u64>(),
    ) {
        let flashes: Vec<ScoredFlash> = flashes.into_iter().map(|(score, attended)| ScoredFlash { score, attended }).collect();
        let pools = build_pools(&flashes).unwrap();
        let mut s = SamplerState::new(seed);
        for attended in asks {
            let prev = s.prev_attended as usize;
            match s.sample_score(&pools, attended) {
                Ok(y) => {
                    let pool = &pools.pools[prev][attended as usize];
                    let source = if pool.is_empty() { &pools.marginals[attended as usize] } else { pool };
                    prop_assert!(source.contains(&y));
                    prop_assert_eq!(s.prev_attended, attended);
                }
                // The first flash has no predecessor and is never pooled.
                Err(_) => prop_assert!(!flashes[1..].iter().any(|f| f.attended == attended)),
            }
        }
    }
}

#[test]
fn low_snr_with_tight_budget_abandons_but_finishes() {
    let lm = common::lm(20_000);
    let passage = common::passage(120, 3);
    let subject = common::subject("low", 0.3, 9);
    let cfg = SimConfig { abandon_scans: 4, ..SimConfig::default() };
    for scheme in Scheme::ALL {
        let r = simulate_passage(scheme, &cfg, &subject, &lm, &passage, None, 5).unwrap();
        assert!(r.retry_rate <= 1.0);
        assert_eq!(r.chars_out as usize, r.records.iter().map(|x| x.credited_chars as usize).sum::<usize>());
        // Credited text is the output without abandoned units, plus the final space.
        assert!(r.chars_out as usize <= passage.len() + 1);
        assert!(r.final_text.len() <= passage.len());
        assert!(r.records.iter().all(|x| x.scans_used <= cfg.abandon_scans));
        assert_eq!(r.abandoned, r.records.iter().filter(|x| x.abandoned).count());
    }
}

fn write_subjects(dir: &Path, n: usize) {
    for i in 0..n {
        let id = format!("g{i}");
        write_scored_subject(&dir.join(format!("{id}.csv")), &gaussian_subject(&id, 2.0, 20, 8, i as u64)).unwrap();
    }
}

#[test]
fn batch_reports_bad_subjects_and_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    write_subjects(dir.path(), 2);
    std::fs::write(dir.path().join("z_broken.csv"), "subject,z_broken\n1,0,0,3\n").unwrap();
    let subjects = load_subjects(dir.path(), CvMode::Wscv).unwrap();
    assert_eq!(subjects.len(), 3);
    assert!(subjects[2].1.is_err());

    let lm = common::lm(20_000);
    let passage = common::passage(40, 1);
    let cfg = SimConfig { schemes: vec![Scheme::Random, Scheme::WordBound], seed: 3, ..SimConfig::default() };
    let rows = run_batch(&cfg, &lm, &passage, &subjects);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows.iter().filter(|r| r.outcome.is_err()).count(), 2);

    let mut buf = Vec::new();
    write_results(&mut buf, &cfg, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], RESULTS_HEADER);
    assert_eq!(lines.len(), 1 + 6 + 2);
    assert!(lines[5].starts_with("z_broken,random,wscv,failed,"));
    assert!(lines[7].starts_with("summary,random,wscv,"));
    assert!(lines[7].contains('±'));
    // Schemes share the subject seed: subject index 1 gets base ^ 1.
    assert!(lines[3].ends_with(",2"));
}

#[test]
fn nested_cv_directory_is_preferred() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("ascv");
    std::fs::create_dir(&nested).unwrap();
    write_subjects(&nested, 1);
    let subjects = load_subjects(dir.path(), CvMode::Ascv).unwrap();
    assert_eq!(subjects.len(), 1);
    assert!(load_subjects(dir.path(), CvMode::Wscv).is_err());
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(
        &path,
        "# demo\nschemes = random, diagonal\ncv = ascv\npassage = p.txt\nseed = 9\np_thresh = 0.9\nmax_scans = 20\ndiscounts = 0.4, 0.5, 0.6, 0.7\n",
    )
    .unwrap();
    let cfg = SimConfig::from_file(&path).unwrap();
    assert_eq!(cfg.schemes, vec![Scheme::Random, Scheme::Diagonal]);
    assert_eq!(cfg.cv_mode, CvMode::Ascv);
    assert_eq!(cfg.passage_path.as_deref(), Some(dir.path().join("p.txt").as_path()));
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.decoder.p_thresh, 0.9);
    assert_eq!(cfg.decoder.max_scans, 20);
    assert_eq!(cfg.discounts.as_array(), [0.4, 0.5, 0.6, 0.7]);

    for bad in ["scheme = nope", "p_thresh = 0.3", "max_scans = 0", "mystery = 1", "seed"] {
        assert!(SimConfig::parse(bad, dir.path()).and_then(|c| c.validate()).is_err(), "{bad}");
    }
}
