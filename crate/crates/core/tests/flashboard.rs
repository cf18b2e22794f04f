use p300_core::flashboard::{
    layout_diagonal, layout_sequential, map_virtual, place_suggestions, CellContent, Flashboard,
    Position, ScanPolicy, CELL_COUNT, GROUP_COUNT, GRID,
};
use p300_core::lm::{CharDist, ALPHABET_SIZE};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dist() -> impl Strategy<Value = CharDist> {
    proptest::array::uniform27(1e-6f64..1.0).prop_map(|d| {
        let s: f64 = d.iter().sum();
        d.map(|p| p / s)
    })
}

fn top_six(d: &CharDist) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ALPHABET_SIZE).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
    order.truncate(6);
    order
}

proptest! {
    #[test]
    fn diagonal_separates_the_top_six(d in dist()) {
        let board = layout_diagonal(&d).unwrap();
        let top: u64 = top_six(&d).iter().fold(0, |m, &i| m | 1 << i);
        for g in board.groups() {
            prop_assert!((g.mask & top).count_ones() <= 1, "group {} holds {:b}", g.id, g.mask & top);
        }
    }

    #[test]
    fn sequential_fills_rows_by_rank(d in dist()) {
        let board = layout_sequential(&d).unwrap();
        let probs: Vec<f64> = (0..ALPHABET_SIZE)
            .map(|i| d[board.content_at(Position::from_index(i)).symbol().unwrap().index()])
            .collect();
        prop_assert!(probs.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn virtual_mapping_is_a_bijection(d in dist(), words in proptest::sample::subsequence(vec!["one", "two", "three", "four", "five", "six"], 0..=6)) {
        let words: Vec<String> = words.into_iter().map(String::from).collect();
        let physical = place_suggestions(&Flashboard::alphabetical(), &words).unwrap();
        let virt = layout_diagonal(&d).unwrap();
        let map = map_virtual(&virt, &physical).unwrap();
        let mut seen = [false; CELL_COUNT];
        for (v, p) in map.to_physical.iter().enumerate() {
            prop_assert!(!seen[p.index()]);
            seen[p.index()] = true;
            prop_assert_eq!(physical.content_at(*p), virt.content_at(Position::from_index(v)));
        }
        for (vg, pg) in virt.groups().iter().zip(&map.groups) {
            prop_assert_eq!(vg.mask, pg.mask);
        }
    }

    #[test]
    fn every_round_flashes_each_group_once(seed in any::<u64>(), policy in prop_oneof![Just(ScanPolicy::Random), Just(ScanPolicy::Deterministic), Just(ScanPolicy::Weighted)]) {
        let board = Flashboard::alphabetical();
        let groups = board.groups();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let post: [f64; CELL_COUNT] = std::array::from_fn(|i| ((i * 7919 + seed as usize) % 101) as f64);
        let mut order = policy.schedule_round(&groups, &post, &mut rng).to_vec();
        order.sort_unstable();
        prop_assert_eq!(order, (0..GROUP_COUNT as u8).collect::<Vec<_>>());
    }
}

#[test]
fn weighted_policy_leads_with_the_heaviest_group() {
    let board = Flashboard::alphabetical();
    let groups = board.groups();
    let mut post = [0.0; CELL_COUNT];
    post[CellContent::Backspace.index()] = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let order = ScanPolicy::Weighted.schedule_round(&groups, &post, &mut rng);
    // Backspace sits in the last row and last column; ties go to the lower id.
    assert_eq!(&order[..2], &[(GRID - 1) as u8, (2 * GRID - 1) as u8]);
    assert_eq!(&order[2..], &[0, 1, 2, 3, 4, 6, 7, 8, 9, 10]);
}
