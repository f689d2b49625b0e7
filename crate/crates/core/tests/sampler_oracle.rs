mod common;

use common::compare_with_simulator;
use textprep::RemovalMode;

fn grid(size: usize, mode: RemovalMode) -> Vec<bool> {
    let mut exhausted = Vec::new();
    for variant in 0..8 {
        for r in [0.0, 0.5, 1.0] {
            for seed in 0..6 {
                exhausted.push(compare_with_simulator(size, variant, r, seed, mode).unwrap());
            }
        }
    }
    exhausted
}

#[test]
fn twelve_sentence_pools_selected_only() {
    assert!(grid(12, RemovalMode::SelectedOnly).iter().all(|&e| !e));
}

#[test]
fn twelve_sentence_pools_full_draw_are_infeasible() {
    // 8 drawn, 1 kept, then 4 drawn, 1 kept: two selections at most.
    assert!(grid(12, RemovalMode::FullDraw).iter().all(|&e| e));
}

#[test]
fn larger_pools_full_draw() {
    assert!(grid(24, RemovalMode::FullDraw).iter().all(|&e| !e));
}
