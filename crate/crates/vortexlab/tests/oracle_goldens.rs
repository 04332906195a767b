//! Generation and self-consistency checks for the finite-difference golden
//! values in `common::golden`.

mod common;

use common::{golden, FdOracle};

/// Full-size golden-value generator. Run explicitly with
/// `cargo test --test oracle_goldens -- --ignored --nocapture`
/// and paste the printed values into `common::golden`.
#[test]
#[ignore]
fn regenerate_fd_golden_values() {
    let oracle = FdOracle::new(512);
    let (c2, _) = oracle.nehari_ground_energy(2.0, 3000);
    println!("C2_FD512 = {c2:.15}");
    let (u, res) = oracle.sublinear_solution(0.5, 2000, 1e-13);
    println!(
        "SUBLINEAR_U_CENTER_FD512 = {:.15}  (fixed-point residual {res:.3e})",
        oracle.center_value(&u)
    );
}

/// The oracles converge as O(h²); a modest grid must land within the
/// combined discretization budget of the frozen n = 512 values.
#[test]
fn oracle_coarse_grid_agrees_with_frozen_goldens() {
    let oracle = FdOracle::new(127);
    let (c2, u) = oracle.nehari_ground_energy(2.0, 800);
    let rel = (c2 - golden::C2_FD512).abs() / golden::C2_FD512;
    assert!(rel < 5e-3, "c2(n=127) = {c2}, rel dev {rel:.2e}");
    assert!(u.iter().all(|&v| v > 0.0), "ground state must stay positive");

    let (u, res) = oracle.sublinear_solution(0.5, 800, 1e-12);
    assert!(res <= 1e-12);
    let center = oracle.center_value(&u);
    let rel = (center - golden::SUBLINEAR_U_CENTER_FD512).abs() / golden::SUBLINEAR_U_CENTER_FD512;
    assert!(rel < 5e-3, "u_center(n=127) = {center}, rel dev {rel:.2e}");
}

/// Richardson check of the O(h²) convergence order: halving h must shrink
/// the distance to the fine-grid value by roughly 4.
#[test]
fn oracle_converges_at_second_order() {
    let coarse = FdOracle::new(63);
    let fine = FdOracle::new(127);
    let reference = golden::C2_FD512;
    let (c_coarse, _) = coarse.nehari_ground_energy(2.0, 800);
    let (c_fine, _) = fine.nehari_ground_energy(2.0, 800);
    let ratio = (c_coarse - reference).abs() / (c_fine - reference).abs();
    assert!(
        (2.5..8.0).contains(&ratio),
        "expected ~4x error reduction, got {ratio:.2} ({c_coarse} vs {c_fine})"
    );
}
