use pagrow::analytics::{all_pass, concentration_check, Tolerances};

#[test]
fn degree_counts_concentrate_across_runs() {
    let tol = Tolerances::embedded();
    let d_values: Vec<u64> = (2..=10).collect();
    let reports = concentration_check(
        2,
        100_000,
        &d_values,
        tol.concentration.runs as u64,
        7,
        1,
        &tol,
    )
    .unwrap();
    assert_eq!(reports.len(), d_values.len());
    for r in &reports {
        println!("{} sd={:.2} limit={:.2}", r.name, r.empirical, r.tolerance);
    }
    assert!(all_pass(&reports));
}
