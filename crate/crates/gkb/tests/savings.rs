use gkb::savings::{format_percent, savings_percent, SavingsRow, SavingsTable};
use proptest::prelude::*;

fn row(policy: &str, cum: usize, converged: bool) -> SavingsRow {
    SavingsRow {
        policy: policy.into(),
        cum_inner: Some(cum),
        converged,
        final_lower_bound: Some(1e-8),
    }
}

#[test]
fn published_totals() {
    assert_eq!(format_percent(savings_percent(4873, 6963)), "30.02");
    assert_eq!(format_percent(savings_percent(1046, 2052)), "49.03");
    assert_eq!(format_percent(savings_percent(777, 777)), "0.00");
}

#[test]
fn table_marks_failures() {
    let table = SavingsTable::new(vec![
        row("constant", 6963, true),
        row("hybrid", 4873, true),
        row("bouras", 20000, false),
        SavingsRow {
            policy: "simoncini".into(),
            cum_inner: None,
            converged: false,
            final_lower_bound: None,
        },
    ]);
    let csv = table.to_csv();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "policy,cum_inner,savings_percent,converged,final_lower_bound");
    assert_eq!(lines[1], "constant,6963,0.00,true,1e-8");
    assert_eq!(lines[2], "hybrid,4873,30.02,true,1e-8");
    assert_eq!(lines[3], "bouras,20000,-,false,1e-8");
    assert_eq!(lines[4], "simoncini,-,-,false,-");
}

#[test]
fn no_baseline_means_no_savings() {
    let table = SavingsTable::new(vec![row("hybrid", 10, true)]);
    assert!(table.to_csv().contains("hybrid,10,-,true"));
}

proptest! {
    // every percentage recomputes from the cum_inner column
    #[test]
    fn percentages_recompute(base in 1usize..100_000, others in proptest::collection::vec(0usize..200_000, 1..6)) {
        let mut rows = vec![row("constant", base, true)];
        rows.extend(others.iter().enumerate().map(|(i, c)| row(&format!("p{i}"), *c, true)));
        let csv = SavingsTable::new(rows).to_csv();
        for line in csv.lines().skip(1) {
            let f: Vec<_> = line.split(',').collect();
            let cum: f64 = f[1].parse().unwrap();
            let pct: f64 = f[2].parse().unwrap();
            let expected = 100.0 * (base as f64 - cum) / base as f64;
            prop_assert!((pct - expected).abs() <= 0.005 + 1e-9, "{line}");
        }
    }
}
