//! Level fan-out: run one job per level on a bounded pool and tabulate
//! metric against level.

use std::collections::{BTreeMap, BTreeSet};
use std::thread;

use perigrid::Result;

use crate::jobs::{run_job, Job};

/// Run the job at each level, at most `threads` at a time. Results come
/// back in level order whatever the completion order, so output does not
/// depend on the thread cap.
pub fn run_levels(
    base: &Job,
    levels: &[u32],
    threads: usize,
) -> Result<Vec<(u32, BTreeMap<String, f64>)>> {
    let mut rows = Vec::with_capacity(levels.len());
    for wave in levels.chunks(threads.max(1)) {
        let results: Vec<Result<BTreeMap<String, f64>>> = thread::scope(|scope| {
            let handles: Vec<_> = wave
                .iter()
                .map(|&level| {
                    let job = Job { level, ..base.clone() };
                    scope.spawn(move || run_job(&job).map(|o| o.metrics))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("level job panicked")).collect()
        });
        for (&level, result) in wave.iter().zip(results) {
            rows.push((level, result?));
        }
    }
    Ok(rows)
}

/// One row per level; columns are the union of metric keys, alphabetical.
pub fn to_csv(rows: &[(u32, BTreeMap<String, f64>)]) -> String {
    let keys: BTreeSet<&str> =
        rows.iter().flat_map(|(_, m)| m.keys().map(String::as_str)).collect();
    let mut out = String::from("level");
    for k in &keys {
        out.push(',');
        out.push_str(k);
    }
    out.push('\n');
    for (level, metrics) in rows {
        out.push_str(&level.to_string());
        for k in &keys {
            out.push(',');
            if let Some(v) = metrics.get(*k) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jobs::Action;
    use perigrid::gallery::GalleryKind;

    fn coarea_job() -> Job {
        Job {
            action: Action::Coarea,
            kind: GalleryKind::Square,
            level: 4,
            set: None,
            function: "ramp".into(),
            format: "auto".into(),
        }
    }

    #[test]
    fn rows_come_back_in_level_order_for_any_thread_cap() {
        let levels = [4, 5, 6];
        let one = run_levels(&coarea_job(), &levels, 1).unwrap();
        let many = run_levels(&coarea_job(), &levels, 8).unwrap();
        assert_eq!(one.len(), 3);
        for (a, b) in one.iter().zip(&many) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1, b.1);
        }
        assert_eq!(to_csv(&one), to_csv(&many));
    }

    #[test]
    fn csv_has_a_level_column_and_one_row_per_level() {
        let rows = run_levels(&coarea_job(), &[4, 5], 2).unwrap();
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("level,"));
        assert!(lines[0].contains("rel_err"));
        assert!(lines[1].starts_with("4,"));
        assert!(lines[2].starts_with("5,"));
    }

    #[test]
    fn a_failing_level_surfaces_as_an_error() {
        let mut job = coarea_job();
        job.kind = GalleryKind::Comb42;
        // The comb cannot be built below its coarsest tooth scale.
        assert!(run_levels(&job, &[3], 2).is_err());
    }
}
