use proptest::prelude::*;
use saferoute_core::bn::{Dataset, Record, Schema};
use saferoute_core::ingest::{
    parse_dataset, train_test_split, write_dataset, CellFormat, ImputationMode, ImputationPolicy,
    RawTable,
};

fn case_study_rows() -> impl Strategy<Value = Vec<Vec<usize>>> {
    let cards = Schema::case_study().cardinalities();
    let row = cards.into_iter().map(|c| 0..c).collect::<Vec<_>>();
    proptest::collection::vec(row, 1..40)
}

fn policy(mode: ImputationMode) -> ImputationPolicy {
    ImputationPolicy { mode, seed: 9 }
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(rows in case_study_rows(), labels in any::<bool>()) {
        let schema = Schema::case_study();
        let d = Dataset::new(schema.clone(), rows.into_iter().map(Record).collect()).unwrap();
        let mut out = Vec::new();
        let format = if labels { CellFormat::Label } else { CellFormat::Index };
        write_dataset(&d, &mut out, format).unwrap();
        let table = RawTable::from_csv(out.as_slice()).unwrap();
        let (again, report) = parse_dataset(&table, &schema, policy(ImputationMode::Reject)).unwrap();
        prop_assert_eq!(again, d);
        prop_assert_eq!(report.imputed_cells(), 0);
    }

    #[test]
    fn imputation_only_touches_missing_cells(
        rows in case_study_rows(),
        holes in proptest::collection::vec(any::<bool>(), 13 * 40),
        sample in any::<bool>(),
    ) {
        let schema = Schema::case_study();
        let mut text = schema.variables().iter().map(|v| v.name()).collect::<Vec<_>>().join(",");
        text.push('\n');
        let mut missing = 0;
        // keep the first row whole so every column has an observed value
        for (r, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    if r > 0 && holes[(r * 13 + c) % holes.len()] {
                        missing += 1;
                        String::new()
                    } else {
                        v.to_string()
                    }
                })
                .collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let mode = if sample { ImputationMode::MarginalSample } else { ImputationMode::ColumnMode };
        let table = RawTable::from_csv(text.as_bytes()).unwrap();
        let (d, report) = parse_dataset(&table, &schema, policy(mode)).unwrap();
        prop_assert_eq!(report.missing_cells, missing);
        prop_assert_eq!(report.imputed_cells(), missing);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if r == 0 || !holes[(r * 13 + c) % holes.len()] {
                    prop_assert_eq!(d.records()[r].0[c], v);
                }
            }
        }
    }

    #[test]
    fn split_is_a_partition(rows in case_study_rows(), fraction in 0.05f64..0.95, seed in any::<u64>()) {
        let d = Dataset::new(Schema::case_study(), rows.into_iter().map(Record).collect()).unwrap();
        let (train, test) = train_test_split(&d, fraction, seed).unwrap();
        prop_assert_eq!(train.len(), (fraction * d.len() as f64).round() as usize);
        let mut joined: Vec<Record> = train.records().iter().chain(test.records()).cloned().collect();
        let mut original = d.records().to_vec();
        joined.sort();
        original.sort();
        prop_assert_eq!(joined, original);
    }
}
