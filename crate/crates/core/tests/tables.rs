use hubbell::tables::{
    emit_report, run_table, table_skeleton, ReportFormat, TableId, CSV_COLUMNS, METHOD_ORACLE,
    METHOD_SUM,
};
use hubbell::{QuadratureControl, SeriesControl};

fn run(id: TableId) -> Vec<hubbell::TableRow> {
    run_table(id, &SeriesControl::default(), &QuadratureControl::default())
}

#[test]
fn table1_csv_shape() {
    let csv = emit_report(&run(TableId::T1), ReportFormat::Csv).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        CSV_COLUMNS
    );
    let records: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 18);
    let methods: Vec<&str> = records.iter().take(3).map(|r| r.get(8).unwrap()).collect();
    assert_eq!(methods, ["closed", "sum", "oracle"]);
    for r in &records {
        assert_eq!(r.get(0), Some("T1"));
        // 17 significant digits
        let value = r.get(9).unwrap();
        let digits = value.trim_start_matches(['0', '.']).replace('.', "");
        assert_eq!(digits.len(), 17, "{value}");
    }
}

#[test]
fn reports_are_byte_stable() {
    for format in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Text] {
        let first = emit_report(&run(TableId::T3), format).unwrap();
        let second = emit_report(&run(TableId::T3), format).unwrap();
        assert_eq!(first, second);
    }
}

#[test]
fn json_mirrors_rows() {
    let rows = run(TableId::T2);
    let doc: serde_json::Value =
        serde_json::from_str(&emit_report(&rows, ReportFormat::Json).unwrap()).unwrap();
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), 6);
    let first = &json_rows[0];
    assert_eq!(first["table_id"], "T2");
    assert_eq!(first["inputs"]["p"], 0.5);
    assert_eq!(first["published"][1]["source"], "guseinov-mamedov-2005");
    assert_eq!(first["published"][1]["digits"], "0.000219698305352979");
    assert_eq!(
        first["computed"][0]["result"]["value"],
        rows[0].computed[0].result.unwrap().value
    );
    assert!(first["agreement"]
        .as_array()
        .unwrap()
        .iter()
        .any(|a| a["digits"].is_u64()));
}

#[test]
fn row_errors_do_not_abort_the_table() {
    let broken = QuadratureControl {
        abs_tol: -1.0,
        ..QuadratureControl::default()
    };
    let rows = run_table(TableId::T2, &SeriesControl::default(), &broken);
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let oracle = row
            .computed
            .iter()
            .find(|c| c.method == METHOD_ORACLE)
            .unwrap();
        assert!(oracle.result.is_none() && oracle.error.is_some());
        assert!(row.computed_value(METHOD_SUM).is_some());
    }
    let csv = emit_report(&rows, ReportFormat::Csv).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12);
    assert!(emit_report(&rows, ReportFormat::Text)
        .unwrap()
        .contains("error:"));
}

#[test]
fn table3_flags() {
    let rows = run(TableId::T3);
    let failing: Vec<usize> = rows.iter().filter(|r| !r.passes()).map(|r| r.row).collect();
    assert_eq!(failing, [7]);
    assert!(rows[6]
        .notes
        .iter()
        .any(|n| n.contains("quadrature oracle")));
    assert!(rows[9].is_oracle_adjudicated());
    assert_eq!(rows[9].notes.len(), 2);
    for row in &rows[..6] {
        assert!(row.notes.is_empty(), "row {}: {:?}", row.row, row.notes);
    }
}

#[test]
fn skeleton_matches_fixture() {
    let total: usize = TableId::ALL
        .iter()
        .map(|&id| table_skeleton(id).len())
        .sum();
    assert_eq!(total, 22);
}
