#![no_main]

use libfuzzer_sys::fuzz_target;
use logdecay::config::SeriesTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(table) = SeriesTable::parse(text) else { return };
    for row in &table.rows {
        assert_eq!(row.len(), table.headers.len());
    }
    if table.rows.iter().flatten().all(|v| v.is_finite()) {
        if let Ok(rendered) = table.render() {
            let back = SeriesTable::parse(&rendered).expect("rendered table parses");
            assert_eq!(back.rows, table.rows);
        }
    }
});
