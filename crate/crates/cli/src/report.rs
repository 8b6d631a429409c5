//! The `report` stage: renders the results bundle as aligned text tables.

use std::path::Path;

use portsel_core::{Error, Result};

use crate::evaluate::{results_dir, BUNDLE_CSVS};
use crate::table::Table;

pub fn cmd_report(root: &Path) -> Result<String> {
    let dir = results_dir(root);
    if !dir.join(BUNDLE_CSVS[0]).is_file() {
        return Err(Error::Data(format!(
            "no results bundle in {}; run `evaluate` first",
            dir.display()
        )));
    }
    let mut out = String::new();
    for name in BUNDLE_CSVS {
        let table = Table::read(&dir.join(name)).map_err(|e| match e {
            Error::NotFound(p) => {
                Error::Data(format!("results bundle is incomplete: {p} is missing"))
            }
            other => other,
        })?;
        out.push_str(&format!("== {name} ==\n"));
        out.push_str(&table.render());
        out.push('\n');
    }
    Ok(out)
}
