#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::Path;

use laconic::lang::{Formula, Var};
use laconic::model::{Instance, Relation, Schema, Value};
use laconic::sqlgen::{self, quote_ident, target_view, SqlArtifact};
use rusqlite::Connection;

/// An in-memory database holding the source tables of `schema`, loaded
/// from the CSV files in `dir`.
pub fn load_csv(schema: &Schema, dir: &Path) -> Connection {
    let conn = Connection::open_in_memory().unwrap();
    conn.execute_batch(&sqlgen::schema_ddl(schema)).unwrap();
    conn.execute_batch(&sqlgen::adom_view(schema)).unwrap();
    for (rel, arity) in schema.relations() {
        let path = dir.join(format!("{}.csv", rel.as_str()));
        if !path.exists() {
            continue;
        }
        let marks: Vec<String> = (1..=arity).map(|i| format!("?{i}")).collect();
        let sql = format!("INSERT INTO {} VALUES ({})", quote_ident(rel.as_str()), marks.join(", "));
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(&path).unwrap();
        for rec in rdr.records() {
            let rec = rec.unwrap();
            let vals: Vec<&str> = rec.iter().collect();
            conn.execute(&sql, rusqlite::params_from_iter(vals)).unwrap();
        }
    }
    conn
}

/// Writes `inst` as CSV into a fresh directory and loads it.
pub fn database(inst: &Instance) -> (Connection, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    sqlgen::write_csv_dir(dir.path(), inst).unwrap();
    (load_csv(inst.schema(), dir.path()), dir)
}

/// Runs the artifact's target views and decodes the result.
pub fn run_artifact(art: &SqlArtifact, target: &Schema, inst: &Instance) -> Instance {
    let (conn, _dir) = database(inst);
    let script = art.to_script(false).replace(&sqlgen::adom_view(inst.schema()), "");
    conn.execute_batch(&script).unwrap();
    let mut rows: Vec<(Relation, Vec<String>)> = Vec::new();
    for (rel, arity) in target.relations() {
        let mut stmt = conn.prepare(&format!("SELECT * FROM {}", quote_ident(&target_view(rel)))).unwrap();
        let mut q = stmt.query([]).unwrap();
        while let Some(row) = q.next().unwrap() {
            rows.push((rel.clone(), (0..arity).map(|i| row.get::<_, String>(i).unwrap()).collect()));
        }
    }
    sqlgen::decode_rows(target, rows).unwrap()
}

/// Answers of `f` computed by SQLite.
pub fn sql_answers(conn: &Connection, f: &Formula, free: &[Var], schema: &Schema) -> BTreeSet<Vec<Value>> {
    let sql = sqlgen::formula_to_sql(f, free, schema).unwrap();
    let mut stmt = conn.prepare(&sql).unwrap_or_else(|e| panic!("{e}\n{sql}"));
    let mut q = stmt.query([]).unwrap();
    let mut out = BTreeSet::new();
    while let Some(row) = q.next().unwrap() {
        let t: Vec<Value> =
            (0..free.len()).map(|i| sqlgen::decode_value(&row.get::<_, String>(i).unwrap()).unwrap()).collect();
        out.insert(t);
    }
    out
}
