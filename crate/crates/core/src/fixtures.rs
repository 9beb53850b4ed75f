//! Small reference tables with hand-checkable information values.
//!
//! Each table is N = 10 rows; rows appear in the same order as they are
//! usually printed, so row `r` here is row `r + 1` in one-based listings.

use crate::table::DiscreteTable;

const BINARY: [&str; 10] = ["0", "1", "0", "1", "0", "0", "1", "0", "0", "1"];
const COLOR: [&str; 10] = ["R", "G", "R", "G", "G", "R", "B", "B", "R", "G"];

/// A binary attribute and a three-colour attribute.
pub fn pair_example() -> DiscreteTable {
    DiscreteTable::from_symbols(&[("A1", BINARY.to_vec()), ("A2", COLOR.to_vec())])
        .expect("static table")
}

/// The pair example extended with a row identifier and a flag that tracks A1.
pub fn quad_example() -> DiscreteTable {
    let id: Vec<String> = (1..=10).map(|i| i.to_string()).collect();
    let id: Vec<&str> = id.iter().map(String::as_str).collect();
    DiscreteTable::from_symbols(&[
        ("A1", BINARY.to_vec()),
        ("A2", COLOR.to_vec()),
        ("A3", id),
        ("A4", vec!["1", "0", "1", "0", "1", "0", "0", "0", "1", "0"]),
    ])
    .expect("static table")
}

/// Seven attributes used to walk through the agglomerative search; A7 = A6².
pub const GROUPING_EXAMPLE_CSV: &str = "\
A1,A2,A3,A4,A5,A6,A7
0,R,1,1,a,3,9
1,G,2,0,a,3,9
0,R,3,1,a,5,25
1,G,4,0,a,5,25
0,G,5,1,a,7,49
0,R,6,0,b,8,64
1,B,7,1,b,10,100
0,B,8,0,b,10,100
0,R,9,0,b,11,121
1,G,10,0,a,11,121
";

pub fn grouping_example() -> DiscreteTable {
    let mut lines = GROUPING_EXAMPLE_CSV.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let columns: Vec<(&str, Vec<&str>)> = header
        .iter()
        .enumerate()
        .map(|(j, &name)| (name, rows.iter().map(|r| r[j]).collect()))
        .collect();
    DiscreteTable::from_symbols(&columns).expect("static table")
}

/// The pair example rendered as CSV (binary column parses as numeric).
pub const PAIR_EXAMPLE_CSV: &str = "\
A1,A2
0,R
1,G
0,R
1,G
0,G
0,R
1,B
0,B
0,R
1,G
";
