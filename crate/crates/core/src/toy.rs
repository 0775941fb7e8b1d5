//! A small balanced three-country, two-sector economy used in examples and tests.

use nalgebra::DMatrix;

use crate::ingest::IoTable;

#[rustfmt::skip]
const Z: [f64; 36] = [
    10.0,  5.0,  3.0,  2.0,  1.0,  1.0,
     4.0, 12.0,  2.0,  3.0,  1.0,  2.0,
     2.0,  1.0, 15.0,  6.0,  2.0,  1.0,
     3.0,  2.0,  5.0, 10.0,  1.0,  3.0,
     1.0,  2.0,  2.0,  1.0,  8.0,  4.0,
     2.0,  1.0,  1.0,  2.0,  5.0,  9.0,
];

#[rustfmt::skip]
const FD: [f64; 18] = [
    50.0, 10.0,  5.0,
    40.0,  8.0,  6.0,
     6.0, 60.0,  9.0,
     5.0, 45.0,  7.0,
     4.0,  6.0, 55.0,
     3.0,  5.0, 40.0,
];

/// Countries `A`, `B`, `C`; sectors `1`, `2`. All entries are integers, so
/// both accounting identities hold exactly: `T` is the row sum of `Z` and
/// `FD`, and `VA = T - column sums of Z`.
pub fn toy_table() -> IoTable {
    let z = DMatrix::from_row_slice(6, 6, &Z);
    let fd = DMatrix::from_row_slice(6, 3, &FD);
    let t: Vec<f64> = (0..6).map(|i| z.row(i).sum() + fd.row(i).sum()).collect();
    let va: Vec<f64> = (0..6).map(|j| t[j] - z.column(j).sum()).collect();
    IoTable::new(
        2000,
        vec!["A".into(), "B".into(), "C".into()],
        vec!["1".into(), "2".into()],
        z,
        fd,
        va,
        t,
    )
    .expect("toy table dimensions are consistent")
}

/// Two trading blocs of three countries each, two sectors per country:
/// `DEU`, `FRA`, `ITA` and `USA`, `JPN`, `CHN`. Trade inside a bloc is an
/// order of magnitude heavier than across blocs. Integer entries keep the
/// table exactly balanced.
pub fn two_bloc_table() -> IoTable {
    bloc_table(&["B", "F"], 2010)
}

/// [`two_bloc_table`] with any sector list and year.
pub fn bloc_table(sectors: &[&str], year: i32) -> IoTable {
    let countries = ["DEU", "FRA", "ITA", "USA", "JPN", "CHN"];
    let n_s = sectors.len();
    let n = countries.len() * n_s;
    let bloc = |node: usize| node / n_s / 3;
    let z = DMatrix::from_fn(n, n, |i, j| {
        let (ci, cj) = (i / n_s, j / n_s);
        let base = if ci == cj {
            30.0
        } else if bloc(i) == bloc(j) {
            20.0
        } else {
            1.0
        };
        base + ((i * 7 + j * 3) % 5) as f64
    });
    let fd = DMatrix::from_fn(n, countries.len(), |i, c| {
        let ci = i / n_s;
        if ci == c {
            150.0 * n_s as f64
        } else if ci / 3 == c / 3 {
            30.0
        } else {
            2.0
        }
    });
    let t: Vec<f64> = (0..n).map(|i| z.row(i).sum() + fd.row(i).sum()).collect();
    let va: Vec<f64> = (0..n).map(|j| t[j] - z.column(j).sum()).collect();
    IoTable::new(
        year,
        countries.iter().map(|c| c.to_string()).collect(),
        sectors.iter().map(|s| s.to_string()).collect(),
        z,
        fd,
        va,
        t,
    )
    .expect("bloc table dimensions are consistent")
}
