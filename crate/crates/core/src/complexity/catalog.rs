use serde::{Deserialize, Serialize};

use super::SparseInput;
use crate::error::{IceError, Result};

/// A sparse input with the name it is listed under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedMatrix {
    pub name: String,
    pub input: SparseInput,
}

// (name, n, m, nz, nc) from the Florida collection.
const TABLE: [(&str, u64, u64, u64, u64); 9] = [
    ("bone010", 986_703, 986_703, 47_851_783, 63),
    ("kkt_power", 2_063_494, 2_063_494, 12_771_361, 90),
    ("ldoor", 952_203, 952_203, 42_493_817, 77),
    ("parabolic_fem", 525_825, 525_825, 3_674_625, 7),
    ("pds-100", 156_243, 517_577, 1_096_002, 7),
    ("rajat31", 4_690_002, 4_690_002, 20_316_253, 1200),
    ("Rucci1", 1_977_885, 109_900, 7_791_168, 108),
    ("sme3Dc", 42_930, 42_930, 3_148_656, 405),
    ("torso1", 116_158, 116_158, 8_516_500, 1200),
];

/// The nine built-in sparse inputs. None carries a row maximum.
pub fn builtin_matrix_catalog() -> Vec<NamedMatrix> {
    TABLE
        .iter()
        .map(|&(name, n, m, nz, nc)| NamedMatrix {
            name: name.to_string(),
            input: SparseInput {
                rows: n,
                cols: m,
                nonzeros: nz,
                max_nnz_per_row: None,
                max_nnz_per_col: nc,
                block_dim: None,
            },
        })
        .collect()
}

pub fn find_matrix<'a>(matrices: &'a [NamedMatrix], query: &str) -> Result<&'a NamedMatrix> {
    let key = crate::normalize_name(query);
    matrices
        .iter()
        .find(|m| crate::normalize_name(&m.name) == key)
        .ok_or_else(|| IceError::UnknownName {
            kind: "matrix",
            name: query.to_string(),
            candidates: matrices.iter().map(|m| m.name.clone()).collect(),
        })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRecord {
    name: String,
    n: u64,
    m: u64,
    nz: u64,
    nc: u64,
    #[serde(default)]
    nr: Option<u64>,
    #[serde(default)]
    beta: Option<u64>,
}

/// Writes the catalog as CSV with header `name,n,m,nz,nc,nr,beta`; absent
/// optional columns are left empty.
pub fn to_matrix_csv(matrices: &[NamedMatrix]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for m in matrices {
        w.serialize(MatrixRecord {
            name: m.name.clone(),
            n: m.input.rows,
            m: m.input.cols,
            nz: m.input.nonzeros,
            nc: m.input.max_nnz_per_col,
            nr: m.input.max_nnz_per_row,
            beta: m.input.block_dim,
        })
        .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

/// Parses a matrix catalog. `nr` and `beta` columns may be empty or absent.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<NamedMatrix>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in reader.deserialize::<MatrixRecord>().enumerate() {
        let rec = rec.map_err(|e| IceError::Parse(format!("matrix record {}: {e}", i + 1)))?;
        let input = SparseInput {
            rows: rec.n,
            cols: rec.m,
            nonzeros: rec.nz,
            max_nnz_per_row: rec.nr,
            max_nnz_per_col: rec.nc,
            block_dim: rec.beta,
        };
        input.validate().map_err(|e| match e {
            IceError::InvalidArgument { field, reason } => IceError::InvalidArgument {
                field: format!("matrix `{}`.{field}", rec.name),
                reason,
            },
            other => other,
        })?;
        out.push(NamedMatrix {
            name: rec.name,
            input,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_rows() {
        let cat = builtin_matrix_catalog();
        assert_eq!(cat.len(), 9);
        let kkt = find_matrix(&cat, "kkt_power").unwrap().input;
        assert_eq!(
            (kkt.rows, kkt.cols, kkt.nonzeros, kkt.max_nnz_per_col),
            (2_063_494, 2_063_494, 12_771_361, 90)
        );
        let rucci = find_matrix(&cat, "rucci1").unwrap().input;
        assert_eq!(
            (
                rucci.rows,
                rucci.cols,
                rucci.nonzeros,
                rucci.max_nnz_per_col
            ),
            (1_977_885, 109_900, 7_791_168, 108)
        );
        for m in &cat {
            m.input.validate().unwrap();
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut cat = builtin_matrix_catalog();
        cat[0].input.block_dim = Some(1000);
        let text = to_matrix_csv(&cat);
        assert!(text.starts_with("name,n,m,nz,nc,nr,beta\n"));
        assert_eq!(parse_matrix_csv(&text).unwrap(), cat);
    }

    #[test]
    fn csv_errors_name_the_matrix() {
        let text = "name,n,m,nz,nc,nr,beta\ntiny,4,4,3,9,,\n";
        let err = parse_matrix_csv(text).unwrap_err();
        assert!(err.to_string().contains("tiny"), "{err}");
        let err = parse_matrix_csv("name,n,m,nz,nc,nr,beta\nx,4,four,3,1,,\n").unwrap_err();
        assert!(matches!(err, IceError::Parse(_)));
    }

    #[test]
    fn optional_columns_may_be_absent() {
        let parsed =
            parse_matrix_csv("name,n,m,nz,nc\ntorso1,116158,116158,8516500,1200\n").unwrap();
        assert_eq!(
            parsed[0].input,
            find_matrix(&builtin_matrix_catalog(), "torso1")
                .unwrap()
                .input
        );
    }
}
