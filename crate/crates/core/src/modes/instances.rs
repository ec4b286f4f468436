//! Instances built from associative algebras: the weight-zero class, and the
//! tensor of a weight-zero algebra with an arbitrary instance.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::scalars::{parse_rational, rational_string, rint, Rational};

use super::{
    qv_add_scaled, qv_basis, ConformalData, GradedSpace, ModeBackend, ModeTable, ModesError,
    OsvaInstance, QVec, TensorData,
};

/// Multiplication table: `table[i][j]` is the product `e_i e_j` expanded in
/// the basis.
pub type MultTable = Vec<Vec<QVec>>;

/// The matrix-unit table of `n x n` matrices: basis index `a * n + b` stands
/// for `E_{ab}`, and `E_{ab} E_{cd} = delta_{bc} E_{ad}`.
pub fn matrix_units_table(n: usize) -> MultTable {
    let dim = n * n;
    let mut table = vec![vec![QVec::new(); dim]; dim];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if b == c {
                        table[a * n + b][c * n + d] = qv_basis(a * n + d);
                    }
                }
            }
        }
    }
    table
}

fn table_product(table: &MultTable, u: &QVec, v: &QVec) -> QVec {
    let mut out = QVec::new();
    for (&i, ci) in u {
        for (&j, cj) in v {
            qv_add_scaled(&mut out, &table[i][j], &(ci * cj));
        }
    }
    out
}

/// Solves for a two-sided unit of the table by exact Gaussian elimination on
/// the stacked linear system `u e_j = e_j`, `e_j u = e_j`.
// `j` indexes both table axes at once, so a range loop is the clear form.
#[allow(clippy::needless_range_loop)]
fn find_unit(table: &MultTable, dim: usize) -> Option<QVec> {
    // Columns: the unknown coordinates u_i.  Rows: for each j and each basis
    // component k, sum_i u_i (e_i e_j)_k = delta_{jk} and the mirrored
    // right-product equations.
    let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for j in 0..dim {
        for k in 0..dim {
            let left: Vec<Rational> = (0..dim)
                .map(|i| table[i][j].get(&k).cloned().unwrap_or_else(Rational::zero))
                .collect();
            let right: Vec<Rational> = (0..dim)
                .map(|i| table[j][i].get(&k).cloned().unwrap_or_else(Rational::zero))
                .collect();
            let target = if j == k { rint(1) } else { rint(0) };
            rows.push((left, target.clone()));
            rows.push((right, target));
        }
    }
    // Forward elimination with exact pivots.
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..dim {
        let Some(found) = (pivot_row..rows.len()).find(|&r| !rows[r].0[col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, found);
        let inv = {
            let p = &rows[pivot_row].0[col];
            Rational::from_integer(1.into()) / p.clone()
        };
        for c in 0..dim {
            rows[pivot_row].0[c] = &rows[pivot_row].0[c] * &inv;
        }
        rows[pivot_row].1 = &rows[pivot_row].1 * &inv;
        for r in 0..rows.len() {
            if r == pivot_row || rows[r].0[col].is_zero() {
                continue;
            }
            let factor = rows[r].0[col].clone();
            for c in 0..dim {
                let delta = &rows[pivot_row].0[c] * &factor;
                rows[r].0[c] = &rows[r].0[c] - delta;
            }
            let delta = &rows[pivot_row].1 * &factor;
            rows[r].1 = &rows[r].1 - delta;
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
    }
    // Inconsistent system: a zero row with nonzero target.
    for (coeffs, target) in &rows[pivot_row..] {
        if coeffs.iter().all(|c| c.is_zero()) && !target.is_zero() {
            return None;
        }
    }
    let mut unit = QVec::new();
    for (row, col) in pivots {
        let value = rows[row].1.clone();
        if !value.is_zero() {
            unit.insert(col, value);
        }
    }
    // The system can be underdetermined only in degenerate tables; verify.
    for j in 0..dim {
        let ej = qv_basis(j);
        if table_product(table, &unit, &ej) != ej || table_product(table, &ej, &unit) != ej {
            return None;
        }
    }
    Some(unit)
}

/// Builds the weight-zero instance of an associative unital algebra: all
/// weights 0, `D = 0`, a single mode `u^+_{-1} v = uv`, vacuum the algebra
/// unit, conformal element 0 with central charge 0.
pub fn make_assoc_algebra_instance(
    table: &MultTable,
    dim: usize,
) -> Result<OsvaInstance, ModesError> {
    if table.len() != dim {
        return Err(ModesError::BadTableShape {
            got: table.len(),
            want: dim,
        });
    }
    for row in table {
        if row.len() != dim {
            return Err(ModesError::BadTableShape {
                got: row.len(),
                want: dim,
            });
        }
        for v in row {
            if v.keys().any(|&k| k >= dim) {
                return Err(ModesError::BadIndex(*v.keys().max().expect("nonempty")));
            }
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let left = table_product(table, &table[i][j], &qv_basis(k));
                let right = table_product(table, &qv_basis(i), &table[j][k]);
                if left != right {
                    return Err(ModesError::NonAssociative(i, j, k));
                }
            }
        }
    }
    let unit = find_unit(table, dim).ok_or(ModesError::NoUnit)?;

    let labels: Vec<String> = (0..dim).map(|i| format!("e{i}")).collect();
    let weights = vec![rint(0); dim];
    let mut entries = ModeTable::default();
    for (i, row) in table.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if !cell.is_empty() {
                entries.entries.insert((i, -1, j), cell.clone());
            }
        }
    }
    // Weight-zero retention needs cutoff >= 0; keep the conventional floor 2
    // so exponential loops behave uniformly across instances.
    let space = GradedSpace::new(labels, weights, 2);
    Ok(OsvaInstance::new(
        "assoc".to_string(),
        space,
        unit,
        vec![QVec::new(); dim],
        Some(ConformalData {
            omega: QVec::new(),
            central_charge: rint(0),
        }),
        ModeBackend::Table(entries),
    ))
}

#[derive(Serialize, Deserialize)]
struct MultTableFile {
    dim: usize,
    /// `table[i][j][k]` is the coefficient of `e_k` in `e_i e_j`, as "p/q".
    table: Vec<Vec<Vec<String>>>,
}

/// Serialize a multiplication table as structured text with dense rational
/// string entries.
pub fn mult_table_to_json(table: &MultTable) -> String {
    let dim = table.len();
    let file = MultTableFile {
        dim,
        table: table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|product| {
                        (0..dim)
                            .map(|k| {
                                rational_string(
                                    &product.get(&k).cloned().unwrap_or_else(|| rint(0)),
                                )
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("table serialization");
    text.push('\n');
    text
}

pub fn mult_table_from_json(text: &str) -> Result<MultTable, ModesError> {
    let file: MultTableFile =
        serde_json::from_str(text).map_err(|e| ModesError::Parse(e.to_string()))?;
    if file.table.len() != file.dim {
        return Err(ModesError::BadTableShape { got: file.table.len(), want: file.dim });
    }
    let mut table = Vec::with_capacity(file.dim);
    for row in &file.table {
        if row.len() != file.dim {
            return Err(ModesError::BadTableShape { got: row.len(), want: file.dim });
        }
        let mut out_row = Vec::with_capacity(file.dim);
        for product in row {
            if product.len() != file.dim {
                return Err(ModesError::BadTableShape {
                    got: product.len(),
                    want: file.dim,
                });
            }
            let mut entry = QVec::new();
            for (k, coeff) in product.iter().enumerate() {
                let value =
                    parse_rational(coeff).map_err(|e| ModesError::Parse(e.to_string()))?;
                if !value.is_zero() {
                    entry.insert(k, value);
                }
            }
            out_row.push(entry);
        }
        table.push(out_row);
    }
    Ok(table)
}

/// Tensor of a weight-zero algebra instance with an arbitrary instance:
/// basis pairs with index `a * dim_right + u`, weights from the right factor,
/// modes `(a (x) u)^+_n (b (x) v) = ab (x) u^+_n v`.
pub fn make_tensor_instance(
    alg: &OsvaInstance,
    va: OsvaInstance,
) -> Result<OsvaInstance, ModesError> {
    if alg.space().indices().any(|i| !alg.space().weight(i).is_zero()) {
        return Err(ModesError::NonZeroWeights);
    }
    let table = match &alg.backend {
        ModeBackend::Table(t) => t,
        _ => return Err(ModesError::NonZeroWeights),
    };
    let da = alg.space().dim();
    let dv = va.space().dim();
    let mut left_table = vec![vec![QVec::new(); da]; da];
    for ((i, n, j), product) in &table.entries {
        debug_assert_eq!(*n, -1);
        left_table[*i][*j] = product.clone();
    }

    let mut labels = Vec::with_capacity(da * dv);
    let mut weights = Vec::with_capacity(da * dv);
    for a in 0..da {
        for u in 0..dv {
            labels.push(format!(
                "{}|{}",
                alg.space().label(a),
                va.space().label(u)
            ));
            weights.push(va.space().weight(u).clone());
        }
    }

    // D = id (x) D and vacuum/conformal lift through the unit of the algebra.
    let mut d_table = Vec::with_capacity(da * dv);
    for a in 0..da {
        for u in 0..dv {
            let mut out = QVec::new();
            for (&k, c) in va.d_basis(u) {
                out.insert(a * dv + k, c.clone());
            }
            d_table.push(out);
        }
    }
    let pair = |au: &QVec, vu: &QVec| -> QVec {
        let mut out = QVec::new();
        for (&a, ca) in au {
            for (&u, cu) in vu {
                out.insert(a * dv + u, ca * cu);
            }
        }
        out
    };
    let vacuum = pair(alg.vacuum(), va.vacuum());
    let conformal = va.conformal().map(|c| ConformalData {
        omega: pair(alg.vacuum(), &c.omega),
        central_charge: c.central_charge.clone(),
    });
    let space = GradedSpace::new(labels, weights, va.space().cutoff());
    let name = format!("{}(x){}", alg.name, va.name);
    Ok(OsvaInstance::new(
        name,
        space,
        vacuum,
        d_table,
        conformal,
        ModeBackend::Tensor(TensorData {
            left_table,
            right: Box::new(va),
        }),
    ))
}
