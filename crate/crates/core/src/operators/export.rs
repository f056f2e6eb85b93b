use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::HermitianOperator;
use crate::error::Result;

/// Plain-text export: a `dim quad_weight` header, then one `row col value`
/// line per nonzero entry (1-based indices, global (mode, node) ordering).
/// Complex entries are written as `row col re im`.
pub fn write_matrix_market(op: &HermitianOperator, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{} {}", op.dim(), op.quad_weight())?;
    let offsets = op.matrix().offsets();
    let complex = op.matrix().blocks().iter().any(|b| {
        (0..b.ncols()).any(|j| (0..b.nrows()).any(|i| b[(i, j)].im != 0.0))
    });
    for (block, &o) in op.matrix().blocks().iter().zip(&offsets) {
        for i in 0..block.nrows() {
            for j in 0..block.ncols() {
                let v = block[(i, j)];
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                if complex {
                    writeln!(out, "{} {} {} {}", o + i + 1, o + j + 1, v.re, v.im)?;
                } else {
                    writeln!(out, "{} {} {}", o + i + 1, o + j + 1, v.re)?;
                }
            }
        }
    }
    Ok(())
}

pub fn write_matrix_market_file(op: &HermitianOperator, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market(op, &mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{assemble_grushin_mode, Grid1D};

    #[test]
    fn tridiagonal_export() {
        let grid = Grid1D::new(3).unwrap();
        let op = assemble_grushin_mode(0, 2.0, &grid).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&op, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "3 0.5");
        assert_eq!(lines.len(), 1 + 7);
        assert_eq!(lines[1], "1 1 8");
        assert_eq!(lines[2], "1 2 -4");
    }
}
