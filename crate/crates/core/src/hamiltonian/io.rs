//! Plain-text Pauli-term files.
//!
//! ```text
//! # any comment
//! # qubits: 2
//! 1.0 ZZ
//! -0.5 XI
//! ```
//!
//! The header must precede the first term. Leftmost letter acts on qubit 0.

use super::{PauliHamiltonian, PauliTerm};
use crate::error::{QaaeError, Result};

pub fn parse_pauli_file(text: &str) -> Result<PauliHamiltonian> {
    let mut num_qubits: Option<usize> = None;
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("qubits:") {
                let q = rest.trim().parse::<usize>().map_err(|_| QaaeError::Parse {
                    line: line_no,
                    msg: format!("bad qubit count '{}'", rest.trim()),
                })?;
                if num_qubits.is_some() {
                    return Err(QaaeError::Parse {
                        line: line_no,
                        msg: "duplicate qubits header".into(),
                    });
                }
                num_qubits = Some(q);
            }
            continue;
        }
        let q = num_qubits.ok_or_else(|| QaaeError::Parse {
            line: line_no,
            msg: "term before '# qubits: <q>' header".into(),
        })?;
        let mut fields = line.split_whitespace();
        let (coeff, letters) = match (fields.next(), fields.next(), fields.next()) {
            (Some(c), Some(s), None) => (c, s),
            _ => {
                return Err(QaaeError::Parse {
                    line: line_no,
                    msg: format!("expected '<coeff> <string>', got '{line}'"),
                })
            }
        };
        let coeff = coeff.parse::<f64>().map_err(|_| QaaeError::Parse {
            line: line_no,
            msg: format!("bad coefficient '{coeff}'"),
        })?;
        if !coeff.is_finite() {
            return Err(QaaeError::Parse {
                line: line_no,
                msg: format!("non-finite coefficient '{coeff}'"),
            });
        }
        let len = letters.chars().count();
        if len != q {
            return Err(QaaeError::Dimension {
                expected: q,
                found: len,
            });
        }
        let term = PauliTerm::from_letters(coeff, letters).map_err(|e| match e {
            QaaeError::Parse { msg, .. } => QaaeError::Parse { line: line_no, msg },
            other => other,
        })?;
        terms.push(term);
    }
    let q = num_qubits.ok_or_else(|| QaaeError::Parse {
        line: 0,
        msg: "missing '# qubits: <q>' header".into(),
    })?;
    PauliHamiltonian::new(q, terms)
}

/// Writes the stored terms with 17 significant digits.
pub fn serialize_pauli_file(h: &PauliHamiltonian) -> String {
    let mut out = format!("# qubits: {}\n", h.num_qubits());
    for t in h.terms() {
        out.push_str(&format!("{:.16e} {}\n", t.coeff, t.letters(h.num_qubits())));
    }
    out
}
