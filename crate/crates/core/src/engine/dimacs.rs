//! Debug export of a loaded program as DIMACS CNF plus a symbol table.

use std::io::{self, Write};

use crate::clause::Clause;

/// Writes `p cnf <vars> <clauses>` followed by one zero-terminated clause
/// per line.
pub fn write_dimacs<W: Write>(clauses: &[Clause], atom_count: u32, mut out: W) -> io::Result<()> {
    writeln!(out, "p cnf {} {}", atom_count, clauses.len())?;
    for c in clauses {
        for l in c.literals() {
            write!(out, "{} ", l.to_dimacs())?;
        }
        writeln!(out, "0")?;
    }
    Ok(())
}

/// Writes one `<atom-id> <atom-name>` line per named atom.
pub fn write_symbols<'a, W, I>(symbols: I, mut out: W) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u32, &'a str)>,
{
    for (atom, name) in symbols {
        writeln!(out, "{atom} {name}")?;
    }
    Ok(())
}
