//! CSV output. Floats carry 17 significant digits; lines end in LF.

use std::io::{self, Write};

use ewlimit_core::Site;

use crate::harness::{IbpRow, SweepRow};

pub const SWEEP_HEADER: &str = "delta,m,s,t,estimate,stderr,limit_value,abs_err,rel_err";

fn g(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            g(r.delta),
            r.m,
            g(r.s),
            g(r.t),
            g(r.estimate),
            g(r.stderr),
            g(r.limit_value),
            g(r.abs_err),
            g(r.rel_err)
        )?;
    }
    Ok(())
}

pub fn write_ibp<W: Write>(mut w: W, rows: &[IbpRow]) -> io::Result<()> {
    writeln!(
        w,
        "dim,delta,k,n,axis,lhs_re,lhs_im,rhs_re,rhs_im,abs_err,rel_err,pass"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.dim,
            g(r.delta),
            g(r.k),
            r.n,
            r.axis,
            g(r.lhs_re),
            g(r.lhs_im),
            g(r.rhs_re),
            g(r.rhs_im),
            g(r.abs_err),
            g(r.rel_err),
            r.pass
        )?;
    }
    Ok(())
}

pub fn write_field<W: Write>(mut w: W, rows: &[(f64, Site, f64)]) -> io::Result<()> {
    writeln!(w, "time,x1,x2,value")?;
    for (t, x, v) in rows {
        writeln!(w, "{},{},{},{}", g(*t), x.x1, x.x2, g(*v))?;
    }
    Ok(())
}
