use std::io::{self, Write};

use super::TrialRecord;

pub const CSV_HEADER: &str = "n,k,filter_kind,theta,T,tpr_emp,fpr_emp,acc_emp,tpr_ana,fpr_ana,acc_ana,rebuild";

/// Six significant digits, trailing zeros dropped, switching to exponent
/// form outside `[1e-4, 1e6)`: the behaviour of C's `%.6g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_records<W: Write>(mut out: W, records: &[TrialRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.k,
            r.filter_kind,
            r.theta,
            r.t,
            format_sig6(r.tpr_emp),
            format_sig6(r.fpr_emp),
            format_sig6(r.acc_emp),
            format_sig6(r.tpr_ana),
            format_sig6(r.fpr_ana),
            format_sig6(r.acc_ana),
            u8::from(r.rebuild),
        )?;
    }
    out.flush()
}
