use std::io::{self, Write};

use super::{DsmPattern, FrequentIn};

/// Trailing comment lines of every mining report.
pub const REPORT_FOOTER: &str = "\
# effect_size: (mean_A - mean_B) / pooled SD of per-student counts (Cohen's d)
# for two groups Cohen's f = |d| * sqrt(n_A * n_B) / (n_A + n_B); equal groups: f = |d| / 2
# t: pooled two-sample t, df = n_A + n_B - 2; p_value two-sided";

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.4}")
    }
}

/// Tab-separated pattern table, four decimals throughout. `names` label the
/// two groups in the header and the frequent-group column.
pub fn write_report(
    out: &mut dyn Write,
    patterns: &[DsmPattern],
    names: (&str, &str),
) -> io::Result<()> {
    let (a, b) = names;
    writeln!(
        out,
        "pattern\ti_support_{a}\ti_support_{b}\tt\tp_value\teffect_size\ts_support_{a}\ts_support_{b}\ts_frequent_group"
    )?;
    for p in patterns {
        let group = match p.frequent_in {
            FrequentIn::A => a,
            FrequentIn::B => b,
            FrequentIn::Both => "Both",
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.pattern.join(" -> "),
            num(p.a.i_support),
            num(p.b.i_support),
            num(p.t),
            num(p.p_value),
            num(p.effect_size),
            num(p.a.s_support),
            num(p.b.s_support),
            group
        )?;
    }
    writeln!(out, "{REPORT_FOOTER}")
}
