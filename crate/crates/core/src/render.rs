//! Text/JSON/CSV rendering of series, pairing tables, and verification
//! reports, shared by the command-line front end and the C bindings.

use crate::jacobi::GeneratorPolynomial;
use crate::qseries::{self, rat, PuiseuxSeries, Rat, GRID};
use crate::report::VerificationReport;
use crate::{frobenius, jacobi, modforms};
use num_traits::{One, Signed, Zero};

/// Registry of series the front ends can expand by name.
pub const SERIES_NAMES: [&str; 17] = [
    "eta", "e2", "e4", "e6", "theta2", "theta3", "theta4", "xi2", "xi3", "xi4", "chi0_q",
    "chi1_q", "chi3_q", "chi4_q", "f0", "f1", "f2",
];

pub fn named_series(name: &str, trunc: i64) -> Option<PuiseuxSeries> {
    let s = match name {
        "eta" => qseries::eta(trunc),
        "e2" => qseries::e2(trunc),
        "e4" => qseries::e4(trunc),
        "e6" => qseries::e6(trunc),
        "theta2" | "theta3" | "theta4" => qseries::theta(name.as_bytes()[5] - b'0', trunc),
        "xi2" | "xi3" | "xi4" => qseries::xi(name.as_bytes()[2] - b'0', trunc),
        "chi0_q" | "chi1_q" | "chi3_q" | "chi4_q" => {
            jacobi::character_q(name.as_bytes()[3] - b'0', trunc)
        }
        "f0" | "f1" | "f2" => {
            let (f0, f1, f2) = frobenius::potential_coefficients(trunc);
            match name {
                "f0" => f0,
                "f1" => f1,
                _ => f2,
            }
        }
        _ => return None,
    };
    Some(s)
}

/// Exact rational exponent e/24 as a display string.
pub fn exponent_string(e24: i64) -> String {
    let g = num_integer::gcd(e24.abs().max(1), 24);
    let (n, d) = (e24 / g, 24 / g);
    if d == 1 {
        format!("{}", n)
    } else {
        format!("{}/{}", n, d)
    }
}

pub fn series_text(s: &PuiseuxSeries) -> String {
    let mut parts = Vec::new();
    for (e, c) in s.terms() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let coeff = if mag.is_one() && e != 0 { String::new() } else { format!("{}", mag) };
        let qpow = if e == 0 {
            String::new()
        } else if e == GRID {
            "q".to_string()
        } else {
            let es = exponent_string(e);
            if es.contains('/') {
                format!("q^({})", es)
            } else {
                format!("q^{}", es)
            }
        };
        let body = match (coeff.is_empty(), qpow.is_empty()) {
            (true, _) => qpow.clone(),
            (false, true) => coeff.clone(),
            (false, false) => format!("{}*{}", coeff, qpow),
        };
        if parts.is_empty() {
            parts.push(if c.is_negative() { format!("-{}", body) } else { body });
        } else {
            parts.push(format!("{} {}", if c.is_negative() { "-" } else { "+" }, body));
        }
    }
    if parts.is_empty() {
        parts.push("0".to_string());
    }
    format!("{} + O(q^({}))", parts.join(" "), exponent_string(s.trunc()))
}

pub fn series_json(name: &str, s: &PuiseuxSeries) -> serde_json::Value {
    serde_json::json!({
        "name": name,
        "truncation": exponent_string(s.trunc()),
        "terms": s.terms().map(|(e, c)| serde_json::json!({
            "exponent": exponent_string(e),
            "coefficient": c.to_string(),
        })).collect::<Vec<_>>(),
    })
}

pub fn series_csv(s: &PuiseuxSeries) -> String {
    let mut out = String::from("exponent_num,exponent_den,coeff_num,coeff_den\n");
    for (e, c) in s.terms() {
        let g = num_integer::gcd(e.abs().max(1), 24);
        out.push_str(&format!("{},{},{},{}\n", e / g, 24 / g, c.numer(), c.denom()));
    }
    out
}

/// Render a polynomial in the twisted generators and Eisenstein series.
pub fn gp_string(p: &GeneratorPolynomial) -> String {
    if p.terms.is_empty() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (m, c) in &p.terms {
        let mut factors = Vec::new();
        let mag = c.abs();
        if !mag.is_one() {
            factors.push(format!("{}", mag));
        }
        for (sym, pow) in [("E4", m.a), ("E6", m.b)] {
            match pow {
                0 => {}
                1 => factors.push(sym.to_string()),
                k => factors.push(format!("{}^{}", sym, k)),
            }
        }
        for i in 0..5 {
            match m.c[i] {
                0 => {}
                1 => factors.push(format!("s{}", i)),
                k => factors.push(format!("s{}^{}", i, k)),
            }
        }
        if factors.is_empty() {
            factors.push("1".to_string());
        }
        let body = factors.join("*");
        if parts.is_empty() {
            parts.push(if c.is_negative() { format!("-{}", body) } else { body });
        } else {
            parts.push(format!("{} {}", if c.is_negative() { "-" } else { "+" }, body));
        }
    }
    parts.join(" ")
}

pub fn rat_string(r: &Rat) -> String {
    r.to_string()
}

pub const TABLE_NAMES: [&str; 3] = ["j0", "j1", "duality"];

/// A named table: a title plus rows of display strings.
pub fn table_entries(target: &str, trunc: i64) -> Option<(String, Vec<Vec<String>>)> {
    match target {
        "j0" => {
            let mut rows = Vec::new();
            for &i in frobenius::COORDS.iter() {
                rows.push(
                    frobenius::COORDS
                        .iter()
                        .map(|&j| rat_string(&frobenius::j0_expected(i, j)))
                        .collect(),
                );
            }
            Some(("pairing of flat-coordinate differentials (constant)".into(), rows))
        }
        "j1" => {
            let comp = frobenius::computed_j1(trunc);
            let mut rows = Vec::new();
            // the extra coordinate pairs to a constant: 1 against s4, else 0
            let corner: Vec<String> =
                (0..6).map(|j| if j == 5 { "1".into() } else { "0".into() }).collect();
            rows.push(corner);
            for i in 0..5 {
                let mut row = vec![if i == 4 { "1".to_string() } else { "0".to_string() }];
                for j in 0..5 {
                    let p = if i <= j { &comp[i][j] } else { &comp[j][i] };
                    // entries carry a uniform eta^4 prefactor once detwisted
                    row.push(if p.terms.is_empty() {
                        "0".to_string()
                    } else {
                        format!("eta^4 * ({})", gp_string(p))
                    });
                }
                rows.push(row);
            }
            Some(("pairing of generator differentials (symbolic, detwisted)".into(), rows))
        }
        "duality" => {
            let mut rows = vec![vec![
                "k".to_string(),
                "pairing[0][0]".to_string(),
                "pairing[0][1]".to_string(),
                "pairing[1][0]".to_string(),
                "pairing[1][1]".to_string(),
            ]];
            for num in 1..=7i64 {
                let k = rat(num, 2);
                let m = modforms::duality_pairing(&k, trunc);
                let mut row =
                    vec![if num % 2 == 0 { format!("{}", num / 2) } else { format!("{}/2", num) }];
                for i in 0..2 {
                    for j in 0..2 {
                        let s = &m[i][j];
                        let c = s.coeff(0);
                        let constant =
                            s.sub(&PuiseuxSeries::constant(c.clone(), s.trunc())).is_zero();
                        row.push(if constant { rat_string(&c) } else { "nonconstant".into() });
                    }
                }
                rows.push(row);
            }
            Some(("solution-space duality pairings at the seven half-integer weights".into(), rows))
        }
        _ => None,
    }
}

pub fn table_json(name: &str, title: &str, rows: &[Vec<String>]) -> serde_json::Value {
    serde_json::json!({ "name": name, "title": title, "rows": rows })
}

pub fn reports_text(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    for rep in reports {
        for c in &rep.checks {
            out.push_str(&format!(
                "{} [{}] {} (order {}): {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                rep.suite,
                c.name,
                exponent_string(c.order24),
                c.detail
            ));
        }
    }
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    let failed: usize =
        reports.iter().map(|r| r.checks.iter().filter(|c| !c.passed).count()).sum();
    out.push_str(&format!("{} checks, {} failed\n", total, failed));
    out
}

pub fn reports_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from("suite,name,order24,passed,detail\n");
    for rep in reports {
        for c in &rep.checks {
            out.push_str(&format!(
                "{},{:?},{},{},{:?}\n",
                rep.suite, c.name, c.order24, c.passed, c.detail
            ));
        }
    }
    out
}
