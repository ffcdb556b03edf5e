//! Literals for numbers, elements and vertices in config files.
//!
//! p-adic numbers are rationals (`-3/4`, `5`) or digit strings in the form
//! printed by the tool (`2^-1 * (1.0.1)_2`, `(1.1)_3`). Elements are
//! `affine(t = .., a = ..)` or `lamp(shift = h, lamps = [pos:val, ..])`.
//! Vertices are `o`, `s^k`, `disc(center = .., height = h)` or
//! `prefix(height = h, lamps = [pos:val, ..])`.

use treewalk_core::lamplighter::{LampElem, LampTree, LampVertex};
use treewalk_core::padic::{PAdic, Qp};
use treewalk_core::padic_tree::{Affine, Disc, PAdicTree};
use treewalk_core::tree::AffineTree;
use treewalk_core::Rational;

pub type LiteralResult<T> = Result<T, String>;

pub fn parse_int(s: &str) -> LiteralResult<i64> {
    s.trim()
        .parse()
        .map_err(|_| format!("expected an integer, found `{}`", s.trim()))
}

pub fn parse_rational(s: &str) -> LiteralResult<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i128 = n.parse().map_err(|_| format!("expected a rational, found `{s}`"))?;
    let d: i128 = d.parse().map_err(|_| format!("expected a rational, found `{s}`"))?;
    if d == 0 {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Rational::new(n, d))
}

/// Splits on commas outside brackets and parentheses.
pub fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out
}

/// `name(k1 = v1, k2 = v2)` as `(name, [(k1, v1), (k2, v2)])`.
pub fn parse_call(s: &str) -> LiteralResult<(&str, Vec<(&str, &str)>)> {
    let s = s.trim();
    let open = s
        .find('(')
        .ok_or_else(|| format!("expected `name(...)`, found `{s}`"))?;
    if !s.ends_with(')') {
        return Err(format!("unbalanced parentheses in `{s}`"));
    }
    let name = s[..open].trim();
    let args = split_top_level(&s[open + 1..s.len() - 1])
        .into_iter()
        .map(|a| {
            a.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| format!("expected `key = value`, found `{a}`"))
        })
        .collect::<LiteralResult<Vec<_>>>()?;
    Ok((name, args))
}

fn take<'a>(args: &[(&str, &'a str)], key: &str, context: &str) -> LiteralResult<&'a str> {
    args.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| format!("`{context}` is missing `{key}`"))
}

fn check_keys(args: &[(&str, &str)], allowed: &[&str], context: &str) -> LiteralResult<()> {
    for (k, _) in args {
        if !allowed.contains(k) {
            return Err(format!("`{context}` has no field `{k}`"));
        }
    }
    Ok(())
}

pub fn parse_padic(field: &Qp, s: &str) -> LiteralResult<PAdic> {
    let s = s.trim();
    if s.contains('(') {
        let (valuation, body) = match s.split_once('*') {
            Some((pre, body)) => {
                let (base, exp) = pre
                    .trim()
                    .split_once('^')
                    .ok_or_else(|| format!("expected `p^v * (digits)_p`, found `{s}`"))?;
                if base.trim() != field.prime().to_string() {
                    return Err(format!(
                        "base {} does not match the prime {}",
                        base.trim(),
                        field.prime()
                    ));
                }
                (parse_int(exp)?, body.trim())
            }
            None => (0, s),
        };
        let suffix = format!(")_{}", field.prime());
        let inner = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(suffix.as_str()))
            .ok_or_else(|| format!("expected `(d0.d1...)_{}`, found `{body}`", field.prime()))?;
        let digits = inner
            .split('.')
            .map(|d| d.trim().parse::<u32>().map_err(|_| format!("bad digit `{d}` in `{s}`")))
            .collect::<LiteralResult<Vec<_>>>()?;
        return field.from_digits(valuation, &digits).map_err(|e| e.to_string());
    }
    let r = parse_rational(s)?;
    field.from_rational(*r.numer(), *r.denom()).map_err(|e| e.to_string())
}

/// `[pos:val, ...]`.
pub fn parse_lamps(s: &str) -> LiteralResult<Vec<(i64, i64)>> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| format!("expected `[pos:val, ...]`, found `{s}`"))?;
    split_top_level(inner)
        .into_iter()
        .filter(|x| !x.is_empty())
        .map(|pair| {
            let (p, v) = pair
                .split_once(':')
                .or_else(|| pair.split_once('='))
                .ok_or_else(|| format!("expected `pos:val`, found `{pair}`"))?;
            Ok((parse_int(p)?, parse_int(v)?))
        })
        .collect()
}

/// `s^k o`, shared by both realizations.
fn main_branch_literal(s: &str) -> Option<LiteralResult<i64>> {
    let s = s.trim();
    if s == "o" {
        return Some(Ok(0));
    }
    if s == "s" || s == "s o" {
        return Some(Ok(1));
    }
    let rest = s.strip_prefix("s^")?;
    let rest = rest.strip_suffix(" o").unwrap_or(rest);
    Some(parse_int(rest.trim_matches(|c| c == '(' || c == ')')))
}

pub fn parse_affine(tree: &PAdicTree, s: &str) -> LiteralResult<Affine> {
    let s = s.trim();
    if let Some(k) = element_power_literal(s) {
        return tree.power(&tree.homothety(), k?).map_err(|e| e.to_string());
    }
    let (name, args) = parse_call(s)?;
    if name != "affine" {
        return Err(format!("expected `affine(t = .., a = ..)`, found `{s}`"));
    }
    check_keys(&args, &["t", "a"], "affine")?;
    let t = parse_padic(tree.field(), take(&args, "t", "affine")?)?;
    let a = parse_padic(tree.field(), take(&args, "a", "affine")?)?;
    tree.element(t, a).map_err(|e| e.to_string())
}

pub fn parse_lamp_elem(tree: &LampTree, s: &str) -> LiteralResult<LampElem> {
    let s = s.trim();
    if let Some(k) = element_power_literal(s) {
        return tree.power(&tree.homothety(), k?).map_err(|e| e.to_string());
    }
    let (name, args) = parse_call(s)?;
    if name != "lamp" {
        return Err(format!("expected `lamp(shift = .., lamps = [..])`, found `{s}`"));
    }
    check_keys(&args, &["shift", "lamps"], "lamp")?;
    let shift = parse_int(take(&args, "shift", "lamp")?)?;
    let lamps = match args.iter().find(|(k, _)| *k == "lamps") {
        Some((_, v)) => parse_lamps(v)?,
        None => Vec::new(),
    };
    Ok(tree.element(shift, &lamps))
}

/// `id`, `s` and `s^k` as elements.
fn element_power_literal(s: &str) -> Option<LiteralResult<i64>> {
    match s {
        "id" | "identity" => Some(Ok(0)),
        "s" => Some(Ok(1)),
        _ => s
            .strip_prefix("s^")
            .map(|k| parse_int(k.trim_matches(|c| c == '(' || c == ')'))),
    }
}

pub fn parse_disc(tree: &PAdicTree, s: &str) -> LiteralResult<Disc> {
    if let Some(h) = main_branch_literal(s) {
        return tree.main_branch(h?).map_err(|e| e.to_string());
    }
    let (name, args) = parse_call(s)?;
    if name != "disc" {
        return Err(format!(
            "expected `o`, `s^k` or `disc(center = .., height = ..)`, found `{}`",
            s.trim()
        ));
    }
    check_keys(&args, &["center", "height"], "disc")?;
    let center = parse_padic(tree.field(), take(&args, "center", "disc")?)?;
    let height = parse_int(take(&args, "height", "disc")?)?;
    tree.disc(&center, height).map_err(|e| e.to_string())
}

pub fn parse_lamp_vertex(tree: &LampTree, s: &str) -> LiteralResult<LampVertex> {
    if let Some(h) = main_branch_literal(s) {
        return tree.main_branch(h?).map_err(|e| e.to_string());
    }
    let (name, args) = parse_call(s)?;
    if name != "prefix" {
        return Err(format!(
            "expected `o`, `s^k` or `prefix(height = .., lamps = [..])`, found `{}`",
            s.trim()
        ));
    }
    check_keys(&args, &["height", "lamps"], "prefix")?;
    let height = parse_int(take(&args, "height", "prefix")?)?;
    let pairs = match args.iter().find(|(k, _)| *k == "lamps") {
        Some((_, v)) => parse_lamps(v)?,
        None => Vec::new(),
    };
    if let Some((p, _)) = pairs
        .iter()
        .find(|(p, v)| *p > height && v.rem_euclid(tree.q() as i64) != 0)
    {
        return Err(format!("lamp at position {p} lies below height {height}"));
    }
    let end = treewalk_core::lamplighter::LampEnd {
        lamps: treewalk_core::lamplighter::Lamps::from_pairs(tree.q(), &pairs),
        known_to: height,
    };
    tree.boundary_vertex(&end, height).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use treewalk_core::padic::PrecisionBudget;

    fn q2() -> Qp {
        Qp::new(2, PrecisionBudget::default()).unwrap()
    }

    #[test]
    fn rationals_and_digit_strings_agree() {
        let f = q2();
        let a = parse_padic(&f, "5/2").unwrap();
        let b = parse_padic(&f, &a.to_string()).unwrap();
        assert!(f.agree(&a, &b));
        assert_eq!(parse_padic(&f, "2^-1 * (1.0.1)_2").unwrap().valuation(), Some(-1));
        assert!(parse_padic(&f, "(1.0.1)_3").is_err());
        assert!(parse_padic(&f, "1/0").is_err());
    }

    #[test]
    fn elements_and_vertices() {
        let t = PAdicTree::new(q2());
        let g = parse_affine(&t, "affine(t = 1, a = 1/2)").unwrap();
        assert_eq!(t.phi(&g), -1);
        assert_eq!(t.phi(&parse_affine(&t, "s^3").unwrap()), 3);
        assert!(parse_affine(&t, "affine(t = 1)").is_err());
        assert!(parse_affine(&t, "affine(t = 1, a = 0)").is_err());
        let d = parse_disc(&t, "disc(center = 1, height = 1)").unwrap();
        assert_eq!(d, t.son(&t.origin(), 1).unwrap());
        assert_eq!(parse_disc(&t, "s^2").unwrap(), t.main_branch(2).unwrap());
        assert_eq!(parse_disc(&t, "o").unwrap(), t.origin());
    }

    #[test]
    fn lamplighter_literals() {
        let t = LampTree::new(2).unwrap();
        let g = parse_lamp_elem(&t, "lamp(shift = -1, lamps = [0:1, 3:1])").unwrap();
        assert_eq!(g, t.element(-1, &[(0, 1), (3, 1)]));
        let v = parse_lamp_vertex(&t, "prefix(height = 2, lamps = [1:1])").unwrap();
        assert_eq!(v, t.son(&t.son(&t.origin(), 1).unwrap(), 0).unwrap());
        assert!(parse_lamp_vertex(&t, "prefix(height = 0, lamps = [1:1])").is_err());
    }

    #[test]
    fn top_level_split_respects_brackets() {
        assert_eq!(
            split_top_level("a = [1:1, 2:1], b = f(x, y)"),
            vec!["a = [1:1, 2:1]", "b = f(x, y)"]
        );
    }
}
