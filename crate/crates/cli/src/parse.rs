//! Value parsers for grid and point flags.

use num_complex::Complex64;

/// Comma-separated reals; each item is a number or an inclusive range `a..b:step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reals(pub Vec<f64>);

/// Comma-separated integers; each item is a number or an inclusive range `a..b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Integers(pub Vec<u64>);

fn real(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(x)
}

pub fn parse_reals(s: &str) -> Result<Reals, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        if item.is_empty() {
            return Err("empty list item".into());
        }
        match item.split_once("..") {
            None => out.push(real(item)?),
            Some((a, rest)) => {
                let (b, step) = rest
                    .split_once(':')
                    .ok_or_else(|| format!("real range '{item}' needs a step, as in a..b:step"))?;
                let (a, b, step) = (real(a)?, real(b)?, real(step)?);
                if !(step > 0.0) || b < a {
                    return Err(format!("range '{item}' needs a <= b and step > 0"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                if count > 1_000_000 {
                    return Err(format!("range '{item}' has too many points"));
                }
                out.extend((0..=count).map(|i| a + i as f64 * step));
            }
        }
    }
    Ok(Reals(out))
}

pub fn parse_integers(s: &str) -> Result<Integers, String> {
    let int = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("'{t}' is not a nonnegative integer"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        match item.split_once("..") {
            None => out.push(int(item)?),
            Some((a, b)) => {
                let (a, b) = (int(a)?, int(b)?);
                if b < a || b - a > 1_000_000 {
                    return Err(format!("range '{item}' needs a <= b and at most 10^6 entries"));
                }
                out.extend(a..=b);
            }
        }
    }
    Ok(Integers(out))
}

/// `re` or `re,im`.
pub fn parse_point(s: &str) -> Result<Complex64, String> {
    match s.split_once(',') {
        None => Ok(Complex64::new(real(s)?, 0.0)),
        Some((re, im)) => Ok(Complex64::new(real(re)?, real(im)?)),
    }
}

/// `RxA`, as in `256x512`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, a) = s.split_once(['x', 'X']).ok_or_else(|| format!("grid '{s}' must look like 256x512"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a grid size"));
    Ok((n(r)?, n(a)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_lists_and_ranges() {
        assert_eq!(parse_reals("0.2,0.4").unwrap().0, vec![0.2, 0.4]);
        let r = parse_reals("0..1:0.25").unwrap().0;
        assert_eq!(r, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let r = parse_reals("0..0.9:0.1,0.95").unwrap().0;
        assert_eq!(r.len(), 11);
        assert!((r[9] - 0.9).abs() < 1e-15);
        assert!(parse_reals("0..1").is_err());
        assert!(parse_reals("1..0:0.1").is_err());
        assert!(parse_reals("a").is_err());
        assert!(parse_reals("1,,2").is_err());
    }

    #[test]
    fn integer_ranges() {
        assert_eq!(parse_integers("1..5").unwrap().0, vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_integers("2,7,10..11").unwrap().0, vec![2, 7, 10, 11]);
        assert!(parse_integers("5..1").is_err());
        assert!(parse_integers("-1").is_err());
    }

    #[test]
    fn points_and_grids() {
        assert_eq!(parse_point("0.5,-0.25").unwrap(), Complex64::new(0.5, -0.25));
        assert_eq!(parse_point("-0.3").unwrap(), Complex64::new(-0.3, 0.0));
        assert_eq!(parse_grid("256x512").unwrap(), (256, 512));
        assert!(parse_grid("256").is_err());
    }
}
