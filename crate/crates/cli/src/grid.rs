use anyhow::{bail, Context, Result};

/// Parses `"start:end:step"` (inclusive) or `"a,b,c"`.
pub fn parse_f64_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().with_context(|| format!("bad grid value {s:?}"));
    let out: Vec<f64> = match parts.as_slice() {
        [start, end, step] => {
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if step.is_nan() || step <= 0.0 || end < start {
                bail!("grid {text:?} needs start <= end and step > 0");
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| start + step * i as f64).collect()
        }
        [_] => text.split(',').map(|s| num(s.trim())).collect::<Result<_>>()?,
        _ => bail!("grid {text:?} must be start:end:step or a comma list"),
    };
    if out.is_empty() {
        bail!("grid {text:?} is empty");
    }
    Ok(out)
}

pub fn parse_usize_grid(text: &str) -> Result<Vec<usize>> {
    parse_f64_grid(text)?
        .into_iter()
        .map(|v| {
            if v < 1.0 || v.fract() != 0.0 {
                bail!("neighbor count {v} must be a positive integer");
            }
            Ok(v as usize)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_usize_grid("10:200:10").unwrap().len(), 20);
        assert_eq!(parse_usize_grid("5,10").unwrap(), vec![5, 10]);
        assert_eq!(
            parse_f64_grid("6:30:2").unwrap(),
            (3..=15).map(|i| 2.0 * i as f64).collect::<Vec<_>>()
        );
        assert!(parse_usize_grid("2.5").is_err());
        assert!(parse_f64_grid("1:0:1").is_err());
        assert!(parse_f64_grid("1:2").is_err());
    }
}
