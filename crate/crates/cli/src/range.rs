//! Value lists on the command line: a single number, a comma-separated list,
//! or an inclusive range `start:stop:step`.

const MAX_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Values(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts(pub Vec<usize>);

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(x)
}

/// Inclusive range; the last point snaps to `stop` when within `1e-12` of it.
fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if step.is_nan() || step <= 0.0 {
        return Err(format!("range step must be positive (got {step})"));
    }
    let tol = 1e-12 * start.abs().max(stop.abs()).max(1.0);
    if start > stop + tol {
        return Err(format!("empty range {start}:{stop}:{step}"));
    }
    let mut out = Vec::new();
    loop {
        let v = start + out.len() as f64 * step;
        if v > stop + tol {
            break;
        }
        out.push(if (v - stop).abs() <= tol { stop } else { v });
        if out.len() > MAX_POINTS {
            return Err(format!("range {start}:{stop}:{step} has too many points"));
        }
    }
    Ok(out)
}

pub fn parse_values(s: &str) -> Result<Values, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty value list".into());
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("range '{s}' must have the form start:stop:step"));
        };
        return range(number(a)?, number(b)?, number(c)?).map(Values);
    }
    s.split(',')
        .map(number)
        .collect::<Result<_, _>>()
        .map(Values)
}

pub fn parse_counts(s: &str) -> Result<Counts, String> {
    let Values(xs) = parse_values(s)?;
    xs.into_iter()
        .map(|x| {
            let r = x.round();
            if x < 0.0 || (x - r).abs() > 1e-9 {
                Err(format!("{x} is not a non-negative integer"))
            } else {
                Ok(r as usize)
            }
        })
        .collect::<Result<_, _>>()
        .map(Counts)
}
