//! Parsers for flag values: numeric lists, ranges, detector lists.

use crate::array_model::azimuth_from_degrees;
use crate::detectors::DetectorKind;
use crate::{Error, Result};

/// Upper bound on the number of values a single list may expand to.
pub const MAX_LIST_LEN: usize = 100_000;

fn parse_number(token: &str) -> Result<f64> {
    let t = token.trim();
    let v = match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("not a number: {t:?}")))?,
    };
    if v.is_nan() {
        return Err(Error::Parse(format!("not a number: {t:?}")));
    }
    Ok(v)
}

/// Inclusive `start:stop:step` range.
fn parse_range(token: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = token.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(Error::Parse(format!(
            "range must be start:stop:step, got {token:?}"
        )));
    };
    let (start, stop, step) = (
        parse_number(start)?,
        parse_number(stop)?,
        parse_number(step)?,
    );
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step == 0.0 {
        return Err(Error::Parse(format!("invalid range {token:?}")));
    }
    let span = (stop - start) / step;
    if span < -1e-9 {
        return Err(Error::Parse(format!(
            "range {token:?} never reaches its end"
        )));
    }
    let count = (span + 1e-9).floor() + 1.0;
    if count > MAX_LIST_LEN as f64 {
        return Err(Error::Parse(format!("range {token:?} is too long")));
    }
    // Multiplying from the start avoids accumulating step roundoff.
    Ok((0..count as usize)
        .map(|i| start + step * i as f64)
        .collect())
}

/// Comma-separated numbers and `start:stop:step` ranges, e.g.
/// `-20:15:1` or `128,256,512`. `inf` is accepted.
pub fn parse_value_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for token in s.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err(Error::Parse(format!("empty entry in list {s:?}")));
        }
        if token.contains(':') {
            out.extend(parse_range(token)?);
        } else {
            out.push(parse_number(token)?);
        }
        if out.len() > MAX_LIST_LEN {
            return Err(Error::Parse("list is too long".into()));
        }
    }
    Ok(out)
}

/// Comma-separated azimuths in degrees, returned in radians.
pub fn parse_angles_deg(s: &str) -> Result<Vec<f64>> {
    let values = parse_value_list(s)?;
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("angle {bad} is not finite")));
    }
    Ok(values.into_iter().map(azimuth_from_degrees).collect())
}

/// Comma-separated detector names; `all` and `main` expand to groups.
/// Duplicates are dropped, first occurrence wins.
pub fn parse_detector_list(s: &str) -> Result<Vec<DetectorKind>> {
    let mut out: Vec<DetectorKind> = Vec::new();
    for token in s.split(',') {
        let token = token.trim();
        let kinds: Vec<DetectorKind> = match token.to_ascii_lowercase().as_str() {
            "" => return Err(Error::Parse(format!("empty entry in list {s:?}"))),
            "all" => DetectorKind::ALL.to_vec(),
            "main" => DetectorKind::MAIN.to_vec(),
            _ => vec![token.parse()?],
        };
        for k in kinds {
            if !out.contains(&k) {
                out.push(k);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(
            parse_value_list("128, 256,512").unwrap(),
            vec![128.0, 256.0, 512.0]
        );
        let snr = parse_value_list("-20:15:1").unwrap();
        assert_eq!(snr.len(), 36);
        assert_eq!((snr[0], snr[35]), (-20.0, 15.0));
        assert_eq!(
            parse_value_list("0:1:0.25").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_value_list("3:1:-1").unwrap(), vec![3.0, 2.0, 1.0]);
        assert_eq!(parse_value_list("inf").unwrap(), vec![f64::INFINITY]);
        assert_eq!(
            parse_value_list("1,4:6:1").unwrap(),
            vec![1.0, 4.0, 5.0, 6.0]
        );
    }

    #[test]
    fn malformed_lists() {
        for bad in [
            "",
            "1,,2",
            "abc",
            "nan",
            "1:2",
            "1:2:0",
            "1:5:-1",
            "0:1e9:1e-9",
            "1:inf:1",
        ] {
            assert!(parse_value_list(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn angles_in_degrees() {
        let a = parse_angles_deg("10, 190, -90").unwrap();
        assert!((a[0] - 10f64.to_radians()).abs() < 1e-15);
        assert!((a[2] - 270f64.to_radians()).abs() < 1e-12);
        assert!(parse_angles_deg("inf").is_err());
    }

    #[test]
    fn detector_lists() {
        assert_eq!(
            parse_detector_list("mdl, moving_std,mdl").unwrap(),
            vec![DetectorKind::Mdl, DetectorKind::MovingStd]
        );
        assert_eq!(
            parse_detector_list("main").unwrap(),
            DetectorKind::MAIN.to_vec()
        );
        assert_eq!(parse_detector_list("all").unwrap().len(), 5);
        assert!(parse_detector_list("aic,").is_err());
        assert!(parse_detector_list("esprit").is_err());
    }

    proptest! {
        #[test]
        fn value_list_never_panics(s in "\\PC{0,40}") {
            let _ = parse_value_list(&s);
            let _ = parse_detector_list(&s);
        }

        #[test]
        fn formatted_lists_parse_back(values in prop::collection::vec(-1e6f64..1e6, 1..20)) {
            let text = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            prop_assert_eq!(parse_value_list(&text).unwrap(), values);
        }
    }
}
