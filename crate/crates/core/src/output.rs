//! Number formatting shared by the CSV/JSON emitters.

/// Full double precision: 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::fmt17;

    #[test]
    fn round_trips_exactly() {
        for x in [0.1, -1.001_248_829_831_128_8, 1e-300, 12345.678_901_234_5, 0.0] {
            let back: f64 = fmt17(x).parse().unwrap();
            assert_eq!(back, x);
        }
    }
}
