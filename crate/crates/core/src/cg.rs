//! Clebsch–Gordan coefficients (Condon–Shortley convention) from the Racah
//! closed form, evaluated with log-factorials.
//!
//! All angular momenta are passed doubled.

/// Table of `ln k!`.
#[derive(Clone, Debug)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        for k in 1..=max {
            table.push(table[k - 1] + (k as f64).ln());
        }
        Self { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    /// `ln k!`; grows the table on demand.
    pub fn ln(&self, k: i64) -> f64 {
        assert!(k >= 0, "log-factorial of negative argument {k}");
        let k = k as usize;
        if k < self.table.len() {
            self.table[k]
        } else {
            self.table[self.max()] + (self.table.len()..=k).map(|i| (i as f64).ln()).sum::<f64>()
        }
    }
}

fn allowed(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> bool {
    let parity = |a: i64, b: i64| (a + b) % 2 == 0;
    tj1 >= 0
        && tj2 >= 0
        && tj >= 0
        && tm1.abs() <= tj1
        && tm2.abs() <= tj2
        && tm.abs() <= tj
        && parity(tj1, tm1)
        && parity(tj2, tm2)
        && parity(tj, tm)
        && tm1 + tm2 == tm
        && (tj1 - tj2).abs() <= tj
        && tj <= tj1 + tj2
        && parity(tj1 + tj2, tj)
}

/// `⟨j1 m1; j2 m2 | J M⟩` using a shared log-factorial table.
pub fn clebsch_gordan_with(
    lf: &LogFactorials,
    tj1: i64,
    tm1: i64,
    tj2: i64,
    tm2: i64,
    tj: i64,
    tm: i64,
) -> f64 {
    if !allowed(tj1, tm1, tj2, tm2, tj, tm) {
        return 0.0;
    }
    // Integer combinations (all even sums of doubled values, halved).
    let h = |x: i64| x / 2;
    let j1pj2mj = h(tj1 + tj2 - tj);
    let j1mm1 = h(tj1 - tm1);
    let j2pm2 = h(tj2 + tm2);
    let jmj2pm1 = h(tj - tj2 + tm1);
    let jmj1mm2 = h(tj - tj1 - tm2);

    let ln_pre = 0.5
        * (((tj + 1) as f64).ln() + lf.ln(h(tj + tj1 - tj2)) + lf.ln(h(tj - tj1 + tj2)) + lf.ln(j1pj2mj)
            - lf.ln(h(tj1 + tj2 + tj) + 1)
            + lf.ln(h(tj + tm))
            + lf.ln(h(tj - tm))
            + lf.ln(j1mm1)
            + lf.ln(h(tj1 + tm1))
            + lf.ln(h(tj2 - tm2))
            + lf.ln(j2pm2));

    let k_min = 0.max(-jmj2pm1).max(-jmj1mm2);
    let k_max = j1pj2mj.min(j1mm1).min(j2pm2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let ln_den = lf.ln(k)
            + lf.ln(j1pj2mj - k)
            + lf.ln(j1mm1 - k)
            + lf.ln(j2pm2 - k)
            + lf.ln(jmj2pm1 + k)
            + lf.ln(jmj1mm2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (ln_pre - ln_den).exp();
    }
    sum
}

/// `⟨j1 m1; j2 m2 | J M⟩`; zero when selection rules fail.
pub fn clebsch_gordan(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    let max = ((tj1 + tj2 + tj).max(0) / 2 + 1) as usize;
    clebsch_gordan_with(&LogFactorials::new(max), tj1, tm1, tj2, tm2, tj, tm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_spin_halves() {
        let r = 0.5f64.sqrt();
        assert!((clebsch_gordan(1, 1, 1, -1, 2, 0) - r).abs() < 1e-15);
        assert!((clebsch_gordan(1, -1, 1, 1, 2, 0) - r).abs() < 1e-15);
        assert!((clebsch_gordan(1, 1, 1, -1, 0, 0) - r).abs() < 1e-15);
        assert!((clebsch_gordan(1, -1, 1, 1, 0, 0) + r).abs() < 1e-15);
        assert!((clebsch_gordan(1, 1, 1, 1, 2, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stretched_states() {
        for tj in 0..20 {
            assert!((clebsch_gordan(tj, tj, tj, tj, 2 * tj, 2 * tj) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn selection_rules_give_zero() {
        assert_eq!(clebsch_gordan(1, 1, 1, 1, 2, 0), 0.0);
        assert_eq!(clebsch_gordan(2, 0, 2, 0, 6, 0), 0.0);
        assert_eq!(clebsch_gordan(2, 0, 2, 0, 3, 0), 0.0);
        assert_eq!(clebsch_gordan(1, 3, 1, -1, 2, 2), 0.0);
    }

    #[test]
    fn one_plus_half() {
        // ⟨1 0; ½ ½ | 3/2 ½⟩ = √(2/3), ⟨1 1; ½ −½ | ½ ½⟩ = √(2/3)
        assert!((clebsch_gordan(2, 0, 1, 1, 3, 1) - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((clebsch_gordan(2, 2, 1, -1, 1, 1) - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((clebsch_gordan(2, 0, 1, 1, 1, 1) + (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn orthogonality(tj1 in 0i64..9, tj2 in 0i64..9, a in 0i64..20, b in 0i64..20, c in 0i64..20) {
            let tjs: Vec<i64> = ((tj1 - tj2).abs()..=tj1 + tj2).step_by(2).collect();
            let tj = tjs[(a as usize) % tjs.len()];
            let tjp = tjs[(b as usize) % tjs.len()];
            let ms: Vec<i64> = (-tj.min(tjp)..=tj.min(tjp)).step_by(2).collect();
            let tm = ms[(c as usize) % ms.len()];
            let mut sum = 0.0;
            for tm1 in (-tj1..=tj1).step_by(2) {
                let tm2 = tm - tm1;
                sum += clebsch_gordan(tj1, tm1, tj2, tm2, tj, tm) * clebsch_gordan(tj1, tm1, tj2, tm2, tjp, tm);
            }
            let expected = if tj == tjp { 1.0 } else { 0.0 };
            prop_assert!((sum - expected).abs() < 1e-12);
        }
    }
}
