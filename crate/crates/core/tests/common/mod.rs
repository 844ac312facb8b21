//! Independent oracles shared by the integration suites. Nothing here calls
//! into the code paths it is used to check.
#![allow(dead_code)]

pub mod pmv_oracle {
    /// Line-by-line port of the reference BASIC listing for PMV: normalised
    /// clothing temperature `xn = (t_cl + 273) / 100`, averaged update,
    /// stop when successive iterates differ by at most `eps`.
    pub fn pmv(ta: f64, tr: f64, vel: f64, rh: f64, met: f64, clo: f64) -> f64 {
        let wme = 0.0;
        let pa = rh * 10.0 * (16.6536 - 4030.183 / (ta + 235.0)).exp();
        let icl = 0.155 * clo;
        let m = met * 58.15;
        let w = wme * 58.15;
        let mw = m - w;
        let fcl = if icl <= 0.078 { 1.0 + 1.29 * icl } else { 1.05 + 0.645 * icl };
        let hcf = 12.1 * vel.sqrt();
        let taa = ta + 273.0;
        let tra = tr + 273.0;
        let tcla = taa + (35.5 - ta) / (3.5 * icl + 0.1);
        let p1 = icl * fcl;
        let p2 = p1 * 3.96;
        let p3 = p1 * 100.0;
        let p4 = p1 * taa;
        let p5 = 308.7 - 0.028 * mw + p2 * (tra / 100.0).powi(4);
        let mut xn = tcla / 100.0;
        let mut xf = tcla / 50.0;
        let eps = 1e-7;
        let mut hc;
        let mut n = 0;
        loop {
            xf = (xf + xn) / 2.0;
            let hcn = 2.38 * (100.0 * xf - taa).abs().powf(0.25);
            hc = if hcf > hcn { hcf } else { hcn };
            xn = (p5 + p4 * hc - p2 * xf.powi(4)) / (100.0 + p3 * hc);
            n += 1;
            assert!(n < 10_000, "oracle iteration ran away");
            if (xn - xf).abs() <= eps {
                break;
            }
        }
        let tcl = 100.0 * xn - 273.0;
        let hl1 = 3.05e-3 * (5733.0 - 6.99 * mw - pa);
        let hl2 = if mw > 58.15 { 0.42 * (mw - 58.15) } else { 0.0 };
        let hl3 = 1.7e-5 * m * (5867.0 - pa);
        let hl4 = 0.0014 * m * (34.0 - ta);
        let hl5 = 3.96 * fcl * (xn.powi(4) - (tra / 100.0).powi(4));
        let hl6 = fcl * hc * (tcl - ta);
        let ts = 0.303 * (-0.036 * m).exp() + 0.028;
        ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6)
    }

    /// Air (= radiant) temperature at which the oracle reads zero, by bisection.
    pub fn neutral_temperature(vel: f64, rh: f64, met: f64, clo: f64) -> f64 {
        let (mut lo, mut hi) = (10.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if pmv(mid, mid, vel, rh, met, clo) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The reference grid: every combination of ta = tr in 18..30 (step 2,
    /// upper bound exclusive), vel, rh, met and clo.
    pub fn grid() -> Vec<[f64; 6]> {
        let mut g = Vec::new();
        for ta in (18..30).step_by(2) {
            for vel in [0.1, 0.3] {
                for rh in [30.0, 50.0, 70.0] {
                    for met in [1.0, 1.2, 1.6] {
                        for clo in [0.5, 1.0] {
                            g.push([ta as f64, ta as f64, vel, rh, met, clo]);
                        }
                    }
                }
            }
        }
        g
    }

    /// Values computed offline with pythermalcomfort (ISO 7730-2005 model,
    /// unrounded), for the same grid.
    pub fn external_reference() -> Vec<([f64; 6], f64)> {
        let text = include_str!("../data/pmv_reference_grid.csv");
        text.lines()
            .skip(1)
            .map(|l| {
                let v: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
                ([v[0], v[1], v[2], v[3], v[4], v[5]], v[6])
            })
            .collect()
    }
}

pub mod metrics_oracle {
    /// Weighted F1 straight from the definition, over explicit label lists.
    pub fn weighted_f1(truth: &[i8], pred: &[i8]) -> f64 {
        let n = truth.len() as f64;
        let mut total = 0.0;
        for c in -2..=2i8 {
            let support = truth.iter().filter(|&&t| t == c).count() as f64;
            if support == 0.0 {
                continue;
            }
            let tp = truth.iter().zip(pred).filter(|(&t, &p)| t == c && p == c).count() as f64;
            let predicted = pred.iter().filter(|&&p| p == c).count() as f64;
            let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
            let recall = tp / support;
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            total += support * f1;
        }
        100.0 * total / n
    }

    /// Weighted F1 from a 5x5 count matrix (rows = truth, cols = predicted).
    pub fn weighted_f1_from_counts(counts: &[[usize; 5]; 5]) -> f64 {
        let n: usize = counts.iter().flatten().sum();
        let mut total = 0.0;
        for c in 0..5 {
            let support: usize = counts[c].iter().sum();
            if support == 0 {
                continue;
            }
            let tp = counts[c][c] as f64;
            let predicted: usize = (0..5).map(|r| counts[r][c]).sum();
            let p = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
            let r = tp / support as f64;
            let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            total += support as f64 * f1;
        }
        100.0 * total / n as f64
    }
}

pub mod knn_oracle {
    /// Brute-force k nearest (squared Euclidean; ties to lower index).
    pub fn nearest(train: &[Vec<f64>], q: &[f64], k: usize) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = train
            .iter()
            .enumerate()
            .map(|(i, x)| (x.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        d.into_iter().take(k).map(|(_, i)| i).collect()
    }
}
