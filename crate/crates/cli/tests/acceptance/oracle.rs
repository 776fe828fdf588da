//! Standalone reference scorer used to cross-check the registry.
//!
//! Every model is written here as straight-line arithmetic over primitive
//! floats, taken directly from the formula definitions and sharing no code
//! with the library. Dispatch is by model name string.

pub struct OracleParams {
    pub c: f64,
    pub k1: f64,
    pub b: f64,
    pub k3: f64,
    pub lambda: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            k1: 1.2,
            b: 0.75,
            k3: 8.0,
            lambda: 0.15,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleStats {
    pub tf: f64,
    pub qtf: f64,
    pub l: f64,
    pub avg_l: f64,
    pub n: f64,
    pub tc: f64,
    pub df: f64,
    pub cf: f64,
}

const LOG2E: f64 = std::f64::consts::LOG2_E;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn tfn_of(s: &OracleStats, c: f64) -> f64 {
    s.tf * (1.0 + c * s.avg_l / s.l).log2()
}

fn stirling_info(n: f64, m: f64) -> f64 {
    let m = if m < 0.5 { 0.5 } else { m };
    (m + 0.5) * (n / m).log2() + (n - m) * n.log2()
}

pub fn score(model: &str, s: &OracleStats, p: &OracleParams) -> f64 {
    match model {
        "TF_IDF" => {
            s.qtf
                * (p.k1 * s.tf / (s.tf + p.k1 * ((1.0 - p.b) + p.b * s.l / s.avg_l)))
                * (1.0 + s.n / s.df).log2()
        }
        "BM25" => {
            let big_k = p.k1 * ((1.0 - p.b) + p.b * s.l / s.avg_l);
            ((p.k3 + 1.0) * s.qtf / (p.k3 + s.qtf))
                * ((p.k1 + 1.0) * s.tf / (big_k + s.tf))
                * ((s.n - s.df + 0.5) / (s.df + 0.5)).log2()
        }
        "DFR_BM25" => {
            let big_k = p.k1 * ((1.0 - p.b) + p.b * s.l / s.avg_l);
            ((p.k3 + 1.0) * s.qtf / (p.k3 + s.qtf))
                * ((p.k1 + 1.0) * s.tf / (big_k + s.tf))
                * ((s.n + 1.0) / (s.df + 0.5)).log2()
        }
        "InL2" => {
            let tfn = tfn_of(s, p.c);
            s.qtf * (1.0 / (tfn + 1.0)) * tfn * ((s.n + 1.0) / (s.df + 0.5)).log2()
        }
        "IFB2" => {
            let tfn = tfn_of(s, p.c);
            s.qtf
                * ((s.cf + 1.0) / (s.df * (tfn + 1.0)))
                * tfn
                * ((s.n + 1.0) / (s.cf + 0.5)).log2()
        }
        "In_expC2" => {
            let tfn = tfn_of(s, p.c);
            let n_e = s.n * (1.0 - ((s.n - 1.0) / s.n).powf(s.cf));
            s.qtf * ((s.cf + 1.0) / (s.df * (tfn + 1.0))) * tfn * ((s.n + 1.0) / (n_e + 0.5)).log2()
        }
        "BB2" => {
            let tfn = tfn_of(s, p.c);
            s.qtf
                * ((s.cf + 1.0) / (s.df * (tfn + 1.0)))
                * (-(s.n - 1.0).log2() - LOG2E
                    + stirling_info(s.n + s.cf - 1.0, s.n + s.cf - tfn - 2.0)
                    - stirling_info(s.cf, s.cf - tfn))
        }
        "PL2" => {
            let tfn = tfn_of(s, p.c);
            let lambda = s.cf / s.n;
            s.qtf
                * (1.0 / (tfn + 1.0))
                * (tfn * (tfn / lambda).log2()
                    + (lambda - tfn) * LOG2E
                    + 0.5 * (TWO_PI * tfn).log2())
        }
        "DLH" => {
            let f = (s.tf / s.l).min(1.0 - 1e-9);
            s.qtf / (s.tf + 0.5)
                * (s.tf * ((s.tf * s.avg_l / s.l) * (s.n / s.cf)).log2()
                    + (s.l - s.tf) * (1.0 - f).log2()
                    + 0.5 * (TWO_PI * s.tf * (1.0 - f)).log2())
        }
        "DLH13" => {
            let f = (s.tf / s.l).min(1.0 - 1e-9);
            s.qtf / (s.tf + 0.5)
                * (s.tf * ((s.tf * s.avg_l / s.l) * (s.n / s.cf)).log2()
                    + 0.5 * (TWO_PI * s.tf * (1.0 - f)).log2())
        }
        "DPH" => {
            let f = (s.tf / s.l).min(1.0 - 1e-9);
            s.qtf
                * ((1.0 - f) * (1.0 - f) / (s.tf + 1.0))
                * (s.tf * ((s.tf * s.avg_l / s.l) * (s.n / s.cf)).log2()
                    + 0.5 * (TWO_PI * s.tf * (1.0 - f)).log2())
        }
        "DFRee" => {
            let prior = s.tf / s.l;
            let posterior = (s.tf + 1.0) / (s.l + 1.0);
            let inv_pc = s.tc / s.cf;
            s.qtf
                * (s.tf * (posterior / prior).log2())
                * (s.tf * (-(prior * inv_pc).log2())
                    + (s.tf + 1.0) * (posterior * inv_pc).log2()
                    + 0.5 * (posterior / prior).log2())
        }
        "DFI0" => {
            let expected = s.cf * s.l / s.tc;
            if s.tf <= expected {
                0.0
            } else {
                s.qtf * (1.0 + (s.tf - expected) / expected.sqrt()).log2()
            }
        }
        "Hiemstra_LM" => {
            s.qtf * (1.0 + (p.lambda * s.tf * s.tc) / ((1.0 - p.lambda) * s.cf * s.l)).log2()
        }
        "LGD" => {
            let tfn = tfn_of(s, p.c);
            let lambda = s.df / s.n;
            s.qtf * ((lambda + tfn) / lambda).log2()
        }
        "Js_KLs" => {
            let p_d = s.tf / s.l;
            let p_c = s.cf / s.tc;
            if p_d <= p_c {
                0.0
            } else {
                let mid = (p_d + p_c) / 2.0;
                s.qtf * s.tf * (p_d * (p_d / mid).log2() + p_c * (p_c / mid).log2())
            }
        }
        "XSqrA_M" => {
            let p_d = s.tf / s.l;
            let p_c = s.cf / s.tc;
            if p_d <= p_c {
                0.0
            } else {
                s.qtf * s.l * (p_d - p_c) * (p_d - p_c) / p_c
            }
        }
        other => panic!("oracle has no model named {other}"),
    }
}
