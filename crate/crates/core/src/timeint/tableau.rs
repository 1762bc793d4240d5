use sha2::{Digest, Sha256};

use super::TimeIntError;

/// Additive Runge-Kutta coefficients. The explicit and implicit halves
/// may carry different weights.
#[derive(Debug, Clone, PartialEq)]
pub struct IMEXTableau {
    pub name: String,
    pub a_exp: Vec<Vec<f64>>,
    pub a_imp: Vec<Vec<f64>>,
    pub b_exp: Vec<f64>,
    pub b_imp: Vec<f64>,
    pub c_exp: Vec<f64>,
    pub c_imp: Vec<f64>,
}

const COND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    pub order: usize,
    pub value: f64,
    pub target: f64,
}

impl Condition {
    pub fn holds(&self) -> bool {
        (self.value - self.target).abs() <= COND_TOL
    }
}

/// Highest order (≤ 3) whose conditions all hold, per part.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub explicit: usize,
    pub implicit: usize,
    pub coupled: usize,
    pub conditions: Vec<Condition>,
}

impl OrderReport {
    pub fn failed(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.holds())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

impl IMEXTableau {
    pub fn stages(&self) -> usize {
        self.b_exp.len()
    }

    /// Checks array shapes and triangularity.
    pub fn check_structure(&self) -> Result<(), TimeIntError> {
        let s = self.stages();
        let bad = |m: &str| Err(TimeIntError::Tableau(format!("{}: {m}", self.name)));
        if s == 0 {
            return bad("no stages");
        }
        let square = |a: &Vec<Vec<f64>>| a.len() == s && a.iter().all(|r| r.len() == s);
        if !square(&self.a_exp) || !square(&self.a_imp) {
            return bad("stage matrices must be square with one row per stage");
        }
        if self.b_imp.len() != s || self.c_exp.len() != s || self.c_imp.len() != s {
            return bad("weight and abscissa vectors must have one entry per stage");
        }
        for i in 0..s {
            for j in 0..s {
                if j >= i && self.a_exp[i][j] != 0.0 {
                    return bad("explicit matrix must be strictly lower triangular");
                }
                if j > i && self.a_imp[i][j] != 0.0 {
                    return bad("implicit matrix must be lower triangular");
                }
            }
        }
        let all = self
            .a_exp
            .iter()
            .chain(&self.a_imp)
            .flatten()
            .chain(&self.b_exp)
            .chain(&self.b_imp)
            .chain(&self.c_exp)
            .chain(&self.c_imp);
        if all.into_iter().any(|v| !v.is_finite()) {
            return bad("non-finite coefficient");
        }
        Ok(())
    }

    /// Classical additive order conditions up to third order.
    pub fn validate(&self) -> Result<OrderReport, TimeIntError> {
        self.check_structure()?;
        let parts = [
            ("E", &self.a_exp, &self.b_exp, &self.c_exp),
            ("I", &self.a_imp, &self.b_imp, &self.c_imp),
        ];
        let mut conditions = Vec::new();
        for (nb, _, b, _) in &parts {
            conditions.push(Condition {
                name: format!("sum b{nb}"),
                order: 1,
                value: b.iter().sum(),
                target: 1.0,
            });
        }
        for (nb, _, b, _) in &parts {
            for (nc, _, _, c) in &parts {
                conditions.push(Condition {
                    name: format!("b{nb}.c{nc}"),
                    order: 2,
                    value: dot(b, c),
                    target: 0.5,
                });
            }
        }
        for (nb, _, b, _) in &parts {
            for (nc, _, _, c) in &parts {
                for (nd, _, _, d) in &parts {
                    let cd: Vec<f64> = c.iter().zip(d.iter()).map(|(x, y)| x * y).collect();
                    conditions.push(Condition {
                        name: format!("b{nb}.(c{nc} c{nd})"),
                        order: 3,
                        value: dot(b, &cd),
                        target: 1.0 / 3.0,
                    });
                }
            }
        }
        for (nb, _, b, _) in &parts {
            for (na, a, _, _) in &parts {
                for (nc, _, _, c) in &parts {
                    conditions.push(Condition {
                        name: format!("b{nb}.A{na}c{nc}"),
                        order: 3,
                        value: dot(b, &matvec(a, c)),
                        target: 1.0 / 6.0,
                    });
                }
            }
        }
        // which parts does a condition touch
        let only = |cond: &Condition, tag: char| {
            let letters: Vec<char> = cond
                .name
                .chars()
                .filter(|ch| *ch == 'E' || *ch == 'I')
                .collect();
            letters.iter().all(|ch| *ch == tag)
        };
        let order_of = |pred: &dyn Fn(&Condition) -> bool| {
            let mut p = 0;
            for k in 1..=3 {
                if conditions.iter().filter(|c| c.order == k && pred(c)).all(Condition::holds) {
                    p = k;
                } else {
                    break;
                }
            }
            p
        };
        let explicit = order_of(&|c| only(c, 'E'));
        let implicit = order_of(&|c| only(c, 'I'));
        let coupled = order_of(&|_| true);
        Ok(OrderReport {
            explicit,
            implicit,
            coupled,
            conditions,
        })
    }

    /// One stage: implicit stage followed by explicit evaluation,
    /// `y1 = y0 + dt f_I(y1)`, `y' = y0 + dt (f_E(y1) + f_I(y1))`.
    pub fn imex_euler() -> Self {
        Self {
            name: "imex-euler".into(),
            a_exp: vec![vec![0.0]],
            a_imp: vec![vec![1.0]],
            b_exp: vec![1.0],
            b_imp: vec![1.0],
            c_exp: vec![0.0],
            c_imp: vec![1.0],
        }
    }

    /// Three-stage (two implicit stages) second-order pair with shared
    /// weights; L-stable implicit part, explicit part has the stability
    /// polynomial of third-order RK.
    pub fn ars232() -> Self {
        let g = 1.0 - 1.0 / 2f64.sqrt();
        let d = -2.0 * 2f64.sqrt() / 3.0;
        Self {
            name: "ars232".into(),
            a_exp: vec![
                vec![0.0, 0.0, 0.0],
                vec![g, 0.0, 0.0],
                vec![d, 1.0 - d, 0.0],
            ],
            a_imp: vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, g, 0.0],
                vec![0.0, 1.0 - g, g],
            ],
            b_exp: vec![0.0, 1.0 - g, g],
            b_imp: vec![0.0, 1.0 - g, g],
            c_exp: vec![0.0, g, 1.0],
            c_imp: vec![0.0, g, 1.0],
        }
    }

    /// Two implicit stages, explicit weights differ from implicit ones.
    pub fn ars222() -> Self {
        let g = 1.0 - 1.0 / 2f64.sqrt();
        let d = 1.0 - 1.0 / (2.0 * g);
        Self {
            name: "ars222".into(),
            a_exp: vec![
                vec![0.0, 0.0, 0.0],
                vec![g, 0.0, 0.0],
                vec![d, 1.0 - d, 0.0],
            ],
            a_imp: vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, g, 0.0],
                vec![0.0, 1.0 - g, g],
            ],
            b_exp: vec![d, 1.0 - d, 0.0],
            b_imp: vec![0.0, 1.0 - g, g],
            c_exp: vec![0.0, g, 1.0],
            c_imp: vec![0.0, g, 1.0],
        }
    }

    /// Purely explicit tableau (implicit half zero).
    pub fn explicit_only(name: &str, a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        let s = b.len();
        let c: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
        Self {
            name: name.into(),
            a_exp: a,
            a_imp: vec![vec![0.0; s]; s],
            b_exp: b.clone(),
            b_imp: b,
            c_exp: c.clone(),
            c_imp: c,
        }
    }

    /// Three-stage strong-stability-preserving RK, explicit only.
    pub fn ssprk3() -> Self {
        Self::explicit_only(
            "ssprk3",
            vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.25, 0.25, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
        )
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "imex-euler" => Some(Self::imex_euler()),
            "ars232" => Some(Self::ars232()),
            "ars222" => Some(Self::ars222()),
            "ssprk3" => Some(Self::ssprk3()),
            _ => None,
        }
    }

    pub const BUILTIN_NAMES: [&'static str; 4] = ["imex-euler", "ars232", "ars222", "ssprk3"];

    /// Tableau file text; see [`Self::from_text`].
    pub fn to_text(&self) -> String {
        let row = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let mut body = String::new();
        body.push_str("# nhslice imex tableau v1\n");
        body.push_str(&format!("name {}\n", self.name));
        body.push_str(&format!("stages {}\n", self.stages()));
        body.push_str("a_exp\n");
        for r in &self.a_exp {
            body.push_str(&row(r));
            body.push('\n');
        }
        body.push_str("a_imp\n");
        for r in &self.a_imp {
            body.push_str(&row(r));
            body.push('\n');
        }
        body.push_str(&format!("b_exp {}\n", row(&self.b_exp)));
        body.push_str(&format!("b_imp {}\n", row(&self.b_imp)));
        body.push_str(&format!("c_exp {}\n", row(&self.c_exp)));
        body.push_str(&format!("c_imp {}\n", row(&self.c_imp)));
        let sum = hex(&Sha256::digest(body.as_bytes()));
        body.push_str(&format!("checksum {sum}\n"));
        body
    }

    /// Parses the tableau file format:
    ///
    /// ```text
    /// # nhslice imex tableau v1
    /// name <label>
    /// stages <s>
    /// a_exp
    /// <s rows of s numbers>
    /// a_imp
    /// <s rows of s numbers>
    /// b_exp <s numbers>
    /// b_imp <s numbers>
    /// c_exp <s numbers>
    /// c_imp <s numbers>
    /// checksum <sha256 hex of every preceding byte>
    /// ```
    pub fn from_text(text: &str) -> Result<Self, TimeIntError> {
        let bad = |m: &str| TimeIntError::Tableau(m.to_string());
        let pos = text.rfind("checksum ").ok_or_else(|| bad("missing checksum line"))?;
        let (body, tail) = text.split_at(pos);
        let want = tail["checksum ".len()..].trim();
        if hex(&Sha256::digest(body.as_bytes())) != want {
            return Err(bad("checksum mismatch"));
        }
        let mut lines = body.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("# nhslice imex tableau v1") {
            return Err(bad("missing header"));
        }
        let keyed = |key: &str, lines: &mut dyn Iterator<Item = &str>| -> Result<String, TimeIntError> {
            let l = lines.next().ok_or_else(|| bad("truncated file"))?;
            l.strip_prefix(key)
                .map(|r| r.trim().to_string())
                .ok_or_else(|| bad(&format!("expected `{key}`")))
        };
        let nums = |s: &str| -> Result<Vec<f64>, TimeIntError> {
            s.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad("bad number")))
                .collect()
        };
        let name = keyed("name", &mut lines)?;
        let stages: usize = keyed("stages", &mut lines)?
            .parse()
            .map_err(|_| bad("bad stage count"))?;
        let matrix = |key: &str, lines: &mut dyn Iterator<Item = &str>| -> Result<Vec<Vec<f64>>, TimeIntError> {
            if keyed(key, lines)? != "" {
                return Err(bad("matrix header takes no values"));
            }
            (0..stages)
                .map(|_| nums(lines.next().ok_or_else(|| bad("truncated matrix"))?))
                .collect()
        };
        let a_exp = matrix("a_exp", &mut lines)?;
        let a_imp = matrix("a_imp", &mut lines)?;
        let b_exp = nums(&keyed("b_exp", &mut lines)?)?;
        let b_imp = nums(&keyed("b_imp", &mut lines)?)?;
        let c_exp = nums(&keyed("c_exp", &mut lines)?)?;
        let c_imp = nums(&keyed("c_imp", &mut lines)?)?;
        if lines.next().is_some() {
            return Err(bad("trailing content"));
        }
        let t = Self {
            name,
            a_exp,
            a_imp,
            b_exp,
            b_imp,
            c_exp,
            c_imp,
        };
        if t.stages() != stages {
            return Err(bad("stage count mismatch"));
        }
        t.check_structure()?;
        Ok(t)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
