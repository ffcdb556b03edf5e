//! Exact occupation measure of cylinders for the walk on Aff(Q_2) with law
//! `(0,2) @ 1/6, (0,1/2) @ 1/2, (1,1) @ 1/3`, by linear algebra on a
//! truncated chain.
//!
//! `L_n = X_n ... X_1` has the law of `R_n` for each `n`, and `X L` only
//! needs the height `v` of `L` and `w = t 2^-v` modulo `2^K`: homotheties
//! leave `w` fixed and the translation adds `2^-v`. The state keeps
//! `W = w 2^VMAX mod 2^(K + VMAX)` and drops paths that leave
//! `VMIN..=VMAX`; the mass lost that way is below `3^-VMAX`.

pub const UP: f64 = 1.0 / 6.0;
pub const DOWN: f64 = 1.0 / 2.0;
pub const SHIFT: f64 = 1.0 / 3.0;

const K: i64 = 3;
const VMAX: i64 = 12;
const VMIN: i64 = -25;
const MODULUS: usize = 1 << (K + VMAX);
const LEVELS: usize = (VMAX - VMIN + 1) as usize;
/// Fixed-point scale for the dyadic centers.
const SCALE: i64 = 40;
const STOP_MASS: f64 = 1e-12;

/// The disc `center + 2^height Z_2` with `center = num / 2^den_log2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicDisc {
    pub num: i64,
    pub den_log2: u32,
    pub height: i64,
}

impl DyadicDisc {
    pub const fn new(num: i64, den_log2: u32, height: i64) -> Self {
        Self { num, den_log2, height }
    }

    /// Literal accepted by the config vertex grammar.
    pub fn literal(&self) -> String {
        format!(
            "disc(center = {}/{}, height = {})",
            self.num,
            1i64 << self.den_log2,
            self.height
        )
    }

    /// `center * 2^shift * 2^SCALE`.
    fn scaled(&self, shift: i64) -> i128 {
        let e = SCALE + shift - self.den_log2 as i64;
        assert!((0..120).contains(&e), "center out of fixed-point range");
        (self.num as i128) << e
    }
}

/// `o`, its father and grandfather, the sibling of `o`, and the sons and
/// grandsons of `o`: every vertex within distance 2 of `o`.
pub fn ball_around_origin() -> Vec<DyadicDisc> {
    vec![
        DyadicDisc::new(0, 0, 0),
        DyadicDisc::new(0, 0, -1),
        DyadicDisc::new(0, 0, -2),
        DyadicDisc::new(1, 1, 0),
        DyadicDisc::new(0, 0, 1),
        DyadicDisc::new(1, 0, 1),
        DyadicDisc::new(0, 0, 2),
        DyadicDisc::new(2, 0, 2),
        DyadicDisc::new(1, 0, 2),
        DyadicDisc::new(3, 0, 2),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicCylinder {
    pub pairs: Vec<(DyadicDisc, DyadicDisc)>,
}

impl DyadicCylinder {
    pub fn level(&self) -> i64 {
        let (x, y) = self.pairs[0];
        y.height - x.height
    }

    /// Residues `W` for which a state at height `level()` lies in the cylinder.
    fn mask(&self) -> Vec<bool> {
        let v = self.level();
        assert!(self.pairs.iter().all(|(x, y)| y.height - x.height == v), "mixed levels");
        assert!(self.pairs.iter().all(|(x, _)| x.height <= K && x.height > -SCALE));
        (0..MODULUS)
            .map(|w| {
                self.pairs.iter().all(|(x, y)| {
                    // c_x + w - c_y 2^-v vanishes modulo 2^h_x.
                    let r = x.scaled(0) + ((w as i128) << (SCALE - VMAX)) - y.scaled(-v);
                    r.rem_euclid(1i128 << (SCALE + x.height)) == 0
                })
            })
            .collect()
    }
}

/// `V(o -> y)` and `V(y -> o)` for `y` in the ball, and two cylinders with
/// two sources each.
pub fn test_cylinders() -> Vec<DyadicCylinder> {
    let ball = ball_around_origin();
    let o = ball[0];
    let mut out = Vec::new();
    for &y in &ball {
        out.push(DyadicCylinder { pairs: vec![(o, y)] });
        if y != o {
            out.push(DyadicCylinder { pairs: vec![(y, o)] });
        }
    }
    out.push(DyadicCylinder {
        pairs: vec![
            (o, DyadicDisc::new(0, 0, 1)),
            (DyadicDisc::new(0, 0, 1), DyadicDisc::new(0, 0, 2)),
        ],
    });
    out.push(DyadicCylinder {
        pairs: vec![(DyadicDisc::new(0, 0, -1), o), (o, DyadicDisc::new(1, 0, 1))],
    });
    out
}

fn index(v: i64, w: usize) -> usize {
    (v - VMIN) as usize * MODULUS + w
}

/// `sum_{n <= max_steps} P[L_n in f]` for each cylinder; without a step
/// limit, iterates until the surviving mass is below `1e-12`.
pub fn occupation(cylinders: &[DyadicCylinder], max_steps: Option<usize>) -> Vec<f64> {
    let masks: Vec<(i64, Vec<bool>)> = cylinders.iter().map(|c| (c.level(), c.mask())).collect();
    let mut mass = vec![0.0f64; LEVELS * MODULUS];
    mass[index(0, 0)] = 1.0;
    let mut total = vec![0.0f64; cylinders.len()];
    let mut step = 0usize;
    loop {
        for ((v, mask), acc) in masks.iter().zip(total.iter_mut()) {
            if (VMIN..=VMAX).contains(v) {
                let row = &mass[index(*v, 0)..index(*v, 0) + MODULUS];
                *acc += row.iter().zip(mask).filter(|(_, &m)| m).map(|(p, _)| p).sum::<f64>();
            }
        }
        let alive: f64 = mass.iter().sum();
        if max_steps.map_or(alive < STOP_MASS, |m| step >= m) {
            return total;
        }
        let mut next = vec![0.0f64; mass.len()];
        for v in VMIN..=VMAX {
            let shift = if v > -K { 1usize << (VMAX - v) } else { 0 };
            for w in 0..MODULUS {
                let p = mass[index(v, w)];
                if p == 0.0 {
                    continue;
                }
                if v < VMAX {
                    next[index(v + 1, w)] += p * UP;
                }
                if v > VMIN {
                    next[index(v - 1, w)] += p * DOWN;
                }
                next[index(v, (w + shift) % MODULUS)] += p * SHIFT;
            }
        }
        mass = next;
        step += 1;
    }
}
