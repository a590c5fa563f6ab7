//! Adaptive Gauss–Kronrod quadrature in one and two dimensions.
//!
//! Refinement proceeds in rounds: every round bisects each cell whose error
//! is within a fixed factor of the largest one, evaluates the new cells in
//! parallel, and sums cell values in a fixed pairwise order. Results are
//! therefore independent of the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Cells with error at least this fraction of the largest are bisected.
const SPLIT_FRACTION: f64 = 0.1;

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Kronrod 21-point abscissae on `[0, 1]`, descending; odd indices are the
/// 10-point Gauss nodes.
const XK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_614,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Kronrod 15-point rule, with the embedded 7-point Gauss rule at odd
/// indices.
const XK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526,
    0.949_107_912_342_758_524_526_189_684_048,
    0.864_864_423_359_769_072_789_712_788_641,
    0.741_531_185_599_394_439_863_864_773_281,
    0.586_087_235_467_691_130_294_144_845_694,
    0.405_845_151_377_397_166_906_606_412_077,
    0.207_784_955_007_898_467_600_689_403_773,
    0.0,
];
const WK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_059,
    0.063_092_092_629_978_553_290_700_663_189,
    0.104_790_010_322_250_183_839_876_322_542,
    0.140_653_259_715_525_918_745_189_590_510,
    0.169_004_726_639_267_902_826_583_426_599,
    0.190_350_578_064_785_409_913_256_402_421,
    0.204_432_940_075_298_892_414_161_999_235,
    0.209_482_141_084_727_828_012_999_174_892,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679,
    0.279_705_391_489_276_667_901_467_771_424,
    0.381_830_050_505_118_944_950_369_775_489,
    0.417_959_183_673_469_387_755_102_040_816,
];

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Convergence controls: stop when `error <= max(abs_tol, rel_tol |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_evaluations: 2_000_000,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod21<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut rk = WK21[10] * fc;
    let mut rg = 0.0;
    let mut rabs = rk.abs();
    let mut fv = [(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = h * XK21[j];
        let (f1, f2) = (f(c - dx)?, f(c + dx)?);
        fv[j] = (f1, f2);
        rk += WK21[j] * (f1 + f2);
        rabs += WK21[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG10[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut rasc = WK21[10] * (fc - mean).abs();
    for j in 0..10 {
        rasc += WK21[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    Ok(Segment {
        a,
        b,
        value: rk * h,
        error: quadpack_error((rk - rg) * h, rasc * h.abs(), rabs * h.abs()),
    })
}

fn quadpack_error(diff: f64, resasc: f64, resabs: f64) -> f64 {
    let mut err = diff.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

/// Adaptive 21-point Gauss–Kronrod integration of `f` over `[a, b]` with
/// the given interior breakpoints.
pub fn integrate<F>(f: &F, a: f64, b: f64, breakpoints: &[f64], tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParameter(format!(
            "bad integration interval [{a}, {b}]"
        )));
    }
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);
    let cells: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let mut segs = eval_segments(f, &cells)?;
    let mut evaluations = 21 * segs.len();
    loop {
        let value = pairwise_sum(&segs.iter().map(|s| s.value).collect::<Vec<_>>());
        let error = pairwise_sum(&segs.iter().map(|s| s.error).collect::<Vec<_>>());
        let target = tol.target(value);
        if error <= target {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        if evaluations >= tol.max_evaluations {
            return Err(Error::QuadratureNotConverged {
                value,
                error,
                evaluations,
            });
        }
        let cut = SPLIT_FRACTION * max_of(segs.iter().map(|s| s.error));
        let mut split = Vec::new();
        let mut keep = Vec::with_capacity(segs.len());
        for s in &segs {
            let mid = 0.5 * (s.a + s.b);
            if s.error >= cut && mid > s.a && mid < s.b {
                keep.push(None);
                split.push((s.a, mid));
                split.push((mid, s.b));
            } else {
                keep.push(Some(*s));
            }
        }
        if split.is_empty() {
            return Err(Error::QuadratureNotConverged {
                value,
                error,
                evaluations,
            });
        }
        let fresh = eval_segments(f, &split)?;
        evaluations += 21 * fresh.len();
        let mut fresh = fresh.into_iter();
        let mut next = Vec::with_capacity(segs.len() + split.len() / 2);
        for k in keep {
            match k {
                Some(s) => next.push(s),
                None => {
                    next.push(fresh.next().expect("left half"));
                    next.push(fresh.next().expect("right half"));
                }
            }
        }
        segs = next;
    }
}

fn eval_segments<F>(f: &F, cells: &[(f64, f64)]) -> Result<Vec<Segment>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    cells.par_iter().map(|&(a, b)| kronrod21(f, a, b)).collect()
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    x: (f64, f64),
    y: (f64, f64),
    value: f64,
    err_x: f64,
    err_y: f64,
}

impl Cell {
    fn error(&self) -> f64 {
        self.err_x + self.err_y
    }

    fn area(&self) -> f64 {
        (self.x.1 - self.x.0) * (self.y.1 - self.y.0)
    }
}

/// The 15 Kronrod nodes on `[-1, 1]` with Kronrod and Gauss weights
/// (Gauss weight 0 off the Gauss nodes).
fn rule15() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for j in 0..7 {
        let g = if j % 2 == 1 { WG7[j / 2] } else { 0.0 };
        out[j] = (-XK15[j], WK15[j], g);
        out[14 - j] = (XK15[j], WK15[j], g);
    }
    out[7] = (0.0, WK15[7], WG7[3]);
    out
}

fn kronrod15_2d<F>(f: &F, x: (f64, f64), y: (f64, f64)) -> Result<Cell>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let rule = rule15();
    let (cx, hx) = (0.5 * (x.0 + x.1), 0.5 * (x.1 - x.0));
    let (cy, hy) = (0.5 * (y.0 + y.1), 0.5 * (y.1 - y.0));
    let mut kk = 0.0;
    let mut gk = 0.0;
    let mut kg = 0.0;
    let mut abs = 0.0;
    for &(u, wku, wgu) in &rule {
        for &(v, wkv, wgv) in &rule {
            let fv = f(cx + hx * u, cy + hy * v)?;
            kk += wku * wkv * fv;
            gk += wgu * wkv * fv;
            kg += wku * wgv * fv;
            abs += wku * wkv * fv.abs();
        }
    }
    let jac = hx * hy;
    let floor = 50.0 * f64::EPSILON * abs * jac.abs();
    Ok(Cell {
        x,
        y,
        value: kk * jac,
        err_x: ((kk - gk) * jac).abs().max(floor),
        err_y: ((kk - kg) * jac).abs(),
    })
}

/// Adaptive tensor-product Gauss–Kronrod (7/15) integration of `f(x, y)`
/// over a rectangle, starting from the grid given by the breakpoints.
/// Cells are bisected along the direction with the larger error estimate.
pub fn integrate_2d<F>(f: &F, x_edges: &[f64], y_edges: &[f64], tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let check = |e: &[f64]| {
        e.len() >= 2 && e.windows(2).all(|w| w[0] < w[1]) && e.iter().all(|v| v.is_finite())
    };
    if !check(x_edges) || !check(y_edges) {
        return Err(Error::InvalidParameter(
            "2-D integration edges must be finite and increasing".into(),
        ));
    }
    let mut boxes = Vec::new();
    for xs in x_edges.windows(2) {
        for ys in y_edges.windows(2) {
            boxes.push(((xs[0], xs[1]), (ys[0], ys[1])));
        }
    }
    let mut cells = eval_cells(f, &boxes)?;
    let mut evaluations = 225 * cells.len();
    loop {
        let value = pairwise_sum(&cells.iter().map(|c| c.value).collect::<Vec<_>>());
        let error = pairwise_sum(&cells.iter().map(Cell::error).collect::<Vec<_>>());
        let target = tol.target(value);
        if error <= target {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        if evaluations >= tol.max_evaluations {
            return Err(Error::QuadratureNotConverged {
                value,
                error,
                evaluations,
            });
        }
        let cut = SPLIT_FRACTION * max_of(cells.iter().map(Cell::error));
        let mut split = Vec::new();
        let mut keep = Vec::with_capacity(cells.len());
        for c in &cells {
            if c.error() >= cut && c.area() > 0.0 {
                keep.push(None);
                if c.err_x >= c.err_y {
                    let m = 0.5 * (c.x.0 + c.x.1);
                    split.push(((c.x.0, m), c.y));
                    split.push(((m, c.x.1), c.y));
                } else {
                    let m = 0.5 * (c.y.0 + c.y.1);
                    split.push((c.x, (c.y.0, m)));
                    split.push((c.x, (m, c.y.1)));
                }
            } else {
                keep.push(Some(*c));
            }
        }
        if split.is_empty() {
            return Err(Error::QuadratureNotConverged {
                value,
                error,
                evaluations,
            });
        }
        let fresh = eval_cells(f, &split)?;
        evaluations += 225 * fresh.len();
        let mut fresh = fresh.into_iter();
        let mut next = Vec::with_capacity(cells.len() + split.len() / 2);
        for k in keep {
            match k {
                Some(c) => next.push(c),
                None => {
                    next.push(fresh.next().expect("first half"));
                    next.push(fresh.next().expect("second half"));
                }
            }
        }
        cells = next;
    }
}

/// `((x0, x1), (y0, y1))`.
type Rect = ((f64, f64), (f64, f64));

fn eval_cells<F>(f: &F, boxes: &[Rect]) -> Result<Vec<Cell>>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    boxes
        .par_iter()
        .map(|&(x, y)| kronrod15_2d(f, x, y))
        .collect()
}
