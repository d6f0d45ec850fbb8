//! Periodic orthonormal Daubechies wavelets on square power-of-two images.
//!
//! Coefficients are L² inner products `<psi_lambda, f>` with L²-normalised
//! basis functions, so `sum c² = ||f||²_{L²}` and a constant `c` on a 2x2
//! Haar image gives the scaling coefficient `2·c·dx`.
//!
//! Levels are numbered `j = 1..J` from the coarsest detail band to the
//! finest; the scaling block sits at `j = 0`. Orientation `1` is
//! `psi(x)·phi(y)`, `2` is `phi(x)·psi(y)`, `3` is `psi(x)·psi(y)`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{PatError, Result};
use crate::grid::{Field, Grid2D, ImageField};
use crate::par;

/// Low-pass analysis taps, `sum h = sqrt 2`. Index = number of vanishing moments.
const DB_TAPS: [&[f64]; 10] = [
    &[0.7071067811865475244, 0.7071067811865475244],
    &[
        0.48296291314453414337,
        0.83651630373780790558,
        0.22414386804201338103,
        -0.12940952255126038117,
    ],
    &[
        0.332670552950082616,
        0.80689150931109257649,
        0.4598775021184915701,
        -0.1350110200102545887,
        -0.085441273882026661693,
        0.035226291885709536603,
    ],
    &[
        0.23037781330889650086,
        0.71484657055291564709,
        0.63088076792985890788,
        -0.027983769416859854211,
        -0.18703481171909308408,
        0.030841381835560763627,
        0.032883011666885199735,
        -0.010597401785069032105,
    ],
    &[
        0.16010239797419291448,
        0.60382926979718967054,
        0.72430852843777292773,
        0.13842814590132073151,
        -0.24229488706638203186,
        -0.032244869584638374648,
        0.077571493840045713523,
        -0.0062414902127982742742,
        -0.012580751999081999469,
        0.003335725285473771278,
    ],
    &[
        0.11154074335010946362,
        0.49462389039845308568,
        0.75113390802109535068,
        0.31525035170919762909,
        -0.22626469396543982008,
        -0.12976686756726193556,
        0.097501605587323049102,
        0.027522865530305728626,
        -0.031582039317486029565,
        0.00055384220116149613925,
        0.0047772575109455106396,
        -0.0010773010853084795649,
    ],
    &[
        0.07785205408500917902,
        0.39653931948191730654,
        0.72913209084623511992,
        0.46978228740519312247,
        -0.14390600392856497541,
        -0.22403618499387498264,
        0.071309219266830264751,
        0.080612609151083071913,
        -0.03802993693501441358,
        -0.016574541630666880654,
        0.012550998556099840613,
        0.00042957797292136652113,
        -0.0018016407040474909153,
        0.00035371379997452024845,
    ],
    &[
        0.054415842243104009955,
        0.31287159091429997066,
        0.67563073629728980681,
        0.58535468365420671277,
        -0.015829105256349305667,
        -0.28401554296154692652,
        0.00047248457391328277036,
        0.12874742662047845886,
        -0.01736930100180754617,
        -0.044088253930794751507,
        0.013981027917398281649,
        0.0087460940474057767164,
        -0.0048703529934515743104,
        -0.0003917403733769470463,
        0.00067544940645056936637,
        -0.00011747678412476953373,
    ],
    &[
        0.038077947363878346589,
        0.24383467461259035373,
        0.6048231236901111119,
        0.65728807805130053808,
        0.13319738582500757619,
        -0.29327378327917490881,
        -0.096840783222976460514,
        0.14854074933810638014,
        0.030725681479333379212,
        -0.067632829061329973676,
        0.00025094711483145195759,
        0.022361662123679097205,
        -0.0047232047577513972779,
        -0.0042815036824634298345,
        0.0018476468830562264766,
        0.00023038576352319596721,
        -0.00025196318894271013697,
        0.000039347320316271599481,
    ],
    &[
        0.026670057900555553587,
        0.18817680007769148902,
        0.52720118893172558648,
        0.68845903945360356574,
        0.28117234366057746075,
        -0.24984642432731537942,
        -0.1959462743773770435,
        0.12736934033579326008,
        0.09305736460357235116,
        -0.071394147166397087145,
        -0.029457536821875812858,
        0.03321267405934100174,
        0.0036065535669561696554,
        -0.010733175483330575044,
        0.0013953517470529011658,
        0.0019924052951850561172,
        -0.00068585669495971162656,
        -0.00011646685512928545095,
        0.000093588670320069591334,
        -0.000013264202894521244812,
    ],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveletFamily {
    Haar,
    /// Daubechies wavelet with the given number of vanishing moments (2..=10).
    Daubechies(u8),
}

impl WaveletFamily {
    pub fn vanishing_moments(&self) -> usize {
        match self {
            WaveletFamily::Haar => 1,
            WaveletFamily::Daubechies(n) => *n as usize,
        }
    }

    /// Parses `haar` or `dbN`.
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        if lower == "haar" || lower == "db1" {
            return Ok(WaveletFamily::Haar);
        }
        match lower.strip_prefix("db").and_then(|n| n.parse::<u8>().ok()) {
            Some(n) if (2..=10).contains(&n) => Ok(WaveletFamily::Daubechies(n)),
            _ => Err(PatError::InvalidParams(format!("unknown wavelet family {name:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            WaveletFamily::Haar => "haar".into(),
            WaveletFamily::Daubechies(n) => format!("db{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    pub levels: usize,
    pub boundary: Boundary,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl WaveletSpec {
    /// Builds the filter pair and checks `sum h = sqrt 2` and
    /// `sum h_k h_{k+2m} = delta_m` to 1e-12.
    pub fn new(family: WaveletFamily, levels: usize) -> Result<Self> {
        let n = family.vanishing_moments();
        if !(1..=10).contains(&n) {
            return Err(PatError::InvalidParams(format!(
                "Daubechies order {n} outside 1..=10"
            )));
        }
        if levels == 0 {
            return Err(PatError::InvalidParams("wavelet levels must be positive".into()));
        }
        let lowpass = DB_TAPS[n - 1].to_vec();
        check_filter(&lowpass)?;
        let len = lowpass.len();
        let highpass = (0..len)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * lowpass[len - 1 - m]
            })
            .collect();
        Ok(Self {
            family,
            levels,
            boundary: Boundary::Periodic,
            lowpass,
            highpass,
        })
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    /// Largest admissible depth for an `n x n` image: the scaling block keeps
    /// at least 2x2 samples, except for Haar which may go down to 1x1.
    pub fn max_levels(&self, n: usize) -> usize {
        let full = n.trailing_zeros() as usize;
        match self.family {
            WaveletFamily::Haar => full,
            WaveletFamily::Daubechies(_) => full.saturating_sub(1),
        }
    }

    /// Image side if `grid` is square with enough dyadic levels.
    pub fn check_grid(&self, grid: &Grid2D) -> Result<usize> {
        if grid.n_x != grid.n_y {
            return Err(PatError::ShapeMismatch(format!(
                "wavelet transform needs a square image, got {}x{}",
                grid.n_x, grid.n_y
            )));
        }
        let max = self.max_levels(grid.n_x);
        if self.levels > max {
            return Err(PatError::DepthTooLarge {
                levels: self.levels,
                max,
            });
        }
        Ok(grid.n_x)
    }
}

fn check_filter(h: &[f64]) -> Result<()> {
    let sum: f64 = h.iter().sum();
    if (sum - std::f64::consts::SQRT_2).abs() > 1e-12 {
        return Err(PatError::InvalidParams(format!("filter sum {sum} != sqrt 2")));
    }
    for m in 0..h.len() / 2 {
        let acc: f64 = (0..h.len() - 2 * m).map(|k| h[k] * h[k + 2 * m]).sum();
        let want = if m == 0 { 1.0 } else { 0.0 };
        if (acc - want).abs() > 1e-12 {
            return Err(PatError::InvalidParams(format!(
                "filter not orthonormal at shift {m}: {acc}"
            )));
        }
    }
    Ok(())
}

/// Position of one basis function in the pyramid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WaveletIndex {
    /// 0 for the scaling block, otherwise `1..=J` (coarse to fine).
    pub level: usize,
    /// 0 for the scaling block, otherwise 1, 2 or 3.
    pub orientation: u8,
    pub kx: usize,
    pub ky: usize,
}

impl WaveletIndex {
    pub fn coarse(kx: usize, ky: usize) -> Self {
        Self {
            level: 0,
            orientation: 0,
            kx,
            ky,
        }
    }

    pub fn detail(level: usize, orientation: u8, kx: usize, ky: usize) -> Self {
        Self {
            level,
            orientation,
            kx,
            ky,
        }
    }
}

/// Multi-level coefficient tree of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    spec: WaveletSpec,
    grid: Grid2D,
    pub coarse: Array2<f64>,
    /// `details[j - 1]` holds the three orientation bands of level `j`.
    pub details: Vec<[Array2<f64>; 3]>,
}

impl WaveletPyramid {
    pub fn zeros(grid: Grid2D, spec: &WaveletSpec) -> Result<Self> {
        let n = spec.check_grid(&grid)?;
        let c = n >> spec.levels;
        let details = (1..=spec.levels)
            .map(|j| {
                let s = c << (j - 1);
                [Array2::zeros((s, s)), Array2::zeros((s, s)), Array2::zeros((s, s))]
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            grid,
            coarse: Array2::zeros((c, c)),
            details,
        })
    }

    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Side length of the band at `level` (the scaling block for 0).
    pub fn band_size(&self, level: usize) -> usize {
        let c = self.coarse.nrows();
        if level == 0 {
            c
        } else {
            c << (level - 1)
        }
    }

    pub fn len(&self) -> usize {
        self.coarse.len() + self.details.iter().map(|d| 3 * d[0].len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn band(&self, level: usize, orientation: u8) -> Result<&Array2<f64>> {
        match (level, orientation) {
            (0, 0) => Ok(&self.coarse),
            (l, o) if l >= 1 && l <= self.levels() && (1..=3).contains(&o) => {
                Ok(&self.details[l - 1][(o - 1) as usize])
            }
            _ => Err(PatError::InvalidIndex(format!(
                "level {level}, orientation {orientation}"
            ))),
        }
    }

    fn band_mut(&mut self, level: usize, orientation: u8) -> Result<&mut Array2<f64>> {
        let levels = self.levels();
        match (level, orientation) {
            (0, 0) => Ok(&mut self.coarse),
            (l, o) if l >= 1 && l <= levels && (1..=3).contains(&o) => {
                Ok(&mut self.details[l - 1][(o - 1) as usize])
            }
            _ => Err(PatError::InvalidIndex(format!(
                "level {level}, orientation {orientation}"
            ))),
        }
    }

    pub fn get(&self, idx: WaveletIndex) -> Result<f64> {
        let band = self.band(idx.level, idx.orientation)?;
        band.get((idx.kx, idx.ky))
            .copied()
            .ok_or_else(|| PatError::InvalidIndex(format!("{idx:?} out of range")))
    }

    pub fn set(&mut self, idx: WaveletIndex, value: f64) -> Result<()> {
        let band = self.band_mut(idx.level, idx.orientation)?;
        let slot = band
            .get_mut((idx.kx, idx.ky))
            .ok_or_else(|| PatError::InvalidIndex(format!("{idx:?} out of range")))?;
        *slot = value;
        Ok(())
    }

    /// Visits `(level, value)` in flat order: scaling block, then each level
    /// from coarse to fine with orientations 1, 2, 3.
    pub fn iter_levels(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let coarse = self.coarse.iter().map(|&v| (0, v));
        let details = self.details.iter().enumerate().flat_map(|(j, bands)| {
            bands.iter().flat_map(move |b| b.iter().map(move |&v| (j + 1, v)))
        });
        coarse.chain(details)
    }

    /// Applies `f(level, value)` to every coefficient in place.
    pub fn map_inplace(&mut self, mut f: impl FnMut(usize, f64) -> f64) {
        self.coarse.mapv_inplace(|v| f(0, v));
        for (j, bands) in self.details.iter_mut().enumerate() {
            for b in bands.iter_mut() {
                b.mapv_inplace(|v| f(j + 1, v));
            }
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.iter_levels().map(|(_, v)| v).collect()
    }

    pub fn from_flat(grid: Grid2D, spec: &WaveletSpec, flat: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(grid, spec)?;
        if flat.len() != p.len() {
            return Err(PatError::ShapeMismatch(format!(
                "flat coefficient vector has {} entries, pyramid needs {}",
                flat.len(),
                p.len()
            )));
        }
        let mut it = flat.iter();
        p.map_inplace(|_, _| *it.next().unwrap());
        Ok(p)
    }

    /// `(level, orientation, offset, length)` of every band in flat order.
    pub fn band_layout(&self) -> Vec<(usize, u8, usize, usize)> {
        let mut out = vec![(0, 0, 0, self.coarse.len())];
        let mut offset = self.coarse.len();
        for (j, bands) in self.details.iter().enumerate() {
            for (o, b) in bands.iter().enumerate() {
                out.push((j + 1, o as u8 + 1, offset, b.len()));
                offset += b.len();
            }
        }
        out
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.iter_levels()
            .zip(other.iter_levels())
            .map(|((_, a), (_, b))| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.iter_levels().map(|(_, v)| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.iter_levels().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.map_inplace(|_, v| c * v);
        out
    }

    /// Every valid index, in flat order.
    pub fn indices(&self) -> Vec<WaveletIndex> {
        let c = self.coarse.nrows();
        let mut out = Vec::with_capacity(self.len());
        for kx in 0..c {
            for ky in 0..c {
                out.push(WaveletIndex::coarse(kx, ky));
            }
        }
        for j in 1..=self.levels() {
            let s = self.band_size(j);
            for o in 1..=3u8 {
                for kx in 0..s {
                    for ky in 0..s {
                        out.push(WaveletIndex::detail(j, o, kx, ky));
                    }
                }
            }
        }
        out
    }
}

/// One periodic analysis step: `out[..n/2]` approximation, `out[n/2..]` detail.
fn analysis_1d(x: &[f64], lo: &[f64], hi: &[f64], out: &mut [f64]) {
    let n = x.len();
    let half = n / 2;
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (m, (&l, &h)) in lo.iter().zip(hi).enumerate() {
            let v = x[(2 * k + m) % n];
            a += l * v;
            d += h * v;
        }
        out[k] = a;
        out[half + k] = d;
    }
}

/// Exact transpose of [`analysis_1d`].
fn synthesis_1d(c: &[f64], lo: &[f64], hi: &[f64], out: &mut [f64]) {
    let n = c.len();
    let half = n / 2;
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..half {
        let a = c[k];
        let d = c[half + k];
        for (m, (&l, &h)) in lo.iter().zip(hi).enumerate() {
            out[(2 * k + m) % n] += l * a + h * d;
        }
    }
}

fn transpose(src: &[f64], n: usize) -> Vec<f64> {
    let mut dst = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            dst[k * n + i] = src[i * n + k];
        }
    }
    dst
}

/// Applies `step` along both axes of a row-major `s x s` block.
fn separable(block: &[f64], s: usize, step: &(dyn Fn(&[f64], &mut [f64]) + Sync)) -> Vec<f64> {
    // rows are contiguous along y
    let mut along_y = vec![0.0; s * s];
    par::for_each_chunk(&mut along_y, s, |i, row| step(&block[i * s..(i + 1) * s], row));
    let t = transpose(&along_y, s);
    let mut along_x = vec![0.0; s * s];
    par::for_each_chunk(&mut along_x, s, |k, row| step(&t[k * s..(k + 1) * s], row));
    transpose(&along_x, s)
}

/// Orthonormal analysis; coefficients are L² inner products with the basis.
pub fn dwt2_forward(f: &ImageField, spec: &WaveletSpec) -> Result<WaveletPyramid> {
    let grid = *f.grid();
    let n = spec.check_grid(&grid)?;
    let lo = spec.lowpass();
    let hi = spec.highpass();
    let mut buf: Vec<f64> = f.values().iter().map(|v| v * grid.delta_x).collect();
    let mut pyr = WaveletPyramid::zeros(grid, spec)?;
    let mut s = n;
    for j in (1..=spec.levels).rev() {
        let block: Vec<f64> = (0..s)
            .flat_map(|i| buf[i * n..i * n + s].iter().copied())
            .collect();
        let out = separable(&block, s, &|x, o| analysis_1d(x, lo, hi, o));
        let h = s / 2;
        let bands = &mut pyr.details[j - 1];
        for i in 0..s {
            for k in 0..s {
                let v = out[i * s + k];
                match (i < h, k < h) {
                    (true, true) => buf[i * n + k] = v,
                    (false, true) => bands[0][[i - h, k]] = v,
                    (true, false) => bands[1][[i, k - h]] = v,
                    (false, false) => bands[2][[i - h, k - h]] = v,
                }
            }
        }
        s = h;
    }
    for i in 0..s {
        for k in 0..s {
            pyr.coarse[[i, k]] = buf[i * n + k];
        }
    }
    Ok(pyr)
}

/// Synthesis `W*`; inverse of [`dwt2_forward`] and its L² adjoint.
pub fn dwt2_inverse(p: &WaveletPyramid) -> Result<ImageField> {
    let grid = *p.grid();
    let n = p.spec.check_grid(&grid)?;
    let c = n >> p.spec.levels;
    if p.coarse.dim() != (c, c) || p.details.len() != p.spec.levels {
        return Err(PatError::ShapeMismatch("pyramid does not match its spec".into()));
    }
    let lo = p.spec.lowpass();
    let hi = p.spec.highpass();
    let mut buf = vec![0.0; n * n];
    for i in 0..c {
        for k in 0..c {
            buf[i * n + k] = p.coarse[[i, k]];
        }
    }
    let mut h = c;
    for j in 1..=p.spec.levels {
        let bands = &p.details[j - 1];
        if bands.iter().any(|b| b.dim() != (h, h)) {
            return Err(PatError::ShapeMismatch(format!("band size at level {j}")));
        }
        let s = 2 * h;
        let mut block = vec![0.0; s * s];
        for i in 0..s {
            for k in 0..s {
                block[i * s + k] = match (i < h, k < h) {
                    (true, true) => buf[i * n + k],
                    (false, true) => bands[0][[i - h, k]],
                    (true, false) => bands[1][[i, k - h]],
                    (false, false) => bands[2][[i - h, k - h]],
                };
            }
        }
        let out = separable(&block, s, &|x, o| synthesis_1d(x, lo, hi, o));
        for i in 0..s {
            buf[i * n..i * n + s].copy_from_slice(&out[i * s..(i + 1) * s]);
        }
        h = s;
    }
    let inv = 1.0 / grid.delta_x;
    let values = Array2::from_shape_vec((n, n), buf.into_iter().map(|v| v * inv).collect())
        .map_err(|e| PatError::ShapeMismatch(e.to_string()))?;
    ImageField::new(grid, values)
}

/// The basis image `psi_lambda` (unit L² norm).
pub fn basis_image(grid: Grid2D, spec: &WaveletSpec, idx: WaveletIndex) -> Result<ImageField> {
    let mut p = WaveletPyramid::zeros(grid, spec)?;
    p.set(idx, 1.0)?;
    dwt2_inverse(&p)
}

/// Besov sequence norm `(sum_j 2^{j s q} ||c_j||_{l^pp}^q)^{1/q}` with
/// `s = r + d/2 - d/pp`; the scaling block enters as level 0.
pub fn besov_norm(p: &WaveletPyramid, r: f64, pp: f64, q: f64, d: usize) -> Result<f64> {
    if !(pp >= 1.0 && q >= 1.0) || r < 0.0 || !r.is_finite() {
        return Err(PatError::InvalidParams(format!(
            "Besov parameters need pp, q >= 1 and r >= 0 (got pp={pp}, q={q}, r={r})"
        )));
    }
    let s = r + d as f64 / 2.0 - d as f64 / pp;
    let lp = |vals: &mut dyn Iterator<Item = f64>| -> f64 {
        vals.map(|v| v.abs().powf(pp)).sum::<f64>().powf(1.0 / pp)
    };
    let mut total = lp(&mut p.coarse.iter().copied()).powf(q);
    for (j, bands) in p.details.iter().enumerate() {
        let level = (j + 1) as f64;
        let norm = lp(&mut bands.iter().flat_map(|b| b.iter().copied()));
        total += (2f64).powf(level * s * q) * norm.powf(q);
    }
    Ok(total.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> ImageField {
        let g = Grid2D::new(n, n, 2, 1.0 / n as f64, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn all_filters_validate() {
        assert!(WaveletSpec::new(WaveletFamily::Haar, 1).is_ok());
        for n in 2..=10 {
            let spec = WaveletSpec::new(WaveletFamily::Daubechies(n), 1).unwrap();
            assert_eq!(spec.lowpass().len(), 2 * n as usize);
        }
        assert!(WaveletSpec::new(WaveletFamily::Daubechies(11), 1).is_err());
    }

    #[test]
    fn haar_constant_2x2() {
        let g = Grid2D::new(2, 2, 2, 0.5, 0.5).unwrap();
        let f = ImageField::from_fn(g, |_, _| 3.0).unwrap();
        let spec = WaveletSpec::new(WaveletFamily::Haar, 1).unwrap();
        let p = dwt2_forward(&f, &spec).unwrap();
        assert!((p.coarse[[0, 0]] - 2.0 * 3.0 * 0.5).abs() < 1e-14);
        assert!(p.details[0].iter().all(|b| b[[0, 0]].abs() < 1e-14));
        let spec2 = WaveletSpec::new(WaveletFamily::Haar, 2).unwrap();
        assert!(matches!(dwt2_forward(&f, &spec2), Err(PatError::DepthTooLarge { .. })));
        // 4x4, one level: each 2x2 block maps to 2·c·dx
        let g = Grid2D::new(4, 4, 2, 0.5, 0.5).unwrap();
        let f = ImageField::from_fn(g, |_, _| 3.0).unwrap();
        let p = dwt2_forward(&f, &WaveletSpec::new(WaveletFamily::Haar, 1).unwrap()).unwrap();
        for &c in p.coarse.iter() {
            assert!((c - 2.0 * 3.0 * 0.5).abs() < 1e-14);
        }
        assert!(p.details[0].iter().all(|b| b.iter().all(|v| v.abs() < 1e-14)));
    }

    #[test]
    fn zero_in_zero_out() {
        let g = Grid2D::new(16, 16, 2, 0.1, 0.1).unwrap();
        let spec = WaveletSpec::new(WaveletFamily::Daubechies(4), 3).unwrap();
        let p = dwt2_forward(&ImageField::zeros(g), &spec).unwrap();
        assert_eq!(p.max_abs(), 0.0);
        let back = dwt2_inverse(&WaveletPyramid::zeros(g, &spec).unwrap()).unwrap();
        assert_eq!(norm(&back), 0.0);
    }

    #[test]
    fn depth_limit() {
        let f = random_field(16, 1);
        let spec = WaveletSpec::new(WaveletFamily::Daubechies(2), 4).unwrap();
        assert!(matches!(
            dwt2_forward(&f, &spec),
            Err(PatError::DepthTooLarge { levels: 4, max: 3 })
        ));
    }

    #[test]
    fn matches_basis_inner_product_oracle() {
        let f = random_field(16, 7);
        let spec = WaveletSpec::new(WaveletFamily::Daubechies(4), 3).unwrap();
        let p = dwt2_forward(&f, &spec).unwrap();
        for idx in p.indices() {
            let psi = basis_image(*f.grid(), &spec, idx).unwrap();
            let oracle = inner_product(&psi, &f).unwrap();
            let got = p.get(idx).unwrap();
            assert!((got - oracle).abs() <= 1e-10 * oracle.abs().max(1e-3), "{idx:?}");
        }
    }

    #[test]
    fn basis_images_are_orthonormal() {
        let g = Grid2D::new(32, 32, 2, 1.0 / 32.0, 0.1).unwrap();
        let spec = WaveletSpec::new(WaveletFamily::Daubechies(10), 3).unwrap();
        let proto = WaveletPyramid::zeros(g, &spec).unwrap();
        let all = proto.indices();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = all[rng.gen_range(0..all.len())];
            let b = all[rng.gen_range(0..all.len())];
            let pa = basis_image(g, &spec, a).unwrap();
            let pb = basis_image(g, &spec, b).unwrap();
            let ip = inner_product(&pa, &pb).unwrap();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-10, "{a:?} {b:?} {ip}");
        }
    }

    #[test]
    fn vanishing_moments_kill_polynomials() {
        let n = 64;
        let g = Grid2D::new(n, n, 2, 1.0 / n as f64, 0.1).unwrap();
        for order in [2u8, 4, 6] {
            let spec = WaveletSpec::new(WaveletFamily::Daubechies(order), 1).unwrap();
            let deg = order as i32 - 1;
            let f = ImageField::from_fn(g, |x, y| (x + 0.3).powi(deg) + 0.5 * y.powi(deg)).unwrap();
            let p = dwt2_forward(&f, &spec).unwrap();
            let taps = spec.lowpass().len();
            let h = n / 2;
            // skip coefficients whose filter support wraps around the seam
            let interior = h - taps / 2;
            for b in &p.details[0] {
                for kx in 0..interior {
                    for ky in 0..interior {
                        assert!(b[[kx, ky]].abs() < 1e-8, "db{order} ({kx},{ky}) {}", b[[kx, ky]]);
                    }
                }
            }
        }
    }

    #[test]
    fn besov_examples() {
        let g = Grid2D::new(32, 32, 2, 1.0 / 32.0, 0.1).unwrap();
        let spec = WaveletSpec::new(WaveletFamily::Daubechies(2), 3).unwrap();
        let zero = WaveletPyramid::zeros(g, &spec).unwrap();
        assert_eq!(besov_norm(&zero, 1.0, 2.0, 2.0, 2).unwrap(), 0.0);

        let f = random_field(32, 5);
        let f = ImageField::new(g, f.into_values()).unwrap();
        let p = dwt2_forward(&f, &spec).unwrap();
        let b = besov_norm(&p, 0.0, 2.0, 2.0, 2).unwrap();
        assert!((b - norm(&f)).abs() < 1e-10 * norm(&f));

        // s = r + d/2 - d/pp = 1 + 1 - 2 = 0, so the weight is 2^0
        let mut unit = WaveletPyramid::zeros(g, &spec).unwrap();
        unit.set(WaveletIndex::detail(3, 2, 1, 1), 1.0).unwrap();
        assert!((besov_norm(&unit, 1.0, 1.0, 1.0, 2).unwrap() - 1.0).abs() < 1e-15);
        // r = 2: s = 1 and the weight becomes 2^3
        assert!((besov_norm(&unit, 2.0, 1.0, 1.0, 2).unwrap() - 8.0).abs() < 1e-12);

        assert!(besov_norm(&p, 0.0, 0.5, 2.0, 2).is_err());
        assert!(besov_norm(&p, 0.0, 2.0, 0.9, 2).is_err());
    }

    #[test]
    fn flat_layout_roundtrip() {
        let f = random_field(16, 2);
        let spec = WaveletSpec::new(WaveletFamily::Daubechies(3), 2).unwrap();
        let p = dwt2_forward(&f, &spec).unwrap();
        let flat = p.to_flat();
        assert_eq!(flat.len(), 256);
        let q = WaveletPyramid::from_flat(*f.grid(), &spec, &flat).unwrap();
        assert_eq!(p, q);
        let layout = p.band_layout();
        assert_eq!(layout.len(), 1 + 3 * 2);
        assert_eq!(layout.last().unwrap().2 + layout.last().unwrap().3, 256);
    }

    #[test]
    fn parse_family_names() {
        assert_eq!(WaveletFamily::parse("db10").unwrap(), WaveletFamily::Daubechies(10));
        assert_eq!(WaveletFamily::parse("Haar").unwrap(), WaveletFamily::Haar);
        assert!(WaveletFamily::parse("sym4").is_err());
        assert!(WaveletFamily::parse("db11").is_err());
    }
}
