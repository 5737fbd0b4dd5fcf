//! Minimal 800×600 RGB line plots: frame, grid, one polyline per series.
//! No text is drawn; axis ranges go in the accompanying JSON report.

use image::{Rgb, RgbImage};

pub const WIDTH: u32 = 800;
pub const HEIGHT: u32 = 600;

const LEFT: i64 = 60;
const RIGHT: i64 = 770;
const TOP: i64 = 30;
const BOTTOM: i64 = 560;

const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
const FRAME: Rgb<u8> = Rgb([0, 0, 0]);
const GRID: Rgb<u8> = Rgb([220, 220, 220]);
const REFERENCE: Rgb<u8> = Rgb([128, 128, 128]);
const PALETTE: [Rgb<u8>; 6] = [
    Rgb([31, 119, 180]),
    Rgb([214, 39, 40]),
    Rgb([44, 160, 44]),
    Rgb([255, 127, 14]),
    Rgb([148, 103, 189]),
    Rgb([23, 190, 207]),
];

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub series: Vec<Vec<(f64, f64)>>,
    /// Horizontal reference lines at these y values.
    pub reference_y: Vec<f64>,
    pub log_x: bool,
    pub log_y: bool,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .map(|v| if log { v.log10() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        } else if hi - lo < 1e-12 * lo.abs().max(1.0) {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        } else {
            let pad = 0.05 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    /// Position in `[0, 1]`, or `None` when the value cannot be shown.
    fn unit(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let t = if self.log { v.log10() } else { v };
        Some((t - self.lo) / (self.hi - self.lo))
    }

    /// Grid positions in `[0, 1]`: decades on log axes, tenths otherwise.
    fn grid(&self) -> Vec<f64> {
        if self.log && self.hi - self.lo >= 1.0 {
            let first = self.lo.ceil() as i64;
            let last = self.hi.floor() as i64;
            (first..=last).map(|d| (d as f64 - self.lo) / (self.hi - self.lo)).collect()
        } else {
            (1..10).map(|i| i as f64 / 10.0).collect()
        }
    }
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>) {
    // Bresenham
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        put(img, x, y, c);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn thick_line(img: &mut RgbImage, a: (i64, i64), b: (i64, i64), c: Rgb<u8>) {
    for (ox, oy) in [(0, 0), (1, 0), (0, 1)] {
        line(img, (a.0 + ox, a.1 + oy), (b.0 + ox, b.1 + oy), c);
    }
}

fn marker(img: &mut RgbImage, (x, y): (i64, i64), c: Rgb<u8>) {
    for dx in -2..=2 {
        for dy in -2..=2 {
            put(img, x + dx, y + dy, c);
        }
    }
}

fn to_pixel(u: f64, v: f64) -> (i64, i64) {
    let x = LEFT as f64 + u * (RIGHT - LEFT) as f64;
    let y = BOTTOM as f64 - v * (BOTTOM - TOP) as f64;
    (x.round() as i64, y.round() as i64)
}

pub fn render(plot: &Plot) -> RgbImage {
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, BACKGROUND);
    let xs = Axis::fit(plot.series.iter().flatten().map(|p| p.0), plot.log_x);
    let ys = Axis::fit(
        plot.series.iter().flatten().map(|p| p.1).chain(plot.reference_y.iter().copied()),
        plot.log_y,
    );
    for g in xs.grid() {
        line(&mut img, to_pixel(g, 0.0), to_pixel(g, 1.0), GRID);
    }
    for g in ys.grid() {
        line(&mut img, to_pixel(0.0, g), to_pixel(1.0, g), GRID);
    }
    for &r in &plot.reference_y {
        if let Some(v) = ys.unit(r) {
            line(&mut img, to_pixel(0.0, v), to_pixel(1.0, v), REFERENCE);
        }
    }
    for (i, series) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(i64, i64)> = series
            .iter()
            .filter_map(|&(x, y)| Some(to_pixel(xs.unit(x)?, ys.unit(y)?)))
            .collect();
        for w in pts.windows(2) {
            thick_line(&mut img, w[0], w[1], color);
        }
        if pts.len() <= 50 {
            pts.iter().for_each(|&p| marker(&mut img, p, color));
        }
    }
    let corners = [(LEFT, TOP), (RIGHT, TOP), (RIGHT, BOTTOM), (LEFT, BOTTOM), (LEFT, TOP)];
    for w in corners.windows(2) {
        line(&mut img, w[0], w[1], FRAME);
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canvas_size_and_series_colour() {
        let plot = Plot {
            series: vec![vec![(0.0, 0.0), (1.0, 1.0)]],
            ..Default::default()
        };
        let img = render(&plot);
        assert_eq!(img.dimensions(), (WIDTH, HEIGHT));
        assert!(img.pixels().any(|p| *p == PALETTE[0]));
    }

    #[test]
    fn non_positive_values_are_skipped_on_log_axes() {
        let plot = Plot {
            series: vec![vec![(1.0, 0.0), (2.0, -1.0)]],
            log_y: true,
            ..Default::default()
        };
        assert!(!render(&plot).pixels().any(|p| *p == PALETTE[0]));
    }

    #[test]
    fn bresenham_hits_both_ends() {
        let mut img = RgbImage::from_pixel(10, 10, BACKGROUND);
        line(&mut img, (1, 8), (7, 2), FRAME);
        assert_eq!(*img.get_pixel(1, 8), FRAME);
        assert_eq!(*img.get_pixel(7, 2), FRAME);
    }
}
