use super::PixelClass;
use crate::orbit::Target;

/// Bump whenever any color below changes; tiles are only byte-stable within a version.
pub const PALETTE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Palette {
    pub version: u32,
    targets: [(Target, [u8; 3]); 6],
    mandelbrot: [u8; 3],
    tricorn: [u8; 3],
    undecided: [u8; 3],
    outside: [u8; 3],
    julia: [u8; 3],
    slots: [[u8; 3]; 4],
}

impl Palette {
    pub fn current() -> Self {
        Palette {
            version: PALETTE_VERSION,
            targets: [
                (Target::One, [214, 48, 39]),
                (Target::MinusOne, [240, 200, 40]),
                (Target::A, [60, 170, 80]),
                (Target::ABar, [245, 140, 30]),
                (Target::Zero, [214, 48, 39]),
                (Target::Infinity, [240, 200, 40]),
            ],
            mandelbrot: [60, 110, 220],
            tricorn: [170, 70, 200],
            undecided: [24, 24, 28],
            outside: [120, 120, 120],
            julia: [8, 8, 10],
            slots: [[90, 200, 220], [40, 120, 150], [150, 220, 180], [70, 160, 110]],
        }
    }

    fn target(&self, t: Target) -> [u8; 3] {
        self.targets.iter().find(|(k, _)| *k == t).map(|(_, c)| *c).unwrap_or(self.undecided)
    }

    pub fn color(&self, c: &PixelClass) -> [u8; 4] {
        let rgb = match *c {
            PixelClass::Principal(t) | PixelClass::Basin(t) => self.target(t),
            PixelClass::Capture(t) => scale(self.target(t), 0.55),
            PixelClass::Mandelbrot(p) => scale(self.mandelbrot, period_shade(p)),
            PixelClass::Tricorn(p) => scale(self.tricorn, period_shade(p)),
            PixelClass::Undecided => self.undecided,
            PixelClass::OutsideDomain => self.outside,
            PixelClass::CycleSlot(s) => self.slots[s % self.slots.len()],
            PixelClass::Julia => self.julia,
        };
        [rgb[0], rgb[1], rgb[2], 255]
    }
}

/// Period cycles through eight shades, lightest at period 1.
fn period_shade(p: usize) -> f64 {
    1.0 - 0.08 * (p.saturating_sub(1) % 8) as f64
}

fn scale(c: [u8; 3], f: f64) -> [u8; 3] {
    c.map(|v| (v as f64 * f).round() as u8)
}
