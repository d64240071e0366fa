//! Rendering synthetic sequences: a moving target, look-alike distractors,
//! and occasional occluders, with exact ground truth.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::loss::NormBox;

use super::spec::{SequenceSpec, ShapeKind};

/// Pixel-space rectangle of a drawn occluder (the generator's geometry
/// record; kept in memory only).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OccluderRect {
    pub cx: f64,
    pub cy: f64,
    pub half_w: f64,
    pub half_h: f64,
}

/// One synthetic video: raw frames with per-frame ground truth.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub canvas: usize,
    /// Raw 8-bit RGB frames, row-major, canvas*canvas*3 bytes each.
    pub frames: Vec<Vec<u8>>,
    /// Ground-truth box per frame in canvas-normalized units.
    pub boxes: Vec<NormBox>,
    /// False when an occluder covers more than half of the target box.
    pub visible: Vec<bool>,
    /// Occluder geometry per frame, None when no occluder fired.
    pub occluders: Vec<Option<OccluderRect>>,
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

struct Body {
    kind: ShapeKind,
    color: [u8; 3],
    half_w: f64,
    half_h: f64,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
}

impl Body {
    fn advance(&mut self, canvas: f64, turn_prob: f64, speed: f64, rng: &mut ChaCha12Rng) {
        if rng.random_range(0.0..1.0) < turn_prob {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            self.vx = speed * angle.cos();
            self.vy = speed * angle.sin();
        }
        self.x += self.vx;
        self.y += self.vy;
        // Reflect off the walls, keeping the whole body inside.
        if self.x - self.half_w < 0.0 {
            self.x = 2.0 * self.half_w - self.x;
            self.vx = -self.vx;
        }
        if self.x + self.half_w > canvas {
            self.x = 2.0 * (canvas - self.half_w) - self.x;
            self.vx = -self.vx;
        }
        if self.y - self.half_h < 0.0 {
            self.y = 2.0 * self.half_h - self.y;
            self.vy = -self.vy;
        }
        if self.y + self.half_h > canvas {
            self.y = 2.0 * (canvas - self.half_h) - self.y;
            self.vy = -self.vy;
        }
        self.x = self.x.clamp(self.half_w, canvas - self.half_w);
        self.y = self.y.clamp(self.half_h, canvas - self.half_h);
    }
}

fn fill_rect(frame: &mut [u8], canvas: usize, cx: f64, cy: f64, hw: f64, hh: f64, color: [u8; 3]) {
    let x0 = ((cx - hw).floor().max(0.0)) as usize;
    let x1 = ((cx + hw).ceil().min(canvas as f64)) as usize;
    let y0 = ((cy - hh).floor().max(0.0)) as usize;
    let y1 = ((cy + hh).ceil().min(canvas as f64)) as usize;
    for y in y0..y1 {
        for x in x0..x1 {
            let base = (y * canvas + x) * 3;
            frame[base..base + 3].copy_from_slice(&color);
        }
    }
}

fn draw_body(frame: &mut [u8], canvas: usize, b: &Body) {
    match b.kind {
        ShapeKind::Rectangle => fill_rect(frame, canvas, b.x, b.y, b.half_w, b.half_h, b.color),
        ShapeKind::Disc => {
            let y0 = ((b.y - b.half_h).floor().max(0.0)) as usize;
            let y1 = ((b.y + b.half_h).ceil().min(canvas as f64)) as usize;
            let x0 = ((b.x - b.half_w).floor().max(0.0)) as usize;
            let x1 = ((b.x + b.half_w).ceil().min(canvas as f64)) as usize;
            for y in y0..y1 {
                for x in x0..x1 {
                    let dx = (x as f64 + 0.5 - b.x) / b.half_w;
                    let dy = (y as f64 + 0.5 - b.y) / b.half_h;
                    if dx * dx + dy * dy <= 1.0 {
                        let base = (y * canvas + x) * 3;
                        frame[base..base + 3].copy_from_slice(&b.color);
                    }
                }
            }
        }
        ShapeKind::Triangle => {
            let top = b.y - b.half_h;
            let y0 = (top.floor().max(0.0)) as usize;
            let y1 = ((b.y + b.half_h).ceil().min(canvas as f64)) as usize;
            for y in y0..y1 {
                let t = ((y as f64 + 0.5 - top) / (2.0 * b.half_h)).clamp(0.0, 1.0);
                let half = t * b.half_w;
                let x0 = ((b.x - half).floor().max(0.0)) as usize;
                let x1 = ((b.x + half).ceil().min(canvas as f64)) as usize;
                for x in x0..x1 {
                    let base = (y * canvas + x) * 3;
                    frame[base..base + 3].copy_from_slice(&b.color);
                }
            }
        }
    }
}

fn color_distance(a: [u8; 3], b: [u8; 3]) -> u8 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.abs_diff(y))
        .max()
        .unwrap_or(0)
}

fn spawn(
    spec: &SequenceSpec,
    kind: ShapeKind,
    color: [u8; 3],
    rng: &mut ChaCha12Rng,
) -> Body {
    let canvas = spec.canvas as f64;
    let (lo, hi) = spec.target.size_range;
    let half_w = rng.random_range(lo..=hi) * canvas / 2.0;
    let half_h = match kind {
        ShapeKind::Disc => half_w,
        _ => rng.random_range(lo..=hi) * canvas / 2.0,
    };
    let speed = rng.random_range(spec.motion.speed_range.0..=spec.motion.speed_range.1);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    Body {
        kind,
        color,
        half_w,
        half_h,
        x: rng.random_range(half_w..canvas - half_w),
        y: rng.random_range(half_h..canvas - half_h),
        vx: speed * angle.cos(),
        vy: speed * angle.sin(),
    }
}

/// Renders a full sequence. Deterministic under the spec's seed; frame 0 is
/// never occluded so the tracking protocol always has a clean start.
pub fn generate_sequence(spec: &SequenceSpec) -> Result<Sequence> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let canvas = spec.canvas;
    let canvas_f = canvas as f64;

    let background = [
        rng.random_range(20..80u8),
        rng.random_range(20..80u8),
        rng.random_range(20..80u8),
    ];

    let mut target = spawn(spec, spec.target.kind, spec.target.color, &mut rng);
    let target_speed = (target.vx * target.vx + target.vy * target.vy).sqrt();

    let mut distractors: Vec<Body> = (0..spec.distractors)
        .map(|_| {
            let mut color = spec.target.color;
            for _ in 0..32 {
                color = [
                    rng.random_range(40..250u8),
                    rng.random_range(40..250u8),
                    rng.random_range(40..250u8),
                ];
                if color_distance(color, spec.target.color) >= 60 {
                    break;
                }
            }
            spawn(spec, spec.target.kind, color, &mut rng)
        })
        .collect();

    let mut frames = Vec::with_capacity(spec.length);
    let mut boxes = Vec::with_capacity(spec.length);
    let mut visible = Vec::with_capacity(spec.length);
    let mut occluders = Vec::with_capacity(spec.length);

    for frame_idx in 0..spec.length {
        let mut frame = Vec::with_capacity(canvas * canvas * 3);
        for _ in 0..canvas * canvas {
            frame.extend_from_slice(&background);
        }
        for d in &distractors {
            draw_body(&mut frame, canvas, d);
        }
        draw_body(&mut frame, canvas, &target);

        let gt = NormBox {
            cx: target.x / canvas_f,
            cy: target.y / canvas_f,
            w: 2.0 * target.half_w / canvas_f,
            h: 2.0 * target.half_h / canvas_f,
        };

        // Occluders are sized and placed so that when one fires it always
        // covers more than half of the target box.
        let occ = if frame_idx > 0 && rng.random_range(0.0..1.0) < spec.occluder_prob {
            let fx = rng.random_range(0.9..1.5);
            let fy = rng.random_range(0.9..1.5);
            let jx = rng.random_range(-0.3..0.3) * target.half_w;
            let jy = rng.random_range(-0.3..0.3) * target.half_h;
            let rect = OccluderRect {
                cx: target.x + jx,
                cy: target.y + jy,
                half_w: fx * target.half_w,
                half_h: fy * target.half_h,
            };
            let gray = rng.random_range(100..180u8);
            fill_rect(
                &mut frame,
                canvas,
                rect.cx,
                rect.cy,
                rect.half_w,
                rect.half_h,
                [gray, gray, gray],
            );
            Some(rect)
        } else {
            None
        };

        let coverage = occ.map_or(0.0, |o| occluder_coverage(&o, &target));
        frames.push(frame);
        boxes.push(gt);
        visible.push(coverage <= 0.5);
        occluders.push(occ);

        target.advance(canvas_f, spec.motion.turn_prob, target_speed, &mut rng);
        for d in distractors.iter_mut() {
            let speed = (d.vx * d.vx + d.vy * d.vy).sqrt();
            d.advance(canvas_f, spec.motion.turn_prob, speed, &mut rng);
        }
    }

    Ok(Sequence {
        canvas,
        frames,
        boxes,
        visible,
        occluders,
    })
}

/// Fraction of the target's bounding box covered by the occluder rectangle.
fn occluder_coverage(occ: &OccluderRect, target: &Body) -> f64 {
    let ix = (target.x + target.half_w).min(occ.cx + occ.half_w)
        - (target.x - target.half_w).max(occ.cx - occ.half_w);
    let iy = (target.y + target.half_h).min(occ.cy + occ.half_h)
        - (target.y - target.half_h).max(occ.cy - occ.half_h);
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    (ix * iy) / (4.0 * target.half_w * target.half_h)
}

/// Recomputes coverage from the recorded geometry (for consistency checks).
pub fn coverage_from_record(occ: &OccluderRect, gt: &NormBox, canvas: usize) -> f64 {
    let c = canvas as f64;
    let body = Body {
        kind: ShapeKind::Rectangle,
        color: [0, 0, 0],
        half_w: gt.w * c / 2.0,
        half_h: gt.h * c / 2.0,
        x: gt.cx * c,
        y: gt.cy * c,
        vx: 0.0,
        vy: 0.0,
    };
    occluder_coverage(occ, &body)
}
