//! In-memory RGB images exchanged between the data pipeline and the model.

/// Dense HxWx3 image, row-major HWC, values in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub h: usize,
    pub w: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(h: usize, w: usize, data: Vec<f64>) -> Image {
        assert_eq!(data.len(), h * w * 3, "image data length");
        Image { h, w, data }
    }

    pub fn filled(h: usize, w: usize, rgb: [f64; 3]) -> Image {
        let mut data = Vec::with_capacity(h * w * 3);
        for _ in 0..h * w {
            data.extend_from_slice(&rgb);
        }
        Image { h, w, data }
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [f64; 3] {
        let base = (y * self.w + x) * 3;
        [self.data[base], self.data[base + 1], self.data[base + 2]]
    }

    /// Bilinear resize to a new square resolution.
    pub fn resize(&self, out_h: usize, out_w: usize) -> Image {
        if out_h == self.h && out_w == self.w {
            return self.clone();
        }
        let mut data = vec![0.0; out_h * out_w * 3];
        for oy in 0..out_h {
            for ox in 0..out_w {
                let sy = (oy as f64 + 0.5) * self.h as f64 / out_h as f64 - 0.5;
                let sx = (ox as f64 + 0.5) * self.w as f64 / out_w as f64 - 0.5;
                let y0 = sy.floor();
                let x0 = sx.floor();
                let fy = sy - y0;
                let fx = sx - x0;
                let clamp_y = |y: f64| (y.max(0.0) as usize).min(self.h - 1);
                let clamp_x = |x: f64| (x.max(0.0) as usize).min(self.w - 1);
                let (y0i, y1i) = (clamp_y(y0), clamp_y(y0 + 1.0));
                let (x0i, x1i) = (clamp_x(x0), clamp_x(x0 + 1.0));
                let p00 = self.pixel(y0i, x0i);
                let p01 = self.pixel(y0i, x1i);
                let p10 = self.pixel(y1i, x0i);
                let p11 = self.pixel(y1i, x1i);
                let base = (oy * out_w + ox) * 3;
                for c in 0..3 {
                    let top = p00[c] * (1.0 - fx) + p01[c] * fx;
                    let bot = p10[c] * (1.0 - fx) + p11[c] * fx;
                    data[base + c] = top * (1.0 - fy) + bot * fy;
                }
            }
        }
        Image {
            h: out_h,
            w: out_w,
            data,
        }
    }
}
