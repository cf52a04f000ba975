//! IoU-family regression losses with analytic gradients.
//!
//! Gradients are taken with respect to the predicted box corners
//! `(x_min, y_min, x_max, y_max)`, the ground-truth box being constant. IoU is
//! piecewise smooth in corner coordinates; at the kinks (coinciding edges,
//! touching boxes) the one-sided derivative on the `pred > gt` side is used.

use std::f64::consts::PI;

use super::BoundingBox;
use crate::error::{Error, Result};

/// Partial derivatives with respect to `(x_min, y_min, x_max, y_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoxGradient(pub [f64; 4]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWithGrad {
    pub loss: f64,
    pub grad: BoxGradient,
}

type Grad = [f64; 4];

fn zip(a: Grad, b: Grad, f: impl Fn(f64, f64) -> f64) -> Grad {
    [f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2]), f(a[3], b[3])]
}

fn scale(a: Grad, s: f64) -> Grad {
    a.map(|v| v * s)
}

fn ind(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

/// Every quantity the three losses need, with its gradient.
struct Terms {
    iou: f64,
    d_iou: Grad,
    union: f64,
    d_union: Grad,
    rho2: f64,
    d_rho2: Grad,
    c2: f64,
    d_c2: Grad,
    enc_area: f64,
    d_enc_area: Grad,
}

fn terms(p: &BoundingBox, g: &BoundingBox) -> Terms {
    let [x1, y1, x2, y2] = p.corners();
    let [gx1, gy1, gx2, gy2] = g.corners();
    let (w, h) = (p.width(), p.height());

    let iw_raw = x2.min(gx2) - x1.max(gx1);
    let ih_raw = y2.min(gy2) - y1.max(gy1);
    let overlapping = iw_raw > 0.0 && ih_raw > 0.0;
    let (iw, ih) = if overlapping {
        (iw_raw, ih_raw)
    } else {
        (0.0, 0.0)
    };
    let (d_iw, d_ih) = if overlapping {
        (
            [-ind(x1 > gx1), 0.0, ind(x2 < gx2), 0.0],
            [0.0, -ind(y1 > gy1), 0.0, ind(y2 < gy2)],
        )
    } else {
        ([0.0; 4], [0.0; 4])
    };
    let inter = iw * ih;
    let d_inter = zip(scale(d_iw, ih), scale(d_ih, iw), |a, b| a + b);

    let d_area = [-h, -w, h, w];
    let union = p.area() + g.area() - inter;
    let d_union = zip(d_area, d_inter, |a, b| a - b);

    let (iou, d_iou) = if union > 0.0 {
        let u2 = union * union;
        (
            inter / union,
            zip(d_inter, d_union, |di, du| (di * union - inter * du) / u2),
        )
    } else {
        (0.0, [0.0; 4])
    };

    let (pcx, pcy) = p.center();
    let (gcx, gcy) = g.center();
    let (dx, dy) = (pcx - gcx, pcy - gcy);
    let rho2 = dx * dx + dy * dy;
    let d_rho2 = [dx, dy, dx, dy];

    let enc = p.enclosing(g);
    let (ew, eh) = (enc.width(), enc.height());
    let d_ew = [-ind(x1 < gx1), 0.0, ind(x2 > gx2), 0.0];
    let d_eh = [0.0, -ind(y1 < gy1), 0.0, ind(y2 > gy2)];
    let c2 = ew * ew + eh * eh;
    let d_c2 = zip(scale(d_ew, 2.0 * ew), scale(d_eh, 2.0 * eh), |a, b| a + b);
    let enc_area = ew * eh;
    let d_enc_area = zip(scale(d_ew, eh), scale(d_eh, ew), |a, b| a + b);

    Terms {
        iou,
        d_iou,
        union,
        d_union,
        rho2,
        d_rho2,
        c2,
        d_c2,
        enc_area,
        d_enc_area,
    }
}

fn diou_parts(t: &Terms) -> Result<(f64, Grad)> {
    if t.c2 <= 0.0 {
        return Err(Error::DegenerateEnclosure);
    }
    let c4 = t.c2 * t.c2;
    let loss = 1.0 - t.iou + t.rho2 / t.c2;
    let grad = zip(
        t.d_iou,
        zip(t.d_rho2, t.d_c2, |dr, dc| (dr * t.c2 - t.rho2 * dc) / c4),
        |di, dp| -di + dp,
    );
    Ok((loss, grad))
}

/// `1 − IoU + ρ²/c²` with its gradient.
pub fn diou_loss_with_grad(pred: &BoundingBox, gt: &BoundingBox) -> Result<LossWithGrad> {
    let (loss, grad) = diou_parts(&terms(pred, gt))?;
    Ok(LossWithGrad {
        loss,
        grad: BoxGradient(grad),
    })
}

/// Distance-IoU loss: one minus IoU plus the squared centre distance
/// normalised by the squared diagonal of the enclosing box.
pub fn diou_loss(pred: &BoundingBox, gt: &BoundingBox) -> Result<f64> {
    diou_loss_with_grad(pred, gt).map(|r| r.loss)
}

pub fn giou_loss_with_grad(pred: &BoundingBox, gt: &BoundingBox) -> Result<LossWithGrad> {
    let t = terms(pred, gt);
    if t.enc_area <= 0.0 {
        return Err(Error::DegenerateEnclosure);
    }
    let e = t.enc_area;
    let loss = 1.0 - t.iou + (e - t.union) / e;
    // (E − U)/E = 1 − U/E
    let grad = zip(
        t.d_iou,
        zip(t.d_union, t.d_enc_area, |du, de| {
            -(du * e - t.union * de) / (e * e)
        }),
        |di, dq| -di + dq,
    );
    Ok(LossWithGrad {
        loss,
        grad: BoxGradient(grad),
    })
}

/// Generalized-IoU loss: `1 − IoU + (enclosing − union) / enclosing`.
pub fn giou_loss(pred: &BoundingBox, gt: &BoundingBox) -> Result<f64> {
    giou_loss_with_grad(pred, gt).map(|r| r.loss)
}

pub fn ciou_loss_with_grad(pred: &BoundingBox, gt: &BoundingBox) -> Result<LossWithGrad> {
    if pred.height() <= 0.0 || gt.height() <= 0.0 {
        return Err(Error::UndefinedAspectRatio);
    }
    let t = terms(pred, gt);
    let (diou, d_diou) = diou_parts(&t)?;

    let k = 4.0 / (PI * PI);
    let (w, h) = (pred.width(), pred.height());
    let diff = (gt.width() / gt.height()).atan() - (w / h).atan();
    let v = k * diff * diff;
    // d atan(w/h) = (h dw − w dh) / (w² + h²)
    let r2 = w * w + h * h;
    let d_atan = [-h / r2, w / r2, h / r2, -w / r2];
    let d_v = scale(d_atan, -2.0 * k * diff);

    // α·v with α = v / (1 − IoU + v), differentiated through α as well.
    let s = 1.0 - t.iou + v;
    let (penalty, d_penalty) = if v > 0.0 && s > 0.0 {
        let d_s = zip(t.d_iou, d_v, |di, dv| -di + dv);
        (
            v * v / s,
            zip(d_v, d_s, |dv, ds| (2.0 * v * dv * s - v * v * ds) / (s * s)),
        )
    } else {
        (0.0, [0.0; 4])
    };

    Ok(LossWithGrad {
        loss: diou + penalty,
        grad: BoxGradient(zip(d_diou, d_penalty, |a, b| a + b)),
    })
}

/// Complete-IoU loss: distance-IoU plus the aspect-ratio consistency term
/// `α·v`, `v = 4/π² (atan(w_gt/h_gt) − atan(w/h))²`, `α = v / ((1 − IoU) + v)`.
pub fn ciou_loss(pred: &BoundingBox, gt: &BoundingBox) -> Result<f64> {
    ciou_loss_with_grad(pred, gt).map(|r| r.loss)
}
