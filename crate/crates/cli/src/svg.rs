//! Two-panel scatter plot: `log count / log q` against `q`, all numerators on the
//! left and prime numerators on the right.

use std::fmt::Write;

use cf_statlab::zaremba::ZarembaRow;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 320.0;
const MARGIN: f64 = 50.0;

type Pick = fn(&ZarembaRow) -> Option<f64>;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, left: f64, x: f64) -> f64 {
        left + MARGIN + (x - self.x0) / (self.x1 - self.x0) * (PANEL_W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        PANEL_H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (PANEL_H - 2.0 * MARGIN)
    }
}

pub fn zaremba_scatter(header: &str, rows: &[ZarembaRow], k: u64) -> String {
    let x0 = rows.first().map_or(0.0, |r| r.q as f64);
    let x1 = rows.last().map_or(1.0, |r| r.q as f64).max(x0 + 1.0);
    let frame = Frame { x0, x1, y0: 0.0, y1: 1.0 };
    let width = 2.0 * PANEL_W;

    let mut s = String::new();
    s.push_str(header);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif" font-size="11">"#
    );
    let panels: [(&str, Pick); 2] = [
        ("all numerators", |r| r.ratio_all),
        ("prime numerators", |r| r.ratio_prime),
    ];
    for (i, (title, pick)) in panels.iter().enumerate() {
        let left = i as f64 * PANEL_W;
        axes(&mut s, &frame, left, &format!("{k}-Zaremba, {title}"));
        for r in rows {
            if let Some(y) = pick(r) {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="1"/>"#,
                    frame.px(left, r.q as f64),
                    frame.py(y)
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn axes(s: &mut String, f: &Frame, left: f64, title: &str) {
    let (xa, xb) = (f.px(left, f.x0), f.px(left, f.x1));
    let (ya, yb) = (f.py(f.y0), f.py(f.y1));
    let _ = writeln!(
        s,
        r#"<path d="M{xa:.2} {yb:.2} V{ya:.2} H{xb:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{title}</text>"#,
        (xa + xb) / 2.0,
        MARGIN / 2.0
    );
    for i in 0..=4 {
        let y = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.2}</text>"#,
            xa - 4.0,
            f.py(y) + 4.0
        );
        let x = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.0}</text>"#,
            f.px(left, x),
            ya + 14.0,
            x
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">q</text>"#,
        (xa + xb) / 2.0,
        ya + 30.0
    );
}
