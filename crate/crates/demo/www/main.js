import init, { rest_state, phase_portrait, firing_curve, isi_densities } from "./pkg/fhn_lif_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Minimal line/point plotting on a 2D canvas with data-space axes.
function frame(canvas, xr, yr, xlabel, ylabel) {
  const ctx = canvas.getContext("2d");
  const pad = { l: 56, r: 12, t: 10, b: 34 };
  const w = canvas.width - pad.l - pad.r;
  const h = canvas.height - pad.t - pad.b;
  const sx = (x) => pad.l + ((x - xr[0]) / (xr[1] - xr[0])) * w;
  const sy = (y) => pad.t + h - ((y - yr[0]) / (yr[1] - yr[0])) * h;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.l, pad.t, w, h);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  for (let i = 0; i <= 4; i++) {
    const x = xr[0] + ((xr[1] - xr[0]) * i) / 4;
    const y = yr[0] + ((yr[1] - yr[0]) * i) / 4;
    ctx.fillText(x.toPrecision(3), sx(x) - 12, pad.t + h + 14);
    ctx.fillText(y.toPrecision(3), 4, sy(y) + 4);
  }
  ctx.fillText(xlabel, pad.l + w / 2, canvas.height - 4);
  ctx.save();
  ctx.translate(12, pad.t + h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
  const invert = (px, py) => [
    xr[0] + ((px - pad.l) / w) * (xr[1] - xr[0]),
    yr[0] + ((pad.t + h - py) / h) * (yr[1] - yr[0]),
  ];
  return { ctx, sx, sy, invert };
}

function line(f, xs, ys, color) {
  f.ctx.strokeStyle = color;
  f.ctx.beginPath();
  xs.forEach((x, i) => (i ? f.ctx.lineTo(f.sx(x), f.sy(ys[i])) : f.ctx.moveTo(f.sx(x), f.sy(ys[i]))));
  f.ctx.stroke();
}

function legend(f, entries) {
  entries.forEach(([label, color], i) => {
    f.ctx.fillStyle = color;
    f.ctx.fillText(label, f.sx(0) + 70, 24 + 14 * i);
  });
}

function guard(outId, fn) {
  const out = outId && $(outId);
  if (out) {
    out.className = "note";
    out.textContent = "computing...";
  }
  // Yield one frame so the status text paints before the blocking call.
  setTimeout(() => run(out, fn), 20);
}

function run(out, fn) {
  try {
    fn(out);
  } catch (e) {
    if (out) {
      out.textContent = String(e.message ?? e);
      out.className = "err";
    } else {
      alert(e.message ?? e);
    }
  }
}

const PP = { xr: [-2.2, 2.2], yr: [-0.8, 1.6] };

function drawPortrait() {
  guard(null, () => {
    const xs = phase_portrait(num("pp-sigma"), num("pp-v"), num("pp-w"), num("pp-t"), num("pp-seed"));
    const f = frame($("pp-canvas"), PP.xr, PP.yr, "v", "w");
    const vs = [], ws = [];
    for (let i = 0; i < xs.length; i += 2) { vs.push(xs[i]); ws.push(xs[i + 1]); }
    // Nullclines: w = v − v³/3 + I and w = (v + α)/β.
    const grid = Array.from({ length: 200 }, (_, i) => PP.xr[0] + (i * (PP.xr[1] - PP.xr[0])) / 199);
    line(f, grid, grid.map((v) => v - v ** 3 / 3 + 0.265), "#bbb");
    line(f, grid, grid.map((v) => (v + 0.7) / 0.75), "#bbb");
    line(f, vs, ws, "#1f5fbf");
    const [ve, we] = rest_state();
    f.ctx.fillStyle = "#c00";
    f.ctx.fillRect(f.sx(ve) - 3, f.sy(we) - 3, 6, 6);
    $("pp-canvas").onclick = (ev) => {
      const r = ev.target.getBoundingClientRect();
      const [v, w] = f.invert(ev.clientX - r.left, ev.clientY - r.top);
      $("pp-v").value = v.toFixed(4);
      $("pp-w").value = w.toFixed(4);
      drawPortrait();
    };
  });
}

function drawFiring() {
  guard("fc-out", (out) => {
    const c = firing_curve(num("fc-sigma"), num("fc-trials"), num("fc-seed"));
    const ls = Array.from(c.distances), ps = Array.from(c.probabilities);
    const f = frame($("fc-canvas"), [0, ls[ls.length - 1]], [0, 1], "distance below rest", "P(spike)");
    f.ctx.fillStyle = "#1f5fbf";
    ls.forEach((l, i) => f.ctx.fillRect(f.sx(l) - 2, f.sy(ps[i]) - 2, 4, 4));
    const fine = Array.from({ length: 200 }, (_, i) => (i * ls[ls.length - 1]) / 199);
    line(f, fine, fine.map((l) => 1 / (1 + Math.exp((c.a - l) / c.b))), "#c05000");
    out.className = "note";
    out.textContent = `a = ${c.a.toFixed(6)}, b = ${c.b.toFixed(6)}`;
  });
}

function drawIsi() {
  guard("isi-out", (out) => {
    const r = isi_densities(num("isi-sigma"), num("isi-trials"), num("isi-m"), num("isi-spikes"), num("isi-seed"));
    const t = Array.from(r.t), g1 = Array.from(r.g_radial_ou), g2 = Array.from(r.g_polar_radial);
    const tmax = t[t.length - 1];
    const bins = 40, width = tmax / bins, hist = new Array(bins).fill(0);
    const samples = Array.from(r.samples);
    samples.forEach((x) => { if (x < tmax) hist[Math.floor(x / width)] += 1; });
    const dens = hist.map((c) => c / (samples.length * width));
    const ymax = Math.max(...g1, ...g2, ...dens) * 1.1;
    const f = frame($("isi-canvas"), [0, tmax], [0, ymax], "t", "density");
    f.ctx.fillStyle = "rgba(120,120,120,0.35)";
    dens.forEach((d, i) => f.ctx.fillRect(f.sx(i * width), f.sy(d), f.sx(width) - f.sx(0) - 1, f.sy(0) - f.sy(d)));
    line(f, t, g1, "#1f5fbf");
    line(f, t, g2, "#c05000");
    legend(f, [["radial OU", "#1f5fbf"], ["polar radial", "#c05000"], ["FHN sample", "#777"]]);
    out.className = "note";
    out.textContent = `max KS = ${r.ks.toFixed(3)} over ${samples.length} intervals`;
  });
}

await init();
$("pp-run").onclick = drawPortrait;
$("fc-run").onclick = drawFiring;
$("isi-run").onclick = drawIsi;
drawPortrait();
