import init, { sectorSpectrum, decayProfile, entropyCurve } from "./pkg/xxz_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c"];

function values(fs) {
  const v = {};
  for (const input of fs.querySelectorAll("input")) v[input.name] = Number(input.value);
  return v;
}

// series: [{ label, points: [[x, y], ...], style: "dots" | "line" }]
function plot(canvas, series, xLabel, yLabel) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = { l: 60, r: 15, t: 15, b: 40 };
  ctx.clearRect(0, 0, w, h);
  const pts = series.flatMap((s) => s.points).filter(([x, y]) => isFinite(x) && isFinite(y));
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const px = (x) => pad.l + ((x - x0) / (x1 - x0)) * (w - pad.l - pad.r);
  const py = (y) => h - pad.b - ((y - y0) / (y1 - y0)) * (h - pad.t - pad.b);

  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
  for (let i = 0; i <= 4; i++) {
    const x = x0 + ((x1 - x0) * i) / 4;
    const y = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(x.toPrecision(3), px(x) - 12, h - pad.b + 15);
    ctx.fillText(y.toPrecision(3), 5, py(y) + 4);
  }
  ctx.fillText(xLabel, w / 2, h - 5);
  ctx.save();
  ctx.translate(12, h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(yLabel, 0, 0);
  ctx.restore();

  series.forEach((s, i) => {
    ctx.strokeStyle = ctx.fillStyle = COLORS[i % COLORS.length];
    const good = s.points.filter(([x, y]) => isFinite(x) && isFinite(y));
    if (s.style === "line") {
      ctx.beginPath();
      good.forEach(([x, y], k) => (k ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y))));
      ctx.stroke();
    } else {
      for (const [x, y] of good) ctx.fillRect(px(x) - 2, py(y) - 2, 4, 4);
    }
    ctx.fillText(s.label, w - pad.r - 160, pad.t + 15 + 15 * i);
  });
}

function wire(id, compute) {
  const fs = document.getElementById(id);
  const out = fs.querySelector(".out");
  fs.querySelector("button").addEventListener("click", () => {
    out.className = "out";
    try {
      const t = performance.now();
      const text = compute(values(fs), fs.querySelector("canvas"));
      out.textContent = `${text} (${(performance.now() - t).toFixed(0)} ms)`;
    } catch (e) {
      out.className = "out err";
      out.textContent = String(e.message ?? e);
    }
  });
}

await init();

wire("spectrum", (v, canvas) => {
  const s = JSON.parse(sectorSpectrum(v.twoJ, v.L, v.N, v.Delta, v.nu, v.seed));
  const ev = s.eigenvalues.map((e, i) => [i, e]);
  const floor = s.gap_factor * s.min_potential;
  plot(
    canvas,
    [
      { label: "eigenvalues", points: ev, style: "dots" },
      { label: "(1 - 2J/Δ) V_N,0", points: [[0, floor], [ev.length - 1, floor]], style: "line" },
    ],
    "index",
    "energy",
  );
  return `dimension ${s.dim}, ground energy ${s.eigenvalues[0].toFixed(6)}, V_N,0 = ${s.min_potential}`;
});

wire("decay", (v, canvas) => {
  const pts = JSON.parse(decayProfile(v.twoJ, v.L, v.N, v.Delta, v.K, v.delta, v.nu, v.seed));
  plot(
    canvas,
    [
      { label: "log max ||P_X Q||", points: pts.filter((p) => p.norm > 0).map((p) => [p.d, Math.log(p.norm)]), style: "dots" },
      { label: "log C e^{-μd}", points: pts.map((p) => [p.d, Math.log(p.bound)]), style: "line" },
    ],
    "graph distance d",
    "log norm",
  );
  const worst = Math.min(...pts.map((p) => p.bound - p.norm));
  return `${pts.length} distances, smallest margin ${worst.toPrecision(4)}`;
});

wire("entropy", (v, canvas) => {
  const pts = JSON.parse(entropyCurve(v.twoJ, v.L, v.Delta, v.K, v.delta, v.alpha, v.ellMax, v.nu, v.seed));
  const measured = pts.filter((p) => p.measured !== null);
  plot(
    canvas,
    [
      { label: "bound", points: pts.map((p) => [Math.log(p.ell), p.bound]), style: "line" },
      { label: "max measured", points: measured.map((p) => [Math.log(p.ell), p.measured]), style: "dots" },
    ],
    "log ell",
    "Rényi entropy",
  );
  const top = Math.max(0, ...measured.map((p) => p.measured));
  return `${measured.length} cuts measured, largest entropy ${top.toFixed(4)}`;
});
