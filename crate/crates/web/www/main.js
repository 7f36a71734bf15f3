import init, { holderRadii, newtonEnvelope, worstCaseOrbit } from "./pkg/majorant_newton_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function frame(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  const pad = 40;
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 10, canvas.width - pad - 10, canvas.height - pad - 10);
  const sx = (x) => pad + (canvas.width - pad - 10) * (x - x0) / (x1 - x0 || 1);
  const sy = (y) => canvas.height - pad - (canvas.height - pad - 20) * (y - y0) / (y1 - y0 || 1);
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toPrecision(3), pad, canvas.height - pad + 14);
  ctx.fillText(x1.toPrecision(3), canvas.width - 50, canvas.height - pad + 14);
  ctx.fillText(y1.toPrecision(3), 2, 20);
  ctx.fillText(y0.toPrecision(3), 2, canvas.height - pad);
  return { ctx, sx, sy };
}

function line(g, pts, color, dash = []) {
  g.ctx.strokeStyle = color;
  g.ctx.setLineDash(dash);
  g.ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? g.ctx.lineTo(g.sx(x), g.sy(y)) : g.ctx.moveTo(g.sx(x), g.sy(y))));
  g.ctx.stroke();
  g.ctx.setLineDash([]);
}

function vmark(g, x, label, color) {
  g.ctx.strokeStyle = color;
  g.ctx.setLineDash([4, 4]);
  g.ctx.beginPath();
  g.ctx.moveTo(g.sx(x), 10);
  g.ctx.lineTo(g.sx(x), g.ctx.canvas.height - 40);
  g.ctx.stroke();
  g.ctx.setLineDash([]);
  g.ctx.fillStyle = color;
  g.ctx.fillText(label, g.sx(x) + 3, 22);
}

function guarded(out, f) {
  try {
    out.classList.remove("err");
    f();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e);
  }
}

function drawHolder() {
  $("h-k-v").textContent = $("h-k").value;
  $("h-p-v").textContent = $("h-p").value;
  guarded($("h-out"), () => {
    const v = JSON.parse(holderRadii(num("h-k"), num("h-p"), 400));
    const ts = v.curve.map((c) => c[0]);
    const hs = v.curve.filter((c) => c[2] !== null).map((c) => Math.min(c[2], 3));
    const fs = v.curve.map((c) => c[1]);
    const g = frame($("h-canvas"), ts, [...fs, ...hs, 0, 1]);
    line(g, v.curve.map((c) => [c[0], c[1]]), "#1f77b4");
    line(g, v.curve.filter((c) => c[2] !== null).map((c) => [c[0], Math.min(c[2], 3)]), "#ff7f0e");
    line(g, [[ts[0], 1], [ts[ts.length - 1], 1]], "#aaa", [2, 3]);
    vmark(g, v.rho, "ρ", "#2ca02c");
    vmark(g, v.nu, "ν", "#9467bd");
    vmark(g, v.sigma, "σ", "#d62728");
    $("h-out").textContent =
      `blue f(t), orange h(t) = f/(t f') − 1\n` +
      `ν = ${v.nu.toPrecision(12)}   ρ = ${v.rho.toPrecision(12)} (closed form ${v.rho_closed.toPrecision(12)})   σ = ${v.sigma.toPrecision(12)}`;
  });
}

function drawEnvelope() {
  $("e-frac-v").textContent = $("e-frac").value;
  guarded($("e-out"), () => {
    const v = JSON.parse(newtonEnvelope($("e-problem").value, num("e-frac"), num("e-angle")));
    const lg = (e) => Math.log10(Math.max(e, 1e-17));
    const err = v.errors.map((e, k) => [k, lg(e)]);
    const env = v.envelope.map((t, k) => [k, lg(t)]);
    const all = [...err, ...env];
    const g = frame($("e-canvas"), all.map((p) => p[0]), all.map((p) => p[1]));
    line(g, env, "#ff7f0e", [5, 3]);
    line(g, err, "#1f77b4");
    $("e-out").textContent =
      `blue log10 ‖x_k − x*‖, orange log10 t_k\n` +
      `r = ${v.r.toPrecision(10)}   x0 = [${v.x0.map((x) => x.toPrecision(6)).join(", ")}]   ${v.status} after ${v.errors.length - 1} steps`;
  });
}

function drawOrbit() {
  $("w-frac-v").textContent = $("w-frac").value;
  guarded($("w-out"), () => {
    const v = JSON.parse(worstCaseOrbit(num("w-k"), num("w-p"), num("w-frac"), 60));
    const pts = v.orbit.map((x, k) => [k, x]);
    const g = frame($("w-canvas"), pts.map((p) => p[0]), [...v.orbit, v.rho, -v.rho]);
    line(g, [[0, v.rho], [pts.length - 1, v.rho]], "#2ca02c", [4, 4]);
    line(g, [[0, -v.rho], [pts.length - 1, -v.rho]], "#2ca02c", [4, 4]);
    line(g, pts, "#1f77b4");
    $("w-out").textContent =
      `x_k on sign(x) f(|x|); green lines at ±ρ\n` +
      `ρ = ${v.rho.toPrecision(12)}   ν = ${v.nu.toPrecision(12)}   ${v.status} after ${v.orbit.length - 1} steps`;
  });
}

await init();
for (const id of ["h-k", "h-p"]) $(id).addEventListener("input", drawHolder);
for (const id of ["e-problem", "e-frac", "e-angle"]) $(id).addEventListener("input", drawEnvelope);
for (const id of ["w-k", "w-p", "w-frac"]) $(id).addEventListener("input", drawOrbit);
drawHolder();
drawEnvelope();
drawOrbit();
