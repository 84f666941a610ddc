import init, { spacetime, survival_curve, duality_check } from "./pkg/twostage_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const gammaOf = (id) => {
  const v = $(id).value.trim().toLowerCase();
  return v === "inf" || v === "infinity" ? Infinity : Number(v);
};
const status = (msg) => { $("status").textContent = msg; };

const COLORS = [[255, 255, 255], [243, 156, 18], [31, 58, 147]];

function drawSpacetime() {
  const sites = num("st-sites");
  const rows = 300;
  try {
    const img = spacetime(sites, num("st-lambda"), gammaOf("st-gamma"), num("st-delta"),
      num("st-tmax"), rows, num("st-seed"), $("st-dual").checked);
    const canvas = $("st-canvas");
    canvas.width = sites;
    canvas.height = rows;
    canvas.style.width = `${Math.max(sites, 400)}px`;
    canvas.style.height = `${rows * 1.5}px`;
    const ctx = canvas.getContext("2d");
    const data = ctx.createImageData(sites, rows);
    img.forEach((s, i) => {
      const [r, g, b] = COLORS[s];
      data.data.set([r, g, b, 255], 4 * i);
    });
    ctx.putImageData(data, 0, 0);
    status("");
  } catch (e) {
    status(`spacetime: ${e}`);
  }
}

function drawSurvival() {
  const n = num("sv-points");
  const from = num("sv-from");
  const to = num("sv-to");
  const lambdas = Float64Array.from({ length: n }, (_, i) => from + (to - from) * i / (n - 1));
  status("estimating...");
  // let the status line paint first
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const v = survival_curve(lambdas, gammaOf("sv-gamma"), num("sv-delta"), num("sv-L"),
        num("sv-tmax"), num("sv-reps"), 7);
      plot(lambdas, v);
      status(`${n} points in ${((performance.now() - t0) / 1000).toFixed(1)} s`);
    } catch (e) {
      status(`survival: ${e}`);
    }
  }, 10);
}

function plot(lambdas, v) {
  const canvas = $("sv-canvas");
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  const lo = lambdas[0], hi = lambdas[lambdas.length - 1];
  const x = (l) => pad + (w - 2 * pad) * (l - lo) / (hi - lo || 1);
  const y = (p) => h - pad - (h - 2 * pad) * p;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText("1", 8, y(1) + 4);
  ctx.fillText("0", 8, y(0) + 4);
  ctx.fillText(lo.toFixed(2), pad, h - 10);
  ctx.fillText(hi.toFixed(2), w - pad - 20, h - 10);
  ctx.fillText("lambda", w / 2 - 15, h - 10);
  ctx.strokeStyle = "#1f3a93";
  lambdas.forEach((l, i) => {
    const [m, a, b] = [v[3 * i], v[3 * i + 1], v[3 * i + 2]];
    ctx.beginPath();
    ctx.moveTo(x(l), y(a));
    ctx.lineTo(x(l), y(b));
    ctx.stroke();
    ctx.fillRect(x(l) - 2, y(m) - 2, 4, 4);
  });
}

function runDuality() {
  const trials = num("du-trials");
  const violations = duality_check(trials, num("du-seed"));
  $("du-out").textContent = `${trials} trials, violations: ${violations}`;
}

await init();
$("st-run").onclick = drawSpacetime;
$("sv-run").onclick = drawSurvival;
$("du-run").onclick = runDuality;
status("");
drawSpacetime();
