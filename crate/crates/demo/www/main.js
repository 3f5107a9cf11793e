import init, { Demo } from "./pkg/gdenet_demo.js";

const STEPS = 200;
const $ = (id) => document.getElementById(id);

let demo = null;
let edges = [];
let positions = [];
let run = null;
let source = 0;
let edgeCurvature = null;
let playing = null;

function status(msg) {
  $("status").textContent = msg || "";
}

function guard(fn) {
  try {
    status("");
    fn();
  } catch (e) {
    status(e.message || String(e));
  }
}

function buildGraph() {
  if (demo) demo.free();
  demo = new Demo($("family").value, +$("n").value, +$("param").value, BigInt($("seed").value));
  edges = demo.edges();
  positions = demo.positions();
  edgeCurvature = null;
  source = 0;
  for (let v = 0; v < demo.nodes; v++) {
    if (edges.some((u) => u === v)) { source = v; break; }
  }
  solve();
}

function solve() {
  stop();
  const pde = $("pde").value;
  const kind = $("kind").value;
  const tmax = +$("tmax").value;
  const sim = demo.simulate(pde, kind, source, tmax, STEPS);
  run = { times: sim.times(), frames: sim.frames(), energies: sim.energies() };
  sim.free();
  $("time").value = 0;
  drawGraph();
  drawEnergy();
  drawConvergence(demo.chebyshev_convergence(pde, kind, source, tmax));
}

function frame(j) {
  const n = demo.nodes;
  return run.frames.subarray(j * n, (j + 1) * n);
}

function diverging(v, scale) {
  const s = Math.max(-1, Math.min(1, v / scale));
  const a = Math.round(255 * (1 - Math.abs(s)));
  return s >= 0 ? `rgb(255,${a},${a})` : `rgb(${a},${a},255)`;
}

function curvatureColour(k) {
  // Negative curvature red, positive green, flat grey.
  const s = Math.max(-1, Math.min(1, k));
  const c = Math.round(160 * (1 - Math.abs(s)));
  return s >= 0 ? `rgb(${c},${160 + Math.round(60 * s)},${c})` : `rgb(${160 + Math.round(80 * -s)},${c},${c})`;
}

function toScreen(canvas, v) {
  const pad = 16;
  return [pad + positions[2 * v] * (canvas.width - 2 * pad), pad + positions[2 * v + 1] * (canvas.height - 2 * pad)];
}

function drawGraph() {
  const canvas = $("graph");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const j = +$("time").value;
  $("time-value").textContent = run.times[j].toFixed(2);
  const u = frame(j);
  let scale = 0;
  for (const x of u) scale = Math.max(scale, Math.abs(x));
  scale = scale || 1;

  ctx.lineWidth = edgeCurvature ? 2 : 1;
  for (let e = 0; e < edges.length / 2; e++) {
    const [x0, y0] = toScreen(canvas, edges[2 * e]);
    const [x1, y1] = toScreen(canvas, edges[2 * e + 1]);
    ctx.strokeStyle = edgeCurvature ? curvatureColour(edgeCurvature[e]) : "#bbb";
    ctx.beginPath();
    ctx.moveTo(x0, y0);
    ctx.lineTo(x1, y1);
    ctx.stroke();
  }
  ctx.lineWidth = 1;
  for (let v = 0; v < demo.nodes; v++) {
    const [x, y] = toScreen(canvas, v);
    ctx.fillStyle = diverging(u[v], scale);
    ctx.strokeStyle = v === source ? "#000" : "#777";
    ctx.beginPath();
    ctx.arc(x, y, v === source ? 7 : 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
  }
}

function axes(ctx, canvas, xlabel, ylabel) {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(40, 10);
  ctx.lineTo(40, canvas.height - 30);
  ctx.lineTo(canvas.width - 10, canvas.height - 30);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(xlabel, canvas.width - 60, canvas.height - 12);
  ctx.fillText(ylabel, 4, 12);
}

function drawEnergy() {
  const canvas = $("energy");
  const ctx = canvas.getContext("2d");
  axes(ctx, canvas, "t", "energy");
  const e = run.energies;
  const t = run.times;
  const top = Math.max(...e) || 1;
  const w = canvas.width - 50;
  const h = canvas.height - 40;
  const px = (i) => 40 + (t[i] / t[t.length - 1]) * w;
  const py = (v) => canvas.height - 30 - (v / top) * h;
  ctx.strokeStyle = "#c33";
  ctx.beginPath();
  for (let i = 0; i < e.length; i++) {
    if (i === 0) ctx.moveTo(px(i), py(e[i]));
    else ctx.lineTo(px(i), py(e[i]));
  }
  ctx.stroke();
  const j = +$("time").value;
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(px(j), 10);
  ctx.lineTo(px(j), canvas.height - 30);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(top.toPrecision(3), 4, py(top) + 4);
}

function drawConvergence(triples) {
  const canvas = $("cheb");
  const ctx = canvas.getContext("2d");
  axes(ctx, canvas, "order", "log10 error");
  const pts = [];
  for (let i = 0; i < triples.length; i += 3) {
    pts.push([triples[i + 1], Math.log10(Math.max(triples[i + 2], 1e-17))]);
  }
  const maxOrder = Math.max(...pts.map((p) => p[0]), 1);
  const w = canvas.width - 50;
  const h = canvas.height - 40;
  const px = (o) => 40 + (o / maxOrder) * w;
  const py = (l) => 10 + (-l / 17) * h;
  ctx.fillStyle = "#36c";
  for (const [o, l] of pts) {
    ctx.beginPath();
    ctx.arc(px(o), py(l), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  ctx.fillStyle = "#444";
  for (const l of [0, -5, -10, -15]) ctx.fillText(String(l), 14, py(l) + 4);
  ctx.fillText(String(maxOrder), px(maxOrder) - 20, canvas.height - 16);
}

function stop() {
  if (playing !== null) cancelAnimationFrame(playing);
  playing = null;
  $("play").textContent = "Play";
}

function play() {
  if (playing !== null) return stop();
  $("play").textContent = "Pause";
  if (+$("time").value >= STEPS) $("time").value = 0;
  const tick = () => {
    const j = +$("time").value + 1;
    $("time").value = j;
    drawGraph();
    drawEnergy();
    if (j >= STEPS) return stop();
    playing = requestAnimationFrame(tick);
  };
  playing = requestAnimationFrame(tick);
}

function pickNode(event) {
  const canvas = $("graph");
  const r = canvas.getBoundingClientRect();
  const mx = event.clientX - r.left;
  const my = event.clientY - r.top;
  let best = -1;
  let bestD = 100;
  for (let v = 0; v < demo.nodes; v++) {
    const [x, y] = toScreen(canvas, v);
    const d = (x - mx) ** 2 + (y - my) ** 2;
    if (d < bestD) { best = v; bestD = d; }
  }
  if (best >= 0) {
    source = best;
    solve();
  }
}

function syncParamField() {
  const sbm = $("family").value === "sbm";
  $("param-label").textContent = sbm ? "blocks" : "p";
  $("param").value = sbm ? 4 : 0.06;
}

await init();
$("family").addEventListener("change", syncParamField);
$("build").addEventListener("click", () => guard(buildGraph));
for (const id of ["pde", "kind", "tmax"]) $(id).addEventListener("change", () => guard(solve));
$("time").max = STEPS;
$("time").addEventListener("input", () => { drawGraph(); drawEnergy(); });
$("play").addEventListener("click", play);
$("graph").addEventListener("click", (e) => guard(() => pickNode(e)));
$("curv").addEventListener("click", () => guard(() => {
  edgeCurvature = demo.curvatures(0.0);
  drawGraph();
}));
guard(buildGraph);
