// Built with `wasm-pack build crates/web --target web --out-dir www/pkg`.
import init, { samplePoints, estimate, groundTruth } from "./pkg/berbench_web.js";

const $ = (id) => document.getElementById(id);
let truth = null;
let lastEstimates = null;

function inputs() {
  return {
    family: $("family").value,
    d: Number($("d").value),
    control: Number($("control").value),
    n: Number($("n").value),
    seed: Number($("seed").value),
    batches: Number($("batches").value),
    estimators: $("estimators").value,
  };
}

function status(text, isError = false) {
  $("status").textContent = text;
  $("status").className = isError ? "err" : "";
}

// let the status line paint before a long synchronous call
function later(fn) {
  return new Promise((resolve) => setTimeout(() => resolve(fn()), 20));
}

function draw(sample) {
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const xs = sample.points.map((p) => p[0]);
  const ys = sample.points.map((p) => p[1]);
  const lo = Math.min(...xs, ...ys);
  const hi = Math.max(...xs, ...ys);
  const pad = 12;
  const scale = (canvas.width - 2 * pad) / (hi - lo || 1);
  const colors = ["rgba(31,119,180,0.55)", "rgba(214,39,40,0.55)"];
  sample.points.forEach(([x, y], i) => {
    ctx.fillStyle = colors[sample.labels[i]];
    ctx.beginPath();
    ctx.arc(pad + (x - lo) * scale, canvas.height - pad - (y - lo) * scale, 2, 0, 2 * Math.PI);
    ctx.fill();
  });
  ctx.fillStyle = "#444";
  ctx.fillText(sample.d > 1 ? "first two coordinates" : "d = 1 (y fixed at 0)", pad, pad);
}

function renderEstimates() {
  const body = $("results").querySelector("tbody");
  body.innerHTML = "";
  if (!lastEstimates) return;
  for (const [id, v] of Object.entries(lastEstimates.estimates)) {
    const tr = document.createElement("tr");
    const err = truth ? (100 * (truth.ber - v)).toFixed(2) : "";
    tr.innerHTML = `<td>${id}</td><td>${v.toFixed(4)}</td><td>${err}</td>`;
    body.appendChild(tr);
  }
}

async function run(label, fn) {
  status(`${label}...`);
  try {
    const t0 = performance.now();
    await later(fn);
    status(`${label} done in ${((performance.now() - t0) / 1000).toFixed(2)} s`);
  } catch (e) {
    status(String(e.message || e), true);
  }
}

function resetTruth() {
  truth = null;
  $("truthline").textContent = "";
}

await init();

$("sample").onclick = () =>
  run("sampling", () => {
    const p = inputs();
    draw(JSON.parse(samplePoints(p.family, p.d, p.control, p.n, p.seed)));
  });

$("estimate").onclick = () =>
  run("estimating", () => {
    const p = inputs();
    draw(JSON.parse(samplePoints(p.family, p.d, p.control, p.n, p.seed)));
    lastEstimates = JSON.parse(estimate(p.family, p.d, p.control, p.n, p.seed, p.estimators));
    renderEstimates();
  });

$("truth").onclick = () =>
  run("Monte Carlo", () => {
    const p = inputs();
    truth = JSON.parse(groundTruth(p.family, p.d, p.control, p.seed, p.batches));
    $("truthline").textContent =
      `true BER ≈ ${truth.ber.toFixed(4)} ± ${truth.std_err.toFixed(4)} (${truth.n_mc} draws)`;
    renderEstimates();
  });

for (const id of ["family", "d", "control", "seed"]) {
  $(id).addEventListener("change", resetTruth);
}
