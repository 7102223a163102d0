import init, { kernelWeights, kpssBandwidthSweep, exploreSvar } from "./pkg/structvar_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function linePlot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.y).concat(opts.hlines || []).concat([0]);
  let lo = Math.min(...all), hi = Math.max(...all);
  if (hi - lo < 1e-12) { hi += 1; lo -= 1; }
  const n = Math.max(...series.map((s) => s.y.length));
  const sx = (i) => pad + (i / Math.max(n - 1, 1)) * (w - 2 * pad);
  const sy = (v) => h - pad - ((v - lo) / (hi - lo)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.beginPath(); ctx.moveTo(pad, sy(0)); ctx.lineTo(w - pad, sy(0)); ctx.stroke();
  for (const v of opts.hlines || []) {
    ctx.setLineDash([4, 4]); ctx.strokeStyle = "#c33";
    ctx.beginPath(); ctx.moveTo(pad, sy(v)); ctx.lineTo(w - pad, sy(v)); ctx.stroke();
    ctx.setLineDash([]);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color || "#1f5fa8"; ctx.lineWidth = 2;
    ctx.beginPath();
    s.y.forEach((v, i) => (i ? ctx.lineTo(sx(i), sy(v)) : ctx.moveTo(sx(i), sy(v))));
    ctx.stroke();
  }
  ctx.lineWidth = 1; ctx.fillStyle = "#333"; ctx.font = "11px sans-serif";
  ctx.fillText(hi.toPrecision(3), 2, pad - 4);
  ctx.fillText(lo.toPrecision(3), 2, h - 4);
  if (opts.title) ctx.fillText(opts.title, pad + 4, 12);
}

function call(fn, onError) {
  try { return JSON.parse(fn()); } catch (e) { onError(String(e)); return null; }
}

function updateKernel() {
  const r = call(() => kernelWeights($("k-kind").value, num("k-bw"), num("k-lag")), (m) => ($("status").textContent = m));
  if (r) linePlot($("k-plot"), [{ y: r.weights }]);
}

function updateKpss() {
  const r = call(
    () => kpssBandwidthSweep(num("s-phi"), num("s-t"), BigInt(num("s-seed")), $("s-trend").checked, num("s-lag")),
    (m) => ($("s-note").textContent = m),
  );
  if (!r) return;
  linePlot($("s-plot"), [{ y: r.statistics }], { hlines: [r.critical_5pct] });
  $("s-note").textContent =
    `5% critical value ${r.critical_5pct.toFixed(3)} (dashed). Automatic bandwidth ${r.auto_bandwidth.toFixed(2)} gives ${r.auto_statistic.toFixed(3)}.`;
}

let svar = null;

function drawSvar() {
  if (!svar) return;
  const canvas = $("v-plot");
  const j = Number($("v-shock").value);
  const k = svar.names.length;
  const cell = document.createElement("canvas");
  cell.width = Math.floor(canvas.width / k); cell.height = canvas.height;
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  svar.names.forEach((name, i) => {
    linePlot(cell, [{ y: svar.responses[i][j] }], { title: `${name} to ${svar.shocks[j]}` });
    ctx.drawImage(cell, i * cell.width, 0);
  });
}

function runSvar() {
  const r = call(() => exploreSvar(num("v-t"), BigInt(num("v-seed")), num("v-h"), 10), (m) => {
    $("v-listing").textContent = m; $("v-listing").className = "err";
  });
  if (!r) return;
  svar = r;
  const sel = $("v-shock"), prev = sel.value;
  sel.innerHTML = r.shocks.map((s, j) => `<option value="${j}">${s}</option>`).join("");
  if (prev) sel.value = prev;
  $("v-fh").textContent = r.fevd_horizon;
  const head = `<tr><th></th>${r.shocks.map((s) => `<th>${s}</th>`).join("")}</tr>`;
  const rows = r.fevd.map((row, i) => `<tr><th>${r.names[i]}</th>${row.map((v) => `<td>${v.toFixed(1)}</td>`).join("")}</tr>`);
  $("v-fevd").innerHTML = `<table>${head}${rows.join("")}</table>`;
  $("v-listing").className = "";
  $("v-listing").textContent = `${r.listing}\nover-identification LR p-value: ${r.overid_pvalue.toFixed(3)}`;
  drawSvar();
}

await init();
$("status").textContent = "";
for (const id of ["k-kind", "k-bw", "k-lag"]) $(id).addEventListener("input", updateKernel);
for (const id of ["s-phi", "s-t", "s-seed", "s-lag", "s-trend"]) $(id).addEventListener("input", updateKpss);
$("v-run").addEventListener("click", runSvar);
$("v-shock").addEventListener("change", drawSvar);
updateKernel();
updateKpss();
runSvar();
