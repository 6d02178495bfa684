import init, { example_config, density_grid, heisenberg_window, design_report } from "./pkg/nilframe_demo.js";

const $ = (id) => document.getElementById(id);

function showError(el, err) {
  el.innerHTML = "";
  const span = document.createElement("span");
  span.className = "error";
  span.textContent = String(err);
  el.appendChild(span);
}

function heat(t) {
  // Dark blue through teal to yellow.
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.6 * t - 0.4)));
  const g = Math.round(255 * Math.min(1, 0.2 + 0.8 * t));
  const b = Math.round(255 * Math.max(0, 0.6 - 0.6 * t));
  return [r, g, b];
}

function plotDensity() {
  const info = $("density-info");
  const canvas = $("density-canvas");
  const ctx = canvas.getContext("2d");
  try {
    const cfg = example_config(Number($("density-example").value));
    const nx = 120, ny = 90;
    const data = JSON.parse(density_grid(cfg, nx, ny));
    const rows = data.values.length;
    const img = ctx.createImageData(canvas.width, canvas.height);
    for (let y = 0; y < canvas.height; y++) {
      const j = rows === 1 ? 0 : Math.min(rows - 1, Math.floor(((canvas.height - 1 - y) / canvas.height) * rows));
      for (let x = 0; x < canvas.width; x++) {
        const i = Math.min(nx - 1, Math.floor((x / canvas.width) * nx));
        const v = data.values[j][i];
        const [r, g, b] = rows === 1
          ? (canvas.height - y < (v / data.max) * canvas.height ? heat(v / data.max) : [255, 255, 255])
          : heat(data.max > 0 ? v / data.max : 0);
        const k = 4 * (y * canvas.width + x);
        img.data[k] = r; img.data[k + 1] = g; img.data[k + 2] = b; img.data[k + 3] = 255;
      }
    }
    ctx.putImageData(img, 0, 0);
    info.textContent = `det B = ${data.polynomial}; box [0, ${data.a.join("] × [0, ")}]; max on grid ${data.max.toFixed(4)}`;
  } catch (e) {
    showError(info, e);
  }
}

function buildWindow() {
  const out = $("win-out");
  const canvas = $("win-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  try {
    const lambda = Number($("win-lambda").value);
    const res = JSON.parse(heisenberg_window(lambda, $("win-q").value.trim(), Number($("win-trunc").value)));
    const lo = Math.min(0, ...res.pieces.map((p) => p[0])) - 1;
    const hi = Math.max(...res.pieces.map((p) => p[1])) + 1;
    const sx = (x) => ((x - lo) / (hi - lo)) * canvas.width;
    const base = canvas.height - 20;
    const top = 20;
    ctx.strokeStyle = "#999";
    ctx.beginPath(); ctx.moveTo(0, base); ctx.lineTo(canvas.width, base); ctx.stroke();
    ctx.fillStyle = "#666";
    ctx.font = "11px sans-serif";
    for (let t = Math.ceil(lo); t <= hi; t++) {
      ctx.fillRect(sx(t), base, 1, 5);
      ctx.fillText(String(t), sx(t) - 3, base + 16);
    }
    ctx.fillStyle = "rgba(30, 110, 180, 0.65)";
    for (const [a, b] of res.pieces) ctx.fillRect(sx(a), top, sx(b) - sx(a), base - top);
    ctx.fillStyle = "#222";
    ctx.fillText(`height ${res.scale.toFixed(4)}`, 6, 14);
    out.textContent = JSON.stringify(
      {
        translation_step: res.translation,
        modulation_step: Math.abs(res.modulation),
        volume: res.volume,
        window_norm_sq: res.norm_sq,
        tiling: res.tiling,
        parseval_ratios: res.defect.ratios,
        parseval_defect: res.defect.defect,
      },
      null,
      2,
    );
  } catch (e) {
    showError(out, e);
  }
}

function loadDesignExample() {
  $("design-config").value = example_config(Number($("design-example").value));
}

function runDesign() {
  const out = $("design-out");
  try {
    const report = JSON.parse(design_report($("design-config").value));
    const summary = {
      exit_code: report.status.exit_code,
      failures: report.status.failures,
      error: report.status.error,
      s: report.analysis?.s?.value,
      mu_i: report.analysis?.mu_i?.value,
      det_b: report.analysis?.det_b?.polynomial,
      lattice: report.design?.label,
      predicted_norm_sq: report.design?.predicted_norm_sq?.value,
      density: report.design?.density?.detail,
      onb: report.design?.onb?.detail,
      wavelet: report.design?.wavelet?.condition?.detail,
    };
    out.textContent = JSON.stringify(summary, null, 2);
  } catch (e) {
    showError(out, e);
  }
}

await init();
$("density-run").addEventListener("click", plotDensity);
$("win-run").addEventListener("click", buildWindow);
$("design-example").addEventListener("change", loadDesignExample);
$("design-run").addEventListener("click", runDesign);
loadDesignExample();
plotDensity();
buildWindow();
