// Plain-JS front end for the wasm module; no framework, one canvas per demo.

let wasm;
try {
  wasm = await import("./pkg/lir_wasm.js");
  await wasm.default();
} catch (e) {
  document.getElementById("warn").style.display = "block";
  throw e;
}

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// ---- overhead curves -------------------------------------------------------

function drawCurves() {
  const data = JSON.parse(wasm.overhead_curves(num("cv-k"), num("cv-c"), 10, 10, num("cv-n"), num("cv-l")));
  const rows = data.rows;
  const cv = $("cv-curves"), g = cv.getContext("2d");
  const W = cv.width, H = cv.height, L = 52, B = 34;
  g.clearRect(0, 0, W, H);
  const maxY = Math.max(...rows.map(r => Math.max(r.f_bits, r.elr_total))) * 1.08;
  const x = (n) => L + (n - 1) / (rows.length - 1) * (W - L - 14);
  const y = (v) => H - B - v / maxY * (H - B - 16);
  g.strokeStyle = "#d8dee8"; g.fillStyle = "#64748b"; g.font = "11px system-ui";
  for (let t = 0; t <= 4; t++) {
    const v = maxY * t / 4, yy = y(v);
    g.beginPath(); g.moveTo(L, yy); g.lineTo(W - 14, yy); g.stroke();
    g.fillText(Math.round(v) + " b", 4, yy + 4);
  }
  rows.forEach(r => { g.fillText(r.n, x(r.n) - 3, H - B + 16); });
  g.fillText("identifiers encoded (hops)", W / 2 - 60, H - 6);
  const line = (pts, color) => {
    g.strokeStyle = color; g.lineWidth = 2; g.beginPath();
    pts.forEach((p, i) => i ? g.lineTo(p[0], p[1]) : g.moveTo(p[0], p[1]));
    g.stroke(); g.lineWidth = 1;
  };
  line(rows.map(r => [x(r.n), y(r.f_bits)]), "#2563eb");
  line(rows.map(r => [x(r.n), y(r.elr_total)]), "#dc2626");
  g.fillStyle = "#2563eb"; g.fillText("filter, optimal length f(n)", L + 8, 18);
  g.fillStyle = "#dc2626"; g.fillText("explicit list, n^2 · ceil(log2 L)", L + 8, 32);
  const last = rows[rows.length - 1];
  $("cv-stat").innerHTML =
    `at ${last.n} hops: filter <b>${Math.round(last.f_bits)}</b> bits total overhead with an ` +
    `<b>${last.m}</b>-bit header; explicit list <b>${last.elr_total}</b> bits ` +
    `(${last.elr_header}-bit header). The filter curve bends upward: encoding fewer ` +
    `identifiers per segment is cheaper, which is what segment re-encoding exploits.`;
}

// ---- encoding plan ---------------------------------------------------------

function drawPlan() {
  const data = JSON.parse(wasm.encoding_plan(num("pl-n"), num("pl-m"), 5, 8192, num("pl-b"), num("pl-tau")));
  const cv = $("pl-canvas"), g = cv.getContext("2d");
  const W = cv.width, H = cv.height;
  g.clearRect(0, 0, W, H);
  const n = data.policy.length - 1;
  const x = (i) => 30 + i * (W - 60) / n;
  const yNodes = 70;
  g.strokeStyle = "#94a3b8";
  g.beginPath(); g.moveTo(x(0), yNodes); g.lineTo(x(n), yNodes); g.stroke();
  data.segments.forEach((s, si) => {
    const a = x(s.encoder - 1), b = x(s.encoder - 1 + s.len);
    g.fillStyle = si % 2 ? "#93c5fd" : "#2563eb";
    g.fillRect(a, yNodes - 7, b - a, 14);
    g.fillStyle = "#1c2430"; g.font = "11px system-ui";
    g.fillText(`${s.len} ids @ ${s.m} b`, (a + b) / 2 - 28, yNodes - 14);
  });
  data.policy.forEach((bit, i) => {
    g.beginPath(); g.arc(x(i), yNodes, bit ? 7 : 4, 0, 7);
    g.fillStyle = bit ? "#1d4ed8" : "#cbd5e1"; g.fill();
  });
  g.fillStyle = "#64748b"; g.font = "11px system-ui";
  g.fillText("source", x(0) - 16, yNodes + 22);
  g.fillText("destination", x(n) - 28, yNodes + 22);
  // prefix-cost staircase
  const maxH = Math.max(...data.h_us) * 1.15 || 1;
  const hx = (i) => 40 + i * (W - 70) / (data.h_us.length - 1);
  const hy = (v) => H - 30 - v / maxH * (H - 150);
  g.strokeStyle = "#d8dee8";
  g.beginPath(); g.moveTo(40, hy(0)); g.lineTo(W - 30, hy(0)); g.stroke();
  g.strokeStyle = "#059669"; g.lineWidth = 2; g.beginPath();
  data.h_us.forEach((v, i) => i ? g.lineTo(hx(i), hy(v)) : g.moveTo(hx(i), hy(v)));
  g.stroke(); g.lineWidth = 1;
  g.fillStyle = "#059669";
  g.fillText("minimal temporal overhead of each prefix (µs)", 44, hy(maxH / 1.15) - 8);
  data.h_us.forEach((v, i) => { g.fillStyle = "#64748b"; g.fillText(i, hx(i) - 3, H - 14); });
  const gain = (1 - data.optimal_us / data.source_us) * 100;
  $("pl-stat").innerHTML =
    `optimal plan <b>${data.optimal_us.toFixed(1)} µs</b> vs one-shot source encoding ` +
    `<b>${data.source_us.toFixed(1)} µs</b> — ${gain.toFixed(0)}% less temporal overhead ` +
    `with ${data.segments.length} encoding${data.segments.length > 1 ? "s" : ""}.`;
}

// ---- forwarding walk -------------------------------------------------------

const ORBITS = 6, SATS = 11;
let anim = null;

function drawWalk() {
  const [so, ss] = $("wk-src").value.split(",").map(Number);
  const [do_, ds] = $("wk-dst").value.split(",").map(Number);
  const data = JSON.parse(wasm.forwarding_walk(ORBITS, SATS, num("wk-m"), 5, num("wk-seed"), so, ss, do_, ds));
  if (data.error) { $("wk-stat").textContent = data.error; return; }
  const cv = $("wk-canvas"), g = cv.getContext("2d");
  const W = cv.width, H = cv.height;
  const x = (s) => 40 + s * (W - 80) / (SATS - 1);
  const y = (o) => 34 + o * (H - 70) / (ORBITS - 1);
  if (anim) cancelAnimationFrame(anim);
  const wrong = data.hops.filter(h => h.wrong).length;
  let frame = 0;
  const render = () => {
    g.clearRect(0, 0, W, H);
    g.strokeStyle = "#e4e9f1";
    for (let o = 0; o < ORBITS; o++) for (let s = 0; s < SATS; s++) {
      if (s + 1 < SATS) { g.beginPath(); g.moveTo(x(s), y(o)); g.lineTo(x(s + 1), y(o)); g.stroke(); }
      if (o + 1 < ORBITS) { g.beginPath(); g.moveTo(x(s), y(o)); g.lineTo(x(s), y(o + 1)); g.stroke(); }
    }
    g.strokeStyle = "#bfd3f8"; g.lineWidth = 4;
    data.path.forEach(([a, b]) => {
      g.beginPath(); g.moveTo(x(a[1]), y(a[0])); g.lineTo(x(b[1]), y(b[0])); g.stroke();
    });
    g.lineWidth = 2;
    const upto = Math.min(Math.floor(frame / 6), data.hops.length);
    data.hops.slice(0, upto).forEach(h => {
      g.strokeStyle = h.wrong ? "#dc2626" : "#2563eb";
      const [fo, fs] = h.from, [to, ts] = h.to;
      if (Math.abs(fo - to) > 1 || Math.abs(fs - ts) > 1) return; // wrap hop, skip drawing
      g.beginPath(); g.moveTo(x(fs), y(fo)); g.lineTo(x(ts), y(to)); g.stroke();
      g.beginPath(); g.arc(x(ts), y(to), 3.5, 0, 7);
      g.fillStyle = h.wrong ? "#dc2626" : "#2563eb"; g.fill();
    });
    for (let o = 0; o < ORBITS; o++) for (let s = 0; s < SATS; s++) {
      g.beginPath(); g.arc(x(s), y(o), 3, 0, 7); g.fillStyle = "#94a3b8"; g.fill();
    }
    const mark = (pt, color, label) => {
      g.beginPath(); g.arc(x(pt[1]), y(pt[0]), 7, 0, 7);
      g.strokeStyle = color; g.stroke();
      g.fillStyle = color; g.font = "12px system-ui";
      g.fillText(label, x(pt[1]) + 9, y(pt[0]) - 8);
    };
    mark(data.src, "#059669", "src");
    mark(data.dst, "#7c3aed", "dst");
    if (upto < data.hops.length) { frame++; anim = requestAnimationFrame(render); }
  };
  render();
  $("wk-stat").innerHTML =
    `${data.hops.length} traversals: <b>${data.hops.length - wrong}</b> on the encoded path, ` +
    `<b style="color:#dc2626">${wrong}</b> wrong turns from false positives; ` +
    `${data.delivered} cop${data.delivered === 1 ? "y" : "ies"} reached the destination, ` +
    `${data.dead_ends} died at dead ends. Shrink the filter to breed wrong turns.`;
}

for (let o = 0; o < ORBITS; o++) for (let s = 0; s < SATS; s++) {
  for (const sel of ["wk-src", "wk-dst"]) {
    const opt = document.createElement("option");
    opt.value = `${o},${s}`; opt.textContent = `(${o},${s})`;
    $(sel).appendChild(opt);
  }
}
$("wk-src").value = "0,0";
$("wk-dst").value = "2,4";

for (const [ids, fn] of [
  [["cv-k", "cv-c", "cv-n", "cv-l"], drawCurves],
  [["pl-n", "pl-m", "pl-b", "pl-tau"], drawPlan],
  [["wk-m", "wk-seed", "wk-src", "wk-dst"], drawWalk],
]) {
  ids.forEach(id => $(id).addEventListener("change", fn));
}

drawCurves();
drawPlan();
drawWalk();
