// Build with:
//   cargo build -p kicked-rotor-web --target wasm32-unknown-unknown --release
//   wasm-bindgen --target web --out-dir crates/web/www/pkg \
//     target/wasm32-unknown-unknown/release/kicked_rotor_web.wasm
import init, { section, energies, momentum } from "./pkg/kicked_rotor_web.js";

const canvas = document.getElementById("plot");
const ctx = canvas.getContext("2d");
const status = document.getElementById("status");
const PAD = 60;
const COLORS = ["#1f77b4", "#d62728"];

const params = () => ({
  schedule: document.getElementById("schedule").value,
  kappa: Number(document.getElementById("kappa").value),
  tau: Number(document.getElementById("tau").value),
  kicks: Math.max(1, Math.floor(Number(document.getElementById("kicks").value))),
});

function frame(xr, yr, xlabel, ylabel, xfmt = (v) => v.toFixed(2), yfmt = xfmt) {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const w = canvas.width - 2 * PAD, h = canvas.height - 2 * PAD;
  ctx.strokeStyle = "#000";
  ctx.strokeRect(PAD, PAD, w, h);
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "center";
  for (let i = 0; i <= 5; i++) {
    const x = xr[0] + (i / 5) * (xr[1] - xr[0]);
    ctx.fillText(xfmt(x), PAD + (i / 5) * w, PAD + h + 18);
  }
  ctx.textAlign = "right";
  for (let i = 0; i <= 5; i++) {
    const y = yr[0] + (i / 5) * (yr[1] - yr[0]);
    ctx.fillText(yfmt(y), PAD - 6, PAD + h - (i / 5) * h + 4);
  }
  ctx.textAlign = "center";
  ctx.fillText(xlabel, PAD + w / 2, canvas.height - 15);
  ctx.save();
  ctx.translate(15, PAD + h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
  return (x, y) => [
    PAD + ((x - xr[0]) / (xr[1] - xr[0])) * w,
    PAD + h - ((y - yr[0]) / (yr[1] - yr[0])) * h,
  ];
}

function line(map, xs, ys, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  let started = false;
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
    const [px, py] = map(xs[i], ys[i]);
    if (started) ctx.lineTo(px, py); else ctx.moveTo(px, py);
    started = true;
  }
  ctx.stroke();
}

function legend(items) {
  items.forEach(([label, color], i) => {
    ctx.fillStyle = color;
    ctx.fillRect(PAD + 12, PAD + 12 + 16 * i, 14, 3);
    ctx.fillStyle = "#000";
    ctx.textAlign = "left";
    ctx.fillText(label, PAD + 32, PAD + 17 + 16 * i);
  });
}

function timed(label, f) {
  status.textContent = `Running ${label}...`;
  setTimeout(() => {
    const t0 = performance.now();
    try {
      f();
      status.textContent = `${label}: ${((performance.now() - t0) / 1000).toFixed(2)} s`;
    } catch (e) {
      status.textContent = `${label} failed: ${e}`;
    }
  }, 10);
}

function drawSection() {
  const p = params();
  const kicks = Math.min(p.kicks, 400);
  timed("section", () => {
    const pts = section(p.schedule, p.kappa, 40, kicks);
    const map = frame([0, 2 * Math.PI], [0, 2 * Math.PI], "theta mod 2pi", "L mod 2pi");
    ctx.fillStyle = COLORS[0];
    for (let i = 0; i < pts.length; i += 2) {
      const [x, y] = map(pts[i], pts[i + 1]);
      ctx.fillRect(x, y, 1, 1);
    }
  });
}

function drawEnergy() {
  const p = params();
  timed("energy", () => {
    const v = energies(p.schedule, p.kappa, p.tau, p.kicks, 20000);
    const n = v.length / 2;
    const xs = [], q = [], c = [];
    for (let i = 1; i < n; i++) {
      xs.push(Math.log10(i));
      q.push(Math.log10(v[i]));
      c.push(Math.log10(v[n + i]));
    }
    const all = q.concat(c).filter(Number.isFinite);
    const yr = [Math.floor(Math.min(...all)), Math.ceil(Math.max(...all))];
    const pow = (t) => `1e${t.toFixed(1)}`;
    const map = frame([0, Math.log10(n - 1)], yr, "kicks N", "scaled energy", pow, pow);
    line(map, xs, q, COLORS[0]);
    line(map, xs, c, COLORS[1]);
    legend([["quantum", COLORS[0]], ["classical", COLORS[1]]]);
  });
}

function drawMomentum() {
  const p = params();
  timed("distribution", () => {
    const v = momentum(p.schedule, p.kappa, p.tau, p.kicks);
    const first = v[0];
    const xs = [], ys = [];
    for (let i = 1; i < v.length; i++) {
      xs.push(first + i - 1);
      ys.push(Math.log10(Math.max(v[i], 1e-30)));
    }
    const map = frame([xs[0], xs[xs.length - 1]], [-30, 0], "m", "log10 P(m)", (x) => x.toFixed(0), (y) => y.toFixed(0));
    line(map, xs, ys, COLORS[0]);
  });
}

await init();
status.textContent = "Ready.";
document.getElementById("run-section").onclick = drawSection;
document.getElementById("run-energy").onclick = drawEnergy;
document.getElementById("run-momentum").onclick = drawMomentum;
