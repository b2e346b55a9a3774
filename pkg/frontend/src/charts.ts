// Minimal time-series chart for the sensor panels.

import { ReadingPoint } from "./types.js";

export function drawSeries(
  canvas: HTMLCanvasElement,
  points: ReadingPoint[],
  label: string,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10273a";
  ctx.fillRect(0, 0, width, height);
  ctx.fillStyle = "#9fb4c4";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(label, 6, 14);

  if (points.length === 0) {
    ctx.fillText("no data", 6, height / 2);
    return;
  }

  const ts = points.map((p) => p.t);
  const vs = points.map((p) => p.value);
  const tMin = Math.min(...ts);
  const tMax = Math.max(...ts);
  const vMin = Math.min(...vs);
  const vMax = Math.max(...vs);
  const vSpan = vMax - vMin || 1;
  const tSpan = tMax - tMin || 1;
  const pad = 20;

  ctx.strokeStyle = "#6fe3a5";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  points.forEach((p, i) => {
    const x = pad + ((p.t - tMin) / tSpan) * (width - 2 * pad);
    const y = height - pad - ((p.value - vMin) / vSpan) * (height - 2 * pad - 14);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();

  ctx.fillStyle = "#7a8fa0";
  ctx.font = "10px monospace";
  ctx.fillText(`${vMax}`, 2, pad + 8);
  ctx.fillText(`${vMin}`, 2, height - pad + 8);
  ctx.fillText(String(points[points.length - 1].value), width - pad - 50, 14);
}
