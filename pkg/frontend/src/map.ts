// Planar track map on a canvas: equirectangular projection around the track
// centroid, lat/lon axis labels, heading arrow at the newest fix. No tile
// service; the page works fully offline.

import { TrackPoint } from "./types.js";

const EARTH_RADIUS_M = 6371000;

interface Projected {
  x: number;
  y: number;
}

export function drawTrack(
  canvas: HTMLCanvasElement,
  track: TrackPoint[],
  capsized: boolean,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#0b1d2a";
  ctx.fillRect(0, 0, width, height);

  if (track.length === 0) {
    ctx.fillStyle = "#7a8fa0";
    ctx.font = "16px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("no data", width / 2, height / 2);
    return;
  }

  const lat0 = track.reduce((s, p) => s + p.lat, 0) / track.length;
  const lon0 = track.reduce((s, p) => s + p.lon, 0) / track.length;
  const coslat = Math.cos((lat0 * Math.PI) / 180);
  const toXY = (p: { lat: number; lon: number }): Projected => ({
    x: ((p.lon - lon0) * Math.PI * EARTH_RADIUS_M * coslat) / 180,
    y: ((p.lat - lat0) * Math.PI * EARTH_RADIUS_M) / 180,
  });

  const pts = track.map(toXY);
  const xs = pts.map((p) => p.x);
  const ys = pts.map((p) => p.y);
  const pad = 40;
  const span = Math.max(
    Math.max(...xs) - Math.min(...xs),
    Math.max(...ys) - Math.min(...ys),
    50,
  );
  const scale = (Math.min(width, height) - 2 * pad) / span;
  const cx = (Math.max(...xs) + Math.min(...xs)) / 2;
  const cy = (Math.max(...ys) + Math.min(...ys)) / 2;
  const toPx = (p: Projected) => ({
    x: width / 2 + (p.x - cx) * scale,
    y: height / 2 - (p.y - cy) * scale,
  });

  ctx.strokeStyle = "#47c8ff";
  ctx.lineWidth = 2;
  ctx.beginPath();
  pts.forEach((p, i) => {
    const q = toPx(p);
    if (i === 0) ctx.moveTo(q.x, q.y);
    else ctx.lineTo(q.x, q.y);
  });
  ctx.stroke();

  // Current position with heading arrow.
  const last = track[track.length - 1];
  const head = toPx(pts[pts.length - 1]);
  const theta = ((90 - last.heading_deg) * Math.PI) / 180; // screen angle
  ctx.fillStyle = capsized ? "#ff5252" : "#ffd54f";
  ctx.beginPath();
  ctx.arc(head.x, head.y, 6, 0, 2 * Math.PI);
  ctx.fill();
  ctx.strokeStyle = ctx.fillStyle;
  ctx.beginPath();
  ctx.moveTo(head.x, head.y);
  ctx.lineTo(head.x + 18 * Math.cos(theta), head.y - 18 * Math.sin(theta));
  ctx.stroke();

  // Axis labels: geodetic corners of the plotted frame.
  ctx.fillStyle = "#7a8fa0";
  ctx.font = "11px monospace";
  ctx.textAlign = "left";
  const lonAt = (x: number) => lon0 + (x * 180) / (Math.PI * EARTH_RADIUS_M * coslat);
  const latAt = (y: number) => lat0 + (y * 180) / (Math.PI * EARTH_RADIUS_M);
  const west = lonAt(cx - (width / 2 - pad) / scale);
  const east = lonAt(cx + (width / 2 - pad) / scale);
  const south = latAt(cy - (height / 2 - pad) / scale);
  const north = latAt(cy + (height / 2 - pad) / scale);
  ctx.fillText(`${west.toFixed(5)}°`, 4, height - 6);
  ctx.textAlign = "right";
  ctx.fillText(`${east.toFixed(5)}°`, width - 4, height - 6);
  ctx.textAlign = "left";
  ctx.fillText(`${north.toFixed(5)}°`, 4, 14);
  ctx.fillText(`${south.toFixed(5)}°`, 4, height - 20);
}
