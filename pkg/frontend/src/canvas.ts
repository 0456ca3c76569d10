// Canvas adapter: replays draw commands onto a 2D context.

import type { DrawCommand, Viewport } from "./render.js";
import { worldToScreen } from "./render.js";

export function applyDrawCommands(
  ctx: CanvasRenderingContext2D,
  commands: DrawCommand[],
  view: Viewport,
): void {
  ctx.fillStyle = "#1b1d22";
  ctx.fillRect(0, 0, view.canvasW, view.canvasH);
  for (const cmd of commands) {
    switch (cmd.kind) {
      case "raster":
        drawRaster(ctx, cmd, view);
        break;
      case "disc": {
        const [sx, sy] = worldToScreen(view, cmd.x, cmd.y);
        ctx.beginPath();
        ctx.arc(sx, sy, cmd.r * view.pixelsPerMeter, 0, 2 * Math.PI);
        ctx.fillStyle = cmd.color;
        ctx.fill();
        break;
      }
      case "poly": {
        ctx.beginPath();
        cmd.points.forEach(([x, y], i) => {
          const [sx, sy] = worldToScreen(view, x, y);
          if (i === 0) ctx.moveTo(sx, sy);
          else ctx.lineTo(sx, sy);
        });
        ctx.closePath();
        ctx.fillStyle = cmd.color;
        ctx.fill();
        break;
      }
      case "line": {
        ctx.beginPath();
        cmd.points.forEach(([x, y], i) => {
          const [sx, sy] = worldToScreen(view, x, y);
          if (i === 0) ctx.moveTo(sx, sy);
          else ctx.lineTo(sx, sy);
        });
        ctx.strokeStyle = cmd.color;
        ctx.lineWidth = 1;
        ctx.stroke();
        break;
      }
      case "text":
        ctx.fillStyle = cmd.color;
        ctx.font = "16px sans-serif";
        ctx.textAlign = "center";
        ctx.fillText(cmd.text, cmd.x, cmd.y);
        break;
    }
  }
}

function drawRaster(
  ctx: CanvasRenderingContext2D,
  cmd: Extract<DrawCommand, { kind: "raster" }>,
  view: Viewport,
): void {
  const [ny, nx] = cmd.shape;
  // coarse block fill: at typical zooms one cell is under a pixel, so
  // draw in row runs for speed
  const res = cmd.resolution;
  for (let r = 0; r < ny; r += 1) {
    let c0 = 0;
    while (c0 < nx) {
      const v = cmd.cells[r * nx + c0];
      let c1 = c0 + 1;
      while (c1 < nx && cmd.cells[r * nx + c1] === v) c1 += 1;
      const color = cmd.palette[v];
      if (color !== undefined) {
        const [sx0, sy0] = worldToScreen(view, c0 * res, (r + 1) * res);
        const [sx1, sy1] = worldToScreen(view, c1 * res, r * res);
        ctx.fillStyle = color;
        ctx.fillRect(sx0, sy0, Math.max(1, sx1 - sx0), Math.max(1, sy1 - sy0));
      }
      c0 = c1;
    }
  }
}
