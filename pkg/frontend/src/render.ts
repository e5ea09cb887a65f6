/**
 * Canvas drawing for the dawn-to-dusk scene, the activation meter, and the
 * diagnostics strip.
 */
import { Diagnostics } from "./client";
import { SceneState, skyColor, sunElevation } from "./scene";

function css([r, g, b]: [number, number, number]): string {
  return `rgb(${Math.round(r)},${Math.round(g)},${Math.round(b)})`;
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  state: SceneState,
  diag: Diagnostics,
  mode: string,
  held: boolean,
): void {
  const { width: w, height: h } = ctx.canvas;
  const horizon = h * 0.78;

  // sky
  const sky = skyColor(state.scenePhase);
  const gradient = ctx.createLinearGradient(0, 0, 0, horizon);
  gradient.addColorStop(0, css(sky));
  gradient.addColorStop(1, css([sky[0] * 0.85 + 30, sky[1] * 0.85 + 20, sky[2] * 0.9 + 10]));
  ctx.fillStyle = gradient;
  ctx.fillRect(0, 0, w, horizon);

  // sun
  const elevation = sunElevation(state.scenePhase);
  const sunX = w * (0.2 + 0.6 * state.scenePhase);
  const sunY = horizon - elevation * (horizon - 30);
  const glow = 1 - state.scenePhase * 0.5;
  ctx.fillStyle = `rgba(255,${Math.round(210 - 90 * state.scenePhase)},80,${glow})`;
  ctx.beginPath();
  ctx.arc(sunX, sunY, 24, 0, 2 * Math.PI);
  ctx.fill();

  // ground
  const dusk = state.scenePhase;
  ctx.fillStyle = css([40 + 20 * (1 - dusk), 90 * (1 - dusk) + 25, 35]);
  ctx.fillRect(0, horizon, w, h - horizon);

  // activation meter
  const meterW = 26;
  const meterH = h * 0.5;
  const mx = w - 52;
  const my = h * 0.12;
  ctx.fillStyle = "rgba(255,255,255,0.25)";
  ctx.fillRect(mx, my, meterW, meterH);
  const fill = state.activation * meterH;
  ctx.fillStyle = state.activation > 0.7 ? "#d9534f" : "#3fae6a";
  ctx.fillRect(mx, my + meterH - fill, meterW, fill);
  ctx.strokeStyle = "#fff";
  ctx.strokeRect(mx, my, meterW, meterH);
  ctx.fillStyle = "#fff";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText("tension", mx + meterW / 2, my + meterH + 16);

  // phase bar along the bottom
  ctx.fillStyle = "rgba(0,0,0,0.35)";
  ctx.fillRect(0, h - 8, w, 8);
  ctx.fillStyle = "#f2c14e";
  ctx.fillRect(0, h - 8, w * state.scenePhase, 8);

  // diagnostics strip
  ctx.fillStyle = "rgba(0,0,0,0.55)";
  ctx.fillRect(0, 0, w, 22);
  ctx.fillStyle = "#eee";
  ctx.textAlign = "left";
  const latency =
    diag.lastLatencyMs === null ? "n/a" : `${diag.lastLatencyMs.toFixed(1)} ms`;
  const heldNote = mode === "operator" ? (held ? "  [HOLDING]" : "  [hold space/pointer to tense]") : "";
  ctx.fillText(
    `${diag.status} | packets ${diag.received} | malformed ${diag.malformed} | ` +
      `latency est ${latency} | phase ${(state.scenePhase * 100).toFixed(1)}% | mode ${mode}${heldNote}`,
    8,
    15,
  );
}
