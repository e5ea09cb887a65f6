/**
 * Entry point: read the URL configuration, connect to the broker, and run
 * the animation loop.
 *
 * Query parameters:
 *   broker=host:port   WebSocket broker listener   (default localhost:9001)
 *   mode=replay-view | operator                    (default replay-view)
 *   rest=<mV> max=<mV> calibration                 (default 0.05 / 0.35)
 *   hold=<ms> release=<ms> operator ramp times     (default 1000 / 600)
 */
import { FeedbackClient } from "./client";
import { DEFAULT_OPERATOR_CONFIG, OperatorSource } from "./operator";
import { advanceScene, Calibration, initialScene, SceneState } from "./scene";
import { drawScene } from "./render";

const params = new URLSearchParams(window.location.search);
const broker = params.get("broker") ?? "localhost:9001";
const mode = params.get("mode") === "operator" ? "operator" : "replay-view";
const cal: Calibration = {
  rmsRestMv: Number(params.get("rest") ?? 0.05),
  rmsMaxMv: Number(params.get("max") ?? 0.35),
};
const dataTopic = params.get("topic") ?? "vrx/emg/rms";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;

let scene: SceneState = initialScene();
let held = false;

const client = new FeedbackClient(`ws://${broker}`, dataTopic);
client.connect((packet) => {
  scene = advanceScene(scene, packet, cal);
});

if (mode === "operator") {
  const operator = new OperatorSource({
    ...DEFAULT_OPERATOR_CONFIG,
    holdRampMs: Number(params.get("hold") ?? DEFAULT_OPERATOR_CONFIG.holdRampMs),
    releaseRampMs: Number(params.get("release") ?? DEFAULT_OPERATOR_CONFIG.releaseRampMs),
    cal,
  });
  window.addEventListener("keydown", (e) => {
    if (e.code === "Space") held = true;
  });
  window.addEventListener("keyup", (e) => {
    if (e.code === "Space") held = false;
  });
  canvas.addEventListener("pointerdown", () => (held = true));
  window.addEventListener("pointerup", () => (held = false));
  let last = performance.now();
  window.setInterval(() => {
    const now = performance.now();
    operator.tick(held, now - last);
    last = now;
    client.publish(operator.makePacket(Date.now()));
  }, operator.packetIntervalMs);
}

function resize(): void {
  canvas.width = window.innerWidth;
  canvas.height = window.innerHeight;
}
window.addEventListener("resize", resize);
resize();

function frame(): void {
  drawScene(ctx, scene, client.diagnostics, mode, held);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
