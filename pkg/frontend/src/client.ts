/**
 * MQTT-over-WebSocket wiring and connection diagnostics.
 *
 * Browsers cannot speak raw MQTT/TCP, so the broker must expose a WebSocket
 * listener (default port 9001). Malformed payloads are counted and surfaced
 * in the diagnostics strip; they never take the view down.
 */
import mqtt from "mqtt";

import { decodePacket, encodePacket, ProtocolError, RmsPacket } from "./wire";

export interface Diagnostics {
  connected: boolean;
  received: number;
  published: number;
  malformed: number;
  /** Display-side estimate: local receipt time minus packet sensor time.
   *  Only meaningful when publisher and browser share a clock. */
  lastLatencyMs: number | null;
  status: string;
}

export class FeedbackClient {
  readonly url: string;
  readonly dataTopic: string;
  diagnostics: Diagnostics = {
    connected: false,
    received: 0,
    published: 0,
    malformed: 0,
    lastLatencyMs: null,
    status: "connecting",
  };
  private client: mqtt.MqttClient | null = null;

  constructor(url: string, dataTopic: string) {
    this.url = url;
    this.dataTopic = dataTopic;
  }

  connect(onPacket: (packet: RmsPacket) => void): void {
    const client = mqtt.connect(this.url, { keepalive: 30 });
    this.client = client;
    client.on("connect", () => {
      this.diagnostics.connected = true;
      this.diagnostics.status = "connected";
      client.subscribe(this.dataTopic, { qos: 0 });
    });
    client.on("close", () => {
      this.diagnostics.connected = false;
      this.diagnostics.status = "disconnected";
    });
    client.on("error", (err: Error) => {
      this.diagnostics.status = `error: ${err.message}`;
    });
    client.on("message", (_topic: string, payload: Uint8Array) => {
      let packet: RmsPacket;
      try {
        packet = decodePacket(payload);
      } catch (err) {
        if (err instanceof ProtocolError) {
          this.diagnostics.malformed += 1;
          return;
        }
        throw err;
      }
      this.diagnostics.received += 1;
      this.diagnostics.lastLatencyMs = Date.now() - packet.tSensorMs;
      onPacket(packet);
    });
  }

  publish(packet: RmsPacket): void {
    if (!this.client || !this.diagnostics.connected) {
      return; // paused while disconnected; status strip shows the state
    }
    this.client.publish(this.dataTopic, encodePacket(packet), { qos: 0 });
    this.diagnostics.published += 1;
  }

  close(): void {
    this.client?.end(true);
  }
}
