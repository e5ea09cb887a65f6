import { describe, expect, it } from "vitest";

import { decodePacket, encodePacket, ProtocolError, RmsPacket } from "../src/wire";

describe("encodePacket", () => {
  it("produces the canonical byte form", () => {
    const p: RmsPacket = { seq: 0, tSensorMs: 1000.0, tRmsMs: 1000.5, rmsMv: 0.25 };
    expect(encodePacket(p)).toBe(
      '{"seq":0,"t_sensor_ms":1000.000,"t_rms_ms":1000.500,"rms_mv":0.250000}',
    );
  });

  it("is deterministic", () => {
    const p: RmsPacket = { seq: 9, tSensorMs: 12.345, tRmsMs: 12.845, rmsMv: 0.1 };
    expect(encodePacket(p)).toBe(encodePacket({ ...p }));
  });
});

describe("decodePacket", () => {
  it("round-trips quantized packets", () => {
    for (let seq = 0; seq < 50; seq++) {
      const p: RmsPacket = {
        seq,
        tSensorMs: Math.round(seq * 13.3333 * 1000) / 1000,
        tRmsMs: Math.round((seq * 13.3333 + 0.5) * 1000) / 1000,
        rmsMv: Math.round(seq * 0.001234 * 1e6) / 1e6,
      };
      expect(decodePacket(encodePacket(p))).toEqual(p);
    }
  });

  it("accepts Uint8Array payloads", () => {
    const raw = new TextEncoder().encode(
      '{"seq":1,"t_sensor_ms":5.0,"t_rms_ms":5.5,"rms_mv":0.2}',
    );
    expect(decodePacket(raw).seq).toBe(1);
  });

  it("names the missing key", () => {
    expect(() => decodePacket('{"t_sensor_ms":1,"t_rms_ms":2,"rms_mv":3}'))
      .toThrow(/missing key seq/);
  });

  it("ignores extra keys", () => {
    const p = decodePacket(
      '{"seq":2,"t_sensor_ms":1,"t_rms_ms":2,"rms_mv":3,"debug":"x"}',
    );
    expect(p.rmsMv).toBe(3);
  });

  it("rejects bad fields", () => {
    expect(() => decodePacket('{"seq":0,"t_sensor_ms":"soon","t_rms_ms":2,"rms_mv":3}'))
      .toThrow(ProtocolError);
    expect(() => decodePacket('{"seq":0.5,"t_sensor_ms":1,"t_rms_ms":2,"rms_mv":3}'))
      .toThrow(/seq/);
    expect(() => decodePacket('{"seq":0,"t_sensor_ms":1,"t_rms_ms":2,"rms_mv":-1}'))
      .toThrow(/rms_mv/);
    expect(() => decodePacket("not json")).toThrow(ProtocolError);
    expect(() => decodePacket("[1,2]")).toThrow(ProtocolError);
  });
});
