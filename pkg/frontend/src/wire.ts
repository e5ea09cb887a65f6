/**
 * Wire packet schema and canonical JSON codec.
 *
 * Mirrors the pipeline's packet format: fixed key order, 3 decimal places on
 * timestamps, 6 on the RMS value. Decoding accepts any JSON object carrying
 * the four required keys and ignores extras, so peers can evolve the schema.
 */

export interface RmsPacket {
  seq: number;
  tSensorMs: number;
  tRmsMs: number;
  rmsMv: number;
}

export class ProtocolError extends Error {}

export function encodePacket(p: RmsPacket): string {
  return (
    `{"seq":${p.seq},` +
    `"t_sensor_ms":${p.tSensorMs.toFixed(3)},` +
    `"t_rms_ms":${p.tRmsMs.toFixed(3)},` +
    `"rms_mv":${p.rmsMv.toFixed(6)}}`
  );
}

const REQUIRED_KEYS = ["seq", "t_sensor_ms", "t_rms_ms", "rms_mv"] as const;

export function decodePacket(payload: string | Uint8Array): RmsPacket {
  const text =
    typeof payload === "string" ? payload : new TextDecoder().decode(payload);
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError(`payload is not valid JSON: ${err}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new ProtocolError("payload is not a JSON object");
  }
  const record = obj as Record<string, unknown>;
  for (const key of REQUIRED_KEYS) {
    if (!(key in record)) {
      throw new ProtocolError(`missing key ${key}`);
    }
    const value = record[key];
    if (typeof value !== "number" || !Number.isFinite(value)) {
      throw new ProtocolError(`field ${key} must be a finite number`);
    }
  }
  const seq = record["seq"] as number;
  if (!Number.isInteger(seq) || seq < 0) {
    throw new ProtocolError(`field seq must be a non-negative integer, got ${seq}`);
  }
  const rmsMv = record["rms_mv"] as number;
  if (rmsMv < 0) {
    throw new ProtocolError(`field rms_mv must be non-negative, got ${rmsMv}`);
  }
  return {
    seq,
    tSensorMs: record["t_sensor_ms"] as number,
    tRmsMs: record["t_rms_ms"] as number,
    rmsMv,
  };
}
