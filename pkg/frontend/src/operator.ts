/**
 * Operator mode: a human generates the tension signal by holding an input.
 *
 * While held, the synthetic RMS ramps linearly from rest to max over
 * holdRampMs (isometric engagement); on release it decays exponentially back
 * toward rest with time constant releaseRampMs. Packets carry fresh
 * seq/t_sensor/t_rms stamps at the streaming rate, wire-identical to replayed
 * ones.
 */
import { Calibration } from "./scene";
import { RmsPacket } from "./wire";

export interface OperatorConfig {
  holdRampMs: number;
  releaseRampMs: number;
  rateHz: number;
  cal: Calibration;
}

export const DEFAULT_OPERATOR_CONFIG: OperatorConfig = {
  holdRampMs: 1000,
  releaseRampMs: 600,
  rateHz: 75,
  cal: { rmsRestMv: 0.05, rmsMaxMv: 0.35 },
};

export class OperatorSource {
  readonly cfg: OperatorConfig;
  rmsMv: number;
  private seq = 0;

  constructor(cfg: OperatorConfig = DEFAULT_OPERATOR_CONFIG) {
    if (cfg.holdRampMs <= 0 || cfg.releaseRampMs <= 0) {
      throw new Error("ramp durations must be positive");
    }
    this.cfg = cfg;
    this.rmsMv = cfg.cal.rmsRestMv;
  }

  /** Advance the synthetic tension by dtMs and return the updated RMS. */
  tick(held: boolean, dtMs: number): number {
    const { rmsRestMv, rmsMaxMv } = this.cfg.cal;
    if (held) {
      const step = ((rmsMaxMv - rmsRestMv) * dtMs) / this.cfg.holdRampMs;
      this.rmsMv = Math.min(rmsMaxMv, this.rmsMv + step);
    } else {
      const decay = Math.exp(-dtMs / this.cfg.releaseRampMs);
      this.rmsMv = rmsRestMv + (this.rmsMv - rmsRestMv) * decay;
    }
    return this.rmsMv;
  }

  /** Stamp the current tension as a wire packet. */
  makePacket(nowMs: number): RmsPacket {
    return {
      seq: this.seq++,
      tSensorMs: nowMs,
      tRmsMs: nowMs,
      rmsMv: this.rmsMv,
    };
  }

  get packetIntervalMs(): number {
    return 1000 / this.cfg.rateHz;
  }
}
